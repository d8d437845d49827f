//! Gluing matrices `S_{x¹,xⁱ}` between the fibres over polygon vertices, the
//! chain and edge-loop monodromies they define, and the edge consistency test.
//!
//! Vertices are 0-based here: vertex `k` is `x^{k+1}`, vertex 0 is ∞ and
//! carries the identity. Edge `k` runs from vertex `k` to vertex `k + 1`
//! (mod 4g). Pair matrices follow `S_{i,k} = S_{1,k}·S_{1,i}⁻¹`, so that
//! `S_{j,m}·S_{i,j} = S_{i,m}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::connform::LogConnectionForm;
use crate::error::{Error, Result, Violation};
use crate::hypgeo::{ExtPoint, FundamentalPolygon, MobiusMap};
use crate::linalg::{c, condition_number, dist, frobenius, identity, inverse, CMatrix};
use crate::transport::{transport, PathSpec, Segment, TransportContext, TransportResult};

/// Condition number above which a gluing matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GluingData {
    /// `S_{x¹,xⁱ}` for `i = 2, …, 4g`.
    matrices: Vec<CMatrix>,
}

impl GluingData {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        let data = Self { matrices };
        let v = data.violations();
        if v.is_empty() {
            Ok(data)
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Shape checks only; used for states produced by the flow.
    pub(crate) fn from_matrices(matrices: Vec<CMatrix>) -> Self {
        Self { matrices }
    }

    pub fn identity(rank: usize, vertex_count: usize) -> Self {
        Self {
            matrices: vec![identity(rank); vertex_count.saturating_sub(1)],
        }
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn vertex_count(&self) -> usize {
        self.matrices.len() + 1
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let rank = self.matrices.first().map(|m| m.nrows()).unwrap_or(0);
        for (k, m) in self.matrices.iter().enumerate() {
            let field = format!("gluing[{k}]");
            if m.nrows() != rank || m.ncols() != rank {
                out.push(Violation::new(field, "matrix shape differs from gluing[0]"));
                continue;
            }
            let cond = condition_number(m);
            if !(cond < MAX_CONDITION) {
                out.push(Violation::new(
                    field,
                    format!("matrix is not invertible (condition number {cond:e})"),
                ));
            }
        }
        out
    }

    pub fn condition_numbers(&self) -> Vec<f64> {
        self.matrices.iter().map(condition_number).collect()
    }

    /// `S_{x¹, vertex k}`, with vertex 0 (and its wrap-around `4g`) the identity.
    pub fn vertex_matrix(&self, k: usize) -> CMatrix {
        let n = self.vertex_count();
        let k = k % n;
        if k == 0 {
            let p = self.matrices.first().map(|m| m.nrows()).unwrap_or(1);
            identity(p)
        } else {
            self.matrices[k - 1].clone()
        }
    }

    /// `S_{vertex i, vertex k} = S_{1,k}·S_{1,i}⁻¹`.
    pub fn pair_matrix(&self, i: usize, k: usize) -> Result<CMatrix> {
        Ok(self.vertex_matrix(k) * inverse(&self.vertex_matrix(i))?)
    }

    /// Change of coherent basis: every stored `S` is multiplied by `g` on the right.
    pub fn right_multiplied(&self, g: &CMatrix) -> Self {
        Self {
            matrices: self.matrices.iter().map(|m| m * g).collect(),
        }
    }
}

fn edge_segment(polygon: &FundamentalPolygon, k: usize) -> Segment {
    Segment::from_geodesic(&polygon.edges()[k % polygon.vertex_count()])
}

fn check_rank(
    form: &LogConnectionForm,
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
) -> Result<()> {
    if gluing.vertex_count() != polygon.vertex_count() {
        return Err(Error::Input(format!(
            "{} gluing matrices for a {}-gon",
            gluing.matrices().len(),
            polygon.vertex_count()
        )));
    }
    if let Some(m) = gluing.matrices().first() {
        if m.nrows() != form.rank() {
            return Err(Error::Input(
                "gluing matrices and form have different ranks".into(),
            ));
        }
    }
    Ok(())
}

/// Transport along every edge with identity initial data, concurrently.
pub fn edge_transports(
    form: &LogConnectionForm,
    polygon: &FundamentalPolygon,
    ctx: &TransportContext,
) -> Result<Vec<TransportResult>> {
    (0..polygon.vertex_count())
        .into_par_iter()
        .map(|k| {
            let path = ctx.path(vec![edge_segment(polygon, k)])?;
            transport(form, &path, &identity(form.rank()), &ctx.stepper)
        })
        .collect()
}

/// Path from vertex 0 (∞) along edges `0, …, i − 1` to vertex `i`.
pub fn chain_path(
    polygon: &FundamentalPolygon,
    i: usize,
    ctx: &TransportContext,
) -> Result<PathSpec> {
    ctx.path((0..i).map(|k| edge_segment(polygon, k)).collect())
}

/// The boundary `∂U` traversed from ∞ back to ∞.
pub fn boundary_path(polygon: &FundamentalPolygon, ctx: &TransportContext) -> Result<PathSpec> {
    chain_path(polygon, polygon.vertex_count(), ctx)
}

/// Monodromy along the whole boundary, `M_γ`.
pub fn boundary_monodromy(
    form: &LogConnectionForm,
    polygon: &FundamentalPolygon,
    ctx: &TransportContext,
) -> Result<CMatrix> {
    let path = boundary_path(polygon, ctx)?;
    Ok(transport(form, &path, &identity(form.rank()), &ctx.stepper)?.y_end)
}

/// `S_{x¹,xⁱ}⁻¹·Y(xⁱ)` for `Y` transported along `x¹ → x² → … → xⁱ` with
/// `Y(x¹) = I`. `i` is 1-based, `2 ≤ i ≤ 4g`.
pub fn chain_monodromy(
    form: &LogConnectionForm,
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
    i: usize,
    ctx: &TransportContext,
) -> Result<CMatrix> {
    chain_monodromy_in_basis(form, gluing, polygon, i, &identity(form.rank()), ctx)
}

/// As [`chain_monodromy`] with `Y(x¹) = y0`.
pub fn chain_monodromy_in_basis(
    form: &LogConnectionForm,
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
    i: usize,
    y0: &CMatrix,
    ctx: &TransportContext,
) -> Result<CMatrix> {
    check_rank(form, gluing, polygon)?;
    let n = polygon.vertex_count();
    if !(2..=n).contains(&i) {
        return Err(Error::Input(format!("chain index {i} outside 2..={n}")));
    }
    let path = chain_path(polygon, i - 1, ctx)?;
    let y = transport(form, &path, y0, &ctx.stepper)?.y_end;
    Ok(inverse(&gluing.vertex_matrix(i - 1))? * y)
}

/// `S_{x¹,x^{i+1}}⁻¹·Ỹ(x^{i+1})` for `Ỹ` transported along edge `xⁱx^{i+1}`
/// from `Ỹ(xⁱ) = S_{x¹,xⁱ}`. `i` is 1-based, `1 ≤ i ≤ 4g`.
pub fn edge_loop_monodromy(
    form: &LogConnectionForm,
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
    i: usize,
    ctx: &TransportContext,
) -> Result<CMatrix> {
    check_rank(form, gluing, polygon)?;
    let n = polygon.vertex_count();
    if !(1..=n).contains(&i) {
        return Err(Error::Input(format!("edge index {i} outside 1..={n}")));
    }
    let k = i - 1;
    let path = ctx.path(vec![edge_segment(polygon, k)])?;
    let y = transport(form, &path, &gluing.vertex_matrix(k), &ctx.stepper)?.y_end;
    Ok(inverse(&gluing.vertex_matrix(k + 1))? * y)
}

/// Edge-loop monodromies `N_k = S_{k+1}⁻¹·T_k·S_k` from precomputed edge transports.
pub fn edge_loops_from_transports(
    gluing: &GluingData,
    transports: &[TransportResult],
) -> Result<Vec<CMatrix>> {
    (0..transports.len())
        .map(|k| {
            Ok(inverse(&gluing.vertex_matrix(k + 1))?
                * &transports[k].y_end
                * gluing.vertex_matrix(k))
        })
        .collect()
}

/// Pointwise gluing `Y₂(z')·Y₁(z)⁻¹` at the point of edge `k` (0-based) with
/// parameter `s`, where `z'` is its image on the partner edge.
///
/// `Y₁` starts from the identity at the start of edge `k`; `Y₂` runs along the
/// partner edge from its end with initial value `S_{xⁱ,x^{j+1}}`.
pub fn edge_gluing_matrix(
    form: &LogConnectionForm,
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
    generators: &[MobiusMap],
    k: usize,
    s: f64,
    ctx: &TransportContext,
) -> Result<CMatrix> {
    check_rank(form, gluing, polygon)?;
    let n = polygon.vertex_count();
    if k >= n {
        return Err(Error::Input(format!("edge index {k} out of range")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Input(format!("edge parameter {s} outside [0, 1]")));
    }
    let j = polygon.pairing()[k].partner;
    let seg = edge_segment(polygon, k);
    let z = seg.point(s);
    let z_image = polygon.pairing_map(generators, k).apply(z);
    let partner_back = edge_segment(polygon, j).reversed();
    let s_image = partner_back.locate(z_image);

    let y1 = transport(
        form,
        &ctx.path(vec![seg.restricted(0.0, s)])?,
        &identity(form.rank()),
        &ctx.stepper,
    )?
    .y_end;
    let start = gluing.pair_matrix(k, j + 1)?;
    let y2 = transport(
        form,
        &ctx.path(vec![partner_back.restricted(0.0, s_image)])?,
        &start,
        &ctx.stepper,
    )?
    .y_end;
    Ok(y2 * inverse(&y1)?)
}

/// Largest mismatch in the edge consistency condition over all edge pairs.
pub fn consistency_defect(
    form: &LogConnectionForm,
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
    ctx: &TransportContext,
) -> Result<f64> {
    check_rank(form, gluing, polygon)?;
    let transports = edge_transports(form, polygon, ctx)?;
    consistency_defect_from_transports(gluing, polygon, form, &transports, ctx)
}

fn consistency_defect_from_transports(
    gluing: &GluingData,
    polygon: &FundamentalPolygon,
    form: &LogConnectionForm,
    transports: &[TransportResult],
    ctx: &TransportContext,
) -> Result<f64> {
    let n = polygon.vertex_count();
    let pairs: Vec<(usize, usize)> = (0..n)
        .map(|i| (i, polygon.pairing()[i].partner))
        .filter(|(i, j)| i < j)
        .collect();
    let defects: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            // Y₁ along xⁱ → x^{i+1} from S_{1,i}.
            let y1_start = gluing.vertex_matrix(i);
            let y1_end = &transports[i].y_end * &y1_start;
            let lhs = inverse(&y1_start)? * inverse(&gluing.pair_matrix(i, i + 1)?)? * y1_end;
            // Y₂ along x^{j+1} → xʲ from S_{1,j+1}, integrated in that direction.
            let y2_start = gluing.vertex_matrix(j + 1);
            let back = ctx.path(vec![edge_segment(polygon, j).reversed()])?;
            let y2_end = transport(form, &back, &y2_start, &ctx.stepper)?.y_end;
            let rhs = inverse(&y2_start)? * inverse(&gluing.pair_matrix(j + 1, j)?)? * y2_end;
            Ok(dist(&lhs, &rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// `dS_{x¹,xⁱ}/dt = [∑ⱼ Bⱼ/(xⁱ − aⱼ)·(−ȧⱼ)]·S_{x¹,xⁱ}` with vertices held fixed.
pub fn s_rhs(
    form: &LogConnectionForm,
    gluing: &GluingData,
    vertices: &[ExtPoint],
    adot: &[Complex64],
    degeneracy: f64,
) -> Result<Vec<CMatrix>> {
    let p = form.rank();
    gluing
        .matrices()
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let x = match vertices.get(idx + 1) {
                Some(ExtPoint::Finite(x)) => *x,
                Some(ExtPoint::Infinity) => return Ok(CMatrix::zeros(p, p)),
                None => return Err(Error::Input("fewer vertices than gluing matrices".into())),
            };
            let mut omega = CMatrix::zeros(p, p);
            for ((a, b), v) in form.poles().iter().zip(form.residues()).zip(adot) {
                let d = x - a;
                if d.norm() < degeneracy {
                    return Err(Error::Degeneracy(format!(
                        "pole {a} within {degeneracy:e} of vertex {x}"
                    )));
                }
                omega -= b * (v / d);
            }
            Ok(omega * s)
        })
        .collect()
}

fn random_matrix<R: Rng>(rng: &mut R, p: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(p, p, |_, _| {
        c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}

fn random_unimodular_near_identity<R: Rng>(rng: &mut R, p: usize) -> CMatrix {
    let mut x = random_matrix(rng, p, 0.3);
    let tr = x.trace() / p as f64;
    for i in 0..p {
        x[(i, i)] -= tr;
    }
    x.exp()
}

/// Solves `Y⁻¹X⁻¹YX = P` for 2×2 `X, Y` with unit determinant.
fn solve_commutator<R: Rng>(rng: &mut R, target: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let p = 2;
    let shifted = target - identity(p);
    for _ in 0..64 {
        // Z = X⁻¹ must satisfy tr(Z) = tr(PZ) and det Z = 1.
        let mut z = identity(p) + random_matrix(rng, p, 0.5);
        let norm2 = frobenius(&shifted).powi(2);
        if norm2 > 1e-24 {
            let e = shifted.adjoint();
            let l = (&shifted * &z).trace();
            z -= e * (l / norm2);
        }
        let det = z.determinant();
        if det.norm() < 1e-6 {
            continue;
        }
        z /= det.sqrt();
        let pz = target * &z;
        // Null space of Y ↦ ZY − Y(PZ) on row-major vec(Y).
        let mut op = DMatrix::<Complex64>::zeros(p * p, p * p);
        for col in 0..p * p {
            let mut basis = CMatrix::zeros(p, p);
            basis[(col / p, col % p)] = c(1.0, 0.0);
            let img = &z * &basis - &basis * &pz;
            for r in 0..p * p {
                op[(r, col)] = img[(r / p, r % p)];
            }
        }
        let svd = op.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::Numerical {
            at: 0.0,
            message: "SVD failed in the gluing solve".into(),
        })?;
        let sv = &svd.singular_values;
        let mut idx: Vec<usize> = (0..sv.len()).collect();
        idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
        let null_vec = |i: usize| {
            let row = v_t.row(idx[i]);
            CMatrix::from_fn(p, p, |r, cc| row[r * p + cc].conj())
        };
        let lambda = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut y = null_vec(0) + null_vec(1) * lambda;
        let det_y = y.determinant();
        if det_y.norm() < 1e-6 {
            continue;
        }
        y /= det_y.sqrt();
        let x = inverse(&z)?;
        let residual = dist(&(inverse(&y)? * inverse(&x)? * &y * &x), target);
        if residual < 1e-9 * (1.0 + frobenius(target)) {
            return Ok((x, y));
        }
    }
    Err(Error::Numerical {
        at: 0.0,
        message: "could not solve the commutator equation for the last handle".into(),
    })
}

/// Gluing data satisfying the edge consistency condition exactly, built from
/// the edge transports of `form`.
///
/// Consistency is equivalent to `N_j = N_i⁻¹` on paired edges, where
/// `N_k = S_{k+1}⁻¹·T_k·S_k`. The `N` of all but the last handle are drawn at
/// random; the last handle is solved so that the boundary relation
/// `N_{4g−1}⋯N_0 = M_γ` holds, and the `S` follow by recursion. Supported for
/// rank 2, and for rank 1 when `M_γ = 1`.
pub fn consistent_gluing<R: Rng>(
    form: &LogConnectionForm,
    polygon: &FundamentalPolygon,
    ctx: &TransportContext,
    rng: &mut R,
) -> Result<GluingData> {
    let n = polygon.vertex_count();
    let genus = polygon.genus();
    for h in 0..genus {
        let b = 4 * h;
        let pr = polygon.pairing();
        if pr[b].partner != b + 2 || pr[b + 1].partner != b + 3 {
            return Err(Error::Input(
                "consistent gluing needs the standard handle pairing a b a⁻¹ b⁻¹".into(),
            ));
        }
    }
    let p = form.rank();
    let transports = edge_transports(form, polygon, ctx)?;
    let m_gamma = transports.iter().fold(identity(p), |acc, t| &t.y_end * acc);

    let mut loops = vec![identity(p); n];
    match p {
        1 => {
            if dist(&m_gamma, &identity(1)) > 1e-9 {
                return Err(Error::Input(
                    "rank-1 consistent gluing needs trivial boundary monodromy".into(),
                ));
            }
            for h in 0..genus {
                let x = random_unimodular_near_identity(rng, 1) * c(rng.gen_range(0.8..1.2), 0.0);
                let y = CMatrix::from_element(
                    1,
                    1,
                    c(rng.gen_range(0.8..1.2), rng.gen_range(-0.2..0.2)),
                );
                loops[4 * h] = x.clone();
                loops[4 * h + 1] = y.clone();
                loops[4 * h + 2] = inverse(&x)?;
                loops[4 * h + 3] = inverse(&y)?;
            }
        }
        2 => {
            let mut earlier = identity(p);
            for h in 0..genus - 1 {
                let x = random_unimodular_near_identity(rng, p);
                let y = random_unimodular_near_identity(rng, p);
                let (xi, yi) = (inverse(&x)?, inverse(&y)?);
                earlier = &yi * &xi * &y * &x * earlier;
                loops[4 * h] = x;
                loops[4 * h + 1] = y;
                loops[4 * h + 2] = xi;
                loops[4 * h + 3] = yi;
            }
            let target = &m_gamma * inverse(&earlier)?;
            let (x, y) = solve_commutator(rng, &target)?;
            let h = genus - 1;
            loops[4 * h + 2] = inverse(&x)?;
            loops[4 * h + 3] = inverse(&y)?;
            loops[4 * h] = x;
            loops[4 * h + 1] = y;
        }
        _ => {
            return Err(Error::Input(format!(
                "consistent gluing construction is implemented for rank 1 and 2, not {p}"
            )))
        }
    }

    let mut matrices = Vec::with_capacity(n - 1);
    let mut s = identity(p);
    for k in 0..n - 1 {
        s = &transports[k].y_end * &s * inverse(&loops[k])?;
        matrices.push(s.clone());
    }
    let closure = &transports[n - 1].y_end * &s * inverse(&loops[n - 1])?;
    let closure_defect = dist(&closure, &identity(p));
    if closure_defect > 1e-8 {
        return Err(Error::Numerical {
            at: 0.0,
            message: format!("gluing recursion does not close (defect {closure_defect:e})"),
        });
    }
    GluingData::new(matrices)
}
