//! Isomonodromic deformation of the form coefficients as the poles move.
//!
//! With `∂ⱼ = ∂/∂aⱼ` the coefficients evolve by
//!
//! ```text
//! dBᵢ = −∑_{j≠i} [Bᵢ,Bⱼ]/(aᵢ−aⱼ)·d(aᵢ−aⱼ) − ∂ᵢC₁·daᵢ
//! dCₗ = ∑ᵢ ∂ᵢCₗ·daᵢ,   ∂ᵢCₗ = ∑_{m=l}^{k} [Bᵢ,C_m]/aᵢ^{m−l+1}
//! ```
//!
//! which is the zero-curvature condition of `ω¹ = A dz − ∑ⱼ Bⱼ/(z−aⱼ) daⱼ`.
//! The sign in front of `∂ᵢC₁` is the one that makes `ω¹` flat and reduces to
//! the classical Schlesinger system with `a₀ = 0`, `B₀ = C₁` when `k = 1`.

use num_complex::Complex64;

use crate::connform::LogConnectionForm;
use crate::error::{Error, Result, Violation};
use crate::gluing::{s_rhs, GluingData};
use crate::hypgeo::{ExtPoint, FundamentalPolygon};
use crate::linalg::{
    commutator, eigenvalues, from_row_major, multiset_distance, push_row_major, CMatrix,
};
use crate::ode::{integrate, IntegrationStats, StepperOptions};

/// Pole separation below which the flow stops.
pub const DEGENERACY_THRESHOLD: f64 = 1e-3;
/// Samples per path segment for the path placement checks.
pub const PATH_CHECK_SAMPLES: usize = 32;

/// How `∂ᵢC₁` enters `dBᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C1Coupling {
    /// `dBᵢ ∋ −∂ᵢC₁·daᵢ`; flat, conserves `C₁ + ∑Bᵢ`.
    #[default]
    Subtract,
    /// `dBᵢ ∋ +∂ᵢC₁·daᵢ`; kept only to demonstrate that it is not flat.
    Add,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchlesingerState {
    pub t: f64,
    pub form: LogConnectionForm,
    pub gluing: GluingData,
}

/// Time derivatives of the form coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FormDerivative {
    pub residues: Vec<CMatrix>,
    pub irregular: Vec<CMatrix>,
}

/// `table[i][l] = ∂Cₗ₊₁/∂aᵢ`, by the downward recursion
/// `∂C_k = [B,C_k]/a`, `∂Cₗ = (∂Cₗ₊₁ + [B,Cₗ])/a`.
pub fn c_partials(form: &LogConnectionForm) -> Vec<Vec<CMatrix>> {
    let k = form.order();
    form.poles()
        .iter()
        .zip(form.residues())
        .map(|(a, b)| {
            let inv_a = a.inv();
            let mut column = vec![CMatrix::zeros(form.rank(), form.rank()); k];
            let mut above = CMatrix::zeros(form.rank(), form.rank());
            for l in (0..k).rev() {
                above = (above + commutator(b, &form.irregular()[l])) * inv_a;
                column[l] = above.clone();
            }
            column
        })
        .collect()
}

fn check_separation(poles: &[Complex64], threshold: f64) -> Result<()> {
    for i in 0..poles.len() {
        for j in (i + 1)..poles.len() {
            let d = (poles[i] - poles[j]).norm();
            if d < threshold {
                return Err(Error::Degeneracy(format!(
                    "poles {i} and {j} are {d:e} apart (threshold {threshold:e})"
                )));
            }
        }
    }
    Ok(())
}

pub fn rhs(form: &LogConnectionForm, adot: &[Complex64]) -> Result<FormDerivative> {
    rhs_with(form, adot, C1Coupling::Subtract)
}

pub fn rhs_with(
    form: &LogConnectionForm,
    adot: &[Complex64],
    coupling: C1Coupling,
) -> Result<FormDerivative> {
    let n = form.poles().len();
    if adot.len() != n {
        return Err(Error::Input(format!(
            "{} velocities for {n} poles",
            adot.len()
        )));
    }
    check_separation(form.poles(), DEGENERACY_THRESHOLD)?;
    let partials = c_partials(form);
    let (a, b) = (form.poles(), form.residues());
    let sign = match coupling {
        C1Coupling::Subtract => -1.0,
        C1Coupling::Add => 1.0,
    };
    let residues = (0..n)
        .map(|i| {
            let mut d = &partials[i][0] * (adot[i] * sign);
            for j in 0..n {
                if j != i {
                    d -= commutator(&b[i], &b[j]) * ((adot[i] - adot[j]) / (a[i] - a[j]));
                }
            }
            d
        })
        .collect();
    let irregular = (0..form.order())
        .map(|l| {
            (0..n).fold(CMatrix::zeros(form.rank(), form.rank()), |acc, i| {
                acc + &partials[i][l] * adot[i]
            })
        })
        .collect();
    Ok(FormDerivative {
        residues,
        irregular,
    })
}

/// Response to translating every pole at once,
/// `max_i ‖∑ⱼ ∂Bᵢ/∂aⱼ + ∂C₁/∂aᵢ‖`; a diagnostic that vanishes for the flat
/// sign convention.
pub fn translation_defect(form: &LogConnectionForm, coupling: C1Coupling) -> Result<f64> {
    let n = form.poles().len();
    let partials = c_partials(form);
    let mut sum = vec![CMatrix::zeros(form.rank(), form.rank()); n];
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        let d = rhs_with(form, &e, coupling)?;
        for (acc, r) in sum.iter_mut().zip(&d.residues) {
            *acc += r;
        }
    }
    Ok((0..n)
        .map(|i| crate::linalg::frobenius(&(&sum[i] + &partials[i][0])))
        .fold(0.0, f64::max))
}

/// Piecewise-linear motion of the poles over `t ∈ [t₀, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationPath {
    times: Vec<f64>,
    waypoints: Vec<Vec<Complex64>>,
}

impl DeformationPath {
    pub fn new(times: Vec<f64>, waypoints: Vec<Vec<Complex64>>) -> Result<Self> {
        if times.is_empty() || times.len() != waypoints.len() {
            return Err(Error::Input(format!(
                "{} times for {} waypoints",
                times.len(),
                waypoints.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Input(
                "waypoint times must be finite and strictly increasing".into(),
            ));
        }
        let n = waypoints[0].len();
        if waypoints.iter().any(|w| w.len() != n) {
            return Err(Error::Input("waypoints have different pole counts".into()));
        }
        Ok(Self { times, waypoints })
    }

    /// Constant path at the given poles.
    pub fn stationary(poles: Vec<Complex64>) -> Self {
        Self {
            times: vec![0.0, 1.0],
            waypoints: vec![poles.clone(), poles],
        }
    }

    /// Moves pole `index` counterclockwise along the quarter circle of radius
    /// `radius` centred at `a − radius`, starting at `a`, over `t ∈ [0, 1]`.
    pub fn quarter_circle(
        poles: &[Complex64],
        index: usize,
        radius: f64,
        pieces: usize,
    ) -> Result<Self> {
        if index >= poles.len() {
            return Err(Error::Input(format!("pole index {index} out of range")));
        }
        let pieces = pieces.max(1);
        let center = poles[index] - Complex64::new(radius, 0.0);
        let mut times = Vec::with_capacity(pieces + 1);
        let mut waypoints = Vec::with_capacity(pieces + 1);
        for m in 0..=pieces {
            let t = m as f64 / pieces as f64;
            let mut w = poles.to_vec();
            w[index] = center + Complex64::from_polar(radius, t * std::f64::consts::FRAC_PI_2);
            times.push(t);
            waypoints.push(w);
        }
        Self::new(times, waypoints)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn waypoints(&self) -> &[Vec<Complex64>] {
        &self.waypoints
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn segment_of(&self, t: f64) -> usize {
        if self.times.len() < 2 {
            return 0;
        }
        let m = self.times.partition_point(|&x| x <= t);
        m.clamp(1, self.times.len() - 1) - 1
    }

    fn on_segment(&self, m: usize, t: f64) -> Vec<Complex64> {
        if self.times.len() < 2 {
            return self.waypoints[0].clone();
        }
        let (t0, t1) = (self.times[m], self.times[m + 1]);
        let u = (t - t0) / (t1 - t0);
        self.waypoints[m]
            .iter()
            .zip(&self.waypoints[m + 1])
            .map(|(a, b)| a + (b - a) * u)
            .collect()
    }

    fn velocity_on(&self, m: usize) -> Vec<Complex64> {
        if self.times.len() < 2 {
            return vec![Complex64::new(0.0, 0.0); self.waypoints[0].len()];
        }
        let dt = self.times[m + 1] - self.times[m];
        self.waypoints[m]
            .iter()
            .zip(&self.waypoints[m + 1])
            .map(|(a, b)| (b - a) / dt)
            .collect()
    }

    pub fn poles_at(&self, t: f64) -> Vec<Complex64> {
        self.on_segment(self.segment_of(t), t)
    }

    pub fn velocity_at(&self, t: f64) -> Vec<Complex64> {
        self.velocity_on(self.segment_of(t))
    }

    /// The same motion run backwards over the same time interval.
    pub fn reversed(&self) -> Self {
        let (t0, t1) = (self.start_time(), self.end_time());
        let times = self.times.iter().rev().map(|t| t0 + t1 - t).collect();
        let waypoints = self.waypoints.iter().rev().cloned().collect();
        Self { times, waypoints }
    }

    /// Placement checks at [`PATH_CHECK_SAMPLES`] points per segment.
    pub fn violations(&self, polygon: &FundamentalPolygon, delta: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        let segments = self.times.len().saturating_sub(1).max(1);
        for m in 0..segments {
            for q in 0..=PATH_CHECK_SAMPLES {
                let t = if self.times.len() < 2 {
                    self.times[0]
                } else {
                    let (t0, t1) = (self.times[m], self.times[m + 1]);
                    t0 + (t1 - t0) * q as f64 / PATH_CHECK_SAMPLES as f64
                };
                let poles = self.on_segment(m, t);
                for (i, a) in poles.iter().enumerate() {
                    if a.norm() <= 1.0 {
                        out.push(Violation::new(
                            format!("path.poles[{i}]"),
                            format!("pole at t = {t} lies in the closed unit disc"),
                        ));
                    } else {
                        match polygon.contains(*a) {
                            Ok(true) => {}
                            Ok(false) => out.push(Violation::new(
                                format!("path.poles[{i}]"),
                                format!("pole at t = {t} leaves the fundamental polygon"),
                            )),
                            Err(e) => {
                                out.push(Violation::new(format!("path.poles[{i}]"), e.to_string()))
                            }
                        }
                    }
                    for b in &poles[..i] {
                        let d = (a - b).norm();
                        if !(d > 10.0 * delta) {
                            out.push(Violation::new(
                                format!("path.poles[{i}]"),
                                format!(
                                    "pole separation {d} at t = {t} is not above 10·δ = {}",
                                    10.0 * delta
                                ),
                            ));
                        }
                    }
                }
                if !out.is_empty() {
                    return out;
                }
            }
        }
        out
    }
}

/// Invariants recorded at each snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMonitor {
    pub t: f64,
    /// `‖C₁ + ∑Bᵢ‖`.
    pub infinity_defect: f64,
    /// Largest eigenvalue drift of any `Bᵢ` since the start.
    pub spectral_drift: f64,
    /// See [`translation_defect`].
    pub translation_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<SchlesingerState>,
    pub monitors: Vec<FlowMonitor>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn last(&self) -> &SchlesingerState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn max_infinity_defect(&self) -> f64 {
        self.monitors
            .iter()
            .map(|m| m.infinity_defect)
            .fold(0.0, f64::max)
    }

    pub fn max_spectral_drift(&self) -> f64 {
        self.monitors
            .iter()
            .map(|m| m.spectral_drift)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    pub stepper: StepperOptions,
    /// Extra snapshot times; waypoint times are always included.
    pub snapshots: Vec<f64>,
    pub coupling: C1Coupling,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            stepper: StepperOptions::default(),
            snapshots: Vec::new(),
            coupling: C1Coupling::Subtract,
        }
    }
}

struct Layout {
    p: usize,
    n: usize,
    k: usize,
    s: usize,
}

impl Layout {
    fn pack(&self, form: &LogConnectionForm, gluing: &GluingData) -> Vec<Complex64> {
        let mut y = Vec::with_capacity((self.n + self.k + self.s) * self.p * self.p);
        for m in form
            .residues()
            .iter()
            .chain(form.irregular())
            .chain(gluing.matrices())
        {
            push_row_major(m, &mut y);
        }
        y
    }

    fn unpack(&self, y: &[Complex64]) -> (Vec<CMatrix>, Vec<CMatrix>, Vec<CMatrix>) {
        let pp = self.p * self.p;
        let take = |start: usize, count: usize| -> Vec<CMatrix> {
            (0..count)
                .map(|m| from_row_major(self.p, &y[(start + m) * pp..]))
                .collect()
        };
        (
            take(0, self.n),
            take(self.n, self.k),
            take(self.n + self.k, self.s),
        )
    }
}

fn spectral_drift(initial: &[Vec<Complex64>], form: &LogConnectionForm) -> f64 {
    initial
        .iter()
        .zip(form.residues())
        .map(|(ev0, b)| multiset_distance(ev0, &eigenvalues(b)))
        .fold(0.0, f64::max)
}

/// Integrates the coefficients and gluing matrices jointly along `path`,
/// with the polygon vertices held fixed.
pub fn flow(
    state0: &SchlesingerState,
    path: &DeformationPath,
    vertices: &[ExtPoint],
    opts: &FlowOptions,
) -> Result<Trajectory> {
    let form0 = &state0.form;
    let start_poles = path.poles_at(path.start_time());
    if start_poles.len() != form0.poles().len()
        || start_poles
            .iter()
            .zip(form0.poles())
            .any(|(a, b)| (a - b).norm() > 1e-12 * (1.0 + b.norm()))
    {
        return Err(Error::Input(
            "path does not start at the state's poles".into(),
        ));
    }
    let layout = Layout {
        p: form0.rank(),
        n: form0.poles().len(),
        k: form0.order(),
        s: state0.gluing.matrices().len(),
    };
    let initial_spectra: Vec<Vec<Complex64>> = form0.residues().iter().map(eigenvalues).collect();
    let monitor = |t: f64, form: &LogConnectionForm| -> Result<FlowMonitor> {
        Ok(FlowMonitor {
            t,
            infinity_defect: form.infinity_defect(),
            spectral_drift: spectral_drift(&initial_spectra, form),
            translation_defect: translation_defect(form, opts.coupling)?,
        })
    };

    let mut states = vec![state0.clone()];
    let mut monitors = vec![monitor(state0.t, form0)?];
    let mut stats = IntegrationStats::default();
    let (t_start, t_end) = (path.start_time(), path.end_time());
    if path.times().len() < 2 || t_end == t_start {
        return Ok(Trajectory {
            states,
            monitors,
            stats,
        });
    }

    let mut stops: Vec<f64> = path
        .times()
        .iter()
        .copied()
        .chain(
            opts.snapshots
                .iter()
                .copied()
                .filter(|t| *t > t_start && *t < t_end),
        )
        .collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);

    let mut y = layout.pack(form0, &state0.gluing);
    let mut form = form0.clone();
    for w in stops.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let segment = path.segment_of(0.5 * (ta + tb));
        let adot = path.velocity_on(segment);
        let template = form.clone();
        let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
            let poles = path.on_segment(segment, t);
            let (b, cs, s) = layout.unpack(y);
            let f = template.with_coefficients(poles, b, cs)?;
            let d = rhs_with(&f, &adot, opts.coupling).map_err(|e| match e {
                Error::Degeneracy(m) => Error::Degeneracy(format!("{m} at t = {t}")),
                other => other,
            })?;
            let ds = s_rhs(
                &f,
                &GluingData::from_matrices(s),
                vertices,
                &adot,
                DEGENERACY_THRESHOLD,
            )?;
            let mut out = Vec::with_capacity(dy.len());
            for m in d.residues.iter().chain(&d.irregular).chain(&ds) {
                push_row_major(m, &mut out);
            }
            dy.copy_from_slice(&out);
            Ok(())
        };
        let (next, seg_stats) = integrate(rhs, ta, tb, &y, &opts.stepper)?;
        stats.merge(&seg_stats);
        y = next;
        let (b, cs, s) = layout.unpack(&y);
        form = template.with_coefficients(path.on_segment(segment, tb), b, cs)?;
        let gluing = GluingData::from_matrices(s);
        if !y.iter().all(|z| z.is_finite()) {
            return Err(Error::Numerical {
                at: tb,
                message: "flow produced non-finite coefficients".into(),
            });
        }
        monitors.push(monitor(tb, &form)?);
        states.push(SchlesingerState {
            t: tb,
            form: form.clone(),
            gluing,
        });
    }
    Ok(Trajectory {
        states,
        monitors,
        stats,
    })
}

/// Points where the flatness identity is sampled: two rings, one between the
/// unit circle and the nearest pole and one outside all poles.
fn flatness_probes(poles: &[Complex64]) -> Vec<Complex64> {
    let min_abs = poles.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
    let max_abs = poles.iter().map(|a| a.norm()).fold(1.0, f64::max);
    let inner = if min_abs.is_finite() {
        0.5 * (1.0 + min_abs)
    } else {
        2.0
    };
    let outer = 2.0 * max_abs;
    (0..8)
        .flat_map(|q| {
            let th = (q as f64 + 0.5) * std::f64::consts::PI / 4.0;
            [
                Complex64::from_polar(inner, th),
                Complex64::from_polar(outer, th),
            ]
        })
        .collect()
}

/// Largest residual of `∂ₜA − ∂_zΩ + [A, Ω] = 0`, with `Ω = −∑ⱼ Bⱼȧⱼ/(z−aⱼ)`,
/// estimated by central differences over consecutive snapshots.
pub fn flatness_defect(trajectory: &[SchlesingerState]) -> Result<f64> {
    if trajectory.len() < 3 {
        return Err(Error::Input(format!(
            "flatness needs at least 3 snapshots, got {}",
            trajectory.len()
        )));
    }
    let mut worst = 0.0_f64;
    for m in 1..trajectory.len() - 1 {
        let (prev, cur, next) = (&trajectory[m - 1], &trajectory[m], &trajectory[m + 1]);
        let dt = next.t - prev.t;
        if dt == 0.0 {
            return Err(Error::Input("snapshots share a time stamp".into()));
        }
        let adot: Vec<Complex64> = prev
            .form
            .poles()
            .iter()
            .zip(next.form.poles())
            .map(|(a, b)| (b - a) / dt)
            .collect();
        for z in flatness_probes(cur.form.poles()) {
            let da = (next.form.evaluate(z)? - prev.form.evaluate(z)?) / Complex64::new(dt, 0.0);
            let a = cur.form.evaluate(z)?;
            let mut omega = CMatrix::zeros(a.nrows(), a.ncols());
            let mut d_omega = omega.clone();
            for ((aj, bj), v) in cur.form.poles().iter().zip(cur.form.residues()).zip(&adot) {
                let d = z - aj;
                omega -= bj * (v / d);
                d_omega += bj * (v / (d * d));
            }
            let residual = da - d_omega + commutator(&a, &omega);
            worst = worst.max(crate::linalg::frobenius(&residual));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, dist, identity, zeros};

    fn m(e: [f64; 8]) -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[c(e[0], e[1]), c(e[2], e[3]), c(e[4], e[5]), c(e[6], e[7])],
        )
    }

    #[test]
    fn scalar_partials_vanish() {
        let form = LogConnectionForm::new(
            vec![c(2.0, 0.0)],
            vec![CMatrix::from_element(1, 1, c(0.3, 0.0))],
            vec![
                CMatrix::from_element(1, 1, c(-0.3, 0.0)),
                CMatrix::from_element(1, 1, c(0.7, 0.1)),
            ],
            8,
        )
        .unwrap();
        for col in c_partials(&form) {
            assert!(col.iter().all(|x| x[(0, 0)].norm() == 0.0));
        }
    }

    #[test]
    fn single_pole_typical_form_is_static() {
        let b = m([0.1, 0.0, 0.2, 0.1, -0.3, 0.0, -0.1, 0.0]);
        let form = LogConnectionForm::typical(vec![c(2.0, 1.0)], vec![b]).unwrap();
        let d = rhs(&form, &[c(0.3, -0.2)]).unwrap();
        assert!(dist(&d.residues[0], &zeros(2)) < 1e-15);
    }

    #[test]
    fn collision_is_degenerate() {
        let form = LogConnectionForm::typical(
            vec![c(2.0, 0.0), c(2.0005, 0.0)],
            vec![identity(2), identity(2)],
        )
        .unwrap();
        assert!(matches!(
            rhs(&form, &[c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::Degeneracy(_))
        ));
    }

    #[test]
    fn conservation_of_infinity_residue() {
        let b1 = m([0.1, 0.2, 0.3, -0.1, 0.2, 0.0, -0.1, -0.2]);
        let b2 = m([-0.2, 0.1, 0.0, 0.3, 0.1, -0.1, 0.2, -0.1]);
        let c2 = m([0.05, 0.0, 0.1, 0.1, -0.2, 0.0, -0.05, 0.0]);
        let c1 = -(&b1 + &b2);
        let form = LogConnectionForm::new(
            vec![c(2.0, 1.0), c(-1.5, 2.0)],
            vec![b1, b2],
            vec![c1, c2],
            8,
        )
        .unwrap();
        let d = rhs(&form, &[c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
        let total = d
            .residues
            .iter()
            .fold(d.irregular[0].clone(), |acc, x| acc + x);
        assert!(crate::linalg::frobenius(&total) < 1e-15);
        assert!(translation_defect(&form, C1Coupling::Subtract).unwrap() < 1e-15);
        assert!(translation_defect(&form, C1Coupling::Add).unwrap() > 1e-3);
    }

    #[test]
    fn quarter_circle_endpoints() {
        let poles = [c(-2.6, 1.3), c(-4.0, 1.2)];
        let path = DeformationPath::quarter_circle(&poles, 0, 0.1, 16).unwrap();
        assert_eq!(path.poles_at(0.0)[0], poles[0]);
        assert!((path.poles_at(1.0)[0] - c(-2.7, 1.4)).norm() < 1e-12);
        assert_eq!(path.poles_at(0.5)[1], poles[1]);
        let r = path.reversed();
        assert!((r.poles_at(0.0)[0] - c(-2.7, 1.4)).norm() < 1e-12);
    }

    #[test]
    fn stationary_path_keeps_state() {
        let b = m([0.1, 0.0, 0.2, 0.1, -0.3, 0.0, -0.1, 0.0]);
        let b2 = m([0.0, 0.1, -0.2, 0.0, 0.1, 0.1, 0.0, -0.1]);
        let form =
            LogConnectionForm::typical(vec![c(3.0, 0.0), c(-3.0, 0.5)], vec![b, b2]).unwrap();
        let state = SchlesingerState {
            t: 0.0,
            form: form.clone(),
            gluing: GluingData::identity(2, 8),
        };
        let path = DeformationPath::stationary(form.poles().to_vec());
        let verts = vec![ExtPoint::Infinity; 8];
        let traj = flow(&state, &path, &verts, &FlowOptions::default()).unwrap();
        assert_eq!(traj.last().form, form);
    }
}
