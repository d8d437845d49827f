//! The connection form `A(z) dz` on the sphere with logarithmic poles at
//! `a₁, …, aₙ` and a pole of order `k` at the origin.

use num_complex::Complex64;

use crate::error::{Error, Result, Violation};
use crate::linalg::{frobenius, zeros, CMatrix};

pub const DEFAULT_MAX_IRREGULAR_ORDER: usize = 8;
/// Tolerance on `‖C₁ + ∑Bᵢ‖` for a form to count as regular at ∞.
pub const INFINITY_REGULARITY_TOL: f64 = 1e-10;
/// Distance below which an evaluation point is treated as sitting on a pole.
const POLE_EPS: f64 = 1e-14;

/// Which residue to read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidueAt {
    Pole(usize),
    Zero,
}

/// `A(z) = ∑ₗ Cₗ/zˡ + ∑ᵢ Bᵢ/(z − aᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConnectionForm {
    rank: usize,
    poles: Vec<Complex64>,
    residues: Vec<CMatrix>,
    irregular: Vec<CMatrix>,
}

impl LogConnectionForm {
    /// Builds a form after checking shapes, pole placement and the order bound.
    /// Regularity at ∞ is reported by [`Self::violations`] rather than enforced,
    /// so forms mid-flow can still be represented.
    pub fn new(
        poles: Vec<Complex64>,
        residues: Vec<CMatrix>,
        irregular: Vec<CMatrix>,
        max_order: usize,
    ) -> Result<Self> {
        let form = Self::from_parts(poles, residues, irregular)?;
        let errors: Vec<_> = form
            .structural_violations(max_order)
            .into_iter()
            .map(|v| v.to_string())
            .collect();
        if errors.is_empty() {
            Ok(form)
        } else {
            Err(Error::Input(errors.join("; ")))
        }
    }

    /// Shape checks only.
    pub(crate) fn from_parts(
        poles: Vec<Complex64>,
        residues: Vec<CMatrix>,
        irregular: Vec<CMatrix>,
    ) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::Input(format!(
                "{} poles but {} residues",
                poles.len(),
                residues.len()
            )));
        }
        let Some(first) = irregular.first() else {
            return Err(Error::Input(
                "at least one irregular coefficient C₁ is required".into(),
            ));
        };
        let rank = first.nrows();
        if rank == 0 {
            return Err(Error::Input("rank must be at least 1".into()));
        }
        for m in residues.iter().chain(irregular.iter()) {
            if m.nrows() != rank || m.ncols() != rank {
                return Err(Error::Input(format!(
                    "coefficient of shape {}x{} in a rank-{rank} form",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self {
            rank,
            poles,
            residues,
            irregular,
        })
    }

    /// The typical case: `k = 1` and `C₁ = −∑Bᵢ`.
    pub fn typical(poles: Vec<Complex64>, residues: Vec<CMatrix>) -> Result<Self> {
        let rank = residues
            .first()
            .map(|b| b.nrows())
            .ok_or_else(|| Error::Input("typical form needs at least one pole".into()))?;
        let mut c1 = zeros(rank);
        for b in &residues {
            if b.nrows() != rank || b.ncols() != rank {
                return Err(Error::Input("residues have mismatched shapes".into()));
            }
            c1 -= b;
        }
        Self::new(poles, residues, vec![c1], DEFAULT_MAX_IRREGULAR_ORDER)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn residues(&self) -> &[CMatrix] {
        &self.residues
    }

    pub fn irregular(&self) -> &[CMatrix] {
        &self.irregular
    }

    /// Order `k` of the pole at the origin.
    pub fn order(&self) -> usize {
        self.irregular.len()
    }

    pub fn is_typical(&self) -> bool {
        self.order() == 1
    }

    pub fn residue(&self, at: ResidueAt) -> Result<&CMatrix> {
        match at {
            ResidueAt::Zero => Ok(&self.irregular[0]),
            ResidueAt::Pole(i) => self.residues.get(i).ok_or_else(|| {
                Error::Input(format!(
                    "pole index {i} out of range (n = {})",
                    self.poles.len()
                ))
            }),
        }
    }

    /// `‖C₁ + ∑Bᵢ‖`, the residue at ∞ up to sign.
    pub fn infinity_defect(&self) -> f64 {
        let mut s = self.irregular[0].clone();
        for b in &self.residues {
            s += b;
        }
        frobenius(&s)
    }

    /// Smallest pairwise pole distance (∞ when n < 2).
    pub fn min_pole_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.poles.len() {
            for j in (i + 1)..self.poles.len() {
                best = best.min((self.poles[i] - self.poles[j]).norm());
            }
        }
        best
    }

    /// Singular points of the form in the finite plane: the origin and the poles.
    pub fn singular_points(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(0.0, 0.0))
            .chain(self.poles.iter().copied())
            .collect()
    }

    fn structural_violations(&self, max_order: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.order() > max_order {
            out.push(Violation::new(
                "irregular",
                format!("order {} exceeds the maximum {max_order}", self.order()),
            ));
        }
        for (i, a) in self.poles.iter().enumerate() {
            if !a.is_finite() {
                out.push(Violation::new(format!("poles[{i}]"), "pole is not finite"));
            } else if a.norm() <= 1.0 {
                out.push(Violation::new(
                    format!("poles[{i}]"),
                    format!("pole {a} lies in the closed unit disc"),
                ));
            }
            for j in 0..i {
                if self.poles[j] == *a {
                    out.push(Violation::new(
                        format!("poles[{i}]"),
                        format!("duplicates poles[{j}]"),
                    ));
                }
            }
        }
        out
    }

    /// Every violated invariant, including regularity at ∞.
    pub fn violations(&self, max_order: usize) -> Vec<Violation> {
        let mut out = self.structural_violations(max_order);
        let d = self.infinity_defect();
        if !(d < INFINITY_REGULARITY_TOL) {
            out.push(Violation::new(
                "irregular[0]",
                format!(
                    "infinity regularity ‖C₁ + ∑Bᵢ‖ = {d:e} exceeds {INFINITY_REGULARITY_TOL:e}"
                ),
            ));
        }
        out
    }

    /// Same form with new poles and coefficients; used by the deformation flow.
    pub fn with_coefficients(
        &self,
        poles: Vec<Complex64>,
        residues: Vec<CMatrix>,
        irregular: Vec<CMatrix>,
    ) -> Result<Self> {
        Self::from_parts(poles, residues, irregular)
    }

    /// `A(z)`, the coefficient of `dz`.
    pub fn evaluate(&self, z: Complex64) -> Result<CMatrix> {
        if z.norm() < POLE_EPS {
            return Err(Error::PoleEvaluation(format!(
                "z = {z} is the irregular point 0"
            )));
        }
        let mut out = zeros(self.rank);
        let zi = z.inv();
        let mut zpow = zi;
        for c in &self.irregular {
            out += c * zpow;
            zpow *= zi;
        }
        for (a, b) in self.poles.iter().zip(&self.residues) {
            let d = z - a;
            if d.norm() < POLE_EPS * (1.0 + a.norm()) {
                return Err(Error::PoleEvaluation(format!(
                    "z = {z} coincides with pole {a}"
                )));
            }
            out += b * d.inv();
        }
        Ok(out)
    }

    /// Coefficient `Ã(w)` of `dw` in the chart `w = 1/z`.
    ///
    /// Computed as `−[∑ᵢ Bᵢaᵢ/(1 − aᵢw) + ∑_{l≥2} Cₗ w^{l−2}]`, i.e. `−A(1/w)/w²`
    /// with the `(C₁ + ∑Bᵢ)/w` term removed. That term vanishes for forms
    /// regular at ∞, and dropping it keeps the chart finite at `w = 0`.
    pub fn evaluate_at_infinity_chart(&self, w: Complex64) -> Result<CMatrix> {
        let mut out = zeros(self.rank);
        for (a, b) in self.poles.iter().zip(&self.residues) {
            let d = Complex64::new(1.0, 0.0) - a * w;
            if d.norm() < POLE_EPS {
                return Err(Error::PoleEvaluation(format!(
                    "w = {w} is the image of pole {a}"
                )));
            }
            out -= b * (a / d);
        }
        let mut wpow = Complex64::new(1.0, 0.0);
        for c in self.irregular.iter().skip(1) {
            out -= c * wpow;
            wpow *= w;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity};

    fn scalar(x: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, x)
    }

    #[test]
    fn single_pole_identity_residue() {
        let form = LogConnectionForm::typical(vec![c(2.0, 0.0)], vec![identity(2)]).unwrap();
        let a = form.evaluate(c(3.0, 0.0)).unwrap();
        assert!((a - identity(2) * c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((form.residue(ResidueAt::Zero).unwrap() + identity(2)).norm() == 0.0);
    }

    #[test]
    fn zero_form_vanishes() {
        let form = LogConnectionForm::typical(vec![c(2.0, 1.0)], vec![zeros(2)]).unwrap();
        assert_eq!(form.evaluate(c(-3.0, 0.5)).unwrap(), zeros(2));
        assert_eq!(
            form.evaluate_at_infinity_chart(c(0.1, 0.0)).unwrap(),
            zeros(2)
        );
    }

    #[test]
    fn infinity_chart_limit_for_scalar_typical_form() {
        let b = c(0.3, -0.2);
        let a1 = c(1.5, 2.0);
        let form = LogConnectionForm::typical(vec![a1], vec![scalar(b)]).unwrap();
        let at_zero = form.evaluate_at_infinity_chart(c(0.0, 0.0)).unwrap()[(0, 0)];
        assert!((at_zero + b * a1).norm() < 1e-15);
        let w = c(1e-7, 0.0);
        let near = -form.evaluate(w.inv()).unwrap()[(0, 0)] / (w * w);
        assert!((near - at_zero).norm() < 1e-5);
    }

    #[test]
    fn charts_agree() {
        let form = LogConnectionForm::typical(
            vec![c(2.0, 0.0), c(0.0, 3.0)],
            vec![scalar(c(1.0, 0.0)), scalar(c(-2.0, 0.0))],
        )
        .unwrap();
        let w = c(0.01, 0.0);
        let lhs = form.evaluate_at_infinity_chart(w).unwrap()[(0, 0)] * (-w * w);
        let rhs = form.evaluate(c(100.0, 0.0)).unwrap()[(0, 0)];
        assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm());
    }

    #[test]
    fn evaluation_at_poles_fails() {
        let form = LogConnectionForm::typical(vec![c(2.0, 0.0)], vec![identity(1)]).unwrap();
        assert!(matches!(
            form.evaluate(c(2.0, 0.0)),
            Err(Error::PoleEvaluation(_))
        ));
        assert!(matches!(
            form.evaluate(c(0.0, 0.0)),
            Err(Error::PoleEvaluation(_))
        ));
        assert!(matches!(
            form.evaluate_at_infinity_chart(c(0.5, 0.0)),
            Err(Error::PoleEvaluation(_))
        ));
        assert!(form.residue(ResidueAt::Pole(3)).is_err());
    }

    #[test]
    fn typical_constructor_rejects_bad_poles() {
        assert!(LogConnectionForm::typical(vec![c(0.5, 0.0)], vec![identity(1)]).is_err());
        assert!(LogConnectionForm::typical(
            vec![c(2.0, 0.0), c(2.0, 0.0)],
            vec![identity(1), identity(1)]
        )
        .is_err());
    }

    #[test]
    fn opposite_residues_cancel() {
        let b = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.1, 0.0), c(0.2, 0.1), c(-0.3, 0.0), c(-0.1, 0.0)],
        );
        let form = LogConnectionForm::typical(vec![c(2.0, 0.0), c(-3.0, 0.0)], vec![b.clone(), -b])
            .unwrap();
        assert_eq!(form.irregular()[0], zeros(2));
    }

    #[test]
    fn order_bound_is_enforced() {
        let cs = vec![zeros(1); 9];
        assert!(LogConnectionForm::new(vec![], vec![], cs, DEFAULT_MAX_IRREGULAR_ORDER).is_err());
    }
}
