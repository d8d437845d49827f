use num_complex::Complex64;
use std::fmt;

use crate::error::{Error, Result};

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtPoint {
    Finite(Complex64),
    Infinity,
}

impl ExtPoint {
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtPoint::Finite(z) => Some(*z),
            ExtPoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtPoint::Infinity)
    }

    /// Coordinate in the chart `w = 1/z` (∞ ↦ 0).
    pub fn inverted(&self) -> ExtPoint {
        match self {
            ExtPoint::Infinity => ExtPoint::Finite(Complex64::new(0.0, 0.0)),
            ExtPoint::Finite(z) if *z == Complex64::new(0.0, 0.0) => ExtPoint::Infinity,
            ExtPoint::Finite(z) => ExtPoint::Finite(z.inv()),
        }
    }

    /// Chordal distance on the Riemann sphere.
    pub fn chordal_distance(&self, other: &ExtPoint) -> f64 {
        match (self, other) {
            (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
            (ExtPoint::Finite(z), ExtPoint::Infinity)
            | (ExtPoint::Infinity, ExtPoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (ExtPoint::Finite(z), ExtPoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }
}

impl From<Complex64> for ExtPoint {
    fn from(z: Complex64) -> Self {
        ExtPoint::Finite(z)
    }
}

impl fmt::Display for ExtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtPoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ExtPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Fractional-linear map `z ↦ (az+b)/(cz+d)`, stored with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !det.is_finite() || det.norm() <= 1e-300 || det.norm() <= 1e-14 * scale * scale {
            return Err(Error::Input(format!(
                "Möbius coefficients have zero determinant ({det})"
            )));
        }
        let k = det.sqrt().inv();
        Ok(Self {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    pub fn rotation(theta: f64) -> Self {
        let h = Complex64::from_polar(1.0, theta / 2.0);
        Self {
            a: h,
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: h.conj(),
        }
    }

    /// The inversion `z ↦ 1/z`, which swaps the unit disc and its exterior.
    pub fn inversion() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self {
            a: Complex64::new(0.0, 0.0),
            b: i,
            c: i,
            d: Complex64::new(0.0, 0.0),
        }
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn apply(&self, z: ExtPoint) -> ExtPoint {
        match z {
            ExtPoint::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a / self.c)
                }
            }
            ExtPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Convenience for finite inputs with finite images.
    pub fn apply_finite(&self, z: Complex64) -> Option<Complex64> {
        self.apply(ExtPoint::Finite(z)).finite()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let (u, v) = (self, other);
        let m = MobiusMap {
            a: u.a * v.a + u.b * v.c,
            b: u.a * v.b + u.b * v.d,
            c: u.c * v.a + u.d * v.c,
            d: u.c * v.b + u.d * v.d,
        };
        m.renormalized()
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &MobiusMap) -> MobiusMap {
        h.compose(self).compose(&h.inverse())
    }

    fn renormalized(self) -> MobiusMap {
        let det = self.a * self.d - self.b * self.c;
        let k = det.sqrt().inv();
        MobiusMap {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
            d: self.d * k,
        }
    }

    /// Frobenius distance to `other`, minimized over the ±1 lift ambiguity.
    pub fn projective_distance(&self, other: &MobiusMap) -> f64 {
        let plus = [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ];
        let minus = [
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        ];
        let norm = |v: [Complex64; 4]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        norm(plus).min(norm(minus))
    }

    /// True iff the map preserves the exterior of the unit disc.
    ///
    /// Conjugating by `z ↦ 1/z` must give the disc-automorphism pattern
    /// `±[[α, β], [β̄, ᾱ]]` with `|α|² − |β|² = 1`, and the exterior point ∞
    /// must stay in the exterior.
    pub fn is_exterior_automorphism(&self, tol: f64) -> bool {
        // J M J⁻¹ for J = z ↦ 1/z swaps a↔d and b↔c.
        let (alpha, beta, gamma, delta) = (self.d, self.c, self.b, self.a);
        let pattern = (alpha - delta.conj()).norm() <= tol && (beta - gamma.conj()).norm() <= tol;
        let unimodular = (alpha.norm_sqr() - beta.norm_sqr() - 1.0).abs() <= tol;
        let sample = match self.apply(ExtPoint::Infinity) {
            ExtPoint::Infinity => true,
            ExtPoint::Finite(z) => z.norm() > 1.0,
        };
        pattern && unimodular && sample
    }

    /// Exterior automorphism sending `p` (with `|p| > 1`) to ∞.
    pub fn exterior_to_infinity(p: Complex64) -> Result<MobiusMap> {
        if p.norm() <= 1.0 {
            return Err(Error::Input(format!(
                "no exterior automorphism moves {p} to infinity: |p| <= 1"
            )));
        }
        let w0 = p.inv();
        let one = Complex64::new(1.0, 0.0);
        MobiusMap::new(one, -w0.conj(), -w0, one)
    }
}

/// Projective distance from `∏ⱼ Q₂ⱼQ₂ⱼ₋₁Q₂ⱼ⁻¹Q₂ⱼ₋₁⁻¹` to the identity
/// (generators listed `Q₁, …, Q₂g`, product taken with `j = 1` leftmost).
pub fn relation_defect(generators: &[MobiusMap]) -> Result<f64> {
    if !generators.len().is_multiple_of(2) {
        return Err(Error::Input(format!(
            "generator list has odd length {}",
            generators.len()
        )));
    }
    if generators.len() < 4 {
        return Err(Error::Input(
            "need at least 4 generators (genus >= 2)".into(),
        ));
    }
    let product = generators
        .chunks(2)
        .fold(MobiusMap::identity(), |acc, pair| {
            let (odd, even) = (&pair[0], &pair[1]);
            let commutator = even
                .compose(odd)
                .compose(&even.inverse())
                .compose(&odd.inverse());
            acc.compose(&commutator)
        });
    Ok(product.projective_distance(&MobiusMap::identity()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_fixes_points() {
        let z = ExtPoint::Finite(c(3.0, 4.0));
        assert_eq!(MobiusMap::identity().apply(z), z);
    }

    #[test]
    fn reciprocal_map() {
        let m = MobiusMap::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let half = m.apply(ExtPoint::Finite(c(2.0, 0.0))).finite().unwrap();
        assert!((half - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(m.apply(ExtPoint::Finite(c(0.0, 0.0))), ExtPoint::Infinity);
        assert_eq!(m.apply(ExtPoint::Infinity), ExtPoint::Finite(c(0.0, 0.0)));
        assert!(m.inverse().projective_distance(&m) < 1e-15);
    }

    #[test]
    fn composition_order() {
        let s2 = std::f64::consts::SQRT_2;
        let f = MobiusMap::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let g = MobiusMap::new(c(s2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 / s2, 0.0)).unwrap();
        let v = f
            .compose(&g)
            .apply(ExtPoint::Finite(c(1.0, 0.0)))
            .finite()
            .unwrap();
        assert!((v - c(3.0, 0.0)).norm() < 1e-14);
        assert!(
            f.compose(&f.inverse())
                .projective_distance(&MobiusMap::identity())
                < 1e-12
        );
    }

    #[test]
    fn degenerate_coefficients_rejected() {
        assert!(MobiusMap::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).is_err());
    }

    #[test]
    fn exterior_automorphism_examples() {
        assert!(MobiusMap::rotation(0.7).is_exterior_automorphism(1e-12));
        let shift = MobiusMap::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(!shift.is_exterior_automorphism(1e-9));
        let q = MobiusMap::exterior_to_infinity(c(2.0, 1.0)).unwrap();
        assert!(q.is_exterior_automorphism(1e-12));
        assert_eq!(q.apply(ExtPoint::Finite(c(2.0, 1.0))), ExtPoint::Infinity);
        assert!(MobiusMap::exterior_to_infinity(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn relation_defect_input_errors() {
        let id = MobiusMap::identity();
        assert!(relation_defect(&[id, id, id]).is_err());
        assert_eq!(relation_defect(&[id; 4]).unwrap(), 0.0);
    }

    #[test]
    fn chordal_distance_handles_infinity() {
        let inf = ExtPoint::Infinity;
        assert_eq!(inf.chordal_distance(&inf), 0.0);
        let far = ExtPoint::Finite(c(1e12, 0.0));
        assert!(far.chordal_distance(&inf) < 1e-11);
    }
}
