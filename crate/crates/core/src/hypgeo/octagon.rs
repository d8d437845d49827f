//! Regular 4g-gon surface groups, used by the demo scenario and tests.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::mobius::{ExtPoint, MobiusMap};
use super::polygon::{normalize_to_infinity, EdgePairing, FundamentalPolygon};
use crate::error::{Error, Result};

struct RegularGon {
    n: usize,
    inradius: f64,
    circumradius_disc: f64,
}

impl RegularGon {
    fn new(genus: usize) -> Self {
        let n = 4 * genus;
        let nf = n as f64;
        let alpha = 2.0 * PI / nf;
        let inradius = ((alpha / 2.0).cos() / (PI / nf).sin()).acosh();
        let circumradius = ((1.0 / (PI / nf).tan()) / (alpha / 2.0).tan()).acosh();
        Self {
            n,
            inradius,
            circumradius_disc: (circumradius / 2.0).tanh(),
        }
    }

    fn side_direction(&self, k: usize) -> f64 {
        2.0 * PI * (k + 1) as f64 / self.n as f64
    }

    fn disc_vertex(&self, k: usize) -> Complex64 {
        let n = self.n as f64;
        Complex64::from_polar(self.circumradius_disc, PI / n + 2.0 * PI * k as f64 / n)
    }

    /// Disc automorphism carrying side `m` onto side `k` with reversed orientation.
    fn side_map(&self, k: usize, m: usize) -> MobiusMap {
        let s = self.inradius;
        let translate = MobiusMap::new(
            Complex64::new(s.cosh(), 0.0),
            Complex64::new(s.sinh(), 0.0),
            Complex64::new(s.sinh(), 0.0),
            Complex64::new(s.cosh(), 0.0),
        )
        .expect("hyperbolic translation has unit determinant");
        MobiusMap::rotation(self.side_direction(k))
            .compose(&translate)
            .compose(&MobiusMap::rotation(PI - self.side_direction(m)))
    }
}

/// Generators and fundamental polygon of the regular 4g-gon group in the
/// exterior-of-disc model. The polygon surrounds ∞; its first vertex is finite.
///
/// Sides `4b, 4b+1, 4b+2, 4b+3` carry the word `a b a⁻¹ b⁻¹` of handle `b`.
/// Handles are listed last-to-first so the commutator product of the
/// generator list is trivial.
pub fn regular_surface_group(genus: usize) -> Result<(Vec<MobiusMap>, FundamentalPolygon)> {
    if genus < 2 {
        return Err(Error::Input(format!(
            "genus must be at least 2, got {genus}"
        )));
    }
    let gon = RegularGon::new(genus);
    let inversion = MobiusMap::inversion();
    let mut generators = Vec::with_capacity(2 * genus);
    let mut pairing = vec![
        EdgePairing {
            partner: 0,
            generator: 0,
            inverse: false
        };
        gon.n
    ];
    for j in 0..genus {
        let b = genus - 1 - j;
        let (e0, e1, e2, e3) = (4 * b, 4 * b + 1, 4 * b + 2, 4 * b + 3);
        let first = gon.side_map(e0, e2);
        let second = gon.side_map(e1, e3).inverse();
        generators.push(first.conjugate_by(&inversion));
        generators.push(second.conjugate_by(&inversion));
        let (ga, gb) = (2 * j, 2 * j + 1);
        pairing[e0] = EdgePairing {
            partner: e2,
            generator: ga,
            inverse: true,
        };
        pairing[e2] = EdgePairing {
            partner: e0,
            generator: ga,
            inverse: false,
        };
        pairing[e1] = EdgePairing {
            partner: e3,
            generator: gb,
            inverse: false,
        };
        pairing[e3] = EdgePairing {
            partner: e1,
            generator: gb,
            inverse: true,
        };
    }
    let vertices = (0..gon.n)
        .map(|k| ExtPoint::Finite(gon.disc_vertex(k).inv()))
        .collect();
    let polygon = FundamentalPolygon::new(genus, vertices, pairing)?;
    Ok((generators, polygon))
}

/// [`regular_surface_group`] moved so that the first vertex sits at ∞.
pub fn normalized_surface_group(genus: usize) -> Result<(Vec<MobiusMap>, FundamentalPolygon)> {
    let (generators, polygon) = regular_surface_group(genus)?;
    normalize_to_infinity(&generators, &polygon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::mobius::relation_defect;

    #[test]
    fn relation_holds_for_several_genera() {
        for g in 2..=4 {
            let (gens, poly) = regular_surface_group(g).unwrap();
            assert!(relation_defect(&gens).unwrap() < 1e-10, "genus {g}");
            assert!(poly.pairing_defect(&gens) < 1e-8, "genus {g}");
            assert!(gens.iter().all(|q| q.is_exterior_automorphism(1e-10)));
        }
    }

    #[test]
    fn normalized_octagon_is_valid() {
        let (gens, poly) = normalized_surface_group(2).unwrap();
        assert!(poly.vertices()[0].is_infinite());
        assert!(relation_defect(&gens).unwrap() < 1e-10);
        assert!(poly.pairing_defect(&gens) < 1e-8);
        assert!(poly.exterior_violations().is_empty());
        assert!(poly.is_simple());
        let v1 = poly.vertices()[1].finite().unwrap();
        assert!((v1 - Complex64::new(-1.0987, 0.0)).norm() < 1e-3);
    }
}
