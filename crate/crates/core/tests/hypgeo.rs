mod common;

use std::f64::consts::PI;

use isomonodromy::hypgeo::*;
use isomonodromy::linalg::c;
use num_complex::Complex64;
use proptest::prelude::*;

fn finite(p: ExtPoint) -> Complex64 {
    p.finite().expect("finite point")
}

fn cross_ratio(z: [Complex64; 4]) -> Complex64 {
    ((z[0] - z[2]) * (z[1] - z[3])) / ((z[0] - z[3]) * (z[1] - z[2]))
}

fn exterior_map(theta: f64, r: f64, phi: f64) -> MobiusMap {
    let p = Complex64::from_polar(r, phi);
    MobiusMap::rotation(theta).compose(&MobiusMap::exterior_to_infinity(p).unwrap())
}

fn point() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn mobius_maps_preserve_cross_ratio(
        a in point(), b in point(), cc in point(), d in point(),
        zs in prop::array::uniform4(point()),
    ) {
        let det = a * d - b * cc;
        prop_assume!(det.norm() > 0.1);
        let m = MobiusMap::new(a, b, cc, d).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                prop_assume!((zs[i] - zs[j]).norm() > 0.1);
            }
        }
        let images: Vec<ExtPoint> = zs.iter().map(|z| m.apply(ExtPoint::Finite(*z))).collect();
        prop_assume!(images.iter().all(|p| p.finite().is_some_and(|w| w.norm() < 1e4)));
        let w = [finite(images[0]), finite(images[1]), finite(images[2]), finite(images[3])];
        let (before, after) = (cross_ratio(zs), cross_ratio(w));
        prop_assert!((before - after).norm() <= 1e-8 * (1.0 + before.norm()));
    }

    #[test]
    fn apply_then_inverse_round_trips(
        theta in -PI..PI, r in 1.2..6.0f64, phi in -PI..PI, z in point(),
    ) {
        let m = exterior_map(theta, r, phi);
        let back = m.inverse().apply(m.apply(ExtPoint::Finite(z)));
        prop_assert!(back.chordal_distance(&ExtPoint::Finite(z)) < 1e-10);
        prop_assert!(m.is_exterior_automorphism(1e-9));
    }

    #[test]
    fn relation_defect_is_conjugation_invariant(
        theta in -PI..PI, r in 1.2..4.0f64, phi in -PI..PI,
    ) {
        let (gens, _) = regular_surface_group(2).unwrap();
        let h = exterior_map(theta, r, phi);
        let conj: Vec<MobiusMap> = gens.iter().map(|g| g.conjugate_by(&h)).collect();
        prop_assert!(relation_defect(&conj).unwrap() < 1e-9);
    }

    #[test]
    fn containment_agrees_with_winding_number(r in 1.05..8.0f64, phi in -PI..PI) {
        let (_, polygon) = normalized_surface_group(2).unwrap();
        let q = Complex64::from_polar(r, phi);
        prop_assume!(polygon.boundary_distance(q) > 1e-3);
        let samples: Vec<Complex64> = polygon
            .edges()
            .iter()
            .flat_map(|e| (0..400).map(move |k| e.point(k as f64 / 400.0)))
            .map(|p| p.inverted().finite().unwrap())
            .collect();
        let winding = common::winding_number(&samples, q.inv());
        prop_assert_eq!(polygon.contains(q).unwrap(), winding.abs() == 1);
    }
}

#[test]
fn regular_groups_satisfy_the_relation_and_pair_edges() {
    for g in 2..=4 {
        // Moving a vertex that hugs the unit circle to ∞ costs accuracy as g grows.
        let normalized_tol = if g == 2 { 1e-10 } else { 1e-7 };
        let cases = [
            (regular_surface_group(g).unwrap(), 1e-10),
            (normalized_surface_group(g).unwrap(), normalized_tol),
        ];
        for ((gens, polygon), tol) in cases {
            assert!(relation_defect(&gens).unwrap() < tol, "genus {g}");
            assert!(polygon.pairing_defect(&gens) < 1e-8, "genus {g}");
            assert!(gens.iter().all(|m| m.is_exterior_automorphism(1e-9)));
            assert!(polygon.is_simple());
            assert!(polygon.exterior_violations().is_empty());
        }
    }
}

#[test]
fn normalized_polygon_starts_at_infinity() {
    let (_, polygon) = normalized_surface_group(2).unwrap();
    assert!(polygon.vertices()[0].is_infinite());
    assert!(polygon.vertices()[1..]
        .iter()
        .all(|v| v.finite().unwrap().norm() > 1.0));
}

#[test]
fn demo_poles_lie_inside_and_the_disc_does_not() {
    let (_, polygon) = normalized_surface_group(2).unwrap();
    assert!(polygon.contains(c(-2.6, 1.3)).unwrap());
    assert!(polygon.contains(c(-4.0, 1.2)).unwrap());
    assert!(!polygon.contains(c(3.0, -3.0)).unwrap());
}

#[test]
fn a_point_on_an_edge_is_ambiguous() {
    let (_, polygon) = normalized_surface_group(2).unwrap();
    let on_edge = finite(polygon.edges()[2].point(0.5));
    assert!(matches!(
        polygon.contains(on_edge),
        Err(isomonodromy::Error::AmbiguousPosition { .. })
    ));
}

#[test]
fn genus_one_is_rejected() {
    assert!(regular_surface_group(1).is_err());
}
