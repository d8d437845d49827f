mod common;

use isomonodromy::connform::LogConnectionForm;
use isomonodromy::gluing::GluingData;
use isomonodromy::hypgeo::{normalized_surface_group, ExtPoint};
use isomonodromy::linalg::{c, dist, frobenius, CMatrix};
use isomonodromy::ode::StepperOptions;
use isomonodromy::schlesinger::*;
use isomonodromy::transport::{loop_around, monodromy};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn state(form: LogConnectionForm) -> SchlesingerState {
    SchlesingerState {
        t: 0.0,
        form,
        gluing: GluingData::identity(2, 8),
    }
}

fn straight(start: &[Complex64], shift: Complex64) -> DeformationPath {
    let end = start.iter().map(|a| a + shift).collect();
    DeformationPath::new(vec![0.0, 1.0], vec![start.to_vec(), end]).unwrap()
}

fn pinwheels(form: &LogConnectionForm) -> Vec<CMatrix> {
    (0..form.poles().len())
        .map(|i| {
            let lp = loop_around(form.poles(), i, ExtPoint::Infinity, 0.05, 10.0).unwrap();
            monodromy(form, &lp, &StepperOptions::with_tol(1e-11)).unwrap()
        })
        .collect()
}

fn vertices() -> Vec<ExtPoint> {
    normalized_surface_group(2).unwrap().1.vertices().to_vec()
}

proptest! {
    #![proptest_config(common::config(32))]

    #[test]
    fn typical_case_is_ordinary_schlesinger(seed in 0u64..100_000) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let form = common::random_form(&mut rng, 3, n, 1, 0.5);
        let adot: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let ours = rhs(&form, &adot).unwrap();
        let oracle = common::ordinary_schlesinger(form.poles(), form.residues(), &adot);
        prop_assert!(dist(&ours.irregular[0], &oracle[0]) < 1e-12);
        for (a, b) in ours.residues.iter().zip(&oracle[1..]) {
            prop_assert!(dist(a, b) < 1e-12);
        }
    }

    #[test]
    fn subtracting_coupling_satisfies_the_compatibility_identity(seed in 0u64..100_000) {
        let form = common::random_form(&mut common::rng(seed), 2, 3, 3, 0.5);
        prop_assert!(translation_defect(&form, C1Coupling::Subtract).unwrap() < 1e-12);
    }

    #[test]
    fn rhs_preserves_the_residue_at_infinity(seed in 0u64..100_000) {
        let mut rng = common::rng(seed);
        let form = common::random_form(&mut rng, 2, 3, 2, 0.5);
        let adot: Vec<Complex64> = (0..3).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let d = rhs(&form, &adot).unwrap();
        let total = d.residues.iter().fold(d.irregular[0].clone(), |acc, b| acc + b);
        prop_assert!(frobenius(&total) < 1e-12);
    }
}

#[test]
fn commuting_residues_do_not_move() {
    let diag = |x: f64, y: f64| {
        CMatrix::from_row_slice(2, 2, &[c(x, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(y, 0.0)])
    };
    let form = LogConnectionForm::new(
        vec![c(2.0, 1.0), c(-1.5, 2.0)],
        vec![diag(0.2, -0.2), diag(0.1, 0.3)],
        vec![diag(-0.3, -0.1), diag(0.5, 0.2)],
        8,
    )
    .unwrap();
    let d = rhs(&form, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
    assert!(d
        .residues
        .iter()
        .chain(&d.irregular)
        .all(|m| frobenius(m) == 0.0));
}

#[test]
fn zero_velocity_gives_zero_rhs() {
    let form = common::random_form(&mut common::rng(4), 2, 3, 2, 0.5);
    let d = rhs(&form, &[c(0.0, 0.0); 3]).unwrap();
    assert!(d
        .residues
        .iter()
        .chain(&d.irregular)
        .all(|m| frobenius(m) == 0.0));
}

#[test]
fn flow_preserves_pinwheel_monodromies() {
    for seed in 0..4 {
        let mut rng = common::rng(100 + seed);
        let poles = common::random_poles(&mut rng, 2, 1.0);
        let residues = (0..2)
            .map(|_| common::random_traceless(&mut rng, 2, 0.4))
            .collect();
        let form = LogConnectionForm::typical(poles, residues).unwrap();
        let form = form
            .with_coefficients(
                form.poles().to_vec(),
                form.residues().to_vec(),
                vec![
                    form.irregular()[0].clone(),
                    common::random_matrix(&mut rng, 2, 0.3),
                ],
            )
            .unwrap();
        let path = straight(form.poles(), c(0.1, -0.15));
        let traj = flow(
            &state(form.clone()),
            &path,
            &vertices(),
            &FlowOptions::default(),
        )
        .unwrap();
        let (before, after) = (pinwheels(&form), pinwheels(&traj.last().form));
        for (a, b) in before.iter().zip(&after) {
            assert!(dist(a, b) < 1e-7, "seed {seed}: drift {}", dist(a, b));
        }
        assert!(traj.max_spectral_drift() < 1e-8);
        assert!(traj.max_infinity_defect() < 1e-8);
    }
}

#[test]
fn flowing_back_returns_to_the_start() {
    let form = common::random_form(&mut common::rng(11), 2, 2, 2, 0.4);
    let path = straight(form.poles(), c(-0.1, 0.2));
    let forward = flow(
        &state(form.clone()),
        &path,
        &vertices(),
        &FlowOptions::default(),
    )
    .unwrap();
    let reversed = path.reversed();
    let mid = SchlesingerState {
        t: reversed.start_time(),
        ..forward.last().clone()
    };
    let back = flow(&mid, &reversed, &vertices(), &FlowOptions::default()).unwrap();
    for (a, b) in form.residues().iter().zip(back.last().form.residues()) {
        assert!(dist(a, b) < 1e-8);
    }
    for (a, b) in forward.states[0]
        .gluing
        .matrices()
        .iter()
        .zip(back.last().gluing.matrices())
    {
        assert!(dist(a, b) < 1e-8);
    }
}

#[test]
fn stationary_path_leaves_the_state_alone() {
    let form = common::random_form(&mut common::rng(12), 2, 2, 2, 0.4);
    let path = DeformationPath::stationary(form.poles().to_vec());
    let traj = flow(
        &state(form.clone()),
        &path,
        &vertices(),
        &FlowOptions::default(),
    )
    .unwrap();
    assert_eq!(traj.last().form, form);
}

#[test]
fn path_that_misses_the_start_is_rejected() {
    let form = common::random_form(&mut common::rng(13), 2, 2, 1, 0.4);
    let moved: Vec<Complex64> = form.poles().iter().map(|a| a + 0.5).collect();
    let path = straight(&moved, c(0.1, 0.0));
    assert!(flow(&state(form), &path, &vertices(), &FlowOptions::default()).is_err());
}

#[test]
fn flatness_defect_shrinks_quadratically_with_the_snapshot_spacing() {
    let form = common::random_form(&mut common::rng(14), 2, 2, 2, 0.4);
    let defect = |pieces: usize| {
        let path = DeformationPath::quarter_circle(form.poles(), 0, 0.2, pieces).unwrap();
        let traj = flow(
            &state(form.clone()),
            &path,
            &vertices(),
            &FlowOptions::default(),
        )
        .unwrap();
        flatness_defect(&traj.states).unwrap()
    };
    let (coarse, fine) = (defect(8), defect(16));
    println!(
        "flatness defect: 8 pieces {coarse:.3e}, 16 pieces {fine:.3e}, ratio {:.2}",
        coarse / fine
    );
    assert!(coarse / fine > 3.0);
}

#[test]
fn quarter_circle_path_is_checked_against_the_polygon() {
    let (_, polygon) = normalized_surface_group(2).unwrap();
    let poles = vec![c(-2.6, 1.3), c(-4.0, 1.2)];
    let ok = DeformationPath::quarter_circle(&poles, 0, 0.1, 16).unwrap();
    assert!(ok.violations(&polygon, 0.1).is_empty());
    let into_disc = DeformationPath::new(
        vec![0.0, 1.0],
        vec![poles.clone(), vec![c(-0.5, 0.3), poles[1]]],
    )
    .unwrap();
    assert!(!into_disc.violations(&polygon, 0.1).is_empty());
    let collide = DeformationPath::new(
        vec![0.0, 1.0],
        vec![poles.clone(), vec![c(-3.6, 1.2), poles[1]]],
    )
    .unwrap();
    assert!(!collide.violations(&polygon, 0.1).is_empty());
}
