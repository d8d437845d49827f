mod common;

use isomonodromy::connform::LogConnectionForm;
use isomonodromy::gluing::*;
use isomonodromy::hypgeo::{normalized_surface_group, FundamentalPolygon, MobiusMap};
use isomonodromy::linalg::{c, dist, identity, inverse, CMatrix};
use isomonodromy::ode::StepperOptions;
use isomonodromy::transport::{default_r_switch, transport, TransportContext};
use proptest::prelude::*;

struct Setup {
    generators: Vec<MobiusMap>,
    polygon: FundamentalPolygon,
    form: LogConnectionForm,
    ctx: TransportContext,
}

fn setup(seed: u64) -> Setup {
    let (generators, polygon) = normalized_surface_group(2).unwrap();
    let mut rng = common::rng(seed);
    let residues = (0..2)
        .map(|_| common::random_traceless(&mut rng, 2, 0.3))
        .collect();
    let form = LogConnectionForm::typical(vec![c(-2.6, 1.3), c(-4.0, 1.2)], residues).unwrap();
    let ctx = TransportContext {
        r_switch: default_r_switch(&form, &polygon),
        clearance: 0.1,
        stepper: StepperOptions::default(),
    };
    Setup {
        generators,
        polygon,
        form,
        ctx,
    }
}

proptest! {
    #![proptest_config(common::config(8))]

    #[test]
    fn chain_monodromy_is_gauge_covariant(seed in 0u64..1000, i in 2usize..=8) {
        let s = setup(seed);
        let mut rng = common::rng(seed + 1);
        let gluing = consistent_gluing(&s.form, &s.polygon, &s.ctx, &mut rng).unwrap();
        let g = common::random_matrix(&mut rng, 2, 1.0) + identity(2) * c(2.0, 0.0);
        let plain = chain_monodromy(&s.form, &gluing, &s.polygon, i, &s.ctx).unwrap();
        let moved = chain_monodromy_in_basis(&s.form, &gluing.right_multiplied(&g), &s.polygon, i, &g, &s.ctx).unwrap();
        let expected = inverse(&g).unwrap() * plain * &g;
        prop_assert!(dist(&moved, &expected) < 1e-8);
    }

    #[test]
    fn solved_gluing_is_consistent(seed in 0u64..1000) {
        let s = setup(seed);
        let gluing = consistent_gluing(&s.form, &s.polygon, &s.ctx, &mut common::rng(seed + 7)).unwrap();
        prop_assert!(gluing.violations().is_empty());
        prop_assert!(consistency_defect(&s.form, &gluing, &s.polygon, &s.ctx).unwrap() < 1e-7);
    }
}

#[test]
fn paired_edge_loops_are_inverse() {
    let s = setup(3);
    let gluing = consistent_gluing(&s.form, &s.polygon, &s.ctx, &mut common::rng(4)).unwrap();
    for k in 0..8 {
        let j = s.polygon.pairing()[k].partner;
        let nk = edge_loop_monodromy(&s.form, &gluing, &s.polygon, k + 1, &s.ctx).unwrap();
        let nj = edge_loop_monodromy(&s.form, &gluing, &s.polygon, j + 1, &s.ctx).unwrap();
        assert!(dist(&(nk * nj), &identity(2)) < 1e-8, "edges {k} and {j}");
    }
}

#[test]
fn pointwise_gluing_ends_at_the_pair_matrix() {
    let s = setup(5);
    let gluing = consistent_gluing(&s.form, &s.polygon, &s.ctx, &mut common::rng(6)).unwrap();
    for k in 0..8 {
        let j = s.polygon.pairing()[k].partner;
        let end = edge_gluing_matrix(&s.form, &gluing, &s.polygon, &s.generators, k, 1.0, &s.ctx)
            .unwrap();
        assert!(
            dist(&end, &gluing.pair_matrix(k + 1, j).unwrap()) < 1e-8,
            "edge {k}"
        );
    }
    assert!(
        edge_gluing_matrix(&s.form, &gluing, &s.polygon, &s.generators, 0, 1.5, &s.ctx).is_err()
    );
}

#[test]
fn identity_gluing_chain_is_plain_transport() {
    let s = setup(8);
    let gluing = GluingData::identity(2, 8);
    let path = chain_path(&s.polygon, 4, &s.ctx).unwrap();
    let direct = transport(&s.form, &path, &identity(2), &s.ctx.stepper)
        .unwrap()
        .y_end;
    let chain = chain_monodromy(&s.form, &gluing, &s.polygon, 5, &s.ctx).unwrap();
    assert!(dist(&direct, &chain) < 1e-12);
}

#[test]
fn boundary_monodromy_is_the_product_of_edge_transports() {
    let s = setup(9);
    let edges = edge_transports(&s.form, &s.polygon, &s.ctx).unwrap();
    let product = edges.iter().fold(identity(2), |acc, e| &e.y_end * acc);
    let whole = boundary_monodromy(&s.form, &s.polygon, &s.ctx).unwrap();
    assert!(dist(&product, &whole) < 1e-8);
}

#[test]
fn s_evolution_vanishes_without_motion() {
    let s = setup(10);
    let gluing = consistent_gluing(&s.form, &s.polygon, &s.ctx, &mut common::rng(1)).unwrap();
    let ds = s_rhs(
        &s.form,
        &gluing,
        s.polygon.vertices(),
        &[c(0.0, 0.0); 2],
        1e-3,
    )
    .unwrap();
    assert!(ds.iter().all(|m| m.iter().all(|z| z.norm() == 0.0)));
}

#[test]
fn singular_gluing_matrix_is_rejected_by_index() {
    let mut ms = vec![identity(2); 7];
    ms[4] = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
    match GluingData::new(ms) {
        Err(isomonodromy::Error::Validation(v)) => {
            assert!(v.iter().any(|x| x.field == "gluing[4]"))
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn rank_three_consistency_solve_is_unsupported() {
    let (_, polygon) = normalized_surface_group(2).unwrap();
    let mut rng = common::rng(2);
    let residues = (0..2)
        .map(|_| common::random_traceless(&mut rng, 3, 0.3))
        .collect();
    let form = LogConnectionForm::typical(vec![c(-2.6, 1.3), c(-4.0, 1.2)], residues).unwrap();
    let ctx = TransportContext {
        r_switch: default_r_switch(&form, &polygon),
        clearance: 0.1,
        stepper: StepperOptions::default(),
    };
    assert!(consistent_gluing(&form, &polygon, &ctx, &mut rng).is_err());
}
