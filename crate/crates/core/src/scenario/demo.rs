//! Genus-2 demo: the regular octagon group, two poles in the polygon, seeded
//! random traceless residues and gluing matrices that satisfy the edge
//! consistency condition.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::schema::{self, ScenarioFile, SettingsRepr};
use super::{Scenario, Settings};
use crate::connform::LogConnectionForm;
use crate::error::{Error, Result};
use crate::gluing::consistent_gluing;
use crate::hypgeo::normalized_surface_group;
use crate::linalg::CMatrix;
use crate::schlesinger::DeformationPath;
use crate::transport::default_r_switch;

pub const DEMO_POLES: [(f64, f64); 2] = [(-2.6, 1.3), (-4.0, 1.2)];
pub const DEMO_DELTA: f64 = 0.1;
pub const DEMO_RESIDUE_SCALE: f64 = 0.3;
/// Radius of the quarter circle traced by the first pole in the demo path.
pub const DEMO_PATH_RADIUS: f64 = 0.1;
pub const DEMO_PATH_PIECES: usize = 16;

fn traceless<R: Rng>(rng: &mut R) -> CMatrix {
    let s = DEMO_RESIDUE_SCALE;
    let mut m = CMatrix::from_fn(2, 2, |_, _| {
        Complex64::new(rng.gen_range(-s..s), rng.gen_range(-s..s))
    });
    let half = m.trace() / 2.0;
    m[(0, 0)] -= half;
    m[(1, 1)] -= half;
    m
}

/// The demo scenario for `genus = 2`, reproducible from `seed`.
pub fn demo_scenario(genus: usize, seed: u64) -> Result<Scenario> {
    if genus != 2 {
        return Err(Error::Input(format!(
            "only the genus-2 demo is available, not genus {genus}"
        )));
    }
    let (generators, polygon) = normalized_surface_group(genus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poles: Vec<Complex64> = DEMO_POLES
        .iter()
        .map(|&(x, y)| Complex64::new(x, y))
        .collect();
    let residues = poles.iter().map(|_| traceless(&mut rng)).collect();
    let form = LogConnectionForm::typical(poles, residues)?;
    let settings = Settings {
        tol: 1e-10,
        atol: 1e-12,
        delta: DEMO_DELTA,
        r_switch: default_r_switch(&form, &polygon),
        samples_per_edge: polygon.samples_per_edge(),
        max_irregular_order: crate::connform::DEFAULT_MAX_IRREGULAR_ORDER,
    };
    let gluing = consistent_gluing(&form, &polygon, &settings.context(), &mut rng)?;
    let raw = ScenarioFile {
        rank: form.rank(),
        genus,
        generators: generators.iter().map(schema::mobius_repr).collect(),
        vertices: polygon
            .vertices()
            .iter()
            .map(|v| schema::point_repr(*v))
            .collect(),
        pairing: polygon.pairing().iter().map(schema::pairing_repr).collect(),
        poles: form.poles().iter().map(|z| schema::pair(*z)).collect(),
        residues: form.residues().iter().map(schema::matrix_repr).collect(),
        irregular: form.irregular().iter().map(schema::matrix_repr).collect(),
        gluing: gluing.matrices().iter().map(schema::matrix_repr).collect(),
        settings: SettingsRepr {
            tol: settings.tol,
            atol: settings.atol,
            delta: Some(settings.delta),
            r_switch: None,
            samples_per_edge: settings.samples_per_edge,
            max_irregular_order: settings.max_irregular_order,
        },
    };
    // Re-read through the validating loader so the demo obeys every check.
    Scenario::from_file(raw)
}

/// The demo deformation: the first pole moves along a quarter circle.
pub fn demo_path(scenario: &Scenario) -> Result<DeformationPath> {
    DeformationPath::quarter_circle(scenario.form.poles(), 0, DEMO_PATH_RADIUS, DEMO_PATH_PIECES)
}
