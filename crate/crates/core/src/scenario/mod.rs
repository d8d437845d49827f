//! Scenario files, validation, verification reports and the demo generator.

pub mod demo;
pub mod report;
pub mod schema;

use std::fs;
use std::path::Path;

use crate::connform::LogConnectionForm;
use crate::error::{Error, Result, Violation};
use crate::gluing::GluingData;
use crate::hypgeo::{relation_defect, FundamentalPolygon, MobiusMap};
use crate::ode::StepperOptions;
use crate::schlesinger::DeformationPath;
use crate::transport::{default_clearance, default_r_switch, Segment, TransportContext};

pub use demo::{demo_path, demo_scenario};
pub use report::{run_verify, write_trace, LoopSpec, VerificationReport};
pub use schema::{PathFile, ScenarioFile};

/// Relation defect accepted on load.
pub const RELATION_TOL: f64 = 1e-8;
/// Edge-pairing defect accepted on load.
pub const PAIRING_TOL: f64 = 1e-8;
/// Tolerance for the exterior-automorphism test of each generator.
pub const AUTOMORPHISM_TOL: f64 = 1e-9;

/// Resolved numeric settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub atol: f64,
    pub delta: f64,
    pub r_switch: f64,
    pub samples_per_edge: usize,
    pub max_irregular_order: usize,
}

impl Settings {
    pub fn stepper(&self) -> StepperOptions {
        StepperOptions {
            rtol: self.tol,
            atol: self.atol,
            ..StepperOptions::default()
        }
    }

    pub fn context(&self) -> TransportContext {
        TransportContext {
            r_switch: self.r_switch,
            clearance: self.delta,
            stepper: self.stepper(),
        }
    }
}

/// A validated scenario. The parsed file is kept so that saving reproduces it.
#[derive(Debug, Clone)]
pub struct Scenario {
    raw: ScenarioFile,
    pub generators: Vec<MobiusMap>,
    pub polygon: FundamentalPolygon,
    pub form: LogConnectionForm,
    pub gluing: GluingData,
    pub settings: Settings,
}

impl Scenario {
    pub fn from_file(raw: ScenarioFile) -> Result<Self> {
        let mut v = Vec::new();
        let built = build(&raw, &mut v);
        match built {
            Some(s) if v.is_empty() => Ok(s),
            _ => Err(Error::Validation(v)),
        }
    }

    pub fn raw(&self) -> &ScenarioFile {
        &self.raw
    }

    pub fn genus(&self) -> usize {
        self.polygon.genus()
    }

    pub fn relation_defect(&self) -> f64 {
        relation_defect(&self.generators).unwrap_or(f64::INFINITY)
    }

    pub fn pairing_defect(&self) -> f64 {
        self.polygon.pairing_defect(&self.generators)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(&self.raw)
    }
}

pub fn to_json(file: &ScenarioFile) -> Result<String> {
    let mut s = serde_json::to_string_pretty(file).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Scenario::from_file(raw)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&fs::read_to_string(path)?)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, scenario.to_json()?)?;
    Ok(())
}

/// Deformation path and snapshot times from a path file, checked against the
/// scenario's polygon and clearance.
pub fn load_path(
    path: impl AsRef<Path>,
    scenario: &Scenario,
) -> Result<(DeformationPath, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let file: PathFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    path_from_file(&file, scenario)
}

pub fn path_from_file(file: &PathFile, scenario: &Scenario) -> Result<(DeformationPath, Vec<f64>)> {
    let waypoints = file
        .poles
        .iter()
        .map(|w| w.iter().map(|z| schema::complex(*z)).collect())
        .collect();
    let path = DeformationPath::new(file.times.clone(), waypoints)?;
    let n = scenario.form.poles().len();
    if path.waypoints()[0].len() != n {
        return Err(Error::Validation(vec![Violation::new(
            "path.poles",
            format!(
                "waypoints move {} poles, scenario has {n}",
                path.waypoints()[0].len()
            ),
        )]));
    }
    let mut v = path.violations(&scenario.polygon, scenario.settings.delta);
    for (i, (a, b)) in path.waypoints()[0]
        .iter()
        .zip(scenario.form.poles())
        .enumerate()
    {
        if (a - b).norm() > 1e-12 * (1.0 + b.norm()) {
            v.push(Violation::new(
                format!("path.poles[0][{i}]"),
                "first waypoint differs from the scenario pole",
            ));
        }
    }
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    Ok((path, file.snapshots.clone()))
}

pub fn path_to_file(path: &DeformationPath, snapshots: Vec<f64>) -> PathFile {
    PathFile {
        times: path.times().to_vec(),
        poles: path
            .waypoints()
            .iter()
            .map(|w| w.iter().map(|z| schema::pair(*z)).collect())
            .collect(),
        snapshots,
    }
}

fn build(raw: &ScenarioFile, v: &mut Vec<Violation>) -> Option<Scenario> {
    let (p, g) = (raw.rank, raw.genus);
    let s = &raw.settings;
    if p == 0 {
        v.push(Violation::new("rank", "rank must be at least 1"));
    }
    if g < 2 {
        v.push(Violation::new(
            "genus",
            format!("genus must be at least 2, got {g}"),
        ));
    }
    if !(s.tol > 0.0) || !(s.atol > 0.0) {
        v.push(Violation::new(
            "settings.tol",
            "tolerances must be positive",
        ));
    }
    if s.samples_per_edge < 4 {
        v.push(Violation::new(
            "settings.samples_per_edge",
            "need at least 4 samples per edge",
        ));
    }
    if !v.is_empty() {
        return None;
    }
    let n_vert = 4 * g;
    let count = |v: &mut Vec<Violation>, field: &str, got: usize, want: usize| {
        if got != want {
            v.push(Violation::new(
                field,
                format!("expected {want} entries, got {got}"),
            ));
        }
    };
    count(v, "generators", raw.generators.len(), 2 * g);
    count(v, "vertices", raw.vertices.len(), n_vert);
    count(v, "pairing", raw.pairing.len(), n_vert);
    count(v, "residues", raw.residues.len(), raw.poles.len());
    count(v, "gluing", raw.gluing.len(), n_vert - 1);
    if raw.irregular.is_empty() {
        v.push(Violation::new("irregular", "at least C₁ is required"));
    }
    if raw.irregular.len() > s.max_irregular_order {
        v.push(Violation::new(
            "irregular",
            format!(
                "order {} exceeds max_irregular_order {}",
                raw.irregular.len(),
                s.max_irregular_order
            ),
        ));
    }
    if !v.is_empty() {
        return None;
    }

    // Generators.
    let mut generators = Vec::with_capacity(2 * g);
    for (i, q) in raw.generators.iter().enumerate() {
        match schema::mobius(q) {
            Ok(m) => {
                if !m.is_exterior_automorphism(AUTOMORPHISM_TOL) {
                    v.push(Violation::new(
                        format!("generators[{i}]"),
                        "not an automorphism of the exterior of the unit disc",
                    ));
                }
                generators.push(m);
            }
            Err(e) => v.push(Violation::new(format!("generators[{i}]"), e.to_string())),
        }
    }
    if generators.len() == 2 * g {
        let d = relation_defect(&generators).unwrap_or(f64::INFINITY);
        if !(d < RELATION_TOL) {
            v.push(Violation::new(
                "generators",
                format!("surface-group relation defect {d:e} exceeds {RELATION_TOL:e}"),
            ));
        }
    }

    // Polygon.
    let mut vertices = Vec::with_capacity(n_vert);
    for (i, p) in raw.vertices.iter().enumerate() {
        match schema::point(p) {
            Ok(x) => vertices.push(x),
            Err(e) => v.push(Violation::new(format!("vertices[{i}]"), e.to_string())),
        }
    }
    if let Some(first) = vertices.first() {
        if !first.is_infinite() {
            v.push(Violation::new(
                "vertices[0]",
                "first vertex must be \"inf\"",
            ));
        }
    }
    for (i, x) in vertices.iter().enumerate().skip(1) {
        if x.is_infinite() {
            v.push(Violation::new(
                format!("vertices[{i}]"),
                "only the first vertex may be infinite",
            ));
        }
    }
    let pairing: Vec<_> = raw.pairing.iter().map(schema::pairing).collect();
    let polygon = if vertices.len() == n_vert && v.iter().all(|x| !x.field.starts_with("vertices"))
    {
        match FundamentalPolygon::new(g, vertices, pairing) {
            Ok(poly) => Some(poly.with_samples_per_edge(s.samples_per_edge)),
            Err(e) => {
                v.push(Violation::new("pairing", e.to_string()));
                None
            }
        }
    } else {
        None
    };
    if let Some(poly) = &polygon {
        for msg in poly.exterior_violations() {
            v.push(Violation::new("vertices", msg));
        }
        if !poly.is_simple() {
            v.push(Violation::new(
                "vertices",
                "polygon boundary is not a simple closed curve",
            ));
        }
        if generators.len() == 2 * g {
            let d = poly.pairing_defect(&generators);
            if !(d < PAIRING_TOL) {
                v.push(Violation::new(
                    "pairing",
                    format!("paired edges are not matched by their generators (defect {d:e})"),
                ));
            }
        }
    }

    // Form.
    let poles: Vec<_> = raw.poles.iter().map(|z| schema::complex(*z)).collect();
    let mats = |field: &str, list: &[schema::MatrixRows], v: &mut Vec<Violation>| -> Vec<_> {
        list.iter()
            .enumerate()
            .filter_map(|(i, rows)| {
                let m = schema::matrix(rows, p);
                if m.is_none() {
                    v.push(Violation::new(
                        format!("{field}[{i}]"),
                        format!("expected a {p}x{p} matrix"),
                    ));
                }
                m
            })
            .collect()
    };
    let before = v.len();
    let residues = mats("residues", &raw.residues, v);
    let irregular = mats("irregular", &raw.irregular, v);
    let gluing_ms = mats("gluing", &raw.gluing, v);
    if v.len() > before {
        return None;
    }
    let form = match LogConnectionForm::from_parts(poles, residues, irregular) {
        Ok(f) => f,
        Err(e) => {
            v.push(Violation::new("residues", e.to_string()));
            return None;
        }
    };
    v.extend(form.violations(s.max_irregular_order));
    let gluing = match GluingData::new(gluing_ms) {
        Ok(gl) => Some(gl),
        Err(Error::Validation(mut gv)) => {
            v.append(&mut gv);
            None
        }
        Err(e) => {
            v.push(Violation::new("gluing", e.to_string()));
            None
        }
    };
    let polygon = polygon?;

    for (i, a) in form.poles().iter().enumerate() {
        if a.norm() <= 1.0 || !a.is_finite() {
            continue;
        }
        match polygon.contains(*a) {
            Ok(true) => {}
            Ok(false) => v.push(Violation::new(
                format!("poles[{i}]"),
                "pole lies outside the fundamental polygon",
            )),
            Err(e) => v.push(Violation::new(format!("poles[{i}]"), e.to_string())),
        }
    }

    let delta = s
        .delta
        .unwrap_or_else(|| default_clearance(&form, &polygon));
    let r_switch = s
        .r_switch
        .unwrap_or_else(|| default_r_switch(&form, &polygon));
    if !(delta > 0.0) {
        v.push(Violation::new(
            "settings.delta",
            format!("clearance {delta} must be positive"),
        ));
    }
    if !(r_switch > 1.0) {
        v.push(Violation::new(
            "settings.r_switch",
            format!("chart switch radius {r_switch} must exceed 1"),
        ));
    }
    if form.min_pole_separation() <= 2.0 * delta {
        v.push(Violation::new(
            "settings.delta",
            format!("clearance {delta} is not below half the pole separation"),
        ));
    }
    for (k, edge) in polygon.edges().iter().enumerate() {
        let seg = Segment::from_geodesic(edge);
        for (i, a) in form.poles().iter().enumerate() {
            let d = seg.distance_to(*a);
            if d < delta {
                v.push(Violation::new(
                    format!("poles[{i}]"),
                    format!("pole is {d:e} from edge {k}, below the clearance {delta}"),
                ));
            }
        }
    }
    let settings = Settings {
        tol: s.tol,
        atol: s.atol,
        delta,
        r_switch,
        samples_per_edge: s.samples_per_edge,
        max_irregular_order: s.max_irregular_order,
    };
    Some(Scenario {
        raw: raw.clone(),
        generators,
        polygon,
        form,
        gluing: gluing?,
        settings,
    })
}
