//! Loop selection, monodromy measurement, the verification report and the CSV
//! trace.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::schema::{self, ComplexPair, MatrixRows};
use super::Scenario;
use crate::connform::LogConnectionForm;
use crate::error::{Error, Result};
use crate::gluing::{
    boundary_monodromy, chain_monodromy, consistency_defect, edge_loop_monodromy,
    edge_loops_from_transports, edge_transports, GluingData,
};
use crate::hypgeo::ExtPoint;
use crate::linalg::{dist, eigenvalues, identity, inverse, CMatrix};
use crate::schlesinger::{
    flatness_defect, flow, C1Coupling, DeformationPath, FlowOptions, SchlesingerState, Trajectory,
};
use crate::transport::{boundary_product_check, loop_around, monodromy, pole_monodromies};

/// A closed loop whose monodromy can be requested, with 1-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopSpec {
    Pole(usize),
    Edge(usize),
    Chain(usize),
    Boundary,
}

impl FromStr for LoopSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "boundary" {
            return Ok(LoopSpec::Boundary);
        }
        let (kind, index) = s.split_once(':').ok_or_else(|| {
            Error::Input(format!(
                "loop `{s}` is not pole:i, edge:i, chain:i or boundary"
            ))
        })?;
        let i: usize = index
            .parse()
            .map_err(|_| Error::Input(format!("loop index `{index}` is not a positive integer")))?;
        if i == 0 {
            return Err(Error::Input("loop indices start at 1".into()));
        }
        match kind {
            "pole" => Ok(LoopSpec::Pole(i)),
            "edge" => Ok(LoopSpec::Edge(i)),
            "chain" => Ok(LoopSpec::Chain(i)),
            _ => Err(Error::Input(format!("unknown loop kind `{kind}`"))),
        }
    }
}

impl fmt::Display for LoopSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopSpec::Pole(i) => write!(f, "pole:{i}"),
            LoopSpec::Edge(i) => write!(f, "edge:{i}"),
            LoopSpec::Chain(i) => write!(f, "chain:{i}"),
            LoopSpec::Boundary => write!(f, "boundary"),
        }
    }
}

/// Every loop measured by `verify`: pinwheels, edge loops, chains and the boundary.
pub fn all_loops(scenario: &Scenario) -> Vec<LoopSpec> {
    let n = scenario.polygon.vertex_count();
    (1..=scenario.form.poles().len())
        .map(LoopSpec::Pole)
        .chain((1..=n).map(LoopSpec::Edge))
        .chain((2..=n).map(LoopSpec::Chain))
        .chain([LoopSpec::Boundary])
        .collect()
}

/// Monodromy of a single loop for the given form and gluing data.
pub fn loop_monodromy(
    scenario: &Scenario,
    form: &LogConnectionForm,
    gluing: &GluingData,
    spec: LoopSpec,
) -> Result<CMatrix> {
    let ctx = scenario.settings.context();
    let polygon = &scenario.polygon;
    match spec {
        LoopSpec::Pole(i) => {
            if i > form.poles().len() {
                return Err(Error::Input(format!(
                    "pole {i} out of range 1..={}",
                    form.poles().len()
                )));
            }
            let path = loop_around(
                form.poles(),
                i - 1,
                ExtPoint::Infinity,
                ctx.clearance,
                ctx.r_switch,
            )?;
            monodromy(form, &path, &ctx.stepper)
        }
        LoopSpec::Edge(i) => edge_loop_monodromy(form, gluing, polygon, i, &ctx),
        LoopSpec::Chain(i) => chain_monodromy(form, gluing, polygon, i, &ctx),
        LoopSpec::Boundary => boundary_monodromy(form, polygon, &ctx),
    }
}

/// All loop monodromies of one state, sharing the edge transports, plus the
/// largest Abel determinant defect met on the way.
fn measure(
    scenario: &Scenario,
    form: &LogConnectionForm,
    gluing: &GluingData,
) -> Result<(Vec<CMatrix>, f64)> {
    let ctx = scenario.settings.context();
    let (poles, edges) = rayon::join(
        || pole_monodromies(form, ctx.clearance, ctx.r_switch, &ctx.stepper),
        || edge_transports(form, &scenario.polygon, &ctx),
    );
    let (poles, edges) = (poles?, edges?);
    let det_defect = poles
        .iter()
        .chain(&edges)
        .map(|r| r.det_defect)
        .fold(0.0, f64::max);
    let mut out: Vec<CMatrix> = poles.into_iter().map(|r| r.y_end).collect();
    out.extend(edge_loops_from_transports(gluing, &edges)?);
    let mut along = identity(form.rank());
    let n = edges.len();
    for (k, e) in edges.iter().enumerate() {
        along = &e.y_end * along;
        if k + 1 < n {
            out.push(inverse(&gluing.vertex_matrix(k + 1))? * &along);
        }
    }
    out.push(along);
    Ok((out, det_defect))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub orientation: &'static str,
    pub basepoint: &'static str,
    pub c1_coupling: &'static str,
    pub pair_matrix: &'static str,
    pub vertices: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            orientation: "counterclockwise around every pole and along the polygon boundary",
            basepoint: "inf",
            c1_coupling: "dB_i includes -dC1_i",
            pair_matrix: "S_{i,k} = S_k S_i^-1",
            vertices: "held fixed during the flow; no Teichmüller motion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub name: String,
    pub initial: MatrixRows,
    #[serde(rename = "final")]
    pub final_: MatrixRows,
    pub drift: f64,
    pub eigenvalues: Vec<ComplexPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub snapshots: usize,
    pub start_time: f64,
    pub end_time: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    pub initial_seconds: f64,
    pub flow_seconds: f64,
    pub final_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub conventions: Conventions,
    pub relation_defect: f64,
    pub pairing_defect: f64,
    pub infinity_defect: f64,
    pub consistency_defect_initial: f64,
    pub consistency_defect_final: f64,
    pub boundary_product_defect: f64,
    /// 1-based pole indices, rightmost factor first.
    pub boundary_product_order: Vec<usize>,
    /// `None` when the trajectory has fewer than three snapshots.
    pub flatness_defect: Option<f64>,
    pub max_flow_infinity_defect: f64,
    pub max_spectral_drift: f64,
    pub max_translation_defect: f64,
    pub max_det_defect: f64,
    pub loops: Vec<LoopReport>,
    pub max_drift: f64,
    pub flow: FlowStats,
    pub timing: Timing,
}

impl VerificationReport {
    /// The report with wall-clock figures zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            timing: Timing::default(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Measures every loop, runs the joint flow along `path`, measures again and
/// collects all defects.
pub fn run_verify(
    scenario: &Scenario,
    path: &DeformationPath,
    snapshots: &[f64],
) -> Result<(VerificationReport, Trajectory)> {
    let clock = Instant::now();
    let ctx = scenario.settings.context();
    let (form, gluing, polygon) = (&scenario.form, &scenario.gluing, &scenario.polygon);
    let loops = all_loops(scenario);

    let (first, boundary) = rayon::join(
        || {
            rayon::join(
                || measure(scenario, form, gluing),
                || consistency_defect(form, gluing, polygon, &ctx),
            )
        },
        || {
            boundary_product_check(
                form,
                ExtPoint::Infinity,
                ctx.clearance,
                ctx.r_switch,
                &ctx.stepper,
            )
        },
    );
    let ((initial, det_initial), consistency_initial) = (first.0?, first.1?);
    let boundary = boundary?;
    let initial_seconds = clock.elapsed().as_secs_f64();

    let flow_clock = Instant::now();
    let state0 = SchlesingerState {
        t: path.start_time(),
        form: form.clone(),
        gluing: gluing.clone(),
    };
    let opts = FlowOptions {
        stepper: ctx.stepper,
        snapshots: snapshots.to_vec(),
        coupling: C1Coupling::Subtract,
    };
    let trajectory = flow(&state0, path, polygon.vertices(), &opts)?;
    let flow_seconds = flow_clock.elapsed().as_secs_f64();

    let final_clock = Instant::now();
    let last = trajectory.last();
    let (measured, consistency_final) = rayon::join(
        || measure(scenario, &last.form, &last.gluing),
        || consistency_defect(&last.form, &last.gluing, polygon, &ctx),
    );
    let ((finals, det_final), consistency_final) = (measured?, consistency_final?);
    let final_seconds = final_clock.elapsed().as_secs_f64();

    let loop_reports: Vec<LoopReport> = loops
        .par_iter()
        .zip(initial.par_iter().zip(&finals))
        .map(|(spec, (a, b))| LoopReport {
            name: spec.to_string(),
            initial: schema::matrix_repr(a),
            final_: schema::matrix_repr(b),
            drift: dist(a, b),
            eigenvalues: eigenvalues(a).into_iter().map(schema::pair).collect(),
        })
        .collect();
    let max_drift = loop_reports.iter().map(|l| l.drift).fold(0.0, f64::max);
    let flatness = if trajectory.states.len() >= 3 {
        Some(flatness_defect(&trajectory.states)?)
    } else {
        None
    };
    let report = VerificationReport {
        conventions: Conventions::default(),
        relation_defect: scenario.relation_defect(),
        pairing_defect: scenario.pairing_defect(),
        infinity_defect: form.infinity_defect(),
        consistency_defect_initial: consistency_initial,
        consistency_defect_final: consistency_final,
        boundary_product_defect: boundary.defect,
        boundary_product_order: boundary.order.iter().map(|i| i + 1).collect(),
        flatness_defect: flatness,
        max_flow_infinity_defect: trajectory.max_infinity_defect(),
        max_spectral_drift: trajectory.max_spectral_drift(),
        max_translation_defect: trajectory
            .monitors
            .iter()
            .map(|m| m.translation_defect)
            .fold(0.0, f64::max),
        max_det_defect: det_initial.max(det_final),
        loops: loop_reports,
        max_drift,
        flow: FlowStats {
            accepted_steps: trajectory.stats.accepted,
            rejected_steps: trajectory.stats.rejected,
            snapshots: trajectory.states.len(),
            start_time: path.start_time(),
            end_time: path.end_time(),
        },
        timing: Timing {
            initial_seconds,
            flow_seconds,
            final_seconds,
            total_seconds: clock.elapsed().as_secs_f64(),
        },
    };
    Ok((report, trajectory))
}

/// Header of the CSV trace for `n` poles, `k` irregular coefficients, `s`
/// gluing matrices of rank `p`.
pub fn trace_header(p: usize, n: usize, k: usize, s: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 1..=n {
        h.push(format!("re_a{i}"));
        h.push(format!("im_a{i}"));
    }
    let mut mats = |prefix: &str, count: usize, first: usize| {
        for m in first..first + count {
            for r in 1..=p {
                for c in 1..=p {
                    h.push(format!("re_{prefix}{m}_{r}{c}"));
                    h.push(format!("im_{prefix}{m}_{r}{c}"));
                }
            }
        }
    };
    mats("B", n, 1);
    mats("C", k, 1);
    mats("S", s, 2);
    h.extend(["infinity_defect", "spectral_drift", "translation_defect"].map(String::from));
    h
}

/// Writes one CSV row per snapshot of the trajectory.
pub fn write_trace(trajectory: &Trajectory, out: impl AsRef<Path>) -> Result<()> {
    let first = &trajectory.states[0];
    let header = trace_header(
        first.form.rank(),
        first.form.poles().len(),
        first.form.order(),
        first.gluing.matrices().len(),
    );
    let mut w = csv::Writer::from_path(out).map_err(csv_error)?;
    w.write_record(&header).map_err(csv_error)?;
    for (state, mon) in trajectory.states.iter().zip(&trajectory.monitors) {
        let mut row = vec![state.t.to_string()];
        let mut push = |z: &Complex64| {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        };
        state.form.poles().iter().for_each(&mut push);
        for m in state
            .form
            .residues()
            .iter()
            .chain(state.form.irregular())
            .chain(state.gluing.matrices())
        {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    push(&m[(r, c)]);
                }
            }
        }
        row.push(mon.infinity_defect.to_string());
        row.push(mon.spectral_drift.to_string());
        row.push(mon.translation_defect.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}
