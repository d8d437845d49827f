use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use isomonodromy::gluing::edge_gluing_matrix;
use isomonodromy::linalg::{dist, eigenvalues};
use isomonodromy::scenario::{
    demo_path, demo_scenario, load_path, load_scenario, path_to_file, report::loop_monodromy,
    run_verify, save_scenario, schema, write_trace, LoopSpec,
};
use isomonodromy::schlesinger::{flow, FlowOptions, SchlesingerState};
use isomonodromy::{Error, Result};

#[derive(Parser)]
#[command(
    name = "isomonodromy",
    version,
    about = "Isomonodromic deformations of logarithmic connections on compact Riemann surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario and print its defects.
    Check { scenario: PathBuf },
    /// Print the monodromy of one loop: pole:i, edge:i, chain:i or boundary.
    Monodromy {
        scenario: PathBuf,
        #[arg(long = "loop")]
        loop_: LoopSpec,
    },
    /// Run the joint flow along a path and write the CSV trace.
    Flow {
        scenario: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the flow and write the verification report.
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sample the pointwise gluing along edge i (1-based).
    Reconstruct {
        scenario: PathBuf,
        #[arg(long)]
        edge: usize,
        #[arg(long, default_value_t = 9)]
        samples: usize,
    },
    /// Write the genus-2 demo scenario.
    Demo {
        #[arg(long, default_value_t = 2)]
        genus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the quarter-circle deformation path.
        #[arg(long)]
        path_out: Option<PathBuf>,
    },
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(std::io::stdout().lock(), "{text}")?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Check { scenario } => {
            let s = load_scenario(&scenario)?;
            let ctx = s.settings.context();
            let consistency =
                isomonodromy::gluing::consistency_defect(&s.form, &s.gluing, &s.polygon, &ctx)?;
            print_json(&json!({
                "violations": 0,
                "relation_defect": s.relation_defect(),
                "pairing_defect": s.pairing_defect(),
                "infinity_defect": s.form.infinity_defect(),
                "consistency_defect": consistency,
                "delta": s.settings.delta,
                "r_switch": s.settings.r_switch,
            }))
        }
        Command::Monodromy { scenario, loop_ } => {
            let s = load_scenario(&scenario)?;
            let m = loop_monodromy(&s, &s.form, &s.gluing, loop_)?;
            let ev: Vec<_> = eigenvalues(&m).into_iter().map(schema::pair).collect();
            print_json(&json!({
                "loop": loop_.to_string(),
                "basepoint": "inf",
                "orientation": "counterclockwise",
                "matrix": schema::matrix_repr(&m),
                "eigenvalues": ev,
            }))
        }
        Command::Flow {
            scenario,
            path,
            out,
        } => {
            let s = load_scenario(&scenario)?;
            let (p, snapshots) = load_path(&path, &s)?;
            let state0 = SchlesingerState {
                t: p.start_time(),
                form: s.form.clone(),
                gluing: s.gluing.clone(),
            };
            let opts = FlowOptions {
                stepper: s.settings.stepper(),
                snapshots,
                ..FlowOptions::default()
            };
            let traj = flow(&state0, &p, s.polygon.vertices(), &opts)?;
            write_trace(&traj, &out)?;
            print_json(&json!({
                "snapshots": traj.states.len(),
                "accepted_steps": traj.stats.accepted,
                "max_infinity_defect": traj.max_infinity_defect(),
                "max_spectral_drift": traj.max_spectral_drift(),
            }))
        }
        Command::Verify {
            scenario,
            path,
            report,
            trace,
        } => {
            let s = load_scenario(&scenario)?;
            let (p, snapshots) = load_path(&path, &s)?;
            let (r, traj) = run_verify(&s, &p, &snapshots)?;
            std::fs::write(&report, r.to_json()?)?;
            if let Some(trace) = trace {
                write_trace(&traj, &trace)?;
            }
            print_json(&json!({
                "max_drift": r.max_drift,
                "consistency_defect_final": r.consistency_defect_final,
                "boundary_product_defect": r.boundary_product_defect,
                "total_seconds": r.timing.total_seconds,
            }))
        }
        Command::Reconstruct {
            scenario,
            edge,
            samples,
        } => {
            let s = load_scenario(&scenario)?;
            let n = s.polygon.vertex_count();
            if !(1..=n).contains(&edge) {
                return Err(Error::Input(format!("edge {edge} outside 1..={n}")));
            }
            if samples < 2 {
                return Err(Error::Input("need at least 2 samples".into()));
            }
            let ctx = s.settings.context();
            let k = edge - 1;
            let rows: Vec<_> = (0..samples)
                .map(|q| {
                    let t = q as f64 / (samples - 1) as f64;
                    let m = edge_gluing_matrix(
                        &s.form,
                        &s.gluing,
                        &s.polygon,
                        &s.generators,
                        k,
                        t,
                        &ctx,
                    )?;
                    Ok(json!({ "s": t, "matrix": schema::matrix_repr(&m) }))
                })
                .collect::<Result<_>>()?;
            let partner = s.polygon.pairing()[k].partner;
            let end =
                edge_gluing_matrix(&s.form, &s.gluing, &s.polygon, &s.generators, k, 1.0, &ctx)?;
            let end_defect = dist(&end, &s.gluing.pair_matrix(k + 1, partner)?);
            print_json(&json!({
                "edge": edge,
                "partner": partner + 1,
                "samples": rows,
                "endpoint_defect": end_defect,
            }))
        }
        Command::Demo {
            genus,
            seed,
            out,
            path_out,
        } => {
            let s = demo_scenario(genus, seed)?;
            save_scenario(&s, &out)?;
            if let Some(path_out) = path_out {
                let file = path_to_file(&demo_path(&s)?, Vec::new());
                let mut text =
                    serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
                text.push('\n');
                std::fs::write(path_out, text)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are invalid input; exit code 2 is reserved for numerical failure.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Validation(v) = &e {
                for x in v {
                    eprintln!("  {x}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
