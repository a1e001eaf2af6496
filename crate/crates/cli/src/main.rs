//! `robust-rcpsp`: command-line front end.
//!
//! Machine-readable output (JSON, CSV, LP) goes to stdout, notes go to
//! stderr. Exit status is 0 on success, 1 on a domain error and 2 on a usage
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use robust_rcpsp::adversary::{
    branching_row_subset, build_adversary_constraint_matrix, check_fractional_certificate, ghouila_houri_refute,
};
use robust_rcpsp::experiment::{self, load_for_experiment, read_results_csv, write_outputs, write_results_csv};
use robust_rcpsp::milp::{export_lp, export_warm_start, solve_external, warm_start_assignment, BridgeLimits};
use robust_rcpsp::network::minimal_forbidden_sets;
use robust_rcpsp::reference::{diamond_fractional_certificate, diamond_instance};
use robust_rcpsp::{
    build_compact, solve_exact, time_windows, warm_start, worst_case_makespan_dp, Budget, CompactOptions,
    ExperimentConfig, ProjectInstance, SearchLimits, Selection,
};

const BRIDGE_ENV: &str = "ROBUST_RCPSP_BRIDGE";

#[derive(Parser)]
#[command(
    name = "robust-rcpsp",
    version,
    about = "Robust RCPSP under budgeted duration uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print an instance as JSON. PSPLIB files get half-duration deviations.
    Parse { file: PathBuf },
    /// Print the minimal forbidden sets as JSON.
    Forbidden { file: PathBuf },
    /// Worst-case makespan of a selection.
    Evaluate {
        file: PathBuf,
        /// JSON list of arcs such as `[[1,2],[3,4]]`, or a file holding one.
        #[arg(long, default_value = "[]")]
        selection: String,
        #[arg(long)]
        gamma: usize,
    },
    /// LFT heuristic schedule, selection and upper bound.
    Warmstart {
        file: PathBuf,
        #[arg(long)]
        gamma: usize,
    },
    /// Write the compact MILP as an LP file.
    Build {
        file: PathBuf,
        #[arg(long)]
        gamma: usize,
        /// Add transitivity rows.
        #[arg(long)]
        trans: bool,
        /// Per-arc big-M from time windows under the heuristic horizon.
        #[arg(long)]
        tighten: bool,
        /// Declare start variables integer.
        #[arg(long)]
        int_starts: bool,
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Also write the heuristic solution as an MST file.
        #[arg(long)]
        mst: Option<PathBuf>,
    },
    /// Solve an instance exactly.
    Solve {
        file: PathBuf,
        #[arg(long)]
        gamma: usize,
        #[arg(long, value_enum, default_value_t = Method::Bnb)]
        method: Method,
        #[arg(long)]
        time_limit: Option<f64>,
        /// Solver command template; defaults to $ROBUST_RCPSP_BRIDGE.
        #[arg(long)]
        bridge: Option<String>,
    },
    /// Run a batch experiment and write results, profile and summary.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `results` next to the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Performance profile (CSV) of a results file.
    Profile {
        #[arg(long)]
        results: PathBuf,
        /// Also write the SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Built-in consistency checks.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Integral versus fractional adversary on the three-activity diamond.
    Counterexample,
    /// Ghouila-Houri refutation on a five-row subset of the adversary matrix.
    Tu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bnb,
    Bridge,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load(path: &Path) -> Result<ProjectInstance> {
    load_for_experiment(path).with_context(|| format!("loading {}", path.display()))
}

fn load_with_budget(path: &Path, gamma: usize) -> Result<ProjectInstance> {
    let inst = load(path)?;
    Budget::new(gamma, &inst)?;
    Ok(inst)
}

fn parse_selection(arg: &str) -> Result<Selection> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).context("selection must be a JSON list of [i, j] pairs")
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Parse { file } => {
            println!("{}", load(&file)?.to_json());
        }
        Command::Forbidden { file } => {
            print_json(&minimal_forbidden_sets(&load(&file)?)?)?;
        }
        Command::Evaluate { file, selection, gamma } => {
            let inst = load(&file)?;
            let sel = parse_selection(&selection)?;
            let out = worst_case_makespan_dp(&inst, &sel, gamma)?;
            #[derive(Serialize)]
            struct Evaluation<'a> {
                value: i64,
                delayed: &'a [usize],
                path: &'a [usize],
            }
            print_json(&Evaluation {
                value: out.value,
                delayed: &out.delayed,
                path: &out.path,
            })?;
        }
        Command::Warmstart { file, gamma } => {
            let inst = load_with_budget(&file, gamma)?;
            print_json(&warm_start(&inst, gamma))?;
        }
        Command::Build {
            file,
            gamma,
            trans,
            tighten,
            int_starts,
            output,
            mst,
        } => {
            let inst = load_with_budget(&file, gamma)?;
            let ws = warm_start(&inst, gamma);
            let opts = CompactOptions {
                transitivity: trans,
                tighten: if tighten {
                    Some(time_windows(&inst, ws.ub)?)
                } else {
                    None
                },
                integral_starts: int_starts,
                ..Default::default()
            };
            let model = build_compact(&inst, gamma, &opts)?;
            std::fs::write(&output, export_lp(&model)).with_context(|| format!("writing {}", output.display()))?;
            if let Some(mst) = &mst {
                let text = export_warm_start(&warm_start_assignment(&inst, &ws));
                std::fs::write(mst, text).with_context(|| format!("writing {}", mst.display()))?;
            }
            #[derive(Serialize)]
            struct Built {
                model: String,
                variables: usize,
                constraints: usize,
                warm_start_ub: i64,
            }
            print_json(&Built {
                model: model.name().to_string(),
                variables: model.variables().len(),
                constraints: model.constraints().len(),
                warm_start_ub: ws.ub,
            })?;
        }
        Command::Solve {
            file,
            gamma,
            method,
            time_limit,
            bridge,
        } => {
            let inst = load_with_budget(&file, gamma)?;
            #[derive(Serialize)]
            struct Solved {
                method: &'static str,
                status: String,
                objective: Option<f64>,
                bound: Option<f64>,
                selection: Option<Selection>,
                time_s: f64,
            }
            let solved = match method {
                Method::Bnb => {
                    let limits = SearchLimits {
                        time_s: time_limit,
                        ..Default::default()
                    };
                    let res = solve_exact(&inst, gamma, limits, None)?;
                    Solved {
                        method: "bnb",
                        status: if res.is_optimal() { "optimal" } else { "feasible" }.to_string(),
                        objective: Some(res.value as f64),
                        bound: Some(res.bound as f64),
                        selection: Some(res.selection),
                        time_s: res.time_s,
                    }
                }
                Method::Bridge => {
                    let Some(command) = bridge.or_else(|| std::env::var(BRIDGE_ENV).ok()) else {
                        bail!("no solver bridge: pass --bridge or set {BRIDGE_ENV}");
                    };
                    let ws = warm_start(&inst, gamma);
                    let opts = CompactOptions {
                        transitivity: true,
                        tighten: Some(time_windows(&inst, ws.ub)?),
                        integral_starts: true,
                        ..Default::default()
                    };
                    let model = build_compact(&inst, gamma, &opts)?;
                    let limits = BridgeLimits {
                        command,
                        time_s: time_limit.unwrap_or(60.0),
                    };
                    let out = solve_external(&model, Some(&warm_start_assignment(&inst, &ws)), &limits);
                    if let Some(msg) = &out.message {
                        eprintln!("solver: {msg}");
                    }
                    Solved {
                        method: "bridge",
                        status: out.status.as_str().to_string(),
                        objective: out.objective,
                        bound: out.bound,
                        selection: None,
                        time_s: out.time_s,
                    }
                }
            };
            print_json(&solved)?;
        }
        Command::Bench { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.parent().unwrap_or(Path::new(".")).join("results"));
            let records = experiment::run_experiment(&cfg)?;
            write_outputs(&out, &records)?;
            print!("{}", write_results_csv(&records)?);
            eprintln!("{} records written to {}", records.len(), out.display());
        }
        Command::Profile { results, svg } => {
            let text = std::fs::read_to_string(&results).with_context(|| format!("reading {}", results.display()))?;
            let records = read_results_csv(&text)?;
            let mut variants: Vec<String> = Vec::new();
            for r in &records {
                if !variants.contains(&r.variant) {
                    variants.push(r.variant.clone());
                }
            }
            let profile = experiment::performance_profile(&records, &variants)?;
            if let Some(svg) = svg {
                std::fs::write(&svg, profile.to_svg()).with_context(|| format!("writing {}", svg.display()))?;
            }
            print!("{}", profile.to_csv());
        }
        Command::Verify {
            what: Verify::Counterexample,
        } => {
            let inst = diamond_instance();
            let empty = Selection::empty();
            let integral = worst_case_makespan_dp(&inst, &empty, 1)?.value;
            let check = check_fractional_certificate(&inst, &empty, 1, &diamond_fractional_certificate())?;
            println!("integral={integral} fractional={}", check.objective);
            let ok = integral == 3 && check.feasible && check.objective == robust_rcpsp::Rational::new(7, 2);
            return Ok(ExitCode::from(if ok { 0 } else { 1 }));
        }
        Command::Verify { what: Verify::Tu } => {
            let matrix = build_adversary_constraint_matrix(&diamond_instance(), &Selection::empty(), 1)?;
            let Some(rows) = branching_row_subset(&matrix) else {
                bail!("the network has no branching activity");
            };
            let verdict = ghouila_houri_refute(matrix.rows(), &rows)?;
            print_json(&verdict)?;
            return Ok(ExitCode::from(if verdict.is_not_tu() { 0 } else { 1 }));
        }
    }
    Ok(ExitCode::SUCCESS)
}
