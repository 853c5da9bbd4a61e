//! Command-line front end: classify relations between finite systems, build
//! grid abstractions of the affine testbed, synthesize and concretize
//! controllers, simulate closed loops, and run the full pipeline.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible synthesis,
//! 4 verification failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simrel::concretize::{closed_loop_run, concretize, verify_reproducibility};
use simrel::generators::passing_instance;
use simrel::grid::{
    affine_dynamics, affine_growth_bound, construct_abstraction, construct_asrb_abstraction,
    verify_grid_reproducibility, Dynamics, GridAbstraction, GridParams, GrowthBound, Point,
};
use simrel::interface::canonical_interface;
use simrel::io;
use simrel::relation::{classify, RelationType};
use simrel::synthesis::{synthesize_reach, synthesize_safety, StaticController, Synthesis};
use simrel::system::FiniteSystem;
use simrel::Error;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "simrel",
    about = "Simulation relations, grid abstractions, and controller concretization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    Asr,
    Asrb,
    Asrbb,
    Mcr,
    Frr,
}

impl From<TypeArg> for RelationType {
    fn from(t: TypeArg) -> RelationType {
        match t {
            TypeArg::Asr => RelationType::Asr,
            TypeArg::Asrb => RelationType::Asrb,
            TypeArg::Asrbb => RelationType::Asrbb,
            TypeArg::Mcr => RelationType::Mcr,
            TypeArg::Frr => RelationType::Frr,
        }
    }
}

/// The affine testbed family f(x,u) = a·x + u with κ(y,x,u) = u + k·(y−x).
#[derive(Args)]
struct DynamicsArgs {
    /// State dimension of the testbed.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Diagonal gain of the open-loop map.
    #[arg(long, default_value_t = 0.9)]
    a: f64,
    /// Diagonal gain of the stabilizing feedback.
    #[arg(long, default_value_t = -0.4)]
    k: f64,
    /// Lower bound of the state box in every dimension.
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    /// Upper bound of the state box in every dimension.
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    /// Abstract input scalars, replicated across dimensions.
    #[arg(long, default_value = "0.0", value_delimiter = ',')]
    inputs: Vec<f64>,
}

#[derive(Args)]
struct GridArgs {
    /// Grid step.
    #[arg(long)]
    eta: f64,
    /// Cell radius level.
    #[arg(long)]
    eps: f64,
    /// Sub-grid step (predictive construction only).
    #[arg(long)]
    eta2: Option<f64>,
    /// Sub-grid level (predictive construction only).
    #[arg(long)]
    eps2: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check all five relation types between two finite systems.
    Classify {
        #[arg(long)]
        s1: PathBuf,
        #[arg(long)]
        s2: PathBuf,
        #[arg(long)]
        rel: PathBuf,
        /// Optional JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a grid abstraction of the affine testbed.
    Abstract {
        #[arg(long, value_enum)]
        r#type: TypeArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        /// Output directory for abstraction.json and cardinality.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a controller on a finite system file.
    Synthesize {
        #[arg(long)]
        system: PathBuf,
        /// "safety" or "reach".
        #[arg(long, default_value = "safety")]
        spec: String,
        /// Safe states for safety specs; "all" or a comma list of labels.
        #[arg(long, default_value = "all", value_delimiter = ',')]
        safe: Vec<String>,
        /// Target states for reach specs.
        #[arg(long, value_delimiter = ',')]
        target: Vec<String>,
        /// Step bound for reach specs.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Concretize an abstract controller through the canonical interface.
    Concretize {
        #[arg(long, value_enum)]
        r#type: TypeArg,
        #[arg(long)]
        s1: PathBuf,
        #[arg(long)]
        s2: PathBuf,
        #[arg(long)]
        rel: PathBuf,
        #[arg(long)]
        controller: PathBuf,
        /// Output directory for controller system and interface dumps.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the finite closed loop and verify trace reproducibility.
    Simulate {
        #[arg(long, value_enum)]
        r#type: TypeArg,
        #[arg(long)]
        s1: PathBuf,
        #[arg(long)]
        s2: PathBuf,
        #[arg(long)]
        rel: PathBuf,
        #[arg(long)]
        controller: PathBuf,
        #[arg(long, default_value_t = 6)]
        horizon: usize,
        /// Output directory for trace.csv and verdict.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Abstract, synthesize, simulate and verify on the affine testbed.
    Pipeline {
        #[arg(long, value_enum)]
        r#type: TypeArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded randomized consistency checks of the relation machinery.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read(path: &Path) -> simrel::Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn write(path: &Path, content: &str) -> simrel::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

fn load_simple(path: &Path) -> simrel::Result<FiniteSystem> {
    io::parse_system(&read(path)?)?.simple()
}

fn build_dynamics(d: &DynamicsArgs) -> simrel::Result<(Dynamics, GrowthBound)> {
    if d.dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if d.hi <= d.lo {
        return Err(Error::InvalidArgument(format!(
            "empty state box [{}, {}]",
            d.lo, d.hi
        )));
    }
    let u2: Vec<Point> = d.inputs.iter().map(|&u| vec![u; d.dim]).collect();
    if u2.is_empty() {
        return Err(Error::InvalidArgument("need at least one input".into()));
    }
    Ok((
        affine_dynamics(d.dim, d.a, vec![(d.lo, d.hi); d.dim], u2),
        affine_growth_bound(d.a, d.k),
    ))
}

fn build_abstraction(
    t: RelationType,
    dynamics: &Dynamics,
    gb: &GrowthBound,
    grid: &GridArgs,
) -> simrel::Result<GridAbstraction> {
    let gp = match (grid.eta2, grid.eps2) {
        (Some(eta2), Some(eps2)) => GridParams::with_subgrid(grid.eta, grid.eps, eta2, eps2),
        _ => GridParams::new(grid.eta, grid.eps),
    };
    match t {
        RelationType::Asrb => construct_asrb_abstraction(dynamics, gb, &gp),
        RelationType::Frr => Err(Error::InvalidArgument(
            "no grid construction for frr; use mcr (every grid MCR map is also checked as FRR-style containment)".into(),
        )),
        _ => construct_abstraction(t, dynamics, gb, &gp),
    }
}

fn write_abstraction(abs: &GridAbstraction, out: &Path) -> simrel::Result<()> {
    write(
        &out.join("abstraction.json"),
        &io::to_pretty(&io::abstraction_to_json(abs)),
    )?;
    write(&out.join("cardinality.csv"), &io::cardinality_csv(&abs.system))
}

fn synthesize_all_safe(s2: &FiniteSystem) -> simrel::Result<Synthesis> {
    let safe: BTreeSet<usize> = (0..s2.states.len()).collect();
    synthesize_safety(s2, &safe)
}

fn controller_or_exit3(
    outcome: Synthesis,
) -> std::result::Result<StaticController, u8> {
    match outcome {
        Synthesis::Controller { .. } => Ok(outcome.controller().expect("controller outcome")),
        Synthesis::Infeasible { reason } => {
            eprintln!("infeasible: {reason}");
            Err(EXIT_INFEASIBLE)
        }
    }
}

fn run(cmd: Command) -> simrel::Result<u8> {
    match cmd {
        Command::Classify { s1, s2, rel, out } => {
            let s1 = load_simple(&s1)?;
            let s2 = load_simple(&s2)?;
            let r = io::parse_relation(&read(&rel)?, &s1.states, &s2.states)?;
            let reports = classify(&s1, &s2, &r)?;
            for (t, report) in &reports {
                if report.holds {
                    println!("{t}: yes");
                } else {
                    let cex = report
                        .counterexample
                        .as_ref()
                        .map(|c| c.to_string())
                        .unwrap_or_default();
                    println!("{t}: no (counterexample: {cex})");
                }
            }
            if let Some(out) = out {
                write(
                    &out,
                    &io::to_pretty(&serde_json::to_value(&reports).expect("reports serialize")),
                )?;
            }
            Ok(if reports[&RelationType::Asr].holds {
                0
            } else {
                EXIT_VERIFICATION
            })
        }
        Command::Abstract {
            r#type,
            grid,
            dynamics,
            out,
        } => {
            let (dynamics, gb) = build_dynamics(&dynamics)?;
            let abs = build_abstraction(r#type.into(), &dynamics, &gb, &grid)?;
            write_abstraction(&abs, &out)?;
            println!(
                "abstraction: {} states, {} inputs, {} dropped pairs",
                abs.system.states.len(),
                abs.system.inputs.len(),
                abs.metadata.dropped_transitions
            );
            Ok(0)
        }
        Command::Synthesize {
            system,
            spec,
            safe,
            target,
            bound,
            out,
        } => {
            let s2 = load_simple(&system)?;
            let resolve = |labels: &[String]| -> simrel::Result<BTreeSet<usize>> {
                labels
                    .iter()
                    .map(|l| {
                        s2.state_index(l).ok_or_else(|| {
                            Error::InvalidArgument(format!("unknown state label `{l}`"))
                        })
                    })
                    .collect()
            };
            let outcome = match spec.as_str() {
                "safety" => {
                    let safe_set = if safe == ["all"] {
                        (0..s2.states.len()).collect()
                    } else {
                        resolve(&safe)?
                    };
                    synthesize_safety(&s2, &safe_set)?
                }
                "reach" => {
                    let bound = bound.ok_or_else(|| {
                        Error::InvalidArgument("reach synthesis needs --bound".into())
                    })?;
                    synthesize_reach(&s2, &resolve(&target)?, bound)?
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown spec kind `{other}`"
                    )))
                }
            };
            let c = match controller_or_exit3(outcome) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            write(&out, &io::to_pretty(&io::controller_to_json(&c, &s2)))?;
            println!("controller domain: {} states", c.domain.len());
            Ok(0)
        }
        Command::Concretize {
            r#type,
            s1,
            s2,
            rel,
            controller,
            out,
        } => {
            let t: RelationType = r#type.into();
            let s1 = load_simple(&s1)?;
            let s2 = load_simple(&s2)?;
            let r = io::parse_relation(&read(&rel)?, &s1.states, &s2.states)?;
            let sc = io::parse_controller(&read(&controller)?, &s2)?;
            let iface = canonical_interface(t, &s1, &s2, &r)?;
            let c2 = simrel::synthesis::controller_as_system(&sc, &s2);
            let cc = concretize(t, &iface, &c2, &s1, &s2)?;
            write(
                &out.join("interface.json"),
                &io::to_pretty(&io::interface_to_json(&iface)),
            )?;
            write(
                &out.join("concrete_controller.json"),
                &io::to_pretty(&io::general_to_json(&cc.system)),
            )?;
            println!(
                "concrete controller: {} states",
                cc.system.states.len()
            );
            Ok(0)
        }
        Command::Simulate {
            r#type,
            s1,
            s2,
            rel,
            controller,
            horizon,
            out,
        } => {
            let t: RelationType = r#type.into();
            let s1 = load_simple(&s1)?;
            let s2 = load_simple(&s2)?;
            let r = io::parse_relation(&read(&rel)?, &s1.states, &s2.states)?;
            let sc = io::parse_controller(&read(&controller)?, &s2)?;
            let iface = canonical_interface(t, &s1, &s2, &r)?;
            let c2 = simrel::synthesis::controller_as_system(&sc, &s2);
            let cc = concretize(t, &iface, &c2, &s1, &s2)?;
            let inits: BTreeSet<usize> = (0..s1.states.len()).collect();
            let traces = closed_loop_run(&cc, &s1, &inits, horizon)?;
            write(
                &out.join("trace.csv"),
                &io::finite_trace_csv(&traces, &s1, &iface),
            )?;
            let report = verify_reproducibility(&cc, &s1, &s2, &r, horizon)?;
            write(
                &out.join("verdict.json"),
                &io::to_pretty(&serde_json::to_value(&report).expect("report serializes")),
            )?;
            if report.holds {
                println!("reproducibility: PASS");
                Ok(0)
            } else {
                println!("reproducibility: FAIL");
                Ok(EXIT_VERIFICATION)
            }
        }
        Command::Pipeline {
            r#type,
            grid,
            dynamics,
            horizon,
            seed,
            out,
        } => {
            let t: RelationType = r#type.into();
            let (dynamics, gb) = build_dynamics(&dynamics)?;
            let abs = build_abstraction(t, &dynamics, &gb, &grid)?;
            write_abstraction(&abs, &out)?;
            let c2 = match controller_or_exit3(synthesize_all_safe(&abs.system)?) {
                Ok(c) => c,
                Err(code) => return Ok(code),
            };
            write(
                &out.join("controller.json"),
                &io::to_pretty(&io::controller_to_json(&c2, &abs.system)),
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inits: Vec<Point> = (0..5)
                .map(|_| {
                    dynamics
                        .bounds
                        .iter()
                        .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                        .collect()
                })
                .collect();
            let first = simrel::grid::continuous_closed_loop(
                &dynamics, &gb, &abs, &c2, &inits[0], horizon,
            )?;
            write(
                &out.join("trace.csv"),
                &io::continuous_trace_csv(&first, &abs),
            )?;
            let verdict =
                verify_grid_reproducibility(&dynamics, &gb, &abs, &c2, &inits, horizon)?;
            write(
                &out.join("verdict.json"),
                &io::to_pretty(&serde_json::to_value(&verdict).expect("verdict serializes")),
            )?;
            if verdict.ok && first.ok {
                println!("reproducibility: PASS");
                Ok(0)
            } else {
                println!(
                    "reproducibility: FAIL ({})",
                    verdict
                        .failure
                        .or(first.failure)
                        .unwrap_or_default()
                );
                Ok(EXIT_VERIFICATION)
            }
        }
        Command::Selftest { seed, instances } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..instances {
                let (s1, s2, r) = simrel::generators::random_instance(&mut rng);
                // classify panics if the hierarchy or the conditional
                // equivalences are violated.
                classify(&s1, &s2, &r)?;
            }
            println!("hierarchy: {instances} random instances consistent");
            let per_type = (instances / 10).max(1);
            for t in RelationType::ALL {
                for _ in 0..per_type {
                    let (s1, s2, r) = passing_instance(&mut rng, t);
                    let iface = canonical_interface(t, &s1, &s2, &r)?;
                    let report =
                        simrel::interface::interface_frr_equivalence(&iface, &s1, &s2)?;
                    if !report.holds {
                        println!("interface validity: FAIL for {t}");
                        return Ok(EXIT_VERIFICATION);
                    }
                }
                println!("interface validity: {per_type} passing instances ok for {t}");
            }
            Ok(0)
        }
    }
}
