//! Command-line front end. Each subcommand produces one primary artifact on
//! stdout, or writes all of its artifacts plus `manifest.json` into `--out`.
//!
//! Exit codes: 0 success, 1 bad input, 2 numerical failure (a failing
//! `verify` run also exits 2).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cell::{
    parse_cell, parse_cell_unchecked, validate_cell, ElementaryCell, ValidationReport,
};
use crate::dtn::{CellSolver, DirichletData, SAMPLES_PER_EDGE};
use crate::edge_ode::{edge_fundamental_system, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::fractal::{
    compare_oracle, FractalOpts, LeafClosure, SelfReproducing, TruncatedFractal, DEFAULT_BUDGET,
};
use crate::gamma::{gamma_example, DEFAULT_KAPPAS};
use crate::scaling::{
    classify_regime, RegimeClass, ScalingFactors, ScalingOpts, ScalingProblem, ScalingReport,
};
use crate::verify::{run_invariant_suite, Fault, VerificationConfig};

pub const MANIFEST_SCHEMA: &str = "capnet.manifest/1";

#[derive(Debug, Parser)]
#[command(
    name = "capnet",
    version,
    about = "Steady flow on self-similar capillary networks"
)]
pub struct Cli {
    /// Integration tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write artifacts and manifest.json into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the random cell generator.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a cell configuration and report every admissibility violation.
    Validate { cell: PathBuf },
    /// Print the flux map of a cell as a CSV block.
    Dtn {
        cell: PathBuf,
        /// Dump the fundamental basis of this edge instead.
        #[arg(long)]
        basis: Option<String>,
    },
    /// Solve the Dirichlet problem and print sampled pressures.
    Solve {
        cell: PathBuf,
        /// Pressure at the input.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        x0: f64,
        /// Pressures at the outputs, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        x: Vec<f64>,
        /// Samples per edge.
        #[arg(long, default_value_t = SAMPLES_PER_EDGE)]
        points: usize,
        /// Print the flux JSON instead of the CSV.
        #[arg(long)]
        fluxes: bool,
    },
    /// Find all scaling roots for the given factors.
    Scale {
        cell: PathBuf,
        #[command(flatten)]
        factors: FactorArgs,
        /// Also search for extra roots where one is expected.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Solve a truncated fractal and compare it with the self-reproducing solution.
    Fractal {
        cell: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        l: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<f64>,
        /// Pressure scales; default is the positive-energy scaling root.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<f64>>,
        /// Generations of cells below the root.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = ClosureKind::Robin)]
        closure: ClosureKind,
        /// Pressure at the root input.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        x0: f64,
        /// Refuse fractals with more vertices than this.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Print the pressure CSV instead of the JSON summary.
        #[arg(long)]
        csv: bool,
    },
    /// Run the invariant suite on fixtures and seeded random cells.
    Verify {
        /// Random cells drawn per coefficient regime.
        #[arg(long, default_value_t = 20)]
        cells_per_regime: usize,
        /// Negate the input flux row to check that the suite notices.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Scaling curve and roots of the single edge with B = −γ².
    ExampleGamma {
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3)]
        gamma: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, value_delimiter = ',')]
        kappa: Option<Vec<f64>>,
        /// Print the curve CSV instead of the JSON summary.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct FactorArgs {
    /// Length scales, one per output.
    #[arg(long, value_delimiter = ',', requires = "k", conflicts_with = "kappa")]
    pub l: Option<Vec<f64>>,
    /// Conductance scales, one per output.
    #[arg(long, value_delimiter = ',', requires = "l")]
    pub k: Option<Vec<f64>>,
    /// Flux scales `k_j / l_j` given directly.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    pub kappa: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosureKind {
    Dirichlet,
    Robin,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub schema: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: Vec<String>,
    /// SHA-256 over the canonical command and the bytes of every input file.
    pub config_digest: String,
    pub elapsed_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

struct Artifact {
    name: &'static str,
    schema: &'static str,
    content: String,
}

struct Outcome {
    /// Index into `artifacts` of what goes to stdout.
    primary: usize,
    artifacts: Vec<Artifact>,
    exit: i32,
}

fn single(name: &'static str, schema: &'static str, content: String) -> Outcome {
    Outcome {
        primary: 0,
        artifacts: vec![Artifact {
            name,
            schema,
            content,
        }],
        exit: 0,
    }
}

fn json<T: Serialize>(schema: &'static str, body: &T) -> String {
    #[derive(Serialize)]
    struct Tagged<'a, T> {
        schema: &'static str,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Tagged { schema, body }).expect("serializable");
    s.push('\n');
    s
}

fn read_cell_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn load_cell(path: &Path) -> Result<ElementaryCell> {
    parse_cell(&read_cell_text(path)?)
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return 1;
        }
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let started = Instant::now();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let (command, digest) = match canonical_digest(&cli) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let mut manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        config_digest: digest,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        outputs: Vec::new(),
    };
    match &cli.out {
        Some(dir) => {
            if let Err(e) = write_outputs(dir, &outcome, &mut manifest) {
                eprintln!("error: {e}");
                return 1;
            }
        }
        None => {
            print!("{}", outcome.artifacts[outcome.primary].content);
            let a = &outcome.artifacts[outcome.primary];
            manifest.outputs.push(OutputFile {
                name: "<stdout>".into(),
                schema: a.schema.into(),
            });
            eprintln!(
                "{}",
                serde_json::to_string(&manifest).expect("serializable")
            );
        }
    }
    outcome.exit
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

fn write_atomic(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, dir.join(name))
}

fn write_outputs(dir: &Path, outcome: &Outcome, manifest: &mut RunManifest) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in &outcome.artifacts {
        write_atomic(dir, a.name, &a.content)?;
        manifest.outputs.push(OutputFile {
            name: a.name.into(),
            schema: a.schema.into(),
        });
    }
    let mut text = serde_json::to_string_pretty(manifest).expect("serializable");
    text.push('\n');
    write_atomic(dir, "manifest.json", &text)
}

/// The command without the flags that do not change results, and its digest.
fn canonical_digest(cli: &Cli) -> Result<(Vec<String>, String)> {
    let mut words = vec![format!("tol={:e}", cli.tol), format!("seed={}", cli.seed)];
    let mut inputs: Vec<&Path> = Vec::new();
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:e}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    match &cli.command {
        Command::Validate { cell } => {
            words.push("validate".into());
            inputs.push(cell);
        }
        Command::Dtn { cell, basis } => {
            words.push("dtn".into());
            if let Some(b) = basis {
                words.push(format!("basis={b}"));
            }
            inputs.push(cell);
        }
        Command::Solve {
            cell,
            x0,
            x,
            points,
            fluxes,
        } => {
            words.push("solve".into());
            words.push(format!("x0={x0:e}"));
            words.push(format!("x={}", list(x)));
            words.push(format!("points={points}"));
            words.push(format!("fluxes={fluxes}"));
            inputs.push(cell);
        }
        Command::Scale {
            cell,
            factors,
            exhaustive,
        } => {
            words.push("scale".into());
            for (name, v) in [
                ("l", &factors.l),
                ("k", &factors.k),
                ("kappa", &factors.kappa),
            ] {
                if let Some(v) = v {
                    words.push(format!("{name}={}", list(v)));
                }
            }
            words.push(format!("exhaustive={exhaustive}"));
            inputs.push(cell);
        }
        Command::Fractal {
            cell,
            l,
            k,
            m,
            depth,
            closure,
            x0,
            budget,
            csv,
        } => {
            words.push("fractal".into());
            words.push(format!("l={}", list(l)));
            words.push(format!("k={}", list(k)));
            if let Some(m) = m {
                words.push(format!("m={}", list(m)));
            }
            words.push(format!("depth={depth}"));
            words.push(format!("closure={closure:?}"));
            words.push(format!("x0={x0:e}"));
            words.push(format!("budget={budget}"));
            words.push(format!("csv={csv}"));
            inputs.push(cell);
        }
        Command::Verify {
            cells_per_regime,
            inject_fault,
        } => {
            words.push("verify".into());
            words.push(format!("cells_per_regime={cells_per_regime}"));
            words.push(format!("inject_fault={inject_fault}"));
        }
        Command::ExampleGamma {
            gamma,
            points,
            kappa,
            csv,
        } => {
            words.push("example-gamma".into());
            words.push(format!("gamma={gamma:e}"));
            words.push(format!("points={points}"));
            if let Some(k) = kappa {
                words.push(format!("kappa={}", list(k)));
            }
            words.push(format!("csv={csv}"));
        }
    }
    let mut h = Sha256::new();
    for w in &words {
        h.update(w.as_bytes());
        h.update([0u8]);
    }
    for p in inputs {
        h.update(read_cell_text(p)?.as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((words, digest))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.tol;
    match &cli.command {
        Command::Validate { cell } => cmd_validate(cell),
        Command::Dtn { cell, basis } => {
            let cell = load_cell(cell)?;
            match basis {
                Some(id) => {
                    let e = cell
                        .edge_index(id)
                        .ok_or_else(|| Error::InvalidInput(format!("unknown edge '{id}'")))?;
                    let basis = edge_fundamental_system(&cell.edges()[e], tol)?;
                    Ok(single("basis.csv", "capnet.basis/1", basis.to_csv()))
                }
                None => {
                    let dtn = CellSolver::new(&cell, tol)?.flux_map()?;
                    Ok(single("dtn.csv", "capnet.dtn/1", dtn.to_csv()))
                }
            }
        }
        Command::Solve {
            cell,
            x0,
            x,
            points,
            fluxes,
        } => cmd_solve(&load_cell(cell)?, *x0, x, *points, *fluxes, tol),
        Command::Scale {
            cell,
            factors,
            exhaustive,
        } => cmd_scale(&load_cell(cell)?, factors, *exhaustive, tol),
        Command::Fractal {
            cell,
            l,
            k,
            m,
            depth,
            closure,
            x0,
            budget,
            csv,
        } => {
            let factors = ScalingFactors::new(l.clone(), k.clone())?;
            let opts = FractalOpts {
                tol,
                budget: *budget,
            };
            cmd_fractal(
                &load_cell(cell)?,
                &factors,
                m.as_deref(),
                *depth,
                *closure,
                *x0,
                opts,
                *csv,
            )
        }
        Command::Verify {
            cells_per_regime,
            inject_fault,
        } => {
            let config = VerificationConfig {
                seed: cli.seed,
                cells_per_regime: *cells_per_regime,
                fault: inject_fault.then_some(Fault::FlipInputFluxSign),
                ..VerificationConfig::default()
            };
            let report = run_invariant_suite(&config);
            let mut o = single("verify.json", "capnet.verify/1", report.to_json() + "\n");
            o.exit = if report.all_passed { 0 } else { 2 };
            Ok(o)
        }
        Command::ExampleGamma {
            gamma,
            points,
            kappa,
            csv,
        } => {
            let kappas = kappa.clone().unwrap_or_else(|| DEFAULT_KAPPAS.to_vec());
            let ex = gamma_example(*gamma, *points, &kappas, tol)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                gamma: f64,
                f_min: f64,
                m_at_min: f64,
                root_pairs: &'a [crate::gamma::RootPair],
            }
            let summary = json(
                "capnet.gamma/1",
                &Summary {
                    gamma: ex.gamma,
                    f_min: ex.f_min,
                    m_at_min: ex.m_at_min,
                    root_pairs: &ex.root_pairs,
                },
            );
            Ok(Outcome {
                primary: usize::from(*csv),
                artifacts: vec![
                    Artifact {
                        name: "gamma.json",
                        schema: "capnet.gamma/1",
                        content: summary,
                    },
                    Artifact {
                        name: "gamma_curve.csv",
                        schema: "capnet.gamma_curve/1",
                        content: ex.curve_csv(),
                    },
                ],
                exit: 0,
            })
        }
    }
}

fn cmd_validate(path: &Path) -> Result<Outcome> {
    let cell = parse_cell_unchecked(&read_cell_text(path)?)?;
    let report: ValidationReport = validate_cell(&cell);
    #[derive(Serialize)]
    struct Body<'a> {
        #[serde(flatten)]
        report: &'a ValidationReport,
        regime: Option<RegimeClass>,
    }
    let regime = report.ok.then(|| classify_regime(&cell));
    let mut o = single(
        "validate.json",
        "capnet.validate/1",
        json(
            "capnet.validate/1",
            &Body {
                report: &report,
                regime,
            },
        ),
    );
    if !report.ok {
        for m in report.error_messages() {
            eprintln!("invalid: {m}");
        }
        o.exit = 1;
    }
    Ok(o)
}

fn cmd_solve(
    cell: &ElementaryCell,
    x0: f64,
    x: &[f64],
    points: usize,
    fluxes: bool,
    tol: f64,
) -> Result<Outcome> {
    if points < 2 {
        return Err(Error::InvalidInput("--points must be at least 2".into()));
    }
    let solver = CellSolver::new(cell, tol)?;
    let sol = solver.solve_dirichlet(&DirichletData::new(x0, x.to_vec())?)?;
    let mut csv = String::from("edge_id,xi,w\n");
    for s in solver.sample(&sol, points)? {
        csv.push_str(&format!("{},{:.16e},{:.16e}\n", s.edge_id, s.xi, s.w));
    }
    #[derive(Serialize)]
    struct Vertex<'a> {
        id: &'a str,
        w: f64,
    }
    #[derive(Serialize)]
    struct Body<'a> {
        x0: f64,
        x: &'a [f64],
        fluxes: &'a [f64],
        vertices: Vec<Vertex<'a>>,
        kirchhoff_residual: f64,
        condition: f64,
    }
    let body = Body {
        x0,
        x,
        fluxes: &sol.fluxes,
        vertices: sol
            .vertex_ids
            .iter()
            .zip(&sol.vertex_values)
            .map(|(id, w)| Vertex { id, w: *w })
            .collect(),
        kirchhoff_residual: sol.kirchhoff_residual,
        condition: sol.condition,
    };
    Ok(Outcome {
        primary: usize::from(fluxes),
        artifacts: vec![
            Artifact {
                name: "solution.csv",
                schema: "capnet.solution/1",
                content: csv,
            },
            Artifact {
                name: "fluxes.json",
                schema: "capnet.fluxes/1",
                content: json("capnet.fluxes/1", &body),
            },
        ],
        exit: 0,
    })
}

fn cmd_scale(
    cell: &ElementaryCell,
    args: &FactorArgs,
    exhaustive: bool,
    tol: f64,
) -> Result<Outcome> {
    let kappa = match (&args.l, &args.k, &args.kappa) {
        (Some(l), Some(k), None) => ScalingFactors::new(l.clone(), k.clone())?.kappa,
        (None, None, Some(kappa)) => kappa.clone(),
        _ => {
            return Err(Error::InvalidInput(
                "give either --l and --k, or --kappa".into(),
            ))
        }
    };
    let problem = ScalingProblem::new(cell, tol)?;
    let report = problem.solve(
        &kappa,
        &ScalingOpts {
            exhaustive,
            ..ScalingOpts::default()
        },
    )?;
    #[derive(Serialize)]
    struct Body<'a> {
        kappa: &'a [f64],
        #[serde(flatten)]
        report: &'a ScalingReport,
    }
    Ok(single(
        "scale.json",
        "capnet.scale/1",
        json(
            "capnet.scale/1",
            &Body {
                kappa: &kappa,
                report: &report,
            },
        ),
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_fractal(
    cell: &ElementaryCell,
    factors: &ScalingFactors,
    m: Option<&[f64]>,
    depth: usize,
    closure: ClosureKind,
    x0: f64,
    opts: FractalOpts,
    csv: bool,
) -> Result<Outcome> {
    let m = match m {
        Some(m) => m.to_vec(),
        None => {
            let report = ScalingProblem::new(cell, opts.tol)?
                .solve(&factors.kappa, &ScalingOpts::default())?;
            let mut plus = report.roots.iter().filter(|r| r.in_omega_hat_plus);
            match (plus.next(), plus.next()) {
                (Some(r), None) => r.m.clone(),
                _ => {
                    return Err(Error::InvalidInput(
                        "no unique positive-energy scaling root for these factors; pass --m".into(),
                    ))
                }
            }
        }
    };
    let oracle = SelfReproducing::new(cell, &m, &factors.l, opts.tol)?;
    let leaf = match closure {
        ClosureKind::Dirichlet => LeafClosure::DirichletSelfSimilar { m: m.clone() },
        ClosureKind::Robin => LeafClosure::Robin {
            beta: oracle.beta(),
        },
    };
    let fractal = TruncatedFractal::assemble(cell, factors, leaf, depth, &opts)?;
    let sol = fractal.solve(x0)?;
    let report = compare_oracle(&sol, &oracle)?;
    #[derive(Serialize)]
    struct Body<'a> {
        depth: usize,
        closure: ClosureKind,
        m: &'a [f64],
        #[serde(flatten)]
        report: &'a crate::fractal::OracleReport,
    }
    let summary = json(
        "capnet.fractal/1",
        &Body {
            depth,
            closure,
            m: &m,
            report: &report,
        },
    );
    Ok(Outcome {
        primary: usize::from(csv),
        artifacts: vec![
            Artifact {
                name: "fractal.json",
                schema: "capnet.fractal/1",
                content: summary,
            },
            Artifact {
                name: "pressures.csv",
                schema: "capnet.pressures/1",
                content: sol.to_csv(),
            },
        ],
        exit: 0,
    })
}

impl Serialize for ClosureKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            ClosureKind::Dirichlet => "dirichlet",
            ClosureKind::Robin => "robin",
        })
    }
}
