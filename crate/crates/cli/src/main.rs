use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use teleres::fef::{self, FefConfig, FefMethod};
use teleres::gamma::{self, SearchConfig};
use teleres::io::{self, Certificate, Diagnostics, LoadedState, Report};
use teleres::linalg::ComplexMatrix;
use teleres::random;
use teleres::state::{self, bell_tensor, DensityMatrix, SubsystemLayout};
use teleres::witness;
use teleres::{Error, Jobs, Result, Verdict};

#[derive(Parser)]
#[command(name = "teleres", version, about = "Detect ideal and useful teleportation resources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write example states and unitaries.
    #[command(subcommand)]
    Gen(Gen),
    /// Test whether a pure 2n-qubit state is an ideal n-qubit resource.
    DetectIdeal(SearchArgs),
    /// Certify entanglement of a 2n-qubit state with the Γ bound.
    Separability(SearchArgs),
    /// Fully entangled fraction, optimal fidelity and usefulness.
    Fef(FefArgs),
    /// Teleportation witnesses.
    #[command(subcommand)]
    Witness(WitnessCmd),
}

#[derive(Subcommand)]
enum Gen {
    /// n Bell pairs shared across the A|B cut.
    Bell {
        #[arg(long)]
        n: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Random states.
    Random(RandomArgs),
    /// A Haar-random d×d unitary.
    Unitary {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomKind {
    Pure,
    Density,
    Product,
    Werner,
}

#[derive(Args)]
struct RandomArgs {
    kind: RandomKind,
    /// Qubits per side.
    #[arg(long, conflicts_with = "d")]
    n: Option<usize>,
    /// Local dimension of each side.
    #[arg(long)]
    d: Option<usize>,
    /// Werner weight on |ψ⁺⟩.
    #[arg(long)]
    p: Option<f64>,
    /// Rank of a random density matrix (default full).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, env = "TELERES_RESTARTS", default_value_t = 32)]
    restarts: usize,
    /// Ideal when the best ⟨Γ⟩ is at least 1 - tol.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    margin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 400)]
    max_iters: usize,
    /// Worker threads for restarts (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            ideal_tol: self.tol,
            margin: self.margin,
            jobs: Jobs::from_count(self.jobs),
        }
    }
}

#[derive(Args)]
struct FefOpts {
    #[arg(long, env = "TELERES_RESTARTS", default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-7)]
    margin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Use the manifold optimizer even for pure input.
    #[arg(long)]
    optimize: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

impl FefOpts {
    fn config(&self) -> FefConfig {
        FefConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            margin: self.margin,
            force_optimizer: self.optimize,
            jobs: Jobs::from_count(self.jobs),
        }
    }
}

#[derive(Args)]
struct FefArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    opts: FefOpts,
}

#[derive(Subcommand)]
enum WitnessCmd {
    /// Tr(W(U)ρ) for a given U (identity by default).
    Eval {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-7)]
        margin: f64,
    },
    /// Check the d² annihilated product vectors of W(U).
    Optimality {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        u: Option<PathBuf>,
    },
    /// Minimize Tr(W(U)ρ) over U.
    Detect(FefArgs),
}

struct Input {
    state: DensityMatrix,
    digest: String,
}

fn load(path: &Path) -> Result<Input> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Parse { line: 0, message: "state file is not UTF-8".into() })?;
    Ok(Input {
        state: io::parse_state_str(&text)?.density(),
        digest: io::digest(&bytes),
    })
}

fn load_unitary(path: Option<&Path>, d: usize) -> Result<ComplexMatrix> {
    let Some(path) = path else {
        return Ok(ComplexMatrix::identity(d, d));
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let u = io::parse_unitary_str(&text)?;
    if u.nrows() != d {
        return Err(Error::Usage(format!("unitary is {}x{}, expected {d}x{d}", u.nrows(), u.ncols())));
    }
    Ok(u)
}

struct Outcome {
    report: Report,
    summary: String,
}

fn outcome(
    digest: Option<String>,
    verdict: Option<Verdict>,
    certificate: Option<Certificate>,
    diagnostics: Diagnostics,
    seed: u64,
    summary: String,
) -> Outcome {
    Outcome {
        report: Report {
            command: std::env::args().collect(),
            input_digest: digest,
            verdict,
            certificate,
            diagnostics,
            seed,
            wall_time_ms: 0.0,
        },
        summary,
    }
}

fn extra(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn gen(cmd: Gen) -> Result<String> {
    match cmd {
        Gen::Bell { n, output } => {
            io::write_state(&output, &LoadedState::Pure(bell_tensor(n)?))?;
            Ok(format!("wrote {n} Bell pair(s) to {}", output.display()))
        }
        Gen::Unitary { d, seed, output } => {
            io::write_unitary(&output, &random::random_unitary(d, seed)?)?;
            Ok(format!("wrote Haar unitary d={d} seed={seed} to {}", output.display()))
        }
        Gen::Random(args) => {
            let state = random_state(&args)?;
            io::write_state(&args.output, &state)?;
            Ok(format!("wrote random state to {}", args.output.display()))
        }
    }
}

fn random_state(args: &RandomArgs) -> Result<LoadedState> {
    let layout = match (args.n, args.d) {
        (Some(n), None) => SubsystemLayout::multiqubit(n)?,
        (None, Some(d)) => SubsystemLayout::bipartite(d)?,
        (None, None) => SubsystemLayout::multiqubit(1)?,
        (Some(_), Some(_)) => return Err(Error::Usage("give either --n or --d".into())),
    };
    if args.p.is_some() && !matches!(args.kind, RandomKind::Werner) {
        return Err(Error::Usage("--p only applies to werner".into()));
    }
    if args.rank.is_some() && !matches!(args.kind, RandomKind::Density) {
        return Err(Error::Usage("--rank only applies to density".into()));
    }
    Ok(match args.kind {
        RandomKind::Pure => LoadedState::Pure(random::random_haar_pure(&layout, args.seed)),
        RandomKind::Product => LoadedState::Pure(random::random_product_pure(&layout, args.seed)),
        RandomKind::Density => {
            let rank = args.rank.unwrap_or(layout.total_dim());
            LoadedState::Density(random::random_density(&layout, rank, args.seed)?)
        }
        RandomKind::Werner => {
            let p = args.p.ok_or_else(|| Error::Usage("werner needs --p".into()))?;
            let (d, _) = layout.side_dims();
            let rho = state::werner(p, d)?;
            LoadedState::Density(DensityMatrix::new(rho.matrix().clone(), layout)?)
        }
    })
}

fn detect_ideal(args: &SearchArgs) -> Result<Outcome> {
    let input = load(&args.state)?;
    let det = gamma::detect_ideal_resource(&input.state, &args.config())?;
    let s = &det.search;
    let certificate = det
        .certificate
        .as_ref()
        .map(|t| Certificate::from_triples(t, s.best_value));
    let diagnostics = Diagnostics {
        best_value: Some(s.best_value),
        restarts: Some(s.restarts_used),
        converged: Some(s.converged),
        extra: extra(&[
            ("best_restart", json!(s.best_restart)),
            ("ideal_tol", json!(args.tol)),
        ]),
    };
    let summary = format!("{}: max <Gamma> = {:.12} over {} restarts", det.verdict, s.best_value, s.restarts_used);
    Ok(outcome(Some(input.digest), Some(det.verdict), certificate, diagnostics, args.seed, summary))
}

fn separability(args: &SearchArgs) -> Result<Outcome> {
    let input = load(&args.state)?;
    let out = gamma::separability_test(&input.state, &args.config())?;
    let s = &out.search;
    let certificate = (out.verdict == Verdict::Entangled)
        .then(|| Certificate::from_triples(&s.best_triples, s.best_value));
    let diagnostics = Diagnostics {
        best_value: Some(out.max_value),
        restarts: Some(s.restarts_used),
        converged: Some(s.converged),
        extra: extra(&[
            ("bound", json!(out.bound)),
            ("margin", json!(args.margin)),
            ("best_restart", json!(s.best_restart)),
        ]),
    };
    let summary = format!("{}: max <Gamma> = {:.12}, separable bound {}", out.verdict, out.max_value, out.bound);
    Ok(outcome(Some(input.digest), Some(out.verdict), certificate, diagnostics, args.seed, summary))
}

fn method_name(m: FefMethod) -> &'static str {
    match m {
        FefMethod::ClosedFormPure => "closed_form_pure",
        FefMethod::ManifoldAscent => "manifold_ascent",
    }
}

fn fef_cmd(args: &FefArgs) -> Result<Outcome> {
    let input = load(&args.state)?;
    let v = fef::is_useful(&input.state, args.d, &args.opts.config())?;
    let certificate = Certificate::Unitary {
        unitary: io::matrix_to_rows(&v.fef.optimizer_unitary),
        value: v.fef.value,
    };
    let diagnostics = Diagnostics {
        best_value: Some(v.fef.value),
        restarts: Some(v.fef.restarts_used),
        converged: Some(v.fef.converged),
        extra: extra(&[
            ("fidelity", json!(v.fidelity)),
            ("threshold", json!(1.0 / args.d as f64)),
            ("classical_fidelity", json!(2.0 / (args.d as f64 + 1.0))),
            ("method", json!(method_name(v.fef.method))),
        ]),
    };
    let summary = format!("{}: F = {:.12}, fidelity = {:.12}", v.useful, v.fef.value, v.fidelity);
    Ok(outcome(Some(input.digest), Some(v.useful), Some(certificate), diagnostics, args.opts.seed, summary))
}

fn witness_cmd(cmd: &WitnessCmd) -> Result<Outcome> {
    match cmd {
        WitnessCmd::Eval { state, d, u, margin } => {
            let input = load(state)?;
            let u = load_unitary(u.as_deref(), *d)?;
            let w = witness::witness_rotated(&u)?;
            let value = witness::evaluate(&w, &input.state)?;
            let verdict = if value < -margin { Verdict::Useful } else { Verdict::Inconclusive };
            let certificate = Certificate::Witness {
                unitary: io::matrix_to_rows(&u),
                value,
            };
            let diagnostics = Diagnostics {
                best_value: Some(value),
                ..Default::default()
            };
            let summary = format!("{verdict}: Tr(W rho) = {value:.12}");
            Ok(outcome(Some(input.digest), Some(verdict), Some(certificate), diagnostics, 0, summary))
        }
        WitnessCmd::Optimality { d, u } => {
            let unitary = load_unitary(u.as_deref(), *d)?;
            let digest = match u {
                Some(path) => Some(io::digest(&std::fs::read(path)?)),
                None => None,
            };
            let cert = witness::check_optimality(&witness::witness_rotated(&unitary)?)?;
            let max_residual = cert.annihilation_residuals.iter().cloned().fold(0.0, f64::max);
            let mut fields = vec![
                ("optimal", json!(cert.optimal)),
                ("gram_rank", json!(cert.gram_rank)),
                ("vectors", json!(cert.vectors.len())),
                ("max_annihilation_residual", json!(max_residual)),
            ];
            if let Some(note) = &cert.note {
                fields.push(("note", json!(note)));
            }
            let diagnostics = Diagnostics {
                extra: extra(&fields),
                ..Default::default()
            };
            let summary = format!(
                "optimal = {}, gram rank {} of {}, max residual {max_residual:.1e}",
                cert.optimal,
                cert.gram_rank,
                d * d
            );
            Ok(outcome(digest, None, None, diagnostics, 0, summary))
        }
        WitnessCmd::Detect(args) => {
            let input = load(&args.state)?;
            let det = witness::detect_useful_via_witness(&input.state, args.d, &args.opts.config())?;
            let certificate = Certificate::Witness {
                unitary: io::matrix_to_rows(&det.unitary),
                value: det.minimum,
            };
            let diagnostics = Diagnostics {
                best_value: Some(det.minimum),
                restarts: Some(det.fef.restarts_used),
                converged: Some(det.fef.converged),
                extra: extra(&[
                    ("fef", json!(det.fef.value)),
                    ("method", json!(method_name(det.fef.method))),
                ]),
            };
            let summary = format!("{}: min Tr(W(U) rho) = {:.12}", det.verdict, det.minimum);
            Ok(outcome(Some(input.digest), Some(det.verdict), Some(certificate), diagnostics, args.opts.seed, summary))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    let out = match cli.command {
        Command::Gen(g) => {
            eprintln!("{}", gen(g)?);
            return Ok(());
        }
        Command::DetectIdeal(a) => detect_ideal(&a)?,
        Command::Separability(a) => separability(&a)?,
        Command::Fef(a) => fef_cmd(&a)?,
        Command::Witness(w) => witness_cmd(&w)?,
    };
    let mut report = out.report;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    // A closed stdout (e.g. piped into `head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{}", report.to_json());
    eprintln!("{}", out.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(if e.kind() == "usage" { 2 } else { 1 })
        }
    }
}
