//! Command-line interface. `run` maps `argv` to an exit code; every report
//! embeds the command line's effective configuration so it can be replayed.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{self, is_irreducible, period_and_decomposition};
use crate::error::{Error, Result};
use crate::exact::certify::{random_exact_state, random_point};
use crate::exact::Certifier;
use crate::experiments::{run_example, ExampleName, ExampleOptions};
use crate::gap::GapSampler;
use crate::invariant::{solve_density_fixed_point, BlochGrid, DEFAULT_MAX_SWEEPS, DEFAULT_TOL};
use crate::io::{self, fmt17, to_json, LoadedChannel, RandomizationJson};
use crate::measure::EmpiricalMeasure;
use crate::rng::stream;
use crate::trajectory::{cesaro_subsample, run_chain_with, ChainConfig};
use crate::wasserstein::{self, invariance_test, split_null_band, wasserstein1_subsampled, Comparison};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "QTRAJ_THREADS";
/// Seed of the bundled example corpus when `--seed` is not given.
pub const EXAMPLES_DEFAULT_SEED: u64 = 20240601;

/// Exit code of a command that ran but whose verdict failed.
pub const EXIT_VERDICT_FAILED: i32 = 1;
/// Exit code for module errors (with error JSON on stderr).
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qtraj",
    version,
    about = "Randomized quantum trajectories, invariant measures and ergodicity certificates"
)]
pub struct Cli {
    /// Output encoding. Data commands default to CSV, reports to JSON.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Irreducibility, period, primitivity and invariant state of a channel.
    Analyze(AnalyzeArgs),
    /// Exact Jacobian-rank certificate of multiplicative primitivity.
    CertifyMprim(CertifyArgs),
    /// Run one trajectory.
    Simulate(SimulateArgs),
    /// Cesàro-averaged empirical invariant measure from several chains.
    EstimateInvariant(EstimateArgs),
    /// Samples of the GAP measure of a density matrix.
    GapSample(GapSampleArgs),
    /// Density of the GAP measure at a state.
    GapDensity(GapDensityArgs),
    /// Wasserstein-1 distance between two measure files, with a same-law band.
    Compare(CompareArgs),
    /// Invariant density of a qubit channel on a Bloch grid.
    SolveDensity(SolveDensityArgs),
    /// Run a bundled experiment and emit its verdict.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    pub channel: PathBuf,
    /// Also run the randomized positivity-improving diagnostic with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    pub channel: PathBuf,
    /// Product length.
    #[arg(long)]
    pub p: usize,
    /// Evaluation point, comma-separated Gaussian rationals (one per variable).
    #[arg(long)]
    pub point: Option<String>,
    /// Certify for this state only (comma-separated Gaussian rationals).
    #[arg(long)]
    pub state: Option<String>,
    /// Certify this many random states.
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Random points tried per certificate.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// First column of the minor used with `--state --point`.
    #[arg(long, default_value_t = 0)]
    pub minor_start: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainArgs {
    pub channel: PathBuf,
    /// Initial state, comma-separated complex entries such as `1, 0.5-2i`.
    #[arg(long)]
    pub x0: String,
    /// Number of transitions.
    #[arg(short = 'n', long = "steps")]
    pub steps: usize,
    #[arg(long, default_value_t = crate::trajectory::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = crate::trajectory::DEFAULT_THINNING)]
    pub thin: usize,
    #[arg(long)]
    pub seed: u64,
    /// Override the file's randomization: `haar`, `identity` or inline JSON.
    #[arg(long)]
    pub randomization: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// Independent chains (chain `c` uses stream `c` of the seed).
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Cesàro period; defaults to the channel's period (1 if reducible).
    #[arg(long)]
    pub period: Option<usize>,
    /// Also test invariance against a split-halves band.
    #[arg(long)]
    pub test_invariance: bool,
    #[arg(long, default_value_t = wasserstein::DEFAULT_SUBSAMPLE)]
    pub subsample: usize,
    #[arg(long, default_value_t = wasserstein::NULL_REPLICAS)]
    pub replicas: usize,
    /// Measure CSV destination (the JSON summary goes to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GapSampleArgs {
    pub density: PathBuf,
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GapDensityArgs {
    pub density: PathBuf,
    #[arg(long)]
    pub state: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = wasserstein::DEFAULT_SUBSAMPLE)]
    pub subsample: usize,
    #[arg(long, default_value_t = wasserstein::NULL_REPLICAS)]
    pub replicas: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveDensityArgs {
    pub channel: PathBuf,
    /// Grid as `THETAxPHI`.
    #[arg(long, default_value = "200x100")]
    pub grid: String,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
    pub iters: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExamplesArgs {
    /// One of counterexample-6.1, projection-channel, depolarizing,
    /// dim2-density, example1-3d, example2-3d.
    pub name: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    /// Whether a verdict-bearing command passed.
    pub passed: Option<bool>,
}

impl Output {
    fn text(stdout: String) -> Self {
        Self { stdout, passed: None }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> String {
    serde_json::to_string(&ErrorReport { error: ErrorBody { kind: e.kind(), message: e.to_string() } })
        .expect("error report serializes")
}

/// Parses and executes `argv`, printing to stdout/stderr; returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            match out.passed {
                Some(false) => EXIT_VERDICT_FAILED,
                _ => 0,
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            EXIT_ERROR
        }
    }
}

/// Executes a parsed command line without touching stdout.
pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, cli.format.unwrap_or(Format::Json)),
        Command::CertifyMprim(a) => certify(a, cli.format.unwrap_or(Format::Json)),
        Command::Simulate(a) => simulate(a, cli.format.unwrap_or(Format::Csv)),
        Command::EstimateInvariant(a) => estimate(a, cli.format.unwrap_or(Format::Csv)),
        Command::GapSample(a) => gap_sample(a, cli.format.unwrap_or(Format::Csv)),
        Command::GapDensity(a) => gap_density(a, cli.format.unwrap_or(Format::Json)),
        Command::Compare(a) => compare(a, cli.format.unwrap_or(Format::Json)),
        Command::SolveDensity(a) => solve_density(a, cli.format.unwrap_or(Format::Csv)),
        Command::Examples(a) => examples(a, cli.format.unwrap_or(Format::Json)),
    }
}

fn json_only(format: Format, command: &str) -> Result<()> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::Parse(format!("{command} emits a JSON report only; use --format json"))),
    }
}

/// `{"command", "args", "format", ...}` plus the loaded channel, if any.
fn config<A: Serialize>(command: &str, args: &A, format: Format, channel: Option<&LoadedChannel>) -> Result<Value> {
    let mut v = json!({ "command": command, "args": serde_json::to_value(args)?, "format": format });
    if let Some(ch) = channel {
        v["channel"] = serde_json::to_value(&ch.file)?;
    }
    Ok(v)
}

fn load_with_override(path: &Path, randomization: Option<&str>) -> Result<LoadedChannel> {
    let mut file = io::read_channel_file(path)?;
    if let Some(r) = randomization {
        file.randomization = Some(RandomizationJson::parse_override(r)?);
    }
    file.load()
}

fn emit(path: Option<&Path>, text: &str) -> Result<Option<String>> {
    match path {
        Some(p) => {
            io::write_text(p, text)?;
            Ok(Some(p.display().to_string()))
        }
        None => Ok(None),
    }
}

fn analyze(a: &AnalyzeArgs, format: Format) -> Result<Output> {
    json_only(format, "analyze")?;
    let ch = io::load_channel(&a.channel)?;
    let report = analysis::analyze(&ch.channel);
    let mut doc = json!({ "config": config("analyze", a, format, Some(&ch))?, "report": report });
    doc["purification"] = json!(analysis::purification_check(
        &ch.channel,
        &ch.randomization,
        analysis::default_word_length(ch.channel.dim())
    )?
    .label());
    if let Some(seed) = a.seed {
        let verdict = analysis::positivity_improving_diagnostic(&ch.channel, seed);
        doc["positivity_improving"] = json!({ "verdict": verdict.label(), "min_eigenvalue": verdict.min_eigenvalue() });
    }
    Ok(Output::text(to_json(&doc)?))
}

fn certify(a: &CertifyArgs, format: Format) -> Result<Output> {
    json_only(format, "certify-mprim")?;
    let ch = io::read_channel_file(&a.channel)?;
    let loaded = ch.clone().load()?;
    let kraus = ch.exact_operators()?;
    let cert = Certifier::new(&kraus, a.p)?;
    let n = cert.nvars();
    let need_seed =
        || a.seed.ok_or_else(|| Error::Parse("--seed is required when points or states are drawn at random".into()));
    let point = a.point.as_deref().map(io::parse_exact_vector).transpose()?;
    let (body, passed) = if let Some(count) = a.sweep {
        let seed = need_seed()?;
        let mut rng = stream(seed, u64::MAX);
        let states: Vec<_> = (0..count).map(|_| random_exact_state(ch.dim, &mut rng)).collect();
        let report = cert.sweep(&states, a.trials, seed)?;
        let ok = report.certified_count == count;
        (serde_json::to_value(report)?, ok)
    } else if let Some(state) = &a.state {
        let x = io::parse_exact_vector(state)?;
        match point {
            Some(pt) => {
                let c = cert.for_state(&x, &pt, a.minor_start)?;
                let ok = c.certified;
                (serde_json::to_value(c)?, ok)
            }
            None => {
                let report = cert.sweep(&[x], a.trials, need_seed()?)?;
                let ok = report.certified_count == 1;
                (serde_json::to_value(report)?, ok)
            }
        }
    } else {
        let points = match point {
            Some(pt) => vec![pt],
            None => {
                let mut rng = stream(need_seed()?, 0);
                (0..a.trials).map(|_| random_point(n, &mut rng)).collect()
            }
        };
        let c = cert.full_space(&points)?;
        let ok = c.certified;
        (serde_json::to_value(c)?, ok)
    };
    let doc = json!({ "config": config("certify-mprim", a, format, Some(&loaded))?, "nvars": n, "certificate": body });
    Ok(Output { stdout: to_json(&doc)?, passed: Some(passed) })
}

fn run_chains(args: &ChainArgs, ch: &LoadedChannel, chains: usize) -> Result<Vec<crate::trajectory::ChainRun>> {
    let x0 = io::parse_state(&args.x0)?;
    let cfg = ChainConfig::new(args.steps, args.seed).burn_in(args.burn_in).thinning(args.thin);
    (0..chains.max(1))
        .map(|c| run_chain_with(&ch.channel, &ch.randomization, &x0, cfg, &mut stream(args.seed, c as u64)))
        .collect()
}

fn simulate(a: &SimulateArgs, format: Format) -> Result<Output> {
    let ch = load_with_override(&a.chain.channel, a.chain.randomization.as_deref())?;
    let run = run_chains(&a.chain, &ch, 1)?.remove(0);
    let cfg = config("simulate", a, format, Some(&ch))?;
    match format {
        Format::Csv => {
            let csv = format!("# {}\n{}", serde_json::to_string(&cfg)?, io::run_to_csv(&run)?);
            match emit(a.out.as_deref(), &csv)? {
                Some(path) => {
                    Ok(Output::text(to_json(&json!({ "config": cfg, "retained": run.states.len(), "out": path }))?))
                }
                None => Ok(Output::text(csv)),
            }
        }
        Format::Json => {
            let rows: Vec<Value> = run
                .states
                .iter()
                .zip(&run.times)
                .zip(&run.outcomes)
                .map(|((x, t), j)| json!({ "step": t, "outcome": j.map(|j| j + 1), "state": x.rep().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>() }))
                .collect();
            let doc = to_json(&json!({ "config": cfg, "run": rows }))?;
            Ok(Output::text(emit(a.out.as_deref(), &doc)?.map_or(doc, |p| format!("{{\"out\": {p:?}}}\n"))))
        }
    }
}

fn estimate(a: &EstimateArgs, format: Format) -> Result<Output> {
    let ch = load_with_override(&a.chain.channel, a.chain.randomization.as_deref())?;
    let period = match a.period {
        Some(m) => m,
        None if is_irreducible(&ch.channel).irreducible => period_and_decomposition(&ch.channel)?.0,
        None => 1,
    };
    let runs = run_chains(&a.chain, &ch, a.chains)?;
    let estimates = runs.iter().map(|r| cesaro_subsample(r, period).map(|c| c.average)).collect::<Result<Vec<_>>>()?;
    let chains = estimates.len() as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for e in &estimates {
        points.extend_from_slice(e.points());
        weights.extend(e.weights().iter().map(|w| w / chains));
    }
    let nu = EmpiricalMeasure::from_unnormalized(points, weights)?;
    let cfg = config("estimate-invariant", a, format, Some(&ch))?;
    let rho = nu.mean_density_matrix();
    let mut summary = json!({
        "config": cfg,
        "period": period,
        "atoms": nu.len(),
        "mean_density_matrix": io::matrix_to_json(&rho),
    });
    if a.test_invariance {
        let cmp = invariance_test(&ch.channel, &ch.randomization, &nu, a.subsample, a.replicas, a.chain.seed)?;
        summary["invariance"] = serde_json::to_value(cmp)?;
    }
    let data = match format {
        Format::Csv => format!("# {}\n{}", serde_json::to_string(&summary["config"])?, io::measure_to_csv(&nu)?),
        Format::Json => to_json(&json!({
            "weights": nu.weights(),
            "points": nu.points().iter().map(|x| x.rep().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }))?,
    };
    match emit(a.out.as_deref(), &data)? {
        Some(path) => {
            summary["out"] = json!(path);
            Ok(Output::text(to_json(&summary)?))
        }
        None => match format {
            Format::Csv => Ok(Output::text(data)),
            Format::Json => {
                summary["measure"] = serde_json::from_str(&data)?;
                Ok(Output::text(to_json(&summary)?))
            }
        },
    }
}

fn gap_sample(a: &GapSampleArgs, format: Format) -> Result<Output> {
    let rho = io::load_density(&a.density)?;
    let sampler = GapSampler::new(rho)?;
    let m = sampler.sample_measure(a.n, &mut stream(a.seed, 0))?;
    let cfg = config("gap-sample", a, format, None)?;
    let data = match format {
        Format::Csv => format!("# {}\n{}", serde_json::to_string(&cfg)?, io::measure_to_csv(&m)?),
        Format::Json => to_json(&json!({
            "config": cfg,
            "points": m.points().iter().map(|x| x.rep().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }))?,
    };
    Ok(Output::text(
        emit(a.out.as_deref(), &data)?
            .map_or(data, |p| to_json(&json!({ "config": cfg, "out": p })).unwrap_or_default()),
    ))
}

fn gap_density(a: &GapDensityArgs, format: Format) -> Result<Output> {
    json_only(format, "gap-density")?;
    let sampler = GapSampler::new(io::load_density(&a.density)?)?;
    let x = io::parse_state(&a.state)?;
    let value = sampler.gap_density(&x)?;
    let doc =
        json!({ "config": config("gap-density", a, format, None)?, "density": value, "density_17": fmt17(value) });
    Ok(Output::text(to_json(&doc)?))
}

fn compare(a: &CompareArgs, format: Format) -> Result<Output> {
    json_only(format, "compare")?;
    let ma = io::load_measure(&a.a)?;
    let mb = io::load_measure(&a.b)?;
    if ma.dim() != mb.dim() {
        return Err(Error::DimensionMismatch { expected: ma.dim(), got: mb.dim() });
    }
    let stat = wasserstein1_subsampled(&ma, &mb, a.subsample, &mut stream(a.seed, 0))?;
    // Same-law band: split the pooled measure, each side carrying half the mass.
    let mut points = ma.points().to_vec();
    points.extend_from_slice(mb.points());
    let mut weights: Vec<f64> = ma.weights().iter().map(|w| w / 2.0).collect();
    weights.extend(mb.weights().iter().map(|w| w / 2.0));
    let pooled = EmpiricalMeasure::from_unnormalized(points, weights)?;
    let n = a.subsample.min(ma.len()).min(mb.len());
    let band = split_null_band(&pooled, n, a.replicas, a.seed)?;
    let cmp = Comparison::new(stat, band);
    let doc =
        json!({ "config": config("compare", a, format, None)?, "sizes": [ma.len(), mb.len()], "comparison": cmp });
    Ok(Output::text(to_json(&doc)?))
}

fn parse_grid(s: &str) -> Result<BlochGrid> {
    let (t, p) = s.split_once(['x', 'X']).ok_or_else(|| Error::Parse(format!("grid {s:?} is not THETAxPHI")))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| Error::Parse(format!("grid {s:?}: {e}")));
    BlochGrid::new(parse(t)?, parse(p)?)
}

fn solve_density(a: &SolveDensityArgs, format: Format) -> Result<Output> {
    let ch = io::load_channel(&a.channel)?;
    let grid = parse_grid(&a.grid)?;
    let sol = solve_density_fixed_point(&ch.channel, &grid, a.iters, a.tol)?;
    let cfg = config("solve-density", a, format, Some(&ch))?;
    let summary = json!({
        "config": cfg,
        "sweeps": sol.sweeps,
        "residual": sol.residual(),
        "residual_history": sol.residual_history,
        "damped": sol.damped,
        "mass_defect": sol.mass_defect,
        "integral": sol.density.integral(),
    });
    let data = match format {
        Format::Csv => {
            let mut s = format!("# {}\ntheta_band,phi_sector,cos_theta,phi,density\n", serde_json::to_string(&cfg)?);
            for i in 0..grid.n_theta {
                for j in 0..grid.n_phi {
                    s.push_str(&format!(
                        "{i},{j},{},{},{}\n",
                        fmt17(grid.cos_theta(i)),
                        fmt17(grid.phi(j)),
                        fmt17(sol.density.value(i, j))
                    ));
                }
            }
            s
        }
        Format::Json => to_json(&json!({ "summary": summary, "density": sol.density }))?,
    };
    match emit(a.out.as_deref(), &data)? {
        Some(path) => {
            let mut s = summary;
            s["out"] = json!(path);
            Ok(Output::text(to_json(&s)?))
        }
        None => Ok(Output::text(data)),
    }
}

fn examples(a: &ExamplesArgs, format: Format) -> Result<Output> {
    json_only(format, "examples")?;
    let name: ExampleName = a.name.parse()?;
    let mut o = ExampleOptions::new(a.seed.unwrap_or(EXAMPLES_DEFAULT_SEED));
    o.samples = a.samples;
    o.steps = a.steps;
    o.states = a.states;
    o.p = a.p;
    let verdict = run_example(name, &o)?;
    let doc = to_json(&json!({ "config": config("examples", a, format, None)?, "verdict": verdict }))?;
    emit(a.out.as_deref(), &doc)?;
    Ok(Output { stdout: doc, passed: Some(verdict.passed) })
}
