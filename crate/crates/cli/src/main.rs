use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use irreg_core::codec::{self, Format};
use irreg_core::labeling::compute_budgets;
use irreg_core::lab::{self, RateSweep};
use irreg_core::params::{Mode, PipelineParams, Preset};
use irreg_core::pipeline::{bounds_table, run_pipeline, Outcome};
use irreg_core::seed::{self, Stream};
use irreg_core::verify::{is_irregular, lower_bound, ExactSolver, Strength};
use irreg_core::weights::{write_csv, WeightFile};
use irreg_core::{generate, Error, Graph};

const OK: u8 = 0;
const NOT_IRREGULAR: u8 = 1;
const STAGE_FAILURE: u8 = 2;
const PARAM_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "irreg", version, about = "Irregular edge weightings of regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random d-regular graph.
    Gen(GenArgs),
    /// Run the weighting pipeline and write the final labels.
    Weight(WeightArgs),
    /// Check a weighting for global irregularity.
    Verify(VerifyArgs),
    /// Exact irregularity strength of a small graph.
    Exact(ExactArgs),
    /// Lower bound, theorem cap, budgets and degree range.
    Bounds(BoundsArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Lab(LabCommand),
}

#[derive(Subcommand)]
enum LabCommand {
    /// Binomial tails against the Chernoff bounds.
    Chernoff(ChernoffArgs),
    /// Failure rates of the partition and label conditions.
    Conditions(ConditionsArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = "IRREG_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// edge-list or graph6; defaults to the --out extension.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphSource {
    /// Graph file (.g6/.graph6 or edge list).
    #[arg(long, conflicts_with_all = ["n", "d"])]
    graph: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Generate a random regular graph instead of reading one.
    #[arg(long, requires = "d")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    d: Option<usize>,
    /// Seed for the generated graph; defaults to --seed.
    #[arg(long)]
    graph_seed: Option<u64>,
}

#[derive(Args)]
struct ParamArgs {
    /// corollary1 or corollary2; sets b and eps.
    #[arg(long, conflicts_with_all = ["b", "eps"])]
    preset: Option<String>,
    /// eps0 for the corollary2 preset.
    #[arg(long, default_value_t = 1.0)]
    eps0: f64,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

impl ParamArgs {
    fn b_eps(&self) -> Result<(f64, f64), Error> {
        if let Some(name) = &self.preset {
            return Ok(Preset::parse(name, self.eps0)?.b_eps());
        }
        let d = PipelineParams::default();
        Ok((self.b.unwrap_or(d.b), self.eps.unwrap_or(d.eps)))
    }
}

#[derive(Args)]
struct WeightArgs {
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1.0)]
    slack: f64,
    /// strict or empirical.
    #[arg(long, default_value = "strict")]
    mode: Mode,
    #[command(flatten)]
    seed: SeedArg,
    /// Attempts per sampling loop.
    #[arg(long, default_value_t = 100)]
    retries: usize,
    #[arg(long)]
    out_weights: Option<PathBuf>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out_report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    /// CSV with u,v,weight rows.
    #[arg(long)]
    weights: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long, default_value_t = 10)]
    kmax: u64,
    /// Refuse graphs with more edges than this.
    #[arg(long, default_value_t = ExactSolver::default().max_edges)]
    max_edges: usize,
    /// Write the witness weighting here.
    #[arg(long)]
    out_weights: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct ChernoffArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5])]
    p: Vec<f64>,
    /// Deviations as fractions of np.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 1.0])]
    t_frac: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConditionsArgs {
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0])]
    slacks: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Stage(_) | Error::RetryExhausted { .. } => STAGE_FAILURE,
        _ => PARAM_ERROR,
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn read_graph(path: &Path, format: Option<Format>) -> Result<Graph, Error> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    codec::read(&bytes, format.unwrap_or_else(|| Format::from_path(path)))
}

impl GraphSource {
    /// The graph and, when it was generated, the seed used.
    fn load(&self, master: u64) -> Result<(Graph, Option<u64>), Error> {
        match (&self.graph, self.n, self.d) {
            (Some(path), _, _) => Ok((read_graph(path, self.format)?, None)),
            (None, Some(n), Some(d)) => {
                let s = self.graph_seed.unwrap_or(master);
                let t = Instant::now();
                let g = generate::random_regular(n, d, s)?;
                eprintln!("time.generate={:.3}s", t.elapsed().as_secs_f64());
                Ok((g, Some(s)))
            }
            _ => Err(Error::Param("give either --graph or both --n and --d".into())),
        }
    }
}

fn gen(a: &GenArgs) -> Result<u8, Error> {
    let g = generate::random_regular(a.n, a.d, a.seed.seed)?;
    let format = a
        .format
        .or_else(|| a.out.as_deref().map(Format::from_path))
        .unwrap_or(Format::EdgeList);
    emit(a.out.as_deref(), &codec::write(&g, format))?;
    Ok(OK)
}

fn weight(a: &WeightArgs) -> Result<u8, Error> {
    let (b, eps) = a.params.b_eps()?;
    let params = PipelineParams {
        b,
        eps,
        slack: a.slack,
        max_retries: a.retries,
        mode: a.mode,
    };
    params.validate()?;
    let seed = a.seed.seed;
    let (g, graph_seed) = a.source.load(seed)?;
    let run = run_pipeline(&g, &params, seed)?;
    for (stage, t) in &run.timings {
        eprintln!("time.{stage}={:.3}s", t.as_secs_f64());
    }
    let mut report = run.report();
    if let Some(s) = graph_seed {
        report.push_str(&format!("graph_seed={s}\n"));
    }
    if let (Some(path), Some(w3)) = (&a.out_weights, &run.omega3) {
        let meta = [
            ("n", run.n.to_string()),
            ("d", run.d.to_string()),
            ("b", b.to_string()),
            ("eps", eps.to_string()),
            ("seed", seed.to_string()),
        ];
        fs::write(path, w3.to_csv(&g, &meta))?;
    }
    emit(a.out_report.as_deref(), report.as_bytes())?;
    Ok(match run.outcome {
        Outcome::Irregular => OK,
        Outcome::NotIrregular => NOT_IRREGULAR,
        Outcome::Failed(_) => STAGE_FAILURE,
    })
}

fn verify(a: &VerifyArgs) -> Result<u8, Error> {
    let g = read_graph(&a.graph, a.format)?;
    let text = fs::read_to_string(&a.weights)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", a.weights.display())))?;
    let file = WeightFile::parse(&text)?;
    let w = file.weights_for(&g)?;
    let mut res = is_irregular(&g, &w)?;
    let param = |k: &str| file.meta(k).and_then(|v| v.parse::<f64>().ok());
    if let (Some(b), Some(eps), Some(d)) = (param("b"), param("eps"), g.regular_degree()) {
        if let Ok(budgets) = compute_budgets(g.order(), d, b, eps) {
            let cap = budgets.label_cap();
            res.cap = Some(cap);
            res.bound_ok = res.max_label.map(|m| m <= cap);
        }
    }
    print!("{}", res.to_kv("verify"));
    Ok(if res.irregular { OK } else { NOT_IRREGULAR })
}

fn exact(a: &ExactArgs) -> Result<u8, Error> {
    let g = read_graph(&a.graph, a.format)?;
    let solver = ExactSolver {
        max_edges: a.max_edges,
    };
    let strength = solver.solve(&g, a.kmax)?;
    let mut out = format!("n={}\nm={}\n", g.order(), g.size());
    out.push_str(&format!("lower_bound={}\n", lower_bound(&g)));
    match &strength {
        Strength::Exact { k, weights } => {
            out.push_str(&format!("strength={k}\n"));
            let ws: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
            out.push_str(&format!("witness={}\n", ws.join(",")));
            if let Some(path) = &a.out_weights {
                fs::write(path, write_csv(&g, weights, "exact", &[("k", k.to_string())]))?;
            }
        }
        Strength::Above { k_max } => out.push_str(&format!("strength=>{k_max}\n")),
    }
    print!("{out}");
    Ok(OK)
}

fn bounds(a: &BoundsArgs) -> Result<u8, Error> {
    let (b, eps) = a.params.b_eps()?;
    print!("{}", bounds_table(a.n, a.d, b, eps)?);
    Ok(OK)
}

fn chernoff(a: &ChernoffArgs) -> Result<u8, Error> {
    let mut out = String::from(lab::TAIL_CSV_HEADER);
    out.push('\n');
    for (i, &n) in a.n.iter().enumerate() {
        for (j, &p) in a.p.iter().enumerate() {
            let np = n as f64 * p;
            let ts: Vec<f64> = a.t_frac.iter().map(|f| f * np).collect();
            let cell = seed::derive(a.seed.seed, Stream::Trial, (i * a.p.len() + j) as u64);
            for e in lab::binomial_tail_estimates(n, p, &ts, a.trials, cell)? {
                out.push_str(&lab::tail_csv_row(&e)?);
                out.push('\n');
            }
        }
    }
    emit(a.out.as_deref(), out.as_bytes())?;
    Ok(OK)
}

fn conditions(a: &ConditionsArgs) -> Result<u8, Error> {
    let (b, eps) = a.params.b_eps()?;
    let supplied = match &a.source.graph {
        Some(path) => Some(read_graph(path, a.source.format)?),
        None => None,
    };
    let (n, d) = match (&supplied, a.source.n, a.source.d) {
        (Some(g), _, _) => (
            g.order(),
            g.regular_degree()
                .ok_or_else(|| Error::Param("the input graph is not regular".into()))?,
        ),
        (None, Some(n), Some(d)) => (n, d),
        _ => return Err(Error::Param("give either --graph or both --n and --d".into())),
    };
    let sweep = RateSweep {
        n,
        d,
        b,
        eps,
        slacks: a.slacks.clone(),
        trials: a.trials,
        seed: a.seed.seed,
        graph: supplied.as_ref(),
    };
    let rows = lab::condition_failure_rates(&sweep)?;
    emit(a.out.as_deref(), lab::rates_csv(&rows).as_bytes())?;
    Ok(OK)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let t = Instant::now();
    let code = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Weight(a) => weight(a),
        Command::Verify(a) => verify(a),
        Command::Exact(a) => exact(a),
        Command::Bounds(a) => bounds(a),
        Command::Lab(LabCommand::Chernoff(a)) => chernoff(a),
        Command::Lab(LabCommand::Conditions(a)) => conditions(a),
    }?;
    eprintln!("time.total={:.3}s", t.elapsed().as_secs_f64());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { PARAM_ERROR } else { OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
