use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use flowcut::cover::{projection_cover, single_direction_baseline, validate_chained_covers};
use flowcut::cutmatch::{
    hypercube_points, run_game, sphere_point_set_near, FlowMatchingPlayer, GameState, GreedyMatchingPlayer,
    SpectralCutPlayer,
};
use flowcut::directions::{gaussian_vector, pm1_stretch_tail, rng_from, split, validate_isoperimetry};
use flowcut::driver::{
    balanced_separator, sparsest_cut, update_embedding, verify_certificate, Certificate, SparsestCutReport,
};
use flowcut::embedding::Embedding;
use flowcut::generators;
use flowcut::graph::WeightedGraph;
use flowcut::params::{ChainRule, Params};
use flowcut::Error;

#[derive(Parser)]
#[command(name = "flowcut", version, about = "Sparsest cuts and balanced separators with checkable certificates")]
struct Cli {
    /// Print failures as one JSON object on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Worker threads for trial batches.
    #[arg(long, global = true, env = "FLOWCUT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search capacity scales for a sparse cut and write its certificate.
    SparsestCut(SolveArgs),
    /// Play the embedding game at unit scale and write the certificate.
    BalancedSeparator(SolveArgs),
    /// Simulate the cut-matching game and write a CSV trace.
    Cutmatch(CutmatchArgs),
    /// Check a certificate (or a sparsest-cut report) against a graph.
    Verify(VerifyArgs),
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
    /// Run the statistical checks on directions, isoperimetry and chaining.
    ValidateLemmas(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Edge-list file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    /// Certificate destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// CSV trace destination.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Full search report (sparsest-cut only).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    mwu_c: Option<f64>,
    #[arg(long)]
    trial_cap_factor: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_enum, default_value_t = Rule::Standard)]
    chain_rule: Rule,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Standard,
    Shuffled,
}

impl SolveArgs {
    fn params(&self) -> Params {
        let mut p = Params::new(self.epsilon);
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.c, self.c);
        set(&mut p.sigma, self.sigma);
        set(&mut p.gamma, self.gamma);
        set(&mut p.eta, self.eta);
        set(&mut p.lambda_min, self.lambda_min);
        set(&mut p.mwu_c, self.mwu_c);
        set(&mut p.trial_cap_factor, self.trial_cap_factor);
        p.l_override = self.l;
        p.r_override = self.r;
        p.chain_rule = match self.chain_rule {
            Rule::Standard => ChainRule::Standard,
            Rule::Shuffled => ChainRule::Shuffled,
        };
        p
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Player {
    Flow,
    Hypercube,
    Sphere,
}

#[derive(Args)]
struct CutmatchArgs {
    #[arg(long, value_enum)]
    player: Player,
    /// Graph for the flow player.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Dimension of the hypercube or sphere point set.
    #[arg(long)]
    dim: Option<usize>,
    /// Approximate size of the sphere point set.
    #[arg(long, default_value_t = 512)]
    target: usize,
    #[arg(long)]
    rounds: usize,
    #[arg(long)]
    seed: u64,
    /// CSV trace destination; stdout when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    certificate: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Path,
    Cycle,
    Complete,
    Dumbbell,
    Hypercube,
    Gnp,
    Planted,
    Expander,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: Option<usize>,
    /// Clique size of each dumbbell lobe.
    #[arg(long)]
    k: Option<usize>,
    /// Hypercube dimension or expander degree.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failures with their exit codes.
enum Failure {
    Solver(Error),
    Verify(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Solver(e) => match e {
                Error::Parse { .. }
                | Error::Parameter(_)
                | Error::InvalidGraph(_)
                | Error::InvalidCut(_)
                | Error::Precondition(_)
                | Error::SizeLimit { .. }
                | Error::Io(_) => 2,
                _ => 3,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Verify(_) => "verify",
            Failure::Usage(_) => "usage",
            Failure::Solver(e) => match e {
                Error::Parse { .. } => "parse",
                Error::Parameter(_) => "parameter",
                Error::Io(_) => "io",
                Error::Inconclusive { .. } | Error::OracleStarvation { .. } => "inconclusive",
                _ if self.code() == 2 => "input",
                _ => "internal",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Solver(e) => e.to_string(),
            Failure::Verify(m) | Failure::Usage(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::SparsestCut(a) => solve(a, true),
        Command::BalancedSeparator(a) => solve(a, false),
        Command::Cutmatch(a) => cutmatch(a),
        Command::Verify(a) => verify(a),
        Command::Gen(a) => gen(a),
        Command::ValidateLemmas(a) => validate_lemmas(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if cli.json_errors {
                eprintln!("{}", json!({ "error": f.kind(), "message": f.message(), "exit_code": f.code() }));
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}

fn read_graph(path: &Path) -> Result<WeightedGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(WeightedGraph::from_edge_list(&text)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.write_all(b"\n")) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::from(e).into()),
                _ => Ok(()),
            }
        }
    }
}

/// Serializes rows under a fixed header; `None` fields become empty cells.
fn csv_text<T: serde::Serialize>(header: &[&str], rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::from(Error::Io(e.to_string()));
    w.write_record(header).map_err(io)?;
    for r in rows {
        let value = serde_json::to_value(r).map_err(|e| Error::Io(e.to_string()))?;
        let cells = header.iter().map(|h| match value.get(*h) {
            None | Some(serde_json::Value::Null) => String::new(),
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
        });
        w.write_record(cells).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn solve(a: &SolveArgs, search: bool) -> Result<(), Failure> {
    let g = read_graph(&a.input)?;
    let params = a.params();
    let trace_name = a.trace.as_ref().map(|p| p.display().to_string());
    let (mut cert, trace, report): (Certificate, String, Option<SparsestCutReport>) = if search {
        let report = sparsest_cut(&g, &params, a.seed)?;
        (report.certificate.clone(), csv_text(&["alpha", "outcome", "expansion", "lambda2", "detail"], &report.probes)?, Some(report))
    } else {
        let run = balanced_separator(&g, &params, a.seed)?;
        (run.certificate, csv_text(&["iteration", "objective", "max_violation", "pairs", "trials"], &run.traces)?, None)
    };
    cert.trace_path = trace_name;
    if let Some(p) = &a.trace {
        write_out(Some(p), trace.trim_end())?;
    }
    if let (Some(p), Some(mut r)) = (&a.report, report) {
        r.certificate = cert.clone();
        write_out(Some(p), &r.to_json()?)?;
    }
    write_out(a.output.as_deref(), &cert.to_json()?)
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let g = read_graph(&a.input)?;
    let text = fs::read_to_string(&a.certificate).map_err(|e| Failure::Usage(format!("{}: {e}", a.certificate.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Verify(format!("certificate is not valid JSON: {e}")))?;
    let cert_value = value.get("certificate").cloned().unwrap_or(value);
    let cert: Certificate = serde_json::from_value(cert_value)
        .map_err(|e| Failure::Verify(format!("certificate is malformed: {e}")))?;
    let report = verify_certificate(&g, &cert);
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::Verify(format!("check `{}` failed: {}", c.name, c.detail))),
    }
}

fn cutmatch(a: &CutmatchArgs) -> Result<(), Failure> {
    let state: GameState = match a.player {
        Player::Flow => {
            let path = a.input.as_ref().ok_or_else(|| Failure::Usage("the flow player needs --input".into()))?;
            let g = read_graph(path)?;
            let n = g.n();
            let d = a.dim.unwrap_or_else(|| (n as f64).log2().ceil().max(1.0) as usize);
            let v = update_embedding(n, d, None, None, split(a.seed, 0))?.embedding;
            run_game(&v, &mut SpectralCutPlayer { seed: a.seed }, &mut FlowMatchingPlayer { graph: &g }, a.rounds)?
        }
        Player::Hypercube => {
            let v = hypercube_points(a.dim.unwrap_or(4))?;
            run_game(&v, &mut SpectralCutPlayer { seed: a.seed }, &mut GreedyMatchingPlayer { points: &v }, a.rounds)?
        }
        Player::Sphere => {
            let d = a.dim.unwrap_or_else(|| {
                let ln = (a.target.max(16) as f64).ln();
                (ln / ln.ln()).ceil() as usize
            });
            let set = sphere_point_set_near(d, a.target, a.seed)?;
            eprintln!(
                "sphere set: n = {}, d = {d}, gamma = {:.4}, L = {:.3}, r = {:.4}",
                set.n(),
                set.gamma,
                set.l_floor,
                set.radius_r
            );
            let v: &Embedding = &set.points;
            run_game(v, &mut SpectralCutPlayer { seed: a.seed }, &mut GreedyMatchingPlayer { points: v }, a.rounds)?
        }
    };
    let mut buf = Vec::new();
    state.write_csv(&mut buf)?;
    write_out(a.trace.as_deref(), String::from_utf8(buf).expect("csv output is utf-8").trim_end())?;
    if let Some(c) = &state.cut {
        eprintln!("matching player answered with a cut of expansion {} in round {}", c.expansion, state.t + 1);
    }
    Ok(())
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("this model needs --{flag}")))
}

fn gen(a: &GenArgs) -> Result<(), Failure> {
    let g = match a.model {
        Model::Path => generators::path(need(a.n, "n")?)?,
        Model::Cycle => generators::cycle(need(a.n, "n")?)?,
        Model::Complete => generators::complete(need(a.n, "n")?)?,
        Model::Dumbbell => generators::dumbbell(need(a.k, "k")?)?,
        Model::Hypercube => generators::hypercube(need(a.d, "d")?)?,
        Model::Gnp => generators::gnp(need(a.n, "n")?, need(a.p, "p")?, a.seed)?,
        Model::Planted => generators::planted(need(a.n, "n")?, need(a.p, "p")?, need(a.p_out, "p-out")?, a.seed)?,
        Model::Expander => generators::expander(need(a.n, "n")?, need(a.d, "d")?, a.seed)?,
    };
    write_out(a.output.as_deref(), g.to_edge_list().trim_end())
}

fn validate_lemmas(a: &ValidateArgs) -> Result<(), Failure> {
    let samples = a.samples;
    let mut iso = Vec::new();
    for (i, (delta, rho, eps)) in [(0.3, 0.5, 0.1), (0.1, 0.9, 0.05)].into_iter().enumerate() {
        let r = validate_isoperimetry(eps, delta, rho, samples, &mut rng_from(split(a.seed, i as u64)))?;
        let sigma = (eps * (1.0 - eps) / r.samples.max(1) as f64).sqrt();
        iso.push(json!({
            "delta": delta, "rho": rho, "epsilon": eps,
            "violation_rate": r.violation_rate, "limit": eps + 3.0 * sigma,
            "pass": r.violation_rate < eps + 3.0 * sigma,
        }));
    }
    let k = (9.0 * 1024f64.log2()).ceil() as usize;
    let mut rng = rng_from(split(a.seed, 10));
    let mut v = gaussian_vector(&mut rng, 16);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut tails = Vec::new();
    for rho in [0.0, 0.9] {
        for t in [1.0, 2.0, 3.0] {
            let rate = pm1_stretch_tail(&v, k, rho, t, samples, &mut rng)?;
            let limit = 1.5 * (-t * t / 3.0f64).exp();
            tails.push(json!({ "k": k, "rho": rho, "t": t, "rate": rate, "limit": limit, "pass": rate <= limit }));
        }
    }
    let n = 512;
    let d = 9;
    let mut rng = rng_from(split(a.seed, 20));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut r = gaussian_vector(&mut rng, d);
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            r.iter_mut().for_each(|x| *x /= norm);
            r
        })
        .collect();
    let emb = Embedding::from_rows(&rows)?;
    let sampler = |u: &[f64]| Ok(projection_cover(&emb, u, 0.125, 0.25));
    let trials = (samples / 100).max(10);
    let l = 1.0;
    let mut chains = Vec::new();
    for r in 1..=3 {
        let rep = validate_chained_covers(&emb, sampler, r, l, trials, &mut rng_from(split(a.seed, 30 + r as u64)))?;
        chains.push(json!({ "r": r, "mean_long": rep.mean_long, "std_error": rep.std_error, "pass": rep.mean_long > 0.0 }));
    }
    let base = single_direction_baseline(&emb, sampler, l, trials, &mut rng_from(split(a.seed, 40)))?;
    let report = json!({
        "isoperimetry": iso,
        "pm1_tails": tails,
        "chaining": { "n": n, "d": d, "l": l, "trials": trials, "by_r": chains,
                      "baseline_mean_long": base.mean_long, "baseline_std_error": base.std_error },
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    write_out(a.output.as_deref(), &text)
}
