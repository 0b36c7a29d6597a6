//! `cadec`: run decoder simulations, evaluate closed-form models and execute
//! the verification suites. Records are written as JSON Lines.

mod verify;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use ca_decoders::harness::{self, DecoderKind, ExperimentSpec, NoiseModel, NoiseParams, ResetPolicy, ShotsPolicy};
use ca_decoders::harrington::HierConstants;
use ca_decoders::markov;
use ca_decoders::oracles;
use ca_decoders::record::{self, ResultRecord};
use ca_decoders::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cadec", version, about = "Cellular-automaton decoder experiments")]
struct Cli {
    /// Worker threads for the trial pool (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo estimate of p_L or the mean lifetime at one rate or over a grid.
    Simulate(SimulateArgs),
    /// Closed-form models evaluated over a rate grid.
    Analytic(AnalyticArgs),
    /// Exhaustive and oracle verification suites.
    Verify(VerifyArgs),
    /// Mean lifetime for each signal reset period of a SCALA decoder.
    SweepReset(SweepResetArgs),
    /// Converts a JSON Lines record file to CSV with the same columns.
    ExportCsv(ExportArgs),
}

#[derive(Args, Clone)]
struct RateArgs {
    /// Single rate; with a grid that sweeps other rates, the fixed data rate.
    #[arg(long)]
    p: Option<f64>,
    /// Rate grid `start:stop:points`.
    #[arg(long, value_parser = parse_grid)]
    p_grid: Option<Grid>,
    /// Space the grid points logarithmically.
    #[arg(long, requires = "p_grid")]
    log: bool,
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    start: f64,
    stop: f64,
    points: usize,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err("expected start:stop:points".into());
    };
    let start: f64 = a.parse().map_err(|e| format!("start: {e}"))?;
    let stop: f64 = b.parse().map_err(|e| format!("stop: {e}"))?;
    let points: usize = n.parse().map_err(|e| format!("points: {e}"))?;
    if points == 0 {
        return Err("a grid needs at least one point".into());
    }
    Ok(Grid { start, stop, points })
}

impl RateArgs {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        match (self.p, self.p_grid) {
            (_, Some(g)) => {
                if self.log && (g.start <= 0.0 || g.stop <= 0.0) {
                    return Err(CliError::Usage("a logarithmic grid needs positive end points".into()));
                }
                Ok((0..g.points)
                    .map(|i| {
                        let f = if g.points == 1 { 0.0 } else { i as f64 / (g.points - 1) as f64 };
                        if f == 0.0 {
                            g.start
                        } else if f == 1.0 {
                            g.stop
                        } else if self.log {
                            (g.start.ln() + f * (g.stop.ln() - g.start.ln())).exp()
                        } else {
                            g.start + f * (g.stop - g.start)
                        }
                    })
                    .collect())
            }
            (Some(p), None) => Ok(vec![p]),
            (None, None) => Err(CliError::Usage("give --p or --p-grid".into())),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    decoder: DecoderKind,
    #[arg(long)]
    distance: usize,
    #[arg(long, default_value = "code-capacity")]
    model: NoiseModel,
    #[command(flatten)]
    rates: RateArgs,
    /// Measurement flip rate; defaults to p outside code capacity.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    p_sig: f64,
    #[arg(long, default_value_t = 0.0)]
    p_cs: f64,
    #[arg(long, default_value_t = 0.0)]
    p_fs: f64,
    /// Rates set to each grid value.
    #[arg(long, value_delimiter = ',', default_value = "p")]
    sweep: Vec<Rate>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// `never`, `ramp`, `auto` or a period in steps; defaults to the decoder's longest period.
    #[arg(long, value_parser = parse_reset)]
    reset: Option<ResetPolicy>,
    #[arg(long, default_value_t = harness::DEFAULT_T_MAX)]
    t_max: u64,
    #[arg(long)]
    seed: u64,
    /// Output file (appended); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    #[arg(long, default_value_t = 1_000)]
    shots: u64,
    /// Double the shot count until the relative SE target is met.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, default_value_t = 0.05)]
    target_rel_se: f64,
    #[arg(long, default_value_t = 1_000)]
    n_min: u64,
    #[arg(long, default_value_t = 1_000_000)]
    n_max: u64,
}

impl BudgetArgs {
    fn policy(&self) -> ShotsPolicy {
        if self.adaptive {
            ShotsPolicy::Adaptive { target_rel_se: self.target_rel_se, n_min: self.n_min, n_max: self.n_max }
        } else {
            ShotsPolicy::Fixed(self.shots)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rate {
    P,
    Q,
    PSig,
    PCs,
    PFs,
}

fn parse_reset(s: &str) -> Result<ResetPolicy, String> {
    match s {
        "never" => Ok(ResetPolicy::Never),
        "ramp" => Ok(ResetPolicy::Ramp),
        "auto" => Ok(ResetPolicy::Auto),
        n => n
            .parse()
            .map(ResetPolicy::Fixed)
            .map_err(|_| format!("`{n}` is not never, ramp, auto or a period")),
    }
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long)]
    model: AnalyticModel,
    #[arg(long, default_value_t = 3)]
    distance: usize,
    #[command(flatten)]
    rates: RateArgs,
    /// Counter window for the Chernoff bounds.
    #[arg(long, default_value_t = 10)]
    window: u64,
    /// Counter threshold fraction for the Chernoff bounds.
    #[arg(long, default_value_t = 0.9)]
    fc: f64,
    /// Hierarchy level of the flip-signal chain.
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnalyticModel {
    /// Majority-vote failure rate of a repetition code.
    MlRepetition,
    /// Concatenated three-bit majority at `d = 3^m`.
    ConcatMajority,
    /// Mean lifetime of the level-1 block chain.
    MarkovLifetime,
    /// Restarted three-block lifetime at `d = 9`.
    D9Lifetime,
    /// Upper and lower bounds on the counter tail.
    Chernoff,
    /// Leading-order flip-signal chain failure probability.
    FlipChain,
    /// Lifetime lower bound under measurement noise.
    LifetimeLowerBound,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run; all of them when absent.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<verify::Suite>,
    #[arg(long, default_value_t = 11)]
    max_distance: usize,
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    /// Random defect sets for the matching suite.
    #[arg(long, default_value_t = 1_000)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepResetArgs {
    #[arg(long)]
    decoder: DecoderKind,
    #[arg(long)]
    distance: usize,
    #[arg(long, default_value = "phenomenological")]
    model: NoiseModel,
    #[arg(long)]
    p: f64,
    /// Measurement flip rate; defaults to p.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    p_sig: f64,
    /// Periods to try; all admissible periods when absent.
    #[arg(long, value_delimiter = ',')]
    periods: Vec<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = harness::DEFAULT_T_MAX)]
    t_max: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDistance { .. } | Error::Domain(_) | Error::InvalidSpec(_) | Error::OddDefectCount(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Appends each record as soon as it is ready, so an interrupted sweep leaves complete lines.
struct Sink(Option<PathBuf>);

impl Sink {
    fn emit(&self, r: &ResultRecord) -> Result<(), CliError> {
        let one = std::slice::from_ref(r);
        match &self.0 {
            Some(path) => record::append_jsonl(path, one)?,
            None => record::write_jsonl(io::stdout().lock(), one)?,
        }
        Ok(())
    }
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let sink = Sink(a.out.clone());
    for x in a.rates.values()? {
        let mut n = NoiseParams {
            p: 0.0,
            q: 0.0,
            p_sig: a.p_sig,
            p_cs: a.p_cs,
            p_fs: a.p_fs,
        };
        n.p = if a.sweep.contains(&Rate::P) || a.rates.p_grid.is_none() { x } else { a.rates.p.unwrap_or(0.0) };
        n.q = match a.q {
            _ if a.sweep.contains(&Rate::Q) => x,
            Some(q) => q,
            None if a.model == NoiseModel::CodeCapacity => 0.0,
            None => n.p,
        };
        for (rate, slot) in [(Rate::PSig, &mut n.p_sig), (Rate::PCs, &mut n.p_cs), (Rate::PFs, &mut n.p_fs)] {
            if a.sweep.contains(&rate) {
                *slot = x;
            }
        }
        let mut spec = ExperimentSpec::new(a.decoder, a.distance, a.model, n, a.seed)
            .with_shots(a.budget.policy())
            .with_t_max(a.t_max);
        if let Some(r) = a.reset {
            spec = spec.with_reset(r);
        }
        let run = harness::run(&spec)?;
        sink.emit(&ResultRecord::from_run(&spec, &run))?;
    }
    Ok(())
}

fn analytic(a: AnalyticArgs) -> Result<(), CliError> {
    let sink = Sink(a.out.clone());
    let d = a.distance;
    for p in a.rates.values()? {
        let one = |value: f64| ResultRecord::analytic(model_id(a.model), d, p, value);
        let records = match a.model {
            AnalyticModel::MlRepetition => vec![one(oracles::ml_pl_repetition(p, d)?)],
            AnalyticModel::ConcatMajority => {
                let c = HierConstants::for_distance(d)?;
                vec![one(oracles::concat_majority_pl(p, c.m)?)]
            }
            AnalyticModel::MarkovLifetime => vec![one(markov::lifetime_level1(d, p)?)],
            AnalyticModel::D9Lifetime => {
                if d != 9 {
                    return Err(CliError::Usage("d9-lifetime is defined for --distance 9 only".into()));
                }
                vec![one(markov::lifetime_d9_total(p)?)]
            }
            AnalyticModel::Chernoff => {
                let b = markov::chernoff_bounds(a.window, a.fc, p)?;
                let w = a.window as usize;
                vec![
                    ResultRecord::analytic("chernoff-upper", w, p, b.upper),
                    ResultRecord::analytic("chernoff-lower", w, p, b.lower),
                ]
            }
            AnalyticModel::FlipChain => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(p).into());
                }
                vec![ResultRecord::analytic("flip-chain", 3usize.pow(a.k), p, markov::flip_chain_failure_prob(a.k, p))]
            }
            AnalyticModel::LifetimeLowerBound => {
                let c = HierConstants::for_distance(d)?;
                vec![one(markov::lifetime_lower_bound(&c, p)?)]
            }
        };
        for r in &records {
            sink.emit(r)?;
        }
    }
    Ok(())
}

fn model_id(m: AnalyticModel) -> &'static str {
    match m {
        AnalyticModel::MlRepetition => "ml-repetition",
        AnalyticModel::ConcatMajority => "concat-majority",
        AnalyticModel::MarkovLifetime => "markov-lifetime",
        AnalyticModel::D9Lifetime => "d9-lifetime",
        AnalyticModel::Chernoff => "chernoff",
        AnalyticModel::FlipChain => "flip-chain",
        AnalyticModel::LifetimeLowerBound => "lifetime-lower-bound",
    }
}

fn sweep_reset(a: SweepResetArgs) -> Result<(), CliError> {
    if a.decoder.is_hierarchical() {
        return Err(CliError::Usage("reset periods apply to scala1d and scala2d only".into()));
    }
    if a.model == NoiseModel::CodeCapacity {
        return Err(CliError::Usage("reset periods matter only for lifetime models".into()));
    }
    let noise = NoiseParams { p: a.p, q: a.q.unwrap_or(a.p), p_sig: a.p_sig, ..Default::default() };
    let base = ExperimentSpec::new(a.decoder, a.distance, a.model, noise, a.seed)
        .with_shots(a.budget.policy())
        .with_t_max(a.t_max);
    base.validate()?;
    let periods = if a.periods.is_empty() { base.reset_candidates() } else { a.periods.clone() };
    let sink = Sink(a.out.clone());
    let mut best: Option<(usize, f64)> = None;
    for t in periods {
        let spec = base.clone().with_reset(ResetPolicy::Fixed(t));
        let run = harness::run(&spec)?;
        if best.is_none_or(|(_, v)| run.estimate > v) {
            best = Some((t, run.estimate));
        }
        sink.emit(&ResultRecord::from_run(&spec, &run))?;
    }
    if let Some((t, v)) = best {
        eprintln!("best t_R = {t} (mean lifetime {v:.4})");
    }
    Ok(())
}

fn export_csv(a: ExportArgs) -> Result<(), CliError> {
    let records = record::read_jsonl(File::open(&a.input)?)?;
    match a.output {
        Some(path) => record::write_csv(File::create(path)?, &records)?,
        None => record::write_csv(io::stdout().lock(), &records)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Analytic(a) => analytic(a),
        Cmd::Verify(a) => verify::run(&a.suite, a.max_distance, a.max_n, a.cases, a.seed),
        Cmd::SweepReset(a) => sweep_reset(a),
        Cmd::ExportCsv(a) => export_csv(a),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
