//! `netsurv` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use netsurv::charts::{ChartKind, LimitStyle, DEFAULT_LAMBDA};
use netsurv::community::regularized_spectral_clustering;
use netsurv::dcsbm::{mle, simulate_dynamic};
use netsurv::experiments::{
    run_scenario, table_report, ArlSummary, Scenario, ScenarioSpec, DEFAULT_CAP,
};
use netsurv::ingest::{parse_caucus, read_rollcall_dir, senate_sequence, DEFAULT_THRESHOLD};
use netsurv::io::{read_edge_list, read_labels, write_edge_list, write_labels};
use netsurv::paramfile::ModelSpec;
use netsurv::render::chart_svg;
use netsurv::sampling::stream_rng;
use netsurv::surveillance::{monitor, monitor_stats, ChartBank, MonitorConfig, SdMode};
use netsurv::{DynamicNetwork, Error};

#[derive(Parser, Debug)]
#[command(
    name = "netsurv",
    about = "Simulate, fit and monitor dynamic networks with a degree-corrected block model"
)]
#[command(disable_version_flag = true)]
struct Cli {
    /// Print version and default parameter values.
    #[arg(short = 'V', long, action = ArgAction::SetTrue)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a dynamic network from a parameter file.
    Simulate(SimulateArgs),
    /// Detect communities on the average graph over a window.
    Detect(DetectArgs),
    /// Fit the model to one graph with known labels.
    Fit(FitArgs),
    /// Chart the model statistics of a dynamic network.
    Monitor(MonitorArgs),
    /// Estimate average run lengths by simulation.
    Arl(ArlArgs),
    /// Build and monitor the Senate co-voting network.
    Senate(SenateArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    params: PathBuf,
    /// Sequence length; overrides `T` in the parameter file.
    #[arg(long = "T")]
    len: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge-list output file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the pre-change labels here.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long)]
    graph: PathBuf,
    /// First time step of the averaging window (1-based).
    #[arg(long, default_value_t = 1)]
    first: usize,
    /// Last time step of the window; defaults to the end of the sequence.
    #[arg(long)]
    last: Option<usize>,
    #[arg(long)]
    k: usize,
    /// Regularizer; defaults to the mean degree.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Labels output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Time step to fit (1-based).
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Write per-node propensity estimates here.
    #[arg(long)]
    theta_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Style {
    Steady,
    TimeVarying,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sd {
    PerCommunity,
    Pooled,
    Both,
}

impl From<Sd> for SdMode {
    fn from(s: Sd) -> Self {
        match s {
            Sd::PerCommunity => SdMode::PerCommunity,
            Sd::Pooled => SdMode::Pooled,
            Sd::Both => SdMode::Both,
        }
    }
}

#[derive(Args, Debug)]
struct ChartArgs {
    /// Chart kinds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "shewhart,ewma")]
    charts: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "steady")]
    limit_style: Style,
}

impl ChartArgs {
    fn kinds(&self) -> Result<Vec<ChartKind>, Error> {
        let style = match self.limit_style {
            Style::Steady => LimitStyle::SteadyState,
            Style::TimeVarying => LimitStyle::TimeVarying,
        };
        self.charts
            .iter()
            .map(|c| match c.trim().to_ascii_lowercase().as_str() {
                "shewhart" => Ok(ChartKind::Shewhart),
                "ewma" => Ok(ChartKind::Ewma {
                    lambda: self.lambda,
                    style,
                }),
                other => Err(Error::InvalidParams(format!(
                    "unknown chart kind `{other}`"
                ))),
            })
            .collect()
    }
}

#[derive(Args, Debug)]
struct MonitorArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Fixed labels file.
    #[arg(long, conflicts_with = "detect", required_unless_present = "detect")]
    labels: Option<PathBuf>,
    /// Detect this many communities on the Phase I average instead.
    #[arg(long)]
    detect: Option<usize>,
    #[arg(long = "phase1")]
    m: usize,
    #[command(flatten)]
    chart: ChartArgs,
    #[arg(long, value_enum, default_value = "per-community")]
    sd: Sd,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ArlArgs {
    /// Scenario number 0-6.
    #[arg(long, required_unless_present = "all")]
    sim: Option<u8>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Phase I size.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Index of the first changed monitoring graph.
    #[arg(long, default_value_t = 25)]
    t_star: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    workers: Option<usize>,
    /// Run every row of the full results table.
    #[arg(long, conflicts_with = "sim")]
    all: bool,
    /// Output directory for `aarl.csv` and `aarl.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SenateArgs {
    /// Directory of per-Congress roll-call CSV files.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 25)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// `senator_id,party` file mapping independents to a caucus.
    #[arg(long)]
    caucus: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))
}

fn read_sequence(path: &Path) -> Result<DynamicNetwork, Error> {
    read_edge_list(open(path)?)
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let text = fs::read_to_string(&args.params)?;
    let spec = ModelSpec::parse(&text)?;
    let len = args
        .len
        .or(spec.len)
        .ok_or_else(|| Error::InvalidParams("sequence length needed: pass --T or set T".into()))?;
    let mut rng = stream_rng(args.seed, 0);
    let (pre, change) = spec.build(&mut rng)?;
    let seq = simulate_dynamic(&pre, &change, len, spec.redraw, &mut rng)?;
    let mut out = create(&args.out)?;
    write_edge_list(&mut out, &seq)?;
    out.flush()?;
    if let Some(path) = args.labels_out {
        let mut out = create(&path)?;
        write_labels(&mut out, pre.labels())?;
        out.flush()?;
    }
    Ok(())
}

fn detect(args: DetectArgs) -> Result<(), Error> {
    let seq = read_sequence(&args.graph)?;
    let last = args.last.unwrap_or(seq.len());
    let avg = seq.average_graph(args.first, last)?;
    let fit =
        regularized_spectral_clustering(&avg, args.k, args.tau, &mut stream_rng(args.seed, 0))?;
    if !fit.isolated.is_empty() {
        eprintln!(
            "note: {} node(s) without weight joined the largest community",
            fit.isolated.len()
        );
    }
    match args.out {
        Some(path) => {
            let mut out = create(&path)?;
            write_labels(&mut out, &fit.labels)?;
            out.flush()?;
        }
        None => write_labels(std::io::stdout().lock(), &fit.labels)?,
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Error> {
    let seq = read_sequence(&args.graph)?;
    let labels = read_labels(open(&args.labels)?)?;
    if args.t == 0 || args.t > seq.len() {
        return Err(Error::InvalidParams(format!(
            "time {} outside 1..={}",
            args.t,
            seq.len()
        )));
    }
    if labels.n() != seq.n() {
        return Err(Error::Dimension(format!(
            "{} labels for {} nodes",
            labels.n(),
            seq.n()
        )));
    }
    let est = mle(seq.at(args.t), &labels)?;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "community,size,pi_hat,theta_min,theta_max,theta_sd,degenerate"
    )?;
    let sizes = labels.sizes();
    for (r, members) in labels.members().iter().enumerate() {
        let th: Vec<f64> = members.iter().map(|&u| est.theta[u]).collect();
        let min = th.iter().copied().fold(f64::INFINITY, f64::min);
        let max = th.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sd = if th.len() > 1 {
            (th.iter().map(|t| (t - 1.0).powi(2)).sum::<f64>() / (th.len() - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        writeln!(
            out,
            "{},{},{},{min},{max},{sd},{}",
            r + 1,
            sizes[r],
            est.pi[r],
            est.degenerate[r]
        )?;
    }
    writeln!(out)?;
    writeln!(out, "r,s,p_hat")?;
    for r in 0..labels.k() {
        for s in 0..labels.k() {
            writeln!(out, "{},{},{}", r + 1, s + 1, est.p[(r, s)])?;
        }
    }
    if let Some(path) = args.theta_out {
        let mut f = create(&path)?;
        writeln!(f, "node,theta_hat")?;
        for (u, t) in est.theta.iter().enumerate() {
            writeln!(f, "{},{t}", u + 1)?;
        }
        f.flush()?;
    }
    Ok(())
}

fn write_bank(bank: &ChartBank, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let times = bank.times.as_deref();
    for c in &bank.charts {
        let name = c.name();
        let mut f = create(&dir.join(format!("{name}.csv")))?;
        c.chart.write_csv(&mut f, times)?;
        f.flush()?;
        fs::write(
            dir.join(format!("{name}.svg")),
            chart_svg(&c.chart, &name, times),
        )?;
    }
    let mut f = create(&dir.join("signals.csv"))?;
    bank.write_signals_csv(&mut f)?;
    f.flush()?;
    Ok(())
}

fn report_first_signal(bank: &ChartBank) {
    match bank.first_signal() {
        Some(t) => {
            let label = bank
                .times
                .as_ref()
                .and_then(|ts| ts.get(t - 1).cloned())
                .unwrap_or_else(|| t.to_string());
            println!("first signal at t = {label}");
        }
        None => println!("no signal"),
    }
}

fn monitor_cmd(args: MonitorArgs) -> Result<(), Error> {
    let seq = read_sequence(&args.graph)?;
    let config = MonitorConfig {
        m: args.m,
        kinds: args.chart.kinds()?,
        sd_mode: args.sd.into(),
    };
    let labels = match (&args.labels, args.detect) {
        (Some(path), _) => read_labels(open(path)?)?,
        (None, Some(k)) => {
            if args.m < 2 || args.m > seq.len() {
                return Err(Error::Window {
                    first: 1,
                    last: args.m,
                    len: seq.len(),
                });
            }
            let avg = seq.average_graph(1, args.m)?;
            let fit =
                regularized_spectral_clustering(&avg, k, None, &mut stream_rng(args.seed, 0))?;
            fit.labels.require_nonempty()?;
            fs::create_dir_all(&args.out)?;
            let mut f = create(&args.out.join("labels.txt"))?;
            write_labels(&mut f, &fit.labels)?;
            f.flush()?;
            fit.labels
        }
        (None, None) => unreachable!("clap requires one of --labels and --detect"),
    };
    let bank = monitor(&seq, &labels, &config)?;
    write_bank(&bank, &args.out)?;
    report_first_signal(&bank);
    Ok(())
}

fn table_rows() -> Vec<(u8, Option<f64>, Option<usize>)> {
    let mut rows = vec![(0, None, None)];
    for id in [1, 2] {
        rows.extend([0.01, 0.05, 0.10].map(|e| (id, Some(e), None)));
    }
    for id in [3, 4] {
        rows.extend([0.05, 0.10, 0.25].map(|t| (id, Some(t), None)));
    }
    for id in [5, 6] {
        rows.extend([50, 100, 500].map(|n| (id, None, Some(n))));
    }
    rows
}

fn arl(args: ArlArgs) -> Result<(), Error> {
    let rows = if args.all {
        table_rows()
    } else {
        let id = args.sim.expect("clap requires --sim without --all");
        let parameter = match id {
            1 | 2 => args.eps,
            3 | 4 => args.tau,
            _ => None,
        };
        vec![(id, parameter, None)]
    };
    let mut summaries: Vec<ArlSummary> = Vec::new();
    for (id, parameter, n) in rows {
        let mut spec = ScenarioSpec::new(
            Scenario::from_id(id, parameter)?,
            n.unwrap_or(args.n),
            args.m,
            args.reps,
        );
        spec.cap = args.cap;
        spec.t_star = args.t_star;
        log::info!("running scenario {id} {}", spec.parameter_label());
        summaries.push(run_scenario(&spec, args.seed, args.workers)?);
    }
    let table = table_report(&summaries);
    print!("{}", table.text);
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("aarl.csv"), &table.csv)?;
        fs::write(dir.join("aarl.txt"), &table.text)?;
    }
    Ok(())
}

fn senate(args: SenateArgs) -> Result<(), Error> {
    let rollcalls = read_rollcall_dir(&args.input)?;
    let caucus = args
        .caucus
        .as_deref()
        .map(|p| open(p).and_then(parse_caucus))
        .transpose()?;
    let seq = senate_sequence(&rollcalls, args.threshold, caucus.as_ref())?;
    fs::create_dir_all(&args.out)?;
    let mut f = create(&args.out.join("summary.csv"))?;
    seq.write_summary_csv(&mut f)?;
    f.flush()?;
    let config = MonitorConfig {
        m: args.m,
        kinds: vec![ChartKind::Shewhart, ChartKind::ewma(args.lambda)],
        sd_mode: SdMode::PerCommunity,
    };
    let bank = monitor_stats(seq.stat_vectors()?, &config, Some(seq.times.clone()))?;
    write_bank(&bank, &args.out)?;
    report_first_signal(&bank);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command.expect("checked by caller") {
        Command::Simulate(a) => simulate(a),
        Command::Detect(a) => detect(a),
        Command::Fit(a) => fit(a),
        Command::Monitor(a) => monitor_cmd(a),
        Command::Arl(a) => arl(a),
        Command::Senate(a) => senate(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.version {
        println!("netsurv {}", netsurv::VERSION);
        println!(
            "defaults: lambda={DEFAULT_LAMBDA} threshold={DEFAULT_THRESHOLD} cap={DEFAULT_CAP}"
        );
        return ExitCode::SUCCESS;
    }
    if cli.command.is_none() {
        eprintln!("error: a subcommand is required (see `netsurv --help`)");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
