//! The `weakmeas` command line.
//!
//! Exit codes: 0 success, 1 runtime or I/O error, 2 usage error. All flags
//! are validated before any output file is created.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    fidelity_tradeoff, gaussian_tradeoff_leading_order, naive_spin_inference,
    tomography_from_counts, JointCounts, PostSelection, TradeoffReport,
};
use crate::error::Error;
use crate::measurement::{gaussian_model, rotated_detector, StrongOutcome, WeakModel};
use crate::qubit::PureState;
use crate::records::{read_records_with_lines, write_histogram, write_records, KCounts};
use crate::simulator::{calibrate_detector, chunk_rng, run_experiment_with_model, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "weakmeas", version, about = "Weak x-basis then strong z-basis qubit measurement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate runs and write the `run,k,l` record CSV; prints a JSON summary.
    Simulate(SimulateArgs),
    /// Print the x/z fidelity trade-off of a weak model as JSON.
    Tradeoff(TradeoffArgs),
    /// Calibrate a rotated strong detector and show the naive spin inference.
    Paradox(ParadoxArgs),
    /// Fit the x and z Bloch components to a record CSV.
    Tomography(TomographyArgs),
    /// Export a plot-ready histogram of k from a record CSV.
    Histogram(HistogramArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Average fidelity of the weak measurement.
    #[arg(long = "f-avg")]
    f_avg: f64,
    /// Width of the Gaussian outcome distribution.
    #[arg(long = "k-rms")]
    k_rms: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Tilt of the initial state from |↑⟩, radians.
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record CSV to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TradeoffArgs {
    #[arg(long = "f-avg", conflicts_with = "uniform_f", requires = "k_rms")]
    f_avg: Option<f64>,
    #[arg(long = "k-rms", requires = "f_avg")]
    k_rms: Option<f64>,
    /// Use the two-outcome model with |F| = this value for every outcome.
    #[arg(long = "uniform-f")]
    uniform_f: Option<f64>,
}

#[derive(Debug, Args)]
struct ParadoxArgs {
    /// Angle between the detector axis and z, degrees.
    #[arg(long = "eta-deg", allow_hyphen_values = true)]
    eta_deg: f64,
    #[arg(long)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TomographyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct HistogramArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    bins: usize,
    /// Separate counts for l = 1 and l = 2.
    #[arg(long = "split-by-l")]
    split_by_l: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(Error::Io(e))
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

type CmdResult = std::result::Result<(), Failure>;

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. JSON and stdout CSV go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Tradeoff(a) => cmd_tradeoff(a, out),
        Command::Paradox(a) => cmd_paradox(a, out),
        Command::Tomography(a) => cmd_tomography(a, out),
        Command::Histogram(a) => cmd_histogram(a, out),
    };
    match result.and_then(|()| out.flush().map_err(Failure::from)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> CmdResult {
    serde_json::to_writer_pretty(&mut *out, value).map_err(Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn validated_model(m: &ModelArgs) -> std::result::Result<WeakModel, Failure> {
    gaussian_model(m.f_avg, m.k_rms).map_err(usage)
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn open(path: &Path) -> std::result::Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Runtime(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let config = SimConfig {
        f_avg: a.model.f_avg,
        k_rms: a.model.k_rms,
        alpha: a.alpha,
        runs: a.runs,
        seed: a.seed,
    };
    let model = config.validate().map_err(usage)?;
    let mut file = create(&a.out)?;

    let mut stats = PostSelection::default();
    let records = run_experiment_with_model(&config, &model).inspect(|r| stats.push(r));
    write_records(&mut file, records)?;
    file.flush()?;

    let selected = |l| stats.stats(l).ok();
    let summary = json!({
        "runs": config.runs,
        "seed": config.seed,
        "f_avg": config.f_avg,
        "k_rms": config.k_rms,
        "alpha": config.alpha,
        "counts": {
            "l1": stats.count(StrongOutcome::Up),
            "l2": stats.count(StrongOutcome::Down),
        },
        "mean_k": stats.all.mean(),
        "stderr_k": stats.all.stderr(),
        "post_selected": {
            "l1": selected(StrongOutcome::Up),
            "l2": selected(StrongOutcome::Down),
        },
        "out": a.out.display().to_string(),
    });
    print_json(out, &summary)
}

#[derive(Serialize)]
struct TradeoffOutput {
    model: &'static str,
    #[serde(flatten)]
    report: TradeoffReport,
    paper_fz_approx: f64,
    paper_sumsq_approx: f64,
}

fn cmd_tradeoff(a: TradeoffArgs, out: &mut dyn Write) -> CmdResult {
    let output = match (a.uniform_f, a.f_avg, a.k_rms) {
        (Some(f), None, None) => {
            let model = WeakModel::uniform(f).map_err(usage)?;
            TradeoffOutput {
                model: "uniform",
                report: fidelity_tradeoff(&model),
                paper_fz_approx: (1.0 - f * f).sqrt(),
                paper_sumsq_approx: 1.0,
            }
        }
        (None, Some(f_avg), Some(k_rms)) => {
            let model = gaussian_model(f_avg, k_rms).map_err(usage)?;
            let lead = gaussian_tradeoff_leading_order(f_avg);
            TradeoffOutput {
                model: "gaussian",
                report: fidelity_tradeoff(&model),
                paper_fz_approx: lead.fz,
                paper_sumsq_approx: lead.sum_sq,
            }
        }
        _ => return Err(usage("give either --f-avg and --k-rms, or --uniform-f")),
    };
    print_json(out, &output)
}

fn cmd_paradox(a: ParadoxArgs, out: &mut dyn Write) -> CmdResult {
    if a.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let detector = rotated_detector(a.eta_deg.to_radians()).map_err(usage)?;

    let phase = |state: &PureState, stream: u64| -> std::result::Result<serde_json::Value, Failure> {
        let mut rng = chunk_rng(a.seed, stream);
        let report = calibrate_detector(&detector, state, a.runs, &mut rng)?;
        Ok(json!({
            "n_runs": report.n_runs,
            "count_one": report.count_one,
            "prob_one": report.prob_one,
            "stderr": report.stderr,
            "naive_spin": naive_spin_inference(report.prob_one),
        }))
    };
    let up = phase(&PureState::up(), 0)?;
    let down = phase(&PureState::down(), 1)?;
    let aligned = phase(&detector.axis_state(), 2)?;

    let output = json!({
        "eta_deg": a.eta_deg,
        "runs": a.runs,
        "seed": a.seed,
        "calibration": { "up": up, "down": down },
        "experiment": aligned,
        "resolution": {
            "detector_axis_deg_from_z": a.eta_deg,
            "true_fidelity": 1.0,
            "prob_one_up_exact": detector.prob_one(&PureState::up()),
            "prob_one_down_exact": detector.prob_one(&PureState::down()),
            "summary": format!(
                "strong detector with axis at {} deg from z; reading 1 is perfectly correlated with that axis",
                a.eta_deg
            ),
        },
    });
    print_json(out, &output)
}

fn cmd_tomography(a: TomographyArgs, out: &mut dyn Write) -> CmdResult {
    let model = validated_model(&a.model)?;
    let input = open(&a.input)?;
    let mut counts = JointCounts::new(&model);
    for item in read_records_with_lines(input)? {
        let (line, rec) = item?;
        counts.push(&model, &rec).map_err(|e| Error::Record {
            line,
            message: e.to_string(),
        })?;
    }
    if counts.n == 0 {
        return Err(Error::NoRecords.into());
    }
    let fit = tomography_from_counts(&counts, &model)?;
    let output = json!({
        "x_hat": fit.x_hat,
        "z_hat": fit.z_hat,
        "x_stderr": fit.x_hat.map(|_| fit.x_stderr()),
        "z_stderr": fit.z_hat.map(|_| fit.z_stderr()),
        "unconstrained": { "x": fit.unconstrained[0], "z": fit.unconstrained[1] },
        "y_status": fit.y_status,
        "n_records": counts.n,
        "projected": fit.projected,
        "degenerate": fit.degenerate,
        "assumed_model": { "f_avg": a.model.f_avg, "k_rms": a.model.k_rms },
    });
    print_json(out, &output)
}

fn cmd_histogram(a: HistogramArgs, out: &mut dyn Write) -> CmdResult {
    if a.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    let input = open(&a.input)?;
    let mut counts = KCounts::default();
    for item in read_records_with_lines(input)? {
        counts.push(&item?.1);
    }
    let bins = counts.histogram(a.bins)?;
    match &a.out {
        Some(path) => {
            let mut file = create(path)?;
            write_histogram(&mut file, &bins, a.split_by_l)?;
            file.flush()?;
        }
        None => write_histogram(&mut *out, &bins, a.split_by_l)?,
    }
    Ok(())
}
