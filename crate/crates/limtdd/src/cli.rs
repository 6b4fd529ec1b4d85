//! Command-line front end: `sim`, `func`, `bench` and `export-dot`.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    dense_simulate, dense_unitary, functionality_with, generator, parse_qasm, simulate_with, Circuit, CircuitError,
    Outcome, SimOptions,
};
use crate::dd::{DdError, Manager, StabMode};

#[derive(Parser, Debug)]
#[command(name = "limtdd", version, about = "Simulate circuits with tensor decision diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a circuit on a basis input.
    Sim(SimArgs),
    /// Build the functionality (unitary) diagram of a circuit.
    Func(RunArgs),
    /// Run many seeded circuits over several configurations.
    Bench(BenchArgs),
    /// Write a diagram as Graphviz DOT.
    ExportDot(DotArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tdd,
    Limtdd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stab {
    Fast,
    Full,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    State,
    Functionality,
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// QASM file.
    #[arg(long, conflicts_with = "gen")]
    pub file: Option<PathBuf>,
    /// Built-in generator: ghz, qft, fig9, remark2, sample, cliffordt.
    #[arg(long = "gen")]
    pub gen: Option<String>,
    /// Register size for generators.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Gate count for random circuits.
    #[arg(long, default_value_t = 400)]
    pub gates: usize,
    /// T-gate probability for random circuits.
    #[arg(long = "t-prob", default_value_t = 0.02)]
    pub t_prob: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct EngineArgs {
    #[arg(long, default_value_t = 8)]
    pub precision: u32,
    #[arg(long, value_enum, default_value_t = Mode::Limtdd)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Stab::Fast)]
    pub stab: Stab,
    /// Reclaim unreachable nodes above this many live nodes.
    #[arg(long)]
    pub gc: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Compare against the dense simulator.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
}

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Basis input written `q[n-1] … q[0]` (default all zeros).
    #[arg(long)]
    pub input: Option<String>,
    /// Print the first k basis amplitudes.
    #[arg(long)]
    pub amplitudes: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long = "gen", default_value = "cliffordt")]
    pub gen: String,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, alias = "n", default_value_t = 10)]
    pub qubits: usize,
    #[arg(long, default_value_t = 400)]
    pub gates: usize,
    #[arg(long = "t-prob", default_value_t = 0.02)]
    pub t_prob: f64,
    /// Comma-separated precisions for limtdd cells.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub precisions: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "tdd,limtdd")]
    pub modes: Vec<Mode>,
    #[arg(long, value_enum, default_value_t = Stab::Fast)]
    pub stab: Stab,
    #[arg(long, value_enum, default_value_t = What::State)]
    pub what: What,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
}

#[derive(Args, Debug, Clone)]
pub struct DotArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = What::State)]
    pub what: What,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub circuit: String,
    pub n_qubits: usize,
    pub n_gates: usize,
    pub precision: u32,
    pub mode: Mode,
    pub stab_mode: Stab,
    pub seed: Option<u64>,
    pub final_nodes: usize,
    pub peak_nodes: usize,
    pub wall_time_ms: f64,
    pub fidelity_vs_oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

/// Column order of CSV output.
pub const CSV_HEADER: &str = "run,seed,mode,precision,final_nodes,peak_nodes,time_ms";

impl RunReport {
    pub fn csv_row(&self, run: usize) -> String {
        format!(
            "{},{},{},{},{},{},{:.3}",
            run,
            self.seed.map_or(String::new(), |s| s.to_string()),
            mode_name(self.mode),
            self.precision,
            self.final_nodes,
            self.peak_nodes,
            self.wall_time_ms
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellSummary {
    pub mode: Mode,
    pub precision: u32,
    pub runs: usize,
    pub mean_peak_nodes: f64,
    pub median_peak_nodes: f64,
    pub mean_final_nodes: f64,
    pub mean_time_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BenchReport {
    pub runs: Vec<RunReport>,
    pub cells: Vec<CellSummary>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {err}")]
    Read { path: String, err: std::io::Error },
    #[error("cannot write {path}: {err}")]
    Write { path: String, err: std::io::Error },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error("verification failed: max error {0:e}")]
    Verify(f64),
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Tdd => "tdd",
        Mode::Limtdd => "limtdd",
    }
}

fn load(src: &SourceArgs) -> Result<(Circuit, String), CliError> {
    match (&src.file, &src.gen) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|err| CliError::Read { path: path.display().to_string(), err })?;
            let c = parse_qasm(&text).map_err(|e| match e {
                CircuitError::Qasm(q) => CliError::Usage(format!("{}:{q}", path.display())),
                other => other.into(),
            })?;
            Ok((c, path.display().to_string()))
        }
        (None, Some(name)) => {
            let c = generator(name, src.n, src.gates, src.t_prob, src.seed.unwrap_or(0))?;
            Ok((c, format!("{name}_{}", src.n)))
        }
        (None, None) => Err(CliError::Usage("one of --file or --gen is required".into())),
    }
}

fn manager(engine: &EngineArgs) -> Result<Manager, CliError> {
    manager_for(engine.mode, engine.precision, engine.stab)
}

fn manager_for(mode: Mode, precision: u32, stab: Stab) -> Result<Manager, CliError> {
    let n = if mode == Mode::Tdd { 0 } else { precision };
    let s = if stab == Stab::Full { StabMode::Full } else { StabMode::Fast };
    Ok(Manager::new(n, s)?)
}

fn effective_precision(mode: Mode, precision: u32) -> u32 {
    if mode == Mode::Tdd {
        0
    } else {
        precision
    }
}

fn report(command: &str, name: String, c: &Circuit, engine: &EngineArgs, seed: Option<u64>, out: &Outcome, ms: f64) -> RunReport {
    RunReport {
        command: command.into(),
        circuit: name,
        n_qubits: c.n_qubits(),
        n_gates: c.len(),
        precision: effective_precision(engine.mode, engine.precision),
        mode: engine.mode,
        stab_mode: engine.stab,
        seed,
        final_nodes: out.final_nodes,
        peak_nodes: out.peak_nodes,
        wall_time_ms: ms,
        fidelity_vs_oracle: None,
        amplitudes: None,
    }
}

fn emit(r: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(r).expect("report serializes"),
        ReportFormat::Csv => format!("{CSV_HEADER}\n{}", r.csv_row(0)),
    }
}

fn cmd_sim(a: &SimArgs) -> Result<String, CliError> {
    let (c, name) = load(&a.run.source)?;
    let n = c.n_qubits();
    let input = a.input.clone().unwrap_or_else(|| "0".repeat(n));
    let mut mgr = manager(&a.run.engine)?;
    let opts = SimOptions { gc_threshold: a.run.engine.gc };
    let t0 = Instant::now();
    let out = simulate_with(&c, &input, &mut mgr, &opts)?;
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut r = report("sim", name, &c, &a.run.engine, a.run.source.seed, &out, ms);
    if let Some(k) = a.amplitudes {
        let k = k.min(1usize << n.min(62));
        let mut amps = Vec::with_capacity(k);
        for idx in 0..k {
            let bits: Vec<u8> = (0..n).map(|i| ((idx >> (n - 1 - i)) & 1) as u8).collect();
            let v = mgr.amplitude_bits(&out.diagram, &bits)?;
            amps.push([v.re, v.im]);
        }
        r.amplitudes = Some(amps);
    }
    if a.run.verify {
        if n > 12 {
            return Err(CliError::Usage(format!("--verify supports at most 12 qubits, got {n}")));
        }
        let dense = dense_simulate(&c, &input)?;
        let t = mgr.to_tensor(&out.diagram)?;
        let err = t.data().iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        r.fidelity_vs_oracle = Some(err);
        if err > 1e-8 {
            println!("{}", emit(&r, a.run.report));
            return Err(CliError::Verify(err));
        }
    }
    Ok(emit(&r, a.run.report))
}

fn cmd_func(a: &RunArgs) -> Result<String, CliError> {
    let (c, name) = load(&a.source)?;
    let n = c.n_qubits();
    let mut mgr = manager(&a.engine)?;
    let opts = SimOptions { gc_threshold: a.engine.gc };
    let t0 = Instant::now();
    let out = functionality_with(&c, &mut mgr, &opts)?;
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut r = report("func", name, &c, &a.engine, a.source.seed, &out, ms);
    if a.verify {
        if n > 6 {
            return Err(CliError::Usage(format!("--verify supports at most 6 qubits for functionality, got {n}")));
        }
        let u = dense_unitary(&c)?;
        let t = mgr.to_tensor(&out.diagram)?;
        let mut err: f64 = 0.0;
        for (k, v) in t.data().iter().enumerate() {
            let (mut row, mut col) = (0, 0);
            for q in 0..n {
                let shift = 2 * q;
                row |= ((k >> (shift + 1)) & 1) << q;
                col |= ((k >> shift) & 1) << q;
            }
            err = err.max((v - u.get(row, col)).norm());
        }
        r.fidelity_vs_oracle = Some(err);
        if err > 1e-8 {
            println!("{}", emit(&r, a.report));
            return Err(CliError::Verify(err));
        }
    }
    Ok(emit(&r, a.report))
}

/// Runs every (mode, precision) cell over `runs` seeded circuits, in parallel.
pub fn bench(a: &BenchArgs) -> Result<BenchReport, CliError> {
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let mut cells: Vec<(Mode, u32)> = Vec::new();
    for &m in &a.modes {
        match m {
            Mode::Tdd => cells.push((m, 0)),
            Mode::Limtdd => cells.extend(a.precisions.iter().map(|&p| (m, p))),
        }
    }
    cells.dedup();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..a.runs).map(move |r| (c, r))).collect();
    let runs: Vec<RunReport> = jobs
        .par_iter()
        .map(|&(ci, run)| -> Result<RunReport, CliError> {
            let (mode, precision) = cells[ci];
            let seed = a.seed.wrapping_add(run as u64);
            let c = generator(&a.gen, a.qubits, a.gates, a.t_prob, seed)?;
            let engine = EngineArgs { precision, mode, stab: a.stab, gc: None };
            let mut mgr = manager(&engine)?;
            let t0 = Instant::now();
            let out = match a.what {
                What::State => simulate_with(&c, &"0".repeat(c.n_qubits()), &mut mgr, &SimOptions::default())?,
                What::Functionality => functionality_with(&c, &mut mgr, &SimOptions::default())?,
            };
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            Ok(report("bench", format!("{}_{}", a.gen, a.qubits), &c, &engine, Some(seed), &out, ms))
        })
        .collect::<Result<_, _>>()?;
    let cells = cells
        .iter()
        .map(|&(mode, precision)| {
            let rs: Vec<&RunReport> = runs.iter().filter(|r| r.mode == mode && r.precision == precision).collect();
            summarize(mode, precision, &rs)
        })
        .collect();
    Ok(BenchReport { runs, cells })
}

fn summarize(mode: Mode, precision: u32, rs: &[&RunReport]) -> CellSummary {
    let k = rs.len().max(1) as f64;
    let mut peaks: Vec<f64> = rs.iter().map(|r| r.peak_nodes as f64).collect();
    peaks.sort_by(|a, b| a.total_cmp(b));
    let median = if peaks.is_empty() {
        0.0
    } else if peaks.len() % 2 == 1 {
        peaks[peaks.len() / 2]
    } else {
        (peaks[peaks.len() / 2 - 1] + peaks[peaks.len() / 2]) / 2.0
    };
    CellSummary {
        mode,
        precision,
        runs: rs.len(),
        mean_peak_nodes: peaks.iter().sum::<f64>() / k,
        median_peak_nodes: median,
        mean_final_nodes: rs.iter().map(|r| r.final_nodes as f64).sum::<f64>() / k,
        mean_time_ms: rs.iter().map(|r| r.wall_time_ms).sum::<f64>() / k,
    }
}

fn cmd_bench(a: &BenchArgs) -> Result<String, CliError> {
    let rep = bench(a)?;
    Ok(match a.report {
        ReportFormat::Json => serde_json::to_string_pretty(&rep).expect("report serializes"),
        ReportFormat::Csv => {
            let mut s = String::from(CSV_HEADER);
            for (i, r) in rep.runs.iter().enumerate() {
                s.push('\n');
                s.push_str(&r.csv_row(i));
            }
            s
        }
    })
}

fn cmd_export_dot(a: &DotArgs) -> Result<String, CliError> {
    let (c, _) = load(&a.source)?;
    let mut mgr = manager(&a.engine)?;
    let out = match a.what {
        What::State => simulate_with(&c, &"0".repeat(c.n_qubits()), &mut mgr, &SimOptions::default())?,
        What::Functionality => functionality_with(&c, &mut mgr, &SimOptions::default())?,
    };
    let dot = mgr.export_dot(&out.diagram)?;
    std::fs::write(&a.output, dot).map_err(|err| CliError::Write { path: a.output.display().to_string(), err })?;
    Ok(format!("wrote {} ({} nodes)", a.output.display(), out.final_nodes))
}

/// Executes a parsed command and returns its standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Sim(a) => cmd_sim(a),
        Command::Func(a) => cmd_func(a),
        Command::Bench(a) => cmd_bench(a),
        Command::ExportDot(a) => cmd_export_dot(a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli)
}
