use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ctsig::report::{self, power_csv_rows, power_rows, sweep_csv_row, POWER_HEADER, SWEEP_HEADER};
use ctsig::{
    estimate_power, index_report, sweep, ContingencyTable, Error, ExactDistribution, Hypothesis, HypothesisSpec,
    McSettings, PowerSettings, TestKind, DEFAULT_BUDGET, DEFAULT_MC_SAMPLES,
};

/// Exact and asymptotic significance indices for contingency tables.
#[derive(Parser)]
#[command(name = "ctsig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every index for one observed table (JSON by default).
    Index(IndexArgs),
    /// Every index for every table of a design (CSV by default).
    Sweep(SweepArgs),
    /// Monte Carlo power of the frequentist tests over a parameter grid.
    Power(PowerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    hypothesis: Option<Hypothesis>,
    /// Row totals of a homogeneity design, e.g. `30,30`.
    #[arg(long, value_delimiter = ',')]
    margins: Option<Vec<u64>>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Sample size of an independence or Hardy–Weinberg design.
    #[arg(long)]
    n: Option<u64>,
    /// One of the ten sweep scenarios.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=10), conflicts_with_all = ["hypothesis", "margins", "rows", "cols", "n"])]
    preset: Option<u32>,
}

impl DesignArgs {
    fn spec(&self) -> ctsig::Result<HypothesisSpec> {
        if let Some(p) = self.preset {
            return report::preset(p);
        }
        let missing = |flag: &str| Error::InvalidArgument(format!("--{flag} is required for this design"));
        match self.hypothesis.ok_or_else(|| missing("hypothesis or --preset"))? {
            Hypothesis::Homogeneity => {
                let margins = self.margins.clone().ok_or_else(|| missing("margins"))?;
                HypothesisSpec::homogeneity(margins, self.cols.unwrap_or(2))
            }
            Hypothesis::Independence => {
                HypothesisSpec::independence(
                    self.rows.unwrap_or(2),
                    self.cols.unwrap_or(2),
                    self.n.ok_or_else(|| missing("n"))?,
                )
            }
            Hypothesis::HardyWeinberg => Ok(HypothesisSpec::hardy_weinberg(self.n.ok_or_else(|| missing("n"))?)),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ExactArgs {
    /// Refuse to enumerate table spaces larger than this.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    max_tables: u128,
    /// Reuse exact distributions stored in this directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl ExactArgs {
    fn distribution(&self, spec: &HypothesisSpec) -> ctsig::Result<ExactDistribution> {
        match &self.cache_dir {
            Some(dir) => ExactDistribution::cached(spec, dir, self.max_tables),
            None => ExactDistribution::build_with_budget(spec, self.max_tables),
        }
    }
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Posterior draws per e-value.
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    mc_samples: u64,
}

impl McArgs {
    fn settings(&self) -> McSettings {
        McSettings {
            seed: self.seed,
            samples: self.mc_samples,
        }
    }
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long, default_value = "homogeneity")]
    hypothesis: Hypothesis,
    /// Cells row by row: `r1c1,r1c2;r2c1,r2c2`. Genotype counts are one row.
    #[arg(long)]
    table: String,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    exact: ExactArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    exact: ExactArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// Tests to run, e.g. `exact_p,chi2`; all applicable ones by default.
    #[arg(long, value_delimiter = ',')]
    tests: Option<Vec<TestKind>>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Points per parameter axis.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Simulated tables per point.
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn open(out: &Option<PathBuf>) -> ctsig::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize + ?Sized>(w: &mut dyn Write, value: &T) -> ctsig::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

fn write_lines(w: &mut dyn Write, header: &str, rows: impl IntoIterator<Item = String>) -> ctsig::Result<()> {
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    Ok(())
}

fn run_index(args: IndexArgs) -> ctsig::Result<()> {
    let table = ContingencyTable::parse(&args.table)?;
    let spec = HypothesisSpec::for_table(args.hypothesis, &table)?;
    let dist = args.exact.distribution(&spec)?;
    let report = index_report(&table, &dist, args.mc.settings(), 0)?;
    let mut w = open(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut *w, &report)?,
        Format::Csv => write_lines(&mut *w, SWEEP_HEADER, [sweep_csv_row(&report)])?,
    }
    w.flush()?;
    Ok(())
}

fn run_sweep(args: SweepArgs) -> ctsig::Result<()> {
    let spec = args.design.spec()?;
    let dist = args.exact.distribution(&spec)?;
    let reports = sweep(&dist, args.mc.settings())?;
    let mut w = open(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut *w, &reports)?,
        Format::Csv => write_lines(&mut *w, SWEEP_HEADER, reports.iter().map(sweep_csv_row))?,
    }
    w.flush()?;
    Ok(())
}

fn run_power(args: PowerArgs) -> ctsig::Result<()> {
    let spec = args.design.spec()?;
    let tests = args.tests.unwrap_or_else(|| TestKind::applicable(&spec));
    let settings = PowerSettings {
        grid: args.grid,
        reps: args.reps,
        alpha: args.alpha,
        seed: args.seed,
    };
    let grid = estimate_power(&spec, &tests, settings)?;
    let mut w = open(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut *w, &power_rows(&grid))?,
        Format::Csv => write_lines(&mut *w, POWER_HEADER, power_csv_rows(&grid))?,
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land here too
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Index(args) => run_index(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Power(args) => run_power(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe (`| head`) is the reader's choice, not a failure
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
