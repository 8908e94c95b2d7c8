//! The `jcsd` command-line front end.
//!
//! [`run`] parses arguments, dispatches to the library and maps failures to
//! exit codes: 0 success, 1 I/O failure or a failed `verify`, 2 usage error,
//! 3 invalid or infeasible problem, 4 numerical non-convergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jcsd_core::sim::{
    constant_composition_sequence, exact_binary_errors, simulate_communication,
    simulate_discrimination,
};
use jcsd_core::{
    chernoff_info, conditional_divergence, empirical_type, finite_n_bounds, mutual_information,
    parse_distribution, parse_problem, region_sweep, Criterion, Distribution, SensingProblem,
    SimReport, TestSpec,
};

pub mod region_csv;
mod verify;

pub use region_csv::{emit_region_csv, parse_region_csv, CsvError, RegionRow};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;

/// Output units for exponents and rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Converts a value in nats to these units.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    MaxError,
    NeymanPearson,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::MaxError => Criterion::MaxError,
            CriterionArg::NeymanPearson => Criterion::NeymanPearson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestArg {
    Map,
    Lrt,
    Np,
}

#[derive(Parser, Debug)]
#[command(name = "jcsd", version, about = "Rate-exponent trade-offs for joint communication and sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ProblemArg {
    /// Problem file.
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args, Debug)]
struct UnitsArg {
    #[arg(long, value_enum, default_value_t = Units::Nats)]
    units: Units,
}

fn dist_arg(s: &str) -> Result<Distribution, String> {
    parse_distribution(s).map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chernoff information, its minimizer and the conditional divergence.
    Exponent {
        #[command(flatten)]
        problem: ProblemArg,
        /// Input distribution, e.g. `0.3,0.7`.
        #[arg(long, value_parser = dist_arg)]
        dist: Distribution,
        #[command(flatten)]
        units: UnitsArg,
    },
    /// Neyman-Pearson (Stein) exponent, plus exact errors when `--n` is given.
    Stein {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_parser = dist_arg)]
        dist: Distribution,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[command(flatten)]
        units: UnitsArg,
    },
    /// Finite-blocklength bounds on the worst error for a codeword type.
    Bounds {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_parser = dist_arg)]
        dist: Distribution,
        #[arg(long)]
        n: usize,
    },
    /// Rate-exponent boundary on a uniform exponent grid.
    Region {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value_t = CriterionArg::MaxError)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// CSV output; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        units: UnitsArg,
    },
    /// Monte-Carlo discrimination errors for a constant-composition codeword.
    SimulateDisc {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_parser = dist_arg)]
        dist: Distribution,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TestArg::Map)]
        test: TestArg,
        /// LRT threshold in nats.
        #[arg(long, required_if_eq("test", "lrt"))]
        tau: Option<f64>,
        #[arg(long, required_if_eq("test", "np"))]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random constant-composition coding error at a given rate.
    SimulateComm {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_parser = dist_arg)]
        dist: Distribution,
        #[arg(long)]
        n: usize,
        /// Rate in nats per symbol.
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare numerical results with the closed forms of the two examples.
    Verify {
        #[command(subcommand)]
        example: Example,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub(crate) struct ExampleParams {
    /// Communication crossover probability.
    #[arg(long, default_value_t = 0.11)]
    pub p: f64,
    /// Sensing crossover probability.
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    /// Cost budget.
    #[arg(long = "B", default_value_t = 1.0)]
    pub budget: f64,
    /// Exponent grid size.
    #[arg(long, default_value_t = 51)]
    pub grid: usize,
}

#[derive(Subcommand, Debug)]
enum Example {
    /// On-off sensing with a BSC communication link.
    Example1(ExampleParams),
    /// BSC(p) against BSC(q) sensing; the region is a rectangle.
    Example2(ExampleParams),
}

#[derive(Debug)]
enum Failure {
    Core(jcsd_core::Error),
    Io(PathBuf, io::Error),
    Csv(CsvError),
}

impl From<jcsd_core::Error> for Failure {
    fn from(e: jcsd_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        Failure::Csv(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(jcsd_core::Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
            Failure::Core(_) => EXIT_INVALID,
            Failure::Io(..) | Failure::Csv(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e @ jcsd_core::Error::NonConvergence { .. }) => {
                format!("{e}; try a coarser grid or report the problem file")
            }
            Failure::Core(e) => e.to_string(),
            Failure::Io(path, e) => format!("{}: {e}", path.display()),
            Failure::Csv(e) => e.to_string(),
        }
    }
}

/// Summary text for stdout, an optional file to write and the exit status.
struct Output {
    summary: String,
    file: Option<(PathBuf, String)>,
    status: u8,
}

fn load_problem(path: &Path) -> Result<SensingProblem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
    Ok(parse_problem(&text)?)
}

/// Writes next to the destination, then renames, so a failed run never
/// leaves a truncated file behind.
fn write_atomically(path: &Path, contents: &str) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Io(path.to_path_buf(), e);
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn exponent_cmd(problem: &SensingProblem, dist: &Distribution, units: Units) -> Result<String, Failure> {
    let c = chernoff_info(problem, dist)?;
    let d = conditional_divergence(problem, dist)?;
    let mut s = String::new();
    let _ = writeln!(s, "units={}", units.suffix());
    let _ = writeln!(s, "chernoff={:?}", units.convert(c.value));
    let _ = writeln!(s, "s0={:?}", c.s0);
    let _ = writeln!(s, "divergence={:?}", units.convert(d));
    Ok(s)
}

fn stein_cmd(
    problem: &SensingProblem,
    dist: &Distribution,
    n: Option<usize>,
    alpha: f64,
    units: Units,
) -> Result<String, Failure> {
    let test = TestSpec::neyman_pearson(alpha)?;
    let d = conditional_divergence(problem, dist)?;
    let mut s = String::new();
    let _ = writeln!(s, "units={}", units.suffix());
    let _ = writeln!(s, "divergence={:?}", units.convert(d));
    if let Some(n) = n {
        let ty = codeword_type(problem, dist, n)?;
        let e = exact_binary_errors(problem, &ty, n, test)?;
        let _ = writeln!(s, "n={n}");
        let _ = writeln!(s, "alpha={alpha:?}");
        let _ = writeln!(s, "eps0={:?}", e.eps0);
        let _ = writeln!(s, "log_eps1={:?}", e.log_eps1);
        let _ = writeln!(s, "emp_exponent={:?}", units.convert(-e.log_eps1 / n as f64));
    }
    Ok(s)
}

/// The type of the constant-composition codeword that approximates `dist`.
fn codeword_type(problem: &SensingProblem, dist: &Distribution, n: usize) -> Result<Distribution, Failure> {
    let seq = constant_composition_sequence(dist, n)?;
    Ok(empirical_type(&seq, problem.input_size())?)
}

fn bounds_cmd(problem: &SensingProblem, dist: &Distribution, n: usize) -> Result<String, Failure> {
    let ty = codeword_type(problem, dist, n)?;
    let b = finite_n_bounds(problem, &ty, n)?;
    let mut s = String::new();
    let _ = writeln!(s, "n={n}");
    let _ = writeln!(s, "type={}", join(ty.probs()));
    let _ = writeln!(s, "upper_bound={:?}", b.upper);
    let _ = writeln!(s, "lower_floor={:?}", b.lower_floor);
    let _ = writeln!(s, "log_upper_bound={:?}", b.log_upper);
    let _ = writeln!(s, "log_lower_floor={:?}", b.log_lower_floor);
    if problem.sensing_output_size() == 2 {
        let e = exact_binary_errors(problem, &ty, n, TestSpec::Map)?;
        let _ = writeln!(s, "exact_max_error={:?}", e.max());
        let _ = writeln!(s, "log_exact_max_error={:?}", e.log_max());
    }
    Ok(s)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

fn region_cmd(
    problem: &SensingProblem,
    criterion: Criterion,
    grid: usize,
    out: Option<PathBuf>,
    units: Units,
) -> Result<Output, Failure> {
    let points = region_sweep(problem, criterion, grid)?;
    let csv = emit_region_csv(&points, units)?;
    Ok(match out {
        None => Output { summary: csv, file: None, status: EXIT_OK },
        Some(path) => {
            let (first, last) = (&points[0], &points[points.len() - 1]);
            let mut s = String::new();
            let _ = writeln!(s, "criterion={criterion}");
            let _ = writeln!(s, "units={}", units.suffix());
            let _ = writeln!(s, "points={}", points.len());
            let _ = writeln!(s, "capacity_cost={:?}", units.convert(first.rate));
            let _ = writeln!(s, "best_exponent={:?}", units.convert(last.exponent));
            let _ = writeln!(s, "rate_at_best_exponent={:?}", units.convert(last.rate));
            let _ = writeln!(s, "wrote={}", path.display());
            Output { summary: s, file: Some((path, csv)), status: EXIT_OK }
        }
    })
}

fn simulate_disc_cmd(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
    trials: u64,
    seed: u64,
    test: TestSpec,
    out: Option<PathBuf>,
) -> Result<Output, Failure> {
    let codeword = constant_composition_sequence(dist, n)?;
    let report = simulate_discrimination(problem, &codeword, test, trials, seed)?;
    let mut s = report.to_key_value();
    if problem.sensing_output_size() == 2 {
        let ty = empirical_type(&codeword, problem.input_size())?;
        let exact = exact_binary_errors(problem, &ty, n, TestSpec::Lrt { tau: report.threshold })?;
        let _ = writeln!(s, "exact_eps0={:?}", exact.eps0);
        let _ = writeln!(s, "exact_eps1={:?}", exact.eps1);
    }
    let file = out.map(|path| {
        (path, format!("{}\n{}\n", SimReport::CSV_HEADER, report.to_csv_row()))
    });
    Ok(Output { summary: s, file, status: EXIT_OK })
}

const COMM_CSV_HEADER: &str = "n,rate,trials,seed,mutual_information,error";

fn simulate_comm_cmd(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
    rate: f64,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<Output, Failure> {
    let mi = mutual_information(problem.comm(), dist)?;
    let error = simulate_communication(problem, dist, n, rate, trials, seed)?;
    let mut s = String::new();
    let _ = writeln!(s, "n={n}");
    let _ = writeln!(s, "rate={rate:?}");
    let _ = writeln!(s, "trials={trials}");
    let _ = writeln!(s, "seed={seed}");
    let _ = writeln!(s, "mutual_information={mi:?}");
    let _ = writeln!(s, "error={error:?}");
    let file = out.map(|path| {
        (path, format!("{COMM_CSV_HEADER}\n{n},{rate:?},{trials},{seed},{mi:?},{error:?}\n"))
    });
    Ok(Output { summary: s, file, status: EXIT_OK })
}

fn test_spec(test: TestArg, tau: Option<f64>, alpha: Option<f64>) -> Result<TestSpec, Failure> {
    Ok(match test {
        TestArg::Map => TestSpec::Map,
        TestArg::Lrt => TestSpec::lrt(tau.expect("clap enforces --tau"))?,
        TestArg::Np => TestSpec::neyman_pearson(alpha.expect("clap enforces --alpha"))?,
    })
}

fn execute(command: Command) -> Result<Output, Failure> {
    let summary = |s: String| Output { summary: s, file: None, status: EXIT_OK };
    match command {
        Command::Exponent { problem, dist, units } => {
            exponent_cmd(&load_problem(&problem.problem)?, &dist, units.units).map(summary)
        }
        Command::Stein { problem, dist, n, alpha, units } => {
            stein_cmd(&load_problem(&problem.problem)?, &dist, n, alpha, units.units).map(summary)
        }
        Command::Bounds { problem, dist, n } => {
            bounds_cmd(&load_problem(&problem.problem)?, &dist, n).map(summary)
        }
        Command::Region { problem, criterion, grid, out, units } => {
            region_cmd(&load_problem(&problem.problem)?, criterion.into(), grid, out, units.units)
        }
        Command::SimulateDisc { problem, dist, n, trials, seed, test, tau, alpha, out } => {
            let test = test_spec(test, tau, alpha)?;
            simulate_disc_cmd(&load_problem(&problem.problem)?, &dist, n, trials, seed, test, out)
        }
        Command::SimulateComm { problem, dist, n, rate, trials, seed, out } => {
            simulate_comm_cmd(&load_problem(&problem.problem)?, &dist, n, rate, trials, seed, out)
        }
        Command::Verify { example } => {
            let (summary, pass) = match example {
                Example::Example1(params) => verify::example_one(params)?,
                Example::Example2(params) => verify::example_two(params)?,
            };
            let status = if pass { EXIT_OK } else { EXIT_FAILURE };
            Ok(Output { summary, file: None, status })
        }
    }
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command).and_then(|output| {
        if let Some((path, contents)) = &output.file {
            write_atomically(path, contents)?;
        }
        Ok(output)
    }) {
        Ok(output) => {
            if write!(out, "{}", output.summary).and_then(|_| out.flush()).is_err() {
                return EXIT_FAILURE;
            }
            output.status
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_map_to_exit_codes() {
        let nc = Failure::Core(jcsd_core::Error::NonConvergence { gap: 1e-3, iterations: 2000 });
        assert_eq!(nc.exit_code(), EXIT_NONCONVERGENCE);
        assert!(nc.message().contains("gap"));
        let invalid = Failure::Core(jcsd_core::Error::InvalidParameter("x".into()));
        assert_eq!(invalid.exit_code(), EXIT_INVALID);
        let io = Failure::Io("f".into(), io::Error::other("boom"));
        assert_eq!(io.exit_code(), EXIT_FAILURE);
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_atomically(&path, "old\n").unwrap();
        write_atomically(&path, "new\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomically(&dir.path().join("missing/a.csv"), "x").is_err());
    }
}
