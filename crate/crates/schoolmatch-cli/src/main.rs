//! Command-line front end: solve, diagnose, compare, generate, oracle.
//!
//! Exit codes: 0 success, 1 input error, 2 oracle cap exceeded, 3 internal
//! invariant failure.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use schoolmatch::diagnostics::{
    composition, envy_digraph, metrics_report, unimprovable_certificates, unimprovable_students,
    MetricsReport,
};
use schoolmatch::format::{parse_problem, serialize_matching, serialize_problem};
use schoolmatch::generators::{generate, Family, GeneratorSpec};
use schoolmatch::oracle::{classify, pareto_efficient_set, OracleError, OracleLimits};
use schoolmatch::{
    run_cti, run_da, run_rawlsian, run_rm, run_ttc_da, Matching, Problem, StudentId,
};

const ORACLE_CAP_VAR: &str = "SCHOOLMATCH_ORACLE_CAP";

#[derive(Parser)]
#[command(
    name = "schoolmatch",
    version,
    about = "School choice mechanisms, benchmarks, and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism and emit its matching plus a metrics CSV row.
    Solve {
        /// Problem file to solve.
        file: PathBuf,
        #[arg(long, value_enum)]
        mechanism: Mechanism,
        /// Write the matching here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Write the metrics CSV here instead of stdout.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Explain an instance: envy digraph, stuck students, composition, ratios.
    Diagnose {
        /// Problem file to explain.
        file: PathBuf,
    },
    /// Run every mechanism and emit one metrics CSV row per mechanism.
    Compare {
        /// Problem file to solve.
        file: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Produce an instance from one of the deterministic families.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Number of students (random and two-group families).
        #[arg(long, default_value_t = 8)]
        m: u32,
        /// Number of schools (also the size of the worstcase family).
        #[arg(long, default_value_t = 4)]
        n: u32,
        /// Seats per school.
        #[arg(long, default_value_t = 1)]
        quota: u32,
        /// Preference list length; defaults to the school count.
        #[arg(long)]
        list_len: Option<u32>,
        /// Marginalized share of students (two-group family).
        #[arg(long, default_value_t = 0.5)]
        frac_marginalized: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the problem here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively classify a tiny instance's matching space.
    Oracle {
        /// Problem file to classify.
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mechanism {
    Da,
    Cti,
    TtcDa,
    Rm,
    Rawlsian,
}

impl Mechanism {
    fn name(self) -> &'static str {
        match self {
            Mechanism::Da => "da",
            Mechanism::Cti => "cti",
            Mechanism::TtcDa => "ttc-da",
            Mechanism::Rm => "rm",
            Mechanism::Rawlsian => "rawlsian",
        }
    }

    fn all() -> [Mechanism; 5] {
        [
            Mechanism::Da,
            Mechanism::Cti,
            Mechanism::TtcDa,
            Mechanism::Rm,
            Mechanism::Rawlsian,
        ]
    }

    fn solve(self, problem: &Problem) -> Matching {
        match self {
            Mechanism::Da => run_da(problem).matching,
            Mechanism::Cti => run_cti(problem).matching,
            Mechanism::TtcDa => run_ttc_da(problem).matching,
            Mechanism::Rm => run_rm(problem).matching,
            Mechanism::Rawlsian => run_rawlsian(problem).matching,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Worstcase,
    Random,
    TwoGroup,
}

enum Failure {
    Input(String),
    Cap(String),
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure::Input(message.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Input(message))) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Cap(message))) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal invariant failure");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            file,
            mechanism,
            out,
            metrics,
        } => solve(&file, mechanism, out.as_deref(), metrics.as_deref()),
        Command::Diagnose { file } => diagnose(&file),
        Command::Compare { file, out } => compare(&file, out.as_deref()),
        Command::Generate {
            family,
            m,
            n,
            quota,
            list_len,
            frac_marginalized,
            seed,
            out,
        } => run_generate(
            family,
            m,
            n,
            quota,
            list_len,
            frac_marginalized,
            seed,
            out.as_deref(),
        ),
        Command::Oracle { file } => oracle(&file),
    }
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let problem =
        parse_problem(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    if problem.student_count() == 0 {
        return Err(input_error(format!(
            "{}: the instance has no students",
            path.display()
        )));
    }
    Ok(problem)
}

fn emit(target: Option<&Path>, content: &str) -> Result<bool, Failure> {
    match target {
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            Ok(false)
        }
        None => {
            print!("{content}");
            Ok(true)
        }
    }
}

const CSV_HEADER: [&str; 15] = [
    "mechanism",
    "students",
    "schools",
    "assigned",
    "unassigned",
    "total_rank",
    "average_rank",
    "average_rank_decimal",
    "max_rank",
    "blocking_pairs",
    "stable",
    "inequality_ratio",
    "inequality_ratio_decimal",
    "rank_inefficiency_ratio",
    "rank_inefficiency_ratio_decimal",
];

fn rational(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering truncated to at most six fractional digits.
fn decimal(r: Ratio<i64>) -> String {
    let n = *r.numer() as i128;
    let d = *r.denom() as i128;
    let mut out = (n / d).to_string();
    let mut rem = n % d;
    let mut digits = String::new();
    for _ in 0..6 {
        if rem == 0 {
            break;
        }
        rem *= 10;
        let _ = write!(digits, "{}", rem / d);
        rem %= d;
    }
    let digits = digits.trim_end_matches('0');
    if !digits.is_empty() {
        let _ = write!(out, ".{digits}");
    }
    out
}

fn metrics_row(problem: &Problem, name: &str, report: &MetricsReport) -> Vec<String> {
    let assigned = report.rank_vector.len() as u64
        - report
            .rank_vector
            .iter()
            .zip(problem.students())
            .filter(|&(&r, i)| r == problem.null_rank(i))
            .count() as u64;
    vec![
        name.to_string(),
        problem.student_count().to_string(),
        problem.school_count().to_string(),
        assigned.to_string(),
        (problem.student_count() as u64 - assigned).to_string(),
        report.total_rank.to_string(),
        rational(report.average_rank),
        decimal(report.average_rank),
        report.max_rank.to_string(),
        report.blocking_pairs.to_string(),
        report.violations.is_empty().to_string(),
        rational(report.inequality_ratio),
        decimal(report.inequality_ratio),
        rational(report.rank_inefficiency_ratio),
        decimal(report.rank_inefficiency_ratio),
    ]
}

fn csv_table(rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn solve(
    file: &Path,
    mechanism: Mechanism,
    out: Option<&Path>,
    metrics: Option<&Path>,
) -> Result<(), Failure> {
    let problem = load_problem(file)?;
    let matching = mechanism.solve(&problem);
    let report = metrics_report(&problem, &matching);

    let to_stdout = emit(out, &serialize_matching(&problem, &matching))?;
    let csv = csv_table(&[metrics_row(&problem, mechanism.name(), &report)]);
    if metrics.is_none() && to_stdout {
        println!();
    }
    emit(metrics, &csv)?;
    Ok(())
}

fn compare(file: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let problem = load_problem(file)?;
    let rows: Vec<Vec<String>> = Mechanism::all()
        .iter()
        .map(|mechanism| {
            let matching = mechanism.solve(&problem);
            let report = metrics_report(&problem, &matching);
            metrics_row(&problem, mechanism.name(), &report)
        })
        .collect();
    emit(out, &csv_table(&rows))?;
    Ok(())
}

fn name_list<I: IntoIterator<Item = StudentId>>(problem: &Problem, ids: I) -> String {
    let names: Vec<&str> = ids.into_iter().map(|i| problem.student_name(i)).collect();
    if names.is_empty() {
        "(none)".to_string()
    } else {
        names.join(" ")
    }
}

fn diagnose(file: &Path) -> Result<(), Failure> {
    let problem = load_problem(file)?;
    let da = run_da(&problem);
    let mut out = String::new();

    let _ = writeln!(
        out,
        "instance: {} students, {} schools, {} seats",
        problem.student_count(),
        problem.school_count(),
        problem.total_seats()
    );

    let digraph = envy_digraph(&problem, &da.matching);
    let _ = writeln!(
        out,
        "\nenvy digraph over deferred acceptance: {} edges",
        digraph.edge_count()
    );
    for i in problem.students() {
        if !digraph.edges(i).is_empty() {
            let _ = writeln!(
                out,
                "  {} -> {}",
                problem.student_name(i),
                name_list(&problem, digraph.edges(i).iter().copied())
            );
        }
    }
    let components: Vec<String> = digraph
        .nontrivial_sccs()
        .map(|scc| format!("{{{}}}", name_list(&problem, scc.iter().copied())))
        .collect();
    let _ = writeln!(
        out,
        "trading components: {}",
        if components.is_empty() {
            "(none)".to_string()
        } else {
            components.join(" ")
        }
    );

    let unimprovable = unimprovable_students(&problem);
    let _ = writeln!(
        out,
        "\nunimprovable students ({}/{}): {}",
        unimprovable.len(),
        problem.student_count(),
        name_list(&problem, unimprovable.iter().copied())
    );
    let certificates = unimprovable_certificates(&problem);
    let _ = writeln!(
        out,
        "certified without search: {}",
        name_list(&problem, certificates.iter().copied())
    );
    let quiet_schools: Vec<&str> = da
        .trace
        .never_rejected(&problem)
        .into_iter()
        .map(|s| problem.school_name(s))
        .collect();
    let _ = writeln!(
        out,
        "schools that never rejected: {}",
        if quiet_schools.is_empty() {
            "(none)".to_string()
        } else {
            quiet_schools.join(" ")
        }
    );

    match composition(&problem, &da.matching) {
        Ok(table) => {
            let _ = writeln!(
                out,
                "\ncomposition under deferred acceptance (advantaged/marginalized/empty):"
            );
            for row in &table.rows {
                let _ = writeln!(
                    out,
                    "  {}: {}/{}/{} {:?}",
                    problem.school_name(row.school),
                    row.advantaged,
                    row.marginalized,
                    row.empty_seats,
                    row.mix
                );
            }
            let segregated: Vec<&str> = table
                .fully_segregated()
                .into_iter()
                .map(|s| problem.school_name(s))
                .collect();
            let _ = writeln!(
                out,
                "fully segregated: {}",
                if segregated.is_empty() {
                    "(none)".to_string()
                } else {
                    segregated.join(" ")
                }
            );
        }
        Err(_) => {
            let _ = writeln!(out, "\nno group labels; composition skipped");
        }
    }

    let _ = writeln!(out, "\nratios per mechanism:");
    let _ = writeln!(
        out,
        "  {:<10} {:>18} {:>22}",
        "mechanism", "inequality", "rank-inefficiency"
    );
    for mechanism in Mechanism::all() {
        let matching = mechanism.solve(&problem);
        let report = metrics_report(&problem, &matching);
        let _ = writeln!(
            out,
            "  {:<10} {:>18} {:>22}",
            mechanism.name(),
            format!(
                "{} ({})",
                rational(report.inequality_ratio),
                decimal(report.inequality_ratio)
            ),
            format!(
                "{} ({})",
                rational(report.rank_inefficiency_ratio),
                decimal(report.rank_inefficiency_ratio)
            ),
        );
    }

    print!("{out}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_generate(
    family: FamilyArg,
    m: u32,
    n: u32,
    quota: u32,
    list_len: Option<u32>,
    frac_marginalized: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let spec = GeneratorSpec {
        family: match family {
            FamilyArg::Worstcase => Family::Worstcase,
            FamilyArg::Random => Family::Random,
            FamilyArg::TwoGroup => Family::TwoGroup,
        },
        students: m,
        schools: n,
        quota,
        list_len: list_len.unwrap_or(n),
        marginalized_fraction: frac_marginalized,
        seed,
    };
    let problem = generate(&spec).map_err(|e| input_error(e.to_string()))?;
    emit(out, &serialize_problem(&problem))?;
    Ok(())
}

fn oracle_limits() -> Result<OracleLimits, Failure> {
    match std::env::var(ORACLE_CAP_VAR) {
        Ok(raw) => {
            let cap: u64 = raw.parse().map_err(|_| {
                input_error(format!("{ORACLE_CAP_VAR} must be an integer, got {raw:?}"))
            })?;
            Ok(OracleLimits {
                max_students: 64,
                max_matchings: cap,
            })
        }
        Err(std::env::VarError::NotPresent) => Ok(OracleLimits::default()),
        Err(e) => Err(input_error(format!("{ORACLE_CAP_VAR}: {e}"))),
    }
}

fn oracle(file: &Path) -> Result<(), Failure> {
    let problem = load_problem(file)?;
    let limits = oracle_limits()?;
    let cap_failure = |e: OracleError| Failure::Cap(e.to_string());

    let classification = classify(&problem, &limits).map_err(cap_failure)?;
    let efficient = pareto_efficient_set(&problem, &limits).map_err(cap_failure)?;
    let da = run_da(&problem).matching;

    println!("matchings enumerated: {}", classification.matching_count);
    println!("stable matchings: {}", classification.stable.len());
    println!(
        "baseline equals deferred acceptance: {}",
        classification.baseline == da
    );
    println!(
        "stable-dominating matchings: {}",
        classification.stable_dominating.len()
    );
    println!(
        "efficient stable-dominating matchings: {}",
        classification.efficient_stable_dominating.len()
    );
    println!("pareto-efficient matchings: {}", efficient.len());
    println!("minimum total rank: {}", classification.min_total_rank);
    println!("minimum max rank: {}", classification.min_max_rank);
    Ok(())
}
