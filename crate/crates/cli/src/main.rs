//! Command-line front end: rule search, verification, cardinality tables,
//! basis dumps and a relative assembly benchmark.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use symcub::bases::{cardinality, index_set, per_degree, BasisKind};
use symcub::geometry::SymmetryMode;
use symcub::rulekit::{self, VerificationReport};
use symcub::solver::{
    enumerate_combinations, seek_rules, MomentSystem, SearchStatus, SolverBasis, SolverConfig,
};
use symcub::symbasis::{monomial_set, orthonormalize};

#[derive(Parser)]
#[command(name = "symcub", version, about = "Symmetric cubature rules on the triangle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Full,
    Rot,
}

impl From<ModeArg> for SymmetryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => SymmetryMode::Full,
            ModeArg::Rot => SymmetryMode::Rotational,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search for cubature rules and write every verified rule to disk.
    Find(FindArgs),
    /// Verify a rule file against exact monomial moments.
    Verify(VerifyArgs),
    /// Print cardinality and per-degree count tables for the basis families.
    Tabulate(TabulateArgs),
    /// Print the index set of a basis family, or the coefficient table of
    /// an orthonormal symmetric basis.
    BasisDump(BasisDumpArgs),
    /// Measure relative residual-assembly throughput of the bases.
    Bench(BenchArgs),
}

#[derive(Args)]
struct FindArgs {
    /// Symmetry mode of the rules to search for.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Polynomial degree of the rules.
    #[arg(long)]
    degree: Option<u32>,
    /// Total number of points.
    #[arg(long)]
    points: usize,
    /// Basis to assemble the moment system in
    /// (f|w|w2|e|m|m2|m3|r|r2|ortho-sym|ortho-rot); default m2 for full
    /// mode, r2 for rotational.
    #[arg(long)]
    basis: Option<String>,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random restarts per orbit combination.
    #[arg(long, default_value_t = 1000)]
    attempts: u64,
    /// Wall-clock budget in seconds for the whole search (0 = unlimited).
    #[arg(long, default_value_t = 0.0)]
    budget: f64,
    /// Output directory for rule files.
    #[arg(long, default_value = "rules")]
    out: PathBuf,
    /// Worker threads; 1 guarantees byte-identical output across runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Convergence tolerance on the search residual.
    #[arg(long, default_value_t = 1e-14)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Rule file to verify.
    path: PathBuf,
    /// Tolerance on monomial residuals.
    #[arg(long, default_value_t = rulekit::DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct TabulateArgs {
    /// Basis family code, or "all".
    #[arg(long, default_value = "all")]
    kind: String,
    /// Largest degree to tabulate.
    #[arg(long, default_value_t = 20)]
    max_degree: u32,
    /// Also enumerate the index sets and check them against the closed forms.
    #[arg(long)]
    check: bool,
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct BasisDumpArgs {
    /// Basis family code (f|w|w2|e|m|m2|m3|r|r2|ortho-sym|ortho-rot).
    #[arg(long)]
    kind: String,
    /// Degree of the basis.
    #[arg(long)]
    degree: u32,
    /// For orthonormal bases: dump the exact rational coefficient table.
    #[arg(long)]
    coeffs: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Polynomial degree.
    #[arg(long)]
    degree: u32,
    /// Total number of points of the trial rules.
    #[arg(long)]
    points: usize,
    /// Symmetry mode.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// RNG seed for the trial parameters.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    csv: bool,
}

fn main() -> ExitCode {
    // table and dump output is meant to be piped; die quietly on SIGPIPE
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Find(args) => find(args),
        Command::Verify(args) => verify(args),
        Command::Tabulate(args) => tabulate(args),
        Command::BasisDump(args) => basis_dump(args),
        Command::Bench(args) => bench(args),
    }
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn find(args: FindArgs) -> ExitCode {
    let mode: SymmetryMode = args.mode.into();
    let basis = match &args.basis {
        None => SolverBasis::default_for(mode),
        Some(code) => match SolverBasis::from_code(code) {
            Some(b) => b,
            None => return fail(format!("unknown basis '{code}'")),
        },
    };
    println!(
        "config: cmd=find mode={mode} degree={} points={} basis={basis} seed={} \
         attempts={} budget={}s jobs={} tolerance={:e} out={}",
        args.degree.map_or("?".to_string(), |d| d.to_string()),
        args.points,
        args.seed,
        args.attempts,
        args.budget,
        args.jobs,
        args.tolerance,
        args.out.display(),
    );

    let combinations = enumerate_combinations(mode, args.points);
    if combinations.is_empty() {
        match mode {
            SymmetryMode::Rotational => println!(
                "no orbit combination exists: {} = 2 (mod 3), but rotational rules \
                 use a centroid (1 point) plus three-point orbits",
                args.points
            ),
            SymmetryMode::Full => println!(
                "no orbit combination exists for {} points under full symmetry",
                args.points
            ),
        }
        return ExitCode::from(2);
    }
    let degree = match args.degree {
        Some(d) => d,
        None => return fail("--degree is required"),
    };
    if !basis.supports_mode(mode) {
        return fail(format!("basis '{basis}' cannot serve {mode}-symmetry rules"));
    }

    let config = SolverConfig {
        basis: Some(basis),
        residual_tol: args.tolerance,
        attempts: args.attempts,
        budget: (args.budget > 0.0).then(|| Duration::from_secs_f64(args.budget)),
        seed: args.seed,
        jobs: args.jobs.max(1),
        ..Default::default()
    };
    let outcome = match seek_rules(mode, degree, args.points, &config) {
        Ok(outcome) => outcome,
        Err(e) => return fail(e),
    };

    for combination in &combinations {
        let count = outcome
            .rules
            .iter()
            .filter(|r| r.combination() == *combination)
            .count();
        println!("combination {combination}: {count} rule(s)");
    }
    if outcome.status == SearchStatus::BudgetExhausted {
        println!("budget exhausted: results are partial");
    }

    if outcome.rules.is_empty() {
        println!("no rules found");
        return ExitCode::from(2);
    }
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return fail(format!("cannot create {}: {e}", args.out.display()));
    }
    for (index, rule) in outcome.rules.iter().enumerate() {
        let report = rulekit::verify(rule, rulekit::DEFAULT_TOLERANCE);
        let name = format!(
            "{mode}-d{degree}-n{}-{}-{index}.txt",
            args.points, report.quality
        );
        let path = args.out.join(&name);
        if let Err(e) = std::fs::write(&path, rulekit::write_rule(rule, report.quality)) {
            return fail(format!("cannot write {}: {e}", path.display()));
        }
        println!(
            "wrote {} (combination {}, attained degree {}, weight ratio {:.3})",
            path.display(),
            rule.combination(),
            report.attained_degree,
            report.weight_ratio,
        );
    }
    ExitCode::SUCCESS
}

fn print_report(report: &VerificationReport) {
    println!("attained degree {}", report.attained_degree);
    println!("quality {}", report.quality);
    println!("weight ratio {:.6}", report.weight_ratio);
    println!("min coordinate {:.3e}", report.min_coordinate);
    for (omega, residual) in report.residual_by_degree.iter().enumerate() {
        println!("degree {omega}: max residual {residual:.3e}");
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    println!(
        "config: cmd=verify path={} tolerance={:e}",
        args.path.display(),
        args.tolerance
    );
    let text = match std::fs::read_to_string(&args.path) {
        Ok(text) => text,
        Err(e) => return fail(format!("cannot read {}: {e}", args.path.display())),
    };
    let (rule, claimed_quality) = match rulekit::read_rule(&text) {
        Ok(pair) => pair,
        Err(e) => return fail(e),
    };
    let report = rulekit::verify(&rule, args.tolerance);
    print_report(&report);
    if report.attained_degree >= rule.degree as i64 && report.quality == claimed_quality {
        println!("ok: attains its declared degree {} with quality {claimed_quality}", rule.degree);
        ExitCode::SUCCESS
    } else {
        println!(
            "mismatch: header claims degree {} quality {claimed_quality}, \
             verification gives degree {} quality {}",
            rule.degree, report.attained_degree, report.quality
        );
        ExitCode::from(2)
    }
}

fn tabulate(args: TabulateArgs) -> ExitCode {
    println!(
        "config: cmd=tabulate kind={} max-degree={} check={}",
        args.kind, args.max_degree, args.check
    );
    let kinds: Vec<BasisKind> = if args.kind == "all" {
        BasisKind::ALL.to_vec()
    } else {
        match BasisKind::from_code(&args.kind) {
            Some(kind) => vec![kind],
            None => return fail(format!("unknown basis family '{}'", args.kind)),
        }
    };
    if args.csv {
        println!("kind,phi,n,m");
    }
    for kind in kinds {
        if !args.csv {
            println!("basis {kind}");
            println!("{:>4} {:>8} {:>8}", "phi", "n", "m");
        }
        for phi in 0..=args.max_degree {
            let n = cardinality(kind, phi);
            let m = per_degree(kind, phi);
            if args.csv {
                println!("{kind},{phi},{n},{m}");
            } else {
                println!("{phi:>4} {n:>8} {m:>8}");
            }
            if args.check {
                let set = index_set(kind, phi);
                if set.len() != n {
                    return fail(format!(
                        "cardinality mismatch for {kind} at degree {phi}: \
                         enumerated {} vs closed form {n}",
                        set.len()
                    ));
                }
                for omega in 0..=phi {
                    let count = set.members().iter().filter(|x| x.degree() == omega).count();
                    if count != per_degree(kind, omega) {
                        return fail(format!(
                            "per-degree mismatch for {kind} at degree {phi}, omega {omega}"
                        ));
                    }
                }
            }
        }
    }
    if args.check {
        println!("check ok: enumerated index sets match the closed forms");
    }
    ExitCode::SUCCESS
}

fn basis_dump(args: BasisDumpArgs) -> ExitCode {
    println!(
        "config: cmd=basis-dump kind={} degree={} coeffs={}",
        args.kind, args.degree, args.coeffs
    );
    match args.kind.as_str() {
        "ortho-sym" | "ortho-rot" => {
            let mode = if args.kind == "ortho-sym" {
                SymmetryMode::Full
            } else {
                SymmetryMode::Rotational
            };
            if !args.coeffs {
                for m in monomial_set(mode, args.degree) {
                    println!("{} {} {}", m.i, m.j, m.k);
                }
                return ExitCode::SUCCESS;
            }
            let basis = match orthonormalize(mode, args.degree) {
                Ok(basis) => basis,
                Err(e) => return fail(e),
            };
            for (row, norm2) in basis.coefficient_rows().iter().zip(basis.norms_squared()) {
                let coeffs: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                println!("{} | {}", coeffs.join(" "), norm2);
            }
            ExitCode::SUCCESS
        }
        code => {
            let kind = match BasisKind::from_code(code) {
                Some(kind) => kind,
                None => return fail(format!("unknown basis family '{code}'")),
            };
            if args.coeffs {
                return fail("--coeffs applies to the orthonormal bases (ortho-sym, ortho-rot)");
            }
            for member in index_set(kind, args.degree).members() {
                println!("{} {}", member.i, member.j);
            }
            ExitCode::SUCCESS
        }
    }
}

fn bench(args: BenchArgs) -> ExitCode {
    let mode: SymmetryMode = args.mode.into();
    println!(
        "config: cmd=bench mode={mode} degree={} points={} seed={}",
        args.degree, args.points, args.seed
    );
    let combinations = enumerate_combinations(mode, args.points);
    let Some(&combination) = combinations.first() else {
        return fail(format!("no orbit combination has {} points", args.points));
    };
    println!("combination {combination}");

    let bases: Vec<SolverBasis> = match mode {
        SymmetryMode::Full => vec![
            SolverBasis::Objective(BasisKind::Full),
            SolverBasis::Objective(BasisKind::Objective),
            SolverBasis::Objective(BasisKind::ObjectiveSwapped),
            SolverBasis::Objective(BasisKind::Even),
            SolverBasis::Objective(BasisKind::Minimal),
            SolverBasis::Objective(BasisKind::MinimalHigh),
            SolverBasis::Objective(BasisKind::MinimalMinMax),
            SolverBasis::OrthoSymmetric,
        ],
        SymmetryMode::Rotational => vec![
            SolverBasis::Objective(BasisKind::Full),
            SolverBasis::Objective(BasisKind::Rotational),
            SolverBasis::Objective(BasisKind::RotationalSwapped),
            SolverBasis::OrthoRotational,
        ],
    };

    // fixed pool of trial parameter vectors shared by every basis
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let reference = match MomentSystem::new(args.degree, combination, bases[0]) {
        Ok(system) => system,
        Err(e) => return fail(e),
    };
    let trials: Vec<nalgebra::DVector<f64>> = (0..64)
        .map(|_| {
            nalgebra::DVector::from_fn(reference.theta_len(), |_, _| rng.gen_range(0.01..0.4))
        })
        .collect();

    let mut results = Vec::new();
    for basis in bases {
        let system = match MomentSystem::new(args.degree, combination, basis) {
            Ok(system) => system,
            Err(e) => return fail(e),
        };
        let start = Instant::now();
        let mut count = 0u64;
        let mut sink = 0.0;
        while start.elapsed() < Duration::from_millis(300) {
            for theta in &trials {
                sink += system.residual(theta).amax();
                count += 1;
            }
        }
        let rate = count as f64 / start.elapsed().as_secs_f64();
        std::hint::black_box(sink);
        results.push((basis, system.rows(), rate));
    }

    let baseline = results[0].2;
    if args.csv {
        println!("basis,rows,assemblies_per_sec,relative");
        for (basis, rows, rate) in &results {
            println!("{basis},{rows},{rate:.1},{:.3}", rate / baseline);
        }
    } else {
        println!("{:>10} {:>6} {:>16} {:>9}", "basis", "rows", "assemblies/s", "relative");
        for (basis, rows, rate) in &results {
            println!(
                "{:>10} {:>6} {:>16.1} {:>9.3}",
                basis.to_string(),
                rows,
                rate,
                rate / baseline
            );
        }
    }
    ExitCode::SUCCESS
}
