use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pqekit::apps::{
    diameter_lt, eq_check, interpolate, prop_gen, AppError, EqCheckInstance, EqVerdict,
    InterpolantStatus, InterpolationInstance,
};
use pqekit::circuits::{parse_netlist, Netlist, TransitionSystem};
use pqekit::dimacs::{clause_line, parse_dimacs, parse_dimacs_file};
use pqekit::oracle::{enum_sat, implies, verify_pqe, EnumResult};
use pqekit::pqe::{decide_redundant, take_out, PqeConfig, PqeError, PqeProblem};
use pqekit::sasat::{write_trace, LearnTo, SolveOutcome, Solver, SolverConfig, DEFAULT_STEP_LIMIT};
use pqekit::{batch, fuzz, Clause, CnfProblem, Lit};

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_UNKNOWN: u8 = 30;
const EXIT_USAGE: u8 = 2;
const EXIT_FILE: u8 = 3;

#[derive(Parser)]
#[command(name = "pqekit", version, about = "SAT by literal redundancy, partial quantifier elimination and its applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnDest {
    P,
    F,
}

#[derive(Args)]
struct Limit {
    /// Budget on solver steps.
    #[arg(long)]
    step_limit: Option<u64>,
}

impl Limit {
    fn pqe(&self) -> PqeConfig {
        self.step_limit
            .map_or_else(PqeConfig::default, |step_limit| PqeConfig { step_limit })
    }
}

#[derive(Args)]
struct Targets {
    /// 1-based target clause indices, comma separated; overrides `c targets`.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS formula.
    Sat {
        file: PathBuf,
        #[command(flatten)]
        limit: Limit,
        #[arg(long, value_enum, default_value = "p")]
        learn_to: LearnDest,
        /// Write the iteration trace as JSON Lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Decide a DIMACS formula by enumeration.
    SatOracle { file: PathBuf },
    /// Take target clauses out of the quantified formula; prints H.
    Pqe {
        file: PathBuf,
        #[command(flatten)]
        targets: Targets,
        #[command(flatten)]
        limit: Limit,
    },
    /// Decide whether the target clauses are redundant.
    PqeCheck {
        file: PathBuf,
        #[command(flatten)]
        targets: Targets,
        #[command(flatten)]
        limit: Limit,
    },
    /// Check a solution file against the problem by enumeration.
    VerifyPqe {
        file: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        targets: Targets,
    },
    /// Decide whether the reachability diameter is below k.
    Diameter {
        netlist: PathBuf,
        init: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        limit: Limit,
    },
    /// Take A out of A ∧ B; prints the candidate interpolant.
    Interp {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        limit: Limit,
    },
    /// Check two single-output circuits for equivalence.
    Eqcheck {
        m1: PathBuf,
        m2: PathBuf,
        #[command(flatten)]
        limit: Limit,
    },
    /// Generate properties by taking one clause out of a circuit encoding.
    Propgen {
        netlist: PathBuf,
        /// Inputs to quantify along with the internal gates.
        quantify: Vec<String>,
        #[command(flatten)]
        targets: Targets,
        #[command(flatten)]
        limit: Limit,
    },
    /// Cross-check the solver against enumeration on random formulas.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 12)]
        vars: u32,
    },
}

/// Failure that ends the run with a specific exit code.
struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn usage(message: impl Into<String>) -> Fail {
        Fail {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn file(path: &Path, message: impl std::fmt::Display) -> Fail {
        Fail {
            code: EXIT_FILE,
            message: format!("{}: {message}", path.display()),
        }
    }
}

impl From<AppError> for Fail {
    fn from(e: AppError) -> Fail {
        if e.is_step_limit() {
            unknown()
        } else {
            Fail::usage(e.to_string())
        }
    }
}

impl From<PqeError> for Fail {
    fn from(e: PqeError) -> Fail {
        AppError::from(e).into()
    }
}

fn unknown() -> Fail {
    Fail {
        code: EXIT_UNKNOWN,
        message: "s UNKNOWN".into(),
    }
}

type Run = Result<u8, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::file(path, e))
}

fn read_cnf(path: &Path) -> Result<CnfProblem, Fail> {
    parse_dimacs(&read(path)?).map_err(|e| Fail::file(path, e))
}

fn read_netlist(path: &Path) -> Result<Netlist, Fail> {
    parse_netlist(&read(path)?).map_err(|e| Fail::file(path, e))
}

fn read_pqe(path: &Path, targets: &Targets) -> Result<PqeProblem, Fail> {
    let file = parse_dimacs_file(&read(path)?).map_err(|e| Fail::file(path, e))?;
    let chosen: Vec<usize> = match (&targets.targets, file.targets) {
        (Some(t), _) => {
            if t.contains(&0) {
                return Err(Fail::usage("target indices are 1-based"));
            }
            t.iter().map(|i| i - 1).collect()
        }
        (None, Some(t)) => t,
        (None, None) => return Err(Fail::usage("no targets: use --targets or a `c targets` line")),
    };
    PqeProblem::new(file.problem, chosen).map_err(|e| Fail::usage(e.to_string()))
}

/// Clauses in DIMACS form without a header, as printed by `pqe`.
fn read_fragment(path: &Path, var_count: u32) -> Result<Vec<Clause>, Fail> {
    let text = read(path)?;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('p') {
            continue;
        }
        for token in line.split_whitespace() {
            let value: i32 = token
                .parse()
                .map_err(|_| Fail::file(path, format!("line {}: bad token `{token}`", i + 1)))?;
            if value == 0 {
                let lits = std::mem::take(&mut current);
                let clause = Clause::new(lits)
                    .map_err(|e| Fail::file(path, format!("line {}: {e}", i + 1)))?;
                clauses.push(clause);
                continue;
            }
            if value.unsigned_abs() > var_count {
                return Err(Fail::file(
                    path,
                    format!("line {}: literal {value} exceeds var count {var_count}", i + 1),
                ));
            }
            current.push(Lit::from_dimacs(value).expect("nonzero"));
        }
    }
    if !current.is_empty() {
        return Err(Fail::file(path, "unterminated clause"));
    }
    Ok(clauses)
}

fn model_line(model: &[bool]) -> String {
    let mut out = String::from("v");
    for (v, &b) in model.iter().enumerate().skip(1) {
        out.push_str(&format!(" {}", if b { v as i64 } else { -(v as i64) }));
    }
    out.push_str(" 0");
    out
}

fn sat(file: &Path, limit: &Limit, learn_to: LearnDest, trace: Option<&Path>) -> Run {
    let problem = read_cnf(file)?;
    let config = SolverConfig {
        step_limit: limit.step_limit.unwrap_or(DEFAULT_STEP_LIMIT),
        learn_to: match learn_to {
            LearnDest::P => LearnTo::P,
            LearnDest::F => LearnTo::F,
        },
    };
    let mut solver = Solver::new(&problem, config);
    let outcome = solver.solve();
    if let Some(path) = trace {
        let mut out = fs::File::create(path).map_err(|e| Fail::file(path, e))?;
        write_trace(solver.trace(), &mut out).map_err(|e| Fail::file(path, e))?;
    }
    match outcome {
        SolveOutcome::Sat(model) => {
            println!("s SATISFIABLE");
            println!("{}", model_line(&model));
            Ok(EXIT_SAT)
        }
        SolveOutcome::Done { p, .. } => {
            println!("c certificates {}", p.len());
            for c in &p.clauses {
                println!("c {}", clause_line(c));
            }
            println!("s UNSATISFIABLE");
            Ok(EXIT_UNSAT)
        }
        SolveOutcome::Certificate(_) | SolveOutcome::Unknown => {
            println!("s UNKNOWN");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn sat_oracle(file: &Path) -> Run {
    let problem = read_cnf(file)?;
    match enum_sat(&problem) {
        Ok(EnumResult::Sat(model)) => {
            println!("s SATISFIABLE");
            println!("{}", model_line(&model));
            Ok(EXIT_SAT)
        }
        Ok(EnumResult::Unsat) => {
            println!("s UNSATISFIABLE");
            Ok(EXIT_UNSAT)
        }
        Err(e) => {
            println!("c {e}");
            println!("s UNKNOWN");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn pqe(file: &Path, targets: &Targets, limit: &Limit) -> Run {
    let p = read_pqe(file, targets)?;
    let sol = take_out(&p, limit.pqe())?;
    for step in &sol.derivation {
        println!("c {step}");
    }
    for c in &sol.h {
        println!("{}", clause_line(c));
    }
    Ok(0)
}

fn pqe_check(file: &Path, targets: &Targets, limit: &Limit) -> Run {
    let p = read_pqe(file, targets)?;
    let redundant = decide_redundant(&p, limit.pqe())?;
    println!("{}", if redundant { "redundant" } else { "not redundant" });
    Ok(0)
}

fn verify(file: &Path, solution: &Path, targets: &Targets) -> Run {
    let p = read_pqe(file, targets)?;
    let h = read_fragment(solution, p.problem.var_count())?;
    match verify_pqe(&p.problem, &p.targets, &h) {
        Ok(true) => {
            println!("valid");
            Ok(0)
        }
        Ok(false) => {
            println!("invalid");
            Ok(1)
        }
        Err(e) => Err(Fail::usage(e.to_string())),
    }
}

fn diameter(netlist: &Path, init: &Path, k: usize, limit: &Limit) -> Run {
    let nl = read_netlist(netlist)?;
    let init = read_cnf(init)?;
    let ts = TransitionSystem::new(nl, init).map_err(|e| Fail::file(netlist, e))?;
    let below = diameter_lt(&ts, k, limit.pqe())?;
    println!("diameter < {k}: {below}");
    Ok(0)
}

fn interp(a: &Path, b: &Path, limit: &Limit) -> Run {
    let fa = read_cnf(a)?;
    let fb = read_cnf(b)?;
    let n = fa.var_count().max(fb.var_count());
    let inst = InterpolationInstance::new(n, fa.clauses().to_vec(), fb.clauses().to_vec())?;
    let r = interpolate(&inst, limit.pqe())?;
    let status = match r.status {
        InterpolantStatus::Interpolant => "interpolant",
        InterpolantStatus::CandidateOnly => "candidate",
    };
    let shared: Vec<String> = inst.shared().iter().map(|v| v.index().to_string()).collect();
    println!("c shared {}", shared.join(" "));
    println!("c status {status}");
    if r.status == InterpolantStatus::CandidateOnly {
        for step in &r.solution.derivation {
            println!("c {step}");
        }
    }
    for c in &r.candidate {
        println!("{}", clause_line(c));
    }
    Ok(0)
}

fn eqcheck(m1: &Path, m2: &Path, limit: &Limit) -> Run {
    let inst = EqCheckInstance::new(read_netlist(m1)?, read_netlist(m2)?)?;
    match eq_check(&inst, limit.pqe())? {
        EqVerdict::Equivalent => println!("equivalent"),
        EqVerdict::ConstantCircuit => println!("constant circuit"),
        EqVerdict::Inequivalent(w) => {
            println!("inequivalent");
            let bits: Vec<String> = inst
                .m1
                .inputs()
                .iter()
                .zip(&w)
                .map(|(&i, &b)| format!("{}={}", inst.m1.signal(i).name, u8::from(b)))
                .collect();
            println!("witness {}", bits.join(" "));
        }
    }
    Ok(0)
}

fn propgen(netlist: &Path, quantify: &[String], targets: &Targets, limit: &Limit) -> Run {
    let nl = read_netlist(netlist)?;
    let mut positions = Vec::new();
    for name in quantify {
        let pos = nl
            .lookup(name)
            .and_then(|id| nl.inputs().iter().position(|&i| i == id))
            .ok_or_else(|| Fail::usage(format!("`{name}` is not an input")))?;
        positions.push(pos);
    }
    let target = match targets.targets.as_deref() {
        Some([t]) if *t > 0 => t - 1,
        _ => return Err(Fail::usage("propgen needs exactly one 1-based --targets index")),
    };
    let props = prop_gen(&nl, &positions, target, limit.pqe())?;
    for (id, s) in nl.signals().iter().enumerate() {
        println!("c var {} {}", props.map.var(id).index(), s.name);
    }
    for c in &props.clauses {
        println!("{}", clause_line(c));
    }
    Ok(0)
}

fn fuzz_sat(seed: u64, count: u64, vars: u32) -> Run {
    if vars == 0 {
        return Err(Fail::usage("--vars must be positive"));
    }
    let ids: Vec<u64> = (0..count).collect();
    let results = batch::map(&ids, |&id| {
        let f = fuzz::sat_instance(seed, id, vars, 40);
        let mut solver = Solver::new(&f, SolverConfig::default());
        let outcome = solver.solve();
        let truth = enum_sat(&f).map(|r| r.is_sat());
        let agrees = match (&outcome, truth) {
            (SolveOutcome::Sat(m), Ok(true)) => f.is_satisfied_by_model(m),
            (SolveOutcome::Done { p, .. }, Ok(false)) => p
                .clauses
                .iter()
                .all(|c| implies(&f, c).unwrap_or(false)),
            _ => false,
        };
        (agrees, outcome.is_sat(), outcome.is_unsat())
    });
    let sat = results.iter().filter(|r| r.1).count();
    let unsat = results.iter().filter(|r| r.2).count();
    let bad = results.iter().filter(|r| !r.0).count();
    println!("instances: {count}");
    println!("sat: {sat} unsat: {unsat}");
    println!("discrepancies: {bad}");
    Ok(if bad == 0 { 0 } else { 1 })
}

fn run(cli: Cli) -> Run {
    match &cli.command {
        Command::Sat {
            file,
            limit,
            learn_to,
            trace,
        } => sat(file, limit, *learn_to, trace.as_deref()),
        Command::SatOracle { file } => sat_oracle(file),
        Command::Pqe {
            file,
            targets,
            limit,
        } => pqe(file, targets, limit),
        Command::PqeCheck {
            file,
            targets,
            limit,
        } => pqe_check(file, targets, limit),
        Command::VerifyPqe {
            file,
            solution,
            targets,
        } => verify(file, solution, targets),
        Command::Diameter {
            netlist,
            init,
            k,
            limit,
        } => {
            if *k == 0 {
                return Err(Fail::usage("--k must be at least 1"));
            }
            diameter(netlist, init, *k, limit)
        }
        Command::Interp { a, b, limit } => interp(a, b, limit),
        Command::Eqcheck { m1, m2, limit } => eqcheck(m1, m2, limit),
        Command::Propgen {
            netlist,
            quantify,
            targets,
            limit,
        } => propgen(netlist, quantify, targets, limit),
        Command::Fuzz { seed, count, vars } => fuzz_sat(*seed, *count, *vars),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(fail) => {
            if fail.code == EXIT_UNKNOWN {
                println!("{}", fail.message);
            } else {
                let _ = writeln!(std::io::stderr(), "error: {}", fail.message);
            }
            fail.code
        }
    };
    ExitCode::from(code)
}
