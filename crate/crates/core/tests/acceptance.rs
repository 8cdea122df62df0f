//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Runs with a plain `main` so the report is always shown.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pqekit::apps::{
    diameter_lt, eq_check, interpolate, EqCheckInstance, EqVerdict, InterpolantStatus,
    InterpolationInstance,
};
use pqekit::circuits::{add_stutter, GateOp, Netlist, TransitionSystem};
use pqekit::cnf::{cluster_of, cofactor_formula, is_blocked};
use pqekit::dimacs::parse_dimacs_file;
use pqekit::oracle::{bfs_reach, enum_sat, implies, qe_enum, verify_pqe};
use pqekit::pqe::{
    decide_redundant, take_out, AtomicReason, Derivation, PqeConfig, PqeProblem,
};
use pqekit::sasat::{
    build_induction_clause, trace_to_string, SolveOutcome, Solver, SolverConfig,
};
use pqekit::{batch, fuzz, Clause, CnfProblem, Lit, PartialAssignment, Var};

const TRACE_INSTANCE: &str = include_str!("../../../instances/appendix_e.cnf");
const GOLDEN_TRACE: &str = include_str!("../../../instances/appendix_e.trace.jsonl");
const PQE_INSTANCE: &str = include_str!("../../../instances/example1.cnf");
const COUNTER: &str = include_str!("../../../instances/counter.net");
const COUNTER_INIT: &str = include_str!("../../../instances/counter_init.cnf");

const SEED: u64 = 2024;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn c(v: &[i32]) -> Clause {
    Clause::from_dimacs(v)
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn same_set(a: &[Clause], b: &[Clause]) -> bool {
    let key = |cs: &[Clause]| -> BTreeSet<Vec<i32>> { cs.iter().map(|c| c.sorted_dimacs()).collect() };
    key(a) == key(b)
}

fn trace_regression() -> Check {
    let f = parse_dimacs_file(TRACE_INSTANCE).map_err(|e| e.to_string())?.problem;
    let mut solver = Solver::new(&f, SolverConfig::default());
    let SolveOutcome::Done { clause, p, trace } = solver.solve() else {
        return Err("expected unsatisfiable".into());
    };
    let expected = [c(&[-1, 2]), c(&[1, -2]), c(&[-1, 3]), c(&[-2, 4])];
    ensure(same_set(&p.clauses, &expected), || format!("P = {:?}", p.clauses))?;
    ensure(solver.iterations() == 4, || format!("{} iterations", solver.iterations()))?;
    let last = trace.last().ok_or("empty trace")?;
    ensure(last.induction == Some(1), || "induction did not fire on C1".into())?;
    ensure(clause.is_empty(), || format!("induction clause {clause}"))?;
    ensure(trace_to_string(&trace) == GOLDEN_TRACE, || "trace differs from golden file".into())?;
    Ok("4 iterations, P exact, trace byte-identical".into())
}

fn pqe_regression() -> Check {
    let file = parse_dimacs_file(PQE_INSTANCE).map_err(|e| e.to_string())?;
    let targets = file.targets.ok_or("instance lacks targets")?;
    let p = PqeProblem::new(file.problem, targets).map_err(|e| e.to_string())?;
    let sol = take_out(&p, PqeConfig::default()).map_err(|e| e.to_string())?;
    ensure(verify_pqe(&p.problem, &p.targets, &sol.h).map_err(|e| e.to_string())?, || {
        "verify_pqe failed".into()
    })?;
    let y1 = CnfProblem::new(4, vec![c(&[1])]).expect("one variable");
    let h = CnfProblem::new(4, sol.h.clone()).expect("in range");
    let equivalent = sol.h.iter().all(|q| implies(&y1, q).unwrap_or(false))
        && implies(&h, &c(&[1])).unwrap_or(false);
    ensure(equivalent, || format!("H = {:?} is not equivalent to y1", sol.h))?;
    let x3 = Var::new(3);
    let x4 = Var::new(4);
    let resolved = sol.derivation.iter().any(|d| {
        matches!(d, Derivation::Learned { start: Some(0), resolutions, .. }
            if resolutions == &vec![(2, x4), (1, x3)])
    });
    ensure(resolved, || "missing C1 ⊗ C3 on x4 ⊗ C2 on x3".into())?;
    let neg = Lit::from_dimacs(-1).expect("nonzero");
    let pos = Lit::from_dimacs(1).expect("nonzero");
    let implied = sol.derivation.iter().any(|d| {
        matches!(d, Derivation::Atomic { subspace, removals }
            if subspace == &vec![neg] && matches!(removals[0].reason, AtomicReason::Subsumed(_)))
    });
    let blocked = sol.derivation.iter().any(|d| {
        matches!(d, Derivation::Atomic { subspace, removals }
            if subspace == &vec![pos] && removals[0].reason == AtomicReason::Blocked(x3))
    });
    ensure(implied && blocked, || "missing an atomic D-sequent".into())?;
    Ok(format!("H = {{{}}}", sol.h.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
}

fn structural_checks() -> Check {
    let none = BTreeSet::new();
    let f = CnfProblem::all_quantified(
        9,
        vec![c(&[1, 2]), c(&[1, -7, 9]), c(&[1, -3]), c(&[2, 5, 6]), c(&[-1, -2, 4])],
    )
    .expect("in range");
    let cluster = cluster_of(&f, 0, &none).map_err(|e| e.to_string())?;
    ensure(cluster == vec![0, 1, 2, 3], || format!("cluster {cluster:?}"))?;

    let fc1 = vec![c(&[1, -2]), c(&[1, 5]), c(&[-2, -6, 8])];
    let p = vec![c(&[-1, -2]), c(&[1, 2]), c(&[-1, 5]), c(&[2, -6, 8])];
    let k = c(&[-1, 2, -5]);
    let sat = |cs: Vec<Clause>| enum_sat(&CnfProblem::all_quantified(8, cs).expect("in range")).map(|r| r.is_sat());
    ensure(sat(p.clone()) == Ok(true), || "P unsatisfiable".into())?;
    let mut pf = p.clone();
    pf.extend(fc1.clone());
    ensure(sat(pf.clone()) == Ok(true), || "P ∧ Fc1 unsatisfiable".into())?;
    let mut pfk = pf;
    pfk.push(k.clone());
    ensure(sat(pfk) == Ok(false), || "P ∧ Fc1 ∧ K satisfiable".into())?;
    let mut with_k = fc1;
    with_k.push(k.clone());
    let fk = CnfProblem::all_quantified(8, with_k).expect("in range");
    ensure(is_blocked(&fk, &k, Var::new(1)) == Ok(true), || "K not blocked at x1".into())?;

    let f6 = CnfProblem::all_quantified(
        11,
        vec![c(&[-1, 2, 3]), c(&[-1, 5, 7]), c(&[2, -6, 8]), c(&[3, 9])],
    )
    .expect("in range");
    let certs = [c(&[3, 10]), c(&[2, 4]), c(&[4, -6, 8])];
    let lits: Vec<Lit> = [1, -4, 9, -10, -11]
        .iter()
        .map(|&v| Lit::from_dimacs(v).expect("nonzero"))
        .collect();
    let q = PartialAssignment::from_lits(&lits).expect("consistent");
    let b = build_induction_clause(&f6, &certs, 0, &q, &none).ok_or("no induction clause")?;
    ensure(b.same_lits(&c(&[-1, 4, -9, 10])), || format!("induction clause {b}"))?;
    Ok("cluster, certificate satisfiability and induction clause match".into())
}

fn sat_fuzz() -> Check {
    let ids: Vec<u64> = (0..1000).collect();
    let results = batch::map(&ids, |&id| {
        let f = fuzz::sat_instance(SEED, id, 12, 40);
        let outcome = Solver::new(&f, SolverConfig::default()).solve();
        let truth = enum_sat(&f).expect("within guard").is_sat();
        match outcome {
            SolveOutcome::Sat(m) => truth && f.is_satisfied_by_model(&m),
            SolveOutcome::Done { p, .. } => {
                !truth && p.clauses.iter().all(|c| implies(&f, c).expect("within guard"))
            }
            _ => false,
        }
    });
    let bad: Vec<u64> = ids.iter().zip(&results).filter(|(_, ok)| !**ok).map(|(i, _)| *i).collect();
    ensure(bad.is_empty(), || format!("discrepancies on {bad:?}"))?;
    Ok("1000 instances, 0 discrepancies".into())
}

fn dsequent_holds(formula: &CnfProblem, len: usize, subspace: &[Lit], clause: usize) -> bool {
    let f = formula.prefix(len);
    let q = PartialAssignment::from_lits(subspace).expect("consistent subspace");
    let g: BTreeSet<usize> = [clause].into_iter().collect();
    let with = qe_enum(&cofactor_formula(&f, &q)).expect("within guard");
    let without = qe_enum(&cofactor_formula(&f.without(&g), &q)).expect("within guard");
    with == without
}

fn pqe_fuzz() -> Check {
    let ids: Vec<u64> = (0..500).collect();
    let results = batch::map(&ids, |&id| -> Result<usize, String> {
        let p = fuzz::pqe_instance(SEED, id, 10, 25, 2);
        let sol = take_out(&p, PqeConfig::default()).map_err(|e| format!("#{id}: {e}"))?;
        if !verify_pqe(&p.problem, &p.targets, &sol.h).expect("within guard") {
            return Err(format!("#{id}: verify_pqe failed"));
        }
        for d in &sol.dsequents {
            if !dsequent_holds(&sol.formula, d.formula_len, &d.subspace, d.clause) {
                return Err(format!("#{id}: D-sequent for C{} fails", d.clause + 1));
            }
        }
        for added in &sol.formula.clauses()[p.problem.clauses().len()..] {
            if !implies(&p.problem, added).expect("within guard") {
                return Err(format!("#{id}: learned {added} not implied"));
            }
        }
        let truth = qe_enum(&p.problem).expect("within guard")
            == qe_enum(&p.problem.without(&p.targets)).expect("within guard");
        if decide_redundant(&p, PqeConfig::default()).map_err(|e| e.to_string())? != truth {
            return Err(format!("#{id}: decide_redundant disagrees"));
        }
        Ok(sol.dsequents.len())
    });
    let mut dseqs = 0;
    for r in results {
        dseqs += r?;
    }
    Ok(format!("500 instances, {dseqs} D-sequents checked, 0 failures"))
}

fn diameter() -> Check {
    let config = PqeConfig::default();
    let counter = TransitionSystem::from_texts(COUNTER, COUNTER_INIT).map_err(|e| e.to_string())?;
    ensure(diameter_lt(&counter, 3, config) == Ok(false), || "counter: diameter_lt(3) should be false".into())?;
    ensure(diameter_lt(&counter, 4, config) == Ok(true), || "counter: diameter_lt(4) should be true".into())?;
    let ids: Vec<u64> = (0..30).collect();
    let results = batch::map(&ids, |&id| -> Result<(), String> {
        let ts = add_stutter(&fuzz::transition_system(SEED, id));
        for k in 1..=5 {
            let truth = bfs_reach(&ts, k - 1).expect("guard") == bfs_reach(&ts, k).expect("guard");
            let got = diameter_lt(&ts, k, config).map_err(|e| format!("#{id} k={k}: {e}"))?;
            if got != truth {
                return Err(format!("#{id} k={k}: got {got}, oracle {truth}"));
            }
        }
        Ok(())
    });
    results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok("counter 3/4 correct, 30 systems × k=1..5 agree with BFS".into())
}

/// Models of `A*∧B` over `(Y,Z)` are exactly the projections of models of
/// `A∧B`, by enumeration over all variables.
fn extension_property(inst: &InterpolationInstance, candidate: &[Clause]) -> bool {
    let n = inst.var_count as usize;
    let ab: Vec<Clause> = inst.a.iter().chain(&inst.b).cloned().collect();
    let a_vars: BTreeSet<Var> = inst.a.iter().flat_map(|c| c.vars()).collect();
    let x_only: Vec<Var> = a_vars.difference(&inst.shared()).copied().collect();
    let x_mask: u64 = x_only.iter().fold(0, |m, v| m | 1 << (v.idx() - 1));
    let mut projected = BTreeSet::new();
    let mut star = BTreeSet::new();
    for bits in 0..1u64 << n {
        let model: Vec<bool> = (0..=n).map(|v| v > 0 && bits >> (v - 1) & 1 == 1).collect();
        if ab.iter().all(|c| c.satisfied_by_model(&model)) {
            projected.insert(bits & !x_mask);
        }
        let sat_star = candidate.iter().chain(&inst.b).all(|c| c.satisfied_by_model(&model));
        if sat_star && bits & x_mask == 0 {
            star.insert(bits);
        }
    }
    projected == star
}

fn interpolation() -> Check {
    let config = PqeConfig::default();
    let (mut unsat_ok, mut sat_ok, mut skipped) = (0, 0, 0);
    let mut id = 0u64;
    while unsat_ok < 100 || sat_ok < 100 {
        if id >= 20_000 {
            return Err(format!("only {unsat_ok} unsat / {sat_ok} sat interpolants found"));
        }
        let inst = fuzz::interpolation_instance(SEED, id, 12);
        id += 1;
        let all = CnfProblem::new(inst.var_count, inst.a.iter().chain(&inst.b).cloned().collect())
            .expect("in range");
        let satisfiable = enum_sat(&all).expect("guard").is_sat();
        if (satisfiable && sat_ok >= 100) || (!satisfiable && unsat_ok >= 100) {
            continue;
        }
        let r = interpolate(&inst, config).map_err(|e| format!("#{id}: {e}"))?;
        if r.status != InterpolantStatus::Interpolant {
            skipped += 1;
            continue;
        }
        let a = CnfProblem::new(inst.var_count, inst.a.clone()).expect("in range");
        if !r.candidate.iter().all(|q| implies(&a, q).expect("guard")) {
            return Err(format!("#{id}: A does not imply A*"));
        }
        if satisfiable {
            if !extension_property(&inst, &r.candidate) {
                return Err(format!("#{id}: extension property fails"));
            }
            sat_ok += 1;
        } else {
            let mut star_b = r.candidate.clone();
            star_b.extend(inst.b.clone());
            let p = CnfProblem::new(inst.var_count, star_b).expect("in range");
            if enum_sat(&p).expect("guard").is_sat() {
                return Err(format!("#{id}: A* ∧ B satisfiable"));
            }
            unsat_ok += 1;
        }
    }
    Ok(format!("100 unsat + 100 sat interpolants verified ({skipped} candidate-only skipped)"))
}

/// Exhaustive simulation of the miter: an input vector where outputs differ.
fn miter_oracle(m1: &Netlist, m2: &Netlist) -> Option<Vec<bool>> {
    (0..1u64 << m1.inputs().len())
        .map(|mask| m1.input_vector(mask))
        .find(|v| m1.eval_outputs(v) != m2.eval_outputs(v))
}

fn constant_of(nl: &Netlist) -> Netlist {
    let mut out = nl.clone();
    let o = out.outputs()[0];
    let n = out.add_gate("const_n", GateOp::Not, &[o]).expect("fresh");
    let z = out.add_gate("const_z", GateOp::And, &[o, n]).expect("fresh");
    out.set_outputs(vec![z]);
    out
}

fn equivalence() -> Check {
    let config = PqeConfig::default();
    let ids: Vec<u64> = (0..50).collect();
    let results = batch::map(&ids, |&id| -> Result<(), String> {
        let (m, other, mutant) = fuzz::eq_pair(SEED, id, 4);
        if miter_oracle(&m, &other).is_some() {
            return Err(format!("#{id}: generator produced inequivalent pair"));
        }
        let inst = EqCheckInstance::new(m.clone(), other).map_err(|e| e.to_string())?;
        let v = eq_check(&inst, config).map_err(|e| format!("#{id}: {e}"))?;
        if v != EqVerdict::Equivalent {
            return Err(format!("#{id}: equivalent pair reported {v:?}"));
        }
        let inst = EqCheckInstance::new(m.clone(), mutant.clone()).map_err(|e| e.to_string())?;
        match eq_check(&inst, config).map_err(|e| format!("#{id}: {e}"))? {
            EqVerdict::Inequivalent(w) if m.eval_outputs(&w) != mutant.eval_outputs(&w) => {}
            v => return Err(format!("#{id}: mutated pair reported {v:?}")),
        }
        if miter_oracle(&m, &mutant).is_none() {
            return Err(format!("#{id}: miter oracle finds no difference"));
        }
        let constant = constant_of(&m);
        let inst = EqCheckInstance::new(constant.clone(), m.clone()).map_err(|e| e.to_string())?;
        if eq_check(&inst, config) != Ok(EqVerdict::ConstantCircuit) {
            return Err(format!("#{id}: constant circuit not detected"));
        }
        let inst = EqCheckInstance::new(m, constant).map_err(|e| e.to_string())?;
        if eq_check(&inst, config) != Ok(EqVerdict::ConstantCircuit) {
            return Err(format!("#{id}: constant second circuit not detected"));
        }
        Ok(())
    });
    results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok("50 equivalent, 50 mutated, 100 constant checks".into())
}

fn blocked_property() -> Check {
    let ids: Vec<u64> = (0..500).collect();
    let results = batch::map(&ids, |&id| -> Result<usize, String> {
        let p = fuzz::pqe_instance(SEED, id, 10, 25, 2).problem;
        let mut hits = 0;
        for (i, clause) in p.clauses().iter().enumerate() {
            for x in clause.vars().filter(|&v| p.is_quantified(v)) {
                if is_blocked(&p, clause, x) != Ok(true) {
                    continue;
                }
                hits += 1;
                let g: BTreeSet<usize> = [i].into_iter().collect();
                if qe_enum(&p).expect("guard") != qe_enum(&p.without(&g)).expect("guard") {
                    return Err(format!("#{id}: C{} blocked at {x} but not redundant", i + 1));
                }
            }
        }
        Ok(hits)
    });
    let mut hits = 0;
    for r in results {
        hits += r?;
    }
    ensure(hits > 0, || "corpus has no blocked clauses".into())?;
    Ok(format!("{hits} blocked (F, C, x) triples, 0 violations"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("SAT trace regression (appendix_e.cnf)", Duration::from_millis(100), trace_regression),
        ("PQE regression (example1.cnf)", Duration::from_millis(100), pqe_regression),
        ("Clusters, certificates, induction clause", Duration::from_secs(60), structural_checks),
        ("SAT oracle equivalence", Duration::from_secs(60), sat_fuzz),
        ("PQE oracle equivalence", Duration::from_secs(120), pqe_fuzz),
        ("Diameter", Duration::from_secs(60), diameter),
        ("Interpolation", Duration::from_secs(120), interpolation),
        ("Equivalence checking", Duration::from_secs(60), equivalence),
        ("Blocked-clause redundancy", Duration::from_secs(120), blocked_property),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= *limit => Ok(detail),
            Ok(detail) => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(detail) => println!("criterion {}: PASS {name} [{elapsed:.2?}] {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name} [{elapsed:.2?}] {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
