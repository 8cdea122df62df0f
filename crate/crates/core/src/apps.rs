//! Applications of partial quantifier elimination: reachability diameter,
//! interpolation, combinational equivalence checking and property
//! generation.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circuits::{
    add_stutter, encode_gates, tseitin_encode, tseitin_map, unroll, GateOp, Netlist, SignalKind,
    SignalRole, TransitionSystem, VarMap,
};
use crate::cnf::{Clause, CnfError, CnfProblem, Lit, Var};
use crate::pqe::{decide_redundant, take_out, PqeConfig, PqeError, PqeProblem, PqeSolution};
use crate::sasat::solve_under;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AppError {
    #[error(transparent)]
    Pqe(#[from] PqeError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error("k must be at least 1")]
    ZeroDepth,
    #[error("circuit {which} must have exactly one output, found {got}")]
    OutputCount { which: usize, got: usize },
    #[error("circuits have {0} and {1} inputs")]
    InputMismatch(usize, usize),
    #[error("{0}")]
    Invalid(String),
}

impl AppError {
    pub fn is_step_limit(&self) -> bool {
        matches!(self, AppError::Pqe(PqeError::StepLimit))
    }
}

fn sat(problem: &CnfProblem, assumptions: &[Lit], config: PqeConfig) -> Result<Option<Vec<bool>>, AppError> {
    solve_under(problem, assumptions, config.step_limit).map_err(|_| PqeError::StepLimit.into())
}

/// Whether `problem` implies `clause`, by a SAT call on its negation.
fn implies(problem: &CnfProblem, clause: &Clause, config: PqeConfig) -> Result<bool, AppError> {
    let negated: Vec<Lit> = clause.lits().iter().map(|&l| !l).collect();
    Ok(sat(problem, &negated, config)?.is_none())
}

/// Whether the diameter of `ts` is below `k`: the duplicated initial-state
/// clauses are redundant in the `k`-frame unrolling. A system without
/// self-loops is stuttered first.
pub fn diameter_lt(ts: &TransitionSystem, k: usize, config: PqeConfig) -> Result<bool, AppError> {
    if k == 0 {
        return Err(AppError::ZeroDepth);
    }
    let stuttered;
    let ts = if ts.stutters() {
        ts
    } else {
        stuttered = add_stutter(ts);
        &stuttered
    };
    let u = unroll(ts, k, true);
    if u.targets.is_empty() {
        // No initial constraint: every state is initial.
        return Ok(true);
    }
    let p = PqeProblem::new(u.problem, u.targets)?;
    Ok(decide_redundant(&p, config)?)
}

/// `A(X,Y) ∧ B(Y,Z)` over a common variable range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationInstance {
    pub a: Vec<Clause>,
    pub b: Vec<Clause>,
    pub var_count: u32,
}

impl InterpolationInstance {
    pub fn new(var_count: u32, a: Vec<Clause>, b: Vec<Clause>) -> Result<Self, AppError> {
        let out = InterpolationInstance { a, b, var_count };
        out.combined()?;
        Ok(out)
    }

    fn vars(clauses: &[Clause]) -> BTreeSet<Var> {
        clauses.iter().flat_map(|c| c.vars()).collect()
    }

    /// Variables shared by `A` and `B`.
    pub fn shared(&self) -> BTreeSet<Var> {
        let a = Self::vars(&self.a);
        Self::vars(&self.b).intersection(&a).copied().collect()
    }

    /// `A ∧ B` with only the shared variables free.
    pub fn combined(&self) -> Result<CnfProblem, AppError> {
        let shared = self.shared();
        let clauses = self.a.iter().chain(&self.b).cloned().collect();
        let quantified = (1..=self.var_count)
            .map(Var::new)
            .filter(|v| !shared.contains(v));
        Ok(CnfProblem::with_quantified(self.var_count, clauses, quantified)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolantStatus {
    /// `A` implies every clause of the candidate.
    Interpolant,
    CandidateOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpolation {
    pub candidate: Vec<Clause>,
    pub status: InterpolantStatus,
    pub solution: PqeSolution,
}

/// Takes `A` out of `∃(X∪Z).(A∧B)`. The result `A*` is an interpolant when
/// `A ⇒ A*`.
pub fn interpolate(inst: &InterpolationInstance, config: PqeConfig) -> Result<Interpolation, AppError> {
    let problem = inst.combined()?;
    if inst.a.is_empty() {
        return Err(AppError::Invalid("A has no clauses".into()));
    }
    let p = PqeProblem::new(problem, 0..inst.a.len())?;
    let solution = take_out(&p, config)?;
    let a = CnfProblem::new(inst.var_count, inst.a.clone())?;
    let mut status = InterpolantStatus::Interpolant;
    for c in &solution.h {
        if !implies(&a, c, config)? {
            status = InterpolantStatus::CandidateOnly;
            break;
        }
    }
    Ok(Interpolation {
        candidate: solution.h.clone(),
        status,
        solution,
    })
}

/// Two single-output circuits with inputs matched by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqCheckInstance {
    pub m1: Netlist,
    pub m2: Netlist,
}

impl EqCheckInstance {
    pub fn new(m1: Netlist, m2: Netlist) -> Result<EqCheckInstance, AppError> {
        for (which, m) in [(1, &m1), (2, &m2)] {
            if m.outputs().len() != 1 {
                return Err(AppError::OutputCount {
                    which,
                    got: m.outputs().len(),
                });
            }
        }
        if m1.inputs().len() != m2.inputs().len() {
            return Err(AppError::InputMismatch(m1.inputs().len(), m2.inputs().len()));
        }
        Ok(EqCheckInstance {
            m1: with_gate_output(m1),
            m2: with_gate_output(m2),
        })
    }
}

/// Routes an output that is a circuit input through a buffer, so every
/// output has its own variable.
fn with_gate_output(mut nl: Netlist) -> Netlist {
    let out = nl.outputs()[0];
    if nl.signal(out).kind == SignalKind::Input {
        let name = nl.fresh_name("out_buf");
        let inv = nl
            .add_gate(&format!("{name}$0"), GateOp::Not, &[out])
            .expect("fresh name");
        let buf = nl.add_gate(&name, GateOp::Not, &[inv]).expect("fresh name");
        nl.set_outputs(vec![buf]);
    }
    nl
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EqVerdict {
    Equivalent,
    /// An input vector on which the outputs differ.
    Inequivalent(Vec<bool>),
    /// At least one circuit computes a constant.
    ConstantCircuit,
}

/// Encoding of both circuits plus the input equalities.
struct Miter {
    problem: CnfProblem,
    eq: Vec<usize>,
    map1: VarMap,
    map2: VarMap,
    w1: Var,
    w2: Var,
}

fn miter(inst: &EqCheckInstance) -> Miter {
    let (m1, m2) = (&inst.m1, &inst.m2);
    let size1 = (m1.inputs().len() + m1.gates().len()) as u32;
    let map1 = tseitin_map(m1, 0);
    let map2 = tseitin_map(m2, size1);
    let var_count = size1 + (m2.inputs().len() + m2.gates().len()) as u32;
    let mut clauses = Vec::new();
    let mut eq = Vec::new();
    for (&a, &b) in m1.inputs().iter().zip(m2.inputs()) {
        let (x, y) = (map1.var(a), map2.var(b));
        eq.push(clauses.len());
        clauses.push(Clause::new([x.lit(false), y.lit(true)]).expect("distinct"));
        eq.push(clauses.len());
        clauses.push(Clause::new([x.lit(true), y.lit(false)]).expect("distinct"));
    }
    clauses.extend(encode_gates(m1, &|s| map1.var(s)));
    clauses.extend(encode_gates(m2, &|s| map2.var(s)));
    let w1 = map1.var(m1.outputs()[0]);
    let w2 = map2.var(m2.outputs()[0]);
    let quantified = (1..=var_count).map(Var::new).filter(|&v| v != w1 && v != w2);
    let problem =
        CnfProblem::with_quantified(var_count, clauses, quantified).expect("variables in range");
    Miter {
        problem,
        eq,
        map1,
        map2,
        w1,
        w2,
    }
}

fn is_constant(nl: &Netlist, config: PqeConfig) -> Result<bool, AppError> {
    let (problem, map) = tseitin_encode(nl);
    let w = map.var(nl.outputs()[0]);
    for value in [false, true] {
        if sat(&problem, &[w.lit(value)], config)?.is_none() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Takes the input equalities out of `∃Z.(Eq ∧ F)`; the circuits are
/// equivalent iff the solution implies `w′ ≡ w″`.
pub fn eq_check(inst: &EqCheckInstance, config: PqeConfig) -> Result<EqVerdict, AppError> {
    if is_constant(&inst.m1, config)? || is_constant(&inst.m2, config)? {
        return Ok(EqVerdict::ConstantCircuit);
    }
    let m = miter(inst);
    if m.eq.is_empty() {
        // No inputs means both circuits are constant.
        return Ok(EqVerdict::ConstantCircuit);
    }
    let p = PqeProblem::new(m.problem.clone(), m.eq.iter().copied())?;
    let sol = take_out(&p, config)?;
    let h = CnfProblem::new(m.problem.var_count(), sol.h)?;
    let same = [
        Clause::new([m.w1.lit(false), m.w2.lit(true)]).expect("distinct"),
        Clause::new([m.w1.lit(true), m.w2.lit(false)]).expect("distinct"),
    ];
    let mut equivalent = true;
    for c in &same {
        if !implies(&h, c, config)? {
            equivalent = false;
        }
    }
    if equivalent {
        return Ok(EqVerdict::Equivalent);
    }
    for (a, b) in [(true, false), (false, true)] {
        if let Some(model) = sat(&m.problem, &[m.w1.lit(a), m.w2.lit(b)], config)? {
            let inputs = inst
                .m1
                .inputs()
                .iter()
                .map(|&i| model[m.map1.var(i).idx()])
                .collect();
            debug_assert!(inst.m2.inputs().iter().all(|&i| m.map2.var(i).idx() > 0));
            return Ok(EqVerdict::Inequivalent(inputs));
        }
    }
    Err(AppError::Invalid(
        "solution rules out equality but no distinguishing input exists".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Properties {
    /// The Tseitin encoding the clause indices refer to.
    pub encoding: CnfProblem,
    pub map: VarMap,
    /// Clauses over the remaining inputs and the outputs implied by the
    /// encoding.
    pub clauses: Vec<Clause>,
}

/// Takes clause `target` out of `∃X∃V′.F`, where `F` is the Tseitin
/// encoding of `nl`, `X` its internal gates and `V′` the listed inputs
/// (positions in input order).
pub fn prop_gen(
    nl: &Netlist,
    quantified_inputs: &[usize],
    target: usize,
    config: PqeConfig,
) -> Result<Properties, AppError> {
    let (mut encoding, map) = tseitin_encode(nl);
    for &j in quantified_inputs {
        let &id = nl
            .inputs()
            .get(j)
            .ok_or_else(|| AppError::Invalid(format!("input position {j} out of range")))?;
        encoding.set_role(map.var(id), crate::cnf::VarRole::Quantified);
    }
    if target >= encoding.clauses().len() {
        return Err(PqeError::TargetOutOfRange(target).into());
    }
    if !encoding.is_quantified_clause(encoding.clause(target)) {
        return Err(AppError::Invalid(format!(
            "clause {} has no quantified variable",
            target + 1
        )));
    }
    let p = PqeProblem::new(encoding.clone(), [target])?;
    let sol = take_out(&p, config)?;
    debug_assert!(sol
        .h
        .iter()
        .all(|c| c.vars().all(|v| map.roles[signal_of(&map, v)] != SignalRole::Internal)));
    Ok(Properties {
        encoding,
        map,
        clauses: sol.h,
    })
}

fn signal_of(map: &VarMap, v: Var) -> usize {
    map.signal_var
        .iter()
        .position(|&w| w == v)
        .expect("every variable is a signal")
}
