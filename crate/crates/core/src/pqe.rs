//! Partial quantifier elimination with D-sequents.
//!
//! The engine branches on free variables only, in index order. In every
//! node it propagates with the non-target clauses and then tries to prove
//! all targets redundant at once by a sequence of atomic removals
//! (satisfied, subsumed, blocked at a quantified variable, or blocked after
//! removing the partners of a unit target). The bindings used are lifted
//! through reason clauses to decisions, giving a D-sequent. Sibling
//! D-sequents are resolved on the branch variable. When every free
//! variable is assigned, a SAT call closes the node: a model yields a
//! D-sequent directly; unsatisfiability yields a clause over free
//! variables that is added to the formula (and to the solution).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bcp::{propagate, ClauseDb, Propagation};
use crate::cnf::{resolve, Binding};
use crate::cnf::{Clause, ClauseId, CnfProblem, Lit, Origin, PartialAssignment, Tag, Var};
use crate::sasat::{solve_under, DEFAULT_STEP_LIMIT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PqeError {
    #[error("step limit exceeded")]
    StepLimit,
    #[error("no target clauses given")]
    NoTargets,
    #[error("target index {0} is not a clause index")]
    TargetOutOfRange(usize),
    #[error("D-sequents are for different clauses")]
    ClauseMismatch,
    #[error("D-sequents do not assign {0} opposite values")]
    NotOpposite(Var),
    #[error("D-sequents disagree on {0}")]
    Inconsistent(Var),
    #[error("assignment must cover all {0} variables")]
    PartialModel(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PqeConfig {
    /// Budget on search nodes plus internal SAT solver steps.
    pub step_limit: u64,
}

impl Default for PqeConfig {
    fn default() -> PqeConfig {
        PqeConfig {
            step_limit: 10 * DEFAULT_STEP_LIMIT,
        }
    }
}

/// `∃X.F` with a set of target clauses `G` to take out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqeProblem {
    pub problem: CnfProblem,
    pub targets: BTreeSet<usize>,
}

impl PqeProblem {
    pub fn new(
        problem: CnfProblem,
        targets: impl IntoIterator<Item = usize>,
    ) -> Result<PqeProblem, PqeError> {
        let targets: BTreeSet<usize> = targets.into_iter().collect();
        if targets.is_empty() {
            return Err(PqeError::NoTargets);
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= problem.clauses().len()) {
            return Err(PqeError::TargetOutOfRange(t));
        }
        Ok(PqeProblem { problem, targets })
    }
}

/// Redundancy of `clause` in `∃X.F` within `subspace`, where `F` is the
/// first `formula_len` clauses of the (growing) formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSequent {
    pub subspace: Vec<Lit>,
    pub clause: usize,
    pub formula_len: usize,
}

/// Resolves two D-sequents for the same clause on `v`.
pub fn resolve_dsequents(a: &DSequent, b: &DSequent, v: Var) -> Result<DSequent, PqeError> {
    if a.clause != b.clause {
        return Err(PqeError::ClauseMismatch);
    }
    let va = a.subspace.iter().find(|l| l.var() == v);
    let vb = b.subspace.iter().find(|l| l.var() == v);
    match (va, vb) {
        (Some(&x), Some(&y)) if x == !y => {}
        _ => return Err(PqeError::NotOpposite(v)),
    }
    for &l in &a.subspace {
        if l.var() != v && b.subspace.contains(&!l) {
            return Err(PqeError::Inconsistent(l.var()));
        }
    }
    let mut subspace: Vec<Lit> = Vec::new();
    for &l in a.subspace.iter().chain(&b.subspace) {
        if l.var() != v && !subspace.contains(&l) {
            subspace.push(l);
        }
    }
    Ok(DSequent {
        subspace,
        clause: a.clause,
        formula_len: a.formula_len.max(b.formula_len),
    })
}

/// Why a target could be removed in a subspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomicReason {
    Satisfied(Lit),
    /// Subsumed in the subspace by another clause.
    Subsumed(usize),
    /// Blocked at a quantified variable.
    Blocked(Var),
    /// Unit on a quantified variable; blocked there after its resolution
    /// partners were removed.
    LocalBlocked { var: Var, partners: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub clause: usize,
    pub reason: AtomicReason,
}

/// Why a learned clause holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnReason {
    /// An unquantified target, copied to the solution.
    Unquantified,
    /// Derived by resolution from a falsified target.
    TargetConflict,
    /// Negation of a free-variable subspace where the formula is
    /// unsatisfiable, shortened by SAT calls.
    EmptySubspace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Learned {
        index: usize,
        clause: Clause,
        reason: LearnReason,
        /// Starting clause and `(clause, pivot)` resolution steps, 0-based.
        start: Option<usize>,
        resolutions: Vec<(usize, Var)>,
    },
    Atomic {
        subspace: Vec<Lit>,
        removals: Vec<Removal>,
    },
    /// A non-target clause is falsified in the subspace.
    Conflict { subspace: Vec<Lit>, clause: usize },
    /// A model of the formula extends every assignment of the subspace.
    Model { subspace: Vec<Lit> },
    /// The formula without the targets is unsatisfiable in the subspace.
    NoModel { subspace: Vec<Lit> },
    Resolved { subspace: Vec<Lit>, var: Var },
}

fn fmt_subspace(f: &mut fmt::Formatter<'_>, s: &[Lit]) -> fmt::Result {
    let parts: Vec<String> = s
        .iter()
        .map(|l| format!("x{}={}", l.var().index(), u8::from(l.is_positive())))
        .collect();
    write!(f, "({})", parts.join(", "))
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::Learned {
                index,
                clause,
                reason,
                start,
                resolutions,
            } => {
                write!(f, "learn C{} = {}", index + 1, clause)?;
                match reason {
                    LearnReason::Unquantified => write!(f, " [unquantified target]"),
                    LearnReason::EmptySubspace => write!(f, " [no model in subspace]"),
                    LearnReason::TargetConflict => {
                        write!(f, " [C{}", start.map_or(0, |s| s + 1))?;
                        for (c, v) in resolutions {
                            write!(f, " ⊗ C{} on {}", c + 1, v)?;
                        }
                        write!(f, "]")
                    }
                }
            }
            Derivation::Atomic { subspace, removals } => {
                write!(f, "dseq ")?;
                fmt_subspace(f, subspace)?;
                for r in removals {
                    write!(f, " C{}: ", r.clause + 1)?;
                    match &r.reason {
                        AtomicReason::Satisfied(l) => write!(f, "satisfied by {l}")?,
                        AtomicReason::Subsumed(d) => write!(f, "implied by C{}", d + 1)?,
                        AtomicReason::Blocked(v) => write!(f, "blocked at {v}")?,
                        AtomicReason::LocalBlocked { var, partners } => {
                            let ps: Vec<String> =
                                partners.iter().map(|p| format!("C{}", p + 1)).collect();
                            write!(f, "blocked at {var} after removing {}", ps.join(" "))?
                        }
                    }
                    write!(f, ";")?;
                }
                Ok(())
            }
            Derivation::Conflict { subspace, clause } => {
                write!(f, "dseq ")?;
                fmt_subspace(f, subspace)?;
                write!(f, " C{} falsified", clause + 1)
            }
            Derivation::Model { subspace } => {
                write!(f, "dseq ")?;
                fmt_subspace(f, subspace)?;
                write!(f, " satisfiable")
            }
            Derivation::NoModel { subspace } => {
                write!(f, "dseq ")?;
                fmt_subspace(f, subspace)?;
                write!(f, " unsatisfiable without targets")
            }
            Derivation::Resolved { subspace, var } => {
                write!(f, "dseq ")?;
                fmt_subspace(f, subspace)?;
                write!(f, " resolved on {var}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqeSolution {
    /// The solution `H`: unquantified clauses added to the formula.
    pub h: Vec<Clause>,
    pub derivation: Vec<Derivation>,
    /// Per-target D-sequents, in emission order.
    pub dsequents: Vec<DSequent>,
    /// The formula at the end, input clauses followed by learned ones.
    pub formula: CnfProblem,
    /// Targets that were quantified (the rest went to `H` directly).
    pub quantified_targets: Vec<usize>,
    pub root: RootProof,
}

/// How the top node was closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootProof {
    /// No quantified targets.
    Trivial,
    Conflict,
    Atomic(Vec<Removal>),
    Model(Vec<bool>),
    Learned,
    Branched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    TakeOut,
    Decide,
}

enum Node {
    Sequent(Vec<Lit>),
    NotRedundant,
}

type Step<T> = Result<T, PqeError>;

struct Engine {
    mode: Mode,
    config: PqeConfig,
    base: CnfProblem,
    db: ClauseDb,
    is_target: Vec<bool>,
    targets: Vec<usize>,
    free: Vec<Var>,
    trail: PartialAssignment,
    h: Vec<Clause>,
    derivation: Vec<Derivation>,
    dsequents: Vec<DSequent>,
    steps: u64,
    root: Option<RootProof>,
}

impl Engine {
    fn new(p: &PqeProblem, mode: Mode, config: PqeConfig) -> Engine {
        let problem = &p.problem;
        let mut db = ClauseDb::new(problem.var_count(), &[]);
        let mut is_target = Vec::new();
        let mut targets = Vec::new();
        let mut h = Vec::new();
        let mut derivation = Vec::new();
        for (i, c) in problem.clauses().iter().enumerate() {
            let target = p.targets.contains(&i);
            let quantified = problem.is_quantified_clause(c);
            if target && !quantified {
                h.push(c.clone());
                derivation.push(Derivation::Learned {
                    index: i,
                    clause: c.clone(),
                    reason: LearnReason::Unquantified,
                    start: None,
                    resolutions: Vec::new(),
                });
            }
            let t = target && quantified;
            db.push_f(c.clone(), !t);
            is_target.push(t);
            if t {
                targets.push(i);
            }
        }
        Engine {
            mode,
            config,
            base: problem.clone(),
            db,
            is_target,
            targets,
            free: problem.free(),
            trail: PartialAssignment::new(),
            h,
            derivation,
            dsequents: Vec::new(),
            steps: 0,
            root: None,
        }
    }

    fn formula(&self) -> CnfProblem {
        self.base.with_clauses(self.db.f().to_vec())
    }

    fn tick(&mut self, n: u64) -> Step<()> {
        self.steps += n;
        if self.steps > self.config.step_limit {
            Err(PqeError::StepLimit)
        } else {
            Ok(())
        }
    }

    fn run(&mut self) -> Step<bool> {
        if self.targets.is_empty() {
            self.root = Some(RootProof::Trivial);
            return Ok(true);
        }
        match self.node(None, true)? {
            Node::Sequent(s) => {
                debug_assert!(s.is_empty(), "root D-sequent has an empty subspace");
                Ok(true)
            }
            Node::NotRedundant => Ok(false),
        }
    }

    fn set_root(&mut self, is_root: bool, proof: RootProof) {
        if is_root {
            self.root = Some(proof);
        }
    }

    fn node(&mut self, decision: Option<Lit>, is_root: bool) -> Step<Node> {
        self.tick(1)?;
        let start = self.trail.len();
        let decisions: Vec<Lit> = decision.into_iter().collect();
        let mut result = propagate(&self.db, &mut self.trail, &decisions)
            .expect("branch variable is unassigned");
        if let Propagation::Conflict(ClauseId::Formula(t)) = result {
            if self.is_target[t] {
                if let Some(d) = self.falsified_non_target() {
                    result = Propagation::Conflict(ClauseId::Formula(d));
                }
            }
        }
        let out = match result {
            Propagation::Conflict(ClauseId::Formula(c)) if !self.is_target[c] => {
                let vars: BTreeSet<Var> = self.db.f()[c].vars().collect();
                let subspace = self.lift(&vars);
                self.derivation.push(Derivation::Conflict {
                    subspace: subspace.clone(),
                    clause: c,
                });
                self.set_root(is_root, RootProof::Conflict);
                self.emit(&subspace);
                Node::Sequent(subspace)
            }
            Propagation::Conflict(ClauseId::Formula(t)) => {
                let target = self.db.f()[t].clone();
                let a = self.analyze(&target);
                let (learned, steps) = a;
                let resolutions = steps
                    .iter()
                    .map(|(id, v)| match id {
                        ClauseId::Formula(i) => (*i, *v),
                        ClauseId::Cert(_) => unreachable!("no certificates in PQE"),
                    })
                    .collect();
                let mut clause = learned;
                if self.mode == Mode::Decide {
                    let assumptions: Vec<Lit> = clause.lits().iter().map(|&l| !l).collect();
                    match self.check_without_targets(&assumptions)? {
                        Some(_) => {
                            self.trail.truncate(start);
                            return Ok(Node::NotRedundant);
                        }
                        None => clause = self.minimize(&assumptions, true)?,
                    }
                }
                self.learn(clause, LearnReason::TargetConflict, Some(t), resolutions);
                self.set_root(is_root, RootProof::Learned);
                self.close_after_learning()
            }
            Propagation::Conflict(ClauseId::Cert(_)) => unreachable!("no certificates in PQE"),
            Propagation::NoConflict => {
                if let Some((used, removals)) = self.joint_reduce() {
                    let subspace = self.lift(&used);
                    self.derivation.push(Derivation::Atomic {
                        subspace: subspace.clone(),
                        removals: removals.clone(),
                    });
                    self.set_root(is_root, RootProof::Atomic(removals));
                    self.emit(&subspace);
                    Node::Sequent(subspace)
                } else if let Some(&v) = self.free.iter().find(|v| !self.trail.is_assigned(**v)) {
                    self.set_root(is_root, RootProof::Branched);
                    match self.branch(v)? {
                        Some(n) => n,
                        None => {
                            self.trail.truncate(start);
                            return Ok(Node::NotRedundant);
                        }
                    }
                } else {
                    match self.leaf(is_root)? {
                        Some(n) => n,
                        None => {
                            self.trail.truncate(start);
                            return Ok(Node::NotRedundant);
                        }
                    }
                }
            }
        };
        self.trail.truncate(start);
        Ok(out)
    }

    fn branch(&mut self, v: Var) -> Step<Option<Node>> {
        let s0 = match self.node(Some(v.lit(false)), false)? {
            Node::Sequent(s) => s,
            Node::NotRedundant => return Ok(None),
        };
        if !s0.iter().any(|l| l.var() == v) {
            return Ok(Some(Node::Sequent(s0)));
        }
        let s1 = match self.node(Some(v.lit(true)), false)? {
            Node::Sequent(s) => s,
            Node::NotRedundant => return Ok(None),
        };
        if !s1.iter().any(|l| l.var() == v) {
            return Ok(Some(Node::Sequent(s1)));
        }
        let mut subspace: Vec<Lit> = Vec::new();
        for &l in s0.iter().chain(&s1) {
            if l.var() != v && !subspace.contains(&l) {
                subspace.push(l);
            }
        }
        subspace.sort_by_key(|l| self.trail.position(l.var()));
        self.derivation.push(Derivation::Resolved {
            subspace: subspace.clone(),
            var: v,
        });
        self.emit(&subspace);
        Ok(Some(Node::Sequent(subspace)))
    }

    /// All free variables are assigned and no atomic proof was found.
    fn leaf(&mut self, is_root: bool) -> Step<Option<Node>> {
        let decisions: Vec<Lit> = self
            .trail
            .bindings()
            .iter()
            .filter(|b| self.base.is_free(b.lit.var()))
            .map(|b| b.lit)
            .collect();
        let current = self.formula();
        let found = self.sat(&current, &decisions)?;
        if let Some(model) = found {
            let mut used = BTreeSet::new();
            for c in current.clauses() {
                let witness = c
                    .lits()
                    .iter()
                    .filter(|l| l.eval(model[l.var().idx()]))
                    .min_by_key(|l| (self.base.is_free(l.var()), l.var()))
                    .expect("model satisfies every clause");
                if self.base.is_free(witness.var()) {
                    used.insert(witness.var());
                }
            }
            let subspace = self.lift(&used);
            self.derivation.push(Derivation::Model {
                subspace: subspace.clone(),
            });
            self.set_root(is_root, RootProof::Model(model));
            self.emit(&subspace);
            return Ok(Some(Node::Sequent(subspace)));
        }
        if self.check_without_targets(&decisions)?.is_none() {
            // Unsatisfiable without the targets, so the targets add nothing.
            let core = self.minimize(&decisions, true)?;
            let vars: BTreeSet<Var> = core.vars().collect();
            let subspace = self.lift(&vars);
            self.derivation.push(Derivation::NoModel {
                subspace: subspace.clone(),
            });
            self.set_root(is_root, RootProof::Conflict);
            self.emit(&subspace);
            return Ok(Some(Node::Sequent(subspace)));
        }
        if self.mode == Mode::Decide {
            return Ok(None);
        }
        let clause = self.minimize(&decisions, false)?;
        self.learn(clause, LearnReason::EmptySubspace, None, Vec::new());
        self.set_root(is_root, RootProof::Learned);
        Ok(Some(self.close_after_learning()))
    }

    /// After a learned clause falsified by the trail, the targets are
    /// removed by subsumption; the falsified clause itself is the fallback.
    fn close_after_learning(&mut self) -> Node {
        if let Some((used, removals)) = self.joint_reduce() {
            let subspace = self.lift(&used);
            self.derivation.push(Derivation::Atomic {
                subspace: subspace.clone(),
                removals,
            });
            self.emit(&subspace);
            return Node::Sequent(subspace);
        }
        let last = self.db.f().len() - 1;
        let vars: BTreeSet<Var> = self.db.f()[last].vars().collect();
        let subspace = self.lift(&vars);
        self.derivation.push(Derivation::Conflict {
            subspace: subspace.clone(),
            clause: last,
        });
        self.emit(&subspace);
        Node::Sequent(subspace)
    }

    /// Resolves a falsified clause with reasons in reverse trail order until
    /// only free variables remain.
    fn analyze(&self, clause: &Clause) -> (Clause, Vec<(ClauseId, Var)>) {
        let mut current = clause.clone();
        let mut steps = Vec::new();
        loop {
            let latest = current
                .lits()
                .iter()
                .filter(|l| !self.base.is_free(l.var()))
                .max_by_key(|l| self.trail.position(l.var()));
            let Some(&lit) = latest else {
                return (current, steps);
            };
            let Some(Binding {
                tag: Tag::Propagated(reason),
                ..
            }) = self.trail.binding_of(lit.var()).copied()
            else {
                unreachable!("quantified variables are only propagated");
            };
            current = resolve(&current, self.db.get(reason), lit.var())
                .expect("reason clause clashes only on the pivot");
            steps.push((reason, lit.var()));
        }
    }

    fn sat(&mut self, problem: &CnfProblem, assumptions: &[Lit]) -> Step<Option<Vec<bool>>> {
        let budget = self.config.step_limit.saturating_sub(self.steps).max(1);
        let r = solve_under(problem, assumptions, budget).map_err(|_| PqeError::StepLimit)?;
        self.tick(1)?;
        Ok(r)
    }

    fn without_targets(&self) -> CnfProblem {
        let clauses = self
            .db
            .f()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_target[*i])
            .map(|(_, c)| c.clone())
            .collect();
        self.base.with_clauses(clauses)
    }

    fn check_without_targets(&mut self, assumptions: &[Lit]) -> Step<Option<Vec<bool>>> {
        let rest = self.without_targets();
        self.sat(&rest, assumptions)
    }

    fn is_propagated(&self, v: Var) -> bool {
        self.trail
            .binding_of(v)
            .is_some_and(|b| b.tag != Tag::Decision)
    }

    /// Drops assumptions one at a time while the formula (or the formula
    /// without targets) stays unsatisfiable; returns the negated remainder.
    /// Against the full formula, propagated literals are kept: they tie the
    /// learned clause to the clauses that forced them.
    fn minimize(&mut self, assumptions: &[Lit], without_targets: bool) -> Step<Clause> {
        let problem = if without_targets {
            self.without_targets()
        } else {
            self.formula()
        };
        let mut keep: Vec<Lit> = assumptions.to_vec();
        let mut i = 0;
        while i < keep.len() {
            if !without_targets && self.is_propagated(keep[i].var()) {
                i += 1;
                continue;
            }
            let mut trial = keep.clone();
            trial.remove(i);
            if self.sat(&problem, &trial)?.is_none() {
                keep = trial;
            } else {
                i += 1;
            }
        }
        Ok(Clause::learned(keep.into_iter().map(|l| !l)).expect("assumptions are consistent"))
    }

    fn learn(
        &mut self,
        clause: Clause,
        reason: LearnReason,
        start: Option<usize>,
        resolutions: Vec<(usize, Var)>,
    ) {
        debug_assert!(clause.vars().all(|v| self.base.is_free(v)));
        let clause = Clause::with_origin(clause.lits().iter().copied(), Origin::Learned)
            .expect("learned clauses are tautology-free");
        let index = self.db.push_f(clause.clone(), true);
        self.is_target.push(false);
        if self.mode == Mode::TakeOut {
            self.h.push(clause.clone());
        }
        self.derivation.push(Derivation::Learned {
            index,
            clause,
            reason,
            start,
            resolutions,
        });
    }

    fn falsified_non_target(&self) -> Option<usize> {
        self.db
            .f()
            .iter()
            .enumerate()
            .find(|(i, c)| !self.is_target[*i] && self.trail.falsifies_clause(c))
            .map(|(i, _)| i)
    }

    fn emit(&mut self, subspace: &[Lit]) {
        let formula_len = self.db.f().len();
        for &t in &self.targets {
            self.dsequents.push(DSequent {
                subspace: subspace.to_vec(),
                clause: t,
                formula_len,
            });
        }
    }

    /// Decision bindings that imply the bindings of `vars` by propagation.
    fn lift(&self, vars: &BTreeSet<Var>) -> Vec<Lit> {
        let mut seen: BTreeSet<Var> = BTreeSet::new();
        let mut stack: Vec<Var> = vars.iter().copied().collect();
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            let Some(b) = self.trail.binding_of(v) else {
                continue;
            };
            match b.tag {
                Tag::Decision => out.push(b.lit),
                Tag::Propagated(reason) => {
                    for l in self.db.get(reason).lits() {
                        if l.var() != v {
                            stack.push(l.var());
                        }
                    }
                }
            }
        }
        out.sort_by_key(|l| self.trail.position(l.var()));
        out
    }

    /// Removes every target by a sequence of atomic steps, returning the
    /// variables whose bindings the steps rely on.
    fn joint_reduce(&self) -> Option<(BTreeSet<Var>, Vec<Removal>)> {
        let mut removed = vec![false; self.db.f().len()];
        let mut used = BTreeSet::new();
        let mut removals = Vec::new();
        loop {
            let mut changed = false;
            for &t in &self.targets {
                if removed[t] {
                    continue;
                }
                if let Some((reason, vars)) = self.removable(t, &removed, None) {
                    removed[t] = true;
                    used.extend(vars);
                    removals.push(Removal { clause: t, reason });
                    changed = true;
                } else if let Some((reason, vars)) = self.locally_blocked(t, &removed) {
                    removed[t] = true;
                    used.extend(vars);
                    removals.push(Removal { clause: t, reason });
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if self.targets.iter().all(|&t| removed[t]) {
            Some((used, removals))
        } else {
            None
        }
    }

    /// One atomic removal of clause `c` given the already removed clauses.
    /// `avoid` is a clause that may not serve as a subsuming clause.
    fn removable(
        &self,
        c: usize,
        removed: &[bool],
        avoid: Option<usize>,
    ) -> Option<(AtomicReason, BTreeSet<Var>)> {
        let clause = &self.db.f()[c];
        let satisfied = clause
            .lits()
            .iter()
            .filter(|l| self.trail.satisfies(**l))
            .min_by_key(|l| self.trail.position(l.var()));
        if let Some(&l) = satisfied {
            return Some((AtomicReason::Satisfied(l), [l.var()].into_iter().collect()));
        }
        if let Some((d, vars)) = self.subsumer(c, removed, avoid) {
            return Some((AtomicReason::Subsumed(d), vars));
        }
        for &l in clause.lits() {
            let x = l.var();
            if !self.base.is_quantified(x) || self.trail.is_assigned(x) {
                continue;
            }
            if let Some(vars) = self.blocked_at(c, l, removed, &[]) {
                return Some((AtomicReason::Blocked(x), vars));
            }
        }
        None
    }

    /// A non-removed clause `D ≠ C` with `D|r ⊆ C|r`, and the variables of
    /// the literals of `D` outside `C`.
    fn subsumer(
        &self,
        c: usize,
        removed: &[bool],
        avoid: Option<usize>,
    ) -> Option<(usize, BTreeSet<Var>)> {
        let clause = &self.db.f()[c];
        let open: Vec<Lit> = clause
            .lits()
            .iter()
            .copied()
            .filter(|l| self.trail.lit_value(*l).is_none())
            .collect();
        let candidates: Vec<usize> = if open.is_empty() {
            (0..self.db.f().len()).collect()
        } else {
            let mut set: BTreeSet<usize> = BTreeSet::new();
            for &l in &open {
                set.extend(self.db.occurrences_f(l).iter().copied());
            }
            // Clauses falsified by the trail subsume every clause.
            set.extend(
                self.db
                    .f()
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| self.trail.falsifies_clause(d))
                    .map(|(i, _)| i),
            );
            set.into_iter().collect()
        };
        for d in candidates {
            if d == c || removed.get(d).copied().unwrap_or(false) || Some(d) == avoid {
                continue;
            }
            let other = &self.db.f()[d];
            if self.trail.satisfies_clause(other) {
                continue;
            }
            let fits = other
                .lits()
                .iter()
                .all(|&m| self.trail.falsifies(m) || clause.contains(m));
            if fits {
                let vars = other
                    .lits()
                    .iter()
                    .filter(|m| !clause.contains(**m))
                    .map(|m| m.var())
                    .collect();
                return Some((d, vars));
            }
        }
        None
    }

    /// Whether clause `c` is blocked at the variable of `l` among the
    /// non-removed clauses (and not in `also_removed`). Returns the
    /// bindings that satisfy partner clauses.
    fn blocked_at(
        &self,
        c: usize,
        l: Lit,
        removed: &[bool],
        also_removed: &[usize],
    ) -> Option<BTreeSet<Var>> {
        let clause = &self.db.f()[c];
        let mut vars = BTreeSet::new();
        for &d in self.db.occurrences_f(!l) {
            if d == c || removed.get(d).copied().unwrap_or(false) || also_removed.contains(&d) {
                continue;
            }
            let other = &self.db.f()[d];
            let sat = other
                .lits()
                .iter()
                .filter(|m| self.trail.satisfies(**m))
                .min_by_key(|m| self.trail.position(m.var()));
            if let Some(m) = sat {
                vars.insert(m.var());
                continue;
            }
            if !self.extra_clash(clause, other, l.var()) {
                return None;
            }
        }
        Some(vars)
    }

    /// Whether the cofactors of `a` and `b` clash on a variable besides `x`.
    fn extra_clash(&self, a: &Clause, b: &Clause, x: Var) -> bool {
        a.lits().iter().any(|&m| {
            m.var() != x && self.trail.lit_value(m).is_none() && b.contains(!m)
        })
    }

    /// A target unit on a quantified variable becomes blocked once its
    /// resolution partners are removed by atomic steps that do not use it.
    fn locally_blocked(&self, t: usize, removed: &[bool]) -> Option<(AtomicReason, BTreeSet<Var>)> {
        let clause = &self.db.f()[t];
        let mut open = clause
            .lits()
            .iter()
            .filter(|l| self.trail.lit_value(**l).is_none());
        let l = *open.next()?;
        if open.next().is_some() || !self.base.is_quantified(l.var()) {
            return None;
        }
        let mut vars = BTreeSet::new();
        let mut partners = Vec::new();
        let mut local = removed.to_vec();
        for &d in self.db.occurrences_f(!l) {
            if d == t || local[d] {
                continue;
            }
            let other = &self.db.f()[d];
            let sat = other
                .lits()
                .iter()
                .filter(|m| self.trail.satisfies(**m))
                .min_by_key(|m| self.trail.position(m.var()));
            if let Some(m) = sat {
                vars.insert(m.var());
                continue;
            }
            if self.extra_clash(clause, other, l.var()) {
                continue;
            }
            let (_, more) = self.removable_local(d, &local, t)?;
            vars.extend(more);
            local[d] = true;
            partners.push(d);
        }
        if partners.is_empty() {
            return None;
        }
        Some((
            AtomicReason::LocalBlocked {
                var: l.var(),
                partners,
            },
            vars,
        ))
    }

    /// Atomic removal of a partner clause that holds with and without the
    /// unit target `t`: subsumption by a clause other than `t`, or
    /// blockedness at a quantified variable other than the target's.
    fn removable_local(
        &self,
        d: usize,
        removed: &[bool],
        t: usize,
    ) -> Option<(AtomicReason, BTreeSet<Var>)> {
        if let Some((by, vars)) = self.subsumer(d, removed, Some(t)) {
            return Some((AtomicReason::Subsumed(by), vars));
        }
        let clause = &self.db.f()[d];
        for &m in clause.lits() {
            let z = m.var();
            if !self.base.is_quantified(z) || self.trail.is_assigned(z) {
                continue;
            }
            if self.db.f()[t].contains_var(z) {
                continue;
            }
            if let Some(vars) = self.blocked_at(d, m, removed, &[]) {
                return Some((AtomicReason::Blocked(z), vars));
            }
        }
        None
    }

    fn solution(self) -> PqeSolution {
        let formula = self.formula();
        PqeSolution {
            h: self.h,
            derivation: self.derivation,
            dsequents: self.dsequents,
            formula,
            quantified_targets: self.targets,
            root: self.root.unwrap_or(RootProof::Trivial),
        }
    }
}

/// Takes the targets out of `∃X.F`, returning `H` with `∃X.F ≡ H ∧ ∃X.(F\G)`.
pub fn take_out(p: &PqeProblem, config: PqeConfig) -> Result<PqeSolution, PqeError> {
    let mut engine = Engine::new(p, Mode::TakeOut, config);
    let done = engine.run()?;
    debug_assert!(done, "take-out always proves redundancy");
    Ok(engine.solution())
}

/// Whether the targets are redundant: `∃X.F ≡ ∃X.(F\G)`.
pub fn decide_redundant(p: &PqeProblem, config: PqeConfig) -> Result<bool, PqeError> {
    let unquantified = p
        .targets
        .iter()
        .any(|&t| !p.problem.is_quantified_clause(p.problem.clause(t)));
    if unquantified {
        return via_take_out(p, config);
    }
    let mut engine = Engine::new(p, Mode::Decide, config);
    engine.run()
}

/// With `∃X.F ≡ H ∧ ∃X.(F\G)`, the targets are redundant iff `F\G`
/// implies every clause of `H`.
fn via_take_out(p: &PqeProblem, config: PqeConfig) -> Result<bool, PqeError> {
    let sol = take_out(p, config)?;
    let rest = p.problem.without(&p.targets);
    for c in &sol.h {
        let negated: Vec<Lit> = c.lits().iter().map(|&l| !l).collect();
        match solve_under(&rest, &negated, config.step_limit) {
            Ok(Some(_)) => return Ok(false),
            Ok(None) => {}
            Err(_) => return Err(PqeError::StepLimit),
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatByPqe {
    Sat(Vec<bool>),
    Unsat,
}

/// Satisfiability via PQE: with `G` the clauses falsified by `x`, `F` is
/// satisfiable iff `G` is redundant in `∃V.F` (no free variables).
pub fn sat_by_pqe(f: &CnfProblem, x: &[bool], config: PqeConfig) -> Result<SatByPqe, PqeError> {
    let n = f.var_count();
    if x.len() != n as usize + 1 {
        return Err(PqeError::PartialModel(n));
    }
    let all = CnfProblem::all_quantified(n, f.clauses().to_vec()).expect("same variables");
    let g: BTreeSet<usize> = (0..f.clauses().len())
        .filter(|&i| !f.clause(i).satisfied_by_model(x))
        .collect();
    if g.is_empty() {
        return Ok(SatByPqe::Sat(x.to_vec()));
    }
    if g.iter().any(|&i| f.clause(i).is_empty()) {
        return Ok(SatByPqe::Unsat);
    }
    let p = PqeProblem {
        problem: all.clone(),
        targets: g,
    };
    let sol = take_out(&p, config)?;
    match sol.root {
        RootProof::Conflict | RootProof::Learned => Ok(SatByPqe::Unsat),
        RootProof::Model(m) => Ok(SatByPqe::Sat(m)),
        RootProof::Atomic(removals) => {
            let mut model = x.to_vec();
            for r in removals.iter().rev() {
                if f.clause(r.clause).satisfied_by_model(&model) {
                    continue;
                }
                match &r.reason {
                    AtomicReason::Blocked(v) => model[v.idx()] = !model[v.idx()],
                    AtomicReason::LocalBlocked { var, .. } => {
                        model[var.idx()] = !model[var.idx()]
                    }
                    _ => {}
                }
            }
            if all.is_satisfied_by_model(&model) {
                return Ok(SatByPqe::Sat(model));
            }
            match solve_under(&all, &[], config.step_limit) {
                Ok(Some(m)) => Ok(SatByPqe::Sat(m)),
                Ok(None) => unreachable!("redundancy proof implies satisfiability"),
                Err(_) => Err(PqeError::StepLimit),
            }
        }
        RootProof::Trivial | RootProof::Branched => {
            unreachable!("no free variables and a nonempty target set")
        }
    }
}

/// A single-target atomic D-sequent for clause `c` in subspace `q`, if
/// `c` is satisfied, subsumed by another clause or blocked at a quantified
/// unassigned variable there. The subspace keeps only the bindings used.
pub fn atomic_dsequent(f: &CnfProblem, c: usize, q: &PartialAssignment) -> Option<DSequent> {
    let p = PqeProblem {
        problem: f.clone(),
        targets: [c].into_iter().collect(),
    };
    let mut engine = Engine::new(&p, Mode::TakeOut, PqeConfig::default());
    engine.targets = vec![c];
    engine.is_target[c] = true;
    engine.trail = q.clone();
    let removed = vec![false; f.clauses().len()];
    let (_, vars) = engine.removable(c, &removed, None)?;
    let subspace = q
        .bindings()
        .iter()
        .map(|b| b.lit)
        .filter(|l| vars.contains(&l.var()))
        .collect();
    Some(DSequent {
        subspace,
        clause: c,
        formula_len: f.clauses().len(),
    })
}
