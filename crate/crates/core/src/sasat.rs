//! ImSAT: satisfiability by proving literals redundant in clause vicinities
//! and closing clusters by induction.
//!
//! A call explores the vicinity `q*` of a literal `l` of a clause `C′`:
//! `l` true, the other unassigned literals of `C′` false. The call either
//! finds a model, or returns a clause falsified by `q ∪ q*` (a certificate
//! for `l`). Certificates are kept in a separate set `P`. Once every shared
//! literal of a cluster has a certificate in its vicinity, an induction
//! clause falsified by `q` is built and returned.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::bcp::{analyze, propagate, ClauseDb, Propagation};
use crate::cnf::{cluster_of, Clause, ClauseId, CnfProblem, Lit, Origin, PartialAssignment, Var};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SasatError {
    #[error("clause is satisfied by the current assignment")]
    ClauseSatisfied,
    #[error("literal {0} is already assigned")]
    LiteralAssigned(Lit),
    #[error("literal {0} does not occur in the clause")]
    LiteralNotInClause(Lit),
    #[error("step limit reached")]
    StepLimit,
}

/// Where learned certificates are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LearnTo {
    /// A separate certificate set; the formula stays intact.
    #[default]
    P,
    /// Appended to the formula, where they also join clusters.
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub step_limit: u64,
    pub learn_to: LearnTo,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            step_limit: DEFAULT_STEP_LIMIT,
            learn_to: LearnTo::P,
        }
    }
}

/// Provenance of a learned certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateInfo {
    /// 0-based index of the clause whose literal was proved redundant.
    pub clause: usize,
    pub literal: Lit,
    /// The assignment `q` under which the certificate was derived.
    pub subspace: Vec<Lit>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CertificateSet {
    pub clauses: Vec<Clause>,
    pub info: Vec<CertificateInfo>,
}

impl CertificateSet {
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// The assignment specifying the `l`-vicinity of clause `clause`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VicinitySpec {
    pub clause: usize,
    pub literal: Lit,
    /// `l` first, then the negations of the other unassigned literals in
    /// clause order.
    pub assignment: Vec<Lit>,
}

pub fn specify_vicinity(
    clause: &Clause,
    index: usize,
    literal: Lit,
    q: &PartialAssignment,
) -> Result<VicinitySpec, SasatError> {
    if q.satisfies_clause(clause) {
        return Err(SasatError::ClauseSatisfied);
    }
    if !clause.contains(literal) {
        return Err(SasatError::LiteralNotInClause(literal));
    }
    if q.lit_value(literal).is_some() {
        return Err(SasatError::LiteralAssigned(literal));
    }
    Ok(VicinitySpec {
        clause: index,
        literal,
        assignment: vicinity_lits(clause, literal, q),
    })
}

fn vicinity_lits(clause: &Clause, literal: Lit, q: &PartialAssignment) -> Vec<Lit> {
    std::iter::once(literal)
        .chain(
            clause
                .lits()
                .iter()
                .copied()
                .filter(|&m| m != literal && q.lit_value(m).is_none())
                .map(|m| !m),
        )
        .collect()
}

/// Whether `cert` is falsified by `q` extended with the `l`-vicinity of
/// `clause`.
pub fn falsified_in_vicinity(
    cert: &Clause,
    clause: &Clause,
    literal: Lit,
    q: &PartialAssignment,
) -> bool {
    cert.lits().iter().all(|&m| match q.lit_value(m) {
        Some(v) => !v,
        None => m == !literal || (m != literal && clause.contains(m)),
    })
}

/// Pairs `(C′, l)` of the cluster of `primary` that need a certificate:
/// `C′` not satisfied by `q`, `l ∈ C′ ∩ primary` unassigned by `q`.
pub fn required_pairs(
    f: &CnfProblem,
    primary: usize,
    q: &PartialAssignment,
    excluded: &BTreeSet<usize>,
) -> Vec<(usize, Lit)> {
    let cluster = cluster_of(f, primary, excluded).expect("primary is a clause of F");
    let c = f.clause(primary);
    let mut out = Vec::new();
    for ci in cluster {
        let cp = f.clause(ci);
        if q.satisfies_clause(cp) {
            continue;
        }
        for &l in cp.lits() {
            if c.contains(l) && q.lit_value(l).is_none() {
                out.push((ci, l));
            }
        }
    }
    out
}

fn first_certificate(
    f: &CnfProblem,
    certs: &[Clause],
    pair: (usize, Lit),
    q: &PartialAssignment,
) -> Option<usize> {
    let cp = f.clause(pair.0);
    certs
        .iter()
        .position(|b| falsified_in_vicinity(b, cp, pair.1, q))
}

/// Some clause of `F` not satisfied by `q` whose every required cluster
/// pair has a certificate in `certs` falsified in the pair's vicinity.
pub fn check_induction(
    f: &CnfProblem,
    certs: &[Clause],
    q: &PartialAssignment,
    excluded: &BTreeSet<usize>,
) -> Option<usize> {
    (0..f.clauses().len())
        .filter(|&i| !excluded.contains(&i) && !q.satisfies_clause(f.clause(i)))
        .find(|&i| {
            required_pairs(f, i, q, excluded)
                .into_iter()
                .all(|pair| first_certificate(f, certs, pair, q).is_some())
        })
}

/// The induction clause for the cluster of `primary` under `q`: its
/// `q`-falsified literals, the negation of the earliest `q`-satisfied
/// literal of each satisfied cluster clause, and, for each required pair,
/// the literals of its certificate over variables outside that clause.
pub fn build_induction_clause(
    f: &CnfProblem,
    certs: &[Clause],
    primary: usize,
    q: &PartialAssignment,
    excluded: &BTreeSet<usize>,
) -> Option<Clause> {
    let pairs = required_pairs(f, primary, q, excluded);
    let mut used = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        used.push((pair.0, first_certificate(f, certs, *pair, q)?));
    }
    Some(induction_clause(f, primary, q, excluded, &used, |i| &certs[i]))
}

fn induction_clause<'a>(
    f: &CnfProblem,
    primary: usize,
    q: &PartialAssignment,
    excluded: &BTreeSet<usize>,
    used: &[(usize, usize)],
    cert: impl Fn(usize) -> &'a Clause,
) -> Clause {
    let c = f.clause(primary);
    let mut lits: Vec<Lit> = c.lits().iter().copied().filter(|&m| q.falsifies(m)).collect();
    for ci in cluster_of(f, primary, excluded).expect("primary is a clause of F") {
        let cp = f.clause(ci);
        let earliest = cp
            .lits()
            .iter()
            .filter(|&&m| q.satisfies(m))
            .min_by_key(|m| q.position(m.var()));
        if let Some(&m) = earliest {
            lits.push(!m);
        }
    }
    for &(ci, b) in used {
        let vars: BTreeSet<Var> = f.clause(ci).vars().collect();
        lits.extend(cert(b).lits().iter().filter(|m| !vars.contains(&m.var())));
    }
    Clause::learned(lits).expect("literals are all falsified by q")
}

/// One while-loop iteration of a solver frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub iter: u64,
    /// 1-based index of the picked clause.
    pub clause: Option<usize>,
    pub literal: Option<i32>,
    /// Clause returned by exploring the vicinity.
    pub certificate: Option<Vec<i32>>,
    /// 1-based index of the clause whose cluster induction closed.
    pub induction: Option<usize>,
    pub action: Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Learn,
    Induction,
    Unwind,
    Sat,
}

pub fn write_trace(records: &[TraceRecord], out: &mut impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn trace_to_string(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// `model[v]` is the value of variable `v`; index 0 is unused.
    Sat(Vec<bool>),
    /// A clause falsified by the caller's `q ∪ q*` (inner calls only).
    Certificate(Clause),
    /// Unsatisfiable: the derived empty clause with the certificates used.
    Done {
        clause: Clause,
        p: CertificateSet,
        trace: Vec<TraceRecord>,
    },
    /// The step limit was exceeded.
    Unknown,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveOutcome::Done { .. })
    }
}

enum Inner {
    Sat(Vec<bool>),
    Cert(Clause),
    Unknown,
}

#[derive(Clone, Copy)]
enum PairState {
    Certified(ClauseId),
    /// No certificate among the first `n` learned clauses.
    Checked(usize),
}

/// ImSAT solver over one formula.
#[derive(Debug, Clone)]
pub struct Solver {
    input: CnfProblem,
    config: SolverConfig,
    db: ClauseDb,
    /// Learned certificates in insertion order (in `P` or in `F`).
    learned: Vec<ClauseId>,
    info: Vec<CertificateInfo>,
    trail: PartialAssignment,
    clusters: HashMap<usize, Vec<usize>>,
    steps: u64,
    iter: u64,
    trace: Vec<TraceRecord>,
}

impl Solver {
    pub fn new(problem: &CnfProblem, config: SolverConfig) -> Solver {
        Solver {
            input: problem.clone(),
            config,
            db: ClauseDb::new(problem.var_count(), problem.clauses()),
            learned: Vec::new(),
            info: Vec::new(),
            trail: PartialAssignment::new(),
            clusters: HashMap::new(),
            steps: 0,
            iter: 0,
            trace: Vec::new(),
        }
    }

    pub fn solve(&mut self) -> SolveOutcome {
        match self.rec(None) {
            Inner::Sat(model) => {
                debug_assert!(self.input.is_satisfied_by_model(&model));
                SolveOutcome::Sat(model)
            }
            Inner::Unknown => SolveOutcome::Unknown,
            Inner::Cert(clause) => {
                assert!(clause.is_empty(), "top-level certificate must be empty");
                SolveOutcome::Done {
                    clause,
                    p: self.certificates(),
                    trace: self.trace.clone(),
                }
            }
        }
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// Learned certificates, wherever they are stored.
    pub fn certificates(&self) -> CertificateSet {
        CertificateSet {
            clauses: self.learned.iter().map(|&id| self.db.get(id).clone()).collect(),
            info: self.info.clone(),
        }
    }

    /// The current formula `F` (grows only under [`LearnTo::F`]).
    pub fn formula(&self) -> CnfProblem {
        self.input.with_clauses(self.db.f().to_vec())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn iterations(&self) -> u64 {
        self.iter
    }

    fn cluster(&mut self, primary: usize) -> Vec<usize> {
        if let Some(c) = self.clusters.get(&primary) {
            return c.clone();
        }
        let f = self.formula();
        let c = cluster_of(&f, primary, &BTreeSet::new()).expect("primary is in F");
        self.clusters.insert(primary, c.clone());
        c
    }

    fn rec(&mut self, pair: Option<(usize, Lit)>) -> Inner {
        self.steps += 1;
        if self.steps > self.config.step_limit {
            return Inner::Unknown;
        }
        let start = self.trail.len();
        let decisions = match pair {
            Some((ci, l)) => vicinity_lits(&self.db.f()[ci], l, &self.trail),
            None => Vec::new(),
        };
        let result = propagate(&self.db, &mut self.trail, &decisions)
            .expect("vicinity literals are unassigned");
        if let Propagation::Conflict(id) = result {
            let a = analyze(&self.db, &self.trail, self.db.get(id), start);
            self.trail.truncate(start);
            return Inner::Cert(a.clause);
        }
        let Some(primary) = self
            .db
            .f()
            .iter()
            .position(|c| !self.trail.satisfies_clause(c))
        else {
            let model = self.trail.to_model(self.input.var_count());
            return Inner::Sat(model);
        };
        let mut states: HashMap<(usize, Lit), PairState> = HashMap::new();
        loop {
            let picked = self.pick(primary, &mut states);
            let Some((ci, l)) = picked else {
                let clause = self.induction(primary, &states);
                let reduced = analyze(&self.db, &self.trail, &clause, start).clause;
                self.record(None, None, Some(primary), Action::Induction);
                self.trail.truncate(start);
                return Inner::Cert(reduced);
            };
            match self.rec(Some((ci, l))) {
                Inner::Sat(model) => {
                    self.record(Some((ci, l)), None, None, Action::Sat);
                    return Inner::Sat(model);
                }
                Inner::Unknown => return Inner::Unknown,
                Inner::Cert(b) => {
                    if self.trail.falsifies_clause(&b) {
                        let reduced = analyze(&self.db, &self.trail, &b, start).clause;
                        self.record(Some((ci, l)), Some(&b), None, Action::Unwind);
                        self.trail.truncate(start);
                        return Inner::Cert(reduced);
                    }
                    let id = self.learn(b.clone(), ci, l);
                    states.insert((ci, l), PairState::Certified(id));
                    if self.pick(primary, &mut states).is_none() {
                        if start == 0 {
                            self.assert_cluster_certified(primary);
                        }
                        let clause = self.induction(primary, &states);
                        let reduced = analyze(&self.db, &self.trail, &clause, start).clause;
                        self.record(Some((ci, l)), Some(&b), Some(primary), Action::Induction);
                        self.trail.truncate(start);
                        return Inner::Cert(reduced);
                    }
                    self.record(Some((ci, l)), Some(&b), None, Action::Learn);
                }
            }
        }
    }

    fn record(
        &mut self,
        pair: Option<(usize, Lit)>,
        cert: Option<&Clause>,
        induction: Option<usize>,
        action: Action,
    ) {
        self.iter += 1;
        self.trace.push(TraceRecord {
            iter: self.iter,
            clause: pair.map(|p| p.0 + 1),
            literal: pair.map(|p| p.1.to_dimacs()),
            certificate: cert.map(|c| c.to_dimacs()),
            induction: induction.map(|i| i + 1),
            action,
        });
    }

    fn learn(&mut self, clause: Clause, ci: usize, l: Lit) -> ClauseId {
        let clause = Clause::with_origin(clause.lits().iter().copied(), Origin::Learned)
            .expect("certificates are tautology-free");
        let id = match self.config.learn_to {
            LearnTo::P => ClauseId::Cert(self.db.push_p(clause)),
            LearnTo::F => {
                self.clusters.clear();
                ClauseId::Formula(self.db.push_f(clause, true))
            }
        };
        self.learned.push(id);
        self.info.push(CertificateInfo {
            clause: ci,
            literal: l,
            subspace: self.trail.lits(),
        });
        id
    }

    /// Next uncertified required pair of the primary clause's cluster.
    fn pick(
        &mut self,
        primary: usize,
        states: &mut HashMap<(usize, Lit), PairState>,
    ) -> Option<(usize, Lit)> {
        let cluster = self.cluster(primary);
        for ci in cluster {
            let cp = &self.db.f()[ci];
            if self.trail.satisfies_clause(cp) {
                continue;
            }
            for &l in cp.lits() {
                if !self.db.f()[primary].contains(l) || self.trail.lit_value(l).is_some() {
                    continue;
                }
                let checked = match states.get(&(ci, l)) {
                    Some(PairState::Certified(_)) => continue,
                    Some(PairState::Checked(n)) => *n,
                    None => 0,
                };
                let found = self.learned[checked..]
                    .iter()
                    .find(|&&id| falsified_in_vicinity(self.db.get(id), cp, l, &self.trail));
                match found {
                    Some(&id) => {
                        states.insert((ci, l), PairState::Certified(id));
                    }
                    None => {
                        states.insert((ci, l), PairState::Checked(self.learned.len()));
                        return Some((ci, l));
                    }
                }
            }
        }
        None
    }

    fn induction(&mut self, primary: usize, states: &HashMap<(usize, Lit), PairState>) -> Clause {
        let f = self.formula();
        let pairs = required_pairs(&f, primary, &self.trail, &BTreeSet::new());
        let used: Vec<(usize, ClauseId)> = pairs
            .iter()
            .map(|p| match states.get(p) {
                Some(PairState::Certified(id)) => (p.0, *id),
                _ => panic!("induction with an uncertified pair"),
            })
            .collect();
        let ids: Vec<ClauseId> = used.iter().map(|u| u.1).collect();
        let idx: Vec<(usize, usize)> = used.iter().enumerate().map(|(k, u)| (u.0, k)).collect();
        let db = &self.db;
        induction_clause(&f, primary, &self.trail, &BTreeSet::new(), &idx, |k| db.get(ids[k]))
    }

    /// Re-derives, without caches, that every required pair of the cluster
    /// has a learned certificate falsified in its vicinity.
    fn assert_cluster_certified(&self, primary: usize) {
        let f = self.formula();
        let certs: Vec<Clause> = self.learned.iter().map(|&id| self.db.get(id).clone()).collect();
        for pair in required_pairs(&f, primary, &self.trail, &BTreeSet::new()) {
            assert!(
                first_certificate(&f, &certs, pair, &self.trail).is_some(),
                "cluster pair ({}, {}) lacks a certificate",
                pair.0 + 1,
                pair.1
            );
        }
    }
}

/// Solves with the default configuration.
pub fn imsat_solve(problem: &CnfProblem) -> SolveOutcome {
    Solver::new(problem, SolverConfig::default()).solve()
}

/// Satisfiability of `F` with `assumptions` added as unit clauses.
/// Returns `Some(model)`, or `None` when unsatisfiable.
pub fn solve_under(
    problem: &CnfProblem,
    assumptions: &[Lit],
    step_limit: u64,
) -> Result<Option<Vec<bool>>, SasatError> {
    let mut p = problem.clone();
    for &a in assumptions {
        p.push_clause(Clause::new([a]).expect("unit clause"))
            .expect("assumption within variable range");
    }
    let config = SolverConfig {
        step_limit,
        learn_to: LearnTo::P,
    };
    match Solver::new(&p, config).solve() {
        SolveOutcome::Sat(m) => Ok(Some(m)),
        SolveOutcome::Done { .. } => Ok(None),
        _ => Err(SasatError::StepLimit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enum_sat, implies};

    fn c(v: &[i32]) -> Clause {
        Clause::from_dimacs(v)
    }

    fn lit(v: i32) -> Lit {
        Lit::from_dimacs(v).unwrap()
    }

    fn q(v: &[i32]) -> PartialAssignment {
        let lits: Vec<Lit> = v.iter().map(|&x| lit(x)).collect();
        PartialAssignment::from_lits(&lits).unwrap()
    }

    fn trace_fixture() -> CnfProblem {
        CnfProblem::all_quantified(
            6,
            vec![
                c(&[1, 2]),
                c(&[1, 3]),
                c(&[2, 4]),
                c(&[-1, 3]),
                c(&[-2, 4]),
                c(&[-1, 5]),
                c(&[-5, -4]),
                c(&[-2, 6]),
                c(&[-6, -3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn vicinity_examples() {
        let v = specify_vicinity(&c(&[1, 2, 3]), 0, lit(1), &q(&[])).unwrap();
        assert_eq!(v.assignment, vec![lit(1), lit(-2), lit(-3)]);
        let v = specify_vicinity(&c(&[5]), 0, lit(5), &q(&[])).unwrap();
        assert_eq!(v.assignment, vec![lit(5)]);
        let v = specify_vicinity(&c(&[-1, 2, 3]), 0, lit(2), &q(&[1])).unwrap();
        assert_eq!(v.assignment, vec![lit(2), lit(-3)]);
        assert_eq!(
            specify_vicinity(&c(&[1, 2]), 0, lit(2), &q(&[1])),
            Err(SasatError::ClauseSatisfied)
        );
        assert_eq!(
            specify_vicinity(&c(&[1, 2]), 0, lit(2), &q(&[-2])),
            Err(SasatError::LiteralAssigned(lit(2)))
        );
    }

    #[test]
    fn cluster_example_solves_with_four_iterations() {
        let f = trace_fixture();
        let mut s = Solver::new(&f, SolverConfig::default());
        let SolveOutcome::Done { clause, p, trace } = s.solve() else {
            panic!("formula is unsatisfiable");
        };
        assert!(clause.is_empty());
        let expect = [c(&[-1, 2]), c(&[1, -2]), c(&[-1, 3]), c(&[-2, 4])];
        assert_eq!(p.len(), 4);
        for (a, b) in p.clauses.iter().zip(expect.iter()) {
            assert!(a.same_lits(b), "{a} vs {b}");
        }
        assert_eq!(trace.len(), 4);
        assert_eq!(trace[3].induction, Some(1));
        assert_eq!(trace[3].action, Action::Induction);
        assert_eq!(s.formula(), f);
    }

    #[test]
    fn induction_checks_along_the_way() {
        let f = trace_fixture();
        let none = BTreeSet::new();
        let p = [c(&[-1, 2]), c(&[1, -2]), c(&[-1, 3]), c(&[-2, 4])];
        for k in 1..=3 {
            assert_eq!(check_induction(&f, &p[..k], &q(&[]), &none), None);
        }
        assert_eq!(check_induction(&f, &p, &q(&[]), &none), Some(0));
        let k = build_induction_clause(&f, &p, 0, &q(&[]), &none).unwrap();
        assert!(k.is_empty());
    }

    #[test]
    fn induction_clause_with_satisfied_and_falsified_literals() {
        let f = CnfProblem::all_quantified(
            11,
            vec![c(&[-1, 2, 3]), c(&[-1, 5, 7]), c(&[2, -6, 8]), c(&[3, 9])],
        )
        .unwrap();
        let certs = [c(&[3, 10]), c(&[2, 4]), c(&[4, -6, 8])];
        let sub = q(&[1, -4, 9, -10, -11]);
        let none = BTreeSet::new();
        assert_eq!(check_induction(&f, &certs, &sub, &none), Some(0));
        let k = build_induction_clause(&f, &certs, 0, &sub, &none).unwrap();
        assert!(k.same_lits(&c(&[-1, 4, -9, 10])), "{k}");
    }

    #[test]
    fn single_clause_cluster_remainder() {
        let f = CnfProblem::all_quantified(4, vec![c(&[-1, 2, 3])]).unwrap();
        let certs = [c(&[-3, 4]), c(&[-2, 4])];
        let sub = q(&[1, -4]);
        let k = build_induction_clause(&f, &certs, 0, &sub, &BTreeSet::new()).unwrap();
        assert!(k.same_lits(&c(&[-1, 4])));
    }

    #[test]
    fn trivial_sat() {
        let f = CnfProblem::all_quantified(1, vec![c(&[1])]).unwrap();
        assert_eq!(imsat_solve(&f), SolveOutcome::Sat(vec![false, true]));
    }

    #[test]
    fn learned_clauses_are_implied() {
        let f = CnfProblem::all_quantified(
            5,
            vec![
                c(&[1, 2, 3]),
                c(&[-1, 4]),
                c(&[-2, 4]),
                c(&[-3, -4]),
                c(&[-4, 5]),
                c(&[-5, 3]),
                c(&[1, -5]),
            ],
        )
        .unwrap();
        let mut s = Solver::new(&f, SolverConfig::default());
        let out = s.solve();
        assert_eq!(out.is_sat(), enum_sat(&f).unwrap().is_sat());
        for b in s.certificates().clauses {
            assert!(implies(&f, &b).unwrap(), "{b}");
        }
    }

    #[test]
    fn learn_to_formula_agrees() {
        let f = trace_fixture();
        let config = SolverConfig {
            learn_to: LearnTo::F,
            ..SolverConfig::default()
        };
        let mut s = Solver::new(&f, config);
        assert!(s.solve().is_unsat());
        assert!(s.formula().clauses().len() > f.clauses().len());
    }

    #[test]
    fn step_limit_gives_unknown() {
        let config = SolverConfig {
            step_limit: 2,
            ..SolverConfig::default()
        };
        assert_eq!(
            Solver::new(&trace_fixture(), config).solve(),
            SolveOutcome::Unknown
        );
    }

    #[test]
    fn trace_serializes_in_field_order() {
        let mut s = Solver::new(&trace_fixture(), SolverConfig::default());
        s.solve();
        let text = trace_to_string(s.trace());
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            r#"{"iter":1,"clause":1,"literal":1,"certificate":[-1,2],"induction":null,"action":"learn"}"#
        );
    }
}
