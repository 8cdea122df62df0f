//! Brute-force reference procedures: enumeration SAT, implication,
//! quantifier elimination by truth table, PQE-solution checking and exact
//! breadth-first reachability.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circuits::TransitionSystem;
use crate::cnf::{Clause, CnfProblem, Var};

pub const SAT_VAR_GUARD: u32 = 24;
pub const QE_GUARD: usize = 16;
pub const STATE_BIT_GUARD: usize = 12;
pub const TS_INPUT_GUARD: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} count {got} exceeds oracle guard {limit}")]
    Guard {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("solution clause mentions quantified variable {0}")]
    QuantifiedInSolution(Var),
}

fn guard(what: &'static str, got: usize, limit: usize) -> Result<(), OracleError> {
    if got > limit {
        Err(OracleError::Guard { what, got, limit })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnumResult {
    /// `model[v]` is the value of variable `v`; index 0 is unused.
    Sat(Vec<bool>),
    Unsat,
}

impl EnumResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, EnumResult::Sat(_))
    }
}

/// Depth-first search over variables `1..=n` in index order, 0 before 1,
/// with `fixed` values respected. Each clause is checked as soon as its
/// last unfixed variable is assigned, so the first model found is the
/// lexicographically smallest.
fn search(clauses: &[Clause], n: usize, fixed: &[Option<bool>]) -> Option<Vec<bool>> {
    let mut occurs = vec![false; n + 1];
    for v in clauses.iter().flat_map(|c| c.vars()) {
        occurs[v.idx()] = true;
    }
    let order: Vec<usize> = (1..=n)
        .filter(|&v| fixed[v].is_none() && occurs[v])
        .collect();
    let mut depth_of = vec![usize::MAX; n + 1];
    for (d, &v) in order.iter().enumerate() {
        depth_of[v] = d;
    }
    let mut model: Vec<bool> = (0..=n).map(|v| fixed[v].unwrap_or(false)).collect();
    let mut check_at: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for (i, c) in clauses.iter().enumerate() {
        let last = c
            .vars()
            .filter(|v| fixed[v.idx()].is_none())
            .map(|v| depth_of[v.idx()])
            .max();
        match last {
            Some(d) => check_at[d].push(i),
            None => {
                if !c.satisfied_by_model(&model) {
                    return None;
                }
            }
        }
    }
    if order.is_empty() {
        return Some(model);
    }
    // Iterative DFS: `tried[d]` counts values attempted at depth d.
    let mut tried = vec![0u8; order.len()];
    let mut d = 0usize;
    loop {
        if tried[d] == 2 {
            tried[d] = 0;
            if d == 0 {
                return None;
            }
            d -= 1;
            continue;
        }
        model[order[d]] = tried[d] == 1;
        tried[d] += 1;
        let ok = check_at[d]
            .iter()
            .all(|&i| clauses[i].satisfied_by_model(&model));
        if ok {
            if d + 1 == order.len() {
                return Some(model);
            }
            d += 1;
        }
    }
}

/// Lexicographically first model of `F`, or `Unsat`.
pub fn enum_sat(problem: &CnfProblem) -> Result<EnumResult, OracleError> {
    let n = problem.var_count() as usize;
    guard("variable", n, SAT_VAR_GUARD as usize)?;
    let fixed = vec![None; n + 1];
    Ok(match search(problem.clauses(), n, &fixed) {
        Some(m) => EnumResult::Sat(m),
        None => EnumResult::Unsat,
    })
}

/// `F ⇒ C`, decided as unsatisfiability of `F ∧ ¬C`.
pub fn implies(problem: &CnfProblem, clause: &Clause) -> Result<bool, OracleError> {
    let n = problem.var_count() as usize;
    guard("variable", n, SAT_VAR_GUARD as usize)?;
    let mut fixed = vec![None; n + 1];
    for l in clause.lits() {
        if l.var().idx() > n {
            // A literal over an unknown variable can always be falsified
            // independently, so it never helps the implication.
            continue;
        }
        fixed[l.var().idx()] = Some(!l.is_positive());
    }
    Ok(search(problem.clauses(), n, &fixed).is_none())
}

/// A Boolean function given by its value on every assignment to `vars`.
/// Entry `i` holds the value where `vars[j]` is bit `j` of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    vars: Vec<Var>,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn from_fn(vars: Vec<Var>, mut f: impl FnMut(usize) -> bool) -> TruthTable {
        let values = (0..1usize << vars.len()).map(&mut f).collect();
        TruthTable { vars, values }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, index: usize) -> bool {
        self.values[index]
    }

    /// Value at the assignment encoded by `index`, as `(var, value)` pairs.
    pub fn assignment(&self, index: usize) -> Vec<(Var, bool)> {
        self.vars
            .iter()
            .enumerate()
            .map(|(j, &v)| (v, index >> j & 1 == 1))
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn is_const(&self, value: bool) -> bool {
        self.values.iter().all(|&b| b == value)
    }
}

/// Truth table of `∃X.F` over the free variables `Y`.
pub fn qe_enum(problem: &CnfProblem) -> Result<TruthTable, OracleError> {
    let free = problem.free();
    let n = problem.var_count() as usize;
    guard("free variable", free.len(), QE_GUARD)?;
    guard("quantified variable", problem.quantified().len(), QE_GUARD)?;
    let clauses = problem.clauses();
    Ok(TruthTable::from_fn(free.clone(), |i| {
        let mut fixed = vec![None; n + 1];
        for (j, v) in free.iter().enumerate() {
            fixed[v.idx()] = Some(i >> j & 1 == 1);
        }
        search(clauses, n, &fixed).is_some()
    }))
}

/// Evaluates a clause set over an assignment given as a table index.
fn eval_clauses(clauses: &[Clause], table: &TruthTable, index: usize, n: usize) -> bool {
    let mut model = vec![false; n + 1];
    for (v, b) in table.assignment(index) {
        model[v.idx()] = b;
    }
    clauses.iter().all(|c| c.satisfied_by_model(&model))
}

/// True iff `H` is a solution to taking `G` out of `∃X.F`: `F ⇒ H` and
/// `∃X.F ≡ H ∧ ∃X.(F \ G)`.
pub fn verify_pqe(
    problem: &CnfProblem,
    targets: &BTreeSet<usize>,
    h: &[Clause],
) -> Result<bool, OracleError> {
    for c in h {
        if let Some(v) = c.vars().find(|&v| !problem.is_free(v)) {
            return Err(OracleError::QuantifiedInSolution(v));
        }
    }
    let full = qe_enum(problem)?;
    let rest = qe_enum(&problem.without(targets))?;
    let n = problem.var_count() as usize;
    Ok((0..full.values().len())
        .all(|i| full.get(i) == (eval_clauses(h, &full, i, n) && rest.get(i))))
}

/// Exact set of states reachable in exactly `k` transitions, as bitmasks
/// (bit `i-1` holds `s_i`).
pub fn bfs_reach(ts: &TransitionSystem, k: usize) -> Result<BTreeSet<u64>, OracleError> {
    guard("state bit", ts.state_bits(), STATE_BIT_GUARD)?;
    guard("transition input", ts.extra_inputs().len(), TS_INPUT_GUARD)?;
    let mut current: BTreeSet<u64> = ts.initial_states().into_iter().collect();
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for &s in &current {
            next.extend(ts.successors(s));
        }
        current = next;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[i32]) -> Clause {
        Clause::from_dimacs(v)
    }

    fn pqe_fixture() -> CnfProblem {
        CnfProblem::with_quantified(
            4,
            vec![c(&[-3, 4]), c(&[1, 3]), c(&[1, -4]), c(&[2, 4]), c(&[2, -4])],
            [Var::new(3), Var::new(4)],
        )
        .unwrap()
    }

    fn trace_fixture() -> CnfProblem {
        CnfProblem::new(
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
    fn enum_sat_cases() {
        assert_eq!(enum_sat(&trace_fixture()).unwrap(), EnumResult::Unsat);
        let empty = CnfProblem::new(3, vec![]).unwrap();
        assert_eq!(enum_sat(&empty).unwrap(), EnumResult::Sat(vec![false; 4]));
        let bottom = CnfProblem::new(2, vec![c(&[1]), Clause::empty()]).unwrap();
        assert_eq!(enum_sat(&bottom).unwrap(), EnumResult::Unsat);
        let big = CnfProblem::new(25, vec![]).unwrap();
        assert!(matches!(enum_sat(&big), Err(OracleError::Guard { .. })));
    }

    #[test]
    fn enum_sat_is_lexicographically_first() {
        let p = CnfProblem::new(3, vec![c(&[1, 2]), c(&[-2, 3])]).unwrap();
        assert_eq!(
            enum_sat(&p).unwrap(),
            EnumResult::Sat(vec![false, false, true, true])
        );
    }

    #[test]
    fn implication_cases() {
        assert!(implies(&pqe_fixture(), &c(&[1])).unwrap());
        assert!(implies(&pqe_fixture(), &c(&[2])).unwrap());
        assert!(!implies(&pqe_fixture(), &c(&[3])).unwrap());
        assert!(implies(&pqe_fixture(), &c(&[1, 3, 2])).unwrap());
        let f = CnfProblem::new(1, vec![c(&[1])]).unwrap();
        assert!(!implies(&f, &c(&[-1])).unwrap());
    }

    #[test]
    fn qe_of_small_formulas() {
        let t = qe_enum(&pqe_fixture()).unwrap();
        assert_eq!(t.vars(), &[Var::new(1), Var::new(2)]);
        assert_eq!(t.values(), &[false, false, false, true]);
        let free = CnfProblem::new(2, vec![c(&[1, -2])]).unwrap();
        assert_eq!(
            qe_enum(&free).unwrap().values(),
            &[true, true, false, true]
        );
        let unsat =
            CnfProblem::with_quantified(2, vec![c(&[2]), c(&[-2])], [Var::new(2)]).unwrap();
        assert!(qe_enum(&unsat).unwrap().is_const(false));
    }

    #[test]
    fn verify_pqe_cases() {
        let f = pqe_fixture();
        let g: BTreeSet<usize> = [0].into_iter().collect();
        assert!(verify_pqe(&f, &g, &[c(&[1])]).unwrap());
        assert!(!verify_pqe(&f, &g, &[]).unwrap());
        let all: BTreeSet<usize> = (0..5).collect();
        // Minterm clauses of the complement of y1 ∧ y2.
        let h = vec![c(&[1, 2]), c(&[1, -2]), c(&[-1, 2])];
        assert!(verify_pqe(&f, &all, &h).unwrap());
        assert_eq!(
            verify_pqe(&f, &g, &[c(&[3])]),
            Err(OracleError::QuantifiedInSolution(Var::new(3)))
        );
    }
}
