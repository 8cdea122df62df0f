//! Unit propagation over `F ∪ P` with a batch of simultaneous decisions,
//! and reverse-order conflict analysis.

use crate::cnf::{resolve, Binding, Clause, ClauseId, CnfError, Lit, PartialAssignment, Tag, Var};

/// Clause storage for propagation: the formula `F` and certificates `P`,
/// with per-literal occurrence lists. Clauses of `F` may be marked
/// conflict-only, in which case they never force a literal but are still
/// reported when falsified.
#[derive(Debug, Clone, Default)]
pub struct ClauseDb {
    f: Vec<Clause>,
    p: Vec<Clause>,
    propagating: Vec<bool>,
    occ_f: Vec<Vec<usize>>,
    occ_p: Vec<Vec<usize>>,
}

impl ClauseDb {
    pub fn new(var_count: u32, clauses: &[Clause]) -> ClauseDb {
        let slots = 2 * (var_count as usize + 1);
        let mut db = ClauseDb {
            occ_f: vec![Vec::new(); slots],
            occ_p: vec![Vec::new(); slots],
            ..ClauseDb::default()
        };
        for c in clauses {
            db.push_f(c.clone(), true);
        }
        db
    }

    fn ensure(&mut self, lit: Lit) {
        let need = lit.code().max((!lit).code()) + 1;
        if self.occ_f.len() < need {
            self.occ_f.resize(need, Vec::new());
            self.occ_p.resize(need, Vec::new());
        }
    }

    pub fn push_f(&mut self, clause: Clause, propagating: bool) -> usize {
        let id = self.f.len();
        for &l in clause.lits() {
            self.ensure(l);
            self.occ_f[l.code()].push(id);
        }
        self.f.push(clause);
        self.propagating.push(propagating);
        id
    }

    pub fn push_p(&mut self, clause: Clause) -> usize {
        let id = self.p.len();
        for &l in clause.lits() {
            self.ensure(l);
            self.occ_p[l.code()].push(id);
        }
        self.p.push(clause);
        id
    }

    pub fn set_propagating(&mut self, index: usize, on: bool) {
        self.propagating[index] = on;
    }

    pub fn is_propagating(&self, id: ClauseId) -> bool {
        match id {
            ClauseId::Formula(i) => self.propagating[i],
            ClauseId::Cert(_) => true,
        }
    }

    pub fn get(&self, id: ClauseId) -> &Clause {
        match id {
            ClauseId::Formula(i) => &self.f[i],
            ClauseId::Cert(i) => &self.p[i],
        }
    }

    pub fn f(&self) -> &[Clause] {
        &self.f
    }

    pub fn p(&self) -> &[Clause] {
        &self.p
    }

    /// Clauses of `F` containing `lit`, in index order.
    pub fn occurrences_f(&self, lit: Lit) -> &[usize] {
        self.occ_f.get(lit.code()).map_or(&[], |v| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    NoConflict,
    Conflict(ClauseId),
}

enum Status {
    Satisfied,
    Falsified,
    Unit(Lit),
    Open,
}

fn status(clause: &Clause, trail: &PartialAssignment) -> Status {
    let mut free = None;
    let mut count = 0;
    for &l in clause.lits() {
        match trail.lit_value(l) {
            Some(true) => return Status::Satisfied,
            Some(false) => {}
            None => {
                count += 1;
                free = Some(l);
                if count > 1 {
                    return Status::Open;
                }
            }
        }
    }
    match free {
        None => Status::Falsified,
        Some(l) => Status::Unit(l),
    }
}

/// Applies `decisions` as one batch, then propagates to fixpoint.
///
/// After the batch, every clause is visited once in index order (`F` then
/// `P`); falsified clauses end propagation, unit clauses are satisfied and
/// their literal queued. The queue is then drained first-in first-out,
/// visiting the occurrence lists of the negated literal (`F` then `P`).
pub fn propagate(
    db: &ClauseDb,
    trail: &mut PartialAssignment,
    decisions: &[Lit],
) -> Result<Propagation, CnfError> {
    for &d in decisions {
        trail.assign(d, Tag::Decision)?;
    }
    let mut queue = std::collections::VecDeque::new();
    let ids = (0..db.f.len())
        .map(ClauseId::Formula)
        .chain((0..db.p.len()).map(ClauseId::Cert));
    for id in ids {
        if let Some(conflict) = visit(db, trail, id, &mut queue) {
            return Ok(Propagation::Conflict(conflict));
        }
    }
    while let Some(lit) = queue.pop_front() {
        let neg = !lit;
        let fs = db.occ_f.get(neg.code()).map_or(&[][..], |v| v.as_slice());
        let ps = db.occ_p.get(neg.code()).map_or(&[][..], |v| v.as_slice());
        let ids = fs
            .iter()
            .map(|&i| ClauseId::Formula(i))
            .chain(ps.iter().map(|&i| ClauseId::Cert(i)));
        for id in ids {
            if let Some(conflict) = visit(db, trail, id, &mut queue) {
                return Ok(Propagation::Conflict(conflict));
            }
        }
    }
    Ok(Propagation::NoConflict)
}

fn visit(
    db: &ClauseDb,
    trail: &mut PartialAssignment,
    id: ClauseId,
    queue: &mut std::collections::VecDeque<Lit>,
) -> Option<ClauseId> {
    match status(db.get(id), trail) {
        Status::Falsified => Some(id),
        Status::Unit(l) if db.is_propagating(id) => {
            trail
                .assign(l, Tag::Propagated(id))
                .expect("unit literal is unassigned");
            queue.push_back(l);
            None
        }
        _ => None,
    }
}

/// Result of conflict analysis: the final clause and the resolution steps
/// taken (reason clause, pivot variable) in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub clause: Clause,
    pub steps: Vec<(ClauseId, Var)>,
}

/// True when `lit`'s falsifying binding may stay in an analyzed clause:
/// bound before `batch_start`, or a decision of the batch.
fn is_stop_literal(trail: &PartialAssignment, lit: Lit, batch_start: usize) -> bool {
    match trail.position(lit.var()) {
        Some(p) if p < batch_start => true,
        Some(p) => matches!(trail.bindings()[p].tag, Tag::Decision),
        None => false,
    }
}

/// Resolves `clause` (falsified by `trail`) with reason clauses in reverse
/// trail order until every literal is falsified by a binding made before
/// `batch_start` or by a decision of the batch starting there. The clause
/// itself is returned if it already qualifies.
pub fn analyze(
    db: &ClauseDb,
    trail: &PartialAssignment,
    clause: &Clause,
    batch_start: usize,
) -> Analysis {
    debug_assert!(trail.falsifies_clause(clause), "analysis needs a falsified clause");
    let mut current = clause.clone();
    let mut steps = Vec::new();
    loop {
        let latest = current
            .lits()
            .iter()
            .filter(|&&l| !is_stop_literal(trail, l, batch_start))
            .max_by_key(|l| trail.position(l.var()));
        let Some(&lit) = latest else {
            return Analysis {
                clause: current,
                steps,
            };
        };
        let Some(Binding {
            tag: Tag::Propagated(reason),
            ..
        }) = trail.binding_of(lit.var()).copied()
        else {
            unreachable!("non-stop literal is propagated");
        };
        current = resolve(&current, db.get(reason), lit.var())
            .expect("reason clause clashes only on the pivot");
        steps.push((reason, lit.var()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[i32]) -> Clause {
        Clause::from_dimacs(v)
    }

    fn lits(v: &[i32]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect()
    }

    fn trace_fixture() -> Vec<Clause> {
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
        ]
    }

    #[test]
    fn batch_then_propagate_to_conflict() {
        let db = ClauseDb::new(4, &[c(&[1, 2, 3]), c(&[1, 4]), c(&[2, -4])]);
        let mut t = PartialAssignment::new();
        let r = propagate(&db, &mut t, &lits(&[-1, -2])).unwrap();
        assert_eq!(t.value(Var::new(3)), Some(true));
        let Propagation::Conflict(id) = r else {
            panic!("expected a conflict")
        };
        let a = analyze(&db, &t, db.get(id), 0);
        assert!(a.clause.same_lits(&c(&[1, 2])));
        assert_eq!(a.steps.len(), 1);
    }

    #[test]
    fn no_units_no_change() {
        let db = ClauseDb::new(3, &[c(&[1, 2]), c(&[-2, 3])]);
        let mut t = PartialAssignment::new();
        assert_eq!(
            propagate(&db, &mut t, &[]).unwrap(),
            Propagation::NoConflict
        );
        assert!(t.is_empty());
    }

    #[test]
    fn first_vicinity_of_cluster_example() {
        let db = ClauseDb::new(6, &trace_fixture());
        let mut t = PartialAssignment::new();
        let r = propagate(&db, &mut t, &lits(&[1, -2])).unwrap();
        assert_eq!(r, Propagation::Conflict(ClauseId::Formula(6)));
        let b = t.binding_of(Var::new(4)).unwrap();
        assert_eq!(b.tag, Tag::Propagated(ClauseId::Formula(2)));
        let b = t.binding_of(Var::new(5)).unwrap();
        assert_eq!(b.tag, Tag::Propagated(ClauseId::Formula(5)));
        let a = analyze(&db, &t, db.get(ClauseId::Formula(6)), 0);
        assert!(a.clause.same_lits(&c(&[-1, 2])));
        let used: Vec<ClauseId> = a.steps.iter().map(|s| s.0).collect();
        assert_eq!(used, vec![ClauseId::Formula(5), ClauseId::Formula(2)]);
    }

    #[test]
    fn qualifying_conflict_returned_unresolved() {
        let db = ClauseDb::new(6, &trace_fixture());
        let mut t = PartialAssignment::new();
        let r = propagate(&db, &mut t, &lits(&[1, -3])).unwrap();
        assert_eq!(r, Propagation::Conflict(ClauseId::Formula(3)));
        let a = analyze(&db, &t, db.get(ClauseId::Formula(3)), 0);
        assert_eq!(a.clause, c(&[-1, 3]));
        assert!(a.steps.is_empty());
    }

    #[test]
    fn earlier_bindings_stop_resolution() {
        let db = ClauseDb::new(4, &[c(&[-1, 2]), c(&[-2, -3, -4])]);
        let mut t = PartialAssignment::new();
        propagate(&db, &mut t, &lits(&[1])).unwrap();
        let start = t.len();
        let r = propagate(&db, &mut t, &lits(&[3, 4])).unwrap();
        assert_eq!(r, Propagation::Conflict(ClauseId::Formula(1)));
        let a = analyze(&db, &t, db.get(ClauseId::Formula(1)), start);
        assert_eq!(a.clause, c(&[-2, -3, -4]));
        let root = analyze(&db, &t, db.get(ClauseId::Formula(1)), 0);
        assert!(root.clause.same_lits(&c(&[-1, -3, -4])));
    }

    #[test]
    fn conflict_only_clauses_do_not_propagate() {
        let mut db = ClauseDb::new(2, &[]);
        db.push_f(c(&[1, 2]), false);
        let mut t = PartialAssignment::new();
        assert_eq!(
            propagate(&db, &mut t, &lits(&[-1])).unwrap(),
            Propagation::NoConflict
        );
        assert_eq!(t.value(Var::new(2)), None);
        assert_eq!(
            propagate(&db, &mut t, &lits(&[-2])).unwrap(),
            Propagation::Conflict(ClauseId::Formula(0))
        );
    }
}
