//! Propositional objects shared by every engine: variables, literals,
//! clauses, existentially quantified CNF problems and partial assignments.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Not;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("clause is tautological on variable {0}")]
    Tautology(Var),
    #[error("literal 0 is not a literal")]
    ZeroLiteral,
    #[error("clauses are not resolvable on {var}: {clashes} clashing variables")]
    NotResolvable { var: Var, clashes: usize },
    #[error("variable {0} does not occur in the clause")]
    VarNotInClause(Var),
    #[error("clause index {0} is out of range")]
    NoSuchClause(usize),
    #[error("variable {0} is already assigned")]
    AlreadyAssigned(Var),
    #[error("variable {var} exceeds declared count {count}")]
    VarOutOfRange { var: Var, count: u32 },
}

/// A propositional variable, 1-based as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variables are 1-based");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn idx(self) -> usize {
        self.0 as usize
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            Lit(self.0 as i32)
        } else {
            Lit(-(self.0 as i32))
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal, stored as a signed DIMACS integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(value: i32) -> Result<Lit, CnfError> {
        if value == 0 {
            Err(CnfError::ZeroLiteral)
        } else {
            Ok(Lit(value))
        }
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Dense index usable for per-literal tables: `2 * var + sign`.
    pub fn code(self) -> usize {
        2 * self.var().idx() + usize::from(self.0 < 0)
    }

    /// The value this literal takes under `value` for its variable.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.0)
        } else {
            write!(f, "¬x{}", -self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Origin {
    Input,
    Learned,
}

/// A disjunction of literals. Duplicates are dropped on construction and
/// tautologies are rejected; the empty clause stands for falsity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
    origin: Origin,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<Clause, CnfError> {
        Clause::with_origin(lits, Origin::Input)
    }

    pub fn learned(lits: impl IntoIterator<Item = Lit>) -> Result<Clause, CnfError> {
        Clause::with_origin(lits, Origin::Learned)
    }

    pub fn with_origin(
        lits: impl IntoIterator<Item = Lit>,
        origin: Origin,
    ) -> Result<Clause, CnfError> {
        let mut out: Vec<Lit> = Vec::new();
        for lit in lits {
            if out.contains(&!lit) {
                return Err(CnfError::Tautology(lit.var()));
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Ok(Clause { lits: out, origin })
    }

    /// Builds a clause from DIMACS integers; panics on 0 or tautologies.
    /// Intended for tests and hand-written fixtures.
    pub fn from_dimacs(values: &[i32]) -> Clause {
        let lits = values
            .iter()
            .map(|&v| Lit::from_dimacs(v).expect("nonzero literal"));
        Clause::new(lits).expect("tautology-free clause")
    }

    pub fn empty() -> Clause {
        Clause {
            lits: Vec::new(),
            origin: Origin::Learned,
        }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.lits.iter().any(|l| l.var() == var)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }

    /// Literal set equality, ignoring order and origin.
    pub fn same_lits(&self, other: &Clause) -> bool {
        self.len() == other.len() && self.lits.iter().all(|l| other.contains(*l))
    }

    pub fn is_subset_of(&self, other: &Clause) -> bool {
        self.lits.iter().all(|l| other.contains(*l))
    }

    /// True when every literal is satisfied by a full assignment
    /// (`model[v]` is the value of variable `v`; index 0 unused).
    pub fn satisfied_by_model(&self, model: &[bool]) -> bool {
        self.lits.iter().any(|l| l.eval(model[l.var().idx()]))
    }

    pub fn sorted_dimacs(&self) -> Vec<i32> {
        let mut v = self.to_dimacs();
        v.sort_by_key(|x| (x.unsigned_abs(), *x < 0));
        v
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        let parts: Vec<String> = self.lits.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" ∨ "))
    }
}

/// Role of a variable in `∃X.F(X,Y)`. `Fixed` marks variables removed by a
/// cofactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Free,
    Quantified,
    Fixed,
}

/// A CNF formula with an existential prefix: `∃X.F(X,Y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfProblem {
    clauses: Vec<Clause>,
    var_count: u32,
    roles: Vec<VarRole>,
}

impl CnfProblem {
    /// All variables free.
    pub fn new(var_count: u32, clauses: Vec<Clause>) -> Result<CnfProblem, CnfError> {
        CnfProblem::with_quantified(var_count, clauses, std::iter::empty())
    }

    pub fn with_quantified(
        var_count: u32,
        clauses: Vec<Clause>,
        quantified: impl IntoIterator<Item = Var>,
    ) -> Result<CnfProblem, CnfError> {
        let mut roles = vec![VarRole::Free; var_count as usize + 1];
        roles[0] = VarRole::Fixed;
        for v in quantified {
            if v.index() > var_count {
                return Err(CnfError::VarOutOfRange {
                    var: v,
                    count: var_count,
                });
            }
            roles[v.idx()] = VarRole::Quantified;
        }
        for c in &clauses {
            for v in c.vars() {
                if v.index() > var_count {
                    return Err(CnfError::VarOutOfRange {
                        var: v,
                        count: var_count,
                    });
                }
            }
        }
        Ok(CnfProblem {
            clauses,
            var_count,
            roles,
        })
    }

    /// Every variable quantified, as in plain satisfiability.
    pub fn all_quantified(var_count: u32, clauses: Vec<Clause>) -> Result<CnfProblem, CnfError> {
        CnfProblem::with_quantified(var_count, clauses, (1..=var_count).map(Var::new))
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn role(&self, var: Var) -> VarRole {
        self.roles
            .get(var.idx())
            .copied()
            .unwrap_or(VarRole::Fixed)
    }

    pub fn is_quantified(&self, var: Var) -> bool {
        self.role(var) == VarRole::Quantified
    }

    pub fn is_free(&self, var: Var) -> bool {
        self.role(var) == VarRole::Free
    }

    pub fn quantified(&self) -> Vec<Var> {
        self.vars_with(VarRole::Quantified)
    }

    pub fn free(&self) -> Vec<Var> {
        self.vars_with(VarRole::Free)
    }

    fn vars_with(&self, role: VarRole) -> Vec<Var> {
        (1..=self.var_count)
            .map(Var::new)
            .filter(|&v| self.roles[v.idx()] == role)
            .collect()
    }

    /// A clause is quantified when it mentions a quantified variable.
    pub fn is_quantified_clause(&self, clause: &Clause) -> bool {
        clause.vars().any(|v| self.is_quantified(v))
    }

    pub fn push_clause(&mut self, clause: Clause) -> Result<usize, CnfError> {
        for v in clause.vars() {
            if v.index() > self.var_count {
                return Err(CnfError::VarOutOfRange {
                    var: v,
                    count: self.var_count,
                });
            }
        }
        self.clauses.push(clause);
        Ok(self.clauses.len() - 1)
    }

    pub fn set_role(&mut self, var: Var, role: VarRole) {
        self.roles[var.idx()] = role;
    }

    /// Same variables and roles, different clause list.
    pub fn with_clauses(&self, clauses: Vec<Clause>) -> CnfProblem {
        CnfProblem {
            clauses,
            var_count: self.var_count,
            roles: self.roles.clone(),
        }
    }

    /// The problem with the clauses at `indices` removed (`F \ G`).
    pub fn without(&self, indices: &BTreeSet<usize>) -> CnfProblem {
        let clauses = self
            .clauses
            .iter()
            .enumerate()
            .filter(|(i, _)| !indices.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        self.with_clauses(clauses)
    }

    /// The first `len` clauses.
    pub fn prefix(&self, len: usize) -> CnfProblem {
        self.with_clauses(self.clauses[..len].to_vec())
    }

    pub fn is_satisfied_by_model(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by_model(model))
    }
}

/// Identifies a clause in the formula `F` or in a certificate set `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClauseId {
    Formula(usize),
    Cert(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Decision,
    Propagated(ClauseId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Binding {
    /// The literal made true by this binding.
    pub lit: Lit,
    pub tag: Tag,
}

/// Ordered variable bindings with decision/propagation tags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    bindings: Vec<Binding>,
    values: Vec<Option<bool>>,
    position: Vec<u32>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    /// Decisions making each literal true, in order.
    pub fn from_lits(lits: &[Lit]) -> Result<PartialAssignment, CnfError> {
        let mut q = PartialAssignment::new();
        for &l in lits {
            q.assign(l, Tag::Decision)?;
        }
        Ok(q)
    }

    pub fn assign(&mut self, lit: Lit, tag: Tag) -> Result<(), CnfError> {
        let v = lit.var().idx();
        if v >= self.values.len() {
            self.values.resize(v + 1, None);
            self.position.resize(v + 1, u32::MAX);
        }
        if self.values[v].is_some() {
            return Err(CnfError::AlreadyAssigned(lit.var()));
        }
        self.values[v] = Some(lit.is_positive());
        self.position[v] = self.bindings.len() as u32;
        self.bindings.push(Binding { lit, tag });
        Ok(())
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.values.get(var.idx()).copied().flatten()
    }

    /// `Some(true)` if satisfied, `Some(false)` if falsified, `None` if free.
    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var()).map(|v| lit.eval(v))
    }

    pub fn is_assigned(&self, var: Var) -> bool {
        self.value(var).is_some()
    }

    pub fn satisfies(&self, lit: Lit) -> bool {
        self.lit_value(lit) == Some(true)
    }

    pub fn falsifies(&self, lit: Lit) -> bool {
        self.lit_value(lit) == Some(false)
    }

    pub fn satisfies_clause(&self, clause: &Clause) -> bool {
        clause.lits().iter().any(|&l| self.satisfies(l))
    }

    pub fn falsifies_clause(&self, clause: &Clause) -> bool {
        clause.lits().iter().all(|&l| self.falsifies(l))
    }

    /// Trail position of a bound variable.
    pub fn position(&self, var: Var) -> Option<usize> {
        match self.position.get(var.idx()) {
            Some(&p) if p != u32::MAX => Some(p as usize),
            _ => None,
        }
    }

    pub fn binding_of(&self, var: Var) -> Option<&Binding> {
        self.position(var).map(|p| &self.bindings[p])
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Undo every binding made after the first `len`.
    pub fn truncate(&mut self, len: usize) {
        while self.bindings.len() > len {
            let b = self.bindings.pop().expect("nonempty");
            let v = b.lit.var().idx();
            self.values[v] = None;
            self.position[v] = u32::MAX;
        }
    }

    /// Bound variables, `Va(q)`.
    pub fn assigned_vars(&self) -> BTreeSet<Var> {
        self.bindings.iter().map(|b| b.lit.var()).collect()
    }

    pub fn lits(&self) -> Vec<Lit> {
        self.bindings.iter().map(|b| b.lit).collect()
    }

    /// Full assignment over `1..=var_count`, unbound variables set to 0.
    pub fn to_model(&self, var_count: u32) -> Vec<bool> {
        (0..=var_count as usize)
            .map(|v| {
                if v == 0 {
                    false
                } else {
                    self.values.get(v).copied().flatten().unwrap_or(false)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cofactor {
    Satisfied,
    Clause(Clause),
}

/// `C_q`: the clause under `q`.
pub fn cofactor_clause(clause: &Clause, q: &PartialAssignment) -> Cofactor {
    if q.satisfies_clause(clause) {
        return Cofactor::Satisfied;
    }
    let lits: Vec<Lit> = clause
        .lits()
        .iter()
        .copied()
        .filter(|&l| !q.falsifies(l))
        .collect();
    Cofactor::Clause(Clause {
        lits,
        origin: clause.origin(),
    })
}

/// `F_q`: satisfied clauses dropped, falsified literals removed, assigned
/// variables no longer free or quantified.
pub fn cofactor_formula(problem: &CnfProblem, q: &PartialAssignment) -> CnfProblem {
    let clauses = problem
        .clauses()
        .iter()
        .filter_map(|c| match cofactor_clause(c, q) {
            Cofactor::Satisfied => None,
            Cofactor::Clause(c) => Some(c),
        })
        .collect();
    let mut out = problem.with_clauses(clauses);
    for v in q.assigned_vars() {
        if v.index() <= out.var_count() {
            out.set_role(v, VarRole::Fixed);
        }
    }
    out
}

/// Variables on which the two clauses carry opposite literals.
pub fn clashing_vars(a: &Clause, b: &Clause) -> Vec<Var> {
    a.lits()
        .iter()
        .filter(|&&l| b.contains(!l))
        .map(|l| l.var())
        .collect()
}

/// The unique clashing variable, if the clauses are resolvable.
pub fn resolvable(a: &Clause, b: &Clause) -> Option<Var> {
    let clashes = clashing_vars(a, b);
    if clashes.len() == 1 {
        Some(clashes[0])
    } else {
        None
    }
}

/// Resolvent of `a` and `b` on `var`: literals of `a` then the new
/// literals of `b`, both literals of `var` removed.
pub fn resolve(a: &Clause, b: &Clause, var: Var) -> Result<Clause, CnfError> {
    let clashes = clashing_vars(a, b);
    if clashes.len() != 1 || clashes[0] != var {
        return Err(CnfError::NotResolvable {
            var,
            clashes: clashes.len(),
        });
    }
    let lits = a
        .lits()
        .iter()
        .chain(b.lits())
        .copied()
        .filter(|l| l.var() != var);
    Clause::learned(lits)
}

/// `C` is blocked at `w` in `F` when no clause of `F` is resolvable with it
/// on `w`.
pub fn is_blocked(problem: &CnfProblem, clause: &Clause, w: Var) -> Result<bool, CnfError> {
    if !clause.contains_var(w) {
        return Err(CnfError::VarNotInClause(w));
    }
    Ok(!problem
        .clauses()
        .iter()
        .any(|other| resolvable(clause, other) == Some(w)))
}

/// The cluster of clause `index`: the clause itself, then every clause of
/// `F` outside `excluded` sharing an identical literal with it, in index
/// order.
pub fn cluster_of(
    problem: &CnfProblem,
    index: usize,
    excluded: &BTreeSet<usize>,
) -> Result<Vec<usize>, CnfError> {
    let primary = problem
        .clauses()
        .get(index)
        .ok_or(CnfError::NoSuchClause(index))?;
    let mut out = vec![index];
    for (i, c) in problem.clauses().iter().enumerate() {
        if i == index || excluded.contains(&i) {
            continue;
        }
        if c.lits().iter().any(|&l| primary.contains(l)) {
            out.push(i);
        }
    }
    Ok(out)
}
