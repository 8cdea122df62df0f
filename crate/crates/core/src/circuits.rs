//! Gate-level netlists, Tseitin encoding, transition systems with optional
//! stuttering, and time-frame unrolling.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::cnf::{Clause, CnfProblem, Lit, Var};
use crate::dimacs::{parse_dimacs, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("signal `{0}` is used before it is defined")]
    Undefined(String),
    #[error("signal `{0}` is defined twice")]
    Duplicate(String),
    #[error("gate `{name}`: {op} takes {expected} operand(s), got {got}")]
    Arity {
        name: String,
        op: String,
        expected: &'static str,
        got: usize,
    },
    #[error("transition system: {0}")]
    Transition(String),
    #[error("init file: {0}")]
    Init(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Or,
    Not,
    Xor,
}

impl GateOp {
    pub fn eval(self, values: &[bool]) -> bool {
        match self {
            GateOp::And => values.iter().all(|&b| b),
            GateOp::Or => values.iter().any(|&b| b),
            GateOp::Not => !values[0],
            GateOp::Xor => values.iter().fold(false, |a, &b| a ^ b),
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Not => "NOT",
            GateOp::Xor => "XOR",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignalKind {
    Input,
    Gate { op: GateOp, operands: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub name: String,
    pub kind: SignalKind,
}

/// An acyclic circuit. Signals are kept in definition order and referred
/// to by their position; every operand precedes its gate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Netlist {
    signals: Vec<Signal>,
    inputs: Vec<usize>,
    gates: Vec<usize>,
    outputs: Vec<usize>,
    by_name: HashMap<String, usize>,
}

impl Netlist {
    pub fn new() -> Netlist {
        Netlist::default()
    }

    fn define(&mut self, name: &str, kind: SignalKind) -> Result<usize, CircuitError> {
        if self.by_name.contains_key(name) {
            return Err(CircuitError::Duplicate(name.to_string()));
        }
        let id = self.signals.len();
        self.signals.push(Signal {
            name: name.to_string(),
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_input(&mut self, name: &str) -> Result<usize, CircuitError> {
        let id = self.define(name, SignalKind::Input)?;
        self.inputs.push(id);
        Ok(id)
    }

    /// Adds a primitive gate: NOT takes one operand, the others two.
    pub fn add_gate(
        &mut self,
        name: &str,
        op: GateOp,
        operands: &[usize],
    ) -> Result<usize, CircuitError> {
        let expected = if op == GateOp::Not { 1 } else { 2 };
        if operands.len() != expected {
            return Err(CircuitError::Arity {
                name: name.to_string(),
                op: op.to_string(),
                expected: if op == GateOp::Not { "1" } else { "2" },
                got: operands.len(),
            });
        }
        if let Some(&bad) = operands.iter().find(|&&o| o >= self.signals.len()) {
            return Err(CircuitError::Undefined(format!("#{bad}")));
        }
        let id = self.define(
            name,
            SignalKind::Gate {
                op,
                operands: operands.to_vec(),
            },
        )?;
        self.gates.push(id);
        Ok(id)
    }

    pub fn add_output(&mut self, signal: usize) {
        self.outputs.push(signal);
    }

    pub fn signal(&self, id: usize) -> &Signal {
        &self.signals[id]
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn gates(&self) -> &[usize] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn set_outputs(&mut self, outputs: Vec<usize>) {
        self.outputs = outputs;
    }

    /// A name not yet used, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.by_name.contains_key(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}${k}"))
            .find(|n| !self.by_name.contains_key(n))
            .expect("unbounded")
    }

    /// Values of every signal for the given input vector (input order).
    pub fn simulate(&self, inputs: &[bool]) -> Vec<bool> {
        assert_eq!(inputs.len(), self.inputs.len(), "input vector length");
        let mut values = vec![false; self.signals.len()];
        for (&id, &b) in self.inputs.iter().zip(inputs) {
            values[id] = b;
        }
        let mut buf = Vec::with_capacity(2);
        for &g in &self.gates {
            if let SignalKind::Gate { op, operands } = &self.signals[g].kind {
                buf.clear();
                buf.extend(operands.iter().map(|&o| values[o]));
                values[g] = op.eval(&buf);
            }
        }
        values
    }

    pub fn eval_outputs(&self, inputs: &[bool]) -> Vec<bool> {
        let values = self.simulate(inputs);
        self.outputs.iter().map(|&o| values[o]).collect()
    }

    /// Input vector from the low bits of `mask` (bit `j` is input `j`).
    pub fn input_vector(&self, mask: u64) -> Vec<bool> {
        (0..self.inputs.len()).map(|j| mask >> j & 1 == 1).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.signals {
            match &s.kind {
                SignalKind::Input => out.push_str(&format!("input {}\n", s.name)),
                SignalKind::Gate { op, operands } => {
                    let args: Vec<&str> = operands
                        .iter()
                        .map(|&o| self.signals[o].name.as_str())
                        .collect();
                    out.push_str(&format!("gate {} = {}({})\n", s.name, op, args.join(", ")));
                }
            }
        }
        for &o in &self.outputs {
            out.push_str(&format!("output {}\n", self.signals[o].name));
        }
        out
    }
}

/// Parses the netlist text format. `NAND`, `NOR`, `XNOR`, `BUF` and gates
/// with more than two operands are rewritten into primitive gates, with
/// helper signals named `<gate>$<k>`.
pub fn parse_netlist(text: &str) -> Result<Netlist, CircuitError> {
    let mut nl = Netlist::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: &str| CircuitError::Syntax {
            line,
            message: message.to_string(),
        };
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .ok_or_else(|| syntax("expected `input`, `gate` or `output` with a name"))?;
        let rest = rest.trim();
        match keyword {
            "input" => {
                check_name(rest).map_err(|m| syntax(&m))?;
                nl.add_input(rest)?;
            }
            "output" => {
                let id = nl
                    .lookup(rest)
                    .ok_or_else(|| CircuitError::Undefined(rest.to_string()))?;
                nl.add_output(id);
            }
            "gate" => {
                let (name, expr) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax("expected `gate <name> = OP(args)`"))?;
                let name = name.trim();
                check_name(name).map_err(|m| syntax(&m))?;
                let expr = expr.trim();
                let open = expr.find('(').ok_or_else(|| syntax("missing `(`"))?;
                if !expr.ends_with(')') {
                    return Err(syntax("missing `)`"));
                }
                let op = expr[..open].trim().to_ascii_uppercase();
                if !GATE_NAMES.contains(&op.as_str()) {
                    return Err(syntax(&format!("unknown gate type `{op}`")));
                }
                let args: Vec<&str> = expr[open + 1..expr.len() - 1]
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .collect();
                let mut operands = Vec::with_capacity(args.len());
                for a in args {
                    operands.push(
                        nl.lookup(a)
                            .ok_or_else(|| CircuitError::Undefined(a.to_string()))?,
                    );
                }
                add_derived_gate(&mut nl, name, &op, &operands)?;
            }
            _ => return Err(syntax(&format!("unknown statement `{keyword}`"))),
        }
    }
    Ok(nl)
}

const GATE_NAMES: [&str; 8] = ["AND", "OR", "NOT", "XOR", "NAND", "NOR", "XNOR", "BUF"];

fn check_name(name: &str) -> Result<(), String> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(format!("invalid signal name `{name}`"))
    }
}

fn add_derived_gate(
    nl: &mut Netlist,
    name: &str,
    op: &str,
    operands: &[usize],
) -> Result<usize, CircuitError> {
    let arity = |expected: &'static str| CircuitError::Arity {
        name: name.to_string(),
        op: op.to_string(),
        expected,
        got: operands.len(),
    };
    let mut helper = 0usize;
    let mut fresh = |nl: &Netlist| loop {
        helper += 1;
        let candidate = format!("{name}${helper}");
        if nl.lookup(&candidate).is_none() {
            return candidate;
        }
    };
    let mut chain = |nl: &mut Netlist, op: GateOp, last: &str| -> Result<usize, CircuitError> {
        let mut acc = operands[0];
        for (k, &o) in operands[1..].iter().enumerate() {
            let target = if k + 2 == operands.len() {
                last.to_string()
            } else {
                fresh(nl)
            };
            acc = nl.add_gate(&target, op, &[acc, o])?;
        }
        Ok(acc)
    };
    match op {
        "NOT" => {
            if operands.len() != 1 {
                return Err(arity("1"));
            }
            nl.add_gate(name, GateOp::Not, operands)
        }
        "BUF" => {
            if operands.len() != 1 {
                return Err(arity("1"));
            }
            let h = format!("{name}$1");
            let inner = nl.add_gate(&h, GateOp::Not, operands)?;
            nl.add_gate(name, GateOp::Not, &[inner])
        }
        "AND" | "OR" | "XOR" | "NAND" | "NOR" | "XNOR" => {
            if operands.len() < 2 {
                return Err(arity("at least 2"));
            }
            let (base, negate) = match op {
                "AND" => (GateOp::And, false),
                "OR" => (GateOp::Or, false),
                "XOR" => (GateOp::Xor, false),
                "NAND" => (GateOp::And, true),
                "NOR" => (GateOp::Or, true),
                _ => (GateOp::Xor, true),
            };
            if negate {
                let inner_name = format!("{name}$0");
                let inner = chain(nl, base, &inner_name)?;
                nl.add_gate(name, GateOp::Not, &[inner])
            } else {
                chain(nl, base, name)
            }
        }
        _ => unreachable!("gate names are checked by the parser"),
    }
}

/// Role of a signal's variable: circuit input (`V`), internal gate (`X`)
/// or output gate (`W`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalRole {
    Input,
    Internal,
    Output,
}

/// Variable assigned to each signal by an encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    pub signal_var: Vec<Var>,
    pub roles: Vec<SignalRole>,
}

impl VarMap {
    pub fn var(&self, signal: usize) -> Var {
        self.signal_var[signal]
    }

    pub fn vars_with(&self, role: SignalRole) -> Vec<Var> {
        self.roles
            .iter()
            .zip(&self.signal_var)
            .filter(|(r, _)| **r == role)
            .map(|(_, &v)| v)
            .collect()
    }
}

/// Constraint clauses of one gate `out = op(ins)`; tautologies are skipped.
pub fn gate_clauses(op: GateOp, out: Var, ins: &[Var]) -> Vec<Clause> {
    let p = |v: Var| v.lit(true);
    let n = |v: Var| v.lit(false);
    let raw: Vec<Vec<Lit>> = match op {
        GateOp::And => vec![
            vec![n(ins[0]), n(ins[1]), p(out)],
            vec![p(ins[0]), n(out)],
            vec![p(ins[1]), n(out)],
        ],
        GateOp::Or => vec![
            vec![p(ins[0]), p(ins[1]), n(out)],
            vec![n(ins[0]), p(out)],
            vec![n(ins[1]), p(out)],
        ],
        GateOp::Not => vec![vec![p(ins[0]), p(out)], vec![n(ins[0]), n(out)]],
        GateOp::Xor => vec![
            vec![n(ins[0]), n(ins[1]), n(out)],
            vec![p(ins[0]), p(ins[1]), n(out)],
            vec![p(ins[0]), n(ins[1]), p(out)],
            vec![n(ins[0]), p(ins[1]), p(out)],
        ],
    };
    raw.into_iter().filter_map(|c| Clause::new(c).ok()).collect()
}

/// Clauses of every gate, with signal variables given by `var_of`.
pub fn encode_gates(nl: &Netlist, var_of: &dyn Fn(usize) -> Var) -> Vec<Clause> {
    let mut out = Vec::new();
    for &g in nl.gates() {
        if let SignalKind::Gate { op, operands } = &nl.signal(g).kind {
            let ins: Vec<Var> = operands.iter().map(|&o| var_of(o)).collect();
            out.extend(gate_clauses(*op, var_of(g), &ins));
        }
    }
    out
}

/// Tseitin encoding. Inputs take variables `1..=|V|` in input order, gates
/// follow in gate order. Internal gates are quantified; inputs and
/// outputs are free.
pub fn tseitin_encode(nl: &Netlist) -> (CnfProblem, VarMap) {
    let map = tseitin_map(nl, 0);
    let clauses = encode_gates(nl, &|s| map.var(s));
    let count = nl.inputs().len() + nl.gates().len();
    let problem = CnfProblem::with_quantified(
        count as u32,
        clauses,
        map.vars_with(SignalRole::Internal),
    )
    .expect("variables within count");
    (problem, map)
}

/// Variable map with every variable shifted by `offset`.
pub fn tseitin_map(nl: &Netlist, offset: u32) -> VarMap {
    let mut signal_var = vec![Var::new(1); nl.signals().len()];
    let mut roles = vec![SignalRole::Internal; nl.signals().len()];
    let outputs: BTreeSet<usize> = nl.outputs().iter().copied().collect();
    for (j, &i) in nl.inputs().iter().enumerate() {
        signal_var[i] = Var::new(offset + j as u32 + 1);
        roles[i] = SignalRole::Input;
    }
    let base = offset + nl.inputs().len() as u32;
    for (j, &g) in nl.gates().iter().enumerate() {
        signal_var[g] = Var::new(base + j as u32 + 1);
        roles[g] = if outputs.contains(&g) {
            SignalRole::Output
        } else {
            SignalRole::Internal
        };
    }
    VarMap { signal_var, roles }
}

/// A netlist over present-state inputs `s_1..s_n` (plus optional free
/// inputs) with next-state signals, and an initial-state formula over
/// variables `1..=n` standing for `s_1..s_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    trans: Netlist,
    init: CnfProblem,
    state_inputs: Vec<usize>,
    next: Vec<usize>,
    extra: Vec<usize>,
}

impl TransitionSystem {
    /// Next-state signals are the outputs named `next_1..next_n`; the
    /// present state is read from inputs `s_1..s_n`.
    pub fn new(trans: Netlist, init: CnfProblem) -> Result<TransitionSystem, CircuitError> {
        let mut next = Vec::new();
        for &o in trans.outputs() {
            let name = &trans.signal(o).name;
            if let Some(idx) = name.strip_prefix("next_") {
                let i: usize = idx.parse().map_err(|_| {
                    CircuitError::Transition(format!("bad next-state name `{name}`"))
                })?;
                next.push((i, o));
            }
        }
        next.sort();
        let n = next.len();
        if n == 0 {
            return Err(CircuitError::Transition("no next_<i> outputs".into()));
        }
        if next.iter().enumerate().any(|(k, &(i, _))| i != k + 1) {
            return Err(CircuitError::Transition(
                "next-state outputs must be numbered next_1..next_n".into(),
            ));
        }
        let mut state_inputs = Vec::with_capacity(n);
        for i in 1..=n {
            let name = format!("s_{i}");
            let id = trans
                .lookup(&name)
                .filter(|&id| trans.signal(id).kind == SignalKind::Input)
                .ok_or_else(|| CircuitError::Transition(format!("missing input `{name}`")))?;
            state_inputs.push(id);
        }
        if init.var_count() as usize > n {
            return Err(CircuitError::Transition(format!(
                "init formula has {} variables but there are {n} state bits",
                init.var_count()
            )));
        }
        let extra = trans
            .inputs()
            .iter()
            .copied()
            .filter(|i| !state_inputs.contains(i))
            .collect();
        Ok(TransitionSystem {
            trans,
            init,
            state_inputs,
            next: next.into_iter().map(|(_, o)| o).collect(),
            extra,
        })
    }

    pub fn from_texts(netlist: &str, init: &str) -> Result<TransitionSystem, CircuitError> {
        TransitionSystem::new(parse_netlist(netlist)?, parse_dimacs(init)?)
    }

    pub fn state_bits(&self) -> usize {
        self.next.len()
    }

    pub fn trans(&self) -> &Netlist {
        &self.trans
    }

    pub fn init(&self) -> &CnfProblem {
        &self.init
    }

    pub fn next_signals(&self) -> &[usize] {
        &self.next
    }

    pub fn state_inputs(&self) -> &[usize] {
        &self.state_inputs
    }

    /// Inputs other than the present-state bits.
    pub fn extra_inputs(&self) -> &[usize] {
        &self.extra
    }

    pub fn is_initial(&self, state: u64) -> bool {
        let n = self.init.var_count() as usize;
        let model: Vec<bool> = (0..=n)
            .map(|v| v > 0 && state >> (v - 1) & 1 == 1)
            .collect();
        self.init.is_satisfied_by_model(&model)
    }

    pub fn initial_states(&self) -> Vec<u64> {
        (0..1u64 << self.state_bits())
            .filter(|&s| self.is_initial(s))
            .collect()
    }

    /// Next state from `state` under the extra-input vector `extra` (bit
    /// `j` drives extra input `j`).
    pub fn step(&self, state: u64, extra: u64) -> u64 {
        let position: HashMap<usize, usize> = self
            .trans
            .inputs()
            .iter()
            .enumerate()
            .map(|(j, &id)| (id, j))
            .collect();
        let mut inputs = vec![false; self.trans.inputs().len()];
        for (i, &id) in self.state_inputs.iter().enumerate() {
            inputs[position[&id]] = state >> i & 1 == 1;
        }
        for (j, &id) in self.extra.iter().enumerate() {
            inputs[position[&id]] = extra >> j & 1 == 1;
        }
        let values = self.trans.simulate(&inputs);
        self.next
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &o)| acc | (u64::from(values[o]) << i))
    }

    pub fn successors(&self, state: u64) -> BTreeSet<u64> {
        (0..1u64 << self.extra.len())
            .map(|e| self.step(state, e))
            .collect()
    }

    /// Whether every state has a transition to itself.
    pub fn stutters(&self) -> bool {
        (0..1u64 << self.state_bits()).all(|s| self.successors(s).contains(&s))
    }
}

/// Adds a fresh selector input; when it is 1 the next state equals the
/// present state, otherwise the original next-state function applies.
pub fn add_stutter(ts: &TransitionSystem) -> TransitionSystem {
    let mut nl = ts.trans.clone();
    let sel = nl
        .add_input(&nl.fresh_name("stutter_sel"))
        .expect("fresh name");
    let mut next = Vec::with_capacity(ts.next.len());
    for (i, (&s, &n)) in ts.state_inputs.iter().zip(&ts.next).enumerate() {
        let bit = i + 1;
        let d = nl
            .add_gate(&nl.fresh_name(&format!("stutter_d{bit}")), GateOp::Xor, &[s, n])
            .expect("fresh name");
        let a = nl
            .add_gate(&nl.fresh_name(&format!("stutter_a{bit}")), GateOp::And, &[sel, d])
            .expect("fresh name");
        let out = nl
            .add_gate(&nl.fresh_name(&format!("stutter_next{bit}")), GateOp::Xor, &[n, a])
            .expect("fresh name");
        next.push(out);
    }
    let others: Vec<usize> = nl
        .outputs()
        .iter()
        .copied()
        .filter(|o| !ts.next.contains(o))
        .collect();
    nl.set_outputs(next.iter().copied().chain(others).collect());
    let mut extra = ts.extra.clone();
    extra.push(sel);
    TransitionSystem {
        trans: nl,
        init: ts.init.clone(),
        state_inputs: ts.state_inputs.clone(),
        next,
        extra,
    }
}

/// Variables of one time frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMap {
    pub state: Vec<Var>,
    pub signal_var: Vec<Var>,
}

/// An unrolled transition system. `targets` lists the clause indices of
/// the second copy of the initial-state formula, when requested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unrolling {
    pub problem: CnfProblem,
    pub targets: Vec<usize>,
    pub frames: Vec<FrameMap>,
    pub final_state: Vec<Var>,
}

/// `I(S1) [∧ I(S2)] ∧ T(S1,S2) ∧ … ∧ T(Sk,Sk+1)` with every variable
/// except those of `Sk+1` quantified. Variables are numbered frame by
/// frame: state bits, then extra inputs, then gates.
pub fn unroll(ts: &TransitionSystem, k: usize, duplicate_init: bool) -> Unrolling {
    assert!(k >= 1, "unrolling needs at least one frame");
    let n = ts.state_bits();
    let nl = &ts.trans;
    let per_frame = n + ts.extra.len() + nl.gates().len();
    let mut frames = Vec::with_capacity(k);
    let mut next_var = 1u32;
    let mut take = |count: usize| -> Vec<Var> {
        let vars = (0..count).map(|j| Var::new(next_var + j as u32)).collect();
        next_var += count as u32;
        vars
    };
    for _ in 0..k {
        let state = take(n);
        let extra = take(ts.extra.len());
        let gates = take(nl.gates().len());
        let mut signal_var = vec![Var::new(1); nl.signals().len()];
        for (i, &id) in ts.state_inputs.iter().enumerate() {
            signal_var[id] = state[i];
        }
        for (j, &id) in ts.extra.iter().enumerate() {
            signal_var[id] = extra[j];
        }
        for (j, &id) in nl.gates().iter().enumerate() {
            signal_var[id] = gates[j];
        }
        frames.push(FrameMap { state, signal_var });
    }
    let final_state = take(n);
    let var_count = (k * per_frame + n) as u32;

    let instantiate = |c: &Clause, state: &[Var]| -> Clause {
        Clause::new(
            c.lits()
                .iter()
                .map(|l| state[l.var().idx() - 1].lit(l.is_positive())),
        )
        .expect("renaming keeps clauses tautology-free")
    };
    let mut clauses: Vec<Clause> = ts
        .init
        .clauses()
        .iter()
        .map(|c| instantiate(c, &frames[0].state))
        .collect();
    let mut targets = Vec::new();
    if duplicate_init {
        let s2 = if k >= 2 {
            frames[1].state.clone()
        } else {
            final_state.clone()
        };
        for c in ts.init.clauses() {
            targets.push(clauses.len());
            clauses.push(instantiate(c, &s2));
        }
    }
    for (i, frame) in frames.iter().enumerate() {
        clauses.extend(encode_gates(nl, &|s| frame.signal_var[s]));
        let succ = if i + 1 < k {
            &frames[i + 1].state
        } else {
            &final_state
        };
        for (j, &o) in ts.next.iter().enumerate() {
            let a = succ[j];
            let b = frame.signal_var[o];
            clauses.push(Clause::new([a.lit(false), b.lit(true)]).expect("distinct vars"));
            clauses.push(Clause::new([a.lit(true), b.lit(false)]).expect("distinct vars"));
        }
    }
    let quantified = (1..=var_count)
        .map(Var::new)
        .filter(|v| !final_state.contains(v));
    let problem = CnfProblem::with_quantified(var_count, clauses, quantified)
        .expect("variables within count");
    Unrolling {
        problem,
        targets,
        frames,
        final_state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{bfs_reach, enum_sat, qe_enum, EnumResult};

    const COUNTER: &str = "input s_1\ninput s_2\ngate next_1 = NOT(s_1)\ngate next_2 = XOR(s_2, s_1)\noutput next_1\noutput next_2\n";
    const ENABLE_COUNTER: &str = "input s_1\ninput s_2\ninput en\ngate next_1 = XOR(s_1, en)\ngate carry = AND(s_1, en)\ngate next_2 = XOR(s_2, carry)\noutput next_1\noutput next_2\n";
    const INIT_00: &str = "p cnf 2 2\n-1 0\n-2 0\n";

    fn c(v: &[i32]) -> Clause {
        Clause::from_dimacs(v)
    }

    #[test]
    fn and_gate_clauses() {
        let v = |i| Var::new(i);
        assert_eq!(
            gate_clauses(GateOp::And, v(3), &[v(1), v(2)]),
            vec![c(&[-1, -2, 3]), c(&[1, -3]), c(&[2, -3])]
        );
        assert_eq!(
            gate_clauses(GateOp::Not, v(2), &[v(1)]),
            vec![c(&[1, 2]), c(&[-1, -2])]
        );
        assert_eq!(gate_clauses(GateOp::Xor, v(2), &[v(1), v(1)]).len(), 2);
    }

    #[test]
    fn parse_desugars_rich_gates() {
        let nl = parse_netlist(
            "# comment\ninput a\ninput b\ninput c\ngate n = NAND(a, b, c) # trailing\ngate x = XNOR(a, b)\ngate y = BUF(c)\noutput n\noutput x\noutput y\n",
        )
        .unwrap();
        for mask in 0..8u64 {
            let iv = nl.input_vector(mask);
            let out = nl.eval_outputs(&iv);
            assert_eq!(out[0], !(iv[0] && iv[1] && iv[2]));
            assert_eq!(out[1], iv[0] == iv[1]);
            assert_eq!(out[2], iv[2]);
        }
        assert!(nl.lookup("n$1").is_some());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_netlist("input a\ngate g = AND(a, b)\n"),
            Err(CircuitError::Undefined("b".into()))
        );
        assert!(matches!(
            parse_netlist("input a\ngate g = NOT(a, a)\n"),
            Err(CircuitError::Arity { .. })
        ));
        assert_eq!(
            parse_netlist("input a\ninput a\n"),
            Err(CircuitError::Duplicate("a".into()))
        );
        assert!(matches!(
            parse_netlist("input a\nwire b\n"),
            Err(CircuitError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn encoding_matches_simulation() {
        let nl = parse_netlist(
            "input a\ninput b\ninput c\ngate t = AND(a, b)\ngate u = OR(t, c)\ngate w = XOR(u, a)\ngate z = NOT(w)\noutput z\n",
        )
        .unwrap();
        let (p, map) = tseitin_encode(&nl);
        assert_eq!(map.vars_with(SignalRole::Input).len(), 3);
        assert_eq!(map.vars_with(SignalRole::Output), vec![Var::new(7)]);
        for mask in 0..8u64 {
            let iv = nl.input_vector(mask);
            let values = nl.simulate(&iv);
            let mut fixed = p.clone();
            for (j, &i) in nl.inputs().iter().enumerate() {
                fixed
                    .push_clause(Clause::new([map.var(i).lit(iv[j])]).unwrap())
                    .unwrap();
            }
            let EnumResult::Sat(model) = enum_sat(&fixed).unwrap() else {
                panic!("encoding must be satisfiable for every input");
            };
            for (s, &val) in values.iter().enumerate() {
                assert_eq!(model[map.var(s).idx()], val);
            }
            let z = map.var(nl.outputs()[0]);
            let mut wrong = fixed.clone();
            wrong
                .push_clause(Clause::new([z.lit(!values[nl.outputs()[0]])]).unwrap())
                .unwrap();
            assert_eq!(enum_sat(&wrong).unwrap(), EnumResult::Unsat);
        }
    }

    #[test]
    fn counter_reachability() {
        let ts = TransitionSystem::from_texts(COUNTER, INIT_00).unwrap();
        assert_eq!(bfs_reach(&ts, 0).unwrap(), [0].into_iter().collect());
        assert_eq!(bfs_reach(&ts, 1).unwrap(), [1].into_iter().collect());
        let st = add_stutter(&ts);
        assert!(st.stutters());
        assert!(!ts.stutters());
        assert_eq!(bfs_reach(&st, 1).unwrap(), [0, 1].into_iter().collect());
        let mut prev = bfs_reach(&st, 0).unwrap();
        for k in 1..=5 {
            let r = bfs_reach(&st, k).unwrap();
            assert!(r.is_superset(&prev));
            prev = r;
        }
        assert_eq!(bfs_reach(&st, 2).unwrap().len(), 3);
        assert_eq!(bfs_reach(&st, 3).unwrap(), bfs_reach(&st, 4).unwrap());
    }

    #[test]
    fn stutter_is_idempotent_on_reachability() {
        let ts = add_stutter(&TransitionSystem::from_texts(COUNTER, INIT_00).unwrap());
        let twice = add_stutter(&ts);
        for k in 0..=6 {
            assert_eq!(bfs_reach(&ts, k).unwrap(), bfs_reach(&twice, k).unwrap());
        }
    }

    #[test]
    fn unroll_shapes() {
        let ts = TransitionSystem::from_texts(COUNTER, INIT_00).unwrap();
        let u = unroll(&ts, 1, false);
        assert_eq!(u.problem.free(), u.final_state);
        assert!(u.targets.is_empty());
        let u2 = unroll(&ts, 2, true);
        assert_eq!(u2.targets, vec![2, 3]);
        assert_eq!(u2.problem.clause(2), &c(&[-(u2.frames[1].state[0].index() as i32)]));
        let mut seen = BTreeSet::new();
        for f in &u2.frames {
            for v in f.state.iter() {
                assert!(seen.insert(*v));
            }
        }
        for v in &u2.final_state {
            assert!(seen.insert(*v));
        }
    }

    #[test]
    fn unrolled_image_matches_bfs() {
        let ts = TransitionSystem::from_texts(ENABLE_COUNTER, INIT_00).unwrap();
        for k in 1..=2 {
            let u = unroll(&ts, k, false);
            let table = qe_enum(&u.problem).unwrap();
            let reach = bfs_reach(&ts, k).unwrap();
            for i in 0..table.values().len() {
                let mut state = 0u64;
                for (v, b) in table.assignment(i) {
                    let bit = u.final_state.iter().position(|&s| s == v).unwrap();
                    state |= u64::from(b) << bit;
                }
                assert_eq!(table.get(i), reach.contains(&state), "k={k} state={state}");
            }
        }
    }
}
