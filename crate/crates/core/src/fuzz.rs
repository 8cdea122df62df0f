//! Seeded instance generators. Every instance draws from its own stream
//! (seed, instance id), so corpora do not depend on evaluation order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Clause, CnfProblem, Var};
use crate::apps::InterpolationInstance;
use crate::circuits::{GateOp, Netlist, SignalKind, TransitionSystem};
use crate::pqe::PqeProblem;

/// Random stream for one instance.
pub fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A clause over distinct variables of `1..=vars` with `len` literals.
pub fn random_clause(rng: &mut impl Rng, vars: u32, len: usize) -> Clause {
    let mut pool: Vec<u32> = (1..=vars).collect();
    pool.shuffle(rng);
    Clause::new(
        pool.into_iter()
            .take(len.min(vars as usize))
            .map(|v| Var::new(v).lit(rng.gen_bool(0.5))),
    )
    .expect("distinct variables")
}

/// Random CNF with 1..=`max_vars` variables, 1..=`max_clauses` clauses of
/// length 1..=3. All variables are quantified.
pub fn sat_instance(seed: u64, id: u64, max_vars: u32, max_clauses: usize) -> CnfProblem {
    let mut rng = rng_for(seed, id);
    let vars = rng.gen_range(1..=max_vars);
    let count = rng.gen_range(1..=max_clauses);
    let clauses = (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            random_clause(&mut rng, vars, len)
        })
        .collect();
    CnfProblem::all_quantified(vars, clauses).expect("variables within range")
}

/// Random PQE instance: 2..=`max_vars` variables, each quantified with
/// probability one half, 2..=`max_clauses` clauses and 1..=`max_targets`
/// targets drawn from the quantified clauses when there are any.
pub fn pqe_instance(
    seed: u64,
    id: u64,
    max_vars: u32,
    max_clauses: usize,
    max_targets: usize,
) -> PqeProblem {
    let mut rng = rng_for(seed, id);
    let vars = rng.gen_range(2..=max_vars.max(2));
    let quantified: Vec<Var> = (1..=vars)
        .map(Var::new)
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    let count = rng.gen_range(2..=max_clauses.max(2));
    let clauses: Vec<Clause> = (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            random_clause(&mut rng, vars, len)
        })
        .collect();
    let problem =
        CnfProblem::with_quantified(vars, clauses, quantified).expect("variables within range");
    let mut pool: Vec<usize> = (0..count)
        .filter(|&i| problem.is_quantified_clause(problem.clause(i)))
        .collect();
    if pool.is_empty() {
        pool = (0..count).collect();
    }
    pool.shuffle(&mut rng);
    let k = rng.gen_range(1..=max_targets.max(1)).min(pool.len());
    PqeProblem::new(problem, pool.into_iter().take(k)).expect("targets in range")
}

fn clause_over(rng: &mut impl Rng, pool: &[Var], len: usize) -> Clause {
    let mut pool = pool.to_vec();
    pool.shuffle(rng);
    Clause::new(
        pool.into_iter()
            .take(len)
            .map(|v| v.lit(rng.gen_bool(0.5))),
    )
    .expect("distinct variables")
}

/// Random split `A(X,Y) ∧ B(Y,Z)` with at most `max_vars` variables in
/// total; variables are numbered `X`, then `Y`, then `Z`.
pub fn interpolation_instance(seed: u64, id: u64, max_vars: u32) -> InterpolationInstance {
    let mut rng = rng_for(seed, id);
    let total = rng.gen_range(6..=max_vars.max(6));
    let ny = rng.gen_range(1..=total / 3);
    let nx = rng.gen_range(1..=(total - ny - 1));
    let nz = total - ny - nx;
    let xs: Vec<Var> = (1..=nx + ny).map(Var::new).collect();
    let zs: Vec<Var> = (nx + 1..=total).map(Var::new).collect();
    let side = |rng: &mut ChaCha8Rng, pool: &[Var], n: u32| -> Vec<Clause> {
        let count = rng.gen_range(n as usize..=2 * n as usize + 2);
        (0..count)
            .map(|_| {
                let len = rng.gen_range(1..=3.min(pool.len()));
                clause_over(rng, pool, len)
            })
            .collect()
    };
    let a = side(&mut rng, &xs, nx + ny);
    let b = side(&mut rng, &zs, nz + ny);
    InterpolationInstance::new(total, a, b).expect("variables within range")
}

const OPS: [GateOp; 4] = [GateOp::And, GateOp::Or, GateOp::Xor, GateOp::Not];

/// Adds `count` random gates named `<prefix><k>`; operands lean towards
/// recent signals so later gates depend on earlier ones.
fn add_random_gates(rng: &mut impl Rng, nl: &mut Netlist, prefix: &str, count: usize) {
    for k in 0..count {
        let n = nl.signals().len();
        let pick = |rng: &mut dyn rand::RngCore| {
            let back = rng.gen_range(0..n.min(4));
            if rng.gen_bool(0.6) {
                n - 1 - back
            } else {
                rng.gen_range(0..n)
            }
        };
        let op = *OPS.choose(rng).expect("nonempty");
        let a = pick(rng);
        let operands = if op == GateOp::Not {
            vec![a]
        } else {
            let mut b = pick(rng);
            if b == a {
                b = (a + 1) % n;
            }
            vec![a, b]
        };
        nl.add_gate(&format!("{prefix}{k}"), op, &operands)
            .expect("fresh names and valid operands");
    }
}

/// Random single-output netlist with inputs `i0..` and gates `g0..`; the
/// output is the last gate.
pub fn random_netlist(rng: &mut impl Rng, inputs: usize, gates: usize) -> Netlist {
    let mut nl = Netlist::new();
    for j in 0..inputs {
        nl.add_input(&format!("i{j}")).expect("fresh name");
    }
    add_random_gates(rng, &mut nl, "g", gates.max(1));
    let last = *nl.gates().last().expect("at least one gate");
    nl.add_output(last);
    nl
}

/// Truth table of output 0 over all input vectors.
pub fn truth_table(nl: &Netlist) -> Vec<bool> {
    (0..1u64 << nl.inputs().len())
        .map(|m| nl.eval_outputs(&nl.input_vector(m))[0])
        .collect()
}

/// Random 3-bit transition system with one extra input and a random
/// initial-state formula, not stuttered.
pub fn transition_system(seed: u64, id: u64) -> TransitionSystem {
    let mut rng = rng_for(seed, id);
    let mut nl = Netlist::new();
    for i in 1..=3 {
        nl.add_input(&format!("s_{i}")).expect("fresh name");
    }
    if rng.gen_bool(0.5) {
        nl.add_input("in_1").expect("fresh name");
    }
    let count = rng.gen_range(2..=5);
    add_random_gates(&mut rng, &mut nl, "t", count);
    for i in 1..=3 {
        let n = nl.signals().len();
        let op = *OPS[..3].choose(&mut rng).expect("nonempty");
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        let g = nl
            .add_gate(&format!("next_{i}"), op, &[a, b])
            .expect("fresh name");
        nl.add_output(g);
    }
    let init_count = rng.gen_range(1..=3);
    let init = (0..init_count)
        .map(|_| {
            let len = rng.gen_range(1..=2);
            random_clause(&mut rng, 3, len)
        })
        .collect();
    let init = CnfProblem::new(3, init).expect("three variables");
    TransitionSystem::new(nl, init).expect("well-formed system")
}

/// Rewrites every gate with De Morgan and XOR expansions, so the result
/// computes the same function with different structure.
pub fn restructure(nl: &Netlist) -> Netlist {
    let mut out = Netlist::new();
    let mut map = vec![0usize; nl.signals().len()];
    for &i in nl.inputs() {
        map[i] = out.add_input(&nl.signal(i).name).expect("fresh name");
    }
    let mut fresh = 0usize;
    let mut gate = |out: &mut Netlist, op: GateOp, ins: &[usize]| {
        fresh += 1;
        out.add_gate(&format!("r{fresh}"), op, ins).expect("fresh name")
    };
    for &g in nl.gates() {
        let SignalKind::Gate { op, operands } = &nl.signal(g).kind else {
            unreachable!("gates list holds gates");
        };
        let ins: Vec<usize> = operands.iter().map(|&o| map[o]).collect();
        map[g] = match op {
            GateOp::And => {
                let na = gate(&mut out, GateOp::Not, &[ins[0]]);
                let nb = gate(&mut out, GateOp::Not, &[ins[1]]);
                let or = gate(&mut out, GateOp::Or, &[nb, na]);
                gate(&mut out, GateOp::Not, &[or])
            }
            GateOp::Or => {
                let na = gate(&mut out, GateOp::Not, &[ins[0]]);
                let nb = gate(&mut out, GateOp::Not, &[ins[1]]);
                let and = gate(&mut out, GateOp::And, &[nb, na]);
                gate(&mut out, GateOp::Not, &[and])
            }
            GateOp::Xor => {
                let na = gate(&mut out, GateOp::Not, &[ins[0]]);
                let nb = gate(&mut out, GateOp::Not, &[ins[1]]);
                let l = gate(&mut out, GateOp::And, &[ins[0], nb]);
                let r = gate(&mut out, GateOp::And, &[na, ins[1]]);
                gate(&mut out, GateOp::Or, &[r, l])
            }
            GateOp::Not => {
                let a = gate(&mut out, GateOp::Not, &[ins[0]]);
                let b = gate(&mut out, GateOp::Not, &[a]);
                gate(&mut out, GateOp::Not, &[b])
            }
        };
    }
    for &o in nl.outputs() {
        out.add_output(map[o]);
    }
    out
}

fn is_const(table: &[bool]) -> bool {
    table.iter().all(|&b| b) || table.iter().all(|&b| !b)
}

/// A copy of `nl` with one gate's operation replaced so that the output
/// function changes and stays non-constant; `None` if no single
/// replacement does that.
pub fn mutate(rng: &mut impl Rng, nl: &Netlist) -> Option<Netlist> {
    let reference = truth_table(nl);
    let mut gates: Vec<usize> = nl.gates().to_vec();
    gates.shuffle(rng);
    for g in gates {
        let SignalKind::Gate { op, operands } = &nl.signal(g).kind else {
            continue;
        };
        let choices: Vec<GateOp> = if *op == GateOp::Not {
            vec![]
        } else {
            OPS[..3].iter().copied().filter(|o| o != op).collect()
        };
        for new_op in choices {
            let mut copy = Netlist::new();
            for s in nl.signals() {
                match &s.kind {
                    SignalKind::Input => {
                        copy.add_input(&s.name).expect("fresh name");
                    }
                    SignalKind::Gate { op: o, operands: ins } => {
                        let o = if s.name == nl.signal(g).name { new_op } else { *o };
                        copy.add_gate(&s.name, o, ins).expect("same shape");
                    }
                }
            }
            copy.set_outputs(nl.outputs().to_vec());
            debug_assert_eq!(operands.len(), 2);
            let table = truth_table(&copy);
            if table != reference && !is_const(&table) {
                return Some(copy);
            }
        }
    }
    None
}

/// A non-constant random circuit with 2..=`max_inputs` inputs, the same
/// circuit restructured, and a mutant whose function differs.
pub fn eq_pair(seed: u64, id: u64, max_inputs: usize) -> (Netlist, Netlist, Netlist) {
    let mut rng = rng_for(seed, id);
    loop {
        let inputs = rng.gen_range(2..=max_inputs.max(2));
        let gates = rng.gen_range(2..=6);
        let nl = random_netlist(&mut rng, inputs, gates);
        let table = truth_table(&nl);
        if is_const(&table) {
            continue;
        }
        let Some(mutant) = mutate(&mut rng, &nl) else {
            continue;
        };
        let other = restructure(&nl);
        return (nl, other, mutant);
    }
}
