//! DIMACS CNF reading and writing, with the QDIMACS-style existential line
//! `e v1 v2 … 0` and the `c targets i1 i2 … 0` comment used for PQE inputs.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Clause, CnfError, CnfProblem, Lit, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: missing or malformed header, expected `p cnf <vars> <clauses>`")]
    BadHeader { line: usize },
    #[error("line {line}: clause before header")]
    MissingHeader { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds var count {count}")]
    LiteralOutOfRange { line: usize, lit: i32, count: u32 },
    #[error("line {line}: clause not terminated by 0")]
    Unterminated { line: usize },
    #[error("line {line}: duplicate `e` line")]
    DuplicateExistential { line: usize },
    #[error("line {line}: `e` line must precede all clauses")]
    LateExistential { line: usize },
    #[error("line {line}: tautological clause on x{var}")]
    Tautology { line: usize, var: u32 },
    #[error("line {line}: target index {index} is not a clause index")]
    BadTarget { line: usize, index: usize },
}

/// A parsed file: the problem and, if present, the 0-based target indices
/// from a `c targets … 0` comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsFile {
    pub problem: CnfProblem,
    pub targets: Option<Vec<usize>>,
}

pub fn parse_dimacs(text: &str) -> Result<CnfProblem, ParseError> {
    parse_dimacs_file(text).map(|f| f.problem)
}

pub fn parse_dimacs_file(text: &str) -> Result<DimacsFile, ParseError> {
    let mut header: Option<u32> = None;
    let mut quantified: Option<Vec<Var>> = None;
    let mut targets: Option<(usize, Vec<usize>)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();
    let mut pending_line = 0;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            let mut words = rest.split_whitespace();
            if words.next() == Some("targets") {
                let mut list = Vec::new();
                for w in words {
                    let n: usize = w.parse().map_err(|_| ParseError::BadToken {
                        line,
                        token: w.to_string(),
                    })?;
                    if n == 0 {
                        break;
                    }
                    list.push(n);
                }
                targets = Some((line, list));
            }
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(ParseError::BadHeader { line });
            }
            let vars: u32 = parts[2].parse().map_err(|_| ParseError::BadHeader { line })?;
            let _: usize = parts[3].parse().map_err(|_| ParseError::BadHeader { line })?;
            header = Some(vars);
            continue;
        }
        let Some(var_count) = header else {
            return Err(ParseError::MissingHeader { line });
        };
        let (is_exists, body) = match trimmed.strip_prefix('e') {
            Some(rest) if rest.is_empty() || rest.starts_with(char::is_whitespace) => {
                (true, rest)
            }
            _ => (false, trimmed),
        };
        if is_exists {
            if quantified.is_some() {
                return Err(ParseError::DuplicateExistential { line });
            }
            if !clauses.is_empty() || !pending.is_empty() {
                return Err(ParseError::LateExistential { line });
            }
            let mut vars = Vec::new();
            let mut terminated = false;
            for tok in body.split_whitespace() {
                let v = parse_int(tok, line)?;
                if v == 0 {
                    terminated = true;
                    break;
                }
                if v < 0 || v.unsigned_abs() > var_count {
                    return Err(ParseError::LiteralOutOfRange {
                        line,
                        lit: v,
                        count: var_count,
                    });
                }
                vars.push(Var::new(v as u32));
            }
            if !terminated {
                return Err(ParseError::Unterminated { line });
            }
            quantified = Some(vars);
            continue;
        }
        for tok in body.split_whitespace() {
            let v = parse_int(tok, line)?;
            if v == 0 {
                let clause = Clause::new(pending.drain(..)).map_err(|e| match e {
                    CnfError::Tautology(var) => ParseError::Tautology {
                        line,
                        var: var.index(),
                    },
                    _ => unreachable!("only tautologies are rejected"),
                })?;
                clauses.push(clause);
                continue;
            }
            if v.unsigned_abs() > var_count {
                return Err(ParseError::LiteralOutOfRange {
                    line,
                    lit: v,
                    count: var_count,
                });
            }
            if pending.is_empty() {
                pending_line = line;
            }
            pending.push(Lit::from_dimacs(v).expect("nonzero"));
        }
    }

    if !pending.is_empty() {
        return Err(ParseError::Unterminated { line: pending_line });
    }
    let Some(var_count) = header else {
        return Err(ParseError::BadHeader {
            line: last_line.max(1),
        });
    };
    let targets = match targets {
        None => None,
        Some((line, list)) => {
            let mut out = Vec::with_capacity(list.len());
            for n in list {
                if n > clauses.len() {
                    return Err(ParseError::BadTarget { line, index: n });
                }
                out.push(n - 1);
            }
            Some(out)
        }
    };
    let problem = CnfProblem::with_quantified(var_count, clauses, quantified.unwrap_or_default())
        .expect("bounds checked while parsing");
    Ok(DimacsFile { problem, targets })
}

fn parse_int(tok: &str, line: usize) -> Result<i32, ParseError> {
    tok.parse().map_err(|_| ParseError::BadToken {
        line,
        token: tok.to_string(),
    })
}

/// Serializes a problem; the `e` line is emitted when X is nonempty and the
/// targets comment when `targets` is given (0-based indices).
pub fn write_dimacs(problem: &CnfProblem, targets: Option<&[usize]>) -> String {
    let mut out = String::new();
    if let Some(t) = targets {
        out.push_str("c targets");
        for i in t {
            let _ = write!(out, " {}", i + 1);
        }
        out.push_str(" 0\n");
    }
    let _ = writeln!(
        out,
        "p cnf {} {}",
        problem.var_count(),
        problem.clauses().len()
    );
    let x = problem.quantified();
    if !x.is_empty() {
        out.push('e');
        for v in x {
            let _ = write!(out, " {}", v.index());
        }
        out.push_str(" 0\n");
    }
    for c in problem.clauses() {
        out.push_str(&clause_line(c));
        out.push('\n');
    }
    out
}

/// One clause as a DIMACS fragment, e.g. `1 -3 0`.
pub fn clause_line(clause: &Clause) -> String {
    let mut s = String::new();
    for l in clause.lits() {
        let _ = write!(s, "{} ", l.to_dimacs());
    }
    s.push('0');
    s
}
