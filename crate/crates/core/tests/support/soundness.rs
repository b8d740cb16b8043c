//! Random (statement, formula, state) triples for each transformer row.
//!
//! A triple counts when the state satisfies `trans(s, phi)`; it is a
//! violation when executing `s` from that state (taking the edge the step
//! names) does not end in a state satisfying `phi`.

use std::collections::BTreeMap;

use confcheck::icfg::{EdgeKind, NodeId};
use confcheck::ir::{BinOp, IrStmt, Operand, UnOp};
use confcheck::symexec::{trans, Atom, Formula, Rel, Step, Term};
use confcheck::value::Value;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::concrete::State;

pub const ROWS: [&str; 11] = [
    "target (origin)",
    "target (passed)",
    "copy",
    "binary",
    "api assign",
    "field store",
    "array store",
    "string equality",
    "branch (true edge)",
    "branch (false edge)",
    "goto/invoke/return",
];

const INT_VARS: [&str; 5] = ["x", "y", "i", "o.f", "o.g"];
const BOOL_VARS: [&str; 2] = ["b", "c"];
const STR_LITS: [&str; 3] = ["item", "selector", ""];
const ATTR: &str = "R.attr.color";
const SITE: NodeId = NodeId { method: 0, index: 0 };

#[derive(Debug, Default, Clone)]
pub struct RowReport {
    pub satisfied: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
}

fn small(rng: &mut ChaCha8Rng) -> i64 {
    rng.gen_range(-1..=2)
}

fn int_leaf(rng: &mut ChaCha8Rng) -> Term {
    match rng.gen_range(0..6) {
        0 | 1 => Term::Var(INT_VARS.choose(rng).unwrap().to_string()),
        2 => Term::Int(small(rng)),
        3 => {
            let idx = if rng.gen_bool(0.5) { Term::Int(small(rng)) } else { Term::Var(["i", "x"].choose(rng).unwrap().to_string()) };
            Term::Elem("a".into(), Box::new(idx))
        }
        4 => Term::Api("getInt".into(), vec![Term::Var(["x", "y"].choose(rng).unwrap().to_string())]),
        _ => Term::Attr(ATTR.into()),
    }
}

fn term(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.5) {
        return match rng.gen_range(0..8) {
            0 => Term::Var(BOOL_VARS.choose(rng).unwrap().to_string()),
            1 => Term::Var("s".into()),
            2 => Term::Str(STR_LITS.choose(rng).unwrap().to_string()),
            3 => Term::Null,
            _ => int_leaf(rng),
        };
    }
    match rng.gen_range(0..4) {
        0 => Term::Unary(*[UnOp::Neg, UnOp::Not].choose(rng).unwrap(), Box::new(term(rng, depth - 1))),
        1 => {
            let s = if rng.gen_bool(0.5) {
                Term::Var("s".into())
            } else {
                Term::Api("getName".into(), vec![Term::Var("x".into())])
            };
            Term::StrEq(Box::new(s), STR_LITS.choose(rng).unwrap().to_string())
        }
        _ => {
            let op = *[
                BinOp::Add,
                BinOp::Sub,
                BinOp::Mul,
                BinOp::Div,
                BinOp::Eq,
                BinOp::Ne,
                BinOp::Lt,
                BinOp::Le,
                BinOp::And,
                BinOp::Or,
            ]
            .choose(rng)
            .unwrap();
            Term::Binary(op, Box::new(term(rng, depth - 1)), Box::new(term(rng, depth - 1)))
        }
    }
}

fn formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.4) {
        let atom = match rng.gen_range(0..8) {
            0 => Atom::StrEq(Term::Var("s".into()), STR_LITS.choose(rng).unwrap().to_string()),
            1 => Atom::Bool(term(rng, 1)),
            2 => Atom::True,
            _ => {
                let rel = *[Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le].choose(rng).unwrap();
                Atom::Cmp(term(rng, 1), rel, term(rng, 1))
            }
        };
        return Formula::Atom(atom);
    }
    match rng.gen_range(0..3) {
        0 => Formula::And((0..rng.gen_range(2..=3)).map(|_| formula(rng, depth - 1)).collect()),
        1 => Formula::Or((0..rng.gen_range(2..=3)).map(|_| formula(rng, depth - 1)).collect()),
        _ => Formula::Not(Box::new(formula(rng, depth - 1))),
    }
}

fn int_operand(rng: &mut ChaCha8Rng) -> Operand {
    match rng.gen_range(0..5) {
        0 | 1 => Operand::Var(["x", "y", "i", "o.f"].choose(rng).unwrap().to_string()),
        2 => Operand::Int(small(rng)),
        3 => Operand::Attr(ATTR.into()),
        _ => {
            let idx = if rng.gen_bool(0.5) { Operand::Int(small(rng)) } else { Operand::Var("i".into()) };
            Operand::Elem("a".into(), Box::new(idx))
        }
    }
}

fn operand(rng: &mut ChaCha8Rng) -> Operand {
    match rng.gen_range(0..6) {
        0 => Operand::Var(BOOL_VARS.choose(rng).unwrap().to_string()),
        1 => Operand::Var("s".into()),
        2 => Operand::Str(STR_LITS.choose(rng).unwrap().to_string()),
        3 => Operand::Null,
        _ => int_operand(rng),
    }
}

fn dst(rng: &mut ChaCha8Rng) -> String {
    ["x", "y", "i", "b", "c", "s"].choose(rng).unwrap().to_string()
}

fn statement(rng: &mut ChaCha8Rng, row: usize) -> (IrStmt, Step) {
    let fall = Step::Through(EdgeKind::Fallthrough);
    match row {
        0 | 1 => {
            let api = ["getColor", "getInt", "isOn"].choose(rng).unwrap().to_string();
            let mut args = vec![int_operand(rng)];
            if rng.gen_bool(0.5) {
                args.push(operand(rng));
            }
            let step = if row == 0 { Step::Origin } else { fall };
            (IrStmt::Target { dst: dst(rng), api, args }, step)
        }
        2 => {
            let op = *[None, Some(UnOp::Neg), Some(UnOp::Not)].choose(rng).unwrap();
            (IrStmt::Copy { dst: dst(rng), op, src: operand(rng) }, fall)
        }
        3 => {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::And, BinOp::Or]
                .choose(rng)
                .unwrap();
            (IrStmt::Binary { dst: dst(rng), lhs: operand(rng), op, rhs: operand(rng) }, fall)
        }
        4 => {
            let api = ["getInt", "isOn", "getName"].choose(rng).unwrap().to_string();
            let args = vec![Operand::Var(["x", "y"].choose(rng).unwrap().to_string())];
            (IrStmt::ApiAssign { dst: dst(rng), api, args }, fall)
        }
        5 => {
            let field = ["f", "g"].choose(rng).unwrap().to_string();
            (IrStmt::FieldStore { obj: "o".into(), field, value: operand(rng) }, fall)
        }
        6 => {
            let index = match rng.gen_range(0..3) {
                0 => Operand::Int(small(rng)),
                1 => Operand::Var(["i", "x"].choose(rng).unwrap().to_string()),
                _ => Operand::Elem("a".into(), Box::new(Operand::Var("i".into()))),
            };
            (IrStmt::ArrayStore { array: "a".into(), index, value: operand(rng) }, fall)
        }
        7 => {
            let src = if rng.gen_bool(0.8) { Operand::Var("s".into()) } else { operand(rng) };
            let lit = STR_LITS.choose(rng).unwrap().to_string();
            (IrStmt::StrEqAssign { dst: dst(rng), src, lit }, fall)
        }
        8 | 9 => {
            let cond = if rng.gen_bool(0.8) { Operand::Var(BOOL_VARS.choose(rng).unwrap().to_string()) } else { operand(rng) };
            let kind = if row == 8 { EdgeKind::BranchTrue } else { EdgeKind::BranchFalse };
            (IrStmt::Branch { cond, if_true: "T".into(), if_false: "F".into() }, Step::Through(kind))
        }
        _ => {
            let s = match rng.gen_range(0..3) {
                0 => IrStmt::Goto("L".into()),
                1 => IrStmt::Invoke { method: "helper".into(), args: vec![operand(rng)] },
                _ => IrStmt::Return,
            };
            (s, fall)
        }
    }
}

fn value(rng: &mut ChaCha8Rng) -> Value {
    match rng.gen_range(0..10) {
        0 => Value::Bool(rng.gen()),
        1 => Value::Str(STR_LITS.choose(rng).unwrap().to_string()),
        _ => Value::Int(small(rng)),
    }
}

fn state(rng: &mut ChaCha8Rng) -> State {
    let mut vars = BTreeMap::new();
    for v in INT_VARS {
        vars.insert(v.to_string(), value(rng));
    }
    for v in BOOL_VARS {
        let b = if rng.gen_bool(0.9) { Value::Bool(rng.gen()) } else { value(rng) };
        vars.insert(v.to_string(), b);
    }
    let s = if rng.gen_bool(0.9) { Value::Str(STR_LITS.choose(rng).unwrap().to_string()) } else { value(rng) };
    vars.insert("s".into(), s);
    let mut cells = BTreeMap::new();
    for i in -1..=2 {
        cells.insert(("a".to_string(), Value::Int(i)), value(rng));
    }
    cells.insert(("a".to_string(), Value::Bool(rng.gen())), value(rng));
    let attrs = BTreeMap::from([(ATTR.to_string(), 2)]);
    State { vars, cells, attrs, api_seed: rng.gen() }
}

/// Runs triples for `row` until `wanted` of them satisfy the transformed
/// formula, or `max_tries` have been drawn.
pub fn check_row(rng: &mut ChaCha8Rng, row: usize, wanted: usize, max_tries: usize) -> RowReport {
    let mut rep = RowReport::default();
    for _ in 0..max_tries {
        if rep.satisfied >= wanted {
            break;
        }
        let (stmt, step) = statement(rng, row);
        let phi = formula(rng, 3);
        let pre = trans(&stmt, &phi, SITE, step);
        let sigma = state(rng);
        if !sigma.holds(&pre) {
            continue;
        }
        rep.satisfied += 1;
        let mut post = sigma.clone();
        let ok = match step {
            Step::Origin => {
                // the target has not run yet; its atom must name the attribute argument
                let atom_ok = pre.target_atoms().iter().any(|ta| {
                    let IrStmt::Target { args, .. } = &stmt else { return false };
                    sigma.term(&ta.attr) == sigma.operand(&args[0])
                });
                atom_ok && sigma.holds(&phi)
            }
            Step::Through(EdgeKind::BranchTrue) => post.exec(&stmt) == Some(true) && post.holds(&phi),
            Step::Through(EdgeKind::BranchFalse) => post.exec(&stmt) == Some(false) && post.holds(&phi),
            Step::Through(_) => {
                post.exec(&stmt);
                post.holds(&phi)
            }
        };
        if !ok {
            rep.violations += 1;
            if rep.first_violation.is_none() {
                rep.first_violation = Some(format!("stmt `{stmt}`, phi {phi}, trans {pre}, state {sigma:?}"));
            }
        }
    }
    rep
}
