//! A concrete interpreter written against the IR's documented semantics,
//! kept separate from the library's evaluator so the two can disagree.
//!
//! Integers wrap, division by zero is 0, `<`/`<=` on non-integers are
//! false, only `true` is truthy, booleans read as 0/1 and strings as 0 in
//! arithmetic. Field paths are plain locations and array cells are keyed by
//! the index value itself. API calls are a fixed function of their name and
//! argument values.

use std::collections::BTreeMap;

use confcheck::ir::{BinOp, IrStmt, Operand, UnOp};
use confcheck::symexec::{Atom, Formula, Rel, Term};
use confcheck::value::Value;

pub const NULL: i64 = i64::MIN;

#[derive(Debug, Clone)]
pub struct State {
    pub vars: BTreeMap<String, Value>,
    pub cells: BTreeMap<(String, Value), Value>,
    pub attrs: BTreeMap<String, i64>,
    /// Mixed into API results so each state has its own interpretation.
    pub api_seed: u64,
}

fn int_of(v: &Value) -> i64 {
    match v {
        Value::Int(i) => *i,
        Value::Bool(b) => *b as i64,
        Value::Str(_) => 0,
    }
}

fn truthy(v: &Value) -> bool {
    *v == Value::Bool(true)
}

fn fnv(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl State {
    pub fn var(&self, v: &str) -> Value {
        self.vars.get(v).cloned().unwrap_or(Value::Int(0))
    }

    pub fn cell(&self, a: &str, i: Value) -> Value {
        self.cells.get(&(a.to_string(), i)).cloned().unwrap_or(Value::Int(0))
    }

    /// Result of `api(args)`: booleans for names starting with `is`,
    /// strings for `getName`, small integers otherwise.
    pub fn api(&self, name: &str, args: &[Value]) -> Value {
        let mut h = fnv(name.as_bytes(), 0xcbf29ce484222325 ^ self.api_seed);
        for a in args {
            h = fnv(format!("{a:?}").as_bytes(), h);
        }
        if name.starts_with("is") {
            Value::Bool(h & 1 == 1)
        } else if name == "getName" {
            Value::Str(["item", "selector", "layer"][(h % 3) as usize].to_string())
        } else {
            Value::Int((h % 4) as i64 - 1)
        }
    }

    pub fn operand(&self, op: &Operand) -> Value {
        match op {
            Operand::Var(v) => self.var(v),
            Operand::Int(i) => Value::Int(*i),
            Operand::Str(s) => Value::Str(s.clone()),
            Operand::Attr(a) => Value::Int(self.attrs[a]),
            Operand::Null => Value::Int(NULL),
            Operand::Elem(a, idx) => self.cell(a, self.operand(idx)),
        }
    }

    pub fn term(&self, t: &Term) -> Value {
        match t {
            Term::Var(v) => self.var(v),
            Term::Elem(a, idx) => self.cell(a, self.term(idx)),
            Term::Int(i) => Value::Int(*i),
            Term::Str(s) => Value::Str(s.clone()),
            Term::Bool(b) => Value::Bool(*b),
            Term::Attr(a) => Value::Int(self.attrs[a]),
            Term::Null => Value::Int(NULL),
            Term::Api(name, args) => {
                let vals: Vec<Value> = args.iter().map(|a| self.term(a)).collect();
                self.api(name, &vals)
            }
            Term::Unary(op, a) => unary(*op, &self.term(a)),
            Term::Binary(op, a, b) => binary(*op, &self.term(a), &self.term(b)),
            Term::StrEq(a, lit) => Value::Bool(self.term(a) == Value::Str(lit.clone())),
        }
    }

    /// Truth of a formula; target atoms hold in every state.
    pub fn holds(&self, f: &Formula) -> bool {
        match f {
            Formula::And(fs) => fs.iter().all(|x| self.holds(x)),
            Formula::Or(fs) => fs.iter().any(|x| self.holds(x)),
            Formula::Not(x) => !self.holds(x),
            Formula::Atom(a) => match a {
                Atom::True | Atom::Target(_) => true,
                Atom::False => false,
                Atom::Cmp(x, rel, y) => {
                    let op = match rel {
                        Rel::Eq => BinOp::Eq,
                        Rel::Ne => BinOp::Ne,
                        Rel::Lt => BinOp::Lt,
                        Rel::Le => BinOp::Le,
                    };
                    truthy(&binary(op, &self.term(x), &self.term(y)))
                }
                Atom::StrEq(t, lit) => self.term(t) == Value::Str(lit.clone()),
                Atom::Bool(t) => truthy(&self.term(t)),
            },
        }
    }

    /// Executes one statement. Returns the branch outcome for `if`.
    pub fn exec(&mut self, s: &IrStmt) -> Option<bool> {
        match s {
            IrStmt::Copy { dst, op, src } => {
                let v = self.operand(src);
                let v = match op {
                    None => v,
                    Some(op) => unary(*op, &v),
                };
                self.vars.insert(dst.clone(), v);
            }
            IrStmt::Binary { dst, lhs, op, rhs } => {
                let v = binary(*op, &self.operand(lhs), &self.operand(rhs));
                self.vars.insert(dst.clone(), v);
            }
            IrStmt::ApiAssign { dst, api, args } | IrStmt::Target { dst, api, args } => {
                let vals: Vec<Value> = args.iter().map(|a| self.operand(a)).collect();
                let v = self.api(api, &vals);
                self.vars.insert(dst.clone(), v);
            }
            IrStmt::FieldStore { obj, field, value } => {
                let v = self.operand(value);
                self.vars.insert(format!("{obj}.{field}"), v);
            }
            IrStmt::ArrayStore { array, index, value } => {
                let i = self.operand(index);
                let v = self.operand(value);
                self.cells.insert((array.clone(), i), v);
            }
            IrStmt::StrEqAssign { dst, src, lit } => {
                let v = Value::Bool(self.operand(src) == Value::Str(lit.clone()));
                self.vars.insert(dst.clone(), v);
            }
            IrStmt::Branch { cond, .. } => return Some(truthy(&self.operand(cond))),
            IrStmt::Goto(_) | IrStmt::Invoke { .. } | IrStmt::Return => {}
        }
        None
    }
}

pub fn unary(op: UnOp, v: &Value) -> Value {
    match op {
        UnOp::Neg => Value::Int(int_of(v).wrapping_neg()),
        UnOp::Not => Value::Bool(!truthy(v)),
    }
}

pub fn binary(op: BinOp, a: &Value, b: &Value) -> Value {
    let (x, y) = (int_of(a), int_of(b));
    match op {
        BinOp::Add => Value::Int(x.wrapping_add(y)),
        BinOp::Sub => Value::Int(x.wrapping_sub(y)),
        BinOp::Mul => Value::Int(x.wrapping_mul(y)),
        BinOp::Div => Value::Int(if y == 0 { 0 } else { x.wrapping_div(y) }),
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::Lt | BinOp::Le => match (a, b) {
            (Value::Int(x), Value::Int(y)) => Value::Bool(if op == BinOp::Lt { x < y } else { x <= y }),
            _ => Value::Bool(false),
        },
        BinOp::And => Value::Bool(truthy(a) && truthy(b)),
        BinOp::Or => Value::Bool(truthy(a) || truthy(b)),
    }
}
