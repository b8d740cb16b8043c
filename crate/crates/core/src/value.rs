//! Concrete values shared by the solver's evaluator and the forward oracle.
//!
//! Every operation is total: arithmetic wraps, division by zero yields zero,
//! and ordering comparisons involving non-integers are false. `null` and
//! attribute constants are integers at this level (`null` is [`NULL_VALUE`],
//! an attribute constant is its declared id).

use std::collections::BTreeSet;
use std::fmt;

use crate::ir::{BinOp, UnOp};

/// Reserved integer standing for the `null` literal. The parser rejects it
/// as a user literal so it never collides with program constants.
pub const NULL_VALUE: i64 = i64::MIN;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Str(String),
    Bool(bool),
}

impl Value {
    /// Branch semantics: only `Bool(true)` takes the true edge.
    pub fn is_true(&self) -> bool {
        matches!(self, Value::Bool(true))
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            Value::Bool(b) => i64::from(*b),
            Value::Str(_) => 0,
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Str(_) => Sort::Str,
            Value::Bool(_) => Sort::Bool,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) if *v == NULL_VALUE => write!(f, "null"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

pub fn apply_unary(op: UnOp, v: &Value) -> Value {
    match op {
        UnOp::Neg => Value::Int(v.as_int().wrapping_neg()),
        UnOp::Not => Value::Bool(!v.is_true()),
    }
}

pub fn apply_binary(op: BinOp, a: &Value, b: &Value) -> Value {
    match op {
        BinOp::Add => Value::Int(a.as_int().wrapping_add(b.as_int())),
        BinOp::Sub => Value::Int(a.as_int().wrapping_sub(b.as_int())),
        BinOp::Mul => Value::Int(a.as_int().wrapping_mul(b.as_int())),
        BinOp::Div => {
            let d = b.as_int();
            Value::Int(if d == 0 { 0 } else { a.as_int().wrapping_div(d) })
        }
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::Lt => Value::Bool(matches!((a, b), (Value::Int(x), Value::Int(y)) if x < y)),
        BinOp::Le => Value::Bool(matches!((a, b), (Value::Int(x), Value::Int(y)) if x <= y)),
        BinOp::And => Value::Bool(a.is_true() && b.is_true()),
        BinOp::Or => Value::Bool(a.is_true() || b.is_true()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Str,
    Bool,
}

/// A small set of sorts, used when a variable is used at more than one sort.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortSet(u8);

impl SortSet {
    pub fn single(s: Sort) -> Self {
        SortSet(Self::bit(s))
    }

    fn bit(s: Sort) -> u8 {
        match s {
            Sort::Int => 1,
            Sort::Str => 2,
            Sort::Bool => 4,
        }
    }

    pub fn insert(&mut self, s: Sort) {
        self.0 |= Self::bit(s);
    }

    pub fn union(self, other: SortSet) -> SortSet {
        SortSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, s: Sort) -> bool {
        self.0 & Self::bit(s) != 0
    }

    /// Sorts in a fixed order; an empty set defaults to integers.
    pub fn sorts(self) -> Vec<Sort> {
        if self.is_empty() {
            return vec![Sort::Int];
        }
        [Sort::Int, Sort::Str, Sort::Bool]
            .into_iter()
            .filter(|s| self.contains(*s))
            .collect()
    }
}

/// Finite value domains built from the constants of a formula or program:
/// every constant, plus fresh witnesses standing for "any other value".
///
/// Integers get one witness above every constant. When ordering comparisons
/// are present they also get one below every constant and one inside each
/// gap between consecutive constants, so each region of the number line
/// cut out by the constants has a representative.
#[derive(Debug, Clone, Default)]
pub struct DomainBuilder {
    ints: BTreeSet<i64>,
    strs: BTreeSet<String>,
    has_order: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domains {
    pub ints: Vec<Value>,
    pub strs: Vec<Value>,
    pub bools: Vec<Value>,
    int_constants: BTreeSet<i64>,
    str_constants: BTreeSet<String>,
}

impl DomainBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_int(&mut self, v: i64) {
        self.ints.insert(v);
    }

    pub fn add_str(&mut self, s: &str) {
        self.strs.insert(s.to_string());
    }

    pub fn add_value(&mut self, v: &Value) {
        match v {
            Value::Int(i) => self.add_int(*i),
            Value::Str(s) => self.add_str(s),
            Value::Bool(_) => {}
        }
    }

    pub fn mark_order(&mut self) {
        self.has_order = true;
    }

    pub fn build(self) -> Domains {
        let mut ints: Vec<Value> = self.ints.iter().map(|v| Value::Int(*v)).collect();
        let hi = match self.ints.iter().next_back() {
            Some(max) => max.checked_add(1),
            None => Some(0),
        };
        if let Some(hi) = hi {
            ints.push(Value::Int(hi));
        }
        if self.has_order {
            if let Some(lo) = self.ints.iter().next().and_then(|min| min.checked_sub(1)) {
                ints.push(Value::Int(lo));
            }
            let consts: Vec<i64> = self.ints.iter().copied().collect();
            for pair in consts.windows(2) {
                if i128::from(pair[1]) - i128::from(pair[0]) >= 2 {
                    ints.push(Value::Int(pair[0] + 1));
                }
            }
        }
        let mut strs: Vec<Value> = self.strs.iter().map(|s| Value::Str(s.clone())).collect();
        strs.push(Value::Str(fresh_string(&self.strs)));
        Domains {
            ints,
            strs,
            bools: vec![Value::Bool(false), Value::Bool(true)],
            int_constants: self.ints,
            str_constants: self.strs,
        }
    }
}

fn fresh_string(taken: &BTreeSet<String>) -> String {
    let mut n = 0usize;
    loop {
        let candidate = if n == 0 {
            "$fresh".to_string()
        } else {
            format!("$fresh{n}")
        };
        if !taken.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

impl Domains {
    /// Domain of a variable used at the given sorts, witnesses last within each sort.
    pub fn for_sorts(&self, sorts: SortSet) -> Vec<Value> {
        let mut out = Vec::new();
        for s in sorts.sorts() {
            match s {
                Sort::Int => out.extend(self.ints.iter().cloned()),
                Sort::Str => out.extend(self.strs.iter().cloned()),
                Sort::Bool => out.extend(self.bools.iter().cloned()),
            }
        }
        out
    }

    /// True for values that are not among the recorded constants, i.e. that
    /// stand in for an open set of values. Booleans are never witnesses.
    pub fn is_witness(&self, v: &Value) -> bool {
        match v {
            Value::Int(i) => !self.int_constants.contains(i),
            Value::Str(s) => !self.str_constants.contains(s),
            Value::Bool(_) => false,
        }
    }
}
