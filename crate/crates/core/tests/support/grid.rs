//! Small typed formulas and a brute-force sweep over their full domain grid.
//!
//! Domains are rebuilt here from the formula's literals: every integer
//! literal plus one value above them all (and, when `<`/`<=` occurs, one
//! below them all and one inside each gap of width two or more); every
//! string literal plus one unused string; both booleans.

use std::collections::{BTreeMap, BTreeSet};

use confcheck::symexec::{Atom, Formula, Rel, Term};
use confcheck::value::Value;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::concrete::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Int,
    Str,
    Bool,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub formula: Formula,
    pub vars: Vec<(String, Sort)>,
}

pub struct Grid {
    pub domains: BTreeMap<String, Vec<Value>>,
    int_consts: BTreeSet<i64>,
    str_consts: BTreeSet<String>,
}

impl Grid {
    pub fn is_witness(&self, v: &Value) -> bool {
        match v {
            Value::Int(i) => !self.int_consts.contains(i),
            Value::Str(s) => !self.str_consts.contains(s),
            Value::Bool(_) => false,
        }
    }

    pub fn max_domain(&self) -> usize {
        self.domains.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Every total assignment, in no particular order.
    pub fn assignments(&self) -> Vec<BTreeMap<String, Value>> {
        let mut out = vec![BTreeMap::new()];
        for (v, dom) in &self.domains {
            let mut next = Vec::with_capacity(out.len() * dom.len());
            for partial in &out {
                for val in dom {
                    let mut a = partial.clone();
                    a.insert(v.clone(), val.clone());
                    next.push(a);
                }
            }
            out = next;
        }
        out
    }
}

pub fn holds(f: &Formula, assignment: &BTreeMap<String, Value>) -> bool {
    let st = State { vars: assignment.clone(), cells: BTreeMap::new(), attrs: BTreeMap::new(), api_seed: 0 };
    st.holds(f)
}

pub fn grid(case: &Case) -> Grid {
    let mut ints = BTreeSet::new();
    let mut strs = BTreeSet::new();
    let mut order = false;
    case.formula.visit_atoms(&mut |a| match a {
        Atom::Cmp(x, rel, y) => {
            order |= matches!(rel, Rel::Lt | Rel::Le);
            for t in [x, y] {
                match t {
                    Term::Int(i) => {
                        ints.insert(*i);
                    }
                    Term::Str(s) => {
                        strs.insert(s.clone());
                    }
                    _ => {}
                }
            }
        }
        Atom::StrEq(_, lit) => {
            strs.insert(lit.clone());
        }
        _ => {}
    });
    let mut int_dom: Vec<i64> = ints.iter().copied().collect();
    int_dom.push(ints.iter().next_back().map_or(0, |m| m + 1));
    if order {
        if let Some(lo) = ints.iter().next() {
            int_dom.push(lo - 1);
        }
        let sorted: Vec<i64> = ints.iter().copied().collect();
        for w in sorted.windows(2) {
            if w[1] - w[0] >= 2 {
                int_dom.push(w[0] + 1);
            }
        }
    }
    let mut fresh = "$fresh".to_string();
    let mut n = 0;
    while strs.contains(&fresh) {
        n += 1;
        fresh = format!("$fresh{n}");
    }
    let mut str_dom: Vec<String> = strs.iter().cloned().collect();
    str_dom.push(fresh);
    let domains = case
        .vars
        .iter()
        .map(|(v, s)| {
            let d = match s {
                Sort::Int => int_dom.iter().map(|i| Value::Int(*i)).collect(),
                Sort::Str => str_dom.iter().map(|s| Value::Str(s.clone())).collect(),
                Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            };
            (v.clone(), d)
        })
        .collect();
    Grid { domains, int_consts: ints, str_consts: strs }
}

fn atom(rng: &mut ChaCha8Rng, vars: &[(String, Sort)], ints: &[i64], strs: &[&str], order: bool) -> Formula {
    let (v, s) = vars.choose(rng).unwrap();
    let var = Term::Var(v.clone());
    let same: Vec<&(String, Sort)> = vars.iter().filter(|(w, t)| t == s && w != v).collect();
    let a = match s {
        Sort::Int => {
            let rels: &[Rel] = if order { &[Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le] } else { &[Rel::Eq, Rel::Ne] };
            let rel = *rels.choose(rng).unwrap();
            let other = if !same.is_empty() && rng.gen_bool(0.3) {
                Term::Var(same.choose(rng).unwrap().0.clone())
            } else {
                Term::Int(*ints.choose(rng).unwrap())
            };
            if rng.gen_bool(0.5) {
                Atom::Cmp(var, rel, other)
            } else {
                Atom::Cmp(other, rel, var)
            }
        }
        Sort::Str => {
            if !same.is_empty() && rng.gen_bool(0.3) {
                let rel = *[Rel::Eq, Rel::Ne].choose(rng).unwrap();
                Atom::Cmp(var, rel, Term::Var(same.choose(rng).unwrap().0.clone()))
            } else {
                Atom::StrEq(var, strs.choose(rng).unwrap().to_string())
            }
        }
        Sort::Bool => Atom::Bool(var),
    };
    Formula::Atom(a)
}

fn shape(rng: &mut ChaCha8Rng, depth: u32, leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> Formula) -> Formula {
    if depth == 0 || rng.gen_bool(0.35) {
        return leaf(rng);
    }
    match rng.gen_range(0..3) {
        0 => Formula::And((0..rng.gen_range(2..=3)).map(|_| shape(rng, depth - 1, leaf)).collect()),
        1 => Formula::Or((0..rng.gen_range(2..=3)).map(|_| shape(rng, depth - 1, leaf)).collect()),
        _ => Formula::Not(Box::new(shape(rng, depth - 1, leaf))),
    }
}

/// A formula over at most four variables whose domains stay within six values.
pub fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.gen_range(1..=4);
    let vars: Vec<(String, Sort)> = (0..n)
        .map(|i| (format!("v{i}"), *[Sort::Int, Sort::Int, Sort::Str, Sort::Bool].choose(rng).unwrap()))
        .collect();
    let order = rng.gen_bool(0.4);
    // with order: k constants give up to 2k + 1 values, so k <= 2
    let k_int = if order { rng.gen_range(1..=2) } else { rng.gen_range(1..=5) };
    let mut ints: Vec<i64> = Vec::new();
    while ints.len() < k_int {
        let c = rng.gen_range(-3..=6);
        if !ints.contains(&c) {
            ints.push(c);
        }
    }
    let all_strs = ["item", "selector", "layer", "", "x"];
    let strs: Vec<&str> = all_strs[..rng.gen_range(1..=5)].to_vec();
    let body = shape(rng, 3, &mut |r| atom(r, &vars, &ints, &strs, order));
    // one tautology per variable pins its sort whatever the body uses
    let mut parts = vec![body];
    for (v, s) in &vars {
        let var = Term::Var(v.clone());
        let pin = match s {
            Sort::Int => {
                let c = Term::Int(ints[0]);
                Formula::Or(vec![
                    Formula::Atom(Atom::Cmp(var.clone(), Rel::Eq, c.clone())),
                    Formula::Atom(Atom::Cmp(var, Rel::Ne, c)),
                ])
            }
            Sort::Str => {
                let lit = strs[0].to_string();
                Formula::Or(vec![
                    Formula::Atom(Atom::StrEq(var.clone(), lit.clone())),
                    Formula::Not(Box::new(Formula::Atom(Atom::StrEq(var, lit)))),
                ])
            }
            Sort::Bool => Formula::Or(vec![
                Formula::Atom(Atom::Bool(var.clone())),
                Formula::Not(Box::new(Formula::Atom(Atom::Bool(var)))),
            ]),
        };
        parts.push(pin);
    }
    Case { formula: Formula::And(parts), vars }
}
