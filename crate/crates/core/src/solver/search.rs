use std::collections::{BTreeMap, HashMap};

use crate::ir::{BinOp, UnOp};
use crate::symexec::{Atom, Formula, Rel, Term};
use crate::value::{DomainBuilder, Domains, Sort, SortSet, Value};

use super::eval::eval_formula;

pub const DEFAULT_SOLVER_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub assignment: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Model),
    Unsat,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueOutcome {
    /// Every domain value of the focus with a satisfying completion.
    /// `closed` is false when a witness value is among them.
    Values { values: Vec<Value>, closed: bool },
    Undecidable,
}

struct OutOfBudget;

/// Union-find over variables, each class carrying the sorts it is used at.
#[derive(Default)]
struct SortInference {
    index: HashMap<String, usize>,
    parent: Vec<usize>,
    sorts: Vec<SortSet>,
}

#[derive(Clone, Copy)]
enum TermSort {
    Class(usize),
    Fixed(Sort),
    Unknown,
}

impl SortInference {
    fn class_of(&mut self, v: &str) -> usize {
        if let Some(&i) = self.index.get(v) {
            return self.find(i);
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.sorts.push(SortSet::default());
        self.index.insert(v.to_string(), i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn require(&mut self, ts: TermSort, s: Sort) {
        if let TermSort::Class(c) = ts {
            let r = self.find(c);
            self.sorts[r].insert(s);
        }
    }

    fn unify(&mut self, a: TermSort, b: TermSort) {
        match (a, b) {
            (TermSort::Class(x), TermSort::Class(y)) => {
                let (x, y) = (self.find(x), self.find(y));
                if x != y {
                    self.parent[y] = x;
                    self.sorts[x] = self.sorts[x].union(self.sorts[y]);
                }
            }
            (TermSort::Class(_), TermSort::Fixed(s)) => self.require(a, s),
            (TermSort::Fixed(s), TermSort::Class(_)) => self.require(b, s),
            _ => {}
        }
    }

    fn term(&mut self, t: &Term) -> TermSort {
        match t {
            Term::Var(v) => TermSort::Class(self.class_of(v)),
            Term::Int(_) | Term::Null | Term::Attr(_) => TermSort::Fixed(Sort::Int),
            Term::Str(_) => TermSort::Fixed(Sort::Str),
            Term::Bool(_) => TermSort::Fixed(Sort::Bool),
            Term::Elem(..) | Term::Api(..) => TermSort::Unknown,
            Term::Unary(op, a) => {
                let s = match op {
                    UnOp::Neg => Sort::Int,
                    UnOp::Not => Sort::Bool,
                };
                let ta = self.term(a);
                self.require(ta, s);
                TermSort::Fixed(s)
            }
            Term::Binary(op, a, b) => {
                let (ta, tb) = (self.term(a), self.term(b));
                match op {
                    BinOp::Eq | BinOp::Ne => {
                        self.unify(ta, tb);
                        TermSort::Fixed(Sort::Bool)
                    }
                    BinOp::Lt | BinOp::Le => {
                        self.require(ta, Sort::Int);
                        self.require(tb, Sort::Int);
                        TermSort::Fixed(Sort::Bool)
                    }
                    BinOp::And | BinOp::Or => {
                        self.require(ta, Sort::Bool);
                        self.require(tb, Sort::Bool);
                        TermSort::Fixed(Sort::Bool)
                    }
                    _ => {
                        self.require(ta, Sort::Int);
                        self.require(tb, Sort::Int);
                        TermSort::Fixed(Sort::Int)
                    }
                }
            }
            Term::StrEq(a, _) => {
                let ta = self.term(a);
                self.require(ta, Sort::Str);
                TermSort::Fixed(Sort::Bool)
            }
        }
    }

    fn atom(&mut self, a: &Atom) {
        match a {
            Atom::True | Atom::False => {}
            Atom::Cmp(x, rel, y) => {
                let (tx, ty) = (self.term(x), self.term(y));
                match rel {
                    Rel::Eq | Rel::Ne => self.unify(tx, ty),
                    Rel::Lt | Rel::Le => {
                        self.require(tx, Sort::Int);
                        self.require(ty, Sort::Int);
                    }
                }
            }
            Atom::StrEq(t, _) => {
                let tt = self.term(t);
                self.require(tt, Sort::Str);
            }
            Atom::Bool(t) => {
                let tt = self.term(t);
                self.require(tt, Sort::Bool);
            }
            Atom::Target(ta) => {
                self.term(&ta.attr);
                for e in &ta.extras {
                    self.term(e);
                }
            }
        }
    }

    fn sorts_of(&mut self, v: &str) -> SortSet {
        let c = self.class_of(v);
        self.sorts[c]
    }
}

/// Sort sets of every variable of `f`, inferred from how the atoms use them.
pub fn infer_sorts(f: &Formula) -> BTreeMap<String, SortSet> {
    let mut si = SortInference::default();
    f.visit_atoms(&mut |a| si.atom(a));
    let names: Vec<String> = si.index.keys().cloned().collect();
    names.into_iter().map(|v| {
        let s = si.sorts_of(&v);
        (v, s)
    }).collect()
}

fn collect_constants(f: &Formula, b: &mut DomainBuilder) {
    f.visit_atoms(&mut |a| match a {
        Atom::StrEq(_, lit) => b.add_str(lit),
        Atom::Cmp(_, Rel::Lt | Rel::Le, _) => b.mark_order(),
        _ => {}
    });
    f.visit_terms(&mut |t| match t {
        Term::Int(i) => b.add_int(*i),
        Term::Null => b.add_value(&Value::Int(crate::value::NULL_VALUE)),
        Term::Str(s) | Term::StrEq(_, s) => b.add_str(s),
        Term::Binary(BinOp::Lt | BinOp::Le, ..) => b.mark_order(),
        _ => {}
    });
}

/// A symbolized formula with its variables (first-occurrence order; those
/// occurring only inside target atoms last) and their finite domains.
#[derive(Debug, Clone)]
pub struct Problem {
    formula: Formula,
    vars: Vec<String>,
    index: HashMap<String, usize>,
    domains: Vec<Vec<Value>>,
    consts: Domains,
}

impl Problem {
    pub fn new(formula: Formula) -> Problem {
        let mut relevant: Vec<String> = Vec::new();
        let mut target_only: Vec<String> = Vec::new();
        formula.visit_atoms(&mut |a| {
            let into = if matches!(a, Atom::Target(_)) { &mut target_only } else { &mut relevant };
            Formula::Atom(a.clone()).visit_terms(&mut |t| {
                if let Term::Var(v) = t {
                    if !into.contains(v) {
                        into.push(v.clone());
                    }
                }
            });
        });
        let mut vars = relevant;
        for v in target_only {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }

        let mut si = SortInference::default();
        formula.visit_atoms(&mut |a| si.atom(a));
        let mut b = DomainBuilder::new();
        collect_constants(&formula, &mut b);
        let consts = b.build();
        let domains = vars.iter().map(|v| consts.for_sorts(si.sorts_of(v))).collect();
        let index = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Problem { formula, vars, index, domains, consts }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn domain(&self, var: &str) -> Option<&[Value]> {
        self.index.get(var).map(|&i| self.domains[i].as_slice())
    }

    pub fn is_witness(&self, v: &Value) -> bool {
        self.consts.is_witness(v)
    }

    fn eval(&self, asg: &[Option<Value>]) -> Option<bool> {
        eval_formula(&self.formula, &|name: &str| self.index.get(name).and_then(|&i| asg[i].clone()))
    }

    fn search(&self, asg: &mut Vec<Option<Value>>, depth: usize, steps: &mut u64, budget: u64) -> Result<bool, OutOfBudget> {
        if depth == self.vars.len() {
            return Ok(self.eval(asg) == Some(true));
        }
        if asg[depth].is_some() {
            return self.search(asg, depth + 1, steps, budget);
        }
        for v in &self.domains[depth] {
            *steps += 1;
            if *steps > budget {
                asg[depth] = None;
                return Err(OutOfBudget);
            }
            asg[depth] = Some(v.clone());
            match self.eval(asg) {
                Some(false) => continue,
                Some(true) => return Ok(true),
                None => {
                    if self.search(asg, depth + 1, steps, budget)? {
                        return Ok(true);
                    }
                }
            }
        }
        asg[depth] = None;
        Ok(false)
    }

    fn solve(&self, pinned: Option<(usize, Value)>, steps: &mut u64, budget: u64) -> Result<Option<Model>, OutOfBudget> {
        let mut asg: Vec<Option<Value>> = vec![None; self.vars.len()];
        if let Some((i, v)) = pinned {
            asg[i] = Some(v);
        }
        let found = match self.eval(&asg) {
            Some(b) => b,
            None => self.search(&mut asg, 0, steps, budget)?,
        };
        if !found {
            return Ok(None);
        }
        let assignment = self
            .vars
            .iter()
            .zip(asg)
            .zip(&self.domains)
            .map(|((name, v), dom)| (name.clone(), v.unwrap_or_else(|| dom[0].clone())))
            .collect();
        Ok(Some(Model { assignment }))
    }

    pub fn check_sat(&self, budget: u64) -> SatOutcome {
        let mut steps = 0;
        match self.solve(None, &mut steps, budget) {
            Ok(Some(m)) => SatOutcome::Sat(m),
            Ok(None) => SatOutcome::Unsat,
            Err(OutOfBudget) => SatOutcome::BudgetExceeded,
        }
    }

    /// Sweeps the domain of `var`, sharing one step budget over all values.
    pub fn enumerate_var(&self, var: &str, budget: u64) -> ValueOutcome {
        let Some(&i) = self.index.get(var) else {
            return ValueOutcome::Undecidable;
        };
        let mut steps = 0;
        let mut values = Vec::new();
        for v in &self.domains[i] {
            steps += 1;
            if steps > budget {
                return ValueOutcome::Undecidable;
            }
            match self.solve(Some((i, v.clone())), &mut steps, budget) {
                Ok(Some(_)) => values.push(v.clone()),
                Ok(None) => {}
                Err(OutOfBudget) => return ValueOutcome::Undecidable,
            }
        }
        let closed = !values.iter().any(|v| self.is_witness(v));
        ValueOutcome::Values { values, closed }
    }
}

/// Satisfiability of a symbolized formula over its finite domains.
pub fn check_sat(formula: &Formula, budget: u64) -> SatOutcome {
    Problem::new(formula.clone()).check_sat(budget)
}

/// Possible values of `focus` in a symbolized formula. A focus that is not
/// a variable of the formula is bound to a fresh one first.
pub fn enumerate_values(formula: &Formula, focus: &Term, budget: u64) -> ValueOutcome {
    if let Term::Var(v) = focus {
        let p = Problem::new(formula.clone());
        if p.domain(v).is_some() {
            return p.enumerate_var(v, budget);
        }
    }
    let bound = Formula::and([formula.clone(), Formula::cmp(Term::Var("$focus".into()), Rel::Eq, focus.clone())]);
    Problem::new(bound).enumerate_var("$focus", budget)
}
