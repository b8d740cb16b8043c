use std::collections::{BTreeMap, HashMap};

use crate::symexec::{Formula, Rel, Term};
use crate::value::{Value, NULL_VALUE};

/// A formula over plain variables, with the table of what each introduced
/// variable stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbolized {
    pub formula: Formula,
    /// Introduced variable to the original API-call or array-cell term.
    pub origins: Vec<(String, Term)>,
}

impl Symbolized {
    pub fn origin(&self, var: &str) -> Option<&Term> {
        self.origins.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }

    /// Introduced variables standing for calls to `api`, in introduction order.
    pub fn vars_for_api(&self, api: &str) -> Vec<&str> {
        self.origins
            .iter()
            .filter(|(_, t)| matches!(t, Term::Api(name, _) if name == api))
            .map(|(v, _)| v.as_str())
            .collect()
    }
}

#[derive(Default)]
struct Table {
    by_term: HashMap<Term, String>,
    origins: Vec<(String, Term)>,
    calls: Vec<(String, Vec<Term>, String)>,
    cells: Vec<(String, Term, String)>,
}

impl Table {
    fn sym(&mut self, t: &Term, attr_ids: &BTreeMap<String, i64>) -> Term {
        match t {
            Term::Api(name, args) => {
                if let Some(v) = self.by_term.get(t) {
                    return Term::Var(v.clone());
                }
                let sargs: Vec<Term> = args.iter().map(|a| self.sym(a, attr_ids)).collect();
                let v = format!("$api{}", self.calls.len());
                self.by_term.insert(t.clone(), v.clone());
                self.origins.push((v.clone(), t.clone()));
                self.calls.push((name.clone(), sargs, v.clone()));
                Term::Var(v)
            }
            Term::Elem(array, idx) => {
                if let Some(v) = self.by_term.get(t) {
                    return Term::Var(v.clone());
                }
                let sidx = self.sym(idx, attr_ids);
                let v = format!("$elem{}", self.cells.len());
                self.by_term.insert(t.clone(), v.clone());
                self.origins.push((v.clone(), t.clone()));
                self.cells.push((array.clone(), sidx, v.clone()));
                Term::Var(v)
            }
            Term::Attr(name) => match attr_ids.get(name) {
                Some(id) => Term::Int(*id),
                None => Term::Var(name.clone()),
            },
            Term::Null => Term::Int(NULL_VALUE),
            Term::Unary(op, a) => fold(Term::Unary(*op, Box::new(self.sym(a, attr_ids)))),
            Term::Binary(op, a, b) => {
                fold(Term::Binary(*op, Box::new(self.sym(a, attr_ids)), Box::new(self.sym(b, attr_ids))))
            }
            Term::StrEq(a, lit) => fold(Term::StrEq(Box::new(self.sym(a, attr_ids)), lit.clone())),
            Term::Var(_) | Term::Int(_) | Term::Str(_) | Term::Bool(_) => t.clone(),
        }
    }

    /// Functional consistency: equal arguments imply equal results.
    fn congruence(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        for (i, (api_i, args_i, v_i)) in self.calls.iter().enumerate() {
            for (api_j, args_j, v_j) in &self.calls[i + 1..] {
                if api_i == api_j && args_i.len() == args_j.len() {
                    let same_args = Formula::and(
                        args_i.iter().zip(args_j).map(|(a, b)| Formula::cmp(a.clone(), Rel::Eq, b.clone())),
                    );
                    out.push(implies(same_args, v_i, v_j));
                }
            }
        }
        for (i, (arr_i, idx_i, v_i)) in self.cells.iter().enumerate() {
            for (arr_j, idx_j, v_j) in &self.cells[i + 1..] {
                if arr_i == arr_j {
                    out.push(implies(Formula::cmp(idx_i.clone(), Rel::Eq, idx_j.clone()), v_i, v_j));
                }
            }
        }
        out
    }
}

/// Constant subterms become literals, so their values count as formula constants.
fn fold(t: Term) -> Term {
    match t.ground_value() {
        Some(Value::Int(i)) => Term::Int(i),
        Some(Value::Str(s)) => Term::Str(s),
        Some(Value::Bool(b)) => Term::Bool(b),
        None => t,
    }
}

fn implies(premise: Formula, a: &str, b: &str) -> Formula {
    Formula::or([Formula::not(premise), Formula::cmp(Term::Var(a.into()), Rel::Eq, Term::Var(b.into()))])
}

/// Replaces API calls and array cells with fresh variables (structurally
/// equal terms share one), attribute constants with their ids and `null`
/// with its reserved integer. Congruence between calls of the same API is
/// kept as explicit side conditions.
pub fn symbolize(f: &Formula, attr_ids: &BTreeMap<String, i64>) -> Symbolized {
    let mut table = Table::default();
    let body = f.map_terms(&mut |t| table.sym(t, attr_ids));
    let side = table.congruence();
    let formula = if side.is_empty() { body } else { Formula::and(std::iter::once(body).chain(side)) };
    Symbolized { formula, origins: table.origins }
}
