use crate::symexec::{Atom, Formula, Term};
use crate::value::{apply_binary, apply_unary, Value, NULL_VALUE};

/// Value of a symbolized term, or `None` while a variable in it is unassigned.
/// Uninterpreted terms (API calls, array cells, attribute names) never have a value.
pub fn eval_term(t: &Term, lookup: &impl Fn(&str) -> Option<Value>) -> Option<Value> {
    match t {
        Term::Var(v) => lookup(v),
        Term::Int(i) => Some(Value::Int(*i)),
        Term::Str(s) => Some(Value::Str(s.clone())),
        Term::Bool(b) => Some(Value::Bool(*b)),
        Term::Null => Some(Value::Int(NULL_VALUE)),
        Term::Unary(op, a) => Some(apply_unary(*op, &eval_term(a, lookup)?)),
        Term::Binary(op, a, b) => {
            let x = eval_term(a, lookup);
            let y = eval_term(b, lookup);
            Some(apply_binary(*op, &x?, &y?))
        }
        Term::StrEq(a, lit) => Some(Value::Bool(eval_term(a, lookup)? == Value::Str(lit.clone()))),
        Term::Elem(..) | Term::Attr(_) | Term::Api(..) => None,
    }
}

/// Kleene evaluation: `None` when the truth value still depends on
/// unassigned variables. Target atoms are always true.
pub fn eval_formula(f: &Formula, lookup: &impl Fn(&str) -> Option<Value>) -> Option<bool> {
    match f {
        Formula::And(fs) => {
            let mut unknown = false;
            for x in fs {
                match eval_formula(x, lookup) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            (!unknown).then_some(true)
        }
        Formula::Or(fs) => {
            let mut unknown = false;
            for x in fs {
                match eval_formula(x, lookup) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            (!unknown).then_some(false)
        }
        Formula::Not(x) => eval_formula(x, lookup).map(|b| !b),
        Formula::Atom(a) => match a {
            Atom::True | Atom::Target(_) => Some(true),
            Atom::False => Some(false),
            Atom::Cmp(x, rel, y) => Some(rel.holds(&eval_term(x, lookup)?, &eval_term(y, lookup)?)),
            Atom::StrEq(t, lit) => Some(eval_term(t, lookup)? == Value::Str(lit.clone())),
            Atom::Bool(t) => Some(eval_term(t, lookup)?.is_true()),
        },
    }
}
