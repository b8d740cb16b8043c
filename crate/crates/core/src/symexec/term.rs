use std::fmt;

use crate::icfg::NodeId;
use crate::ir::{BinOp, Operand, UnOp};
use crate::value::{apply_binary, apply_unary, Value, NULL_VALUE};

/// Symbolic term. Field paths (`o.f`) are plain variables; array cells are
/// `Elem(array, index)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Elem(String, Box<Term>),
    Int(i64),
    Str(String),
    Bool(bool),
    /// Attribute constant by full name, `R.attr.<x>`.
    Attr(String),
    Null,
    /// Uninterpreted API call.
    Api(String, Vec<Term>),
    Unary(UnOp, Box<Term>),
    Binary(BinOp, Box<Term>, Box<Term>),
    StrEq(Box<Term>, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
        }
    }

    pub fn holds(self, a: &Value, b: &Value) -> bool {
        let op = match self {
            Rel::Eq => BinOp::Eq,
            Rel::Ne => BinOp::Ne,
            Rel::Lt => BinOp::Lt,
            Rel::Le => BinOp::Le,
        };
        apply_binary(op, a, b).is_true()
    }

    fn of_binop(op: BinOp) -> Option<Rel> {
        match op {
            BinOp::Eq => Some(Rel::Eq),
            BinOp::Ne => Some(Rel::Ne),
            BinOp::Lt => Some(Rel::Lt),
            BinOp::Le => Some(Rel::Le),
            _ => None,
        }
    }
}

/// The configuration-API invocation a path constraint is anchored on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetAtom {
    pub api: String,
    pub attr: Term,
    pub extras: Vec<Term>,
    pub site: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    True,
    False,
    Cmp(Term, Rel, Term),
    StrEq(Term, String),
    /// `t` evaluates to boolean true.
    Bool(Term),
    Target(TargetAtom),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Atom(Atom),
}

impl Term {
    pub fn from_operand(op: &Operand) -> Term {
        match op {
            Operand::Var(v) => Term::Var(v.clone()),
            Operand::Int(i) => Term::Int(*i),
            Operand::Str(s) => Term::Str(s.clone()),
            Operand::Attr(a) => Term::Attr(a.clone()),
            Operand::Null => Term::Null,
            Operand::Elem(a, idx) => Term::Elem(a.clone(), Box::new(Term::from_operand(idx))),
        }
    }

    /// Value of a term built only from literals and operators. Attribute
    /// constants are left symbolic since their ids live in the snapshot.
    pub fn ground_value(&self) -> Option<Value> {
        match self {
            Term::Int(i) => Some(Value::Int(*i)),
            Term::Str(s) => Some(Value::Str(s.clone())),
            Term::Bool(b) => Some(Value::Bool(*b)),
            Term::Null => Some(Value::Int(NULL_VALUE)),
            Term::Unary(op, t) => Some(apply_unary(*op, &t.ground_value()?)),
            Term::Binary(op, a, b) => Some(apply_binary(*op, &a.ground_value()?, &b.ground_value()?)),
            Term::StrEq(t, lit) => Some(Value::Bool(t.ground_value()? == Value::Str(lit.clone()))),
            Term::Var(_) | Term::Elem(..) | Term::Attr(_) | Term::Api(..) => None,
        }
    }

    /// Replaces every subterm structurally equal to `from` with `to`.
    pub fn subst(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Elem(a, idx) => Term::Elem(a.clone(), Box::new(idx.subst(from, to))),
            Term::Api(name, args) => Term::Api(name.clone(), args.iter().map(|t| t.subst(from, to)).collect()),
            Term::Unary(op, t) => Term::Unary(*op, Box::new(t.subst(from, to))),
            Term::Binary(op, a, b) => Term::Binary(*op, Box::new(a.subst(from, to)), Box::new(b.subst(from, to))),
            Term::StrEq(t, lit) => Term::StrEq(Box::new(t.subst(from, to)), lit.clone()),
            _ => self.clone(),
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Elem(_, idx) => idx.visit(f),
            Term::Api(_, args) => args.iter().for_each(|t| t.visit(f)),
            Term::Unary(_, t) | Term::StrEq(t, _) => t.visit(f),
            Term::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

fn truth(b: bool) -> Formula {
    Formula::Atom(if b { Atom::True } else { Atom::False })
}

impl Formula {
    pub const TRUE: Formula = Formula::Atom(Atom::True);
    pub const FALSE: Formula = Formula::Atom(Atom::False);

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Atom(Atom::True))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::Atom(Atom::False))
    }

    /// Flattening conjunction with True/False absorption and duplicate removal.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            let items = match p {
                Formula::And(inner) => inner,
                other => vec![other],
            };
            for f in items {
                if f.is_false() {
                    return Formula::FALSE;
                }
                if !f.is_true() && !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        match out.len() {
            0 => Formula::TRUE,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            let items = match p {
                Formula::Or(inner) => inner,
                other => vec![other],
            };
            for f in items {
                if f.is_true() {
                    return Formula::TRUE;
                }
                if !f.is_false() && !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        match out.len() {
            0 => Formula::FALSE,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Atom(Atom::True) => Formula::FALSE,
            Formula::Atom(Atom::False) => Formula::TRUE,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn cmp(a: Term, rel: Rel, b: Term) -> Formula {
        match (a.ground_value(), b.ground_value()) {
            (Some(x), Some(y)) => truth(rel.holds(&x, &y)),
            _ => Formula::Atom(Atom::Cmp(a, rel, b)),
        }
    }

    pub fn str_eq(t: Term, lit: String) -> Formula {
        match t.ground_value() {
            Some(v) => truth(v == Value::Str(lit)),
            None => Formula::Atom(Atom::StrEq(t, lit)),
        }
    }

    /// "`t` is true", with boolean operators lifted into formula structure.
    pub fn from_bool_term(t: Term) -> Formula {
        match t {
            Term::Bool(b) => truth(b),
            Term::Binary(op, a, b) => match op {
                BinOp::And => Formula::and([Formula::from_bool_term(*a), Formula::from_bool_term(*b)]),
                BinOp::Or => Formula::or([Formula::from_bool_term(*a), Formula::from_bool_term(*b)]),
                _ => match Rel::of_binop(op) {
                    Some(rel) => Formula::cmp(*a, rel, *b),
                    None => Formula::bool_atom(Term::Binary(op, a, b)),
                },
            },
            Term::Unary(UnOp::Not, a) => Formula::not(Formula::from_bool_term(*a)),
            Term::StrEq(a, lit) => Formula::str_eq(*a, lit),
            other => Formula::bool_atom(other),
        }
    }

    fn bool_atom(t: Term) -> Formula {
        match t.ground_value() {
            Some(v) => truth(v.is_true()),
            None => Formula::Atom(Atom::Bool(t)),
        }
    }

    /// φ[to/from], renormalized.
    pub fn subst(&self, from: &Term, to: &Term) -> Formula {
        self.map_terms(&mut |t| t.subst(from, to))
    }

    /// Rebuilds the formula with every atom-level term rewritten by `f`.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::And(fs) => Formula::and(fs.iter().map(|x| x.map_terms(f)).collect::<Vec<_>>()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|x| x.map_terms(f)).collect::<Vec<_>>()),
            Formula::Not(x) => Formula::not(x.map_terms(f)),
            Formula::Atom(a) => match a {
                Atom::True | Atom::False => self.clone(),
                Atom::Cmp(x, rel, y) => Formula::cmp(f(x), *rel, f(y)),
                Atom::StrEq(t, lit) => Formula::str_eq(f(t), lit.clone()),
                Atom::Bool(t) => Formula::from_bool_term(f(t)),
                Atom::Target(ta) => Formula::Atom(Atom::Target(TargetAtom {
                    api: ta.api.clone(),
                    attr: f(&ta.attr),
                    extras: ta.extras.iter().map(&mut *f).collect(),
                    site: ta.site,
                })),
            },
        }
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|x| x.visit_atoms(f)),
            Formula::Not(x) => x.visit_atoms(f),
            Formula::Atom(a) => f(a),
        }
    }

    /// Every term occurring in an atom, outermost first.
    pub fn visit_terms<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        self.visit_atoms(&mut |a| match a {
            Atom::True | Atom::False => {}
            Atom::Cmp(x, _, y) => {
                x.visit(f);
                y.visit(f);
            }
            Atom::StrEq(t, _) | Atom::Bool(t) => t.visit(f),
            Atom::Target(ta) => {
                ta.attr.visit(f);
                ta.extras.iter().for_each(|t| t.visit(f));
            }
        });
    }

    pub fn target_atoms(&self) -> Vec<&TargetAtom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| {
            if let Atom::Target(ta) = a {
                out.push(ta);
            }
        });
        out
    }

    /// Top-level disjuncts.
    pub fn disjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::Or(fs) => fs.iter().collect(),
            other => vec![other],
        }
    }
}

fn write_lit(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    write!(f, "{s:?}")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Elem(a, idx) => write!(f, "(elem {a} {idx})"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Str(s) => write_lit(f, s),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Attr(a) => f.write_str(a),
            Term::Null => f.write_str("null"),
            Term::Api(name, args) => {
                write!(f, "(call {name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Term::Unary(op, t) => write!(f, "({} {t})", op.keyword()),
            Term::Binary(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
            Term::StrEq(t, lit) => {
                write!(f, "(streq {t} ")?;
                write_lit(f, lit)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::True => f.write_str("true"),
            Atom::False => f.write_str("false"),
            Atom::Cmp(a, rel, b) => write!(f, "({} {a} {b})", rel.symbol()),
            Atom::StrEq(t, lit) => {
                write!(f, "(streq {t} ")?;
                write_lit(f, lit)?;
                f.write_str(")")
            }
            Atom::Bool(t) => write!(f, "(bool {t})"),
            Atom::Target(ta) => {
                write!(f, "(target {} {}", ta.api, ta.attr)?;
                for e in &ta.extras {
                    write!(f, " {e}")?;
                }
                write!(f, " @{})", ta.site)
            }
        }
    }
}

/// Canonical prefix notation.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::And(fs) | Formula::Or(fs) => {
                f.write_str(if matches!(self, Formula::And(_)) { "(and" } else { "(or" })?;
                for x in fs {
                    write!(f, " {x}")?;
                }
                f.write_str(")")
            }
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::Atom(a) => write!(f, "{a}"),
        }
    }
}
