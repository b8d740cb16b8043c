use crate::icfg::{EdgeKind, NodeId};
use crate::ir::IrStmt;

use super::term::{Atom, Formula, Rel, TargetAtom, Term};

/// How the backward walk arrived at the statement being transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// The statement is the target the walk started from.
    Origin,
    /// The statement is a predecessor, left along an edge of this kind.
    Through(EdgeKind),
}

/// Location written by a field store: the dotted path `obj.field`.
pub fn field_path(obj: &str, field: &str) -> String {
    format!("{obj}.{field}")
}

pub fn target_atom(api: &str, args: &[crate::ir::Operand], site: NodeId) -> TargetAtom {
    let mut terms = args.iter().map(Term::from_operand);
    TargetAtom {
        api: api.to_string(),
        attr: terms.next().unwrap_or(Term::Null),
        extras: terms.collect(),
        site,
    }
}

/// Symbolic state transformer: the weakest precondition of `stmt` w.r.t. `phi`.
pub fn trans(stmt: &IrStmt, phi: &Formula, site: NodeId, step: Step) -> Formula {
    match stmt {
        IrStmt::Target { dst, api, args } => match step {
            Step::Origin => Formula::and([phi.clone(), Formula::Atom(Atom::Target(target_atom(api, args, site)))]),
            // passed again further up the chain: an ordinary API assignment
            Step::Through(_) => phi.subst(
                &Term::Var(dst.clone()),
                &Term::Api(api.clone(), args.iter().map(Term::from_operand).collect()),
            ),
        },
        IrStmt::Copy { dst, op, src } => {
            let src = Term::from_operand(src);
            let value = match op {
                None => src,
                Some(op) => Term::Unary(*op, Box::new(src)),
            };
            phi.subst(&Term::Var(dst.clone()), &value)
        }
        IrStmt::Binary { dst, lhs, op, rhs } => phi.subst(
            &Term::Var(dst.clone()),
            &Term::Binary(*op, Box::new(Term::from_operand(lhs)), Box::new(Term::from_operand(rhs))),
        ),
        IrStmt::ApiAssign { dst, api, args } => phi.subst(
            &Term::Var(dst.clone()),
            &Term::Api(api.clone(), args.iter().map(Term::from_operand).collect()),
        ),
        IrStmt::FieldStore { obj, field, value } => {
            phi.subst(&Term::Var(field_path(obj, field)), &Term::from_operand(value))
        }
        IrStmt::ArrayStore { array, index, value } => {
            array_store(phi, array, &Term::from_operand(index), &Term::from_operand(value))
        }
        IrStmt::StrEqAssign { dst, src, lit } => phi.subst(
            &Term::Var(dst.clone()),
            &Term::StrEq(Box::new(Term::from_operand(src)), lit.clone()),
        ),
        IrStmt::Branch { cond, .. } => {
            let c = Formula::from_bool_term(Term::from_operand(cond));
            match step {
                Step::Through(EdgeKind::BranchTrue) => Formula::and([phi.clone(), c]),
                Step::Through(EdgeKind::BranchFalse) => Formula::and([phi.clone(), Formula::not(c)]),
                _ => phi.clone(),
            }
        }
        IrStmt::Goto(_) | IrStmt::Invoke { .. } | IrStmt::Return => phi.clone(),
    }
}

/// Renames the cells of `from` to cells of `to`, including cells nested in indices.
fn rename_cells(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Elem(a, idx) => {
            let a = if a == from { to.to_string() } else { a.clone() };
            Term::Elem(a, Box::new(rename_cells(idx, from, to)))
        }
        Term::Api(name, args) => Term::Api(name.clone(), args.iter().map(|x| rename_cells(x, from, to)).collect()),
        Term::Unary(op, x) => Term::Unary(*op, Box::new(rename_cells(x, from, to))),
        Term::Binary(op, x, y) => {
            Term::Binary(*op, Box::new(rename_cells(x, from, to)), Box::new(rename_cells(y, from, to)))
        }
        Term::StrEq(x, lit) => Term::StrEq(Box::new(rename_cells(x, from, to)), lit.clone()),
        _ => t.clone(),
    }
}

fn mentions_array(t: &Term, array: &str) -> bool {
    let mut found = false;
    t.visit(&mut |x| found |= matches!(x, Term::Elem(a, _) if a == array));
    found
}

/// `a[idx] = v`: every cell `a[t]` read by `phi` is split on whether `t`
/// equals `idx`, unless that is decided syntactically. Cells already
/// decided are renamed to a name no identifier can take, so they are not
/// split again, and renamed back at the end.
fn array_store(phi: &Formula, array: &str, idx: &Term, value: &Term) -> Formula {
    let done = format!("{array}'");
    let idx = rename_cells(idx, array, &done);
    let value = rename_cells(value, array, &done);

    fn go(phi: &Formula, array: &str, done: &str, idx: &Term, value: &Term) -> Formula {
        let mut cell = None;
        phi.visit_terms(&mut |t| {
            if cell.is_none() {
                if let Term::Elem(a, i) = t {
                    if a == array && !mentions_array(i, array) {
                        cell = Some((t.clone(), (**i).clone()));
                    }
                }
            }
        });
        let Some((cell, t)) = cell else { return phi.clone() };
        let kept = Term::Elem(done.to_string(), Box::new(t.clone()));
        let hit = || go(&phi.subst(&cell, value), array, done, idx, value);
        let miss = || go(&phi.subst(&cell, &kept), array, done, idx, value);
        if &t == idx {
            return hit();
        }
        if let (Some(x), Some(y)) = (t.ground_value(), idx.ground_value()) {
            return if x == y { hit() } else { miss() };
        }
        Formula::or([
            Formula::and([Formula::cmp(t.clone(), Rel::Eq, idx.clone()), hit()]),
            Formula::and([Formula::cmp(t, Rel::Ne, idx.clone()), miss()]),
        ])
    }

    go(phi, array, &done, &idx, &value).map_terms(&mut |t| rename_cells(t, &done, array))
}
