//! Brute-force forward enumeration, used as an independent check on the
//! backward pipeline.
//!
//! Every path from every method entry is executed concretely, each node at
//! most twice per path. Unknown locations and API results are forked over
//! the class's constants plus fresh witnesses; API calls are memoized by
//! their concrete arguments. Each target visit records the attribute value
//! and the tags returned by `getName` so far.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::icfg::{build_trimmed_icfg, EdgeKind, NodeId, TrimmedIcfg};
use crate::ir::{attribute_display_name, FrameworkSnapshot, IrClass, IrStmt, Operand};
use crate::refine::{dedup_constraints, ConfigApiSpec, ConfigConstraint, TAG_ACCESSOR};
use crate::solver::infer_sorts;
use crate::symexec::{field_path, stmt_ref, Atom, Formula, Rel, Term, OCCURRENCE_CAP};
use crate::value::{apply_binary, apply_unary, DomainBuilder, Domains, SortSet, Value, NULL_VALUE};

pub const DEFAULT_MAX_STATES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("class `{0}` not found")]
    UnknownClass(String),
    #[error("configuration API `{0}` has no entry in the API table")]
    UnknownApi(String),
    #[error("state budget of {0} exceeded; refusing to report a partial result")]
    StateBudget(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Loc {
    Var(String),
    Cell(String, Value),
}

#[derive(Debug, Clone)]
enum Missing {
    Loc(Loc),
    Api(String, Vec<Value>),
}

#[derive(Debug, Clone)]
struct State {
    node: NodeId,
    entry: NodeId,
    counts: Vec<u8>,
    store: BTreeMap<Loc, Value>,
    memo: BTreeMap<(String, Vec<Value>), Value>,
}

#[derive(Debug, Clone)]
struct Observation {
    attr: Value,
    tags: Vec<Value>,
}

struct Runner<'a> {
    cls: &'a IrClass,
    snap: &'a FrameworkSnapshot,
    g: TrimmedIcfg,
    consts: Domains,
    sorts: BTreeMap<String, SortSet>,
}

fn array_key(array: &str) -> String {
    format!("{array}[]")
}

fn ret_key(api: &str) -> String {
    format!("$ret:{api}")
}

fn hint_term(op: &Operand) -> Term {
    match op {
        Operand::Elem(a, _) => Term::Var(array_key(a)),
        other => Term::from_operand(other),
    }
}

/// Static sort hints: one atom per statement relating a location to what flows into it.
fn sort_hints(cls: &IrClass) -> Formula {
    let eq = |a: Term, b: Term| Formula::Atom(Atom::Cmp(a, Rel::Eq, b));
    let mut parts = Vec::new();
    for m in &cls.methods {
        for ins in &m.body {
            match &ins.stmt {
                IrStmt::Copy { dst, op, src } => {
                    let t = match op {
                        None => hint_term(src),
                        Some(op) => Term::Unary(*op, Box::new(hint_term(src))),
                    };
                    parts.push(eq(Term::Var(dst.clone()), t));
                }
                IrStmt::Binary { dst, lhs, op, rhs } => parts.push(eq(
                    Term::Var(dst.clone()),
                    Term::Binary(*op, Box::new(hint_term(lhs)), Box::new(hint_term(rhs))),
                )),
                IrStmt::ApiAssign { dst, api, .. } | IrStmt::Target { dst, api, .. } => {
                    parts.push(eq(Term::Var(dst.clone()), Term::Var(ret_key(api))))
                }
                IrStmt::FieldStore { obj, field, value } => {
                    parts.push(eq(Term::Var(field_path(obj, field)), hint_term(value)))
                }
                IrStmt::ArrayStore { array, value, .. } => {
                    parts.push(eq(Term::Var(array_key(array)), hint_term(value)))
                }
                IrStmt::StrEqAssign { dst, src, lit } => parts.push(eq(
                    Term::Var(dst.clone()),
                    Term::StrEq(Box::new(hint_term(src)), lit.clone()),
                )),
                IrStmt::Branch { cond, .. } => parts.push(Formula::Atom(Atom::Bool(hint_term(cond)))),
                IrStmt::Goto(_) | IrStmt::Invoke { .. } | IrStmt::Return => {}
            }
        }
    }
    Formula::And(parts)
}

fn literal(op: &Operand, snap: &FrameworkSnapshot) -> Option<Value> {
    match op {
        Operand::Int(i) => Some(Value::Int(*i)),
        Operand::Str(s) => Some(Value::Str(s.clone())),
        Operand::Null => Some(Value::Int(NULL_VALUE)),
        Operand::Attr(a) => snap.attr_consts.get(a).map(|id| Value::Int(*id)),
        Operand::Var(_) | Operand::Elem(..) => None,
    }
}

/// Every literal of the class, plus the values of operations on literals only.
fn class_constants(cls: &IrClass, snap: &FrameworkSnapshot) -> Domains {
    let mut b = DomainBuilder::new();
    let add_ops = |ops: &[&Operand], b: &mut DomainBuilder| {
        for op in ops {
            if let Some(v) = literal(op, snap) {
                b.add_value(&v);
            }
            if let Operand::Elem(_, idx) = op {
                if let Some(v) = literal(idx, snap) {
                    b.add_value(&v);
                }
            }
        }
    };
    for m in &cls.methods {
        for ins in &m.body {
            match &ins.stmt {
                IrStmt::Copy { op, src, .. } => {
                    add_ops(&[src], &mut b);
                    if let (Some(op), Some(v)) = (op, literal(src, snap)) {
                        b.add_value(&apply_unary(*op, &v));
                    }
                }
                IrStmt::Binary { lhs, op, rhs, .. } => {
                    add_ops(&[lhs, rhs], &mut b);
                    if matches!(op, crate::ir::BinOp::Lt | crate::ir::BinOp::Le) {
                        b.mark_order();
                    }
                    if let (Some(x), Some(y)) = (literal(lhs, snap), literal(rhs, snap)) {
                        b.add_value(&apply_binary(*op, &x, &y));
                    }
                }
                IrStmt::ApiAssign { args, .. } | IrStmt::Target { args, .. } | IrStmt::Invoke { args, .. } => {
                    add_ops(&args.iter().collect::<Vec<_>>(), &mut b)
                }
                IrStmt::FieldStore { value, .. } => add_ops(&[value], &mut b),
                IrStmt::ArrayStore { index, value, .. } => add_ops(&[index, value], &mut b),
                IrStmt::StrEqAssign { src, lit, .. } => {
                    add_ops(&[src], &mut b);
                    b.add_str(lit);
                }
                IrStmt::Branch { cond, .. } => add_ops(&[cond], &mut b),
                IrStmt::Goto(_) | IrStmt::Return => {}
            }
        }
    }
    b.build()
}

enum Outcome {
    Fork(Missing),
    Done { observation: Option<Observation>, branch: Option<bool> },
}

impl<'a> Runner<'a> {
    fn new(cls: &'a IrClass, snap: &'a FrameworkSnapshot) -> Runner<'a> {
        Runner {
            cls,
            snap,
            g: build_trimmed_icfg(cls),
            consts: class_constants(cls, snap),
            sorts: infer_sorts(&sort_hints(cls)),
        }
    }

    fn domain(&self, m: &Missing) -> Vec<Value> {
        let key = match m {
            Missing::Loc(Loc::Var(v)) => v.clone(),
            Missing::Loc(Loc::Cell(a, _)) => array_key(a),
            Missing::Api(api, _) => ret_key(api),
        };
        self.consts.for_sorts(self.sorts.get(&key).copied().unwrap_or_default())
    }

    fn read(&self, st: &State, op: &Operand) -> Result<Value, Missing> {
        if let Some(v) = literal(op, self.snap) {
            return Ok(v);
        }
        let loc = match op {
            Operand::Var(v) => Loc::Var(v.clone()),
            Operand::Elem(a, idx) => Loc::Cell(a.clone(), self.read(st, idx)?),
            // undeclared attribute names are rejected by the parser
            _ => Loc::Var(format!("{op}")),
        };
        st.store.get(&loc).cloned().ok_or(Missing::Loc(loc))
    }

    fn call(&self, st: &State, api: &str, args: &[Operand]) -> Result<Value, Missing> {
        let vals = args.iter().map(|a| self.read(st, a)).collect::<Result<Vec<_>, _>>()?;
        let key = (api.to_string(), vals);
        st.memo.get(&key).cloned().ok_or(Missing::Api(key.0, key.1))
    }

    fn exec(&self, st: &mut State) -> Outcome {
        let stmt = &self.cls.methods[st.node.method].body[st.node.index].stmt;
        macro_rules! get {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(m) => return Outcome::Fork(m),
                }
            };
        }
        let mut observation = None;
        let mut branch = None;
        match stmt {
            IrStmt::Copy { dst, op, src } => {
                let v = get!(self.read(st, src));
                let v = match op {
                    None => v,
                    Some(op) => apply_unary(*op, &v),
                };
                st.store.insert(Loc::Var(dst.clone()), v);
            }
            IrStmt::Binary { dst, lhs, op, rhs } => {
                let a = get!(self.read(st, lhs));
                let b = get!(self.read(st, rhs));
                st.store.insert(Loc::Var(dst.clone()), apply_binary(*op, &a, &b));
            }
            IrStmt::ApiAssign { dst, api, args } => {
                let v = get!(self.call(st, api, args));
                st.store.insert(Loc::Var(dst.clone()), v);
            }
            IrStmt::Target { dst, api, args } => {
                let attr = get!(args.first().map_or(Ok(Value::Int(NULL_VALUE)), |a| self.read(st, a)));
                let v = get!(self.call(st, api, args));
                let tags = st.memo.iter().filter(|((a, _), _)| a == TAG_ACCESSOR).map(|(_, v)| v.clone()).collect();
                observation = Some(Observation { attr, tags });
                st.store.insert(Loc::Var(dst.clone()), v);
            }
            IrStmt::FieldStore { obj, field, value } => {
                let v = get!(self.read(st, value));
                st.store.insert(Loc::Var(field_path(obj, field)), v);
            }
            IrStmt::ArrayStore { array, index, value } => {
                let i = get!(self.read(st, index));
                let v = get!(self.read(st, value));
                st.store.insert(Loc::Cell(array.clone(), i), v);
            }
            IrStmt::StrEqAssign { dst, src, lit } => {
                let v = get!(self.read(st, src));
                st.store.insert(Loc::Var(dst.clone()), Value::Bool(v == Value::Str(lit.clone())));
            }
            IrStmt::Branch { cond, .. } => branch = Some(get!(self.read(st, cond)).is_true()),
            IrStmt::Goto(_) | IrStmt::Invoke { .. } | IrStmt::Return => {}
        }
        Outcome::Done { observation, branch }
    }

    /// Observations grouped by (target node, entry node).
    fn run(&self, max_states: usize) -> Result<BTreeMap<(NodeId, NodeId), Vec<Observation>>, OracleError> {
        let mut groups: BTreeMap<(NodeId, NodeId), Vec<Observation>> = BTreeMap::new();
        let mut stack: Vec<State> = Vec::new();
        for &e in self.g.entry_points().iter().rev() {
            let mut counts = vec![0u8; self.g.nodes().len()];
            counts[self.g.ordinal(e).expect("entry in graph")] = 1;
            stack.push(State { node: e, entry: e, counts, store: BTreeMap::new(), memo: BTreeMap::new() });
        }
        let mut states = 0usize;
        while let Some(mut st) = stack.pop() {
            states += 1;
            if states > max_states {
                return Err(OracleError::StateBudget(max_states));
            }
            match self.exec(&mut st) {
                Outcome::Fork(m) => {
                    for v in self.domain(&m).into_iter().rev() {
                        let mut s = st.clone();
                        match &m {
                            Missing::Loc(loc) => {
                                s.store.insert(loc.clone(), v);
                            }
                            Missing::Api(api, args) => {
                                s.memo.insert((api.clone(), args.clone()), v);
                            }
                        }
                        stack.push(s);
                    }
                }
                Outcome::Done { observation, branch } => {
                    if let Some(o) = observation {
                        groups.entry((st.node, st.entry)).or_default().push(o);
                    }
                    let edges: Vec<_> = self
                        .g
                        .successor_edges(st.node)
                        .expect("node in graph")
                        .filter(|e| match branch {
                            Some(true) => e.kind == EdgeKind::BranchTrue,
                            Some(false) => e.kind == EdgeKind::BranchFalse,
                            None => true,
                        })
                        .copied()
                        .collect();
                    for e in edges.iter().rev() {
                        let o = self.g.ordinal(e.dst).expect("node in graph");
                        if st.counts[o] >= OCCURRENCE_CAP {
                            continue;
                        }
                        let mut s = st.clone();
                        s.counts[o] += 1;
                        s.node = e.dst;
                        stack.push(s);
                    }
                }
            }
        }
        Ok(groups)
    }
}

/// Constraint set of one class by forward enumeration, in the same shape as
/// the backward extraction.
pub fn oracle_constraints(
    snap: &FrameworkSnapshot,
    class: &str,
    spec: &ConfigApiSpec,
    max_states: usize,
) -> Result<Vec<ConfigConstraint>, OracleError> {
    let cls = snap.class(class).ok_or_else(|| OracleError::UnknownClass(class.to_string()))?;
    let runner = Runner::new(cls, snap);
    let groups = runner.run(max_states)?;
    let mut out = Vec::new();
    for ((target, _entry), obs) in groups {
        let IrStmt::Target { api, .. } = &cls.methods[target.method].body[target.index].stmt else {
            unreachable!("observations are only made at targets");
        };
        let formats = spec.formats(api).ok_or_else(|| OracleError::UnknownApi(api.clone()))?;
        let open = obs
            .iter()
            .any(|o| runner.consts.is_witness(&o.attr) || o.tags.iter().any(|t| runner.consts.is_witness(t)));
        if open {
            continue;
        }
        let mut pairs = BTreeSet::new();
        for o in &obs {
            let Value::Int(id) = o.attr else { continue };
            let Some(name) = snap.attr_name(id) else { continue };
            let tags: BTreeSet<String> = if o.tags.is_empty() {
                BTreeSet::from([cls.name.clone()])
            } else {
                o.tags
                    .iter()
                    .filter_map(|t| match t {
                        Value::Str(s) => Some(s.clone()),
                        _ => None,
                    })
                    .collect()
            };
            for t in tags {
                pairs.insert((attribute_display_name(name), t));
            }
        }
        for (attribute, xml_tag) in pairs {
            for &format in formats {
                out.push(ConfigConstraint {
                    attribute: attribute.clone(),
                    xml_tag: xml_tag.clone(),
                    format,
                    api_level: snap.api_level,
                    provenance: stmt_ref(cls, target),
                });
            }
        }
    }
    Ok(dedup_constraints(out))
}
