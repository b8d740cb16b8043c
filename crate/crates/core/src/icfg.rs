//! Trimmed inter-procedural control-flow graph: one graph per class, made of
//! the per-method CFGs joined by the intra-class call graph. Calls that leave
//! the class are opaque pass-through nodes.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::ir::{IrClass, IrStmt};

/// A statement of the class: (method position, statement index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub method: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Fallthrough,
    BranchTrue,
    BranchFalse,
    CallEntry,
    CallReturn,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Fallthrough => "fallthrough",
            EdgeKind::BranchTrue => "branch-true",
            EdgeKind::BranchFalse => "branch-false",
            EdgeKind::CallEntry => "call-entry",
            EdgeKind::CallReturn => "call-return",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IcfgDiagnostic {
    /// `invoke` of a name that is not a method of this class; kept as a plain node.
    OpaqueInvoke { node: NodeId, method: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IcfgError {
    #[error("node {0:?} is not part of the graph")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone)]
pub struct TrimmedIcfg {
    pub class_name: String,
    method_names: Vec<String>,
    /// Ordinal of the first statement of each method.
    offsets: Vec<usize>,
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    /// Edge positions per node ordinal.
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    entry_points: Vec<NodeId>,
    pub diagnostics: Vec<IcfgDiagnostic>,
}

fn ends_method(stmt: &IrStmt) -> bool {
    matches!(stmt, IrStmt::Return | IrStmt::Goto(_) | IrStmt::Branch { .. })
}

/// Builds the trimmed ICFG of one class.
pub fn build_trimmed_icfg(cls: &IrClass) -> TrimmedIcfg {
    let mut offsets = Vec::with_capacity(cls.methods.len());
    let mut nodes = Vec::new();
    for (mi, m) in cls.methods.iter().enumerate() {
        offsets.push(nodes.len());
        nodes.extend((0..m.body.len()).map(|index| NodeId { method: mi, index }));
    }

    // exit nodes: explicit returns, plus a last statement that falls off the end
    let exits: Vec<Vec<NodeId>> = cls
        .methods
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let mut out: Vec<NodeId> = m
                .body
                .iter()
                .enumerate()
                .filter(|(_, ins)| matches!(ins.stmt, IrStmt::Return))
                .map(|(index, _)| NodeId { method: mi, index })
                .collect();
            if let Some(last) = m.body.last() {
                let intra_call = matches!(&last.stmt, IrStmt::Invoke { method, .. } if cls.method_index(method).is_some());
                if !ends_method(&last.stmt) && !intra_call {
                    out.push(NodeId { method: mi, index: m.body.len() - 1 });
                }
            }
            out
        })
        .collect();

    let mut edges = Vec::new();
    let mut diagnostics = Vec::new();
    for (mi, m) in cls.methods.iter().enumerate() {
        let labels = m.label_positions();
        let at = |index: usize| NodeId { method: mi, index };
        for (i, ins) in m.body.iter().enumerate() {
            let src = at(i);
            let next = (i + 1 < m.body.len()).then(|| at(i + 1));
            match &ins.stmt {
                IrStmt::Branch { if_true, if_false, .. } => {
                    edges.push(Edge { src, dst: at(labels[if_true.as_str()]), kind: EdgeKind::BranchTrue });
                    edges.push(Edge { src, dst: at(labels[if_false.as_str()]), kind: EdgeKind::BranchFalse });
                }
                IrStmt::Goto(l) => {
                    edges.push(Edge { src, dst: at(labels[l.as_str()]), kind: EdgeKind::Fallthrough });
                }
                IrStmt::Return => {}
                IrStmt::Invoke { method, .. } => match cls.method_index(method) {
                    Some(callee) => {
                        edges.push(Edge {
                            src,
                            dst: NodeId { method: callee, index: 0 },
                            kind: EdgeKind::CallEntry,
                        });
                        if let Some(next) = next {
                            for r in &exits[callee] {
                                edges.push(Edge { src: *r, dst: next, kind: EdgeKind::CallReturn });
                            }
                        }
                    }
                    None => {
                        diagnostics.push(IcfgDiagnostic::OpaqueInvoke { node: src, method: method.clone() });
                        if let Some(next) = next {
                            edges.push(Edge { src, dst: next, kind: EdgeKind::Fallthrough });
                        }
                    }
                },
                _ => {
                    if let Some(next) = next {
                        edges.push(Edge { src, dst: next, kind: EdgeKind::Fallthrough });
                    }
                }
            }
        }
    }
    edges.sort();
    edges.dedup();

    let ordinal = |n: NodeId| offsets[n.method] + n.index;
    let mut preds = vec![Vec::new(); nodes.len()];
    let mut succs = vec![Vec::new(); nodes.len()];
    for (ei, e) in edges.iter().enumerate() {
        succs[ordinal(e.src)].push(ei);
        preds[ordinal(e.dst)].push(ei);
    }
    for p in &mut preds {
        p.sort_by_key(|&ei| (edges[ei].src, edges[ei].kind));
    }

    let entry_points = cls
        .methods
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.body.is_empty())
        .map(|(mi, _)| NodeId { method: mi, index: 0 })
        .collect();

    TrimmedIcfg {
        class_name: cls.name.clone(),
        method_names: cls.methods.iter().map(|m| m.name.clone()).collect(),
        offsets,
        nodes,
        edges,
        preds,
        succs,
        entry_points,
        diagnostics,
    }
}

impl TrimmedIcfg {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn entry_points(&self) -> &[NodeId] {
        &self.entry_points
    }

    pub fn is_entry(&self, n: NodeId) -> bool {
        n.index == 0 && self.entry_points.binary_search(&n).is_ok()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.method < self.offsets.len() && self.nodes.get(self.offsets[n.method] + n.index) == Some(&n)
    }

    /// Dense position of a node, `0..nodes().len()`.
    pub fn ordinal(&self, n: NodeId) -> Result<usize, IcfgError> {
        if self.contains(n) {
            Ok(self.offsets[n.method] + n.index)
        } else {
            Err(IcfgError::UnknownNode(n))
        }
    }

    pub fn method_name(&self, method: usize) -> &str {
        &self.method_names[method]
    }

    /// Incoming edges, ordered by (source node, kind).
    pub fn predecessor_edges(&self, n: NodeId) -> Result<impl Iterator<Item = &Edge> + '_, IcfgError> {
        let o = self.ordinal(n)?;
        Ok(self.preds[o].iter().map(move |&ei| &self.edges[ei]))
    }

    pub fn successor_edges(&self, n: NodeId) -> Result<impl Iterator<Item = &Edge> + '_, IcfgError> {
        let o = self.ordinal(n)?;
        Ok(self.succs[o].iter().map(move |&ei| &self.edges[ei]))
    }

    /// Distinct predecessor nodes in (method, index) order.
    pub fn predecessors(&self, n: NodeId) -> Result<Vec<NodeId>, IcfgError> {
        let set: BTreeSet<NodeId> = self.predecessor_edges(n)?.map(|e| e.src).collect();
        Ok(set.into_iter().collect())
    }

    pub fn node_label(&self, n: NodeId) -> String {
        format!("{}#{}", self.method_names[n.method], n.index)
    }

    /// One edge per line, `src -> dst [kind]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} -> {} [{}]", self.node_label(e.src), self.node_label(e.dst), e.kind.name());
        }
        out
    }

    /// Retreating edges found by a depth-first walk from the entry points in
    /// order, then from any node still unvisited (dead code can loop too).
    pub fn back_edges(&self) -> Vec<Edge> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            OnStack,
            Done,
        }
        let mut mark = vec![Mark::White; self.nodes.len()];
        let mut out = BTreeSet::new();
        let roots = self.entry_points.iter().map(|n| self.offsets[n.method] + n.index).chain(0..self.nodes.len());
        for r in roots {
            if mark[r] != Mark::White {
                continue;
            }
            // explicit stack of (node ordinal, next successor position)
            let mut stack = vec![(r, 0usize)];
            mark[r] = Mark::OnStack;
            while let Some(&mut (o, ref mut pos)) = stack.last_mut() {
                if let Some(&ei) = self.succs[o].get(*pos) {
                    *pos += 1;
                    let e = self.edges[ei];
                    let d = self.offsets[e.dst.method] + e.dst.index;
                    match mark[d] {
                        Mark::White => {
                            mark[d] = Mark::OnStack;
                            stack.push((d, 0));
                        }
                        Mark::OnStack => {
                            out.insert(e);
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[o] = Mark::Done;
                    stack.pop();
                }
            }
        }
        out.into_iter().collect()
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.method, self.index)
    }
}
