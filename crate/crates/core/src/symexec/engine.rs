use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::icfg::{NodeId, TrimmedIcfg};
use crate::ir::{IrClass, IrStmt, StmtRef};

use super::term::Formula;
use super::trans::{trans, Step};

pub const DEFAULT_EXPANSION_BUDGET: usize = 50_000;

/// Each node may occur at most this many times along one backward chain.
pub const OCCURRENCE_CAP: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathConstraint {
    pub formula: Formula,
    pub target: StmtRef,
    pub target_node: NodeId,
    pub entry: NodeId,
    pub class_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymexecError {
    #[error("{0} is not a target statement")]
    NotATarget(StmtRef),
    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error("expansion budget of {budget} exceeded at {target}")]
    BudgetExceeded { target: StmtRef, budget: usize },
}

struct WorkItem {
    node: NodeId,
    phi_post: Formula,
    counts: Vec<u8>,
}

fn stmt_at(cls: &IrClass, n: NodeId) -> &IrStmt {
    &cls.methods[n.method].body[n.index].stmt
}

pub fn stmt_ref(cls: &IrClass, n: NodeId) -> StmtRef {
    StmtRef { class: cls.name.clone(), method: cls.methods[n.method].name.clone(), index: n.index }
}

/// Backward worklist propagation from one target to every entry point it
/// reaches. Returns one path constraint per reached entry, in node order.
pub fn extract_path_constraints(
    cls: &IrClass,
    g: &TrimmedIcfg,
    target: NodeId,
    budget: usize,
) -> Result<Vec<PathConstraint>, SymexecError> {
    let start = g.ordinal(target).map_err(|_| SymexecError::UnknownNode(target))?;
    let target_stmt = stmt_at(cls, target);
    if !target_stmt.is_target() {
        return Err(SymexecError::NotATarget(stmt_ref(cls, target)));
    }

    let mut counts = vec![0u8; g.nodes().len()];
    counts[start] = 1;
    let mut worklist = VecDeque::new();
    worklist.push_back(WorkItem {
        node: target,
        phi_post: trans(target_stmt, &Formula::TRUE, target, Step::Origin),
        counts,
    });

    let mut at_entry: BTreeMap<NodeId, Vec<Formula>> = BTreeMap::new();
    let mut expansions = 0usize;
    while let Some(item) = worklist.pop_front() {
        expansions += 1;
        if expansions > budget {
            return Err(SymexecError::BudgetExceeded { target: stmt_ref(cls, target), budget });
        }
        if g.is_entry(item.node) {
            at_entry.entry(item.node).or_default().push(item.phi_post.clone());
        }
        for e in g.predecessor_edges(item.node).expect("node in graph") {
            let o = g.ordinal(e.src).expect("edge endpoint in graph");
            if item.counts[o] >= OCCURRENCE_CAP {
                continue;
            }
            let phi_pre = trans(stmt_at(cls, e.src), &item.phi_post, e.src, Step::Through(e.kind));
            if phi_pre.is_false() {
                continue;
            }
            let mut counts = item.counts.clone();
            counts[o] += 1;
            worklist.push_back(WorkItem { node: e.src, phi_post: phi_pre, counts });
        }
    }

    let target_ref = stmt_ref(cls, target);
    Ok(at_entry
        .into_iter()
        .map(|(entry, disjuncts)| PathConstraint {
            formula: Formula::or(disjuncts),
            target: target_ref.clone(),
            target_node: target,
            entry,
            class_name: cls.name.clone(),
        })
        .collect())
}

/// Nodes of every target statement in the class, in declaration order.
pub fn target_nodes(cls: &IrClass) -> Vec<NodeId> {
    let mut out = Vec::new();
    for (method, m) in cls.methods.iter().enumerate() {
        for (index, ins) in m.body.iter().enumerate() {
            if ins.stmt.is_target() {
                out.push(NodeId { method, index });
            }
        }
    }
    out
}
