//! Turns path constraints into configuration constraints {A, X, F}.

mod spec;

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::format::DataFormat;
use crate::icfg::{build_trimmed_icfg, NodeId};
use crate::ir::{attribute_display_name, FrameworkSnapshot, IrClass, IrStmt, StmtRef};
use crate::solver::{symbolize, Problem, SatOutcome, ValueOutcome, DEFAULT_SOLVER_BUDGET};
use crate::symexec::{
    extract_path_constraints, stmt_ref, target_nodes, Atom, Formula, PathConstraint, Rel, SymexecError, Term,
    DEFAULT_EXPANSION_BUDGET,
};
use crate::value::Value;

pub use spec::{ConfigApiSpec, SpecError};

/// Name of the API whose return value is the XML tag being parsed.
pub const TAG_ACCESSOR: &str = "getName";

const ATTR_FOCUS: &str = "$attr";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigConstraint {
    pub attribute: String,
    pub xml_tag: String,
    pub format: DataFormat,
    pub api_level: u32,
    pub provenance: StmtRef,
}

impl ConfigConstraint {
    pub fn key(&self) -> (&str, &str, DataFormat) {
        (&self.attribute, &self.xml_tag, self.format)
    }
}

impl fmt::Display for ConfigConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}, {}}} @ {}", self.attribute, self.xml_tag, self.format, self.api_level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub expansions: usize,
    pub solver_steps: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { expansions: DEFAULT_EXPANSION_BUDGET, solver_steps: DEFAULT_SOLVER_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("{site}: configuration API `{api}` has no entry in the API table")]
    UnknownApi { api: String, site: StmtRef },
}

/// Why a path constraint produced nothing, or produced less than it could.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiscardReason {
    Unsat,
    SolverBudget,
    AttributeUndecidable,
    AttributeOpen,
    TagUndecidable,
    TagOpen,
    /// The attribute argument can take a value that is not an attribute id.
    NotAnAttribute(Value),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    Discarded { target: StmtRef, entry: NodeId, reason: DiscardReason },
    Symexec(SymexecError),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Discarded { target, entry, reason } => {
                let why = match reason {
                    DiscardReason::Unsat => "path constraint is unsatisfiable".to_string(),
                    DiscardReason::SolverBudget => "solver budget exceeded".to_string(),
                    DiscardReason::AttributeUndecidable => "attribute undecidable".to_string(),
                    DiscardReason::AttributeOpen => "attribute not confined to constants".to_string(),
                    DiscardReason::TagUndecidable => "tag undecidable".to_string(),
                    DiscardReason::TagOpen => "tag not confined to constants".to_string(),
                    DiscardReason::NotAnAttribute(v) => format!("attribute argument may be {v}, not an attribute id"),
                };
                write!(f, "{target} (entry {entry}): {why}")
            }
            Diagnostic::Symexec(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineOutcome {
    pub constraints: Vec<ConfigConstraint>,
    pub diagnostics: Vec<Diagnostic>,
}

fn replace_target(f: &Formula, site: NodeId) -> Formula {
    match f {
        Formula::And(fs) => Formula::and(fs.iter().map(|x| replace_target(x, site)).collect::<Vec<_>>()),
        Formula::Or(fs) => Formula::or(fs.iter().map(|x| replace_target(x, site)).collect::<Vec<_>>()),
        Formula::Not(x) => Formula::not(replace_target(x, site)),
        Formula::Atom(Atom::Target(ta)) if ta.site == site => {
            Formula::cmp(Term::Var(ATTR_FOCUS.into()), Rel::Eq, ta.attr.clone())
        }
        Formula::Atom(_) => f.clone(),
    }
}

/// What one satisfiable disjunct pins down.
struct Bindings {
    attrs: BTreeSet<String>,
    tags: Option<BTreeSet<String>>,
}

fn refine_disjunct(
    d: &Formula,
    snap: &FrameworkSnapshot,
    budget: u64,
    dropped: &mut Vec<DiscardReason>,
) -> Result<Option<Bindings>, DiscardReason> {
    let sym = symbolize(d, &snap.attr_consts);
    let p = Problem::new(sym.formula.clone());
    match p.check_sat(budget) {
        SatOutcome::Sat(_) => {}
        SatOutcome::Unsat => return Ok(None),
        SatOutcome::BudgetExceeded => return Err(DiscardReason::SolverBudget),
    }

    let attrs = match p.enumerate_var(ATTR_FOCUS, budget) {
        ValueOutcome::Undecidable => return Err(DiscardReason::AttributeUndecidable),
        ValueOutcome::Values { closed: false, .. } => return Err(DiscardReason::AttributeOpen),
        ValueOutcome::Values { values, .. } => {
            let mut names = BTreeSet::new();
            for v in values {
                match v {
                    Value::Int(id) if snap.attr_name(id).is_some() => {
                        names.insert(attribute_display_name(snap.attr_name(id).unwrap()));
                    }
                    other => dropped.push(DiscardReason::NotAnAttribute(other)),
                }
            }
            names
        }
    };

    let tag_vars: Vec<&str> =
        sym.vars_for_api(TAG_ACCESSOR).into_iter().filter(|v| p.domain(v).is_some()).collect();
    let tags = if tag_vars.is_empty() {
        None
    } else {
        let mut tags = BTreeSet::new();
        for v in tag_vars {
            match p.enumerate_var(v, budget) {
                ValueOutcome::Undecidable => return Err(DiscardReason::TagUndecidable),
                ValueOutcome::Values { closed: false, .. } => return Err(DiscardReason::TagOpen),
                ValueOutcome::Values { values, .. } => {
                    tags.extend(values.into_iter().filter_map(|v| match v {
                        Value::Str(s) => Some(s),
                        _ => None,
                    }))
                }
            }
        }
        Some(tags)
    };
    Ok(Some(Bindings { attrs, tags }))
}

/// Refines one path constraint. Each disjunct of π is solved on its own;
/// unsatisfiable disjuncts are dropped, and any disjunct whose attribute or
/// tag cannot be confined to constants discards the whole π.
pub fn refine_acc(
    pi: &PathConstraint,
    spec: &ConfigApiSpec,
    snap: &FrameworkSnapshot,
    solver_budget: u64,
) -> Result<RefineOutcome, RefineError> {
    let api = pi
        .formula
        .target_atoms()
        .into_iter()
        .find(|ta| ta.site == pi.target_node)
        .map(|ta| ta.api.clone())
        .unwrap_or_default();
    let formats = spec
        .formats(&api)
        .ok_or_else(|| RefineError::UnknownApi { api: api.clone(), site: pi.target.clone() })?;

    let discard = |reason| Diagnostic::Discarded { target: pi.target.clone(), entry: pi.entry, reason };
    let rewritten = replace_target(&pi.formula, pi.target_node);
    let mut out = RefineOutcome::default();
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    let mut any_sat = false;
    let mut dropped = Vec::new();
    for d in rewritten.disjuncts() {
        match refine_disjunct(d, snap, solver_budget, &mut dropped) {
            Ok(None) => {}
            Ok(Some(b)) => {
                any_sat = true;
                let tags = b.tags.unwrap_or_else(|| BTreeSet::from([pi.class_name.clone()]));
                for a in &b.attrs {
                    for x in &tags {
                        pairs.insert((a.clone(), x.clone()));
                    }
                }
            }
            Err(reason) => {
                out.diagnostics.push(discard(reason));
                return Ok(out);
            }
        }
    }
    if !any_sat {
        out.diagnostics.push(discard(DiscardReason::Unsat));
        return Ok(out);
    }
    dropped.sort();
    dropped.dedup();
    out.diagnostics.extend(dropped.into_iter().map(discard));
    for (attribute, xml_tag) in pairs {
        for &format in formats {
            out.constraints.push(ConfigConstraint {
                attribute: attribute.clone(),
                xml_tag: xml_tag.clone(),
                format,
                api_level: snap.api_level,
                provenance: pi.target.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub api_level: u32,
    /// Deduplicated by (attribute, tag, format), keeping the first provenance.
    pub constraints: Vec<ConfigConstraint>,
    pub diagnostics: Vec<Diagnostic>,
}

fn check_apis(snap: &FrameworkSnapshot, spec: &ConfigApiSpec) -> Result<(), RefineError> {
    for cls in &snap.classes {
        for n in target_nodes(cls) {
            if let IrStmt::Target { api, .. } = &cls.methods[n.method].body[n.index].stmt {
                if spec.formats(api).is_none() {
                    return Err(RefineError::UnknownApi { api: api.clone(), site: stmt_ref(cls, n) });
                }
            }
        }
    }
    Ok(())
}

/// Constraints of one class, before deduplication.
pub fn extract_class_constraints(
    cls: &IrClass,
    snap: &FrameworkSnapshot,
    spec: &ConfigApiSpec,
    budgets: Budgets,
) -> Result<RefineOutcome, RefineError> {
    let g = build_trimmed_icfg(cls);
    let mut out = RefineOutcome::default();
    for t in target_nodes(cls) {
        match extract_path_constraints(cls, &g, t, budgets.expansions) {
            Ok(pis) => {
                for pi in &pis {
                    let r = refine_acc(pi, spec, snap, budgets.solver_steps)?;
                    out.constraints.extend(r.constraints);
                    out.diagnostics.extend(r.diagnostics);
                }
            }
            Err(e) => out.diagnostics.push(Diagnostic::Symexec(e)),
        }
    }
    Ok(out)
}

/// Runs the whole extraction over every target of every class.
pub fn extract_all_constraints(
    snap: &FrameworkSnapshot,
    spec: &ConfigApiSpec,
    budgets: Budgets,
) -> Result<Extraction, RefineError> {
    check_apis(snap, spec)?;
    let per_class: Vec<Result<RefineOutcome, RefineError>> = snap
        .classes
        .par_iter()
        .map(|cls| extract_class_constraints(cls, snap, spec, budgets))
        .collect();
    let mut all = Vec::new();
    let mut diagnostics = Vec::new();
    for r in per_class {
        let r = r?;
        all.extend(r.constraints);
        diagnostics.extend(r.diagnostics);
    }
    Ok(Extraction { api_level: snap.api_level, constraints: dedup_constraints(all), diagnostics })
}

/// Stable sort by (attribute, tag, format) and keep the first of each key.
pub fn dedup_constraints(mut cs: Vec<ConfigConstraint>) -> Vec<ConfigConstraint> {
    cs.sort_by(|a, b| a.key().cmp(&b.key()));
    cs.dedup_by(|a, b| a.key() == b.key());
    cs
}
