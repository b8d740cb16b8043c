//! Command implementations behind the `confcheck` binary. Each returns the
//! text it would write, so tests can compare outputs byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::appscan::{scan, AppBundle, AppScanError, ScanOptions, ScanReport};
use crate::icfg::build_trimmed_icfg;
use crate::ir::{parse_snapshot, FrameworkSnapshot, ParseError};
use crate::oracle::{oracle_constraints, OracleError};
use crate::refine::{
    dedup_constraints, extract_all_constraints, extract_class_constraints, Budgets, ConfigApiSpec, ConfigConstraint,
    Diagnostic, Extraction, RefineError, SpecError,
};
use crate::rulegen::{generate_rules, read_rules, write_rules, DetectionRule, RuleFileError};
use crate::symexec::{extract_path_constraints, target_nodes};

pub const SNAPSHOT_EXTENSION: &str = "snap";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Spec { path: PathBuf, source: SpecError },
    #[error("{path}: {source}")]
    Rules { path: PathBuf, source: RuleFileError },
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    AppScan(#[from] AppScanError),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn load_snapshot(path: &Path) -> Result<FrameworkSnapshot, CliError> {
    parse_snapshot(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// Every `*.snap` file of `dir`, keyed by level. Two files at one level is a usage error.
pub fn load_snapshot_dir(dir: &Path) -> Result<BTreeMap<u32, FrameworkSnapshot>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e.map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?.path();
        if p.extension().is_some_and(|x| x == SNAPSHOT_EXTENSION) {
            paths.push(p);
        }
    }
    paths.sort();
    let mut out = BTreeMap::new();
    let mut seen: BTreeMap<u32, PathBuf> = BTreeMap::new();
    for p in paths {
        let snap = load_snapshot(&p)?;
        if let Some(prev) = seen.insert(snap.api_level, p.clone()) {
            return Err(CliError::Usage(format!(
                "{} and {} both declare level {}",
                prev.display(),
                p.display(),
                snap.api_level
            )));
        }
        out.insert(snap.api_level, snap);
    }
    Ok(out)
}

pub fn load_spec(path: Option<&Path>) -> Result<ConfigApiSpec, CliError> {
    match path {
        None => Ok(ConfigApiSpec::builtin()),
        Some(p) => ConfigApiSpec::parse(&read(p)?).map_err(|source| CliError::Spec { path: p.to_path_buf(), source }),
    }
}

pub fn load_rules(path: &Path) -> Result<Vec<DetectionRule>, CliError> {
    read_rules(&read(path)?).map_err(|source| CliError::Rules { path: path.to_path_buf(), source })
}

/// One prefix per line; blank lines and `#` comments ignored.
pub fn parse_lib_prefixes(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// One constraint per line, without provenance, so that outputs from
/// different extraction methods can be diffed directly.
pub fn render_constraints(cs: &[ConfigConstraint]) -> String {
    let mut s = String::new();
    for c in cs {
        writeln!(s, "{c}").expect("write to string");
    }
    s
}

#[derive(Debug, Clone)]
pub struct ExtractOutput {
    pub levels: BTreeMap<u32, Extraction>,
    pub rules: Vec<DetectionRule>,
}

impl ExtractOutput {
    pub fn rules_text(&self) -> String {
        write_rules(&self.rules)
    }

    /// Per-level counts followed by discard diagnostics.
    pub fn report(&self) -> String {
        let mut s = String::new();
        for (level, ex) in &self.levels {
            writeln!(
                s,
                "level {level}: {} constraints, {} diagnostics",
                ex.constraints.len(),
                ex.diagnostics.len()
            )
            .expect("write to string");
            for d in &ex.diagnostics {
                writeln!(s, "  {d}").expect("write to string");
            }
        }
        writeln!(s, "{} rules", self.rules.len()).expect("write to string");
        s
    }
}

pub fn extract(
    snaps: &BTreeMap<u32, FrameworkSnapshot>,
    spec: &ConfigApiSpec,
    budgets: Budgets,
) -> Result<ExtractOutput, CliError> {
    if snaps.len() < 2 {
        return Err(CliError::Usage(format!(
            "need snapshots at two or more distinct levels, found {}",
            snaps.len()
        )));
    }
    let mut levels = BTreeMap::new();
    for (&level, snap) in snaps {
        levels.insert(level, extract_all_constraints(snap, spec, budgets)?);
    }
    let by_level = levels.iter().map(|(l, ex)| (*l, ex.constraints.clone())).collect();
    Ok(ExtractOutput { rules: generate_rules(&by_level), levels })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassReport {
    pub constraints: Vec<ConfigConstraint>,
    pub diagnostics: Vec<Diagnostic>,
    pub icfg_dump: Option<String>,
    pub pi_dump: Option<String>,
}

impl ClassReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.icfg_dump {
            s.push_str("# icfg\n");
            s.push_str(d);
        }
        if let Some(d) = &self.pi_dump {
            s.push_str("# path constraints\n");
            s.push_str(d);
        }
        if self.icfg_dump.is_some() || self.pi_dump.is_some() {
            s.push_str("# constraints\n");
        }
        s.push_str(&render_constraints(&self.constraints));
        s
    }
}

pub fn class_constraints(
    snap: &FrameworkSnapshot,
    class: &str,
    spec: &ConfigApiSpec,
    budgets: Budgets,
    dump_icfg: bool,
    dump_pi: bool,
) -> Result<ClassReport, CliError> {
    let cls = snap
        .class(class)
        .ok_or_else(|| CliError::Usage(format!("class `{class}` not found in snapshot")))?;
    let g = build_trimmed_icfg(cls);
    let mut report = ClassReport::default();
    if dump_icfg {
        report.icfg_dump = Some(g.dump());
    }
    if dump_pi {
        let mut s = String::new();
        for t in target_nodes(cls) {
            match extract_path_constraints(cls, &g, t, budgets.expansions) {
                Ok(pis) => {
                    for pi in pis {
                        writeln!(s, "{} from {}: {}", pi.target, g.node_label(pi.entry), pi.formula)
                            .expect("write to string");
                    }
                }
                Err(e) => writeln!(s, "{e}").expect("write to string"),
            }
        }
        report.pi_dump = Some(s);
    }
    let out = extract_class_constraints(cls, snap, spec, budgets)?;
    report.constraints = dedup_constraints(out.constraints);
    report.diagnostics = out.diagnostics;
    Ok(report)
}

pub fn oracle(
    snap: &FrameworkSnapshot,
    class: &str,
    spec: &ConfigApiSpec,
    max_states: usize,
) -> Result<Vec<ConfigConstraint>, CliError> {
    Ok(oracle_constraints(snap, class, spec, max_states)?)
}

pub fn scan_app(app: &Path, rules: &[DetectionRule], opts: &ScanOptions) -> Result<ScanReport, CliError> {
    let bundle = AppBundle::load(app)?;
    Ok(scan(&bundle, rules, opts))
}
