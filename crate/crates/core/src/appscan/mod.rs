//! Scans app XML resources against detection rules, with the version (F_v)
//! and library (F_lib) false-warning filters.

mod bundle;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::format::DataFormat;
use crate::rulegen::{DetectionRule, RuleKind};

pub use bundle::{
    parse_manifest, parse_resource, parse_resource_path, AppBundle, Manifest, ResourceFile, XmlAttr, XmlElement,
    ANDROID_NS,
};

pub const DEFAULT_LIB_PREFIXES: [&str; 2] = ["androidx.", "android.support."];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AppScanError {
    #[error("app directory `{0}` does not exist")]
    NotADirectory(String),
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("manifest: {0}")]
    Manifest(String),
}

/// How an attribute value is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueClass {
    /// `?`-prefixed theme reference.
    Styled,
    /// `@`-prefixed resource reference.
    Reference,
    Bool,
    Int,
    Float,
    Dimension,
    String,
}

const DIMENSION_UNITS: [&str; 7] = ["dp", "dip", "sp", "px", "pt", "in", "mm"];

fn is_decimal(s: &str) -> bool {
    let s = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    !(int.is_empty() && frac.is_empty())
        && int.chars().all(|c| c.is_ascii_digit())
        && frac.chars().all(|c| c.is_ascii_digit())
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        return !hex.is_empty() && hex.chars().all(|c| c.is_ascii_hexdigit());
    }
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_color(s: &str) -> bool {
    s.strip_prefix('#')
        .is_some_and(|h| matches!(h.len(), 3 | 4 | 6 | 8) && h.chars().all(|c| c.is_ascii_hexdigit()))
}

pub fn classify_value_format(raw: &str) -> ValueClass {
    let v = raw.trim();
    if v.starts_with('?') {
        ValueClass::Styled
    } else if v.starts_with('@') {
        ValueClass::Reference
    } else if v == "true" || v == "false" {
        ValueClass::Bool
    } else if is_integer(v) || is_color(v) {
        ValueClass::Int
    } else if is_decimal(v) {
        ValueClass::Float
    } else if DIMENSION_UNITS
        .iter()
        .any(|u| v.strip_suffix(u).is_some_and(is_decimal))
    {
        ValueClass::Dimension
    } else {
        ValueClass::String
    }
}

/// Whether a value written as `class` can be loaded in format `f`.
pub fn value_matches_format(class: ValueClass, f: DataFormat) -> bool {
    if f.is_styled() {
        return class == ValueClass::Styled;
    }
    match class {
        ValueClass::Reference => true,
        ValueClass::Styled => false,
        ValueClass::Bool => f == DataFormat::Bool,
        ValueClass::Int => f == DataFormat::Int,
        ValueClass::Float => f == DataFormat::Float,
        ValueClass::Dimension => f == DataFormat::Dimension,
        ValueClass::String => f == DataFormat::String,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Filter {
    #[serde(rename = "F_v")]
    Version,
    #[serde(rename = "F_lib")]
    Library,
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Filter::Version => "F_v",
            Filter::Library => "F_lib",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub rule: DetectionRule,
    pub file: String,
    pub line: u32,
    pub tag: String,
    pub attribute: String,
    pub value: String,
    pub filtered_by: Vec<Filter>,
}

/// Every (element, attribute) that a rule applies to, before filtering.
pub fn match_rules(bundle: &AppBundle, rules: &[DetectionRule]) -> Vec<Warning> {
    let mut out = Vec::new();
    for file in &bundle.resources {
        for el in &file.elements {
            for a in el.attributes.iter().filter(|a| a.is_platform()) {
                let attribute = format!("android:{}", a.name);
                for r in rules {
                    if r.attribute != attribute || r.tag != el.tag {
                        continue;
                    }
                    if r.kind == RuleKind::FormatChange {
                        let Some(f) = r.format else { continue };
                        if !value_matches_format(classify_value_format(&a.value), f) {
                            continue;
                        }
                    }
                    out.push(Warning {
                        rule: r.clone(),
                        file: file.path.clone(),
                        line: a.line,
                        tag: el.tag.clone(),
                        attribute: attribute.clone(),
                        value: a.value.clone(),
                        filtered_by: Vec::new(),
                    });
                }
            }
        }
    }
    sort_warnings(&mut out);
    out
}

fn sort_warnings(ws: &mut [Warning]) {
    ws.sort_by(|a, b| {
        (&a.file, a.line, &a.attribute, a.rule.id()).cmp(&(&b.file, b.line, &b.attribute, b.rule.id()))
    });
}

/// Whether the copy of a resource at `file` is the one the platform picks at `level`.
pub fn usable_at(bundle: &AppBundle, file: &ResourceFile, level: u32) -> bool {
    let k = file.qualifier_level;
    if level < k.max(bundle.manifest.min_sdk) {
        return false;
    }
    !bundle.resources.iter().any(|o| {
        o.family == file.family
            && o.logical_name == file.logical_name
            && o.qualifier_level > k
            && o.qualifier_level <= level
    })
}

/// True when the warning should be dropped: its file is not used at both rule levels.
pub fn filter_v(bundle: &AppBundle, w: &Warning) -> bool {
    let Some(file) = bundle.resources.iter().find(|r| r.path == w.file) else {
        return false;
    };
    !(usable_at(bundle, file, w.rule.levels[0]) && usable_at(bundle, file, w.rule.levels[1]))
}

/// True when the file is handled by a compatibility library instead of the platform.
pub fn filter_lib(bundle: &AppBundle, w: &Warning, lib_prefixes: &[String]) -> bool {
    let Some(file) = bundle.resources.iter().find(|r| r.path == w.file) else {
        return false;
    };
    let all_library_tags = !file.elements.is_empty()
        && file.elements.iter().all(|e| lib_prefixes.iter().any(|p| e.tag.starts_with(p.as_str())));
    let root_non_platform = file
        .elements
        .first()
        .is_some_and(|root| !root.attributes.is_empty() && root.attributes.iter().all(|a| !a.is_platform()));
    all_library_tags || root_non_platform
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOptions {
    pub filter_v: bool,
    pub filter_lib: bool,
    pub lib_prefixes: Vec<String>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            filter_v: true,
            filter_lib: true,
            lib_prefixes: DEFAULT_LIB_PREFIXES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    /// All matches (D), each marked with the filters that drop it.
    pub warnings: Vec<Warning>,
    pub removed_by_v: usize,
    /// Removed by F_lib among those F_v kept.
    pub removed_by_lib: usize,
    pub skipped: Vec<(String, String)>,
}

impl ScanReport {
    pub fn detected(&self) -> usize {
        self.warnings.len()
    }

    pub fn surviving(&self) -> impl Iterator<Item = &Warning> {
        self.warnings.iter().filter(|w| w.filtered_by.is_empty())
    }

    pub fn final_count(&self) -> usize {
        self.surviving().count()
    }

    pub fn summary(&self) -> String {
        format!(
            "D={} F_v={} F_lib={} final={}",
            self.detected(),
            self.removed_by_v,
            self.removed_by_lib,
            self.final_count()
        )
    }

    /// One JSON record per warning, in report order.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            file: &'a str,
            line: u32,
            tag: &'a str,
            attribute: &'a str,
            value: &'a str,
            rule: String,
            filtered_by: &'a [Filter],
        }
        let mut s = String::new();
        for w in &self.warnings {
            let r = Record {
                file: &w.file,
                line: w.line,
                tag: &w.tag,
                attribute: &w.attribute,
                value: &w.value,
                rule: w.rule.id(),
                filtered_by: &w.filtered_by,
            };
            s.push_str(&serde_json::to_string(&r).expect("records serialize"));
            s.push('\n');
        }
        s
    }
}

pub fn scan(bundle: &AppBundle, rules: &[DetectionRule], opts: &ScanOptions) -> ScanReport {
    let mut warnings = match_rules(bundle, rules);
    let (mut removed_by_v, mut removed_by_lib) = (0, 0);
    for w in &mut warnings {
        if opts.filter_v && filter_v(bundle, w) {
            w.filtered_by.push(Filter::Version);
            removed_by_v += 1;
        }
        if opts.filter_lib && filter_lib(bundle, w, &opts.lib_prefixes) {
            if w.filtered_by.is_empty() {
                removed_by_lib += 1;
            }
            w.filtered_by.push(Filter::Library);
        }
    }
    ScanReport { warnings, removed_by_v, removed_by_lib, skipped: bundle.skipped.clone() }
}
