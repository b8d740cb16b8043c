//! Detection rules from the differences between adjacent API levels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::DataFormat;
use crate::refine::ConfigConstraint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    LoadingChange,
    FormatChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Introduced,
    Removed,
}

/// Field order here is the on-disk field order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectionRule {
    pub kind: RuleKind,
    pub attribute: String,
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<DataFormat>,
    pub levels: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

impl DetectionRule {
    fn sort_key(&self) -> ([u32; 2], &str, &str, RuleKind, Option<DataFormat>) {
        (self.levels, &self.attribute, &self.tag, self.kind, self.format)
    }

    /// Short stable identifier used in scan reports.
    pub fn id(&self) -> String {
        let kind = match self.kind {
            RuleKind::LoadingChange => "loading_change",
            RuleKind::FormatChange => "format_change",
        };
        let mut s = format!("{kind}:{}:{}", self.attribute, self.tag);
        if let Some(f) = self.format {
            s.push(':');
            s.push_str(f.name());
        }
        s.push_str(&format!(":{}-{}", self.levels[0], self.levels[1]));
        s
    }
}

impl fmt::Display for DetectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Error)]
pub enum RuleFileError {
    #[error("line {line}: {source}")]
    Record { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

type FormatsByPair = BTreeMap<(String, String), BTreeSet<DataFormat>>;

fn group(cs: &[ConfigConstraint]) -> FormatsByPair {
    let mut m = FormatsByPair::new();
    for c in cs {
        m.entry((c.attribute.clone(), c.xml_tag.clone())).or_default().insert(c.format);
    }
    m
}

/// Rules for one adjacent pair of levels `l1 < l2`.
pub fn diff_levels(l1: u32, old: &[ConfigConstraint], l2: u32, new: &[ConfigConstraint]) -> Vec<DetectionRule> {
    let (a, b) = (group(old), group(new));
    let keys: BTreeSet<&(String, String)> = a.keys().chain(b.keys()).collect();
    let mut out = Vec::new();
    for key in keys {
        let (attribute, tag) = key.clone();
        match (a.get(key), b.get(key)) {
            (Some(_), None) | (None, Some(_)) => out.push(DetectionRule {
                kind: RuleKind::LoadingChange,
                attribute,
                tag,
                format: None,
                levels: [l1, l2],
                direction: Some(if b.contains_key(key) { Direction::Introduced } else { Direction::Removed }),
            }),
            (Some(fa), Some(fb)) => {
                for f in fa.symmetric_difference(fb) {
                    out.push(DetectionRule {
                        kind: RuleKind::FormatChange,
                        attribute: attribute.clone(),
                        tag: tag.clone(),
                        format: Some(*f),
                        levels: [l1, l2],
                        direction: None,
                    });
                }
            }
            (None, None) => unreachable!("key drawn from one of the maps"),
        }
    }
    out
}

/// Diffs every adjacent pair of levels; rules sorted by (levels, attribute, tag, kind, format).
pub fn generate_rules(by_level: &BTreeMap<u32, Vec<ConfigConstraint>>) -> Vec<DetectionRule> {
    let levels: Vec<(&u32, &Vec<ConfigConstraint>)> = by_level.iter().collect();
    let mut out: Vec<DetectionRule> = levels
        .windows(2)
        .flat_map(|w| diff_levels(*w[0].0, w[0].1, *w[1].0, w[1].1))
        .collect();
    out.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
    out
}

/// One JSON object per line.
pub fn write_rules(rules: &[DetectionRule]) -> String {
    let mut s = String::new();
    for r in rules {
        s.push_str(&serde_json::to_string(r).expect("rules serialize"));
        s.push('\n');
    }
    s
}

pub fn read_rules(text: &str) -> Result<Vec<DetectionRule>, RuleFileError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let r: DetectionRule = serde_json::from_str(raw).map_err(|source| RuleFileError::Record { line, source })?;
        let invalid = |message: &str| RuleFileError::Invalid { line, message: message.to_string() };
        if r.levels[0] >= r.levels[1] {
            return Err(invalid("levels must be increasing"));
        }
        match r.kind {
            RuleKind::FormatChange if r.format.is_none() || r.direction.is_some() => {
                return Err(invalid("format_change needs a format and no direction"))
            }
            RuleKind::LoadingChange if r.format.is_some() || r.direction.is_none() => {
                return Err(invalid("loading_change needs a direction and no format"))
            }
            _ => {}
        }
        out.push(r);
    }
    Ok(out)
}
