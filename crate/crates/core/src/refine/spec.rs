use std::collections::BTreeMap;

use thiserror::Error;

use crate::format::DataFormat;

const BUILTIN: &str = include_str!("../../data/config_apis.txt");

/// Configuration API name to the formats it loads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigApiSpec {
    apis: BTreeMap<String, Vec<DataFormat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}: expected `api-name: format, ...`")]
    Syntax { line: usize },
    #[error("line {line}: unknown data format `{name}`")]
    UnknownFormat { line: usize, name: String },
    #[error("line {line}: `{api}` listed twice")]
    Duplicate { line: usize, api: String },
}

impl ConfigApiSpec {
    /// The table shipped with the tool.
    pub fn builtin() -> ConfigApiSpec {
        ConfigApiSpec::parse(BUILTIN).expect("bundled api table is well-formed")
    }

    /// One API per line, `name: fmt1, fmt2`. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<ConfigApiSpec, SpecError> {
        let mut apis = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (api, rest) = content.split_once(':').ok_or(SpecError::Syntax { line })?;
            let api = api.trim();
            if api.is_empty() || api.contains(char::is_whitespace) {
                return Err(SpecError::Syntax { line });
            }
            let mut formats = Vec::new();
            for name in rest.split(',').map(str::trim) {
                let f: DataFormat = name
                    .parse()
                    .map_err(|_| SpecError::UnknownFormat { line, name: name.to_string() })?;
                if !formats.contains(&f) {
                    formats.push(f);
                }
            }
            formats.sort();
            if apis.insert(api.to_string(), formats).is_some() {
                return Err(SpecError::Duplicate { line, api: api.to_string() });
            }
        }
        Ok(ConfigApiSpec { apis })
    }

    pub fn formats(&self, api: &str) -> Option<&[DataFormat]> {
        self.apis.get(api).map(Vec::as_slice)
    }

    pub fn apis(&self) -> impl Iterator<Item = &str> {
        self.apis.keys().map(String::as_str)
    }
}
