//! Data formats a configuration API can load.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Int,
    Bool,
    Float,
    String,
    Dimension,
    StyledInt,
    StyledBool,
    StyledFloat,
    StyledString,
    StyledDimension,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown data format `{0}`")]
pub struct UnknownFormat(pub String);

impl DataFormat {
    pub const ALL: [DataFormat; 10] = [
        DataFormat::Int,
        DataFormat::Bool,
        DataFormat::Float,
        DataFormat::String,
        DataFormat::Dimension,
        DataFormat::StyledInt,
        DataFormat::StyledBool,
        DataFormat::StyledFloat,
        DataFormat::StyledString,
        DataFormat::StyledDimension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataFormat::Int => "int",
            DataFormat::Bool => "bool",
            DataFormat::Float => "float",
            DataFormat::String => "string",
            DataFormat::Dimension => "dimension",
            DataFormat::StyledInt => "styled_int",
            DataFormat::StyledBool => "styled_bool",
            DataFormat::StyledFloat => "styled_float",
            DataFormat::StyledString => "styled_string",
            DataFormat::StyledDimension => "styled_dimension",
        }
    }

    pub fn is_styled(self) -> bool {
        matches!(
            self,
            DataFormat::StyledInt
                | DataFormat::StyledBool
                | DataFormat::StyledFloat
                | DataFormat::StyledString
                | DataFormat::StyledDimension
        )
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFormat(s.to_string()))
    }
}
