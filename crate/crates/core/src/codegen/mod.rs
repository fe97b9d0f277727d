//! Output formats for compiled forms: C source, a raw listing of the
//! reference tensors that can be read back, and LaTeX.

mod c;
mod latex;
mod raw;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::tensor::CompiledForm;

pub use c::{count_code_lines, emit_c};
pub use latex::emit_latex;
pub use raw::{emit_raw, read_raw, RawForm, RawTerm, SExpr};

#[derive(Debug, Error, PartialEq)]
pub enum CodegenError {
    #[error("precision {0} is outside 6..=17")]
    InvalidPrecision(usize),
    #[error("unknown output format '{0}' (expected c, raw or latex)")]
    UnknownFormat(String),
    #[error("raw listing line {line}: {message}")]
    RawFormat { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitterFormat {
    CSource,
    Raw,
    Latex,
}

impl EmitterFormat {
    /// Conventional file extension.
    pub fn extension(self) -> &'static str {
        match self {
            EmitterFormat::CSource => "c",
            EmitterFormat::Raw => "raw",
            EmitterFormat::Latex => "tex",
        }
    }
}

impl FromStr for EmitterFormat {
    type Err = CodegenError;

    fn from_str(s: &str) -> Result<Self, CodegenError> {
        match s {
            "c" => Ok(EmitterFormat::CSource),
            "raw" => Ok(EmitterFormat::Raw),
            "latex" | "tex" => Ok(EmitterFormat::Latex),
            _ => Err(CodegenError::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for EmitterFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmitterFormat::CSource => "c",
            EmitterFormat::Raw => "raw",
            EmitterFormat::Latex => "latex",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmitterOptions {
    function_name: String,
    precision: usize,
}

impl Default for EmitterOptions {
    fn default() -> Self {
        EmitterOptions { function_name: "eval".into(), precision: 16 }
    }
}

impl EmitterOptions {
    pub fn with_function_name(mut self, name: &str) -> Self {
        self.function_name = name.to_string();
        self
    }

    /// Significant decimal digits of emitted constants.
    pub fn with_precision(mut self, precision: usize) -> Result<Self, CodegenError> {
        if !(6..=17).contains(&precision) {
            return Err(CodegenError::InvalidPrecision(precision));
        }
        self.precision = precision;
        Ok(self)
    }

    pub fn function_name(&self) -> &str {
        &self.function_name
    }

    pub fn precision(&self) -> usize {
        self.precision
    }
}

/// Emit `form` in the given format.
pub fn emit(form: &CompiledForm, format: EmitterFormat, options: &EmitterOptions) -> String {
    match format {
        EmitterFormat::CSource => emit_c(form, options),
        EmitterFormat::Raw => emit_raw(form, options),
        EmitterFormat::Latex => emit_latex(form, options),
    }
}

/// `printf("%.*e", precision - 1, v)`.
pub(crate) fn format_sci(v: f64, precision: usize) -> String {
    let s = format!("{:.*e}", precision - 1, v);
    let (mantissa, exponent) = s.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exponent.abs())
}
