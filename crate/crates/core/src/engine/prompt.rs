//! Layered prompt construction.
//!
//! A prompt is an ordered list of named sections. The order is fixed so the
//! rendered text, and therefore its SHA-256, is a pure function of the
//! function and smell being refactored.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{FunctionKind, SourceFunction, SourceSpan, SourceUnit};
use crate::smells::{CodeSmell, SmellKind};

pub const DEFAULT_MAX_FUNCTION_LOC: u32 = 130;
pub const DEFAULT_SOFT_WARNING_LOC: u32 = 70;

pub const SECTION_LANGUAGE: &str = "language";
pub const SECTION_FUNCTION_KIND: &str = "function_kind";
pub const SECTION_SMELL: &str = "smell";
pub const SECTION_LOCATION: &str = "smell_location";
pub const SECTION_CONSTRAINTS: &str = "constraints";
pub const SECTION_SOURCE: &str = "source";

pub const CONSTRAINTS: &str = "Preserve the observable behavior exactly: keep every call, every literal value and every \
returned value. Make the minimal, focused change that removes the code smell; do not rename the function, change its \
parameters or modify unrelated code. Answer with the complete refactored code, including any new helper functions, in \
a single fenced code block.";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("function '{name}' has {loc} lines of code, above the limit of {max}")]
    FunctionTooLarge { name: String, loc: u32, max: u32 },
    #[error("smell {smell} does not belong to function '{function}'")]
    ForeignSmell { smell: SmellKind, function: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub language_tag: String,
    pub language_guidance: Option<String>,
    pub function_name: String,
    pub function_source: String,
    pub function_kind: FunctionKind,
    pub smell_kind: SmellKind,
    /// Lines are relative to the first line of the function.
    pub smell_span: SourceSpan,
    pub strategy_hint: String,
    pub constraints: String,
}

pub fn strategy_hint(kind: SmellKind) -> &'static str {
    match kind {
        SmellKind::ComplexConditional => "decompose the conditional into well-named helper functions or variables",
        SmellKind::ComplexMethod | SmellKind::LargeMethod | SmellKind::BumpyRoad => {
            "apply extract method: move a cohesive group of statements into a well-named helper function \
             and call it from the original location"
        }
        SmellKind::DeepNestedLogic => {
            "flatten the nesting with guard clauses, or extract the innermost nested block into a helper function"
        }
    }
}

fn smell_description(kind: SmellKind) -> &'static str {
    match kind {
        SmellKind::ComplexMethod => "the function has too many independent paths (high cyclomatic complexity)",
        SmellKind::BumpyRoad => "the function contains several sequential chunks of nested conditional logic",
        SmellKind::DeepNestedLogic => "control structures are nested too deeply",
        SmellKind::ComplexConditional => "a condition combines too many logical operators",
        SmellKind::LargeMethod => "the function has too many lines of code",
    }
}

/// `span` with lines made relative to `origin_line` (line 1 = function start).
pub fn relative_span(span: &SourceSpan, origin_line: u32) -> SourceSpan {
    SourceSpan::new(
        "",
        (span.start_line - origin_line + 1, span.start_col),
        (span.end_line - origin_line + 1, span.end_col),
    )
}

pub fn build_prompt(
    unit: &SourceUnit,
    function: &SourceFunction,
    smell: &CodeSmell,
    max_function_loc: u32,
    language_guidance: Option<&str>,
) -> Result<PromptSpec, PromptError> {
    if smell.function != function.name || !function.span.contains(&smell.span) {
        return Err(PromptError::ForeignSmell { smell: smell.kind, function: function.name.clone() });
    }
    if function.loc > max_function_loc {
        return Err(PromptError::FunctionTooLarge {
            name: function.name.clone(),
            loc: function.loc,
            max: max_function_loc,
        });
    }
    Ok(PromptSpec {
        language_tag: function.language.clone(),
        language_guidance: language_guidance.map(str::to_string),
        function_name: function.name.clone(),
        function_source: unit.slice(&function.span).to_string(),
        function_kind: function.kind,
        smell_kind: smell.kind,
        smell_span: relative_span(&smell.span, function.span.start_line),
        strategy_hint: strategy_hint(smell.kind).to_string(),
        constraints: CONSTRAINTS.to_string(),
    })
}

impl PromptSpec {
    pub fn sections(&self) -> Vec<(String, String)> {
        let mut language = self.language_tag.clone();
        if let Some(g) = &self.language_guidance {
            language.push('\n');
            language.push_str(g);
        }
        let s = &self.smell_span;
        vec![
            (SECTION_LANGUAGE.into(), language),
            (SECTION_FUNCTION_KIND.into(), format!("{} '{}'", self.function_kind, self.function_name)),
            (
                SECTION_SMELL.into(),
                format!(
                    "{}: {}.\nStrategy: {}.",
                    self.smell_kind.as_str(),
                    smell_description(self.smell_kind),
                    self.strategy_hint
                ),
            ),
            (
                SECTION_LOCATION.into(),
                format!(
                    "{}:{}-{}:{} (line:column, lines counted from the first line of the function)",
                    s.start_line, s.start_col, s.end_line, s.end_col
                ),
            ),
            (SECTION_CONSTRAINTS.into(), self.constraints.clone()),
            (SECTION_SOURCE.into(), self.function_source.clone()),
        ]
    }

    pub fn render(&self) -> String {
        render_sections(&self.sections())
    }

    pub fn sha256(&self) -> String {
        prompt_sha256(&self.sections())
    }
}

pub fn render_sections(sections: &[(String, String)]) -> String {
    let mut out = String::new();
    for (name, text) in sections {
        out.push_str("## ");
        out.push_str(name);
        out.push('\n');
        out.push_str(text);
        out.push_str("\n\n");
    }
    out
}

pub fn prompt_sha256(sections: &[(String, String)]) -> String {
    hex::encode(Sha256::digest(render_sections(sections).as_bytes()))
}

pub fn section<'a>(sections: &'a [(String, String)], name: &str) -> Option<&'a str> {
    sections.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
}

/// Recovers the target smell kind and relative span from a prompt.
/// Line and column.
pub type Position = (u32, u32);

pub fn parse_target(sections: &[(String, String)]) -> Option<(SmellKind, Position, Position)> {
    let kind = section(sections, SECTION_SMELL)?.split(':').next()?.parse().ok()?;
    let loc = section(sections, SECTION_LOCATION)?.split_whitespace().next()?;
    let (start, end) = loc.split_once('-')?;
    let pair = |s: &str| -> Option<(u32, u32)> {
        let (l, c) = s.split_once(':')?;
        Some((l.parse().ok()?, c.parse().ok()?))
    };
    Some((kind, pair(start)?, pair(end)?))
}
