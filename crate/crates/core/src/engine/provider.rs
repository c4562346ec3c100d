//! The completion-backend seam.

use serde::{Deserialize, Serialize};

use super::prompt::prompt_sha256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub prompt_sections: Vec<(String, String)>,
    pub temperature: f64,
    pub max_output_size: usize,
}

impl ProviderRequest {
    pub fn prompt_sha256(&self) -> String {
        prompt_sha256(&self.prompt_sections)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderResult {
    /// The extracted code block only.
    pub refactored_source: String,
    pub provider_id: String,
    pub latency_ms: u64,
    pub raw_response_id: String,
}

/// Raw provider output before code-block extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub response_id: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no recorded response for prompt {0}")]
    NoFixture(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
    #[error("response exceeds {0} bytes")]
    TooLarge(usize),
}

pub trait Provider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError>;
}

/// Contents of the first fenced code block. Text without any fence yields
/// an empty candidate, which the syntactic check then rejects.
pub fn extract_code_block(text: &str) -> String {
    let mut lines = text.lines();
    for line in lines.by_ref() {
        if line.trim_start().starts_with("```") {
            break;
        }
    }
    let mut block = Vec::new();
    let mut closed = false;
    for line in lines {
        if line.trim_start().starts_with("```") {
            closed = true;
            break;
        }
        block.push(line);
    }
    if !closed {
        return String::new();
    }
    let mut out = block.join("\n");
    out.push('\n');
    out
}

/// Wraps code in a fenced block tagged with `language`.
pub fn fence(language: &str, code: &str) -> String {
    format!("```{language}\n{}\n```\n", code.trim_end())
}
