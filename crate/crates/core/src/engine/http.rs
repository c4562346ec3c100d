//! Generic chat-completion provider over HTTP.

use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::{json, Value};

use super::prompt::{render_sections, section, SECTION_CONSTRAINTS};
use super::provider::{Completion, Provider, ProviderError, ProviderRequest};

const SYSTEM_PREAMBLE: &str = "You are a careful refactoring assistant. You change the structure of code without \
changing its behavior.";

pub struct HttpProvider {
    id: String,
    endpoint: String,
    model: String,
    headers: BTreeMap<String, String>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(
        id: impl Into<String>,
        endpoint: impl Into<String>,
        model: impl Into<String>,
        headers: BTreeMap<String, String>,
        timeout: Duration,
    ) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(Self { id: id.into(), endpoint: endpoint.into(), model: model.into(), headers, client })
    }

    pub fn body(&self, request: &ProviderRequest) -> Value {
        let mut system = SYSTEM_PREAMBLE.to_string();
        if let Some(c) = section(&request.prompt_sections, SECTION_CONSTRAINTS) {
            system.push(' ');
            system.push_str(c);
        }
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": render_sections(&request.prompt_sections)},
            ],
            "temperature": request.temperature,
        })
    }
}

/// Message text from the common chat-completion response layouts.
pub fn response_content(body: &Value) -> Option<String> {
    let content = body
        .pointer("/choices/0/message/content")
        .or_else(|| body.pointer("/message/content"))
        .or_else(|| body.get("content"))?;
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => {
            let text: Vec<&str> = parts.iter().filter_map(|p| p.get("text").and_then(Value::as_str)).collect();
            (!text.is_empty()).then(|| text.join(""))
        }
        _ => None,
    }
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError> {
        let mut call = self.client.post(&self.endpoint).json(&self.body(request));
        for (k, v) in &self.headers {
            call = call.header(k, v);
        }
        let response = call.send().map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(ProviderError::Transport(format!("endpoint answered {status}")));
        }
        let bytes = response.bytes().map_err(|e| ProviderError::Transport(e.to_string()))?;
        if bytes.len() > request.max_output_size {
            return Err(ProviderError::TooLarge(request.max_output_size));
        }
        let body: Value = serde_json::from_slice(&bytes).map_err(|e| ProviderError::BadResponse(e.to_string()))?;
        let text = response_content(&body).ok_or_else(|| ProviderError::BadResponse("no message content".into()))?;
        let response_id = body.get("id").and_then(Value::as_str).unwrap_or("http").to_string();
        Ok(Completion { text, response_id })
    }
}
