//! Deterministic in-process providers for tests and offline use.
//!
//! `oracle` answers with the extract-method transform. The corrupting
//! behaviors start from the oracle answer and then damage it the way a
//! hallucinating model would.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::extract::{extract_method, Target};
use super::prompt::{parse_target, section, SECTION_LANGUAGE, SECTION_SOURCE};
use super::provider::{fence, Completion, Provider, ProviderError, ProviderRequest};
use crate::lang::LanguageRegistry;
use crate::model::{LineIndex, Node, NodeKind, SourceFunction};
use crate::smells::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockBehavior {
    /// Echoes the input function unchanged.
    Identity,
    /// Textbook extract-method.
    Oracle,
    /// Oracle output with one literal changed.
    MutateLiteral,
    /// Oracle output with one call to an existing function removed.
    DropCall,
    /// Oracle output with the extracted helper emptied.
    EmptyStub,
    /// Oracle output with a stray closing brace.
    BreakSyntax,
    /// Prose without a code block.
    NoCode,
    /// Every call fails at the transport level.
    Unavailable,
}

impl MockBehavior {
    pub const CORRUPTING: [MockBehavior; 4] =
        [MockBehavior::MutateLiteral, MockBehavior::DropCall, MockBehavior::EmptyStub, MockBehavior::BreakSyntax];

    fn as_str(self) -> &'static str {
        match self {
            MockBehavior::Identity => "identity",
            MockBehavior::Oracle => "oracle",
            MockBehavior::MutateLiteral => "mutate-literal",
            MockBehavior::DropCall => "drop-call",
            MockBehavior::EmptyStub => "empty-stub",
            MockBehavior::BreakSyntax => "break-syntax",
            MockBehavior::NoCode => "no-code",
            MockBehavior::Unavailable => "unavailable",
        }
    }
}

impl fmt::Display for MockBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MockBehavior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown mock behavior '{s}'"))
    }
}

/// Oracle answers keyed by prompt hash; shareable between providers so
/// that corrupting mocks do not repeat the search.
#[derive(Debug, Default, Clone)]
pub struct OracleCache(Arc<Mutex<HashMap<String, Option<String>>>>);

pub struct MockProvider {
    id: String,
    behavior: MockBehavior,
    registry: LanguageRegistry,
    thresholds: Thresholds,
    cache: OracleCache,
}

impl MockProvider {
    pub fn new(id: impl Into<String>, behavior: MockBehavior, registry: LanguageRegistry, thresholds: Thresholds) -> Self {
        Self { id: id.into(), behavior, registry, thresholds, cache: OracleCache::default() }
    }

    pub fn with_cache(mut self, cache: OracleCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn behavior(&self) -> MockBehavior {
        self.behavior
    }

    fn oracle(&self, request: &ProviderRequest, language: &str, source: &str) -> Option<String> {
        let key = request.prompt_sha256();
        // Holding the lock serializes concurrent pool calls for one prompt,
        // so the search runs once.
        let mut cache = self.cache.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(hit) = cache.get(&key) {
            return hit.clone();
        }
        let answer = (|| {
            let (kind, start, _) = parse_target(&request.prompt_sections)?;
            let adapter = self.registry.adapter(language).ok()?;
            extract_method(source, adapter.as_ref(), &Target { kind, start }, &self.thresholds)
        })();
        cache.insert(key, answer.clone());
        answer
    }

    fn parse(&self, language: &str, text: &str) -> Option<Vec<SourceFunction>> {
        self.registry.parse_unit(text, language).ok()
    }
}

impl Provider for MockProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError> {
        let missing = |name: &str| ProviderError::BadResponse(format!("prompt has no {name} section"));
        let language = section(&request.prompt_sections, SECTION_LANGUAGE)
            .and_then(|l| l.lines().next())
            .ok_or_else(|| missing(SECTION_LANGUAGE))?
            .trim()
            .to_string();
        let source = section(&request.prompt_sections, SECTION_SOURCE).ok_or_else(|| missing(SECTION_SOURCE))?;
        let response_id = format!("mock-{}-{}", self.behavior, &request.prompt_sha256()[..12]);

        let code = match self.behavior {
            MockBehavior::Unavailable => return Err(ProviderError::Transport("mock provider is unavailable".into())),
            MockBehavior::NoCode => {
                return Ok(Completion { text: "I could not find anything to improve.".into(), response_id })
            }
            MockBehavior::Identity => source.to_string(),
            behavior => {
                let refactored = self.oracle(request, &language, source).unwrap_or_else(|| source.to_string());
                match behavior {
                    MockBehavior::Oracle => refactored,
                    MockBehavior::MutateLiteral => self.mutate_literal(&language, &refactored),
                    MockBehavior::DropCall => self.drop_call(&language, &refactored),
                    MockBehavior::EmptyStub => self.empty_stub(&language, &refactored),
                    _ => format!("{}\n}}\n", refactored.trim_end()),
                }
            }
        };
        Ok(Completion { text: fence(&language, &code), response_id })
    }
}

fn replace(text: &str, node: &Node, with: &str) -> String {
    let range = LineIndex::new(text).range(&node.span);
    format!("{}{}{}", &text[..range.start], with, &text[range.end..])
}

/// First call to a name outside `skip` (or to any name when `skip` is
/// empty), with the statement it forms on its own, if any.
fn first_call<'a>(node: &'a Node, skip: &[&str], parent_stmt: Option<&'a Node>) -> Option<(&'a Node, Option<&'a Node>)> {
    if node.kind == NodeKind::Call {
        let callee = &node.children[0];
        let helper = callee.kind == NodeKind::Identifier && skip.contains(&callee.text());
        if !helper {
            return Some((node, parent_stmt));
        }
    }
    let stmt = (node.kind == NodeKind::ExprStmt).then_some(node);
    node.children.iter().find_map(|c| first_call(c, skip, stmt.filter(|s| std::ptr::eq(&s.children[0], c))))
}

impl MockProvider {
    fn mutate_literal(&self, language: &str, text: &str) -> String {
        let Some(functions) = self.parse(language, text) else { return text.to_string() };
        let Some(lit) = functions.iter().flat_map(|f| f.body.walk()).find(|n| n.kind == NodeKind::Literal) else {
            return text.to_string();
        };
        let raw = lit.text();
        let mutated = match raw.parse::<f64>() {
            Ok(v) => format!("{}", v + 1.0),
            Err(_) => format!("{}_x{}", &raw[..raw.len() - 1], &raw[raw.len() - 1..]),
        };
        replace(text, lit, &mutated)
    }

    fn drop_call(&self, language: &str, text: &str) -> String {
        let Some(functions) = self.parse(language, text) else { return text.to_string() };
        let helpers: Vec<&str> = functions.iter().skip(1).map(|f| f.name.as_str()).collect();
        let found = functions
            .iter()
            .find_map(|f| first_call(f.block(), &helpers, None))
            .or_else(|| functions.first().and_then(|f| first_call(f.block(), &[], None)));
        match found {
            Some((_, Some(stmt))) => replace(text, stmt, ""),
            Some((call, None)) => match call.children.get(1) {
                Some(arg) => {
                    let range = LineIndex::new(text).range(&arg.span);
                    let arg_text = text[range].to_string();
                    replace(text, call, &format!("({arg_text})"))
                }
                None => replace(text, call, "0"),
            },
            None => text.to_string(),
        }
    }

    fn empty_stub(&self, language: &str, text: &str) -> String {
        let Some(functions) = self.parse(language, text) else { return text.to_string() };
        match functions.get(1) {
            Some(helper) => replace(text, helper.block(), "{\n    return;\n}"),
            None => text.to_string(),
        }
    }
}
