//! Contextual provider selection.

use serde::{Deserialize, Serialize};

use crate::model::SourceFunction;
use crate::smells::{cyclomatic_complexity, CodeSmell, SmellKind};

/// Anything that can pick a provider for a (function, smell) pair.
pub trait ProviderSelector: Send + Sync {
    fn select(&self, function: &SourceFunction, smell: &CodeSmell) -> String;
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleMatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smell_kind: Option<SmellKind>,
    /// Inclusive `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loc_range: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc_range: Option<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyRule {
    #[serde(rename = "match", default)]
    pub matcher: RuleMatch,
    pub provider_id: String,
}

/// First-match rule table with a mandatory default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionPolicy {
    #[serde(default)]
    pub rules: Vec<PolicyRule>,
    pub default: String,
}

impl SelectionPolicy {
    pub fn fixed(provider_id: impl Into<String>) -> Self {
        Self { rules: Vec::new(), default: provider_id.into() }
    }

    /// Every provider id the policy can return.
    pub fn provider_ids(&self) -> impl Iterator<Item = &str> {
        self.rules.iter().map(|r| r.provider_id.as_str()).chain(std::iter::once(self.default.as_str()))
    }
}

fn in_range(range: Option<[u32; 2]>, v: u32) -> bool {
    range.is_none_or(|[lo, hi]| lo <= v && v <= hi)
}

impl RuleMatch {
    pub fn matches(&self, function: &SourceFunction, smell: &CodeSmell) -> bool {
        self.language_tag.as_ref().is_none_or(|t| *t == function.language)
            && self.smell_kind.is_none_or(|k| k == smell.kind)
            && in_range(self.loc_range, function.loc)
            && (self.cc_range.is_none() || in_range(self.cc_range, cyclomatic_complexity(function)))
    }
}

impl ProviderSelector for SelectionPolicy {
    fn select(&self, function: &SourceFunction, smell: &CodeSmell) -> String {
        self.rules
            .iter()
            .find(|r| r.matcher.matches(function, smell))
            .map_or_else(|| self.default.clone(), |r| r.provider_id.clone())
    }
}
