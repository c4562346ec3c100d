//! CodeHealth: a 1.0–10.0 score derived from detected smells.
//!
//! Each smell deducts its kind's weight; repeated smells of one kind are
//! discounted geometrically (the i-th costs `weight · 0.5^(i-1)`). The only
//! properties the rest of the system relies on are the range, monotone
//! decrease in smells, and 10.0 exactly for smell-free code.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::smells::{CodeSmell, SmellKind};

pub const MAX_SCORE: f64 = 10.0;
pub const MIN_SCORE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HealthWeights {
    #[serde(rename = "ComplexMethod")]
    pub complex_method: f64,
    #[serde(rename = "BumpyRoad")]
    pub bumpy_road: f64,
    #[serde(rename = "DeepNestedLogic")]
    pub deep_nested_logic: f64,
    #[serde(rename = "ComplexConditional")]
    pub complex_conditional: f64,
    #[serde(rename = "LargeMethod")]
    pub large_method: f64,
}

impl Default for HealthWeights {
    fn default() -> Self {
        Self {
            complex_method: 1.5,
            bumpy_road: 1.2,
            deep_nested_logic: 1.0,
            complex_conditional: 0.8,
            large_method: 0.6,
        }
    }
}

impl HealthWeights {
    pub fn weight(&self, kind: SmellKind) -> f64 {
        match kind {
            SmellKind::ComplexMethod => self.complex_method,
            SmellKind::BumpyRoad => self.bumpy_road,
            SmellKind::DeepNestedLogic => self.deep_nested_logic,
            SmellKind::ComplexConditional => self.complex_conditional,
            SmellKind::LargeMethod => self.large_method,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for kind in SmellKind::ALL {
            let w = self.weight(kind);
            if !(w.is_finite() && w > 0.0) {
                return Err(format!("health weight for {kind} must be a positive number"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Function,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeHealthScore {
    pub value: f64,
    pub deductions: Vec<(SmellKind, f64)>,
    pub basis: Basis,
}

impl CodeHealthScore {
    pub fn perfect(basis: Basis) -> Self {
        Self { value: MAX_SCORE, deductions: Vec::new(), basis }
    }
}

pub fn score_function(smells: &[CodeSmell], weights: &HealthWeights) -> CodeHealthScore {
    let mut ordered: Vec<&CodeSmell> = smells.iter().collect();
    ordered.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.span.start().cmp(&b.span.start())));
    let mut seen: BTreeMap<SmellKind, i32> = BTreeMap::new();
    let deductions: Vec<(SmellKind, f64)> = ordered
        .into_iter()
        .map(|s| {
            let repeat = seen.entry(s.kind).or_insert(0);
            let amount = weights.weight(s.kind) * 0.5f64.powi(*repeat);
            *repeat += 1;
            (s.kind, amount)
        })
        .collect();
    let total: f64 = deductions.iter().map(|(_, d)| d).sum();
    CodeHealthScore { value: (MAX_SCORE - total).clamp(MIN_SCORE, MAX_SCORE), deductions, basis: Basis::Function }
}

/// LoC-weighted mean of function scores; an empty file scores 10.0.
pub fn score_file<'a>(functions: impl IntoIterator<Item = (u32, &'a CodeHealthScore)>) -> CodeHealthScore {
    let mut weighted = 0.0;
    let mut total_loc = 0.0;
    let mut deductions = Vec::new();
    for (loc, score) in functions {
        weighted += f64::from(loc) * score.value;
        total_loc += f64::from(loc);
        deductions.extend(score.deductions.iter().copied());
    }
    let value = if total_loc == 0.0 { MAX_SCORE } else { (weighted / total_loc).clamp(MIN_SCORE, MAX_SCORE) };
    CodeHealthScore { value, deductions, basis: Basis::File }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Improved,
    Unchanged,
    Declined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthDelta {
    pub before: CodeHealthScore,
    pub after: CodeHealthScore,
    pub direction: Direction,
}

impl HealthDelta {
    pub fn change(&self) -> f64 {
        self.after.value - self.before.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot compare a {before:?} score with a {after:?} score")]
pub struct BasisMismatch {
    pub before: Basis,
    pub after: Basis,
}

pub fn health_delta(before: CodeHealthScore, after: CodeHealthScore) -> Result<HealthDelta, BasisMismatch> {
    if before.basis != after.basis {
        return Err(BasisMismatch { before: before.basis, after: after.basis });
    }
    let direction = match after.value.partial_cmp(&before.value) {
        Some(std::cmp::Ordering::Greater) => Direction::Improved,
        Some(std::cmp::Ordering::Less) => Direction::Declined,
        _ => Direction::Unchanged,
    };
    Ok(HealthDelta { before, after, direction })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::model::SourceSpan;

    fn smell(kind: SmellKind, line: u32) -> CodeSmell {
        CodeSmell {
            kind,
            function: "f".into(),
            span: SourceSpan::new("t", (line, 1), (line, 2)),
            metric_value: 1.0,
            threshold: 1.0,
        }
    }

    fn score(smells: &[CodeSmell]) -> f64 {
        score_function(smells, &HealthWeights::default()).value
    }

    fn file_score(value: f64) -> CodeHealthScore {
        CodeHealthScore { value, deductions: Vec::new(), basis: Basis::Function }
    }

    #[test]
    fn function_score_examples() {
        assert_eq!(score(&[]), 10.0);
        assert_eq!(score(&[smell(SmellKind::ComplexMethod, 1)]), 8.5);
        let mixed = [
            smell(SmellKind::ComplexConditional, 3),
            smell(SmellKind::LargeMethod, 1),
            smell(SmellKind::ComplexConditional, 5),
        ];
        assert!((score(&mixed) - 8.2).abs() < 1e-12);
        let s = score_function(&mixed, &HealthWeights::default());
        assert_eq!(s.deductions[1], (SmellKind::ComplexConditional, 0.4));
    }

    #[test]
    fn clamps_at_one() {
        let many: Vec<_> = SmellKind::ALL.iter().flat_map(|k| (0..4).map(|i| smell(*k, i + 1))).collect();
        let heavy = HealthWeights { complex_method: 9.0, ..HealthWeights::default() };
        assert_eq!(score_function(&many, &heavy).value, 1.0);
    }

    #[test]
    fn file_score_examples() {
        assert_eq!(score_file(std::iter::empty()).value, 10.0);
        let (a, b) = (file_score(10.0), file_score(8.0));
        assert!((score_file([(40, &a), (40, &b)]).value - 9.0).abs() < 1e-12);
        let (c, d) = (file_score(8.0), file_score(10.0));
        assert!((score_file([(90, &c), (10, &d)]).value - 8.2).abs() < 1e-12);
    }

    #[test]
    fn delta_direction() {
        let s = |v| file_score(v);
        assert_eq!(health_delta(s(8.5), s(8.5)).unwrap().direction, Direction::Unchanged);
        assert_eq!(health_delta(s(8.5), s(10.0)).unwrap().direction, Direction::Improved);
        assert_eq!(health_delta(s(10.0), s(8.2)).unwrap().direction, Direction::Declined);
        let file = CodeHealthScore::perfect(Basis::File);
        assert!(health_delta(s(1.0), file).is_err());
    }

    fn kind() -> impl Strategy<Value = SmellKind> {
        (0usize..5).prop_map(|i| SmellKind::ALL[i])
    }

    proptest! {
        #[test]
        fn range_and_monotonicity(kinds in prop::collection::vec((kind(), 1u32..50), 0..20), extra in (kind(), 1u32..50)) {
            let base: Vec<_> = kinds.iter().map(|(k, l)| smell(*k, *l)).collect();
            let before = score(&base);
            prop_assert!((MIN_SCORE..=MAX_SCORE).contains(&before));
            prop_assert_eq!(before == MAX_SCORE, base.is_empty());
            let mut more = base.clone();
            more.push(smell(extra.0, extra.1));
            let after = score(&more);
            prop_assert!(after < before || before == MIN_SCORE);
        }
    }
}
