//! Per-file smell and CodeHealth reports.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::health::{score_file, score_function, CodeHealthScore, HealthWeights};
use crate::model::{SourceFunction, SourceUnit};
use crate::smells::{detect_all, CodeSmell, Thresholds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionReport {
    pub name: String,
    pub loc: u32,
    pub score: CodeHealthScore,
    pub smells: Vec<CodeSmell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: PathBuf,
    pub score: CodeHealthScore,
    pub functions: Vec<FunctionReport>,
}

pub fn analyze_function(function: &SourceFunction, thresholds: &Thresholds, weights: &HealthWeights) -> FunctionReport {
    let smells = detect_all(function, thresholds);
    FunctionReport {
        name: function.name.clone(),
        loc: function.loc,
        score: score_function(&smells, weights),
        smells,
    }
}

pub fn analyze_functions(functions: &[SourceFunction], thresholds: &Thresholds, weights: &HealthWeights) -> Vec<FunctionReport> {
    functions.iter().map(|f| analyze_function(f, thresholds, weights)).collect()
}

pub fn file_score(reports: &[FunctionReport]) -> CodeHealthScore {
    score_file(reports.iter().map(|r| (r.loc, &r.score)))
}

pub fn analyze_unit(unit: &SourceUnit, thresholds: &Thresholds, weights: &HealthWeights) -> FileReport {
    let functions = analyze_functions(&unit.functions, thresholds, weights);
    FileReport { path: unit.path.clone(), score: file_score(&functions), functions }
}
