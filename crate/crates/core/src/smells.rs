//! The five function-level code smells.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{
    branch_nodes, deepest_nesting, logical_operator_count, max_nesting_depth, nesting_depth, Node, NodeKind,
    SourceFunction, SourceSpan,
};

/// Smell categories, declared from most to least severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SmellKind {
    ComplexMethod,
    BumpyRoad,
    DeepNestedLogic,
    ComplexConditional,
    LargeMethod,
}

impl SmellKind {
    pub const ALL: [SmellKind; 5] = [
        SmellKind::ComplexMethod,
        SmellKind::BumpyRoad,
        SmellKind::DeepNestedLogic,
        SmellKind::ComplexConditional,
        SmellKind::LargeMethod,
    ];

    /// 1 is the most severe.
    pub fn severity_rank(self) -> u8 {
        match self {
            SmellKind::ComplexMethod => 1,
            SmellKind::BumpyRoad => 2,
            SmellKind::DeepNestedLogic => 3,
            SmellKind::ComplexConditional => 4,
            SmellKind::LargeMethod => 5,
        }
    }

    /// Strictly less severe than `other`.
    pub fn less_severe_than(self, other: SmellKind) -> bool {
        self.severity_rank() > other.severity_rank()
    }

    pub fn display_name(self) -> &'static str {
        match self {
            SmellKind::ComplexMethod => "Complex Method",
            SmellKind::BumpyRoad => "Bumpy Road",
            SmellKind::DeepNestedLogic => "Deep Nested Logic",
            SmellKind::ComplexConditional => "Complex Conditional",
            SmellKind::LargeMethod => "Large Method",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SmellKind::ComplexMethod => "ComplexMethod",
            SmellKind::BumpyRoad => "BumpyRoad",
            SmellKind::DeepNestedLogic => "DeepNestedLogic",
            SmellKind::ComplexConditional => "ComplexConditional",
            SmellKind::LargeMethod => "LargeMethod",
        }
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown smell kind '{0}'")]
pub struct UnknownSmell(pub String);

impl FromStr for SmellKind {
    type Err = UnknownSmell;

    /// Accepts `ComplexMethod`, `complex-method` and `complex_method`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
        SmellKind::ALL
            .into_iter()
            .find(|k| k.as_str().to_lowercase() == folded)
            .ok_or_else(|| UnknownSmell(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSmell {
    pub kind: SmellKind,
    pub function: String,
    pub span: SourceSpan,
    pub metric_value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub complex_conditional_min_ops: u32,
    pub complex_method_min_cc: u32,
    pub deep_nesting_min_depth: u32,
    pub bumpy_road_min_bumps: u32,
    /// Nesting depth a top-level statement must reach to count as a bump.
    pub bumpy_road_bump_depth: u32,
    pub large_method_min_loc: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            complex_conditional_min_ops: 2,
            complex_method_min_cc: 10,
            deep_nesting_min_depth: 4,
            bumpy_road_min_bumps: 2,
            bumpy_road_bump_depth: 2,
            large_method_min_loc: 70,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("complex_conditional_min_ops", self.complex_conditional_min_ops),
            ("complex_method_min_cc", self.complex_method_min_cc),
            ("deep_nesting_min_depth", self.deep_nesting_min_depth),
            ("bumpy_road_min_bumps", self.bumpy_road_min_bumps),
            ("bumpy_road_bump_depth", self.bumpy_road_bump_depth),
            ("large_method_min_loc", self.large_method_min_loc),
        ];
        match all.iter().find(|(_, v)| *v < 1) {
            Some((name, _)) => Err(format!("threshold {name} must be at least 1")),
            None => Ok(()),
        }
    }

    pub fn for_kind(&self, kind: SmellKind) -> u32 {
        match kind {
            SmellKind::ComplexMethod => self.complex_method_min_cc,
            SmellKind::BumpyRoad => self.bumpy_road_min_bumps,
            SmellKind::DeepNestedLogic => self.deep_nesting_min_depth,
            SmellKind::ComplexConditional => self.complex_conditional_min_ops,
            SmellKind::LargeMethod => self.large_method_min_loc,
        }
    }
}

/// McCabe complexity: one plus the number of branch nodes.
pub fn cyclomatic_complexity(function: &SourceFunction) -> u32 {
    1 + branch_nodes(function).len() as u32
}

/// Every condition the Complex Conditional smell inspects: the tests of
/// If/While/For and of `?:` expressions, in source order.
pub fn conditions(function: &SourceFunction) -> Vec<&Node> {
    function
        .body
        .walk()
        .filter(|n| {
            matches!(n.kind, NodeKind::If | NodeKind::While | NodeKind::For | NodeKind::ConditionalExpr)
        })
        .filter_map(Node::condition)
        .collect()
}

/// Top-level statements whose subtree reaches the bump depth.
pub fn bumps<'a>(function: &'a SourceFunction, thresholds: &Thresholds) -> Vec<&'a Node> {
    function
        .block()
        .children
        .iter()
        .filter(|s| nesting_depth(s) >= thresholds.bumpy_road_bump_depth)
        .collect()
}

fn smell(kind: SmellKind, function: &SourceFunction, span: SourceSpan, value: u32, threshold: u32) -> CodeSmell {
    CodeSmell {
        kind,
        function: function.name.clone(),
        span,
        metric_value: f64::from(value),
        threshold: f64::from(threshold),
    }
}

pub fn detect_complex_conditionals(function: &SourceFunction, thresholds: &Thresholds) -> Vec<CodeSmell> {
    let min = thresholds.complex_conditional_min_ops;
    conditions(function)
        .into_iter()
        .filter_map(|c| {
            let ops = logical_operator_count(c);
            (ops >= min).then(|| smell(SmellKind::ComplexConditional, function, c.span.clone(), ops, min))
        })
        .collect()
}

pub fn detect_complex_method(function: &SourceFunction, thresholds: &Thresholds) -> Option<CodeSmell> {
    let cc = cyclomatic_complexity(function);
    let min = thresholds.complex_method_min_cc;
    (cc >= min).then(|| smell(SmellKind::ComplexMethod, function, function.span.clone(), cc, min))
}

pub fn detect_deep_nesting(function: &SourceFunction, thresholds: &Thresholds) -> Option<CodeSmell> {
    let min = thresholds.deep_nesting_min_depth;
    let (depth, deepest) = deepest_nesting(function.block());
    debug_assert_eq!(depth, max_nesting_depth(function));
    if depth < min {
        return None;
    }
    let span = deepest.map_or_else(|| function.span.clone(), |n| n.span.clone());
    Some(smell(SmellKind::DeepNestedLogic, function, span, depth, min))
}

pub fn detect_bumpy_road(function: &SourceFunction, thresholds: &Thresholds) -> Option<CodeSmell> {
    let bumps = bumps(function, thresholds);
    let min = thresholds.bumpy_road_min_bumps;
    let count = bumps.len() as u32;
    if count < min {
        return None;
    }
    let (first, last) = (bumps.first()?, bumps.last()?);
    Some(smell(SmellKind::BumpyRoad, function, first.span.cover(&last.span), count, min))
}

pub fn detect_large_method(function: &SourceFunction, thresholds: &Thresholds) -> Option<CodeSmell> {
    let min = thresholds.large_method_min_loc;
    (function.loc >= min).then(|| smell(SmellKind::LargeMethod, function, function.span.clone(), function.loc, min))
}

/// All smells of one function, ordered by severity then position.
pub fn detect_all(function: &SourceFunction, thresholds: &Thresholds) -> Vec<CodeSmell> {
    let mut smells = detect_complex_conditionals(function, thresholds);
    smells.extend(detect_complex_method(function, thresholds));
    smells.extend(detect_bumpy_road(function, thresholds));
    smells.extend(detect_deep_nesting(function, thresholds));
    smells.extend(detect_large_method(function, thresholds));
    smells.sort_by(|a, b| {
        a.kind.severity_rank().cmp(&b.kind.severity_rank()).then_with(|| a.span.start().cmp(&b.span.start()))
    });
    smells
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;
    use crate::lang::parser::parse_unit;

    fn one(src: &str) -> SourceFunction {
        parse_unit(src, Path::new("t.mini")).unwrap().remove(0)
    }

    fn t() -> Thresholds {
        Thresholds::default()
    }

    #[test]
    fn severity_order_is_strict() {
        for (i, a) in SmellKind::ALL.iter().enumerate() {
            assert_eq!(a.severity_rank() as usize, i + 1);
            for b in &SmellKind::ALL[i + 1..] {
                assert!(b.less_severe_than(*a));
                assert!(!a.less_severe_than(*b));
            }
        }
    }

    #[test]
    fn parses_smell_names() {
        assert_eq!("ComplexMethod".parse::<SmellKind>().unwrap(), SmellKind::ComplexMethod);
        assert_eq!("bumpy-road".parse::<SmellKind>().unwrap(), SmellKind::BumpyRoad);
        assert_eq!("deep_nested_logic".parse::<SmellKind>().unwrap(), SmellKind::DeepNestedLogic);
        assert!("spaghetti".parse::<SmellKind>().is_err());
    }

    #[test]
    fn cyclomatic_examples() {
        assert_eq!(cyclomatic_complexity(&one("function f() { x = 1; }")), 1);
        assert_eq!(cyclomatic_complexity(&one("function f() { if (a) { } while (b) { } }")), 3);
        let f = one("function f(a) { switch (a) { case 1: x(); case 2: y(); case 3: z(); default: w(); } }");
        assert_eq!(cyclomatic_complexity(&f), 4);
    }

    #[test]
    fn bumpy_road_examples() {
        assert!(detect_bumpy_road(&one("function f() { x = 1; }"), &t()).is_none());

        let f = one("function f() {\n if(a){ if(b){x=1;} }\n y=2;\n if(c){ while(d){y=3;} }\n}");
        let s = detect_bumpy_road(&f, &t()).unwrap();
        assert_eq!(s.metric_value, 2.0);
        assert_eq!((s.span.start_line, s.span.end_line), (2, 4));

        let f = one("function f() { if(a){ if(b){ if(c){x=1;} } } }");
        assert!(detect_bumpy_road(&f, &t()).is_none());
    }

    #[test]
    fn detect_all_examples() {
        assert!(detect_all(&one("function f(a){ return a; }"), &t()).is_empty());

        let smells = detect_all(&one("function f(a, b, c){ if (a && b || c) { return 1; } return 0; }"), &t());
        assert_eq!(smells.len(), 1);
        assert_eq!(smells[0].kind, SmellKind::ComplexConditional);
        assert_eq!(smells[0].metric_value, 2.0);
    }

    #[test]
    fn complex_and_large_are_ordered_by_severity() {
        // 75 non-blank lines, 11 ifs → CC 12.
        let mut src = String::from("function big(a) {\n");
        for i in 0..11 {
            src.push_str(&format!("  if (a == {i}) {{ g({i}); }}\n"));
        }
        for i in 0..62 {
            src.push_str(&format!("  h({i});\n"));
        }
        src.push_str("}\n");
        let f = one(&src);
        assert_eq!(f.loc, 75);
        let smells = detect_all(&f, &t());
        let got: Vec<_> = smells.iter().map(|s| (s.kind, s.metric_value)).collect();
        assert_eq!(got, [(SmellKind::ComplexMethod, 12.0), (SmellKind::LargeMethod, 75.0)]);
    }

    #[test]
    fn deep_nesting_points_at_innermost_construct() {
        let f = one("function f() {\n if (a) {\n  while (b) {\n   for (;;) {\n    if (c) { x(); }\n   }\n  }\n }\n}");
        let s = detect_deep_nesting(&f, &t()).unwrap();
        assert_eq!(s.metric_value, 4.0);
        assert_eq!(s.span.start_line, 5);
    }

    #[test]
    fn threshold_boundaries() {
        let cond = |ops: usize| {
            let c = vec!["a"; ops + 1].join(" && ");
            one(&format!("function f(a) {{ while ({c}) {{ }} }}"))
        };
        let th = t();
        assert!(detect_complex_conditionals(&cond(1), &th).is_empty());
        assert_eq!(detect_complex_conditionals(&cond(2), &th).len(), 1);

        let ifs = |n: usize| one(&format!("function f(a) {{ {} }}", "if (a) { } ".repeat(n)));
        assert!(detect_complex_method(&ifs(8), &th).is_none());
        assert!(detect_complex_method(&ifs(9), &th).is_some());
    }

    #[test]
    fn thresholds_validate() {
        assert!(t().validate().is_ok());
        let bad = Thresholds { deep_nesting_min_depth: 0, ..t() };
        assert!(bad.validate().unwrap_err().contains("deep_nesting_min_depth"));
    }
}
