//! Bundled scenario fixtures and the structured-entity recall corpus.

use crate::scenario::{ScenarioSpec, TurnSpec};

fn parse(doc: &str) -> ScenarioSpec {
    serde_json::from_str(doc).expect("bundled fixture parses")
}

/// Healthcare: gradual disclosure, cliff at turn 4.
pub fn s1() -> ScenarioSpec {
    parse(include_str!("../fixtures/s1_healthcare.json"))
}

/// HR/hiring: fast accumulation, triggers at turn 2.
pub fn s2() -> ScenarioSpec {
    parse(include_str!("../fixtures/s2_hiring.json"))
}

/// Finance: early trigger plus hard-blocked account and SSN disclosures.
pub fn s3() -> ScenarioSpec {
    parse(include_str!("../fixtures/s3_finance.json"))
}

/// General chat: slow quasi-identifier accumulation over ten turns.
pub fn s4() -> ScenarioSpec {
    parse(include_str!("../fixtures/s4_general.json"))
}

pub fn all() -> Vec<ScenarioSpec> {
    vec![s1(), s2(), s3(), s4()]
}

/// Labeled single-message examples for extractor recall: at least ten per
/// structured type, plus gazetteer smoke examples.
pub fn structured_corpus() -> Vec<TurnSpec> {
    serde_json::from_str(include_str!("../fixtures/corpus_structured.json"))
        .expect("bundled corpus parses")
}
