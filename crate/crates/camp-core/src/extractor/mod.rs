//! Per-turn PII detection over raw message text.
//!
//! Detection runs entirely locally through a pluggable recognizer
//! interface. The built-in set combines pattern recognizers for structured
//! types with gazetteers for name-like types; overlapping candidates are
//! resolved by span length, then entity weight, then position, then
//! recognizer registration order.

pub mod gazetteer;
pub mod luhn;
pub mod patterns;

use std::cmp::Ordering;
use std::path::Path;

use thiserror::Error;

pub use gazetteer::Gazetteer;
pub use luhn::luhn_valid;
pub use patterns::PatternRecognizer;

use crate::entities::{DetectionSpan, EntityType, SensitivityWeights};

/// Recognizer construction errors. Detection itself is infallible.
#[derive(Debug, Error)]
pub enum ExtractorError {
    #[error("invalid pattern for recognizer `{name}`: {source}")]
    BadPattern {
        name: String,
        #[source]
        source: regex::Error,
    },
    #[error("gazetteer for {0} has no phrases")]
    EmptyGazetteer(EntityType),
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A named detector emitting spans of one entity type.
pub trait Recognize: Send + Sync {
    fn name(&self) -> &str;
    fn entity_type(&self) -> EntityType;
    fn detect(&self, text: &str) -> Vec<DetectionSpan>;
}

impl Recognize for Gazetteer {
    fn name(&self) -> &str {
        "gazetteer"
    }

    fn entity_type(&self) -> EntityType {
        Gazetteer::entity_type(self)
    }

    fn detect(&self, text: &str) -> Vec<DetectionSpan> {
        Gazetteer::detect(self, text)
    }
}

/// A detection candidate before overlap resolution; `priority` is the
/// recognizer's registration index (lower wins ties).
pub struct Candidate {
    pub span: DetectionSpan,
    pub priority: usize,
}

/// Keep a maximal non-overlapping subset: longer span wins; ties broken by
/// higher entity weight, then earlier start, then recognizer order.
pub fn resolve_overlaps(
    mut candidates: Vec<Candidate>,
    weights: &SensitivityWeights,
) -> Vec<DetectionSpan> {
    candidates.sort_by(|a, b| {
        b.span
            .len()
            .cmp(&a.span.len())
            .then_with(|| {
                weights
                    .weight(b.span.entity_type)
                    .partial_cmp(&weights.weight(a.span.entity_type))
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| a.span.start.cmp(&b.span.start))
            .then_with(|| a.priority.cmp(&b.priority))
    });
    let mut kept: Vec<DetectionSpan> = Vec::new();
    for c in candidates {
        if !kept.iter().any(|k| k.overlaps(&c.span)) {
            kept.push(c.span);
        }
    }
    kept.sort_by_key(|s| (s.start, s.end));
    kept
}

/// An ordered set of recognizers with the overlap-resolution policy baked in.
pub struct RecognizerSet {
    recognizers: Vec<Box<dyn Recognize>>,
    weights: SensitivityWeights,
}

/// Gazetteer-backed entity types and their bundled file stems.
const GAZETTEER_TYPES: [(EntityType, &str); 5] = [
    (EntityType::Person, "person"),
    (EntityType::Location, "location"),
    (EntityType::Organization, "organization"),
    (EntityType::MedicalCondition, "medical_condition"),
    (EntityType::Ethnicity, "ethnicity"),
];

fn bundled_gazetteer_source(stem: &str) -> &'static str {
    match stem {
        "person" => include_str!("../../gazetteers/person.txt"),
        "location" => include_str!("../../gazetteers/location.txt"),
        "organization" => include_str!("../../gazetteers/organization.txt"),
        "medical_condition" => include_str!("../../gazetteers/medical_condition.txt"),
        "ethnicity" => include_str!("../../gazetteers/ethnicity.txt"),
        _ => unreachable!("unknown gazetteer stem"),
    }
}

impl RecognizerSet {
    pub fn new(recognizers: Vec<Box<dyn Recognize>>, weights: SensitivityWeights) -> Self {
        RecognizerSet { recognizers, weights }
    }

    /// Every built-in pattern recognizer plus the bundled gazetteers.
    pub fn with_defaults(weights: SensitivityWeights) -> Self {
        let mut recognizers: Vec<Box<dyn Recognize>> = Vec::new();
        for t in patterns::STRUCTURED_ORDER {
            recognizers.push(Box::new(patterns::for_type(t).expect("structured type")));
        }
        for (entity_type, stem) in GAZETTEER_TYPES {
            let g = Gazetteer::from_lines(entity_type, bundled_gazetteer_source(stem))
                .expect("bundled gazetteer is non-empty");
            recognizers.push(Box::new(g));
        }
        RecognizerSet::new(recognizers, weights)
    }

    /// Built-in patterns plus gazetteers loaded from `<dir>/<type>.txt`.
    pub fn with_gazetteer_dir(
        weights: SensitivityWeights,
        dir: &Path,
    ) -> Result<Self, ExtractorError> {
        let mut recognizers: Vec<Box<dyn Recognize>> = Vec::new();
        for t in patterns::STRUCTURED_ORDER {
            recognizers.push(Box::new(patterns::for_type(t).expect("structured type")));
        }
        for (entity_type, stem) in GAZETTEER_TYPES {
            let path = dir.join(format!("{stem}.txt"));
            recognizers.push(Box::new(Gazetteer::from_file(entity_type, &path)?));
        }
        Ok(RecognizerSet::new(recognizers, weights))
    }

    /// Pattern recognizers only, restricted to the named structured types.
    /// Types without a built-in pattern are ignored.
    pub fn structured(types: &[EntityType], weights: SensitivityWeights) -> Self {
        let recognizers = types
            .iter()
            .filter_map(|t| patterns::for_type(*t))
            .map(|r| Box::new(r) as Box<dyn Recognize>)
            .collect();
        RecognizerSet::new(recognizers, weights)
    }

    pub fn weights(&self) -> &SensitivityWeights {
        &self.weights
    }

    /// Detect PII spans: non-overlapping, sorted by start offset, and a pure
    /// function of (text, recognizer set).
    pub fn detect(&self, text: &str) -> Vec<DetectionSpan> {
        let mut candidates = Vec::new();
        for (priority, r) in self.recognizers.iter().enumerate() {
            for span in r.detect(text) {
                debug_assert!(span.end <= text.len() && span.entity_type == r.entity_type());
                candidates.push(Candidate { span, priority });
            }
        }
        resolve_overlaps(candidates, &self.weights)
    }
}
