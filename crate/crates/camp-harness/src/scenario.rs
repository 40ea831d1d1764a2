//! Replayable multi-turn scenario fixtures.
//!
//! A scenario lists user turns with entity annotations; validation checks
//! every annotation against the extractor before a run is allowed, so
//! reported trigger turns always rest on verified detections.

use std::collections::BTreeSet;
use std::path::Path;

use camp_core::{EntityType, RecognizerSet};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub domain: String,
    pub turns: Vec<TurnSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnSpec {
    pub text: String,
    #[serde(default)]
    pub entities: Vec<EntityAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityAnnotation {
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub surface: String,
}

impl ScenarioSpec {
    pub fn from_json(doc: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(doc)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn turn_count(&self) -> usize {
        self.turns.len()
    }

    /// Distinct entity types across all annotations.
    pub fn annotated_types(&self) -> BTreeSet<EntityType> {
        self.turns
            .iter()
            .flat_map(|t| t.entities.iter().map(|e| e.entity_type))
            .collect()
    }

    /// Every annotation must reference a substring of its turn text and be
    /// found by the extractor with the same type and surface.
    pub fn validate(&self, recognizers: &RecognizerSet) -> Result<(), HarnessError> {
        if self.turns.is_empty() {
            return Err(HarnessError::EmptyScenario);
        }
        for (i, turn) in self.turns.iter().enumerate() {
            let detected = recognizers.detect(&turn.text);
            for annotation in &turn.entities {
                if !turn.text.contains(&annotation.surface) {
                    return Err(self.validation_error(
                        i,
                        format!("annotated surface {:?} not present in text", annotation.surface),
                    ));
                }
                let found = detected.iter().any(|s| {
                    s.entity_type == annotation.entity_type && s.surface == annotation.surface
                });
                if !found {
                    return Err(self.validation_error(
                        i,
                        format!(
                            "annotated {} {:?} not detected",
                            annotation.entity_type, annotation.surface
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Stricter hygiene check for bundled fixtures: the detected set must
    /// equal the annotated set exactly, so no stray detection can shift the
    /// disclosure schedule.
    pub fn validate_exact(&self, recognizers: &RecognizerSet) -> Result<(), HarnessError> {
        self.validate(recognizers)?;
        for (i, turn) in self.turns.iter().enumerate() {
            let detected: BTreeSet<EntityAnnotation> = recognizers
                .detect(&turn.text)
                .into_iter()
                .map(|s| EntityAnnotation { entity_type: s.entity_type, surface: s.surface })
                .collect();
            let annotated: BTreeSet<EntityAnnotation> = turn.entities.iter().cloned().collect();
            if detected != annotated {
                return Err(self.validation_error(
                    i,
                    format!("detected set {detected:?} differs from annotations {annotated:?}"),
                ));
            }
        }
        Ok(())
    }

    fn validation_error(&self, turn: usize, detail: String) -> HarnessError {
        HarnessError::FixtureValidation { scenario: self.id.clone(), turn: turn + 1, detail }
    }
}
