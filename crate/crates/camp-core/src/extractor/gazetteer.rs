//! Gazetteer recognizers: case-insensitive phrase lists matched on word
//! boundaries. Stand-in for model-based NER so detection stays local and
//! deterministic; the file format is one phrase per line with `#` comments.

use std::path::Path;

use regex::Regex;

use crate::entities::{DetectionSpan, EntityType};
use crate::extractor::ExtractorError;

/// A phrase list for one entity type.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entity_type: EntityType,
    phrases: Vec<String>,
    matcher: Regex,
}

impl Gazetteer {
    /// Build from a list of phrases. Phrases are trimmed; empties dropped;
    /// an empty resulting set is a configuration error.
    pub fn new(entity_type: EntityType, phrases: impl IntoIterator<Item = String>) -> Result<Self, ExtractorError> {
        let mut phrases: Vec<String> = phrases
            .into_iter()
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
        if phrases.is_empty() {
            return Err(ExtractorError::EmptyGazetteer(entity_type));
        }
        // Longest first so the alternation prefers whole phrases.
        phrases.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        phrases.dedup();
        let alt = phrases.iter().map(|p| regex::escape(p)).collect::<Vec<_>>().join("|");
        let matcher = Regex::new(&format!(r"(?i)\b(?:{alt})\b")).map_err(|source| {
            ExtractorError::BadPattern { name: format!("gazetteer:{entity_type}"), source }
        })?;
        Ok(Gazetteer { entity_type, phrases, matcher })
    }

    /// Parse the file format: one phrase per line, `#` starts a comment.
    pub fn from_lines(entity_type: EntityType, doc: &str) -> Result<Self, ExtractorError> {
        let phrases = doc
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim().to_string())
            .filter(|line| !line.is_empty());
        Self::new(entity_type, phrases)
    }

    pub fn from_file(entity_type: EntityType, path: &Path) -> Result<Self, ExtractorError> {
        let doc = std::fs::read_to_string(path)
            .map_err(|e| ExtractorError::Io { path: path.display().to_string(), source: e })?;
        Self::from_lines(entity_type, &doc)
    }

    pub fn entity_type(&self) -> EntityType {
        self.entity_type
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn detect(&self, text: &str) -> Vec<DetectionSpan> {
        self.matcher
            .find_iter(text)
            .map(|m| DetectionSpan::new(self.entity_type, m.start(), m.end(), text))
            .collect()
    }
}
