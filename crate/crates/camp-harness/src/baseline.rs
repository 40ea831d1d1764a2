//! Stateless per-turn masker used as the comparison baseline.
//!
//! Each message is masked independently with typed placeholders; nothing
//! carries over between turns. The default recognizer subset covers only
//! structured identifiers, which is exactly why conversational
//! quasi-identifiers slip through it.

use camp_core::{EntityType, RecognizerSet, SensitivityWeights};

/// Structured types masked by default.
pub const STRUCTURED_DEFAULT: [EntityType; 5] = [
    EntityType::Email,
    EntityType::Phone,
    EntityType::Ssn,
    EntityType::CreditCard,
    EntityType::IpAddress,
];

pub struct BaselineMasker {
    recognizers: RecognizerSet,
}

impl BaselineMasker {
    pub fn structured_default() -> Self {
        Self::with_types(&STRUCTURED_DEFAULT)
    }

    /// Configurable subset for fairness studies.
    pub fn with_types(types: &[EntityType]) -> Self {
        BaselineMasker {
            recognizers: RecognizerSet::structured(types, SensitivityWeights::standard()),
        }
    }

    /// Replace each detection with `<TYPE>`. No state between calls.
    pub fn mask(&self, text: &str) -> String {
        let spans = self.recognizers.detect(text);
        let mut out = String::with_capacity(text.len());
        let mut pos = 0;
        for span in &spans {
            out.push_str(&text[pos..span.start]);
            out.push_str(&format!("<{}>", span.entity_type));
            pos = span.end;
        }
        out.push_str(&text[pos..]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_structured_types_only() {
        let masker = BaselineMasker::structured_default();
        let out = masker.mask("Jane Calloway's ssn is 123-45-6789, mail jane@example.com");
        assert!(out.contains("Jane Calloway"), "quasi-identifiers pass through");
        assert!(out.contains("<SSN>"));
        assert!(out.contains("<EMAIL>"));
        assert!(!out.contains("123-45-6789"));
    }

    #[test]
    fn no_detections_means_identity() {
        let masker = BaselineMasker::structured_default();
        let text = "my salary is $95,000 and I live in Portland";
        assert_eq!(masker.mask(text), text);
    }

    #[test]
    fn custom_subset() {
        let masker = BaselineMasker::with_types(&[EntityType::Email]);
        let out = masker.mask("ssn 123-45-6789, mail a@b.example.com");
        assert!(out.contains("123-45-6789"));
        assert!(out.contains("<EMAIL>"));
    }
}
