//! PII entity taxonomy, sensitivity weights, and hard-block classification.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The closed set of PII categories the system recognizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityType {
    Person,
    Location,
    Organization,
    Email,
    Phone,
    DateOfBirth,
    Ssn,
    MedicalCondition,
    Salary,
    CreditCard,
    IpAddress,
    BankAccount,
    Iban,
    Age,
    Ethnicity,
}

impl EntityType {
    /// Every entity type, in a fixed order.
    pub const ALL: [EntityType; 15] = [
        EntityType::Person,
        EntityType::Location,
        EntityType::Organization,
        EntityType::Email,
        EntityType::Phone,
        EntityType::DateOfBirth,
        EntityType::Ssn,
        EntityType::MedicalCondition,
        EntityType::Salary,
        EntityType::CreditCard,
        EntityType::IpAddress,
        EntityType::BankAccount,
        EntityType::Iban,
        EntityType::Age,
        EntityType::Ethnicity,
    ];

    /// Types that are never forwarded upstream under any circumstances.
    /// Detected occurrences are replaced with `[BLOCKED]` from turn 0.
    pub const HARD_BLOCKED: [EntityType; 4] = [
        EntityType::Ssn,
        EntityType::CreditCard,
        EntityType::BankAccount,
        EntityType::Iban,
    ];

    /// True iff this type carries irreversible re-identification risk and is
    /// unconditionally blocked outbound.
    pub fn is_hard_blocked(self) -> bool {
        matches!(
            self,
            EntityType::Ssn | EntityType::CreditCard | EntityType::BankAccount | EntityType::Iban
        )
    }

    fn idx(self) -> usize {
        EntityType::ALL.iter().position(|t| *t == self).expect("closed enum")
    }

    /// Wire name, e.g. `DATE_OF_BIRTH`.
    pub fn name(self) -> &'static str {
        match self {
            EntityType::Person => "PERSON",
            EntityType::Location => "LOCATION",
            EntityType::Organization => "ORGANIZATION",
            EntityType::Email => "EMAIL",
            EntityType::Phone => "PHONE",
            EntityType::DateOfBirth => "DATE_OF_BIRTH",
            EntityType::Ssn => "SSN",
            EntityType::MedicalCondition => "MEDICAL_CONDITION",
            EntityType::Salary => "SALARY",
            EntityType::CreditCard => "CREDIT_CARD",
            EntityType::IpAddress => "IP_ADDRESS",
            EntityType::BankAccount => "BANK_ACCOUNT",
            EntityType::Iban => "IBAN",
            EntityType::Age => "AGE",
            EntityType::Ethnicity => "ETHNICITY",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityType {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| WeightError::UnknownEntityType(s.to_string()))
    }
}

/// Errors from weight-table construction or override loading.
#[derive(Debug, Error)]
pub enum WeightError {
    #[error("unknown entity type `{0}`")]
    UnknownEntityType(String),
    #[error("weight {value} for {entity} outside (0, 1]")]
    OutOfRange { entity: &'static str, value: f64 },
    #[error("failed to parse weight overrides: {0}")]
    Parse(String),
    #[error("failed to read weight overrides: {0}")]
    Io(#[from] std::io::Error),
}

/// Base sensitivity weight w(e) per entity type, each in (0, 1].
///
/// Direct identifiers carry the top of the range, quasi-identifiers the
/// middle. Defaults for AGE and ETHNICITY sit at the quasi-identifier tier
/// (0.50); BANK_ACCOUNT and IBAN at the direct-identifier tier (1.00);
/// those two only influence the score when hard-blocked types are opted in.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityWeights<F: Float = f64> {
    weights: [F; 15],
}

impl<F: Float> Default for SensitivityWeights<F> {
    fn default() -> Self {
        Self::standard()
    }
}

impl<F: Float> SensitivityWeights<F> {
    /// The built-in default table.
    pub fn standard() -> Self {
        let f = |v: f64| F::from(v).expect("weight representable");
        let mut weights = [F::zero(); 15];
        let defaults: [(EntityType, f64); 15] = [
            (EntityType::Ssn, 1.00),
            (EntityType::CreditCard, 1.00),
            (EntityType::DateOfBirth, 0.90),
            (EntityType::MedicalCondition, 0.85),
            (EntityType::Email, 0.80),
            (EntityType::Phone, 0.75),
            (EntityType::Person, 0.60),
            (EntityType::Salary, 0.60),
            (EntityType::Location, 0.50),
            (EntityType::IpAddress, 0.50),
            (EntityType::Organization, 0.30),
            (EntityType::Age, 0.50),
            (EntityType::Ethnicity, 0.50),
            (EntityType::BankAccount, 1.00),
            (EntityType::Iban, 1.00),
        ];
        for (t, v) in defaults {
            weights[t.idx()] = f(v);
        }
        SensitivityWeights { weights }
    }

    /// Configured w(e) for a type. Total over the closed enumeration.
    pub fn weight(&self, entity: EntityType) -> F {
        self.weights[entity.idx()]
    }

    /// Replace one weight, validating the (0, 1] range.
    pub fn set(&mut self, entity: EntityType, value: F) -> Result<(), WeightError> {
        if value <= F::zero() || value > F::one() {
            return Err(WeightError::OutOfRange {
                entity: entity.name(),
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.weights[entity.idx()] = value;
        Ok(())
    }

    /// Parse a flat `NAME = weight` override document (TOML table) on top of
    /// the standard defaults. Unknown names and out-of-range values are
    /// rejected.
    pub fn from_override_str(doc: &str) -> Result<Self, WeightError> {
        let overrides: BTreeMap<String, f64> =
            toml::from_str(doc).map_err(|e| WeightError::Parse(e.to_string()))?;
        let mut table = Self::standard();
        for (name, value) in overrides {
            let entity = EntityType::from_str(&name)?;
            let v = F::from(value).ok_or(WeightError::OutOfRange {
                entity: entity.name(),
                value,
            })?;
            table.set(entity, v)?;
        }
        Ok(table)
    }

    /// Load overrides from a file path.
    pub fn from_override_file(path: &Path) -> Result<Self, WeightError> {
        let doc = std::fs::read_to_string(path)?;
        Self::from_override_str(&doc)
    }
}

/// A detected PII occurrence: byte offsets into one message's text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetectionSpan {
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    #[serde(skip)]
    pub turn: usize,
}

impl DetectionSpan {
    /// Build a span over `text[start..end]`, capturing the surface slice.
    ///
    /// Panics if the range is empty, out of bounds, or not on char
    /// boundaries; recognizers only emit ranges taken from regex matches,
    /// which satisfy all three.
    pub fn new(entity_type: EntityType, start: usize, end: usize, text: &str) -> Self {
        assert!(start < end && end <= text.len(), "span out of bounds");
        DetectionSpan {
            entity_type,
            start,
            end,
            surface: text[start..end].to_string(),
            turn: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &DetectionSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Canonical form of a detected value: surrounding whitespace trimmed,
/// internal whitespace runs collapsed to single spaces, case preserved.
pub fn canonical_value(surface: &str) -> String {
    surface.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A canonical entity accumulated in the session registry.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionEntity {
    pub entity_type: EntityType,
    /// Normalized surface text; non-empty.
    pub value: String,
    /// Turn index (0-based) of the first observation; never changes.
    pub first_seen_turn: usize,
    /// Every span observed for this entity, in arrival order.
    pub spans: Vec<DetectionSpan>,
}

impl SessionEntity {
    /// Whether this entity's type is unconditionally blocked outbound.
    pub fn is_blocked(&self) -> bool {
        self.entity_type.is_hard_blocked()
    }

    pub fn occurrence_count(&self) -> usize {
        self.spans.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_table_is_total() {
        let w = SensitivityWeights::<f64>::standard();
        for t in EntityType::ALL {
            let v = w.weight(t);
            assert!(v > 0.0 && v <= 1.0, "{t} weight {v} outside (0,1]");
        }
    }

    #[test]
    fn default_weights_match_reference_table() {
        let w = SensitivityWeights::<f64>::standard();
        let expected = [
            (EntityType::Ssn, 1.00),
            (EntityType::CreditCard, 1.00),
            (EntityType::DateOfBirth, 0.90),
            (EntityType::MedicalCondition, 0.85),
            (EntityType::Email, 0.80),
            (EntityType::Phone, 0.75),
            (EntityType::Person, 0.60),
            (EntityType::Salary, 0.60),
            (EntityType::Location, 0.50),
            (EntityType::IpAddress, 0.50),
            (EntityType::Organization, 0.30),
        ];
        for (t, v) in expected {
            assert_eq!(w.weight(t), v, "{t}");
        }
    }

    #[test]
    fn hard_block_set_is_exactly_four() {
        let blocked: Vec<_> = EntityType::ALL.iter().filter(|t| t.is_hard_blocked()).collect();
        assert_eq!(blocked.len(), 4);
        assert!(EntityType::Ssn.is_hard_blocked());
        assert!(EntityType::CreditCard.is_hard_blocked());
        assert!(EntityType::BankAccount.is_hard_blocked());
        assert!(EntityType::Iban.is_hard_blocked());
        assert!(!EntityType::Person.is_hard_blocked());
    }

    #[test]
    fn weights_work_in_f32() {
        let w = SensitivityWeights::<f32>::standard();
        assert_eq!(w.weight(EntityType::MedicalCondition), 0.85f32);
    }

    #[test]
    fn override_file_replaces_named_weights() {
        let w = SensitivityWeights::<f64>::from_override_str("PERSON = 0.7\nAGE = 0.25\n").unwrap();
        assert_eq!(w.weight(EntityType::Person), 0.7);
        assert_eq!(w.weight(EntityType::Age), 0.25);
        assert_eq!(w.weight(EntityType::Location), 0.5);
    }

    #[test]
    fn override_rejects_out_of_range_and_unknown() {
        assert!(SensitivityWeights::<f64>::from_override_str("PERSON = 0.0").is_err());
        assert!(SensitivityWeights::<f64>::from_override_str("PERSON = 1.5").is_err());
        assert!(SensitivityWeights::<f64>::from_override_str("PASSPORT = 0.5").is_err());
    }

    #[test]
    fn canonical_value_collapses_whitespace() {
        assert_eq!(canonical_value("  Jane   Doe \t"), "Jane Doe");
        assert_eq!(canonical_value("Boston"), "Boston");
    }

    #[test]
    fn entity_type_round_trips_through_name() {
        for t in EntityType::ALL {
            assert_eq!(t.name().parse::<EntityType>().unwrap(), t);
        }
    }

    #[test]
    fn serde_uses_wire_names() {
        let j = serde_json::to_string(&EntityType::DateOfBirth).unwrap();
        assert_eq!(j, "\"DATE_OF_BIRTH\"");
        let t: EntityType = serde_json::from_str("\"CREDIT_CARD\"").unwrap();
        assert_eq!(t, EntityType::CreditCard);
    }
}
