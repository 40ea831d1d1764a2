//! Append-only session registry: every PII entity observed across turns.
//!
//! This is the stateful record that per-turn maskers lack. Entities are
//! keyed by (type, canonical value); nothing is ever removed, and an
//! entity's first-seen turn is fixed at insertion. The registry has no
//! outbound serialization; the only export is redacted.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::entities::{canonical_value, DetectionSpan, EntityType, SessionEntity};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("turn {turn} recorded after turn {last}; turns must be non-decreasing")]
    OutOfOrderTurn { turn: usize, last: usize },
}

/// Session-level record of every detected entity.
#[derive(Debug, Clone)]
pub struct SessionRegistry {
    session_id: String,
    entities: BTreeMap<(EntityType, String), SessionEntity>,
    type_set: BTreeSet<EntityType>,
    type_first_seen: BTreeMap<EntityType, usize>,
    last_turn: Option<usize>,
}

impl SessionRegistry {
    pub fn new(session_id: impl Into<String>) -> Self {
        SessionRegistry {
            session_id: session_id.into(),
            entities: BTreeMap::new(),
            type_set: BTreeSet::new(),
            type_first_seen: BTreeMap::new(),
            last_turn: None,
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    /// Merge one turn's detections. Returns the entity types that were not
    /// present before this call, in type order.
    pub fn record(
        &mut self,
        turn: usize,
        spans: &[DetectionSpan],
    ) -> Result<Vec<EntityType>, RegistryError> {
        if let Some(last) = self.last_turn {
            if turn < last {
                return Err(RegistryError::OutOfOrderTurn { turn, last });
            }
        }
        self.last_turn = Some(turn);

        let mut added = BTreeSet::new();
        for span in spans {
            let value = canonical_value(&span.surface);
            if value.is_empty() {
                continue;
            }
            let mut span = span.clone();
            span.turn = turn;
            let entity_type = span.entity_type;
            self.entities
                .entry((entity_type, value.clone()))
                .and_modify(|e| e.spans.push(span.clone()))
                .or_insert_with(|| SessionEntity {
                    entity_type,
                    value,
                    first_seen_turn: turn,
                    spans: vec![span],
                });
            if self.type_set.insert(entity_type) {
                added.insert(entity_type);
                self.type_first_seen.insert(entity_type, turn);
            }
        }
        Ok(added.into_iter().collect())
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn type_set(&self) -> &BTreeSet<EntityType> {
        &self.type_set
    }

    pub fn entities(&self) -> impl Iterator<Item = &SessionEntity> {
        self.entities.values()
    }

    /// Immutable view of everything recorded so far; later mutations of the
    /// registry do not affect it.
    pub fn snapshot(&self) -> RegistrySnapshot {
        RegistrySnapshot {
            session_id: self.session_id.clone(),
            entities: self.entities.values().cloned().collect(),
            type_set: self.type_set.clone(),
            type_first_seen: self.type_first_seen.clone(),
        }
    }
}

/// Point-in-time view of the registry.
#[derive(Debug, Clone)]
pub struct RegistrySnapshot {
    session_id: String,
    entities: Vec<SessionEntity>,
    type_set: BTreeSet<EntityType>,
    type_first_seen: BTreeMap<EntityType, usize>,
}

impl RegistrySnapshot {
    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn entities(&self) -> &[SessionEntity] {
        &self.entities
    }

    pub fn type_set(&self) -> &BTreeSet<EntityType> {
        &self.type_set
    }

    pub fn first_seen(&self, entity_type: EntityType) -> Option<usize> {
        self.type_first_seen.get(&entity_type).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Redacted export for the risk-inspection endpoint and reports.
    /// Raw values never appear here.
    pub fn export(&self) -> RegistryExport {
        RegistryExport {
            session_id: self.session_id.clone(),
            entities: self
                .entities
                .iter()
                .map(|e| RegistryEntityExport {
                    entity_type: e.entity_type,
                    value_redacted_flag: e.is_blocked(),
                    first_seen_turn: e.first_seen_turn,
                    occurrence_count: e.occurrence_count(),
                })
                .collect(),
            type_set: self.type_set.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegistryExport {
    pub session_id: String,
    pub entities: Vec<RegistryEntityExport>,
    pub type_set: Vec<EntityType>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegistryEntityExport {
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub value_redacted_flag: bool,
    pub first_seen_turn: usize,
    pub occurrence_count: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn person_span(value: &str, turn: usize) -> DetectionSpan {
        let text = format!("name {value} here");
        let mut s = DetectionSpan::new(EntityType::Person, 5, 5 + value.len(), &text);
        s.turn = turn;
        s
    }

    fn location_span(value: &str, turn: usize) -> DetectionSpan {
        let text = format!("in {value} now");
        let mut s = DetectionSpan::new(EntityType::Location, 3, 3 + value.len(), &text);
        s.turn = turn;
        s
    }

    #[test]
    fn first_insertion_reports_new_type() {
        let mut reg = SessionRegistry::new("s");
        let added = reg.record(2, &[person_span("Jane Doe", 2)]).unwrap();
        assert_eq!(added, vec![EntityType::Person]);
        assert_eq!(reg.entity_count(), 1);
        let e = reg.entities().next().unwrap();
        assert_eq!(e.first_seen_turn, 2);
    }

    #[test]
    fn reinsertion_keeps_first_seen_and_grows_spans() {
        let mut reg = SessionRegistry::new("s");
        reg.record(2, &[person_span("Jane Doe", 2)]).unwrap();
        let added = reg.record(5, &[person_span("Jane Doe", 5)]).unwrap();
        assert!(added.is_empty());
        assert_eq!(reg.entity_count(), 1);
        let e = reg.entities().next().unwrap();
        assert_eq!(e.first_seen_turn, 2);
        assert_eq!(e.occurrence_count(), 2);
    }

    #[test]
    fn distinct_values_one_type() {
        let mut reg = SessionRegistry::new("s");
        let a1 = reg.record(0, &[location_span("Boston", 0)]).unwrap();
        let a2 = reg.record(1, &[location_span("Austin", 1)]).unwrap();
        assert_eq!(a1, vec![EntityType::Location]);
        assert!(a2.is_empty());
        assert_eq!(reg.entity_count(), 2);
        assert_eq!(reg.type_set().len(), 1);
    }

    #[test]
    fn out_of_order_turn_rejected() {
        let mut reg = SessionRegistry::new("s");
        reg.record(3, &[person_span("Jane Doe", 3)]).unwrap();
        let err = reg.record(1, &[person_span("Ann Lee", 1)]).unwrap_err();
        assert_eq!(err, RegistryError::OutOfOrderTurn { turn: 1, last: 3 });
    }

    #[test]
    fn snapshot_is_immutable_view() {
        let mut reg = SessionRegistry::new("s");
        assert!(reg.snapshot().is_empty());
        reg.record(0, &[person_span("Jane Doe", 0)]).unwrap();
        let snap = reg.snapshot();
        assert_eq!(snap.entities().len(), 1);
        reg.record(1, &[location_span("Boston", 1)]).unwrap();
        assert_eq!(snap.entities().len(), 1);
        assert_eq!(reg.snapshot().entities().len(), 2);
    }

    #[test]
    fn export_redacts_values() {
        let mut reg = SessionRegistry::new("sess-1");
        reg.record(0, &[person_span("Jane Doe", 0)]).unwrap();
        let json = serde_json::to_string(&reg.snapshot().export()).unwrap();
        assert!(!json.contains("Jane"));
        assert!(json.contains("\"first_seen_turn\":0"));
        assert!(json.contains("PERSON"));
    }

    #[test]
    fn blocked_entities_flagged_in_export() {
        let text = "ssn 123-45-6789";
        let span = DetectionSpan::new(EntityType::Ssn, 4, 15, text);
        let mut reg = SessionRegistry::new("s");
        reg.record(0, &[span]).unwrap();
        let export = reg.snapshot().export();
        assert!(export.entities[0].value_redacted_flag);
    }

    proptest! {
        // Type set grows monotonically and re-insertion is idempotent on
        // entity count, over arbitrary in-order insert sequences.
        #[test]
        fn type_set_monotone(seq in proptest::collection::vec((0usize..4, 0usize..3), 0..20)) {
            const PEOPLE: [&str; 4] = ["Jane Doe", "Ann Lee", "Omar Haddad", "Rosa Delgado"];
            let mut reg = SessionRegistry::new("s");
            let mut prev_types = 0;
            for (turn, (who, repeat)) in seq.into_iter().enumerate() {
                for _ in 0..=repeat {
                    let before = reg.entity_count();
                    reg.record(turn, &[person_span(PEOPLE[who], turn)]).unwrap();
                    let after = reg.entity_count();
                    prop_assert!(after == before || after == before + 1);
                }
                prop_assert!(reg.type_set().len() >= prev_types);
                prev_types = reg.type_set().len();
            }
        }
    }
}
