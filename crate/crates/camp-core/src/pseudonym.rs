//! Consistent synthetic substitutes and the rewrite/de-mask round trip.
//!
//! Pseudonyms come from bundled lexicons driven by a per-session seeded
//! stream, so runs are deterministic and auditable. The map is bijective
//! and session-local: it carries no serialization aimed at outbound
//! traffic, and the only export redacts real values.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::entities::EntityType;
use crate::registry::RegistrySnapshot;
use crate::textscan::{contains_value, replace_all, Substitution};

/// Placeholder for hard-blocked values; irreversible by design.
pub const BLOCKED_PLACEHOLDER: &str = "[BLOCKED]";

#[derive(Debug, Error)]
pub enum PseudonymError {
    #[error("could not generate a fresh {0} pseudonym within the retry budget")]
    GenerationExhausted(EntityType),
}

const GIVEN_NAMES: [&str; 45] = [
    "Avery", "Jordan", "Morgan", "Riley", "Quinn", "Harper", "Rowan", "Sage", "Emerson",
    "Finley", "Skylar", "Dakota", "Reese", "Tatum", "Ellis", "Marlowe", "Sutton", "Blair",
    "Campbell", "Hollis", "Arden", "Bellamy", "Cassidy", "Devon", "Ember", "Frankie", "Greer",
    "Hadley", "Indigo", "Jules", "Kendall", "Lennon", "Monroe", "Noel", "Oakley", "Palmer",
    "Remy", "Shiloh", "Teagan", "Vaughn", "Winter", "Yael", "Zion", "Corey", "Darby",
];

const SURNAMES: [&str; 45] = [
    "Hale", "Mercer", "Ashford", "Blake", "Carver", "Donnelly", "Ellery", "Fontaine",
    "Granger", "Hollister", "Ives", "Keating", "Lockwood", "Merritt", "Norwood", "Prescott",
    "Quimby", "Radcliffe", "Sterling", "Thorne", "Abbott", "Barlow", "Chandler", "Draper",
    "Easton", "Falk", "Gardner", "Hawthorne", "Irwin", "Jennings", "Kessler", "Lambert",
    "Maddox", "Nolan", "Osborne", "Pembroke", "Quill", "Rutledge", "Sheffield", "Tilden",
    "Underhill", "Vance", "Whitaker", "Yardley", "Zimmer",
];

const CITIES: [&str; 20] = [
    "Madison", "Savannah", "Boulder", "Tacoma", "Ithaca", "Fresno", "Laredo", "Norfolk",
    "Ashland", "Brookfield", "Dayton", "Eugene", "Flagstaff", "Greenville", "Hartford",
    "Joliet", "Kenosha", "Lansing", "Midland", "Norwalk",
];

const ORG_STEMS: [&str; 12] = [
    "Acme", "Nova", "Quartz", "Pinnacle", "Orion", "Zephyr", "Cobalt", "Aurora", "Vantage",
    "Crescent", "Solstice", "Marble",
];

const ORG_SUFFIXES: [&str; 6] = ["Labs", "Systems", "Group", "Industries", "Partners", "Works"];

const MEDICAL_SUBS: [&str; 10] = [
    "seasonal allergies", "mild tinnitus", "eczema", "acid reflux", "tension headaches",
    "insomnia", "carpal tunnel syndrome", "plantar fasciitis", "sinusitis", "bruxism",
];

const ETHNICITY_SUBS: [&str; 8] = [
    "Scandinavian", "Mediterranean", "Baltic", "Andean", "Polynesian", "Basque", "Breton",
    "Sardinian",
];

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

const EMAIL_DOMAINS: [&str; 4] =
    ["example.net", "example.org", "mail.example.com", "inbox.example.net"];

/// Per-session deterministic generator of type-plausible values.
#[derive(Debug, Clone)]
pub struct SyntheticGenerator {
    rng: ChaCha8Rng,
}

impl SyntheticGenerator {
    pub fn new(seed: u64) -> Self {
        SyntheticGenerator { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn pick<'a>(&mut self, items: &[&'a str]) -> &'a str {
        items[self.rng.random_range(0..items.len())]
    }

    /// One candidate value; the caller retries on collisions.
    fn candidate(&mut self, entity_type: EntityType, real: &str) -> String {
        match entity_type {
            EntityType::Person => {
                format!("{} {}", self.pick(&GIVEN_NAMES), self.pick(&SURNAMES))
            }
            EntityType::Location => self.pick(&CITIES).to_string(),
            EntityType::Organization => {
                format!("{} {}", self.pick(&ORG_STEMS), self.pick(&ORG_SUFFIXES))
            }
            EntityType::Email => {
                let given = self.pick(&GIVEN_NAMES).to_ascii_lowercase();
                let surname = self.pick(&SURNAMES).to_ascii_lowercase();
                let domain = self.pick(&EMAIL_DOMAINS);
                format!("{given}.{surname}@{domain}")
            }
            EntityType::Phone => {
                let area = self.rng.random_range(200..990);
                let mid = self.rng.random_range(200..990);
                let tail = self.rng.random_range(0..10000);
                format!("({area}) {mid}-{tail:04}")
            }
            EntityType::DateOfBirth => {
                let month = self.pick(&MONTHS);
                let day = self.rng.random_range(1..29);
                let year = self.rng.random_range(1950..2005);
                format!("{month} {day}, {year}")
            }
            EntityType::MedicalCondition => self.pick(&MEDICAL_SUBS).to_string(),
            EntityType::Ethnicity => self.pick(&ETHNICITY_SUBS).to_string(),
            EntityType::Salary => self.salary_candidate(real),
            EntityType::Age => match real.trim().parse::<i64>() {
                Ok(age) => {
                    let jitter = self.rng.random_range(1..8);
                    let candidate = if self.rng.random_bool(0.5) { age + jitter } else { age - jitter };
                    candidate.clamp(1, 120).to_string()
                }
                Err(_) => self.digit_jitter(real),
            },
            EntityType::IpAddress => {
                let oct = |rng: &mut ChaCha8Rng| rng.random_range(1..255);
                format!(
                    "{}.{}.{}.{}",
                    oct(&mut self.rng),
                    oct(&mut self.rng),
                    oct(&mut self.rng),
                    oct(&mut self.rng)
                )
            }
            EntityType::Ssn
            | EntityType::CreditCard
            | EntityType::BankAccount
            | EntityType::Iban => self.digit_jitter(real),
        }
    }

    /// Generic numeric pseudonym: every digit re-rolled, shape preserved.
    fn digit_jitter(&mut self, real: &str) -> String {
        let out: String = real
            .chars()
            .map(|c| {
                if c.is_ascii_digit() {
                    char::from(b'0' + self.rng.random_range(0..10) as u8)
                } else {
                    c
                }
            })
            .collect();
        if out.chars().any(|c| c.is_ascii_digit()) {
            out
        } else {
            format!("{}-{}", out, self.rng.random_range(1000..10000))
        }
    }

    /// Amount drawn uniformly from [0.7x, 1.3x] of the real value, rounded
    /// to the value's leading-three-digit granularity and formatted like the
    /// original (currency prefix, comma grouping, suffix preserved).
    /// Unparseable amounts fall back to the generic numeric pseudonym.
    fn salary_candidate(&mut self, real: &str) -> String {
        let first_digit = match real.find(|c: char| c.is_ascii_digit()) {
            Some(i) => i,
            None => return self.digit_jitter(real),
        };
        let core_end = real[first_digit..]
            .find(|c: char| !c.is_ascii_digit() && c != ',' && c != '.')
            .map(|i| first_digit + i)
            .unwrap_or(real.len());
        let prefix = &real[..first_digit];
        let core = &real[first_digit..core_end];
        let suffix = &real[core_end..];

        let plain: String = core.chars().filter(|c| *c != ',').collect();
        let integer_part = plain.split('.').next().unwrap_or("");
        let amount: f64 = match plain.parse() {
            Ok(v) if v > 0.0 => v,
            _ => return self.digit_jitter(real),
        };
        let granularity = if integer_part.len() > 3 {
            10f64.powi(integer_part.len() as i32 - 3)
        } else {
            1.0
        };
        let mut substitute = None;
        for _ in 0..64 {
            let draw = self.rng.random_range(0.7 * amount..=1.3 * amount);
            let rounded = (draw / granularity).round() * granularity;
            if rounded > 0.0 && (rounded - amount).abs() > f64::EPSILON {
                substitute = Some(rounded);
                break;
            }
        }
        let value = substitute.unwrap_or(amount + granularity);

        let decimals = plain.split('.').nth(1).map(|d| d.len()).unwrap_or(0);
        let mut number = format!("{value:.decimals$}");
        if core.contains(',') {
            number = group_thousands(&number);
        }
        format!("{prefix}{number}{suffix}")
    }
}

fn group_thousands(number: &str) -> String {
    let (int_part, frac) = match number.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (number, None),
    };
    let digits: Vec<char> = int_part.chars().collect();
    let mut grouped = String::new();
    for (i, c) in digits.iter().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            grouped.push(',');
        }
        grouped.push(*c);
    }
    match frac {
        Some(f) => format!("{grouped}.{f}"),
        None => grouped,
    }
}

/// Bidirectional real/synthetic mapping for one session.
pub struct PseudonymMap {
    forward: BTreeMap<String, String>,
    reverse: BTreeMap<String, String>,
    entity_types: BTreeMap<String, EntityType>,
    generator: SyntheticGenerator,
}

impl PseudonymMap {
    pub fn new(seed: u64) -> Self {
        PseudonymMap {
            forward: BTreeMap::new(),
            reverse: BTreeMap::new(),
            entity_types: BTreeMap::new(),
            generator: SyntheticGenerator::new(seed),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn synthetic_for(&self, value: &str) -> Option<&str> {
        self.forward.get(value).map(String::as_str)
    }

    pub fn real_for(&self, synthetic: &str) -> Option<&str> {
        self.reverse.get(synthetic).map(String::as_str)
    }

    pub fn synthetics(&self) -> impl Iterator<Item = &str> {
        self.reverse.keys().map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.forward.iter().map(|(r, s)| (r.as_str(), s.as_str()))
    }

    /// Stable assignment: an existing mapping is returned as-is; otherwise a
    /// fresh value is generated that collides with no forward or reverse key
    /// and differs from the real value.
    pub fn assign(&mut self, value: &str, entity_type: EntityType) -> Result<String, PseudonymError> {
        assert!(!value.is_empty(), "cannot pseudonymize an empty value");
        if let Some(existing) = self.forward.get(value) {
            return Ok(existing.clone());
        }
        for _ in 0..64 {
            let candidate = self.generator.candidate(entity_type, value);
            if candidate.is_empty() || candidate == value {
                continue;
            }
            if self.forward.contains_key(&candidate) || self.reverse.contains_key(&candidate) {
                continue;
            }
            // A pseudonym that contains (or is contained by) a known real
            // value would make replacement order observable; reject it.
            let entangled = self.forward.keys().any(|real| {
                contains_value(&candidate, real, true) || contains_value(real, &candidate, true)
            });
            if entangled {
                continue;
            }
            self.forward.insert(value.to_string(), candidate.clone());
            self.reverse.insert(candidate.clone(), value.to_string());
            self.entity_types.insert(value.to_string(), entity_type);
            return Ok(candidate);
        }
        Err(PseudonymError::GenerationExhausted(entity_type))
    }

    /// Replace every synthetic value in `response` with its real value,
    /// longest-synthetic-first. Text without pseudonyms passes unchanged.
    pub fn demask(&self, response: &str) -> String {
        if self.reverse.is_empty() {
            return response.to_string();
        }
        let subs: Vec<Substitution> = self
            .reverse
            .iter()
            .map(|(synthetic, real)| Substitution {
                needle: synthetic.clone(),
                replacement: real.clone(),
                case_insensitive: false,
            })
            .collect();
        replace_all(response, &subs)
    }

    /// Debug-only export: real values reduced to first character + length.
    pub fn audit_export(&self) -> AuditExport {
        AuditExport {
            pairs: self
                .forward
                .iter()
                .map(|(real, synthetic)| AuditPair {
                    entity_type: self.entity_types.get(real).copied(),
                    real_redacted: redact(real),
                    synthetic: synthetic.clone(),
                })
                .collect(),
        }
    }
}

impl std::fmt::Debug for PseudonymMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Real values stay out of debug output.
        f.debug_struct("PseudonymMap").field("len", &self.forward.len()).finish()
    }
}

fn redact(value: &str) -> String {
    let first = value.chars().next().unwrap_or('?');
    format!("{first}…{}", value.chars().count())
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditExport {
    pub pairs: Vec<AuditPair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditPair {
    #[serde(rename = "type")]
    pub entity_type: Option<EntityType>,
    pub real_redacted: String,
    pub synthetic: String,
}

/// Types whose surfaces come from gazetteers; their occurrences are also
/// replaced under casing drift.
fn case_insensitive_type(entity_type: EntityType) -> bool {
    matches!(
        entity_type,
        EntityType::Person
            | EntityType::Location
            | EntityType::Organization
            | EntityType::MedicalCondition
            | EntityType::Ethnicity
    )
}

fn substitutions_for(
    snapshot: &RegistrySnapshot,
    map: &mut PseudonymMap,
) -> Result<Vec<Substitution>, PseudonymError> {
    let mut subs = Vec::new();
    for entity in snapshot.entities() {
        let replacement = if entity.is_blocked() {
            BLOCKED_PLACEHOLDER.to_string()
        } else {
            map.assign(&entity.value, entity.entity_type)?
        };
        subs.push(Substitution {
            needle: entity.value.clone(),
            replacement,
            case_insensitive: case_insensitive_type(entity.entity_type),
        });
    }
    Ok(subs)
}

/// Rewrite one text: registered non-blocked values become their pseudonyms
/// (assigned on first use), hard-blocked values become `[BLOCKED]`.
/// Replacement is single-pass and longest-value-first; non-PII text is
/// byte-identical.
pub fn rewrite_text(
    text: &str,
    snapshot: &RegistrySnapshot,
    map: &mut PseudonymMap,
) -> Result<String, PseudonymError> {
    if snapshot.is_empty() {
        return Ok(text.to_string());
    }
    let subs = substitutions_for(snapshot, map)?;
    Ok(replace_all(text, &subs))
}

/// Rewrite a whole conversation history.
pub fn rewrite_history(
    history: &[String],
    snapshot: &RegistrySnapshot,
    map: &mut PseudonymMap,
) -> Result<Vec<String>, PseudonymError> {
    if snapshot.is_empty() {
        return Ok(history.to_vec());
    }
    let subs = substitutions_for(snapshot, map)?;
    Ok(history.iter().map(|t| replace_all(t, &subs)).collect())
}
