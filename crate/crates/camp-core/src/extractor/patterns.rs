//! Built-in pattern recognizers for structured PII.
//!
//! Shapes are deliberately strict and, where ambiguous, gated on nearby
//! keywords (a plain number only counts as a salary near compensation
//! vocabulary). Credit cards additionally require a valid Luhn checksum.

use regex::Regex;

use crate::entities::{DetectionSpan, EntityType};
use crate::extractor::luhn::luhn_valid;
use crate::extractor::{ExtractorError, Recognize};
use crate::textscan::{boundary_ok, keyword_within};

type SpanFilter = Box<dyn Fn(&str, usize, usize) -> bool + Send + Sync>;

/// A regex-backed recognizer with an optional post-match filter.
pub struct PatternRecognizer {
    name: String,
    entity_type: EntityType,
    regex: Regex,
    filter: Option<SpanFilter>,
}

impl PatternRecognizer {
    /// Compile a custom recognizer. A malformed pattern fails here, never
    /// at detection time.
    pub fn new(name: &str, entity_type: EntityType, pattern: &str) -> Result<Self, ExtractorError> {
        let regex = Regex::new(pattern).map_err(|source| ExtractorError::BadPattern {
            name: name.to_string(),
            source,
        })?;
        Ok(PatternRecognizer { name: name.to_string(), entity_type, regex, filter: None })
    }

    fn with_filter(mut self, filter: SpanFilter) -> Self {
        self.filter = Some(filter);
        self
    }
}

impl Recognize for PatternRecognizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn entity_type(&self) -> EntityType {
        self.entity_type
    }

    fn detect(&self, text: &str) -> Vec<DetectionSpan> {
        self.regex
            .find_iter(text)
            .filter(|m| boundary_ok(text, m.start(), m.end()))
            .filter(|m| match &self.filter {
                Some(f) => f(text, m.start(), m.end()),
                None => true,
            })
            .map(|m| DetectionSpan::new(self.entity_type, m.start(), m.end(), text))
            .collect()
    }
}

fn keyword_gate(keywords: &'static [&'static str], window: usize) -> SpanFilter {
    Box::new(move |text, start, end| keyword_within(text, (start, end), keywords, window))
}

fn must(name: &str, entity_type: EntityType, pattern: &str) -> PatternRecognizer {
    PatternRecognizer::new(name, entity_type, pattern).expect("built-in pattern compiles")
}

const MONTHS: &str = "(?i:january|february|march|april|may|june|july|august|september|october|november|december)";

const DOB_KEYWORDS: &[&str] = &["born", "birth", "birthday", "birthdate", "dob"];
const SALARY_KEYWORDS: &[&str] =
    &["salary", "income", "earn", "earns", "earned", "earning", "earnings", "compensation", "ctc"];
const AGE_KEYWORDS: &[&str] = &["age", "aged", "years old", "year old", "yrs old"];
const ACCOUNT_KEYWORDS: &[&str] = &["account", "acct", "a/c"];

pub fn email() -> PatternRecognizer {
    must("email", EntityType::Email, r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b")
}

pub fn ssn() -> PatternRecognizer {
    must("ssn", EntityType::Ssn, r"\b\d{3}-\d{2}-\d{4}\b")
}

/// 13–19 digits with optional single space/hyphen separators, kept only
/// when the digit string passes the Luhn checksum.
pub fn credit_card() -> PatternRecognizer {
    must("credit_card", EntityType::CreditCard, r"\b\d(?:[ -]?\d){12,18}\b").with_filter(Box::new(
        |text, start, end| {
            let digits: String =
                text[start..end].chars().filter(|c| c.is_ascii_digit()).collect();
            (13..=19).contains(&digits.len()) && luhn_valid(&digits)
        },
    ))
}

pub fn ip_address() -> PatternRecognizer {
    must(
        "ip_address",
        EntityType::IpAddress,
        r"\b(?:(?:25[0-5]|2[0-4]\d|[01]?\d\d?)\.){3}(?:25[0-5]|2[0-4]\d|[01]?\d\d?)\b",
    )
}

/// 10-digit North American shape with optional separators and optional
/// +1 country prefix.
pub fn phone() -> PatternRecognizer {
    must("phone", EntityType::Phone, r"(?:\+?1[-. ]?)?\(?\d{3}\)?[-. ]?\d{3}[-. ]?\d{4}\b")
}

/// Common numeric and month-name date shapes within six tokens of a birth
/// keyword.
pub fn date_of_birth() -> PatternRecognizer {
    let pattern = format!(
        r"\b(?:\d{{4}}-\d{{2}}-\d{{2}}|\d{{1,2}}/\d{{1,2}}/\d{{2,4}}|{MONTHS}\s+\d{{1,2}}(?:,\s*\d{{2,4}})?|\d{{1,2}}\s+{MONTHS}(?:\s+\d{{2,4}})?)\b"
    );
    PatternRecognizer::new("date_of_birth", EntityType::DateOfBirth, &pattern)
        .expect("built-in pattern compiles")
        .with_filter(keyword_gate(DOB_KEYWORDS, 6))
}

/// Currency-marked amount, or a plain number of at least four digits,
/// within six tokens of a compensation keyword.
pub fn salary() -> PatternRecognizer {
    must(
        "salary",
        EntityType::Salary,
        r"(?:[$€£]\s?\d{1,3}(?:,\d{3})*(?:\.\d+)?(?:\s?[kKmM])?|\d{1,3}(?:,\d{3})+|\d{4,})\b",
    )
    .with_filter(keyword_gate(SALARY_KEYWORDS, 6))
}

/// Integer 1–120 adjacent (within three tokens) to an age keyword.
pub fn age() -> PatternRecognizer {
    must("age", EntityType::Age, r"\b\d{1,3}\b").with_filter(Box::new(|text, start, end| {
        text[start..end]
            .parse::<u32>()
            .is_ok_and(|v| (1..=120).contains(&v))
            && keyword_within(text, (start, end), AGE_KEYWORDS, 3)
    }))
}

/// 8–17 digit run near account vocabulary.
pub fn bank_account() -> PatternRecognizer {
    must("bank_account", EntityType::BankAccount, r"\b\d{8,17}\b")
        .with_filter(keyword_gate(ACCOUNT_KEYWORDS, 6))
}

/// Two letters, two digits, then 11–30 alphanumerics. Structural check only.
pub fn iban() -> PatternRecognizer {
    must("iban", EntityType::Iban, r"\b[A-Z]{2}\d{2}[A-Za-z0-9]{11,30}\b")
}

/// The built-in structured recognizer for one type, if that type is
/// pattern-detectable.
pub fn for_type(entity_type: EntityType) -> Option<PatternRecognizer> {
    match entity_type {
        EntityType::Email => Some(email()),
        EntityType::Ssn => Some(ssn()),
        EntityType::CreditCard => Some(credit_card()),
        EntityType::IpAddress => Some(ip_address()),
        EntityType::Phone => Some(phone()),
        EntityType::DateOfBirth => Some(date_of_birth()),
        EntityType::Salary => Some(salary()),
        EntityType::Age => Some(age()),
        EntityType::BankAccount => Some(bank_account()),
        EntityType::Iban => Some(iban()),
        _ => None,
    }
}

/// Fixed registration order of the built-in structured recognizers; this
/// order is the final overlap tie-break.
pub const STRUCTURED_ORDER: [EntityType; 10] = [
    EntityType::Email,
    EntityType::Ssn,
    EntityType::CreditCard,
    EntityType::IpAddress,
    EntityType::Phone,
    EntityType::DateOfBirth,
    EntityType::Salary,
    EntityType::Age,
    EntityType::BankAccount,
    EntityType::Iban,
];
