//! Occupational catalogue: KldB 2010 codes, qualification consolidation,
//! and separator-token query composition.
//!
//! The KldB 2010 (Klassifikation der Berufe) encodes an occupation as five
//! decimal digits. Each prefix of the code is itself a class: digit 1 is the
//! occupational area, digits 1-2 the main group, 1-3 the group, 1-4 the
//! subgroup, and the full code the occupation type. The fifth digit carries
//! the requirement level (1 helper, 2 specialist, 3 complex specialist,
//! 4 highly complex) and a fourth digit of 9 flags supervisory or managerial
//! duties.

mod berufenet;
mod catalogue;
mod compose;

pub use berufenet::{fetch_occupation_details, BerufenetClient, OccupationDetails};
pub use catalogue::{load_catalogue, write_catalogue, CatalogueLoad, LoadMode, RejectedLine};
pub use compose::{
    compose_query, compose_query_with, contains_separator, ComposedQuery, QualificationLabels,
    QuerySlots, JOB_TITLE_SEP, MANAGEMENT_SUFFIX, QUALIFICATION_SEP, SKILL_DELIMITER, SKILL_SEP,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while ingesting or composing catalogue data.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("KldB code must be exactly five decimal digits, got {0:?}")]
    NotFiveDigits(String),

    #[error("KldB requirement digit must be 1-4, got '{0}'")]
    RequirementOutOfRange(char),

    #[error("unknown qualification category {0:?}")]
    UnknownCategory(String),

    #[error("job title is empty")]
    EmptyTitle,

    #[error("malformed record: {0}")]
    MalformedRecord(String),

    #[error("catalogue I/O failed: {0}")]
    IoFailure(#[from] std::io::Error),

    #[error("occupation service returned status {status} for {url}")]
    HttpError { status: u16, url: String },

    #[error("occupation service response did not match the expected shape: {0}")]
    SchemaMismatch(String),
}

/// A validated 5-digit KldB 2010 occupation code.
///
/// All hierarchy levels are prefixes of the raw digit string, so the code is
/// stored once and sliced on access.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KldbCode {
    raw: String,
}

impl KldbCode {
    /// Parse and validate a raw code string.
    pub fn parse(raw: &str) -> Result<Self, CorpusError> {
        if raw.len() != 5 || !raw.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CorpusError::NotFiveDigits(raw.to_string()));
        }
        let req = raw.as_bytes()[4] as char;
        if !('1'..='4').contains(&req) {
            return Err(CorpusError::RequirementOutOfRange(req));
        }
        Ok(Self {
            raw: raw.to_string(),
        })
    }

    /// The full 5-digit code string.
    pub fn as_str(&self) -> &str {
        &self.raw
    }

    /// Occupational area (digit 1).
    pub fn area(&self) -> u8 {
        self.raw.as_bytes()[0] - b'0'
    }

    /// Main group: 2-digit prefix.
    pub fn main_group(&self) -> &str {
        &self.raw[..2]
    }

    /// Group: 3-digit prefix.
    pub fn group(&self) -> &str {
        &self.raw[..3]
    }

    /// Subgroup: 4-digit prefix.
    pub fn subgroup(&self) -> &str {
        &self.raw[..4]
    }

    /// Occupation type: the full 5-digit code.
    pub fn type_code(&self) -> &str {
        &self.raw
    }

    /// Requirement level 1-4 (digit 5).
    pub fn requirement_level(&self) -> u8 {
        self.raw.as_bytes()[4] - b'0'
    }

    /// True when digit 4 is 9: supervisors at requirement levels 2-3,
    /// managers at level 4.
    pub fn managerial(&self) -> bool {
        self.raw.as_bytes()[3] == b'9'
    }
}

impl TryFrom<String> for KldbCode {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<KldbCode> for String {
    fn from(code: KldbCode) -> String {
        code.raw
    }
}

impl std::fmt::Display for KldbCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Parse a raw 5-digit KldB code string.
pub fn parse_kldb_code(raw: &str) -> Result<KldbCode, CorpusError> {
    KldbCode::parse(raw)
}

/// Consolidated qualification groups used in query composition.
///
/// The catalogue carries a finer-grained set of raw categories; each raw
/// category maps onto exactly one of these groups. Unknown raw categories
/// are rejected rather than guessed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualificationGroup {
    Helper,
    VocationalTraining,
    AdditionalVocationalTraining,
    UniversityDegree,
    CivilServant,
    ArmedForces,
    Meister,
    Techniker,
    Ausuebungsformen,
}

impl QualificationGroup {
    pub const ALL: [QualificationGroup; 9] = [
        QualificationGroup::Helper,
        QualificationGroup::VocationalTraining,
        QualificationGroup::AdditionalVocationalTraining,
        QualificationGroup::UniversityDegree,
        QualificationGroup::CivilServant,
        QualificationGroup::ArmedForces,
        QualificationGroup::Meister,
        QualificationGroup::Techniker,
        QualificationGroup::Ausuebungsformen,
    ];
}

/// Raw BAfA qualification categories and the consolidated group each one
/// belongs to. Lookup is case-insensitive and whitespace-trimmed.
pub const CONSOLIDATION_TABLE: &[(&str, QualificationGroup)] = &[
    ("Helfer-/Anlerntätigkeiten", QualificationGroup::Helper),
    ("Sonstige Ausbildungen", QualificationGroup::VocationalTraining),
    ("Tätigkeiten nach Ausbildung", QualificationGroup::VocationalTraining),
    ("Duale Ausbildung", QualificationGroup::VocationalTraining),
    (
        "Ausbildungen für Menschen mit Behinderungen",
        QualificationGroup::VocationalTraining,
    ),
    (
        "Berufsfachschulausbildungen (rechtlich geregelt)",
        QualificationGroup::VocationalTraining,
    ),
    (
        "Andere Weiterbildungen",
        QualificationGroup::AdditionalVocationalTraining,
    ),
    (
        "Kaufmännische Weiterbildungen",
        QualificationGroup::AdditionalVocationalTraining,
    ),
    (
        "Tätigkeiten nach Weiterbildung",
        QualificationGroup::AdditionalVocationalTraining,
    ),
    (
        "Weiterbildungen (bedingen Hochschulstudium)",
        QualificationGroup::AdditionalVocationalTraining,
    ),
    ("Studienfächer/-gänge", QualificationGroup::UniversityDegree),
    ("Tätigkeiten nach Studium", QualificationGroup::UniversityDegree),
    ("Beamtenausbildungen", QualificationGroup::CivilServant),
    (
        "Tätigkeiten nach Beamtenausbildung",
        QualificationGroup::CivilServant,
    ),
    ("Soldatenausbildungen", QualificationGroup::ArmedForces),
    (
        "Tätigkeiten nach Soldatenausbildung",
        QualificationGroup::ArmedForces,
    ),
    ("Meister", QualificationGroup::Meister),
    ("Techniker", QualificationGroup::Techniker),
    ("Ausübungsformen", QualificationGroup::Ausuebungsformen),
];

/// Map a raw catalogue qualification category onto its consolidated group.
pub fn consolidate_qualification(raw_category: &str) -> Result<QualificationGroup, CorpusError> {
    let needle = raw_category.trim().to_lowercase();
    CONSOLIDATION_TABLE
        .iter()
        .find(|(name, _)| name.to_lowercase() == needle)
        .map(|(_, group)| *group)
        .ok_or_else(|| CorpusError::UnknownCategory(raw_category.to_string()))
}

/// One catalogue entry: a job-title term plus everything needed to compose
/// its training query and to place it in both taxonomies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationRecord {
    pub term: String,
    pub code: KldbCode,
    pub qualification_raw: String,
    pub qualification: QualificationGroup,
    #[serde(default)]
    pub skills: Vec<String>,
    #[serde(default)]
    pub dqr_level: Option<u8>,
}

impl OccupationRecord {
    /// Validate raw catalogue fields into a record.
    ///
    /// Skills are cleaned rather than rejected: entries that are empty after
    /// trimming are dropped and exact (case-sensitive) duplicates are removed,
    /// keeping first occurrences in order.
    pub fn from_raw_parts(
        term: &str,
        kldb: &str,
        qualification_raw: &str,
        skills: Vec<String>,
        dqr_level: Option<i64>,
    ) -> Result<Self, CorpusError> {
        let term = term.trim();
        if term.is_empty() {
            return Err(CorpusError::EmptyTitle);
        }
        if contains_separator(term) {
            return Err(CorpusError::MalformedRecord(
                "term contains a reserved separator token".into(),
            ));
        }
        let code = KldbCode::parse(kldb)?;
        let qualification = consolidate_qualification(qualification_raw)?;
        let mut seen = std::collections::HashSet::new();
        let mut cleaned = Vec::new();
        for skill in skills {
            if skill.trim().is_empty() {
                continue;
            }
            if contains_separator(&skill) {
                return Err(CorpusError::MalformedRecord(
                    "skill contains a reserved separator token".into(),
                ));
            }
            if seen.insert(skill.clone()) {
                cleaned.push(skill);
            }
        }
        let dqr_level = match dqr_level {
            None => None,
            Some(v) if (1..=8).contains(&v) => Some(v as u8),
            Some(v) => {
                return Err(CorpusError::MalformedRecord(format!(
                    "dqr level must be 1-8, got {v}"
                )))
            }
        };
        Ok(Self {
            term: term.to_string(),
            code,
            qualification_raw: qualification_raw.trim().to_string(),
            qualification,
            skills: cleaned,
            dqr_level,
        })
    }

    /// Compose this record's query text with the default slot labels.
    pub fn compose(&self) -> ComposedQuery {
        self.compose_with(&QualificationLabels::default())
    }

    pub fn compose_with(&self, labels: &QualificationLabels) -> ComposedQuery {
        compose_query_with(
            labels,
            &self.term,
            Some(self.qualification),
            self.code.managerial(),
            &self.skills,
        )
        .expect("validated record composes")
    }
}
