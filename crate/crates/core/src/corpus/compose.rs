//! Separator-token query composition.
//!
//! Every text that gets embedded — training anchors, indexed catalogue
//! entries, and live queries — is rendered into the same three-slot
//! structure:
//!
//! ```text
//! [JOB_TITLE_SEP] {title} [QUALIFICATION_SEP] {qualification} [SKILL_SEP] {skills}
//! ```
//!
//! Empty slots leave the separator in place so the structure is always
//! parseable back into exactly three slots.

use super::{CorpusError, QualificationGroup};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const JOB_TITLE_SEP: &str = "[JOB_TITLE_SEP]";
pub const QUALIFICATION_SEP: &str = "[QUALIFICATION_SEP]";
pub const SKILL_SEP: &str = "[SKILL_SEP]";

/// Appended to the qualification slot for codes with a managerial 4th digit.
pub const MANAGEMENT_SUFFIX: &str = " with management duties";

/// Joins individual skills inside the skill slot.
pub const SKILL_DELIMITER: &str = "; ";

/// True if `text` embeds one of the reserved separator tokens. Inputs are
/// validated against this upstream so composed queries stay parseable.
pub fn contains_separator(text: &str) -> bool {
    text.contains(JOB_TITLE_SEP) || text.contains(QUALIFICATION_SEP) || text.contains(SKILL_SEP)
}

/// Rendered slot strings per qualification group.
///
/// Defaults are lowercase English labels; a translated table can be loaded
/// from config and passed to [`compose_query_with`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QualificationLabels {
    labels: BTreeMap<QualificationGroup, String>,
}

impl Default for QualificationLabels {
    fn default() -> Self {
        let labels = [
            (QualificationGroup::Helper, "helper job"),
            (QualificationGroup::VocationalTraining, "vocational training"),
            (
                QualificationGroup::AdditionalVocationalTraining,
                "additional vocational training",
            ),
            (QualificationGroup::UniversityDegree, "university degree"),
            (QualificationGroup::CivilServant, "civil servant"),
            (QualificationGroup::ArmedForces, "armed forces"),
            (QualificationGroup::Meister, "meister"),
            (QualificationGroup::Techniker, "techniker"),
            (QualificationGroup::Ausuebungsformen, "ausübungsformen"),
        ]
        .into_iter()
        .map(|(g, s)| (g, s.to_string()))
        .collect();
        Self { labels }
    }
}

impl QualificationLabels {
    /// Default labels overridden by the given entries.
    pub fn with_overrides(overrides: BTreeMap<QualificationGroup, String>) -> Self {
        let mut base = Self::default();
        base.labels.extend(overrides);
        base
    }

    pub fn label(&self, group: QualificationGroup) -> &str {
        self.labels
            .get(&group)
            .map(String::as_str)
            .unwrap_or_default()
    }
}

/// A query rendered into the fixed three-slot separator structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComposedQuery(String);

/// Slot contents recovered from a composed query, outer whitespace trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySlots {
    pub title: String,
    pub qualification: String,
    pub skills: String,
}

impl ComposedQuery {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Split the query back into its three slots.
    ///
    /// Returns `None` when the separator structure is missing or out of
    /// order, which cannot happen for values produced by [`compose_query`].
    pub fn slots(&self) -> Option<QuerySlots> {
        let rest = self.0.strip_prefix(JOB_TITLE_SEP)?;
        let (title, rest) = rest.split_once(QUALIFICATION_SEP)?;
        let (qualification, skills) = rest.split_once(SKILL_SEP)?;
        Some(QuerySlots {
            title: title.trim().to_string(),
            qualification: qualification.trim().to_string(),
            skills: skills.trim().to_string(),
        })
    }
}

impl std::fmt::Display for ComposedQuery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Compose a query with the default qualification labels.
pub fn compose_query(
    title: &str,
    qualification: Option<QualificationGroup>,
    managerial: bool,
    skills: &[String],
) -> Result<ComposedQuery, CorpusError> {
    compose_query_with(
        &QualificationLabels::default(),
        title,
        qualification,
        managerial,
        skills,
    )
}

/// Compose a query with explicit slot labels.
///
/// The qualification slot carries [`MANAGEMENT_SUFFIX`] when `managerial`
/// is set and a qualification is present; skills are joined with
/// [`SKILL_DELIMITER`]. Callers must not pass text containing separator
/// tokens (catalogue validation rejects such records upstream).
pub fn compose_query_with(
    labels: &QualificationLabels,
    title: &str,
    qualification: Option<QualificationGroup>,
    managerial: bool,
    skills: &[String],
) -> Result<ComposedQuery, CorpusError> {
    let title = title.trim();
    if title.is_empty() {
        return Err(CorpusError::EmptyTitle);
    }
    let qualification_slot = match qualification {
        Some(group) if managerial => format!("{}{}", labels.label(group), MANAGEMENT_SUFFIX),
        Some(group) => labels.label(group).to_string(),
        None => String::new(),
    };
    let skills_slot = skills.join(SKILL_DELIMITER);
    Ok(ComposedQuery(format!(
        "{JOB_TITLE_SEP} {title} {QUALIFICATION_SEP} {qualification_slot} {SKILL_SEP} {skills_slot}"
    )))
}
