//! JSON Lines catalogue loading.
//!
//! One record per line: `term` (string), `kldb` (string), `qualification`
//! (string), `skills` (array of strings, optional), `dqr` (integer,
//! optional). Unknown fields are ignored.

use super::{CorpusError, OccupationRecord};
use serde::Deserialize;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Lenient collects invalid lines into a rejects report; FailFast aborts on
/// the first invalid line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    #[default]
    Lenient,
    FailFast,
}

/// A line that failed validation, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
}

/// Result of a lenient catalogue load.
#[derive(Debug, Default)]
pub struct CatalogueLoad {
    pub records: Vec<OccupationRecord>,
    pub rejects: Vec<RejectedLine>,
}

#[derive(Deserialize)]
struct RawRecord {
    term: String,
    kldb: String,
    qualification: String,
    #[serde(default)]
    skills: Vec<String>,
    #[serde(default)]
    dqr: Option<i64>,
}

/// Load a JSON Lines catalogue, preserving record order.
///
/// Blank lines are skipped. In lenient mode a well-formed record is never
/// dropped because of malformed neighbours.
pub fn load_catalogue(path: &Path, mode: LoadMode) -> Result<CatalogueLoad, CorpusError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut out = CatalogueLoad::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(record) => out.records.push(record),
            Err(err) => match mode {
                LoadMode::Lenient => out.rejects.push(RejectedLine {
                    line: line_no,
                    reason: err.to_string(),
                }),
                LoadMode::FailFast => {
                    return Err(CorpusError::MalformedRecord(format!(
                        "line {line_no}: {err}"
                    )))
                }
            },
        }
    }
    Ok(out)
}

fn parse_line(line: &str) -> Result<OccupationRecord, CorpusError> {
    let raw: RawRecord = serde_json::from_str(line)
        .map_err(|e| CorpusError::MalformedRecord(format!("invalid JSON: {e}")))?;
    OccupationRecord::from_raw_parts(&raw.term, &raw.kldb, &raw.qualification, raw.skills, raw.dqr)
}

/// Write records back out in the catalogue line format.
pub fn write_catalogue(path: &Path, records: &[OccupationRecord]) -> Result<(), CorpusError> {
    let mut file = std::io::BufWriter::new(File::create(path)?);
    for record in records {
        let line = serde_json::json!({
            "term": record.term,
            "kldb": record.code.as_str(),
            "qualification": record.qualification_raw,
            "skills": record.skills,
            "dqr": record.dqr_level,
        });
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_single_record() {
        let f = write_temp(
            r#"{"term":"Kanalbauer","kldb":"32252","qualification":"Duale Ausbildung","skills":["tunnelbau"]}"#,
        );
        let load = load_catalogue(f.path(), LoadMode::Lenient).unwrap();
        assert_eq!(load.records.len(), 1);
        assert!(load.rejects.is_empty());
        assert_eq!(load.records[0].code.as_str(), "32252");
    }

    #[test]
    fn rejects_carry_line_numbers() {
        let f = write_temp(concat!(
            r#"{"term":"A","kldb":"32252","qualification":"Meister"}"#,
            "\n",
            r#"{"term":"B","kldb":"ABCDE","qualification":"Meister"}"#,
            "\n",
            r#"{"term":"C","kldb":"83181","qualification":"Helfer-/Anlerntätigkeiten"}"#,
            "\n",
        ));
        let load = load_catalogue(f.path(), LoadMode::Lenient).unwrap();
        assert_eq!(load.records.len(), 2);
        assert_eq!(load.rejects.len(), 1);
        assert_eq!(load.rejects[0].line, 2);
        assert!(load.rejects[0].reason.contains("five decimal digits"));
    }

    #[test]
    fn empty_file_is_empty_load() {
        let f = write_temp("");
        let load = load_catalogue(f.path(), LoadMode::Lenient).unwrap();
        assert!(load.records.is_empty());
        assert!(load.rejects.is_empty());
    }

    #[test]
    fn fail_fast_aborts_on_first_bad_line() {
        let f = write_temp(concat!(
            r#"{"term":"A","kldb":"99999","qualification":"Meister"}"#,
            "\n",
        ));
        let err = load_catalogue(f.path(), LoadMode::FailFast).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord(_)));
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let f = write_temp(
            r#"{"term":"A","kldb":"32252","qualification":"Meister","extra":42,"id":"B123"}"#,
        );
        let load = load_catalogue(f.path(), LoadMode::Lenient).unwrap();
        assert_eq!(load.records.len(), 1);
    }

    #[test]
    fn write_then_load_round_trips() {
        let records = vec![
            OccupationRecord::from_raw_parts(
                "Kanalbauer",
                "32252",
                "Duale Ausbildung",
                vec!["tunnelbau".into()],
                Some(4),
            )
            .unwrap(),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalogue.jsonl");
        write_catalogue(&path, &records).unwrap();
        let load = load_catalogue(&path, LoadMode::FailFast).unwrap();
        assert_eq!(load.records, records);
    }
}
