//! REST client for the public occupational database.
//!
//! Fetches the skills list and raw qualification category for one occupation
//! id from `GET {base_url}/occupations/{id}`. Transient failures (transport
//! errors and 5xx responses) are retried with capped exponential backoff;
//! callers own rate limiting.

use super::CorpusError;
use serde::Deserialize;
use std::time::Duration;

/// Skills and raw qualification fetched for one occupation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationDetails {
    pub skills: Vec<String>,
    pub qualification_raw: String,
}

#[derive(Deserialize)]
struct DetailsBody {
    skills: Vec<String>,
    qualification: String,
}

/// Client with retry policy for the occupations endpoint.
#[derive(Debug, Clone)]
pub struct BerufenetClient {
    base_url: String,
    max_retries: u32,
    base_delay: Duration,
}

/// Backoff is doubled per attempt and capped here.
const MAX_DELAY: Duration = Duration::from_secs(2);

impl BerufenetClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            max_retries: 3,
            base_delay: Duration::from_millis(100),
        }
    }

    /// Override the retry policy (used by tests to keep backoff short).
    pub fn with_retry_policy(mut self, max_retries: u32, base_delay: Duration) -> Self {
        self.max_retries = max_retries;
        self.base_delay = base_delay;
        self
    }

    pub fn fetch_occupation_details(
        &self,
        occupation_id: &str,
    ) -> Result<OccupationDetails, CorpusError> {
        let url = format!(
            "{}/occupations/{}",
            self.base_url.trim_end_matches('/'),
            occupation_id
        );
        let mut attempt = 0;
        loop {
            match ureq::get(&url).call() {
                Ok(response) => {
                    let body: DetailsBody = response
                        .into_json()
                        .map_err(|e| CorpusError::SchemaMismatch(e.to_string()))?;
                    return Ok(OccupationDetails {
                        skills: body.skills,
                        qualification_raw: body.qualification,
                    });
                }
                Err(ureq::Error::Status(status, _)) if status < 500 => {
                    return Err(CorpusError::HttpError { status, url });
                }
                Err(err) => {
                    if attempt >= self.max_retries {
                        let status = match err {
                            ureq::Error::Status(status, _) => status,
                            ureq::Error::Transport(_) => 0,
                        };
                        return Err(CorpusError::HttpError { status, url });
                    }
                    let delay = self
                        .base_delay
                        .saturating_mul(1 << attempt.min(8))
                        .min(MAX_DELAY);
                    std::thread::sleep(delay);
                    attempt += 1;
                }
            }
        }
    }
}

/// One-shot fetch with the default retry policy.
pub fn fetch_occupation_details(
    base_url: &str,
    occupation_id: &str,
) -> Result<OccupationDetails, CorpusError> {
    BerufenetClient::new(base_url).fetch_occupation_details(occupation_id)
}
