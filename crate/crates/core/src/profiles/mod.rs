//! Researcher profile data model, fixture loading and publication selection.

mod source;

pub use source::{fetch_profiles, ProfileSource, RawProfiles, CACHE_DIR_ENV};

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::Datelike;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Publications fed into each document unless configured otherwise.
pub const DEFAULT_PUBLICATION_LIMIT: usize = 50;

/// Earliest accepted publication year.
pub const MIN_YEAR: i32 = 1900;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed profile file {path}: {message}")]
    MalformedFile { path: PathBuf, message: String },
    #[error("schema violation at {location}: {message}")]
    SchemaViolation { location: String, message: String },
    #[error("duplicate researcher id {0:?}")]
    DuplicateId(String),
    #[error("unsupported profile source {0:?}")]
    UnsupportedSource(String),
    #[error("network unavailable for {0}")]
    NetworkUnavailable(String),
}

impl ProfileError {
    fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        ProfileError::SchemaViolation {
            location: location.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Publication {
    pub title: String,
    /// May be empty; an empty abstract contributes nothing.
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub year: i32,
    pub num_citations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResearcherProfile {
    pub id: String,
    pub name: String,
    pub affiliation: String,
    pub position: String,
    pub total_citations: u64,
    pub scholar_url: String,
    pub keywords: Vec<String>,
    pub publications: Vec<Publication>,
}

/// Validated, immutable collection of researchers.
///
/// The order of `researchers` is the canonical index order for every
/// downstream array (matrix columns, coordinates, labels).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileSet {
    source_label: String,
    researchers: Vec<ResearcherProfile>,
}

impl ProfileSet {
    pub fn new(
        source_label: impl Into<String>,
        researchers: Vec<ResearcherProfile>,
    ) -> Result<Self, ProfileError> {
        validate_researchers(&researchers, current_year())?;
        Ok(ProfileSet {
            source_label: source_label.into(),
            researchers,
        })
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn researchers(&self) -> &[ResearcherProfile] {
        &self.researchers
    }

    pub fn len(&self) -> usize {
        self.researchers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.researchers.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile set serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ProfileError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ProfileError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Loads and validates a profile fixture.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<ProfileSet, ProfileError> {
    let raw = source::read_profile_file(path.as_ref())?;
    ProfileSet::new(raw.source_label, raw.researchers)
}

fn current_year() -> i32 {
    chrono::Utc::now().year()
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

fn validate_researchers(
    researchers: &[ResearcherProfile],
    current_year: i32,
) -> Result<(), ProfileError> {
    if researchers.len() < 2 {
        return Err(ProfileError::schema(
            "researchers",
            format!(
                "at least 2 researchers required, found {}",
                researchers.len()
            ),
        ));
    }
    let mut seen = HashSet::new();
    for (i, r) in researchers.iter().enumerate() {
        let at = |field: &str| format!("researchers[{i}].{field}");
        if !valid_id(&r.id) {
            return Err(ProfileError::schema(
                at("id"),
                format!("{:?} does not match ^[a-z0-9-]+$", r.id),
            ));
        }
        if !seen.insert(r.id.as_str()) {
            return Err(ProfileError::DuplicateId(r.id.clone()));
        }
        if r.name.trim().is_empty() {
            return Err(ProfileError::schema(at("name"), "empty name"));
        }
        if !(r.scholar_url.starts_with("https://") || r.scholar_url.starts_with("http://")) {
            return Err(ProfileError::schema(
                at("scholar_url"),
                format!("{:?} is not an http(s) URL", r.scholar_url),
            ));
        }
        for (j, p) in r.publications.iter().enumerate() {
            if p.title.trim().is_empty() {
                return Err(ProfileError::schema(
                    at(&format!("publications[{j}].title")),
                    "empty title",
                ));
            }
            if p.year < MIN_YEAR || p.year > current_year + 1 {
                return Err(ProfileError::schema(
                    at(&format!("publications[{j}].year")),
                    format!("year {} outside [{MIN_YEAR}, {}]", p.year, current_year + 1),
                ));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PublicationOrder {
    MostCited,
    MostRecent,
}

impl PublicationOrder {
    pub const ALL: [PublicationOrder; 2] =
        [PublicationOrder::MostCited, PublicationOrder::MostRecent];

    pub fn as_str(self) -> &'static str {
        match self {
            PublicationOrder::MostCited => "most_cited",
            PublicationOrder::MostRecent => "most_recent",
        }
    }
}

impl fmt::Display for PublicationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which publications of a profile feed the embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PublicationSetMode {
    pub order: PublicationOrder,
    limit: usize,
}

impl PublicationSetMode {
    /// Returns `None` when `limit` is zero.
    pub fn new(order: PublicationOrder, limit: usize) -> Option<Self> {
        (limit >= 1).then_some(PublicationSetMode { order, limit })
    }

    pub fn with_default_limit(order: PublicationOrder) -> Self {
        PublicationSetMode {
            order,
            limit: DEFAULT_PUBLICATION_LIMIT,
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }
}

fn compare_publications(order: PublicationOrder, a: &Publication, b: &Publication) -> Ordering {
    let primary = match order {
        PublicationOrder::MostCited => b
            .num_citations
            .cmp(&a.num_citations)
            .then(b.year.cmp(&a.year)),
        PublicationOrder::MostRecent => b
            .year
            .cmp(&a.year)
            .then(b.num_citations.cmp(&a.num_citations)),
    };
    // The abstract is the last key so equal multisets always sort identically.
    primary
        .then_with(|| a.title.cmp(&b.title))
        .then_with(|| a.abstract_text.cmp(&b.abstract_text))
}

/// Picks up to `mode.limit()` publications in the mode's sort order.
pub fn select_publications(
    profile: &ResearcherProfile,
    mode: PublicationSetMode,
) -> Vec<Publication> {
    let mut pubs: Vec<&Publication> = profile.publications.iter().collect();
    pubs.sort_by(|a, b| compare_publications(mode.order, a, b));
    pubs.into_iter().take(mode.limit).cloned().collect()
}
