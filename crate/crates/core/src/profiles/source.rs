use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{ProfileError, ResearcherProfile};

/// Environment variable naming the on-disk cache for the Scholar source.
pub const CACHE_DIR_ENV: &str = "ATLAS_CACHE_DIR";

/// Unvalidated records as they appear in a fixture file.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProfiles {
    pub source_label: String,
    pub researchers: Vec<ResearcherProfile>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProfileSource {
    /// `file:<path>`
    File(PathBuf),
    /// `scholar:<url>[,<url>...]`
    Scholar(Vec<String>),
}

impl ProfileSource {
    pub fn parse(descriptor: &str) -> Result<Self, ProfileError> {
        if let Some(path) = descriptor.strip_prefix("file:") {
            if path.is_empty() {
                return Err(ProfileError::UnsupportedSource(descriptor.to_string()));
            }
            return Ok(ProfileSource::File(PathBuf::from(path)));
        }
        if let Some(list) = descriptor.strip_prefix("scholar:") {
            let urls: Vec<String> = list
                .split(',')
                .map(str::trim)
                .filter(|u| !u.is_empty())
                .map(String::from)
                .collect();
            if urls.is_empty() {
                return Err(ProfileError::UnsupportedSource(descriptor.to_string()));
            }
            return Ok(ProfileSource::Scholar(urls));
        }
        Err(ProfileError::UnsupportedSource(descriptor.to_string()))
    }
}

/// Fetches raw profile records from a source descriptor.
///
/// `file:` sources read the fixture directly. `scholar:` sources are served
/// only from the cache directory named by [`CACHE_DIR_ENV`]; this build has
/// no network client, so any uncached URL yields `NetworkUnavailable`.
pub fn fetch_profiles(descriptor: &str) -> Result<RawProfiles, ProfileError> {
    match ProfileSource::parse(descriptor)? {
        ProfileSource::File(path) => read_profile_file(&path),
        ProfileSource::Scholar(urls) => {
            let cache = std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from);
            let mut researchers = Vec::with_capacity(urls.len());
            for url in &urls {
                let cached = cache
                    .as_deref()
                    .map(|dir| dir.join(cache_file_name(url)))
                    .filter(|p| p.is_file())
                    .ok_or_else(|| ProfileError::NetworkUnavailable(url.clone()))?;
                let text = read(&cached)?;
                let record: ResearcherProfile =
                    serde_json::from_str(&text).map_err(|e| ProfileError::MalformedFile {
                        path: cached.clone(),
                        message: e.to_string(),
                    })?;
                researchers.push(record);
            }
            Ok(RawProfiles {
                source_label: "scholar".to_string(),
                researchers,
            })
        }
    }
}

/// Cache entries are keyed by the SHA-256 of the profile URL.
pub(crate) fn cache_file_name(url: &str) -> String {
    format!("{}.json", hex::encode(Sha256::digest(url.as_bytes())))
}

fn read(path: &Path) -> Result<String, ProfileError> {
    std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_profile_file(path: &Path) -> Result<RawProfiles, ProfileError> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ProfileError::MalformedFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    serde_path_to_error::deserialize(value).map_err(|e| ProfileError::SchemaViolation {
        location: e.path().to_string(),
        message: e.inner().to_string(),
    })
}
