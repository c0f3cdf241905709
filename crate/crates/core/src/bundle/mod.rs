//! Static data bundle: every precomputed variant, layout, clustering and
//! query index in one canonical JSON document.
//!
//! Canonical form: UTF-8, object keys sorted, floats printed in
//! shortest round-trip form, no timestamps or host data. Saving the same
//! bundle twice yields identical bytes.

mod build;
mod schema;

pub use build::{
    build_bundle, build_bundle_with, variant_documents, BuildOptions, BuildOutput,
    VariantArtifacts, VariantConfig, K_MAX, K_MIN, STEMMER_NAME,
};
pub use schema::*;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::embed::EmbedError;
use crate::gmm::GmmError;
use crate::pca::PcaError;
use crate::profiles::PublicationOrder;
use crate::query::QueryIndex;
use crate::sparse::SparseVector;
use crate::textproc::EmphasisLevel;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("variant {variant}: {source}")]
    Embed {
        variant: String,
        #[source]
        source: EmbedError,
    },
    #[error("variant {variant}: pca: {source}")]
    Pca {
        variant: String,
        #[source]
        source: PcaError,
    },
    #[error("variant {variant}: gmm k={k}: {source}")]
    Gmm {
        variant: String,
        k: usize,
        #[source]
        source: GmmError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed bundle: {0}")]
    MalformedFile(String),
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersionMismatch { found: u64 },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
}

/// Canonical serialized bytes of a bundle.
pub fn to_canonical_json(bundle: &AtlasBundle) -> Result<String, BundleError> {
    validate(bundle)?;
    // Going through `Value` sorts every object's keys.
    let value =
        serde_json::to_value(bundle).map_err(|e| BundleError::MalformedFile(e.to_string()))?;
    let mut text =
        serde_json::to_string(&value).map_err(|e| BundleError::MalformedFile(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn save_bundle(bundle: &AtlasBundle, path: impl AsRef<Path>) -> Result<(), BundleError> {
    let path = path.as_ref();
    let text = to_canonical_json(bundle)?;
    std::fs::write(path, text).map_err(|source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<AtlasBundle, BundleError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_bundle(&text)
}

pub fn parse_bundle(text: &str) -> Result<AtlasBundle, BundleError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| BundleError::MalformedFile(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| BundleError::MalformedFile("missing integer schema_version".into()))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(BundleError::SchemaVersionMismatch { found: version });
    }
    let bundle: AtlasBundle = serde_path_to_error::deserialize(value)
        .map_err(|e| BundleError::MalformedFile(format!("{}: {}", e.path(), e.inner())))?;
    validate(&bundle)?;
    Ok(bundle)
}

/// Query index of one variant, read back from the serialized form.
pub fn query_index(bundle: &AtlasBundle, variant: &str) -> Result<QueryIndex<f64>, BundleError> {
    let v = bundle
        .variant(variant)
        .ok_or_else(|| BundleError::UnknownVariant(variant.to_string()))?;
    let columns: Vec<SparseVector<f64>> = v
        .query_index
        .columns
        .iter()
        .map(|c| SparseVector::from_sorted(c.indices.iter().copied().zip(c.values.iter().copied())))
        .collect();
    Ok(QueryIndex::from_unit_columns(
        bundle.vocabulary.clone(),
        v.query_index.idf.clone(),
        columns,
    ))
}

fn violation(msg: impl Into<String>) -> BundleError {
    BundleError::InvariantViolation(msg.into())
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// Checks every structural invariant of a bundle.
pub fn validate(bundle: &AtlasBundle) -> Result<(), BundleError> {
    if bundle.schema_version != SCHEMA_VERSION {
        return Err(BundleError::SchemaVersionMismatch {
            found: u64::from(bundle.schema_version),
        });
    }
    let n = bundle.researchers.len();
    if n < 2 {
        return Err(violation(format!("{n} researcher(s), need at least 2")));
    }
    let mut ids = HashSet::new();
    for r in &bundle.researchers {
        if !ids.insert(r.id.as_str()) {
            return Err(violation(format!("duplicate researcher id {:?}", r.id)));
        }
    }
    if !bundle.vocabulary.windows(2).all(|w| w[0] < w[1]) {
        return Err(violation("vocabulary is not sorted and unique"));
    }
    let c = &bundle.constants;
    if !(c.ellipse_radius > 0.0 && c.ellipse_radius.is_finite()) || c.k_min < 1 || c.k_max < c.k_min
    {
        return Err(violation("invalid constants"));
    }

    let mut expected: Vec<String> = PublicationOrder::ALL
        .iter()
        .flat_map(|&o| EmphasisLevel::ALL.iter().map(move |&e| variant_id(o, e)))
        .collect();
    let mut found: Vec<String> = bundle.variants.iter().map(|v| v.id.clone()).collect();
    expected.sort();
    found.sort();
    if expected != found {
        return Err(violation(format!(
            "variants {found:?} do not match the expected set {expected:?}"
        )));
    }

    let flagged: Vec<bool> = bundle
        .researchers
        .iter()
        .map(|r| r.insufficient_data)
        .collect();
    for v in &bundle.variants {
        validate_variant(bundle, v, &flagged)
            .map_err(|e| violation(format!("variant {}: {e}", v.id)))?;
    }
    Ok(())
}

fn validate_variant(
    bundle: &AtlasBundle,
    v: &VariantRecord,
    flagged: &[bool],
) -> Result<(), String> {
    let n = flagged.len();
    if v.id != variant_id(v.publication_set, v.emphasis) {
        return Err(format!(
            "id does not match configuration {}",
            variant_id(v.publication_set, v.emphasis)
        ));
    }
    if v.coords.len() != n {
        return Err(format!(
            "coords has {} entries for {n} researchers",
            v.coords.len()
        ));
    }
    if !v.coords.iter().all(|c| finite(c)) {
        return Err("non-finite coordinate".into());
    }
    if !v.explained_variance.iter().all(|r| (0.0..=1.0).contains(r))
        || v.explained_variance.iter().sum::<f64>() > 1.0 + UNIT_TOL
    {
        return Err("explained variance outside [0, 1]".into());
    }
    if !finite(&v.eigenvalues) || v.eigenvalues[0] < v.eigenvalues[1] || v.eigenvalues[1] < 0.0 {
        return Err("eigenvalues must be finite, non-negative and non-increasing".into());
    }

    let usable: Vec<&[f64; 2]> = v
        .coords
        .iter()
        .zip(flagged)
        .filter(|(_, &f)| !f)
        .map(|(c, _)| c)
        .collect();
    if !usable.is_empty() {
        let m = usable.len() as f64;
        let cx = usable.iter().map(|c| c[0]).sum::<f64>() / m;
        let cy = usable.iter().map(|c| c[1]).sum::<f64>() / m;
        for (i, c) in v.coords.iter().enumerate().filter(|(i, _)| flagged[*i]) {
            if (c[0] - cx).abs() > UNIT_TOL || (c[1] - cy).abs() > UNIT_TOL {
                return Err(format!(
                    "insufficient-data researcher {i} is not at the layout centroid"
                ));
            }
        }
    }

    let k_min = bundle.constants.k_min;
    let expected_k: Vec<usize> = (k_min..k_min + v.k_values.len()).collect();
    if v.k_values.is_empty()
        || v.k_values != expected_k
        || *v.k_values.last().unwrap() > bundle.constants.k_max
    {
        return Err(format!(
            "k_values {:?} are not a contiguous range from {k_min}",
            v.k_values
        ));
    }
    if v.clusterings.iter().map(|c| c.k).collect::<Vec<_>>() != v.k_values {
        return Err("clusterings do not follow k_values".into());
    }
    for cl in &v.clusterings {
        let k = cl.k;
        if cl.labels.len() != n {
            return Err(format!(
                "k={k}: labels has {} entries for {n} researchers",
                cl.labels.len()
            ));
        }
        for (i, (&label, &flag)) in cl.labels.iter().zip(flagged).enumerate() {
            let ok = if flag {
                label == -1
            } else {
                label >= 0 && (label as usize) < k
            };
            if !ok {
                return Err(format!("k={k}: invalid label {label} for researcher {i}"));
            }
        }
        if cl.components.len() != k || cl.ellipses.len() != k {
            return Err(format!("k={k}: expected {k} components and ellipses"));
        }
        let weight_sum: f64 = cl.components.iter().map(|c| c.weight).sum();
        if (weight_sum - 1.0).abs() > UNIT_TOL {
            return Err(format!("k={k}: component weights sum to {weight_sum}"));
        }
        for comp in &cl.components {
            let [[a, b], [b2, d]] = comp.covariance;
            if !finite(&[comp.weight, comp.mean[0], comp.mean[1], a, b, b2, d])
                || b != b2
                || a <= 0.0
                || a * d - b * b <= 0.0
            {
                return Err(format!("k={k}: invalid component"));
            }
        }
        for e in &cl.ellipses {
            if !finite(&[
                e.center[0],
                e.center[1],
                e.semi_axes[0],
                e.semi_axes[1],
                e.angle,
            ]) || e.semi_axes[0] < e.semi_axes[1]
                || e.semi_axes[1] <= 0.0
                || !(0.0..std::f64::consts::PI).contains(&e.angle)
            {
                return Err(format!("k={k}: invalid ellipse"));
            }
        }
        if !cl.log_likelihood.is_finite() {
            return Err(format!("k={k}: non-finite log-likelihood"));
        }
    }

    let qi = &v.query_index;
    if qi.idf.len() != bundle.vocabulary.len() {
        return Err(format!(
            "query index has {} idf values for {} terms",
            qi.idf.len(),
            bundle.vocabulary.len()
        ));
    }
    if !qi.idf.iter().all(|&x| x.is_finite() && x >= 0.0) {
        return Err("idf values must be finite and non-negative".into());
    }
    if qi.columns.len() != n {
        return Err(format!(
            "query index has {} columns for {n} researchers",
            qi.columns.len()
        ));
    }
    for (r, col) in qi.columns.iter().enumerate() {
        if col.indices.len() != col.values.len() {
            return Err(format!("column {r}: indices and values differ in length"));
        }
        if !col.indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("column {r}: indices not strictly increasing"));
        }
        if col
            .indices
            .iter()
            .any(|&i| i >= qi.idf.len() || qi.idf[i] == 0.0)
        {
            return Err(format!("column {r}: entry outside the variant vocabulary"));
        }
        if !col.values.iter().all(|&x| x.is_finite() && x > 0.0) {
            return Err(format!("column {r}: values must be positive and finite"));
        }
        if !col.values.is_empty() {
            let norm = col.values.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(format!("column {r}: norm {norm} is not 1"));
            }
        }
    }
    let present = qi.idf.iter().filter(|&&x| x > 0.0).count();
    if present != v.vocabulary_size {
        return Err(format!(
            "vocabulary_size {} but {present} terms carry idf",
            v.vocabulary_size
        ));
    }
    Ok(())
}
