//! Serialized form of the atlas bundle. See `docs/bundle-schema.md`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::profiles::PublicationOrder;
use crate::textproc::EmphasisLevel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasBundle {
    pub schema_version: u32,
    pub source_label: String,
    pub seed: u64,
    pub constants: BundleConstants,
    pub text_pipeline: TextPipeline,
    pub researchers: Vec<ResearcherRecord>,
    /// Sorted union of every variant's vocabulary.
    pub vocabulary: Vec<String>,
    pub variants: Vec<VariantRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConstants {
    pub ellipse_radius: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub emphasis_weights: BTreeMap<EmphasisLevel, u64>,
    pub publication_limit: usize,
    pub covariance_floor: f64,
}

/// What a client needs to reproduce query normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextPipeline {
    pub stemmer: String,
    pub stopwords_version: String,
    pub stopwords: Vec<String>,
    pub min_token_length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResearcherRecord {
    pub id: String,
    pub name: String,
    pub affiliation: String,
    pub position: String,
    pub total_citations: u64,
    pub scholar_url: String,
    pub keywords: Vec<String>,
    /// Empty document in at least one variant; placed at the layout
    /// centroid and labelled -1 everywhere.
    pub insufficient_data: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantRecord {
    pub id: String,
    pub emphasis: EmphasisLevel,
    pub publication_set: PublicationOrder,
    pub vocabulary_size: usize,
    pub coords: Vec<[f64; 2]>,
    pub explained_variance: [f64; 2],
    pub eigenvalues: [f64; 2],
    pub k_values: Vec<usize>,
    pub clusterings: Vec<ClusteringRecord>,
    pub query_index: QueryIndexRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringRecord {
    pub k: usize,
    /// -1 for insufficient-data researchers.
    pub labels: Vec<i64>,
    pub components: Vec<ComponentRecord>,
    pub ellipses: Vec<EllipseRecord>,
    pub log_likelihood: f64,
    pub n_iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub weight: f64,
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseRecord {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub angle: f64,
}

/// Query index over the bundle-wide vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryIndexRecord {
    /// Aligned with `AtlasBundle::vocabulary`; 0 marks a term absent from
    /// this variant.
    pub idf: Vec<f64>,
    /// Unit-L2 TFIDF column per researcher (empty when the embedding is zero).
    pub columns: Vec<SparseColumn>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseColumn {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn variant_id(publication_set: PublicationOrder, emphasis: EmphasisLevel) -> String {
    format!("{publication_set}-{emphasis}")
}

impl AtlasBundle {
    pub fn variant(&self, id: &str) -> Option<&VariantRecord> {
        self.variants.iter().find(|v| v.id == id)
    }

    pub fn researcher_ids(&self) -> Vec<String> {
        self.researchers.iter().map(|r| r.id.clone()).collect()
    }
}
