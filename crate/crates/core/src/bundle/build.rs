use std::collections::BTreeSet;

use crate::embed::{fit_tfidf, TfidfModel};
use crate::gmm::{ellipse_params, fit_gmm, GmmModel, COVARIANCE_FLOOR, DEFAULT_ELLIPSE_RADIUS};
use crate::pca::{fit_pca_excluding, MapLayout, PcaModel};
use crate::profiles::{select_publications, ProfileSet, PublicationOrder, PublicationSetMode};
use crate::query::{build_query_index, QueryIndex};
use crate::textproc::{
    assemble_document, EmphasisLevel, TokenBag, MIN_TOKEN_LEN, STOPWORDS, STOPWORDS_VERSION,
};

use super::schema::*;
use super::BundleError;

pub const K_MIN: usize = 2;
pub const K_MAX: usize = 10;
pub const STEMMER_NAME: &str = "porter-1980-fixed-point";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VariantConfig {
    pub emphasis: EmphasisLevel,
    pub pubset: PublicationSetMode,
}

impl VariantConfig {
    /// The six precomputed configurations, publication order outermost.
    pub fn all(publication_limit: usize) -> Vec<VariantConfig> {
        PublicationOrder::ALL
            .iter()
            .flat_map(|&order| {
                EmphasisLevel::ALL
                    .iter()
                    .map(move |&emphasis| VariantConfig {
                        emphasis,
                        pubset: PublicationSetMode::new(order, publication_limit)
                            .expect("publication limit >= 1"),
                    })
            })
            .collect()
    }

    pub fn id(&self) -> String {
        variant_id(self.pubset.order, self.emphasis)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub seed: u64,
    pub publication_limit: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            seed: 42,
            publication_limit: crate::profiles::DEFAULT_PUBLICATION_LIMIT,
        }
    }
}

/// Per-researcher documents of one variant.
pub fn variant_documents(profiles: &ProfileSet, config: &VariantConfig) -> Vec<TokenBag> {
    profiles
        .researchers()
        .iter()
        .map(|r| assemble_document(r, &select_publications(r, config.pubset), config.emphasis))
        .collect()
}

/// In-memory intermediates of one variant, before serialization.
#[derive(Clone, Debug)]
pub struct VariantArtifacts {
    pub config: VariantConfig,
    pub model: TfidfModel<f64>,
    pub pca: PcaModel<f64>,
    pub layout: MapLayout<f64>,
    pub index: QueryIndex<f64>,
    pub clusterings: Vec<GmmModel<f64>>,
}

/// Everything `build_bundle` produces, including the in-memory artifacts.
#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub bundle: AtlasBundle,
    pub artifacts: Vec<VariantArtifacts>,
}

pub fn build_bundle(profiles: &ProfileSet, seed: u64) -> Result<AtlasBundle, BundleError> {
    build_bundle_with(
        profiles,
        &BuildOptions {
            seed,
            ..BuildOptions::default()
        },
    )
    .map(|out| out.bundle)
}

pub fn build_bundle_with(
    profiles: &ProfileSet,
    options: &BuildOptions,
) -> Result<BuildOutput, BundleError> {
    let configs = VariantConfig::all(options.publication_limit);
    let documents: Vec<Vec<TokenBag>> = configs
        .iter()
        .map(|c| variant_documents(profiles, c))
        .collect();
    let insufficient: Vec<bool> = (0..profiles.len())
        .map(|r| documents.iter().any(|docs| docs[r].is_empty()))
        .collect();

    // Variants are independent; results are collected in config order.
    let artifacts: Vec<VariantArtifacts> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&documents)
            .map(|(config, docs)| {
                let insufficient = &insufficient;
                scope.spawn(move || build_variant(*config, docs, insufficient, options.seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("variant build panicked"))
            .collect::<Result<Vec<_>, BundleError>>()
    })?;

    let vocabulary: Vec<String> = artifacts
        .iter()
        .flat_map(|a| a.model.vocab().terms().iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let variants = artifacts
        .iter()
        .map(|a| variant_record(a, &vocabulary, &insufficient))
        .collect();

    let researchers = profiles
        .researchers()
        .iter()
        .zip(&insufficient)
        .map(|(r, &flag)| ResearcherRecord {
            id: r.id.clone(),
            name: r.name.clone(),
            affiliation: r.affiliation.clone(),
            position: r.position.clone(),
            total_citations: r.total_citations,
            scholar_url: r.scholar_url.clone(),
            keywords: r.keywords.clone(),
            insufficient_data: flag,
        })
        .collect();

    let bundle = AtlasBundle {
        schema_version: SCHEMA_VERSION,
        source_label: profiles.source_label().to_string(),
        seed: options.seed,
        constants: BundleConstants {
            ellipse_radius: DEFAULT_ELLIPSE_RADIUS,
            k_min: K_MIN,
            k_max: K_MAX,
            emphasis_weights: EmphasisLevel::ALL
                .iter()
                .map(|&e| (e, e.weight()))
                .collect(),
            publication_limit: options.publication_limit,
            covariance_floor: COVARIANCE_FLOOR,
        },
        text_pipeline: TextPipeline {
            stemmer: STEMMER_NAME.to_string(),
            stopwords_version: STOPWORDS_VERSION.to_string(),
            stopwords: STOPWORDS.iter().map(|s| s.to_string()).collect(),
            min_token_length: MIN_TOKEN_LEN,
        },
        researchers,
        vocabulary,
        variants,
    };
    Ok(BuildOutput { bundle, artifacts })
}

fn build_variant(
    config: VariantConfig,
    docs: &[TokenBag],
    insufficient: &[bool],
    seed: u64,
) -> Result<VariantArtifacts, BundleError> {
    let variant = config.id();
    let model: TfidfModel<f64> = fit_tfidf(docs).map_err(|source| BundleError::Embed {
        variant: variant.clone(),
        source,
    })?;
    let (pca, layout) =
        fit_pca_excluding(&model, insufficient).map_err(|source| BundleError::Pca {
            variant: variant.clone(),
            source,
        })?;
    let points: Vec<[f64; 2]> = layout
        .coords
        .iter()
        .zip(insufficient)
        .filter(|(_, &x)| !x)
        .map(|(c, _)| *c)
        .collect();
    let k_max = K_MAX.min(crate::gmm::distinct_count(&points));
    if k_max < K_MIN {
        return Err(BundleError::Gmm {
            variant,
            k: K_MIN,
            source: crate::gmm::GmmError::DegenerateInput(format!(
                "{k_max} distinct usable point(s)"
            )),
        });
    }
    let clusterings = (K_MIN..=k_max)
        .map(|k| {
            fit_gmm(&points, k, seed).map_err(|source| BundleError::Gmm {
                variant: variant.clone(),
                k,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let index = build_query_index(&model);
    Ok(VariantArtifacts {
        config,
        model,
        pca,
        layout,
        index,
        clusterings,
    })
}

fn variant_record(
    a: &VariantArtifacts,
    vocabulary: &[String],
    insufficient: &[bool],
) -> VariantRecord {
    let global: Vec<usize> = a
        .model
        .vocab()
        .terms()
        .iter()
        .map(|t| {
            vocabulary
                .binary_search(t)
                .expect("term in global vocabulary")
        })
        .collect();
    let mut idf = vec![0.0; vocabulary.len()];
    for (local, &g) in global.iter().enumerate() {
        idf[g] = a.model.idf()[local];
    }
    let columns = a
        .index
        .columns()
        .iter()
        .map(|c| {
            let c = c.remap(|i| global[i]);
            SparseColumn {
                indices: c.indices().to_vec(),
                values: c.values().to_vec(),
            }
        })
        .collect();

    let clusterings = a
        .clusterings
        .iter()
        .map(|m| {
            let mut fitted = m.labels.iter();
            let labels = insufficient
                .iter()
                .map(|&x| {
                    if x {
                        -1
                    } else {
                        *fitted.next().expect("label per usable point") as i64
                    }
                })
                .collect();
            ClusteringRecord {
                k: m.k,
                labels,
                components: m
                    .components
                    .iter()
                    .map(|c| ComponentRecord {
                        weight: c.weight,
                        mean: c.mean,
                        covariance: c.covariance,
                    })
                    .collect(),
                ellipses: m
                    .components
                    .iter()
                    .map(|c| {
                        let e = ellipse_params(c, DEFAULT_ELLIPSE_RADIUS)
                            .expect("fitted covariances are positive definite");
                        EllipseRecord {
                            center: e.center,
                            semi_axes: e.semi_axes,
                            angle: e.angle,
                        }
                    })
                    .collect(),
                log_likelihood: m.log_likelihood,
                n_iterations: m.n_iterations,
                converged: m.converged,
            }
        })
        .collect();

    VariantRecord {
        id: a.config.id(),
        emphasis: a.config.emphasis,
        publication_set: a.config.pubset.order,
        vocabulary_size: a.model.n_terms(),
        coords: a.layout.coords.clone(),
        explained_variance: a.pca.explained_variance_ratio,
        eigenvalues: a.pca.eigenvalues,
        k_values: a.clusterings.iter().map(|m| m.k).collect(),
        clusterings,
        query_index: QueryIndexRecord { idf, columns },
    }
}
