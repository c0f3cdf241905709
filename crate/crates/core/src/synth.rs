//! Deterministic synthetic researcher profiles for tests, demos and
//! benchmarks.
//!
//! Each researcher draws most of their vocabulary from a primary topic, some
//! from a secondary topic, and the rest from generic academic filler, so the
//! resulting map has visible cluster structure.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::profiles::{ProfileSet, Publication, ResearcherProfile};

struct Topic {
    name: &'static str,
    keywords: &'static [&'static str],
    words: &'static [&'static str],
}

const TOPICS: &[Topic] = &[
    Topic {
        name: "theory",
        keywords: &[
            "algorithms",
            "complexity theory",
            "graph theory",
            "combinatorics",
        ],
        words: &[
            "algorithm",
            "algorithms",
            "complexity",
            "approximation",
            "bounds",
            "polynomial",
            "graphs",
            "combinatorial",
            "hardness",
            "randomized",
            "optimal",
            "reductions",
            "lattice",
            "proofs",
            "streaming",
            "sublinear",
        ],
    },
    Topic {
        name: "learning",
        keywords: &[
            "machine learning",
            "deep learning",
            "neural networks",
            "optimization",
        ],
        words: &[
            "learning",
            "neural",
            "networks",
            "training",
            "gradient",
            "models",
            "representation",
            "generalization",
            "supervised",
            "embeddings",
            "transformers",
            "classification",
            "inference",
            "stochastic",
            "regularization",
            "datasets",
        ],
    },
    Topic {
        name: "databases",
        keywords: &["databases", "data management", "query processing"],
        words: &[
            "query",
            "queries",
            "database",
            "indexing",
            "transactions",
            "storage",
            "relational",
            "distributed",
            "scalable",
            "processing",
            "workloads",
            "join",
            "schema",
            "caching",
            "consistency",
            "throughput",
        ],
    },
    Topic {
        name: "visualization",
        keywords: &[
            "visualization",
            "human computer interaction",
            "visual analytics",
        ],
        words: &[
            "visualization",
            "interactive",
            "visual",
            "users",
            "interfaces",
            "exploration",
            "analytics",
            "design",
            "perception",
            "dashboards",
            "usability",
            "charts",
            "interaction",
            "sensemaking",
            "storytelling",
            "tools",
        ],
    },
    Topic {
        name: "biology",
        keywords: &["computational biology", "genomics", "bioinformatics"],
        words: &[
            "protein",
            "genomic",
            "sequencing",
            "cells",
            "gene",
            "expression",
            "molecular",
            "biological",
            "structures",
            "folding",
            "mutations",
            "phylogenetic",
            "clinical",
            "tissue",
            "rna",
            "metabolic",
        ],
    },
    Topic {
        name: "security",
        keywords: &["security", "privacy", "cryptography"],
        words: &[
            "security",
            "privacy",
            "attacks",
            "cryptographic",
            "adversarial",
            "malware",
            "authentication",
            "encryption",
            "vulnerabilities",
            "protocols",
            "defenses",
            "threats",
            "secure",
            "leakage",
            "detection",
            "forensics",
        ],
    },
];

const FILLER: &[&str] = &[
    "approach",
    "method",
    "results",
    "analysis",
    "framework",
    "novel",
    "performance",
    "evaluation",
    "propose",
    "study",
    "problem",
    "efficient",
    "system",
    "show",
    "experiments",
    "new",
    "based",
    "using",
    "demonstrate",
    "significant",
];

const GLUE: &[&str] = &[
    "the", "of", "and", "for", "in", "a", "we", "with", "on", "to",
];

const POSITIONS: &[&str] = &[
    "Professor",
    "Associate Professor",
    "Assistant Professor",
    "Research Scientist",
];

fn sentence(rng: &mut ChaCha8Rng, len: usize, primary: &Topic, secondary: &Topic) -> String {
    (0..len)
        .map(|_| {
            let roll: f64 = rng.gen();
            let pool: &[&str] = if roll < 0.45 {
                primary.words
            } else if roll < 0.6 {
                secondary.words
            } else if roll < 0.8 {
                FILLER
            } else {
                GLUE
            };
            *pool.choose(rng).expect("non-empty word pool")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `n_researchers` profiles with `pubs_each` publications apiece.
///
/// # Panics
/// If `n_researchers < 2`.
pub fn synthetic_profiles(n_researchers: usize, pubs_each: usize, seed: u64) -> ProfileSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let researchers = (0..n_researchers)
        .map(|i| {
            let primary = &TOPICS[i % TOPICS.len()];
            let secondary = &TOPICS[(i * 7 + 3) % TOPICS.len()];
            let publications = (0..pubs_each)
                .map(|_| {
                    let title_len = rng.gen_range(5..11);
                    let abstract_len = rng.gen_range(30..60);
                    let title = sentence(&mut rng, title_len, primary, secondary);
                    // Some publications have no abstract.
                    let abstract_text = if rng.gen_bool(0.1) {
                        String::new()
                    } else {
                        sentence(&mut rng, abstract_len, primary, secondary)
                    };
                    let year = rng.gen_range(1995..=2024);
                    let num_citations = (rng.gen::<f64>().powi(3) * 800.0) as u64;
                    Publication {
                        title,
                        abstract_text,
                        year,
                        num_citations,
                    }
                })
                .collect::<Vec<_>>();
            let mut keywords: Vec<String> =
                primary.keywords.iter().map(|s| s.to_string()).collect();
            keywords.truncate(rng.gen_range(2..=primary.keywords.len()));
            keywords.push(secondary.keywords[0].to_string());
            ResearcherProfile {
                id: format!("{}-{:03}", primary.name, i),
                name: format!("Researcher {i:03}"),
                affiliation: "Institute for Data Science".to_string(),
                position: POSITIONS[i % POSITIONS.len()].to_string(),
                total_citations: publications.iter().map(|p| p.num_citations).sum(),
                scholar_url: format!("https://scholar.google.com/citations?user=synth{i:04}"),
                keywords,
                publications,
            }
        })
        .collect();
    ProfileSet::new("synthetic", researchers).expect("synthetic profiles are valid")
}
