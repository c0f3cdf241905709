//! Vocabulary construction and the TFIDF term x researcher matrix.
//!
//! Term frequency is the raw token count. Inverse document frequency uses
//! additive smoothing inside and outside the logarithm,
//!
//! ```text
//! idf(t) = ln((1 + n_docs) / (1 + doc_freq(t))) + 1
//! ```
//!
//! so it is strictly positive and equals exactly 1 for a term present in
//! every document. Columns are stored unnormalized.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::textproc::TokenBag;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("empty corpus: every document is empty")]
    EmptyCorpus,
    #[error("token {0:?} is not in the vocabulary")]
    UnknownTerm(String),
    #[error("researcher index {index} out of range for {n_docs} documents")]
    IndexOutOfRange { index: usize, n_docs: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
}

impl Vocabulary {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Sorted union of all bag tokens with per-term document frequency.
pub fn build_vocabulary(bags: &[TokenBag]) -> Result<Vocabulary, EmbedError> {
    let terms: Vec<String> = bags
        .iter()
        .flat_map(|b| b.counts().keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    if terms.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let index: HashMap<String, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    let mut doc_freq = vec![0; terms.len()];
    for bag in bags {
        for (t, _) in bag.iter() {
            doc_freq[index[t]] += 1;
        }
    }
    Ok(Vocabulary {
        terms,
        index,
        doc_freq,
    })
}

pub fn smoothed_idf<T: Scalar>(n_docs: usize, doc_freq: usize) -> T {
    let ratio = T::from_count(1 + n_docs as u64) / T::from_count(1 + doc_freq as u64);
    ratio.ln() + T::one()
}

/// Sparse TFIDF matrix stored column-major: one column per researcher.
#[derive(Clone, Debug, PartialEq)]
pub struct TfidfModel<T> {
    vocab: Vocabulary,
    idf: Vec<T>,
    columns: Vec<SparseVector<T>>,
}

impl<T: Scalar> TfidfModel<T> {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &[T] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.columns.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn columns(&self) -> &[SparseVector<T>] {
        &self.columns
    }

    pub fn entry(&self, term: usize, researcher: usize) -> T {
        self.columns[researcher].get(term)
    }

    /// Stored (nonzero) entries across the whole matrix.
    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).sum()
    }

    /// Embedding of one researcher.
    pub fn embedding_column(&self, researcher: usize) -> Result<&SparseVector<T>, EmbedError> {
        self.columns
            .get(researcher)
            .ok_or(EmbedError::IndexOutOfRange {
                index: researcher,
                n_docs: self.columns.len(),
            })
    }
}

pub fn compute_tfidf<T: Scalar>(
    bags: &[TokenBag],
    vocab: &Vocabulary,
) -> Result<TfidfModel<T>, EmbedError> {
    let n_docs = bags.len();
    let idf: Vec<T> = vocab
        .doc_freq
        .iter()
        .map(|&df| smoothed_idf(n_docs, df))
        .collect();
    let columns = bags
        .iter()
        .map(|bag| {
            // Bag iteration is sorted and so is the vocabulary, so indices
            // come out increasing.
            let entries = bag
                .iter()
                .map(|(t, tf)| {
                    let row = vocab
                        .index_of(t)
                        .ok_or_else(|| EmbedError::UnknownTerm(t.to_string()))?;
                    Ok((row, T::from_count(tf) * idf[row]))
                })
                .collect::<Result<Vec<_>, EmbedError>>()?;
            Ok(SparseVector::from_sorted(entries))
        })
        .collect::<Result<Vec<_>, EmbedError>>()?;
    Ok(TfidfModel {
        vocab: vocab.clone(),
        idf,
        columns,
    })
}

/// Vocabulary plus matrix in one call.
pub fn fit_tfidf<T: Scalar>(bags: &[TokenBag]) -> Result<TfidfModel<T>, EmbedError> {
    let vocab = build_vocabulary(bags)?;
    compute_tfidf(bags, &vocab)
}
