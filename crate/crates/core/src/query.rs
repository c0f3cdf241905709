//! Topic queries scored by cosine similarity against TFIDF embeddings.
//!
//! The query text goes through [`normalize`]; each matched stem gets weight
//! `tf * idf`. Raw scores are cosines against unit-normalized researcher
//! columns (0 when either side is zero). Display scores are a per-query
//! min-max rescaling: all 0 when the maximum is 0, all 1 when every score
//! is equal and positive.

use std::collections::HashMap;

use crate::embed::TfidfModel;
use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::textproc::normalize;

/// Terms, IDF weights and unit-length researcher columns.
///
/// A term with idf 0 is treated as absent; this is how an index read back
/// from a bundle marks global-vocabulary terms missing from its variant.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryIndex<T> {
    terms: Vec<String>,
    lookup: HashMap<String, usize>,
    idf: Vec<T>,
    columns: Vec<SparseVector<T>>,
    zero_columns: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult<T> {
    pub raw_scores: Vec<T>,
    pub display_scores: Vec<T>,
    pub matched_terms: Vec<String>,
    pub unmatched_terms: Vec<String>,
}

impl<T: Scalar> QueryIndex<T> {
    /// Assembles an index from parts; columns are normalized here.
    pub fn from_parts(terms: Vec<String>, idf: Vec<T>, columns: &[SparseVector<T>]) -> Self {
        assert_eq!(terms.len(), idf.len(), "one idf per term");
        let columns = columns.iter().map(SparseVector::normalized).collect();
        Self::from_unit_columns(terms, idf, columns)
    }

    /// Like [`from_parts`](Self::from_parts) but takes columns that are
    /// already unit length (or zero) as-is.
    pub fn from_unit_columns(
        terms: Vec<String>,
        idf: Vec<T>,
        columns: Vec<SparseVector<T>>,
    ) -> Self {
        assert_eq!(terms.len(), idf.len(), "one idf per term");
        let lookup = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let zero_columns = columns.iter().map(SparseVector::is_zero).collect();
        QueryIndex {
            terms,
            lookup,
            idf,
            columns,
            zero_columns,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[T] {
        &self.idf
    }

    pub fn columns(&self) -> &[SparseVector<T>] {
        &self.columns
    }

    /// Researchers whose embedding is zero and can never match.
    pub fn zero_columns(&self) -> &[bool] {
        &self.zero_columns
    }

    pub fn n_researchers(&self) -> usize {
        self.columns.len()
    }

    fn term_index(&self, term: &str) -> Option<usize> {
        self.lookup
            .get(term)
            .copied()
            .filter(|&i| self.idf[i] > T::zero())
    }
}

pub fn build_query_index<T: Scalar>(model: &TfidfModel<T>) -> QueryIndex<T> {
    QueryIndex::from_parts(
        model.vocab().terms().to_vec(),
        model.idf().to_vec(),
        model.columns(),
    )
}

pub fn score_query<T: Scalar>(index: &QueryIndex<T>, query_text: &str) -> QueryResult<T> {
    let bag = normalize(query_text);
    let mut entries = Vec::new();
    let mut matched_terms = Vec::new();
    let mut unmatched_terms = Vec::new();
    for (term, tf) in bag.iter() {
        match index.term_index(term) {
            Some(i) => {
                entries.push((i, T::from_count(tf) * index.idf[i]));
                matched_terms.push(term.to_string());
            }
            None => unmatched_terms.push(term.to_string()),
        }
    }
    entries.sort_by_key(|&(i, _)| i);
    let query = SparseVector::from_sorted(entries);
    let raw_scores = score_vector(index, &query);
    let display_scores = min_max(&raw_scores);
    QueryResult {
        raw_scores,
        display_scores,
        matched_terms,
        unmatched_terms,
    }
}

/// Cosine of an arbitrary non-negative query vector against every column.
pub fn score_vector<T: Scalar>(index: &QueryIndex<T>, query: &SparseVector<T>) -> Vec<T> {
    let norm = query.norm();
    index
        .columns
        .iter()
        .map(|col| {
            if norm == T::zero() || col.is_zero() {
                T::zero()
            } else {
                (col.dot(query) / norm).max(T::zero()).min(T::one())
            }
        })
        .collect()
}

pub fn min_max<T: Scalar>(scores: &[T]) -> Vec<T> {
    let max = scores.iter().copied().fold(T::zero(), T::max);
    let min = scores.iter().copied().fold(max, T::min);
    if max == T::zero() {
        return vec![T::zero(); scores.len()];
    }
    if max == min {
        return vec![T::one(); scores.len()];
    }
    scores.iter().map(|&s| (s - min) / (max - min)).collect()
}

/// Best `k` researchers by raw score, ties by id ascending.
pub fn top_k<'a, T: Scalar>(
    result: &QueryResult<T>,
    ids: &'a [String],
    k: usize,
) -> Vec<(&'a str, T)> {
    assert_eq!(ids.len(), result.raw_scores.len(), "one id per score");
    let mut ranked: Vec<(&str, T)> = ids
        .iter()
        .map(String::as_str)
        .zip(result.raw_scores.iter().copied())
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then_with(|| a.0.cmp(b.0))
    });
    ranked.truncate(k.max(1));
    ranked
}
