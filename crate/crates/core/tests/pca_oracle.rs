use atlas_core::embed::{fit_tfidf, TfidfModel};
use atlas_core::pca::{explained_variance, fit_pca, pca_from_columns, PcaError};
use atlas_core::textproc::TokenBag;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Oracle {
    components: [Vec<f64>; 2],
    eigenvalues: [f64; 2],
    ratios: [f64; 2],
    coords: Vec<[f64; 2]>,
}

/// Full eigendecomposition of the term x term sample covariance.
fn dense_oracle(columns: &[Vec<f64>]) -> Oracle {
    let n = columns.len();
    let d = columns[0].len();
    let x = DMatrix::from_fn(d, n, |t, r| columns[r][t]);
    let mean = x.column_mean();
    let mut xc = x.clone();
    for mut col in xc.column_iter_mut() {
        col -= &mean;
    }
    let cov = &xc * xc.transpose() / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let total = cov.trace();
    let mut components: [Vec<f64>; 2] = [vec![], vec![]];
    let mut eigenvalues = [0.0; 2];
    for k in 0..2 {
        let mut v: Vec<f64> = eig.eigenvectors.column(order[k]).iter().copied().collect();
        let mut best = 0;
        for i in 0..d {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        if v[best] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components[k] = v;
        eigenvalues[k] = eig.eigenvalues[order[k]].max(0.0);
    }
    let coords = (0..n)
        .map(|r| {
            let c = xc.column(r);
            [0, 1].map(|k| c.iter().zip(&components[k]).map(|(a, b)| a * b).sum())
        })
        .collect();
    Oracle {
        ratios: [eigenvalues[0] / total, eigenvalues[1] / total],
        components,
        eigenvalues,
        coords,
    }
}

fn random_matrix(seed: u64, terms: usize, docs: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|_| (0..terms).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn random_10x6_matches_dense_eigensolver() {
    for seed in 0..25 {
        let cols = random_matrix(seed, 10, 6);
        let (m, coords) = pca_from_columns(&cols).unwrap();
        let o = dense_oracle(&cols);
        for k in 0..2 {
            assert!(
                (m.eigenvalues[k] - o.eigenvalues[k]).abs() < 1e-10,
                "seed {seed}"
            );
            assert!((m.explained_variance_ratio[k] - o.ratios[k]).abs() < 1e-10);
            for (a, b) in m.components[k].iter().zip(&o.components[k]) {
                assert!((a - b).abs() < 1e-8, "seed {seed} component {k}");
            }
        }
        for (c, oc) in coords.iter().zip(&o.coords) {
            assert!(
                (c[0] - oc[0]).abs() < 1e-8 && (c[1] - oc[1]).abs() < 1e-8,
                "seed {seed}"
            );
        }
        assert!((dot(&m.components[0], &m.components[0]) - 1.0).abs() < 1e-9);
        assert!((dot(&m.components[1], &m.components[1]) - 1.0).abs() < 1e-9);
        assert!(dot(&m.components[0], &m.components[1]).abs() < 1e-9);
    }
}

fn random_bags(seed: u64, terms: usize, docs: usize) -> Vec<TokenBag> {
    let names: Vec<String> = (0..terms)
        .map(|t| format!("term{}", (b'a' + t as u8) as char))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|_| {
            names
                .iter()
                .map(|n| (n.as_str(), rng.gen_range(0..6u64)))
                .collect()
        })
        .collect()
}

#[test]
fn fit_pca_normalizes_then_matches_oracle() {
    for seed in 0..10 {
        let bags = random_bags(seed, 10, 6);
        let model: TfidfModel<f64> = fit_tfidf(&bags).unwrap();
        let (m, layout) = fit_pca(&model).unwrap();
        let unit: Vec<Vec<f64>> = model
            .columns()
            .iter()
            .map(|c| {
                let dense = c.to_dense(model.n_terms());
                let norm = dot(&dense, &dense).sqrt();
                dense.iter().map(|x| x / norm).collect()
            })
            .collect();
        let o = dense_oracle(&unit);
        for (c, oc) in layout.coords.iter().zip(&o.coords) {
            assert!((c[0] - oc[0]).abs() < 1e-8 && (c[1] - oc[1]).abs() < 1e-8);
        }
        assert_eq!(explained_variance(&m), m.explained_variance_ratio);
        assert!(m.explained_variance_ratio.iter().sum::<f64>() <= 1.0 + 1e-12);
    }
}

#[test]
fn two_distinct_documents_give_rank_one_layout() {
    let a: TokenBag = [("graph", 3u64), ("learn", 1)].into_iter().collect();
    let b: TokenBag = [("protein", 2u64), ("fold", 2)].into_iter().collect();
    let model: TfidfModel<f64> = fit_tfidf(&[a.clone(), b.clone(), a, b]).unwrap();
    let (m, layout) = fit_pca(&model).unwrap();
    assert!(m.eigenvalues[1] < 1e-9);
    assert!(layout.coords.iter().all(|c| c[1].abs() < 1e-9));
    assert!(m.explained_variance_ratio[1] < 1e-9);
    assert!((m.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
}

#[test]
fn symmetric_square_has_equal_ratios() {
    let cols: Vec<Vec<f64>> = vec![
        vec![1.0, 0.0, 0.2],
        vec![0.0, 1.0, 0.2],
        vec![-1.0, 0.0, 0.2],
        vec![0.0, -1.0, 0.2],
    ];
    let (m, _) = pca_from_columns(&cols).unwrap();
    assert!((m.explained_variance_ratio[0] - m.explained_variance_ratio[1]).abs() < 1e-9);
}

#[test]
fn zero_columns_are_excluded_and_centered() {
    let a: TokenBag = [("graph", 3u64)].into_iter().collect();
    let b: TokenBag = [("protein", 2u64), ("graph", 1)].into_iter().collect();
    let c: TokenBag = [("fold", 1u64)].into_iter().collect();
    let model: TfidfModel<f64> = fit_tfidf(&[a, TokenBag::new(), b, c]).unwrap();
    let (m, layout) = fit_pca(&model).unwrap();
    assert_eq!(m.excluded, vec![false, true, false, false]);
    assert_eq!(layout.coords[1], [0.0, 0.0]);
    let cx: f64 = [0, 2, 3].iter().map(|&i| layout.coords[i][0]).sum::<f64>() / 3.0;
    assert!(cx.abs() < 1e-12);

    let one: TfidfModel<f64> =
        fit_tfidf(&[[("aa", 1u64)].into_iter().collect(), TokenBag::new()]).unwrap();
    assert!(matches!(fit_pca(&one), Err(PcaError::DegenerateInput(_))));
}

#[test]
fn determinism_is_bitwise() {
    let bags = random_bags(99, 12, 9);
    let model: TfidfModel<f64> = fit_tfidf(&bags).unwrap();
    let (m1, l1) = fit_pca(&model).unwrap();
    let (m2, l2) = fit_pca(&model).unwrap();
    assert_eq!(m1, m2);
    let bits = |l: &atlas_core::pca::MapLayout<f64>| -> Vec<u64> {
        l.coords
            .iter()
            .flat_map(|c| [c[0].to_bits(), c[1].to_bits()])
            .collect()
    };
    assert_eq!(bits(&l1), bits(&l2));
}

#[test]
fn generic_over_f32() {
    let cols: Vec<Vec<f32>> = random_matrix(3, 8, 5)
        .into_iter()
        .map(|c| c.into_iter().map(|x| x as f32).collect())
        .collect();
    let (m, coords) = pca_from_columns(&cols).unwrap();
    let o = dense_oracle(&random_matrix(3, 8, 5));
    for (c, oc) in coords.iter().zip(&o.coords) {
        assert!((c[0] as f64 - oc[0]).abs() < 1e-4);
    }
    assert!(m.eigenvalues[0] >= m.eigenvalues[1]);
}

proptest! {
    #[test]
    fn coordinates_are_projections_with_matching_variance(seed in any::<u64>(), terms in 3usize..12, docs in 3usize..10) {
        let cols = random_matrix(seed, terms, docs);
        let (m, coords) = pca_from_columns(&cols).unwrap();
        let n = docs as f64;
        for (col, c) in cols.iter().zip(&coords) {
            let centered: Vec<f64> = col.iter().zip(&m.mean).map(|(x, mu)| x - mu).collect();
            for k in 0..2 {
                prop_assert!((dot(&centered, &m.components[k]) - c[k]).abs() < 1e-8);
            }
        }
        let var = |k: usize| coords.iter().map(|c| c[k] * c[k]).sum::<f64>() / (n - 1.0);
        prop_assert!((var(0) - m.eigenvalues[0]).abs() < 1e-9);
        prop_assert!((var(1) - m.eigenvalues[1]).abs() < 1e-9);
        prop_assert!(var(0) >= var(1) - 1e-12);
        prop_assert!(m.eigenvalues[0] >= m.eigenvalues[1] && m.eigenvalues[1] >= 0.0);
        for r in m.explained_variance_ratio {
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn translation_invariance(seed in any::<u64>(), shift in prop::collection::vec(-2.0f64..2.0, 6)) {
        let cols = random_matrix(seed, 6, 7);
        let moved: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| c.iter().zip(&shift).map(|(x, s)| x + s).collect())
            .collect();
        let (_, a) = pca_from_columns(&cols).unwrap();
        let (_, b) = pca_from_columns(&moved).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p[0] - q[0]).abs() < 1e-8 && (p[1] - q[1]).abs() < 1e-8);
        }
    }
}
