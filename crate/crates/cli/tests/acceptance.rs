//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use atlas_cli::{cmd_build, BuildArgs};
use atlas_core::bundle::{
    build_bundle, load_bundle, parse_bundle, query_index, save_bundle, to_canonical_json, validate,
    BundleError, SCHEMA_VERSION,
};
use atlas_core::embed::{fit_tfidf, TfidfModel};
use atlas_core::gmm::fit_gmm;
use atlas_core::pca::{fit_pca, pca_from_columns};
use atlas_core::query::score_query;
use atlas_core::synth::synthetic_profiles;
use atlas_core::textproc::{normalize, TokenBag};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:.0?}"))
    }
}

fn tfidf_oracle() -> Result<String, String> {
    let start = Instant::now();
    let texts = [
        "Graph algorithms for shortest paths in large networks",
        "Deep learning on graphs with neural message passing networks",
        "Query optimization for relational databases and networks",
        "Protein structure prediction with deep networks",
        "Visual analytics of citation networks and algorithms",
    ];
    let bags: Vec<TokenBag> = texts.iter().map(|t| normalize(t)).collect();
    let model: TfidfModel<f64> = fit_tfidf(&bags).map_err(|e| e.to_string())?;

    let terms: BTreeSet<&str> = bags.iter().flat_map(|b| b.iter().map(|(t, _)| t)).collect();
    ensure!(
        model
            .vocab()
            .terms()
            .iter()
            .map(String::as_str)
            .eq(terms.iter().copied()),
        "vocabulary differs"
    );
    let n = bags.len() as f64;
    let mut worst = 0.0f64;
    for (t, term) in terms.iter().enumerate() {
        let df = bags.iter().filter(|b| b.count(term) > 0).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        for (r, b) in bags.iter().enumerate() {
            worst = worst.max((model.entry(t, r) - b.count(term) as f64 * idf).abs());
        }
    }
    ensure!(worst <= 1e-9, "max deviation {worst:e}");
    let network = model.vocab().index_of("network").ok_or("no shared term")?;
    ensure!(
        model.idf()[network] == 1.0,
        "idf of everywhere-present term is {}",
        model.idf()[network]
    );
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "max deviation {worst:.1e}, idf(network)=1.0, {:.2?}",
        start.elapsed()
    ))
}

fn pca_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut ortho = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..10).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let (m, coords) = pca_from_columns(&cols).map_err(|e| e.to_string())?;

        let x = DMatrix::from_fn(10, 6, |t, r| cols[r][t]);
        let mean = x.column_mean();
        let mut xc = x.clone();
        for mut c in xc.column_iter_mut() {
            c -= &mean;
        }
        let eig = SymmetricEigen::new(&xc * xc.transpose() / 5.0);
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for k in 0..2 {
            let mut v: Vec<f64> = eig.eigenvectors.column(order[k]).iter().copied().collect();
            let lead = (0..10).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
            if v[lead] < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
            for r in 0..6 {
                let want: f64 = xc.column(r).iter().zip(&v).map(|(a, b)| a * b).sum();
                worst = worst.max((coords[r][k] - want).abs());
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        ortho = ortho
            .max((dot(&m.components[0], &m.components[0]) - 1.0).abs())
            .max((dot(&m.components[1], &m.components[1]) - 1.0).abs())
            .max(dot(&m.components[0], &m.components[1]).abs());
    }
    ensure!(worst <= 1e-8, "coord deviation {worst:e}");
    ensure!(ortho <= 1e-9, "orthonormality error {ortho:e}");

    let a: TokenBag = [("graph", 3u64), ("learn", 1)].into_iter().collect();
    let b: TokenBag = [("protein", 2u64), ("fold", 2)].into_iter().collect();
    let model: TfidfModel<f64> =
        fit_tfidf(&[a.clone(), b.clone(), a, b]).map_err(|e| e.to_string())?;
    let (rank1, _) = fit_pca(&model).map_err(|e| e.to_string())?;
    ensure!(
        rank1.eigenvalues[1] < 1e-9,
        "rank-1 second eigenvalue {:e}",
        rank1.eigenvalues[1]
    );
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "coord deviation {worst:.1e}, orthonormality {ortho:.1e}, rank-1 lambda2 {:.1e}, {:.2?}",
        rank1.eigenvalues[1],
        start.elapsed()
    ))
}

fn em_guarantee() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let points: Vec<[f64; 2]> = [[0.0, 0.0], [10.0, 10.0]]
        .iter()
        .flat_map(|c| {
            (0..50)
                .map(|_| [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)])
                .collect::<Vec<_>>()
        })
        .collect();
    let mut fits = 0;
    let mut purity = 0.0;
    for k in 1..=10 {
        for seed in [42u64, 7, 1] {
            let m = fit_gmm(&points, k, seed).map_err(|e| e.to_string())?;
            for w in m.log_likelihood_trace.windows(2) {
                ensure!(
                    w[1] >= w[0] - 1e-9,
                    "k={k} seed={seed}: ll {} -> {}",
                    w[0],
                    w[1]
                );
            }
            fits += 1;
            if k == 2 && seed == 42 {
                let a = m.labels[0];
                let correct = m.labels[..50].iter().filter(|&&l| l == a).count()
                    + m.labels[50..].iter().filter(|&&l| l != a).count();
                purity = correct as f64 / 100.0;
            }
        }
    }
    ensure!(purity == 1.0, "two-blob purity {purity}");
    within(start.elapsed(), Duration::from_secs(2))?;
    Ok(format!(
        "purity 1.0, {fits} monotone fits, {:.2?}",
        start.elapsed()
    ))
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn query_contract() -> Result<String, String> {
    let profiles = synthetic_profiles(83, 20, 42);
    let bundle = build_bundle(&profiles, 42).map_err(|e| e.to_string())?;
    let bundle = parse_bundle(&to_canonical_json(&bundle).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let term = bundle
        .vocabulary
        .binary_search(&"algorithm".to_string())
        .map_err(|_| "term missing")?;
    for v in &bundle.variants {
        let index = query_index(&bundle, &v.id).map_err(|e| e.to_string())?;
        let result = score_query(&index, "algorithms");
        // brute force: dense cosine between e_term and each unnormalized column
        let weights: Vec<f64> = v
            .query_index
            .columns
            .iter()
            .map(|c| {
                let norm = c.values.iter().map(|x| x * x).sum::<f64>().sqrt();
                c.indices
                    .iter()
                    .position(|&i| i == term)
                    .map_or(0.0, |p| c.values[p] / norm)
            })
            .collect();
        let rho = spearman(&result.raw_scores, &weights);
        ensure!(rho == 1.0, "{}: rank correlation {rho}", v.id);
        let oov = score_query(&index, "zzyzx quokka");
        ensure!(
            oov.raw_scores.iter().all(|&s| s == 0.0),
            "{}: out-of-vocabulary scores nonzero",
            v.id
        );
        ensure!(
            oov.display_scores.iter().all(|&s| s == 0.0),
            "{}: out-of-vocabulary display nonzero",
            v.id
        );
    }
    Ok(format!(
        "rank correlation 1.0 in {} variants, out-of-vocabulary all zero",
        bundle.variants.len()
    ))
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("profiles.json");
    synthetic_profiles(83, 100, 42)
        .save(&input)
        .map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    let mut times = Vec::new();
    for name in ["a.json", "b.json"] {
        let output = dir.path().join(name);
        let args = BuildArgs {
            input: input.clone(),
            output: output.clone(),
            seed: 42,
            verbose: false,
        };
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let start = Instant::now();
        let code = cmd_build(&args, &mut out, &mut err);
        times.push(start.elapsed());
        ensure!(code == 0, "build failed: {}", String::from_utf8_lossy(&err));
        bytes.push(std::fs::read(&output).map_err(|e| e.to_string())?);
    }
    ensure!(bytes[0] == bytes[1], "bundles differ");
    let b = load_bundle(dir.path().join("a.json")).map_err(|e| e.to_string())?;
    let clusterings: usize = b.variants.iter().map(|v| v.clusterings.len()).sum();
    ensure!(
        b.variants.len() == 6 && clusterings == 54,
        "{} variants, {clusterings} clusterings",
        b.variants.len()
    );
    let slowest = times.iter().max().copied().unwrap_or_default();
    within(slowest, Duration::from_secs(60))?;
    Ok(format!(
        "{} identical bytes, 6 variants x 9 clusterings, slowest build {slowest:.2?}",
        bytes[0].len()
    ))
}

fn bundle_round_trip() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = build_bundle(&synthetic_profiles(25, 15, 8), 42).map_err(|e| e.to_string())?;
    let path = dir.path().join("b.json");
    save_bundle(&b, &path).map_err(|e| e.to_string())?;
    let loaded = load_bundle(&path).map_err(|e| e.to_string())?;
    ensure!(loaded == b, "load(save(b)) != b");

    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let bumped = text.replacen(
        &format!("\"schema_version\":{SCHEMA_VERSION}"),
        &format!("\"schema_version\":{}", SCHEMA_VERSION + 1),
        1,
    );
    ensure!(
        matches!(
            parse_bundle(&bumped),
            Err(BundleError::SchemaVersionMismatch { .. })
        ),
        "schema version bump not rejected"
    );
    let mut short = b.clone();
    short.variants[3].coords.pop();
    match validate(&short) {
        Err(BundleError::InvariantViolation(msg)) if msg.contains(&short.variants[3].id) => {}
        other => return Err(format!("coords misalignment gave {other:?}")),
    }
    let mut labels = b.clone();
    labels.variants[0].clusterings[0].labels.pop();
    ensure!(
        matches!(
            save_bundle(&labels, dir.path().join("x.json")),
            Err(BundleError::InvariantViolation(_))
        ),
        "label misalignment not rejected"
    );
    Ok("structural equality, version and alignment violations rejected".into())
}

fn main() {
    let checks: [(&str, Check); 6] = [
        ("tfidf-oracle-equivalence", tfidf_oracle),
        ("pca-correctness", pca_oracle),
        ("em-guarantee", em_guarantee),
        ("query-contract", query_contract),
        ("determinism", determinism),
        ("bundle-round-trip", bundle_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of 6 criteria passed", 6 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
