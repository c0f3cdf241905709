//! Gaussian mixture clustering of 2D map coordinates.
//!
//! Full-covariance EM initialized by k-means++ seeding. Seeding draws from
//! a ChaCha8 stream (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`), which
//! is value-stable across platforms, so a `(points, k, seed)` triple always
//! produces the same model bit for bit.
//!
//! The initial responsibilities assign each point to its nearest seed
//! (lowest seed index on ties). Each M-step adds the floor `eps`
//! ([`COVARIANCE_FLOOR`]) to the covariance diagonal. That update is the
//! exact maximizer only for the regularized component density
//!
//! ```text
//! f_j(x) = N(x | mu_j, S_j) * exp(-eps/2 * tr(S_j^-1))
//! ```
//!
//! so the E-step, `assign` and the recorded log-likelihood all use `f_j`.
//! With that pairing every iteration is an exact EM step and the
//! log-likelihood trace cannot decrease. With plain Gaussian densities a
//! tight component can lose a little likelihood to the floor. For
//! `eps = 0` both are the ordinary mixture likelihood.
//!
//! Iteration stops once the change in total log-likelihood drops below
//! `tol * max(1, |ll|)` or after `max_iter` E-steps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::symmetric_eigen_2x2;
use crate::scalar::Scalar;

pub const COVARIANCE_FLOOR: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Mahalanobis radius of display ellipses (about 86.5% of the mass in 2D).
pub const DEFAULT_ELLIPSE_RADIUS: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmmError {
    #[error("invalid k={k} for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("covariance is not symmetric positive definite")]
    NonPositiveDefinite,
    #[error("ellipse radius must be positive and finite")]
    InvalidRadius,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmmComponent<T> {
    pub weight: T,
    pub mean: [T; 2],
    /// Symmetric, row-major.
    pub covariance: [[T; 2]; 2],
}

impl<T: Scalar> GmmComponent<T> {
    fn log_density(&self, p: [T; 2]) -> T {
        let [[a, b], [_, c]] = self.covariance;
        let det = a * c - b * b;
        let dx = p[0] - self.mean[0];
        let dy = p[1] - self.mean[1];
        let mahal = (c * dx * dx - T::lit(2.0) * b * dx * dy + a * dy * dy) / det;
        -(T::lit(2.0) * T::PI()).ln() - T::lit(0.5) * det.ln() - T::lit(0.5) * mahal
    }

    /// Log of the floor-regularized density `f_j` from the module docs.
    pub fn regularized_log_density(&self, p: [T; 2], floor: T) -> T {
        let [[a, b], [_, c]] = self.covariance;
        let trace_inv = (a + c) / (a * c - b * b);
        self.log_density(p) - T::lit(0.5) * floor * trace_inv
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmmModel<T> {
    pub k: usize,
    pub components: Vec<GmmComponent<T>>,
    /// `responsibilities[i][j]`: posterior of component `j` for point `i`.
    pub responsibilities: Vec<Vec<T>>,
    pub labels: Vec<usize>,
    pub log_likelihood: T,
    /// Total log-likelihood after every E-step.
    pub log_likelihood_trace: Vec<T>,
    pub n_iterations: usize,
    pub converged: bool,
    /// Diagonal floor the model was fitted with.
    pub covariance_floor: T,
}

impl<T: Scalar> GmmModel<T> {
    /// Debug trace, one `iter=<n> ll=<float>` line per iteration.
    pub fn trace_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.log_likelihood_trace
            .iter()
            .enumerate()
            .map(|(i, ll)| format!("iter={} ll={}", i + 1, ll))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse<T> {
    pub center: [T; 2],
    /// Major first.
    pub semi_axes: [T; 2],
    /// Orientation of the major axis in `[0, pi)`.
    pub angle: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmmOptions {
    pub max_iter: usize,
    pub tolerance: f64,
    pub covariance_floor: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            max_iter: DEFAULT_MAX_ITER,
            tolerance: DEFAULT_TOLERANCE,
            covariance_floor: COVARIANCE_FLOOR,
        }
    }
}

pub fn fit_gmm<T: Scalar>(points: &[[T; 2]], k: usize, seed: u64) -> Result<GmmModel<T>, GmmError> {
    fit_gmm_with(points, k, seed, &GmmOptions::default())
}

pub fn fit_gmm_with<T: Scalar>(
    points: &[[T; 2]],
    k: usize,
    seed: u64,
    options: &GmmOptions,
) -> Result<GmmModel<T>, GmmError> {
    validate(points, k)?;
    let seeds = kmeans_plus_plus(points, k, seed);
    let means: Vec<[T; 2]> = seeds.iter().map(|&i| points[i]).collect();
    fit_gmm_from_means(points, &means, options)
}

fn validate<T: Scalar>(points: &[[T; 2]], k: usize) -> Result<(), GmmError> {
    if k < 1 || k > points.len() {
        return Err(GmmError::InvalidK { k, n: points.len() });
    }
    if points
        .iter()
        .any(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(GmmError::DegenerateInput("non-finite coordinate".into()));
    }
    let distinct = distinct_count(points);
    if distinct < k {
        return Err(GmmError::DegenerateInput(format!(
            "{distinct} distinct point(s) for k={k}"
        )));
    }
    Ok(())
}

pub(crate) fn distinct_count<T: Scalar>(points: &[[T; 2]]) -> usize {
    let mut sorted: Vec<[T; 2]> = points.to_vec();
    sorted.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .expect("finite")
            .then(a[1].partial_cmp(&b[1]).expect("finite"))
    });
    sorted.dedup();
    sorted.len()
}

fn sq_dist<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Indices of `k` seed points chosen by D^2 sampling.
///
/// Requires at least `k` distinct points.
pub fn kmeans_plus_plus<T: Scalar>(points: &[[T; 2]], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|&p| sq_dist(p, points[chosen[0]]).as_f64())
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &d) in nearest.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            acc += d;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let next = pick.expect("a point away from every seed exists");
        chosen.push(next);
        for (d, &p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, points[next]).as_f64());
        }
    }
    chosen
}

/// EM from explicit initial means (one component per mean).
pub fn fit_gmm_from_means<T: Scalar>(
    points: &[[T; 2]],
    means: &[[T; 2]],
    options: &GmmOptions,
) -> Result<GmmModel<T>, GmmError> {
    let k = means.len();
    validate(points, k)?;
    let floor = T::lit(options.covariance_floor);
    let tol = T::lit(options.tolerance);

    let mut resp: Vec<Vec<T>> = points
        .iter()
        .map(|&p| {
            let mut best = 0;
            let mut best_d = sq_dist(p, means[0]);
            for (j, &m) in means.iter().enumerate().skip(1) {
                let d = sq_dist(p, m);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            let mut row = vec![T::zero(); k];
            row[best] = T::one();
            row
        })
        .collect();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut components;
    loop {
        components = m_step(points, &resp, floor)?;
        let (next_resp, ll) = e_step(points, &components, floor);
        resp = next_resp;
        let done = trace
            .last()
            .map(|&prev: &T| (ll - prev).abs() < tol * T::one().max(ll.abs()))
            .unwrap_or(false);
        trace.push(ll);
        if done {
            converged = true;
            break;
        }
        if trace.len() >= options.max_iter {
            break;
        }
    }

    let labels = resp.iter().map(|r| argmax(r)).collect();
    Ok(GmmModel {
        k,
        components,
        responsibilities: resp,
        labels,
        log_likelihood: *trace.last().expect("at least one iteration"),
        n_iterations: trace.len(),
        log_likelihood_trace: trace,
        converged,
        covariance_floor: floor,
    })
}

fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (j, &r) in row.iter().enumerate().skip(1) {
        if r > row[best] {
            best = j;
        }
    }
    best
}

fn m_step<T: Scalar>(
    points: &[[T; 2]],
    resp: &[Vec<T>],
    floor: T,
) -> Result<Vec<GmmComponent<T>>, GmmError> {
    let k = resp[0].len();
    // Keeps empty components from dividing by zero.
    let tiny = T::lit(10.0) * T::epsilon();
    let mut nk = vec![tiny; k];
    for row in resp {
        for (n, &r) in nk.iter_mut().zip(row) {
            *n += r;
        }
    }
    let total: T = nk.iter().copied().sum();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut mean = [T::zero(); 2];
        for (p, row) in points.iter().zip(resp) {
            mean[0] += row[j] * p[0];
            mean[1] += row[j] * p[1];
        }
        mean[0] /= nk[j];
        mean[1] /= nk[j];
        let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
        for (p, row) in points.iter().zip(resp) {
            let dx = p[0] - mean[0];
            let dy = p[1] - mean[1];
            sxx += row[j] * dx * dx;
            sxy += row[j] * dx * dy;
            syy += row[j] * dy * dy;
        }
        let a = sxx / nk[j] + floor;
        let b = sxy / nk[j];
        let c = syy / nk[j] + floor;
        if !(a * c - b * b > T::zero()) {
            return Err(GmmError::DegenerateInput(
                "singular component covariance".into(),
            ));
        }
        out.push(GmmComponent {
            weight: nk[j] / total,
            mean,
            covariance: [[a, b], [b, c]],
        });
    }
    Ok(out)
}

/// Responsibilities and total log-likelihood under `components`.
fn e_step<T: Scalar>(
    points: &[[T; 2]],
    components: &[GmmComponent<T>],
    floor: T,
) -> (Vec<Vec<T>>, T) {
    let log_weights: Vec<T> = components.iter().map(|c| c.weight.ln()).collect();
    let mut ll = T::zero();
    let resp = points
        .iter()
        .map(|&p| {
            let logs: Vec<T> = components
                .iter()
                .zip(&log_weights)
                .map(|(c, &lw)| lw + c.regularized_log_density(p, floor))
                .collect();
            let max = logs.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = max + logs.iter().map(|&l| (l - max).exp()).sum::<T>().ln();
            ll += lse;
            logs.iter().map(|&l| (l - lse).exp()).collect()
        })
        .collect();
    (resp, ll)
}

/// Labels and responsibilities of arbitrary points under a fitted model.
pub fn assign<T: Scalar>(model: &GmmModel<T>, points: &[[T; 2]]) -> (Vec<usize>, Vec<Vec<T>>) {
    let (resp, _) = e_step(points, &model.components, model.covariance_floor);
    let labels = resp.iter().map(|r| argmax(r)).collect();
    (labels, resp)
}

/// Display ellipse of a component at the given Mahalanobis radius.
pub fn ellipse_params<T: Scalar>(
    component: &GmmComponent<T>,
    radius: T,
) -> Result<Ellipse<T>, GmmError> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(GmmError::InvalidRadius);
    }
    let [[a, b], [b2, c]] = component.covariance;
    let finite = [a, b, b2, c].iter().all(|x| x.is_finite());
    if !finite || b != b2 || !(a > T::zero()) || !(a * c - b * b > T::zero()) {
        return Err(GmmError::NonPositiveDefinite);
    }
    let (major, minor, angle) = symmetric_eigen_2x2(a, b, c);
    if !(minor > T::zero()) {
        return Err(GmmError::NonPositiveDefinite);
    }
    Ok(Ellipse {
        center: component.mean,
        semi_axes: [radius * major.sqrt(), radius * minor.sqrt()],
        angle,
    })
}
