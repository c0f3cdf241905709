//! Researcher map pipeline: profile loading, TFIDF embeddings, a 2D PCA
//! layout, Gaussian mixture clustering, topic queries, and the static data
//! bundle that ties them together for a browser client.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the `f64` instantiation the bundle uses.

pub mod bundle;
pub mod embed;
pub mod gmm;
pub mod linalg;
pub mod pca;
pub mod profiles;
pub mod query;
pub mod scalar;
pub mod sparse;
pub mod synth;
pub mod textproc;

pub use scalar::Scalar;

pub type TfidfModel = embed::TfidfModel<f64>;
pub type PcaModel = pca::PcaModel<f64>;
pub type MapLayout = pca::MapLayout<f64>;
pub type GmmModel = gmm::GmmModel<f64>;
pub type GmmComponent = gmm::GmmComponent<f64>;
pub type Ellipse = gmm::Ellipse<f64>;
pub type QueryIndex = query::QueryIndex<f64>;
pub type QueryResult = query::QueryResult<f64>;
pub type SparseVector = sparse::SparseVector<f64>;

pub type TfidfModelF32 = embed::TfidfModel<f32>;
pub type GmmModelF32 = gmm::GmmModel<f32>;
