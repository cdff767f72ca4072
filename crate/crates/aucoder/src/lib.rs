//! # aucoder
//!
//! Turns facial-keypoint video sequences into data-driven action units and
//! benchmarks them against keypoint dictionaries built from manually coded
//! expressions.
//!
//! The pipeline has four stages:
//!
//! 1. **Ingest** ([`io`]): native keypoint files (66, 49 or 68 points per
//!    frame) are remapped onto a shared 68-slot template; slots a dataset
//!    does not annotate are zero-filled and masked out.
//! 2. **Register** ([`geometry`]): an affine fit over six fixated anchor
//!    keypoints moves every frame into a standard space, then per-face-part
//!    similarity fits remove residual scale/rotation differences (the lips
//!    are left untouched since all lip points move with expressions).
//! 3. **Featurize** ([`features`]): each frame becomes a 136-dimensional
//!    displacement vector relative to its subject's neutral frame; frames
//!    stack into a `136 x m` feature matrix.
//! 4. **Model and score** ([`pca`], [`sparse`], [`metrics`]): an uncentered
//!    truncated SVD yields an orthonormal displacement basis (the "PCA
//!    AUs"); any basis or dictionary can encode test data through a
//!    least-angle lasso path with an active-set budget, and reconstructions
//!    are scored by variance explained and mean components used.
//!
//! Row masks follow the data everywhere: when train and test datasets
//! annotate different keypoints, only rows present in both participate in
//! projection, encoding and metrics.
//!
//! The crate ships runnable examples for every capability (see
//! `examples/`) and one thin `aucoder` binary exposing the batch pipeline
//! (see [`cli`]).

pub mod cli;
pub mod error;
pub mod features;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod pca;
pub mod plot;
pub mod render;
pub mod sparse;
pub mod synth;

pub use error::{Error, Result};
pub use features::{AuDictionary, DictionaryKind, FeatureMatrix};
pub use geometry::{AffineParams, AnchorSet, SimilarityParams};
pub use io::{DatasetManifest, KeypointFrame, TemplateMap};
pub use metrics::VeReport;
pub use pca::{PcaModel, Projection};
pub use sparse::{LarsConfig, SparseCode};

/// Number of slots in the shared keypoint template.
pub const TEMPLATE_POINTS: usize = 68;

/// Feature dimension: x and y displacement per template slot.
pub const FEATURE_DIM: usize = 2 * TEMPLATE_POINTS;
