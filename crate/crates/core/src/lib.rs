//! Persistent-entropy regularization of point-cloud representations.
//!
//! The pipeline runs from a point cloud to its 0-dimensional Vietoris–Rips
//! barcode ([`persistence`]), through persistent entropy and feature/noise
//! separation ([`entropy`]), to a differentiable loss on the coordinates
//! ([`regularizer`]). [`numeric`] provides distances, singular values and
//! anisotropy scores; [`model`] and [`harness`] train a small classifier
//! with the entropy term and track how isotropic its hidden layer stays.

pub mod entropy;
pub mod error;
pub mod harness;
pub mod io;
pub mod json;
pub mod model;
pub mod numeric;
pub mod persistence;
pub mod regularizer;

pub use entropy::{
    max_feature_count, persistent_entropy, select_features, select_from_lengths, BarLengths,
    SelectionResult, SelectionStep,
};
pub use error::{Error, Result};
pub use numeric::{
    anisotropy, anisotropy_profile, pairwise_distances, singular_values, AnisotropyProfile,
    DistanceMatrix, PointCloud, SingularSpectrum,
};
pub use persistence::{vr_barcode_0d, Bar, Barcode, UnionFind};
pub use regularizer::{
    entropy_loss_grad, per_class_entropy_loss, ClassPartition, EntropyLossGrad, SelectionMode,
};
