//! Text embedding: the trainable hashed-n-gram encoder, its contrastive
//! losses, the TF-IDF baseline, and the precomputed-vector adapter.
//!
//! Every provider maps text to a unit-norm vector. The native encoder is a
//! linear projection over hashed character n-grams trained with a
//! multiple-negatives ranking loss, wrapped in a prefix-truncation meta-loss
//! so leading sub-vectors (64 dims and up) stay usable on their own.

mod features;
mod linear;
mod loss;
mod precomputed;
mod snapshot;
mod tfidf;
mod train;

pub use features::{featurize, SparseFeatures};
pub use linear::{linear_baseline_train, LinearClassifier};
pub use loss::{mnr_loss, matryoshka_loss, LossOutput};
pub use precomputed::{
    load_precomputed, read_vector_file, read_vector_file_jsonl, write_vector_file,
    write_vector_file_jsonl, PrecomputedProvider, VECTOR_FILE_MAGIC,
};
pub use snapshot::{load_encoder_snapshot, save_encoder_snapshot, ENCODER_SNAPSHOT_MAGIC};
pub use tfidf::{tfidf_provider, SparseIndex, TfIdfProvider};
pub use train::{train_encoder, TrainedEncoder, TrainingLog};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("batch is empty")]
    EmptyBatch,

    #[error("input vector is not unit-norm (norm {0})")]
    NormViolation(f64),

    #[error("prefix dimension {dim} exceeds vector dimension {vector_dim}")]
    DimExceedsVector { dim: usize, vector_dim: usize },

    #[error("triplet set is empty")]
    EmptyTripletSet,

    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("text produced no features and cannot be embedded: {0:?}")]
    NotEmbeddable(String),

    #[error("no stored vector for key {0:?}")]
    UnknownText(String),

    #[error("file header does not match payload: {0}")]
    HeaderMismatch(String),

    #[error("checksum mismatch: file is truncated or corrupt")]
    ChecksumMismatch,

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("I/O failed: {0}")]
    IoFailure(#[from] std::io::Error),
}

/// A unit-norm embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    /// Normalize `values` to unit length.
    ///
    /// Fails with [`EncoderError::NormViolation`] when the input is zero or
    /// non-finite; the resulting norm is within 1e-6 of 1.
    pub fn from_raw(mut values: Vec<f32>) -> Result<Self, EncoderError> {
        let norm = l2_norm(&values);
        if !norm.is_finite() || norm <= 0.0 {
            return Err(EncoderError::NormViolation(norm));
        }
        let inv = (1.0 / norm) as f32;
        for v in &mut values {
            *v *= inv;
        }
        Ok(Self { values })
    }

    /// Wrap values that are already unit-norm (within 1e-6).
    pub fn from_unit(values: Vec<f32>) -> Result<Self, EncoderError> {
        let norm = l2_norm(&values);
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(EncoderError::NormViolation(norm));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.values
    }

    /// Cosine similarity; inputs are unit vectors so this is the dot product.
    pub fn cosine(&self, other: &Self) -> f32 {
        dot(&self.values, &other.values)
    }

    /// Truncate to the leading `dim` components and renormalize.
    pub fn prefix(&self, dim: usize) -> Result<Self, EncoderError> {
        if dim > self.values.len() {
            return Err(EncoderError::DimExceedsVector {
                dim,
                vector_dim: self.values.len(),
            });
        }
        Self::from_raw(self.values[..dim].to_vec())
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(values: &[f32]) -> f64 {
    values
        .iter()
        .map(|v| {
            let v = *v as f64;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Encoder hyperparameters.
///
/// `scale`, the Matryoshka weights, batch size, epochs, and the optimizer
/// step size are exposed as knobs with the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    /// Output embedding dimensionality.
    pub dim: usize,
    /// Ascending prefix lengths trained to stand alone, each <= dim.
    pub matryoshka_dims: Vec<usize>,
    /// Per-prefix loss weights, aligned with `matryoshka_dims`.
    pub matryoshka_weights: Vec<f64>,
    /// Similarity temperature multiplier applied to cosines inside the loss.
    pub scale: f64,
    /// Hashed feature-space size; must be a power of two.
    pub hash_buckets: usize,
    /// Character n-gram sizes, inclusive.
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            dim: 256,
            matryoshka_dims: vec![64, 128, 256],
            matryoshka_weights: vec![1.0, 1.0, 1.0],
            scale: 20.0,
            hash_buckets: 1 << 18,
            ngram_min: 3,
            ngram_max: 5,
            batch_size: 32,
            epochs: 10,
            learning_rate: 0.05,
            seed: 42,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.dim == 0 {
            return Err(EncoderError::ConfigInvalid("dim must be positive".into()));
        }
        if self.matryoshka_dims.is_empty() {
            return Err(EncoderError::ConfigInvalid(
                "matryoshka_dims must not be empty".into(),
            ));
        }
        if !self.matryoshka_dims.windows(2).all(|w| w[0] < w[1]) {
            return Err(EncoderError::ConfigInvalid(
                "matryoshka_dims must be strictly ascending".into(),
            ));
        }
        if *self.matryoshka_dims.last().unwrap() > self.dim {
            return Err(EncoderError::ConfigInvalid(format!(
                "largest matryoshka dim {} exceeds dim {}",
                self.matryoshka_dims.last().unwrap(),
                self.dim
            )));
        }
        if self.matryoshka_weights.len() != self.matryoshka_dims.len() {
            return Err(EncoderError::ConfigInvalid(
                "matryoshka_weights must align with matryoshka_dims".into(),
            ));
        }
        if self.scale <= 0.0 {
            return Err(EncoderError::ConfigInvalid("scale must be > 0".into()));
        }
        if !self.hash_buckets.is_power_of_two() {
            return Err(EncoderError::ConfigInvalid(
                "hash_buckets must be a power of two".into(),
            ));
        }
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return Err(EncoderError::ConfigInvalid(
                "ngram range must satisfy 1 <= min <= max".into(),
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(EncoderError::ConfigInvalid(
                "batch_size and epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Anything that can embed text into a unit vector.
///
/// `embed` must be deterministic for a fixed trained state.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EncoderError>;
    fn dim(&self) -> usize;
    /// Stable identifier recorded in artifact provenance.
    fn id(&self) -> String;
}
