//! Volumetric MRI artifact simulation and quality scoring.
//!
//! The crate applies six parameterized artifacts (contrast change, bias
//! field, Gibbs ringing, motion ghosting, Rician noise and blur) to 3D
//! volumes, computes a ground-truth quality score in `[0, 1]` for each,
//! and generates reproducible scored datasets for training quality
//! regressors.
//!
//! Heavy inner loops (FFT line passes, per-voxel maps, dataset samples)
//! run on rayon when the default `parallel` feature is enabled and fall
//! back to plain iterators otherwise. Results are bit-identical either
//! way: every floating-point reduction uses a fixed block order.

pub mod augment;
pub mod distortion;
mod error;
pub mod filter;
pub mod fixed;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod seed;
pub mod spectral;
pub mod volume;

pub use augment::AugmentSpec;
pub use distortion::{DistortionKind, DistortionParams, DistortionRecord};
pub use error::{Error, Result};
pub use metrics::{LossParams, QualityVector};
pub use spectral::KSpace;
pub use volume::{SourceType, Volume, VolumeStats};
