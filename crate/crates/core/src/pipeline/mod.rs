//! Scored dataset generation and reporting.
//!
//! Each sample is a pure function of its preprocessed reference and a seed
//! derived from the base seed and the sample id, so datasets come out the
//! same regardless of how samples are scheduled across threads.

mod manifest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::augment::{self, AugmentSpec};
use crate::distortion::{self, DistortionKind, DistortionParams, DistortionRecord};
use crate::error::{Error, Result};
use crate::metrics::QualityVector;
use crate::par;
use crate::seed;
use crate::volume::{self, Volume};

pub use manifest::{
    read_manifest, write_manifest, DatasetConfig, DatasetManifest, ParameterRanges, SampleRecord,
};
pub use report::{
    manifest_report, read_pairs_csv, score_report, ColumnStat, ManifestReport, PairReport,
    ScoreReport,
};

/// Side length of preprocessed volumes.
pub const DEFAULT_DIM: usize = distortion::REFERENCE_DIM;
/// Isotropic voxel size after preprocessing, in millimetres.
pub const TARGET_SPACING: f64 = 1.0;
/// File name of the manifest inside a dataset directory.
pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Everything random about one sample, fixed before any voxel is touched.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub augment: AugmentSpec,
    /// Applied in this order; always canonical kind order for drawn plans.
    pub distortions: Vec<DistortionParams>,
}

impl SamplePlan {
    /// No augmentation and no distortion.
    pub fn clean() -> Self {
        SamplePlan {
            augment: AugmentSpec::identity(),
            distortions: Vec::new(),
        }
    }
}

/// Sample-level options shared by a whole dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub dim: usize,
    pub mix_probability: f64,
    pub augment: bool,
}

impl SampleOptions {
    pub fn new(dim: usize, mix_probability: f64) -> Self {
        SampleOptions {
            dim,
            mix_probability,
            augment: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mix_probability) {
            return Err(Error::param(
                "mix_probability",
                self.mix_probability,
                "[0, 1]",
            ));
        }
        if self.dim == 0 {
            return Err(Error::param("dim", 0.0, "[1, inf)"));
        }
        Ok(())
    }
}

/// Kind sets of size 2 to 6 as bitmasks over canonical kind order.
fn mixed_subsets() -> Vec<u32> {
    (0u32..64).filter(|m| m.count_ones() >= 2).collect()
}

/// Draws the plan for one sample. With probability `1 - mix_probability`
/// one uniformly chosen artifact is applied, otherwise a uniformly chosen
/// set of two or more, in canonical order.
pub fn plan_sample(reference: &Volume, seed: u64, opts: &SampleOptions) -> Result<SamplePlan> {
    opts.validate()?;
    let mut rng = seed::rng_from_seed(seed);
    let augment = if opts.augment {
        augment::sample_augment(reference, &mut rng)
    } else {
        AugmentSpec::identity()
    };
    let mask = if rng.random_bool(opts.mix_probability) {
        let subsets = mixed_subsets();
        subsets[rng.random_range(0..subsets.len())]
    } else {
        1 << rng.random_range(0..DistortionKind::ALL.len())
    };
    let distortions = DistortionKind::ALL
        .iter()
        .filter(|k| mask & (1 << k.index()) != 0)
        .map(|&k| distortion::sample_params(k, &mut rng))
        .collect();
    Ok(SamplePlan {
        augment,
        distortions,
    })
}

/// Output of [`render_sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedSample {
    pub volume: Volume,
    pub distortions: Vec<DistortionRecord>,
    pub target: QualityVector,
}

fn require_preprocessed(v: &Volume, dim: usize) -> Result<()> {
    if v.dims() != [dim; 3] {
        return Err(Error::Contract(format!(
            "reference must be preprocessed to {dim}^3, got {:?}",
            v.dims()
        )));
    }
    if !v.in_unit_range() {
        return Err(Error::Contract(
            "reference must be normalized to [0, 1]".into(),
        ));
    }
    Ok(())
}

/// Augments, then applies each distortion to the previous stage's output.
/// Each stage is scored against its own input; kinds not applied score 1.
pub fn render_sample(reference: &Volume, plan: &SamplePlan) -> Result<RenderedSample> {
    let mut current = augment::apply_augment(reference, &plan.augment)?;
    let mut target = QualityVector::ones();
    let mut records = Vec::with_capacity(plan.distortions.len());
    for params in &plan.distortions {
        let (out, record) = distortion::apply(&current, params)?;
        target.set(record.kind(), record.score);
        records.push(record);
        current = out;
    }
    Ok(RenderedSample {
        volume: current,
        distortions: records,
        target,
    })
}

/// Plans and renders one sample from a preprocessed reference.
pub fn generate_sample(
    reference: &Volume,
    seed: u64,
    opts: &SampleOptions,
) -> Result<(RenderedSample, SamplePlan)> {
    require_preprocessed(reference, opts.dim)?;
    let plan = plan_sample(reference, seed, opts)?;
    let rendered = render_sample(reference, &plan)?;
    Ok((rendered, plan))
}

/// Load, normalize to `[0, 1]`, resample to 1 mm isotropic, then pad or
/// crop to `dim`³.
pub fn preprocess(v: &Volume, dim: usize) -> Result<Volume> {
    let normalized = volume::normalize_intensity(v);
    let iso = volume::resample_isotropic(&normalized, TARGET_SPACING)?;
    Ok(volume::pad_center_crop(&iso, dim)?.clamp_unit())
}

pub fn load_preprocessed(path: impl AsRef<Path>, dim: usize) -> Result<Volume> {
    preprocess(&volume::load_volume(path)?, dim)
}

/// Volume files directly inside `dir`, sorted by name.
pub fn list_volume_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let known = [".nii", ".nii.gz", ".hdr", ".hdr.gz", ".f32raw"]
            .iter()
            .any(|ext| name.ends_with(ext));
        if known && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn sample_file_name(sample_id: usize) -> String {
    format!("sample_{sample_id:06}.nii")
}

/// Generates `n_samples` samples into `out_dir`, writing one NIfTI volume per
/// sample and `manifest.jsonl`. Sample `i` uses `refs[i % refs.len()]` and
/// seed `derive(base_seed, i)`.
pub fn generate_dataset(
    refs: &[PathBuf],
    n_samples: usize,
    base_seed: u64,
    opts: &SampleOptions,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    opts.validate()?;
    let out_dir = out_dir.as_ref();
    if refs.is_empty() && n_samples > 0 {
        return Err(Error::Contract(
            "at least one reference volume is required".into(),
        ));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let used = refs.len().min(n_samples);
    let prepared = par::map_tasks(&refs[..used], |_, p| load_preprocessed(p, opts.dim))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<usize> = (0..n_samples).collect();
    let records = par::map_tasks(&ids, |_, &id| -> Result<SampleRecord> {
        let source = id % refs.len();
        let seed = seed::derive(base_seed, id as u64);
        let (rendered, plan) = generate_sample(&prepared[source], seed, opts)?;
        let file = sample_file_name(id);
        volume::save_volume(&rendered.volume, out_dir.join(&file))?;
        Ok(SampleRecord {
            sample_id: id,
            source_path: refs[source].to_string_lossy().into_owned(),
            seed,
            augment: plan.augment,
            distortions: rendered.distortions,
            target: rendered.target,
            output_path: file,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        config: DatasetConfig::new(refs, n_samples, base_seed, opts),
        records,
    };
    write_manifest(&manifest, out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Re-renders a manifest record from its preprocessed reference and returns
/// the recomputed target.
pub fn recompute_target(reference: &Volume, record: &SampleRecord) -> Result<QualityVector> {
    let plan = SamplePlan {
        augment: record.augment.clone(),
        distortions: record.distortions.iter().map(|d| d.params).collect(),
    };
    Ok(render_sample(reference, &plan)?.target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phantom(n: usize) -> Volume {
        let c = (n as f64 - 1.0) / 2.0;
        Volume::from_fn([n; 3], [1.0; 3], move |x, y, z| {
            let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2);
            let base = 0.85 * (-r2 / (0.1 * (n * n) as f64)).exp();
            base + 0.1 * (((x * 3 + y * 5 + z * 7) % 11) as f64 / 10.0) * base
        })
        .unwrap()
    }

    #[test]
    fn there_are_57_mixed_subsets() {
        let s = mixed_subsets();
        assert_eq!(s.len(), 57);
        assert!(s.iter().all(|m| m.count_ones() >= 2 && *m < 64));
    }

    #[test]
    fn forced_ghost_target_layout() {
        let v = phantom(16);
        let plan = SamplePlan {
            augment: AugmentSpec::identity(),
            distortions: vec![DistortionParams::Ghost {
                alpha: 0.5,
                axis: 1,
            }],
        };
        let out = render_sample(&v, &plan).unwrap();
        let t = out.target.to_array();
        assert_eq!([t[0], t[1], t[2], t[4], t[5]], [1.0; 5]);
        assert!((t[3] - 0.5).abs() < 1e-6, "{}", t[3]);
    }

    #[test]
    fn clean_plan_targets_ones() {
        let v = phantom(8);
        let out = render_sample(&v, &SamplePlan::clean()).unwrap();
        assert_eq!(out.target, QualityVector::ones());
        assert_eq!(out.volume, v);
    }

    #[test]
    fn single_vs_mixed_counts() {
        let v = phantom(8);
        let single = SampleOptions::new(8, 0.0);
        let mixed = SampleOptions::new(8, 1.0);
        for s in 0..40 {
            let p = plan_sample(&v, s, &single).unwrap();
            assert_eq!(p.distortions.len(), 1);
            let p = plan_sample(&v, s, &mixed).unwrap();
            assert!(p.distortions.len() >= 2);
            let idx: Vec<_> = p.distortions.iter().map(|d| d.kind().index()).collect();
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn contract_checks() {
        let v = phantom(8);
        let opts = SampleOptions::new(16, 0.5);
        assert!(matches!(
            generate_sample(&v, 1, &opts),
            Err(Error::Contract(_))
        ));
        let bad = v.map(|x| x * 2.0);
        assert!(matches!(
            generate_sample(&bad, 1, &SampleOptions::new(8, 0.5)),
            Err(Error::Contract(_))
        ));
        assert!(SampleOptions::new(8, 1.5).validate().is_err());
    }

    #[test]
    fn sample_is_seed_deterministic_and_recomputable() {
        let v = phantom(16);
        let opts = SampleOptions::new(16, 0.5);
        for seed in [3u64, 99, 12345] {
            let (a, pa) = generate_sample(&v, seed, &opts).unwrap();
            let (b, pb) = generate_sample(&v, seed, &opts).unwrap();
            assert_eq!(a, b);
            assert_eq!(pa, pb);
            assert!(a.volume.in_unit_range() && a.target.is_valid());
        }
    }

    #[test]
    fn preprocess_shapes() {
        let v = Volume::new(
            [4, 6, 3],
            [2.0, 1.0, 3.0],
            (0..72).map(|i| i as f64).collect(),
        )
        .unwrap();
        let p = preprocess(&v, 10).unwrap();
        assert_eq!(p.dims(), [10; 3]);
        assert!(p.in_unit_range());
        assert_eq!(p.spacing(), [1.0; 3]);
    }
}
