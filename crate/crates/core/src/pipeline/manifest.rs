use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{self, AugmentSpec};
use crate::distortion::{self, DistortionRecord};
use crate::error::{Error, Result};
use crate::fixed::{self, Fixed6};
use crate::metrics::QualityVector;

use super::SampleOptions;

/// One generated sample. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub source_path: String,
    pub seed: u64,
    pub augment: AugmentSpec,
    pub distortions: Vec<DistortionRecord>,
    pub target: QualityVector,
    /// Relative to the dataset directory.
    pub output_path: String,
}

/// Parameter ranges in effect when a dataset was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    pub gamma: [Fixed6; 2],
    pub bias_center: [Fixed6; 2],
    pub ring_cutoff: [u32; 2],
    pub ghost_alpha: [Fixed6; 2],
    pub noise_variance: [Fixed6; 2],
    pub blur_scale: [Fixed6; 2],
    pub blur_kernel: [usize; 2],
    pub blur_sigma: [Fixed6; 2],
    pub translation: [i32; 2],
    pub rotation_deg: [Fixed6; 2],
    pub elastic_sigma: [Fixed6; 2],
    pub elastic_scale: [Fixed6; 2],
    pub strip_radius: [usize; 2],
}

impl Default for ParameterRanges {
    fn default() -> Self {
        let f = |(a, b): (f64, f64)| [Fixed6(a), Fixed6(b)];
        ParameterRanges {
            gamma: f(distortion::GAMMA_RANGE),
            bias_center: f(distortion::BIAS_CENTER_RANGE),
            ring_cutoff: [
                distortion::RING_CUTOFF_RANGE.0,
                distortion::RING_CUTOFF_RANGE.1,
            ],
            ghost_alpha: f(distortion::GHOST_ALPHA_RANGE),
            noise_variance: f(distortion::NOISE_VARIANCE_RANGE),
            blur_scale: f(distortion::BLUR_SCALE_RANGE),
            blur_kernel: [
                distortion::BLUR_KERNEL_RANGE.0,
                distortion::BLUR_KERNEL_RANGE.1,
            ],
            blur_sigma: f(distortion::BLUR_SIGMA_RANGE),
            translation: [augment::TRANSLATION_RANGE.0, augment::TRANSLATION_RANGE.1],
            rotation_deg: f(augment::ROTATION_RANGE_DEG),
            elastic_sigma: f(augment::ELASTIC_SIGMA_RANGE),
            elastic_scale: f(augment::ELASTIC_SCALE_RANGE),
            strip_radius: [augment::STRIP_RADIUS_RANGE.0, augment::STRIP_RADIUS_RANGE.1],
        }
    }
}

/// Generation settings echoed as the first manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub base_seed: u64,
    pub n_samples: usize,
    #[serde(with = "fixed::six")]
    pub mix_probability: f64,
    pub dim: usize,
    pub augment: bool,
    pub refs: Vec<String>,
    pub ranges: ParameterRanges,
}

impl DatasetConfig {
    pub fn new(refs: &[PathBuf], n_samples: usize, base_seed: u64, opts: &SampleOptions) -> Self {
        DatasetConfig {
            base_seed,
            n_samples,
            mix_probability: opts.mix_probability,
            dim: opts.dim,
            augment: opts.augment,
            refs: refs
                .iter()
                .map(|p| p.to_string_lossy().into_owned())
                .collect(),
            ranges: ParameterRanges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub config: DatasetConfig,
    pub records: Vec<SampleRecord>,
}

#[derive(Serialize, Deserialize)]
struct ConfigLine {
    config: DatasetConfig,
}

/// JSONL: a `{"config": ...}` line followed by one record per line.
pub fn write_manifest(m: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let header = ConfigLine {
        config: m.config.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n").map_err(io)?;
    for r in &m.records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Contract(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header: ConfigLine = serde_json::from_str(&first)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: SampleRecord = serde_json::from_str(&line)?;
        if r.sample_id != records.len() {
            return Err(Error::Contract(format!(
                "manifest sample ids must be dense, found {} at position {}",
                r.sample_id,
                records.len()
            )));
        }
        records.push(r);
    }
    Ok(DatasetManifest {
        config: header.config,
        records,
    })
}
