use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distortion::DistortionKind;
use crate::error::{Error, Result};
use crate::fixed::Fixed6;
use crate::metrics::{self, ScoreSummary};
use crate::par;
use crate::volume::{self, Volume};

use super::DatasetManifest;

/// Population mean and standard deviation of the finite values in a column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStat {
    pub name: String,
    pub mean: Fixed6,
    pub sd: Fixed6,
    pub count: usize,
}

impl ColumnStat {
    pub fn from_values(name: &str, values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let (mean, sd) = if v.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        ColumnStat {
            name: name.to_string(),
            mean: Fixed6(mean),
            sd: Fixed6(sd),
            count: v.len(),
        }
    }
}

/// Scores for one `(reference, image)` pair, or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    #[serde(rename = "ref")]
    pub ref_path: String,
    #[serde(rename = "img")]
    pub img_path: String,
    pub scores: Option<ScoreSummary>,
    /// `None` when any axis is shorter than the SSIM window.
    pub ssim: Option<Fixed6>,
    /// `null` in JSON for identical images.
    pub psnr: Option<Fixed6>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub pairs: Vec<PairReport>,
    pub columns: Vec<ColumnStat>,
}

const SCORE_COLUMNS: [&str; 9] = [
    "contrast",
    "bias",
    "ring",
    "ghost",
    "noise",
    "blur",
    "aggregate",
    "ssim",
    "psnr",
];

/// Integer data is scaled by its type maximum; reals outside `[0, 1]` are rescaled.
fn load_for_scoring(path: &Path) -> Result<Volume> {
    let v = volume::load_volume(path)?;
    Ok(
        if v.source_type().integer_max().is_some() || !v.in_unit_range() {
            volume::normalize_intensity(&v)
        } else {
            v
        },
    )
}

fn score_volumes(ref_path: &Path, img_path: &Path) -> Result<(ScoreSummary, Option<f64>, f64)> {
    let r = load_for_scoring(ref_path)?;
    let i = load_for_scoring(img_path)?;
    r.ensure_same_dims(&i)?;
    let q = metrics::pair_quality(&r, &i)?;
    let ssim = if r.dims().iter().all(|&d| d >= metrics::SSIM_WINDOW) {
        Some(metrics::ssim3d(&r, &i)?)
    } else {
        None
    };
    Ok((q.into(), ssim, metrics::psnr(&r, &i)?))
}

fn row_values(p: &PairReport) -> Option<[f64; 9]> {
    let s = p.scores?;
    let ssim = p.ssim.map_or(f64::NAN, |x| x.0);
    let psnr = p.psnr.map_or(f64::INFINITY, |x| x.0);
    Some([
        s.contrast,
        s.bias,
        s.ring,
        s.ghost,
        s.noise,
        s.blur,
        s.aggregate,
        ssim,
        psnr,
    ])
}

/// Scores every pair; a failing pair is reported and the rest still run.
pub fn score_report(pairs: &[(PathBuf, PathBuf)]) -> ScoreReport {
    let rows = par::map_tasks(pairs, |_, (r, i)| {
        let mut row = PairReport {
            ref_path: r.to_string_lossy().into_owned(),
            img_path: i.to_string_lossy().into_owned(),
            scores: None,
            ssim: None,
            psnr: None,
            error: None,
        };
        match score_volumes(r, i) {
            Ok((scores, ssim, psnr)) => {
                row.scores = Some(scores);
                row.ssim = ssim.map(Fixed6);
                row.psnr = psnr.is_finite().then_some(Fixed6(psnr));
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    });
    let values: Vec<[f64; 9]> = rows.iter().filter_map(row_values).collect();
    let columns = SCORE_COLUMNS
        .iter()
        .enumerate()
        .map(|(c, name)| ColumnStat::from_values(name, values.iter().map(|v| v[c])))
        .collect();
    ScoreReport {
        pairs: rows,
        columns,
    }
}

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        "-".into()
    }
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header);
    for r in rows {
        line(r);
    }
    out
}

impl ScoreReport {
    pub fn failures(&self) -> usize {
        self.pairs.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn column(&self, name: &str) -> Option<&ColumnStat> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> String {
        let mut header = vec!["pair".to_string()];
        header.extend(SCORE_COLUMNS.iter().map(|s| s.to_string()));
        let mut rows = Vec::new();
        let mut errors = String::new();
        for (i, p) in self.pairs.iter().enumerate() {
            match row_values(p) {
                Some(v) => {
                    let mut r = vec![i.to_string()];
                    r.extend(v.iter().map(|&x| cell(x)));
                    rows.push(r);
                }
                None => {
                    let _ = writeln!(
                        errors,
                        "pair {i} ({} vs {}): {}",
                        p.ref_path,
                        p.img_path,
                        p.error.as_deref().unwrap_or("?")
                    );
                }
            }
        }
        let mut mean = vec!["mean".to_string()];
        let mut sd = vec!["sd".to_string()];
        for c in &self.columns {
            mean.push(cell(c.mean.0));
            sd.push(cell(c.sd.0));
        }
        rows.push(mean);
        rows.push(sd);
        render_table(&header, &rows) + &errors
    }
}

/// Reads `ref,img` rows. A first row of `ref,img` is treated as a header;
/// relative paths are resolved against the CSV's directory.
pub fn read_pairs_csv(path: impl AsRef<Path>) -> Result<Vec<(PathBuf, PathBuf)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |s: &str| {
        let p = PathBuf::from(s.trim());
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Contract(format!("{}: {e}", path.display())))?;
        if row.len() != 2 {
            return Err(Error::Contract(format!(
                "{}: row {} must have exactly two fields `ref,img`",
                path.display(),
                n + 1
            )));
        }
        if n == 0 && row[0].eq_ignore_ascii_case("ref") && row[1].eq_ignore_ascii_case("img") {
            continue;
        }
        pairs.push((resolve(&row[0]), resolve(&row[1])));
    }
    Ok(pairs)
}

/// Target statistics for a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestReport {
    pub n_samples: usize,
    pub single: usize,
    pub mixed: usize,
    /// How many samples include each artifact kind, in canonical order.
    pub applied: Vec<(DistortionKind, usize)>,
    pub columns: Vec<ColumnStat>,
}

pub fn manifest_report(m: &DatasetManifest) -> ManifestReport {
    let single = m
        .records
        .iter()
        .filter(|r| r.distortions.len() == 1)
        .count();
    let mixed = m
        .records
        .iter()
        .filter(|r| r.distortions.len() >= 2)
        .count();
    let applied = DistortionKind::ALL
        .iter()
        .map(|&k| {
            (
                k,
                m.records
                    .iter()
                    .filter(|r| r.distortions.iter().any(|d| d.kind() == k))
                    .count(),
            )
        })
        .collect();
    let mut columns: Vec<ColumnStat> = DistortionKind::ALL
        .iter()
        .map(|&k| ColumnStat::from_values(k.name(), m.records.iter().map(|r| r.target.get(k))))
        .collect();
    columns.push(ColumnStat::from_values(
        "aggregate",
        m.records
            .iter()
            .map(|r| metrics::aggregate_quality(&r.target)),
    ));
    ManifestReport {
        n_samples: m.records.len(),
        single,
        mixed,
        applied,
        columns,
    }
}

impl ManifestReport {
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "samples: {}  single: {}  mixed: {}\n",
            self.n_samples, self.single, self.mixed
        );
        let header: Vec<String> = ["target", "mean", "sd", "applied"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<String>> = self
            .columns
            .iter()
            .map(|c| {
                let applied = self
                    .applied
                    .iter()
                    .find(|(k, _)| k.name() == c.name)
                    .map_or("-".to_string(), |(_, n)| n.to_string());
                vec![c.name.clone(), cell(c.mean.0), cell(c.sd.0), applied]
            })
            .collect();
        out += &render_table(&header, &rows);
        out
    }
}
