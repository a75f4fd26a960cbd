//! `mriq` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 data error.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mriq_core::distortion::{self, BlurMode, DistortionKind, DistortionParams};
use mriq_core::metrics::{self, ScoreSummary};
use mriq_core::pipeline::{self, SampleOptions};
use mriq_core::seed;
use mriq_core::volume::{self, Volume};
use mriq_core::Error;
use rand::Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "mriq",
    version,
    about = "MRI artifact simulation and quality scoring"
)]
struct Cli {
    /// Worker threads (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply one artifact to a volume and report its ground-truth score.
    Distort(DistortArgs),
    /// Reference-based quality scores for an image against its reference.
    Score(ScoreArgs),
    /// Generate a scored synthetic dataset.
    GenDataset(GenArgs),
    /// Summarize a dataset manifest or score a list of pairs.
    Report(ReportArgs),
    /// Print volume geometry and intensity range.
    Info(InfoArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Contrast,
    Bias,
    Ring,
    Ghost,
    Noise,
    Blur,
}

impl From<Kind> for DistortionKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Contrast => DistortionKind::Contrast,
            Kind::Bias => DistortionKind::Bias,
            Kind::Ring => DistortionKind::Ring,
            Kind::Ghost => DistortionKind::Ghost,
            Kind::Noise => DistortionKind::Noise,
            Kind::Blur => DistortionKind::Blur,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BlurKind {
    Resample,
    Gaussian,
}

#[derive(Args, Debug)]
struct DistortArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    gamma: Option<f64>,
    /// Bias field centre, 1-based on the 224 grid.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    center: Option<Vec<f64>>,
    /// Ringing cutoff.
    #[arg(long = "fc")]
    cutoff: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    axis: Option<usize>,
    #[arg(long)]
    variance: Option<f64>,
    #[arg(long = "blur-mode", value_enum)]
    blur_mode: Option<BlurKind>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    kernel: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Seeds the noise generator and any parameter not given explicitly.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the distortion record here as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    img: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Directory of reference volumes.
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long = "mix-prob")]
    mix_prob: f64,
    /// Side length of the preprocessed cube.
    #[arg(long, default_value_t = pipeline::DEFAULT_DIM)]
    dim: usize,
    /// Skip the random geometric augmentations.
    #[arg(long)]
    no_augment: bool,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
struct ReportSource {
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// CSV of `ref,img` rows.
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    source: ReportSource,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) if e.is_parameter_error() => EXIT_USAGE,
            Failure::Core(_) => EXIT_DATA,
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match with_threads(cli.threads, || dispatch(cli.command)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

#[cfg(feature = "parallel")]
fn with_threads(threads: usize, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads(_threads: usize, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    f()
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Distort(a) => distort(a),
        Command::Score(a) => score(a),
        Command::GenDataset(a) => gen_dataset(a),
        Command::Report(a) => report(a),
        Command::Info(a) => info(a),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

/// Loads a volume for distortion: integer data is scaled by its type
/// maximum and real data outside `[0, 1]` is min-max rescaled.
fn load_unit(path: &Path) -> Result<Volume, Failure> {
    let v = volume::load_volume(path)?;
    Ok(
        if v.source_type().integer_max().is_some() || !v.in_unit_range() {
            volume::normalize_intensity(&v)
        } else {
            v
        },
    )
}

fn distortion_params(a: &DistortArgs) -> Result<DistortionParams, Failure> {
    let kind = DistortionKind::from(a.kind);
    let given: &[(&str, bool, DistortionKind)] = &[
        ("--gamma", a.gamma.is_some(), DistortionKind::Contrast),
        ("--center", a.center.is_some(), DistortionKind::Bias),
        ("--fc", a.cutoff.is_some(), DistortionKind::Ring),
        ("--alpha", a.alpha.is_some(), DistortionKind::Ghost),
        ("--axis", a.axis.is_some(), DistortionKind::Ghost),
        ("--variance", a.variance.is_some(), DistortionKind::Noise),
        ("--blur-mode", a.blur_mode.is_some(), DistortionKind::Blur),
        ("--scale", a.scale.is_some(), DistortionKind::Blur),
        ("--kernel", a.kernel.is_some(), DistortionKind::Blur),
        ("--sigma", a.sigma.is_some(), DistortionKind::Blur),
    ];
    if let Some((flag, _, _)) = given.iter().find(|(_, set, k)| *set && *k != kind) {
        return Err(Failure::Usage(format!(
            "{flag} does not apply to --kind {kind}"
        )));
    }
    let mut rng = seed::rng_from_seed(a.seed);
    let sampled = distortion::sample_params(kind, &mut rng);
    let params = match sampled {
        DistortionParams::Contrast { gamma } => DistortionParams::Contrast {
            gamma: a.gamma.unwrap_or(gamma),
        },
        DistortionParams::Bias { center } => DistortionParams::Bias {
            center: match &a.center {
                Some(c) => [c[0], c[1], c[2]],
                None => center,
            },
        },
        DistortionParams::Ring { cutoff } => DistortionParams::Ring {
            cutoff: a.cutoff.unwrap_or(cutoff),
        },
        DistortionParams::Ghost { alpha, axis } => DistortionParams::Ghost {
            alpha: a.alpha.unwrap_or(alpha),
            axis: a.axis.unwrap_or(axis),
        },
        DistortionParams::Noise { variance, .. } => DistortionParams::Noise {
            variance: a.variance.unwrap_or(variance),
            seed: a.seed,
        },
        DistortionParams::Blur { mode } => DistortionParams::Blur {
            mode: blur_mode(a, mode)?,
        },
    };
    Ok(params)
}

fn blur_mode(a: &DistortArgs, sampled: BlurMode) -> Result<BlurMode, Failure> {
    let resample_flags = a.scale.is_some();
    let gaussian_flags = a.kernel.is_some() || a.sigma.is_some();
    let chosen = match a.blur_mode {
        Some(m) => Some(m),
        None if resample_flags && !gaussian_flags => Some(BlurKind::Resample),
        None if gaussian_flags && !resample_flags => Some(BlurKind::Gaussian),
        None if resample_flags => {
            return Err(Failure::Usage(
                "--scale cannot be combined with --kernel/--sigma".into(),
            ))
        }
        None => None,
    };
    let mut rng = seed::rng_from_seed(a.seed);
    Ok(match chosen {
        None => sampled,
        Some(BlurKind::Resample) => {
            if gaussian_flags {
                return Err(Failure::Usage(
                    "--kernel/--sigma need --blur-mode gaussian".into(),
                ));
            }
            let (lo, hi) = distortion::BLUR_SCALE_RANGE;
            BlurMode::Resample {
                scale: a.scale.unwrap_or_else(|| rng.random_range(lo..=hi)),
            }
        }
        Some(BlurKind::Gaussian) => {
            if resample_flags {
                return Err(Failure::Usage("--scale needs --blur-mode resample".into()));
            }
            let (klo, khi) = distortion::BLUR_KERNEL_RANGE;
            let (slo, shi) = distortion::BLUR_SIGMA_RANGE;
            let kernel = klo + 2 * rng.random_range(0..=(khi - klo) / 2);
            let sigma = rng.random_range(slo..=shi);
            BlurMode::Gaussian {
                kernel: a.kernel.unwrap_or(kernel),
                sigma: a.sigma.unwrap_or(sigma),
            }
        }
    })
}

fn distort(a: DistortArgs) -> Outcome {
    let params = distortion_params(&a)?;
    params.validate()?;
    let v = load_unit(&a.input)?;
    let (out, record) = distortion::apply(&v, &params)?;
    volume::save_volume(&out, &a.output)?;
    let json = serde_json::to_string_pretty(&record)? + "\n";
    if let Some(p) = &a.json {
        write_text(p, &json)?;
    }
    print(&json);
    Ok(EXIT_OK)
}

fn score(a: ScoreArgs) -> Outcome {
    let r = load_unit(&a.reference)?;
    let i = load_unit(&a.img)?;
    r.ensure_same_dims(&i)?;
    let summary = ScoreSummary::from(metrics::pair_quality(&r, &i)?);
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    if let Some(p) = &a.json {
        write_text(p, &json)?;
    }
    print(&json);
    Ok(EXIT_OK)
}

fn gen_dataset(a: GenArgs) -> Outcome {
    let mut opts = SampleOptions::new(a.dim, a.mix_prob);
    opts.augment = !a.no_augment;
    opts.validate()?;
    let refs = pipeline::list_volume_files(&a.refs)?;
    if refs.is_empty() {
        return Err(Error::Contract(format!("no volumes found in {}", a.refs.display())).into());
    }
    let manifest = pipeline::generate_dataset(&refs, a.n, a.seed, &opts, &a.out)?;
    print(&format!(
        "wrote {} samples to {}\n",
        manifest.records.len(),
        a.out.display()
    ));
    Ok(EXIT_OK)
}

fn report(a: ReportArgs) -> Outcome {
    if let Some(m) = &a.source.manifest {
        let manifest = pipeline::read_manifest(m)?;
        let rep = pipeline::manifest_report(&manifest);
        if let Some(p) = &a.json {
            write_text(p, &(serde_json::to_string_pretty(&rep)? + "\n"))?;
        }
        print(&rep.to_table());
        return Ok(EXIT_OK);
    }
    let csv = a.source.pairs.as_ref().expect("clap enforces one source");
    let pairs = pipeline::read_pairs_csv(csv)?;
    let rep = pipeline::score_report(&pairs);
    if let Some(p) = &a.json {
        write_text(p, &(serde_json::to_string_pretty(&rep)? + "\n"))?;
    }
    print(&rep.to_table());
    Ok(if rep.failures() > 0 {
        EXIT_DATA
    } else {
        EXIT_OK
    })
}

fn info(a: InfoArgs) -> Outcome {
    let v = volume::load_volume(&a.input)?;
    let (lo, hi) = v.min_max();
    let s = v.stats();
    let [x, y, z] = v.dims();
    let [sx, sy, sz] = v.spacing();
    print(&format!(
        "dims: {x} x {y} x {z}\nspacing: {sx} x {sy} x {sz} mm\ndatatype: {}\nmin: {lo:.6}\nmax: {hi:.6}\nmean: {:.6}\nstd: {:.6}\n",
        v.source_type().name(),
        s.mean,
        s.std
    ));
    Ok(EXIT_OK)
}
