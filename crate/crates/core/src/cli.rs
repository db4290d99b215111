//! Batch front end: `denoise`, `indices` and `compare` over WAV files.
//!
//! Every run is a deterministic function of the input bytes and the
//! effective configuration, which is written to a per-file manifest.
//! Settings come from defaults, then an optional flat `key = value` config
//! file, then command-line flags.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::denoise::{denoise, DenoiseReport, FilterConfig, MagnitudeScale, NoiseProfile, Rescale, Variant};
use crate::error::{Error, Result};
use crate::indices::{bgn, bgn_spectral, snr, IndexSeries};
use crate::render::save_spectrogram_png;
use crate::signal_io::{read_audio, write_audio, AudioClip, SampleFormat};

pub const EXIT_OK: i32 = 0;
/// Every input failed, or the run could not start.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// Some inputs failed, others were processed.
pub const EXIT_PARTIAL: i32 = 3;

/// Step C threshold for the original filter in `indices` and `compare` when `--theta` is not given.
pub const DEFAULT_ORIGINAL_THETA: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "soundscape-denoise", version, about = "Spectral denoising and background-noise indices for WAV recordings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter each input and write the denoised audio, noise profile and manifest.
    Denoise(CommonArgs),
    /// Per-second BGN and SNR of each input, optionally of both filtered versions too.
    Indices(CommonArgs),
    /// Run both filter variants and write side-by-side profiles, indices and a summary.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Filter variant: original | updated
    #[arg(long)]
    pub variant: Option<String>,
    /// Step C threshold (required by the original variant in `denoise`)
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub hop: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Resynthesis: phase | literal
    #[arg(long)]
    pub reconstruction: Option<String>,
    /// Profile estimation domain: linear | db
    #[arg(long)]
    pub domain: Option<String>,
    /// Comma-separated artifacts: audio, spectrogram, profile, indices, filtered
    #[arg(long, value_delimiter = ',')]
    pub emit: Vec<String>,
    /// Number of files processed in parallel
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sample format of written audio: float32 | pcm16
    #[arg(long)]
    pub format: Option<String>,
    /// Flat `key = value` file with the same keys as the long flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// WAV files or directories containing WAV files
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Audio,
    Spectrogram,
    Profile,
    Indices,
    Filtered,
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "audio" => Emit::Audio,
            "spectrogram" | "spectrogram_image" => Emit::Spectrogram,
            "profile" | "profile_csv" => Emit::Profile,
            "indices" | "indices_csv" => Emit::Indices,
            "filtered" => Emit::Filtered,
            other => return Err(Error::InvalidParameter(format!("unknown emit kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Denoise,
    Indices,
    Compare,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip)]
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub filter: FilterConfig,
    /// Threshold used for the original variant when comparing.
    pub original_theta: f64,
    pub emit: BTreeSet<Emit>,
    pub workers: usize,
    pub format: SampleFormat,
}

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("{}:{}: expected `key = value`", path.display(), n + 1))
        })?;
        pairs.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("invalid value `{v}` for {key}")))
}

impl CommonArgs {
    /// Fills unset fields from a config file; flags already set win.
    fn merge_file(&mut self, pairs: Vec<(String, String)>) -> Result<()> {
        for (k, v) in pairs {
            match k.as_str() {
                "variant" => self.variant = self.variant.take().or(Some(v)),
                "theta" => self.theta = self.theta.or(Some(parse_num(&k, &v)?)),
                "window" => self.window = self.window.or(Some(parse_num(&k, &v)?)),
                "hop" => self.hop = self.hop.or(Some(parse_num(&k, &v)?)),
                "bins" => self.bins = self.bins.or(Some(parse_num(&k, &v)?)),
                "reconstruction" => self.reconstruction = self.reconstruction.take().or(Some(v)),
                "domain" => self.domain = self.domain.take().or(Some(v)),
                "workers" => self.workers = self.workers.or(Some(parse_num(&k, &v)?)),
                "out" => self.out = self.out.take().or(Some(PathBuf::from(v))),
                "format" => self.format = self.format.take().or(Some(v)),
                "emit" => {
                    if self.emit.is_empty() {
                        self.emit = v.split(',').map(|s| s.trim().to_string()).collect();
                    }
                }
                other => {
                    return Err(Error::InvalidParameter(format!("unknown config key `{other}`")))
                }
            }
        }
        Ok(())
    }

    pub fn resolve(mut self, command: CommandKind) -> Result<RunConfig> {
        if let Some(path) = self.config.clone() {
            let pairs = parse_config_file(&path)?;
            self.merge_file(pairs)?;
        }

        let mut filter = FilterConfig::default();
        if let Some(v) = &self.variant {
            filter.variant = v.parse()?;
        }
        if let Some(w) = self.window {
            filter.window_size = w;
        }
        if let Some(h) = self.hop {
            filter.hop = h;
        }
        if let Some(b) = self.bins {
            filter.bins = b;
        }
        if let Some(r) = &self.reconstruction {
            filter.reconstruction = r.parse()?;
        }
        if let Some(d) = &self.domain {
            filter.domain = d.parse()?;
        }
        filter.theta = self.theta;
        // The mode cap sits at 95% of the histogram whatever the bin count.
        filter.mode_cap_bin = filter.bins * 95 / 100;

        let emit: BTreeSet<Emit> = if self.emit.is_empty() {
            match command {
                CommandKind::Denoise => [Emit::Audio, Emit::Profile].into(),
                CommandKind::Indices => [Emit::Indices].into(),
                CommandKind::Compare => [Emit::Profile, Emit::Indices].into(),
            }
        } else {
            self.emit
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.parse())
                .collect::<Result<_>>()?
        };

        let workers = self.workers.unwrap_or(1);
        if workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        let format = match &self.format {
            Some(f) => f.parse()?,
            None => SampleFormat::Float32,
        };

        let original_theta = self.theta.unwrap_or(DEFAULT_ORIGINAL_THETA);
        match command {
            CommandKind::Denoise => filter.validate()?,
            CommandKind::Indices | CommandKind::Compare => {
                // Both variants run; check each with the threshold it will get.
                FilterConfig { variant: Variant::Original, theta: Some(original_theta), ..filter }.validate()?;
                FilterConfig { variant: Variant::Updated, theta: None, ..filter }.validate()?;
            }
        }

        Ok(RunConfig {
            command,
            inputs: self.inputs,
            out_dir: self.out.unwrap_or_else(|| PathBuf::from(".")),
            filter,
            original_theta,
            emit,
            workers,
            format,
        })
    }
}

impl RunConfig {
    fn original_filter(&self) -> FilterConfig {
        FilterConfig {
            variant: Variant::Original,
            theta: Some(self.original_theta),
            ..self.filter
        }
    }

    fn updated_filter(&self) -> FilterConfig {
        FilterConfig {
            variant: Variant::Updated,
            theta: None,
            ..self.filter
        }
    }
}

/// Expands directories to the WAV files they contain, then sorts and dedups.
pub fn expand_inputs(inputs: &[PathBuf]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            if let Ok(entries) = fs::read_dir(p) {
                files.extend(entries.flatten().map(|e| e.path()).filter(|f| {
                    f.is_file()
                        && f.extension()
                            .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
                }));
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    files.dedup();
    files
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Other(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn profile_csv(profile: &NoiseProfile) -> Result<String> {
    let linear = profile.linear_values();
    let db = match profile.scale {
        MagnitudeScale::Linear => bgn_spectral(profile)?.band_values,
        MagnitudeScale::Decibel => profile.values.clone(),
    };
    let mut out = String::from("frequency_hz,linear,db\n");
    for ((f, l), d) in profile.frequencies.iter().zip(&linear).zip(&db) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*f), fmt_f64(*l), fmt_f64(*d));
    }
    Ok(out)
}

/// Min-max normalization to [0, 1]; a constant input maps to zeros.
pub fn normalize_unit(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

fn indices_csv(columns: &[(&str, &IndexSeries)]) -> String {
    let mut out = String::from("second");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let rows = columns.iter().map(|(_, s)| s.values.len()).min().unwrap_or(0);
    for i in 0..rows {
        out.push_str(&i.to_string());
        for (_, s) in columns {
            out.push(',');
            out.push_str(&fmt_f64(s.values[i]));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct VariantRecord {
    variant: Variant,
    theta_used: f64,
    theta_degenerate: bool,
    rescale: Rescale,
}

impl From<&DenoiseReport> for VariantRecord {
    fn from(r: &DenoiseReport) -> Self {
        Self {
            variant: r.variant,
            theta_used: r.theta_used,
            theta_degenerate: r.theta_degenerate,
            rescale: r.rescale,
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    input: String,
    sample_rate: u32,
    samples: usize,
    config: &'a RunConfig,
    runs: Vec<VariantRecord>,
    outputs: Vec<String>,
}

/// Means reported by `compare`.
#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub input: String,
    pub seconds: usize,
    pub snr_mean_raw: f64,
    pub bgn_mean_raw: f64,
    pub snr_mean_original: f64,
    pub snr_mean_updated: f64,
    pub bgn_mean_original: f64,
    pub bgn_mean_updated: f64,
    pub theta_original: f64,
    pub theta_updated: f64,
}

/// Per-file result line of the aggregate CSV.
#[derive(Debug)]
struct FileOutcome {
    input: PathBuf,
    fields: Result<Vec<String>>,
}

struct Artifacts<'a> {
    cfg: &'a RunConfig,
    stem: String,
    written: Vec<String>,
}

impl<'a> Artifacts<'a> {
    fn new(cfg: &'a RunConfig, input: &Path) -> Self {
        Self {
            cfg,
            stem: stem(input),
            written: Vec::new(),
        }
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}.{suffix}", self.stem);
        self.written.push(name.clone());
        self.cfg.out_dir.join(name)
    }

    fn manifest(&mut self, clip: &AudioClip, input: &Path, runs: Vec<VariantRecord>) -> Result<()> {
        let path = self.path("manifest.json");
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            input: input.display().to_string(),
            sample_rate: clip.sample_rate,
            samples: clip.len(),
            config: self.cfg,
            runs,
            outputs: self.written.clone(),
        };
        write_json(&path, &manifest)
    }
}

fn process_denoise(cfg: &RunConfig, input: &Path) -> Result<Vec<String>> {
    let clip = read_audio(input)?;
    let report = denoise(&clip, &cfg.filter)?;
    let mut art = Artifacts::new(cfg, input);

    if cfg.emit.contains(&Emit::Audio) {
        let p = art.path("denoised.wav");
        write_audio(&report.output, &p, cfg.format)?;
    }
    if cfg.emit.contains(&Emit::Profile) {
        let p = art.path("profile.csv");
        write_text(&p, &profile_csv(&report.profile)?)?;
    }
    if cfg.emit.contains(&Emit::Spectrogram) {
        let before = crate::dsp::stft(&clip, cfg.filter.window_size, cfg.filter.hop)?;
        let p = art.path("spectrogram.input.png");
        save_spectrogram_png(&before.magnitudes, cfg.filter.window_size, &p)?;
        let after = crate::dsp::stft(&report.output, cfg.filter.window_size, cfg.filter.hop)?;
        let p = art.path("spectrogram.denoised.png");
        save_spectrogram_png(&after.magnitudes, cfg.filter.window_size, &p)?;
    }
    if cfg.emit.contains(&Emit::Indices) {
        let raw_bgn = bgn(&clip)?;
        let raw_snr = snr(&clip)?;
        let out_bgn = bgn(&report.output)?;
        let out_snr = snr(&report.output)?;
        let p = art.path("indices.csv");
        write_text(
            &p,
            &indices_csv(&[
                ("BGN_raw", &raw_bgn),
                ("SNR_raw", &raw_snr),
                ("BGN_filtered", &out_bgn),
                ("SNR_filtered", &out_snr),
            ]),
        )?;
    }
    art.manifest(&clip, input, vec![VariantRecord::from(&report)])?;
    Ok(vec![
        report.variant.to_string(),
        fmt_f64(report.theta_used),
        report.theta_degenerate.to_string(),
    ])
}

fn process_indices(cfg: &RunConfig, input: &Path) -> Result<Vec<String>> {
    let clip = read_audio(input)?;
    let mut art = Artifacts::new(cfg, input);
    let raw_bgn = bgn(&clip)?;
    let raw_snr = snr(&clip)?;
    let mut runs = Vec::new();
    let mut columns: Vec<(&str, IndexSeries)> = vec![("BGN_raw", raw_bgn), ("SNR_raw", raw_snr)];

    if cfg.emit.contains(&Emit::Filtered) {
        let original = denoise(&clip, &cfg.original_filter())?;
        let updated = denoise(&clip, &cfg.updated_filter())?;
        columns.push(("BGN_filtered_original", bgn(&original.output)?));
        columns.push(("SNR_filtered_original", snr(&original.output)?));
        columns.push(("BGN_filtered_updated", bgn(&updated.output)?));
        columns.push(("SNR_filtered_updated", snr(&updated.output)?));
        runs.push(VariantRecord::from(&original));
        runs.push(VariantRecord::from(&updated));
    }

    let p = art.path("indices.csv");
    let refs: Vec<(&str, &IndexSeries)> = columns.iter().map(|(n, s)| (*n, s)).collect();
    write_text(&p, &indices_csv(&refs))?;
    art.manifest(&clip, input, runs)?;

    let mut fields = vec![columns[0].1.seconds().to_string()];
    fields.extend(columns.iter().map(|(_, s)| fmt_f64(s.mean())));
    Ok(fields)
}

/// Runs both variants on one clip and returns the summary plus the reports.
pub fn compare_clip(clip: &AudioClip, cfg: &RunConfig) -> Result<(CompareSummary, [DenoiseReport; 2], [IndexSeries; 6])> {
    let original = denoise(clip, &cfg.original_filter())?;
    let updated = denoise(clip, &cfg.updated_filter())?;
    let series = [
        bgn(clip)?,
        snr(clip)?,
        bgn(&original.output)?,
        snr(&original.output)?,
        bgn(&updated.output)?,
        snr(&updated.output)?,
    ];
    let summary = CompareSummary {
        input: clip.source_path.clone().unwrap_or_default(),
        seconds: series[0].seconds(),
        bgn_mean_raw: series[0].mean(),
        snr_mean_raw: series[1].mean(),
        bgn_mean_original: series[2].mean(),
        snr_mean_original: series[3].mean(),
        bgn_mean_updated: series[4].mean(),
        snr_mean_updated: series[5].mean(),
        theta_original: original.theta_used,
        theta_updated: updated.theta_used,
    };
    Ok((summary, [original, updated], series))
}

fn process_compare(cfg: &RunConfig, input: &Path) -> Result<Vec<String>> {
    let clip = read_audio(input)?;
    let (summary, [original, updated], series) = compare_clip(&clip, cfg)?;
    let mut art = Artifacts::new(cfg, input);

    if cfg.emit.contains(&Emit::Profile) {
        let p = art.path("compare.profile.csv");
        let o = original.profile.linear_values();
        let u = updated.profile.linear_values();
        let (on, un) = (normalize_unit(&o), normalize_unit(&u));
        let db = |v: &[f64]| crate::dsp::to_decibel(v, crate::dsp::DB_FLOOR);
        let (od, ud) = (db(&o)?, db(&u)?);
        let mut text = String::from(
            "frequency_hz,original_linear,original_db,original_normalized,updated_linear,updated_db,updated_normalized\n",
        );
        for (i, f) in original.profile.frequencies.iter().enumerate() {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{}",
                fmt_f64(*f),
                fmt_f64(o[i]),
                fmt_f64(od[i]),
                fmt_f64(on[i]),
                fmt_f64(u[i]),
                fmt_f64(ud[i]),
                fmt_f64(un[i])
            );
        }
        write_text(&p, &text)?;
    }
    if cfg.emit.contains(&Emit::Indices) {
        let p = art.path("compare.indices.csv");
        let names = ["BGN_raw", "SNR_raw", "BGN_original", "SNR_original", "BGN_updated", "SNR_updated"];
        let cols: Vec<(&str, &IndexSeries)> = names.iter().copied().zip(series.iter()).collect();
        write_text(&p, &indices_csv(&cols))?;
    }
    if cfg.emit.contains(&Emit::Audio) {
        let p = art.path("original.wav");
        write_audio(&original.output, &p, cfg.format)?;
        let p = art.path("updated.wav");
        write_audio(&updated.output, &p, cfg.format)?;
    }
    if cfg.emit.contains(&Emit::Spectrogram) {
        let w = cfg.filter.window_size;
        let input_spec = crate::dsp::stft(&clip, w, cfg.filter.hop)?;
        for (suffix, mags) in [
            ("spectrogram.input.png", &input_spec.magnitudes),
            ("spectrogram.original.png", &original.filtered.magnitudes),
            ("spectrogram.updated.png", &updated.filtered.magnitudes),
        ] {
            let p = art.path(suffix);
            save_spectrogram_png(mags, w, &p)?;
        }
    }

    let p = art.path("summary.json");
    write_json(&p, &summary)?;
    art.manifest(&clip, input, vec![VariantRecord::from(&original), VariantRecord::from(&updated)])?;

    Ok([
        summary.seconds as f64,
        summary.bgn_mean_raw,
        summary.snr_mean_raw,
        summary.bgn_mean_original,
        summary.snr_mean_original,
        summary.bgn_mean_updated,
        summary.snr_mean_updated,
    ]
    .iter()
    .enumerate()
    .map(|(i, v)| if i == 0 { (*v as usize).to_string() } else { fmt_f64(*v) })
    .collect())
}

fn aggregate_header(cmd: CommandKind, with_filtered: bool) -> &'static str {
    match cmd {
        CommandKind::Denoise => "input,status,variant,theta_used,theta_degenerate",
        CommandKind::Indices if with_filtered => {
            "input,status,seconds,BGN_raw_mean,SNR_raw_mean,BGN_filtered_original_mean,SNR_filtered_original_mean,BGN_filtered_updated_mean,SNR_filtered_updated_mean"
        }
        CommandKind::Indices => "input,status,seconds,BGN_raw_mean,SNR_raw_mean",
        CommandKind::Compare => {
            "input,status,seconds,bgn_mean_raw,snr_mean_raw,bgn_mean_original,snr_mean_original,bgn_mean_updated,snr_mean_updated"
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Outcome of a batch run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub succeeded: usize,
    pub failed: usize,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        match (self.succeeded, self.failed) {
            (_, 0) => EXIT_OK,
            (0, _) => EXIT_FAILED,
            _ => EXIT_PARTIAL,
        }
    }
}

/// Processes every input of a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    let files = expand_inputs(&cfg.inputs);
    if files.is_empty() {
        return Err(Error::InvalidParameter("no input files".into()));
    }
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Other(e.to_string()))?;
    let process = match cfg.command {
        CommandKind::Denoise => process_denoise,
        CommandKind::Indices => process_indices,
        CommandKind::Compare => process_compare,
    };
    let outcomes: Vec<FileOutcome> = pool.install(|| {
        files
            .par_iter()
            .map(|f| FileOutcome {
                input: f.clone(),
                fields: process(cfg, f),
            })
            .collect()
    });

    let mut text = String::from(aggregate_header(cfg.command, cfg.emit.contains(&Emit::Filtered)));
    text.push('\n');
    let mut summary = RunSummary { succeeded: 0, failed: 0 };
    for o in &outcomes {
        let input = csv_field(&o.input.display().to_string());
        match &o.fields {
            Ok(fields) => {
                summary.succeeded += 1;
                let _ = writeln!(text, "{input},ok,{}", fields.join(","));
            }
            Err(e) => {
                summary.failed += 1;
                eprintln!("error: {e}");
                let _ = writeln!(text, "{input},{}", csv_field(&format!("error: {e}")));
            }
        }
    }
    let name = match cfg.command {
        CommandKind::Denoise => "denoise_summary.csv",
        CommandKind::Indices => "indices_summary.csv",
        CommandKind::Compare => "compare_summary.csv",
    };
    write_text(&cfg.out_dir.join(name), &text)?;
    Ok(summary)
}

/// Parses arguments (including the program name) and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = match cli.command {
        Command::Denoise(a) => (CommandKind::Denoise, a),
        Command::Indices(a) => (CommandKind::Indices, a),
        Command::Compare(a) => (CommandKind::Compare, a),
    };
    let cfg = match args.resolve(kind) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cfg) {
        Ok(summary) => summary.exit_code(),
        Err(Error::InvalidParameter(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILED
        }
    }
}
