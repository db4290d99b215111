//! Modal spectral subtraction.
//!
//! Two variants share one pipeline:
//!
//! * [`Variant::Original`]: per-band histogram mode as the noise profile,
//!   profile subtraction with truncation at zero, then the event-preserving
//!   pass ([`step_c`]) driven by a user-supplied threshold `theta`.
//! * [`Variant::Updated`]: the signal is first mapped affinely onto [-1, 1];
//!   each band's profile value is the Otsu split of its outlier-free
//!   magnitudes, and `theta` is the Otsu split of the outlier-free window
//!   means of the subtracted spectrogram. The output is mapped back to the
//!   input's range.
//!
//! Spectrogram rows are frequency bands and columns are frames throughout.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{self, histogram, istft, moving_average, stft, Spectrogram, DB_FLOOR};
use crate::error::{Error, Result};
use crate::signal_io::AudioClip;
use crate::stats::{robust_threshold, ThresholdSearch, DEFAULT_MAX_ROUNDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Updated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    /// Filtered magnitude with the phase of the unfiltered spectrum.
    PhasePreserving,
    /// `abs(istft(S * Sxx))`, element-wise product of filtered magnitude and complex spectrum.
    Literal,
}

/// Scale of the values a profile (or a working spectrogram) is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeScale {
    Linear,
    #[serde(rename = "db")]
    Decibel,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($text:literal => $val:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($val),)+
                    other => Err(Error::InvalidParameter(format!("unknown {} `{other}`", $what))),
                }
            }
        }
    };
}

keyword_enum!(Variant, "variant", { "original" => Variant::Original, "updated" => Variant::Updated });
keyword_enum!(Reconstruction, "reconstruction", {
    "phase" => Reconstruction::PhasePreserving,
    "phase_preserving" => Reconstruction::PhasePreserving,
    "literal" => Reconstruction::Literal,
});
keyword_enum!(MagnitudeScale, "magnitude scale", {
    "linear" => MagnitudeScale::Linear,
    "db" => MagnitudeScale::Decibel,
});

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Original => "original",
            Variant::Updated => "updated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub variant: Variant,
    /// Step C threshold. Required for the original variant; derived when absent for the updated one.
    pub theta: Option<f64>,
    pub window_size: usize,
    pub hop: usize,
    pub bins: usize,
    /// Moving-average window over histogram counts.
    pub smooth_window: usize,
    /// Moving-average window over the finished profile, across bands.
    pub profile_smooth_window: usize,
    pub stepc_rows: usize,
    pub stepc_cols: usize,
    /// 1-based histogram bin that caps the modal estimate.
    pub mode_cap_bin: usize,
    pub max_rounds: usize,
    pub reconstruction: Reconstruction,
    /// Domain in which profiles are estimated and subtracted.
    pub domain: MagnitudeScale,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Updated,
            theta: None,
            window_size: dsp::DEFAULT_WINDOW,
            hop: dsp::DEFAULT_HOP,
            bins: dsp::DEFAULT_BINS,
            smooth_window: dsp::DEFAULT_SMOOTH,
            profile_smooth_window: dsp::DEFAULT_SMOOTH,
            stepc_rows: 9,
            stepc_cols: 3,
            mode_cap_bin: 95,
            max_rounds: DEFAULT_MAX_ROUNDS,
            reconstruction: Reconstruction::PhasePreserving,
            domain: MagnitudeScale::Linear,
        }
    }
}

impl FilterConfig {
    pub fn original(theta: f64) -> Self {
        Self {
            variant: Variant::Original,
            theta: Some(theta),
            ..Self::default()
        }
    }

    pub fn updated() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let odd = |n: usize| n > 0 && n % 2 == 1;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.window_size < 2 || self.hop == 0 {
            return bad(format!("window {} / hop {}", self.window_size, self.hop));
        }
        if self.bins == 0 {
            return bad("bins must be positive".into());
        }
        if !odd(self.smooth_window) || !odd(self.profile_smooth_window) {
            return bad("smoothing windows must be odd and positive".into());
        }
        if !odd(self.stepc_rows) || !odd(self.stepc_cols) {
            return bad(format!(
                "step C window {}x{} must have odd positive sides",
                self.stepc_rows, self.stepc_cols
            ));
        }
        if self.mode_cap_bin == 0 || self.mode_cap_bin >= self.bins {
            return bad(format!(
                "mode cap bin {} must lie in 1..{}",
                self.mode_cap_bin, self.bins
            ));
        }
        if let Some(t) = self.theta {
            if !t.is_finite() {
                return bad("theta must be finite".into());
            }
        }
        if self.variant == Variant::Original && self.theta.is_none() {
            return Err(Error::MissingTheta);
        }
        Ok(())
    }

    fn search(&self) -> ThresholdSearch {
        ThresholdSearch {
            bins: self.bins,
            smooth_window: self.smooth_window,
            max_rounds: self.max_rounds,
        }
    }
}

/// One noise estimate per frequency band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub values: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub scale: MagnitudeScale,
}

impl NoiseProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in linear amplitude, whatever the stored scale.
    pub fn linear_values(&self) -> Vec<f64> {
        match self.scale {
            MagnitudeScale::Linear => self.values.clone(),
            MagnitudeScale::Decibel => self.values.iter().map(|db| 10f64.powf(db / 20.0)).collect(),
        }
    }
}

/// Affine map `y = gain * x + offset` sending a signal's range onto [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    pub gain: f64,
    pub offset: f64,
}

impl Rescale {
    pub const IDENTITY: Rescale = Rescale {
        gain: 1.0,
        offset: 0.0,
    };

    /// Min-max fit. A constant signal maps to zero.
    pub fn fit(samples: &[f64]) -> Self {
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if hi <= lo || hi.is_nan() || lo.is_nan() {
            let c = if lo.is_finite() { lo } else { 0.0 };
            return Rescale {
                gain: 1.0,
                offset: -c,
            };
        }
        let span = hi - lo;
        Rescale {
            gain: 2.0 / span,
            offset: -(hi + lo) / span,
        }
    }

    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        samples.iter().map(|x| x * self.gain + self.offset).collect()
    }

    pub fn invert(&self, samples: &[f64]) -> Vec<f64> {
        samples.iter().map(|y| (y - self.offset) / self.gain).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub value: f64,
    /// The window means left a single occupied histogram bin, so no split existed.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct DenoiseReport {
    pub variant: Variant,
    pub profile: NoiseProfile,
    pub theta_used: f64,
    /// Set when `theta` was derived and the derivation was degenerate.
    pub theta_degenerate: bool,
    /// Spectrogram of the rescaled input with magnitudes replaced by the filtered ones.
    pub filtered: Spectrogram,
    pub output: AudioClip,
    pub rescale: Rescale,
}

fn require_frames(spec: &Spectrogram) -> Result<()> {
    if spec.frames() == 0 || spec.bins() == 0 {
        Err(Error::EmptyInput)
    } else {
        Ok(())
    }
}

/// Histogram-mode estimate of a single band, capped at `mode_cap_bin`.
pub fn modal_level(row: &[f64], cfg: &FilterConfig) -> Result<f64> {
    let hist = histogram(row, cfg.bins)?;
    let smoothed = hist.smoothed_counts(cfg.smooth_window)?;
    let mut best = 0;
    for (j, &c) in smoothed.iter().enumerate() {
        if c > smoothed[best] {
            best = j;
        }
    }
    if hist.len() == cfg.bins && best + 1 > cfg.mode_cap_bin {
        best = cfg.mode_cap_bin - 1;
    }
    Ok(hist.bin_centers[best])
}

/// Otsu split of a single band after iterative outlier removal.
pub fn otsu_level(row: &[f64], cfg: &FilterConfig) -> Result<f64> {
    Ok(robust_threshold(row, cfg.search())?.threshold_value)
}

fn build_profile(
    spec: &Spectrogram,
    cfg: &FilterConfig,
    scale: MagnitudeScale,
    level: fn(&[f64], &FilterConfig) -> Result<f64>,
) -> Result<NoiseProfile> {
    require_frames(spec)?;
    let raw: Vec<f64> = (0..spec.bins())
        .into_par_iter()
        .map(|i| level(&dsp::row_vec(&spec.magnitudes, i), cfg))
        .collect::<Result<_>>()?;
    Ok(NoiseProfile {
        values: moving_average(&raw, cfg.profile_smooth_window)?,
        frequencies: spec.frequencies(),
        scale,
    })
}

/// Original noise profile: per-band histogram mode, then smoothed across bands.
pub fn profile_modal(spec: &Spectrogram, cfg: &FilterConfig) -> Result<NoiseProfile> {
    build_profile(spec, cfg, MagnitudeScale::Linear, modal_level)
}

/// Updated noise profile: per-band Otsu split of outlier-free magnitudes, smoothed across bands.
pub fn profile_otsu(spec: &Spectrogram, cfg: &FilterConfig) -> Result<NoiseProfile> {
    build_profile(spec, cfg, MagnitudeScale::Linear, otsu_level)
}

/// `max(S - profile, 0)` row by row; complex values are left untouched.
pub fn subtract_profile(spec: &Spectrogram, profile: &NoiseProfile) -> Result<Spectrogram> {
    if profile.len() != spec.bins() {
        return Err(Error::ShapeMismatch(format!(
            "profile of {} bands for {} spectrogram rows",
            profile.len(),
            spec.bins()
        )));
    }
    let mut out = spec.magnitudes.clone();
    for (mut row, &p) in out.axis_iter_mut(Axis(0)).zip(&profile.values) {
        row.mapv_inplace(|s| {
            let d = s - p;
            if d < 0.0 {
                0.0
            } else {
                d
            }
        });
    }
    spec.with_magnitudes(out)
}

/// Mean and minimum over the `rows x cols` window centered on every cell,
/// clipped to the matrix.
pub fn window_stats(m: &Array2<f64>, rows: usize, cols: usize) -> (Array2<f64>, Array2<f64>) {
    let (nr, nc) = m.dim();
    let (hr, hc) = (rows / 2, cols / 2);
    let cells: Vec<(f64, f64)> = (0..nr)
        .into_par_iter()
        .flat_map_iter(|i| {
            let r0 = i.saturating_sub(hr);
            let r1 = (i + hr + 1).min(nr);
            (0..nc).map(move |j| {
                let c0 = j.saturating_sub(hc);
                let c1 = (j + hc + 1).min(nc);
                let mut sum = 0.0;
                let mut min = f64::INFINITY;
                for r in r0..r1 {
                    for c in c0..c1 {
                        let v = m[[r, c]];
                        sum += v;
                        if v < min {
                            min = v;
                        }
                    }
                }
                (sum / ((r1 - r0) * (c1 - c0)) as f64, min)
            })
        })
        .collect();
    let avg = Array2::from_shape_fn((nr, nc), |(i, j)| cells[i * nc + j].0);
    let min = Array2::from_shape_fn((nr, nc), |(i, j)| cells[i * nc + j].1);
    (avg, min)
}

/// Event-preserving pass: every cell whose window mean is below `theta`
/// takes its window minimum. Statistics come from the unmodified input.
pub fn step_c(spec: &Spectrogram, theta: f64, rows: usize, cols: usize) -> Result<Spectrogram> {
    if !theta.is_finite() && theta != f64::INFINITY {
        return Err(Error::InvalidParameter("theta must not be NaN or -inf".into()));
    }
    if rows == 0 || cols == 0 || rows.is_multiple_of(2) || cols.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "step C window {rows}x{cols} must have odd positive sides"
        )));
    }
    let (avg, min) = window_stats(&spec.magnitudes, rows, cols);
    let mut out = spec.magnitudes.clone();
    Zip::from(&mut out).and(&avg).and(&min).for_each(|o, &a, &m| {
        if a < theta {
            *o = m;
        }
    });
    spec.with_magnitudes(out)
}

/// Automatic Step C threshold from the window means of a subtracted spectrogram.
pub fn derive_theta(spec_after_b: &Spectrogram, cfg: &FilterConfig) -> Result<ThetaEstimate> {
    require_frames(spec_after_b)?;
    let (avg, _) = window_stats(&spec_after_b.magnitudes, cfg.stepc_rows, cfg.stepc_cols);
    let flat: Vec<f64> = avg.iter().copied().collect();
    threshold_from_means(&flat, cfg)
}

/// The threshold search behind [`derive_theta`], on an already flattened field of window means.
pub fn threshold_from_means(means: &[f64], cfg: &FilterConfig) -> Result<ThetaEstimate> {
    let r = robust_threshold(means, cfg.search())?;
    if r.degenerate {
        log::warn!("theta derivation degenerate: window means collapse to {}", r.threshold_value);
    }
    Ok(ThetaEstimate {
        value: r.threshold_value,
        degenerate: r.degenerate,
    })
}

/// Working values for profile estimation: linear magnitudes, or decibels above the floor.
fn working_magnitudes(magnitudes: &Array2<f64>, domain: MagnitudeScale) -> Array2<f64> {
    match domain {
        MagnitudeScale::Linear => magnitudes.clone(),
        MagnitudeScale::Decibel => magnitudes.mapv(|s| dsp::amplitude_to_db(s, DB_FLOOR) - DB_FLOOR),
    }
}

/// Linear magnitudes to synthesize from filtered working values.
///
/// In the decibel domain a residual of `x` dB above the profile maps to
/// `S * (1 - 10^(-x/20))`, which is `S - noise` when nothing else changed.
fn synthesis_magnitudes(
    original: &Array2<f64>,
    filtered: &Array2<f64>,
    domain: MagnitudeScale,
) -> Array2<f64> {
    match domain {
        MagnitudeScale::Linear => filtered.clone(),
        MagnitudeScale::Decibel => {
            let mut out = original.clone();
            Zip::from(&mut out).and(filtered).for_each(|o, &x| {
                *o *= 1.0 - 10f64.powf(-x / 20.0);
            });
            out
        }
    }
}

/// Resynthesizes a waveform from filtered magnitudes and the original complex spectrum.
pub fn reconstruct(
    spec: &Spectrogram,
    magnitudes: &Array2<f64>,
    mode: Reconstruction,
) -> Result<Vec<f64>> {
    if magnitudes.dim() != spec.complex_values.dim() {
        return Err(Error::ShapeMismatch("magnitudes do not match spectrum".into()));
    }
    let mut complex = spec.complex_values.clone();
    match mode {
        Reconstruction::PhasePreserving => {
            Zip::from(&mut complex).and(magnitudes).for_each(|c, &m| {
                let norm = c.norm();
                *c = if norm > 0.0 { *c * (m / norm) } else { Complex64::default() };
            });
        }
        Reconstruction::Literal => {
            Zip::from(&mut complex).and(magnitudes).for_each(|c, &m| *c *= m);
        }
    }
    let resynth = spec.with_complex(complex)?;
    let samples = istft(&resynth)?.samples;
    Ok(match mode {
        Reconstruction::PhasePreserving => samples,
        Reconstruction::Literal => samples.into_iter().map(f64::abs).collect(),
    })
}

/// Runs the configured filter variant end to end.
pub fn denoise(clip: &AudioClip, cfg: &FilterConfig) -> Result<DenoiseReport> {
    cfg.validate()?;
    if clip.len() < cfg.window_size {
        return Err(Error::TooShort {
            len: clip.len(),
            required: cfg.window_size,
        });
    }

    let rescale = match cfg.variant {
        Variant::Original => Rescale::IDENTITY,
        Variant::Updated => Rescale::fit(&clip.samples),
    };
    let input = match cfg.variant {
        Variant::Original => clip.clone(),
        Variant::Updated => clip.with_samples(rescale.apply(&clip.samples)),
    };

    let spec = stft(&input, cfg.window_size, cfg.hop)?;
    let working = spec.with_magnitudes(working_magnitudes(&spec.magnitudes, cfg.domain))?;

    let mut profile = match cfg.variant {
        Variant::Original => profile_modal(&working, cfg)?,
        Variant::Updated => profile_otsu(&working, cfg)?,
    };
    let after_b = subtract_profile(&working, &profile)?;

    let (theta_used, theta_degenerate) = match (cfg.variant, cfg.theta) {
        (_, Some(t)) => (t, false),
        (Variant::Updated, None) => {
            let est = derive_theta(&after_b, cfg)?;
            (est.value, est.degenerate)
        }
        (Variant::Original, None) => return Err(Error::MissingTheta),
    };
    let after_c = step_c(&after_b, theta_used, cfg.stepc_rows, cfg.stepc_cols)?;

    let magnitudes = synthesis_magnitudes(&spec.magnitudes, &after_c.magnitudes, cfg.domain);
    let samples = reconstruct(&spec, &magnitudes, cfg.reconstruction)?;
    let output = clip.with_samples(rescale.invert(&samples));

    if cfg.domain == MagnitudeScale::Decibel {
        profile.values.iter_mut().for_each(|v| *v += DB_FLOOR);
        profile.scale = MagnitudeScale::Decibel;
    }

    Ok(DenoiseReport {
        variant: cfg.variant,
        profile,
        theta_used,
        theta_degenerate,
        filtered: spec.with_magnitudes(magnitudes)?,
        output,
        rescale,
    })
}
