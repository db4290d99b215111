//! DSP primitives shared by the filters and the acoustic indices.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::AudioClip;

pub const DEFAULT_WINDOW: usize = 512;
pub const DEFAULT_HOP: usize = 256;
pub const DEFAULT_BINS: usize = 100;
pub const DEFAULT_SMOOTH: usize = 5;
/// Lower clamp applied by [`to_decibel`] unless told otherwise.
pub const DB_FLOOR: f64 = -90.0;

/// Periodic Hamming window of length `n`.
pub fn hamming(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// One-sided short-time spectrum. Rows are frequency bins, columns are frames.
///
/// The transform is unnormalized (plain DFT of the windowed frame), so a
/// sinusoid of amplitude `A` at a bin center shows a peak of `A * sum(w) / 2`.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub complex_values: Array2<Complex64>,
    pub magnitudes: Array2<f64>,
    pub sample_rate: u32,
    pub window_size: usize,
    pub hop: usize,
    /// Length of the analysed signal; synthesis pads the uncovered tail with zeros.
    pub signal_len: usize,
}

impl Spectrogram {
    pub fn bins(&self) -> usize {
        self.magnitudes.nrows()
    }

    pub fn frames(&self) -> usize {
        self.magnitudes.ncols()
    }

    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate as f64 / self.window_size as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.bins()).map(|b| self.bin_frequency(b)).collect()
    }

    /// Same spectrogram with replaced magnitudes; complex values are kept.
    pub fn with_magnitudes(&self, magnitudes: Array2<f64>) -> Result<Self> {
        if magnitudes.dim() != self.magnitudes.dim() {
            return Err(Error::ShapeMismatch(format!(
                "magnitudes {:?} vs spectrogram {:?}",
                magnitudes.dim(),
                self.magnitudes.dim()
            )));
        }
        Ok(Self {
            complex_values: self.complex_values.clone(),
            magnitudes,
            sample_rate: self.sample_rate,
            window_size: self.window_size,
            hop: self.hop,
            signal_len: self.signal_len,
        })
    }

    /// Same spectrogram with replaced complex values and magnitudes recomputed from them.
    pub fn with_complex(&self, complex_values: Array2<Complex64>) -> Result<Self> {
        if complex_values.dim() != self.complex_values.dim() {
            return Err(Error::ShapeMismatch(format!(
                "complex values {:?} vs spectrogram {:?}",
                complex_values.dim(),
                self.complex_values.dim()
            )));
        }
        let magnitudes = complex_values.mapv(|c| c.norm());
        Ok(Self {
            complex_values,
            magnitudes,
            ..self.clone()
        })
    }

    fn check_shape(&self) -> Result<()> {
        let (rows, cols) = self.complex_values.dim();
        if self.window_size == 0 || self.hop == 0 {
            return Err(Error::ShapeMismatch("zero window or hop".into()));
        }
        if rows != self.window_size / 2 + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{rows} rows for a {}-sample window",
                self.window_size
            )));
        }
        if self.magnitudes.dim() != (rows, cols) {
            return Err(Error::ShapeMismatch("magnitude and complex shapes differ".into()));
        }
        if cols > 0 && (cols - 1) * self.hop + self.window_size > self.signal_len {
            return Err(Error::ShapeMismatch(format!(
                "{cols} frames do not fit in {} samples",
                self.signal_len
            )));
        }
        Ok(())
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Hamming-windowed STFT without padding; the partial tail frame is dropped.
pub fn stft(clip: &AudioClip, window_size: usize, hop: usize) -> Result<Spectrogram> {
    if window_size == 0 || hop == 0 {
        return Err(Error::InvalidParameter("window and hop must be positive".into()));
    }
    let n = clip.samples.len();
    if n < window_size {
        return Err(Error::TooShort {
            len: n,
            required: window_size,
        });
    }
    check_finite(&clip.samples)?;

    let frames = (n - window_size) / hop + 1;
    let bins = window_size / 2 + 1;
    let window = hamming(window_size);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_size);

    let columns: Vec<Vec<Complex64>> = (0..frames)
        .into_par_iter()
        .map_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, j| {
                let start = j * hop;
                let mut buf: Vec<Complex64> = clip.samples[start..start + window_size]
                    .iter()
                    .zip(&window)
                    .map(|(s, w)| Complex64::new(s * w, 0.0))
                    .collect();
                fft.process_with_scratch(&mut buf, scratch);
                buf.truncate(bins);
                buf
            },
        )
        .collect();

    let mut complex_values = Array2::<Complex64>::zeros((bins, frames));
    for (j, col) in columns.into_iter().enumerate() {
        for (i, c) in col.into_iter().enumerate() {
            complex_values[[i, j]] = c;
        }
    }
    let magnitudes = complex_values.mapv(|c| c.norm());

    Ok(Spectrogram {
        complex_values,
        magnitudes,
        sample_rate: clip.sample_rate,
        window_size,
        hop,
        signal_len: n,
    })
}

/// Weighted overlap-add inverse of [`stft`], normalized by the summed squared window.
///
/// Samples not covered by any frame are zero. Only the complex values are used.
pub fn istft(spec: &Spectrogram) -> Result<AudioClip> {
    spec.check_shape()?;
    let n = spec.window_size;
    let bins = spec.bins();
    let frames = spec.frames();
    let window = hamming(n);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);

    let segments: Vec<Vec<f64>> = (0..frames)
        .into_par_iter()
        .map_init(
            || vec![Complex64::default(); ifft.get_inplace_scratch_len()],
            |scratch, j| {
                let mut buf = vec![Complex64::default(); n];
                for (b, c) in buf.iter_mut().zip(spec.complex_values.column(j)) {
                    *b = *c;
                }
                for k in 1..n - bins + 1 {
                    buf[n - k] = buf[k].conj();
                }
                ifft.process_with_scratch(&mut buf, scratch);
                buf.iter()
                    .zip(&window)
                    .map(|(c, w)| c.re / n as f64 * w)
                    .collect()
            },
        )
        .collect();

    let mut out = vec![0.0; spec.signal_len];
    let mut norm = vec![0.0; spec.signal_len];
    for (j, seg) in segments.iter().enumerate() {
        let start = j * spec.hop;
        for (m, v) in seg.iter().enumerate() {
            out[start + m] += v;
            norm[start + m] += window[m] * window[m];
        }
    }
    for (o, w) in out.iter_mut().zip(&norm) {
        if *w > 1e-12 {
            *o /= w;
        }
    }

    Ok(AudioClip {
        samples: out,
        sample_rate: spec.sample_rate,
        source_path: None,
    })
}

/// Equal-width histogram over real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealHistogram {
    pub bin_centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub bin_width: f64,
}

impl RealHistogram {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts smoothed with a centered moving average.
    pub fn smoothed_counts(&self, window: usize) -> Result<Vec<f64>> {
        let counts: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        moving_average(&counts, window)
    }
}

/// `bins` equal-width bins spanning `[min, max]`, last bin closed on the right.
///
/// When every value is equal the histogram collapses to one bin centered on that value.
pub fn histogram(values: &[f64], bins: usize) -> Result<RealHistogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    check_finite(values)?;

    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return Ok(RealHistogram {
            bin_centers: vec![lo],
            counts: vec![values.len() as u64],
            bin_width: 1.0,
        });
    }
    let span = hi - lo;
    if !span.is_finite() {
        return Err(Error::NonFinite);
    }

    let width = span / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = (((v - lo) / span) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let bin_centers = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    Ok(RealHistogram {
        bin_centers,
        counts,
        bin_width: width,
    })
}

/// Centered moving average; the window is truncated at the edges.
pub fn moving_average(seq: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "moving average window must be odd and positive, got {window}"
        )));
    }
    let half = window / 2;
    let n = seq.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let part = &seq[lo..hi];
            // Averaging offsets from the first element keeps constant runs exact.
            let base = part[0];
            let delta: f64 = part.iter().map(|v| v - base).sum();
            base + delta / part.len() as f64
        })
        .collect())
}

/// Magnitude of the FFT-based analytic signal.
pub fn hilbert_envelope(samples: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    check_finite(samples)?;

    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    // Keep DC (and Nyquist for even n), double positive frequencies, zero the rest.
    let positive_end = n.div_ceil(2);
    for c in &mut buf[1..positive_end] {
        *c *= 2.0;
    }
    let negative_start = if n.is_multiple_of(2) { n / 2 + 1 } else { positive_end };
    for c in &mut buf[negative_start..] {
        *c = Complex64::default();
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|c| c.norm() / n as f64).collect())
}

/// Parameters for [`welch_psd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment: usize,
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment: 256,
            overlap: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

/// One-sided Welch power spectral density (Hamming segments, density scaling).
pub fn welch_psd(samples: &[f64], sample_rate: u32, cfg: WelchConfig) -> Result<PsdEstimate> {
    let seg = cfg.segment;
    if seg == 0 || !(0.0..1.0).contains(&cfg.overlap) {
        return Err(Error::InvalidParameter(format!(
            "welch segment {seg} / overlap {} out of range",
            cfg.overlap
        )));
    }
    if samples.len() < seg {
        return Err(Error::TooShort {
            len: samples.len(),
            required: seg,
        });
    }
    check_finite(samples)?;

    let step = (seg - (seg as f64 * cfg.overlap).round() as usize).max(1);
    let window = hamming(seg);
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let bins = seg / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);

    let segments = (samples.len() - seg) / step + 1;
    let mut power = vec![0.0; bins];
    let mut buf = vec![Complex64::default(); seg];
    for s in 0..segments {
        let start = s * step;
        for (b, (x, w)) in buf.iter_mut().zip(samples[start..start + seg].iter().zip(&window)) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
    }

    let scale = 1.0 / (sample_rate as f64 * win_energy * segments as f64);
    let nyquist = if seg.is_multiple_of(2) { Some(bins - 1) } else { None };
    for (k, p) in power.iter_mut().enumerate() {
        *p *= scale;
        if k != 0 && Some(k) != nyquist {
            *p *= 2.0;
        }
    }
    let frequencies = (0..bins)
        .map(|k| k as f64 * sample_rate as f64 / seg as f64)
        .collect();
    Ok(PsdEstimate { frequencies, power })
}

/// `20 * log10(v)` clamped from below at `floor`.
pub fn to_decibel(values: &[f64], floor: f64) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v.is_nan() {
                Err(Error::NonFinite)
            } else if v < 0.0 {
                Err(Error::NegativeValue(v))
            } else {
                Ok(amplitude_to_db(v, floor))
            }
        })
        .collect()
}

pub(crate) fn amplitude_to_db(v: f64, floor: f64) -> f64 {
    let db = 20.0 * v.log10();
    if db < floor {
        floor
    } else {
        db
    }
}

/// Row `i` of a matrix as a contiguous vector.
pub(crate) fn row_vec(m: &Array2<f64>, i: usize) -> Vec<f64> {
    m.index_axis(Axis(0), i).to_vec()
}
