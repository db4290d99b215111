//! Acoustic summary indices computed per second of audio: BGN (background
//! noise level in dB), its spectral counterpart BGN_sp, and an SNR-style
//! mean/std ratio of the Welch PSD.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoise::{MagnitudeScale, NoiseProfile};
use crate::dsp::{hilbert_envelope, to_decibel, welch_psd, WelchConfig, DB_FLOOR};
use crate::error::{Error, Result};
use crate::signal_io::AudioClip;
use crate::stats::{robust_threshold, ThresholdSearch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexName {
    #[serde(rename = "BGN")]
    Bgn,
    #[serde(rename = "SNR")]
    Snr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSeries {
    pub name: IndexName,
    /// One value per whole second.
    pub values: Vec<f64>,
    /// Seconds where the value came from a degenerate case (single-bin histogram, flat PSD).
    pub degenerate: Vec<bool>,
    pub source: String,
}

impl IndexSeries {
    pub fn seconds(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralIndex {
    /// Per-band level in dB, floored.
    pub band_values: Vec<f64>,
    pub frequencies: Vec<f64>,
}

fn one_second_segments(clip: &AudioClip) -> Result<Vec<&[f64]>> {
    let rate = clip.sample_rate as usize;
    if clip.len() < rate {
        return Err(Error::TooShort {
            len: clip.len(),
            required: rate,
        });
    }
    Ok(clip.samples.chunks_exact(rate).collect())
}

fn source_label(clip: &AudioClip) -> String {
    clip.source_path.clone().unwrap_or_default()
}

/// BGN of one segment: Otsu split of the outlier-free, floored dB envelope.
pub fn bgn_segment(samples: &[f64], search: ThresholdSearch) -> Result<(f64, bool)> {
    let envelope = hilbert_envelope(samples)?;
    let db = to_decibel(&envelope, DB_FLOOR)?;
    let r = robust_threshold(&db, search)?;
    Ok((r.threshold_value, r.degenerate))
}

/// Background noise level in dB for each whole second; a trailing partial second is dropped.
pub fn bgn(clip: &AudioClip) -> Result<IndexSeries> {
    bgn_with(clip, ThresholdSearch::default())
}

pub fn bgn_with(clip: &AudioClip, search: ThresholdSearch) -> Result<IndexSeries> {
    let per_second: Vec<(f64, bool)> = one_second_segments(clip)?
        .into_par_iter()
        .map(|seg| bgn_segment(seg, search))
        .collect::<Result<_>>()?;
    let (values, degenerate) = per_second.into_iter().unzip();
    Ok(IndexSeries {
        name: IndexName::Bgn,
        values,
        degenerate,
        source: source_label(clip),
    })
}

/// Noise profile in dB per band.
pub fn bgn_spectral(profile: &NoiseProfile) -> Result<SpectralIndex> {
    if profile.scale == MagnitudeScale::Decibel {
        return Err(Error::AlreadyDecibel);
    }
    if profile.values.len() != profile.frequencies.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} profile values for {} frequencies",
            profile.values.len(),
            profile.frequencies.len()
        )));
    }
    Ok(SpectralIndex {
        band_values: to_decibel(&profile.values, DB_FLOOR)?,
        frequencies: profile.frequencies.clone(),
    })
}

/// Mean over population standard deviation of one segment's PSD.
/// A flat PSD (zero deviation) gives `(0.0, true)`.
pub fn snr_segment(samples: &[f64], sample_rate: u32, welch: WelchConfig) -> Result<(f64, bool)> {
    let psd = welch_psd(samples, sample_rate, welch)?;
    let n = psd.power.len() as f64;
    let mean = psd.power.iter().sum::<f64>() / n;
    let var = psd.power.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        Ok((0.0, true))
    } else {
        Ok((mean / std, false))
    }
}

pub fn snr(clip: &AudioClip) -> Result<IndexSeries> {
    snr_with(clip, WelchConfig::default())
}

pub fn snr_with(clip: &AudioClip, welch: WelchConfig) -> Result<IndexSeries> {
    let rate = clip.sample_rate;
    let per_second: Vec<(f64, bool)> = one_second_segments(clip)?
        .into_par_iter()
        .map(|seg| snr_segment(seg, rate, welch))
        .collect::<Result<_>>()?;
    let (values, degenerate) = per_second.into_iter().unzip();
    Ok(IndexSeries {
        name: IndexName::Snr,
        values,
        degenerate,
        source: source_label(clip),
    })
}
