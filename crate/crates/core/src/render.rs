//! Grayscale spectrogram images on a fixed dB scale.

use std::path::Path;

use image::{GrayImage, Luma};
use ndarray::Array2;

use crate::dsp::{amplitude_to_db, hamming, DB_FLOOR};
use crate::error::{Error, Result};

/// Top of the display range; the bottom is [`DB_FLOOR`].
pub const DB_CEILING: f64 = 0.0;

/// Renders magnitudes of an unnormalized STFT as an image.
///
/// Magnitudes are rescaled by `2 / sum(window)` so a full-scale sinusoid
/// reads 0 dB. Low frequencies are at the bottom, time runs left to right.
pub fn spectrogram_image(magnitudes: &Array2<f64>, window_size: usize) -> GrayImage {
    let (bins, frames) = magnitudes.dim();
    let norm = 2.0 / hamming(window_size).iter().sum::<f64>();
    let span = DB_CEILING - DB_FLOOR;
    GrayImage::from_fn(frames.max(1) as u32, bins.max(1) as u32, |x, y| {
        if bins == 0 || frames == 0 {
            return Luma([0]);
        }
        let row = bins - 1 - y as usize;
        let db = amplitude_to_db(magnitudes[[row, x as usize]] * norm, DB_FLOOR).min(DB_CEILING);
        Luma([((db - DB_FLOOR) / span * 255.0).round() as u8])
    })
}

pub fn save_spectrogram_png(
    magnitudes: &Array2<f64>,
    window_size: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    spectrogram_image(magnitudes, window_size)
        .save_with_format(path.as_ref(), image::ImageFormat::Png)
        .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))
}
