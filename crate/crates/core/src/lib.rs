//! Spectral denoising and background-noise indices for environmental audio.
//!
//! The crate implements modal spectral subtraction in two variants
//! ([`denoise::Variant`]) and the acoustic indices BGN, BGN_sp and SNR
//! computed per second of audio. See the `examples/` directory for one
//! runnable program per capability.

pub mod cli;
pub mod denoise;
pub mod dsp;
pub mod error;
pub mod indices;
pub mod render;
pub mod signal_io;
pub mod stats;

pub use denoise::{denoise, DenoiseReport, FilterConfig, NoiseProfile, Reconstruction, Variant};
pub use dsp::{istft, stft, RealHistogram, Spectrogram};
pub use error::{Error, Result};
pub use indices::{bgn, bgn_spectral, snr, IndexSeries, SpectralIndex};
pub use signal_io::{read_audio, write_audio, AudioClip, SampleFormat};
pub use stats::{otsu_threshold, quartiles, remove_outliers_iterative, OtsuResult, QuartileSummary};
