//! Forward and inverse STFT of a chirp, with the reconstruction error.
//!
//!     cargo run --example stft_round_trip -- [window] [hop]

use std::env;

use soundscape_denoise::{istft, stft, AudioClip};

fn main() -> soundscape_denoise::Result<()> {
    let mut args = env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let window = args.next().unwrap_or(512);
    let hop = args.next().unwrap_or(window / 2);

    let rate = 16_000u32;
    let n = rate as usize * 2;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate as f64;
            0.5 * (2.0 * std::f64::consts::PI * (200.0 + 1500.0 * t) * t).sin()
        })
        .collect();
    let clip = AudioClip::new(x, rate)?;

    let spec = stft(&clip, window, hop)?;
    println!("{} bins x {} frames, bin spacing {:.2} Hz", spec.bins(), spec.frames(), spec.bin_frequency(1));

    let back = istft(&spec)?;
    let covered = (spec.frames() - 1) * hop + window;
    let interior = window..covered.saturating_sub(window);
    let err = interior
        .clone()
        .map(|i| (back.samples[i] - clip.samples[i]).abs())
        .fold(0.0, f64::max);
    println!("max interior error {err:.3e} over {} samples", interior.len());
    println!("samples past the last full frame: {} (returned as zeros)", n - covered);
    Ok(())
}
