//! Per-second BGN and SNR of a WAV file, plus the spectral BGN of its noise profile.
//!
//!     cargo run --example acoustic_indices -- recording.wav
//!
//! Without an argument a 4 s test signal stepping from -40 to -10 dBFS is used.

use std::env;
use std::f64::consts::PI;

use soundscape_denoise::denoise::profile_otsu;
use soundscape_denoise::{bgn, bgn_spectral, read_audio, snr, stft, AudioClip, FilterConfig};

fn stepped_tone() -> AudioClip {
    let rate = 8000;
    let x = (0..rate as usize * 4)
        .map(|i| {
            let level = -40.0 + 10.0 * (i / rate as usize) as f64;
            10f64.powf(level / 20.0) * (2.0 * PI * 500.0 * i as f64 / rate as f64).sin()
        })
        .collect();
    AudioClip::new(x, rate).unwrap()
}

fn main() -> soundscape_denoise::Result<()> {
    let clip = match env::args().nth(1) {
        Some(path) => read_audio(path)?,
        None => stepped_tone(),
    };
    let b = bgn(&clip)?;
    let s = snr(&clip)?;
    println!("second,BGN_dB,SNR");
    for (i, (bv, sv)) in b.values.iter().zip(&s.values).enumerate() {
        println!("{i},{bv:.3},{sv:.5}");
    }
    println!("mean BGN {:.3} dB, mean SNR {:.5}", b.mean(), s.mean());

    let cfg = FilterConfig::updated();
    let profile = profile_otsu(&stft(&clip, cfg.window_size, cfg.hop)?, &cfg)?;
    let spectral = bgn_spectral(&profile)?;
    let loudest = spectral
        .band_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    println!(
        "BGN_sp: {} bands, loudest at {:.0} Hz ({:.2} dB)",
        spectral.band_values.len(),
        spectral.frequencies[loudest],
        spectral.band_values[loudest]
    );
    Ok(())
}
