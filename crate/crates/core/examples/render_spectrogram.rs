//! Writes before/after spectrogram PNGs for a WAV file (or a synthetic clip).
//!
//!     cargo run --example render_spectrogram -- input.wav out_prefix

use std::env;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use soundscape_denoise::render::save_spectrogram_png;
use soundscape_denoise::{denoise, read_audio, stft, AudioClip, FilterConfig};

fn main() -> soundscape_denoise::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let clip = match args.first() {
        Some(path) => read_audio(path)?,
        None => {
            let rate = 16_000;
            let mut rng = rand::rngs::StdRng::seed_from_u64(3);
            let hiss = Normal::new(0.0, 0.05).unwrap();
            let x = (0..rate as usize * 4)
                .map(|i| {
                    let t = i as f64 / rate as f64;
                    let call = if (t * 2.0).fract() < 0.3 { 0.2 * (2.0 * PI * (2000.0 + 3000.0 * (t * 2.0).fract()) * t).sin() } else { 0.0 };
                    hiss.sample(&mut rng) + call
                })
                .collect();
            AudioClip::new(x, rate)?
        }
    };
    let prefix = args.get(1).map(String::as_str).unwrap_or("spectrogram");

    let cfg = FilterConfig::updated();
    let before = stft(&clip, cfg.window_size, cfg.hop)?;
    let report = denoise(&clip, &cfg)?;
    let after = stft(&report.output, cfg.window_size, cfg.hop)?;

    for (suffix, mags) in [("input", &before.magnitudes), ("denoised", &after.magnitudes)] {
        let path = format!("{prefix}.{suffix}.png");
        save_spectrogram_png(mags, cfg.window_size, &path)?;
        println!("wrote {path} ({} x {})", mags.ncols(), mags.nrows());
    }
    Ok(())
}
