//! Denoise a WAV file with the updated filter (or the original one with a fixed threshold).
//!
//!     cargo run --example denoise_file -- input.wav output.wav [theta]
//!
//! Without arguments a synthetic recording (hiss plus tone bursts) is used and
//! the result is written to `denoised.wav` in the current directory.

use std::env;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use soundscape_denoise::{denoise, read_audio, write_audio, AudioClip, FilterConfig, SampleFormat};

fn synthetic() -> AudioClip {
    let rate = 22_050;
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let hiss = Normal::new(0.0, 0.1).unwrap();
    let x = (0..rate as usize * 5)
        .map(|i| {
            let t = i as f64 / rate as f64;
            let burst = if t.fract() < 0.5 { 0.3 * (2.0 * PI * 3000.0 * t).sin() } else { 0.0 };
            hiss.sample(&mut rng) + burst
        })
        .collect();
    AudioClip::new(x, rate).unwrap()
}

fn main() -> soundscape_denoise::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let clip = match args.first() {
        Some(path) => read_audio(path)?,
        None => synthetic(),
    };
    let out = args.get(1).cloned().unwrap_or_else(|| "denoised.wav".into());
    let cfg = match args.get(2) {
        Some(theta) => FilterConfig::original(theta.parse().expect("theta must be a number")),
        None => FilterConfig::updated(),
    };

    let report = denoise(&clip, &cfg)?;
    println!("variant        {}", report.variant);
    println!("theta used     {:.6}{}", report.theta_used, if report.theta_degenerate { " (degenerate)" } else { "" });
    println!("rescale        gain {:.4}, offset {:.4}", report.rescale.gain, report.rescale.offset);
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    println!("rms in / out   {:.5} / {:.5}", rms(&clip.samples), rms(&report.output.samples));

    write_audio(&report.output, &out, SampleFormat::Float32)?;
    println!("wrote {out}");
    Ok(())
}
