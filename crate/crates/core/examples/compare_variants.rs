//! Runs both filter variants on broadband noise and reports what each leaves behind.
//!
//!     cargo run --release --example compare_variants

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use soundscape_denoise::denoise::profile_modal;
use soundscape_denoise::{bgn, denoise, snr, stft, AudioClip, FilterConfig};

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn main() -> soundscape_denoise::Result<()> {
    let rate = 16_000;
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let clip = AudioClip::new((0..rate as usize * 6).map(|_| noise.sample(&mut rng)).collect(), rate)?;
    let input_energy = energy(&clip.samples);

    println!("{:<22} {:>10} {:>9} {:>9}", "run", "residual", "BGN", "SNR");
    println!("{:<22} {:>10} {:>9.2} {:>9.4}", "input", "0.00 dB", bgn(&clip)?.mean(), snr(&clip)?.mean());

    let mut runs = vec![("updated".to_string(), FilterConfig::updated())];
    for theta in [0.01, 0.05, 0.1, 0.5] {
        runs.push((format!("original theta={theta}"), FilterConfig::original(theta)));
    }
    for (name, cfg) in runs {
        let out = denoise(&clip, &cfg)?.output;
        let residual = 10.0 * (energy(&out.samples) / input_energy).log10();
        println!(
            "{name:<22} {:>7.2} dB {:>9.2} {:>9.4}",
            residual,
            bgn(&out)?.mean(),
            snr(&out)?.mean()
        );
    }

    // The modal profile is the per-band noise estimate shared by the original variant.
    let profile = profile_modal(&stft(&clip, 512, 256)?, &FilterConfig::original(0.0))?;
    let mid = profile.len() / 2;
    println!("modal profile at {:.0} Hz: {:.4}", profile.frequencies[mid], profile.values[mid]);
    Ok(())
}
