//! Synthetic fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use soundscape_denoise::AudioClip;

pub const FIXTURE_RATE: u32 = 22_050;
pub const FIXTURE_SECONDS: usize = 10;
pub const NOISE_RMS: f64 = 0.1; // -20 dBFS
pub const TONE_HZ: f64 = 3000.0;
pub const TONE_AMPLITUDE: f64 = 0.3;
/// Bursts are on for the first half of every second.
pub const BURST_PERIOD: usize = FIXTURE_RATE as usize;

pub fn white_noise(n: usize, rms: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = Normal::new(0.0, rms).unwrap();
    (0..n).map(|_| normal.sample(&mut rng)).collect()
}

pub fn burst_on(i: usize) -> bool {
    i % BURST_PERIOD < BURST_PERIOD / 2
}

pub fn tone_bursts(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if burst_on(i) {
                TONE_AMPLITUDE * (2.0 * PI * TONE_HZ * i as f64 / FIXTURE_RATE as f64).sin()
            } else {
                0.0
            }
        })
        .collect()
}

/// Noise plus 3 kHz bursts at 50% duty.
pub fn burst_fixture(seed: u64) -> AudioClip {
    let n = FIXTURE_RATE as usize * FIXTURE_SECONDS;
    let noise = white_noise(n, NOISE_RMS, seed);
    let tone = tone_bursts(n);
    AudioClip::new(noise.iter().zip(&tone).map(|(a, b)| a + b).collect(), FIXTURE_RATE).unwrap()
}

/// The same noise without the tone.
pub fn noise_fixture(seed: u64) -> AudioClip {
    let n = FIXTURE_RATE as usize * FIXTURE_SECONDS;
    AudioClip::new(white_noise(n, NOISE_RMS, seed), FIXTURE_RATE).unwrap()
}

/// Sample ranges of the burst-on (`true`) or burst-off intervals, shrunk by `guard`
/// on each side and limited to `limit` samples.
pub fn intervals(on: bool, guard: usize, limit: usize) -> Vec<std::ops::Range<usize>> {
    let half = BURST_PERIOD / 2;
    let mut out = Vec::new();
    let mut start = if on { 0 } else { half };
    while start < limit {
        let end = (start + half).min(limit);
        if end > start + 2 * guard {
            out.push(start + guard..end - guard);
        }
        start += BURST_PERIOD;
    }
    out
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rms(x: &[f64]) -> f64 {
    (energy(x) / x.len() as f64).sqrt()
}

/// Energy of the component at `freq` over a segment, by projection onto sin/cos.
pub fn tone_energy(x: &[f64], start: usize, freq: f64, rate: u32) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for (k, v) in x.iter().enumerate() {
        let ph = 2.0 * PI * freq * (start + k) as f64 / rate as f64;
        c += v * ph.cos();
        s += v * ph.sin();
    }
    let n = x.len() as f64;
    let amp_sq = (2.0 * c / n).powi(2) + (2.0 * s / n).powi(2);
    amp_sq * n / 2.0
}
