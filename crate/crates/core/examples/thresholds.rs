//! Quartiles, iterative IQR outlier removal and Otsu thresholding on a bimodal sample.
//!
//!     cargo run --example thresholds

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use soundscape_denoise::dsp::histogram;
use soundscape_denoise::stats::{otsu_histogram, robust_threshold, ThresholdSearch};
use soundscape_denoise::{otsu_threshold, quartiles, remove_outliers_iterative};

fn main() -> soundscape_denoise::Result<()> {
    let q = quartiles(&[1.0, 2.0, 3.0, 4.0, 100.0])?;
    println!("quartiles of [1,2,3,4,100]: q1={} q2={} q3={} fences=[{}, {}]", q.q1, q.q2, q.q3, q.lower_limit, q.upper_limit);

    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let quiet = Normal::new(-60.0, 3.0).unwrap();
    let loud = Normal::new(-25.0, 4.0).unwrap();
    let mut values: Vec<f64> = (0..3000).map(|_| quiet.sample(&mut rng)).collect();
    values.extend((0..2000).map(|_| loud.sample(&mut rng)));
    values.extend([40.0, 55.0, -300.0]);

    let kept = remove_outliers_iterative(&values, 100)?;
    println!("outlier removal kept {} of {} values", kept.len(), values.len());

    let hist = histogram(&kept, 100)?;
    let plain = otsu_histogram(&hist)?;
    println!("otsu on raw counts:      {:.2} (bin {})", plain.threshold_value, plain.threshold_index);

    let robust = robust_threshold(&values, ThresholdSearch::default())?;
    println!("otsu after smoothing:    {:.2} (bin {})", robust.threshold_value, robust.threshold_index);

    // Weights may be any non-negative numbers, not just counts.
    let centers: Vec<f64> = (0..8).map(f64::from).collect();
    let r = otsu_threshold(&centers, &[5.0, 9.0, 4.0, 0.0, 0.0, 2.0, 7.0, 3.0])?;
    println!("otsu on hand-made weights: split after bin {}", r.threshold_index);
    Ok(())
}
