//! Quartiles, iterative IQR outlier rejection and Otsu threshold selection
//! over real-valued histograms.

use serde::{Deserialize, Serialize};

use crate::dsp::{histogram, RealHistogram};
use crate::error::{Error, Result};

/// Multiplier on the interquartile range for the outlier fences.
pub const IQR_FENCE: f64 = 1.5;
/// Iterative removal stops once fewer values than this remain.
pub const MIN_POPULATION: usize = 5;
pub const DEFAULT_MAX_ROUNDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_limit: f64,
    pub upper_limit: f64,
}

impl QuartileSummary {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower_limit && v <= self.upper_limit
    }
}

/// Quantile of already sorted data, interpolating linearly at position `(n - 1) * p`.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn quartiles(values: &[f64]) -> Result<QuartileSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(summary_from_sorted(&sorted))
}

fn summary_from_sorted(sorted: &[f64]) -> QuartileSummary {
    let q1 = sorted_quantile(sorted, 0.25);
    let q2 = sorted_quantile(sorted, 0.5);
    let q3 = sorted_quantile(sorted, 0.75);
    let iqr = q3 - q1;
    QuartileSummary {
        q1,
        q2,
        q3,
        iqr,
        lower_limit: q1 - IQR_FENCE * iqr,
        upper_limit: q3 + IQR_FENCE * iqr,
    }
}

/// Drops values outside the IQR fences, recomputing the fences each round,
/// until a round removes nothing, fewer than [`MIN_POPULATION`] values remain,
/// or `max_rounds` rounds have run. Surviving values keep their input order.
pub fn remove_outliers_iterative(values: &[f64], max_rounds: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mut kept = values.to_vec();
    let mut sorted = kept.clone();
    sorted.sort_unstable_by(f64::total_cmp);

    for _ in 0..max_rounds {
        if kept.len() < MIN_POPULATION {
            break;
        }
        let fences = summary_from_sorted(&sorted);
        let (lo, hi) = (fences.lower_limit, fences.upper_limit);
        // Survivors of a sorted slice form one contiguous run.
        let start = sorted.partition_point(|&v| v < lo);
        let end = sorted.partition_point(|&v| v <= hi);
        if start == 0 && end == sorted.len() {
            break;
        }
        kept.retain(|&v| v >= lo && v <= hi);
        sorted.truncate(end);
        sorted.drain(..start);
    }
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtsuResult {
    /// Center of the last bin of the lower class.
    pub threshold_value: f64,
    /// Zero-based index of that bin.
    pub threshold_index: usize,
    /// Between-class variance at the chosen split, in bin-index units.
    pub criterion: f64,
    /// Set when every bin of non-zero weight is the same bin, so no split exists.
    pub degenerate: bool,
}

/// Otsu split of a weighted histogram.
///
/// `weights` may be raw counts or smoothed counts. The lower class is bins
/// `0..=k`; `k` maximizes `(mu_T * w(k) - mu(k))^2 / (w(k) * (1 - w(k)))`
/// over every split that leaves weight on both sides, ties going to the
/// smallest `k`.
pub fn otsu_threshold(bin_centers: &[f64], weights: &[f64]) -> Result<OtsuResult> {
    if bin_centers.is_empty() || weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bin_centers.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} bin centers for {} weights",
            bin_centers.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter("histogram weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyInput);
    }

    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mean_total: f64 = probs.iter().enumerate().map(|(i, p)| i as f64 * p).sum();

    // Index of the last bin carrying weight; splits at or past it leave the upper class empty.
    let last_occupied = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);

    let mut best: Option<(usize, f64)> = None;
    let mut omega = 0.0;
    let mut mu = 0.0;
    let mut lower_occupied = false;
    for k in 0..last_occupied {
        omega += probs[k];
        mu += k as f64 * probs[k];
        lower_occupied |= weights[k] > 0.0;
        if !lower_occupied {
            continue;
        }
        let denom = omega * (1.0 - omega);
        if denom <= 0.0 {
            continue;
        }
        let num = mean_total * omega - mu;
        let sigma_b = num * num / denom;
        if best.is_none_or(|(_, v)| sigma_b > v) {
            best = Some((k, sigma_b));
        }
    }

    Ok(match best {
        Some((k, criterion)) => OtsuResult {
            threshold_value: bin_centers[k],
            threshold_index: k,
            criterion,
            degenerate: false,
        },
        None => OtsuResult {
            threshold_value: bin_centers[last_occupied],
            threshold_index: last_occupied,
            criterion: 0.0,
            degenerate: true,
        },
    })
}

/// [`otsu_threshold`] on the raw counts of a histogram.
pub fn otsu_histogram(hist: &RealHistogram) -> Result<OtsuResult> {
    let weights: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    otsu_threshold(&hist.bin_centers, &weights)
}

/// Parameters of the outlier-rejection plus threshold-search pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub bins: usize,
    pub smooth_window: usize,
    pub max_rounds: usize,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            bins: crate::dsp::DEFAULT_BINS,
            smooth_window: crate::dsp::DEFAULT_SMOOTH,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }
}

/// Iterative IQR rejection, histogram, smoothed counts, then Otsu.
///
/// This is the shared route behind the automatic noise profile, the
/// automatic Step C threshold and the BGN index.
pub fn robust_threshold(values: &[f64], search: ThresholdSearch) -> Result<OtsuResult> {
    let kept = remove_outliers_iterative(values, search.max_rounds)?;
    let hist = histogram(&kept, search.bins)?;
    let smoothed = hist.smoothed_counts(search.smooth_window)?;
    otsu_threshold(&hist.bin_centers, &smoothed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quartile_examples() {
        let q = quartiles(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((q.q1, q.q2, q.q3), (1.75, 2.5, 3.25));

        let q = quartiles(&[7.0]).unwrap();
        assert_eq!((q.q1, q.q2, q.q3, q.iqr), (7.0, 7.0, 7.0, 0.0));

        let q = quartiles(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((q.q1, q.q3), (2.0, 4.0));
        assert_eq!((q.lower_limit, q.upper_limit), (-1.0, 7.0));

        assert!(matches!(quartiles(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn outlier_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 100.0];
        let out = remove_outliers_iterative(&v, 100).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(remove_outliers_iterative(&out, 100).unwrap(), out);

        assert_eq!(remove_outliers_iterative(&[5.0; 5], 100).unwrap(), vec![5.0; 5]);

        let clean: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let once = remove_outliers_iterative(&clean, 100).unwrap();
        assert_eq!(once, clean);
        assert_eq!(remove_outliers_iterative(&once, 100).unwrap(), once);

        assert!(matches!(remove_outliers_iterative(&[], 10), Err(Error::EmptyInput)));
    }

    #[test]
    fn outlier_removal_preserves_order_and_iterates() {
        // Fences tighten after 100 is gone, which exposes 16 on the second round.
        let v = [16.0, 0.0, 1.0, 2.0, 3.0, 100.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let out = remove_outliers_iterative(&v, 100).unwrap();
        assert_eq!(out, (0..10).map(f64::from).collect::<Vec<_>>());
        let one_round = remove_outliers_iterative(&v, 1).unwrap();
        let mut expected = vec![16.0];
        expected.extend((0..10).map(f64::from));
        assert_eq!(one_round, expected);
    }

    /// Direct evaluation of the between-class variance at every split.
    fn brute_force_otsu(weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mu_t: f64 = p.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
        let mut best = None;
        let mut best_v = f64::NEG_INFINITY;
        for k in 0..p.len() {
            let lower_w: f64 = weights[..=k].iter().sum();
            let upper_w: f64 = weights[k + 1..].iter().sum();
            if lower_w == 0.0 || upper_w == 0.0 {
                continue;
            }
            let w: f64 = p[..=k].iter().sum();
            let mu: f64 = p[..=k].iter().enumerate().map(|(i, p)| i as f64 * p).sum();
            let v = (mu_t * w - mu).powi(2) / (w * (1.0 - w));
            if v > best_v {
                best_v = v;
                best = Some(k);
            }
        }
        best
    }

    #[test]
    fn otsu_degenerate_single_bin() {
        let centers: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut w = vec![0.0; 10];
        w[4] = 7.0;
        let r = otsu_threshold(&centers, &w).unwrap();
        assert!(r.degenerate);
        assert_eq!((r.threshold_index, r.threshold_value), (4, 4.0));

        let r = otsu_threshold(&[3.5], &[2.0]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.threshold_value, 3.5);
    }

    #[test]
    fn otsu_plateau_breaks_to_lowest_k() {
        let centers: Vec<f64> = (0..100).map(|i| i as f64 * 0.01 + 0.005).collect();
        let mut w = vec![0.0; 100];
        w[10] = 50.0;
        w[90] = 50.0;
        assert_eq!(brute_force_otsu(&w), Some(10));
        let r = otsu_threshold(&centers, &w).unwrap();
        assert_eq!(r.threshold_index, 10);
        assert!(!r.degenerate);
        assert_eq!(r.threshold_value, centers[10]);
    }

    #[test]
    fn otsu_rejects_bad_input() {
        assert!(otsu_threshold(&[], &[]).is_err());
        assert!(otsu_threshold(&[1.0], &[0.0]).is_err());
        assert!(otsu_threshold(&[1.0, 2.0], &[1.0]).is_err());
        assert!(otsu_threshold(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn robust_threshold_ignores_spikes() {
        let base: Vec<f64> = (0..400)
            .map(|i| if i % 2 == 0 { 0.1 + (i % 7) as f64 * 0.001 } else { 0.5 + (i % 5) as f64 * 0.002 })
            .collect();
        let mut spiked = base.clone();
        spiked.extend([50.0, 80.0, 1e4]);
        let a = robust_threshold(&base, ThresholdSearch::default()).unwrap();
        let b = robust_threshold(&spiked, ThresholdSearch::default()).unwrap();
        assert!(a.threshold_value > 0.11 && a.threshold_value < 0.5);
        assert!((a.threshold_value - b.threshold_value).abs() <= 1e-9);
    }

    proptest! {
        #[test]
        fn otsu_matches_exhaustive_scan(counts in prop::collection::vec(0u32..1000, 2..120)) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let centers: Vec<f64> = (0..w.len()).map(|i| i as f64).collect();
            let r = otsu_threshold(&centers, &w).unwrap();
            match brute_force_otsu(&w) {
                Some(k) => { prop_assert_eq!(r.threshold_index, k); prop_assert!(!r.degenerate); prop_assert!(r.criterion >= 0.0); }
                None => prop_assert!(r.degenerate),
            }
        }

        #[test]
        fn otsu_scale_equivariant(counts in prop::collection::vec(0u32..100, 2..60), a in 0.001f64..1000.0, lo in -10.0f64..10.0) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let centers: Vec<f64> = (0..w.len()).map(|i| lo + i as f64 * 0.3).collect();
            let scaled: Vec<f64> = centers.iter().map(|c| c * a).collect();
            let r = otsu_threshold(&centers, &w).unwrap();
            let s = otsu_threshold(&scaled, &w).unwrap();
            prop_assert_eq!(r.threshold_index, s.threshold_index);
            prop_assert_eq!(s.threshold_value, r.threshold_value * a);
        }

        #[test]
        fn quartiles_permutation_and_translation(mut v in prop::collection::vec(-100.0f64..100.0, 1..60), c in -50.0f64..50.0) {
            let q = quartiles(&v).unwrap();
            prop_assert!(q.q1 <= q.q2 && q.q2 <= q.q3 && q.iqr >= 0.0);
            prop_assert!(q.lower_limit <= q.q1 && q.upper_limit >= q.q3);
            v.reverse();
            prop_assert_eq!(quartiles(&v).unwrap(), q);
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let qs = quartiles(&shifted).unwrap();
            for (a, b) in [(qs.q1, q.q1), (qs.q2, q.q2), (qs.q3, q.q3)] {
                prop_assert!((a - (b + c)).abs() <= 1e-9);
            }
        }

        #[test]
        fn outlier_removal_idempotent_submultiset(v in prop::collection::vec(-1e3f64..1e3, 1..200), spikes in prop::collection::vec(-1e6f64..1e6, 0..5)) {
            let mut all = v.clone();
            all.extend(spikes);
            let once = remove_outliers_iterative(&all, 100).unwrap();
            let twice = remove_outliers_iterative(&once, 100).unwrap();
            prop_assert_eq!(&twice, &once);
            let mut pool = all.clone();
            for x in &once {
                let pos = pool.iter().position(|y| y == x);
                prop_assert!(pos.is_some());
                pool.remove(pos.unwrap());
            }
        }

        #[test]
        fn outlier_removal_keeps_inner_quartile_values(v in prop::collection::vec(-1e3f64..1e3, 5..100)) {
            let q = quartiles(&v).unwrap();
            let once = remove_outliers_iterative(&v, 1).unwrap();
            for x in v.iter().filter(|&&x| x > q.q1 && x < q.q3) {
                prop_assert!(once.contains(x));
            }
        }
    }
}
