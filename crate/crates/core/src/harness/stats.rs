use statrs::distribution::{ContinuousCDF, Normal};

use super::HarnessError;

pub const DEFAULT_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub median: f64,
    pub window: usize,
    /// Trailing mean over the last `window` episodes, one entry per episode.
    pub rolling_mean: Vec<f64>,
}

impl SummaryStats {
    pub fn of(scores: &[f64], window: usize) -> Result<Self, HarnessError> {
        if scores.is_empty() {
            return Err(HarnessError::NoEpisodes);
        }
        if window == 0 {
            return Err(HarnessError::BadArgument("window must be at least 1".into()));
        }
        let n = scores.len();
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Ok(Self {
            n,
            mean: scores.iter().sum::<f64>() / n as f64,
            max: sorted[n - 1],
            min: sorted[0],
            median,
            window,
            rolling_mean: rolling_mean(scores, window),
        })
    }

    pub fn final_rolling_mean(&self) -> f64 {
        *self.rolling_mean.last().expect("stats are never empty")
    }
}

/// Mean of `xs[i+1-window ..= i]`, or of all earlier values while fewer than
/// `window` exist.
pub fn rolling_mean(xs: &[f64], window: usize) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let w = &xs[lo..=i];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// U for the first sample: the number of (a, b) pairs with a > b, ties
    /// counting one half.
    pub u_statistic: f64,
    pub p_value: f64,
    /// mean(a) - mean(b).
    pub mean_diff: f64,
}

/// Two-sided Mann-Whitney U test, normal approximation with tie and
/// continuity correction.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<Comparison, HarnessError> {
    if a.is_empty() || b.is_empty() {
        return Err(HarnessError::NoEpisodes);
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += pooled[i..=j].iter().filter(|p| p.1).count() as f64 * avg_rank;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let nt = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)).max(1.0));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * std.sf(z)).min(1.0)
    };
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    Ok(Comparison {
        u_statistic: u,
        p_value,
        mean_diff: mean(a) - mean(b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn summary_arithmetic() {
        let s = SummaryStats::of(&[100.0, 300.0], 50).unwrap();
        assert_eq!((s.mean, s.max, s.min, s.median), (200.0, 300.0, 100.0, 200.0));
        assert_eq!(s.rolling_mean, vec![100.0, 200.0]);
        assert_eq!(SummaryStats::of(&[70.0], 50).unwrap().final_rolling_mean(), 70.0);
        assert!(matches!(SummaryStats::of(&[], 50), Err(HarnessError::NoEpisodes)));
    }

    #[test]
    fn rolling_window_trails() {
        assert_eq!(rolling_mean(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.0, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn separated_samples() {
        let c = mann_whitney(&[1.0, 2.0, 3.0], &[101.0, 102.0, 103.0]).unwrap();
        assert_eq!(c.u_statistic, 0.0);
        assert_eq!(c.mean_diff, -100.0);
        let r = mann_whitney(&[101.0, 102.0, 103.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u_statistic, 9.0);
        assert_eq!(c.p_value, r.p_value);
    }

    #[test]
    fn known_p_value() {
        // n1 = n2 = 10, fully separated: U = 0, mu = 50, sigma = sqrt(175),
        // z = 49.5 / sqrt(175) = 3.7418; two-sided p = 1.8267e-4.
        let a: Vec<f64> = (0..10).map(f64::from).collect();
        let b: Vec<f64> = (10..20).map(f64::from).collect();
        let c = mann_whitney(&a, &b).unwrap();
        assert!((c.p_value - 1.8267e-4).abs() < 1e-7, "{}", c.p_value);
    }

    #[test]
    fn identical_and_constant_samples() {
        let a = [5.0, 1.0, 9.0, 3.0];
        assert!(mann_whitney(&a, &a).unwrap().p_value > 0.9);
        assert_eq!(mann_whitney(&[2.0; 5], &[2.0; 7]).unwrap().p_value, 1.0);
        assert!(mann_whitney(&[], &a).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_shift_invariant(
            a in proptest::collection::vec(0u32..500, 1..30),
            b in proptest::collection::vec(0u32..500, 1..30),
            shift in 0u32..1000,
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ab = mann_whitney(&a, &b).unwrap();
            let ba = mann_whitney(&b, &a).unwrap();
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
            prop_assert!((ab.u_statistic + ba.u_statistic - (a.len() * b.len()) as f64).abs() < 1e-9);
            let s = f64::from(shift);
            let a2: Vec<f64> = a.iter().map(|x| x + s).collect();
            let b2: Vec<f64> = b.iter().map(|x| x + s).collect();
            let shifted = mann_whitney(&a2, &b2).unwrap();
            prop_assert!((shifted.p_value - ab.p_value).abs() < 1e-12);
            prop_assert_eq!(shifted.u_statistic, ab.u_statistic);
        }

        #[test]
        fn summary_bounds(xs in proptest::collection::vec(0u32..5000, 1..100)) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let s = SummaryStats::of(&xs, 50).unwrap();
            prop_assert!(s.min <= s.mean + 1e-9 && s.mean <= s.max + 1e-9);
            prop_assert_eq!(s.rolling_mean.len(), xs.len());
        }
    }
}
