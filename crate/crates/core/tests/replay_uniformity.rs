use coop_invaders::replay::ReplayBuffer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const ENTRIES: usize = 100;
const DRAWS: usize = 100_000;

/// Upper-tail p-value of Pearson's statistic for uniform sampling.
fn chi_square_p(counts: &[usize], draws: usize) -> f64 {
    let expected = draws as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

#[test]
fn sampling_is_uniform_over_entries() {
    let mut buf = ReplayBuffer::new(ENTRIES).unwrap();
    for i in 0..ENTRIES {
        buf.push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = vec![0usize; ENTRIES];
    let mut drawn = 0;
    while drawn < DRAWS {
        for &i in buf.sample(32.min(DRAWS - drawn), &mut rng).unwrap() {
            counts[i] += 1;
            drawn += 1;
        }
    }
    let p = chi_square_p(&counts, DRAWS);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn wrapped_buffer_samples_only_live_entries() {
    let mut buf = ReplayBuffer::new(ENTRIES).unwrap();
    for i in 0..250 {
        buf.push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut counts = vec![0usize; ENTRIES];
    for _ in 0..DRAWS / 50 {
        for &i in buf.sample(50, &mut rng).unwrap() {
            assert!((150..250).contains(&i));
            counts[i - 150] += 1;
        }
    }
    assert!(chi_square_p(&counts, DRAWS) > 0.01);
}

#[test]
fn skewed_counts_are_rejected() {
    let mut counts = vec![1000usize; ENTRIES];
    counts[0] = 1400;
    counts[1] = 600;
    assert!(chi_square_p(&counts, DRAWS) < 0.01);
}
