//! Bounded FIFO experience memory with uniform sampling.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::error::ConfigError;

/// One frame as kept in memory. Pixel frames are quantised to bytes when they
/// are captured, so the policy acting on the stack and the learner replaying
/// it see the same values.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredFrame {
    Exact(Vec<f64>),
    Quantized(Vec<u8>),
}

impl StoredFrame {
    /// Rounds intensities in `[0, 1]` to the nearest multiple of 1/255.
    pub fn quantize(values: &[f64]) -> Self {
        StoredFrame::Quantized(
            values
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        match self {
            StoredFrame::Exact(v) => v.len(),
            StoredFrame::Quantized(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extend_into(&self, out: &mut Vec<f64>) {
        match self {
            StoredFrame::Exact(v) => out.extend_from_slice(v),
            StoredFrame::Quantized(v) => out.extend(v.iter().map(|&b| f64::from(b) / 255.0)),
        }
    }
}

/// A stack of frames, oldest first. Frames are shared between the
/// overlapping stacks of consecutive transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub frames: Vec<Arc<StoredFrame>>,
}

impl Observation {
    pub fn single(values: Vec<f64>) -> Self {
        Self {
            frames: vec![Arc::new(StoredFrame::Exact(values))],
        }
    }

    pub fn len(&self) -> usize {
        self.frames.iter().map(|f| f.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The network input: frames concatenated channel by channel.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for f in &self.frames {
            f.extend_into(&mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Observation,
    pub a: usize,
    pub r: f64,
    pub s_next: Observation,
    pub done: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("cannot sample from an empty replay buffer")]
    Empty,
}

pub const DEFAULT_CAPACITY: usize = 50_000;

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T = Transition> {
    capacity: usize,
    items: VecDeque<T>,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self, ConfigError> {
        if capacity == 0 {
            return Err(ConfigError::new("buffer_capacity", "must be at least 1"));
        }
        Ok(Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(DEFAULT_CAPACITY)),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Stores `item`, evicting the oldest entry when full.
    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
    }

    /// Entries oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// `batch` uniform draws with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&T>, ReplayError> {
        if self.items.is_empty() {
            return Err(ReplayError::Empty);
        }
        Ok((0..batch)
            .map(|_| &self.items[rng.gen_range(0..self.items.len())])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(tag: f64) -> Transition {
        Transition {
            s: Observation::single(vec![tag]),
            a: 2,
            r: -tag,
            s_next: Observation::single(vec![tag + 0.5]),
            done: tag > 3.0,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(3).unwrap();
        for i in 1..=4 {
            b.push(t(f64::from(i)));
        }
        let held: Vec<_> = b.iter().cloned().collect();
        assert_eq!(held, vec![t(2.0), t(3.0), t(4.0)]);
    }

    #[test]
    fn push_to_empty_and_read_back() {
        let mut b = ReplayBuffer::new(10).unwrap();
        b.push(t(7.0));
        assert_eq!(b.len(), 1);
        assert_eq!(b.iter().next().unwrap(), &t(7.0));
    }

    #[test]
    fn single_entry_sampled_repeatedly() {
        let mut b = ReplayBuffer::new(10).unwrap();
        b.push(t(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = b.sample(4, &mut rng).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|x| **x == t(1.0)));
    }

    #[test]
    fn empty_buffer_errors() {
        let b: ReplayBuffer = ReplayBuffer::new(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(b.sample(1, &mut rng).unwrap_err(), ReplayError::Empty);
        assert!(ReplayBuffer::<u8>::new(0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut b = ReplayBuffer::new(100).unwrap();
        for i in 0..100 {
            b.push(i);
        }
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            b.sample(32, &mut rng).unwrap().into_iter().copied().collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn quantization_error_bounded() {
        let values: Vec<f64> = (0..1000).map(|i| f64::from(i) / 999.0).collect();
        let mut out = Vec::new();
        StoredFrame::quantize(&values).extend_into(&mut out);
        for (a, b) in values.iter().zip(&out) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
        let mut again = Vec::new();
        StoredFrame::quantize(&out).extend_into(&mut again);
        assert_eq!(out, again);
    }
}
