use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;

/// Repeating training pattern: ones-runs of one or three bits, zero-runs
/// of two.
pub const TRAINING_PATTERN: [u8; 8] = [0, 0, 1, 0, 0, 1, 1, 1];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BitSourceKind {
    Bernoulli {
        p: f64,
    },
    TrainingBiased,
    Alternating,
    /// Cycled indefinitely.
    Explicit {
        bits: Vec<u8>,
    },
}

impl BitSourceKind {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            BitSourceKind::Bernoulli { p } if !(0.0..=1.0).contains(p) => Err(
                SimError::InvalidConfig(format!("bernoulli p must lie in [0, 1], got {p}")),
            ),
            BitSourceKind::Explicit { bits } if bits.is_empty() => Err(SimError::InvalidConfig(
                "explicit bit sequence is empty".into(),
            )),
            BitSourceKind::Explicit { bits } if bits.iter().any(|&b| b > 1) => Err(
                SimError::InvalidConfig("explicit bits must be 0 or 1".into()),
            ),
            _ => Ok(()),
        }
    }

    fn period(&self) -> usize {
        match self {
            BitSourceKind::Bernoulli { .. } => 1,
            BitSourceKind::TrainingBiased => TRAINING_PATTERN.len(),
            BitSourceKind::Alternating => 2,
            BitSourceKind::Explicit { bits } => bits.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitSource {
    pub kind: BitSourceKind,
    pub seed: u64,
}

/// Endless bit sequence. Deterministic patterns start at `phase`.
#[derive(Debug, Clone)]
pub struct BitStream {
    kind: BitSourceKind,
    index: usize,
}

impl BitStream {
    pub fn new(kind: BitSourceKind, phase: usize) -> Result<Self, SimError> {
        kind.validate()?;
        let index = phase % kind.period();
        Ok(Self { kind, index })
    }

    /// Stream starting at a random phase of its pattern.
    pub fn random_phase<R: Rng + ?Sized>(
        kind: BitSourceKind,
        rng: &mut R,
    ) -> Result<Self, SimError> {
        kind.validate()?;
        let phase = rng.random_range(0..kind.period());
        Self::new(kind, phase)
    }

    pub fn next_bit<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u8 {
        let i = self.index;
        self.index = self.index.wrapping_add(1);
        match &self.kind {
            BitSourceKind::Bernoulli { p } => rng.random_bool(*p) as u8,
            BitSourceKind::TrainingBiased => TRAINING_PATTERN[i % TRAINING_PATTERN.len()],
            BitSourceKind::Alternating => (i % 2) as u8,
            BitSourceKind::Explicit { bits } => bits[i % bits.len()],
        }
    }
}

pub fn generate_bits(source: &BitSource, n: usize) -> Result<Vec<u8>, SimError> {
    if n == 0 {
        return Err(SimError::InvalidConfig(
            "bit count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(source.seed);
    let mut stream = BitStream::new(source.kind.clone(), 0)?;
    Ok((0..n).map(|_| stream.next_bit(&mut rng)).collect())
}
