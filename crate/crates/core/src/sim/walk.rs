use rand::Rng;

use super::monte_carlo::trial_rng;
use crate::markov::AbsorbingChain;
use crate::par::{map_collect, Execution};

/// Samples one path of `chain` from `start`; returns the number of
/// transitions taken and the absorbing state reached, or `None` after
/// `max_steps`.
pub fn walk_chain<R: Rng + ?Sized>(
    chain: &AbsorbingChain,
    start: usize,
    max_steps: u64,
    rng: &mut R,
) -> Option<(u64, usize)> {
    let mut state = start;
    for n in 0..=max_steps {
        if chain.is_absorbing(state) {
            return Some((n, state));
        }
        if n == max_steps {
            break;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = state;
        for (j, p) in chain.row(state) {
            acc += p;
            next = j;
            if u < acc {
                break;
            }
        }
        state = next;
    }
    None
}

/// Absorption times of `trials` independent walks, in trial order.
pub fn walk_chain_many(
    chain: &AbsorbingChain,
    start: usize,
    trials: u64,
    max_steps: u64,
    base_seed: u64,
    exec: Execution,
) -> Vec<Option<u64>> {
    map_collect(0..trials, exec, |i| {
        walk_chain(chain, start, max_steps, &mut trial_rng(base_seed, 0, i)).map(|(n, _)| n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jitter::isi1_chain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn absorbed_start_takes_no_steps() {
        let c = isi1_chain(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(walk_chain(&c, 0, 10, &mut rng), Some((0, 0)));
    }

    #[test]
    fn mean_matches_closed_form() {
        let c = isi1_chain(10).unwrap();
        let times = walk_chain_many(&c, 5, 20_000, 1_000_000, 1, Execution::Parallel);
        let mean = times.iter().map(|t| t.unwrap() as f64).sum::<f64>() / times.len() as f64;
        // 2k(N-k) = 50, std about 40
        assert!(
            (mean - 50.0).abs() < 3.0 * 40.0 / (20_000f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn cap_returns_none() {
        let c = isi1_chain(100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(walk_chain(&c, 50, 3, &mut rng), None);
    }
}
