//! Monte Carlo event-probability estimation over lattice families.
//!
//! Trials are independent pure functions of derived stream keys, so the
//! estimate is deterministic given the input stream and can fan out to a
//! worker pool.

use rayon::prelude::*;

use crate::circuit::{sample_measurement_configuration, SamplingMode};
use crate::stream::StreamKey;

use super::{circuit_to_bond_lattice, rectangular_lattice, BondLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeFamily {
    /// `[0, a] x [0, b]`: height `a`, width `b`.
    Rectangle { a: usize, b: usize },
    /// Tilted lattice of a rate-(1-q) sampled measurement configuration.
    CircuitTilted { n: usize, t: usize },
}

impl LatticeFamily {
    pub fn sample(&self, q: f64, stream: &StreamKey) -> BondLattice {
        match *self {
            LatticeFamily::Rectangle { a, b } => rectangular_lattice(a, b, q, stream),
            LatticeFamily::CircuitTilted { n, t } => {
                let config = sample_measurement_configuration(
                    n,
                    t,
                    1.0 - q,
                    SamplingMode::StructuralZero,
                    stream,
                );
                circuit_to_bond_lattice(&config)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
    pub successes: usize,
}

/// 95% Wilson score interval.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Estimates `P_q(event)` over `trials` independent lattices.
pub fn mc_estimate<F>(
    family: LatticeFamily,
    q: f64,
    trials: usize,
    stream: &StreamKey,
    event: F,
) -> McEstimate
where
    F: Fn(&BondLattice) -> bool + Sync,
{
    assert!(trials >= 1);
    let successes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let lattice = family.sample(q, &stream.derive(trial as u64));
            usize::from(event(&lattice))
        })
        .sum();
    let (ci_lo, ci_hi) = wilson_interval(successes, trials);
    McEstimate { estimate: successes as f64 / trials as f64, ci_lo, ci_hi, trials, successes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::left_right_crossing;

    #[test]
    fn certain_event_estimates_one() {
        let est = mc_estimate(
            LatticeFamily::Rectangle { a: 4, b: 4 },
            1.0,
            50,
            &StreamKey::new(1),
            left_right_crossing,
        );
        assert_eq!(est.estimate, 1.0);
        assert!(est.ci_lo > 0.9);
    }

    #[test]
    fn estimate_is_deterministic() {
        let run = || {
            mc_estimate(
                LatticeFamily::Rectangle { a: 8, b: 8 },
                0.5,
                200,
                &StreamKey::new(33),
                left_right_crossing,
            )
        };
        assert_eq!(run().successes, run().successes);
    }

    #[test]
    fn supercritical_and_subcritical_crossings() {
        let hi = mc_estimate(
            LatticeFamily::Rectangle { a: 16, b: 16 },
            0.65,
            300,
            &StreamKey::new(2),
            left_right_crossing,
        );
        let lo = mc_estimate(
            LatticeFamily::Rectangle { a: 16, b: 16 },
            0.35,
            300,
            &StreamKey::new(2),
            left_right_crossing,
        );
        assert!(hi.estimate > 0.8, "supercritical {}", hi.estimate);
        assert!(lo.estimate < 0.2, "subcritical {}", lo.estimate);
    }

    #[test]
    fn wilson_shapes() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo < 1e-12);
        assert!(hi < 0.05);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.95);
        assert!(hi > 1.0 - 1e-12);
    }
}
