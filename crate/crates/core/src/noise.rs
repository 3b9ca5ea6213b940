//! Error generation: i.i.d. static instances and the dynamic spawn process.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{ErrorEvent, LatticeSpec, QuditId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("error probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("spawn period must be at least 1")]
    SpawnPeriod,
    #[error("magnitude weights must have length d-1 = {expected}, got {got}")]
    WeightsLength { expected: usize, got: usize },
    #[error("magnitude weights must be finite, non-negative and not all zero")]
    Weights,
}

/// Distribution of error magnitudes over `1..d`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum MagnitudeDist {
    #[default]
    Uniform,
    /// Weight for magnitude `i + 1` at index `i`.
    Weighted(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p: f64,
    pub magnitude_dist: MagnitudeDist,
    pub spawn_period: u32,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            p: 0.0,
            magnitude_dist: MagnitudeDist::Uniform,
            spawn_period: 1,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self, spec: &LatticeSpec) -> Result<(), NoiseError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(NoiseError::Probability(self.p));
        }
        if self.spawn_period == 0 {
            return Err(NoiseError::SpawnPeriod);
        }
        if let MagnitudeDist::Weighted(w) = &self.magnitude_dist {
            let expected = spec.d as usize - 1;
            if w.len() != expected {
                return Err(NoiseError::WeightsLength {
                    expected,
                    got: w.len(),
                });
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                return Err(NoiseError::Weights);
            }
        }
        Ok(())
    }
}

/// Sampler for error magnitudes in `1..d`.
#[derive(Debug, Clone)]
pub struct MagnitudeSampler {
    d: u32,
    weighted: Option<WeightedIndex<f64>>,
}

impl MagnitudeSampler {
    pub fn new(dist: &MagnitudeDist, d: u32) -> Self {
        let weighted = match dist {
            MagnitudeDist::Uniform => None,
            MagnitudeDist::Weighted(w) => {
                Some(WeightedIndex::new(w.iter().copied()).expect("validated weights"))
            }
        };
        Self { d, weighted }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.weighted {
            None => rng.gen_range(1..self.d),
            Some(w) => w.sample(rng) as u32 + 1,
        }
    }
}

/// RNG for stream `index` of a seeded campaign.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Each qudit errs independently with probability `noise.p`. Event ids are
/// assigned consecutively from `first_id` in qudit enumeration order.
pub fn generate_instance<R: Rng + ?Sized>(
    spec: &LatticeSpec,
    noise: &NoiseSpec,
    rng: &mut R,
    first_id: u64,
) -> Vec<ErrorEvent> {
    let sampler = MagnitudeSampler::new(&noise.magnitude_dist, spec.d);
    let mut next = first_id;
    let mut events = Vec::new();
    for qudit in spec.qudits() {
        if rng.gen_bool(noise.p) {
            events.push(ErrorEvent {
                qudit,
                magnitude: sampler.sample(rng),
                event_id: next,
            });
            next += 1;
        }
    }
    events
}

/// One error on a uniformly chosen qudit.
pub fn sample_spawn<R: Rng + ?Sized>(
    spec: &LatticeSpec,
    noise: &NoiseSpec,
    rng: &mut R,
    event_id: u64,
) -> ErrorEvent {
    let n_horizontal = spec.height * (spec.width + 1);
    let i = rng.gen_range(0..spec.qudit_count());
    let qudit = if i < n_horizontal {
        QuditId::horizontal(i / (spec.width + 1), i % (spec.width + 1))
    } else {
        let j = i - n_horizontal;
        QuditId::vertical(1 + j / spec.width, j % spec.width)
    };
    let magnitude = MagnitudeSampler::new(&noise.magnitude_dist, spec.d).sample(rng);
    ErrorEvent {
        qudit,
        magnitude,
        event_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn noise(p: f64, seed: u64) -> NoiseSpec {
        NoiseSpec {
            p,
            seed,
            ..NoiseSpec::default()
        }
    }

    #[test]
    fn zero_probability_is_empty() {
        let spec = LatticeSpec::default();
        let mut rng = stream_rng(1, 0);
        assert!(generate_instance(&spec, &noise(0.0, 1), &mut rng, 0).is_empty());
    }

    #[test]
    fn unit_probability_hits_every_qudit_once() {
        let spec = LatticeSpec::default();
        let mut rng = stream_rng(1, 0);
        let events = generate_instance(&spec, &noise(1.0, 1), &mut rng, 0);
        assert_eq!(events.len(), spec.qudit_count());
        let qudits: HashSet<_> = events.iter().map(|e| e.qudit).collect();
        assert_eq!(qudits.len(), spec.qudit_count());
        assert!(events.iter().all(|e| (1..=9).contains(&e.magnitude)));
        let ids: Vec<_> = events.iter().map(|e| e.event_id).collect();
        assert_eq!(ids, (0..spec.qudit_count() as u64).collect::<Vec<_>>());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = LatticeSpec::default();
        let a = generate_instance(&spec, &noise(0.1, 42), &mut stream_rng(42, 0), 0);
        let b = generate_instance(&spec, &noise(0.1, 42), &mut stream_rng(42, 0), 0);
        assert_eq!(a, b);
        let s1 = sample_spawn(&spec, &noise(0.1, 42), &mut stream_rng(42, 3), 5);
        let s2 = sample_spawn(&spec, &noise(0.1, 42), &mut stream_rng(42, 3), 5);
        assert_eq!(s1, s2);
    }

    #[test]
    fn spawn_magnitudes_are_uniform() {
        // 10^4 draws; each magnitude count must lie within 5 sigma of the
        // binomial mean n/9.
        let spec = LatticeSpec::default();
        let nz = noise(0.0, 7);
        let mut rng = stream_rng(7, 0);
        let n = 10_000usize;
        let mut counts = [0usize; 10];
        let mut qudits = HashSet::new();
        for i in 0..n {
            let e = sample_spawn(&spec, &nz, &mut rng, i as u64);
            assert!((1..=9).contains(&e.magnitude));
            assert!(spec.contains_qudit(e.qudit));
            counts[e.magnitude as usize] += 1;
            qudits.insert(e.qudit);
        }
        let p = 1.0 / 9.0;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - mean).abs() < 5.0 * sigma, "count {c} vs mean {mean}");
        }
        assert_eq!(qudits.len(), spec.qudit_count());
    }

    #[test]
    fn instance_size_mean_is_p_times_qudits() {
        // Mean of 10^4 instance sizes within 5 standard errors of p * n.
        let spec = LatticeSpec::default();
        let p = 0.1;
        let nz = noise(p, 3);
        let trials = 10_000u64;
        let total: usize = (0..trials)
            .map(|t| generate_instance(&spec, &nz, &mut stream_rng(3, t), 0).len())
            .sum();
        let n = spec.qudit_count() as f64;
        let mean = total as f64 / trials as f64;
        let se = (n * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - p * n).abs() < 5.0 * se, "mean {mean}, expected {}", p * n);
    }

    #[test]
    fn weighted_distribution_respects_support() {
        let spec = LatticeSpec::default();
        let mut w = vec![0.0; 9];
        w[4] = 1.0;
        let nz = NoiseSpec {
            magnitude_dist: MagnitudeDist::Weighted(w),
            ..noise(1.0, 0)
        };
        nz.validate(&spec).unwrap();
        let events = generate_instance(&spec, &nz, &mut stream_rng(0, 0), 0);
        assert!(events.iter().all(|e| e.magnitude == 5));
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let spec = LatticeSpec::default();
        assert!(noise(1.5, 0).validate(&spec).is_err());
        assert!(noise(-0.1, 0).validate(&spec).is_err());
        let bad_period = NoiseSpec {
            spawn_period: 0,
            ..NoiseSpec::default()
        };
        assert_eq!(bad_period.validate(&spec), Err(NoiseError::SpawnPeriod));
        let short = NoiseSpec {
            magnitude_dist: MagnitudeDist::Weighted(vec![1.0; 3]),
            ..NoiseSpec::default()
        };
        assert!(matches!(
            short.validate(&spec),
            Err(NoiseError::WeightsLength { .. })
        ));
    }
}
