//! Link-delay model: a uniform base delay plus capped heavy-tail jitter.
//!
//! The base range defaults to 21 µs – 53 ms, a span wide enough to cover
//! same-rack and cross-continent links. Jitter is Pareto-distributed but
//! truncated at `jitter_cap_us`: the cap keeps every delay inside a known
//! bound, so with the default step timeouts an honest message can never
//! straggle past its deadline — dropouts in a simulation are always the
//! injected schedule, never a sampling artifact. The truncation (and the
//! Pareto shape itself) is an approximation of real traffic, chosen for
//! determinism over tail fidelity.

use rand::Rng;
use rand_distr::{Distribution, Pareto};

#[derive(Clone, Copy, Debug)]
pub struct DelayModel {
    pub base_lo_us: u64,
    pub base_hi_us: u64,
    /// Pareto scale (minimum jitter), microseconds.
    pub jitter_scale_us: f64,
    /// Pareto tail index; smaller = heavier tail.
    pub jitter_shape: f64,
    /// Hard ceiling on the jitter term.
    pub jitter_cap_us: u64,
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel {
            base_lo_us: 21,
            base_hi_us: 53_000,
            jitter_scale_us: 300.0,
            jitter_shape: 2.2,
            jitter_cap_us: 20_000,
        }
    }
}

impl DelayModel {
    /// Largest delay this model can emit.
    pub fn max_us(&self) -> u64 {
        self.base_hi_us + self.jitter_cap_us
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let base = rng.gen_range(self.base_lo_us..=self.base_hi_us);
        let pareto = Pareto::new(self.jitter_scale_us, self.jitter_shape)
            .expect("scale and shape are positive");
        let jitter = (pareto.sample(rng) as u64).min(self.jitter_cap_us);
        base + jitter
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn samples_stay_inside_the_documented_bounds() {
        let model = DelayModel::default();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let d = model.sample(&mut rng);
            assert!(d >= model.base_lo_us);
            assert!(d <= model.max_us());
        }
    }

    #[test]
    fn same_seed_same_delays() {
        let model = DelayModel::default();
        let mut a = ChaCha20Rng::seed_from_u64(7);
        let mut b = ChaCha20Rng::seed_from_u64(7);
        let xs: Vec<u64> = (0..1000).map(|_| model.sample(&mut a)).collect();
        let ys: Vec<u64> = (0..1000).map(|_| model.sample(&mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn cap_binds_the_jitter_tail() {
        let free = DelayModel::default();
        let clamped = DelayModel {
            jitter_cap_us: 0,
            ..free
        };
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        assert!((0..10_000).any(|_| free.sample(&mut rng) > free.base_hi_us));
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        assert!((0..10_000).all(|_| clamped.sample(&mut rng) <= clamped.base_hi_us));
    }
}
