//! Shared fixtures for the benchmark suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use equicorr_core::model::{draw_observations, draw_signals, ModelParams, TrialSample};

/// A deterministic realization of the standard benchmark cell.
pub fn fixture_sample(m: usize, rho: f64, seed: u64) -> (ModelParams, TrialSample) {
    let params = ModelParams::with_beta(m, 0.3, 1.0, 15.0, rho).expect("valid fixture params");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = draw_signals(&params, &mut rng).expect("draw signals");
    let sample = draw_observations(&params, nu, &mut rng).expect("draw observations");
    (params, sample)
}
