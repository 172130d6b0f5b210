//! Seeded random parameter instances for randomized verification.
//!
//! Every trial draws from its own ChaCha stream derived from the seed and
//! the trial index, so a trial can be replayed alone and results do not
//! depend on the order trials run in.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::params::GameParams;

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Parameter set for trial `trial` of seed `seed`:
/// `beta2 ~ logU[0.5, 50]`, `beta1 = beta2 * U(1.01, 10)`, `e2 ~ U(1, 10)`,
/// `delta_e ~ logU[0.01, 100]`, `r ~ logU[0.1, 20]`, `t_o = 10`, unit window.
pub fn draw_params(seed: u64, trial: u64) -> GameParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let beta2 = log_uniform(&mut rng, 0.5, 50.0);
    let beta1 = beta2 * rng.gen_range(1.01..10.0);
    let e2 = rng.gen_range(1.0..10.0);
    let delta = log_uniform(&mut rng, 0.01, 100.0);
    let r = log_uniform(&mut rng, 0.1, 20.0);
    GameParams::new(beta1, beta2, e2 + delta, e2, r, 10.0).expect("generator stays inside the valid region")
}

pub fn draw_many(seed: u64, trials: u64) -> Vec<GameParams> {
    (0..trials).map(|i| draw_params(seed, i)).collect()
}
