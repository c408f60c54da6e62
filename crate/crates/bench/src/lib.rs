//! Shared fixtures for the criterion benches.

use hkdelay::model::{InfluenceFunction, ModelParams, Points, WeightScheme};
use hkdelay::rng::SplitMix64;
use hkdelay::{InitialHistory, IntegratorConfig, Simulation};

pub fn random_points(n: usize, dim: usize, seed: u64) -> Points {
    let mut rng = SplitMix64::new(seed);
    let data = (0..n * dim).map(|_| rng.uniform(0.0, 10.0)).collect();
    Points::new(n, dim, data).expect("shape")
}

pub fn params(n: usize, dim: usize, scheme: WeightScheme) -> ModelParams {
    ModelParams {
        n_agents: n,
        dim,
        tau: 1.0,
        influence: InfluenceFunction::power_law(1.0).expect("valid"),
        scheme,
    }
}

pub fn simulation(n: usize, dim: usize, scheme: WeightScheme) -> Simulation {
    let history = InitialHistory::RandomConstant {
        seed: 7,
        bounds: vec![(0.0, 10.0); dim],
    };
    let cfg = IntegratorConfig {
        steps_per_delay: 64,
        t_end: 1e6,
        record_stride: 1 << 20,
        eps_consensus: 0.0,
    };
    Simulation::init(params(n, dim, scheme), &history, cfg).expect("init")
}
