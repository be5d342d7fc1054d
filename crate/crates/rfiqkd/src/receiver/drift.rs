use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftKind {
    /// Gaussian increments, wrapped into [0, 2pi).
    WrappedRandomWalk,
    /// Mean-reverting walk around pi, wrapped.
    OrnsteinUhlenbeck,
    /// Deterministic equally spaced phases covering the full circle.
    UniformGrid,
}

/// Interferometer phase evolution across integration windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftProcess {
    pub kind: DriftKind,
    pub step_std_rad_per_window: f64,
    pub seed: u64,
}

impl Default for DriftProcess {
    fn default() -> Self {
        Self { kind: DriftKind::WrappedRandomWalk, step_std_rad_per_window: 0.05, seed: 1 }
    }
}

fn wrap(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

impl DriftProcess {
    /// Phase per window, all values in [0, 2pi); deterministic per seed.
    pub fn phases(&self, n_windows: usize) -> Vec<f64> {
        match self.kind {
            DriftKind::UniformGrid => {
                (0..n_windows).map(|j| wrap(TAU * j as f64 / n_windows.max(1) as f64)).collect()
            }
            DriftKind::WrappedRandomWalk => {
                let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
                let step = Normal::new(0.0, self.step_std_rad_per_window.max(0.0)).unwrap();
                let mut phi: f64 = rng.gen_range(0.0..TAU);
                (0..n_windows)
                    .map(|_| {
                        let out = wrap(phi);
                        phi += step.sample(&mut rng);
                        out
                    })
                    .collect()
            }
            DriftKind::OrnsteinUhlenbeck => {
                let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
                let step = Normal::new(0.0, self.step_std_rad_per_window.max(0.0)).unwrap();
                let reversion = 0.02;
                let mut phi: f64 = rng.gen_range(0.0..TAU);
                (0..n_windows)
                    .map(|_| {
                        let out = wrap(phi);
                        phi += reversion * (std::f64::consts::PI - phi) + step.sample(&mut rng);
                        out
                    })
                    .collect()
            }
        }
    }
}
