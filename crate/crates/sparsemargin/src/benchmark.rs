//! The shipped synthetic benchmark.
//!
//! A fixed 96-channel recording with 5 responsive channels and 4 cues of one
//! imagined movement, separated by rest periods. Everything is pinned (seed
//! included) so results are reproducible across machines; the sparsity,
//! separability and train/test expectations quoted in the tests refer to
//! exactly this instance.

use crate::data::{generate_synthetic, CueSchedule, Dataset, Interval, SyntheticSpec, REST_TAG};
use crate::sparse::{GammaMode, SolverConfig, WarmStart};

/// Movement tag used by the benchmark schedule.
pub const MOVEMENT: &str = "wrist_up";

/// Channels that respond to the cue.
pub const ACTIVE_CHANNELS: [usize; 5] = [7, 23, 41, 64, 88];

/// Benchmark generation spec: 96 channels, 5 active, 4 cues of 100 bins
/// alternating with 100-bin rests (900 bins total). The channels are
/// low-firing units (1 spike/s at rest) that triple their rate during cues.
pub fn spec() -> SyntheticSpec {
    let mut intervals = Vec::new();
    for k in 0..4 {
        intervals.push(Interval::new(k * 200, k * 200 + 100, REST_TAG));
        intervals.push(Interval::new(k * 200 + 100, k * 200 + 200, MOVEMENT));
    }
    intervals.push(Interval::new(800, 900, REST_TAG));
    SyntheticSpec {
        m: 96,
        active_channels: ACTIVE_CHANNELS.to_vec(),
        baseline_rate: 1.0,
        active_rate: 3.0,
        noise_scale: 0.6,
        schedule: CueSchedule::new(intervals).expect("benchmark schedule is contiguous"),
        seed: 2026,
    }
}

/// Noise-free variant of the benchmark, used where an exactly solvable
/// system is needed (e.g. discrepancy-principle checks).
pub fn noise_free_spec() -> SyntheticSpec {
    SyntheticSpec {
        noise_scale: 0.0,
        ..spec()
    }
}

/// Generate the benchmark dataset and its ground-truth channel list.
pub fn dataset() -> (Dataset, Vec<usize>) {
    generate_synthetic(&spec()).expect("benchmark spec is valid")
}

/// Default solver configuration for the benchmark: sparse exponent
/// `p = 0.2`, indicator hinge, no class bias.
pub fn solver_config() -> SolverConfig {
    SolverConfig {
        beta: 5.0,
        p: 0.2,
        epsilon: 1e-3,
        alpha: 1.0,
        gamma_mode: GammaMode::Indicator,
        max_iter: 50,
        tol: 1e-8,
        warm_start: WarmStart::Psvm,
    }
}
