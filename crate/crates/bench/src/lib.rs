//! Shared fixtures for the benchmarks.

use stirap_core::{PulseParams, ScheduleSpec, SystemParams};

/// Reference pulse and parameters with γ = 2.5×10⁴ 1/s.
pub fn reference() -> (PulseParams, SystemParams) {
    (PulseParams::reference(), SystemParams::reference(2.5e4))
}

/// Reference window with a step 100× the default, for quick end-to-end timing.
pub fn short_schedule() -> ScheduleSpec {
    ScheduleSpec {
        step: 2e-4,
        record_stride: 1,
        ..ScheduleSpec::default()
    }
}
