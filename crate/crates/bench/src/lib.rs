//! Shared fixtures for the criterion benchmarks.

use hkq_core::sample::Sampler;
use hkq_core::{ConfigPoint, Truncation};

/// Deterministic sample points for benchmarking at a given size.
pub fn points(
    space: hkq_core::sample::Space,
    p: usize,
    q: usize,
    count: usize,
) -> Vec<ConfigPoint> {
    let trunc = Truncation::new(p, q, 2f64.sqrt()).expect("valid truncation");
    let mut sampler = Sampler::new(0xbe4c);
    (0..count)
        .map(|_| sampler.point(space, trunc).expect("sample"))
        .collect()
}
