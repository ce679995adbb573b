//! Receivers.
//!
//! The two-step receiver first picks the ray with the largest angle metric
//! `⟨y, ĥx⟩` over the inner ring, then picks the nearest ring on that ray in
//! Euclidean distance. The coherent minimum-distance receiver is the QAM
//! baseline. Ties always resolve to the lowest index.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{wrap_angle, ChannelParams};
use crate::constellation::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    /// Decoded ray `d` (1-based).
    pub subset_index: usize,
    /// Decoded ring `n` (1-based).
    pub amplitude_index: usize,
    pub point_index: usize,
    pub reestimated: bool,
}

/// `⟨y, ĥx⟩ = Re(y · conj(ĥx))`.
#[inline]
pub fn angle_metric(y: Complex64, h_hat: Complex64, x: Complex64) -> f64 {
    (y * (h_hat * x).conj()).re
}

/// Step 1: `argmax_k ⟨y, ĥ x_{1k}⟩`.
pub fn decode_subset(y: Complex64, h_hat: Complex64, c: &Constellation) -> usize {
    assert!(
        c.family().is_ring(),
        "subset decoding needs a ring constellation"
    );
    let mut best = 1;
    let mut best_metric = f64::NEG_INFINITY;
    for k in 1..=c.k_subsets() {
        let metric = angle_metric(y, h_hat, c.point(k, 1).value);
        if metric > best_metric {
            best_metric = metric;
            best = k;
        }
    }
    best
}

/// Step 1 via the nearest ray angle to `wrap(angle(y) − angle(ĥ))`.
///
/// Agrees with [`decode_subset`] except on measure-zero ties.
pub fn decode_subset_by_angle(y: Complex64, h_hat: Complex64, c: &Constellation) -> usize {
    let k_subsets = c.k_subsets();
    let rel = wrap_angle(y.arg() - h_hat.arg()).rem_euclid(2.0 * PI);
    let sector = (rel / c.delta()).round() as usize;
    sector % k_subsets + 1
}

/// Step 2: `argmin_i |y − √P·ĥ·x_{id}|`.
pub fn decode_point(
    y: Complex64,
    h_hat: Complex64,
    c: &Constellation,
    d: usize,
    params: &ChannelParams,
) -> usize {
    let scaled = h_hat * params.amplitude();
    let mut best = 1;
    let mut best_dist = f64::INFINITY;
    for i in 1..=c.n_per_subset() {
        let dist = (y - scaled * c.point(d, i).value).norm_sqr();
        if dist < best_dist {
            best_dist = dist;
            best = i;
        }
    }
    best
}

/// Whether the phase bound violates `cos(a) ≥ (2N−1)/(2N)`, i.e. the ring
/// decision can be corrupted by the phase error alone.
pub fn needs_reestimation(phase_bound_a: f64, n_per_subset: usize) -> bool {
    let n = n_per_subset as f64;
    phase_bound_a.cos() < (2.0 * n - 1.0) / (2.0 * n)
}

/// Re-derive the channel phase from `y` and the decoded inner-ring point.
///
/// The magnitude of `ĥ` is kept (it is known exactly); only its phase is
/// replaced by `angle(y / x_{1d})`. A zero observation leaves `ĥ` unchanged.
pub fn reestimate_channel(y: Complex64, h_hat: Complex64, x_ref: Complex64) -> Complex64 {
    let rotated = y * x_ref.conj();
    if rotated.norm_sqr() == 0.0 {
        return h_hat;
    }
    Complex64::from_polar(h_hat.norm(), rotated.arg())
}

pub fn two_step_decode(
    y: Complex64,
    h_hat: Complex64,
    c: &Constellation,
    params: &ChannelParams,
    allow_reestimate: bool,
) -> DecodeOutcome {
    let d = decode_subset(y, h_hat, c);
    let reestimated =
        allow_reestimate && needs_reestimation(params.phase_bound(), c.n_per_subset());
    let h_used = if reestimated {
        reestimate_channel(y, h_hat, c.point(d, 1).value)
    } else {
        h_hat
    };
    let n = decode_point(y, h_used, c, d, params);
    DecodeOutcome {
        subset_index: d,
        amplitude_index: n,
        point_index: c.point_index(d, n),
        reestimated,
    }
}

/// `argmin_x |y − √P·ĥ·x|` over every point.
pub fn coherent_min_distance_decode(
    y: Complex64,
    h_hat: Complex64,
    c: &Constellation,
    params: &ChannelParams,
) -> usize {
    let scaled = h_hat * params.amplitude();
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (idx, p) in c.points().iter().enumerate() {
        let dist = (y - scaled * p.value).norm_sqr();
        if dist < best_dist {
            best_dist = dist;
            best = idx;
        }
    }
    best
}
