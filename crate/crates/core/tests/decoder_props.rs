//! Randomized invariants of the two-step receiver. Inputs whose decision
//! margin is within rounding of a tie are discarded, since equivariance only
//! holds exactly in real arithmetic.

use std::f64::consts::PI;

use proptest::prelude::*;

use pskpam::channel::{ChannelDraw, ChannelParams};
use pskpam::constellation::{build_psk_pam, Constellation, NormMode};
use pskpam::decoder::{
    angle_metric, coherent_min_distance_decode, decode_point, decode_subset,
    decode_subset_by_angle, needs_reestimation, reestimate_channel, two_step_decode,
};
use pskpam::Complex64;

const SHAPES: [(usize, usize); 15] = [
    (2, 1),
    (2, 2),
    (4, 1),
    (4, 2),
    (4, 4),
    (8, 1),
    (8, 2),
    (8, 4),
    (8, 8),
    (16, 2),
    (16, 4),
    (16, 8),
    (16, 16),
    (32, 8),
    (64, 8),
];
const MARGIN: f64 = 1e-9;

fn cases() -> ProptestConfig {
    ProptestConfig {
        cases: 10_000,
        max_global_rejects: 10_000,
        ..ProptestConfig::default()
    }
}

fn shape() -> impl Strategy<Value = Constellation> {
    (0..SHAPES.len(), any::<bool>()).prop_map(|(idx, paper)| {
        let (m, k) = SHAPES[idx];
        let norm = if paper {
            NormMode::PaperSum
        } else {
            NormMode::MeanPower
        };
        build_psk_pam(m, k, norm).unwrap()
    })
}

fn complex(scale: f64) -> impl Strategy<Value = Complex64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex64::new(re, im))
}

fn estimate() -> impl Strategy<Value = Complex64> {
    (0.05f64..3.0, -PI..PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn params() -> impl Strategy<Value = ChannelParams> {
    (0.1f64..1000.0, 0.0f64..PI).prop_map(|(p, a)| ChannelParams::new(p, a).unwrap())
}

/// Relative gap between the best and runner-up of `scores` (larger is better).
fn gap(mut scores: Vec<f64>, scale: f64) -> f64 {
    if scores.len() < 2 {
        return f64::INFINITY;
    }
    scores.sort_by(|a, b| b.total_cmp(a));
    (scores[0] - scores[1]) / scale.max(f64::MIN_POSITIVE)
}

fn step1_gap(y: Complex64, h_hat: Complex64, c: &Constellation) -> f64 {
    let scores = (1..=c.k_subsets())
        .map(|k| angle_metric(y, h_hat, c.point(k, 1).value))
        .collect();
    gap(scores, y.norm() * h_hat.norm() * c.radius())
}

fn step2_gap(
    y: Complex64,
    h_hat: Complex64,
    c: &Constellation,
    d: usize,
    p: &ChannelParams,
) -> f64 {
    let s = h_hat * p.amplitude();
    let scores: Vec<f64> = (1..=c.n_per_subset())
        .map(|i| -(y - s * c.point(d, i).value).norm_sqr())
        .collect();
    let scale = y.norm_sqr() + (s * c.radius() * c.n_per_subset() as f64).norm_sqr();
    gap(scores, scale)
}

/// Both decisions of the two-step receiver are clear of ties.
fn robust(
    y: Complex64,
    h_hat: Complex64,
    c: &Constellation,
    p: &ChannelParams,
    reest: bool,
) -> bool {
    if step1_gap(y, h_hat, c) < MARGIN {
        return false;
    }
    let d = decode_subset(y, h_hat, c);
    let h_used = if reest && needs_reestimation(p.phase_bound(), c.n_per_subset()) {
        reestimate_channel(y, h_hat, c.point(d, 1).value)
    } else {
        h_hat
    };
    step2_gap(y, h_used, c, d, p) >= MARGIN
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn rotation_equivariance(
        c in shape(), y in complex(5.0), h_hat in estimate(), p in params(),
        psi in -PI..PI, reest in any::<bool>(),
    ) {
        let rot = Complex64::from_polar(1.0, psi);
        prop_assume!(robust(y, h_hat, &c, &p, reest));
        prop_assume!(robust(rot * y, rot * h_hat, &c, &p, reest));
        prop_assert_eq!(
            two_step_decode(y, h_hat, &c, &p, reest),
            two_step_decode(rot * y, rot * h_hat, &c, &p, reest)
        );
    }

    #[test]
    fn step1_positive_scaling_invariance(
        c in shape(), y in complex(5.0), h_hat in estimate(), s in 1e-3f64..1e3,
    ) {
        prop_assume!(step1_gap(y, h_hat, &c) >= MARGIN);
        let d = decode_subset(y, h_hat, &c);
        prop_assert_eq!(decode_subset(y * s, h_hat, &c), d);
        prop_assert_eq!(decode_subset(y, h_hat * s, &c), d);
    }

    #[test]
    fn phase_injection_equals_rotating_the_estimate(
        c in shape(), k in 1usize..=64, i in 1usize..=64,
        h in estimate(), w in complex(1.0), phi in -PI..PI, p in params(), reest in any::<bool>(),
    ) {
        let (k, i) = ((k - 1) % c.k_subsets() + 1, (i - 1) % c.n_per_subset() + 1);
        let draw = ChannelDraw::from_parts(h, w, phi);
        let explicit = h * Complex64::from_polar(1.0, phi);
        prop_assert!((draw.h_hat - explicit).norm() < 1e-12 * h.norm().max(1.0));

        let y = h * c.point(k, i).value * p.amplitude() + w;
        prop_assume!(robust(y, draw.h_hat, &c, &p, reest));
        prop_assume!(robust(y, explicit, &c, &p, reest));
        let undo = Complex64::from_polar(1.0, -phi);
        prop_assume!(robust(y * undo, h, &c, &p, reest));
        let injected = two_step_decode(y, draw.h_hat, &c, &p, reest);
        prop_assert_eq!(injected, two_step_decode(y, explicit, &c, &p, reest));
        // Equivalently, the observation rotated back by φ against the true h.
        prop_assert_eq!(injected, two_step_decode(y * undo, h, &c, &p, reest));
    }

    #[test]
    fn fast_path_matches_metric_argmax(c in shape(), y in complex(5.0), h_hat in estimate()) {
        prop_assume!(step1_gap(y, h_hat, &c) >= MARGIN);
        prop_assert_eq!(decode_subset_by_angle(y, h_hat, &c), decode_subset(y, h_hat, &c));
    }

    #[test]
    fn single_ring_equals_exhaustive_argmax(
        m_idx in 0usize..6, y in complex(5.0), h_hat in estimate(), p in params(), reest in any::<bool>(),
    ) {
        let m = [2usize, 4, 8, 16, 32, 64][m_idx];
        let c = build_psk_pam(m, m, NormMode::MeanPower).unwrap();
        prop_assume!(step1_gap(y, h_hat, &c) >= MARGIN);
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (idx, pt) in c.points().iter().enumerate() {
            let metric = angle_metric(y, h_hat, pt.value);
            if metric > best_metric {
                best_metric = metric;
                best = idx;
            }
        }
        let out = two_step_decode(y, h_hat, &c, &p, reest);
        prop_assert_eq!(out.point_index, best);
        prop_assert_eq!(out.amplitude_index, 1);
    }

    #[test]
    fn single_ray_is_one_dimensional_pam(
        n_idx in 0usize..6, y in complex(5.0), h_hat in estimate(), p in params(),
    ) {
        let m = [1usize, 2, 4, 8, 16, 32][n_idx];
        let c = build_psk_pam(m, 1, NormMode::MeanPower).unwrap();
        prop_assume!(robust(y, h_hat, &c, &p, false));
        // Project onto the ray through √P·ĥ and round to the nearest ring.
        let s = h_hat * p.amplitude();
        let along = (y * s.conj()).re / s.norm();
        let step = s.norm() * c.radius();
        let n = ((along / step).round() as i64).clamp(1, m as i64) as usize;
        let out = two_step_decode(y, h_hat, &c, &p, false);
        prop_assert_eq!(out.subset_index, 1);
        prop_assert_eq!(out.amplitude_index, n);
    }

    #[test]
    fn exact_ties_break_toward_the_lowest_index(
        c in shape(), y in complex(5.0), h_hat in estimate(), p in params(), reest in any::<bool>(),
    ) {
        let zero = Complex64::new(0.0, 0.0);
        // A zero estimate makes every metric and every distance equal.
        let out = two_step_decode(y, zero, &c, &p, reest);
        prop_assert_eq!((out.subset_index, out.amplitude_index, out.point_index), (1, 1, 0));
        prop_assert_eq!(coherent_min_distance_decode(y, zero, &c, &p), 0);
        // A zero observation ties every ray.
        prop_assert_eq!(decode_subset(zero, h_hat, &c), 1);
        // Decoding is a pure function of its inputs.
        prop_assert_eq!(two_step_decode(y, h_hat, &c, &p, reest), two_step_decode(y, h_hat, &c, &p, reest));
    }

    #[test]
    fn noiseless_aligned_observation_decodes_exactly(
        c in shape(), k in 1usize..=64, i in 1usize..=64, h in estimate(), p in params(),
    ) {
        let (k, i) = ((k - 1) % c.k_subsets() + 1, (i - 1) % c.n_per_subset() + 1);
        let y = h * c.point(k, i).value * p.amplitude();
        let out = two_step_decode(y, h, &c, &p, true);
        prop_assert_eq!((out.subset_index, out.amplitude_index), (k, i));
        prop_assert_eq!(coherent_min_distance_decode(y, h, &c, &p), c.point_index(k, i));
        prop_assert_eq!(decode_point(y, h, &c, k, &p), i);
    }
}
