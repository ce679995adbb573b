//! Flat Rayleigh fading with a phase-biased channel estimate.
//!
//! `y = √P·h·x + w` with `h, w ~ CN(0, 1)`; the receiver sees
//! `ĥ = |h|·e^{j(θ+φ)}` where `φ ~ U[−a, a]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier recorded in output metadata.
pub const GENERATOR_ID: &str =
    "chacha20 (rand_chacha 0.9); key=seed_from_u64(master_seed), stream=trial_index; normals=rand_distr StandardNormal";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("transmit power must be finite and non-negative (got {0})")]
    InvalidPower(f64),
    #[error("phase bound must lie in [0, π] (got {0})")]
    InvalidPhaseBound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    power_p: f64,
    phase_bound_a: f64,
}

impl ChannelParams {
    pub fn new(power_p: f64, phase_bound_a: f64) -> Result<Self, ChannelError> {
        if !power_p.is_finite() || power_p < 0.0 {
            return Err(ChannelError::InvalidPower(power_p));
        }
        if !(0.0..=PI).contains(&phase_bound_a) {
            return Err(ChannelError::InvalidPhaseBound(phase_bound_a));
        }
        Ok(ChannelParams {
            power_p,
            phase_bound_a,
        })
    }

    /// `P = 10^(snr_db/10)`.
    pub fn from_snr_db(snr_db: f64, phase_bound_a: f64) -> Result<Self, ChannelError> {
        Self::new(db_to_linear(snr_db), phase_bound_a)
    }

    pub fn power(&self) -> f64 {
        self.power_p
    }

    pub fn phase_bound(&self) -> f64 {
        self.phase_bound_a
    }

    pub fn amplitude(&self) -> f64 {
        self.power_p.sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    pub h: Complex64,
    /// `angle(h)`.
    pub theta: f64,
    pub phi: f64,
    pub w: Complex64,
    pub h_hat: Complex64,
}

impl ChannelDraw {
    /// Assemble a draw from its primitive parts; `h_hat` is `h` rotated by `phi`.
    pub fn from_parts(h: Complex64, w: Complex64, phi: f64) -> Self {
        let theta = h.arg();
        ChannelDraw {
            h,
            theta,
            phi,
            w,
            h_hat: Complex64::from_polar(h.norm(), wrap_angle(theta + phi)),
        }
    }
}

/// Per-experiment key from which every trial's stream is derived.
#[derive(Debug, Clone)]
pub struct StreamKey {
    seed: <ChaCha20Rng as SeedableRng>::Seed,
}

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        StreamKey {
            seed: ChaCha20Rng::seed_from_u64(master_seed).get_seed(),
        }
    }

    /// Independent stream for one trial. Depends only on `(master_seed, trial_index)`.
    pub fn stream(&self, trial_index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.seed);
        rng.set_stream(trial_index);
        rng
    }
}

/// Shorthand for `StreamKey::new(master_seed).stream(trial_index)`.
pub fn stream(master_seed: u64, trial_index: u64) -> ChaCha20Rng {
    StreamKey::new(master_seed).stream(trial_index)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws `h.re, h.im, w.re, w.im, φ` in that order.
pub fn draw_channel<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> ChannelDraw {
    let h = complex_normal(rng);
    let w = complex_normal(rng);
    let a = params.phase_bound_a;
    let u: f64 = rng.random();
    let phi = if a == 0.0 { 0.0 } else { a * (2.0 * u - 1.0) };
    ChannelDraw::from_parts(h, w, phi)
}

/// `√P·h·x + w`.
pub fn apply_channel(x: Complex64, draw: &ChannelDraw, params: &ChannelParams) -> Complex64 {
    draw.h * x * params.amplitude() + draw.w
}
