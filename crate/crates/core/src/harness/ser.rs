use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Receiver};
use super::HarnessError;
use crate::channel::{apply_channel, draw_channel, ChannelParams, StreamKey};
use crate::constellation::Constellation;
use crate::decoder::{coherent_min_distance_decode, two_step_decode};

const BATCH: u64 = 4096;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerEstimate {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl SerEstimate {
    pub fn new(snr_db: f64, trials: u64, errors: u64) -> Self {
        let (ci95_low, ci95_high) = wilson_interval(errors, trials, Z95);
        SerEstimate {
            snr_db,
            trials,
            errors,
            ser: errors as f64 / trials as f64,
            ci95_low,
            ci95_high,
        }
    }

    /// Binomial standard error `√(p(1−p)/n)`.
    pub fn std_error(&self) -> f64 {
        (self.ser * (1.0 - self.ser) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = (centre - half).clamp(0.0, 1.0).min(p);
    let high = (centre + half).clamp(0.0, 1.0).max(p);
    (low, high)
}

/// A validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    constellation: Constellation,
    receiver: Receiver,
    key: StreamKey,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, HarnessError> {
        let constellation = config.validate()?;
        let receiver = config.effective_receiver();
        let key = StreamKey::new(config.master_seed);
        Ok(Experiment {
            config,
            constellation,
            receiver,
            key,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn receiver(&self) -> Receiver {
        self.receiver
    }

    /// Whether trial `t` is decoded wrongly.
    fn trial_error(&self, params: &ChannelParams, trial: u64) -> bool {
        let c = &self.constellation;
        let mut rng = self.key.stream(trial);
        let sent = rng.random_range(0..c.m());
        let draw = draw_channel(params, &mut rng);
        let y = apply_channel(c.points()[sent].value, &draw, params);
        let decoded = match self.receiver {
            Receiver::Coherent => coherent_min_distance_decode(y, draw.h_hat, c, params),
            _ => {
                two_step_decode(
                    y,
                    draw.h_hat,
                    c,
                    params,
                    self.config.decoder.allow_reestimate,
                )
                .point_index
            }
        };
        decoded != sent
    }

    /// SER at one SNR using trial indices `first_trial .. first_trial + trials_per_point`.
    pub fn run_point_at(&self, snr_db: f64, first_trial: u64) -> Result<SerEstimate, HarnessError> {
        let params = ChannelParams::from_snr_db(snr_db, self.config.phase_bound)?;
        let trials = self.config.trials_per_point;
        let batches = trials.div_ceil(BATCH);
        let errors: u64 = (0..batches)
            .into_par_iter()
            .map(|b| {
                let lo = first_trial + b * BATCH;
                let hi = first_trial + ((b + 1) * BATCH).min(trials);
                (lo..hi).filter(|&t| self.trial_error(&params, t)).count() as u64
            })
            .sum();
        Ok(SerEstimate::new(snr_db, trials, errors))
    }

    pub fn run_point(&self, snr_db: f64) -> Result<SerEstimate, HarnessError> {
        self.run_point_at(snr_db, 0)
    }

    /// One estimate per grid entry; point `p` uses trials `p·T .. (p+1)·T`.
    pub fn run_sweep(&self) -> Result<Vec<SerEstimate>, HarnessError> {
        let t = self.config.trials_per_point;
        self.config
            .snr_db
            .iter()
            .enumerate()
            .map(|(p, &snr)| self.run_point_at(snr, p as u64 * t))
            .collect()
    }
}

pub fn run_ser_point(config: &ExperimentConfig, snr_db: f64) -> Result<SerEstimate, HarnessError> {
    Experiment::new(config.clone())?.run_point(snr_db)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SerEstimate>, HarnessError> {
    Experiment::new(config.clone())?.run_sweep()
}
