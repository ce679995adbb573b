//! Min-max choice of the ray/ring split `(K, N)` for a fixed `M = K·N`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    average_union_bound, dominant_terms, AnalyticError, QuadratureSpec, SubsetScaling,
};
use crate::channel::ChannelParams;
use crate::constellation::{build_psk_pam, ConstellationError, NormMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("design needs m >= 2 (got {0})")]
    TooSmall(usize),
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error("every candidate failed to evaluate; first failure: {0}")]
    NoCandidate(AnalyticError),
}

impl DesignError {
    pub fn code(&self) -> &'static str {
        match self {
            DesignError::TooSmall(_) => "ZERO",
            DesignError::Constellation(e) => e.code(),
            DesignError::NoCandidate(e) => e.code(),
        }
    }
}

/// Which ray term enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveMode {
    /// Ray term with the `R²` gain at ring 1.
    #[default]
    Default,
    /// Ray term without any `R` gain.
    PaperExactEq25,
    /// Ray term with the `R` gain at ring 1.
    Derived,
}

impl ObjectiveMode {
    pub fn scaling(self) -> SubsetScaling {
        match self {
            ObjectiveMode::Default => SubsetScaling::Printed,
            ObjectiveMode::PaperExactEq25 => SubsetScaling::Unscaled,
            ObjectiveMode::Derived => SubsetScaling::Derived,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveMode::Default => "default",
            ObjectiveMode::PaperExactEq25 => "paper-exact-eq25",
            ObjectiveMode::Derived => "derived",
        }
    }
}

impl fmt::Display for ObjectiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(ObjectiveMode::Default),
            "paper-exact-eq25" => Ok(ObjectiveMode::PaperExactEq25),
            "derived" => Ok(ObjectiveMode::Derived),
            other => Err(format!(
                "unknown objective `{other}` (expected default, paper-exact-eq25 or derived)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DesignOptions {
    pub objective_mode: ObjectiveMode,
    /// Rank by the full symbol-averaged union bound instead of the
    /// nearest-neighbour terms.
    pub full_union: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub k: usize,
    pub n: usize,
    pub p_subset_dominant: f64,
    pub p_pam_dominant: f64,
    /// `max` of the two dominant terms, or the union bound with `full_union`.
    pub objective: f64,
    /// Quadrature failure that excluded this candidate from the ranking.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub m: usize,
    pub phase_bound_a: f64,
    pub power_p: f64,
    pub norm_mode: NormMode,
    pub objective_mode: ObjectiveMode,
    pub full_union: bool,
    pub candidates: Vec<Candidate>,
    pub best: (usize, usize),
}

impl DesignReport {
    pub fn best_candidate(&self) -> &Candidate {
        self.candidates
            .iter()
            .find(|c| (c.k, c.n) == self.best)
            .expect("best is always one of the candidates")
    }
}

/// Divisor pairs `(K, M/K)` in increasing `K`.
pub fn enumerate_factorizations(m: usize) -> Vec<(usize, usize)> {
    (1..=m)
        .filter(|&k| m.is_multiple_of(k))
        .map(|k| (k, m / k))
        .collect()
}

pub fn optimize_kn(
    m: usize,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    norm_mode: NormMode,
    options: DesignOptions,
) -> Result<DesignReport, DesignError> {
    if m < 2 {
        return Err(DesignError::TooSmall(m));
    }
    let evaluated: Vec<Result<Candidate, AnalyticError>> = enumerate_factorizations(m)
        .into_par_iter()
        .map(|(k, n)| {
            let c = build_psk_pam(m, k, norm_mode).expect("k divides m");
            let dom = dominant_terms(&c, params, quad, options.objective_mode.scaling())?;
            let objective = if options.full_union {
                average_union_bound(&c, params, quad, SubsetScaling::Derived)?.p_total
            } else {
                dom.objective()
            };
            Ok(Candidate {
                k,
                n,
                p_subset_dominant: dom.p_subset_dominant,
                p_pam_dominant: dom.p_pam_dominant,
                objective,
                failure: None,
            })
        })
        .collect();

    let mut first_failure = None;
    let candidates: Vec<Candidate> = enumerate_factorizations(m)
        .into_iter()
        .zip(evaluated)
        .map(|((k, n), r)| match r {
            Ok(c) => c,
            Err(e) => {
                let msg = e.to_string();
                first_failure.get_or_insert(e);
                Candidate {
                    k,
                    n,
                    p_subset_dominant: f64::NAN,
                    p_pam_dominant: f64::NAN,
                    objective: f64::NAN,
                    failure: Some(msg),
                }
            }
        })
        .collect();

    // Ties go to the larger K.
    let best = candidates
        .iter()
        .filter(|c| c.failure.is_none())
        .fold(None::<&Candidate>, |acc, c| match acc {
            Some(b) if b.objective < c.objective => Some(b),
            _ => Some(c),
        })
        .map(|c| (c.k, c.n));
    let best = match best {
        Some(b) => b,
        None => {
            return Err(DesignError::NoCandidate(
                first_failure.expect("a failure was recorded"),
            ))
        }
    };

    Ok(DesignReport {
        m,
        phase_bound_a: params.phase_bound(),
        power_p: params.power(),
        norm_mode,
        objective_mode: options.objective_mode,
        full_union: options.full_union,
        candidates,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn factorizations() {
        assert_eq!(
            enumerate_factorizations(8),
            vec![(1, 8), (2, 4), (4, 2), (8, 1)]
        );
        assert_eq!(
            enumerate_factorizations(16),
            vec![(1, 16), (2, 8), (4, 4), (8, 2), (16, 1)]
        );
        assert_eq!(enumerate_factorizations(7), vec![(1, 7), (7, 1)]);
        assert_eq!(enumerate_factorizations(1), vec![(1, 1)]);
    }

    #[test]
    fn rejects_tiny_m() {
        let p = ChannelParams::new(100.0, 0.1).unwrap();
        let r = optimize_kn(
            1,
            &p,
            &QuadratureSpec::default(),
            NormMode::MeanPower,
            DesignOptions::default(),
        );
        assert_eq!(r.unwrap_err(), DesignError::TooSmall(1));
    }

    #[test]
    fn zero_power_ties_go_to_largest_k() {
        // Every defined term is 1/2 at P = 0.
        let p = ChannelParams::new(0.0, 0.2).unwrap();
        let r = optimize_kn(
            8,
            &p,
            &QuadratureSpec::default(),
            NormMode::MeanPower,
            DesignOptions::default(),
        )
        .unwrap();
        assert!(r.candidates.iter().all(|c| c.objective == 0.5));
        assert_eq!(r.best, (8, 1));
    }

    #[test]
    fn report_records_inputs() {
        let p = ChannelParams::new(100.0, PI / 8.0).unwrap();
        let opts = DesignOptions {
            objective_mode: ObjectiveMode::PaperExactEq25,
            full_union: false,
        };
        let r = optimize_kn(8, &p, &QuadratureSpec::default(), NormMode::MeanPower, opts).unwrap();
        assert_eq!(r.m, 8);
        assert_eq!(r.power_p, 100.0);
        assert_eq!(r.objective_mode, ObjectiveMode::PaperExactEq25);
        assert_eq!(r.candidates.len(), 4);
        let best = r.best_candidate();
        assert!(r.candidates.iter().all(|c| c.objective >= best.objective));
    }
}
