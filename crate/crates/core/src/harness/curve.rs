use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::analytic::{average_union_bound, dominant_terms, QuadratureSpec, SubsetScaling};
use crate::channel::ChannelParams;
use crate::constellation::Constellation;
use crate::design::ObjectiveMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// Symbol-averaged union bound.
    #[default]
    Union,
    /// Larger of the two nearest-neighbour terms.
    Dominant,
}

impl CurveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMode::Union => "union",
            CurveMode::Dominant => "dominant",
        }
    }
}

impl fmt::Display for CurveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "union" => Ok(CurveMode::Union),
            "dominant" => Ok(CurveMode::Dominant),
            other => Err(format!(
                "unknown curve mode `{other}` (expected union or dominant)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPoint {
    pub snr_db: f64,
    pub p_subset_dom: f64,
    pub p_pam_dom: f64,
    /// Union bound or dominant maximum, depending on the curve mode; in `[0, 1]`.
    pub p_total: f64,
    /// The union sum was clamped at 1 for some symbol.
    pub clamped: bool,
    /// `p_total ≥ 0.5`: the bound carries no useful information here.
    pub uninformative: bool,
}

/// One curve point. The dominant columns use the ray gain selected by
/// `objective`; the union bound uses `scaling`.
pub fn analytic_point(
    c: &Constellation,
    snr_db: f64,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    mode: CurveMode,
    objective: ObjectiveMode,
    scaling: SubsetScaling,
) -> Result<AnalyticPoint, HarnessError> {
    let dom = dominant_terms(c, params, quad, objective.scaling())?;
    let (p_total, clamped) = match mode {
        CurveMode::Union => {
            let u = average_union_bound(c, params, quad, scaling)?;
            (u.p_total, u.clamped)
        }
        CurveMode::Dominant => (dom.objective().min(1.0), false),
    };
    Ok(AnalyticPoint {
        snr_db,
        p_subset_dom: dom.p_subset_dominant,
        p_pam_dom: dom.p_pam_dominant,
        p_total,
        clamped,
        uninformative: p_total >= 0.5,
    })
}

pub fn run_analytic_curve(
    config: &ExperimentConfig,
    quad: &QuadratureSpec,
    mode: CurveMode,
    objective: ObjectiveMode,
    scaling: SubsetScaling,
) -> Result<Vec<AnalyticPoint>, HarnessError> {
    let c = config.validate()?;
    if !c.family().is_ring() {
        return Err(HarnessError::Config(
            "analytic curves need a psk-pam or psk constellation".into(),
        ));
    }
    config
        .snr_db
        .iter()
        .map(|&snr| {
            let params = ChannelParams::from_snr_db(snr, config.phase_bound)?;
            analytic_point(&c, snr, &params, quad, mode, objective, scaling)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_psk_pam, NormMode};

    #[test]
    fn zero_power_point_is_flagged() {
        let c = build_psk_pam(8, 4, NormMode::MeanPower).unwrap();
        let p = ChannelParams::new(0.0, 0.3).unwrap();
        let quad = QuadratureSpec::default();
        let pt = analytic_point(
            &c,
            f64::NEG_INFINITY,
            &p,
            &quad,
            CurveMode::Union,
            ObjectiveMode::Default,
            SubsetScaling::Derived,
        )
        .unwrap();
        assert!(pt.p_total <= 1.0 && pt.p_total >= 0.5);
        assert!(pt.clamped && pt.uninformative);
    }
}
