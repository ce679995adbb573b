//! Pairwise error probabilities and the union bound for ring constellations.
//!
//! Every quantity is averaged over Rayleigh fading (`|h|²` exponential with
//! unit mean) and, for ray decisions, over the uniform phase error
//! `φ ~ U[−a, a]`.
//!
//! The ray pairwise error for transmitted ring `i` and angular gap `Δ` is
//!
//! ```text
//! E_{|h|,φ} Q( √2 · |h| · g · √P · sin(φ + Δ/2) )
//! ```
//!
//! where the gain `g` depends on [`SubsetScaling`]. Working the angle metric
//! through directly gives `g = i·R`; the squared form `g = i·R²` and the
//! unscaled form `g = 1` are kept for reproducing the published design rule.
//! Ring pairwise errors use the exact closed form
//! `E[Q(κ|h|)] = ½(1 − κ/√(κ²+2))` with `κ = √P·|i−j|·R/√2`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelParams;
use crate::constellation::Constellation;
use crate::quadrature::{panel_breakpoints, GaussLegendre};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("pairwise error needs distinct indices (got i = j = {0})")]
    SameIndex(usize),
    #[error("{what}: quadrature did not converge (coarse {coarse:e}, fine {fine:e}, rel_tol {rel_tol:e})")]
    QuadNonConverged {
        what: &'static str,
        coarse: f64,
        fine: f64,
        rel_tol: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("analytic error terms need a ring constellation (got {0})")]
    UnsupportedFamily(String),
}

impl AnalyticError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticError::SameIndex(_) => "SAME_INDEX",
            AnalyticError::QuadNonConverged { .. } => "QUAD_NONCONVERGED",
            AnalyticError::InvalidArgument(_) => "INVALID_ARGUMENT",
            AnalyticError::InvalidQuadrature(_) => "INVALID_QUADRATURE",
            AnalyticError::UnsupportedFamily(_) => "UNSUPPORTED_FAMILY",
        }
    }
}

/// Nested quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Upper limit of the `|h|` integral.
    pub h_truncation: f64,
    /// Gauss–Legendre nodes per `|h|` panel (checked against twice as many).
    pub h_nodes: usize,
    /// Gauss–Legendre nodes per `φ` panel (checked against twice as many).
    pub phi_nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    /// `r_max = √(−ln 1e−14)`: the Rayleigh tail beyond it carries less than
    /// `1e−14` probability mass.
    fn default() -> Self {
        QuadratureSpec {
            h_truncation: (-(1e-14f64).ln()).sqrt(),
            h_nodes: 32,
            phi_nodes: 32,
            rel_tol: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        if self.h_truncation.is_nan() || self.h_truncation < 5.0 {
            return Err(AnalyticError::InvalidQuadrature(format!(
                "h_truncation must be >= 5 (got {})",
                self.h_truncation
            )));
        }
        if self.h_nodes < 16 || self.phi_nodes < 16 {
            return Err(AnalyticError::InvalidQuadrature(format!(
                "node counts must be >= 16 (got h_nodes = {}, phi_nodes = {})",
                self.h_nodes, self.phi_nodes
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(AnalyticError::InvalidQuadrature(format!(
                "rel_tol must lie in (0, 1e-6] (got {})",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Gain applied to `|h|·√P·√2·sin(φ+Δ/2)` in the ray pairwise error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetScaling {
    /// `i·R`, from the angle metric's signal gap over its noise deviation.
    #[default]
    Derived,
    /// `i·R²`.
    Printed,
    /// `1`.
    Unscaled,
}

impl SubsetScaling {
    pub fn gain(self, i: usize, radius: f64) -> f64 {
        match self {
            SubsetScaling::Derived => i as f64 * radius,
            SubsetScaling::Printed => i as f64 * radius * radius,
            SubsetScaling::Unscaled => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubsetScaling::Derived => "derived",
            SubsetScaling::Printed => "printed",
            SubsetScaling::Unscaled => "unscaled",
        }
    }
}

impl fmt::Display for SubsetScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubsetScaling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "derived" => Ok(SubsetScaling::Derived),
            "printed" => Ok(SubsetScaling::Printed),
            "unscaled" => Ok(SubsetScaling::Unscaled),
            other => Err(format!(
                "unknown subset scaling `{other}` (expected derived, printed or unscaled)"
            )),
        }
    }
}

/// Standard Gaussian tail `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `E[Q(κ|h|)]` for Rayleigh `|h|` with `E|h|² = 1`, i.e. `½(1 − κ/√(κ²+2))`.
///
/// Evaluated without cancellation for large `κ`; negative `κ` is accepted
/// and gives `1 − E[Q(|κ||h|)]`.
pub fn rayleigh_avg_q(kappa: f64) -> f64 {
    if kappa < 0.0 {
        return 1.0 - rayleigh_avg_q(-kappa);
    }
    if kappa == 0.0 {
        return 0.5;
    }
    let root = (kappa * kappa + 2.0).sqrt();
    1.0 / (root * (root + kappa))
}

/// `∫_0^{r_max} Q(κr)·2r·e^{−r²} dr` by composite Gauss–Legendre, with panel
/// edges clustered where `Q(κr)` falls off.
pub fn rayleigh_avg_q_quadrature(kappa: f64, quad: &QuadratureSpec) -> Result<f64, AnalyticError> {
    quad.validate()?;
    let coarse = GaussLegendre::new(quad.h_nodes);
    let fine = GaussLegendre::new(2 * quad.h_nodes);
    rayleigh_inner(kappa, quad, &coarse, &fine)
}

fn rayleigh_inner(
    kappa: f64,
    quad: &QuadratureSpec,
    coarse: &GaussLegendre,
    fine: &GaussLegendre,
) -> Result<f64, AnalyticError> {
    let r_max = quad.h_truncation;
    let scale = kappa.abs();
    let mut interior: Vec<f64> = (1..r_max.ceil() as usize).map(|r| r as f64).collect();
    if scale > 0.0 {
        interior.extend([0.25, 0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|s| s / scale));
    }
    let breaks = panel_breakpoints(0.0, r_max, interior);
    let integrand = |r: f64| q_function(kappa * r) * 2.0 * r * (-r * r).exp();
    let lo = coarse.integrate_panels(&breaks, integrand);
    let hi = fine.integrate_panels(&breaks, integrand);
    check_converged("rayleigh average", lo, hi, quad.rel_tol)
}

fn check_converged(
    what: &'static str,
    coarse: f64,
    fine: f64,
    rel_tol: f64,
) -> Result<f64, AnalyticError> {
    // Probabilities below 1e-16 are indistinguishable from zero here.
    if (fine - coarse).abs() <= rel_tol * fine.abs() + 1e-16 {
        Ok(fine)
    } else {
        Err(AnalyticError::QuadNonConverged {
            what,
            coarse,
            fine,
            rel_tol,
        })
    }
}

fn require_ring(c: &Constellation) -> Result<(), AnalyticError> {
    if c.family().is_ring() {
        Ok(())
    } else {
        Err(AnalyticError::UnsupportedFamily(c.family().to_string()))
    }
}

fn check_ring_index(name: &str, idx: usize, n: usize) -> Result<(), AnalyticError> {
    if (1..=n).contains(&idx) {
        Ok(())
    } else {
        Err(AnalyticError::InvalidArgument(format!(
            "{name} = {idx} outside 1..={n}"
        )))
    }
}

/// `P_PAM^{i→j} = E[Q(√P·|i−j|·R/√2 · |h|)]`.
pub fn p_pam_pair(
    i: usize,
    j: usize,
    c: &Constellation,
    params: &ChannelParams,
) -> Result<f64, AnalyticError> {
    require_ring(c)?;
    if i == j {
        return Err(AnalyticError::SameIndex(i));
    }
    check_ring_index("i", i, c.n_per_subset())?;
    check_ring_index("j", j, c.n_per_subset())?;
    Ok(pam_term(i.abs_diff(j), c.radius(), params))
}

fn pam_term(gap: usize, radius: f64, params: &ChannelParams) -> f64 {
    rayleigh_avg_q(params.amplitude() * gap as f64 * radius / SQRT_2)
}

/// Ray pairwise error `P_Subset^{k→u}` for ring `i` and gap `delta_angle`,
/// with the [`SubsetScaling::Derived`] gain.
pub fn p_subset_pair(
    i: usize,
    delta_angle: f64,
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    p_subset_pair_scaled(i, delta_angle, c, params, quad, SubsetScaling::Derived)
}

pub fn p_subset_pair_scaled(
    i: usize,
    delta_angle: f64,
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    scaling: SubsetScaling,
) -> Result<f64, AnalyticError> {
    require_ring(c)?;
    check_ring_index("i", i, c.n_per_subset())?;
    if !(delta_angle > 0.0 && delta_angle < 2.0 * PI) {
        return Err(AnalyticError::InvalidArgument(format!(
            "delta_angle = {delta_angle} outside (0, 2π)"
        )));
    }
    let gain = scaling.gain(i, c.radius());
    subset_term(
        SQRT_2 * gain * params.amplitude(),
        delta_angle,
        params.phase_bound(),
        quad,
    )
}

/// `(1/2a) ∫_{−a}^{a} E_h[Q(scale·|h|·sin(φ + Δ/2))] dφ`, or the `φ = 0`
/// value when `a = 0`.
fn subset_term(
    scale: f64,
    delta: f64,
    a: f64,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    quad.validate()?;
    if scale == 0.0 {
        return Ok(0.5);
    }
    let h_coarse = GaussLegendre::new(quad.h_nodes);
    let h_fine = GaussLegendre::new(2 * quad.h_nodes);
    let inner =
        |phi: f64| rayleigh_inner(scale * (phi + 0.5 * delta).sin(), quad, &h_coarse, &h_fine);
    if a == 0.0 {
        return inner(0.0);
    }

    // The integrand switches between ~0 and ~1 around each zero of
    // sin(φ + Δ/2), over a width of order 1/scale.
    let mut interior: Vec<f64> = (1..4).map(|q| -a + 2.0 * a * q as f64 / 4.0).collect();
    let first = ((-a + 0.5 * delta) / PI).ceil() as i64;
    let last = ((a + 0.5 * delta) / PI).floor() as i64;
    for m in first..=last {
        let zero = m as f64 * PI - 0.5 * delta;
        interior.push(zero);
        for s in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            interior.push(zero - s / scale);
            interior.push(zero + s / scale);
        }
    }
    let breaks = panel_breakpoints(-a, a, interior);

    let outer = |rule: &GaussLegendre| -> Result<f64, AnalyticError> {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &wt) in rule.nodes().iter().zip(rule.weights()) {
                total += wt * half * inner(mid + half * x)?;
            }
        }
        Ok(total / (2.0 * a))
    };
    let lo = outer(&GaussLegendre::new(quad.phi_nodes))?;
    let hi = outer(&GaussLegendre::new(2 * quad.phi_nodes))?;
    check_converged("phase average", lo, hi, quad.rel_tol).map(|p| p.clamp(0.0, 1.0))
}

/// Union-bound terms for one transmitted point `x_{ik}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub i: usize,
    pub k: usize,
    /// `P_Subset^{k→u}` at index `u−1`; zero at `u = k`.
    pub p_subset_pairs: Vec<f64>,
    /// `P_PAM^{i→j}` at index `j−1`; zero at `j = i`.
    pub p_pam_pairs: Vec<f64>,
    pub subset_sum: f64,
    pub pam_sum: f64,
    /// Union sum before clamping.
    pub raw_total: f64,
    /// `min(raw_total, 1)`.
    pub p_total: f64,
    pub clamped: bool,
    /// `P_Subset^{k→k+1}` (0 when `K = 1`).
    pub p_subset_dominant: f64,
    /// `P_PAM^{i→i±1}` (0 when `N = 1`).
    pub p_pam_dominant: f64,
}

/// Union bound for `x_{ik}` with the [`SubsetScaling::Derived`] gain.
pub fn p_total_union(
    i: usize,
    k: usize,
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
) -> Result<ErrorBreakdown, AnalyticError> {
    p_total_union_scaled(i, k, c, params, quad, SubsetScaling::Derived)
}

pub fn p_total_union_scaled(
    i: usize,
    k: usize,
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    scaling: SubsetScaling,
) -> Result<ErrorBreakdown, AnalyticError> {
    require_ring(c)?;
    check_ring_index("i", i, c.n_per_subset())?;
    check_ring_index("k", k, c.k_subsets())?;
    let k_subsets = c.k_subsets();
    let n = c.n_per_subset();

    let mut p_subset_pairs = vec![0.0; k_subsets];
    // The pairwise term depends on u only through the gap (u − k) mod K.
    let mut by_gap = vec![None; k_subsets];
    for u in (1..=k_subsets).filter(|&u| u != k) {
        let gap = (u + k_subsets - k) % k_subsets;
        let p = match by_gap[gap] {
            Some(p) => p,
            None => {
                let delta = 2.0 * PI * gap as f64 / k_subsets as f64;
                let p = p_subset_pair_scaled(i, delta, c, params, quad, scaling)?;
                by_gap[gap] = Some(p);
                p
            }
        };
        p_subset_pairs[u - 1] = p;
    }
    let p_pam_pairs: Vec<f64> = (1..=n)
        .map(|j| {
            if j == i {
                0.0
            } else {
                pam_term(i.abs_diff(j), c.radius(), params)
            }
        })
        .collect();

    let subset_sum: f64 = p_subset_pairs.iter().sum();
    let pam_sum: f64 = p_pam_pairs.iter().sum();
    let raw_total = subset_sum + pam_sum;
    let p_subset_dominant = if k_subsets > 1 {
        p_subset_pairs[k % k_subsets]
    } else {
        0.0
    };
    let p_pam_dominant = if n > 1 {
        pam_term(1, c.radius(), params)
    } else {
        0.0
    };
    Ok(ErrorBreakdown {
        i,
        k,
        p_subset_pairs,
        p_pam_pairs,
        subset_sum,
        pam_sum,
        raw_total,
        p_total: raw_total.min(1.0),
        clamped: raw_total > 1.0,
        p_subset_dominant,
        p_pam_dominant,
    })
}

/// Union bound averaged over equiprobable symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageUnionBound {
    /// Mean over rings of the per-point clamped union bound.
    pub p_total: f64,
    pub subset_part: f64,
    pub pam_part: f64,
    /// Some per-point union sum exceeded 1.
    pub clamped: bool,
}

/// By rotational symmetry every ray gives the same bound, so only `k = 1`
/// is evaluated.
pub fn average_union_bound(
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    scaling: SubsetScaling,
) -> Result<AverageUnionBound, AnalyticError> {
    require_ring(c)?;
    let n = c.n_per_subset() as f64;
    let mut out = AverageUnionBound {
        p_total: 0.0,
        subset_part: 0.0,
        pam_part: 0.0,
        clamped: false,
    };
    for i in 1..=c.n_per_subset() {
        let b = p_total_union_scaled(i, 1, c, params, quad, scaling)?;
        out.p_total += b.p_total / n;
        out.subset_part += b.subset_sum / n;
        out.pam_part += b.pam_sum / n;
        out.clamped |= b.clamped;
    }
    Ok(out)
}

/// Nearest-neighbour error terms that drive the design rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantTerms {
    pub p_subset_dominant: f64,
    pub p_pam_dominant: f64,
    /// False when `K = 1` (no neighbouring ray); the term is reported as 0.
    pub subset_defined: bool,
    /// False when `N = 1` (no neighbouring ring); the term is reported as 0.
    pub pam_defined: bool,
}

impl DominantTerms {
    pub fn objective(&self) -> f64 {
        self.p_subset_dominant.max(self.p_pam_dominant)
    }
}

/// `P_PAM^{i→i+1}` and `P_Subset^{k→k+1}` at the worst-case ring `i = 1`.
///
/// The ray term uses the `i·R²` gain, or no gain at all when
/// `paper_exact_eq25` is set.
pub fn dominant_objective(
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    paper_exact_eq25: bool,
) -> Result<DominantTerms, AnalyticError> {
    let scaling = if paper_exact_eq25 {
        SubsetScaling::Unscaled
    } else {
        SubsetScaling::Printed
    };
    dominant_terms(c, params, quad, scaling)
}

pub fn dominant_terms(
    c: &Constellation,
    params: &ChannelParams,
    quad: &QuadratureSpec,
    scaling: SubsetScaling,
) -> Result<DominantTerms, AnalyticError> {
    require_ring(c)?;
    let subset_defined = c.k_subsets() > 1;
    let pam_defined = c.n_per_subset() > 1;
    let p_subset_dominant = if subset_defined {
        p_subset_pair_scaled(1, c.delta(), c, params, quad, scaling)?
    } else {
        0.0
    };
    let p_pam_dominant = if pam_defined {
        pam_term(1, c.radius(), params)
    } else {
        0.0
    };
    Ok(DominantTerms {
        p_subset_dominant,
        p_pam_dominant,
        subset_defined,
        pam_defined,
    })
}
