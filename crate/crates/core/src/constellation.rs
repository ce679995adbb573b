//! Constellation construction.
//!
//! A PSK-PAM constellation is made of `K` rays ("subsets") at angles
//! `α_k = 2π(k−1)/K`, each carrying `N` equally spaced points at radii
//! `R, 2R, …, NR`. Plain PSK is the `N = 1` special case. QAM is provided as
//! the coherent baseline.
//!
//! Indices `k` and `i` are 1-based everywhere in this module; `points` is
//! ordered lexicographically by `(k, i)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstellationError {
    #[error("constellation size must be positive (got m = {0})")]
    Zero(usize),
    #[error("subset count k = {k} does not divide m = {m}")]
    NonDivisor { m: usize, k: usize },
    #[error("unsupported QAM size m = {0} (supported: 4, 8, 16, 64)")]
    UnsupportedM(usize),
}

impl ConstellationError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ConstellationError::Zero(_) => "ZERO",
            ConstellationError::NonDivisor { .. } => "NON_DIVISOR",
            ConstellationError::UnsupportedM(_) => "UNSUPPORTED_M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PskPam,
    Qam,
    Psk,
}

impl Family {
    /// Ring-structured families are decoded with the two-step receiver.
    pub fn is_ring(self) -> bool {
        matches!(self, Family::PskPam | Family::Psk)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::PskPam => "psk-pam",
            Family::Qam => "qam",
            Family::Psk => "psk",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psk-pam" => Ok(Family::PskPam),
            "qam" => Ok(Family::Qam),
            "psk" => Ok(Family::Psk),
            other => Err(format!(
                "unknown family `{other}` (expected psk-pam, qam or psk)"
            )),
        }
    }
}

/// Power normalization applied at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum NormMode {
    /// `(1/M) Σ |x|² = 1`.
    #[default]
    #[serde(rename = "mean")]
    MeanPower,
    /// `Σ |x|² = 1`, the sum-normalized ring spacing
    /// `R = sqrt(6 / (M (M/K + 1)(2M/K + 1)))`.
    #[serde(rename = "paper-sum")]
    PaperSum,
}

impl NormMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::MeanPower => "mean",
            NormMode::PaperSum => "paper-sum",
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(NormMode::MeanPower),
            "paper-sum" => Ok(NormMode::PaperSum),
            other => Err(format!(
                "unknown norm mode `{other}` (expected mean or paper-sum)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub value: Complex64,
    /// Ray index `k` in `1..=K` (row index for QAM).
    pub subset_index: usize,
    /// Ring index `i` in `1..=N` (column index for QAM).
    pub amplitude_index: usize,
}

/// An immutable constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    family: Family,
    k_subsets: usize,
    n_per_subset: usize,
    radius: f64,
    norm_mode: NormMode,
    points: Vec<ConstellationPoint>,
}

/// Angle of ray `k` (1-based), `α_1 = 0`.
pub fn subset_angle(k: usize, k_subsets: usize) -> f64 {
    2.0 * PI * (k - 1) as f64 / k_subsets as f64
}

/// Ring spacing that gives unit mean power for `N` rings.
pub fn mean_power_radius(n_per_subset: usize) -> f64 {
    let n = n_per_subset as f64;
    (6.0 / ((n + 1.0) * (2.0 * n + 1.0))).sqrt()
}

/// Ring spacing that gives unit total power, `sqrt(6 / (M (M/K+1)(2M/K+1)))`.
pub fn sum_power_radius(m: usize, k_subsets: usize) -> f64 {
    let m_f = m as f64;
    let n = m_f / k_subsets as f64;
    (6.0 / (m_f * (n + 1.0) * (2.0 * n + 1.0))).sqrt()
}

pub fn build_psk_pam(
    m: usize,
    k_subsets: usize,
    norm_mode: NormMode,
) -> Result<Constellation, ConstellationError> {
    build_rings(Family::PskPam, m, k_subsets, norm_mode)
}

/// `M`-PSK; identical point set to `build_psk_pam(m, m, norm_mode)`.
pub fn build_psk(m: usize, norm_mode: NormMode) -> Result<Constellation, ConstellationError> {
    if m < 2 {
        return Err(ConstellationError::Zero(m));
    }
    build_rings(Family::Psk, m, m, norm_mode)
}

fn build_rings(
    family: Family,
    m: usize,
    k_subsets: usize,
    norm_mode: NormMode,
) -> Result<Constellation, ConstellationError> {
    if m == 0 {
        return Err(ConstellationError::Zero(m));
    }
    if k_subsets == 0 || !m.is_multiple_of(k_subsets) {
        return Err(ConstellationError::NonDivisor { m, k: k_subsets });
    }
    let n_per_subset = m / k_subsets;
    let radius = match norm_mode {
        NormMode::MeanPower => mean_power_radius(n_per_subset),
        NormMode::PaperSum => sum_power_radius(m, k_subsets),
    };
    let mut points = Vec::with_capacity(m);
    for k in 1..=k_subsets {
        let alpha = subset_angle(k, k_subsets);
        let dir = Complex64::from_polar(1.0, alpha);
        for i in 1..=n_per_subset {
            points.push(ConstellationPoint {
                value: dir * (i as f64 * radius),
                subset_index: k,
                amplitude_index: i,
            });
        }
    }
    Ok(Constellation {
        family,
        k_subsets,
        n_per_subset,
        radius,
        norm_mode,
        points,
    })
}

/// Rectangular QAM on the odd-integer grid.
///
/// `m = 8` is the 4×2 grid `{±1,±3} × {±1}`; the other sizes are square.
/// Points are ordered row-major from the bottom-left corner: the subset index
/// is the row (imaginary level, ascending) and the amplitude index is the
/// column (real level, ascending). `radius` holds the grid scale factor.
pub fn build_qam(m: usize, norm_mode: NormMode) -> Result<Constellation, ConstellationError> {
    let (cols, rows) = match m {
        4 => (2, 2),
        8 => (4, 2),
        16 => (4, 4),
        64 => (8, 8),
        _ => return Err(ConstellationError::UnsupportedM(m)),
    };
    let level = |idx: usize, count: usize| (2 * idx) as f64 - (count - 1) as f64;
    let sum_sq: f64 = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| level(c, cols).powi(2) + level(r, rows).powi(2))
        .sum();
    let scale = match norm_mode {
        NormMode::MeanPower => (m as f64 / sum_sq).sqrt(),
        NormMode::PaperSum => (1.0 / sum_sq).sqrt(),
    };
    let points = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| ConstellationPoint {
            value: Complex64::new(level(c, cols) * scale, level(r, rows) * scale),
            subset_index: r + 1,
            amplitude_index: c + 1,
        })
        .collect();
    Ok(Constellation {
        family: Family::Qam,
        k_subsets: rows,
        n_per_subset: cols,
        radius: scale,
        norm_mode,
        points,
    })
}

/// Dispatch on family. `k_subsets` is only consulted for PSK-PAM.
pub fn build(
    family: Family,
    m: usize,
    k_subsets: Option<usize>,
    norm_mode: NormMode,
) -> Result<Constellation, ConstellationError> {
    match family {
        Family::PskPam => build_psk_pam(m, k_subsets.unwrap_or(m), norm_mode),
        Family::Psk => build_psk(m, norm_mode),
        Family::Qam => build_qam(m, norm_mode),
    }
}

pub fn mean_power(c: &Constellation) -> f64 {
    mean_power_of(c.points.iter().map(|p| p.value))
}

pub(crate) fn mean_power_of(values: impl ExactSizeIterator<Item = Complex64>) -> f64 {
    let m = values.len();
    if m == 0 {
        return 0.0;
    }
    values.map(|v| v.norm_sqr()).sum::<f64>() / m as f64
}

impl Constellation {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn k_subsets(&self) -> usize {
        self.k_subsets
    }

    pub fn n_per_subset(&self) -> usize {
        self.n_per_subset
    }

    /// Ring spacing `R` (grid scale for QAM).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm_mode
    }

    pub fn points(&self) -> &[ConstellationPoint] {
        &self.points
    }

    /// Angular separation between neighbouring rays, `2π/K`.
    pub fn delta(&self) -> f64 {
        2.0 * PI / self.k_subsets as f64
    }

    /// Position of `x_{ik}` in `points`.
    pub fn point_index(&self, k: usize, i: usize) -> usize {
        debug_assert!((1..=self.k_subsets).contains(&k) && (1..=self.n_per_subset).contains(&i));
        (k - 1) * self.n_per_subset + (i - 1)
    }

    pub fn point(&self, k: usize, i: usize) -> &ConstellationPoint {
        &self.points[self.point_index(k, i)]
    }

    /// Short label such as `(4,2)`, `8-QAM` or `8-PSK`.
    pub fn label(&self) -> String {
        match self.family {
            Family::PskPam => format!("({},{})", self.k_subsets, self.n_per_subset),
            Family::Qam => format!("{}-QAM", self.m()),
            Family::Psk => format!("{}-PSK", self.m()),
        }
    }

    /// One-line geometry note for output metadata.
    pub fn geometry_note(&self) -> String {
        match self.family {
            Family::Qam if self.m() == 8 => "8-QAM is the 4x2 rectangular grid {±1,±3}x{±1}".into(),
            Family::Qam => format!("{}-QAM is the square odd-integer grid", self.m()),
            _ => format!(
                "K={} rays at 2π(k−1)/K, N={} rings at radii i·R, R={}",
                self.k_subsets, self.n_per_subset, self.radius
            ),
        }
    }
}
