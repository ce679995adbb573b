//! Experiment harness: Monte Carlo SER sweeps, analytic curves, CSV/SVG
//! output and the bundled figure configurations.

mod config;
mod curve;
mod figures;
mod output;
mod plot;
mod ser;

use std::path::PathBuf;

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::channel::ChannelError;
use crate::constellation::ConstellationError;

pub use config::{
    parse_snr_grid, ConstellationSpec, DecoderOptions, ExperimentConfig, OutputPaths, Receiver,
};
pub use curve::{analytic_point, run_analytic_curve, AnalyticPoint, CurveMode};
pub use figures::{
    bundled_figure, reproduce, CurveKind, FigureConfig, FigureOutput, SeriesConfig, FIGURES,
};
pub use output::{
    analytic_metadata, config_hash, format_analytic_csv, format_constellation_csv,
    format_design_csv, format_ser_csv, read_curve_csv, ser_metadata, write_file, RunMetadata,
    SNR_CONVENTION,
};
pub use plot::{emit_plot, render_svg, PlotOptions, Series};
pub use ser::{run_ser_point, run_sweep, wilson_interval, Experiment, SerEstimate};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("plot needs at least one series with at least one point")]
    EmptySeries,
    #[error("unknown figure `{0}` (expected one of fig3, fig4, fig5, fig6, fig7)")]
    UnknownFigure(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl HarnessError {
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "INVALID_CONFIG",
            HarnessError::Constellation(e) => e.code(),
            HarnessError::Channel(_) => "INVALID_CHANNEL",
            HarnessError::Analytic(e) => e.code(),
            HarnessError::EmptySeries => "EMPTY_SERIES",
            HarnessError::UnknownFigure(_) => "UNKNOWN_FIGURE",
            HarnessError::Io { .. } => "IO",
            HarnessError::Json { .. } => "INVALID_JSON",
            HarnessError::Parse { .. } => "PARSE",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
