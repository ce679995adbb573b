use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::curve::{run_analytic_curve, CurveMode};
use super::output::{
    analytic_metadata, format_analytic_csv, format_ser_csv, ser_metadata, write_file,
};
use super::plot::{emit_plot, PlotOptions, Series};
use super::ser::{Experiment, SerEstimate};
use super::HarnessError;
use crate::analytic::{QuadratureSpec, SubsetScaling};
use crate::design::ObjectiveMode;

/// Names of the bundled figure configurations.
pub const FIGURES: [&str; 5] = ["fig3", "fig4", "fig5", "fig6", "fig7"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Simulation,
    AnalyticUnion,
    AnalyticDominant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub label: String,
    pub curve: CurveKind,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub figure: String,
    pub title: String,
    pub series: Vec<SeriesConfig>,
}

impl FigureConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Override trial counts and seeds of every simulation series.
    pub fn with_overrides(mut self, trials: Option<u64>, seed: Option<u64>) -> Self {
        for s in &mut self.series {
            if let Some(t) = trials {
                s.experiment.trials_per_point = t;
            }
            if let Some(seed) = seed {
                s.experiment.master_seed = seed;
            }
        }
        self
    }
}

pub fn bundled_figure(name: &str) -> Result<FigureConfig, HarnessError> {
    let text = match name {
        "fig3" => include_str!("../../configs/fig3.json"),
        "fig4" => include_str!("../../configs/fig4.json"),
        "fig5" => include_str!("../../configs/fig5.json"),
        "fig6" => include_str!("../../configs/fig6.json"),
        "fig7" => include_str!("../../configs/fig7.json"),
        other => return Err(HarnessError::UnknownFigure(other.to_string())),
    };
    FigureConfig::from_json(text).map_err(|source| HarnessError::Json {
        path: PathBuf::from(format!("configs/{name}.json")),
        source,
    })
}

/// Everything a reproduction wrote, in series order.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub csv_paths: Vec<PathBuf>,
    pub svg_path: PathBuf,
    pub series: Vec<Series>,
    /// Monte Carlo results keyed by series label.
    pub simulations: Vec<(String, Vec<SerEstimate>)>,
}

fn slug(label: &str) -> String {
    let mut out = String::new();
    for ch in label.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Run every series of `figure`, writing one CSV per series plus
/// `<figure>.svg` under `out_dir`.
pub fn reproduce(figure: &FigureConfig, out_dir: &Path) -> Result<FigureOutput, HarnessError> {
    let quad = QuadratureSpec::default();
    let mut csv_paths = Vec::new();
    let mut series = Vec::new();
    let mut simulations = Vec::new();
    for s in &figure.series {
        let path = out_dir.join(format!("{}.csv", slug(&s.label)));
        let (csv, points) = match s.curve {
            CurveKind::Simulation => {
                let exp = Experiment::new(s.experiment.clone())?;
                let rows = exp.run_sweep()?;
                let meta = ser_metadata(&s.experiment, exp.constellation())
                    .with("figure", &figure.figure)
                    .with("series", &s.label);
                let csv = format_ser_csv(&meta, &rows);
                let points = rows.iter().map(|r| (r.snr_db, r.ser)).collect();
                simulations.push((s.label.clone(), rows));
                (csv, points)
            }
            CurveKind::AnalyticUnion | CurveKind::AnalyticDominant => {
                let mode = if s.curve == CurveKind::AnalyticUnion {
                    CurveMode::Union
                } else {
                    CurveMode::Dominant
                };
                let c = s.experiment.validate()?;
                let rows = run_analytic_curve(
                    &s.experiment,
                    &quad,
                    mode,
                    ObjectiveMode::Default,
                    SubsetScaling::Derived,
                )?;
                let meta = analytic_metadata(
                    &s.experiment,
                    &c,
                    mode,
                    ObjectiveMode::Default,
                    SubsetScaling::Derived,
                )
                .with("figure", &figure.figure)
                .with("series", &s.label);
                let csv = format_analytic_csv(&meta, &rows);
                let points = rows.iter().map(|r| (r.snr_db, r.p_total)).collect();
                (csv, points)
            }
        };
        write_file(&path, &csv)?;
        csv_paths.push(path);
        series.push(Series {
            name: s.label.clone(),
            points,
        });
    }
    let svg_path = out_dir.join(format!("{}.svg", figure.figure));
    let options = PlotOptions {
        title: Some(figure.title.clone()),
        ..PlotOptions::default()
    };
    emit_plot(&series, &svg_path, &options)?;
    Ok(FigureOutput {
        csv_paths,
        svg_path,
        series,
        simulations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_figures_parse_and_validate() {
        for name in FIGURES {
            let fig = bundled_figure(name).unwrap();
            assert_eq!(fig.figure, name);
            assert!(!fig.series.is_empty());
            for s in &fig.series {
                s.experiment.validate().unwrap();
            }
        }
        assert!(matches!(
            bundled_figure("fig9"),
            Err(HarnessError::UnknownFigure(_))
        ));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("(4,2) union bound"), "4-2-union-bound");
        assert_eq!(slug("8-QAM"), "8-qam");
    }

    #[test]
    fn overrides_apply_to_every_series() {
        let fig = bundled_figure("fig3")
            .unwrap()
            .with_overrides(Some(10), Some(42));
        assert!(fig
            .series
            .iter()
            .all(|s| s.experiment.trials_per_point == 10));
        assert!(fig.series.iter().all(|s| s.experiment.master_seed == 42));
    }
}
