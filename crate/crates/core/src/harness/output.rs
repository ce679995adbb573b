use std::fmt::Write as _;
use std::path::Path;

use sha1::{Digest, Sha1};

use super::config::ExperimentConfig;
use super::curve::{AnalyticPoint, CurveMode};
use super::plot::Series;
use super::ser::SerEstimate;
use super::HarnessError;
use crate::analytic::SubsetScaling;
use crate::channel::GENERATOR_ID;
use crate::constellation::Constellation;
use crate::design::{DesignReport, ObjectiveMode};

pub const SNR_CONVENTION: &str =
    "snr_db = 10*log10(P); y = sqrt(P)*h*x + w with h, w ~ CN(0,1) (variance 1/2 per real dimension)";

/// Git blob id (`sha1("blob <len>\0" ++ bytes)`) of `bytes`.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha1::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .fold(String::with_capacity(40), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// `# key: value` header lines written before every CSV body.
#[derive(Debug, Clone, Default)]
pub struct RunMetadata {
    entries: Vec<(String, String)>,
}

impl RunMetadata {
    pub fn new(kind: &str) -> Self {
        let mut m = RunMetadata::default();
        m.push("tool", format!("pskpam {}", env!("CARGO_PKG_VERSION")));
        m.push("kind", kind);
        m.push("snr_convention", SNR_CONVENTION);
        m.push("sqrt_p_restored", "true");
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("# {k}: {}\n", v.replace('\n', " ")))
            .collect()
    }
}

/// Metadata for a Monte Carlo SER run.
pub fn ser_metadata(config: &ExperimentConfig, c: &Constellation) -> RunMetadata {
    RunMetadata::new("ser")
        .with("label", config.label().unwrap_or_else(|_| c.label()))
        .with("config_hash", config_hash(&config.to_canonical_json()))
        .with("seed", config.master_seed)
        .with("constellation", c.label())
        .with("geometry", c.geometry_note())
        .with("norm_mode", c.norm_mode())
        .with("phase_bound", config.phase_bound)
        .with("generator", GENERATOR_ID)
        .with("receiver", config.effective_receiver().as_str())
        .with(
            "reestimation",
            if config.decoder.allow_reestimate {
                "on (phase only)"
            } else {
                "off"
            },
        )
        .with("objective_mode", "n/a")
}

/// Metadata for an analytic curve.
pub fn analytic_metadata(
    config: &ExperimentConfig,
    c: &Constellation,
    mode: CurveMode,
    objective: ObjectiveMode,
    scaling: SubsetScaling,
) -> RunMetadata {
    RunMetadata::new("analytic")
        .with("label", config.label().unwrap_or_else(|_| c.label()))
        .with("config_hash", config_hash(&config.to_canonical_json()))
        .with("seed", "n/a")
        .with("constellation", c.label())
        .with("geometry", c.geometry_note())
        .with("norm_mode", c.norm_mode())
        .with("phase_bound", config.phase_bound)
        .with("generator", "n/a")
        .with("curve_mode", mode)
        .with("objective_mode", objective)
        .with("dominant_subset_scaling", objective.scaling())
        .with("union_subset_scaling", scaling)
        .with(
            "union_average",
            "mean over rings of the per-symbol union bound clamped at 1",
        )
}

pub fn format_ser_csv(meta: &RunMetadata, rows: &[SerEstimate]) -> String {
    let mut out = meta.render();
    out.push_str("snr_db,trials,errors,ser,ci95_low,ci95_high\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.snr_db, r.trials, r.errors, r.ser, r.ci95_low, r.ci95_high
        );
    }
    out
}

pub fn format_analytic_csv(meta: &RunMetadata, rows: &[AnalyticPoint]) -> String {
    let mut out = meta.render();
    let flagged: Vec<String> = rows
        .iter()
        .filter(|r| r.uninformative || r.clamped)
        .map(|r| r.snr_db.to_string())
        .collect();
    if !flagged.is_empty() {
        let _ = writeln!(out, "# uninformative_snr_db: {}", flagged.join(" "));
    }
    out.push_str("snr_db,p_subset_dom,p_pam_dom,p_total\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.snr_db, r.p_subset_dom, r.p_pam_dom, r.p_total
        );
    }
    out
}

pub fn format_design_csv(meta: &RunMetadata, report: &DesignReport) -> String {
    let mut out = meta.render();
    for c in report.candidates.iter().filter(|c| c.failure.is_some()) {
        let _ = writeln!(
            out,
            "# excluded ({},{}): {}",
            c.k,
            c.n,
            c.failure.as_deref().unwrap_or_default()
        );
    }
    out.push_str("k,n,p_subset_dom,p_pam_dom,objective,is_best\n");
    for c in &report.candidates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.k,
            c.n,
            c.p_subset_dominant,
            c.p_pam_dominant,
            c.objective,
            (c.k, c.n) == report.best
        );
    }
    out
}

pub fn format_constellation_csv(meta: &RunMetadata, c: &Constellation) -> String {
    let mut out = meta.render();
    out.push_str("index,subset_k,amplitude_i,re,im\n");
    for (idx, p) in c.points().iter().enumerate() {
        let _ = writeln!(
            out,
            "{idx},{},{},{},{}",
            p.subset_index, p.amplitude_index, p.value.re, p.value.im
        );
    }
    out
}

/// Write `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// Read `(snr_db, value)` pairs from an `ser` or `analytic` CSV. The value
/// column is `ser` when present, otherwise `p_total`. The series name is the
/// `# label:` metadata entry, falling back to the file stem.
pub fn read_curve_csv(path: &Path) -> Result<Series, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let parse_err = |message: String| HarnessError::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut label = None;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = loop {
        match lines.next() {
            Some(l) if l.starts_with('#') => {
                if let Some(v) = l.strip_prefix("# label:") {
                    label = Some(v.trim().to_string());
                }
            }
            Some(l) => break l,
            None => return Err(parse_err("missing CSV header".into())),
        }
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let x_col = find("snr_db").ok_or_else(|| parse_err("no snr_db column".into()))?;
    let y_col = find("ser")
        .or_else(|| find("p_total"))
        .ok_or_else(|| parse_err("no ser or p_total column".into()))?;
    let mut points = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |c: usize| -> Result<f64, HarnessError> {
            fields
                .get(c)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| parse_err(format!("row {}: bad numeric field", n + 1)))
        };
        points.push((get(x_col)?, get(y_col)?));
    }
    let name = label.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into())
    });
    Ok(Series { name, points })
}
