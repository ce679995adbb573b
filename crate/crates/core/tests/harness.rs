use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use pskpam::analytic::{QuadratureSpec, SubsetScaling};
use pskpam::constellation::{Family, NormMode};
use pskpam::design::ObjectiveMode;
use pskpam::harness::{
    bundled_figure, format_ser_csv, read_curve_csv, reproduce, run_analytic_curve, run_ser_point,
    run_sweep, ser_metadata, wilson_interval, ConstellationSpec, CurveMode, DecoderOptions,
    Experiment, ExperimentConfig, HarnessError, OutputPaths, Receiver,
};

fn config(
    family: Family,
    m: usize,
    k: Option<usize>,
    a: f64,
    grid: &[f64],
    trials: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        name: None,
        constellation: ConstellationSpec {
            family,
            m,
            k,
            norm: NormMode::MeanPower,
        },
        phase_bound: a,
        snr_db: grid.to_vec(),
        trials_per_point: trials,
        master_seed: 99,
        decoder: DecoderOptions::default(),
        output: OutputPaths::default(),
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = config(Family::PskPam, 8, Some(4), PI / 8.0, &[10.0, 20.0], 30_000);
    let one = in_pool(1, || run_sweep(&cfg).unwrap());
    let many = in_pool(7, || run_sweep(&cfg).unwrap());
    assert_eq!(one, many);
    let exp = Experiment::new(cfg.clone()).unwrap();
    let csv = |rows| format_ser_csv(&ser_metadata(&cfg, exp.constellation()), rows);
    assert_eq!(csv(&one), csv(&many));
}

#[test]
fn overwhelming_snr_is_error_free() {
    let cfg = config(Family::Psk, 4, None, 0.0, &[60.0], 10_000);
    let est = run_ser_point(&cfg, 60.0).unwrap();
    assert!(est.ser <= 1e-3);
}

#[test]
fn bpsk_matches_rayleigh_closed_form() {
    let mut cfg = config(Family::Psk, 2, None, 0.0, &[10.0], 100_000);
    cfg.decoder.receiver = Receiver::Coherent;
    let est = run_ser_point(&cfg, 10.0).unwrap();
    let p: f64 = 10.0;
    let exact = 0.5 * (1.0 - (p / (1.0 + p)).sqrt());
    let sigma = (exact * (1.0 - exact) / est.trials as f64).sqrt();
    assert!(
        (est.ser - exact).abs() < 3.0 * sigma,
        "{} vs {exact}",
        est.ser
    );
}

#[test]
fn wilson_interval_has_nominal_coverage() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for (p, n) in [(0.1, 200u64), (0.02, 2000), (0.5, 50)] {
        let covered = (0..1000)
            .filter(|_| {
                let errors = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson_interval(errors, n, 1.959_963_984_540_054);
                lo <= p && p <= hi
            })
            .count();
        let rate = covered as f64 / 1000.0;
        assert!(
            (0.93..=0.97).contains(&rate),
            "p={p} n={n}: coverage {rate}"
        );
    }
}

#[test]
fn empty_grid_gives_header_only() {
    let cfg = config(Family::PskPam, 8, Some(4), 0.1, &[], 100);
    let rows = run_sweep(&cfg).unwrap();
    assert!(rows.is_empty());
    let exp = Experiment::new(cfg.clone()).unwrap();
    let csv = format_ser_csv(&ser_metadata(&cfg, exp.constellation()), &rows);
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["snr_db,trials,errors,ser,ci95_low,ci95_high"]);
}

#[test]
fn single_point_sweep_equals_point_run() {
    let cfg = config(Family::PskPam, 16, Some(8), 0.2, &[17.5], 20_000);
    assert_eq!(
        run_sweep(&cfg).unwrap(),
        vec![run_ser_point(&cfg, 17.5).unwrap()]
    );
}

#[test]
fn ser_falls_with_snr_without_phase_error() {
    let cfg = config(
        Family::PskPam,
        8,
        Some(4),
        0.0,
        &[0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
        100_000,
    );
    let rows = run_sweep(&cfg).unwrap();
    for w in rows.windows(2) {
        assert!(
            w[1].ci95_low <= w[0].ci95_high,
            "{} dB -> {} dB",
            w[0].snr_db,
            w[1].snr_db
        );
        assert!(w[1].ser < w[0].ser);
    }
}

#[test]
fn sweep_points_use_disjoint_trials() {
    // Two practically identical grid entries must not reuse the same draws.
    let cfg = config(
        Family::PskPam,
        8,
        Some(4),
        0.3,
        &[10.0, 10.0 + 1e-9],
        20_000,
    );
    let rows = run_sweep(&cfg).unwrap();
    assert_ne!(rows[0].errors, rows[1].errors);
}

#[test]
fn every_estimate_brackets_its_rate() {
    let cfg = config(Family::Qam, 16, None, PI / 8.0, &[0.0, 10.0, 30.0], 5_000);
    for r in run_sweep(&cfg).unwrap() {
        assert!(
            0.0 <= r.ci95_low && r.ci95_low <= r.ser && r.ser <= r.ci95_high && r.ci95_high <= 1.0
        );
        assert_eq!(r.ser, r.errors as f64 / r.trials as f64);
    }
}

#[test]
fn analytic_curve_rejects_qam_and_flags_zero_power() {
    let quad = QuadratureSpec::default();
    let qam = config(Family::Qam, 16, None, 0.1, &[10.0], 1);
    assert!(matches!(
        run_analytic_curve(
            &qam,
            &quad,
            CurveMode::Union,
            ObjectiveMode::Default,
            SubsetScaling::Derived
        ),
        Err(HarnessError::Config(_))
    ));
    let cfg = config(Family::PskPam, 8, Some(4), PI / 10.0, &[-100.0, 20.0], 1);
    let union = run_analytic_curve(
        &cfg,
        &quad,
        CurveMode::Union,
        ObjectiveMode::Default,
        SubsetScaling::Derived,
    )
    .unwrap();
    assert!(union[0].uninformative && union[0].clamped && union[0].p_total <= 1.0);
    assert!(!union[1].uninformative);
    let dom = run_analytic_curve(
        &cfg,
        &quad,
        CurveMode::Dominant,
        ObjectiveMode::Default,
        SubsetScaling::Derived,
    )
    .unwrap();
    assert!((dom[0].p_total - 0.5).abs() < 1e-4);
    for (u, d) in union.iter().zip(&dom) {
        assert!(u.p_total >= d.p_total);
    }
}

#[test]
fn config_rejects_unknown_keys_and_bad_grids() {
    let good = r#"{"constellation":{"family":"psk-pam","m":8,"k":4},"phase_bound":0.3,
        "snr_db":[10,20],"trials_per_point":10,"master_seed":1}"#;
    let cfg = ExperimentConfig::from_json(good).unwrap();
    assert!(cfg.validate().is_ok());
    assert!(cfg.decoder.allow_reestimate);
    let typo = good.replace("master_seed", "master_sed");
    assert!(ExperimentConfig::from_json(&typo).is_err());
    let extra = good.replace("\"phase_bound\"", "\"colour\":1,\"phase_bound\"");
    assert!(ExperimentConfig::from_json(&extra).is_err());
    let unsorted = ExperimentConfig::from_json(&good.replace("[10,20]", "[20,10]")).unwrap();
    assert!(unsorted.validate().is_err());
    let no_trials = ExperimentConfig::from_json(
        &good.replace("\"trials_per_point\":10", "\"trials_per_point\":0"),
    )
    .unwrap();
    assert!(no_trials.validate().is_err());
}

#[test]
fn reproduce_writes_csvs_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let fig = bundled_figure("fig3")
        .unwrap()
        .with_overrides(Some(2_000), None);
    let out = reproduce(&fig, dir.path()).unwrap();
    assert_eq!(out.csv_paths.len(), fig.series.len());
    let svg = std::fs::read_to_string(&out.svg_path).unwrap();
    assert_eq!(
        svg.matches("class=\"legend-entry\"").count(),
        fig.series.len()
    );
    for (path, series) in out.csv_paths.iter().zip(&out.series) {
        let text = std::fs::read_to_string(path).unwrap();
        for key in [
            "config_hash",
            "seed",
            "norm_mode",
            "snr_convention",
            "generator",
            "sqrt_p_restored",
            "objective_mode",
        ] {
            assert!(
                text.contains(&format!("# {key}: ")),
                "{} lacks {key}",
                path.display()
            );
        }
        // Plotted numbers are exactly the CSV numbers.
        assert_eq!(&read_curve_csv(path).unwrap().points, &series.points);
        for &(x, y) in &series.points {
            assert!(svg.contains(&format!("data-x=\"{x}\" data-y=\"{y}\"")));
        }
    }
}
