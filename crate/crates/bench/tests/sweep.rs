use doa_bench::curves::{emit_curves, Quantity};
use doa_bench::sweep::{read_records, run_sweep, write_records};
use doa_bench::{ExperimentConfig, MethodKind, RunRecord};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        sensors: 12,
        sources: 2,
        bins: 32,
        samples: 32,
        snr_grid_db: vec![-10.0, 10.0],
        overlap: vec![0.0, 0.5],
        decay: vec![0.0],
        k_max: 4,
        grid_step_deg: 1.0,
        n_runs: 3,
        ..ExperimentConfig::desk()
    }
}

fn csv_bytes(records: &[RunRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_records(&mut out, records).unwrap();
    out
}

#[test]
fn identical_bytes_for_any_worker_count() {
    let cfg = small();
    let one = run_sweep(&cfg, Some(1)).unwrap();
    let four = run_sweep(&cfg, Some(4)).unwrap();
    assert_eq!(csv_bytes(&one.records), csv_bytes(&four.records));
}

#[test]
fn every_cell_is_present_once() {
    let cfg = small();
    let res = run_sweep(&cfg, Some(2)).unwrap();
    assert_eq!(res.records.len(), cfg.grid_len() * cfg.n_runs * cfg.methods.len());
    for g in 0..cfg.grid_len() {
        let (snr, ov, dc) = cfg.grid_point(g);
        for run in 0..cfg.n_runs {
            for &m in &cfg.methods {
                let n = res
                    .records
                    .iter()
                    .filter(|r| r.method == m && r.snr_db == snr && r.overlap == ov && r.decay == dc && r.run == run)
                    .count();
                assert_eq!(n, 1);
            }
        }
    }
    assert!(res.summary.iter().all(|s| s.n == cfg.n_runs));
    assert!(res.records.iter().all(|r| r.wall_ms == 0.0));
}

#[test]
fn single_run_gives_one_row_per_method() {
    let cfg = ExperimentConfig {
        snr_grid_db: vec![5.0],
        overlap: vec![0.0],
        n_runs: 1,
        ..small()
    };
    let res = run_sweep(&cfg, Some(1)).unwrap();
    let methods: Vec<MethodKind> = res.records.iter().map(|r| r.method).collect();
    assert_eq!(methods, MethodKind::ALL.to_vec());
}

#[test]
fn records_round_trip_through_csv() {
    let res = run_sweep(&small(), Some(1)).unwrap();
    let bytes = csv_bytes(&res.records);
    let back = read_records(bytes.as_slice()).unwrap();
    assert_eq!(back.len(), res.records.len());
    assert_eq!(csv_bytes(&back), bytes);
}

#[test]
fn curves_match_manual_means() {
    let res = run_sweep(
        &ExperimentConfig {
            n_runs: 5,
            overlap: vec![0.0],
            methods: vec![MethodKind::MusicMap],
            ..small()
        },
        Some(1),
    )
    .unwrap();
    assert_eq!(res.records.len(), 10);
    let curves = emit_curves(&res.records, Quantity::TauMean).unwrap();
    assert_eq!(curves.len(), 1);
    for &(snr, v) in &curves[0].points {
        let rows: Vec<f64> = res.records.iter().filter(|r| r.snr_db == snr).map(|r| r.tau_mean).collect();
        let manual = rows.iter().sum::<f64>() / rows.len() as f64;
        assert!((v - manual).abs() <= 1e-15 * manual.abs().max(1.0));
    }
    let sig = emit_curves(&res.records, Quantity::RmseSigma).unwrap();
    for &(snr, v) in &sig[0].points {
        let sq: Vec<f64> = res.records.iter().filter(|r| r.snr_db == snr).map(|r| r.rmse_sigma.powi(2)).collect();
        assert!((v - (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()).abs() <= 1e-15 * v.max(1.0));
    }
}

#[test]
fn empty_table_is_an_error() {
    assert!(emit_curves(&[], Quantity::KHat).is_err());
}

#[test]
fn shrinkage_helps_almost_every_low_snr_run() {
    let cfg = ExperimentConfig {
        snr_grid_db: vec![-20.0],
        overlap: vec![0.0],
        n_runs: 50,
        methods: vec![MethodKind::MusicMap],
        ..ExperimentConfig::desk()
    };
    let res = run_sweep(&cfg, None).unwrap();
    let better = res
        .records
        .iter()
        .filter(|r| r.rmse_a_shrunk <= r.rmse_a0 + 1e-12)
        .count();
    assert!(better * 10 >= res.records.len() * 9, "{better}/{}", res.records.len());
}

#[test]
fn shrinkage_factor_is_a_fraction_when_sources_found() {
    let res = run_sweep(&small(), Some(1)).unwrap();
    for r in res.records.iter().filter(|r| r.k_hat >= 1) {
        assert!(r.tau_mean > 0.0 && r.tau_mean < 1.0, "{r:?}");
    }
    for r in res.records.iter().filter(|r| r.k_hat == 0 && r.method != MethodKind::MusicKnownK) {
        assert_eq!(r.tau_mean, 1.0);
    }
}

#[test]
fn known_order_matches_map_at_high_snr() {
    let cfg = ExperimentConfig {
        snr_grid_db: vec![10.0, 20.0],
        overlap: vec![0.0],
        n_runs: 20,
        methods: vec![MethodKind::MusicMap, MethodKind::MusicKnownK],
        ..ExperimentConfig::desk()
    };
    let res = run_sweep(&cfg, None).unwrap();
    let mean = |m: MethodKind| {
        let v: Vec<f64> = res.records.iter().filter(|r| r.method == m).map(|r| r.err_doa).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (map, known) = (mean(MethodKind::MusicMap), mean(MethodKind::MusicKnownK));
    assert!(known <= 0.5 / 180.0 + 1e-12, "{known}");
    assert!((map - known).abs() <= 1e-12, "{map} vs {known}");
}
