use std::io::{self, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use doa_map::array::{synth_freq_with, ArrayScenario, CMatrix};
use doa_map::metrics::{err_doa, rmse_amplitude, DoaEstimate};
use doa_map::order::{
    aic_order, map_order_pca, map_order_scan_cov, posterior_variances, shrink_amplitudes, OrderPosterior,
    ScanPrior,
};
use doa_map::subspace::{
    angle_grid, dtft_spectrum_cov, eigendecompose, music_pseudospectrum, pick_peaks, project,
    sample_covariance, steering_for_angles, EigenBasis, SpectrumCurve,
};
use doa_map::Error;

use crate::config::{ExperimentConfig, MethodKind};

/// Schema tag written as the first line of every results file.
pub const CSV_VERSION_LINE: &str = "# doa-bench results v1";
pub const CSV_HEADER: &str =
    "method,snr_db,overlap,decay,run,k_hat,err_doa,rmse_a0,rmse_a_shrunk,rmse_sigma,tau_mean,wall_ms";

/// One row per (method, grid point, run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: MethodKind,
    pub snr_db: f64,
    pub overlap: f64,
    pub decay: f64,
    pub run: usize,
    pub k_hat: usize,
    /// NaN for PCA, which yields no DOAs.
    pub err_doa: f64,
    pub rmse_a0: f64,
    pub rmse_a_shrunk: f64,
    /// `|σ̄ − σ|` for this run; aggregated as a root mean square.
    pub rmse_sigma: f64,
    pub tau_mean: f64,
    pub wall_ms: f64,
}

/// Per (method, grid point) aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: MethodKind,
    pub snr_db: f64,
    pub overlap: f64,
    pub decay: f64,
    pub n: usize,
    pub mean_k_hat: f64,
    pub correct_k_rate: f64,
    pub mean_err_doa: f64,
    pub mean_rmse_a0: f64,
    pub mean_rmse_a_shrunk: f64,
    pub rmse_sigma: f64,
    pub mean_tau: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Everything the estimators share for one synthetic dataset.
struct Dataset {
    y: CMatrix,
    cov: CMatrix,
    norm2: f64,
    basis: EigenBasis,
    sigma: f64,
    true_doas: Vec<f64>,
    truth: DoaEstimate,
    true_amps: CMatrix,
}

/// Substream for grid point `g`, run `r`; independent of scheduling.
pub fn run_rng(master_seed: u64, g: usize, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((g as u64) << 32) | r as u64);
    rng
}

pub fn scenario_at(cfg: &ExperimentConfig, g: usize) -> ArrayScenario {
    let (snr_db, overlap, decay) = cfg.grid_point(g);
    ArrayScenario {
        sensors: cfg.sensors,
        bins: cfg.bins,
        samples: cfg.samples,
        doa_deg: cfg.doas(),
        overlap,
        decay,
        snr_db,
        seed: cfg.master_seed,
    }
}

fn build_dataset(scenario: &ArrayScenario, rng: &mut ChaCha8Rng) -> Result<Dataset, Error> {
    let data = synth_freq_with(scenario, rng)?;
    let cov = sample_covariance(&data.y);
    let basis = eigendecompose(&cov)?;
    Ok(Dataset {
        norm2: data.y.norm_squared(),
        y: data.y,
        cov,
        basis,
        sigma: data.noise_var.sqrt(),
        true_doas: scenario.doa_deg.clone(),
        truth: DoaEstimate::new(scenario.doa_deg.clone())?,
        true_amps: scenario.amplitudes().0,
    })
}

struct Outcome {
    k_hat: usize,
    err_doa: f64,
    rmse_a0: f64,
    rmse_a_shrunk: f64,
    sigma2_mean: f64,
    tau_mean: f64,
}

/// Picks DOAs, fits amplitudes on them and scores everything against truth.
fn doa_outcome(ds: &Dataset, doas: &[f64], tau: f64, sigma2: f64) -> Result<Outcome, Error> {
    let v = steering_for_angles(doas, ds.y.nrows());
    let (_, a0) = project(&ds.y, &v)?;
    let amps = shrink_amplitudes(a0, tau)?;
    Ok(Outcome {
        k_hat: doas.len(),
        err_doa: err_doa(&DoaEstimate::new(doas.to_vec())?, &ds.truth)?,
        rmse_a0: rmse_amplitude(&amps.a0, doas, &ds.true_amps, &ds.true_doas)?,
        rmse_a_shrunk: rmse_amplitude(&amps.a_shrunk, doas, &ds.true_amps, &ds.true_doas)?,
        sigma2_mean: sigma2,
        tau_mean: tau,
    })
}

fn peak_angles(curve: &SpectrumCurve, count: usize) -> Result<Vec<f64>, Error> {
    Ok(pick_peaks(curve, count)?.into_iter().map(|p| p.angle_deg).collect())
}

fn spectrum(ds: &Dataset, music: bool, k_sub: usize, grid: &[f64]) -> Result<SpectrumCurve, Error> {
    if music {
        music_pseudospectrum(&ds.basis, k_sub, grid)
    } else {
        Ok(dtft_spectrum_cov(&ds.cov, grid))
    }
}

/// MAP scan over nested peak prefixes.
fn scan_outcome(ds: &Dataset, cfg: &ExperimentConfig, grid: &[f64], prior: ScanPrior) -> Result<Outcome, Error> {
    let m = ds.y.ncols();
    let music = prior == ScanPrior::Music;
    let peaks = if cfg.k_max == 0 {
        Vec::new()
    } else {
        peak_angles(&spectrum(ds, music, cfg.k_max, grid)?, cfg.k_max)?
    };
    let post: OrderPosterior = map_order_scan_cov(&ds.cov, ds.norm2, m, &peaks, cfg.k_max, prior)?;
    doa_outcome(ds, &peaks[..post.k_map], post.tau_mean, post.sigma2_mean)
}

/// Fixed-order pipeline: `k` from AIC or the true source count.
fn fixed_order_outcome(ds: &Dataset, k: usize, music: bool, grid: &[f64]) -> Result<Outcome, Error> {
    let peaks = if k == 0 {
        Vec::new()
    } else {
        peak_angles(&spectrum(ds, music, k, grid)?, k)?
    };
    let v = steering_for_angles(&peaks, ds.y.nrows());
    let (stats, _) = project(&ds.y, &v)?;
    let pv = posterior_variances(&stats, ds.y.nrows())?;
    doa_outcome(ds, &peaks, pv.tau_mean, pv.sigma2_mean)
}

fn run_method(method: MethodKind, ds: &Dataset, cfg: &ExperimentConfig, grid: &[f64]) -> Result<Outcome, Error> {
    match method {
        MethodKind::PcaMap => {
            let post = map_order_pca(&ds.basis, &ds.y, cfg.k_max)?;
            Ok(Outcome {
                k_hat: post.k_map,
                err_doa: f64::NAN,
                rmse_a0: f64::NAN,
                rmse_a_shrunk: f64::NAN,
                sigma2_mean: post.sigma2_mean,
                tau_mean: post.tau_mean,
            })
        }
        MethodKind::MusicMap => scan_outcome(ds, cfg, grid, ScanPrior::Music),
        MethodKind::DtftMap => scan_outcome(ds, cfg, grid, ScanPrior::Dtft),
        MethodKind::MusicAic => {
            let k = aic_order(&ds.basis.eigvals, ds.y.ncols(), cfg.k_max);
            fixed_order_outcome(ds, k, true, grid)
        }
        MethodKind::MusicKnownK => fixed_order_outcome(ds, cfg.sources, true, grid),
        MethodKind::DtftKnownK => fixed_order_outcome(ds, cfg.sources, false, grid),
    }
}

fn run_task(cfg: &ExperimentConfig, grid: &[f64], g: usize, run: usize) -> Result<Vec<RunRecord>, Error> {
    let scenario = scenario_at(cfg, g);
    let ds = build_dataset(&scenario, &mut run_rng(cfg.master_seed, g, run))?;
    cfg.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let o = run_method(method, &ds, cfg, grid)?;
            let wall_ms = if cfg.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            Ok(RunRecord {
                method,
                snr_db: scenario.snr_db,
                overlap: scenario.overlap,
                decay: scenario.decay,
                run,
                k_hat: o.k_hat,
                err_doa: o.err_doa,
                rmse_a0: o.rmse_a0,
                rmse_a_shrunk: o.rmse_a_shrunk,
                rmse_sigma: (o.sigma2_mean.sqrt() - ds.sigma).abs(),
                tau_mean: o.tau_mean,
                wall_ms,
            })
        })
        .collect()
}

/// Runs every (grid point, run) pair on a pool of `jobs` workers (all cores
/// when `None`). Output order is grid point, then run, then method.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepResult, Error> {
    cfg.validate().map_err(|e| Error::InvalidArgument(e.0))?;
    let grid = angle_grid(cfg.grid_step_deg)?;
    let tasks: Vec<(usize, usize)> = (0..cfg.grid_len())
        .flat_map(|g| (0..cfg.n_runs).map(move |r| (g, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let per_task: Vec<Vec<RunRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(g, r)| run_task(cfg, &grid, g, r))
            .collect::<Result<_, _>>()
    })?;
    let records: Vec<RunRecord> = per_task.into_iter().flatten().collect();
    let summary = summarize(&records, cfg.sources);
    Ok(SweepResult { records, summary })
}

/// Mean of the non-NaN values; NaN when none remain.
pub fn nan_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .filter(|v| !v.is_nan())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Aggregates records per (method, snr, overlap, decay) in first-seen order.
pub fn summarize(records: &[RunRecord], k_true: usize) -> Vec<SummaryRow> {
    let mut keys: Vec<(MethodKind, f64, f64, f64)> = Vec::new();
    for r in records {
        let key = (r.method, r.snr_db, r.overlap, r.decay);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, snr_db, overlap, decay)| {
            let rows: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.method == method && r.snr_db == snr_db && r.overlap == overlap && r.decay == decay)
                .collect();
            let n = rows.len();
            SummaryRow {
                method,
                snr_db,
                overlap,
                decay,
                n,
                mean_k_hat: nan_mean(rows.iter().map(|r| r.k_hat as f64)),
                correct_k_rate: rows.iter().filter(|r| r.k_hat == k_true).count() as f64 / n as f64,
                mean_err_doa: nan_mean(rows.iter().map(|r| r.err_doa)),
                mean_rmse_a0: nan_mean(rows.iter().map(|r| r.rmse_a0)),
                mean_rmse_a_shrunk: nan_mean(rows.iter().map(|r| r.rmse_a_shrunk)),
                rmse_sigma: nan_mean(rows.iter().map(|r| r.rmse_sigma * r.rmse_sigma)).sqrt(),
                mean_tau: nan_mean(rows.iter().map(|r| r.tau_mean)),
            }
        })
        .collect()
}

fn write_rows<W: Write, T: Serialize>(mut out: W, header: &str, rows: &[T]) -> io::Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> io::Result<()> {
    write_rows(out, CSV_HEADER, records)
}

pub const SUMMARY_HEADER: &str = "method,snr_db,overlap,decay,n,mean_k_hat,correct_k_rate,mean_err_doa,mean_rmse_a0,mean_rmse_a_shrunk,rmse_sigma,mean_tau";

pub fn write_summary<W: Write>(out: W, summary: &[SummaryRow]) -> io::Result<()> {
    write_rows(out, SUMMARY_HEADER, summary)
}

pub fn read_records<R: io::Read>(input: R) -> Result<Vec<RunRecord>, csv::Error> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .collect()
}
