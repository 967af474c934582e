//! WebAssembly bindings for the browser demo. Every export returns a flat
//! `Float64Array`; the layout is documented on each function.

use wasm_bindgen::prelude::*;

use doa_map::array::{default_scenario, synth_freq, ArrayScenario};
use doa_map::dgamma::{double_gamma_pdf, prob_dominance, Branch, DominancePair};
use doa_map::order::{map_order_pca, map_order_scan_cov, ScanPrior};
use doa_map::subspace::{angle_grid, dtft_spectrum_cov, eigendecompose, music_pseudospectrum, pick_peaks, sample_covariance};
use doa_map::Result;

fn scenario(sensors: usize, sources: usize, bins: usize, snr_db: f64, overlap: f64, seed: u64) -> Result<ArrayScenario> {
    let s = default_scenario(sensors, sources, bins, bins, overlap, 0.0, snr_db, seed);
    s.validate()?;
    Ok(s)
}

/// Normalizes to a 0 dB peak.
fn to_db(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    values.iter().map(|v| 10.0 * (v.max(1e-300) / max).log10()).collect()
}

/// `[angles | DTFT dB | MUSIC dB]`, each `G` long.
#[allow(clippy::too_many_arguments)]
pub fn spectra_impl(
    sensors: usize,
    sources: usize,
    bins: usize,
    snr_db: f64,
    overlap: f64,
    seed: u64,
    k_sub: usize,
    step_deg: f64,
) -> Result<Vec<f64>> {
    let y = synth_freq(&scenario(sensors, sources, bins, snr_db, overlap, seed)?)?.y;
    let grid = angle_grid(step_deg)?;
    let cov = sample_covariance(&y);
    let dtft = dtft_spectrum_cov(&cov, &grid);
    let music = music_pseudospectrum(&eigendecompose(&cov)?, k_sub, &grid)?;
    let mut out = grid.clone();
    out.extend(to_db(&dtft.values));
    out.extend(to_db(&music.values));
    Ok(out)
}

/// `[k_map, score(0), …, score(k_max)]`. `method` is `pca`, `music` or `dtft`.
#[allow(clippy::too_many_arguments)]
pub fn order_scores_impl(
    sensors: usize,
    sources: usize,
    bins: usize,
    snr_db: f64,
    overlap: f64,
    seed: u64,
    k_max: usize,
    method: &str,
) -> Result<Vec<f64>> {
    let y = synth_freq(&scenario(sensors, sources, bins, snr_db, overlap, seed)?)?.y;
    let cov = sample_covariance(&y);
    let basis = eigendecompose(&cov)?;
    let post = match method {
        "pca" => map_order_pca(&basis, &y, k_max)?,
        "music" | "dtft" => {
            let grid = angle_grid(0.5)?;
            let (curve, prior) = if method == "music" {
                (music_pseudospectrum(&basis, k_max, &grid)?, ScanPrior::Music)
            } else {
                (dtft_spectrum_cov(&cov, &grid), ScanPrior::Dtft)
            };
            let peaks: Vec<f64> = pick_peaks(&curve, k_max)?.iter().map(|p| p.angle_deg).collect();
            map_order_scan_cov(&cov, y.norm_squared(), y.ncols(), &peaks, k_max, prior)?
        }
        other => {
            return Err(doa_map::Error::InvalidArgument(format!("unknown method '{other}'")));
        }
    };
    let mut out = vec![post.k_map as f64];
    out.extend(post.log_scores);
    Ok(out)
}

/// `[Pr[X <= Y], x(0..n) | lower pdf | upper pdf]` on `(0, x_max]`.
pub fn double_gamma_impl(alpha: u64, beta: u64, s_x: f64, s_y: f64, x_max: f64, points: usize) -> Result<Vec<f64>> {
    let pair = DominancePair::new(alpha, beta, s_x, s_y)?;
    let xs: Vec<f64> = (1..=points).map(|i| x_max * i as f64 / points as f64).collect();
    let mut out = vec![prob_dominance(&pair)];
    out.extend(&xs);
    for branch in [Branch::Lower, Branch::Upper] {
        for &x in &xs {
            out.push(double_gamma_pdf(x, &pair, branch)?);
        }
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spectra(
    sensors: usize,
    sources: usize,
    bins: usize,
    snr_db: f64,
    overlap: f64,
    seed: u64,
    k_sub: usize,
    step_deg: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(spectra_impl(sensors, sources, bins, snr_db, overlap, seed, k_sub, step_deg))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn order_scores(
    sensors: usize,
    sources: usize,
    bins: usize,
    snr_db: f64,
    overlap: f64,
    seed: u64,
    k_max: usize,
    method: &str,
) -> std::result::Result<Vec<f64>, JsError> {
    js(order_scores_impl(sensors, sources, bins, snr_db, overlap, seed, k_max, method))
}

#[wasm_bindgen]
pub fn double_gamma(
    alpha: u32,
    beta: u32,
    s_x: f64,
    s_y: f64,
    x_max: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(double_gamma_impl(alpha.into(), beta.into(), s_x, s_y, x_max, points))
}
