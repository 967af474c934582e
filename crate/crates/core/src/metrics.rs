//! Evaluation metrics: DOA error rate, cumulative-power-spectrum amplitude
//! RMSE, scalar RMSE and SNR bookkeeping.

use crate::array::{AmplitudeMatrix, CMatrix};
use crate::error::{Error, Result};

/// Arrival angles in degrees, validated to `[0°, 180°)` and sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DoaEstimate {
    angles_deg: Vec<f64>,
}

impl DoaEstimate {
    pub fn new(mut angles_deg: Vec<f64>) -> Result<Self> {
        check_angles(&angles_deg)?;
        angles_deg.sort_by(f64::total_cmp);
        Ok(Self { angles_deg })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }
}

fn check_angles(angles: &[f64]) -> Result<()> {
    match angles.iter().find(|a| !(0.0..180.0).contains(*a)) {
        Some(a) => Err(Error::InvalidArgument(format!("arrival angle {a} outside [0, 180)"))),
        None => Ok(()),
    }
}

/// `1` when nothing is detected, otherwise the mean distance from each
/// estimate to its nearest true angle, as a fraction of 180°.
///
/// Extra estimates near a true source lower the score rather than raise it.
pub fn err_doa(est: &DoaEstimate, truth: &DoaEstimate) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("true DOA set is empty".into()));
    }
    if est.is_empty() {
        return Ok(1.0);
    }
    let total: f64 = est
        .angles()
        .iter()
        .map(|e| truth.angles().iter().map(|t| (e - t).abs()).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(total / est.len() as f64 / 180.0)
}

/// RMSE between the cumulative power spectra `F_m(Φ) = Σ_{Φ_k <= Φ} |a_{k,m}|²`
/// of the truth and the estimate, integrated exactly over `[0°, 180°]` and
/// averaged over bins.
///
/// Row `k` of each amplitude matrix belongs to angle `k` of its list. An
/// empty estimate means `F̂ ≡ 0`.
pub fn rmse_amplitude(est_amps: &CMatrix, est_doas: &[f64], true_amps: &CMatrix, true_doas: &[f64]) -> Result<f64> {
    check_angles(est_doas)?;
    check_angles(true_doas)?;
    if est_amps.nrows() != est_doas.len() || true_amps.nrows() != true_doas.len() {
        return Err(Error::InvalidArgument("amplitude rows must match the DOA count".into()));
    }
    let m = true_amps.ncols();
    if m == 0 {
        return Err(Error::InvalidArgument("amplitudes have no bins".into()));
    }
    if !est_doas.is_empty() && est_amps.ncols() != m {
        return Err(Error::InvalidArgument(format!(
            "estimate has {} bins, truth has {m}",
            est_amps.ncols()
        )));
    }

    // Jumps of F − F̂: (angle, row, from truth?).
    let mut events: Vec<(f64, usize, bool)> = true_doas
        .iter()
        .enumerate()
        .map(|(k, &a)| (a, k, true))
        .chain(est_doas.iter().enumerate().map(|(k, &a)| (a, k, false)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut total = 0.0;
    for bin in 0..m {
        let mut diff = 0.0;
        let mut integral = 0.0;
        for (i, &(angle, row, is_true)) in events.iter().enumerate() {
            diff += if is_true {
                true_amps[(row, bin)].norm_sqr()
            } else {
                -est_amps[(row, bin)].norm_sqr()
            };
            let next = events.get(i + 1).map_or(180.0, |e| e.0);
            integral += diff * diff * (next - angle);
        }
        total += integral;
    }
    Ok((total / m as f64).sqrt())
}

/// Root mean squared deviation of `estimates` from `truth`.
pub fn rmse_scalar(estimates: &[f64], truth: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::InvalidArgument("no estimates".into()));
    }
    let ms = estimates.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / estimates.len() as f64;
    Ok(ms.sqrt())
}

/// `10 log₁₀(max_k σ_k² / σ₀²)` with `σ_k² = ‖a_k‖²/M`.
pub fn snr_db(amplitudes: &AmplitudeMatrix, sigma0_sq: f64) -> Result<f64> {
    if sigma0_sq.is_nan() || sigma0_sq <= 0.0 {
        return Err(Error::InvalidArgument(format!("σ₀² = {sigma0_sq} must be positive")));
    }
    Ok(10.0 * (amplitudes.max_source_power() / sigma0_sq).log10())
}
