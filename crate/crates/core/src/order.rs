//! MAP selection of the number of sources, posterior noise and signal
//! variances, amplitude shrinkage and the eigenvalue AIC baseline.
//!
//! Scores are `log f(Y, V̂ | K) f(K)` up to a `K`-independent constant:
//! `log 𝒬(α, β, q)` minus the log prior volume of the candidate basis.
//! Absolute marginal likelihoods, when wanted, are `log_f_y_k0 + log_score`,
//! still up to the prior normalizing constant shared by all `K`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::array::CMatrix;
use crate::dgamma::{double_moment, DominancePair, Family, Variable};
use crate::error::{Error, Result};
use crate::specfun::{ln_gamma_int, log_q};
use crate::subspace::{
    pca_stats, projection_stats_cov, sample_covariance, steering_for_angles, EigenBasis,
    ProjectionStats,
};

/// `log vol(𝒮_D^K)` for radius `R = √D`:
/// `Σ_{k=D−K+1}^{D} [log 2 + k log(π R²) − log Γ(k) − log R]`.
pub fn log_stiefel_volume(d: usize, k: usize) -> Result<f64> {
    log_stiefel_volume_radius(d, k, (d as f64).sqrt())
}

pub fn log_stiefel_volume_radius(d: usize, k: usize, radius: f64) -> Result<f64> {
    if k > d {
        return Err(Error::InvalidArgument(format!("Stiefel manifold needs K <= D, got K={k} D={d}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("Stiefel radius {radius} must be positive")));
    }
    let ln_pi_r2 = (PI * radius * radius).ln();
    Ok(((d - k + 1)..=d)
        .map(|j| 2f64.ln() + j as f64 * ln_pi_r2 - ln_gamma_int(j as u64) - radius.ln())
        .sum())
}

/// `log f(Y | K=0) = log Γ(DM) − DM log π − DM log ‖Y‖²`.
pub fn log_f_y_k0(norm2_y: f64, d: usize, m: usize) -> Result<f64> {
    if !(norm2_y > 0.0 && norm2_y.is_finite()) {
        return Err(Error::InvalidArgument(format!("‖Y‖² = {norm2_y} must be positive")));
    }
    let dm = (d * m) as u64;
    if dm == 0 {
        return Err(Error::InvalidArgument("empty data matrix".into()));
    }
    let n = dm as f64;
    Ok(ln_gamma_int(dm) - n * PI.ln() - n * norm2_y.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Music,
    Dtft,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pca => "pca",
            Method::Music => "music",
            Method::Dtft => "dtft",
        })
    }
}

/// Posterior means of the variances at a fixed `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorVariances {
    /// `r̄_a`; `None` when `K = 0`.
    pub ra_mean: Option<f64>,
    pub sigma2_mean: f64,
    pub sigma02_mean: f64,
    /// `σ̄₀² / r̄_a`, fixed to 1 when `K = 0`.
    pub tau_mean: f64,
    /// Large-`α, β` forms `s/(D·KM)` and `t/((D−K)M)`.
    pub ra_approx: Option<f64>,
    pub sigma2_approx: f64,
}

/// Exact posterior means through double inverse-gamma moments:
/// `r̄_a = (s/D)/(α−1) · I_p(α−1,β)/I_p(α,β)`,
/// `σ̄² = t/(β−1) · I_p(α,β−1)/I_p(α,β)`.
pub fn posterior_variances(stats: &ProjectionStats, d: usize) -> Result<PosteriorVariances> {
    let dd = d as f64;
    if stats.beta <= 1 {
        return Err(Error::MomentUndefined { order: 1, shape: stats.beta });
    }
    let sigma2_approx = stats.t / stats.beta as f64;
    if stats.alpha == 0 {
        let sigma2 = stats.t / (stats.beta - 1) as f64;
        return Ok(PosteriorVariances {
            ra_mean: None,
            sigma2_mean: sigma2,
            sigma02_mean: sigma2 / dd,
            tau_mean: 1.0,
            ra_approx: None,
            sigma2_approx,
        });
    }
    if stats.alpha <= 1 {
        return Err(Error::MomentUndefined { order: 1, shape: stats.alpha });
    }
    let pair = DominancePair::new(stats.alpha, stats.beta, stats.s, stats.t)?;
    let ra = double_moment(&pair, 1, Family::InvGamma, Variable::X)? / dd;
    let sigma2 = double_moment(&pair, 1, Family::InvGamma, Variable::Y)?;
    let sigma02 = sigma2 / dd;
    Ok(PosteriorVariances {
        ra_mean: Some(ra),
        sigma2_mean: sigma2,
        sigma02_mean: sigma02,
        tau_mean: sigma02 / ra,
        ra_approx: Some(stats.s / (dd * stats.alpha as f64)),
        sigma2_approx,
    })
}

/// Per-`K` scores and the posterior summaries at the selected order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderPosterior {
    pub method: Method,
    /// Indexed by `K = 0..=K_max`; `-inf` where the candidate basis is
    /// rank deficient or missing.
    pub log_scores: Vec<f64>,
    pub k_map: usize,
    pub stats_per_k: Vec<Option<ProjectionStats>>,
    /// Orders whose candidate steering matrix was rank deficient.
    pub rank_deficient: Vec<usize>,
    pub sigma2_mean: f64,
    pub sigma02_mean: f64,
    pub ra_mean: Option<f64>,
    pub tau_mean: f64,
}

pub const ORDER_CSV_HEADER: &str = "method,K,log_score,k_map,sigma2_mean,tau_mean";

impl OrderPosterior {
    fn assemble(method: Method, d: usize, log_scores: Vec<f64>, stats_per_k: Vec<Option<ProjectionStats>>, rank_deficient: Vec<usize>) -> Result<Self> {
        let k_map = argmax_first(&log_scores);
        let stats = stats_per_k[k_map].expect("the selected order always has statistics");
        let v = posterior_variances(&stats, d)?;
        Ok(Self {
            method,
            log_scores,
            k_map,
            stats_per_k,
            rank_deficient,
            sigma2_mean: v.sigma2_mean,
            sigma02_mean: v.sigma02_mean,
            ra_mean: v.ra_mean,
            tau_mean: v.tau_mean,
        })
    }

    pub fn k_max(&self) -> usize {
        self.log_scores.len() - 1
    }

    /// One CSV row per `K` under [`ORDER_CSV_HEADER`].
    pub fn write_csv_rows<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, score) in self.log_scores.iter().enumerate() {
            writeln!(
                out,
                "{},{k},{score},{},{},{}",
                self.method, self.k_map, self.sigma2_mean, self.tau_mean
            )?;
        }
        Ok(())
    }
}

/// Index of the largest value; ties go to the smallest index.
fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

fn check_shapes(d: usize, m: usize, k_max: usize, norm2_y: f64) -> Result<()> {
    if k_max >= d {
        return Err(Error::InvalidArgument(format!("K_max = {k_max} must be below D = {d}")));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {m}")));
    }
    if !(norm2_y > 0.0 && norm2_y.is_finite()) {
        return Err(Error::InvalidArgument(format!("‖Y‖² = {norm2_y} must be positive and finite")));
    }
    Ok(())
}

fn log_q_stats(stats: &ProjectionStats) -> Result<f64> {
    if stats.alpha == 0 {
        Ok(0.0)
    } else {
        log_q(stats.alpha, stats.beta, stats.q)
    }
}

/// PCA order selection with the uniform prior over the radius-`√D` Stiefel
/// manifold. The candidate basis for each `K` is the top-`K` eigenvectors.
pub fn map_order_pca(basis: &EigenBasis, y: &CMatrix, k_max: usize) -> Result<OrderPosterior> {
    let (d, m) = y.shape();
    if basis.dim() != d {
        return Err(Error::InvalidArgument(format!(
            "eigenbasis has dimension {}, data has {d} sensors",
            basis.dim()
        )));
    }
    let norm2 = y.norm_squared();
    check_shapes(d, m, k_max, norm2)?;
    let mut scores = Vec::with_capacity(k_max + 1);
    let mut stats_per_k = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let stats = pca_stats(basis, norm2, k, m);
        scores.push(log_q_stats(&stats)? - log_stiefel_volume(d, k)?);
        stats_per_k.push(Some(stats));
    }
    OrderPosterior::assemble(Method::Pca, d, scores, stats_per_k, Vec::new())
}

/// Which spectrum produced the candidate peaks. Both use the uniform DOA
/// prior `(2π)^{−K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanPrior {
    Music,
    Dtft,
}

/// Order selection over nested prefixes of a height-ordered peak list.
pub fn map_order_scan(y: &CMatrix, peaks_deg: &[f64], k_max: usize, prior: ScanPrior) -> Result<OrderPosterior> {
    let cov = sample_covariance(y);
    map_order_scan_cov(&cov, y.norm_squared(), y.ncols(), peaks_deg, k_max, prior)
}

/// [`map_order_scan`] from a precomputed `Y Yᴴ` and `‖Y‖²`.
pub fn map_order_scan_cov(
    cov: &CMatrix,
    norm2_y: f64,
    m: usize,
    peaks_deg: &[f64],
    k_max: usize,
    prior: ScanPrior,
) -> Result<OrderPosterior> {
    let d = cov.nrows();
    check_shapes(d, m, k_max, norm2_y)?;
    if k_max > 0 && peaks_deg.is_empty() {
        return Err(Error::InvalidArgument("empty peak list".into()));
    }
    let ln_2pi = (2.0 * PI).ln();
    let mut scores = Vec::with_capacity(k_max + 1);
    let mut stats_per_k = Vec::with_capacity(k_max + 1);
    let mut rank_deficient = Vec::new();
    for k in 0..=k_max {
        if k > peaks_deg.len() {
            scores.push(f64::NEG_INFINITY);
            stats_per_k.push(None);
            continue;
        }
        let v = steering_for_angles(&peaks_deg[..k], d);
        match projection_stats_cov(cov, norm2_y, &v, m) {
            Ok(stats) => {
                scores.push(log_q_stats(&stats)? - k as f64 * ln_2pi);
                stats_per_k.push(Some(stats));
            }
            Err(Error::RankDeficient(..)) => {
                scores.push(f64::NEG_INFINITY);
                stats_per_k.push(None);
                rank_deficient.push(k);
            }
            Err(e) => return Err(e),
        }
    }
    let method = match prior {
        ScanPrior::Music => Method::Music,
        ScanPrior::Dtft => Method::Dtft,
    };
    OrderPosterior::assemble(method, d, scores, stats_per_k, rank_deficient)
}

/// ML amplitudes `A₀ = V⁺Y` and their shrunk version `Ā = (1−τ̄) A₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeEstimates {
    pub a0: CMatrix,
    pub a_shrunk: CMatrix,
}

pub fn shrink_amplitudes(a0: CMatrix, tau_mean: f64) -> Result<AmplitudeEstimates> {
    if !(0.0..=1.0).contains(&tau_mean) {
        return Err(Error::InvalidArgument(format!("τ = {tau_mean} outside [0, 1]")));
    }
    let a_shrunk = &a0 * crate::array::C64::new(1.0 - tau_mean, 0.0);
    Ok(AmplitudeEstimates { a0, a_shrunk })
}

/// Wax–Kailath eigenvalue AIC:
/// `AIC(k) = 2M(D−k) log(AM/GM of the D−k smallest eigenvalues) + 2k(2D−k)`,
/// minimized over `k = 0..=K_max` with ties to the smaller `k`.
pub fn aic_order(eigvals: &[f64], m: usize, k_max: usize) -> usize {
    let d = eigvals.len();
    if d == 0 {
        return 0;
    }
    let top = eigvals[0].max(0.0);
    let floor = if top > 0.0 { 1e-300 * top } else { 1e-300 };
    let lam: Vec<f64> = eigvals.iter().map(|&l| l.max(floor)).collect();
    let mut best = (0, f64::INFINITY);
    for k in 0..=k_max.min(d - 1) {
        let tail = &lam[k..];
        let n = tail.len() as f64;
        let am = tail.iter().sum::<f64>() / n;
        let ln_gm = tail.iter().map(|l| l.ln()).sum::<f64>() / n;
        // log(AM/GM) >= 0; round-off can make it a hair negative.
        let ln_ratio = (am.ln() - ln_gm).max(0.0);
        let dk = (d - k) as f64;
        let crit = 2.0 * m as f64 * dk * ln_ratio + 2.0 * k as f64 * (2.0 * d as f64 - k as f64);
        if crit < best.1 {
            best = (k, crit);
        }
    }
    best.0
}
