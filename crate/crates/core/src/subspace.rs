//! Sample covariance eigendecomposition, the PCA / MUSIC / DTFT spectra and
//! the projection statistics `s = ‖V A₀‖²`, `t = ‖Y‖² − s`.

use std::io::{self, Write};

use nalgebra::linalg::{SymmetricEigen, QR};
use serde::{Deserialize, Serialize};

use crate::array::{doa_to_omega, steering_matrix, steering_vector, CMatrix, C64};
use crate::error::{Error, Result};

/// Relative floor applied to `t` (and `s` for `K >= 1`) so logs stay finite.
pub const STAT_FLOOR: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-6;
const RANK_TOL: f64 = 1e-10;
const MUSIC_FLOOR: f64 = 1e-300;

/// `Y Yᴴ`, symmetrized so that it is exactly Hermitian.
pub fn sample_covariance(y: &CMatrix) -> CMatrix {
    let r = y * y.adjoint();
    (&r + r.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenpairs of a Hermitian PSD matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub eigvecs: CMatrix,
    pub eigvals: Vec<f64>,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    /// `Q Λ Qᴴ`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigvecs.clone();
        for (j, &l) in self.eigvals.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * self.eigvecs.adjoint()
    }
}

/// Relative anti-Hermitian part `‖C − Cᴴ‖ / ‖C‖`.
pub fn hermitian_defect(c: &CMatrix) -> f64 {
    let norm = c.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (c - c.adjoint()).norm() / norm
}

pub fn eigendecompose(cov: &CMatrix) -> Result<EigenBasis> {
    if !cov.is_square() {
        return Err(Error::InvalidArgument(format!(
            "covariance must be square, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let defect = hermitian_defect(cov);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let d = cov.nrows();
    if d == 0 {
        return Ok(EigenBasis {
            eigvecs: CMatrix::zeros(0, 0),
            eigvals: Vec::new(),
        });
    }
    let sym = (cov + cov.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..d).collect();
    // Stable sort keeps solver order for exact ties; the phase fix below
    // makes each vector canonical.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigvecs = CMatrix::zeros(d, d);
    let mut eigvals = Vec::with_capacity(d);
    for (j, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        canonical_phase(col.as_mut_slice());
        eigvecs.set_column(j, &col);
        let l = eig.eigenvalues[src];
        // Round-off can push null eigenvalues slightly below zero.
        eigvals.push(l.max(0.0));
    }
    Ok(EigenBasis { eigvecs, eigvals })
}

/// Rotates `v` so that its first non-negligible component is real positive.
fn canonical_phase(v: &mut [C64]) {
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|c| c.norm() > 1e-8 * scale) {
        let rot = lead.conj() / lead.norm();
        for c in v.iter_mut() {
            *c *= rot;
        }
    }
}

/// Leading `k` eigenvectors as a `D × k` matrix with unit-norm columns.
pub fn pca_basis(basis: &EigenBasis, k: usize) -> Result<CMatrix> {
    if k > basis.dim() {
        return Err(Error::InvalidArgument(format!(
            "requested {k} principal axes from a {}-dimensional basis",
            basis.dim()
        )));
    }
    Ok(basis.eigvecs.columns(0, k).into_owned())
}

/// Angles in `[0°, 180°)` at a fixed step.
pub fn angle_grid(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0 && step_deg <= 180.0) {
        return Err(Error::InvalidArgument(format!("grid step {step_deg} outside (0, 180]")));
    }
    let n = (180.0 / step_deg - 1e-9).ceil() as usize;
    Ok((0..n).map(|i| i as f64 * step_deg).collect())
}

/// A real-valued function sampled on an ascending angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub grid_deg: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Two-column CSV with header `angle_deg,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "angle_deg,value")?;
        for (a, v) in self.grid_deg.iter().zip(&self.values) {
            writeln!(out, "{a},{v:e}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Hermitian quadratic form `vᴴ R v` (real by construction).
fn quad_form(r: &CMatrix, v: &[C64]) -> f64 {
    let d = v.len();
    let mut acc = 0.0;
    for j in 0..d {
        let mut col = C64::new(0.0, 0.0);
        for i in 0..d {
            col += v[i].conj() * r[(i, j)];
        }
        acc += (col * v[j]).re;
    }
    acc.max(0.0)
}

/// `‖v(π cos Φ)ᴴ Y‖²` over the grid.
pub fn dtft_spectrum(y: &CMatrix, grid_deg: &[f64]) -> SpectrumCurve {
    dtft_spectrum_cov(&sample_covariance(y), grid_deg)
}

/// Same as [`dtft_spectrum`] from a precomputed `Y Yᴴ`.
pub fn dtft_spectrum_cov(cov: &CMatrix, grid_deg: &[f64]) -> SpectrumCurve {
    let d = cov.nrows();
    let values = grid_deg
        .iter()
        .map(|&phi| quad_form(cov, steering_vector(doa_to_omega(phi), d).as_slice()))
        .collect();
    SpectrumCurve {
        grid_deg: grid_deg.to_vec(),
        values,
    }
}

/// `1 / Σ_{d > K_sub} |q_dᴴ v(π cos Φ)|²` over the grid.
pub fn music_pseudospectrum(basis: &EigenBasis, k_sub: usize, grid_deg: &[f64]) -> Result<SpectrumCurve> {
    let d = basis.dim();
    if k_sub == 0 || k_sub >= d {
        return Err(Error::InvalidArgument(format!(
            "MUSIC needs 0 < K_sub < D, got K_sub={k_sub} D={d}"
        )));
    }
    let noise = basis.eigvecs.columns(k_sub, d - k_sub);
    let values = grid_deg
        .iter()
        .map(|&phi| {
            let v = steering_vector(doa_to_omega(phi), d);
            let proj: f64 = (noise.adjoint() * &v).norm_squared();
            1.0 / proj.max(MUSIC_FLOOR)
        })
        .collect();
    Ok(SpectrumCurve {
        grid_deg: grid_deg.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub angle_deg: f64,
    pub height: f64,
}

/// Strict local maxima (boundary points compared with their single
/// neighbour), height-descending, ties toward the smaller angle.
pub fn pick_peaks(curve: &SpectrumCurve, count: usize) -> Result<Vec<Peak>> {
    let v = &curve.values;
    let n = v.len();
    if n == 0 {
        return Err(Error::EmptyCurve);
    }
    let mut peaks: Vec<Peak> = (0..n)
        .filter(|&i| {
            let left = i == 0 || v[i] > v[i - 1];
            let right = i + 1 == n || v[i] > v[i + 1];
            left && right
        })
        .map(|i| Peak {
            angle_deg: curve.grid_deg[i],
            height: v[i],
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.height
            .total_cmp(&a.height)
            .then(a.angle_deg.total_cmp(&b.angle_deg))
    });
    peaks.truncate(count);
    Ok(peaks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionStats {
    /// `‖V A₀‖²`.
    pub s: f64,
    /// `‖Y‖² − s`.
    pub t: f64,
    pub alpha: u64,
    pub beta: u64,
    pub p: f64,
    pub q: f64,
}

impl ProjectionStats {
    /// Builds the statistics from the raw projected energy. `K = 0` keeps
    /// `s = 0`; otherwise both parts are floored at `STAT_FLOOR·‖Y‖²`.
    pub fn from_energy(s_raw: f64, norm2_y: f64, k: usize, d: usize, m: usize) -> Self {
        let floor = STAT_FLOOR * norm2_y;
        let (s, t) = if k == 0 {
            (0.0, norm2_y)
        } else {
            let s = s_raw.clamp(floor, norm2_y);
            (s, (norm2_y - s).max(floor))
        };
        let total = s + t;
        let (p, q) = if total > 0.0 { (s / total, t / total) } else { (0.0, 1.0) };
        Self {
            s,
            t,
            alpha: (k * m) as u64,
            beta: ((d - k) * m) as u64,
            p,
            q,
        }
    }

    pub fn k(&self, m: usize) -> usize {
        self.alpha as usize / m.max(1)
    }
}

/// Orthonormal basis of `span(V)` after checking column rank.
pub fn orthonormal_range(v: &CMatrix) -> Result<CMatrix> {
    let k = v.ncols();
    if k == 0 {
        return Ok(CMatrix::zeros(v.nrows(), 0));
    }
    if k > v.nrows() {
        return Err(Error::InvalidArgument(format!(
            "{k} columns exceed the {} sensors",
            v.nrows()
        )));
    }
    check_rank(v)?;
    Ok(QR::new(v.clone()).q())
}

fn check_rank(v: &CMatrix) -> Result<()> {
    let sv = v.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max > 0.0 && min >= RANK_TOL * max {
        return Ok(());
    }
    let (i, j) = most_collinear_pair(v);
    Err(Error::RankDeficient(i, j))
}

fn most_collinear_pair(v: &CMatrix) -> (usize, usize) {
    let k = v.ncols();
    if k < 2 {
        return (0, 0);
    }
    let mut best = (0, 1, -1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            let (a, b) = (v.column(i), v.column(j));
            let denom = a.norm() * b.norm();
            let cos = if denom > 0.0 { a.dotc(&b).norm() / denom } else { 1.0 };
            if cos > best.2 {
                best = (i, j, cos);
            }
        }
    }
    (best.0, best.1)
}

/// Projection statistics of `Y` onto `span(V)`.
pub fn projection_stats(y: &CMatrix, v: &CMatrix) -> Result<ProjectionStats> {
    Ok(project(y, v)?.0)
}

/// Projection statistics together with `A₀ = V⁺ Y`, solved through a QR
/// factorization `V = Q R`, `A₀ = R⁻¹ Qᴴ Y`.
pub fn project(y: &CMatrix, v: &CMatrix) -> Result<(ProjectionStats, CMatrix)> {
    let (d, m) = y.shape();
    if v.nrows() != d {
        return Err(Error::InvalidArgument(format!(
            "steering matrix has {} rows, data has {d}",
            v.nrows()
        )));
    }
    let k = v.ncols();
    let norm2 = y.norm_squared();
    if k == 0 {
        return Ok((
            ProjectionStats::from_energy(0.0, norm2, 0, d, m),
            CMatrix::zeros(0, m),
        ));
    }
    if k > d {
        return Err(Error::InvalidArgument(format!("{k} columns exceed the {d} sensors")));
    }
    check_rank(v)?;
    let qr = QR::new(v.clone());
    let q = qr.q();
    let r = qr.r();
    let coeff = q.adjoint() * y;
    let s = coeff.norm_squared();
    let a0 = r
        .solve_upper_triangular(&coeff)
        .ok_or(Error::RankDeficient(0, 0))?;
    Ok((ProjectionStats::from_energy(s, norm2, k, d, m), a0))
}

/// Projection statistics from `Y Yᴴ` alone: `s = Tr(Qᴴ (Y Yᴴ) Q)` with `Q` an
/// orthonormal basis of `span(V)`.
pub fn projection_stats_cov(cov: &CMatrix, norm2_y: f64, v: &CMatrix, m: usize) -> Result<ProjectionStats> {
    let d = cov.nrows();
    let k = v.ncols();
    let q = orthonormal_range(v)?;
    let s = if k == 0 { 0.0 } else { (q.adjoint() * cov * &q).trace().re };
    Ok(ProjectionStats::from_energy(s, norm2_y, k, d, m))
}

/// Projection statistics onto the top-`k` eigenvectors: `s = Σ_{d<=k} λ_d`.
pub fn pca_stats(basis: &EigenBasis, norm2_y: f64, k: usize, m: usize) -> ProjectionStats {
    let s: f64 = basis.eigvals[..k].iter().sum();
    ProjectionStats::from_energy(s, norm2_y, k, basis.dim(), m)
}

/// Steering matrix for a list of arrival angles in degrees.
pub fn steering_for_angles(angles_deg: &[f64], sensors: usize) -> CMatrix {
    let omegas: Vec<f64> = angles_deg.iter().map(|&a| doa_to_omega(a)).collect();
    steering_matrix(&omegas, sensors)
}
