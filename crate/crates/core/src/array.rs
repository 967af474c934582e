//! Uniform linear array simulation with overlapping multi-tone sources.
//!
//! Sensors sit at half-wavelength spacing, so a far-field source at arrival
//! angle `Φ` drives sensor `d` with phase `e^{jωd}`, `ω = π cos Φ`. Every tone
//! lies on a DFT bin, which makes the frequency-domain model `Y = V_ω A + Z`
//! exact.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use nalgebra::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Everything needed to synthesize one array snapshot set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayScenario {
    /// Sensor count `D`.
    pub sensors: usize,
    /// Tone / FFT-bin count `M`.
    pub bins: usize,
    /// Time samples `N`.
    pub samples: usize,
    /// True arrival angles in degrees, one per source.
    pub doa_deg: Vec<f64>,
    /// Overlap ratio `ϑ` between consecutive source bands.
    pub overlap: f64,
    /// Linear amplitude decay `ψ` across sources.
    pub decay: f64,
    pub snr_db: f64,
    pub seed: u64,
}

impl ArrayScenario {
    pub fn sources(&self) -> usize {
        self.doa_deg.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.sensors == 0 {
            return bad("sensor count must be at least 1".into());
        }
        if self.bins == 0 || self.bins > self.samples {
            return bad(format!(
                "need 1 <= bins <= samples, got bins={} samples={}",
                self.bins, self.samples
            ));
        }
        if let Some(phi) = self.doa_deg.iter().find(|phi| !(0.0..180.0).contains(*phi)) {
            return bad(format!("arrival angle {phi} outside [0, 180)"));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return bad(format!("overlap {} outside [0, 1]", self.overlap));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return bad(format!("decay {} outside [0, 1]", self.decay));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.doa_deg.iter().map(|&phi| doa_to_omega(phi)).collect()
    }

    pub fn steering(&self) -> CMatrix {
        steering_matrix(&self.omegas(), self.sensors)
    }

    pub fn amplitudes(&self) -> AmplitudeMatrix {
        AmplitudeMatrix::banded(self.sources(), self.bins, self.overlap, self.decay)
    }

    /// Frequency-domain noise variance `σ²` per complex entry that realizes
    /// `snr_db` as `max_k σ_k² / σ₀²` with `σ₀² = σ²/D`.
    ///
    /// With no sources the reference per-tone power is taken as 1.
    pub fn noise_variance(&self) -> f64 {
        let reference = if self.sources() == 0 {
            1.0
        } else {
            self.amplitudes().max_source_power()
        };
        let sigma0_sq = reference * 10f64.powf(-self.snr_db / 10.0);
        self.sensors as f64 * sigma0_sq
    }
}

/// Source amplitudes `a_{k,m}`, one row per source, one column per tone.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMatrix(pub CMatrix);

impl AmplitudeMatrix {
    /// Band-indicator amplitudes: source `k` (1-based) occupies the `BW`
    /// bins starting at `m_k = 1 + (k−1)⌈(1−ϑ)BW⌉` with `BW = ⌊M/K⌋`, scaled
    /// by `1 − ψ(k−1)/K`.
    pub fn banded(sources: usize, bins: usize, overlap: f64, decay: f64) -> Self {
        let mut a = CMatrix::zeros(sources, bins);
        if sources == 0 {
            return Self(a);
        }
        let bw = bins / sources;
        let offset = ((1.0 - overlap) * bw as f64).ceil() as usize;
        for k in 0..sources {
            let level = 1.0 - decay * k as f64 / sources as f64;
            let start = k * offset;
            for m in start..(start + bw).min(bins) {
                a[(k, m)] = C64::new(level, 0.0);
            }
        }
        Self(a)
    }

    pub fn sources(&self) -> usize {
        self.0.nrows()
    }

    pub fn bins(&self) -> usize {
        self.0.ncols()
    }

    /// Per-source empirical power `σ_k² = ‖a_k‖²/M`.
    pub fn source_powers(&self) -> Vec<f64> {
        let m = self.bins() as f64;
        self.0
            .row_iter()
            .map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>() / m)
            .collect()
    }

    pub fn max_source_power(&self) -> f64 {
        self.source_powers().into_iter().fold(0.0, f64::max)
    }
}

/// Time-domain array output `X` (`D × N`) and its per-entry noise power `ς²`.
#[derive(Debug, Clone)]
pub struct TimeData {
    pub x: CMatrix,
    pub noise_var: f64,
}

/// Normalized FFT output `Y` (`D × M`) and its per-entry noise power `σ²`.
#[derive(Debug, Clone)]
pub struct FreqData {
    pub y: CMatrix,
    pub noise_var: f64,
}

impl FreqData {
    pub fn sensors(&self) -> usize {
        self.y.nrows()
    }

    pub fn bins(&self) -> usize {
        self.y.ncols()
    }
}

/// `v_d = e^{jωd}` for `d = 1..=D`.
pub fn steering_vector(omega: f64, sensors: usize) -> CVector {
    CVector::from_fn(sensors, |d, _| C64::from_polar(1.0, omega * (d + 1) as f64))
}

pub fn steering_matrix(omegas: &[f64], sensors: usize) -> CMatrix {
    CMatrix::from_fn(sensors, omegas.len(), |d, k| {
        C64::from_polar(1.0, omegas[k] * (d + 1) as f64)
    })
}

/// Spatial angular frequency `π cos Φ`, wrapped into `[−π, π)`.
pub fn doa_to_omega(phi_deg: f64) -> f64 {
    let omega = PI * phi_deg.to_radians().cos();
    if omega >= PI {
        omega - 2.0 * PI
    } else {
        omega
    }
}

/// Default arrival angles `Φ_k = 10° + (k−1)⌊170°/K⌋`.
pub fn default_doas(sources: usize) -> Vec<f64> {
    if sources == 0 {
        return Vec::new();
    }
    let spacing = (170 / sources) as f64;
    (0..sources).map(|k| 10.0 + k as f64 * spacing).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn default_scenario(
    sensors: usize,
    sources: usize,
    bins: usize,
    samples: usize,
    overlap: f64,
    decay: f64,
    snr_db: f64,
    seed: u64,
) -> ArrayScenario {
    ArrayScenario {
        sensors,
        bins,
        samples,
        doa_deg: default_doas(sources),
        overlap,
        decay,
        snr_db,
        seed,
    }
}

/// DFT-bin tone frequencies `γ_m = 2π(m−1)/N`, `m = 1..=M`.
pub fn tone_grid(bins: usize, samples: usize) -> Vec<f64> {
    (0..bins)
        .map(|m| 2.0 * PI * m as f64 / samples as f64)
        .collect()
}

/// Circular complex Gaussian with total variance `var` (half per component).
fn complex_noise<R: Rng + ?Sized>(rows: usize, cols: usize, var: f64, rng: &mut R) -> CMatrix {
    let sd = (0.5 * var).sqrt();
    // Column-major fill order keeps the draw sequence stable.
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(sd * re, sd * im)
    })
}

/// `Y = V_ω A + Z` drawn from the given stream.
pub fn synth_freq_with<R: Rng + ?Sized>(scenario: &ArrayScenario, rng: &mut R) -> Result<FreqData> {
    scenario.validate()?;
    let noise_var = scenario.noise_variance();
    let mut y = complex_noise(scenario.sensors, scenario.bins, noise_var, rng);
    if scenario.sources() > 0 {
        y += scenario.steering() * &scenario.amplitudes().0;
    }
    Ok(FreqData { y, noise_var })
}

/// `Y = V_ω A + Z` seeded from `scenario.seed`.
pub fn synth_freq(scenario: &ArrayScenario) -> Result<FreqData> {
    synth_freq_with(scenario, &mut ChaCha8Rng::seed_from_u64(scenario.seed))
}

/// `X = V_ω A W + E` with on-bin tones `w_{m,t} = e^{jγ_m t}`, `t = 1..=N`,
/// and noise power `ς² = N σ²` so that the reduced noise has power `σ²`.
pub fn synth_time_with<R: Rng + ?Sized>(scenario: &ArrayScenario, rng: &mut R) -> Result<TimeData> {
    scenario.validate()?;
    let n = scenario.samples;
    let noise_var = n as f64 * scenario.noise_variance();
    let mut x = complex_noise(scenario.sensors, n, noise_var, rng);
    if scenario.sources() > 0 {
        let gammas = tone_grid(scenario.bins, n);
        let w = CMatrix::from_fn(scenario.bins, n, |m, t| {
            C64::from_polar(1.0, gammas[m] * (t + 1) as f64)
        });
        x += scenario.steering() * (&scenario.amplitudes().0 * w);
    }
    Ok(TimeData { x, noise_var })
}

pub fn synth_time(scenario: &ArrayScenario) -> Result<TimeData> {
    synth_time_with(scenario, &mut ChaCha8Rng::seed_from_u64(scenario.seed))
}

/// `Y = X Wᴴ / N`: per-bin Fourier sums `y_m = (1/N) Σ_t x_t e^{−jγ_m t}`.
///
/// When the tones are the leading bins of the full DFT grid this runs as one
/// FFT per sensor row.
pub fn fft_reduce(data: &TimeData, tone_freqs: &[f64]) -> FreqData {
    let (d, n) = data.x.shape();
    let bins = tone_freqs.len();
    let on_grid = bins <= n
        && tone_freqs
            .iter()
            .enumerate()
            .all(|(m, &g)| (g - 2.0 * PI * m as f64 / n as f64).abs() < 1e-12);
    let scale = 1.0 / n as f64;
    let mut y = CMatrix::zeros(d, bins);
    if on_grid && n > 0 {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let mut row = vec![C64::new(0.0, 0.0); n];
        for r in 0..d {
            for (t, slot) in row.iter_mut().enumerate() {
                *slot = data.x[(r, t)];
            }
            fft.process(&mut row);
            // The FFT sums from t = 0; samples are indexed from t = 1.
            for (m, &g) in tone_freqs.iter().enumerate() {
                y[(r, m)] = row[m] * C64::from_polar(scale, -g);
            }
        }
    } else {
        for (m, &g) in tone_freqs.iter().enumerate() {
            for t in 0..n {
                let w = C64::from_polar(scale, -g * (t + 1) as f64);
                for r in 0..d {
                    y[(r, m)] += data.x[(r, t)] * w;
                }
            }
        }
    }
    FreqData {
        y,
        noise_var: data.noise_var / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steering_examples() {
        let v = steering_vector(0.0, 4);
        assert!(v.iter().all(|c| (c - C64::new(1.0, 0.0)).norm() < 1e-15));
        let v = steering_vector(PI, 2);
        assert!((v[0] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((steering_vector(0.37, 9).norm_squared() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn doa_mapping() {
        assert!(doa_to_omega(90.0).abs() < 1e-15);
        assert!((doa_to_omega(0.0) + PI).abs() < 1e-15);
        assert!((doa_to_omega(60.0) - PI / 2.0).abs() < 1e-15);
        for phi in [0.0, 0.1, 45.0, 179.99] {
            let w = doa_to_omega(phi);
            assert!((-PI..PI).contains(&w));
        }
    }

    #[test]
    fn default_doas_five_sources() {
        assert_eq!(default_doas(5), vec![10.0, 44.0, 78.0, 112.0, 146.0]);
        assert!(default_doas(0).is_empty());
    }

    #[test]
    fn disjoint_bands_without_overlap() {
        let a = AmplitudeMatrix::banded(5, 4096, 0.0, 0.0);
        for k in 0..5 {
            let row = a.0.row(k);
            let on: Vec<usize> = (0..4096).filter(|&m| row[m].re != 0.0).collect();
            assert_eq!(on.len(), 819);
            assert_eq!(on[0], k * 819);
        }
        for m in 0..4096 {
            let active = (0..5).filter(|&k| a.0[(k, m)].re != 0.0).count();
            assert!(active <= 1);
        }
    }

    #[test]
    fn near_full_overlap_shifts_by_one_bin() {
        let a = AmplitudeMatrix::banded(5, 4096, 0.999, 0.0);
        for k in 0..5 {
            let first = (0..4096).find(|&m| a.0[(k, m)].re != 0.0).unwrap();
            assert_eq!(first, k);
        }
    }

    #[test]
    fn decay_scales_rows() {
        let a = AmplitudeMatrix::banded(4, 40, 0.0, 0.8);
        let powers = a.source_powers();
        for (k, p) in powers.iter().enumerate() {
            let level = 1.0 - 0.8 * k as f64 / 4.0;
            assert!((p - level * level * 10.0 / 40.0).abs() < 1e-15);
        }
    }

    #[test]
    fn snr_zero_db_unit_band_gives_unit_projected_noise() {
        // Each source fills the whole band at unit amplitude: σ_k² = 1.
        let s = ArrayScenario {
            sensors: 8,
            bins: 16,
            samples: 16,
            doa_deg: vec![40.0],
            overlap: 0.0,
            decay: 0.0,
            snr_db: 0.0,
            seed: 0,
        };
        assert!((s.noise_variance() / 8.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_frequency_model_is_exact() {
        let s = default_scenario(6, 2, 8, 8, 0.0, 0.0, 400.0, 3);
        let data = synth_freq(&s).unwrap();
        let clean = s.steering() * &s.amplitudes().0;
        assert!((&data.y - &clean).norm() <= 1e-12 * clean.norm());
    }

    #[test]
    fn single_tone_single_sensor_is_a_complex_exponential() {
        let s = ArrayScenario {
            sensors: 1,
            bins: 1,
            samples: 32,
            doa_deg: vec![90.0],
            overlap: 0.0,
            decay: 0.0,
            snr_db: 500.0,
            seed: 1,
        };
        let x = synth_time(&s).unwrap().x;
        // Bin 0 is DC; ω = 0 at broadside.
        for t in 0..32 {
            assert!((x[(0, t)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn seed_determinism() {
        let s = default_scenario(4, 2, 16, 32, 0.5, 0.0, 0.0, 99);
        let a = synth_freq(&s).unwrap();
        let b = synth_freq(&s).unwrap();
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = default_scenario(4, 2, 16, 32, 0.5, 0.0, 0.0, 99);
        s.bins = 64;
        assert!(s.validate().is_err());
        let mut s = default_scenario(4, 2, 16, 32, 0.5, 0.0, 0.0, 99);
        s.doa_deg[0] = 180.0;
        assert!(s.validate().is_err());
        let s = default_scenario(0, 2, 16, 32, 0.5, 0.0, 0.0, 99);
        assert!(s.validate().is_err());
    }
}
