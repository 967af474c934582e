//! Self-check suite for the incomplete-beta / double-gamma machinery.
//!
//! Every identity that involves `I_p` goes through an injectable function so
//! a deliberately broken implementation can be shown to fail the suite.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dgamma::{
    double_gamma_pdf, double_invgamma_pdf, double_moment, sample_dominance_pair, Branch,
    DominancePair, Family, Variable,
};
use crate::error::Result;
use crate::quadrature::integrate_positive;
use crate::specfun::{ln_beta_density, ln_gamma_int, log_q, reg_inc_beta};

/// `(p, n, m) -> I_p(n, m)`.
pub type IncBetaFn = fn(f64, u64, u64) -> Result<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        Self {
            name,
            max_error,
            tolerance,
            // NaN errors fail.
            passed: max_error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<24} max_error={:<12.3e} tolerance={:<9.1e} {}",
                c.name,
                c.max_error,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Default seed for the Monte Carlo check.
pub const VALIDATION_SEED: u64 = 0x5eed_0001;

/// Shape pairs with dominance rates shared by the pdf and moment checks.
pub const DENSITY_CASES: [(u64, u64, f64, f64); 6] = [
    (3, 2, 1.0, 2.0),
    (5, 4, 2.0, 1.0),
    (2, 6, 0.5, 1.5),
    (8, 3, 1.0, 1.0),
    (4, 4, 3.0, 1.0),
    (6, 10, 2.0, 5.0),
];

/// Ten `(n, m, s, t)` settings for the sampled dominance probability.
pub const MONTE_CARLO_CASES: [(u64, u64, f64, f64); 10] = [
    (1, 1, 1.0, 1.0),
    (1, 2, 0.5, 2.0),
    (2, 1, 2.0, 0.5),
    (2, 3, 1.0, 2.0),
    (3, 5, 0.5, 1.0),
    (5, 3, 2.0, 1.0),
    (5, 8, 1.0, 0.5),
    (8, 5, 0.5, 0.5),
    (8, 8, 2.0, 2.0),
    (3, 8, 1.0, 1.0),
];

pub fn validate_distributions() -> ValidationReport {
    validate_distributions_with(reg_inc_beta, VALIDATION_SEED, 100_000)
}

pub fn validate_distributions_with(ip: IncBetaFn, seed: u64, samples: usize) -> ValidationReport {
    ValidationReport {
        checks: vec![
            complement_identity(ip),
            negbin_partial_sums(ip),
            dominance_monte_carlo(ip, seed, samples),
            log_q_cross_form(ip),
            pdf_normalization(),
            moments_vs_quadrature(),
        ],
    }
}

fn p_grid() -> impl Iterator<Item = f64> {
    (1..=99).map(|i| i as f64 / 100.0)
}

/// `|I_p(n,m) + I_{1−p}(m,n) − 1|` for `n, m <= 64`.
pub fn complement_identity(ip: IncBetaFn) -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in 1..=64 {
        for m in 1..=64 {
            for p in p_grid() {
                let err = match (ip(p, n, m), ip(1.0 - p, m, n)) {
                    (Ok(a), Ok(b)) => (a + b - 1.0).abs(),
                    _ => f64::NAN,
                };
                worst = nan_max(worst, err);
            }
        }
    }
    CheckResult::new("complement_identity", worst, 1e-12)
}

/// Partial sums `Σ_{k=n}^{N} C(k+m−1, k) p^k q^m` never decrease, never
/// exceed `I_p(n, m)` and converge to it.
pub fn negbin_partial_sums(ip: IncBetaFn) -> CheckResult {
    let mut worst: f64 = 0.0;
    for &(n, m) in &[(1u64, 1u64), (2, 5), (5, 2), (7, 7), (12, 30), (30, 12)] {
        for &p in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let target = match ip(p, n, m) {
                Ok(v) => v,
                Err(_) => return CheckResult::new("negbin_partial_sums", f64::NAN, 1e-12),
            };
            let (lp, lq) = (p.ln(), (1.0 - p).ln());
            let mut partial = 0.0;
            let mut k = n;
            loop {
                let ln_term = ln_gamma_int(k + m) - ln_gamma_int(k + 1) - ln_gamma_int(m)
                    + k as f64 * lp
                    + m as f64 * lq;
                let next = partial + ln_term.exp();
                worst = nan_max(worst, (partial - next).max(0.0));
                worst = nan_max(worst, (next - target).max(0.0) / target);
                partial = next;
                if ln_term.exp() < 1e-18 * partial && (k as f64) * p > (m as f64) {
                    break;
                }
                k += 1;
                if k > 100_000 {
                    break;
                }
            }
            worst = nan_max(worst, (target - partial).abs() / target);
        }
    }
    CheckResult::new("negbin_partial_sums", worst, 1e-12)
}

/// Sampled `Pr[X <= Y]` against `I_p`, measured in binomial standard errors.
pub fn dominance_monte_carlo(ip: IncBetaFn, seed: u64, samples: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for &(n, m, s, t) in &MONTE_CARLO_CASES {
        let pair = DominancePair::new(n, m, s, t).expect("fixed valid case");
        let (gx, gy) = (pair.x(), pair.y());
        let hits = (0..samples)
            .filter(|_| sample_dominance_pair(&gx, &gy, &mut rng).2)
            .count();
        let emp = hits as f64 / samples as f64;
        let z = match ip(pair.p, n, m) {
            Ok(exact) => {
                let se = (exact * (1.0 - exact) / samples as f64).sqrt();
                (emp - exact).abs() / se
            }
            Err(_) => f64::NAN,
        };
        worst = nan_max(worst, z);
    }
    CheckResult::new("dominance_monte_carlo", worst, 3.0)
}

/// `exp(log 𝒬) · p · q · B_p(α, β) = I_p(α, β)` for `α, β <= 30`.
pub fn log_q_cross_form(ip: IncBetaFn) -> CheckResult {
    let mut worst: f64 = 0.0;
    for alpha in 1..=30 {
        for beta in 1..=30 {
            for i in 1..=9 {
                let p = i as f64 / 10.0;
                let q = 1.0 - p;
                let err = match (log_q(alpha, beta, q), ln_beta_density(p, alpha, beta), ip(p, alpha, beta)) {
                    (Ok(lq), Ok(lb), Ok(exact)) => {
                        ((lq + lb + p.ln() + q.ln()).exp() - exact).abs() / exact
                    }
                    _ => f64::NAN,
                };
                worst = nan_max(worst, err);
            }
        }
    }
    CheckResult::new("log_q_cross_form", worst, 1e-8)
}

type Density = fn(f64, &DominancePair, Branch) -> Result<f64>;

fn marginals() -> [(Density, Branch); 4] {
    [
        (double_gamma_pdf, Branch::Lower),
        (double_gamma_pdf, Branch::Upper),
        (double_invgamma_pdf, Branch::Lower),
        (double_invgamma_pdf, Branch::Upper),
    ]
}

/// Every conditioned marginal integrates to one.
pub fn pdf_normalization() -> CheckResult {
    let mut worst: f64 = 0.0;
    for &(a, b, sx, sy) in &DENSITY_CASES {
        let pair = DominancePair::new(a, b, sx, sy).expect("fixed valid case");
        for (pdf, branch) in marginals() {
            let q = integrate_positive(|x| pdf(x, &pair, branch).unwrap_or(f64::NAN), 1e-10);
            worst = nan_max(worst, (q.value - 1.0).abs());
        }
    }
    CheckResult::new("pdf_normalization", worst, 1e-6)
}

/// Closed-form first and second moments against quadrature of `x^k f(x)`.
pub fn moments_vs_quadrature() -> CheckResult {
    let mut worst: f64 = 0.0;
    for &(a, b, sx, sy) in &DENSITY_CASES {
        let pair = DominancePair::new(a, b, sx, sy).expect("fixed valid case");
        let cases = [
            (Family::Gamma, Variable::X, double_gamma_pdf as Density, Branch::Lower),
            (Family::Gamma, Variable::Y, double_gamma_pdf, Branch::Upper),
            (Family::InvGamma, Variable::X, double_invgamma_pdf, Branch::Upper),
            (Family::InvGamma, Variable::Y, double_invgamma_pdf, Branch::Lower),
        ];
        for (family, which, pdf, branch) in cases {
            let shape = match which {
                Variable::X => a,
                Variable::Y => b,
            };
            for k in 1..=2u32 {
                if family == Family::InvGamma && shape <= k as u64 {
                    continue;
                }
                let exact = match double_moment(&pair, k, family, which) {
                    Ok(v) => v,
                    Err(_) => {
                        worst = f64::NAN;
                        continue;
                    }
                };
                let quad = integrate_positive(
                    |x| x.powi(k as i32) * pdf(x, &pair, branch).unwrap_or(f64::NAN),
                    1e-12 * exact.max(1.0),
                );
                worst = nan_max(worst, (quad.value - exact).abs() / exact);
            }
        }
    }
    CheckResult::new("moments_vs_quadrature", worst, 1e-6)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
