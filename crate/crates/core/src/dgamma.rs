//! Double gamma and double inverse-gamma distributions.
//!
//! For independent `X ~ Gamma(α, s_x)` and `Y ~ Gamma(β, s_y)` (rate
//! parameterization, integer shapes) the order event `X <= Y` has probability
//! `I_p(α, β)` with `p = s_x / (s_x + s_y)`. Conditioning on that event gives
//! the lower (marginal of `X`) and upper (marginal of `Y`) double gamma laws.
//! Mapping both variables through `x ↦ 1/x` gives the inverse-gamma pair
//! conditioned on `X >= Y`, with the same normalizer.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{ln_gamma_int, ln_reg_inc_beta, ln_reg_inc_gamma_pair};

/// Integer-shape gamma law with density `∝ x^{shape−1} e^{−rate·x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    shape: u64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: u64, rate: f64) -> Result<Self> {
        if shape == 0 {
            return Err(domain("GammaParams", "shape", 0.0));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(domain("GammaParams", "rate", rate));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> u64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape as f64 / self.rate
    }

    /// `ln` of the gamma density at `x > 0`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let n = self.shape as f64;
        n * self.rate.ln() + (n - 1.0) * x.ln() - self.rate * x - ln_gamma_int(self.shape)
    }

    /// `ln` of the inverse-gamma density with the same shape and scale `rate`.
    pub fn ln_inv_pdf(&self, x: f64) -> f64 {
        let n = self.shape as f64;
        n * self.rate.ln() - (n + 1.0) * x.ln() - self.rate / x - ln_gamma_int(self.shape)
    }
}

/// Shapes and rates of an ordered gamma pair together with the dominance
/// probability parameter `p = s_x/(s_x+s_y)` and `q = s_y/(s_x+s_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominancePair {
    pub alpha: u64,
    pub beta: u64,
    pub s_x: f64,
    pub s_y: f64,
    pub p: f64,
    pub q: f64,
}

impl DominancePair {
    pub fn new(alpha: u64, beta: u64, s_x: f64, s_y: f64) -> Result<Self> {
        if alpha == 0 {
            return Err(domain("DominancePair", "alpha", 0.0));
        }
        if beta == 0 {
            return Err(domain("DominancePair", "beta", 0.0));
        }
        if !(s_x > 0.0 && s_x.is_finite()) {
            return Err(domain("DominancePair", "s_x", s_x));
        }
        if !(s_y > 0.0 && s_y.is_finite()) {
            return Err(domain("DominancePair", "s_y", s_y));
        }
        let total = s_x + s_y;
        Ok(Self {
            alpha,
            beta,
            s_x,
            s_y,
            p: s_x / total,
            q: s_y / total,
        })
    }

    pub fn x(&self) -> GammaParams {
        GammaParams {
            shape: self.alpha,
            rate: self.s_x,
        }
    }

    pub fn y(&self) -> GammaParams {
        GammaParams {
            shape: self.beta,
            rate: self.s_y,
        }
    }

    fn ln_normalizer(&self) -> f64 {
        ln_reg_inc_beta(self.p, self.alpha, self.beta).expect("pair shapes validated")
    }
}

/// Which marginal of a conditioned pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gamma,
    InvGamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    X,
    Y,
}

/// `Pr[X <= Y] = I_p(α, β)` for the gamma pair, which is also `Pr[X >= Y]`
/// for the inverse-gamma pair with the same parameters.
pub fn prob_dominance(pair: &DominancePair) -> f64 {
    pair.ln_normalizer().exp()
}

fn check_point(func: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(func, "x", x))
    }
}

/// Density of the lower (`X | X <= Y`) or upper (`Y | X <= Y`) double gamma
/// distribution.
pub fn double_gamma_pdf(x: f64, pair: &DominancePair, which: Branch) -> Result<f64> {
    check_point("double_gamma_pdf", x)?;
    let ln = match which {
        Branch::Lower => {
            // Pr[Y >= x] · Gamma_X(x)
            let (_, ln_upper) = ln_reg_inc_gamma_pair(pair.beta, pair.s_y * x)?;
            ln_upper + pair.x().ln_pdf(x)
        }
        Branch::Upper => {
            // Pr[X <= y] · Gamma_Y(y)
            let (ln_lower, _) = ln_reg_inc_gamma_pair(pair.alpha, pair.s_x * x)?;
            ln_lower + pair.y().ln_pdf(x)
        }
    };
    Ok((ln - pair.ln_normalizer()).exp())
}

/// Density of the upper (`X | X >= Y`) or lower (`Y | X >= Y`) double
/// inverse-gamma distribution, where `X ~ InvGamma(α, s_x)` and
/// `Y ~ InvGamma(β, s_y)`.
pub fn double_invgamma_pdf(x: f64, pair: &DominancePair, which: Branch) -> Result<f64> {
    check_point("double_invgamma_pdf", x)?;
    let ln = match which {
        Branch::Upper => {
            // Pr[Y <= x] · InvGamma_X(x)
            let (_, ln_upper) = ln_reg_inc_gamma_pair(pair.beta, pair.s_y / x)?;
            ln_upper + pair.x().ln_inv_pdf(x)
        }
        Branch::Lower => {
            // Pr[X >= y] · InvGamma_Y(y)
            let (ln_lower, _) = ln_reg_inc_gamma_pair(pair.alpha, pair.s_x / x)?;
            ln_lower + pair.y().ln_inv_pdf(x)
        }
    };
    Ok((ln - pair.ln_normalizer()).exp())
}

/// Closed-form `k`-th moment of a conditioned marginal.
///
/// Gamma family: `E[X^k | X<=Y] = Γ(α+k)/(s_x^k Γ(α)) · I_p(α+k,β)/I_p(α,β)`,
/// symmetrically for `Y` with `I_p(α, β+k)`.
/// Inverse-gamma family: `E[X^k | X>=Y] = Γ(α−k) s_x^k/Γ(α) · I_p(α−k,β)/I_p(α,β)`,
/// which needs `α − k >= 1`.
pub fn double_moment(pair: &DominancePair, k: u32, family: Family, which: Variable) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    let kk = k as u64;
    let (shape, rate) = match which {
        Variable::X => (pair.alpha, pair.s_x),
        Variable::Y => (pair.beta, pair.s_y),
    };
    let shifted = match family {
        Family::Gamma => shape + kk,
        Family::InvGamma => {
            if shape <= kk {
                return Err(Error::MomentUndefined { order: k, shape });
            }
            shape - kk
        }
    };
    let (a, b) = match which {
        Variable::X => (shifted, pair.beta),
        Variable::Y => (pair.alpha, shifted),
    };
    let ln_ratio = ln_reg_inc_beta(pair.p, a, b)? - pair.ln_normalizer();
    let ln_gamma_factor = ln_gamma_int(shifted) - ln_gamma_int(shape);
    let ln_scale = match family {
        Family::Gamma => ln_gamma_factor - k as f64 * rate.ln(),
        Family::InvGamma => ln_gamma_factor + k as f64 * rate.ln(),
    };
    Ok((ln_scale + ln_ratio).exp())
}

/// Draws one independent `(X, Y)` pair and reports whether `X <= Y`.
pub fn sample_dominance_pair<R: Rng + ?Sized>(
    params_x: &GammaParams,
    params_y: &GammaParams,
    rng: &mut R,
) -> (f64, f64, bool) {
    let gx = Gamma::new(params_x.shape as f64, 1.0 / params_x.rate).expect("validated params");
    let gy = Gamma::new(params_y.shape as f64, 1.0 / params_y.rate).expect("validated params");
    let x = gx.sample(rng);
    let y = gy.sample(rng);
    (x, y, x <= y)
}
