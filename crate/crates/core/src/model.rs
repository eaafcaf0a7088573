//! Generative model and risk of a fixed threshold.
//!
//! Each of `m` latent indicators `nu_i` is Bernoulli(p). Coordinate `i`
//! of the observation vector has standard deviation `sigma0` when
//! `nu_i = 0` and `sqrt(sigma0^2 + tau^2)` when `nu_i = 1`; the
//! coordinates share a common equicorrelation `rho`, so conditionally
//! on `nu` the vector is `N(0, D_nu * Sigma2 * D_nu)` with `Sigma2` the
//! equicorrelated correlation matrix. An optional measurement-noise
//! term with scale `eps_sd` and its own equicorrelation `rho1` can be
//! added on top; it defaults to zero.
//!
//! Classifying coordinate `i` as a signal when `|y_i| > C` incurs
//! expected loss
//!
//! `risk(C) = delta0 * m(1-p) * P[|N(0,1)| > C/sigma0]
//!          + deltaA * m p    * P[|N(0,1)| < C/sqrt(sigma0^2+tau^2)]`
//!
//! which depends on the marginals only, not on `rho`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::normal::{abs_normal_tail, Probability};

fn default_one() -> f64 {
    1.0
}

/// Generative and loss parameters.
///
/// Sparsity is given either as an exponent `beta` (then `p = m^-beta`)
/// or as an explicit `p`; exactly one of the two must be set.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Number of hypotheses.
    pub m: usize,
    /// Sparsity exponent in `(0, 1]`; resolves to `p = m^-beta`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Explicit signal probability in `(0, 1)`. Wins over `beta`
    /// resolution rules below when validating: exactly one is allowed.
    #[serde(default)]
    pub p: Option<f64>,
    /// Null variance `sigma0^2`.
    pub sigma0_sq: f64,
    /// Signal variance increment `tau^2` (signals have variance
    /// `sigma0^2 + tau^2`).
    pub tau_sq: f64,
    /// Equicorrelation of the effect covariance.
    pub rho: f64,
    /// False-positive loss weight.
    #[serde(default = "default_one")]
    pub delta0: f64,
    /// False-negative loss weight.
    #[serde(default = "default_one", rename = "deltaA")]
    pub delta_a: f64,
    /// Measurement-noise standard deviation (0 disables the term).
    #[serde(default)]
    pub eps_sd: f64,
    /// Equicorrelation of the measurement noise.
    #[serde(default)]
    pub rho1: f64,
}

impl ModelParams {
    /// Parameters with `p = m^-beta` and unit losses, no noise.
    pub fn with_beta(m: usize, beta: f64, sigma0_sq: f64, tau_sq: f64, rho: f64) -> Result<Self> {
        let params = ModelParams {
            m,
            beta: Some(beta),
            p: None,
            sigma0_sq,
            tau_sq,
            rho,
            delta0: 1.0,
            delta_a: 1.0,
            eps_sd: 0.0,
            rho1: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with an explicit signal probability.
    pub fn with_p(m: usize, p: f64, sigma0_sq: f64, tau_sq: f64, rho: f64) -> Result<Self> {
        let params = ModelParams {
            m,
            beta: None,
            p: Some(p),
            sigma0_sq,
            tau_sq,
            rho,
            delta0: 1.0,
            delta_a: 1.0,
            eps_sd: 0.0,
            rho1: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Lowest admissible equicorrelation for `m` coordinates
    /// (exclusive); the equicorrelated matrix is positive definite for
    /// `rho` in `(-1/(m-1), 1]`.
    pub fn rho_lower_bound(m: usize) -> f64 {
        if m <= 1 {
            f64::NEG_INFINITY
        } else {
            -1.0 / (m as f64 - 1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        match (self.beta, self.p) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid(
                    "sparsity",
                    "both beta and p given; set exactly one",
                ))
            }
            (None, None) => {
                return Err(Error::invalid(
                    "sparsity",
                    "neither beta nor p given; set exactly one",
                ))
            }
            (Some(b), None) => {
                if !b.is_finite() || b <= 0.0 || b > 1.0 {
                    return Err(Error::invalid("beta", format!("{b} is not in (0, 1]")));
                }
            }
            (None, Some(p)) => {
                if !p.is_finite() || p <= 0.0 || p >= 1.0 {
                    return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
                }
            }
        }
        let p = self.resolve_p()?;
        if p <= 0.0 || p >= 1.0 {
            return Err(Error::invalid(
                "sparsity",
                format!("resolved p = {p} is not in (0, 1)"),
            ));
        }
        for (name, v) in [("sigma0_sq", self.sigma0_sq), ("tau_sq", self.tau_sq)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(name, format!("{v} must be > 0")));
            }
        }
        for (name, v) in [("delta0", self.delta0), ("deltaA", self.delta_a)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(name, format!("{v} must be > 0")));
            }
        }
        if !self.eps_sd.is_finite() || self.eps_sd < 0.0 {
            return Err(Error::invalid("eps_sd", "must be >= 0"));
        }
        let lo = Self::rho_lower_bound(self.m);
        for (name, r) in [("rho", self.rho), ("rho1", self.rho1)] {
            if !r.is_finite() || r <= lo || r > 1.0 {
                return Err(Error::invalid(
                    name,
                    format!("{r} outside valid range ({lo}, 1] for m = {}", self.m),
                ));
            }
        }
        Ok(())
    }

    /// Resolve the signal probability: explicit `p` if given, else
    /// `m^-beta`. Errors when both or neither sparsity field is set.
    pub fn resolve_p(&self) -> Result<f64> {
        match (self.beta, self.p) {
            (None, Some(p)) => Ok(p),
            (Some(beta), None) => Ok((self.m as f64).powf(-beta)),
            (Some(_), Some(_)) => Err(Error::invalid("sparsity", "both beta and p given")),
            (None, None) => Err(Error::invalid("sparsity", "neither beta nor p given")),
        }
    }

    /// Standard deviation of a null coordinate.
    pub fn sigma0(&self) -> f64 {
        self.sigma0_sq.sqrt()
    }

    /// Standard deviation of a signal coordinate.
    pub fn sigma_signal(&self) -> f64 {
        (self.sigma0_sq + self.tau_sq).sqrt()
    }
}

/// The latent 0/1 indicator vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalVector {
    pub bits: Vec<bool>,
}

impl SignalVector {
    pub fn new(bits: Vec<bool>) -> Self {
        SignalVector { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of signals.
    pub fn count_signals(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// One simulated realization: the latent indicators and the
/// observation vector.
#[derive(Debug, Clone)]
pub struct TrialSample {
    pub nu: SignalVector,
    pub y: Vec<f64>,
}

/// Per-coordinate error probabilities and the resulting expected loss
/// of a fixed cut.
#[derive(Debug, Clone, Copy)]
pub struct RiskBreakdown {
    /// Probability a null coordinate is rejected: `P[|N(0,1)| > C/sigma0]`.
    pub t11: Probability,
    /// Probability a signal coordinate is missed:
    /// `P[|N(0,1)| < C/sqrt(sigma0^2+tau^2)]`.
    pub t21: Probability,
    /// `m(1-p) * t11`.
    pub expected_fp: f64,
    /// `m p * t21`.
    pub expected_fn: f64,
    /// `delta0 * expected_fp + deltaA * expected_fn`.
    pub risk: f64,
}

/// Ingredients of the closed-form risk approximation
/// `f(C) = (V/C) e^{-a C^2} + U C`.
///
/// `f` is convex on `C > 0` (its derivative is increasing), so for a
/// random threshold `C` independent of the data, `E[f(C)] >= f(E[C])`
/// by Jensen: a deterministic cut at the mean is never worse under the
/// approximation than randomizing around it.
#[derive(Debug, Clone, Copy)]
pub struct ApproxRisk {
    /// Slope of the miss term: `2 deltaA m p / sqrt(2 pi (sigma0^2+tau^2))`.
    pub u: f64,
    /// Scale of the false-positive term: `sigma0 delta0 m (1-p) sqrt(2/pi)`.
    pub v: f64,
    /// Gaussian decay rate `1 / (2 sigma0^2)`.
    pub a: f64,
    /// `f(C)`.
    pub f_of_c: f64,
    /// `f'(C) = U - V e^{-a C^2} (1/C^2 + 2a)`.
    pub fprime_of_c: f64,
}

/// Draw the `m` independent Bernoulli(p) indicators.
pub fn draw_signals<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<SignalVector> {
    params.validate()?;
    let p = params.resolve_p()?;
    let bits = (0..params.m).map(|_| rng.gen::<f64>() < p).collect();
    Ok(SignalVector::new(bits))
}

/// Draw one observation vector conditional on `nu`.
///
/// Uses the spectral form of the equicorrelated root: with
/// `z_1..z_m` i.i.d. standard normal and `zbar` their mean,
///
/// `w_i = sqrt(1-rho) * (z_i - zbar) + sqrt(1 + (m-1) rho) * zbar`
///
/// has exactly the equicorrelated covariance (unit variance, common
/// correlation `rho`) for every admissible `rho`, including negative
/// values, at O(m) cost. The observation is `y_i = sigma_i * w_i`
/// plus an analogous noise term when `eps_sd > 0`.
pub fn draw_observations<R: Rng + ?Sized>(
    params: &ModelParams,
    nu: SignalVector,
    rng: &mut R,
) -> Result<TrialSample> {
    params.validate()?;
    if nu.len() != params.m {
        return Err(Error::LengthMismatch {
            left: nu.len(),
            right: params.m,
        });
    }
    let s0 = params.sigma0();
    let s1 = params.sigma_signal();
    let mut y = equicorrelated_vector(params.m, params.rho, rng);
    for (yi, &sig) in y.iter_mut().zip(&nu.bits) {
        *yi *= if sig { s1 } else { s0 };
    }
    if params.eps_sd > 0.0 {
        let eps = equicorrelated_vector(params.m, params.rho1, rng);
        for (yi, e) in y.iter_mut().zip(eps) {
            *yi += params.eps_sd * e;
        }
    }
    Ok(TrialSample { nu, y })
}

/// `N(0, Sigma)` draw with `Sigma` the m-dimensional equicorrelated
/// correlation matrix.
fn equicorrelated_vector<R: Rng + ?Sized>(m: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let mut z: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    if m == 1 {
        return z;
    }
    let zbar = z.iter().sum::<f64>() / m as f64;
    let lo = (1.0 - rho).max(0.0).sqrt();
    let hi = (1.0 + (m as f64 - 1.0) * rho).max(0.0).sqrt();
    for zi in z.iter_mut() {
        *zi = lo * (*zi - zbar) + hi * zbar;
    }
    z
}

/// Exact expected loss of the fixed cut `|y_i| > C`.
///
/// Valid for any admissible `rho` and `eps_sd = 0`: the expectation is
/// a sum of per-coordinate marginal probabilities.
pub fn exact_risk(params: &ModelParams, c: f64) -> Result<RiskBreakdown> {
    params.validate()?;
    if !c.is_finite() || c < 0.0 {
        return Err(Error::invalid("C", format!("{c} must be finite and >= 0")));
    }
    let p = params.resolve_p()?;
    let m = params.m as f64;
    let t11 = abs_normal_tail(c, params.sigma0())?;
    let t21 = Probability::new_clamped(1.0 - abs_normal_tail(c, params.sigma_signal())?.value());
    let expected_fp = m * (1.0 - p) * t11.value();
    let expected_fn = m * p * t21.value();
    Ok(RiskBreakdown {
        t11,
        t21,
        expected_fp,
        expected_fn,
        risk: params.delta0 * expected_fp + params.delta_a * expected_fn,
    })
}

/// Risk approximation `f(C)` (Mills-ratio upper bound on the null tail,
/// density-at-zero linearization of the miss term) and its derivative.
pub fn approx_risk(params: &ModelParams, c: f64) -> Result<ApproxRisk> {
    params.validate()?;
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::invalid("C", format!("{c} must be finite and > 0")));
    }
    let p = params.resolve_p()?;
    let m = params.m as f64;
    let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
    let u = 2.0 * params.delta_a * m * p
        / (2.0 * std::f64::consts::PI * (params.sigma0_sq + params.tau_sq)).sqrt();
    let v = params.sigma0() * params.delta0 * m * (1.0 - p) * sqrt_2_over_pi;
    let a = 1.0 / (2.0 * params.sigma0_sq);
    let decay = (-a * c * c).exp();
    let f_of_c = v / c * decay + u * c;
    let fprime_of_c = u - v * decay * (1.0 / (c * c) + 2.0 * a);
    Ok(ApproxRisk {
        u,
        v,
        a,
        f_of_c,
        fprime_of_c,
    })
}

/// Closed-form near-optimal cut
///
/// `C = sqrt(2 sigma0^2 * log( delta0(1-p)/(deltaA p) * sqrt(1 + tau^2/sigma0^2) ))`
///
/// obtained by minimizing the approximation `f` after dropping the
/// `1/C^2` term against `2a`. Errors when the log argument is <= 1
/// (dense regime: the approximation has no positive root).
pub fn determined_threshold(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let p = params.resolve_p()?;
    let arg = params.delta0 * (1.0 - p) / (params.delta_a * p)
        * (1.0 + params.tau_sq / params.sigma0_sq).sqrt();
    if arg <= 1.0 || !arg.is_finite() {
        return Err(Error::NoPositiveThreshold(arg));
    }
    Ok((2.0 * params.sigma0_sq * arg.ln()).sqrt())
}
