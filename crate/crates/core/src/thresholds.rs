//! Rules for producing the classification cut `C`.
//!
//! All data-driven rules are symmetric functions of the coordinate
//! magnitudes `|y_i|`, hence invariant under permutations and sign
//! flips. Ties at the cut always go to the lower group: a coordinate
//! is selected only when `|y_i| > C` strictly.

use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::normal::std_normal_quantile;

/// Defaults for the iterative rule; the stopping cut is not prescribed
/// anywhere, so a conservative pair is fixed here.
pub const DEFAULT_ITER_EPS: f64 = 1e-6;
pub const DEFAULT_ITER_MAX: usize = 1000;

/// Default level for the Poisson-count rule (the median of the
/// approximating distribution).
pub const DEFAULT_POISSON_ALPHA: f64 = 0.5;

/// A tagged threshold rule plus its tuning values.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdMethod {
    /// `(sum |y_i|^beta / m)^(1/beta)`. `T1`, `T2`, `T3` are the
    /// exponents 4, 2, 1.
    PowerMean { beta_exp: f64 },
    /// Two-group mean-split iteration started at the exponent-4 power
    /// mean ("algorithm" in configs and reports).
    Iterative { eps: f64, max_iter: usize },
    /// Closed-form cut from the model parameters alone.
    Determined,
    /// Select the top `round(alpha_frac * m)` magnitudes.
    TopFraction { alpha_frac: f64 },
    /// Select the top `K` magnitudes with `K` from the normal
    /// approximation of a Poisson(m*p) count at level `alpha`.
    PoissonK { alpha: f64 },
    /// A constant cut.
    FixedC { c: f64 },
}

impl ThresholdMethod {
    pub fn t1() -> Self {
        ThresholdMethod::PowerMean { beta_exp: 4.0 }
    }

    pub fn t2() -> Self {
        ThresholdMethod::PowerMean { beta_exp: 2.0 }
    }

    pub fn t3() -> Self {
        ThresholdMethod::PowerMean { beta_exp: 1.0 }
    }

    pub fn iterative_default() -> Self {
        ThresholdMethod::Iterative {
            eps: DEFAULT_ITER_EPS,
            max_iter: DEFAULT_ITER_MAX,
        }
    }

    /// Name used verbatim in config files and CSV output; parameterized
    /// tags carry their tuning value.
    pub fn name(&self) -> String {
        match self {
            ThresholdMethod::PowerMean { beta_exp } => match beta_exp {
                b if *b == 4.0 => "T1".to_string(),
                b if *b == 2.0 => "T2".to_string(),
                b if *b == 1.0 => "T3".to_string(),
                b => format!("power_mean({b})"),
            },
            ThresholdMethod::Iterative { .. } => "algorithm".to_string(),
            ThresholdMethod::Determined => "determined".to_string(),
            ThresholdMethod::TopFraction { alpha_frac } => format!("top_fraction({alpha_frac})"),
            ThresholdMethod::PoissonK { alpha } => format!("poisson_k({alpha})"),
            ThresholdMethod::FixedC { c } => format!("fixed({c})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdMethod::PowerMean { beta_exp } => {
                if !beta_exp.is_finite() || beta_exp <= 0.0 {
                    return Err(Error::invalid("beta_exp", "must be > 0"));
                }
            }
            ThresholdMethod::Iterative { eps, max_iter } => {
                if !eps.is_finite() || eps <= 0.0 {
                    return Err(Error::invalid("eps", "must be > 0"));
                }
                if max_iter == 0 {
                    return Err(Error::invalid("max_iter", "must be >= 1"));
                }
            }
            ThresholdMethod::Determined => {}
            ThresholdMethod::TopFraction { alpha_frac } => {
                if !alpha_frac.is_finite() || alpha_frac <= 0.0 || alpha_frac >= 1.0 {
                    return Err(Error::invalid("alpha_frac", "must be in (0, 1)"));
                }
            }
            ThresholdMethod::PoissonK { alpha } => {
                if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
                    return Err(Error::invalid("alpha", "must be in (0, 1)"));
                }
            }
            ThresholdMethod::FixedC { c } => {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::invalid("c", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }
}

// Config form: either a bare name ("T1", "T2", "T3", "algorithm",
// "determined") or a single-entry object with the tuning value
// ({"top_fraction": 0.25}, {"poisson_k": 0.05}, {"fixed": 2.5},
// {"power_mean": 3.0}, {"algorithm": {"eps": 1e-8, "max_iter": 500}}).
impl<'de> Deserialize<'de> for ThresholdMethod {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct IterSpec {
            eps: f64,
            max_iter: usize,
        }

        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Map(serde_json::Map<String, serde_json::Value>),
        }

        fn number<E: de::Error>(tag: &str, v: &serde_json::Value) -> std::result::Result<f64, E> {
            v.as_f64()
                .ok_or_else(|| E::custom(format!("method {tag:?} expects a number, got {v}")))
        }

        let method = match Raw::deserialize(deserializer)? {
            Raw::Name(name) => match name.as_str() {
                "T1" => ThresholdMethod::t1(),
                "T2" => ThresholdMethod::t2(),
                "T3" => ThresholdMethod::t3(),
                "algorithm" => ThresholdMethod::iterative_default(),
                "determined" => ThresholdMethod::Determined,
                "poisson_k" => ThresholdMethod::PoissonK {
                    alpha: DEFAULT_POISSON_ALPHA,
                },
                other => {
                    return Err(de::Error::custom(format!(
                        "unknown method name {other:?}; expected one of \
                         T1, T2, T3, algorithm, determined, poisson_k, or a tagged object"
                    )))
                }
            },
            Raw::Map(map) => {
                if map.len() != 1 {
                    return Err(de::Error::custom(
                        "method object must have exactly one key",
                    ));
                }
                let (tag, value) = map.iter().next().expect("len checked");
                match tag.as_str() {
                    "power_mean" => ThresholdMethod::PowerMean {
                        beta_exp: number(tag, value)?,
                    },
                    "top_fraction" => ThresholdMethod::TopFraction {
                        alpha_frac: number(tag, value)?,
                    },
                    "poisson_k" => ThresholdMethod::PoissonK {
                        alpha: number(tag, value)?,
                    },
                    "fixed" => ThresholdMethod::FixedC {
                        c: number(tag, value)?,
                    },
                    "algorithm" => {
                        let spec: IterSpec =
                            serde_json::from_value(value.clone()).map_err(de::Error::custom)?;
                        ThresholdMethod::Iterative {
                            eps: spec.eps,
                            max_iter: spec.max_iter,
                        }
                    }
                    other => {
                        return Err(de::Error::custom(format!(
                            "unknown method tag {other:?}"
                        )))
                    }
                }
            }
        };
        method.validate().map_err(de::Error::custom)?;
        Ok(method)
    }
}

/// Record of one run of the mean-split iteration.
#[derive(Debug, Clone)]
pub struct IterativeTrace {
    pub c_final: f64,
    /// Number of accepted updates; the `sequence` holds one more entry
    /// (the starting value).
    pub iterations: usize,
    pub sequence: Vec<f64>,
    pub converged: bool,
}

/// Magnitudes in ascending order; accumulating in this fixed order
/// makes every rule exactly permutation invariant, not just up to
/// rounding.
fn sorted_magnitudes(y: &[f64]) -> Vec<f64> {
    let mut magnitudes: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| a.partial_cmp(b).expect("magnitudes are not NaN"));
    magnitudes
}

/// `(sum |y_i|^beta / m)^(1/beta)`.
pub fn power_mean_threshold(y: &[f64], beta_exp: f64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyInput("power_mean_threshold"));
    }
    if !beta_exp.is_finite() || beta_exp <= 0.0 {
        return Err(Error::invalid("beta_exp", "must be > 0"));
    }
    let sum: f64 = sorted_magnitudes(y)
        .iter()
        .map(|w| w.powf(beta_exp))
        .sum();
    Ok((sum / y.len() as f64).powf(1.0 / beta_exp))
}

/// Two-group mean-split iteration on the magnitudes.
///
/// Starts at the exponent-4 power mean; each step splits `|y|` at the
/// current cut, takes the two group means `a1 <= a2`, and moves the cut
/// to their midpoint. Stops when the cut moves by less than `eps`
/// (converged), after `max_iter` updates, or when a split leaves a
/// group empty (possible only on the first step, e.g. constant data).
pub fn iterative_threshold(y: &[f64], eps: f64, max_iter: usize) -> Result<IterativeTrace> {
    if y.is_empty() {
        return Err(Error::EmptyInput("iterative_threshold"));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::invalid("eps", "must be > 0"));
    }
    let magnitudes = sorted_magnitudes(y);
    let mut z = power_mean_threshold(&magnitudes, 4.0)?;
    let mut sequence = vec![z];
    for step in 0..max_iter {
        let split = magnitudes.partition_point(|&w| w <= z);
        let (lo_n, hi_n) = (split, magnitudes.len() - split);
        let lo_sum: f64 = magnitudes[..split].iter().sum();
        let hi_sum: f64 = magnitudes[split..].iter().sum();
        if lo_n == 0 || hi_n == 0 {
            return Ok(IterativeTrace {
                c_final: z,
                iterations: step,
                sequence,
                converged: false,
            });
        }
        let next = 0.5 * (lo_sum / lo_n as f64 + hi_sum / hi_n as f64);
        let moved = (next - z).abs();
        z = next;
        sequence.push(z);
        if moved < eps {
            return Ok(IterativeTrace {
                c_final: z,
                iterations: step + 1,
                sequence,
                converged: true,
            });
        }
    }
    Ok(IterativeTrace {
        c_final: z,
        iterations: max_iter,
        sequence,
        converged: false,
    })
}

/// A cut selecting exactly `k` coordinates by magnitude (fewer when
/// ties at the boundary make `k` unreachable by a strict cut).
///
/// `k = 0` returns `max |y|`; `k = m` returns the predecessor float of
/// `min |y|` (or 0 when the minimum is 0, since zero magnitudes can
/// never satisfy a strict `>`).
pub fn top_k_threshold(y: &[f64], k: usize) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyInput("top_k_threshold"));
    }
    if k > y.len() {
        return Err(Error::invalid(
            "k",
            format!("{k} exceeds the number of coordinates {}", y.len()),
        ));
    }
    let magnitudes = sorted_magnitudes(y);
    let m = y.len();
    if k == 0 {
        Ok(magnitudes[m - 1])
    } else if k == m {
        let min = magnitudes[0];
        Ok(if min > 0.0 { min.next_down() } else { 0.0 })
    } else {
        Ok(magnitudes[m - 1 - k])
    }
}

/// Expected number of selected coordinates under the marginal model:
/// `m p P[|X| > C/sqrt(sigma0^2+tau^2)] + m (1-p) P[|X| > C/sigma0]`.
pub fn expected_k(params: &ModelParams, c: f64) -> Result<f64> {
    params.validate()?;
    if !c.is_finite() || c < 0.0 {
        return Err(Error::invalid("C", format!("{c} must be finite and >= 0")));
    }
    let p = params.resolve_p()?;
    let m = params.m as f64;
    let signal_hit = crate::normal::abs_normal_tail(c, params.sigma_signal())?.value();
    let null_hit = crate::normal::abs_normal_tail(c, params.sigma0())?.value();
    Ok(m * p * signal_hit + m * (1.0 - p) * null_hit)
}

/// Selection count from the normal approximation of a Poisson(m*p)
/// signal count: `K = max(0, ceil(m p + z_alpha sqrt(m p)))` with
/// `z_alpha` the `(1-alpha)` standard normal quantile.
pub fn poisson_normal_k(params: &ModelParams, alpha: f64) -> Result<usize> {
    params.validate()?;
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::invalid("alpha", "must be in (0, 1)"));
    }
    let p = params.resolve_p()?;
    let mp = params.m as f64 * p;
    if mp <= 0.0 {
        return Err(Error::invalid("m*p", "must be > 0"));
    }
    let z = std_normal_quantile(1.0 - alpha)?;
    let k = (mp + z * mp.sqrt()).ceil();
    Ok(if k < 0.0 { 0 } else { k as usize })
}

/// Dispatch a method to its cut.
///
/// `TopFraction` selects `round(alpha_frac * m)` coordinates;
/// `PoissonK` turns its count into a cut through [`top_k_threshold`]
/// and fails when the count exceeds `m`.
pub fn compute_threshold(
    method: &ThresholdMethod,
    y: &[f64],
    params: &ModelParams,
) -> Result<f64> {
    method.validate()?;
    match *method {
        ThresholdMethod::PowerMean { beta_exp } => power_mean_threshold(y, beta_exp),
        ThresholdMethod::Iterative { eps, max_iter } => {
            Ok(iterative_threshold(y, eps, max_iter)?.c_final)
        }
        ThresholdMethod::Determined => crate::model::determined_threshold(params),
        ThresholdMethod::TopFraction { alpha_frac } => {
            let k = (alpha_frac * params.m as f64).round() as usize;
            top_k_threshold(y, k.min(y.len()))
        }
        ThresholdMethod::PoissonK { alpha } => {
            let k = poisson_normal_k(params, alpha)?;
            top_k_threshold(y, k)
        }
        ThresholdMethod::FixedC { c } => Ok(c),
    }
}
