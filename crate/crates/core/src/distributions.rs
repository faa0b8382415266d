//! Jump laws `ξ`, the limit laws `Z_α`, and their samplers, tails and
//! moments.
//!
//! Exemplar jump law per regime:
//!
//! | regime | exemplar | tail |
//! |--------|----------|------|
//! | A | `Gamma(k)`, `Exponential`, `Pareto(a > 2)` | light / finite variance |
//! | B | `Pareto(2)` | `E[ξ² 1{ξ ≤ t}] = 2 log t` |
//! | C | `Pareto(a)`, `a ∈ (1, 2)` | `t^{-a}` |
//! | D | `PositiveStable(a)`, `Pareto(a)`, `a ∈ (0, 1)`; `LogPareto` (`α = 0`) | `t^{-a} ℓ(t)` |

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::rng::{draw_batched, SeedSpec};
use crate::special::{erf, erfc, erfc_inv, gamma, ln_gamma, reg_lower_gamma, reg_upper_gamma, std_normal_cdf};

pub use crate::special::mittag_leffler as mittag_leffler_fn;

/// Number of draws held by an empirical limit-law CDF.
pub const EMPIRICAL_CACHE_SIZE: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum JumpFamily {
    /// Gamma with the given shape and unit rate.
    Gamma { shape: f64 },
    /// Unit-mean exponential.
    Exponential,
    /// Pareto with minimum 1: `P{ξ > t} = t^{-index}` for `t ≥ 1`.
    Pareto { index: f64 },
    /// One-sided stable law with Laplace transform `exp(-s^index)`.
    PositiveStable { index: f64 },
    /// Slowly varying tail `P{ξ > t} = 1/(1 + log t)` for `t ≥ 1`.
    LogPareto,
}

/// The slowly varying factor `ℓ` attached to a jump law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowlyVarying {
    Constant(f64),
    /// `ℓ(t) = 2 log t`
    TwoLog,
    /// `ℓ(t) = 1/(1 + log t)`
    InverseLog,
}

impl SlowlyVarying {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::TwoLog => 2.0 * t.ln(),
            SlowlyVarying::InverseLog => 1.0 / (1.0 + t.ln()),
        }
    }
}

/// Full analytic description of a jump law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpSpec {
    family: JumpFamily,
    regime: Regime,
    alpha: f64,
    mean: f64,
    variance: f64,
    ell: Option<SlowlyVarying>,
    exact_convolution: bool,
}

impl JumpSpec {
    pub fn new(family: JumpFamily) -> Result<Self> {
        let spec = match family {
            JumpFamily::Gamma { shape } => {
                if !(shape > 0.0 && shape.is_finite()) {
                    return Err(Error::param(format!("gamma shape must be positive, got {shape}")));
                }
                JumpSpec {
                    family,
                    regime: Regime::A,
                    alpha: 2.0,
                    mean: shape,
                    variance: shape,
                    ell: None,
                    exact_convolution: true,
                }
            }
            JumpFamily::Exponential => JumpSpec {
                family,
                regime: Regime::A,
                alpha: 2.0,
                mean: 1.0,
                variance: 1.0,
                ell: None,
                exact_convolution: true,
            },
            JumpFamily::Pareto { index: a } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::param(format!("Pareto index must be positive, got {a}")));
                }
                if a == 1.0 {
                    return Err(Error::param("Pareto index 1 (tail index α = 1) is not supported"));
                }
                let mean = if a > 1.0 { a / (a - 1.0) } else { f64::INFINITY };
                let (regime, alpha, variance, ell) = if a > 2.0 {
                    (Regime::A, 2.0, a / ((a - 1.0).powi(2) * (a - 2.0)), None)
                } else if a == 2.0 {
                    (Regime::B, 2.0, f64::INFINITY, Some(SlowlyVarying::TwoLog))
                } else if a > 1.0 {
                    (Regime::C, a, f64::INFINITY, Some(SlowlyVarying::Constant(1.0)))
                } else {
                    (Regime::D, a, f64::INFINITY, Some(SlowlyVarying::Constant(1.0)))
                };
                JumpSpec {
                    family,
                    regime,
                    alpha,
                    mean,
                    variance,
                    ell,
                    exact_convolution: false,
                }
            }
            JumpFamily::PositiveStable { index: a } => {
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::param(format!("positive stable index must lie in (0, 1), got {a}")));
                }
                JumpSpec {
                    family,
                    regime: Regime::D,
                    alpha: a,
                    mean: f64::INFINITY,
                    variance: f64::INFINITY,
                    ell: Some(SlowlyVarying::Constant(1.0 / gamma(1.0 - a))),
                    exact_convolution: true,
                }
            }
            JumpFamily::LogPareto => JumpSpec {
                family,
                regime: Regime::D,
                alpha: 0.0,
                mean: f64::INFINITY,
                variance: f64::INFINITY,
                ell: Some(SlowlyVarying::InverseLog),
                exact_convolution: false,
            },
        };
        Ok(spec)
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        Self::new(JumpFamily::Gamma { shape })
    }

    pub fn exponential() -> Self {
        Self::new(JumpFamily::Exponential).expect("exponential law is always valid")
    }

    pub fn pareto(index: f64) -> Result<Self> {
        Self::new(JumpFamily::Pareto { index })
    }

    pub fn positive_stable(index: f64) -> Result<Self> {
        Self::new(JumpFamily::PositiveStable { index })
    }

    pub fn log_pareto() -> Self {
        Self::new(JumpFamily::LogPareto).expect("log-Pareto law is always valid")
    }

    pub fn family(&self) -> JumpFamily {
        self.family
    }
    pub fn regime(&self) -> Regime {
        self.regime
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    pub fn variance(&self) -> f64 {
        self.variance
    }
    pub fn slowly_varying(&self) -> Option<SlowlyVarying> {
        self.ell
    }
    pub fn exact_convolution(&self) -> bool {
        self.exact_convolution
    }

    /// Every draw is at least 1 (Pareto-type families with minimum 1).
    pub fn min_one(&self) -> bool {
        matches!(self.family, JumpFamily::Pareto { .. } | JumpFamily::LogPareto)
    }

    /// Analytic `(mean, variance)`; `+∞` marks a divergent moment.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean, self.variance)
    }

    /// One draw from the law of `ξ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            JumpFamily::Gamma { shape } => sample_gamma(shape, rng),
            JumpFamily::Exponential => Exp1.sample(rng),
            JumpFamily::Pareto { index } => pareto_inverse_cdf(index, rng.sample(Open01)),
            JumpFamily::PositiveStable { index } => sample_positive_stable(index, rng),
            JumpFamily::LogPareto => {
                let u: f64 = rng.sample(Open01);
                (1.0 / u - 1.0).exp()
            }
        }
    }

    /// One draw from the law of `S_n = ξ_1 + … + ξ_n` using the closed
    /// convolution. Only for families with `exact_convolution`.
    pub fn sample_partial_sum<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<f64> {
        let nf = n as f64;
        match self.family {
            JumpFamily::Gamma { shape } => Ok(sample_gamma(shape * nf, rng)),
            JumpFamily::Exponential => Ok(sample_gamma(nf, rng)),
            JumpFamily::PositiveStable { index } => Ok(nf.powf(1.0 / index) * sample_positive_stable(index, rng)),
            _ => Err(Error::param(format!("{:?} has no closed-form convolution", self.family))),
        }
    }

    /// `P{ξ > t}`.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self.family {
            JumpFamily::Gamma { shape } => reg_upper_gamma(shape, t),
            JumpFamily::Exponential => (-t).exp(),
            JumpFamily::Pareto { index } => {
                if t < 1.0 {
                    1.0
                } else {
                    t.powf(-index)
                }
            }
            JumpFamily::PositiveStable { index } => positive_stable_tail(index, t),
            JumpFamily::LogPareto => {
                if t < 1.0 {
                    1.0
                } else {
                    1.0 / (1.0 + t.ln())
                }
            }
        }
    }

    /// `P{ξ ≤ t}`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.family {
            JumpFamily::Gamma { shape } => reg_lower_gamma(shape, t),
            JumpFamily::Exponential => -(-t).exp_m1(),
            JumpFamily::PositiveStable { index } => positive_stable_cdf(index, t),
            _ => 1.0 - self.tail(t),
        }
    }

    /// `P{S_n ≤ x}` from the closed convolution.
    pub fn partial_sum_cdf(&self, n: u64, x: f64) -> Result<f64> {
        let nf = n as f64;
        match self.family {
            JumpFamily::Gamma { shape } => Ok(reg_lower_gamma(shape * nf, x)),
            JumpFamily::Exponential => Ok(reg_lower_gamma(nf, x)),
            JumpFamily::PositiveStable { index } => Ok(positive_stable_cdf(index, x / nf.powf(1.0 / index))),
            _ => Err(Error::param(format!("{:?} has no closed-form convolution", self.family))),
        }
    }

    /// Short tag used by the CLI and in reports.
    pub fn label(&self) -> String {
        match self.family {
            JumpFamily::Gamma { shape } => format!("gamma({shape})"),
            JumpFamily::Exponential => "exp".to_string(),
            JumpFamily::Pareto { index } => format!("pareto({index})"),
            JumpFamily::PositiveStable { index } => format!("stable({index})"),
            JumpFamily::LogPareto => "logpareto".to_string(),
        }
    }
}

fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("validated gamma shape").sample(rng)
}

/// Inverse CDF of Pareto(`index`, 1): `u^{-1/index}`.
pub fn pareto_inverse_cdf(index: f64, u: f64) -> f64 {
    u.powf(-1.0 / index)
}

/// Kanter's function `A(φ)` for the one-sided stable law of index `a`:
/// `ξ =_d (A(U)/E)^{(1-a)/a}` with `U ~ Unif(0, π)`, `E ~ Exp(1)`.
fn kanter_a(a: f64, phi: f64) -> f64 {
    let s_a = (a * phi).sin();
    (s_a / phi.sin()).powf(1.0 / (1.0 - a)) * ((1.0 - a) * phi).sin() / s_a
}

/// One draw with Laplace transform `exp(-s^a)`, `a ∈ (0, 1)`.
pub fn sample_positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let e: f64 = Exp1.sample(rng);
    (kanter_a(a, PI * u) / e).powf((1.0 - a) / a)
}

fn stable_quad() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    }
}

/// `P{ξ ≤ x}` for the one-sided stable law: closed Lévy form at `a = 1/2`,
/// the large-`x` series where it applies, otherwise
/// `(1/π)∫_0^π exp(-A(φ) x^{-a/(1-a)}) dφ` (absolute error below 1e-10).
pub fn positive_stable_cdf(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if a == 0.5 {
        return erfc(0.5 / x.sqrt());
    }
    if let Some(tail) = stable_tail_series(a, x) {
        return 1.0 - tail;
    }
    let p = x.powf(-a / (1.0 - a));
    integrate(|phi| (-kanter_a(a, phi) * p).exp(), 0.0, PI, &stable_quad())
        .map(|r| (r.value / PI).clamp(0.0, 1.0))
        .unwrap_or(f64::NAN)
}

/// `P{ξ > x}` for the one-sided stable law, computed without cancellation.
pub fn positive_stable_tail(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if a == 0.5 {
        return erf(0.5 / x.sqrt());
    }
    stable_tail_series(a, x).unwrap_or_else(|| stable_tail_quad(a, x))
}

fn stable_tail_quad(a: f64, x: f64) -> f64 {
    let p = x.powf(-a / (1.0 - a));
    integrate(|phi| -(-kanter_a(a, phi) * p).exp_m1(), 0.0, PI, &stable_quad())
        .map(|r| (r.value / PI).clamp(0.0, 1.0))
        .unwrap_or(f64::NAN)
}

/// Largest `x^{-a}` at which the large-`x` series is used; below it the
/// terms shrink at least geometrically and the first term dominates.
const STABLE_SERIES_MAX_Y: f64 = 0.25;

/// `P{ξ > x} = (1/π) Σ_{k≥1} (-1)^{k+1} Γ(ak) sin(πak) x^{-ak} / k!`.
///
/// Convergent for every `x > 0` when `a < 1`; used where `x^{-a}` is small,
/// because there the Kanter integrand is concentrated in a sliver near
/// `φ = π` that adaptive quadrature can miss.
fn stable_tail_series(a: f64, x: f64) -> Option<f64> {
    let ln_y = -a * x.ln();
    if ln_y > STABLE_SERIES_MAX_Y.ln() {
        return None;
    }
    let mut sum = 0.0;
    for k in 1..200u32 {
        let kf = f64::from(k);
        let mag = (ln_gamma(a * kf) - ln_gamma(kf + 1.0) + kf * ln_y).exp();
        let term = mag * (PI * a * kf).sin();
        sum += if k % 2 == 1 { term } else { -term };
        if mag < 1e-17 * sum.abs() {
            return Some((sum / PI).clamp(0.0, 1.0));
        }
    }
    None
}

/// Scale `σ` of the spectrally negative limit in the `S1(α, β = -1, σ, 0)`
/// parameterization.
///
/// The characteristic exponent `|v|^α K (cos(πα/2) + i sin(πα/2) sign v)`,
/// `K = Γ(2-α)/(α-1)`, equals `-σ^α |v|^α (1 - iβ tan(πα/2) sign v)` with
/// `σ^α = -K cos(πα/2)` and `β = -1`.
pub fn spectral_negative_scale(alpha: f64) -> f64 {
    let k = gamma(2.0 - alpha) / (alpha - 1.0);
    (-k * (PI * alpha / 2.0).cos()).powf(1.0 / alpha)
}

/// Chambers–Mallows–Stuck draw from `S1(α, β, σ, 0)`, `α ≠ 1`.
pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, beta: f64, scale: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    let w: f64 = Exp1.sample(rng);
    let zeta = beta * (PI * alpha / 2.0).tan();
    let b = zeta.atan() / alpha;
    let s = (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha));
    let x = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
    scale * x
}

/// `E[exp(i v Z_α)]` of the spectrally negative α-stable limit, `α ∈ (1, 2)`.
pub fn char_fn_spectral_neg(alpha: f64, v: f64) -> Complex64 {
    if v == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let k = v.abs().powf(alpha) * gamma(2.0 - alpha) / (alpha - 1.0);
    let half = PI * alpha / 2.0;
    let exponent = Complex64::new(k * half.cos(), k * half.sin() * v.signum());
    exponent.exp()
}

/// `E[Z_α^n] = n! / (Γ(1-α)^n Γ(1+αn))` of the Mittag-Leffler limit.
pub fn ml_moment(alpha: f64, n: u32) -> f64 {
    let nf = n as f64;
    (ln_gamma(nf + 1.0) - nf * ln_gamma(1.0 - alpha) - ln_gamma(1.0 + alpha * nf)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CdfProvider {
    ClosedForm,
    /// Ascending sample from [`LimitLaw::sample`].
    EmpiricalCache { sample: Vec<f64> },
}

/// The limit law `Z_α` of the first-passage time in one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitLaw {
    regime: Regime,
    alpha: f64,
    provider: CdfProvider,
    scale_note: String,
}

impl LimitLaw {
    /// Builds the law; an empirical cache of [`EMPIRICAL_CACHE_SIZE`] draws
    /// from `seed` is created when no closed-form CDF is available.
    pub fn new(regime: Regime, alpha: f64, seed: SeedSpec, workers: usize) -> Result<Self> {
        let closed = Self::has_closed_form(regime, alpha);
        match regime {
            Regime::A | Regime::B if alpha != 2.0 => {
                return Err(Error::param(format!("regimes A/B have α = 2, got {alpha}")))
            }
            Regime::C if !(alpha > 1.0 && alpha < 2.0) => {
                return Err(Error::param(format!("regime C needs α ∈ (1, 2), got {alpha}")))
            }
            Regime::D if !(0.0..1.0).contains(&alpha) => {
                return Err(Error::param(format!("regime D needs α ∈ [0, 1), got {alpha}")))
            }
            _ => {}
        }
        let scale_note = match regime {
            Regime::A | Regime::B => "standard normal".to_string(),
            Regime::C => format!(
                "spectrally negative stable, S1(alpha={alpha}, beta=-1, scale={:.17e}, loc=0)",
                spectral_negative_scale(alpha)
            ),
            Regime::D if alpha == 0.0 => "unit-mean exponential".to_string(),
            Regime::D => format!("Mittag-Leffler: Z = S^(-alpha)/Gamma(1-alpha), S with Laplace exp(-s^alpha), alpha={alpha}"),
        };
        let mut law = LimitLaw {
            regime,
            alpha,
            provider: CdfProvider::ClosedForm,
            scale_note,
        };
        if !closed {
            let mut sample = draw_batched(seed, EMPIRICAL_CACHE_SIZE, workers, |rng| law.sample(rng))?;
            sample.sort_by(f64::total_cmp);
            law.scale_note
                .push_str(&format!("; empirical cache M={EMPIRICAL_CACHE_SIZE}, seed={}", seed.master_seed));
            law.provider = CdfProvider::EmpiricalCache { sample };
        }
        Ok(law)
    }

    /// Forces an empirical CDF even when a closed form exists (used to
    /// cross-check the two routes).
    pub fn empirical(regime: Regime, alpha: f64, seed: SeedSpec, workers: usize) -> Result<Self> {
        let mut law = Self::new(regime, alpha, seed, workers)?;
        if law.provider == CdfProvider::ClosedForm {
            let mut sample = draw_batched(seed, EMPIRICAL_CACHE_SIZE, workers, |rng| law.sample(rng))?;
            sample.sort_by(f64::total_cmp);
            law.scale_note
                .push_str(&format!("; empirical cache M={EMPIRICAL_CACHE_SIZE}, seed={}", seed.master_seed));
            law.provider = CdfProvider::EmpiricalCache { sample };
        }
        Ok(law)
    }

    /// The limit law matching a jump law's regime and index.
    pub fn for_spec(spec: &JumpSpec, seed: SeedSpec, workers: usize) -> Result<Self> {
        Self::new(spec.regime(), spec.alpha(), seed, workers)
    }

    pub fn has_closed_form(regime: Regime, alpha: f64) -> bool {
        match regime {
            Regime::A | Regime::B => true,
            Regime::C => false,
            Regime::D => alpha == 0.0 || alpha == 0.5,
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn provider(&self) -> &CdfProvider {
        &self.provider
    }
    pub fn scale_note(&self) -> &str {
        &self.scale_note
    }

    /// One draw of `Z_α`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.regime {
            Regime::A | Regime::B => StandardNormal.sample(rng),
            Regime::C => sample_stable(self.alpha, -1.0, spectral_negative_scale(self.alpha), rng),
            Regime::D => sample_mittag_leffler(self.alpha, rng),
        }
    }

    /// `P{Z_α ≤ y}`.
    pub fn cdf(&self, y: f64) -> f64 {
        match &self.provider {
            CdfProvider::EmpiricalCache { sample } => {
                sample.partition_point(|&z| z <= y) as f64 / sample.len() as f64
            }
            CdfProvider::ClosedForm => match self.regime {
                Regime::A | Regime::B => std_normal_cdf(y),
                Regime::D if y <= 0.0 => 0.0,
                Regime::D if self.alpha == 0.0 => -(-y).exp_m1(),
                Regime::D => erf(y * PI.sqrt() / 2.0),
                Regime::C => unreachable!("regime C has no closed-form CDF"),
            },
        }
    }

    /// `P{Z_α > y}`, without cancellation for closed forms.
    pub fn tail(&self, y: f64) -> f64 {
        match (&self.provider, self.regime) {
            (CdfProvider::ClosedForm, Regime::D) if y <= 0.0 => 1.0,
            (CdfProvider::ClosedForm, Regime::D) if self.alpha == 0.0 => (-y).exp(),
            (CdfProvider::ClosedForm, Regime::D) => erfc(y * PI.sqrt() / 2.0),
            (CdfProvider::ClosedForm, _) => std_normal_cdf(-y),
            _ => 1.0 - self.cdf(y),
        }
    }

    /// A point `y` with `P{Z_α > y} < eps` (the largest cached draw for
    /// empirical CDFs).
    pub fn upper_cutoff(&self, eps: f64) -> f64 {
        match &self.provider {
            CdfProvider::EmpiricalCache { sample } => *sample.last().expect("nonempty cache"),
            CdfProvider::ClosedForm => match self.regime {
                Regime::A | Regime::B => std::f64::consts::SQRT_2 * erfc_inv(2.0 * eps) * 1.0001,
                Regime::D if self.alpha == 0.0 => -(eps.ln()) * 1.0001,
                Regime::D => 2.0 * erfc_inv(eps) / PI.sqrt() * 1.0001,
                Regime::C => unreachable!("regime C has no closed-form CDF"),
            },
        }
    }
}

/// `Z_α = S^{-α}/Γ(1-α)` with `S` one-sided stable of index `α`; unit
/// exponential at `α = 0`.
pub fn sample_mittag_leffler<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 0.0 {
        return Exp1.sample(rng);
    }
    sample_positive_stable(alpha, rng).powf(-alpha) / gamma(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_tail_series_matches_quadrature_and_levy() {
        for &a in &[0.2, 0.35, 0.5, 0.7, 0.886, 0.95] {
            for &y in &[0.249, 0.2, 0.15] {
                let x = f64::powf(y, -1.0 / a);
                let s = stable_tail_series(a, x).unwrap();
                let q = stable_tail_quad(a, x);
                assert!((s / q - 1.0).abs() < 1e-8, "a={a} x={x} series={s} quad={q}");
            }
        }
        for &x in &[20.0, 1e3, 1e8] {
            let s = stable_tail_series(0.5, x).unwrap();
            assert!((s / erf(0.5 / f64::sqrt(x)) - 1.0).abs() < 1e-13);
        }
        // leading term x^{-a}/Γ(1-a) far out
        let x = 1e12;
        let s = stable_tail_series(0.886, x).unwrap();
        assert!((s * gamma(1.0 - 0.886) * x.powf(0.886) - 1.0).abs() < 1e-9);
    }
    use crate::rng::SeedSpec;
    use crate::verify::{ks_critical_value, ks_statistic};

    fn draws(n: usize, seed: u64, f: impl Fn(&mut crate::rng::Stream) -> f64 + Sync) -> Vec<f64> {
        let mut v = draw_batched(SeedSpec::new(seed), n, 4, f).unwrap();
        v.sort_by(f64::total_cmp);
        v
    }

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn parameter_errors() {
        assert!(JumpSpec::gamma(0.0).is_err());
        assert!(JumpSpec::gamma(-1.0).is_err());
        assert!(JumpSpec::pareto(0.0).is_err());
        assert!(JumpSpec::pareto(-0.5).is_err());
        assert!(JumpSpec::pareto(1.0).is_err());
        assert!(JumpSpec::positive_stable(1.0).is_err());
        assert!(JumpSpec::positive_stable(0.0).is_err());
    }

    #[test]
    fn regimes_and_invariants() {
        let g = JumpSpec::gamma(0.5).unwrap();
        assert_eq!(g.regime(), Regime::A);
        assert!(g.exact_convolution());
        assert_eq!(JumpSpec::pareto(2.0).unwrap().regime(), Regime::B);
        assert_eq!(JumpSpec::pareto(1.5).unwrap().regime(), Regime::C);
        assert_eq!(JumpSpec::pareto(0.5).unwrap().regime(), Regime::D);
        assert_eq!(JumpSpec::pareto(3.0).unwrap().regime(), Regime::A);
        assert!(!JumpSpec::pareto(1.5).unwrap().exact_convolution());
        let s = JumpSpec::positive_stable(0.3).unwrap();
        assert_eq!(s.regime(), Regime::D);
        assert!(s.exact_convolution());
        assert_eq!(JumpSpec::log_pareto().alpha(), 0.0);
    }

    #[test]
    fn pareto_inverse_cdf_value() {
        assert!((pareto_inverse_cdf(1.5, 0.5) - 1.587_401_051_968_199_4).abs() < 1e-12);
    }

    #[test]
    fn pareto_samples_at_least_one_and_match_tail() {
        let spec = JumpSpec::pareto(1.5).unwrap();
        let xs = draws(100_000, 1, |r| spec.sample(r));
        assert!(xs[0] >= 1.0);
        let (d, _) = ks_statistic(&xs, |t| spec.cdf(t)).unwrap();
        assert!(d < ks_critical_value(xs.len(), 0.01), "D = {d}");
    }

    #[test]
    fn jump_tail_examples() {
        let specs = [
            JumpSpec::exponential(),
            JumpSpec::gamma(2.0).unwrap(),
            JumpSpec::pareto(1.5).unwrap(),
            JumpSpec::positive_stable(0.5).unwrap(),
            JumpSpec::positive_stable(0.3).unwrap(),
            JumpSpec::log_pareto(),
        ];
        for s in &specs {
            assert_eq!(s.tail(0.0), 1.0, "{}", s.label());
        }
        assert!((JumpSpec::pareto(1.5).unwrap().tail(4.0) - 0.125).abs() < 1e-15);
        assert!((JumpSpec::exponential().tail(1.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn jump_tail_monotone_on_grid() {
        let specs = [
            JumpSpec::exponential(),
            JumpSpec::gamma(0.5).unwrap(),
            JumpSpec::gamma(3.0).unwrap(),
            JumpSpec::pareto(2.0).unwrap(),
            JumpSpec::pareto(0.5).unwrap(),
            JumpSpec::positive_stable(0.5).unwrap(),
            JumpSpec::positive_stable(0.75).unwrap(),
            JumpSpec::log_pareto(),
        ];
        for s in &specs {
            let mut prev = 1.0;
            for i in 0..400 {
                let t = 1e-3 * 1.05f64.powi(i);
                let v = s.tail(t);
                assert!(v <= prev + 1e-12, "{} not monotone at {t}", s.label());
                assert!((0.0..=1.0).contains(&v));
                prev = v;
            }
            assert!(s.tail(1e300) < 1e-2, "{}", s.label());
        }
    }

    #[test]
    fn stable_integral_cdf_matches_levy_closed_form() {
        // a = 1/2 through the generic integral route vs erfc(1/(2√x))
        let a = 0.5f64;
        for &x in &[0.05f64, 0.3, 1.0, 4.0, 50.0, 1e4] {
            let p = x.powf(-a / (1.0 - a));
            let r = integrate(|phi| (-kanter_a(a, phi) * p).exp(), 0.0, PI, &stable_quad()).unwrap();
            assert!((r.value / PI - erfc(0.5 / x.sqrt())).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn jump_moments_examples() {
        assert_eq!(JumpSpec::gamma(1.0).unwrap().moments(), (1.0, 1.0));
        let (m, v) = JumpSpec::pareto(1.5).unwrap().moments();
        assert!((m - 3.0).abs() < 1e-15);
        assert!(v.is_infinite());
        let (m, v) = JumpSpec::pareto(0.5).unwrap().moments();
        assert!(m.is_infinite() && v.is_infinite());
        // ρ-family: μ = σ² = 2/ρ
        for rho in [1.0, 2.0, 4.0] {
            let (m, v) = JumpSpec::gamma(2.0 / rho).unwrap().moments();
            assert_eq!(m, 2.0 / rho);
            assert_eq!(v, 2.0 / rho);
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let xs = draws(1_000_000, 3, |r| JumpSpec::exponential().sample(r));
        let (m, se) = mean_se(&xs);
        assert!(xs[0] >= 0.0);
        assert!((m - 1.0).abs() < 3.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn stable_half_median() {
        // oracle: bisection on erfc(1/(2√x)) = 1/2
        let (mut lo, mut hi) = (0.1f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if erfc(0.5 / mid.sqrt()) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let median_oracle = 0.5 * (lo + hi);
        assert!((median_oracle - 1.0990).abs() < 1e-3);
        let spec = JumpSpec::positive_stable(0.5).unwrap();
        let xs = draws(1_000_000, 4, |r| spec.sample(r));
        let med = xs[xs.len() / 2];
        // density at the median ≈ 0.2, so sd(median) ≈ 1/(2·0.2·1000)
        assert!((med - median_oracle).abs() < 0.01, "median {med}");
    }

    #[test]
    fn samplers_agree_with_closed_cdfs() {
        let n = 100_000;
        let crit = ks_critical_value(n, 0.01);
        let specs = [
            JumpSpec::exponential(),
            JumpSpec::gamma(0.5).unwrap(),
            JumpSpec::gamma(3.0).unwrap(),
            JumpSpec::pareto(0.5).unwrap(),
            JumpSpec::positive_stable(0.5).unwrap(),
            JumpSpec::positive_stable(0.3).unwrap(),
            JumpSpec::log_pareto(),
        ];
        for (i, s) in specs.iter().enumerate() {
            let xs = draws(n, 100 + i as u64, |r| s.sample(r));
            let (d, _) = ks_statistic(&xs, |t| s.cdf(t)).unwrap();
            assert!(d < crit, "{}: D = {d}", s.label());
        }
        for (i, alpha) in [0.0, 0.5].into_iter().enumerate() {
            let law = LimitLaw::new(Regime::D, alpha, SeedSpec::new(1), 4).unwrap();
            let xs = draws(n, 200 + i as u64, |r| law.sample(r));
            let (d, _) = ks_statistic(&xs, |y| law.cdf(y)).unwrap();
            assert!(d < crit, "ML({alpha}): D = {d}");
        }
        let law = LimitLaw::new(Regime::A, 2.0, SeedSpec::new(1), 4).unwrap();
        let xs = draws(n, 300, |r| law.sample(r));
        let (d, _) = ks_statistic(&xs, |y| law.cdf(y)).unwrap();
        assert!(d < crit, "normal: D = {d}");
    }

    #[test]
    fn partial_sums_match_convolution_cdf() {
        let n = 50_000;
        let crit = ks_critical_value(n, 0.01);
        for (i, s) in [JumpSpec::gamma(0.7).unwrap(), JumpSpec::positive_stable(0.4).unwrap()]
            .iter()
            .enumerate()
        {
            let xs = draws(n, 400 + i as u64, |r| (0..5).map(|_| s.sample(r)).sum());
            let (d, _) = ks_statistic(&xs, |x| s.partial_sum_cdf(5, x).unwrap()).unwrap();
            assert!(d < crit, "{}: D = {d}", s.label());
        }
    }

    #[test]
    fn ml_moment_examples() {
        assert!((ml_moment(0.0, 1) - 1.0).abs() < 1e-14);
        for n in 1..8u32 {
            let fact: f64 = (1..=n).map(f64::from).product();
            assert!((ml_moment(0.0, n) / fact - 1.0).abs() < 1e-12);
        }
        assert!((ml_moment(0.5, 1) - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn half_normal_reduction_matches_ml_moments() {
        // Z = √(2/π)|N| has E Z^n = (2/π)^{n/2} 2^{n/2} Γ((n+1)/2)/√π
        for n in 1..=8u32 {
            let nf = n as f64;
            let half_normal = (2.0 / PI).powf(nf / 2.0) * 2f64.powf(nf / 2.0) * gamma((nf + 1.0) / 2.0) / PI.sqrt();
            assert!((half_normal / ml_moment(0.5, n) - 1.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn limit_cdf_examples() {
        let a = LimitLaw::new(Regime::A, 2.0, SeedSpec::new(0), 1).unwrap();
        assert!((a.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!(a.cdf(-1.0) > 0.0);
        let d0 = LimitLaw::new(Regime::D, 0.0, SeedSpec::new(0), 1).unwrap();
        assert!((d0.cdf(2f64.ln()) - 0.5).abs() < 1e-15);
        assert_eq!(d0.cdf(-1.0), 0.0);
        let dh = LimitLaw::new(Regime::D, 0.5, SeedSpec::new(0), 1).unwrap();
        assert!((dh.cdf(1e3) - 1.0).abs() < 1e-15);
        assert!(dh.tail(dh.upper_cutoff(1e-10)) < 1e-10);
        assert!(d0.tail(d0.upper_cutoff(1e-10)) < 1e-10);
        assert!(a.tail(a.upper_cutoff(1e-10)) < 1e-10);
    }

    #[test]
    fn ml_sample_means() {
        let law = LimitLaw::new(Regime::D, 0.0, SeedSpec::new(0), 1).unwrap();
        let xs = draws(1_000_000, 5, |r| law.sample(r));
        let (m, se) = mean_se(&xs);
        assert!((m - 1.0).abs() < 3.0 * se);
        let law = LimitLaw::new(Regime::D, 0.5, SeedSpec::new(0), 1).unwrap();
        let xs = draws(1_000_000, 6, |r| law.sample(r));
        let (m, se) = mean_se(&xs);
        assert!((m - 2.0 / PI).abs() < 3.0 * se, "mean {m}");
    }

    #[test]
    fn ml_moments_match_formula() {
        for (i, alpha) in [0.25, 0.5, 0.75].into_iter().enumerate() {
            let xs = draws(1_000_000, 10 + i as u64, |r| sample_mittag_leffler(alpha, r));
            for n in 1..=4 {
                let pw: Vec<f64> = xs.iter().map(|x| x.powi(n)).collect();
                let (m, se) = mean_se(&pw);
                let target = ml_moment(alpha, n as u32);
                assert!((m - target).abs() < 4.0 * se, "α={alpha} n={n}: {m} vs {target} (se {se})");
            }
        }
    }

    #[test]
    fn char_fn_examples() {
        assert_eq!(char_fn_spectral_neg(1.5, 0.0), Complex64::new(1.0, 0.0));
        for &v in &[0.3, 1.0, 2.5] {
            let a = char_fn_spectral_neg(1.5, v);
            let b = char_fn_spectral_neg(1.5, -v);
            assert!((a - b.conj()).norm() < 1e-15);
        }
        // direct substitution at (1.5, 1): exponent 2Γ(0.5)(cos 3π/4 + i sin 3π/4)
        let g = PI.sqrt();
        let expected = Complex64::new(2.0 * g * (-(0.5f64).sqrt()), 2.0 * g * (0.5f64).sqrt()).exp();
        assert!((char_fn_spectral_neg(1.5, 1.0) - expected).norm() < 1e-14);
    }

    #[test]
    fn spectral_negative_sampler_matches_char_fn() {
        let alpha = 1.5;
        let xs = draws(1_000_000, 20, |r| sample_stable(alpha, -1.0, spectral_negative_scale(alpha), r));
        for &v in &[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
            let n = xs.len() as f64;
            let emp = xs.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc + Complex64::from_polar(1.0, v * x)) / n;
            let err = (emp - char_fn_spectral_neg(alpha, v)).norm();
            assert!(err < 0.01, "v = {v}: err {err}");
        }
        let (m, se) = mean_se(&xs);
        assert!(m.abs() < 3.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn empirical_and_closed_half_law_agree() {
        let closed = LimitLaw::new(Regime::D, 0.5, SeedSpec::new(3), 4).unwrap();
        let emp = LimitLaw::empirical(Regime::D, 0.5, SeedSpec::new(3), 4).unwrap();
        let CdfProvider::EmpiricalCache { sample } = emp.provider() else {
            panic!("expected cache")
        };
        assert!(sample.windows(2).all(|w| w[0] <= w[1]));
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let y = i as f64 * 0.01;
            worst = worst.max((closed.cdf(y) - emp.cdf(y)).abs());
        }
        assert!(worst < 0.005, "sup gap {worst}");
    }

    #[test]
    fn limit_law_rejects_mismatched_alpha() {
        assert!(LimitLaw::new(Regime::C, 0.5, SeedSpec::new(0), 1).is_err());
        assert!(LimitLaw::new(Regime::D, 1.2, SeedSpec::new(0), 1).is_err());
        assert!(LimitLaw::new(Regime::A, 1.5, SeedSpec::new(0), 1).is_err());
    }
}
