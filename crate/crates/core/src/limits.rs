//! Deterministic limit-theorem quantities: normalizers `c_α(t)` and
//! `h_α(t)`, asymptotic variances, the Gaussian covariance of the regime-D
//! functional limit, and the LIL/LSL constants with their normalizers.

use std::f64::consts::PI;

use serde::Serialize;

use crate::distributions::{CdfProvider, JumpFamily, JumpSpec, LimitLaw, Regime, SlowlyVarying};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig, QuadResult};
use crate::special::gamma;

/// Relative tolerance of the regime-B root solve for `c_2`.
pub const C_ALPHA_TOL: f64 = 1e-10;
/// Relative tolerance on `G(h_α(t))/e^t`.
pub const H_ALPHA_TOL: f64 = 1e-8;
/// Tail mass left out beyond the integration cutoff for closed-form CDFs.
pub const TAIL_CUTOFF: f64 = 1e-15;

/// Quadrature settings for limit-law integrals: relative target 1e-6 is
/// the documented minimum; the defaults here are tighter.
pub fn default_quad() -> QuadConfig {
    QuadConfig::default()
}

/// Normalizers of one jump law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizerSpec {
    pub spec: JumpSpec,
    pub solver_tolerance: f64,
}

impl NormalizerSpec {
    pub fn new(spec: JumpSpec) -> Self {
        let solver_tolerance = if spec.regime() == Regime::D { H_ALPHA_TOL } else { C_ALPHA_TOL };
        NormalizerSpec { spec, solver_tolerance }
    }
    pub fn regime(&self) -> Regime {
        self.spec.regime()
    }
    pub fn c_alpha(&self, t: f64) -> Result<f64> {
        norm_c_alpha(&self.spec, t)
    }
    pub fn h_alpha(&self, t: f64) -> Result<f64> {
        h_alpha(&self.spec, t)
    }
    /// `G(s) = 1/P{ξ > s}`.
    pub fn g(&self, s: f64) -> f64 {
        1.0 / self.spec.tail(s)
    }
}

/// `c_α(t)`: `σ√t` in regime A; the root of `t ℓ(c) / c^α = 1` in regimes B
/// and C (`c > √t` in regime B, which needs `t > e`).
pub fn norm_c_alpha(spec: &JumpSpec, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("c_alpha needs finite t > 0, got {t}")));
    }
    match spec.regime() {
        Regime::A => Ok(spec.variance().sqrt() * t.sqrt()),
        Regime::C => match spec.slowly_varying() {
            Some(SlowlyVarying::Constant(l)) => Ok((t * l).powf(1.0 / spec.alpha())),
            other => Err(Error::param(format!("no c_alpha rule for slowly varying factor {other:?}"))),
        },
        Regime::B => match spec.slowly_varying() {
            Some(SlowlyVarying::TwoLog) => solve_c2_two_log(t),
            other => Err(Error::param(format!("no c_alpha rule for slowly varying factor {other:?}"))),
        },
        Regime::D => Err(Error::param("c_alpha is defined for regimes A-C; use h_alpha in regime D")),
    }
}

/// Root `c > √t` of `c² = 2 t log c`, found by bisection on `log c`.
fn solve_c2_two_log(t: f64) -> Result<f64> {
    if t <= std::f64::consts::E {
        return Err(Error::Domain(format!("c_2 with ℓ = 2 log needs t > e, got {t}")));
    }
    // residual r(x) = 2 t x e^{-2x} - 1 is decreasing for x > 1/2
    let r = |x: f64| 2.0 * t * x * (-2.0 * x).exp() - 1.0;
    let mut lo = 0.5 * t.ln();
    let mut hi = lo.max(1.0);
    let mut guard = 0;
    while r(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 100 {
            return Err(Error::Numeric("c_2 root bracket not found".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if r(hi).abs() <= C_ALPHA_TOL && (hi - lo) <= f64::EPSILON * hi {
            break;
        }
    }
    let c = hi.exp();
    let resid = (t * 2.0 * c.ln() / (c * c) - 1.0).abs();
    if resid > C_ALPHA_TOL {
        return Err(Error::Numeric(format!("c_2 root solve stalled at residual {resid}")));
    }
    Ok(c)
}

/// `h_α(t) = G^←(e^t) = inf{s : P{ξ > s} ≤ e^{-t}}` for regime-D laws,
/// `t > 0`.
pub fn h_alpha(spec: &JumpSpec, t: f64) -> Result<f64> {
    if spec.regime() != Regime::D {
        return Err(Error::param("h_alpha is defined for regime D"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("h_alpha needs finite t > 0, got {t}")));
    }
    match spec.family() {
        JumpFamily::Pareto { index } => {
            let log_h = t / index;
            check_log_range(log_h, |lh| lh * index)?;
            Ok(log_h.exp())
        }
        JumpFamily::LogPareto => {
            let log_h = t.exp_m1();
            check_log_range(log_h, |lh| lh.ln_1p())?;
            Ok(log_h.exp())
        }
        _ => invert_tail(spec, t),
    }
}

fn check_log_range(log_h: f64, t_of: impl Fn(f64) -> f64) -> Result<()> {
    const LOG_MAX: f64 = 709.0;
    if log_h > LOG_MAX {
        return Err(Error::Range {
            message: format!("h_alpha overflows (log h = {log_h})"),
            largest_safe: t_of(LOG_MAX),
        });
    }
    Ok(())
}

/// Generalized inverse of `G` at `e^t` by bisection on `log s` using the
/// jump tail only.
pub fn invert_tail(spec: &JumpSpec, t: f64) -> Result<f64> {
    let target = (-t).exp();
    if target == 0.0 {
        return Err(Error::Range {
            message: format!("e^-t underflows at t = {t}"),
            largest_safe: 745.0,
        });
    }
    let above = |x: f64| spec.tail(x.exp()) > target;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while !above(lo) {
        lo -= 2.0 * lo.abs();
        if lo < -700.0 {
            return Ok(0.0);
        }
    }
    while above(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 709.0 {
            return Err(Error::Range {
                message: format!("h_alpha overflows at t = {t}"),
                largest_safe: (1.0 / spec.tail(f64::MAX.sqrt())).ln(),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}

/// Asymptotic `Var N̂(t)` for regimes A-C and for regime-D laws with a
/// closed-form limit CDF (`α ∈ {0, 1/2}`).
pub fn limit_variance(spec: &JumpSpec, t: f64) -> Result<f64> {
    match spec.regime() {
        Regime::D => Ok(closed_il(spec.alpha())? / spec.tail(t)),
        _ => limit_variance_abc(spec, t),
    }
}

/// Asymptotic `Var N̂(t)` with `I_α` taken from `law` (any regime-D `α`).
pub fn limit_variance_with_law(spec: &JumpSpec, t: f64, law: &LimitLaw, quad: &QuadConfig) -> Result<f64> {
    match spec.regime() {
        Regime::D => Ok(il_integral(spec.alpha(), law, quad)?.value / spec.tail(t)),
        _ => limit_variance_abc(spec, t),
    }
}

fn limit_variance_abc(spec: &JumpSpec, t: f64) -> Result<f64> {
    let mu = spec.mean();
    match spec.regime() {
        Regime::A => Ok((spec.variance() * t / (mu.powi(3) * PI)).sqrt()),
        Regime::B => Ok((1.0 / (mu.powi(3) * PI)).sqrt() * norm_c_alpha(spec, t)?),
        Regime::C => Ok(regime_c_factor(spec.alpha(), mu) * norm_c_alpha(spec, t)?),
        Regime::D => unreachable!(),
    }
}

/// `Γ(1-1/α) / (μ^{1+1/α} π) · (-2Γ(2-α)cos(πα/2)/(α-1))^{1/α}`.
fn regime_c_factor(alpha: f64, mu: f64) -> f64 {
    let inner = -2.0 * gamma(2.0 - alpha) * (PI * alpha / 2.0).cos() / (alpha - 1.0);
    gamma(1.0 - 1.0 / alpha) / (mu.powf(1.0 + 1.0 / alpha) * PI) * inner.powf(1.0 / alpha)
}

fn closed_il(alpha: f64) -> Result<f64> {
    if !LimitLaw::has_closed_form(Regime::D, alpha) {
        return Err(Error::param(format!(
            "I_alpha at alpha = {alpha} needs an empirical limit law; use the *_with_law variant"
        )));
    }
    let law = LimitLaw::new(Regime::D, alpha, crate::rng::SeedSpec::new(0), 1)?;
    Ok(il_integral(alpha, &law, &default_quad())?.value)
}

fn check_law(alpha: f64, law: &LimitLaw) -> Result<()> {
    if law.regime() != Regime::D || law.alpha() != alpha {
        return Err(Error::param(format!(
            "expected the regime-D limit law with alpha = {alpha}, got regime {:?} alpha {}",
            law.regime(),
            law.alpha()
        )));
    }
    Ok(())
}

/// `I_α = ∫_0^∞ P{Z_α > y} P{Z_α ≤ y} dy`.
///
/// Closed-form CDFs: adaptive Gauss-Kronrod on `[0, y_max]` with
/// `P{Z_α > y_max} < 1e-10`; the error adds that cutoff. Empirical CDFs: the
/// step-function integral is evaluated exactly, and the error is the Monte
/// Carlo standard error of the equivalent U-statistic `E|Z - Z'|/2`.
pub fn il_integral(alpha: f64, law: &LimitLaw, quad: &QuadConfig) -> Result<QuadResult> {
    check_law(alpha, law)?;
    match law.provider() {
        CdfProvider::ClosedForm => {
            let y_max = law.upper_cutoff(TAIL_CUTOFF);
            let r = integrate(|y| law.tail(y) * law.cdf(y), 0.0, y_max, quad)?;
            Ok(QuadResult {
                value: r.value,
                error: r.error + TAIL_CUTOFF,
            })
        }
        CdfProvider::EmpiricalCache { sample } => Ok(empirical_il(sample)),
    }
}

fn empirical_il(sorted: &[f64]) -> QuadResult {
    let m = sorted.len();
    let mf = m as f64;
    // between consecutive order statistics the empirical CDF equals i/M
    let mut value = 0.0;
    for i in 1..m {
        let f = i as f64 / mf;
        value += (sorted[i] - sorted[i - 1]) * f * (1.0 - f);
    }
    // h1(x_i) = mean_j |x_i - x_j|; SE of the U-statistic is sd(h1)/√M
    let total: f64 = sorted.iter().sum();
    let mut prefix = 0.0;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (i, &x) in sorted.iter().enumerate() {
        let below = i as f64 * x - prefix;
        let above = (total - prefix - x) - (mf - i as f64 - 1.0) * x;
        let h = (below + above) / mf;
        s1 += h;
        s2 += h * h;
        prefix += x;
    }
    let var_h = (s2 / mf - (s1 / mf).powi(2)).max(0.0);
    QuadResult {
        value,
        error: (var_h / mf).sqrt(),
    }
}

/// `Cov(X_α(u), X_α(v)) = ∫_0^∞ P{Z_α > e^{-(u∧v)} y} P{Z_α ≤ e^{-(u∨v)} y} dy`.
pub fn covariance_x(alpha: f64, u: f64, v: f64, law: &LimitLaw, quad: &QuadConfig) -> Result<f64> {
    check_law(alpha, law)?;
    let (a, b) = (u.min(v), u.max(v));
    match law.provider() {
        CdfProvider::ClosedForm => {
            let (ea, eb) = ((-a).exp(), (-b).exp());
            let y_max = law.upper_cutoff(TAIL_CUTOFF) / ea;
            Ok(integrate(|y| law.tail(ea * y) * law.cdf(eb * y), 0.0, y_max, quad)?.value)
        }
        CdfProvider::EmpiricalCache { sample } => Ok(empirical_cov(sample, a, b)),
    }
}

/// Exact integral of `(1 - F_M(e^{-a} y)) F_M(e^{-b} y)` for the empirical
/// CDF `F_M` of `sorted`, `a ≤ b`.
fn empirical_cov(sorted: &[f64], a: f64, b: f64) -> f64 {
    let m = sorted.len();
    let mf = m as f64;
    let (sa, sb) = (a.exp(), b.exp());
    // F_M(e^{-a}y) jumps at y = e^a x_i, F_M(e^{-b}y) at y = e^b x_j
    let (mut i, mut j) = (0usize, 0usize);
    let mut y_prev = 0.0;
    let mut value = 0.0;
    while i < m {
        let next_a = sa * sorted[i];
        let next_b = if j < m { sb * sorted[j] } else { f64::INFINITY };
        let y = next_a.min(next_b);
        let integrand = (1.0 - i as f64 / mf) * (j as f64 / mf);
        value += (y - y_prev) * integrand;
        y_prev = y;
        if next_a <= next_b {
            i += 1;
        } else {
            j += 1;
        }
    }
    value
}

/// `Cov(Y_α(u), Y_α(v)) = e^{-(u+v)/2} Cov(X_α(u), X_α(v))`.
pub fn covariance_y(alpha: f64, u: f64, v: f64, law: &LimitLaw, quad: &QuadConfig) -> Result<f64> {
    Ok((-(u + v) / 2.0).exp() * covariance_x(alpha, u, v, law, quad)?)
}

/// LIL/LSL constant for regimes A-C and closed-form regime-D laws.
pub fn lil_constant(spec: &JumpSpec) -> Result<f64> {
    match spec.regime() {
        Regime::D => Ok((2.0 * closed_il(spec.alpha())?).sqrt()),
        _ => lil_constant_abc(spec),
    }
}

/// LIL constant with `I_α` taken from `law` in regime D.
pub fn lil_constant_with_law(spec: &JumpSpec, law: &LimitLaw, quad: &QuadConfig) -> Result<f64> {
    match spec.regime() {
        Regime::D => Ok((2.0 * il_integral(spec.alpha(), law, quad)?.value).sqrt()),
        _ => lil_constant_abc(spec),
    }
}

fn lil_constant_abc(spec: &JumpSpec) -> Result<f64> {
    let mu = spec.mean();
    match spec.regime() {
        Regime::A => Ok((spec.variance() / (mu.powi(3) * PI)).powf(0.25)),
        Regime::B => Ok((1.0 / (mu.powi(3) * PI)).powf(0.25)),
        Regime::C => {
            let alpha = spec.alpha();
            Ok((2.0 * (alpha - 1.0) / alpha * regime_c_factor(alpha, mu)).sqrt())
        }
        Regime::D => unreachable!(),
    }
}

/// Denominator of the LIL/LSL statistic: `t^{1/4}(log t)^{1/2}` (A),
/// `(c_α(t) log t)^{1/2}` (B, C), `(log log t / P{ξ > t})^{1/2}` (D).
pub fn lil_normalizer(spec: &JumpSpec, t: f64) -> Result<f64> {
    let e = std::f64::consts::E;
    match spec.regime() {
        Regime::D => {
            if !(t > e.powf(e)) {
                return Err(Error::Domain(format!("regime-D normalizer needs t > e^e, got {t}")));
            }
            Ok((t.ln().ln() / spec.tail(t)).sqrt())
        }
        regime => {
            if !(t > e) {
                return Err(Error::Domain(format!("normalizer needs t > e, got {t}")));
            }
            match regime {
                Regime::A => Ok(t.powf(0.25) * t.ln().sqrt()),
                _ => Ok((norm_c_alpha(spec, t)? * t.ln()).sqrt()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use crate::special::{erf, erfc};
    use crate::verify::min_eigenvalue_symmetric;

    fn law(alpha: f64) -> LimitLaw {
        LimitLaw::new(Regime::D, alpha, SeedSpec::new(0), 1).unwrap()
    }

    #[test]
    fn c_alpha_examples() {
        assert_eq!(norm_c_alpha(&JumpSpec::exponential(), 400.0).unwrap(), 20.0);
        let c = norm_c_alpha(&JumpSpec::pareto(1.5).unwrap(), 8.0).unwrap();
        assert!((c - 4.0).abs() < 1e-12);
        let p2 = JumpSpec::pareto(2.0).unwrap();
        for &t in &[3.0, 10.0, 1e3, 1e8] {
            let c = norm_c_alpha(&p2, t).unwrap();
            assert!(c > t.sqrt());
            assert!((t * 2.0 * c.ln() / (c * c) - 1.0).abs() <= 1e-10, "t={t}");
        }
        assert!(norm_c_alpha(&p2, 2.0).is_err());
        assert!(norm_c_alpha(&JumpSpec::pareto(0.5).unwrap(), 10.0).is_err());
    }

    #[test]
    fn h_alpha_examples() {
        let p = JumpSpec::pareto(0.5).unwrap();
        for &t in &[0.5, 3.0, 10.0] {
            let h = h_alpha(&p, t).unwrap();
            assert!((h / (t / 0.5).exp() - 1.0).abs() < 1e-14);
            // the generic bisection reproduces the closed inverse
            let hb = invert_tail(&p, t).unwrap();
            assert!((hb / h - 1.0).abs() < 1e-12);
        }
        let s = JumpSpec::positive_stable(0.5).unwrap();
        let mut prev = 0.0;
        for &t in &[0.5, 1.0, 3.0, 6.0, 7.0, 12.0] {
            let h = h_alpha(&s, t).unwrap();
            assert!((s.tail(h) * t.exp() - 1.0).abs() <= H_ALPHA_TOL, "t={t}");
            assert!(h >= prev);
            prev = h;
        }
        let s3 = JumpSpec::positive_stable(0.3).unwrap();
        let h = h_alpha(&s3, 4.0).unwrap();
        assert!((s3.tail(h) * 4f64.exp() - 1.0).abs() <= H_ALPHA_TOL);
        let lp = JumpSpec::log_pareto();
        let h = h_alpha(&lp, 2.0).unwrap();
        assert!((lp.tail(h) * 2f64.exp() - 1.0).abs() <= 1e-12);
        assert!(matches!(h_alpha(&lp, 8.0), Err(Error::Range { .. })));
        assert!(matches!(h_alpha(&p, 400.0), Err(Error::Range { .. })));
        assert!(h_alpha(&JumpSpec::exponential(), 1.0).is_err());
    }

    #[test]
    fn limit_variance_examples() {
        let v = limit_variance(&JumpSpec::exponential(), PI).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        for rho in [1.0, 2.0, 3.0, 4.0] {
            let spec = JumpSpec::gamma(2.0 / rho).unwrap();
            let t = 37.0;
            let v = limit_variance(&spec, t).unwrap();
            assert!((v - rho / 2.0 * (t / PI).sqrt()).abs() < 1e-12);
        }
        let lp = JumpSpec::log_pareto();
        for &t in &[5.0, 100.0] {
            assert!((limit_variance(&lp, t).unwrap() * lp.tail(t) - 0.5).abs() < 1e-9);
        }
        // regime C constant by direct substitution at α = 1.5, μ = 3
        let p = JumpSpec::pareto(1.5).unwrap();
        let inner = -2.0 * gamma(0.5) * (0.75 * PI).cos() / 0.5;
        let manual = gamma(1.0 / 3.0) / (3f64.powf(5.0 / 3.0) * PI) * inner.powf(2.0 / 3.0) * 500f64.powf(2.0 / 3.0);
        assert!((limit_variance(&p, 500.0).unwrap() / manual - 1.0).abs() < 1e-13);
    }

    #[test]
    fn il_integral_closed_routes() {
        let q = default_quad();
        let i0 = il_integral(0.0, &law(0.0), &q).unwrap();
        assert!((i0.value - 0.5).abs() < 1e-8);
        // oracle: direct midpoint quadrature of the closed CDF product
        let n = 400_000;
        let h = 12.0 / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) * h;
                let z = y * PI.sqrt() / 2.0;
                erfc(z) * erf(z)
            })
            .sum::<f64>()
            * h;
        let ih = il_integral(0.5, &law(0.5), &q).unwrap();
        let target = 2.0 * (2f64.sqrt() - 1.0) / PI;
        assert!((brute - target).abs() < 1e-8);
        assert!((ih.value - target).abs() < 1e-9, "{}", ih.value);
        assert!(il_integral(0.5, &law(0.0), &q).is_err());
    }

    #[test]
    fn il_integral_empirical_route() {
        let emp = LimitLaw::empirical(Regime::D, 0.5, SeedSpec::new(21), 4).unwrap();
        let r = il_integral(0.5, &emp, &default_quad()).unwrap();
        let target = 2.0 * (2f64.sqrt() - 1.0) / PI;
        assert!((r.value - target).abs() < 0.003, "{}", r.value);
        assert!(r.error > 0.0 && r.error < 1e-3);
        // exact step integral equals half the Gini mean difference
        let CdfProvider::EmpiricalCache { sample } = emp.provider() else { unreachable!() };
        let small: Vec<f64> = sample.iter().step_by(1000).copied().collect();
        let m = small.len() as f64;
        let mut gini = 0.0;
        for x in &small {
            for y in &small {
                gini += (x - y).abs();
            }
        }
        assert!((empirical_il(&small).value - gini / (2.0 * m * m)).abs() < 1e-12);
    }

    #[test]
    fn covariance_x_diagonal_and_symmetry() {
        let q = default_quad();
        for alpha in [0.0, 0.5] {
            let l = law(alpha);
            let i = il_integral(alpha, &l, &q).unwrap().value;
            for &u in &[-1.0, 0.0, 0.7] {
                let c = covariance_x(alpha, u, u, &l, &q).unwrap();
                assert!((c - u.exp() * i).abs() < 1e-9, "α={alpha} u={u}");
                let cy = covariance_y(alpha, u, u, &l, &q).unwrap();
                assert!((cy - i).abs() < 1e-9);
            }
            let a = covariance_x(alpha, 0.3, -0.4, &l, &q).unwrap();
            let b = covariance_x(alpha, -0.4, 0.3, &l, &q).unwrap();
            assert_eq!(a, b);
        }
        assert!((covariance_x(0.0, 0.0, 0.0, &law(0.0), &q).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn covariance_alpha_zero_closed_expression() {
        // ∫ e^{-e^{-u} y}(1 - e^{-e^{-v} y}) dy = e^u - 1/(e^{-u} + e^{-v}),
        // so e^{-(u+v)/2} Cov = e^{-d}/(2 cosh(d/2)) with d = |u - v|
        let q = default_quad();
        let l = law(0.0);
        for &(u, v) in &[(1.0f64, 0.0f64), (0.0, 2.0), (-1.0, 0.5), (0.25, 0.25)] {
            let d: f64 = (u - v).abs();
            let expected = (-d).exp() / (2.0 * (d / 2.0).cosh());
            let got = covariance_y(0.0, u, v, &l, &q).unwrap();
            assert!((got - expected).abs() < 1e-9, "({u},{v}): {got} vs {expected}");
        }
    }

    #[test]
    fn covariance_half_matches_finite_sum_oracle() {
        // for α = 1/2, Z = √(2/π)|N|: P{Z > x} = erfc(x√π/2); the oracle is
        // a fine midpoint rule for ∫ erfc(A y) erf(B y) dy
        let q = default_quad();
        let l = law(0.5);
        let (u, v) = (-0.5f64, 0.5f64);
        let a = (-u).exp() * PI.sqrt() / 2.0;
        let b = (-v).exp() * PI.sqrt() / 2.0;
        let n = 400_000;
        let h = 8.0 / a / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) * h;
                erfc(a * y) * erf(b * y)
            })
            .sum::<f64>()
            * h;
        let got = covariance_x(0.5, u, v, &l, &q).unwrap();
        assert!((got - brute).abs() < 1e-8, "{got} vs {brute}");
    }

    #[test]
    fn covariance_y_stationary() {
        let q = default_quad();
        for alpha in [0.0, 0.5] {
            let l = law(alpha);
            let base = covariance_y(alpha, 0.2, -0.6, &l, &q).unwrap();
            for s in [-1.0, 0.5, 2.0] {
                let shifted = covariance_y(alpha, 0.2 + s, -0.6 + s, &l, &q).unwrap();
                assert!((shifted - base).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn covariance_matrix_psd() {
        use rand::Rng;
        let q = default_quad();
        let mut rng = SeedSpec::new(77).stream(0);
        for alpha in [0.0, 0.5] {
            let l = law(alpha);
            for k in 2..=8usize {
                let us: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
                let m: Vec<Vec<f64>> = us
                    .iter()
                    .map(|&u| us.iter().map(|&v| covariance_x(alpha, u, v, &l, &q).unwrap()).collect())
                    .collect();
                assert!(min_eigenvalue_symmetric(&m) >= -1e-8);
            }
        }
    }

    #[test]
    fn empirical_covariance_matches_closed() {
        let q = default_quad();
        let emp = LimitLaw::empirical(Regime::D, 0.5, SeedSpec::new(5), 4).unwrap();
        let closed = law(0.5);
        for &(u, v) in &[(0.0, 0.0), (-0.5, 0.5), (0.5, 0.0)] {
            let a = covariance_x(0.5, u, v, &emp, &q).unwrap();
            let b = covariance_x(0.5, u, v, &closed, &q).unwrap();
            assert!((a - b).abs() < 0.005, "({u},{v}): {a} vs {b}");
        }
    }

    #[test]
    fn lil_constants() {
        let c = lil_constant(&JumpSpec::exponential()).unwrap();
        assert!((c - PI.powf(-0.25)).abs() < 1e-15);
        assert!((c - 0.75113).abs() < 1e-5);
        assert!((lil_constant(&JumpSpec::log_pareto()).unwrap() - 1.0).abs() < 1e-8);
        for rho in [1.0f64, 2.0, 3.0, 4.0] {
            let c = lil_constant(&JumpSpec::gamma(2.0 / rho).unwrap()).unwrap();
            assert!((rho.sqrt() * c - rho / (4.0 * PI).powf(0.25)).abs() < 1e-12);
        }
        // regimes C and D relations
        let p = JumpSpec::pareto(1.5).unwrap();
        let t = 1000.0;
        let var_over_c = limit_variance(&p, t).unwrap() / norm_c_alpha(&p, t).unwrap();
        assert!((lil_constant(&p).unwrap().powi(2) - 2.0 * 0.5 / 1.5 * var_over_c).abs() < 1e-13);
        let s = JumpSpec::positive_stable(0.5).unwrap();
        let i = 2.0 * (2f64.sqrt() - 1.0) / PI;
        assert!((lil_constant(&s).unwrap() - (2.0 * i).sqrt()).abs() < 1e-9);
        let b = JumpSpec::pareto(2.0).unwrap();
        assert!((lil_constant(&b).unwrap() - (1.0 / (8.0 * PI)).powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn regime_d_without_closed_form_needs_law() {
        let s = JumpSpec::positive_stable(0.3).unwrap();
        assert!(lil_constant(&s).is_err());
        assert!(limit_variance(&s, 10.0).is_err());
    }

    #[test]
    fn lil_normalizer_examples() {
        let e = std::f64::consts::E;
        let n = lil_normalizer(&JumpSpec::exponential(), e.powi(4)).unwrap();
        assert!((n - 2.0 * e).abs() < 1e-12);
        let p = JumpSpec::pareto(0.5).unwrap();
        let t = 1e4;
        let n = lil_normalizer(&p, t).unwrap();
        assert!((n - (t.powf(0.5) * t.ln().ln()).sqrt()).abs() < 1e-10);
        assert!(lil_normalizer(&JumpSpec::exponential(), 2.0).is_err());
        assert!(lil_normalizer(&p, 10.0).is_err());
        for spec in [JumpSpec::exponential(), JumpSpec::pareto(2.0).unwrap(), JumpSpec::pareto(1.5).unwrap(), p] {
            let mut prev = 0.0;
            for k in 0..40 {
                let t = 100.0 * 1.5f64.powi(k);
                let v = lil_normalizer(&spec, t).unwrap();
                assert!(v > prev, "{}", spec.label());
                prev = v;
            }
        }
    }
}
