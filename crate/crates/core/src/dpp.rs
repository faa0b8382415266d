//! Radial observables of the determinantal point process `Θ_ρ` with kernel
//! `C_ρ(z, w) = ρ/(2π) E_{2/ρ,2/ρ}(z w̄) e^{-|z|^ρ/2 - |w|^ρ/2}`.
//!
//! Disc counts are sampled through the identity
//! `(Θ_ρ(D_t))_t =_d (N̂(t^ρ))_t` for gamma jumps with shape `2/ρ`; angles are
//! never simulated.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::JumpSpec;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::renewal::simulate_decoupled;
use crate::rng::SeedSpec;
use crate::special::mittag_leffler_scaled;

/// Jump law whose decoupled renewal process reproduces disc counts of `Θ_ρ`.
pub fn dpp_jump(rho: f64) -> Result<JumpSpec> {
    check_rho(rho)?;
    JumpSpec::gamma(2.0 / rho)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param(format!("rho must be positive and finite, got {rho}")));
    }
    Ok(())
}

/// Disc counts `Θ_ρ(D_r)` along a radius grid for one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscCountSample {
    pub rho: f64,
    pub radii_grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub seed: SeedSpec,
    pub replicate: u64,
}

/// Samples disc counts for one replicate: a decoupled path with gamma jumps
/// of shape `2/ρ` up to `(max r)^ρ`, counting atoms with `Ŝ_n < r^ρ` (open
/// discs).
pub fn sample_disc_counts<R: Rng + ?Sized>(
    rho: f64,
    radii_grid: &[f64],
    delta: f64,
    rng: &mut R,
    seed: SeedSpec,
    replicate: u64,
) -> Result<DiscCountSample> {
    let spec = dpp_jump(rho)?;
    if radii_grid.is_empty() {
        return Err(Error::param("radius grid must be nonempty"));
    }
    if radii_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || radii_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("radius grid must be finite, nonnegative and strictly increasing"));
    }
    let r_max = *radii_grid.last().unwrap();
    let counts = if r_max == 0.0 {
        vec![0]
    } else {
        let path = simulate_decoupled(&spec, r_max.powf(rho), delta, rng)?;
        radii_grid
            .iter()
            .map(|&r| path.count_below(r.powf(rho).min(path.horizon())))
            .collect::<Result<Vec<u64>>>()?
    };
    Ok(DiscCountSample {
        rho,
        radii_grid: radii_grid.to_vec(),
        counts,
        seed,
        replicate,
    })
}

/// CSV rows `radius,count,replicate` for a set of samples, with header.
pub fn disc_counts_csv(samples: &[DiscCountSample]) -> String {
    let mut out = String::from("radius,count,replicate\n");
    for s in samples {
        for (r, c) in s.radii_grid.iter().zip(&s.counts) {
            let _ = writeln!(out, "{r:.16e},{c},{}", s.replicate);
        }
    }
    out
}

/// Parses [`disc_counts_csv`] output into `(radius, count, replicate)` rows.
pub fn parse_disc_counts_csv(text: &str) -> Result<Vec<(f64, u64, u64)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("radius,count,replicate") {
        return Err(Error::Contract("disc-count CSV must start with `radius,count,replicate`".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            let bad = |m: String| Error::Contract(format!("row {}: {m}", i + 2));
            if cols.len() != 3 {
                return Err(bad("expected three columns".into()));
            }
            Ok((
                cols[0].trim().parse().map_err(|e| bad(format!("{e}")))?,
                cols[1].trim().parse().map_err(|e| bad(format!("{e}")))?,
                cols[2].trim().parse().map_err(|e| bad(format!("{e}")))?,
            ))
        })
        .collect()
}

/// `C_ρ(z, w)`. The Gaussian-type factor is folded into the series so that
/// the diagonal stays finite for large `|z|`.
pub fn kernel_c_rho(rho: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    check_rho(rho)?;
    let a = 2.0 / rho;
    let log_scale = 0.5 * (z.norm().powf(rho) + w.norm().powf(rho));
    let e = mittag_leffler_scaled(a, a, z * w.conj(), log_scale)?;
    Ok(e * (rho / (2.0 * PI)))
}

/// `E Θ_ρ(D_t) = 2π ∫_0^t r C_ρ(r, r) dr`.
pub fn intensity_disc_integral(rho: f64, t: f64, quad: &QuadConfig) -> Result<f64> {
    check_rho(rho)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param(format!("radius must be finite and nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // surface a range error before entering the integrator
    kernel_c_rho(rho, Complex64::new(t, 0.0), Complex64::new(t, 0.0))?;
    let f = |r: f64| {
        let z = Complex64::new(r, 0.0);
        2.0 * PI * r * kernel_c_rho(rho, z, z).map(|c| c.re).unwrap_or(f64::NAN)
    };
    let res = integrate(f, 0.0, t, quad)?;
    if !res.value.is_finite() {
        return Err(Error::Numeric(format!("intensity integral not finite at rho = {rho}, t = {t}")));
    }
    Ok(res.value)
}

/// `ρ / (4π)^{1/4}`, the LIL constant of `Θ_ρ(D_t) - V(t^ρ)` against
/// `t^{ρ/4}(log t)^{1/2}`.
pub fn lsl_example_constant(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(rho / (4.0 * PI).powf(0.25))
}
