//! Decoupled paths `(Ŝ_n)`, counts `N̂(t)`, the standard walk and `τ(t)`,
//! the renewal function `V(t)` and its exponential smoothing `W(t)`.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{JumpFamily, JumpSpec};
use crate::error::{Error, Result};
use crate::rng::{run_replicates, SeedSpec};
use crate::special::incomplete_gamma_error;

/// Default omitted-mass bound for truncated paths.
pub const DEFAULT_DELTA: f64 = 1e-9;

/// Largest number of grid intervals accepted by the renewal-equation solver.
pub const MAX_GRID_INTERVALS: usize = 10_000_000;

const TRUNCATION_CAP: u64 = 1_000_000_000;
/// Per-term error allowance for quadrature-based stable CDFs.
const STABLE_TERM_ERROR: f64 = 1e-12;
/// Grid size cap for the adaptive renewal-equation route of
/// [`renewal_function`].
const ADAPTIVE_GRID_CAP: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathMethod {
    /// `Ŝ_n` drawn directly from the closed law of `S_n`.
    ExactLaw,
    /// `Ŝ_n` is a sum of `n` fresh jumps, disjoint across `n`.
    FreshSums,
}

/// A truncation index with a certified bound on the omitted mass
/// `Σ_{n > n_max} P{S_n ≤ t_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_max: u64,
    pub bound: f64,
}

/// Smallest usable `n_max` whose omitted mass is certified to be at most
/// `delta`. Any `delta ≥ 1` returns `n_max = 1` with an uncertified
/// (infinite) bound.
pub fn truncation_index(spec: &JumpSpec, t_max: f64, delta: f64) -> Result<Truncation> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::param(format!("t_max must be positive and finite, got {t_max}")));
    }
    if !(delta > 0.0) || delta.is_nan() {
        return Err(Error::param(format!("delta must be positive, got {delta}")));
    }
    if delta >= 1.0 {
        return Ok(Truncation { n_max: 1, bound: f64::INFINITY });
    }
    if spec.min_one() {
        return Ok(Truncation {
            n_max: (t_max.floor() as u64).max(1),
            bound: 0.0,
        });
    }
    let bound_after: Box<dyn Fn(u64) -> f64> = match spec.family() {
        JumpFamily::Gamma { shape } => Box::new(move |n| gamma_upper_chernoff_tail(shape, t_max, n)),
        JumpFamily::Exponential => Box::new(move |n| gamma_upper_chernoff_tail(1.0, t_max, n)),
        JumpFamily::PositiveStable { index } => Box::new(move |n| stable_chernoff_tail(index, t_max, n)),
        _ => unreachable!("min-one families handled above"),
    };
    // bound_after is nonincreasing in n; exponential search then bisection
    let mut lo = 0u64;
    let mut hi = 1u64;
    while bound_after(hi) > delta {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi > TRUNCATION_CAP {
            return Err(Error::Bound { delta, cap: TRUNCATION_CAP });
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound_after(mid) <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Truncation {
        n_max: hi.max(1),
        bound: bound_after(hi),
    })
}

/// `ln[(t/m)^m e^{m-t}]`, the Chernoff exponent of `P{Gamma(m) ≤ t}` for
/// `m > t` (and of `P{Gamma(m) > t}` for `m < t`).
fn gamma_chernoff_log(m: f64, t: f64) -> f64 {
    m * (t / m).ln() + m - t
}

/// Certified bound on `Σ_{n > big_n} P{Gamma(nk) ≤ t}`.
///
/// The exponent is concave in `m` with slope `ln(t/m)`, so consecutive
/// terms beyond `m = (N+1)k > t` shrink at least by `q = (t/((N+1)k))^k`.
fn gamma_upper_chernoff_tail(k: f64, t: f64, big_n: u64) -> f64 {
    let m = (big_n + 1) as f64 * k;
    if m <= t {
        return f64::INFINITY;
    }
    let q = (t / m).powf(k);
    gamma_chernoff_log(m, t).exp() / (1.0 - q)
}

/// Certified bound on `Σ_{n ≤ big_l} P{Gamma(nk) > t}` for `big_l·k < t`.
fn gamma_lower_chernoff_head(k: f64, t: f64, big_l: u64) -> f64 {
    if big_l == 0 {
        return 0.0;
    }
    let m = big_l as f64 * k;
    if m >= t {
        return f64::INFINITY;
    }
    let q = (m / t).powf(k);
    gamma_chernoff_log(m, t).exp() / (1.0 - q)
}

/// Certified bound on `Σ_{n > big_n} P{n^{1/a} ξ ≤ t}`.
///
/// Chernoff on the Laplace transform gives
/// `P{ξ ≤ x} ≤ exp(-(1-a) a^{a/(1-a)} x^{-a/(1-a)})`, so each term is at most
/// `exp(-C n^p)` with `p = 1/(1-a)`; the sum is bounded by the integral
/// `exp(-C N^p) / (C p N^{p-1})`.
fn stable_chernoff_tail(a: f64, t: f64, big_n: u64) -> f64 {
    if big_n == 0 {
        return f64::INFINITY;
    }
    let p = 1.0 / (1.0 - a);
    let c = (1.0 - a) * a.powf(a / (1.0 - a)) * t.powf(-a / (1.0 - a));
    let n = big_n as f64;
    (-c * n.powf(p)).exp() / (c * p * n.powf(p - 1.0))
}

/// One realization of the decoupled walk up to a certified truncation index.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledPath {
    values: Vec<f64>,
    sorted: Vec<f64>,
    horizon: f64,
    truncation: Truncation,
    method: PathMethod,
}

impl DecoupledPath {
    /// `(Ŝ_1, …, Ŝ_{n_max})` in index order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn truncation_index(&self) -> u64 {
        self.truncation.n_max
    }
    pub fn truncation_bound(&self) -> f64 {
        self.truncation.bound
    }
    pub fn method(&self) -> PathMethod {
        self.method
    }

    /// `N̂(t) = #{n ≤ n_max : Ŝ_n ≤ t}`.
    pub fn count_at(&self, t: f64) -> Result<u64> {
        self.check_horizon(t)?;
        Ok(self.sorted.partition_point(|&s| s <= t) as u64)
    }

    /// `#{n ≤ n_max : Ŝ_n < t}`.
    pub fn count_below(&self, t: f64) -> Result<u64> {
        self.check_horizon(t)?;
        Ok(self.sorted.partition_point(|&s| s < t) as u64)
    }

    fn check_horizon(&self, t: f64) -> Result<()> {
        if t > self.horizon || t.is_nan() {
            return Err(Error::Domain(format!(
                "count requested at t = {t} beyond the path horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Simulates a decoupled path, using the exact law of `S_n` whenever the
/// family has a closed convolution and fresh sums otherwise.
pub fn simulate_decoupled<R: Rng + ?Sized>(spec: &JumpSpec, t_max: f64, delta: f64, rng: &mut R) -> Result<DecoupledPath> {
    let method = if spec.exact_convolution() {
        PathMethod::ExactLaw
    } else {
        PathMethod::FreshSums
    };
    simulate_decoupled_with(spec, t_max, delta, method, rng)
}

/// Number of variates [`simulate_decoupled`] draws for one path: `n_max` for
/// exact laws, `n_max(n_max + 1)/2` for fresh sums.
pub fn path_cost(spec: &JumpSpec, t_max: f64, delta: f64) -> Result<f64> {
    let n = truncation_index(spec, t_max, delta)?.n_max as f64;
    Ok(if spec.exact_convolution() { n } else { n * (n + 1.0) / 2.0 })
}

/// [`simulate_decoupled`] with an explicit construction.
pub fn simulate_decoupled_with<R: Rng + ?Sized>(
    spec: &JumpSpec,
    t_max: f64,
    delta: f64,
    method: PathMethod,
    rng: &mut R,
) -> Result<DecoupledPath> {
    let truncation = truncation_index(spec, t_max, delta)?;
    let n_max = truncation.n_max;
    let values: Vec<f64> = match method {
        PathMethod::ExactLaw => {
            if !spec.exact_convolution() {
                return Err(Error::param(format!("{} has no closed-form convolution", spec.label())));
            }
            (1..=n_max)
                .map(|n| spec.sample_partial_sum(n, rng))
                .collect::<Result<_>>()?
        }
        PathMethod::FreshSums => (1..=n_max).map(|n| (0..n).map(|_| spec.sample(rng)).sum()).collect(),
    };
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(DecoupledPath {
        values,
        sorted,
        horizon: t_max,
        truncation,
        method,
    })
}

/// Partial sums `S_1, …, S_{τ(t_max)}` of one walk; the last entry is the
/// first to exceed `t_max`, so `τ(t_max)` is the length and `N(t_max)` the
/// length minus one.
pub fn simulate_standard_walk<R: Rng + ?Sized>(spec: &JumpSpec, t_max: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::param(format!("t_max must be nonnegative and finite, got {t_max}")));
    }
    let mut sums = Vec::new();
    let mut s = 0.0;
    loop {
        s += spec.sample(rng);
        sums.push(s);
        if s > t_max {
            return Ok(sums);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RenewalMethod {
    ClosedSeries,
    RenewalEquation,
    MonteCarlo,
}

/// A value of `V(t)` with its error bound (a standard error for
/// [`RenewalMethod::MonteCarlo`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalValue {
    pub value: f64,
    pub error_bound: f64,
    pub method: RenewalMethod,
}

/// `V(t) = Σ_n P{S_n ≤ t}` to within `tol`.
///
/// Closed series for families with a closed convolution; otherwise the
/// renewal equation on successively halved grids until the estimated error
/// is below `tol`.
pub fn renewal_function(spec: &JumpSpec, t: f64, tol: f64) -> Result<RenewalValue> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("V(t) needs finite t ≥ 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tol must be positive, got {tol}")));
    }
    if t == 0.0 {
        // every shipped law is continuous with P{ξ = 0} = 0
        let method = if spec.exact_convolution() {
            RenewalMethod::ClosedSeries
        } else {
            RenewalMethod::RenewalEquation
        };
        return Ok(RenewalValue { value: 0.0, error_bound: 0.0, method });
    }
    if spec.exact_convolution() {
        let r = closed_series(spec, t, tol)?;
        if r.error_bound > tol {
            return Err(Error::Accuracy {
                requested: tol,
                achieved: r.error_bound,
            });
        }
        return Ok(r);
    }
    let mut n = 256usize;
    let mut coarse = solve_renewal_grid(spec, t, n)?;
    loop {
        let fine = solve_renewal_grid(spec, t, 2 * n)?;
        let err = richardson_error(coarse[n], fine[2 * n]);
        if err <= tol {
            return Ok(RenewalValue {
                value: coarse[n],
                error_bound: err,
                method: RenewalMethod::RenewalEquation,
            });
        }
        if 2 * n > ADAPTIVE_GRID_CAP {
            return Err(Error::Accuracy { requested: tol, achieved: err });
        }
        coarse = fine;
        n *= 2;
    }
}

/// Second-order Richardson estimate of the error of the coarse value.
fn richardson_error(coarse: f64, fine: f64) -> f64 {
    (coarse - fine).abs() * 4.0 / 3.0
}

/// Closed series `Σ_{n ≤ n_max} P{S_n ≤ t}` with a certified truncation tail.
/// Gamma terms with `nk ≪ t` are replaced by 1 under a Chernoff bound.
pub fn closed_series(spec: &JumpSpec, t: f64, tol: f64) -> Result<RenewalValue> {
    let tail = truncation_index(spec, t, (tol / 4.0).min(0.5))?;
    let shape = match spec.family() {
        JumpFamily::Gamma { shape } => Some(shape),
        JumpFamily::Exponential => Some(1.0),
        _ => None,
    };
    let (skip, head_bound) = match shape {
        Some(k) => {
            let limit = tol / 4.0;
            let mut lo = 0u64;
            let mut hi = ((t / k).ceil() as u64).min(tail.n_max);
            // largest L with head bound ≤ limit; the bound increases in L
            while hi > lo {
                let mid = lo + (hi - lo).div_ceil(2);
                if gamma_lower_chernoff_head(k, t, mid) <= limit {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            (lo, gamma_lower_chernoff_head(k, t, lo))
        }
        None => (0, 0.0),
    };
    let mut sum = skip as f64;
    let mut term_error = 0.0;
    for n in (skip + 1)..=tail.n_max {
        sum += spec.partial_sum_cdf(n, t)?;
        term_error += match shape {
            Some(k) => incomplete_gamma_error(n as f64 * k),
            None => STABLE_TERM_ERROR,
        };
    }
    Ok(RenewalValue {
        value: sum,
        error_bound: tail.bound + head_bound + term_error,
        method: RenewalMethod::ClosedSeries,
    })
}

/// Monte Carlo estimate of `V(t)` from decoupled paths; `error_bound` is the
/// standard error.
pub fn renewal_function_mc(spec: &JumpSpec, t: f64, replicates: usize, seed: SeedSpec, workers: usize) -> Result<RenewalValue> {
    if replicates < 2 {
        return Err(Error::Contract("Monte Carlo renewal function needs at least 2 replicates".into()));
    }
    let counts = run_replicates(seed, replicates, workers, |_, rng| {
        simulate_decoupled(spec, t, DEFAULT_DELTA, rng)?.count_at(t)
    })?;
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RenewalValue {
        value: mean,
        error_bound: (var / n).sqrt(),
        method: RenewalMethod::MonteCarlo,
    })
}

/// Solves `V = F + F∗V` on `n` equal intervals of `[0, t_max]`.
///
/// The mass `F(jh) - F((j-1)h)` of each cell is split evenly between the
/// two endpoint values of `V`, which makes the scheme second order for
/// smooth `F`.
fn solve_renewal_grid(spec: &JumpSpec, t_max: f64, n: usize) -> Result<Vec<f64>> {
    let h = t_max / n as f64;
    let f: Vec<f64> = (0..=n).map(|i| spec.cdf(i as f64 * h)).collect();
    let df: Vec<f64> = (1..=n).map(|j| f[j] - f[j - 1]).collect();
    let mut v = vec![0.0; n + 1];
    v[0] = f[0] / (1.0 - f[0]);
    let diag = 1.0 - df[0] / 2.0;
    if diag <= 0.0 {
        return Err(Error::Numeric("grid too coarse: first-cell mass reaches 2".into()));
    }
    for i in 1..=n {
        // Σ_{j=1}^{i} ΔF_j (V_{i-j} + V_{i-j+1}) / 2, with V_i moved left
        let mut acc = df[0] * v[i - 1];
        for j in 2..=i {
            acc += df[j - 1] * (v[i - j] + v[i - j + 1]);
        }
        v[i] = (f[i] + acc / 2.0) / diag;
    }
    Ok(v)
}

/// `V` tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalTable {
    grid: Vec<f64>,
    v_values: Vec<f64>,
    method: RenewalMethod,
    error_bound: f64,
}

impl RenewalTable {
    /// Builds a table from raw columns, checking the table invariants.
    pub fn new(grid: Vec<f64>, v_values: Vec<f64>, method: RenewalMethod, error_bound: f64) -> Result<Self> {
        if grid.len() != v_values.len() || grid.len() < 2 {
            return Err(Error::Contract("grid and values must have equal length ≥ 2".into()));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Contract("grid must start at 0 and increase strictly".into()));
        }
        if v_values[0] < 0.0 {
            return Err(Error::Contract("V(0) must be nonnegative".into()));
        }
        if let Some(i) = v_values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Internal(format!(
                "renewal table decreases between grid points {} and {}",
                grid[i],
                grid[i + 1]
            )));
        }
        Ok(RenewalTable {
            grid,
            v_values,
            method,
            error_bound,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn v_values(&self) -> &[f64] {
        &self.v_values
    }
    pub fn method(&self) -> RenewalMethod {
        self.method
    }
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }
    pub fn t_max(&self) -> f64 {
        *self.grid.last().expect("nonempty grid")
    }
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Linear interpolation of `V` at `t ∈ [0, t_max]`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.t_max()).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside the table range [0, {}]", self.t_max())));
        }
        let i = self.grid.partition_point(|&g| g <= t);
        if i >= self.grid.len() {
            return Ok(*self.v_values.last().unwrap());
        }
        let (g0, g1) = (self.grid[i - 1], self.grid[i]);
        let w = (t - g0) / (g1 - g0);
        Ok(self.v_values[i - 1] * (1.0 - w) + self.v_values[i] * w)
    }

    /// CSV with header `t,V`, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.grid.len() * 48);
        out.push_str("t,V\n");
        for (t, v) in self.grid.iter().zip(&self.v_values) {
            let _ = writeln!(out, "{t:.16e},{v:.16e}");
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output. Method and error bound are not
    /// part of the CSV and must be supplied.
    pub fn from_csv(text: &str, method: RenewalMethod, error_bound: f64) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,V") {
            return Err(Error::Contract("renewal table CSV must start with header `t,V`".into()));
        }
        let mut grid = Vec::new();
        let mut v = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Contract(format!("row {}: expected two columns", i + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Contract(format!("row {}: {e}", i + 2)))
            };
            grid.push(parse(a)?);
            v.push(parse(b)?);
        }
        Self::new(grid, v, method, error_bound)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Solves the renewal equation on the grid `0, h, …, t_max`. The error bound
/// is the Richardson estimate from a second solve at step `h/2`.
pub fn renewal_equation_grid(spec: &JumpSpec, t_max: f64, h: f64) -> Result<RenewalTable> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::param(format!("t_max must be positive and finite, got {t_max}")));
    }
    if !(h > 0.0) {
        return Err(Error::param(format!("step must be positive, got {h}")));
    }
    let ratio = (t_max / h).round();
    if ratio > MAX_GRID_INTERVALS as f64 {
        return Err(Error::param(format!(
            "t_max/h = {ratio} exceeds {MAX_GRID_INTERVALS} grid intervals"
        )));
    }
    let n = (ratio as usize).max(1);
    let coarse = solve_renewal_grid(spec, t_max, n)?;
    let fine = solve_renewal_grid(spec, t_max, 2 * n)?;
    let err = (0..=n)
        .map(|i| richardson_error(coarse[i], fine[2 * i]))
        .fold(0.0, f64::max);
    let h = t_max / n as f64;
    let grid = (0..=n).map(|i| i as f64 * h).collect();
    RenewalTable::new(grid, coarse, RenewalMethod::RenewalEquation, err)
}

/// Tabulates `V` on `0, h, …, t_max` by the closed series; the error bound
/// is the largest pointwise bound.
pub fn closed_series_table(spec: &JumpSpec, t_max: f64, h: f64, tol: f64) -> Result<RenewalTable> {
    if !spec.exact_convolution() {
        return Err(Error::param(format!("{} has no closed-form convolution", spec.label())));
    }
    if !(t_max > 0.0 && t_max.is_finite() && h > 0.0) {
        return Err(Error::param("closed-series table needs t_max > 0 and h > 0"));
    }
    let n = ((t_max / h).round() as usize).max(1);
    let h = t_max / n as f64;
    let mut grid = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    let mut err: f64 = 0.0;
    for i in 0..=n {
        let t = i as f64 * h;
        let r = renewal_function(spec, t, tol)?;
        grid.push(t);
        v.push(r.value);
        err = err.max(r.error_bound);
    }
    RenewalTable::new(grid, v, RenewalMethod::ClosedSeries, err)
}

/// `W(t) = ∫_0^t V(t-y) e^{-y} dy` with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedValue {
    pub value: f64,
    pub error_bound: f64,
}

/// `W(t)` by the trapezoidal rule on the table grid (the endpoint `t` is
/// added as a node with interpolated `V` when it falls between grid points).
pub fn smoothed_w(table: &RenewalTable, t: f64) -> Result<f64> {
    trapezoid_w(table, t, 1)
}

/// [`smoothed_w`] plus an error estimate: the Richardson estimate from the
/// same rule on every second node, plus the table's own error bound times
/// `1 - e^{-t}`.
pub fn smoothed_w_with_error(table: &RenewalTable, t: f64) -> Result<SmoothedValue> {
    let fine = trapezoid_w(table, t, 1)?;
    let coarse = trapezoid_w(table, t, 2)?;
    Ok(SmoothedValue {
        value: fine,
        error_bound: (fine - coarse).abs() / 3.0 + table.error_bound() * (-(-t).exp_m1()),
    })
}

fn trapezoid_w(table: &RenewalTable, t: f64, stride: usize) -> Result<f64> {
    if !(0.0..=table.t_max()).contains(&t) {
        return Err(Error::Domain(format!("W(t) needs t ∈ [0, {}], got {t}", table.t_max())));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // integrate V(s) e^{-(t-s)} over s ∈ [0, t]
    let grid = table.grid();
    let vals = table.v_values();
    let last = grid.partition_point(|&g| g <= t) - 1;
    let mut nodes: Vec<(f64, f64)> = (0..=last).step_by(stride).map(|i| (grid[i], vals[i])).collect();
    if nodes.last().map(|n| n.0) != Some(t) {
        nodes.push((t, table.value_at(t)?));
    }
    let mut sum = 0.0;
    for w in nodes.windows(2) {
        let (s0, v0) = w[0];
        let (s1, v1) = w[1];
        sum += 0.5 * (s1 - s0) * (v0 * (s0 - t).exp() + v1 * (s1 - t).exp());
    }
    Ok(sum)
}

/// `W` at every grid point through the one-step recursion
/// `W_{i+1} = e^{-h} W_i + (h/2)(e^{-h} V_i + V_{i+1})`.
pub fn smoothed_w_grid(table: &RenewalTable) -> Vec<f64> {
    let grid = table.grid();
    let v = table.v_values();
    let mut w = Vec::with_capacity(grid.len());
    w.push(0.0);
    for i in 0..grid.len() - 1 {
        let h = grid[i + 1] - grid[i];
        let e = (-h).exp();
        w.push(e * w[i] + 0.5 * h * (e * v[i] + v[i + 1]));
    }
    w
}
