//! Iterative construction of an `L¹` generator `φ` for a spectrum with
//! infinite spectral radius.
//!
//! Stage `k` fixes a profile `G_k` supported on `I_k = (−2k, 2k)` and a
//! trigonometric polynomial `P_k` with `‖f̂_k − P_k G_k‖_ℝ ≤ δ_k`, while the
//! profiles change so little that
//! `max{1, B(P_1), …, B(P_{k−1})}·‖G_k − G_{k−1}‖_ℝ ≤ δ_k`.
//! The limit `Φ` is the Fourier transform of the generator.

use crate::expfit::{fit_exponentials, frequencies_within, radius_scan, sobolev_norm, SampledFunction, TrigPolynomial};
use crate::numerics::special::{cubic_bspline, cubic_bspline_deriv, sinc};
use crate::spectrum::Spectrum;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// `ε_k = 2^{−k}`.
pub fn eps(k: u32) -> f64 {
    2f64.powi(-(k as i32))
}

/// `δ_k = 2^{−k−1}`, so that `Σ_{n≥k} δ_n = ε_k`.
pub fn delta(k: u32) -> f64 {
    2f64.powi(-(k as i32) - 1)
}

/// Half-length of `I_k`; `I_0` is taken to be `J_1`.
pub fn i_half(k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        2.0 * k as f64
    }
}

/// Half-length of `J_k = I_k` minus two unit side intervals.
pub fn j_half(k: u32) -> f64 {
    2.0 * k as f64 - 1.0
}

/// Even, continuous, piecewise-linear function given on `[0, ∞)` by its
/// knots; zero beyond the last knot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() || knots[0] != 0.0 {
            return Err(Error::ProfileInvariant("knots must start at 0 and match the values".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ProfileInvariant("knots must increase".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::ProfileInvariant("values must be finite and nonnegative".into()));
        }
        Ok(PiecewiseLinearProfile { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right end of the support.
    pub fn support(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        let i = self.knots.partition_point(|&k| k <= a);
        if i == 0 {
            return self.values[0];
        }
        if i == self.knots.len() {
            return if a == self.support() { self.values[i - 1] } else { 0.0 };
        }
        let t = (a - self.knots[i - 1]) / (self.knots[i] - self.knots[i - 1]);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }

    /// Derivative, taking the segment to the right of `|x|` at knots.
    pub fn deriv(&self, x: f64) -> f64 {
        let a = x.abs();
        let i = self.knots.partition_point(|&k| k <= a);
        if i == 0 || i == self.knots.len() {
            return 0.0;
        }
        let s = (self.values[i] - self.values[i - 1]) / (self.knots[i] - self.knots[i - 1]);
        if x < 0.0 {
            -s
        } else {
            s
        }
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots.windows(2).zip(self.values.windows(2)).map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0])).collect()
    }

    /// `B(G) = sup|G| + sup|G′|`.
    pub fn b(&self) -> f64 {
        let sup = self.values.iter().copied().fold(0.0, f64::max);
        let slope = self.slopes().into_iter().map(f64::abs).fold(0.0, f64::max);
        sup + slope
    }

    /// Exact `‖G‖_{L²(ℝ)} + ‖G′‖_{L²(ℝ)}`.
    pub fn sobolev_norm(&self) -> f64 {
        exact_norm(&self.knots, &self.values)
    }

    /// Positive and strictly decreasing on the support, zero at its end,
    /// `B(G) < 1` and `‖G‖_ℝ ≤ 1`.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.values.len();
        if self.values[n - 1] != 0.0 {
            return Err(Error::ProfileInvariant("profile must vanish at the end of its support".into()));
        }
        if self.values[..n - 1].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::ProfileInvariant("profile must be positive inside its support".into()));
        }
        if self.values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::ProfileInvariant("profile must be strictly decreasing".into()));
        }
        if !(self.b() < 1.0) {
            return Err(Error::ProfileInvariant(format!("B(G) = {} is not below 1", self.b())));
        }
        if self.sobolev_norm() > 1.0 {
            return Err(Error::ProfileInvariant(format!("‖G‖ = {} exceeds 1", self.sobolev_norm())));
        }
        Ok(())
    }

    /// CSV with columns `knot,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("knot,value\n");
        for (k, v) in self.knots.iter().zip(&self.values) {
            writeln!(out, "{k:.16e},{v:.16e}").expect("writing to a String");
        }
        out
    }

    /// Inverse transform `φ(t) = (1/2π)∫ G(ζ) e^{−iζt} dζ`, which is real and
    /// even: `φ(t) = −(1/πt²) Σ_j s_j·2 sin(m_j t) sin(w_j t/2)` over segments
    /// with slope `s_j`, midpoint `m_j` and width `w_j`.
    pub fn inverse_transform(&self, t: f64) -> f64 {
        let reach = self.support() * t.abs();
        if reach < 1e-4 {
            // (1/π)(∫G − t²/2 ∫ζ²G)
            let (mut m0, mut m2) = (0.0, 0.0);
            for (k, v) in self.knots.windows(2).zip(self.values.windows(2)) {
                let (a, b, fa, fb) = (k[0], k[1], v[0], v[1]);
                let w = b - a;
                m0 += 0.5 * w * (fa + fb);
                // ∫ζ²(linear) by Simpson, exact for cubics
                let mid = 0.5 * (a + b);
                m2 += w / 6.0 * (a * a * fa + 4.0 * mid * mid * 0.5 * (fa + fb) + b * b * fb);
            }
            return (m0 - 0.5 * t * t * m2) / PI;
        }
        let mut acc = 0.0;
        for ((k, v), _) in self.knots.windows(2).zip(self.values.windows(2)).zip(0..) {
            let w = k[1] - k[0];
            let s = (v[1] - v[0]) / w;
            let m = 0.5 * (k[0] + k[1]);
            acc += s * 2.0 * (m * t).sin() * (0.5 * w * t).sin();
        }
        -acc / (PI * t * t)
    }

    /// `sup_t t²|φ(t)|`, used for tail bounds.
    pub fn inverse_decay_constant(&self) -> f64 {
        self.slopes().iter().map(|s| 2.0 * s.abs()).sum::<f64>() / PI
    }
}

/// `‖h‖₂ + ‖h′‖₂` of the even piecewise-linear function through `(xs, ys)`.
fn exact_norm(xs: &[f64], ys: &[f64]) -> f64 {
    let (mut l2, mut d2) = (0.0, 0.0);
    for (x, y) in xs.windows(2).zip(ys.windows(2)) {
        let w = x[1] - x[0];
        l2 += w * (y[0] * y[0] + y[0] * y[1] + y[1] * y[1]) / 3.0;
        d2 += (y[1] - y[0]).powi(2) / w;
    }
    (2.0 * l2).sqrt() + (2.0 * d2).sqrt()
}

/// `‖G − H‖_ℝ` computed exactly on the merged knot set.
pub fn profile_distance(g: &PiecewiseLinearProfile, h: &PiecewiseLinearProfile) -> f64 {
    let mut xs: Vec<f64> = g.knots.iter().chain(&h.knots).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x) - h.eval(x)).collect();
    exact_norm(&xs, &ys)
}

/// First profile: knots `0, 1, 2`, values `g₀, 0.9g₀, 0`, scaled to `‖G₁‖_ℝ = 1/2`.
pub fn first_profile() -> PiecewiseLinearProfile {
    let unit = exact_norm(&[0.0, 1.0, 2.0], &[1.0, 0.9, 0.0]);
    let g0 = 0.5 / unit;
    PiecewiseLinearProfile::new(vec![0.0, 1.0, i_half(1)], vec![g0, 0.9 * g0, 0.0]).expect("valid first profile")
}

/// `max(prev, T)` where `T` falls linearly from `eta` at `i_half(k−1)` to 0 at
/// `i_half(k)`.
fn extend_profile(prev: &PiecewiseLinearProfile, k: u32, eta: f64) -> Result<PiecewiseLinearProfile> {
    let (h0, h1) = (i_half(k - 1), i_half(k));
    let ramp = |x: f64| eta * (h1 - x) / (h1 - h0);
    let mut xs: Vec<f64> = prev.knots.iter().copied().chain([h1]).collect();
    // crossings of prev and the ramp inside each segment
    for (k, v) in prev.knots.windows(2).zip(prev.values.windows(2)) {
        let (da, db) = (v[0] - ramp(k[0]), v[1] - ramp(k[1]));
        if da * db < 0.0 {
            xs.push(k[0] + (k[1] - k[0]) * da / (da - db));
        }
    }
    let (pa, pb) = (prev.support(), h1);
    let da = 0.0 - ramp(pa);
    if da * (0.0 - ramp(pb)) < 0.0 {
        xs.push(pa + (pb - pa) * da / (da - 0.0));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys = xs.iter().map(|&x| if x <= h1 { prev.eval(x).max(ramp(x)) } else { 0.0 }).collect();
    PiecewiseLinearProfile::new(xs, ys)
}

/// Largest ramp height keeping `T ≤ prev` on `I_{k−2}`.
fn max_ramp_height(prev: &PiecewiseLinearProfile, k: u32) -> f64 {
    let (h0, h1) = (i_half(k - 1), i_half(k));
    let keep = i_half(k - 2);
    prev.knots
        .iter()
        .copied()
        .filter(|&x| x <= keep)
        .chain([keep])
        .map(|x| prev.eval(x) * (h1 - h0) / (h1 - x))
        .fold(f64::INFINITY, f64::min)
}

/// Element `k` of a dense sequence in `L¹`: `f̂ = Σ_j c_j M(ζ/s − j)` with
/// the cubic B-spline `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseElement {
    pub spacing: f64,
    /// `(j, c_j)` pairs with nonzero coefficients.
    pub coefs: Vec<(i64, f64)>,
}

/// Position `i` in the visiting order `0, +1, −1, +2, −2, …`.
fn visit(i: usize) -> i64 {
    if i == 0 {
        0
    } else if i % 2 == 1 {
        (i as i64 + 1) / 2
    } else {
        -(i as i64) / 2
    }
}

/// Level `p`: spacing `(3/8)·2^{−p}`, coefficient step `16^{−p}`, digit base
/// `2(p+1)16^p + 1` (coefficients up to `p + 1` in size).
fn level_params(p: u32) -> (f64, u128, f64) {
    let spacing = 0.375 * 2f64.powi(-(p as i32));
    let q = 16u128.checked_pow(p).and_then(|b| b.checked_mul(p as u128 + 1)).unwrap_or(u128::MAX / 4).min(u128::MAX / 4);
    (spacing, 2 * q + 1, 16f64.powi(-(p as i32)))
}

/// Decode `k = 2^p(2r + 1)`: the base-`B` digits of `r + 1` give the
/// coefficients at level `p` (odd digit `d` ↦ `+(d+1)/2` steps, even ↦ `−d/2`),
/// placed at centers `0, +s, −s, +2s, …`.
pub fn dense_element(k: u128) -> Result<DenseElement> {
    if k == 0 {
        return Err(Error::InvalidParameter("dense family index starts at 1".into()));
    }
    let p = k.trailing_zeros();
    let r = (k >> p) / 2;
    let (spacing, base, step) = level_params(p);
    let mut n = r + 1;
    let mut coefs = Vec::new();
    let mut i = 0;
    while n > 0 {
        let d = n % base;
        n /= base;
        let c = if d == 0 {
            0.0
        } else if d % 2 == 1 {
            ((d + 1) / 2) as f64 * step
        } else {
            -((d / 2) as f64) * step
        };
        if c != 0.0 {
            coefs.push((visit(i), c));
        }
        i += 1;
    }
    Ok(DenseElement { spacing, coefs })
}

/// Inverse of [`dense_element`]: the index of the level-`p` element whose
/// coefficients, in visiting order, are `steps[i]·16^{−p}`.  `None` when the
/// index does not fit in `u128` or a coefficient is out of range.
pub fn dense_index_of(p: u32, steps: &[i64]) -> Option<u128> {
    let (_, base, _) = level_params(p);
    let q = (base - 1) / 2;
    let mut n: u128 = 0;
    for &s in steps.iter().rev() {
        if s.unsigned_abs() as u128 > q {
            return None;
        }
        let d = if s > 0 { 2 * s as u128 - 1 } else { 2 * s.unsigned_abs() as u128 };
        n = n.checked_mul(base)?.checked_add(d)?;
    }
    if n == 0 {
        return None;
    }
    let r = n - 1;
    (2 * r + 1).checked_mul(1u128.checked_shl(p)?)
}

impl DenseElement {
    /// Largest `|ζ|` with `f̂(ζ) ≠ 0`.
    pub fn support(&self) -> f64 {
        self.coefs.iter().map(|(j, _)| j.unsigned_abs() as f64 + 2.0).fold(0.0, f64::max) * self.spacing
    }

    /// Shrink the spacing so the support sits inside `(−half, half)`.
    pub fn fit_inside(&mut self, half: f64) {
        let s = self.support();
        if s >= half {
            self.spacing *= 0.99 * half / s;
        }
    }

    pub fn hat(&self, zeta: f64) -> f64 {
        let u = zeta / self.spacing;
        self.coefs.iter().map(|&(j, c)| c * cubic_bspline(u - j as f64)).sum()
    }

    pub fn hat_deriv(&self, zeta: f64) -> f64 {
        let u = zeta / self.spacing;
        self.coefs.iter().map(|&(j, c)| c * cubic_bspline_deriv(u - j as f64)).sum::<f64>() / self.spacing
    }

    /// `f(t) = (1/2π) s sinc⁴(st/2) Σ_j c_j e^{−ijst}`.
    pub fn time(&self, t: f64) -> Complex64 {
        let s = self.spacing;
        let env = s * sinc(0.5 * s * t).powi(4) / (2.0 * PI);
        self.coefs.iter().map(|&(j, c)| c * Complex64::cis(-(j as f64) * s * t)).sum::<Complex64>() * env
    }

    /// `sup_t t⁴|f(t)|`.
    pub fn decay_constant(&self) -> f64 {
        let s = self.spacing;
        self.coefs.iter().map(|(_, c)| c.abs()).sum::<f64>() * s * 16.0 / (2.0 * PI * s.powi(4))
    }
}

/// Element `k` of the dense family, rescaled into `J_k`.
pub fn dense_family(k: u32) -> Result<DenseElement> {
    let mut f = dense_element(k as u128)?;
    f.fit_inside(j_half(k));
    Ok(f)
}

/// Stage certificate.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub stage: u32,
    pub delta: f64,
    pub eq1_measured: f64,
    pub eq2_measured: f64,
    #[serde(rename = "B_G")]
    pub b_g: f64,
    #[serde(rename = "B_P")]
    pub b_p: f64,
    pub freq_count: usize,
}

#[derive(Debug, Clone)]
pub struct StageConfig {
    /// Frequencies are taken from `Λ ∩ [−c·|I_k|, c·|I_k|]`.
    pub freq_factor: f64,
    /// Keep at most this many frequencies, nearest to 0 first.
    pub max_freqs: Option<usize>,
    pub ridge: f64,
    /// Grid cells per unit length for fits and norms.
    pub cells_per_unit: usize,
    /// Require a bump-fit residual below this at `ρ = |I_k|/2` before fitting.
    pub radius_check: Option<f64>,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig { freq_factor: 4.0, max_freqs: None, ridge: crate::expfit::DEFAULT_RIDGE, cells_per_unit: 256, radius_check: None }
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub k: u32,
    pub f: DenseElement,
    pub g: PiecewiseLinearProfile,
    pub p: TrigPolynomial,
    pub cert: Certificate,
}

fn stage_frequencies(spec: &Spectrum, k: u32, cfg: &StageConfig) -> Result<Vec<f64>> {
    let cut = cfg.freq_factor * 2.0 * i_half(k);
    let (_, hi) = spec.extent();
    let mut freqs = frequencies_within(spec, cut.min(hi))?;
    if let Some(m) = cfg.max_freqs {
        freqs.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        freqs.truncate(m);
        freqs.sort_by(f64::total_cmp);
    }
    Ok(freqs)
}

/// `f̂ − P·G` and its derivative on `I_k`.
fn eq1_residual(f: &DenseElement, g: &PiecewiseLinearProfile, p: &TrigPolynomial, half: f64, cells: usize) -> Result<f64> {
    let r = SampledFunction::with_derivative(
        -half,
        half,
        cells,
        |z| Complex64::new(f.hat(z), 0.0) - p.eval(z) * g.eval(z),
        |z| Complex64::new(f.hat_deriv(z), 0.0) - p.deriv(z) * g.eval(z) - p.eval(z) * g.deriv(z),
    )?;
    Ok(sobolev_norm(&r))
}

/// Build stage `k = prev.len() + 1`.
pub fn build_stage(prev: &[Stage], spec: &Spectrum, cfg: &StageConfig) -> Result<Stage> {
    let k = prev.len() as u32 + 1;
    let fail = |reason: String| Error::StageFailure { stage: k as usize, reason };
    let (g, eq2) = match prev.last() {
        None => (first_profile(), 0.0),
        Some(last) => {
            let weight = prev.iter().map(|s| s.cert.b_p).fold(1.0, f64::max);
            let d = delta(k);
            let ok = |eta: f64| -> Result<Option<(PiecewiseLinearProfile, f64)>> {
                let g = extend_profile(&last.g, k, eta)?;
                let e = weight * profile_distance(&g, &last.g);
                Ok((e <= d && g.check_invariants().is_ok()).then_some((g, e)))
            };
            let (mut lo, mut hi) = (0.0, max_ramp_height(&last.g, k) * (1.0 - 1e-9));
            let mut best = None;
            if let Some(found) = ok(hi)? {
                best = Some(found);
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    match ok(mid)? {
                        Some(found) => {
                            lo = mid;
                            best = Some(found);
                        }
                        None => hi = mid,
                    }
                    if hi - lo <= 1e-9 * hi {
                        break;
                    }
                }
            }
            best.ok_or_else(|| fail("no positive ramp height satisfies the profile constraints".into()))?
        }
    };
    g.check_invariants()?;
    for s in prev {
        check_agreement(&s.g, &g, i_half(s.k - 1))?;
    }

    let f = dense_family(k)?;
    let freqs = stage_frequencies(spec, k, cfg)?;
    let half = i_half(k);
    if let Some(limit) = cfg.radius_check {
        let row = radius_scan(spec, &[half], freqs.iter().map(|l| l.abs()).fold(0.0, f64::max), cfg.ridge, 2048)?;
        if row[0].residual > limit {
            return Err(fail(format!("bump residual {} at ρ = {half} exceeds {limit}", row[0].residual)));
        }
    }
    let cells = (cfg.cells_per_unit as f64 * 2.0 * half).ceil() as usize;
    let target = SampledFunction::with_derivative(
        -half,
        half,
        cells,
        |z| {
            let v = f.hat(z);
            Complex64::new(if v == 0.0 { 0.0 } else { v / g.eval(z) }, 0.0)
        },
        |z| {
            let v = f.hat(z);
            if v == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let gz = g.eval(z);
            Complex64::new((f.hat_deriv(z) * gz - v * g.deriv(z)) / (gz * gz), 0.0)
        },
    )?;
    let fit = fit_exponentials(&target, &freqs, cfg.ridge)?;
    let eq1 = eq1_residual(&f, &g, &fit.poly, half, 2 * cells)?;
    let cert = Certificate {
        stage: k,
        delta: delta(k),
        eq1_measured: eq1,
        eq2_measured: eq2,
        b_g: g.b(),
        b_p: fit.poly.sup_bound(),
        freq_count: freqs.len(),
    };
    if eq1 > delta(k) {
        return Err(fail(format!("fit residual {eq1:.3e} above δ = {:.3e} with {} frequencies", delta(k), freqs.len())));
    }
    Ok(Stage { k, f, g, p: fit.poly, cert })
}

/// Run stages `1..=count`.
pub fn build_stages(spec: &Spectrum, count: u32, cfg: &StageConfig) -> Result<Vec<Stage>> {
    let mut stages = Vec::new();
    for _ in 0..count {
        let s = build_stage(&stages, spec, cfg)?;
        stages.push(s);
    }
    Ok(stages)
}

/// Error unless `a` and `b` agree on `[0, upto]`.
fn check_agreement(a: &PiecewiseLinearProfile, b: &PiecewiseLinearProfile, upto: f64) -> Result<()> {
    for &x in a.knots.iter().chain(&b.knots).filter(|&&x| x <= upto).chain([&upto]) {
        let (u, v) = (a.eval(x), b.eval(x));
        if (u - v).abs() > 1e-14 * u.abs().max(v.abs()).max(1e-300) {
            return Err(Error::ProfileInvariant(format!("profiles disagree at {x}: {u} vs {v}")));
        }
    }
    Ok(())
}

/// `Φ` and samples of `φ` on `[−window, window]`.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub phi_hat: PiecewiseLinearProfile,
    /// `(t, φ(t))`.
    pub samples: Vec<(f64, f64)>,
    /// `‖Φ‖_ℝ`, which bounds `‖φ‖₁`.
    pub norm: f64,
}

/// `Φ = G_k` on `I_{k−1}` for every completed stage; with finitely many
/// stages this is the last profile.
pub fn assemble_phi(stages: &[Stage], window: f64, samples: usize) -> Result<Assembled> {
    if stages.len() < 2 {
        return Err(Error::InvalidParameter("assembly needs at least two stages".into()));
    }
    let phi_hat = stages[stages.len() - 1].g.clone();
    for s in stages {
        check_agreement(&s.g, &phi_hat, i_half(s.k - 1))?;
    }
    let norm = phi_hat.sobolev_norm();
    if norm > 1.0 {
        return Err(Error::ProfileInvariant(format!("‖Φ‖ = {norm} exceeds 1")));
    }
    let n = samples.max(2);
    let h = 2.0 * window / (n - 1) as f64;
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = -window + i as f64 * h;
            (t, phi_hat.inverse_transform(t))
        })
        .collect();
    Ok(Assembled { phi_hat, samples, norm })
}

/// Outcome of the telescoping estimate for one stage.
#[derive(Debug, Clone, Serialize)]
pub struct TelescopeReport {
    pub k: u32,
    /// `‖f̂_k − P_kΦ‖_{I_k} + Σ_n ‖P_kΦ‖_{I_{n+1}∖I_n}`.
    pub fourier_split: f64,
    /// `‖f̂_k − P_kΦ‖_ℝ` in one piece.
    pub fourier_global: f64,
    /// `Σ_{n=k}^{K} δ_n`.
    pub target: f64,
    /// `∫_{|t|≤T} |f_k − Σ c_λ φ(· − λ)|`.
    pub time_l1: f64,
    /// Bound for the same integral over `|t| > T`.
    pub time_tail: f64,
}

/// Fourier-side and time-side errors of stage `k` against `Φ = G_K`.
pub fn telescoping_check(stages: &[Stage], k: u32, t_max: f64, dt: f64) -> Result<TelescopeReport> {
    let big_k = stages.len() as u32;
    if k == 0 || k >= big_k {
        return Err(Error::InvalidParameter(format!("need 1 ≤ k ≤ K − 1 = {}", big_k.saturating_sub(1))));
    }
    let stage = &stages[k as usize - 1];
    let phi = &stages[big_k as usize - 1].g;
    let (f, p) = (&stage.f, &stage.p);
    let piece = |lo: f64, hi: f64, with_f: bool| -> Result<f64> {
        let cells = ((hi - lo) * 2048.0).ceil().max(64.0) as usize;
        let fv = |z: f64| if with_f { f.hat(z) } else { 0.0 };
        let fd = |z: f64| if with_f { f.hat_deriv(z) } else { 0.0 };
        let r = SampledFunction::with_derivative(
            lo,
            hi,
            cells,
            |z| Complex64::new(fv(z), 0.0) - p.eval(z) * phi.eval(z),
            |z| Complex64::new(fd(z), 0.0) - p.deriv(z) * phi.eval(z) - p.eval(z) * phi.deriv(z),
        )?;
        Ok(sobolev_norm(&r))
    };
    let mut split = piece(-i_half(k), i_half(k), true)?;
    for n in k..big_k {
        split += piece(i_half(n), i_half(n + 1), false)? + piece(-i_half(n + 1), -i_half(n), false)?;
    }
    let global = piece(-i_half(big_k), i_half(big_k), true)?;
    let target: f64 = (k..=big_k).map(delta).sum();

    let n = (2.0 * t_max / dt).round() as usize;
    let h = 2.0 * t_max / n as f64;
    let vals: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let t = -t_max + i as f64 * h;
            let sum: Complex64 = p.terms().iter().map(|(l, c)| c * phi.inverse_transform(t - l)).sum();
            (f.time(t) - sum).norm()
        })
        .collect();
    let time_l1 = crate::numerics::quad::trapezoid(&vals, h);
    let lam_max = p.terms().iter().map(|(l, _)| l.abs()).fold(0.0, f64::max);
    let coef_sum: f64 = p.terms().iter().map(|(_, c)| c.norm()).sum();
    let reach = (t_max - lam_max).max(1.0);
    let time_tail = coef_sum * 2.0 * phi.inverse_decay_constant() / reach + 2.0 * f.decay_constant() / (3.0 * t_max.powi(3));
    Ok(TelescopeReport { k, fourier_split: split, fourier_global: global, target, time_l1, time_tail })
}
