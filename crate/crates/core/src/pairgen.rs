//! A pair of generators for exponentially perturbed integers:
//! `φ₁(t) = sinc²(at) Σ_k e^{−|k|} e^{2πikt}` and `φ₂(t) = e^{−iπt} φ₁(t)`.
//!
//! Transforms are normalized so that `sinc(at)` maps to the indicator of
//! `[−a, a]`: `φ̂(x) = κ ∫ φ(t) e^{ixt} dt` with `κ = 2a²/π`.  Then
//! `φ̂₁ = Σ_k e^{−|k|} max(0, 2a − |x − 2πk|)` and `φ̂₂(x) = φ̂₁(x − π)`.

use crate::numerics::quad::composite_gauss_legendre;
use crate::numerics::special::{sinc, sine_integral};
use crate::span::{approximate_translates, FitMode, SpanProblem, TimeGrid, TimeRule};
use crate::spectrum::Spectrum;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairConfig {
    pub a: f64,
    /// The periodic factor keeps `|k| ≤ K`.
    #[serde(rename = "K")]
    pub k: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig { a: 0.45 * PI, k: 30 }
    }
}

impl PairConfig {
    /// Any `0 < a < π` is accepted so that boundary cases can be studied;
    /// see [`PairConfig::in_span_range`].
    pub fn new(a: f64, k: usize) -> Result<Self> {
        if !(a > 0.0 && a < PI) {
            return Err(Error::InvalidParameter(format!("a must lie in (0, π), got {a}")));
        }
        if k < 10 {
            return Err(Error::InvalidParameter(format!("K must be at least 10, got {k}")));
        }
        Ok(PairConfig { a, k })
    }

    /// `π/4 < a < π/2`, where the pair spans.
    pub fn in_span_range(&self) -> bool {
        self.a > FRAC_PI_4 && self.a < FRAC_PI_2
    }

    pub fn kappa(&self) -> f64 {
        2.0 * self.a * self.a / PI
    }
}

/// `Σ_{|k|≤K} e^{−|k|} cos(2πkt)`.
fn periodic_factor(t: f64, k: usize) -> f64 {
    1.0 + 2.0 * (1..=k).map(|j| (-(j as f64)).exp() * (2.0 * PI * j as f64 * t).cos()).sum::<f64>()
}

pub fn phi1_eval(t: f64, cfg: &PairConfig) -> Complex64 {
    Complex64::new(sinc(cfg.a * t).powi(2) * periodic_factor(t, cfg.k), 0.0)
}

pub fn phi2_eval(t: f64, cfg: &PairConfig) -> Complex64 {
    Complex64::cis(-PI * t) * phi1_eval(t, cfg)
}

/// Bound on `|φ₁ − φ₁^{(∞)}|` at `t` from dropping `|k| > K`.
pub fn truncation_bound(t: f64, cfg: &PairConfig) -> f64 {
    sinc(cfg.a * t).powi(2) * 2.0 * (-(cfg.k as f64)).exp() / (1.0 - (-1.0f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    One,
    Two,
}

/// `φ̂₁(x) = Σ_{|k|≤K} e^{−|k|} max(0, 2a − |x − 2πk|)`, `φ̂₂(x) = φ̂₁(x − π)`.
pub fn phi_hat_closed_form(x: f64, which: Which, cfg: &PairConfig) -> f64 {
    let x = match which {
        Which::One => x,
        Which::Two => x - PI,
    };
    let k0 = (x / (2.0 * PI)).round() as i64;
    let kmax = cfg.k as i64;
    (k0 - 1..=k0 + 1)
        .filter(|k| k.abs() <= kmax)
        .map(|k| (-(k.abs() as f64)).exp() * (2.0 * cfg.a - (x - 2.0 * PI * k as f64).abs()).max(0.0))
        .sum()
}

/// `∫_T^∞ cos(ct)/t² dt`.
fn cos_over_t2_tail(c: f64, t: f64) -> f64 {
    let c = c.abs();
    (c * t).cos() / t - c * (FRAC_PI_2 - sine_integral(c * t))
}

/// `κ ∫ φ₁(t) e^{ixt} dt` by Gauss–Legendre on `[0, T]` and the exact tail
/// beyond `T`, which reduces to sine integrals.
pub fn phi_hat_quadrature(xs: &[f64], cfg: &PairConfig, t_max: f64) -> Vec<f64> {
    let panels = (t_max / 0.05).ceil() as usize;
    let (nodes, weights) = composite_gauss_legendre(0.0, t_max, panels, 12);
    let vals: Vec<f64> = nodes.par_iter().map(|&t| phi1_eval(t, cfg).re).collect();
    let a = cfg.a;
    xs.par_iter()
        .map(|&x| {
            let head: f64 = nodes.iter().zip(&weights).zip(&vals).map(|((t, w), v)| w * v * (x * t).cos()).sum();
            let tail: f64 = (-(cfg.k as i64)..=cfg.k as i64)
                .map(|k| {
                    let om = x + 2.0 * PI * k as f64;
                    let j = (cos_over_t2_tail(om, t_max)
                        - 0.5 * cos_over_t2_tail(om + 2.0 * a, t_max)
                        - 0.5 * cos_over_t2_tail(om - 2.0 * a, t_max))
                        / (2.0 * a * a);
                    (-(k.abs() as f64)).exp() * j
                })
                .sum();
            cfg.kappa() * 2.0 * (head + tail)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Margin {
    pub min: f64,
    pub argmin: f64,
    /// Strictly positive on the grid.
    pub positive: bool,
}

/// Minimum of `φ̂₁ + φ̂₂` on a uniform grid of `[−20π, 20π]`.
pub fn positivity_margin(cfg: &PairConfig, grid_points: usize) -> Margin {
    let n = grid_points.max(2);
    let (lo, hi) = (-20.0 * PI, 20.0 * PI);
    let h = (hi - lo) / (n - 1) as f64;
    let (argmin, min) = (0..n)
        .map(|i| {
            let x = lo + i as f64 * h;
            (x, phi_hat_closed_form(x, Which::One, cfg) + phi_hat_closed_form(x, Which::Two, cfg))
        })
        .fold((lo, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Margin { min, argmin, positive: min > 0.0 }
}

/// CSV with columns `x,phi1_hat,phi2_hat,sum`.
pub fn profile_csv(cfg: &PairConfig, xs: &[f64]) -> String {
    let mut out = String::from("x,phi1_hat,phi2_hat,sum\n");
    for &x in xs {
        let (p, q) = (phi_hat_closed_form(x, Which::One, cfg), phi_hat_closed_form(x, Which::Two, cfg));
        writeln!(out, "{x:.16e},{p:.16e},{q:.16e},{:.16e}", p + q).expect("writing to a String");
    }
    out
}

/// `e^{−(st)²}`.
pub fn gaussian_target(s: f64) -> impl Fn(f64) -> Complex64 + Sync {
    move |t: f64| Complex64::new((-(s * t).powi(2)).exp(), 0.0)
}

/// Tail tolerance and time grid used for span tests: `|φ₁(t)| ≤ 2.2/(a t)²`
/// has to fall below the tolerance where the extreme translates meet the
/// grid ends.
pub const SPAN_TAIL_TOL: f64 = 1e-4;

pub fn span_grid(window: f64) -> TimeGrid {
    let half = window + 136.0;
    TimeGrid { lo: -half, hi: half, cells: ((2.0 * half) / 0.01).ceil() as usize }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSpanRow {
    pub target: String,
    pub window: f64,
    pub n_translates: usize,
    pub l1_residual: f64,
    pub target_l1: f64,
    pub coef_norm: f64,
    pub generators: usize,
}

/// Fit each target by translates of `φ₁, φ₂` (or `φ₁` alone when `single`)
/// over `Λ ∩ [−window, window]`.
pub fn pair_span_test(
    spec: &Spectrum,
    cfg: &PairConfig,
    targets: &[(&str, TimeRule<'_>)],
    window: f64,
    ridge: f64,
    single: bool,
    mode: FitMode,
) -> Result<Vec<PairSpanRow>> {
    let c = *cfg;
    let p1 = move |t: f64| phi1_eval(t, &c);
    let p2 = move |t: f64| phi2_eval(t, &c);
    let mut gens: Vec<TimeRule<'_>> = vec![&p1];
    if !single {
        gens.push(&p2);
    }
    targets
        .iter()
        .map(|(name, target)| {
            let prob = SpanProblem::new(gens.clone(), spec, window, *target, span_grid(window), SPAN_TAIL_TOL)?;
            let fit = approximate_translates(&prob, ridge, mode)?;
            Ok(PairSpanRow {
                target: name.to_string(),
                window,
                n_translates: fit.n_translates,
                l1_residual: fit.l1_residual,
                target_l1: fit.target_l1,
                coef_norm: fit.coef_norm,
                generators: gens.len(),
            })
        })
        .collect()
}
