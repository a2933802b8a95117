//! Sobolev-norm least squares by exponentials.
//!
//! The norm on `I` is `‖h‖_I = ‖h‖_{L²(I)} + ‖h′‖_{L²(I)}`.  Fits minimize the
//! Hilbert form `‖r‖² + ‖r′‖²` of the residual, which is within a factor `√2`
//! of `‖r‖_I²`; residuals are always reported in `‖·‖_I`.

use crate::linalg::ridge_lstsq;
use crate::numerics::quad::trapezoid_weights;
use crate::spectrum::Spectrum;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Smallest admissible number of grid cells.
pub const MIN_CELLS: usize = 16;
/// Default number of grid cells.
pub const DEFAULT_CELLS: usize = 2048;
/// Default Tikhonov weight.
pub const DEFAULT_RIDGE: f64 = 1e-10;

/// Complex samples of `h` and `h′` on a uniform grid of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    lo: f64,
    hi: f64,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
}

impl SampledFunction {
    /// Samples `f` and its derivative `df` on `cells + 1` nodes.
    pub fn with_derivative(
        lo: f64,
        hi: f64,
        cells: usize,
        f: impl Fn(f64) -> Complex64 + Sync,
        df: impl Fn(f64) -> Complex64 + Sync,
    ) -> Result<Self> {
        check_grid(lo, hi, cells)?;
        let h = (hi - lo) / cells as f64;
        let values: Vec<Complex64> = (0..=cells).into_par_iter().map(|i| f(lo + i as f64 * h)).collect();
        let derivs: Vec<Complex64> = (0..=cells).into_par_iter().map(|i| df(lo + i as f64 * h)).collect();
        Self::from_samples(lo, hi, values, derivs)
    }

    /// Samples `f`; derivatives by second-order central differences
    /// (one-sided at the ends).
    pub fn from_fn(lo: f64, hi: f64, cells: usize, f: impl Fn(f64) -> Complex64 + Sync) -> Result<Self> {
        check_grid(lo, hi, cells)?;
        let h = (hi - lo) / cells as f64;
        let values: Vec<Complex64> = (0..=cells).into_par_iter().map(|i| f(lo + i as f64 * h)).collect();
        let derivs = central_differences(&values, h);
        Self::from_samples(lo, hi, values, derivs)
    }

    pub fn from_samples(lo: f64, hi: f64, values: Vec<Complex64>, derivs: Vec<Complex64>) -> Result<Self> {
        check_grid(lo, hi, values.len().saturating_sub(1))?;
        if derivs.len() != values.len() {
            return Err(Error::InvalidParameter("values and derivatives differ in length".into()));
        }
        if values.iter().chain(&derivs).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        Ok(SampledFunction { lo, hi, values, derivs })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.cells() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.node(i)).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn derivs(&self) -> &[Complex64] {
        &self.derivs
    }

    /// Pointwise `self − other` on the same grid.
    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        if self.lo != other.lo || self.hi != other.hi || self.cells() != other.cells() {
            return Err(Error::InvalidParameter("grids differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(a, b)| a - b).collect();
        Ok(SampledFunction { lo: self.lo, hi: self.hi, values, derivs })
    }

    /// CSV with columns `x,re,im,dre,dim`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im,dre,dim\n");
        for (i, (v, d)) in self.values.iter().zip(&self.derivs).enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", self.node(i), v.re, v.im, d.re, d.im)
                .expect("writing to a String");
        }
        out
    }
}

fn check_grid(lo: f64, hi: f64, cells: usize) -> Result<()> {
    if !(hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("interval [{lo}, {hi}] is empty")));
    }
    if cells < MIN_CELLS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_CELLS} grid cells, got {cells}")));
    }
    Ok(())
}

fn central_differences(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

fn l2(values: &[Complex64], h: f64) -> f64 {
    let w = trapezoid_weights(values.len(), h);
    values.iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖h‖_{L²} + ‖h′‖_{L²}` by the trapezoid rule.
pub fn sobolev_norm(h: &SampledFunction) -> f64 {
    let step = h.step();
    l2(&h.values, step) + l2(&h.derivs, step)
}

/// Sobolev norm over a window of the real line, which bounds the `L¹` norm of
/// the inverse transform.  The samples must have decayed to `tail_tol` at
/// both ends.
pub fn l1_from_sobolev(phi_hat: &SampledFunction, tail_tol: f64) -> Result<f64> {
    let tail = phi_hat.values[0].norm().max(phi_hat.values[phi_hat.cells()].norm());
    if tail > tail_tol {
        return Err(Error::WindowTooSmall { tail, tol: tail_tol });
    }
    Ok(sobolev_norm(phi_hat))
}

/// `Σ c_λ e^{iλζ}` with distinct real frequencies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPolynomial {
    terms: Vec<(f64, Complex64)>,
}

impl TrigPolynomial {
    pub fn new(mut terms: Vec<(f64, Complex64)>) -> Result<Self> {
        if terms.iter().any(|(l, _)| !l.is_finite()) {
            return Err(Error::InvalidParameter("frequencies must be finite".into()));
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("frequencies must be distinct".into()));
        }
        Ok(TrigPolynomial { terms })
    }

    pub fn zero() -> Self {
        TrigPolynomial::default()
    }

    pub fn terms(&self) -> &[(f64, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, zeta: f64) -> Complex64 {
        self.terms.iter().map(|(l, c)| c * Complex64::cis(l * zeta)).sum()
    }

    pub fn deriv(&self, zeta: f64) -> Complex64 {
        self.terms.iter().map(|(l, c)| c * Complex64::new(0.0, *l) * Complex64::cis(l * zeta)).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coef_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ |c_λ| (1 + |λ|)`, an upper bound for `sup|P| + sup|P′|`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(l, c)| c.norm() * (1.0 + l.abs())).sum()
    }

    /// Samples on the grid of `like`.
    pub fn sample_like(&self, like: &SampledFunction) -> SampledFunction {
        let nodes = like.nodes();
        let values = nodes.par_iter().map(|&x| self.eval(x)).collect();
        let derivs = nodes.par_iter().map(|&x| self.deriv(x)).collect();
        SampledFunction { lo: like.lo, hi: like.hi, values, derivs }
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub poly: TrigPolynomial,
    /// `‖target − P‖_I` without the ridge term.
    pub residual: f64,
}

/// Least-squares fit of `target` by exponentials `e^{iλζ}`, `λ ∈ freqs`,
/// minimizing `‖r‖² + ‖r′‖² + ridge·‖c‖²` on the target's grid.
pub fn fit_exponentials(target: &SampledFunction, freqs: &[f64], ridge: f64) -> Result<Fit> {
    let mut sorted = freqs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidParameter("frequencies must be finite and distinct".into()));
    }
    let n = freqs.len();
    if n == 0 {
        return Ok(Fit { poly: TrigPolynomial::zero(), residual: sobolev_norm(target) });
    }
    let nodes = target.nodes();
    let m = nodes.len();
    let sw: Vec<f64> = trapezoid_weights(m, target.step()).into_iter().map(f64::sqrt).collect();
    let cols: Vec<Vec<Complex64>> = freqs
        .par_iter()
        .map(|&l| {
            let mut col = Vec::with_capacity(2 * m);
            col.extend(nodes.iter().zip(&sw).map(|(&x, &w)| Complex64::cis(l * x) * w));
            col.extend(nodes.iter().zip(&sw).map(|(&x, &w)| Complex64::new(0.0, l) * Complex64::cis(l * x) * w));
            col
        })
        .collect();
    let a = DMatrix::from_fn(2 * m, n, |i, j| cols[j][i]);
    let rhs: Vec<Complex64> = target
        .values
        .iter()
        .zip(&sw)
        .map(|(v, w)| v * w)
        .chain(target.derivs.iter().zip(&sw).map(|(v, w)| v * w))
        .collect();
    let sol = ridge_lstsq(&a, &rhs, ridge)?;
    let poly = TrigPolynomial::new(freqs.iter().copied().zip(sol.x).collect())?;
    let residual = sobolev_norm(&target.sub(&poly.sample_like(target))?);
    Ok(Fit { poly, residual })
}

/// `(‖r‖² + ‖r′‖²)^{1/2}` for `r = target − poly`, the quantity the fit minimizes.
pub fn hilbert_residual(target: &SampledFunction, poly: &TrigPolynomial) -> f64 {
    let r = poly.sample_like(target);
    let step = target.step();
    let a = l2(&target.values.iter().zip(&r.values).map(|(x, y)| x - y).collect::<Vec<_>>(), step);
    let b = l2(&target.derivs.iter().zip(&r.derivs).map(|(x, y)| x - y).collect::<Vec<_>>(), step);
    (a * a + b * b).sqrt()
}

/// The bump `(1 − (ζ/ρ)²)²` on `[−ρ, ρ]` with its exact derivative.
pub fn bump(rho: f64, cells: usize) -> Result<SampledFunction> {
    SampledFunction::with_derivative(
        -rho,
        rho,
        cells,
        |z| {
            let u = 1.0 - (z / rho).powi(2);
            Complex64::new(u * u, 0.0)
        },
        |z| {
            let u = 1.0 - (z / rho).powi(2);
            Complex64::new(-4.0 * z / (rho * rho) * u, 0.0)
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRow {
    pub rho: f64,
    pub residual: f64,
    pub coef_norm: f64,
    pub n_freqs: usize,
    /// Grid cells after refinement.
    pub cells: usize,
}

/// Largest grid used by the refinement loop.
pub const MAX_CELLS: usize = 32768;

/// Fit with grid doubling until the residual changes by less than
/// `rel_tol·‖target‖_I` or the grid reaches [`MAX_CELLS`].
pub fn fit_refined(
    make: impl Fn(usize) -> Result<SampledFunction>,
    freqs: &[f64],
    ridge: f64,
    cells: usize,
    rel_tol: f64,
) -> Result<(Fit, usize)> {
    let mut cells = cells.max(MIN_CELLS);
    let target = make(cells)?;
    let scale = sobolev_norm(&target).max(f64::MIN_POSITIVE);
    let mut fit = fit_exponentials(&target, freqs, ridge)?;
    while cells < MAX_CELLS {
        let next = fit_exponentials(&make(2 * cells)?, freqs, ridge)?;
        cells *= 2;
        let change = (next.residual - fit.residual).abs() / scale;
        fit = next;
        if change < rel_tol {
            break;
        }
    }
    Ok((fit, cells))
}

/// Residual of the bump fit by `Λ ∩ [−max_freq, max_freq]` for each `ρ`.
pub fn radius_scan(spec: &Spectrum, rho_grid: &[f64], max_freq: f64, ridge: f64, cells: usize) -> Result<Vec<RadiusRow>> {
    if rho_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    let freqs = frequencies_within(spec, max_freq)?;
    rho_grid
        .par_iter()
        .map(|&rho| {
            let (fit, cells) = fit_refined(|m| bump(rho, m), &freqs, ridge, cells, 1e-6)?;
            Ok(RadiusRow { rho, residual: fit.residual, coef_norm: fit.poly.coef_norm(), n_freqs: freqs.len(), cells })
        })
        .collect()
}

/// Realized points of `spec` with `|λ| ≤ max_freq`, found by walking
/// neighbours so that large windows are never realized.
pub fn frequencies_within(spec: &Spectrum, max_freq: f64) -> Result<Vec<f64>> {
    let (lo, hi) = spec.extent();
    if !(max_freq >= 0.0) || max_freq > hi {
        return Err(Error::OutOfWindow { a: -max_freq, b: max_freq, lo, hi });
    }
    let mut out = Vec::new();
    let mut next = spec.next_above(-max_freq - 1.0);
    while let Some(x) = next {
        if x > max_freq {
            break;
        }
        if x >= -max_freq {
            out.push(x);
        }
        next = spec.next_above(x);
    }
    Ok(out)
}

/// CSV with columns `rho,residual,coef_norm,n_freqs`.
pub fn radius_csv(rows: &[RadiusRow]) -> String {
    let mut out = String::from("rho,residual,coef_norm,n_freqs\n");
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{}", r.rho, r.residual, r.coef_norm, r.n_freqs).expect("writing to a String");
    }
    out
}
