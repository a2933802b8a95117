//! Generalized Bernstein classes `B_σ`.

use crate::density::{growth_condition_holds, IntervalFamily, PsiFunction};
use crate::numerics::optimize::{bisect, scan_then_golden};
use crate::numerics::quad::integrate;
use crate::spectrum::Spectrum;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2, PI};
use std::fmt::Write as _;

/// Nondecreasing growth bound `σ` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthFunction {
    /// `c0 + c1·y`.
    Affine { c0: f64, c1: f64 },
    /// `c0 + c1·log(shift + y)`.
    Log { c0: f64, c1: f64, shift: f64 },
    /// `c0 + coef·y^exp`.
    Power { c0: f64, coef: f64, exp: f64 },
    /// Linear interpolation through `(ys, vals)`, constant outside.
    Tabulated { ys: Vec<f64>, vals: Vec<f64> },
    /// `min(Ψ(x/2e)/2e, cap(x))` with the step cap `√S_{max(n(x),1)}`,
    /// `n(x) = #{k : xs[k] ≤ x}`.
    FromPsi { psi: PsiFunction, xs: Vec<f64>, caps: Vec<f64> },
}

impl GrowthFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("growth function: {m}")));
        match self {
            GrowthFunction::Affine { c0, c1 } => {
                if !(c0.is_finite() && *c1 >= 0.0 && c1.is_finite()) {
                    return bad("affine slope must be finite and nonnegative");
                }
            }
            GrowthFunction::Log { c0, c1, shift } => {
                if !(c0.is_finite() && *c1 >= 0.0 && *shift > 0.0) {
                    return bad("log form needs c1 ≥ 0 and shift > 0");
                }
            }
            GrowthFunction::Power { c0, coef, exp } => {
                if !(c0.is_finite() && *coef >= 0.0 && *exp >= 0.0) {
                    return bad("power form needs coef ≥ 0 and exp ≥ 0");
                }
            }
            GrowthFunction::Tabulated { ys, vals } => {
                if ys.is_empty() || ys.len() != vals.len() {
                    return bad("table needs matching, nonempty columns");
                }
                if ys.windows(2).any(|w| w[1] <= w[0]) || vals.windows(2).any(|w| w[1] < w[0]) {
                    return bad("table must be increasing in y and nondecreasing in value");
                }
                if vals.iter().chain(ys).any(|v| !v.is_finite()) {
                    return bad("table entries must be finite");
                }
            }
            GrowthFunction::FromPsi { psi, xs, caps } => {
                psi.validate()?;
                if xs.len() != caps.len() || xs.windows(2).any(|w| w[1] < w[0]) || caps.windows(2).any(|w| w[1] < w[0]) {
                    return bad("cap steps must be nondecreasing");
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            GrowthFunction::Affine { c0, c1 } => c0 + c1 * y,
            GrowthFunction::Log { c0, c1, shift } => c0 + c1 * (shift + y).ln(),
            GrowthFunction::Power { c0, coef, exp } => c0 + coef * y.powf(*exp),
            GrowthFunction::Tabulated { ys, vals } => {
                let i = ys.partition_point(|&t| t <= y);
                if i == 0 {
                    vals[0]
                } else if i == ys.len() {
                    vals[vals.len() - 1]
                } else {
                    let t = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
                    vals[i - 1] + t * (vals[i] - vals[i - 1])
                }
            }
            GrowthFunction::FromPsi { psi, xs, caps } => {
                let first = psi.eval(y / (2.0 * E)) / (2.0 * E);
                if caps.is_empty() {
                    return first;
                }
                let n = xs.partition_point(|&t| t <= y).max(1);
                first.min(caps[n - 1])
            }
        }
    }

    /// Whether `σ` stays bounded on `(0, ∞)`.
    pub fn is_bounded(&self) -> bool {
        match self {
            GrowthFunction::Affine { c1, .. } => *c1 == 0.0,
            GrowthFunction::Log { c1, .. } => *c1 == 0.0,
            GrowthFunction::Power { coef, exp, .. } => *coef == 0.0 || *exp == 0.0,
            GrowthFunction::Tabulated { .. } => true,
            GrowthFunction::FromPsi { .. } => true,
        }
    }
}

/// Weight `ω(s) = L(s) + 2 log(1 + s)` with `L(s) = sup_{y>0} (ys − yσ(y))`,
/// so that `∫₀^∞ e^{ys − ω(s)} ds ≤ e^{yσ(y)}`.
#[derive(Debug, Clone)]
pub struct Omega {
    sigma: GrowthFunction,
}

pub fn omega_from_sigma(sigma: &GrowthFunction) -> Result<Omega> {
    sigma.validate()?;
    if sigma.is_bounded() {
        let sup = match sigma {
            GrowthFunction::Tabulated { vals, .. } => vals[vals.len() - 1],
            GrowthFunction::FromPsi { caps, .. } if !caps.is_empty() => caps[caps.len() - 1],
            other => other.eval(1e300),
        };
        return Err(Error::BoundedGrowth(sup));
    }
    Ok(Omega { sigma: sigma.clone() })
}

impl Omega {
    pub fn sigma(&self) -> &GrowthFunction {
        &self.sigma
    }

    /// `L(s)`, with its maximizer (0 when the supremum is the limit at 0⁺).
    pub fn legendre_with_arg(&self, s: f64) -> (f64, f64) {
        let sig = &self.sigma;
        if sig.eval(0.0) >= s {
            return (0.0, 0.0);
        }
        // y(s − σ(y)) > 0 exactly while σ(y) < s
        let mut top = 1.0;
        while sig.eval(top) < s {
            top *= 2.0;
        }
        let (y, v) = scan_then_golden(|y| -y * (s - sig.eval(y)), 0.0, top, 257, 1e-14);
        if -v > 0.0 {
            (-v, y)
        } else {
            (0.0, 0.0)
        }
    }

    pub fn legendre(&self, s: f64) -> f64 {
        self.legendre_with_arg(s).0
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.legendre(s) + 2.0 * s.ln_1p()
    }

    /// Both sides of `∫₀^∞ e^{ys − ω(s)} ds ≤ e^{yσ(y)}`.
    pub fn check(&self, y: f64) -> OmegaRow {
        let bound = y * self.sigma.eval(y);
        // for s > S the integrand is below e^{y′σ(y′) − (y′ − y)s} with y′ = y + 1
        let y1 = y + 1.0;
        let cut = (y1 * self.sigma.eval(y1) - bound + 40.0).max(1.0);
        let tail = (y1 * self.sigma.eval(y1) - cut - bound).exp();
        // relative to e^{yσ(y)}
        let r = integrate(|s| (y * s - self.eval(s) - bound).exp(), 0.0, cut, &[], 1e-12, 4000);
        OmegaRow { y, integral_rel: r.value + tail, quad_error: r.error, log_bound: bound }
    }
}

/// `integral_rel = e^{−yσ(y)}∫₀^∞ e^{ys − ω(s)} ds`, which must stay ≤ 1.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaRow {
    pub y: f64,
    pub integral_rel: f64,
    pub quad_error: f64,
    pub log_bound: f64,
}

/// `min_{y>0} (yσ(y) − n log y)` with its minimizer.
fn lemma34_min(n: u64, sigma: &GrowthFunction) -> Result<(f64, f64)> {
    let nf = n as f64;
    let obj = |u: f64| {
        let y = u.exp();
        y * sigma.eval(y) - nf * u
    };
    let (lo, hi) = (-40.0, 40.0);
    let (u, v) = scan_then_golden(obj, lo, hi, 801, 1e-14);
    if hi - u < 1e-3 {
        return Err(Error::InvalidParameter("σ too small: the bound has no interior minimizer".into()));
    }
    Ok((u.exp(), v))
}

/// `(b − a)^n · min_{y>0} e^{yσ(y)}/y^n`; 1 when `n = 0`.
pub fn lemma34_bound(n: u64, a: f64, b: f64, sigma: &GrowthFunction) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidParameter(format!("need a < b, got ({a}, {b})")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let (_, v) = lemma34_min(n, sigma)?;
    Ok((n as f64 * (b - a).ln() + v).exp())
}

/// Minimizer `y` of the bound in [`lemma34_bound`].
pub fn lemma34_minimizer(n: u64, sigma: &GrowthFunction) -> Result<f64> {
    Ok(lemma34_min(n.max(1), sigma)?.0)
}

/// Entire functions with a claimed normalization `|F(x+iy)| ≤ e^{|y|σ(|y|)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntireSample {
    Constant { value: f64 },
    /// `sin(m z)`.
    Sine { m: f64 },
    /// `Π_j sin(a_j z)/(a_j z)`.
    SincProduct { a: Vec<f64> },
    /// `scale · Π_k (z − x_k) · e^{−τz²}`, claimed `σ(y) = κ + τy`.
    GaussPoly { zeros: Vec<f64>, tau: f64, kappa: f64, scale: f64 },
    /// `factor · F`.
    Scaled { factor: f64, inner: Box<EntireSample> },
}

/// Spot-check rectangle `|x| ≤ 50, |y| ≤ 20`.
const CHECK_X: f64 = 50.0;
const CHECK_Y: f64 = 20.0;

impl EntireSample {
    /// Gaussian-damped polynomial with the given real zeros, scaled so that
    /// `|F(x+iy)| ≤ e^{κ|y| + τy²}`.
    pub fn gauss_poly(zeros: Vec<f64>, tau: f64, kappa: f64) -> Result<Self> {
        if !(tau > 0.0 && kappa > 0.0) || zeros.is_empty() {
            return Err(Error::InvalidParameter("gauss_poly needs zeros, τ > 0 and κ > 0".into()));
        }
        // |F| ≤ scale·Π(|x − x_k| + |y|)·e^{τy² − τx²}; maximize the log of
        // Π(|x − x_k| + |y|)e^{−τx² − κ|y|} over a grid, then shrink.
        let n = zeros.len() as f64;
        let (zmin, zmax) = zeros.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &z| (a.min(z), b.max(z)));
        let xr = zmin.abs().max(zmax.abs()) + (n / tau).sqrt() + 2.0;
        let yr = n / kappa + 2.0;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=2000 {
            let x = -xr + 2.0 * xr * i as f64 / 2000.0;
            for j in 0..=400 {
                let y = yr * j as f64 / 400.0;
                let v: f64 = zeros.iter().map(|&z| ((x - z).abs() + y).ln()).sum::<f64>() - tau * x * x - kappa * y;
                worst = worst.max(v);
            }
        }
        // grid spacing slack
        let scale = (-(worst + 1.0)).exp();
        Ok(EntireSample::GaussPoly { zeros, tau, kappa, scale })
    }

    /// Built-in samples, each with its claimed growth.
    pub fn builtins() -> Vec<(&'static str, EntireSample)> {
        let cluster: Vec<f64> = (0..21).map(|k| 5.02 + 0.047 * k as f64).collect();
        vec![
            ("sin", EntireSample::Sine { m: 1.0 }),
            ("sin3", EntireSample::Sine { m: 3.0 }),
            ("sinc_product", EntireSample::SincProduct { a: vec![1.0, 0.5] }),
            ("half_sin", EntireSample::Scaled { factor: 0.5, inner: Box::new(EntireSample::Sine { m: 1.0 }) }),
            ("gauss_poly", EntireSample::gauss_poly(cluster, 0.5, 1.0).expect("valid built-in")),
        ]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            EntireSample::Constant { value } => Complex64::new(*value, 0.0),
            EntireSample::Sine { m } => (z * m).sin(),
            EntireSample::SincProduct { a } => a.iter().map(|&aj| crate::numerics::special::sinc_complex(z * aj)).product(),
            EntireSample::GaussPoly { zeros, tau, scale, .. } => {
                zeros.iter().map(|&x| z - x).product::<Complex64>() * (-z * z * tau).exp() * scale
            }
            EntireSample::Scaled { factor, inner } => inner.eval(z) * factor,
        }
    }

    /// `log|F(x)|` on the real line, computed without overflow.
    pub fn log_abs_real(&self, x: f64) -> f64 {
        match self {
            EntireSample::Constant { value } => value.abs().ln(),
            EntireSample::Sine { m } => (m * x).sin().abs().ln(),
            EntireSample::SincProduct { a } => a.iter().map(|&aj| crate::numerics::special::sinc(aj * x).abs().ln()).sum(),
            EntireSample::GaussPoly { zeros, tau, scale, .. } => {
                zeros.iter().map(|&z| (x - z).abs().ln()).sum::<f64>() - tau * x * x + scale.ln()
            }
            EntireSample::Scaled { factor, inner } => factor.abs().ln() + inner.log_abs_real(x),
        }
    }

    /// The growth this sample claims to respect.
    pub fn claimed_sigma(&self) -> GrowthFunction {
        match self {
            EntireSample::Constant { .. } => GrowthFunction::Affine { c0: 0.0, c1: 0.0 },
            EntireSample::Sine { m } => GrowthFunction::Affine { c0: m.abs(), c1: 0.0 },
            EntireSample::SincProduct { a } => GrowthFunction::Affine { c0: a.iter().map(|x| x.abs()).sum(), c1: 0.0 },
            EntireSample::GaussPoly { tau, kappa, .. } => GrowthFunction::Affine { c0: *kappa, c1: *tau },
            EntireSample::Scaled { inner, .. } => inner.claimed_sigma(),
        }
    }

    /// Real zeros in the open interval `(lo, hi)`, repeated by multiplicity.
    /// `None` when `F` vanishes identically.
    pub fn real_zeros(&self, lo: f64, hi: f64) -> Option<Vec<f64>> {
        let multiples = |step: f64, skip_zero: bool| -> Vec<f64> {
            let first = (lo / step).floor() as i64 + 1;
            let last = (hi / step).ceil() as i64 - 1;
            (first..=last).filter(|&k| !(skip_zero && k == 0)).map(|k| k as f64 * step).filter(|&x| x > lo && x < hi).collect()
        };
        let mut z = match self {
            EntireSample::Constant { value } => {
                if *value == 0.0 {
                    return None;
                }
                vec![]
            }
            EntireSample::Sine { m } => {
                if *m == 0.0 {
                    return None;
                }
                multiples(PI / m.abs(), false)
            }
            EntireSample::SincProduct { a } => a.iter().flat_map(|&aj| multiples(PI / aj.abs(), true)).collect(),
            EntireSample::GaussPoly { zeros, scale, .. } => {
                if *scale == 0.0 {
                    return None;
                }
                zeros.iter().copied().filter(|&x| x > lo && x < hi).collect()
            }
            EntireSample::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    return None;
                }
                inner.real_zeros(lo, hi)?
            }
        };
        z.sort_by(f64::total_cmp);
        Some(z)
    }

    /// Check `log|F(z)| ≤ |y|σ(|y|) + 10⁻⁹` on a grid over the rectangle.
    pub fn spot_check(&self, sigma: &GrowthFunction) -> Result<()> {
        let (nx, ny) = (401, 81);
        for i in 0..nx {
            let x = -CHECK_X + 2.0 * CHECK_X * i as f64 / (nx - 1) as f64;
            for j in 0..ny {
                let y = -CHECK_Y + 2.0 * CHECK_Y * j as f64 / (ny - 1) as f64;
                let log_abs = self.eval(Complex64::new(x, y)).norm().ln();
                let bound = y.abs() * sigma.eval(y.abs()) + 1e-9;
                if log_abs > bound {
                    return Err(Error::GrowthViolation { re: x, im: y, log_abs, bound });
                }
            }
        }
        Ok(())
    }
}

/// Sign changes of `F` on a uniform grid of `(lo, hi)`.
pub fn sign_changes(f: &EntireSample, lo: f64, hi: f64, cells: usize) -> usize {
    let h = (hi - lo) / cells as f64;
    let vals: Vec<f64> = (1..cells).map(|i| f.eval(Complex64::new(lo + i as f64 * h, 0.0)).re).collect();
    vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// `∫_lo^hi log|F(x)|/x² dx` by adaptive quadrature split at the zeros.
pub fn log_integral(f: &EntireSample, lo: f64, hi: f64) -> Result<crate::numerics::quad::QuadResult> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    let zeros = f.real_zeros(lo, hi).ok_or(Error::VanishesOnInterval(lo))?;
    let mut breaks = zeros;
    breaks.dedup();
    let pieces = ((hi - lo) * 4.0).ceil().min(4096.0) as usize;
    breaks.extend((1..pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64));
    breaks.sort_by(f64::total_cmp);
    let r = integrate(|x| f.log_abs_real(x) / (x * x), lo, hi, &breaks, 1e-11, 200_000);
    if !r.value.is_finite() {
        return Err(Error::VanishesOnInterval(lo));
    }
    Ok(r)
}

/// `y` with `yσ(y) = n`.
pub fn y_n(sigma: &GrowthFunction, n: f64) -> Result<f64> {
    let g = |y: f64| y * sigma.eval(y) - n;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::InvalidParameter("yσ(y) never reaches n".into()));
        }
    }
    Ok(bisect(g, 0.0, hi, 1e-15))
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma35Report {
    pub a: f64,
    pub b: f64,
    pub zeros: usize,
    /// `(b − a)Ψ(b − a)`.
    pub threshold: f64,
    pub applicable: bool,
    pub y_n: Option<f64>,
    /// `∫_a^b log|F|/x²`.
    pub lhs: Option<f64>,
    /// `−log 2 ((b − a)/b)² Ψ(b − a)`.
    pub rhs: f64,
    /// `−((b − a)/ab) n log(y_n/(e(b − a)))`.
    pub intermediate: Option<f64>,
    /// `rhs − lhs`.
    pub slack: Option<f64>,
    pub quad_error: Option<f64>,
}

/// Grid used to test the growth condition `2eσ(x) ≤ Ψ(x/2e)` on `(0, x_max]`.
fn condition_grid(x_max: f64) -> Vec<f64> {
    let n = 512;
    let lo = 1e-3f64.ln();
    let hi = x_max.max(1.0).ln();
    (0..=n).map(|i| (lo + (hi - lo) * i as f64 / n as f64).exp()).collect()
}

/// First grid point violating the growth condition `2eσ(x) ≤ Ψ(x/2e)`.
pub fn first_growth_condition_violation(sigma: &GrowthFunction, psi: &PsiFunction, xs: &[f64]) -> Option<f64> {
    xs.iter().copied().find(|&x| !growth_condition_holds(sigma, psi, x))
}

/// Both sides of the log-integral bound on `(a, b)`.
pub fn lemma35_check(f: &EntireSample, a: f64, b: f64, psi: &PsiFunction, sigma: &GrowthFunction) -> Result<Lemma35Report> {
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!("need 0 < a < b, got ({a}, {b})")));
    }
    psi.validate()?;
    sigma.validate()?;
    let len = b - a;
    let zeros = f.real_zeros(a, b).ok_or(Error::VanishesOnInterval(a))?.len();
    let threshold = len * psi.eval(len);
    let rhs = -LN_2 * (len / b).powi(2) * psi.eval(len);
    let mut rep = Lemma35Report {
        a,
        b,
        zeros,
        threshold,
        applicable: false,
        y_n: None,
        lhs: None,
        rhs,
        intermediate: None,
        slack: None,
        quad_error: None,
    };
    if (zeros as f64) < threshold {
        return Ok(rep);
    }
    if let Some(x) = first_growth_condition_violation(sigma, psi, &condition_grid(4.0 * E * b)) {
        return Err(Error::InvalidParameter(format!("σ and Ψ violate 2eσ(x) ≤ Ψ(x/2e) at x = {x}")));
    }
    f.spot_check(sigma)?;
    let n = zeros as f64;
    let yn = y_n(sigma, n)?;
    let q = log_integral(f, a, b)?;
    rep.applicable = true;
    rep.y_n = Some(yn);
    rep.lhs = Some(q.value);
    rep.intermediate = Some(-(len / (a * b)) * n * (yn / (E * len)).ln());
    rep.slack = Some(rhs - q.value);
    rep.quad_error = Some(q.error);
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanRow {
    pub r: f64,
    /// `∫_{1≤|x|≤R/2} log|F(x)|/x² dx`.
    pub log_integral: f64,
    /// `log_integral + 4σ(R)`.
    pub q: f64,
    /// `∫₁^R (x⁻² − R⁻²) log|F(x)F(−x)| dx`.
    pub carleman_line: f64,
    /// `(2/R)∫₀^π log|F(Re^{iθ})| sin θ dθ`.
    pub carleman_circle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanReport {
    pub rows: Vec<CarlemanRow>,
    /// `Q` at the smallest radius.
    pub calibration: f64,
    pub tolerance: f64,
    /// Every `Q(R) ≥ calibration − tolerance`.
    pub holds: bool,
}

fn line_integral(f: &EntireSample, lo: f64, hi: f64, weight: impl Fn(f64) -> f64) -> Result<f64> {
    let mut breaks = f.real_zeros(lo, hi).ok_or(Error::VanishesOnInterval(lo))?;
    if let Some(neg) = f.real_zeros(-hi, -lo) {
        breaks.extend(neg.into_iter().map(|x| -x));
    }
    let pieces = ((hi - lo) * 2.0).ceil().min(4096.0) as usize;
    breaks.extend((1..pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate(|x| weight(x) * (f.log_abs_real(x) + f.log_abs_real(-x)), lo, hi, &breaks, 1e-11, 200_000);
    Ok(r.value)
}

/// Carleman ingredients and the derived lower bound over a grid of radii.
pub fn carleman_check(f: &EntireSample, radii: &[f64], sigma: &GrowthFunction, tolerance: f64) -> Result<CarlemanReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 2.0)) {
        return Err(Error::InvalidParameter("radii must be nonempty and above 2".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let li = line_integral(f, 1.0, r / 2.0, |x| 1.0 / (x * x))?;
        let line = line_integral(f, 1.0, r, |x| 1.0 / (x * x) - 1.0 / (r * r))?;
        let circle = integrate(
            |t| f.eval(Complex64::from_polar(r, t)).norm().ln() * t.sin(),
            0.0,
            PI,
            &(1..64).map(|i| PI * i as f64 / 64.0).collect::<Vec<_>>(),
            1e-11,
            100_000,
        )
        .value
            * 2.0
            / r;
        if !(li.is_finite() && line.is_finite() && circle.is_finite()) {
            return Err(Error::VanishesOnInterval(r));
        }
        rows.push(CarlemanRow { r, log_integral: li, q: li + 4.0 * sigma.eval(r), carleman_line: line, carleman_circle: circle });
    }
    let base = rows.iter().min_by(|x, y| x.r.total_cmp(&y.r)).expect("nonempty").q;
    let holds = rows.iter().all(|row| row.q >= base - tolerance);
    Ok(CarlemanReport { rows, calibration: base, tolerance, holds })
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub b_n: f64,
    pub s_n: f64,
    pub sigma_2bn: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessCertificate {
    pub rows: Vec<DivergenceRow>,
    pub threshold: f64,
    /// First grid point where the growth condition `2eσ(x) ≤ Ψ(x/2e)` fails.
    pub growth_condition_violation: Option<f64>,
    pub pass: bool,
    pub reason: String,
}

impl UniquenessCertificate {
    /// CSV with columns `n,b_n,S_n,sigma_2bn,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,b_n,S_n,sigma_2bn,ratio\n");
        for r in &self.rows {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e},{:.16e}", r.n, r.b_n, r.s_n, r.sigma_2bn, r.ratio).expect("writing to a String");
        }
        out
    }
}

/// Finite-data evidence that `Λ` is a uniqueness set for `B_σ`: PASS when
/// `S_n/σ(2b_n)` ends above `threshold` and increases over the last quarter.
pub fn uniqueness_certificate(
    spec: &Spectrum,
    sigma: &GrowthFunction,
    psi: &PsiFunction,
    family: &IntervalFamily,
    threshold: f64,
) -> Result<UniquenessCertificate> {
    sigma.validate()?;
    psi.validate()?;
    let half = if family.reflected { spec.negative() } else { spec.positive() };
    family.verify(&half, |s| psi.eval(s))?;
    let sums = crate::density::weighted_sums(psi, family);
    let rows: Vec<DivergenceRow> = family
        .intervals
        .iter()
        .zip(&sums)
        .enumerate()
        .map(|(i, (iv, &s))| {
            let sg = sigma.eval(2.0 * iv.b);
            DivergenceRow { n: i + 1, b_n: iv.b, s_n: s, sigma_2bn: sg, ratio: s / sg }
        })
        .collect();
    let b_last = family.intervals.last().map_or(1.0, |iv| iv.b);
    let mut grid = condition_grid(4.0 * b_last);
    grid.extend(family.intervals.iter().map(|iv| 2.0 * iv.b));
    grid.sort_by(f64::total_cmp);
    let violation = first_growth_condition_violation(sigma, psi, &grid);
    let (pass, reason) = if let Some(x) = violation {
        (false, format!("2eσ(x) ≤ Ψ(x/2e) fails at x = {x}"))
    } else if rows.len() < 2 {
        (false, "fewer than two intervals: no divergence evidence".to_string())
    } else {
        let last = rows[rows.len() - 1].ratio;
        let tail = &rows[rows.len() - (rows.len() / 4).max(2)..];
        let increasing = tail.windows(2).all(|w| w[1].ratio > w[0].ratio);
        if !(last > threshold) {
            (false, format!("final ratio {last} not above {threshold}"))
        } else if !increasing {
            (false, "ratio not increasing over the last quarter".to_string())
        } else {
            (true, format!("final ratio {last} above {threshold} and increasing"))
        }
    };
    Ok(UniquenessCertificate { rows, threshold, growth_condition_violation: violation, pass, reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{sigma_from_psi, Interval};
    use crate::spectrum::Window;
    use proptest::prelude::*;

    fn linear() -> GrowthFunction {
        GrowthFunction::Affine { c0: 0.0, c1: 1.0 }
    }

    fn sin() -> EntireSample {
        EntireSample::Sine { m: 1.0 }
    }

    #[test]
    fn legendre_of_linear_growth() {
        let om = omega_from_sigma(&linear()).unwrap();
        for i in 0..=40 {
            let s = 0.5 * i as f64;
            let (l, y) = om.legendre_with_arg(s);
            assert!((l - s * s / 4.0).abs() < 1e-8, "s = {s}");
            if s > 0.0 {
                assert!((y - s / 2.0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn weight_inequality_for_linear_growth() {
        let om = omega_from_sigma(&linear()).unwrap();
        for y in [0.0, 1.0, 2.0, 4.0] {
            let row = om.check(y);
            assert!(row.integral_rel <= 1.0 + 1e-6, "{row:?}");
        }
        // y = 0: ∫e^{−s²/4}(1+s)⁻² ds < ∫(1+s)⁻² ds = 1
        let r0 = om.check(0.0).integral_rel;
        let oracle = integrate(|s| (-s * s / 4.0).exp() / (1.0 + s).powi(2), 0.0, 60.0, &[], 1e-14, 4000).value;
        assert!((r0 - oracle).abs() < 1e-9 && r0 < 1.0);
    }

    #[test]
    fn weight_inequality_for_log_growth() {
        let sig = GrowthFunction::Log { c0: 0.0, c1: 1.0, shift: E };
        let om = omega_from_sigma(&sig).unwrap();
        for i in 0..32 {
            let y = 0.25 * i as f64;
            assert!(om.check(y).integral_rel <= 1.0 + 1e-6, "y = {y}");
        }
        assert!(om.legendre(50.0).is_finite());
    }

    #[test]
    fn bounded_growth_rejected() {
        let sig = GrowthFunction::Affine { c0: 2.0, c1: 0.0 };
        assert!(matches!(omega_from_sigma(&sig), Err(Error::BoundedGrowth(v)) if v == 2.0));
    }

    #[test]
    fn lemma34_closed_form() {
        let sig = GrowthFunction::Affine { c0: 1.0, c1: 1.0 };
        let v = lemma34_bound(3, 0.0, 2.0, &sig).unwrap();
        let want = 8.0 * E * E;
        assert!((v - want).abs() < 1e-6 * want, "{v}");
        assert!((lemma34_minimizer(3, &sig).unwrap() - 1.0).abs() < 1e-6);
        // grid oracle
        let grid = (1..100_000).map(|i| i as f64 * 1e-4).map(|y| 8.0 * (y * (1.0 + y)).exp() / y.powi(3)).fold(f64::INFINITY, f64::min);
        assert!(v <= grid * (1.0 + 1e-9));
        assert_eq!(lemma34_bound(0, 0.0, 2.0, &sig).unwrap(), 1.0);
    }

    #[test]
    fn lemma34_dominates_sine() {
        let sig = GrowthFunction::Affine { c0: 1.0, c1: 0.0 };
        let f = sin();
        assert_eq!(f.real_zeros(0.5, 9.9).unwrap().len(), 3);
        let bound = lemma34_bound(3, 0.5, 9.9, &sig).unwrap();
        let sup = (0..=1000).map(|i| f.eval(Complex64::new(0.5 + 9.4 * i as f64 / 1000.0, 0.0)).norm()).fold(0.0, f64::max);
        assert!(sup <= bound);
    }

    #[test]
    fn lemma34_monotone_sweep() {
        let sig = GrowthFunction::Affine { c0: 1.0, c1: 1.0 };
        for n in 1..6 {
            let mut prev = 0.0;
            for i in 1..40 {
                let v = lemma34_bound(n, 0.0, 0.1 * i as f64, &sig).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
        // short intervals: more zeros, smaller bound
        for i in 1..5 {
            let len = 0.05 * i as f64;
            let mut prev = f64::INFINITY;
            for n in 1..8 {
                let v = lemma34_bound(n, 0.0, len, &sig).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn log_integral_constant_and_sine() {
        let one = EntireSample::Constant { value: 1.0 };
        assert_eq!(log_integral(&one, 1.0, 10.0).unwrap().value, 0.0);
        let got = log_integral(&sin(), 1.0, 10.0).unwrap();
        // oracle: subtract the log singularities and integrate the rest on a fine midpoint grid
        let zeros = [PI, 2.0 * PI, 3.0 * PI];
        let smooth = |x: f64| (x.sin().abs().ln() - zeros.iter().map(|z| (x - z).abs().ln()).sum::<f64>()) / (x * x);
        let n = 2_000_000;
        let h = 9.0 / n as f64;
        let mut oracle: f64 = (0..n).map(|i| smooth(1.0 + (i as f64 + 0.5) * h)).sum::<f64>() * h;
        for z in zeros {
            // ∫ log|x − z|/x² on [1, 10] by adaptive quadrature with the singular point as a breakpoint
            oracle += integrate(|x| (x - z).abs().ln() / (x * x), 1.0, 10.0, &[z], 1e-13, 10_000).value;
        }
        assert!((got.value - oracle).abs() < 1e-6, "{} vs {oracle}", got.value);
    }

    #[test]
    fn log_integral_scaling() {
        let half = EntireSample::Scaled { factor: 0.5, inner: Box::new(sin()) };
        let (lo, hi) = (1.0, 10.0);
        let a = log_integral(&sin(), lo, hi).unwrap().value;
        let b = log_integral(&half, lo, hi).unwrap().value;
        assert!((b - a + LN_2 * (1.0 / lo - 1.0 / hi)).abs() < 1e-9);
    }

    #[test]
    fn vanishing_function_rejected() {
        let zero = EntireSample::Constant { value: 0.0 };
        assert!(matches!(log_integral(&zero, 1.0, 2.0), Err(Error::VanishesOnInterval(_))));
    }

    #[test]
    fn known_zeros_match_sign_changes() {
        for (name, f) in EntireSample::builtins() {
            let z = f.real_zeros(0.3, 12.0).unwrap();
            let mut simple = z.clone();
            simple.dedup();
            let odd = simple.iter().filter(|&&x| z.iter().filter(|&&y| y == x).count() % 2 == 1).count();
            assert_eq!(sign_changes(&f, 0.3, 12.0, 200_000), odd, "{name}");
        }
    }

    #[test]
    fn builtins_pass_spot_check() {
        for (name, f) in EntireSample::builtins() {
            f.spot_check(&f.claimed_sigma()).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn spot_check_detects_violation() {
        let f = EntireSample::Sine { m: 2.0 };
        let sig = GrowthFunction::Affine { c0: 1.0, c1: 0.0 };
        assert!(matches!(f.spot_check(&sig), Err(Error::GrowthViolation { .. })));
    }

    #[test]
    fn y_n_linear() {
        assert!((y_n(&linear(), 4.0).unwrap() - 2.0).abs() < 1e-12);
    }

    /// Tightest weight allowed by the growth condition `2eσ(x) ≤ Ψ(x/2e)` for the claimed growth.
    fn psi_for(sigma: &GrowthFunction) -> PsiFunction {
        match sigma {
            GrowthFunction::Affine { c0, c1 } => PsiFunction::Affine { c0: 2.0 * E * c0, c1: 4.0 * E * E * c1 },
            _ => unreachable!(),
        }
    }

    #[test]
    fn lemma35_short_interval_around_zero() {
        let f = sin();
        let sig = f.claimed_sigma();
        let rep = lemma35_check(&f, PI - 0.04, PI + 0.04, &psi_for(&sig), &sig).unwrap();
        assert!(rep.applicable);
        assert_eq!(rep.zeros, 1);
        assert!(rep.slack.unwrap() >= -1e-6, "{rep:?}");
        assert!(rep.lhs.unwrap() <= rep.intermediate.unwrap() + 1e-9);
    }

    #[test]
    fn lemma35_dense_cluster() {
        let (_, f) = EntireSample::builtins().into_iter().find(|(n, _)| *n == "gauss_poly").unwrap();
        let sig = f.claimed_sigma();
        let rep = lemma35_check(&f, 5.0, 6.0, &psi_for(&sig), &sig).unwrap();
        assert!(rep.applicable, "{rep:?}");
        assert!(rep.slack.unwrap() >= 0.0);
    }

    #[test]
    fn lemma35_zero_at_endpoint() {
        let (_, f) = EntireSample::builtins().into_iter().find(|(n, _)| *n == "gauss_poly").unwrap();
        let sig = f.claimed_sigma();
        let rep = lemma35_check(&f, 5.94, 5.94 + 0.02, &psi_for(&sig), &sig).unwrap();
        if rep.applicable {
            assert!(rep.slack.unwrap() >= -1e-6, "{rep:?}");
        }
    }

    #[test]
    fn lemma35_threshold_failure() {
        let psi = PsiFunction::Constant { value: 5.0 };
        let rep = lemma35_check(&sin(), 0.5, 2.5, &psi, &sin().claimed_sigma()).unwrap();
        assert!(!rep.applicable);
        assert_eq!(rep.zeros, 0);
        assert!(rep.lhs.is_none());
    }

    #[test]
    fn carleman_sine_regression() {
        let sig = GrowthFunction::Log { c0: 1.0, c1: 1.0, shift: 1.0 };
        let rep = carleman_check(&sin(), &[10.0, 30.0, 100.0, 300.0], &sig, 1e-3).unwrap();
        assert!(rep.holds, "{rep:?}");
        // Carleman's quantity stays bounded below
        let c: Vec<f64> = rep.rows.iter().map(|r| r.carleman_line + r.carleman_circle).collect();
        assert!(c.iter().all(|v| v.is_finite() && *v > -10.0), "{c:?}");
    }

    #[test]
    fn carleman_constant_and_scaling() {
        let sig = GrowthFunction::Affine { c0: 1.0, c1: 0.0 };
        let one = EntireSample::Constant { value: 1.0 };
        let rep = carleman_check(&one, &[10.0, 40.0], &sig, 0.0).unwrap();
        assert!(rep.rows.iter().all(|r| r.log_integral == 0.0));
        assert!(rep.holds);
        let scaled = EntireSample::Scaled { factor: (-1.0f64).exp(), inner: Box::new(sin()) };
        let a = carleman_check(&sin(), &[10.0, 30.0], &sig, 1e-3).unwrap();
        let b = carleman_check(&scaled, &[10.0, 30.0], &sig, 1e-3).unwrap();
        assert_eq!(a.holds, b.holds);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            // log|F/e| = log|F| − 1 on both ingredients
            let shift_line = -2.0 * (1.0 - 1.0 / x.r - (x.r - 1.0) / (x.r * x.r));
            assert!((y.carleman_line - x.carleman_line - shift_line).abs() < 1e-8);
            assert!((y.carleman_circle - x.carleman_circle + 4.0 / x.r).abs() < 1e-8);
        }
    }

    fn dyadic(psi0: f64, n: usize) -> (Spectrum, IntervalFamily) {
        let spec = Spectrum::arithmetic(1.0 / (2.0 * psi0), Window::Horizon(2f64.powi(n as i32 + 2))).unwrap();
        let half = spec.positive();
        let intervals = (1..=n)
            .map(|k| {
                let (a, b) = (2f64.powi(k as i32), 2f64.powi(k as i32 + 1));
                Interval { a, b, count: half.count(a, b).unwrap() }
            })
            .collect();
        (spec, IntervalFamily { intervals, reflected: false })
    }

    #[test]
    fn certificate_constant_psi_dyadic() {
        let psi0 = 100.0;
        let psi = PsiFunction::Constant { value: psi0 };
        let (spec, fam) = dyadic(psi0, 12);
        let sig = sigma_from_psi(&psi, &fam).unwrap().sigma;
        let cert = uniqueness_certificate(&spec, &sig, &psi, &fam, 10.0).unwrap();
        for row in &cert.rows {
            assert!((row.s_n - row.n as f64 * psi0 / 4.0).abs() < 1e-9);
            assert!(row.ratio >= row.s_n.sqrt() - 1e-12);
        }
        assert!(cert.pass, "{}", cert.reason);
        assert!(cert.to_csv().starts_with("n,b_n,S_n,sigma_2bn,ratio\n"));
    }

    #[test]
    fn certificate_single_interval_fails() {
        let psi = PsiFunction::Constant { value: 100.0 };
        let (spec, fam) = dyadic(100.0, 1);
        let sig = sigma_from_psi(&psi, &fam).unwrap().sigma;
        assert!(!uniqueness_certificate(&spec, &sig, &psi, &fam, 10.0).unwrap().pass);
    }

    #[test]
    fn certificate_condition_violation() {
        let psi = PsiFunction::Constant { value: 4.0 };
        let (spec, fam) = dyadic(4.0, 6);
        let sig = GrowthFunction::Affine { c0: 4.0, c1: 0.0 };
        let cert = uniqueness_certificate(&spec, &sig, &psi, &fam, 10.0).unwrap();
        assert!(!cert.pass);
        assert!(cert.growth_condition_violation.is_some());
    }

    #[test]
    fn growth_serde_roundtrip() {
        let g = GrowthFunction::Log { c0: 1.0, c1: 1.0, shift: 1.0 };
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<GrowthFunction>(&s).unwrap(), g);
        let bad = r#"{"kind":"tabulated","ys":[0,1,2],"vals":[0,2,1]}"#;
        assert!(serde_json::from_str::<GrowthFunction>(bad).unwrap().validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weight_inequality_random_affine(c0 in 0.0f64..2.0, c1 in 0.1f64..2.0, y in 0.0f64..4.0) {
            let om = omega_from_sigma(&GrowthFunction::Affine { c0, c1 }).unwrap();
            prop_assert!(om.check(y).integral_rel <= 1.0 + 1e-6);
        }

        #[test]
        fn log_integral_linear_in_scale(c in 0.01f64..5.0, lo in 0.5f64..3.0, len in 0.5f64..6.0) {
            let hi = lo + len;
            let scaled = EntireSample::Scaled { factor: c, inner: Box::new(sin()) };
            let a = log_integral(&sin(), lo, hi).unwrap().value;
            let b = log_integral(&scaled, lo, hi).unwrap().value;
            prop_assert!((b - a - c.ln() * (1.0 / lo - 1.0 / hi)).abs() < 1e-8);
        }

        #[test]
        fn lemma35_never_violated(start in 0.5f64..20.0, len in 0.01f64..0.3, which in 0usize..5) {
            let (_, f) = EntireSample::builtins().swap_remove(which);
            let sig = f.claimed_sigma();
            let rep = lemma35_check(&f, start, start + len, &psi_for(&sig), &sig).unwrap();
            if rep.applicable {
                prop_assert!(rep.slack.unwrap() >= -1e-6, "{:?}", rep);
            }
        }
    }
}
