//! Substantial interval families and Beurling–Malliavin density lower bounds.
//!
//! Intervals have half-gap endpoints: the midpoints between consecutive
//! points of `Λ⁺`, together with `λ₁/2`.  Every returned family is checked
//! against the raw spectrum, so a family is its own certificate.

use crate::bernstein::GrowthFunction;
use crate::spectrum::{HalfLine, Spectrum};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::E;
use std::fmt::Write as _;

/// Candidate right endpoints are scanned one by one when the block holds at
/// most this many points; larger blocks are bisected.
const SCAN_LIMIT: u64 = 2048;

/// Nondecreasing weight `Ψ` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiFunction {
    Constant { value: f64 },
    /// `log(1 + s)`.
    Log,
    /// `c0 + c1·s`.
    Affine { c0: f64, c1: f64 },
    /// `coef·s^exp`.
    Power { coef: f64, exp: f64 },
    /// `values[i]` on `(breakpoints[i-1], breakpoints[i]]`, with
    /// `values.len() == breakpoints.len() + 1`.
    Step { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl PsiFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("psi: {m}")));
        match self {
            PsiFunction::Constant { value } if !value.is_finite() => bad("constant must be finite"),
            PsiFunction::Affine { c0, c1 } if !(c0.is_finite() && c1.is_finite() && *c1 >= 0.0) => {
                bad("affine slope must be nonnegative")
            }
            PsiFunction::Power { coef, exp } if !(*coef >= 0.0 && *exp >= 0.0 && coef.is_finite()) => {
                bad("power form needs coef ≥ 0 and exp ≥ 0")
            }
            PsiFunction::Step { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad("step needs one more value than breakpoints");
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) || breakpoints.iter().any(|b| !(*b > 0.0)) {
                    return bad("breakpoints must be positive and strictly increasing");
                }
                if values.windows(2).any(|w| w[1] < w[0]) || values.iter().any(|v| !v.is_finite()) {
                    return bad("step values must be finite and nondecreasing");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            PsiFunction::Constant { value } => *value,
            PsiFunction::Log => s.ln_1p(),
            PsiFunction::Affine { c0, c1 } => c0 + c1 * s,
            PsiFunction::Power { coef, exp } => coef * s.powf(*exp),
            PsiFunction::Step { breakpoints, values } => values[breakpoints.partition_point(|&b| b < s)],
        }
    }
}

/// One interval `(a, b)` of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub count: u64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn ratio(&self) -> f64 {
        self.count as f64 / self.len()
    }

    /// `((b − a)/b)²`.
    pub fn term(&self) -> f64 {
        let t = self.len() / self.b;
        t * t
    }
}

/// Disjoint increasing intervals with their count ratios.
///
/// Consecutive intervals may share an endpoint; as open intervals they are
/// still disjoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub intervals: Vec<Interval>,
    /// Whether the intervals live on `(−Λ) ∩ (0,∞)`.
    pub reflected: bool,
}

impl IntervalFamily {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::ratio).collect()
    }

    /// `Σ ((b_k − a_k)/b_k)²`, summed in order.
    pub fn divergence_sum(&self) -> f64 {
        self.intervals.iter().map(Interval::term).sum()
    }

    /// Recount every interval on `half` and check ordering, positivity and
    /// `ratio > threshold(len)`.
    pub fn verify(&self, half: &HalfLine<'_>, threshold: impl Fn(f64) -> f64) -> Result<()> {
        let mut prev = 0.0;
        for (k, iv) in self.intervals.iter().enumerate() {
            if !(iv.a > 0.0 && iv.a >= prev && iv.a < iv.b) {
                return Err(Error::InvalidParameter(format!("interval {k} ({}, {}) out of order", iv.a, iv.b)));
            }
            let c = half.count(iv.a, iv.b)?;
            if c != iv.count {
                return Err(Error::InvalidParameter(format!("interval {k}: stored count {} but recount {c}", iv.count)));
            }
            if !(iv.ratio() > threshold(iv.len())) {
                return Err(Error::InvalidParameter(format!("interval {k}: ratio {} not above threshold", iv.ratio())));
            }
            prev = iv.b;
        }
        Ok(())
    }

    /// CSV with columns `a,b,count,ratio,term,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,count,ratio,term,cumulative\n");
        let mut cum = 0.0;
        for iv in &self.intervals {
            cum += iv.term();
            writeln!(out, "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}", iv.a, iv.b, iv.count, iv.ratio(), iv.term(), cum)
                .expect("writing to a String");
        }
        out
    }
}

/// Largest point `≤ y`.
fn last_at_or_below(h: &HalfLine<'_>, y: f64) -> Option<f64> {
    match h.next_above(y) {
        Some(q) => h.prev_below(q),
        None => match h.prev_below(y) {
            Some(p) => Some(h.next_above(p).filter(|&r| r <= y).unwrap_or(p)),
            None => h.next_above(0.0).filter(|&r| r <= y),
        },
    }
}

/// Largest half-gap endpoint `≤ y`.
fn mid_at_or_before(h: &HalfLine<'_>, y: f64) -> Option<f64> {
    let Some(p) = last_at_or_below(h, y) else {
        return h.next_above(0.0).map(|p| 0.5 * p).filter(|&m| m <= y);
    };
    if let Some(q) = h.next_above(p) {
        let m = 0.5 * (p + q);
        if m <= y {
            return Some(m);
        }
    }
    mid_before_point(h, p)
}

/// The half-gap endpoint just below the point `p`.
fn mid_before_point(h: &HalfLine<'_>, p: f64) -> Option<f64> {
    Some(match h.prev_below(p) {
        Some(pp) => 0.5 * (pp + p),
        None => 0.5 * p,
    })
}

/// Smallest half-gap endpoint `≥ x`.
fn mid_at_or_after(h: &HalfLine<'_>, x: f64) -> Option<f64> {
    let q = h.next_above(x)?;
    let m = mid_before_point(h, q)?;
    if m >= x {
        return Some(m);
    }
    h.next_above(q).map(|r| 0.5 * (q + r))
}

/// Smallest half-gap endpoint `> x`.
fn mid_after(h: &HalfLine<'_>, x: f64) -> Option<f64> {
    let q = h.next_above(x)?;
    let m = mid_before_point(h, q)?;
    if m > x {
        return Some(m);
    }
    h.next_above(q).map(|r| 0.5 * (q + r))
}

/// Greedy search for intervals with `count/(b−a) > threshold(b−a)` and
/// `b ≤ 2a`, walking from `start` up to `horizon`.  Stops early once the
/// partial sum reaches `stop_at`.
fn greedy(
    h: &HalfLine<'_>,
    threshold: &dyn Fn(f64) -> f64,
    start: f64,
    horizon: f64,
    stop_at: f64,
) -> Result<IntervalFamily> {
    let mut fam = IntervalFamily { intervals: Vec::new(), reflected: h.is_reflected() };
    let mut sum = 0.0;
    let accept = |a: f64, b: f64| -> Result<Option<Interval>> {
        let count = h.count(a, b)?;
        let iv = Interval { a, b, count };
        Ok((iv.ratio() > threshold(iv.len())).then_some(iv))
    };
    let mut a = match mid_at_or_after(h, start) {
        Some(a) => a,
        None => return Ok(fam),
    };
    while a < horizon && sum < stop_at {
        let cap = (2.0 * a).min(horizon);
        let mut found = None;
        let block = match mid_at_or_before(h, cap) {
            Some(b0) if b0 > a => {
                let n = h.count(a, b0)?;
                if n <= SCAN_LIMIT {
                    let mut b = b0;
                    while b > a {
                        if let Some(iv) = accept(a, b)? {
                            found = Some(iv);
                            break;
                        }
                        match last_at_or_below(h, b).and_then(|p| mid_before_point(h, p)) {
                            Some(m) => b = m,
                            None => break,
                        }
                    }
                } else {
                    let mut b = b0;
                    for _ in 0..64 {
                        if b <= a {
                            break;
                        }
                        if let Some(iv) = accept(a, b)? {
                            found = Some(iv);
                            break;
                        }
                        match mid_at_or_before(h, a + 0.5 * (b - a)) {
                            Some(m) if m < b => b = m,
                            _ => break,
                        }
                    }
                }
                n
            }
            _ => 0,
        };
        match found {
            Some(iv) => {
                sum += iv.term();
                a = iv.b;
                fam.intervals.push(iv);
            }
            None => {
                let next = if block <= SCAN_LIMIT {
                    mid_after(h, a)
                } else {
                    mid_at_or_after(h, a * 2f64.powf(0.25))
                };
                match next {
                    Some(n) => a = n,
                    None => break,
                }
            }
        }
    }
    Ok(fam)
}

fn check_horizon(h: &HalfLine<'_>, horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || horizon > h.horizon() {
        return Err(Error::OutOfWindow { a: 0.0, b: horizon, lo: 0.0, hi: h.horizon() });
    }
    Ok(())
}

fn check_s_min(s_min: f64) -> Result<()> {
    if !(s_min > 0.0) {
        return Err(Error::InvalidParameter(format!("s_min must be positive, got {s_min}")));
    }
    Ok(())
}

/// Greedy maximal family on `(0, horizon)` with every ratio `> d`;
/// `None` unless the divergence sum reaches `s_min`.
pub fn substantial_search(h: &HalfLine<'_>, d: f64, horizon: f64, s_min: f64) -> Result<Option<IntervalFamily>> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("density threshold must be positive, got {d}")));
    }
    check_s_min(s_min)?;
    check_horizon(h, horizon)?;
    let fam = greedy(h, &|_| d, 0.0, horizon, f64::INFINITY)?;
    Ok((fam.divergence_sum() >= s_min).then_some(fam))
}

/// As [`substantial_search`] with the test `ratio > Ψ(b − a)`.
pub fn psi_substantial_search(h: &HalfLine<'_>, psi: &PsiFunction, horizon: f64, s_min: f64) -> Result<Option<IntervalFamily>> {
    psi.validate()?;
    check_s_min(s_min)?;
    check_horizon(h, horizon)?;
    let fam = greedy(h, &|s| psi.eval(s), 0.0, horizon, f64::INFINITY)?;
    Ok((fam.divergence_sum() >= s_min).then_some(fam))
}

/// Lower bound for the Beurling–Malliavin density: the largest `D` (to
/// within `tol`) admitting a substantial family on `Λ⁺` or on `Λ⁻`.
pub fn bm_lower_bound(spec: &Spectrum, horizon: f64, s_min: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let mut best: f64 = 0.0;
    for h in [spec.positive(), spec.negative()] {
        let hz = horizon.min(h.horizon());
        if h.next_above(0.0).is_none() {
            continue;
        }
        let found = |d: f64| -> Result<bool> { Ok(substantial_search(&h, d, hz, s_min)?.is_some()) };
        if !found(tol)? {
            continue;
        }
        let (mut lo, mut hi) = (tol, 1.0f64.max(2.0 * tol));
        while found(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return Ok(f64::INFINITY);
            }
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if found(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.max(lo);
    }
    Ok(best)
}

/// Diagonal family: consecutive blocks substantial for each `D_j` in turn,
/// each contributing at least 1 to the divergence sum, together with a step
/// `Ψ` for which the whole family is Ψ-substantial.
pub fn diagonal_psi(h: &HalfLine<'_>, d_grid: &[f64], horizon: f64) -> Result<(PsiFunction, IntervalFamily)> {
    if d_grid.is_empty() || d_grid.windows(2).any(|w| w[1] <= w[0]) || !(d_grid[0] > 0.0) {
        return Err(Error::InvalidParameter("d_grid must be positive and strictly increasing".into()));
    }
    check_horizon(h, horizon)?;
    let mut fam = IntervalFamily { intervals: Vec::new(), reflected: h.is_reflected() };
    let mut block_max = Vec::with_capacity(d_grid.len());
    let mut start = 0.0;
    for (j, &d) in d_grid.iter().enumerate() {
        let last = j + 1 == d_grid.len();
        let block = greedy(h, &|_| d, start, horizon, if last { f64::INFINITY } else { 1.0 })?;
        if block.divergence_sum() < 1.0 {
            return Err(Error::NoFamily(d));
        }
        let longest = block.intervals.iter().map(Interval::len).fold(0.0, f64::max);
        start = block.intervals.last().map_or(start, |iv| iv.b);
        fam.intervals.extend(block.intervals);
        block_max.push(longest);
    }
    // Ψ = D_j on (L_{j−1}, L_j] with L_j the running maximum length
    let mut breakpoints = Vec::new();
    let mut values = vec![d_grid[0]];
    let mut running = block_max[0];
    for j in 1..d_grid.len() {
        if running > breakpoints.last().copied().unwrap_or(0.0) {
            breakpoints.push(running);
            values.push(d_grid[j]);
        } else {
            *values.last_mut().expect("values is nonempty") = d_grid[j];
        }
        running = running.max(block_max[j]);
    }
    let psi = if breakpoints.is_empty() {
        PsiFunction::Constant { value: values[0] }
    } else {
        PsiFunction::Step { breakpoints, values }
    };
    Ok((psi, fam))
}

/// Partial sums `S_n = Σ_{k≤n} Ψ(b_k − a_k)((b_k − a_k)/b_k)²`.
pub fn weighted_sums(psi: &PsiFunction, family: &IntervalFamily) -> Vec<f64> {
    let mut s = 0.0;
    family
        .intervals
        .iter()
        .map(|iv| {
            s += psi.eval(iv.len()) * iv.term();
            s
        })
        .collect()
}

/// Growth function for the uniqueness theorem, with a flag set when the
/// family is too short to witness divergence.
#[derive(Debug, Clone)]
pub struct SigmaFromPsi {
    pub sigma: GrowthFunction,
    pub warning: bool,
}

/// `σ(x) = min(Ψ(x/2e)/2e, √S_{max(n(x),1)})` with `n(x) = #{k : 2b_k ≤ x}`.
pub fn sigma_from_psi(psi: &PsiFunction, family: &IntervalFamily) -> Result<SigmaFromPsi> {
    psi.validate()?;
    let sums = weighted_sums(psi, family);
    let xs = family.intervals.iter().map(|iv| 2.0 * iv.b).collect();
    let caps = sums.iter().map(|s| s.sqrt()).collect();
    let sigma = GrowthFunction::FromPsi { psi: psi.clone(), xs, caps };
    Ok(SigmaFromPsi { sigma, warning: family.len() < 2 })
}

/// Whether `2e·σ(x) ≤ Ψ(x/2e) + 2⁻⁴⁰` at `x`.
pub fn growth_condition_holds(sigma: &GrowthFunction, psi: &PsiFunction, x: f64) -> bool {
    2.0 * E * sigma.eval(x) <= psi.eval(x / (2.0 * E)) + 2f64.powi(-40)
}

/// Growth function as CSV with columns `x,sigma`.
pub fn growth_csv(sigma: &GrowthFunction, xs: &[f64]) -> String {
    let mut out = String::from("x,sigma\n");
    for &x in xs {
        writeln!(out, "{x:.16e},{:.16e}", sigma.eval(x)).expect("writing to a String");
    }
    out
}
