//! Discrete frequency sets and their counting functions.
//!
//! A [`Spectrum`] is a generation rule plus a truncation [`Window`].  Counting
//! and neighbour queries use closed forms where the rule allows it, so very
//! large windows (e.g. `{√n}` up to `10⁶`) never need to be realized.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Sign pattern `s_n` of the perturbations `a_n = C r^{|n|} s_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignRule {
    #[default]
    Plus,
    /// `s_n = (-1)^{|n|}`.
    Alternating,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// `λ_n = n + C r^{|n|} s_n`, `n ∈ ℤ`.
    PerturbedIntegers { c: f64, r: f64, sign: SignRule },
    /// `n^α` for `n ≥ 1`, or `±n^α` when `two_sided`.
    Power { alpha: f64, two_sided: bool },
    /// `n·step`, `n ∈ ℤ`.
    Arithmetic { step: f64 },
    /// A sorted list of points.
    Explicit { points: Vec<f64> },
}

/// Truncation of the rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Index range: `|n| ≤ N` for two-sided rules, `1 ≤ n ≤ N` for powers.
    Count(u64),
    /// All points with `|λ| ≤ T`.
    Horizon(f64),
    /// The point list is the whole set (explicit spectra only).
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: Kind,
    window: Window,
}

/// Windows larger than this are refused by [`Spectrum::realize`].
pub const MAX_REALIZED: u64 = 50_000_000;

impl Spectrum {
    pub fn new(kind: Kind, window: Window) -> Result<Self> {
        let s = Spectrum { kind, window };
        s.validate()?;
        Ok(s)
    }

    pub fn perturbed_integers(c: f64, r: f64, sign: SignRule, window: Window) -> Result<Self> {
        Self::new(Kind::PerturbedIntegers { c, r, sign }, window)
    }

    pub fn power(alpha: f64, two_sided: bool, window: Window) -> Result<Self> {
        Self::new(Kind::Power { alpha, two_sided }, window)
    }

    pub fn arithmetic(step: f64, window: Window) -> Result<Self> {
        Self::new(Kind::Arithmetic { step }, window)
    }

    pub fn explicit(points: Vec<f64>, window: Window) -> Result<Self> {
        Self::new(Kind::Explicit { points }, window)
    }

    /// `{n² : n ∈ ℤ}` up to `horizon`.
    pub fn squares(horizon: f64) -> Result<Self> {
        let m = horizon.max(0.0).sqrt().floor() as i64 + 1;
        let mut pts: Vec<f64> = (0..=m).map(|n| (n * n) as f64).filter(|&p| p <= horizon).collect();
        pts.dedup();
        Self::explicit(pts, Window::Horizon(horizon))
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn window(&self) -> Window {
        self.window
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match &self.kind {
            Kind::PerturbedIntegers { c, r, sign } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return bad(format!("C must be positive, got {c}"));
                }
                if !(*r > 0.0 && *r < 1.0) {
                    return bad(format!("r must lie in (0,1), got {r}"));
                }
                // the narrowest gap is between n = 0 and n = ±1
                let spread = match sign {
                    SignRule::Plus => c * (1.0 - r),
                    SignRule::Alternating => c * (1.0 + r),
                };
                if spread >= 1.0 {
                    return bad(format!("perturbations with C={c}, r={r} break monotonicity"));
                }
            }
            Kind::Power { alpha, .. } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("alpha must lie in (0,1], got {alpha}"));
                }
            }
            Kind::Arithmetic { step } => {
                if !(*step > 0.0 && step.is_finite()) {
                    return bad(format!("step must be positive, got {step}"));
                }
            }
            Kind::Explicit { points } => {
                if points.iter().any(|p| !p.is_finite()) {
                    return bad("explicit points must be finite".into());
                }
                if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
                    return bad(format!("explicit points must be strictly increasing ({} then {})", w[0], w[1]));
                }
            }
        }
        match self.window {
            Window::Count(0) => bad("window count must be positive".into()),
            Window::Horizon(t) if !(t > 0.0 && t.is_finite()) => bad(format!("horizon must be positive and finite, got {t}")),
            Window::Count(_) if matches!(self.kind, Kind::Explicit { .. }) => {
                bad("explicit spectra take a horizon or no window".into())
            }
            Window::Unbounded if !matches!(self.kind, Kind::Explicit { .. }) => {
                bad("only explicit spectra may be unbounded".into())
            }
            _ => Ok(()),
        }
    }

    /// Perturbation `a_n` of the perturbed-integer rule (zero for other kinds).
    pub fn perturbation(&self, n: i64) -> f64 {
        match self.kind {
            Kind::PerturbedIntegers { c, r, sign } => {
                let m = n.unsigned_abs();
                let s = match sign {
                    SignRule::Plus => 1.0,
                    SignRule::Alternating if m % 2 == 1 => -1.0,
                    SignRule::Alternating => 1.0,
                };
                c * r.powf(m as f64) * s
            }
            _ => 0.0,
        }
    }

    /// Interval `[lo, hi]` on which `count` is exact.
    pub fn extent(&self) -> (f64, f64) {
        match (&self.kind, self.window) {
            (Kind::Explicit { .. }, Window::Unbounded) => (f64::NEG_INFINITY, f64::INFINITY),
            (Kind::Power { two_sided: false, .. }, Window::Horizon(t)) => (f64::NEG_INFINITY, t),
            (_, Window::Horizon(t)) => (-t, t),
            (Kind::PerturbedIntegers { c, r, .. }, Window::Count(n)) => {
                let hi = (n + 1) as f64 - c * r.powf((n + 1) as f64);
                (-hi, hi)
            }
            (Kind::Arithmetic { step }, Window::Count(n)) => {
                let hi = (n + 1) as f64 * step;
                (-hi, hi)
            }
            (Kind::Power { alpha, two_sided }, Window::Count(n)) => {
                let hi = ((n + 1) as f64).powf(*alpha);
                (if *two_sided { -hi } else { f64::NEG_INFINITY }, hi)
            }
            (Kind::Explicit { .. }, Window::Count(_)) | (_, Window::Unbounded) => unreachable!("rejected by validate"),
        }
    }

    /// Index range `[lo, hi]` of the integer-indexed rules.
    fn index_range(&self) -> (i64, i64) {
        match (&self.kind, self.window) {
            (Kind::Power { .. }, Window::Count(n)) => (1, n as i64),
            (Kind::Power { alpha, .. }, Window::Horizon(t)) => (1, largest_with(|k| pow_pt(k, *alpha) <= t, t.powf(1.0 / alpha))),
            (_, Window::Count(n)) => (-(n as i64), n as i64),
            (Kind::Arithmetic { step }, Window::Horizon(t)) => {
                let m = largest_with(|k| k as f64 * step <= t, t / step);
                (-m, m)
            }
            (Kind::PerturbedIntegers { c, .. }, Window::Horizon(t)) => {
                let up = largest_with(|k| self.pt(k) <= t, t + c + 2.0);
                let dn = largest_with(|k| self.pt(-k) >= -t, t + c + 2.0);
                (-dn, up)
            }
            _ => (0, -1),
        }
    }

    /// The rule's `n`-th point, ignoring the window (positive branch for powers).
    fn pt(&self, n: i64) -> f64 {
        match &self.kind {
            Kind::PerturbedIntegers { .. } => n as f64 + self.perturbation(n),
            Kind::Power { alpha, .. } => pow_pt(n, *alpha),
            Kind::Arithmetic { step } => n as f64 * step,
            Kind::Explicit { points } => points[n as usize],
        }
    }

    /// Points inside the explicit horizon.
    fn explicit_slice(&self) -> &[f64] {
        match (&self.kind, self.window) {
            (Kind::Explicit { points }, Window::Horizon(t)) => {
                let lo = points.partition_point(|&p| p < -t);
                let hi = points.partition_point(|&p| p <= t);
                &points[lo..hi]
            }
            (Kind::Explicit { points }, _) => points,
            _ => &[],
        }
    }

    /// Number of realized points.
    pub fn len(&self) -> u64 {
        match &self.kind {
            Kind::Explicit { .. } => self.explicit_slice().len() as u64,
            Kind::Power { two_sided, .. } => {
                let (lo, hi) = self.index_range();
                let m = (hi - lo + 1).max(0) as u64;
                if *two_sided {
                    2 * m
                } else {
                    m
                }
            }
            _ => {
                let (lo, hi) = self.index_range();
                (hi - lo + 1).max(0) as u64
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points of the rule inside the window, strictly increasing.
    pub fn realize(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if n > MAX_REALIZED {
            return Err(Error::InvalidParameter(format!(
                "window holds {n} points, more than the realization limit {MAX_REALIZED}"
            )));
        }
        let (lo, hi) = self.index_range();
        let pts = match &self.kind {
            Kind::Explicit { .. } => self.explicit_slice().to_vec(),
            Kind::Power { two_sided: true, .. } => {
                let mut v: Vec<f64> = (lo..=hi).rev().map(|k| -self.pt(k)).collect();
                v.extend((lo..=hi).map(|k| self.pt(k)));
                v
            }
            _ => (lo..=hi).map(|k| self.pt(k)).collect(),
        };
        if let Some(w) = pts.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "realized points not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(pts)
    }

    fn check_query(&self, a: f64, b: f64) -> Result<()> {
        let (lo, hi) = self.extent();
        if !(a < b) || a < lo || b > hi {
            return Err(Error::OutOfWindow { a, b, lo, hi });
        }
        Ok(())
    }

    /// `#{λ : a < λ < b}` (open interval).
    pub fn count(&self, a: f64, b: f64) -> Result<u64> {
        self.check_query(a, b)?;
        Ok(self.count_unchecked(a, b))
    }

    fn count_unchecked(&self, a: f64, b: f64) -> u64 {
        match &self.kind {
            Kind::Explicit { .. } => {
                let s = self.explicit_slice();
                let i = s.partition_point(|&p| p <= a);
                let j = s.partition_point(|&p| p < b);
                j.saturating_sub(i) as u64
            }
            Kind::Power { alpha, two_sided } => {
                let (_, hi) = self.index_range();
                let pos = |a: f64, b: f64| -> u64 {
                    if b <= 0.0 || hi < 1 {
                        return 0;
                    }
                    // #{1 ≤ n ≤ hi : pt(n) < b} − #{1 ≤ n ≤ hi : pt(n) ≤ a}
                    let below = |x: f64, strict: bool| -> i64 {
                        if x <= 0.0 {
                            return 0;
                        }
                        let m = largest_with(|k| if strict { pow_pt(k, *alpha) < x } else { pow_pt(k, *alpha) <= x }, x.powf(1.0 / alpha));
                        m.min(hi)
                    };
                    (below(b, true) - below(a, false)).max(0) as u64
                };
                let mut c = pos(a, b);
                if *two_sided {
                    c += pos(-b, -a);
                }
                c
            }
            Kind::Arithmetic { step } => {
                let (lo, hi) = self.index_range();
                let first = smallest_with(|k| k as f64 * step > a, a / step).max(lo);
                let last = -smallest_with(|k| -(k as f64) * step < b, -b / step);
                let last = last.min(hi);
                (last - first + 1).max(0) as u64
            }
            Kind::PerturbedIntegers { c, .. } => {
                let (lo, hi) = self.index_range();
                let c = *c;
                let from = ((a - c).floor() as i64 - 1).max(lo);
                let to = ((b + c).ceil() as i64 + 1).min(hi);
                if from > to {
                    return 0;
                }
                let sure_lo = (a + c).ceil() as i64 + 1;
                let sure_hi = (b - c).floor() as i64 - 1;
                let inside = |k: i64| {
                    let p = self.pt(k);
                    a < p && p < b
                };
                if sure_lo <= sure_hi && from < sure_lo && sure_hi < to {
                    let mid = (sure_hi - sure_lo + 1) as u64;
                    let edges = (from..sure_lo).chain(sure_hi + 1..=to).filter(|&k| inside(k)).count() as u64;
                    mid + edges
                } else {
                    (from..=to).filter(|&k| inside(k)).count() as u64
                }
            }
        }
    }

    /// Smallest realized point `> x`.
    pub fn next_above(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Explicit { .. } => {
                let s = self.explicit_slice();
                s.get(s.partition_point(|&p| p <= x)).copied()
            }
            Kind::Power { alpha, two_sided } => {
                let (_, hi) = self.index_range();
                if x < 0.0 && *two_sided {
                    // largest n with n^α < −x gives the next point −n^α
                    let m = largest_with(|k| pow_pt(k, *alpha) < -x, (-x).powf(1.0 / alpha)).min(hi);
                    if m >= 1 {
                        return Some(-pow_pt(m, *alpha));
                    }
                    return (hi >= 1).then(|| pow_pt(1, *alpha));
                }
                let k = if x < 0.0 { 1 } else { largest_with(|k| pow_pt(k, *alpha) <= x, x.powf(1.0 / alpha)) + 1 };
                (k <= hi).then(|| pow_pt(k, *alpha))
            }
            _ => {
                let (lo, hi) = self.index_range();
                let (k, w) = self.guess_index(x);
                let k = ((k - w).max(lo)..=(k + w).min(hi)).find(|&k| self.pt(k) > x);
                match k {
                    Some(k) => Some(self.pt(k)),
                    None if lo <= hi && self.pt(lo) > x => Some(self.pt(lo)),
                    None => None,
                }
            }
        }
    }

    /// Largest realized point `< x`.
    pub fn prev_below(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Explicit { .. } => {
                let s = self.explicit_slice();
                let i = s.partition_point(|&p| p < x);
                (i > 0).then(|| s[i - 1])
            }
            Kind::Power { alpha, two_sided } => {
                let (_, hi) = self.index_range();
                if x > 0.0 {
                    let m = largest_with(|k| pow_pt(k, *alpha) < x, x.powf(1.0 / alpha)).min(hi);
                    if m >= 1 {
                        return Some(pow_pt(m, *alpha));
                    }
                    return (*two_sided && hi >= 1).then(|| -pow_pt(1, *alpha));
                }
                if !*two_sided {
                    return None;
                }
                let k = largest_with(|k| pow_pt(k, *alpha) <= -x, (-x).powf(1.0 / alpha)) + 1;
                (k <= hi).then(|| -pow_pt(k, *alpha))
            }
            _ => {
                let (lo, hi) = self.index_range();
                let (k, w) = self.guess_index(x);
                let k = ((k - w).max(lo)..=(k + w).min(hi)).rev().find(|&k| self.pt(k) < x);
                match k {
                    Some(k) => Some(self.pt(k)),
                    None if lo <= hi && self.pt(hi) < x => Some(self.pt(hi)),
                    None => None,
                }
            }
        }
    }

    /// Approximate index of the point nearest `x` and a search radius.
    fn guess_index(&self, x: f64) -> (i64, i64) {
        match &self.kind {
            Kind::Arithmetic { step } => ((x / step).round() as i64, 2),
            Kind::PerturbedIntegers { c, .. } => (x.round() as i64, c.ceil() as i64 + 2),
            _ => (0, 0),
        }
    }

    /// View of `Λ ∩ (0,∞)`.
    pub fn positive(&self) -> HalfLine<'_> {
        HalfLine { spec: self, reflected: false }
    }

    /// View of `(−Λ) ∩ (0,∞)`.
    pub fn negative(&self) -> HalfLine<'_> {
        HalfLine { spec: self, reflected: true }
    }

    /// Points as CSV, one per line, 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for p in self.realize()? {
            writeln!(out, "{p:.16e}").expect("writing to a String");
        }
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SpectrumFile = serde_json::from_str(text)?;
        f.into_spectrum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpectrumFile::from(self)).expect("spectrum serializes")
    }
}

fn pow_pt(n: i64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        n as f64
    } else if alpha == 0.5 {
        (n as f64).sqrt()
    } else {
        (n as f64).powf(alpha)
    }
}

/// Largest `k ≥ 0` with `pred(k)` for a predicate true on an initial segment,
/// starting from an approximate answer.
fn largest_with(pred: impl Fn(i64) -> bool, guess: f64) -> i64 {
    let mut k = if guess.is_finite() { guess.floor().clamp(0.0, 4e18) as i64 } else { 0 };
    while k > 0 && !pred(k) {
        k -= 1;
    }
    while pred(k + 1) {
        k += 1;
    }
    k
}

/// Smallest integer `k` with `pred(k)` for a predicate true on a final segment.
fn smallest_with(pred: impl Fn(i64) -> bool, guess: f64) -> i64 {
    let mut k = guess.floor() as i64;
    while !pred(k) {
        k += 1;
    }
    while pred(k - 1) {
        k -= 1;
    }
    k
}

/// `Λ ∩ (0,∞)` or `(−Λ) ∩ (0,∞)` as a one-sided point set.
#[derive(Debug, Clone, Copy)]
pub struct HalfLine<'a> {
    spec: &'a Spectrum,
    reflected: bool,
}

impl HalfLine<'_> {
    pub fn spectrum(&self) -> &Spectrum {
        self.spec
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// Largest `h` such that counts on `(0, h)` are exact.
    pub fn horizon(&self) -> f64 {
        let (lo, hi) = self.spec.extent();
        if self.reflected {
            -lo
        } else {
            hi
        }
    }

    /// `#{λ : a < λ < b}` with `0 ≤ a < b ≤ horizon`.
    pub fn count(&self, a: f64, b: f64) -> Result<u64> {
        if a < 0.0 || b > self.horizon() || !(a < b) {
            return Err(Error::OutOfWindow { a, b, lo: 0.0, hi: self.horizon() });
        }
        Ok(if self.reflected {
            self.spec.count_unchecked(-b, -a)
        } else {
            self.spec.count_unchecked(a, b)
        })
    }

    /// Smallest point `> x` (and `> 0`).
    pub fn next_above(&self, x: f64) -> Option<f64> {
        let x = x.max(0.0);
        if self.reflected {
            self.spec.prev_below(-x).map(|p| -p)
        } else {
            self.spec.next_above(x)
        }
    }

    /// Largest positive point `< x`.
    pub fn prev_below(&self, x: f64) -> Option<f64> {
        let p = if self.reflected {
            self.spec.next_above(-x).map(|p| -p)
        } else {
            self.spec.prev_below(x)
        };
        p.filter(|&p| p > 0.0)
    }

    /// Points in `(0, horizon]`, ascending.
    pub fn realize(&self) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = self.spec.realize()?;
        if self.reflected {
            v = v.into_iter().rev().map(|p| -p).collect();
        }
        v.retain(|&p| p > 0.0);
        Ok(v)
    }
}

/// On-disk JSON form.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumFile {
    kind: String,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<SignRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    two_sided: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<f64>>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

impl SpectrumFile {
    fn into_spectrum(self) -> Result<Spectrum> {
        let missing = |f: &str| Error::InvalidParameter(format!("spectrum kind '{}' needs field '{f}'", self.kind));
        let window = match (self.n, self.t) {
            (Some(_), Some(_)) => return Err(Error::InvalidParameter("give either N or T, not both".into())),
            (Some(n), None) => Window::Count(n),
            (None, Some(t)) => Window::Horizon(t),
            (None, None) if self.kind == "explicit" => Window::Unbounded,
            (None, None) => return Err(Error::InvalidParameter("spectrum needs a window N or T".into())),
        };
        let kind = match self.kind.as_str() {
            "perturbed_integers" => Kind::PerturbedIntegers {
                c: self.c.ok_or_else(|| missing("C"))?,
                r: self.r.ok_or_else(|| missing("r"))?,
                sign: self.sign.unwrap_or_default(),
            },
            "power" => Kind::Power { alpha: self.alpha.ok_or_else(|| missing("alpha"))?, two_sided: self.two_sided.unwrap_or(false) },
            "arithmetic" => Kind::Arithmetic { step: self.step.unwrap_or(1.0) },
            "explicit" => Kind::Explicit { points: self.points.clone().ok_or_else(|| missing("points"))? },
            other => return Err(Error::InvalidParameter(format!("unknown spectrum kind '{other}'"))),
        };
        Spectrum::new(kind, window)
    }
}

impl From<&Spectrum> for SpectrumFile {
    fn from(s: &Spectrum) -> Self {
        let mut f = SpectrumFile::default();
        match &s.kind {
            Kind::PerturbedIntegers { c, r, sign } => {
                f.kind = "perturbed_integers".into();
                f.c = Some(*c);
                f.r = Some(*r);
                f.sign = Some(*sign);
            }
            Kind::Power { alpha, two_sided } => {
                f.kind = "power".into();
                f.alpha = Some(*alpha);
                f.two_sided = Some(*two_sided);
            }
            Kind::Arithmetic { step } => {
                f.kind = "arithmetic".into();
                f.step = Some(*step);
            }
            Kind::Explicit { points } => {
                f.kind = "explicit".into();
                f.points = Some(points.clone());
            }
        }
        match s.window {
            Window::Count(n) => f.n = Some(n),
            Window::Horizon(t) => f.t = Some(t),
            Window::Unbounded => {}
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn integers(n: u64) -> Spectrum {
        Spectrum::arithmetic(1.0, Window::Count(n)).unwrap()
    }

    #[test]
    fn perturbed_points() {
        let s = Spectrum::perturbed_integers(0.1, 0.5, SignRule::Plus, Window::Count(2)).unwrap();
        let pts = s.positive().realize().unwrap();
        assert_eq!(pts, vec![0.1, 1.05, 2.025]);
        assert_eq!(s.realize().unwrap().len(), 5);
    }

    #[test]
    fn arithmetic_positive_half() {
        let s = Spectrum::arithmetic(1.0, Window::Horizon(5.0)).unwrap();
        assert_eq!(s.positive().realize().unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn power_points() {
        let s = Spectrum::power(0.5, false, Window::Count(3)).unwrap();
        assert_eq!(s.realize().unwrap(), vec![1.0, 2f64.sqrt(), 3f64.sqrt()]);
    }

    #[test]
    fn count_examples() {
        let z = integers(10);
        assert_eq!(z.count(0.5, 3.5).unwrap(), 3);
        assert_eq!(z.count(1.0, 2.0).unwrap(), 0);
        let r = Spectrum::power(0.5, false, Window::Horizon(100.0)).unwrap();
        assert_eq!(r.count(1.0, 2.0).unwrap(), 2);
    }

    #[test]
    fn count_rejects_out_of_window() {
        let z = integers(10);
        assert!(matches!(z.count(0.0, 11.5), Err(Error::OutOfWindow { .. })));
        assert!(z.count(2.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Spectrum::perturbed_integers(0.1, 1.0, SignRule::Plus, Window::Count(3)).is_err());
        assert!(Spectrum::perturbed_integers(0.0, 0.5, SignRule::Plus, Window::Count(3)).is_err());
        assert!(Spectrum::perturbed_integers(-1.0, 0.5, SignRule::Plus, Window::Count(3)).is_err());
        assert!(Spectrum::explicit(vec![1.0, 1.0], Window::Unbounded).is_err());
        assert!(Spectrum::explicit(vec![2.0, 1.0], Window::Unbounded).is_err());
        assert!(Spectrum::power(1.5, false, Window::Count(3)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = Spectrum::from_json(r#"{"kind":"perturbed_integers","C":0.1,"r":0.5,"N":64,"sign":"plus"}"#).unwrap();
        assert_eq!(s.len(), 129);
        assert_eq!(Spectrum::from_json(&s.to_json()).unwrap(), s);
        let e = Spectrum::from_json(r#"{"kind":"explicit","points":[0.5,1,4]}"#).unwrap();
        assert_eq!(e.count(0.0, 5.0).unwrap(), 3);
        assert!(Spectrum::from_json(r#"{"kind":"power","alpha":0.5}"#).is_err());
    }

    #[test]
    fn csv_has_17_digits() {
        let s = Spectrum::power(0.5, false, Window::Count(2)).unwrap();
        let csv = s.to_csv().unwrap();
        let second = csv.lines().nth(1).unwrap();
        assert_eq!(second.parse::<f64>().unwrap(), 2f64.sqrt());
        assert_eq!(second, "1.4142135623730951e0");
    }

    #[test]
    fn huge_power_window_counts_without_realizing() {
        let s = Spectrum::power(0.5, false, Window::Horizon(1e6)).unwrap();
        assert_eq!(s.len(), 1_000_000_000_000);
        assert!(s.realize().is_err());
        // (a, b) holds n with a² < n < b²
        assert_eq!(s.positive().count(10.0, 20.0).unwrap(), 299);
        assert_eq!(s.next_above(10.0), Some(101f64.sqrt()));
        assert_eq!(s.prev_below(10.0), Some(99f64.sqrt()));
    }

    #[test]
    fn reflected_half_line() {
        let s = Spectrum::perturbed_integers(0.1, 0.5, SignRule::Plus, Window::Count(5)).unwrap();
        let neg = s.negative();
        let pts = neg.realize().unwrap();
        assert_eq!(pts.len(), 5);
        assert!((pts[0] - (1.0 - 0.05)).abs() < 1e-15);
        assert_eq!(neg.count(0.0, 2.5).unwrap(), 2);
        assert_eq!(neg.next_above(0.0), Some(pts[0]));
        assert_eq!(neg.prev_below(1.5), Some(pts[0]));
    }

    fn any_spectrum() -> impl Strategy<Value = Spectrum> {
        prop_oneof![
            (0.01f64..0.45, 0.05f64..0.95, any::<bool>(), 1u64..60).prop_map(|(c, r, alt, n)| {
                let sign = if alt { SignRule::Alternating } else { SignRule::Plus };
                Spectrum::perturbed_integers(c, r, sign, Window::Count(n)).unwrap()
            }),
            (0.01f64..0.45, 0.05f64..0.95, 1.0f64..60.0).prop_map(|(c, r, t)| {
                Spectrum::perturbed_integers(c, r, SignRule::Alternating, Window::Horizon(t)).unwrap()
            }),
            (0.1f64..1.0, any::<bool>(), 1u64..300).prop_map(|(a, two, n)| Spectrum::power(a, two, Window::Count(n)).unwrap()),
            (0.3f64..1.0, any::<bool>(), 1.0f64..10.0).prop_map(|(a, two, t)| Spectrum::power(a, two, Window::Horizon(t)).unwrap()),
            (0.05f64..3.0, 1.0f64..40.0).prop_map(|(s, t)| Spectrum::arithmetic(s, Window::Horizon(t)).unwrap()),
            (0.05f64..3.0, 1u64..40).prop_map(|(s, n)| Spectrum::arithmetic(s, Window::Count(n)).unwrap()),
            prop::collection::btree_set(-500i32..500, 1..60).prop_map(|set| {
                Spectrum::explicit(set.into_iter().map(|k| k as f64 / 7.0).collect(), Window::Unbounded).unwrap()
            }),
        ]
    }

    fn brute(pts: &[f64], a: f64, b: f64) -> u64 {
        pts.iter().filter(|&&p| a < p && p < b).count() as u64
    }

    fn query(s: &Spectrum, u: f64, v: f64) -> (f64, f64) {
        let (lo, hi) = s.extent();
        let pts = s.realize().unwrap();
        let lo = if lo.is_finite() { lo } else { pts[0] - 1.0 };
        let hi = if hi.is_finite() { hi } else { pts[pts.len() - 1] + 1.0 };
        let (x, y) = (lo + (hi - lo) * u.min(v), lo + (hi - lo) * u.max(v));
        (x, y)
    }

    proptest! {
        #[test]
        fn realized_points_strictly_increase(s in any_spectrum()) {
            let pts = s.realize().unwrap();
            prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(pts.len() as u64, s.len());
            prop_assert_eq!(pts, s.realize().unwrap());
        }

        #[test]
        fn perturbation_bound(c in 0.01f64..0.45, r in 0.05f64..0.95, alt in any::<bool>(), n in 1u64..80) {
            let sign = if alt { SignRule::Alternating } else { SignRule::Plus };
            let s = Spectrum::perturbed_integers(c, r, sign, Window::Count(n)).unwrap();
            let pts = s.realize().unwrap();
            for (i, p) in pts.iter().enumerate() {
                let k = i as i64 - n as i64;
                let a = s.perturbation(k);
                let bound = c * r.powf(k.unsigned_abs() as f64);
                prop_assert!(a != 0.0 && a.abs() <= bound);
                prop_assert!((p - k as f64).abs() <= bound * (1.0 + 1e-15) + f64::EPSILON * (k.abs() as f64 + 1.0));
            }
        }

        #[test]
        fn count_matches_brute_force(s in any_spectrum(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
            prop_assume!(u != v);
            let (a, b) = query(&s, u, v);
            prop_assume!(a < b);
            let pts = s.realize().unwrap();
            prop_assert_eq!(s.count(a, b).unwrap(), brute(&pts, a, b));
        }

        #[test]
        fn count_subadditive(s in any_spectrum(), u in 0.0f64..1.0, v in 0.0f64..1.0, w in 0.0f64..1.0) {
            let mut t = [u, v, w];
            t.sort_by(f64::total_cmp);
            let (a, c) = query(&s, t[0], t[2]);
            let b = a + (c - a) * (t[1] - t[0]) / (t[2] - t[0]).max(1e-12);
            prop_assume!(a < b && b < c);
            let ac = s.count(a, c).unwrap();
            let sum = s.count(a, b).unwrap() + s.count(b, c).unwrap();
            prop_assert!(sum <= ac && ac <= sum + 1);
        }

        #[test]
        fn neighbours_match_brute_force(s in any_spectrum(), u in 0.0f64..1.0) {
            let pts = s.realize().unwrap();
            let (x, _) = query(&s, u, 1.0);
            let next = pts.iter().copied().find(|&p| p > x);
            let prev = pts.iter().rev().copied().find(|&p| p < x);
            prop_assert_eq!(s.next_above(x), next);
            prop_assert_eq!(s.prev_below(x), prev);
        }
    }
}
