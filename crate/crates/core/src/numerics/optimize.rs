//! One-dimensional searches.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if (hi - lo).abs() <= xtol * (1.0 + x1.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimize `f` on `[lo, hi]`: coarse scan of `scan` points, then
/// golden-section refinement inside the bracket around the best sample.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, scan: usize, xtol: f64) -> (f64, f64) {
    let n = scan.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let (mut best_i, mut best_v) = (0, f64::INFINITY);
    for i in 0..n {
        let v = f(lo + i as f64 * step);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + best_i.saturating_sub(1) as f64 * step;
    let b = (lo + (best_i + 1) as f64 * step).min(hi);
    let (x, v) = golden_section(&f, a, b, xtol);
    if v <= best_v {
        (x, v)
    } else {
        (lo + best_i as f64 * step, best_v)
    }
}

/// Bisection for the root of a monotone `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= xtol * (1.0 + mid.abs()) {
            return mid;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
