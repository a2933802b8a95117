use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// `sin t / t` with `sinc(0) = 1`.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// `sin z / z` on the complex plane.
pub fn sinc_complex(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        Complex64::new(1.0, 0.0) - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Sine integral `Si(x) = ∫_0^x sin t / t dt`.
///
/// Power series below 2, continued fraction for `E₁(ix)` above.
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    if t == 0.0 {
        return 0.0;
    }
    let si = if t > 2.0 {
        let fpmin = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / fpmin, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..200 {
            let a = -((i - 1) as f64).powi(2);
            b += Complex64::new(2.0, 0.0);
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    } else {
        // Si(t) = Σ (-1)^k t^{2k+1} / ((2k+1)(2k+1)!)
        let mut term = t;
        let mut sum = t;
        let mut k = 0usize;
        loop {
            k += 1;
            let n = (2 * k) as f64;
            term *= -t * t / (n * (n + 1.0));
            let add = term / (n + 1.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    };
    if x < 0.0 {
        -si
    } else {
        si
    }
}

/// Centered cubic B-spline with unit knot spacing, support `[-2, 2]`,
/// `M(0) = 2/3` and `Σ_j M(x - j) = 1`.
pub fn cubic_bspline(x: f64) -> f64 {
    let a = x.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        let u = 2.0 - a;
        u * u * u / 6.0
    } else {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    }
}

/// Derivative of [`cubic_bspline`].
pub fn cubic_bspline_deriv(x: f64) -> f64 {
    let a = x.abs();
    let s = x.signum();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        let u = 2.0 - a;
        -s * 0.5 * u * u
    } else {
        s * (-2.0 * a + 1.5 * a * a)
    }
}

/// `∫ M(u) e^{-iξu} du = sinc⁴(ξ/2)`.
pub fn cubic_bspline_transform(xi: f64) -> f64 {
    sinc(0.5 * xi).powi(4)
}
