//! Reference values computed without the library's quadrature.

use std::f64::consts::PI;

/// Spherical Bessel function `sin x / x`, with its Taylor series near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Symplectic pairing of a Gaussian charge `(q, s)` with a Gaussian test
/// profile `(c, t)` at spatial distance `d`:
/// `q c (2π)^{-3/2} 4π ∫₀^∞ exp(-r²(s²+t²)/2) j0(r d) dr`,
/// by composite Simpson on `[0, 40/√(s²+t²)]` with 200000 intervals.
pub fn gaussian_pair_sigma(q: f64, c: f64, s: f64, t: f64, d: f64) -> f64 {
    let n = 200_000;
    let w2 = s * s + t * t;
    let upper = 40.0 / w2.sqrt();
    let h = upper / n as f64;
    let f = |r: f64| (-0.5 * r * r * w2).exp() * sinc(r * d);
    let mut acc = f(0.0) + f(upper);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    q * c * (2.0 * PI).powf(-1.5) * 4.0 * PI * acc * h / 3.0
}

/// The same pairing in closed form: `q c √(π/2) erf(d/(√2 w)) / d` with
/// `w² = s² + t²`, reducing to `q c / w` at `d = 0`. Uses a series for `erf`.
pub fn gaussian_pair_sigma_closed(q: f64, c: f64, s: f64, t: f64, d: f64) -> f64 {
    let w = (s * s + t * t).sqrt();
    if d == 0.0 {
        return q * c / w;
    }
    q * c * (PI / 2.0).sqrt() * erf(d / (2f64.sqrt() * w)) / d
}

/// Error function: Maclaurin series for `|x| < 3`, continued fraction beyond.
fn erf(x: f64) -> f64 {
    let a = x.abs();
    let value = if a < 3.0 {
        let (mut term, mut sum, mut k) = (a, a, 0.0);
        while term.abs() > 1e-17 * sum.abs() {
            k += 1.0;
            term *= -a * a / k;
            sum += term / (2.0 * k + 1.0);
        }
        2.0 / PI.sqrt() * sum
    } else {
        let mut frac = 0.0;
        for k in (1..60).rev() {
            frac = k as f64 / 2.0 / (a + frac);
        }
        1.0 - (-a * a).exp() / PI.sqrt() / (a + frac)
    };
    value.copysign(x)
}
