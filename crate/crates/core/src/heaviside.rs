//! Arctangent-smoothed step function and its derivative.

use std::f64::consts::PI;

/// H(y) = ½(1 + (2/π)·atan(y/ε)), evaluated so that H(y) + H(−y) = 1 holds
/// to rounding and tiny tails do not cancel to zero.
pub fn heaviside(y: f64, eps: f64) -> f64 {
    if y > 0.0 {
        1.0 - (eps / y).atan() / PI
    } else if y < 0.0 {
        (eps / -y).atan() / PI
    } else {
        0.5
    }
}

/// `(H(y), H(−y))` from a single arctangent; bitwise equal to two calls.
pub fn heaviside_pair(y: f64, eps: f64) -> (f64, f64) {
    if y == 0.0 {
        return (0.5, 0.5);
    }
    let tail = (eps / y.abs()).atan() / PI;
    if y > 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

/// δ(y) = (1/π)·ε/(ε² + y²).
pub fn dirac(y: f64, eps: f64) -> f64 {
    eps / (PI * (eps * eps + y * y))
}
