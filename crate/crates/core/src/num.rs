//! Scalar numerics shared across the crate: cancellation-free trigonometric
//! kernels for the closed-form flow, bracketed root finding, and 1-D
//! minimisation.

/// Default absolute tolerance for root finding in the unknown.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// sin(x)/x, stable through x = 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// (1 - cos x)/x², stable through x = 0. Equals ½·sinc²(x/2).
pub fn one_minus_cos_over_sq(x: f64) -> f64 {
    let h = sinc(0.5 * x);
    0.5 * h * h
}

/// (x - sin x)/x², stable through x = 0 (~ x/6 for small x).
pub fn x_minus_sin_over_sq(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        (x - x.sin()) / (x * x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// The supplied bracket does not straddle a sign change.
    NoBracket { lo: f64, hi: f64 },
}

impl std::fmt::Display for RootError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootError::NoBracket { lo, hi } => {
                write!(f, "no sign change on bracket [{lo}, {hi}]")
            }
        }
    }
}

impl std::error::Error for RootError {}

/// Bisection on a bracketing interval, to absolute tolerance `tol` in the
/// unknown. Deterministic: fixed midpoint rule, no secant acceleration.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, RootError> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoBracket { lo, hi });
    }
    // 200 iterations always suffice: the bracket halves each step and
    // f64 runs out of resolution long before that.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimisation of a unimodal function on [lo, hi], to
/// absolute tolerance `tol` in the argument.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}
