//! Scalar root and minimum bracketing shared by the angle scans.

use std::f64::consts::PI;

pub const TAU: f64 = 2.0 * PI;

/// Uniform grid `φ_k = offset + 2πk/size`.
pub fn angle_grid(size: usize, offset: f64) -> Vec<f64> {
    (0..size).map(|k| offset + TAU * k as f64 / size as f64).collect()
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Bisection for a sign change of `f` on `[lo, hi]` down to width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Returns the final bracket and the best value seen.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    (lo, hi, f1.min(f2))
}

/// Periodic trapezoid rule on a uniform grid of the full circle.
pub fn periodic_trapezoid(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    TAU / values.len() as f64 * values.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn golden_finds_kink_minimum() {
        let (lo, hi, v) = golden_min(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-10);
        assert!(lo <= 0.3 + 1e-12 && hi >= 0.3 - 1e-12);
        assert!(v < 1e-9);
    }

    #[test]
    fn trapezoid_is_spectral_for_trig() {
        let g = angle_grid(64, 0.0);
        let v: Vec<f64> = g.iter().map(|p| 1.0 + (3.0 * p).cos()).collect();
        assert!((periodic_trapezoid(&v) - TAU).abs() < 1e-13);
    }

    #[test]
    fn wrap_and_distance() {
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!((angle_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-14);
    }
}
