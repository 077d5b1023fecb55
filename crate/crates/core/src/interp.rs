//! Monotone cubic Hermite interpolation on a single cell.
//!
//! The tables carry exact derivatives at the nodes; before use those are
//! passed through the Fritsch–Carlson limiter so that each cell interpolant
//! stays monotone whenever the data are.

use crate::math::sqrt;

/// One cell of a Hermite table: values and (limited) slopes at both ends.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub width: f64,
    pub y0: f64,
    pub y1: f64,
    pub d0: f64,
    pub d1: f64,
}

impl Cell {
    /// Build a cell and apply the Fritsch–Carlson limiter to the slopes.
    pub fn monotone(width: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> Self {
        let secant = (y1 - y0) / width;
        let (mut d0, mut d1) = (d0, d1);
        if secant == 0.0 {
            d0 = 0.0;
            d1 = 0.0;
        } else {
            // Slopes of the wrong sign would break monotonicity outright.
            if d0 * secant < 0.0 {
                d0 = 0.0;
            }
            if d1 * secant < 0.0 {
                d1 = 0.0;
            }
            let a = d0 / secant;
            let b = d1 / secant;
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / sqrt(r2);
                d0 = tau * a * secant;
                d1 = tau * b * secant;
            }
        }
        Cell { width, y0, y1, d0, d1 }
    }

    /// Value at local coordinate `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y0 + h10 * self.width * self.d0 + h01 * self.y1 + h11 * self.width * self.d1
    }

    /// Derivative with respect to the physical coordinate at `t`.
    pub fn slope(&self, t: f64) -> f64 {
        let t2 = t * t;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        (dh00 * self.y0 + dh01 * self.y1) / self.width + dh10 * self.d0 + dh11 * self.d1
    }

    /// Local coordinate `t` with `eval(t) = target`, for monotone cells.
    /// Newton iteration safeguarded by bisection.
    pub fn invert(&self, target: f64) -> f64 {
        let increasing = self.y1 >= self.y0;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if (increasing && target <= self.y0) || (!increasing && target >= self.y0) {
            return 0.0;
        }
        if (increasing && target >= self.y1) || (!increasing && target <= self.y1) {
            return 1.0;
        }
        let span = self.y1 - self.y0;
        let mut t = ((target - self.y0) / span).clamp(0.0, 1.0);
        for _ in 0..100 {
            let r = self.eval(t) - target;
            let below = if increasing { r < 0.0 } else { r > 0.0 };
            if below {
                lo = t;
            } else {
                hi = t;
            }
            if r == 0.0 || hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
            let d = self.slope(t) * self.width;
            let mut next = if d != 0.0 { t - r / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-17 {
                t = next;
                break;
            }
            t = next;
        }
        t
    }
}
