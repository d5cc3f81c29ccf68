//! 1-D quadrature: adaptive Gauss-Kronrod 15(7) and a fixed 5-point Gauss rule.
//!
//! The adaptive rule backs the tail integrals of custom kernels and the
//! high-resolution circle oracle; the 5-point rule measures spline arclength
//! segment by segment.

use crate::error::{Error, Result};

/// Kronrod abscissae for the 15-point rule (positive half, from QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights paired with `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Embedded 7-point Gauss weights (applied at the odd Kronrod abscissae).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// 5-point Gauss-Legendre abscissae on [-1, 1].
const X5: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];
const W5: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

/// Fixed 5-point Gauss-Legendre rule on [a, b].
pub fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..5 {
        s += W5[k] * f(c + hw * X5[k]);
    }
    s * hw
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = hw * XGK[k];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[k] * fsum;
        if k % 2 == 1 {
            gauss += WG[k / 2] * fsum;
        }
    }
    kronrod *= hw;
    gauss *= hw;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b].
///
/// Bisects the worst interval until the accumulated error estimate drops
/// below `rel_tol * |integral| + abs_tol`. Handles integrable endpoint
/// singularities through plain bisection.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(f, a, b);
    if !v.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    // (neg error, lo, hi, value): BinaryHeap pops the largest error first.
    let mut heap: std::collections::BinaryHeap<HeapItem> = std::collections::BinaryHeap::new();
    heap.push(HeapItem { err: e, lo: a, hi: b, val: v });
    let mut total = v;
    let mut total_err = e;
    while total_err > rel_tol * total.abs() + abs_tol {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence after {MAX_INTERVALS} intervals (err {total_err:.3e} vs target {:.3e})",
                rel_tol * total.abs() + abs_tol
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval at floating-point resolution; keep its estimate as-is.
            total_err -= worst.err;
            total += 0.0;
            heap.push(HeapItem { err: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(f, worst.lo, mid);
        let (v2, e2) = gk15(f, mid, worst.hi);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Quadrature(format!(
                "non-finite integrand near [{}, {}]",
                worst.lo, worst.hi
            )));
        }
        total += v1 + v2 - worst.val;
        total_err += e1 + e2 - worst.err;
        heap.push(HeapItem { err: e1, lo: worst.lo, hi: mid, val: v1 });
        heap.push(HeapItem { err: e2, lo: mid, hi: worst.hi, val: v2 });
    }
    Ok(total)
}

struct HeapItem {
    err: f64,
    lo: f64,
    hi: f64,
    val: f64,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Riemann zeta on s < 1 (and s != 1) by Euler-Maclaurin summation.
///
/// Used for the diagonal-limit correction of the energy quadrature, where
/// s = alpha - 2 lies in (-1, 1).
pub fn riemann_zeta(s: f64) -> f64 {
    debug_assert!(s != 1.0);
    let n0 = 24.0_f64;
    let mut sum = 0.0;
    let mut k = 1.0;
    while k < n0 + 0.5 {
        sum += k.powf(-s);
        k += 1.0;
    }
    // Euler-Maclaurin tail with Bernoulli terms B2/2! = 1/12, B4/4! = -1/720, B6/6! = 1/30240.
    let tail = n0.powf(1.0 - s) / (s - 1.0);
    let half = -0.5 * n0.powf(-s);
    let t1 = s * n0.powf(-s - 1.0) / 12.0;
    let t2 = -s * (s + 1.0) * (s + 2.0) * n0.powf(-s - 3.0) / 720.0;
    let t3 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n0.powf(-s - 5.0) / 30240.0;
    sum + tail + half + t1 + t2 + t3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss5_is_exact_on_cubics() {
        let f = |x: f64| 3.0 * x * x * x - x + 2.0;
        let exact = |x: f64| 0.75 * x.powi(4) - 0.5 * x * x + 2.0 * x;
        let got = gauss5(&f, -1.0, 3.0);
        assert!((got - (exact(3.0) - exact(-1.0))).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2
        let got = adaptive_gk(&|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((got - 2.0).abs() < 1e-8, "{got}");
    }

    #[test]
    fn adaptive_smooth() {
        let got = adaptive_gk(&f64::sin, 0.0, std::f64::consts::PI, 1e-12, 0.0).unwrap();
        assert!((got - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_reference_values() {
        assert!((riemann_zeta(0.0) + 0.5).abs() < 1e-12);
        assert!((riemann_zeta(-1.0) + 1.0 / 12.0).abs() < 1e-12);
        assert!((riemann_zeta(0.5) + 1.4603545088095868).abs() < 1e-10);
        assert!((riemann_zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
    }
}
