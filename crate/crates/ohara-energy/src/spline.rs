//! Periodic cubic splines and the uniform-grid differentiation rule.
//!
//! Two users: arclength resampling interpolates raw input polygons through a
//! periodic C2 spline with chordal knots, and every nodal derivative in the
//! crate (curve tangents, variation-field derivatives) comes from the same
//! C2 spline rule on the uniform arclength grid, so that the transpose used
//! by gradient assembly is exact.

use crate::error::{Error, Result};
use crate::quad::gauss5;

/// Solve a cyclic tridiagonal system with sub/diag/super bands `a, b, c`
/// (a[i] multiplies x[i-1], c[i] multiplies x[i+1], indices mod n).
///
/// Sherman-Morrison on top of the Thomas algorithm; needs n >= 3.
pub fn solve_cyclic_tridiagonal(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert!(n >= 3, "cyclic tridiagonal solve needs n >= 3");
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - a[0] * c[n - 1] / gamma;
    let y = solve_tridiagonal(a, &bb, c, r);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = solve_tridiagonal(a, &bb, c, &u);
    let vy = y[0] + a[0] * y[n - 1] / gamma;
    let vz = z[0] + a[0] * z[n - 1] / gamma;
    let factor = vy / (1.0 + vz);
    y.iter().zip(z.iter()).map(|(yi, zi)| yi - factor * zi).collect()
}

fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = r[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (r[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// C2 periodic cubic spline through `n` points in R^dim with arbitrary
/// ascending knots, stored in second-derivative (moment) form.
pub struct PeriodicSpline {
    knots: Vec<f64>,
    period: f64,
    dim: usize,
    values: Vec<f64>,
    moments: Vec<f64>,
}

impl PeriodicSpline {
    /// `knots` are the first n knot positions; the curve closes after
    /// `period`, i.e. knot n sits at `knots[0] + period`.
    pub fn new(knots: Vec<f64>, period: f64, values: Vec<f64>, dim: usize) -> Result<Self> {
        let n = knots.len();
        if n < 3 {
            return Err(Error::DegenerateInput(format!(
                "periodic spline needs at least 3 points, got {n}"
            )));
        }
        if values.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: values.len() });
        }
        if !(period > 0.0) {
            return Err(Error::DegenerateInput("spline period must be positive".into()));
        }
        let mut h = vec![0.0; n];
        for i in 0..n {
            let next = if i + 1 < n { knots[i + 1] } else { knots[0] + period };
            h[i] = next - knots[i];
            if !(h[i] > 0.0) {
                return Err(Error::DegenerateInput(format!(
                    "knots not strictly increasing at segment {i}"
                )));
            }
        }
        // Moment equations: (h_{i-1}/6) M_{i-1} + (h_{i-1}+h_i)/3 M_i + (h_i/6) M_{i+1}
        //                   = dy_i/h_i - dy_{i-1}/h_{i-1}, cyclic.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        for i in 0..n {
            let hm = h[(i + n - 1) % n];
            sub[i] = hm / 6.0;
            diag[i] = (hm + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
        }
        let mut moments = vec![0.0; n * dim];
        let mut rhs = vec![0.0; n];
        for d in 0..dim {
            for i in 0..n {
                let im = (i + n - 1) % n;
                let ip = (i + 1) % n;
                let dy_i = (values[ip * dim + d] - values[i * dim + d]) / h[i];
                let dy_im = (values[i * dim + d] - values[im * dim + d]) / h[im];
                rhs[i] = dy_i - dy_im;
            }
            let m = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
            for i in 0..n {
                moments[i * dim + d] = m[i];
            }
        }
        Ok(PeriodicSpline { knots, period, dim, values, moments })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Map `t` into [knots[0], knots[0] + period) and find its segment.
    fn locate(&self, t: f64) -> (usize, f64) {
        let t0 = self.knots[0];
        let mut u = (t - t0).rem_euclid(self.period) + t0;
        if u >= t0 + self.period {
            u = t0;
        }
        // Binary search for the last knot <= u.
        let mut lo = 0usize;
        let mut hi = self.knots.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, u)
    }

    fn segment_width(&self, i: usize) -> f64 {
        let n = self.knots.len();
        if i + 1 < n {
            self.knots[i + 1] - self.knots[i]
        } else {
            self.knots[0] + self.period - self.knots[i]
        }
    }

    /// Evaluate the spline position at parameter `t` into `out`.
    pub fn value_into(&self, t: f64, out: &mut [f64]) {
        let (i, u) = self.locate(t);
        let n = self.knots.len();
        let ip = (i + 1) % n;
        let h = self.segment_width(i);
        let A = self.knots[i] + h - u; // t_{i+1} - t
        let B = u - self.knots[i]; // t - t_i
        for d in 0..self.dim {
            let yi = self.values[i * self.dim + d];
            let yip = self.values[ip * self.dim + d];
            let mi = self.moments[i * self.dim + d];
            let mip = self.moments[ip * self.dim + d];
            out[d] = mi * A * A * A / (6.0 * h)
                + mip * B * B * B / (6.0 * h)
                + (yi / h - mi * h / 6.0) * A
                + (yip / h - mip * h / 6.0) * B;
        }
    }

    /// Evaluate the spline derivative at parameter `t` into `out`.
    pub fn deriv_into(&self, t: f64, out: &mut [f64]) {
        let (i, u) = self.locate(t);
        let n = self.knots.len();
        let ip = (i + 1) % n;
        let h = self.segment_width(i);
        let A = self.knots[i] + h - u;
        let B = u - self.knots[i];
        for d in 0..self.dim {
            let yi = self.values[i * self.dim + d];
            let yip = self.values[ip * self.dim + d];
            let mi = self.moments[i * self.dim + d];
            let mip = self.moments[ip * self.dim + d];
            out[d] = -mi * A * A / (2.0 * h) + mip * B * B / (2.0 * h) + (yip - yi) / h
                - (mip - mi) * h / 6.0;
        }
    }

    /// Euclidean norm of the derivative at `t`.
    pub fn speed(&self, t: f64) -> f64 {
        let mut buf = [0.0; 8];
        let out = &mut buf[..self.dim.min(8)];
        if self.dim <= 8 {
            self.deriv_into(t, out);
            out.iter().map(|v| v * v).sum::<f64>().sqrt()
        } else {
            let mut v = vec![0.0; self.dim];
            self.deriv_into(t, &mut v);
            v.iter().map(|v| v * v).sum::<f64>().sqrt()
        }
    }

    /// Arclength of the parameter interval [a, b] by 5-point Gauss per call.
    pub fn arclength_gauss(&self, a: f64, b: f64) -> f64 {
        gauss5(&|t| self.speed(t), a, b)
    }
}

/// Nodal derivatives of the C2 periodic cubic spline on a uniform grid with
/// spacing `h`: m_{i-1} + 4 m_i + m_{i+1} = 3 (y_{i+1} - y_{i-1}) / h.
///
/// This is the crate-wide differentiation rule for nodal data.
pub fn uniform_spline_derivative(values: &[f64], dim: usize, h: f64) -> Vec<f64> {
    let n = values.len() / dim;
    assert!(n >= 3);
    let sub = vec![1.0; n];
    let diag = vec![4.0; n];
    let sup = vec![1.0; n];
    let mut out = vec![0.0; n * dim];
    let mut rhs = vec![0.0; n];
    for d in 0..dim {
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            rhs[i] = 3.0 * (values[ip * dim + d] - values[im * dim + d]) / h;
        }
        let m = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
        for i in 0..n {
            out[i * dim + d] = m[i];
        }
    }
    out
}

/// Transpose of `uniform_spline_derivative` as a linear map on nodal data.
///
/// Both the band matrix A = circ(1,4,1) and the difference matrix are
/// circulant, A is symmetric and the difference antisymmetric, so
/// D^T = -D.
pub fn uniform_spline_derivative_transpose(values: &[f64], dim: usize, h: f64) -> Vec<f64> {
    let mut out = uniform_spline_derivative(values, dim, h);
    for v in out.iter_mut() {
        *v = -*v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_solve_matches_dense() {
        let n = 7;
        let a = vec![1.0; n];
        let b = vec![4.0; n];
        let c = vec![1.0; n];
        let r: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let x = solve_cyclic_tridiagonal(&a, &b, &c, &r);
        // residual check
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            let res = a[i] * x[im] + b[i] * x[i] + c[i] * x[ip] - r[i];
            assert!(res.abs() < 1e-12, "row {i}: {res}");
        }
    }

    #[test]
    fn spline_reproduces_circle() {
        let n = 64;
        let mut pts = Vec::with_capacity(2 * n);
        let mut knots = Vec::with_capacity(n);
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            knots.push(t);
            pts.push(t.cos());
            pts.push(t.sin());
        }
        let sp = PeriodicSpline::new(knots, 2.0 * std::f64::consts::PI, pts, 2).unwrap();
        let mut p = [0.0; 2];
        for k in 0..200 {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.31) / 200.0;
            sp.value_into(t, &mut p);
            let err = ((p[0] - t.cos()).powi(2) + (p[1] - t.sin()).powi(2)).sqrt();
            assert!(err < 1e-6, "position error {err} at t={t}");
        }
        // derivative ~ unit tangent
        let mut d = [0.0; 2];
        sp.deriv_into(1.234, &mut d);
        let err = ((d[0] + 1.234f64.sin()).powi(2) + (d[1] - 1.234f64.cos()).powi(2)).sqrt();
        assert!(err < 1e-5, "derivative error {err}");
    }

    #[test]
    fn uniform_rule_transpose_is_exact_adjoint() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let h = 0.17;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dx = uniform_spline_derivative(&x, 1, h);
        let dty = uniform_spline_derivative_transpose(&y, 1, h);
        let lhs: f64 = dx.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(dty.iter()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn uniform_rule_differentiates_trig_modes() {
        let n = 128;
        let l = 2.0 * std::f64::consts::PI;
        let h = l / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| (3.0 * h * i as f64).sin()).collect();
        let der = uniform_spline_derivative(&vals, 1, h);
        for i in 0..n {
            let exact = 3.0 * (3.0 * h * i as f64).cos();
            assert!((der[i] - exact).abs() < 2e-4, "node {i}: {} vs {exact}", der[i]);
        }
    }
}
