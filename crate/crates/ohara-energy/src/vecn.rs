//! Small dense-vector helpers on `&[f64]` slices.
//!
//! Curves live in R^n with n decided at run time, so points are slices into a
//! flat buffer. These helpers keep the O(N^2) kernels allocation-free.

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for k in 0..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub_into(out: &mut [f64], a: &[f64], b: &[f64]) {
    for k in 0..out.len() {
        out[k] = a[k] - b[k];
    }
}

#[inline]
pub fn scale_into(out: &mut [f64], a: &[f64], s: f64) {
    for k in 0..out.len() {
        out[k] = a[k] * s;
    }
}

/// out += s * a
#[inline]
pub fn axpy(out: &mut [f64], s: f64, a: &[f64]) {
    for k in 0..out.len() {
        out[k] += s * a[k];
    }
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        s += d * d;
    }
    s.sqrt()
}

/// Inner product of 2-vectors: <a ^ b, c ^ d> = (a.c)(b.d) - (a.d)(b.c).
///
/// Bilinear in each pair and antisymmetric under swapping within a pair.
pub fn wedge_inner(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<f64> {
    let n = a.len();
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: n });
    }
    for v in [b, c, d] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    Ok(wedge_inner_unchecked(a, b, c, d))
}

/// `wedge_inner` without the dimension checks, for the quadrature loops.
#[inline]
pub fn wedge_inner_unchecked(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    dot(a, c) * dot(b, d) - dot(a, d) * dot(b, c)
}

/// Squared norm of the 2-vector u ^ v.
#[inline]
pub fn wedge_norm_sq(u: &[f64], v: &[f64]) -> f64 {
    wedge_inner_unchecked(u, v, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_orthonormal_pair() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert_eq!(wedge_inner(&e1, &e2, &e1, &e2).unwrap(), 1.0);
        assert_eq!(wedge_inner(&e1, &e2, &e2, &e1).unwrap(), -1.0);
    }

    #[test]
    fn wedge_dimension_mismatch() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        assert!(wedge_inner(&a, &b, &a, &a).is_err());
    }

    /// Brute-force oracle: expand both 2-vectors in the e_i ^ e_j basis and
    /// dot the coordinate arrays.
    fn wedge_inner_by_coordinates(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += (a[i] * b[j] - a[j] * b[i]) * (c[i] * d[j] - c[j] * d[i]);
            }
        }
        s
    }

    #[test]
    fn wedge_matches_coordinate_expansion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in [3usize, 5] {
            for _ in 0..200 {
                let v = |rng: &mut rand_chacha::ChaCha8Rng| {
                    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>()
                };
                let (a, b, c, d) = (v(&mut rng), v(&mut rng), v(&mut rng), v(&mut rng));
                let oracle = wedge_inner_by_coordinates(&a, &b, &c, &d);
                let got = wedge_inner(&a, &b, &c, &d).unwrap();
                assert!((got - oracle).abs() <= 1e-14, "{got} vs {oracle}");
            }
        }
    }
}
