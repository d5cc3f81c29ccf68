//! Periodic nodal vector fields along a curve, with arclength derivatives.

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::spline::uniform_spline_derivative;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Periodic perturbation field phi with per-node values and derivatives with
/// respect to the base curve's arclength.
#[derive(Clone, Debug)]
pub struct VariationField {
    dim: usize,
    n: usize,
    base_length: f64,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl VariationField {
    /// Build a field from nodal values; derivatives come from the crate's
    /// uniform periodic spline rule on the base curve's grid.
    pub fn from_values(curve: &ClosedCurve, values: Vec<f64>) -> Result<Self> {
        let (dim, n) = (curve.dim(), curve.num_points());
        if values.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: values.len() });
        }
        let derivatives = uniform_spline_derivative(&values, dim, curve.spacing());
        Ok(VariationField { dim, n, base_length: curve.total_length(), values, derivatives })
    }

    /// Build a field with explicitly supplied derivatives (e.g. analytic ones).
    /// They must be consistent with the differentiation rule up to truncation
    /// order; no cross-check is enforced here.
    pub fn from_values_and_derivatives(
        curve: &ClosedCurve,
        values: Vec<f64>,
        derivatives: Vec<f64>,
    ) -> Result<Self> {
        let (dim, n) = (curve.dim(), curve.num_points());
        if values.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: values.len() });
        }
        if derivatives.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: derivatives.len() });
        }
        Ok(VariationField { dim, n, base_length: curve.total_length(), values, derivatives })
    }

    /// The position field phi = f itself (phi' = tau); its first variation is
    /// the scaling derivative of the energy.
    pub fn position_field(curve: &ClosedCurve) -> Self {
        VariationField {
            dim: curve.dim(),
            n: curve.num_points(),
            base_length: curve.total_length(),
            values: curve.points_flat().to_vec(),
            derivatives: curve.tangents_flat().to_vec(),
        }
    }

    /// Constant field phi == c.
    pub fn constant_field(curve: &ClosedCurve, c: &[f64]) -> Result<Self> {
        if c.len() != curve.dim() {
            return Err(Error::DimensionMismatch { expected: curve.dim(), got: c.len() });
        }
        let n = curve.num_points();
        let mut values = vec![0.0; n * c.len()];
        for i in 0..n {
            values[i * c.len()..(i + 1) * c.len()].copy_from_slice(c);
        }
        let derivatives = vec![0.0; n * c.len()];
        Ok(VariationField {
            dim: curve.dim(),
            n,
            base_length: curve.total_length(),
            values,
            derivatives,
        })
    }

    /// Radial mode k: phi(s) = cos(2 pi k s / L) * (f(s) - centroid),
    /// with analytic product-rule derivatives.
    pub fn radial_mode(curve: &ClosedCurve, k: usize) -> Self {
        let (dim, n) = (curve.dim(), curve.num_points());
        let l = curve.total_length();
        let c = curve.centroid();
        let omega = 2.0 * std::f64::consts::PI * k as f64 / l;
        let mut values = vec![0.0; n * dim];
        let mut derivatives = vec![0.0; n * dim];
        for i in 0..n {
            let s = curve.node(i);
            let w = (omega * s).cos();
            let dw = -omega * (omega * s).sin();
            for d in 0..dim {
                let r = curve.point(i)[d] - c[d];
                values[i * dim + d] = w * r;
                derivatives[i * dim + d] = dw * r + w * curve.tangent(i)[d];
            }
        }
        VariationField { dim, n, base_length: l, values, derivatives }
    }

    /// Infinitesimal rotation phi = A f with A antisymmetric in the (d0, d1)
    /// coordinate plane; phi' = A tau analytically.
    pub fn rotation_field(curve: &ClosedCurve, d0: usize, d1: usize) -> Result<Self> {
        let (dim, n) = (curve.dim(), curve.num_points());
        if d0 >= dim || d1 >= dim || d0 == d1 {
            return Err(Error::Validation(format!("bad rotation plane ({d0}, {d1}) for dim {dim}")));
        }
        let mut values = vec![0.0; n * dim];
        let mut derivatives = vec![0.0; n * dim];
        for i in 0..n {
            let p = curve.point(i);
            let t = curve.tangent(i);
            values[i * dim + d0] = -p[d1];
            values[i * dim + d1] = p[d0];
            derivatives[i * dim + d0] = -t[d1];
            derivatives[i * dim + d1] = t[d0];
        }
        Ok(VariationField { dim, n, base_length: curve.total_length(), values, derivatives })
    }

    /// Smooth random field: low-frequency Fourier series with seeded Gaussian
    /// coefficients and analytic derivatives. Deterministic per seed.
    pub fn random_smooth(curve: &ClosedCurve, seed: u64, max_mode: usize) -> Self {
        let (dim, n) = (curve.dim(), curve.num_points());
        let l = curve.total_length();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // coefficients a_{k,d}, b_{k,d} for modes k = 0..=max_mode
        let modes = max_mode + 1;
        let mut a = vec![0.0; modes * dim];
        let mut b = vec![0.0; modes * dim];
        for v in a.iter_mut().chain(b.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let mut values = vec![0.0; n * dim];
        let mut derivatives = vec![0.0; n * dim];
        for i in 0..n {
            let s = curve.node(i);
            for k in 0..modes {
                let omega = 2.0 * std::f64::consts::PI * k as f64 / l;
                let (cs, sn) = ((omega * s).cos(), (omega * s).sin());
                for d in 0..dim {
                    let (ak, bk) = (a[k * dim + d], b[k * dim + d]);
                    values[i * dim + d] += ak * cs + bk * sn;
                    derivatives[i * dim + d] += omega * (-ak * sn + bk * cs);
                }
            }
        }
        VariationField { dim, n, base_length: l, values, derivatives }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn base_length(&self) -> f64 {
        self.base_length
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn derivative(&self, i: usize) -> &[f64] {
        &self.derivatives[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives_flat(&self) -> &[f64] {
        &self.derivatives
    }

    /// Max nodal Euclidean norm, a cheap field magnitude.
    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            m = m.max(crate::vecn::norm(self.value(i)));
        }
        m
    }

    /// a * self + b * other, derivatives included.
    pub fn linear_combination(&self, a: f64, other: &VariationField, b: f64) -> Result<Self> {
        if self.n != other.n || self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.n * self.dim, got: other.n * other.dim });
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(x, y)| a * x + b * y)
            .collect();
        let derivatives = self
            .derivatives
            .iter()
            .zip(other.derivatives.iter())
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(VariationField {
            dim: self.dim,
            n: self.n,
            base_length: self.base_length,
            values,
            derivatives,
        })
    }
}

/// Parse a CLI field spec: `builtin:const`, `builtin:scale`, `builtin:radial:K`,
/// `builtin:random` or `builtin:random:SEED`.
pub fn builtin_field(curve: &ClosedCurve, spec: &str) -> Result<VariationField> {
    let name = spec
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::Validation(format!("field spec '{spec}' must start with 'builtin:'")))?;
    if name == "const" {
        let mut c = vec![0.0; curve.dim()];
        c[0] = 1.0;
        return VariationField::constant_field(curve, &c);
    }
    if name == "scale" {
        return Ok(VariationField::position_field(curve));
    }
    if let Some(k) = name.strip_prefix("radial:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Validation(format!("bad radial mode '{k}'")))?;
        return Ok(VariationField::radial_mode(curve, k));
    }
    if name == "random" {
        return Ok(VariationField::random_smooth(curve, 0xC0FFEE, 5));
    }
    if let Some(seed) = name.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::Validation(format!("bad random seed '{seed}'")))?;
        return Ok(VariationField::random_smooth(curve, seed, 5));
    }
    Err(Error::Validation(format!(
        "unknown field '{spec}' (expected builtin:const|scale|radial:K|random[:SEED])"
    )))
}
