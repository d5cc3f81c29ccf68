//! Repulsion kernels Phi and every derived quantity the energy formulas use:
//! the tail integral T(x) = int_x^inf dt / Phi(t), Lambda(x) = -T(x)/x, the
//! decomposition kernels Phi_1, Phi_2 and their logarithmic derivatives Xi_j.
//!
//! Power-law kernels x^alpha carry closed forms throughout; custom kernels
//! (closures or tabulated CSV data) fall back to adaptive quadrature with a
//! per-x cache for the tail.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::quad::adaptive_gk;

/// Relative tolerance of the numeric tail integral.
const TAIL_REL_TOL: f64 = 1e-10;

/// Selects one side of the two-part energy decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityPart {
    /// Bending part, density |d tau|^2 / (2 Phi).
    M1,
    /// Twisting part, density (1/Phi - Lambda) <tau1 ^ u, tau2 ^ u>.
    M2,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

enum Inner {
    PowerLaw { alpha: f64 },
    Custom {
        phi: ScalarFn,
        dphi: Option<ScalarFn>,
        d2phi: Option<ScalarFn>,
        tail_cache: Arc<RwLock<HashMap<u64, f64>>>,
        label: String,
    },
}

/// A repulsion kernel Phi: (0, inf) -> (0, inf) with its derived quantities.
pub struct PhiModel {
    inner: Inner,
}

impl Clone for PhiModel {
    fn clone(&self) -> Self {
        match &self.inner {
            Inner::PowerLaw { alpha } => PhiModel { inner: Inner::PowerLaw { alpha: *alpha } },
            Inner::Custom { phi, dphi, d2phi, tail_cache, label } => PhiModel {
                inner: Inner::Custom {
                    phi: phi.clone(),
                    dphi: dphi.clone(),
                    d2phi: d2phi.clone(),
                    tail_cache: tail_cache.clone(),
                    label: label.clone(),
                },
            },
        }
    }
}

impl fmt::Debug for PhiModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhiModel({})", self.describe())
    }
}

impl PhiModel {
    /// Power-law kernel Phi(x) = x^alpha; requires alpha > 1 so the tail
    /// integral converges.
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::TailDivergence { alpha });
        }
        Ok(PhiModel { inner: Inner::PowerLaw { alpha } })
    }

    /// Custom kernel from closures. Derivative closures are optional; the
    /// operations that need them fail with a missing-derivative error.
    pub fn custom(
        label: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
        d2phi: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Self {
        PhiModel {
            inner: Inner::Custom {
                phi: Arc::new(phi),
                dphi: dphi.map(Arc::from),
                d2phi: d2phi.map(Arc::from),
                tail_cache: Arc::new(RwLock::new(HashMap::new())),
                label: label.into(),
            },
        }
    }

    /// Tabulated kernel: strictly increasing x > 0 with positive Phi values,
    /// interpolated by a monotone cubic in log-log space and extended as a
    /// power law beyond the table. The right-end slope must exceed 1 for the
    /// tail to converge.
    pub fn from_table(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let interp = MonotoneCubic::new_log_log(xs, ys)?;
        let right_slope = interp.right_slope();
        if !(right_slope > 1.0) {
            return Err(Error::TailDivergence { alpha: right_slope });
        }
        let i1 = interp.clone();
        let i2 = interp.clone();
        let i3 = interp;
        Ok(Self::custom(
            "custom",
            move |x| i1.phi(x),
            Some(Box::new(move |x| i2.dphi(x))),
            Some(Box::new(move |x| i3.d2phi(x))),
        ))
    }

    /// Read a `(x, phi)` CSV table (optional header) and build a kernel.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Validation(format!("bad csv record: {e}")))?;
            if record.len() != 2 {
                return Err(Error::Validation(format!(
                    "phi csv line {} has {} fields, expected 2 (x, phi)",
                    line + 1,
                    record.len()
                )));
            }
            let x: f64 = match record[0].parse() {
                Ok(v) => v,
                Err(_) if line == 0 => continue, // header line
                Err(_) => {
                    return Err(Error::Validation(format!(
                        "phi csv line {}: field 'x' is not a number: '{}'",
                        line + 1,
                        &record[0]
                    )))
                }
            };
            let y: f64 = record[1].parse().map_err(|_| {
                Error::Validation(format!(
                    "phi csv line {}: field 'phi' is not a number: '{}'",
                    line + 1,
                    &record[1]
                ))
            })?;
            xs.push(x);
            ys.push(y);
        }
        Self::from_table(&xs, &ys)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// `Some(alpha)` for a power law, `None` for custom kernels.
    pub fn alpha(&self) -> Option<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => Some(*alpha),
            Inner::Custom { .. } => None,
        }
    }

    /// Short description used in reports: `power:A` or `custom`.
    pub fn describe(&self) -> String {
        match &self.inner {
            Inner::PowerLaw { alpha } => format!("power:{alpha}"),
            Inner::Custom { label, .. } => label.clone(),
        }
    }

    pub fn has_first_derivative(&self) -> bool {
        match &self.inner {
            Inner::PowerLaw { .. } => true,
            Inner::Custom { dphi, .. } => dphi.is_some(),
        }
    }

    pub fn has_second_derivative(&self) -> bool {
        match &self.inner {
            Inner::PowerLaw { .. } => true,
            Inner::Custom { d2phi, .. } => d2phi.is_some(),
        }
    }

    #[inline]
    pub fn phi(&self, x: f64) -> f64 {
        match &self.inner {
            Inner::PowerLaw { alpha } => x.powf(*alpha),
            Inner::Custom { phi, .. } => phi(x),
        }
    }

    pub fn dphi(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => Ok(alpha * x.powf(alpha - 1.0)),
            Inner::Custom { dphi, .. } => match dphi {
                Some(f) => Ok(f(x)),
                None => Err(Error::MissingDerivative { what: "first derivative" }),
            },
        }
    }

    pub fn d2phi(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => Ok(alpha * (alpha - 1.0) * x.powf(alpha - 2.0)),
            Inner::Custom { d2phi, .. } => match d2phi {
                Some(f) => Ok(f(x)),
                None => Err(Error::MissingDerivative { what: "second derivative" }),
            },
        }
    }

    /// Tail integral T(x) = int_x^inf dt / Phi(t).
    pub fn tail(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => Ok(x.powf(1.0 - alpha) / (alpha - 1.0)),
            Inner::Custom { phi, tail_cache, .. } => {
                let key = x.to_bits();
                if let Some(v) = tail_cache.read().expect("tail cache poisoned").get(&key) {
                    return Ok(*v);
                }
                // Substitute t = x/u: the tail becomes int_0^1 x / (u^2 Phi(x/u)) du,
                // with an integrable endpoint at u = 0 whenever the tail converges.
                let f = |u: f64| {
                    let v = x / (u * u * phi(x / u));
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                };
                let value = adaptive_gk(&f, 0.0, 1.0, TAIL_REL_TOL, 0.0)?;
                tail_cache.write().expect("tail cache poisoned").insert(key, value);
                Ok(value)
            }
        }
    }

    /// Lambda(x) = -T(x) / x; negative whenever Phi > 0.
    pub fn lambda(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => Ok(-x.powf(-alpha) / (alpha - 1.0)),
            Inner::Custom { .. } => Ok(-self.tail(x)? / x),
        }
    }

    /// d/dx of Lambda(sqrt(x)), the quantity audited by (A.9).
    pub fn dlambda_sq(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => {
                // Lambda(sqrt(x)) = -x^{-alpha/2} / (alpha - 1)
                Ok(0.5 * alpha / (alpha - 1.0) * x.powf(-0.5 * alpha - 1.0))
            }
            Inner::Custom { .. } => {
                let y = x.sqrt();
                Ok(self.dlambda(y)? / (2.0 * y))
            }
        }
    }

    /// Lambda'(x) = 1/(x Phi(x)) - Lambda(x)/x.
    pub fn dlambda(&self, x: f64) -> Result<f64> {
        Ok(1.0 / (x * self.phi(x)) - self.lambda(x)? / x)
    }

    /// Lambda''(x).
    fn d2lambda(&self, x: f64) -> Result<f64> {
        let phi = self.phi(x);
        let dphi = self.dphi(x)?;
        let lam = self.lambda(x)?;
        let dlam = self.dlambda(x)?;
        Ok(-1.0 / (x * x * phi) - dphi / (x * phi * phi) - dlam / x + lam / (x * x))
    }

    /// The positive weight 1/Phi(x) - Lambda(x) in the twisting density.
    #[inline]
    pub fn weight_m2(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => Ok(x.powf(-alpha) * alpha / (alpha - 1.0)),
            Inner::Custom { .. } => Ok(1.0 / self.phi(x) - self.lambda(x)?),
        }
    }

    /// Decomposition kernels: Phi_1 = 2 Phi, Phi_2 = -4 (1/Phi - Lambda)^{-1}.
    pub fn phi_j(&self, part: DensityPart, x: f64) -> Result<f64> {
        match part {
            DensityPart::M1 => Ok(2.0 * self.phi(x)),
            DensityPart::M2 => Ok(-4.0 / self.weight_m2(x)?),
        }
    }

    /// First derivatives of the decomposition kernels.
    pub fn dphi_j(&self, part: DensityPart, x: f64) -> Result<f64> {
        match part {
            DensityPart::M1 => Ok(2.0 * self.dphi(x)?),
            DensityPart::M2 => {
                // Phi_2 = -4 / W with W = 1/Phi - Lambda, so Phi_2' = 4 W' / W^2.
                let w = self.weight_m2(x)?;
                let dw = self.dweight_m2(x)?;
                Ok(4.0 * dw / (w * w))
            }
        }
    }

    fn dweight_m2(&self, x: f64) -> Result<f64> {
        let phi = self.phi(x);
        Ok(-self.dphi(x)? / (phi * phi) - self.dlambda(x)?)
    }

    fn d2weight_m2(&self, x: f64) -> Result<f64> {
        let phi = self.phi(x);
        let dphi = self.dphi(x)?;
        let d2phi = self.d2phi(x)?;
        Ok(-d2phi / (phi * phi) + 2.0 * dphi * dphi / (phi * phi * phi) - self.d2lambda(x)?)
    }

    /// Second derivatives of the decomposition kernels.
    pub fn d2phi_j(&self, part: DensityPart, x: f64) -> Result<f64> {
        match part {
            DensityPart::M1 => Ok(2.0 * self.d2phi(x)?),
            DensityPart::M2 => {
                let w = self.weight_m2(x)?;
                let dw = self.dweight_m2(x)?;
                let d2w = self.d2weight_m2(x)?;
                Ok(4.0 * d2w / (w * w) - 8.0 * dw * dw / (w * w * w))
            }
        }
    }

    /// Logarithmic derivative Xi_j(x) = x Phi_j'(x) / Phi_j(x).
    ///
    /// Constant and equal to alpha for power laws, for both j.
    pub fn xi(&self, part: DensityPart, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { alpha } => {
                let _ = part;
                Ok(*alpha)
            }
            Inner::Custom { .. } => Ok(x * self.dphi_j(part, x)? / self.phi_j(part, x)?),
        }
    }

    /// Xi_j'(x); identically zero for power laws.
    pub fn xi_prime(&self, part: DensityPart, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::PowerLaw { .. } => Ok(0.0),
            Inner::Custom { .. } => {
                let pj = self.phi_j(part, x)?;
                let dpj = self.dphi_j(part, x)?;
                let d2pj = self.d2phi_j(part, x)?;
                Ok((dpj * pj + x * d2pj * pj - x * dpj * dpj) / (pj * pj))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation (Fritsch-Carlson) in log-log coordinates
// ---------------------------------------------------------------------------

/// Monotone C1 cubic interpolant of log Phi against log x, extended linearly
/// (i.e. by power laws) beyond the table.
#[derive(Clone)]
pub struct MonotoneCubic {
    u: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new_log_log(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Validation("x and phi columns differ in length".into()));
        }
        if xs.len() < 4 {
            return Err(Error::Validation(format!(
                "phi table needs at least 4 rows, got {}",
                xs.len()
            )));
        }
        for (k, (&x, &y)) in xs.iter().zip(ys.iter()).enumerate() {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Validation(format!("phi table row {}: x must be positive", k + 1)));
            }
            if !(y > 0.0) || !y.is_finite() {
                return Err(Error::Validation(format!(
                    "phi table row {}: phi must be positive",
                    k + 1
                )));
            }
            if k > 0 && !(x > xs[k - 1]) {
                return Err(Error::Validation(format!(
                    "phi table row {}: x must be strictly increasing",
                    k + 1
                )));
            }
        }
        let u: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let v: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let n = u.len();
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (v[i + 1] - v[i]) / (u[i + 1] - u[i]);
        }
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        // Fritsch-Carlson limiter.
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / d[i];
            let b = m[i + 1] / d[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }
        Ok(MonotoneCubic { u, v, m })
    }

    /// Power-law exponent used past the right end of the table.
    pub fn right_slope(&self) -> f64 {
        *self.m.last().expect("non-empty table")
    }

    fn locate(&self, uu: f64) -> usize {
        let n = self.u.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.u[mid] <= uu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// g(u), g'(u), g''(u) for the log-log representation.
    fn g(&self, uu: f64) -> (f64, f64, f64) {
        let n = self.u.len();
        if uu <= self.u[0] {
            return (self.v[0] + self.m[0] * (uu - self.u[0]), self.m[0], 0.0);
        }
        if uu >= self.u[n - 1] {
            return (self.v[n - 1] + self.m[n - 1] * (uu - self.u[n - 1]), self.m[n - 1], 0.0);
        }
        let i = self.locate(uu);
        let h = self.u[i + 1] - self.u[i];
        let t = (uu - self.u[i]) / h;
        let (v0, v1, m0, m1) = (self.v[i], self.v[i + 1], self.m[i] * h, self.m[i + 1] * h);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let val = h00 * v0 + h10 * m0 + h01 * v1 + h11 * m1;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        let der = (dh00 * v0 + dh10 * m0 + dh01 * v1 + dh11 * m1) / h;
        let d2h00 = 12.0 * t - 6.0;
        let d2h10 = 6.0 * t - 4.0;
        let d2h01 = -d2h00;
        let d2h11 = 6.0 * t - 2.0;
        let der2 = (d2h00 * v0 + d2h10 * m0 + d2h01 * v1 + d2h11 * m1) / (h * h);
        (val, der, der2)
    }

    pub fn phi(&self, x: f64) -> f64 {
        let (g, _, _) = self.g(x.ln());
        g.exp()
    }

    pub fn dphi(&self, x: f64) -> f64 {
        let (g, dg, _) = self.g(x.ln());
        g.exp() * dg / x
    }

    pub fn d2phi(&self, x: f64) -> f64 {
        let (g, dg, d2g) = self.g(x.ln());
        g.exp() * (dg * dg + d2g - dg) / (x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_closed_forms() {
        let m = PhiModel::power_law(2.0).unwrap();
        assert!((m.lambda(1.0).unwrap() + 1.0).abs() < 1e-15);
        // 1/Phi + Lambda vanishes identically at alpha = 2
        for x in [0.3, 1.0, 2.7] {
            assert!((1.0 / m.phi(x) + m.lambda(x).unwrap()).abs() < 1e-15);
        }
        let m3 = PhiModel::power_law(3.0).unwrap();
        assert!((m3.lambda(2.0).unwrap() + 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn power_law_rejects_divergent_tail() {
        assert!(matches!(PhiModel::power_law(1.0), Err(Error::TailDivergence { .. })));
        assert!(matches!(PhiModel::power_law(0.5), Err(Error::TailDivergence { .. })));
    }

    #[test]
    fn derived_phi_j_values() {
        let m = PhiModel::power_law(2.0).unwrap();
        assert!((m.phi_j(DensityPart::M1, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((m.phi_j(DensityPart::M2, 1.0).unwrap() + 2.0).abs() < 1e-15);
        let m25 = PhiModel::power_law(2.5).unwrap();
        assert!((m25.phi_j(DensityPart::M2, 1.0).unwrap() + 2.4).abs() < 1e-15);
    }

    #[test]
    fn xi_constant_for_power_law() {
        let m = PhiModel::power_law(2.5).unwrap();
        for part in [DensityPart::M1, DensityPart::M2] {
            for x in [0.1, 0.7, 3.0] {
                assert_eq!(m.xi(part, x).unwrap(), 2.5);
                assert_eq!(m.xi_prime(part, x).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn custom_xi_matches_hand_differentiation() {
        // Phi = x^2 + x^4: x Phi'/Phi at x = 1 is (2 + 4)/(1 + 1) = 3.
        let m = PhiModel::custom(
            "poly",
            |x| x * x + x.powi(4),
            Some(Box::new(|x| 2.0 * x + 4.0 * x.powi(3))),
            Some(Box::new(|x| 2.0 + 12.0 * x * x)),
        );
        let xi1 = m.xi(DensityPart::M1, 1.0).unwrap();
        assert!((xi1 - 3.0).abs() < 1e-12, "{xi1}");
    }

    #[test]
    fn custom_without_derivative_errors() {
        let m = PhiModel::custom("bare", |x| x * x, None, None);
        assert!(matches!(
            m.xi(DensityPart::M1, 1.0),
            Err(Error::MissingDerivative { .. })
        ));
    }

    #[test]
    fn numeric_tail_matches_power_law() {
        for alpha in [1.5, 2.0, 2.5, 2.9] {
            let exact = PhiModel::power_law(alpha).unwrap();
            let numeric = PhiModel::custom("pow", move |x: f64| x.powf(alpha), None, None);
            for x in [0.05, 0.4, 1.0, 3.0] {
                let t_exact = exact.tail(x).unwrap();
                let t_num = numeric.tail(x).unwrap();
                assert!(
                    ((t_num - t_exact) / t_exact).abs() < 1e-8,
                    "alpha={alpha} x={x}: {t_num} vs {t_exact}"
                );
            }
        }
    }

    #[test]
    fn tabulated_power_law_is_reproduced() {
        // x^2.5 sampled on a log grid: exactly linear in log-log space, so the
        // monotone cubic reproduces it (including derivatives) at off-grid x.
        let xs: Vec<f64> = (0..40).map(|k| 1e-3 * 10f64.powf(k as f64 / 6.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(2.5)).collect();
        let m = PhiModel::from_table(&xs, &ys).unwrap();
        for x in [0.01, 0.2, 1.7, 30.0] {
            let rel = (m.phi(x) - x.powf(2.5)) / x.powf(2.5);
            assert!(rel.abs() < 1e-12, "phi at {x}: rel {rel}");
            let dexact = 2.5 * x.powf(1.5);
            assert!(((m.dphi(x).unwrap() - dexact) / dexact).abs() < 1e-10);
        }
        // tail agrees with the closed form
        let t = m.tail(0.5).unwrap();
        let exact = 0.5f64.powf(-1.5) / 1.5;
        assert!(((t - exact) / exact).abs() < 1e-8, "{t} vs {exact}");
    }

    #[test]
    fn table_with_divergent_tail_is_rejected() {
        let xs: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(0.5)).collect();
        assert!(matches!(
            PhiModel::from_table(&xs, &ys),
            Err(Error::TailDivergence { .. })
        ));
    }
}
