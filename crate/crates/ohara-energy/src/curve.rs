//! Discrete closed curves: arclength resampling, tangents, distances.
//!
//! A `ClosedCurve` is a closed polygon resampled to N points equally spaced
//! in the arclength of its periodic cubic interpolant. Nodes sit at cell
//! midpoints s_i = (i + 1/2) L / N, so the energy quadrature never evaluates
//! a density at s1 = s2 outside the diagonal cells.

use crate::error::{Error, Result};
use crate::spline::{uniform_spline_derivative, PeriodicSpline};
use crate::vecn;

/// Minimum number of nodes of a usable curve.
pub const MIN_NODES: usize = 8;

/// Closed curve in R^dim sampled at N arclength-equidistant nodes.
#[derive(Clone, Debug)]
pub struct ClosedCurve {
    dim: usize,
    n: usize,
    total_length: f64,
    /// Flat node positions, n x dim.
    points: Vec<f64>,
    /// Flat unit tangents, n x dim.
    tangents: Vec<f64>,
    /// Arclength parameters s_i = (i + 1/2) L / N.
    nodes: Vec<f64>,
}

impl ClosedCurve {
    /// Resample a closed polygon to `n` points equally spaced along the
    /// arclength of its periodic cubic interpolant (chordal knots, per-segment
    /// 5-point Gauss arclength).
    pub fn resample_arclength(input: &[f64], dim: usize, n: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DegenerateInput(format!("ambient dimension must be >= 2, got {dim}")));
        }
        if input.len() % dim != 0 {
            return Err(Error::DegenerateInput(format!(
                "point buffer length {} is not a multiple of dim {dim}",
                input.len()
            )));
        }
        let m = input.len() / dim;
        if m < 4 {
            return Err(Error::DegenerateInput(format!("need at least 4 input points, got {m}")));
        }
        if n < MIN_NODES {
            return Err(Error::DegenerateInput(format!("need N >= {MIN_NODES} output nodes, got {n}")));
        }

        // Scale-aware duplicate detection.
        let mut extent: f64 = 0.0;
        for d in 0..dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..m {
                lo = lo.min(input[i * dim + d]);
                hi = hi.max(input[i * dim + d]);
            }
            extent = extent.max(hi - lo);
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::DegenerateInput("input points are all coincident or non-finite".into()));
        }
        let dup_tol = 1e-14 * extent;

        // Chordal knots.
        let mut knots = Vec::with_capacity(m);
        let mut acc = 0.0;
        for i in 0..m {
            knots.push(acc);
            let a = &input[i * dim..(i + 1) * dim];
            let bi = (i + 1) % m;
            let b = &input[bi * dim..(bi + 1) * dim];
            let c = vecn::dist(a, b);
            if c <= dup_tol {
                return Err(Error::DegenerateInput(format!(
                    "duplicate consecutive points at index {i} (zero-length segment)"
                )));
            }
            acc += c;
        }
        let spline = PeriodicSpline::new(knots.clone(), acc, input.to_vec(), dim)?;

        // Per-segment arclength and cumulative table.
        let mut seg_len = Vec::with_capacity(m);
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for i in 0..m {
            let a = knots[i];
            let b = if i + 1 < m { knots[i + 1] } else { acc };
            let s = spline.arclength_gauss(a, b);
            seg_len.push(s);
            cum.push(cum[i] + s);
        }
        let total = cum[m];
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::DegenerateInput("interpolant has non-finite length".into()));
        }

        // Place node k at arclength k * L / n from the first input point.
        let h = total / n as f64;
        let mut points = vec![0.0; n * dim];
        let mut seg = 0usize;
        for k in 0..n {
            let target = k as f64 * h;
            while seg + 1 < m && cum[seg + 1] <= target {
                seg += 1;
            }
            let a = knots[seg];
            let b = if seg + 1 < m { knots[seg + 1] } else { acc };
            let want = target - cum[seg];
            let t = invert_arclength(&spline, a, b, seg_len[seg], want);
            spline.value_into(t, &mut points[k * dim..(k + 1) * dim]);
        }

        Self::finish_from_points(points, dim, n, total)
    }

    /// Assemble a curve from already-resampled node positions. Recomputes the
    /// canonical tangents and node parameters.
    fn finish_from_points(points: Vec<f64>, dim: usize, n: usize, total: f64) -> Result<Self> {
        let h = total / n as f64;
        let deriv = uniform_spline_derivative(&points, dim, h);
        let mut tangents = vec![0.0; n * dim];
        for i in 0..n {
            let d = &deriv[i * dim..(i + 1) * dim];
            let norm = vecn::norm(d);
            if !(norm > 1e-12 * h.max(1.0)) {
                return Err(Error::DegenerateInput(format!(
                    "zero-length derivative at node {i}; curve is degenerate"
                )));
            }
            vecn::scale_into(&mut tangents[i * dim..(i + 1) * dim], d, 1.0 / norm);
        }
        let nodes = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        Ok(ClosedCurve { dim, n, total_length: total, points, tangents, nodes })
    }

    /// Expert constructor from explicit node data (tabulated polylines,
    /// tests, FFI callers). Tangents must be unit to 1e-8.
    pub fn from_parts(
        points: Vec<f64>,
        dim: usize,
        total_length: f64,
        tangents: Vec<f64>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DegenerateInput("ambient dimension must be >= 2".into()));
        }
        if points.len() % dim != 0 || points.len() != tangents.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: tangents.len() });
        }
        let n = points.len() / dim;
        if n < MIN_NODES {
            return Err(Error::DegenerateInput(format!("need N >= {MIN_NODES} nodes, got {n}")));
        }
        if !(total_length > 0.0) {
            return Err(Error::DegenerateInput("total length must be positive".into()));
        }
        for i in 0..n {
            let t = &tangents[i * dim..(i + 1) * dim];
            if (vecn::norm(t) - 1.0).abs() > 1e-8 {
                return Err(Error::DegenerateInput(format!("tangent {i} is not unit length")));
            }
        }
        let h = total_length / n as f64;
        let nodes = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        Ok(ClosedCurve { dim, n, total_length, points, tangents, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes N.
    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Grid spacing h = L / N.
    pub fn spacing(&self) -> f64 {
        self.total_length / self.n as f64
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        &self.tangents[i * self.dim..(i + 1) * self.dim]
    }

    /// Arclength parameter of node i.
    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn tangents_flat(&self) -> &[f64] {
        &self.tangents
    }

    /// Unit tangent field as a list of owned vectors.
    pub fn tangent_list(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.tangent(i).to_vec()).collect()
    }

    /// Intrinsic (shorter-arc) distance between nodes i and j: exact on the
    /// uniform grid, min(|i-j|, N-|i-j|) * h.
    pub fn intrinsic_between(&self, i: usize, j: usize) -> f64 {
        let k = if i >= j { i - j } else { j - i };
        let k = k.min(self.n - k);
        k as f64 * self.spacing()
    }

    /// Signed wrapped arclength difference s_i - s_j in (-L/2, L/2], with the
    /// antipodal tie broken towards +L/2.
    pub fn signed_ds(&self, i: usize, j: usize) -> f64 {
        let l = self.total_length;
        let mut d = self.nodes[i] - self.nodes[j];
        while d > 0.5 * l {
            d -= l;
        }
        while d <= -0.5 * l {
            d += l;
        }
        d
    }

    /// Curve scaled by `factor` about the origin (exact homogeneous scaling).
    pub fn scaled(&self, factor: f64) -> ClosedCurve {
        let mut out = self.clone();
        for v in out.points.iter_mut() {
            *v *= factor;
        }
        out.total_length *= factor;
        for v in out.nodes.iter_mut() {
            *v *= factor;
        }
        out
    }

    /// Curve translated by `shift`.
    pub fn translated(&self, shift: &[f64]) -> ClosedCurve {
        let mut out = self.clone();
        for i in 0..self.n {
            for d in 0..self.dim {
                out.points[i * self.dim + d] += shift[d];
            }
        }
        out
    }

    /// Mean of the node positions.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for i in 0..self.n {
            for d in 0..self.dim {
                c[d] += self.points[i * self.dim + d];
            }
        }
        for v in c.iter_mut() {
            *v /= self.n as f64;
        }
        c
    }

    /// Diagonal of the axis-aligned bounding box (cheap diameter proxy).
    pub fn bbox_diameter(&self) -> f64 {
        let mut s = 0.0;
        for d in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..self.n {
                lo = lo.min(self.points[i * self.dim + d]);
                hi = hi.max(self.points[i * self.dim + d]);
            }
            s += (hi - lo) * (hi - lo);
        }
        s.sqrt()
    }

    /// Shortest chord between consecutive nodes.
    pub fn min_edge(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            m = m.min(vecn::dist(self.point(i), self.point((i + 1) % self.n)));
        }
        m
    }
}

/// Invert the arclength function on one spline segment: find t in [a, b] with
/// integral of speed over [a, t] equal to `want`.
fn invert_arclength(spline: &PeriodicSpline, a: f64, b: f64, seg_len: f64, want: f64) -> f64 {
    if want <= 0.0 {
        return a;
    }
    if want >= seg_len {
        return b;
    }
    let mut lo = a;
    let mut hi = b;
    let mut t = a + (b - a) * want / seg_len;
    for _ in 0..80 {
        let g = spline.arclength_gauss(a, t) - want;
        if g.abs() <= 1e-14 * seg_len.max(1.0) {
            return t;
        }
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let speed = spline.speed(t);
        let mut next = t - g / speed.max(1e-300);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * (b - a) {
            return next;
        }
        t = next;
    }
    t
}

/// Shorter-arc distance between arclength parameters s1, s2 on a loop of
/// length `l`: min(|s1-s2| mod L, L - |s1-s2| mod L), in [0, L/2].
pub fn intrinsic_distance(l: f64, s1: f64, s2: f64) -> f64 {
    debug_assert!(l > 0.0);
    let d = (s1 - s2).abs().rem_euclid(l);
    d.min(l - d)
}

/// Euclidean distance between nodes i and j.
pub fn chord(curve: &ClosedCurve, i: usize, j: usize) -> f64 {
    vecn::dist(curve.point(i), curve.point(j))
}

/// Unit tangents of the curve (normalized spline derivatives at the nodes).
pub fn tangents(curve: &ClosedCurve) -> Vec<Vec<f64>> {
    curve.tangent_list()
}

// ---------------------------------------------------------------------------
// Built-in test curves and point transforms
// ---------------------------------------------------------------------------

/// Sample a unit circle in R^2.
pub fn circle_points(samples: usize) -> (Vec<f64>, usize) {
    let mut pts = Vec::with_capacity(2 * samples);
    for i in 0..samples {
        let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        pts.push(t.cos());
        pts.push(t.sin());
    }
    (pts, 2)
}

/// Sample an axis-aligned ellipse with semi-axes a, b in R^2.
pub fn ellipse_points(a: f64, b: f64, samples: usize) -> (Vec<f64>, usize) {
    let mut pts = Vec::with_capacity(2 * samples);
    for i in 0..samples {
        let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        pts.push(a * t.cos());
        pts.push(b * t.sin());
    }
    (pts, 2)
}

/// Sample the standard (2,3) torus-knot trefoil embedding in R^3.
pub fn trefoil_points(samples: usize) -> (Vec<f64>, usize) {
    let mut pts = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let w = 2.0 + (3.0 * t).cos();
        pts.push(w * (2.0 * t).cos());
        pts.push(w * (2.0 * t).sin());
        pts.push((3.0 * t).sin());
    }
    (pts, 3)
}

/// Parse a built-in curve spec: `circle`, `ellipse:A:B`, `trefoil`.
pub fn builtin_points(name: &str, samples: usize) -> Result<(Vec<f64>, usize)> {
    if name == "circle" {
        return Ok(circle_points(samples));
    }
    if name == "trefoil" {
        return Ok(trefoil_points(samples));
    }
    if let Some(rest) = name.strip_prefix("ellipse:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::Validation(format!("ellipse spec needs two semi-axes, got '{name}'")));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Validation(format!("bad ellipse semi-axis '{}'", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Validation(format!("bad ellipse semi-axis '{}'", parts[1])))?;
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Validation("ellipse semi-axes must be positive".into()));
        }
        return Ok(ellipse_points(a, b, samples));
    }
    Err(Error::Validation(format!(
        "unknown builtin curve '{name}' (expected circle, ellipse:A:B or trefoil)"
    )))
}

/// Sphere inversion x -> c + (x - c) / |x - c|^2 applied to a flat point list.
pub fn invert_points(points: &[f64], dim: usize, center: &[f64]) -> Result<Vec<f64>> {
    if center.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: center.len() });
    }
    let n = points.len() / dim;
    let mut out = vec![0.0; points.len()];
    for i in 0..n {
        let p = &points[i * dim..(i + 1) * dim];
        let mut r2 = 0.0;
        for d in 0..dim {
            let v = p[d] - center[d];
            r2 += v * v;
        }
        if !(r2 > 0.0) {
            return Err(Error::DegenerateInput(format!("inversion center coincides with point {i}")));
        }
        for d in 0..dim {
            out[i * dim + d] = center[d] + (p[d] - center[d]) / r2;
        }
    }
    Ok(out)
}

/// Embed planar points into R^3 at z = 0.
pub fn embed_in_r3(points: &[f64]) -> Vec<f64> {
    let n = points.len() / 2;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        out.push(points[2 * i]);
        out.push(points[2 * i + 1]);
        out.push(0.0);
    }
    out
}
