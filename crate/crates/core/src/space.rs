//! Ambient coordinate spaces with norm oracles, subspace frames, and
//! ellipsoid-based inner products on subspaces.
//!
//! A subspace never stores an abstract object: it is always a `Frame`,
//! an ordered list of independent ambient vectors. Inner products on a
//! frame's span are `k x k` Gram matrices in frame coordinates, built by
//! enclosing-ellipsoid approximation of the span's norm unit ball.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::{format, string::String, vec, vec::Vec};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::optim::{batch_rng, sphere_directions};

/// Relative singular-value cutoff for frame independence.
pub const RANK_TOL: f64 = 1e-10;

/// Norm oracle variants. Weights, where present, are strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    /// `l^p` norm; `p = f64::INFINITY` is the sup norm.
    Lp { p: f64 },
    /// `max_i w_i |x_i|`.
    WeightedSup { weights: Vec<f64> },
    /// `sum_i w_i |x_i|`.
    WeightedL1 { weights: Vec<f64> },
    /// Gauge of the symmetric polytope `{x : |<a, x>| <= 1}` over the
    /// facet list; the facets must span the ambient space.
    Polytope { facets: Vec<Vec<f64>> },
}

/// Ambient coordinate space of dimension `D` with a norm oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormedSpace {
    dim: usize,
    kind: NormKind,
}

impl NormedSpace {
    pub fn new(dim: usize, kind: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::input("ambient dimension must be positive"));
        }
        match &kind {
            NormKind::Lp { p } => {
                if !(*p >= 1.0) {
                    return Err(CoreError::input(format!("lp norm needs p >= 1, got {p}")));
                }
            }
            NormKind::WeightedSup { weights } | NormKind::WeightedL1 { weights } => {
                if weights.len() != dim {
                    return Err(CoreError::input(format!(
                        "weights length {} does not match dim {dim}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !(*w > 0.0)) {
                    return Err(CoreError::input("weights must be strictly positive"));
                }
            }
            NormKind::Polytope { facets } => {
                if facets.is_empty() {
                    return Err(CoreError::input("polytope norm needs at least one facet"));
                }
                for a in facets {
                    if a.len() != dim {
                        return Err(CoreError::input("facet length does not match dim"));
                    }
                }
                let m = DMatrix::from_fn(facets.len(), dim, |i, j| facets[i][j]);
                let svals = m.singular_values();
                let smax = svals.max();
                let smin = svals.min();
                if facets.len() < dim || smin <= RANK_TOL * smax {
                    return Err(CoreError::input(
                        "polytope facets must span the ambient space (norm would be degenerate)",
                    ));
                }
            }
        }
        Ok(NormedSpace { dim, kind })
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, NormKind::Lp { p })
    }

    pub fn sup(dim: usize) -> Self {
        NormedSpace { dim, kind: NormKind::Lp { p: f64::INFINITY } }
    }

    pub fn euclidean(dim: usize) -> Self {
        NormedSpace { dim, kind: NormKind::Lp { p: 2.0 } }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// Whether the norm is absolute (invariant under sign flips of the
    /// coordinates); true for all built-in kinds except polytope gauges.
    pub fn is_absolute(&self) -> bool {
        !matches!(self.kind, NormKind::Polytope { .. })
    }

    /// Evaluate the norm oracle; errors on dimension mismatch.
    pub fn try_norm(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim {
            return Err(CoreError::input(format!(
                "vector length {} does not match space dim {}",
                v.len(),
                self.dim
            )));
        }
        Ok(self.norm(v))
    }

    /// Evaluate the norm oracle (length assumed correct).
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        match &self.kind {
            NormKind::Lp { p } => {
                if p.is_infinite() {
                    v.iter().fold(0.0, |m, x| m.max(x.abs()))
                } else if *p == 1.0 {
                    v.iter().map(|x| x.abs()).sum()
                } else if *p == 2.0 {
                    v.norm()
                } else {
                    v.iter().map(|x| x.abs().powf(*p)).sum::<f64>().powf(1.0 / *p)
                }
            }
            NormKind::WeightedSup { weights } => v
                .iter()
                .zip(weights)
                .fold(0.0, |m, (x, w)| m.max(w * x.abs())),
            NormKind::WeightedL1 { weights } => {
                v.iter().zip(weights).map(|(x, w)| w * x.abs()).sum()
            }
            NormKind::Polytope { facets } => facets
                .iter()
                .map(|a| a.iter().zip(v.iter()).map(|(ai, xi)| ai * xi).sum::<f64>().abs())
                .fold(0.0, f64::max),
        }
    }

    /// A short tag for report headers.
    pub fn kind_tag(&self) -> String {
        match &self.kind {
            NormKind::Lp { p } if p.is_infinite() => String::from("lp:inf"),
            NormKind::Lp { p } => format!("lp:{p}"),
            NormKind::WeightedSup { .. } => String::from("weighted_sup"),
            NormKind::WeightedL1 { .. } => String::from("weighted_l1"),
            NormKind::Polytope { .. } => String::from("polytope"),
        }
    }
}

/// Ordered list of `k` linearly independent ambient vectors spanning a
/// subspace, stored as the columns of a `D x k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    space: NormedSpace,
    basis: DMatrix<f64>,
}

impl Frame {
    pub fn new(space: NormedSpace, basis: DMatrix<f64>) -> Result<Self> {
        let (d, k) = basis.shape();
        if d != space.dim() {
            return Err(CoreError::input(format!(
                "basis rows {d} do not match ambient dim {}",
                space.dim()
            )));
        }
        if k == 0 || k > d {
            return Err(CoreError::input(format!("need 1 <= k <= D, got k={k}, D={d}")));
        }
        let svals = basis.singular_values();
        let smax = svals.max();
        let smin = svals.min();
        if !(smin > RANK_TOL * smax) {
            return Err(CoreError::rank(format!(
                "basis is numerically dependent: sigma_min/sigma_max = {:e}",
                smin / smax
            )));
        }
        Ok(Frame { space, basis })
    }

    pub fn from_columns(space: NormedSpace, cols: &[DVector<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Err(CoreError::input("frame needs at least one column"));
        }
        let d = space.dim();
        let mut m = DMatrix::zeros(d, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != d {
                return Err(CoreError::input("column length does not match ambient dim"));
            }
            m.set_column(j, c);
        }
        Frame::new(space, m)
    }

    /// Standard coordinate frame `e_1, ..., e_k`.
    pub fn coordinate(space: NormedSpace, k: usize) -> Result<Self> {
        let d = space.dim();
        Frame::new(space, DMatrix::identity(d, d).columns(0, k).into_owned())
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Subspace dimension `k`.
    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    /// Ambient dimension `D`.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// Lift frame coordinates to an ambient vector.
    pub fn lift(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.basis * c
    }

    /// Norm of the ambient vector with the given frame coordinates.
    pub fn coord_norm(&self, c: &DVector<f64>) -> f64 {
        self.space.norm(&self.lift(c))
    }

    /// A copy with every column rescaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let mut m = self.basis.clone();
        for j in 0..self.k() {
            let n = self.space.norm(&self.basis.column(j).into_owned());
            if !(n > 0.0) {
                return Err(CoreError::rank("cannot normalize a zero column"));
            }
            let scaled = self.basis.column(j) / n;
            m.set_column(j, &scaled);
        }
        Frame::new(self.space.clone(), m)
    }

    /// A copy with the same span and a Euclidean-orthonormal basis.
    pub fn orthonormalized(&self) -> Result<Self> {
        let qr = self.basis.clone().qr();
        Frame::new(self.space.clone(), qr.q())
    }
}

/// How the Gram matrix of an [`InnerProductModel`] is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleMode {
    /// Raw enclosing-ellipsoid quadratic form.
    JohnRaw,
    /// Rescaled so the Gram-norm unit ball has a prescribed coordinate
    /// volume (the induced volumes of the two norms then coincide).
    VolumeMatched,
}

/// Inner product on a frame's span, expressed as an SPD Gram matrix in
/// frame coordinates.
#[derive(Debug, Clone)]
pub struct InnerProductModel {
    frame: Frame,
    gram: DMatrix<f64>,
    /// Upper Cholesky factor `U` with `gram = U^T U`, kept for the
    /// sampling transform.
    chol_upper: DMatrix<f64>,
    scale_mode: ScaleMode,
    eps: f64,
}

impl InnerProductModel {
    pub fn new(frame: Frame, gram: DMatrix<f64>, scale_mode: ScaleMode, eps: f64) -> Result<Self> {
        let k = frame.k();
        if gram.shape() != (k, k) {
            return Err(CoreError::input("gram must be k x k"));
        }
        let sym = (&gram + gram.transpose()) * 0.5;
        let chol = Cholesky::new(sym.clone()).ok_or_else(|| {
            CoreError::input("gram matrix is not positive definite (Cholesky failed)")
        })?;
        let chol_upper = chol.l().transpose();
        Ok(InnerProductModel { frame, gram: sym, chol_upper, scale_mode, eps })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn scale_mode(&self) -> ScaleMode {
        self.scale_mode
    }

    /// Tolerance the enclosing ellipsoid was built to.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Gram norm of frame coordinates.
    pub fn gram_norm(&self, c: &DVector<f64>) -> f64 {
        (self.gram.quadratic_form(c)).max(0.0).sqrt()
    }

    /// `sqrt(det(gram))`; the Lebesgue volume of the Gram unit ball in
    /// frame coordinates is `omega_k / sqrt(det(gram))`.
    pub fn sqrt_det_gram(&self) -> f64 {
        self.chol_upper.diagonal().iter().product()
    }

    /// Map a Euclidean unit-ball sample `z` to a point of the Gram unit
    /// ball (inverse Cholesky transform).
    pub fn unit_ball_point(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol_upper.solve_upper_triangular(z).expect("chol is nonsingular")
    }
}

trait QuadraticForm {
    fn quadratic_form(&self, c: &DVector<f64>) -> f64;
}

impl QuadraticForm for DMatrix<f64> {
    fn quadratic_form(&self, c: &DVector<f64>) -> f64 {
        (c.transpose() * self * c)[(0, 0)]
    }
}

/// Minimum-volume enclosing ellipsoid of a symmetrized point set in
/// `R^k`, by multiplicative-weight iteration. Returns the quadratic form
/// `Q` with `p^T Q p <= 1` for every input point.
fn mvee_symmetric(points: &[DVector<f64>], eps: f64, max_iter: usize) -> Result<DMatrix<f64>> {
    let k = points[0].len();
    let m = points.len();
    let mut u = vec![1.0 / m as f64; m];
    let kf = k as f64;
    for _ in 0..max_iter {
        let mut x = DMatrix::zeros(k, k);
        for (w, p) in u.iter().zip(points) {
            if *w > 0.0 {
                x.syger(*w, p, p, 1.0);
            }
        }
        let chol = Cholesky::new(x)
            .ok_or_else(|| CoreError::rank("ellipsoid moment matrix is singular"))?;
        let mut gmax = 0.0;
        let mut jmax = 0;
        let mut gmin = f64::INFINITY;
        let mut jmin = 0;
        for (j, p) in points.iter().enumerate() {
            let g = p.dot(&chol.solve(p));
            if g > gmax {
                gmax = g;
                jmax = j;
            }
            if u[j] > 1e-15 && g < gmin {
                gmin = g;
                jmin = j;
            }
        }
        if gmax <= kf * (1.0 + eps) && gmin >= kf * (1.0 - eps) {
            return Ok(chol.inverse() / gmax);
        }
        // Wolfe-Atwood: take whichever of the add step (toward the most
        // violated point) or the away step (off the weakest support
        // point) has the larger violation.
        if gmax - kf >= kf - gmin {
            let beta = (gmax - kf) / (kf * (gmax - 1.0));
            if beta <= 1e-17 {
                return Ok(chol.inverse() / gmax);
            }
            for w in u.iter_mut() {
                *w *= 1.0 - beta;
            }
            u[jmax] += beta;
        } else {
            let beta = ((gmin - kf) / (kf * (gmin - 1.0))).max(-u[jmin] / (1.0 - u[jmin]));
            if beta >= -1e-17 {
                u[jmin] = 0.0;
                continue;
            }
            for w in u.iter_mut() {
                *w *= 1.0 - beta;
            }
            u[jmin] = (u[jmin] + beta).max(0.0);
        }
    }
    Err(CoreError::Convergence {
        what: String::from("minimum-volume enclosing ellipsoid"),
        iterations: max_iter,
    })
}

/// Iteration cap for the enclosing-ellipsoid construction.
pub const MVEE_MAX_ITER: usize = 200_000;

/// Build an enclosing-ellipsoid inner product for the frame's span:
/// sample unit-norm boundary points of the span's unit ball (in frame
/// coordinates), take the minimum-volume enclosing ellipsoid of the
/// symmetrized set to relative tolerance `eps`, and return its quadratic
/// form as the Gram matrix. On the sampled set, `gram_norm <= 1` holds
/// exactly; the Euclidean-vs-norm sandwich holds up to `(1 + eps)`
/// factors.
pub fn john_model(frame: &Frame, n_dirs: usize, eps: f64) -> Result<InnerProductModel> {
    let k = frame.k();
    if n_dirs < 2 * k * (k + 1) {
        return Err(CoreError::input(format!(
            "need at least 2k(k+1) = {} sampled directions, got {n_dirs}",
            2 * k * (k + 1)
        )));
    }
    if !(eps > 0.0) {
        return Err(CoreError::input("eps must be positive"));
    }
    let dirs = sphere_directions(k, n_dirs);
    let mut boundary = Vec::with_capacity(dirs.len());
    for c in &dirs {
        let n = frame.coord_norm(c);
        if !(n > 0.0) || !n.is_finite() {
            return Err(CoreError::rank("norm degenerate on the frame's span"));
        }
        boundary.push(c / n);
    }
    let q = mvee_symmetric(&boundary, eps, MVEE_MAX_ITER)?;
    InnerProductModel::new(frame.clone(), q, ScaleMode::JohnRaw, eps)
}

/// Default direction budget for [`john_model`]: enough rays that the
/// sampled body resolves the span's unit ball at roughly the tolerance
/// scale for k <= 4.
pub fn default_john_dirs(k: usize) -> usize {
    (2 * k * (k + 1)).max(1024 * k)
}

/// Rescale a model's Gram matrix so the Lebesgue volume (in frame
/// coordinates) of its unit ball equals `ball_vol`, the coordinate
/// volume of the norm unit ball. The induced volumes of the norm and of
/// the Gram norm then coincide.
pub fn volume_matched_model(model: &InnerProductModel, ball_vol: f64) -> Result<InnerProductModel> {
    if !(ball_vol > 0.0) {
        return Err(CoreError::input("ball volume must be positive"));
    }
    let k = model.frame().k();
    let omega = crate::volume::euclidean_ball_volume(k);
    // vol{c : c^T (s G) c <= 1} = omega_k / (s^{k/2} sqrt(det G)) = ball_vol
    let s = (omega / (ball_vol * model.sqrt_det_gram())).powf(2.0 / k as f64);
    InnerProductModel::new(
        model.frame().clone(),
        model.gram() * s,
        ScaleMode::VolumeMatched,
        model.eps(),
    )
}

/// Worst observed violations of the norm-equivalence sandwich on `n`
/// random unit vectors of the span. For a `JohnRaw` model the sandwich is
/// `gram_norm <= (1+eps) |v|` and `|v| <= (1+eps) sqrt(k) gram_norm`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SandwichStats {
    /// max over samples of `gram_norm(v) / |v|` (should be <= 1 + eps).
    pub max_upper_ratio: f64,
    /// max over samples of `|v| / (sqrt(k) gram_norm(v))` (should be <= 1 + eps).
    pub max_lower_ratio: f64,
    pub n_samples: usize,
}

pub fn john_sandwich_stats(model: &InnerProductModel, n: usize, seed: u64) -> SandwichStats {
    let k = model.frame().k();
    let mut rng = batch_rng(seed, 0);
    let mut up = 0.0f64;
    let mut lo = 0.0f64;
    let sqrt_k = (k as f64).sqrt();
    for _ in 0..n {
        let c = DVector::from_fn(k, |_, _| {
            // Box-Muller on uniform draws keeps the stream identical
            // across platforms.
            let u: f64 = rng.gen::<f64>().max(1e-300);
            let v: f64 = rng.gen();
            (-2.0 * u.ln()).sqrt() * (core::f64::consts::TAU * v).cos()
        });
        let vnorm = frame_coord_norm(model, &c);
        if !(vnorm > 0.0) {
            continue;
        }
        let g = model.gram_norm(&c);
        up = up.max(g / vnorm);
        lo = lo.max(vnorm / (sqrt_k * g));
    }
    SandwichStats { max_upper_ratio: up, max_lower_ratio: lo, n_samples: n }
}

fn frame_coord_norm(model: &InnerProductModel, c: &DVector<f64>) -> f64 {
    model.frame().coord_norm(c)
}
