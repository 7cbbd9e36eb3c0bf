//! Induced volumes and determinants.
//!
//! The induced volume `m_E` of a `k`-dimensional subspace `E` is the
//! Haar measure normalized so the norm unit ball of `E` has measure
//! `omega_k`. Identifying `E` with `R^k` through a frame, every volume
//! reduces to one scalar: the Lebesgue volume, in frame coordinates, of
//! the norm unit ball. For `k = 1` it is exact; for `k >= 2` it is
//! estimated by rejection sampling inside the enclosing ellipsoid of the
//! ball.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::{format, string::String, vec, vec::Vec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linmap::LinearMap;
use crate::optim::{batch_rng, maximize_ratio_over_sphere, SPHERE_GRID};
use crate::space::{default_john_dirs, john_model, Frame, InnerProductModel, RANK_TOL};

/// Volume of the Euclidean unit ball in dimension `k`.
pub fn euclidean_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => euclidean_ball_volume(k - 2) * core::f64::consts::TAU / k as f64,
    }
}

/// How a [`VolumeEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeMethod {
    Exact1d,
    MonteCarlo,
    ClosedForm,
}

/// A nonnegative scalar with its Monte Carlo error bar.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: VolumeMethod,
    /// Set when the sample cap was reached before the target error.
    pub capped: bool,
}

impl VolumeEstimate {
    pub fn exact(value: f64, method: VolumeMethod) -> Self {
        VolumeEstimate { value, std_error: 0.0, n_samples: 0, method, capped: false }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value > 0.0 {
            self.std_error / self.value
        } else {
            f64::INFINITY
        }
    }
}

/// Restricted determinant value; `value = exp(log_value)` up to
/// round-off, and `value = 0` with `degenerate = true` when the image
/// frame lost rank.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DetResult {
    pub value: f64,
    pub log_value: f64,
    pub std_error_log: f64,
    pub degenerate: bool,
}

/// Tuning knobs for the Monte Carlo volume engine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McConfig {
    pub batch: u64,
    pub max_samples: u64,
    pub min_batches: u64,
    /// Abort when the acceptance rate falls below this floor.
    pub acceptance_floor: f64,
    /// Enclosing-ellipsoid tolerance.
    pub eps_mvee: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            batch: 1 << 16,
            max_samples: 1 << 27,
            min_batches: 4,
            acceptance_floor: 1e-6,
            eps_mvee: 1e-3,
        }
    }
}

/// Draw a uniform point of the Euclidean unit ball in `R^k`.
fn unit_ball_sample<R: Rng>(k: usize, rng: &mut R, buf: &mut DVector<f64>) {
    loop {
        let mut nrm2 = 0.0;
        let mut i = 0;
        while i < k {
            let u: f64 = rng.gen::<f64>().max(1e-300);
            let v: f64 = rng.gen();
            let r = (-2.0 * u.ln()).sqrt();
            let a = core::f64::consts::TAU * v;
            buf[i] = r * a.cos();
            nrm2 += buf[i] * buf[i];
            i += 1;
            if i < k {
                buf[i] = r * a.sin();
                nrm2 += buf[i] * buf[i];
                i += 1;
            }
        }
        if nrm2 > 1e-280 {
            let radius: f64 = rng.gen::<f64>().powf(1.0 / k as f64);
            let scale = radius / nrm2.sqrt();
            for x in buf.iter_mut() {
                *x *= scale;
            }
            return;
        }
    }
}

struct EllipsoidSampler {
    model: InnerProductModel,
    inflate: f64,
    /// Lebesgue volume of the inflated ellipsoid in frame coordinates.
    envelope_volume: f64,
}

impl EllipsoidSampler {
    fn new(frame: &Frame, cfg: &McConfig) -> Result<Self> {
        let k = frame.k();
        let n_dirs = default_john_dirs(k);
        let model = john_model(frame, n_dirs, cfg.eps_mvee)?;
        // The ellipsoid contains the constructed boundary rays exactly;
        // probe a denser fresh set of rays and inflate past the worst
        // overshoot so the envelope certifiably covers the ball there too.
        let mut worst: f64 = 1.0;
        for c in crate::optim::sphere_directions(k, 3 * n_dirs + 511) {
            let n = frame.coord_norm(&c);
            if n > 0.0 {
                worst = worst.max(model.gram_norm(&(c / n)));
            }
        }
        let inflate = worst * (1.0 + cfg.eps_mvee);
        let envelope_volume =
            euclidean_ball_volume(k) * inflate.powi(k as i32) / model.sqrt_det_gram();
        Ok(EllipsoidSampler { model, inflate, envelope_volume })
    }

    /// Transform a Euclidean unit-ball point into the inflated ellipsoid.
    fn point(&self, z: &DVector<f64>) -> DVector<f64> {
        self.model.unit_ball_point(z) * self.inflate
    }
}

/// Lebesgue volume, in frame coordinates, of the norm unit ball
/// `{c : |sum_i c_i v_i| <= 1}` of the frame's span.
///
/// `k = 1` returns `2/|v_1|` exactly. For `k >= 2`, rejection sampling
/// inside the enclosing ellipsoid runs in seeded batches until the
/// relative standard error reaches `target_rel_err` or the sample cap;
/// a capped run is returned with `capped = true` rather than failing.
pub fn unit_ball_coord_volume(
    frame: &Frame,
    seed: u64,
    target_rel_err: f64,
    cfg: &McConfig,
) -> Result<VolumeEstimate> {
    let k = frame.k();
    if k == 1 {
        let n = frame.space().norm(&frame.column(0));
        if !(n > 0.0) {
            return Err(CoreError::rank("zero-norm frame column"));
        }
        return Ok(VolumeEstimate::exact(2.0 / n, VolumeMethod::Exact1d));
    }
    let sampler = EllipsoidSampler::new(frame, cfg)?;
    let mut accepted = 0u64;
    let mut total = 0u64;
    let mut batch_idx = 0u64;
    let mut z = DVector::zeros(k);
    loop {
        let mut rng = batch_rng(seed, batch_idx);
        for _ in 0..cfg.batch {
            unit_ball_sample(k, &mut rng, &mut z);
            let c = sampler.point(&z);
            if frame.coord_norm(&c) <= 1.0 {
                accepted += 1;
            }
        }
        total += cfg.batch;
        batch_idx += 1;
        let p = accepted as f64 / total as f64;
        if batch_idx >= cfg.min_batches {
            if p < cfg.acceptance_floor {
                return Err(CoreError::Conditioning(format!(
                    "acceptance rate {p:.2e} below floor; the frame is too skewed for \
                     rejection sampling at k={k}"
                )));
            }
            let value = sampler.envelope_volume * p;
            let std_error = sampler.envelope_volume * (p * (1.0 - p) / total as f64).sqrt();
            if std_error <= target_rel_err * value {
                return Ok(VolumeEstimate {
                    value,
                    std_error,
                    n_samples: total,
                    method: VolumeMethod::MonteCarlo,
                    capped: false,
                });
            }
            if total >= cfg.max_samples {
                return Ok(VolumeEstimate {
                    value,
                    std_error,
                    n_samples: total,
                    method: VolumeMethod::MonteCarlo,
                    capped: true,
                });
            }
        }
    }
}

/// Induced volume of the parallelepiped spanned by the frame:
/// `m_E(P[v_1..v_k]) = omega_k / unit_ball_coord_volume`.
pub fn induced_volume_parallelepiped(
    frame: &Frame,
    seed: u64,
    target_rel_err: f64,
    cfg: &McConfig,
) -> Result<VolumeEstimate> {
    let ball = unit_ball_coord_volume(frame, seed, target_rel_err, cfg)?;
    let omega = euclidean_ball_volume(frame.k());
    let value = omega / ball.value;
    // First-order error propagation through the reciprocal.
    let std_error = value * ball.rel_error();
    Ok(VolumeEstimate {
        value,
        std_error: if ball.method == VolumeMethod::MonteCarlo { std_error } else { 0.0 },
        n_samples: ball.n_samples,
        method: ball.method,
        capped: ball.capped,
    })
}

/// Orthogonality defect of a frame: the sum over `i` of the operator
/// norm (on the span, in the ambient norm) of the projection onto
/// `<v_i>` parallel to the remaining basis vectors. Columns are
/// normalized to unit norm first.
pub fn orthogonality_defect(frame: &Frame) -> Result<f64> {
    let frame = frame.normalized()?;
    let k = frame.k();
    if k == 1 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for i in 0..k {
        total += basis_projection_norm(&frame, i);
    }
    Ok(total)
}

/// Operator norm of the projection onto basis vector `i` parallel to the
/// others, within the span (grid + polish lower bound).
pub(crate) fn basis_projection_norm(frame: &Frame, i: usize) -> f64 {
    let vi_norm = frame.space().norm(&frame.column(i));
    let (_, val) = maximize_ratio_over_sphere(frame.k(), SPHERE_GRID, |c| {
        let w = frame.coord_norm(c);
        if w < 1e-300 {
            return 0.0;
        }
        c[i].abs() * vi_norm / w
    });
    val
}

/// Restricted determinant `det(A|E)`: the ratio of induced volumes
/// `m_{AE}(A B_E) / m_E(B_E)`, computed as the ratio of the two
/// coordinate unit-ball volumes with common random numbers across
/// numerator and denominator.
///
/// A rank-deficient image returns `value = 0` with the degeneracy flag
/// set. `k = 1` is exact: `|A v| / |v|`.
pub fn det_restricted(
    map: &LinearMap,
    frame: &Frame,
    seed: u64,
    target_rel_err: f64,
    cfg: &McConfig,
) -> Result<DetResult> {
    let k = frame.k();
    let space = frame.space();
    let mut image_cols = Vec::with_capacity(k);
    for j in 0..k {
        image_cols.push(map.apply(&frame.column(j)));
    }
    let mut image_basis = DMatrix::zeros(frame.ambient_dim(), k);
    for (j, c) in image_cols.iter().enumerate() {
        image_basis.set_column(j, c);
    }
    {
        let svals = image_basis.singular_values();
        if !(svals.min() > RANK_TOL * svals.max().max(1e-300)) {
            return Ok(DetResult {
                value: 0.0,
                log_value: f64::NEG_INFINITY,
                std_error_log: 0.0,
                degenerate: true,
            });
        }
    }
    if k == 1 {
        let num = space.norm(&image_cols[0]);
        let den = space.norm(&frame.column(0));
        let value = num / den;
        return Ok(DetResult {
            value,
            log_value: value.ln(),
            std_error_log: 0.0,
            degenerate: false,
        });
    }
    let image_frame = Frame::new(space.clone(), image_basis)?;
    let dom = EllipsoidSampler::new(frame, cfg)?;
    let img = EllipsoidSampler::new(&image_frame, cfg)?;

    // Coupled batches: identical unit-ball draws feed both ellipsoids so
    // the ratio noise largely cancels.
    let mut acc_d = 0u64;
    let mut acc_i = 0u64;
    let mut acc_both = 0u64;
    let mut total = 0u64;
    let mut batch_idx = 0u64;
    let mut z = DVector::zeros(k);
    loop {
        let mut rng = batch_rng(seed, batch_idx);
        for _ in 0..cfg.batch {
            unit_ball_sample(k, &mut rng, &mut z);
            let cd = dom.point(&z);
            let ci = img.point(&z);
            let in_d = frame.coord_norm(&cd) <= 1.0;
            let in_i = image_frame.coord_norm(&ci) <= 1.0;
            acc_d += in_d as u64;
            acc_i += in_i as u64;
            acc_both += (in_d && in_i) as u64;
        }
        total += cfg.batch;
        batch_idx += 1;
        if batch_idx < cfg.min_batches {
            continue;
        }
        let n = total as f64;
        let pd = acc_d as f64 / n;
        let pi = acc_i as f64 / n;
        if pd.min(pi) < cfg.acceptance_floor {
            return Err(CoreError::Conditioning(format!(
                "acceptance rate below floor (domain {pd:.2e}, image {pi:.2e})"
            )));
        }
        let pboth = acc_both as f64 / n;
        let cov = (pboth - pd * pi) / n;
        let var_log = (pd * (1.0 - pd) / n) / (pd * pd) + (pi * (1.0 - pi) / n) / (pi * pi)
            - 2.0 * cov / (pd * pi);
        let std_error_log = var_log.max(0.0).sqrt();
        // det = (vol_dom_ball) / (vol_img_ball)
        let log_value = (dom.envelope_volume * pd).ln() - (img.envelope_volume * pi).ln();
        if std_error_log <= target_rel_err || total >= cfg.max_samples {
            return Ok(DetResult {
                value: log_value.exp(),
                log_value,
                std_error_log,
                degenerate: false,
            });
        }
    }
}

/// Exact coordinate-ball area for two-dimensional frames by angular
/// quadrature of `r(theta) = 1 / |V (cos theta, sin theta)|`; used as an
/// independent oracle for the Monte Carlo engine.
pub fn coord_ball_area_quadrature(frame: &Frame, n_theta: usize) -> Result<f64> {
    if frame.k() != 2 {
        return Err(CoreError::input("angular quadrature needs k = 2"));
    }
    let n = n_theta.max(16);
    let mut acc = 0.0;
    // Midpoint rule over [0, 2*pi); smooth periodic integrands converge
    // spectrally, kinked ones at second order.
    let h = core::f64::consts::TAU / n as f64;
    let mut c = DVector::zeros(2);
    for j in 0..n {
        let t = (j as f64 + 0.5) * h;
        c[0] = t.cos();
        c[1] = t.sin();
        let r = 1.0 / frame.coord_norm(&c);
        acc += 0.5 * r * r * h;
    }
    Ok(acc)
}

/// Batch summary of a determinant/volume identity check used in the
/// invariant batteries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub combined_sigma: f64,
    pub n_sigma: f64,
    pub pass: bool,
}

impl SigmaCheck {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64, sigma: f64, max_sigma: f64) -> Self {
        let sigma = sigma.max(1e-300);
        let n_sigma = (lhs - rhs).abs() / sigma;
        SigmaCheck { label: label.into(), lhs, rhs, combined_sigma: sigma, n_sigma, pass: n_sigma <= max_sigma }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{NormKind, NormedSpace};
    use approx::assert_relative_eq;

    fn coord_frame(space: NormedSpace, k: usize) -> Frame {
        Frame::coordinate(space, k).unwrap()
    }

    #[test]
    fn euclidean_ball_volumes() {
        assert_relative_eq!(euclidean_ball_volume(1), 2.0);
        assert_relative_eq!(euclidean_ball_volume(2), core::f64::consts::PI);
        assert_relative_eq!(euclidean_ball_volume(3), 4.0 * core::f64::consts::PI / 3.0);
    }

    #[test]
    fn quadrature_oracle_matches_known_areas() {
        // Exact polytope areas: sup square 4, l1 diamond 2, disk pi.
        let sq = coord_ball_area_quadrature(&coord_frame(NormedSpace::sup(2), 2), 1 << 16).unwrap();
        assert_relative_eq!(sq, 4.0, max_relative = 1e-6);
        let di = coord_ball_area_quadrature(
            &coord_frame(NormedSpace::lp(2, 1.0).unwrap(), 2),
            1 << 16,
        )
        .unwrap();
        assert_relative_eq!(di, 2.0, max_relative = 1e-6);
        let ci =
            coord_ball_area_quadrature(&coord_frame(NormedSpace::euclidean(2), 2), 1 << 12).unwrap();
        assert_relative_eq!(ci, core::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn unit_ball_volume_square_diamond_disk() {
        let cfg = McConfig::default();
        for (space, expect) in [
            (NormedSpace::sup(2), 4.0),
            (NormedSpace::lp(2, 1.0).unwrap(), 2.0),
            (NormedSpace::euclidean(2), core::f64::consts::PI),
        ] {
            let f = coord_frame(space, 2);
            let est = unit_ball_coord_volume(&f, 7, 1e-3, &cfg).unwrap();
            assert!(!est.capped);
            let dev = (est.value - expect).abs();
            assert!(
                dev <= 3.0 * est.std_error.max(1e-12),
                "value {} expect {expect} sigma {}",
                est.value,
                est.std_error
            );
        }
    }

    #[test]
    fn unit_ball_volume_k1_exact() {
        let s = NormedSpace::lp(2, 1.0).unwrap();
        let f = Frame::from_columns(s, &[DVector::from_vec(vec![1.0, 2.0])]).unwrap();
        let est = unit_ball_coord_volume(&f, 0, 1e-3, &McConfig::default()).unwrap();
        assert_eq!(est.method, VolumeMethod::Exact1d);
        assert_relative_eq!(est.value, 2.0 / 3.0);
    }

    #[test]
    fn parallelepiped_sup_norm_is_quarter_pi() {
        let f = coord_frame(NormedSpace::sup(2), 2);
        let est = induced_volume_parallelepiped(&f, 11, 1e-3, &McConfig::default()).unwrap();
        let expect = core::f64::consts::PI / 4.0;
        assert!((est.value - expect).abs() <= 3.0 * est.std_error);
    }

    #[test]
    fn parallelepiped_euclidean_is_one() {
        let f = coord_frame(NormedSpace::euclidean(2), 2);
        let est = induced_volume_parallelepiped(&f, 11, 1e-3, &McConfig::default()).unwrap();
        assert!((est.value - 1.0).abs() <= 3.0 * est.std_error.max(1e-9));
    }

    #[test]
    fn parallelepiped_k1_is_length() {
        let s = NormedSpace::sup(2);
        let f = Frame::from_columns(s, &[DVector::from_vec(vec![3.0, 0.0])]).unwrap();
        let est = induced_volume_parallelepiped(&f, 0, 1e-3, &McConfig::default()).unwrap();
        assert_relative_eq!(est.value, 3.0);
    }

    #[test]
    fn orthogonality_defect_examples() {
        // Coordinate projections under the sup norm have norm 1 each.
        let f = coord_frame(NormedSpace::sup(2), 2);
        assert_relative_eq!(orthogonality_defect(&f).unwrap(), 2.0, max_relative = 1e-6);

        // Basis (e1, e1 + e2): projection onto e1 parallel to e1+e2 has
        // norm 2, the other has norm 1.
        let s = NormedSpace::sup(2);
        let f = Frame::from_columns(
            s,
            &[DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])],
        )
        .unwrap();
        assert_relative_eq!(orthogonality_defect(&f).unwrap(), 3.0, max_relative = 1e-6);

        // Euclidean-orthonormal basis under l2: defect k.
        let f = coord_frame(NormedSpace::euclidean(3), 3);
        assert_relative_eq!(orthogonality_defect(&f).unwrap(), 3.0, max_relative = 1e-6);
    }

    #[test]
    fn det_scaling_and_coordinate_cases() {
        let cfg = McConfig::default();
        let f = coord_frame(NormedSpace::sup(2), 2);
        // a * Identity has determinant a^2 on a 2-dim subspace.
        let a = LinearMap::dense(DMatrix::identity(2, 2) * 1.7);
        let d = det_restricted(&a, &f, 3, 1e-3, &cfg).unwrap();
        assert!((d.log_value - 2.0 * 1.7f64.ln()).abs() <= 3.0 * d.std_error_log + 1e-3);

        // diag(2,3) maps E onto itself: determinant 6 under any norm.
        let a = LinearMap::dense(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])));
        let d = det_restricted(&a, &f, 5, 1e-3, &cfg).unwrap();
        assert!(
            (d.log_value - 6.0f64.ln()).abs() <= 3.0 * d.std_error_log + 1e-3,
            "log det {} sigma {}",
            d.log_value,
            d.std_error_log
        );
    }

    #[test]
    fn det_k1_norm_dependence() {
        let cfg = McConfig::default();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = 1.0;
        m[(1, 0)] = 1.0; // e1 -> e1 + e2
        let a = LinearMap::dense(m);
        let f1 = Frame::from_columns(
            NormedSpace::lp(2, 1.0).unwrap(),
            &[DVector::from_vec(vec![1.0, 0.0])],
        )
        .unwrap();
        let d = det_restricted(&a, &f1, 0, 1e-6, &cfg).unwrap();
        assert_relative_eq!(d.value, 2.0);
        let finf = Frame::from_columns(
            NormedSpace::sup(2),
            &[DVector::from_vec(vec![1.0, 0.0])],
        )
        .unwrap();
        let d = det_restricted(&a, &finf, 0, 1e-6, &cfg).unwrap();
        assert_relative_eq!(d.value, 1.0);
    }

    #[test]
    fn det_degenerate_image_returns_zero() {
        let f = coord_frame(NormedSpace::sup(2), 2);
        let a = LinearMap::dense(DMatrix::from_fn(2, 2, |i, _| if i == 0 { 1.0 } else { 0.0 }));
        let d = det_restricted(&a, &f, 0, 1e-3, &McConfig::default()).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn det_is_deterministic_for_seed() {
        let cfg = McConfig::default();
        let f = coord_frame(NormedSpace::sup(2), 2);
        let a = LinearMap::dense(DMatrix::from_column_slice(2, 2, &[1.3, 0.4, -0.2, 0.9]));
        let d1 = det_restricted(&a, &f, 99, 1e-2, &cfg).unwrap();
        let d2 = det_restricted(&a, &f, 99, 1e-2, &cfg).unwrap();
        assert_eq!(d1.log_value.to_bits(), d2.log_value.to_bits());
    }
}
