//! Normalized direct linear transform.

use super::svd::jacobi_svd;
use super::{Correspondence, GeometryError, Homography, Point2};
use crate::scalar::Real;

/// Triangle area (in normalized coordinates) below which three points count
/// as collinear.
const COLLINEAR_EPS: f64 = 1e-8;

/// Ratio of the second-smallest to the largest singular value below which the
/// system has more than one null direction.
const RANK_EPS: f64 = 1e-9;

/// Similarity transform taking a point set to zero mean and mean distance
/// sqrt(2) from the origin.
#[derive(Debug, Clone, Copy)]
struct Normalizer<T> {
    cx: T,
    cy: T,
    s: T,
}

impl<T: Real> Normalizer<T> {
    fn fit(points: impl Iterator<Item = Point2<T>> + Clone) -> Result<Self, GeometryError> {
        let n = T::from_count(points.clone().count());
        let (sx, sy) = points.clone().fold((T::zero(), T::zero()), |(a, b), p| (a + p.x, b + p.y));
        let (cx, cy) = (sx / n, sy / n);
        let mean_dist = points.map(|p| (p.x - cx).hypot(p.y - cy)).sum::<T>() / n;
        if !(mean_dist.as_f64() > f64::EPSILON * 16.0) {
            return Err(GeometryError::DegenerateConfiguration("all points coincide"));
        }
        Ok(Self {
            cx,
            cy,
            s: T::SQRT_2() / mean_dist,
        })
    }

    fn apply(&self, p: Point2<T>) -> Point2<T> {
        Point2::new((p.x - self.cx) * self.s, (p.y - self.cy) * self.s)
    }

    fn matrix(&self) -> [T; 9] {
        let (o, z) = (T::one(), T::zero());
        [self.s, z, -self.s * self.cx, z, self.s, -self.s * self.cy, z, z, o]
    }

    fn inverse_matrix(&self) -> [T; 9] {
        let (o, z) = (T::one(), T::zero());
        let inv = o / self.s;
        [inv, z, self.cx, z, inv, self.cy, z, z, o]
    }
}

fn mat_mul<T: Real>(a: &[T; 9], b: &[T; 9]) -> [T; 9] {
    let mut out = [T::zero(); 9];
    for r in 0..3 {
        for c in 0..3 {
            out[r * 3 + c] = a[r * 3] * b[c] + a[r * 3 + 1] * b[3 + c] + a[r * 3 + 2] * b[6 + c];
        }
    }
    out
}

fn twice_area<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn has_collinear_triple<T: Real>(pts: &[Point2<T>]) -> bool {
    let eps = T::lit(2.0 * COLLINEAR_EPS);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            for k in (j + 1)..pts.len() {
                if twice_area(pts[i], pts[j], pts[k]).abs() <= eps {
                    return true;
                }
            }
        }
    }
    false
}

/// Least-squares homography mapping every `p` onto its `p_prime`.
///
/// Both point sets are Hartley-normalized, the stacked `2n x 9` system is
/// solved for its smallest right singular vector, and the result is mapped
/// back to pixel coordinates.
pub fn estimate_dlt<T: Real>(correspondences: &[Correspondence<T>]) -> Result<Homography<T>, GeometryError> {
    let n = correspondences.len();
    if n < 4 {
        return Err(GeometryError::TooFewCorrespondences(n));
    }
    if correspondences.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::DegenerateConfiguration("non-finite coordinate"));
    }

    let src_norm = Normalizer::fit(correspondences.iter().map(|c| c.p))?;
    let dst_norm = Normalizer::fit(correspondences.iter().map(|c| c.p_prime))?;
    let src: Vec<Point2<T>> = correspondences.iter().map(|c| src_norm.apply(c.p)).collect();
    let dst: Vec<Point2<T>> = correspondences.iter().map(|c| dst_norm.apply(c.p_prime)).collect();

    if n == 4 && (has_collinear_triple(&src) || has_collinear_triple(&dst)) {
        return Err(GeometryError::DegenerateConfiguration("three collinear points in a minimal set"));
    }

    let (z, o) = (T::zero(), T::one());
    let mut a = Vec::with_capacity(2 * n * 9);
    for (s, d) in src.iter().zip(dst.iter()) {
        let (x, y, u, v) = (s.x, s.y, d.x, d.y);
        a.extend_from_slice(&[-x, -y, -o, z, z, z, u * x, u * y, u]);
        a.extend_from_slice(&[z, z, z, -x, -y, -o, v * x, v * y, v]);
    }
    // Padding with a zero row keeps the system at least square; it changes
    // neither the singular vectors nor the null space.
    let mut rows = 2 * n;
    if rows < 9 {
        a.resize(9 * 9, z);
        rows = 9;
    }

    let svd = jacobi_svd::<T, 9>(&a, rows);
    let order = svd.ascending();
    let largest = svd.values[order[8]];
    if largest == T::zero() || (svd.values[order[1]] / largest).as_f64() < RANK_EPS {
        return Err(GeometryError::DegenerateConfiguration("correspondences do not determine a unique homography"));
    }
    let h_norm = svd.vector(order[0]);

    let h = mat_mul(&mat_mul(&dst_norm.inverse_matrix(), &h_norm), &src_norm.matrix());
    Homography::from_row_major(h).map_err(|e| match e {
        GeometryError::Singular { .. } => GeometryError::DegenerateConfiguration("estimated matrix is singular"),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn corr(px: f64, py: f64, qx: f64, qy: f64) -> Correspondence<f64> {
        Correspondence::new(Point2::new(px, py), Point2::new(qx, qy))
    }

    fn unit_square_to(scale: f64) -> Vec<Correspondence<f64>> {
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
            .iter()
            .map(|&(x, y)| corr(x, y, scale * x, scale * y))
            .collect()
    }

    fn projective_h() -> Homography<f64> {
        Homography::from_row_major([0.92, 0.08, 15.0, -0.06, 1.04, -9.0, 1.5e-4, -8e-5, 1.0]).unwrap()
    }

    #[test]
    fn unit_square_identity() {
        let h = estimate_dlt(&unit_square_to(1.0)).unwrap();
        assert!(h.max_abs_diff(&Homography::identity()) < 1e-9);
    }

    #[test]
    fn unit_square_scaling() {
        let h = estimate_dlt(&unit_square_to(2.0)).unwrap();
        let s = h.entry(2, 2);
        // Norm-1 scale of diag(2, 2, 1) is 1/3.
        assert!((s - 1.0 / 3.0).abs() < 1e-9);
        assert!((h.entry(0, 0) - 2.0 * s).abs() < 1e-9);
        assert!((h.entry(1, 1) - 2.0 * s).abs() < 1e-9);
        for (r, c) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
            assert!(h.entry(r, c).abs() < 1e-9);
        }
    }

    #[test]
    fn maps_square_midpoint() {
        let h = estimate_dlt(&unit_square_to(2.0)).unwrap();
        let p = h.apply(Point2::new(0.5, 0.5)).unwrap();
        assert!((p.x - 1.0).abs() < 1e-9 && (p.y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_projective_recovery_from_four_points() {
        let gt = projective_h();
        let pts = [(10.0, 12.0), (600.0, 30.0), (580.0, 450.0), (25.0, 470.0)];
        let c: Vec<_> = pts
            .iter()
            .map(|&(x, y)| Correspondence::new(Point2::new(x, y), gt.apply(Point2::new(x, y)).unwrap()))
            .collect();
        let h = estimate_dlt(&c).unwrap();
        for ci in &c {
            assert!(ci.reprojection_error(&h) <= 1e-6);
        }
        assert!(h.max_abs_diff(&gt) < 1e-9);
    }

    #[test]
    fn noisy_hundred_points_reproject_under_a_pixel() {
        let gt = projective_h();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let c: Vec<_> = (0..100)
            .map(|_| {
                let p = Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
                let q = gt.apply(p).unwrap();
                Correspondence::new(p, Point2::new(q.x + noise.sample(&mut rng), q.y + noise.sample(&mut rng)))
            })
            .collect();
        let h = estimate_dlt(&c).unwrap();
        let mean: f64 = c.iter().map(|ci| ci.reprojection_error(&h)).sum::<f64>() / 100.0;
        assert!(mean < 1.0, "mean reprojection {mean}");
    }

    #[test]
    fn too_few_points() {
        let c = unit_square_to(1.0);
        assert_eq!(estimate_dlt(&c[..3]).unwrap_err(), GeometryError::TooFewCorrespondences(3));
    }

    #[test]
    fn collinear_minimal_set_rejected() {
        let c = vec![corr(0.0, 0.0, 0.0, 0.0), corr(1.0, 1.0, 1.0, 1.0), corr(2.0, 2.0, 2.0, 2.0), corr(0.0, 1.0, 0.0, 1.0)];
        assert!(matches!(estimate_dlt(&c), Err(GeometryError::DegenerateConfiguration(_))));
    }

    #[test]
    fn duplicate_points_rejected() {
        let c = vec![corr(1.0, 1.0, 2.0, 2.0); 6];
        assert!(matches!(estimate_dlt(&c), Err(GeometryError::DegenerateConfiguration(_))));
    }

    #[test]
    fn all_collinear_large_set_rejected() {
        let c: Vec<_> = (0..10).map(|i| corr(i as f64, 2.0 * i as f64, i as f64, 0.5 * i as f64)).collect();
        assert!(matches!(estimate_dlt(&c), Err(GeometryError::DegenerateConfiguration(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let gt: Homography<f32> = projective_h().cast();
        let c: Vec<_> = [(10.0f32, 12.0f32), (600.0, 30.0), (580.0, 450.0), (25.0, 470.0), (300.0, 200.0)]
            .iter()
            .map(|&(x, y)| Correspondence::new(Point2::new(x, y), gt.apply(Point2::new(x, y)).unwrap()))
            .collect();
        let h = estimate_dlt(&c).unwrap();
        for ci in &c {
            assert!(ci.reprojection_error(&h) < 0.05);
        }
    }
}
