use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GeometryError, Point2, PROJECTIVE_EPS};
use crate::scalar::Real;

/// A 3x3 projective transform between two image planes.
///
/// Entries are stored row-major and kept at unit Frobenius norm with
/// `h33 >= 0`, so two homographies describing the same mapping compare
/// equal up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<T> {
    m: [T; 9],
}

impl<T: Real> Homography<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::from_row_major([o, z, z, z, o, z, z, z, o]).expect("identity is invertible")
    }

    pub fn translation(tx: T, ty: T) -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::from_row_major([o, z, tx, z, o, ty, z, z, o]).expect("translation is invertible")
    }

    /// Scale-normalizes `m` and rejects singular matrices.
    pub fn from_row_major(m: [T; 9]) -> Result<Self, GeometryError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::DegenerateConfiguration("non-finite matrix entry"));
        }
        let norm = m.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(GeometryError::Singular { det: 0.0 });
        }
        let mut sign = T::one();
        if m[8] < T::zero() {
            sign = -T::one();
        } else if m[8] == T::zero() {
            // h33 = 0 leaves the sign free; pin it on the first nonzero entry.
            if let Some(first) = m.iter().find(|v| **v != T::zero()) {
                if *first < T::zero() {
                    sign = -T::one();
                }
            }
        }
        // Already-normalized input is kept bit-for-bit so that normalizing is
        // idempotent and serialized matrices round-trip exactly.
        let normalized = sign == T::one() && (norm - T::one()).abs() <= T::epsilon() * T::lit(8.0);
        let mut out = m;
        if !normalized {
            let scale = sign / norm;
            for o in out.iter_mut() {
                *o = *o * scale;
            }
        }
        let h = Self { m: out };
        let det = h.det();
        if det.abs().as_f64() <= PROJECTIVE_EPS {
            return Err(GeometryError::Singular { det: det.as_f64() });
        }
        Ok(h)
    }

    pub fn as_row_major(&self) -> [T; 9] {
        self.m
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> T {
        self.m[row * 3 + col]
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    /// Maps `p` through the homogeneous product and dehomogenizes.
    pub fn apply(&self, p: Point2<T>) -> Result<Point2<T>, GeometryError> {
        let m = &self.m;
        let w = m[6] * p.x + m[7] * p.y + m[8];
        if w.abs().as_f64() <= PROJECTIVE_EPS {
            return Err(GeometryError::DegeneratePoint { depth: w.as_f64() });
        }
        let x = m[0] * p.x + m[1] * p.y + m[2];
        let y = m[3] * p.x + m[4] * p.y + m[5];
        Ok(Point2::new(x / w, y / w))
    }

    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let m = &self.m;
        // Adjugate; the determinant only rescales, which normalization absorbs.
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        let det = self.det();
        if det.abs().as_f64() <= PROJECTIVE_EPS {
            return Err(GeometryError::Singular { det: det.as_f64() });
        }
        let inv_det = T::one() / det;
        Self::from_row_major(adj.map(|v| v * inv_det))
    }

    /// Product `self * rhs` as raw matrices (apply `rhs` first).
    fn mul(&self, rhs: &Self) -> [T; 9] {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [T::zero(); 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = a[r * 3] * b[c] + a[r * 3 + 1] * b[3 + c] + a[r * 3 + 2] * b[6 + c];
            }
        }
        out
    }

    /// The mapping that applies `self` and then `next`.
    pub fn then(&self, next: &Self) -> Result<Self, GeometryError> {
        Self::from_row_major(next.mul(self))
    }

    pub fn cast<U: Real>(&self) -> Homography<U> {
        Homography {
            m: self.m.map(|v| U::lit(v.as_f64())),
        }
    }

    /// Largest absolute entry difference, after both are normalized.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Composite of two adjacent homographies: `a -> b` followed by `b -> c`.
pub fn chain<T: Real>(h_ab: &Homography<T>, h_bc: &Homography<T>) -> Result<Homography<T>, GeometryError> {
    h_ab.then(h_bc)
}

impl<T: Real> Serialize for Homography<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.m.map(|v| v.as_f64()).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Homography<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = <[f64; 9]>::deserialize(d)?;
        Self::from_row_major(raw.map(T::lit)).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn sample_h() -> Homography<f64> {
        Homography::from_row_major([1.1, 0.05, 12.0, -0.03, 0.95, -7.0, 2e-4, -1e-4, 1.0]).unwrap()
    }

    #[test]
    fn identity_maps_points_to_themselves() {
        let p = Homography::<f64>::identity().apply(pt(10.0, 20.0)).unwrap();
        assert!((p.x - 10.0).abs() < 1e-12 && (p.y - 20.0).abs() < 1e-12);
    }

    #[test]
    fn translation_shifts_origin() {
        let p = Homography::translation(5.0, -3.0).apply(pt(0.0, 0.0)).unwrap();
        assert!((p.x - 5.0).abs() < 1e-12 && (p.y + 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_fixes_scale_and_sign() {
        let h = Homography::from_row_major([-2.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, -2.0]).unwrap();
        let norm: f64 = h.as_row_major().iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(h.entry(2, 2) > 0.0);
        assert!(h.max_abs_diff(&Homography::identity()) < 1e-15);
    }

    #[test]
    fn singular_matrix_rejected() {
        let err = Homography::from_row_major([1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, GeometryError::Singular { .. }));
    }

    #[test]
    fn point_at_infinity_is_degenerate() {
        // w' = x - 1 vanishes at x = 1.
        let h = Homography::from_row_major([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0]).unwrap();
        assert!(matches!(h.apply(pt(1.0, 4.0)), Err(GeometryError::DegeneratePoint { .. })));
    }

    #[test]
    fn inverse_round_trips_points() {
        let h = sample_h();
        let inv = h.inverse().unwrap();
        for &(x, y) in &[(0.0, 0.0), (100.0, 40.0), (-30.0, 250.0), (640.0, 480.0)] {
            let back = h.apply(inv.apply(pt(x, y)).unwrap()).unwrap();
            assert!(back.distance(&pt(x, y)) < 1e-6);
        }
    }

    #[test]
    fn chain_with_inverse_is_identity() {
        let h = sample_h();
        let id = chain(&h, &h.inverse().unwrap()).unwrap();
        assert!(id.max_abs_diff(&Homography::identity()) < 1e-8);
    }

    #[test]
    fn chain_with_identity_is_neutral() {
        let h = sample_h();
        let c = chain(&Homography::identity(), &h).unwrap();
        assert!(c.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn serde_round_trip_is_row_major() {
        let h = Homography::<f64>::translation(3.0, 4.0);
        let json = serde_json::to_string(&h).unwrap();
        let back: Homography<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(h, back);
        let raw: [f64; 9] = serde_json::from_str(&json).unwrap();
        assert!(raw[2] > 0.0 && raw[5] > 0.0);
    }

    #[test]
    fn f32_homography_round_trips() {
        let h: Homography<f32> = sample_h().cast();
        let inv = h.inverse().unwrap();
        let p = Point2::new(123.0f32, 77.0);
        let back = h.apply(inv.apply(p).unwrap()).unwrap();
        assert!(back.distance(&p) < 1e-3);
    }
}
