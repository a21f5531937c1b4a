//! Binary object masks and the measures used to compare them.

mod rle;
mod shape_context;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{PixelPoint, Point2};
use crate::scalar::Real;

pub use rle::RleMask;
pub use shape_context::{shape_context_distance, ShapeContextConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaskError {
    #[error("mask dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("mask is empty")]
    EmptyMask,
    #[error("bit count {got} does not match {width}x{height}")]
    BadLength { width: u32, height: u32, got: usize },
    #[error("invalid shape context configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid run-length encoding: {0}")]
    InvalidRle(String),
}

/// Per-pixel membership map; `true` marks a pixel of the object to remove.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("area", &self.area())
            .finish()
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, MaskError> {
        if bits.len() != width as usize * height as usize {
            return Err(MaskError::BadLength {
                width,
                height,
                got: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    /// Axis-aligned filled rectangle covering `[x0, x1) x [y0, y1)`.
    pub fn rect(width: u32, height: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self::from_fn(width, height, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1)
    }

    /// Filled disk of pixels whose centers lie within `radius` of `(cx, cy)`.
    pub fn disk(width: u32, height: u32, cx: f64, cy: f64, radius: f64) -> Self {
        Self::from_fn(width, height, |x, y| {
            let (dx, dy) = (f64::from(x) - cx, f64::from(y) - cy);
            dx * dx + dy * dy <= radius * radius
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Panics when `(x, y)` is out of bounds.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.bits[self.index(x, y)]
    }

    /// Membership with out-of-frame coordinates reading as unset.
    #[inline]
    pub fn get_or_false(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < i64::from(self.width)
            && y < i64::from(self.height)
            && self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        let i = self.index(x, y);
        self.bits[i] = value;
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Set pixels in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = PixelPoint> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| PixelPoint::new((i % w) as u32, (i / w) as u32))
    }

    fn check_dims(&self, other: &Self) -> Result<(), MaskError> {
        if self.dimensions() != other.dimensions() {
            return Err(MaskError::DimensionMismatch {
                a: self.dimensions(),
                b: other.dimensions(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self, MaskError> {
        self.check_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self, MaskError> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, MaskError> {
        self.zip_with(other, |a, b| a && b)
    }

    /// Pixels of `self` not in `other`.
    pub fn difference(&self, other: &Self) -> Result<Self, MaskError> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn union_in_place(&mut self, other: &Self) -> Result<(), MaskError> {
        self.check_dims(other)?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    /// Union of a list of equally sized masks; empty `width x height` when the
    /// list is empty.
    pub fn union_all<'a>(width: u32, height: u32, masks: impl IntoIterator<Item = &'a Self>) -> Result<Self, MaskError> {
        let mut out = Self::new(width, height);
        for m in masks {
            out.union_in_place(m)?;
        }
        Ok(out)
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool, MaskError> {
        self.check_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b))
    }

    pub fn overlaps(&self, other: &Self) -> Result<bool, MaskError> {
        self.check_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).any(|(a, b)| *a && *b))
    }

    /// Shifts content by an integer offset; pixels shifted out are dropped.
    pub fn translate(&self, dx: i64, dy: i64) -> Self {
        Self::from_fn(self.width, self.height, |x, y| {
            self.get_or_false(i64::from(x) - dx, i64::from(y) - dy)
        })
    }

    /// Morphological dilation by a disk of integer `radius`.
    pub fn dilate(&self, radius: u32) -> Self {
        let r = i64::from(radius);
        let offsets: Vec<(i64, i64)> = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|(dx, dy)| dx * dx + dy * dy <= r * r)
            .collect();
        let mut out = Self::new(self.width, self.height);
        for p in self.iter_set() {
            for (dx, dy) in &offsets {
                let (x, y) = (i64::from(p.x) + dx, i64::from(p.y) + dy);
                if x >= 0 && y >= 0 && x < i64::from(self.width) && y < i64::from(self.height) {
                    out.set(x as u32, y as u32, true);
                }
            }
        }
        out
    }

    /// Set pixels with at least one unset 4-neighbor; the frame outside the
    /// image counts as unset.
    pub fn boundary_pixels(&self) -> Vec<PixelPoint> {
        self.iter_set()
            .filter(|p| {
                let (x, y) = (i64::from(p.x), i64::from(p.y));
                !self.get_or_false(x - 1, y)
                    || !self.get_or_false(x + 1, y)
                    || !self.get_or_false(x, y - 1)
                    || !self.get_or_false(x, y + 1)
            })
            .collect()
    }
}

/// Intersection over union; two empty masks score 1.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64, MaskError> {
    a.check_dims(b)?;
    let (mut inter, mut uni) = (0usize, 0usize);
    for (x, y) in a.bits.iter().zip(&b.bits) {
        inter += usize::from(*x && *y);
        uni += usize::from(*x || *y);
    }
    if uni == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / uni as f64)
}

/// Mean coordinate of the set pixels.
pub fn centroid<T: Real>(m: &BinaryMask) -> Result<Point2<T>, MaskError> {
    let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
    for p in m.iter_set() {
        sx += u64::from(p.x);
        sy += u64::from(p.y);
        n += 1;
    }
    if n == 0 {
        return Err(MaskError::EmptyMask);
    }
    let n = n as f64;
    Ok(Point2::new(T::lit(sx as f64 / n), T::lit(sy as f64 / n)))
}

/// Up to `n` boundary pixels drawn uniformly without replacement, returned in
/// raster order. All boundary pixels are returned when there are at most `n`.
pub fn boundary_points(m: &BinaryMask, n: usize, seed: u64) -> Result<Vec<PixelPoint>, MaskError> {
    let boundary = m.boundary_pixels();
    if boundary.is_empty() {
        return Err(MaskError::EmptyMask);
    }
    if boundary.len() <= n {
        return Ok(boundary);
    }
    // Systematic sampling with a seeded random start over the boundary
    // ordered by angle around the centroid: every boundary pixel has the same
    // inclusion probability, and the picks are spread evenly along the contour.
    let c = centroid::<f64>(m)?;
    let mut order: Vec<(f64, usize)> = boundary
        .iter()
        .enumerate()
        .map(|(i, p)| ((f64::from(p.y) - c.y).atan2(f64::from(p.x) - c.x), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let step = boundary.len() as f64 / n as f64;
    let start = ChaCha8Rng::seed_from_u64(seed).random_range(0.0..step);
    let mut picked: Vec<usize> = (0..n)
        .map(|k| order[((start + k as f64 * step) as usize).min(boundary.len() - 1)].1)
        .collect();
    picked.sort_unstable();
    picked.dedup();
    Ok(picked.into_iter().map(|i| boundary[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn iou_identity_and_disjoint() {
        let a = BinaryMask::rect(50, 50, 5, 5, 20, 20);
        let b = BinaryMask::rect(50, 50, 30, 30, 40, 40);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn iou_of_half_shifted_square() {
        // Enumeration: |A n B| = 5*10, |A u B| = 15*10.
        let a = BinaryMask::rect(40, 40, 10, 10, 20, 20);
        let b = a.translate(5, 0);
        let (inter, uni) = (a.intersection(&b).unwrap().area(), a.union(&b).unwrap().area());
        assert_eq!((inter, uni), (50, 150));
        assert!((iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iou_of_empty_masks_is_one() {
        let e = BinaryMask::new(8, 8);
        assert_eq!(iou(&e, &e).unwrap(), 1.0);
    }

    #[test]
    fn iou_dimension_mismatch() {
        assert!(matches!(
            iou(&BinaryMask::new(4, 4), &BinaryMask::new(4, 5)),
            Err(MaskError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn centroid_of_rectangle_and_singleton() {
        let r = BinaryMask::rect(64, 64, 10, 30, 20, 40);
        let c: Point2<f64> = centroid(&r).unwrap();
        assert_eq!((c.x, c.y), (14.5, 34.5));
        let mut s = BinaryMask::new(16, 16);
        s.set(7, 9, true);
        let c: Point2<f32> = centroid(&s).unwrap();
        assert_eq!((c.x, c.y), (7.0, 9.0));
        assert_eq!(centroid::<f64>(&BinaryMask::new(3, 3)), Err(MaskError::EmptyMask));
    }

    #[test]
    fn centroid_of_two_squares_is_midpoint() {
        let a = BinaryMask::rect(100, 100, 5, 5, 15, 15);
        let b = BinaryMask::rect(100, 100, 60, 70, 70, 80);
        let u = a.union(&b).unwrap();
        // Enumeration oracle over the union.
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in 0..100 {
            for x in 0..100 {
                if u.get(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1.0;
                }
            }
        }
        let ca: Point2<f64> = centroid(&a).unwrap();
        let cb: Point2<f64> = centroid(&b).unwrap();
        let cu: Point2<f64> = centroid(&u).unwrap();
        assert_eq!((cu.x, cu.y), (sx / n, sy / n));
        assert_eq!((cu.x, cu.y), ((ca.x + cb.x) / 2.0, (ca.y + cb.y) / 2.0));
    }

    #[test]
    fn boundary_of_three_by_three() {
        let m = BinaryMask::rect(10, 10, 2, 2, 5, 5);
        let b = m.boundary_pixels();
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&PixelPoint::new(3, 3)));
    }

    #[test]
    fn boundary_of_full_frame_is_border() {
        let m = BinaryMask::full(6, 5);
        let b = m.boundary_pixels();
        assert_eq!(b.len(), 2 * 6 + 2 * 3);
        assert!(b.iter().all(|p| p.x == 0 || p.y == 0 || p.x == 5 || p.y == 4));
    }

    #[test]
    fn boundary_sampling_is_bounded_and_deterministic() {
        let m = BinaryMask::disk(128, 128, 64.0, 64.0, 40.0);
        let a = boundary_points(&m, 50, 3).unwrap();
        let b = boundary_points(&m, 50, 3).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        let all = boundary_points(&m, 100_000, 3).unwrap();
        assert_eq!(all, m.boundary_pixels());
        assert_eq!(boundary_points(&BinaryMask::new(4, 4), 8, 0), Err(MaskError::EmptyMask));
    }

    #[test]
    fn dilate_grows_disk() {
        let m = BinaryMask::disk(64, 64, 32.0, 32.0, 10.0);
        let d = m.dilate(3);
        assert!(m.is_subset_of(&d).unwrap());
        let expected = BinaryMask::disk(64, 64, 32.0, 32.0, 13.0);
        assert!(iou(&d, &expected).unwrap() > 0.95);
    }

    fn blob_strategy() -> impl Strategy<Value = BinaryMask> {
        (8u32..56, 8u32..56, 3.0f64..14.0, 8u32..56, 8u32..56, 2.0f64..10.0).prop_map(|(x1, y1, r1, x2, y2, r2)| {
            let a = BinaryMask::disk(64, 64, x1 as f64, y1 as f64, r1);
            let b = BinaryMask::disk(64, 64, x2 as f64, y2 as f64, r2);
            a.union(&b).unwrap()
        })
    }

    proptest! {
        #[test]
        fn iou_is_symmetric(a in blob_strategy(), b in blob_strategy()) {
            prop_assert_eq!(iou(&a, &b).unwrap(), iou(&b, &a).unwrap());
            prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
        }

        #[test]
        fn iou_monotone_under_nesting(a in blob_strategy(), extra in blob_strategy(), more in blob_strategy()) {
            let b = a.union(&extra).unwrap();
            let c = b.union(&more).unwrap();
            prop_assert!(iou(&a, &c).unwrap() <= iou(&b, &c).unwrap() + 1e-15);
        }

        #[test]
        fn sampled_boundary_points_touch_outside(m in blob_strategy(), seed in any::<u64>()) {
            for p in boundary_points(&m, 40, seed).unwrap() {
                let (x, y) = (i64::from(p.x), i64::from(p.y));
                prop_assert!(m.get(p.x, p.y));
                prop_assert!(!m.get_or_false(x - 1, y) || !m.get_or_false(x + 1, y)
                    || !m.get_or_false(x, y - 1) || !m.get_or_false(x, y + 1));
            }
        }
    }
}
