//! Null-space extraction for the small, tall design matrices built by the DLT.

use crate::scalar::Real;

const MAX_SWEEPS: usize = 60;

/// Result of a one-sided Jacobi SVD of an `m x N` matrix: singular values
/// (unsorted) and the right singular vectors as columns of `v`.
pub(crate) struct RightSingular<T, const N: usize> {
    pub values: [T; N],
    pub v: [[T; N]; N],
}

impl<T: Real, const N: usize> RightSingular<T, N> {
    /// Indices of the singular values in ascending order.
    pub fn ascending(&self) -> [usize; N] {
        let mut order = [0usize; N];
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
        order.sort_by(|&a, &b| {
            self.values[a]
                .partial_cmp(&self.values[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order
    }

    pub fn vector(&self, col: usize) -> [T; N] {
        let mut out = [T::zero(); N];
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.v[r][col];
        }
        out
    }
}

/// Hestenes one-sided Jacobi: orthogonalizes the columns of `a` (row-major,
/// `rows x N`) by plane rotations accumulated into `V`. Column norms of the
/// rotated matrix are the singular values.
pub(crate) fn jacobi_svd<T: Real, const N: usize>(a: &[T], rows: usize) -> RightSingular<T, N> {
    debug_assert_eq!(a.len(), rows * N);
    let mut cols: Vec<[T; N]> = a
        .chunks_exact(N)
        .map(|r| {
            let mut row = [T::zero(); N];
            row.copy_from_slice(r);
            row
        })
        .collect();
    let mut v = [[T::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..N {
            for q in (p + 1)..N {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for row in &cols {
                    alpha = alpha + row[p] * row[p];
                    beta = beta + row[q] * row[q];
                    gamma = gamma + row[p] * row[q];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for row in cols.iter_mut() {
                    let (ap, aq) = (row[p], row[q]);
                    row[p] = c * ap - s * aq;
                    row[q] = s * ap + c * aq;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values = [T::zero(); N];
    for (j, val) in values.iter_mut().enumerate() {
        *val = cols.iter().map(|r| r[j] * r[j]).sum::<T>().sqrt();
    }
    RightSingular { values, v }
}
