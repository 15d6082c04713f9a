//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Natural log of the determinant of a Hermitian positive definite matrix.
pub fn ln_det_hpd(m: &DMatrix<C64>) -> Option<f64> {
    let chol = hermitian_part(m).cholesky()?;
    let l = chol.l_dirty();
    Some(2.0 * (0..l.nrows()).map(|k| l[(k, k)].re.ln()).sum::<f64>())
}

/// Rotates `v` so that its largest-magnitude entry (first one on ties) is
/// real and positive.
pub fn fix_phase(v: &mut DVector<C64>) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (k, x) in v.iter().enumerate() {
        let mag = x.norm();
        if mag > best_mag {
            best_mag = mag;
            best = k;
        }
    }
    if best_mag > 0.0 {
        let rot = v[best].conj() / best_mag;
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

/// Singular triplets sorted by decreasing singular value.
pub struct SortedSvd {
    /// `m x k` left singular vectors, `k = min(m, n)`.
    pub u: DMatrix<C64>,
    pub singular_values: Vec<f64>,
}

/// Thin SVD of `h` returning the left singular vectors in decreasing order.
pub fn sorted_left_svd(h: &DMatrix<C64>) -> SortedSvd {
    let (m, n) = h.shape();
    let k = m.min(n);
    if k == 0 {
        return SortedSvd {
            u: DMatrix::zeros(m, 0),
            singular_values: Vec::new(),
        };
    }
    let svd = h.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let mut order: Vec<usize> = (0..k).collect();
    // stable: ties keep the factorization's order
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let cols: Vec<DVector<C64>> = order.iter().map(|&c| u.column(c).into_owned()).collect();
    SortedSvd {
        u: DMatrix::from_columns(&cols),
        singular_values: order.iter().map(|&c| svd.singular_values[c]).collect(),
    }
}

/// Numerical rank threshold for a spectrum with largest value `s_max`.
pub fn rank_tolerance(shape: (usize, usize), s_max: f64) -> f64 {
    shape.0.max(shape.1) as f64 * f64::EPSILON * s_max
}

/// Extends the orthonormal columns in `basis` to `target` columns using the
/// standard basis vectors `e_0, e_1, ...` in order (classical Gram-Schmidt,
/// applied twice).
pub fn complete_orthonormal(basis: Vec<DVector<C64>>, dim: usize, target: usize) -> Vec<DVector<C64>> {
    let mut cols = basis;
    for e in 0..dim {
        if cols.len() >= target {
            break;
        }
        let mut v = DVector::<C64>::zeros(dim);
        v[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    cols
}
