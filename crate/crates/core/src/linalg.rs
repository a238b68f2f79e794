//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};

use crate::scalar::{cr, CMatrix, Real, C};

pub fn identity<R: Real>(n: usize) -> CMatrix<R> {
    DMatrix::identity(n, n)
}

pub fn zeros<R: Real>(rows: usize, cols: usize) -> CMatrix<R> {
    DMatrix::zeros(rows, cols)
}

/// Matrix unit `|row⟩⟨col|` in dimension `n`.
pub fn ket_bra<R: Real>(n: usize, row: usize, col: usize) -> CMatrix<R> {
    let mut m = zeros(n, n);
    m[(row, col)] = cr(R::one());
    m
}

pub fn commutator<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    a * b - b * a
}

pub fn anti_hermitian_part<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    (m - m.adjoint()) * cr(R::lit(0.5))
}

pub fn hermitian_part<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    (m + m.adjoint()) * cr(R::lit(0.5))
}

pub fn max_abs_entry<R: Real>(m: &CMatrix<R>) -> R {
    m.iter().fold(R::zero(), |acc, z| acc.max(z.modulus()))
}

/// Largest entry of `|m − m†|`.
pub fn hermitian_defect<R: Real>(m: &CMatrix<R>) -> R {
    max_abs_entry(&(m - m.adjoint()))
}

/// Largest entry of `|m + m†|`.
pub fn anti_hermitian_defect<R: Real>(m: &CMatrix<R>) -> R {
    max_abs_entry(&(m + m.adjoint()))
}

/// Frobenius norm of `u†u − 1`; works for isometries (tall `u`) as well.
pub fn unitarity_defect<R: Real>(u: &CMatrix<R>) -> R {
    let g = u.adjoint() * u;
    (g - identity::<R>(u.ncols())).norm()
}

pub fn singular_values<R: Real>(m: &CMatrix<R>) -> Vec<R> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Operator 2-norm.
pub fn spectral_norm<R: Real>(m: &CMatrix<R>) -> R {
    if m.is_empty() {
        return R::zero();
    }
    singular_values(m)
        .into_iter()
        .fold(R::zero(), |acc, s| acc.max(s))
}

/// Unitary factor of the polar decomposition `m = W·P` together with the
/// smallest singular value of `m`. For a tall `m` the factor is an isometry.
pub fn polar_unitary<R: Real>(m: &CMatrix<R>) -> (CMatrix<R>, R) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .reduce(|acc, s| acc.min(s))
        .unwrap_or_else(R::zero);
    (u * v_t, smin)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<R: Real>(h: &CMatrix<R>) -> (Vec<R>, CMatrix<R>) {
    let n = h.nrows();
    // Symmetrize first: the solver only reads one triangle.
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `exp(m)` for a general complex square matrix (Padé, via nalgebra).
pub fn expm<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    m.exp()
}

/// Trace inner product `Re tr(a† b)`, the real Euclidean structure on
/// anti-Hermitian matrices.
pub fn real_inner<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> R {
    a.iter()
        .zip(b.iter())
        .fold(R::zero(), |acc, (x, y)| acc + (x.conj() * y).re)
}

/// Flattens a complex matrix into its real coordinates (re, im per entry).
pub fn to_real_coords<R: Real>(m: &CMatrix<R>) -> Vec<R> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Row-major `(re, im)` pairs, the interchange layout for matrices.
pub fn to_pairs<R: Real>(m: &CMatrix<R>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re.as_f64(), z.im.as_f64()]);
        }
    }
    out
}

/// Inverse of [`to_pairs`] for a `rows × cols` matrix.
pub fn from_pairs<R: Real>(rows: usize, cols: usize, pairs: &[[f64; 2]]) -> Option<CMatrix<R>> {
    if pairs.len() != rows * cols {
        return None;
    }
    Some(DMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = pairs[i * cols + j];
        C::new(R::lit(re), R::lit(im))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cf;

    #[test]
    fn polar_of_scaled_unitary_recovers_it() {
        let u: CMatrix<f64> = DMatrix::from_row_slice(
            2,
            2,
            &[cf(0.0, 1.0), cf(0.0, 0.0), cf(0.0, 0.0), cf(-1.0, 0.0)],
        );
        let p: CMatrix<f64> =
            DMatrix::from_row_slice(2, 2, &[cf(2.0, 0.0), cf(0.5, 0.1), cf(0.5, -0.1), cf(1.0, 0.0)]);
        let (w, smin) = polar_unitary(&(&u * &p));
        assert!((w - u).norm() < 1e-12);
        assert!(smin > 0.5);
    }

    #[test]
    fn eigen_is_sorted_ascending() {
        let h: CMatrix<f64> = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cf(2.0, 0.0),
            cf(-1.0, 0.0),
            cf(0.5, 0.0),
        ]));
        let (vals, vecs) = hermitian_eigen(&h);
        assert_eq!(vals, vec![-1.0, 0.5, 2.0]);
        assert!(unitarity_defect(&vecs) < 1e-12);
    }

    #[test]
    fn pairs_round_trip() {
        let m: CMatrix<f64> =
            DMatrix::from_row_slice(2, 3, &[cf(1.0, 2.0), cf(3.0, 4.0), cf(5.0, 6.0), cf(7.0, 8.0), cf(9.0, 0.0), cf(0.0, 1.0)]);
        let p = to_pairs(&m);
        assert_eq!(p[1], [3.0, 4.0]);
        assert_eq!(from_pairs::<f64>(2, 3, &p).unwrap(), m);
    }
}
