//! Dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const MAX_SWEEPS: usize = 10_000;

/// Maximum entry of `|A − A*|`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Maximum entry magnitude.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Ascending spectrum and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
    /// `max_i ‖Aψ_i − λ_i ψ_i‖`.
    pub residual: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |⟨ψ_i, ψ_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.adjoint() * &self.eigenvectors;
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Hermitian eigendecomposition with a fixed phase convention: the
/// largest-magnitude component of each eigenvector is real positive, ties
/// going to the lowest index.
pub fn hermitian_eigen(a: &CMatrix) -> Result<EigenSystem> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidInput(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure { residual: f64::INFINITY, node: None })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in v.iter().enumerate() {
            if z.norm() > best {
                best = z.norm();
                pivot = i;
            }
        }
        let phase = if best > 0.0 { v[pivot].conj() / best } else { Complex64::new(1.0, 0.0) };
        let mut target = vectors.column_mut(col);
        target.copy_from(&v);
        target *= phase;
        target[pivot] = Complex64::new(best, 0.0);
    }

    let mut residual = 0.0f64;
    for (col, &lambda) in eigenvalues.iter().enumerate() {
        let v = vectors.column(col);
        residual = residual.max((a * v - v * Complex64::from(lambda)).norm());
    }
    let scale = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if residual > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ConvergenceFailure { residual, node: None });
    }
    Ok(EigenSystem { eigenvalues, eigenvectors: vectors, residual })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Determinant held as `phase · exp(ln_abs)` so that huge or tiny values survive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub ln_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> Complex64 {
        self.phase * self.ln_abs.exp()
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }
}

/// Determinant by LU with partial pivoting.
pub fn log_det(a: &CMatrix) -> LogDet {
    let n = a.nrows();
    if n == 0 {
        return LogDet { ln_abs: 0.0, phase: Complex64::new(1.0, 0.0) };
    }
    let lu = a.clone().lu();
    let mut phase = Complex64::new(lu.p().determinant::<f64>(), 0.0);
    let mut ln_abs = 0.0;
    let u = lu.u();
    for i in 0..n {
        let d = u[(i, i)];
        let r = d.norm();
        if r == 0.0 {
            return LogDet { ln_abs: f64::NEG_INFINITY, phase: Complex64::new(0.0, 0.0) };
        }
        ln_abs += r.ln();
        phase *= d / r;
    }
    LogDet { ln_abs, phase }
}

/// In-place diagonal similarity `D⁻¹ A D` equalizing row and column 2-norms
/// (Parlett–Reinsch with radix 2, so the scaling is exact).
pub fn balance(a: &mut CMatrix) {
    let n = a.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm_sqr();
                    r += a[(i, j)].norm_sqr();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let (mut c, mut r) = (c.sqrt(), r.sqrt());
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if c + r < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(j, i)] *= f;
                    a[(i, j)] /= f;
                }
            }
        }
    }
}

/// Eigenvalues of a general complex matrix from the diagonal of its Schur form.
pub fn complex_eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure { residual: f64::INFINITY, node: None })?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// `A*A − AA*` measured entrywise, relative to `max|A_ij|²`.
pub fn normality_defect(a: &CMatrix) -> f64 {
    let m = max_abs(a);
    if m == 0.0 {
        return 0.0;
    }
    let ah = a.adjoint();
    let c = &ah * a - a * &ah;
    max_abs(&c) / (m * m)
}

pub fn to_dvector(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = rng.gen_range(-1.0..1.0).into();
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        a
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![3.0.into(), 1.0.into(), 2.0.into()]));
        let es = hermitian_eigen(&a).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(es.eigenvectors[(1, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn random_hermitian_is_diagonalized() {
        let a = random_hermitian(12, 4);
        let es = hermitian_eigen(&a).unwrap();
        assert!(es.residual < 1e-12);
        assert!(es.orthonormality_defect() < 1e-12);
        assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for col in 0..12 {
            let v = es.eigenvectors.column(col);
            let (imax, _) = v.iter().enumerate().fold((0, -1.0), |(bi, bm), (i, z)| {
                if z.norm() > bm { (i, z.norm()) } else { (bi, bm) }
            });
            assert_eq!(v[imax].im, 0.0);
            assert!(v[imax].re > 0.0);
        }
        let again = hermitian_eigen(&a).unwrap();
        assert_eq!(es.eigenvalues, again.eigenvalues);
        assert_eq!(es.eigenvectors, again.eigenvectors);
    }

    #[test]
    fn log_det_matches_product_of_eigenvalues() {
        let a = random_hermitian(7, 2);
        let es = hermitian_eigen(&a).unwrap();
        let prod: f64 = es.eigenvalues.iter().product();
        let ld = log_det(&a);
        assert!((ld.value().re - prod).abs() < 1e-12 * prod.abs().max(1.0));
        assert!(ld.value().im.abs() < 1e-12);
        let singular = CMatrix::from_element(3, 3, Complex64::new(1.0, 2.0));
        assert!(log_det(&singular).ln_abs < -20.0);
    }

    #[test]
    fn log_det_survives_overflow() {
        let n = 40;
        let a = CMatrix::from_diagonal_element(n, n, Complex64::new(0.0, 1e20));
        let ld = log_det(&a);
        assert!((ld.log10_abs() - 800.0).abs() < 1e-9);
        // i^40 = 1
        assert!((ld.phase - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn schur_eigenvalues_of_triangular() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 0)] = Complex64::new(1.0, 1.0);
        a[(1, 1)] = Complex64::new(-2.0, 0.0);
        a[(2, 2)] = Complex64::new(0.0, 3.0);
        a[(0, 2)] = Complex64::new(5.0, 0.0);
        let mut ev = complex_eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((ev[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 3.0)).norm() < 1e-12);
        assert!((ev[2] - Complex64::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn balancing_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 6;
        let mut a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] *= 10f64.powi(i as i32 - j as i32);
            }
        }
        let before = log_det(&a);
        let mut b = a.clone();
        balance(&mut b);
        let after = log_det(&b);
        assert!((before.ln_abs - after.ln_abs).abs() < 1e-10);
        assert!(max_abs(&b) < max_abs(&a));
    }

    #[test]
    fn hermitian_matrices_are_normal() {
        let a = random_hermitian(5, 1);
        assert!(normality_defect(&a) < 1e-14);
        assert_eq!(hermiticity_defect(&a), 0.0);
    }
}
