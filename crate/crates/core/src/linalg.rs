//! Dense Hermitian linear algebra on complex matrices.

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigen-decomposition `a = V diag(λ) V*` of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eigh<T> {
    pub fn new(a: &CMatrix<T>) -> Self {
        let h = hermitian_part(a);
        let se = h.symmetric_eigen();
        let n = se.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).expect("finite"));
        let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    /// `V diag(f(λ)) V*`.
    pub fn apply(&self, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for r in 0..n {
                scaled[(r, c)] *= fl;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

pub fn hermitian_part<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    (a + a.adjoint()).map(|z| z * Complex::new(T::lit(0.5), T::zero()))
}

/// `‖a − a*‖_max`.
pub fn hermitian_defect<T: Real>(a: &CMatrix<T>) -> T {
    crate::scalar::max_abs(&(a - a.adjoint()))
}

pub fn min_eig<T: Real>(a: &CMatrix<T>) -> T {
    Eigh::new(a).min()
}

pub fn max_eig<T: Real>(a: &CMatrix<T>) -> T {
    Eigh::new(a).max()
}

pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    if a.is_empty() {
        return Vec::new();
    }
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Operator norm.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    singular_values(a).into_iter().fold(T::zero(), |m, s| if s > m { s } else { m })
}

/// Schatten `p`-norm `(Σ s_i^p)^{1/p}`; `p = ∞` gives the operator norm.
/// For `0 < p < 1` the same formula is a quasi-norm.
pub fn schatten_norm<T: Real>(a: &CMatrix<T>, p: T) -> T {
    if !crate::scalar::is_finite(p) {
        return spectral_norm(a);
    }
    let s: T = singular_values(a)
        .into_iter()
        .fold(T::zero(), |acc, s| acc + s.powf(p));
    s.powf(T::one() / p)
}

pub fn trace<T: Real>(a: &CMatrix<T>) -> Complex<T> {
    a.trace()
}

/// `a^s` for positive semidefinite `a`, eigenvalues below `floor` treated as zero.
pub fn psd_power<T: Real>(a: &CMatrix<T>, s: T, floor: T) -> CMatrix<T> {
    Eigh::new(a).apply(|l| {
        if l <= floor {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(l.powf(s), T::zero())
        }
    })
}

pub fn sqrt_psd<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    Eigh::new(a).apply(|l| Complex::new(l.max(T::zero()).sqrt(), T::zero()))
}

/// Moore–Penrose inverse square root `a^{−1/2}` on the support of `a ≥ 0`.
pub fn pinv_sqrt<T: Real>(a: &CMatrix<T>, tol: T) -> CMatrix<T> {
    Eigh::new(a).apply(|l| {
        if l <= tol {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::one() / l.sqrt(), T::zero())
        }
    })
}

/// `|a| = (a*a)^{1/2}`.
pub fn abs<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    sqrt_psd(&(a.adjoint() * a))
}

/// Largest `λ` with `a v = λ b v`, for Hermitian `a` and positive definite `b`.
///
/// `b` is diagonally rescaled before the Cholesky factorization, which keeps
/// badly scaled but well-conditioned Gram matrices tractable.
pub fn generalized_max_eig<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    let n = b.nrows();
    let d: Vec<T> = (0..n).map(|i| b[(i, i)].re).collect();
    if d.iter().any(|x| *x <= T::zero()) {
        return Err(Error::Invalid("Gram matrix has a nonpositive diagonal".into()));
    }
    let s = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(T::one() / d[i].sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let bs = hermitian_part(&(&s * b * &s));
    let as_ = hermitian_part(&(&s * a * &s));
    let chol = bs
        .cholesky()
        .ok_or_else(|| Error::Invalid("Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Invalid("singular Cholesky factor".into()))?;
    Ok(max_eig(&(&linv * as_ * linv.adjoint())))
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// Block-diagonal direct sum.
pub fn direct_sum<T: Real>(blocks: &[CMatrix<T>]) -> CMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(gaussian::<T, R>(rng) * h, gaussian::<T, R>(rng) * h)
    })
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    hermitian_part(&random_matrix(rng, n, n))
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let qr = random_matrix::<T, R>(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.modulus();
        let phase = if m > T::zero() { d / Complex::new(m, T::zero()) } else { Complex::new(T::one(), T::zero()) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Faithful density matrix whose smallest eigenvalue is at least `min_eig / n`.
pub fn random_density<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, min_eig: T) -> CMatrix<T> {
    let g = random_matrix::<T, R>(rng, n, n);
    let w = &g * g.adjoint() + identity::<T>(n).map(|z| z * Complex::new(min_eig, T::zero()));
    let t = w.trace();
    hermitian_part(&w.map(|z| z / t))
}

/// Random positive semidefinite matrix of rank at most `rank`.
pub fn random_psd<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix<T> {
    let g = random_matrix::<T, R>(rng, n, rank);
    hermitian_part(&(&g * g.adjoint()))
}

/// Real Gaussian matrix.
pub fn random_real<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian::<T, R>(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn functional_calculus_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_density::<f64, _>(&mut rng, 4, 0.1);
        let r = psd_power(&d, 0.5, 1e-14);
        assert!((&r * &r - &d).norm() < 1e-13);
        let ri = pinv_sqrt(&d, 1e-14);
        assert!((&ri * &d * &ri - identity::<f64>(4)).norm() < 1e-11);
    }

    #[test]
    fn schatten_norms() {
        let a = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(3.0, 0.0),
            Complex::new(0.0, -4.0),
        ]));
        assert!((schatten_norm(&a, 2.0) - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&a, 1.0) - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&a, f64::INFINITY) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary::<f64, _>(&mut rng, 5);
        assert!((u.adjoint() * &u - identity::<f64>(5)).norm() < 1e-13);
    }

    #[test]
    fn generalized_eigenvalue_matches_diagonal_case() {
        let b = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(1e-6, 0.0),
            Complex::new(2.0, 0.0),
        ]));
        let a = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(3e-6, 0.0),
            Complex::new(1.0, 0.0),
        ]));
        assert!((generalized_max_eig(&a, &b).unwrap() - 3.0).abs() < 1e-9);
    }
}
