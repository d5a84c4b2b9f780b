//! Noncommutative `L_p` on a matrix algebra with a faithful state.
//!
//! The state is `φ(x) = Tr(D x)` for a density `D ≻ 0`, and `L_p` elements are
//! represented by their carrier matrices: `κ^(z)_p(a) = D^{(1−z)/2p} a D^{(1+z)/2p}`.

use crate::error::{Error, Result};
use crate::linalg::{self, Eigh};
use crate::scalar::{max_abs, CMatrix, Real};
use nalgebra::ComplexField;
use num_complex::Complex;
use serde_json::Value;

/// Eigenvalues of `D` at or below this are treated as zero.
pub const EIG_FLOOR: f64 = 1e-13;

/// An exponent in `[1/2, ∞]`. Below 1 the Schatten functional is only a quasi-norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> Exponent<T> {
    pub fn new(p: T) -> Result<Self> {
        if !crate::scalar::is_finite(p) && p > T::zero() {
            return Ok(Exponent::Infinity);
        }
        if !(p >= T::lit(0.5)) {
            return Err(Error::Invalid(format!("exponent {p} is below 1/2")));
        }
        Ok(Exponent::Finite(p))
    }

    /// `1/p`, zero at infinity.
    pub fn inv(self) -> T {
        match self {
            Exponent::Finite(p) => T::one() / p,
            Exponent::Infinity => T::zero(),
        }
    }

    pub fn from_inv(s: T) -> Result<Self> {
        if s == T::zero() {
            Ok(Exponent::Infinity)
        } else {
            Self::new(T::one() / s)
        }
    }

    pub fn value(self) -> Option<T> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }
}

/// Carrier of an `L_p` element together with the embedding that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct LpVector<T: Real> {
    pub carrier: CMatrix<T>,
    pub p: Exponent<T>,
    pub z: T,
}

impl<T: Real> LpVector<T> {
    pub fn norm(&self) -> T {
        match self.p {
            Exponent::Infinity => linalg::spectral_norm(&self.carrier),
            Exponent::Finite(p) => linalg::schatten_norm(&self.carrier, p),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            carrier: self.carrier.adjoint(),
            p: self.p,
            z: -self.z,
        }
    }
}

/// Both sides of a Hölder inequality `‖ac‖_r ≤ ‖a‖_p ‖c‖_q`.
#[derive(Clone, Copy, Debug)]
pub struct HolderReport<T> {
    pub r: Exponent<T>,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> HolderReport<T> {
    pub fn holds(&self, slack: T) -> bool {
        self.lhs <= self.rhs + slack
    }
}

/// `‖ac‖_r` against `‖a‖_p ‖c‖_q` with `1/r = 1/p + 1/q`; requires `r ≥ 1`.
pub fn holder_check<T: Real>(a: &LpVector<T>, c: &LpVector<T>) -> Result<HolderReport<T>> {
    let s = a.p.inv() + c.p.inv();
    if s > T::one() + T::eps() {
        return Err(Error::Invalid(format!(
            "1/p + 1/q = {s} exceeds 1; no r ≥ 1 pairs these exponents"
        )));
    }
    let r = Exponent::from_inv(s.min(T::one()))?;
    let prod = LpVector {
        carrier: &a.carrier * &c.carrier,
        p: r,
        z: T::zero(),
    };
    Ok(HolderReport {
        r,
        lhs: prod.norm(),
        rhs: a.norm() * c.norm(),
    })
}

/// `|Tr(xy)|` against `‖x‖_q ‖y‖_p` for conjugate exponents.
pub fn trace_duality<T: Real>(x: &LpVector<T>, y: &LpVector<T>) -> Result<HolderReport<T>> {
    let s = x.p.inv() + y.p.inv();
    if (s - T::one()).abs() > T::lit(1e3) * T::eps() {
        return Err(Error::Invalid("exponents are not conjugate".into()));
    }
    Ok(HolderReport {
        r: Exponent::Finite(T::one()),
        lhs: (&x.carrier * &y.carrier).trace().modulus(),
        rhs: x.norm() * y.norm(),
    })
}

/// `M_n` with the faithful state `Tr(D ·)`.
#[derive(Clone, Debug)]
pub struct FdAlgebra<T: Real> {
    density: CMatrix<T>,
    eig: Eigh<T>,
    blocks: Vec<usize>,
}

impl<T: Real> FdAlgebra<T> {
    /// Validates `D = D*`, `Tr D = 1` and `D ≻ 0` (smallest eigenvalue above the floor).
    pub fn new(density: CMatrix<T>) -> Result<Self> {
        let n = density.nrows();
        if n == 0 || density.ncols() != n {
            return Err(Error::Dimension(format!("density must be square and nonempty, got {}×{}", n, density.ncols())));
        }
        let tol = T::lit(1e-10);
        if linalg::hermitian_defect(&density) > tol {
            return Err(Error::NotReal("density is not Hermitian".into()));
        }
        let tr = density.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::Invalid(format!("density has trace {tr}, expected 1")));
        }
        let eig = Eigh::new(&density);
        if eig.min() <= T::lit(EIG_FLOOR) {
            return Err(Error::NotFaithful(eig.min().as_f64()));
        }
        Ok(Self {
            density: linalg::hermitian_part(&density),
            eig,
            blocks: vec![n],
        })
    }

    /// Normalized trace `D = I/n`.
    pub fn tracial(n: usize) -> Self {
        let d = linalg::identity::<T>(n).map(|z| z / Complex::new(T::lit(n as f64), T::zero()));
        Self::new(d).expect("tracial density is valid")
    }

    /// Records a block-size partition of `n`, used when this algebra is a subalgebra target.
    pub fn with_blocks(mut self, blocks: Vec<usize>) -> Result<Self> {
        if blocks.iter().sum::<usize>() != self.dim() || blocks.contains(&0) {
            return Err(Error::Dimension(format!("blocks {blocks:?} do not partition {}", self.dim())));
        }
        self.blocks = blocks;
        Ok(self)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.density.nrows()
    }

    pub fn density(&self) -> &CMatrix<T> {
        &self.density
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eig.values
    }

    /// `D^s` for real `s`.
    pub fn d_pow(&self, s: T) -> CMatrix<T> {
        self.eig.apply(|l| Complex::new(l.powf(s), T::zero()))
    }

    /// `D^{it}`.
    pub fn d_it(&self, t: T) -> CMatrix<T> {
        self.eig.apply(|l| {
            let ph = t * l.ln();
            Complex::new(ph.cos(), ph.sin())
        })
    }

    pub fn state(&self, x: &CMatrix<T>) -> Complex<T> {
        (&self.density * x).trace()
    }

    /// GNS inner product `⟨x, y⟩ = φ(x* y)`.
    pub fn gns_inner(&self, x: &CMatrix<T>, y: &CMatrix<T>) -> Complex<T> {
        self.state(&(x.adjoint() * y))
    }

    /// `κ^(z)_p(a) = D^{(1−z)/2p} a D^{(1+z)/2p}`; the identity for `p = ∞`.
    pub fn embed(&self, a: &CMatrix<T>, p: Exponent<T>, z: T) -> LpVector<T> {
        let carrier = match p {
            Exponent::Infinity => a.clone(),
            Exponent::Finite(pv) => {
                let two = T::lit(2.0);
                let l = self.d_pow((T::one() - z) / (two * pv));
                let r = self.d_pow((T::one() + z) / (two * pv));
                l * a * r
            }
        };
        LpVector { carrier, p, z }
    }

    /// Inverse of [`Self::embed`] on carriers.
    pub fn unembed(&self, v: &LpVector<T>) -> CMatrix<T> {
        match v.p {
            Exponent::Infinity => v.carrier.clone(),
            Exponent::Finite(pv) => {
                let two = T::lit(2.0);
                let l = self.d_pow(-(T::one() - v.z) / (two * pv));
                let r = self.d_pow(-(T::one() + v.z) / (two * pv));
                l * &v.carrier * r
            }
        }
    }

    /// `σ_t(x) = D^{it} x D^{−it}`.
    pub fn modular_group(&self, t: T, x: &CMatrix<T>) -> CMatrix<T> {
        let u = self.d_it(t);
        &u * x * u.adjoint()
    }

    /// The φ-preserving conditional expectation onto `sub`, after checking
    /// that `sub` is invariant under the modular group at `t ∈ {0.3, 1.1}`.
    pub fn expectation<'a>(&'a self, sub: &'a BlockSubalgebra<T>) -> Result<CondExp<'a, T>> {
        if sub.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "subalgebra acts on {} dimensions, algebra has {}",
                sub.dim(),
                self.dim()
            )));
        }
        let mut worst = T::zero();
        for t in [T::lit(0.3), T::lit(1.1)] {
            for e in sub.matrix_units() {
                let s = self.modular_group(t, &e);
                let d = max_abs(&(&s - sub.pinch(&s)));
                if d > worst {
                    worst = d;
                }
            }
        }
        if worst > T::lit(1e-10) {
            return Err(Error::NotModularInvariant(worst.as_f64()));
        }
        Ok(CondExp { alg: self, sub })
    }

    pub fn conditional_expectation(&self, sub: &BlockSubalgebra<T>, x: &CMatrix<T>) -> Result<CMatrix<T>> {
        Ok(self.expectation(sub)?.apply(x))
    }

    /// Minimum eigenvalue of `E^(1)(XX*) − E^(2)(X) E^(2)(X)*` for `X = κ^(z)_2(a)`.
    pub fn kadison_schwarz_gap(&self, sub: &BlockSubalgebra<T>, a: &CMatrix<T>, z: T) -> Result<T> {
        let e = self.expectation(sub)?;
        let x = self.embed(a, Exponent::Finite(T::lit(2.0)), z);
        let xx = LpVector {
            carrier: &x.carrier * x.carrier.adjoint(),
            p: Exponent::Finite(T::one()),
            z: T::zero(),
        };
        let e1 = e.apply_lp(&xx);
        let e2 = e.apply_lp(&x);
        Ok(linalg::min_eig(&(e1.carrier - &e2.carrier * e2.carrier.adjoint())))
    }

    /// `x = D^{−1/2} D_ω D^{−1/2}` with the verdict `0 ≤ x ≤ 1`, compared to
    /// the direct domination test on the GNS Gram form.
    pub fn comparison_factor(&self, omega: &CMatrix<T>, tol: T) -> Result<ComparisonReport<T>> {
        if omega.nrows() != self.dim() || omega.ncols() != self.dim() {
            return Err(Error::Dimension("ω density has the wrong size".into()));
        }
        let h = self.d_pow(-T::lit(0.5));
        let x = linalg::hermitian_part(&(&h * omega * &h));
        let ex = Eigh::new(&x);
        let factor_verdict = ex.min() >= -tol && ex.max() <= T::one() + tol;
        let direct_min = domination_gram_min(&self.density, omega);
        let omega_min = linalg::min_eig(omega);
        let direct_verdict = direct_min >= -tol && omega_min >= -tol;
        Ok(ComparisonReport {
            x,
            spectrum: (ex.min(), ex.max()),
            factor_verdict,
            direct_min,
            direct_verdict,
        })
    }

    /// `x_a = D^{−1/2} a D^{−1/2}` for `0 ⪯ a ⪯ b = D^{1/2} x_b D^{1/2}`.
    pub fn majorize_factor(&self, a: &CMatrix<T>, b: &CMatrix<T>, x_b: &CMatrix<T>, tol: T) -> Result<MajorizeReport<T>> {
        if linalg::min_eig(a) < -tol {
            return Err(Error::Order("a is not positive".into()));
        }
        if linalg::min_eig(&(b - a)) < -tol {
            return Err(Error::Order("a is not dominated by b".into()));
        }
        let half = self.d_pow(T::lit(0.5));
        let rebuilt = &half * x_b * &half;
        let scale = T::one().max(max_abs(b));
        if max_abs(&(rebuilt - b)) > tol * scale {
            return Err(Error::Order("b is not D^{1/2} x_b D^{1/2}".into()));
        }
        let h = self.d_pow(-T::lit(0.5));
        let x_a = linalg::hermitian_part(&(&h * a * &h));
        let gap = linalg::min_eig(&(x_b - &x_a));
        Ok(MajorizeReport {
            lower: linalg::min_eig(&x_a),
            gap,
            x_a,
        })
    }

    /// Midpoint convexity defects of `s ↦ log ‖κ^(0)_{1/s}(a)‖_{1/s}` on an
    /// equally spaced grid of `s = 1/p ∈ [0, 1]`; positive entries violate convexity.
    pub fn log_convexity_defects(&self, a: &CMatrix<T>, points: usize) -> Result<Vec<T>> {
        if points < 3 {
            return Err(Error::Invalid("need at least three exponents".into()));
        }
        let f: Vec<T> = (0..points)
            .map(|i| {
                let s = T::lit(i as f64 / (points - 1) as f64);
                let p = Exponent::from_inv(s)?;
                Ok(self.embed(a, p, T::zero()).norm().ln())
            })
            .collect::<Result<_>>()?;
        Ok((1..points - 1)
            .map(|i| f[i] - (f[i - 1] + f[i + 1]) / T::lit(2.0))
            .collect())
    }
}

/// Smallest eigenvalue of the Gram matrix of `(y, y') ↦ Tr((D − D_ω) y y'*)`
/// over the matrix units.
fn domination_gram_min<T: Real>(d: &CMatrix<T>, omega: &CMatrix<T>) -> T {
    let n = d.nrows();
    let diff = d - omega;
    let units: Vec<CMatrix<T>> = (0..n * n)
        .map(|k| {
            let mut e = CMatrix::zeros(n, n);
            e[(k / n, k % n)] = Complex::new(T::one(), T::zero());
            e
        })
        .collect();
    let g = CMatrix::from_fn(n * n, n * n, |a, b| (&diff * &units[a] * units[b].adjoint()).trace());
    linalg::min_eig(&g)
}

#[derive(Clone, Debug)]
pub struct ComparisonReport<T: Real> {
    pub x: CMatrix<T>,
    pub spectrum: (T, T),
    /// `0 ≤ x ≤ 1`.
    pub factor_verdict: bool,
    pub direct_min: T,
    /// `0 ≤ ω ≤ φ` by the Gram form.
    pub direct_verdict: bool,
}

#[derive(Clone, Debug)]
pub struct MajorizeReport<T: Real> {
    pub x_a: CMatrix<T>,
    /// `min eig(x_a)`.
    pub lower: T,
    /// `min eig(x_b − x_a)`.
    pub gap: T,
}

/// The subalgebra `U (M_{n_1} ⊕ … ⊕ M_{n_r}) U*`.
#[derive(Clone, Debug)]
pub struct BlockSubalgebra<T: Real> {
    unitary: CMatrix<T>,
    blocks: Vec<usize>,
}

impl<T: Real> BlockSubalgebra<T> {
    pub fn new(unitary: CMatrix<T>, blocks: Vec<usize>) -> Result<Self> {
        let n = unitary.nrows();
        if unitary.ncols() != n || blocks.iter().sum::<usize>() != n || blocks.contains(&0) {
            return Err(Error::Dimension(format!("blocks {blocks:?} do not partition {n}")));
        }
        let d = max_abs(&(unitary.adjoint() * &unitary - linalg::identity::<T>(n)));
        if d > T::lit(1e-10) {
            return Err(Error::Invalid(format!("basis change is not unitary (defect {d})")));
        }
        Ok(Self { unitary, blocks })
    }

    pub fn standard(blocks: Vec<usize>) -> Result<Self> {
        let n = blocks.iter().sum();
        Self::new(linalg::identity(n), blocks)
    }

    /// The diagonal matrices.
    pub fn diagonal(n: usize) -> Self {
        Self::standard(vec![1; n]).expect("valid partition")
    }

    pub fn full(n: usize) -> Self {
        Self::standard(vec![n]).expect("valid partition")
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn unitary(&self) -> &CMatrix<T> {
        &self.unitary
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    fn block_of(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect()
    }

    /// Zeroes the off-block entries in the rotated basis.
    pub fn pinch(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let owner = self.block_of();
        let mut y = self.unitary.adjoint() * x * &self.unitary;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if owner[i] != owner[j] {
                    y[(i, j)] = Complex::new(T::zero(), T::zero());
                }
            }
        }
        &self.unitary * y * self.unitary.adjoint()
    }

    /// `U e_ij U*` for `i, j` in a common block.
    pub fn matrix_units(&self) -> Vec<CMatrix<T>> {
        let owner = self.block_of();
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if owner[i] == owner[j] {
                    let mut e = CMatrix::zeros(n, n);
                    e[(i, j)] = Complex::new(T::one(), T::zero());
                    out.push(&self.unitary * e * self.unitary.adjoint());
                }
            }
        }
        out
    }

    pub fn contains(&self, x: &CMatrix<T>, tol: T) -> bool {
        max_abs(&(x - self.pinch(x))) <= tol
    }
}

/// A validated conditional expectation.
#[derive(Clone, Copy, Debug)]
pub struct CondExp<'a, T: Real> {
    alg: &'a FdAlgebra<T>,
    sub: &'a BlockSubalgebra<T>,
}

impl<T: Real> CondExp<'_, T> {
    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        self.sub.pinch(x)
    }

    /// `E^(p) = κ ∘ E ∘ κ^{−1}` on an embedded element.
    pub fn apply_lp(&self, v: &LpVector<T>) -> LpVector<T> {
        let a = self.alg.unembed(v);
        self.alg.embed(&self.apply(&a), v.p, v.z)
    }
}

/// Parses a matrix from JSON rows of `[re, im]` pairs (bare numbers are real).
pub fn matrix_from_json(v: &Value) -> Result<CMatrix<f64>> {
    let rows = v.as_array().ok_or_else(|| Error::Invalid("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let mut data = Vec::new();
    let mut cols = None;
    for row in rows {
        let row = row.as_array().ok_or_else(|| Error::Invalid("row must be an array".into()))?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(Error::Dimension("ragged matrix".into()));
        }
        for e in row {
            data.push(json_complex(e)?);
        }
    }
    Ok(CMatrix::from_row_slice(n, cols.unwrap_or(0), &data))
}

fn json_complex(e: &Value) -> Result<Complex<f64>> {
    let bad = || Error::Invalid(format!("bad matrix entry {e}"));
    match e {
        Value::Number(x) => Ok(Complex::new(x.as_f64().ok_or_else(bad)?, 0.0)),
        Value::Array(p) if p.len() == 2 => Ok(Complex::new(
            p[0].as_f64().ok_or_else(bad)?,
            p[1].as_f64().ok_or_else(bad)?,
        )),
        _ => Err(bad()),
    }
}

pub fn matrix_to_json(m: &CMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// Text matrix format: one row per line, whitespace-separated entries
/// written `re` or `re,im`; blank lines and `#` comments are skipped.
pub fn matrix_from_text(s: &str) -> Result<CMatrix<f64>> {
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (ln, line) in s.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for tok in line.split_whitespace() {
            let bad = || Error::Parse {
                pos: ln + 1,
                msg: format!("bad entry `{tok}` on line {}", ln + 1),
            };
            let z = match tok.split_once(',') {
                Some((re, im)) => Complex::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?),
                None => Complex::new(tok.parse().map_err(|_| bad())?, 0.0),
            };
            data.push(z);
            count += 1;
        }
        if *cols.get_or_insert(count) != count {
            return Err(Error::Dimension(format!("row {} has {count} entries", ln + 1)));
        }
        rows += 1;
    }
    Ok(CMatrix::from_row_slice(rows, cols.unwrap_or(0), &data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_density, random_matrix, random_unitary};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = CMatrix<f64>;

    fn diag(v: &[f64]) -> M {
        M::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|x| Complex::new(*x, 0.0))))
    }

    fn fin(p: f64) -> Exponent<f64> {
        Exponent::Finite(p)
    }

    #[test]
    fn embed_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_density::<f64, _>(&mut rng, 3, 0.2);
        let alg = FdAlgebra::new(d.clone()).unwrap();
        let i3 = linalg::identity::<f64>(3);
        assert!((alg.embed(&i3, fin(1.0), 0.0).carrier - &d).norm() < 1e-13);
        let x = random_matrix::<f64, _>(&mut rng, 3, 3);
        for z in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let tr = alg.embed(&x, fin(1.0), z).carrier.trace();
            assert!((tr - alg.state(&x)).norm() < 1e-13);
        }
        let t = FdAlgebra::<f64>::tracial(2);
        for p in [1.0, 1.5, 2.0, 7.0] {
            for z in [-1.0, 0.0, 0.5] {
                let v = t.embed(&linalg::identity(2), fin(p), z);
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_densities() {
        assert!(matches!(FdAlgebra::new(diag(&[1.0, 0.0])), Err(Error::NotFaithful(_))));
        assert!(FdAlgebra::new(diag(&[0.7, 0.7])).is_err());
        assert!(Exponent::new(0.3).is_err());
        assert_eq!(Exponent::new(f64::INFINITY).unwrap(), Exponent::Infinity);
    }

    #[test]
    fn modular_group_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alg = FdAlgebra::new(random_density::<f64, _>(&mut rng, 4, 0.2)).unwrap();
        let i4 = linalg::identity::<f64>(4);
        assert!((alg.modular_group(0.7, &i4) - &i4).norm() < 1e-13);
        assert!((alg.modular_group(1.9, alg.density()) - alg.density()).norm() < 1e-13);
        let t = FdAlgebra::<f64>::tracial(4);
        let x = random_matrix::<f64, _>(&mut rng, 4, 4);
        assert!((t.modular_group(2.5, &x) - &x).norm() < 1e-13);
    }

    #[test]
    fn diagonal_expectation_is_diagonal_extraction() {
        let alg = FdAlgebra::new(diag(&[0.3, 0.7])).unwrap();
        let sub = BlockSubalgebra::diagonal(2);
        let x = M::from_row_slice(2, 2, &[Complex::new(1.0, 0.0), Complex::new(2.0, 1.0), Complex::new(-3.0, 0.5), Complex::new(4.0, 0.0)]);
        let e = alg.conditional_expectation(&sub, &x).unwrap();
        assert_eq!(e, diag(&[1.0, 4.0]));
        assert!((alg.state(&e) - alg.state(&x)).norm() < 1e-15);
        let i2 = linalg::identity::<f64>(2);
        assert_eq!(alg.conditional_expectation(&sub, &i2).unwrap(), i2);
    }

    /// φ-orthogonal projection onto the span of the matrix units, by normal equations.
    fn gns_projection(alg: &FdAlgebra<f64>, sub: &BlockSubalgebra<f64>, x: &M) -> M {
        let units = sub.matrix_units();
        let k = units.len();
        let g = M::from_fn(k, k, |a, b| alg.gns_inner(&units[a], &units[b]));
        let rhs = nalgebra::DVector::from_fn(k, |a, _| alg.gns_inner(&units[a], x));
        let c = g.lu().solve(&rhs).unwrap();
        units.iter().zip(c.iter()).fold(M::zeros(x.nrows(), x.ncols()), |acc, (u, ci)| acc + u * *ci)
    }

    #[test]
    fn expectation_matches_gns_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let u = random_unitary::<f64, _>(&mut rng, 4);
            let b1 = random_density::<f64, _>(&mut rng, 1, 0.5);
            let b2 = random_density::<f64, _>(&mut rng, 3, 0.5);
            let inner = linalg::direct_sum(&[b1.map(|z| z * 0.4), b2.map(|z| z * 0.6)]);
            let d = &u * inner * u.adjoint();
            let alg = FdAlgebra::new(linalg::hermitian_part(&d)).unwrap();
            let sub = BlockSubalgebra::new(u, vec![1, 3]).unwrap();
            let x = random_matrix::<f64, _>(&mut rng, 4, 4);
            let e = alg.conditional_expectation(&sub, &x).unwrap();
            assert!((&e - gns_projection(&alg, &sub, &x)).norm() < 1e-10);
            assert!((alg.conditional_expectation(&sub, &e).unwrap() - &e).norm() < 1e-12);
        }
    }

    #[test]
    fn non_invariant_subalgebra_is_refused() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = FdAlgebra::new(random_density::<f64, _>(&mut rng, 3, 0.2)).unwrap();
        let sub = BlockSubalgebra::diagonal(3);
        assert!(matches!(alg.expectation(&sub), Err(Error::NotModularInvariant(_))));
    }

    #[test]
    fn comparison_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let alg = FdAlgebra::new(random_density::<f64, _>(&mut rng, 3, 0.2)).unwrap();
        let r = alg.comparison_factor(&alg.density().clone(), 1e-10).unwrap();
        assert!((&r.x - linalg::identity::<f64>(3)).norm() < 1e-12);
        assert!(r.factor_verdict && r.direct_verdict);
        let half = alg.density().map(|z| z * 0.5);
        let r = alg.comparison_factor(&half, 1e-10).unwrap();
        assert!((&r.x - linalg::identity::<f64>(3).map(|z| z * 0.5)).norm() < 1e-12);
    }

    #[test]
    fn majorize_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alg = FdAlgebra::new(random_density::<f64, _>(&mut rng, 3, 0.2)).unwrap();
        let x_b = linalg::random_psd::<f64, _>(&mut rng, 3, 3);
        let h = alg.d_pow(0.5);
        let b = &h * &x_b * &h;
        let r = alg.majorize_factor(&b, &b, &x_b, 1e-10).unwrap();
        assert!((&r.x_a - &x_b).norm() < 1e-10);
        let r = alg.majorize_factor(&M::zeros(3, 3), &b, &x_b, 1e-10).unwrap();
        assert!(r.x_a.norm() < 1e-14);
        assert!(alg.majorize_factor(&b.map(|z| z * 2.0), &b, &x_b, 1e-10).is_err());
    }

    #[test]
    fn holder_examples() {
        let alg = FdAlgebra::<f64>::tracial(4);
        let zero = alg.embed(&M::zeros(4, 4), fin(2.0), 0.0);
        let r = holder_check(&zero, &zero).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let a = alg.embed(&M::zeros(4, 4), fin(1.5), 0.0);
        assert!(holder_check(&a, &a).is_err());
    }

    #[test]
    fn matrix_text_and_json() {
        let m = matrix_from_text("1 0,1\n# c\n2.5 -1\n").unwrap();
        assert_eq!(m[(0, 1)], Complex::new(0.0, 1.0));
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
        assert!(matrix_from_text("1 2\n3\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn kappa_identities(seed in any::<u64>(), p in 1.0f64..6.0, z in -1.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alg = FdAlgebra::new(random_density::<f64, _>(&mut rng, 3, 0.3)).unwrap();
            let a = random_matrix::<f64, _>(&mut rng, 3, 3);
            let b = random_matrix::<f64, _>(&mut rng, 3, 3);
            let star = alg.embed(&a, fin(p), z).carrier.adjoint() - alg.embed(&a.adjoint(), fin(p), -z).carrier;
            prop_assert!(star.norm() < 1e-12);
            let prod = alg.embed(&a, fin(p), -1.0).carrier * alg.embed(&b, fin(p), 1.0).carrier
                - alg.embed(&(&a * &b), fin(p / 2.0), 0.0).carrier;
            prop_assert!(prod.norm() < 1e-12);
            let norm_star = alg.embed(&a, fin(p), z).norm() - alg.embed(&a, fin(p), z).adjoint().norm();
            prop_assert!(norm_star.abs() < 1e-12);
        }

        #[test]
        fn square_norm_identity(seed in any::<u64>(), p in 1.0f64..6.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_matrix::<f64, _>(&mut rng, 4, 4);
            let lhs = linalg::schatten_norm(&(x.adjoint() * &x), p / 2.0).sqrt();
            prop_assert!((lhs - linalg::schatten_norm(&x, p)).abs() < 1e-11 * (1.0 + lhs));
        }

        #[test]
        fn kappa_is_contractive(seed in any::<u64>(), p in 1.0f64..4.0, dq in 0.0f64..4.0, z in -1.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alg = FdAlgebra::new(random_density::<f64, _>(&mut rng, 3, 0.3)).unwrap();
            let a = random_matrix::<f64, _>(&mut rng, 3, 3);
            let lo = alg.embed(&a, fin(p), z).norm();
            let hi = alg.embed(&a, fin(p + dq), z).norm();
            prop_assert!(lo <= hi + 1e-12);
        }
    }
}
