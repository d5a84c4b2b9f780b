//! Discrete-time Markov dilation of the heat semigroup through fermionic
//! fields over a Gaussian kernel.
//!
//! Dilation operators live on `ℂ^{N(2M+1)} ⊗ (ℂ^{2^n})^{⊗d}` and are stored as
//! sums of elementary tensors `Σ B_t ⊗ F_t`. The vacuum of each Fock leg is
//! basis vector 0, and leg 1 is the most significant tensor digit.

use crate::error::{Error, Result};
use crate::linalg;
use crate::polalg::{PolElement, SUq2};
use crate::scalar::{max_abs, CMatrix, Real};
use crate::trunc::TruncRep;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Cap on `2^{n·d} · (N(2M+1))²`.
pub const MEMORY_CAP: usize = 1 << 22;
/// Cap on the Fock dimension `2^{n·d}`.
pub const FOCK_CAP: usize = 1 << 10;
/// Cap on the total dimension for dense materialization.
pub const DENSE_CAP: usize = 1024;

/// `G_ij = e^{−ε(i−j)²}` on `n` sites.
#[derive(Clone, Debug)]
pub struct GramKernel<T: Real> {
    pub eps: T,
    pub g: DMatrix<T>,
}

impl<T: Real> GramKernel<T> {
    pub fn new(eps: T, n: usize) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::Invalid(format!("kernel width ε must be positive, got {eps}")));
        }
        let g = DMatrix::from_fn(n, n, |i, j| {
            let d = T::lit(i as f64 - j as f64);
            (-eps * d * d).exp()
        });
        Ok(Self { eps, g })
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn min_eig(&self) -> T {
        self.g.clone().symmetric_eigen().eigenvalues.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
    }
}

/// Self-adjoint fields `s_i = Σ_k L_ik c_k` with `G = L Lᵀ` and `c_k` the
/// Jordan–Wigner operators `Z ⊗ … ⊗ Z ⊗ X ⊗ I ⊗ … ⊗ I`.
#[derive(Clone, Debug)]
pub struct FockRep<T: Real> {
    pub kernel: GramKernel<T>,
    pub fields: Vec<CMatrix<T>>,
}

fn pauli<T: Real>(which: char) -> CMatrix<T> {
    let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    match which {
        'x' => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'z' => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => linalg::identity(2),
    }
}

fn majorana<T: Real>(k: usize, n: usize) -> CMatrix<T> {
    let mut out = linalg::identity::<T>(1);
    for site in 0..n {
        let f = if site < k {
            pauli('z')
        } else if site == k {
            pauli('x')
        } else {
            pauli('i')
        };
        out = out.kronecker(&f);
    }
    out
}

/// Builds the fields; refuses kernels with `λ_min ≤ 1e−12`.
pub fn build_fields<T: Real>(kernel: &GramKernel<T>) -> Result<FockRep<T>> {
    let m = kernel.min_eig();
    if m <= T::lit(1e-12) {
        return Err(Error::KernelNotPositive(m.as_f64()));
    }
    let n = kernel.n();
    let l = kernel
        .g
        .clone()
        .cholesky()
        .ok_or(Error::KernelNotPositive(m.as_f64()))?
        .l();
    let cs: Vec<CMatrix<T>> = (0..n).map(|k| majorana(k, n)).collect();
    let fields = (0..n)
        .map(|i| {
            cs.iter().enumerate().fold(CMatrix::zeros(1 << n, 1 << n), |acc, (k, c)| {
                acc + c.map(|v| v * Complex::new(l[(i, k)], T::zero()))
            })
        })
        .collect();
    Ok(FockRep {
        kernel: kernel.clone(),
        fields,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarDefects {
    /// `max ‖s_i s_j + s_j s_i − 2 G_ij I‖_max`.
    pub anticommutation: f64,
    /// `max |⟨Ω, s_i s_j Ω⟩ − G_ij|`.
    pub vacuum_covariance: f64,
    pub self_adjoint: f64,
}

impl<T: Real> FockRep<T> {
    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    /// `⟨Ω, a Ω⟩`.
    pub fn vacuum(a: &CMatrix<T>) -> Complex<T> {
        a[(0, 0)]
    }

    pub fn car_defects(&self) -> CarDefects {
        let n = self.n();
        let id = linalg::identity::<T>(self.dim());
        let mut out = CarDefects {
            anticommutation: 0.0,
            vacuum_covariance: 0.0,
            self_adjoint: 0.0,
        };
        for i in 0..n {
            let si = &self.fields[i];
            out.self_adjoint = out.self_adjoint.max(linalg::hermitian_defect(si).as_f64());
            for j in 0..n {
                let sj = &self.fields[j];
                let g = Complex::new(self.kernel.g[(i, j)], T::zero());
                let ac = si * sj + sj * si - id.map(|v| v * g * Complex::new(T::lit(2.0), T::zero()));
                out.anticommutation = out.anticommutation.max(max_abs(&ac).as_f64());
                out.vacuum_covariance = out.vacuum_covariance.max((Self::vacuum(&(si * sj)) - g).modulus().as_f64());
            }
        }
        out
    }
}

/// `Σ_t B_t ⊗ F_t`.
#[derive(Clone, Debug)]
pub struct DilationOp<T: Real> {
    pub terms: Vec<(CMatrix<T>, CMatrix<T>)>,
}

impl<T: Real> DilationOp<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn elementary(b: CMatrix<T>, f: CMatrix<T>) -> Self {
        Self { terms: vec![(b, f)] }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            terms: self.terms.iter().map(|(b, f)| (b.map(|v| v * c), f.clone())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = Vec::new();
        for (b, f) in &self.terms {
            for (b2, f2) in &o.terms {
                terms.push((b * b2, f * f2));
            }
        }
        Self { terms }
    }

    /// `‖Σ B_t P ⊗ F_t‖_F`, with `P` the interior column projection if `rep`
    /// is given. Bounds the operator norm. Summed entrywise per base entry
    /// `(r, c)` as `‖Σ_t B_t[r, c] F_t‖_F²`, which avoids cancellation.
    pub fn frobenius(&self, rep: Option<&TruncRep<T>>) -> T {
        let Some((b0, f0)) = self.terms.first() else {
            return T::zero();
        };
        let cols: Vec<usize> = match rep {
            Some(r) => r.interior(),
            None => (0..b0.ncols()).collect(),
        };
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = T::zero();
        let mut m = CMatrix::zeros(f0.nrows(), f0.ncols());
        for &c in &cols {
            for r in 0..b0.nrows() {
                let mut any = false;
                m.fill(zero);
                for (b, f) in &self.terms {
                    let w = b[(r, c)];
                    if w != zero {
                        m.zip_apply(f, |x, y| *x += w * y);
                        any = true;
                    }
                }
                if any {
                    acc += m.norm_squared();
                }
            }
        }
        acc.sqrt()
    }

    pub fn to_dense(&self) -> Result<CMatrix<T>> {
        let (b, f) = match self.terms.first() {
            Some((b, f)) => (b.nrows(), f.nrows()),
            None => return Ok(CMatrix::zeros(0, 0)),
        };
        if b * f > DENSE_CAP {
            return Err(Error::Budget(b * f, DENSE_CAP));
        }
        Ok(self.terms.iter().fold(CMatrix::zeros(b * f, b * f), |acc, (b, f)| acc + b.kronecker(f)))
    }
}

/// Base truncation, Fock fields and depth of the dilation algebra.
#[derive(Clone, Debug)]
pub struct DilationState<T: Real> {
    pub rep: TruncRep<T>,
    pub fock: FockRep<T>,
    pub depth: usize,
    /// `s_i s_j` for all site pairs.
    pairs: Vec<Vec<CMatrix<T>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub m: usize,
    pub k: usize,
    pub eps: f64,
    /// Frobenius norm of the difference on interior columns (an upper bound
    /// for its operator norm).
    pub interior_defect: f64,
    pub full_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurFormReport {
    pub t: f64,
    pub interior_defect: f64,
    pub full_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub idempotence: f64,
    pub unitality: f64,
    /// `max(0, −λ_min(E_m(Y)))` over random `Y ≥ 0`.
    pub positivity: f64,
    pub state_preservation: f64,
    /// `‖E_a E_b − E_{min(a,b)}‖` over all pairs.
    pub nesting: f64,
}

impl ExpectationReport {
    pub fn worst(&self) -> f64 {
        self.idempotence
            .max(self.unitality)
            .max(self.positivity)
            .max(self.state_preservation)
            .max(self.nesting)
    }
}

impl<T: Real> DilationState<T> {
    /// One site per `ℕ`-index of the truncation.
    pub fn new(rep: TruncRep<T>, eps: T, depth: usize) -> Result<Self> {
        let n = rep.n();
        let fock_dim = if n * depth < usize::BITS as usize { 1usize << (n * depth) } else { usize::MAX };
        if fock_dim > FOCK_CAP {
            return Err(Error::Budget(fock_dim, FOCK_CAP));
        }
        let need = fock_dim * rep.dim() * rep.dim();
        if need > MEMORY_CAP {
            return Err(Error::Budget(need, MEMORY_CAP));
        }
        let fock = build_fields(&GramKernel::new(eps, n)?)?;
        let pairs = (0..n)
            .map(|i| (0..n).map(|j| &fock.fields[i] * &fock.fields[j]).collect())
            .collect();
        Ok(Self { rep, fock, depth, pairs })
    }

    pub fn eps(&self) -> T {
        self.fock.kernel.eps
    }

    pub fn leg_dim(&self) -> usize {
        self.fock.dim()
    }

    pub fn fock_dim(&self) -> usize {
        self.leg_dim().pow(self.depth as u32)
    }

    pub fn total_dim(&self) -> usize {
        self.rep.dim() * self.fock_dim()
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k > self.depth {
            return Err(Error::DepthExceeded {
                requested: k,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// `π_k(x) = Σ_ij e_ii x e_jj ⊗ (s_i s_j)^{⊗k} ⊗ 1`.
    pub fn pi(&self, k: usize, x: &PolElement<Complex<T>>) -> Result<DilationOp<T>> {
        self.pi_matrix(k, &self.rep.evaluate(x))
    }

    /// [`Self::pi`] applied to an already evaluated matrix.
    pub fn pi_matrix(&self, k: usize, a: &CMatrix<T>) -> Result<DilationOp<T>> {
        self.check_depth(k)?;
        let rest = linalg::identity::<T>(self.leg_dim().pow((self.depth - k) as u32));
        if k == 0 {
            return Ok(DilationOp::elementary(a.clone(), rest));
        }
        let n = self.rep.n();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let block = self.rep.schur_n_leg_with(a, |r, c| if r == i && c == j { T::one() } else { T::zero() });
                if max_abs(&block) == T::zero() {
                    continue;
                }
                let mut f = linalg::identity::<T>(1);
                for _ in 0..k {
                    f = f.kronecker(&self.pairs[i][j]);
                }
                terms.push((block, f.kronecker(&rest)));
            }
        }
        Ok(DilationOp { terms })
    }

    /// Vacuum compression of the Fock legs after position `m`.
    fn compress(&self, f: &CMatrix<T>, m: usize) -> CMatrix<T> {
        let hi = self.leg_dim().pow((self.depth - m) as u32);
        let lo = self.leg_dim().pow(m as u32);
        let sub = CMatrix::from_fn(lo, lo, |a, b| f[(a * hi, b * hi)]);
        sub.kronecker(&linalg::identity::<T>(hi))
    }

    /// `E_m`: contracts legs `m+1, …, d` against the vacuum state.
    pub fn cond_exp(&self, m: usize, y: &DilationOp<T>) -> Result<DilationOp<T>> {
        self.check_depth(m)?;
        Ok(DilationOp {
            terms: y.terms.iter().map(|(b, f)| (b.clone(), self.compress(f, m))).collect(),
        })
    }

    /// `E_m` on a dense operator of size `N(2M+1) · 2^{nd}`.
    pub fn cond_exp_dense(&self, m: usize, y: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check_depth(m)?;
        let fd = self.fock_dim();
        let hi = self.leg_dim().pow((self.depth - m) as u32);
        let dim = self.total_dim();
        if y.nrows() != dim || y.ncols() != dim {
            return Err(Error::Dimension(format!("expected a {dim}×{dim} operator")));
        }
        Ok(CMatrix::from_fn(dim, dim, |r, c| {
            let (rb, rf) = (r / fd, r % fd);
            let (cb, cf) = (c / fd, c % fd);
            if rf % hi != cf % hi {
                return Complex::new(T::zero(), T::zero());
            }
            y[(rb * fd + (rf / hi) * hi, cb * fd + (cf / hi) * hi)]
        }))
    }

    /// `(φ_trunc ⊗ τ_Ω^{⊗d})(Y)`.
    pub fn state(&self, y: &DilationOp<T>) -> Complex<T> {
        y.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (b, f)| acc + self.rep.haar_trunc_matrix(b) * f[(0, 0)])
    }

    pub fn state_dense(&self, y: &CMatrix<T>) -> Complex<T> {
        let fd = self.fock_dim();
        let base = CMatrix::from_fn(self.rep.dim(), self.rep.dim(), |r, c| y[(r * fd, c * fd)]);
        self.rep.haar_trunc_matrix(&base)
    }

    /// Compares `E_m(π_k(x))` with `π_m(Φ_{ε(k−m)}(x))`.
    pub fn dilation_identity_check(&self, m: usize, k: usize, x: &PolElement<Complex<T>>) -> Result<DilationReport> {
        if m >= k {
            return Err(Error::Invalid(format!("need m < k, got m = {m}, k = {k}")));
        }
        self.check_depth(k)?;
        let alg = SUq2::numeric(self.rep.q())?;
        let lhs = self.cond_exp(m, &self.pi(k, x)?)?;
        let t = self.eps() * T::lit((k - m) as f64);
        let rhs = self.pi(m, &alg.heat_phi(t, x)?)?;
        let d = lhs.sub(&rhs);
        Ok(DilationReport {
            m,
            k,
            eps: self.eps().as_f64(),
            interior_defect: d.frobenius(Some(&self.rep)).as_f64(),
            full_defect: d.frobenius(None).as_f64(),
        })
    }

    /// `‖π_k(x y) − π_k(x) π_k(y)‖_F` on interior columns.
    pub fn multiplicativity_defect(&self, k: usize, x: &PolElement<Complex<T>>, y: &PolElement<Complex<T>>) -> Result<T> {
        let alg = SUq2::numeric(self.rep.q())?;
        let lhs = self.pi(k, &alg.mul(x, y))?;
        let rhs = self.pi(k, x)?.mul(&self.pi(k, y)?);
        Ok(lhs.sub(&rhs).frobenius(Some(&self.rep)))
    }

    /// `|(φ_trunc ⊗ τ^{⊗d})(π_k(x)) − φ_trunc(x)|`.
    pub fn state_preservation_defect(&self, k: usize, x: &PolElement<Complex<T>>) -> Result<T> {
        Ok((self.state(&self.pi(k, x)?) - self.rep.haar_trunc(x)).modulus())
    }

    /// Projection properties of every `E_m` on random dense inputs; needs a
    /// configuration small enough for [`DENSE_CAP`].
    pub fn expectation_properties<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> Result<ExpectationReport> {
        let dim = self.total_dim();
        if dim > DENSE_CAP {
            return Err(Error::Budget(dim, DENSE_CAP));
        }
        let id = linalg::identity::<T>(dim);
        let mut rep = ExpectationReport {
            idempotence: 0.0,
            unitality: 0.0,
            positivity: 0.0,
            state_preservation: 0.0,
            nesting: 0.0,
        };
        for _ in 0..samples {
            let z = linalg::random_matrix::<T, R>(rng, dim, dim);
            let y = z.adjoint() * &z;
            let scale = linalg::spectral_norm(&y);
            let y = y.map(|v| v / Complex::new(scale, T::zero()));
            let es: Vec<CMatrix<T>> = (0..=self.depth).map(|m| self.cond_exp_dense(m, &y)).collect::<Result<_>>()?;
            let phi_y = self.state_dense(&y);
            for (m, e) in es.iter().enumerate() {
                rep.idempotence = rep.idempotence.max(max_abs(&(self.cond_exp_dense(m, e)? - e)).as_f64());
                rep.unitality = rep.unitality.max(max_abs(&(self.cond_exp_dense(m, &id)? - &id)).as_f64());
                rep.positivity = rep.positivity.max((-linalg::min_eig(e).as_f64()).max(0.0));
                rep.state_preservation = rep.state_preservation.max((self.state_dense(e) - phi_y).modulus().as_f64());
                for (m2, e2) in es.iter().enumerate() {
                    let nested = self.cond_exp_dense(m2, e)?;
                    let want = if m2 <= m { e2 } else { e };
                    rep.nesting = rep.nesting.max(max_abs(&(nested - want)).as_f64());
                }
            }
        }
        Ok(rep)
    }
}

/// Compares `evaluate(Φ_t x)` with the `ℕ`-leg Schur multiplier `Ψ_t` applied
/// to `evaluate(x)`.
pub fn schur_form_check<T: Real>(rep: &TruncRep<T>, t: T, x: &PolElement<Complex<T>>) -> Result<SchurFormReport> {
    let alg = SUq2::numeric(rep.q())?;
    let d = rep.evaluate(&alg.heat_phi(t, x)?) - rep.schur_n_leg(t, &rep.evaluate(x));
    Ok(SchurFormReport {
        t: t.as_f64(),
        interior_defect: rep.op_norm(&rep.on_interior(&d)).as_f64(),
        full_defect: rep.op_norm(&d).as_f64(),
    })
}
