//! Truncated defining representation of `SU_q(2)` on `ℂ^N ⊗ ℂ^{2M+1}` and
//! the transference homomorphism `π(α^k γ^l (γ*)^m) = α^k γ^l (γ*)^m ⊗ ζ_k`.
//!
//! Basis vectors `e_i ⊗ f_j` (`0 ≤ i < N`, `|j| ≤ M`) are indexed by
//! `i (2M + 1) + j + M`. Shifts that leave the box are dropped, so every
//! generator maps a basis vector to a multiple of a basis vector or to zero.

use crate::bmo::{bmo_norm, BmoPair, MarkovSemigroup, TGrid};
use crate::error::{Error, Result};
use crate::linalg;
use crate::peterweyl::{HalfInt, StrataGram};
use crate::polalg::{Monomial, PolElement, SUq2, Symbol};
use crate::qspecial::QScalar;
use crate::scalar::{CMatrix, Real};
use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Dense SVD up to this size, power iteration beyond.
pub const DENSE_NORM_LIMIT: usize = 2048;
/// Cap on `S · dim²` for stored sampled fields.
pub const FIELD_ENTRY_CAP: usize = 1 << 25;

#[derive(Clone, Debug)]
pub struct TruncRep<T: Real> {
    n: usize,
    m: usize,
    q: T,
    alpha: CMatrix<T>,
    gamma: CMatrix<T>,
}

impl<T: Real> TruncRep<T> {
    pub fn new(n: usize, m: usize, q: T) -> Result<Self> {
        if !(q > -T::one() && q < T::one()) || q == T::zero() {
            return Err(Error::InvalidQ(q.as_f64()));
        }
        if n < 2 || m < 1 {
            return Err(Error::Dimension(format!("truncation needs N ≥ 2 and M ≥ 1, got N = {n}, M = {m}")));
        }
        let mut rep = Self {
            n,
            m,
            q,
            alpha: CMatrix::zeros(0, 0),
            gamma: CMatrix::zeros(0, 0),
        };
        rep.alpha = rep.monomial_matrix(&Monomial::new(1, 0, 0));
        rep.gamma = rep.monomial_matrix(&Monomial::new(0, 1, 0));
        Ok(rep)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.n * (2 * self.m + 1)
    }

    pub fn index(&self, i: usize, j: i64) -> usize {
        i * (2 * self.m + 1) + (j + self.m as i64) as usize
    }

    /// `(i, j)` of a basis index.
    pub fn coords(&self, idx: usize) -> (usize, i64) {
        let w = 2 * self.m + 1;
        (idx / w, (idx % w) as i64 - self.m as i64)
    }

    pub fn alpha(&self) -> &CMatrix<T> {
        &self.alpha
    }

    pub fn gamma(&self) -> &CMatrix<T> {
        &self.gamma
    }

    fn qp(&self, e: usize) -> T {
        self.q.powi(e as i32)
    }

    /// Image of `e_i ⊗ f_j` under a monomial: `(weight, i', j')`, or `None`
    /// if some factor drops it. Factors act right to left.
    pub fn apply_monomial(&self, mono: &Monomial, i: usize, j: i64) -> Option<(T, usize, i64)> {
        let (mut i, mut j, mut w) = (i, j, T::one());
        let m = self.m as i64;
        for _ in 0..mono.m {
            if j == -m {
                return None;
            }
            w *= self.qp(i);
            j -= 1;
        }
        for _ in 0..mono.l {
            if j == m {
                return None;
            }
            w *= self.qp(i);
            j += 1;
        }
        if mono.k >= 0 {
            for _ in 0..mono.k {
                if i == 0 {
                    return None;
                }
                w *= (T::one() - self.qp(2 * i)).sqrt();
                i -= 1;
            }
        } else {
            for _ in 0..(-mono.k) {
                if i + 1 == self.n {
                    return None;
                }
                w *= (T::one() - self.qp(2 * (i + 1))).sqrt();
                i += 1;
            }
        }
        Some((w, i, j))
    }

    pub fn monomial_matrix(&self, mono: &Monomial) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.add_monomial(&mut out, mono, Complex::new(T::one(), T::zero()));
        out
    }

    fn add_monomial(&self, out: &mut CMatrix<T>, mono: &Monomial, c: Complex<T>) {
        for col in 0..self.dim() {
            let (i, j) = self.coords(col);
            if let Some((w, i2, j2)) = self.apply_monomial(mono, i, j) {
                out[(self.index(i2, j2), col)] += c * Complex::new(w, T::zero());
            }
        }
    }

    /// Substitutes the truncated generators into the normal form.
    pub fn evaluate(&self, x: &PolElement<Complex<T>>) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (mono, c) in x.terms() {
            self.add_monomial(&mut out, mono, *c);
        }
        out
    }

    pub fn evaluate_exact(&self, x: &PolElement<QScalar>) -> Result<CMatrix<T>> {
        Ok(self.evaluate(&x.evaluate_at(self.q)?))
    }

    /// Indices with `i ≤ N − 2` and `|j| ≤ M − 1`.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&idx| {
                let (i, j) = self.coords(idx);
                i + 2 <= self.n && j.unsigned_abs() < self.m as u64
            })
            .collect()
    }

    /// `a` restricted to the interior columns.
    pub fn on_interior(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let cols = self.interior();
        CMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])])
    }

    pub fn op_norm(&self, a: &CMatrix<T>) -> T {
        op_norm(a)
    }

    /// The five defining relations as `(name, lhs − rhs)`.
    pub fn relation_matrices(&self) -> Vec<(&'static str, CMatrix<T>)> {
        let a = &self.alpha;
        let g = &self.gamma;
        let (a_s, g_s) = (a.adjoint(), g.adjoint());
        let q = Complex::new(self.q, T::zero());
        let id = linalg::identity::<T>(self.dim());
        vec![
            ("αγ = qγα", a * g - (g * a).map(|z| z * q)),
            ("αγ* = qγ*α", a * &g_s - (&g_s * a).map(|z| z * q)),
            ("γγ* = γ*γ", g * &g_s - &g_s * g),
            ("α*α + γ*γ = 1", &a_s * a + &g_s * g - &id),
            ("αα* + q²γγ* = 1", a * &a_s + (g * &g_s).map(|z| z * q * q) - &id),
        ]
    }

    pub fn relation_defects(&self) -> RelationDefects {
        let mut interior = Vec::new();
        let mut full = Vec::new();
        for (name, d) in self.relation_matrices() {
            interior.push((name.to_string(), op_norm(&self.on_interior(&d)).as_f64()));
            full.push((name.to_string(), op_norm(&d).as_f64()));
        }
        RelationDefects { interior, full }
    }

    /// `(1 − q²) Σ_{i<N} q^{2i} ⟨x (e_i ⊗ f_0), e_i ⊗ f_0⟩`.
    pub fn haar_trunc(&self, x: &PolElement<Complex<T>>) -> Complex<T> {
        self.haar_trunc_matrix(&self.evaluate(x))
    }

    /// The truncated Haar functional on an arbitrary matrix.
    pub fn haar_trunc_matrix(&self, a: &CMatrix<T>) -> Complex<T> {
        let q2 = self.q * self.q;
        (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            let idx = self.index(i, 0);
            acc + a[(idx, idx)] * Complex::new((T::one() - q2) * q2.powi(i as i32), T::zero())
        })
    }

    /// Schur multiplier on the `ℕ`-leg: entry `((i,j),(i',j'))` scaled by `f(i, i')`.
    pub fn schur_n_leg_with(&self, a: &CMatrix<T>, f: impl Fn(usize, usize) -> T) -> CMatrix<T> {
        let w = 2 * self.m + 1;
        CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] * Complex::new(f(r / w, c / w), T::zero()))
    }

    /// `Ψ_t`, the Schur multiplier with symbol `e^{−t(i−i')²}` on the `ℕ`-leg.
    pub fn schur_n_leg(&self, t: T, a: &CMatrix<T>) -> CMatrix<T> {
        self.schur_n_leg_with(a, |i, k| {
            let d = T::lit(i as f64 - k as f64);
            (-t * d * d).exp()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationDefects {
    pub interior: Vec<(String, f64)>,
    pub full: Vec<(String, f64)>,
}

impl RelationDefects {
    pub fn max_interior(&self) -> f64 {
        self.interior.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    pub fn max_full(&self) -> f64 {
        self.full.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

/// Operator norm: dense SVD up to [`DENSE_NORM_LIMIT`], restarted Lanczos on
/// `a* a` with relative tolerance `1e−10` beyond.
pub fn op_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.nrows().max(a.ncols()) <= DENSE_NORM_LIMIT {
        return linalg::spectral_norm(a);
    }
    lanczos_norm(a, T::lit(1e-10), 200)
}

/// Largest singular value via restarted Lanczos on `a* a` with full
/// reorthogonalisation. Each restart starts from the current top Ritz vector.
pub fn lanczos_norm<T: Real>(a: &CMatrix<T>, tol: T, max_restarts: usize) -> T {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return T::zero();
    }
    let ah = a.adjoint();
    let krylov = n.min(40);
    let zero = Complex::new(T::zero(), T::zero());
    let re = |x: T| Complex::new(x, T::zero());
    // deterministic start with full support
    let mut v = DVector::from_fn(n, |i, _| Complex::new(T::one() + T::lit(i as f64 * 1e-3), T::lit(0.5 / (1.0 + i as f64))));
    let mut lambda = T::zero();
    for _ in 0..max_restarts {
        let nv = v.norm();
        if nv == T::zero() {
            return lambda.sqrt();
        }
        v /= re(nv);
        let mut basis: Vec<DVector<Complex<T>>> = vec![v.clone()];
        let mut diag: Vec<T> = Vec::new();
        let mut off: Vec<T> = Vec::new();
        for k in 0..krylov {
            let mut w = &ah * (a * &basis[k]);
            diag.push(basis[k].dotc(&w).re);
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&w);
                    w -= b * c;
                }
            }
            let beta = w.norm();
            if k + 1 == krylov || beta <= T::eps() * T::lit(64.0) * diag[0].abs().max(T::one()) {
                break;
            }
            off.push(beta);
            basis.push(w / re(beta));
        }
        let m = diag.len();
        let t = nalgebra::DMatrix::<T>::from_fn(m, m, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                T::zero()
            }
        });
        let eig = nalgebra::SymmetricEigen::new(t);
        let (top, &theta) = eig.eigenvalues.iter().enumerate().fold((0, &eig.eigenvalues[0]), |acc, (i, e)| if *e > *acc.1 { (i, e) } else { acc });
        let y = eig.eigenvectors.column(top);
        let mut ritz = DVector::from_element(n, zero);
        for (b, c) in basis.iter().zip(y.iter()) {
            ritz += b * re(*c);
        }
        let done = (theta - lambda).abs() <= tol * theta.abs() || m < krylov;
        lambda = theta.max(lambda);
        v = ritz;
        if done {
            break;
        }
    }
    lambda.max(T::zero()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTrend {
    pub cutoffs: Vec<usize>,
    pub norms: Vec<f64>,
    pub monotone_increasing: bool,
}

/// `‖evaluate(x)‖` at several `ℕ`-cutoffs. No convergence claim is made.
pub fn norm_trend<T: Real>(x: &PolElement<Complex<T>>, q: T, m: usize, cutoffs: &[usize]) -> Result<NormTrend> {
    let mut norms = Vec::new();
    for &n in cutoffs {
        let rep = TruncRep::new(n, m, q)?;
        norms.push(op_norm(&rep.evaluate(x)).as_f64());
    }
    let monotone_increasing = norms.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok(NormTrend {
        cutoffs: cutoffs.to_vec(),
        norms,
        monotone_increasing,
    })
}

/// `S` equispaced points `z_s = e^{2πis/S}` on the circle.
#[derive(Clone, Debug)]
pub struct TorusSample<T: Real> {
    roots: Vec<Complex<T>>,
}

impl<T: Real> TorusSample<T> {
    pub fn new(s: usize) -> Result<Self> {
        if s < 256 || !s.is_power_of_two() {
            return Err(Error::Invalid(format!("torus sample count must be a power of two ≥ 256, got {s}")));
        }
        let roots = (0..s)
            .map(|k| {
                let a = T::two_pi() * T::lit(k as f64) / T::lit(s as f64);
                Complex::new(a.cos(), a.sin())
            })
            .collect();
        Ok(Self { roots })
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn point(&self, s: usize) -> Complex<T> {
        self.roots[s]
    }

    /// `ζ_k(z_s) = z_s^k`, read from the root table.
    pub fn zeta(&self, s: usize, k: i64) -> Complex<T> {
        let n = self.roots.len() as i64;
        self.roots[((s as i64 * k).rem_euclid(n)) as usize]
    }

    fn check_degree(&self, degree: i64) -> Result<()> {
        if 2 * degree >= self.len() as i64 {
            return Err(Error::Aliasing {
                degree,
                samples: self.len(),
            });
        }
        Ok(())
    }
}

/// Operator field sampled on a [`TorusSample`], with a bound on its `z`-degree.
#[derive(Clone, Debug)]
pub struct SampledField<T: Real> {
    pub samples: Vec<CMatrix<T>>,
    pub degree: i64,
}

impl<T: Real> SampledField<T> {
    /// `max_s ‖(F(z_s) − G(z_s)) P‖_F`, with `P` the interior projection if given.
    pub fn defect(&self, o: &Self, rep: Option<&TruncRep<T>>) -> f64 {
        self.samples
            .iter()
            .zip(&o.samples)
            .map(|(a, b)| {
                let d = a - b;
                match rep {
                    Some(r) => r.on_interior(&d).norm().as_f64(),
                    None => d.norm().as_f64(),
                }
            })
            .fold(0.0, f64::max)
    }
}

fn check_field_budget<T: Real>(rep: &TruncRep<T>, sample: &TorusSample<T>) -> Result<()> {
    let need = sample.len() * rep.dim() * rep.dim();
    if need > FIELD_ENTRY_CAP {
        return Err(Error::Budget(need, FIELD_ENTRY_CAP));
    }
    Ok(())
}

fn max_alpha_degree<C: crate::scalar::Coeff>(x: &PolElement<C>) -> i64 {
    x.terms().map(|(mono, _)| mono.k.abs()).max().unwrap_or(0)
}

#[derive(Clone, Debug)]
pub struct TransferenceField<T: Real> {
    pub field: SampledField<T>,
    /// Interior defect between the term-wise field and `U(z)* (x ⊗ 1) U(z)`.
    pub conjugation_defect: f64,
}

/// `π(x)` sampled on the circle: `z ↦ Σ c · evaluate(α^k γ^l (γ*)^m) z^k`,
/// checked against conjugation by `U(z) = diag(z^i) ⊗ I`.
pub fn transference_map<T: Real>(rep: &TruncRep<T>, sample: &TorusSample<T>, x: &PolElement<Complex<T>>) -> Result<TransferenceField<T>> {
    check_field_budget(rep, sample)?;
    let degree = max_alpha_degree(x);
    let mut by_k: BTreeMap<i64, PolElement<Complex<T>>> = BTreeMap::new();
    for (mono, c) in x.terms() {
        let e = by_k.entry(mono.k).or_default();
        *e = e.add(&PolElement::monomial(*mono, *c));
    }
    let pieces: Vec<(i64, CMatrix<T>)> = by_k.iter().map(|(k, p)| (*k, rep.evaluate(p))).collect();
    let whole = rep.evaluate(x);
    let dim = rep.dim();
    let w = 2 * rep.m + 1;
    let mut samples = Vec::with_capacity(sample.len());
    let mut defect = 0.0f64;
    for s in 0..sample.len() {
        let mut f = CMatrix::zeros(dim, dim);
        for (k, p) in &pieces {
            f += p.map(|v| v * sample.zeta(s, *k));
        }
        let conj = CMatrix::from_fn(dim, dim, |r, c| whole[(r, c)] * sample.zeta(s, (c / w) as i64 - (r / w) as i64));
        defect = defect.max(rep.on_interior(&(&f - conj)).norm().as_f64());
        samples.push(f);
    }
    if defect > 1e-10 {
        return Err(Error::Invalid(format!("transference field disagrees with U*(x⊗1)U on the interior ({defect:e})")));
    }
    Ok(TransferenceField {
        field: SampledField { samples, degree },
        conjugation_defect: defect,
    })
}

/// `(ι ⊗ T_m)` applied fiberwise: the `z`-coefficients of the field are
/// extracted by a discrete Fourier transform over the sample grid.
pub fn fiber_multiplier<T: Real>(sample: &TorusSample<T>, field: &SampledField<T>, symbol: &Symbol<T>) -> Result<SampledField<T>> {
    sample.check_degree(field.degree)?;
    let s_len = sample.len();
    let inv = Complex::new(T::one() / T::lit(s_len as f64), T::zero());
    let (r, c) = field.samples.first().map(|a| a.shape()).unwrap_or((0, 0));
    let mut coeffs = Vec::new();
    for n in -field.degree..=field.degree {
        let mut acc = CMatrix::zeros(r, c);
        for (s, f) in field.samples.iter().enumerate() {
            acc += f.map(|v| v * sample.zeta(s, -n));
        }
        coeffs.push((n, acc.map(|v| v * inv * symbol.eval(n))));
    }
    let samples = (0..s_len)
        .map(|s| {
            let mut f = CMatrix::zeros(r, c);
            for (n, a) in &coeffs {
                f += a.map(|v| v * sample.zeta(s, *n));
            }
            f
        })
        .collect();
    Ok(SampledField {
        samples,
        degree: field.degree,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwineReport {
    /// Interior defect of `(ι ⊗ T_m) π(x)` against `π(T̃_m x)`.
    pub defect: f64,
    pub conjugation_defect: f64,
    pub samples: usize,
    pub degree: i64,
}

/// Checks `(ι ⊗ T_m) π(x) = π(T̃_m x)`. For the heat symbol the right side is
/// built from the `Pol(SU_q(2))` heat semigroup, so this is `S_t ∘ π = π ∘ Φ_t`.
pub fn transference_intertwine<T: Real>(
    rep: &TruncRep<T>,
    sample: &TorusSample<T>,
    symbol: &Symbol<T>,
    x: &PolElement<Complex<T>>,
) -> Result<IntertwineReport> {
    let alg = SUq2::numeric(rep.q())?;
    let px = transference_map(rep, sample, x)?;
    let lhs = fiber_multiplier(sample, &px.field, symbol)?;
    let image = match symbol {
        Symbol::Heat(t) => alg.heat_phi(*t, x)?,
        _ => alg.fourier_schur(|k| symbol.eval(k), x),
    };
    let rhs = transference_map(rep, sample, &image)?;
    Ok(IntertwineReport {
        defect: lhs.defect(&rhs.field, Some(rep)),
        conjugation_defect: px.conjugation_defect.max(rhs.conjugation_defect),
        samples: sample.len(),
        degree: px.field.degree,
    })
}

/// Element of `Pol(SU_q(2)) ⊗ Pol(T)`: combination of `α^k γ^l (γ*)^m ⊗ ζ_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolTorusField<T: Real> {
    terms: BTreeMap<(Monomial, i64), Complex<T>>,
}

impl<T: Real> Default for PolTorusField<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> PolTorusField<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn from_terms(it: impl IntoIterator<Item = ((Monomial, i64), Complex<T>)>) -> Self {
        let mut out = Self::zero();
        for (key, c) in it {
            out.accumulate(key, c);
        }
        out
    }

    fn accumulate(&mut self, key: (Monomial, i64), c: Complex<T>) {
        let zero = Complex::new(T::zero(), T::zero());
        if c == zero {
            return;
        }
        let e = self.terms.entry(key).or_insert(zero);
        *e += c;
        if *e == zero {
            self.terms.remove(&key);
        }
    }

    /// `x ⊗ ζ_n`.
    pub fn tensor(x: &PolElement<Complex<T>>, n: i64) -> Self {
        Self::from_terms(x.terms().map(|(mono, c)| ((*mono, n), *c)))
    }

    /// `π(x) = Σ c · α^k γ^l (γ*)^m ⊗ ζ_k`.
    pub fn transference(x: &PolElement<Complex<T>>) -> Self {
        Self::from_terms(x.terms().map(|(mono, c)| ((*mono, mono.k), *c)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Monomial, i64), &Complex<T>)> + '_ {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|(_, n)| n.abs()).max().unwrap_or(0)
    }

    /// The `ζ_n`-coefficient.
    pub fn coefficient(&self, n: i64) -> PolElement<Complex<T>> {
        PolElement::from_terms(self.terms().filter(|((_, m), _)| *m == n).map(|((mono, _), c)| (*mono, *c)))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (key, c) in o.terms() {
            out.accumulate(*key, *c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (key, c) in o.terms() {
            out.accumulate(*key, -*c);
        }
        out
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_terms(self.terms().map(|(key, c)| (*key, *c * s)))
    }

    pub fn mul(&self, alg: &SUq2<Complex<T>>, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((a, n), ca) in self.terms() {
            for ((b, m), cb) in o.terms() {
                for (mono, c) in alg.mul_monomials(a, b) {
                    out.accumulate((mono, n + m), *ca * *cb * c);
                }
            }
        }
        out
    }

    pub fn adjoint(&self, alg: &SUq2<Complex<T>>) -> Self {
        let mut out = Self::zero();
        for ((mono, n), c) in self.terms() {
            let a = alg.adjoint(&PolElement::monomial(*mono, Complex::new(T::one(), T::zero())));
            for (m2, c2) in a.terms() {
                out.accumulate((*m2, -n), c.conj() * *c2);
            }
        }
        out
    }

    /// `(ι ⊗ T_m)`: scales `x ⊗ ζ_n` by `m(n)`.
    pub fn torus_multiplier(&self, symbol: &Symbol<T>) -> Self {
        Self::from_terms(self.terms().map(|(key, c)| (*key, *c * symbol.eval(key.1))))
    }

    /// Coefficient matrices `evaluate(X_n)` in the truncation.
    pub fn evaluate_coefficients(&self, rep: &TruncRep<T>) -> Vec<(i64, CMatrix<T>)> {
        let mut ns: Vec<i64> = self.terms.keys().map(|(_, n)| *n).collect();
        ns.dedup();
        ns.sort_unstable();
        ns.dedup();
        ns.into_iter().map(|n| (n, rep.evaluate(&self.coefficient(n)))).collect()
    }

    /// `max_s ‖X(z_s)‖` with `X(z) = Σ_n evaluate(X_n) z^n`.
    pub fn sup_norm(&self, rep: &TruncRep<T>, sample: &TorusSample<T>) -> Result<T> {
        sample.check_degree(self.degree())?;
        let coeffs = self.evaluate_coefficients(rep);
        let mut best = T::zero();
        for s in 0..sample.len() {
            let mut f = CMatrix::zeros(rep.dim(), rep.dim());
            for (n, a) in &coeffs {
                f += a.map(|v| v * sample.zeta(s, *n));
            }
            best = best.max(op_norm(&f));
        }
        Ok(best)
    }
}

/// `S_t = ι ⊗ T_{h_t}` on `Pol(SU_q(2)) ⊗ Pol(T)`, with sup norms over the
/// truncation and the sample grid.
#[derive(Clone, Debug)]
pub struct TensorHeat<T: Real> {
    pub alg: SUq2<Complex<T>>,
    pub rep: TruncRep<T>,
    pub sample: TorusSample<T>,
}

impl<T: Real> TensorHeat<T> {
    pub fn new(rep: TruncRep<T>, sample: TorusSample<T>) -> Result<Self> {
        Ok(Self {
            alg: SUq2::numeric(rep.q())?,
            rep,
            sample,
        })
    }
}

impl<T: Real> MarkovSemigroup<T> for TensorHeat<T> {
    type Elem = PolTorusField<T>;

    fn apply(&self, t: T, x: &Self::Elem) -> Self::Elem {
        x.torus_multiplier(&Symbol::heat(t))
    }

    fn fixed_point(&self, x: &Self::Elem) -> Self::Elem {
        PolTorusField::tensor(&x.coefficient(0), 0)
    }

    fn adjoint(&self, x: &Self::Elem) -> Self::Elem {
        x.adjoint(&self.alg)
    }

    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        x.mul(&self.alg, y)
    }

    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        x.sub(y)
    }

    fn scale(&self, c: Complex<T>, x: &Self::Elem) -> Self::Elem {
        x.scale(c)
    }

    fn uniform_norm(&self, x: &Self::Elem) -> Result<T> {
        x.sup_norm(&self.rep, &self.sample)
    }
}

/// `‖X‖_{BMO_S}` for a polynomial field over `Pol(SU_q(2)) ⊗ Pol(T)`.
pub fn bmo_s_norm<T: Real>(heat: &TensorHeat<T>, grid: &TGrid, x: &PolTorusField<T>) -> Result<BmoPair> {
    // |X − S_t X|² has twice the degree of X
    heat.sample.check_degree(2 * x.degree())?;
    bmo_norm(heat, x, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2BoundReport {
    pub norm: f64,
    /// `max |m(k)|` over the strata present in the span.
    pub strata_max: f64,
    pub sup_norm: f64,
    pub strata: Vec<i64>,
    pub holds: bool,
}

/// Operator norm of `T̃_m` on `span{u^(l)_ij : l ≤ l_max}` in the GNS norm,
/// from the exact Gram data evaluated at `q`.
pub fn l2_multiplier_bound<T: Real>(q: T, symbol: &Symbol<T>, l_max: HalfInt) -> Result<L2BoundReport> {
    if l_max.twice() > 6 {
        return Err(Error::LabelBudget(l_max.to_string(), "3".into()));
    }
    SUq2::numeric(q)?;
    let r = StrataGram::cached(l_max)?.multiplier_norm(q, |k| symbol.eval(k))?;
    let sup = symbol.sup_norm();
    let (norm, strata_max, sup_norm) = (r.norm.as_f64(), r.strata_max.as_f64(), sup.as_f64());
    let slack = 1e-9 * strata_max.max(1.0);
    Ok(L2BoundReport {
        norm,
        strata_max,
        sup_norm,
        strata: r.strata,
        holds: norm <= strata_max + slack && strata_max <= sup_norm + slack,
    })
}
