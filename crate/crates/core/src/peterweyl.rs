//! Irreducible corepresentations `u^(l)` of `SU_q(2)`.
//!
//! The spin-`l` corepresentation acts on the span of the homogeneous
//! degree-`2l` monomials `g_k = α^{l−k} γ^{l+k}`; its matrix is read off by
//! expanding `Δ(g_i)` and collecting the coefficient of each second leg `g_j`.

use crate::error::{Error, Result};
use crate::polalg::{Monomial, PolElement, SUq2};
use crate::scalar::Coeff;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Spin label; requires `2l ≥ 0`.
    pub fn spin(twice: i64) -> Result<Self> {
        if twice < 0 {
            return Err(Error::HalfInteger(format!("spin label {}/2 is negative", twice)));
        }
        Ok(Self(twice))
    }

    /// All spins `0, 1/2, …, max`.
    pub fn spins_up_to(max: HalfInt) -> impl Iterator<Item = HalfInt> {
        (0..=max.0).map(HalfInt)
    }

    /// The indices `−l, −l+1, …, l`.
    pub fn indices(self) -> impl Iterator<Item = HalfInt> {
        let t = self.0;
        (0..=t).map(move |a| HalfInt(2 * a - t))
    }

    pub fn dim(self) -> usize {
        (self.0 + 1) as usize
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::HalfInteger(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            if d.trim() != "2" {
                return Err(bad());
            }
            Ok(HalfInt(n))
        } else if let Ok(n) = s.parse::<i64>() {
            Ok(HalfInt(2 * n))
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            let t = 2.0 * x;
            if t.fract() != 0.0 || !t.is_finite() {
                return Err(bad());
            }
            Ok(HalfInt(t as i64))
        }
    }
}

fn check_index(l: HalfInt, k: HalfInt) -> Result<()> {
    if l.0 < 0 || k.0.abs() > l.0 || (l.0 - k.0) % 2 != 0 {
        return Err(Error::HalfInteger(format!("index {k} is not in {{-{l}, …, {l}}}")));
    }
    Ok(())
}

/// Exponents `(l − k, l + k)` of the basis monomial `g_k`.
fn basis_exponents(l: HalfInt, k: HalfInt) -> (i64, u32) {
    ((l.0 - k.0) / 2, ((l.0 + k.0) / 2) as u32)
}

/// `g^(l)_k = α^{l−k} γ^{l+k}` (unit normalization).
pub fn basis_vector<C: Coeff>(alg: &SUq2<C>, l: HalfInt, k: HalfInt) -> Result<PolElement<C>> {
    check_index(l, k)?;
    let (a, g) = basis_exponents(l, k);
    Ok(alg.mono(a, g, 0))
}

/// The matrix `u^(l)` with rows and columns indexed by `−l, …, l`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorepMatrix<C> {
    l: HalfInt,
    entries: Vec<Vec<PolElement<C>>>,
}

impl<C: Coeff> CorepMatrix<C> {
    pub fn l(&self) -> HalfInt {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    fn pos(&self, i: HalfInt) -> usize {
        ((i.0 + self.l.0) / 2) as usize
    }

    pub fn entry(&self, i: HalfInt, j: HalfInt) -> &PolElement<C> {
        &self.entries[self.pos(i)][self.pos(j)]
    }

    /// Entries by zero-based position.
    pub fn at(&self, a: usize, b: usize) -> &PolElement<C> {
        &self.entries[a][b]
    }

    /// `(i, j, u_ij)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (HalfInt, HalfInt, &PolElement<C>)> + '_ {
        self.l
            .indices()
            .flat_map(move |i| self.l.indices().map(move |j| (i, j, self.entry(i, j))))
    }

    /// Every monomial of `u_ij` has `k = −(i + j)`.
    pub fn check_strata(&self) -> Result<()> {
        for (i, j, e) in self.iter() {
            let want = -(i.0 + j.0) / 2;
            if let Some((mono, _)) = e.terms().find(|(mono, _)| mono.k != want) {
                return Err(Error::Invalid(format!(
                    "entry ({i},{j}) contains {mono}, expected α-power {want}"
                )));
            }
        }
        Ok(())
    }

    pub fn map_entries<D: Coeff>(&self, f: impl Fn(&PolElement<C>) -> PolElement<D>) -> CorepMatrix<D> {
        CorepMatrix {
            l: self.l,
            entries: self.entries.iter().map(|row| row.iter().map(&f).collect()).collect(),
        }
    }
}

impl CorepMatrix<crate::QScalar> {
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|row| serde_json::Value::Array(row.iter().map(|e| e.to_json()).collect()))
            .collect();
        serde_json::json!({ "l": self.l.to_string(), "entries": rows })
    }
}

/// Builds `u^(l)` by expanding `Δ(g_i)` and matching second legs.
pub fn corep_matrix<C: Coeff>(alg: &SUq2<C>, l: HalfInt) -> Result<CorepMatrix<C>> {
    let l = HalfInt::spin(l.0)?;
    let n = l.dim();
    let second: Vec<Monomial> = l
        .indices()
        .map(|j| {
            let (a, g) = basis_exponents(l, j);
            Monomial::new(a, g, 0)
        })
        .collect();
    let mut entries = vec![vec![PolElement::zero(); n]; n];
    for (row, i) in l.indices().enumerate() {
        let d = alg.comultiply(&basis_vector(alg, l, i)?);
        for (key, _) in d.terms() {
            if !second.contains(&key[1]) {
                return Err(Error::UnexpectedSecondLeg(format!(
                    "Δ(g_{i}) has second leg {} outside the spin-{l} basis",
                    key[1]
                )));
            }
        }
        for (col, mono) in second.iter().enumerate() {
            entries[row][col] = d.first_leg_coefficient(mono);
        }
    }
    Ok(CorepMatrix { l, entries })
}

/// Gram matrix of the GNS inner product between all entries of two
/// corepresentations, in row-major entry order.
#[derive(Clone, Debug)]
pub struct OrthogonalityReport<C> {
    pub l: HalfInt,
    pub l2: HalfInt,
    /// `gram[(a,b)][(r,s)] = φ(u_ab* u'_rs)` with row-major flattening.
    pub gram: Vec<Vec<C>>,
    /// Every entry off the `δ_{l,l'} δ_{i,r} δ_{j,s}` pattern is exactly zero.
    pub delta_pattern: bool,
    /// `φ(u_ij* u_ij)` for `l = l'`, indexed by position.
    pub diagonal: Option<Vec<Vec<C>>>,
}

/// Computes the cross Gram matrix of `u` and `v`.
pub fn orthogonality_gram<C: Coeff>(
    alg: &SUq2<C>,
    u: &CorepMatrix<C>,
    v: &CorepMatrix<C>,
) -> OrthogonalityReport<C> {
    let xs: Vec<&PolElement<C>> = u.entries.iter().flatten().collect();
    let ys: Vec<&PolElement<C>> = v.entries.iter().flatten().collect();
    let same = u.l == v.l;
    let mut gram = vec![vec![C::zero(); ys.len()]; xs.len()];
    let mut delta_pattern = true;
    for (a, x) in xs.iter().enumerate() {
        for (b, y) in ys.iter().enumerate() {
            let g = alg.gns_inner(x, y);
            if !(same && a == b) && !g.is_zero() {
                delta_pattern = false;
            }
            gram[a][b] = g;
        }
    }
    let diagonal = same.then(|| {
        let n = u.dim();
        (0..n)
            .map(|i| (0..n).map(|j| gram[i * n + j][i * n + j].clone()).collect())
            .collect()
    });
    OrthogonalityReport {
        l: u.l,
        l2: v.l,
        gram,
        delta_pattern,
        diagonal,
    }
}

/// Applies `T_m` to every entry and checks `T_m u_ij = m(−i−j) u_ij`.
/// Returns the table of `−i−j`.
pub fn eigenvalue_check<C: Coeff>(
    alg: &SUq2<C>,
    u: &CorepMatrix<C>,
    symbol: impl Fn(i64) -> C,
) -> Result<Vec<Vec<i64>>> {
    let n = u.dim();
    let mut table = vec![vec![0i64; n]; n];
    for (i, j, e) in u.iter() {
        let k = -(i.0 + j.0) / 2;
        let lhs = alg.fourier_schur(&symbol, e);
        let rhs = e.scale(&symbol(k));
        if lhs != rhs {
            return Err(Error::Invalid(format!(
                "T_m u_({i},{j}) is not m({k}) u_({i},{j})"
            )));
        }
        table[u.pos(i)][u.pos(j)] = k;
    }
    Ok(table)
}

/// Normalization recovered from the Gram diagonal `D_ij = φ(u_ij* u_ij)`.
///
/// With `g_k = C_k α^{l−k} γ^{l+k}` the entries rescale as
/// `u_ij ↦ (C_i/C_j) u_ij`, so the diagonal becomes `(ρ_i/ρ_j) D_ij` with
/// `ρ_j = C_j²`. A normalization making it depend on `i` alone exists exactly
/// when `D_ij = a_i b_j`; then `ρ_j = b_j / b_{−l}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization<C> {
    /// `ρ_j = C_j²`, with `ρ_{−l} = 1`.
    pub rho: Vec<C>,
    /// `C_i^(l) = φ(v_ij* v_ij)` for the rescaled matrix `v`, independent of `j`.
    pub constants: Vec<C>,
}

/// Returns `None` if no normalization makes the diagonal independent of `j`.
pub fn derive_normalization<C: Coeff>(diagonal: &[Vec<C>]) -> Option<Normalization<C>> {
    let n = diagonal.len();
    let d0 = &diagonal[0];
    if d0[0].is_zero() {
        return None;
    }
    let rho: Vec<C> = (0..n).map(|j| d0[j].clone() / d0[0].clone()).collect();
    for row in diagonal {
        for j in 0..n {
            if row[j] != row[0].clone() * rho[j].clone() {
                return None;
            }
        }
    }
    let constants = (0..n).map(|i| rho[i].clone() * diagonal[i][0].clone()).collect();
    Some(Normalization { rho, constants })
}

/// Whether the unit-normalized diagonal already depends on `i` only.
pub fn raw_constants_row_only<C: Coeff>(diagonal: &[Vec<C>]) -> bool {
    diagonal.iter().all(|row| row.iter().all(|d| *d == row[0]))
}

/// Exact unitarity of `v_ij = (C_i/C_j) u_ij` without square roots:
/// `Σ_i ρ_i u_ij* u_ik = δ_jk ρ_j` and `Σ_j ρ_j^{-1} u_ij u_kj* = δ_ik ρ_i^{-1}`.
/// Returns the index pairs whose defect is nonzero.
pub fn unitarity_defects<C: Coeff>(
    alg: &SUq2<C>,
    u: &CorepMatrix<C>,
    rho: &[C],
) -> Vec<(usize, usize)> {
    let n = u.dim();
    let mut bad = Vec::new();
    let adj: Vec<Vec<PolElement<C>>> = u
        .entries
        .iter()
        .map(|row| row.iter().map(|e| alg.adjoint(e)).collect())
        .collect();
    for j in 0..n {
        for k in 0..n {
            let mut s = PolElement::zero();
            for i in 0..n {
                s = s.add(&alg.mul(&adj[i][j], &u.entries[i][k]).scale(&rho[i]));
            }
            if j == k {
                s = s.sub(&PolElement::scalar(rho[j].clone()));
            }
            if !s.is_zero() {
                bad.push((j, k));
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            let mut s = PolElement::zero();
            for j in 0..n {
                let w = C::one() / rho[j].clone();
                s = s.add(&alg.mul(&u.entries[i][j], &adj[k][j]).scale(&w));
            }
            if i == k {
                s = s.sub(&PolElement::scalar(C::one() / rho[i].clone()));
            }
            if !s.is_zero() {
                bad.push((n + i, n + k));
            }
        }
    }
    bad
}

/// Operator norm of a Fourier–Schur multiplier on `span{u^(l)_ij : l ≤ max}`
/// in the GNS norm, computed without the eigenvalue law: the multiplier is
/// applied monomial-wise and the norm is a generalized eigenvalue of the two
/// Gram matrices. Floating-point Gram entries lose all accuracy for small `|q|`
/// at `l = 3` (e.g. `q = 0.3`); [`StrataGram`] is the robust path.
#[derive(Clone, Debug)]
pub struct L2Report<T> {
    pub norm: T,
    /// `max |m(k)|` over the α-strata present in the span.
    pub strata_max: T,
    pub strata: Vec<i64>,
}

pub fn multiplier_l2_norm<T: crate::Real>(
    alg: &SUq2<num_complex::Complex<T>>,
    max_l: HalfInt,
    symbol: impl Fn(i64) -> num_complex::Complex<T>,
) -> Result<L2Report<T>> {
    use crate::scalar::CMatrix;
    let mut family = Vec::new();
    for l in HalfInt::spins_up_to(max_l) {
        let u = corep_matrix(alg, l)?;
        family.extend(u.entries.into_iter().flatten());
    }
    let images: Vec<_> = family.iter().map(|x| alg.fourier_schur(&symbol, x)).collect();
    let n = family.len();
    let g = CMatrix::from_fn(n, n, |a, b| alg.gns_inner(&family[a], &family[b]));
    let h = CMatrix::from_fn(n, n, |a, b| alg.gns_inner(&images[a], &images[b]));
    let norm = crate::linalg::generalized_max_eig(&h, &g)?.max(T::zero()).sqrt();
    let mut strata: Vec<i64> = family.iter().flat_map(|x| x.strata()).collect();
    strata.sort_unstable();
    strata.dedup();
    let strata_max = strata
        .iter()
        .map(|k| nalgebra::ComplexField::modulus(symbol(*k)))
        .fold(T::zero(), |m, v| if v > m { v } else { m });
    Ok(L2Report {
        norm,
        strata_max,
        strata,
    })
}

/// Exact GNS Gram data of all entries with `l ≤ max_l`, split by α-stratum.
///
/// The Haar state vanishes off the zero stratum, so `⟨x, y⟩ = Σ_k ⟨x_k, y_k⟩`
/// and a Fourier–Schur multiplier acts on the Gram form stratum by stratum.
/// Evaluating exact entries at a numeric `q` avoids the cancellation that the
/// `q^{−kl}` coefficients of the α-leftmost normal form cause in floating point.
#[derive(Clone, Debug)]
pub struct StrataGram {
    pub max_l: HalfInt,
    pub strata: Vec<i64>,
    size: usize,
    /// `(k, a, b, φ(x_{a,k}* x_{b,k}))` for nonzero entries with `a ≤ b`.
    entries: Vec<(i64, usize, usize, crate::QScalar)>,
}

impl StrataGram {
    pub fn new(max_l: HalfInt) -> Result<Self> {
        let alg = SUq2::exact();
        let mut family = Vec::new();
        for l in HalfInt::spins_up_to(max_l) {
            family.extend(corep_matrix(&alg, l)?.entries.into_iter().flatten());
        }
        let mut strata: Vec<i64> = family.iter().flat_map(|x| x.strata()).collect();
        strata.sort_unstable();
        strata.dedup();
        let mut entries = Vec::new();
        for &k in &strata {
            let parts: Vec<(usize, PolElement<crate::QScalar>)> = family
                .iter()
                .enumerate()
                .map(|(a, x)| (a, x.stratum(k)))
                .filter(|(_, x)| !x.is_zero())
                .collect();
            for (i, (a, x)) in parts.iter().enumerate() {
                for (b, y) in &parts[i..] {
                    let g = alg.gns_inner(x, y);
                    if !num_traits::Zero::is_zero(&g) {
                        entries.push((k, *a, *b, g));
                    }
                }
            }
        }
        Ok(Self {
            max_l,
            strata,
            size: family.len(),
            entries,
        })
    }

    /// Shared instance per `max_l`; the exact Gram data does not depend on `q`.
    pub fn cached(max_l: HalfInt) -> Result<std::sync::Arc<Self>> {
        use std::collections::HashMap;
        use std::sync::{Arc, Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<HashMap<i64, Arc<StrataGram>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.lock().expect("cache lock").get(&max_l.twice()) {
            return Ok(g.clone());
        }
        let g = Arc::new(Self::new(max_l)?);
        cache.lock().expect("cache lock").insert(max_l.twice(), g.clone());
        Ok(g)
    }

    /// Number of matrix entries in the span.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `‖T̃_m‖` on the span at a numeric `q`, as a generalized eigenvalue of
    /// the evaluated Gram forms.
    pub fn multiplier_norm<T: crate::Real>(
        &self,
        q: T,
        symbol: impl Fn(i64) -> num_complex::Complex<T>,
    ) -> Result<L2Report<T>> {
        use crate::scalar::CMatrix;
        use nalgebra::ComplexField;
        use num_complex::Complex;
        let n = self.size;
        let zero = Complex::new(T::zero(), T::zero());
        let mut g = CMatrix::from_element(n, n, zero);
        let mut h = CMatrix::from_element(n, n, zero);
        for (k, a, b, v) in &self.entries {
            let x = v.eval(q).ok_or(Error::InvalidQ(q.as_f64()))?;
            let w = symbol(*k).modulus_squared();
            for (r, c) in [(*a, *b), (*b, *a)] {
                g[(r, c)] += Complex::new(x, T::zero());
                h[(r, c)] += Complex::new(x * w, T::zero());
                if a == b {
                    break;
                }
            }
        }
        let norm = crate::linalg::generalized_max_eig(&h, &g)?.max(T::zero()).sqrt();
        let strata_max = self
            .strata
            .iter()
            .map(|k| symbol(*k).modulus())
            .fold(T::zero(), |m, v| if v > m { v } else { m });
        Ok(L2Report {
            norm,
            strata_max,
            strata: self.strata.clone(),
        })
    }
}

/// Smallest eigenvalue of the diagonally normalized Gram matrix of all
/// entries with `l ≤ max_l`; positive iff the entries are linearly independent.
pub fn independence_margin<T: crate::Real>(
    alg: &SUq2<num_complex::Complex<T>>,
    max_l: HalfInt,
) -> Result<T> {
    use crate::scalar::CMatrix;
    let mut family = Vec::new();
    for l in HalfInt::spins_up_to(max_l) {
        family.extend(corep_matrix(alg, l)?.entries.into_iter().flatten());
    }
    let n = family.len();
    let g = CMatrix::from_fn(n, n, |a, b| alg.gns_inner(&family[a], &family[b]));
    let d: Vec<T> = (0..n).map(|i| g[(i, i)].re.sqrt()).collect();
    let s = CMatrix::from_fn(n, n, |a, b| g[(a, b)] / num_complex::Complex::new(d[a] * d[b], T::zero()));
    Ok(crate::linalg::min_eig(&s))
}
