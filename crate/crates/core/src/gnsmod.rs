//! GNS `L_p`-modules `L_p(M ⊗_Φ M)` over a matrix algebra, at the dense
//! algebraic level: elements are finite lists `Σ a_i ⊗ b_i`.

use crate::error::{Error, Result};
use crate::fdlp::{Exponent, FdAlgebra, LpVector};
use crate::linalg::{self, Eigh};
use crate::scalar::{max_abs, CMatrix, Real};
use nalgebra::ComplexField;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Relative eigenvalue floor for supports and null spaces.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// The map `Φ` behind a module.
#[derive(Clone, Debug)]
pub enum UcpKind<T: Real> {
    /// `Φ(x) = s ∘ x` (entrywise).
    Schur(CMatrix<T>),
    /// `Φ(x) = λ x + (1 − λ) φ(x) I`.
    Depolarizing(T),
    /// `Φ(x) = Σ K_i* x K_i`.
    Kraus(Vec<CMatrix<T>>),
}

/// A ucp, φ-preserving map commuting with the modular group, checked at
/// registration.
#[derive(Clone, Debug)]
pub struct ModularUcp<T: Real> {
    alg: FdAlgebra<T>,
    kind: UcpKind<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcpDefects {
    pub choi_min_eig: f64,
    pub unitality: f64,
    pub state_preservation: f64,
    pub modularity: f64,
}

impl<T: Real> ModularUcp<T> {
    pub fn new(alg: FdAlgebra<T>, kind: UcpKind<T>) -> Result<Self> {
        let out = Self { alg, kind };
        let n = out.alg.dim();
        match &out.kind {
            UcpKind::Schur(s) if s.nrows() != n || s.ncols() != n => {
                return Err(Error::Dimension("Schur symbol size".into()));
            }
            UcpKind::Kraus(ks) if ks.iter().any(|k| k.nrows() != n || k.ncols() != n) => {
                return Err(Error::Dimension("Kraus operator size".into()));
            }
            _ => {}
        }
        let d = out.defects();
        let tol = 1e-10;
        if d.choi_min_eig < -tol {
            return Err(Error::Invalid(format!("map is not completely positive (Choi λ_min = {:e})", d.choi_min_eig)));
        }
        if d.unitality > tol {
            return Err(Error::Invalid(format!("map is not unital (defect {:e})", d.unitality)));
        }
        if d.state_preservation > tol {
            return Err(Error::Invalid(format!("map does not preserve the state (defect {:e})", d.state_preservation)));
        }
        if d.modularity > tol {
            return Err(Error::NotModularInvariant(d.modularity));
        }
        Ok(out)
    }

    pub fn depolarizing(alg: FdAlgebra<T>, lambda: T) -> Result<Self> {
        Self::new(alg, UcpKind::Depolarizing(lambda))
    }

    pub fn schur(alg: FdAlgebra<T>, symbol: CMatrix<T>) -> Result<Self> {
        Self::new(alg, UcpKind::Schur(symbol))
    }

    pub fn algebra(&self) -> &FdAlgebra<T> {
        &self.alg
    }

    pub fn kind(&self) -> &UcpKind<T> {
        &self.kind
    }

    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        match &self.kind {
            UcpKind::Schur(s) => x.component_mul(s),
            UcpKind::Depolarizing(l) => {
                let phi = self.alg.state(x) * Complex::new(T::one() - *l, T::zero());
                x.map(|v| v * Complex::new(*l, T::zero())) + linalg::identity::<T>(x.nrows()).map(|v| v * phi)
            }
            UcpKind::Kraus(ks) => ks.iter().fold(CMatrix::zeros(x.nrows(), x.ncols()), |acc, k| acc + k.adjoint() * x * k),
        }
    }

    /// `Φ^(p)` on an embedded element: `κ ∘ Φ ∘ κ^{−1}`.
    pub fn apply_lp(&self, v: &LpVector<T>) -> LpVector<T> {
        let a = self.alg.unembed(v);
        self.alg.embed(&self.apply(&a), v.p, v.z)
    }

    pub fn defects(&self) -> UcpDefects {
        let n = self.alg.dim();
        let mut choi = CMatrix::zeros(n * n, n * n);
        let mut modularity = T::zero();
        let mut state = T::zero();
        for a in 0..n {
            for b in 0..n {
                let mut e = CMatrix::zeros(n, n);
                e[(a, b)] = Complex::new(T::one(), T::zero());
                let fe = self.apply(&e);
                choi.view_mut((a * n, b * n), (n, n)).copy_from(&fe);
                state = state.max((self.alg.state(&fe) - self.alg.state(&e)).modulus());
                for t in [T::lit(0.3), T::lit(1.1)] {
                    let l = self.apply(&self.alg.modular_group(t, &e));
                    let r = self.alg.modular_group(t, &fe);
                    modularity = modularity.max(max_abs(&(l - r)));
                }
            }
        }
        let id = linalg::identity::<T>(n);
        UcpDefects {
            choi_min_eig: linalg::min_eig(&choi).as_f64(),
            unitality: max_abs(&(self.apply(&id) - id)).as_f64(),
            state_preservation: state.as_f64(),
            modularity: modularity.as_f64(),
        }
    }
}

/// `Σ a_i ⊗ b_i ∈ M ⊗ M`.
#[derive(Clone, Debug, PartialEq)]
pub struct GnsElement<T: Real> {
    pub terms: Vec<(CMatrix<T>, CMatrix<T>)>,
}

impl<T: Real> GnsElement<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn simple(a: CMatrix<T>, b: CMatrix<T>) -> Self {
        Self { terms: vec![(a, b)] }
    }

    /// `1 ⊗ 1`.
    pub fn unit(n: usize) -> Self {
        Self::simple(linalg::identity(n), linalg::identity(n))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, b)| (a.clone(), b.map(|v| v * c))).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex::new(-T::one(), T::zero())))
    }

    /// `z (1 ⊗ c)`.
    pub fn right_mul(&self, c: &CMatrix<T>) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, b)| (a.clone(), b * c)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, len: usize) -> Self {
        Self {
            terms: (0..len)
                .map(|_| (linalg::random_matrix(rng, n, n), linalg::random_matrix(rng, n, n)))
                .collect(),
        }
    }
}

/// `⟨z, z'⟩_∞ = Σ b_i* Φ(a_i* a'_j) b'_j`.
pub fn bracket_inf<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, w: &GnsElement<T>) -> CMatrix<T> {
    let n = phi.alg.dim();
    let mut out = CMatrix::zeros(n, n);
    for (a, b) in &z.terms {
        for (a2, b2) in &w.terms {
            out += b.adjoint() * phi.apply(&(a.adjoint() * a2)) * b2;
        }
    }
    out
}

fn half_t<T: Real>(p: Exponent<T>) -> Exponent<T> {
    match p {
        Exponent::Finite(v) => Exponent::Finite(v / T::lit(2.0)),
        Exponent::Infinity => Exponent::Infinity,
    }
}

/// `⟨z, z'⟩_{p/2} = κ^(0)_{p/2}(⟨z, z'⟩_∞) = D^{1/p} ⟨z, z'⟩_∞ D^{1/p}`.
pub fn gns_bracket<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, w: &GnsElement<T>, p: Exponent<T>) -> LpVector<T> {
    phi.alg.embed(&bracket_inf(phi, z, w), half_t(p), T::zero())
}

/// `‖z‖_{p,Φ} = ‖⟨z, z⟩_{p/2}‖_{p/2}^{1/2}`.
pub fn module_norm<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, p: Exponent<T>) -> T {
    gns_bracket(phi, z, z, p).norm().max(T::zero()).sqrt()
}

/// `z · a = z (1 ⊗ σ_{−i/p}(a))` with `σ_{−i/p}(a) = D^{1/p} a D^{−1/p}`.
pub fn right_action<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, a: &CMatrix<T>, p: Exponent<T>) -> GnsElement<T> {
    let s = p.inv();
    let c = phi.alg.d_pow(s) * a * phi.alg.d_pow(-s);
    z.right_mul(&c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `‖T‖` for `⟨z,z'⟩ = ⟨z,z⟩^{1/2} T ⟨z',z'⟩^{1/2}`.
    pub contraction_norm: f64,
    /// `‖⟨z,z⟩^{1/2} T ⟨z',z'⟩^{1/2} − ⟨z,z'⟩‖_max`.
    pub factor_defect: f64,
    /// Some square root was singular and a pseudo-inverse was used.
    pub rank_deficient: bool,
}

fn support_sqrt<T: Real>(x: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>, bool) {
    let e = Eigh::new(x);
    let floor = T::lit(SUPPORT_FLOOR) * e.max().abs().max(T::lit(1e-300));
    let deficient = e.min() <= floor;
    let root = e.apply(|l| Complex::new(l.max(T::zero()).sqrt(), T::zero()));
    let pinv = e.apply(|l| {
        if l <= floor {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::one() / l.sqrt(), T::zero())
        }
    });
    (root, pinv, deficient)
}

pub fn cauchy_schwarz_factor<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, w: &GnsElement<T>, p: Exponent<T>) -> CauchySchwarzReport {
    let zw = gns_bracket(phi, z, w, p);
    let zz = gns_bracket(phi, z, z, p);
    let ww = gns_bracket(phi, w, w, p);
    let lhs = zw.norm().as_f64();
    let rhs = (zz.norm().as_f64() * ww.norm().as_f64()).max(0.0).sqrt();
    let (rz, iz, dz) = support_sqrt(&zz.carrier);
    let (rw, iw, dw) = support_sqrt(&ww.carrier);
    let t = &iz * &zw.carrier * &iw;
    let factor_defect = max_abs(&(&rz * &t * &rw - &zw.carrier)).as_f64();
    CauchySchwarzReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
        contraction_norm: linalg::spectral_norm(&t).as_f64(),
        factor_defect,
        rank_deficient: dz || dw,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    /// `‖⟨Ψ_p x, Ψ_p y⟩_{p/2} − Φ^(p/2)(X* Y)‖_max`, only for `p ≥ 2`.
    pub product_defect: Option<f64>,
    /// `‖⟨Ψ_p x, z⟩_{p/2} − Σ Φ^(p)(X* a_j) b_j D^{1/p}‖_max`.
    pub mixed_defect: f64,
}

/// Checks both `Ψ_p` identities for `X = κ^(1)_p(x)`, `Y = κ^(1)_p(y)`, where
/// `Ψ_p(X) = x ⊗ 1`.
pub fn psi_embedding_check<T: Real>(
    phi: &ModularUcp<T>,
    x: &CMatrix<T>,
    y: &CMatrix<T>,
    z: &GnsElement<T>,
    p: T,
) -> Result<PsiReport> {
    let alg = &phi.alg;
    let n = alg.dim();
    let pe = Exponent::new(p)?;
    if p < T::one() {
        return Err(Error::Exponent(format!("Ψ_p needs p ≥ 1, got {p}")));
    }
    let id = linalg::identity::<T>(n);
    let big_x = alg.embed(x, pe, T::one());
    let big_y = alg.embed(y, pe, T::one());
    let psi_x = GnsElement::simple(x.clone(), id.clone());
    let psi_y = GnsElement::simple(y.clone(), id.clone());

    let product_defect = if p >= T::lit(2.0) {
        let lhs = gns_bracket(phi, &psi_x, &psi_y, pe);
        let xy = LpVector {
            carrier: big_x.carrier.adjoint() * &big_y.carrier,
            p: half_t(pe),
            z: T::zero(),
        };
        let rhs = phi.apply_lp(&xy);
        Some(max_abs(&(lhs.carrier - rhs.carrier)).as_f64())
    } else {
        None
    };

    let lhs = gns_bracket(phi, &psi_x, z, pe);
    let d = alg.d_pow(T::one() / p);
    let mut rhs = CMatrix::zeros(n, n);
    for (a, b) in &z.terms {
        // X* a_j = κ^(−1)_p(x* a_j)
        let xa = LpVector {
            carrier: big_x.carrier.adjoint() * a,
            p: pe,
            z: -T::one(),
        };
        rhs += phi.apply_lp(&xa).carrier * b * &d;
    }
    Ok(PsiReport {
        product_defect,
        mixed_defect: max_abs(&(lhs.carrier - rhs)).as_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// `‖z‖_{p,Φ} ‖w‖_{q,Φ}`.
    pub bound: f64,
    pub holds: bool,
}

/// `(z, w) = Tr(D^{1/p} ⟨z, w⟩_∞ D^{1/q})` for conjugate `p, q`.
pub fn duality_pair<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, p: Exponent<T>, w: &GnsElement<T>, q: Exponent<T>) -> Result<DualityReport> {
    let s = p.inv() + q.inv();
    if (s - T::one()).abs() > T::lit(1e3) * T::eps() {
        return Err(Error::Exponent(format!("1/p + 1/q = {s}, expected 1")));
    }
    let alg = &phi.alg;
    let m = alg.d_pow(p.inv()) * bracket_inf(phi, z, w) * alg.d_pow(q.inv());
    let v = m.trace();
    let bound = (module_norm(phi, z, p) * module_norm(phi, w, q)).as_f64();
    let modulus = v.modulus().as_f64();
    Ok(DualityReport {
        re: v.re.as_f64(),
        im: v.im.as_f64(),
        modulus,
        bound,
        holds: modulus <= bound + 1e-10 * bound.max(1.0),
    })
}

/// Basis of the null space `{z : ⟨z, z⟩_∞ = 0}` in `M_n ⊗ M_n`, from the
/// Gram form `φ(⟨E_I, E_J⟩_∞)` on matrix-unit tensors.
pub fn null_space<T: Real>(phi: &ModularUcp<T>) -> Vec<GnsElement<T>> {
    let n = phi.alg.dim();
    let unit = |a: usize, b: usize| {
        let mut e = CMatrix::<T>::zeros(n, n);
        e[(a, b)] = Complex::new(T::one(), T::zero());
        e
    };
    let basis: Vec<GnsElement<T>> = (0..n.pow(4))
        .map(|k| {
            let (i, r) = (k / (n * n), k % (n * n));
            GnsElement::simple(unit(i / n, i % n), unit(r / n, r % n))
        })
        .collect();
    let m = basis.len();
    let mut g = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = phi.alg.state(&bracket_inf(phi, &basis[i], &basis[j]));
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    let e = Eigh::new(&g);
    let floor = T::lit(SUPPORT_FLOOR) * e.max().abs();
    (0..m)
        .filter(|&c| e.values[c] <= floor)
        .map(|c| {
            let mut z = GnsElement::zero();
            for (i, b) in basis.iter().enumerate() {
                let coef = e.vectors[(i, c)];
                if coef.modulus() > T::lit(1e-14) {
                    z = z.add(&b.scale(coef));
                }
            }
            z
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    /// Smallest eigenvalue of `⟨z, z⟩_{p/2}`, relative to its norm.
    pub positivity: f64,
    /// Largest `‖⟨z_0, w⟩_∞‖` over null vectors `z_0`.
    pub definiteness: f64,
    pub adjoint_symmetry: f64,
    pub covariance: f64,
}

impl AxiomReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.positivity >= -tol && self.definiteness <= tol && self.adjoint_symmetry <= tol && self.covariance <= tol
    }
}

/// Module axioms on one instance; `nulls` is typically [`null_space`].
pub fn axiom_check<T: Real>(
    phi: &ModularUcp<T>,
    z: &GnsElement<T>,
    w: &GnsElement<T>,
    a: &CMatrix<T>,
    p: Exponent<T>,
    nulls: &[GnsElement<T>],
) -> AxiomReport {
    let zz = gns_bracket(phi, z, z, p);
    let scale = linalg::spectral_norm(&zz.carrier).max(T::lit(1e-300));
    let positivity = (linalg::min_eig(&zz.carrier) / scale).as_f64();
    let definiteness = nulls
        .iter()
        .map(|z0| {
            let a = max_abs(&bracket_inf(phi, z0, w));
            let b = max_abs(&bracket_inf(phi, z0, z0));
            a.max(b).as_f64()
        })
        .fold(0.0, f64::max);
    let zw = gns_bracket(phi, z, w, p);
    let wz = gns_bracket(phi, w, z, p);
    let adjoint_symmetry = max_abs(&(&zw.carrier - wz.carrier.adjoint())).as_f64();
    let lhs = gns_bracket(phi, z, &right_action(phi, w, a, p), p);
    let covariance = max_abs(&(lhs.carrier - &zw.carrier * a)).as_f64();
    AxiomReport {
        positivity,
        definiteness,
        adjoint_symmetry,
        covariance,
    }
}

/// Module norms at increasing exponents; nondecreasing in `p`.
pub fn norm_profile<T: Real>(phi: &ModularUcp<T>, z: &GnsElement<T>, ps: &[f64]) -> Result<Vec<(f64, f64)>> {
    ps.iter()
        .map(|&p| Ok((p, module_norm(phi, z, Exponent::new(T::lit(p))?).as_f64())))
        .collect()
}
