//! Markov semigroups and their column/row BMO seminorms
//! `‖x‖²_{BMO^c} = sup_{t ≥ 0} ‖Φ_t(|x − Φ_t x|²)‖`.

use crate::error::{Error, Result};
use crate::fdlp::{BlockSubalgebra, Exponent, FdAlgebra};
use crate::linalg;
use crate::polalg::{Monomial, PolElement, SUq2};
use crate::scalar::{max_abs, CMatrix, Real};
use crate::trunc::TruncRep;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A semigroup of unital maps acting on some element type.
pub trait MarkovSemigroup<T: Real> {
    type Elem: Clone;

    fn apply(&self, t: T, x: &Self::Elem) -> Self::Elem;
    /// `lim_{t→∞} Φ_t(x)`, computed in closed form.
    fn fixed_point(&self, x: &Self::Elem) -> Self::Elem;
    fn adjoint(&self, x: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn scale(&self, c: Complex<T>, x: &Self::Elem) -> Self::Elem;
    /// Operator (sup) norm, possibly estimated at truncation.
    fn uniform_norm(&self, x: &Self::Elem) -> Result<T>;
}

/// Semigroups on a matrix algebra with a faithful state.
pub trait MatrixSemigroup<T: Real>: MarkovSemigroup<T, Elem = CMatrix<T>> {
    fn algebra(&self) -> &FdAlgebra<T>;
}

/// Log-spaced sample times in `[t_min, t_max]`; `t = 0` and `t = ∞` are
/// handled in closed form. Each refinement inserts the geometric midpoints,
/// so a refined grid contains the coarser one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    pub refinements: u32,
}

impl Default for TGrid {
    fn default() -> Self {
        Self {
            t_min: 1e-4,
            t_max: 50.0,
            count: 64,
            refinements: 0,
        }
    }
}

impl TGrid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) || count < 2 {
            return Err(Error::Invalid(format!(
                "t-grid needs 0 < min < max and count ≥ 2, got {t_min},{t_max},{count}"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            count,
            refinements: 0,
        })
    }

    /// Parses `"min,max,count"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Parse {
            pos: 0,
            msg: format!("expected `min,max,count`, got `{s}`"),
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].parse().map_err(|_| bad())?;
        let b: f64 = parts[1].parse().map_err(|_| bad())?;
        let c: usize = parts[2].parse().map_err(|_| bad())?;
        Self::new(a, b, c)
    }

    pub fn refined(&self) -> Self {
        Self {
            refinements: self.refinements + 1,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        (self.count - 1) * (1usize << self.refinements) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.len();
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.t_min
                } else if i == n - 1 {
                    self.t_max
                } else {
                    (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

/// Values at the analytic endpoints of the time axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub t0: f64,
    pub t_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmoReport {
    /// Square root of the sup over the requested grid and both endpoints.
    pub norm: f64,
    /// `None` when the sup is attained at `t = ∞`.
    pub argmax_t: Option<f64>,
    #[serde(rename = "grid_spec")]
    pub grid: TGrid,
    /// Norm on the once-refined grid.
    pub refined_norm: f64,
    pub relative_change: f64,
    #[serde(rename = "stability_flag")]
    pub stable: bool,
    #[serde(rename = "endpoint_values")]
    pub endpoints: Endpoints,
}

/// Both one-sided seminorms and their maximum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmoPair {
    pub col: BmoReport,
    pub row: BmoReport,
    pub norm: f64,
}

/// Relative refinement change accepted as stable.
pub const STABILITY_TOL: f64 = 1e-4;

/// The projection onto the fixed points, `P(x) = lim Φ_t(x)`.
pub fn fixed_point_projection<T: Real, S: MarkovSemigroup<T>>(sg: &S, x: &S::Elem) -> S::Elem {
    sg.fixed_point(x)
}

/// Removes the fixed-point component so that `x` lies in `M°`.
pub fn project_circ<T: Real, S: MarkovSemigroup<T>>(sg: &S, x: &S::Elem) -> S::Elem {
    sg.sub(x, &sg.fixed_point(x))
}

fn check_circ<T: Real, S: MarkovSemigroup<T>>(sg: &S, x: &S::Elem) -> Result<()> {
    let p = sg.uniform_norm(&sg.fixed_point(x))?;
    let scale = T::one().max(sg.uniform_norm(x)?);
    if p > T::lit(1e-10) * scale {
        return Err(Error::NotCirc(p.as_f64()));
    }
    Ok(())
}

/// `‖x‖_{BMO^c}` over `grid`; refuses `x ∉ M°`.
pub fn bmo_col_norm<T: Real, S: MarkovSemigroup<T>>(sg: &S, x: &S::Elem, grid: &TGrid) -> Result<BmoReport> {
    check_circ(sg, x)?;
    let fine = grid.refined();
    let ts = fine.points();
    let mut profile = Vec::with_capacity(ts.len());
    for &t in &ts {
        let tt = T::lit(t);
        let d = sg.sub(x, &sg.apply(tt, x));
        let v = sg.uniform_norm(&sg.apply(tt, &sg.mul(&sg.adjoint(&d), &d)))?;
        profile.push(v.as_f64());
    }
    // Φ_t(|x − Φ_t x|²) → P(x*x) as t → ∞ since P(x) = 0
    let t_inf = sg.uniform_norm(&sg.fixed_point(&sg.mul(&sg.adjoint(x), x)))?.as_f64();
    let sup = |stride: usize| {
        let mut best = (t_inf, None);
        for (i, v) in profile.iter().enumerate().step_by(stride) {
            if *v > best.0 {
                best = (*v, Some(ts[i]));
            }
        }
        best
    };
    let (coarse, arg) = sup(2);
    let (refined, _) = sup(1);
    let norm = coarse.max(0.0).sqrt();
    let refined_norm = refined.max(0.0).sqrt();
    let relative_change = if refined_norm > 0.0 {
        (refined_norm - norm) / refined_norm
    } else {
        0.0
    };
    Ok(BmoReport {
        norm,
        argmax_t: arg,
        grid: grid.clone(),
        refined_norm,
        relative_change,
        stable: relative_change <= STABILITY_TOL,
        endpoints: Endpoints { t0: 0.0, t_inf },
    })
}

/// `‖x‖_{BMO^r} = ‖x*‖_{BMO^c}`.
pub fn bmo_row_norm<T: Real, S: MarkovSemigroup<T>>(sg: &S, x: &S::Elem, grid: &TGrid) -> Result<BmoReport> {
    bmo_col_norm(sg, &sg.adjoint(x), grid)
}

pub fn bmo_norm<T: Real, S: MarkovSemigroup<T>>(sg: &S, x: &S::Elem, grid: &TGrid) -> Result<BmoPair> {
    let col = bmo_col_norm(sg, x, grid)?;
    let row = bmo_row_norm(sg, x, grid)?;
    let norm = col.norm.max(row.norm);
    Ok(BmoPair { col, row, norm })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2DominationReport {
    pub l2_col: f64,
    pub bmo_col: f64,
    pub l2_row: f64,
    pub bmo_row: f64,
    pub holds: bool,
}

/// `‖κ^(1)_2(x)‖_2 ≤ ‖x‖_{BMO^c}` and `‖κ^(−1)_2(x)‖_2 ≤ ‖x‖_{BMO^r}`.
pub fn bmo_dominates_l2<T: Real, S: MatrixSemigroup<T>>(sg: &S, x: &CMatrix<T>, grid: &TGrid) -> Result<L2DominationReport> {
    let alg = sg.algebra();
    let two = Exponent::Finite(T::lit(2.0));
    let pair = bmo_norm(sg, x, grid)?;
    let l2_col = alg.embed(x, two, T::one()).norm().as_f64();
    let l2_row = alg.embed(x, two, -T::one()).norm().as_f64();
    let holds = l2_col <= pair.col.norm + 1e-8 && l2_row <= pair.row.norm + 1e-8;
    Ok(L2DominationReport {
        l2_col,
        bmo_col: pair.col.norm,
        l2_row,
        bmo_row: pair.row.norm,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub image: BmoPair,
    pub source: BmoPair,
    pub holds: bool,
}

/// `‖E(x)‖_{BMO} ≤ ‖x‖_{BMO}` for the φ-preserving expectation onto `sub`.
pub fn expectation_bmo_contraction<T: Real, S: MatrixSemigroup<T>>(
    sg: &S,
    sub: &BlockSubalgebra<T>,
    x: &CMatrix<T>,
    grid: &TGrid,
) -> Result<ContractionReport> {
    let mut worst = T::zero();
    for t in [0.3, 1.1, 4.0] {
        for e in sub.matrix_units() {
            let y = sg.apply(T::lit(t), &e);
            worst = worst.max(max_abs(&(&y - sub.pinch(&y))));
        }
    }
    if worst > T::lit(1e-10) {
        return Err(Error::SemigroupNotInvariant(worst.as_f64()));
    }
    let e = sg.algebra().expectation(sub)?;
    let ex = e.apply(x);
    let image = bmo_norm(sg, &ex, grid)?;
    let source = bmo_norm(sg, x, grid)?;
    let slack = 1e-8;
    let holds = image.col.norm <= source.col.norm + slack
        && image.row.norm <= source.row.norm + slack
        && image.norm <= source.norm + slack;
    Ok(ContractionReport { image, source, holds })
}

fn matrix_ops_sub<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> CMatrix<T> {
    x - y
}

/// Schur multiplier semigroup `Φ_t(x)_ij = e^{−t c_ij} x_ij` on `M_n` with a
/// diagonal density.
#[derive(Clone, Debug)]
pub struct SchurSemigroup<T: Real> {
    alg: FdAlgebra<T>,
    cost: DMatrix<T>,
}

impl<T: Real> SchurSemigroup<T> {
    /// Requires a diagonal density and a symmetric cost with zero diagonal.
    pub fn new(alg: FdAlgebra<T>, cost: DMatrix<T>) -> Result<Self> {
        let n = alg.dim();
        if cost.nrows() != n || cost.ncols() != n {
            return Err(Error::Dimension("cost matrix size".into()));
        }
        let d = alg.density();
        for i in 0..n {
            for j in 0..n {
                if i != j && d[(i, j)].modulus() > T::lit(1e-12) {
                    return Err(Error::Semigroup("Schur semigroups need a diagonal density".into()));
                }
                if (cost[(i, j)] - cost[(j, i)]).abs() > T::zero() || cost[(i, j)] < T::zero() {
                    return Err(Error::Semigroup("cost must be symmetric and nonnegative".into()));
                }
            }
            if cost[(i, i)] != T::zero() {
                return Err(Error::Semigroup("cost must vanish on the diagonal".into()));
            }
        }
        Ok(Self { alg, cost })
    }

    /// `c_ij = |i − j|²`.
    pub fn gaussian(alg: FdAlgebra<T>) -> Result<Self> {
        let n = alg.dim();
        let cost = DMatrix::from_fn(n, n, |i, j| T::lit(((i as f64) - (j as f64)).powi(2)));
        Self::new(alg, cost)
    }

    pub fn symbol(&self, t: T) -> CMatrix<T> {
        self.cost.map(|c| Complex::new((-t * c).exp(), T::zero()))
    }
}

impl<T: Real> MarkovSemigroup<T> for SchurSemigroup<T> {
    type Elem = CMatrix<T>;

    fn apply(&self, t: T, x: &CMatrix<T>) -> CMatrix<T> {
        x.component_mul(&self.symbol(t))
    }

    fn fixed_point(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let mask = self.cost.map(|c| {
            if c == T::zero() {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        x.component_mul(&mask)
    }

    fn adjoint(&self, x: &CMatrix<T>) -> CMatrix<T> {
        x.adjoint()
    }

    fn mul(&self, x: &CMatrix<T>, y: &CMatrix<T>) -> CMatrix<T> {
        x * y
    }

    fn sub(&self, x: &CMatrix<T>, y: &CMatrix<T>) -> CMatrix<T> {
        matrix_ops_sub(x, y)
    }

    fn scale(&self, c: Complex<T>, x: &CMatrix<T>) -> CMatrix<T> {
        x.map(|z| z * c)
    }

    fn uniform_norm(&self, x: &CMatrix<T>) -> Result<T> {
        Ok(linalg::spectral_norm(x))
    }
}

impl<T: Real> MatrixSemigroup<T> for SchurSemigroup<T> {
    fn algebra(&self) -> &FdAlgebra<T> {
        &self.alg
    }
}

/// `Φ_t(x) = e^{−t} x + (1 − e^{−t}) φ(x) I`.
#[derive(Clone, Debug)]
pub struct Depolarizing<T: Real> {
    alg: FdAlgebra<T>,
}

impl<T: Real> Depolarizing<T> {
    pub fn new(alg: FdAlgebra<T>) -> Self {
        Self { alg }
    }
}

impl<T: Real> MarkovSemigroup<T> for Depolarizing<T> {
    type Elem = CMatrix<T>;

    fn apply(&self, t: T, x: &CMatrix<T>) -> CMatrix<T> {
        let e = (-t).exp();
        let phi = self.alg.state(x);
        let n = x.nrows();
        x.map(|z| z * Complex::new(e, T::zero())) + linalg::identity::<T>(n).map(|z| z * phi * Complex::new(T::one() - e, T::zero()))
    }

    fn fixed_point(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let phi = self.alg.state(x);
        linalg::identity::<T>(x.nrows()).map(|z| z * phi)
    }

    fn adjoint(&self, x: &CMatrix<T>) -> CMatrix<T> {
        x.adjoint()
    }

    fn mul(&self, x: &CMatrix<T>, y: &CMatrix<T>) -> CMatrix<T> {
        x * y
    }

    fn sub(&self, x: &CMatrix<T>, y: &CMatrix<T>) -> CMatrix<T> {
        matrix_ops_sub(x, y)
    }

    fn scale(&self, c: Complex<T>, x: &CMatrix<T>) -> CMatrix<T> {
        x.map(|z| z * c)
    }

    fn uniform_norm(&self, x: &CMatrix<T>) -> Result<T> {
        Ok(linalg::spectral_norm(x))
    }
}

impl<T: Real> MatrixSemigroup<T> for Depolarizing<T> {
    fn algebra(&self) -> &FdAlgebra<T> {
        &self.alg
    }
}

/// Trigonometric polynomial `Σ c_k ζ_k` on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<T: Real> {
    coeffs: BTreeMap<i64, Complex<T>>,
}

impl<T: Real> TrigPoly<T> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn zeta(k: i64) -> Self {
        Self::from_coeffs([(k, Complex::new(T::one(), T::zero()))])
    }

    pub fn from_coeffs(it: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let mut out = Self::zero();
        for (k, c) in it {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: i64, c: Complex<T>) {
        let e = self.coeffs.entry(k).or_insert_with(|| Complex::new(T::zero(), T::zero()));
        *e += c;
        if *e == Complex::new(T::zero(), T::zero()) {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> Complex<T> {
        self.coeffs.get(&k).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Complex<T>)> + '_ {
        self.coeffs.iter()
    }

    pub fn degree(&self) -> u64 {
        self.coeffs.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in o.terms() {
            out.add_term(*k, *c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in o.terms() {
            out.add_term(*k, -*c);
        }
        out
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_coeffs(self.terms().map(|(k, c)| (*k, *c * s)))
    }

    /// Coefficient convolution.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in o.terms() {
                out.add_term(a + b, *ca * *cb);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_coeffs(self.terms().map(|(k, c)| (-*k, c.conj())))
    }

    pub fn map_symbol(&self, m: impl Fn(i64) -> Complex<T>) -> Self {
        Self::from_coeffs(self.terms().map(|(k, c)| (*k, *c * m(*k))))
    }

    pub fn eval(&self, theta: T) -> Complex<T> {
        self.terms().fold(Complex::new(T::zero(), T::zero()), |acc, (k, c)| {
            let a = theta * T::lit(*k as f64);
            acc + *c * Complex::new(a.cos(), a.sin())
        })
    }

    /// Values at `θ_s = 2πs/S`.
    pub fn samples(&self, s: usize) -> Vec<Complex<T>> {
        (0..s)
            .map(|i| self.eval(T::two_pi() * T::lit(i as f64 / s as f64)))
            .collect()
    }

    /// `(max over samples, Bernstein upper bound)`; the bound
    /// `max / (1 − nπ/S)` needs `S > nπ`.
    pub fn sup_norm_bounds(&self, s: usize) -> (T, Option<T>) {
        let lower = self
            .samples(s)
            .iter()
            .map(|z| z.modulus())
            .fold(T::zero(), |a, b| a.max(b));
        let r = T::pi() * T::lit(self.degree() as f64) / T::lit(s as f64);
        let upper = (r < T::one()).then(|| lower / (T::one() - r));
        (lower, upper)
    }
}

/// Heat semigroup `h_t(k) = e^{−tk²}` on trigonometric polynomials.
#[derive(Clone, Debug)]
pub struct TorusHeat {
    pub circle_samples: usize,
}

impl Default for TorusHeat {
    fn default() -> Self {
        Self { circle_samples: 4096 }
    }
}

impl<T: Real> MarkovSemigroup<T> for TorusHeat {
    type Elem = TrigPoly<T>;

    fn apply(&self, t: T, x: &TrigPoly<T>) -> TrigPoly<T> {
        x.map_symbol(|k| Complex::new((-t * T::lit((k * k) as f64)).exp(), T::zero()))
    }

    fn fixed_point(&self, x: &TrigPoly<T>) -> TrigPoly<T> {
        TrigPoly::from_coeffs([(0, x.coeff(0))])
    }

    fn adjoint(&self, x: &TrigPoly<T>) -> TrigPoly<T> {
        x.adjoint()
    }

    fn mul(&self, x: &TrigPoly<T>, y: &TrigPoly<T>) -> TrigPoly<T> {
        x.mul(y)
    }

    fn sub(&self, x: &TrigPoly<T>, y: &TrigPoly<T>) -> TrigPoly<T> {
        x.sub(y)
    }

    fn scale(&self, c: Complex<T>, x: &TrigPoly<T>) -> TrigPoly<T> {
        x.scale(c)
    }

    fn uniform_norm(&self, x: &TrigPoly<T>) -> Result<T> {
        Ok(x.sup_norm_bounds(self.circle_samples).0)
    }
}

/// `‖f‖_{BMO(T)}` with the sampling bound of the largest sup-norm evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusBmoReport {
    pub report: BmoReport,
    pub circle_samples: usize,
    /// Relative sampling error bound `nπ/(S − nπ)` for the highest degree used.
    pub sampling_error_bound: Option<f64>,
}

pub fn torus_bmo_norm<T: Real>(f: &TrigPoly<T>, grid: &TGrid, circle_samples: usize) -> Result<TorusBmoReport> {
    let sg = TorusHeat { circle_samples };
    let report = bmo_col_norm(&sg, f, grid)?;
    // |f − h_t f|² has degree at most 2 deg f
    let n = 2.0 * f.degree() as f64 * std::f64::consts::PI;
    let s = circle_samples as f64;
    let sampling_error_bound = (n < s).then(|| n / (s - n));
    Ok(TorusBmoReport {
        report,
        circle_samples,
        sampling_error_bound,
    })
}

/// Heat semigroup on `Pol(SU_q(2))`, with sup norms taken in the truncated
/// defining representation.
#[derive(Clone, Debug)]
pub struct Suq2Heat<T: Real> {
    pub alg: SUq2<Complex<T>>,
    pub rep: TruncRep<T>,
}

impl<T: Real> Suq2Heat<T> {
    pub fn new(rep: TruncRep<T>) -> Result<Self> {
        Ok(Self {
            alg: SUq2::numeric(rep.q())?,
            rep,
        })
    }
}

impl<T: Real> MarkovSemigroup<T> for Suq2Heat<T> {
    type Elem = PolElement<Complex<T>>;

    fn apply(&self, t: T, x: &Self::Elem) -> Self::Elem {
        self.alg.heat_phi(t.max(T::zero()), x).expect("nonnegative time")
    }

    fn fixed_point(&self, x: &Self::Elem) -> Self::Elem {
        self.alg.heat_fixed_point(x)
    }

    fn adjoint(&self, x: &Self::Elem) -> Self::Elem {
        self.alg.adjoint(x)
    }

    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        self.alg.mul(x, y)
    }

    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        x.sub(y)
    }

    fn scale(&self, c: Complex<T>, x: &Self::Elem) -> Self::Elem {
        x.scale(&c)
    }

    fn uniform_norm(&self, x: &Self::Elem) -> Result<T> {
        Ok(self.rep.op_norm(&self.rep.evaluate(x)))
    }
}

/// Worst defects of the Markov-semigroup axioms over the sampled times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: String,
    pub unitality: f64,
    /// `max(0, −λ_min)` over the positivity probes.
    pub positivity: f64,
    pub symmetry: f64,
    pub semigroup_law: f64,
}

impl ValidationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.unitality <= tol && self.positivity <= tol && self.symmetry <= tol && self.semigroup_law <= tol
    }

    fn worst(&self) -> f64 {
        self.unitality.max(self.positivity).max(self.symmetry).max(self.semigroup_law)
    }
}

const VALIDATION_TIMES: [f64; 3] = [0.1, 0.5, 1.3];

fn matrix_units<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    (0..n * n)
        .map(|k| {
            let mut e = CMatrix::zeros(n, n);
            e[(k / n, k % n)] = Complex::new(T::one(), T::zero());
            e
        })
        .collect()
}

fn validate_matrix<T: Real, S: MatrixSemigroup<T>, R: Rng + ?Sized>(sg: &S, kind: &str, rng: &mut R) -> ValidationReport {
    let alg = sg.algebra();
    let n = alg.dim();
    let id = linalg::identity::<T>(n);
    let units = matrix_units::<T>(n);
    let mut rep = ValidationReport {
        kind: kind.to_string(),
        unitality: 0.0,
        positivity: 0.0,
        symmetry: 0.0,
        semigroup_law: 0.0,
    };
    for &t in &VALIDATION_TIMES {
        let tt = T::lit(t);
        rep.unitality = rep.unitality.max(max_abs(&(sg.apply(tt, &id) - &id)).as_f64());
        for _ in 0..4 {
            // id_2 ⊗ Φ_t on a random positive element of M_2(M_n)
            let y = linalg::random_psd::<T, R>(rng, 2 * n, 2 * n);
            let mut out = CMatrix::zeros(2 * n, 2 * n);
            for a in 0..2 {
                for b in 0..2 {
                    let blk = y.view((a * n, b * n), (n, n)).into_owned();
                    out.view_mut((a * n, b * n), (n, n)).copy_from(&sg.apply(tt, &blk));
                }
            }
            let scale = linalg::spectral_norm(&y).as_f64().max(1.0);
            rep.positivity = rep.positivity.max((-linalg::min_eig(&out).as_f64() / scale).max(0.0));
        }
        for x in &units {
            let px = sg.apply(tt, x);
            for y in &units {
                let l = alg.state(&(&px * y));
                let r = alg.state(&(x * sg.apply(tt, y)));
                rep.symmetry = rep.symmetry.max((l - r).modulus().as_f64());
            }
            for &s in &VALIDATION_TIMES {
                let ss = T::lit(s);
                let d = sg.apply(ss + tt, x) - sg.apply(ss, &px);
                rep.semigroup_law = rep.semigroup_law.max(max_abs(&d).as_f64());
            }
        }
    }
    rep
}

fn gaussian_kernel_min_eig<T: Real>(t: T, n: usize) -> T {
    let k = CMatrix::from_fn(n, n, |i, j| {
        let d = T::lit(i as f64 - j as f64);
        Complex::new((-t * d * d).exp(), T::zero())
    });
    linalg::min_eig(&k)
}

impl<T: Real> SchurSemigroup<T> {
    pub fn validate<R: Rng + ?Sized>(&self, rng: &mut R) -> ValidationReport {
        let mut rep = validate_matrix(self, "schur", rng);
        for &t in &VALIDATION_TIMES {
            let m = linalg::min_eig(&self.symbol(T::lit(t))).as_f64();
            rep.positivity = rep.positivity.max((-m).max(0.0));
        }
        rep
    }
}

impl<T: Real> Depolarizing<T> {
    pub fn validate<R: Rng + ?Sized>(&self, rng: &mut R) -> ValidationReport {
        validate_matrix(self, "depolarizing", rng)
    }
}

impl TorusHeat {
    pub fn validate<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> ValidationReport {
        let mut rep = ValidationReport {
            kind: "torus-heat".into(),
            unitality: 0.0,
            positivity: 0.0,
            symmetry: 0.0,
            semigroup_law: 0.0,
        };
        let one = TrigPoly::<T>::zeta(0);
        let mean = |p: &TrigPoly<T>| p.coeff(0);
        for &t in &VALIDATION_TIMES {
            let tt = T::lit(t);
            let d = MarkovSemigroup::<T>::apply(self, tt, &one).sub(&one);
            rep.unitality = rep.unitality.max(d.terms().map(|(_, c)| c.modulus().as_f64()).fold(0.0, f64::max));
            // Bochner: the symbol is positive definite on ℤ
            rep.positivity = rep.positivity.max((-gaussian_kernel_min_eig(tt, 17).as_f64()).max(0.0));
            for _ in 0..4 {
                let g = TrigPoly::from_coeffs((-3..=3).map(|k| {
                    (k, Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
                }));
                let pos = MarkovSemigroup::<T>::apply(self, tt, &g.adjoint().mul(&g));
                let m = pos.samples(512).iter().map(|z| z.re).fold(f64::INFINITY, |a, b| a.min(b.as_f64()));
                rep.positivity = rep.positivity.max((-m).max(0.0));
            }
            for a in -4..=4 {
                let x = TrigPoly::<T>::zeta(a);
                let px = MarkovSemigroup::<T>::apply(self, tt, &x);
                for b in -4..=4 {
                    let y = TrigPoly::<T>::zeta(b);
                    let l = mean(&px.mul(&y));
                    let r = mean(&x.mul(&MarkovSemigroup::<T>::apply(self, tt, &y)));
                    rep.symmetry = rep.symmetry.max((l - r).modulus().as_f64());
                }
                for &s in &VALIDATION_TIMES {
                    let ss = T::lit(s);
                    let d = MarkovSemigroup::<T>::apply(self, ss + tt, &x).sub(&MarkovSemigroup::<T>::apply(self, ss, &px));
                    rep.semigroup_law = rep.semigroup_law.max(d.terms().map(|(_, c)| c.modulus().as_f64()).fold(0.0, f64::max));
                }
            }
        }
        rep
    }
}

impl<T: Real> Suq2Heat<T> {
    /// Positivity is probed through the ℕ-leg Schur form `Φ_t = Ψ_t ⊗ id`:
    /// the kernel `e^{−t(i−j)²}` must be positive semidefinite, `Ψ_t` must
    /// reproduce the heat action on evaluated elements, and `Ψ_t ⊗ id_2`
    /// must keep random positive matrices `X*X` positive.
    pub fn validate<R: Rng + ?Sized>(&self, rng: &mut R) -> ValidationReport {
        let mut rep = ValidationReport {
            kind: "suq2-heat".into(),
            unitality: 0.0,
            positivity: 0.0,
            symmetry: 0.0,
            semigroup_law: 0.0,
        };
        let monos: Vec<Monomial> = (-2..=2)
            .flat_map(|k| (0..=1).flat_map(move |l| (0..=1).map(move |m| Monomial::new(k, l, m))))
            .collect();
        let one = self.alg.one();
        let rand_el = |rng: &mut R| {
            PolElement::from_terms(monos.iter().map(|mo| {
                (*mo, Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
            }))
        };
        for &t in &VALIDATION_TIMES {
            let tt = T::lit(t);
            let d = self.apply(tt, &one).sub(&one);
            rep.unitality = rep.unitality.max(d.terms().map(|(_, c)| c.modulus().as_f64()).fold(0.0, f64::max));
            rep.positivity = rep.positivity.max((-gaussian_kernel_min_eig(tt, self.rep.n()).as_f64()).max(0.0));
            for _ in 0..2 {
                let xs: Vec<PolElement<Complex<T>>> = (0..4).map(|_| rand_el(rng)).collect();
                for x in &xs {
                    let lhs = self.rep.evaluate(&self.apply(tt, x));
                    let rhs = self.rep.schur_n_leg(tt, &self.rep.evaluate(x));
                    rep.positivity = rep.positivity.max(max_abs(&(lhs - rhs)).as_f64());
                }
                let d = self.rep.dim();
                let mut big = CMatrix::zeros(2 * d, 2 * d);
                for a in 0..2 {
                    for b in 0..2 {
                        big.view_mut((a * d, b * d), (d, d)).copy_from(&self.rep.evaluate(&xs[2 * a + b]));
                    }
                }
                let pos = big.adjoint() * &big;
                let mut out = CMatrix::zeros(2 * d, 2 * d);
                for a in 0..2 {
                    for b in 0..2 {
                        let blk = pos.view((a * d, b * d), (d, d)).into_owned();
                        out.view_mut((a * d, b * d), (d, d)).copy_from(&self.rep.schur_n_leg(tt, &blk));
                    }
                }
                let scale = linalg::spectral_norm(&pos).as_f64().max(1.0);
                rep.positivity = rep.positivity.max((-linalg::min_eig(&out).as_f64() / scale).max(0.0));
            }
            for a in &monos {
                let x = self.alg.mono(a.k, a.l, a.m);
                let px = self.apply(tt, &x);
                for b in &monos {
                    let y = self.alg.mono(b.k, b.l, b.m);
                    let l = self.alg.haar(&self.alg.mul(&px, &y));
                    let r = self.alg.haar(&self.alg.mul(&x, &self.apply(tt, &y)));
                    rep.symmetry = rep.symmetry.max((l - r).modulus().as_f64());
                }
                for &s in &VALIDATION_TIMES {
                    let ss = T::lit(s);
                    let d = self.apply(ss + tt, &x).sub(&self.apply(ss, &px));
                    rep.semigroup_law = rep.semigroup_law.max(d.terms().map(|(_, c)| c.modulus().as_f64()).fold(0.0, f64::max));
                }
            }
        }
        rep
    }
}

/// The four registered semigroup families.
#[derive(Clone, Debug)]
pub enum Semigroup<T: Real> {
    Schur(SchurSemigroup<T>),
    Depolarizing(Depolarizing<T>),
    TorusHeat(TorusHeat),
    Suq2Heat(Suq2Heat<T>),
}

impl<T: Real> Semigroup<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Semigroup::Schur(_) => "schur",
            Semigroup::Depolarizing(_) => "depolarizing",
            Semigroup::TorusHeat(_) => "torus-heat",
            Semigroup::Suq2Heat(_) => "suq2-heat",
        }
    }

    pub fn validate<R: Rng + ?Sized>(&self, rng: &mut R) -> ValidationReport {
        match self {
            Semigroup::Schur(s) => s.validate(rng),
            Semigroup::Depolarizing(s) => s.validate(rng),
            Semigroup::TorusHeat(s) => s.validate::<T, R>(rng),
            Semigroup::Suq2Heat(s) => s.validate(rng),
        }
    }

    /// Validation that fails with the worst defect above `tol`.
    pub fn validated<R: Rng + ?Sized>(self, rng: &mut R, tol: f64) -> Result<Self> {
        let rep = self.validate(rng);
        if !rep.passes(tol) {
            return Err(Error::Semigroup(format!("{} fails validation (worst defect {:e})", rep.kind, rep.worst())));
        }
        Ok(self)
    }
}
