//! The normal-form *-algebra `Pol(SU_q(2))`.
//!
//! Every element is a finite combination of the basis monomials
//! `α^k γ^l (γ*)^m` (`k ∈ ℤ`, with `α^k := (α*)^{|k|}` for `k < 0`), so
//! equality of elements is equality of term maps. All operations live on the
//! context [`SUq2`], which fixes the coefficient ring and the value of `q`:
//! `SUq2<QScalar>` is the symbolic algebra, `SUq2<Complex<T>>` evaluates at a
//! numeric `q`.

use crate::error::{Error, Result};
use crate::qspecial::{q_pochhammer, Poly1, QScalar};
use crate::scalar::{Coeff, Real};
use num_complex::Complex;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Basis element `α^k γ^l (γ*)^m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial {
    pub k: i64,
    pub l: u32,
    pub m: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { k: 0, l: 0, m: 0 };

    pub fn new(k: i64, l: u32, m: u32) -> Self {
        Self { k, l, m }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.k, self.l, self.m)
    }
}

/// Finite linear combination of normal-form monomials.
#[derive(Clone, PartialEq, Debug)]
pub struct PolElement<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Default for PolElement<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> PolElement<C> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(mono: Monomial, c: C) -> Self {
        let mut out = Self::zero();
        out.accumulate(mono, c);
        out
    }

    pub fn scalar(c: C) -> Self {
        Self::monomial(Monomial::ONE, c)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut out = Self::zero();
        for (mono, c) in terms {
            out.accumulate(mono, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> C {
        self.terms.get(mono).cloned().unwrap_or_else(C::zero)
    }

    pub(crate) fn accumulate(&mut self, mono: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(e) => {
                *e = e.clone() + c;
                if e.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in o.terms() {
            out.accumulate(*mono, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in o.terms() {
            out.accumulate(*mono, -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms().map(|(mono, c)| (*mono, c.clone() * s.clone())))
    }

    /// Distinct α-powers present.
    pub fn strata(&self) -> Vec<i64> {
        let mut ks: Vec<i64> = self.terms.keys().map(|m| m.k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Component supported on the α-power `k`.
    pub fn stratum(&self, k: i64) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|(mono, _)| mono.k == k)
                .map(|(mono, c)| (*mono, c.clone())),
        )
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&Monomial, &C) -> D) -> PolElement<D> {
        PolElement::from_terms(self.terms().map(|(mono, c)| (*mono, f(mono, c))))
    }
}

impl PolElement<QScalar> {
    /// Numeric coefficients at a fixed `q`.
    pub fn evaluate_at<T: Real>(&self, q: T) -> Result<PolElement<Complex<T>>> {
        let mut out = PolElement::zero();
        for (mono, c) in self.terms() {
            let v = c.eval(q).ok_or(Error::DivisionByZero)?;
            out.accumulate(*mono, Complex::new(v, T::zero()));
        }
        Ok(out)
    }

    /// Line form, one `k l m : coeff` per term (empty for zero).
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for (mono, c) in self.terms() {
            s.push_str(&format!("{mono} : {c}\n"));
        }
        s
    }

    pub fn from_lines(text: &str) -> Result<Self> {
        let mut out = Self::zero();
        let mut offset = 0usize;
        for line in text.split_inclusive('\n') {
            let body = line.trim_end_matches(['\n', '\r']);
            let start = offset;
            offset += line.len();
            if body.trim().is_empty() || body.trim_start().starts_with('#') {
                continue;
            }
            let colon = body.find(':').ok_or(Error::Parse {
                pos: start,
                msg: "expected `k l m : coeff`".into(),
            })?;
            let mono = parse_triple(&body[..colon], start)?;
            let c: QScalar = body[colon + 1..].trim().parse().map_err(|e| shift_err(e, start + colon + 1))?;
            out.accumulate(mono, c);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<JsonTerm> = self
            .terms()
            .map(|(mono, c)| JsonTerm {
                k: mono.k,
                l: mono.l,
                m: mono.m,
                coeff: c.to_string(),
            })
            .collect();
        serde_json::to_value(terms).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let terms: Vec<JsonTerm> =
            serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(e.to_string()))?;
        let mut out = Self::zero();
        for t in terms {
            out.accumulate(Monomial::new(t.k, t.l, t.m), t.coeff.parse()?);
        }
        Ok(out)
    }

    /// Parses the element micro-grammar `c1 * k1 l1 m1 + c2 * k2 l2 m2 + …`.
    ///
    /// A bare triple `k l m` has coefficient 1. Coefficients are exact
    /// expressions in `q` (`0.5`, `q^-1`, `(1 - q^2)/(1 - q^4)`); a coefficient
    /// containing `+` must be parenthesized.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let mut out = Self::zero();
        let mut depth = 0i32;
        let mut start = 0usize;
        let bytes = spec.as_bytes();
        let mut pieces = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' if depth == 0 && !is_exponent_sign(bytes, i) => {
                    pieces.push((start, &spec[start..i]));
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push((start, &spec[start..]));
        for (at, piece) in pieces {
            if piece.trim().is_empty() {
                return Err(Error::Parse {
                    pos: at,
                    msg: "empty term".into(),
                });
            }
            let mut depth = 0i32;
            let mut star = None;
            for (i, b) in piece.bytes().enumerate() {
                match b {
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    b'*' if depth == 0 => star = Some(i),
                    _ => {}
                }
            }
            let (c, triple, tat) = match star {
                Some(i) => {
                    let c: QScalar = piece[..i].trim().parse().map_err(|e| shift_err(e, at))?;
                    (c, &piece[i + 1..], at + i + 1)
                }
                None => (QScalar::one(), piece, at),
            };
            out.accumulate(parse_triple(triple, tat)?, c);
        }
        Ok(out)
    }
}

fn is_exponent_sign(bytes: &[u8], i: usize) -> bool {
    i >= 2 && matches!(bytes[i - 1], b'e' | b'E') && bytes[i - 2].is_ascii_digit()
}

fn shift_err(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + by, msg },
        other => other,
    }
}

fn parse_triple(s: &str, at: usize) -> Result<Monomial> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let bad = |msg: &str| Error::Parse {
        pos: at,
        msg: msg.to_string(),
    };
    if parts.len() != 3 {
        return Err(bad("expected three integers `k l m`"));
    }
    let k: i64 = parts[0].parse().map_err(|_| bad("k must be an integer"))?;
    let l: u32 = parts[1].parse().map_err(|_| bad("l must be a nonnegative integer"))?;
    let m: u32 = parts[2].parse().map_err(|_| bad("m must be a nonnegative integer"))?;
    Ok(Monomial::new(k, l, m))
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    k: i64,
    l: u32,
    m: u32,
    coeff: String,
}

impl<C: Coeff + fmt::Display> fmt::Display for PolElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (mono, c)) in self.terms().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) * {mono}")?;
        }
        Ok(())
    }
}

/// Element of an algebraic tensor power `Pol ⊗ … ⊗ Pol`.
#[derive(Clone, PartialEq, Debug)]
pub struct PolTensor<C> {
    legs: usize,
    terms: BTreeMap<Vec<Monomial>, C>,
}

impl<C: Coeff> PolTensor<C> {
    pub fn zero(legs: usize) -> Self {
        Self {
            legs,
            terms: BTreeMap::new(),
        }
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Monomial>, &C)> + '_ {
        self.terms.iter()
    }

    pub fn accumulate(&mut self, key: Vec<Monomial>, c: C) {
        assert_eq!(key.len(), self.legs);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                *e = e.clone() + c;
                if e.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// Elementary tensor `x_1 ⊗ … ⊗ x_n`.
    pub fn elementary(factors: &[PolElement<C>]) -> Self {
        let mut out = Self::zero(factors.len());
        let mut acc: Vec<(Vec<Monomial>, C)> = vec![(Vec::new(), C::one())];
        for f in factors {
            let mut next = Vec::new();
            for (key, c) in &acc {
                for (mono, d) in f.terms() {
                    let mut k2 = key.clone();
                    k2.push(*mono);
                    next.push((k2, c.clone() * d.clone()));
                }
            }
            acc = next;
        }
        for (key, c) in acc {
            out.accumulate(key, c);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (key, c) in o.terms() {
            out.accumulate(key.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (key, c) in o.terms() {
            out.accumulate(key.clone(), -c.clone());
        }
        out
    }

    /// Collects the first-leg element multiplying a fixed second leg.
    pub fn first_leg_coefficient(&self, second: &Monomial) -> PolElement<C> {
        assert_eq!(self.legs, 2);
        PolElement::from_terms(
            self.terms()
                .filter(|(key, _)| key[1] == *second)
                .map(|(key, c)| (key[0], c.clone())),
        )
    }
}

/// Fourier multiplier symbol `m: ℤ → ℂ` with a computable sup-norm.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol<T> {
    /// `e^{−tk²}`.
    Heat(T),
    /// Listed values, `default` elsewhere.
    Table {
        values: BTreeMap<i64, Complex<T>>,
        default: Complex<T>,
    },
}

impl<T: Real> Symbol<T> {
    pub fn heat(t: T) -> Self {
        Symbol::Heat(t)
    }

    pub fn indicator(ks: &[i64]) -> Self {
        Symbol::Table {
            values: ks.iter().map(|k| (*k, Complex::new(T::one(), T::zero()))).collect(),
            default: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Symbol::Table {
            values: BTreeMap::new(),
            default: c,
        }
    }

    pub fn eval(&self, k: i64) -> Complex<T> {
        match self {
            Symbol::Heat(t) => Complex::new((-*t * T::lit((k * k) as f64)).exp(), T::zero()),
            Symbol::Table { values, default } => values.get(&k).copied().unwrap_or(*default),
        }
    }

    /// `‖m‖_∞` over all of `ℤ`.
    pub fn sup_norm(&self) -> T {
        use nalgebra::ComplexField;
        match self {
            Symbol::Heat(_) => T::one(),
            Symbol::Table { values, default } => values
                .values()
                .map(|c| c.modulus())
                .fold(default.modulus(), |a, b| if b > a { b } else { a }),
        }
    }
}

/// Letters of the free algebra on the generators.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Letter {
    Alpha,
    AlphaStar,
    Gamma,
    GammaStar,
}

/// `Pol(SU_q(2))` over the coefficient field `C` at a fixed `q`.
#[derive(Clone, Debug)]
pub struct SUq2<C> {
    q: C,
    q_inv: C,
}

impl SUq2<QScalar> {
    /// Symbolic `q`.
    pub fn exact() -> Self {
        Self {
            q: QScalar::q(),
            q_inv: QScalar::q_pow(-1),
        }
    }
}

impl<T: Real> SUq2<Complex<T>> {
    /// Numeric algebra at `q ∈ (−1, 1) \ {0}`.
    pub fn numeric(q: T) -> Result<Self> {
        if !(q > -T::one() && q < T::one()) || q == T::zero() {
            return Err(Error::InvalidQ(q.as_f64()));
        }
        Ok(Self {
            q: Complex::new(q, T::zero()),
            q_inv: Complex::new(T::one() / q, T::zero()),
        })
    }

    pub fn q_real(&self) -> T {
        self.q.re
    }

    /// Modular automorphism `σ_t(α^k γ^l (γ*)^m) = q^{−itk} α^k γ^l (γ*)^m`.
    /// Only defined for `q > 0`.
    pub fn modular_sigma(&self, t: T, x: &PolElement<Complex<T>>) -> Result<PolElement<Complex<T>>> {
        let q = self.q_real();
        if q < T::zero() {
            return Err(Error::NegativeQModular(q.as_f64()));
        }
        let lnq = q.ln();
        Ok(x.map_coeffs(|mono, c| {
            let phase = -t * lnq * T::lit(mono.k as f64);
            *c * Complex::new(phase.cos(), phase.sin())
        }))
    }

    /// Heat semigroup `Φ_t(α^k γ^l (γ*)^m) = e^{−tk²} α^k γ^l (γ*)^m`.
    pub fn heat_phi(&self, t: T, x: &PolElement<Complex<T>>) -> Result<PolElement<Complex<T>>> {
        if t < T::zero() {
            return Err(Error::NegativeTime(t.as_f64()));
        }
        Ok(x.map_coeffs(|mono, c| {
            let f = (-t * T::lit((mono.k * mono.k) as f64)).exp();
            *c * Complex::new(f, T::zero())
        }))
    }
}

impl<C: Coeff> SUq2<C> {
    pub fn q(&self) -> &C {
        &self.q
    }

    pub fn q_pow(&self, e: i64) -> C {
        let b = if e >= 0 { &self.q } else { &self.q_inv };
        let mut acc = C::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc * b.clone();
        }
        acc
    }

    pub fn scalar(&self, c: C) -> PolElement<C> {
        PolElement::scalar(c)
    }

    pub fn one(&self) -> PolElement<C> {
        PolElement::scalar(C::one())
    }

    pub fn mono(&self, k: i64, l: u32, m: u32) -> PolElement<C> {
        PolElement::monomial(Monomial::new(k, l, m), C::one())
    }

    pub fn alpha(&self) -> PolElement<C> {
        self.mono(1, 0, 0)
    }

    pub fn alpha_star(&self) -> PolElement<C> {
        self.mono(-1, 0, 0)
    }

    pub fn gamma(&self) -> PolElement<C> {
        self.mono(0, 1, 0)
    }

    pub fn gamma_star(&self) -> PolElement<C> {
        self.mono(0, 0, 1)
    }

    /// `α^a · α^b = α^{a+b} · P(γ*γ)`, with `P` given by a q-Pochhammer symbol
    /// when the two runs have opposite signs.
    fn contract_alpha(&self, a: i64, b: i64) -> (i64, Poly1<C>) {
        if (a >= 0 && b >= 0) || (a <= 0 && b <= 0) {
            return (a + b, Poly1::constant(C::one()));
        }
        let q2 = self.q_pow(2);
        if a > 0 {
            // α^j (α*)^j = (q²X; q²)_j
            let j = a.min(-b) as u32;
            let p = q_pochhammer(&Poly1::monomial(q2.clone(), 1), &q2, j);
            let k = a + b;
            if k >= 0 {
                (k, p)
            } else {
                // P(X) (α*)^s = (α*)^s P(q^{2s} X)
                (k, p.rescale_variable(&self.q_pow(-2 * k)))
            }
        } else {
            // (α*)^j α^j = (X; q^{-2})_j
            let j = (-a).min(b) as u32;
            let p = q_pochhammer(&Poly1::x(), &self.q_pow(-2), j);
            let k = a + b;
            if k <= 0 {
                (k, p)
            } else {
                // P(X) α^s = α^s P(q^{-2s} X)
                (k, p.rescale_variable(&self.q_pow(-2 * k)))
            }
        }
    }

    /// Product of two basis monomials in normal form.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Vec<(Monomial, C)> {
        // γ^l (γ*)^m α^k = q^{−(l+m)k} α^k γ^l (γ*)^m for every k ∈ ℤ
        let commute = self.q_pow(-((a.l + a.m) as i64) * b.k);
        let (k, p) = self.contract_alpha(a.k, b.k);
        let (l, m) = (a.l + b.l, a.m + b.m);
        p.terms()
            .map(|(r, c)| (Monomial::new(k, l + r, m + r), commute.clone() * c.clone()))
            .collect()
    }

    pub fn mul(&self, x: &PolElement<C>, y: &PolElement<C>) -> PolElement<C> {
        let mut out = PolElement::zero();
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                let cab = ca.clone() * cb.clone();
                for (mono, c) in self.mul_monomials(a, b) {
                    out.accumulate(mono, cab.clone() * c);
                }
            }
        }
        out
    }

    pub fn pow(&self, x: &PolElement<C>, e: u32) -> PolElement<C> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// Antilinear involution; `(α^k γ^l (γ*)^m)* = q^{k(l+m)} α^{−k} γ^m (γ*)^l`.
    pub fn adjoint(&self, x: &PolElement<C>) -> PolElement<C> {
        PolElement::from_terms(x.terms().map(|(mono, c)| {
            (
                Monomial::new(-mono.k, mono.m, mono.l),
                c.conj() * self.q_pow(mono.k * (mono.l + mono.m) as i64),
            )
        }))
    }

    /// Haar state value on a basis monomial: `(1 − q²)/(1 − q^{2(l+1)})` if
    /// `k = 0, l = m`, zero otherwise.
    pub fn haar_monomial(&self, mono: &Monomial) -> C {
        if mono.k != 0 || mono.l != mono.m {
            return C::zero();
        }
        (C::one() - self.q_pow(2)) / (C::one() - self.q_pow(2 * (mono.l as i64 + 1)))
    }

    pub fn haar(&self, x: &PolElement<C>) -> C {
        // group by l so each weight is formed once
        let mut by_l: BTreeMap<u32, C> = BTreeMap::new();
        for (mono, c) in x.terms() {
            if mono.k == 0 && mono.l == mono.m {
                let e = by_l.entry(mono.l).or_insert_with(C::zero);
                *e = e.clone() + c.clone();
            }
        }
        by_l.into_iter().fold(C::zero(), |acc, (l, c)| {
            if c.is_zero() {
                acc
            } else {
                acc + c * self.haar_monomial(&Monomial::new(0, l, l))
            }
        })
    }

    /// GNS inner product `⟨x, y⟩ = φ(x* y)`. Only the α-strata that cancel
    /// contribute, so other products are skipped.
    pub fn gns_inner(&self, x: &PolElement<C>, y: &PolElement<C>) -> C {
        let xs = self.adjoint(x);
        let mut acc = PolElement::zero();
        for (a, ca) in xs.terms() {
            for (b, cb) in y.terms() {
                if a.k + b.k != 0 {
                    continue;
                }
                let cab = ca.clone() * cb.clone();
                for (mono, c) in self.mul_monomials(a, b) {
                    acc.accumulate(mono, cab.clone() * c);
                }
            }
        }
        self.haar(&acc)
    }

    /// Fourier–Schur multiplier `α^k γ^l (γ*)^m ↦ m(k) α^k γ^l (γ*)^m`.
    pub fn fourier_schur(&self, symbol: impl Fn(i64) -> C, x: &PolElement<C>) -> PolElement<C> {
        x.map_coeffs(|mono, c| c.clone() * symbol(mono.k))
    }

    /// Heat semigroup tracked symbolically: `Φ_t(x) = Σ_s e^{−ts} x_s` where
    /// `x_s` is the part of `x` with `k² = s`.
    pub fn heat_strata(&self, x: &PolElement<C>) -> BTreeMap<u64, PolElement<C>> {
        let mut out: BTreeMap<u64, PolElement<C>> = BTreeMap::new();
        for (mono, c) in x.terms() {
            out.entry((mono.k * mono.k) as u64)
                .or_default()
                .accumulate(*mono, c.clone());
        }
        out
    }

    /// Limit `t → ∞` of the heat semigroup: the `k = 0` stratum.
    pub fn heat_fixed_point(&self, x: &PolElement<C>) -> PolElement<C> {
        x.stratum(0)
    }

    fn letter_element(&self, l: Letter) -> PolElement<C> {
        match l {
            Letter::Alpha => self.alpha(),
            Letter::AlphaStar => self.alpha_star(),
            Letter::Gamma => self.gamma(),
            Letter::GammaStar => self.gamma_star(),
        }
    }

    /// Normal form of a word reduced one adjacent letter pair at a time using
    /// only the defining relations. Independent of [`Self::mul`].
    pub fn normalize_word(&self, word: &[Letter]) -> PolElement<C> {
        use Letter::*;
        let mut out = PolElement::zero();
        let mut stack: Vec<(Vec<Letter>, C)> = vec![(word.to_vec(), C::one())];
        while let Some((w, c)) = stack.pop() {
            if c.is_zero() {
                continue;
            }
            let pos = w.windows(2).position(|p| {
                matches!(
                    (p[0], p[1]),
                    (Gamma | GammaStar, Alpha | AlphaStar)
                        | (GammaStar, Gamma)
                        | (Alpha, AlphaStar)
                        | (AlphaStar, Alpha)
                )
            });
            let Some(i) = pos else {
                let mut mono = Monomial::ONE;
                for l in &w {
                    match l {
                        Alpha => mono.k += 1,
                        AlphaStar => mono.k -= 1,
                        Gamma => mono.l += 1,
                        GammaStar => mono.m += 1,
                    }
                }
                out.accumulate(mono, c);
                continue;
            };
            let splice = |mid: &[Letter]| {
                let mut v = w[..i].to_vec();
                v.extend_from_slice(mid);
                v.extend_from_slice(&w[i + 2..]);
                v
            };
            match (w[i], w[i + 1]) {
                // αγ = qγα, αγ* = qγ*α and their adjoints
                (g @ (Gamma | GammaStar), Alpha) => {
                    stack.push((splice(&[Alpha, g]), c * self.q_inv.clone()));
                }
                (g @ (Gamma | GammaStar), AlphaStar) => {
                    stack.push((splice(&[AlphaStar, g]), c * self.q.clone()));
                }
                (GammaStar, Gamma) => stack.push((splice(&[Gamma, GammaStar]), c)),
                // αα* = 1 − q²γ*γ
                (Alpha, AlphaStar) => {
                    stack.push((splice(&[]), c.clone()));
                    stack.push((splice(&[Gamma, GammaStar]), -(c * self.q_pow(2))));
                }
                // α*α = 1 − γ*γ
                (AlphaStar, Alpha) => {
                    stack.push((splice(&[]), c.clone()));
                    stack.push((splice(&[Gamma, GammaStar]), -c));
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// Product of letters evaluated with [`Self::mul`]; used to compare with
    /// [`Self::normalize_word`].
    pub fn word_product(&self, word: &[Letter]) -> PolElement<C> {
        word.iter()
            .fold(self.one(), |acc, l| self.mul(&acc, &self.letter_element(*l)))
    }

    /// The five defining relations as `(name, lhs − rhs)`; each must vanish.
    pub fn relation_defects(&self) -> Vec<(&'static str, PolElement<C>)> {
        let (a, as_, g, gs) = (self.alpha(), self.alpha_star(), self.gamma(), self.gamma_star());
        let q = PolElement::scalar(self.q.clone());
        let q2 = PolElement::scalar(self.q_pow(2));
        let one = self.one();
        let m = |x: &PolElement<C>, y: &PolElement<C>| self.mul(x, y);
        vec![
            ("γ*γ = γγ*", m(&gs, &g).sub(&m(&g, &gs))),
            ("αγ = qγα", m(&a, &g).sub(&m(&q, &m(&g, &a)))),
            ("αγ* = qγ*α", m(&a, &gs).sub(&m(&q, &m(&gs, &a)))),
            ("α*α + γ*γ = 1", m(&as_, &a).add(&m(&gs, &g)).sub(&one)),
            ("αα* + q²γ*γ = 1", m(&a, &as_).add(&m(&q2, &m(&gs, &g))).sub(&one)),
        ]
    }

    fn tensor_mul_into(&self, x: &PolTensor<C>, y: &PolTensor<C>) -> PolTensor<C> {
        assert_eq!(x.legs, y.legs);
        let mut out = PolTensor::zero(x.legs);
        for (ka, ca) in x.terms() {
            for (kb, cb) in y.terms() {
                let mut acc: Vec<(Vec<Monomial>, C)> = vec![(Vec::new(), ca.clone() * cb.clone())];
                for (a, b) in ka.iter().zip(kb) {
                    let prods = self.mul_monomials(a, b);
                    let mut next = Vec::with_capacity(acc.len() * prods.len());
                    for (key, c) in &acc {
                        for (mono, d) in &prods {
                            let mut k2 = key.clone();
                            k2.push(*mono);
                            next.push((k2, c.clone() * d.clone()));
                        }
                    }
                    acc = next;
                }
                for (key, c) in acc {
                    out.accumulate(key, c);
                }
            }
        }
        out
    }

    /// Leg-wise product in the tensor power algebra.
    pub fn tensor_mul(&self, x: &PolTensor<C>, y: &PolTensor<C>) -> PolTensor<C> {
        self.tensor_mul_into(x, y)
    }

    fn tensor_pow(&self, x: &PolTensor<C>, e: u32) -> PolTensor<C> {
        let mut acc = PolTensor::elementary(&[self.one(), self.one()]);
        for _ in 0..e {
            acc = self.tensor_mul(&acc, x);
        }
        acc
    }

    /// Coproduct of the generators: `Δ(α) = α⊗α − qγ*⊗γ`, `Δ(γ) = γ⊗α + α*⊗γ`
    /// and their adjoints.
    pub fn comultiply_generator(&self, l: Letter) -> PolTensor<C> {
        let el = PolTensor::elementary;
        let neg_q = PolElement::scalar(-self.q.clone());
        let (a, as_, g, gs) = (self.alpha(), self.alpha_star(), self.gamma(), self.gamma_star());
        match l {
            Letter::Alpha => el(&[a.clone(), a]).add(&el(&[self.mul(&neg_q, &gs), g])),
            Letter::AlphaStar => el(&[as_.clone(), as_]).add(&el(&[self.mul(&neg_q, &g), gs])),
            Letter::Gamma => el(&[g.clone(), a]).add(&el(&[as_, g])),
            Letter::GammaStar => el(&[gs.clone(), as_]).add(&el(&[a, gs])),
        }
    }

    fn comultiply_monomial(&self, mono: &Monomial) -> PolTensor<C> {
        let da = if mono.k >= 0 {
            self.tensor_pow(&self.comultiply_generator(Letter::Alpha), mono.k as u32)
        } else {
            self.tensor_pow(&self.comultiply_generator(Letter::AlphaStar), (-mono.k) as u32)
        };
        let dg = self.tensor_pow(&self.comultiply_generator(Letter::Gamma), mono.l);
        let dgs = self.tensor_pow(&self.comultiply_generator(Letter::GammaStar), mono.m);
        self.tensor_mul(&self.tensor_mul(&da, &dg), &dgs)
    }

    /// The *-homomorphism `Δ: Pol → Pol ⊗ Pol`.
    pub fn comultiply(&self, x: &PolElement<C>) -> PolTensor<C> {
        let mut out = PolTensor::zero(2);
        for (mono, c) in x.terms() {
            for (key, d) in self.comultiply_monomial(mono).terms() {
                out.accumulate(key.clone(), c.clone() * d.clone());
            }
        }
        out
    }

    /// Applies `Δ` to one leg of a tensor, increasing the leg count by one.
    pub fn comultiply_leg(&self, x: &PolTensor<C>, leg: usize) -> PolTensor<C> {
        let mut out = PolTensor::zero(x.legs + 1);
        for (key, c) in x.terms() {
            for (pair, d) in self.comultiply_monomial(&key[leg]).terms() {
                let mut k2 = key[..leg].to_vec();
                k2.extend_from_slice(pair);
                k2.extend_from_slice(&key[leg + 1..]);
                out.accumulate(k2, c.clone() * d.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn qs(s: &str) -> QScalar {
        s.parse().unwrap()
    }

    fn ex() -> SUq2<QScalar> {
        SUq2::exact()
    }

    #[test]
    fn multiplication_examples() {
        let a = ex();
        let x = a.mul(&a.alpha(), &a.alpha_star());
        let want = a.one().sub(&a.mono(0, 1, 1).scale(&qs("q^2")));
        assert_eq!(x, want);
        assert_eq!(a.mul(&a.gamma_star(), &a.gamma()), a.mono(0, 1, 1));
        assert_eq!(a.mul(&a.gamma(), &a.alpha()), a.mono(1, 1, 0).scale(&qs("q^-1")));
    }

    #[test]
    fn adjoint_examples() {
        let a = ex();
        assert_eq!(a.adjoint(&a.one()), a.one());
        assert_eq!(a.adjoint(&a.alpha()), a.mono(-1, 0, 0));
        let ag = a.mul(&a.alpha(), &a.gamma());
        // γ*α* reordered by the letter-level relations
        let oracle = a.normalize_word(&[Letter::GammaStar, Letter::AlphaStar]);
        assert_eq!(a.adjoint(&ag), oracle);
        assert_eq!(oracle, a.mono(-1, 0, 1).scale(&qs("q")));
    }

    #[test]
    fn haar_examples() {
        let a = ex();
        assert_eq!(a.haar(&a.one()), QScalar::one());
        assert_eq!(a.haar(&a.alpha()), QScalar::zero());
        let gg = a.mul(&a.gamma_star(), &a.gamma());
        assert_eq!(a.haar(&gg), qs("(1 - q^2)/(1 - q^4)"));
        assert_eq!(a.haar(&PolElement::zero()), QScalar::zero());
    }

    #[test]
    fn haar_matches_geometric_series() {
        // (1−q²) Σ_k q^{2k} ⟨e_k⊗f_0, (γ*γ)^l e_k⊗f_0⟩ = (1−q²) Σ_k q^{2k(l+1)}
        let q = 0.6f64;
        let a = SUq2::numeric(q).unwrap();
        for l in 0..5u32 {
            let series: f64 = (0..2000).map(|k| (1.0 - q * q) * q.powi((2 * k * (l + 1)) as i32)).sum();
            let v = a.haar(&a.mono(0, l, l));
            assert!((v.re - series).abs() < 1e-13, "l={l}");
        }
    }

    #[test]
    fn gns_inner_examples() {
        let a = ex();
        assert_eq!(a.gns_inner(&a.one(), &a.one()), QScalar::one());
        assert_eq!(a.gns_inner(&a.alpha(), &a.gamma()), QScalar::zero());
        assert_eq!(a.gns_inner(&a.gamma(), &a.gamma()), qs("(1 - q^2)/(1 - q^4)"));
    }

    #[test]
    fn modular_sigma_examples() {
        let a = SUq2::numeric(0.5f64).unwrap();
        let g = a.gamma();
        assert_eq!(a.modular_sigma(1.3, &g).unwrap(), g);
        assert_eq!(a.modular_sigma(0.7, &a.one()).unwrap(), a.one());
        let s = a.modular_sigma(1.0, &a.alpha()).unwrap();
        let c = s.coeff(&Monomial::new(1, 0, 0));
        let want = Complex::new(0.0, -(0.5f64).ln()).exp();
        assert!((c - want).norm() < 1e-15);
        assert!((c.norm() - 1.0).abs() < 1e-15);
        let neg = SUq2::numeric(-0.5f64).unwrap();
        assert!(matches!(neg.modular_sigma(1.0, &neg.alpha()), Err(Error::NegativeQModular(_))));
    }

    #[test]
    fn heat_examples() {
        let a = SUq2::numeric(0.3f64).unwrap();
        let x = a.alpha().add(&a.mono(-2, 1, 3)).add(&a.gamma());
        assert_eq!(a.heat_phi(0.0, &x).unwrap(), x);
        assert_eq!(a.heat_phi(2.0, &a.gamma()).unwrap(), a.gamma());
        let y = a.heat_phi(0.8, &a.alpha()).unwrap();
        assert!((y.coeff(&Monomial::new(1, 0, 0)).re - (-0.8f64).exp()).abs() < 1e-15);
        assert!(matches!(a.heat_phi(-1.0, &x), Err(Error::NegativeTime(_))));
        assert!(a.heat_phi(1.0, &PolElement::zero()).unwrap().is_zero());
    }

    #[test]
    fn fourier_schur_examples() {
        let a = SUq2::numeric(0.4f64).unwrap();
        let x = a.alpha().add(&a.mono(-1, 2, 0)).add(&a.gamma());
        assert_eq!(a.fourier_schur(|_| Complex::new(1.0, 0.0), &x), x);
        let kill0 = |k: i64| if k == 0 { Complex::new(0.0, 0.0) } else { Complex::new(1.0, 0.0) };
        assert!(a.fourier_schur(kill0, &a.gamma()).is_zero());
        let t = 0.37;
        let h = a.fourier_schur(|k| Complex::new((-t * (k * k) as f64).exp(), 0.0), &x);
        assert_eq!(h, a.heat_phi(t, &x).unwrap());
    }

    #[test]
    fn comultiply_examples() {
        let a = ex();
        let one = a.comultiply(&a.one());
        assert_eq!(one, PolTensor::elementary(&[a.one(), a.one()]));
        let da = a.comultiply(&a.alpha());
        let want = PolTensor::elementary(&[a.alpha(), a.alpha()])
            .sub(&PolTensor::elementary(&[a.gamma_star().scale(&qs("q")), a.gamma()]));
        assert_eq!(da, want);
    }

    #[test]
    fn comultiply_gamma_squared_matches_legwise_words() {
        use Letter::*;
        let a = ex();
        // (γ⊗α + α*⊗γ)², each leg product reduced by word rewriting
        let summands = [(Gamma, Alpha), (AlphaStar, Gamma)];
        let mut oracle = PolTensor::zero(2);
        for (l1, r1) in summands {
            for (l2, r2) in summands {
                let left = a.normalize_word(&[l1, l2]);
                let right = a.normalize_word(&[r1, r2]);
                oracle = oracle.add(&PolTensor::elementary(&[left, right]));
            }
        }
        let g2 = a.mul(&a.gamma(), &a.gamma());
        assert_eq!(a.comultiply(&g2), oracle);
    }

    #[test]
    fn relations_hold_exactly() {
        let a = ex();
        for (name, d) in a.relation_defects() {
            assert!(d.is_zero(), "{name}: {d}");
        }
    }

    #[test]
    fn coassociativity_on_generators() {
        let a = ex();
        let ag = a.mul(&a.alpha(), &a.gamma());
        let g2 = a.pow(&a.gamma(), 2);
        for x in [a.alpha(), a.gamma(), a.alpha_star(), a.gamma_star(), g2, ag] {
            let d = a.comultiply(&x);
            assert_eq!(a.comultiply_leg(&d, 0), a.comultiply_leg(&d, 1));
        }
    }

    #[test]
    fn comultiply_is_multiplicative() {
        let a = ex();
        let x = a.mono(1, 1, 0);
        let y = a.mono(-1, 0, 1);
        let lhs = a.comultiply(&a.mul(&x, &y));
        let rhs = a.tensor_mul(&a.comultiply(&x), &a.comultiply(&y));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn heat_symmetry_exact_by_strata() {
        let a = ex();
        let monos: Vec<Monomial> = (-3..=3)
            .flat_map(|k| (0..=1).flat_map(move |l| (0..=1).map(move |m| Monomial::new(k, l, m))))
            .collect();
        for x in &monos {
            for y in &monos {
                let (xe, ye) = (PolElement::monomial(*x, QScalar::one()), PolElement::monomial(*y, QScalar::one()));
                // φ(Φ_t(x) y) = Σ_s e^{−ts} φ(x_s y)
                let left: BTreeMap<u64, QScalar> = a
                    .heat_strata(&xe)
                    .into_iter()
                    .map(|(s, xs)| (s, a.haar(&a.mul(&xs, &ye))))
                    .filter(|(_, v)| !v.is_zero())
                    .collect();
                let right: BTreeMap<u64, QScalar> = a
                    .heat_strata(&ye)
                    .into_iter()
                    .map(|(s, ys)| (s, a.haar(&a.mul(&xe, &ys))))
                    .filter(|(_, v)| !v.is_zero())
                    .collect();
                assert_eq!(left, right, "{x} {y}");
            }
        }
    }

    #[test]
    fn heat_commutes_with_modular_group() {
        let a = SUq2::numeric(0.45f64).unwrap();
        for k in -3..=3 {
            let x = a.mono(k, 1, 2);
            for (s, t) in [(0.3, 0.5), (1.7, 2.0)] {
                let l = a.heat_phi(t, &a.modular_sigma(s, &x).unwrap()).unwrap();
                let r = a.modular_sigma(s, &a.heat_phi(t, &x).unwrap()).unwrap();
                let d = l.sub(&r);
                assert!(d.terms().all(|(_, c)| c.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn haar_invariant_under_heat() {
        let a = SUq2::numeric(-0.7f64).unwrap();
        let x = a.one().add(&a.mono(0, 2, 2)).add(&a.mono(1, 1, 1)).add(&a.mono(-2, 0, 3));
        for t in [0.0, 0.4, 3.0] {
            let d = a.haar(&a.heat_phi(t, &x).unwrap()) - a.haar(&x);
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn gns_gram_positive_semidefinite() {
        let monos: Vec<Monomial> = (-2..=2)
            .flat_map(|k| (0..=2).flat_map(move |l| (0..=2).map(move |m| Monomial::new(k, l, m))))
            .collect();
        for q in [0.3, -0.3, 0.7, -0.7] {
            let a = SUq2::numeric(q).unwrap();
            let els: Vec<_> = monos.iter().map(|m| PolElement::monomial(*m, Complex::new(1.0, 0.0))).collect();
            let n = els.len();
            let g = nalgebra::DMatrix::from_fn(n, n, |i, j| a.gns_inner(&els[i], &els[j]));
            let min = g.symmetric_eigenvalues().min();
            assert!(min >= -1e-10, "q={q}: {min}");
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let a = ex();
        let z = PolElement::<QScalar>::zero();
        assert!(a.mul(&z, &a.alpha()).is_zero());
        assert!(a.adjoint(&z).is_zero());
        assert!(a.comultiply(&z).is_zero());
        assert!(a.haar(&z).is_zero());
    }

    #[test]
    fn line_and_json_forms() {
        let x = PolElement::parse_spec("(1 - q^2)/(1 - q^4) * 0 1 1 + -2 * -1 0 3 + 1 0 0").unwrap();
        assert_eq!(x.len(), 3);
        assert_eq!(PolElement::from_lines(&x.to_lines()).unwrap(), x);
        assert_eq!(PolElement::from_json(&x.to_json()).unwrap(), x);
        assert_eq!(PolElement::from_lines("").unwrap(), PolElement::zero());
        assert!(matches!(PolElement::parse_spec("1 0"), Err(Error::Parse { .. })));
        match PolElement::parse_spec("1 0 0 + 2 * x 1 1") {
            Err(Error::Parse { pos, .. }) => assert!(pos >= 8),
            other => panic!("{other:?}"),
        }
        assert_eq!(PolElement::parse_spec("1e+1 * 0 0 0").unwrap(), PolElement::scalar(QScalar::int(10)));
    }

    fn mono_strategy() -> impl Strategy<Value = Monomial> {
        (-3i64..=3, 0u32..=3, 0u32..=3).prop_map(|(k, l, m)| Monomial::new(k, l, m))
    }

    fn letter_strategy() -> impl Strategy<Value = Letter> {
        prop_oneof![
            Just(Letter::Alpha),
            Just(Letter::AlphaStar),
            Just(Letter::Gamma),
            Just(Letter::GammaStar)
        ]
    }

    fn coeff_strategy() -> impl Strategy<Value = QScalar> {
        (-3i64..=3, -2i64..=2).prop_map(|(c, e)| QScalar::int(c) * QScalar::q_pow(e))
    }

    fn element_strategy() -> impl Strategy<Value = PolElement<QScalar>> {
        prop::collection::vec((mono_strategy(), coeff_strategy()), 0..3).prop_map(PolElement::from_terms)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn associativity(x in mono_strategy(), y in mono_strategy(), z in mono_strategy()) {
            let a = ex();
            let (x, y, z) = (PolElement::monomial(x, QScalar::one()), PolElement::monomial(y, QScalar::one()), PolElement::monomial(z, QScalar::one()));
            prop_assert_eq!(a.mul(&a.mul(&x, &y), &z), a.mul(&x, &a.mul(&y, &z)));
        }

        #[test]
        fn closed_form_matches_word_rewriting(word in prop::collection::vec(letter_strategy(), 0..7)) {
            let a = ex();
            prop_assert_eq!(a.word_product(&word), a.normalize_word(&word));
        }

        #[test]
        fn involution(x in element_strategy(), y in element_strategy()) {
            let a = ex();
            prop_assert_eq!(a.adjoint(&a.adjoint(&x)), x.clone());
            prop_assert_eq!(a.adjoint(&a.mul(&x, &y)), a.mul(&a.adjoint(&y), &a.adjoint(&x)));
        }

        #[test]
        fn serialization_round_trip(x in element_strategy()) {
            prop_assert_eq!(PolElement::from_lines(&x.to_lines()).unwrap(), x.clone());
            prop_assert_eq!(PolElement::from_json(&x.to_json()).unwrap(), x);
        }
    }
}
