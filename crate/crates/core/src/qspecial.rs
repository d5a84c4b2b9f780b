//! Exact arithmetic in the deformation parameter `q`.
//!
//! [`Laurent`] holds integer Laurent polynomials in `q`; [`QScalar`] is a
//! rational function `num / den` kept in a canonical reduced form so that
//! structural equality is mathematical equality. [`Poly1`] is a polynomial in
//! one auxiliary commuting variable (used for polynomials in `γ*γ`), and the
//! q-Pochhammer symbol and Gaussian binomials are generic over the
//! coefficient ring.

use crate::error::{Error, Result};
use crate::scalar::{Coeff, Real, Ring};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

// ---------------------------------------------------------------------------
// dense integer polynomials (constant term first)

fn trim(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive_part(p: &[BigInt]) -> Vec<BigInt> {
    let c = content(p);
    if c.is_zero() {
        return Vec::new();
    }
    let mut out: Vec<BigInt> = p.iter().map(|x| x / &c).collect();
    if out.last().is_some_and(|l| l.is_negative()) {
        out.iter_mut().for_each(|x| *x = -x.clone());
    }
    out
}

/// Remainder of `a` by `b` up to a nonzero constant factor.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for x in r.iter_mut() {
            *x *= lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= &lr * bc;
        }
        trim(&mut r);
        let c = content(&r);
        if !c.is_zero() && !c.is_one() {
            for x in r.iter_mut() {
                *x = &*x / &c;
            }
        }
    }
    r
}

/// Primitive gcd over ℤ[q] with positive leading coefficient.
fn poly_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (mut a, mut b) = (primitive_part(a), primitive_part(b));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    if b.is_empty() {
        return a;
    }
    loop {
        let r = pseudo_rem(&a, &b);
        if r.is_empty() {
            return primitive_part(&b);
        }
        if r.len() == 1 {
            return vec![BigInt::one()];
        }
        a = b;
        b = primitive_part(&r);
    }
}

/// Exact quotient; panics if `b` does not divide `a` over ℤ.
fn poly_div_exact(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let (c, rem) = r[dr].div_rem(&b[db]);
        assert!(rem.is_zero(), "inexact polynomial division");
        let shift = dr - db;
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= &c * bc;
        }
        q[shift] = c;
        trim(&mut r);
    }
    assert!(r.is_empty(), "inexact polynomial division");
    trim(&mut q);
    q
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

// ---------------------------------------------------------------------------

/// Integer-coefficient Laurent polynomial `Σ c_e q^e`.
///
/// Stored as a lowest exponent plus a dense coefficient vector whose first
/// and last entries are nonzero; the zero polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Laurent {
    low: i64,
    coeffs: Vec<BigInt>,
}

impl Laurent {
    fn from_parts(low: i64, mut coeffs: Vec<BigInt>) -> Self {
        trim(&mut coeffs);
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == coeffs.len() {
            return Self::default();
        }
        coeffs.drain(..lead);
        Self {
            low: low + lead as i64,
            coeffs,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_parts(0, vec![c.into()])
    }

    /// `c · q^e`.
    pub fn monomial(c: impl Into<BigInt>, e: i64) -> Self {
        Self::from_parts(e, vec![c.into()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Lowest exponent present (0 for the zero polynomial).
    pub fn low(&self) -> i64 {
        self.low
    }

    /// Highest exponent present (0 for the zero polynomial).
    pub fn high(&self) -> i64 {
        self.low + (self.coeffs.len() as i64 - 1).max(0)
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        let i = e - self.low;
        if i < 0 {
            return BigInt::zero();
        }
        self.coeffs.get(i as usize).cloned().unwrap_or_default()
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn eval<T: Real>(&self, q: T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * q + T::lit(c.to_f64().expect("coefficient fits f64"));
        }
        acc * q.powi(self.low as i32)
    }

    fn add_ref(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let low = self.low.min(o.low);
        let high = self.high().max(o.high());
        let mut v = vec![BigInt::zero(); (high - low + 1) as usize];
        for (e, c) in self.terms().chain(o.terms()) {
            v[(e - low) as usize] += c;
        }
        Self::from_parts(low, v)
    }

    fn neg_ref(&self) -> Self {
        Self {
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        Self::from_parts(self.low + o.low, poly_mul(&self.coeffs, &o.coeffs))
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (e, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{a}*q")?,
                (_, true) => write!(f, "q^{e}")?,
                (_, false) => write!(f, "{a}*q^{e}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------

/// Exact rational function of `q` with integer coefficients.
///
/// Canonical form: `num = q^s · N(q)`, `den = D(q)` with `N(0), D(0) ≠ 0`,
/// `gcd(N, D) = 1` as polynomials, jointly primitive integer contents, and a
/// positive leading coefficient of `D`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QScalar {
    num: Laurent,
    den: Laurent,
}

impl QScalar {
    fn one_den() -> Laurent {
        Laurent::constant(1)
    }

    /// Builds `num / den` in canonical form.
    pub fn ratio(num: Laurent, den: Laurent) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Laurent, den: Laurent) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_one() {
            return Self { num, den };
        }
        let shift = num.low - den.low;
        let (mut n, mut d) = (num.coeffs, den.coeffs);
        if d.len() > 1 && n.len() > 1 {
            let g = poly_gcd(&n, &d);
            if g.len() > 1 {
                n = poly_div_exact(&n, &g);
                d = poly_div_exact(&d, &g);
            }
        }
        let c = content(&n).gcd(&content(&d));
        let sign = if d.last().is_some_and(|l| l.is_negative()) {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let c = c * sign;
        if !c.is_one() {
            n.iter_mut().for_each(|x| *x = &*x / &c);
            d.iter_mut().for_each(|x| *x = &*x / &c);
        }
        Self {
            num: Laurent::from_parts(shift, n),
            den: Laurent::from_parts(0, d),
        }
    }

    /// The indeterminate `q`.
    pub fn q() -> Self {
        Self::q_pow(1)
    }

    pub fn q_pow(e: i64) -> Self {
        Self {
            num: Laurent::monomial(1, e),
            den: Self::one_den(),
        }
    }

    pub fn int(c: i64) -> Self {
        Self::from_laurent(Laurent::constant(c))
    }

    pub fn rational(n: i64, d: i64) -> Result<Self> {
        Self::ratio(Laurent::constant(n), Laurent::constant(d))
    }

    pub fn from_laurent(l: Laurent) -> Self {
        Self {
            num: l,
            den: Self::one_den(),
        }
    }

    pub fn numerator(&self) -> &Laurent {
        &self.num
    }

    pub fn denominator(&self) -> &Laurent {
        &self.den
    }

    /// True when the denominator is 1.
    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(
            self.num.mul_ref(&o.den),
            self.den.mul_ref(&o.num),
        ))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Numeric value at `q`; `None` if `q` is a pole.
    pub fn eval<T: Real>(&self, q: T) -> Option<T> {
        let d = self.den.eval(q);
        if d == T::zero() {
            return None;
        }
        Some(self.num.eval(q) / d)
    }
}

impl Zero for QScalar {
    fn zero() -> Self {
        Self {
            num: Laurent::zero(),
            den: Self::one_den(),
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for QScalar {
    fn one() -> Self {
        Self::int(1)
    }
}

impl<'a> Add<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn add(self, o: &QScalar) -> QScalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let num = self.num.add_ref(&o.num);
            if self.den.is_one() {
                return QScalar {
                    num,
                    den: self.den.clone(),
                };
            }
            return QScalar::normalize(num, self.den.clone());
        }
        QScalar::normalize(
            self.num.mul_ref(&o.den).add_ref(&o.num.mul_ref(&self.den)),
            self.den.mul_ref(&o.den),
        )
    }
}

impl<'a> Mul<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn mul(self, o: &QScalar) -> QScalar {
        if self.is_zero() || o.is_zero() {
            return QScalar::zero();
        }
        let num = self.num.mul_ref(&o.num);
        if self.den.is_one() && o.den.is_one() {
            return QScalar {
                num,
                den: self.den.clone(),
            };
        }
        QScalar::normalize(num, self.den.mul_ref(&o.den))
    }
}

impl<'a> Sub<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn sub(self, o: &QScalar) -> QScalar {
        self + &(-o)
    }
}

impl Neg for &QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        QScalar {
            num: self.num.neg_ref(),
            den: self.den.clone(),
        }
    }
}

impl Neg for QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        -&self
    }
}

impl<'a> Div<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    /// Panics on division by zero; use [`QScalar::checked_div`] otherwise.
    fn div(self, o: &QScalar) -> QScalar {
        self.checked_div(o).expect("QScalar division by zero")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QScalar {
            type Output = QScalar;
            fn $m(self, o: QScalar) -> QScalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a QScalar> for QScalar {
            type Output = QScalar;
            fn $m(self, o: &QScalar) -> QScalar {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Ring for QScalar {}

impl Coeff for QScalar {
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl fmt::Display for QScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl FromStr for QScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse::parse_qscalar(s)
    }
}

impl serde::Serialize for QScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for QScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------

/// Polynomial in one auxiliary commuting variable `X` with coefficients in a
/// ring. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly1<R> {
    coeffs: BTreeMap<u32, R>,
}

/// Polynomial in `X` over exact `q`-scalars.
pub type QPolynomial1Var = Poly1<QScalar>;

impl<R: Ring> Poly1<R> {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: R) -> Self {
        Self::monomial(c, 0)
    }

    /// `c · X^d`.
    pub fn monomial(c: R, d: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(d, c);
        }
        Self { coeffs }
    }

    /// The variable `X`.
    pub fn x() -> Self {
        Self::monomial(R::one(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, d: u32) -> R {
        self.coeffs.get(&d).cloned().unwrap_or_else(R::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &R)> + '_ {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    fn accumulate(&mut self, d: u32, c: R) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(d).or_insert_with(R::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.coeffs.remove(&d);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in o.terms() {
            out.accumulate(d, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &R) -> Self {
        let mut out = Self::zero();
        for (d, c) in self.terms() {
            out.accumulate(d, c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (d1, c1) in self.terms() {
            for (d2, c2) in o.terms() {
                out.accumulate(d1 + d2, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// `P(s·X)`: coefficient of `X^d` multiplied by `s^d`.
    pub fn rescale_variable(&self, s: &R) -> Self {
        let mut out = Self::zero();
        let mut pow = R::one();
        let mut at = 0u32;
        for (d, c) in self.terms() {
            while at < d {
                pow = pow * s.clone();
                at += 1;
            }
            out.accumulate(d, c.clone() * pow.clone());
        }
        out
    }

    pub fn eval(&self, x: &R) -> R {
        let mut acc = R::zero();
        for (d, c) in self.terms() {
            let mut p = R::one();
            for _ in 0..d {
                p = p * x.clone();
            }
            acc = acc + c.clone() * p;
        }
        acc
    }
}

fn ring_pow<R: Ring>(b: &R, e: u32) -> R {
    let mut acc = R::one();
    for _ in 0..e {
        acc = acc * b.clone();
    }
    acc
}

/// q-Pochhammer symbol `(x; base)_k = ∏_{j=0}^{k-1} (1 − base^j · x)`.
pub fn q_pochhammer<R: Ring>(x: &Poly1<R>, base: &R, k: u32) -> Poly1<R> {
    let mut acc = Poly1::constant(R::one());
    let mut bj = R::one();
    for _ in 0..k {
        let factor = Poly1::constant(R::one()).add(&x.scale(&(-bj.clone())));
        acc = acc.mul(&factor);
        bj = bj * base.clone();
    }
    acc
}

/// Gaussian binomial coefficient `[n choose i]_base`, built from the
/// recurrence `[n,i] = [n−1,i−1] + base^i [n−1,i]`.
pub fn q_binomial<R: Ring>(n: u32, i: u32, base: &R) -> Result<R> {
    if i > n {
        return Err(Error::BinomialRange { n, i });
    }
    // row[j] = [m choose j]
    let mut row = vec![R::one()];
    for m in 1..=n {
        let mut next = Vec::with_capacity(m as usize + 1);
        for j in 0..=m {
            let left = if j >= 1 { row[j as usize - 1].clone() } else { R::zero() };
            let right = if j < m {
                ring_pow(base, j) * row[j as usize].clone()
            } else {
                R::zero()
            };
            next.push(left + right);
        }
        row = next;
    }
    Ok(row[i as usize].clone())
}

// ---------------------------------------------------------------------------

pub(crate) mod parse {
    //! Recursive-descent parser for rational expressions in `q`:
    //! `expr := term (('+'|'-') term)*`, `term := unary (('*'|'/') unary)*`,
    //! `unary := ('-'|'+') unary | atom ('^' int)?`, `atom := number | q | (expr)`.

    use super::{Laurent, QScalar};
    use crate::error::{Error, Result};
    use num_bigint::BigInt;
    use num_traits::{One, Zero};

    struct Parser<'a> {
        src: &'a [u8],
        pos: usize,
    }

    pub fn parse_qscalar(s: &str) -> Result<QScalar> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(v)
    }

    impl Parser<'_> {
        fn err(&self, msg: &str) -> Error {
            Error::Parse {
                pos: self.pos,
                msg: msg.to_string(),
            }
        }

        fn skip_ws(&mut self) {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }

        fn peek(&mut self) -> Option<u8> {
            self.skip_ws();
            self.src.get(self.pos).copied()
        }

        fn expr(&mut self) -> Result<QScalar> {
            let mut acc = self.term()?;
            while let Some(c) = self.peek() {
                match c {
                    b'+' => {
                        self.pos += 1;
                        acc = acc + self.term()?;
                    }
                    b'-' => {
                        self.pos += 1;
                        acc = acc - self.term()?;
                    }
                    _ => break,
                }
            }
            Ok(acc)
        }

        fn term(&mut self) -> Result<QScalar> {
            let mut acc = self.unary()?;
            loop {
                match self.peek() {
                    Some(b'*') => {
                        self.pos += 1;
                        acc = acc * self.unary()?;
                    }
                    Some(b'/') => {
                        self.pos += 1;
                        let at = self.pos;
                        let d = self.unary()?;
                        acc = acc.checked_div(&d).map_err(|_| Error::Parse {
                            pos: at,
                            msg: "division by zero".into(),
                        })?;
                    }
                    // implicit product, as in `3q^2` or `2(1 - q)`
                    Some(b'q') | Some(b'(') => acc = acc * self.unary()?,
                    _ => return Ok(acc),
                }
            }
        }

        fn unary(&mut self) -> Result<QScalar> {
            match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    Ok(-self.unary()?)
                }
                Some(b'+') => {
                    self.pos += 1;
                    self.unary()
                }
                _ => {
                    let base = self.atom()?;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let at = self.pos;
                        let e = self.exponent()?;
                        if e >= 0 {
                            Ok(base.pow(e as u32))
                        } else {
                            QScalar::one()
                                .checked_div(&base.pow((-e) as u32))
                                .map_err(|_| Error::Parse {
                                    pos: at,
                                    msg: "negative power of zero".into(),
                                })
                        }
                    } else {
                        Ok(base)
                    }
                }
            }
        }

        fn exponent(&mut self) -> Result<i64> {
            let paren = self.peek() == Some(b'(');
            if paren {
                self.pos += 1;
            }
            let neg = match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected integer exponent"));
            }
            let txt = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let v: i64 = txt.parse().map_err(|_| self.err("exponent out of range"))?;
            if paren {
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
            }
            Ok(if neg { -v } else { v })
        }

        fn atom(&mut self) -> Result<QScalar> {
            match self.peek() {
                Some(b'q') => {
                    self.pos += 1;
                    Ok(QScalar::q())
                }
                Some(b'(') => {
                    self.pos += 1;
                    let v = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err(self.err("expected ')'"));
                    }
                    self.pos += 1;
                    Ok(v)
                }
                Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
                Some(_) => Err(self.err("expected number, 'q' or '('")),
                None => Err(self.err("unexpected end of input")),
            }
        }

        /// Decimal literal, converted exactly: `0.25` is `1/4`, `1e-3` is `1/1000`.
        fn number(&mut self) -> Result<QScalar> {
            let start = self.pos;
            let mut digits = String::new();
            let mut frac = 0i64;
            let mut seen_dot = false;
            while self.pos < self.src.len() {
                let c = self.src[self.pos];
                if c.is_ascii_digit() {
                    digits.push(c as char);
                    if seen_dot {
                        frac += 1;
                    }
                } else if c == b'.' && !seen_dot {
                    seen_dot = true;
                } else {
                    break;
                }
                self.pos += 1;
            }
            if digits.is_empty() {
                self.pos = start;
                return Err(self.err("malformed number"));
            }
            let mut exp10 = -frac;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                self.pos += 1;
                let neg = match self.src.get(self.pos) {
                    Some(b'-') => {
                        self.pos += 1;
                        true
                    }
                    Some(b'+') => {
                        self.pos += 1;
                        false
                    }
                    _ => false,
                };
                let s = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if s == self.pos {
                    return Err(self.err("malformed exponent"));
                }
                let e: i64 = std::str::from_utf8(&self.src[s..self.pos])
                    .expect("ascii")
                    .parse()
                    .map_err(|_| self.err("exponent out of range"))?;
                exp10 += if neg { -e } else { e };
            }
            let mantissa: BigInt = digits.parse().expect("digits");
            let ten = BigInt::from(10);
            let scale = num_traits::pow(ten, exp10.unsigned_abs() as usize);
            let (n, d) = if exp10 >= 0 {
                (mantissa * scale, BigInt::one())
            } else {
                (mantissa, scale)
            };
            debug_assert!(!d.is_zero());
            QScalar::ratio(Laurent::constant(n), Laurent::constant(d))
        }
    }
}
