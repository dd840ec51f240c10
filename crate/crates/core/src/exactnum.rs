//! Exact arithmetic in a real quadratic field Q(√D).
//!
//! A [`QuadNumber`] is `(p + q·√D)/s` with `s > 0` and `gcd(p, q, s) = 1`.
//! Pure rationals have `q = 0` and carry no radicand, so they combine freely
//! with numbers of any field. Two numbers with different non-trivial
//! radicands cannot be combined.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadNumber {
    p: BigInt,
    q: BigInt,
    s: BigInt,
    /// Radicand; `0` exactly when `q == 0`.
    d: u64,
}

/// Directed rounding modes for conversion to `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    Down,
    Up,
}

/// Field operations accepted by [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The integer comparison that decided a sign.
///
/// For `(p + q√D)/s` with `p` and `q` of opposite signs, the sign is the sign
/// of `lhs - rhs` where the two sides are `p²` and `q²D` in the appropriate
/// order. For the remaining cases `lhs` is the deciding integer and `rhs` is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignWitness {
    pub sign: i8,
    pub lhs: BigInt,
    pub rhs: BigInt,
}

impl fmt::Display for SignWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.lhs.cmp(&self.rhs) {
            Ordering::Less => "<",
            Ordering::Equal => "=",
            Ordering::Greater => ">",
        };
        write!(f, "{} {} {}", self.lhs, rel, self.rhs)
    }
}

pub fn is_perfect_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

impl QuadNumber {
    /// Builds `(p + q√d)/s`, canonicalizing signs and common factors.
    pub fn new(p: BigInt, q: BigInt, s: BigInt, d: u64) -> Result<Self> {
        if s.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !q.is_zero() && (d == 0 || is_perfect_square(d)) {
            return Err(Error::InvalidRadicand(d));
        }
        Ok(Self::canonical(p, q, s, d))
    }

    fn canonical(mut p: BigInt, mut q: BigInt, mut s: BigInt, d: u64) -> Self {
        debug_assert!(!s.is_zero());
        if s.is_negative() {
            p = -p;
            q = -q;
            s = -s;
        }
        let g = p.gcd(&q).gcd(&s);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            s /= &g;
        }
        let d = if q.is_zero() { 0 } else { d };
        QuadNumber { p, q, s, d }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        QuadNumber {
            p: BigInt::from(n),
            q: BigInt::zero(),
            s: BigInt::one(),
            d: 0,
        }
    }

    pub fn rational(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::canonical(BigInt::from(num), BigInt::zero(), BigInt::from(den), 0)
    }

    pub fn from_big_rational(num: BigInt, den: BigInt) -> Result<Self> {
        Self::new(num, BigInt::zero(), den, 0)
    }

    /// `√d` itself.
    pub fn sqrt_of(d: u64) -> Result<Self> {
        Self::new(BigInt::zero(), BigInt::one(), BigInt::one(), d)
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn s(&self) -> &BigInt {
        &self.s
    }

    /// Radicand, or 0 for a rational.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// Numerator and denominator when rational.
    pub fn as_rational(&self) -> Option<(BigInt, BigInt)> {
        self.is_rational().then(|| (self.p.clone(), self.s.clone()))
    }

    fn join_radicand(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::RadicandMismatch(a, b)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.join_radicand(other)?;
        let p = &self.p * &other.s + &other.p * &self.s;
        let q = &self.q * &other.s + &other.q * &self.s;
        let s = &self.s * &other.s;
        Ok(Self::canonical(p, q, s, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.join_radicand(other)?;
        let dd = BigInt::from(d);
        let p = &self.p * &other.p + &self.q * &other.q * &dd;
        let q = &self.p * &other.q + &self.q * &other.p;
        let s = &self.s * &other.s;
        Ok(Self::canonical(p, q, s, d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let inv = other.recip()?;
        self.checked_mul(&inv)
    }

    /// Multiplicative inverse: `s/(p + q√D) = s(p - q√D)/(p² - q²D)`.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let norm = &self.p * &self.p - &self.q * &self.q * BigInt::from(self.d);
        // D is not a perfect square, so the norm of a nonzero element is nonzero.
        debug_assert!(!norm.is_zero());
        Ok(Self::canonical(
            &self.s * &self.p,
            -(&self.s * &self.q),
            norm,
            self.d,
        ))
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = QuadNumber::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact sign, decided by integer comparisons only.
    pub fn sign(&self) -> i8 {
        self.sign_witness().sign
    }

    /// Exact sign together with the integer comparison that decided it.
    pub fn sign_witness(&self) -> SignWitness {
        let sp = signum(&self.p);
        let sq = signum(&self.q);
        match (sp, sq) {
            (0, 0) => SignWitness {
                sign: 0,
                lhs: BigInt::zero(),
                rhs: BigInt::zero(),
            },
            (_, 0) => SignWitness {
                sign: sp,
                lhs: self.p.clone(),
                rhs: BigInt::zero(),
            },
            (0, _) => SignWitness {
                sign: sq,
                lhs: self.q.clone(),
                rhs: BigInt::zero(),
            },
            // p and q share a sign
            (a, b) if a == b => SignWitness {
                sign: a,
                lhs: self.p.clone(),
                rhs: BigInt::zero(),
            },
            (1, -1) => {
                // p > 0 > q: sign(p² - q²D)
                let lhs = &self.p * &self.p;
                let rhs = &self.q * &self.q * BigInt::from(self.d);
                let sign = ordering_sign(lhs.cmp(&rhs));
                SignWitness { sign, lhs, rhs }
            }
            _ => {
                // p < 0 < q: sign(q²D - p²)
                let lhs = &self.q * &self.q * BigInt::from(self.d);
                let rhs = &self.p * &self.p;
                let sign = ordering_sign(lhs.cmp(&rhs));
                SignWitness { sign, lhs, rhs }
            }
        }
    }

    /// Certified dyadic enclosure: returns `(lo, hi)` with
    /// `lo / 2^bits <= self <= hi / 2^bits` and `hi - lo <= 2`.
    pub fn dyadic_enclosure(&self, bits: u32) -> (BigInt, BigInt) {
        let scale = BigInt::one() << bits;
        let base = &self.p * &scale;
        let (rlo, rhi) = if self.q.is_zero() {
            (BigInt::zero(), BigInt::zero())
        } else {
            // floor(|q|·√D·2^bits)
            let rad = &self.q * &self.q * BigInt::from(self.d) * &scale * &scale;
            let r = rad.sqrt();
            let exact = &r * &r == rad;
            let up = if exact { r.clone() } else { &r + 1 };
            if self.q.is_positive() {
                (r, up)
            } else {
                (-up, -r)
            }
        };
        let nlo = &base + rlo;
        let nhi = &base + rhi;
        (nlo.div_floor(&self.s), ceil_div(&nhi, &self.s))
    }

    /// Conversion to binary64. `Down`/`Up` are certified bounds; `Nearest`
    /// is within 2 ulp of the exact value.
    pub fn to_f64(&self, mode: Rounding) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut bits = 128u32;
        loop {
            let (lo, hi) = self.dyadic_enclosure(bits);
            // 64 significant bits in both endpoints pin the f64 within one ulp
            let tight = lo == hi
                || (lo.sign() == hi.sign()
                    && lo.sign() != Sign::NoSign
                    && lo.magnitude().bits().min(hi.magnitude().bits()) > 64);
            if tight || bits >= 1 << 14 {
                return match mode {
                    Rounding::Down => dyadic_to_f64(&lo, bits, Rounding::Down),
                    Rounding::Up => dyadic_to_f64(&hi, bits, Rounding::Up),
                    Rounding::Nearest => dyadic_to_f64(&lo, bits, Rounding::Nearest),
                };
            }
            bits *= 2;
        }
    }

    /// Parses the literal grammar `INT`, `INT/NAT`, or `(INT±NATr)/NAT`,
    /// where `r` stands for `√radicand`.
    pub fn parse(text: &str, radicand: u64) -> Result<Self> {
        let t = text.trim();
        let bad = || Error::Parse(format!("invalid number literal `{text}`"));
        if let Some(rest) = t.strip_prefix('(') {
            let (inner, den) = rest.split_once(")/").ok_or_else(bad)?;
            let den: BigInt = parse_nat(den).ok_or_else(bad)?;
            let inner = inner.strip_suffix('r').ok_or_else(bad)?;
            // split at the last sign that is not the leading one
            let split = inner
                .char_indices()
                .skip(1)
                .filter(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i)
                .last()
                .ok_or_else(bad)?;
            let (ps, qs) = inner.split_at(split);
            let p: BigInt = parse_int(ps).ok_or_else(bad)?;
            let neg = qs.starts_with('-');
            let qmag: BigInt = parse_nat(&qs[1..]).ok_or_else(bad)?;
            let q = if neg { -qmag } else { qmag };
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            if q.is_zero() {
                return Self::new(p, q, den, 0);
            }
            Self::new(p, q, den, radicand)
        } else if let Some((num, den)) = t.split_once('/') {
            let p = parse_int(num).ok_or_else(bad)?;
            let s = parse_nat(den).ok_or_else(bad)?;
            Self::new(p, BigInt::zero(), s, 0)
        } else {
            let p = parse_int(t).ok_or_else(bad)?;
            Ok(Self::canonical(p, BigInt::zero(), BigInt::one(), 0))
        }
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_nat(s: &str) -> Option<BigInt> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn signum(x: &BigInt) -> i8 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

fn ordering_sign(o: Ordering) -> i8 {
    match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// `m / 2^bits` rounded to `f64` in the requested direction.
pub fn dyadic_to_f64(m: &BigInt, bits: u32, mode: Rounding) -> f64 {
    scaled_to_f64(m, -(bits as i64), mode)
}

/// `m · 2^exp` rounded to `f64` in the requested direction.
pub fn scaled_to_f64(m: &BigInt, exp: i64, mode: Rounding) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let negative = m.is_negative();
    let mag = m.magnitude();
    let len = mag.bits();
    let (mut top, shift, inexact, above_half, at_half) = if len <= 53 {
        (mag.to_u64().unwrap(), 0i64, false, false, false)
    } else {
        let sh = len - 53;
        let top = (mag >> sh).to_u64().unwrap();
        let rem = mag - (num_bigint::BigUint::from(top) << sh);
        let half = num_bigint::BigUint::one() << (sh - 1);
        let inexact = !rem.is_zero();
        (top, sh as i64, inexact, rem > half, rem == half)
    };
    // magnitude rounding direction
    let round_up_mag = match (mode, negative) {
        (Rounding::Nearest, _) => above_half || (at_half && top & 1 == 1),
        (Rounding::Down, false) | (Rounding::Up, true) => false,
        (Rounding::Up, false) | (Rounding::Down, true) => inexact,
    };
    if round_up_mag {
        top += 1;
    }
    let value = scale_pow2(top as f64, shift + exp);
    if negative {
        -value
    } else {
        value
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Checked field operation on two numbers.
pub fn arith(x: &QuadNumber, y: &QuadNumber, op: ArithOp) -> Result<QuadNumber> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Div => x.checked_div(y),
    }
}

impl fmt::Display for QuadNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            if self.s.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.s)
            }
        } else {
            let sign = if self.q.is_negative() { '-' } else { '+' };
            write!(f, "({}{}{}r)/{}", self.p, sign, self.q.magnitude(), self.s)
        }
    }
}

impl fmt::Debug for QuadNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 0 {
            write!(f, "{self}")
        } else {
            write!(f, "{self} [r=√{}]", self.d)
        }
    }
}

impl PartialOrd for QuadNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadNumber {
    /// Panics when comparing numbers from different quadratic fields.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self - other).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl Neg for &QuadNumber {
    type Output = QuadNumber;
    fn neg(self) -> QuadNumber {
        QuadNumber {
            p: -self.p.clone(),
            q: -self.q.clone(),
            s: self.s.clone(),
            d: self.d,
        }
    }
}

impl Neg for QuadNumber {
    type Output = QuadNumber;
    fn neg(self) -> QuadNumber {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&QuadNumber> for &QuadNumber {
            type Output = QuadNumber;
            /// Panics on radicand mismatch.
            fn $method(self, rhs: &QuadNumber) -> QuadNumber {
                self.$checked(rhs).expect("quadratic field mismatch")
            }
        }
        impl $trait<QuadNumber> for QuadNumber {
            type Output = QuadNumber;
            fn $method(self, rhs: QuadNumber) -> QuadNumber {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadNumber> for QuadNumber {
            type Output = QuadNumber;
            fn $method(self, rhs: &QuadNumber) -> QuadNumber {
                (&self).$method(rhs)
            }
        }
        impl $trait<QuadNumber> for &QuadNumber {
            type Output = QuadNumber;
            fn $method(self, rhs: QuadNumber) -> QuadNumber {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
