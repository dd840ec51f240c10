//! High-precision binary floating point for dimension solving and
//! logarithm enclosures.
//!
//! Every directed result is additionally widened by a relative
//! `2^-(PRECISION - GUARD_BITS)` so enclosures stay valid even if the
//! underlying library rounds a transcendental function by a few ulp.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;

use crate::exactnum::{scaled_to_f64, QuadNumber, Rounding};

/// Working precision in bits.
pub const PRECISION: usize = 256;
const GUARD_BITS: usize = 32;

pub struct HiPrec {
    pub precision: usize,
    cc: Consts,
}

impl Default for HiPrec {
    fn default() -> Self {
        Self::new(PRECISION)
    }
}

impl HiPrec {
    pub fn new(precision: usize) -> Self {
        HiPrec {
            precision,
            cc: Consts::new().expect("constants cache"),
        }
    }

    fn rm(mode: Rounding) -> RoundingMode {
        match mode {
            Rounding::Nearest => RoundingMode::ToEven,
            Rounding::Down => RoundingMode::Down,
            Rounding::Up => RoundingMode::Up,
        }
    }

    pub fn from_int(&mut self, n: &BigInt) -> BigFloat {
        let p = self.precision.max(n.bits() as usize + 64);
        BigFloat::parse(&n.to_string(), Radix::Dec, p, RoundingMode::None, &mut self.cc)
    }

    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.precision)
    }

    /// `x` rounded in direction `mode` at the working precision.
    pub fn quad(&mut self, x: &QuadNumber, mode: Rounding) -> BigFloat {
        let bits = self.precision as u32 + 64;
        let (lo, hi) = x.dyadic_enclosure(bits);
        let num = match mode {
            Rounding::Up => hi,
            _ => lo,
        };
        let num = self.from_int(&num);
        let den = self.from_int(&(BigInt::from(1) << bits));
        num.div(&den, self.precision, Self::rm(mode))
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat, mode: Rounding) -> BigFloat {
        a.add(b, self.precision, Self::rm(mode))
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat, mode: Rounding) -> BigFloat {
        a.sub(b, self.precision, Self::rm(mode))
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat, mode: Rounding) -> BigFloat {
        a.mul(b, self.precision, Self::rm(mode))
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat, mode: Rounding) -> BigFloat {
        a.div(b, self.precision, Self::rm(mode))
    }

    pub fn ln(&mut self, x: &BigFloat, mode: Rounding) -> BigFloat {
        let r = x.ln(self.precision, Self::rm(mode), &mut self.cc);
        self.widen(r, mode)
    }

    pub fn exp(&mut self, x: &BigFloat, mode: Rounding) -> BigFloat {
        let r = x.exp(self.precision, Self::rm(mode), &mut self.cc);
        self.widen(r, mode)
    }

    /// `base^exponent` for positive `base`, via `exp(exponent · ln base)`.
    pub fn powf(&mut self, base: &BigFloat, exponent: &BigFloat, mode: Rounding) -> BigFloat {
        let l = base.ln(self.precision, RoundingMode::ToEven, &mut self.cc);
        let t = l.mul(exponent, self.precision, RoundingMode::ToEven);
        t.exp(self.precision, Self::rm(mode), &mut self.cc)
    }

    fn widen(&self, x: BigFloat, mode: Rounding) -> BigFloat {
        if mode == Rounding::Nearest || x.is_zero() {
            return x;
        }
        let eps = BigFloat::from_f64(2f64.powi(-((self.precision - GUARD_BITS) as i32)), 64);
        let delta = x.abs().mul(&eps, self.precision, RoundingMode::Up);
        match mode {
            Rounding::Up => x.add(&delta, self.precision, RoundingMode::Up),
            _ => x.sub(&delta, self.precision, RoundingMode::Down),
        }
    }
}

/// Directed conversion of a finite `BigFloat` to `f64`.
pub fn to_f64(x: &BigFloat, mode: Rounding) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let (words, _bits, sign, exponent, _) = x.as_raw_parts().expect("finite value");
    // normalized mantissa 0.m with its top bit in the last word:
    // |x| = top·2^(e-64) + tail, 0 <= tail < 2^(e-64)
    let top = BigInt::from(*words.last().unwrap());
    let tail = words[..words.len() - 1].iter().any(|w| *w != 0);
    let e = exponent as i64 - 64;
    let lo = scaled_to_f64(&top, e, Rounding::Down);
    let hi = scaled_to_f64(&(&top + u64::from(tail)), e, Rounding::Up);
    let near = scaled_to_f64(&top, e, Rounding::Nearest);
    match (mode, sign == Sign::Neg) {
        (Rounding::Nearest, false) => near,
        (Rounding::Nearest, true) => -near,
        (Rounding::Down, false) => lo,
        (Rounding::Up, false) => hi,
        (Rounding::Down, true) => -hi,
        (Rounding::Up, true) => -lo,
    }
}
