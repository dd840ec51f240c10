use lsc_core::{QuadNumber, Rounding};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// `a + b√42` as a pair of rationals.
type Pair = (BigRational, BigRational);

fn parts(x: &QuadNumber) -> Pair {
    (
        BigRational::new(x.p().clone(), x.s().clone()),
        BigRational::new(x.q().clone(), x.s().clone()),
    )
}

fn build(a: (i64, i64), b: (i64, i64)) -> QuadNumber {
    let r = QuadNumber::sqrt_of(42).unwrap();
    &QuadNumber::rational(a.0, a.1) + &(&QuadNumber::rational(b.0, b.1) * &r)
}

fn value() -> impl Strategy<Value = ((i64, i64), (i64, i64))> {
    ((-500i64..500, 1i64..60), (-80i64..80, 1i64..60))
}

fn mul(x: &Pair, y: &Pair) -> Pair {
    let d = BigRational::from_integer(BigInt::from(42));
    (&x.0 * &y.0 + &x.1 * &y.1 * d, &x.0 * &y.1 + &x.1 * &y.0)
}

proptest! {
    #[test]
    fn arithmetic_matches_pair_oracle(a in value(), b in value()) {
        let (x, y) = (build(a.0, a.1), build(b.0, b.1));
        let (px, py) = (parts(&x), parts(&y));
        prop_assert_eq!(parts(&(&x + &y)), (&px.0 + &py.0, &px.1 + &py.1));
        prop_assert_eq!(parts(&(&x - &y)), (&px.0 - &py.0, &px.1 - &py.1));
        prop_assert_eq!(parts(&(&x * &y)), mul(&px, &py));
        if !y.is_zero() {
            let q = x.checked_div(&y).unwrap();
            prop_assert_eq!(parts(&(&q * &y)), px);
        }
    }

    #[test]
    fn sign_and_enclosure_agree_with_floats(a in value()) {
        let x = build(a.0, a.1);
        let approx = a.0.0 as f64 / a.0.1 as f64 + a.1.0 as f64 / a.1.1 as f64 * 42f64.sqrt();
        if approx.abs() > 1e-9 {
            prop_assert_eq!(x.sign() as f64, approx.signum());
        }
        let w = x.sign_witness();
        prop_assert_eq!(w.sign, match w.lhs.cmp(&w.rhs) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        });
        let lo = x.to_f64(Rounding::Down);
        let hi = x.to_f64(Rounding::Up);
        prop_assert!(lo <= hi && hi - lo <= 1e-12 * approx.abs().max(1.0));
        prop_assert!((lo - approx).abs() <= 1e-9 * approx.abs().max(1.0));
    }

    #[test]
    fn text_round_trip(a in value()) {
        let x = build(a.0, a.1);
        prop_assert_eq!(QuadNumber::parse(&x.to_string(), 42).unwrap(), x);
    }

    #[test]
    fn ordering_is_total_and_consistent(a in value(), b in value()) {
        let (x, y) = (build(a.0, a.1), build(b.0, b.1));
        let diff = (&x - &y).sign();
        prop_assert_eq!(x.partial_cmp(&y).map(|o| o as i8), Some(diff));
    }
}

#[test]
fn carpet_ratio_sign_witness() {
    // a = (-6 + √42)/12 exceeds 1/25
    let a = QuadNumber::parse("(-6+1r)/12", 42).unwrap();
    let w = (&a - &QuadNumber::rational(1, 25)).sign_witness();
    assert_eq!(w.sign, 1);
    assert!(w.lhs > w.rhs);
}

#[test]
fn mixed_radicands_are_rejected() {
    let x = QuadNumber::sqrt_of(2).unwrap();
    let y = QuadNumber::sqrt_of(3).unwrap();
    assert!(x.checked_add(&y).is_err());
    assert!(QuadNumber::sqrt_of(49).is_err());
}
