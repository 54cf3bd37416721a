//! Wigner 3j and 6j symbols from the Racah sum formulas.
//!
//! Every intermediate quantity is an exact rational; the only rounding happens
//! when the final `sign * sqrt(S^2 * P)` is converted to `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::HalfInt;
use crate::error::{invalid, Result};

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn frac(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Triangle condition on twice-values, including integer perimeter.
fn triangle(ta: i32, tb: i32, tc: i32) -> bool {
    (ta + tb + tc) % 2 == 0 && tc >= (ta - tb).abs() && tc <= ta + tb
}

fn finish(sum: BigRational, radicand: BigRational) -> f64 {
    if sum.is_zero() {
        return 0.0;
    }
    let magnitude = (&sum * &sum * radicand)
        .to_f64()
        .expect("finite rational")
        .sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

fn check_magnitude(name: &str, j: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return invalid(format!("{name} = {j} is negative"));
    }
    Ok(())
}

/// Wigner 3j symbol `( j1 j2 j3 ; m1 m2 m3 )`.
///
/// Returns exactly zero when the triangle rule fails, when `m1 + m2 + m3 != 0`,
/// or when a projection exceeds its magnitude. A projection whose parity differs
/// from its magnitude is an invalid argument.
pub fn wigner3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    for (name, j, m) in [("j1", j1, m1), ("j2", j2, m2), ("j3", j3, m3)] {
        check_magnitude(name, j)?;
        if !j.same_parity(m) {
            return invalid(format!("{name} = {j} and its projection {m} differ in parity"));
        }
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return Ok(0.0);
    }
    if (m1 + m2 + m3) != HalfInt::ZERO {
        return Ok(0.0);
    }
    let (tj1, tj2, tj3) = (j1.twice(), j2.twice(), j3.twice());
    if !triangle(tj1, tj2, tj3) {
        return Ok(0.0);
    }
    let (tm1, tm2, tm3) = (m1.twice(), m2.twice(), m3.twice());

    // all of these are integers once the parity checks above have passed
    let h = |twice: i32| twice / 2;
    let a = h(tj1 + tj2 - tj3);
    let b = h(tj1 - tj2 + tj3);
    let c = h(-tj1 + tj2 + tj3);
    let d = h(tj1 + tj2 + tj3) + 1;

    let radicand = frac(
        factorial(a)
            * factorial(b)
            * factorial(c)
            * factorial(h(tj1 + tm1))
            * factorial(h(tj1 - tm1))
            * factorial(h(tj2 + tm2))
            * factorial(h(tj2 - tm2))
            * factorial(h(tj3 + tm3))
            * factorial(h(tj3 - tm3)),
        factorial(d),
    );

    let k_min = 0.max(h(tj2 - tj3 - tm1)).max(h(tj1 - tj3 + tm2));
    let k_max = a.min(h(tj1 - tm1)).min(h(tj2 + tm2));
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(h(tj3 - tj2 + tm1) + k)
            * factorial(h(tj3 - tj1 - tm2) + k)
            * factorial(a - k)
            * factorial(h(tj1 - tm1) - k)
            * factorial(h(tj2 + tm2) - k);
        let term = frac(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    // overall phase (-1)^(j1 - j2 - m3)
    if h(tj1 - tj2 - tm3).rem_euclid(2) == 1 {
        sum = -sum;
    }
    Ok(finish(sum, radicand))
}

/// `(a+b-c)! (a-b+c)! (-a+b+c)! / (a+b+c+1)!` on twice-values.
fn delta(ta: i32, tb: i32, tc: i32) -> BigRational {
    let h = |twice: i32| twice / 2;
    frac(
        factorial(h(ta + tb - tc)) * factorial(h(ta - tb + tc)) * factorial(h(-ta + tb + tc)),
        factorial(h(ta + tb + tc) + 1),
    )
}

/// Wigner 6j symbol `{ j1 j2 j3 ; j4 j5 j6 }`.
///
/// A triad with a half-integer perimeter is an invalid argument; a triad that
/// merely fails the triangle inequality gives zero.
pub fn wigner6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<f64> {
    for (name, j) in [("j1", j1), ("j2", j2), ("j3", j3), ("j4", j4), ("j5", j5), ("j6", j6)] {
        check_magnitude(name, j)?;
    }
    let t = [j1, j2, j3, j4, j5, j6].map(HalfInt::twice);
    let triads = [(t[0], t[1], t[2]), (t[0], t[4], t[5]), (t[3], t[1], t[5]), (t[3], t[4], t[2])];
    for &(a, b, c) in &triads {
        if (a + b + c) % 2 != 0 {
            return invalid(format!(
                "6j triad ({}, {}, {}) has a half-integer sum",
                HalfInt::from_twice(a),
                HalfInt::from_twice(b),
                HalfInt::from_twice(c)
            ));
        }
    }
    if !triads.iter().all(|&(a, b, c)| triangle(a, b, c)) {
        return Ok(0.0);
    }

    let radicand = triads
        .iter()
        .fold(BigRational::one(), |acc, &(a, b, c)| acc * delta(a, b, c));

    let alpha = triads.map(|(a, b, c)| (a + b + c) / 2);
    let beta = [
        (t[0] + t[1] + t[3] + t[4]) / 2,
        (t[1] + t[2] + t[4] + t[5]) / 2,
        (t[2] + t[0] + t[5] + t[3]) / 2,
    ];
    let lo = *alpha.iter().max().unwrap();
    let hi = *beta.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for k in lo..=hi {
        let den = alpha.iter().map(|&a| factorial(k - a)).product::<BigInt>()
            * beta.iter().map(|&b| factorial(b - k)).product::<BigInt>();
        let term = frac(factorial(k + 1), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(finish(sum, radicand))
}
