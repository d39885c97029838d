//! Integer and local-symbol primitives over ℚ.
//!
//! Every symbol is additive: an [`F2`] value of 0 stands for the multiplicative
//! value +1 (trivial), 1 for −1.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of the field with two elements, written additively.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct F2(bool);

impl F2 {
    pub const ZERO: F2 = F2(false);
    pub const ONE: F2 = F2(true);

    pub fn new(bit: u8) -> F2 {
        F2(bit & 1 == 1)
    }

    pub fn bit(self) -> u8 {
        self.0 as u8
    }

    pub fn is_zero(self) -> bool {
        !self.0
    }

    /// Converts to the multiplicative ±1 convention.
    pub fn to_sign(self) -> i8 {
        if self.0 {
            -1
        } else {
            1
        }
    }

    /// Converts from a multiplicative symbol value. Panics on anything but ±1.
    pub fn from_sign(s: i8) -> F2 {
        match s {
            1 => F2::ZERO,
            -1 => F2::ONE,
            _ => panic!("symbol value {s} is not a sign"),
        }
    }
}

// Addition in F₂ is exclusive or.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for F2 {
    type Output = F2;
    fn add(self, rhs: F2) -> F2 {
        F2(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for F2 {
    fn add_assign(&mut self, rhs: F2) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for F2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// An odd prime number. Construction checks primality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OddPrime(u64);

impl OddPrime {
    pub fn new(q: u64) -> Result<OddPrime> {
        if q.is_multiple_of(2) || !is_prime(q) {
            return Err(Error::InvalidPlace(format!("{q} is not an odd prime")));
        }
        Ok(OddPrime(q))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// A place of ℚ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    OddPrime(OddPrime),
    Two,
    Infinity,
}

impl Place {
    /// The finite place attached to the prime `p` (2 or odd).
    pub fn prime(p: u64) -> Result<Place> {
        if p == 2 {
            Ok(Place::Two)
        } else {
            OddPrime::new(p).map(Place::OddPrime)
        }
    }

    /// The residue characteristic, `None` at infinity.
    pub fn prime_number(self) -> Option<u64> {
        match self {
            Place::OddPrime(q) => Some(q.get()),
            Place::Two => Some(2),
            Place::Infinity => None,
        }
    }

    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::OddPrime(q) => write!(f, "{}", q.get()),
            Place::Two => f.write_str("2"),
            Place::Infinity => f.write_str("inf"),
        }
    }
}

/// A class of ℚ₂^× modulo squares: parity of the 2-adic valuation and the odd part mod 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SquareClass2 {
    pub val2: u8,
    pub unit: u8,
}

impl SquareClass2 {
    pub fn of(a: i64) -> Result<SquareClass2> {
        if a == 0 {
            return Err(Error::ZeroArgument);
        }
        let tz = a.trailing_zeros();
        let u = (a as i128) >> tz;
        Ok(SquareClass2 { val2: (tz % 2) as u8, unit: u.rem_euclid(8) as u8 })
    }
}

/// Square class of a product, from the classes of the factors.
impl Mul for SquareClass2 {
    type Output = SquareClass2;
    fn mul(self, other: SquareClass2) -> SquareClass2 {
        SquareClass2 { val2: (self.val2 + other.val2) % 2, unit: ((self.unit as u16 * other.unit as u16) % 8) as u8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// Sufficient for every n < 3.3 * 10^24, in particular the whole u64 range.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Brent's variant of Pollard rho. `n` must be composite and odd.
fn pollard_rho(n: u64) -> u64 {
    for c in 1..n {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 2u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(r - k).min(128) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("pollard rho called on a prime")
}

/// Prime factorization of `n ≥ 1` as ascending (prime, exponent) pairs.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let f = pollard_rho(m);
        stack.push(f);
        stack.push(m / f);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Splits a nonzero squarefree integer into its sign and ascending prime divisors.
pub fn factor_squarefree(d: i64) -> Result<(i8, Vec<u64>)> {
    if d == 0 {
        return Err(Error::InvalidDiscriminant(0));
    }
    if d == i64::MIN {
        return Err(Error::ValueOutOfRange(format!("|{d}| exceeds the 64-bit budget")));
    }
    let sign = if d < 0 { -1 } else { 1 };
    let mut primes = Vec::new();
    for (p, e) in factorize(d.unsigned_abs()) {
        if e > 1 {
            return Err(Error::NotSquarefree(d, p));
        }
        primes.push(p);
    }
    Ok((sign, primes))
}

pub fn is_squarefree(d: i64) -> bool {
    factor_squarefree(d).is_ok()
}

/// Jacobi symbol (a/n) for odd n > 0, via the binary reciprocity algorithm.
pub fn jacobi(a: i128, n: u64) -> i8 {
    assert!(n % 2 == 1, "jacobi modulus must be odd");
    let mut n = n;
    let mut a = a.rem_euclid(n as i128) as u64;
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// The Kronecker symbol (a/n), extended to all integers n.
pub fn kronecker(a: i64, n: i64) -> i8 {
    let a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut t = 1i8;
    if n < 0 {
        n = -n;
        if a < 0 {
            t = -t;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            t = -t;
        }
        n >>= tz;
    }
    t * jacobi(a, n as u64)
}

/// Additive Legendre symbol: 0 iff `a` is a nonzero square modulo the odd prime `q`.
pub fn legendre_add(a: i64, q: u64) -> Result<F2> {
    let q = OddPrime::new(q)?;
    let q = q.get();
    if (a as i128).rem_euclid(q as i128) == 0 {
        return Err(Error::NotCoprime(a, q));
    }
    Ok(F2::from_sign(jacobi(a as i128, q)))
}

// Valuation at p and the cofactor.
pub(crate) fn split_valuation(a: i64, p: u64) -> (u32, i64) {
    debug_assert!(a != 0);
    let mut a = a as i128;
    let p = p as i128;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    (v, a as i64)
}

// (u - 1)/2 mod 2 for odd u.
fn eps(u: i64) -> u8 {
    (u.rem_euclid(4) == 3) as u8
}

// (u^2 - 1)/8 mod 2 for odd u.
fn omega(u: i64) -> u8 {
    matches!(u.rem_euclid(8), 3 | 5) as u8
}

/// Additive Hilbert symbol (a, b)_v by the closed local formulas.
pub fn hilbert_add(a: i64, b: i64, v: Place) -> Result<F2> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroArgument);
    }
    let value = match v {
        Place::Infinity => F2::new((a < 0 && b < 0) as u8),
        Place::OddPrime(q) => {
            let q = q.get();
            let (alpha, u) = split_valuation(a, q);
            let (beta, w) = split_valuation(b, q);
            let mut s = F2::new((alpha & beta & 1) as u8 & eps(q as i64));
            if beta % 2 == 1 {
                s += F2::from_sign(jacobi(u as i128, q));
            }
            if alpha % 2 == 1 {
                s += F2::from_sign(jacobi(w as i128, q));
            }
            s
        }
        Place::Two => {
            let (alpha, u) = split_valuation(a, 2);
            let (beta, w) = split_valuation(b, 2);
            let (alpha, beta) = ((alpha % 2) as u8, (beta % 2) as u8);
            let s = F2::new(eps(u) & eps(w)) + F2::new(alpha & omega(w)) + F2::new(beta & omega(u));
            if cfg!(feature = "fault-injection") && a == -1 && b == -1 {
                s + F2::ONE
            } else {
                s
            }
        }
    };
    Ok(value)
}

/// Hilbert symbol of two nonzero rationals given as (numerator, denominator).
pub fn hilbert_add_frac(a: (i64, i64), b: (i64, i64), v: Place) -> Result<F2> {
    let class_rep = |(n, d): (i64, i64)| -> Result<i64> {
        if n == 0 || d == 0 {
            return Err(Error::ZeroArgument);
        }
        // n/d and n*d differ by the square d^2.
        n.checked_mul(d).ok_or(Error::Overflow("rational square-class representative"))
    };
    hilbert_add(class_rep(a)?, class_rep(b)?, v)
}

fn check_discriminant(d: i64) -> Result<()> {
    if d == 0 || d == 1 {
        return Err(Error::InvalidDiscriminant(d));
    }
    factor_squarefree(d).map(|_| ())
}

/// Decomposition of the place `v` in ℚ(√d).
pub fn splitting_type(d: i64, v: Place) -> Result<SplittingType> {
    check_discriminant(d)?;
    Ok(match v {
        Place::OddPrime(q) => {
            let q = q.get();
            if d.unsigned_abs().is_multiple_of(q) {
                SplittingType::Ramified
            } else if kronecker(d, q as i64) == 1 {
                SplittingType::Split
            } else {
                SplittingType::Inert
            }
        }
        Place::Two => match d.rem_euclid(8) {
            1 => SplittingType::Split,
            5 => SplittingType::Inert,
            _ => SplittingType::Ramified,
        },
        Place::Infinity => {
            if d > 0 {
                SplittingType::Split
            } else {
                SplittingType::Inert
            }
        }
    })
}
