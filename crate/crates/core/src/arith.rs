//! Word-size number theory: primality, factoring, modular square roots and
//! square classes of rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::rational::Q;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (m as i128, (a % m) as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorisation as a map prime -> exponent.
pub fn factor(n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut stack = vec![n];
    while let Some(mut m) = stack.pop() {
        if m <= 1 {
            continue;
        }
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            while m % p == 0 {
                *out.entry(p).or_insert(0) += 1;
                m /= p;
            }
        }
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            *out.entry(m).or_insert(0) += 1;
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    out
}

/// Legendre symbol (a/p) for an odd prime p, as -1, 0 or 1.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Legendre symbol of a signed integer.
pub fn legendre_i(a: i128, p: u64) -> i32 {
    legendre(a.rem_euclid(p as i128) as u64, p)
}

/// Tonelli-Shanks.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("zero has no square class")]
    Zero,
    #[error("{0} exceeds the factorisation bound 2^63")]
    TooLarge(String),
}

/// The class of a nonzero rational modulo squares: a sign and a squarefree
/// positive integer given by its sorted prime support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    pub negative: bool,
    pub primes: Vec<u64>,
}

impl SquareClass {
    pub fn one() -> SquareClass {
        SquareClass {
            negative: false,
            primes: Vec::new(),
        }
    }

    pub fn of(x: &Q) -> Result<SquareClass, ArithError> {
        if x.is_zero() {
            return Err(ArithError::Zero);
        }
        let bound = BigInt::from(1u64 << 63);
        let n = x.numer();
        let d = x.denom();
        if n.abs() > bound || d > bound {
            return Err(ArithError::TooLarge(x.to_string()));
        }
        let mut odd = BTreeMap::new();
        for m in [n.abs(), d] {
            for (p, e) in factor(m.to_u64().unwrap()) {
                *odd.entry(p).or_insert(0u32) += e;
            }
        }
        Ok(SquareClass {
            negative: x.signum() < 0,
            primes: odd
                .into_iter()
                .filter(|(_, e)| e % 2 == 1)
                .map(|(p, _)| p)
                .collect(),
        })
    }

    pub fn of_i64(n: i64) -> SquareClass {
        SquareClass::of(&Q::from_i64(n)).expect("nonzero")
    }

    pub fn is_square(&self) -> bool {
        !self.negative && self.primes.is_empty()
    }

    pub fn mul(&self, o: &SquareClass) -> SquareClass {
        let mut primes: Vec<u64> = self
            .primes
            .iter()
            .filter(|p| o.primes.binary_search(p).is_err())
            .chain(
                o.primes
                    .iter()
                    .filter(|p| self.primes.binary_search(p).is_err()),
            )
            .copied()
            .collect();
        primes.sort_unstable();
        SquareClass {
            negative: self.negative != o.negative,
            primes,
        }
    }

    /// The squarefree integer representative.
    pub fn to_bigint(&self) -> BigInt {
        let mut r = BigInt::from(if self.negative { -1 } else { 1 });
        for p in &self.primes {
            r *= *p;
        }
        r
    }

    pub fn to_q(&self) -> Q {
        Q::from_bigint(self.to_bigint())
    }

    pub fn to_i128(&self) -> Option<i128> {
        self.to_bigint().to_i128()
    }

    pub fn divisible_by(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// Residue of the squarefree representative modulo m (m small).
    pub fn rem(&self, m: u64) -> u64 {
        let mut r = 1 % m;
        for p in &self.primes {
            r = mul_mod(r, p % m, m);
        }
        if self.negative && r != 0 {
            r = m - r;
        }
        r
    }
}

/// Divisors of a positive integer below 2^63, for rational root candidates.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let cur = ds.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_and_factoring() {
        assert!(is_prime(2) && is_prime(1_000_000_007) && !is_prime(1));
        assert!(!is_prime(3_215_031_751));
        let f = factor(600_851_475_143);
        assert_eq!(
            f.keys().copied().collect::<Vec<_>>(),
            vec![71, 839, 1471, 6857]
        );
        let n = 4_294_967_291u64 * 4_294_967_279u64;
        assert_eq!(factor(n).len(), 2);
    }

    #[test]
    fn tonelli_shanks() {
        for p in [3u64, 5, 13, 17, 41, 1_000_000_009] {
            for a in 1..40u64 {
                if let Some(r) = sqrt_mod_prime(a, p) {
                    assert_eq!(mul_mod(r, r, p), a % p);
                } else {
                    assert_eq!(legendre(a, p), -1);
                }
            }
        }
    }

    #[test]
    fn square_classes() {
        let c = SquareClass::of(&Q::new(-18, 50)).unwrap();
        assert_eq!(
            c,
            SquareClass {
                negative: true,
                primes: vec![]
            }
        );
        let c = SquareClass::of(&Q::new(12, 5)).unwrap();
        assert_eq!(c.primes, vec![3, 5]);
        assert_eq!(c.mul(&SquareClass::of_i64(15)), SquareClass::one());
        assert!(SquareClass::of(&Q::zero()).is_err());
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }
}
