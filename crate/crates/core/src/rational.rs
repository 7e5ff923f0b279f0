//! Exact rationals with an inline `i64` fast path.
//!
//! Almost every number met while lifting small presentations fits in a
//! machine word, so values are kept as a reduced `i64` pair and promoted to
//! a boxed `BigRational` only on overflow. A value that fits in the small
//! form is always stored in it, which keeps derived equality structural.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Q {
    Small(i64, i64),
    Big(Box<BigRational>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseQError(pub String);

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
            return gcd_u64(a as u64, b as u64) as u128;
        }
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

const FMA_LIMIT: u64 = 1 << 40;

impl Q {
    pub const ZERO: Q = Q::Small(0, 1);
    pub const ONE: Q = Q::Small(1, 1);

    pub fn zero() -> Q {
        Q::ZERO
    }

    pub fn one() -> Q {
        Q::ONE
    }

    pub fn from_i64(n: i64) -> Q {
        Q::Small(n, 1)
    }

    pub fn new(num: i64, den: i64) -> Q {
        assert!(den != 0, "zero denominator");
        Q::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Q {
        debug_assert!(den != 0);
        if num == 0 {
            return Q::ZERO;
        }
        if den == 1 {
            if let Ok(n) = i64::try_from(num) {
                return Q::Small(n, 1);
            }
        }
        if let (Ok(n), Ok(d)) = (i64::try_from(num), i64::try_from(den)) {
            if n != i64::MIN && d != i64::MIN {
                let g = gcd_u64(n.unsigned_abs(), d.unsigned_abs()) as i64;
                let (n, d) = (n / g, d / g);
                return if d < 0 {
                    Q::Small(-n, -d)
                } else {
                    Q::Small(n, d)
                };
            }
        }
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Q::Small(n, d),
            _ => Q::Big(Box::new(BigRational::new_raw(
                BigInt::from(n),
                BigInt::from(d),
            ))),
        }
    }

    /// Canonicalises a big rational, demoting it when it fits.
    pub fn from_big(r: BigRational) -> Q {
        let r = if r.denom().is_negative() || !r.numer().gcd(r.denom()).is_one() {
            BigRational::new(r.numer().clone(), r.denom().clone())
        } else {
            r
        };
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(Box::new(r)),
        }
    }

    pub fn from_bigint(n: BigInt) -> Q {
        Q::from_big(BigRational::from_integer(n))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Q::Small(n, _) => BigInt::from(*n),
            Q::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Q::Small(_, d) => BigInt::from(*d),
            Q::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Q::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::Small(_, d) => *d == 1,
            Q::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Q::Small(n, _) => n.signum() as i32,
            Q::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn add(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(0, _), _) => o.clone(),
            (_, Q::Small(0, _)) => self.clone(),
            (Q::Small(a, 1), Q::Small(c, 1)) => match a.checked_add(*c) {
                Some(s) => Q::Small(s, 1),
                None => Q::from_i128(*a as i128 + *c as i128, 1),
            },
            (Q::Small(a, b), Q::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    Q::from_i128(a + c, b)
                } else {
                    Q::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Q::from_big(self.to_big() + o.to_big()),
        }
    }

    /// `self + x * y` with a single normalisation when the operands are small.
    pub fn add_mul(&self, x: &Q, y: &Q) -> Q {
        match (self, x, y) {
            (_, Q::Small(0, _), _) | (_, _, Q::Small(0, _)) => self.clone(),
            (Q::Small(a, 1), Q::Small(c, 1), Q::Small(e, 1)) => {
                match c.checked_mul(*e).and_then(|p| p.checked_add(*a)) {
                    Some(v) => Q::Small(v, 1),
                    None => Q::from_i128(*a as i128 + *c as i128 * *e as i128, 1),
                }
            }
            (Q::Small(a, b), Q::Small(c, d), Q::Small(e, f))
                if [*a, *b, *c, *d, *e, *f]
                    .iter()
                    .all(|v| v.unsigned_abs() < FMA_LIMIT) =>
            {
                let (a, b, c, d, e, f) = (
                    *a as i128, *b as i128, *c as i128, *d as i128, *e as i128, *f as i128,
                );
                if b == 1 && d == 1 && f == 1 {
                    Q::from_i128(a + c * e, 1)
                } else {
                    let df = d * f;
                    if b == df {
                        Q::from_i128(a + c * e, b)
                    } else {
                        let g = gcd_u128(b.unsigned_abs(), df.unsigned_abs()) as i128;
                        let (bg, dfg) = (b / g, df / g);
                        Q::from_i128(a * dfg + c * e * bg, b * dfg)
                    }
                }
            }
            _ => self.add(&x.mul(y)),
        }
    }

    pub fn sub(&self, o: &Q) -> Q {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Q {
        match self {
            Q::Small(n, d) if *n != i64::MIN => Q::Small(-n, *d),
            _ => Q::from_big(-self.to_big()),
        }
    }

    pub fn mul(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(0, _), _) | (_, Q::Small(0, _)) => Q::ZERO,
            (Q::Small(1, 1), _) => o.clone(),
            (_, Q::Small(1, 1)) => self.clone(),
            (Q::Small(a, 1), Q::Small(c, 1)) => match a.checked_mul(*c) {
                Some(p) => Q::Small(p, 1),
                None => Q::from_i128(*a as i128 * *c as i128, 1),
            },
            (Q::Small(a, b), Q::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Q::from_i128(a * c, b * d)
            }
            _ => Q::from_big(self.to_big() * o.to_big()),
        }
    }

    /// Panics on zero; callers test invertibility first.
    pub fn inv(&self) -> Q {
        match self {
            Q::Small(0, _) => panic!("inverse of zero rational"),
            Q::Small(n, d) => Q::from_i128(*d as i128, *n as i128),
            Q::Big(b) => Q::from_big(b.recip()),
        }
    }

    pub fn div(&self, o: &Q) -> Q {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: u32) -> Q {
        let mut r = Q::ONE;
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn abs(&self) -> Q {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Max of |numerator| and denominator, saturating at `u64::MAX`.
    pub fn height(&self) -> u64 {
        match self {
            Q::Small(n, d) => n.unsigned_abs().max(*d as u64),
            Q::Big(_) => u64::MAX,
        }
    }
}

impl Default for Q {
    fn default() -> Self {
        Q::ZERO
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::from_i64(n)
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128)))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::Small(n, 1) => write!(f, "{n}"),
            Q::Small(n, d) => write!(f, "{n}/{d}"),
            Q::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Q::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Q {
    type Err = ParseQError;

    fn from_str(s: &str) -> Result<Q, ParseQError> {
        let err = || ParseQError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Q::from_big(BigRational::new(n, d)))
    }
}
