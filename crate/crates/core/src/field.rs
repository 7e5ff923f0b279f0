//! The base field K: either the rationals or a prime field of odd characteristic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::is_prime;
use crate::rational::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseField {
    Rationals,
    /// An odd prime; elements are stored as `Q::Small(k, 1)` with `0 <= k < p`.
    Prime(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("characteristic {0} is not an odd prime")]
    BadCharacteristic(u64),
    #[error("unknown field descriptor `{0}`")]
    BadDescriptor(String),
    #[error("{0} is not invertible in the prime field")]
    DenominatorVanishes(String),
}

impl BaseField {
    pub fn prime(p: u64) -> Result<BaseField, FieldError> {
        // p below 2^62 keeps every product comfortably inside i128
        if p == 2 || p >= 1 << 62 || !is_prime(p) {
            return Err(FieldError::BadCharacteristic(p));
        }
        Ok(BaseField::Prime(p))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            BaseField::Rationals => 0,
            BaseField::Prime(p) => *p,
        }
    }

    pub fn is_rationals(&self) -> bool {
        matches!(self, BaseField::Rationals)
    }

    fn modp(p: u64, x: i128) -> Q {
        Q::Small(x.rem_euclid(p as i128) as i64, 1)
    }

    /// Maps an arbitrary rational into the field.
    pub fn from_q(&self, x: &Q) -> Result<Q, FieldError> {
        match self {
            BaseField::Rationals => Ok(x.clone()),
            BaseField::Prime(p) => {
                let pb = BigInt::from(*p);
                let n = x.numer().mod_floor(&pb);
                let d = x.denom().mod_floor(&pb);
                let d = d.to_u64().unwrap();
                if d == 0 {
                    return Err(FieldError::DenominatorVanishes(x.to_string()));
                }
                let dinv = crate::arith::inv_mod(d, *p).unwrap();
                let n = n.to_u64().unwrap();
                Ok(Self::modp(*p, (n as i128 * dinv as i128) % *p as i128))
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> Q {
        match self {
            BaseField::Rationals => Q::from_i64(n),
            BaseField::Prime(p) => Self::modp(*p, n as i128),
        }
    }

    #[inline]
    pub fn add(&self, a: &Q, b: &Q) -> Q {
        match self {
            BaseField::Rationals => a.add(b),
            BaseField::Prime(p) => match (a, b) {
                (Q::Small(x, 1), Q::Small(y, 1)) => Self::modp(*p, *x as i128 + *y as i128),
                _ => unreachable!("non-reduced prime field element"),
            },
        }
    }

    #[inline]
    pub fn sub(&self, a: &Q, b: &Q) -> Q {
        match self {
            BaseField::Rationals => a.sub(b),
            BaseField::Prime(p) => match (a, b) {
                (Q::Small(x, 1), Q::Small(y, 1)) => Self::modp(*p, *x as i128 - *y as i128),
                _ => unreachable!("non-reduced prime field element"),
            },
        }
    }

    #[inline]
    pub fn neg(&self, a: &Q) -> Q {
        match self {
            BaseField::Rationals => a.neg(),
            BaseField::Prime(p) => match a {
                Q::Small(x, 1) => Self::modp(*p, -(*x as i128)),
                _ => unreachable!("non-reduced prime field element"),
            },
        }
    }

    #[inline]
    pub fn mul(&self, a: &Q, b: &Q) -> Q {
        match self {
            BaseField::Rationals => a.mul(b),
            BaseField::Prime(p) => match (a, b) {
                (Q::Small(x, 1), Q::Small(y, 1)) => Self::modp(*p, *x as i128 * *y as i128),
                _ => unreachable!("non-reduced prime field element"),
            },
        }
    }

    /// `acc + a * b`.
    #[inline]
    pub fn add_mul(&self, acc: &Q, a: &Q, b: &Q) -> Q {
        match self {
            BaseField::Rationals => acc.add_mul(a, b),
            BaseField::Prime(p) => match (acc, a, b) {
                (Q::Small(z, 1), Q::Small(x, 1), Q::Small(y, 1)) => {
                    Self::modp(*p, *z as i128 + *x as i128 * *y as i128)
                }
                _ => unreachable!("non-reduced prime field element"),
            },
        }
    }

    /// Panics on zero.
    pub fn inv(&self, a: &Q) -> Q {
        match self {
            BaseField::Rationals => a.inv(),
            BaseField::Prime(p) => match a {
                Q::Small(x, 1) => Q::Small(
                    crate::arith::inv_mod(*x as u64, *p).expect("inverse of zero") as i64,
                    1,
                ),
                _ => unreachable!("non-reduced prime field element"),
            },
        }
    }

    pub fn div(&self, a: &Q, b: &Q) -> Q {
        self.mul(a, &self.inv(b))
    }

    /// Whether `a` is a nonzero square in the field. Only meaningful for
    /// prime fields and for the rationals.
    pub fn is_square(&self, a: &Q) -> bool {
        match self {
            BaseField::Rationals => rational_sqrt(a).is_some(),
            BaseField::Prime(p) => match a {
                Q::Small(0, _) => true,
                Q::Small(x, 1) => crate::arith::legendre(*x as u64, *p) == 1,
                _ => false,
            },
        }
    }

    pub fn sqrt(&self, a: &Q) -> Option<Q> {
        match self {
            BaseField::Rationals => rational_sqrt(a),
            BaseField::Prime(p) => match a {
                Q::Small(x, 1) => {
                    crate::arith::sqrt_mod_prime(*x as u64, *p).map(|r| Q::Small(r as i64, 1))
                }
                _ => None,
            },
        }
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(a: &Q) -> Option<Q> {
    if a.signum() < 0 {
        return None;
    }
    let n = a.numer();
    let d = a.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &rn * &rn == n && &rd * &rd == d {
        Some(Q::from_big(num_rational::BigRational::new(rn, rd)))
    } else {
        None
    }
}

impl fmt::Display for BaseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseField::Rationals => write!(f, "Q"),
            BaseField::Prime(p) => write!(f, "Fp:{p}"),
        }
    }
}

impl FromStr for BaseField {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, FieldError> {
        if s == "Q" {
            return Ok(BaseField::Rationals);
        }
        let p = s
            .strip_prefix("Fp:")
            .and_then(|p| p.parse::<u64>().ok())
            .ok_or_else(|| FieldError::BadDescriptor(s.to_string()))?;
        BaseField::prime(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = BaseField::prime(7).unwrap();
        let a = f.from_i64(5);
        let b = f.from_i64(4);
        assert_eq!(f.add(&a, &b), f.from_i64(2));
        assert_eq!(f.mul(&a, &f.inv(&a)), f.from_i64(1));
        assert_eq!(f.from_q(&Q::new(1, 2)).unwrap(), f.from_i64(4));
        assert!(f.from_q(&Q::new(1, 7)).is_err());
        assert!(f.is_square(&f.from_i64(2)));
        assert!(!f.is_square(&f.from_i64(3)));
    }

    #[test]
    fn rejects_even_or_composite_characteristic() {
        assert!(BaseField::prime(2).is_err());
        assert!(BaseField::prime(9).is_err());
        assert_eq!("Fp:5".parse::<BaseField>().unwrap(), BaseField::Prime(5));
        assert!("Fp:4".parse::<BaseField>().is_err());
        assert_eq!("Q".parse::<BaseField>().unwrap(), BaseField::Rationals);
    }

    #[test]
    fn rational_square_roots() {
        assert_eq!(rational_sqrt(&Q::new(9, 4)), Some(Q::new(3, 2)));
        assert_eq!(rational_sqrt(&Q::new(2, 1)), None);
        assert_eq!(rational_sqrt(&Q::new(-1, 1)), None);
    }
}
