//! Quaternion symbols over ℚ and their 2-torsion Brauer classes.
//!
//! A class of order dividing 2 over ℚ is determined by the finite set of
//! places where it ramifies, so classes are stored as ramification sets and
//! added by symmetric difference.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, legendre_i, ArithError, SquareClass};
use crate::rational::Q;
use crate::rings::{Elem, Ring};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Real,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "∞"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("norm equation search exceeded its bound for ({0}, {1})")]
    SearchExhausted(String, String),
    #[error("symbols ({0}) and ({1}) are not isomorphic")]
    PreconditionViolated(String, String),
    #[error("first slot is not in the base ring")]
    SlotNotInBase,
    #[error("second slot is not a unit")]
    NotUnit,
    #[error("symbol calculus is only available over ℚ")]
    NotRational,
}

/// Local Hilbert symbol of two square classes.
fn hilbert_sc(a: &SquareClass, b: &SquareClass, v: Place) -> i8 {
    match v {
        Place::Real => {
            if a.negative && b.negative {
                -1
            } else {
                1
            }
        }
        Place::Prime(2) => {
            let alpha = a.divisible_by(2) as u32;
            let beta = b.divisible_by(2) as u32;
            let unit = |c: &SquareClass| {
                let odd = SquareClass {
                    negative: c.negative,
                    primes: c.primes.iter().copied().filter(|&p| p != 2).collect(),
                };
                odd.rem(8)
            };
            let (u, w) = (unit(a), unit(b));
            let eps = |x: u64| ((x % 4) == 3) as u32;
            let omega = |x: u64| (x % 8 == 3 || x % 8 == 5) as u32;
            let e = eps(u) * eps(w) + alpha * omega(w) + beta * omega(u);
            if e.is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
        Place::Prime(p) => {
            let alpha = a.divisible_by(p) as u32;
            let beta = b.divisible_by(p) as u32;
            let unit_mod = |c: &SquareClass| {
                let u = SquareClass {
                    negative: c.negative,
                    primes: c.primes.iter().copied().filter(|&q| q != p).collect(),
                };
                u.rem(p)
            };
            let mut s: i32 = 1;
            if alpha * beta * (((p - 1) / 2) as u32) % 2 == 1 {
                s = -s;
            }
            if beta == 1 {
                s *= legendre_i(unit_mod(a) as i128, p);
            }
            if alpha == 1 {
                s *= legendre_i(unit_mod(b) as i128, p);
            }
            s as i8
        }
    }
}

/// Hilbert symbol (a, b)_v: +1 iff z² = ax² + by² has a nontrivial solution
/// over the completion of ℚ at v.
pub fn hilbert_symbol(a: &Q, b: &Q, v: Place) -> Result<i8, SymbolError> {
    Ok(hilbert_sc(&SquareClass::of(a)?, &SquareClass::of(b)?, v))
}

/// Whether x is a square in the completion ℚ_v.
pub fn is_local_square(x: &SquareClass, v: Place) -> bool {
    match v {
        Place::Real => !x.negative,
        Place::Prime(2) => !x.divisible_by(2) && x.rem(8) == 1,
        Place::Prime(p) => !x.divisible_by(p) && legendre_i(x.rem(p) as i128, p) == 1,
    }
}

/// A quaternion symbol (a, b) over ℚ, slots stored as square classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolPair {
    pub a: SquareClass,
    pub b: SquareClass,
}

impl SymbolPair {
    pub fn new(a: &Q, b: &Q) -> Result<SymbolPair, SymbolError> {
        Ok(SymbolPair {
            a: SquareClass::of(a)?,
            b: SquareClass::of(b)?,
        })
    }

    pub fn from_i64(a: i64, b: i64) -> SymbolPair {
        SymbolPair {
            a: SquareClass::of_i64(a),
            b: SquareClass::of_i64(b),
        }
    }

    /// Places dividing 2ab plus the real place.
    pub fn relevant_places(&self) -> BTreeSet<Place> {
        let mut s: BTreeSet<Place> = [Place::Real, Place::Prime(2)].into();
        s.extend(
            self.a
                .primes
                .iter()
                .chain(&self.b.primes)
                .map(|&p| Place::Prime(p)),
        );
        s
    }

    pub fn symbol_at(&self, v: Place) -> i8 {
        hilbert_sc(&self.a, &self.b, v)
    }

    pub fn ramification_set(&self) -> BTreeSet<Place> {
        self.relevant_places()
            .into_iter()
            .filter(|&v| self.symbol_at(v) == -1)
            .collect()
    }
}

impl fmt::Display for SymbolPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a.to_bigint(), self.b.to_bigint())
    }
}

pub fn ramification_set(p: &SymbolPair) -> BTreeSet<Place> {
    p.ramification_set()
}

/// A 2-torsion Brauer class over ℚ.
#[derive(Debug, Clone)]
pub struct SymbolClass {
    pub pairs: Vec<SymbolPair>,
    ram: BTreeSet<Place>,
}

impl PartialEq for SymbolClass {
    fn eq(&self, other: &Self) -> bool {
        self.ram == other.ram
    }
}

impl Eq for SymbolClass {}

impl SymbolClass {
    pub fn trivial() -> SymbolClass {
        SymbolClass {
            pairs: Vec::new(),
            ram: BTreeSet::new(),
        }
    }

    pub fn ram(&self) -> &BTreeSet<Place> {
        &self.ram
    }

    pub fn add(&self, other: &SymbolClass) -> SymbolClass {
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        SymbolClass {
            pairs,
            ram: self.ram.symmetric_difference(&other.ram).copied().collect(),
        }
    }

    /// Whether extending scalars to ℚ(√x) kills the class: at every
    /// ramified place x must not be a local square.
    pub fn is_split_by(&self, x: &SquareClass) -> bool {
        self.ram.iter().all(|&v| !is_local_square(x, v))
    }
}

pub fn class_of(pairs: &[SymbolPair]) -> SymbolClass {
    let mut ram = BTreeSet::new();
    for p in pairs {
        ram = ram
            .symmetric_difference(&p.ramification_set())
            .copied()
            .collect();
    }
    SymbolClass {
        pairs: pairs.to_vec(),
        ram,
    }
}

pub fn is_split(c: &SymbolClass) -> bool {
    c.ram.is_empty()
}

pub fn symbols_isomorphic(p: &SymbolPair, q: &SymbolPair) -> bool {
    p.ramification_set() == q.ramification_set()
}

// ---------------------------------------------------------------------------
// Norm equations

/// Square root of `a` modulo the squarefree |m|, via CRT over its primes.
fn sqrt_mod_squarefree(a: i128, m: u64) -> Option<i128> {
    let mut r: i128 = 0;
    let mut modulus: i128 = 1;
    for (p, _) in arith::factor(m) {
        let ap = a.rem_euclid(p as i128) as u64;
        let s = arith::sqrt_mod_prime(ap, p)? as i128;
        // combine r mod modulus with s mod p
        let inv = arith::inv_mod((modulus % p as i128) as u64, p).unwrap() as i128;
        let k = ((s - r).rem_euclid(p as i128) * inv).rem_euclid(p as i128);
        r += modulus * k;
        modulus *= p as i128;
    }
    Some(r.rem_euclid(modulus))
}

fn squarefree_split(n: i128) -> (i128, BigInt) {
    let mut sf: i128 = n.signum();
    let mut sq = BigInt::one();
    for (p, e) in arith::factor(n.unsigned_abs() as u64) {
        if e % 2 == 1 {
            sf *= p as i128;
        }
        for _ in 0..e / 2 {
            sq *= p;
        }
    }
    (sf, sq)
}

/// Nontrivial integer solution of a x² + b y² = z² for squarefree a, b,
/// by Lagrange descent. `None` when a is not a square modulo b at some
/// stage (the equation is then insoluble).
fn legendre_solve(a: i128, b: i128, depth: usize) -> Option<(BigInt, BigInt, BigInt)> {
    if depth > 200 {
        return None;
    }
    if a == 1 {
        return Some((BigInt::one(), BigInt::zero(), BigInt::one()));
    }
    if b == 1 {
        return Some((BigInt::zero(), BigInt::one(), BigInt::one()));
    }
    if a < 0 && b < 0 {
        return None;
    }
    if a.abs() > b.abs() {
        let (x, y, z) = legendre_solve(b, a, depth + 1)?;
        return Some((y, x, z));
    }
    let m = b.unsigned_abs() as u64;
    let mut t = sqrt_mod_squarefree(a, m)?;
    if t > (m / 2) as i128 {
        t -= m as i128;
    }
    let k = (t * t - a) / b;
    debug_assert_eq!(k * b, t * t - a);
    if k == 0 {
        return None;
    }
    let (k0, msq) = squarefree_split(k);
    let (x, y, z) = legendre_solve(a, k0, depth + 1)?;
    let tb = BigInt::from(t);
    let ab = BigInt::from(a);
    let nx = &tb * &x + &z;
    let ny = BigInt::from(k0) * msq * y;
    let nz = &tb * &z + &ab * &x;
    let g = nx.gcd(&ny).gcd(&nz);
    if g.is_zero() {
        return None;
    }
    Some((nx / &g, ny / &g, nz / &g))
}

/// Solves u² − n v² = b over ℚ. `Ok(None)` means no solution exists
/// (the symbol (n, b) is non-split); otherwise returns (u, v).
pub fn solve_norm(n: &Q, b: &Q) -> Result<Option<(Q, Q)>, SymbolError> {
    let nc = SquareClass::of(n)?;
    let bc = SquareClass::of(b)?;
    if let Some(m) = crate::field::rational_sqrt(n) {
        // n = m², (u − mv)(u + mv) = b
        let two = Q::from_i64(2);
        let u = b.add(&Q::one()).div(&two);
        let v = b.sub(&Q::one()).div(&two.mul(&m));
        return Ok(Some((u, v)));
    }
    let pair = SymbolPair {
        a: nc.clone(),
        b: bc.clone(),
    };
    if !pair.ramification_set().is_empty() {
        return Ok(None);
    }
    if let Some(t) = crate::field::rational_sqrt(b) {
        return Ok(Some((t, Q::zero())));
    }
    let exhausted = || SymbolError::SearchExhausted(n.to_string(), b.to_string());
    let n0 = nc.to_i128().ok_or_else(exhausted)?;
    let b0 = bc.to_i128().ok_or_else(exhausted)?;
    // z² − n0 x² = b0 y²
    let (x, y, z) = legendre_solve(n0, b0, 0).ok_or_else(exhausted)?;
    if y.is_zero() {
        return Err(exhausted());
    }
    let yq = Q::from_bigint(y);
    let u0 = Q::from_bigint(z).div(&yq);
    let v0 = Q::from_bigint(x).div(&yq);
    // n = n0 s², b = b0 t²
    let s2 = n.div(&Q::from_i128_parts(n0));
    let t2 = b.div(&Q::from_i128_parts(b0));
    let s = crate::field::rational_sqrt(&s2).ok_or_else(exhausted)?;
    let t = crate::field::rational_sqrt(&t2).ok_or_else(exhausted)?;
    let u = t.mul(&u0);
    let v = t.mul(&v0).div(&s);
    debug_assert_eq!(u.mul(&u).sub(&n.mul(&v).mul(&v)), *b);
    Ok(Some((u, v)))
}

// ---------------------------------------------------------------------------
// Common slots

fn f2_solve(rows: &[(Vec<bool>, bool)], ncols: usize) -> Option<(Vec<bool>, Vec<Vec<bool>>)> {
    let mut m: Vec<(Vec<bool>, bool)> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| m[i].0[c]) else {
            continue;
        };
        m.swap(r, p);
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.0[c] {
                for j in 0..ncols {
                    row.0[j] ^= pr.0[j];
                }
                row.1 ^= pr.1;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| row.1) {
        return None;
    }
    let mut part = vec![false; ncols];
    for (i, &c) in pivots.iter().enumerate() {
        part[c] = m[i].1;
    }
    let mut kernel = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![false; ncols];
        v[f] = true;
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = m[i].0[f];
        }
        kernel.push(v);
    }
    Some((part, kernel))
}

fn try_slot(
    conditions: &[(SquareClass, BTreeSet<Place>)],
    gens: &[SquareClass],
    places: &[Place],
) -> Option<SquareClass> {
    let mut rows = Vec::new();
    for (n, target) in conditions {
        for &v in places {
            let coeffs = gens.iter().map(|g| hilbert_sc(g, n, v) == -1).collect();
            rows.push((coeffs, target.contains(&v)));
        }
    }
    let (part, kernel) = f2_solve(&rows, gens.len())?;
    let build = |bits: &[bool]| {
        bits.iter()
            .zip(gens)
            .filter(|(b, _)| **b)
            .fold(SquareClass::one(), |acc, (_, g)| acc.mul(g))
    };
    let mut best: Option<(BigInt, SquareClass)> = None;
    let free = kernel.len().min(14);
    for mask in 0u32..(1 << free) {
        let mut bits = part.clone();
        for (i, k) in kernel.iter().take(free).enumerate() {
            if mask >> i & 1 == 1 {
                for (b, kb) in bits.iter_mut().zip(k) {
                    *b ^= kb;
                }
            }
        }
        let y = build(&bits);
        let h = y.to_bigint().abs();
        if best
            .as_ref()
            .is_none_or(|(bh, by)| h < *bh || (h == *bh && y.negative && !by.negative))
        {
            best = Some((h, y));
        }
    }
    best.map(|(_, y)| y)
}

/// Finds a square class y with ram(y, n_i) = target_i for every condition.
/// Generators are −1 and the primes at the relevant places; one or two
/// auxiliary primes are appended when the local system needs them.
pub fn find_slot(conditions: &[(SquareClass, BTreeSet<Place>)]) -> Option<SquareClass> {
    if conditions.iter().all(|(_, t)| t.is_empty()) {
        return Some(SquareClass {
            negative: false,
            primes: vec![],
        });
    }
    let mut places: BTreeSet<Place> = [Place::Real, Place::Prime(2)].into();
    for (n, t) in conditions {
        places.extend(n.primes.iter().map(|&p| Place::Prime(p)));
        places.extend(t.iter().copied());
    }
    let mut gens = vec![SquareClass {
        negative: true,
        primes: vec![],
    }];
    for v in &places {
        if let Place::Prime(p) = v {
            gens.push(SquareClass {
                negative: false,
                primes: vec![*p],
            });
        }
    }
    let places_v: Vec<Place> = places.iter().copied().collect();
    if let Some(y) = try_slot(conditions, &gens, &places_v) {
        return Some(y);
    }
    let aux: Vec<u64> = (3u64..)
        .filter(|&q| arith::is_prime(q) && !places.contains(&Place::Prime(q)))
        .take(400)
        .collect();
    let with_aux = |extra: &[u64]| {
        let mut g = gens.clone();
        let mut pl = places_v.clone();
        for &q in extra {
            g.push(SquareClass {
                negative: false,
                primes: vec![q],
            });
            pl.push(Place::Prime(q));
        }
        try_slot(conditions, &g, &pl)
    };
    for &q in &aux {
        if let Some(y) = with_aux(&[q]) {
            return Some(y);
        }
    }
    for (i, &q1) in aux.iter().take(40).enumerate() {
        for &q2 in aux.iter().take(40).skip(i + 1) {
            if let Some(y) = with_aux(&[q1, q2]) {
                return Some(y);
            }
        }
    }
    None
}

/// Given isomorphic symbols (a2, n2) ≅ (a3, n3), returns y with
/// (y, n2) ≅ (a2, n2) and (y, n3) ≅ (a3, n3).
pub fn find_common_slot(a2: &Q, n2: &Q, a3: &Q, n3: &Q) -> Result<Q, SymbolError> {
    let p2 = SymbolPair::new(a2, n2)?;
    let p3 = SymbolPair::new(a3, n3)?;
    if !symbols_isomorphic(&p2, &p3) {
        return Err(SymbolError::PreconditionViolated(
            p2.to_string(),
            p3.to_string(),
        ));
    }
    let conds = [
        (p2.b.clone(), p2.ramification_set()),
        (p3.b.clone(), p3.ramification_set()),
    ];
    let y = find_slot(&conds)
        .ok_or_else(|| SymbolError::SearchExhausted(p2.to_string(), p3.to_string()))?;
    let yq = y.to_q();
    let ok2 = symbols_isomorphic(&SymbolPair::new(&yq, n2)?, &p2);
    let ok3 = symbols_isomorphic(&SymbolPair::new(&yq, n3)?, &p3);
    if !(ok2 && ok3) {
        return Err(SymbolError::SearchExhausted(p2.to_string(), p3.to_string()));
    }
    Ok(yq)
}

// ---------------------------------------------------------------------------
// Corestriction

/// The rewritten symbol (a, N_S(b)) over the base R of a quadratic layer S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorPair {
    pub a: Elem,
    pub norm_b: Elem,
}

impl CorPair {
    /// The residue symbol over ℚ (requires the residue field of R to be ℚ).
    pub fn residue_pair(&self, base: &Ring) -> Result<SymbolPair, SymbolError> {
        if !base.k().is_rationals() {
            return Err(SymbolError::NotRational);
        }
        let rf = base.residue_ring();
        if !rf.is_field_k() {
            return Err(SymbolError::NotRational);
        }
        let a = base.residue(&self.a).0[0].clone();
        let b = base.residue(&self.norm_b).0[0].clone();
        SymbolPair::new(&a, &b)
    }
}

/// Cor_{S/R}((a, b)_S) ~ (a, N_S(b))_R for a in R and b a unit of S.
pub fn cor_rewrite(s: &Ring, a: &Elem, b: &Elem) -> Result<CorPair, SymbolError> {
    let base = s.base().ok_or(SymbolError::SlotNotInBase)?;
    let a = s.base_part(a).ok_or(SymbolError::SlotNotInBase)?;
    if !base.is_unit(&a) || !s.is_unit(b) {
        return Err(SymbolError::NotUnit);
    }
    Ok(CorPair {
        a,
        norm_b: s.norm(b),
    })
}

impl Q {
    pub(crate) fn from_i128_parts(n: i128) -> Q {
        Q::from_bigint(BigInt::from(n))
    }
}

/// Multiset of places for tests and reports.
pub fn places_string(s: &BTreeSet<Place>) -> String {
    let v: Vec<String> = s.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    /// Brute-force local solvability: a primitive solution of
    /// z² ≡ a x² + b y² modulo p^k.
    fn local_oracle(a: i64, b: i64, p: u64, k: u32) -> i8 {
        let m = p.pow(k) as i64;
        let sq: Vec<i64> = (0..m).map(|x| (x * x).rem_euclid(m)).collect();
        let mut squares = vec![false; m as usize];
        let mut prim_square = vec![false; m as usize];
        for z in 0..m {
            squares[sq[z as usize] as usize] = true;
            if z % p as i64 != 0 {
                prim_square[sq[z as usize] as usize] = true;
            }
        }
        for x in 0..m {
            for y in 0..m {
                let r = (a * sq[x as usize] + b * sq[y as usize]).rem_euclid(m) as usize;
                let xy_prim = x % p as i64 != 0 || y % p as i64 != 0;
                if (xy_prim && squares[r]) || prim_square[r] {
                    return 1;
                }
            }
        }
        -1
    }

    #[test]
    fn hilbert_matches_local_oracle() {
        let vals = [
            -30i64, -15, -10, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 10, 15, 30,
        ];
        for &a in &vals {
            for &b in &vals {
                for (p, k) in [(2u64, 6u32), (3, 3), (5, 3)] {
                    let got = hilbert_symbol(&q(a), &q(b), Place::Prime(p)).unwrap();
                    assert_eq!(got, local_oracle(a, b, p, k), "({a},{b})_{p}");
                }
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        for v in [Place::Real, Place::Prime(2), Place::Prime(7)] {
            assert_eq!(hilbert_symbol(&q(1), &q(-7), v).unwrap(), 1);
        }
        assert_eq!(hilbert_symbol(&q(-1), &q(-1), Place::Real).unwrap(), -1);
        assert_eq!(hilbert_symbol(&q(2), &q(3), Place::Prime(3)).unwrap(), -1);
    }

    #[test]
    fn ramification_examples() {
        assert!(SymbolPair::from_i64(1, 7).ramification_set().is_empty());
        assert_eq!(
            SymbolPair::from_i64(-1, -1).ramification_set(),
            [Place::Real, Place::Prime(2)].into()
        );
        assert_eq!(
            SymbolPair::from_i64(2, 3).ramification_set(),
            [Place::Prime(2), Place::Prime(3)].into()
        );
    }

    #[test]
    fn class_examples() {
        assert!(is_split(&class_of(&[])));
        let m = SymbolPair::from_i64(-1, -1);
        assert!(is_split(&class_of(&[m.clone(), m.clone()])));
        assert!(is_split(&class_of(&[
            m.clone(),
            SymbolPair::from_i64(-1, -2)
        ])));
        assert!(!is_split(&class_of(std::slice::from_ref(&m))));
        assert!(is_split(&class_of(&[SymbolPair::from_i64(3, -2)])));
    }

    #[test]
    fn isomorphism_examples() {
        assert!(symbols_isomorphic(
            &SymbolPair::from_i64(2, 3),
            &SymbolPair::from_i64(-1, 3)
        ));
        assert!(!symbols_isomorphic(
            &SymbolPair::from_i64(-1, -1),
            &SymbolPair::from_i64(1, 1)
        ));
        assert!(symbols_isomorphic(
            &SymbolPair::from_i64(6, 35),
            &SymbolPair::from_i64(35, 6)
        ));
    }

    #[test]
    fn norm_solver_examples() {
        assert_eq!(
            solve_norm(&q(2), &q(-1))
                .unwrap()
                .map(|(u, v)| u.mul(&u).sub(&q(2).mul(&v).mul(&v))),
            Some(q(-1))
        );
        let (u, v) = solve_norm(&q(2), &q(2)).unwrap().unwrap();
        assert_eq!(u.mul(&u).sub(&q(2).mul(&v).mul(&v)), q(2));
        assert_eq!(solve_norm(&q(-1), &q(-1)).unwrap(), None);
        // square n: unrestricted norms
        let (u, v) = solve_norm(&q(9), &q(7)).unwrap().unwrap();
        assert_eq!(u.mul(&u).sub(&q(9).mul(&v).mul(&v)), q(7));
    }

    #[test]
    fn norm_solver_rational_inputs() {
        let n = Q::new(-7, 4);
        let b = Q::new(8, 9);
        let (u, v) = solve_norm(&n, &b).unwrap().unwrap();
        assert_eq!(u.mul(&u).sub(&n.mul(&v).mul(&v)), b);
    }

    #[test]
    fn common_slot_examples() {
        let y = find_common_slot(&q(-1), &q(-1), &q(-1), &q(-1)).unwrap();
        assert!(symbols_isomorphic(
            &SymbolPair::new(&y, &q(-1)).unwrap(),
            &SymbolPair::from_i64(-1, -1)
        ));
        let y = find_common_slot(&q(2), &q(3), &q(-1), &q(3)).unwrap();
        assert!(y == q(-1) || y == q(2));
        assert!(matches!(
            find_common_slot(&q(1), &q(1), &q(-1), &q(-1)),
            Err(SymbolError::PreconditionViolated(..))
        ));
    }

    #[test]
    fn common_slot_needing_auxiliary_prime() {
        // (a2, n2) = (3, 5) and (a3, n3) = (3·something) chosen isomorphic
        let p2 = SymbolPair::from_i64(3, 5);
        let conds = [
            (SquareClass::of_i64(5), p2.ramification_set()),
            (SquareClass::of_i64(13), BTreeSet::new()),
        ];
        let y = find_slot(&conds).unwrap();
        let yq = y.to_q();
        assert_eq!(
            SymbolPair::new(&yq, &q(5)).unwrap().ramification_set(),
            p2.ramification_set()
        );
        assert!(SymbolPair::new(&yq, &q(13))
            .unwrap()
            .ramification_set()
            .is_empty());
    }

    #[test]
    fn cor_rewrite_examples() {
        let k = Ring::field(crate::BaseField::Rationals);
        let l = Ring::adjoin_sqrts(&k, &[k.from_i64(2)]).unwrap();
        let c = cor_rewrite(&l, &l.from_i64(3), &l.from_i64(5)).unwrap();
        assert_eq!(c.norm_b, k.from_i64(25));
        assert!(is_split(&class_of(&[c.residue_pair(&k).unwrap()])));
        let b = l.add(&l.one(), &l.sqrt_gen(0));
        let c = cor_rewrite(&l, &l.from_i64(-1), &b).unwrap();
        assert_eq!(c.residue_pair(&k).unwrap(), SymbolPair::from_i64(-1, -1));
        assert_eq!(
            cor_rewrite(&l, &l.sqrt_gen(0), &b),
            Err(SymbolError::SlotNotInBase)
        );
    }
}
