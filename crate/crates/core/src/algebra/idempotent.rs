//! Idempotents: splitting over K, Hensel lifting, and the Galois-split
//! idempotent of S ⊗ S.

use rand::Rng;

use super::span::corner;
use super::{AlgElem, AlgebraError, StructAlgebra};
use crate::field::BaseField;
use crate::linalg::{self, Echelon};
use crate::rational::Q;
use crate::rings::Elem;
use crate::symbols::{self, SymbolPair};

const ZERO_DIVISOR_DRAWS: usize = 1000;
const HEIGHT: i64 = 20;

/// An exact idempotent of some algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Idempotent(AlgElem);

impl Idempotent {
    pub fn new(a: &StructAlgebra, e: AlgElem) -> Result<Idempotent, AlgebraError> {
        if a.mul(&e, &e) != e {
            return Err(AlgebraError::NotIdempotent);
        }
        Ok(Idempotent(e))
    }

    pub fn elem(&self) -> &AlgElem {
        &self.0
    }

    pub fn into_elem(self) -> AlgElem {
        self.0
    }
}

// -- polynomials over K (coefficients low to high) ---------------------------

fn trim(mut f: Vec<Q>) -> Vec<Q> {
    while f.last().is_some_and(Q::is_zero) {
        f.pop();
    }
    f
}

fn monic(k: &BaseField, f: Vec<Q>) -> Vec<Q> {
    let f = trim(f);
    match f.last() {
        Some(l) => {
            let li = k.inv(l);
            f.iter().map(|c| k.mul(c, &li)).collect()
        }
        None => f,
    }
}

fn poly_rem(k: &BaseField, f: &[Q], g: &[Q]) -> Vec<Q> {
    let mut r = trim(f.to_vec());
    let g = trim(g.to_vec());
    let lg = k.inv(g.last().expect("nonzero divisor"));
    while r.len() >= g.len() {
        let c = k.mul(r.last().expect("nonempty"), &lg);
        let shift = r.len() - g.len();
        for (i, gi) in g.iter().enumerate() {
            r[shift + i] = k.sub(&r[shift + i], &k.mul(&c, gi));
        }
        r = trim(r);
    }
    r
}

fn poly_div(k: &BaseField, f: &[Q], g: &[Q]) -> Vec<Q> {
    let mut r = trim(f.to_vec());
    let g = trim(g.to_vec());
    let lg = k.inv(g.last().expect("nonzero divisor"));
    let mut q = vec![Q::zero(); r.len().saturating_sub(g.len()) + 1];
    while r.len() >= g.len() {
        let c = k.mul(r.last().expect("nonempty"), &lg);
        let shift = r.len() - g.len();
        q[shift] = c.clone();
        for (i, gi) in g.iter().enumerate() {
            r[shift + i] = k.sub(&r[shift + i], &k.mul(&c, gi));
        }
        r = trim(r);
    }
    trim(q)
}

fn poly_gcd(k: &BaseField, f: &[Q], g: &[Q]) -> Vec<Q> {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(k, &a, &b);
        a = b;
        b = r;
    }
    monic(k, a)
}

fn derivative(k: &BaseField, f: &[Q]) -> Vec<Q> {
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| k.mul(&k.from_i64(i as i64), c))
            .collect(),
    )
}

fn eval_poly(k: &BaseField, f: &[Q], x: &Q) -> Q {
    f.iter()
        .rev()
        .fold(Q::zero(), |acc, c| k.add(&k.mul(&acc, x), c))
}

fn poly_at(a: &StructAlgebra, f: &[Q], x: &AlgElem) -> AlgElem {
    let mut acc = a.zero();
    for c in f.iter().rev() {
        acc = a.add(&a.mul(&acc, x), &a.from_scalar(&a.base().from_q(c)));
    }
    acc
}

/// Monic minimal polynomial of x over K (the base must be K itself).
pub fn minimal_polynomial(a: &StructAlgebra, x: &AlgElem) -> Vec<Q> {
    let k = *a.base().k();
    let mut powers: Vec<Vec<Q>> = vec![a.to_k(&a.one())];
    let mut cur = a.one();
    let mut ech = Echelon::new(k);
    ech.insert(&powers[0]);
    loop {
        cur = a.mul(&cur, x);
        let v = a.to_k(&cur);
        if ech.contains(&v) {
            let d = powers.len();
            let m: linalg::Matrix = (0..v.len())
                .map(|i| powers.iter().map(|p| p[i].clone()).collect())
                .collect();
            let c = linalg::solve(&k, &m, d, &v).expect("dependent power lies in the span");
            let mut f: Vec<Q> = c.iter().map(|ci| k.neg(ci)).collect();
            f.push(Q::one());
            return f;
        }
        ech.insert(&v);
        powers.push(v);
    }
}

fn rational_roots(k: &BaseField, f: &[Q]) -> Vec<Q> {
    let f = trim(f.to_vec());
    if f.len() < 2 {
        return Vec::new();
    }
    if f[0].is_zero() {
        return vec![Q::zero()];
    }
    match k {
        BaseField::Prime(p) => {
            let limit = (*p).min(1 << 16);
            (0..limit)
                .map(|v| k.from_i64(v as i64))
                .filter(|v| eval_poly(k, &f, v).is_zero())
                .take(1)
                .collect()
        }
        BaseField::Rationals => {
            // clear denominators, then test ±p/q with p | a0 and q | an
            let den = f.iter().fold(num_bigint::BigInt::from(1), |acc, c| {
                num_integer::Integer::lcm(&acc, &c.denom())
            });
            let ints: Vec<num_bigint::BigInt> =
                f.iter().map(|c| c.numer() * (&den / c.denom())).collect();
            let to_u64 = |b: &num_bigint::BigInt| -> Option<u64> {
                u64::try_from(num_traits::Signed::abs(b)).ok()
            };
            let (Some(a0), Some(an)) = (to_u64(&ints[0]), to_u64(ints.last().expect("nonempty")))
            else {
                return Vec::new();
            };
            if a0 > 1 << 40 || an > 1 << 40 {
                return Vec::new();
            }
            for p in crate::arith::divisors(a0) {
                for q in crate::arith::divisors(an) {
                    for s in [1i64, -1] {
                        let r = Q::new(s * p as i64, q as i64);
                        if eval_poly(k, &f, &r).is_zero() {
                            return vec![r];
                        }
                    }
                }
            }
            Vec::new()
        }
    }
}

/// Solves u² − n v² = b over K; `None` when no solution exists.
pub fn norm_solve_k(k: &BaseField, n: &Q, b: &Q) -> Result<Option<(Q, Q)>, AlgebraError> {
    match k {
        BaseField::Rationals => Ok(symbols::solve_norm(n, b)?),
        BaseField::Prime(p) => {
            for v in 0..(*p).min(1 << 20) {
                let v = k.from_i64(v as i64);
                let t = k.add(b, &k.mul(n, &k.mul(&v, &v)));
                if let Some(u) = k.sqrt(&t) {
                    return Ok(Some((u, v)));
                }
            }
            Err(AlgebraError::SearchExhausted(
                "norm equation over a prime field".into(),
            ))
        }
    }
}

fn is_k_scalar(a: &StructAlgebra, x: &AlgElem) -> Option<Q> {
    a.as_scalar(x).map(|s| s.0[0].clone())
}

/// Standard quaternion generators (i, j, i², j²) of a 4-dimensional
/// algebra over K, when it is a quaternion algebra.
fn quaternion_basis(
    a: &StructAlgebra,
    rng: &mut crate::SearchRng,
) -> Option<(AlgElem, AlgElem, Q, Q)> {
    let k = *a.base().k();
    let check = |i: &AlgElem, j: &AlgElem| -> Option<(Q, Q)> {
        let qa = is_k_scalar(a, &a.mul(i, i))?;
        let qb = is_k_scalar(a, &a.mul(j, j))?;
        let anti = a.add(&a.mul(i, j), &a.mul(j, i));
        (!qa.is_zero() && !qb.is_zero() && a.is_zero(&anti)).then_some((qa, qb))
    };
    if let (Ok(i), Ok(j)) = (a.gen("i"), a.gen("j")) {
        if let Some((qa, qb)) = check(&i, &j) {
            return Some((i, j, qa, qb));
        }
    }
    let n = a.dim();
    let trace = |x: &AlgElem| -> Q {
        (0..n).fold(Q::zero(), |t, j| k.add(&t, &a.mul(x, &a.basis(j))[j].0[0]))
    };
    let tr: Vec<Q> = (0..n).map(|m| trace(&a.basis(m))).collect();
    let pure: Vec<AlgElem> = linalg::nullspace(&k, &vec![tr], n)
        .into_iter()
        .map(|v| v.into_iter().map(|q| Elem(vec![q])).collect())
        .collect();
    if pure.len() != 3 {
        return None;
    }
    let combo = |c: &[Q], vs: &[AlgElem]| -> AlgElem {
        let mut x = a.zero();
        for (ci, v) in c.iter().zip(vs) {
            x = a.add(&x, &a.scale_q(ci, v));
        }
        x
    };
    for attempt in 0..64 {
        let i = if attempt < 3 {
            pure[attempt].clone()
        } else {
            let c: Vec<Q> = (0..3)
                .map(|_| k.from_i64(rng.gen_range(-HEIGHT..=HEIGHT)))
                .collect();
            combo(&c, &pure)
        };
        if is_k_scalar(a, &a.mul(&i, &i)).is_none_or(|s| s.is_zero()) {
            continue;
        }
        // pure elements anticommuting with i
        let rows: linalg::Matrix = {
            let imgs: Vec<Vec<Q>> = pure
                .iter()
                .map(|p| a.to_k(&a.add(&a.mul(&i, p), &a.mul(p, &i))))
                .collect();
            (0..n)
                .map(|r| imgs.iter().map(|im| im[r].clone()).collect())
                .collect()
        };
        for c in linalg::nullspace(&k, &rows, 3) {
            let j = combo(&c, &pure);
            if let Some((qa, qb)) = check(&i, &j) {
                return Some((i, j, qa, qb));
            }
        }
    }
    None
}

/// Rank-one idempotent of a quaternion algebra spanned by i, j inside a.
fn split_quaternion(
    a: &StructAlgebra,
    i: &AlgElem,
    j: &AlgElem,
    qa: &Q,
    qb: &Q,
) -> Result<AlgElem, AlgebraError> {
    let k = *a.base().k();
    let half = k.inv(&k.from_i64(2));
    let idem = |z: &AlgElem| a.scale_q(&half, &a.add(&a.one(), z));
    if let Some(r) = k.sqrt(qa) {
        return Ok(idem(&a.scale_q(&k.inv(&r), i)));
    }
    if let Some(r) = k.sqrt(qb) {
        return Ok(idem(&a.scale_q(&k.inv(&r), j)));
    }
    let (u, v) = norm_solve_k(&k, qa, qb)?.ok_or(AlgebraError::NotSplit)?;
    // z = (u + v i)^{-1} j squares to 1
    let winv = a.scale_q(
        &k.inv(qb),
        &a.sub(&a.from_scalar(&a.base().from_q(&u)), &a.scale_q(&v, i)),
    );
    Ok(idem(&a.mul(&winv, j)))
}

fn quaternion_class(
    k: &BaseField,
    qa: &Q,
    qb: &Q,
) -> Result<Option<symbols::SymbolClass>, AlgebraError> {
    if !k.is_rationals() {
        return Ok(None);
    }
    Ok(Some(symbols::class_of(&[SymbolPair::new(qa, qb)?])))
}

/// Biquaternion case: a = Q1 ⊗ Q2 with the first four generators forming
/// standard pairs of commuting quaternion subalgebras.
fn split_biquaternion(a: &StructAlgebra) -> Option<Result<AlgElem, AlgebraError>> {
    let k = *a.base().k();
    let g: Vec<AlgElem> = a.gens().iter().take(4).map(|(_, g)| g.clone()).collect();
    if g.len() < 4 {
        return None;
    }
    let sq = |x: &AlgElem| is_k_scalar(a, &a.mul(x, x)).filter(|s| !s.is_zero());
    let anti = |x: &AlgElem, y: &AlgElem| a.is_zero(&a.add(&a.mul(x, y), &a.mul(y, x)));
    let comm = |x: &AlgElem, y: &AlgElem| a.mul(x, y) == a.mul(y, x);
    let (a1, b1, a2, b2) = (sq(&g[0])?, sq(&g[1])?, sq(&g[2])?, sq(&g[3])?);
    if !anti(&g[0], &g[1])
        || !anti(&g[2], &g[3])
        || !(0..2).all(|x| (2..4).all(|y| comm(&g[x], &g[y])))
    {
        return None;
    }
    Some((|| {
        let split1 = split_quaternion(a, &g[0], &g[1], &a1, &b1);
        let split2 = split_quaternion(a, &g[2], &g[3], &a2, &b2);
        match (split1, split2) {
            (Ok(e1), Ok(e2)) => return Ok(a.mul(&e1, &e2)),
            (Err(AlgebraError::NotSplit), Err(AlgebraError::NotSplit)) => {}
            (Err(AlgebraError::NotSplit), Ok(_)) | (Ok(_), Err(AlgebraError::NotSplit)) => {
                return Err(AlgebraError::NotSplit)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
        if let (Some(c1), Some(c2)) = (
            quaternion_class(&k, &a1, &b1)?,
            quaternion_class(&k, &a2, &b2)?,
        ) {
            if c1 != c2 {
                return Err(AlgebraError::NotSplit);
            }
        }
        let (i2, j2) = quaternion_iso_images(a, (&g[2], &g[3], &a2, &b2), &a1, &b1)?;
        let (i1, j1) = (&g[0], &g[1]);
        let k1 = a.mul(i1, j1);
        let k2 = a.mul(&i2, &j2);
        let terms = [
            a.one(),
            a.scale_q(&k.neg(&k.inv(&a1)), &a.mul(i1, &i2)),
            a.scale_q(&k.neg(&k.inv(&b1)), &a.mul(j1, &j2)),
            a.scale_q(&k.inv(&k.mul(&a1, &b1)), &a.mul(&k1, &k2)),
        ];
        let sum = terms.iter().fold(a.zero(), |s, t| a.add(&s, t));
        Ok(a.scale_q(&k.inv(&k.from_i64(4)), &sum))
    })())
}

/// Inside the quaternion algebra (qa2, qb2) spanned by (i2, j2), finds
/// i', j' with i'² = qa1, j'² = qb1, i'j' = −j'i'. Errors with `NotSplit`
/// when the two algebras are not isomorphic.
pub(crate) fn quaternion_iso_images(
    a: &StructAlgebra,
    (i2, j2, qa2, qb2): (&AlgElem, &AlgElem, &Q, &Q),
    qa1: &Q,
    qb1: &Q,
) -> Result<(AlgElem, AlgElem), AlgebraError> {
    let k = *a.base().k();
    let k2 = a.mul(i2, j2);
    // pure element y i2 + z j2 + w k2 squares to y² qa2 + qb2 (z² − qa2 w²)
    let mut found = None;
    'outer: for num in 0..40i64 {
        for den in 1..=4i64 {
            let y = Q::new(num, den);
            let t = k.div(&k.sub(qa1, &k.mul(qa2, &k.mul(&y, &y))), qb2);
            if t.is_zero() {
                continue;
            }
            if let Some((z, w)) = norm_solve_k(&k, qa2, &t)? {
                found = Some((y, z, w));
                break 'outer;
            }
            if num == 0 {
                break;
            }
        }
    }
    let (y, z, w) = found.ok_or(AlgebraError::NotSplit)?;
    let ip = a.add(
        &a.add(&a.scale_q(&y, i2), &a.scale_q(&z, j2)),
        &a.scale_q(&w, &k2),
    );
    // an element of the span anticommuting with i'
    let span = [a.one(), i2.clone(), j2.clone(), k2.clone()];
    let imgs: Vec<Vec<Q>> = span
        .iter()
        .map(|p| a.to_k(&a.add(&a.mul(&ip, p), &a.mul(p, &ip))))
        .collect();
    let rows: linalg::Matrix = (0..imgs[0].len())
        .map(|r| imgs.iter().map(|im| im[r].clone()).collect())
        .collect();
    let null = linalg::nullspace(&k, &rows, 4);
    let j0 = null
        .iter()
        .map(|c| {
            c.iter()
                .zip(&span)
                .fold(a.zero(), |s, (ci, v)| a.add(&s, &a.scale_q(ci, v)))
        })
        .find(|x| is_k_scalar(a, &a.mul(x, x)).is_some_and(|s| !s.is_zero()))
        .ok_or(AlgebraError::NotSplit)?;
    let c0 = is_k_scalar(a, &a.mul(&j0, &j0)).expect("checked");
    let (p, q) = norm_solve_k(&k, qa1, &k.div(qb1, &c0))?.ok_or(AlgebraError::NotSplit)?;
    let jp = a.mul(
        &j0,
        &a.add(&a.from_scalar(&a.base().from_q(&p)), &a.scale_q(&q, &ip)),
    );
    Ok((ip, jp))
}

/// Rank-one idempotent of a split central simple algebra over K.
pub fn rank_one_idempotent(a: &StructAlgebra, seed: u64) -> Result<Idempotent, AlgebraError> {
    if !a.base().is_field_k() {
        return Err(AlgebraError::NotAField(a.base().to_string()));
    }
    let mut rng = crate::seeded_rng(seed);
    let e = split_rec(a, &mut rng, &mut 0)?;
    let e = Idempotent::new(a, e)?;
    if corner(a, e.elem())?.span.rank() != 1 {
        return Err(AlgebraError::SearchExhausted(
            "idempotent of rank > 1".into(),
        ));
    }
    Ok(e)
}

fn split_rec(
    a: &StructAlgebra,
    rng: &mut crate::SearchRng,
    draws: &mut usize,
) -> Result<AlgElem, AlgebraError> {
    let k = *a.base().k();
    match a.dim() {
        1 => return Ok(a.one()),
        4 => {
            if let Some((i, j, qa, qb)) = quaternion_basis(a, rng) {
                return split_quaternion(a, &i, &j, &qa, &qb);
            }
        }
        16 => {
            if let Some(r) = split_biquaternion(a) {
                return r;
            }
        }
        _ => {}
    }
    while *draws < ZERO_DIVISOR_DRAWS {
        *draws += 1;
        let x: AlgElem = (0..a.dim())
            .map(|_| Elem(vec![k.from_i64(rng.gen_range(-HEIGHT..=HEIGHT))]))
            .collect();
        let f = minimal_polynomial(a, &x);
        let g = poly_gcd(&k, &f, &derivative(&k, &f));
        let z = if g.len() > 1 {
            poly_at(a, &poly_div(&k, &f, &g), &x)
        } else if let Some(r) = rational_roots(&k, &f).first().filter(|_| f.len() > 2) {
            a.sub(&x, &a.from_scalar(&a.base().from_q(r)))
        } else {
            continue;
        };
        let e = idempotent_of_left_ideal(a, &z)?;
        let c = corner(a, &e)?;
        let inner = split_rec(&c.alg, rng, draws)?;
        return Ok(c.include(&inner));
    }
    Err(AlgebraError::SearchExhausted(format!(
        "no zero divisor in {ZERO_DIVISOR_DRAWS} draws"
    )))
}

/// For a zero divisor z of a semisimple algebra, an idempotent e with
/// A e = A z (a right identity of the left ideal).
fn idempotent_of_left_ideal(a: &StructAlgebra, z: &AlgElem) -> Result<AlgElem, AlgebraError> {
    let k = *a.base().k();
    let mut ech = Echelon::new(k);
    let mut gens = Vec::new();
    for i in 0..a.dim() {
        let w = a.mul(&a.basis(i), z);
        if ech.insert(&a.to_k(&w)) {
            gens.push(w);
        }
    }
    let m = gens.len();
    // Σ_c c_l (w_j w_l) = w_j for every j
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for wj in &gens {
        let prods: Vec<Vec<Q>> = gens.iter().map(|wl| a.to_k(&a.mul(wj, wl))).collect();
        let target = a.to_k(wj);
        for (r, t) in target.iter().enumerate() {
            rows.push(prods.iter().map(|p| p[r].clone()).collect::<Vec<Q>>());
            rhs.push(t.clone());
        }
    }
    let c = linalg::solve(&k, &rows, m, &rhs).ok_or(AlgebraError::NotIdempotent)?;
    Ok(c.iter()
        .zip(&gens)
        .fold(a.zero(), |s, (ci, w)| a.add(&s, &a.scale_q(ci, w))))
}

/// Newton iteration e ← 3e² − 2e³ from a candidate whose residue is
/// idempotent.
pub fn hensel_lift_idempotent(a: &StructAlgebra, e0: &AlgElem) -> Result<Idempotent, AlgebraError> {
    let r = a.residue_algebra();
    let er = a.residue_elem(e0);
    if r.mul(&er, &er) != er {
        return Err(AlgebraError::NotIdempotentResidue);
    }
    let three = Q::from_i64(3);
    let two = Q::from_i64(2);
    let mut e = e0.clone();
    let mut steps = 0;
    let bound = usize::BITS - a.base().truncation().leading_zeros() + 1;
    loop {
        let e2 = a.mul(&e, &e);
        if e2 == e {
            return Idempotent::new(a, e);
        }
        if steps > bound {
            return Err(AlgebraError::NotIdempotent);
        }
        let e3 = a.mul(&e2, &e);
        e = a.sub(&a.scale_q(&three, &e2), &a.scale_q(&two, &e3));
        steps += 1;
    }
}

/// e = ½(1 + x₁x₂/s) for commuting square roots x₁, x₂ of the same unit s
/// (as for √a ⊗ √a inside S ⊗_T S).
pub fn galois_split_idempotent(
    a: &StructAlgebra,
    x1: &AlgElem,
    x2: &AlgElem,
    s: &Elem,
) -> Result<Idempotent, AlgebraError> {
    let r = a.base();
    let sinv = r.inv(s)?;
    let half = r.inv(&r.from_i64(2))?;
    let z = a.scale(&sinv, &a.mul(x1, x2));
    Idempotent::new(a, a.scale(&half, &a.add(&a.one(), &z)))
}
