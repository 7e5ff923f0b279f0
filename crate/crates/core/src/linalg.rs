//! Dense exact linear algebra over the base field.
//!
//! Every linear problem over T or S is flattened to one of these before it
//! is solved, so this is the only elimination code in the crate.

use crate::field::BaseField;
use crate::rational::Q;

pub type Matrix = Vec<Vec<Q>>;

pub fn zero_matrix(rows: usize, cols: usize) -> Matrix {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zero_matrix(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

/// `target -= factor * src`, skipping zeros in `src`.
#[inline]
fn axpy_neg(k: &BaseField, target: &mut [Q], factor: &Q, src: &[Q], start: usize) {
    let neg = k.neg(factor);
    for j in start..src.len() {
        if !src[j].is_zero() {
            target[j] = k.add_mul(&target[j], &neg, &src[j]);
        }
    }
}

/// Reduced row echelon form in place. Returns the pivot columns.
pub fn rref(k: &BaseField, m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = k.inv(&m[r][c]);
        for j in c..cols {
            if !m[r][j].is_zero() {
                m[r][j] = k.mul(&m[r][j], &inv);
            }
        }
        let pivot_row = m[r].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                axpy_neg(k, &mut m[i], &f, &pivot_row, c);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(k: &BaseField, m: &Matrix) -> usize {
    let full = m.len().min(m.first().map_or(0, Vec::len));
    if k.is_rationals() && rank_mod(m) == Some(full) {
        return full;
    }
    let mut m = m.clone();
    rref(k, &mut m).len()
}

/// Basis of `{x : A x = 0}` where `a` is given by rows with `cols` columns.
pub fn nullspace(k: &BaseField, a: &Matrix, cols: usize) -> Vec<Vec<Q>> {
    let mut m = a.clone();
    let pivots = rref(k, &mut m);
    let mut basis = Vec::new();
    let is_pivot: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = Some(r);
        }
        v
    };
    for free in (0..cols).filter(|&c| is_pivot[c].is_none()) {
        let mut x = vec![Q::zero(); cols];
        x[free] = Q::one();
        for (r, &c) in pivots.iter().enumerate() {
            if !m[r][free].is_zero() {
                x[c] = k.neg(&m[r][free]);
            }
        }
        basis.push(x);
    }
    basis
}

/// Outcome of solving `A X = B` for several right-hand sides at once.
#[derive(Debug, Clone)]
pub struct Solution {
    /// One particular solution per right-hand side (`None` if inconsistent).
    pub particular: Vec<Option<Vec<Q>>>,
    /// Dimension of the solution space of the homogeneous system.
    pub nullity: usize,
}

pub fn solve_many(k: &BaseField, a: &Matrix, cols: usize, rhs: &[Vec<Q>]) -> Solution {
    let rows = a.len();
    let mut m: Matrix = (0..rows)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    let pivots = rref(k, &mut m);
    let coef_pivots: Vec<usize> = pivots.iter().copied().filter(|&c| c < cols).collect();
    let particular = (0..rhs.len())
        .map(|s| {
            let col = cols + s;
            if pivots.contains(&col) {
                return None;
            }
            let mut x = vec![Q::zero(); cols];
            for (r, &c) in coef_pivots.iter().enumerate() {
                x[c] = m[r][col].clone();
            }
            Some(x)
        })
        .collect();
    Solution {
        particular,
        nullity: cols - coef_pivots.len(),
    }
}

pub fn solve(k: &BaseField, a: &Matrix, cols: usize, b: &[Q]) -> Option<Vec<Q>> {
    solve_many(k, a, cols, &[b.to_vec()])
        .particular
        .pop()
        .flatten()
}

pub fn inverse(k: &BaseField, a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(k, &mut m);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant(k: &BaseField, a: &Matrix) -> Q {
    let n = a.len();
    let mut m = a.clone();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            det = k.neg(&det);
        }
        det = k.mul(&det, &m[c][c]);
        let inv = k.inv(&m[c][c]);
        let pivot_row = m[c].clone();
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let f = k.mul(&m[i][c], &inv);
                axpy_neg(k, &mut m[i], &f, &pivot_row, c);
            }
        }
    }
    det
}

pub fn mat_vec(k: &BaseField, a: &Matrix, x: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| {
            let mut s = Q::zero();
            for (r, v) in row.iter().zip(x) {
                if !r.is_zero() && !v.is_zero() {
                    s = k.add(&s, &k.mul(r, v));
                }
            }
            s
        })
        .collect()
}

pub fn mat_mul(k: &BaseField, a: &Matrix, b: &Matrix) -> Matrix {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            let mut out = vec![Q::zero(); cols];
            for (l, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    for j in 0..cols {
                        if !b[l][j].is_zero() {
                            out[j] = k.add(&out[j], &k.mul(x, &b[l][j]));
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Incrementally maintained echelon basis of a subspace of K^n.
#[derive(Debug, Clone)]
pub struct Echelon {
    field: BaseField,
    rows: Vec<(usize, Vec<Q>)>,
}

impl Echelon {
    pub fn new(field: BaseField) -> Self {
        Echelon {
            field,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let k = &self.field;
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                axpy_neg(k, &mut v, &f, row, 0);
            }
        }
        v
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(Q::is_zero)
    }

    /// Adds `v`; returns whether it was independent of the current span.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        let k = self.field;
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = k.inv(&r[p]);
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x = k.mul(x, &inv);
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Prime used for rank certificates: vectors independent modulo it are
/// independent over ℚ.
const CERT_P: u64 = (1 << 61) - 1;

fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % CERT_P as u128) as u64
}

/// Image of a rational modulo the certificate prime; `None` if its
/// denominator vanishes there.
fn q_mod(q: &Q) -> Option<u64> {
    let (n, d) = match q {
        Q::Small(n, d) => (
            n.rem_euclid(CERT_P as i64) as u64,
            d.rem_euclid(CERT_P as i64) as u64,
        ),
        Q::Big(_) => {
            let p = num_bigint::BigInt::from(CERT_P);
            let r = |x: num_bigint::BigInt| {
                num_traits::ToPrimitive::to_u64(&num_integer::Integer::mod_floor(&x, &p))
            };
            (r(q.numer())?, r(q.denom())?)
        }
    };
    Some(mulm(n, crate::arith::inv_mod(d, CERT_P)?))
}

/// Echelon basis modulo the certificate prime. Ranks found here are lower
/// bounds for the rank over ℚ.
#[derive(Debug, Clone, Default)]
pub struct ModEchelon {
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Q]) -> Option<Vec<u64>> {
        let mut v: Vec<u64> = v.iter().map(q_mod).collect::<Option<_>>()?;
        for (p, row) in &self.rows {
            let f = v[*p];
            if f != 0 {
                let nf = CERT_P - f;
                for (x, r) in v.iter_mut().zip(row) {
                    if *r != 0 {
                        *x = (*x + mulm(nf, *r)) % CERT_P;
                    }
                }
            }
        }
        Some(v)
    }

    /// Adds `v` if it is independent modulo the prime; `false` otherwise
    /// (including when `v` has no image there).
    pub fn insert(&mut self, v: &[Q]) -> bool {
        let Some(mut r) = self.reduce(v) else {
            return false;
        };
        let Some(p) = r.iter().position(|x| *x != 0) else {
            return false;
        };
        let inv = crate::arith::inv_mod(r[p], CERT_P).expect("nonzero residue");
        for x in r.iter_mut() {
            *x = mulm(*x, inv);
        }
        self.rows.push((p, r));
        true
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).is_some_and(|r| r.iter().all(|x| *x == 0))
    }
}

/// Span bookkeeping: exact, or modulo the certificate prime where
/// independence is a certificate and dependence is not.
#[derive(Debug, Clone)]
pub enum RankTracker {
    Exact(Echelon),
    Modular(ModEchelon),
}

impl RankTracker {
    pub fn exact(k: BaseField) -> RankTracker {
        RankTracker::Exact(Echelon::new(k))
    }

    pub fn modular() -> RankTracker {
        RankTracker::Modular(ModEchelon::new())
    }

    /// Modular over ℚ, exact over a prime field.
    pub fn fast(k: BaseField) -> RankTracker {
        if k.is_rationals() {
            Self::modular()
        } else {
            Self::exact(k)
        }
    }

    pub fn insert(&mut self, v: &[Q]) -> bool {
        match self {
            RankTracker::Exact(e) => e.insert(v),
            RankTracker::Modular(e) => e.insert(v),
        }
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        match self {
            RankTracker::Exact(e) => e.contains(v),
            RankTracker::Modular(e) => e.contains(v),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            RankTracker::Exact(e) => e.rank(),
            RankTracker::Modular(e) => e.rank(),
        }
    }
}

/// Rank modulo the certificate prime, if every entry has an image there.
pub fn rank_mod(m: &Matrix) -> Option<usize> {
    let mut e = ModEchelon::new();
    for row in m {
        if row.iter().any(|q| q_mod(q).is_none()) {
            return None;
        }
        e.insert(row);
    }
    Some(e.rank())
}
