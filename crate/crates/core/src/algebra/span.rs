//! Free submodules of R^n, centralizers and corner algebras.

use super::{AlgElem, AlgebraError, Sparse, StructAlgebra};
use crate::linalg;
use crate::rational::Q;
use crate::rings::{Elem, Ring};

/// A free direct summand of R^n held in reduced echelon form with unit
/// pivots: row j has 1 at `pivots[j]` and 0 at every other pivot.
#[derive(Debug, Clone)]
pub struct FreeSpan {
    ring: Ring,
    n: usize,
    rows: Vec<AlgElem>,
    pivots: Vec<usize>,
}

impl FreeSpan {
    pub fn empty(ring: &Ring, n: usize) -> FreeSpan {
        FreeSpan {
            ring: ring.clone(),
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Echelonizes the R-span of the candidates. Fails with `NotFree` when a
    /// candidate leaves a nonzero remainder with no unit coordinate that
    /// later rows do not absorb.
    pub fn from_candidates<I>(
        ring: &Ring,
        n: usize,
        candidates: I,
    ) -> Result<FreeSpan, AlgebraError>
    where
        I: IntoIterator<Item = AlgElem>,
    {
        let mut span = FreeSpan::empty(ring, n);
        let mut deferred = Vec::new();
        for v in candidates {
            if let Some(rest) = span.try_insert(v) {
                deferred.push(rest);
            }
        }
        for v in deferred {
            if span.try_insert(v).is_some() {
                return Err(AlgebraError::NotFree);
            }
        }
        Ok(span)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[AlgElem] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn reduce(&self, mut v: AlgElem) -> AlgElem {
        let r = &self.ring;
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let c = v[p].clone();
            for (vi, ri) in v.iter_mut().zip(row) {
                if !ri.is_zero() {
                    *vi = r.sub(vi, &r.mul(&c, ri));
                }
            }
        }
        v
    }

    /// Inserts v; returns the remainder when it is nonzero but has no unit
    /// coordinate.
    pub fn try_insert(&mut self, v: AlgElem) -> Option<AlgElem> {
        let r = self.ring.clone();
        let v = self.reduce(v);
        if v.iter().all(Elem::is_zero) {
            return None;
        }
        let Some(p) = v.iter().position(|c| r.is_unit(c)) else {
            return Some(v);
        };
        let inv = r.inv(&v[p]).expect("unit");
        let v: AlgElem = v.iter().map(|c| r.mul(c, &inv)).collect();
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let c = row[p].clone();
            for (ri, vi) in row.iter_mut().zip(&v) {
                if !vi.is_zero() {
                    *ri = r.sub(ri, &r.mul(&c, vi));
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        None
    }

    /// Exact coordinates of x in the row basis, or `None` if x is outside
    /// the span.
    pub fn coords(&self, x: &AlgElem) -> Option<Vec<Elem>> {
        let c: Vec<Elem> = self.pivots.iter().map(|&p| x[p].clone()).collect();
        let mut rebuilt = vec![self.ring.zero(); self.n];
        for (ci, row) in c.iter().zip(&self.rows) {
            if ci.is_zero() {
                continue;
            }
            for (o, ri) in rebuilt.iter_mut().zip(row) {
                if !ri.is_zero() {
                    self.ring.mul_acc(o, ci, ri);
                }
            }
        }
        (rebuilt == *x).then_some(c)
    }

    pub fn contains(&self, x: &AlgElem) -> bool {
        self.coords(x).is_some()
    }

    pub fn same_span(&self, other: &FreeSpan) -> bool {
        self.rank() == other.rank()
            && self.rows.iter().all(|r| other.contains(r))
            && other.rows.iter().all(|r| self.contains(r))
    }
}

/// A subalgebra carved out of an ambient algebra: its own structure
/// constants plus the inclusion (`basis` lists images in the ambient).
#[derive(Debug, Clone)]
pub struct Subalgebra {
    pub alg: StructAlgebra,
    pub span: FreeSpan,
}

impl Subalgebra {
    pub fn basis(&self) -> &[AlgElem] {
        self.span.basis()
    }

    /// Image in the ambient algebra of an element given in subalgebra
    /// coordinates.
    pub fn include(&self, x: &AlgElem) -> AlgElem {
        let r = self.span.ring();
        let mut out = vec![r.zero(); self.span.n];
        for (c, b) in x.iter().zip(self.span.basis()) {
            if c.is_zero() {
                continue;
            }
            for (o, bi) in out.iter_mut().zip(b) {
                if !bi.is_zero() {
                    r.mul_acc(o, c, bi);
                }
            }
        }
        out
    }
}

/// Induced structure constants on a multiplicatively closed free span.
fn induced(
    ambient: &StructAlgebra,
    span: FreeSpan,
    one: &AlgElem,
) -> Result<Subalgebra, AlgebraError> {
    let basis = span.basis().to_vec();
    if span.rank() == 0 {
        return Err(AlgebraError::Shape("empty span".into()));
    }
    let r = ambient.base().clone();
    let mut table = vec![vec![Vec::new(); basis.len()]; basis.len()];
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            let p = ambient.mul(bi, bj);
            let c = span.coords(&p).ok_or_else(|| {
                AlgebraError::Shape("span is not closed under multiplication".into())
            })?;
            table[i][j] = c
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect::<Sparse>();
        }
    }
    let one = span
        .coords(one)
        .ok_or_else(|| AlgebraError::Shape("unit outside span".into()))?;
    let alg = StructAlgebra::new_unchecked(r, basis.len(), table, one, vec![])?.with_auto_gens();
    alg.check_associative()?;
    Ok(Subalgebra { alg, span })
}

/// Centralizer of a list of elements: solves xg = gx over K and returns the
/// solution module with its induced multiplication.
pub fn centralizer(a: &StructAlgebra, elems: &[AlgElem]) -> Result<Subalgebra, AlgebraError> {
    let n = a.k_len();
    let k = *a.base().k();
    let mut rows: linalg::Matrix = Vec::new();
    let cols: Vec<AlgElem> = (0..n).map(|j| a.k_basis(j)).collect();
    for g in elems {
        let images: Vec<Vec<Q>> = cols
            .iter()
            .map(|x| a.to_k(&a.sub(&a.mul(x, g), &a.mul(g, x))))
            .collect();
        for i in 0..n {
            let row: Vec<Q> = images.iter().map(|im| im[i].clone()).collect();
            if row.iter().any(|q| !q.is_zero()) {
                rows.push(row);
            }
        }
    }
    let null = if rows.is_empty() {
        (0..n)
            .map(|i| {
                let mut v = vec![Q::zero(); n];
                v[i] = Q::one();
                v
            })
            .collect()
    } else {
        linalg::nullspace(&k, &rows, n)
    };
    let span = FreeSpan::from_candidates(a.base(), a.dim(), null.iter().map(|v| a.from_k(v)))?;
    induced(a, span, &a.one())
}

/// The corner eAe with unit e.
pub type Corner = Subalgebra;

pub fn corner(a: &StructAlgebra, e: &AlgElem) -> Result<Corner, AlgebraError> {
    if a.mul(e, e) != *e {
        return Err(AlgebraError::NotIdempotent);
    }
    let cands = (0..a.dim()).map(|i| a.mul(&a.mul(e, &a.basis(i)), e));
    let span = FreeSpan::from_candidates(a.base(), a.dim(), cands)?;
    induced(a, span, e)
}

/// Expresses vectors as R-combinations of a fixed independent family, by
/// echelonizing the family augmented with an identity block.
#[derive(Debug, Clone)]
pub struct Expresser {
    span: FreeSpan,
    n: usize,
    m: usize,
}

impl Expresser {
    /// Fails with `NotFree` unless the family is independent with unit
    /// pivots (a basis of a free direct summand).
    pub fn new(ring: &Ring, n: usize, family: &[AlgElem]) -> Result<Expresser, AlgebraError> {
        let m = family.len();
        let aug = family.iter().enumerate().map(|(k, v)| {
            let mut w = v.clone();
            w.extend((0..m).map(|j| if j == k { ring.one() } else { ring.zero() }));
            w
        });
        let span = FreeSpan::from_candidates(ring, n + m, aug)?;
        if span.rank() != m || span.pivots().iter().any(|&p| p >= n) {
            return Err(AlgebraError::NotFree);
        }
        Ok(Expresser { span, n, m })
    }

    pub fn coeffs(&self, target: &AlgElem) -> Option<Vec<Elem>> {
        let r = self.span.ring();
        let mut acc = vec![r.zero(); self.n + self.m];
        for (row, &p) in self.span.basis().iter().zip(self.span.pivots()) {
            let c = &target[p];
            if c.is_zero() {
                continue;
            }
            for (o, ri) in acc.iter_mut().zip(row) {
                if !ri.is_zero() {
                    r.mul_acc(o, c, ri);
                }
            }
        }
        if acc[..self.n] != target[..] {
            return None;
        }
        Some(acc[self.n..].to_vec())
    }
}
