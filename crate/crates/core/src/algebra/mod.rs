//! Finite free algebras over a ring of the tower, given by structure
//! constants.
//!
//! Structure constants are stored sparsely (`e_i e_j` as a list of
//! `(k, c_ijk)`), while elements are dense coordinate vectors. Large
//! algebras are checked for associativity through a generating set: if
//! `(g x) y = g (x y)` for every generator `g` and basis elements `x, y`,
//! and left-nested products of generators span the algebra, then the
//! multiplication is associative.

use std::collections::HashMap;
use std::fmt;

use crate::linalg::{self, RankTracker};
use crate::rational::Q;
use crate::rings::{Elem, Ring, RingError};
use crate::symbols::SymbolError;

mod azumaya;
mod crossed;
mod idempotent;
mod span;

pub use azumaya::{is_azumaya, is_azumaya_by_determinant};
pub use crossed::{
    crossed_product_b_image, crossed_product_quadratic, crossed_product_unchecked,
    find_semilinear_iso, skolem_noether_c, BiquaternionWitnessSplitter, TwistSplitter,
};
pub use idempotent::{
    galois_split_idempotent, hensel_lift_idempotent, minimal_polynomial, norm_solve_k,
    rank_one_idempotent, Idempotent,
};
pub use span::{centralizer, corner, Corner, Expresser, FreeSpan, Subalgebra};

/// Dense coordinates of an algebra element over the base ring.
pub type AlgElem = Vec<Elem>;

/// Sparse combination of basis elements.
pub type Sparse = Vec<(usize, Elem)>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("algebras are over different base rings")]
    BaseMismatch,
    #[error("associativity fails on basis triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("the declared unit is not a two-sided identity")]
    BadUnit,
    #[error("element is not a unit of the algebra")]
    NotUnit,
    #[error("module is not free over the base ring")]
    NotFree,
    #[error("algebra is not split")]
    NotSplit,
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("residue of the candidate is not idempotent")]
    NotIdempotentResidue,
    #[error("element is not idempotent")]
    NotIdempotent,
    #[error("algebra and its twist are not Brauer equivalent: {0}")]
    NotBrauerEquivalent(String),
    #[error("no unit solution of the Skolem-Noether system")]
    NoUnitSolution,
    #[error("crossed product data inconsistent: {0}")]
    AssociativityFailure(String),
    #[error("map check failed: {0}")]
    MapCheck(String),
    #[error("no generator named `{0}`")]
    UnknownGen(String),
    #[error("operation requires a field base: {0}")]
    NotAField(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

#[derive(Clone)]
pub struct StructAlgebra {
    base: Ring,
    dim: usize,
    table: Vec<Vec<Sparse>>,
    one: AlgElem,
    gens: Vec<(String, AlgElem)>,
}

impl fmt::Debug for StructAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "StructAlgebra(rank {} over {}, gens {:?})",
            self.dim,
            self.base,
            self.gen_names()
        )
    }
}

impl PartialEq for StructAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.dim == other.dim
            && self.one == other.one
            && self.same_table(other)
    }
}

impl StructAlgebra {
    /// Builds an algebra and runs the exact associativity and unit checks.
    pub fn new(
        base: Ring,
        dim: usize,
        table: Vec<Vec<Sparse>>,
        one: AlgElem,
        gens: Vec<(String, AlgElem)>,
    ) -> Result<StructAlgebra, AlgebraError> {
        let a = StructAlgebra::new_unchecked(base, dim, table, one, gens)?;
        a.check_associative()?;
        Ok(a)
    }

    /// Builds without the associativity check, for constructions that
    /// preserve associativity of already checked inputs.
    pub fn new_unchecked(
        base: Ring,
        dim: usize,
        table: Vec<Vec<Sparse>>,
        one: AlgElem,
        gens: Vec<(String, AlgElem)>,
    ) -> Result<StructAlgebra, AlgebraError> {
        if table.len() != dim || table.iter().any(|r| r.len() != dim) || one.len() != dim {
            return Err(AlgebraError::Shape(format!("table for rank {dim}")));
        }
        let table = table
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| e.into_iter().filter(|(_, c)| !c.is_zero()).collect())
                    .collect()
            })
            .collect();
        Ok(StructAlgebra {
            base,
            dim,
            table,
            one,
            gens,
        })
    }

    pub fn base(&self) -> &Ring {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn one(&self) -> AlgElem {
        self.one.clone()
    }

    pub fn gens(&self) -> &[(String, AlgElem)] {
        &self.gens
    }

    pub fn gen_names(&self) -> Vec<&str> {
        self.gens.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn gen(&self, name: &str) -> Result<AlgElem, AlgebraError> {
        self.gens
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g.clone())
            .ok_or_else(|| AlgebraError::UnknownGen(name.to_string()))
    }

    pub fn with_gens(mut self, gens: Vec<(String, AlgElem)>) -> StructAlgebra {
        self.gens = gens;
        self
    }

    /// Renames generators positionally.
    pub fn rename_gens(mut self, names: &[&str]) -> StructAlgebra {
        for (g, n) in self.gens.iter_mut().zip(names) {
            g.0 = n.to_string();
        }
        self
    }

    pub fn table(&self) -> &[Vec<Sparse>] {
        &self.table
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &Sparse {
        &self.table[i][j]
    }

    fn same_table(&self, other: &Self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let mut a = self.table[i][j].clone();
                let mut b = other.table[i][j].clone();
                a.sort_by_key(|x| x.0);
                b.sort_by_key(|x| x.0);
                a == b
            })
        })
    }

    pub fn zero(&self) -> AlgElem {
        vec![self.base.zero(); self.dim]
    }

    pub fn basis(&self, i: usize) -> AlgElem {
        let mut v = self.zero();
        v[i] = self.base.one();
        v
    }

    pub fn from_scalar(&self, r: &Elem) -> AlgElem {
        self.one.iter().map(|c| self.base.mul(c, r)).collect()
    }

    pub fn is_zero(&self, x: &AlgElem) -> bool {
        x.iter().all(Elem::is_zero)
    }

    pub fn add(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        x.iter().zip(y).map(|(a, b)| self.base.add(a, b)).collect()
    }

    pub fn sub(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        x.iter().zip(y).map(|(a, b)| self.base.sub(a, b)).collect()
    }

    pub fn neg(&self, x: &AlgElem) -> AlgElem {
        x.iter().map(|a| self.base.neg(a)).collect()
    }

    /// Scalar multiple r·x for r in the base ring.
    pub fn scale(&self, r: &Elem, x: &AlgElem) -> AlgElem {
        x.iter().map(|a| self.base.mul(r, a)).collect()
    }

    pub fn scale_q(&self, q: &Q, x: &AlgElem) -> AlgElem {
        x.iter().map(|a| self.base.scale(q, a)).collect()
    }

    /// `acc += c * v` for a sparse v.
    fn acc_sparse(&self, acc: &mut AlgElem, c: &Elem, v: &Sparse) {
        for (k, d) in v {
            self.base.mul_acc(&mut acc[*k], c, d);
        }
    }

    pub fn mul(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        let mut out = self.zero();
        let ynz: Vec<usize> = (0..self.dim).filter(|&j| !y[j].is_zero()).collect();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for &j in &ynz {
                let t = &self.table[i][j];
                if t.is_empty() {
                    continue;
                }
                let c = self.base.mul(xi, &y[j]);
                self.acc_sparse(&mut out, &c, t);
            }
        }
        out
    }

    pub fn pow(&self, x: &AlgElem, e: u32) -> AlgElem {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, x);
        }
        r
    }

    pub fn to_sparse(&self, x: &AlgElem) -> Sparse {
        x.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.clone()))
            .collect()
    }

    /// Whether x lies in the image of the base ring (a multiple of 1).
    pub fn as_scalar(&self, x: &AlgElem) -> Option<Elem> {
        // the unit is e_0 for every constructor in this crate; fall back to a check
        let idx = self.one.iter().position(|c| !c.is_zero())?;
        let r = x[idx].clone();
        let inv_one = self.base.inv(&self.one[idx]).ok()?;
        let r = self.base.mul(&r, &inv_one);
        if self.from_scalar(&r) == *x {
            Some(r)
        } else {
            None
        }
    }

    // -- flattening to K -----------------------------------------------------

    /// Length of the K-coordinate vector of an element.
    pub fn k_len(&self) -> usize {
        self.dim * self.base.dim()
    }

    pub fn to_k(&self, x: &AlgElem) -> Vec<Q> {
        x.iter().flat_map(|c| c.0.iter().cloned()).collect()
    }

    pub fn from_k(&self, v: &[Q]) -> AlgElem {
        v.chunks(self.base.dim())
            .map(|c| Elem(c.to_vec()))
            .collect()
    }

    /// The element e_i·β for K-basis index `i * dim_K(R) + b`.
    pub fn k_basis(&self, idx: usize) -> AlgElem {
        let d = self.base.dim();
        let mut v = self.zero();
        v[idx / d] = self.base.k_basis(idx % d);
        v
    }

    /// K-matrix of left multiplication by x (columns indexed like `to_k`).
    pub fn left_mul_k(&self, x: &AlgElem) -> linalg::Matrix {
        let n = self.k_len();
        let cols: Vec<Vec<Q>> = (0..n)
            .map(|j| self.to_k(&self.mul(x, &self.k_basis(j))))
            .collect();
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i].clone()).collect())
            .collect()
    }

    /// Units are detected exactly: left multiplication must be bijective.
    /// Tested at the residue, which suffices over a local or semilocal base.
    pub fn is_unit(&self, x: &AlgElem) -> bool {
        let r = self.residue_algebra();
        let xr = self.residue_elem(x);
        let m = r.left_mul_k(&xr);
        linalg::rank(r.base.k(), &m) == r.k_len()
    }

    pub fn inverse(&self, x: &AlgElem) -> Result<AlgElem, AlgebraError> {
        if !self.is_unit(x) {
            return Err(AlgebraError::NotUnit);
        }
        let m = self.left_mul_k(x);
        let y = linalg::solve(self.base.k(), &m, self.k_len(), &self.to_k(&self.one))
            .ok_or(AlgebraError::NotUnit)?;
        Ok(self.from_k(&y))
    }

    // -- residue ---------------------------------------------------------------

    pub fn residue_elem(&self, x: &AlgElem) -> AlgElem {
        x.iter().map(|c| self.base.residue(c)).collect()
    }

    pub fn lift_residue_elem(&self, x: &AlgElem) -> AlgElem {
        x.iter().map(|c| self.base.lift_residue(c)).collect()
    }

    /// Structure constants reduced modulo the radical of the base.
    pub fn residue_algebra(&self) -> StructAlgebra {
        if self.base.is_residue_field() {
            return self.clone();
        }
        let rb = self.base.residue_ring();
        let table = self
            .table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.iter().map(|(k, c)| (*k, self.base.residue(c))).collect())
                    .collect()
            })
            .collect();
        let gens = self
            .gens
            .iter()
            .map(|(n, g)| (n.clone(), self.residue_elem(g)))
            .collect();
        StructAlgebra::new_unchecked(rb, self.dim, table, self.residue_elem(&self.one), gens)
            .expect("residue preserves shape")
    }

    /// The same algebra viewed over K (basis e_i·β).
    pub fn restrict_to_k(&self) -> StructAlgebra {
        let d = self.base.dim();
        if d == 1 {
            let k = Ring::field(*self.base.k());
            let conv = |e: &Elem| Elem(vec![e.0[0].clone()]);
            let table = self
                .table
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| e.iter().map(|(k, c)| (*k, conv(c))).collect())
                        .collect()
                })
                .collect();
            let one = self.one.iter().map(conv).collect();
            let gens = self
                .gens
                .iter()
                .map(|(n, g)| (n.clone(), g.iter().map(conv).collect()))
                .collect();
            return StructAlgebra::new_unchecked(k, self.dim, table, one, gens).expect("shape");
        }
        let k = Ring::field(*self.base.k());
        let n = self.k_len();
        let mut table = vec![vec![Vec::new(); n]; n];
        for (a, row) in table.iter_mut().enumerate() {
            let xa = self.k_basis(a);
            for (b, entry) in row.iter_mut().enumerate() {
                let p = self.to_k(&self.mul(&xa, &self.k_basis(b)));
                *entry = p
                    .into_iter()
                    .enumerate()
                    .filter(|(_, q)| !q.is_zero())
                    .map(|(i, q)| (i, Elem(vec![q])))
                    .collect();
            }
        }
        let wrap = |v: Vec<Q>| v.into_iter().map(|q| Elem(vec![q])).collect::<AlgElem>();
        let mut gens: Vec<(String, AlgElem)> = self
            .gens
            .iter()
            .map(|(nm, g)| (nm.clone(), wrap(self.to_k(g))))
            .collect();
        for b in 1..d {
            let s = self.from_scalar(&self.base.k_basis(b));
            gens.push((format!("β{b}"), wrap(self.to_k(&s))));
        }
        StructAlgebra::new_unchecked(k, n, table, wrap(self.to_k(&self.one)), gens).expect("shape")
    }

    // -- checks --------------------------------------------------------------

    pub fn check_unit(&self) -> Result<(), AlgebraError> {
        for i in 0..self.dim {
            let e = self.basis(i);
            if self.mul(&self.one, &e) != e || self.mul(&e, &self.one) != e {
                return Err(AlgebraError::BadUnit);
            }
        }
        Ok(())
    }

    /// Whether left-nested products of the generators (and base scalars)
    /// span the algebra; decided at the residue over K.
    pub fn gens_generate(&self) -> bool {
        if self.gens.is_empty() {
            return false;
        }
        let r = self.residue_algebra();
        let gens: Vec<AlgElem> = r.gens.iter().map(|(_, g)| g.clone()).collect();
        if r.base.k().is_rationals() && r.closure(&gens, RankTracker::modular()).rank() == r.k_len()
        {
            return true;
        }
        r.closure(&gens, RankTracker::exact(*r.base.k())).rank() == r.k_len()
    }

    /// Span over K of the words in `gens` applied to the scalars.
    fn closure(&self, gens: &[AlgElem], mut ech: RankTracker) -> RankTracker {
        let rb = &self.base;
        let target = self.k_len();
        let mut queue = Vec::new();
        for b in 0..rb.dim() {
            let v = self.from_scalar(&rb.k_basis(b));
            if ech.insert(&self.to_k(&v)) {
                queue.push(v);
            }
        }
        while let Some(v) = queue.pop() {
            if ech.rank() == target {
                break;
            }
            for g in gens {
                let w = self.mul(g, &v);
                if ech.insert(&self.to_k(&w)) {
                    queue.push(w);
                }
            }
        }
        ech
    }

    /// Exact associativity check. Uses the generator criterion when the
    /// named generators span, otherwise all basis triples.
    pub fn check_associative(&self) -> Result<(), AlgebraError> {
        self.check_unit()?;
        if self.gens_generate() {
            self.check_associative_gens()
        } else {
            self.check_associative_full()
        }
    }

    pub fn check_associative_full(&self) -> Result<(), AlgebraError> {
        let n = self.dim;
        let mut lhs = self.zero();
        let mut rhs = self.zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for c in lhs.iter_mut().chain(rhs.iter_mut()) {
                        *c = self.base.zero();
                    }
                    for (m, c) in &self.table[i][j] {
                        self.acc_sparse(&mut lhs, c, &self.table[*m][k]);
                    }
                    for (m, c) in &self.table[j][k] {
                        self.acc_sparse(&mut rhs, c, &self.table[i][*m]);
                    }
                    if lhs != rhs {
                        return Err(AlgebraError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_associative_gens(&self) -> Result<(), AlgebraError> {
        let n = self.dim;
        let mut lhs = self.zero();
        let mut rhs = self.zero();
        for (_, g) in &self.gens {
            let gl: Vec<Sparse> = (0..n)
                .map(|m| self.to_sparse(&self.mul(g, &self.basis(m))))
                .collect();
            for x in 0..n {
                for y in 0..n {
                    for c in lhs.iter_mut().chain(rhs.iter_mut()) {
                        if !c.is_zero() {
                            *c = self.base.zero();
                        }
                    }
                    for (m, c) in &gl[x] {
                        self.acc_sparse(&mut lhs, c, &self.table[*m][y]);
                    }
                    for (m, c) in &self.table[x][y] {
                        self.acc_sparse(&mut rhs, c, &gl[*m]);
                    }
                    if lhs != rhs {
                        let gi = g.iter().position(|c| !c.is_zero()).unwrap_or(0);
                        return Err(AlgebraError::NotAssociative(gi, x, y));
                    }
                }
            }
        }
        Ok(())
    }

    /// Center, as a K-subspace of the flattened algebra (for tests and the
    /// Azumaya criterion). Uses the generators when they span.
    pub fn center_dim_k(&self) -> usize {
        let k = *self.base.k();
        let n = self.k_len();
        let testers: Vec<AlgElem> = if self.gens_generate() {
            let mut t: Vec<AlgElem> = self.gens.iter().map(|(_, g)| g.clone()).collect();
            for b in 1..self.base.dim() {
                t.push(self.from_scalar(&self.base.k_basis(b)));
            }
            t
        } else {
            (0..n).map(|i| self.k_basis(i)).collect()
        };
        // incremental nullspace: basis of candidates, refined per tester
        let mut space: Vec<Vec<Q>> = (0..n)
            .map(|i| {
                let mut v = vec![Q::zero(); n];
                v[i] = Q::one();
                v
            })
            .collect();
        for t in testers {
            if space.is_empty() {
                break;
            }
            let images: Vec<Vec<Q>> = space
                .iter()
                .map(|v| {
                    let x = self.from_k(v);
                    self.to_k(&self.sub(&self.mul(&x, &t), &self.mul(&t, &x)))
                })
                .collect();
            // rows of the system = coordinates; columns = candidate basis
            let rows: linalg::Matrix = (0..n)
                .map(|r| images.iter().map(|im| im[r].clone()).collect())
                .collect();
            let null = linalg::nullspace(&k, &rows, space.len());
            space = null
                .iter()
                .map(|coef| {
                    let mut v = vec![Q::zero(); n];
                    for (c, s) in coef.iter().zip(&space) {
                        if !c.is_zero() {
                            for (vi, si) in v.iter_mut().zip(s) {
                                if !si.is_zero() {
                                    *vi = k.add(vi, &k.mul(c, si));
                                }
                            }
                        }
                    }
                    v
                })
                .collect();
        }
        space.len()
    }
}

// ---------------------------------------------------------------------------
// Constructors

fn prime_names(existing: &[(String, AlgElem)], incoming: &str) -> String {
    let mut name = incoming.to_string();
    while existing.iter().any(|(n, _)| *n == name) {
        name.push('\'');
    }
    name
}

/// (a, b)_R with basis 1, i, j, ij: i² = a, j² = b, ij = −ji.
pub fn quaternion_algebra(r: &Ring, a: &Elem, b: &Elem) -> Result<StructAlgebra, AlgebraError> {
    if !r.is_unit(a) || !r.is_unit(b) {
        return Err(AlgebraError::Ring(RingError::NotUnit));
    }
    let mut table = vec![vec![Vec::new(); 4]; 4];
    for x in 0..4usize {
        for y in 0..4usize {
            let (p1, q1, p2, q2) = (x & 1, x >> 1, y & 1, y >> 1);
            let mut c = r.one();
            if q1 & p2 == 1 {
                c = r.neg(&c);
            }
            if p1 & p2 == 1 {
                c = r.mul(&c, a);
            }
            if q1 & q2 == 1 {
                c = r.mul(&c, b);
            }
            table[x][y] = vec![((p1 ^ p2) | ((q1 ^ q2) << 1), c)];
        }
    }
    let mut alg = StructAlgebra::new_unchecked(
        r.clone(),
        4,
        table,
        vec![r.one(), r.zero(), r.zero(), r.zero()],
        vec![],
    )?;
    alg.gens = vec![("i".into(), alg.basis(1)), ("j".into(), alg.basis(2))];
    alg.check_associative()?;
    Ok(alg)
}

/// n×n matrices over R with basis E_ij at index i*n + j.
pub fn matrix_algebra(r: &Ring, n: usize) -> StructAlgebra {
    let d = n * n;
    let mut table = vec![vec![Vec::new(); d]; d];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                table[i * n + j][j * n + l] = vec![(i * n + l, r.one())];
            }
        }
    }
    let mut one = vec![r.zero(); d];
    for i in 0..n {
        one[i * n + i] = r.one();
    }
    StructAlgebra::new_unchecked(r.clone(), d, table, one, vec![]).expect("shape")
}

/// R as a rank-one algebra over itself.
pub fn scalar_algebra(r: &Ring) -> StructAlgebra {
    StructAlgebra::new_unchecked(
        r.clone(),
        1,
        vec![vec![vec![(0, r.one())]]],
        vec![r.one()],
        vec![],
    )
    .expect("shape")
}

/// A multiquadratic ring S as a free algebra over its base layer, with
/// generators named x1, x2, ... (just `x` for a single square root).
pub fn ring_as_algebra(s: &Ring) -> Result<StructAlgebra, AlgebraError> {
    let base = s
        .base()
        .ok_or_else(|| AlgebraError::Shape("not a multiquadratic ring".into()))?
        .clone();
    let rad = s.radicands();
    let d = 1usize << rad.len();
    let mut table = vec![vec![Vec::new(); d]; d];
    for (a, row) in table.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            let mut c = base.one();
            for (i, r) in rad.iter().enumerate() {
                if (a & b) >> i & 1 == 1 {
                    c = base.mul(&c, r);
                }
            }
            *entry = vec![(a ^ b, c)];
        }
    }
    let mut one = vec![base.zero(); d];
    one[0] = base.one();
    let mut alg = StructAlgebra::new_unchecked(base, d, table, one, vec![])?;
    alg.gens = (0..rad.len())
        .map(|i| {
            (
                if rad.len() == 1 {
                    "x".to_string()
                } else {
                    format!("x{}", i + 1)
                },
                alg.basis(1 << i),
            )
        })
        .collect();
    Ok(alg)
}

/// A ⊗_R B with basis a_i ⊗ b_j at index i * dim B + j. Associativity is
/// inherited from the factors and not rechecked.
pub fn tensor(a: &StructAlgebra, b: &StructAlgebra) -> Result<StructAlgebra, AlgebraError> {
    if a.base != b.base {
        return Err(AlgebraError::BaseMismatch);
    }
    let r = &a.base;
    let (n, m) = (a.dim, b.dim);
    let mut table = vec![vec![Vec::new(); n * m]; n * m];
    for i in 0..n {
        for k in 0..n {
            let ta = &a.table[i][k];
            if ta.is_empty() {
                continue;
            }
            for j in 0..m {
                for l in 0..m {
                    let tb = &b.table[j][l];
                    if tb.is_empty() {
                        continue;
                    }
                    let mut acc: HashMap<usize, Elem> = HashMap::new();
                    for (p, c) in ta {
                        for (q, d) in tb {
                            let e = acc.entry(p * m + q).or_insert_with(|| r.zero());
                            r.mul_acc(e, c, d);
                        }
                    }
                    let mut v: Sparse = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                    v.sort_by_key(|x| x.0);
                    table[i * m + j][k * m + l] = v;
                }
            }
        }
    }
    let kron = |x: &AlgElem, y: &AlgElem| -> AlgElem {
        let mut v = Vec::with_capacity(n * m);
        for xi in x {
            for yj in y {
                v.push(r.mul(xi, yj));
            }
        }
        v
    };
    let one = kron(&a.one, &b.one);
    let mut gens: Vec<(String, AlgElem)> = a
        .gens
        .iter()
        .map(|(nm, g)| (nm.clone(), kron(g, &b.one)))
        .collect();
    for (nm, g) in &b.gens {
        let name = prime_names(&gens, nm);
        gens.push((name, kron(&a.one, g)));
    }
    StructAlgebra::new_unchecked(r.clone(), n * m, table, one, gens)
}

/// Product in A ⊗_R B computed factor by factor, for elements in the
/// layout of [`tensor`], without materialising the product table.
pub fn tensor_mul(a: &StructAlgebra, b: &StructAlgebra, x: &AlgElem, y: &AlgElem) -> AlgElem {
    let r = &a.base;
    let m = b.dim;
    let nz = |v: &AlgElem| -> Vec<usize> { (0..v.len()).filter(|&i| !v[i].is_zero()).collect() };
    let (xs, ys) = (nz(x), nz(y));
    let mut out = vec![r.zero(); a.dim * m];
    for &u in &xs {
        let (i, j) = (u / m, u % m);
        for &v in &ys {
            let (k, l) = (v / m, v % m);
            let (ta, tb) = (&a.table[i][k], &b.table[j][l]);
            if ta.is_empty() || tb.is_empty() {
                continue;
            }
            let xy = r.mul(&x[u], &y[v]);
            for (q, d) in tb {
                let xyd = r.mul(&xy, d);
                for (p, c) in ta {
                    r.mul_acc(&mut out[p * m + q], &xyd, c);
                }
            }
        }
    }
    out
}

/// Opposite algebra: x ∘ y = y x.
pub fn opposite(a: &StructAlgebra) -> StructAlgebra {
    let n = a.dim;
    let table = (0..n)
        .map(|i| (0..n).map(|j| a.table[j][i].clone()).collect())
        .collect();
    StructAlgebra {
        base: a.base.clone(),
        dim: n,
        table,
        one: a.one.clone(),
        gens: a.gens.clone(),
    }
}

/// σ-twist B ⊗_σ S: structure constants pushed through the Galois element.
pub fn galois_twist(b: &StructAlgebra, sigma: u32) -> StructAlgebra {
    let r = &b.base;
    let tw = |x: &AlgElem| -> AlgElem { x.iter().map(|c| r.galois(sigma, c)).collect() };
    let table = b
        .table
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| e.iter().map(|(k, c)| (*k, r.galois(sigma, c))).collect())
                .collect()
        })
        .collect();
    StructAlgebra {
        base: r.clone(),
        dim: b.dim,
        table,
        one: tw(&b.one),
        gens: b.gens.iter().map(|(n, g)| (n.clone(), tw(g))).collect(),
    }
}

/// Functorial residue: structure constants reduced modulo the radical.
pub fn residue_algebra(a: &StructAlgebra) -> StructAlgebra {
    a.residue_algebra()
}

// ---------------------------------------------------------------------------
// Maps

/// A (possibly σ-semilinear) ring map given by images of the source basis.
#[derive(Debug, Clone)]
pub struct AlgebraMap {
    pub images: Vec<AlgElem>,
    /// Galois mask applied to source scalars (`0` for a linear map).
    pub twist: u32,
}

impl AlgebraMap {
    pub fn linear(images: Vec<AlgElem>) -> AlgebraMap {
        AlgebraMap { images, twist: 0 }
    }

    pub fn apply(&self, source: &StructAlgebra, target: &StructAlgebra, x: &AlgElem) -> AlgElem {
        let r = target.base();
        let mut out = target.zero();
        for (i, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = if self.twist != 0 {
                source.base().galois(self.twist, c)
            } else {
                c.clone()
            };
            for (o, im) in out.iter_mut().zip(&self.images[i]) {
                if !im.is_zero() {
                    r.mul_acc(o, &c, im);
                }
            }
        }
        out
    }

    /// Exact check: f(1) = 1 and f(e_i e_j) = f(e_i) f(e_j) for all basis
    /// pairs. Semilinearity holds by construction of `apply`.
    pub fn check_multiplicative(
        &self,
        source: &StructAlgebra,
        target: &StructAlgebra,
    ) -> Result<(), AlgebraError> {
        if self.images.len() != source.dim() {
            return Err(AlgebraError::MapCheck("wrong number of images".into()));
        }
        if self.apply(source, target, &source.one()) != target.one() {
            return Err(AlgebraError::MapCheck("unit not preserved".into()));
        }
        for i in 0..source.dim() {
            for j in 0..source.dim() {
                let lhs = target.mul(&self.images[i], &self.images[j]);
                let mut prod = source.zero();
                source.acc_sparse(&mut prod, &source.base().one(), &source.table[i][j]);
                let rhs = self.apply(source, target, &prod);
                if lhs != rhs {
                    return Err(AlgebraError::MapCheck(format!(
                        "f(e{i} e{j}) ≠ f(e{i}) f(e{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks σ-semilinearity f(s x) = σ(s) f(x) for every K-basis scalar s
    /// of the base and every basis element x.
    pub fn check_semilinear(
        &self,
        source: &StructAlgebra,
        target: &StructAlgebra,
    ) -> Result<(), AlgebraError> {
        let r = source.base();
        for b in 0..r.dim() {
            let s = r.k_basis(b);
            for i in 0..source.dim() {
                let x = source.scale(&s, &source.basis(i));
                let lhs = self.apply(source, target, &x);
                let rhs = target.scale(&r.galois(self.twist, &s), &self.images[i]);
                if lhs != rhs {
                    return Err(AlgebraError::MapCheck(format!(
                        "semilinearity fails at basis {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl StructAlgebra {
    /// Replaces the generators by a small generating set drawn greedily
    /// from the basis (decided at the residue), so that the generator
    /// associativity criterion applies.
    pub fn with_auto_gens(mut self) -> StructAlgebra {
        let r = self.residue_algebra();
        let k = *r.base.k();
        let choose = |fresh: &dyn Fn() -> RankTracker| -> Option<Vec<usize>> {
            let mut chosen: Vec<usize> = Vec::new();
            let mut ech = r.closure(&[], fresh());
            for i in 0..self.dim {
                if ech.rank() == r.k_len() {
                    return Some(chosen);
                }
                if ech.contains(&r.to_k(&r.basis(i))) {
                    continue;
                }
                chosen.push(i);
                let gens: Vec<AlgElem> = chosen.iter().map(|&c| r.basis(c)).collect();
                ech = r.closure(&gens, fresh());
            }
            (ech.rank() == r.k_len()).then_some(chosen)
        };
        let chosen = k
            .is_rationals()
            .then(|| choose(&RankTracker::modular))
            .flatten()
            .or_else(|| choose(&|| RankTracker::exact(k)))
            .unwrap_or_default();
        self.gens = chosen
            .iter()
            .map(|&c| (format!("e{c}"), self.basis(c)))
            .collect();
        self
    }
}

/// Coordinates of x ⊗ y in a tensor product (Kronecker layout).
pub fn kron(r: &Ring, x: &AlgElem, y: &AlgElem) -> AlgElem {
    let mut v = Vec::with_capacity(x.len() * y.len());
    for xi in x {
        for yj in y {
            v.push(if xi.is_zero() || yj.is_zero() {
                r.zero()
            } else {
                r.mul(xi, yj)
            });
        }
    }
    v
}

/// The isomorphism (a, b) → (b, a): i ↦ J, j ↦ I, so ij ↦ −IJ.
pub fn quaternion_swap_map(q_ba: &StructAlgebra) -> AlgebraMap {
    let r = q_ba.base();
    let mut ij = q_ba.basis(3);
    ij[3] = r.neg(&r.one());
    AlgebraMap::linear(vec![q_ba.basis(0), q_ba.basis(2), q_ba.basis(1), ij])
}

/// The isomorphism (a, N(γ)b) → (a, b) given by i ↦ i, j ↦ γ̃ j where
/// γ = g₀ + g₁√a and γ̃ = g₀ + g₁ i.
pub fn quaternion_norm_map(q_ab: &StructAlgebra, g0: &Elem, g1: &Elem) -> AlgebraMap {
    let i = q_ab.basis(1);
    let gt = q_ab.add(&q_ab.from_scalar(g0), &q_ab.scale(g1, &i));
    let jn = q_ab.mul(&gt, &q_ab.basis(2));
    let ijn = q_ab.mul(&i, &jn);
    AlgebraMap::linear(vec![q_ab.one(), i, jn, ijn])
}

#[cfg(test)]
mod tests;
