//! The ring tower: the base field K, the truncated local ring
//! T = K[ε]/(ε^N), and multiquadratic extensions R[x_1..x_s]/(x_i^2 - b_i).
//!
//! Every ring in the tower is a finite free K-algebra and elements are
//! stored as dense coordinate vectors over K. Multiquadratic coordinates are
//! subset-major: the coefficient of `x^A * β_i` (A a subset of the
//! generators, β_i the i-th basis element of the base ring) sits at
//! `A * base_dim + i`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::field::BaseField;
use crate::linalg;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Elem(pub Vec<Q>);

impl Elem {
    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Q::is_zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("truncation order must be at least 1")]
    BadTruncation,
    #[error("element is not a unit: residue is not invertible")]
    NotUnit,
    #[error("{0}")]
    Mismatch(String),
    #[error("no unit s with z = s/σ(s) found after {0} attempts")]
    Degenerate(usize),
    #[error("Hilbert 90 precondition violated: z·σ(z) ≠ 1")]
    NormNotOne,
}

#[derive(Debug)]
pub enum RingKind {
    Field,
    Truncated { n: usize },
    MultiQuad { base: Ring, radicands: Vec<Elem> },
}

#[derive(Debug)]
struct RingInner {
    field: BaseField,
    dim: usize,
    kind: RingKind,
    residue: Option<Ring>,
    /// K-structure constants of multiquadratic rings, indexed `i * dim + j`.
    table: Vec<Vec<(usize, Q)>>,
}

/// Handle to a ring of the tower; cheap to clone and share.
#[derive(Clone)]
pub struct Ring(Arc<RingInner>);

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.field != other.0.field || self.0.dim != other.0.dim {
            return false;
        }
        match (&self.0.kind, &other.0.kind) {
            (RingKind::Field, RingKind::Field) => true,
            (RingKind::Truncated { n: a }, RingKind::Truncated { n: b }) => a == b,
            (
                RingKind::MultiQuad {
                    base: b1,
                    radicands: r1,
                },
                RingKind::MultiQuad {
                    base: b2,
                    radicands: r2,
                },
            ) => b1 == b2 && r1 == r2,
            _ => false,
        }
    }
}

impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            RingKind::Field => write!(f, "{}", self.0.field),
            RingKind::Truncated { n } => write!(f, "{}[ε]/(ε^{n})", self.0.field),
            RingKind::MultiQuad { base, radicands } => {
                write!(f, "({base})(")?;
                for (i, r) in radicands.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "√{:?}", r.0)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Ring {
    pub fn field(k: BaseField) -> Ring {
        Ring(Arc::new(RingInner {
            field: k,
            dim: 1,
            kind: RingKind::Field,
            residue: None,
            table: Vec::new(),
        }))
    }

    /// T = K[ε]/(ε^n); n = 1 gives K itself (as a truncated ring).
    pub fn truncated(k: BaseField, n: usize) -> Result<Ring, RingError> {
        if n < 1 {
            return Err(RingError::BadTruncation);
        }
        Ok(Ring(Arc::new(RingInner {
            field: k,
            dim: n,
            kind: RingKind::Truncated { n },
            residue: Some(Ring::field(k)),
            table: Vec::new(),
        })))
    }

    /// R(b_1^{1/2}, ..., b_s^{1/2}); squares are allowed as radicands.
    pub fn adjoin_sqrts(base: &Ring, radicands: &[Elem]) -> Result<Ring, RingError> {
        for b in radicands {
            base.check(b)?;
            if !base.is_unit(b) {
                return Err(RingError::NotUnit);
            }
        }
        let residue = if base.is_residue_field() {
            None
        } else {
            let rb = base.residue_ring();
            let rr: Vec<Elem> = radicands.iter().map(|b| base.residue(b)).collect();
            Some(Ring::adjoin_sqrts(&rb, &rr)?)
        };
        let dim = base.dim() << radicands.len();
        let kind = RingKind::MultiQuad {
            base: base.clone(),
            radicands: radicands.to_vec(),
        };
        let mut table = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut out = Elem(vec![Q::zero(); dim]);
                let unit = |n| {
                    let mut v = vec![Q::zero(); dim];
                    v[n] = Q::one();
                    Elem(v)
                };
                multiquad_mul_acc(base.k(), &kind, &mut out, &unit(i), &unit(j));
                table.push(
                    out.0
                        .into_iter()
                        .enumerate()
                        .filter(|(_, q)| !q.is_zero())
                        .collect(),
                );
            }
        }
        Ok(Ring(Arc::new(RingInner {
            field: base.0.field,
            dim,
            kind,
            residue,
            table,
        })))
    }

    pub fn k(&self) -> &BaseField {
        &self.0.field
    }

    /// Dimension over K.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn kind(&self) -> &RingKind {
        &self.0.kind
    }

    /// The ring the outermost quadratic layer is built on, if any.
    pub fn base(&self) -> Option<&Ring> {
        match &self.0.kind {
            RingKind::MultiQuad { base, .. } => Some(base),
            _ => None,
        }
    }

    pub fn radicands(&self) -> &[Elem] {
        match &self.0.kind {
            RingKind::MultiQuad { radicands, .. } => radicands,
            _ => &[],
        }
    }

    pub fn num_sqrts(&self) -> usize {
        self.radicands().len()
    }

    /// Truncation order of the local layer (1 when the tower has none).
    pub fn truncation(&self) -> usize {
        match &self.0.kind {
            RingKind::Field => 1,
            RingKind::Truncated { n } => *n,
            RingKind::MultiQuad { base, .. } => base.truncation(),
        }
    }

    /// True when this ring has no nilpotent layer, i.e. it equals its residue ring.
    pub fn is_residue_field(&self) -> bool {
        self.0.residue.is_none()
    }

    pub fn is_field_k(&self) -> bool {
        matches!(self.0.kind, RingKind::Field)
    }

    pub fn residue_ring(&self) -> Ring {
        self.0.residue.clone().unwrap_or_else(|| self.clone())
    }

    fn check(&self, x: &Elem) -> Result<(), RingError> {
        if x.0.len() != self.dim() {
            return Err(RingError::Mismatch(format!(
                "element of length {} used in ring of dimension {}",
                x.0.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn zero(&self) -> Elem {
        Elem(vec![Q::zero(); self.dim()])
    }

    pub fn one(&self) -> Elem {
        self.from_q(&Q::one())
    }

    pub fn from_q(&self, q: &Q) -> Elem {
        let mut v = vec![Q::zero(); self.dim()];
        v[0] = q.clone();
        Elem(v)
    }

    pub fn from_i64(&self, n: i64) -> Elem {
        self.from_q(&self.k().from_i64(n))
    }

    /// The K-basis element with index `i`.
    pub fn k_basis(&self, i: usize) -> Elem {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        Elem(v)
    }

    /// ε in T (zero when N = 1).
    pub fn eps(&self) -> Elem {
        match &self.0.kind {
            RingKind::Truncated { n } if *n > 1 => self.k_basis(1),
            RingKind::Truncated { .. } => self.zero(),
            RingKind::MultiQuad { base, .. } => self.embed(&base.eps()),
            RingKind::Field => self.zero(),
        }
    }

    /// The square root generator x_i of the outer layer.
    pub fn sqrt_gen(&self, i: usize) -> Elem {
        let bd = self.base().expect("not a multiquadratic ring").dim();
        self.k_basis((1 << i) * bd)
    }

    /// Embeds an element of the base layer.
    pub fn embed(&self, b: &Elem) -> Elem {
        let mut v = b.0.clone();
        v.resize(self.dim(), Q::zero());
        Elem(v)
    }

    /// Coefficients over the base layer, one per subset of generators.
    pub fn base_coords(&self, x: &Elem) -> Vec<Elem> {
        let bd = self.base().expect("not a multiquadratic ring").dim();
        x.0.chunks(bd).map(|c| Elem(c.to_vec())).collect()
    }

    pub fn from_base_coords(&self, parts: &[Elem]) -> Elem {
        Elem(parts.iter().flat_map(|p| p.0.iter().cloned()).collect())
    }

    /// Returns the base-layer element if `x` lies in the base.
    pub fn base_part(&self, x: &Elem) -> Option<Elem> {
        let bd = self.base()?.dim();
        if x.0[bd..].iter().all(Q::is_zero) {
            Some(Elem(x.0[..bd].to_vec()))
        } else {
            None
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let k = self.k();
        Elem(a.0.iter().zip(&b.0).map(|(x, y)| k.add(x, y)).collect())
    }

    pub fn add_assign(&self, a: &mut Elem, b: &Elem) {
        let k = self.k();
        for (x, y) in a.0.iter_mut().zip(&b.0) {
            if !y.is_zero() {
                *x = k.add(x, y);
            }
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let k = self.k();
        Elem(a.0.iter().zip(&b.0).map(|(x, y)| k.sub(x, y)).collect())
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        let k = self.k();
        Elem(a.0.iter().map(|x| k.neg(x)).collect())
    }

    pub fn scale(&self, q: &Q, a: &Elem) -> Elem {
        let k = self.k();
        Elem(a.0.iter().map(|x| k.mul(q, x)).collect())
    }

    pub fn is_one(&self, a: &Elem) -> bool {
        a.0[0].is_one() && a.0[1..].iter().all(Q::is_zero)
    }

    /// Scalar in K, if `a` is one.
    pub fn as_k(&self, a: &Elem) -> Option<Q> {
        if a.0[1..].iter().all(Q::is_zero) {
            Some(a.0[0].clone())
        } else {
            None
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = self.zero();
        self.mul_acc(&mut out, a, b);
        out
    }

    /// `acc += a * b`.
    pub fn mul_acc(&self, acc: &mut Elem, a: &Elem, b: &Elem) {
        let k = self.k();
        match &self.0.kind {
            RingKind::Field => {
                if !a.0[0].is_zero() && !b.0[0].is_zero() {
                    acc.0[0] = k.add_mul(&acc.0[0], &a.0[0], &b.0[0]);
                }
            }
            RingKind::Truncated { n } => {
                for i in 0..*n {
                    if a.0[i].is_zero() {
                        continue;
                    }
                    for j in 0..n - i {
                        if !b.0[j].is_zero() {
                            acc.0[i + j] = k.add_mul(&acc.0[i + j], &a.0[i], &b.0[j]);
                        }
                    }
                }
            }
            RingKind::MultiQuad { .. } => {
                let d = self.0.dim;
                for (i, x) in a.0.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let row = &self.0.table[i * d..(i + 1) * d];
                    for (y, entries) in b.0.iter().zip(row) {
                        if y.is_zero() {
                            continue;
                        }
                        let xy = k.mul(x, y);
                        for (m, g) in entries {
                            acc.0[*m] = k.add_mul(&acc.0[*m], &xy, g);
                        }
                    }
                }
            }
        }
    }

    pub fn pow(&self, a: &Elem, e: u32) -> Elem {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    /// K-matrix of multiplication by `a` (column j = a·β_j).
    pub fn mul_matrix(&self, a: &Elem) -> linalg::Matrix {
        let d = self.dim();
        let cols: Vec<Elem> = (0..d).map(|j| self.mul(a, &self.k_basis(j))).collect();
        (0..d)
            .map(|i| (0..d).map(|j| cols[j].0[i].clone()).collect())
            .collect()
    }

    /// Reduction modulo the Jacobson radical (ε ↦ 0).
    pub fn residue(&self, x: &Elem) -> Elem {
        match &self.0.kind {
            RingKind::Field => x.clone(),
            RingKind::Truncated { .. } => Elem(vec![x.0[0].clone()]),
            RingKind::MultiQuad { base, .. } => {
                if self.is_residue_field() {
                    return x.clone();
                }
                Elem(
                    self.base_coords(x)
                        .iter()
                        .flat_map(|p| base.residue(p).0)
                        .collect(),
                )
            }
        }
    }

    /// Coefficientwise preimage of a residue element (nilpotent parts zero).
    pub fn lift_residue(&self, x: &Elem) -> Elem {
        match &self.0.kind {
            RingKind::Field => x.clone(),
            RingKind::Truncated { .. } => self.from_q(&x.0[0]),
            RingKind::MultiQuad { base, .. } => {
                if self.is_residue_field() {
                    return x.clone();
                }
                let rb = base.residue_ring().dim();
                let parts: Vec<Elem> =
                    x.0.chunks(rb)
                        .map(|c| base.lift_residue(&Elem(c.to_vec())))
                        .collect();
                self.from_base_coords(&parts)
            }
        }
    }

    pub fn is_unit(&self, x: &Elem) -> bool {
        match &self.0.kind {
            RingKind::Field => !x.0[0].is_zero(),
            RingKind::Truncated { .. } => !x.0[0].is_zero(),
            RingKind::MultiQuad { base, radicands } => {
                if radicands.len() == 1 {
                    return base.is_unit(&self.norm(x));
                }
                let r = self.residue_ring();
                let xr = self.residue(x);
                linalg::rank(r.k(), &r.mul_matrix(&xr)) == r.dim()
            }
        }
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem, RingError> {
        self.check(x)?;
        if !self.is_unit(x) {
            return Err(RingError::NotUnit);
        }
        let k = self.k();
        match &self.0.kind {
            RingKind::Field => Ok(Elem(vec![k.inv(&x.0[0])])),
            RingKind::Truncated { n } => {
                // x = x0 (1 + m) with m nilpotent; 1/(1+m) = Σ (-m)^i
                let x0inv = k.inv(&x.0[0]);
                let mut m = self.scale(&x0inv, x);
                m.0[0] = Q::zero();
                let neg_m = self.neg(&m);
                let mut term = self.one();
                let mut sum = self.one();
                for _ in 1..*n {
                    term = self.mul(&term, &neg_m);
                    self.add_assign(&mut sum, &term);
                }
                Ok(self.scale(&x0inv, &sum))
            }
            RingKind::MultiQuad { base, radicands } => {
                if radicands.len() == 1 {
                    let n = base.inv(&self.norm(x))?;
                    return Ok(self.mul(&self.galois(1, x), &self.embed(&n)));
                }
                let m = self.mul_matrix(x);
                let y =
                    linalg::solve(k, &m, self.dim(), &self.one().0).ok_or(RingError::NotUnit)?;
                Ok(Elem(y))
            }
        }
    }

    /// Applies the Galois element given by a bit mask of flipped generators.
    pub fn galois(&self, mask: u32, x: &Elem) -> Elem {
        let bd = match self.base() {
            Some(b) => b.dim(),
            None => return x.clone(),
        };
        let k = self.k();
        Elem(
            x.0.iter()
                .enumerate()
                .map(|(i, q)| {
                    let subset = (i / bd) as u32;
                    if (subset & mask).count_ones() % 2 == 1 {
                        k.neg(q)
                    } else {
                        q.clone()
                    }
                })
                .collect(),
        )
    }

    /// Norm x·σ(x) of a quadratic layer, as an element of the base.
    pub fn norm(&self, x: &Elem) -> Elem {
        assert_eq!(
            self.num_sqrts(),
            1,
            "norm is defined for quadratic layers; compose for more"
        );
        let p = self.mul(x, &self.galois(1, x));
        self.base_part(&p).expect("norm lies in the base")
    }

    /// Constructive Hilbert 90: for z with z·σ(z) = 1 returns a unit s with
    /// z·σ(s) = s. Tries w = 1, x, 1 + x, then seeded random w.
    pub fn hilbert90(&self, z: &Elem, seed: u64) -> Result<Elem, RingError> {
        const ATTEMPTS: usize = 32;
        if !self.is_one(&self.mul(z, &self.galois(1, z))) {
            return Err(RingError::NormNotOne);
        }
        let x = self.sqrt_gen(0);
        let mut candidates = vec![self.one(), x.clone(), self.add(&self.one(), &x)];
        let mut rng = crate::seeded_rng(seed);
        while candidates.len() < ATTEMPTS {
            candidates.push(self.random_elem(&mut rng, 20));
        }
        for w in candidates {
            let s = self.add(&w, &self.mul(z, &self.galois(1, &w)));
            if self.is_unit(&s) {
                debug_assert_eq!(self.mul(z, &self.galois(1, &s)), s);
                return Ok(s);
            }
        }
        Err(RingError::Degenerate(ATTEMPTS))
    }

    /// Random element with integer coordinates of absolute value ≤ height
    /// (reduced into the field for prime fields).
    pub fn random_elem<R: Rng>(&self, rng: &mut R, height: i64) -> Elem {
        let k = *self.k();
        Elem(
            (0..self.dim())
                .map(|_| k.from_i64(rng.gen_range(-height..=height)))
                .collect(),
        )
    }

    /// Random unit: resamples until the residue is invertible.
    pub fn random_unit<R: Rng>(&self, rng: &mut R, height: i64) -> Elem {
        loop {
            let x = self.random_elem(rng, height);
            if self.is_unit(&x) {
                return x;
            }
        }
    }
}

fn multiquad_mul_acc(k: &BaseField, kind: &RingKind, acc: &mut Elem, a: &Elem, b: &Elem) {
    let RingKind::MultiQuad { base, radicands } = kind else {
        unreachable!()
    };
    let bd = base.dim();
    let subsets = 1usize << radicands.len();
    let pa: Vec<Elem> = (0..subsets)
        .map(|s| Elem(a.0[s * bd..(s + 1) * bd].to_vec()))
        .collect();
    let pb: Vec<Elem> = (0..subsets)
        .map(|s| Elem(b.0[s * bd..(s + 1) * bd].to_vec()))
        .collect();
    let mut parts: Vec<Elem> = (0..subsets).map(|_| base.zero()).collect();
    for (s, x) in pa.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (t, y) in pb.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let common = s & t;
            if common == 0 {
                base.mul_acc(&mut parts[s ^ t], x, y);
            } else {
                let mut c = base.mul(x, y);
                for (i, r) in radicands.iter().enumerate() {
                    if common >> i & 1 == 1 {
                        c = base.mul(&c, r);
                    }
                }
                base.add_assign(&mut parts[s ^ t], &c);
            }
        }
    }
    for (s, p) in parts.into_iter().enumerate() {
        for (i, q) in p.0.into_iter().enumerate() {
            if !q.is_zero() {
                let idx = s * bd + i;
                acc.0[idx] = k.add(&acc.0[idx], &q);
            }
        }
    }
}
