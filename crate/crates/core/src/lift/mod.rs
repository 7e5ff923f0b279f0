//! Lifting a presented degree-8, order-2 algebra from K to T = K[ε]/(ε^N).
//!
//! A scenario fixes a₁ (a non-square of K, L = K(√a₁)), x₂, x₃ ∈ L*,
//! a₂, a₃ ∈ K* with (a₂, N x₂) + (a₃, N x₃) split, and a twist slot d.
//! Witnesses y, μ₂, μ₃, μ₂₃ satisfy a₂y = N(μ₂), a₃y = N(μ₃), y = N(μ₂₃).
//! The lift perturbs a₁, xₖ, μ's by ε·seed, derives y′ and aₖ′ from the norm
//! relations, and builds B′, α, c, A′, A″ = A′ ⊗ (a₁′, d′), e and D′ = eA″e.

use std::fmt;

use crate::algebra::{
    self, crossed_product_unchecked, find_semilinear_iso, is_azumaya, kron, quaternion_algebra,
    skolem_noether_c, tensor_mul, AlgElem, AlgebraError, AlgebraMap, BiquaternionWitnessSplitter,
    FreeSpan, StructAlgebra,
};
use crate::arith::SquareClass;
use crate::field::BaseField;
use crate::rational::Q;
use crate::rings::{Elem, Ring, RingError};
use crate::symbols::{self, class_of, cor_rewrite, SymbolClass, SymbolError, SymbolPair};

/// Degree of the lifted algebra.
pub const DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("validation failed: {0}")]
    Validation(ValidationFailure),
    #[error("witness search failed: {0}")]
    WitnessSearchFailed(String),
    #[error("witness relation fails: {0}")]
    BadWitness(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("post-check failed: {0}")]
    CheckFailed(String),
}

impl LiftError {
    /// Whether the failure comes from a bounded search running out.
    pub fn is_search_exhausted(&self) -> bool {
        matches!(
            self,
            LiftError::WitnessSearchFailed(_)
                | LiftError::Algebra(AlgebraError::SearchExhausted(_))
                | LiftError::Symbol(SymbolError::SearchExhausted(..))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationFailure {
    BadTruncation,
    NonSquareSlot,
    ZeroEntry(&'static str),
    NotUnit(&'static str),
    CorestrictionNontrivial(String),
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::BadTruncation => write!(f, "BadTruncation: N must be at least 1"),
            ValidationFailure::NonSquareSlot => write!(f, "NonSquareSlot: a1 is a square in K"),
            ValidationFailure::ZeroEntry(n) => write!(f, "ZeroEntry: {n} is zero"),
            ValidationFailure::NotUnit(n) => write!(f, "NotUnit: {n} is not a unit of L"),
            ValidationFailure::CorestrictionNontrivial(r) => {
                write!(f, "CorestrictionNontrivial: ramified at {r}")
            }
        }
    }
}

/// Perturbation coefficients: primed data are originals plus ε·seed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Seeds {
    pub a1: Q,
    pub x2: (Q, Q),
    pub x3: (Q, Q),
    pub mu2: (Q, Q),
    pub mu3: (Q, Q),
    pub mu23: (Q, Q),
    pub d: Q,
}

impl Seeds {
    pub fn is_zero(&self) -> bool {
        *self == Seeds::default()
    }

    /// All coefficients equal to `v`.
    pub fn constant(v: i64) -> Seeds {
        let q = Q::from_i64(v);
        let p = (q.clone(), q.clone());
        Seeds {
            a1: q.clone(),
            x2: p.clone(),
            x3: p.clone(),
            mu2: p.clone(),
            mu3: p.clone(),
            mu23: p,
            d: q,
        }
    }

    pub fn random(rng: &mut crate::SearchRng, height: i64) -> Seeds {
        use rand::Rng;
        let mut draw = || loop {
            let v = rng.gen_range(-height..=height);
            if v != 0 {
                return Q::from_i64(v);
            }
        };
        Seeds {
            a1: draw(),
            x2: (draw(), draw()),
            x3: (draw(), draw()),
            mu2: (draw(), draw()),
            mu3: (draw(), draw()),
            mu23: (draw(), draw()),
            d: draw(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftScenario {
    pub field: BaseField,
    pub trunc: usize,
    pub a1: Q,
    pub a2: Q,
    pub a3: Q,
    /// x₂ = u + v√a₁ as (u, v).
    pub x2: (Q, Q),
    pub x3: (Q, Q),
    pub d: Q,
    pub seeds: Seeds,
    pub rng_seed: u64,
}

impl LiftScenario {
    /// K = ℚ, a₁ = 2, x₂ = 1 + √2, x₃ = √2, a₂ = a₃ = −1, d = 1.
    pub fn example_w(trunc: usize) -> LiftScenario {
        let q = Q::from_i64;
        LiftScenario {
            field: BaseField::Rationals,
            trunc,
            a1: q(2),
            a2: q(-1),
            a3: q(-1),
            x2: (q(1), q(1)),
            x3: (q(0), q(1)),
            d: q(1),
            seeds: Seeds::default(),
            rng_seed: 0,
        }
    }

    /// Reduces every entry into the field (relevant for prime fields).
    fn normalized(&self) -> Result<LiftScenario, LiftError> {
        let k = self.field;
        let f = |x: &Q| {
            k.from_q(x)
                .map_err(|_| LiftError::Validation(ValidationFailure::ZeroEntry("denominator")))
        };
        let p = |x: &(Q, Q)| -> Result<(Q, Q), LiftError> { Ok((f(&x.0)?, f(&x.1)?)) };
        let s = &self.seeds;
        Ok(LiftScenario {
            field: k,
            trunc: self.trunc,
            a1: f(&self.a1)?,
            a2: f(&self.a2)?,
            a3: f(&self.a3)?,
            x2: p(&self.x2)?,
            x3: p(&self.x3)?,
            d: f(&self.d)?,
            seeds: Seeds {
                a1: f(&s.a1)?,
                x2: p(&s.x2)?,
                x3: p(&s.x3)?,
                mu2: p(&s.mu2)?,
                mu3: p(&s.mu3)?,
                mu23: p(&s.mu23)?,
                d: f(&s.d)?,
            },
            rng_seed: self.rng_seed,
        })
    }

    /// The same presentation with N = 1 and zero seeds (the object over K).
    pub fn residue_scenario(&self) -> LiftScenario {
        LiftScenario {
            trunc: 1,
            seeds: Seeds::default(),
            ..self.clone()
        }
    }

    /// L = K(√a₁).
    pub fn l_field(&self) -> Result<Ring, LiftError> {
        let k = Ring::field(self.field);
        Ok(Ring::adjoin_sqrts(&k, &[k.from_q(&self.a1)])?)
    }

    fn l_elem(&self, l: &Ring, x: &(Q, Q)) -> Elem {
        let k = Ring::field(self.field);
        l.from_base_coords(&[k.from_q(&x.0), k.from_q(&x.1)])
    }

    /// N_L(x₂), N_L(x₃) in K.
    pub fn norms(&self) -> Result<(Q, Q), LiftError> {
        let l = self.l_field()?;
        let n = |x: &(Q, Q)| l.norm(&self.l_elem(&l, x)).0[0].clone();
        Ok((n(&self.x2), n(&self.x3)))
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let line = format!("{:<4} {:<40} {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
            writeln!(f, "{}", line.trim_end())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub report: Report,
    pub failure: Option<ValidationFailure>,
    /// Ramification set of the corestriction class (over ℚ only).
    pub corestriction: Option<SymbolClass>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn validate_scenario(sc: &LiftScenario) -> ValidationReport {
    let mut report = Report::default();
    let mut failure = None;
    let fail = |f: ValidationFailure, failure: &mut Option<ValidationFailure>| {
        if failure.is_none() {
            *failure = Some(f);
        }
    };
    report.push("truncation", sc.trunc >= 1, format!("N = {}", sc.trunc));
    if sc.trunc < 1 {
        fail(ValidationFailure::BadTruncation, &mut failure);
    }
    let sc = match sc.normalized() {
        Ok(s) => s,
        Err(_) => {
            report.push(
                "entries",
                false,
                "an entry has a denominator divisible by p",
            );
            return ValidationReport {
                report,
                failure: Some(ValidationFailure::ZeroEntry("denominator")),
                corestriction: None,
            };
        }
    };
    for (name, v) in [("a1", &sc.a1), ("a2", &sc.a2), ("a3", &sc.a3), ("d", &sc.d)] {
        if v.is_zero() {
            report.push(name, false, "zero");
            fail(ValidationFailure::ZeroEntry(name), &mut failure);
        }
    }
    if failure.is_some() {
        return ValidationReport {
            report,
            failure,
            corestriction: None,
        };
    }
    let nonsquare = !sc.field.is_square(&sc.a1);
    report.push("a1 non-square", nonsquare, format!("a1 = {}", sc.a1));
    if !nonsquare {
        fail(ValidationFailure::NonSquareSlot, &mut failure);
        return ValidationReport {
            report,
            failure,
            corestriction: None,
        };
    }
    let (n2, n3) = sc.norms().expect("L is a field");
    for (name, n) in [("x2", &n2), ("x3", &n3)] {
        report.push(
            &format!("{name} unit"),
            !n.is_zero(),
            format!("N({name}) = {n}"),
        );
        if n.is_zero() {
            fail(
                ValidationFailure::NotUnit(if name == "x2" { "x2" } else { "x3" }),
                &mut failure,
            );
        }
    }
    if failure.is_some() {
        return ValidationReport {
            report,
            failure,
            corestriction: None,
        };
    }
    let mut corestriction = None;
    if sc.field.is_rationals() {
        let pairs = [SymbolPair::new(&sc.a2, &n2), SymbolPair::new(&sc.a3, &n3)];
        let cls = class_of(&[
            pairs[0].clone().expect("nonzero"),
            pairs[1].clone().expect("nonzero"),
        ]);
        let ram = symbols::places_string(cls.ram());
        let trivial = symbols::is_split(&cls);
        report.push(
            "corestriction trivial",
            trivial,
            format!(
                "({}, {}) + ({}, {}) ramified at {}",
                sc.a2, n2, sc.a3, n3, ram
            ),
        );
        if !trivial {
            fail(
                ValidationFailure::CorestrictionNontrivial(ram),
                &mut failure,
            );
        }
        corestriction = Some(cls);
    } else {
        report.push(
            "corestriction trivial",
            true,
            "the Brauer group of a finite field is trivial",
        );
    }
    ValidationReport {
        report,
        failure,
        corestriction,
    }
}

// ---------------------------------------------------------------------------
// Witnesses

/// y ∈ K* and μ's given as coordinate pairs (u, v) of u + v√n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witnesses {
    pub y: Q,
    pub mu2: (Q, Q),
    pub mu3: (Q, Q),
    pub mu23: (Q, Q),
}

fn qnorm(k: &BaseField, n: &Q, mu: &(Q, Q)) -> Q {
    k.sub(&k.mul(&mu.0, &mu.0), &k.mul(n, &k.mul(&mu.1, &mu.1)))
}

/// Exact check of a₂y = N(μ₂), y = N(μ₂₃), a₃y = N(μ₃).
pub fn check_witnesses(sc: &LiftScenario, w: &Witnesses) -> Result<(), LiftError> {
    let sc = sc.normalized()?;
    let k = sc.field;
    let (n2, n3) = sc.norms()?;
    if w.y.is_zero() {
        return Err(LiftError::BadWitness("y = 0".into()));
    }
    let checks = [
        ("a2·y = N(μ2)", k.mul(&sc.a2, &w.y), qnorm(&k, &n2, &w.mu2)),
        (
            "y = N(μ23)",
            w.y.clone(),
            qnorm(&k, &k.mul(&n2, &n3), &w.mu23),
        ),
        ("a3·y = N(μ3)", k.mul(&sc.a3, &w.y), qnorm(&k, &n3, &w.mu3)),
    ];
    for (name, lhs, rhs) in checks {
        if lhs != rhs {
            return Err(LiftError::BadWitness(format!("{name}: {lhs} ≠ {rhs}")));
        }
    }
    Ok(())
}

pub fn derive_witnesses(sc: &LiftScenario) -> Result<Witnesses, LiftError> {
    let v = validate_scenario(sc);
    if let Some(f) = v.failure {
        return Err(LiftError::Validation(f));
    }
    let sc = sc.normalized()?;
    let k = sc.field;
    let (n2, n3) = sc.norms()?;
    let y = if k.is_rationals() {
        symbols::find_common_slot(&sc.a2, &n2, &sc.a3, &n3)
            .map_err(|e| LiftError::WitnessSearchFailed(e.to_string()))?
    } else {
        Q::one()
    };
    let solve = |n: &Q, b: &Q| -> Result<(Q, Q), LiftError> {
        algebra_norm_solve(&k, n, b)?.ok_or_else(|| {
            LiftError::WitnessSearchFailed(format!("u² − ({n})v² = {b} has no solution"))
        })
    };
    let w = Witnesses {
        y: y.clone(),
        mu2: solve(&n2, &k.mul(&sc.a2, &y))?,
        mu23: solve(&k.mul(&n2, &n3), &y)?,
        mu3: solve(&n3, &k.mul(&sc.a3, &y))?,
    };
    check_witnesses(&sc, &w)?;
    Ok(w)
}

fn algebra_norm_solve(k: &BaseField, n: &Q, b: &Q) -> Result<Option<(Q, Q)>, LiftError> {
    Ok(algebra::norm_solve_k(k, n, b)?)
}

// ---------------------------------------------------------------------------
// Primed data

/// The rings of the lift: T, S = T(√a₁′), and Sₖ = T(√nₖ′), S₂₃ = T(√(n₂′n₃′)).
#[derive(Debug, Clone)]
pub struct Tower {
    pub t: Ring,
    pub s: Ring,
    pub s2: Ring,
    pub s3: Ring,
    pub s23: Ring,
}

/// Lifted data. a₁′, y′, aₖ′, d′, nₖ′ lie in T; xₖ′ in S; μ's in Sₖ, S₂₃.
#[derive(Debug, Clone, PartialEq)]
pub struct Primed {
    pub a1: Elem,
    pub x2: Elem,
    pub x3: Elem,
    pub mu2: Elem,
    pub mu3: Elem,
    pub mu23: Elem,
    pub y: Elem,
    pub a2: Elem,
    pub a3: Elem,
    pub d: Elem,
}

/// T = K for N = 1, else K[ε]/(ε^N).
pub fn base_ring(field: BaseField, trunc: usize) -> Result<Ring, LiftError> {
    if trunc == 1 {
        Ok(Ring::field(field))
    } else {
        Ok(Ring::truncated(field, trunc)?)
    }
}

/// Rebuilds the tower from a₁′, x₂′ (T- and S-coordinates), x₃′.
pub fn tower_from(t: &Ring, a1: &Elem, x2: &Elem, x3: &Elem) -> Result<Tower, LiftError> {
    let s = Ring::adjoin_sqrts(t, std::slice::from_ref(a1))?;
    let n2 = s.norm(x2);
    let n3 = s.norm(x3);
    Ok(Tower {
        s2: Ring::adjoin_sqrts(t, std::slice::from_ref(&n2))?,
        s3: Ring::adjoin_sqrts(t, std::slice::from_ref(&n3))?,
        s23: Ring::adjoin_sqrts(t, &[t.mul(&n2, &n3)])?,
        t: t.clone(),
        s,
    })
}

fn perturb(t: &Ring, x: &Q, seed: &Q) -> Elem {
    t.add(&t.from_q(x), &t.scale(seed, &t.eps()))
}

fn perturb_pair(t: &Ring, outer: &Ring, x: &(Q, Q), seed: &(Q, Q)) -> Elem {
    outer.from_base_coords(&[perturb(t, &x.0, &seed.0), perturb(t, &x.1, &seed.1)])
}

pub fn lift_data(sc: &LiftScenario, w: &Witnesses) -> Result<(Tower, Primed), LiftError> {
    let sc = sc.normalized()?;
    let t = base_ring(sc.field, sc.trunc)?;
    let s0 = &sc.seeds;
    let a1 = perturb(&t, &sc.a1, &s0.a1);
    let s = Ring::adjoin_sqrts(&t, std::slice::from_ref(&a1))?;
    let x2 = perturb_pair(&t, &s, &sc.x2, &s0.x2);
    let x3 = perturb_pair(&t, &s, &sc.x3, &s0.x3);
    if !s.is_unit(&x2) || !s.is_unit(&x3) {
        return Err(LiftError::Validation(ValidationFailure::NotUnit("x2/x3")));
    }
    let tower = tower_from(&t, &a1, &x2, &x3)?;
    let mu2 = perturb_pair(&t, &tower.s2, &w.mu2, &s0.mu2);
    let mu3 = perturb_pair(&t, &tower.s3, &w.mu3, &s0.mu3);
    let mu23 = perturb_pair(&t, &tower.s23, &w.mu23, &s0.mu23);
    let y = tower.s23.norm(&mu23);
    let yinv = t.inv(&y)?;
    let a2 = t.mul(&tower.s2.norm(&mu2), &yinv);
    let a3 = t.mul(&tower.s3.norm(&mu3), &yinv);
    let d = perturb(&t, &sc.d, &s0.d);
    Ok((
        tower,
        Primed {
            a1,
            x2,
            x3,
            mu2,
            mu3,
            mu23,
            y,
            a2,
            a3,
            d,
        },
    ))
}

// ---------------------------------------------------------------------------
// Construction

#[derive(Debug, Clone)]
pub struct LiftCertificate {
    pub scenario: LiftScenario,
    pub witnesses: Witnesses,
    pub primed: Primed,
    /// B′ = (a₂′, x₂′)_S ⊗ (a₃′, x₃′)_S.
    pub b: StructAlgebra,
    pub alpha: AlgebraMap,
    pub c: AlgElem,
    /// A′ = B′ ⊕ B′u over T.
    pub a: StructAlgebra,
    /// (a₁′, d′)_T; A″ = A′ ⊗ quat is recomputed, not stored.
    pub quat: StructAlgebra,
    /// Idempotent of A″.
    pub e: AlgElem,
    /// D′ = eA″e with its basis inside A″.
    pub d: StructAlgebra,
    pub d_basis: Vec<AlgElem>,
    pub report: Report,
}

/// B′ with generators i2, j2, i3, j3.
pub fn build_b(tower: &Tower, p: &Primed) -> Result<StructAlgebra, LiftError> {
    let s = &tower.s;
    let q2 = quaternion_algebra(s, &s.embed(&p.a2), &p.x2)?;
    let q3 = quaternion_algebra(s, &s.embed(&p.a3), &p.x3)?;
    Ok(algebra::tensor(&q2, &q3)?.rename_gens(&["i2", "j2", "i3", "j3"]))
}

pub fn splitter(tower: &Tower, p: &Primed) -> BiquaternionWitnessSplitter {
    let s = &tower.s;
    let pair = |r: &Ring, mu: &Elem| {
        let c = r.base_coords(mu);
        (s.embed(&c[0]), s.embed(&c[1]))
    };
    BiquaternionWitnessSplitter {
        a2: s.embed(&p.a2),
        a3: s.embed(&p.a3),
        y: s.embed(&p.y),
        mu2: pair(&tower.s2, &p.mu2),
        mu3: pair(&tower.s3, &p.mu3),
        mu23: pair(&tower.s23, &p.mu23),
    }
}

/// e = ½(1 + (x ⊗ I)/a₁′) in A″ = A′ ⊗ (a₁′, d′)_T, in tensor coordinates.
pub fn build_e(a: &StructAlgebra, quat: &StructAlgebra, a1: &Elem) -> Result<AlgElem, LiftError> {
    let t = a.base();
    let half = t.inv(&t.from_i64(2))?;
    let coef = t.mul(&half, &t.inv(a1)?);
    let one = kron(t, &a.one(), &quat.one());
    let xi = kron(t, &a.gen("x")?, &quat.gen("i")?);
    Ok(one
        .iter()
        .zip(&xi)
        .map(|(p, q)| t.add(&t.mul(&half, p), &t.mul(&coef, q)))
        .collect())
}

/// D′ = eA″e as the crossed product (B′, α, c·d′), with basis e·(b ⊗ 1),
/// e·(b u ⊗ J) inside A″.
#[allow(clippy::too_many_arguments)]
pub fn build_d(
    b: &StructAlgebra,
    alpha: &AlgebraMap,
    c: &AlgElem,
    d: &Elem,
    a: &StructAlgebra,
    quat: &StructAlgebra,
    e: &AlgElem,
) -> Result<(StructAlgebra, Vec<AlgElem>), LiftError> {
    let cd = b.scale(&b.base().embed(d), c);
    let alg = crossed_product_unchecked(b, alpha, &cd)?;
    let j = quat.gen("j")?;
    let half = a.dim() / 2;
    let basis = (0..a.dim())
        .map(|k| {
            let q = if k < half { quat.one() } else { j.clone() };
            tensor_mul(a, quat, e, &kron(a.base(), &a.basis(k), &q))
        })
        .collect();
    Ok((alg, basis))
}

fn build_certificate(
    sc: &LiftScenario,
    w: &Witnesses,
    tower: &Tower,
    primed: Primed,
) -> Result<LiftCertificate, LiftError> {
    let b = build_b(tower, &primed)?;
    let alpha = find_semilinear_iso(&b, 1, &splitter(tower, &primed))?;
    let c = skolem_noether_c(&b, &alpha, sc.rng_seed)?;
    let a = crossed_product_unchecked(&b, &alpha, &c)?;
    let quat = quaternion_algebra(&tower.t, &primed.a1, &primed.d)?;
    let e = build_e(&a, &quat, &primed.a1)?;
    let (d, d_basis) = build_d(&b, &alpha, &c, &primed.d, &a, &quat, &e)?;
    Ok(LiftCertificate {
        scenario: sc.clone(),
        witnesses: w.clone(),
        primed,
        b,
        alpha,
        c,
        a,
        quat,
        e,
        d,
        d_basis,
        report: Report::default(),
    })
}

pub fn construct_lift(sc: &LiftScenario, w: &Witnesses) -> Result<LiftCertificate, LiftError> {
    let mut cert = construct_unverified(sc, w)?;
    cert.report = verify_certificate(&cert);
    if !cert.report.all_pass() {
        let names: Vec<String> = cert
            .report
            .failures()
            .iter()
            .map(|c| c.name.clone())
            .collect();
        return Err(LiftError::CheckFailed(names.join(", ")));
    }
    Ok(cert)
}

/// validate → derive witnesses → construct (which verifies).
pub fn run_pipeline(sc: &LiftScenario) -> Result<LiftCertificate, LiftError> {
    let w = derive_witnesses(sc)?;
    construct_lift(sc, &w)
}

// ---------------------------------------------------------------------------
// Verification

fn residue_pair_of(r: &Ring, x: &Elem) -> (Q, Q) {
    let c = r.base_coords(x);
    let t = r.base().expect("extension");
    (t.residue(&c[0]).0[0].clone(), t.residue(&c[1]).0[0].clone())
}

/// Re-checks a certificate from its own contents.
pub fn verify_certificate(cert: &LiftCertificate) -> Report {
    let mut rep = Report::default();
    let sc = match cert.scenario.normalized() {
        Ok(s) => s,
        Err(e) => {
            rep.push("scenario", false, e.to_string());
            return rep;
        }
    };
    let v = validate_scenario(&sc);
    rep.push(
        "scenario valid",
        v.passed(),
        v.failure.map(|f| f.to_string()).unwrap_or_default(),
    );
    let wcheck = check_witnesses(&sc, &cert.witnesses);
    rep.push(
        "witness relations over K",
        wcheck.is_ok(),
        wcheck.err().map(|e| e.to_string()).unwrap_or_default(),
    );
    let k = sc.field;
    let p = &cert.primed;
    let t = match base_ring(k, sc.trunc) {
        Ok(t) => t,
        Err(e) => {
            rep.push("rings", false, e.to_string());
            return rep;
        }
    };
    let tower = match tower_from(&t, &p.a1, &p.x2, &p.x3) {
        Ok(tw) => tw,
        Err(e) => {
            rep.push("rings", false, e.to_string());
            return rep;
        }
    };
    let shape_ok = [&p.a1, &p.y, &p.a2, &p.a3, &p.d]
        .iter()
        .all(|x| x.0.len() == t.dim())
        && [&p.x2, &p.x3].iter().all(|x| x.0.len() == tower.s.dim())
        && p.mu2.0.len() == tower.s2.dim()
        && p.mu3.0.len() == tower.s3.dim()
        && p.mu23.0.len() == tower.s23.dim();
    rep.push("primed shapes", shape_ok, "");
    if !shape_ok {
        return rep;
    }
    verify_relations(&mut rep, &sc, &cert.witnesses, &tower, p);
    if let Err(e) = verify_algebras(&mut rep, cert, &tower) {
        rep.push("algebra checks", false, e.to_string());
    }
    rep
}

fn verify_relations(rep: &mut Report, sc: &LiftScenario, w: &Witnesses, tower: &Tower, p: &Primed) {
    let t = &tower.t;
    let ny = tower.s23.norm(&p.mu23);
    rep.push("y' = N(mu23')", ny == p.y, "");
    let r2 = t.mul(&p.a2, &p.y) == tower.s2.norm(&p.mu2);
    rep.push("a2' y' = N(mu2')", r2, "");
    let r3 = t.mul(&p.a3, &p.y) == tower.s3.norm(&p.mu3);
    rep.push("a3' y' = N(mu3')", r3, "");
    let units = [&p.a1, &p.y, &p.a2, &p.a3, &p.d]
        .iter()
        .all(|x| t.is_unit(x));
    rep.push("primed scalars are units", units, "");
    let res = |x: &Elem| t.residue(x).0[0].clone();
    let mut mismatches = Vec::new();
    for (name, got, want) in [
        ("a1'", res(&p.a1), sc.a1.clone()),
        ("y'", res(&p.y), w.y.clone()),
        ("a2'", res(&p.a2), sc.a2.clone()),
        ("a3'", res(&p.a3), sc.a3.clone()),
        ("d'", res(&p.d), sc.d.clone()),
    ] {
        if got != want {
            mismatches.push(name);
        }
    }
    for (name, got, want) in [
        ("x2'", residue_pair_of(&tower.s, &p.x2), sc.x2.clone()),
        ("x3'", residue_pair_of(&tower.s, &p.x3), sc.x3.clone()),
        ("mu2'", residue_pair_of(&tower.s2, &p.mu2), w.mu2.clone()),
        ("mu3'", residue_pair_of(&tower.s3, &p.mu3), w.mu3.clone()),
        (
            "mu23'",
            residue_pair_of(&tower.s23, &p.mu23),
            w.mu23.clone(),
        ),
    ] {
        if got != want {
            mismatches.push(name);
        }
    }
    rep.push(
        "primed data reduce to originals",
        mismatches.is_empty(),
        mismatches.join(", "),
    );
    if sc.field.is_rationals() {
        let cls = corestriction_class(tower, p);
        match cls {
            Ok(c) => rep.push(
                "Cor(B') trivial (order 2)",
                symbols::is_split(&c),
                format!("ramified at {}", symbols::places_string(c.ram())),
            ),
            Err(e) => rep.push("Cor(B') trivial (order 2)", false, e.to_string()),
        }
    }
}

/// Residue class over ℚ of the corestriction of B′, from the rewritten
/// pairs (aₖ′, N(xₖ′)).
pub fn corestriction_class(tower: &Tower, p: &Primed) -> Result<SymbolClass, SymbolError> {
    let s = &tower.s;
    let c2 = cor_rewrite(s, &s.embed(&p.a2), &p.x2)?;
    let c3 = cor_rewrite(s, &s.embed(&p.a3), &p.x3)?;
    Ok(class_of(&[
        c2.residue_pair(&tower.t)?,
        c3.residue_pair(&tower.t)?,
    ]))
}

fn verify_algebras(
    rep: &mut Report,
    cert: &LiftCertificate,
    tower: &Tower,
) -> Result<(), LiftError> {
    let p = &cert.primed;
    // B′
    let b = build_b(tower, p)?;
    rep.push("B' matches its presentation", b == cert.b, "");
    let b = cert.b.clone().with_gens(b.gens().to_vec());
    rep.push("B' associative", b.check_associative().is_ok(), "");
    rep.push(
        "B' Azumaya",
        is_azumaya(&b),
        format!("rank {} over S", b.dim()),
    );
    // α and c
    let alpha = &cert.alpha;
    let alpha_ok = alpha.twist == 1
        && alpha.images.len() == b.dim()
        && alpha.check_multiplicative(&b, &b).is_ok()
        && alpha.check_semilinear(&b, &b).is_ok();
    rep.push("alpha sigma-semilinear automorphism", alpha_ok, "");
    if !alpha_ok {
        return Ok(());
    }
    let c_fixed = alpha.apply(&b, &b, &cert.c) == cert.c;
    rep.push("alpha(c) = c", c_fixed, "");
    let inner = (0..b.dim()).all(|i| {
        let g = b.basis(i);
        b.mul(&alpha.apply(&b, &b, &alpha.apply(&b, &b, &g)), &cert.c) == b.mul(&cert.c, &g)
    });
    rep.push("alpha^2 = inn(c)", inner && b.is_unit(&cert.c), "");
    // A′
    let a = crossed_product_unchecked(&b, alpha, &cert.c)?;
    rep.push("A' matches crossed product", a == cert.a, "");
    let a_assoc = a.check_associative().is_ok();
    rep.push("A' associative", a_assoc, "");
    let a_azumaya = is_azumaya(&a);
    rep.push("A' Azumaya", a_azumaya, format!("rank {} over T", a.dim()));
    rep.push(
        "centralizer of S in A' is B'",
        centralizer_is_b(&a)?,
        "B' commutes with x, ad(x) injective on B'u",
    );
    // A″ = A′ ⊗ (a₁′, d′)
    let quat = quaternion_algebra(&tower.t, &p.a1, &p.d)?;
    rep.push("(a1', d') matches", quat == cert.quat, "");
    let quat_ok = quat.check_associative().is_ok() && is_azumaya(&quat);
    rep.push(
        "A'' associative and Azumaya (factors)",
        quat_ok && a_assoc && a_azumaya,
        "tensor product of checked factors",
    );
    let e = build_e(&a, &quat, &p.a1)?;
    rep.push(
        "e = (1 + x⊗I/a1')/2",
        e == cert.e && tensor_mul(&a, &quat, &e, &e) == e,
        "",
    );
    // D′ = eA″e
    verify_corner(rep, cert, &a, &quat, &e)?;
    // residue consistency
    verify_residue(rep, cert);
    Ok(())
}

/// The centralizer of x = √a₁′ in A′ is the B′ block: that block commutes
/// with x, and ad(x) is injective on the B′u block.
fn centralizer_is_b(a: &StructAlgebra) -> Result<bool, LiftError> {
    let x = a.gen("x")?;
    let half = a.dim() / 2;
    let ad = |v: &AlgElem| a.sub(&a.mul(&x, v), &a.mul(v, &x));
    let commutes = (0..half).all(|k| ad(&a.basis(k)).iter().all(Elem::is_zero));
    let image =
        FreeSpan::from_candidates(a.base(), a.dim(), (half..a.dim()).map(|k| ad(&a.basis(k))));
    Ok(commutes && image.is_ok_and(|s| s.rank() == half))
}

fn verify_corner(
    rep: &mut Report,
    cert: &LiftCertificate,
    a: &StructAlgebra,
    quat: &StructAlgebra,
    e: &AlgElem,
) -> Result<(), LiftError> {
    let t = a.base();
    let d = &cert.d;
    let basis = &cert.d_basis;
    let n = a.dim() * quat.dim();
    let shapes = basis.len() == d.dim() && basis.iter().all(|v| v.len() == n) && d.base() == t;
    rep.push(
        "D' rank 64",
        shapes && d.dim() == DEGREE * DEGREE,
        format!("rank {}", d.dim()),
    );
    if !shapes {
        return Ok(());
    }
    let mul = |x: &AlgElem, y: &AlgElem| tensor_mul(a, quat, x, y);
    let inside = basis.iter().all(|v| mul(&mul(e, v), e) == *v);
    let span = FreeSpan::from_candidates(t, n, basis.iter().cloned());
    let independent = span.as_ref().is_ok_and(|s| s.rank() == basis.len());
    let unit = |i: usize| {
        let mut v = vec![t.zero(); n];
        v[i] = t.one();
        v
    };
    let spanning = span
        .as_ref()
        .is_ok_and(|s| (0..n).all(|i| s.contains(&mul(&mul(e, &unit(i)), e))));
    rep.push(
        "D' basis spans eA''e",
        inside && independent && spanning,
        "",
    );
    let sparse: Vec<Vec<(usize, &Elem)>> = basis
        .iter()
        .map(|v| v.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())
        .collect();
    let include = |coeffs: &[(usize, Elem)]| -> AlgElem {
        let mut out = vec![t.zero(); n];
        for (k, c) in coeffs {
            for (pos, bv) in &sparse[*k] {
                t.mul_acc(&mut out[*pos], c, bv);
            }
        }
        out
    };
    let mut mult = include(&d.to_sparse(&d.one())) == *e;
    'outer: for i in 0..d.dim() {
        for j in 0..d.dim() {
            if mul(&basis[i], &basis[j]) != include(d.basis_product(i, j)) {
                mult = false;
                break 'outer;
            }
        }
    }
    rep.push("D' structure constants = products in A''", mult, "");
    let dg = if d.gens_generate() {
        d.clone()
    } else {
        d.clone().with_auto_gens()
    };
    rep.push(
        "D' associative",
        dg.check_associative().is_ok(),
        format!("{} generators", dg.gens().len()),
    );
    rep.push("D' Azumaya", is_azumaya(&dg), "degree 8 over T");
    Ok(())
}

fn verify_residue(rep: &mut Report, cert: &LiftCertificate) {
    let sc0 = cert.scenario.residue_scenario();
    let label = "residue equals construction over K";
    if cert.scenario.trunc == 1 && cert.scenario.seeds.is_zero() {
        rep.push(label, true, "already over K");
        return;
    }
    let base = match construct_unverified(&sc0, &cert.witnesses) {
        Ok(c) => c,
        Err(e) => {
            rep.push(label, false, e.to_string());
            return;
        }
    };
    let mut bad = Vec::new();
    if cert.b.residue_algebra() != base.b {
        bad.push("B'");
    }
    let res_alpha: Vec<AlgElem> = cert
        .alpha
        .images
        .iter()
        .map(|x| cert.b.residue_elem(x))
        .collect();
    if res_alpha != base.alpha.images {
        bad.push("alpha");
    }
    if cert.b.residue_elem(&cert.c) != base.c {
        bad.push("c");
    }
    if cert.a.residue_algebra() != base.a {
        bad.push("A'");
    }
    let e_res: AlgElem = cert.e.iter().map(|x| cert.quat.base().residue(x)).collect();
    if e_res != base.e {
        bad.push("e");
    }
    if cert.d.residue_algebra() != base.d {
        bad.push("D'");
    }
    rep.push(
        label,
        bad.is_empty(),
        if bad.is_empty() {
            "B', alpha, c, A', e, D'".to_string()
        } else {
            bad.join(", ")
        },
    );
}

/// The construction without the final verification pass; the report is
/// left empty.
pub fn construct_unverified(
    sc: &LiftScenario,
    w: &Witnesses,
) -> Result<LiftCertificate, LiftError> {
    check_witnesses(sc, w)?;
    let (tower, primed) = lift_data(&sc.normalized()?, w)?;
    build_certificate(sc, w, &tower, primed)
}

// ---------------------------------------------------------------------------
// Degree bookkeeping

/// Splits n = 2^r·m with m odd and returns (2^r, cls): an order-2 class of
/// degree n is represented in degree 2^r.
pub fn lemma3_reduce(n: u64, cls: &SymbolClass) -> (u64, SymbolClass) {
    assert!(n >= 1, "degree must be positive");
    (1u64 << n.trailing_zeros(), cls.clone())
}

// ---------------------------------------------------------------------------
// Random admissible scenarios

/// Draws a₁ (non-square, |a₁| ≤ 20), x₂, x₃ (coordinates ≤ 10), a₂, and
/// solves for a₃ so that the corestriction condition holds.
pub fn random_scenario(rng: &mut crate::SearchRng, trunc: usize) -> LiftScenario {
    use rand::Rng;
    let q = Q::from_i64;
    loop {
        let a1 = rng.gen_range(-20..=20i64);
        if a1 == 0 || crate::field::rational_sqrt(&q(a1)).is_some() {
            continue;
        }
        let mut pair = || (q(rng.gen_range(-10..=10)), q(rng.gen_range(-10..=10)));
        let x2 = pair();
        let x3 = pair();
        let a2 = loop {
            let v = rng.gen_range(-20..=20i64);
            if v != 0 {
                break v;
            }
        };
        let mut sc = LiftScenario {
            field: BaseField::Rationals,
            trunc,
            a1: q(a1),
            a2: q(a2),
            a3: q(1),
            x2,
            x3,
            d: q(1),
            seeds: Seeds::default(),
            rng_seed: rng.gen(),
        };
        let Ok((n2, n3)) = sc.norms() else { continue };
        if n2.is_zero() || n3.is_zero() {
            continue;
        }
        let Ok(p2) = SymbolPair::new(&sc.a2, &n2) else {
            continue;
        };
        let target = p2.ramification_set();
        let Ok(n3c) = SquareClass::of(&n3) else {
            continue;
        };
        let Some(a3) = symbols::find_slot(&[(n3c, target)]) else {
            continue;
        };
        sc.a3 = a3.to_q();
        if validate_scenario(&sc).passed() {
            return sc;
        }
    }
}
