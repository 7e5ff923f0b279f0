use rand::Rng;

use super::*;
use crate::field::BaseField;
use crate::rings::Ring;

fn qq() -> Ring {
    Ring::field(BaseField::Rationals)
}

fn t3() -> Ring {
    Ring::truncated(BaseField::Rationals, 3).unwrap()
}

fn q(n: i64) -> Elem {
    qq().from_i64(n)
}

fn sum(a: &StructAlgebra, terms: &[(i64, usize)]) -> AlgElem {
    terms.iter().fold(a.zero(), |s, &(c, i)| {
        a.add(&s, &a.scale(&a.base().from_i64(c), &a.basis(i)))
    })
}

/// Same algebra in the basis given by the columns of `p` (R-coordinates).
fn change_basis(a: &StructAlgebra, p: &[AlgElem]) -> StructAlgebra {
    let ex = Expresser::new(a.base(), a.dim(), p).unwrap();
    let n = a.dim();
    let mut table = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = ex.coeffs(&a.mul(&p[i], &p[j])).unwrap();
            table[i][j] = c
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
        }
    }
    let one = ex.coeffs(&a.one()).unwrap();
    StructAlgebra::new(a.base().clone(), n, table, one, vec![]).unwrap()
}

#[test]
fn quaternion_one_one_has_zero_divisor() {
    let a = quaternion_algebra(&qq(), &q(1), &q(1)).unwrap();
    let x = sum(&a, &[(1, 0), (1, 1)]);
    let y = sum(&a, &[(1, 0), (-1, 1)]);
    assert!(a.is_zero(&a.mul(&x, &y)));
    assert!(!a.is_unit(&x));
}

#[test]
fn hamilton_quaternions_are_division() {
    let a = quaternion_algebra(&qq(), &q(-1), &q(-1)).unwrap();
    let mut rng = crate::seeded_rng(1);
    for _ in 0..500 {
        let x: AlgElem = (0..4).map(|_| q(rng.gen_range(-20..=20))).collect();
        if a.is_zero(&x) {
            continue;
        }
        // norm form oracle: u² + v² + w² + z² > 0
        let nrm: i64 = x
            .iter()
            .map(|c| c.0[0].numer().try_into().map(|v: i64| v * v).unwrap())
            .sum();
        assert!(nrm > 0);
        assert!(a.is_unit(&x));
        let inv = a.inverse(&x).unwrap();
        assert_eq!(a.mul(&x, &inv), a.one());
    }
}

#[test]
fn quaternion_over_truncated_is_azumaya() {
    let t = t3();
    let a2 = t.add(&t.from_i64(2), &t.eps());
    let a = quaternion_algebra(&t, &a2, &t.from_i64(3)).unwrap();
    assert!(is_azumaya(&a));
    assert!(is_azumaya_by_determinant(&a));
    let r = quaternion_algebra(&qq(), &q(2), &q(3)).unwrap();
    assert_eq!(a.residue_algebra(), r);
}

#[test]
fn quaternion_requires_units() {
    let t = t3();
    assert!(quaternion_algebra(&t, &t.eps(), &t.one()).is_err());
}

#[test]
fn degenerate_quaternion_table_is_not_azumaya() {
    let t = t3();
    let a = quaternion_algebra(&t, &t.one(), &t.one()).unwrap();
    // same sign rules with i² = ε
    let eps = t.eps();
    let table: Vec<Vec<Sparse>> = (0..4)
        .map(|x: usize| {
            (0..4)
                .map(|y: usize| {
                    let (p1, q1, p2, q2) = (x & 1, x >> 1, y & 1, y >> 1);
                    let mut c = t.one();
                    if q1 & p2 == 1 {
                        c = t.neg(&c);
                    }
                    if p1 & p2 == 1 {
                        c = t.mul(&c, &eps);
                    }
                    let k = (p1 ^ p2) | ((q1 ^ q2) << 1);
                    if c.is_zero() {
                        vec![]
                    } else {
                        vec![(k, c)]
                    }
                })
                .collect()
        })
        .collect();
    let d = StructAlgebra::new(t.clone(), 4, table, a.one(), vec![]).unwrap();
    assert!(!is_azumaya(&d));
    assert!(!is_azumaya_by_determinant(&d));
}

#[test]
fn base_ring_is_azumaya() {
    assert!(is_azumaya(&scalar_algebra(&t3())));
    assert!(is_azumaya_by_determinant(&scalar_algebra(&t3())));
    let s = Ring::adjoin_sqrts(&t3(), &[t3().from_i64(2)]).unwrap();
    assert!(is_azumaya(&scalar_algebra(&s)));
}

#[test]
fn tensor_with_rank_one_is_identity() {
    let a = quaternion_algebra(&qq(), &q(2), &q(5)).unwrap();
    let t = tensor(&a, &scalar_algebra(&qq())).unwrap();
    assert_eq!(t, a);
    let b = quaternion_algebra(&qq(), &q(-1), &q(3)).unwrap();
    let ab = tensor(&a, &b).unwrap();
    assert_eq!(ab.dim(), 16);
    assert_eq!(ab.gen_names(), vec!["i", "j", "i'", "j'"]);
    ab.check_associative_full().unwrap();
    assert!(is_azumaya(&ab));
}

#[test]
fn tensor_base_mismatch() {
    let a = scalar_algebra(&qq());
    let b = scalar_algebra(&t3());
    assert!(matches!(tensor(&a, &b), Err(AlgebraError::BaseMismatch)));
}

#[test]
fn biquaternion_square_is_split() {
    let h = quaternion_algebra(&qq(), &q(-1), &q(-1)).unwrap();
    let e = tensor(&h, &h).unwrap();
    let idem = rank_one_idempotent(&e, 3).unwrap();
    assert_eq!(corner(&e, idem.elem()).unwrap().span.rank(), 1);
}

#[test]
fn biquaternion_with_different_classes_is_not_split() {
    let h = quaternion_algebra(&qq(), &q(-1), &q(-1)).unwrap();
    let g = quaternion_algebra(&qq(), &q(-1), &q(3)).unwrap();
    let e = tensor(&h, &g).unwrap();
    assert!(matches!(
        rank_one_idempotent(&e, 3),
        Err(AlgebraError::NotSplit)
    ));
}

#[test]
fn opposite_properties() {
    let s = Ring::adjoin_sqrts(&qq(), &[q(3)]).unwrap();
    let c = ring_as_algebra(&s).unwrap();
    assert_eq!(opposite(&c), c);
    let a = quaternion_algebra(&qq(), &q(2), &q(-7)).unwrap();
    assert_eq!(opposite(&opposite(&a)), a);
    let op = opposite(&a);
    let conj = AlgebraMap::linear(vec![
        op.basis(0),
        op.neg(&op.basis(1)),
        op.neg(&op.basis(2)),
        op.neg(&op.basis(3)),
    ]);
    conj.check_multiplicative(&a, &op).unwrap();
}

#[test]
fn centralizers() {
    let a = quaternion_algebra(&qq(), &q(2), &q(3)).unwrap();
    let c = centralizer(&a, &[a.one()]).unwrap();
    assert_eq!(c.alg.dim(), 4);
    let c = centralizer(&a, &[a.basis(1)]).unwrap();
    assert_eq!(c.alg.dim(), 2);
    assert!(c.span.contains(&a.basis(1)));
    assert!(c.span.contains(&a.one()));
}

#[test]
fn galois_twists() {
    let t = Ring::truncated(BaseField::Rationals, 2).unwrap();
    let s = Ring::adjoin_sqrts(&t, &[t.add(&t.from_i64(2), &t.eps())]).unwrap();
    let a2 = s.from_i64(-1);
    let x2 = s.add(&s.one(), &s.sqrt_gen(0));
    let b = quaternion_algebra(&s, &a2, &x2).unwrap();
    assert_eq!(galois_twist(&b, 0), b);
    assert_eq!(galois_twist(&galois_twist(&b, 1), 1), b);
    let expected = quaternion_algebra(&s, &a2, &s.galois(1, &x2)).unwrap();
    let tw = galois_twist(&b, 1);
    assert_eq!(tw.table(), expected.table());
}

#[test]
fn rank_one_examples() {
    let m = matrix_algebra(&qq(), 2);
    let e = rank_one_idempotent(&m, 1).unwrap();
    assert_eq!(corner(&m, e.elem()).unwrap().span.rank(), 1);
    let m3 = matrix_algebra(&qq(), 3);
    let e = rank_one_idempotent(&m3, 1).unwrap();
    assert_eq!(corner(&m3, e.elem()).unwrap().span.rank(), 1);
    let a = quaternion_algebra(&qq(), &q(1), &q(1)).unwrap();
    let e = rank_one_idempotent(&a, 1).unwrap();
    let half = qq().from_q(&crate::Q::new(1, 2));
    assert_eq!(e.elem(), &vec![half.clone(), half, q(0), q(0)]);
    let h = quaternion_algebra(&qq(), &q(-1), &q(-1)).unwrap();
    assert!(matches!(
        rank_one_idempotent(&h, 1),
        Err(AlgebraError::NotSplit)
    ));
}

#[test]
fn rank_one_over_prime_field() {
    let k = Ring::field(BaseField::prime(7).unwrap());
    let a = quaternion_algebra(&k, &k.from_i64(3), &k.from_i64(5)).unwrap();
    let e = rank_one_idempotent(&a, 1).unwrap();
    assert_eq!(corner(&a, e.elem()).unwrap().span.rank(), 1);
}

#[test]
fn rank_one_rejects_non_field_base() {
    let a = quaternion_algebra(&t3(), &t3().one(), &t3().one()).unwrap();
    assert!(matches!(
        rank_one_idempotent(&a, 1),
        Err(AlgebraError::NotAField(_))
    ));
}

#[test]
fn hensel_lifting() {
    let t = t3();
    let m = matrix_algebra(&t, 2);
    let e11 = m.basis(0);
    assert_eq!(hensel_lift_idempotent(&m, &e11).unwrap().elem(), &e11);
    // perturb the basis by ε so that the first basis vector is no longer idempotent
    let mut rng = crate::seeded_rng(9);
    let p: Vec<AlgElem> = (0..4)
        .map(|i| {
            let mut v = m.basis(i);
            for c in v.iter_mut() {
                *c = t.add(c, &t.mul(&t.eps(), &t.from_i64(rng.gen_range(-3..=3))));
            }
            v
        })
        .collect();
    let pm = change_basis(&m, &p);
    let e0 = pm.basis(0);
    assert_ne!(pm.mul(&e0, &e0), e0);
    let e = hensel_lift_idempotent(&pm, &e0).unwrap();
    assert_eq!(pm.mul(e.elem(), e.elem()), *e.elem());
    assert_eq!(pm.residue_elem(e.elem()), pm.residue_elem(&e0));
    let bad = m.scale(&t.from_i64(2), &e11);
    assert!(matches!(
        hensel_lift_idempotent(&m, &bad),
        Err(AlgebraError::NotIdempotentResidue)
    ));
}

#[test]
fn galois_split_idempotents() {
    for (t, a) in [
        (qq(), q(2)),
        (t3(), t3().add(&t3().from_i64(2), &t3().eps())),
    ] {
        let s = Ring::adjoin_sqrts(&t, std::slice::from_ref(&a)).unwrap();
        let sa = ring_as_algebra(&s).unwrap();
        let ss = tensor(&sa, &sa).unwrap();
        let x1 = ss.gen("x").unwrap();
        let x2 = ss.gen("x'").unwrap();
        let e = galois_split_idempotent(&ss, &x1, &x2, &a).unwrap();
        let c = corner(&ss, e.elem()).unwrap();
        assert_eq!(c.span.rank(), 2);
        assert_eq!(
            c.alg.mul(&c.alg.basis(0), &c.alg.basis(1)),
            c.alg.mul(&c.alg.basis(1), &c.alg.basis(0))
        );
        let r = ss.residue_algebra();
        let re = ss.residue_elem(e.elem());
        assert_eq!(r.mul(&re, &re), re);
    }
}

#[test]
fn corners() {
    let a = quaternion_algebra(&qq(), &q(2), &q(3)).unwrap();
    assert_eq!(corner(&a, &a.one()).unwrap().span.rank(), 4);
    let m = matrix_algebra(&qq(), 2);
    let c = corner(&m, &m.basis(0)).unwrap();
    assert_eq!(c.alg.dim(), 1);
    assert!(is_azumaya(&c.alg));
}

#[test]
fn residue_functoriality() {
    let t = t3();
    let a = quaternion_algebra(&t, &t.add(&t.from_i64(5), &t.eps()), &t.from_i64(-3)).unwrap();
    let b = quaternion_algebra(&t, &t.from_i64(2), &t.sub(&t.from_i64(7), &t.eps())).unwrap();
    let ra = quaternion_algebra(&qq(), &q(5), &q(-3)).unwrap();
    let rb = quaternion_algebra(&qq(), &q(2), &q(7)).unwrap();
    assert_eq!(a.residue_algebra(), ra);
    assert_eq!(
        tensor(&a, &b).unwrap().residue_algebra(),
        tensor(&ra, &rb).unwrap()
    );
    assert_eq!(opposite(&a).residue_algebra(), opposite(&ra));
}

fn sigma_map(b: &StructAlgebra) -> AlgebraMap {
    AlgebraMap {
        images: (0..b.dim()).map(|i| b.basis(i)).collect(),
        twist: 1,
    }
}

#[test]
fn crossed_product_of_s_is_quaternion() {
    let t = t3();
    let a = t.add(&t.from_i64(3), &t.eps());
    let bb = t.sub(&t.from_i64(-5), &t.eps());
    let s = Ring::adjoin_sqrts(&t, std::slice::from_ref(&a)).unwrap();
    let b = scalar_algebra(&s);
    let cp = crossed_product_quadratic(&b, &sigma_map(&b), &vec![s.embed(&bb)]).unwrap();
    let quat = quaternion_algebra(&t, &a, &bb).unwrap();
    assert_eq!(cp.table(), quat.table());
    assert_eq!(cp.one(), quat.one());
    let residue_cp = {
        let sr = s.residue_ring();
        let br = scalar_algebra(&sr);
        crossed_product_quadratic(&br, &sigma_map(&br), &vec![sr.from_i64(-5)]).unwrap()
    };
    assert_eq!(cp.residue_algebra().table(), residue_cp.table());
}

#[test]
fn crossed_product_with_trivial_c_is_split() {
    let s = Ring::adjoin_sqrts(&t3(), &[t3().from_i64(7)]).unwrap();
    let b = scalar_algebra(&s);
    let cp = crossed_product_quadratic(&b, &sigma_map(&b), &vec![s.one()]).unwrap();
    assert!(rank_one_idempotent(&cp.residue_algebra(), 0).is_ok());
}

#[test]
fn crossed_product_rejects_unfixed_c() {
    let s = Ring::adjoin_sqrts(&qq(), &[q(7)]).unwrap();
    let b = scalar_algebra(&s);
    let r = crossed_product_quadratic(&b, &sigma_map(&b), &vec![s.sqrt_gen(0)]);
    assert!(matches!(r, Err(AlgebraError::AssociativityFailure(_))));
}

struct NoSplit;

impl TwistSplitter for NoSplit {
    fn split(&self, _: &StructAlgebra) -> Result<AlgElem, AlgebraError> {
        Err(AlgebraError::NotBrauerEquivalent("test".into()))
    }
}

#[test]
fn semilinear_iso_fast_path_and_crossed_product() {
    let t = Ring::truncated(BaseField::Rationals, 2).unwrap();
    let s = Ring::adjoin_sqrts(&t, &[t.from_i64(2)]).unwrap();
    let b = quaternion_algebra(&s, &s.from_i64(-1), &s.add(&s.from_i64(3), &s.eps())).unwrap();
    let alpha = find_semilinear_iso(&b, 1, &NoSplit).unwrap();
    assert_eq!(alpha.images, (0..4).map(|i| b.basis(i)).collect::<Vec<_>>());
    let c = skolem_noether_c(&b, &alpha, 0).unwrap();
    assert_eq!(alpha.apply(&b, &b, &c), c);
    let a = crossed_product_quadratic(&b, &alpha, &c).unwrap();
    assert_eq!(a.dim(), 16);
    assert!(is_azumaya(&a));
    let cen = centralizer(&a, &[a.gen("x").unwrap()]).unwrap();
    let image = FreeSpan::from_candidates(
        &t,
        a.dim(),
        (0..b.dim())
            .flat_map(|k| {
                let x = s.sqrt_gen(0);
                [b.basis(k), b.scale(&x, &b.basis(k))]
            })
            .map(|v| crossed_product_b_image(&b, &a, &v)),
    )
    .unwrap();
    assert!(cen.span.same_span(&image));
}

#[test]
fn semilinear_iso_needs_splitter_when_twist_differs() {
    let s = Ring::adjoin_sqrts(&qq(), &[q(2)]).unwrap();
    let b = quaternion_algebra(&s, &s.from_i64(-1), &s.add(&s.one(), &s.sqrt_gen(0))).unwrap();
    assert!(matches!(
        find_semilinear_iso(&b, 1, &NoSplit),
        Err(AlgebraError::NotBrauerEquivalent(_))
    ));
}

#[test]
fn skolem_noether_recovers_planted_conjugator() {
    let t = Ring::truncated(BaseField::Rationals, 2).unwrap();
    let s = Ring::adjoin_sqrts(&t, &[t.from_i64(3)]).unwrap();
    let m = matrix_algebra(&s, 2);
    let mut rng = crate::seeded_rng(5);
    let h = loop {
        let h: AlgElem = (0..4).map(|_| s.random_elem(&mut rng, 5)).collect();
        if m.is_unit(&h) {
            break h;
        }
    };
    let hinv = m.inverse(&h).unwrap();
    let alpha = AlgebraMap {
        images: (0..4)
            .map(|i| m.mul(&m.mul(&h, &m.basis(i)), &hinv))
            .collect(),
        twist: 1,
    };
    alpha.check_multiplicative(&m, &m).unwrap();
    alpha.check_semilinear(&m, &m).unwrap();
    let g = m.mul(&h, &galois_twist_elem(&s, &h));
    let c = skolem_noether_c(&m, &alpha, 0).unwrap();
    assert_eq!(alpha.apply(&m, &m, &c), c);
    let ginv = m.inverse(&g).unwrap();
    let w = m.mul(&ginv, &c);
    for i in 0..4 {
        assert_eq!(m.mul(&w, &m.basis(i)), m.mul(&m.basis(i), &w));
    }
}

fn galois_twist_elem(s: &Ring, x: &AlgElem) -> AlgElem {
    x.iter().map(|c| s.galois(1, c)).collect()
}

#[test]
fn quaternion_isomorphisms() {
    let mut rng = crate::seeded_rng(11);
    for _ in 0..10 {
        let a = loop {
            let v = rng.gen_range(-20..=20);
            if v != 0 && crate::field::rational_sqrt(&crate::Q::from_i64(v)).is_none() {
                break v;
            }
        };
        let b = loop {
            let v = rng.gen_range(-20..=20);
            if v != 0 {
                break v;
            }
        };
        let qab = quaternion_algebra(&qq(), &q(a), &q(b)).unwrap();
        let qba = quaternion_algebra(&qq(), &q(b), &q(a)).unwrap();
        quaternion_swap_map(&qba)
            .check_multiplicative(&qab, &qba)
            .unwrap();
        let (g0, g1) = (rng.gen_range(-9..=9), rng.gen_range(1..=9));
        let n = g0 * g0 - a * g1 * g1;
        let qanb = quaternion_algebra(&qq(), &q(a), &q(n * b)).unwrap();
        quaternion_norm_map(&qab, &q(g0), &q(g1))
            .check_multiplicative(&qanb, &qab)
            .unwrap();
    }
}

#[test]
fn residue_of_truncated_tower_is_field_level() {
    let a = quaternion_algebra(&t3(), &t3().from_i64(2), &t3().from_i64(3)).unwrap();
    let r = residue_algebra(&a);
    assert!(r.base().is_field_k());
    assert!(is_azumaya(&r));
}

#[test]
fn averaged_and_nullspace_conjugators_agree() {
    let t = Ring::truncated(BaseField::Rationals, 2).unwrap();
    let s = Ring::adjoin_sqrts(&t, &[t.from_i64(3)]).unwrap();
    let m = quaternion_algebra(&s, &s.from_i64(-1), &s.add(&s.from_i64(5), &s.eps())).unwrap();
    let mut rng = crate::seeded_rng(11);
    for _ in 0..3 {
        let h = loop {
            let h: AlgElem = (0..4).map(|_| s.random_elem(&mut rng, 4)).collect();
            if m.is_unit(&h) {
                break h;
            }
        };
        let hinv = m.inverse(&h).unwrap();
        let alpha = AlgebraMap {
            images: (0..4)
                .map(|i| m.mul(&m.mul(&h, &m.basis(i)), &hinv))
                .collect(),
            twist: 1,
        };
        alpha.check_multiplicative(&m, &m).unwrap();
        let sq = AlgebraMap {
            images: alpha
                .images
                .iter()
                .map(|x| alpha.apply(&m, &m, x))
                .collect(),
            twist: 0,
        };
        let testers: Vec<AlgElem> = (0..4).map(|i| m.basis(i)).collect();
        let avg =
            super::crossed::averaged_solution(&m, &sq, &testers).expect("diagonal trace form");
        let null = super::crossed::nullspace_solution(&m, &sq, &testers).unwrap();
        assert_eq!(avg, null);
    }
}
