use azulift_core::algebra::{
    centralizer, corner, crossed_product_b_image, crossed_product_quadratic, find_semilinear_iso,
    is_azumaya, matrix_algebra, quaternion_algebra, quaternion_norm_map, quaternion_swap_map,
    skolem_noether_c, tensor, AlgElem, AlgebraError, FreeSpan, StructAlgebra, TwistSplitter,
};
use azulift_core::{seeded_rng, BaseField, Elem, Ring, Q};
use proptest::prelude::*;

fn base(n: usize) -> Ring {
    if n == 1 {
        Ring::field(BaseField::Rationals)
    } else {
        Ring::truncated(BaseField::Rationals, n).unwrap()
    }
}

/// r + s·ε in T.
fn t_elem(t: &Ring, r: i64, s: i64) -> Elem {
    t.add(&t.from_i64(r), &t.scale(&Q::from_i64(s), &t.eps()))
}

fn nonzero() -> impl Strategy<Value = i64> {
    prop_oneof![-12i64..=-1, 1i64..=12]
}

fn nonsquare() -> impl Strategy<Value = i64> {
    prop_oneof![
        Just(-3i64),
        Just(-2),
        Just(-1),
        Just(2),
        Just(3),
        Just(5),
        Just(6),
        Just(7)
    ]
}

struct NoSplit;

impl TwistSplitter for NoSplit {
    fn split(&self, _: &StructAlgebra) -> Result<AlgElem, AlgebraError> {
        Err(AlgebraError::NotBrauerEquivalent("twist differs".into()))
    }
}

fn random_unit(a: &StructAlgebra, seed: u64) -> AlgElem {
    let mut rng = seeded_rng(seed);
    loop {
        let h: AlgElem = (0..a.dim())
            .map(|_| a.base().random_elem(&mut rng, 3))
            .collect();
        if a.is_unit(&h) {
            return h;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quaternion_algebras_are_associative_and_azumaya(
        n in 1usize..=3, a in nonzero(), sa in -3i64..=3, b in nonzero(), sb in -3i64..=3
    ) {
        let t = base(n);
        let q = quaternion_algebra(&t, &t_elem(&t, a, sa), &t_elem(&t, b, sb)).unwrap();
        prop_assert!(q.check_associative_full().is_ok());
        prop_assert!(is_azumaya(&q));
        prop_assert_eq!(is_azumaya(&q), is_azumaya(&q.residue_algebra()));
    }

    #[test]
    fn swap_and_norm_isomorphisms(a in nonsquare(), b in nonzero(), g0 in -6i64..=6, g1 in -6i64..=6) {
        prop_assume!(g0 != 0 || g1 != 0);
        let k = Ring::field(BaseField::Rationals);
        let (qa, qb) = (k.from_i64(a), k.from_i64(b));
        let ab = quaternion_algebra(&k, &qa, &qb).unwrap();
        let ba = quaternion_algebra(&k, &qb, &qa).unwrap();
        let swap = quaternion_swap_map(&ba);
        prop_assert!(swap.check_multiplicative(&ab, &ba).is_ok());
        prop_assert_eq!(swap.apply(&ab, &ba, &ab.one()), ba.one());

        let (e0, e1) = (k.from_i64(g0), k.from_i64(g1));
        let nb = k.mul(&k.sub(&k.mul(&e0, &e0), &k.mul(&qa, &k.mul(&e1, &e1))), &qb);
        let anb = quaternion_algebra(&k, &qa, &nb).unwrap();
        let f = quaternion_norm_map(&ab, &e0, &e1);
        prop_assert!(f.check_multiplicative(&anb, &ab).is_ok());
        let image = FreeSpan::from_candidates(&k, 4, (0..4).map(|i| f.apply(&anb, &ab, &anb.basis(i)))).unwrap();
        prop_assert_eq!(image.rank(), 4);
    }

    #[test]
    fn crossed_products_recover_b_as_centralizer(
        n in 1usize..=2, r in nonsquare(), a in nonzero(), b in nonzero(), sb in -2i64..=2
    ) {
        let t = base(n);
        let s = Ring::adjoin_sqrts(&t, &[t_elem(&t, r, 1)]).unwrap();
        let bq = quaternion_algebra(&s, &s.embed(&t.from_i64(a)), &s.embed(&t_elem(&t, b, sb))).unwrap();
        let alpha = find_semilinear_iso(&bq, 1, &NoSplit).unwrap();
        prop_assert!(alpha.check_multiplicative(&bq, &bq).is_ok());
        prop_assert!(alpha.check_semilinear(&bq, &bq).is_ok());
        prop_assert_eq!(alpha.apply(&bq, &bq, &bq.one()), bq.one());
        let c = skolem_noether_c(&bq, &alpha, 3).unwrap();
        let a2 = crossed_product_quadratic(&bq, &alpha, &c).unwrap();
        prop_assert!(a2.check_associative().is_ok());
        prop_assert!(is_azumaya(&a2));
        let cen = centralizer(&a2, &[a2.gen("x").unwrap()]).unwrap();
        let x = s.sqrt_gen(0);
        let image = FreeSpan::from_candidates(
            &t,
            a2.dim(),
            (0..bq.dim())
                .flat_map(|k| [bq.basis(k), bq.scale(&x, &bq.basis(k))])
                .map(|v| crossed_product_b_image(&bq, &a2, &v)),
        )
        .unwrap();
        prop_assert!(cen.span.same_span(&image));
    }

    #[test]
    fn conjugated_corners_are_azumaya(n in 1usize..=2, a in nonzero(), b in nonzero(), seed in any::<u64>()) {
        let t = base(n);
        let q = quaternion_algebra(&t, &t.from_i64(a), &t.from_i64(b)).unwrap();
        let m = tensor(&matrix_algebra(&t, 2), &q).unwrap();
        let mut e = m.zero();
        e[0] = t.one();
        let u = random_unit(&m, seed);
        let e = m.mul(&m.mul(&u, &e), &m.inverse(&u).unwrap());
        let cor = corner(&m, &e).unwrap();
        prop_assert_eq!(cor.alg.dim(), 4);
        prop_assert!(cor.alg.check_associative_full().is_ok());
        prop_assert!(is_azumaya(&cor.alg));
    }
}
