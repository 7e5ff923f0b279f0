//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use azulift::format;
use azulift_core::algebra::{
    crossed_product_quadratic, hensel_lift_idempotent, quaternion_algebra, rank_one_idempotent,
    scalar_algebra, AlgebraError, AlgebraMap,
};
use azulift_core::arith::factor;
use azulift_core::lift::{
    self, base_ring, lemma3_reduce, random_scenario, LiftCertificate, LiftScenario, Seeds,
};
use azulift_core::symbols::{
    class_of, cor_rewrite, hilbert_symbol, is_split, Place, SymbolClass, SymbolPair,
};
use azulift_core::{seeded_rng, BaseField, Ring, SearchRng, Q};
use rand::Rng;

/// Criterion 1 wall-time limit.
const LIFT_W_LIMIT: Duration = Duration::from_secs(300);
const PERTURBED_LIFTS: usize = 10;
const RANDOM_SCENARIOS: usize = 25;
const PRODUCT_FORMULA_PAIRS: usize = 500;
const BIMULT_TRIPLES: usize = 200;
const NORM_IDENTITY_SAMPLES: usize = 200;
const COR_SAMPLES: usize = 100;
const CROSSED_PAIRS: usize = 50;
const SPLIT_QUATERNIONS: usize = 50;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nonzero_rational(rng: &mut SearchRng, height: i64) -> Q {
    loop {
        let n = rng.gen_range(-height..=height);
        if n != 0 {
            return Q::new(n, rng.gen_range(1..=height));
        }
    }
}

// ---------------------------------------------------------------------------
// 1

fn scenario_w_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/scenario_w.json")
}

fn criterion_1(certs: &mut Vec<Vec<u8>>) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("w.cert.json");
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_azulift"))
        .env_remove("AZULIFT_SEED")
        .args([
            "lift",
            scenario_w_path().to_str().unwrap(),
            "--trunc",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(o.status.code() == Some(0), || {
        format!(
            "exit {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        )
    })?;
    let bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
    let cert = format::parse_certificate(std::str::from_utf8(&bytes).unwrap())
        .map_err(|e| e.to_string())?;
    ensure(cert.scenario == LiftScenario::example_w(3), || {
        "scenario is not W at N = 3".into()
    })?;
    ensure(cert.d.dim() == 64, || format!("rank {}", cert.d.dim()))?;
    let rep = lift::verify_certificate(&cert);
    for name in [
        "D' Azumaya",
        "y' = N(mu23')",
        "a2' y' = N(mu2')",
        "a3' y' = N(mu3')",
        "D' rank 64",
    ] {
        ensure(rep.checks.iter().any(|c| c.name == name && c.pass), || {
            format!("check `{name}` missing or failing")
        })?;
    }
    ensure(rep.all_pass(), || format!("failing: {:?}", rep.failures()))?;
    ensure(elapsed < LIFT_W_LIMIT, || {
        format!("{elapsed:.1?} exceeds {LIFT_W_LIMIT:?}")
    })?;
    certs.push(bytes);
    Ok(format!(
        "exit 0, rank 64, {} checks pass, {:.1?} (limit {:?})",
        rep.checks.len(),
        elapsed,
        LIFT_W_LIMIT
    ))
}

// ---------------------------------------------------------------------------
// 2

fn perturbed_scenarios() -> Vec<LiftScenario> {
    let mut rng = seeded_rng(0xacce_0002);
    (0..PERTURBED_LIFTS)
        .map(|i| {
            let mut sc = LiftScenario::example_w(2 + i % 2);
            sc.seeds = Seeds::random(&mut rng, 5);
            sc.rng_seed = rng.gen();
            sc
        })
        .collect()
}

/// Residues computed from coordinates: the constant term of every T-coordinate.
fn residues_match(cert: &LiftCertificate) -> Result<(), String> {
    let sc = &cert.scenario;
    let w = &cert.witnesses;
    let p = &cert.primed;
    let n = sc.trunc;
    let scalar = |name: &str, x: &azulift_core::Elem, want: &Q| {
        ensure(x.0.len() == n && x.0[0] == *want, || {
            format!("{name}: residue {} ≠ {want}", x.0[0])
        })
    };
    let pair = |name: &str, x: &azulift_core::Elem, want: &(Q, Q)| {
        ensure(
            x.0.len() == 2 * n && x.0[0] == want.0 && x.0[n] == want.1,
            || format!("{name}: residue mismatch"),
        )
    };
    scalar("a1'", &p.a1, &sc.a1)?;
    scalar("a2'", &p.a2, &sc.a2)?;
    scalar("a3'", &p.a3, &sc.a3)?;
    scalar("y'", &p.y, &w.y)?;
    scalar("d'", &p.d, &sc.d)?;
    pair("x2'", &p.x2, &sc.x2)?;
    pair("x3'", &p.x3, &sc.x3)?;
    pair("mu2'", &p.mu2, &w.mu2)?;
    pair("mu3'", &p.mu3, &w.mu3)?;
    pair("mu23'", &p.mu23, &w.mu23)
}

fn lift_bytes(sc: &LiftScenario) -> Result<(LiftCertificate, Vec<u8>), String> {
    let w = lift::derive_witnesses(sc).map_err(|e| e.to_string())?;
    let mut cert = lift::construct_unverified(sc, &w).map_err(|e| e.to_string())?;
    cert.report = lift::verify_certificate(&cert);
    let bytes = format::write_certificate(&cert).into_bytes();
    Ok((cert, bytes))
}

fn criterion_2(certs: &mut Vec<Vec<u8>>) -> Outcome {
    for (i, sc) in perturbed_scenarios().iter().enumerate() {
        let (cert, bytes) = lift_bytes(sc).map_err(|e| format!("seed vector {i}: {e}"))?;
        ensure(!sc.seeds.is_zero(), || format!("seed vector {i} is zero"))?;
        ensure(cert.report.all_pass(), || {
            format!("seed vector {i}: failing {:?}", cert.report.failures())
        })?;
        residues_match(&cert).map_err(|e| format!("seed vector {i}: {e}"))?;
        certs.push(bytes);
    }
    Ok(format!(
        "{PERTURBED_LIFTS} seed vectors at N ∈ {{2, 3}} verify; primed residues equal originals"
    ))
}

// ---------------------------------------------------------------------------
// 3

fn random_scenarios() -> Vec<LiftScenario> {
    let mut rng = seeded_rng(0xacce_0003);
    (0..RANDOM_SCENARIOS)
        .map(|_| random_scenario(&mut rng, 2))
        .collect()
}

fn criterion_3(certs: &mut Vec<Vec<u8>>) -> Outcome {
    for (i, sc) in random_scenarios().iter().enumerate() {
        let v = lift::validate_scenario(sc);
        ensure(v.passed(), || {
            format!("scenario {i} invalid: {:?}", v.failure)
        })?;
        let (cert, bytes) =
            lift_bytes(sc).map_err(|e| format!("scenario {i} (a1 = {}): {e}", sc.a1))?;
        ensure(cert.report.all_pass(), || {
            format!("scenario {i}: failing {:?}", cert.report.failures())
        })?;
        certs.push(bytes);
    }
    Ok(format!("{RANDOM_SCENARIOS}/{RANDOM_SCENARIOS} random admissible scenarios pass validate → lift → verify"))
}

// ---------------------------------------------------------------------------
// 4

fn places_of(qs: &[&Q]) -> BTreeSet<Place> {
    let mut out: BTreeSet<Place> = [Place::Real, Place::Prime(2), Place::Prime(3)].into();
    for q in qs {
        for part in [q.numer(), q.denom()] {
            let n = u64::try_from(part.magnitude()).expect("small values");
            out.extend(factor(n).into_keys().map(Place::Prime));
        }
    }
    out
}

/// Brute force: a primitive solution of z² ≡ a x² + b y² modulo p^k.
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
            let prim = x % p as i64 != 0 || y % p as i64 != 0;
            if (prim && squares[r]) || prim_square[r] {
                return 1;
            }
        }
    }
    -1
}

fn criterion_4() -> Outcome {
    let mut rng = seeded_rng(0xacce_0004);
    for _ in 0..PRODUCT_FORMULA_PAIRS {
        let (a, b) = (
            nonzero_rational(&mut rng, 60),
            nonzero_rational(&mut rng, 60),
        );
        let prod: i32 = places_of(&[&a, &b])
            .into_iter()
            .map(|v| hilbert_symbol(&a, &b, v).unwrap() as i32)
            .product();
        ensure(prod == 1, || {
            format!("product formula fails for ({a}, {b})")
        })?;
        let ram = SymbolPair::new(&a, &b).unwrap().ramification_set();
        ensure(ram.len().is_multiple_of(2), || {
            format!("odd ramification for ({a}, {b})")
        })?;
    }
    for _ in 0..BIMULT_TRIPLES {
        let (a, b1, b2) = (
            nonzero_rational(&mut rng, 40),
            nonzero_rational(&mut rng, 40),
            nonzero_rational(&mut rng, 40),
        );
        let b = b1.mul(&b2);
        for v in places_of(&[&a, &b1, &b2]) {
            let lhs = hilbert_symbol(&a, &b, v).unwrap();
            let rhs = hilbert_symbol(&a, &b1, v).unwrap() * hilbert_symbol(&a, &b2, v).unwrap();
            ensure(lhs == rhs, || {
                format!("bimultiplicativity fails for ({a}, {b1}·{b2}) at {v}")
            })?;
        }
    }
    let vals = [-30i64, -15, -6, -5, -3, -2, -1, 2, 3, 5, 7, 10];
    let mut oracle_checks = 0;
    for &a in &vals {
        for &b in &vals {
            for (p, k) in [(2u64, 6u32), (3, 3), (5, 3)] {
                let got =
                    hilbert_symbol(&Q::from_i64(a), &Q::from_i64(b), Place::Prime(p)).unwrap();
                ensure(got == local_oracle(a, b, p, k), || {
                    format!("({a}, {b})_{p} disagrees with brute force")
                })?;
                oracle_checks += 1;
            }
        }
    }
    Ok(format!(
        "product formula on {PRODUCT_FORMULA_PAIRS} pairs, bimultiplicativity on {BIMULT_TRIPLES} triples, even ramification, {oracle_checks} local symbols match brute force"
    ))
}

// ---------------------------------------------------------------------------
// 5

fn ram_by_symbols(pairs: &[(Q, Q)]) -> BTreeSet<Place> {
    let qs: Vec<&Q> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
    places_of(&qs)
        .into_iter()
        .filter(|&v| {
            pairs
                .iter()
                .map(|(a, b)| hilbert_symbol(a, b, v).unwrap() as i32)
                .product::<i32>()
                == -1
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = seeded_rng(0xacce_0005);
    let mut done = 0;
    while done < NORM_IDENTITY_SAMPLES {
        let a = nonzero_rational(&mut rng, 20);
        let b = nonzero_rational(&mut rng, 20);
        let (u, v) = (
            Q::from_i64(rng.gen_range(-9..=9)),
            Q::from_i64(rng.gen_range(-9..=9)),
        );
        let n = u.mul(&u).sub(&a.mul(&v.mul(&v)));
        if n.is_zero() {
            continue;
        }
        let nb = n.mul(&b);
        let lhs = class_of(&[SymbolPair::new(&a, &b).unwrap()]);
        let rhs = class_of(&[SymbolPair::new(&a, &nb).unwrap()]);
        ensure(lhs == rhs, || {
            format!("class({a}, {b}) ≠ class({a}, N·{b}) with N = {n}")
        })?;
        let direct = ram_by_symbols(&[(a.clone(), b.clone()), (a.clone(), nb.clone())]);
        ensure(direct.is_empty(), || {
            format!("(a,b) + (a,Nb) ramifies at {direct:?} for a = {a}")
        })?;
        done += 1;
    }
    Ok(format!(
        "class(a, b) = class(a, N(γ)b) on {NORM_IDENTITY_SAMPLES} samples"
    ))
}

// ---------------------------------------------------------------------------
// 6

fn criterion_6() -> Outcome {
    let mut rng = seeded_rng(0xacce_0006);
    let k = Ring::field(BaseField::Rationals);
    let mut done = 0;
    while done < COR_SAMPLES {
        let c = rng.gen_range(-10..=10i64);
        if c == 0 || azulift_core::field::rational_sqrt(&Q::from_i64(c)).is_some() {
            continue;
        }
        let s = Ring::adjoin_sqrts(&k, &[k.from_i64(c)]).unwrap();
        let a = nonzero_rational(&mut rng, 10);
        let (u, v) = (
            nonzero_rational(&mut rng, 10),
            Q::new(rng.gen_range(-10..=10), rng.gen_range(1..=10)),
        );
        let b = s.from_base_coords(&[k.from_q(&u), k.from_q(&v)]);
        let cp = cor_rewrite(&s, &s.embed(&k.from_q(&a)), &b).map_err(|e| e.to_string())?;
        let got = class_of(&[cp.residue_pair(&k).map_err(|e| e.to_string())?]);
        let norm = u.mul(&u).sub(&Q::from_i64(c).mul(&v.mul(&v)));
        let expected = ram_by_symbols(&[(a.clone(), norm.clone())]);
        ensure(got.ram() == &expected, || {
            format!("Cor(a = {a}, b = {u} + {v}√{c}) disagrees")
        })?;
        let restricted = cor_rewrite(&s, &s.embed(&k.from_q(&a)), &s.embed(&k.from_q(&u)))
            .map_err(|e| e.to_string())?;
        let twice: SymbolClass =
            class_of(&[restricted.residue_pair(&k).map_err(|e| e.to_string())?]);
        ensure(is_split(&twice), || {
            format!("Cor∘Res of ({a}, {u}) is not trivial")
        })?;
        done += 1;
    }
    Ok(format!("cor_rewrite agrees with norm-symbol oracle on {COR_SAMPLES} samples; Cor∘Res trivial on restricted classes"))
}

// ---------------------------------------------------------------------------
// 7

fn criterion_7() -> Outcome {
    let mut rng = seeded_rng(0xacce_0007);
    for n in [1usize, 3] {
        let t = base_ring(BaseField::Rationals, n).unwrap();
        let mut done = 0;
        while done < CROSSED_PAIRS {
            let a = t.random_unit(&mut rng, 9);
            let b = t.random_unit(&mut rng, 9);
            let Some(ar) = t.residue(&a).0.first().cloned() else {
                continue;
            };
            if azulift_core::field::rational_sqrt(&ar).is_some() {
                continue;
            }
            let s = Ring::adjoin_sqrts(&t, std::slice::from_ref(&a)).unwrap();
            let bs = scalar_algebra(&s);
            let sigma = AlgebraMap {
                images: vec![bs.one()],
                twist: 1,
            };
            let crossed = crossed_product_quadratic(&bs, &sigma, &vec![s.embed(&b)])
                .map_err(|e| e.to_string())?;
            let quat = quaternion_algebra(&t, &a, &b).map_err(|e| e.to_string())?;
            // 1 ↦ 1, i ↦ x, j ↦ u, ij ↦ x u
            let map = AlgebraMap::linear((0..4).map(|i| crossed.basis(i)).collect());
            map.check_multiplicative(&quat, &crossed)
                .map_err(|e| format!("N = {n}: {e}"))?;
            ensure(
                map.apply(&quat, &crossed, &quat.one()) == crossed.one(),
                || "unit not preserved".into(),
            )?;
            ensure(quat == crossed, || {
                format!("N = {n}: structure constants differ for ({a:?}, {b:?})")
            })?;
            done += 1;
        }
    }
    Ok(format!("crossed product (T(√a), σ, b) ≅ (a, b)_T on {CROSSED_PAIRS} pairs over ℚ and over ℚ[ε]/(ε³)"))
}

// ---------------------------------------------------------------------------
// 8

fn criterion_8() -> Outcome {
    let mut rng = seeded_rng(0xacce_0008);
    let k = Ring::field(BaseField::Rationals);
    let t = base_ring(BaseField::Rationals, 3).unwrap();
    let (mut split, mut nonsplit, mut lifted) = (0, 0, 0);
    while split < SPLIT_QUATERNIONS || nonsplit < SPLIT_QUATERNIONS {
        let (a, b) = (
            nonzero_rational(&mut rng, 15),
            nonzero_rational(&mut rng, 15),
        );
        let oracle = ram_by_symbols(&[(a.clone(), b.clone())]).is_empty();
        if (oracle && split >= SPLIT_QUATERNIONS) || (!oracle && nonsplit >= SPLIT_QUATERNIONS) {
            continue;
        }
        let q = quaternion_algebra(&k, &k.from_q(&a), &k.from_q(&b)).unwrap();
        match rank_one_idempotent(&q, rng.gen()) {
            Ok(e) => {
                ensure(oracle, || {
                    format!("({a}, {b}) is non-split but an idempotent was found")
                })?;
                let e = e.elem().clone();
                ensure(q.mul(&e, &e) == e && e != q.zero() && e != q.one(), || {
                    format!("({a}, {b}): bad idempotent")
                })?;
                split += 1;
                let (sa, sb) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4));
                let lift_q =
                    |x: &Q, s: i64| t.add(&t.from_q(x), &t.scale(&Q::from_i64(s), &t.eps()));
                let qt = quaternion_algebra(&t, &lift_q(&a, sa), &lift_q(&b, sb)).unwrap();
                let e0 = qt.lift_residue_elem(&e);
                let h =
                    hensel_lift_idempotent(&qt, &e0).map_err(|err| format!("({a}, {b}): {err}"))?;
                let h = h.elem().clone();
                ensure(qt.mul(&h, &h) == h, || {
                    format!("({a}, {b}): Hensel output not idempotent")
                })?;
                ensure(qt.residue_elem(&h) == e, || {
                    format!("({a}, {b}): Hensel residue changed")
                })?;
                lifted += 1;
            }
            Err(AlgebraError::NotSplit) => {
                ensure(!oracle, || {
                    format!("({a}, {b}) is split but NotSplit was returned")
                })?;
                nonsplit += 1;
            }
            Err(e) => return Err(format!("({a}, {b}): {e}")),
        }
    }
    Ok(format!("{split} split quaternions give idempotents, {nonsplit} non-split give NotSplit, {lifted} Hensel lifts exact over ℚ[ε]/(ε³)"))
}

// ---------------------------------------------------------------------------
// 9

fn criterion_9() -> Outcome {
    let mut rng = seeded_rng(0xacce_0009);
    for n in 1..=64u64 {
        let pairs: Vec<SymbolPair> = (0..rng.gen_range(0..4))
            .map(|_| {
                SymbolPair::new(
                    &nonzero_rational(&mut rng, 30),
                    &nonzero_rational(&mut rng, 30),
                )
                .unwrap()
            })
            .collect();
        let cls = class_of(&pairs);
        let (two, out) = lemma3_reduce(n, &cls);
        let mut m = n;
        while m % 2 == 0 {
            m /= 2;
        }
        ensure(two * m == n && two.is_power_of_two(), || {
            format!("n = {n}: got 2-part {two}")
        })?;
        ensure(out == cls, || format!("n = {n}: class changed"))?;
    }
    Ok("lemma3_reduce degree-correct for n ≤ 64, class unchanged".into())
}

// ---------------------------------------------------------------------------
// 10

fn criterion_10(first: &[Vec<u8>]) -> Outcome {
    let mut again = Vec::new();
    criterion_1(&mut again)?;
    criterion_2(&mut again)?;
    criterion_3(&mut again)?;
    ensure(again.len() == first.len(), || {
        format!("{} certificates vs {}", again.len(), first.len())
    })?;
    for (i, (x, y)) in first.iter().zip(&again).enumerate() {
        ensure(x == y, || format!("certificate {i} differs between runs"))?;
    }
    Ok(format!(
        "{} certificates from criteria 1–3 byte-identical on rerun",
        first.len()
    ))
}

fn report(id: u32, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    });
    let secs = start.elapsed().as_secs_f64();
    match &out {
        Ok(d) => println!("criterion {id:>2} PASS  {title}: {d} [{secs:.1}s]"),
        Err(d) => println!("criterion {id:>2} FAIL  {title}: {d} [{secs:.1}s]"),
    }
    out.is_ok()
}

fn main() {
    let mut certs = Vec::new();
    let mut ok = true;
    ok &= report(1, "end-to-end lift of scenario W", || {
        criterion_1(&mut certs)
    });
    ok &= report(2, "perturbed lifts", || criterion_2(&mut certs));
    ok &= report(3, "randomized scenario suite", || criterion_3(&mut certs));
    ok &= report(4, "symbol calculus", criterion_4);
    ok &= report(5, "norm identity at class level", criterion_5);
    ok &= report(6, "corestriction formula", criterion_6);
    ok &= report(7, "crossed product coherence", criterion_7);
    ok &= report(8, "idempotent machinery", criterion_8);
    ok &= report(9, "degree bookkeeping", criterion_9);
    ok &= report(10, "determinism", || criterion_10(&certs));
    if !ok {
        std::process::exit(1);
    }
}
