//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL
//! line with its running time; the process fails if any criterion fails.

use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use tautring::covers::{degree_delta_bruteforce, degree_delta_cyclic, Group, HurwitzSpec};
use tautring::ggraph::{enumerate_generic_a_structures, excess_factors};
use tautring::graph::{enumerate_a_structures, enumerate_generic_ab, is_isomorphic, StableGraph};
use tautring::hurwitz::{
    boundary_pullback, diagonal_class, pairing_vector, product_base, pullpush_delta, resolve_terms, solve_by_pairing,
    solve_cycle, CycleDb, CycleRecord, HurwitzCycleRef,
};
use tautring::rational::{q, qi, Q};
use tautring::strata::decorated_strata;
use tautring::taut::{pairing, KunnethClass, TautClass, NODE_LABEL};
use tautring::witten::{cached_psi_keys, psi_integral};

type Outcome = Result<String, String>;

fn sg(genera: Vec<u32>, legs: Vec<(u32, usize)>, edges: Vec<(usize, usize)>) -> StableGraph {
    StableGraph::new(genera, legs, edges).expect("valid stable graph")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn dhat() -> Vec<TautClass> {
    vec![
        TautClass::normalized_stratum(&sg(vec![0, 0, 0], vec![], vec![(0, 0), (0, 1), (1, 2), (1, 2), (2, 2)])),
        TautClass::normalized_stratum(&sg(vec![0, 0, 0], vec![], vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)])),
        TautClass::normalized_stratum(&sg(vec![1, 0, 0, 0], vec![], vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 3)])),
    ]
}

fn delta0() -> TautClass {
    TautClass::normalized_stratum(&sg(vec![2], vec![], vec![(0, 0)]))
}

fn delta1() -> TautClass {
    TautClass::normalized_stratum(&sg(vec![1, 2], vec![], vec![(0, 1)]))
}

fn faber_table() -> Outcome {
    let lambda = TautClass::lambda1(3).map_err(|e| e.to_string())?;
    let expected = [
        [qi(0), qi(0), q(1, 96)],
        [q(-1, 4), qi(0), q(1, 8)],
        [q(1, 8), q(-1, 16), q(-1, 96)],
    ];
    let d = dhat();
    for (i, x) in [lambda, delta0(), delta1()].iter().enumerate() {
        for j in 0..3 {
            let v = pairing(x, &d[j]).map_err(|e| e.to_string())?;
            ensure(v == expected[i][j], format!("entry ({i},{j}) is {v}, expected {}", expected[i][j]))?;
        }
    }
    Ok("9 products exact".into())
}

fn hyperelliptic_pairings() -> Outcome {
    let c = HurwitzCycleRef::parse("H:3:Z2:1^8").map_err(|e| e.to_string())?;
    let v = pairing_vector(&c, &dhat()).map_err(|e| e.to_string())?;
    ensure(v == vec![q(-1, 8), q(3, 16), qi(0)], format!("got {v:?}"))?;
    Ok("(-1/8, 3/16, 0)".into())
}

fn hyperelliptic_class() -> Outcome {
    let c = HurwitzCycleRef::parse("H:3:Z2:1^8").map_err(|e| e.to_string())?;
    let gens = vec![TautClass::kappa(3, &[], 1), delta0(), delta1()];
    let s = solve_by_pairing(&c, 1, &gens, &dhat()).map_err(|e| e.to_string())?;
    ensure(s.is_unique(), "solution not unique")?;
    ensure(s.coefficients == vec![q(3, 4), q(-1, 4), q(-9, 4)], format!("got {:?}", s.coefficients))?;
    let lambda = TautClass::lambda1(3).map_err(|e| e.to_string())?;
    let mut expected = lambda.scaled(&qi(9));
    expected.add_scaled(&delta0(), &qi(-1)).map_err(|e| e.to_string())?;
    expected.add_scaled(&delta1(), &qi(-3)).map_err(|e| e.to_string())?;
    ensure(s.class == expected, "differs from 9λ − δ_0 − 3δ_1")?;
    Ok("3/4 κ_1 − 1/4 δ_0 − 9/4 δ_1".into())
}

fn weierstrass_divisor() -> Outcome {
    let c = HurwitzCycleRef::parse("Wp:2:Z2:1^6:keep=1").map_err(|e| e.to_string())?;
    let s = solve_cycle(&c, 1).map_err(|e| e.to_string())?;
    ensure(s.is_unique(), "solution not unique")?;
    let mut expect = TautClass::psi(2, &[1], 1, 1).scaled(&qi(3));
    let tail = TautClass::normalized_stratum(&sg(vec![1, 1], vec![(1, 0)], vec![(0, 1)]));
    let irr = TautClass::normalized_stratum(&sg(vec![1], vec![(1, 0)], vec![(0, 0)]));
    expect.add_scaled(&tail, &q(-6, 5)).map_err(|e| e.to_string())?;
    expect.add_scaled(&irr, &q(-1, 10)).map_err(|e| e.to_string())?;
    ensure(s.class == expect, format!("got {}", s.class.pretty()))?;
    Ok("3ψ_1 − 6/5 tail − 1/10 irreducible".into())
}

fn chain_sum(sizes: [usize; 3]) -> TautClass {
    let mut seen = BTreeMap::new();
    for code in 0..3usize.pow(8) {
        let mut c = code;
        let mut legs = Vec::new();
        let mut count = [0; 3];
        for l in 1..=8u32 {
            let v = c % 3;
            c /= 3;
            count[v] += 1;
            legs.push((l, v));
        }
        if count != sizes {
            continue;
        }
        let x = TautClass::stratum(&sg(vec![0, 0, 0], legs, vec![(0, 1), (1, 2)]));
        seen.entry(x.keys().cloned().collect::<Vec<_>>()).or_insert(x);
    }
    let mut out = TautClass::zero_n(0, 8);
    for x in seen.values() {
        out.add(x).expect("same space");
    }
    out
}

fn two_loop_pullpush() -> Outcome {
    let c = HurwitzCycleRef::parse("H:3:Z2:1^8").map_err(|e| e.to_string())?;
    let a = sg(vec![1], vec![], vec![(0, 0), (0, 0)]);
    let got = pullpush_delta(&c, &TautClass::normalized_stratum(&a)).map_err(|e| e.to_string())?;
    let (d242, d422) = (chain_sum([2, 4, 2]), chain_sum([2, 2, 4]));
    ensure(d242.len() == 210 && d422.len() == 420, "wrong component counts")?;
    let mut expect = d242.scaled(&qi(2));
    expect.add_scaled(&d422, &qi(2)).map_err(|e| e.to_string())?;
    ensure(got == expect, format!("{} terms, differs from 2 d_242 + 2 d_422", got.len()))?;
    Ok("2 d_{2,4,2} + 2 d_{4,2,2} (630 strata)".into())
}

fn degree_formulas() -> Outcome {
    ensure(degree_delta_cyclic(0, 2, &[1; 6]) == q(1, 2), "hyperelliptic genus 2")?;
    ensure(degree_delta_cyclic(1, 2, &[]) == q(3, 2), "unramified over genus 1")?;
    ensure(degree_delta_cyclic(2, 2, &[]) == q(15, 2), "unramified over genus 2")?;
    let bielliptic = degree_delta_cyclic(1, 2, &[1; 6]);
    ensure(bielliptic == qi(2), format!("bielliptic genus 4 gives {bielliptic}"))?;
    let mut checked = 0;
    for m in 1..=6u64 {
        let g = Group::cyclic(m as usize);
        for gp in 0..=2u32 {
            for b in 0..=4usize {
                let mut xi = vec![0usize; b];
                loop {
                    let xs: Vec<i64> = xi.iter().map(|&x| x as i64).collect();
                    let formula = degree_delta_cyclic(gp, m, &xs);
                    let brute = degree_delta_bruteforce(gp, &g, &xi, u64::MAX).map_err(|e| e.to_string())?;
                    ensure(formula == brute, format!("m={m} g'={gp} xi={xi:?}: {formula} vs {brute}"))?;
                    checked += 1;
                    let Some(i) = xi.iter().position(|&x| (x as u64) < m - 1) else { break };
                    xi[i] += 1;
                    for x in &mut xi[..i] {
                        *x = 0;
                    }
                }
            }
        }
    }
    let s3 = Group::s3();
    let t = s3.element("(01)").map_err(|e| e.to_string())?;
    ensure(degree_delta_bruteforce(0, &s3, &[t; 4], u64::MAX).map_err(|e| e.to_string())? == qi(4), "S_3")?;
    Ok(format!("1/2, 3/2, 15/2, bielliptic 2; {checked} grid points agree; S_3 gives 4"))
}

fn enumeration_counts() -> Outcome {
    let gamma = sg(vec![1, 1, 1], vec![], vec![(0, 1), (0, 1), (1, 2)]);
    let a = sg(vec![2, 1], vec![], vec![(0, 0), (0, 1)]);
    let n = enumerate_a_structures(&gamma, &a).len();
    ensure(n == 4, format!("{n} A-structures"))?;

    let l = sg(vec![3], vec![], vec![(0, 0)]);
    let res = enumerate_generic_ab(&l, &l).map_err(|e| e.to_string())?;
    let shapes = [
        sg(vec![3], vec![], vec![(0, 0)]),
        sg(vec![2, 1], vec![], vec![(0, 1), (0, 1)]),
        sg(vec![2], vec![], vec![(0, 0), (0, 0)]),
    ];
    let counts: Vec<usize> = shapes.iter().map(|s| res.iter().filter(|r| is_isomorphic(&r.graph, s)).count()).collect();
    ensure(counts == vec![2, 4, 1] && res.len() == 7, format!("(A,B) counts {counts:?}"))?;

    let spec = HurwitzSpec::new(3, Group::cyclic(2), vec![1; 8]).map_err(|e| e.to_string())?;
    let a = sg(vec![2], (1..=8).map(|l| (l, 0)).collect(), vec![(0, 0)]);
    let en = enumerate_generic_a_structures(&spec, &a).map_err(|e| e.to_string())?;
    let mut by_shape: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
    for (s, ps) in en.skeletons.iter().zip(&en.placements) {
        let mut g = s.gg.graph.genera.clone();
        g.sort_unstable();
        for p in ps {
            *by_shape.entry(g.clone()).or_insert_with(BigInt::zero) += &p.multiplicity;
        }
    }
    let want: BTreeMap<Vec<u32>, BigInt> = [(vec![0, 2], BigInt::from(56)), (vec![1, 1], BigInt::from(70))].into();
    ensure(by_shape == want, format!("component multiplicities {by_shape:?}"))?;
    Ok("4; (2,4,1); 2·C(8,6) = 56 and C(8,4) = 70".into())
}

fn bielliptic_identity() -> Outcome {
    let b21 = HurwitzCycleRef::parse("B21:2:Z2:1^2:keep=1").map_err(|e| e.to_string())?;
    let solved = solve_cycle(&b21, 2).map_err(|e| e.to_string())?;
    ensure(solved.is_unique(), "B̄_{2,1} not determined")?;
    let db = CycleDb::seeded();
    db.insert(CycleRecord::new(b21, solved.class.clone(), "solved by pairing").map_err(|e| e.to_string())?);
    let h21 = db
        .find(&HurwitzCycleRef::parse("Wp:2:Z2:1^6:keep=1").map_err(|e| e.to_string())?)
        .ok_or("no H̄_{2,1} record")?
        .class;
    let b4 = HurwitzCycleRef::parse("B:4:Z2:1^6").map_err(|e| e.to_string())?;
    let b = sg(vec![2, 2], vec![], vec![(0, 1)]);
    let terms = boundary_pullback(&b4, &b).map_err(|e| e.to_string())?;
    let got = resolve_terms(&b4, &b, &terms, &db).map_err(|e| e.to_string())?;
    let on = |x: &TautClass, v: u32| x.relabel_legs(&|_| NODE_LABEL + v);
    let mut expect = KunnethClass::tensor(&b, &[on(&solved.class, 0), on(&h21, 1)]).map_err(|e| e.to_string())?;
    expect.add(&KunnethClass::tensor(&b, &[on(&h21, 0), on(&solved.class, 1)]).map_err(|e| e.to_string())?);
    ensure(got == expect, "pullback differs from B21⊗H21 + H21⊗B21")?;
    Ok(format!("{} structures; B̄_21⊗H̄_21 + H̄_21⊗B̄_21", terms.len()))
}

fn string_dilaton() -> Result<usize, String> {
    for g in 0..=3u32 {
        for n in 1..=5usize {
            let dim = 3 * g as i64 - 3 + n as i64;
            if dim >= 0 {
                for e in tautring::strata::compositions(dim as u32, n) {
                    psi_integral(g, &e);
                }
            }
        }
    }
    let keys = cached_psi_keys();
    for (g, e) in &keys {
        let n = e.len() as i64;
        if 2 * *g as i64 - 2 + n - 1 <= 0 {
            continue;
        }
        if let Some(i) = e.iter().position(|&x| x == 0) {
            let mut rest = e.clone();
            rest.remove(i);
            let mut sum = Q::zero();
            for j in 0..rest.len() {
                if rest[j] > 0 {
                    let mut r = rest.clone();
                    r[j] -= 1;
                    sum += psi_integral(*g, &r);
                }
            }
            ensure(psi_integral(*g, e) == sum, format!("string equation at {g} {e:?}"))?;
        }
        if let Some(i) = e.iter().position(|&x| x == 1) {
            let mut rest = e.clone();
            rest.remove(i);
            let f = qi(2 * *g as i64 - 2 + n - 1);
            ensure(psi_integral(*g, e) == f * psi_integral(*g, &rest), format!("dilaton equation at {g} {e:?}"))?;
        }
    }
    Ok(keys.len())
}

fn property_suites() -> Outcome {
    let err = |e: tautring::error::Error| e.to_string();
    let keys = string_dilaton()?;

    let mut samples = 0;
    for (g, labels) in [(0u32, vec![1, 2, 3, 4, 5]), (1, vec![1, 2]), (2, vec![1])] {
        let s1 = decorated_strata(g, &labels, 1).map_err(err)?;
        let dim = 3 * g + labels.len() as u32 - 3;
        let s2 = decorated_strata(g, &labels, dim - 2).map_err(err)?;
        for x in s1.iter().take(4) {
            for y in s1.iter().take(4) {
                ensure(x.product(y).map_err(err)? == y.product(x).map_err(err)?, "commutativity")?;
                for z in s2.iter().take(3) {
                    let l = x.product(y).map_err(err)?.product(z).map_err(err)?;
                    let r = x.product(&y.product(z).map_err(err)?).map_err(err)?;
                    ensure(l == r, "associativity")?;
                    samples += 1;
                }
            }
        }
    }

    for (g, labels) in [(0u32, vec![1, 2, 3, 4]), (1, vec![1, 2]), (2, vec![1])] {
        let top = labels.len() as u32 + 1;
        let chi = qi(2 * g as i64 - 2 + labels.len() as i64);
        for d in 0..=2 {
            for x in decorated_strata(g, &labels, d).map_err(err)? {
                let up = x.pullback_forgetful(top).map_err(err)?;
                ensure(up.pushforward_forgetful(top).map_err(err)?.is_zero(), "π_*π^* ≠ 0")?;
                let mut all = labels.clone();
                all.push(top);
                let psi = TautClass::psi(g, &all, top, 1);
                let dil = psi.product(&up).map_err(err)?.pushforward_forgetful(top).map_err(err)?;
                ensure(dil == x.scaled(&chi), "dilaton pushforward")?;
            }
        }
    }

    for (g, n) in [(0u32, 4u32), (1, 1)] {
        let labels: Vec<u32> = (1..=n).collect();
        let delta = diagonal_class(g, n, 2).map_err(err)?;
        let base = product_base(g, &labels, 2);
        let dim = 3 * g + n - 3;
        for d in 0..=dim {
            for e in decorated_strata(g, &labels, d).map_err(err)? {
                for f in decorated_strata(g, &labels, dim - d).map_err(err)? {
                    let t = KunnethClass::tensor(&base, &[e.clone(), f.clone()]).map_err(err)?;
                    let lhs = delta.product(&t).map_err(err)?.evaluate().map_err(err)?;
                    ensure(lhs == pairing(&e, &f).map_err(err)?, format!("diagonal on ({g},{n})"))?;
                }
            }
        }
    }

    let cases = [
        ("H:3:Z2:1^8:keep=1,2,3,4,5,6,7,8", sg(vec![2], (1..=8).map(|l| (l, 0)).collect(), vec![(0, 0)])),
        ("H:3:Z2:1^8", sg(vec![1], vec![], vec![(0, 0), (0, 0)])),
        ("H:3:Z2:1^8", sg(vec![1, 0, 0, 0], vec![], vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 3)])),
        ("B:4:Z2:1^6", sg(vec![2, 2], vec![], vec![(0, 1)])),
        ("Wp:2:Z2:1^6:keep=1", sg(vec![1, 1], vec![(1, 0)], vec![(0, 1)])),
    ];
    let mut structures = 0;
    for (spec, a) in &cases {
        let c = HurwitzCycleRef::parse(spec).map_err(err)?;
        let marked = c.marking_graph(a).map_err(err)?;
        let en = enumerate_generic_a_structures(&c.spec, &marked).map_err(err)?;
        for (h, _) in en.representatives() {
            let ex = excess_factors(&h.gg, &h.f).len();
            let orbits = h.gg.quotient().map_err(err)?.graph.num_edges();
            ensure(orbits + ex == a.num_edges(), format!("excess bookkeeping for {spec}"))?;
            structures += 1;
        }
    }
    Ok(format!("{keys} Witten keys, {samples} product samples, {structures} structures"))
}

fn main() {
    let criteria: Vec<(&str, u64, fn() -> Outcome)> = vec![
        ("1 Faber pairing table on M̄_3", 60, faber_table),
        ("2 hyperelliptic pairing numbers", 120, hyperelliptic_pairings),
        ("3 genus-3 hyperelliptic class", 120, hyperelliptic_class),
        ("4 Weierstrass divisor on M̄_2,1", 300, weierstrass_divisor),
        ("5 two-loop δ-pull-push on M̄_0,8", 60, two_loop_pullpush),
        ("6 degree formulas", 180, degree_formulas),
        ("7 enumeration counts", 60, enumeration_counts),
        ("8 bielliptic boundary identity", 60, bielliptic_identity),
        ("9 property suites", 180, property_suites),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let res = match res {
            Ok(msg) if took > Duration::from_secs(limit) => Err(format!("{msg}, but exceeded {limit} s")),
            r => r,
        };
        match res {
            Ok(msg) => println!("PASS criterion {name} [{:.2}s]: {msg}", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} [{:.2}s]: {msg}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
