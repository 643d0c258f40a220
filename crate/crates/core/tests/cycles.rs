//! Cover-side computations checked against classes stored on the ring side,
//! and the linear systems built from them.

use num_traits::Zero;
use tautring::graph::StableGraph;
use tautring::hurwitz::{
    boundary_constraints, pairing_vector, pullpush_delta_via, solve_constraints, solve_cycle, CycleDb, HurwitzCycleRef,
    Route,
};
use tautring::rational::{q, qi, SolveResult, Q};
use tautring::strata::decorated_strata;
use tautring::taut::{pairing, TautClass};

fn sg(genera: Vec<u32>, legs: Vec<(u32, usize)>, edges: Vec<(usize, usize)>) -> StableGraph {
    StableGraph::new(genera, legs, edges).unwrap()
}

#[derive(Clone, Copy)]
enum Strata {
    All,
    Undecorated,
    UndecoratedOrSmooth,
}

fn complementary(c: &HurwitzCycleRef, which: Strata) -> Vec<TautClass> {
    let dim = 3 * c.spec.g as i64 - 3 + c.n() as i64;
    let d = (dim - c.codim()) as u32;
    let all = decorated_strata(c.spec.g, &c.labels(), d).unwrap();
    let keep = |x: &TautClass| {
        x.terms().all(|(t, _)| match which {
            Strata::All => true,
            Strata::Undecorated => t.is_undecorated(),
            Strata::UndecoratedOrSmooth => t.is_undecorated() || t.graph.num_edges() == 0,
        })
    };
    all.into_iter().filter(|x| keep(x)).collect()
}

fn assert_ring_matches_covers(name: &str, which: Strata) {
    let db = CycleDb::seeded();
    let rec = db.records().into_iter().find(|r| r.cycle.name == name).unwrap();
    let strata = complementary(&rec.cycle, which);
    assert!(!strata.is_empty());
    let covers = pairing_vector(&rec.cycle, &strata).unwrap();
    for (x, v) in strata.iter().zip(&covers) {
        assert_eq!(&pairing(&rec.class, x).unwrap(), v, "{name} against {}", x.pretty());
    }
}

#[test]
fn weierstrass_seed_matches_covers_on_all_decorated_strata() {
    assert_ring_matches_covers("Wp", Strata::All);
}

#[test]
fn conjugate_pair_seed_matches_covers_on_all_decorated_strata() {
    assert_ring_matches_covers("Conj", Strata::All);
}

#[test]
fn hyperelliptic_genus_three_seed_matches_covers_on_boundary_and_smooth_strata() {
    assert_ring_matches_covers("H", Strata::UndecoratedOrSmooth);
}

#[test]
fn marked_weierstrass_genus_three_seed_matches_covers_on_boundary_strata() {
    assert_ring_matches_covers("H310", Strata::Undecorated);
}

#[test]
fn elliptic_seed_is_the_fundamental_class() {
    assert_ring_matches_covers("H110", Strata::All);
}

#[test]
fn direct_and_forgetful_routes_agree() {
    for (spec, which) in [
        ("Wp:2:Z2:1^6:keep=1", Strata::All),
        ("Conj:2:Z2:1^6,0:keep=7,8", Strata::All),
        ("H:3:Z2:1^8", Strata::Undecorated),
    ] {
        let c = HurwitzCycleRef::parse(spec).unwrap();
        for x in complementary(&c, which).iter().step_by(3) {
            let direct = pullpush_delta_via(&c, x, Route::Direct).unwrap();
            let forgetful = pullpush_delta_via(&c, x, Route::Forgetful).unwrap();
            assert_eq!(direct, forgetful, "{spec} on {}", x.pretty());
        }
    }
}

#[test]
fn empty_hurwitz_space_gives_the_zero_class() {
    let c = HurwitzCycleRef::parse("E:2:Z3:1,1,1,2").unwrap();
    assert!(c.spec.degree_delta().unwrap().is_zero());
    let s = solve_cycle(&c, c.codim() as u32).unwrap();
    assert!(s.class.is_zero());
}

#[test]
fn solved_conjugate_pair_class_matches_seed() {
    let db = CycleDb::seeded();
    let c = HurwitzCycleRef::parse("Conj:2:Z2:1^6,0:keep=7,8").unwrap();
    let s = solve_cycle(&c, 1).unwrap();
    let stored = db.find(&c).unwrap().class;
    for x in complementary(&c, Strata::All) {
        assert_eq!(pairing(&s.class, &x).unwrap(), pairing(&stored, &x).unwrap());
    }
}

#[test]
fn divisor_boundary_constraints_contain_the_weierstrass_class() {
    let db = CycleDb::seeded();
    db.set_solve_missing(true);
    let c = HurwitzCycleRef::parse("Wp:2:Z2:1^6:keep=1").unwrap();
    let gens = vec![
        TautClass::psi(2, &[1], 1, 1),
        TautClass::kappa(2, &[1], 1),
        TautClass::normalized_stratum(&sg(vec![1, 1], vec![(1, 0)], vec![(0, 1)])),
        TautClass::normalized_stratum(&sg(vec![1], vec![(1, 0)], vec![(0, 0)])),
    ];
    let graphs = [sg(vec![1, 1], vec![(1, 0)], vec![(0, 1)])];
    let cons = boundary_constraints(&c, 1, &graphs, &gens, &db).unwrap();
    assert!(!cons.is_empty());
    assert!(db.len() > CycleDb::seeded().len());
    let known = [qi(3), qi(0), q(-6, 5), q(-1, 10)];
    for r in &cons {
        let lhs: Q = r.coefficients.iter().zip(&known).map(|(a, b)| a * b).sum();
        assert_eq!(lhs, r.rhs);
    }
    match solve_constraints(&cons, gens.len()).unwrap() {
        SolveResult::Unique(a) => assert_eq!(a, known.to_vec()),
        SolveResult::Underdetermined { .. } => {}
        SolveResult::Inconsistent => panic!("boundary constraints are inconsistent"),
    }
}

#[test]
fn missing_local_classes_are_reported() {
    let db = CycleDb::seeded();
    let c = HurwitzCycleRef::parse("Wp:2:Z2:1^6:keep=1").unwrap();
    let tail = sg(vec![1, 1], vec![(1, 0)], vec![(0, 1)]);
    let err = boundary_constraints(&c, 1, &[tail], &[TautClass::psi(2, &[1], 1, 1)], &db).unwrap_err();
    assert!(matches!(err, tautring::error::Error::MissingDb(_)));
}

#[test]
fn smooth_graph_constraints_reproduce_the_stored_class() {
    let db = CycleDb::seeded();
    let c = HurwitzCycleRef::parse("Wp:2:Z2:1^6:keep=1").unwrap();
    let stored = db.find(&c).unwrap().class;
    let cons = boundary_constraints(&c, 1, &[StableGraph::smooth(2, &[1])], &[stored], &db).unwrap();
    assert!(!cons.is_empty());
    for r in &cons {
        assert_eq!(r.coefficients[0], r.rhs);
    }
}
