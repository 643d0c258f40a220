//! Randomized invariants of the graph, ring and linear-algebra layers.

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use tautring::graph::{automorphism_count, enumerate_graphs, graph_key, is_isomorphic, StableGraph};
use tautring::rational::{rank, solve_linear, RatMatrix, SolveResult, Q};
use tautring::strata::{compositions, decorated_strata};
use tautring::taut::{KunnethClass, TautClass};
use tautring::witten::psi_integral;

const SPACES: [(u32, &[u32]); 4] = [(0, &[1, 2, 3, 4, 5]), (1, &[1, 2]), (1, &[1, 2, 3]), (2, &[1])];

fn dim(g: u32, labels: &[u32]) -> u32 {
    (3 * g as i64 - 3 + labels.len() as i64) as u32
}

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Q::new(BigInt::from(n), BigInt::from(d)))
}

/// A random combination of decorated strata of degree `d` on the space.
fn class_of_degree(space: usize, d: u32) -> impl Strategy<Value = TautClass> {
    let (g, labels) = SPACES[space];
    let strata = decorated_strata(g, labels, d).unwrap();
    let n = strata.len().max(1);
    prop::collection::vec((0..n, small_q()), 1..4).prop_map(move |picks| {
        let mut x = TautClass::zero(g, labels);
        for (i, c) in picks {
            if let Some(s) = strata.get(i) {
                x.add_scaled(s, &c).unwrap();
            }
        }
        x
    })
}

fn any_class() -> impl Strategy<Value = (usize, TautClass)> {
    (0..SPACES.len(), 0u32..=2).prop_flat_map(|(s, d)| {
        let d = d.min(dim(SPACES[s].0, SPACES[s].1));
        class_of_degree(s, d).prop_map(move |x| (s, x))
    })
}

fn graphs() -> Vec<StableGraph> {
    let mut out = Vec::new();
    for (g, n) in [(0, 5), (1, 3), (2, 1), (2, 2), (3, 0)] {
        out.extend(enumerate_graphs(g, n, 3).unwrap());
    }
    out
}

/// The same graph with vertices, edges, edge orientations and legs
/// listed in a different order.
fn shuffled(gr: &StableGraph, vperm: &[usize], eperm: &[usize], flips: &[bool], lperm: &[usize]) -> StableGraph {
    let nv = gr.num_vertices();
    let mut genera = vec![0; nv];
    for v in 0..nv {
        genera[vperm[v]] = gr.genera[v];
    }
    let edges = eperm
        .iter()
        .zip(flips)
        .map(|(&k, &f)| {
            let (a, b) = gr.edges[k];
            if f { (vperm[b], vperm[a]) } else { (vperm[a], vperm[b]) }
        })
        .collect();
    let legs = lperm.iter().map(|&i| (gr.legs[i].0, vperm[gr.legs[i].1])).collect();
    StableGraph::new(genera, legs, edges).unwrap()
}

fn graph_and_shuffle() -> impl Strategy<Value = (StableGraph, StableGraph)> {
    let all = graphs();
    (0..all.len()).prop_flat_map(move |i| {
        let gr = all[i].clone();
        let (nv, ne, nl) = (gr.num_vertices(), gr.num_edges(), gr.legs.len());
        (
            Just((0..nv).collect::<Vec<_>>()).prop_shuffle(),
            Just((0..ne).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(any::<bool>(), ne),
            Just((0..nl).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(move |(vp, ep, fl, lp)| (gr.clone(), shuffled(&gr, &vp, &ep, &fl, &lp)))
    })
}

/// `(g, e)` with the exponents `e` summing to `dim M̄_{g,n} + shift`.
fn psi_exponents(shift: u32) -> impl Strategy<Value = (u32, Vec<u32>)> {
    (0u32..=3, 1u32..=4).prop_filter("stable", |(g, n)| 2 * g + n > 2).prop_flat_map(move |(g, n)| {
        let all = compositions(3 * g + n - 3 + shift, n as usize);
        (0..all.len()).prop_map(move |i| (g, all[i].clone()))
    })
}

fn classes_on_one_space(degrees: [u32; 3]) -> impl Strategy<Value = (usize, [TautClass; 3])> {
    (0..SPACES.len()).prop_flat_map(move |s| {
        let top = dim(SPACES[s].0, SPACES[s].1);
        let d = degrees.map(|d| d.min(top));
        (class_of_degree(s, d[0]), class_of_degree(s, d[1]), class_of_degree(s, d[2])).prop_map(move |(x, y, z)| (s, [x, y, z]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, .. ProptestConfig::default() })]

    #[test]
    fn canonical_form_ignores_presentation((a, b) in graph_and_shuffle()) {
        prop_assert_eq!(graph_key(&a), graph_key(&b));
        prop_assert_eq!(automorphism_count(&a), automorphism_count(&b));
        prop_assert!(is_isomorphic(&a, &b));
    }

    #[test]
    fn string_equation((g, e) in psi_exponents(1)) {
        let mut with = e.clone();
        with.push(0);
        let mut rhs = Q::zero();
        for i in 0..e.len() {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                rhs += psi_integral(g, &f);
            }
        }
        prop_assert_eq!(psi_integral(g, &with), rhs);
    }

    #[test]
    fn dilaton_equation((g, e) in psi_exponents(0)) {
        let mut with = e.clone();
        with.push(1);
        let factor = Q::from_integer(BigInt::from(2 * g as i64 - 2 + e.len() as i64));
        prop_assert_eq!(psi_integral(g, &with), psi_integral(g, &e) * factor);
    }

    #[test]
    fn product_is_commutative((_, [x, y, _]) in classes_on_one_space([1, 2, 0])) {
        prop_assert_eq!(x.product(&y).unwrap(), y.product(&x).unwrap());
    }

    #[test]
    fn product_is_associative((_, [x, y, z]) in classes_on_one_space([1, 1, 1])) {
        let left = x.product(&y).unwrap().product(&z).unwrap();
        let right = x.product(&y.product(&z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn forgetful_pushforward_kills_pullbacks((_, x) in any_class()) {
        let label = x.n() + 1;
        let up = x.pullback_forgetful(label).unwrap();
        prop_assert!(up.pushforward_forgetful(label).unwrap().is_zero());
    }

    #[test]
    fn json_round_trip((_, x) in any_class(), normalized in any::<bool>()) {
        let back = TautClass::from_json(&x.to_json(normalized)).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn boundary_pullback_satisfies_the_projection_formula((s, x) in any_class(), pick in any::<prop::sample::Index>()) {
        let (g, labels) = SPACES[s];
        let graphs: Vec<StableGraph> = enumerate_graphs(g, labels.len() as u32, 1)
            .unwrap()
            .into_iter()
            .filter(|a| a.num_edges() == 1)
            .collect();
        let a = &graphs[pick.index(graphs.len())];
        let pulled: KunnethClass = x.pullback_boundary(a).unwrap();
        let json = pulled.to_json();
        prop_assert_eq!(&KunnethClass::from_json(&json).unwrap().to_json(), &json);
        prop_assert_eq!(pulled.pushforward(), x.product(&TautClass::stratum(a)).unwrap());
    }

    #[test]
    fn boundary_pullback_is_invariant_under_relabeling_the_graph((a, b) in graph_and_shuffle(), k in 1u32..=3) {
        let (g, labels) = (a.total_genus(), a.labels());
        let top = dim(g, &labels);
        let x = TautClass::kappa(g, &labels, k.min(top.max(1)));
        let pa = x.pullback_boundary(&a).unwrap().pushforward();
        let pb = x.pullback_boundary(&b).unwrap().pushforward();
        prop_assert_eq!(pa, pb);
    }

    #[test]
    fn rational_solve_recovers_solutions(
        rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 1..6),
        x in prop::collection::vec(small_q(), 4),
    ) {
        let m = RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Q::from_integer(BigInt::from(v))).collect()).collect()).unwrap();
        let b = m.mul_vec(&x).unwrap();
        match solve_linear(&m, &b).unwrap() {
            SolveResult::Unique(y) => {
                prop_assert_eq!(rank(&m), 4);
                prop_assert_eq!(y, x);
            }
            SolveResult::Underdetermined { particular, kernel } => {
                prop_assert_eq!(m.mul_vec(&particular).unwrap(), b);
                prop_assert_eq!(kernel.len(), 4 - rank(&m));
                for k in kernel {
                    prop_assert!(m.mul_vec(&k).unwrap().iter().all(|v| v.is_zero()));
                }
            }
            SolveResult::Inconsistent => prop_assert!(false, "consistent system reported inconsistent"),
        }
    }
}
