mod common;

use std::collections::BTreeSet;

use common::*;
use dynapprox::csp::{compress, equivalent};
use dynapprox::dp::DpSolver;
use dynapprox::gendom::{
    check_decent, clear, compress_domination, encode_mwds, equivalent_domination, DpComponentSolver, SlottedMwds,
};
use dynapprox::oracle::{brute_csp, brute_domination, BruteComponentSolver, BruteSolver};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn csp_compression_keeps_optimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 12);
        let inst = random_csp(&g, &mut r, 3);
        let y = random_subset(&mut r, &g, 0.4);
        let star = compress(&inst, &y, &DpSolver::default()).unwrap();
        prop_assert_eq!(brute_csp(&star).unwrap(), brute_csp(&inst).unwrap());
        let brute = compress(&inst, &y, &BruteSolver).unwrap();
        prop_assert!(equivalent(&star, &brute));
    }

    #[test]
    fn domination_compression_keeps_optimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 10);
        let full = encode_mwds(&g);
        let inst = clear(&full, &random_subset(&mut r, &g, 0.2));
        let y = random_subset(&mut r, &g, 0.4);
        let star = compress_domination(&inst, &y, &DpComponentSolver::default()).unwrap();
        // compressed domains can outgrow enumeration
        prop_assert_eq!(domination_optimum(&star), brute_domination(&inst).unwrap());
        let brute = compress_domination(&inst, &y, &BruteComponentSolver).unwrap();
        prop_assert!(equivalent_domination(&star, &brute));
    }

    #[test]
    fn incremental_csp_matches_scratch(seed in any::<u64>()) {
        let res = csp_sequence(seed, 12, 30);
        prop_assert!(res.is_ok(), "{:?}", res);
    }

    #[test]
    fn incremental_domination_matches_scratch(seed in any::<u64>()) {
        let res = dom_sequence(seed, 10, 30);
        prop_assert!(res.is_ok(), "{:?}", res);
    }
}

#[test]
fn compressing_to_everything_or_nothing() {
    let mut r = rng(5);
    let g = random_small_graph(&mut r, 9);
    let inst = random_csp(&g, &mut r, 3);
    let all: BTreeSet<_> = g.vertices().collect();
    assert!(equivalent(&compress(&inst, &all, &DpSolver::default()).unwrap(), &inst));
    let none = compress(&inst, &BTreeSet::new(), &DpSolver::default()).unwrap();
    assert!(none.num_vertices() <= 1);
    assert_eq!(brute_csp(&none).unwrap(), brute_csp(&inst).unwrap());
}

#[test]
fn slotted_encoding_is_decent_and_exact() {
    for seed in 0..30 {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 9);
        let inst = SlottedMwds::new(4).encode(&g).unwrap();
        check_decent(&inst, 4, 5).unwrap();
        assert_eq!(brute_domination(&inst).unwrap(), brute_domination(&encode_mwds(&g)).unwrap());
    }
}

// Empirical pins for the size and fan-out bounds; the asymptotic constants
// are not explicit. Fan-out is counted per stash step in bag sizes `w + 1`.
const C_SIZE: usize = 2;
const C_FAN: usize = 4;

#[test]
fn star_size_and_batch_length() {
    use dynapprox::compress::CspCompression;
    use dynapprox::csp::{encode_mwis, CspUpdate};
    use dynapprox::decomp::{appendices, heuristic_td};
    use dynapprox::oracle::{gen_host, HostKind};
    use dynapprox::relation::Relation;
    use rand::prelude::*;

    for seed in 0..20u64 {
        let mut r = rng(seed);
        let kind = [HostKind::Grid, HostKind::Tree, HostKind::Outerplanar][seed as usize % 3];
        let g = gen_host(kind, 60, seed);
        let n = g.num_vertices();
        let td = heuristic_td(&g, 64).unwrap();
        let w = td.width().max(1);
        let mut c = CspCompression::new(encode_mwis(&g), &td).unwrap();
        let h = c.forest().height().max(1);
        let log = ((n + 2) as f64).log2().ceil() as usize;
        let edges: Vec<_> = g.edges().collect();
        for t in 1..=10usize {
            let (_, u, v) = edges[r.gen_range(0..edges.len())];
            let upd = if c.current().relation(u, v).is_some() {
                CspUpdate::RemoveEdge { u, v }
            } else {
                CspUpdate::AddEdge { u, v, relation: Relation::NotBoth }
            };
            let batch = c.apply_update(&upd).unwrap();
            let b = td.width() + 1;
            assert!(batch.len() <= C_FAN * b * b * h, "batch {} with w = {w}, h = {h}", batch.len());
            let star = c.star();
            let f = c.forest();
            let reaches: BTreeSet<Vec<_>> =
                appendices(f, c.stash()).unwrap().into_iter().map(|a| f.reach(a)).collect();
            let live = star.vertices().filter(|&x| !star.is_isolated_zero(x)).count();
            assert!(live <= c.stash().len() + reaches.len() + 1, "{live} live vertices");
            assert!(live <= t * C_SIZE * w.pow(3) * log, "|I★| = {live}");
            // contracted domains are bounded by the tuple space of their group
            for x in star.vertices() {
                if let dynapprox::types::VertexKey::Group(s) = star.key(x) {
                    assert!(s.len() <= 3 * td.width() + 3);
                    assert!(star.domain_size(x) as u64 <= 2u64.pow(s.len() as u32) + 1);
                }
            }
        }
    }
}
