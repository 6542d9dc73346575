//! Brute-force solvers, host and stream generators, and the stream format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::CspInstance;
use crate::dp::{prune_dominated, ExactSolver, Interaction, Problem, NEG};
use crate::error::{Error, Result};
use crate::gendom::{interaction, locally_correct, ComponentSolver, DominationInstance};
use crate::graph::DynGraph;
use crate::types::{Cost, EdgeLabel, VertexId, Weight};

pub const MAX_BRUTE_VERTICES: usize = 24;
pub const MAX_BRUTE_PRODUCT: u64 = 1 << 24;

fn vertex_masks(g: &DynGraph) -> Result<(Vec<VertexId>, Vec<u32>, Vec<Weight>)> {
    let ids: Vec<VertexId> = g.vertices().collect();
    if ids.len() > MAX_BRUTE_VERTICES {
        return Err(Error::TooLarge(format!("{} vertices", ids.len())));
    }
    let pos: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks = ids.iter().map(|&v| g.neighbors(v).iter().fold(0u32, |m, w| m | 1 << pos[w])).collect();
    let ws = ids.iter().map(|&v| g.weight(v).unwrap()).collect();
    Ok((ids, masks, ws))
}

/// Maximum weight independent set by subset enumeration.
pub fn brute_mwis(g: &DynGraph) -> Result<Weight> {
    let (ids, nb, ws) = vertex_masks(g)?;
    let n = ids.len();
    let mut best = 0;
    for s in 0u32..(1u32 << n) {
        if (0..n).any(|i| s >> i & 1 == 1 && nb[i] & s != 0) {
            continue;
        }
        best = best.max((0..n).filter(|&i| s >> i & 1 == 1).map(|i| ws[i]).sum());
    }
    Ok(best)
}

/// Minimum weight dominating set by subset enumeration.
pub fn brute_mwds(g: &DynGraph) -> Result<Cost> {
    let (ids, nb, ws) = vertex_masks(g)?;
    let n = ids.len();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = u64::MAX;
    for s in 0u32..=full {
        let mut dom = s;
        for i in 0..n {
            if s >> i & 1 == 1 {
                dom |= nb[i];
            }
        }
        if dom == full {
            best = best.min((0..n).filter(|&i| s >> i & 1 == 1).map(|i| ws[i]).sum());
        }
    }
    Ok(Cost::Finite(best))
}

fn check_product(domains: impl Iterator<Item = u64>) -> Result<()> {
    let mut p: u64 = 1;
    for d in domains {
        p = p.saturating_mul(d);
        if p > MAX_BRUTE_PRODUCT {
            return Err(Error::TooLarge("assignment space exceeds 2^24".into()));
        }
    }
    Ok(())
}

/// Odometer over all total assignments.
fn for_each_assignment(domains: &[usize], mut f: impl FnMut(&[usize])) {
    let n = domains.len();
    if domains.iter().any(|&d| d == 0) {
        return;
    }
    let mut x = vec![0usize; n];
    loop {
        f(&x);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            x[i] += 1;
            if x[i] < domains[i] {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// Maximum revenue of a 2CSP instance by full enumeration.
pub fn brute_csp(inst: &CspInstance) -> Result<Weight> {
    let ids: Vec<VertexId> = inst.vertices().collect();
    check_product(ids.iter().map(|&v| inst.domain_size(v) as u64))?;
    let doms: Vec<usize> = ids.iter().map(|&v| inst.domain_size(v) as usize).collect();
    let mut best = 0;
    for_each_assignment(&doms, |x| {
        let phi: BTreeMap<VertexId, u32> = ids.iter().zip(x).map(|(&v, &a)| (v, a as u32)).collect();
        if let Some(r) = inst.evaluate(&phi).unwrap() {
            best = best.max(r);
        }
    });
    Ok(best)
}

/// Minimum cost of a domination instance by full enumeration.
pub fn brute_domination(inst: &DominationInstance) -> Result<Cost> {
    let ids: Vec<VertexId> = inst.vertices().collect();
    check_product(ids.iter().map(|&v| inst.domain_size(v) as u64))?;
    let doms: Vec<usize> = ids.iter().map(|&v| inst.domain_size(v)).collect();
    let mut best = Cost::Inf;
    for_each_assignment(&doms, |x| {
        let phi: BTreeMap<VertexId, usize> = ids.iter().zip(x).map(|(&v, &a)| (v, a)).collect();
        best = best.min(inst.evaluate(&phi).unwrap());
    });
    Ok(best)
}

/// Enumerates every assignment of a [`Problem`].
#[derive(Clone, Debug, Default)]
pub struct BruteSolver;

impl ExactSolver for BruteSolver {
    fn maximize(&self, p: &Problem) -> Result<Option<i64>> {
        let n = p.num_vars();
        check_product((0..n).map(|u| p.domain(u) as u64))?;
        let doms: Vec<usize> = (0..n).map(|u| p.domain(u) as usize).collect();
        let mut best: Option<i64> = None;
        let mut xs = vec![0u32; n];
        for_each_assignment(&doms, |x| {
            for (a, &b) in xs.iter_mut().zip(x) {
                *a = b as u32;
            }
            if let Some(v) = p.evaluate(&xs) {
                if v > NEG / 2 {
                    best = Some(best.map_or(v, |b| b.max(v)));
                }
            }
        });
        Ok(best)
    }
}

/// Enumerates every valuation of the component.
#[derive(Clone, Debug, Default)]
pub struct BruteComponentSolver;

impl ComponentSolver for BruteComponentSolver {
    fn interactions(
        &self,
        inst: &DominationInstance,
        comp: &BTreeSet<VertexId>,
    ) -> Result<(Vec<EdgeLabel>, HashMap<Interaction, u64>)> {
        let ids: Vec<VertexId> = comp.iter().copied().collect();
        check_product(ids.iter().map(|&v| inst.domain_size(v) as u64))?;
        let doms: Vec<usize> = ids.iter().map(|&v| inst.domain_size(v)).collect();
        let mut edges = vec![];
        let mut table: HashMap<Interaction, u64> = HashMap::new();
        let mut err = None;
        for_each_assignment(&doms, |x| {
            let phi: BTreeMap<VertexId, usize> = ids.iter().zip(x).map(|(&v, &a)| (v, a)).collect();
            let cost = ids.iter().zip(x).fold(Cost::ZERO, |c, (&v, &a)| c + inst.costs(v)[a]);
            let Some(cost) = cost.finite() else { return };
            if !locally_correct(inst, comp, &phi) {
                return;
            }
            match interaction(inst, comp, &phi) {
                Ok((e, code)) => {
                    edges = e;
                    let t = table.entry(code).or_insert(u64::MAX);
                    *t = (*t).min(cost);
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if table.is_empty() {
            let phi: BTreeMap<VertexId, usize> = ids.iter().map(|&v| (v, 0)).collect();
            edges = interaction(inst, comp, &phi)?.0;
        }
        Ok((edges, prune_dominated(table)))
    }
}

/// Planar host families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HostKind {
    /// Near-square grid.
    Grid,
    /// Grid with the given number of columns.
    Strip(usize),
    /// Hamiltonian cycle with non-crossing chords, degree ≤ 4.
    Outerplanar,
    /// Random tree, degree ≤ 4.
    Tree,
}

/// A planar host on `n` vertices with weights in `1..=10`.
pub fn gen_host(kind: HostKind, n: usize, seed: u64) -> DynGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DynGraph::new();
    for i in 0..n {
        g.add_vertex(VertexId(i as u32), rng.gen_range(1..=10)).unwrap();
    }
    let v = |i: usize| VertexId(i as u32);
    match kind {
        HostKind::Grid | HostKind::Strip(_) => {
            let cols = match kind {
                HostKind::Strip(w) => w.max(1),
                _ => ((n as f64).sqrt().ceil() as usize).max(1),
            };
            for i in 0..n {
                if (i + 1) % cols != 0 && i + 1 < n {
                    g.add_edge(v(i), v(i + 1)).unwrap();
                }
                if i + cols < n {
                    g.add_edge(v(i), v(i + cols)).unwrap();
                }
            }
        }
        HostKind::Outerplanar => {
            if n >= 2 {
                for i in 0..n {
                    let j = (i + 1) % n;
                    if g.edge_between(v(i), v(j)).is_none() && i != j {
                        g.add_edge(v(i), v(j)).unwrap();
                    }
                }
            }
            if n >= 4 {
                chords(&mut g, &mut rng, &(0..n).collect::<Vec<_>>());
            }
        }
        HostKind::Tree => {
            for i in 1..n {
                loop {
                    let p = rng.gen_range(0..i);
                    if g.degree(v(p)) < 4 {
                        g.add_edge(v(p), v(i)).unwrap();
                        break;
                    }
                }
            }
        }
    }
    g
}

/// Random non-crossing chords inside the polygon `poly`, by recursive
/// splitting; keeps degrees ≤ 4.
fn chords(g: &mut DynGraph, rng: &mut ChaCha8Rng, poly: &[usize]) {
    if poly.len() < 4 {
        return;
    }
    let v = |i: usize| VertexId(i as u32);
    for _ in 0..4 {
        let a = rng.gen_range(0..poly.len());
        let b = rng.gen_range(0..poly.len());
        let (a, b) = (a.min(b), a.max(b));
        if b - a < 2 || (a == 0 && b == poly.len() - 1) {
            continue;
        }
        let (x, y) = (poly[a], poly[b]);
        if g.degree(v(x)) >= 4 || g.degree(v(y)) >= 4 || g.edge_between(v(x), v(y)).is_some() {
            continue;
        }
        if rng.gen_bool(0.7) {
            g.add_edge(v(x), v(y)).unwrap();
        }
        chords(g, rng, &poly[a..=b]);
        let rest: Vec<usize> = poly[..=a].iter().chain(&poly[b..]).copied().collect();
        chords(g, rng, &rest);
        return;
    }
}

/// One line of an update stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamOp {
    AddEdge(VertexId, VertexId),
    RemoveEdge(VertexId, VertexId),
    UpdateWeight(VertexId, Weight),
    Query,
}

/// A stream over subgraphs of `host`, starting from `host` itself. Removed
/// host edges are the only candidates for insertion.
pub fn gen_stream(host: &DynGraph, ops: usize, seed: u64) -> Vec<StreamOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<(VertexId, VertexId)> = host.edges().map(|(_, u, v)| (u, v)).collect();
    let verts: Vec<VertexId> = host.vertices().collect();
    let mut present: BTreeSet<(VertexId, VertexId)> = all.iter().copied().collect();
    let mut absent: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut out = Vec::with_capacity(ops);
    for _ in 0..ops {
        let r = rng.gen_range(0..10);
        let op = if r < 4 && !present.is_empty() {
            let e = *present.iter().nth(rng.gen_range(0..present.len())).unwrap();
            present.remove(&e);
            absent.insert(e);
            StreamOp::RemoveEdge(e.0, e.1)
        } else if r < 7 && !absent.is_empty() {
            let e = *absent.iter().nth(rng.gen_range(0..absent.len())).unwrap();
            absent.remove(&e);
            present.insert(e);
            StreamOp::AddEdge(e.0, e.1)
        } else if r < 9 && !verts.is_empty() {
            StreamOp::UpdateWeight(*verts.choose(&mut rng).unwrap(), rng.gen_range(0..=10))
        } else {
            StreamOp::Query
        };
        out.push(op);
    }
    out
}

/// Applies a non-query op to a plain graph.
pub fn apply_op(g: &mut DynGraph, op: StreamOp) -> Result<()> {
    match op {
        StreamOp::AddEdge(u, v) => g.add_edge(u, v).map(|_| ()),
        StreamOp::RemoveEdge(u, v) => g.remove_edge_between(u, v).map(|_| ()),
        StreamOp::UpdateWeight(u, w) => g.set_weight(u, w),
        StreamOp::Query => Ok(()),
    }
}

pub fn parse_stream(text: &str) -> Result<Vec<StreamOp>> {
    let mut out = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |j: usize| -> Result<u64> {
            toks.get(j).ok_or_else(|| err("missing argument"))?.parse::<u64>().map_err(|_| err("expected an integer"))
        };
        let vid = |j: usize| -> Result<VertexId> {
            let x = num(j)?;
            u32::try_from(x).map(VertexId).map_err(|_| err("vertex id out of range"))
        };
        let op = match toks[0] {
            "AE" if toks.len() == 3 => StreamOp::AddEdge(vid(1)?, vid(2)?),
            "RE" if toks.len() == 3 => StreamOp::RemoveEdge(vid(1)?, vid(2)?),
            "UW" if toks.len() == 3 => StreamOp::UpdateWeight(vid(1)?, num(2)?),
            "Q" if toks.len() == 1 => StreamOp::Query,
            _ => return Err(err(&format!("unrecognised line `{line}`"))),
        };
        out.push(op);
    }
    Ok(out)
}

pub fn format_stream(ops: &[StreamOp]) -> String {
    let mut s = String::new();
    for op in ops {
        match op {
            StreamOp::AddEdge(u, v) => writeln!(s, "AE {u} {v}"),
            StreamOp::RemoveEdge(u, v) => writeln!(s, "RE {u} {v}"),
            StreamOp::UpdateWeight(u, w) => writeln!(s, "UW {u} {w}"),
            StreamOp::Query => writeln!(s, "Q"),
        }
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cycle(n: u32) -> DynGraph {
        let mut g = DynGraph::new();
        for i in 0..n {
            g.add_vertex(VertexId(i), 1).unwrap();
        }
        for i in 0..n {
            g.add_edge(VertexId(i), VertexId((i + 1) % n)).unwrap();
        }
        g
    }

    #[test]
    fn brute_examples() {
        let g = DynGraph::new();
        assert_eq!(brute_mwis(&g).unwrap(), 0);
        assert_eq!(brute_mwds(&g).unwrap(), Cost::ZERO);
        let mut g = DynGraph::new();
        g.add_vertex(VertexId(0), 5).unwrap();
        g.add_vertex(VertexId(1), 7).unwrap();
        g.add_edge(VertexId(0), VertexId(1)).unwrap();
        assert_eq!(brute_mwis(&g).unwrap(), 7);
        assert_eq!(brute_mwds(&g).unwrap(), Cost::Finite(5));
        let c = unit_cycle(5);
        assert_eq!(brute_mwis(&c).unwrap(), 2);
        assert_eq!(brute_mwds(&c).unwrap(), Cost::Finite(2));
    }

    #[test]
    fn single_vertex_csp() {
        let mut inst = CspInstance::new();
        inst.add_vertex(VertexId(0), vec![0, 4]).unwrap();
        assert_eq!(brute_csp(&inst).unwrap(), 4);
    }

    #[test]
    fn too_large() {
        let mut g = DynGraph::new();
        for i in 0..25 {
            g.add_vertex(VertexId(i), 1).unwrap();
        }
        assert!(matches!(brute_mwis(&g), Err(Error::TooLarge(_))));
    }

    #[test]
    fn grid_3x3() {
        let g = gen_host(HostKind::Grid, 9, 1);
        assert_eq!(g.num_edges(), 12);
    }

    #[test]
    fn hosts_respect_degree() {
        for seed in 0..20 {
            assert!(gen_host(HostKind::Outerplanar, 30, seed).max_degree() <= 4);
            assert!(gen_host(HostKind::Tree, 30, seed).max_degree() <= 4);
        }
    }

    #[test]
    fn stream_roundtrip_and_determinism() {
        let host = gen_host(HostKind::Grid, 16, 3);
        let s = gen_stream(&host, 100, 9);
        assert_eq!(s, gen_stream(&host, 100, 9));
        let text = format_stream(&s);
        assert_eq!(parse_stream(&text).unwrap(), s);
        let mut g = host.clone();
        for &op in &s {
            apply_op(&mut g, op).unwrap();
            for (_, u, v) in g.edges() {
                assert!(host.edge_between(u, v).is_some());
            }
        }
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_stream("# header\nAE 1 2\nXX 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(parse_stream("UW 1 -2").is_err());
    }
}
