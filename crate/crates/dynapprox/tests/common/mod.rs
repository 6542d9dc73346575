#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dynapprox::baker::solve_domination_exact;
use dynapprox::compress::{CspCompression, DomCompression};
use dynapprox::csp::{compress, encode_mwis, equivalent, CspInstance, CspUpdate};
use dynapprox::decomp::{elimination_forest, heuristic_td, verify_forest, EliminationForest};
use dynapprox::dp::{DpSolver, ExactSolver, Problem};
use dynapprox::gendom::{
    check_decent, compress_domination, encode_mwds, equivalent_domination, DominationInstance, DpComponentSolver,
    SlottedMwds,
};
use dynapprox::graph::{components_within, neighborhood, DynGraph};
use dynapprox::hierarchy::{Hierarchy, InstanceRef, Mode};
use dynapprox::oracle::{brute_domination, brute_mwds, brute_mwis, gen_host, HostKind, StreamOp};
use dynapprox::relation::Relation;
use dynapprox::types::{Cost, VertexId, VertexKey};

pub fn v(i: u32) -> VertexId {
    VertexId(i)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn csp_opt(inst: &CspInstance) -> u64 {
    let p = Problem::from_csp(inst, None);
    DpSolver { width_cap: 64, budget: 1 << 36 }.maximize(&p).unwrap().unwrap_or(0).max(0) as u64
}

pub fn dom_opt(inst: &DominationInstance) -> Cost {
    solve_domination_exact(inst, 64, 1 << 36).unwrap()
}

/// Number of valuations the enumeration oracle would visit.
pub fn domain_product(inst: &DominationInstance) -> u64 {
    inst.vertices().fold(1u64, |p, v| p.saturating_mul(inst.domain_size(v) as u64))
}

/// Enumeration when the valuation space is small, the DP optimum otherwise.
pub fn domination_optimum(inst: &DominationInstance) -> Cost {
    if domain_product(inst) <= 1 << 22 {
        brute_domination(inst).unwrap()
    } else {
        dom_opt(inst)
    }
}

/// Exact MWIS: subset enumeration up to 20 vertices, DP above.
pub fn exact_mwis(g: &DynGraph) -> u64 {
    if g.num_vertices() <= 20 {
        brute_mwis(g).unwrap()
    } else {
        csp_opt(&encode_mwis(g))
    }
}

pub fn exact_mwds(g: &DynGraph) -> u64 {
    let c = if g.num_vertices() <= 20 { brute_mwds(g).unwrap() } else { dom_opt(&encode_mwds(g)) };
    c.finite().unwrap()
}

/// `(1−ε)·opt ≤ p ≤ opt`.
pub fn mwis_ok(p: Ratio<u64>, opt: u64, eps: Ratio<u64>) -> bool {
    let opt = Ratio::from_integer(opt);
    p <= opt && p >= (Ratio::from_integer(1) - eps) * opt
}

/// `opt ≤ q ≤ (1+ε)·opt`.
pub fn mwds_ok(q: Ratio<u64>, opt: u64, eps: Ratio<u64>) -> bool {
    let opt = Ratio::from_integer(opt);
    q >= opt && q <= (Ratio::from_integer(1) + eps) * opt
}

/// Checks `(1 − ε'·q/L)·OPT ≤ p ≤ OPT` at every node small enough to solve;
/// `ε' = ε` for MWIS and `δ = ε/(1+ε)` for MWDS.
pub fn check_nodes(h: &Hierarchy, max_vertices: usize) -> Result<usize, String> {
    let eps = h.eps();
    let slack = match h.mode() {
        Mode::Mwis => eps,
        Mode::Mwds { .. } => eps / (Ratio::from_integer(1) + eps),
    };
    let l = h.levels() as u64;
    let mut checked = 0;
    let mut err = None;
    h.visit(&mut |node| {
        if err.is_some() || node.instance.num_vertices() > max_vertices {
            return;
        }
        let opt = match node.instance {
            InstanceRef::Csp(i) => csp_opt(i),
            InstanceRef::Dom(i) => dom_opt(i).finite().unwrap(),
        };
        let factor = Ratio::from_integer(1) - slack * Ratio::new(node.level as u64, l);
        let p = Ratio::from_integer(node.p);
        if p > Ratio::from_integer(opt) || p < factor * Ratio::from_integer(opt) {
            err = Some(format!("level {} node: p = {}, OPT = {opt}", node.level, node.p));
        }
        checked += 1;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(checked),
    }
}

/// Closed neighbourhoods of the layer sets are pairwise disjoint at every
/// domination node.
pub fn check_layers_disjoint(h: &Hierarchy) -> Result<(), String> {
    let mut err = None;
    h.visit(&mut |node| {
        if let InstanceRef::Dom(inst) = node.instance {
            let g = inst.graph();
            let mut seen: BTreeSet<VertexId> = BTreeSet::new();
            for (i, layer) in node.layers.iter().enumerate() {
                let mut closed: BTreeSet<VertexId> = (*layer).clone();
                closed.extend(dynapprox::graph::neighborhood(g, layer));
                if let Some(x) = closed.iter().find(|x| seen.contains(x)) {
                    err.get_or_insert(format!("level {}: vertex {x} shared by layer {i}", node.level));
                }
                seen.extend(closed);
            }
        }
    });
    err.map_or(Ok(()), Err)
}

/// Random nullary relation on `rows × cols`.
pub fn random_relation(r: &mut ChaCha8Rng, rows: u32, cols: u32) -> Relation {
    if rows == 2 && cols == 2 && r.gen_bool(0.5) {
        return Relation::NotBoth;
    }
    let p = r.gen_range(0.2..0.9);
    let bits: Vec<bool> = (0..rows * cols).map(|_| r.gen_bool(p)).collect();
    Relation::table(rows, cols, |a, b| a == 0 || b == 0 || bits[(a * cols + b) as usize])
}

/// A random 2CSP instance over `g`'s Gaifman graph with domains up to `max_dom`.
pub fn random_csp(g: &DynGraph, r: &mut ChaCha8Rng, max_dom: u32) -> CspInstance {
    let mut inst = CspInstance::new();
    for u in g.vertices() {
        let d = r.gen_range(2..=max_dom);
        let mut rev = vec![0];
        rev.extend((1..d).map(|_| r.gen_range(0..=9)));
        inst.add_vertex_keyed(u, rev, VertexKey::Original(u)).unwrap();
    }
    for (_, a, b) in g.edges() {
        let rel = random_relation(r, inst.domain_size(a), inst.domain_size(b));
        inst.add_constraint(a, b, rel).unwrap();
    }
    inst
}

pub fn random_subset(r: &mut ChaCha8Rng, g: &DynGraph, p: f64) -> BTreeSet<VertexId> {
    g.vertices().filter(|_| r.gen_bool(p)).collect()
}

pub fn random_weights(g: &DynGraph, r: &mut ChaCha8Rng) -> DynGraph {
    let mut h = g.clone();
    for u in g.vertices() {
        h.set_weight(u, r.gen_range(0..=10)).unwrap();
    }
    h
}

/// A host on at most `max_n` vertices with some edges dropped and weights in
/// `0..=10`.
pub fn random_small_graph(r: &mut ChaCha8Rng, max_n: usize) -> DynGraph {
    let n = r.gen_range(1..=max_n);
    let kind = [HostKind::Grid, HostKind::Strip(2), HostKind::Outerplanar, HostKind::Tree][r.gen_range(0..4)];
    let mut g = gen_host(kind, n, r.gen());
    let labels: Vec<_> = g.edges().map(|e| e.0).collect();
    for l in labels {
        if r.gen_bool(0.25) {
            g.remove_edge(l).unwrap();
        }
    }
    random_weights(&g, r)
}

/// The next vertex to add to the stash: a forest root or a child of a stash
/// vertex.
fn stash_candidate(r: &mut ChaCha8Rng, f: &EliminationForest, z: &BTreeSet<VertexId>) -> Option<VertexId> {
    let c: Vec<VertexId> =
        f.vertices().iter().copied().filter(|v| !z.contains(v) && f.parent(*v).map_or(true, |p| z.contains(&p))).collect();
    c.choose(r).copied()
}

/// Random updates and stash growth on a random 2CSP instance; after every
/// step the maintained `I★` must match compression from scratch.
pub fn csp_sequence(seed: u64, max_n: usize, len: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    let g = random_small_graph(&mut r, max_n);
    let inst = random_csp(&g, &mut r, 3);
    let td = heuristic_td(inst.graph(), 64).map_err(|e| e.to_string())?;
    let mut c = CspCompression::new(inst, &td).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for step in 0..len {
        let cur = c.current();
        let vs: Vec<VertexId> = cur.vertices().collect();
        let what = r.gen_range(0..6);
        let res = if what == 0 {
            match stash_candidate(&mut r, c.forest(), c.stash()) {
                Some(z) => c.grow_stash(z).map(|_| ()),
                None => continue,
            }
        } else {
            let upd = match what {
                1 => {
                    let u = *vs.choose(&mut r).unwrap();
                    let mut rev = vec![0];
                    rev.extend((1..cur.domain_size(u)).map(|_| r.gen_range(0..=9)));
                    CspUpdate::UpdateRevenue { u, revenue: rev }
                }
                2 | 3 => {
                    let (u, v) = (*vs.choose(&mut r).unwrap(), *vs.choose(&mut r).unwrap());
                    if u == v || cur.relation(u, v).is_some() {
                        continue;
                    }
                    let rel = random_relation(&mut r, cur.domain_size(u), cur.domain_size(v));
                    CspUpdate::AddEdge { u, v, relation: rel }
                }
                4 => {
                    let es: Vec<_> = cur.graph().edges().collect();
                    let Some(&(_, u, v)) = es.choose(&mut r) else { continue };
                    CspUpdate::RemoveEdge { u, v }
                }
                _ => {
                    let id = cur.fresh_id();
                    let d = r.gen_range(2..=3);
                    let mut rev = vec![0];
                    rev.extend((1..d).map(|_| r.gen_range(0..=9)));
                    CspUpdate::AddVertex { id, revenue: rev, key: VertexKey::Original(id) }
                }
            };
            c.apply_update(&upd).map(|_| ())
        };
        res.map_err(|e| format!("seed {seed} step {step}: {e}"))?;
        let scratch = compress(c.current(), c.stash(), &DpSolver::default()).map_err(|e| e.to_string())?;
        if !equivalent(c.star(), &scratch) {
            return Err(format!("seed {seed} step {step}: I★ differs from scratch"));
        }
        compared += 1;
    }
    Ok(compared)
}

/// As [`csp_sequence`] for the slotted MWDS encoding with degree cap 4.
pub fn dom_sequence(seed: u64, max_n: usize, len: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    let mut g = random_small_graph(&mut r, max_n);
    let mut enc = SlottedMwds::new(4);
    let inst = enc.encode(&g).map_err(|e| e.to_string())?;
    let td = heuristic_td(inst.graph(), 64).map_err(|e| e.to_string())?;
    let mut c = DomCompression::new(inst, &td).map_err(|e| e.to_string())?;
    let err = |step: usize, e: dynapprox::Error| format!("seed {seed} step {step}: {e}");
    let mut compared = 0;
    for step in 0..len {
        let vs: Vec<VertexId> = g.vertices().collect();
        let ups = match r.gen_range(0..6) {
            0 => {
                match stash_candidate(&mut r, c.forest(), c.stash()) {
                    Some(z) => c.grow_stash(z).map_err(|e| err(step, e))?,
                    None => continue,
                };
                vec![]
            }
            1 => {
                let u = *vs.choose(&mut r).unwrap();
                let w = r.gen_range(0..=10);
                g.set_weight(u, w).unwrap();
                vec![enc.set_weight(u, w).unwrap()]
            }
            2 | 3 => {
                let (u, v) = (*vs.choose(&mut r).unwrap(), *vs.choose(&mut r).unwrap());
                if u == v || g.edge_between(u, v).is_some() || g.degree(u) >= 4 || g.degree(v) >= 4 {
                    continue;
                }
                g.add_edge(u, v).unwrap();
                enc.add_edge(u, v).unwrap()
            }
            4 => {
                let es: Vec<_> = g.edges().collect();
                let Some(&(l, u, v)) = es.choose(&mut r) else { continue };
                g.remove_edge(l).unwrap();
                enc.remove_edge(u, v).unwrap()
            }
            _ => {
                let id = c.current().fresh_id().max(VertexId(g.max_vertex_id().map_or(0, |m| m.0 + 1)));
                let w = r.gen_range(0..=10);
                g.add_vertex(id, w).unwrap();
                vec![enc.add_vertex(id, w).unwrap()]
            }
        };
        for u in &ups {
            c.apply_update(u).map_err(|e| err(step, e))?;
            let scratch =
                compress_domination(c.current(), c.stash(), &DpComponentSolver::default()).map_err(|e| e.to_string())?;
            if !equivalent_domination(c.star(), &scratch) {
                return Err(format!("seed {seed} step {step}: I★ differs from scratch"));
            }
            compared += 1;
        }
    }
    Ok(compared)
}

/// Degree and domain maxima of `inst`.
pub fn measured_decency(inst: &DominationInstance) -> (usize, usize) {
    let s = inst.vertices().map(|v| inst.graph().degree(v)).max().unwrap_or(0);
    let d = inst.vertices().map(|v| inst.domain_size(v)).max().unwrap_or(0);
    (s, d)
}

/// `(s·t, d + 4^(s·t))`, saturating.
pub fn compressed_bounds(s: usize, d: usize, t: usize) -> (usize, usize) {
    let st = s * t;
    let p = u32::try_from(st).ok().and_then(|e| 4usize.checked_pow(e)).unwrap_or(usize::MAX);
    (st, d.saturating_add(p))
}

/// Largest `|N(C)|` over the components `C` of `G − y`.
pub fn max_boundary(g: &DynGraph, y: &BTreeSet<VertexId>) -> usize {
    let rest: BTreeSet<VertexId> = g.vertices().filter(|v| !y.contains(v)).collect();
    components_within(g, &rest)
        .into_iter()
        .map(|c| neighborhood(g, &c.into_iter().collect()).len())
        .max()
        .unwrap_or(0)
}

/// Checks `I{Y}` for decency with `(s·t, d + 4^(s·t))`, where `I` is
/// `(s, d)`-decent and `t` bounds the component neighbourhoods. The bound
/// needs `s, d, t ≥ 1`: with `t = 0` the vertices of `Y` keep degree `s`.
pub fn compressed_is_decent(inst: &DominationInstance, y: &BTreeSet<VertexId>, star: &DominationInstance) -> Result<(), String> {
    let (s, d) = measured_decency(inst);
    let (s, d) = (s.max(1), d.max(1));
    check_decent(inst, s, d).map_err(|e| format!("input: {e}"))?;
    let (s2, d2) = compressed_bounds(s, d, max_boundary(inst.graph(), y).max(1));
    check_decent(star, s2, d2).map_err(|e| format!("compressed: {e}"))
}

/// For every universe of every node: the child matches compression of the
/// universe from scratch, and (MWDS) the child is decent with the bounds
/// above. Universes with more than `max_vertices` vertices are skipped.
pub fn check_universes(h: &Hierarchy, max_vertices: usize) -> Result<usize, String> {
    let mut checked = 0;
    let mut err = None;
    h.visit(&mut |node| {
        for (i, u) in node.universes.iter().enumerate() {
            if err.is_some() || u.current.num_vertices() > max_vertices {
                continue;
            }
            let at = |e: String| format!("level {} universe {i}: {e}", node.level);
            match (u.current, u.child) {
                (InstanceRef::Csp(cur), InstanceRef::Csp(child)) => match compress(cur, u.stash, &DpSolver::default()) {
                    Ok(s) if equivalent(&s, child) => {}
                    Ok(_) => err = Some(at("child differs from scratch compression".into())),
                    Err(e) => err = Some(at(e.to_string())),
                },
                (InstanceRef::Dom(cur), InstanceRef::Dom(child)) => {
                    match compress_domination(cur, u.stash, &DpComponentSolver::default()) {
                        Ok(s) if equivalent_domination(&s, child) => {}
                        Ok(_) => err = Some(at("child differs from scratch compression".into())),
                        Err(e) => err = Some(at(e.to_string())),
                    }
                    if let Err(e) = compressed_is_decent(cur, u.stash, child) {
                        err.get_or_insert(at(e));
                    }
                }
                _ => unreachable!(),
            }
            checked += 1;
        }
    });
    err.map_or(Ok(checked), Err)
}

/// Replays `ops` (queries skipped), calling `check` after every update.
pub fn replay(
    h: &mut Hierarchy,
    ops: &[StreamOp],
    mut check: impl FnMut(&Hierarchy, usize) -> Result<(), String>,
) -> Result<(), String> {
    for (i, &op) in ops.iter().enumerate() {
        if op == StreamOp::Query {
            continue;
        }
        h.apply(op).map_err(|e| format!("update {i} ({op:?}): {e}"))?;
        check(h, i).map_err(|e| format!("after update {i} ({op:?}): {e}"))?;
    }
    Ok(())
}

fn log2_ceil(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

/// Builds the elimination forest of `g` from a min-fill decomposition and
/// checks height `≤ (3w+3)(2⌈log₂(n+1)⌉+1)`, `|Reach| ≤ 3w+3`, the forest
/// invariants and that non-root vertices with different parents have
/// different `Reach` sets.
pub fn forest_check(g: &DynGraph) -> Result<(), String> {
    let td = heuristic_td(g, 64).map_err(|e| e.to_string())?;
    td.validate(g).map_err(|e| e.to_string())?;
    let w = td.width();
    let f = elimination_forest(g, &td).map_err(|e| e.to_string())?;
    verify_forest(g, &f)?;
    let n = g.num_vertices();
    let bound = (3 * w + 3) * (2 * log2_ceil(n + 1) + 1);
    if f.height() > bound {
        return Err(format!("height {} > {bound} (w = {w}, n = {n})", f.height()));
    }
    if f.max_reach() > 3 * w + 3 {
        return Err(format!("|Reach| = {} > {}", f.max_reach(), 3 * w + 3));
    }
    let nonroot: Vec<_> = f.vertices().iter().copied().filter(|&u| f.parent(u).is_some()).collect();
    let mut by_reach: HashMap<Vec<VertexId>, VertexId> = HashMap::new();
    for &u in &nonroot {
        if let Some(&v) = by_reach.get(&f.reach(u)) {
            if f.parent(u) != f.parent(v) {
                return Err(format!("{u} and {v} share Reach {:?}", f.reach(u)));
            }
        }
        by_reach.insert(f.reach(u), u);
    }
    Ok(())
}
