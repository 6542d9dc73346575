//! The multi-level dynamic structure. A node at level `q ≥ 2` splits its
//! instance into `k` universes by layering, keeps each universe compressed,
//! and hands the compressed instances to `k` children at level `q − 1`.
//! Level-1 nodes recompute a layered static bound after every batch.

use std::collections::BTreeSet;

use num_rational::Ratio;

use crate::baker::{baker_csp_k, baker_domination_k, domination_layer_sets, BakerOptions};
use crate::compress::{relieve_in_universe, CspCompression, DomCompression};
use crate::csp::{CspInstance, CspUpdate};
use crate::decomp::heuristic_td;
use crate::error::{Error, Result};
use crate::gendom::{clear, DomUpdate, DominationInstance, SlottedMwds};
use crate::graph::{bfs_layers, DynGraph};
use crate::oracle::StreamOp;
use crate::relation::Relation;
use crate::types::{Cost, VertexId};

/// Absolute constant in the choice of `L`.
pub const DELTA_ABS: f64 = 0.5;
/// Exponent base constant in the domain recurrences.
pub const C_DOMAIN: u32 = 1;
/// Exponent of `k·log n` in the epoch length.
pub const C_EPOCH: u32 = 1;
/// Default ceiling for any entry of the parameter tables.
pub const TABLE_BUDGET: u128 = 1 << 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Mwis,
    Mwds { delta_cap: usize },
}

#[derive(Clone, Debug)]
pub struct HierarchyConfig {
    pub mode: Mode,
    /// `ε ∈ (0, 1)`.
    pub eps: Ratio<u64>,
    /// Overrides `select_l` and skips the table budget.
    pub force_l: Option<u32>,
    /// Overrides every `τ_q`.
    pub force_tau: Option<u64>,
    /// Width cap for universe decompositions; `None` uses the layer-count rule.
    pub width_cap: Option<usize>,
    pub baker: BakerOptions,
    pub table_budget: u128,
}

impl HierarchyConfig {
    pub fn new(mode: Mode, eps: Ratio<u64>) -> Self {
        HierarchyConfig {
            mode,
            eps,
            force_l: None,
            force_tau: None,
            width_cap: None,
            baker: BakerOptions::default(),
            table_budget: TABLE_BUDGET,
        }
    }
}

fn clamp2(x: f64) -> f64 {
    x.max(2.0)
}

/// Number of levels for `n` vertices.
pub fn select_l(n: usize, eps: Ratio<u64>) -> u32 {
    let e = *eps.numer() as f64 / *eps.denom() as f64;
    let inv_sq = 1.0 / (e * e);
    // n ≤ 2^(2^(1/ε²)) always holds once the inner exponent reaches 64
    if inv_sq >= 64.0 || (n as f64).log2() <= inv_sq.exp2() {
        return 1;
    }
    let ll = clamp2(clamp2(n as f64).log2()).log2();
    let lll = clamp2(ll).log2();
    ((ll / lll * e * DELTA_ABS).floor() as u32).max(1)
}

/// `k = ⌈L/ε⌉` for MWIS; `⌈L/δ⌉` with `δ = ε/(1+ε)` for MWDS.
pub fn layer_count(mode: Mode, l: u32, eps: Ratio<u64>) -> u32 {
    let (a, b) = (*eps.numer(), *eps.denom());
    let x = match mode {
        Mode::Mwis => Ratio::new(l as u64 * b, a),
        Mode::Mwds { .. } => Ratio::new(l as u64 * (a + b), a),
    };
    x.ceil().to_integer() as u32
}

/// `⌊n^(num/den)⌋`.
pub fn floor_root_pow(n: usize, num: u32, den: u32) -> u64 {
    let exact = |x: u64| -> bool {
        // x^den ≤ n^num, saturating
        let lhs = (x as u128).checked_pow(den);
        let rhs = (n as u128).checked_pow(num);
        match (lhs, rhs) {
            (Some(a), Some(b)) => a <= b,
            (None, Some(_)) => false,
            (_, None) => true,
        }
    };
    let mut x = (n as f64).powf(num as f64 / den as f64).floor() as u64;
    while x > 0 && !exact(x) {
        x -= 1;
    }
    while exact(x + 1) {
        x += 1;
    }
    x
}

/// `τ_q = max(1, ⌊n^((q−1)/L) / (k·log₂ n)^c⌋`, indexed by `q − 1`; the
/// entry for `q = 1` is unused and set to 1.
pub fn epoch_lengths(n: usize, l: u32, k: u32) -> Vec<u64> {
    let denom = (k as f64 * clamp2(n as f64).log2()).powi(C_EPOCH as i32);
    (1..=l)
        .map(|q| if q == 1 { 1 } else { ((floor_root_pow(n, q - 1, l) as f64 / denom).floor() as u64).max(1) })
        .collect()
}

/// Per-level parameters, indexed by `q − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTables {
    pub g: Vec<u128>,
    pub s_hat: Vec<u128>,
    pub d_hat: Vec<u128>,
    pub tau: Vec<u64>,
}

/// Domain bounds `g`, decency bounds `ŝ`, `d̂` (MWDS only) and epoch lengths.
pub fn config_tables(n: usize, mode: Mode, l: u32, k: u32, budget: u128) -> Result<LevelTables> {
    let over = |what: &str, q: u32| Error::ParameterOverflow(format!("{what}({q}) exceeds {budget} with L = {l}, k = {k}"));
    let top = l as usize;
    let mut g = vec![0u128; top];
    g[top - 1] = 2;
    for q in (1..l).rev() {
        let v = g[q as usize].checked_pow(C_DOMAIN * k).filter(|&v| v <= budget).ok_or_else(|| over("g", q))?;
        g[q as usize - 1] = v;
    }
    let (mut s_hat, mut d_hat) = (vec![], vec![]);
    if let Mode::Mwds { delta_cap } = mode {
        s_hat = vec![0u128; top];
        d_hat = vec![0u128; top];
        s_hat[top - 1] = delta_cap as u128;
        d_hat[top - 1] = delta_cap as u128 + 1;
        for q in (1..l).rev() {
            let (s, d) = (s_hat[q as usize], d_hat[q as usize]);
            let s1 = s.checked_mul((C_DOMAIN * k) as u128).filter(|&v| v <= budget).ok_or_else(|| over("s", q))?;
            let e = u32::try_from(C_DOMAIN as u128 * s * k as u128).map_err(|_| over("d", q))?;
            let d1 = 4u128
                .checked_pow(e)
                .and_then(|p| p.checked_add(d))
                .filter(|&v| v <= budget)
                .ok_or_else(|| over("d", q))?;
            s_hat[q as usize - 1] = s1;
            d_hat[q as usize - 1] = d1;
        }
    }
    Ok(LevelTables { g, s_hat, d_hat, tau: epoch_lengths(n, l, k) })
}

/// Read-only view of an instance held by some node.
#[derive(Clone, Copy, Debug)]
pub enum InstanceRef<'a> {
    Csp(&'a CspInstance),
    Dom(&'a DominationInstance),
}

impl InstanceRef<'_> {
    pub fn num_vertices(&self) -> usize {
        match self {
            InstanceRef::Csp(i) => i.num_vertices(),
            InstanceRef::Dom(i) => i.num_vertices(),
        }
    }

    pub fn graph(&self) -> &DynGraph {
        match self {
            InstanceRef::Csp(i) => i.graph(),
            InstanceRef::Dom(i) => i.graph(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeView<'a> {
    pub level: u32,
    pub p: u64,
    pub instance: InstanceRef<'a>,
    /// Current layer sets, one per universe; empty at level 1.
    pub layers: Vec<&'a BTreeSet<VertexId>>,
    pub child_sizes: Vec<usize>,
    pub updates_in_epoch: u64,
    pub universes: Vec<UniverseView<'a>>,
}

/// One universe of a node of level ≥ 2.
#[derive(Clone, Debug)]
pub struct UniverseView<'a> {
    /// The universe instance as updated so far.
    pub current: InstanceRef<'a>,
    pub stash: &'a BTreeSet<VertexId>,
    /// The child's instance, equivalent to `current` compressed on `stash`.
    pub child: InstanceRef<'a>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Epoch starts at nodes of level ≥ 2, initial ones included.
    pub epochs: u64,
    pub tau_resets: u64,
    /// Early resets because a child would have outgrown its cap.
    pub size_resets: u64,
    /// Batches that left a child above its cap.
    pub violations: u64,
    /// Children that started an epoch with more than one vertex.
    pub bad_resets: u64,
    /// Largest child instance seen, per child level (index `q − 1`).
    pub max_child_size: Vec<usize>,
    pub relayed: u64,
}

struct Ctx {
    k: u32,
    tau: Vec<u64>,
    /// `⌊n^(q/L)⌋`, indexed by `q − 1`.
    cap: Vec<u64>,
    width_cap: usize,
    baker: BakerOptions,
}

trait Variant {
    type Inst: Clone;
    type Upd: Clone;
    type Comp;

    fn view(i: &Self::Inst) -> InstanceRef<'_>;
    fn size(i: &Self::Inst) -> usize;
    fn apply(i: &mut Self::Inst, u: &Self::Upd) -> Result<()>;
    fn static_value(i: &Self::Inst, k: u32, opts: &BakerOptions) -> Result<u64>;
    fn layers(i: &Self::Inst, k: u32) -> Vec<BTreeSet<VertexId>>;
    fn compressor(i: &Self::Inst, layer: &BTreeSet<VertexId>, cap: usize) -> Result<Self::Comp>;
    fn star(c: &Self::Comp) -> &Self::Inst;
    fn current(c: &Self::Comp) -> &Self::Inst;
    fn stash(c: &Self::Comp) -> &BTreeSet<VertexId>;
    /// Updates to relay into the universe of `layer`, or `None` to leave it
    /// untouched. `i` is the node instance before `u`.
    fn universe_updates(i: &Self::Inst, layer: &mut BTreeSet<VertexId>, u: &Self::Upd) -> Option<Vec<Self::Upd>>;
    fn relay(c: &mut Self::Comp, u: &Self::Upd) -> Result<Vec<Self::Upd>>;
}

struct Mwis;

impl Variant for Mwis {
    type Inst = CspInstance;
    type Upd = CspUpdate;
    type Comp = CspCompression;

    fn view(i: &CspInstance) -> InstanceRef<'_> {
        InstanceRef::Csp(i)
    }

    fn size(i: &CspInstance) -> usize {
        i.num_vertices()
    }

    fn apply(i: &mut CspInstance, u: &CspUpdate) -> Result<()> {
        i.apply(u)
    }

    fn static_value(i: &CspInstance, k: u32, opts: &BakerOptions) -> Result<u64> {
        baker_csp_k(i, k, opts)
    }

    fn layers(i: &CspInstance, k: u32) -> Vec<BTreeSet<VertexId>> {
        let a = bfs_layers(i.graph(), k);
        (0..k).map(|j| a.members(j)).collect()
    }

    fn compressor(i: &CspInstance, layer: &BTreeSet<VertexId>, cap: usize) -> Result<CspCompression> {
        let keep: BTreeSet<VertexId> = i.vertices().filter(|v| !layer.contains(v)).collect();
        let u = i.induced(&keep);
        let td = heuristic_td(u.graph(), cap)?;
        CspCompression::new(u, &td)
    }

    fn star(c: &CspCompression) -> &CspInstance {
        c.star()
    }

    fn current(c: &CspCompression) -> &CspInstance {
        c.current()
    }

    fn stash(c: &CspCompression) -> &BTreeSet<VertexId> {
        c.stash()
    }

    fn universe_updates(_: &CspInstance, layer: &mut BTreeSet<VertexId>, u: &CspUpdate) -> Option<Vec<CspUpdate>> {
        if u.vertices().iter().any(|v| layer.contains(v)) {
            None
        } else {
            Some(vec![u.clone()])
        }
    }

    fn relay(c: &mut CspCompression, u: &CspUpdate) -> Result<Vec<CspUpdate>> {
        c.apply_update(u)
    }
}

struct Mwds;

impl Variant for Mwds {
    type Inst = DominationInstance;
    type Upd = DomUpdate;
    type Comp = DomCompression;

    fn view(i: &DominationInstance) -> InstanceRef<'_> {
        InstanceRef::Dom(i)
    }

    fn size(i: &DominationInstance) -> usize {
        i.num_vertices()
    }

    fn apply(i: &mut DominationInstance, u: &DomUpdate) -> Result<()> {
        i.apply(u)
    }

    fn static_value(i: &DominationInstance, k: u32, opts: &BakerOptions) -> Result<u64> {
        match baker_domination_k(i, k, opts)? {
            Cost::Finite(c) => Ok(c),
            Cost::Inf => Err(Error::Malformed("domination instance has no finite solution".into())),
        }
    }

    fn layers(i: &DominationInstance, k: u32) -> Vec<BTreeSet<VertexId>> {
        domination_layer_sets(i, k)
    }

    fn compressor(i: &DominationInstance, layer: &BTreeSet<VertexId>, cap: usize) -> Result<DomCompression> {
        let u = clear(i, layer);
        let td = heuristic_td(u.graph(), cap)?;
        DomCompression::new(u, &td)
    }

    fn star(c: &DomCompression) -> &DominationInstance {
        c.star()
    }

    fn current(c: &DomCompression) -> &DominationInstance {
        c.current()
    }

    fn stash(c: &DomCompression) -> &BTreeSet<VertexId> {
        c.stash()
    }

    fn universe_updates(
        i: &DominationInstance,
        layer: &mut BTreeSet<VertexId>,
        u: &DomUpdate,
    ) -> Option<Vec<DomUpdate>> {
        let involved = match u {
            DomUpdate::AddVertex { .. } => vec![],
            DomUpdate::AddEdge { u, v, .. } => vec![*u, *v],
            DomUpdate::RemoveEdge { label } => i.graph().endpoints(*label).map(|(a, b)| vec![a, b]).unwrap_or_default(),
            DomUpdate::UpdateCost { u, .. } => vec![*u],
        };
        let mut out = vec![];
        for v in involved {
            if layer.remove(&v) {
                out.extend(relieve_in_universe(i, layer, v));
            }
        }
        out.push(u.clone());
        Some(out)
    }

    fn relay(c: &mut DomCompression, u: &DomUpdate) -> Result<Vec<DomUpdate>> {
        c.apply_update(u)
    }
}

struct Universe<V: Variant> {
    layer: BTreeSet<VertexId>,
    comp: V::Comp,
    child: Box<Node<V>>,
}

struct Node<V: Variant> {
    level: u32,
    inst: V::Inst,
    counter: u64,
    p: u64,
    universes: Vec<Universe<V>>,
}

impl<V: Variant> Node<V> {
    fn new(level: u32, inst: V::Inst, ctx: &Ctx, stats: &mut Stats) -> Result<Self> {
        let mut node = Node { level, inst, counter: 0, p: 0, universes: vec![] };
        node.rebuild(ctx, stats)?;
        Ok(node)
    }

    fn rebuild(&mut self, ctx: &Ctx, stats: &mut Stats) -> Result<()> {
        if self.level == 1 {
            self.p = V::static_value(&self.inst, ctx.k, &ctx.baker)?;
            return Ok(());
        }
        stats.epochs += 1;
        self.counter = 0;
        self.universes.clear();
        for layer in V::layers(&self.inst, ctx.k) {
            let comp = V::compressor(&self.inst, &layer, ctx.width_cap)?;
            let star = V::star(&comp).clone();
            if V::size(&star) > 1 {
                stats.bad_resets += 1;
            }
            let child = Node::new(self.level - 1, star, ctx, stats)?;
            self.universes.push(Universe { layer, comp, child: Box::new(child) });
        }
        self.p = self.universes.iter().map(|u| u.child.p).max().unwrap_or(0);
        Ok(())
    }

    fn apply_batch(&mut self, batch: &[V::Upd], ctx: &Ctx, stats: &mut Stats) -> Result<()> {
        if batch.is_empty() {
            return Ok(());
        }
        if self.level == 1 {
            for u in batch {
                V::apply(&mut self.inst, u)?;
            }
            self.p = V::static_value(&self.inst, ctx.k, &ctx.baker)?;
            return Ok(());
        }
        let cap = ctx.cap[self.level as usize - 2] as usize;
        let mut reset = false;
        let mut out: Vec<Vec<V::Upd>> = vec![vec![]; self.universes.len()];
        for u in batch {
            if !reset {
                for (i, uni) in self.universes.iter_mut().enumerate() {
                    if let Some(list) = V::universe_updates(&self.inst, &mut uni.layer, u) {
                        for x in &list {
                            out[i].extend(V::relay(&mut uni.comp, x)?);
                        }
                    }
                    if V::size(V::star(&uni.comp)) > cap {
                        reset = true;
                    }
                }
                if reset {
                    stats.size_resets += 1;
                }
            }
            V::apply(&mut self.inst, u)?;
            self.counter += 1;
            if !reset && self.counter >= ctx.tau[self.level as usize - 1] {
                reset = true;
                stats.tau_resets += 1;
            }
        }
        if reset {
            return self.rebuild(ctx, stats);
        }
        let lvl = self.level as usize - 2;
        if stats.max_child_size.len() <= lvl {
            stats.max_child_size.resize(lvl + 1, 0);
        }
        for (uni, batch) in self.universes.iter_mut().zip(out) {
            stats.relayed += batch.len() as u64;
            uni.child.apply_batch(&batch, ctx, stats)?;
            let size = V::size(&uni.child.inst);
            if size > cap {
                stats.violations += 1;
            }
            stats.max_child_size[lvl] = stats.max_child_size[lvl].max(size);
        }
        self.p = self.universes.iter().map(|u| u.child.p).max().unwrap_or(0);
        Ok(())
    }

    fn visit(&self, f: &mut dyn FnMut(&NodeView<'_>)) {
        let view = NodeView {
            level: self.level,
            p: self.p,
            instance: V::view(&self.inst),
            layers: self.universes.iter().map(|u| &u.layer).collect(),
            child_sizes: self.universes.iter().map(|u| V::size(&u.child.inst)).collect(),
            updates_in_epoch: self.counter,
            universes: self
                .universes
                .iter()
                .map(|u| UniverseView {
                    current: V::view(V::current(&u.comp)),
                    stash: V::stash(&u.comp),
                    child: V::view(&u.child.inst),
                })
                .collect(),
        };
        f(&view);
        for u in &self.universes {
            u.child.visit(f);
        }
    }
}

enum Root {
    Mwis(Node<Mwis>),
    Mwds(Node<Mwds>, SlottedMwds),
}

/// Dynamic approximate MWIS or MWDS over a fixed vertex set.
pub struct Hierarchy {
    cfg: HierarchyConfig,
    graph: DynGraph,
    levels: u32,
    ctx: Ctx,
    root: Root,
    stats: Stats,
}

impl Hierarchy {
    pub fn new(g: &DynGraph, cfg: HierarchyConfig) -> Result<Self> {
        let eps = cfg.eps;
        if *eps.numer() == 0 || eps >= Ratio::from_integer(1) {
            return Err(Error::InvalidEpsilon(format!("{eps} is not in (0, 1)")));
        }
        if let Mode::Mwds { delta_cap } = cfg.mode {
            if let Some(v) = g.vertices().find(|&v| g.degree(v) > delta_cap) {
                return Err(Error::DegreeCap { vertex: v, cap: delta_cap });
            }
        }
        let n = g.num_vertices();
        let levels = match cfg.force_l {
            Some(l) => l.max(1),
            None => {
                let mut l = select_l(n, eps);
                while l > 1 && config_tables(n, cfg.mode, l, layer_count(cfg.mode, l, eps), cfg.table_budget).is_err() {
                    l -= 1;
                }
                l
            }
        };
        let k = layer_count(cfg.mode, levels, eps);
        let mut tau = epoch_lengths(n, levels, k);
        if let Some(t) = cfg.force_tau {
            tau.iter_mut().for_each(|x| *x = t.max(1));
        }
        let default_cap = match cfg.mode {
            Mode::Mwis => 8 * k as usize + 8,
            Mode::Mwds { .. } => 32 * k as usize + 8,
        };
        let ctx = Ctx {
            k,
            tau,
            cap: (1..=levels).map(|q| floor_root_pow(n, q, levels)).collect(),
            width_cap: cfg.width_cap.unwrap_or(default_cap),
            baker: cfg.baker.clone(),
        };
        let mut stats = Stats::default();
        let edges: Vec<(VertexId, VertexId)> = g.edges().map(|(_, u, v)| (u, v)).collect();
        let root = match cfg.mode {
            Mode::Mwis => {
                let mut inst = CspInstance::new();
                for (v, w) in g.weighted_vertices() {
                    inst.add_vertex(v, vec![0, w])?;
                }
                let mut node = Node::<Mwis>::new(levels, inst, &ctx, &mut stats)?;
                let batch: Vec<CspUpdate> =
                    edges.iter().map(|&(u, v)| CspUpdate::AddEdge { u, v, relation: Relation::NotBoth }).collect();
                node.apply_batch(&batch, &ctx, &mut stats)?;
                Root::Mwis(node)
            }
            Mode::Mwds { delta_cap } => {
                let mut enc = SlottedMwds::new(delta_cap);
                let mut inst = DominationInstance::new();
                for (v, w) in g.weighted_vertices() {
                    inst.apply(&enc.add_vertex(v, w)?)?;
                }
                let mut node = Node::<Mwds>::new(levels, inst, &ctx, &mut stats)?;
                let mut batch = vec![];
                for &(u, v) in &edges {
                    batch.extend(enc.add_edge(u, v)?);
                }
                node.apply_batch(&batch, &ctx, &mut stats)?;
                Root::Mwds(node, enc)
            }
        };
        Ok(Hierarchy { cfg, graph: g.clone(), levels, ctx, root, stats })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn k(&self) -> u32 {
        self.ctx.k
    }

    pub fn mode(&self) -> Mode {
        self.cfg.mode
    }

    pub fn eps(&self) -> Ratio<u64> {
        self.cfg.eps
    }

    /// Epoch length per level, indexed by `q − 1`.
    pub fn epoch_lengths(&self) -> &[u64] {
        &self.ctx.tau
    }

    /// `⌊n^(q/L)⌋`, indexed by `q − 1`.
    pub fn size_caps(&self) -> &[u64] {
        &self.ctx.cap
    }

    pub fn graph(&self) -> &DynGraph {
        &self.graph
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn apply(&mut self, op: StreamOp) -> Result<()> {
        match &mut self.root {
            Root::Mwis(node) => {
                let upd = match op {
                    StreamOp::AddEdge(u, v) => {
                        self.graph.add_edge(u, v)?;
                        CspUpdate::AddEdge { u, v, relation: Relation::NotBoth }
                    }
                    StreamOp::RemoveEdge(u, v) => {
                        self.graph.remove_edge_between(u, v)?;
                        CspUpdate::RemoveEdge { u, v }
                    }
                    StreamOp::UpdateWeight(u, w) => {
                        self.graph.set_weight(u, w)?;
                        CspUpdate::UpdateRevenue { u, revenue: vec![0, w] }
                    }
                    StreamOp::Query => return Ok(()),
                };
                node.apply_batch(&[upd], &self.ctx, &mut self.stats)
            }
            Root::Mwds(node, enc) => {
                let batch = match op {
                    StreamOp::AddEdge(u, v) => {
                        let b = enc.add_edge(u, v)?;
                        self.graph.add_edge(u, v)?;
                        b
                    }
                    StreamOp::RemoveEdge(u, v) => {
                        let b = enc.remove_edge(u, v)?;
                        self.graph.remove_edge_between(u, v)?;
                        b
                    }
                    StreamOp::UpdateWeight(u, w) => {
                        let b = vec![enc.set_weight(u, w)?];
                        self.graph.set_weight(u, w)?;
                        b
                    }
                    StreamOp::Query => return Ok(()),
                };
                node.apply_batch(&batch, &self.ctx, &mut self.stats)
            }
        }
    }

    /// The root bound `p`: a lower bound on OPT for both problems.
    pub fn value(&self) -> u64 {
        match &self.root {
            Root::Mwis(n) => n.p,
            Root::Mwds(n, _) => n.p,
        }
    }

    /// MWIS: `p ∈ [(1−ε)·OPT, OPT]`. MWDS: `p·(1+ε) ∈ [OPT, (1+ε)·OPT]`.
    pub fn query(&self) -> Ratio<u64> {
        let p = self.value();
        match self.cfg.mode {
            Mode::Mwis => Ratio::from_integer(p),
            Mode::Mwds { .. } => {
                let (a, b) = (*self.cfg.eps.numer(), *self.cfg.eps.denom());
                Ratio::new(p * (a + b), b)
            }
        }
    }

    /// Calls `f` on every node, parents before children.
    pub fn visit(&self, f: &mut dyn FnMut(&NodeView<'_>)) {
        match &self.root {
            Root::Mwis(n) => n.visit(f),
            Root::Mwds(n, _) => n.visit(f),
        }
    }
}

impl std::fmt::Debug for Hierarchy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hierarchy")
            .field("mode", &self.cfg.mode)
            .field("levels", &self.levels)
            .field("k", &self.ctx.k)
            .field("value", &self.value())
            .finish()
    }
}
