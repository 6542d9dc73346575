//! Min Weight Generalized Domination.
//!
//! Every edge end carries, for the endpoint's states, the set of states that
//! supply the edge and the set that demand it. A solution is valid if every
//! demanded edge is supplied by the other endpoint.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::decomp::{elimination_forest_unbalanced, heuristic_td};
use crate::dp::{compute_domination_tables, Interaction, MAX_BOUNDARY};
use crate::error::{Error, Result};
use crate::graph::{components_within, neighborhood, DynGraph};
use crate::types::{Cost, EdgeLabel, VertexId, VertexKey, Weight};

/// Compressed domains up to this many boundary edges keep all `4^|E|` codes.
pub const DENSE_EDGES: usize = 6;

/// Supply and demand sets of one endpoint, as subsets of its states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeEnd {
    pub supply: FixedBitSet,
    pub demand: FixedBitSet,
}

impl EdgeEnd {
    pub fn new(states: usize) -> Self {
        EdgeEnd { supply: FixedBitSet::with_capacity(states), demand: FixedBitSet::with_capacity(states) }
    }

    pub fn from_states(states: usize, supply: &[usize], demand: &[usize]) -> Self {
        let mut e = EdgeEnd::new(states);
        supply.iter().for_each(|&x| e.supply.insert(x));
        demand.iter().for_each(|&x| e.demand.insert(x));
        e
    }

    pub fn relieved(&self) -> Self {
        EdgeEnd { supply: self.supply.clone(), demand: FixedBitSet::with_capacity(self.demand.len()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomUpdate {
    AddVertex { id: VertexId, costs: Vec<Cost>, key: VertexKey },
    AddEdge { label: EdgeLabel, u: VertexId, v: VertexId, u_end: EdgeEnd, v_end: EdgeEnd },
    RemoveEdge { label: EdgeLabel },
    UpdateCost { u: VertexId, costs: Vec<Cost> },
}

#[derive(Clone, Debug, Default)]
pub struct DominationInstance {
    graph: DynGraph,
    costs: BTreeMap<VertexId, Vec<Cost>>,
    keys: BTreeMap<VertexId, VertexKey>,
    // ends in the stored endpoint order
    ends: HashMap<EdgeLabel, [EdgeEnd; 2]>,
}

impl DominationInstance {
    pub fn new() -> Self {
        DominationInstance { graph: DynGraph::new_multigraph(), ..Default::default() }
    }

    pub fn graph(&self) -> &DynGraph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.costs.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.costs.keys().copied()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.costs.contains_key(&v)
    }

    pub fn costs(&self, v: VertexId) -> &[Cost] {
        &self.costs[&v]
    }

    pub fn domain_size(&self, v: VertexId) -> usize {
        self.costs[&v].len()
    }

    pub fn key(&self, v: VertexId) -> VertexKey {
        self.keys.get(&v).cloned().unwrap_or(VertexKey::Original(v))
    }

    pub fn fresh_id(&self) -> VertexId {
        VertexId(self.graph.max_vertex_id().map_or(0, |v| v.0 + 1))
    }

    pub fn add_vertex(&mut self, id: VertexId, costs: Vec<Cost>, key: VertexKey) -> Result<()> {
        if costs.is_empty() {
            return Err(Error::Malformed(format!("vertex {id} has an empty domain")));
        }
        self.graph.add_vertex(id, 0)?;
        self.costs.insert(id, costs);
        if key != VertexKey::Original(id) {
            self.keys.insert(id, key);
        }
        Ok(())
    }

    pub fn set_costs(&mut self, id: VertexId, costs: Vec<Cost>) -> Result<()> {
        let cur = self.costs.get_mut(&id).ok_or(Error::MissingVertex(id))?;
        if cur.len() != costs.len() {
            return Err(Error::Malformed(format!("vertex {id}: domain size changed")));
        }
        *cur = costs;
        Ok(())
    }

    pub fn add_edge(&mut self, label: EdgeLabel, u: VertexId, v: VertexId, u_end: EdgeEnd, v_end: EdgeEnd) -> Result<()> {
        for (x, end) in [(u, &u_end), (v, &v_end)] {
            let d = self.costs.get(&x).ok_or(Error::MissingVertex(x))?.len();
            if end.supply.len() != d || end.demand.len() != d {
                return Err(Error::Malformed(format!("edge {label}: end sets do not match the domain of {x}")));
            }
        }
        self.graph.add_edge_with_label(label, u, v)?;
        self.ends.insert(label, [u_end, v_end]);
        Ok(())
    }

    pub fn remove_edge(&mut self, label: EdgeLabel) -> Result<(VertexId, VertexId)> {
        let ends = self.graph.remove_edge(label)?;
        self.ends.remove(&label);
        Ok(ends)
    }

    pub fn apply(&mut self, upd: &DomUpdate) -> Result<()> {
        match upd {
            DomUpdate::AddVertex { id, costs, key } => self.add_vertex(*id, costs.clone(), key.clone()),
            DomUpdate::AddEdge { label, u, v, u_end, v_end } => {
                self.add_edge(*label, *u, *v, u_end.clone(), v_end.clone())
            }
            DomUpdate::RemoveEdge { label } => self.remove_edge(*label).map(|_| ()),
            DomUpdate::UpdateCost { u, costs } => self.set_costs(*u, costs.clone()),
        }
    }

    /// The end of edge `label` at `u`.
    pub fn end(&self, label: EdgeLabel, u: VertexId) -> &EdgeEnd {
        let (a, _) = self.graph.endpoints(label).expect("unknown edge");
        &self.ends[&label][if a == u { 0 } else { 1 }]
    }

    pub fn other(&self, label: EdgeLabel, u: VertexId) -> VertexId {
        let (a, b) = self.graph.endpoints(label).expect("unknown edge");
        if a == u {
            b
        } else {
            a
        }
    }

    #[inline]
    pub fn supplies(&self, label: EdgeLabel, u: VertexId, x: usize) -> bool {
        self.end(label, u).supply.contains(x)
    }

    #[inline]
    pub fn demands(&self, label: EdgeLabel, u: VertexId, x: usize) -> bool {
        self.end(label, u).demand.contains(x)
    }

    /// Whether states `xu` of `u` and `xv` of `v` satisfy edge `label`.
    pub fn edge_ok(&self, label: EdgeLabel, u: VertexId, xu: usize, v: VertexId, xv: usize) -> bool {
        let (eu, ev) = (self.end(label, u), self.end(label, v));
        (!eu.demand.contains(xu) || ev.supply.contains(xv)) && (!ev.demand.contains(xv) || eu.supply.contains(xu))
    }

    /// Cost of a total valuation, `Inf` if some demand is unmet.
    pub fn evaluate(&self, phi: &BTreeMap<VertexId, usize>) -> Result<Cost> {
        let mut total = Cost::ZERO;
        for (&v, costs) in &self.costs {
            let &x = phi.get(&v).ok_or(Error::MissingVertex(v))?;
            let c = costs.get(x).ok_or(Error::OutOfDomain { vertex: v, value: x as u32 })?;
            total = total + *c;
        }
        for (l, u, v) in self.graph.edges() {
            if !self.edge_ok(l, u, phi[&u], v, phi[&v]) {
                return Ok(Cost::Inf);
            }
        }
        Ok(total)
    }

    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> DominationInstance {
        let mut out = DominationInstance::new();
        for &v in keep {
            if let Some(c) = self.costs.get(&v) {
                out.add_vertex(v, c.clone(), self.key(v)).unwrap();
            }
        }
        for (l, u, v) in self.graph.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                let [a, b] = self.ends[&l].clone();
                out.add_edge(l, u, v, a, b).unwrap();
            }
        }
        out
    }

    pub fn is_isolated_free(&self, v: VertexId) -> bool {
        self.graph.degree(v) == 0 && self.costs[&v].iter().min() == Some(&Cost::ZERO)
    }

    /// Supply and demand masks of state `x` over the incident edges of `u`
    /// in ascending label order.
    fn masks(&self, u: VertexId, labels: &[EdgeLabel], x: usize) -> (u128, u128) {
        let (mut s, mut d) = (0u128, 0u128);
        for (i, &l) in labels.iter().enumerate() {
            let e = self.end(l, u);
            if e.supply.contains(x) {
                s |= 1 << i;
            }
            if e.demand.contains(x) {
                d |= 1 << i;
            }
        }
        (s, d)
    }

    fn incident_sorted(&self, u: VertexId) -> Vec<EdgeLabel> {
        let mut ls: Vec<EdgeLabel> = self.graph.incident(u).iter().map(|&(_, l)| l).collect();
        ls.sort();
        ls
    }
}

/// `D_u = N[u]`: state 0 is `u` itself (cost `w`, supplies every edge), state
/// `i ≥ 1` is the `i`-th neighbour in ascending order (cost 0, demands that
/// edge).
pub fn encode_mwds(g: &DynGraph) -> DominationInstance {
    let mut inst = DominationInstance::new();
    let nbrs: HashMap<VertexId, Vec<VertexId>> = g.vertices().map(|v| (v, g.neighbors(v))).collect();
    for (v, w) in g.weighted_vertices() {
        let mut costs = vec![Cost::ZERO; 1 + nbrs[&v].len()];
        costs[0] = Cost::Finite(w);
        inst.add_vertex(v, costs, VertexKey::Original(v)).unwrap();
    }
    let end = |u: VertexId, v: VertexId| {
        let i = nbrs[&u].binary_search(&v).unwrap();
        EdgeEnd::from_states(1 + nbrs[&u].len(), &[0], &[1 + i])
    };
    for (l, u, v) in g.edges() {
        inst.add_edge(l, u, v, end(u, v), end(v, u)).unwrap();
    }
    inst
}

/// Dynamic MWDS encoding with `cap + 1` states per vertex: state 0 takes the
/// vertex, state `i` is slot `i`, bound to one incident edge. Unused slots
/// cost `Inf`.
#[derive(Clone, Debug)]
pub struct SlottedMwds {
    cap: usize,
    weight: BTreeMap<VertexId, Weight>,
    slots: HashMap<VertexId, Vec<Option<EdgeLabel>>>,
    label: HashMap<(VertexId, VertexId), EdgeLabel>,
    next: u64,
}

impl SlottedMwds {
    pub fn new(cap: usize) -> Self {
        SlottedMwds { cap, weight: BTreeMap::new(), slots: HashMap::new(), label: HashMap::new(), next: 0 }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn costs(&self, v: VertexId) -> Vec<Cost> {
        let mut c = vec![Cost::Finite(self.weight[&v])];
        c.extend(self.slots[&v].iter().map(|s| if s.is_some() { Cost::ZERO } else { Cost::Inf }));
        c
    }

    pub fn add_vertex(&mut self, v: VertexId, w: Weight) -> Result<DomUpdate> {
        if self.weight.insert(v, w).is_some() {
            return Err(Error::DuplicateVertex(v));
        }
        self.slots.insert(v, vec![None; self.cap]);
        Ok(DomUpdate::AddVertex { id: v, costs: self.costs(v), key: VertexKey::Original(v) })
    }

    pub fn set_weight(&mut self, v: VertexId, w: Weight) -> Result<DomUpdate> {
        *self.weight.get_mut(&v).ok_or(Error::MissingVertex(v))? = w;
        Ok(DomUpdate::UpdateCost { u: v, costs: self.costs(v) })
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<Vec<DomUpdate>> {
        for x in [u, v] {
            if !self.weight.contains_key(&x) {
                return Err(Error::MissingVertex(x));
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let key = (u.min(v), u.max(v));
        if self.label.contains_key(&key) {
            return Err(Error::DuplicateEdge(u, v));
        }
        let free = |s: &[Option<EdgeLabel>], x: VertexId| {
            s.iter().position(|e| e.is_none()).ok_or(Error::DegreeCap { vertex: x, cap: self.cap })
        };
        let su = free(&self.slots[&u], u)?;
        let sv = free(&self.slots[&v], v)?;
        let l = EdgeLabel(self.next);
        self.next += 1;
        self.label.insert(key, l);
        self.slots.get_mut(&u).unwrap()[su] = Some(l);
        self.slots.get_mut(&v).unwrap()[sv] = Some(l);
        let d = self.cap + 1;
        Ok(vec![
            DomUpdate::AddEdge {
                label: l,
                u,
                v,
                u_end: EdgeEnd::from_states(d, &[0], &[1 + su]),
                v_end: EdgeEnd::from_states(d, &[0], &[1 + sv]),
            },
            DomUpdate::UpdateCost { u, costs: self.costs(u) },
            DomUpdate::UpdateCost { u: v, costs: self.costs(v) },
        ])
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<Vec<DomUpdate>> {
        let l = self.label.remove(&(u.min(v), u.max(v))).ok_or(Error::MissingEdge(u, v))?;
        for x in [u, v] {
            for s in self.slots.get_mut(&x).unwrap() {
                if *s == Some(l) {
                    *s = None;
                }
            }
        }
        Ok(vec![
            DomUpdate::RemoveEdge { label: l },
            DomUpdate::UpdateCost { u, costs: self.costs(u) },
            DomUpdate::UpdateCost { u: v, costs: self.costs(v) },
        ])
    }

    /// Encodes `g` from scratch; `g` must respect the degree cap.
    pub fn encode(&mut self, g: &DynGraph) -> Result<DominationInstance> {
        let mut inst = DominationInstance::new();
        for (v, w) in g.weighted_vertices() {
            inst.apply(&self.add_vertex(v, w)?)?;
        }
        for (_, u, v) in g.edges() {
            for upd in self.add_edge(u, v)? {
                inst.apply(&upd)?;
            }
        }
        Ok(inst)
    }
}

/// `Clear(I; A)`: drops edges inside `A` and relieves every vertex of `A`.
pub fn clear(inst: &DominationInstance, a: &BTreeSet<VertexId>) -> DominationInstance {
    let mut out = inst.clone();
    for (l, u, v) in inst.graph.edges() {
        let (iu, iv) = (a.contains(&u), a.contains(&v));
        if iu && iv {
            out.remove_edge(l).unwrap();
        } else if iu || iv {
            let ends = out.ends.get_mut(&l).unwrap();
            let i = if iu { 0 } else { 1 };
            ends[i] = ends[i].relieved();
        }
    }
    out
}

/// Checks that every vertex is `(s, d)`-meager, state-monotonous and has a
/// finite-cost state supplying all its edges.
pub fn check_decent(inst: &DominationInstance, s: usize, d: usize) -> std::result::Result<(), String> {
    for u in inst.vertices() {
        let deg = inst.graph.degree(u);
        let dom = inst.domain_size(u);
        if deg > s || dom > d {
            return Err(format!("vertex {u}: degree {deg}, domain {dom}, bound ({s}, {d})"));
        }
        if deg > 128 {
            return Err(format!("vertex {u}: degree {deg} too large to check"));
        }
        let labels = inst.incident_sorted(u);
        let full: u128 = if deg == 128 { u128::MAX } else { (1u128 << deg) - 1 };
        let masks: Vec<(u128, u128)> = (0..dom).map(|x| inst.masks(u, &labels, x)).collect();
        let costs = inst.costs(u);
        if !(0..dom).any(|x| masks[x].0 == full && costs[x].is_finite()) {
            return Err(format!("vertex {u}: no finite state supplies every edge"));
        }
        // states with equal masks differ only in cost; the cheapest is the
        // binding one on either side of a pair
        let mut class: BTreeMap<(u128, u128), (Cost, usize)> = BTreeMap::new();
        for (x, &m) in masks.iter().enumerate() {
            let e = class.entry(m).or_insert((costs[x], x));
            if costs[x] < e.0 {
                *e = (costs[x], x);
            }
        }
        let mut by_supply: BTreeMap<u128, Vec<(u128, Cost)>> = BTreeMap::new();
        let mut cheapest_supply: BTreeMap<u128, (Cost, usize)> = BTreeMap::new();
        for (&(su, de), &(c, x)) in &class {
            by_supply.entry(su).or_default().push((de, c));
            let e = cheapest_supply.entry(su).or_insert((c, x));
            if c < e.0 {
                *e = (c, x);
            }
        }
        let mut memo: HashMap<(u128, u128), Option<Cost>> = HashMap::new();
        for (&(s1, d1), &(c1, x1)) in &class {
            for (&s2, &(c2, x2)) in &cheapest_supply {
                let target = s1 | s2;
                let best = *memo.entry((target, d1)).or_insert_with(|| {
                    by_supply
                        .get(&target)
                        .and_then(|v| v.iter().filter(|&&(de, _)| de & !d1 == 0).map(|&(_, c)| c).min())
                });
                match best {
                    Some(c) if c <= c1 + c2 => {}
                    _ => return Err(format!("vertex {u}: states {x1}, {x2} have no combination")),
                }
            }
        }
    }
    Ok(())
}

/// The cheapest combination of `x1` with `x2` at `u`.
pub fn combine_states(inst: &DominationInstance, u: VertexId, x1: usize, x2: usize) -> Result<usize> {
    let labels = inst.incident_sorted(u);
    let (s1, d1) = inst.masks(u, &labels, x1);
    let (s2, _) = inst.masks(u, &labels, x2);
    let costs = inst.costs(u);
    let bound = costs[x1] + costs[x2];
    (0..inst.domain_size(u))
        .filter(|&x| {
            let (s, d) = inst.masks(u, &labels, x);
            s == s1 | s2 && d & !d1 == 0 && costs[x] <= bound
        })
        .min_by_key(|&x| (costs[x], x))
        .ok_or(Error::NoCombination { vertex: u, x1, x2 })
}

/// The boundary edges of `r` (ascending label) and the interaction of `phi`
/// with the rest of the graph.
pub fn interaction(
    inst: &DominationInstance,
    r: &BTreeSet<VertexId>,
    phi: &BTreeMap<VertexId, usize>,
) -> Result<(Vec<EdgeLabel>, Interaction)> {
    let mut edges: Vec<(EdgeLabel, VertexId)> = vec![];
    for &u in r {
        for &(w, l) in inst.graph.incident(u) {
            if !r.contains(&w) {
                edges.push((l, u));
            }
        }
    }
    edges.sort();
    if edges.len() > MAX_BOUNDARY {
        return Err(Error::TooLarge(format!("{} boundary edges", edges.len())));
    }
    let mut code: Interaction = 0;
    for (i, &(l, u)) in edges.iter().enumerate() {
        let &x = phi.get(&u).ok_or(Error::MissingVertex(u))?;
        if inst.supplies(l, u, x) {
            code |= 1 << (2 * i);
        }
        if inst.demands(l, u, x) {
            code |= 2 << (2 * i);
        }
    }
    Ok((edges.into_iter().map(|e| e.0).collect(), code))
}

/// Whether `phi` (on `r`) satisfies every edge inside `r`.
pub fn locally_correct(inst: &DominationInstance, r: &BTreeSet<VertexId>, phi: &BTreeMap<VertexId, usize>) -> bool {
    inst.graph.edges().all(|(l, u, v)| !(r.contains(&u) && r.contains(&v)) || inst.edge_ok(l, u, phi[&u], v, phi[&v]))
}

/// Minimum cost of a locally correct valuation of a connected vertex set, per
/// interaction with its neighbourhood.
pub trait ComponentSolver {
    fn interactions(
        &self,
        inst: &DominationInstance,
        comp: &BTreeSet<VertexId>,
    ) -> Result<(Vec<EdgeLabel>, HashMap<Interaction, u64>)>;
}

/// Interaction DP over a min-fill elimination forest of the component.
#[derive(Clone, Debug)]
pub struct DpComponentSolver {
    pub width_cap: usize,
}

impl Default for DpComponentSolver {
    fn default() -> Self {
        DpComponentSolver { width_cap: 64 }
    }
}

impl ComponentSolver for DpComponentSolver {
    fn interactions(
        &self,
        inst: &DominationInstance,
        comp: &BTreeSet<VertexId>,
    ) -> Result<(Vec<EdgeLabel>, HashMap<Interaction, u64>)> {
        let sub = inst.graph.induced(comp);
        let td = heuristic_td(&sub, self.width_cap)?;
        let f = elimination_forest_unbalanced(&sub, &td)?;
        let t = compute_domination_tables(inst, &f)?;
        let roots = f.roots();
        if roots.len() != 1 {
            return Err(Error::Malformed("component is not connected".into()));
        }
        Ok((t.boundary(roots[0]).to_vec(), t.entries(roots[0]).clone()))
    }
}

/// States of a collapsed vertex over `edges` boundary edges: all codes when
/// few, otherwise only the finite ones in ascending order.
pub fn collapsed_states(edges: usize, table: &HashMap<Interaction, u64>) -> Vec<(Interaction, Cost)> {
    if edges <= DENSE_EDGES {
        (0..1u128 << (2 * edges)).map(|x| (x, table.get(&x).map_or(Cost::Inf, |&c| Cost::Finite(c)))).collect()
    } else {
        let mut v: Vec<(Interaction, Cost)> = table.iter().map(|(&x, &c)| (x, Cost::Finite(c))).collect();
        v.sort();
        v
    }
}

/// End sets of a collapsed vertex on its `i`-th boundary edge.
pub fn collapsed_end(states: &[(Interaction, Cost)], i: usize) -> EdgeEnd {
    let mut e = EdgeEnd::new(states.len());
    for (x, &(code, _)) in states.iter().enumerate() {
        if code >> (2 * i) & 1 != 0 {
            e.supply.insert(x);
        }
        if code >> (2 * i) & 2 != 0 {
            e.demand.insert(x);
        }
    }
    e
}

/// The compressed instance `I{Y}`: each component `C` of `G∖Y` adjacent to
/// `Y` becomes one vertex over the interactions of `C` with `N(C)`; the
/// remaining components merge into one isolated single-state vertex.
pub fn compress_domination(
    inst: &DominationInstance,
    y: &BTreeSet<VertexId>,
    solver: &dyn ComponentSolver,
) -> Result<DominationInstance> {
    let g = &inst.graph;
    let mut out = inst.induced(y);
    out.keys.clear();
    let rest: BTreeSet<VertexId> = inst.vertices().filter(|v| !y.contains(v)).collect();
    let mut next = inst.fresh_id();
    let mut detached: Option<Cost> = None;
    for comp in components_within(g, &rest) {
        let cset: BTreeSet<VertexId> = comp.into_iter().collect();
        let (edges, table) = solver.interactions(inst, &cset)?;
        if neighborhood(g, &cset).is_empty() {
            let c = table.get(&0).map_or(Cost::Inf, |&c| Cost::Finite(c));
            detached = Some(detached.unwrap_or(Cost::ZERO) + c);
            continue;
        }
        let id = next;
        next = VertexId(next.0 + 1);
        let states = collapsed_states(edges.len(), &table);
        let key = VertexKey::Component(*cset.iter().next().unwrap());
        out.add_vertex(id, states.iter().map(|s| s.1).collect(), key)?;
        for (i, &l) in edges.iter().enumerate() {
            let (a, b) = g.endpoints(l).unwrap();
            let (inner, outer) = if cset.contains(&a) { (a, b) } else { (b, a) };
            let _ = inner;
            out.add_edge(l, id, outer, collapsed_end(&states, i), inst.end(l, outer).clone())?;
        }
    }
    if let Some(c) = detached {
        out.add_vertex(next, vec![c], VertexKey::Rest)?;
    }
    Ok(out)
}

/// Equality after dropping isolated vertices of minimum cost 0, matching
/// vertices by key and edges by label.
pub fn equivalent_domination(a: &DominationInstance, b: &DominationInstance) -> bool {
    let live = |inst: &DominationInstance| -> Option<BTreeMap<VertexKey, VertexId>> {
        let mut m = BTreeMap::new();
        for v in inst.vertices().filter(|&v| !inst.is_isolated_free(v)) {
            if m.insert(inst.key(v), v).is_some() {
                return None;
            }
        }
        Some(m)
    };
    let (Some(ka), Some(kb)) = (live(a), live(b)) else {
        return false;
    };
    if ka.len() != kb.len() {
        return false;
    }
    let mut map = HashMap::new();
    for (key, &va) in &ka {
        let Some(&vb) = kb.get(key) else {
            return false;
        };
        if a.costs(va) != b.costs(vb) {
            return false;
        }
        map.insert(va, vb);
    }
    if a.graph.num_edges() != b.graph.num_edges() {
        return false;
    }
    for (l, u, v) in a.graph.edges() {
        let Some((bu, bv)) = b.graph.endpoints(l) else {
            return false;
        };
        let (Some(&mu), Some(&mv)) = (map.get(&u), map.get(&v)) else {
            return false;
        };
        if !((mu == bu && mv == bv) || (mu == bv && mv == bu)) {
            return false;
        }
        if a.end(l, u) != b.end(l, mu) || a.end(l, v) != b.end(l, mv) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn path(ws: &[Weight]) -> DynGraph {
        let mut g = DynGraph::new();
        for (i, &w) in ws.iter().enumerate() {
            g.add_vertex(v(i as u32), w).unwrap();
            if i > 0 {
                g.add_edge(v(i as u32 - 1), v(i as u32)).unwrap();
            }
        }
        g
    }

    #[test]
    fn mwds_encoding_is_decent() {
        let mut g = path(&[1, 2, 3, 4]);
        g.add_edge(v(0), v(3)).unwrap();
        let inst = encode_mwds(&g);
        assert!(check_decent(&inst, 2, 3).is_ok());
        assert!(check_decent(&inst, 1, 3).is_err());
        let mut s = SlottedMwds::new(3);
        let slotted = s.encode(&g).unwrap();
        assert!(check_decent(&slotted, 3, 4).is_ok());
    }

    #[test]
    fn evaluate_path() {
        let inst = encode_mwds(&path(&[1, 1, 1]));
        // b takes itself, a and c point at b
        let phi: BTreeMap<_, _> = [(v(0), 1), (v(1), 0), (v(2), 1)].into();
        assert_eq!(inst.evaluate(&phi).unwrap(), Cost::Finite(1));
        let phi: BTreeMap<_, _> = [(v(0), 1), (v(1), 1), (v(2), 1)].into();
        assert_eq!(inst.evaluate(&phi).unwrap(), Cost::Inf);
    }

    #[test]
    fn compress_path_middle() {
        let inst = encode_mwds(&path(&[1, 1, 1]));
        let y: BTreeSet<_> = [v(1)].into();
        let c = compress_domination(&inst, &y, &DpComponentSolver::default()).unwrap();
        assert_eq!(c.num_vertices(), 3);
        for u in c.vertices().filter(|&u| u != v(1)) {
            let costs = c.costs(u);
            assert_eq!(costs, &[Cost::Inf, Cost::Finite(1), Cost::Finite(0), Cost::Inf]);
        }
        assert!(check_decent(&c, 2, 3 + 4).is_ok());
    }

    #[test]
    fn compress_everything_and_nothing() {
        let inst = encode_mwds(&path(&[2, 1, 3]));
        let all: BTreeSet<_> = inst.vertices().collect();
        let same = compress_domination(&inst, &all, &DpComponentSolver::default()).unwrap();
        assert!(equivalent_domination(&same, &inst));
        let none = compress_domination(&inst, &BTreeSet::new(), &DpComponentSolver::default()).unwrap();
        assert_eq!(none.num_vertices(), 1);
        assert_eq!(none.costs(none.vertices().next().unwrap()), &[Cost::Finite(1)]);
    }

    #[test]
    fn clear_relieves() {
        let inst = encode_mwds(&path(&[1, 1, 1]));
        let a: BTreeSet<_> = [v(0), v(1)].into();
        let c = clear(&inst, &a);
        assert_eq!(c.graph().num_edges(), 1);
        let l = c.graph().edge_between(v(1), v(2)).unwrap();
        assert!(c.end(l, v(1)).demand.is_clear());
        assert!(!c.end(l, v(2)).demand.is_clear());
    }

    #[test]
    fn combination_of_states() {
        let inst = encode_mwds(&path(&[5, 1, 1]));
        assert_eq!(combine_states(&inst, v(1), 1, 2).unwrap(), 1);
        assert_eq!(combine_states(&inst, v(1), 1, 0).unwrap(), 0);
    }

    #[test]
    fn slotted_updates() {
        let mut s = SlottedMwds::new(1);
        let mut inst = DominationInstance::new();
        for i in 0..3 {
            inst.apply(&s.add_vertex(v(i), 1).unwrap()).unwrap();
        }
        for u in s.add_edge(v(0), v(1)).unwrap() {
            inst.apply(&u).unwrap();
        }
        assert!(matches!(s.add_edge(v(1), v(2)), Err(Error::DegreeCap { .. })));
        assert_eq!(inst.costs(v(0)), &[Cost::Finite(1), Cost::ZERO]);
        for u in s.remove_edge(v(1), v(0)).unwrap() {
            inst.apply(&u).unwrap();
        }
        assert_eq!(inst.costs(v(0)), &[Cost::Finite(1), Cost::Inf]);
        assert_eq!(inst.graph().num_edges(), 0);
    }
}
