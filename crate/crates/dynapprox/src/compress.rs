//! Dynamic compression: an instance of bounded treewidth is frozen together
//! with its DP tables, and a compressed instance `I★ ≡ I_cur{Z}` is kept up
//! to date while the stash `Z` absorbs every vertex touched by an update.
//!
//! Vertices of `I★` get their own ids; [`VertexKey`]s record what they stand
//! for in `I_cur`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::csp::{CspInstance, CspUpdate};
use crate::decomp::{elimination_forest, EliminationForest, TreeDecomposition};
use crate::dp::{compute_domination_tables, compute_tables, DomTables, DpTables};
use crate::error::{Error, Result};
use crate::gendom::{collapsed_end, collapsed_states, DomUpdate, DominationInstance, EdgeEnd};
use crate::relation::Relation;
use crate::types::{Cost, MixedRadix, VertexId, VertexKey, Weight};

#[derive(Clone, Debug)]
struct Aggregate {
    id: VertexId,
    count: usize,
}

/// Stash bookkeeping shared by both variants.
#[derive(Clone, Debug, Default)]
struct Stash {
    added: BTreeSet<VertexId>,
    touched: BTreeSet<VertexId>,
    z: BTreeSet<VertexId>,
    to_star: HashMap<VertexId, VertexId>,
    next: u32,
}

impl Stash {
    fn fresh(&mut self) -> VertexId {
        let id = VertexId(self.next);
        self.next += 1;
        id
    }

    fn star(&self, v: VertexId) -> VertexId {
        self.to_star[&v]
    }

    /// Stash vertices not yet in `Z`, root first, for every vertex of `vs`.
    fn missing_ancestors(&self, f: &EliminationForest, vs: &[VertexId]) -> Vec<VertexId> {
        let mut out = vec![];
        for &v in vs {
            if self.z.contains(&v) || !f.contains(v) {
                continue;
            }
            for a in f.ancestors(v).into_iter().chain([v]) {
                if !self.z.contains(&a) && !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }

    fn check_prefix(&self, f: &EliminationForest, z: VertexId) -> Result<()> {
        if !f.contains(z) || self.z.contains(&z) {
            return Err(Error::PrefixViolation(z));
        }
        if let Some(p) = f.parent(z) {
            if !self.z.contains(&p) {
                return Err(Error::PrefixViolation(z));
            }
        }
        Ok(())
    }
}

/// Dynamic compression of a 2CSP instance.
#[derive(Clone, Debug)]
pub struct CspCompression {
    cur: CspInstance,
    tables: DpTables,
    stash: Stash,
    star: CspInstance,
    groups: BTreeMap<Vec<VertexId>, Aggregate>,
}

impl CspCompression {
    /// Freezes `inst`; `I★` starts as `I{∅}`.
    pub fn new(inst: CspInstance, td: &TreeDecomposition) -> Result<Self> {
        td.validate(inst.graph())?;
        let f = elimination_forest(inst.graph(), td)?;
        let tables = compute_tables(&inst, &f)?;
        let mut s = CspCompression {
            cur: inst,
            tables,
            stash: Stash::default(),
            star: CspInstance::new(),
            groups: BTreeMap::new(),
        };
        let roots = s.tables.forest().roots().len();
        if roots > 0 {
            let id = s.stash.fresh();
            s.star.add_vertex_keyed(id, vec![0, s.tables.optimum()], VertexKey::Group(vec![]))?;
            s.groups.insert(vec![], Aggregate { id, count: roots });
        }
        Ok(s)
    }

    pub fn current(&self) -> &CspInstance {
        &self.cur
    }

    pub fn star(&self) -> &CspInstance {
        &self.star
    }

    pub fn stash(&self) -> &BTreeSet<VertexId> {
        &self.stash.z
    }

    pub fn forest(&self) -> &EliminationForest {
        self.tables.forest()
    }

    /// Adds `z` to the stash; `z`'s parent must already be stashed.
    pub fn grow_stash(&mut self, z: VertexId) -> Result<Vec<CspUpdate>> {
        self.stash.check_prefix(self.tables.forest(), z)?;
        let mut out = vec![];
        // 1. drop z's appendix from its aggregate
        let reach = self.tables.forest().reach(z);
        let agg = self.groups.get_mut(&reach).expect("appendix without aggregate");
        let size = self.tables.layout(z).size();
        let mut rev = self.star.revenue(agg.id).to_vec();
        for code in 0..size {
            rev[1 + code as usize] -= self.tables.t(z, code);
        }
        agg.count -= 1;
        let agg_id = agg.id;
        if agg.count == 0 {
            for &m in &reach {
                out.push(CspUpdate::RemoveEdge { u: self.stash.star(m), v: agg_id });
            }
            rev.iter_mut().for_each(|r| *r = 0);
            self.groups.remove(&reach);
        }
        out.push(CspUpdate::UpdateRevenue { u: agg_id, revenue: rev });
        // 2. z itself
        let zs = self.stash.fresh();
        self.stash.z.insert(z);
        self.stash.to_star.insert(z, zs);
        out.push(CspUpdate::AddVertex { id: zs, revenue: self.cur.revenue(z).to_vec(), key: VertexKey::Original(z) });
        for w in self.cur.graph().neighbors(z) {
            if w != z && self.stash.z.contains(&w) {
                let relation = self.cur.relation(z, w).unwrap();
                out.push(CspUpdate::AddEdge { u: zs, v: self.stash.star(w), relation });
            }
        }
        // 3. z's children, one aggregate per Reach set
        for (i, (r, count)) in self.tables.groups(z).into_iter().enumerate() {
            let size = MixedRadix::new(r.iter().map(|&m| self.cur.domain_size(m)).collect())?.size();
            let w: Vec<Weight> = (0..size).map(|code| self.tables.w(z, i, code)).collect();
            match self.groups.get_mut(&r) {
                Some(agg) => {
                    agg.count += count;
                    let mut rev = self.star.revenue(agg.id).to_vec();
                    for (code, x) in w.iter().enumerate() {
                        rev[1 + code] += x;
                    }
                    out.push(CspUpdate::UpdateRevenue { u: agg.id, revenue: rev });
                }
                None => {
                    let id = self.stash.fresh();
                    let mut revenue = vec![0];
                    revenue.extend(w);
                    out.push(CspUpdate::AddVertex { id, revenue, key: VertexKey::Group(r.clone()) });
                    let mr = MixedRadix::new(r.iter().map(|&m| self.cur.domain_size(m)).collect())?;
                    for (j, &m) in r.iter().enumerate() {
                        out.push(CspUpdate::AddEdge {
                            u: self.stash.star(m),
                            v: id,
                            relation: Relation::projection(mr.strides()[j], mr.radices()[j]),
                        });
                    }
                    self.groups.insert(r, Aggregate { id, count });
                }
            }
        }
        for u in &out {
            self.star.apply(u)?;
        }
        Ok(out)
    }

    /// Applies `upd` to `I_cur` and returns the updates that bring `I★` along.
    pub fn apply_update(&mut self, upd: &CspUpdate) -> Result<Vec<CspUpdate>> {
        let mut out = vec![];
        let vs = match upd {
            CspUpdate::AddVertex { .. } => vec![],
            _ => upd.vertices(),
        };
        for v in &vs {
            if !self.cur.has_vertex(*v) {
                return Err(Error::MissingVertex(*v));
            }
        }
        for a in self.stash.missing_ancestors(self.tables.forest(), &vs) {
            out.extend(self.grow_stash(a)?);
        }
        self.cur.apply(upd)?;
        let relayed = match upd {
            CspUpdate::AddVertex { id, revenue, .. } => {
                let s = self.stash.fresh();
                self.stash.added.insert(*id);
                self.stash.z.insert(*id);
                self.stash.to_star.insert(*id, s);
                CspUpdate::AddVertex { id: s, revenue: revenue.clone(), key: VertexKey::Original(*id) }
            }
            CspUpdate::AddEdge { u, v, relation } => {
                CspUpdate::AddEdge { u: self.stash.star(*u), v: self.stash.star(*v), relation: relation.clone() }
            }
            CspUpdate::RemoveEdge { u, v } => CspUpdate::RemoveEdge { u: self.stash.star(*u), v: self.stash.star(*v) },
            CspUpdate::UpdateRevenue { u, revenue } => {
                CspUpdate::UpdateRevenue { u: self.stash.star(*u), revenue: revenue.clone() }
            }
        };
        self.stash.touched.extend(upd.vertices());
        self.star.apply(&relayed)?;
        out.push(relayed);
        Ok(out)
    }
}

/// Dynamic compression of a generalized domination instance.
#[derive(Clone, Debug)]
pub struct DomCompression {
    cur: DominationInstance,
    tables: DomTables,
    stash: Stash,
    star: DominationInstance,
    /// Collapsed vertex standing for `desc[c]`, per appendix root `c`.
    collapsed: HashMap<VertexId, VertexId>,
    min_desc: HashMap<VertexId, VertexId>,
    eps: Option<(VertexId, u64)>,
}

impl DomCompression {
    pub fn new(inst: DominationInstance, td: &TreeDecomposition) -> Result<Self> {
        td.validate(inst.graph())?;
        let f = elimination_forest(inst.graph(), td)?;
        let tables = compute_domination_tables(&inst, &f)?;
        let mut min_desc = HashMap::new();
        let mut order: Vec<VertexId> = f.vertices().to_vec();
        order.sort_by_key(|&v| std::cmp::Reverse(f.depth(v)));
        for v in order {
            let m = f.children(v).iter().map(|c| min_desc[c]).fold(v, VertexId::min);
            min_desc.insert(v, m);
        }
        let mut s = DomCompression {
            cur: inst,
            tables,
            stash: Stash::default(),
            star: DominationInstance::new(),
            collapsed: HashMap::new(),
            min_desc,
            eps: None,
        };
        if !s.tables.forest().is_empty() {
            let id = s.stash.fresh();
            let total = s.tables.optimum().finite().expect("decent instances have finite optimum");
            s.star.add_vertex(id, vec![Cost::Finite(total)], VertexKey::Rest)?;
            s.eps = Some((id, total));
        }
        Ok(s)
    }

    pub fn current(&self) -> &DominationInstance {
        &self.cur
    }

    pub fn star(&self) -> &DominationInstance {
        &self.star
    }

    pub fn stash(&self) -> &BTreeSet<VertexId> {
        &self.stash.z
    }

    pub fn forest(&self) -> &EliminationForest {
        self.tables.forest()
    }

    pub fn grow_stash(&mut self, z: VertexId) -> Result<Vec<DomUpdate>> {
        self.stash.check_prefix(self.tables.forest(), z)?;
        let mut out = vec![];
        // 1. retire whatever stood for z
        match self.collapsed.remove(&z) {
            None => {
                let (id, total) = self.eps.as_mut().unwrap();
                *total -= self.tables.cost(z, 0).finite().unwrap();
                out.push(DomUpdate::UpdateCost { u: *id, costs: vec![Cost::Finite(*total)] });
            }
            Some(uz) => {
                for &(_, l) in self.star.graph().incident(uz) {
                    out.push(DomUpdate::RemoveEdge { label: l });
                }
                out.push(DomUpdate::UpdateCost { u: uz, costs: vec![Cost::ZERO; self.star.domain_size(uz)] });
            }
        }
        // 2. z itself
        let zs = self.stash.fresh();
        self.stash.z.insert(z);
        self.stash.to_star.insert(z, zs);
        out.push(DomUpdate::AddVertex { id: zs, costs: self.cur.costs(z).to_vec(), key: VertexKey::Original(z) });
        for &(w, l) in self.cur.graph().incident(z) {
            if w != z && self.stash.z.contains(&w) {
                out.push(DomUpdate::AddEdge {
                    label: l,
                    u: zs,
                    v: self.stash.star(w),
                    u_end: self.cur.end(l, z).clone(),
                    v_end: self.cur.end(l, w).clone(),
                });
            }
        }
        // 3. one collapsed vertex per child
        for c in self.tables.forest().children(z) {
            let boundary = self.tables.boundary(c).to_vec();
            let states = collapsed_states(boundary.len(), self.tables.entries(c));
            let id = self.stash.fresh();
            out.push(DomUpdate::AddVertex {
                id,
                costs: states.iter().map(|s| s.1).collect(),
                key: VertexKey::Component(self.min_desc[&c]),
            });
            for (i, &l) in boundary.iter().enumerate() {
                let (a, b) = self.cur.graph().endpoints(l).unwrap();
                let outer = if self.stash.z.contains(&a) { a } else { b };
                out.push(DomUpdate::AddEdge {
                    label: l,
                    u: id,
                    v: self.stash.star(outer),
                    u_end: collapsed_end(&states, i),
                    v_end: self.cur.end(l, outer).clone(),
                });
            }
            self.collapsed.insert(c, id);
        }
        for u in &out {
            self.star.apply(u)?;
        }
        Ok(out)
    }

    pub fn apply_update(&mut self, upd: &DomUpdate) -> Result<Vec<DomUpdate>> {
        let vs = match upd {
            DomUpdate::AddVertex { .. } => vec![],
            DomUpdate::AddEdge { u, v, .. } => vec![*u, *v],
            DomUpdate::RemoveEdge { label } => {
                let (a, b) = self.cur.graph().endpoints(*label).ok_or(Error::UnknownEdge(*label))?;
                vec![a, b]
            }
            DomUpdate::UpdateCost { u, .. } => vec![*u],
        };
        for v in &vs {
            if !self.cur.has_vertex(*v) {
                return Err(Error::MissingVertex(*v));
            }
        }
        let mut out = vec![];
        for a in self.stash.missing_ancestors(self.tables.forest(), &vs) {
            out.extend(self.grow_stash(a)?);
        }
        self.cur.apply(upd)?;
        let relayed = match upd {
            DomUpdate::AddVertex { id, costs, .. } => {
                let s = self.stash.fresh();
                self.stash.added.insert(*id);
                self.stash.z.insert(*id);
                self.stash.to_star.insert(*id, s);
                DomUpdate::AddVertex { id: s, costs: costs.clone(), key: VertexKey::Original(*id) }
            }
            DomUpdate::AddEdge { label, u, v, u_end, v_end } => DomUpdate::AddEdge {
                label: *label,
                u: self.stash.star(*u),
                v: self.stash.star(*v),
                u_end: u_end.clone(),
                v_end: v_end.clone(),
            },
            DomUpdate::RemoveEdge { label } => DomUpdate::RemoveEdge { label: *label },
            DomUpdate::UpdateCost { u, costs } => DomUpdate::UpdateCost { u: self.stash.star(*u), costs: costs.clone() },
        };
        self.stash.touched.extend(vs);
        self.star.apply(&relayed)?;
        out.push(relayed);
        Ok(out)
    }
}

/// Updates turning `Clear(full; relieved ∪ {v})` into `Clear(full; relieved)`,
/// for `v ∉ relieved`: every edge of `v` is reinserted with `v`'s demand
/// restored.
pub fn relieve_in_universe(full: &DominationInstance, relieved: &BTreeSet<VertexId>, v: VertexId) -> Vec<DomUpdate> {
    let mut out = vec![];
    let mut edges: Vec<_> = full.graph().incident(v).to_vec();
    edges.sort_by_key(|e| e.1);
    for (w, l) in edges {
        let (a, b) = full.graph().endpoints(l).unwrap();
        let end_of = |x: VertexId| -> EdgeEnd {
            if relieved.contains(&x) {
                full.end(l, x).relieved()
            } else {
                full.end(l, x).clone()
            }
        };
        if !relieved.contains(&w) {
            out.push(DomUpdate::RemoveEdge { label: l });
        }
        out.push(DomUpdate::AddEdge { label: l, u: a, v: b, u_end: end_of(a), v_end: end_of(b) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{compress, encode_mwis, equivalent};
    use crate::decomp::heuristic_td;
    use crate::dp::DpSolver;
    use crate::gendom::{clear, compress_domination, encode_mwds, equivalent_domination, DpComponentSolver};
    use crate::graph::DynGraph;

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

    fn chain(n: u32) -> TreeDecomposition {
        // bag i = {i, i+1}, rooted at the first bag
        let bags = (0..n.saturating_sub(1)).map(|i| vec![v(i), v(i + 1)]).collect::<Vec<_>>();
        let parent = (0..bags.len()).map(|i| if i == 0 { None } else { Some(i - 1) }).collect();
        TreeDecomposition { bags, parent }
    }

    #[test]
    fn init_holds_optimum() {
        let inst = encode_mwis(&path(&[2, 1, 3]));
        let c = CspCompression::new(inst, &chain(3)).unwrap();
        assert_eq!(c.star().num_vertices(), 1);
        let id = c.star().vertices().next().unwrap();
        assert_eq!(c.star().revenue(id), &[0, 5]);
    }

    #[test]
    fn grow_root_of_path() {
        let inst = encode_mwis(&path(&[2, 1, 3]));
        let mut c = CspCompression::new(inst.clone(), &chain(3)).unwrap();
        let f = c.forest();
        assert_eq!(f.roots(), vec![v(0)]);
        assert_eq!(f.parent(v(1)), Some(v(0)));
        c.grow_stash(v(0)).unwrap();
        let agg = c.star().vertices().find(|&x| c.star().key(x) == VertexKey::Group(vec![v(0)])).unwrap();
        assert_eq!(c.star().revenue(agg), &[0, 3, 3]);
        assert_eq!(crate::oracle::brute_csp(c.star()).unwrap(), 5);
        assert!(equivalent(c.star(), &compress(&inst, c.stash(), &DpSolver::default()).unwrap()));
        assert!(matches!(c.grow_stash(v(2)), Err(Error::PrefixViolation(_))));
        c.grow_stash(v(1)).unwrap();
        c.grow_stash(v(2)).unwrap();
        assert!(equivalent(c.star(), &inst));
    }

    #[test]
    fn updates_follow_scratch() {
        let g = path(&[2, 1, 3, 4, 1]);
        let inst = encode_mwis(&g);
        let td = heuristic_td(&g, 4).unwrap();
        let mut c = CspCompression::new(inst, &td).unwrap();
        let ups = [
            CspUpdate::UpdateRevenue { u: v(3), revenue: vec![0, 9] },
            CspUpdate::AddEdge { u: v(0), v: v(4), relation: Relation::NotBoth },
            CspUpdate::AddVertex { id: v(7), revenue: vec![0, 5], key: VertexKey::Original(v(7)) },
            CspUpdate::AddEdge { u: v(7), v: v(2), relation: Relation::NotBoth },
            CspUpdate::RemoveEdge { u: v(1), v: v(2) },
        ];
        for u in &ups {
            c.apply_update(u).unwrap();
            let scratch = compress(c.current(), c.stash(), &DpSolver::default()).unwrap();
            assert!(equivalent(c.star(), &scratch));
        }
    }

    #[test]
    fn domination_init_and_grow() {
        let inst = encode_mwds(&path(&[1, 1, 1]));
        let mut c = DomCompression::new(inst.clone(), &chain(3)).unwrap();
        let id = c.star().vertices().next().unwrap();
        assert_eq!(c.star().costs(id), &[Cost::Finite(1)]);
        for z in [v(0), v(1)] {
            c.grow_stash(z).unwrap();
            let scratch = compress_domination(&inst, c.stash(), &DpComponentSolver::default()).unwrap();
            assert!(equivalent_domination(c.star(), &scratch));
        }
    }

    #[test]
    fn relieve_counts() {
        let inst = encode_mwds(&path(&[1, 1, 1]));
        assert_eq!(relieve_in_universe(&inst, &BTreeSet::new(), v(1)).len(), 4);
        let mut one = DynGraph::new();
        one.add_vertex(v(0), 1).unwrap();
        assert!(relieve_in_universe(&encode_mwds(&one), &BTreeSet::new(), v(0)).is_empty());
        // applying the batch to Clear(I; {0,1}) gives Clear(I; {0})
        let a: BTreeSet<_> = [v(0), v(1)].into();
        let mut universe = clear(&inst, &a);
        let rest: BTreeSet<_> = [v(0)].into();
        for u in relieve_in_universe(&inst, &rest, v(1)) {
            universe.apply(&u).unwrap();
        }
        assert!(equivalent_domination(&universe, &clear(&inst, &rest)));
    }
}
