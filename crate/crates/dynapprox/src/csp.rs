//! Max Weight Nullary 2CSP instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dp::{ExactSolver, Problem};
use crate::error::{Error, Result};
use crate::graph::{components_within, neighborhood, DynGraph};
use crate::relation::Relation;
use crate::types::{EdgeLabel, MixedRadix, VertexId, VertexKey, Weight};

/// Domain values are `0..revenue.len()`; value 0 always has revenue 0 and is
/// allowed by every constraint.
#[derive(Clone, Debug, Default)]
pub struct CspInstance {
    graph: DynGraph,
    revenue: BTreeMap<VertexId, Vec<Weight>>,
    keys: BTreeMap<VertexId, VertexKey>,
    // oriented along the stored endpoint order of the label
    constraint: HashMap<EdgeLabel, Relation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CspUpdate {
    AddVertex { id: VertexId, revenue: Vec<Weight>, key: VertexKey },
    /// `relation` is oriented from `u` to `v`.
    AddEdge { u: VertexId, v: VertexId, relation: Relation },
    RemoveEdge { u: VertexId, v: VertexId },
    UpdateRevenue { u: VertexId, revenue: Vec<Weight> },
}

impl CspUpdate {
    pub fn vertices(&self) -> Vec<VertexId> {
        match self {
            CspUpdate::AddVertex { id, .. } => vec![*id],
            CspUpdate::AddEdge { u, v, .. } | CspUpdate::RemoveEdge { u, v } => vec![*u, *v],
            CspUpdate::UpdateRevenue { u, .. } => vec![*u],
        }
    }
}

impl CspInstance {
    pub fn new() -> Self {
        CspInstance::default()
    }

    pub fn graph(&self) -> &DynGraph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.revenue.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.revenue.keys().copied()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.revenue.contains_key(&v)
    }

    pub fn add_vertex(&mut self, id: VertexId, revenue: Vec<Weight>) -> Result<()> {
        self.add_vertex_keyed(id, revenue, VertexKey::Original(id))
    }

    pub fn add_vertex_keyed(&mut self, id: VertexId, revenue: Vec<Weight>, key: VertexKey) -> Result<()> {
        check_revenue(id, &revenue)?;
        self.graph.add_vertex(id, 0)?;
        self.revenue.insert(id, revenue);
        if key != VertexKey::Original(id) {
            self.keys.insert(id, key);
        }
        Ok(())
    }

    pub fn key(&self, v: VertexId) -> VertexKey {
        self.keys.get(&v).cloned().unwrap_or(VertexKey::Original(v))
    }

    pub fn domain_size(&self, v: VertexId) -> u32 {
        self.revenue[&v].len() as u32
    }

    pub fn max_domain(&self) -> u32 {
        self.revenue.values().map(|r| r.len() as u32).max().unwrap_or(0)
    }

    pub fn revenue(&self, v: VertexId) -> &[Weight] {
        &self.revenue[&v]
    }

    pub fn set_revenue(&mut self, v: VertexId, revenue: Vec<Weight>) -> Result<()> {
        let slot = self.revenue.get_mut(&v).ok_or(Error::MissingVertex(v))?;
        check_revenue(v, &revenue)?;
        if slot.len() != revenue.len() {
            return Err(Error::Malformed(format!("revenue update changes the domain of {v}")));
        }
        *slot = revenue;
        Ok(())
    }

    /// Adds the constraint `relation ⊆ D_u × D_v`.
    pub fn add_constraint(&mut self, u: VertexId, v: VertexId, relation: Relation) -> Result<EdgeLabel> {
        for x in [u, v] {
            if !self.has_vertex(x) {
                return Err(Error::MissingVertex(x));
            }
        }
        if !relation.is_nullary(self.domain_size(u), self.domain_size(v)) {
            return Err(Error::Malformed(format!("constraint {u}-{v} forbids value 0")));
        }
        let label = self.graph.add_edge(u, v)?;
        self.constraint.insert(label, relation);
        Ok(label)
    }

    pub fn remove_constraint(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        let label = self.graph.remove_edge_between(u, v)?;
        self.constraint.remove(&label);
        Ok(())
    }

    /// Constraint between `u` and `v`, oriented from `u` to `v`.
    pub fn relation(&self, u: VertexId, v: VertexId) -> Option<Relation> {
        let label = self.graph.edge_between(u, v)?;
        let (a, _) = self.graph.endpoints(label).unwrap();
        let rel = &self.constraint[&label];
        Some(if a == u { rel.clone() } else { rel.transpose() })
    }

    pub fn allowed(&self, u: VertexId, a: u32, v: VertexId, b: u32) -> bool {
        match self.graph.edge_between(u, v) {
            None => true,
            Some(label) => {
                let (x, _) = self.graph.endpoints(label).unwrap();
                let rel = &self.constraint[&label];
                if x == u {
                    rel.allows(a, b)
                } else {
                    rel.allows(b, a)
                }
            }
        }
    }

    /// All constraints as `(u, v, relation oriented u→v)`.
    pub fn constraints(&self) -> impl Iterator<Item = (VertexId, VertexId, &Relation)> + '_ {
        self.graph.edges().map(|(l, u, v)| (u, v, &self.constraint[&l]))
    }

    pub fn apply(&mut self, upd: &CspUpdate) -> Result<()> {
        match upd {
            CspUpdate::AddVertex { id, revenue, key } => self.add_vertex_keyed(*id, revenue.clone(), key.clone()),
            CspUpdate::AddEdge { u, v, relation } => self.add_constraint(*u, *v, relation.clone()).map(|_| ()),
            CspUpdate::RemoveEdge { u, v } => self.remove_constraint(*u, *v),
            CspUpdate::UpdateRevenue { u, revenue } => self.set_revenue(*u, revenue.clone()),
        }
    }

    /// Revenue of a total valuation, or `None` if a constraint is violated.
    pub fn evaluate(&self, phi: &BTreeMap<VertexId, u32>) -> Result<Option<Weight>> {
        let mut total: Weight = 0;
        for v in self.vertices() {
            let &x = phi.get(&v).ok_or(Error::MissingVertex(v))?;
            if x >= self.domain_size(v) {
                return Err(Error::OutOfDomain { vertex: v, value: x });
            }
            total += self.revenue[&v][x as usize];
        }
        for (u, v, rel) in self.constraints() {
            if !rel.allows(phi[&u], phi[&v]) {
                return Ok(None);
            }
        }
        Ok(Some(total))
    }

    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> CspInstance {
        let mut out = CspInstance::new();
        for &v in keep {
            if let Some(r) = self.revenue.get(&v) {
                out.add_vertex_keyed(v, r.clone(), self.key(v)).unwrap();
            }
        }
        for (u, v, rel) in self.constraints() {
            if keep.contains(&u) && keep.contains(&v) {
                out.add_constraint(u, v, rel.clone()).unwrap();
            }
        }
        out
    }

    pub fn fresh_id(&self) -> VertexId {
        VertexId(self.graph.max_vertex_id().map_or(0, |v| v.0 + 1))
    }

    pub fn is_isolated_zero(&self, v: VertexId) -> bool {
        self.graph.degree(v) == 0 && self.revenue[&v].iter().all(|&r| r == 0)
    }
}

fn check_revenue(v: VertexId, revenue: &[Weight]) -> Result<()> {
    if revenue.first() != Some(&0) {
        return Err(Error::Malformed(format!("vertex {v} must have value 0 with revenue 0")));
    }
    Ok(())
}

/// Domain `{0,1}`, revenue `w` on 1, and `{(0,0),(0,1),(1,0)}` on every edge.
pub fn encode_mwis(g: &DynGraph) -> CspInstance {
    let mut inst = CspInstance::new();
    for (v, w) in g.weighted_vertices() {
        inst.add_vertex(v, vec![0, w]).unwrap();
    }
    for (_, u, v) in g.edges() {
        inst.add_constraint(u, v, Relation::NotBoth).unwrap();
    }
    inst
}

/// The compressed instance `I{Y}`: components of `G∖Y` sharing a
/// neighbourhood `S` become one contracted vertex over the tuple space of `S`.
pub fn compress(inst: &CspInstance, y: &BTreeSet<VertexId>, solver: &dyn ExactSolver) -> Result<CspInstance> {
    let g = inst.graph();
    let mut out = inst.induced(y);
    // keys are relative to `inst`
    out.keys.clear();
    let rest: BTreeSet<VertexId> = inst.vertices().filter(|v| !y.contains(v)).collect();
    let mut groups: BTreeMap<Vec<VertexId>, BTreeSet<VertexId>> = BTreeMap::new();
    for comp in components_within(g, &rest) {
        let cset: BTreeSet<VertexId> = comp.into_iter().collect();
        let s: Vec<VertexId> = neighborhood(g, &cset).into_iter().collect();
        groups.entry(s).or_default().extend(cset);
    }
    let mut next = inst.fresh_id();
    for (s, r) in groups {
        let id = next;
        next = VertexId(next.0 + 1);
        let revenue = contracted_revenue(inst, &s, &r, solver)?;
        out.add_vertex_keyed(id, revenue, VertexKey::Group(s.clone()))?;
        let mr = MixedRadix::new(s.iter().map(|&v| inst.domain_size(v)).collect())?;
        for (i, &m) in s.iter().enumerate() {
            out.add_constraint(m, id, Relation::projection(mr.strides()[i], mr.radices()[i]))?;
        }
    }
    Ok(out)
}

fn contracted_revenue(
    inst: &CspInstance,
    s: &[VertexId],
    r: &BTreeSet<VertexId>,
    solver: &dyn ExactSolver,
) -> Result<Vec<Weight>> {
    let mr = MixedRadix::new(s.iter().map(|&v| inst.domain_size(v)).collect())?;
    let base = Problem::from_csp(inst, Some(r));
    let mut revenue = vec![0; 1 + mr.size() as usize];
    // the members of `r` adjacent to each vertex of `s`
    let attach: Vec<Vec<(usize, VertexId)>> = s
        .iter()
        .map(|&sv| {
            inst.graph()
                .neighbors(sv)
                .into_iter()
                .filter(|w| r.contains(w))
                .map(|w| (base.var(w).unwrap(), w))
                .collect()
        })
        .collect();
    // constraints inside `s` are not consulted: such tuples are unusable anyway
    for code in 0..mr.size() {
        let d = mr.decode(code);
        let mut p = base.clone();
        for (i, &sv) in s.iter().enumerate() {
            for &(var, w) in &attach[i] {
                p.restrict(var, |x| inst.allowed(w, x, sv, d[i]));
            }
        }
        let best = solver.maximize(&p)?.unwrap_or(0);
        revenue[1 + code as usize] = best.max(0) as Weight;
    }
    Ok(revenue)
}

/// Equality after dropping isolated all-zero vertices, matching vertices by
/// their keys.
pub fn equivalent(a: &CspInstance, b: &CspInstance) -> bool {
    let live = |inst: &CspInstance| -> Option<BTreeMap<VertexKey, VertexId>> {
        let mut m = BTreeMap::new();
        for v in inst.vertices().filter(|&v| !inst.is_isolated_zero(v)) {
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
        if a.revenue(va) != b.revenue(vb) {
            return false;
        }
        map.insert(va, vb);
    }
    if a.graph().num_edges() != b.graph().num_edges() {
        return false;
    }
    for (u, v, rel) in a.constraints() {
        let (Some(&bu), Some(&bv)) = (map.get(&u), map.get(&v)) else {
            return false;
        };
        let Some(other) = b.relation(bu, bv) else {
            return false;
        };
        if !rel.same_extension(&other, a.domain_size(u), a.domain_size(v)) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::DpSolver;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn path_instance(ws: &[Weight]) -> CspInstance {
        let mut g = DynGraph::new();
        for (i, &w) in ws.iter().enumerate() {
            g.add_vertex(v(i as u32), w).unwrap();
            if i > 0 {
                g.add_edge(v(i as u32 - 1), v(i as u32)).unwrap();
            }
        }
        encode_mwis(&g)
    }

    fn all(inst: &CspInstance, vals: &[u32]) -> BTreeMap<VertexId, u32> {
        inst.vertices().zip(vals.iter().copied()).collect()
    }

    #[test]
    fn evaluate_edge() {
        let inst = path_instance(&[5, 7]);
        assert_eq!(inst.evaluate(&all(&inst, &[0, 0])).unwrap(), Some(0));
        assert_eq!(inst.evaluate(&all(&inst, &[1, 1])).unwrap(), None);
        assert_eq!(inst.evaluate(&all(&inst, &[0, 1])).unwrap(), Some(7));
        assert!(matches!(inst.evaluate(&all(&inst, &[2, 0])), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn rejects_non_nullary() {
        let mut inst = CspInstance::new();
        assert!(inst.add_vertex(v(0), vec![1, 2]).is_err());
        inst.add_vertex(v(0), vec![0, 2]).unwrap();
        inst.add_vertex(v(1), vec![0, 2]).unwrap();
        let bad = Relation::table(2, 2, |a, b| a == b);
        assert!(inst.add_constraint(v(0), v(1), bad).is_err());
    }

    #[test]
    fn compress_path_middle() {
        let inst = path_instance(&[2, 1, 3]);
        let y: BTreeSet<_> = [v(1)].into();
        let c = compress(&inst, &y, &DpSolver::default()).unwrap();
        assert_eq!(c.num_vertices(), 2);
        let g = c.vertices().find(|&x| x != v(1)).unwrap();
        assert_eq!(c.key(g), VertexKey::Group(vec![v(1)]));
        assert_eq!(c.revenue(g), &[0, 5, 0]);
        assert!(equivalent(&compress(&inst, &inst.vertices().collect(), &DpSolver::default()).unwrap(), &inst));
    }

    #[test]
    fn equivalence_ignores_isolated_zero() {
        let inst = path_instance(&[2, 1, 3]);
        let mut other = inst.clone();
        other.add_vertex(v(9), vec![0, 0]).unwrap();
        assert!(equivalent(&inst, &other));
        other.set_revenue(v(0), vec![0, 4]).unwrap();
        assert!(!equivalent(&inst, &other));
    }
}
