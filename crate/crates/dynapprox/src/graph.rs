//! Dynamic vertex-weighted graphs with labeled edges.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::{EdgeLabel, VertexId, Weight};

#[derive(Clone, Debug, Default)]
pub struct DynGraph {
    weights: BTreeMap<VertexId, Weight>,
    adj: HashMap<VertexId, Vec<(VertexId, EdgeLabel)>>,
    edges: BTreeMap<EdgeLabel, (VertexId, VertexId)>,
    next_label: u64,
    multi: bool,
}

impl DynGraph {
    /// A simple graph: parallel edges are rejected.
    pub fn new() -> Self {
        DynGraph::default()
    }

    pub fn new_multigraph() -> Self {
        DynGraph { multi: true, ..DynGraph::default() }
    }

    pub fn is_multigraph(&self) -> bool {
        self.multi
    }

    pub fn add_vertex(&mut self, id: VertexId, w: Weight) -> Result<()> {
        if self.weights.contains_key(&id) {
            return Err(Error::DuplicateVertex(id));
        }
        self.weights.insert(id, w);
        self.adj.insert(id, Vec::new());
        Ok(())
    }

    pub fn set_weight(&mut self, id: VertexId, w: Weight) -> Result<()> {
        let slot = self.weights.get_mut(&id).ok_or(Error::MissingVertex(id))?;
        *slot = w;
        Ok(())
    }

    pub fn weight(&self, id: VertexId) -> Option<Weight> {
        self.weights.get(&id).copied()
    }

    pub fn has_vertex(&self, id: VertexId) -> bool {
        self.weights.contains_key(&id)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeLabel> {
        let label = EdgeLabel(self.next_label);
        self.add_edge_with_label(label, u, v)?;
        Ok(label)
    }

    /// Inserts an edge under a caller-chosen label; used when edges are
    /// carried over from another instance and must keep their identity.
    pub fn add_edge_with_label(&mut self, label: EdgeLabel, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for x in [u, v] {
            if !self.has_vertex(x) {
                return Err(Error::MissingVertex(x));
            }
        }
        if self.edges.contains_key(&label) {
            return Err(Error::Malformed(format!("edge label {label} reused")));
        }
        if !self.multi && self.edge_between(u, v).is_some() {
            return Err(Error::DuplicateEdge(u, v));
        }
        self.edges.insert(label, (u, v));
        self.adj.get_mut(&u).unwrap().push((v, label));
        self.adj.get_mut(&v).unwrap().push((u, label));
        self.next_label = self.next_label.max(label.0 + 1);
        Ok(())
    }

    pub fn remove_edge(&mut self, label: EdgeLabel) -> Result<(VertexId, VertexId)> {
        let (u, v) = self.edges.remove(&label).ok_or(Error::UnknownEdge(label))?;
        for x in [u, v] {
            let list = self.adj.get_mut(&x).unwrap();
            let pos = list.iter().position(|&(_, l)| l == label).unwrap();
            list.swap_remove(pos);
        }
        Ok((u, v))
    }

    pub fn remove_edge_between(&mut self, u: VertexId, v: VertexId) -> Result<EdgeLabel> {
        let label = self.edge_between(u, v).ok_or(Error::MissingEdge(u, v))?;
        self.remove_edge(label)?;
        Ok(label)
    }

    /// Smallest label among the edges joining `u` and `v`.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeLabel> {
        let (a, b) = match (self.adj.get(&u), self.adj.get(&v)) {
            (Some(x), Some(y)) if x.len() <= y.len() => (x, v),
            (Some(_), Some(y)) => (y, u),
            _ => return None,
        };
        a.iter().filter(|&&(w, _)| w == b).map(|&(_, l)| l).min()
    }

    pub fn endpoints(&self, label: EdgeLabel) -> Option<(VertexId, VertexId)> {
        self.edges.get(&label).copied()
    }

    pub fn next_label(&self) -> EdgeLabel {
        EdgeLabel(self.next_label)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.weights.keys().copied()
    }

    pub fn weighted_vertices(&self) -> impl Iterator<Item = (VertexId, Weight)> + '_ {
        self.weights.iter().map(|(&v, &w)| (v, w))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeLabel, VertexId, VertexId)> + '_ {
        self.edges.iter().map(|(&l, &(u, v))| (l, u, v))
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Incident edges as `(other endpoint, label)`, in no particular order.
    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeLabel)] {
        self.adj.get(&v).map(|x| x.as_slice()).unwrap_or(&[])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident(v).len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.values().map(|a| a.len()).max().unwrap_or(0)
    }

    /// Distinct neighbours, ascending.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let set: BTreeSet<VertexId> = self.incident(v).iter().map(|&(w, _)| w).collect();
        set.into_iter().collect()
    }

    pub fn max_vertex_id(&self) -> Option<VertexId> {
        self.weights.keys().next_back().copied()
    }

    /// Subgraph induced by `keep`; edge labels are preserved.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> DynGraph {
        let mut g = DynGraph { multi: self.multi, next_label: self.next_label, ..DynGraph::default() };
        for &v in keep {
            if let Some(w) = self.weight(v) {
                g.add_vertex(v, w).unwrap();
            }
        }
        for (l, u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                g.add_edge_with_label(l, u, v).unwrap();
            }
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerAssignment {
    pub k: u32,
    pub layer: BTreeMap<VertexId, u32>,
}

impl LayerAssignment {
    pub fn of(&self, v: VertexId) -> Option<u32> {
        self.layer.get(&v).copied()
    }

    pub fn members(&self, i: u32) -> BTreeSet<VertexId> {
        self.layer.iter().filter(|&(_, &l)| l == i).map(|(&v, _)| v).collect()
    }
}

/// BFS layers modulo `k`, rooted at the smallest vertex of each component.
pub fn bfs_layers(g: &DynGraph, k: u32) -> LayerAssignment {
    assert!(k >= 1);
    let mut layer = BTreeMap::new();
    let mut dist: HashMap<VertexId, u64> = HashMap::new();
    for root in g.vertices() {
        if dist.contains_key(&root) {
            continue;
        }
        dist.insert(root, 0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            layer.insert(u, (d % k as u64) as u32);
            for &(w, _) in g.incident(u) {
                if !dist.contains_key(&w) {
                    dist.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
    }
    LayerAssignment { k, layer }
}

/// Connected components, each sorted, ordered by smallest member.
pub fn components(g: &DynGraph) -> Vec<Vec<VertexId>> {
    components_within(g, &g.vertices().collect())
}

/// Connected components of the subgraph induced by `within`.
pub fn components_within(g: &DynGraph, within: &BTreeSet<VertexId>) -> Vec<Vec<VertexId>> {
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut out = Vec::new();
    for &root in within {
        if !seen.insert(root) {
            continue;
        }
        let mut comp = vec![root];
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(w, _) in g.incident(u) {
                if within.contains(&w) && seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Open neighbourhood of a vertex set.
pub fn neighborhood(g: &DynGraph, set: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::new();
    for &u in set {
        for &(w, _) in g.incident(u) {
            if !set.contains(&w) {
                out.insert(w);
            }
        }
    }
    out
}

pub fn parse_graph(text: &str) -> Result<DynGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Parse { line: hl, msg: "expected `n m`".into() });
    }
    let num = |s: &str, line: usize| -> Result<u64> {
        s.parse::<u64>().map_err(|_| Error::Parse { line, msg: format!("bad integer `{s}`") })
    };
    let n = num(head[0], hl)?;
    let m = num(head[1], hl)?;
    let mut g = DynGraph::new();
    let (mut seen_v, mut seen_e) = (0u64, 0u64);
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let bad = |msg: String| Error::Parse { line, msg };
        match parts.as_slice() {
            ["v", id, w] => {
                let id = VertexId(num(id, line)? as u32);
                g.add_vertex(id, num(w, line)?).map_err(|e| bad(e.to_string()))?;
                seen_v += 1;
            }
            ["e", u, v] => {
                let u = VertexId(num(u, line)? as u32);
                let v = VertexId(num(v, line)? as u32);
                g.add_edge(u, v).map_err(|e| bad(e.to_string()))?;
                seen_e += 1;
            }
            _ => return Err(bad(format!("unrecognised line `{l}`"))),
        }
    }
    if seen_v != n || seen_e != m {
        return Err(Error::Parse {
            line: hl,
            msg: format!("header promised {n} vertices and {m} edges, found {seen_v} and {seen_e}"),
        });
    }
    Ok(g)
}

pub fn write_graph(g: &DynGraph) -> String {
    let mut s = String::new();
    writeln!(s, "{} {}", g.num_vertices(), g.num_edges()).unwrap();
    for (v, w) in g.weighted_vertices() {
        writeln!(s, "v {v} {w}").unwrap();
    }
    for (_, u, v) in g.edges() {
        writeln!(s, "e {u} {v}").unwrap();
    }
    s
}
