//! Tree decompositions and elimination forests.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::DynGraph;
use crate::types::VertexId;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeDecomposition {
    /// Sorted bags.
    pub bags: Vec<Vec<VertexId>>,
    pub parent: Vec<Option<usize>>,
}

impl TreeDecomposition {
    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.bags.len()];
        for start in 0..self.bags.len() {
            let mut path = vec![];
            let mut x = start;
            while depth[x] == usize::MAX {
                path.push(x);
                match self.parent[x] {
                    Some(p) => x = p,
                    None => break,
                }
            }
            let mut d = if depth[x] == usize::MAX { 0 } else { depth[x] + 1 };
            for &y in path.iter().rev() {
                if depth[y] == usize::MAX {
                    depth[y] = d;
                    d += 1;
                }
            }
        }
        depth
    }

    /// Maximum number of nodes on a root-to-leaf path.
    pub fn height(&self) -> usize {
        self.depths().into_iter().map(|d| d + 1).max().unwrap_or(0)
    }

    fn node_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![vec![]; self.bags.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                adj[i].push(p);
                adj[p].push(i);
            }
        }
        adj
    }

    pub fn validate(&self, g: &DynGraph) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDecomposition(m));
        if self.parent.len() != self.bags.len() {
            return bad("parent and bag counts differ".into());
        }
        let mut occ: HashMap<VertexId, Vec<usize>> = HashMap::new();
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if !g.has_vertex(v) {
                    return bad(format!("bag {i} holds unknown vertex {v}"));
                }
                occ.entry(v).or_default().push(i);
            }
        }
        for v in g.vertices() {
            let Some(nodes) = occ.get(&v) else {
                return bad(format!("vertex {v} is in no bag"));
            };
            let tops = nodes
                .iter()
                .filter(|&&i| self.parent[i].map_or(true, |p| self.bags[p].binary_search(&v).is_err()))
                .count();
            if tops != 1 {
                return bad(format!("bags of vertex {v} are not connected"));
            }
        }
        for (_, u, v) in g.edges() {
            if !occ[&u].iter().any(|&i| self.bags[i].binary_search(&v).is_ok()) {
                return bad(format!("edge {u}-{v} is not covered"));
            }
        }
        Ok(())
    }
}

/// Dense local view of a graph: sorted ids and distinct-neighbour lists.
pub(crate) struct LocalGraph {
    pub ids: Vec<VertexId>,
    pub adj: Vec<Vec<usize>>,
}

impl LocalGraph {
    pub fn new(g: &DynGraph) -> Self {
        let ids: Vec<VertexId> = g.vertices().collect();
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adj = ids
            .iter()
            .map(|&v| g.neighbors(v).into_iter().map(|w| index[&w]).collect())
            .collect();
        LocalGraph { ids, adj }
    }
}

/// Greedy min-fill elimination with min-degree and smallest-index tie-breaks.
/// Returns the elimination order and, per vertex, its later neighbours in
/// the filled graph.
pub(crate) fn min_fill_elimination(adj: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = adj.len();
    let mut nb: Vec<HashSet<usize>> = adj.iter().map(|a| a.iter().copied().collect()).collect();
    let fill = |nb: &Vec<HashSet<usize>>, x: usize| -> usize {
        let list: Vec<usize> = nb[x].iter().copied().collect();
        let mut missing = 0;
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                if !nb[list[i]].contains(&list[j]) {
                    missing += 1;
                }
            }
        }
        missing
    };
    let mut key: Vec<(usize, usize)> = (0..n).map(|x| (fill(&nb, x), nb[x].len())).collect();
    let mut queue: BTreeSet<(usize, usize, usize)> = (0..n).map(|x| (key[x].0, key[x].1, x)).collect();
    let mut order = Vec::with_capacity(n);
    let mut higher = vec![vec![]; n];
    while let Some((_, _, x)) = queue.pop_first() {
        let mut later: Vec<usize> = nb[x].iter().copied().collect();
        later.sort_unstable();
        for &a in &later {
            nb[a].remove(&x);
        }
        for i in 0..later.len() {
            for j in i + 1..later.len() {
                let (a, b) = (later[i], later[j]);
                if nb[a].insert(b) {
                    nb[b].insert(a);
                }
            }
        }
        let mut affected: BTreeSet<usize> = later.iter().copied().collect();
        for &a in &later {
            affected.extend(nb[a].iter().copied());
        }
        for y in affected {
            if queue.remove(&(key[y].0, key[y].1, y)) {
                key[y] = (fill(&nb, y), nb[y].len());
                queue.insert((key[y].0, key[y].1, y));
            }
        }
        nb[x].clear();
        order.push(x);
        higher[x] = later;
    }
    (order, higher)
}

/// Tree decomposition from a min-fill elimination ordering; fails with
/// `WidthExceeded` when the achieved width is above `width_cap`.
pub fn heuristic_td(g: &DynGraph, width_cap: usize) -> Result<TreeDecomposition> {
    let lg = LocalGraph::new(g);
    let (order, higher) = min_fill_elimination(&lg.adj);
    let width = higher.iter().map(|h| h.len()).max().unwrap_or(0);
    if width > width_cap {
        return Err(Error::WidthExceeded { width, cap: width_cap });
    }
    let mut pos = vec![0; order.len()];
    for (i, &x) in order.iter().enumerate() {
        pos[x] = i;
    }
    let mut td = TreeDecomposition::default();
    for &x in &order {
        let mut bag: Vec<VertexId> = higher[x].iter().map(|&y| lg.ids[y]).collect();
        bag.push(lg.ids[x]);
        bag.sort();
        td.bags.push(bag);
        td.parent.push(higher[x].iter().map(|&y| pos[y]).min());
    }
    Ok(td)
}

struct Balancer<'a> {
    td: &'a TreeDecomposition,
    adj: Vec<Vec<usize>>,
    mark: Vec<u64>,
    stamp: u64,
    out: TreeDecomposition,
}

impl Balancer<'_> {
    fn fresh(&mut self, nodes: &[usize]) -> u64 {
        self.stamp += 1;
        for &x in nodes {
            self.mark[x] = self.stamp;
        }
        self.stamp
    }

    /// BFS order and BFS parents inside the marked set.
    fn bfs(&self, start: usize, stamp: u64) -> (Vec<usize>, HashMap<usize, usize>) {
        let mut order = vec![start];
        let mut parent = HashMap::new();
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for &y in &self.adj[x] {
                if self.mark[y] == stamp && y != start && !parent.contains_key(&y) {
                    parent.insert(y, x);
                    order.push(y);
                }
            }
        }
        (order, parent)
    }

    fn centroid(&self, nodes: &[usize], stamp: u64) -> usize {
        let (order, parent) = self.bfs(nodes[0], stamp);
        let mut size: HashMap<usize, usize> = HashMap::new();
        let mut heaviest: HashMap<usize, usize> = HashMap::new();
        for &x in order.iter().rev() {
            let s = 1 + size.get(&x).copied().unwrap_or(0);
            size.insert(x, s);
            if let Some(&p) = parent.get(&x) {
                *size.entry(p).or_insert(0) += s;
                let h = heaviest.entry(p).or_insert(0);
                *h = (*h).max(s);
            }
        }
        let n = nodes.len();
        *order
            .iter()
            .min_by_key(|&&x| (heaviest.get(&x).copied().unwrap_or(0).max(n - size[&x]), x))
            .unwrap()
    }

    /// The node lying on all three pairwise paths between `a`, `b`, `c`.
    fn median(&self, a: usize, b: usize, c: usize, stamp: u64) -> usize {
        let (_, parent) = self.bfs(a, stamp);
        let mut on_path = HashSet::from([a]);
        let mut x = b;
        while x != a {
            on_path.insert(x);
            x = parent[&x];
        }
        let mut y = c;
        while !on_path.contains(&y) {
            y = parent[&y];
        }
        y
    }

    fn build(&mut self, nodes: Vec<usize>, attach: Vec<(usize, usize)>, iface: Vec<VertexId>) -> usize {
        let stamp = self.fresh(&nodes);
        let centroid = self.centroid(&nodes, stamp);
        let c = match attach.as_slice() {
            [(_, t1), (_, t2)] => self.median(*t1, *t2, centroid, stamp),
            _ => centroid,
        };
        let mut bag: BTreeSet<VertexId> = iface.into_iter().collect();
        bag.extend(self.td.bags[c].iter().copied());
        let bag: Vec<VertexId> = bag.into_iter().collect();
        let id = self.out.bags.len();
        self.out.bags.push(bag.clone());
        self.out.parent.push(None);

        let mut parts = vec![];
        self.mark[c] = 0;
        for &t in &self.adj[c].clone() {
            if self.mark[t] != stamp {
                continue;
            }
            let (comp, _) = self.bfs(t, stamp);
            for &x in &comp {
                self.mark[x] = 0;
            }
            parts.push((t, comp));
        }
        for (t, comp) in parts {
            let members: HashSet<usize> = comp.iter().copied().collect();
            let mut sub_attach = vec![(c, t)];
            sub_attach.extend(attach.iter().copied().filter(|&(_, ti)| ti != c && members.contains(&ti)));
            let touching: BTreeSet<VertexId> =
                sub_attach.iter().flat_map(|&(_, ti)| self.td.bags[ti].iter().copied()).collect();
            let sub_iface: Vec<VertexId> = bag.iter().copied().filter(|v| touching.contains(v)).collect();
            let child = self.build(comp, sub_attach, sub_iface);
            self.out.parent[child] = Some(id);
        }
        id
    }
}

/// Rebalances a decomposition of width `w` into one of width at most
/// `3w+2` and logarithmic height by recursive separator splitting.
pub fn balance(td: &TreeDecomposition) -> TreeDecomposition {
    let adj = td.node_adjacency();
    let n = td.num_nodes();
    let mut b = Balancer { td, adj, mark: vec![0; n], stamp: 0, out: TreeDecomposition::default() };
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] || td.parent[root].is_some() {
            continue;
        }
        // collect the whole tree of this root
        let mut tree = vec![root];
        seen[root] = true;
        let mut i = 0;
        while i < tree.len() {
            let x = tree[i];
            i += 1;
            for &y in &b.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    tree.push(y);
                }
            }
        }
        b.build(tree, vec![], vec![]);
    }
    b.out
}

/// Rooted forest on `V(G)` where every edge joins an ancestor-descendant
/// pair, with the cached `Reach` sets.
#[derive(Clone, Debug)]
pub struct EliminationForest {
    pub(crate) ids: Vec<VertexId>,
    pub(crate) index: HashMap<VertexId, usize>,
    pub(crate) parent: Vec<Option<usize>>,
    pub(crate) children: Vec<Vec<usize>>,
    /// Sorted by vertex id.
    pub(crate) reach: Vec<Vec<usize>>,
    pub(crate) depth: Vec<usize>,
    pub(crate) height: usize,
}

impl EliminationForest {
    /// `ids` must be sorted; `parent` is indexed like `ids`.
    pub fn from_parents(g: &DynGraph, ids: Vec<VertexId>, parent: Vec<Option<usize>>) -> Result<Self> {
        let n = ids.len();
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut children = vec![vec![]; n];
        let mut roots = vec![];
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        let mut depth = vec![usize::MAX; n];
        let mut order = vec![];
        let mut stack: Vec<usize> = roots.clone();
        for &r in &roots {
            depth[r] = 0;
        }
        while let Some(x) = stack.pop() {
            order.push(x);
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                stack.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidDecomposition("parent relation has a cycle".into()));
        }
        let mut reach: Vec<Vec<usize>> = vec![vec![]; n];
        for &u in order.iter().rev() {
            let mut set: BTreeSet<usize> = BTreeSet::new();
            for w in g.neighbors(ids[u]) {
                let wi = *index
                    .get(&w)
                    .ok_or_else(|| Error::InvalidDecomposition(format!("neighbour {w} outside the forest")))?;
                if depth[wi] < depth[u] {
                    set.insert(wi);
                }
            }
            for &c in &children[u] {
                set.extend(reach[c].iter().copied().filter(|&x| x != u));
            }
            reach[u] = set.into_iter().collect();
        }
        let height = depth.iter().map(|d| d + 1).max().unwrap_or(0);
        Ok(EliminationForest { ids, index, parent, children, reach, depth, height })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[self.index[&v]].map(|p| self.ids[p])
    }

    pub fn children(&self, v: VertexId) -> Vec<VertexId> {
        self.children[self.index[&v]].iter().map(|&c| self.ids[c]).collect()
    }

    pub fn reach(&self, v: VertexId) -> Vec<VertexId> {
        self.reach[self.index[&v]].iter().map(|&x| self.ids[x]).collect()
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[self.index[&v]]
    }

    pub fn roots(&self) -> Vec<VertexId> {
        (0..self.len()).filter(|&i| self.parent[i].is_none()).map(|i| self.ids[i]).collect()
    }

    pub fn max_reach(&self) -> usize {
        self.reach.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    /// `desc_F[v]`, including `v`.
    pub fn descendants(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![];
        let mut stack = vec![self.index[&v]];
        while let Some(x) = stack.pop() {
            out.push(self.ids[x]);
            stack.extend(self.children[x].iter().copied());
        }
        out.sort();
        out
    }

    /// Strict ancestors, root first.
    pub fn ancestors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![];
        let mut x = self.parent[self.index[&v]];
        while let Some(p) = x {
            out.push(self.ids[p]);
            x = self.parent[p];
        }
        out.reverse();
        out
    }

    /// Bags `{u} ∪ Reach(u)` hung on the forest itself.
    pub fn as_decomposition(&self) -> TreeDecomposition {
        let bags = (0..self.len())
            .map(|i| {
                let mut b: Vec<VertexId> = self.reach[i].iter().map(|&x| self.ids[x]).collect();
                b.push(self.ids[i]);
                b.sort();
                b
            })
            .collect();
        TreeDecomposition { bags, parent: self.parent.clone() }
    }
}

/// Each vertex hangs below the last vertex first introduced higher up; inside
/// a bag, newly introduced vertices are chained in ascending id order.
fn straighten(g: &DynGraph, td: &TreeDecomposition) -> Result<(Vec<VertexId>, Vec<Option<usize>>)> {
    let ids: Vec<VertexId> = g.vertices().collect();
    let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let depth = td.depths();
    let mut top: Vec<Option<usize>> = vec![None; ids.len()];
    for (t, bag) in td.bags.iter().enumerate() {
        for v in bag {
            let i = *index
                .get(v)
                .ok_or_else(|| Error::InvalidDecomposition(format!("bag vertex {v} not in graph")))?;
            if top[i].map_or(true, |s| depth[t] < depth[s]) {
                top[i] = Some(t);
            }
        }
    }
    let mut gamma: Vec<Vec<usize>> = vec![vec![]; td.num_nodes()];
    for (i, t) in top.iter().enumerate() {
        let t = t.ok_or_else(|| Error::InvalidDecomposition(format!("vertex {} is in no bag", ids[i])))?;
        gamma[t].push(i);
    }
    let mut children = vec![vec![]; td.num_nodes()];
    let mut roots = vec![];
    for (t, p) in td.parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(t),
            None => roots.push(t),
        }
    }
    let mut parent = vec![None; ids.len()];
    let mut stack: Vec<(usize, Option<usize>)> = roots.into_iter().map(|r| (r, None)).collect();
    while let Some((t, above)) = stack.pop() {
        let mut last = above;
        for &v in &gamma[t] {
            parent[v] = last;
            last = Some(v);
        }
        for &c in &children[t] {
            stack.push((c, last));
        }
    }
    Ok((ids, parent))
}

/// The elimination tree of `G` for the order "deeper first": every vertex
/// hangs below the first later vertex adjacent to its component among the
/// earlier ones. Descendant sets become connected and each new `Reach` lies
/// inside the old one, so neither height nor `|Reach|` grows.
fn normalize(g: &DynGraph, f: EliminationForest) -> Result<EliminationForest> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(f.depth[u]));
    let mut done = vec![false; f.len()];
    let mut anc: Vec<Option<usize>> = vec![None; f.len()];
    let mut parent = vec![None; f.len()];
    for &u in &order {
        for (x, _) in g.incident(f.ids[u]) {
            let mut r = f.index[x];
            if !done[r] {
                continue;
            }
            while let Some(t) = anc[r].filter(|&t| t != u) {
                anc[r] = Some(u);
                r = t;
            }
            if anc[r].is_none() {
                anc[r] = Some(u);
                parent[r] = Some(u);
            }
        }
        done[u] = true;
    }
    EliminationForest::from_parents(g, f.ids, parent)
}

/// Elimination forest of logarithmic height: balance, straighten, normalize.
pub fn elimination_forest(g: &DynGraph, td: &TreeDecomposition) -> Result<EliminationForest> {
    elimination_forest_unbalanced(g, &balance(td))
}

/// Same construction without the balancing pass.
pub fn elimination_forest_unbalanced(g: &DynGraph, td: &TreeDecomposition) -> Result<EliminationForest> {
    let (ids, parent) = straighten(g, td)?;
    let f = EliminationForest::from_parents(g, ids, parent)?;
    normalize(g, f)
}

/// Vertices outside `z` whose parent is in `z` or which are roots.
pub fn appendices(f: &EliminationForest, z: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
    for &v in z {
        if let Some(&i) = f.index.get(&v) {
            if let Some(p) = f.parent[i] {
                if !z.contains(&f.ids[p]) {
                    return Err(Error::PrefixViolation(v));
                }
            }
        }
    }
    Ok((0..f.len())
        .filter(|&i| !z.contains(&f.ids[i]) && f.parent[i].map_or(true, |p| z.contains(&f.ids[p])))
        .map(|i| f.ids[i])
        .collect())
}

/// Checks the elimination property, the `Reach` sets, connectivity of every
/// descendant set, and that each parent lies in its child's `Reach`.
pub fn verify_forest(g: &DynGraph, f: &EliminationForest) -> std::result::Result<(), String> {
    let anc: Vec<HashSet<usize>> = (0..f.len())
        .map(|i| {
            let mut s = HashSet::new();
            let mut x = f.parent[i];
            while let Some(p) = x {
                s.insert(p);
                x = f.parent[p];
            }
            s
        })
        .collect();
    for (_, u, v) in g.edges() {
        let (iu, iv) = (f.index[&u], f.index[&v]);
        if !anc[iu].contains(&iv) && !anc[iv].contains(&iu) {
            return Err(format!("edge {u}-{v} joins incomparable vertices"));
        }
    }
    for (i, &v) in f.ids.iter().enumerate() {
        let desc: BTreeSet<VertexId> = f.descendants(v).into_iter().collect();
        let n: BTreeSet<VertexId> = crate::graph::neighborhood(g, &desc);
        let reach: BTreeSet<VertexId> = f.reach(v).into_iter().collect();
        if n != reach {
            return Err(format!("Reach({v}) = {reach:?} but N(desc) = {n:?}"));
        }
        if !f.reach[i].iter().all(|x| anc[i].contains(x)) {
            return Err(format!("Reach({v}) leaves the ancestors"));
        }
        if let Some(p) = f.parent[i] {
            if !f.reach[i].contains(&p) {
                return Err(format!("parent of {v} is not in its Reach"));
            }
        }
        let start = *desc.iter().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for w in g.neighbors(x) {
                if desc.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        if seen.len() != desc.len() {
            return Err(format!("desc({v}) is disconnected"));
        }
    }
    Ok(())
}
