//! Exact dynamic programming over elimination forests.
//!
//! Both problems are compiled into a [`Problem`]: variables with finite
//! domains, unary gains (maximised; [`NEG`] marks a forbidden value) and
//! binary relations. Domination maximises negated cost.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::csp::CspInstance;
use crate::decomp::{elimination_forest_unbalanced, heuristic_td, EliminationForest, TreeDecomposition};
use crate::error::{Error, Result};
use crate::gendom::DominationInstance;
use crate::graph::DynGraph;
use crate::relation::Relation;
use crate::types::{Cost, EdgeLabel, MixedRadix, VertexId, Weight};

pub const NEG: i64 = i64::MIN / 4;

const DENSE_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug, Default)]
pub struct Problem {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    gains: Vec<Vec<i64>>,
    rels: Vec<(usize, usize, Relation)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Problem {
    /// `ids` must be sorted.
    pub fn new(ids: Vec<VertexId>, gains: Vec<Vec<i64>>) -> Self {
        let index = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adj = vec![vec![]; ids.len()];
        Problem { ids, index, gains, rels: vec![], adj }
    }

    pub fn add_relation(&mut self, u: usize, v: usize, rel: Relation) {
        let r = self.rels.len();
        self.rels.push((u, v, rel));
        self.adj[u].push((v, r));
        self.adj[v].push((u, r));
    }

    pub fn from_csp(inst: &CspInstance, subset: Option<&BTreeSet<VertexId>>) -> Self {
        let keep = |v: VertexId| subset.map_or(true, |s| s.contains(&v));
        let ids: Vec<VertexId> = inst.vertices().filter(|&v| keep(v)).collect();
        let gains = ids.iter().map(|&v| inst.revenue(v).iter().map(|&r| r as i64).collect()).collect();
        let mut p = Problem::new(ids, gains);
        for (u, v, rel) in inst.constraints() {
            if keep(u) && keep(v) {
                let (a, b) = (p.index[&u], p.index[&v]);
                p.add_relation(a, b, rel.clone());
            }
        }
        p
    }

    /// Edges leaving `subset` are ignored.
    pub fn from_domination(inst: &DominationInstance, subset: Option<&BTreeSet<VertexId>>) -> Self {
        let keep = |v: VertexId| subset.map_or(true, |s| s.contains(&v));
        let ids: Vec<VertexId> = inst.vertices().filter(|&v| keep(v)).collect();
        let gains = ids
            .iter()
            .map(|&v| inst.costs(v).iter().map(|c| c.finite().map_or(NEG, |c| -(c as i64))).collect())
            .collect();
        let mut p = Problem::new(ids, gains);
        let mut pairs: BTreeMap<(VertexId, VertexId), Vec<EdgeLabel>> = BTreeMap::new();
        for (l, u, v) in inst.graph().edges() {
            if keep(u) && keep(v) {
                pairs.entry((u.min(v), u.max(v))).or_default().push(l);
            }
        }
        for ((u, v), labels) in pairs {
            let rel = Relation::table(inst.domain_size(u) as u32, inst.domain_size(v) as u32, |a, b| {
                labels.iter().all(|&l| inst.edge_ok(l, u, a as usize, v, b as usize))
            });
            let (a, b) = (p.index[&u], p.index[&v]);
            p.add_relation(a, b, rel);
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn var(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn domain(&self, u: usize) -> u32 {
        self.gains[u].len() as u32
    }

    pub fn gain(&self, u: usize, x: u32) -> i64 {
        self.gains[u][x as usize]
    }

    /// Forbids every value of `u` failing `keep`.
    pub fn restrict(&mut self, u: usize, keep: impl Fn(u32) -> bool) {
        for (x, g) in self.gains[u].iter_mut().enumerate() {
            if !keep(x as u32) {
                *g = NEG;
            }
        }
    }

    #[inline]
    pub fn allows(&self, rel: usize, u: usize, xu: u32, xv: u32) -> bool {
        let (a, _, r) = &self.rels[rel];
        if *a == u {
            r.allows(xu, xv)
        } else {
            r.allows(xv, xu)
        }
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adj[u]
    }

    pub fn graph(&self) -> DynGraph {
        let mut g = DynGraph::new_multigraph();
        for &v in &self.ids {
            g.add_vertex(v, 0).unwrap();
        }
        for (a, b, _) in &self.rels {
            g.add_edge(self.ids[*a], self.ids[*b]).unwrap();
        }
        g
    }

    /// Objective of a total assignment, `None` if infeasible.
    pub fn evaluate(&self, x: &[u32]) -> Option<i64> {
        let mut total = 0;
        for (u, &xu) in x.iter().enumerate() {
            let g = self.gains[u][xu as usize];
            if g == NEG {
                return None;
            }
            total += g;
        }
        for (r, (a, b, rel)) in self.rels.iter().enumerate() {
            let _ = r;
            if !rel.allows(x[*a], x[*b]) {
                return None;
            }
        }
        Some(total)
    }

    fn tuple_layout(&self, u: usize) -> Option<TupleLayout> {
        let mut digits: Vec<(u64, u32, usize)> = vec![];
        for &(_, r) in &self.adj[u] {
            if let (a, _, Relation::Projection { tuple_on_left, stride, radix }) = &self.rels[r] {
                if (*a == u) == *tuple_on_left {
                    digits.push((*stride, *radix, r));
                }
            }
        }
        if digits.is_empty() {
            return None;
        }
        digits.sort_by(|x, y| y.0.cmp(&x.0));
        let mut expect = 1u64;
        for &(s, r, _) in digits.iter().rev() {
            if s != expect {
                return None;
            }
            expect = s * r as u64;
        }
        if expect + 1 != self.domain(u) as u64 {
            return None;
        }
        let digit_of = digits.iter().enumerate().map(|(i, d)| (d.2, i)).collect();
        Some(TupleLayout { digits: digits.iter().map(|d| (d.0, d.1)).collect(), digit_of })
    }
}

/// Full mixed-radix layout of a tuple variable, recovered from its
/// projection constraints.
#[derive(Clone, Debug)]
struct TupleLayout {
    digits: Vec<(u64, u32)>,
    digit_of: HashMap<usize, usize>,
}

/// Candidate generation for one variable given values of some neighbours.
struct Candidates<'a> {
    p: &'a Problem,
    layouts: Vec<Option<TupleLayout>>,
}

impl<'a> Candidates<'a> {
    fn new(p: &'a Problem) -> Self {
        let layouts = (0..p.num_vars()).map(|u| p.tuple_layout(u)).collect();
        Candidates { p, layouts }
    }

    /// Values of `u` with non-forbidden gain, compatible with every
    /// `(relation, neighbour value)` in `fixed`.
    fn fill(&self, u: usize, fixed: &[(usize, u32)], out: &mut Vec<u32>) {
        out.clear();
        let p = self.p;
        let ok = |x: u32| p.gains[u][x as usize] != NEG && fixed.iter().all(|&(r, xv)| p.allows(r, u, x, xv));
        if let Some(layout) = &self.layouts[u] {
            let mut forced: Vec<Option<u32>> = vec![None; layout.digits.len()];
            let mut clash = false;
            for &(r, xv) in fixed {
                if xv == 0 {
                    continue;
                }
                if let Some(&d) = layout.digit_of.get(&r) {
                    match forced[d] {
                        Some(prev) if prev != xv => clash = true,
                        _ => forced[d] = Some(xv),
                    }
                }
            }
            if clash || forced.iter().any(|f| f.is_some()) {
                if ok(0) {
                    out.push(0);
                }
                if !clash {
                    let mut t = 0u64;
                    self.enumerate(layout, &forced, 0, &mut t, &mut |t| {
                        let x = (t + 1) as u32;
                        if ok(x) {
                            out.push(x);
                        }
                    });
                }
                return;
            }
        }
        for &(r, xv) in fixed {
            if xv == 0 {
                continue;
            }
            if let (a, _, Relation::Projection { tuple_on_left, stride, radix }) = &p.rels[r] {
                if (*a == u) != *tuple_on_left {
                    let digit = ((xv as u64 - 1) / stride % *radix as u64) as u32;
                    for x in [0, digit] {
                        if ok(x) && !out.contains(&x) {
                            out.push(x);
                        }
                    }
                    return;
                }
            }
        }
        out.extend((0..p.domain(u)).filter(|&x| ok(x)));
    }

    fn enumerate(&self, layout: &TupleLayout, forced: &[Option<u32>], i: usize, t: &mut u64, emit: &mut dyn FnMut(u64)) {
        if i == layout.digits.len() {
            emit(*t);
            return;
        }
        let (stride, radix) = layout.digits[i];
        match forced[i] {
            Some(d) => {
                if d < radix {
                    *t += d as u64 * stride;
                    self.enumerate(layout, forced, i + 1, t, emit);
                    *t -= d as u64 * stride;
                }
            }
            None => {
                for d in 0..radix {
                    *t += d as u64 * stride;
                    self.enumerate(layout, forced, i + 1, t, emit);
                    *t -= d as u64 * stride;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Table {
    Dense(Vec<i64>),
    Sparse { map: HashMap<u64, i64>, default: i64 },
}

impl Table {
    fn new(size: u64, default: i64) -> Table {
        if size <= DENSE_LIMIT {
            Table::Dense(vec![default; size as usize])
        } else {
            Table::Sparse { map: HashMap::new(), default }
        }
    }

    #[inline]
    pub fn get(&self, code: u64) -> i64 {
        match self {
            Table::Dense(v) => v[code as usize],
            Table::Sparse { map, default } => map.get(&code).copied().unwrap_or(*default),
        }
    }

    fn set(&mut self, code: u64, val: i64) {
        match self {
            Table::Dense(v) => v[code as usize] = val,
            Table::Sparse { map, .. } => {
                map.insert(code, val);
            }
        }
    }

    fn add_assign(&mut self, other: &Table) {
        match (self, other) {
            (Table::Dense(a), Table::Dense(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += *y;
                }
            }
            (Table::Sparse { map, default }, Table::Sparse { map: m2, default: d2 }) => {
                let keys: BTreeSet<u64> = map.keys().chain(m2.keys()).copied().collect();
                let d1 = *default;
                for k in keys {
                    let v = map.get(&k).copied().unwrap_or(d1) + m2.get(&k).copied().unwrap_or(*d2);
                    map.insert(k, v);
                }
                *default = d1 + *d2;
            }
            _ => unreachable!("tables over the same space share a representation"),
        }
    }
}

/// Valuation DP over an elimination forest whose vertex order equals the
/// problem's variable order.
struct Engine<'a> {
    p: &'a Problem,
    f: &'a EliminationForest,
    cands: Candidates<'a>,
    budget: u64,
}

struct RunOutput {
    tables: Vec<Option<Table>>,
    radix: Vec<MixedRadix>,
}

impl<'a> Engine<'a> {
    fn new(p: &'a Problem, f: &'a EliminationForest, budget: u64) -> Result<Self> {
        if p.ids != f.ids {
            return Err(Error::InvalidDecomposition("forest and problem cover different vertices".into()));
        }
        Ok(Engine { p, f, cands: Candidates::new(p), budget })
    }

    /// Computes `T[u][φ]` for every `u` and every valuation `φ` of
    /// `Reach(u)`, skipping those violating a constraint inside `Reach(u)`
    /// when `prune` is set; skipped entries hold `default`. With
    /// `keep == false` child tables are dropped once consumed.
    fn run(&self, default: i64, keep: bool, prune: bool) -> Result<RunOutput> {
        let n = self.p.num_vars();
        let f = self.f;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&u| std::cmp::Reverse(f.depth[u]));
        let mut tables: Vec<Option<Table>> = (0..n).map(|_| None).collect();
        let mut radix: Vec<MixedRadix> = vec![MixedRadix::new(vec![]).unwrap(); n];
        let mut work: u64 = 0;
        let mut cand_buf = vec![];
        for &u in &order {
            let reach = &f.reach[u];
            let mr = MixedRadix::new(reach.iter().map(|&r| self.p.domain(r)).collect())?;
            let pos_in_reach: HashMap<usize, usize> = reach.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            // (child table, strides of Reach-positions, stride of u)
            let mut kids: Vec<(usize, Vec<(usize, u64)>, u64)> = vec![];
            for &c in &f.children[u] {
                let cr = &f.reach[c];
                let mut map = vec![];
                let mut ustride = 0;
                for (i, &x) in cr.iter().enumerate() {
                    let s = radix[c].strides()[i];
                    if x == u {
                        ustride = s;
                    } else {
                        map.push((pos_in_reach[&x], s));
                    }
                }
                kids.push((c, map, ustride));
            }
            // constraints among Reach members, to earlier positions
            let inner: Vec<Vec<(usize, usize)>> = reach
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    self.p.adj[r]
                        .iter()
                        .filter_map(|&(w, rel)| pos_in_reach.get(&w).filter(|&&j| j < i).map(|&j| (j, rel)))
                        .collect()
                })
                .collect();
            let ucons: Vec<(usize, usize)> = self.p.adj[u]
                .iter()
                .filter_map(|&(w, rel)| pos_in_reach.get(&w).map(|&j| (j, rel)))
                .collect();

            let mut table = Table::new(mr.size(), default);
            let r = reach.len();
            let mut vals = vec![0u32; r];
            let mut stack: Vec<Vec<u32>> = Vec::with_capacity(r + 1);
            let mut fixed = vec![];
            let mut push_level = |depth: usize, vals: &[u32], stack: &mut Vec<Vec<u32>>| {
                fixed.clear();
                if prune {
                    for &(j, rel) in &inner[depth] {
                        fixed.push((rel, vals[j]));
                    }
                }
                let mut out = vec![];
                self.cands.fill(reach[depth], &fixed, &mut out);
                out.reverse();
                stack.push(out);
            };
            if r > 0 {
                push_level(0, &vals, &mut stack);
            }
            loop {
                if stack.len() < r {
                    // descend
                    let d = stack.len() - 1;
                    match stack[d].pop() {
                        Some(x) => {
                            vals[d] = x;
                            push_level(d + 1, &vals, &mut stack);
                        }
                        None => {
                            stack.pop();
                            if stack.is_empty() {
                                break;
                            }
                        }
                    }
                    continue;
                }
                if r > 0 {
                    let d = r - 1;
                    match stack[d].pop() {
                        Some(x) => vals[d] = x,
                        None => {
                            stack.pop();
                            if stack.is_empty() {
                                break;
                            }
                            continue;
                        }
                    }
                }
                // full valuation of Reach(u)
                let code = mr.encode(&vals);
                let fixed_u: Vec<(usize, u32)> = ucons.iter().map(|&(j, rel)| (rel, vals[j])).collect();
                self.cands.fill(u, &fixed_u, &mut cand_buf);
                let bases: Vec<u64> =
                    kids.iter().map(|(_, map, _)| map.iter().map(|&(j, s)| vals[j] as u64 * s).sum()).collect();
                let mut best = NEG;
                'values: for &x in &cand_buf {
                    let mut s = self.p.gains[u][x as usize];
                    for (k, (c, _, us)) in kids.iter().enumerate() {
                        let t = tables[*c].as_ref().unwrap().get(bases[k] + x as u64 * us);
                        if t <= NEG / 2 {
                            continue 'values;
                        }
                        s += t;
                    }
                    best = best.max(s);
                }
                work += 1 + cand_buf.len() as u64 * (1 + kids.len() as u64);
                if work > self.budget {
                    return Err(Error::TooLarge(format!("dynamic programme exceeds {} steps", self.budget)));
                }
                table.set(code, best);
                if r == 0 {
                    break;
                }
            }
            if !keep {
                for &c in &f.children[u] {
                    tables[c] = None;
                }
            }
            tables[u] = Some(table);
            radix[u] = mr;
        }
        Ok(RunOutput { tables, radix })
    }

    fn maximize(&self) -> Result<Option<i64>> {
        let out = self.run(NEG, false, true)?;
        let mut total = 0i64;
        for u in 0..self.p.num_vars() {
            if self.f.parent[u].is_none() {
                let t = out.tables[u].as_ref().unwrap().get(0);
                if t <= NEG / 2 {
                    return Ok(None);
                }
                total += t;
            }
        }
        Ok(Some(total))
    }
}

pub trait ExactSolver {
    /// Maximum objective, `None` if every assignment is forbidden.
    fn maximize(&self, p: &Problem) -> Result<Option<i64>>;
}

/// DP over a min-fill elimination forest.
#[derive(Clone, Debug)]
pub struct DpSolver {
    pub width_cap: usize,
    pub budget: u64,
}

impl Default for DpSolver {
    fn default() -> Self {
        DpSolver { width_cap: 64, budget: 1 << 32 }
    }
}

impl ExactSolver for DpSolver {
    fn maximize(&self, p: &Problem) -> Result<Option<i64>> {
        let g = p.graph();
        let td = heuristic_td(&g, self.width_cap)?;
        let f = elimination_forest_unbalanced(&g, &td)?;
        Engine::new(p, &f, self.budget)?.maximize()
    }
}

/// Depth-first branch and bound; meant for small components.
#[derive(Clone, Debug, Default)]
pub struct SearchSolver;

impl ExactSolver for SearchSolver {
    fn maximize(&self, p: &Problem) -> Result<Option<i64>> {
        let n = p.num_vars();
        let cands = Candidates::new(p);
        // most constrained first
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&u| (std::cmp::Reverse(p.adj[u].len()), u));
        let best_gain: Vec<i64> = p.gains.iter().map(|g| g.iter().copied().filter(|&x| x != NEG).max().unwrap_or(NEG)).collect();
        if best_gain.iter().any(|&g| g == NEG) {
            return Ok(None);
        }
        let mut suffix = vec![0i64; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + best_gain[order[i]];
        }
        let mut assign = vec![u32::MAX; n];
        let mut best = None;
        fn go(
            i: usize,
            acc: i64,
            order: &[usize],
            p: &Problem,
            cands: &Candidates,
            suffix: &[i64],
            assign: &mut Vec<u32>,
            best: &mut Option<i64>,
        ) {
            if best.map_or(false, |b| acc + suffix[i] <= b) {
                return;
            }
            if i == order.len() {
                *best = Some(acc);
                return;
            }
            let u = order[i];
            let fixed: Vec<(usize, u32)> = p.adj[u]
                .iter()
                .filter(|&&(w, _)| assign[w] != u32::MAX)
                .map(|&(w, r)| (r, assign[w]))
                .collect();
            let mut out = vec![];
            cands.fill(u, &fixed, &mut out);
            out.sort_by_key(|&x| std::cmp::Reverse(p.gains[u][x as usize]));
            for x in out {
                assign[u] = x;
                go(i + 1, acc + p.gains[u][x as usize], order, p, cands, suffix, assign, best);
            }
            assign[u] = u32::MAX;
        }
        go(0, 0, &order, p, &cands, &suffix, &mut assign, &mut best);
        Ok(best)
    }
}

fn forest_for(g: &DynGraph, td: &TreeDecomposition) -> Result<EliminationForest> {
    td.validate(g)?;
    elimination_forest_unbalanced(g, td)
}

/// Exact optimum of a 2CSP instance given a decomposition of its Gaifman graph.
pub fn solve_csp(inst: &CspInstance, td: &TreeDecomposition) -> Result<Weight> {
    let f = forest_for(inst.graph(), td)?;
    let p = Problem::from_csp(inst, None);
    Ok(Engine::new(&p, &f, u64::MAX)?.maximize()?.unwrap_or(0).max(0) as Weight)
}

/// Exact minimum cost of a domination instance given a decomposition.
pub fn solve_domination(inst: &DominationInstance, td: &TreeDecomposition) -> Result<Cost> {
    let f = forest_for(inst.graph(), td)?;
    let p = Problem::from_domination(inst, None);
    Ok(match Engine::new(&p, &f, u64::MAX)?.maximize()? {
        Some(v) => Cost::Finite((-v) as u64),
        None => Cost::Inf,
    })
}

/// Tables of the dynamic 2CSP compression.
#[derive(Clone, Debug)]
pub struct DpTables {
    forest: EliminationForest,
    t: Vec<Table>,
    radix: Vec<MixedRadix>,
    /// Per vertex: children grouped by their `Reach` set, with summed tables.
    w: Vec<Vec<(Vec<usize>, Vec<usize>, Table)>>,
}

impl DpTables {
    pub fn forest(&self) -> &EliminationForest {
        &self.forest
    }

    /// Mixed-radix layout of valuations of `Reach(u)` (ascending id).
    pub fn layout(&self, u: VertexId) -> &MixedRadix {
        &self.radix[self.forest.index[&u]]
    }

    pub fn t(&self, u: VertexId, code: u64) -> Weight {
        self.t[self.forest.index[&u]].get(code) as Weight
    }

    /// Neighbourhood groups `N_u` with the number of children in each.
    pub fn groups(&self, u: VertexId) -> Vec<(Vec<VertexId>, usize)> {
        self.w[self.forest.index[&u]]
            .iter()
            .map(|(r, kids, _)| (r.iter().map(|&x| self.forest.ids[x]).collect(), kids.len()))
            .collect()
    }

    /// `W[u][R][code]` for the `i`-th group of `u`.
    pub fn w(&self, u: VertexId, i: usize, code: u64) -> Weight {
        self.w[self.forest.index[&u]][i].2.get(code) as Weight
    }

    pub fn optimum(&self) -> Weight {
        (0..self.forest.len()).filter(|&u| self.forest.parent[u].is_none()).map(|u| self.t[u].get(0) as Weight).sum()
    }
}

/// `T`, `W` and `N` over `f`, defined on every valuation of each `Reach`.
pub fn compute_tables(inst: &CspInstance, f: &EliminationForest) -> Result<DpTables> {
    let p = Problem::from_csp(inst, None);
    let out = Engine::new(&p, f, u64::MAX)?.run(0, true, false)?;
    let t: Vec<Table> = out.tables.into_iter().map(|t| t.unwrap()).collect();
    let mut w = vec![];
    for u in 0..f.len() {
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for &c in &f.children[u] {
            groups.entry(f.reach[c].clone()).or_default().push(c);
        }
        w.push(
            groups
                .into_iter()
                .map(|(r, kids)| {
                    let mut sum = t[kids[0]].clone();
                    for &c in &kids[1..] {
                        sum.add_assign(&t[c]);
                    }
                    (r, kids, sum)
                })
                .collect(),
        );
    }
    Ok(DpTables { forest: f.clone(), t, radix: out.radix, w })
}

pub const MAX_BOUNDARY: usize = 64;
/// Entry cap for a single interaction table.
pub const MAX_INTERACTIONS: usize = 1 << 22;

/// Interaction code: bit `2i` = Supply, bit `2i+1` = Demand on the `i`-th
/// boundary edge (ascending label).
pub type Interaction = u128;

const SUPPLY_BITS: Interaction = 0x5555_5555_5555_5555_5555_5555_5555_5555;

/// Drops every interaction for which another one with the same supply
/// demands at most the same edges and costs no more.
///
/// Pruning against a strictly larger supply would be sound for the optimum,
/// but it loses the exact-union states that make collapsed vertices
/// state-monotonous, so only equal supplies are compared. The pruned table of
/// a subtree still composes: replacing a child entry by one that prunes it
/// keeps the supply of the result and can only shrink its demand and cost.
pub fn prune_dominated(table: HashMap<Interaction, u64>) -> HashMap<Interaction, u64> {
    if table.len() <= 1 {
        return table;
    }
    let used = table.keys().fold(0, |a, &x| a | x);
    let bits = (Interaction::BITS - used.leading_zeros()).div_ceil(2) as usize;
    let mut groups: HashMap<Interaction, Vec<(u64, u32, Interaction)>> = HashMap::new();
    for (x, c) in table {
        let d = (x >> 1) & SUPPLY_BITS;
        groups.entry(x & SUPPLY_BITS).or_default().push((c, d.count_ones(), x));
    }
    let mut out = HashMap::new();
    for mut group in groups.into_values() {
        group.sort_unstable();
        // demand bits packed and complemented: fewer demands is a superset
        let mut trie = SupersetTrie::new(bits);
        for (c, _, x) in group {
            let v = !compact(x >> 1) & ((1 << bits) - 1);
            if trie.has_superset(v) {
                continue;
            }
            trie.insert(v);
            out.insert(x, c);
        }
    }
    out
}

/// Packs the even bits of `x` into the low half.
fn compact(x: Interaction) -> Interaction {
    let mut out = 0;
    let mut x = x & SUPPLY_BITS;
    while x != 0 {
        let i = x.trailing_zeros();
        out |= 1 << (i / 2);
        x &= x - 1;
    }
    out
}

/// Binary trie over fixed-width codes, most significant bit first. Each node
/// keeps the union of the codes below it, which cuts off most branches of a
/// superset query.
struct SupersetTrie {
    bits: usize,
    // child links (0 means absent; the root is never a child) and unions
    nodes: Vec<([u32; 2], Interaction)>,
}

impl SupersetTrie {
    fn new(bits: usize) -> Self {
        SupersetTrie { bits, nodes: vec![([0, 0], 0)] }
    }

    fn insert(&mut self, v: Interaction) {
        let mut at = 0;
        self.nodes[0].1 |= v;
        for i in (0..self.bits).rev() {
            let b = ((v >> i) & 1) as usize;
            if self.nodes[at].0[b] == 0 {
                self.nodes[at].0[b] = self.nodes.len() as u32;
                self.nodes.push(([0, 0], 0));
            }
            at = self.nodes[at].0[b] as usize;
            self.nodes[at].1 |= v;
        }
    }

    fn has_superset(&self, v: Interaction) -> bool {
        if self.nodes[0].1 & v != v {
            return false;
        }
        let mut stack = vec![(0usize, self.bits)];
        while let Some((at, depth)) = stack.pop() {
            if depth == 0 {
                return true;
            }
            let i = depth - 1;
            let low = v & ((1 << i) - 1);
            let [zero, one] = self.nodes[at].0;
            for (child, bit) in [(zero, 0), (one, 1)] {
                if child == 0 || bit < (v >> i) & 1 {
                    continue;
                }
                if self.nodes[child as usize].1 & low == low {
                    stack.push((child as usize, i));
                }
            }
        }
        false
    }
}

/// Per vertex `u` of a forest over a subset of an instance: the boundary
/// edges (one endpoint in `desc[u]`) and the minimum finite cost of a locally
/// correct valuation of `desc[u]` per interaction, keeping only interactions
/// not dominated by another (see [`prune_dominated`]).
#[derive(Clone, Debug)]
pub struct DomTables {
    forest: EliminationForest,
    boundary: Vec<Vec<EdgeLabel>>,
    t: Vec<HashMap<Interaction, u64>>,
}

impl DomTables {
    pub fn forest(&self) -> &EliminationForest {
        &self.forest
    }

    pub fn boundary(&self, u: VertexId) -> &[EdgeLabel] {
        &self.boundary[self.forest.index[&u]]
    }

    pub fn cost(&self, u: VertexId, x: Interaction) -> Cost {
        self.t[self.forest.index[&u]].get(&x).map_or(Cost::Inf, |&c| Cost::Finite(c))
    }

    /// Finite entries of `T[u]`.
    pub fn entries(&self, u: VertexId) -> &HashMap<Interaction, u64> {
        &self.t[self.forest.index[&u]]
    }

    pub fn optimum(&self) -> Cost {
        (0..self.forest.len())
            .filter(|&u| self.forest.parent[u].is_none())
            .map(|u| self.t[u].get(&0).map_or(Cost::Inf, |&c| Cost::Finite(c)))
            .fold(Cost::ZERO, |a, b| a + b)
    }
}

/// Interaction-indexed tables, bottom-up over `f`.
pub fn compute_domination_tables(inst: &DominationInstance, f: &EliminationForest) -> Result<DomTables> {
    let g = inst.graph();
    let n = f.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(f.depth[u]));
    let mut boundary: Vec<Vec<EdgeLabel>> = vec![vec![]; n];
    let mut t: Vec<HashMap<Interaction, u64>> = vec![HashMap::new(); n];
    for &u in &order {
        let uid = f.ids[u];
        let below = |w: VertexId| f.index.get(&w).map_or(false, |&wi| f.depth[wi] > f.depth[u]);
        let mut own: Vec<EdgeLabel> = g.incident(uid).iter().filter(|&&(w, _)| !below(w)).map(|&(_, l)| l).collect();
        own.sort();
        let mut set: BTreeSet<EdgeLabel> = own.iter().copied().collect();
        for &c in &f.children[u] {
            for &l in &boundary[c] {
                let (a, b) = g.endpoints(l).unwrap();
                if a != uid && b != uid {
                    set.insert(l);
                }
            }
        }
        let bu: Vec<EdgeLabel> = set.into_iter().collect();
        if bu.len() > MAX_BOUNDARY {
            return Err(Error::TooLarge(format!("{} boundary edges below {uid}", bu.len())));
        }
        let pos: HashMap<EdgeLabel, usize> = bu.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        // per child: (child, projections (child pos, u pos), edges to u (child pos, label))
        let kids: Vec<(usize, Vec<(usize, usize)>, Vec<(usize, EdgeLabel)>)> = f.children[u]
            .iter()
            .map(|&c| {
                let mut proj = vec![];
                let mut to_u = vec![];
                for (i, &l) in boundary[c].iter().enumerate() {
                    match pos.get(&l) {
                        Some(&p) => proj.push((i, p)),
                        None => to_u.push((i, l)),
                    }
                }
                (c, proj, to_u)
            })
            .collect();
        let mut table: HashMap<Interaction, u64> = HashMap::new();
        let mut valid_cache: HashMap<(usize, Interaction), HashMap<Interaction, u64>> = HashMap::new();
        for (x, cost) in inst.costs(uid).iter().enumerate() {
            let Some(cost) = cost.finite() else { continue };
            let mut code: Interaction = 0;
            for &l in &own {
                let p = pos[&l];
                if inst.supplies(l, uid, x) {
                    code |= 1 << (2 * p);
                }
                if inst.demands(l, uid, x) {
                    code |= 2 << (2 * p);
                }
            }
            let mut acc: HashMap<Interaction, u64> = HashMap::from([(code, cost)]);
            for (k, (c, proj, to_u)) in kids.iter().enumerate() {
                // the child's entries depend on x only through these flags
                let mut sig: Interaction = 0;
                for (j, &(_, l)) in to_u.iter().enumerate() {
                    sig |= (inst.supplies(l, uid, x) as Interaction) << (2 * j);
                    sig |= (inst.demands(l, uid, x) as Interaction) << (2 * j + 1);
                }
                let valid = valid_cache.entry((k, sig)).or_insert_with(|| {
                    let mut valid: HashMap<Interaction, u64> = HashMap::new();
                    'entries: for (&cx, &cc) in &t[*c] {
                        for (j, &(i, _)) in to_u.iter().enumerate() {
                            let flags = (cx >> (2 * i)) & 3;
                            let (sup, dem) = ((sig >> (2 * j)) & 1, (sig >> (2 * j + 1)) & 1);
                            if flags & 2 != 0 && sup == 0 || dem != 0 && flags & 1 == 0 {
                                continue 'entries;
                            }
                        }
                        let mut pc: Interaction = 0;
                        for &(i, p) in proj {
                            pc |= ((cx >> (2 * i)) & 3) << (2 * p);
                        }
                        let e = valid.entry(pc).or_insert(u64::MAX);
                        *e = (*e).min(cc);
                    }
                    prune_dominated(valid)
                });
                let mut next: HashMap<Interaction, u64> = HashMap::new();
                for (&a, &ca) in &acc {
                    for (&b, &cb) in valid.iter() {
                        let e = next.entry(a | b).or_insert(u64::MAX);
                        *e = (*e).min(ca.saturating_add(cb));
                    }
                }
                if next.len() > MAX_INTERACTIONS {
                    return Err(Error::TooLarge(format!("more than {MAX_INTERACTIONS} interactions below {uid}")));
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            for (k, c) in acc {
                let e = table.entry(k).or_insert(u64::MAX);
                *e = (*e).min(c);
            }
        }
        boundary[u] = bu;
        t[u] = prune_dominated(table);
    }
    Ok(DomTables { forest: f.clone(), boundary, t })
}
