//! Static approximation by layering: Baker's scheme for 2CSP, and the
//! lower-bounding variant for generalized domination.

use std::collections::BTreeSet;

use num_rational::Ratio;

use crate::csp::CspInstance;
use crate::dp::{DpSolver, ExactSolver, Problem, SearchSolver};
use crate::error::{Error, Result};
use crate::gendom::{clear, DominationInstance};
use crate::graph::{bfs_layers, components_within};
use crate::types::{Cost, VertexId, Weight};

/// Components up to this size skip decomposition.
pub const SMALL_COMPONENT: usize = 20;
const SMALL_PRODUCT: u64 = 1 << 20;

#[derive(Clone, Debug)]
pub struct BakerOptions {
    /// Width cap for residual components; `None` means `8·m + 8` for `m`
    /// layers per period.
    pub width_cap: Option<usize>,
    pub budget: u64,
}

impl Default for BakerOptions {
    fn default() -> Self {
        BakerOptions { width_cap: None, budget: 1 << 34 }
    }
}

/// `⌈1/x⌉` for `x ∈ (0, 1]`.
pub fn ceil_inverse(x: Ratio<u64>) -> Result<u32> {
    if *x.numer() == 0 || x > Ratio::from_integer(1) {
        return Err(Error::InvalidEpsilon(format!("{x} is not in (0, 1]")));
    }
    let k = x.recip().ceil().to_integer();
    u32::try_from(k).map_err(|_| Error::InvalidEpsilon(format!("{x} is too small")))
}

fn solve_part(p: &Problem, width_cap: usize, budget: u64) -> Result<Option<i64>> {
    let n = p.num_vars();
    let mut product: u64 = 1;
    for u in 0..n {
        product = product.saturating_mul(p.domain(u) as u64);
    }
    if n <= SMALL_COMPONENT && product <= SMALL_PRODUCT {
        SearchSolver.maximize(p)
    } else {
        DpSolver { width_cap, budget }.maximize(p)
    }
}

/// `max_i OPT(I ∖ V_i)` over BFS layer classes mod `ceil(1/ε′)`; lies in
/// `[(1−ε′)·OPT, OPT]`.
pub fn baker_csp(inst: &CspInstance, eps: Ratio<u64>) -> Result<Weight> {
    baker_csp_k(inst, ceil_inverse(eps)?, &BakerOptions::default())
}

pub fn baker_csp_k(inst: &CspInstance, k: u32, opts: &BakerOptions) -> Result<Weight> {
    let g = inst.graph();
    let layers = bfs_layers(g, k);
    let cap = opts.width_cap.unwrap_or(8 * k as usize + 8);
    let mut best = 0;
    for i in 0..k {
        let keep: BTreeSet<VertexId> = g.vertices().filter(|&v| layers.of(v) != Some(i)).collect();
        let mut total: Weight = 0;
        for comp in components_within(g, &keep) {
            let set: BTreeSet<VertexId> = comp.into_iter().collect();
            let p = Problem::from_csp(inst, Some(&set));
            total += solve_part(&p, cap, opts.budget)?.unwrap_or(0).max(0) as Weight;
        }
        best = best.max(total);
    }
    Ok(best)
}

/// The layer sets `V_j = A_{4j+1} ∪ A_{4j+2}` for layers mod `4k`.
pub fn domination_layer_sets(inst: &DominationInstance, k: u32) -> Vec<BTreeSet<VertexId>> {
    let layers = bfs_layers(inst.graph(), 4 * k);
    (0..k)
        .map(|j| {
            layers.layer.iter().filter(|&(_, &l)| l == 4 * j + 1 || l == 4 * j + 2).map(|(&v, _)| v).collect()
        })
        .collect()
}

/// Minimum cost of `inst` by components.
pub fn solve_domination_exact(inst: &DominationInstance, width_cap: usize, budget: u64) -> Result<Cost> {
    let g = inst.graph();
    let all: BTreeSet<VertexId> = g.vertices().collect();
    let mut total = Cost::ZERO;
    for comp in components_within(g, &all) {
        let set: BTreeSet<VertexId> = comp.into_iter().collect();
        let p = Problem::from_domination(inst, Some(&set));
        total = total
            + match solve_part(&p, width_cap, budget)? {
                Some(v) => Cost::Finite((-v) as u64),
                None => Cost::Inf,
            };
    }
    Ok(total)
}

/// `max_j OPT(Clear(I; V_j))` with `k = ceil(1/δ)`; lies in
/// `[(1−δ)·OPT, OPT]` for decent instances.
pub fn baker_domination(inst: &DominationInstance, delta: Ratio<u64>) -> Result<Cost> {
    if delta >= Ratio::from_integer(1) {
        return Err(Error::InvalidEpsilon(format!("{delta} is not in (0, 1)")));
    }
    baker_domination_k(inst, ceil_inverse(delta)?, &BakerOptions::default())
}

pub fn baker_domination_k(inst: &DominationInstance, k: u32, opts: &BakerOptions) -> Result<Cost> {
    let cap = opts.width_cap.unwrap_or(8 * 4 * k as usize + 8);
    let mut best = Cost::ZERO;
    for vj in domination_layer_sets(inst, k) {
        let cleared = clear(inst, &vj);
        best = best.max(solve_domination_exact(&cleared, cap, opts.budget)?);
    }
    Ok(best)
}
