use std::collections::{BTreeMap, BTreeSet};

use crate::error::{HyperHaarError, Result};
use crate::field::{cellwise_from_ints, GridFunction};
use crate::graphs::colored::{enumerate_admissible, AdmissibleGraph, MAX_ENUMERATED_VERTICES};
use crate::graphs::tuples::TupleSet;
use crate::scalar::Scalar;
use crate::smallball::RieszEngine;

/// One admissible graph with its weight and `SumProd` over `X(G)`.
#[derive(Debug, Clone)]
pub struct InExTerm {
    pub graph: AdmissibleGraph,
    pub weight: i64,
    pub sumprod: GridFunction<i32>,
}

/// All terms over vertex sets `V ⊆ {1, …, q}` with `|V| ≥ 2`.
pub fn inclusion_exclusion_terms(engine: &RieszEngine, budget: usize) -> Result<Vec<InExTerm>> {
    let q = engine.params().q;
    let d = engine.params().d;
    if q > MAX_ENUMERATED_VERTICES {
        return Err(HyperHaarError::Budget(format!(
            "q = {q} needs graphs on more than {MAX_ENUMERATED_VERTICES} vertices"
        )));
    }
    let mut terms = Vec::new();
    for mask in 1u32..(1 << q) {
        if mask.count_ones() < 2 {
            continue;
        }
        let vertices: Vec<usize> = (1..=q).filter(|t| mask >> (t - 1) & 1 == 1).collect();
        for graph in enumerate_admissible(&vertices, d)? {
            let sumprod = TupleSet::from_graph(graph.graph()).sumprod(engine, budget)?;
            terms.push(InExTerm { weight: graph.weight(), graph, sumprod });
        }
    }
    Ok(terms)
}

/// `Ψ¬ = Σ_V ρ̃^{|V|} (Σ_{V(G) = V} w(G) SumProd_G) Π_{t ∉ V} (1 + ρ̃ F_t)`.
///
/// `skip` drops one term by position, which must break the identity.
pub fn assemble_psi_neg<T: Scalar>(
    engine: &RieszEngine,
    rho: &T,
    terms: &[InExTerm],
    skip: Option<usize>,
) -> Result<GridFunction<T>> {
    let q = engine.params().q;
    let resolution = engine.resolution().clone();
    let mut grouped: BTreeMap<BTreeSet<usize>, GridFunction<i64>> = BTreeMap::new();
    for (i, term) in terms.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let acc = match grouped.entry(term.graph.graph().vertices().clone()) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => e.insert(GridFunction::zeros(resolution.clone())?),
        };
        for (a, &v) in acc.values_mut().iter_mut().zip(term.sumprod.values()) {
            *a += term.weight * v as i64;
        }
    }
    let blocks: Vec<GridFunction<i64>> = engine.blocks().iter().map(|b| b.map(|&v| v as i64)).collect();
    let sets: Vec<&BTreeSet<usize>> = grouped.keys().collect();
    let mut grids: Vec<&GridFunction<i64>> = blocks.iter().collect();
    grids.extend(grouped.values());
    if sets.is_empty() {
        return GridFunction::zeros(resolution);
    }
    cellwise_from_ints(&grids, |vals| {
        let (f, ie) = vals.split_at(q);
        let mut total = T::zero();
        for (set, &w) in sets.iter().zip(ie) {
            if w == 0 {
                continue;
            }
            let mut term = rho.powu(set.len() as u32) * T::of_int(w);
            for (t, &ft) in (1..=q).zip(f) {
                if !set.contains(&t) {
                    term = term * (T::one() + rho.clone() * T::of_int(ft));
                }
            }
            total = total + term;
        }
        total
    })
}

/// `Ψ¬` computed by inclusion–exclusion over admissible graphs.
pub fn inclusion_exclusion_psi_neg<T: Scalar>(engine: &RieszEngine) -> Result<GridFunction<T>> {
    let terms = inclusion_exclusion_terms(engine, crate::graphs::tuples::DEFAULT_TUPLE_BUDGET)?;
    assemble_psi_neg(engine, &engine.params().rho_for::<T>()?, &terms, None)
}
