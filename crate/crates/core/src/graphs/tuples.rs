use crate::dyadic::ShapeVector;
use crate::error::{HyperHaarError, Result};
use crate::field::GridFunction;
use crate::graphs::colored::ColoredGraph;
use crate::smallball::{add_int_into, RieszEngine};

/// Tuples `(r⃗_v)_{v ∈ V}` with `r⃗_v ∈ 𝔸_v` constrained by coordinate equalities.
///
/// Only equalities are imposed; tuples may satisfy further coincidences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    /// Block index of each slot.
    blocks: Vec<usize>,
    /// `(axis, i, j)`: slots `i` and `j` agree in coordinate `axis` (zero-based).
    equalities: Vec<(usize, usize, usize)>,
    /// Slots drawn from the same block must hold different shapes.
    distinct_within_block: bool,
}

impl TupleSet {
    pub fn new(blocks: Vec<usize>, equalities: Vec<(usize, usize, usize)>) -> Result<Self> {
        for &(_, i, j) in &equalities {
            if i >= blocks.len() || j >= blocks.len() || i == j {
                return Err(HyperHaarError::InvalidParams(format!("bad equality slots ({i},{j})")));
            }
        }
        Ok(Self { blocks, equalities, distinct_within_block: true })
    }

    /// `X(G)`: one slot per vertex, color `j` edges become equalities in coordinate `j`.
    pub fn from_graph(graph: &ColoredGraph) -> Self {
        let blocks: Vec<usize> = graph.vertices().iter().copied().collect();
        let slot = |v: usize| blocks.iter().position(|&b| b == v).expect("edge endpoint is a vertex");
        let equalities = graph
            .colors()
            .flat_map(|c| graph.edges(c).iter().map(move |&(v, w)| (c - 1, v, w)))
            .map(|(axis, v, w)| (axis, slot(v), slot(w)))
            .collect();
        Self { blocks, equalities, distinct_within_block: true }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn equalities(&self) -> &[(usize, usize, usize)] {
        &self.equalities
    }

    fn admits(&self, chosen: &[&ShapeVector], next: &ShapeVector) -> bool {
        let k = chosen.len();
        let eq_ok = self.equalities.iter().all(|&(axis, i, j)| {
            let (lo, hi) = (i.min(j), i.max(j));
            hi != k || chosen[lo].get(axis) == next.get(axis)
        });
        let distinct_ok = !self.distinct_within_block
            || chosen.iter().enumerate().all(|(i, c)| self.blocks[i] != self.blocks[k] || *c != next);
        eq_ok && distinct_ok
    }

    /// Number of tuples in the set.
    pub fn count(&self, engine: &RieszEngine, budget: usize) -> Result<usize> {
        let mut chosen = Vec::new();
        let mut n = 0usize;
        self.walk(engine, &mut chosen, &mut |_| {
            n += 1;
            if n > budget {
                return Err(HyperHaarError::Budget(format!("more than {budget} tuples")));
            }
            Ok(())
        })?;
        Ok(n)
    }

    /// Whether every tuple has a coordinate whose finest level is attained by exactly one
    /// member; each such product has mean zero, hence so does the `SumProd`.
    pub fn unique_finest_everywhere(&self, engine: &RieszEngine, budget: usize) -> Result<bool> {
        let d = engine.params().d;
        let mut all = true;
        let mut n = 0usize;
        self.walk(engine, &mut Vec::new(), &mut |tuple| {
            n += 1;
            if n > budget {
                return Err(HyperHaarError::Budget(format!("more than {budget} tuples")));
            }
            let ok = (0..d).any(|axis| {
                let top = tuple.iter().map(|r| r.get(axis)).max().unwrap_or(0);
                tuple.iter().filter(|r| r.get(axis) == top).count() == 1
            });
            all &= ok;
            Ok(())
        })?;
        Ok(all)
    }

    fn walk<'a>(
        &self,
        engine: &'a RieszEngine,
        chosen: &mut Vec<&'a ShapeVector>,
        visit: &mut dyn FnMut(&[&'a ShapeVector]) -> Result<()>,
    ) -> Result<()> {
        if chosen.len() == self.blocks.len() {
            return visit(chosen);
        }
        let block = self.blocks[chosen.len()];
        engine.block(block)?;
        for shape in engine.block_shapes(block) {
            if self.admits(chosen, shape) {
                chosen.push(shape);
                self.walk(engine, chosen, visit)?;
                chosen.pop();
            }
        }
        Ok(())
    }

    /// `Σ_{tuples} Π_v f_{r⃗_v}` as an integer grid on the engine resolution.
    pub fn sumprod(&self, engine: &RieszEngine, budget: usize) -> Result<GridFunction<i32>> {
        let mut acc = GridFunction::<i32>::zeros(engine.resolution().clone())?;
        let one = GridFunction::constant(engine.resolution().clone(), 1i8)?;
        let mut visited = 0usize;
        self.dfs(engine, &one, &mut Vec::new(), &mut acc, &mut visited, budget)?;
        Ok(acc)
    }

    fn dfs<'a>(
        &self,
        engine: &'a RieszEngine,
        prefix: &GridFunction<i8>,
        chosen: &mut Vec<&'a ShapeVector>,
        acc: &mut GridFunction<i32>,
        visited: &mut usize,
        budget: usize,
    ) -> Result<()> {
        if chosen.len() == self.blocks.len() {
            *visited += 1;
            if *visited > budget {
                return Err(HyperHaarError::Budget(format!("more than {budget} tuples")));
            }
            return add_int_into(acc, prefix, 1);
        }
        let block = self.blocks[chosen.len()];
        engine.block(block)?;
        for shape in engine.block_shapes(block) {
            if self.admits(chosen, shape) {
                let next = engine.times_rfunction(prefix, shape)?;
                chosen.push(shape);
                self.dfs(engine, &next, chosen, acc, visited, budget)?;
                chosen.pop();
            }
        }
        Ok(())
    }
}

pub const DEFAULT_TUPLE_BUDGET: usize = 1 << 22;

/// `Σ f_{r⃗} f_{s⃗}` over `r⃗ ∈ 𝔸_{t1}`, `s⃗ ∈ 𝔸_{t2}`, `r⃗ ≠ s⃗`, with `r_k = s_k` (`k` one-based).
pub fn coincidence_sum(engine: &RieszEngine, t1: usize, t2: usize, k: usize) -> Result<GridFunction<i32>> {
    let d = engine.params().d;
    if k == 0 || k > d {
        return Err(HyperHaarError::InvalidParams(format!("coordinate {k} outside 1..={d}")));
    }
    TupleSet::new(vec![t1, t2], vec![(k - 1, 0, 1)])?.sumprod(engine, DEFAULT_TUPLE_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallball::{AllPlus, BlockMode, RandomSigns, RieszParams};

    fn engine(n: u32, d: usize, q: usize, seed: u64) -> RieszEngine {
        let params = RieszParams::new(n, d, Some(q), BlockMode::Partition).unwrap();
        RieszEngine::new(&params, &RandomSigns { seed }).unwrap()
    }

    #[test]
    fn unconstrained_pair_is_product_of_blocks() {
        let e = engine(4, 3, 2, 5);
        let s = TupleSet::new(vec![1, 2], vec![]).unwrap().sumprod(&e, 1 << 20).unwrap();
        let expect = e.block(1).unwrap().mul(e.block(2).unwrap()).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn coincidence_sum_matches_brute_force() {
        let e = engine(4, 3, 2, 9);
        let got = coincidence_sum(&e, 1, 2, 2).unwrap();
        let mut want = GridFunction::<i32>::zeros(e.resolution().clone()).unwrap();
        for r in e.block_shapes(1) {
            for s in e.block_shapes(2) {
                if r.get(1) == s.get(1) {
                    let prod = e.rfunction(r).unwrap().mul(&e.rfunction(s).unwrap()).unwrap();
                    add_int_into(&mut want, &prod, 1).unwrap();
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn same_block_pairs_skip_the_diagonal() {
        let params = RieszParams::new(4, 2, Some(2), BlockMode::Partition).unwrap();
        let e = RieszEngine::new(&params, &AllPlus).unwrap();
        let n1 = e.block_shapes(1).len();
        let count = TupleSet::new(vec![1, 1], vec![]).unwrap().count(&e, 1 << 20).unwrap();
        assert_eq!(count, n1 * (n1 - 1));
        assert!(TupleSet::new(vec![1], vec![]).unwrap().count(&e, 0).is_err());
    }
}
