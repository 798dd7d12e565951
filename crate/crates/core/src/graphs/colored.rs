use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::error::{HyperHaarError, Result};

/// A graph on block indices with one edge set per color `j ∈ {2, …, d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredGraph {
    d: usize,
    vertices: BTreeSet<usize>,
    edges: BTreeMap<usize, BTreeSet<(usize, usize)>>,
}

impl ColoredGraph {
    /// Edges are normalized to `(min, max)`; every color `2..=d` gets an (possibly empty) edge set.
    pub fn new(d: usize, vertices: impl IntoIterator<Item = usize>, edges: &[(usize, usize, usize)]) -> Result<Self> {
        if d < 2 {
            return Err(HyperHaarError::InvalidParams("colored graphs need d ≥ 2".into()));
        }
        let vertices: BTreeSet<usize> = vertices.into_iter().collect();
        let mut map: BTreeMap<usize, BTreeSet<(usize, usize)>> = (2..=d).map(|j| (j, BTreeSet::new())).collect();
        for &(color, v, w) in edges {
            if !(2..=d).contains(&color) {
                return Err(HyperHaarError::InvalidParams(format!("color {color} outside 2..={d}")));
            }
            if v == w {
                return Err(HyperHaarError::InvalidParams(format!("self-loop at {v}")));
            }
            if !vertices.contains(&v) || !vertices.contains(&w) {
                return Err(HyperHaarError::InvalidParams(format!("edge ({v},{w}) leaves the vertex set")));
            }
            map.get_mut(&color).expect("color present").insert((v.min(w), v.max(w)));
        }
        Ok(Self { d, vertices, edges: map })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.vertices
    }

    pub fn edges(&self, color: usize) -> &BTreeSet<(usize, usize)> {
        &self.edges[&color]
    }

    pub fn colors(&self) -> impl Iterator<Item = usize> {
        2..=self.d
    }

    /// `{vertices: […], edges: {"2": [[v, w], …], …}}`.
    pub fn to_json(&self) -> Value {
        let edges: serde_json::Map<String, Value> = self
            .edges
            .iter()
            .map(|(c, es)| (c.to_string(), json!(es.iter().map(|&(v, w)| [v, w]).collect::<Vec<_>>())))
            .collect();
        json!({ "vertices": self.vertices, "edges": edges })
    }

    pub fn from_json(value: &Value, d: usize) -> Result<Self> {
        let bad = |what: &str| HyperHaarError::Parse(format!("graph json: {what}"));
        let vertices: Vec<usize> = serde_json::from_value(value.get("vertices").cloned().ok_or_else(|| bad("vertices"))?)?;
        let mut edges = Vec::new();
        if let Some(map) = value.get("edges").and_then(Value::as_object) {
            for (color, list) in map {
                let color: usize = color.parse().map_err(|_| bad("color key"))?;
                let pairs: Vec<[usize; 2]> = serde_json::from_value(list.clone())?;
                edges.extend(pairs.into_iter().map(|[v, w]| (color, v, w)));
            }
        }
        Self::new(d, vertices, &edges)
    }
}

/// An admissible graph with its per-color cliques and index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleGraph {
    graph: ColoredGraph,
    cliques: BTreeMap<usize, Vec<BTreeSet<usize>>>,
    index: usize,
}

impl AdmissibleGraph {
    pub fn graph(&self) -> &ColoredGraph {
        &self.graph
    }

    pub fn cliques(&self, color: usize) -> &[BTreeSet<usize>] {
        &self.cliques[&color]
    }

    /// `ind(G) = Σ_Q (|Q| − 1)`.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Inclusion–exclusion weight `(−1)^{ind+1} Π_Q (|Q| − 1)!`.
    pub fn weight(&self) -> i64 {
        let factorials: i64 = self
            .cliques
            .values()
            .flatten()
            .map(|q| (1..q.len() as i64).product::<i64>())
            .product();
        if self.index % 2 == 1 {
            factorials
        } else {
            -factorials
        }
    }
}

/// Connected components of one color's edges (vertices without edges omitted).
fn components(vertices: &BTreeSet<usize>, edges: &BTreeSet<(usize, usize)>) -> Vec<BTreeSet<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in vertices {
        if seen.contains(&start) || !edges.iter().any(|&(a, b)| a == start || b == start) {
            continue;
        }
        let mut comp = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &(a, b) in edges {
                let other = if a == v { b } else if b == v { a } else { continue };
                if comp.insert(other) {
                    stack.push(other);
                }
            }
        }
        seen.extend(comp.iter().copied());
        out.push(comp);
    }
    out
}

/// Checks the three admissibility conditions and computes cliques and index.
pub fn validate_admissible(graph: &ColoredGraph) -> Result<AdmissibleGraph> {
    let mut cliques = BTreeMap::new();
    for color in graph.colors() {
        let edges = graph.edges(color);
        let comps = components(&graph.vertices, edges);
        for comp in &comps {
            let k = comp.len();
            let inside = edges.iter().filter(|(a, _)| comp.contains(a)).count();
            if inside != k * (k - 1) / 2 {
                return Err(HyperHaarError::NotAdmissible(format!(
                    "color {color} edges on {comp:?} do not form a clique"
                )));
            }
        }
        cliques.insert(color, comps);
    }
    let clique_of = |color: usize, v: usize| -> Option<usize> {
        cliques[&color].iter().position(|q: &BTreeSet<usize>| q.contains(&v))
    };
    let verts: Vec<usize> = graph.vertices.iter().copied().collect();
    for (i, &v) in verts.iter().enumerate() {
        for &w in &verts[i + 1..] {
            let together = graph
                .colors()
                .all(|c| matches!((clique_of(c, v), clique_of(c, w)), (Some(a), Some(b)) if a == b));
            if together {
                return Err(HyperHaarError::NotAdmissible(format!(
                    "vertices {v} and {w} share a clique in every color"
                )));
            }
        }
    }
    if let Some(&v) = verts.iter().find(|&&v| graph.colors().all(|c| clique_of(c, v).is_none())) {
        return Err(HyperHaarError::NotAdmissible(format!("vertex {v} lies in no clique")));
    }
    let index: usize = cliques.values().flatten().map(|q| q.len() - 1).sum();
    if index == 0 {
        return Err(HyperHaarError::NotAdmissible("empty graph".into()));
    }
    Ok(AdmissibleGraph { graph: graph.clone(), cliques, index })
}

/// All set partitions of `items`, blocks in first-element order.
fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for partition in set_partitions(rest) {
        let mut alone = vec![vec![first]];
        alone.extend(partition.iter().cloned());
        out.push(alone);
        for i in 0..partition.len() {
            let mut joined = partition.clone();
            joined[i].insert(0, first);
            out.push(joined);
        }
    }
    out
}

pub const MAX_ENUMERATED_VERTICES: usize = 4;

/// All admissible graphs with vertex set exactly `vertices`.
pub fn enumerate_admissible(vertices: &[usize], d: usize) -> Result<Vec<AdmissibleGraph>> {
    if vertices.len() > MAX_ENUMERATED_VERTICES {
        return Err(HyperHaarError::Budget(format!(
            "{} vertices exceeds the exhaustive cap {MAX_ENUMERATED_VERTICES}",
            vertices.len()
        )));
    }
    if d < 2 {
        return Err(HyperHaarError::InvalidParams("colored graphs need d ≥ 2".into()));
    }
    let per_color: Vec<Vec<(usize, usize)>> = set_partitions(vertices)
        .into_iter()
        .map(|p| {
            p.iter()
                .filter(|b| b.len() >= 2)
                .flat_map(|b| {
                    b.iter().enumerate().flat_map(move |(i, &v)| b[i + 1..].iter().map(move |&w| (v.min(w), v.max(w))))
                })
                .collect()
        })
        .collect();
    let colors = d - 1;
    let mut out = Vec::new();
    let mut choice = vec![0usize; colors];
    loop {
        let edges: Vec<(usize, usize, usize)> = choice
            .iter()
            .enumerate()
            .flat_map(|(c, &i)| per_color[i].iter().map(move |&(v, w)| (c + 2, v, w)))
            .collect();
        let graph = ColoredGraph::new(d, vertices.iter().copied(), &edges)?;
        if let Ok(g) = validate_admissible(&graph) {
            out.push(g);
        }
        let mut c = 0;
        loop {
            if c == colors {
                return Ok(out);
            }
            choice[c] += 1;
            if choice[c] < per_color.len() {
                break;
            }
            choice[c] = 0;
            c += 1;
        }
    }
}
