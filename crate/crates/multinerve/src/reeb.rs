//! Leveled multigraphs: combinatorial Reeb graphs and Mapper outputs.
//!
//! A leveled multigraph has a real level on every node; each edge joins nodes
//! on two consecutive occupied levels. Parallel edges are allowed and matter:
//! they encode the holes of a Reeb graph.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    extended_persistence_with, preimage_labels, ComplexError, PreimageLabels, SimplicialComplex2, TieBreak,
    VertexFunction,
};
use crate::covers::Interval;
use crate::diagram::ExtendedDiagram;
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ReebError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("slab component between levels {lower} and {upper} does not attach to exactly one node per side")]
    SlabAttachmentAmbiguous { lower: f64, upper: f64 },
    #[error("node level #{0} is not finite")]
    NonFiniteLevel(usize),
    #[error("edge ({0}, {1}) refers to a missing node")]
    UnknownNode(usize, usize),
    #[error("edge ({0}, {1}) does not join consecutive occupied levels")]
    NonConsecutiveEdge(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeveledMultigraph {
    levels: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl LeveledMultigraph {
    /// Validates levels and edges. Edges are stored with the lower-level
    /// endpoint first and kept in sorted order.
    pub fn new(levels: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self, ReebError> {
        if let Some(i) = levels.iter().position(|l| !l.is_finite()) {
            return Err(ReebError::NonFiniteLevel(i));
        }
        let rank = level_ranks(&levels);
        let mut es = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= levels.len() || b >= levels.len() {
                return Err(ReebError::UnknownNode(a, b));
            }
            let (lo, hi) = if rank[a] <= rank[b] { (a, b) } else { (b, a) };
            if rank[hi] != rank[lo] + 1 {
                return Err(ReebError::NonConsecutiveEdge(a, b));
            }
            es.push((lo, hi));
        }
        es.sort_unstable();
        Ok(LeveledMultigraph { levels, edges: es })
    }

    pub(crate) fn from_sorted_parts(levels: Vec<f64>, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        debug_assert!(LeveledMultigraph::new(levels.clone(), edges.clone()).is_ok());
        LeveledMultigraph { levels, edges }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.levels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge multiplicity per node pair.
    pub fn multiplicities(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for &e in &self.edges {
            *m.entry(e).or_insert(0) += 1;
        }
        m
    }

    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.node_count());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.labels(&vec![true; self.node_count()]).1
    }

    /// First Betti number of the underlying 1-complex.
    pub fn betti1(&self) -> usize {
        self.edge_count() + self.components() - self.node_count()
    }

    /// Same nodes, each bundle of parallel edges collapsed to one edge.
    pub fn simple(&self) -> Self {
        let mut edges = self.edges.clone();
        edges.dedup();
        LeveledMultigraph { levels: self.levels.clone(), edges }
    }

    /// Whether every node pair carries at most as many edges as in `other`,
    /// on the same node indexing.
    pub fn is_edge_subgraph_of(&self, other: &LeveledMultigraph) -> bool {
        if self.levels != other.levels {
            return false;
        }
        let mine = self.multiplicities();
        let theirs = other.multiplicities();
        mine.iter().all(|(k, &c)| theirs.get(k).copied().unwrap_or(0) >= c)
    }

    /// Graphviz rendering; parallel edges become separate `--` lines.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for (i, l) in self.levels.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [level={l}, label=\"{i} @ {l}\"];");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  n{a} -- n{b};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self.levels.iter().enumerate().map(|(id, &level)| GraphNode { id, level }).collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl Serialize for LeveledMultigraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LeveledMultigraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        GraphFile::deserialize(d)?.into_graph().map_err(serde::de::Error::custom)
    }
}

/// JSON form of a leveled multigraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub level: f64,
}

impl GraphFile {
    pub fn into_graph(&self) -> Result<LeveledMultigraph, ReebError> {
        let index: HashMap<usize, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let levels = self.nodes.iter().map(|n| n.level).collect();
        let edges = self
            .edges
            .iter()
            .map(|[a, b]| match (index.get(a), index.get(b)) {
                (Some(&x), Some(&y)) => Ok((x, y)),
                _ => Err(ReebError::UnknownNode(*a, *b)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        LeveledMultigraph::new(levels, edges)
    }
}

/// Rank of each node's level among the distinct occupied levels.
fn level_ranks(levels: &[f64]) -> Vec<usize> {
    let mut distinct = levels.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    levels.iter().map(|l| distinct.partition_point(|d| d < l)).collect()
}

/// For each component of a wider preimage, the unique component of the
/// narrower one it contains. Errors if a wide component holds zero or
/// several narrow components.
fn attach(narrow: &PreimageLabels, wide: &PreimageLabels) -> Option<Vec<usize>> {
    let mut target: Vec<Option<usize>> = vec![None; wide.count];
    let pairs = narrow
        .vertex
        .iter()
        .zip(&wide.vertex)
        .chain(narrow.edge.iter().zip(&wide.edge))
        .chain(narrow.triangle.iter().zip(&wide.triangle));
    for (n, w) in pairs {
        if let (Some(n), Some(w)) = (*n, *w) {
            match target[w] {
                None => target[w] = Some(n),
                Some(t) if t != n => return None,
                _ => {}
            }
        }
    }
    target.into_iter().collect()
}

/// The Reeb graph of the PL extension of `f`: one node per component of
/// each vertex level set, one edge per component of each open slab between
/// consecutive vertex values. Every vertex value is treated as critical.
pub fn reeb_graph(k: &SimplicialComplex2, f: &VertexFunction) -> Result<LeveledMultigraph, ReebError> {
    if let Some(value) = f.repeated_value() {
        return Err(ComplexError::NonGenericValues { value }.into());
    }
    if f.len() != k.n_vertices() {
        return Err(ComplexError::ValueCount { expected: k.n_vertices(), got: f.len() }.into());
    }
    let vals = f.values();
    let mut levels_sorted = vals.to_vec();
    levels_sorted.sort_by(f64::total_cmp);

    let level_sets: Vec<PreimageLabels> =
        levels_sorted.iter().map(|&v| preimage_labels(k, vals, &Interval::point(v))).collect();
    let mut offset = Vec::with_capacity(level_sets.len());
    let mut node_levels = Vec::new();
    for (ls, &v) in level_sets.iter().zip(&levels_sorted) {
        offset.push(node_levels.len());
        node_levels.extend(std::iter::repeat_n(v, ls.count));
    }

    let mut edges = Vec::new();
    for i in 0..levels_sorted.len().saturating_sub(1) {
        let (lo, hi) = (levels_sorted[i], levels_sorted[i + 1]);
        let mid = (lo + hi) / 2.0;
        let slab = preimage_labels(k, vals, &Interval::point(mid));
        if slab.count == 0 {
            continue;
        }
        let ambiguous = ReebError::SlabAttachmentAmbiguous { lower: lo, upper: hi };
        let down = preimage_labels(k, vals, &Interval::closed(lo, mid));
        let up = preimage_labels(k, vals, &Interval::closed(mid, hi));
        let down_to_node = attach(&level_sets[i], &down).ok_or_else(|| ambiguous.clone())?;
        let up_to_node = attach(&level_sets[i + 1], &up).ok_or_else(|| ambiguous.clone())?;
        for (kind, idx) in slab.representatives() {
            let d = down.get(kind, idx).ok_or_else(|| ambiguous.clone())?;
            let u = up.get(kind, idx).ok_or_else(|| ambiguous.clone())?;
            edges.push((offset[i] + down_to_node[d], offset[i + 1] + up_to_node[u]));
        }
    }
    Ok(LeveledMultigraph::from_sorted_parts(node_levels, edges))
}

/// Turns a leveled multigraph into a 1-complex: the first edge of each
/// parallel bundle stays, the others are subdivided at their midpoint level.
pub fn graph_complex(g: &LeveledMultigraph) -> (SimplicialComplex2, VertexFunction) {
    let mut values = g.levels().to_vec();
    let mut edges = Vec::with_capacity(g.edge_count());
    for (&(a, b), &m) in &g.multiplicities() {
        edges.push([a, b]);
        for _ in 1..m {
            let mid = values.len();
            values.push((g.levels()[a] + g.levels()[b]) / 2.0);
            edges.push([a, mid]);
            edges.push([mid, b]);
        }
    }
    let n = values.len();
    let k = SimplicialComplex2::new(n, edges, Vec::new()).expect("subdivision yields a simple graph");
    let f = VertexFunction::new(values).expect("levels are finite");
    (k, f)
}

/// Extended persistence of the level function on the graph. Equal levels are
/// broken by node index.
pub fn quotient_diagram(g: &LeveledMultigraph) -> ExtendedDiagram {
    let (k, f) = graph_complex(g);
    extended_persistence_with(&k, &f, TieBreak::Symbolic).expect("symbolic tie-breaking accepts any values")
}

/// Adjacency with multiplicities, keyed by neighbour.
fn adjacency(g: &LeveledMultigraph) -> Vec<BTreeMap<usize, usize>> {
    let mut adj = vec![BTreeMap::new(); g.node_count()];
    for &(a, b) in g.edges() {
        *adj[a].entry(b).or_insert(0) += 1;
        *adj[b].entry(a).or_insert(0) += 1;
    }
    adj
}

/// A node's colour with the sorted colours and multiplicities of its neighbours.
type ColourKey = (usize, Vec<(usize, usize)>);

/// Colour refinement run jointly on both graphs so that colours are comparable.
fn refine_colours(adj: [&[BTreeMap<usize, usize>]; 2], init: [Vec<usize>; 2]) -> [Vec<usize>; 2] {
    let mut colours = init;
    loop {
        let mut palette: BTreeMap<ColourKey, usize> = BTreeMap::new();
        let mut sigs: [Vec<ColourKey>; 2] = [Vec::new(), Vec::new()];
        for g in 0..2 {
            for (v, nb) in adj[g].iter().enumerate() {
                let mut s: Vec<(usize, usize)> = nb.iter().map(|(&u, &m)| (colours[g][u], m)).collect();
                s.sort_unstable();
                let key = (colours[g][v], s);
                sigs[g].push(key.clone());
                palette.insert(key, 0);
            }
        }
        for (i, v) in palette.values_mut().enumerate() {
            *v = i;
        }
        let next: [Vec<usize>; 2] =
            [sigs[0].iter().map(|s| palette[s]).collect(), sigs[1].iter().map(|s| palette[s]).collect()];
        let count = |c: &[Vec<usize>; 2]| {
            let mut all: Vec<usize> = c[0].iter().chain(c[1].iter()).copied().collect();
            all.sort_unstable();
            all.dedup();
            all.len()
        };
        if count(&next) == count(&colours) {
            return next;
        }
        colours = next;
    }
}

/// Whether there is a multigraph isomorphism carrying levels through the
/// order-preserving bijection between the occupied level sets.
pub fn leveled_isomorphic(g1: &LeveledMultigraph, g2: &LeveledMultigraph) -> bool {
    if g1.node_count() != g2.node_count() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    let (r1, r2) = (level_ranks(g1.levels()), level_ranks(g2.levels()));
    let (a1, a2) = (adjacency(g1), adjacency(g2));
    let colours = refine_colours([&a1, &a2], [r1, r2]);
    let mut h1 = colours[0].clone();
    let mut h2 = colours[1].clone();
    h1.sort_unstable();
    h2.sort_unstable();
    if h1 != h2 {
        return false;
    }
    // Nodes of g1 in order of level rank, so lower neighbours come first.
    let mut order: Vec<usize> = (0..g1.node_count()).collect();
    order.sort_by_key(|&v| (colours[0][v], v));
    let mut map = vec![usize::MAX; g1.node_count()];
    let mut used = vec![false; g2.node_count()];
    extend_map(0, &order, &colours, &a1, &a2, &mut map, &mut used)
}

fn extend_map(
    pos: usize,
    order: &[usize],
    colours: &[Vec<usize>; 2],
    a1: &[BTreeMap<usize, usize>],
    a2: &[BTreeMap<usize, usize>],
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(pos) else {
        return true;
    };
    for w in 0..used.len() {
        if used[w] || colours[1][w] != colours[0][v] {
            continue;
        }
        // Edges towards already mapped nodes must agree in both directions.
        let forward =
            a1[v].iter().filter(|(&u, _)| map[u] != usize::MAX).all(|(&u, &m)| a2[w].get(&map[u]).copied() == Some(m));
        let mapped_here = a1[v].keys().filter(|&&u| map[u] != usize::MAX).count();
        let mapped_there = a2[w].keys().filter(|&&x| used[x]).count();
        if !forward || mapped_here != mapped_there {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend_map(pos + 1, order, colours, a1, a2, map, used) {
            return true;
        }
        map[v] = usize::MAX;
        used[w] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{DiagramPoint, PointKind::*};

    fn torus_graph() -> LeveledMultigraph {
        LeveledMultigraph::new(vec![0.0, 1.0, 2.0, 3.0], vec![(0, 1), (1, 2), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn path_reeb_graph() {
        let k = SimplicialComplex2::new(3, vec![[0, 1], [1, 2]], vec![]).unwrap();
        let f = VertexFunction::new(vec![0.0, 1.0, 2.0]).unwrap();
        let g = reeb_graph(&k, &f).unwrap();
        assert_eq!(g.levels(), &[0.0, 1.0, 2.0]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn torus_quotient_diagram() {
        let d = quotient_diagram(&torus_graph());
        assert_eq!(
            d,
            ExtendedDiagram::new(vec![
                DiagramPoint::new(0.0, 3.0, ExtPlus, 0),
                DiagramPoint::new(2.0, 1.0, ExtMinus, 1)
            ])
        );
    }

    #[test]
    fn single_node_diagram() {
        let g = LeveledMultigraph::new(vec![0.25], vec![]).unwrap();
        assert_eq!(quotient_diagram(&g), ExtendedDiagram::new(vec![DiagramPoint::new(0.25, 0.25, ExtPlus, 0)]));
    }

    #[test]
    fn rejects_level_skipping_edges() {
        assert_eq!(LeveledMultigraph::new(vec![0.0, 1.0, 2.0], vec![(0, 2)]), Err(ReebError::NonConsecutiveEdge(0, 2)));
    }

    #[test]
    fn isomorphism_basics() {
        let g = torus_graph();
        let permuted = LeveledMultigraph::new(vec![2.0, 3.0, 0.0, 1.0], vec![(2, 3), (3, 0), (0, 3), (0, 1)]).unwrap();
        assert!(leveled_isomorphic(&g, &permuted));
        let shifted = LeveledMultigraph::new(vec![10.0, 11.0, 12.0, 13.0], g.edges().to_vec()).unwrap();
        assert!(leveled_isomorphic(&g, &shifted));
        assert!(!leveled_isomorphic(&g, &g.simple()));
        let double = LeveledMultigraph::new(vec![0.0, 1.0], vec![(0, 1), (0, 1)]).unwrap();
        let single = LeveledMultigraph::new(vec![0.0, 1.0], vec![(0, 1)]).unwrap();
        assert!(!leveled_isomorphic(&double, &single));
    }

    #[test]
    fn isomorphism_respects_levels() {
        // Same abstract graph (a path on 3 nodes), but the middle node sits
        // on a different level rank.
        let a = LeveledMultigraph::new(vec![0.0, 1.0, 1.0, 2.0], vec![(0, 1), (1, 3)]).unwrap();
        let b = LeveledMultigraph::new(vec![0.0, 1.0, 1.0, 2.0], vec![(0, 1), (0, 2)]).unwrap();
        assert!(!leveled_isomorphic(&a, &b));
    }

    #[test]
    fn dot_keeps_parallel_edges() {
        let dot = torus_graph().to_dot();
        assert_eq!(dot.matches("n1 -- n2;").count(), 2);
    }

    #[test]
    fn graph_file_round_trip() {
        let g = torus_graph();
        let json = serde_json::to_string(&g.to_file()).unwrap();
        let back: GraphFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_graph().unwrap(), g);
    }
}
