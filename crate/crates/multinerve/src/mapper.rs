//! Mapper and MultiNerve Mapper of a real function, on a simplicial complex
//! (PL) or on a point cloud through its Rips graph.
//!
//! Nodes are the connected components of the preimage of each cover element,
//! placed at the element's midpoint. The MultiNerve variant keeps one edge per
//! component of the preimage of each overlap; the Mapper variant keeps at most
//! one edge per node pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{preimage_labels, ComplexError, SimplicialComplex2, VertexFunction};
use crate::covers::{GomicCover, Interval};
use crate::diagram::Variant;
use crate::par::{self, Exec};
use crate::reeb::{leveled_isomorphic, LeveledMultigraph};
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MapperError {
    #[error("value {value} of point {index} is not covered or sits on a cover endpoint")]
    UncoveredValue { index: usize, value: f64 },
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// How the overlaps of the pullback cover are witnessed on a Rips graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// Components of the subgraph induced on the points valued in the overlap.
    #[default]
    Vertex,
    /// Same, enriched with edges running from one element's preimage to the other's.
    Edge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Points {
    Coords(Vec<Vec<f64>>),
    /// Symmetric with zero diagonal. The triangle inequality is not checked.
    Distances(Vec<Vec<f64>>),
}

/// Sample points with a function value each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCloud {
    points: Points,
    values: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Points, values: Vec<f64>) -> Result<Self, MapperError> {
        let bad = |m: String| Err(MapperError::InvalidCloud(m));
        if values.iter().any(|v| !v.is_finite()) {
            return bad("function values must be finite".into());
        }
        match &points {
            Points::Coords(c) => {
                if c.len() != values.len() {
                    return bad(format!("{} points but {} values", c.len(), values.len()));
                }
                let d = c.first().map_or(0, |p| p.len());
                if c.iter().any(|p| p.len() != d || p.iter().any(|x| !x.is_finite())) {
                    return bad("coordinates must be finite and of equal dimension".into());
                }
            }
            Points::Distances(m) => {
                let n = m.len();
                if n != values.len() {
                    return bad(format!("{n} points but {} values", values.len()));
                }
                for (i, row) in m.iter().enumerate() {
                    if row.len() != n {
                        return bad(format!("row {i} has length {}", row.len()));
                    }
                    if row[i] != 0.0 {
                        return bad(format!("nonzero diagonal entry at {i}"));
                    }
                    for (j, &x) in row.iter().enumerate() {
                        if !(x >= 0.0 && x.is_finite()) || x != m[j][i] {
                            return bad(format!("entry ({i}, {j}) is negative, infinite or asymmetric"));
                        }
                    }
                }
            }
        }
        Ok(PointCloud { points, values })
    }

    pub fn from_coords(coords: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, MapperError> {
        PointCloud::new(Points::Coords(coords), values)
    }

    pub fn from_distances(matrix: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, MapperError> {
        PointCloud::new(Points::Distances(matrix), values)
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.points {
            Points::Coords(c) => c[i].iter().zip(&c[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Points::Distances(m) => m[i][j],
        }
    }

    /// Same points with other function values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, MapperError> {
        PointCloud::new(self.points.clone(), values)
    }
}

impl<'de> Deserialize<'de> for PointCloud {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Points,
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        PointCloud::new(raw.points, raw.values).map_err(serde::de::Error::custom)
    }
}

/// Threshold graph of a point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipsGraph {
    pub n: usize,
    /// Pairs `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub delta: f64,
}

pub fn rips_graph(cloud: &PointCloud, delta: f64) -> RipsGraph {
    rips_graph_with(Exec::default(), cloud, delta)
}

/// Every pair at distance at most `delta` becomes an edge.
pub fn rips_graph_with(exec: Exec, cloud: &PointCloud, delta: f64) -> RipsGraph {
    let n = cloud.len();
    let rows = par::map_range(exec, n, |i| {
        ((i + 1)..n).filter(|&j| cloud.distance(i, j) <= delta).map(|j| (i, j)).collect::<Vec<_>>()
    });
    RipsGraph { n, edges: rows.concat(), delta }
}

impl RipsGraph {
    /// The clique complex restricted to dimension 2.
    pub fn clique_complex(&self) -> SimplicialComplex2 {
        SimplicialComplex2::clique_complex(self.n, &self.edges).expect("a threshold graph has no loops or repeats")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossingEdges {
    /// Edges whose value span strictly contains a whole cover element.
    pub interval_crossing: Vec<(usize, usize)>,
    /// Edges whose value span strictly contains a whole overlap.
    pub intersection_crossing: Vec<(usize, usize)>,
}

pub fn crossing_edges(g: &RipsGraph, values: &[f64], cover: &GomicCover) -> CrossingEdges {
    let overlaps = cover.intersections();
    let mut out = CrossingEdges::default();
    for &(u, v) in &g.edges {
        let (m, big_m) = (values[u].min(values[v]), values[u].max(values[v]));
        if cover.intervals().iter().any(|i| i.inside_open(m, big_m)) {
            out.interval_crossing.push((u, v));
        }
        if overlaps.iter().any(|i| i.inside_open(m, big_m)) {
            out.intersection_crossing.push((u, v));
        }
    }
    out
}

fn check_values(values: &[f64], cover: &GomicCover) -> Result<(), MapperError> {
    match values.iter().position(|&v| cover.is_endpoint(v) || !cover.covers(v)) {
        Some(index) => Err(MapperError::UncoveredValue { index, value: values[index] }),
        None => Ok(()),
    }
}

/// Builds the (multi)nerve from per-element component counts and, for each
/// overlap `k`, the list of (component in element k, component in element
/// k+1) pairs, one per overlap component.
pub(crate) fn assemble_nerve(
    cover: &GomicCover,
    counts: &[usize],
    links: &[Vec<(usize, usize)>],
    variant: Variant,
) -> LeveledMultigraph {
    let mut offset = Vec::with_capacity(counts.len());
    let mut levels = Vec::new();
    for (k, &c) in counts.iter().enumerate() {
        offset.push(levels.len());
        levels.extend(std::iter::repeat_n(cover.intervals()[k].midpoint(), c));
    }
    let mut edges: Vec<(usize, usize)> = links
        .iter()
        .enumerate()
        .flat_map(|(k, pairs)| pairs.iter().map(move |&(a, b)| (k, a, b)))
        .map(|(k, a, b)| (offset[k] + a, offset[k + 1] + b))
        .collect();
    edges.sort_unstable();
    if variant == Variant::Mapper {
        edges.dedup();
    }
    LeveledMultigraph::from_sorted_parts(levels, edges)
}

/// Component labels of the subgraph induced on `keep`.
fn induced_components(n: usize, edges: &[(usize, usize)], keep: &[bool]) -> (Vec<Option<usize>>, usize) {
    let mut uf = UnionFind::new(n);
    for &(u, v) in edges {
        if keep[u] && keep[v] {
            uf.union(u, v);
        }
    }
    uf.labels(keep)
}

pub fn mapper_discrete(
    g: &RipsGraph,
    values: &[f64],
    cover: &GomicCover,
    connectivity: Connectivity,
    variant: Variant,
) -> Result<LeveledMultigraph, MapperError> {
    mapper_discrete_with(Exec::default(), g, values, cover, connectivity, variant)
}

pub fn mapper_discrete_with(
    exec: Exec,
    g: &RipsGraph,
    values: &[f64],
    cover: &GomicCover,
    connectivity: Connectivity,
    variant: Variant,
) -> Result<LeveledMultigraph, MapperError> {
    if values.len() != g.n {
        return Err(MapperError::InvalidCloud(format!("{} values for {} points", values.len(), g.n)));
    }
    check_values(values, cover)?;
    let n = g.n;
    let member: Vec<Vec<bool>> =
        cover.intervals().iter().map(|i| values.iter().map(|&v| i.contains(v)).collect()).collect();
    let nodes = par::map(exec, &member, |keep| induced_components(n, &g.edges, keep));

    let links = par::map_range(exec, cover.len().saturating_sub(1), |k| {
        let (lower, upper) = (&nodes[k].0, &nodes[k + 1].0);
        let both: Vec<bool> = (0..n).map(|p| member[k][p] && member[k + 1][p]).collect();
        let mut pairs = Vec::new();
        match connectivity {
            Connectivity::Vertex => {
                let (labels, count) = induced_components(n, &g.edges, &both);
                let mut seen = vec![false; count];
                for p in 0..n {
                    if let Some(l) = labels[p] {
                        if !std::mem::replace(&mut seen[l], true) {
                            pairs.push((lower[p].unwrap(), upper[p].unwrap()));
                        }
                    }
                }
            }
            Connectivity::Edge => {
                // Elements: the overlap's vertices, then the bridging edges.
                let bridging: Vec<(usize, usize)> = g
                    .edges
                    .iter()
                    .filter_map(|&(u, v)| {
                        if member[k][u] && member[k + 1][v] {
                            Some((u, v))
                        } else if member[k][v] && member[k + 1][u] {
                            Some((v, u))
                        } else {
                            None
                        }
                    })
                    .collect();
                let mut uf = UnionFind::new(n + bridging.len());
                for (e, &(u, v)) in bridging.iter().enumerate() {
                    for w in [u, v] {
                        if both[w] {
                            uf.union(n + e, w);
                        }
                    }
                }
                let mut active = both.clone();
                active.resize(n + bridging.len(), true);
                let (labels, count) = uf.labels(&active);
                let mut link = vec![None; count];
                for p in 0..n {
                    if let Some(l) = labels[p] {
                        link[l].get_or_insert((lower[p].unwrap(), upper[p].unwrap()));
                    }
                }
                for (e, &(u, v)) in bridging.iter().enumerate() {
                    let l = labels[n + e].unwrap();
                    let pair = (lower[u].unwrap(), upper[v].unwrap());
                    debug_assert!(link[l].is_none_or(|q| q == pair));
                    link[l].get_or_insert(pair);
                }
                pairs.extend(link.into_iter().map(|x| x.unwrap()));
            }
        }
        pairs
    });
    let counts: Vec<usize> = nodes.iter().map(|(_, c)| *c).collect();
    Ok(assemble_nerve(cover, &counts, &links, variant))
}

/// The construction on the geometric realization of `k` with `f` extended
/// linearly over each simplex.
pub fn mapper_continuous(
    k: &SimplicialComplex2,
    f: &VertexFunction,
    cover: &GomicCover,
    variant: Variant,
) -> Result<LeveledMultigraph, MapperError> {
    mapper_continuous_with(Exec::default(), k, f, cover, variant)
}

pub fn mapper_continuous_with(
    exec: Exec,
    k: &SimplicialComplex2,
    f: &VertexFunction,
    cover: &GomicCover,
    variant: Variant,
) -> Result<LeveledMultigraph, MapperError> {
    if f.len() != k.n_vertices() {
        return Err(ComplexError::ValueCount { expected: k.n_vertices(), got: f.len() }.into());
    }
    check_values(f.values(), cover)?;
    let labels = par::map(exec, cover.intervals(), |i| preimage_labels(k, f.values(), i));
    let overlaps: Vec<Interval> = cover.intersections();
    let links = par::map_range(exec, overlaps.len(), |j| {
        preimage_labels(k, f.values(), &overlaps[j])
            .representatives()
            .into_iter()
            .map(|(kind, idx)| {
                let lo = labels[j].get(kind, idx).expect("overlap preimage lies in the lower element's");
                let hi = labels[j + 1].get(kind, idx).expect("overlap preimage lies in the upper element's");
                (lo, hi)
            })
            .collect()
    });
    let counts: Vec<usize> = labels.iter().map(|l| l.count).collect();
    Ok(assemble_nerve(cover, &counts, &links, variant))
}

/// Collapses each bundle of parallel edges: MultiNerve Mapper to Mapper.
pub fn pi1_project(m: &LeveledMultigraph) -> LeveledMultigraph {
    m.simple()
}

/// All discrete constructions on one Rips graph, the PL constructions on the
/// graph itself and on its clique complex, and the relations expected between
/// them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub crossing: CrossingEdges,
    pub vertex_multinerve: LeveledMultigraph,
    pub vertex_mapper: LeveledMultigraph,
    pub edge_multinerve: LeveledMultigraph,
    pub edge_mapper: LeveledMultigraph,
    /// PL MultiNerve on the Rips graph.
    pub continuous_multinerve: LeveledMultigraph,
    /// PL MultiNerve on the clique complex. Triangles can merge overlap pieces
    /// that contain no vertex, so only its Mapper projection is compared.
    pub clique_multinerve: LeveledMultigraph,
    /// Vertex-based output differs from edge-based output.
    pub vertex_strictly_below_edge: bool,
    /// Edge-based output differs from the PL output.
    pub edge_differs_from_continuous: bool,
    pub violations: Vec<String>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn inclusion_check(g: &RipsGraph, values: &[f64], cover: &GomicCover) -> Result<InclusionReport, MapperError> {
    let crossing = crossing_edges(g, values, cover);
    let build = |c, v| mapper_discrete(g, values, cover, c, v);
    let vertex_multinerve = build(Connectivity::Vertex, Variant::MultiNerve)?;
    let vertex_mapper = build(Connectivity::Vertex, Variant::Mapper)?;
    let edge_multinerve = build(Connectivity::Edge, Variant::MultiNerve)?;
    let edge_mapper = build(Connectivity::Edge, Variant::Mapper)?;
    let f = VertexFunction::new(values.to_vec())?;
    let clique = g.clique_complex();
    let continuous_multinerve = mapper_continuous(&clique.one_skeleton(), &f, cover, Variant::MultiNerve)?;
    let clique_multinerve = mapper_continuous(&clique, &f, cover, Variant::MultiNerve)?;

    let mut violations = Vec::new();
    let mut require = |ok: bool, what: &str| {
        if !ok {
            violations.push(what.to_string());
        }
    };
    require(vertex_multinerve.is_edge_subgraph_of(&edge_multinerve), "vertex MultiNerve is not inside edge MultiNerve");
    require(vertex_mapper.is_edge_subgraph_of(&edge_mapper), "vertex Mapper is not inside edge Mapper");
    require(vertex_mapper.is_edge_subgraph_of(&vertex_multinerve), "vertex Mapper is not inside vertex MultiNerve");
    require(edge_mapper.is_edge_subgraph_of(&edge_multinerve), "edge Mapper is not inside edge MultiNerve");
    require(
        pi1_project(&vertex_multinerve) == vertex_mapper,
        "vertex Mapper is not the projection of vertex MultiNerve",
    );
    require(pi1_project(&edge_multinerve) == edge_mapper, "edge Mapper is not the projection of edge MultiNerve");
    if crossing.intersection_crossing.is_empty() {
        require(
            leveled_isomorphic(&vertex_multinerve, &edge_multinerve),
            "no intersection-crossing edges, yet vertex and edge constructions differ",
        );
    }
    if crossing.interval_crossing.is_empty() {
        require(
            leveled_isomorphic(&edge_multinerve, &continuous_multinerve),
            "no interval-crossing edges, yet edge and PL constructions differ",
        );
        require(
            leveled_isomorphic(&edge_mapper, &pi1_project(&clique_multinerve)),
            "no interval-crossing edges, yet edge Mapper and clique-complex Mapper differ",
        );
    }
    Ok(InclusionReport {
        vertex_strictly_below_edge: vertex_multinerve != edge_multinerve,
        edge_differs_from_continuous: !leveled_isomorphic(&edge_multinerve, &continuous_multinerve),
        crossing,
        vertex_multinerve,
        vertex_mapper,
        edge_multinerve,
        edge_mapper,
        continuous_multinerve,
        clique_multinerve,
        violations,
    })
}
