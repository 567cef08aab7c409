//! Simplicial complexes of dimension at most two with a function on the
//! vertices, extended persistence by boundary-matrix reduction over Z/2, and
//! connected components of PL preimages of intervals.
//!
//! The extended filtration is realized on the cone over the complex: a cone
//! vertex first, then the simplices in lower-star order of the function, then
//! the cones over the simplices in upper-star order (decreasing function).
//! Relative homology of `(K, superlevel set)` is the reduced homology of `K`
//! with the superlevel set coned off, so a single reduction yields ordinary,
//! extended and relative pairs at once.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::Interval;
use crate::diagram::{DiagramPoint, ExtendedDiagram, PointKind};
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ComplexError {
    #[error("vertex values are not pairwise distinct: {value} repeats")]
    NonGenericValues { value: f64 },
    #[error("vertex value #{index} is not finite")]
    NonFiniteValue { index: usize },
    #[error("{got} values for {expected} vertices")]
    ValueCount { expected: usize, got: usize },
    #[error("simplex {0:?} refers to a missing vertex")]
    UnknownVertex(Vec<usize>),
    #[error("simplex {0:?} repeats a vertex")]
    DegenerateSimplex(Vec<usize>),
    #[error("simplex {0:?} appears twice")]
    DuplicateSimplex(Vec<usize>),
    #[error("triangle {0:?} is missing a boundary edge")]
    MissingFace(Vec<usize>),
    #[error("duplicate vertex id {0}")]
    DuplicateId(i64),
    #[error("unknown vertex id {0}")]
    UnknownId(i64),
}

/// A simplex given by its sorted vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Simplex {
    Vertex(usize),
    Edge(usize, usize),
    Triangle(usize, usize, usize),
}

impl Simplex {
    pub fn dim(&self) -> usize {
        match self {
            Simplex::Vertex(_) => 0,
            Simplex::Edge(..) => 1,
            Simplex::Triangle(..) => 2,
        }
    }

    pub fn vertices(&self) -> Vec<usize> {
        match *self {
            Simplex::Vertex(a) => vec![a],
            Simplex::Edge(a, b) => vec![a, b],
            Simplex::Triangle(a, b, c) => vec![a, b, c],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex2 {
    n_vertices: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl SimplicialComplex2 {
    /// Validates a complex. Simplices are normalized to sorted vertex order;
    /// every triangle must have its three edges listed.
    pub fn new(n_vertices: usize, edges: Vec<[usize; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self, ComplexError> {
        let mut seen_e = BTreeSet::new();
        let mut es = Vec::with_capacity(edges.len());
        for e in edges {
            let mut s = e;
            s.sort_unstable();
            if s[1] >= n_vertices {
                return Err(ComplexError::UnknownVertex(e.to_vec()));
            }
            if s[0] == s[1] {
                return Err(ComplexError::DegenerateSimplex(e.to_vec()));
            }
            if !seen_e.insert(s) {
                return Err(ComplexError::DuplicateSimplex(e.to_vec()));
            }
            es.push(s);
        }
        let mut seen_t = BTreeSet::new();
        let mut ts = Vec::with_capacity(triangles.len());
        for t in triangles {
            let mut s = t;
            s.sort_unstable();
            if s[2] >= n_vertices {
                return Err(ComplexError::UnknownVertex(t.to_vec()));
            }
            if s[0] == s[1] || s[1] == s[2] {
                return Err(ComplexError::DegenerateSimplex(t.to_vec()));
            }
            if !seen_t.insert(s) {
                return Err(ComplexError::DuplicateSimplex(t.to_vec()));
            }
            let faces = [[s[0], s[1]], [s[0], s[2]], [s[1], s[2]]];
            if faces.iter().any(|f| !seen_e.contains(f)) {
                return Err(ComplexError::MissingFace(t.to_vec()));
            }
            ts.push(s);
        }
        Ok(SimplicialComplex2 { n_vertices, edges: es, triangles: ts })
    }

    /// Builds the complex spanned by the given triangles and edges, adding
    /// any missing faces.
    pub fn from_closure(
        n_vertices: usize,
        edges: &[[usize; 2]],
        triangles: &[[usize; 3]],
    ) -> Result<Self, ComplexError> {
        let mut es = BTreeSet::new();
        for e in edges {
            let mut s = *e;
            s.sort_unstable();
            es.insert(s);
        }
        let mut ts = BTreeSet::new();
        for t in triangles {
            let mut s = *t;
            s.sort_unstable();
            ts.insert(s);
            es.insert([s[0], s[1]]);
            es.insert([s[0], s[2]]);
            es.insert([s[1], s[2]]);
        }
        SimplicialComplex2::new(n_vertices, es.into_iter().collect(), ts.into_iter().collect())
    }

    /// The clique complex of a graph, truncated to dimension two.
    pub fn clique_complex(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, ComplexError> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_vertices];
        let mut es = Vec::new();
        for &(a, b) in edges {
            if a.max(b) >= n_vertices {
                return Err(ComplexError::UnknownVertex(vec![a, b]));
            }
            if adj[a].insert(b) {
                adj[b].insert(a);
                es.push([a.min(b), a.max(b)]);
            }
        }
        let mut ts = Vec::new();
        for a in 0..n_vertices {
            for &b in adj[a].range(a + 1..) {
                for &c in adj[b].range(b + 1..) {
                    if adj[a].contains(&c) {
                        ts.push([a, b, c]);
                    }
                }
            }
        }
        SimplicialComplex2::new(n_vertices, es, ts)
    }

    pub fn one_skeleton(&self) -> Self {
        SimplicialComplex2 { n_vertices: self.n_vertices, edges: self.edges.clone(), triangles: Vec::new() }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_simplices(&self) -> usize {
        self.n_vertices + self.edges.len() + self.triangles.len()
    }

    /// All simplices: vertices, then edges, then triangles.
    pub fn simplices(&self) -> Vec<Simplex> {
        let mut out: Vec<Simplex> = (0..self.n_vertices).map(Simplex::Vertex).collect();
        out.extend(self.edges.iter().map(|e| Simplex::Edge(e[0], e[1])));
        out.extend(self.triangles.iter().map(|t| Simplex::Triangle(t[0], t[1], t[2])));
        out
    }

    fn edge_index(&self) -> HashMap<[usize; 2], usize> {
        self.edges.iter().enumerate().map(|(i, e)| (*e, i)).collect()
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.n_vertices);
        for e in &self.edges {
            uf.union(e[0], e[1]);
        }
        uf.labels(&vec![true; self.n_vertices]).1
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }
}

/// Finite real values on the vertices of a complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, ComplexError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ComplexError::NonFiniteValue { index });
        }
        Ok(VertexFunction { values })
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

    /// First value that occurs twice, if any.
    pub fn repeated_value(&self) -> Option<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
    }

    pub fn is_generic(&self) -> bool {
        self.repeated_value().is_none()
    }

    pub fn negated(&self) -> Self {
        VertexFunction { values: self.values.iter().map(|v| -v).collect() }
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        let lo = self.values.iter().copied().min_by(f64::total_cmp)?;
        let hi = self.values.iter().copied().max_by(f64::total_cmp)?;
        Some((lo, hi))
    }
}

/// How equal vertex values are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Equal values are an error.
    #[default]
    Reject,
    /// Equal values are ordered by vertex index, as if perturbed by
    /// index-ordered infinitesimals. Coordinates keep the actual values.
    Symbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Ordinary,
    Relative,
}

/// One step of the extended filtration. In the relative phase the entry
/// stands for the cone over `simplex`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiltrationEntry {
    pub simplex: Simplex,
    pub phase: Phase,
    pub value: f64,
}

/// The extended filtration, without the initial cone vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    pub entries: Vec<FiltrationEntry>,
}

fn check_function(k: &SimplicialComplex2, f: &VertexFunction, tie: TieBreak) -> Result<(), ComplexError> {
    if f.len() != k.n_vertices() {
        return Err(ComplexError::ValueCount { expected: k.n_vertices(), got: f.len() });
    }
    if tie == TieBreak::Reject {
        if let Some(value) = f.repeated_value() {
            return Err(ComplexError::NonGenericValues { value });
        }
    }
    Ok(())
}

/// Vertex ranks under the (possibly tie-broken) total order of values.
fn vertex_ranks(f: &VertexFunction) -> Vec<usize> {
    let v = f.values();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut rank = vec![0; v.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Orders the simplices of `k` for both phases of the extended filtration.
pub fn build_filtration(k: &SimplicialComplex2, f: &VertexFunction, tie: TieBreak) -> Result<Filtration, ComplexError> {
    check_function(k, f, tie)?;
    let rank = vertex_ranks(f);
    let simplices = k.simplices();
    let top = |s: &Simplex| s.vertices().into_iter().max_by_key(|&v| rank[v]).unwrap();
    let bottom = |s: &Simplex| s.vertices().into_iter().min_by_key(|&v| rank[v]).unwrap();

    let mut ord: Vec<&Simplex> = simplices.iter().collect();
    ord.sort_by_key(|s| (rank[top(s)], s.dim(), **s));
    let mut rel: Vec<&Simplex> = simplices.iter().collect();
    rel.sort_by_key(|s| (std::cmp::Reverse(rank[bottom(s)]), s.dim(), **s));

    let vals = f.values();
    let mut entries: Vec<FiltrationEntry> =
        ord.into_iter().map(|s| FiltrationEntry { simplex: *s, phase: Phase::Ordinary, value: vals[top(s)] }).collect();
    entries.extend(rel.into_iter().map(|s| FiltrationEntry {
        simplex: *s,
        phase: Phase::Relative,
        value: vals[bottom(s)],
    }));
    Ok(Filtration { entries })
}

fn boundary_faces(s: &Simplex) -> Vec<Simplex> {
    match *s {
        Simplex::Vertex(_) => Vec::new(),
        Simplex::Edge(a, b) => vec![Simplex::Vertex(a), Simplex::Vertex(b)],
        Simplex::Triangle(a, b, c) => vec![Simplex::Edge(a, b), Simplex::Edge(a, c), Simplex::Edge(b, c)],
    }
}

/// Symmetric difference of two sorted index lists.
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Reduces a Z/2 boundary matrix given by sorted columns and returns the
/// persistence pairs `(creator, destroyer)` in column order.
pub(crate) fn reduce(columns: Vec<Vec<usize>>) -> Vec<(usize, usize)> {
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(columns.len());
    let mut owner_of_low: HashMap<usize, usize> = HashMap::new();
    let mut pairs = Vec::new();
    for (j, mut col) in columns.into_iter().enumerate() {
        while let Some(&low) = col.last() {
            match owner_of_low.get(&low) {
                Some(&k) => col = add_columns(&col, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            owner_of_low.insert(low, j);
            pairs.push((low, j));
        }
        reduced.push(col);
    }
    pairs
}

/// Extended persistence diagram of the PL extension of `f`, rejecting
/// repeated values.
pub fn extended_persistence(k: &SimplicialComplex2, f: &VertexFunction) -> Result<ExtendedDiagram, ComplexError> {
    extended_persistence_with(k, f, TieBreak::Reject)
}

pub fn extended_persistence_with(
    k: &SimplicialComplex2,
    f: &VertexFunction,
    tie: TieBreak,
) -> Result<ExtendedDiagram, ComplexError> {
    let filt = build_filtration(k, f, tie)?;
    let m = k.n_simplices();
    // Column 0 is the cone vertex; ordinary simplices follow, then cones.
    let mut ord_pos: HashMap<Simplex, usize> = HashMap::with_capacity(m);
    let mut cone_pos: HashMap<Simplex, usize> = HashMap::with_capacity(m);
    for (i, e) in filt.entries.iter().enumerate() {
        match e.phase {
            Phase::Ordinary => ord_pos.insert(e.simplex, i + 1),
            Phase::Relative => cone_pos.insert(e.simplex, i + 1),
        };
    }
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(2 * m + 1);
    columns.push(Vec::new());
    for e in &filt.entries {
        let faces = boundary_faces(&e.simplex);
        let mut col: Vec<usize> = match e.phase {
            Phase::Ordinary => faces.iter().map(|s| ord_pos[s]).collect(),
            Phase::Relative => {
                let mut c: Vec<usize> = faces.iter().map(|s| cone_pos[s]).collect();
                c.push(ord_pos[&e.simplex]);
                if e.simplex.dim() == 0 {
                    c.push(0);
                }
                c
            }
        };
        col.sort_unstable();
        columns.push(col);
    }

    let entry = |i: usize| &filt.entries[i - 1];
    let dim_of = |i: usize| match entry(i).phase {
        Phase::Ordinary => entry(i).simplex.dim(),
        Phase::Relative => entry(i).simplex.dim() + 1,
    };
    let mut points = Vec::new();
    for (c, d) in reduce(columns) {
        debug_assert!(c != 0, "the cone vertex is never paired");
        let (ec, ed) = (entry(c), entry(d));
        let (x, y) = (ec.value, ed.value);
        let dim = dim_of(c);
        match (ec.phase, ed.phase) {
            (Phase::Ordinary, Phase::Ordinary) if x != y => points.push(DiagramPoint::new(x, y, PointKind::Ord, dim)),
            (Phase::Relative, Phase::Relative) if x != y => points.push(DiagramPoint::new(x, y, PointKind::Rel, dim)),
            (Phase::Ordinary, Phase::Relative) => {
                let kind = if x <= y { PointKind::ExtPlus } else { PointKind::ExtMinus };
                points.push(DiagramPoint::new(x, y, kind, dim))
            }
            _ => {}
        }
    }
    Ok(ExtendedDiagram::new(points))
}

/// Component labels of the simplices meeting a PL preimage.
#[derive(Clone, Debug, PartialEq)]
pub struct PreimageLabels {
    pub count: usize,
    pub vertex: Vec<Option<usize>>,
    pub edge: Vec<Option<usize>>,
    pub triangle: Vec<Option<usize>>,
}

impl PreimageLabels {
    pub fn label(
        &self,
        s: &Simplex,
        edge_index: &HashMap<[usize; 2], usize>,
        tri_index: &HashMap<[usize; 3], usize>,
    ) -> Option<usize> {
        match *s {
            Simplex::Vertex(v) => self.vertex[v],
            Simplex::Edge(a, b) => self.edge[edge_index[&[a, b]]],
            Simplex::Triangle(a, b, c) => self.triangle[tri_index[&[a, b, c]]],
        }
    }

    /// Some participating simplex of every component, as (kind, index) with
    /// kind 0 = vertex, 1 = edge, 2 = triangle.
    pub fn representatives(&self) -> Vec<(usize, usize)> {
        let mut rep = vec![None; self.count];
        let groups: [&Vec<Option<usize>>; 3] = [&self.vertex, &self.edge, &self.triangle];
        for (kind, labels) in groups.iter().enumerate() {
            for (i, l) in labels.iter().enumerate() {
                if let Some(l) = *l {
                    rep[l].get_or_insert((kind, i));
                }
            }
        }
        rep.into_iter().map(|r| r.expect("every component has a simplex")).collect()
    }

    pub fn get(&self, kind: usize, index: usize) -> Option<usize> {
        match kind {
            0 => self.vertex[index],
            1 => self.edge[index],
            _ => self.triangle[index],
        }
    }
}

/// Labels the components of the PL preimage of `interval`. A simplex takes
/// part when the closed range of its vertex values meets the interval; two
/// such simplices are joined when one is a face of the other.
pub fn preimage_labels(k: &SimplicialComplex2, values: &[f64], interval: &Interval) -> PreimageLabels {
    let n = k.n_vertices();
    let ne = k.edges().len();
    let nt = k.triangles().len();
    let range = |vs: &[usize]| {
        let lo = vs.iter().map(|&v| values[v]).fold(f64::INFINITY, f64::min);
        let hi = vs.iter().map(|&v| values[v]).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let mut active = vec![false; n + ne + nt];
    for v in 0..n {
        active[v] = interval.contains(values[v]);
    }
    for (i, e) in k.edges().iter().enumerate() {
        let (lo, hi) = range(e);
        active[n + i] = interval.meets_closed(lo, hi);
    }
    for (i, t) in k.triangles().iter().enumerate() {
        let (lo, hi) = range(t);
        active[n + ne + i] = interval.meets_closed(lo, hi);
    }
    let mut uf = UnionFind::new(n + ne + nt);
    for (i, e) in k.edges().iter().enumerate() {
        if active[n + i] {
            for &v in e {
                if active[v] {
                    uf.union(n + i, v);
                }
            }
        }
    }
    if nt > 0 {
        let eidx = k.edge_index();
        for (i, t) in k.triangles().iter().enumerate() {
            if !active[n + ne + i] {
                continue;
            }
            for f in [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]] {
                let j = n + eidx[&f];
                if active[j] {
                    uf.union(n + ne + i, j);
                }
            }
        }
    }
    let (labels, count) = uf.labels(&active);
    PreimageLabels {
        count,
        vertex: labels[..n].to_vec(),
        edge: labels[n..n + ne].to_vec(),
        triangle: labels[n + ne..].to_vec(),
    }
}

/// Components of the PL preimage of `interval`, each as a sorted set of the
/// simplices whose relative interiors it meets (up to boundary contacts).
pub fn levelset_components(k: &SimplicialComplex2, f: &VertexFunction, interval: &Interval) -> Vec<Vec<Simplex>> {
    let labels = preimage_labels(k, f.values(), interval);
    let mut comps: Vec<Vec<Simplex>> = vec![Vec::new(); labels.count];
    for (s, l) in
        k.simplices().into_iter().zip(labels.vertex.iter().chain(labels.edge.iter()).chain(labels.triangle.iter()))
    {
        if let Some(l) = *l {
            comps[l].push(s);
        }
    }
    for c in &mut comps {
        c.sort();
    }
    comps.sort();
    comps
}

/// File form of a complex: arbitrary integer vertex ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub vertices: Vec<VertexEntry>,
    #[serde(default)]
    pub edges: Vec<[i64; 2]>,
    #[serde(default)]
    pub triangles: Vec<[i64; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: i64,
    pub value: f64,
}

impl ComplexFile {
    /// Resolves ids to indices (in listing order) and validates.
    pub fn into_complex(&self) -> Result<(SimplicialComplex2, VertexFunction), ComplexError> {
        let mut index = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(ComplexError::DuplicateId(v.id));
            }
        }
        let look = |id: &i64| index.get(id).copied().ok_or(ComplexError::UnknownId(*id));
        let edges =
            self.edges.iter().map(|[a, b]| Ok([look(a)?, look(b)?])).collect::<Result<Vec<_>, ComplexError>>()?;
        let triangles = self
            .triangles
            .iter()
            .map(|[a, b, c]| Ok([look(a)?, look(b)?, look(c)?]))
            .collect::<Result<Vec<_>, ComplexError>>()?;
        let k = SimplicialComplex2::new(self.vertices.len(), edges, triangles)?;
        let f = VertexFunction::new(self.vertices.iter().map(|v| v.value).collect())?;
        Ok((k, f))
    }

    pub fn from_complex(k: &SimplicialComplex2, f: &VertexFunction) -> Self {
        ComplexFile {
            vertices: f.values().iter().enumerate().map(|(i, &value)| VertexEntry { id: i as i64, value }).collect(),
            edges: k.edges().iter().map(|e| [e[0] as i64, e[1] as i64]).collect(),
            triangles: k.triangles().iter().map(|t| [t[0] as i64, t[1] as i64, t[2] as i64]).collect(),
        }
    }
}
