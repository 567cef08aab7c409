//! Shared fixtures for the integration tests: an independent persistence
//! oracle, random generators and the small hand-built models.
#![allow(dead_code)]

pub mod checks;

use std::collections::HashMap;
use std::f64::consts::PI;

use multinerve::complex::Simplex;
use multinerve::covers::{cover_from_pairs, GomicCover};
use multinerve::diagram::{DiagramPoint, ExtendedDiagram, PointKind};
use multinerve::mapper::PointCloud;
use multinerve::telescope::{CombinatorialTelescope, Cylinder};
use multinerve::{LeveledMultigraph, SimplicialComplex2, VertexFunction};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Rank-function oracle for extended persistence.
//
// The extended filtration is evaluated at vertex granularity: steps 0..n are
// the lower-star sublevel complexes, steps n..2n are the pairs (K, A) with A
// the upper-star superlevel complexes, ending at (K, K). Ranks of the maps
// between steps are computed directly from chains over Z/2, and the
// multiplicity of each bar comes from inclusion-exclusion on those ranks.

pub struct RankOracle {
    simplices: Vec<Simplex>,
    boundary: Vec<u64>,
    /// Step at which each simplex enters `L`, and at which it enters `A`.
    enter_l: Vec<usize>,
    enter_a: Vec<usize>,
    pub step_value: Vec<f64>,
    pub n: usize,
}

fn rank_of(vectors: impl IntoIterator<Item = u64>) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for mut v in vectors {
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Sources of a basis of the combinations whose images vanish.
fn kernel(pairs: Vec<(u64, u64)>) -> Vec<u64> {
    let mut reduced: Vec<(u64, u64)> = Vec::new();
    let mut out = Vec::new();
    for (mut img, mut src) in pairs {
        while let Some(top) = img.checked_ilog2() {
            match reduced.iter().find(|(r, _)| r.ilog2() == top) {
                Some(&(r, s)) => {
                    img ^= r;
                    src ^= s;
                }
                None => break,
            }
        }
        if img == 0 {
            out.push(src);
        } else {
            reduced.push((img, src));
        }
    }
    out
}

impl RankOracle {
    pub fn new(k: &SimplicialComplex2, f: &VertexFunction) -> Self {
        let simplices = k.simplices();
        assert!(simplices.len() <= 64, "oracle chains are 64-bit masks");
        let index: HashMap<Simplex, usize> = simplices.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let faces = |s: &Simplex| -> Vec<Simplex> {
            match *s {
                Simplex::Vertex(_) => vec![],
                Simplex::Edge(a, b) => vec![Simplex::Vertex(a), Simplex::Vertex(b)],
                Simplex::Triangle(a, b, c) => vec![Simplex::Edge(a, b), Simplex::Edge(a, c), Simplex::Edge(b, c)],
            }
        };
        let boundary = simplices.iter().map(|s| faces(s).iter().fold(0u64, |m, t| m | 1 << index[t])).collect();
        let v = f.values();
        let n = v.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let enter_l = simplices.iter().map(|s| s.vertices().iter().map(|&x| rank[x]).max().unwrap()).collect();
        let enter_a =
            simplices.iter().map(|s| n + (n - 1 - s.vertices().iter().map(|&x| rank[x]).min().unwrap())).collect();
        let mut step_value: Vec<f64> = order.iter().map(|&i| v[i]).collect();
        step_value.extend(order.iter().rev().map(|&i| v[i]));
        RankOracle { simplices, boundary, enter_l, enter_a, step_value, n }
    }

    pub fn steps(&self) -> usize {
        2 * self.n
    }

    fn in_l(&self, s: usize, step: usize) -> bool {
        self.enter_l[s] <= step
    }

    fn in_a(&self, s: usize, step: usize) -> bool {
        self.enter_a[s] <= step
    }

    fn mask_not_a(&self, step: usize) -> u64 {
        (0..self.simplices.len()).filter(|&s| !self.in_a(s, step)).fold(0, |m, s| m | 1 << s)
    }

    /// Rank of `H_p(step i) → H_p(step j)`; zero when `i` is before the start.
    pub fn rank(&self, p: usize, i: isize, j: usize) -> usize {
        if i < 0 {
            return 0;
        }
        let i = i as usize;
        assert!(i <= j);
        let live_i = self.mask_not_a(i);
        let live_j = self.mask_not_a(j);
        let cycles = kernel(
            (0..self.simplices.len())
                .filter(|&s| self.simplices[s].dim() == p && self.in_l(s, i) && !self.in_a(s, i))
                .map(|s| (self.boundary[s] & live_i, 1u64 << s))
                .collect(),
        );
        let boundaries: Vec<u64> = (0..self.simplices.len())
            .filter(|&s| self.simplices[s].dim() == p + 1 && self.in_l(s, j) && !self.in_a(s, j))
            .map(|s| self.boundary[s] & live_j)
            .collect();
        let projected = cycles.iter().map(|c| c & live_j);
        rank_of(boundaries.iter().copied().chain(projected)) - rank_of(boundaries.iter().copied())
    }

    /// Number of bars in degree `p` born at step `i` and gone at step `j`.
    pub fn multiplicity(&self, p: usize, i: usize, j: usize) -> usize {
        let r = |a: isize, b: usize| self.rank(p, a, b) as isize;
        let (i, jm) = (i as isize, j - 1);
        let m = r(i, jm) - r(i, j) - r(i - 1, jm) + r(i - 1, j);
        assert!(m >= 0, "negative multiplicity");
        m as usize
    }

    /// Rectangle count: bars born in `(a, b]` and gone in `(c, d]`.
    pub fn rectangle(&self, p: usize, a: isize, b: usize, c: usize, d: usize) -> usize {
        let r = |x: isize, y: usize| self.rank(p, x, y) as isize;
        let m = r(b as isize, c) - r(b as isize, d) + r(a, d) - r(a, c);
        assert!(m >= 0);
        m as usize
    }

    pub fn diagram(&self) -> ExtendedDiagram {
        let mut points = Vec::new();
        let total = self.steps();
        for p in 0..=2 {
            for i in 0..total {
                for j in (i + 1)..total {
                    for _ in 0..self.multiplicity(p, i, j) {
                        points.push(self.point(p, i, j));
                    }
                }
            }
        }
        ExtendedDiagram::new(points)
    }

    fn point(&self, p: usize, i: usize, j: usize) -> DiagramPoint {
        let (x, y) = (self.step_value[i], self.step_value[j]);
        let kind = match (i < self.n, j < self.n) {
            (true, true) => PointKind::Ord,
            (true, false) if x <= y => PointKind::ExtPlus,
            (true, false) => PointKind::ExtMinus,
            _ => PointKind::Rel,
        };
        DiagramPoint::new(x, y, kind, p)
    }

    /// Birth and death steps of a diagram point.
    pub fn steps_of(&self, q: &DiagramPoint) -> (usize, usize) {
        let ord = |v: f64| self.step_value[..self.n].iter().position(|&x| x == v).unwrap();
        let rel = |v: f64| self.n + self.step_value[self.n..].iter().position(|&x| x == v).unwrap();
        match q.kind {
            PointKind::Ord => (ord(q.birth), ord(q.death)),
            PointKind::ExtPlus | PointKind::ExtMinus => (ord(q.birth), rel(q.death)),
            PointKind::Rel => (rel(q.birth), rel(q.death)),
        }
    }
}

// ---------------------------------------------------------------------------
// Random generators.

/// Distinct values: a random permutation of `0..n` plus jitter below 0.5.
pub fn distinct_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm.iter().map(|&p| p as f64 + rng.gen_range(0.0..0.5)).collect()
}

/// A random 2-complex with at most `max_simplices` simplices.
pub fn random_complex(rng: &mut ChaCha8Rng, max_simplices: usize, with_triangles: bool) -> SimplicialComplex2 {
    let nv = rng.gen_range(1..=8usize.min(max_simplices));
    let mut budget = max_simplices - nv;
    let mut pairs: Vec<[usize; 2]> = (0..nv).flat_map(|a| ((a + 1)..nv).map(move |b| [a, b])).collect();
    pairs.shuffle(rng);
    let p_edge = rng.gen_range(0.2..0.9);
    let mut edges = Vec::new();
    for e in pairs {
        if budget > 0 && rng.gen_bool(p_edge) {
            edges.push(e);
            budget -= 1;
        }
    }
    let mut triangles = Vec::new();
    if with_triangles {
        let has = |a: usize, b: usize| edges.contains(&[a.min(b), a.max(b)]);
        let mut cands: Vec<[usize; 3]> = Vec::new();
        for a in 0..nv {
            for b in (a + 1)..nv {
                for c in (b + 1)..nv {
                    if has(a, b) && has(a, c) && has(b, c) {
                        cands.push([a, b, c]);
                    }
                }
            }
        }
        cands.shuffle(rng);
        for t in cands {
            if budget > 0 && rng.gen_bool(0.6) {
                triangles.push(t);
                budget -= 1;
            }
        }
    }
    SimplicialComplex2::new(nv, edges, triangles).unwrap()
}

/// A random telescope on critical values drawn from a grid of step 0.5.
pub fn random_telescope(rng: &mut ChaCha8Rng, max_crit: usize) -> CombinatorialTelescope {
    let n = rng.gen_range(1..=max_crit);
    let mut grid: Vec<usize> = (0..4 * max_crit).collect();
    grid.shuffle(rng);
    let mut crit: Vec<f64> = grid[..n].iter().map(|&g| g as f64 * 0.5).collect();
    crit.sort_by(f64::total_cmp);
    let slices: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let cylinders = (0..n.saturating_sub(1))
        .map(|i| {
            let m = rng.gen_range(0..=3);
            let mut c = Cylinder::default();
            for _ in 0..m {
                c.lower.push(rng.gen_range(0..slices[i]));
                c.upper.push(rng.gen_range(0..slices[i + 1]));
            }
            c
        })
        .collect();
    CombinatorialTelescope::new(crit, slices, cylinders).unwrap()
}

/// A random gomic whose range strictly contains `[lo, hi]` and whose
/// endpoints avoid `avoid`.
pub fn random_cover(rng: &mut ChaCha8Rng, lo: f64, hi: f64, max_len: usize, avoid: &[f64]) -> GomicCover {
    loop {
        let n = rng.gen_range(1..=max_len);
        let start = lo - rng.gen_range(0.05..1.0);
        let end = hi + rng.gen_range(0.05..1.0);
        let mut cuts: Vec<f64> = (0..2 * n - 2).map(|_| rng.gen_range(start..end)).collect();
        cuts.sort_by(f64::total_cmp);
        let mut pairs = Vec::with_capacity(n);
        for k in 0..n {
            let a = if k == 0 { start } else { cuts[2 * k - 2] };
            let b = if k + 1 == n { end } else { cuts[2 * k + 1] };
            pairs.push((a, b));
        }
        let ends: Vec<f64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        if ends.iter().any(|e| avoid.contains(e)) {
            continue;
        }
        if let Ok(c) = cover_from_pairs(&pairs) {
            return c;
        }
    }
}

/// A random planar sample with the first coordinate as function value.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    let coords: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..4.0), rng.gen_range(0.0..2.0)]).collect();
    let values = coords.iter().map(|p| p[0]).collect();
    PointCloud::from_coords(coords, values).unwrap()
}

/// `n` points on the unit circle with the height function.
pub fn circle_cloud(n: usize, phase: f64) -> PointCloud {
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64 + phase;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let values = coords.iter().map(|p| p[1]).collect();
    PointCloud::from_coords(coords, values).unwrap()
}

// ---------------------------------------------------------------------------
// Hand-built models.

/// Reeb graph of the height on an upright torus: a minimum at 0, a split at
/// 1, a merge at 2, a maximum at 3.
pub fn torus_graph() -> LeveledMultigraph {
    LeveledMultigraph::new(vec![0.0, 1.0, 2.0, 3.0], vec![(0, 1), (1, 2), (1, 2), (2, 3)]).unwrap()
}

pub fn torus_telescope() -> CombinatorialTelescope {
    CombinatorialTelescope::new(
        vec![0.0, 1.0, 2.0, 3.0],
        vec![1, 1, 1, 1],
        vec![
            Cylinder { lower: vec![0], upper: vec![0] },
            Cylinder { lower: vec![0, 0], upper: vec![0, 0] },
            Cylinder { lower: vec![0], upper: vec![0] },
        ],
    )
    .unwrap()
}

pub fn torus_cover() -> GomicCover {
    cover_from_pairs(&[(-0.5, 1.6), (1.4, 3.5)]).unwrap()
}

/// Reeb graph of the height on an upright double torus: two holes spanning
/// [1, 2] and [3, 4].
pub fn double_torus_graph() -> LeveledMultigraph {
    LeveledMultigraph::new(
        vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 4), (3, 4), (4, 5)],
    )
    .unwrap()
}

/// Four elements; the second one only sees the two arcs of the first hole.
pub fn double_torus_cover() -> GomicCover {
    cover_from_pairs(&[(-0.5, 1.2), (1.1, 1.9), (1.8, 3.8), (3.7, 5.5)]).unwrap()
}

/// Three components at pairwise distance 10, with the Rips scale 1.2:
/// * points 0, 1 (values 1.0, 2.5): one edge straddling the first overlap,
/// * points 2, 3 (values 0.5, 4.0): one edge spanning the whole middle element,
/// * points 4..8 (values 1.0, 1.7, 1.8, 2.6): a 4-cycle with two sides in the
///   first overlap.
pub fn crossing_instance() -> (PointCloud, f64, GomicCover) {
    let values = vec![1.0, 2.5, 0.5, 4.0, 1.0, 1.7, 1.8, 2.6];
    let group = [0, 0, 1, 1, 2, 2, 2, 2];
    let n = values.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i][j] = if group[i] != group[j] { 10.0 } else { 1.0 };
            }
        }
    }
    // Diagonals of the square are longer than the scale.
    for (a, b) in [(4, 7), (5, 6)] {
        d[a][b] = 2f64.sqrt();
        d[b][a] = 2f64.sqrt();
    }
    let cloud = PointCloud::from_distances(d, values).unwrap();
    let cover = cover_from_pairs(&[(0.0, 2.0), (1.5, 3.5), (3.0, 5.0)]).unwrap();
    (cloud, 1.2, cover)
}

pub fn pt(b: f64, d: f64, kind: PointKind, dim: usize) -> DiagramPoint {
    DiagramPoint::new(b, d, kind, dim)
}

fn closure(n: usize, edges: &[[usize; 2]], triangles: &[[usize; 3]]) -> SimplicialComplex2 {
    SimplicialComplex2::from_closure(n, edges, triangles).unwrap()
}

/// Seven-vertex torus: triangles `{i, i+1, i+3}` and `{i, i+2, i+3}` mod 7.
pub fn torus_complex() -> SimplicialComplex2 {
    let t: Vec<[usize; 3]> =
        (0..7).flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]]).collect();
    closure(7, &[], &t)
}

pub fn tetrahedron_boundary() -> SimplicialComplex2 {
    closure(4, &[], &[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
}

/// Small complexes of known topology, by name.
pub fn hand_built_complexes() -> Vec<(&'static str, SimplicialComplex2)> {
    let octahedron: Vec<[usize; 3]> =
        [[0, 2], [2, 1], [1, 3], [3, 0]].iter().flat_map(|&[a, b]| [[a, b, 4], [a, b, 5]]).collect();
    let annulus = [[0, 1, 3], [1, 3, 4], [1, 2, 4], [2, 4, 5], [2, 0, 5], [0, 5, 3]];
    let disk: Vec<[usize; 3]> = (1..=6).map(|i| [0, i, i % 6 + 1]).collect();
    let mut torus_with_loop: Vec<[usize; 2]> = torus_complex().edges().to_vec();
    torus_with_loop.extend([[0, 7], [7, 8], [0, 8]]);
    let torus_t = torus_complex().triangles().to_vec();
    let sphere_t = tetrahedron_boundary().triangles().to_vec();
    vec![
        ("tetrahedron boundary", tetrahedron_boundary()),
        ("octahedron boundary", closure(6, &[], &octahedron)),
        ("seven-vertex torus", torus_complex()),
        ("torus with a loop attached", closure(9, &torus_with_loop, &torus_t)),
        ("annulus", closure(6, &[], &annulus)),
        ("hexagonal disk", closure(7, &[], &disk)),
        ("square loop", closure(4, &[[0, 1], [1, 2], [2, 3], [3, 0]], &[])),
        ("theta graph", closure(5, &[[0, 1], [1, 4], [0, 2], [2, 4], [0, 3], [3, 4]], &[])),
        ("bowtie with a tail", closure(7, &[[4, 5], [5, 6]], &[[0, 1, 2], [2, 3, 4]])),
        ("sphere beside a loop", closure(7, &[[4, 5], [5, 6], [4, 6]], &sphere_t)),
    ]
}
