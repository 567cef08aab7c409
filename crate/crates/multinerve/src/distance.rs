//! Bottleneck distances relative to a region of the plane, the signature
//! metric built from the staircases of a cover, and the end-to-end signature
//! pipelines.
//!
//! In a bottleneck matching relative to a region `Θ`, a point may stay
//! unmatched at the price of its ℓ∞ distance to the closure of `Θ`. With `Θ`
//! the diagonal this is the usual bottleneck distance.

use serde::Serialize;
use thiserror::Error;

use crate::complex::{extended_persistence_with, ComplexError, SimplicialComplex2, TieBreak, VertexFunction};
use crate::covers::{build_staircase, directed_excess, GomicCover, StairKind, Staircase};
use crate::diagram::{prune_signature, DiagramError, DiagramPoint, ExtendedDiagram, PointKind, Variant};
use crate::mapper::{rips_graph, MapperError, PointCloud};
use crate::par::{self, Exec};

/// A region unmatched points can be sent to.
pub trait Region {
    /// ℓ∞ distance from `p` to the closure of the region.
    fn distance(&self, p: (f64, f64)) -> f64;
}

impl Region for Staircase {
    fn distance(&self, p: (f64, f64)) -> f64 {
        Staircase::distance(self, p)
    }
}

/// The diagonal `y = x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagonal;

impl Region for Diagonal {
    fn distance(&self, (x, y): (f64, f64)) -> f64 {
        (y - x).abs() / 2.0
    }
}

pub fn linf(p: &DiagramPoint, q: &DiagramPoint) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingResult {
    pub cost: f64,
    pub pairs: Vec<(DiagramPoint, DiagramPoint)>,
    /// Unmatched points of either diagram with their distance to the region.
    pub unmatched: Vec<(DiagramPoint, f64)>,
}

/// Perfect matching on the bipartite graph given by `allowed`, or `None`.
/// Kuhn's augmenting paths; the graphs here have a few hundred nodes at most.
fn perfect_matching(n: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n).map(|l| (0..n).filter(|&r| allowed(l, r)).collect()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(l: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &r in &adj[l] {
            if std::mem::replace(&mut seen[r], true) {
                continue;
            }
            if owner[r].is_none_or(|o| augment(o, adj, owner, seen)) {
                owner[r] = Some(l);
                return true;
            }
        }
        false
    }
    for l in 0..n {
        let mut seen = vec![false; n];
        if !augment(l, &adj, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut partner = vec![0; n];
    for (r, o) in owner.iter().enumerate() {
        partner[o.unwrap()] = r;
    }
    Some(partner)
}

/// Exact bottleneck distance relative to `theta`. The optimum is one of the
/// pairwise distances or point-to-region distances, so a binary search over
/// those with a perfect-matching test at each threshold is exact. Callers
/// pass diagrams restricted to one class of points.
pub fn staircase_bottleneck(d: &ExtendedDiagram, d2: &ExtendedDiagram, theta: &dyn Region) -> MatchingResult {
    let (a, b) = (d.points(), d2.points());
    let (n, m) = (a.len(), b.len());
    let da: Vec<f64> = a.iter().map(|p| theta.distance(p.coords())).collect();
    let db: Vec<f64> = b.iter().map(|q| theta.distance(q.coords())).collect();
    let pair: Vec<Vec<f64>> = a.iter().map(|p| b.iter().map(|q| linf(p, q)).collect()).collect();

    let mut candidates: Vec<f64> =
        pair.iter().flatten().chain(&da).chain(&db).copied().filter(|x| x.is_finite()).collect();
    candidates.push(0.0);
    candidates.push(f64::INFINITY);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Left: points of `d`, then one slot per point of `d2` for deleting it.
    // Right: points of `d2`, then one slot per point of `d`.
    let allowed = |t: f64| {
        let (pair, da, db) = (&pair, &da, &db);
        move |l: usize, r: usize| match (l < n, r < m) {
            (true, true) => pair[l][r] <= t,
            (true, false) => r - m == l && da[l] <= t,
            (false, true) => l - n == r && db[r] <= t,
            (false, false) => true,
        }
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(n + m, &allowed(candidates[mid])).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let partner = perfect_matching(n + m, &allowed(candidates[lo])).expect("deleting everything is always feasible");

    let mut result = MatchingResult { cost: 0.0, pairs: Vec::new(), unmatched: Vec::new() };
    for (l, &r) in partner.iter().enumerate() {
        let cost = match (l < n, r < m) {
            (true, true) => {
                result.pairs.push((a[l], b[r]));
                pair[l][r]
            }
            (true, false) => {
                result.unmatched.push((a[l], da[l]));
                da[l]
            }
            (false, true) => {
                result.unmatched.push((b[r], db[r]));
                db[r]
            }
            (false, false) => 0.0,
        };
        result.cost = result.cost.max(cost);
    }
    result
}

/// Which term of the signature metric a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointType {
    Ord,
    Ext,
    Rel,
}

impl PointType {
    pub fn of(kind: PointKind) -> Self {
        match kind {
            PointKind::Ord => PointType::Ord,
            PointKind::ExtPlus | PointKind::ExtMinus => PointType::Ext,
            PointKind::Rel => PointType::Rel,
        }
    }
}

/// Staircase the points of a given type are measured against.
pub fn staircase_for(cover: &GomicCover, ty: PointType, variant: Variant) -> Staircase {
    build_staircase(
        cover,
        match (ty, variant) {
            (PointType::Ord, _) => StairKind::Ord,
            (PointType::Rel, _) => StairKind::Rel,
            (PointType::Ext, Variant::MultiNerve) => StairKind::ExtMinus,
            (PointType::Ext, Variant::Mapper) => StairKind::Ext,
        },
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PerType {
    pub ord: f64,
    pub ext: f64,
    pub rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupMatching {
    #[serde(rename = "type")]
    pub ty: PointType,
    pub dim: usize,
    #[serde(flatten)]
    pub result: MatchingResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub cost: f64,
    pub per_type: PerType,
    pub matching: Vec<GroupMatching>,
    pub ext_plus_convention: &'static str,
}

pub const EXT_PLUS_CONVENTION: &str =
    "ExtPlus points share the extended term; unmatched they pay their distance to the closure of its staircase";

/// Classes `(type, dim)` present in either diagram, sorted.
fn classes(d: &ExtendedDiagram, d2: &ExtendedDiagram) -> Vec<(PointType, usize)> {
    let mut cs: Vec<(PointType, usize)> =
        d.points().iter().chain(d2.points()).map(|p| (PointType::of(p.kind), p.dim)).collect();
    cs.sort();
    cs.dedup();
    cs
}

fn class_of(d: &ExtendedDiagram, ty: PointType, dim: usize) -> ExtendedDiagram {
    d.filter(|p| PointType::of(p.kind) == ty && p.dim == dim)
}

fn report_with(
    exec: Exec,
    d: &ExtendedDiagram,
    d2: &ExtendedDiagram,
    region: &(dyn Fn(PointType) -> Box<dyn Region + Send + Sync> + Sync),
) -> DistanceReport {
    let cs = classes(d, d2);
    let results = par::map(exec, &cs, |&(ty, dim)| {
        let r = region(ty);
        staircase_bottleneck(&class_of(d, ty, dim), &class_of(d2, ty, dim), r.as_ref())
    });
    let mut per_type = PerType::default();
    let mut matching = Vec::with_capacity(cs.len());
    for ((ty, dim), result) in cs.into_iter().zip(results) {
        let slot = match ty {
            PointType::Ord => &mut per_type.ord,
            PointType::Ext => &mut per_type.ext,
            PointType::Rel => &mut per_type.rel,
        };
        *slot = slot.max(result.cost);
        matching.push(GroupMatching { ty, dim, result });
    }
    DistanceReport {
        cost: per_type.ord.max(per_type.ext).max(per_type.rel),
        per_type,
        matching,
        ext_plus_convention: EXT_PLUS_CONVENTION,
    }
}

/// The signature metric: per point type, the bottleneck distance relative to
/// that type's staircase, maximized over types and dimensions.
pub fn mapper_distance_report(
    d: &ExtendedDiagram,
    d2: &ExtendedDiagram,
    cover: &GomicCover,
    variant: Variant,
) -> DistanceReport {
    mapper_distance_report_with(Exec::default(), d, d2, cover, variant)
}

pub fn mapper_distance_report_with(
    exec: Exec,
    d: &ExtendedDiagram,
    d2: &ExtendedDiagram,
    cover: &GomicCover,
    variant: Variant,
) -> DistanceReport {
    let stairs = [PointType::Ord, PointType::Ext, PointType::Rel].map(|t| staircase_for(cover, t, variant));
    let region = |ty: PointType| -> Box<dyn Region + Send + Sync> { Box::new(stairs[ty as usize].clone()) };
    report_with(exec, d, d2, &region)
}

pub fn mapper_distance(d: &ExtendedDiagram, d2: &ExtendedDiagram, cover: &GomicCover, variant: Variant) -> f64 {
    mapper_distance_report(d, d2, cover, variant).cost
}

/// The classic bottleneck distance, matching within each `(type, dim)` class.
pub fn bottleneck_distance(d: &ExtendedDiagram, d2: &ExtendedDiagram) -> f64 {
    report_with(Exec::Sequential, d, d2, &|_| Box::new(Diagonal)).cost
}

/// The largest distance, to the farther of the two staircases, of a point of
/// `d` lying in exactly one of them. Zero when there is no such point.
pub fn cover_discrepancy(d: &ExtendedDiagram, i: &GomicCover, j: &GomicCover) -> f64 {
    let mut worst: f64 = 0.0;
    for (kind, stair) in
        [(PointKind::Ord, StairKind::Ord), (PointKind::ExtMinus, StairKind::ExtMinus), (PointKind::Rel, StairKind::Rel)]
    {
        let (qi, qj) = (build_staircase(i, stair), build_staircase(j, stair));
        for p in d.points().iter().filter(|p| p.kind == kind) {
            let c = p.coords();
            if qi.contains(c) != qj.contains(c) {
                worst = worst.max(qi.distance(c).max(qj.distance(c)));
            }
        }
    }
    worst
}

/// ℓ∞ Hausdorff distance between the staircases of two covers. For the
/// ExtMinus kind this uses the interval-matching formula
/// `sup_{(a,b)} inf_{(c,d)} max(|a−c|, |b−d|)` in both directions, which
/// never underestimates the exact value; the other kinds are evaluated
/// exactly at the corners of the half-squares.
pub fn staircase_hausdorff(i: &GomicCover, j: &GomicCover, kind: StairKind) -> f64 {
    if kind == StairKind::ExtMinus {
        let directed = |x: &GomicCover, y: &GomicCover| {
            x.intervals()
                .iter()
                .map(|p| {
                    y.intervals()
                        .iter()
                        .map(|q| (p.lo - q.lo).abs().max((p.hi - q.hi).abs()))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        return directed(i, j).max(directed(j, i));
    }
    let (qi, qj) = (build_staircase(i, kind), build_staircase(j, kind));
    directed_excess(&qi, &qj).max(directed_excess(&qj, &qi))
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SignatureError {
    #[error(transparent)]
    Mapper(#[from] MapperError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Signature of the PL function `f` on `k`: the quotient part of its extended
/// diagram, pruned by the cover's staircases.
pub fn complex_signature(
    k: &SimplicialComplex2,
    f: &VertexFunction,
    cover: &GomicCover,
    variant: Variant,
) -> Result<ExtendedDiagram, SignatureError> {
    let d = extended_persistence_with(k, f, TieBreak::Symbolic)?;
    Ok(prune_signature(&d, cover, variant)?)
}

/// Signature estimated from a sample: the PL function on the clique complex
/// of the Rips graph at scale `delta`, pruned as in [`complex_signature`].
pub fn approximate_signature(
    cloud: &PointCloud,
    delta: f64,
    cover: &GomicCover,
    variant: Variant,
) -> Result<ExtendedDiagram, SignatureError> {
    if let Some(index) = cloud.values().iter().position(|&v| cover.is_endpoint(v) || !cover.covers(v)) {
        return Err(MapperError::UncoveredValue { index, value: cloud.values()[index] }.into());
    }
    let k = rips_graph(cloud, delta).clique_complex();
    let f = VertexFunction::new(cloud.values().to_vec())?;
    complex_signature(&k, &f, cover, variant)
}

/// Pairwise signature distances.
pub fn distance_matrix_with(
    exec: Exec,
    sigs: &[ExtendedDiagram],
    cover: &GomicCover,
    variant: Variant,
) -> Vec<Vec<f64>> {
    let n = sigs.len();
    let flat = par::map_range(exec, n * n, |ij| {
        let (i, j) = (ij / n, ij % n);
        if i < j {
            mapper_distance_report_with(Exec::Sequential, &sigs[i], &sigs[j], cover, variant).cost
        } else {
            0.0
        }
    });
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            out[i][j] = flat[i * n + j];
            out[j][i] = flat[i * n + j];
        }
    }
    out
}
