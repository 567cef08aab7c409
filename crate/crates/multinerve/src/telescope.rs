//! Telescopes modeled at the level of connected components.
//!
//! A telescope over critical values `a_1 < … < a_n` has a finite set of
//! components `X_i` over each `a_i` (a slice) and a finite set `Y_i` of
//! cylinder components over each `(a_i, a_{i+1})`, glued by a lower map
//! `Y_i → X_i` and an upper map `Y_i → X_{i+1}`. Nothing extends beyond
//! `a_1` or `a_n`. As a space this is exactly the leveled graph with nodes
//! `X_i` and edges `Y_i`, so Reeb graphs, Mappers and diagrams in degrees 0
//! and 1 only depend on this data.
//!
//! The operations follow the standard Merge / Split / Shift moves, and
//! [`canonicalize`] chains them so that the result has exactly one critical
//! value in every proper part of a cover and none in its overlaps. The leveled
//! graph of the result is then isomorphic to the MultiNerve Mapper.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::covers::{GomicCover, Interval};
use crate::diagram::{merge_value, shift_transform, split_transform, DiagramError, ExtendedDiagram, Variant};
use crate::mapper::assemble_nerve;
use crate::reeb::LeveledMultigraph;
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TelescopeError {
    #[error("[{a}, {b}] lies outside the telescope's support")]
    OutOfRange { a: f64, b: f64 },
    #[error("epsilon {eps} is not admissible at {at}")]
    InvalidEpsilon { at: f64, eps: f64 },
    #[error("critical value {0} is a cover endpoint")]
    EndpointCollision(f64),
    #[error("{0} is not a critical value")]
    NotCritical(f64),
    #[error("critical value {0} is not covered")]
    Uncovered(f64),
    #[error("malformed telescope: {0}")]
    Malformed(String),
}

/// Components over `(a_i, a_{i+1})` with their attaching maps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cylinder {
    /// `lower[y]` is the slice component below cylinder component `y`.
    pub lower: Vec<usize>,
    /// `upper[y]` is the slice component above cylinder component `y`.
    pub upper: Vec<usize>,
}

impl Cylinder {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    fn identity(n: usize) -> Self {
        Cylinder { lower: (0..n).collect(), upper: (0..n).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombinatorialTelescope {
    crit: Vec<f64>,
    slices: Vec<usize>,
    cylinders: Vec<Cylinder>,
}

/// One telescope move, as recorded by [`canonicalize_logged`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TelescopeOp {
    Merge { a: f64, b: f64 },
    Split { at: f64, eps: f64 },
    Shift { at: f64, eps: f64 },
}

impl TelescopeOp {
    pub fn apply(&self, t: &CombinatorialTelescope) -> Result<CombinatorialTelescope, TelescopeError> {
        match *self {
            TelescopeOp::Merge { a, b } => merge_op(t, a, b),
            TelescopeOp::Split { at, eps } => split_op(t, at, eps),
            TelescopeOp::Shift { at, eps } => shift_op(t, at, eps),
        }
    }

    /// The matching transform on a diagram.
    pub fn transform(&self, d: &ExtendedDiagram) -> Result<ExtendedDiagram, DiagramError> {
        match *self {
            TelescopeOp::Merge { a, b } => Ok(crate::diagram::merge_transform(d, a, b)),
            TelescopeOp::Split { at, eps } => split_transform(d, at, eps),
            TelescopeOp::Shift { at, eps } => shift_transform(d, at, eps),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fork {
    UpFork,
    DownFork,
}

impl CombinatorialTelescope {
    /// `slices[i]` is the number of components over `crit[i]`; there must be
    /// one cylinder between each pair of consecutive critical values.
    pub fn new(crit: Vec<f64>, slices: Vec<usize>, cylinders: Vec<Cylinder>) -> Result<Self, TelescopeError> {
        let bad = |m: String| Err(TelescopeError::Malformed(m));
        if crit.len() != slices.len() {
            return bad(format!("{} critical values but {} slices", crit.len(), slices.len()));
        }
        if cylinders.len() != crit.len().saturating_sub(1) {
            return bad(format!("{} cylinders for {} critical values", cylinders.len(), crit.len()));
        }
        if crit.iter().any(|c| !c.is_finite()) || crit.windows(2).any(|w| w[0] >= w[1]) {
            return bad("critical values must be finite and strictly increasing".into());
        }
        for (i, c) in cylinders.iter().enumerate() {
            if c.lower.len() != c.upper.len() {
                return bad(format!("cylinder {i} has maps of different sizes"));
            }
            if c.lower.iter().any(|&x| x >= slices[i]) || c.upper.iter().any(|&x| x >= slices[i + 1]) {
                return bad(format!("cylinder {i} maps outside its slices"));
            }
        }
        Ok(CombinatorialTelescope { crit, slices, cylinders })
    }

    pub fn crit(&self) -> &[f64] {
        &self.crit
    }

    pub fn slices(&self) -> &[usize] {
        &self.slices
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }

    fn index_of(&self, a: f64) -> Result<usize, TelescopeError> {
        self.crit.iter().position(|&c| c == a).ok_or(TelescopeError::NotCritical(a))
    }

    /// Gap to the previous and next critical values (infinite at the ends).
    fn gaps(&self, i: usize) -> (f64, f64) {
        let below = if i > 0 { self.crit[i] - self.crit[i - 1] } else { f64::INFINITY };
        let above = if i + 1 < self.crit.len() { self.crit[i + 1] - self.crit[i] } else { f64::INFINITY };
        (below, above)
    }
}

/// One node per slice component at its critical value, one edge per
/// cylinder component.
pub fn telescope_to_graph(t: &CombinatorialTelescope) -> LeveledMultigraph {
    let mut offset = Vec::with_capacity(t.slices.len());
    let mut levels = Vec::new();
    for (i, &n) in t.slices.iter().enumerate() {
        offset.push(levels.len());
        levels.extend(std::iter::repeat_n(t.crit[i], n));
    }
    let mut edges = Vec::new();
    for (i, c) in t.cylinders.iter().enumerate() {
        for (&lo, &hi) in c.lower.iter().zip(&c.upper) {
            edges.push((offset[i] + lo, offset[i + 1] + hi));
        }
    }
    LeveledMultigraph::from_sorted_parts(levels, edges)
}

/// Collapses the part of the telescope over `[a, b]` into one slice at
/// `(a + b) / 2` whose components are those of the collapsed part. When no
/// critical value lies in `[a, b]` a slice copying the crossing cylinder is
/// inserted instead.
pub fn merge_op(t: &CombinatorialTelescope, a: f64, b: f64) -> Result<CombinatorialTelescope, TelescopeError> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(TelescopeError::OutOfRange { a, b });
    }
    let mid = merge_value(a, b);
    let inside: Vec<usize> = (0..t.crit.len()).filter(|&i| a <= t.crit[i] && t.crit[i] <= b).collect();
    let n = t.crit.len();

    let Some((&first, &last)) = inside.first().zip(inside.last()) else {
        // No critical value: [a, b] must sit strictly inside some cylinder span.
        let j = (0..n.saturating_sub(1))
            .find(|&j| t.crit[j] < a && b < t.crit[j + 1])
            .ok_or(TelescopeError::OutOfRange { a, b })?;
        let old = &t.cylinders[j];
        let m = old.len();
        let mut crit = t.crit.clone();
        crit.insert(j + 1, mid);
        let mut slices = t.slices.clone();
        slices.insert(j + 1, m);
        let mut cylinders = t.cylinders.clone();
        cylinders[j] = Cylinder { lower: old.lower.clone(), upper: (0..m).collect() };
        cylinders.insert(j + 1, Cylinder { lower: (0..m).collect(), upper: old.upper.clone() });
        return Ok(CombinatorialTelescope { crit, slices, cylinders });
    };

    // Union-find over the slice components X_first..X_last, glued by the
    // cylinders strictly between them. Boundary cylinder segments each hang
    // off one slice component and add no new components.
    let mut offset = Vec::new();
    let mut total = 0;
    for i in first..=last {
        offset.push(total);
        total += t.slices[i];
    }
    let mut uf = UnionFind::new(total);
    for i in first..last {
        let c = &t.cylinders[i];
        for (&lo, &hi) in c.lower.iter().zip(&c.upper) {
            uf.union(offset[i - first] + lo, offset[i + 1 - first] + hi);
        }
    }
    let (labels, count) = uf.labels(&vec![true; total]);
    let collapse = |i: usize, x: usize| labels[offset[i - first] + x].unwrap();

    let mut crit = t.crit[..first].to_vec();
    crit.push(mid);
    crit.extend_from_slice(&t.crit[last + 1..]);
    let mut slices = t.slices[..first].to_vec();
    slices.push(count);
    slices.extend_from_slice(&t.slices[last + 1..]);
    let mut cylinders = t.cylinders[..first.saturating_sub(1)].to_vec();
    if first > 0 {
        let c = &t.cylinders[first - 1];
        cylinders
            .push(Cylinder { lower: c.lower.clone(), upper: c.upper.iter().map(|&x| collapse(first, x)).collect() });
    }
    if last + 1 < n {
        let c = &t.cylinders[last];
        cylinders
            .push(Cylinder { lower: c.lower.iter().map(|&x| collapse(last, x)).collect(), upper: c.upper.clone() });
        cylinders.extend_from_slice(&t.cylinders[last + 1..]);
    }
    Ok(CombinatorialTelescope { crit, slices, cylinders })
}

/// Replaces the slice over `a_i` by two copies over `a_i ± eps` joined by an
/// identity cylinder.
pub fn split_op(t: &CombinatorialTelescope, a_i: f64, eps: f64) -> Result<CombinatorialTelescope, TelescopeError> {
    let i = t.index_of(a_i)?;
    let (below, above) = t.gaps(i);
    if !(eps > 0.0 && eps < below && eps < above) {
        return Err(TelescopeError::InvalidEpsilon { at: a_i, eps });
    }
    let mut crit = t.crit.clone();
    crit[i] = a_i - eps;
    crit.insert(i + 1, a_i + eps);
    let mut slices = t.slices.clone();
    slices.insert(i + 1, t.slices[i]);
    let mut cylinders = t.cylinders.clone();
    cylinders.insert(i, Cylinder::identity(t.slices[i]));
    Ok(CombinatorialTelescope { crit, slices, cylinders })
}

/// Moves critical value `a_i` to `a_i + eps` without touching the
/// components. Any `eps` keeping the value strictly between its neighbours is
/// accepted; this includes every `|eps|` below both gaps.
pub fn shift_op(t: &CombinatorialTelescope, a_i: f64, eps: f64) -> Result<CombinatorialTelescope, TelescopeError> {
    let i = t.index_of(a_i)?;
    let (below, above) = t.gaps(i);
    if !(eps.is_finite() && -below < eps && eps < above) {
        return Err(TelescopeError::InvalidEpsilon { at: a_i, eps });
    }
    let target = a_i + eps;
    let neighbours_ok = (i == 0 || t.crit[i - 1] < target) && (i + 1 == t.crit.len() || target < t.crit[i + 1]);
    if !neighbours_ok {
        return Err(TelescopeError::InvalidEpsilon { at: a_i, eps });
    }
    let mut out = t.clone();
    out.crit[i] = target;
    Ok(out)
}

fn is_bijection(map: &[usize], codomain: usize) -> bool {
    if map.len() != codomain {
        return false;
    }
    let mut hit = vec![false; codomain];
    for &x in map {
        if std::mem::replace(&mut hit[x], true) {
            return false;
        }
    }
    true
}

/// Up-fork: the cylinder below maps bijectively onto the slice. Down-fork:
/// the cylinder above maps bijectively onto it. Missing cylinders at the ends
/// count as empty.
pub fn fork_classify(t: &CombinatorialTelescope, a_i: f64) -> Result<Vec<Fork>, TelescopeError> {
    let i = t.index_of(a_i)?;
    let x = t.slices[i];
    let mut out = Vec::new();
    let below: &[usize] = if i > 0 { &t.cylinders[i - 1].upper } else { &[] };
    if is_bijection(below, x) {
        out.push(Fork::UpFork);
    }
    let above: &[usize] = if i + 1 < t.crit.len() { &t.cylinders[i].lower } else { &[] };
    if is_bijection(above, x) {
        out.push(Fork::DownFork);
    }
    Ok(out)
}

fn check_cover(t: &CombinatorialTelescope, cover: &GomicCover) -> Result<(), TelescopeError> {
    for &c in &t.crit {
        if cover.is_endpoint(c) {
            return Err(TelescopeError::EndpointCollision(c));
        }
    }
    Ok(())
}

fn crits_in(t: &CombinatorialTelescope, cell: &Interval) -> Vec<f64> {
    t.crit.iter().copied().filter(|&c| cell.contains(c)).collect()
}

fn apply(t: &mut CombinatorialTelescope, log: &mut Vec<TelescopeOp>, op: TelescopeOp) -> Result<(), TelescopeError> {
    *t = op.apply(t)?;
    log.push(op);
    Ok(())
}

/// Merge within every cell, split every critical value, push the split copies
/// out of the overlaps, and merge again within every proper part.
pub fn canonicalize(t: &CombinatorialTelescope, cover: &GomicCover) -> Result<CombinatorialTelescope, TelescopeError> {
    canonicalize_logged(t, cover).map(|(t, _)| t)
}

/// [`canonicalize`] together with the sequence of moves it performed.
pub fn canonicalize_logged(
    t: &CombinatorialTelescope,
    cover: &GomicCover,
) -> Result<(CombinatorialTelescope, Vec<TelescopeOp>), TelescopeError> {
    check_cover(t, cover)?;
    if let Some(&c) = t.crit.iter().find(|&&c| !cover.covers(c)) {
        return Err(TelescopeError::Uncovered(c));
    }
    let mut t = t.clone();
    let mut log = Vec::new();
    let propers = cover.proper_parts();
    let overlaps = cover.intersections();
    let endpoints = cover.endpoints();

    // 1. At most one critical value per cell.
    for cell in propers.iter().chain(overlaps.iter()) {
        let cs = crits_in(&t, cell);
        if cs.len() >= 2 {
            apply(&mut t, &mut log, TelescopeOp::Merge { a: cs[0], b: cs[cs.len() - 1] })?;
        }
    }

    // 2. Split each critical value well inside its gap between endpoints.
    for c in t.crit.clone() {
        let a = endpoints.iter().copied().filter(|&e| e < c).fold(f64::NEG_INFINITY, f64::max);
        let b = endpoints.iter().copied().filter(|&e| e > c).fold(f64::INFINITY, f64::min);
        let eps = 0.25 * (c - a).min(b - c);
        apply(&mut t, &mut log, TelescopeOp::Split { at: c, eps })?;
    }

    // 3. In each overlap (b, c) the two copies leave: the down-fork to the
    //    middle of the free segment below b, the up-fork to the middle of the
    //    free segment above c.
    for ov in &overlaps {
        let cs = crits_in(&t, ov);
        if cs.is_empty() {
            continue;
        }
        debug_assert_eq!(cs.len(), 2);
        let (lo, hi) = (cs[0], cs[cs.len() - 1]);
        let prev_end = endpoints.iter().copied().filter(|&e| e < ov.lo).fold(f64::NEG_INFINITY, f64::max);
        let prev_crit = t.crit.iter().copied().filter(|&x| x < lo).fold(f64::NEG_INFINITY, f64::max);
        let target = (prev_end.max(prev_crit) + ov.lo) / 2.0;
        apply(&mut t, &mut log, TelescopeOp::Shift { at: lo, eps: target - lo })?;

        let next_end = endpoints.iter().copied().filter(|&e| e > ov.hi).fold(f64::INFINITY, f64::min);
        let next_crit = t.crit.iter().copied().filter(|&x| x > hi).fold(f64::INFINITY, f64::min);
        let target = (ov.hi + next_end.min(next_crit)) / 2.0;
        apply(&mut t, &mut log, TelescopeOp::Shift { at: hi, eps: target - hi })?;
    }

    // 4. Exactly one critical value in every proper part the support crosses.
    for cell in &propers {
        let cs = crits_in(&t, cell);
        if cs.len() >= 2 {
            apply(&mut t, &mut log, TelescopeOp::Merge { a: cs[0], b: cs[cs.len() - 1] })?;
        } else if cs.is_empty() {
            let m = cell.midpoint();
            let crosses = t.crit.windows(2).zip(&t.cylinders).any(|(w, c)| w[0] < m && m < w[1] && !c.is_empty());
            if crosses {
                apply(&mut t, &mut log, TelescopeOp::Merge { a: m, b: m })?;
            }
        }
    }
    Ok((t, log))
}

/// Component labels of the part of the telescope over an open interval.
struct OverLabels {
    slice: Vec<Vec<Option<usize>>>,
    cyl: Vec<Vec<Option<usize>>>,
    count: usize,
}

fn components_over(t: &CombinatorialTelescope, u: &Interval) -> OverLabels {
    let n = t.crit.len();
    let mut s_off = Vec::with_capacity(n);
    let mut total = 0;
    for &s in &t.slices {
        s_off.push(total);
        total += s;
    }
    let mut c_off = Vec::with_capacity(t.cylinders.len());
    for c in &t.cylinders {
        c_off.push(total);
        total += c.len();
    }
    let mut active = vec![false; total];
    let slice_in: Vec<bool> = t.crit.iter().map(|&c| u.contains(c)).collect();
    for i in 0..n {
        if slice_in[i] {
            active[s_off[i]..s_off[i] + t.slices[i]].fill(true);
        }
    }
    let mut uf = UnionFind::new(total);
    for (i, c) in t.cylinders.iter().enumerate() {
        if !u.meets_open(t.crit[i], t.crit[i + 1]) {
            continue;
        }
        for y in 0..c.len() {
            let me = c_off[i] + y;
            active[me] = true;
            if slice_in[i] {
                uf.union(me, s_off[i] + c.lower[y]);
            }
            if slice_in[i + 1] {
                uf.union(me, s_off[i + 1] + c.upper[y]);
            }
        }
    }
    let (labels, count) = uf.labels(&active);
    OverLabels {
        slice: (0..n).map(|i| labels[s_off[i]..s_off[i] + t.slices[i]].to_vec()).collect(),
        cyl: t.cylinders.iter().enumerate().map(|(i, c)| labels[c_off[i]..c_off[i] + c.len()].to_vec()).collect(),
        count,
    }
}

impl OverLabels {
    /// One participating element per component.
    fn representatives(&self) -> Vec<(bool, usize, usize)> {
        let mut rep: BTreeMap<usize, (bool, usize, usize)> = BTreeMap::new();
        for (i, s) in self.slice.iter().enumerate() {
            for (x, l) in s.iter().enumerate() {
                if let Some(l) = l {
                    rep.entry(*l).or_insert((true, i, x));
                }
            }
        }
        for (i, s) in self.cyl.iter().enumerate() {
            for (y, l) in s.iter().enumerate() {
                if let Some(l) = l {
                    rep.entry(*l).or_insert((false, i, y));
                }
            }
        }
        rep.into_values().collect()
    }

    fn get(&self, (is_slice, i, x): (bool, usize, usize)) -> Option<usize> {
        if is_slice {
            self.slice[i][x]
        } else {
            self.cyl[i][x]
        }
    }
}

/// The MultiNerve Mapper (or Mapper) of the height function on the
/// telescope: nodes are the components over each cover element (placed at
/// the element's midpoint), edges the components over each overlap.
pub fn multinerve_of_telescope(
    t: &CombinatorialTelescope,
    cover: &GomicCover,
    variant: Variant,
) -> Result<LeveledMultigraph, TelescopeError> {
    check_cover(t, cover)?;
    let per_interval: Vec<OverLabels> = cover.intervals().iter().map(|u| components_over(t, u)).collect();
    let mut links = Vec::with_capacity(cover.len().saturating_sub(1));
    for k in 0..cover.len().saturating_sub(1) {
        let over = components_over(t, &cover.intersection(k));
        let pairs = over
            .representatives()
            .into_iter()
            .map(|r| {
                let lo = per_interval[k].get(r).expect("overlap parts lie in the lower element");
                let hi = per_interval[k + 1].get(r).expect("overlap parts lie in the upper element");
                (lo, hi)
            })
            .collect();
        links.push(pairs);
    }
    let counts: Vec<usize> = per_interval.iter().map(|o| o.count).collect();
    Ok(assemble_nerve(cover, &counts, &links, variant))
}

/// File form: components are named by labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopeFile {
    pub crit: Vec<f64>,
    pub slices: Vec<Vec<String>>,
    pub cylinders: Vec<CylinderFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderFile {
    pub labels: Vec<String>,
    pub lower: BTreeMap<String, String>,
    pub upper: BTreeMap<String, String>,
}

impl TelescopeFile {
    pub fn into_telescope(&self) -> Result<CombinatorialTelescope, TelescopeError> {
        let bad = |m: String| TelescopeError::Malformed(m);
        let index = |labels: &[String], name: &str| {
            labels.iter().position(|l| l == name).ok_or_else(|| bad(format!("unknown slice label {name:?}")))
        };
        if self.cylinders.len() != self.crit.len().saturating_sub(1) || self.slices.len() != self.crit.len() {
            return Err(bad("need one slice per critical value and one cylinder per gap".into()));
        }
        let mut cylinders = Vec::with_capacity(self.cylinders.len());
        for (i, c) in self.cylinders.iter().enumerate() {
            let mut cyl = Cylinder::default();
            for y in &c.labels {
                let lo = c.lower.get(y).ok_or_else(|| bad(format!("cylinder label {y:?} has no lower image")))?;
                let hi = c.upper.get(y).ok_or_else(|| bad(format!("cylinder label {y:?} has no upper image")))?;
                cyl.lower.push(index(&self.slices[i], lo)?);
                cyl.upper.push(index(&self.slices[i + 1], hi)?);
            }
            cylinders.push(cyl);
        }
        CombinatorialTelescope::new(self.crit.clone(), self.slices.iter().map(|s| s.len()).collect(), cylinders)
    }

    /// Writes generated labels `x<i>_<k>` and `y<i>_<k>`.
    pub fn from_telescope(t: &CombinatorialTelescope) -> Self {
        let slice_label = |i: usize, k: usize| format!("x{i}_{k}");
        TelescopeFile {
            crit: t.crit.clone(),
            slices: t.slices.iter().enumerate().map(|(i, &n)| (0..n).map(|k| slice_label(i, k)).collect()).collect(),
            cylinders: t
                .cylinders
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let labels: Vec<String> = (0..c.len()).map(|k| format!("y{i}_{k}")).collect();
                    CylinderFile {
                        lower: labels.iter().zip(&c.lower).map(|(l, &x)| (l.clone(), slice_label(i, x))).collect(),
                        upper: labels.iter().zip(&c.upper).map(|(l, &x)| (l.clone(), slice_label(i + 1, x))).collect(),
                        labels,
                    }
                })
                .collect(),
        }
    }
}
