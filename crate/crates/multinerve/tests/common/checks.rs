//! Randomized checks relating telescope moves, Mappers and diagrams. Each
//! returns `Err` with a description on a counterexample.

use multinerve::covers::GomicCover;
use multinerve::diagram::{prune_signature, DiagramPoint, ExtendedDiagram, PointKind, Variant};
use multinerve::reeb::{leveled_isomorphic, quotient_diagram};
use multinerve::telescope::{
    canonicalize, canonicalize_logged, fork_classify, merge_op, multinerve_of_telescope, telescope_to_graph,
    CombinatorialTelescope, Fork, TelescopeOp,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_cover, random_telescope};

pub fn diagram_of(t: &CombinatorialTelescope) -> ExtendedDiagram {
    quotient_diagram(&telescope_to_graph(t))
}

fn gaps(t: &CombinatorialTelescope, i: usize) -> (f64, f64) {
    let c = t.crit();
    let below = if i > 0 { c[i] - c[i - 1] } else { f64::INFINITY };
    let above = if i + 1 < c.len() { c[i + 1] - c[i] } else { f64::INFINITY };
    (below, above)
}

/// A random legal move on `t`.
pub fn random_op(rng: &mut ChaCha8Rng, t: &CombinatorialTelescope) -> TelescopeOp {
    let c = t.crit();
    let n = c.len();
    loop {
        match rng.gen_range(0..3) {
            0 => {
                if n >= 2 && rng.gen_bool(0.25) {
                    // Strictly inside one cylinder span.
                    let j = rng.gen_range(0..n - 1);
                    let mut ab = [rng.gen_range(c[j]..c[j + 1]), rng.gen_range(c[j]..c[j + 1])];
                    ab.sort_by(f64::total_cmp);
                    if c[j] < ab[0] {
                        return TelescopeOp::Merge { a: ab[0], b: ab[1] };
                    }
                    continue;
                }
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(i..n);
                let (below, _) = gaps(t, i);
                let (_, above) = gaps(t, j);
                let a = c[i] - rng.gen_range(0.0..1.0) * below.min(1.0);
                let b = c[j] + rng.gen_range(0.0..1.0) * above.min(1.0);
                if (i == 0 || a > c[i - 1]) && (j + 1 == n || b < c[j + 1]) {
                    return TelescopeOp::Merge { a, b };
                }
            }
            1 => {
                let i = rng.gen_range(0..n);
                let (below, above) = gaps(t, i);
                let eps = rng.gen_range(0.0..1.0) * below.min(above).min(1.0);
                if eps > 0.0 {
                    return TelescopeOp::Split { at: c[i], eps };
                }
            }
            _ => {
                let i = rng.gen_range(0..n);
                let (below, above) = gaps(t, i);
                let eps = rng.gen_range(-below.min(1.0)..above.min(1.0));
                if -below < eps && eps < above {
                    return TelescopeOp::Shift { at: c[i], eps };
                }
            }
        }
    }
}

fn drop_collapsed_loops(d: &ExtendedDiagram) -> ExtendedDiagram {
    d.filter(|p| !(p.kind == PointKind::ExtPlus && p.dim == 1 && p.birth == p.death))
}

/// The graph-level diagram after a move equals the transformed diagram.
pub fn transform_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let t = random_telescope(rng, 6);
    let op = random_op(rng, &t);
    let after = op.apply(&t).map_err(|e| format!("{op:?} on {t:?}: {e}"))?;
    let lhs = diagram_of(&after);
    let rhs = op.transform(&diagram_of(&t)).map_err(|e| format!("{op:?}: {e}"))?;
    let rhs = match op {
        TelescopeOp::Merge { .. } => drop_collapsed_loops(&rhs),
        _ => rhs,
    };
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("{op:?} on {t:?}: graph {lhs:?} vs transform {rhs:?}"))
    }
}

/// Which precondition of the invariance statement a case exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariance {
    MergeInCell,
    SplitBetweenEndpoints,
    ShiftUpFork,
    ShiftDownFork,
}

fn random_pair(rng: &mut ChaCha8Rng, t: &CombinatorialTelescope) -> GomicCover {
    let c = t.crit();
    random_cover(rng, c[0], c[c.len() - 1], 5, c)
}

/// Neighbouring endpoints of `x`: the largest below and the smallest above.
fn bracket(ends: &[f64], x: f64) -> (f64, f64) {
    let lo = ends.iter().copied().filter(|&e| e < x).fold(f64::NEG_INFINITY, f64::max);
    let hi = ends.iter().copied().filter(|&e| e > x).fold(f64::INFINITY, f64::min);
    (lo, hi)
}

/// Tries to build one case; `None` when the random draw misses the precondition.
pub fn invariance_case(
    rng: &mut ChaCha8Rng,
    which: Invariance,
) -> Option<(CombinatorialTelescope, GomicCover, TelescopeOp)> {
    let t = random_telescope(rng, 6);
    let cover = random_pair(rng, &t);
    let c = t.crit().to_vec();
    let n = c.len();
    let ends = cover.endpoints();
    let overlaps = cover.intersections();
    let op = match which {
        Invariance::MergeInCell => {
            let cells: Vec<_> = cover.proper_parts().into_iter().chain(overlaps.iter().copied()).collect();
            let cell = cells[rng.gen_range(0..cells.len())];
            let (lo, hi) = (cell.lo.max(c[0] - 1.0), cell.hi.min(c[n - 1] + 1.0));
            let inside: Vec<f64> = c.iter().copied().filter(|&x| cell.contains(x)).collect();
            let (a, b) = if !inside.is_empty() && rng.gen_bool(0.7) {
                (inside[0], inside[inside.len() - 1])
            } else {
                let mut ab = [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
                ab.sort_by(f64::total_cmp);
                (ab[0], ab[1])
            };
            if !(cell.contains(a) && cell.contains(b)) || merge_op(&t, a, b).is_err() {
                return None;
            }
            TelescopeOp::Merge { a, b }
        }
        Invariance::SplitBetweenEndpoints => {
            let i = rng.gen_range(0..n);
            let (a, b) = bracket(&ends, c[i]);
            let ok = (i == 0 || c[i - 1] < a) && (i + 1 == n || b < c[i + 1]);
            if !ok {
                return None;
            }
            let eps = rng.gen_range(0.0..1.0) * (c[i] - a).min(b - c[i]);
            if eps <= 0.0 {
                return None;
            }
            TelescopeOp::Split { at: c[i], eps }
        }
        Invariance::ShiftUpFork => {
            let i = rng.gen_range(0..n);
            let ov = overlaps.iter().find(|o| o.contains(c[i]))?;
            if !fork_classify(&t, c[i]).ok()?.contains(&Fork::UpFork) {
                return None;
            }
            let (_, d) = bracket(&ends, ov.hi);
            let next = if i + 1 < n { c[i + 1] } else { f64::INFINITY };
            let (lo, hi) = (ov.hi - c[i], d.min(next) - c[i]);
            if lo >= hi || !hi.is_finite() {
                return None;
            }
            let eps = rng.gen_range(lo..hi);
            if eps <= lo {
                return None;
            }
            TelescopeOp::Shift { at: c[i], eps }
        }
        Invariance::ShiftDownFork => {
            let i = rng.gen_range(0..n);
            let ov = overlaps.iter().find(|o| o.contains(c[i]))?;
            if !fork_classify(&t, c[i]).ok()?.contains(&Fork::DownFork) {
                return None;
            }
            let (a, _) = bracket(&ends, ov.lo);
            let prev = if i > 0 { c[i - 1] } else { f64::NEG_INFINITY };
            let (lo, hi) = (a.max(prev) - c[i], ov.lo - c[i]);
            if lo >= hi || !lo.is_finite() {
                return None;
            }
            let eps = rng.gen_range(lo..hi);
            if eps <= lo {
                return None;
            }
            TelescopeOp::Shift { at: c[i], eps }
        }
    };
    Some((t, cover, op))
}

pub fn check_invariance(t: &CombinatorialTelescope, cover: &GomicCover, op: TelescopeOp) -> Result<(), String> {
    let after = op.apply(t).map_err(|e| format!("{op:?}: {e}"))?;
    let before = multinerve_of_telescope(t, cover, Variant::MultiNerve).map_err(|e| e.to_string())?;
    let later = multinerve_of_telescope(&after, cover, Variant::MultiNerve).map_err(|e| e.to_string())?;
    if leveled_isomorphic(&before, &later) {
        Ok(())
    } else {
        Err(format!("{op:?} on {t:?} with cover {cover}: {before:?} vs {later:?}"))
    }
}

/// A random telescope with a cover whose endpoints avoid its critical values.
pub fn structure_instance(rng: &mut ChaCha8Rng) -> (CombinatorialTelescope, GomicCover) {
    let t = random_telescope(rng, 7);
    let cover = random_pair(rng, &t);
    (t, cover)
}

pub fn check_structure(t: &CombinatorialTelescope, cover: &GomicCover) -> Result<(), String> {
    let mn = multinerve_of_telescope(t, cover, Variant::MultiNerve).map_err(|e| e.to_string())?;
    let canon = canonicalize(t, cover).map_err(|e| e.to_string())?;
    let g = telescope_to_graph(&canon);
    if leveled_isomorphic(&mn, &g) {
        Ok(())
    } else {
        Err(format!("{t:?} with cover {cover}: MultiNerve {mn:?} vs canonical {g:?}"))
    }
}

/// Follows every point of the original diagram through the logged moves.
/// The points that survive (and are not collapsed loops) must be exactly the
/// MultiNerve signature, and their images exactly the canonical telescope's
/// diagram.
pub fn check_matching(t: &CombinatorialTelescope, cover: &GomicCover) -> Result<(), String> {
    let d0 = diagram_of(t);
    let (canon, log) = canonicalize_logged(t, cover).map_err(|e| e.to_string())?;
    let mut current = d0.clone();
    let mut tracked: Vec<Option<DiagramPoint>> = d0.points().iter().map(|p| Some(*p)).collect();
    // A loop collapsed by a Merge is gone from the graph at once, so it is
    // dropped right after that move.
    let settle = |op: &TelescopeOp, d: ExtendedDiagram| match op {
        TelescopeOp::Merge { .. } => drop_collapsed_loops(&d),
        _ => d,
    };
    for op in &log {
        current = settle(op, op.transform(&current).map_err(|e| format!("{op:?}: {e}"))?);
        for slot in tracked.iter_mut() {
            if let Some(p) = *slot {
                let moved = op.transform(&ExtendedDiagram::new(vec![p])).map_err(|e| e.to_string())?;
                *slot = settle(op, moved).points().first().copied();
            }
        }
    }
    let mut survivors = Vec::new();
    let mut images = Vec::new();
    for (orig, img) in d0.points().iter().zip(&tracked) {
        if let Some(img) = img {
            survivors.push(*orig);
            images.push(*img);
        }
    }
    let survivors = ExtendedDiagram::new(survivors);
    let images = ExtendedDiagram::new(images);
    let signature = prune_signature(&d0, cover, Variant::MultiNerve).map_err(|e| e.to_string())?;
    if survivors != signature {
        return Err(format!("{t:?} with cover {cover}: surviving {survivors:?} vs signature {signature:?}"));
    }
    let canonical = diagram_of(&canon);
    if images != canonical || current != canonical {
        return Err(format!("{t:?} with cover {cover}: images {images:?} vs canonical {canonical:?}"));
    }
    Ok(())
}
