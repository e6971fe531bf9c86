//! Pareto dominance, fast non-dominated sorting, crowding distance and
//! crowding-based truncation selection.
//!
//! These operators are shared verbatim by the surrogate optimizer's two
//! selection stages and by the NSGA-II baseline, so their behavior on
//! duplicate points is pinned down precisely: exact duplicates beyond the
//! first occurrence get crowding distance zero and are therefore the first
//! to be truncated.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::types::ObjectiveVector;

/// Strict Pareto dominance for minimization: `a` dominates `b` when it is no
/// worse in every objective and strictly better in at least one.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "dominance comparison",
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(matches!(pair_dominance(a, b), Some(Ordering::Less)))
}

/// `Some(Less)` when a dominates b, `Some(Greater)` when b dominates a,
/// `None` when neither (including exact ties).
fn pair_dominance(a: &[f64], b: &[f64]) -> Option<Ordering> {
    let mut a_better = false;
    let mut b_better = false;
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            a_better = true;
        } else if y < x {
            b_better = true;
        }
        if a_better && b_better {
            return None;
        }
    }
    match (a_better, b_better) {
        (true, false) => Some(Ordering::Less),
        (false, true) => Some(Ordering::Greater),
        _ => None,
    }
}

/// Result of a non-dominated sort: fronts as index lists in rank order, plus
/// per-individual rank and crowding distance.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedFronts {
    /// `fronts[0]` is the non-dominated set; indices refer to the input.
    pub fronts: Vec<Vec<usize>>,
    /// `rank[i]` is the front index of input `i`.
    pub rank: Vec<usize>,
    /// NSGA-II crowding distance of input `i` within its front.
    pub crowding: Vec<f64>,
}

/// Partitions a set of objective vectors into non-domination fronts and
/// assigns crowding distances.
///
/// All vectors must be non-empty, finite and of equal length. Crowding
/// follows the usual boundary-gets-infinity rule per objective, with two
/// refinements that make truncation deterministic and duplicate-averse:
/// objectives with zero range across a front contribute nothing, and exact
/// duplicates of an earlier point in the same front receive distance zero
/// (only the first occurrence carries the computed value).
pub fn non_dominated_sort(objs: &[ObjectiveVector]) -> Result<SortedFronts> {
    if objs.is_empty() {
        return Err(Error::EmptySet {
            what: "objective set for non-dominated sort".to_string(),
        });
    }
    let m = objs[0].len();
    if m == 0 {
        return Err(Error::EmptySet {
            what: "objective vector".to_string(),
        });
    }
    for o in objs {
        if o.len() != m {
            return Err(Error::DimensionMismatch {
                context: "non-dominated sort",
                expected: m,
                got: o.len(),
            });
        }
        if o.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "objectives",
                message: "non-finite objective value in sort input".to_string(),
            });
        }
    }

    let n = objs.len();
    let mut dominated_by: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut dom_count = vec![0u32; n];
    for i in 0..n {
        for j in (i + 1)..n {
            match pair_dominance(&objs[i], &objs[j]) {
                Some(Ordering::Less) => {
                    dominated_by[i].push(j as u32);
                    dom_count[j] += 1;
                }
                Some(Ordering::Greater) => {
                    dominated_by[j].push(i as u32);
                    dom_count[i] += 1;
                }
                _ => {}
            }
        }
    }

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut rank = vec![usize::MAX; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dom_count[i] == 0).collect();
    while !current.is_empty() {
        let level = fronts.len();
        for &i in &current {
            rank[i] = level;
        }
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                let j = j as usize;
                dom_count[j] -= 1;
                if dom_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }

    let mut crowding = vec![0.0; n];
    for front in &fronts {
        assign_crowding(objs, front, &mut crowding);
    }

    Ok(SortedFronts {
        fronts,
        rank,
        crowding,
    })
}

/// Crowding distances for one front, written into `out` at the front's
/// member indices.
fn assign_crowding(objs: &[ObjectiveVector], front: &[usize], out: &mut [f64]) {
    let m = objs[front[0]].len();
    // Group exact duplicates via a lexicographic sort; the smallest input
    // index in each run of equal vectors is its first occurrence and becomes
    // the group representative, everyone else gets zero.
    let mut lex = front.to_vec();
    lex.sort_by(|&a, &b| {
        for k in 0..m {
            match objs[a][k].total_cmp(&objs[b][k]) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        a.cmp(&b)
    });
    let mut reps: Vec<usize> = Vec::with_capacity(front.len());
    let mut start = 0;
    while start < lex.len() {
        let mut end = start + 1;
        while end < lex.len()
            && (0..m).all(|k| objs[lex[end]][k].total_cmp(&objs[lex[start]][k]).is_eq())
        {
            out[lex[end]] = 0.0;
            end += 1;
        }
        reps.push(lex[start]);
        start = end;
    }

    if reps.len() == 1 {
        out[reps[0]] = f64::INFINITY;
        return;
    }

    let mut boundary = vec![false; reps.len()];
    let mut sum = vec![0.0; reps.len()];
    let mut order: Vec<usize> = (0..reps.len()).collect();
    for k in 0..m {
        order.sort_by(|&p, &q| {
            objs[reps[p]][k]
                .total_cmp(&objs[reps[q]][k])
                .then(reps[p].cmp(&reps[q]))
        });
        let lo = objs[reps[order[0]]][k];
        let hi = objs[reps[*order.last().unwrap()]][k];
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        boundary[order[0]] = true;
        boundary[*order.last().unwrap()] = true;
        for w in 0..order.len() {
            if w == 0 || w == order.len() - 1 {
                continue;
            }
            let below = objs[reps[order[w - 1]]][k];
            let above = objs[reps[order[w + 1]]][k];
            sum[order[w]] += (above - below) / range;
        }
    }
    for (slot, &rep) in reps.iter().enumerate() {
        out[rep] = if boundary[slot] {
            f64::INFINITY
        } else {
            sum[slot]
        };
    }
}

/// Selects `n` indices by non-domination rank, breaking the final partial
/// front by descending crowding distance (ties by ascending input index).
///
/// Whole fronts are admitted in rank order; the output is therefore a
/// superset of the first front whenever that front fits.
pub fn select_best(objs: &[ObjectiveVector], n: usize) -> Result<Vec<usize>> {
    if n == 0 || n > objs.len() {
        return Err(Error::InvalidParameter {
            name: "n",
            message: format!("selection size {n} must be in 1..={}", objs.len()),
        });
    }
    let sorted = non_dominated_sort(objs)?;
    let mut picked = Vec::with_capacity(n);
    for front in &sorted.fronts {
        if picked.len() + front.len() <= n {
            picked.extend_from_slice(front);
            if picked.len() == n {
                break;
            }
        } else {
            let mut by_crowd = front.clone();
            by_crowd.sort_by(|&i, &j| {
                sorted.crowding[j]
                    .total_cmp(&sorted.crowding[i])
                    .then(i.cmp(&j))
            });
            picked.extend_from_slice(&by_crowd[..n - picked.len()]);
            break;
        }
    }
    Ok(picked)
}
