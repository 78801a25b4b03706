//! Covering a small cube by translates of cubes of total volume at least one.
//!
//! Sides are rounded down to powers of two, equal dyadic cubes are merged
//! `2^d` at a time into the next size, and a merged cube of side at least
//! `1/2` is unfolded back into translates of the original cubes.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, BoxUnion};
use crate::rational::{floor_log2, pow2, pow_q, q, serde_q, serde_qvec, Q};

/// `k` with `2^k <= side < 2^(k+1)`, and `2^k` itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicSide {
    pub k: i64,
    #[serde(with = "serde_q")]
    pub side: Q,
}

pub fn round_to_dyadic(sides: &[Q]) -> Result<Vec<DyadicSide>> {
    sides
        .iter()
        .map(|a| {
            if *a <= Q::zero() {
                return Err(Error::precondition("cube sides must be positive"));
            }
            let k = floor_log2(a);
            Ok(DyadicSide { k, side: pow2(k) })
        })
        .collect()
}

/// One merge: `2^d` cubes of side `2^level` become a cube of side
/// `2^(level+1)`. `offsets[i]` is where constituent `i` sits inside the new
/// cube; the offset bits follow the constituent index, first axis most
/// significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeStep {
    pub level: i64,
    pub constituents: Vec<usize>,
    pub result: usize,
    pub offsets: Vec<Offset>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Offset(#[serde(with = "serde_qvec")] pub Vec<Q>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeOutcome {
    /// `(id, level)` of the cubes left after merging; ids below the input
    /// count are inputs, later ids are merge results in creation order.
    pub final_family: Vec<(usize, i64)>,
    pub steps: Vec<MergeStep>,
}

fn sub_offset(i: usize, d: usize, side: &Q) -> Vec<Q> {
    (0..d)
        .map(|c| if (i >> (d - 1 - c)) & 1 == 1 { side.clone() } else { Q::zero() })
        .collect()
}

/// Merges until no level holds `2^d` cubes, always taking the `2^d`
/// lowest-id cubes of the smallest eligible level.
pub fn merge(d: usize, levels: &[i64]) -> MergeOutcome {
    let group = 1usize << d;
    let mut active: Vec<(usize, i64)> = levels.iter().copied().enumerate().collect();
    let mut next_id = levels.len();
    let mut steps = Vec::new();
    loop {
        let mut counts: std::collections::BTreeMap<i64, usize> = Default::default();
        for (_, k) in &active {
            *counts.entry(*k).or_default() += 1;
        }
        let Some((&level, _)) = counts.iter().find(|(_, &c)| c >= group) else {
            break;
        };
        let mut picked: Vec<usize> =
            active.iter().filter(|(_, k)| *k == level).map(|(id, _)| *id).collect();
        picked.sort_unstable();
        picked.truncate(group);
        active.retain(|(id, _)| !picked.contains(id));
        let side = pow2(level);
        let offsets = (0..group).map(|i| Offset(sub_offset(i, d, &side))).collect();
        steps.push(MergeStep { level, constituents: picked, result: next_id, offsets });
        active.push((next_id, level + 1));
        next_id += 1;
    }
    MergeOutcome { final_family: active, steps }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub j: usize,
    #[serde(with = "serde_qvec")]
    pub t: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingLayout {
    pub d: usize,
    #[serde(with = "serde_q")]
    pub alpha: Q,
    /// `sum (a_j / alpha)^d`.
    #[serde(with = "serde_q")]
    pub volume: Q,
    pub rounding: Vec<DyadicSide>,
    pub final_family: Vec<(usize, i64)>,
    /// Merged cube that was unfolded.
    pub chosen: usize,
    pub placements: Vec<Placement>,
    pub target: Aabb,
    pub merge_tree: Vec<MergeStep>,
    pub verified: bool,
}

/// Covers `[0, alpha * target_side]^d` by translates of the cubes
/// `[0, a_j]^d`, each used at most once.
///
/// Needs `sum (a_j / alpha)^d >= 1` and `0 < target_side <= 1/2`. With the
/// rescaled sides, if every merged cube were smaller than `1/2` there would be
/// at most `2^d - 1` cubes of each side `2^-k`, `k >= 2`, and the total volume
/// would stay below `2^-d`; rounding loses at most a factor `2^d`, so the
/// original volume would be below one.
pub fn pack_cover(sides: &[Q], d: usize, target_side: &Q, alpha: &Q) -> Result<PackingLayout> {
    if d == 0 {
        return Err(Error::precondition("dimension must be positive"));
    }
    if *alpha <= Q::zero() {
        return Err(Error::precondition("scale must be positive"));
    }
    if *target_side <= Q::zero() || *target_side > q(1, 2) {
        return Err(Error::precondition("target side must lie in (0, 1/2]"));
    }
    let scaled: Vec<Q> = sides.iter().map(|a| a / alpha).collect();
    let rounding = round_to_dyadic(&scaled)?;
    let volume = scaled.iter().fold(Q::zero(), |acc, b| acc + pow_q(b, d as u32));
    if volume < Q::one() {
        return Err(Error::precondition(format!(
            "total rescaled volume {} is below 1",
            crate::rational::format_q(&volume)
        )));
    }
    let rounded: Q = rounding.iter().fold(Q::zero(), |acc, r| acc + pow_q(&r.side, d as u32));
    if rounded * pow2(d as i64) < volume {
        return Err(Error::Internal("dyadic rounding lost more than 2^d".into()));
    }

    let levels: Vec<i64> = rounding.iter().map(|r| r.k).collect();
    let outcome = merge(d, &levels);
    let chosen = outcome
        .final_family
        .iter()
        .filter(|(_, k)| pow2(*k) >= *target_side)
        .min_by(|(ia, ka), (ib, kb)| ka.cmp(kb).then(ia.cmp(ib)))
        .map(|(id, _)| *id)
        .ok_or_else(|| Error::Internal("no merged cube reaches the target side".into()))?;

    let n = sides.len();
    let level_of = |id: usize| -> i64 {
        if id < n {
            levels[id]
        } else {
            outcome.steps[id - n].level + 1
        }
    };
    let target_scaled = Aabb::cube(&vec![Q::zero(); d], target_side);
    let mut placements = Vec::new();
    let mut stack = vec![(chosen, vec![Q::zero(); d])];
    while let Some((id, at)) = stack.pop() {
        if id < n {
            placements.push(Placement { j: id, t: at.iter().map(|x| x * alpha).collect() });
            continue;
        }
        let step = &outcome.steps[id - n];
        for (c, off) in step.constituents.iter().zip(&step.offsets).rev() {
            let pos: Vec<Q> = at.iter().zip(&off.0).map(|(a, o)| a + o).collect();
            let cell = Aabb::cube(&pos, &pow2(level_of(*c)));
            if !cell.intersect(&target_scaled)?.is_empty() {
                stack.push((*c, pos));
            }
        }
    }
    placements.sort_by_key(|p| p.j);

    let target = Aabb::cube(&vec![Q::zero(); d], &(alpha * target_side));
    let mut layout = PackingLayout {
        d,
        alpha: alpha.clone(),
        volume,
        rounding,
        final_family: outcome.final_family,
        chosen,
        placements,
        target,
        merge_tree: outcome.steps,
        verified: false,
    };
    layout.verified = layout.verify(sides)?;
    if !layout.verified {
        return Err(Error::Internal("packing layout failed its coverage check".into()));
    }
    Ok(layout)
}

impl PackingLayout {
    /// Each input used at most once, and the translated cubes cover the
    /// target exactly.
    pub fn verify(&self, sides: &[Q]) -> Result<bool> {
        let mut used = vec![false; sides.len()];
        let mut cubes = Vec::with_capacity(self.placements.len());
        for p in &self.placements {
            if p.j >= sides.len() || used[p.j] || p.t.len() != self.d {
                return Ok(false);
            }
            used[p.j] = true;
            cubes.push(Aabb::cube(&p.t, &sides[p.j]));
        }
        let cover = BoxUnion::from_boxes(self.d, &cubes)?;
        BoxUnion::from_box(&self.target).is_subset_of(&cover)
    }
}
