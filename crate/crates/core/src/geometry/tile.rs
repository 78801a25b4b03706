//! Double counting of box measure under rational rescaling.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::aabb::Aabb;
use super::union::BoxUnion;
use crate::error::{check_dim, Error, Result};
use crate::rational::{serde_q, serde_qvec, Q};

/// Largest number of translates a tiling check will materialize.
pub const MAX_TILES: usize = 1 << 16;

#[derive(Clone, Debug, Serialize)]
pub struct TileReport {
    /// The base box moved to the origin.
    pub base: Aabb,
    #[serde(with = "serde_qvec")]
    pub q: Vec<Q>,
    /// `I_q = [0, q_1 a_1) x ... x [0, q_d a_d)`.
    pub scaled: Aabb,
    /// Common refinement cell `[0, a_1/den_1) x ...`.
    pub cell: Aabb,
    /// Number of cell translates tiling `scaled`.
    pub count: usize,
    /// Number of cell translates tiling the base box.
    pub base_count: usize,
    #[serde(with = "serde_q")]
    pub scaled_measure: Q,
    #[serde(with = "serde_q")]
    pub cell_measure: Q,
    /// `count * cell_measure`.
    #[serde(with = "serde_q")]
    pub counted_measure: Q,
    /// `prod(q) * lambda(base)`.
    #[serde(with = "serde_q")]
    pub scaled_by_ratio: Q,
    pub translates_disjoint: bool,
    pub translates_cover_exactly: bool,
    pub holds: bool,
}

/// Tiles `I_q` by translates of a common refinement of the base box and checks
/// `lambda(I_q) = count * lambda(cell) = prod(q) * lambda(base)` exactly.
pub fn tile_check(base: &Aabb, q: &[Q]) -> Result<TileReport> {
    check_dim(base.dim(), q.len())?;
    if !base.is_solid() {
        return Err(Error::precondition("base box must be bounded with nonempty interior"));
    }
    if let Some(bad) = q.iter().find(|x| !x.is_positive()) {
        return Err(Error::precondition(format!("scale factors must be positive, got {bad}")));
    }
    let d = base.dim();
    let sides = base.sides()?;
    let origin = vec![Q::zero(); d];

    let mut cell_sides = Vec::with_capacity(d);
    let mut per_axis = Vec::with_capacity(d);
    let mut count: usize = 1;
    let mut base_count: usize = 1;
    for (a, qi) in sides.iter().zip(q) {
        let num = qi.numer().to_usize().unwrap_or(usize::MAX);
        let den = qi.denom().to_usize().unwrap_or(usize::MAX);
        count = count.saturating_mul(num);
        base_count = base_count.saturating_mul(den);
        cell_sides.push(a / Q::from_integer(qi.denom().clone()));
        per_axis.push(num);
    }
    if count > MAX_TILES {
        return Err(Error::Budget(format!("{count} translates exceed the tiling cap {MAX_TILES}")));
    }

    let scaled = Aabb::from_q(
        origin.clone(),
        sides.iter().zip(q).map(|(a, s)| a * s).collect(),
    )?;
    let cell = Aabb::from_q(origin, cell_sides.clone())?;

    // enumerate the grid of translates in lexicographic order
    let mut tiles = Vec::with_capacity(count);
    let mut idx = vec![0usize; d];
    'grid: loop {
        let t: Vec<Q> = idx
            .iter()
            .zip(&cell_sides)
            .map(|(&k, s)| s * Q::from_integer(k.into()))
            .collect();
        tiles.push(cell.translate(&t)?);
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < per_axis[axis] {
                continue 'grid;
            }
            idx[axis] = 0;
        }
        break;
    }

    let union = BoxUnion::from_boxes(d, &tiles)?;
    let cell_measure = cell.volume()?;
    let counted_measure = &cell_measure * Q::from_integer(count.into());
    let union_measure = union.measure()?;
    let scaled_measure = scaled.volume()?;
    let ratio = q.iter().fold(Q::one(), |acc, x| acc * x);
    let scaled_by_ratio = ratio * base.volume()?;

    // finitely many half-open boxes are disjoint iff their volumes add up
    let translates_disjoint = union_measure == counted_measure;
    let translates_cover_exactly = union == BoxUnion::from_box(&scaled);
    let base_ok = &cell_measure * Q::from_integer(base_count.into()) == base.volume()?;
    let holds = translates_disjoint
        && translates_cover_exactly
        && base_ok
        && scaled_measure == counted_measure
        && scaled_measure == scaled_by_ratio;

    Ok(TileReport {
        base: base.translate(&base.lo.iter().map(|b| -b.finite().unwrap()).collect::<Vec<_>>())?,
        q: q.to_vec(),
        scaled,
        cell,
        count,
        base_count,
        scaled_measure,
        cell_measure,
        counted_measure,
        scaled_by_ratio,
        translates_disjoint,
        translates_cover_exactly,
        holds,
    })
}
