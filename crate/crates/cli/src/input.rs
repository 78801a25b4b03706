//! Parsing of flag values and input files.

use std::path::Path;

use serde_json::Value;
use transmeasure::geometry::{Aabb, Bound};
use transmeasure::rational::parse_q;
use transmeasure::ring::RingExpr;

use crate::Failure;

fn parse_bound(s: &str) -> Result<Bound, Failure> {
    match s.trim() {
        "inf" | "+inf" => Ok(Bound::PosInf),
        "-inf" => Ok(Bound::NegInf),
        other => Ok(Bound::Finite(parse_q(other)?)),
    }
}

/// `lo1,lo2,...:hi1,hi2,...`; `inf` and `-inf` allowed.
pub fn parse_box(s: &str, d: usize) -> Result<Aabb, Failure> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Failure::usage(format!("box {s:?} should look like lo1,lo2:hi1,hi2")))?;
    let lo: Vec<Bound> = lo.split(',').map(parse_bound).collect::<Result<_, _>>()?;
    let hi: Vec<Bound> = hi.split(',').map(parse_bound).collect::<Result<_, _>>()?;
    if lo.len() != d || hi.len() != d {
        return Err(Failure::usage(format!("box {s:?} is not {d}-dimensional")));
    }
    Ok(Aabb::new(lo, hi)?)
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// A single expression or an array of them.
pub fn read_exprs(path: &Path, d: usize) -> Result<Vec<RingExpr>, Failure> {
    let v = read_json(path)?;
    let exprs: Vec<RingExpr> = if v.is_array() {
        serde_json::from_value(v)?
    } else {
        vec![serde_json::from_value(v)?]
    };
    for e in &exprs {
        e.validate(d)?;
    }
    Ok(exprs)
}

pub fn read_single_expr(path: &Path, d: usize) -> Result<RingExpr, Failure> {
    let mut v = read_exprs(path, d)?;
    if v.len() != 1 {
        return Err(Failure::usage("expected exactly one expression"));
    }
    Ok(v.remove(0))
}
