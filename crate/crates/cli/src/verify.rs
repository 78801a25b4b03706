//! `--verify`: re-checks a saved report using only its serialized data.

use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use transmeasure::cantor::CantorSchedule;
use transmeasure::cover::{grid_pool, stage_robust, verify_cover, CoverTarget, UncoveredWitness};
use transmeasure::geometry::{tile_check, Aabb, BoxUnion, ExtendedRational};
use transmeasure::hausdorff::{range_bounds_at, Cube, Gauge};
use transmeasure::packing::PackingLayout;
use transmeasure::rational::{format_q, parse_q, pow2, pow_q, q, qi, Q};
use transmeasure::ring::{MeasureBounds, RingExpr};

use crate::Failure;

type Checks = Vec<(String, bool)>;

fn bad(msg: impl Into<String>) -> Failure {
    Failure::usage(format!("malformed report: {}", msg.into()))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key).ok_or_else(|| bad(format!("missing field {key:?}")))
}

fn get<T: DeserializeOwned>(v: &Value, key: &str) -> Result<T, Failure> {
    serde_json::from_value(field(v, key)?.clone()).map_err(|e| bad(format!("{key}: {e}")))
}

fn get_q(v: &Value, key: &str) -> Result<Q, Failure> {
    let s = field(v, key)?.as_str().ok_or_else(|| bad(format!("{key} is not a string")))?;
    Ok(parse_q(s)?)
}

fn get_qs(v: &Value, key: &str) -> Result<Vec<Q>, Failure> {
    let xs: Vec<String> = get(v, key)?;
    xs.iter().map(|x| parse_q(x).map_err(Failure::from)).collect()
}

fn schedule(config: &Value) -> Result<CantorSchedule, Failure> {
    let d: usize = get(config, "d")?;
    let bits: u32 = get(config, "max_stage_bits")?;
    Ok(CantorSchedule::new(d, get_q(config, "c")?, get_q(config, "rho")?)?.with_max_stage_bits(bits))
}

/// Returns the verification document and whether every check passed.
pub fn replay(path: &Path) -> Result<(Value, bool), Failure> {
    let text = std::fs::read_to_string(path)?;
    let report: Value = serde_json::from_str(&text)?;
    let command: String = get(&report, "command")?;
    let config = field(&report, "config")?;
    let s = schedule(config)?;
    let stage_cap: u32 = get(config, "stage_cap")?;
    let tol = get_q(config, "tol")?;
    let input = field(&report, "input")?;

    let mut checks: Checks = Vec::new();
    if report.get("error").is_some() {
        checks.push(("error report carries no certificates".into(), true));
    } else {
        let result = field(&report, "result")?;
        match command.as_str() {
            "cantor-info" => cantor_info(&s, input, result, stage_cap, &mut checks)?,
            "measure" => measure(&s, input, result, &mut checks)?,
            "split-check" => split_check(&s, input, result, &mut checks)?,
            "rn-enumerate" => rn_enumerate(&s, input, result, &mut checks)?,
            "cover-search" => cover_search(&s, input, result, &mut checks)?,
            "uncovered-box" => {
                let target: Aabb = get(input, "box")?;
                let elements: Vec<RingExpr> = get(input, "elements")?;
                uncovered(&s, &target, &elements, result, "witness", &mut checks)?;
            }
            "infinite-cube" => infinite_cube(&s, input, result, &mut checks)?,
            "pack" => {
                let sides = get_qs(input, "sides")?;
                let target_side = get_q(input, "target_side")?;
                pack(&sides, &target_side, result, "packing", &mut checks)?;
            }
            "hausdorff-bound" => hausdorff(&s, input, result, &mut checks)?,
            "corollary-demo" => corollary(result, &mut checks)?,
            "range-solve" => range_solve(&s, input, result, &tol, &mut checks)?,
            "tile-check" => tile(input, result, &mut checks)?,
            other => return Err(bad(format!("unknown command {other:?}"))),
        }
    }
    let accepted = checks.iter().all(|(_, ok)| *ok);
    let doc = json!({
        "command": "verify",
        "report_command": command,
        "checks": checks.iter().map(|(c, ok)| json!({ "check": c, "ok": ok })).collect::<Vec<_>>(),
        "accepted": accepted,
    });
    Ok((doc, accepted))
}

fn cantor_info(s: &CantorSchedule, input: &Value, r: &Value, cap: u32, ch: &mut Checks) -> Result<(), Failure> {
    let stage: u32 = get(input, "stage")?;
    let ls = get_qs(r, "lengths")?;
    let ok = ls.len() == stage as usize + 1
        && ls[0] == Q::one()
        && (1..ls.len()).all(|k| &ls[k] * qi(2) + s.removal(k as u32) == ls[k - 1]);
    ch.push(("interval lengths follow the removal recursion".into(), ok));
    let ms = get_qs(r, "stage_measures")?;
    let d = s.d as u32;
    let ok = ms.len() == ls.len()
        && ms.iter().enumerate().all(|(n, m)| {
            let one_d = &ls[n] * pow2(n as i64);
            *m == pow_q(&one_d, d)
        });
    ch.push(("stage measures equal (2^n l_n)^d".into(), ok));
    let limit = get_q(r, "limit_measure")?;
    ch.push(("limit measure matches schedule".into(), limit == s.limit_measure()));
    if r.get("membership").is_some() {
        let x = get_qs(r, "point")?;
        let m = serde_json::to_value(s.membership(&x, cap)?).expect("serializes");
        ch.push(("membership recomputed".into(), &m == field(r, "membership")?));
    }
    Ok(())
}

fn measure(s: &CantorSchedule, input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let e: RingExpr = get(input, "expr")?;
    e.validate(s.d)?;
    let b: MeasureBounds = get(r, "bounds")?;
    ch.push(("bounds are ordered".into(), b.lower <= b.upper));
    ch.push(("bounds recomputed at reported stage".into(), e.measure_bounds(s, b.stage)? == b));
    let m = get_q(r, "stage_set_measure")?;
    ch.push(("stage set measure recomputed".into(), e.approx_set(s, b.stage)?.measure()? == m));
    Ok(())
}

fn split_check(s: &CantorSchedule, input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let e: RingExpr = get(input, "expr")?;
    let a: Aabb = get(input, "half_space")?;
    let n: u32 = get(input, "stage")?;
    let comp: Aabb = get(r, "complement")?;
    ch.push(("complement is the opposite half-space".into(), a.half_space_complement() == Some(comp.clone())));
    let whole = e.approx_set(s, n)?.measure()?;
    let inside = e.clip_to_box(&a)?.approx_set(s, n)?.measure()?;
    let outside = e.clip_to_box(&comp)?.approx_set(s, n)?.measure()?;
    let same = whole == get_q(r, "whole")? && inside == get_q(r, "inside")? && outside == get_q(r, "outside")?;
    ch.push(("three measures recomputed".into(), same));
    ch.push(("whole = inside + outside".into(), whole == inside + outside));
    Ok(())
}

fn rn_enumerate(s: &CantorSchedule, input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let pool: Vec<RingExpr> = get(input, "pool")?;
    let levels: Vec<Vec<RingExpr>> = get(r, "levels")?;
    let reference: u32 = get(r, "reference_stage")?;
    let Some(first) = levels.first() else {
        return Err(bad("no levels"));
    };
    ch.push(("first level drawn from the pool".into(), first.iter().all(|e| pool.contains(e))));
    let mut built = true;
    for w in levels.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        built &= next.len() >= prev.len() && next[..prev.len()] == prev[..];
        built &= next[prev.len()..].iter().all(|e| match e {
            RingExpr::Union(a, b) | RingExpr::Diff(a, b) => prev.contains(a) && prev.contains(b),
            _ => false,
        });
    }
    ch.push(("each level extends the previous by unions and differences".into(), built));
    let mut sets = Vec::new();
    for e in levels.last().expect("nonempty") {
        sets.push(e.approx_set(s, reference)?);
    }
    let distinct = (0..sets.len()).all(|i| (0..i).all(|j| sets[i] != sets[j]));
    ch.push(("last level distinct at the reference stage".into(), distinct));
    Ok(())
}

fn cover_search(s: &CantorSchedule, input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let pool: Vec<RingExpr> = get(input, "pool")?;
    let target: CoverTarget = get(input, "target")?;
    match r.get("result").and_then(Value::as_str) {
        Some("finite") => {
            let att = field(r, "attempt")?;
            let att_target: CoverTarget = get(att, "target")?;
            ch.push(("attempt target matches input".into(), att_target == target));
            let elements: Vec<RingExpr> = get(att, "elements")?;
            let n: u32 = get(att, "stage")?;
            let total = get_q(att, "total_premeasure_upper")?;
            let mut sum = Q::zero();
            for e in &elements {
                e.validate(s.d)?;
                sum += e.measure_bounds(s, n)?.upper;
            }
            ch.push(("total is the sum of upper premeasures".into(), sum == total));
            match &target {
                CoverTarget::Box(b) => {
                    ch.push(("finite cover only for an empty box".into(), b.is_empty() && total.is_zero()));
                }
                CoverTarget::Expr(e) => {
                    let set = e.approx_set(s, n)?;
                    let c = verify_cover(s, &set, &elements, n)?;
                    ch.push(("stage set inside the element hulls".into(), c.covers_outer_hulls));
                    ch.push(("cover is robust as true sets".into(), stage_robust(s, e, &elements, n)?));
                }
            }
        }
        Some("infinite") => match (&target, r.get("witness")) {
            (CoverTarget::Box(b), Some(w)) if !w.is_null() => {
                uncovered(s, b, &pool, &json!({ "status": "found", "box": w["box"], "stage": w["stage"], "certificates": w["certificates"] }), "no finite cover: witness", ch)?;
            }
            _ => ch.push(("no certificate claimed".into(), true)),
        },
        _ => return Err(bad("cover result tag")),
    }
    Ok(())
}

/// Checks a serialized `UncoveredSearch` against `elements`.
fn uncovered(
    s: &CantorSchedule,
    target: &Aabb,
    elements: &[RingExpr],
    r: &Value,
    label: &str,
    ch: &mut Checks,
) -> Result<(), Failure> {
    match r.get("status").and_then(Value::as_str) {
        Some("found") => {
            let w: UncoveredWitness = serde_json::from_value(r.clone()).map_err(|e| bad(e.to_string()))?;
            ch.push((format!("{label} verifies"), w.verify(s, target, elements)?));
        }
        Some("needs_deeper_stage") => ch.push((format!("{label}: inconclusive, nothing to check"), true)),
        _ => return Err(bad("uncovered search status")),
    }
    Ok(())
}

fn infinite_cube(s: &CantorSchedule, input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let size: usize = get(input, "pool_size")?;
    let pool: Vec<RingExpr> = get(r, "pool")?;
    ch.push(("pool is the grid pool".into(), pool == grid_pool(s.d, size)));
    let rows = field(r, "rows")?.as_array().ok_or_else(|| bad("rows"))?;
    let target = Aabb::unit(s.d);
    let (mut found, mut all_ok) = (0usize, true);
    for row in rows {
        let subset: Vec<usize> = get(row, "subset")?;
        if subset.iter().any(|&i| i >= pool.len()) {
            return Err(bad("subset index"));
        }
        let family: Vec<RingExpr> = subset.iter().map(|&i| pool[i].clone()).collect();
        let outcome = field(row, "outcome")?;
        let mut local = Vec::new();
        uncovered(s, &target, &family, outcome, "row", &mut local)?;
        all_ok &= local.iter().all(|(_, ok)| *ok);
        if outcome["status"] == "found" {
            found += 1;
        }
    }
    let families: usize = get(r, "families")?;
    let witnesses: usize = get(r, "witnesses")?;
    let expected = if size == 0 { 1 } else { (1usize << size) - 1 };
    ch.push(("one row per nonempty subfamily".into(), rows.len() == families && families == expected));
    ch.push(("witness count matches rows".into(), witnesses == found));
    ch.push(("every witness verifies".into(), all_ok));
    Ok(())
}

fn pack(sides: &[Q], target_side: &Q, r: &Value, label: &str, ch: &mut Checks) -> Result<(), Failure> {
    let layout: PackingLayout = serde_json::from_value(r.clone()).map_err(|e| bad(e.to_string()))?;
    let d = layout.d;
    let scaled_volume = sides.iter().fold(Q::zero(), |acc, a| acc + pow_q(&(a / &layout.alpha), d as u32));
    ch.push((format!("{label}: volume recomputed"), scaled_volume == layout.volume && layout.volume >= Q::one()));
    let target = Aabb::cube(&vec![Q::zero(); d], &(&layout.alpha * target_side));
    ch.push((format!("{label}: target cube"), layout.target == target));
    let mut per_level = std::collections::BTreeMap::<i64, usize>::new();
    for (_, k) in &layout.final_family {
        *per_level.entry(*k).or_default() += 1;
    }
    let bound = (1usize << d) - 1;
    ch.push((format!("{label}: at most 2^d - 1 merged cubes per level"), per_level.values().all(|&c| c <= bound)));
    ch.push((format!("{label}: translates cover the target"), layout.verify(sides)?));
    Ok(())
}

fn hausdorff(s: &CantorSchedule, input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let g = Gauge::new(get(input, "gauge")?)?;
    let delta = get_q(input, "delta")?;
    let min_stage: u32 = get(input, "min_stage")?;
    let n: u32 = get(r, "stage")?;
    let cubes: Vec<Cube> = get(r, "cubes")?;
    let diameter: ExtendedRational = get(r, "diameter")?;
    let gauge_sum: ExtendedRational = get(r, "gauge_sum")?;
    let d = s.d as u32;
    ch.push(("stage respects the minimum".into(), n >= min_stage));
    let sides_ok = cubes.iter().all(|c| c.corner.len() == s.d && &c.side * &c.side * qi(d as i64) < &delta * &delta);
    ch.push(("every cube has diameter below delta".into(), sides_ok));
    let same = cubes.iter().all(|c| ExtendedRational::surd(c.side.clone(), d) == diameter);
    ch.push(("common diameter recorded".into(), same));
    let count = Q::from_integer(cubes.len().into());
    ch.push(("gauge sum recomputed".into(), &g.eval(&diameter) * &count == gauge_sum));
    let boxes: Vec<Aabb> = cubes.iter().map(|c| Aabb::cube(&c.corner, &c.side)).collect();
    let u = BoxUnion::from_boxes(s.d, &boxes)?;
    ch.push(("cubes cover the stage set".into(), s.stage_approx(n)?.is_subset_of(&u)?));
    Ok(())
}

fn corollary(r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let ineqs = field(r, "inequalities")?.as_array().ok_or_else(|| bad("inequalities"))?;
    let mut chain = true;
    for i in ineqs {
        let name: String = get(i, "name")?;
        let ok = relation_holds(i)?;
        chain &= ok;
        ch.push((format!("inequality: {name}"), ok));
    }
    let claimed_budget: bool = get(field(r, "gauge_budget")?, "holds")?;
    ch.push(("gauge budget flag recomputed".into(), relation_holds(field(r, "gauge_budget")?)? == claimed_budget));
    let truncated: usize = get(r, "truncated")?;
    let side = get_q(r, "cube_side")?;
    let sides = vec![side; truncated];
    let mut local = Vec::new();
    pack(&sides, &q(1, 2), field(r, "packing")?, "packing", &mut local)?;
    chain &= local.iter().all(|(_, ok)| *ok);
    ch.extend(local);
    let claimed: bool = get(r, "all_hold")?;
    ch.push(("all_hold matches the chain".into(), claimed == chain));
    ch.push(("chain holds".into(), chain));
    Ok(())
}

fn relation_holds(i: &Value) -> Result<bool, Failure> {
    let lhs: ExtendedRational = get(i, "lhs")?;
    let rhs: ExtendedRational = get(i, "rhs")?;
    let rel: String = get(i, "relation")?;
    let holds = match rel.as_str() {
        "<" => lhs < rhs,
        "<=" => lhs <= rhs,
        "=" => lhs == rhs,
        other => return Err(bad(format!("relation {other:?}"))),
    };
    let claimed: bool = get(i, "holds")?;
    Ok(holds && claimed)
}

fn range_solve(s: &CantorSchedule, input: &Value, r: &Value, tol: &Q, ch: &mut Checks) -> Result<(), Failure> {
    let b: MeasureBounds = get(r, "bounds")?;
    let x = get_q(r, "x")?;
    ch.push(("bounds recomputed at reported stage".into(), range_bounds_at(s, &x, b.stage)? == b));
    if input.get("target").is_some() {
        let target = get_q(input, "target")?;
        let err = (b.midpoint() - &target).abs();
        ch.push((format!("midpoint within {} of target", format_q(tol)), err <= *tol));
        ch.push(("bounds bracket the target within tol".into(), b.lower - tol <= target && target <= b.upper + tol));
    } else {
        ch.push(("width within tol".into(), b.width() <= *tol));
    }
    Ok(())
}

fn tile(input: &Value, r: &Value, ch: &mut Checks) -> Result<(), Failure> {
    let base: Aabb = get(input, "box")?;
    let qv = get_qs(input, "q")?;
    let fresh = serde_json::to_value(tile_check(&base, &qv)?).expect("serializes");
    ch.push(("tiling recomputed".into(), &fresh == r));
    let m = get_q(r, "scaled_measure")?;
    let same = m == get_q(r, "counted_measure")? && m == get_q(r, "scaled_by_ratio")?;
    ch.push(("scaled = count * cell = prod(q) * base".into(), same));
    let holds: bool = get(r, "holds")?;
    ch.push(("report claims the identity".into(), holds));
    Ok(())
}
