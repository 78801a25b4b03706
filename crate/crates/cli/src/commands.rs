//! One function per subcommand. Each returns the echoed input and the result.

use serde::Serialize;
use serde_json::{json, Value};
use transmeasure::cantor::CantorSchedule;
use transmeasure::cover::{
    find_uncovered_box, grid_pool, infinite_cube_report, outer_upper, CoverTarget, SearchConfig,
};
use transmeasure::geometry::{tile_check, Aabb};
use transmeasure::hausdorff::{
    corollary_pipeline, nu_delta_upper, range_function, solve_level, CoverSet, Gauge,
};
use transmeasure::packing::pack_cover;
use transmeasure::rational::{format_q, parse_q, parse_q_list, Q};
use transmeasure::ring::{generate_rn, split_identity_check, RingExpr};

use crate::input::{parse_box, read_exprs, read_single_expr};
use crate::{Command, Failure, RunConfig, Side};

type Outcome = Result<Value, Failure>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Runs `cmd`; the input echo is filled in even when the run fails.
pub fn execute(cfg: &RunConfig, cmd: &Command) -> (Value, Outcome) {
    let mut input = json!({});
    let out = dispatch(cfg, cmd, &mut input);
    (input, out)
}

fn expr_or_cantor(cfg: &RunConfig) -> Result<RingExpr, Failure> {
    match &cfg.args.expr_file {
        Some(p) => read_single_expr(p, cfg.schedule.d),
        None => Ok(RingExpr::cantor(cfg.schedule.d)),
    }
}

fn dispatch(cfg: &RunConfig, cmd: &Command, input: &mut Value) -> Outcome {
    let s = &cfg.schedule;
    let d = s.d;
    match cmd {
        Command::CantorInfo { stage, point } => {
            *input = json!({ "stage": stage, "point": point });
            cantor_info(s, *stage, point.as_deref(), cfg.stage_cap)
        }
        Command::Measure { stage } => {
            let e = expr_or_cantor(cfg)?;
            *input = json!({ "expr": e, "stage": stage });
            let bounds = match stage {
                Some(n) => e.measure_bounds(s, *n)?,
                None => e.premeasure(s, &cfg.tol)?,
            };
            let stage_set = e.approx_set(s, bounds.stage)?.measure()?;
            Ok(json!({ "bounds": bounds, "stage_set_measure": format_q(&stage_set) }))
        }
        Command::SplitCheck { threshold, axis, side, stage } => {
            let e = expr_or_cantor(cfg)?;
            let t = parse_q(threshold)?;
            if *axis >= d {
                return Err(Failure::usage(format!("axis {axis} out of range for d = {d}")));
            }
            let half = match side {
                Side::Below => Aabb::below(d, *axis, t),
                Side::Above => Aabb::at_or_above(d, *axis, t),
            };
            *input = json!({ "expr": e, "half_space": half, "stage": stage });
            Ok(to_value(&split_identity_check(s, &e, &half, *stage)?))
        }
        Command::RnEnumerate { pool_size, levels, reference_stage } => {
            let pool = match &cfg.args.expr_file {
                Some(p) => read_exprs(p, d)?,
                None => grid_pool(d, *pool_size),
            };
            *input = json!({ "pool": pool, "levels": levels, "reference_stage": reference_stage });
            let report = generate_rn(s, &pool, *levels, *reference_stage, cfg.budget)?;
            let sizes: Vec<usize> = report.levels.iter().map(Vec::len).collect();
            let mut v = to_value(&report);
            v["sizes"] = json!(sizes);
            Ok(v)
        }
        Command::CoverSearch { stage, pool_file, pool_size, target_box } => {
            let pool = match pool_file {
                Some(p) => read_exprs(p, d)?,
                None => grid_pool(d, *pool_size),
            };
            let target = match (target_box, &cfg.args.expr_file) {
                (Some(b), _) => CoverTarget::Box(parse_box(b, d)?),
                (None, Some(p)) => CoverTarget::Expr(read_single_expr(p, d)?),
                (None, None) => CoverTarget::Box(Aabb::unit(d)),
            };
            *input = json!({ "target": target, "pool": pool, "stage": stage });
            let sc = SearchConfig { stage: *stage, budget: cfg.budget, stage_cap: cfg.stage_cap };
            let res = outer_upper(s, &target, &pool, &sc)?;
            let mut v = to_value(&res);
            v["total"] = match res.total() {
                Some(t) => json!(format_q(t)),
                None => json!("inf"),
            };
            Ok(v)
        }
        Command::UncoveredBox { target } => {
            let b = match target {
                Some(t) => parse_box(t, d)?,
                None => Aabb::unit(d),
            };
            let elements = match &cfg.args.expr_file {
                Some(p) => read_exprs(p, d)?,
                None => vec![],
            };
            *input = json!({ "box": b, "elements": elements });
            Ok(to_value(&find_uncovered_box(s, &b, &elements, cfg.stage_cap)?))
        }
        Command::InfiniteCube { pool_size } => {
            *input = json!({ "pool_size": pool_size });
            Ok(to_value(&infinite_cube_report(s, *pool_size, cfg.stage_cap)?))
        }
        Command::Pack { sides, target_side, alpha } => {
            let sides = parse_q_list(sides)?;
            let target_side = parse_q(target_side)?;
            let alpha = parse_q(alpha)?;
            *input = json!({
                "sides": sides.iter().map(format_q).collect::<Vec<_>>(),
                "target_side": format_q(&target_side),
                "alpha": format_q(&alpha),
            });
            Ok(to_value(&pack_cover(&sides, d, &target_side, &alpha)?))
        }
        Command::HausdorffBound { gauge, delta, min_stage } => {
            let delta = parse_q(delta)?;
            *input = json!({ "gauge": gauge, "delta": format_q(&delta), "min_stage": min_stage });
            let g = Gauge::new(*gauge)?;
            Ok(to_value(&nu_delta_upper(CoverSet::Cantor(s), g, &delta, *min_stage, cfg.stage_cap)?))
        }
        Command::CorollaryDemo { gauge, delta, a } => {
            let delta = parse_q(delta)?;
            let a = match a {
                Some(a) => parse_q(a)?,
                None => s.limit_measure(),
            };
            *input = json!({ "gauge": gauge, "delta": format_q(&delta), "a": format_q(&a) });
            let g = Gauge::new(*gauge)?;
            Ok(to_value(&corollary_pipeline(s, g, &delta, &a, cfg.stage_cap)?))
        }
        Command::RangeSolve { target, x } => match (target, x) {
            (Some(t), None) => {
                let t = parse_q(t)?;
                *input = json!({ "target": format_q(&t) });
                Ok(to_value(&solve_level(s, &t, &cfg.tol)?))
            }
            (None, Some(x)) => {
                let x = parse_q(x)?;
                *input = json!({ "x": format_q(&x) });
                Ok(json!({ "x": format_q(&x), "bounds": range_function(s, &x, &cfg.tol)? }))
            }
            _ => Err(Failure::usage("give exactly one of --target and --x")),
        },
        Command::TileCheck { base, q } => {
            let b = parse_box(base, d)?;
            let qs = parse_q_list(q)?;
            *input = json!({ "box": b, "q": qs.iter().map(format_q).collect::<Vec<_>>() });
            Ok(to_value(&tile_check(&b, &qs)?))
        }
    }
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(format_q).collect()
}

fn cantor_info(s: &CantorSchedule, stage: u32, point: Option<&str>, cap: u32) -> Outcome {
    let removals: Vec<Q> = (1..=stage).map(|k| s.removal(k)).collect();
    let measures: Vec<Q> = (0..=stage).map(|n| s.stage_measure(n)).collect();
    let defects: Vec<Q> = (0..=stage).map(|n| s.stage_defect(n)).collect();
    let mut v = json!({
        "stage": stage,
        "removals": qs(&removals),
        "lengths": qs(&s.lengths(stage)),
        "stage_measures": qs(&measures),
        "stage_defects": qs(&defects),
        "limit_measure_1d": format_q(&s.limit_measure_1d()),
        "limit_measure": format_q(&s.limit_measure()),
    });
    if let Some(p) = point {
        let x = parse_q_list(p)?;
        v["point"] = json!(qs(&x));
        v["membership"] = to_value(&s.membership(&x, cap)?);
    }
    Ok(v)
}
