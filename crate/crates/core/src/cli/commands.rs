use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::report::{write_output, Report, Table};
use super::{Command, Context, Inputs, EXIT_CHECK_FAILED, EXIT_OK};
use crate::bounds::{
    predicted, rich_sum_constant, tail_check, verify_bound, BoundId, BoundParams, BoundSpec,
    Direction, Quantity,
};
use crate::convexity::convexity_order;
use crate::energy::Sign;
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::garaev::{GridPartition, LuckyPairs, MonotoneAxis};
use crate::scalar::{format_rational, parse_rational};
use crate::setfile::{parse_set, rational_list, render_set};
use crate::{Rational, Set};

pub(super) fn dispatch(ctx: &Context, command: Command, stdout: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let mut report = match command {
        Command::Gen { family, n } => return gen(ctx, &family, n, stdout),
        Command::Analyze { inputs, patterns } => analyze(ctx, &inputs, &patterns)?,
        Command::Energy {
            inputs,
            k,
            signs,
            moment,
        } => energy(ctx, &inputs, k, signs.as_deref(), moment.as_deref())?,
        Command::Spectrum { inputs, signs } => spectrum(ctx, &inputs, &signs)?,
        Command::Sumset {
            inputs,
            signs,
            list,
        } => sumset(ctx, &inputs, &signs, list)?,
        Command::Doubling { inputs, pattern } => doubling(ctx, &inputs, &pattern)?,
        Command::Lucky {
            inputs,
            k,
            c,
            min_r,
            x,
            axes,
        } => lucky(ctx, &inputs, k, c, min_r, x.as_deref(), &axes)?,
        Command::Fit { points, input } => fit(points.as_deref(), input.as_deref())?,
        Command::Verify {
            bound,
            family,
            grid,
            quantity,
            s,
            k,
            tolerance,
        } => {
            let (mut report, passed) = verify(
                ctx,
                &bound,
                &family,
                &grid,
                quantity.as_deref(),
                s,
                k,
                tolerance,
            )?;
            stamp(ctx, &mut report, start);
            emit(ctx, &report, stdout)?;
            return Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED });
        }
        Command::Predict { bound, s, k } => predict(ctx, bound.as_deref(), s, k)?,
        Command::Tail { inputs, shifts } => tail(ctx, &inputs, &shifts)?,
    };
    stamp(ctx, &mut report, start);
    emit(ctx, &report, stdout)?;
    Ok(EXIT_OK)
}

fn stamp(ctx: &Context, report: &mut Report, start: Instant) {
    if ctx.timing {
        report.timing_ms = Some(start.elapsed().as_millis());
    }
}

fn emit(ctx: &Context, report: &Report, stdout: &mut dyn Write) -> Result<()> {
    write_output(&report.render(ctx.format), ctx.out.as_deref(), stdout)
}

struct Input {
    set: Set,
    provenance: Value,
}

fn parse_family(ctx: &Context, text: &str) -> Result<FamilySpec> {
    let spec: FamilySpec = text.parse()?;
    Ok(match ctx.seed {
        Some(seed) => spec.with_seed(seed),
        None => spec,
    })
}

fn load(ctx: &Context, inputs: &Inputs) -> Result<Vec<Input>> {
    let mut loaded = Vec::new();
    for path in &inputs.sets {
        let bytes = read_input(path)?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::input(format!("{}: not UTF-8", path.display())))?;
        let set = parse_set(&text).map_err(|e| match e {
            Error::Input(m) => Error::input(format!("{}: {m}", path.display())),
            other => other,
        })?;
        loaded.push(Input {
            set,
            provenance: json!({
                "file": path.display().to_string(),
                "sha256": hex::encode(Sha256::digest(&bytes)),
            }),
        });
    }
    for text in &inputs.families {
        let spec = parse_family(ctx, text)?;
        loaded.push(Input {
            set: spec.generate()?,
            provenance: json!({ "family": spec.to_string() }),
        });
    }
    if loaded.is_empty() {
        return Err(Error::input("no input: pass --set FILE or --family SPEC"));
    }
    Ok(loaded)
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn load_one(ctx: &Context, inputs: &Inputs) -> Result<Input> {
    let mut all = load(ctx, inputs)?;
    if all.len() != 1 {
        return Err(Error::input("this command takes exactly one input set"));
    }
    Ok(all.remove(0))
}

/// One set per summand: a single input is repeated `k` times.
fn summands(ctx: &Context, inputs: &Inputs, k: usize) -> Result<(Vec<Set>, Vec<Value>)> {
    let loaded = load(ctx, inputs)?;
    let provenance = loaded.iter().map(|i| i.provenance.clone()).collect();
    let sets = match loaded.len() {
        1 => vec![loaded[0].set.clone(); k],
        n if n == k => loaded.into_iter().map(|i| i.set).collect(),
        n => return Err(Error::input(format!("{n} input sets for {k} summands"))),
    };
    Ok((sets, provenance))
}

fn signed(sets: &[Set], signs: &[Sign]) -> Vec<Set> {
    sets.iter()
        .zip(signs)
        .map(|(s, sign)| match sign {
            Sign::Plus => s.clone(),
            Sign::Minus => s.negated(),
        })
        .collect()
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn gen(ctx: &Context, family: &str, n: Option<usize>, stdout: &mut dyn Write) -> Result<i32> {
    let mut spec = parse_family(ctx, family)?;
    if let Some(n) = n {
        spec = spec.with_n(n);
    }
    let set = spec.generate()?;
    let order = convexity_order(&set);
    let header = format!("family={spec}\nN={}\nconvexity_order={order}", set.len());
    match &ctx.out {
        None => stdout.write_all(render_set(&set, Some(&header)).as_bytes())?,
        Some(path) => {
            fs::write(path, render_set(&set, Some(&header)))?;
            let report = Report {
                timing_ms: None,
                op: "gen",
                inputs: vec![json!({ "family": spec.to_string() })],
                algo: ctx.engine.config().algo.to_string(),
                results: json!({
                    "N": s(set.len()),
                    "convexity_order": s(order),
                    "file": path.display().to_string(),
                }),
                table: Table::key_value(vec![("N", s(set.len())), ("convexity_order", s(order))]),
            };
            stdout.write_all(report.render(ctx.format).as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}

fn analyze(ctx: &Context, inputs: &Inputs, patterns: &str) -> Result<Report> {
    let input = load_one(ctx, inputs)?;
    let a = &input.set;
    let e = &ctx.engine;
    let order = convexity_order(a);
    let pair = [a.clone(), a.clone()];
    let energy = e.energy_t(&pair)?;
    let mut table = vec![
        ("N", s(a.len())),
        ("min", format_rational(a.min())),
        ("max", format_rational(a.max())),
        ("convexity_order", s(order)),
        ("E", s(energy)),
    ];
    let mut doubling = Vec::new();
    for pattern in patterns.split(',').filter(|p| !p.is_empty()) {
        let d = e.doubling(a, pattern)?;
        doubling.push(json!({
            "pattern": d.pattern,
            "size": s(d.size),
            "K": format_rational(&d.k),
        }));
        table.push((
            "doubling",
            format!("{}={}", d.pattern, format_rational(&d.k)),
        ));
    }
    let mut results = json!({
        "N": s(a.len()),
        "min": format_rational(a.min()),
        "max": format_rational(a.max()),
        "convexity_order": s(order),
        "E": s(energy),
        "doubling": doubling,
    });
    if a.len() >= 2 {
        let popular = e.popular_dyadic_class(a)?;
        let rich = rich_sum_constant(e, a)?;
        results["popular_class"] = json!({
            "delta": s(popular.delta),
            "size": s(popular.differences.len()),
            "score": s(popular.score),
            "energy_bound": s(popular.energy_bound(a.len())),
        });
        results["rich_difference_constant"] = json!(format_rational(&rich));
        table.push(("popular_delta", s(popular.delta)));
        table.push(("popular_size", s(popular.differences.len())));
        table.push(("rich_difference_constant", format_rational(&rich)));
    }
    Ok(Report {
        timing_ms: None,
        op: "analyze",
        inputs: vec![input.provenance],
        algo: e.resolve_algo(&pair)?.to_string(),
        results,
        table: Table::key_value(table),
    })
}

fn energy(
    ctx: &Context,
    inputs: &Inputs,
    k: usize,
    signs: Option<&str>,
    moment: Option<&str>,
) -> Result<Report> {
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    let (sets, provenance) = summands(ctx, inputs, k)?;
    let signs = match signs {
        Some(p) => Sign::parse_pattern(p)?,
        None => vec![Sign::Plus; k],
    };
    if signs.len() != k {
        return Err(Error::input(format!(
            "sign pattern has {} signs, k = {k}",
            signs.len()
        )));
    }
    let e = &ctx.engine;
    let algo = e.resolve_algo(&signed(&sets, &signs))?;
    let (moment_text, value) = match moment {
        None => {
            let v = if signs.iter().all(|s| *s == Sign::Plus) {
                e.energy_t(&sets)?
            } else {
                e.moment(&sets, &signs, 2)?
            };
            ("2".to_string(), s(v))
        }
        Some(m) => {
            let m = parse_rational(m)?;
            if m.is_integer() {
                let order = m
                    .to_integer()
                    .to_u32()
                    .ok_or_else(|| Error::input("moment order out of range"))?;
                (format_rational(&m), s(e.moment(&sets, &signs, order)?))
            } else {
                let p = &m - Rational::from_integer(1.into());
                (
                    format_rational(&m),
                    s(e.fractional_moment(&sets, &signs, &p)?),
                )
            }
        }
    };
    let pattern = Sign::render(&signs);
    Ok(Report {
        timing_ms: None,
        op: "energy",
        inputs: provenance,
        algo: algo.to_string(),
        results: json!({
            "k": s(k),
            "signs": pattern,
            "moment": moment_text,
            "value": value,
        }),
        table: Table::key_value(vec![
            ("k", s(k)),
            ("signs", pattern.clone()),
            ("moment", moment_text.clone()),
            ("value", value.clone()),
        ]),
    })
}

fn spectrum(ctx: &Context, inputs: &Inputs, pattern: &str) -> Result<Report> {
    let signs = Sign::parse_pattern(pattern)?;
    let (sets, provenance) = summands(ctx, inputs, signs.len())?;
    let sets = signed(&sets, &signs);
    let e = &ctx.engine;
    let algo = e.resolve_algo(&sets)?;
    let spec = e.spectrum(&sets)?;
    let mut table = Table::new(&["j", "r_lo", "r_hi", "size"]);
    let mut classes = Vec::new();
    for &(j, size) in &spec.classes {
        let lo = 1u128 << j;
        table.push(vec![s(j), s(lo), s(2 * lo), s(size)]);
        classes.push(json!({ "j": s(j), "r_lo": s(lo), "r_hi": s(2 * lo), "size": s(size) }));
    }
    Ok(Report {
        timing_ms: None,
        op: "spectrum",
        inputs: provenance,
        algo: algo.to_string(),
        results: json!({
            "signs": Sign::render(&signs),
            "T": s(spec.total_t),
            "classes": classes,
        }),
        table,
    })
}

fn sumset(ctx: &Context, inputs: &Inputs, pattern: &str, list: bool) -> Result<Report> {
    let signs = Sign::parse_pattern(pattern)?;
    let (sets, provenance) = summands(ctx, inputs, signs.len())?;
    let e = &ctx.engine;
    let algo = e.resolve_algo(&signed(&sets, &signs))?;
    let sum = e.signed_sumset(&sets, &signs)?;
    let mut results = json!({ "signs": Sign::render(&signs), "size": s(sum.len()) });
    let table = if list {
        let elements = rational_list(sum.as_slice());
        let mut t = Table::new(&["element"]);
        for v in &elements {
            t.push(vec![v.clone()]);
        }
        results["elements"] = json!(elements);
        t
    } else {
        Table::key_value(vec![
            ("signs", Sign::render(&signs)),
            ("size", s(sum.len())),
        ])
    };
    Ok(Report {
        timing_ms: None,
        op: "sumset",
        inputs: provenance,
        algo: algo.to_string(),
        results,
        table,
    })
}

fn doubling(ctx: &Context, inputs: &Inputs, pattern: &str) -> Result<Report> {
    let input = load_one(ctx, inputs)?;
    let e = &ctx.engine;
    let d = e.doubling(&input.set, pattern)?;
    let sets = vec![input.set.clone(); d.pattern.chars().count()];
    Ok(Report {
        timing_ms: None,
        op: "doubling",
        inputs: vec![input.provenance],
        algo: e.resolve_algo(&sets)?.to_string(),
        results: json!({
            "pattern": d.pattern,
            "size": s(d.size),
            "base_size": s(d.base_size),
            "K": format_rational(&d.k),
        }),
        table: Table::key_value(vec![
            ("pattern", d.pattern.clone()),
            ("size", s(d.size)),
            ("base_size", s(d.base_size)),
            ("K", format_rational(&d.k)),
        ]),
    })
}

fn dyadic_floor(v: u64) -> u64 {
    1u64 << (63 - v.leading_zeros())
}

fn lucky(
    ctx: &Context,
    inputs: &Inputs,
    k: usize,
    c: u64,
    min_r: u64,
    x: Option<&str>,
    axes: &str,
) -> Result<Report> {
    let input = load_one(ctx, inputs)?;
    let axis = match axes {
        "index" => MonotoneAxis::index_form(&input.set),
        "identity" => MonotoneAxis::identity(&input.set),
        other => return Err(Error::input(format!("unknown axes mode {other:?}"))),
    };
    let lp = LuckyPairs::new(vec![axis; k])?;
    let by_sum = lp.solutions_by_sum();
    let targets: Vec<(&Rational, &Vec<Vec<usize>>)> = match x {
        Some(text) => {
            let x = parse_rational(text)?;
            let (key, sols) = by_sum
                .get_key_value(&x)
                .ok_or_else(|| Error::input(format!("{text} is not a sum of the axes")))?;
            vec![(key, sols)]
        }
        None => by_sum
            .iter()
            .filter(|(_, sols)| sols.len() as u64 >= min_r)
            .collect(),
    };
    let mut grids: BTreeMap<u64, GridPartition<Rational>> = BTreeMap::new();
    let mut table = Table::new(&[
        "x",
        "r",
        "r_x",
        "pairs_found",
        "lower_bound",
        "occupied_cells",
    ]);
    let mut rows = Vec::new();
    let mut short = 0usize;
    for (x, sols) in targets {
        let r = dyadic_floor(sols.len() as u64);
        if let std::collections::btree_map::Entry::Vacant(e) = grids.entry(r) {
            e.insert(lp.partition(r, c)?);
        }
        let census = lp.census_with(x, sols, &grids[&r])?;
        if !census.degenerate && (census.pairs.len() as i128) < census.lower_bound {
            short += 1;
        }
        let xs = format_rational(x);
        table.push(vec![
            xs.clone(),
            s(r),
            s(census.r_x),
            s(census.pairs.len()),
            s(census.lower_bound),
            s(census.occupied_cells),
        ]);
        rows.push(json!({
            "x": xs,
            "r": s(r),
            "r_x": s(census.r_x),
            "pairs_found": s(census.pairs.len()),
            "lower_bound": s(census.lower_bound),
            "occupied_cells": s(census.occupied_cells),
            "cells_per_axis": s(census.cells_per_axis),
            "degenerate": census.degenerate,
        }));
    }
    Ok(Report {
        timing_ms: None,
        op: "lucky",
        inputs: vec![input.provenance],
        algo: ctx.engine.config().algo.to_string(),
        results: json!({
            "k": s(k),
            "c": s(c),
            "min_r": s(min_r),
            "axes": axes,
            "sums": rows,
            "below_lower_bound": s(short),
        }),
        table,
    })
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::input(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn fit(points: Option<&str>, input: Option<&Path>) -> Result<Report> {
    let (pts, provenance): (Vec<(u128, u128)>, Value) = match (points, input) {
        (Some(text), None) => {
            let pts = text
                .split(',')
                .map(|p| {
                    let (n, q) = p
                        .split_once(':')
                        .ok_or_else(|| Error::input(format!("expected N:Q, got {p:?}")))?;
                    Ok((parse_u(n)?, parse_u(q)?))
                })
                .collect::<Result<Vec<_>>>()?;
            (pts, json!({ "points": text }))
        }
        (None, Some(path)) => {
            let bytes = read_input(path)?;
            let text = String::from_utf8_lossy(&bytes);
            let mut pts = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((n, q)) = line.split_once(',') else {
                    return Err(Error::input(format!("line {}: expected N,Q", i + 1)));
                };
                match (parse_u(n), parse_u(q)) {
                    (Ok(n), Ok(q)) => pts.push((n, q)),
                    // A header line.
                    _ if i == 0 => continue,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
            (
                pts,
                json!({
                    "file": path.display().to_string(),
                    "sha256": hex::encode(Sha256::digest(&bytes)),
                }),
            )
        }
        _ => return Err(Error::input("fit needs exactly one of --points or --input")),
    };
    let pts: Vec<(u64, u128)> = pts
        .into_iter()
        .map(|(n, q)| {
            u64::try_from(n)
                .map(|n| (n, q))
                .map_err(|_| Error::input("N out of range"))
        })
        .collect::<Result<_>>()?;
    let report = crate::bounds::fit_exponent(&pts)?;
    Ok(Report {
        timing_ms: None,
        op: "fit",
        inputs: vec![provenance],
        algo: "none".into(),
        results: json!({
            "points": pts.iter().map(|(n, q)| json!({"N": s(n), "Q": s(q)})).collect::<Vec<_>>(),
            "slope": report.slope,
            "intercept": report.intercept,
            "max_abs_residual": report.max_abs_residual,
        }),
        table: Table::key_value(vec![
            ("slope", s(report.slope)),
            ("intercept", s(report.intercept)),
            ("max_abs_residual", s(report.max_abs_residual)),
        ]),
    })
}

fn parse_u(text: &str) -> Result<u128> {
    text.trim()
        .parse()
        .map_err(|_| Error::input(format!("expected a non-negative integer, got {text:?}")))
}

fn spec_json(b: &BoundSpec) -> Value {
    json!({
        "id": b.id.name(),
        "quantity": b.quantity.to_string(),
        "direction": match b.direction { Direction::Upper => "upper", Direction::Lower => "lower" },
        "N_exponent": b.n_exponent.to_string(),
        "K_exponent": format_rational(&b.k_exponent),
        "K_factors": s(b.k_factors),
        "L_exponent": format_rational(&b.l_exponent),
        "r_exponent": format_rational(&b.r_exponent),
        "sup_energy_exponent": format_rational(&b.sup_energy_exponent),
        "log_loss": b.log_loss,
    })
}

#[allow(clippy::too_many_arguments)]
fn verify(
    ctx: &Context,
    bound: &str,
    family: &str,
    grid: &str,
    quantity: Option<&str>,
    s_param: u32,
    k_param: u32,
    tolerance: f64,
) -> Result<(Report, bool)> {
    let id: BoundId = bound.parse()?;
    let spec = predicted(
        id,
        BoundParams {
            s: s_param,
            k: k_param,
        },
    )?;
    let family = parse_family(ctx, family)?;
    let grid: Vec<usize> = parse_list(grid, "grid")?;
    let quantity = quantity.map(str::parse::<Quantity>).transpose()?;
    let report = verify_bound(&ctx.engine, &family, quantity, &spec, &grid, tolerance)?;
    let mut table = Table::new(&["N", "Q", "K", "ratio"]);
    let mut per_n = Vec::new();
    for p in &report.points {
        let k = p.k.as_ref().map(format_rational);
        table.push(vec![
            s(p.n),
            s(p.q),
            k.clone().unwrap_or_default(),
            s(p.ratio),
        ]);
        per_n.push(json!({
            "n_param": s(p.n_param),
            "N": s(p.n),
            "Q": s(p.q),
            "K": k,
            "L": s(p.l),
            "ratio": p.ratio,
        }));
    }
    let passed = report.passed();
    let results = json!({
        "bound_id": id.name(),
        "family": report.family,
        "N_grid": grid.iter().map(s).collect::<Vec<_>>(),
        "per_N": per_n,
        "slope": report.slope,
        "raw_slope": report.raw_fit.slope,
        "tolerance": tolerance,
        "predicted": spec_json(&report.bound),
        "flags": {
            "ratio_spread": report.flags.ratio_spread,
            "ratio_monotone": report.flags.ratio_monotone,
            "slope_within_bound": report.flags.slope_within_bound,
        },
        "passed": passed,
        "heuristic": report.heuristic,
    });
    Ok((
        Report {
            timing_ms: None,
            op: "verify",
            inputs: vec![json!({ "family": family.to_string() })],
            algo: ctx.engine.config().algo.to_string(),
            results,
            table,
        },
        passed,
    ))
}

fn predict(ctx: &Context, bound: Option<&str>, s_param: u32, k_param: u32) -> Result<Report> {
    let ids: Vec<BoundId> = match bound {
        Some(b) => vec![b.parse()?],
        None => BoundId::ALL.to_vec(),
    };
    let params = BoundParams {
        s: s_param,
        k: k_param,
    };
    let mut table = Table::new(&[
        "id",
        "quantity",
        "direction",
        "N_exponent",
        "K_exponent",
        "K_factors",
        "L_exponent",
    ]);
    let mut specs = Vec::new();
    for id in ids {
        let b = match predicted(id, params) {
            Ok(b) => b,
            // Listing everything: skip ids the parameters do not apply to.
            Err(_) if bound.is_none() => continue,
            Err(e) => return Err(e),
        };
        let v = spec_json(&b);
        table.push(
            [
                "id",
                "quantity",
                "direction",
                "N_exponent",
                "K_exponent",
                "K_factors",
                "L_exponent",
            ]
            .iter()
            .map(|key| v[*key].as_str().unwrap_or_default().to_string())
            .collect(),
        );
        specs.push(v);
    }
    Ok(Report {
        timing_ms: None,
        op: "predict",
        inputs: vec![json!({ "s": s(s_param), "k": s(k_param) })],
        algo: ctx.engine.config().algo.to_string(),
        results: json!({ "bounds": specs }),
        table,
    })
}

fn tail(ctx: &Context, inputs: &Inputs, shifts: &str) -> Result<Report> {
    let input = load_one(ctx, inputs)?;
    let hs: Vec<usize> = parse_list(shifts, "shift")?;
    let t = tail_check(&ctx.engine, &input.set, &hs)?;
    let mut table = Table::new(&["r", "count", "ratio"]);
    let mut rows = Vec::new();
    for &(r, count, ratio) in &t.rows {
        table.push(vec![s(r), s(count), s(ratio)]);
        rows.push(json!({ "r": s(r), "count": s(count), "ratio": ratio }));
    }
    let sets = vec![input.set.clone(); 4];
    Ok(Report {
        timing_ms: None,
        op: "tail",
        inputs: vec![input.provenance],
        algo: ctx.engine.resolve_algo(&sets)?.to_string(),
        results: json!({
            "N": s(t.n),
            "sampled_h": t.sampled_h.iter().map(s).collect::<Vec<_>>(),
            "E_hat": s(t.e_hat),
            "rows": rows,
            "constant": t.constant,
            "heuristic": t.heuristic,
        }),
        table,
    })
}
