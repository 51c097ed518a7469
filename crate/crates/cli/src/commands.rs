//! Subcommand handlers. Each returns the rendered output and its exit code.

use std::fs;

use serde_json::{json, Value};

use canonlab::canon::{self, render_text, BoundMode, CertifyOptions};
use canonlab::fgl::{exp_series, format_tuple, group_law, log_series, p_power_series, shape_check};
use canonlab::fglog::{check_hypotheses, compute_log, LogTable};
use canonlab::rat;
use canonlab::tropical::{self, default_grid_den, diagonal_polygon, grid_scan, h_cells, joint_vertices_2d};
use canonlab::{sample, Base, DisplayData, Error, Result, WittVec};

use crate::{BoundArg, Common, Format};

pub struct Output {
    pub body: String,
    pub code: u8,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, code: 0 }
    }
}

fn load(c: &Common) -> Result<DisplayData> {
    let text = fs::read_to_string(&c.file)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", c.file.display())))?;
    DisplayData::from_json_str(&text)
}

fn jobs(c: &Common) -> usize {
    c.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn n_max(c: &Common) -> usize {
    c.nmax.unwrap_or(c.level as usize + 2)
}

/// Logarithm table after normalization; short Witt vectors are padded.
fn table(d: &DisplayData, n_max: usize) -> Result<LogTable> {
    compute_log(&d.with_len(n_max + 1)?, n_max)
}

fn unsupported(what: &str, f: Format) -> Error {
    Error::Unsupported(format!("{what} has no {f:?} rendering"))
}

fn json_or_text(v: &Value, f: Format, what: &str) -> Result<String> {
    match f {
        Format::Json => Ok(serde_json::to_string_pretty(v).expect("serializable")),
        Format::Text => {
            let mut out = String::new();
            render_text(v, 0, &mut out);
            Ok(out)
        }
        other => Err(unsupported(what, other)),
    }
}

pub fn hasse(c: &Common) -> Result<Output> {
    let d = load(c)?;
    // U_i are read in a triangular basis when one exists over the residue field
    let hv = match d.triangularize() {
        Ok(t) => t.hasse_invariant(),
        Err(Error::ExtensionRequired(_)) => d.hasse_invariant(),
        Err(e) => return Err(e),
    };
    let body = match c.format {
        Format::Text => {
            let mut s = format!("H = {}\n", rat::to_short_string(&hv.value));
            s.push_str(&format!("ord det w_0(A) = {}\n", hv.det_ord));
            if let Some(us) = &hv.diagonal {
                let us: Vec<String> = us.iter().map(ToString::to_string).collect();
                s.push_str(&format!("U = ({})\n", us.join(", ")));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "p": d.base().p,
            "e": d.base().e,
            "g": d.g(),
            "h": d.h(),
            "hasse": hv,
        }))
        .expect("serializable"),
        other => return Err(unsupported("hasse", other)),
    };
    Ok(Output::ok(body))
}

pub fn log(c: &Common) -> Result<Output> {
    let d = load(c)?;
    let t = table(&d, n_max(c))?;
    let body = match c.format {
        Format::Tsv => t.to_tsv(),
        Format::Json => serde_json::to_string_pretty(&t.to_json()).expect("serializable"),
        Format::Text => {
            let mut s = format!("H = {}\n", rat::to_short_string(&t.hasse.value));
            for (n, a) in t.mats.iter().enumerate() {
                s.push_str(&format!("a_{n}:\n"));
                for (i, row) in a.iter().enumerate() {
                    let cells: Vec<String> = row
                        .iter()
                        .enumerate()
                        .map(|(j, x)| format!("{x} [ord {}]", t.u(n, i, j)))
                        .collect();
                    s.push_str(&format!("  {}\n", cells.join(" | ")));
                }
            }
            s
        }
        other => return Err(unsupported("log", other)),
    };
    Ok(Output::ok(body))
}

pub fn hyp(c: &Common) -> Result<Output> {
    let d = load(c)?.triangularize()?;
    let t = table(&d, n_max(c))?;
    let rep = check_hypotheses(&t, c.level);
    let body = json_or_text(&serde_json::to_value(&rep).expect("serializable"), c.format, "hyp")?;
    let code = if !rep.bound_ok {
        2
    } else if !rep.pass {
        3
    } else {
        0
    };
    Ok(Output { body, code })
}

pub fn trop(c: &Common, grid_den: Option<u64>) -> Result<Output> {
    let d = load(c)?.triangularize()?;
    let t = table(&d, n_max(c))?;
    let p = t.base.p;
    let upper = rat::int(2) / rat::int(p as i64 - 1);
    let body = match c.format {
        Format::Svg => match t.g {
            1 => diagonal_polygon(&t, 0)?.to_svg(),
            2 => tropical::trop_svg_2d(&t, c.level, &upper)?,
            g => return Err(Error::Unsupported(format!("pictures are drawn for g <= 2, got g = {g}"))),
        },
        Format::Tsv => match t.g {
            1 => diagonal_polygon(&t, 0)?.to_tsv(),
            2 => tropical::trop_edges_tsv(&t, c.level, &upper)?,
            g => return Err(Error::Unsupported(format!("tables are written for g <= 2, got g = {g}"))),
        },
        f => {
            let rep = check_hypotheses(&t, c.level);
            let cells = if rep.pass { Some(h_cells(&t, c.level, &rep)?) } else { None };
            let polygons = (0..t.g).map(|i| diagonal_polygon(&t, i)).collect::<Result<Vec<_>>>()?;
            let (grid, joint) = if t.g <= 2 {
                let q = grid_den.unwrap_or_else(|| default_grid_den(p));
                let grid = grid_scan(&t, c.level, q, &upper, jobs(c))?;
                let joint = if t.g == 2 { Some(joint_vertices_2d(&t, c.level, &upper)?) } else { None };
                (Some(grid), joint)
            } else {
                (None, None)
            };
            let v = json!({
                "level": c.level,
                "n_max": t.n_max,
                "hypotheses_pass": rep.pass,
                "h_cells": cells,
                "diagonal_polygons": polygons,
                "grid_scan": grid,
                "joint_pieces": joint,
            });
            json_or_text(&v, f, "trop")?
        }
    };
    Ok(Output::ok(body))
}

pub fn certify(c: &Common, grid_den: Option<u64>, bound: BoundArg) -> Result<Output> {
    let d = load(c)?;
    let opts = CertifyOptions {
        grid_den,
        jobs: jobs(c),
        bound: match bound {
            BoundArg::Standard => BoundMode::Standard,
            BoundArg::Katz => BoundMode::Katz,
        },
        scan: true,
    };
    let cert = canon::certify(&d, c.level, &opts)?;
    let body = match c.format {
        Format::Json => cert.to_json_string(),
        Format::Text => cert.to_text(),
        other => return Err(unsupported("certify", other)),
    };
    Ok(Output { body, code: if cert.exists { 0 } else { 2 } })
}

fn strings(s: &[canonlab::TruncatedSeries]) -> Vec<String> {
    s.iter().map(ToString::to_string).collect()
}

pub fn fgl(c: &Common, degree: Option<u32>) -> Result<Output> {
    let d = load(c)?.triangularize()?;
    let p = d.base().p;
    let deg = degree.unwrap_or(p * p - 1).max(1);
    // levels with p^n <= D
    let mut levels = 0usize;
    while (p as u64).pow(levels as u32 + 1) <= deg as u64 {
        levels += 1;
    }
    let t = table(&d, levels)?;
    let logs = log_series(&t, deg)?;
    let exps = exp_series(&logs, deg)?;
    let law = group_law(&t, deg)?;
    let pser = p_power_series(&t, 1, deg)?;
    let shape = shape_check(&pser, &d.dv_lift());
    let body = match c.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "p": p,
            "degree": deg,
            "log": strings(&logs),
            "exp": strings(&exps),
            "group_law": strings(&law.series),
            "group_law_min_ord": law.min_ord,
            "p_series": strings(&pser),
            "shape": shape,
        }))
        .expect("serializable"),
        Format::Text => {
            let mut s = format!("degree D = {deg}\n");
            s.push_str(&format!("log:\n{}", format_tuple(&logs)));
            s.push_str(&format!("exp:\n{}", format_tuple(&exps)));
            s.push_str(&format!("F(X, Y) (min ord {}):\n{}", law.min_ord, format_tuple(&law.series)));
            s.push_str(&format!("[p]:\n{}", format_tuple(&pser)));
            s.push_str(&format!(
                "shape: {} (window complete: {})\n",
                if shape.pass { "pass" } else { "fail" },
                shape.window_complete
            ));
            for v in &shape.violations {
                s.push_str(&format!("  ({}) coordinate {} {:?}: {}\n", v.clause, v.i, v.monomial, v.reason));
            }
            s
        }
        other => return Err(unsupported("fgl", other)),
    };
    Ok(Output::ok(body))
}

/// Splits `op x y` where the operands are bracketed vectors or bare scalars.
fn split_expr(expr: &str) -> Result<(String, Vec<String>)> {
    let expr = expr.trim();
    let (op, rest) = expr.split_once(char::is_whitespace).unwrap_or((expr, ""));
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in rest.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced brackets in {expr:?}")));
        }
        if ch.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                args.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(ch);
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced brackets in {expr:?}")));
    }
    if !cur.is_empty() {
        args.push(cur);
    }
    Ok((op.to_lowercase(), args))
}

pub fn witt(expr: &str, p: u32, e: u32, len: usize, format: Format) -> Result<Output> {
    let base = Base::new(p, e)?;
    if len == 0 {
        return Err(Error::Domain("Witt length must be at least 1".into()));
    }
    let (op, args) = split_expr(expr)?;
    let arity = match op.as_str() {
        "add" | "sub" | "mul" => 2,
        "neg" | "frob" | "ver" | "ghost" | "teich" => 1,
        other => return Err(Error::Parse(format!("unknown Witt operation {other:?}"))),
    };
    if args.len() != arity {
        return Err(Error::Parse(format!("{op} takes {arity} operand(s), got {}", args.len())));
    }
    let vec = |s: &str| WittVec::parse(base, s, len);
    let result = match op.as_str() {
        "add" => vec(&args[0])?.add(&vec(&args[1])?)?.to_string(),
        "sub" => vec(&args[0])?.sub(&vec(&args[1])?)?.to_string(),
        "mul" => vec(&args[0])?.mul(&vec(&args[1])?)?.to_string(),
        "neg" => vec(&args[0])?.neg()?.to_string(),
        "frob" => vec(&args[0])?.frobenius()?.to_string(),
        "ver" => vec(&args[0])?.verschiebung().to_string(),
        "teich" => WittVec::teichmuller(base.parse(&args[0])?, len)?.to_string(),
        "ghost" => {
            let gs: Vec<String> = vec(&args[0])?.ghosts().iter().map(ToString::to_string).collect();
            format!("({})", gs.join(", "))
        }
        _ => unreachable!("arity table covers all operations"),
    };
    let body = match format {
        Format::Text => result,
        Format::Json => serde_json::to_string_pretty(&json!({
            "p": p, "e": e, "len": len, "expr": expr, "result": result,
        }))
        .expect("serializable"),
        other => return Err(unsupported("witt", other)),
    };
    Ok(Output::ok(body))
}

pub fn sweep(count: usize, seed: u64, format: Format) -> Result<Output> {
    let mut r = sample::rng(seed);
    let mut failures: Vec<String> = Vec::new();
    let (mut cells, mut levels) = (0usize, 0usize);
    for idx in 0..count {
        let s = sample::random_triangular(&mut r)?;
        let d = &s.display;
        let t = compute_log(d, s.level as usize + 2)?;
        let rep = check_hypotheses(&t, s.level);
        if !rep.pass {
            failures.push(format!("display {idx}: hypotheses fail"));
            continue;
        }
        match h_cells(&t, s.level, &rep) {
            Ok(h) => cells += h.len(),
            Err(e) => failures.push(format!("display {idx}: {e}")),
        }
        for n in 1..=s.level {
            match canon::count_roots(&t, n) {
                Ok(_) => levels += 1,
                Err(e) => failures.push(format!("display {idx}, level {n}: {e}")),
            }
        }
    }
    let v = json!({
        "seed": seed,
        "displays": count,
        "h_cells_verified": cells,
        "root_counts_verified": levels,
        "failures": failures,
        "pass": failures.is_empty(),
    });
    let body = json_or_text(&v, format, "sweep")?;
    Ok(Output { body, code: if failures.is_empty() { 0 } else { 3 } })
}
