//! Canonical-subgroup certificates: the Hasse bound, the radius, root
//! counts from the diagonal logarithm series, and the torsion structure by
//! valuation bookkeeping.

use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::display::DisplayData;
use crate::error::{Error, Result};
use crate::fglog::{check_hypotheses, compute_log, hasse_bound, HypothesisReport, LogTable};
use crate::rat::{self, Rat};
use crate::tropical::{self, GridScan, HCell, JointVertices};

/// Which bound is reported alongside the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    #[default]
    Standard,
    /// Also reports what the bound `1/(p^{N-2}(p+1))` would say. Existence
    /// is never asserted under it.
    Katz,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Grid denominator; `None` means `2 p^2 (p - 1)`.
    pub grid_den: Option<u64>,
    pub jobs: usize,
    pub bound: BoundMode,
    /// Run the tropical properness scan (`g <= 2`).
    pub scan: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { grid_den: None, jobs: 1, bound: BoundMode::Standard, scan: true }
    }
}

/// `r_n`, `r'_n` and the number of points of size at least `r'_n` killed
/// by `p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shell {
    pub n: u32,
    #[serde(with = "rat::serde_rat")]
    pub r: Rat,
    #[serde(with = "rat::serde_rat")]
    pub r_prime: Rat,
    /// Roots of each diagonal series, counting zero.
    pub per_coordinate: Vec<u64>,
    pub count: u64,
}

/// `lhs rel rhs` with exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub statement: String,
    #[serde(with = "rat::serde_rat")]
    pub lhs: Rat,
    pub rel: String,
    #[serde(with = "rat::serde_rat")]
    pub rhs: Rat,
    pub holds: bool,
}

impl Inequality {
    fn new(statement: &str, lhs: Rat, rel: &str, rhs: Rat) -> Self {
        let holds = match rel {
            "<" => lhs < rhs,
            "<=" => lhs <= rhs,
            ">" => lhs > rhs,
            ">=" => lhs >= rhs,
            "=" => lhs == rhs,
            _ => unreachable!("unknown relation {rel}"),
        };
        Self { statement: statement.into(), lhs, rel: rel.into(), rhs, holds }
    }
}

/// Structure bookkeeping at one level `k`: (a) points of size `> r_k` are
/// pushed by `[p]` to size `> r_{k-1}`; (b) for `k >= 2`, `[p]` does not
/// kill points of size in `(r_k, r_1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureLevel {
    pub level: u32,
    pub killed_chain: Vec<Inequality>,
    pub not_killed: Vec<Inequality>,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub levels: Vec<StructureLevel>,
    pub shape: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KatzInfo {
    #[serde(with = "rat::serde_rat")]
    pub bound: Rat,
    pub bound_holds: bool,
    pub differs: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProperScan {
    pub n_max: usize,
    pub grid: Option<GridScan>,
    pub joint: Option<JointVertices>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub level: u32,
    pub p: u32,
    pub e: u32,
    pub g: usize,
    pub h: usize,
    #[serde(with = "rat::serde_rat")]
    pub hasse: Rat,
    #[serde(with = "rat::serde_rat")]
    pub bound: Rat,
    pub exists: bool,
    #[serde(with = "rat::serde_rat_opt")]
    pub radius_exponent: Option<Rat>,
    /// `p^{Ng}` as a decimal string.
    pub order: Option<String>,
    pub shells: Vec<Shell>,
    pub h_cells: Vec<HCell>,
    pub structure: Option<StructureReport>,
    pub hypotheses: Option<HypothesisReport>,
    pub properness: Option<ProperScan>,
    pub katz: Option<KatzInfo>,
    pub note: String,
}

fn p_power(p: u32, k: u64) -> Result<u64> {
    u32::try_from(k)
        .ok()
        .and_then(|k| (p as u64).checked_pow(k))
        .ok_or_else(|| Error::Domain(format!("p^{k} overflows 64 bits")))
}

/// Per-coordinate and total counts of points of size at least `r'_n`
/// killed by `p^n`, read off the diagonal series `sum_m a_{m,ii} X^{p^m}`.
pub fn count_roots_detail(t: &LogTable, n: u32) -> Result<(Vec<u64>, u64)> {
    if n == 0 {
        return Ok((vec![1; t.g], 1));
    }
    let p = t.base.p;
    let r_prime = tropical::shell_r_prime(p, n, &t.hasse.value);
    let per = (0..t.g)
        .map(|i| tropical::diagonal_roots(t, i, &r_prime).map(|c| c + 1))
        .collect::<Result<Vec<u64>>>()?;
    let total = per
        .iter()
        .try_fold(1u64, |acc, &c| acc.checked_mul(c))
        .ok_or_else(|| Error::Domain("root count overflows 64 bits".into()))?;
    let expected = p_power(p, n as u64 * t.g as u64)?;
    if total != expected {
        return Err(Error::Internal(format!(
            "level {n}: counted {total} points of size >= {}, expected {expected}",
            rat::to_frac_string(&r_prime)
        )));
    }
    Ok((per, total))
}

pub fn count_roots(t: &LogTable, n: u32) -> Result<u64> {
    count_roots_detail(t, n).map(|(_, c)| c)
}

/// Valuation bookkeeping behind the group structure, levels `1..=level`.
pub fn structure_certificate(t: &LogTable, level: u32) -> StructureReport {
    let p = t.base.p;
    let pr = rat::int(p as i64);
    let h = &t.hasse.value;
    let mut levels = Vec::new();
    for k in 1..=level {
        let rk = tropical::shell_r(p, k);
        let rk1 = tropical::shell_r(p, k - 1);
        // s > r_k  =>  min(p s, 1 + s) > r_{k-1}
        let killed_chain = vec![
            Inequality::new("p*r_k >= r_{k-1}", &pr * &rk, ">=", rk1.clone()),
            Inequality::new("1 + r_k > r_{k-1}", Rat::one() + &rk, ">", rk1),
        ];
        let mut not_killed = Vec::new();
        if k >= 2 {
            let r1 = tropical::shell_r(p, 1);
            not_killed.push(Inequality::new("H < (p-1)/p^k", h.clone(), "<", hasse_bound(p, k)));
            not_killed.push(Inequality::new(
                "H + (p-1)*r_1 < 1",
                h + rat::int(p as i64 - 1) * &r1,
                "<",
                Rat::one(),
            ));
            // p^2 s > H + p s for every s > r_k
            not_killed.push(Inequality::new(
                "p*(p-1)*r_k >= H",
                &pr * rat::int(p as i64 - 1) * &rk,
                ">=",
                h.clone(),
            ));
        }
        let certified = killed_chain.iter().chain(&not_killed).all(|q| q.holds);
        levels.push(StructureLevel { level: k, killed_chain, not_killed, certified });
    }
    let pass = levels.iter().all(|l| l.certified);
    let shape = match p_power(p, level as u64) {
        Ok(q) => format!("(Z/{q}Z)^{}", t.g),
        Err(_) => format!("(Z/{p}^{level}Z)^{}", t.g),
    };
    StructureReport { levels, shape, pass }
}

fn katz_info(p: u32, level: u32, h: &Rat, standard: bool) -> KatzInfo {
    // 1/(p^{N-2}(p+1))
    let bound = rat::pow_p(p, 2 - level as i64) / rat::int(p as i64 + 1);
    let bound_holds = *h < bound;
    KatzInfo {
        differs: bound_holds != standard,
        note: "informational only; existence is asserted under the standard bound alone".into(),
        bound,
        bound_holds,
    }
}

/// Runs the full pipeline at level `level >= 1`.
pub fn certify(d: &DisplayData, level: u32, opts: &CertifyOptions) -> Result<Certificate> {
    if level == 0 {
        return Err(Error::Domain("certification level must be at least 1".into()));
    }
    let p = d.base().p;
    let d = d.triangularize()?;
    let hv = d.hasse_invariant();
    let bound = hasse_bound(p, level);
    let katz = (opts.bound == BoundMode::Katz).then(|| katz_info(p, level, &hv.value, hv.value < bound));
    let mut cert = Certificate {
        level,
        p,
        e: d.base().e,
        g: d.g(),
        h: d.h(),
        hasse: hv.value.clone(),
        bound: bound.clone(),
        exists: false,
        radius_exponent: None,
        order: None,
        shells: Vec::new(),
        h_cells: Vec::new(),
        structure: None,
        hypotheses: None,
        properness: None,
        katz,
        note: String::new(),
    };
    if hv.value >= bound {
        cert.note = format!(
            "declined: H = {} is not below (p-1)/p^N = {}",
            rat::to_frac_string(&hv.value),
            rat::to_frac_string(&bound)
        );
        return Ok(cert);
    }
    let n_max = level as usize + 2;
    let t = compute_log(&d.with_len(n_max + 1)?, n_max)?;
    let report = check_hypotheses(&t, level);
    if !report.pass {
        return Err(Error::Internal(format!(
            "hypotheses fail below the Hasse bound: {}",
            serde_json::to_string(&report).unwrap_or_default()
        )));
    }
    cert.h_cells = tropical::h_cells(&t, level, &report)?;
    cert.hypotheses = Some(report);
    for n in 1..=level {
        let r = tropical::shell_r(p, n);
        let r_prime = tropical::shell_r_prime(p, n, &hv.value);
        if r_prime <= r {
            return Err(Error::Internal(format!("r'_{n} <= r_{n} below the Hasse bound")));
        }
        let (per_coordinate, count) = count_roots_detail(&t, n)?;
        cert.shells.push(Shell { n, r, r_prime, per_coordinate, count });
    }
    let structure = structure_certificate(&t, level);
    if !structure.pass {
        return Err(Error::Internal("structure inequalities fail below the Hasse bound".into()));
    }
    cert.structure = Some(structure);
    if opts.scan && d.g() <= 2 {
        cert.properness = Some(properness_scan(&d, level, opts)?);
    }
    cert.exists = true;
    cert.radius_exponent = Some(tropical::shell_r_prime(p, level, &hv.value));
    cert.order = Some(p_power(p, level as u64 * d.g() as u64)?.to_string());
    cert.note = "exists".into();
    Ok(cert)
}

/// Grid scan (and, for `g = 2`, exact joint enumeration) over
/// `(r_N, 2/(p-1)]^g`, deepening the logarithm while the stored levels
/// leave points undetermined.
fn properness_scan(d: &DisplayData, level: u32, opts: &CertifyOptions) -> Result<ProperScan> {
    let p = d.base().p;
    let q = opts.grid_den.unwrap_or_else(|| tropical::default_grid_den(p));
    let upper = rat::int(2) / rat::int(p as i64 - 1);
    let mut n_max = level as usize + 2;
    loop {
        let t = compute_log(&d.with_len(n_max + 1)?, n_max)?;
        let grid = tropical::grid_scan(&t, level, q, &upper, opts.jobs)?;
        let joint = if d.g() == 2 { Some(tropical::joint_vertices_2d(&t, level, &upper)?) } else { None };
        let violations = grid.joint_below_r_prime + grid.joint_above_top
            + joint.as_ref().map_or(0, |j| (j.below_r_prime + j.above_top) as u64);
        if violations > 0 {
            return Err(Error::Internal(format!("properness scan found {violations} violating joint points")));
        }
        let undetermined = grid.undetermined + joint.as_ref().map_or(0, |j| j.uncertified as u64);
        if undetermined == 0 || n_max >= level as usize + 10 {
            let pass = grid.pass && joint.as_ref().is_none_or(|j| j.pass);
            return Ok(ProperScan { n_max, grid: Some(grid), joint, pass });
        }
        n_max += 2;
    }
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("certificate: {e}")))
    }

    /// Indented `key: value` rendering of exactly the JSON fields.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        render_text(&self.to_json(), 0, &mut out);
        out
    }
}

/// Renders a JSON value as nested `key: value` lines.
pub fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_empty(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_empty(x) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}- {}\n", scalar(x))),
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn is_empty(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "null".into(),
        Value::Array(_) => "[]".into(),
        Value::Object(_) => "{}".into(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Base;

    fn pi_display(p: u32, e: u32) -> DisplayData {
        let k = Base::new(p, e).unwrap();
        DisplayData::from_teichmuller(k, 1, &[vec![k.uniformizer(), k.one()], vec![k.one(), k.zero()]], 2).unwrap()
    }

    fn gm(p: u32) -> DisplayData {
        DisplayData::multiplicative(Base::new(p, 1).unwrap(), 2)
    }

    #[test]
    fn pi_display_p3_level1() {
        let c = certify(&pi_display(3, 2), 1, &CertifyOptions::default()).unwrap();
        assert!(c.exists);
        assert_eq!(c.hasse, rat::frac(1, 2));
        assert_eq!(c.radius_exponent, Some(rat::frac(1, 4)));
        assert_eq!(c.order.as_deref(), Some("3"));
        assert_eq!(c.shells[0].count, 3);
        assert!(c.properness.as_ref().unwrap().pass);
    }

    #[test]
    fn pi_display_p2_declined() {
        let c = certify(&pi_display(2, 2), 1, &CertifyOptions::default()).unwrap();
        assert!(!c.exists);
        assert_eq!(c.bound, rat::frac(1, 2));
        assert!(c.shells.is_empty() && c.hypotheses.is_none());
    }

    #[test]
    fn gm_levels() {
        for p in [2u32, 3, 5] {
            for n in 1..=3u32 {
                let c = certify(&gm(p), n, &CertifyOptions::default()).unwrap();
                assert!(c.exists);
                assert_eq!(c.radius_exponent, Some(tropical::shell_r(p, n - 1)));
                assert_eq!(c.order, Some((p as u64).pow(n).to_string()));
                let counts: Vec<u64> = c.shells.iter().map(|s| s.count).collect();
                assert_eq!(counts, (1..=n).map(|k| (p as u64).pow(k)).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn count_roots_conventions() {
        let k = Base::new(3, 1).unwrap();
        let t = compute_log(&DisplayData::multiplicative(k, 5), 4).unwrap();
        assert_eq!(count_roots(&t, 0).unwrap(), 1);
        assert_eq!(count_roots(&t, 2).unwrap(), 9);
    }

    #[test]
    fn structure_levels() {
        let k = Base::new(3, 2).unwrap();
        let d = DisplayData::from_teichmuller(k, 1, &[vec![k.uniformizer(), k.one()], vec![k.one(), k.zero()]], 4)
            .unwrap();
        let t = compute_log(&d, 3).unwrap();
        let s = structure_certificate(&t, 2);
        assert!(s.levels[0].certified);
        assert!(!s.levels[1].certified);
        assert!(!s.levels[1].not_killed[0].holds);
        assert!(!s.pass);
        // N = 1: p r_1 = r_0 and 1 + r_1 > r_0
        let s1 = structure_certificate(&t, 1);
        assert!(s1.pass);
        assert_eq!(s1.levels[0].killed_chain[0].lhs, s1.levels[0].killed_chain[0].rhs);
        let tg = compute_log(&gm(3).with_len(6).unwrap(), 5).unwrap();
        assert!(structure_certificate(&tg, 4).pass);
    }

    #[test]
    fn katz_is_informational() {
        let opts = CertifyOptions { bound: BoundMode::Katz, ..CertifyOptions::default() };
        let c = certify(&pi_display(3, 2), 1, &opts).unwrap();
        let katz = c.katz.unwrap();
        // 1/(p^{-1}(p+1)) = 3/4 > 1/2
        assert_eq!(katz.bound, rat::frac(3, 4));
        assert!(katz.bound_holds && !katz.differs);
        let c = certify(&pi_display(2, 2), 1, &opts).unwrap();
        assert!(!c.exists);
        assert!(c.katz.unwrap().differs);
    }

    #[test]
    fn json_round_trip_and_text() {
        let c = certify(&pi_display(3, 2), 1, &CertifyOptions::default()).unwrap();
        let s = c.to_json_string();
        assert_eq!(Certificate::from_json_str(&s).unwrap(), c);
        assert!(s.contains("\"radius_exponent\": \"1/4\""));
        let text = c.to_text();
        assert!(text.contains("radius_exponent: 1/4"));
        assert_eq!(text, Certificate::from_json_str(&s).unwrap().to_text());
    }

    #[test]
    fn deterministic_across_jobs() {
        let k = Base::new(2, 1).unwrap();
        let d = DisplayData::from_teichmuller(k, 2, &[vec![k.one(), k.zero()], vec![k.zero(), k.one()]], 2).unwrap();
        let a = certify(&d, 2, &CertifyOptions { jobs: 1, ..CertifyOptions::default() }).unwrap();
        let b = certify(&d, 2, &CertifyOptions { jobs: 3, ..CertifyOptions::default() }).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert!(a.exists && a.order.as_deref() == Some("16"));
        assert!(a.properness.unwrap().pass);
    }
}
