//! The logarithm of the formal group of a display.
//!
//! With `a_0 = [I_g | 0]` and `p_hat = diag(p, ..., p, 1, ..., 1)` (`g` entries
//! equal to `p`), the coefficient matrices satisfy
//! `a_{n+1} = a_n w_n(M) p_hat^{-1}` and
//! `log_i = sum_j sum_n a_{n,ij} X_j^{p^n}`.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::display::{DisplayData, HasseValue};
use crate::error::{Error, Result};
use crate::matrix::{self, Mat};
use crate::rat::{self, Rat};
use crate::ring::{Base, Valuation};

/// `N_i`: a non-negative integer or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Threshold {
    Finite(u32),
    Infinite,
}

impl Threshold {
    /// Largest `n` with `(p^n - 1)/(p - 1) * U < 1`; infinite for `U = 0`.
    pub fn from_diagonal(p: u32, u: &Valuation) -> Self {
        let u = match u {
            Valuation::Infinite => return Threshold::Finite(0),
            Valuation::Finite(u) => u,
        };
        if *u == rat::int(0) {
            return Threshold::Infinite;
        }
        let one = rat::int(1);
        let mut n = 0u32;
        loop {
            let next = geometric(p, n + 1) * u;
            if next >= one {
                return Threshold::Finite(n);
            }
            n += 1;
        }
    }

    /// Whether `n <= self`.
    pub fn covers(&self, n: usize) -> bool {
        match self {
            Threshold::Infinite => true,
            Threshold::Finite(k) => n <= *k as usize,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(n) => write!(f, "{n}"),
            Threshold::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            return Ok(Threshold::Infinite);
        }
        s.parse().map(Threshold::Finite).map_err(serde::de::Error::custom)
    }
}

/// `(p^n - 1)/(p - 1) = 1 + p + ... + p^{n-1}`.
pub fn geometric(p: u32, n: u32) -> Rat {
    (rat::pow_p(p, n as i64) - rat::int(1)) / rat::int(p as i64 - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTable {
    pub base: Base,
    pub g: usize,
    pub h: usize,
    pub n_max: usize,
    /// `mats[n]` is the `g x h` matrix `a_n`.
    pub mats: Vec<Mat>,
    /// `uvals[n][i][j] = ord(a_{n,ij})`.
    pub uvals: Vec<Vec<Vec<Valuation>>>,
    pub hasse: HasseValue,
    /// `U_i`, when the tangent block is triangular mod `p`.
    pub diag: Option<Vec<Valuation>>,
    pub thresholds: Option<Vec<Threshold>>,
}

pub fn compute_log(d: &DisplayData, n_max: usize) -> Result<LogTable> {
    if n_max + 1 > d.witt_len() {
        return Err(Error::Truncation(format!(
            "n_max = {n_max} needs Witt length at least {}, display has {}",
            n_max + 1,
            d.witt_len()
        )));
    }
    let base = d.base();
    let (g, h) = (d.g(), d.h());
    let inv_p = rat::pow_p(base.p, -1);
    let mut a0 = matrix::zeros(base, g, h);
    for (i, row) in a0.iter_mut().enumerate() {
        row[i] = base.one();
    }
    let mut mats = vec![a0];
    for n in 0..n_max {
        let mut next = matrix::mul(&mats[n], d.ghost_matrix(n)?);
        for row in next.iter_mut() {
            for x in row[..g].iter_mut() {
                *x = x.scale(&inv_p);
            }
        }
        mats.push(next);
    }
    let uvals: Vec<Vec<Vec<Valuation>>> = mats
        .iter()
        .map(|a| a.iter().map(|r| r.iter().map(|x| x.ord()).collect()).collect())
        .collect();
    for (n, table) in uvals.iter().enumerate() {
        let floor = rat::int(-(n as i64));
        if table.iter().flatten().any(|u| !u.at_least(&floor)) {
            return Err(Error::Internal(format!("log coefficient at level {n} has valuation below -{n}")));
        }
    }
    let hasse = d.hasse_invariant();
    let diag = hasse.diagonal.clone();
    let thresholds = diag
        .as_ref()
        .map(|us| us.iter().map(|u| Threshold::from_diagonal(base.p, u)).collect());
    Ok(LogTable {
        base,
        g,
        h,
        n_max,
        mats,
        uvals,
        hasse,
        diag,
        thresholds,
    })
}

impl LogTable {
    pub fn u(&self, n: usize, i: usize, j: usize) -> &Valuation {
        &self.uvals[n][i][j]
    }

    /// Finite `U_i` (all of them), if available.
    pub fn diag_finite(&self) -> Option<Vec<Rat>> {
        self.diag.as_ref()?.iter().map(|u| u.finite().cloned()).collect()
    }

    /// Rows `n i j u` with 1-based `i, j`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\ti\tj\tu\n");
        for (n, table) in self.uvals.iter().enumerate() {
            for (i, row) in table.iter().enumerate() {
                for (j, u) in row.iter().enumerate() {
                    out.push_str(&format!("{n}\t{}\t{}\t{}\n", i + 1, j + 1, u.to_frac_string()));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mats: Vec<Vec<Vec<String>>> = self
            .mats
            .iter()
            .map(|a| a.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect())
            .collect();
        let uvals: Vec<Vec<Vec<String>>> = self
            .uvals
            .iter()
            .map(|t| t.iter().map(|r| r.iter().map(Valuation::to_frac_string).collect()).collect())
            .collect();
        json!({
            "p": self.base.p,
            "e": self.base.e,
            "g": self.g,
            "h": self.h,
            "n_max": self.n_max,
            "H": rat::to_frac_string(&self.hasse.value),
            "U": self.diag.as_ref().map(|us| us.iter().map(Valuation::to_frac_string).collect::<Vec<_>>()),
            "N_i": self.thresholds,
            "a": mats,
            "u": uvals,
        })
    }
}

/// A violated instance of a hypothesis: level `n`, 1-based `(i, j)`, the
/// observed valuation and the requirement it failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub u: Valuation,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub checked: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub level: u32,
    #[serde(with = "rat::serde_rat")]
    pub hasse: Rat,
    #[serde(with = "rat::serde_rat")]
    pub bound: Rat,
    pub bound_ok: bool,
    pub triangular: bool,
    pub clauses: Vec<Clause>,
    pub pass: bool,
}

/// The bound `(p - 1)/p^N`.
pub fn hasse_bound(p: u32, level: u32) -> Rat {
    rat::int(p as i64 - 1) * rat::pow_p(p, -(level as i64))
}

impl Clause {
    fn new(name: &str) -> Self {
        Self { name: name.into(), pass: true, checked: 0, witnesses: Vec::new() }
    }

    fn record(&mut self, ok: bool, w: impl FnOnce() -> Witness) {
        self.checked += 1;
        if !ok {
            self.pass = false;
            self.witnesses.push(w());
        }
    }
}

/// Checks clauses (i)-(iv) on the tangent block `1 <= i, j <= g` for all
/// stored levels.
pub fn check_hypotheses(t: &LogTable, level: u32) -> HypothesisReport {
    let bound = hasse_bound(t.base.p, level);
    let hasse = t.hasse.value.clone();
    let bound_ok = hasse < bound;
    let diag = t.diag_finite();
    let triangular = t.diag.is_some();
    let mut report = HypothesisReport {
        level,
        hasse,
        bound,
        bound_ok,
        triangular,
        clauses: Vec::new(),
        pass: false,
    };
    let (Some(us), Some(ns), true) = (diag, t.thresholds.as_ref(), bound_ok) else {
        return report;
    };
    let p = t.base.p;
    let g = t.g;
    let mut c1 = Clause::new("i");
    let mut c2 = Clause::new("ii");
    let mut c3 = Clause::new("iii");
    let mut c4 = Clause::new("iv");
    for i in 0..g {
        for j in 0..g {
            let u = t.u(0, i, j);
            let (ok, expected) = if i == j {
                (*u == Valuation::Finite(rat::int(0)), "= 0")
            } else {
                (u.is_infinite(), "= inf")
            };
            c1.record(ok, || Witness { n: 0, i: i + 1, j: j + 1, u: u.clone(), expected: expected.into() });
        }
    }
    for n in 1..=t.n_max {
        for i in 0..g {
            let u = t.u(n, i, i);
            if ns[i].covers(n) {
                let want = geometric(p, n as u32) * &us[i] - rat::int(n as i64);
                let ok = *u == Valuation::Finite(want.clone());
                c2.record(ok, || Witness {
                    n,
                    i: i + 1,
                    j: i + 1,
                    u: u.clone(),
                    expected: format!("= {}", rat::to_frac_string(&want)),
                });
            } else {
                let want = rat::int(1 - n as i64);
                c3.record(u.at_least(&want), || Witness {
                    n,
                    i: i + 1,
                    j: i + 1,
                    u: u.clone(),
                    expected: format!(">= {}", rat::to_frac_string(&want)),
                });
            }
        }
    }
    for n in 0..=t.n_max {
        for i in 0..g {
            for j in 0..g {
                let u = t.u(n, i, j);
                let want = if i > j { rat::int(1 - n as i64) } else { rat::int(-(n as i64)) };
                c4.record(u.at_least(&want), || Witness {
                    n,
                    i: i + 1,
                    j: j + 1,
                    u: u.clone(),
                    expected: format!(">= {}", rat::to_frac_string(&want)),
                });
            }
        }
    }
    report.clauses = vec![c1, c2, c3, c4];
    report.pass = report.clauses.iter().all(|c| c.pass);
    report
}
