//! Height graphs, initial sets, tropical and Newton cells, Newton polygons,
//! and the valuation-theoretic checks on the tropicalizations of the
//! logarithm coordinates.
//!
//! Everything is exact. Series coming from a [`LogTable`] are only known up
//! to level `n_max`; the remaining terms `p^m e_j` (`m > n_max`) are covered
//! by the bound `u_m >= -m`, and any query whose answer could depend on them
//! fails with [`Error::Truncation`] instead of guessing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fglog::{HypothesisReport, LogTable};
use crate::rat::{self, Rat};
use crate::ring::Valuation;

/// One point `(nu, u)` of a height graph. `tag = (n, j)` marks the term
/// `a_{n,ij} X_j^{p^n}` of a logarithm coordinate (0-based `j`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub exp: Vec<u64>,
    #[serde(with = "rat::serde_rat")]
    pub u: Rat,
    pub tag: Option<(usize, usize)>,
}

/// Unstored terms `p^m e_j` for `m >= from_level`, `j` in `vars`, each with
/// valuation at least `-m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailBound {
    pub p: u32,
    pub from_level: usize,
    pub vars: Vec<usize>,
}

impl TailBound {
    /// Lower bound for `u + <w, nu>` over all unstored terms, valid when
    /// the bound is increasing in `m` from `from_level` on.
    fn lower_bound(&self, w: &[Rat]) -> Result<Rat> {
        let pm = rat::pow_p(self.p, self.from_level as i64);
        let m = rat::int(self.from_level as i64);
        let step = rat::int(self.p as i64 - 1);
        let mut best: Option<Rat> = None;
        for &j in &self.vars {
            // p^m w_j - m is increasing for m >= m0 iff p^{m0} (p-1) w_j >= 1
            if &pm * &step * &w[j] < Rat::one() {
                return Err(Error::Truncation(format!(
                    "coordinate {} = {} too small for the stored levels",
                    j + 1,
                    rat::to_short_string(&w[j])
                )));
            }
            let v = &pm * &w[j] - &m;
            best = Some(match best {
                Some(b) if b <= v => b,
                _ => v,
            });
        }
        best.ok_or_else(|| Error::Internal("tail bound without variables".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeightGraph {
    pub g: usize,
    pub terms: Vec<Term>,
    pub tail: Option<TailBound>,
}

fn dot(w: &[Rat], nu: &[u64]) -> Rat {
    w.iter()
        .zip(nu)
        .fold(Rat::zero(), |acc, (a, &b)| acc + a * rat::int(b as i64))
}

impl HeightGraph {
    /// A finite graph from explicit `(exponent, valuation)` pairs.
    pub fn from_points(g: usize, pts: &[(Vec<u64>, Rat)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut terms = Vec::with_capacity(pts.len());
        for (exp, u) in pts {
            if exp.len() != g {
                return Err(Error::Domain(format!("exponent {exp:?} is not in {g} variables")));
            }
            if !seen.insert(exp.clone()) {
                return Err(Error::Domain(format!("duplicate exponent {exp:?}")));
            }
            terms.push(Term { exp: exp.clone(), u: u.clone(), tag: None });
        }
        Ok(Self { g, terms, tail: None })
    }

    /// `H(log_i)`: the terms `a_{n,ij} X_j^{p^n}`, `j <= g`, with the tail
    /// bound above `n_max`.
    pub fn of_log(t: &LogTable, i: usize) -> Self {
        let p = t.base.p as u64;
        let mut terms = Vec::new();
        for n in 0..=t.n_max {
            for j in 0..t.g {
                if let Valuation::Finite(u) = t.u(n, i, j) {
                    let mut exp = vec![0; t.g];
                    exp[j] = p.pow(n as u32);
                    terms.push(Term { exp, u: u.clone(), tag: Some((n, j)) });
                }
            }
        }
        Self {
            g: t.g,
            terms,
            tail: Some(TailBound { p: t.base.p, from_level: t.n_max + 1, vars: (0..t.g).collect() }),
        }
    }

    /// `H(log_i(0, ..., X_i, ..., 0))` as a one-variable graph.
    pub fn of_log_diagonal(t: &LogTable, i: usize) -> Self {
        let p = t.base.p as u64;
        let terms = (0..=t.n_max)
            .filter_map(|n| match t.u(n, i, i) {
                Valuation::Finite(u) => Some(Term { exp: vec![p.pow(n as u32)], u: u.clone(), tag: Some((n, i)) }),
                Valuation::Infinite => None,
            })
            .collect();
        Self {
            g: 1,
            terms,
            tail: Some(TailBound { p: t.base.p, from_level: t.n_max + 1, vars: vec![0] }),
        }
    }

    pub fn value(&self, k: usize, w: &[Rat]) -> Rat {
        &self.terms[k].u + dot(w, &self.terms[k].exp)
    }

    fn check_point(&self, w: &[Rat]) -> Result<()> {
        if w.len() != self.g {
            return Err(Error::Domain(format!("point has {} coordinates, expected {}", w.len(), self.g)));
        }
        if w.iter().any(|x| !x.is_positive()) {
            return Err(Error::Domain("initial sets are taken at points with positive coordinates".into()));
        }
        if self.terms.is_empty() {
            return Err(Error::Domain("empty height graph".into()));
        }
        Ok(())
    }

    /// Minimum of `u + <w, nu>` over the stored terms.
    pub fn min_value(&self, w: &[Rat]) -> Result<Rat> {
        self.check_point(w)?;
        Ok((0..self.terms.len()).map(|k| self.value(k, w)).min().expect("nonempty"))
    }

    /// Whether the unstored terms provably stay above `level` at `w`.
    fn tail_clear(&self, w: &[Rat], level: &Rat) -> Result<()> {
        if let Some(tail) = &self.tail {
            let lb = tail.lower_bound(w)?;
            if lb <= *level {
                return Err(Error::Truncation(format!(
                    "terms beyond level {} may reach the minimum at this point; increase n_max",
                    tail.from_level - 1
                )));
            }
        }
        Ok(())
    }

    /// `Inn_w`: indices of the stored terms attaining the minimum.
    pub fn inn_set(&self, w: &[Rat]) -> Result<Vec<usize>> {
        let min = self.min_value(w)?;
        self.tail_clear(w, &min)?;
        Ok((0..self.terms.len()).filter(|&k| self.value(k, w) == min).collect())
    }

    pub fn is_trop_point(&self, w: &[Rat]) -> Result<bool> {
        Ok(self.inn_set(w)?.len() >= 2)
    }

    /// The cell `P_w`: equalities among `Inn_w`, inequalities against every
    /// other stored term, and a basis of the directions of its affine span.
    pub fn cell_of(&self, w: &[Rat]) -> Result<TropCell> {
        let inn = self.inn_set(w)?;
        let first = inn[0];
        let diff = |a: usize, b: usize| -> Vec<Rat> {
            self.terms[a]
                .exp
                .iter()
                .zip(&self.terms[b].exp)
                .map(|(x, y)| rat::int(*x as i64) - rat::int(*y as i64))
                .collect()
        };
        let equalities: Vec<Constraint> = inn[1..]
            .iter()
            .map(|&k| Constraint { coeffs: diff(first, k), rhs: &self.terms[k].u - &self.terms[first].u })
            .collect();
        let inequalities: Vec<Constraint> = (0..self.terms.len())
            .filter(|k| !inn.contains(k))
            .map(|k| Constraint { coeffs: diff(first, k), rhs: &self.terms[k].u - &self.terms[first].u })
            .collect();
        let rows: Vec<Vec<Rat>> = equalities.iter().map(|c| c.coeffs.clone()).collect();
        let directions = nullspace(&rows, self.g);
        Ok(TropCell {
            point: w.to_vec(),
            terms: inn,
            dim: directions.len(),
            equalities,
            inequalities,
            directions,
        })
    }

    /// `C_w = conv(pi(Inn_w))`; exact for `g <= 2`.
    pub fn dual_cell(&self, w: &[Rat]) -> Result<NewtonCell> {
        let inn = self.inn_set(w)?;
        let pts: Vec<Vec<Rat>> = inn
            .iter()
            .map(|&k| self.terms[k].exp.iter().map(|&x| rat::int(x as i64)).collect())
            .collect();
        let vertices = match self.g {
            1 => {
                let lo = pts.iter().min().expect("nonempty").clone();
                let hi = pts.iter().max().expect("nonempty").clone();
                if lo == hi { vec![lo] } else { vec![lo, hi] }
            }
            2 => hull_2d(&pts),
            g => return Err(Error::Unsupported(format!("Newton cells are enumerated for g <= 2, got g = {g}"))),
        };
        let base = &vertices[0];
        let rows: Vec<Vec<Rat>> = vertices[1..]
            .iter()
            .map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let dim = self.g - nullspace(&rows, self.g).len();
        Ok(NewtonCell { terms: inn, vertices, dim })
    }

    /// Whether every stored term lying in the convex hull of the lifted
    /// vertices of `C_w` belongs to `Inn_w`, and conversely.
    pub fn inn_matches_lifted_hull(&self, w: &[Rat]) -> Result<bool> {
        let cell = self.dual_cell(w)?;
        let min = self.min_value(w)?;
        for k in 0..self.terms.len() {
            let proj: Vec<Rat> = self.terms[k].exp.iter().map(|&x| rat::int(x as i64)).collect();
            // the lifted vertices lie on the hyperplane u + <w, nu> = min,
            // so membership in their hull is projection-in-cell plus height
            let in_hull = point_in_cell(&proj, &cell.vertices) && self.value(k, w) == min;
            if in_hull != cell.terms.contains(&k) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Samples points of `P_w` along its directions and checks
    /// `dim C_w + dim P_w = g` and exact orthogonality of the two spans.
    pub fn check_duality(&self, w: &[Rat]) -> Result<DualityCheck> {
        let cell = self.cell_of(w)?;
        let dual = self.dual_cell(w)?;
        let mut samples = vec![w.to_vec()];
        for d in &cell.directions {
            for k in 1..=6i64 {
                for sign in [1i64, -1] {
                    let t = rat::frac(sign, k * k * 8);
                    let cand: Vec<Rat> = w.iter().zip(d).map(|(a, b)| a + &t * b).collect();
                    if cand.iter().any(|x| !x.is_positive()) {
                        continue;
                    }
                    if let Ok(inn) = self.inn_set(&cand) {
                        if cell.terms.iter().all(|k| inn.contains(k)) {
                            samples.push(cand);
                        }
                    }
                }
            }
        }
        let mut orthogonal = true;
        for a in &samples {
            for b in &samples {
                let dw: Vec<Rat> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                for v1 in &dual.vertices {
                    for v2 in &dual.vertices {
                        let dv: Vec<Rat> = v1.iter().zip(v2).map(|(x, y)| x - y).collect();
                        let ip = dw.iter().zip(&dv).fold(Rat::zero(), |acc, (x, y)| acc + x * y);
                        if !ip.is_zero() {
                            orthogonal = false;
                        }
                    }
                }
            }
        }
        Ok(DualityCheck {
            trop_dim: cell.dim,
            newton_dim: dual.dim,
            samples: samples.len(),
            complementary: cell.dim + dual.dim == self.g,
            orthogonal,
        })
    }
}

/// `<coeffs, w> (= or <=) rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    #[serde(with = "rat::serde_rat_vec")]
    pub coeffs: Vec<Rat>,
    #[serde(with = "rat::serde_rat")]
    pub rhs: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TropCell {
    #[serde(with = "rat::serde_rat_vec")]
    pub point: Vec<Rat>,
    pub terms: Vec<usize>,
    pub dim: usize,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
    #[serde(skip)]
    pub directions: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonCell {
    pub terms: Vec<usize>,
    #[serde(skip)]
    pub vertices: Vec<Vec<Rat>>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualityCheck {
    pub trop_dim: usize,
    pub newton_dim: usize,
    pub samples: usize,
    pub complementary: bool,
    pub orthogonal: bool,
}

/// Basis of `{x : rows x = 0}` by exact elimination.
fn nullspace(rows: &[Vec<Rat>], n: usize) -> Vec<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..n {
                    let t = &f * &m[r][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rat::zero(); n];
            v[free] = Rat::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

fn cross(o: &[Rat], a: &[Rat], b: &[Rat]) -> Rat {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Extreme points of a planar set, counter-clockwise (monotone chain).
fn hull_2d(pts: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut p: Vec<Vec<Rat>> = pts.to_vec();
    p.sort();
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let mut lower: Vec<Vec<Rat>> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], q).is_positive() {
            lower.pop();
        }
        lower.push(q.clone());
    }
    let mut upper: Vec<Vec<Rat>> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], q).is_positive() {
            upper.pop();
        }
        upper.push(q.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Membership of `x` in the convex hull of `vertices` (a point, a segment
/// or a counter-clockwise polygon) in dimension 1 or 2.
fn point_in_cell(x: &[Rat], vertices: &[Vec<Rat>]) -> bool {
    match vertices.len() {
        1 => x == vertices[0].as_slice(),
        2 => {
            let (a, b) = (&vertices[0], &vertices[1]);
            if x.len() == 2 && !cross(a, b, x).is_zero() {
                return false;
            }
            (0..x.len()).all(|k| {
                let (lo, hi) = if a[k] <= b[k] { (&a[k], &b[k]) } else { (&b[k], &a[k]) };
                *lo <= x[k] && x[k] <= *hi
            })
        }
        n => (0..n).all(|k| !cross(&vertices[k], &vertices[(k + 1) % n], x).is_negative()),
    }
}

/// A segment of a Newton polygon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub from: u64,
    pub to: u64,
    #[serde(with = "rat::serde_rat")]
    pub slope: Rat,
    pub length: u64,
}

/// Lower convex hull of `(x, y)` points with strictly increasing slopes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<(u64, String)>,
    pub segments: Vec<Segment>,
    #[serde(skip)]
    points: Vec<(u64, Rat)>,
}

pub fn newton_polygon(pts: &[(u64, Rat)]) -> Result<NewtonPolygon> {
    if pts.is_empty() {
        return Err(Error::Domain("Newton polygon of an empty point set".into()));
    }
    let mut p = pts.to_vec();
    p.sort_by_key(|a| a.0);
    if p.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Domain("Newton polygon points need distinct x".into()));
    }
    let as_vec = |(x, y): &(u64, Rat)| vec![rat::int(*x as i64), y.clone()];
    let mut hull: Vec<(u64, Rat)> = Vec::new();
    for q in &p {
        while hull.len() >= 2
            && !cross(&as_vec(&hull[hull.len() - 2]), &as_vec(&hull[hull.len() - 1]), &as_vec(q)).is_positive()
        {
            hull.pop();
        }
        hull.push(q.clone());
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            Segment {
                from: w[0].0,
                to: w[1].0,
                slope: (&w[1].1 - &w[0].1) / rat::int(len as i64),
                length: len,
            }
        })
        .collect();
    Ok(NewtonPolygon {
        vertices: hull.iter().map(|(x, y)| (*x, rat::to_frac_string(y))).collect(),
        segments,
        points: p,
    })
}

impl NewtonPolygon {
    /// Number of roots (with multiplicity, excluding the one accounted for
    /// by the lowest exponent) of valuation at least `r`.
    pub fn roots_in_radius(&self, r: &Rat) -> u64 {
        let bound = -r.clone();
        self.segments.iter().filter(|s| s.slope <= bound).map(|s| s.length).sum()
    }

    pub fn points(&self) -> &[(u64, Rat)] {
        &self.points
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# vertices\nx\ty\n");
        for (x, y) in &self.vertices {
            let _ = writeln!(out, "{x}\t{y}");
        }
        out.push_str("# segments\nslope\tlength\n");
        for s in &self.segments {
            let _ = writeln!(out, "{}\t{}", rat::to_frac_string(&s.slope), s.length);
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let xs: Vec<f64> = self.points.iter().map(|(x, _)| (*x as f64).max(1.0).log2()).collect();
        let ys: Vec<f64> = self.points.iter().map(|(_, y)| rat_f64(y)).collect();
        let hull: Vec<(f64, f64)> = self
            .vertices
            .iter()
            .map(|(x, y)| ((*x as f64).max(1.0).log2(), rat_f64(&rat::parse_rat(y).expect("own output"))))
            .collect();
        let mut pic = Svg::new(&xs, &ys);
        pic.polyline(&hull, "#1f5fa8", false);
        for (x, y) in xs.iter().zip(&ys) {
            pic.dot(*x, *y, "#222");
        }
        pic.caption("Newton polygon (x axis: log2 of the exponent)");
        pic.finish()
    }
}

/// Renders a rational for plotting only.
fn rat_f64(x: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(0.0)
}

/// `epsilon_{i > j}`.
pub fn epsilon(i: usize, j: usize) -> u32 {
    u32::from(i > j)
}

/// `r_n = 1/(p^n (p - 1))`.
pub fn shell_r(p: u32, n: u32) -> Rat {
    rat::pow_p(p, -(n as i64)) / rat::int(p as i64 - 1)
}

/// `r'_n = 1/(p^{n-1}(p-1)) - H/(p-1)`.
pub fn shell_r_prime(p: u32, n: u32, h: &Rat) -> Rat {
    (rat::pow_p(p, 1 - n as i64) - h) / rat::int(p as i64 - 1)
}

/// The dual cell of `conv{p^{n-1} e_i, p^n e_i}`, located on
/// `x_i = 1/(p^{n-1}(p-1)) - U_i/(p-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HCell {
    pub n: usize,
    /// 1-based coordinate index.
    pub i: usize,
    #[serde(with = "rat::serde_rat")]
    pub x: Rat,
    /// Smallest margin among the dominance inequalities (stored and tail).
    #[serde(with = "rat::serde_rat")]
    pub margin: Rat,
}

fn require_hypotheses(t: &LogTable, report: &HypothesisReport) -> Result<Vec<Rat>> {
    if !report.pass {
        return Err(Error::Domain("the hypothesis report did not pass".into()));
    }
    t.diag_finite()
        .ok_or_else(|| Error::Domain("diagonal valuations unavailable (block not triangular)".into()))
}

/// For `1 <= n <= N` and each `i`, verifies that the segment joining
/// `(p^{n-1}, u_{n-1,ii})` and `(p^n, u_{n,ii})` lies strictly below every
/// other point of the diagonal height graph, stored or not, and returns the
/// hyperplane coordinate of its dual cell.
pub fn h_cells(t: &LogTable, level: u32, report: &HypothesisReport) -> Result<Vec<HCell>> {
    let us = require_hypotheses(t, report)?;
    let p = t.base.p;
    let pp = rat::int(p as i64);
    let n_top = level as usize;
    if n_top + 1 > t.n_max {
        return Err(Error::Truncation(format!("level {level} needs n_max >= {}", n_top + 1)));
    }
    let mut out = Vec::new();
    for (i, ui) in us.iter().enumerate() {
        for n in 1..=n_top {
            let fin = |m: usize| -> Result<Rat> {
                t.u(m, i, i)
                    .finite()
                    .cloned()
                    .ok_or_else(|| Error::Internal(format!("u_{{{m},{i}{i}}} is infinite")))
            };
            let (ua, ub) = (fin(n - 1)?, fin(n)?);
            let pa = rat::pow_p(p, n as i64 - 1);
            // omega(x, y) = (u_{n-1} - u_n) x + p^{n-1} (p - 1) y
            let slope_part = &ua - &ub;
            let ycoef = &pa * (&pp - Rat::one());
            let omega = |x: &Rat, y: &Rat| &slope_part * x + &ycoef * y;
            let base = omega(&pa, &ua);
            let mut margin: Option<Rat> = None;
            let mut note = |d: Rat| {
                margin = Some(match margin.take() {
                    Some(m) if m <= d => m,
                    _ => d,
                });
            };
            for m in 0..=t.n_max {
                if m == n - 1 || m == n {
                    continue;
                }
                if let Valuation::Finite(um) = t.u(m, i, i) {
                    note(omega(&rat::pow_p(p, m as i64), um) - &base);
                }
            }
            // unstored levels: u_m >= -m, and the bound is increasing in m
            // once (u_{n-1} - u_n) p^m >= p^{n-1}
            let m0 = t.n_max as i64 + 1;
            if &slope_part * rat::pow_p(p, m0) < pa {
                return Err(Error::Truncation(format!("tail of coordinate {} not monotone at level {n}", i + 1)));
            }
            note(omega(&rat::pow_p(p, m0), &rat::int(-m0)) - &base);
            let margin = margin.expect("at least the tail term");
            if !margin.is_positive() {
                return Err(Error::Internal(format!(
                    "segment [p^{}, p^{n}] of coordinate {} is not a Newton cell (margin {})",
                    n - 1,
                    i + 1,
                    rat::to_short_string(&margin)
                )));
            }
            let x = slope_part / &ycoef;
            let closed = shell_r_prime(p, n as u32, ui);
            if x != closed {
                return Err(Error::Internal(format!(
                    "H-cell coordinate {} differs from the closed form {}",
                    rat::to_short_string(&x),
                    rat::to_short_string(&closed)
                )));
            }
            out.push(HCell { n, i: i + 1, x, margin });
        }
    }
    Ok(out)
}

/// Outcome of the pointwise properness check at a rational point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Properness {
    /// Not in the joint tropicalization; lists the 1-based coordinates
    /// whose tropical hypersurface misses the point.
    Vacuous { missing: Vec<usize> },
    /// In the joint tropicalization, and every coordinate is at least `r'`.
    Certified {
        /// For each coordinate, the `n` with the point on `H_{n,i}`.
        h_cell: Vec<Option<usize>>,
        /// For coordinates off every `H_{n,i}`, the index `j` realizing the
        /// diagonal inequality.
        diagonal: Vec<Option<usize>>,
        /// Chains `i_1 -> i_2 -> ... -> i_k` ending on an `H`-cell.
        chains: Vec<Vec<usize>>,
    },
    Violation { reason: String },
}

pub fn properness_check(t: &LogTable, level: u32, w: &[Rat]) -> Result<Properness> {
    let us = t
        .diag_finite()
        .ok_or_else(|| Error::Domain("diagonal valuations unavailable (block not triangular)".into()))?;
    let p = t.base.p;
    let g = t.g;
    let r = shell_r(p, level);
    if w.len() != g || w.iter().any(|x| *x <= r) {
        return Err(Error::Domain(format!(
            "witness must have {g} coordinates, all greater than {}",
            rat::to_frac_string(&r)
        )));
    }
    let graphs: Vec<HeightGraph> = (0..g).map(|i| HeightGraph::of_log(t, i)).collect();
    let inns = graphs.iter().map(|f| f.inn_set(w)).collect::<Result<Vec<_>>>()?;
    let missing: Vec<usize> = (0..g).filter(|&i| inns[i].len() < 2).map(|i| i + 1).collect();
    if !missing.is_empty() {
        return Ok(Properness::Vacuous { missing });
    }
    let h = &t.hasse.value;
    let r_prime = shell_r_prime(p, level, h);
    let top = shell_r(p, 0);
    if w.iter().all(|x| *x > top) {
        return Ok(Properness::Violation {
            reason: "joint tropical point with every coordinate above 1/(p-1)".into(),
        });
    }
    let tags = |i: usize| -> Vec<(usize, usize)> { inns[i].iter().filter_map(|&k| graphs[i].terms[k].tag).collect() };
    let mut h_cell = vec![None; g];
    let mut diagonal = vec![None; g];
    let p_n = rat::pow_p(p, level as i64);
    for i in 0..g {
        let tg = tags(i);
        h_cell[i] = (1..=level as usize).find(|&n| tg.contains(&(n - 1, i)) && tg.contains(&(n, i)));
        if h_cell[i].is_some() {
            continue;
        }
        let bound_for = |j: usize| rat::int(epsilon(i, j) as i64) / &p_n - &us[i] / rat::int(p as i64 - 1);
        let ok = |j: usize| &w[i] - &w[j] >= bound_for(j);
        // prefer an index appearing in the initial form, as in the proof
        let from_inn = tg.iter().map(|&(_, j)| j).find(|&j| j != i && ok(j));
        let any = (0..g).find(|&j| j != i && ok(j));
        match from_inn.or(any) {
            Some(j) => diagonal[i] = Some(j),
            None => {
                return Ok(Properness::Violation {
                    reason: format!("coordinate {} is off every H-cell and no diagonal inequality holds", i + 1),
                })
            }
        }
    }
    let mut chains = Vec::with_capacity(g);
    for i in 0..g {
        let mut chain = vec![i];
        let mut cur = i;
        while h_cell[cur].is_none() {
            let next = diagonal[cur].expect("set above");
            if chain.contains(&next) {
                return Ok(Properness::Violation {
                    reason: format!("diagonal inequalities form a cycle through coordinate {}", next + 1),
                });
            }
            chain.push(next);
            cur = next;
        }
        chains.push(chain.iter().map(|c| c + 1).collect());
    }
    if let Some(i) = (0..g).find(|&i| w[i] < r_prime) {
        return Ok(Properness::Violation {
            reason: format!(
                "joint tropical point with coordinate {} = {} below r' = {}",
                i + 1,
                rat::to_frac_string(&w[i]),
                rat::to_frac_string(&r_prime)
            ),
        });
    }
    Ok(Properness::Certified { h_cell, diagonal, chains })
}

/// Summary of an exhaustive scan of rational points `k/Q` in the box
/// `(r_N, upper]^g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridScan {
    pub denominator: u64,
    #[serde(with = "rat::serde_rat")]
    pub lower_exclusive: Rat,
    #[serde(with = "rat::serde_rat")]
    pub upper: Rat,
    #[serde(with = "rat::serde_rat")]
    pub r_prime: Rat,
    pub points: u64,
    /// Points of each coordinate's tropical hypersurface.
    pub trop_hits: Vec<u64>,
    pub joint: u64,
    pub joint_below_r_prime: u64,
    pub joint_above_top: u64,
    /// Points where the stored levels do not determine the initial set.
    pub undetermined: u64,
    /// Up to eight offending points, as `num/den` strings.
    pub examples: Vec<Vec<String>>,
    pub pass: bool,
}

#[derive(Default)]
struct ScanPart {
    points: u64,
    trop_hits: Vec<u64>,
    joint: u64,
    below: u64,
    above: u64,
    undetermined: u64,
    examples: Vec<Vec<Rat>>,
}

/// Default grid denominator `2 p^2 (p - 1)`.
pub fn default_grid_den(p: u32) -> u64 {
    2 * (p as u64).pow(2) * (p as u64 - 1)
}

/// Scans all `w` with coordinates `k/Q` in `(r_N, upper]` (`g <= 2`),
/// splitting the first coordinate among `jobs` threads. The merge is in
/// index order, so the result does not depend on `jobs`.
pub fn grid_scan(t: &LogTable, level: u32, q: u64, upper: &Rat, jobs: usize) -> Result<GridScan> {
    let g = t.g;
    if g > 2 {
        return Err(Error::Unsupported(format!("grid scans are implemented for g <= 2, got g = {g}")));
    }
    if q == 0 {
        return Err(Error::Domain("grid denominator must be positive".into()));
    }
    let p = t.base.p;
    let lower = shell_r(p, level);
    let r_prime = shell_r_prime(p, level, &t.hasse.value);
    let top = shell_r(p, 0);
    let qr = rat::int(q as i64);
    // k/Q > lower  <=>  k > lower * Q
    let k_lo = (&lower * &qr).floor().to_integer() + 1;
    let k_hi = (upper * &qr).floor().to_integer();
    let to_u64 = |x: num_bigint::BigInt| -> u64 { u64::try_from(x).unwrap_or(0) };
    let (k_lo, k_hi) = (to_u64(k_lo), to_u64(k_hi));
    let ks: Vec<u64> = if k_hi >= k_lo { (k_lo..=k_hi).collect() } else { Vec::new() };
    let graphs: Vec<HeightGraph> = (0..g).map(|i| HeightGraph::of_log(t, i)).collect();
    let coord = |k: u64| Rat::new((k as i64).into(), (q as i64).into());

    let scan_row = |k0: u64| -> ScanPart {
        let mut part = ScanPart { trop_hits: vec![0; g], ..ScanPart::default() };
        let rows: Vec<Vec<Rat>> = if g == 1 {
            vec![vec![coord(k0)]]
        } else {
            ks.iter().map(|&k1| vec![coord(k0), coord(k1)]).collect()
        };
        for w in rows {
            part.points += 1;
            let mut joint = true;
            let mut undetermined = false;
            for (i, f) in graphs.iter().enumerate() {
                match f.inn_set(&w) {
                    Ok(inn) if inn.len() >= 2 => part.trop_hits[i] += 1,
                    Ok(_) => joint = false,
                    Err(_) => undetermined = true,
                }
            }
            if undetermined {
                part.undetermined += 1;
                continue;
            }
            if joint {
                part.joint += 1;
                let below = w.iter().any(|x| *x < r_prime);
                let above = w.iter().all(|x| *x > top);
                if below {
                    part.below += 1;
                }
                if above {
                    part.above += 1;
                }
                if (below || above) && part.examples.len() < 8 {
                    part.examples.push(w.clone());
                }
            }
        }
        part
    };

    let jobs = jobs.max(1).min(ks.len().max(1));
    let chunk = ks.len().div_ceil(jobs).max(1);
    let parts: Vec<ScanPart> = std::thread::scope(|s| {
        let handles: Vec<_> = ks
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(|&k| scan_row(k)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let mut total = ScanPart { trop_hits: vec![0; g], ..ScanPart::default() };
    for part in parts {
        total.points += part.points;
        for (a, b) in total.trop_hits.iter_mut().zip(&part.trop_hits) {
            *a += b;
        }
        total.joint += part.joint;
        total.below += part.below;
        total.above += part.above;
        total.undetermined += part.undetermined;
        for e in part.examples {
            if total.examples.len() < 8 {
                total.examples.push(e);
            }
        }
    }
    Ok(GridScan {
        denominator: q,
        lower_exclusive: lower,
        upper: upper.clone(),
        r_prime,
        points: total.points,
        trop_hits: total.trop_hits,
        joint: total.joint,
        joint_below_r_prime: total.below,
        joint_above_top: total.above,
        undetermined: total.undetermined,
        examples: total
            .examples
            .iter()
            .map(|w| w.iter().map(rat::to_frac_string).collect())
            .collect(),
        pass: total.below == 0 && total.above == 0 && total.undetermined == 0,
    })
}

/// A closed segment (or point, when `from == to`) of a planar
/// tropicalization, along which the terms `terms` attain the minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropEdge {
    pub terms: (usize, usize),
    pub from: [Rat; 2],
    pub to: [Rat; 2],
    /// The unstored terms provably stay above the minimum along the edge.
    pub certified: bool,
}

/// Interval of `t` with `lo <= a + b t` (or `a + b t <= hi` style
/// constraints expressed as `c0 + c1 t >= 0`).
fn clip(interval: &mut (Option<Rat>, Option<Rat>), c0: &Rat, c1: &Rat) -> bool {
    // c0 + c1 t >= 0
    if c1.is_zero() {
        return !c0.is_negative();
    }
    let t = -c0 / c1;
    if c1.is_positive() {
        if interval.0.as_ref().is_none_or(|lo| *lo < t) {
            interval.0 = Some(t);
        }
    } else if interval.1.as_ref().is_none_or(|hi| *hi > t) {
        interval.1 = Some(t);
    }
    true
}

/// Exact tropicalization of a two-variable height graph inside the closed
/// box `[lo, hi]^2` (`lo > 0`), as a list of edges.
pub fn trop_edges_2d(f: &HeightGraph, lo: &Rat, hi: &Rat) -> Result<Vec<TropEdge>> {
    if f.g != 2 {
        return Err(Error::Unsupported("planar tropicalizations need g = 2".into()));
    }
    if !lo.is_positive() || lo >= hi {
        return Err(Error::Domain("box must satisfy 0 < lo < hi".into()));
    }
    let q = |x: u64| rat::int(x as i64);
    let mut edges: Vec<TropEdge> = Vec::new();
    let n = f.terms.len();
    for a in 0..n {
        for b in a + 1..n {
            let (ta, tb) = (&f.terms[a], &f.terms[b]);
            // <w, nu_a - nu_b> = u_b - u_a
            let nv = [q(ta.exp[0]) - q(tb.exp[0]), q(ta.exp[1]) - q(tb.exp[1])];
            let c = &tb.u - &ta.u;
            let w0 = if !nv[0].is_zero() {
                [&c / &nv[0], Rat::zero()]
            } else {
                [Rat::zero(), &c / &nv[1]]
            };
            let d = [-nv[1].clone(), nv[0].clone()];
            let mut iv: (Option<Rat>, Option<Rat>) = (None, None);
            let mut feasible = true;
            for k in 0..2 {
                // lo <= w0_k + d_k t <= hi
                feasible &= clip(&mut iv, &(&w0[k] - lo), &d[k]);
                feasible &= clip(&mut iv, &(hi - &w0[k]), &-d[k].clone());
            }
            for (cidx, tc) in f.terms.iter().enumerate() {
                if cidx == a || cidx == b {
                    continue;
                }
                // u_c + <w, nu_c> - u_a - <w, nu_a> >= 0 along the line
                let e = [q(tc.exp[0]) - q(ta.exp[0]), q(tc.exp[1]) - q(ta.exp[1])];
                let c0 = &tc.u - &ta.u + &e[0] * &w0[0] + &e[1] * &w0[1];
                let c1 = &e[0] * &d[0] + &e[1] * &d[1];
                feasible &= clip(&mut iv, &c0, &c1);
            }
            let (Some(t0), Some(t1)) = iv else { continue };
            if !feasible || t0 >= t1 {
                continue;
            }
            let at = |t: &Rat| [&w0[0] + &d[0] * t, &w0[1] + &d[1] * t];
            let (from, to) = (at(&t0), at(&t1));
            let certified = [&from, &to].iter().all(|w| f.tail_clear(w.as_slice(), &f.value(a, w.as_slice())).is_ok());
            let dup = edges.iter().any(|e| {
                (e.from == from && e.to == to) || (e.from == to && e.to == from)
            });
            if !dup {
                edges.push(TropEdge { terms: (a, b), from, to, certified });
            }
        }
    }
    Ok(edges)
}

/// Intersection of two closed segments: empty, a point, or a segment.
fn intersect_segments(a: &TropEdge, b: &TropEdge) -> Option<([Rat; 2], [Rat; 2])> {
    let sub = |x: &[Rat; 2], y: &[Rat; 2]| [&x[0] - &y[0], &x[1] - &y[1]];
    let cr = |x: &[Rat; 2], y: &[Rat; 2]| &x[0] * &y[1] - &x[1] * &y[0];
    let r = sub(&a.to, &a.from);
    let s = sub(&b.to, &b.from);
    let qp = sub(&b.from, &a.from);
    let denom = cr(&r, &s);
    let lerp = |t: &Rat| [&a.from[0] + &r[0] * t, &a.from[1] + &r[1] * t];
    if !denom.is_zero() {
        let t = cr(&qp, &s) / &denom;
        let u = cr(&qp, &r) / &denom;
        let unit = |x: &Rat| !x.is_negative() && *x <= Rat::one();
        if unit(&t) && unit(&u) {
            let pt = lerp(&t);
            return Some((pt.clone(), pt));
        }
        return None;
    }
    if !cr(&qp, &r).is_zero() {
        return None;
    }
    // collinear: project b's endpoints onto a's parameter
    let rr = &r[0] * &r[0] + &r[1] * &r[1];
    let param = |x: &[Rat; 2]| {
        let d = sub(x, &a.from);
        (&d[0] * &r[0] + &d[1] * &r[1]) / &rr
    };
    let (mut t0, mut t1) = (param(&b.from), param(&b.to));
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let lo = if t0.is_negative() { Rat::zero() } else { t0 };
    let hi = if t1 > Rat::one() { Rat::one() } else { t1 };
    if lo > hi {
        return None;
    }
    Some((lerp(&lo), lerp(&hi)))
}

/// Whether the closed segment `[a, b]` meets the region
/// `{x : sign_k * x_k > c_k  (strict) or >= (non-strict), k in idx}`.
fn segment_meets(a: &[Rat; 2], b: &[Rat; 2], conds: &[(usize, bool, Rat, bool)]) -> bool {
    // conds: (coordinate, greater?, threshold, strict?)
    let mut lo = Rat::zero();
    let mut hi = Rat::one();
    let (mut lo_open, mut hi_open) = (false, false);
    for (k, greater, c, strict) in conds {
        // x(t) = a_k + (b_k - a_k) t; want greater ? x > c : x < c
        let (x0, dx) = (a[*k].clone(), &b[*k] - &a[*k]);
        let (s0, s1) = if *greater { (x0 - c, dx) } else { (c - x0, -dx) };
        // s0 + s1 t > 0 (strict) or >= 0
        if s1.is_zero() {
            if s0.is_negative() || (*strict && s0.is_zero()) {
                return false;
            }
            continue;
        }
        let t = -&s0 / &s1;
        if s1.is_positive() {
            if t > lo || (t == lo && *strict) {
                lo_open = *strict && t >= lo;
                lo = t;
            }
        } else if t < hi || (t == hi && *strict) {
            hi_open = *strict && t <= hi;
            hi = t;
        }
    }
    lo < hi || (lo == hi && !lo_open && !hi_open)
}

/// Exact joint tropical set of two planar graphs inside `[lo, hi]^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointVertices {
    /// Pieces as `[from, to]` in `num/den` strings (a point when equal).
    pub pieces: Vec<[Vec<String>; 2]>,
    pub below_r_prime: usize,
    pub above_top: usize,
    pub uncertified: usize,
    pub pass: bool,
}

/// Enumerates `Trop(f_1) ∩ Trop(f_2) ∩ (r_N, upper]^2` exactly (`g = 2`)
/// and checks every piece against `r'` and `1/(p-1)`.
pub fn joint_vertices_2d(t: &LogTable, level: u32, upper: &Rat) -> Result<JointVertices> {
    if t.g != 2 {
        return Err(Error::Unsupported("exact joint enumeration needs g = 2".into()));
    }
    let p = t.base.p;
    let lower = shell_r(p, level);
    let r_prime = shell_r_prime(p, level, &t.hasse.value);
    let top = shell_r(p, 0);
    let e1 = trop_edges_2d(&HeightGraph::of_log(t, 0), &lower, upper)?;
    let e2 = trop_edges_2d(&HeightGraph::of_log(t, 1), &lower, upper)?;
    let mut pieces = Vec::new();
    let (mut below, mut above, mut uncertified) = (0, 0, 0);
    for a in &e1 {
        for b in &e2 {
            let Some((x, y)) = intersect_segments(a, b) else { continue };
            // drop pieces lying entirely on the excluded boundary x_k = r_N
            let inside = [(0usize, true, lower.clone(), true), (1, true, lower.clone(), true)];
            if !segment_meets(&x, &y, &inside) {
                continue;
            }
            if !(a.certified && b.certified) {
                uncertified += 1;
            }
            let low0 = [inside[0].clone(), inside[1].clone(), (0, false, r_prime.clone(), true)];
            let low1 = [inside[0].clone(), inside[1].clone(), (1, false, r_prime.clone(), true)];
            if segment_meets(&x, &y, &low0) || segment_meets(&x, &y, &low1) {
                below += 1;
            }
            if segment_meets(&x, &y, &[(0, true, top.clone(), true), (1, true, top.clone(), true)]) {
                above += 1;
            }
            pieces.push([
                x.iter().map(rat::to_frac_string).collect(),
                y.iter().map(rat::to_frac_string).collect(),
            ]);
        }
    }
    pieces.sort();
    pieces.dedup();
    Ok(JointVertices {
        pass: below == 0 && above == 0 && uncertified == 0,
        pieces,
        below_r_prime: below,
        above_top: above,
        uncertified,
    })
}

/// Minimal SVG canvas in data coordinates.
struct Svg {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    body: String,
}

const SVG_W: f64 = 480.0;
const SVG_H: f64 = 360.0;
const SVG_PAD: f64 = 36.0;

impl Svg {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        let span = |v: &[f64]| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-9 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = span(xs);
        let (y0, y1) = span(ys);
        Self { x0, x1, y0, y1, body: String::new() }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = SVG_PAD + (x - self.x0) / (self.x1 - self.x0) * (SVG_W - 2.0 * SVG_PAD);
        let sy = SVG_H - SVG_PAD - (y - self.y0) / (self.y1 - self.y0) * (SVG_H - 2.0 * SVG_PAD);
        (sx, sy)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (a, b) = self.map(x, y);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let dash = if dashed { " stroke-dasharray=\"4 3\"" } else { "" };
        let _ = writeln!(
            self.body,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            coords.join(" ")
        );
    }

    fn dot(&mut self, x: f64, y: f64, color: &str) {
        let (a, b) = self.map(x, y);
        let _ = writeln!(self.body, "  <circle cx=\"{a:.2}\" cy=\"{b:.2}\" r=\"3\" fill=\"{color}\"/>");
    }

    fn caption(&mut self, text: &str) {
        let _ = writeln!(self.body, "  <text x=\"{SVG_PAD}\" y=\"20\" font-size=\"12\">{text}</text>");
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// Planar picture of `Trop(log_1)` and `Trop(log_2)` in `[lo, hi]^2`, with
/// the lines `x_k = r'` dashed.
pub fn trop_svg_2d(t: &LogTable, level: u32, upper: &Rat) -> Result<String> {
    let p = t.base.p;
    let lower = shell_r(p, level);
    let r_prime = rat_f64(&shell_r_prime(p, level, &t.hasse.value));
    let (lo, hi) = (rat_f64(&lower), rat_f64(upper));
    let mut pic = Svg::new(&[lo, hi], &[lo, hi]);
    let colors = ["#1f5fa8", "#b8412c"];
    for i in 0..2 {
        for e in trop_edges_2d(&HeightGraph::of_log(t, i), &lower, upper)? {
            let seg = [
                (rat_f64(&e.from[0]), rat_f64(&e.from[1])),
                (rat_f64(&e.to[0]), rat_f64(&e.to[1])),
            ];
            pic.polyline(&seg, colors[i], false);
        }
    }
    pic.polyline(&[(r_prime, lo), (r_prime, hi)], "#777", true);
    pic.polyline(&[(lo, r_prime), (hi, r_prime)], "#777", true);
    for piece in joint_vertices_2d(t, level, upper)?.pieces {
        let f = |v: &Vec<String>| rat_f64(&rat::parse_rat(&v[0]).expect("own output"));
        let s = |v: &Vec<String>| rat_f64(&rat::parse_rat(&v[1]).expect("own output"));
        pic.dot(f(&piece[0]), s(&piece[0]), "#222");
    }
    pic.caption("Trop(log_1) blue, Trop(log_2) red, joint points black, r' dashed");
    Ok(pic.finish())
}

/// Edges of a planar tropicalization as TSV.
pub fn trop_edges_tsv(t: &LogTable, level: u32, upper: &Rat) -> Result<String> {
    let lower = shell_r(t.base.p, level);
    let mut out = String::from("i\tx1\ty1\tx2\ty2\tcertified\n");
    for i in 0..t.g {
        for e in trop_edges_2d(&HeightGraph::of_log(t, i), &lower, upper)? {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                rat::to_frac_string(&e.from[0]),
                rat::to_frac_string(&e.from[1]),
                rat::to_frac_string(&e.to[0]),
                rat::to_frac_string(&e.to[1]),
                e.certified
            );
        }
    }
    Ok(out)
}

/// Newton polygon of the diagonal series `log_i(0, .., X_i, .., 0)`.
pub fn diagonal_polygon(t: &LogTable, i: usize) -> Result<NewtonPolygon> {
    let f = HeightGraph::of_log_diagonal(t, i);
    newton_polygon(&f.terms.iter().map(|tm| (tm.exp[0], tm.u.clone())).collect::<Vec<_>>())
}

/// Number of nonzero roots of valuation at least `r` of the diagonal
/// series, cross-checked against the initial set at `r`.
pub fn diagonal_roots(t: &LogTable, i: usize, r: &Rat) -> Result<u64> {
    let np = diagonal_polygon(t, i)?;
    let count = np.roots_in_radius(r);
    let f = HeightGraph::of_log_diagonal(t, i);
    let inn = f.inn_set(std::slice::from_ref(r))?;
    let x_max = inn.iter().map(|&k| f.terms[k].exp[0]).max().expect("nonempty");
    let x_min = f.terms.iter().map(|tm| tm.exp[0]).min().expect("nonempty");
    if count != x_max - x_min {
        return Err(Error::Internal(format!(
            "polygon count {count} disagrees with the initial set at r (x_max = {x_max})"
        )));
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::display::DisplayData;
    use crate::fglog::{check_hypotheses, compute_log};
    use crate::ring::Base;

    fn q(n: i64, d: i64) -> Rat {
        rat::frac(n, d)
    }

    /// X + X^p/p + Y^p/p.
    fn pretrop(p: u64) -> HeightGraph {
        HeightGraph::from_points(
            2,
            &[(vec![1, 0], rat::int(0)), (vec![p, 0], rat::int(-1)), (vec![0, p], rat::int(-1))],
        )
        .unwrap()
    }

    #[test]
    fn pretrop_initial_sets() {
        let p = 3;
        let f = pretrop(p);
        // on the diagonal ray below the vertex
        assert_eq!(f.inn_set(&[q(1, 4), q(1, 4)]).unwrap(), vec![1, 2]);
        assert_eq!(f.inn_set(&[q(1, 2), q(1, 2)]).unwrap(), vec![0, 1, 2]);
        // deep in the chamber with X minimal
        assert_eq!(f.inn_set(&[q(1, 1), q(3, 1)]).unwrap(), vec![0]);
        assert!(!f.is_trop_point(&[q(1, 1), q(3, 1)]).unwrap());
        assert!(f.inn_set(&[q(0, 1), q(1, 1)]).is_err());
    }

    #[test]
    fn pretrop_three_rays() {
        let p = 3;
        let f = pretrop(p);
        let edges = trop_edges_2d(&f, &q(1, 100), &q(3, 1)).unwrap();
        assert_eq!(edges.len(), 3);
        let v = [q(1, 2), q(1, 2)];
        for e in &edges {
            assert!(e.from == v || e.to == v, "{e:?}");
        }
        // directions (-1,-1), (0,1), (p,1)
        let dirs: BTreeSet<(Rat, Rat)> = edges
            .iter()
            .map(|e| {
                let other = if e.from == v { &e.to } else { &e.from };
                let d = [&other[0] - &v[0], &other[1] - &v[1]];
                let s = if !d[1].is_zero() { d[1].abs() } else { d[0].abs() };
                (&d[0] / &s, &d[1] / &s)
            })
            .collect();
        let want: BTreeSet<(Rat, Rat)> =
            [(q(-1, 1), q(-1, 1)), (q(0, 1), q(1, 1)), (q(3, 1), q(1, 1))].into_iter().collect();
        assert_eq!(dirs, want);
    }

    #[test]
    fn cells_and_duality() {
        let f = pretrop(3);
        let w = [q(1, 4), q(1, 4)];
        let cell = f.cell_of(&w).unwrap();
        assert_eq!(cell.dim, 1);
        assert_eq!(cell.equalities.len(), 1);
        let dual = f.dual_cell(&w).unwrap();
        assert_eq!(dual.dim, 1);
        let chk = f.check_duality(&w).unwrap();
        assert!(chk.complementary && chk.orthogonal && chk.samples > 1, "{chk:?}");
        let vtx = [q(1, 2), q(1, 2)];
        assert_eq!(f.dual_cell(&vtx).unwrap().dim, 2);
        assert_eq!(f.cell_of(&vtx).unwrap().dim, 0);
        assert!(f.inn_matches_lifted_hull(&vtx).unwrap());
        assert!(f.inn_matches_lifted_hull(&w).unwrap());
    }

    #[test]
    fn trop2_segment_cell() {
        let p = 3u64;
        let f = HeightGraph::from_points(
            2,
            &[
                (vec![1, 0], rat::int(0)),
                (vec![p, 0], rat::int(-1)),
                (vec![0, p], rat::int(-1)),
                (vec![p * p, 0], rat::int(-2)),
                (vec![0, p * p], rat::int(-2)),
            ],
        )
        .unwrap();
        let u = q(1, 6);
        let w = [u.clone(), rat::int(5)];
        assert_eq!(f.inn_set(&w).unwrap(), vec![1, 3]);
        let cell = f.cell_of(&w).unwrap();
        assert_eq!(cell.equalities[0].coeffs, vec![rat::int(-6), rat::int(0)]);
        assert_eq!(&cell.equalities[0].rhs / &cell.equalities[0].coeffs[0], u);
        // the diagonal ray through (1/6, 1/6)
        let d = [q(1, 6), q(1, 6)];
        assert_eq!(f.inn_set(&d).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(f.inn_set(&[q(1, 10), q(1, 10)]).unwrap(), vec![3, 4]);
        assert!(f.inn_matches_lifted_hull(&d).unwrap());
    }

    #[test]
    fn newton_polygons() {
        // (1+X)^3 - 1 = 3X + 3X^2 + X^3 at p = 3
        let np = newton_polygon(&[(1, rat::int(1)), (2, rat::int(1)), (3, rat::int(0))]).unwrap();
        assert_eq!(np.vertices, vec![(1, "1/1".to_string()), (3, "0/1".to_string())]);
        assert_eq!(np.segments.len(), 1);
        assert_eq!(np.segments[0].slope, q(-1, 2));
        assert_eq!(np.roots_in_radius(&q(1, 2)), 2);
        assert_eq!(np.roots_in_radius(&q(2, 3)), 0);
        let single = newton_polygon(&[(1, rat::int(0))]).unwrap();
        assert!(single.segments.is_empty());
        assert_eq!(single.roots_in_radius(&q(1, 2)), 0);
        assert!(newton_polygon(&[]).is_err());
        assert!(newton_polygon(&[(1, rat::int(0)), (1, rat::int(1))]).is_err());
    }

    #[test]
    fn gm_log_polygon() {
        for p in [2u32, 3, 5] {
            let k = Base::new(p, 1).unwrap();
            let t = compute_log(&DisplayData::multiplicative(k, 6), 5).unwrap();
            let np = diagonal_polygon(&t, 0).unwrap();
            assert_eq!(np.segments.len(), 5);
            for (n, s) in np.segments.iter().enumerate() {
                let n = n as u32 + 1;
                assert_eq!(s.slope, -shell_r(p, n - 1));
                assert_eq!(s.length, (p as u64).pow(n) - (p as u64).pow(n - 1));
            }
        }
    }

    fn pi_table(p: u32, e: u32, n_max: usize) -> LogTable {
        let k = Base::new(p, e).unwrap();
        let d = DisplayData::from_teichmuller(
            k,
            1,
            &[vec![k.uniformizer(), k.one()], vec![k.one(), k.zero()]],
            n_max + 1,
        )
        .unwrap();
        compute_log(&d, n_max).unwrap()
    }

    #[test]
    fn h_cell_coordinates() {
        let k = Base::new(3, 1).unwrap();
        let t = compute_log(&DisplayData::multiplicative(k, 4), 3).unwrap();
        let rep = check_hypotheses(&t, 1);
        let cells = h_cells(&t, 1, &rep).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].x, q(1, 2));
        let t = pi_table(3, 2, 3);
        let rep = check_hypotheses(&t, 1);
        let cells = h_cells(&t, 1, &rep).unwrap();
        assert_eq!(cells[0].x, q(1, 4));
        assert!(cells[0].margin.is_positive());
    }

    #[test]
    fn h_cells_need_passing_report() {
        let t = pi_table(2, 2, 3);
        let rep = check_hypotheses(&t, 1);
        assert!(h_cells(&t, 1, &rep).is_err());
    }

    #[test]
    fn properness_g1() {
        let t = pi_table(3, 2, 3);
        // the only trop point above r_1 = 1/6 is the H-cell at 1/4
        let v = properness_check(&t, 1, &[q(1, 4)]).unwrap();
        assert!(matches!(v, Properness::Certified { .. }), "{v:?}");
        let v = properness_check(&t, 1, &[q(1, 3)]).unwrap();
        assert_eq!(v, Properness::Vacuous { missing: vec![1] });
        assert!(properness_check(&t, 1, &[q(1, 6)]).is_err());
    }

    fn block_gm(p: u32, n_max: usize) -> LogTable {
        let k = Base::new(p, 1).unwrap();
        let d = DisplayData::from_teichmuller(k, 2, &[vec![k.one(), k.zero()], vec![k.zero(), k.one()]], n_max + 1)
            .unwrap();
        compute_log(&d, n_max).unwrap()
    }

    #[test]
    fn properness_block_diagonal() {
        let t = block_gm(3, 4);
        let v = properness_check(&t, 2, &[q(1, 2), q(1, 6)]).unwrap();
        match v {
            Properness::Certified { h_cell, .. } => assert_eq!(h_cell, vec![Some(1), Some(2)]),
            other => panic!("{other:?}"),
        }
        let jv = joint_vertices_2d(&t, 2, &rat::int(1)).unwrap();
        assert!(jv.pass, "{jv:?}");
        // the four grid intersections of the H-cells
        assert_eq!(jv.pieces.len(), 4);
    }

    #[test]
    fn grid_scan_block_diagonal() {
        let t = block_gm(2, 4);
        let a = grid_scan(&t, 2, default_grid_den(2), &rat::int(2), 1).unwrap();
        let b = grid_scan(&t, 2, default_grid_den(2), &rat::int(2), 4).unwrap();
        assert_eq!(a, b);
        assert!(a.pass, "{a:?}");
        assert_eq!(a.joint, 4);
    }

    #[test]
    fn epsilon_indicator() {
        assert_eq!(epsilon(2, 1), 1);
        assert_eq!(epsilon(1, 2), 0);
        assert_eq!(epsilon(1, 1), 0);
    }
}
