//! Multivariate power series over `K` truncated at a total degree, with no
//! constant term.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::ring::{Base, LocalFieldElem};

pub type Monomial = Vec<u32>;

pub fn total_degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    base: Base,
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, LocalFieldElem>,
}

impl TruncatedSeries {
    pub fn zero(base: Base, nvars: usize, degree: u32) -> Self {
        Self {
            base,
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The coordinate `X_i` (0-based).
    pub fn var(base: Base, nvars: usize, i: usize, degree: u32) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut s = Self::zero(base, nvars, degree);
        s.add_term(m, base.one());
        s
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Total-degree cutoff `D`: monomials of degree `> D` are dropped.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LocalFieldElem)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[u32]) -> LocalFieldElem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.base.zero())
    }

    /// Adds `c * X^m`; ignores terms above the cutoff. Panics on a constant
    /// term or a wrong number of variables.
    pub fn add_term(&mut self, m: Monomial, c: LocalFieldElem) {
        assert_eq!(m.len(), self.nvars, "monomial arity");
        let d = total_degree(&m);
        assert!(d > 0, "truncated series carry no constant term");
        if d > self.degree || c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.base, other.base, "series over different bases");
        assert_eq!(self.nvars, other.nvars, "series in different numbers of variables");
    }

    /// Drops everything above degree `d`.
    pub fn truncate(&self, d: u32) -> Self {
        let degree = d.min(self.degree);
        Self {
            base: self.base,
            nvars: self.nvars,
            degree,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| total_degree(m) <= degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        let mut out = Self::zero(self.base, self.nvars, self.degree);
        for (m, c) in self.terms.iter().filter(|(m, _)| total_degree(m) == d) {
            out.terms.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.truncate(self.degree.min(other.degree));
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &LocalFieldElem) -> Self {
        let mut out = Self::zero(self.base, self.nvars, self.degree);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn scale_rat(&self, k: &Rat) -> Self {
        self.scale(&self.base.rat(k.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let degree = self.degree.min(other.degree);
        let mut out = Self::zero(self.base, self.nvars, degree);
        for (ma, ca) in &self.terms {
            let da = total_degree(ma);
            for (mb, cb) in &other.terms {
                if da + total_degree(mb) > degree {
                    continue;
                }
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// `self^k` for `k >= 1`.
    pub fn pow(&self, k: u32) -> Self {
        assert!(k >= 1, "power of a series without constant term");
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `self(subs_0, ..., subs_{k-1})`; each substituted series lacks a
    /// constant term, so the result is well defined modulo the cutoff.
    pub fn compose(&self, subs: &[TruncatedSeries]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::Domain(format!(
                "composing a {}-variable series with {} series",
                self.nvars,
                subs.len()
            )));
        }
        let first = subs
            .first()
            .ok_or_else(|| Error::Domain("composition with no variables".into()))?;
        let (base, nvars) = (first.base, first.nvars);
        let degree = subs.iter().map(|s| s.degree).min().unwrap_or(self.degree).min(self.degree);
        for s in subs {
            s.check_compatible(first);
        }
        let subs: Vec<_> = subs.iter().map(|s| s.truncate(degree)).collect();
        // powers[v][k-1] = subs[v]^k, built on demand
        let mut powers: Vec<Vec<TruncatedSeries>> = subs.iter().map(|s| vec![s.clone()]).collect();
        let mut out = Self::zero(base, nvars, degree);
        for (m, c) in &self.terms {
            if total_degree(m) > degree {
                continue;
            }
            let mut prod: Option<TruncatedSeries> = None;
            for (v, &k) in m.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[v].len() < k as usize {
                    let next = powers[v].last().expect("nonempty").mul(&subs[v]);
                    powers[v].push(next);
                }
                let pv = &powers[v][k as usize - 1];
                prod = Some(match prod {
                    None => pv.clone(),
                    Some(p) => p.mul(pv),
                });
            }
            let prod = prod.expect("no constant term");
            out = out.add(&prod.scale(c));
        }
        Ok(out)
    }

    /// Re-expresses the series in `nvars` variables, sending variable `v` to
    /// variable `map[v]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(self.base, nvars, self.degree);
        for (m, c) in &self.terms {
            let mut nm = vec![0; nvars];
            for (v, &k) in m.iter().enumerate() {
                nm[map[v]] += k;
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Sets the listed variables to zero.
    pub fn restrict_zero(&self, vars: &[usize]) -> Self {
        let mut out = Self::zero(self.base, self.nvars, self.degree);
        for (m, c) in &self.terms {
            if vars.iter().all(|&v| m[v] == 0) {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Same terms, up to the smaller of the two cutoffs.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let d = self.degree.min(other.degree);
        self.truncate(d).terms == other.truncate(d).terms
    }
}

fn format_monomial(m: &[u32]) -> String {
    m.iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(v, &k)| if k == 1 { format!("X{}", v + 1) } else { format!("X{}^{k}", v + 1) })
        .collect::<Vec<_>>()
        .join("*")
}

/// Lexicographic order of exponent vectors; `0` for the empty series.
impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mono = format_monomial(m);
            let cs = c.to_string();
            let simple = c.coeffs().iter().skip(1).all(num_traits::Zero::is_zero);
            parts.push(if c.is_one() {
                mono
            } else if simple {
                format!("{cs}*{mono}")
            } else {
                format!("({cs})*{mono}")
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn k() -> Base {
        Base::new(3, 2).unwrap()
    }

    #[test]
    fn truncated_product() {
        let x = TruncatedSeries::var(k(), 1, 0, 4);
        let one_plus = x.add(&x.mul(&x)); // X + X^2
        let sq = one_plus.pow(3); // X^3 + 3X^4 + ...
        assert_eq!(sq.coeff(&[3]), k().int(1));
        assert_eq!(sq.coeff(&[4]), k().int(3));
        assert_eq!(sq.coeff(&[5]), k().zero());
        assert_eq!(sq.len(), 2);
    }

    #[test]
    fn compose_and_embed() {
        let kb = k();
        let x = TruncatedSeries::var(kb, 2, 0, 5);
        let y = TruncatedSeries::var(kb, 2, 1, 5);
        // f(T) = T + T^2
        let t = TruncatedSeries::var(kb, 1, 0, 5);
        let f = t.add(&t.mul(&t));
        let g = f.compose(&[x.add(&y)]).unwrap();
        assert_eq!(g.coeff(&[1, 1]), kb.int(2));
        assert_eq!(g.coeff(&[0, 2]), kb.int(1));
        let e = f.embed(2, &[1]);
        assert_eq!(e.coeff(&[0, 2]), kb.int(1));
        assert_eq!(g.restrict_zero(&[1]), f.embed(2, &[0]));
        assert!(f.compose(&[x.clone(), y.clone()]).is_err());
    }

    #[test]
    fn display_format() {
        let kb = k();
        let mut s = TruncatedSeries::zero(kb, 2, 4);
        s.add_term(vec![1, 0], kb.one());
        s.add_term(vec![0, 3], kb.rat(rat::frac(-1, 2)));
        s.add_term(vec![2, 1], kb.parse("pi + 1").unwrap());
        assert_eq!(s.to_string(), "-1/2*X2^3 + X1 + (pi + 1)*X1^2*X2");
        assert_eq!(TruncatedSeries::zero(kb, 1, 3).to_string(), "0");
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = TruncatedSeries::var(k(), 1, 0, 3);
        assert!(x.sub(&x).is_empty());
    }
}
