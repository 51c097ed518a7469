//! Truncated p-typical Witt vectors over the valuation ring of `K`.
//!
//! The ring model is torsion-free, so the ghost map is injective and every
//! operation is carried out on ghost components and transported back. The
//! transport divides by `p^n`; integrality of the resulting components is a
//! theorem, asserted at runtime.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use crate::ring::{Base, LocalFieldElem};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WittVec {
    base: Base,
    comps: Vec<LocalFieldElem>,
}

fn check_integral(x: &LocalFieldElem) -> bool {
    x.ord().at_least(&Rat::zero())
}

impl WittVec {
    pub fn new(base: Base, comps: Vec<LocalFieldElem>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::Domain("Witt vectors need length at least 1".into()));
        }
        for (i, c) in comps.iter().enumerate() {
            base.check_same(&c.base())?;
            if !check_integral(c) {
                return Err(Error::Domain(format!(
                    "Witt component x_{i} = {c} has negative valuation {}",
                    c.ord()
                )));
            }
        }
        Ok(Self { base, comps })
    }

    pub fn zero(base: Base, len: usize) -> Self {
        Self {
            base,
            comps: vec![base.zero(); len],
        }
    }

    pub fn one(base: Base, len: usize) -> Self {
        Self::teichmuller_unchecked(base.one(), len)
    }

    /// `[c] = (c, 0, ..., 0)`.
    pub fn teichmuller(c: LocalFieldElem, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Domain("Witt vectors need length at least 1".into()));
        }
        if !check_integral(&c) {
            return Err(Error::Domain(format!("Teichmuller lift of non-integral {c}")));
        }
        Ok(Self::teichmuller_unchecked(c, len))
    }

    fn teichmuller_unchecked(c: LocalFieldElem, len: usize) -> Self {
        let base = c.base();
        let mut comps = vec![base.zero(); len];
        comps[0] = c;
        Self { base, comps }
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> &[LocalFieldElem] {
        &self.comps
    }

    pub fn is_teichmuller(&self) -> bool {
        self.comps[1..].iter().all(LocalFieldElem::is_zero)
    }

    /// Truncation to the first `len` components.
    pub fn truncate(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::Index(format!("cannot truncate length {} to {len}", self.len())));
        }
        Ok(Self {
            base: self.base,
            comps: self.comps[..len].to_vec(),
        })
    }

    /// `w_n(x) = sum_{j<=n} p^j x_j^{p^{n-j}}`.
    pub fn ghost(&self, n: usize) -> Result<LocalFieldElem> {
        if n >= self.len() {
            return Err(Error::Index(format!(
                "ghost component {n} of a length-{} Witt vector",
                self.len()
            )));
        }
        let p = self.base.p as u64;
        let mut acc = self.base.zero();
        for j in 0..=n {
            let x = &self.comps[j];
            if x.is_zero() {
                continue;
            }
            let term = x.pow(p.pow((n - j) as u32)).scale(&rat::pow_p(self.base.p, j as i64));
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// All ghost components `w_0 .. w_{L-1}`; powers are built incrementally.
    pub fn ghosts(&self) -> Vec<LocalFieldElem> {
        let p = self.base.p as u64;
        let len = self.len();
        // powers[j] holds x_j^{p^{n-j}} for the current n
        let mut powers: Vec<LocalFieldElem> = Vec::with_capacity(len);
        let mut out = Vec::with_capacity(len);
        for n in 0..len {
            for pw in powers.iter_mut() {
                *pw = pw.pow(p);
            }
            powers.push(self.comps[n].clone());
            let mut acc = self.base.zero();
            for (j, pw) in powers.iter().enumerate() {
                if pw.is_zero() {
                    continue;
                }
                acc = &acc + &pw.scale(&rat::pow_p(self.base.p, j as i64));
            }
            out.push(acc);
        }
        out
    }

    /// Inverse of the ghost map: solves `w_n = sum p^j x_j^{p^{n-j}}` for the
    /// components triangularly. Fails with an internal error when a component
    /// is not integral; callers only feed ghosts of genuine Witt vectors.
    pub fn from_ghosts(base: Base, ghosts: &[LocalFieldElem]) -> Result<Self> {
        if ghosts.is_empty() {
            return Err(Error::Domain("empty ghost vector".into()));
        }
        let p = base.p as u64;
        let mut comps: Vec<LocalFieldElem> = Vec::with_capacity(ghosts.len());
        let mut powers: Vec<LocalFieldElem> = Vec::with_capacity(ghosts.len());
        for (n, w) in ghosts.iter().enumerate() {
            base.check_same(&w.base())?;
            for pw in powers.iter_mut() {
                *pw = pw.pow(p);
            }
            let mut rest = w.clone();
            for (j, pw) in powers.iter().enumerate() {
                if pw.is_zero() {
                    continue;
                }
                rest = &rest - &pw.scale(&rat::pow_p(base.p, j as i64));
            }
            let x = rest.scale(&rat::pow_p(base.p, -(n as i64)));
            if !check_integral(&x) {
                return Err(Error::Internal(format!(
                    "ghost transport produced non-integral component x_{n} = {x}"
                )));
            }
            powers.push(x.clone());
            comps.push(x);
        }
        Ok(Self { base, comps })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        self.base.check_same(&other.base)?;
        if self.len() != other.len() {
            return Err(Error::Domain(format!(
                "Witt vectors of different lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    fn ghostwise(&self, other: &Self, op: impl Fn(&LocalFieldElem, &LocalFieldElem) -> LocalFieldElem) -> Result<Self> {
        self.check_compatible(other)?;
        let ghosts: Vec<_> = self
            .ghosts()
            .iter()
            .zip(other.ghosts().iter())
            .map(|(a, b)| op(a, b))
            .collect();
        Self::from_ghosts(self.base, &ghosts)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ghostwise(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ghostwise(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ghostwise(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Result<Self> {
        let ghosts: Vec<_> = self.ghosts().iter().map(|g| -g).collect();
        Self::from_ghosts(self.base, &ghosts)
    }

    /// Multiplication by the integer `k` (ghost-wise scaling).
    pub fn scale_int(&self, k: i64) -> Result<Self> {
        let k = rat::int(k);
        let ghosts: Vec<_> = self.ghosts().iter().map(|g| g.scale(&k)).collect();
        Self::from_ghosts(self.base, &ghosts)
    }

    /// `V(x_0, x_1, ...) = (0, x_0, x_1, ...)`, truncated to the same length.
    pub fn verschiebung(&self) -> Self {
        let mut comps = Vec::with_capacity(self.len());
        comps.push(self.base.zero());
        comps.extend(self.comps[..self.len() - 1].iter().cloned());
        Self { base: self.base, comps }
    }

    /// The unique `y` of length `L-1` with `w_n(y) = w_{n+1}(x)`.
    pub fn frobenius(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::Domain("Frobenius needs Witt length at least 2".into()));
        }
        let ghosts = self.ghosts();
        Self::from_ghosts(self.base, &ghosts[1..])
    }

    /// Ghost component of a Teichmuller lift at any level: `c^{p^n}`.
    pub fn teichmuller_ghost(c: &LocalFieldElem, n: usize) -> LocalFieldElem {
        c.pow((c.base().p as u64).pow(n as u32))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(LocalFieldElem::is_zero)
    }

    /// Parses either `[c]` (Teichmuller lift) or `(x_0, x_1, ...)`.
    pub fn parse(base: Base, s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            return Self::teichmuller(base.parse(inner)?, len);
        }
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let comps = inner
                .split(',')
                .map(|c| base.parse(c))
                .collect::<Result<Vec<_>>>()?;
            return Self::from_components_padded(base, comps, len);
        }
        Err(Error::Parse(format!("expected [c] or (x0, x1, ...), got {s:?}")))
    }

    /// Pads with zeros up to `len`; rejects longer input.
    pub fn from_components_padded(base: Base, mut comps: Vec<LocalFieldElem>, len: usize) -> Result<Self> {
        if comps.len() > len {
            return Err(Error::Domain(format!(
                "{} components given for Witt length {len}",
                comps.len()
            )));
        }
        comps.resize(len, base.zero());
        Self::new(base, comps)
    }
}

impl fmt::Display for WittVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn ghost_is_zero(x: &WittVec, n: usize) -> Result<bool> {
    Ok(x.ghost(n)?.coeffs().iter().all(Zero::is_zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(p: u32, e: u32) -> Base {
        Base::new(p, e).unwrap()
    }

    fn wv(base: Base, xs: &[i64]) -> WittVec {
        WittVec::new(base, xs.iter().map(|&x| base.int(x)).collect()).unwrap()
    }

    #[test]
    fn ghost_of_all_ones() {
        let k = b(2, 1);
        let x = wv(k, &[1, 1, 1]);
        let g: Vec<_> = (0..3).map(|n| x.ghost(n).unwrap()).collect();
        assert_eq!(g, vec![k.int(1), k.int(3), k.int(7)]);
        assert_eq!(x.ghosts(), g);
        assert!(x.ghost(3).is_err());
    }

    #[test]
    fn teichmuller_ghosts_are_powers() {
        let k = b(3, 2);
        let c = k.parse("1 + pi").unwrap();
        let t = WittVec::teichmuller(c.clone(), 3).unwrap();
        for n in 0..3 {
            assert_eq!(t.ghost(n).unwrap(), c.pow(3u64.pow(n as u32)));
        }
        assert!(WittVec::teichmuller(k.zero(), 4).unwrap().is_zero());
    }

    #[test]
    fn verschiebung() {
        let k = b(3, 1);
        let x = WittVec::teichmuller(k.int(2), 3).unwrap();
        let v = x.verschiebung();
        assert_eq!(v, wv(k, &[0, 2, 0]));
        assert!(ghost_is_zero(&v, 0).unwrap());
        for n in 1..3 {
            assert_eq!(v.ghost(n).unwrap(), x.ghost(n - 1).unwrap().scale(&rat::int(3)));
        }
    }

    #[test]
    fn frobenius_examples() {
        let k = b(2, 1);
        // w(0,1,0) = (0, 2, 2): y_0 = 2, y_0^2 + 2 y_1 = 2 gives y_1 = -1
        let y = wv(k, &[0, 1, 0]).frobenius().unwrap();
        assert_eq!(y, wv(k, &[2, -1]));
        let c = k.int(5);
        let t = WittVec::teichmuller(c.clone(), 4).unwrap().frobenius().unwrap();
        assert_eq!(t, WittVec::teichmuller(c.pow(2), 3).unwrap());
        assert!(wv(k, &[1]).frobenius().is_err());
    }

    #[test]
    fn frobenius_matches_two_component_formula() {
        // F(x)_1 = x_1^p + p x_2 - sum_{i<p} C(p,i) p^{p-i-1} x_0^{ip} x_1^{p-i}
        let k = b(3, 1);
        let x = wv(k, &[2, 5, 7]);
        let y = x.frobenius().unwrap();
        let (x0, x1, x2) = (2i64, 5i64, 7i64);
        let binom = [1i64, 3, 3];
        let mut expected = x1.pow(3) + 3 * x2;
        for i in 0..3u32 {
            expected -= binom[i as usize] * 3i64.pow(3 - i - 1) * x0.pow(3 * i) * x1.pow(3 - i);
        }
        assert_eq!(y.components()[0], k.int(x0.pow(3) + 3 * x1));
        assert_eq!(y.components()[1], k.int(expected));
    }

    #[test]
    fn frobenius_of_verschiebung_is_p() {
        let k = b(3, 2);
        let x = WittVec::new(k, vec![k.parse("1 + pi").unwrap(), k.int(2), k.uniformizer()]).unwrap();
        let fvx = x.verschiebung().frobenius().unwrap();
        let px = x.scale_int(3).unwrap().truncate(2).unwrap();
        assert_eq!(fvx, px);
    }

    #[test]
    fn teichmuller_sum_p2() {
        let k = b(2, 1);
        let one = WittVec::one(k, 2);
        assert_eq!(one.add(&one).unwrap(), wv(k, &[2, -1]));
    }

    #[test]
    fn identities_and_multiplicativity() {
        let k = b(3, 2);
        let x = WittVec::new(k, vec![k.parse("2 - pi").unwrap(), k.int(4), k.zero()]).unwrap();
        assert_eq!(x.add(&WittVec::zero(k, 3)).unwrap(), x);
        assert_eq!(x.mul(&WittVec::one(k, 3)).unwrap(), x);
        let a = k.parse("1 + pi").unwrap();
        let c = k.int(2);
        let prod = WittVec::teichmuller(a.clone(), 3)
            .unwrap()
            .mul(&WittVec::teichmuller(c.clone(), 3).unwrap())
            .unwrap();
        assert_eq!(prod, WittVec::teichmuller(&a * &c, 3).unwrap());
    }

    #[test]
    fn rejects_non_integral_components() {
        let k = b(3, 2);
        let bad = k.uniformizer().div_by_p();
        assert!(WittVec::new(k, vec![k.one(), bad.clone()]).is_err());
        assert!(WittVec::teichmuller(bad, 2).is_err());
        assert!(WittVec::from_ghosts(k, &[k.zero(), k.one()]).is_err());
    }

    #[test]
    fn parse_forms() {
        let k = b(2, 1);
        assert_eq!(WittVec::parse(k, "[1]", 2).unwrap(), WittVec::one(k, 2));
        assert_eq!(WittVec::parse(k, "(2, -1)", 2).unwrap(), wv(k, &[2, -1]));
        assert_eq!(WittVec::parse(k, "(3)", 3).unwrap(), wv(k, &[3, 0, 0]));
        assert!(WittVec::parse(k, "(1,2,3)", 2).is_err());
        assert!(WittVec::parse(k, "1", 2).is_err());
        assert_eq!(wv(k, &[2, -1]).to_string(), "(2, -1)");
    }
}
