//! Exact arithmetic in a totally ramified extension `K = Q_p(pi)`, `pi^e = p`.
//!
//! Elements are stored as `c_0 + c_1 pi + ... + c_{e-1} pi^{e-1}` with exact
//! rational coefficients. Because the fractional parts `i/e` are distinct, the
//! valuation of such a sum is the minimum of the valuations of its terms, so
//! `ord` is exact and cheap. The valuation is normalized by `ord(p) = 1`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// The pair `(p, e)` naming the ring model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Base {
    pub p: u32,
    pub e: u32,
}

impl Base {
    pub fn new(p: u32, e: u32) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(Error::Domain(format!("p = {p} is not a prime")));
        }
        if e == 0 {
            return Err(Error::Domain("ramification index must be at least 1".into()));
        }
        Ok(Self { p, e })
    }

    pub fn check_same(&self, other: &Base) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BaseMismatch(self.p, self.e, other.p, other.e))
        }
    }

    pub fn zero(&self) -> LocalFieldElem {
        LocalFieldElem::zero(*self)
    }

    pub fn one(&self) -> LocalFieldElem {
        LocalFieldElem::from_rat(*self, Rat::one())
    }

    pub fn int(&self, n: i64) -> LocalFieldElem {
        LocalFieldElem::from_rat(*self, rat::int(n))
    }

    pub fn rat(&self, x: Rat) -> LocalFieldElem {
        LocalFieldElem::from_rat(*self, x)
    }

    pub fn uniformizer(&self) -> LocalFieldElem {
        LocalFieldElem::pi_power(*self, 1)
    }

    pub fn parse(&self, s: &str) -> Result<LocalFieldElem> {
        LocalFieldElem::parse(*self, s)
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// An exact valuation: a rational number or `+inf` (the valuation of zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Rat),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// `self >= bound` with `+inf` above everything.
    pub fn at_least(&self, bound: &Rat) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }

    pub fn to_frac_string(&self) -> String {
        match self {
            Valuation::Finite(v) => rat::to_frac_string(v),
            Valuation::Infinite => "inf".to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(Valuation::Infinite),
            other => Ok(Valuation::Finite(rat::parse_rat(other)?)),
        }
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Valuation {
    type Output = Valuation;
    fn add(self, rhs: &Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", rat::to_short_string(v)),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_frac_string())
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Valuation::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// An element of `Q[pi]/(pi^e - p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalFieldElem {
    base: Base,
    coeffs: Vec<Rat>,
}

impl LocalFieldElem {
    pub fn zero(base: Base) -> Self {
        Self {
            base,
            coeffs: vec![Rat::zero(); base.e as usize],
        }
    }

    pub fn from_rat(base: Base, x: Rat) -> Self {
        let mut out = Self::zero(base);
        out.coeffs[0] = x;
        out
    }

    /// `pi^k` for any `k >= 0`, reduced by `pi^e = p`.
    pub fn pi_power(base: Base, k: u32) -> Self {
        let mut out = Self::zero(base);
        let e = base.e;
        out.coeffs[(k % e) as usize] = rat::pow_p(base.p, (k / e) as i64);
        out
    }

    /// Coefficients are given for `pi^0 .. pi^{len-1}` and reduced modulo `pi^e - p`.
    pub fn from_coeffs(base: Base, coeffs: Vec<Rat>) -> Self {
        let mut out = Self::zero(base);
        for (k, c) in coeffs.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = k as u32;
            let scale = rat::pow_p(base.p, (k / base.e) as i64);
            out.coeffs[(k % base.e) as usize] += c * scale;
        }
        out
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// `min_i (ord_p(c_i) + i/e)`, or `+inf` for zero.
    pub fn ord(&self) -> Valuation {
        let e = self.base.e as i64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| Rat::new(BigInt::from(rat::vp(self.base.p, c) * e + i as i64), BigInt::from(e)))
            .min()
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    /// Image in the residue field `F_p` (the ring is totally ramified).
    pub fn residue(&self) -> Result<u32> {
        if !self.ord().at_least(&Rat::zero()) {
            return Err(Error::Domain(format!(
                "residue of {self} with negative valuation {}",
                self.ord()
            )));
        }
        rat::mod_p(self.base.p, &self.coeffs[0])
            .ok_or_else(|| Error::Internal("integral element with p in a denominator".into()))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.base.check_same(&other.base)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.base.check_same(&other.base)?;
        Ok(self * other)
    }

    pub fn div_by_p(&self) -> Self {
        let p = rat::int(self.base.p as i64);
        self.map_coeffs(|c| c / &p)
    }

    pub fn scale(&self, x: &Rat) -> Self {
        self.map_coeffs(|c| c * x)
    }

    fn map_coeffs(&self, f: impl Fn(&Rat) -> Rat) -> Self {
        Self {
            base: self.base,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = self.base.one();
        let mut sq = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            k >>= 1;
            if k > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Multiplicative inverse in the field `K`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("inverse of zero".into()));
        }
        let e = self.base.e as usize;
        if e == 1 {
            return Ok(self.map_coeffs(|c| c.recip()));
        }
        // Solve (self * x) = 1 as an e x e linear system over Q.
        // Column k of the multiplication matrix is self * pi^k.
        let mut rows: Vec<Vec<Rat>> = vec![vec![Rat::zero(); e + 1]; e];
        for k in 0..e {
            let col = self * &LocalFieldElem::pi_power(self.base, k as u32);
            for (i, row) in rows.iter_mut().enumerate() {
                row[k] = col.coeffs[i].clone();
            }
        }
        rows[0][e] = Rat::one();
        let sol = solve_dense(rows)
            .ok_or_else(|| Error::Internal("multiplication map of a nonzero element is singular".into()))?;
        Ok(Self {
            base: self.base,
            coeffs: sol,
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.base.check_same(&other.base)?;
        Ok(self * &other.inv()?)
    }

    pub fn parse(base: Base, s: &str) -> Result<Self> {
        parse_elem(base, s)
    }
}

/// Gauss-Jordan on an augmented n x (n+1) system with a unique solution.
fn solve_dense(mut rows: Vec<Vec<Rat>>) -> Option<Vec<Rat>> {
    let n = rows.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, piv);
        let inv = rows[col][col].recip();
        for x in rows[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let pivot_row = rows[col].clone();
                for (x, y) in rows[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(rows.into_iter().map(|r| r[n].clone()).collect())
}

impl Add for &LocalFieldElem {
    type Output = LocalFieldElem;
    fn add(self, rhs: &LocalFieldElem) -> LocalFieldElem {
        assert_eq!(self.base, rhs.base, "mixed bases in addition");
        LocalFieldElem {
            base: self.base,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LocalFieldElem {
    type Output = LocalFieldElem;
    fn sub(self, rhs: &LocalFieldElem) -> LocalFieldElem {
        assert_eq!(self.base, rhs.base, "mixed bases in subtraction");
        LocalFieldElem {
            base: self.base,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &LocalFieldElem {
    type Output = LocalFieldElem;
    fn neg(self) -> LocalFieldElem {
        self.map_coeffs(|c| -c)
    }
}

impl Mul for &LocalFieldElem {
    type Output = LocalFieldElem;
    fn mul(self, rhs: &LocalFieldElem) -> LocalFieldElem {
        assert_eq!(self.base, rhs.base, "mixed bases in multiplication");
        let e = self.base.e as usize;
        if e == 1 {
            return LocalFieldElem {
                base: self.base,
                coeffs: vec![&self.coeffs[0] * &rhs.coeffs[0]],
            };
        }
        let mut out = vec![Rat::zero(); e];
        let p = rat::int(self.base.p as i64);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = a * b;
                if i + j >= e {
                    out[i + j - e] += t * &p;
                } else {
                    out[i + j] += t;
                }
            }
        }
        LocalFieldElem {
            base: self.base,
            coeffs: out,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LocalFieldElem {
            type Output = LocalFieldElem;
            fn $m(self, rhs: LocalFieldElem) -> LocalFieldElem {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LocalFieldElem {
    type Output = LocalFieldElem;
    fn neg(self) -> LocalFieldElem {
        -&self
    }
}

impl fmt::Display for LocalFieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &Rat::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => "pi".to_string(),
                _ => format!("pi^{k}"),
            };
            if k == 0 {
                write!(f, "{}", rat::to_short_string(&mag))?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", rat::to_short_string(&mag))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Parses sums like `1/2*pi + 3`, `-pi^2`, `2 - pi`. Powers of `pi` at or
/// above `e` are reduced with `pi^e = p`.
fn parse_elem(base: Base, src: &str) -> Result<LocalFieldElem> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty element string".into()));
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    for ch in s.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with('^') {
            terms.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
        } else if ch == '+' || ch == '-' {
            if ch == '-' {
                neg = !neg;
            }
        } else {
            cur.push(ch);
        }
    }
    if cur.is_empty() {
        return Err(Error::Parse(format!("dangling sign in {src:?}")));
    }
    terms.push((neg, cur));

    let mut acc = LocalFieldElem::zero(base);
    for (neg, t) in terms {
        let (coef, power) = parse_term(&t).map_err(|m| Error::Parse(format!("{m} in {src:?}")))?;
        let coef = if neg { -coef } else { coef };
        let term = LocalFieldElem::pi_power(base, power).scale(&coef);
        acc = &acc + &term;
    }
    Ok(acc)
}

fn parse_term(t: &str) -> std::result::Result<(Rat, u32), String> {
    let parse_pi = |s: &str| -> std::result::Result<u32, String> {
        if s == "pi" {
            Ok(1)
        } else if let Some(k) = s.strip_prefix("pi^") {
            k.parse::<u32>().map_err(|_| format!("bad exponent {k:?}"))
        } else {
            Err(format!("bad term {s:?}"))
        }
    };
    if let Some((c, m)) = t.split_once('*') {
        let coef = rat::parse_rat(c).map_err(|_| format!("bad coefficient {c:?}"))?;
        Ok((coef, parse_pi(m)?))
    } else if t.starts_with("pi") {
        Ok((Rat::one(), parse_pi(t)?))
    } else {
        let coef = rat::parse_rat(t).map_err(|_| format!("bad term {t:?}"))?;
        Ok((coef, 0))
    }
}
