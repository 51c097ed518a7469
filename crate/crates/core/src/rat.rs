//! Helpers around `BigRational`: p-adic valuation, the `num/den` text form,
//! and serde adapters used by the JSON outputs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `p^k` as a rational, for any integer `k`.
pub fn pow_p(p: u32, k: i64) -> Rat {
    let base = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rat::from_integer(base)
    } else {
        Rat::new(BigInt::one(), base)
    }
}

fn vp_int(p: &BigInt, n: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp(p: u32, x: &Rat) -> i64 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    vp_int(&p, x.numer()) - vp_int(&p, x.denom())
}

/// Reduce a p-integral rational modulo p.
pub fn mod_p(p: u32, x: &Rat) -> Option<u32> {
    let pb = BigInt::from(p);
    let den = x.denom().mod_floor(&pb);
    if den.is_zero() {
        return None;
    }
    let num = x.numer().mod_floor(&pb);
    // den^(p-2) is the inverse modulo p
    let inv = den.modpow(&BigInt::from(p - 2), &pb);
    let r = (num * inv).mod_floor(&pb);
    Some(r.try_into().expect("residue fits in u32"))
}

/// Always `num/den`, including integers (`3/1`) and zero (`0/1`).
pub fn to_frac_string(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Short form: `3`, `-1/2`.
pub fn to_short_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(n))
        }
    }
}

pub fn min_rat<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> Option<Rat> {
    xs.into_iter().min().cloned()
}

pub mod serde_rat {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_frac_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(de::Error::custom)
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::{de, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&to_frac_string(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(de::Error::custom))
            .collect()
    }
}

pub mod serde_rat_opt {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&to_frac_string(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rat>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|s| parse_rat(&s).map_err(de::Error::custom)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_of_rationals() {
        assert_eq!(vp(3, &frac(9, 2)), 2);
        assert_eq!(vp(3, &frac(2, 27)), -3);
        assert_eq!(vp(2, &int(-12)), 2);
    }

    #[test]
    fn residues() {
        assert_eq!(mod_p(3, &int(4)), Some(1));
        assert_eq!(mod_p(3, &frac(1, 2)), Some(2));
        assert_eq!(mod_p(3, &frac(1, 3)), None);
        assert_eq!(mod_p(5, &int(-1)), Some(4));
    }

    #[test]
    fn text_forms() {
        assert_eq!(to_frac_string(&int(3)), "3/1");
        assert_eq!(to_frac_string(&Rat::zero()), "0/1");
        assert_eq!(to_short_string(&frac(-2, 4)), "-1/2");
        assert_eq!(parse_rat(" -6/4 ").unwrap(), frac(-3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(pow_p(2, -3), frac(1, 8));
    }
}
