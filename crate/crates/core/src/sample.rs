//! Seeded generators for random Witt vectors and triangular displays,
//! used by property sweeps, the acceptance suite and the benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::display::DisplayData;
use crate::error::Result;
use crate::fglog::hasse_bound;
use crate::rat;
use crate::ring::{Base, LocalFieldElem};
use crate::witt::WittVec;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sum c_k pi^k` with small integer `c_k`, integral by construction.
pub fn small_elem(rng: &mut SampleRng, base: Base, bound: i64) -> LocalFieldElem {
    let coeffs = (0..base.e).map(|_| rat::int(rng.gen_range(-bound..=bound))).collect();
    LocalFieldElem::from_coeffs(base, coeffs)
}

pub fn witt_vec(rng: &mut SampleRng, base: Base, len: usize) -> WittVec {
    let comps = (0..len).map(|_| small_elem(rng, base, 3)).collect();
    WittVec::new(base, comps).expect("small elements are integral")
}

/// A random base with `p` from `primes` and `e` from `1..=max_e`.
pub fn base(rng: &mut SampleRng, primes: &[u32], max_e: u32) -> Base {
    let p = *primes.choose(rng).expect("nonempty prime list");
    Base::new(p, rng.gen_range(1..=max_e)).expect("valid base")
}

/// A triangular display together with the level it was drawn for.
#[derive(Debug, Clone)]
pub struct Sample {
    pub display: DisplayData,
    pub level: u32,
}

/// Draws `w_0(A)` upper triangular mod `p` with diagonal valuations
/// `U_i = k_i/e` and `sum U_i < (p-1)/p^N`, higher Witt components and the
/// remaining blocks at random, rejecting until the determinant is a unit.
/// Entries have Witt length `N + 3`.
pub fn triangular_display(rng: &mut SampleRng, base: Base, g: usize, h: usize, level: u32) -> Result<Sample> {
    assert!(g >= 1 && h > g, "need 1 <= g < h");
    let p = base.p;
    let e = base.e;
    let bound = hasse_bound(p, level);
    let len = level as usize + 3;
    loop {
        let ks: Vec<u32> = (0..g)
            .map(|_| if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..e) })
            .collect();
        let total = rat::frac(ks.iter().sum::<u32>() as i64, e as i64);
        if total >= bound {
            continue;
        }
        let mut m = Vec::with_capacity(h);
        for i in 0..h {
            let mut row = Vec::with_capacity(h);
            for j in 0..h {
                let lead = if i < g && j < g && i == j {
                    let unit = loop {
                        let u = rng.gen_range(1..(p as i64 * p as i64));
                        if u % p as i64 != 0 {
                            break u;
                        }
                    };
                    LocalFieldElem::pi_power(base, ks[i]) * base.int(unit)
                } else if i < g && j < g && i > j {
                    small_elem(rng, base, 2) * base.int(p as i64)
                } else {
                    small_elem(rng, base, 2)
                };
                let mut comps = vec![lead];
                comps.extend((1..len).map(|_| small_elem(rng, base, 2)));
                row.push(WittVec::new(base, comps)?);
            }
            m.push(row);
        }
        if let Ok(display) = DisplayData::new(base, g, h, m) {
            return Ok(Sample { display, level });
        }
    }
}

/// A triangular display with `g <= 3`, `h <= 5`, `p` in `{2, 3}`,
/// `e` in `{1, 2, 3}` and level `N` in `{1, 2}`.
pub fn random_triangular(rng: &mut SampleRng) -> Result<Sample> {
    let b = base(rng, &[2, 3], 3);
    let g = rng.gen_range(1..=3);
    let h = rng.gen_range(g + 1..=5);
    let level = rng.gen_range(1..=2);
    triangular_display(rng, b, g, h, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displays_are_triangular_and_below_bound() {
        let mut r = rng(7);
        for _ in 0..10 {
            let s = random_triangular(&mut r).unwrap();
            let d = &s.display;
            assert!(d.is_triangular());
            assert!(d.hasse_invariant().value < hasse_bound(d.base().p, s.level));
            assert_eq!(d.witt_len(), s.level as usize + 3);
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = random_triangular(&mut rng(11)).unwrap().display;
        let b = random_triangular(&mut rng(11)).unwrap().display;
        assert_eq!(a, b);
    }
}
