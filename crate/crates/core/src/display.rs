//! Displays: the structure matrix of `F` (on the tangent block) and `V^{-1}`
//! (on the complementary block) with respect to a normal basis.
//!
//! Convention: `F e_j = sum_i alpha_ij e_i`, so column `j` of `M` is the image
//! of `e_j`. The first `g` basis vectors span the tangent block; `A` is the
//! upper-left `g x g` block of `M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, Mat};
use crate::rat::{self, Rat};
use crate::ring::{Base, LocalFieldElem, Valuation};
use crate::witt::WittVec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplayData {
    base: Base,
    g: usize,
    h: usize,
    len: usize,
    m: Vec<Vec<WittVec>>,
    /// `ghosts[n]` is `w_n(M)`.
    ghosts: Vec<Mat>,
}

/// On-disk form of a display.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplayFile {
    pub p: u32,
    pub e: u32,
    pub g: usize,
    pub h: usize,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "M")]
    pub m: Vec<Vec<Vec<String>>>,
}

impl DisplayData {
    pub fn new(base: Base, g: usize, h: usize, m: Vec<Vec<WittVec>>) -> Result<Self> {
        if g == 0 || h < g {
            return Err(Error::InvalidDisplay(format!("need 1 <= g <= h, got g = {g}, h = {h}")));
        }
        if m.len() != h || m.iter().any(|r| r.len() != h) {
            return Err(Error::InvalidDisplay(format!("structure matrix must be {h} x {h}")));
        }
        let len = m[0][0].len();
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                base.check_same(&x.base())?;
                if x.len() != len {
                    return Err(Error::InvalidDisplay(format!(
                        "entry ({}, {}) has Witt length {}, expected {len}",
                        i + 1,
                        j + 1,
                        x.len()
                    )));
                }
            }
        }
        let mut ghosts = vec![matrix::zeros(base, h, h); len];
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                for (n, w) in x.ghosts().into_iter().enumerate() {
                    ghosts[n][i][j] = w;
                }
            }
        }
        let d = matrix::det(&ghosts[0]);
        if d.ord() != Valuation::Finite(Rat::from_integer(0.into())) {
            return Err(Error::InvalidDisplay(format!(
                "det w_0(M) = {d} is not a unit (ord = {})",
                d.ord()
            )));
        }
        Ok(Self { base, g, h, len, m, ghosts })
    }

    /// Builds a display whose entries are Teichmuller lifts.
    pub fn from_teichmuller(base: Base, g: usize, entries: &[Vec<LocalFieldElem>], len: usize) -> Result<Self> {
        let m = entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| WittVec::teichmuller(c.clone(), len))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, g, entries.len(), m)
    }

    /// The multiplicative group: `g = h = 1`, `M = ([1])`.
    pub fn multiplicative(base: Base, len: usize) -> Self {
        Self::from_teichmuller(base, 1, &[vec![base.one()]], len).expect("[1] is a display")
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Common Witt length `L` of the entries.
    pub fn witt_len(&self) -> usize {
        self.len
    }

    pub fn entries(&self) -> &[Vec<WittVec>] {
        &self.m
    }

    pub fn ghost_matrix(&self, n: usize) -> Result<&Mat> {
        self.ghosts.get(n).ok_or_else(|| {
            Error::Index(format!("ghost level {n} of a display with Witt length {}", self.len))
        })
    }

    /// `w_0(A)`, the Teichmuller-component lift of `dV` on the tangent space.
    pub fn dv_lift(&self) -> Mat {
        matrix::leading_block(&self.ghosts[0], self.g)
    }

    /// Truncates every entry to Witt length `len`.
    pub fn truncate(&self, len: usize) -> Result<Self> {
        let m = self
            .m
            .iter()
            .map(|r| r.iter().map(|x| x.truncate(len)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.base, self.g, self.h, m)
    }

    /// Truncates or zero-pads every entry to Witt length `len`. Entries are
    /// read as Witt vectors whose unlisted components vanish, so padding
    /// describes the same display at a greater length.
    pub fn with_len(&self, len: usize) -> Result<Self> {
        if len <= self.len {
            return self.truncate(len);
        }
        let m = self
            .m
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| WittVec::from_components_padded(self.base, x.components().to_vec(), len))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.base, self.g, self.h, m)
    }

    /// `ord(w_0(alpha_ij)) >= 1` for all `i > j` inside the tangent block.
    pub fn is_triangular(&self) -> bool {
        let a = &self.ghosts[0];
        (0..self.g).all(|j| (j + 1..self.g).all(|i| a[i][j].ord().at_least(&rat::int(1))))
    }

    pub fn hasse_invariant(&self) -> HasseValue {
        let a0 = self.dv_lift();
        let det_ord = matrix::det(&a0).ord();
        let one = rat::int(1);
        let value = match &det_ord {
            Valuation::Finite(v) if *v < one => v.clone(),
            _ => one,
        };
        let triangular = self.is_triangular();
        let diagonal = triangular.then(|| (0..self.g).map(|i| a0[i][i].ord()).collect());
        HasseValue { value, det_ord, diagonal }
    }

    /// Conjugates into a basis in which `w_0(A)` is upper triangular mod `p`.
    ///
    /// At each step an eigenvector `v` of the `p`-linear map
    /// `v -> w_0(A) v^(p)` on the remaining block is searched over the
    /// representatives of `R/pR`, and the basis is changed by Teichmuller
    /// lifts so that `v` becomes the next basis vector.
    pub fn triangularize(&self) -> Result<Self> {
        if self.is_triangular() {
            return Ok(self.clone());
        }
        let before = self.hasse_invariant().value;
        let mut cur = self.clone();
        for k in 0..self.g.saturating_sub(1) {
            let sub: Mat = cur.ghosts[0][k..self.g]
                .iter()
                .map(|r| r[k..self.g].to_vec())
                .collect();
            let Some(v) = find_eigenvector(self.base, &sub) else {
                return Err(Error::ExtensionRequired(format!(
                    "the residue Frobenius block at step {} has no eigenvector over the residue ring",
                    k + 1
                )));
            };
            let k0 = v.iter().position(|x| x.is_one()).expect("normalized eigenvector");
            // columns: v, then the standard vectors other than e_{k0}
            let mut s_t = matrix::identity(self.base, self.h);
            for r in 0..sub.len() {
                s_t[k + r][k + r] = self.base.zero();
            }
            let mut col = k + 1;
            for (r, x) in v.iter().enumerate() {
                s_t[k + r][k] = x.clone();
            }
            for idx in 0..sub.len() {
                if idx != k0 {
                    s_t[k + idx][col] = self.base.one();
                    col += 1;
                }
            }
            cur = cur.change_basis(&s_t)?;
        }
        if !cur.is_triangular() {
            return Err(Error::Internal("triangularization left a non-triangular block".into()));
        }
        if cur.hasse_invariant().value != before {
            return Err(Error::Internal("Hasse invariant changed under change of basis".into()));
        }
        Ok(cur)
    }

    /// `M' = S^{-1} M F(S)` for a matrix `S` of Teichmuller lifts that is the
    /// identity outside the tangent block, computed on ghost components.
    fn change_basis(&self, s: &Mat) -> Result<Self> {
        let p = self.base.p as u64;
        let ghost_s = |n: usize| -> Mat {
            s.iter()
                .map(|r| r.iter().map(|c| c.pow(p.pow(n as u32))).collect())
                .collect()
        };
        let mut new_ghosts = Vec::with_capacity(self.len);
        let mut cur_s = ghost_s(0);
        for n in 0..self.len {
            let next_s = ghost_s(n + 1);
            let inv = matrix::inverse(&cur_s)?;
            new_ghosts.push(matrix::mul(&matrix::mul(&inv, &self.ghosts[n]), &next_s));
            cur_s = next_s;
        }
        let mut m = Vec::with_capacity(self.h);
        for i in 0..self.h {
            let mut row = Vec::with_capacity(self.h);
            for j in 0..self.h {
                let gh: Vec<_> = new_ghosts.iter().map(|w| w[i][j].clone()).collect();
                row.push(WittVec::from_ghosts(self.base, &gh)?);
            }
            m.push(row);
        }
        Self::new(self.base, self.g, self.h, m)
    }

    pub fn to_file(&self) -> DisplayFile {
        let m = self
            .m
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        let comps = x.components();
                        let keep = comps.iter().rposition(|c| !c.is_zero()).map_or(1, |k| k + 1);
                        comps[..keep].iter().map(ToString::to_string).collect()
                    })
                    .collect()
            })
            .collect();
        DisplayFile {
            p: self.base.p,
            e: self.base.e,
            g: self.g,
            h: self.h,
            len: self.len,
            m,
        }
    }

    pub fn from_file(f: &DisplayFile) -> Result<Self> {
        let base = Base::new(f.p, f.e)?;
        if f.len == 0 {
            return Err(Error::InvalidDisplay("L must be at least 1".into()));
        }
        if f.m.len() != f.h {
            return Err(Error::InvalidDisplay(format!("M has {} rows, expected h = {}", f.m.len(), f.h)));
        }
        let mut m = Vec::with_capacity(f.h);
        for (i, row) in f.m.iter().enumerate() {
            if row.len() != f.h {
                return Err(Error::InvalidDisplay(format!(
                    "row {} of M has {} entries, expected h = {}",
                    i + 1,
                    row.len(),
                    f.h
                )));
            }
            let mut out = Vec::with_capacity(f.h);
            for (j, comps) in row.iter().enumerate() {
                let elems = comps
                    .iter()
                    .map(|s| base.parse(s))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Parse(format!("entry ({}, {}): {e}", i + 1, j + 1)))?;
                let x = WittVec::from_components_padded(base, elems, f.len)
                    .map_err(|e| Error::InvalidDisplay(format!("entry ({}, {}): {e}", i + 1, j + 1)))?;
                out.push(x);
            }
            m.push(out);
        }
        Self::new(base, f.g, f.h, m)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: DisplayFile = serde_json::from_str(s).map_err(|e| Error::Parse(format!("display JSON: {e}")))?;
        Self::from_file(&f)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("display serializes")
    }
}

/// Searches `v` with `A0 v^(p) = lambda v mod pR`, `v` primitive, with its
/// first unit coordinate equal to `1`. Candidates are enumerated in a fixed
/// order, so `e_1` is found first when it works.
fn find_eigenvector(base: Base, a0: &Mat) -> Option<Vec<LocalFieldElem>> {
    let d = a0.len();
    let reps = residue_reps(base);
    let units: Vec<usize> = (0..reps.len()).filter(|&i| reps[i].ord().finite().is_some_and(|v| *v == rat::int(0))).collect();
    let non_units: Vec<usize> = (0..reps.len()).filter(|i| !units.contains(i)).collect();
    let one_idx = reps.iter().position(LocalFieldElem::is_one).expect("1 is a representative");
    let p = base.p as u64;
    let unit = rat::int(1);
    for k0 in 0..d {
        // coordinates before k0 are non-units, k0 is 1, after k0 arbitrary
        let choices: Vec<Vec<usize>> = (0..d)
            .map(|i| match i.cmp(&k0) {
                std::cmp::Ordering::Less => non_units.clone(),
                std::cmp::Ordering::Equal => vec![one_idx],
                std::cmp::Ordering::Greater => (0..reps.len()).collect(),
            })
            .collect();
        let mut idx = vec![0usize; d];
        loop {
            let v: Vec<LocalFieldElem> = (0..d).map(|i| reps[choices[i][idx[i]]].clone()).collect();
            let vp: Vec<LocalFieldElem> = v.iter().map(|x| x.pow(p)).collect();
            let image: Vec<LocalFieldElem> = (0..d)
                .map(|i| {
                    let mut acc = base.zero();
                    for j in 0..d {
                        acc = &acc + &(&a0[i][j] * &vp[j]);
                    }
                    acc
                })
                .collect();
            let lambda = &image[k0];
            if (0..d).all(|i| (&image[i] - &(lambda * &v[i])).ord().at_least(&unit)) {
                return Some(v);
            }
            if !advance(&mut idx, &choices) {
                break;
            }
        }
    }
    None
}

/// Odometer step over `choices`, last coordinate fastest.
fn advance(idx: &mut [usize], choices: &[Vec<usize>]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < choices[pos].len() {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// Representatives `sum_{k<e} c_k pi^k`, `0 <= c_k < p`, of `R/pR`.
fn residue_reps(base: Base) -> Vec<LocalFieldElem> {
    let p = base.p as i64;
    let e = base.e as usize;
    let total = (p as usize).pow(e as u32);
    (0..total)
        .map(|mut t| {
            let coeffs = (0..e)
                .map(|_| {
                    let c = (t % p as usize) as i64;
                    t /= p as usize;
                    rat::int(c)
                })
                .collect();
            LocalFieldElem::from_coeffs(base, coeffs)
        })
        .collect()
}

/// Hasse invariant together with the diagonal valuations of `w_0(A)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseValue {
    #[serde(with = "rat::serde_rat")]
    pub value: Rat,
    /// `ord(det w_0(A))` before capping at `1`.
    pub det_ord: Valuation,
    /// `U_i = ord(w_0(alpha_ii))`, present when the block is triangular mod `p`.
    pub diagonal: Option<Vec<Valuation>>,
}

impl HasseValue {
    /// Finite diagonal valuations, if available.
    pub fn diagonal_finite(&self) -> Option<Vec<Rat>> {
        self.diagonal
            .as_ref()?
            .iter()
            .map(|u| u.finite().cloned())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi_display(p: u32, e: u32, len: usize) -> DisplayData {
        let k = Base::new(p, e).unwrap();
        DisplayData::from_teichmuller(
            k,
            1,
            &[vec![k.uniformizer(), k.one()], vec![k.one(), k.zero()]],
            len,
        )
        .unwrap()
    }

    #[test]
    fn ghost_matrices() {
        let k = Base::new(3, 2).unwrap();
        let gm = DisplayData::multiplicative(k, 4);
        for n in 0..4 {
            assert_eq!(gm.ghost_matrix(n).unwrap(), &vec![vec![k.one()]]);
        }
        assert!(gm.ghost_matrix(4).is_err());
        let d = pi_display(3, 2, 3);
        assert_eq!(d.ghost_matrix(0).unwrap()[0][0], k.uniformizer());
        let w1 = d.ghost_matrix(1).unwrap();
        assert_eq!(w1, &vec![vec![k.uniformizer().pow(3), k.one()], vec![k.one(), k.zero()]]);
    }

    #[test]
    fn hasse_values() {
        let k = Base::new(3, 2).unwrap();
        let h = DisplayData::multiplicative(k, 2).hasse_invariant();
        assert_eq!(h.value, rat::int(0));
        let h = pi_display(3, 2, 2).hasse_invariant();
        assert_eq!(h.value, rat::frac(1, 2));
        assert_eq!(h.diagonal_finite().unwrap(), vec![rat::frac(1, 2)]);
        // ord(det w_0(A)) = 2 is capped at 1
        let d = DisplayData::from_teichmuller(k, 1, &[vec![k.int(9), k.one()], vec![k.one(), k.zero()]], 2).unwrap();
        let h = d.hasse_invariant();
        assert_eq!(h.value, rat::int(1));
        assert_eq!(h.det_ord, Valuation::Finite(rat::int(2)));
    }

    #[test]
    fn rejects_non_unit_determinant() {
        let k = Base::new(3, 2).unwrap();
        let err = DisplayData::from_teichmuller(k, 1, &[vec![k.uniformizer()]], 2).unwrap_err();
        assert!(matches!(err, Error::InvalidDisplay(_)));
        assert!(DisplayData::from_teichmuller(k, 2, &[vec![k.one()]], 2).is_err());
    }

    #[test]
    fn triangularize_identity_cases() {
        let d = pi_display(3, 2, 3);
        assert!(d.is_triangular());
        assert_eq!(d.triangularize().unwrap(), d);
        let k = Base::new(2, 1).unwrap();
        let t = DisplayData::from_teichmuller(k, 2, &[vec![k.one(), k.one()], vec![k.int(2), k.one()]], 3).unwrap();
        assert_eq!(t.triangularize().unwrap(), t);
    }

    #[test]
    fn triangularize_swap_p2() {
        let k = Base::new(2, 1).unwrap();
        let d = DisplayData::from_teichmuller(k, 2, &[vec![k.zero(), k.one()], vec![k.one(), k.zero()]], 3).unwrap();
        assert!(!d.is_triangular());
        let t = d.triangularize().unwrap();
        assert!(t.is_triangular());
        assert_eq!(t.hasse_invariant().value, d.hasse_invariant().value);
        assert_eq!(t.witt_len(), 3);
    }

    #[test]
    fn extension_required_when_no_eigenvector() {
        // v -> (v_2^2, v_1^2) + (0, v_2^2)... over F_2 the map
        // (x, y) -> (y, x + y) has no eigenvector: it is the companion
        // matrix of t^2 + t + 1.
        let k = Base::new(2, 1).unwrap();
        let d = DisplayData::from_teichmuller(k, 2, &[vec![k.zero(), k.one()], vec![k.one(), k.one()]], 2).unwrap();
        assert!(matches!(d.triangularize(), Err(Error::ExtensionRequired(_))));
    }

    #[test]
    fn json_round_trip() {
        let d = pi_display(5, 2, 4);
        let s = d.to_json_string();
        let back = DisplayData::from_json_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(DisplayData::from_json_str("{\"p\": 4}").is_err());
    }
}
