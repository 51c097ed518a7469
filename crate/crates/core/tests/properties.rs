//! Randomized invariants across the library.

use canonlab::canon::{certify, CertifyOptions};
use canonlab::fgl::p_power_series;
use canonlab::fglog::compute_log;
use canonlab::rat::{self, Rat};
use canonlab::sample;
use canonlab::series::total_degree;
use canonlab::tropical::{newton_polygon, HeightGraph};
use canonlab::{Base, DisplayData, LocalFieldElem, Valuation, WittVec};
use proptest::prelude::*;

fn base_strategy() -> impl Strategy<Value = Base> {
    (prop::sample::select(vec![2u32, 3, 5]), 1u32..=3).prop_map(|(p, e)| Base::new(p, e).unwrap())
}

fn elem(base: Base) -> impl Strategy<Value = LocalFieldElem> {
    prop::collection::vec((-20i64..=20, 1i64..=6), base.e as usize).prop_map(move |cs| {
        LocalFieldElem::from_coeffs(base, cs.into_iter().map(|(n, d)| rat::frac(n, d)).collect())
    })
}

fn base_and_pair() -> impl Strategy<Value = (Base, LocalFieldElem, LocalFieldElem)> {
    base_strategy().prop_flat_map(|b| (Just(b), elem(b), elem(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ord_is_a_valuation((_b, x, y) in base_and_pair()) {
        prop_assert_eq!((&x * &y).ord(), &x.ord() + &y.ord());
        prop_assert!((&x + &y).ord() >= std::cmp::min(x.ord(), y.ord()));
        if x.ord() != y.ord() {
            prop_assert_eq!((&x + &y).ord(), std::cmp::min(x.ord(), y.ord()));
        }
    }

    #[test]
    fn inverse_and_text_round_trip((b, x, _y) in base_and_pair()) {
        prop_assert_eq!(b.parse(&x.to_string()).unwrap(), x.clone());
        if !x.is_zero() {
            prop_assert!((&x * &x.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn teichmuller_is_multiplicative(b in base_strategy(), a in -9i64..=9, c in -9i64..=9, len in 1usize..=3) {
        let ta = WittVec::teichmuller(b.int(a), len).unwrap();
        let tc = WittVec::teichmuller(b.int(c), len).unwrap();
        prop_assert_eq!(ta.mul(&tc).unwrap(), WittVec::teichmuller(b.int(a * c), len).unwrap());
    }

    #[test]
    fn witt_addition_is_a_group(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let b = sample::base(&mut r, &[2, 3], 2);
        let x = sample::witt_vec(&mut r, b, 3);
        let y = sample::witt_vec(&mut r, b, 3);
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert!(x.add(&x.neg().unwrap()).unwrap().is_zero());
        prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x);
    }

    #[test]
    fn display_json_round_trip(seed in any::<u64>()) {
        let s = sample::random_triangular(&mut sample::rng(seed)).unwrap();
        let d = s.display;
        prop_assert_eq!(DisplayData::from_json_str(&d.to_json_string()).unwrap(), d);
    }

    #[test]
    fn newton_polygon_is_convex(ys in prop::collection::vec(-30i64..=30, 2..10)) {
        let pts: Vec<(u64, Rat)> = ys.iter().enumerate().map(|(i, &y)| (i as u64 + 1, rat::frac(y, 3))).collect();
        let np = newton_polygon(&pts).unwrap();
        for w in np.segments.windows(2) {
            prop_assert!(w[0].slope < w[1].slope);
        }
        let total: u64 = np.segments.iter().map(|s| s.length).sum();
        prop_assert_eq!(total + 1, np.points().last().unwrap().0);
        // every point lies on or above the hull
        for (x, y) in &pts {
            let seg = np.segments.iter().find(|s| s.from <= *x && *x <= s.to);
            if let Some(s) = seg {
                let base = pts.iter().find(|(px, _)| *px == s.from).unwrap().1.clone();
                let line = base + &s.slope * rat::int((*x - s.from) as i64);
                prop_assert!(*y >= line);
            }
        }
        prop_assert!(np.roots_in_radius(&rat::int(0)) <= np.roots_in_radius(&rat::int(-100)));
    }

    #[test]
    fn planar_cells_are_dual(
        pts in prop::collection::btree_map((0u64..6, 0u64..6), -6i64..=6, 2..7),
        wx in 1i64..=12, wy in 1i64..=12,
    ) {
        let pts: Vec<(Vec<u64>, Rat)> = pts
            .into_iter()
            .filter(|((a, b), _)| a + b > 0)
            .map(|((a, b), u)| (vec![a, b], rat::int(u)))
            .collect();
        prop_assume!(!pts.is_empty());
        let f = HeightGraph::from_points(2, &pts).unwrap();
        let w = [rat::frac(wx, 4), rat::frac(wy, 4)];
        let chk = f.check_duality(&w).unwrap();
        prop_assert!(chk.complementary && chk.orthogonal);
        prop_assert!(f.inn_matches_lifted_hull(&w).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn triangularize_preserves_hasse(seed in any::<u64>()) {
        let s = sample::random_triangular(&mut sample::rng(seed)).unwrap();
        let h = s.display.hasse_invariant().value;
        prop_assert_eq!(s.display.triangularize().unwrap().hasse_invariant().value, h);
    }

    /// Each monomial `c X^m` of `[p]` satisfies
    /// `ord(c) + <m, s> >= min(p min(s), 1 + min(s))`.
    #[test]
    fn p_series_size_inequality(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let b = Base::new(2, 1 + (seed % 2) as u32).unwrap();
        let s = sample::triangular_display(&mut r, b, 2, 3, 1).unwrap();
        let t = compute_log(&s.display, 2).unwrap();
        let series = p_power_series(&t, 1, 5).unwrap();
        for k in 0..200u64 {
            let sv = [rat::frac((k % 17) as i64 + 1, 18), rat::frac((k * 7 % 19) as i64 + 1, 20)];
            let smin = std::cmp::min(sv[0].clone(), sv[1].clone());
            let bound = std::cmp::min(rat::int(2) * &smin, rat::int(1) + &smin);
            for comp in &series {
                for (m, c) in comp.terms() {
                    let Valuation::Finite(o) = c.ord() else { continue };
                    let lhs = o + &sv[0] * rat::int(m[0] as i64) + &sv[1] * rat::int(m[1] as i64);
                    prop_assert!(lhs >= bound, "monomial {:?} (degree {})", m, total_degree(m));
                }
            }
        }
    }

    #[test]
    fn lower_levels_come_for_free(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let b = sample::base(&mut r, &[2, 3], 3);
        let s = sample::triangular_display(&mut r, b, 1, 2, 2).unwrap();
        let opts = CertifyOptions { scan: false, ..CertifyOptions::default() };
        let top = certify(&s.display, 2, &opts).unwrap();
        prop_assert!(top.exists);
        let low = certify(&s.display, 1, &opts).unwrap();
        prop_assert!(low.exists);
        prop_assert!(low.radius_exponent.unwrap() > top.radius_exponent.unwrap());
    }
}
