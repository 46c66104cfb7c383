//! Property tests over the exact layers and the driver.

mod common;

use common::{poly, sqrt2};
use monomialize_core::cyclo::Cyclo;
use monomialize_core::doc;
use monomialize_core::driver::{check_injectivity, run, verify};
use monomialize_core::linalg::{self, q, qi, Q};
use monomialize_core::prepared::PreparedPair;
use monomialize_core::toric::{self, ElementaryBlowup, TransformSeq};
use monomialize_core::valgroup::{compare, GroupValue, IrrationalCombination};
use monomialize_core::Error;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| q(n, d))
}

fn cyclo(m: u64) -> impl Strategy<Value = Cyclo> {
    prop::collection::vec(rational(), 0..6).prop_map(move |c| Cyclo::from_coords(m, c))
}

fn value() -> impl Strategy<Value = GroupValue> {
    prop::collection::vec(prop::collection::vec(rational(), 1..4), 1..3)
        .prop_map(|levels| GroupValue::new(levels.into_iter().map(IrrationalCombination::new).collect()))
}

fn terms(n: usize, max_deg: i64) -> impl Strategy<Value = Vec<(Vec<i64>, Q)>> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, n), rational()), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclo_division_undoes_multiplication(
        m in prop::sample::select(vec![4u64, 8, 12]),
        a in prop::collection::vec(rational(), 0..6),
        b in prop::collection::vec(rational(), 0..6),
    ) {
        let (a, b) = (Cyclo::from_coords(m, a), Cyclo::from_coords(m, b));
        prop_assume!(!b.is_zero());
        prop_assert_eq!(a.mul(&b).div(&b).unwrap(), a);
    }

    #[test]
    fn cyclo_distributes(a in cyclo(12), b in cyclo(12), c in cyclo(12)) {
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
    }

    #[test]
    fn series_product_is_associative(f in terms(2, 3), g in terms(2, 3), h in terms(2, 3)) {
        let (f, g, h) = (poly(2, &f, 7), poly(2, &g, 7), poly(2, &h, 7));
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
    }

    #[test]
    fn unit_inverse_is_exact_below_truncation(f in terms(2, 3), c in rational()) {
        prop_assume!(!num_traits::Zero::is_zero(&c));
        let mut tt = f.clone();
        tt.retain(|(e, _)| e.iter().sum::<i64>() > 0);
        tt.push((vec![0, 0], c));
        let u = poly(2, &tt, 6);
        let one = u.mul(&u.inverse().unwrap());
        prop_assert!(one.eq_mod(&poly(2, &[(vec![0, 0], qi(1))], 6), &qi(6)));
    }

    #[test]
    fn comparison_is_translation_invariant(a in value(), b in value(), c in value()) {
        prop_assume!(a.rank() == b.rank() && b.rank() == c.rank());
        let ab = compare(&a, &b).unwrap();
        prop_assert_eq!(compare(&a.add(&c).unwrap(), &b.add(&c).unwrap()).unwrap(), ab);
        prop_assert_eq!(compare(&b, &a).unwrap(), ab.reverse());
    }

    #[test]
    fn blowup_sequences_are_unimodular(steps in prop::collection::vec((0usize..4, 1usize..4, any::<bool>()), 0..8)) {
        let mut seq = TransformSeq::new(4);
        for (a, off, first) in steps {
            let b = (a + off) % 4;
            seq.push(if first { ElementaryBlowup::dividing(a, b) } else { ElementaryBlowup::dividing(b, a) });
        }
        prop_assert_eq!(linalg::det_i(&seq.matrix), 1);
        prop_assert_eq!(seq.recompute(), seq.matrix.clone());
    }

    #[test]
    fn principalized_generator_divides_all(gens in prop::collection::vec(prop::collection::vec(0i64..=6, 2), 1..=3)) {
        let w = vec![sqrt2(1), GroupValue::simple(2, qi(1))];
        let pr = toric::principalize(&gens, &w).unwrap();
        for im in &pr.images {
            prop_assert!(im.iter().zip(&pr.gen).all(|(a, b)| a >= b));
        }
        prop_assert_eq!(&pr.images[pr.source], &pr.gen);
    }

    #[test]
    fn problem_documents_round_trip(tt in terms(2, 4), c in 1i64..=3, k in 2i64..=6) {
        let z = poly(2, &tt, 9);
        let Ok(p) = PreparedPair::new(1, 1, 0, vec![vec![c]], vec![sqrt2(1), sqrt2(k)], vec![z], qi(9)) else {
            return Ok(());
        };
        let text = doc::to_json(&doc::problem_doc(&p, None));
        let back = doc::problem_of(&doc::parse_problem(&text).unwrap()).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(doc::to_json(&doc::problem_doc(&back, None)), text);
    }
}

/// A random one-exponent germ `x_1 = y_1^c`, `x_2 = Σ y^e` with `y_k` of
/// value `k_k·√2`.
fn germ() -> impl Strategy<Value = (i64, Vec<i64>, Vec<(Vec<i64>, Q)>)> {
    (1usize..=3).prop_flat_map(|n| {
        (
            1i64..=3,
            prop::collection::vec(1i64..=6, n - 1),
            prop::collection::vec((prop::collection::vec(0i64..=3, n), 1i64..=2), 1..=3)
                .prop_map(|t| t.into_iter().filter(|(e, _)| e.iter().sum::<i64>() > 0).map(|(e, c)| (e, qi(c))).collect()),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Either a verified, injective monomial form, or an error that names a
    /// real obstruction: not quasi-regular, too little precision, or a
    /// radical outside the cyclotomic tower.
    #[test]
    fn run_verifies_or_fails_honestly((c, ks, tt) in germ()) {
        prop_assume!(!tt.is_empty());
        let n = ks.len() + 1;
        let mut w = vec![sqrt2(1)];
        w.extend(ks.iter().map(|&k| sqrt2(k)));
        let Ok(p) = PreparedPair::new(1, 1, 0, vec![vec![c]], w, vec![poly(n, &tt, 16)], qi(16)) else {
            return Ok(());
        };
        match run(&p, None) {
            Ok(mf) => {
                prop_assert!(mf.pair.is_monomial());
                prop_assert!(verify(&p, mf.certificate()));
                prop_assert!(check_injectivity(&mf.pair, 3));
            }
            Err(Error::InvalidPreparedForm(msg)) => prop_assert!(msg.contains("quasi-regular"), "{}", msg),
            Err(Error::TruncationExhausted(_) | Error::FieldExtensionRequired { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
