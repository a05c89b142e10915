use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use amact_core::actions::{build_aprime_witness, APrimeOptions, ActionSpec, Point};
use amact_core::amalgam::{AmalgamSpec, Factor};
use amact_core::config::Presets;
use amact_core::folner::{ratio, FolnerSet};
use amact_core::generic::{evaluate_word, extend_avoid_word, Builder, PartialPermutation};
use amact_core::groups::lattice::Lattice;
use amact_core::rational::{format_rational, parse_rational};
use amact_core::{Element, FiniteSubgroup, GroupSpec, Homomorphism, Rational, SubgroupIso};

fn z4_z6() -> AmalgamSpec {
    let g = GroupSpec::cyclic(4);
    let h = GroupSpec::cyclic(6);
    let t = Element::Table;
    let a_g = FiniteSubgroup::new(&g, vec![t(0), t(2)]).unwrap();
    let a_h = FiniteSubgroup::new(&h, vec![t(0), t(3)]).unwrap();
    let phi = SubgroupIso::new(&a_g, &a_h, &[(t(0), t(0)), (t(2), t(3))]).unwrap();
    AmalgamSpec::new(&g, &h, phi).unwrap()
}

fn letters(max: usize) -> impl Strategy<Value = Vec<(bool, usize)>> {
    prop::collection::vec((any::<bool>(), 0usize..6), 0..max)
}

fn word(s: &AmalgamSpec, raw: &[(bool, usize)]) -> amact_core::amalgam::AmalgamWord {
    let l: Vec<(Factor, Element)> = raw
        .iter()
        .map(|&(g, i)| if g { (Factor::G, Element::Table(i % 4)) } else { (Factor::H, Element::Table(i)) })
        .collect();
    s.reduce(&l).unwrap()
}

proptest! {
    #![proptest_config(Config { cases: 1000, failure_persistence: None, ..Config::default() })]

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = Rational::new(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn lattice_reduction_is_a_canonical_coset_rep(
        a in 1i64..9, b in -9i64..9, c in 1i64..9, x in -100i64..100, y in -100i64..100, kx in -5i64..5, ky in -5i64..5,
    ) {
        let l = Lattice::new(&[vec![a, b], vec![0, c]], 2);
        let shifted = [x + kx * a, y + kx * b + ky * c];
        prop_assert_eq!(l.reduce(&[x, y]), l.reduce(&shifted));
        let r = l.reduce(&[x, y]);
        prop_assert!(l.contains(&[x - r[0], y - r[1]]));
    }

    #[test]
    fn amalgam_multiplication_is_associative(u in letters(6), v in letters(6), w in letters(6)) {
        let s = z4_z6();
        let (u, v, w) = (word(&s, &u), word(&s, &v), word(&s, &w));
        prop_assert_eq!(s.multiply(&s.multiply(&u, &v), &w), s.multiply(&u, &s.multiply(&v, &w)));
        prop_assert_eq!(s.multiply(&u, &s.inverse(&u)), s.identity());
        prop_assert_eq!(s.parse_word(&s.format_word(&u)).unwrap(), u);
    }

    #[test]
    fn sign_map_is_a_homomorphism(i in 0usize..24, j in 0usize..24) {
        let s4 = GroupSpec::symmetric(4);
        let z2 = GroupSpec::cyclic(2);
        let sign = Homomorphism::new(&s4, &z2, vec![Element::Table(1); 3]).unwrap();
        let e = s4.elements().unwrap();
        let (x, y) = (&e[i], &e[j]);
        prop_assert_eq!(sign.apply(&s4.mul(x, y)).unwrap(), z2.mul(&sign.apply(x).unwrap(), &sign.apply(y).unwrap()));
    }

    #[test]
    fn ratio_is_symmetric_under_inverse(pts in prop::collection::btree_set(-30i64..30, 1..30), t in -5i64..5) {
        let z = GroupSpec::free_abelian(1);
        let act = ActionSpec::regular(&z);
        let c: FolnerSet = pts.into_iter().map(|i| Point::El(Element::Vector(vec![i]))).collect();
        let g = Element::Vector(vec![t]);
        prop_assert_eq!(ratio(&act, &c, &g), ratio(&act, &c, &z.inverse(&g)));
        prop_assert!(ratio(&act, &c, &g) <= Rational::from_integer(2));
    }
}

/// Every extension keeps earlier assignments and earlier witnesses intact,
/// and keeps σ equivariant.
#[test]
fn pure_extension_law() {
    let p = Presets::builtin();
    let a = p.amalgam("zxz2-sym3").unwrap();
    let w = build_aprime_witness(&a.g, &a.h, a.phi.clone(), &a.y, &APrimeOptions::default()).unwrap();
    let words = w.spec.enumerate_words(3, Some(2)).unwrap();
    let id = w.spec.identity();
    let words: Vec<_> = words.into_iter().filter(|x| *x != id).collect();
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&prop::collection::vec(0usize..words.len(), 1..4), |picks| {
            let mut s = PartialPermutation::new(&w);
            let mut b = Builder::new(&w);
            let mut done = Vec::new();
            for &i in &picks {
                let before: BTreeMap<Point, (Point, Element)> =
                    s.assignments().map(|(x, y, u)| (x.clone(), (y.clone(), u.clone()))).collect();
                let wit = extend_avoid_word(&mut s, &mut b, &words[i]).unwrap();
                let after: BTreeMap<Point, (Point, Element)> =
                    s.assignments().map(|(x, y, u)| (x.clone(), (y.clone(), u.clone()))).collect();
                for (k, val) in &before {
                    prop_assert_eq!(after.get(k), Some(val));
                }
                done.push((i, wit));
                for (j, wt) in &done {
                    let x0 = w.x.parse_point(&wt.start).unwrap();
                    let (end, _) = evaluate_word(&s, &w.spec, &words[*j], &x0).unwrap();
                    prop_assert_eq!(w.x.format_point(&end), wt.endpoint.clone());
                    prop_assert_ne!(end, x0);
                }
            }
            prop_assert!(s.audit().is_ok());
            Ok(())
        })
        .unwrap();
}
