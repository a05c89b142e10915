use std::collections::BTreeSet;

use amact_core::actions::{build_aprime_witness, APrimeOptions, APrimeWitness, Point};
use amact_core::amalgam::Factor;
use amact_core::config::Presets;
use amact_core::folner::FolnerSet;
use amact_core::generic::{
    build_generic, evaluate_word, extend_avoid_word, extend_match_folner, verify_certificate, Builder, Certificate,
    GenericError, GenericOptions, PartialPermutation,
};
use amact_core::Rational;

fn witness(name: &str) -> APrimeWitness {
    let p = Presets::builtin();
    let a = p.amalgam(name).unwrap();
    build_aprime_witness(&a.g, &a.h, a.phi.clone(), &a.y, &APrimeOptions::default()).unwrap()
}

fn blocks_x(w: &APrimeWitness, n: usize) -> Vec<Point> {
    let b = w.x_blocks();
    let mut idx = w.x.indexed();
    let mut out: Vec<Point> = Vec::new();
    let mut i = 0;
    while out.len() < n {
        let base = b.base(idx.get(i).unwrap());
        if !out.contains(&base) {
            out.push(base);
        }
        i += 1;
    }
    out
}

fn blocks_y(w: &APrimeWitness, n: usize) -> Vec<Point> {
    let b = w.y_blocks();
    let mut idx = w.y.indexed();
    let mut out: Vec<Point> = Vec::new();
    let mut i = 0;
    while out.len() < n {
        let base = b.base(idx.get(i).unwrap());
        if !out.contains(&base) {
            out.push(base);
        }
        i += 1;
    }
    out
}

#[test]
fn single_g_syllable_needs_no_sigma() {
    let w = witness("zxz2-sym3");
    let mut s = PartialPermutation::new(&w);
    let mut b = Builder::new(&w);
    let g = w.x.group().parse_element("(1,0)").unwrap();
    let word = w.spec.reduce(&[(Factor::G, g.clone())]).unwrap();
    let wit = extend_avoid_word(&mut s, &mut b, &word).unwrap();
    assert!(s.is_empty());
    let x0 = w.x.parse_point(&wit.start).unwrap();
    assert_eq!(wit.endpoint, w.x.format_point(&w.x.act(&g, &x0)));
    assert_ne!(wit.endpoint, wit.start);
}

#[test]
fn head_times_g_h_moves_off_the_start_block() {
    let w = witness("zxz2-sym3");
    let mut s = PartialPermutation::new(&w);
    let mut b = Builder::new(&w);
    let word = w.spec.parse_word("(0,1) | G:(1,0) H:p021").unwrap();
    let wit = extend_avoid_word(&mut s, &mut b, &word).unwrap();
    // x₀, then σx₀, hσx₀, σ⁻¹hσx₀, then g applied.
    assert_eq!(wit.trace.len(), 5);
    let xb = w.x_blocks();
    let last = w.x.parse_point(&wit.trace[4].point).unwrap();
    let a = w.x.group().parse_element("(0,1)").unwrap();
    assert_eq!(wit.endpoint, w.x.format_point(&w.x.act(&a, &last)));
    let x0 = w.x.parse_point(&wit.start).unwrap();
    assert_ne!(xb.base(&last), xb.base(&x0));
    let (end, _) = evaluate_word(&s, &w.spec, &word, &x0).unwrap();
    assert_eq!(w.x.format_point(&end), wit.endpoint);
}

#[test]
fn all_four_shapes_give_distinct_trace_blocks() {
    let w = witness("zxz2-sym3");
    let mut s = PartialPermutation::new(&w);
    let mut b = Builder::new(&w);
    for text in ["(0,0) | G:(1,0) H:p021", "(0,0) | H:p021 G:(1,0)", "(0,0) | G:(1,0) H:p021 G:(-1,0)", "(0,0) | H:p021 G:(2,0) H:p201"] {
        let word = w.spec.parse_word(text).unwrap();
        let wit = extend_avoid_word(&mut s, &mut b, &word).unwrap();
        let h_count = word.syllables.iter().filter(|(f, _)| *f == Factor::H).count();
        let g_count = word.len() - h_count;
        assert_eq!(wit.trace.len(), 1 + g_count + 3 * h_count, "{text}");
        let xb = w.x_blocks();
        let yb = w.y_blocks();
        let mut seen = BTreeSet::new();
        for t in &wit.trace {
            let key = match t.side {
                amact_core::generic::Side::X => (0, xb.base(&w.x.parse_point(&t.point).unwrap())),
                amact_core::generic::Side::Y => (1, yb.base(&w.y.parse_point(&t.point).unwrap())),
            };
            assert!(seen.insert(key), "{text}: repeated block");
        }
    }
    s.audit().unwrap();
}

#[test]
fn matching_three_blocks_over_z2() {
    let w = witness("zxz2-sym3");
    let mut s = PartialPermutation::new(&w);
    let xb = w.x_blocks();
    let yb = w.y_blocks();
    let c: FolnerSet = blocks_x(&w, 3).iter().flat_map(|p| xb.orbit(p)).collect();
    let d: FolnerSet = blocks_y(&w, 3).iter().flat_map(|p| yb.orbit(p)).collect();
    assert_eq!((c.len(), d.len()), (6, 6));
    extend_match_folner(&mut s, &c, &d).unwrap();
    assert_eq!(s.len(), 3);
    let image: FolnerSet = c.iter().map(|x| s.apply(x).unwrap()).collect();
    assert_eq!(image, d);
    let audit = s.audit().unwrap();
    assert_eq!(audit.points, 6);
}

#[test]
fn matching_with_trivial_a_pairs_in_order() {
    let w = witness("z-free-z");
    let mut s = PartialPermutation::new(&w);
    let c: FolnerSet = blocks_x(&w, 2).into_iter().collect();
    let d: FolnerSet = blocks_y(&w, 2).into_iter().collect();
    extend_match_folner(&mut s, &c, &d).unwrap();
    let pairs: Vec<(Point, Point)> = s.assignments().map(|(x, y, _)| (x.clone(), y.clone())).collect();
    let cs: Vec<Point> = c.into_iter().collect();
    let ds: Vec<Point> = d.into_iter().collect();
    assert_eq!(pairs, vec![(cs[0].clone(), ds[0].clone()), (cs[1].clone(), ds[1].clone())]);
}

#[test]
fn matching_rejects_used_blocks_and_size_mismatch() {
    let w = witness("z-free-z");
    let mut s = PartialPermutation::new(&w);
    let xs = blocks_x(&w, 3);
    let ys = blocks_y(&w, 3);
    s.assign(&xs[0], &ys[2]).unwrap();
    let c: FolnerSet = xs[..2].iter().cloned().collect();
    let d: FolnerSet = ys[..2].iter().cloned().collect();
    let err = extend_match_folner(&mut s, &c, &d).unwrap_err();
    assert!(matches!(err, GenericError::Precondition(ref m) if m.contains(&w.x.format_point(&xs[0]))), "{err}");
    let c1: FolnerSet = xs[1..3].iter().cloned().collect();
    let d1: FolnerSet = ys[..1].iter().cloned().collect();
    assert!(extend_match_folner(&mut s, &c1, &d1).is_err());
}

#[test]
fn free_product_length_two() {
    let w = witness("z-free-z");
    let opts = GenericOptions {
        max_len: 2,
        eps: Rational::new(1, 4),
        ..GenericOptions::default()
    };
    let (s, cert) = build_generic(&w, &opts).unwrap();
    assert!(verify_certificate(&s, &cert, &w).ok);
    assert_eq!(cert.matches.len(), 1);
    assert!(cert.words.iter().all(|x| x.length <= 2));
}

#[test]
fn empty_sigma_is_vacuous() {
    let w = witness("z-free-z");
    let opts = GenericOptions {
        max_len: 0,
        matches: 0,
        ..GenericOptions::default()
    };
    let (s, cert) = build_generic(&w, &opts).unwrap();
    assert!(s.is_empty());
    assert!(cert.words.is_empty());
    assert!(verify_certificate(&s, &cert, &w).ok);
}

#[test]
fn length_zero_words_are_heads() {
    let w = witness("zxz2-sym3");
    let opts = GenericOptions {
        max_len: 0,
        matches: 0,
        ..GenericOptions::default()
    };
    let (s, cert) = build_generic(&w, &opts).unwrap();
    assert_eq!(cert.words.len(), 1);
    assert_eq!(cert.words[0].trace.len(), 1);
    assert!(s.is_empty());
    assert!(verify_certificate(&s, &cert, &w).ok);
}

#[test]
fn certificate_is_deterministic_and_round_trips() {
    let w = witness("zxz2-sym3");
    let opts = GenericOptions::default();
    let (s1, c1) = build_generic(&w, &opts).unwrap();
    let (s2, c2) = build_generic(&w, &opts).unwrap();
    assert_eq!(c1.to_json(), c2.to_json());
    assert_eq!(s1.digest(), s2.digest());
    let back = Certificate::from_json(&c1.to_json()).unwrap();
    assert_eq!(back, c1);
    let rebuilt = PartialPermutation::from_record(&w, &back.sigma).unwrap();
    assert!(verify_certificate(&rebuilt, &back, &w).ok);
}

#[test]
fn swapped_images_are_detected() {
    let w = witness("zxz2-sym3");
    let (mut s, cert) = build_generic(&w, &GenericOptions::default()).unwrap();
    let bases: Vec<Point> = s.assignments().map(|(x, _, _)| x.clone()).take(2).collect();
    assert!(s.swap_images(&bases[0], &bases[1]));
    s.audit().unwrap();
    let v = verify_certificate(&s, &cert, &w);
    assert!(!v.ok);
    assert!(v.failure.unwrap().contains(&w.x.format_point(&bases[0])));
}

#[test]
fn tampered_certificate_text_is_detected() {
    let w = witness("z-free-z");
    let (s, mut cert) = build_generic(&w, &GenericOptions::default()).unwrap();
    cert.words[0].endpoint = cert.words[0].start.clone();
    let v = verify_certificate(&s, &cert, &w);
    assert!(!v.ok);
    assert!(v.failure.unwrap().contains(&cert.words[0].word));
}
