use amact_core::bass_serre::{check_hypotheses, finite_double, quotient_graph, witness_circuit, DoubleData};
use amact_core::{Element, GroupSpec};

#[test]
fn index_two_subgroup_of_sym3() {
    let s3 = GroupSpec::symmetric(3);
    let a3: Vec<Element> = ["p012", "p120", "p201"].iter().map(|x| s3.parse_element(x).unwrap()).collect();
    let d = finite_double(&s3, &a3).unwrap();
    assert!(check_hypotheses(&d).unwrap().passed());
    let q = quotient_graph(&d).unwrap();
    assert_eq!((q.edges.len(), q.betti), (2, 1));
    let c = witness_circuit(&d).unwrap();
    assert!(!["p012", "p120", "p201"].contains(&c.x.as_str()));
    assert!(c.audit.passed());
}

#[test]
fn klein_subgroup_of_sym4() {
    let s4 = GroupSpec::symmetric(4);
    let v4: Vec<Element> = ["p0123", "p1032", "p2301", "p3210"].iter().map(|x| s4.parse_element(x).unwrap()).collect();
    let d = finite_double(&s4, &v4).unwrap();
    let q = quotient_graph(&d).unwrap();
    assert_eq!(q.betti, 5);
    assert_eq!(q.to_adjacency().lines().count(), 7);
    assert!(witness_circuit(&d).unwrap().audit.passed());
}

#[test]
fn plane_over_a_sublattice() {
    let z2 = GroupSpec::free_abelian(2);
    let d = DoubleData::double(&z2, &[Element::Vector(vec![2, 0]), Element::Vector(vec![0, 3])]).unwrap();
    let r = check_hypotheses(&d).unwrap();
    assert_eq!(r.index, Some(6));
    assert_eq!(quotient_graph(&d).unwrap().betti, 5);
    assert!(witness_circuit(&d).unwrap().audit.passed());
}

#[test]
fn thin_sublattice_has_infinite_index() {
    let z2 = GroupSpec::free_abelian(2);
    let d = DoubleData::double(&z2, &[Element::Vector(vec![1, 0])]).unwrap();
    let r = check_hypotheses(&d).unwrap();
    assert!(r.passed());
    assert_eq!(r.index, None);
    assert!(quotient_graph(&d).is_err());
    assert!(witness_circuit(&d).unwrap().audit.passed());
}
