//! The quotient of the Bass–Serre tree of a double `G ∗_A G` (or more
//! generally `G ∗_A H` with an epimorphism `π: G → H`) by `N = Ker ψ`.
//!
//! `ψ` is onto from both factors, so each side collapses to one vertex and
//! the edges are the cosets `H/π(A)`. The Betti number is the free rank of
//! the kernel's free factor.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::amalgam::{AmalgamError, DoubleSpec, Factor};
use crate::groups::lattice;
use crate::groups::{Element, FiniteSubgroup, GroupError, GroupSpec, Homomorphism, Side, SubgroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BassSerreError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("coset enumeration stopped at radius {radius} with {found} of {index} cosets")]
    Cutoff { radius: usize, found: usize, index: u64 },
    #[error("[H : pi(A)] is infinite; the quotient graph is not finite")]
    InfiniteIndex,
    #[error("no x with pi(x) outside pi(A) within radius {0}")]
    NoWitness(usize),
}

/// An epimorphism `π: G → H` and a subgroup `A ≤ G`, possibly infinite.
#[derive(Clone, Debug)]
pub struct DoubleData {
    pi: Homomorphism,
    a: SubgroupSpec,
}

impl DoubleData {
    pub fn new(pi: Homomorphism, a: SubgroupSpec) -> Result<Self, BassSerreError> {
        if a.ambient() != pi.source() {
            return Err(BassSerreError::Hypothesis("A is not a subgroup of the source of pi".into()));
        }
        Ok(DoubleData { pi, a })
    }

    /// The double of `g` over the subgroup generated by `gens` (`π = id`).
    pub fn double(g: &GroupSpec, gens: &[Element]) -> Result<Self, BassSerreError> {
        let a = SubgroupSpec::generated(g, gens, 1 << 20)?;
        Self::new(Homomorphism::identity(g), a)
    }

    pub fn from_spec(d: &DoubleSpec) -> Self {
        DoubleData {
            pi: d.pi().clone(),
            a: SubgroupSpec::Finite(d.base().a().clone()),
        }
    }

    pub fn pi(&self) -> &Homomorphism {
        &self.pi
    }

    pub fn a(&self) -> &SubgroupSpec {
        &self.a
    }

    fn h(&self) -> &GroupSpec {
        self.pi.target()
    }

    /// `π(A)` as a subgroup of `H`.
    pub fn image_of_a(&self) -> Result<SubgroupSpec, BassSerreError> {
        let imgs = self
            .a
            .generators()
            .iter()
            .map(|x| self.pi.apply(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SubgroupSpec::generated(self.h(), &imgs, 1 << 20)?)
    }

    /// The amalgam form, available when `A` is finite and `π|_A` injective.
    pub fn to_spec(&self) -> Result<DoubleSpec, BassSerreError> {
        let a = self
            .a
            .as_finite()
            .ok_or_else(|| BassSerreError::Hypothesis("A is infinite".into()))?;
        Ok(DoubleSpec::from_epimorphism(self.pi.clone(), a)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<Check>,
    /// `[H : π(A)]`, `None` when infinite.
    pub index: Option<u64>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn vector(x: &Element) -> &[i64] {
    match x {
        Element::Vector(v) => v,
        _ => unreachable!("free abelian groups have vector elements"),
    }
}

fn index_of_image(h: &GroupSpec, img: &SubgroupSpec) -> Option<u64> {
    match img {
        SubgroupSpec::Finite(f) => h.order().map(|n| (n / f.order()) as u64),
        SubgroupSpec::Lattice { lattice, .. } => lattice.index(),
    }
}

/// Surjectivity of `π`, injectivity of `π|_A` and `[H : π(A)] ≥ 2`.
pub fn check_hypotheses(d: &DoubleData) -> Result<HypothesisReport, BassSerreError> {
    let g = d.pi.source();
    let h = d.h();
    let mut checks = Vec::new();

    let surj = d.pi.is_surjective(1 << 20);
    checks.push(Check {
        name: "pi surjective",
        pass: surj == Some(true),
        detail: match surj {
            Some(true) => "generator images generate H".into(),
            Some(false) => "generator images generate a proper subgroup".into(),
            None => "undecided for this target".into(),
        },
    });

    let inj = match &d.a {
        SubgroupSpec::Finite(a) => {
            let mut seen: Vec<(Element, Element)> = Vec::new();
            let mut clash = None;
            for x in a.elements() {
                let y = d.pi.apply(x)?;
                if let Some((x0, _)) = seen.iter().find(|(_, y0)| *y0 == y) {
                    clash = Some((x0.clone(), x.clone()));
                    break;
                }
                seen.push((x.clone(), y));
            }
            match clash {
                None => (true, format!("{} distinct images", a.order())),
                Some((x0, x1)) => (
                    false,
                    format!("pi({}) = pi({})", g.format_element(&x0), g.format_element(&x1)),
                ),
            }
        }
        SubgroupSpec::Lattice { generators, lattice, .. } => {
            if let Some(n) = h.order() {
                // π(k·v) = 0 for k the order of π(v), which divides |H|.
                let v = &generators[0];
                let gv = Element::Vector(v.clone());
                let k = (1..=n as i64)
                    .find(|&k| d.pi.apply(&g.pow(&gv, k)).map(|y| y == h.identity()).unwrap_or(false))
                    .expect("order divides |H|");
                let kv = g.pow(&gv, k);
                (
                    false,
                    format!(
                        "A is infinite and H finite: pi({}) = pi({})",
                        g.format_element(&g.identity()),
                        g.format_element(&kv)
                    ),
                )
            } else if let crate::groups::Kind::FreeAbelian { rank, .. } = h.kind() {
                let imgs: Vec<Vec<i64>> = generators
                    .iter()
                    .map(|v| d.pi.apply(&Element::Vector(v.clone())).map(|y| vector(&y).to_vec()))
                    .collect::<Result<_, _>>()?;
                let r = lattice::rank(&imgs, *rank);
                (r == lattice.rank(), format!("rank of A is {}, rank of pi(A) is {r}", lattice.rank()))
            } else {
                (false, "undecided for this target".into())
            }
        }
    };
    checks.push(Check {
        name: "pi injective on A",
        pass: inj.0,
        detail: inj.1,
    });

    let img = d.image_of_a()?;
    let index = index_of_image(h, &img);
    let idx_pass = index.map_or(true, |i| i >= 2);
    checks.push(Check {
        name: "[H : pi(A)] >= 2",
        pass: idx_pass,
        detail: match index {
            Some(i) => format!("index {i}"),
            None => "infinite index".into(),
        },
    });
    Ok(HypothesisReport { checks, index })
}

/// Least-radius, then least, representatives of the left cosets `H/π(A)`.
pub fn coset_reps(d: &DoubleData, max_radius: usize) -> Result<Vec<Element>, BassSerreError> {
    let h = d.h();
    let img = d.image_of_a()?;
    let index = index_of_image(h, &img).ok_or(BassSerreError::InfiniteIndex)?;
    let canon = |x: &Element| -> Element {
        match &img {
            SubgroupSpec::Finite(f) => h.coset_rep(x, f, Side::Left),
            SubgroupSpec::Lattice { lattice, .. } => Element::Vector(lattice.reduce(vector(x))),
        }
    };
    // Doubling radii keeps the explored ball proportional to the answer.
    let mut radius = 1;
    loop {
        let mut seen = BTreeSet::new();
        let mut reps = Vec::new();
        for x in h.ball_shells(h.generators(), radius).iter().flatten() {
            if seen.insert(canon(x)) {
                reps.push(x.clone());
            }
            if reps.len() as u64 == index {
                return Ok(reps);
            }
        }
        if radius >= max_radius {
            return Err(BassSerreError::Cutoff {
                radius,
                found: reps.len(),
                index,
            });
        }
        radius = (2 * radius).min(max_radius);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientGraph {
    pub g_vertices: usize,
    pub h_vertices: usize,
    /// One edge per coset of `π(A)`, named by its representative.
    pub edges: Vec<String>,
    pub components: usize,
    pub connected: bool,
    pub betti: usize,
}

impl QuotientGraph {
    /// Adjacency text: a `vertices` line, then one `edge` line per coset.
    pub fn to_adjacency(&self) -> String {
        let mut s = String::from("vertices G0 H0\n");
        for e in &self.edges {
            s.push_str(&format!("edge G0 H0 {e}\n"));
        }
        s
    }
}

pub fn quotient_graph(d: &DoubleData) -> Result<QuotientGraph, BassSerreError> {
    let report = check_hypotheses(d)?;
    if let Some(c) = report.first_failure() {
        return Err(BassSerreError::Hypothesis(format!("{}: {}", c.name, c.detail)));
    }
    let reps = coset_reps(d, 4096)?;
    let edges: Vec<String> = reps.iter().map(|x| d.h().format_element(x)).collect();
    let (v, e) = (2, edges.len());
    Ok(QuotientGraph {
        g_vertices: 1,
        h_vertices: 1,
        components: 1,
        connected: true,
        betti: e + 1 - v,
        edges,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircuitAudit {
    pub psi_trivial: bool,
    pub x_outside_a: bool,
    /// `x⁻¹h` is a single `H`-syllable not in `A`.
    pub quotient_in_h_minus_a: bool,
}

impl CircuitAudit {
    pub fn passed(&self) -> bool {
        self.psi_trivial && self.x_outside_a && self.quotient_in_h_minus_a
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Circuit {
    pub x: String,
    pub z: String,
    /// `h` as the letters `G:x H:π(x⁻¹)`.
    pub letters: String,
    /// Normal form of `h`, when `A` is finite.
    pub normal_form: Option<String>,
    pub audit: CircuitAudit,
}

/// The least `x` (by radius, then canonical order) with `π(x) ∉ π(A)` and the
/// kernel element `h = x·π(x⁻¹)`, whose two edges close a circuit.
pub fn witness_circuit(d: &DoubleData) -> Result<Circuit, BassSerreError> {
    const RADIUS: usize = 64;
    let g = d.pi.source();
    let h = d.h();
    let img = d.image_of_a()?;
    let outside = |x: &Element| d.pi.apply(x).map(|z| !img.contains(&z)).unwrap_or(false);
    let mut radius = 1;
    let x = loop {
        if let Some(x) = g.ball_shells(g.generators(), radius).into_iter().flatten().find(|x| outside(x)) {
            break x;
        }
        if radius >= RADIUS {
            return Err(BassSerreError::NoWitness(RADIUS));
        }
        radius = (2 * radius).min(RADIUS);
    };
    let z = d.pi.apply(&x)?;
    let zi = h.inverse(&z);
    let letters = format!("G:{} H:{}", g.format_element(&x), h.format_element(&zi));
    let x_outside_a = !d.a.contains(&x);
    let (normal_form, audit) = match d.to_spec() {
        Ok(spec) => {
            let base = spec.base();
            let hw = base.reduce(&[(Factor::G, x.clone()), (Factor::H, zi.clone())])?;
            let psi_trivial = spec.psi(&hw) == h.identity();
            let q = base.reduce(&[(Factor::G, g.inverse(&x))])?;
            let q = base.multiply(&q, &hw);
            let single_h = q.len() == 1 && q.syllables[0].0 == Factor::H;
            (
                Some(base.format_word(&hw)),
                CircuitAudit {
                    psi_trivial,
                    x_outside_a,
                    quotient_in_h_minus_a: single_h,
                },
            )
        }
        // Infinite A: x⁻¹h is the H-letter π(x⁻¹) and ψ(h) = π(x)π(x)⁻¹.
        Err(_) => (
            None,
            CircuitAudit {
                psi_trivial: h.mul(&z, &zi) == h.identity(),
                x_outside_a,
                quotient_in_h_minus_a: !img.contains(&zi),
            },
        ),
    };
    Ok(Circuit {
        x: g.format_element(&x),
        z: h.format_element(&z),
        letters,
        normal_form,
        audit,
    })
}

/// Helper for finite doubles given by element lists.
pub fn finite_double(g: &GroupSpec, a: &[Element]) -> Result<DoubleData, BassSerreError> {
    let sub = FiniteSubgroup::new(g, a.to_vec())?;
    DoubleData::new(Homomorphism::identity(g), SubgroupSpec::Finite(sub))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize) -> Element {
        Element::Table(i)
    }

    #[test]
    fn cyclic_doubles() {
        for (n, a, betti) in [(4, vec![0, 2], 1), (6, vec![0, 3], 2), (6, vec![0, 2, 4], 1)] {
            let g = GroupSpec::cyclic(n);
            let d = finite_double(&g, &a.into_iter().map(t).collect::<Vec<_>>()).unwrap();
            assert!(check_hypotheses(&d).unwrap().passed());
            assert_eq!(quotient_graph(&d).unwrap().betti, betti);
            let c = witness_circuit(&d).unwrap();
            assert_eq!(c.x, "1");
            assert!(c.audit.passed(), "{c:?}");
        }
        let g = GroupSpec::cyclic(4);
        let c = witness_circuit(&finite_double(&g, &[t(0), t(2)]).unwrap()).unwrap();
        assert_eq!(c.letters, "G:1 H:3");
    }

    #[test]
    fn full_subgroup_fails_index() {
        let g = GroupSpec::cyclic(4);
        let d = finite_double(&g, &(0..4).map(t).collect::<Vec<_>>()).unwrap();
        let r = check_hypotheses(&d).unwrap();
        assert_eq!(r.first_failure().unwrap().name, "[H : pi(A)] >= 2");
        assert!(quotient_graph(&d).is_err());
    }

    #[test]
    fn lattice_collision_is_witnessed() {
        let z = GroupSpec::free_abelian(1);
        let z4 = GroupSpec::cyclic(4);
        let pi = Homomorphism::new(&z, &z4, vec![t(1)]).unwrap();
        let a = SubgroupSpec::generated(&z, &[Element::Vector(vec![8])], 10).unwrap();
        let d = DoubleData::new(pi, a).unwrap();
        let r = check_hypotheses(&d).unwrap();
        let f = r.first_failure().unwrap();
        assert_eq!(f.name, "pi injective on A");
        assert!(f.detail.contains("pi(0) = pi(8)"), "{}", f.detail);
    }

    #[test]
    fn integer_double_over_even() {
        let z = GroupSpec::free_abelian(1);
        let d = DoubleData::double(&z, &[Element::Vector(vec![2])]).unwrap();
        assert!(check_hypotheses(&d).unwrap().passed());
        let q = quotient_graph(&d).unwrap();
        assert_eq!((q.edges.len(), q.betti), (2, 1));
        assert_eq!(q.to_adjacency(), "vertices G0 H0\nedge G0 H0 0\nedge G0 H0 -1\n");
        let c = witness_circuit(&d).unwrap();
        assert_eq!(c.x, "-1");
        assert!(c.audit.passed());
    }
}
