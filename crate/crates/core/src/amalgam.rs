//! Amalgamated free products `G ∗_A H` over a finite subgroup `A`.
//!
//! Elements are kept in normal form `a·s₁·s₂⋯sₙ`: the head `a` lies in the
//! copy of `A` inside `G`, each syllable is the canonical right-coset
//! representative (least element of `A·x`) of a coset other than `A`, and
//! syllable factors alternate. Acting on points, `sₙ` applies first.

use std::collections::BTreeSet;
use std::fmt;

use crate::groups::{Element, FiniteSubgroup, GroupError, GroupSpec, Homomorphism, Side, SubgroupIso};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmalgamError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid amalgam: {0}")]
    InvalidSpec(String),
    #[error("letter {index} is not an element of factor {factor}")]
    WrongFactor { index: usize, factor: Factor },
    #[error("cannot parse word {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("factor {0} is infinite; a ball radius is required to enumerate its transversal")]
    InfiniteFactor(Factor),
    #[error("invalid double: {0}")]
    InvalidDouble(String),
}

/// Which factor of the amalgam a syllable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Factor {
    G,
    H,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::G => Factor::H,
            Factor::H => Factor::G,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::G => "G",
            Factor::H => "H",
        })
    }
}

/// `G ∗_A H` with `A` embedded in both factors; `phi` maps the `G`-copy onto
/// the `H`-copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamSpec {
    g: GroupSpec,
    h: GroupSpec,
    phi: SubgroupIso,
}

impl AmalgamSpec {
    pub fn new(g: &GroupSpec, h: &GroupSpec, phi: SubgroupIso) -> Result<Self, AmalgamError> {
        if phi.source().ambient() != g {
            return Err(AmalgamError::InvalidSpec("A_G is not a subgroup of G".into()));
        }
        if phi.target().ambient() != h {
            return Err(AmalgamError::InvalidSpec("A_H is not a subgroup of H".into()));
        }
        Ok(AmalgamSpec {
            g: g.clone(),
            h: h.clone(),
            phi,
        })
    }

    /// Free product (trivial `A`).
    pub fn free_product(g: &GroupSpec, h: &GroupSpec) -> Self {
        let a_g = FiniteSubgroup::trivial(g);
        let a_h = FiniteSubgroup::trivial(h);
        let phi = SubgroupIso::new(&a_g, &a_h, &[(g.identity(), h.identity())]).expect("trivial map");
        AmalgamSpec {
            g: g.clone(),
            h: h.clone(),
            phi,
        }
    }

    pub fn group(&self, f: Factor) -> &GroupSpec {
        match f {
            Factor::G => &self.g,
            Factor::H => &self.h,
        }
    }

    /// The copy of `A` inside factor `f`.
    pub fn sub(&self, f: Factor) -> &FiniteSubgroup {
        match f {
            Factor::G => self.phi.source(),
            Factor::H => self.phi.target(),
        }
    }

    pub fn phi(&self) -> &SubgroupIso {
        &self.phi
    }

    /// `A` as listed in `G`; heads range over these.
    pub fn a(&self) -> &FiniteSubgroup {
        self.phi.source()
    }

    /// Moves an element of the `G`-copy of `A` into factor `f`.
    pub fn a_into(&self, f: Factor, a: &Element) -> Element {
        match f {
            Factor::G => a.clone(),
            Factor::H => self.phi.map(a),
        }
    }

    /// Moves an element of the copy of `A` in factor `f` back to `G`.
    pub fn a_from(&self, f: Factor, a: &Element) -> Element {
        match f {
            Factor::G => a.clone(),
            Factor::H => self.phi.map_back(a),
        }
    }

    pub fn identity(&self) -> AmalgamWord {
        AmalgamWord {
            head: self.g.identity(),
            syllables: Vec::new(),
        }
    }

    /// Normal form of the product of `raw`, letters multiplied left to right.
    ///
    /// Works right to left, carrying an element of `A` that is pushed into
    /// the next letter; merged letters that fall into `A` are absorbed.
    pub fn reduce(&self, raw: &[(Factor, Element)]) -> Result<AmalgamWord, AmalgamError> {
        for (index, (f, x)) in raw.iter().enumerate() {
            if !self.group(*f).contains(x) {
                return Err(AmalgamError::WrongFactor { index, factor: *f });
            }
        }
        // `out` holds syllables right to left; `carry` sits to their left.
        let mut out: Vec<(Factor, Element)> = Vec::new();
        let mut carry = self.g.identity();
        for (f, x) in raw.iter().rev() {
            let grp = self.group(*f);
            let mut z = grp.mul(x, &self.a_into(*f, &carry));
            if let Some((lf, s)) = out.last() {
                if lf == f {
                    z = grp.mul(&z, s);
                    out.pop();
                }
            }
            let a_f = self.sub(*f);
            if a_f.contains(&z) {
                carry = self.a_from(*f, &z);
            } else {
                let rep = grp.coset_rep(&z, a_f, Side::Right);
                let rest = grp.mul(&z, &grp.inverse(&rep));
                carry = self.a_from(*f, &rest);
                out.push((*f, rep));
            }
        }
        out.reverse();
        Ok(AmalgamWord {
            head: carry,
            syllables: out,
        })
    }

    pub fn multiply(&self, u: &AmalgamWord, v: &AmalgamWord) -> AmalgamWord {
        let mut raw = u.flatten();
        raw.extend(v.flatten());
        self.reduce(&raw).expect("normal-form words are valid")
    }

    pub fn inverse(&self, w: &AmalgamWord) -> AmalgamWord {
        let raw: Vec<(Factor, Element)> = w
            .flatten()
            .into_iter()
            .rev()
            .map(|(f, x)| (f, self.group(f).inverse(&x)))
            .collect();
        self.reduce(&raw).expect("normal-form words are valid")
    }

    /// Checks the normal-form invariants.
    pub fn validate(&self, w: &AmalgamWord) -> Result<(), String> {
        if !self.a().contains(&w.head) {
            return Err("head is not in A".into());
        }
        for (i, (f, x)) in w.syllables.iter().enumerate() {
            let grp = self.group(*f);
            if !grp.contains(x) {
                return Err(format!("syllable {i} is not in factor {f}"));
            }
            if self.sub(*f).contains(x) {
                return Err(format!("syllable {i} lies in A"));
            }
            if grp.coset_rep(x, self.sub(*f), Side::Right) != *x {
                return Err(format!("syllable {i} is not a canonical coset representative"));
            }
            if i > 0 && w.syllables[i - 1].0 == *f {
                return Err(format!("syllables {} and {i} are in the same factor", i - 1));
            }
        }
        Ok(())
    }

    /// Canonical right-coset representatives of factor `f` other than `A`
    /// itself, sorted. Infinite factors use the cosets met by the Cayley ball
    /// of `radius`.
    pub fn transversal(&self, f: Factor, radius: Option<usize>) -> Result<Vec<Element>, AmalgamError> {
        let grp = self.group(f);
        let a = self.sub(f);
        let elems: Vec<Element> = match grp.elements() {
            Ok(e) => e,
            Err(_) => {
                let r = radius.ok_or(AmalgamError::InfiniteFactor(f))?;
                grp.ball_shells(grp.generators(), r).concat()
            }
        };
        let reps: BTreeSet<Element> = elems
            .iter()
            .filter(|x| !a.contains(x))
            .map(|x| grp.coset_rep(x, a, Side::Right))
            .collect();
        Ok(reps.into_iter().collect())
    }

    /// Every normal-form word with at most `max_len` syllables, each once,
    /// ordered by length, first factor, syllables, then head. `radius`
    /// bounds the transversal of infinite factors.
    pub fn enumerate_words(&self, max_len: usize, radius: Option<usize>) -> Result<Vec<AmalgamWord>, AmalgamError> {
        let need = |f| if max_len > 0 { self.transversal(f, radius) } else { Ok(Vec::new()) };
        let tg = need(Factor::G)?;
        let th = need(Factor::H)?;
        let heads = self.a().elements();
        let mut out = Vec::new();
        for len in 0..=max_len {
            let starts: &[Factor] = if len == 0 { &[Factor::G] } else { &[Factor::G, Factor::H] };
            for &start in starts {
                let mut shapes: Vec<Vec<(Factor, Element)>> = vec![Vec::new()];
                let mut f = start;
                for _ in 0..len {
                    let t = if f == Factor::G { &tg } else { &th };
                    shapes = shapes
                        .into_iter()
                        .flat_map(|s| {
                            t.iter().map(move |x| {
                                let mut s = s.clone();
                                s.push((f, x.clone()));
                                s
                            })
                        })
                        .collect();
                    f = f.other();
                }
                for s in shapes {
                    for a in heads {
                        out.push(AmalgamWord {
                            head: a.clone(),
                            syllables: s.clone(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Text form `head | F:rep F:rep …`.
    pub fn format_word(&self, w: &AmalgamWord) -> String {
        let mut s = self.g.format_element(&w.head);
        s.push_str(" |");
        for (f, x) in &w.syllables {
            s.push_str(&format!(" {f}:{}", self.group(*f).format_element(x)));
        }
        s
    }

    /// Parses [`format_word`](AmalgamSpec::format_word) output and checks that
    /// it is already in normal form.
    pub fn parse_word(&self, text: &str) -> Result<AmalgamWord, AmalgamError> {
        let err = |reason: String| AmalgamError::Parse {
            input: text.to_string(),
            reason,
        };
        let (head, rest) = text.split_once('|').ok_or_else(|| err("missing '|'".into()))?;
        let head = self.g.parse_element(head).map_err(|e| err(e.to_string()))?;
        let mut syllables = Vec::new();
        for tok in rest.split_whitespace() {
            let (f, x) = tok.split_once(':').ok_or_else(|| err(format!("bad syllable {tok:?}")))?;
            let f = match f {
                "G" => Factor::G,
                "H" => Factor::H,
                _ => return Err(err(format!("unknown factor {f:?}"))),
            };
            let x = self.group(f).parse_element(x).map_err(|e| err(e.to_string()))?;
            syllables.push((f, x));
        }
        let w = AmalgamWord { head, syllables };
        self.validate(&w).map_err(err)?;
        Ok(w)
    }
}

/// Normal-form element of an amalgam; see the module docs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AmalgamWord {
    pub head: Element,
    pub syllables: Vec<(Factor, Element)>,
}

impl AmalgamWord {
    /// Syllable length.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Letters of the word, head first (as a `G`-letter).
    pub fn flatten(&self) -> Vec<(Factor, Element)> {
        let mut raw = Vec::with_capacity(self.syllables.len() + 1);
        raw.push((Factor::G, self.head.clone()));
        raw.extend(self.syllables.iter().cloned());
        raw
    }
}

/// An amalgam `G ∗_A H` together with an epimorphism `π: G → H` that agrees
/// with the identification of `A`.
#[derive(Clone, Debug)]
pub struct DoubleSpec {
    base: AmalgamSpec,
    pi: Homomorphism,
}

impl DoubleSpec {
    pub fn new(base: AmalgamSpec, pi: Homomorphism) -> Result<Self, AmalgamError> {
        if pi.source() != base.group(Factor::G) || pi.target() != base.group(Factor::H) {
            return Err(AmalgamError::InvalidDouble("pi must map G to H".into()));
        }
        match pi.is_surjective(1 << 20) {
            Some(true) => {}
            Some(false) => return Err(AmalgamError::InvalidDouble("pi is not surjective".into())),
            None => return Err(AmalgamError::InvalidDouble("cannot decide surjectivity of pi".into())),
        }
        for a in base.a().elements() {
            if pi.apply(a)? != base.phi().map(a) {
                return Err(AmalgamError::InvalidDouble(format!(
                    "pi disagrees with the identification of A at {}",
                    base.group(Factor::G).format_element(a)
                )));
            }
        }
        Ok(DoubleSpec { base, pi })
    }

    /// The amalgam `G ∗_A H` with `A_H = π(A)`; requires `π|_A` injective.
    pub fn from_epimorphism(pi: Homomorphism, a: &FiniteSubgroup) -> Result<Self, AmalgamError> {
        let phi = SubgroupIso::restrict(&pi, a)
            .map_err(|e| AmalgamError::InvalidDouble(format!("pi restricted to A: {e}")))?;
        let base = AmalgamSpec::new(pi.source(), pi.target(), phi)?;
        Self::new(base, pi)
    }

    pub fn base(&self) -> &AmalgamSpec {
        &self.base
    }

    pub fn pi(&self) -> &Homomorphism {
        &self.pi
    }

    /// `ψ: G ∗_A H → H`, `π` on `G`, the identity on `H`.
    pub fn psi(&self, w: &AmalgamWord) -> Element {
        let h = self.base.group(Factor::H);
        w.flatten().iter().fold(h.identity(), |acc, (f, x)| {
            let y = match f {
                Factor::G => self.pi.apply(x).expect("G-letter"),
                Factor::H => x.clone(),
            };
            h.mul(&acc, &y)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4_z6() -> AmalgamSpec {
        let g = GroupSpec::cyclic(4);
        let h = GroupSpec::cyclic(6);
        let t = Element::Table;
        let a_g = FiniteSubgroup::new(&g, vec![t(0), t(2)]).unwrap();
        let a_h = FiniteSubgroup::new(&h, vec![t(0), t(3)]).unwrap();
        let phi = SubgroupIso::new(&a_g, &a_h, &[(t(0), t(0)), (t(2), t(3))]).unwrap();
        AmalgamSpec::new(&g, &h, phi).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let s = z4_z6();
        let t = Element::Table;
        assert_eq!(s.reduce(&[]).unwrap(), s.identity());
        let w = s.reduce(&[(Factor::G, t(2))]).unwrap();
        assert_eq!(w.head, t(2));
        assert!(w.is_empty());
        let w = s.reduce(&[(Factor::G, t(1)), (Factor::G, t(1))]).unwrap();
        assert_eq!(w.head, t(2));
        assert!(w.is_empty());
        // H-letter 3 is the image of 2 and is absorbed into the head.
        let w = s.reduce(&[(Factor::H, t(3))]).unwrap();
        assert_eq!((w.head.clone(), w.len()), (t(2), 0));
        // 4 = 3 + 1 in Z/6 becomes head 2 with syllable 1.
        let w = s.reduce(&[(Factor::H, t(4))]).unwrap();
        assert_eq!(w.head, t(2));
        assert_eq!(w.syllables, vec![(Factor::H, t(1))]);
    }

    #[test]
    fn rejects_letters_from_the_wrong_factor() {
        let s = z4_z6();
        assert!(matches!(
            s.reduce(&[(Factor::G, Element::Table(5))]),
            Err(AmalgamError::WrongFactor { index: 0, .. })
        ));
    }

    #[test]
    fn word_counts() {
        let s = z4_z6();
        let by_len = |l: usize| s.enumerate_words(3, None).unwrap().iter().filter(|w| w.len() == l).count();
        assert_eq!(by_len(0), 2);
        assert_eq!(by_len(0) + by_len(1), 8);
        assert_eq!(by_len(2), 8);
        assert_eq!(by_len(3), 2 * (1 * 2 * 1 + 2 * 1 * 2));
    }

    #[test]
    fn inverse_and_text_round_trip() {
        let s = z4_z6();
        for w in s.enumerate_words(3, None).unwrap() {
            assert_eq!(s.multiply(&w, &s.inverse(&w)), s.identity());
            let text = s.format_word(&w);
            assert_eq!(s.parse_word(&text).unwrap(), w, "{text}");
        }
        assert!(s.parse_word("0 | G:1 G:1").is_err());
        assert!(s.parse_word("0 | H:4").is_err());
    }

    #[test]
    fn psi_kills_the_circuit_word() {
        let g = GroupSpec::cyclic(4);
        let pi = Homomorphism::identity(&g);
        let a = FiniteSubgroup::new(&g, vec![Element::Table(0), Element::Table(2)]).unwrap();
        let d = DoubleSpec::from_epimorphism(pi, &a).unwrap();
        let w = d.base().reduce(&[(Factor::G, Element::Table(1)), (Factor::H, Element::Table(3))]).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(d.psi(&w), Element::Table(0));
        assert_eq!(d.psi(&d.base().identity()), Element::Table(0));
    }
}
