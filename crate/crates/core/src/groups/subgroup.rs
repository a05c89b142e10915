use std::collections::{BTreeSet, VecDeque};

use super::lattice::Lattice;
use super::{Element, GroupError, GroupSpec, Kind};

/// A finite subgroup, elements listed in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSubgroup {
    ambient: GroupSpec,
    elements: Vec<Element>,
}

impl FiniteSubgroup {
    /// Validates that `elements` is a subgroup: identity present, closed
    /// under product and inverse, no duplicates. The list is sorted.
    pub fn new(ambient: &GroupSpec, mut elements: Vec<Element>) -> Result<Self, GroupError> {
        for x in &elements {
            ambient.check(x)?;
        }
        let n = elements.len();
        elements.sort();
        elements.dedup();
        if elements.len() != n {
            return Err(GroupError::InvalidSubgroup("duplicate elements".into()));
        }
        let id = ambient.identity();
        if elements.binary_search(&id).is_err() {
            return Err(GroupError::InvalidSubgroup("identity missing".into()));
        }
        for x in &elements {
            if elements.binary_search(&ambient.inverse(x)).is_err() {
                return Err(GroupError::InvalidSubgroup(format!(
                    "not closed under inverse at {}",
                    ambient.format_element(x)
                )));
            }
            for y in &elements {
                if elements.binary_search(&ambient.mul(x, y)).is_err() {
                    return Err(GroupError::InvalidSubgroup(format!(
                        "not closed under product at {}·{}",
                        ambient.format_element(x),
                        ambient.format_element(y)
                    )));
                }
            }
        }
        Ok(FiniteSubgroup {
            ambient: ambient.clone(),
            elements,
        })
    }

    /// Subgroup generated by `gens`; fails if the closure exceeds `cutoff`
    /// elements (for instance when a generator has infinite order).
    pub fn generated(ambient: &GroupSpec, gens: &[Element], cutoff: usize) -> Result<Self, GroupError> {
        for g in gens {
            ambient.check(g)?;
        }
        let id = ambient.identity();
        let mut set = BTreeSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = ambient.mul(&x, g);
                if set.insert(y.clone()) {
                    if set.len() > cutoff {
                        return Err(GroupError::Cutoff(cutoff));
                    }
                    queue.push_back(y);
                }
            }
        }
        Ok(FiniteSubgroup {
            ambient: ambient.clone(),
            elements: set.into_iter().collect(),
        })
    }

    pub fn trivial(ambient: &GroupSpec) -> Self {
        FiniteSubgroup {
            ambient: ambient.clone(),
            elements: vec![ambient.identity()],
        }
    }

    pub fn ambient(&self) -> &GroupSpec {
        &self.ambient
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// Position of `g` in the canonical listing.
    pub fn position(&self, g: &Element) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

/// A subgroup that is either finite or a sublattice of ℤ^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupSpec {
    Finite(FiniteSubgroup),
    Lattice {
        ambient: GroupSpec,
        generators: Vec<Vec<i64>>,
        lattice: Lattice,
    },
}

impl SubgroupSpec {
    /// Subgroup generated by `gens`: a lattice inside ℤ^d, otherwise the
    /// finite closure (bounded by `cutoff`).
    pub fn generated(ambient: &GroupSpec, gens: &[Element], cutoff: usize) -> Result<Self, GroupError> {
        for g in gens {
            ambient.check(g)?;
        }
        if let Kind::FreeAbelian { rank, .. } = ambient.kind() {
            let vecs: Vec<Vec<i64>> = gens
                .iter()
                .map(|g| match g {
                    Element::Vector(v) => v.clone(),
                    _ => unreachable!("checked above"),
                })
                .collect();
            let lattice = Lattice::new(&vecs, *rank);
            if lattice.rank() > 0 {
                return Ok(SubgroupSpec::Lattice {
                    ambient: ambient.clone(),
                    generators: vecs,
                    lattice,
                });
            }
        }
        Ok(SubgroupSpec::Finite(FiniteSubgroup::generated(ambient, gens, cutoff)?))
    }

    pub fn ambient(&self) -> &GroupSpec {
        match self {
            SubgroupSpec::Finite(a) => a.ambient(),
            SubgroupSpec::Lattice { ambient, .. } => ambient,
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match (self, g) {
            (SubgroupSpec::Finite(a), _) => a.contains(g),
            (SubgroupSpec::Lattice { lattice, .. }, Element::Vector(v)) => lattice.contains(v),
            _ => false,
        }
    }

    /// Generating set (all elements for a finite subgroup).
    pub fn generators(&self) -> Vec<Element> {
        match self {
            SubgroupSpec::Finite(a) => a.elements().to_vec(),
            SubgroupSpec::Lattice { generators, .. } => {
                generators.iter().cloned().map(Element::Vector).collect()
            }
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteSubgroup> {
        match self {
            SubgroupSpec::Finite(a) => Some(a),
            SubgroupSpec::Lattice { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SubgroupSpec::Finite(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_non_subgroups() {
        let z6 = GroupSpec::cyclic(6);
        let t = |i| Element::Table(i);
        assert!(FiniteSubgroup::new(&z6, vec![t(0), t(3)]).is_ok());
        assert!(FiniteSubgroup::new(&z6, vec![t(0), t(2)]).is_err());
        assert!(FiniteSubgroup::new(&z6, vec![t(3)]).is_err());
        assert!(FiniteSubgroup::new(&z6, vec![t(0), t(0)]).is_err());
    }

    #[test]
    fn closure_and_cutoff() {
        let z6 = GroupSpec::cyclic(6);
        let a = FiniteSubgroup::generated(&z6, &[Element::Table(2)], 100).unwrap();
        assert_eq!(a.elements(), &[Element::Table(0), Element::Table(2), Element::Table(4)]);
        let z = GroupSpec::free_abelian(1);
        assert!(FiniteSubgroup::generated(&z, &[Element::Vector(vec![1])], 50).is_err());
        let l = SubgroupSpec::generated(&z, &[Element::Vector(vec![8])], 50).unwrap();
        assert!(l.contains(&Element::Vector(vec![-24])));
        assert!(!l.contains(&Element::Vector(vec![4])));
    }
}
