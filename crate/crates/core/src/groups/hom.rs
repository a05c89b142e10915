use super::lattice::Lattice;
use super::{Element, FiniteSubgroup, GroupError, GroupSpec, Kind};

/// A homomorphism given by the images of the source generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    source: GroupSpec,
    target: GroupSpec,
    images: Vec<Element>,
}

fn bad(msg: String) -> GroupError {
    GroupError::InvalidHomomorphism(msg)
}

impl Homomorphism {
    /// `images` lists the image of every generator of `source`, or only of
    /// the caller-supplied ones (appended inverses then map to inverses).
    /// The source relations are verified: exhaustively for finite tables,
    /// by commutation and consistency with the basis for ℤ^d.
    pub fn new(source: &GroupSpec, target: &GroupSpec, images: Vec<Element>) -> Result<Self, GroupError> {
        let gens = source.generators();
        let images = if images.len() == gens.len() {
            images
        } else if images.len() == source.primary_generator_count() {
            let mut full = images;
            for g in &gens[full.len()..] {
                let inv = source.inverse(g);
                let k = gens[..source.primary_generator_count()]
                    .iter()
                    .position(|x| *x == inv)
                    .expect("appended generators are inverses of primary ones");
                full.push(target.inverse(&full[k]));
            }
            full
        } else {
            return Err(bad(format!(
                "{} images for {} generators",
                images.len(),
                gens.len()
            )));
        };
        for x in &images {
            target.check(x)?;
        }
        let f = Homomorphism {
            source: source.clone(),
            target: target.clone(),
            images,
        };
        f.verify_on(source, 0)?;
        Ok(f)
    }

    pub fn identity(g: &GroupSpec) -> Self {
        Homomorphism {
            source: g.clone(),
            target: g.clone(),
            images: g.generators().to_vec(),
        }
    }

    pub fn source(&self) -> &GroupSpec {
        &self.source
    }

    pub fn target(&self) -> &GroupSpec {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    fn image_of_word(&self, word: &[(usize, i64)], offset: usize) -> Element {
        word.iter().fold(self.target.identity(), |acc, &(gi, e)| {
            self.target
                .mul(&acc, &self.target.pow(&self.images[gi + offset], e))
        })
    }

    /// Verifies relations of `group`, whose generators sit at `offset` in the
    /// full generator list of the source.
    fn verify_on(&self, group: &GroupSpec, offset: usize) -> Result<(), GroupError> {
        let tgt = &self.target;
        let ngens = group.generators().len();
        let imgs = &self.images[offset..offset + ngens];
        match group.kind() {
            Kind::FiniteTable(t) => {
                let n = t.rows.len();
                let f: Vec<Element> = (0..n)
                    .map(|x| {
                        let w: Vec<(usize, i64)> = t.words[x].iter().map(|&g| (g, 1)).collect();
                        self.image_of_word(&w, offset)
                    })
                    .collect();
                for (gi, g) in group.generators().iter().enumerate() {
                    if let Element::Table(gx) = g {
                        if f[*gx] != imgs[gi] {
                            return Err(bad(format!(
                                "generator {} maps inconsistently",
                                group.format_element(g)
                            )));
                        }
                    }
                }
                for a in 0..n {
                    for b in 0..n {
                        if f[t.rows[a][b]] != tgt.mul(&f[a], &f[b]) {
                            return Err(bad(format!(
                                "f({}·{}) != f({})·f({})",
                                t.names[a], t.names[b], t.names[a], t.names[b]
                            )));
                        }
                    }
                }
                Ok(())
            }
            Kind::FreeAbelian { .. } => {
                for x in imgs {
                    for y in imgs {
                        if tgt.mul(x, y) != tgt.mul(y, x) {
                            return Err(bad("images of Z^d generators do not commute".into()));
                        }
                    }
                }
                for (gi, g) in group.generators().iter().enumerate() {
                    let w = group.factorize_unchecked(g);
                    if self.image_of_word(&w, offset) != imgs[gi] {
                        return Err(bad(format!(
                            "images violate a linear relation at generator {}",
                            group.format_element(g)
                        )));
                    }
                }
                Ok(())
            }
            Kind::DirectProduct(cs) => {
                let mut off = offset;
                let mut ranges = Vec::new();
                for c in cs {
                    self.verify_on(c, off)?;
                    ranges.push(off..off + c.generators().len());
                    off += c.generators().len();
                }
                for (i, ri) in ranges.iter().enumerate() {
                    for rj in &ranges[i + 1..] {
                        for x in &self.images[ri.clone()] {
                            for y in &self.images[rj.clone()] {
                                if tgt.mul(x, y) != tgt.mul(y, x) {
                                    return Err(bad(
                                        "images of different product components do not commute".into(),
                                    ));
                                }
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Homomorphic image of `g`.
    pub fn apply(&self, g: &Element) -> Result<Element, GroupError> {
        let w = self.source.factorize(g)?;
        Ok(self.image_of_word(&w, 0))
    }

    /// Whether the image is the whole target. `None` when this cannot be
    /// decided (an infinite target that is not ℤ^d).
    pub fn is_surjective(&self, cutoff: usize) -> Option<bool> {
        match self.target.kind() {
            Kind::FreeAbelian { rank, .. } => {
                let vecs: Vec<Vec<i64>> = self
                    .images
                    .iter()
                    .map(|x| match x {
                        Element::Vector(v) => v.clone(),
                        _ => unreachable!(),
                    })
                    .collect();
                Some(Lattice::new(&vecs, *rank).is_full())
            }
            _ => {
                let n = self.target.order()?;
                let img = FiniteSubgroup::generated(&self.target, &self.images, cutoff.max(n)).ok()?;
                Some(img.order() == n)
            }
        }
    }
}

/// Isomorphism between two finite subgroups, stored as an index map between
/// their canonical listings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupIso {
    source: FiniteSubgroup,
    target: FiniteSubgroup,
    forward: Vec<usize>,
    backward: Vec<usize>,
}

impl SubgroupIso {
    /// Builds the map from explicit `(source, target)` pairs and checks that
    /// it is a bijective homomorphism.
    pub fn new(
        source: &FiniteSubgroup,
        target: &FiniteSubgroup,
        pairs: &[(Element, Element)],
    ) -> Result<Self, GroupError> {
        let n = source.order();
        if target.order() != n {
            return Err(bad(format!(
                "subgroups have different orders {} and {}",
                n,
                target.order()
            )));
        }
        let mut forward = vec![usize::MAX; n];
        let mut backward = vec![usize::MAX; n];
        for (x, y) in pairs {
            let i = source
                .position(x)
                .ok_or_else(|| bad(format!("{x:?} is not in the source subgroup")))?;
            let j = target
                .position(y)
                .ok_or_else(|| bad(format!("{y:?} is not in the target subgroup")))?;
            if forward[i] != usize::MAX || backward[j] != usize::MAX {
                return Err(bad("map is not injective or lists an element twice".into()));
            }
            forward[i] = j;
            backward[j] = i;
        }
        if forward.contains(&usize::MAX) {
            return Err(bad("map is not defined on every element".into()));
        }
        let iso = SubgroupIso {
            source: source.clone(),
            target: target.clone(),
            forward,
            backward,
        };
        let (sg, tg) = (source.ambient(), target.ambient());
        for x in source.elements() {
            for y in source.elements() {
                if iso.map(&sg.mul(x, y)) != tg.mul(&iso.map(x), &iso.map(y)) {
                    return Err(bad("map is not a homomorphism".into()));
                }
            }
        }
        Ok(iso)
    }

    /// Restriction of a homomorphism to a finite subgroup, onto its image.
    pub fn restrict(f: &Homomorphism, a: &FiniteSubgroup) -> Result<Self, GroupError> {
        let images: Vec<Element> = a.elements().iter().map(|x| f.apply(x)).collect::<Result<_, _>>()?;
        let target = FiniteSubgroup::generated(f.target(), &images, a.order())?;
        let pairs: Vec<(Element, Element)> = a.elements().iter().cloned().zip(images).collect();
        Self::new(a, &target, &pairs)
    }

    pub fn source(&self) -> &FiniteSubgroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteSubgroup {
        &self.target
    }

    /// Image of an element of the source subgroup. Panics otherwise.
    pub fn map(&self, x: &Element) -> Element {
        let i = self.source.position(x).expect("element of the source subgroup");
        self.target.elements()[self.forward[i]].clone()
    }

    /// Preimage of an element of the target subgroup. Panics otherwise.
    pub fn map_back(&self, y: &Element) -> Element {
        let j = self.target.position(y).expect("element of the target subgroup");
        self.source.elements()[self.backward[j]].clone()
    }

    pub fn forward_index(&self, i: usize) -> usize {
        self.forward[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_mod_four() {
        let z = GroupSpec::free_abelian(1);
        let z4 = GroupSpec::cyclic(4);
        let pi = Homomorphism::new(&z, &z4, vec![Element::Table(1)]).unwrap();
        assert_eq!(pi.apply(&Element::Vector(vec![7])).unwrap(), Element::Table(3));
        assert_eq!(pi.apply(&z.identity()).unwrap(), z4.identity());
        assert_eq!(pi.is_surjective(100), Some(true));
    }

    #[test]
    fn identity_hom_is_identity() {
        let s3 = GroupSpec::symmetric(3);
        let id = Homomorphism::identity(&s3);
        for g in s3.enumerate() {
            assert_eq!(id.apply(&g).unwrap(), g);
        }
    }

    #[test]
    fn rejects_non_homomorphisms() {
        let z4 = GroupSpec::cyclic(4);
        let z3 = GroupSpec::cyclic(3);
        assert!(Homomorphism::new(&z4, &z3, vec![Element::Table(1)]).is_err());
        let z2 = GroupSpec::free_abelian(2);
        let s3 = GroupSpec::symmetric(3);
        let t1 = s3.parse_element("p102").unwrap();
        let t2 = s3.parse_element("p021").unwrap();
        assert!(Homomorphism::new(&z2, &s3, vec![t1, t2]).is_err());
        let dep = GroupSpec::free_abelian_with_generators(1, vec![vec![1], vec![2]]).unwrap();
        let z5 = GroupSpec::cyclic(5);
        assert!(Homomorphism::new(&dep, &z5, vec![Element::Table(1), Element::Table(3)]).is_err());
        assert!(Homomorphism::new(&dep, &z5, vec![Element::Table(1), Element::Table(2)]).is_ok());
    }

    #[test]
    fn subgroup_iso_checks() {
        let z4 = GroupSpec::cyclic(4);
        let s3 = GroupSpec::symmetric(3);
        let a = FiniteSubgroup::new(&z4, vec![Element::Table(0), Element::Table(2)]).unwrap();
        let t = s3.parse_element("p102").unwrap();
        let b = FiniteSubgroup::new(&s3, vec![s3.identity(), t.clone()]).unwrap();
        let iso = SubgroupIso::new(&a, &b, &[(Element::Table(0), s3.identity()), (Element::Table(2), t.clone())]).unwrap();
        assert_eq!(iso.map(&Element::Table(2)), t);
        assert_eq!(iso.map_back(&t), Element::Table(2));
        assert!(SubgroupIso::new(&a, &b, &[(Element::Table(0), t.clone()), (Element::Table(2), s3.identity())]).is_err());
    }
}
