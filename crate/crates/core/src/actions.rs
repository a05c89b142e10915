//! Group actions on countable point spaces with a deterministic indexing,
//! A-orbit blocks, and the checks behind the 𝒜′ witness construction.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amalgam::AmalgamSpec;
use crate::folner::{FolnerError, FolnerPairs};
use crate::groups::lattice::Lattice;
use crate::groups::{Element, FiniteSubgroup, GroupError, GroupSpec, Homomorphism, Kind, SubgroupIso};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid action: {0}")]
    Invalid(String),
    #[error("cannot parse point {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("A does not act freely: {a} fixes {point}")]
    NotFree { point: String, a: String },
    #[error("acting group must be infinite")]
    FiniteGroup,
    #[error(transparent)]
    Folner(#[from] Box<FolnerError>),
}

/// A point of a [`PointSpace`]. Components of unions and copies are tagged
/// by their position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    El(Element),
    Tagged(usize, Box<Point>),
}

impl Point {
    pub fn tagged(tag: usize, p: Point) -> Point {
        Point::Tagged(tag, Box::new(p))
    }
}

/// Subgroup used by a coset space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CosetKind {
    /// Left cosets `gK` of a finite subgroup, represented by their least element.
    Subgroup(FiniteSubgroup),
    /// Cosets of a sublattice of ℤ^d, represented by reduced vectors.
    Lattice(Lattice),
    /// `G/ker π` for a homomorphism onto a finite group, represented by `π(g)`.
    Kernel(Homomorphism),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointSpace {
    Regular,
    Cosets(CosetKind),
    DisjointUnion(Vec<PointSpace>),
    /// Countably many copies, indexed diagonally.
    Copies(Box<PointSpace>),
}

/// A group acting on a point space. Every component of the space is acted
/// on by the same group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpec {
    group: GroupSpec,
    space: PointSpace,
}

fn validate_space(group: &GroupSpec, space: &PointSpace) -> Result<(), ActionError> {
    match space {
        PointSpace::Regular => Ok(()),
        PointSpace::Cosets(CosetKind::Subgroup(k)) => {
            if k.ambient() != group {
                return Err(ActionError::Invalid("coset subgroup lives in another group".into()));
            }
            Ok(())
        }
        PointSpace::Cosets(CosetKind::Lattice(l)) => match group.kind() {
            Kind::FreeAbelian { rank, .. } if *rank == l.dim() => Ok(()),
            _ => Err(ActionError::Invalid("lattice cosets need Z^d of matching rank".into())),
        },
        PointSpace::Cosets(CosetKind::Kernel(f)) => {
            if f.source() != group {
                return Err(ActionError::Invalid("homomorphism has another source".into()));
            }
            if !f.target().is_finite() {
                return Err(ActionError::Invalid("kernel quotient needs a finite target".into()));
            }
            Ok(())
        }
        PointSpace::DisjointUnion(parts) => {
            if parts.is_empty() {
                return Err(ActionError::Invalid("empty disjoint union".into()));
            }
            parts.iter().try_for_each(|p| validate_space(group, p))
        }
        PointSpace::Copies(inner) => validate_space(group, inner),
    }
}

fn kernel_image(f: &Homomorphism) -> FiniteSubgroup {
    let n = f.target().order().expect("finite target");
    FiniteSubgroup::generated(f.target(), f.images(), n).expect("image of a finite group")
}

impl ActionSpec {
    pub fn new(group: &GroupSpec, space: PointSpace) -> Result<Self, ActionError> {
        validate_space(group, &space)?;
        Ok(ActionSpec {
            group: group.clone(),
            space,
        })
    }

    pub fn regular(group: &GroupSpec) -> Self {
        ActionSpec {
            group: group.clone(),
            space: PointSpace::Regular,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    /// `g·p`. Panics if `p` is not a point of the space.
    pub fn act(&self, g: &Element, p: &Point) -> Point {
        act_in(&self.group, &self.space, g, p)
    }

    pub fn contains(&self, p: &Point) -> bool {
        contains_in(&self.group, &self.space, p)
    }

    /// Number of points, `None` if infinite.
    pub fn size(&self) -> Option<usize> {
        size_of(&self.group, &self.space)
    }

    /// Deterministic, duplicate-free stream of all points.
    pub fn points(&self) -> Box<dyn Iterator<Item = Point>> {
        points_of(&self.group, &self.space)
    }

    pub fn indexed(&self) -> IndexedSpace {
        IndexedSpace::new(self.points())
    }

    /// Text form: elements print as in the group, tagged points as
    /// `[tag]inner`.
    pub fn format_point(&self, p: &Point) -> String {
        match p {
            Point::El(e) => match &self.space {
                PointSpace::Cosets(CosetKind::Kernel(f)) => f.target().format_element(e),
                _ => self.group.format_element(e),
            },
            Point::Tagged(i, inner) => {
                let sub = match &self.space {
                    PointSpace::DisjointUnion(parts) => parts.get(*i).cloned(),
                    PointSpace::Copies(inner) => Some((**inner).clone()),
                    _ => None,
                };
                let s = match sub {
                    Some(space) => ActionSpec {
                        group: self.group.clone(),
                        space,
                    }
                    .format_point(inner),
                    None => format!("{inner:?}"),
                };
                format!("[{i}]{s}")
            }
        }
    }

    pub fn parse_point(&self, text: &str) -> Result<Point, ActionError> {
        let err = |reason: &str| ActionError::Parse {
            input: text.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        let p = match &self.space {
            PointSpace::DisjointUnion(_) | PointSpace::Copies(_) => {
                let rest = t.strip_prefix('[').ok_or_else(|| err("expected [tag]"))?;
                let (tag, inner) = rest.split_once(']').ok_or_else(|| err("expected [tag]"))?;
                let tag: usize = tag.parse().map_err(|_| err("bad tag"))?;
                let space = match &self.space {
                    PointSpace::DisjointUnion(parts) => parts.get(tag).cloned().ok_or_else(|| err("tag out of range"))?,
                    PointSpace::Copies(inner) => (**inner).clone(),
                    _ => unreachable!(),
                };
                let sub = ActionSpec {
                    group: self.group.clone(),
                    space,
                };
                Point::tagged(tag, sub.parse_point(inner)?)
            }
            PointSpace::Cosets(CosetKind::Kernel(f)) => Point::El(f.target().parse_element(t)?),
            _ => Point::El(self.group.parse_element(t)?),
        };
        if !self.contains(&p) {
            return Err(err("not a canonical point of the space"));
        }
        Ok(p)
    }
}

fn act_in(group: &GroupSpec, space: &PointSpace, g: &Element, p: &Point) -> Point {
    match (space, p) {
        (PointSpace::Regular, Point::El(x)) => Point::El(group.mul(g, x)),
        (PointSpace::Cosets(CosetKind::Subgroup(k)), Point::El(x)) => {
            Point::El(group.coset_rep(&group.mul(g, x), k, crate::groups::Side::Left))
        }
        (PointSpace::Cosets(CosetKind::Lattice(l)), Point::El(Element::Vector(x))) => {
            let Element::Vector(gv) = g else { panic!("foreign element") };
            let sum: Vec<i64> = gv.iter().zip(x).map(|(a, b)| a + b).collect();
            Point::El(Element::Vector(l.reduce(&sum)))
        }
        (PointSpace::Cosets(CosetKind::Kernel(f)), Point::El(y)) => {
            Point::El(f.target().mul(&f.apply(g).expect("element of the acting group"), y))
        }
        (PointSpace::DisjointUnion(parts), Point::Tagged(i, q)) => {
            Point::tagged(*i, act_in(group, &parts[*i], g, q))
        }
        (PointSpace::Copies(inner), Point::Tagged(i, q)) => Point::tagged(*i, act_in(group, inner, g, q)),
        _ => panic!("point {p:?} does not belong to the space"),
    }
}

fn contains_in(group: &GroupSpec, space: &PointSpace, p: &Point) -> bool {
    match (space, p) {
        (PointSpace::Regular, Point::El(x)) => group.contains(x),
        (PointSpace::Cosets(CosetKind::Subgroup(k)), Point::El(x)) => {
            group.contains(x) && group.coset_rep(x, k, crate::groups::Side::Left) == *x
        }
        (PointSpace::Cosets(CosetKind::Lattice(l)), Point::El(Element::Vector(v))) => {
            v.len() == l.dim() && l.reduce(v) == *v
        }
        (PointSpace::Cosets(CosetKind::Kernel(f)), Point::El(y)) => kernel_image(f).contains(y),
        (PointSpace::DisjointUnion(parts), Point::Tagged(i, q)) => {
            parts.get(*i).is_some_and(|s| contains_in(group, s, q))
        }
        (PointSpace::Copies(inner), Point::Tagged(_, q)) => contains_in(group, inner, q),
        _ => false,
    }
}

fn size_of(group: &GroupSpec, space: &PointSpace) -> Option<usize> {
    match space {
        PointSpace::Regular => group.order(),
        PointSpace::Cosets(CosetKind::Subgroup(k)) => group.order().map(|n| n / k.order()),
        PointSpace::Cosets(CosetKind::Lattice(l)) => l.index().map(|i| i as usize),
        PointSpace::Cosets(CosetKind::Kernel(f)) => Some(kernel_image(f).order()),
        PointSpace::DisjointUnion(parts) => parts.iter().map(|s| size_of(group, s)).sum(),
        PointSpace::Copies(_) => None,
    }
}

/// Removes duplicates from a stream, stopping after `limit` distinct items.
struct Distinct {
    inner: Box<dyn Iterator<Item = Point>>,
    seen: HashSet<Point>,
    limit: Option<usize>,
}

impl Iterator for Distinct {
    type Item = Point;
    fn next(&mut self) -> Option<Point> {
        if self.limit.is_some_and(|n| self.seen.len() >= n) {
            return None;
        }
        for p in self.inner.by_ref() {
            if self.seen.insert(p.clone()) {
                return Some(p);
            }
        }
        None
    }
}

struct RoundRobin {
    parts: Vec<Option<Box<dyn Iterator<Item = Point>>>>,
    turn: usize,
}

impl Iterator for RoundRobin {
    type Item = Point;
    fn next(&mut self) -> Option<Point> {
        let n = self.parts.len();
        for _ in 0..n {
            let i = self.turn;
            self.turn = (self.turn + 1) % n;
            if let Some(it) = &mut self.parts[i] {
                match it.next() {
                    Some(p) => return Some(Point::tagged(i, p)),
                    None => self.parts[i] = None,
                }
            }
        }
        None
    }
}

/// Cantor-diagonal enumeration of `(copy, inner index)` pairs.
struct Diagonal {
    inner: Box<dyn Iterator<Item = Point>>,
    cache: Vec<Point>,
    exhausted: bool,
    sum: usize,
    copy: usize,
}

impl Diagonal {
    fn inner_point(&mut self, j: usize) -> Option<Point> {
        while !self.exhausted && self.cache.len() <= j {
            match self.inner.next() {
                Some(p) => self.cache.push(p),
                None => self.exhausted = true,
            }
        }
        self.cache.get(j).cloned()
    }
}

impl Iterator for Diagonal {
    type Item = Point;
    fn next(&mut self) -> Option<Point> {
        loop {
            if self.copy > self.sum {
                self.sum += 1;
                self.copy = 0;
                if self.exhausted {
                    // Skip copies whose inner index is already out of range.
                    self.copy = (self.sum + 1).saturating_sub(self.cache.len());
                }
                if self.exhausted && self.cache.is_empty() {
                    return None;
                }
            }
            let k = self.copy;
            self.copy += 1;
            if let Some(p) = self.inner_point(self.sum - k) {
                return Some(Point::tagged(k, p));
            }
        }
    }
}

fn points_of(group: &GroupSpec, space: &PointSpace) -> Box<dyn Iterator<Item = Point>> {
    match space {
        PointSpace::Regular => Box::new(group.enumerate().map(Point::El)),
        PointSpace::Cosets(CosetKind::Subgroup(k)) => {
            let (g, k) = (group.clone(), k.clone());
            let limit = size_of(group, space);
            Box::new(Distinct {
                inner: Box::new(
                    group
                        .enumerate()
                        .map(move |x| Point::El(g.coset_rep(&x, &k, crate::groups::Side::Left))),
                ),
                seen: HashSet::new(),
                limit,
            })
        }
        PointSpace::Cosets(CosetKind::Lattice(l)) => {
            let l2 = l.clone();
            Box::new(Distinct {
                inner: Box::new(group.enumerate().map(move |x| match x {
                    Element::Vector(v) => Point::El(Element::Vector(l2.reduce(&v))),
                    _ => unreachable!("validated"),
                })),
                seen: HashSet::new(),
                limit: l.index().map(|i| i as usize),
            })
        }
        PointSpace::Cosets(CosetKind::Kernel(f)) => {
            let img = kernel_image(f);
            Box::new(img.elements().to_vec().into_iter().map(Point::El))
        }
        PointSpace::DisjointUnion(parts) => Box::new(RoundRobin {
            parts: parts.iter().map(|s| Some(points_of(group, s))).collect(),
            turn: 0,
        }),
        PointSpace::Copies(inner) => Box::new(Diagonal {
            inner: points_of(group, inner),
            cache: Vec::new(),
            exhausted: false,
            sum: 0,
            copy: 0,
        }),
    }
}

/// Lazily materialized index of a point stream.
pub struct IndexedSpace {
    points: Vec<Point>,
    index: HashMap<Point, usize>,
    source: Box<dyn Iterator<Item = Point>>,
    exhausted: bool,
}

impl IndexedSpace {
    fn new(source: Box<dyn Iterator<Item = Point>>) -> Self {
        IndexedSpace {
            points: Vec::new(),
            index: HashMap::new(),
            source,
            exhausted: false,
        }
    }

    fn grow(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        match self.source.next() {
            Some(p) => {
                self.index.insert(p.clone(), self.points.len());
                self.points.push(p);
                true
            }
            None => {
                self.exhausted = true;
                false
            }
        }
    }

    pub fn get(&mut self, i: usize) -> Option<&Point> {
        while self.points.len() <= i {
            if !self.grow() {
                return None;
            }
        }
        self.points.get(i)
    }

    /// The first `n` points (fewer if the space is smaller).
    pub fn prefix(&mut self, n: usize) -> &[Point] {
        while self.points.len() < n && self.grow() {}
        &self.points[..n.min(self.points.len())]
    }

    /// Index of `p`, materializing at most `cutoff` points.
    pub fn index_of(&mut self, p: &Point, cutoff: usize) -> Option<usize> {
        loop {
            if let Some(&i) = self.index.get(p) {
                return Some(i);
            }
            if self.points.len() >= cutoff || !self.grow() {
                return None;
            }
        }
    }

    pub fn materialized(&self) -> usize {
        self.points.len()
    }
}

/// Points reachable from `x` by products of at most `depth` generators.
pub fn orbit(act: &ActionSpec, x: &Point, depth: usize) -> BTreeSet<Point> {
    let mut seen = BTreeSet::from([x.clone()]);
    let mut frontier = vec![x.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in &frontier {
            for g in act.group().generators() {
                let q = act.act(g, p);
                if seen.insert(q.clone()) {
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Transitivity {
    /// Every prefix point lies in the orbit of the first point within `depth`.
    CertifiedOnPrefix { depth: usize },
    /// `point` (at `index`) was not reached within `max_depth`.
    Counterexample { point: String, index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub prefix: usize,
    pub max_depth: usize,
    pub base_point: String,
    pub result: Transitivity,
}

impl TransitivityReport {
    pub fn certified(&self) -> bool {
        matches!(self.result, Transitivity::CertifiedOnPrefix { .. })
    }
}

/// Checks that the first `prefix` points lie in the orbit of point 0,
/// exploring at most `max_depth` generator steps. Never claims more than the
/// prefix.
pub fn is_transitive(act: &ActionSpec, prefix: usize, max_depth: usize) -> TransitivityReport {
    let mut idx = act.indexed();
    let pts: Vec<Point> = idx.prefix(prefix).to_vec();
    let base = pts.first().cloned().expect("nonempty space");
    let mut missing: BTreeSet<Point> = pts.iter().cloned().collect();
    let mut seen = HashSet::from([base.clone()]);
    missing.remove(&base);
    let mut frontier = vec![base.clone()];
    let mut depth = 0;
    while !missing.is_empty() && depth < max_depth && !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for p in &frontier {
            for g in act.group().generators() {
                let q = act.act(g, p);
                if seen.insert(q.clone()) {
                    missing.remove(&q);
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    let result = match pts.iter().enumerate().find(|(_, p)| missing.contains(*p)) {
        None => Transitivity::CertifiedOnPrefix { depth },
        Some((index, p)) => Transitivity::Counterexample {
            point: act.format_point(p),
            index,
        },
    };
    TransitivityReport {
        prefix: pts.len(),
        max_depth,
        base_point: act.format_point(&base),
        result,
    }
}

/// A-orbit bookkeeping for a finite subgroup acting through an action.
#[derive(Clone, Debug)]
pub struct Blocks {
    act: ActionSpec,
    a: FiniteSubgroup,
}

impl Blocks {
    pub fn new(act: &ActionSpec, a: &FiniteSubgroup) -> Result<Self, ActionError> {
        if a.ambient() != act.group() {
            return Err(ActionError::Invalid("A is not a subgroup of the acting group".into()));
        }
        Ok(Blocks {
            act: act.clone(),
            a: a.clone(),
        })
    }

    pub fn action(&self) -> &ActionSpec {
        &self.act
    }

    pub fn subgroup(&self) -> &FiniteSubgroup {
        &self.a
    }

    /// `A·p`, listed in the order of the elements of `A` (may repeat if the
    /// action is not free).
    pub fn orbit(&self, p: &Point) -> Vec<Point> {
        self.a.elements().iter().map(|a| self.act.act(a, p)).collect()
    }

    /// Canonical base point of the block of `p`: its least orbit point.
    pub fn base(&self, p: &Point) -> Point {
        self.orbit(p).into_iter().min().expect("A is nonempty")
    }

    /// `(base, t)` with `p = t·base`. Assumes a free action.
    pub fn decompose(&self, p: &Point) -> (Point, Element) {
        let base = self.base(p);
        let t = self
            .a
            .elements()
            .iter()
            .find(|a| self.act.act(a, &base) == *p)
            .expect("p lies in the orbit of its base")
            .clone();
        (base, t)
    }

    /// A nontrivial element of `A` fixing `p`, if any.
    pub fn stabilizer_witness(&self, p: &Point) -> Option<Element> {
        let id = self.a.ambient().identity();
        self.a
            .elements()
            .iter()
            .find(|a| **a != id && self.act.act(a, p) == *p)
            .cloned()
    }

    /// `Ax ∩ gAx = ∅`.
    pub fn in_support(&self, g: &Element, x: &Point) -> bool {
        let ax: HashSet<Point> = self.orbit(x).into_iter().collect();
        ax.iter().all(|p| !ax.contains(&self.act.act(g, p)))
    }

    /// Saturates a set of points under `A`.
    pub fn saturate<'a>(&self, pts: impl IntoIterator<Item = &'a Point>) -> BTreeSet<Point> {
        pts.into_iter().flat_map(|p| self.orbit(p)).collect()
    }
}

/// The first `prefix` points closed up under `A`, in order of first
/// appearance.
pub fn saturated_prefix(blocks: &Blocks, prefix: usize) -> Vec<Point> {
    let mut idx = blocks.action().indexed();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in idx.prefix(prefix).to_vec() {
        for q in blocks.orbit(&p) {
            if seen.insert(q.clone()) {
                out.push(q);
            }
        }
    }
    out
}

/// `supp_A(g)` restricted to the A-saturated prefix.
pub fn supp_a(act: &ActionSpec, a: &FiniteSubgroup, g: &Element, prefix: usize) -> Result<Vec<Point>, ActionError> {
    act.group().check(g)?;
    let blocks = Blocks::new(act, a)?;
    Ok(saturated_prefix(&blocks, prefix)
        .into_iter()
        .filter(|x| blocks.in_support(g, x))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub base: Point,
    /// `members[i] = a_i·base` for the elements of `A` in canonical order.
    pub members: Vec<Point>,
}

/// Partition of an A-saturated prefix into free A-orbits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ABlockSpace {
    pub a: FiniteSubgroup,
    pub blocks: Vec<Block>,
}

impl ABlockSpace {
    pub fn point_count(&self) -> usize {
        self.blocks.iter().map(|b| b.members.len()).sum()
    }
}

/// Verifies that `A` acts freely on the saturated prefix and returns its
/// blocks, or the first fixed point found.
pub fn is_free(act: &ActionSpec, a: &FiniteSubgroup, prefix: usize) -> Result<ABlockSpace, ActionError> {
    let blocks = Blocks::new(act, a)?;
    let pts = saturated_prefix(&blocks, prefix);
    let mut out = Vec::new();
    let mut done = HashSet::new();
    for p in &pts {
        if let Some(w) = blocks.stabilizer_witness(p) {
            return Err(ActionError::NotFree {
                point: act.format_point(p),
                a: act.group().format_element(&w),
            });
        }
        let base = blocks.base(p);
        if done.insert(base.clone()) {
            let members = blocks.orbit(&base);
            out.push(Block { base, members });
        }
    }
    Ok(ABlockSpace {
        a: a.clone(),
        blocks: out,
    })
}

/// Options for [`build_aprime_witness`].
#[derive(Clone, Debug)]
pub struct APrimeOptions {
    /// Points checked for (i), (ii) and (iv).
    pub prefix: usize,
    /// Minimum support size within the prefix for (ii); defaults to a
    /// quarter of the prefix.
    pub threshold: Option<usize>,
    /// Non-A elements tested for (ii): a Cayley ball of this radius (whole
    /// group when finite).
    pub sample_radius: usize,
    /// Følner pairs checked for (iii).
    pub pairs: usize,
    pub max_depth: usize,
}

impl Default for APrimeOptions {
    fn default() -> Self {
        APrimeOptions {
            prefix: 200,
            threshold: None,
            sample_radius: 2,
            pairs: 3,
            max_depth: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuppCount {
    pub element: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairSummary {
    pub n: usize,
    #[serde(with = "crate::rational::serde_pq")]
    pub eps: Rational,
    pub c_size: usize,
    pub d_size: usize,
    pub c_max_ratio: String,
    pub d_max_ratio: String,
    pub c_folner: bool,
    pub d_folner: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: String,
    pub verdict: bool,
    pub detail: String,
}

/// Prefix-level evidence for the four 𝒜′ conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct APrimeReport {
    pub prefix: usize,
    pub threshold: usize,
    pub transitivity: TransitivityReport,
    pub supp_x: Vec<SuppCount>,
    pub supp_y: Vec<SuppCount>,
    pub x_saturated: usize,
    pub y_saturated: usize,
    pub pairs: Vec<PairSummary>,
    pub c_pairwise_disjoint: bool,
    pub d_pairwise_disjoint: bool,
    pub x_blocks: usize,
    pub y_blocks: usize,
    pub conditions: Vec<Condition>,
}

impl APrimeReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.verdict)
    }
}

/// `X = G` acted on regularly, `Y′ = H ⊔ (copies of Y)`, the amalgam data
/// and the prefix report.
pub struct APrimeWitness {
    pub spec: AmalgamSpec,
    pub x: ActionSpec,
    pub y: ActionSpec,
    pub report: APrimeReport,
}

impl APrimeWitness {
    pub fn x_blocks(&self) -> Blocks {
        Blocks::new(&self.x, self.spec.sub(crate::amalgam::Factor::G)).expect("A ≤ G")
    }

    pub fn y_blocks(&self) -> Blocks {
        Blocks::new(&self.y, self.spec.sub(crate::amalgam::Factor::H)).expect("A ≤ H")
    }

    /// The Følner pair stream for (iii).
    pub fn folner_pairs(&self) -> FolnerPairs {
        FolnerPairs::new(self)
    }
}

fn non_a_sample(g: &GroupSpec, a: &FiniteSubgroup, radius: usize) -> Vec<Element> {
    let all = match g.elements() {
        Ok(e) => e,
        Err(_) => {
            let mut v = g.ball_shells(g.generators(), radius).concat();
            v.sort();
            v
        }
    };
    all.into_iter().filter(|x| !a.contains(x)).collect()
}

/// Builds `X` and `Y′` from an amenable `H`-action on `Y` on which `A` acts
/// freely, and certifies the 𝒜′ conditions on prefixes.
pub fn build_aprime_witness(
    g: &GroupSpec,
    h: &GroupSpec,
    phi: SubgroupIso,
    y: &ActionSpec,
    opts: &APrimeOptions,
) -> Result<APrimeWitness, ActionError> {
    if g.is_finite() {
        return Err(ActionError::FiniteGroup);
    }
    if y.group() != h {
        return Err(ActionError::Invalid("Y is not an H-set".into()));
    }
    let spec = AmalgamSpec::new(g, h, phi).map_err(|e| ActionError::Invalid(e.to_string()))?;
    let a_g = spec.sub(crate::amalgam::Factor::G).clone();
    let a_h = spec.sub(crate::amalgam::Factor::H).clone();
    is_free(y, &a_h, opts.prefix)?;

    let x = ActionSpec::regular(g);
    let y_prime = ActionSpec::new(
        h,
        PointSpace::DisjointUnion(vec![PointSpace::Regular, PointSpace::Copies(Box::new(y.space().clone()))]),
    )?;
    let threshold = opts.threshold.unwrap_or(opts.prefix / 4);

    let transitivity = is_transitive(&x, opts.prefix, opts.max_depth);

    let xb = Blocks::new(&x, &a_g)?;
    let yb = Blocks::new(&y_prime, &a_h)?;
    let x_pts = saturated_prefix(&xb, opts.prefix);
    let y_pts = saturated_prefix(&yb, opts.prefix);
    let count = |b: &Blocks, pts: &[Point], e: &Element| pts.iter().filter(|p| b.in_support(e, p)).count();
    let supp_x: Vec<SuppCount> = non_a_sample(g, &a_g, opts.sample_radius)
        .iter()
        .map(|e| SuppCount {
            element: g.format_element(e),
            count: count(&xb, &x_pts, e),
        })
        .collect();
    let supp_y: Vec<SuppCount> = non_a_sample(h, &a_h, opts.sample_radius)
        .iter()
        .map(|e| SuppCount {
            element: h.format_element(e),
            count: count(&yb, &y_pts, e),
        })
        .collect();

    let free_x = is_free(&x, &a_g, opts.prefix)?;
    let free_y = is_free(&y_prime, &a_h, opts.prefix)?;

    let mut witness = APrimeWitness {
        spec,
        x,
        y: y_prime,
        report: APrimeReport {
            prefix: opts.prefix,
            threshold,
            transitivity,
            supp_x,
            supp_y,
            x_saturated: x_pts.len(),
            y_saturated: y_pts.len(),
            pairs: Vec::new(),
            c_pairwise_disjoint: false,
            d_pairwise_disjoint: false,
            x_blocks: free_x.blocks.len(),
            y_blocks: free_y.blocks.len(),
            conditions: Vec::new(),
        },
    };

    let mut stream = witness.folner_pairs();
    let mut c_union: BTreeSet<Point> = BTreeSet::new();
    let mut d_union: BTreeSet<Point> = BTreeSet::new();
    let (mut c_disjoint, mut d_disjoint) = (true, true);
    let xblocks = witness.x_blocks();
    let yblocks = witness.y_blocks();
    for n in 1..=opts.pairs {
        let pair = stream.get(n).map_err(Box::new)?;
        let ac = xblocks.saturate(&pair.c);
        let ad = yblocks.saturate(&pair.d);
        c_disjoint &= c_union.is_disjoint(&ac);
        d_disjoint &= d_union.is_disjoint(&ad);
        c_union.extend(ac);
        d_union.extend(ad);
        let c_max = pair.c_report.max_ratio();
        let d_max = pair.d_report.max_ratio();
        witness.report.pairs.push(PairSummary {
            n,
            eps: pair.eps,
            c_size: pair.c.len(),
            d_size: pair.d.len(),
            c_max_ratio: format_rational(&c_max),
            d_max_ratio: format_rational(&d_max),
            c_folner: pair.c_report.verdict,
            d_folner: pair.d_report.verdict,
        });
    }
    witness.report.c_pairwise_disjoint = c_disjoint;
    witness.report.d_pairwise_disjoint = d_disjoint;

    let r = &witness.report;
    let supp_ok = r.supp_x.iter().chain(&r.supp_y).all(|s| s.count >= threshold);
    let thin: Vec<&str> = r
        .supp_x
        .iter()
        .chain(&r.supp_y)
        .filter(|s| s.count < threshold)
        .map(|s| s.element.as_str())
        .collect();
    let pairs_ok = r.pairs.iter().all(|p| p.c_size == p.d_size && p.c_folner && p.d_folner);
    let conditions = vec![
        Condition {
            name: "(i) G acts transitively on X".into(),
            verdict: r.transitivity.certified(),
            detail: format!("prefix {} from {}", r.transitivity.prefix, r.transitivity.base_point),
        },
        Condition {
            name: "(ii) supp_A infinite".into(),
            verdict: supp_ok,
            detail: if thin.is_empty() {
                format!(
                    "{} elements of G and {} of H each have support >= {} within saturated prefixes {}/{}",
                    r.supp_x.len(),
                    r.supp_y.len(),
                    threshold,
                    r.x_saturated,
                    r.y_saturated
                )
            } else {
                format!("support below {threshold} for {}", thin.join(", "))
            },
        },
        Condition {
            name: "(iii) matched disjoint Folner sequences".into(),
            verdict: pairs_ok && r.c_pairwise_disjoint && r.d_pairwise_disjoint,
            detail: format!(
                "{} pairs; |C_n| = |D_n| and eps_n-Folner: {}; A.C_n disjoint: {}; A.D_n disjoint: {}",
                r.pairs.len(),
                pairs_ok,
                r.c_pairwise_disjoint,
                r.d_pairwise_disjoint
            ),
        },
        Condition {
            name: "(iv) A acts freely on X and Y'".into(),
            verdict: true,
            detail: format!("{} and {} free blocks", r.x_blocks, r.y_blocks),
        },
    ];
    witness.report.conditions = conditions;
    Ok(witness)
}

impl fmt::Display for APrimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.conditions {
            writeln!(f, "{} {}: {}", if c.verdict { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}
