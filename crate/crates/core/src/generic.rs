//! Growing an A-equivariant partial bijection `σ: X ⇀ Y′` so that
//! `G ∗_A H^σ` (with `h` acting on `X` as `σ⁻¹hσ`) moves a witness point for
//! every short nontrivial word and maps a Følner set onto a Følner set.
//!
//! `σ` is only ever extended, never redefined, so every witness recorded on
//! the way stays valid for the final map.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::actions::{is_transitive, APrimeWitness, Blocks, IndexedSpace, Point, TransitivityReport};
use crate::amalgam::{AmalgamError, AmalgamSpec, AmalgamWord, Factor};
use crate::folner::{is_folner, FolnerError, FolnerPairs, FolnerSet, RatioEntry};
use crate::groups::{Element, SubgroupIso};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenericError {
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error("no fresh point in {side} within {cutoff} points while handling word {word:?}: {need}")]
    NoFreshPoint {
        word: String,
        side: Side,
        need: String,
        cutoff: usize,
    },
    #[error("block {block} is already assigned")]
    Assigned { block: String },
    #[error("Folner match precondition violated: {0}")]
    Precondition(String),
    #[error("no admissible Folner pair among the first {0}")]
    NoMatch(usize),
    #[error("replay failed: {0}")]
    Replay(String),
    #[error("cannot read certificate: {0}")]
    Record(String),
}

/// Which space a trace point lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::X => "X",
            Side::Y => "Y'",
        })
    }
}

/// Finite A-equivariant injection from blocks of `X` to blocks of `Y′`:
/// `σ(a·b) = φ(a)·u·b′` for a block base `b ↦ (b′, u)`.
#[derive(Clone, Debug)]
pub struct PartialPermutation {
    xb: Blocks,
    yb: Blocks,
    phi: SubgroupIso,
    forward: BTreeMap<Point, (Point, Element)>,
    backward: BTreeMap<Point, Point>,
}

impl PartialPermutation {
    pub fn new(w: &APrimeWitness) -> Self {
        PartialPermutation {
            xb: w.x_blocks(),
            yb: w.y_blocks(),
            phi: w.spec.phi().clone(),
            forward: BTreeMap::new(),
            backward: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    fn h(&self) -> &crate::groups::GroupSpec {
        self.yb.action().group()
    }

    pub fn in_domain(&self, x_base: &Point) -> bool {
        self.forward.contains_key(x_base)
    }

    pub fn in_range(&self, y_base: &Point) -> bool {
        self.backward.contains_key(y_base)
    }

    /// Assigned blocks as `(x base, y base, offset)`, ordered by `x` base.
    pub fn assignments(&self) -> impl Iterator<Item = (&Point, &Point, &Element)> {
        self.forward.iter().map(|(x, (y, u))| (x, y, u))
    }

    pub fn apply(&self, x: &Point) -> Option<Point> {
        let (bx, t) = self.xb.decompose(x);
        let (by, u) = self.forward.get(&bx)?;
        let s = self.h().mul(&self.phi.map(&t), u);
        Some(self.yb.action().act(&s, by))
    }

    pub fn apply_inverse(&self, y: &Point) -> Option<Point> {
        let (by, s) = self.yb.decompose(y);
        let bx = self.backward.get(&by)?;
        let (_, u) = &self.forward[bx];
        let a = self.phi.map_back(&self.h().mul(&s, &self.h().inverse(u)));
        Some(self.xb.action().act(&a, bx))
    }

    /// Extends by `σ(x) = y` and the A-translates. Both blocks must be new.
    pub fn assign(&mut self, x: &Point, y: &Point) -> Result<(), GenericError> {
        let (bx, t) = self.xb.decompose(x);
        let (by, s) = self.yb.decompose(y);
        if self.forward.contains_key(&bx) {
            return Err(GenericError::Assigned {
                block: self.xb.action().format_point(&bx),
            });
        }
        if self.backward.contains_key(&by) {
            return Err(GenericError::Assigned {
                block: self.yb.action().format_point(&by),
            });
        }
        let u = self.h().mul(&self.h().inverse(&self.phi.map(&t)), &s);
        self.backward.insert(by.clone(), bx.clone());
        self.forward.insert(bx, (by, u));
        Ok(())
    }

    /// Replaces the offset of an assigned block; the result is still an
    /// equivariant injection. Used to probe the verifier.
    pub fn replace_offset(&mut self, x_base: &Point, u: Element) -> bool {
        match self.forward.get_mut(x_base) {
            Some(entry) => {
                entry.1 = u;
                true
            }
            None => false,
        }
    }

    /// Exchanges the images of two assigned blocks.
    pub fn swap_images(&mut self, b1: &Point, b2: &Point) -> bool {
        let (Some(i1), Some(i2)) = (self.forward.get(b1).cloned(), self.forward.get(b2).cloned()) else {
            return false;
        };
        self.backward.insert(i2.0.clone(), b1.clone());
        self.backward.insert(i1.0.clone(), b2.clone());
        self.forward.insert(b1.clone(), i2);
        self.forward.insert(b2.clone(), i1);
        true
    }

    /// Materializes `σ` point by point and checks injectivity, block sizes
    /// and `σ(a·x) = φ(a)·σ(x)` over the whole domain.
    pub fn audit(&self) -> Result<AuditSummary, String> {
        let xa = self.xb.action();
        let ya = self.yb.action();
        let mut map: HashMap<Point, Point> = HashMap::new();
        let mut images: HashSet<Point> = HashSet::new();
        for (bx, (by, u)) in &self.forward {
            if self.backward.get(by) != Some(bx) {
                return Err(format!("inverse table disagrees at block {}", xa.format_point(bx)));
            }
            for a in self.xb.subgroup().elements() {
                let x = xa.act(a, bx);
                let y = ya.act(&self.h().mul(&self.phi.map(a), u), by);
                if map.insert(x.clone(), y.clone()).is_some() {
                    return Err(format!("A does not act freely on block {}", xa.format_point(bx)));
                }
                if !images.insert(y) {
                    return Err(format!("two points map to the same image in block {}", xa.format_point(bx)));
                }
            }
        }
        if self.backward.len() != self.forward.len() {
            return Err("inverse table has extra entries".into());
        }
        for (x, y) in &map {
            for a in self.xb.subgroup().elements() {
                let lhs = map.get(&xa.act(a, x));
                let rhs = ya.act(&self.phi.map(a), y);
                if lhs != Some(&rhs) {
                    return Err(format!(
                        "equivariance fails at {} for a = {}",
                        xa.format_point(x),
                        xa.group().format_element(a)
                    ));
                }
            }
            if self.apply(x).as_ref() != Some(y) || self.apply_inverse(y).as_ref() != Some(x) {
                return Err(format!("lookup disagrees with the table at {}", xa.format_point(x)));
            }
        }
        Ok(AuditSummary {
            blocks: self.forward.len(),
            points: map.len(),
            passed: true,
        })
    }

    /// Serializable form: assignments with indices plus the block table.
    pub fn record(&self, ix: &mut Indexer) -> SigmaRecord {
        let xa = self.xb.action();
        let ya = self.yb.action();
        let assignments = self
            .forward
            .iter()
            .map(|(bx, (by, u))| AssignmentRecord {
                x_base: xa.format_point(bx),
                x_index: ix.x.index_of(bx, ix.cutoff),
                y_base: ya.format_point(by),
                y_index: ix.y.index_of(by, ix.cutoff),
                offset: ya.group().format_element(u),
            })
            .collect();
        let block = |b: &Blocks, p: &Point| BlockRecord {
            base: b.action().format_point(p),
            members: b.orbit(p).iter().map(|q| b.action().format_point(q)).collect(),
        };
        SigmaRecord {
            a: self.xb.subgroup().elements().iter().map(|a| xa.group().format_element(a)).collect(),
            assignments,
            x_blocks: self.forward.keys().map(|p| block(&self.xb, p)).collect(),
            y_blocks: self.backward.keys().map(|p| block(&self.yb, p)).collect(),
        }
    }

    /// Rebuilds `σ` from its record, checking every listed block.
    pub fn from_record(w: &APrimeWitness, rec: &SigmaRecord) -> Result<Self, GenericError> {
        let err = |m: String| GenericError::Record(m);
        let mut s = PartialPermutation::new(w);
        for r in &rec.assignments {
            let bx = w.x.parse_point(&r.x_base).map_err(|e| err(e.to_string()))?;
            let by = w.y.parse_point(&r.y_base).map_err(|e| err(e.to_string()))?;
            let u = w.y.group().parse_element(&r.offset).map_err(|e| err(e.to_string()))?;
            if s.xb.base(&bx) != bx || s.yb.base(&by) != by {
                return Err(err(format!("{} or {} is not a block base", r.x_base, r.y_base)));
            }
            if !s.yb.subgroup().contains(&u) {
                return Err(err(format!("offset {} is not in A", r.offset)));
            }
            s.assign(&bx, &s.yb.action().act(&u, &by))?;
        }
        let rebuilt = {
            let xa = s.xb.action();
            let expect: Vec<BlockRecord> = s
                .forward
                .keys()
                .map(|p| BlockRecord {
                    base: xa.format_point(p),
                    members: s.xb.orbit(p).iter().map(|q| xa.format_point(q)).collect(),
                })
                .collect();
            expect == rec.x_blocks
        };
        if !rebuilt {
            return Err(err("block table does not match the assignments".into()));
        }
        Ok(s)
    }

    /// SHA-256 over the assignment list.
    pub fn digest(&self) -> String {
        let xa = self.xb.action();
        let ya = self.yb.action();
        let mut hasher = Sha256::new();
        for (bx, (by, u)) in &self.forward {
            hasher.update(format!("{}\t{}\t{}\n", xa.format_point(bx), ya.format_point(by), ya.group().format_element(u)));
        }
        hex::encode(hasher.finalize())
    }
}

/// Lazily built point indices of `X` and `Y′` for records. Points past the
/// cutoff are recorded without an index; indices are informational only.
pub struct Indexer {
    x: IndexedSpace,
    y: IndexedSpace,
    cutoff: usize,
}

impl Indexer {
    pub fn new(w: &APrimeWitness) -> Self {
        Indexer {
            x: w.x.indexed(),
            y: w.y.indexed(),
            cutoff: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub x_base: String,
    pub x_index: Option<usize>,
    pub y_base: String,
    pub y_index: Option<usize>,
    pub offset: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub base: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaRecord {
    pub a: Vec<String>,
    pub assignments: Vec<AssignmentRecord>,
    pub x_blocks: Vec<BlockRecord>,
    pub y_blocks: Vec<BlockRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub blocks: usize,
    pub points: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TracePoint {
    pub side: Side,
    pub point: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordWitness {
    pub word: String,
    pub length: usize,
    pub start: String,
    pub trace: Vec<TracePoint>,
    pub endpoint: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub n: usize,
    #[serde(with = "crate::rational::serde_pq")]
    pub eps_n: Rational,
    pub size: usize,
    pub c_blocks: Vec<String>,
    pub d_blocks: Vec<String>,
    pub g_ratios: Vec<RatioEntry>,
    pub h_sigma_ratios: Vec<RatioEntry>,
    pub h_raw_ratios: Vec<RatioEntry>,
    pub transfer_equal: bool,
    pub below_eps: bool,
}

/// Everything needed to replay the construction against a final `σ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub max_len: usize,
    #[serde(with = "crate::rational::serde_pq")]
    pub eps: Rational,
    pub radius: usize,
    pub seed: u64,
    pub words: Vec<WordWitness>,
    pub matches: Vec<MatchRecord>,
    pub transitivity: TransitivityReport,
    pub audit: AuditSummary,
    pub sigma: SigmaRecord,
    pub digest: String,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, GenericError> {
        serde_json::from_str(s).map_err(|e| GenericError::Record(e.to_string()))
    }
}

/// `w^σ·x` where `h` acts as `σ⁻¹hσ`. The trace lists every intermediate
/// point, starting with `x`; `None` as soon as `σ` or `σ⁻¹` is undefined.
pub fn evaluate_word(
    sigma: &PartialPermutation,
    spec: &AmalgamSpec,
    w: &AmalgamWord,
    x: &Point,
) -> Option<(Point, Vec<(Side, Point)>)> {
    let xa = sigma.xb.action();
    let ya = sigma.yb.action();
    let mut trace = vec![(Side::X, x.clone())];
    let mut cur = x.clone();
    for (f, s) in w.syllables.iter().rev() {
        match f {
            Factor::G => {
                cur = xa.act(s, &cur);
                trace.push((Side::X, cur.clone()));
            }
            Factor::H => {
                let y = sigma.apply(&cur)?;
                let hy = ya.act(s, &y);
                cur = sigma.apply_inverse(&hy)?;
                trace.push((Side::Y, y));
                trace.push((Side::Y, hy));
                trace.push((Side::X, cur.clone()));
            }
        }
    }
    let _ = spec;
    Some((xa.act(&w.head, &cur), trace))
}

/// Construction context: the witness, point indices and search cutoff.
pub struct Builder<'w> {
    w: &'w APrimeWitness,
    x_idx: IndexedSpace,
    y_idx: IndexedSpace,
    pub cutoff: usize,
}

impl<'w> Builder<'w> {
    pub fn new(w: &'w APrimeWitness) -> Self {
        Builder {
            w,
            x_idx: w.x.indexed(),
            y_idx: w.y.indexed(),
            cutoff: 1 << 20,
        }
    }

    /// Least-index block base satisfying `ok`, scanning a lazily growing
    /// prefix of the space.
    fn fresh(&mut self, side: Side, blocks: &Blocks, mut ok: impl FnMut(&Point) -> bool) -> Option<Point> {
        let idx = match side {
            Side::X => &mut self.x_idx,
            Side::Y => &mut self.y_idx,
        };
        let mut tried = HashSet::new();
        for i in 0..self.cutoff {
            let p = idx.get(i)?.clone();
            let b = blocks.base(&p);
            if tried.insert(b.clone()) && ok(&b) {
                return Some(b);
            }
        }
        None
    }
}

/// Extends `σ` so that `w^σ` moves a fresh point; returns the witness.
///
/// Trace shape: the start point, then per `G`-syllable its image and per
/// `H`-syllable `σ(x), hσ(x), σ⁻¹(hσ(x))`, read right to left. All trace
/// blocks are pairwise distinct within each space.
pub fn extend_avoid_word(
    sigma: &mut PartialPermutation,
    b: &mut Builder<'_>,
    w: &AmalgamWord,
) -> Result<WordWitness, GenericError> {
    let spec = &b.w.spec;
    let text = spec.format_word(w);
    let xb = sigma.xb.clone();
    let yb = sigma.yb.clone();
    let xa = xb.action().clone();
    let ya = yb.action().clone();
    let cutoff = b.cutoff;
    let no_fresh = |side, need: String| GenericError::NoFreshPoint {
        word: text.clone(),
        side,
        need,
        cutoff,
    };
    let mut used_x: BTreeSet<Point> = BTreeSet::new();
    let mut used_y: BTreeSet<Point> = BTreeSet::new();
    let syl = &w.syllables;

    // A fresh X block, in supp_A(g) with a fresh g-image when `g` is given.
    let pick_x = |b: &mut Builder<'_>, sigma: &PartialPermutation, used_x: &BTreeSet<Point>, g: Option<&Element>| {
        let taken = |p: &Point| sigma.in_domain(p) || used_x.contains(p);
        b.fresh(Side::X, &xb, |p| {
            !taken(p)
                && match g {
                    None => true,
                    Some(g) => xb.in_support(g, p) && !taken(&xb.base(&xa.act(g, p))),
                }
        })
    };

    let x0 = match syl.last() {
        Some((Factor::G, g)) => pick_x(b, sigma, &used_x, Some(g)),
        _ => pick_x(b, sigma, &used_x, None),
    }
    .ok_or_else(|| no_fresh(Side::X, "start block".into()))?;
    used_x.insert(x0.clone());
    let mut cur = x0.clone();
    for i in (0..syl.len()).rev() {
        let (f, s) = &syl[i];
        match f {
            Factor::G => {
                cur = xa.act(s, &cur);
                used_x.insert(xb.base(&cur));
            }
            Factor::H => {
                let taken = |p: &Point| sigma.in_range(p) || used_y.contains(p);
                let y = b
                    .fresh(Side::Y, &yb, |p| {
                        !taken(p) && yb.in_support(s, p) && !taken(&yb.base(&ya.act(s, p)))
                    })
                    .ok_or_else(|| no_fresh(Side::Y, format!("supp_A({})", ya.group().format_element(s))))?;
                sigma.assign(&cur, &y)?;
                used_y.insert(y.clone());
                let hy = ya.act(s, &y);
                used_y.insert(yb.base(&hy));
                let next_g = if i > 0 { Some(&syl[i - 1].1) } else { None };
                let q = pick_x(b, sigma, &used_x, next_g).ok_or_else(|| {
                    no_fresh(
                        Side::X,
                        match next_g {
                            Some(g) => format!("supp_A({})", xa.group().format_element(g)),
                            None => "preimage block".into(),
                        },
                    )
                })?;
                sigma.assign(&q, &hy)?;
                used_x.insert(q.clone());
                cur = q;
            }
        }
    }
    let (end, trace) = evaluate_word(sigma, spec, w, &x0).ok_or_else(|| GenericError::Replay(format!("{text}: undefined after extension")))?;
    if end == x0 {
        return Err(GenericError::Replay(format!("{text}: start point not moved")));
    }
    Ok(WordWitness {
        word: text,
        length: w.len(),
        start: xa.format_point(&x0),
        trace: trace
            .iter()
            .map(|(side, p)| TracePoint {
                side: *side,
                point: match side {
                    Side::X => xa.format_point(p),
                    Side::Y => ya.format_point(p),
                },
            })
            .collect(),
        endpoint: xa.format_point(&end),
    })
}

/// Subsets of `A` up to right translation: returns the canonical form of
/// `S` and a `v` with `S·v` equal to it.
fn canonical_pattern(g: &crate::groups::GroupSpec, a: &[Element], s: &BTreeSet<Element>) -> (Vec<Element>, Element) {
    a.iter()
        .map(|v| {
            let mut t: Vec<Element> = s.iter().map(|x| g.mul(x, v)).collect();
            t.sort();
            (t, v.clone())
        })
        .min()
        .expect("A is nonempty")
}

/// Extends `σ` so that `σ(C) = D` exactly. Blocks of `C` are paired with
/// blocks of `D` whose traces have the same shape up to translation by `A`.
pub fn extend_match_folner(
    sigma: &mut PartialPermutation,
    c: &FolnerSet,
    d: &FolnerSet,
) -> Result<Vec<(Point, Point)>, GenericError> {
    if c.len() != d.len() {
        return Err(GenericError::Precondition(format!("|C| = {} but |D| = {}", c.len(), d.len())));
    }
    let xb = sigma.xb.clone();
    let yb = sigma.yb.clone();
    let g = xb.action().group().clone();
    let a: Vec<Element> = xb.subgroup().elements().to_vec();
    let mut c_blocks: BTreeMap<Point, BTreeSet<Element>> = BTreeMap::new();
    for p in c {
        let (base, t) = xb.decompose(p);
        if sigma.in_domain(&base) {
            return Err(GenericError::Precondition(format!(
                "block {} of C is already in the domain",
                xb.action().format_point(&base)
            )));
        }
        c_blocks.entry(base).or_default().insert(t);
    }
    let mut d_blocks: BTreeMap<Point, BTreeSet<Element>> = BTreeMap::new();
    for q in d {
        let (base, s) = yb.decompose(q);
        if sigma.in_range(&base) {
            return Err(GenericError::Precondition(format!(
                "block {} of D is already in the range",
                yb.action().format_point(&base)
            )));
        }
        d_blocks.entry(base).or_default().insert(sigma.phi.map_back(&s));
    }
    let mut c_classes: BTreeMap<Vec<Element>, Vec<(Point, Element)>> = BTreeMap::new();
    for (base, s) in &c_blocks {
        let (key, v) = canonical_pattern(&g, &a, s);
        c_classes.entry(key).or_default().push((base.clone(), v));
    }
    let mut d_classes: BTreeMap<Vec<Element>, Vec<(Point, Element)>> = BTreeMap::new();
    for (base, t) in &d_blocks {
        let (key, w) = canonical_pattern(&g, &a, t);
        d_classes.entry(key).or_default().push((base.clone(), w));
    }
    let class_sizes = |m: &BTreeMap<Vec<Element>, Vec<(Point, Element)>>| -> Vec<(usize, usize)> {
        m.iter().map(|(k, v)| (k.len(), v.len())).collect()
    };
    if class_sizes(&c_classes) != class_sizes(&d_classes) || c_classes.keys().ne(d_classes.keys()) {
        return Err(GenericError::Precondition(
            "C and D do not have matching block patterns".into(),
        ));
    }
    let mut pairs = Vec::new();
    for (key, cs) in &c_classes {
        for ((bx, v), (by, w)) in cs.iter().zip(&d_classes[key]) {
            // S·v = T·w, so T = S·(v w⁻¹) and σ(bx) = φ(v w⁻¹)·by.
            let u = sigma.phi.map(&g.mul(v, &g.inverse(w)));
            let y = yb.action().act(&u, by);
            sigma.assign(bx, &y)?;
            pairs.push((bx.clone(), by.clone()));
        }
    }
    let image: FolnerSet = c.iter().map(|x| sigma.apply(x).expect("just assigned")).collect();
    if image != *d {
        return Err(GenericError::Replay("sigma(C) != D after matching".into()));
    }
    Ok(pairs)
}

/// Ratios `|C △ σ⁻¹hσC| / |C|`, counting points whose image leaves `σ(C)`
/// (equivalently leaves `C` under any bijective extension of `σ`).
pub fn conjugated_ratios(sigma: &PartialPermutation, c: &FolnerSet, hs: &[Element]) -> Vec<RatioEntry> {
    let ya = sigma.yb.action();
    hs.iter()
        .map(|h| {
            let out = c
                .iter()
                .filter(|x| {
                    let y = ya.act(h, &sigma.apply(x).expect("C lies in the domain"));
                    !matches!(sigma.apply_inverse(&y), Some(x2) if c.contains(&x2))
                })
                .count();
            RatioEntry {
                element: ya.group().format_element(h),
                ratio: Rational::new(2 * out as i64, c.len() as i64),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct GenericOptions {
    pub max_len: usize,
    pub eps: Rational,
    /// Cayley-ball radius bounding the transversal of infinite factors.
    pub radius: usize,
    /// Number of Følner pairs to match.
    pub matches: usize,
    /// Pairs examined before giving up on a match.
    pub max_pair: usize,
    pub prefix: usize,
    /// Recorded only; the construction is deterministic.
    pub seed: u64,
}

impl Default for GenericOptions {
    fn default() -> Self {
        GenericOptions {
            max_len: 2,
            eps: Rational::new(1, 4),
            radius: 2,
            matches: 1,
            max_pair: 64,
            prefix: 200,
            seed: 0,
        }
    }
}

fn block_names(blocks: &Blocks, pts: &FolnerSet) -> Vec<String> {
    let bases: BTreeSet<Point> = pts.iter().map(|p| blocks.base(p)).collect();
    bases.iter().map(|p| blocks.action().format_point(p)).collect()
}

fn match_record(sigma: &PartialPermutation, w: &APrimeWitness, n: usize, eps_n: Rational, eps: Rational, c: &FolnerSet, d: &FolnerSet) -> MatchRecord {
    let gens_g = w.x.group().generators();
    let gens_h = w.y.group().generators();
    let g_ratios = is_folner(&w.x, c, gens_g, eps).tests;
    let h_sigma_ratios = conjugated_ratios(sigma, c, gens_h);
    let h_raw_ratios = is_folner(&w.y, d, gens_h, eps).tests;
    let transfer_equal = h_sigma_ratios == h_raw_ratios;
    let below_eps = g_ratios.iter().chain(&h_sigma_ratios).all(|r| r.ratio < eps);
    MatchRecord {
        n,
        eps_n,
        size: c.len(),
        c_blocks: block_names(&sigma.xb, c),
        d_blocks: block_names(&sigma.yb, d),
        g_ratios,
        h_sigma_ratios,
        h_raw_ratios,
        transfer_equal,
        below_eps,
    }
}

fn nontrivial_words(spec: &AmalgamSpec, max_len: usize, radius: usize) -> Result<Vec<AmalgamWord>, GenericError> {
    let id = spec.identity();
    Ok(spec
        .enumerate_words(max_len, Some(radius))?
        .into_iter()
        .filter(|w| *w != id)
        .collect())
}

/// Runs the whole construction: one witness per nontrivial word of length
/// at most `max_len`, then Følner matches at the least admissible pairs.
pub fn build_generic(w: &APrimeWitness, opts: &GenericOptions) -> Result<(PartialPermutation, Certificate), GenericError> {
    let spec = &w.spec;
    let mut sigma = PartialPermutation::new(w);
    let mut b = Builder::new(w);
    let words = nontrivial_words(spec, opts.max_len, opts.radius)?;
    let mut witnesses = Vec::with_capacity(words.len());
    for word in &words {
        witnesses.push(extend_avoid_word(&mut sigma, &mut b, word)?);
    }

    let mut pairs = w.folner_pairs();
    let mut matched: Vec<(usize, Rational, FolnerSet, FolnerSet)> = Vec::new();
    for n in 1..=opts.max_pair {
        if matched.len() == opts.matches {
            break;
        }
        if FolnerPairs::eps(n) > opts.eps {
            continue;
        }
        let pair = pairs.get(n)?;
        let free_c = pair.c.iter().all(|p| !sigma.in_domain(&sigma.xb.base(p)));
        let free_d = pair.d.iter().all(|q| !sigma.in_range(&sigma.yb.base(q)));
        if !(free_c && free_d) {
            continue;
        }
        let (c, d, eps_n) = (pair.c.clone(), pair.d.clone(), pair.eps);
        extend_match_folner(&mut sigma, &c, &d)?;
        matched.push((n, eps_n, c, d));
    }
    if matched.len() < opts.matches {
        return Err(GenericError::NoMatch(opts.max_pair));
    }

    // Pure extension keeps every earlier witness valid; re-check anyway.
    for (word, wit) in words.iter().zip(&witnesses) {
        let start = w.x.parse_point(&wit.start).map_err(|e| GenericError::Replay(e.to_string()))?;
        let (end, _) = evaluate_word(&sigma, spec, word, &start).ok_or_else(|| GenericError::Replay(wit.word.clone()))?;
        if w.x.format_point(&end) != wit.endpoint {
            return Err(GenericError::Replay(format!("{} changed after later extensions", wit.word)));
        }
    }
    let matches = matched
        .iter()
        .map(|(n, eps_n, c, d)| match_record(&sigma, w, *n, *eps_n, opts.eps, c, d))
        .collect();
    let audit = sigma.audit().map_err(GenericError::Replay)?;
    let mut ix = Indexer::new(w);
    let cert = Certificate {
        max_len: opts.max_len,
        eps: opts.eps,
        radius: opts.radius,
        seed: opts.seed,
        words: witnesses,
        matches,
        transitivity: is_transitive(&w.x, opts.prefix, 10_000),
        audit,
        sigma: sigma.record(&mut ix),
        digest: sigma.digest(),
    };
    Ok((sigma, cert))
}

/// Outcome of [`verify_certificate`]; `failure` names the first discrepancy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub checks: usize,
    pub failure: Option<String>,
}

/// Replays a certificate against `σ`: records and digest, equivariance over
/// the whole domain, every word witness, every matched Følner pair and all
/// ratios.
pub fn verify_certificate(sigma: &PartialPermutation, cert: &Certificate, w: &APrimeWitness) -> Verdict {
    let mut checks = 0;
    match verify_inner(sigma, cert, w, &mut checks) {
        Ok(()) => Verdict {
            ok: true,
            checks,
            failure: None,
        },
        Err(msg) => Verdict {
            ok: false,
            checks,
            failure: Some(msg),
        },
    }
}

fn verify_inner(sigma: &PartialPermutation, cert: &Certificate, w: &APrimeWitness, checks: &mut usize) -> Result<(), String> {
    let spec = &w.spec;
    let xa = &w.x;
    let ya = &w.y;

    // σ against its recorded assignments.
    let mut rec = cert.sigma.assignments.iter();
    for (bx, by, u) in sigma.assignments() {
        *checks += 1;
        let name = xa.format_point(bx);
        match rec.next() {
            Some(r) if r.x_base == name && r.y_base == ya.format_point(by) && r.offset == ya.group().format_element(u) => {}
            Some(r) if r.x_base == name => return Err(format!("assignment of block {name} differs from the certificate")),
            _ => return Err(format!("block {name} is not recorded in the certificate")),
        }
    }
    if let Some(r) = rec.next() {
        return Err(format!("recorded block {} is not in the domain", r.x_base));
    }
    *checks += 1;
    if sigma.digest() != cert.digest {
        return Err("assignment digest mismatch".into());
    }
    *checks += 1;
    let audit = sigma.audit()?;
    if audit != cert.audit {
        return Err("equivariance audit summary differs".into());
    }

    // Words.
    let words = nontrivial_words(spec, cert.max_len, cert.radius).map_err(|e| e.to_string())?;
    if words.len() != cert.words.len() {
        return Err(format!("{} words of length <= {} but {} witnesses", words.len(), cert.max_len, cert.words.len()));
    }
    for (word, wit) in words.iter().zip(&cert.words) {
        *checks += 1;
        let text = spec.format_word(word);
        if text != wit.word {
            return Err(format!("witness for {text} is missing"));
        }
        let start = xa.parse_point(&wit.start).map_err(|e| e.to_string())?;
        let (end, trace) = evaluate_word(sigma, spec, word, &start).ok_or_else(|| format!("{text}: undefined at {}", wit.start))?;
        let trace_text: Vec<TracePoint> = trace
            .iter()
            .map(|(side, p)| TracePoint {
                side: *side,
                point: if *side == Side::X { xa.format_point(p) } else { ya.format_point(p) },
            })
            .collect();
        if trace_text != wit.trace {
            return Err(format!("{text}: trace differs from the certificate"));
        }
        if xa.format_point(&end) != wit.endpoint {
            return Err(format!("{text}: endpoint differs from the certificate"));
        }
        if end == start {
            return Err(format!("{text}: start point is fixed"));
        }
        let mut seen = HashSet::new();
        for (side, p) in &trace {
            let base = match side {
                Side::X => sigma.xb.base(p),
                Side::Y => sigma.yb.base(p),
            };
            if !seen.insert((*side, base)) {
                return Err(format!("{text}: trace revisits a block"));
            }
        }
    }

    // Følner matches; a certificate built with `matches = 0` has none.
    let mut pairs = w.folner_pairs();
    for m in &cert.matches {
        *checks += 1;
        let pair = pairs.get(m.n).map_err(|e| e.to_string())?;
        let (c, d) = (pair.c.clone(), pair.d.clone());
        if c.len() != m.size || d.len() != m.size {
            return Err(format!("pair {}: sizes differ from the certificate", m.n));
        }
        let mut image = FolnerSet::new();
        for x in &c {
            match sigma.apply(x) {
                Some(y) => {
                    image.insert(y);
                }
                None => return Err(format!("pair {}: sigma undefined on block {}", m.n, xa.format_point(&sigma.xb.base(x)))),
            }
        }
        if image != d {
            return Err(format!("pair {}: sigma(C) != D", m.n));
        }
        let fresh = match_record(sigma, w, m.n, pair.eps, cert.eps, &c, &d);
        if fresh != *m {
            return Err(format!("pair {}: recomputed ratios differ from the certificate", m.n));
        }
        if !m.transfer_equal || !m.below_eps {
            return Err(format!("pair {}: ratios not below {}", m.n, format_rational(&cert.eps)));
        }
    }

    *checks += 1;
    let t = is_transitive(xa, cert.transitivity.prefix, cert.transitivity.max_depth);
    if t != cert.transitivity || !t.certified() {
        return Err("transitivity report does not replay".into());
    }
    Ok(())
}

/// Parses the `eps` of a certificate; convenience for callers reading JSON.
pub fn certificate_eps(text: &str) -> Option<Rational> {
    parse_rational(text).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{build_aprime_witness, APrimeOptions, ActionSpec};
    use crate::groups::{FiniteSubgroup, GroupSpec};

    fn free_z_z() -> APrimeWitness {
        let z = GroupSpec::free_abelian(1);
        let a_g = FiniteSubgroup::trivial(&z);
        let phi = SubgroupIso::new(&a_g, &a_g, &[(z.identity(), z.identity())]).unwrap();
        build_aprime_witness(&z, &z, phi, &ActionSpec::regular(&z), &APrimeOptions { pairs: 2, ..Default::default() }).unwrap()
    }

    #[test]
    fn identity_word_fixes_points() {
        let w = free_z_z();
        let s = PartialPermutation::new(&w);
        let x = Point::El(Element::Vector(vec![3]));
        let (end, trace) = evaluate_word(&s, &w.spec, &w.spec.identity(), &x).unwrap();
        assert_eq!(end, x);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn single_h_syllable() {
        let w = free_z_z();
        let mut s = PartialPermutation::new(&w);
        let mut b = Builder::new(&w);
        let word = w.spec.reduce(&[(Factor::H, Element::Vector(vec![1]))]).unwrap();
        assert!(evaluate_word(&s, &w.spec, &word, &Point::El(Element::Vector(vec![0]))).is_none());
        let wit = extend_avoid_word(&mut s, &mut b, &word).unwrap();
        assert_eq!(wit.trace.len(), 4);
        assert_eq!(s.len(), 2);
        assert_ne!(wit.endpoint, wit.start);
    }

    #[test]
    fn free_product_certificate_replays() {
        let w = free_z_z();
        let (s, cert) = build_generic(&w, &GenericOptions::default()).unwrap();
        let v = verify_certificate(&s, &cert, &w);
        assert!(v.ok, "{v:?}");
        let back = Certificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        let rebuilt = PartialPermutation::from_record(&w, &cert.sigma).unwrap();
        assert_eq!(rebuilt.digest(), s.digest());
    }
}
