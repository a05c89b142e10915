//! Følner sets with exact ratios, the equal-cardinality matching, and the
//! Følner pair stream used by the 𝒜′ witness.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::actions::{orbit, APrimeWitness, ActionSpec, Blocks, Point, PointSpace};
use crate::groups::{Element, FiniteSubgroup, GroupSpec};
use crate::rational::{format_rational, Rational};

/// Finite set of points; ordered so that "largest" is well defined.
pub type FolnerSet = BTreeSet<Point>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FolnerError {
    #[error("Folner set is empty")]
    Empty,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("stream exhausted after {scanned} sets: no set is (eps/4)-Folner with |D| > lambda*|C0| = {threshold}; last set: size {last_size}, max ratio {last_ratio}")]
    Exhausted {
        scanned: usize,
        threshold: String,
        last_size: usize,
        last_ratio: String,
    },
    #[error("translate search exceeded {0} candidates")]
    TranslateCutoff(usize),
    #[error("disjointifying shift search exceeded {0} candidates")]
    ShiftCutoff(usize),
    #[error("translates need the regular action of G")]
    NotRegular,
    #[error("cannot delete {0} points as whole A-blocks")]
    BlockDeletion(usize),
    #[error("sizes are not strictly ascending at position {0}")]
    NotAscending(usize),
    #[error("no ball of radius <= {0} is Folner enough")]
    RadiusCutoff(usize),
    #[error("{0}")]
    Invalid(String),
}

fn rat(n: usize, d: usize) -> Rational {
    Ratio::new(n as i64, d as i64)
}

/// `|C △ g·C| / |C|`.
pub fn ratio(act: &ActionSpec, c: &FolnerSet, g: &Element) -> Rational {
    assert!(!c.is_empty(), "Folner set is empty");
    let moved_out = c.iter().filter(|p| !c.contains(&act.act(g, p))).count();
    // |gC \ C| = |C \ gC| since g is a bijection.
    rat(2 * moved_out, c.len())
}

/// Per-element ratios against a test set, with a strict-inequality verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FolnerReport {
    #[serde(with = "crate::rational::serde_pq")]
    pub eps: Rational,
    pub size: usize,
    pub tests: Vec<RatioEntry>,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub element: String,
    #[serde(with = "crate::rational::serde_pq")]
    pub ratio: Rational,
}

impl FolnerReport {
    pub fn max_ratio(&self) -> Rational {
        self.tests.iter().map(|t| t.ratio).max().unwrap_or_else(|| rat(0, 1))
    }
}

pub fn is_folner(act: &ActionSpec, c: &FolnerSet, f: &[Element], eps: Rational) -> FolnerReport {
    let tests: Vec<RatioEntry> = f
        .iter()
        .map(|g| RatioEntry {
            element: act.group().format_element(g),
            ratio: ratio(act, c, g),
        })
        .collect();
    let verdict = tests.iter().all(|t| t.ratio < eps);
    FolnerReport {
        eps,
        size: c.len(),
        tests,
        verdict,
    }
}

/// How the `r` surplus points of `D_n` are removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Deletion {
    /// The `r` canonically largest points.
    LargestPoints,
    /// Whole blocks of this subgroup with the largest base points, keeping
    /// `D′` saturated.
    LargestBlocks(FiniteSubgroup),
}

#[derive(Clone, Debug)]
pub struct MatchOptions {
    pub translate_cutoff: usize,
    pub max_stream: usize,
    pub deletion: Deletion,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            translate_cutoff: 1_000_000,
            max_stream: 100_000,
            deletion: Deletion::LargestPoints,
        }
    }
}

/// Result of the equal-cardinality matching.
#[derive(Clone, Debug, Serialize)]
pub struct MatchOutcome {
    #[serde(with = "crate::rational::serde_pq")]
    pub lambda: Rational,
    /// 1-based position of the chosen set in the `D` stream.
    pub n: usize,
    pub c0_size: usize,
    pub dn_size: usize,
    pub d: usize,
    pub r: usize,
    pub translates: Vec<String>,
    #[serde(skip)]
    pub translate_elements: Vec<Element>,
    pub deleted: Vec<String>,
    #[serde(skip)]
    pub c_prime: FolnerSet,
    #[serde(skip)]
    pub d_prime: FolnerSet,
    pub c0_report: FolnerReport,
    pub dn_report: FolnerReport,
    pub c_report: FolnerReport,
    pub d_report: FolnerReport,
    /// `|D_n| / |D′|`, required `< 2`.
    #[serde(with = "crate::rational::serde_pq")]
    pub size_bound: Rational,
    /// `|D′ △ D_n| / |D_n|`, required `< eps/8`.
    #[serde(with = "crate::rational::serde_pq")]
    pub deletion_bound: Rational,
    pub bounds_hold: bool,
}

impl MatchOutcome {
    /// Sizes agree, both sides are Følner and the internal bounds hold.
    pub fn verified(&self) -> bool {
        self.c_prime.len() == self.d_prime.len() && self.c_report.verdict && self.d_report.verdict && self.bounds_hold
    }
}

struct Selected {
    n: usize,
    dn: FolnerSet,
    dn_report: FolnerReport,
    d: usize,
    r: usize,
}

fn lambda(eps: Rational) -> Rational {
    let eight = Rational::from_integer(8) / eps;
    eight.max(Rational::from_integer(2))
}

fn select_d(
    c0_size: usize,
    h_act: &ActionSpec,
    d_seq: impl IntoIterator<Item = FolnerSet>,
    eps: Rational,
    e: &[Element],
    max_stream: usize,
) -> Result<Selected, FolnerError> {
    let lam = lambda(eps);
    let threshold = lam * Rational::from_integer(c0_size as i64);
    let quarter = eps / Rational::from_integer(4);
    let mut last: Option<(FolnerSet, Option<Rational>)> = None;
    let mut scanned = 0;
    for (i, dn) in d_seq.into_iter().take(max_stream).enumerate() {
        scanned = i + 1;
        if dn.is_empty() {
            continue;
        }
        if Rational::from_integer(dn.len() as i64) <= threshold {
            last = Some((dn, None));
            continue;
        }
        let rep = is_folner(h_act, &dn, e, quarter);
        if rep.verdict {
            let (d, r) = (dn.len() / c0_size, dn.len() % c0_size);
            return Ok(Selected {
                n: i + 1,
                dn,
                dn_report: rep,
                d,
                r,
            });
        }
        let m = rep.max_ratio();
        last = Some((dn, Some(m)));
    }
    // Ratios are skipped for sets below the size threshold; fill in the last.
    let (last_size, last_ratio) = match last {
        Some((set, Some(m))) => (set.len(), m),
        Some((set, None)) => (set.len(), is_folner(h_act, &set, e, quarter).max_ratio()),
        None => (0, rat(0, 1)),
    };
    Err(FolnerError::Exhausted {
        scanned,
        threshold: format_rational(&threshold),
        last_size,
        last_ratio: format_rational(&last_ratio),
    })
}

fn delete(h_act: &ActionSpec, dn: &FolnerSet, r: usize, policy: &Deletion) -> Result<Vec<Point>, FolnerError> {
    match policy {
        Deletion::LargestPoints => Ok(dn.iter().rev().take(r).cloned().collect()),
        Deletion::LargestBlocks(a) => {
            let blocks = Blocks::new(h_act, a).map_err(|e| FolnerError::Invalid(e.to_string()))?;
            let mut by_base: BTreeMap<Point, Vec<Point>> = BTreeMap::new();
            for p in dn {
                by_base.entry(blocks.base(p)).or_default().push(p.clone());
            }
            let mut out = Vec::new();
            for (_, pts) in by_base.iter().rev() {
                if out.len() == r {
                    break;
                }
                if pts.len() == a.order() && out.len() + pts.len() <= r {
                    out.extend(pts.iter().cloned());
                }
            }
            if out.len() != r {
                return Err(FolnerError::BlockDeletion(r));
            }
            Ok(out)
        }
    }
}

/// Greedy right translates `C0·g` that are pairwise disjoint, scanning `G`
/// in enumeration order.
fn translates(g: &GroupSpec, c0: &[Element], d: usize, cutoff: usize) -> Result<Vec<Element>, FolnerError> {
    let mut used: BTreeSet<Element> = BTreeSet::new();
    let mut out = Vec::with_capacity(d);
    for (i, t) in g.enumerate().enumerate() {
        if out.len() == d {
            break;
        }
        if i >= cutoff {
            return Err(FolnerError::TranslateCutoff(cutoff));
        }
        let shifted: Vec<Element> = c0.iter().map(|c| g.mul(c, &t)).collect();
        if shifted.iter().all(|x| !used.contains(x)) {
            used.extend(shifted);
            out.push(t);
        }
    }
    if out.len() < d {
        return Err(FolnerError::TranslateCutoff(cutoff));
    }
    Ok(out)
}

fn elements_of(c: &FolnerSet) -> Result<Vec<Element>, FolnerError> {
    c.iter()
        .map(|p| match p {
            Point::El(e) => Ok(e.clone()),
            _ => Err(FolnerError::NotRegular),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    c_act: &ActionSpec,
    h_act: &ActionSpec,
    c0_report: FolnerReport,
    sel: Selected,
    translates: Vec<Element>,
    c_prime: FolnerSet,
    eps: Rational,
    f: &[Element],
    e: &[Element],
    deletion: &Deletion,
) -> Result<MatchOutcome, FolnerError> {
    let deleted = delete(h_act, &sel.dn, sel.r, deletion)?;
    let mut d_prime = sel.dn.clone();
    for p in &deleted {
        d_prime.remove(p);
    }
    let c_report = is_folner(c_act, &c_prime, f, eps);
    let d_report = is_folner(h_act, &d_prime, e, eps);
    let size_bound = rat(sel.dn.len(), d_prime.len().max(1));
    let deletion_bound = rat(deleted.len(), sel.dn.len());
    let bounds_hold = !d_prime.is_empty()
        && size_bound < Rational::from_integer(2)
        && deletion_bound < eps / Rational::from_integer(8);
    Ok(MatchOutcome {
        lambda: lambda(eps),
        n: sel.n,
        c0_size: c0_report.size,
        dn_size: sel.dn.len(),
        d: sel.d,
        r: sel.r,
        translates: translates.iter().map(|t| c_act.group().format_element(t)).collect(),
        translate_elements: translates,
        deleted: deleted.iter().map(|p| h_act.format_point(p)).collect(),
        c_prime,
        d_prime,
        c0_report,
        dn_report: sel.dn_report,
        c_report,
        d_report,
        size_bound,
        deletion_bound,
        bounds_hold,
    })
}

/// Equal-cardinality Følner sets: `C′` is a disjoint union of `d` right
/// translates of `C0` in `G`, `D′` is the first admissible `D_n` minus `r`
/// points, where `|D_n| = d·|C0| + r`.
///
/// The Følner condition on `C0` is reported, not enforced; `C′` and `D′` are
/// checked directly.
#[allow(clippy::too_many_arguments)]
pub fn match_cardinalities(
    g: &GroupSpec,
    c0: &FolnerSet,
    h_act: &ActionSpec,
    d_seq: impl IntoIterator<Item = FolnerSet>,
    eps: Rational,
    f: &[Element],
    e: &[Element],
    opts: &MatchOptions,
) -> Result<MatchOutcome, FolnerError> {
    if c0.is_empty() {
        return Err(FolnerError::Empty);
    }
    if eps <= rat(0, 1) {
        return Err(FolnerError::NonPositiveEpsilon);
    }
    let g_act = ActionSpec::regular(g);
    let c0_elems = elements_of(c0)?;
    let c0_report = is_folner(&g_act, c0, f, eps);
    let sel = select_d(c0.len(), h_act, d_seq, eps, e, opts.max_stream)?;
    let ts = translates(g, &c0_elems, sel.d, opts.translate_cutoff)?;
    let c_prime: FolnerSet = ts
        .iter()
        .flat_map(|t| c0_elems.iter().map(move |c| Point::El(g.mul(c, t))))
        .collect();
    finish(&g_act, h_act, c0_report, sel, ts, c_prime, eps, f, e, &opts.deletion)
}

/// Action version: `C′` is `d` copies of `C0` inside countably many copies
/// of `X`; the returned outcome's `C′` lives in `Copies(X)`.
#[allow(clippy::too_many_arguments)]
pub fn match_for_actions(
    x_act: &ActionSpec,
    c0: &FolnerSet,
    h_act: &ActionSpec,
    d_seq: impl IntoIterator<Item = FolnerSet>,
    eps: Rational,
    f: &[Element],
    e: &[Element],
    opts: &MatchOptions,
) -> Result<(ActionSpec, MatchOutcome), FolnerError> {
    if c0.is_empty() {
        return Err(FolnerError::Empty);
    }
    if eps <= rat(0, 1) {
        return Err(FolnerError::NonPositiveEpsilon);
    }
    let copies = ActionSpec::new(x_act.group(), PointSpace::Copies(Box::new(x_act.space().clone())))
        .map_err(|e| FolnerError::Invalid(e.to_string()))?;
    let c0_report = is_folner(x_act, c0, f, eps);
    let sel = select_d(c0.len(), h_act, d_seq, eps, e, opts.max_stream)?;
    let c_prime: FolnerSet = (0..sel.d)
        .flat_map(|k| c0.iter().map(move |p| Point::tagged(k, p.clone())))
        .collect();
    let out = finish(&copies, h_act, c0_report, sel, Vec::new(), c_prime, eps, f, e, &opts.deletion)?;
    Ok((copies, out))
}

/// Incremental disjointification: each new set is right-translated by the
/// enumeration-least `h` making its `A`-saturation avoid all earlier ones.
pub struct Disjointifier {
    g: GroupSpec,
    a: FiniteSubgroup,
    used: BTreeSet<Element>,
    cutoff: usize,
    started: bool,
}

impl Disjointifier {
    pub fn new(g: &GroupSpec, a: &FiniteSubgroup, cutoff: usize) -> Self {
        Disjointifier {
            g: g.clone(),
            a: a.clone(),
            used: BTreeSet::new(),
            cutoff,
            started: false,
        }
    }

    fn saturate(&self, c: &[Element], h: &Element) -> Vec<Element> {
        let mut out = Vec::with_capacity(c.len() * self.a.order());
        for x in c {
            let xh = self.g.mul(x, h);
            for a in self.a.elements() {
                out.push(self.g.mul(a, &xh));
            }
        }
        out
    }

    /// Returns the shift and the shifted set.
    pub fn push(&mut self, c: &FolnerSet) -> Result<(Element, FolnerSet), FolnerError> {
        let elems = elements_of(c)?;
        let id = self.g.identity();
        let h = if !self.started {
            self.started = true;
            id
        } else {
            let mut found = None;
            for (i, h) in self.g.enumerate().enumerate() {
                if i >= self.cutoff {
                    break;
                }
                if self.saturate(&elems, &h).iter().all(|x| !self.used.contains(x)) {
                    found = Some(h);
                    break;
                }
            }
            found.ok_or(FolnerError::ShiftCutoff(self.cutoff))?
        };
        let sat = self.saturate(&elems, &h);
        self.used.extend(sat);
        let shifted = elems.iter().map(|x| Point::El(self.g.mul(x, &h))).collect();
        Ok((h, shifted))
    }
}

/// `C′₁ = C₁` and `C′ₙ₊₁ = Cₙ₊₁·hₙ` with `A·C′ₙ` pairwise disjoint.
pub fn disjointify(
    g: &GroupSpec,
    a: &FiniteSubgroup,
    c_seq: impl IntoIterator<Item = FolnerSet>,
    cutoff: usize,
) -> Result<Vec<(Element, FolnerSet)>, FolnerError> {
    let mut d = Disjointifier::new(g, a, cutoff);
    c_seq.into_iter().map(|c| d.push(&c)).collect()
}

/// Elements of word length at most `k` in `s`.
pub fn cayley_ball(g: &GroupSpec, s: &[Element], k: usize) -> FolnerSet {
    g.ball_shells(s, k).into_iter().flatten().map(Point::El).collect()
}

/// Directed Cayley edges `(x, x·s)` leaving `C`.
pub fn edge_boundary(g: &GroupSpec, s: &[Element], c: &FolnerSet) -> usize {
    c.iter()
        .map(|p| match p {
            Point::El(x) => s.iter().filter(|t| !c.contains(&Point::El(g.mul(x, t)))).count(),
            _ => 0,
        })
        .sum()
}

/// One term `F = B(k) ∪ K` of a prescribed-size Følner sequence.
#[derive(Clone, Debug, Serialize)]
pub struct PrescribedTerm {
    pub n: usize,
    pub size: usize,
    pub radius: usize,
    pub ball_size: usize,
    pub extra: Vec<String>,
    #[serde(skip)]
    pub set: FolnerSet,
    pub boundary: usize,
    #[serde(with = "crate::rational::serde_pq")]
    pub ratio: Rational,
    pub ball_boundary: usize,
    /// `(1+|S|)·|∂B(k)|/|B(k)|`.
    #[serde(with = "crate::rational::serde_pq")]
    pub bound: Rational,
    pub holds: bool,
}

/// Følner sets of prescribed sizes: `B(k)` with `|B(k)| ≤ a < |B(k+1)|`,
/// topped up with the canonically least points of the next shell. The
/// boundary bound is checked exactly for every term.
pub fn prescribed_size_folner(g: &GroupSpec, s: &[Element], sizes: &[usize]) -> Result<Vec<PrescribedTerm>, FolnerError> {
    for (i, w) in sizes.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(FolnerError::NotAscending(i + 1));
        }
    }
    if sizes.first() == Some(&0) {
        return Err(FolnerError::NotAscending(0));
    }
    let max = sizes.last().copied().unwrap_or(0);
    let mut radius = 1;
    let shells = loop {
        let sh = g.ball_shells(s, radius);
        let total: usize = sh.iter().map(Vec::len).sum();
        if total > max || sh.len() <= radius {
            break sh;
        }
        radius *= 2;
    };
    let mut cumulative = Vec::with_capacity(shells.len());
    let mut acc = 0;
    for sh in &shells {
        acc += sh.len();
        cumulative.push(acc);
    }
    let mut out = Vec::with_capacity(sizes.len());
    for (n, &a) in sizes.iter().enumerate() {
        let k = cumulative.iter().rposition(|&c| c <= a).expect("identity ball has size 1");
        let ball: FolnerSet = shells[..=k].iter().flatten().cloned().map(Point::El).collect();
        let need = a - ball.len();
        let extra: Vec<Element> = match shells.get(k + 1) {
            Some(sh) => sh.iter().take(need).cloned().collect(),
            None if need == 0 => Vec::new(),
            None => return Err(FolnerError::Invalid(format!("group has fewer than {a} elements"))),
        };
        let mut set = ball.clone();
        set.extend(extra.iter().cloned().map(Point::El));
        let boundary = edge_boundary(g, s, &set);
        let ball_boundary = edge_boundary(g, s, &ball);
        let ratio = rat(boundary, set.len());
        let bound = rat((1 + s.len()) * ball_boundary, ball.len());
        out.push(PrescribedTerm {
            n: n + 1,
            size: set.len(),
            radius: k,
            ball_size: ball.len(),
            extra: extra.iter().map(|x| g.format_element(x)).collect(),
            set,
            boundary,
            ratio,
            ball_boundary,
            bound,
            holds: ratio <= bound,
        });
    }
    Ok(out)
}

/// One matched pair `(C_n, D_n)` for condition (iii).
#[derive(Clone, Debug)]
pub struct FolnerPair {
    pub n: usize,
    pub eps: Rational,
    pub c: FolnerSet,
    pub d: FolnerSet,
    pub c0_radius: usize,
    pub outcome: MatchOutcome,
    pub shift: Element,
    pub c_report: FolnerReport,
    pub d_report: FolnerReport,
}

/// Deterministic stream of matched, disjoint Følner pairs on `X` and `Y′`
/// with `eps_n = 1/(n+1)`.
pub struct FolnerPairs {
    x: ActionSpec,
    y: ActionSpec,
    y_inner: ActionSpec,
    a_g: FiniteSubgroup,
    a_h: FiniteSubgroup,
    pairs: Vec<FolnerPair>,
    disj: Disjointifier,
    next_copy: usize,
    pub max_radius: usize,
    pub max_stream: usize,
}

impl FolnerPairs {
    pub fn new(w: &APrimeWitness) -> Self {
        use crate::amalgam::Factor;
        let inner = match w.y.space() {
            PointSpace::DisjointUnion(parts) => match &parts[1] {
                PointSpace::Copies(inner) => (**inner).clone(),
                _ => unreachable!("Y' = H + copies of Y"),
            },
            _ => unreachable!("Y' = H + copies of Y"),
        };
        let a_g = w.spec.sub(Factor::G).clone();
        FolnerPairs {
            x: w.x.clone(),
            y: w.y.clone(),
            y_inner: ActionSpec::new(w.y.group(), inner).expect("validated"),
            disj: Disjointifier::new(w.x.group(), &a_g, 1_000_000),
            a_g,
            a_h: w.spec.sub(Factor::H).clone(),
            pairs: Vec::new(),
            next_copy: 0,
            max_radius: 4096,
            max_stream: 24,
        }
    }

    pub fn eps(n: usize) -> Rational {
        rat(1, n + 1)
    }

    /// Pair `n` (1-based), generating earlier pairs first.
    pub fn get(&mut self, n: usize) -> Result<&FolnerPair, FolnerError> {
        assert!(n >= 1, "pairs are numbered from 1");
        while self.pairs.len() < n {
            let p = self.generate(self.pairs.len() + 1)?;
            self.pairs.push(p);
        }
        Ok(&self.pairs[n - 1])
    }

    fn generate(&mut self, n: usize) -> Result<FolnerPair, FolnerError> {
        let eps = Self::eps(n);
        let g = self.x.group().clone();
        let h = self.y.group().clone();
        let f = g.generators().to_vec();
        let e = h.generators().to_vec();
        let xb = Blocks::new(&self.x, &self.a_g).map_err(|e| FolnerError::Invalid(e.to_string()))?;
        let mut found = None;
        for k in 0..=self.max_radius {
            let c0 = xb.saturate(&cayley_ball(&g, &f, k));
            if is_folner(&self.x, &c0, &f, eps).verdict {
                found = Some((k, c0));
                break;
            }
        }
        let (c0_radius, c0) = found.ok_or(FolnerError::RadiusCutoff(self.max_radius))?;

        let inner_blocks = Blocks::new(&self.y_inner, &self.a_h).map_err(|e| FolnerError::Invalid(e.to_string()))?;
        let y0 = self.y_inner.points().next().ok_or(FolnerError::Empty)?;
        let finite = self.y_inner.size().is_some();
        let start = self.next_copy;
        let copies_at = move |j: usize| if finite { 1usize << j } else { 1 };
        let y_inner = self.y_inner.clone();
        let d_seq = (0..self.max_stream).map(move |j| {
            let base = inner_blocks.saturate(&orbit(&y_inner, &y0, 1 << j));
            let mut d = FolnerSet::new();
            for c in start..start + copies_at(j) {
                for p in &base {
                    d.insert(Point::tagged(1, Point::tagged(c, p.clone())));
                }
            }
            d
        });
        let opts = MatchOptions {
            deletion: Deletion::LargestBlocks(self.a_h.clone()),
            ..MatchOptions::default()
        };
        let outcome = match_cardinalities(&g, &c0, &self.y, d_seq, eps, &f, &e, &opts)?;
        self.next_copy += copies_at(outcome.n - 1);
        let (shift, c) = self.disj.push(&outcome.c_prime)?;
        let d = outcome.d_prime.clone();
        let c_report = is_folner(&self.x, &c, &f, eps);
        let d_report = is_folner(&self.y, &d, &e, eps);
        Ok(FolnerPair {
            n,
            eps,
            c,
            d,
            c0_radius,
            outcome,
            shift,
            c_report,
            d_report,
        })
    }
}
