//! Concrete computable groups: finite multiplication tables, free abelian
//! groups ℤ^d and direct products of those.
//!
//! Every group carries a symmetric generator list and a canonical total order
//! on its elements (the derived [`Ord`] on [`Element`]). The order breaks every
//! tie in the crate, so all constructions built on top are deterministic.

mod enumerate;
mod hom;
pub mod lattice;
mod subgroup;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

pub use enumerate::Enumeration;
pub use hom::{Homomorphism, SubgroupIso};
pub use subgroup::{FiniteSubgroup, SubgroupSpec};

use lattice::basis_expressions;

/// Errors raised by group construction, arithmetic and parsing.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("generator list is empty")]
    NoGenerators,
    #[error("generators do not generate the group: {0}")]
    DoNotGenerate(String),
    #[error("element {element} does not belong to {group}")]
    ForeignElement { element: String, group: String },
    #[error("cannot parse element {input:?} of {group}: {reason}")]
    Parse {
        input: String,
        group: String,
        reason: String,
    },
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("invalid homomorphism: {0}")]
    InvalidHomomorphism(String),
    #[error("enumeration cutoff of {0} elements exceeded")]
    Cutoff(usize),
    #[error("{0} is not finite")]
    NotFinite(String),
}

/// A group element. Which variant is valid depends on the owning group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Row index into a finite multiplication table.
    Table(usize),
    /// Integer vector in ℤ^d.
    Vector(Vec<i64>),
    /// One component per factor of a direct product.
    Tuple(Vec<Element>),
}

/// Coset side for [`GroupSpec::coset_rep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Right cosets `A·g`.
    Right,
    /// Left cosets `g·A`.
    Left,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) struct Table {
    names: Vec<String>,
    rows: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    /// One factorization per element, as generator indices multiplied left
    /// to right.
    words: Vec<Vec<usize>>,
    by_name: HashMap<String, usize>,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    FiniteTable(Table),
    FreeAbelian {
        rank: usize,
        /// `basis[i]` expresses `e_i` over the generator list.
        basis: Vec<Vec<i64>>,
    },
    DirectProduct(Vec<GroupSpec>),
}

#[derive(Debug, PartialEq, Eq)]
struct Inner {
    kind: Kind,
    generators: Vec<Element>,
    /// Number of generators supplied by the caller; the rest are appended
    /// inverses.
    primary: usize,
}

/// A concrete group. Cheap to clone; immutable after construction.
#[derive(Clone, Debug)]
pub struct GroupSpec(Arc<Inner>);

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for GroupSpec {}

fn check_name(name: &str) -> Result<(), GroupError> {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || "()[],;:|<>".contains(c))
        || name.starts_with('-')
    {
        return Err(GroupError::InvalidTable(format!(
            "element name {name:?} is empty or contains a reserved character"
        )));
    }
    Ok(())
}

impl GroupSpec {
    /// Builds a finite group from a multiplication table `rows[i][j] = i·j`.
    /// The table is checked for closure, latin-square rows and columns,
    /// an identity and associativity; the generators must generate it.
    pub fn finite_table(
        names: Vec<String>,
        rows: Vec<Vec<usize>>,
        generators: Vec<usize>,
    ) -> Result<Self, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        if names.len() != n {
            return Err(GroupError::InvalidTable(format!(
                "{} names for {} rows",
                names.len(),
                n
            )));
        }
        let mut by_name = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            check_name(name)?;
            if by_name.insert(name.clone(), i).is_some() {
                return Err(GroupError::InvalidTable(format!("duplicate name {name:?}")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::InvalidTable(format!("row {i} has wrong length")));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(GroupError::InvalidTable(format!("row {i} is not a permutation")));
                }
            }
        }
        for j in 0..n {
            let mut seen = vec![false; n];
            for row in &rows {
                if std::mem::replace(&mut seen[row[j]], true) {
                    return Err(GroupError::InvalidTable(format!(
                        "column {j} is not a permutation"
                    )));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| rows[e][x] == x && rows[x][e] == x))
            .ok_or_else(|| GroupError::InvalidTable("no identity".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if rows[rows[a][b]][c] != rows[a][rows[b][c]] {
                        return Err(GroupError::InvalidTable(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let inverses: Vec<usize> = (0..n)
            .map(|a| (0..n).find(|&b| rows[a][b] == identity).unwrap())
            .collect();
        if generators.is_empty() {
            return Err(GroupError::NoGenerators);
        }
        if let Some(&g) = generators.iter().find(|&&g| g >= n) {
            return Err(GroupError::InvalidTable(format!("generator index {g} out of range")));
        }
        let mut gens: Vec<usize> = Vec::new();
        for &g in &generators {
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
        let primary = gens.len();
        for i in 0..primary {
            let inv = inverses[gens[i]];
            if !gens.contains(&inv) {
                gens.push(inv);
            }
        }
        // BFS closure; the first word found is the stored factorization.
        let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
        words[identity] = Some(Vec::new());
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in gens.iter().enumerate() {
                let y = rows[x][g];
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap();
                    w.push(gi);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = words.iter().position(Option::is_none) {
            return Err(GroupError::DoNotGenerate(format!(
                "closure misses {}",
                names[missing]
            )));
        }
        let table = Table {
            names,
            rows,
            identity,
            inverses,
            words: words.into_iter().map(Option::unwrap).collect(),
            by_name,
        };
        Ok(GroupSpec(Arc::new(Inner {
            kind: Kind::FiniteTable(table),
            generators: gens.into_iter().map(Element::Table).collect(),
            primary,
        })))
    }

    /// ℤ/n with elements named `0`..`n-1` and generator `1`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group of order 0");
        let names = (0..n).map(|i| i.to_string()).collect();
        let rows = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        let gens = vec![if n == 1 { 0 } else { 1 }];
        Self::finite_table(names, rows, gens).expect("cyclic table is valid")
    }

    /// Sym(n) acting on `{0,…,n-1}`, composed right to left:
    /// `(στ)(i) = σ(τ(i))`. Elements are named in one-line notation, e.g.
    /// `p102`; they are ordered lexicographically, so `p01…` is the identity.
    /// Generated by the adjacent transpositions.
    pub fn symmetric(n: usize) -> Self {
        assert!((1..=9).contains(&n), "symmetric group degree must be in 1..=9");
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            perms.push(current.clone());
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        let index: HashMap<Vec<usize>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let rows = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index[&t.iter().map(|&k| s[k]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        let names = perms
            .iter()
            .map(|p| format!("p{}", p.iter().map(|d| d.to_string()).collect::<String>()))
            .collect();
        let gens = if n == 1 {
            vec![0]
        } else {
            (0..n - 1)
                .map(|i| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.swap(i, i + 1);
                    index[&p]
                })
                .collect()
        };
        Self::finite_table(names, rows, gens).expect("symmetric table is valid")
    }

    /// ℤ^d with the standard generators `±e_i`.
    pub fn free_abelian(rank: usize) -> Self {
        let gens = (0..rank)
            .map(|i| {
                let mut v = vec![0; rank];
                v[i] = 1;
                v
            })
            .collect();
        Self::free_abelian_with_generators(rank, gens).expect("standard basis spans")
    }

    /// ℤ^d with caller-supplied generators, which must span ℤ^d.
    pub fn free_abelian_with_generators(
        rank: usize,
        generators: Vec<Vec<i64>>,
    ) -> Result<Self, GroupError> {
        if rank == 0 {
            return Err(GroupError::DoNotGenerate("rank must be positive".into()));
        }
        if generators.is_empty() {
            return Err(GroupError::NoGenerators);
        }
        if let Some(g) = generators.iter().find(|g| g.len() != rank) {
            return Err(GroupError::DoNotGenerate(format!(
                "generator {g:?} has length {} instead of {rank}",
                g.len()
            )));
        }
        let mut gens: Vec<Vec<i64>> = Vec::new();
        for g in generators {
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
        let primary = gens.len();
        for i in 0..primary {
            let inv: Vec<i64> = gens[i].iter().map(|x| -x).collect();
            if !gens.contains(&inv) {
                gens.push(inv);
            }
        }
        let basis = basis_expressions(&gens, rank).ok_or_else(|| {
            GroupError::DoNotGenerate(format!("generators do not span Z^{rank}"))
        })?;
        Ok(GroupSpec(Arc::new(Inner {
            kind: Kind::FreeAbelian { rank, basis },
            generators: gens.into_iter().map(Element::Vector).collect(),
            primary,
        })))
    }

    /// Direct product; generators are the component generators embedded
    /// coordinate-wise.
    pub fn direct_product(components: Vec<GroupSpec>) -> Result<Self, GroupError> {
        if components.is_empty() {
            return Err(GroupError::DoNotGenerate("direct product of nothing".into()));
        }
        let ids: Vec<Element> = components.iter().map(GroupSpec::identity).collect();
        let mut gens = Vec::new();
        for (i, c) in components.iter().enumerate() {
            for g in c.generators() {
                let mut t = ids.clone();
                t[i] = g.clone();
                gens.push(Element::Tuple(t));
            }
        }
        let primary = gens.len();
        Ok(GroupSpec(Arc::new(Inner {
            kind: Kind::DirectProduct(components),
            generators: gens,
            primary,
        })))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Symmetric generator list: caller-supplied generators first, then any
    /// missing inverses.
    pub fn generators(&self) -> &[Element] {
        &self.0.generators
    }

    /// Number of caller-supplied generators at the front of [`generators`].
    ///
    /// [`generators`]: GroupSpec::generators
    pub fn primary_generator_count(&self) -> usize {
        self.0.primary
    }

    pub fn identity(&self) -> Element {
        match &self.0.kind {
            Kind::FiniteTable(t) => Element::Table(t.identity),
            Kind::FreeAbelian { rank, .. } => Element::Vector(vec![0; *rank]),
            Kind::DirectProduct(cs) => Element::Tuple(cs.iter().map(GroupSpec::identity).collect()),
        }
    }

    /// Order of the group, `None` if infinite.
    pub fn order(&self) -> Option<usize> {
        match &self.0.kind {
            Kind::FiniteTable(t) => Some(t.rows.len()),
            Kind::FreeAbelian { .. } => None,
            Kind::DirectProduct(cs) => cs.iter().map(GroupSpec::order).product(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    pub fn contains(&self, g: &Element) -> bool {
        match (&self.0.kind, g) {
            (Kind::FiniteTable(t), Element::Table(i)) => *i < t.rows.len(),
            (Kind::FreeAbelian { rank, .. }, Element::Vector(v)) => v.len() == *rank,
            (Kind::DirectProduct(cs), Element::Tuple(xs)) => {
                cs.len() == xs.len() && cs.iter().zip(xs).all(|(c, x)| c.contains(x))
            }
            _ => false,
        }
    }

    fn foreign(&self, g: &Element) -> GroupError {
        GroupError::ForeignElement {
            element: format!("{g:?}"),
            group: self.describe(),
        }
    }

    /// Checks membership, returning a descriptive error otherwise.
    pub fn check(&self, g: &Element) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(self.foreign(g))
        }
    }

    /// Group product `g·h`. Both elements must belong to this group.
    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul(g, h))
    }

    /// Unchecked product for elements already known to belong to the group.
    ///
    /// Panics on a foreign element.
    pub fn mul(&self, g: &Element, h: &Element) -> Element {
        match (&self.0.kind, g, h) {
            (Kind::FiniteTable(t), Element::Table(a), Element::Table(b)) => {
                Element::Table(t.rows[*a][*b])
            }
            (Kind::FreeAbelian { .. }, Element::Vector(a), Element::Vector(b))
                if a.len() == b.len() =>
            {
                Element::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Kind::DirectProduct(cs), Element::Tuple(a), Element::Tuple(b)) => Element::Tuple(
                cs.iter()
                    .zip(a.iter().zip(b))
                    .map(|(c, (x, y))| c.mul(x, y))
                    .collect(),
            ),
            _ => panic!("{}", self.foreign(if self.contains(g) { h } else { g })),
        }
    }

    /// Inverse of `g`. Panics if `g` does not belong to the group.
    pub fn inverse(&self, g: &Element) -> Element {
        match (&self.0.kind, g) {
            (Kind::FiniteTable(t), Element::Table(a)) => Element::Table(t.inverses[*a]),
            (Kind::FreeAbelian { .. }, Element::Vector(v)) => {
                Element::Vector(v.iter().map(|x| -x).collect())
            }
            (Kind::DirectProduct(cs), Element::Tuple(xs)) => {
                Element::Tuple(cs.iter().zip(xs).map(|(c, x)| c.inverse(x)).collect())
            }
            _ => panic!("{}", self.foreign(g)),
        }
    }

    /// `g^n` for any integer `n`.
    pub fn pow(&self, g: &Element, n: i64) -> Element {
        let mut base = if n < 0 { self.inverse(g) } else { g.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Deterministic, duplicate-free, exhaustive element stream.
    pub fn enumerate(&self) -> Enumeration {
        Enumeration::new(self.clone())
    }

    /// All elements in canonical order, or an error for infinite groups.
    pub fn elements(&self) -> Result<Vec<Element>, GroupError> {
        if !self.is_finite() {
            return Err(GroupError::NotFinite(self.describe()));
        }
        let mut v: Vec<Element> = self.enumerate().collect();
        v.sort();
        Ok(v)
    }

    /// Canonical representative of the coset of `g` modulo the finite
    /// subgroup `a`: the least element of `A·g` (right) or `g·A` (left).
    pub fn coset_rep(&self, g: &Element, a: &FiniteSubgroup, side: Side) -> Element {
        a.elements()
            .iter()
            .map(|x| match side {
                Side::Right => self.mul(x, g),
                Side::Left => self.mul(g, x),
            })
            .min()
            .expect("subgroup contains the identity")
    }

    /// Writes `g` as a product of powers of generators: the result lists
    /// `(generator index, exponent)` pairs multiplied left to right.
    pub fn factorize(&self, g: &Element) -> Result<Vec<(usize, i64)>, GroupError> {
        self.check(g)?;
        Ok(self.factorize_unchecked(g))
    }

    fn factorize_unchecked(&self, g: &Element) -> Vec<(usize, i64)> {
        match (&self.0.kind, g) {
            (Kind::FiniteTable(t), Element::Table(a)) => {
                t.words[*a].iter().map(|&gi| (gi, 1)).collect()
            }
            (Kind::FreeAbelian { rank, basis }, Element::Vector(v)) => {
                let ngens = self.0.generators.len();
                let mut coeffs = vec![0i64; ngens];
                for i in 0..*rank {
                    for (j, c) in basis[i].iter().enumerate() {
                        coeffs[j] += v[i] * c;
                    }
                }
                coeffs
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, c)| c != 0)
                    .collect()
            }
            (Kind::DirectProduct(cs), Element::Tuple(xs)) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for (c, x) in cs.iter().zip(xs) {
                    out.extend(
                        c.factorize_unchecked(x)
                            .into_iter()
                            .map(|(gi, e)| (gi + offset, e)),
                    );
                    offset += c.generators().len();
                }
                out
            }
            _ => unreachable!("checked by caller"),
        }
    }

    /// Short human-readable description such as `Z/4-table`, `Z^2`,
    /// `(Z^1 x table(2))`.
    pub fn describe(&self) -> String {
        match &self.0.kind {
            Kind::FiniteTable(t) => format!("table({})", t.rows.len()),
            Kind::FreeAbelian { rank, .. } => format!("Z^{rank}"),
            Kind::DirectProduct(cs) => format!(
                "({})",
                cs.iter().map(GroupSpec::describe).collect::<Vec<_>>().join(" x ")
            ),
        }
    }

    /// Canonical element name. Table elements print their name, vectors of
    /// ℤ^1 a bare integer, other vectors and tuples a parenthesised list.
    pub fn format_element(&self, g: &Element) -> String {
        match (&self.0.kind, g) {
            (Kind::FiniteTable(t), Element::Table(a)) => t.names[*a].clone(),
            (Kind::FreeAbelian { rank: 1, .. }, Element::Vector(v)) => v[0].to_string(),
            (Kind::FreeAbelian { .. }, Element::Vector(v)) => format!(
                "({})",
                v.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
            ),
            (Kind::DirectProduct(cs), Element::Tuple(xs)) => format!(
                "({})",
                cs.iter()
                    .zip(xs)
                    .map(|(c, x)| c.format_element(x))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            _ => format!("<foreign {g:?}>"),
        }
    }

    /// Inverse of [`format_element`](GroupSpec::format_element).
    pub fn parse_element(&self, s: &str) -> Result<Element, GroupError> {
        let err = |reason: &str| GroupError::Parse {
            input: s.to_string(),
            group: self.describe(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        match &self.0.kind {
            Kind::FiniteTable(t) => t
                .by_name
                .get(s)
                .map(|&i| Element::Table(i))
                .ok_or_else(|| err("unknown element name")),
            Kind::FreeAbelian { rank, .. } => {
                let body = if *rank == 1 && !s.starts_with('(') {
                    s
                } else {
                    s.strip_prefix('(')
                        .and_then(|x| x.strip_suffix(')'))
                        .ok_or_else(|| err("expected (x1,...,xd)"))?
                };
                let v: Vec<i64> = split_top_level(body)
                    .iter()
                    .map(|x| x.trim().parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| err("expected integers"))?;
                if v.len() != *rank {
                    return Err(err("wrong number of coordinates"));
                }
                Ok(Element::Vector(v))
            }
            Kind::DirectProduct(cs) => {
                let body = s
                    .strip_prefix('(')
                    .and_then(|x| x.strip_suffix(')'))
                    .ok_or_else(|| err("expected (c1,...,ck)"))?;
                let parts = split_top_level(body);
                if parts.len() != cs.len() {
                    return Err(err("wrong number of components"));
                }
                Ok(Element::Tuple(
                    cs.iter()
                        .zip(parts)
                        .map(|(c, p)| c.parse_element(p))
                        .collect::<Result<_, _>>()?,
                ))
            }
        }
    }

    /// Elements of word length at most `radius` in the symmetric generating
    /// set `s`, grouped into shells by exact word length; each shell sorted
    /// canonically.
    pub fn ball_shells(&self, s: &[Element], radius: usize) -> Vec<Vec<Element>> {
        let mut seen: HashSet<Element> = HashSet::new();
        let id = self.identity();
        seen.insert(id.clone());
        let mut shells = vec![vec![id]];
        for _ in 0..radius {
            let mut next: Vec<Element> = Vec::new();
            for x in shells.last().unwrap() {
                for g in s {
                    let y = self.mul(x, g);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort();
            shells.push(next);
        }
        shells
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Splits on commas that are not nested inside parentheses.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Element {
        Element::Vector(xs.to_vec())
    }

    #[test]
    fn multiply_examples() {
        let z2 = GroupSpec::free_abelian(2);
        assert_eq!(z2.multiply(&v(&[1, 0]), &v(&[0, 1])).unwrap(), v(&[1, 1]));
        let z4 = GroupSpec::cyclic(4);
        assert_eq!(
            z4.multiply(&Element::Table(3), &Element::Table(2)).unwrap(),
            Element::Table(1)
        );
        let g = v(&[4, -7]);
        assert_eq!(z2.mul(&g, &z2.identity()), g);
    }

    #[test]
    fn multiply_rejects_foreign_elements() {
        let z2 = GroupSpec::free_abelian(2);
        let z4 = GroupSpec::cyclic(4);
        assert!(matches!(
            z2.multiply(&v(&[1]), &v(&[0, 1])),
            Err(GroupError::ForeignElement { .. })
        ));
        assert!(z4.multiply(&Element::Table(4), &Element::Table(0)).is_err());
        assert!(z4.multiply(&v(&[1]), &Element::Table(0)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let z2 = GroupSpec::free_abelian(2);
        assert_eq!(z2.inverse(&z2.identity()), z2.identity());
        assert_eq!(z2.inverse(&v(&[3, -1])), v(&[-3, 1]));
        let z6 = GroupSpec::cyclic(6);
        assert_eq!(z6.inverse(&Element::Table(4)), Element::Table(2));
    }

    #[test]
    fn table_validation() {
        let names = vec!["e".to_string(), "a".to_string()];
        // not a latin square
        assert!(GroupSpec::finite_table(names.clone(), vec![vec![0, 1], vec![1, 1]], vec![1]).is_err());
        // generators miss an element
        assert!(matches!(
            GroupSpec::finite_table(names, vec![vec![0, 1], vec![1, 0]], vec![0]),
            Err(GroupError::DoNotGenerate(_))
        ));
        // non-associative loop of order 5 with identity 0
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let names = (0..5).map(|i| i.to_string()).collect();
        assert!(matches!(
            GroupSpec::finite_table(names, rows, vec![1, 2]),
            Err(GroupError::InvalidTable(_))
        ));
    }

    #[test]
    fn generators_are_symmetrised() {
        let z4 = GroupSpec::cyclic(4);
        assert_eq!(z4.generators(), &[Element::Table(1), Element::Table(3)]);
        assert_eq!(z4.primary_generator_count(), 1);
        let z = GroupSpec::free_abelian(1);
        assert_eq!(z.generators(), &[v(&[1]), v(&[-1])]);
        assert!(GroupSpec::free_abelian_with_generators(2, vec![vec![2, 0], vec![0, 1]]).is_err());
        assert!(GroupSpec::free_abelian_with_generators(1, vec![vec![2], vec![3]]).is_ok());
    }

    #[test]
    fn symmetric_group_tables() {
        let s3 = GroupSpec::symmetric(3);
        assert_eq!(s3.order(), Some(6));
        assert_eq!(s3.format_element(&s3.identity()), "p012");
        let t = s3.parse_element("p102").unwrap();
        assert_eq!(s3.mul(&t, &t), s3.identity());
        assert_eq!(GroupSpec::symmetric(4).order(), Some(24));
    }

    #[test]
    fn coset_rep_examples() {
        let z6 = GroupSpec::cyclic(6);
        let a = FiniteSubgroup::new(&z6, vec![Element::Table(0), Element::Table(3)]).unwrap();
        assert_eq!(z6.coset_rep(&Element::Table(4), &a, Side::Right), Element::Table(1));
        assert_eq!(z6.coset_rep(&Element::Table(3), &a, Side::Right), Element::Table(0));
        let zz2 = GroupSpec::direct_product(vec![GroupSpec::free_abelian(1), GroupSpec::cyclic(2)]).unwrap();
        let a = FiniteSubgroup::generated(&zz2, &[zz2.parse_element("(0,1)").unwrap()], 16).unwrap();
        let g = zz2.parse_element("(5,1)").unwrap();
        assert_eq!(zz2.format_element(&zz2.coset_rep(&g, &a, Side::Right)), "(5,0)");
    }

    #[test]
    fn element_text_round_trip() {
        let g = GroupSpec::direct_product(vec![GroupSpec::free_abelian(2), GroupSpec::symmetric(3)]).unwrap();
        let e = g.parse_element("((3,-4),p120)").unwrap();
        assert_eq!(g.format_element(&e), "((3,-4),p120)");
        assert!(g.parse_element("((3,-4))").is_err());
        let z = GroupSpec::free_abelian(1);
        assert_eq!(z.parse_element("-7").unwrap(), v(&[-7]));
        assert_eq!(z.parse_element("(-7)").unwrap(), v(&[-7]));
    }

    #[test]
    fn factorization_reproduces_element() {
        for g in [
            GroupSpec::symmetric(3),
            GroupSpec::free_abelian_with_generators(2, vec![vec![1, 1], vec![0, 1]]).unwrap(),
            GroupSpec::direct_product(vec![GroupSpec::free_abelian(1), GroupSpec::cyclic(3)]).unwrap(),
        ] {
            for x in g.enumerate().take(40) {
                let word = g.factorize(&x).unwrap();
                let prod = word.iter().fold(g.identity(), |acc, &(gi, e)| {
                    g.mul(&acc, &g.pow(&g.generators()[gi], e))
                });
                assert_eq!(prod, x);
            }
        }
    }
}
