use std::collections::HashSet;

use super::{Element, GroupSpec, Kind};

/// Deterministic element stream of a [`GroupSpec`].
///
/// Finite tables come out in table order, ℤ^d by breadth-first shells of
/// the Cayley graph (canonical order inside a shell) and direct products by
/// diagonal enumeration over the component streams.
pub struct Enumeration {
    state: State,
}

enum State {
    Table {
        next: usize,
        len: usize,
    },
    Bfs {
        group: GroupSpec,
        shell: Vec<Element>,
        pos: usize,
        seen: HashSet<Element>,
    },
    Product(Box<Product>),
}

struct Component {
    source: Enumeration,
    cache: Vec<Element>,
    size: Option<usize>,
}

impl Component {
    fn get(&mut self, i: usize) -> Option<&Element> {
        while self.cache.len() <= i {
            if self.size.is_some_and(|n| self.cache.len() >= n) {
                return None;
            }
            match self.source.next() {
                Some(x) => self.cache.push(x),
                None => {
                    self.size = Some(self.cache.len());
                    return None;
                }
            }
        }
        self.cache.get(i)
    }
}

struct Product {
    comps: Vec<Component>,
    sum: usize,
    pending: Vec<Vec<usize>>,
    pos: usize,
    max_sum: Option<usize>,
}

/// Index tuples of length `k` with entries summing to `s`, lexicographic.
fn compositions(k: usize, s: usize, bounds: &[Option<usize>]) -> Vec<Vec<usize>> {
    fn rec(
        i: usize,
        left: usize,
        bounds: &[Option<usize>],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i + 1 == bounds.len() {
            if bounds[i].map_or(true, |b| left < b) {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let hi = bounds[i].map_or(left, |b| left.min(b.saturating_sub(1)));
        for x in 0..=hi {
            cur.push(x);
            rec(i + 1, left - x, bounds, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(0, s, bounds, &mut Vec::new(), &mut out);
    }
    out
}

impl Enumeration {
    pub(super) fn new(group: GroupSpec) -> Self {
        let state = match group.kind() {
            Kind::FiniteTable(t) => State::Table {
                next: 0,
                len: t.rows.len(),
            },
            Kind::FreeAbelian { .. } => {
                let id = group.identity();
                State::Bfs {
                    seen: HashSet::from([id.clone()]),
                    shell: vec![id],
                    pos: 0,
                    group,
                }
            }
            Kind::DirectProduct(cs) => {
                let comps: Vec<Component> = cs
                    .iter()
                    .map(|c| Component {
                        source: c.enumerate(),
                        cache: Vec::new(),
                        size: c.order(),
                    })
                    .collect();
                let max_sum = comps
                    .iter()
                    .map(|c| c.size.map(|n| n - 1))
                    .sum::<Option<usize>>();
                State::Product(Box::new(Product {
                    comps,
                    sum: 0,
                    pending: Vec::new(),
                    pos: 0,
                    max_sum,
                }))
            }
        };
        Enumeration { state }
    }
}

impl Iterator for Enumeration {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        match &mut self.state {
            State::Table { next, len } => {
                if *next < *len {
                    *next += 1;
                    Some(Element::Table(*next - 1))
                } else {
                    None
                }
            }
            State::Bfs {
                group,
                shell,
                pos,
                seen,
            } => {
                if *pos == shell.len() {
                    let mut next: Vec<Element> = Vec::new();
                    for x in shell.iter() {
                        for g in group.generators() {
                            let y = group.mul(x, g);
                            if seen.insert(y.clone()) {
                                next.push(y);
                            }
                        }
                    }
                    if next.is_empty() {
                        return None;
                    }
                    next.sort();
                    *shell = next;
                    *pos = 0;
                }
                *pos += 1;
                Some(shell[*pos - 1].clone())
            }
            State::Product(p) => loop {
                if p.pos < p.pending.len() {
                    let idx = p.pending[p.pos].clone();
                    p.pos += 1;
                    let mut parts = Vec::with_capacity(idx.len());
                    let mut ok = true;
                    for (c, &i) in p.comps.iter_mut().zip(&idx) {
                        match c.get(i) {
                            Some(x) => parts.push(x.clone()),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        return Some(Element::Tuple(parts));
                    }
                    continue;
                }
                if p.max_sum.is_some_and(|m| p.sum > m) {
                    return None;
                }
                let bounds: Vec<Option<usize>> = p.comps.iter().map(|c| c.size).collect();
                p.pending = compositions(p.comps.len(), p.sum, &bounds);
                p.pos = 0;
                p.sum += 1;
            },
        }
    }
}
