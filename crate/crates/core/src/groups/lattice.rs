//! Integer row reduction for subgroups of ℤ^d.
//!
//! Rows are reduced to Hermite normal form with a tracked unimodular
//! transform, which gives membership, rank, index, and explicit expressions
//! of the standard basis in terms of a spanning generator list.

/// Hermite normal form of the row lattice spanned by some integer vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    /// Nonzero HNF rows, pivot columns strictly increasing, pivots positive.
    rows: Vec<Vec<i128>>,
    pivots: Vec<usize>,
}

struct Reduced {
    rows: Vec<Vec<i128>>,
    transform: Vec<Vec<i128>>,
    rank: usize,
    pivots: Vec<usize>,
}

fn sub_row(m: &mut [Vec<i128>], target: usize, source: usize, q: i128) {
    if q == 0 {
        return;
    }
    let src = m[source].clone();
    for (t, s) in m[target].iter_mut().zip(src) {
        *t -= q * s;
    }
}

fn reduce(generators: &[Vec<i64>], dim: usize) -> Reduced {
    let n = generators.len();
    let mut m: Vec<Vec<i128>> = generators
        .iter()
        .map(|g| g.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..dim {
        if r == n {
            break;
        }
        loop {
            let best = (r..n)
                .filter(|&i| m[i][c] != 0)
                .min_by_key(|&i| m[i][c].abs());
            let Some(best) = best else { break };
            m.swap(r, best);
            u.swap(r, best);
            let mut done = true;
            for i in r + 1..n {
                if m[i][c] != 0 {
                    let q = m[i][c].div_euclid(m[r][c]);
                    sub_row(&mut m, i, r, q);
                    sub_row(&mut u, i, r, q);
                    if m[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[r][c] == 0 {
            continue;
        }
        if m[r][c] < 0 {
            m[r].iter_mut().for_each(|x| *x = -*x);
            u[r].iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..r {
            let q = m[i][c].div_euclid(m[r][c]);
            sub_row(&mut m, i, r, q);
            sub_row(&mut u, i, r, q);
        }
        pivots.push(c);
        r += 1;
    }
    Reduced {
        rows: m,
        transform: u,
        rank: r,
        pivots,
    }
}

impl Lattice {
    pub fn new(generators: &[Vec<i64>], dim: usize) -> Self {
        let red = reduce(generators, dim);
        Lattice {
            dim,
            rows: red.rows[..red.rank].to_vec(),
            pivots: red.pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        if v.len() != self.dim {
            return false;
        }
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if w[c] % row[c] != 0 {
                return false;
            }
            let q = w[c] / row[c];
            for (x, y) in w.iter_mut().zip(row) {
                *x -= q * y;
            }
        }
        w.iter().all(|&x| x == 0)
    }

    /// Index in ℤ^d, or `None` when the lattice has lower rank (infinite index).
    pub fn index(&self) -> Option<u64> {
        if self.rank() < self.dim {
            return None;
        }
        Some(
            self.rows
                .iter()
                .zip(&self.pivots)
                .map(|(row, &c)| row[c] as u64)
                .product(),
        )
    }

    pub fn is_full(&self) -> bool {
        self.index() == Some(1)
    }

    /// Canonical representative of `v` modulo the lattice: every pivot
    /// coordinate is brought into `[0, pivot)`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let q = w[c].div_euclid(row[c]);
            for (x, y) in w.iter_mut().zip(row) {
                *x -= q * y;
            }
        }
        w.into_iter().map(|x| x as i64).collect()
    }
}

/// For generators spanning ℤ^d, returns for each standard basis vector `e_i`
/// integer coefficients `c` with `e_i = Σ_j c[j]·generators[j]`.
/// Returns `None` when the generators do not span ℤ^d.
pub fn basis_expressions(generators: &[Vec<i64>], dim: usize) -> Option<Vec<Vec<i64>>> {
    let red = reduce(generators, dim);
    if red.rank != dim {
        return None;
    }
    // Full-rank HNF of a spanning set is the identity on the first `dim` rows.
    for i in 0..dim {
        for j in 0..dim {
            if red.rows[i][j] != i128::from(i == j) {
                return None;
            }
        }
    }
    Some(
        red.transform[..dim]
            .iter()
            .map(|row| row.iter().map(|&x| x as i64).collect())
            .collect(),
    )
}

/// Rank over ℚ of the given integer vectors.
pub fn rank(vectors: &[Vec<i64>], dim: usize) -> usize {
    reduce(vectors, dim).rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_basis_spans() {
        let gens = vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]];
        let exprs = basis_expressions(&gens, 2).unwrap();
        for (i, coeffs) in exprs.iter().enumerate() {
            let mut v = vec![0i64; 2];
            for (c, g) in coeffs.iter().zip(&gens) {
                v[0] += c * g[0];
                v[1] += c * g[1];
            }
            let mut e = vec![0; 2];
            e[i] = 1;
            assert_eq!(v, e);
        }
    }

    #[test]
    fn non_unimodular_generators_do_not_span() {
        assert!(basis_expressions(&[vec![2, 0], vec![0, 1]], 2).is_none());
        assert!(basis_expressions(&[vec![2], vec![3]], 1).is_some());
    }

    #[test]
    fn membership_rank_and_index() {
        let l = Lattice::new(&[vec![2, 0], vec![0, 3]], 2);
        assert!(l.contains(&[4, -3]));
        assert!(!l.contains(&[1, 0]));
        assert_eq!(l.index(), Some(6));
        let line = Lattice::new(&[vec![8]], 1);
        assert_eq!(line.index(), Some(8));
        assert!(line.contains(&[-16]));
        assert!(!line.contains(&[4]));
        let thin = Lattice::new(&[vec![1, 1]], 2);
        assert_eq!(thin.rank(), 1);
        assert_eq!(thin.index(), None);
        assert_eq!(rank(&[vec![1, 2], vec![2, 4]], 2), 1);
    }

    #[test]
    fn coset_reduction_is_canonical() {
        let l = Lattice::new(&[vec![5]], 1);
        assert_eq!(l.reduce(&[-7]), vec![3]);
        assert_eq!(l.reduce(&[13]), vec![3]);
        let l = Lattice::new(&[vec![2, 1], vec![0, 3]], 2);
        for x in -6..6 {
            for y in -6..6 {
                let r = l.reduce(&[x, y]);
                let diff = [x - r[0], y - r[1]];
                assert!(l.contains(&diff));
                assert_eq!(l.reduce(&r), r);
            }
        }
    }
}
