#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::Zero;

use relcat_core::fincat::{CategoryBuilder, FinCategory, RelativeCategory};
use relcat_core::sset::TruncatedSimplicialSet;

/// Rank over Q by fraction-free Gaussian elimination.
pub fn rational_rank(a: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                let v = &m[rank][c] * &m[r][j] - &m[r][c] * &m[rank][j];
                m[r][j] = v / &prev;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Rank over F_p.
pub fn rank_mod_p(a: &[Vec<i64>], p: i64) -> usize {
    let mut m: Vec<Vec<i64>> = a.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |x: i64| (1..p).find(|y| x * y % p == 1).expect("field");
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let s = inv(m[rank][c]);
        for j in 0..cols {
            m[rank][j] = m[rank][j] * s % p;
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for j in 0..cols {
                    m[r][j] = (m[r][j] - f * m[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Boundary `C_k -> C_{k-1}` on all simplices, degenerate ones included.
pub fn unnormalized_boundary(x: &TruncatedSimplicialSet, k: usize) -> Vec<Vec<i64>> {
    let mut d = vec![vec![0i64; x.count(k)]; x.count(k - 1)];
    for s in 0..x.count(k) {
        for i in 0..=k {
            d[x.face(k, i, s)][s] += if i % 2 == 0 { 1 } else { -1 };
        }
    }
    d
}

pub fn to_big(a: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
}

/// `dim H_k` over Q (`p = None`) or F_p for `k <= k_max`, from the unnormalized complex.
pub fn betti_oracle(x: &TruncatedSimplicialSet, k_max: usize, p: Option<i64>) -> Vec<usize> {
    let rank = |k: usize| -> usize {
        if k == 0 || x.count(k) == 0 || x.count(k - 1) == 0 {
            return 0;
        }
        let d = unnormalized_boundary(x, k);
        match p {
            None => rational_rank(&to_big(&d)),
            Some(p) => rank_mod_p(&d, p),
        }
    };
    let ranks: Vec<usize> = (0..=k_max + 1).map(rank).collect();
    (0..=k_max).map(|k| x.count(k) - ranks[k] - ranks[k + 1]).collect()
}

/// Number of `Z/p^e` summands in each `H_k`, recovered from Q and F_p dimensions
/// via universal coefficients.
pub fn p_torsion_counts(x: &TruncatedSimplicialSet, k_max: usize, p: i64) -> Vec<usize> {
    let q = betti_oracle(x, k_max, None);
    let fp = betti_oracle(x, k_max, Some(p));
    let mut t = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let prev = if k == 0 { 0 } else { t[k - 1] };
        t.push(fp[k] - q[k] - prev);
    }
    t
}

/// 2-out-of-3 closure by naive fixpoint iteration over all composable pairs.
pub fn brute_force_closure(m: &RelativeCategory) -> Vec<bool> {
    let c = m.base();
    let mut marked = m.marking().to_vec();
    loop {
        let mut changed = false;
        for f in 0..c.num_morphisms() {
            for g in 0..c.num_morphisms() {
                if c.source(g) != c.target(f) {
                    continue;
                }
                let h = c.comp(g, f);
                let count = [marked[f], marked[g], marked[h]].iter().filter(|&&b| b).count();
                if count == 2 {
                    for x in [f, g, h] {
                        changed |= !marked[x];
                        marked[x] = true;
                    }
                }
            }
        }
        if !changed {
            return marked;
        }
    }
}

/// The preorder on `n` objects generated by `edges` (pairs `i < j`), as a category.
pub fn preorder(n: usize, edges: &[(usize, usize)]) -> FinCategory {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(i, j) in edges {
        reach[i][j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut b = CategoryBuilder::new();
    let objs: Vec<usize> = (0..n).map(|i| b.add_object_with_identity(format!("o{i}"))).collect();
    let mut mor = vec![vec![None; n]; n];
    for i in 0..n {
        mor[i][i] = b.identity_of(objs[i]);
        for j in 0..n {
            if i != j && reach[i][j] {
                mor[i][j] = Some(b.add_morphism(format!("m{i}_{j}"), objs[i], objs[j]));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if let (Some(f), Some(g), Some(h)) = (mor[i][j], mor[j][k], mor[i][k]) {
                    b.set_compose(g, f, h);
                }
            }
        }
    }
    b.build().expect("preorder is a category")
}
