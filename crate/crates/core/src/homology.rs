//! Integral homology via normalized chains and Smith normal form, and
//! weak-equivalence certificates for simplicial maps.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sset::{pi0, SimplicialMap, TruncatedSimplicialSet};

/// Integer matrix stored by columns, entries sorted by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn from_dense(a: &[Vec<i64>]) -> Self {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        let columns = (0..cols)
            .map(|j| (0..rows).filter(|&i| a[i][j] != 0).map(|i| (i, a[i][j])).collect())
            .collect();
        SparseMatrix { rows, cols, columns }
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut a = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                a[i][j] = BigInt::from(v);
            }
        }
        a
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// `self · other`, or `None` on overflow.
    pub fn mul(&self, other: &SparseMatrix) -> Option<SparseMatrix> {
        assert_eq!(self.cols, other.rows);
        let mut columns = Vec::with_capacity(other.cols);
        for col in &other.columns {
            let mut acc: std::collections::BTreeMap<usize, i64> = Default::default();
            for &(k, b) in col {
                for &(i, a) in &self.columns[k] {
                    let e = acc.entry(i).or_insert(0);
                    *e = e.checked_add(a.checked_mul(b)?)?;
                }
            }
            columns.push(acc.into_iter().filter(|&(_, v)| v != 0).collect());
        }
        Some(SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            columns,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// Rank and the invariant factors greater than one.
    pub fn invariant_factors(&self) -> (usize, Vec<BigInt>) {
        sparse_invariant_factors(self)
    }
}

/// Result of a Smith normal form computation: `A = U · D · V` with `U`, `V` unimodular.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diagonal: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub rows: usize,
    pub cols: usize,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|d| !d.is_zero()).count()
    }

    pub fn d_matrix(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (i, x) in self.diagonal.iter().enumerate() {
            d[i][i] = x.clone();
        }
        d
    }

    /// `U · D · V`.
    pub fn reconstruct(&self) -> Vec<Vec<BigInt>> {
        mat_mul(&mat_mul(&self.u, &self.d_matrix()), &self.v)
    }

    /// Nonzero diagonal entries each divide the next.
    pub fn has_divisibility_chain(&self) -> bool {
        let nz: Vec<&BigInt> = self.diagonal.iter().filter(|d| !d.is_zero()).collect();
        let zeros_trail = self
            .diagonal
            .iter()
            .skip_while(|d| !d.is_zero())
            .all(|d| d.is_zero());
        zeros_trail
            && nz.iter().all(|d| d.is_positive())
            && nz.windows(2).all(|w| (w[1] % w[0]).is_zero())
    }
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(BigInt::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

fn identity_matrix(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

struct Transforms {
    /// Inverse of the accumulated row operations.
    u: Vec<Vec<BigInt>>,
    /// Inverse of the accumulated column operations.
    v: Vec<Vec<BigInt>>,
}

/// Diagonalizes `a` in place; transforms are tracked when requested.
fn diagonalize(a: &mut [Vec<BigInt>], cols: usize, mut tr: Option<&mut Transforms>) -> Vec<BigInt> {
    let rows = a.len();
    let mut diagonal = Vec::with_capacity(rows.min(cols));
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate().skip(t) {
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                diagonal.resize(rows.min(cols), BigInt::zero());
                return diagonal;
            };
            if pi != t {
                a.swap(pi, t);
                if let Some(tr) = tr.as_deref_mut() {
                    for row in tr.u.iter_mut() {
                        row.swap(pi, t);
                    }
                }
            }
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(pj, t);
                }
                if let Some(tr) = tr.as_deref_mut() {
                    tr.v.swap(pj, t);
                }
            }
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &a[t][t];
                let (head, tail) = a.split_at_mut(i);
                let pivot_row = &head[t];
                for (x, p) in tail[0].iter_mut().zip(pivot_row).skip(t) {
                    *x -= &q * p;
                }
                if let Some(tr) = tr.as_deref_mut() {
                    for row in tr.u.iter_mut() {
                        let add = &q * &row[i];
                        row[t] += add;
                    }
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &a[t][t];
                for row in a.iter_mut().skip(t) {
                    let sub = &q * &row[t];
                    row[j] -= sub;
                }
                if let Some(tr) = tr.as_deref_mut() {
                    let (head, tail) = tr.v.split_at_mut(j);
                    for (x, y) in head[t].iter_mut().zip(&tail[0]) {
                        *x += &q * y;
                    }
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            if let Some(i) = bad {
                let (head, tail) = a.split_at_mut(i);
                for (x, y) in head[t].iter_mut().zip(&tail[0]).skip(t) {
                    *x += y;
                }
                if let Some(tr) = tr.as_deref_mut() {
                    for row in tr.u.iter_mut() {
                        let sub = row[t].clone();
                        row[i] -= sub;
                    }
                }
                continue;
            }
            break;
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            if let Some(tr) = tr.as_deref_mut() {
                for row in tr.u.iter_mut() {
                    row[t] = -row[t].clone();
                }
            }
        }
        diagonal.push(a[t][t].clone());
    }
    diagonal
}

/// Smith normal form with recorded unimodular transforms.
pub fn smith_normal_form(a: &[Vec<BigInt>]) -> Snf {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut work = a.to_vec();
    let mut tr = Transforms {
        u: identity_matrix(rows),
        v: identity_matrix(cols),
    };
    let diagonal = diagonalize(&mut work, cols, Some(&mut tr));
    Snf {
        diagonal,
        u: tr.u,
        v: tr.v,
        rows,
        cols,
    }
}

fn row_get(row: &[(usize, i64)], c: usize) -> i64 {
    row.binary_search_by_key(&c, |&(j, _)| j).map_or(0, |p| row[p].1)
}

/// `a - f·b` on sorted sparse rows, or `None` on overflow.
fn row_axpy(a: &[(usize, i64)], f: i64, b: &[(usize, i64)]) -> Option<Vec<(usize, i64)>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        if ca < cb {
            out.push(a[i]);
            i += 1;
        } else {
            let prod = f.checked_mul(b[j].1)?;
            let v = if ca == cb {
                let v = a[i].1.checked_sub(prod)?;
                i += 1;
                v
            } else {
                prod.checked_neg()?
            };
            j += 1;
            if v != 0 {
                out.push((cb, v));
            }
        }
    }
    Some(out)
}

/// Unit-pivot sparse elimination, then dense arbitrary-precision SNF on the residual.
fn sparse_invariant_factors(m: &SparseMatrix) -> (usize, Vec<BigInt>) {
    let mut rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); m.rows];
    for (j, col) in m.columns.iter().enumerate() {
        for &(i, v) in col {
            if v != 0 {
                rows[i].push((j, v));
            }
        }
    }
    // Row lists per column may hold stale or repeated entries; they are pruned on use.
    let mut col_rows: Vec<Vec<usize>> = m
        .columns
        .iter()
        .map(|c| c.iter().filter(|e| e.1 != 0).map(|e| e.0).collect())
        .collect();
    let prune = |rows: &[Vec<(usize, i64)>], list: &mut Vec<usize>, c: usize| {
        list.retain(|&r| row_get(&rows[r], c) != 0);
        list.sort_unstable();
        list.dedup();
    };
    let mut col_alive = vec![true; m.cols];
    let mut rank = 0;
    'outer: loop {
        let mut progress = false;
        for c in 0..m.cols {
            if !col_alive[c] {
                continue;
            }
            let mut list = std::mem::take(&mut col_rows[c]);
            prune(&rows, &mut list, c);
            let best = list
                .iter()
                .copied()
                .filter(|&r| row_get(&rows[r], c).abs() == 1)
                .min_by_key(|&r| (rows[r].len(), r));
            let Some(r) = best else {
                col_rows[c] = list;
                continue;
            };
            let pivot = std::mem::take(&mut rows[r]);
            let sign = row_get(&pivot, c);
            for &r2 in list.iter().filter(|&&x| x != r) {
                let f = row_get(&rows[r2], c) * sign;
                let Some(new_row) = row_axpy(&rows[r2], f, &pivot) else {
                    rows[r] = pivot;
                    col_rows[c] = list;
                    break 'outer;
                };
                for &(c2, _) in &pivot {
                    if c2 != c && row_get(&rows[r2], c2) == 0 && row_get(&new_row, c2) != 0 {
                        col_rows[c2].push(r2);
                    }
                }
                rows[r2] = new_row;
            }
            col_alive[c] = false;
            rank += 1;
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let mut live_cols = Vec::new();
    for c in 0..m.cols {
        if col_alive[c] {
            prune(&rows, &mut col_rows[c], c);
            if !col_rows[c].is_empty() {
                live_cols.push(c);
            }
        }
    }
    let live_rows: Vec<usize> = (0..m.rows).filter(|&r| !rows[r].is_empty()).collect();
    if live_cols.is_empty() {
        return (rank, Vec::new());
    }
    let mut dense: Vec<Vec<BigInt>> = live_rows
        .iter()
        .map(|&r| live_cols.iter().map(|&c| BigInt::from(row_get(&rows[r], c))).collect())
        .collect();
    let d = diagonalize(&mut dense, live_cols.len(), None);
    let mut torsion = Vec::new();
    for x in d {
        if x.is_zero() {
            continue;
        }
        rank += 1;
        if !x.is_one() {
            torsion.push(x);
        }
    }
    (rank, torsion)
}

/// `Z^rank ⊕ Z/t_1 ⊕ … ⊕ Z/t_r`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HomologyGroup {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn free(rank: usize) -> Self {
        HomologyGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn with_torsion(rank: usize, torsion: &[u64]) -> Self {
        HomologyGroup {
            rank,
            torsion: torsion.iter().map(|&t| BigInt::from(t)).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Direct sum, with torsion put back into invariant-factor form.
    pub fn direct_sum(&self, other: &HomologyGroup) -> HomologyGroup {
        let mut diag: Vec<Vec<BigInt>> = Vec::new();
        let all: Vec<&BigInt> = self.torsion.iter().chain(&other.torsion).collect();
        for (i, t) in all.iter().enumerate() {
            let mut row = vec![BigInt::zero(); all.len()];
            row[i] = (*t).clone();
            diag.push(row);
        }
        let n = all.len();
        let torsion = diagonalize(&mut diag, n, None)
            .into_iter()
            .filter(|x| !x.is_one() && !x.is_zero())
            .collect();
        HomologyGroup {
            rank: self.rank + other.rank,
            torsion,
        }
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

struct BigNum<'a>(&'a BigInt);

impl Serialize for BigNum<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl Serialize for HomologyGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("HomologyGroup", 2)?;
        st.serialize_field("rank", &self.rank)?;
        let torsion: Vec<BigNum<'_>> = self.torsion.iter().map(BigNum).collect();
        st.serialize_field("torsion", &torsion)?;
        st.end()
    }
}

/// Free chain complex in degrees `0..=top`; `boundaries[k]: C_k → C_{k-1}`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub ranks: Vec<usize>,
    pub boundaries: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn top(&self) -> usize {
        self.ranks.len() - 1
    }

    /// `∂_k ∘ ∂_{k+1} = 0` for every pair in range.
    pub fn boundary_squared_vanishes(&self) -> bool {
        (1..self.top()).all(|k| {
            self.boundaries[k]
                .mul(&self.boundaries[k + 1])
                .is_some_and(|p| p.is_zero())
        })
    }

    /// `H_0..=H_k_max`; needs `k_max + 1 <= top`.
    pub fn homology_through(&self, k_max: usize) -> Result<Vec<HomologyGroup>> {
        if k_max + 1 > self.top() {
            return Err(Error::BoundViolation(format!(
                "H_{k_max} needs chains through degree {}, have {}",
                k_max + 1,
                self.top()
            )));
        }
        let factors: Vec<(usize, Vec<BigInt>)> = (0..=k_max + 1)
            .map(|k| self.boundaries[k].invariant_factors())
            .collect();
        Ok((0..=k_max)
            .map(|k| HomologyGroup {
                rank: self.ranks[k] - factors[k].0 - factors[k + 1].0,
                torsion: factors[k + 1].1.clone(),
            })
            .collect())
    }

    pub fn homology(&self, k: usize) -> Result<HomologyGroup> {
        if k + 1 > self.top() {
            return Err(Error::BoundViolation(format!("H_{k} needs chains through degree {}", k + 1)));
        }
        let (r_k, _) = self.boundaries[k].invariant_factors();
        let (r_k1, torsion) = self.boundaries[k + 1].invariant_factors();
        Ok(HomologyGroup {
            rank: self.ranks[k] - r_k - r_k1,
            torsion,
        })
    }
}

/// Normalized chains with the basis ↔ simplex correspondence.
#[derive(Clone, Debug)]
pub struct NormalizedChains {
    pub complex: ChainComplex,
    pub basis: Vec<Vec<usize>>,
    pub position: Vec<Vec<Option<usize>>>,
}

/// Normalized chains of `x` in degrees `0..=k+1`.
pub fn normalized_chains(x: &TruncatedSimplicialSet, k: usize) -> Result<NormalizedChains> {
    if k + 1 > x.bound() {
        return Err(Error::BoundViolation(format!(
            "chains through degree {} need simplices through degree {}, truncation is {}",
            k,
            k + 1,
            x.bound()
        )));
    }
    let top = k + 1;
    let basis: Vec<Vec<usize>> = (0..=top).map(|d| x.nondegenerate(d)).collect();
    let position: Vec<Vec<Option<usize>>> = (0..=top)
        .map(|d| {
            let mut p = vec![None; x.count(d)];
            for (i, &s) in basis[d].iter().enumerate() {
                p[s] = Some(i);
            }
            p
        })
        .collect();
    let mut boundaries = vec![SparseMatrix::zero(0, basis[0].len())];
    for d in 1..=top {
        let columns = basis[d]
            .iter()
            .map(|&s| {
                let mut acc: Vec<(usize, i64)> = Vec::new();
                for i in 0..=d {
                    if let Some(row) = position[d - 1][x.face(d, i, s)] {
                        let sign = if i % 2 == 0 { 1 } else { -1 };
                        match acc.iter_mut().find(|e| e.0 == row) {
                            Some(e) => e.1 += sign,
                            None => acc.push((row, sign)),
                        }
                    }
                }
                acc.retain(|e| e.1 != 0);
                acc.sort_unstable();
                acc
            })
            .collect();
        boundaries.push(SparseMatrix {
            rows: basis[d - 1].len(),
            cols: basis[d].len(),
            columns,
        });
    }
    Ok(NormalizedChains {
        complex: ChainComplex {
            ranks: basis.iter().map(Vec::len).collect(),
            boundaries,
        },
        basis,
        position,
    })
}

/// Homology of a simplicial set in degrees `0..=k`.
pub fn simplicial_homology(x: &TruncatedSimplicialSet, k: usize) -> Result<Vec<HomologyGroup>> {
    normalized_chains(x, k)?.complex.homology_through(k)
}

/// Matrices of the chain map induced by `f`, degrees `0..=top`.
pub fn chain_map(f: &SimplicialMap, src: &NormalizedChains, tgt: &NormalizedChains) -> Vec<SparseMatrix> {
    let top = src.complex.top().min(tgt.complex.top());
    (0..=top)
        .map(|d| SparseMatrix {
            rows: tgt.basis[d].len(),
            cols: src.basis[d].len(),
            columns: src.basis[d]
                .iter()
                .map(|&s| match tgt.position[d][f.apply(d, s)] {
                    Some(p) => vec![(p, 1)],
                    None => Vec::new(),
                })
                .collect(),
        })
        .collect()
}

/// Algebraic mapping cone of `f: C → D` in degrees `0..=top`: `Cone_k = D_k ⊕ C_{k-1}`,
/// `∂(d, c) = (∂d + f c, −∂c)`.
pub fn mapping_cone(c: &ChainComplex, d: &ChainComplex, f: &[SparseMatrix], top: usize) -> ChainComplex {
    let c_rank = |k: isize| if k < 0 { 0 } else { c.ranks[k as usize] };
    let ranks: Vec<usize> = (0..=top).map(|k| d.ranks[k] + c_rank(k as isize - 1)).collect();
    let mut boundaries = vec![SparseMatrix::zero(0, ranks[0])];
    for k in 1..=top {
        let d_off = d.ranks[k - 1];
        let mut columns: Vec<Vec<(usize, i64)>> = d.boundaries[k].columns.clone();
        for j in 0..c.ranks[k - 1] {
            let mut col: Vec<(usize, i64)> = f[k - 1].columns[j].clone();
            if k >= 2 {
                col.extend(c.boundaries[k - 1].columns[j].iter().map(|&(i, v)| (d_off + i, -v)));
            }
            columns.push(col);
        }
        boundaries.push(SparseMatrix {
            rows: ranks[k - 1],
            cols: ranks[k],
            columns,
        });
    }
    ChainComplex { ranks, boundaries }
}

/// Necessary-condition certificate that a simplicial map is a weak equivalence:
/// a bijection on components and an acyclic mapping cone through degree `K`.
#[derive(Clone, Debug, Serialize)]
pub struct WeCertificate {
    pub degree_bound: usize,
    pub components_source: usize,
    pub components_target: usize,
    pub pi0_bijective: bool,
    pub source_homology: Vec<HomologyGroup>,
    pub target_homology: Vec<HomologyGroup>,
    pub cone_homology: Vec<HomologyGroup>,
    pub failing_degrees: Vec<usize>,
    pub passed: bool,
}

pub fn we_certificate(
    f: &SimplicialMap,
    x: &TruncatedSimplicialSet,
    y: &TruncatedSimplicialSet,
    k: usize,
) -> Result<WeCertificate> {
    let cx = normalized_chains(x, k)?;
    let cy = normalized_chains(y, k)?;
    let px = pi0(x);
    let py = pi0(y);
    let mut hit = vec![None; py.count];
    let mut injective = true;
    for v in 0..x.count(0) {
        let target = py.label[f.apply(0, v)];
        match hit[target] {
            None => hit[target] = Some(px.label[v]),
            Some(c) if c != px.label[v] => injective = false,
            _ => {}
        }
    }
    let pi0_bijective = injective && hit.iter().all(Option::is_some);
    let fm = chain_map(f, &cx, &cy);
    let cone = mapping_cone(&cx.complex, &cy.complex, &fm, k + 1);
    let cone_homology = cone.homology_through(k)?;
    let failing_degrees: Vec<usize> = cone_homology
        .iter()
        .enumerate()
        .filter(|(_, h)| !h.is_trivial())
        .map(|(d, _)| d)
        .collect();
    Ok(WeCertificate {
        degree_bound: k,
        components_source: px.count,
        components_target: py.count,
        pi0_bijective,
        source_homology: cx.complex.homology_through(k)?,
        target_homology: cy.complex.homology_through(k)?,
        passed: pi0_bijective && failing_degrees.is_empty(),
        cone_homology,
        failing_degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::fincat::{CategoryBuilder, FinMonoid};
    use crate::sset::{classifying_complex, disjoint_union, nerve};

    fn big(a: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
        a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn snf_small_cases() {
        let z = smith_normal_form(&big(&[vec![0, 0], vec![0, 0]]));
        assert!(z.diagonal.iter().all(Zero::is_zero));
        let two = smith_normal_form(&big(&[vec![2]]));
        assert_eq!(two.diagonal, vec![BigInt::from(2)]);
        let a = big(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        assert_eq!(s.reconstruct(), a);
        assert!(s.has_divisibility_chain());
    }

    #[test]
    fn sparse_agrees_with_dense() {
        let a = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let (rank, torsion) = SparseMatrix::from_dense(&a).invariant_factors();
        assert_eq!(rank, 3);
        assert_eq!(torsion, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
    }

    #[test]
    fn point_homology() {
        let p = TruncatedSimplicialSet::point(4);
        let c = normalized_chains(&p, 3).unwrap();
        assert_eq!(c.complex.ranks, vec![1, 0, 0, 0, 0]);
        let h = c.complex.homology_through(3).unwrap();
        assert_eq!(h, vec![HomologyGroup::free(1), HomologyGroup::default(), HomologyGroup::default(), HomologyGroup::default()]);
    }

    #[test]
    fn arrow_chains() {
        let mut b = CategoryBuilder::new();
        let x = b.add_object_with_identity("0");
        let y = b.add_object_with_identity("1");
        b.add_morphism("a", x, y);
        let n = nerve(&b.build().unwrap(), 2, Budget::default()).unwrap();
        let c = normalized_chains(&n, 1).unwrap();
        assert_eq!(c.complex.ranks, vec![2, 1, 0]);
        let col = &c.complex.boundaries[1].columns[0];
        assert_eq!(col.len(), 2);
        assert_eq!(col.iter().map(|e| e.1).sum::<i64>(), 0);
    }

    #[test]
    fn bz2_pattern() {
        let b = classifying_complex(&FinMonoid::cyclic(2), 4, Budget::default()).unwrap();
        let h = simplicial_homology(&b, 3).unwrap();
        let z2 = HomologyGroup::with_torsion(0, &[2]);
        assert_eq!(h, vec![HomologyGroup::free(1), z2.clone(), HomologyGroup::default(), z2]);
    }

    #[test]
    fn chain_truncation_is_enforced() {
        let p = TruncatedSimplicialSet::point(3);
        assert!(matches!(normalized_chains(&p, 3), Err(Error::BoundViolation(_))));
    }

    #[test]
    fn identity_certificate_passes() {
        let b = classifying_complex(&FinMonoid::cyclic(3), 4, Budget::default()).unwrap();
        let cert = we_certificate(&SimplicialMap::identity(&b), &b, &b, 3).unwrap();
        assert!(cert.passed, "{cert:?}");
    }

    #[test]
    fn point_into_two_points_fails_at_pi0() {
        let p = TruncatedSimplicialSet::point(2);
        let two = disjoint_union(&[p.clone(), p.clone()], 2).unwrap();
        let f = SimplicialMap {
            maps: (0..=2).map(|_| vec![0]).collect(),
        };
        f.audit(&p, &two).unwrap();
        let cert = we_certificate(&f, &p, &two, 1).unwrap();
        assert!(!cert.pi0_bijective);
        assert!(!cert.passed);
        assert_eq!(cert.failing_degrees, vec![0]);
    }

    #[test]
    fn direct_sum_normalizes_torsion() {
        let a = HomologyGroup::with_torsion(1, &[2]);
        let b = HomologyGroup::with_torsion(0, &[3]);
        assert_eq!(a.direct_sum(&b), HomologyGroup::with_torsion(1, &[6]));
    }

    #[test]
    fn homology_serializes_flat() {
        let h = HomologyGroup::with_torsion(1, &[2]);
        assert_eq!(serde_json::to_string(&h).unwrap(), r#"{"rank":1,"torsion":[2]}"#);
    }
}
