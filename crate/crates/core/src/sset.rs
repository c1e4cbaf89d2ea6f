//! Truncated simplicial and bisimplicial sets.
//!
//! Simplices carry canonical keys (chains of morphism indices, pairs of indices,
//! ...) and the structure maps are stored as explicit index tables, so every
//! simplicial identity can be audited exhaustively.

use rustc_hash::FxHashMap as HashMap;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fincat::{composable_chains, FinCategory, FinMonoid, RelFunctor};
use crate::util::UnionFind;

pub type SimplexKey = Box<[u32]>;

/// Simplices of degree `0..=bound` with face and degeneracy tables.
#[derive(Clone, Debug)]
pub struct TruncatedSimplicialSet {
    bound: usize,
    keys: Vec<KeyTable>,
    locator: Locator,
    /// `faces[k][i][x]` = `d_i x` for `k >= 1`; `faces[0]` is empty.
    faces: Vec<Vec<Vec<u32>>>,
    /// `degens[k][i][x]` = `s_i x` for `k < bound`.
    degens: Vec<Vec<Vec<u32>>>,
    degenerate: Vec<Vec<bool>>,
}

/// The keys of one degree, all of the same width, stored contiguously.
#[derive(Clone, Debug, Default)]
struct KeyTable {
    width: usize,
    len: usize,
    data: Vec<u32>,
}

impl KeyTable {
    fn new(width: usize) -> Self {
        KeyTable {
            width,
            ..KeyTable::default()
        }
    }

    fn from_keys(keys: Vec<SimplexKey>) -> Self {
        let width = keys.first().map_or(0, |k| k.len());
        let mut t = KeyTable::new(width);
        t.data.reserve(width * keys.len());
        for k in &keys {
            t.push(k);
        }
        t
    }

    fn push(&mut self, key: &[u32]) {
        assert_eq!(key.len(), self.width, "keys of one degree share a width");
        self.data.extend_from_slice(key);
        self.len += 1;
    }

    fn get(&self, i: usize) -> &[u32] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// Key to index lookup.
#[derive(Clone, Debug)]
enum Locator {
    Hashed(Vec<HashMap<SimplexKey, u32>>),
    /// Composable chains in lexicographic order. `children[k][p]` is the first
    /// `k`-chain extending the `(k-1)`-chain `p`; `slot[g]` is the position of `g`
    /// among the morphisms out of its source.
    Chains {
        objects: u32,
        source: Vec<u32>,
        target: Vec<u32>,
        slot: Vec<u32>,
        children: Vec<Vec<u32>>,
    },
    /// Pairs `[i, j]` in lexicographic order; `rows[k][i]..rows[k][i + 1]` start with `i`
    /// and `rank[k][j]` is the offset of `j` inside any row containing it.
    Pairs { rows: Vec<Vec<u32>>, rank: Vec<Vec<u32>> },
}

impl Locator {
    fn hashed(keys: &[KeyTable]) -> Self {
        Locator::Hashed(
            keys.iter()
                .map(|ks| ks.iter().enumerate().map(|(i, k)| (SimplexKey::from(k), i as u32)).collect())
                .collect(),
        )
    }

    fn find(&self, keys: &[KeyTable], k: usize, key: &[u32]) -> Option<usize> {
        match self {
            Locator::Hashed(index) => index[k].get(key).map(|&i| i as usize),
            Locator::Chains {
                objects,
                source,
                target,
                slot,
                children,
            } => {
                if k == 0 {
                    return (key.len() == 1 && key[0] < *objects).then(|| key[0] as usize);
                }
                if key.len() != k || key.iter().any(|&f| f as usize >= source.len()) {
                    return None;
                }
                let mut idx = key[0];
                for j in 1..k {
                    let (prev, g) = (key[j - 1] as usize, key[j] as usize);
                    if source[g] != target[prev] {
                        return None;
                    }
                    idx = children[j + 1][idx as usize] + slot[g];
                }
                Some(idx as usize)
            }
            Locator::Pairs { rows, rank } => {
                let (rows, rank) = (&rows[k], &rank[k]);
                if key.len() != 2 || key[0] as usize + 1 >= rows.len() || key[1] as usize >= rank.len() {
                    return None;
                }
                let (i, j) = (key[0] as usize, key[1]);
                let p = (rows[i] + rank[j as usize]) as usize;
                (p < rows[i + 1] as usize && keys[k].data[2 * p + 1] == j).then_some(p)
            }
        }
    }
}

/// Writes a key into the buffer, which arrives empty.
pub trait KeyFn: Fn(usize, usize, &[u32], &mut Vec<u32>) {}
impl<F: Fn(usize, usize, &[u32], &mut Vec<u32>)> KeyFn for F {}

fn table(
    keys: &[KeyTable],
    locator: &Locator,
    (k, to, i): (usize, usize, usize),
    f: &impl KeyFn,
    what: &str,
) -> Result<Vec<u32>> {
    let mut buf = Vec::with_capacity(k + 2);
    keys[k]
        .iter()
        .map(|x| {
            buf.clear();
            f(k, i, x, &mut buf);
            locator.find(keys, to, &buf).map(|y| y as u32).ok_or_else(|| {
                Error::MissingSimplex(format!("{what} lands on unknown {to}-simplex {buf:?}"))
            })
        })
        .collect()
}

fn key(v: impl IntoIterator<Item = u32>) -> SimplexKey {
    v.into_iter().collect::<Vec<_>>().into_boxed_slice()
}

impl TruncatedSimplicialSet {
    /// Builds the tables by looking up the keys written by `face` and `degen`.
    pub fn from_keys(bound: usize, keys: Vec<Vec<SimplexKey>>, face: impl KeyFn, degen: impl KeyFn) -> Result<Self> {
        let keys: Vec<KeyTable> = keys.into_iter().map(KeyTable::from_keys).collect();
        let locator = Locator::hashed(&keys);
        Self::located(bound, keys, locator, face, degen)
    }

    fn located(
        bound: usize,
        keys: Vec<KeyTable>,
        locator: Locator,
        face: impl KeyFn,
        degen: impl KeyFn,
    ) -> Result<Self> {
        assert_eq!(keys.len(), bound + 1, "one key list per degree");
        let mut faces = vec![Vec::new()];
        for k in 1..=bound {
            faces.push(
                (0..=k)
                    .map(|i| table(&keys, &locator, (k, k - 1, i), &face, "face"))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Self::with_faces(bound, keys, locator, faces, degen)
    }

    /// Like [`Self::located`] with the face tables already known.
    fn with_faces(
        bound: usize,
        keys: Vec<KeyTable>,
        locator: Locator,
        faces: Vec<Vec<Vec<u32>>>,
        degen: impl KeyFn,
    ) -> Result<Self> {
        let mut degens = Vec::with_capacity(bound);
        for k in 0..bound {
            degens.push(
                (0..=k)
                    .map(|i| table(&keys, &locator, (k, k + 1, i), &degen, "degeneracy"))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self::assemble(bound, keys, locator, faces, degens))
    }

    /// Builds from explicit tables; keys must be unique per degree.
    pub fn from_tables(
        bound: usize,
        keys: Vec<Vec<SimplexKey>>,
        faces: Vec<Vec<Vec<u32>>>,
        degens: Vec<Vec<Vec<u32>>>,
    ) -> Self {
        let keys: Vec<KeyTable> = keys.into_iter().map(KeyTable::from_keys).collect();
        let locator = Locator::hashed(&keys);
        Self::assemble(bound, keys, locator, faces, degens)
    }

    fn assemble(
        bound: usize,
        keys: Vec<KeyTable>,
        locator: Locator,
        faces: Vec<Vec<Vec<u32>>>,
        degens: Vec<Vec<Vec<u32>>>,
    ) -> Self {
        let mut degenerate: Vec<Vec<bool>> = keys.iter().map(|ks| vec![false; ks.len]).collect();
        for k in 0..bound {
            for col in &degens[k] {
                for &y in col {
                    degenerate[k + 1][y as usize] = true;
                }
            }
        }
        TruncatedSimplicialSet {
            bound,
            keys,
            locator,
            faces,
            degens,
            degenerate,
        }
    }

    pub fn empty(bound: usize) -> Self {
        let faces = (0..=bound)
            .map(|k| if k == 0 { Vec::new() } else { vec![Vec::new(); k + 1] })
            .collect();
        let degens = (0..bound).map(|k| vec![Vec::new(); k + 1]).collect();
        Self::from_tables(bound, vec![Vec::new(); bound + 1], faces, degens)
    }

    /// The point `Δ^0`, truncated.
    pub fn point(bound: usize) -> Self {
        nerve(&FinCategory::terminal(), bound, Budget::default()).expect("point")
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn count(&self, k: usize) -> usize {
        self.keys[k].len
    }

    pub fn counts(&self) -> Vec<usize> {
        self.keys.iter().map(|t| t.len).collect()
    }

    pub fn total(&self) -> usize {
        self.keys.iter().map(|t| t.len).sum()
    }

    pub fn keys(&self, k: usize) -> impl Iterator<Item = &[u32]> + '_ {
        self.keys[k].iter()
    }

    pub fn key_of(&self, k: usize, x: usize) -> &[u32] {
        self.keys[k].get(x)
    }

    pub fn find(&self, k: usize, key: &[u32]) -> Option<usize> {
        self.locator.find(&self.keys, k, key)
    }

    pub fn face(&self, k: usize, i: usize, x: usize) -> usize {
        self.faces[k][i][x] as usize
    }

    pub fn degeneracy(&self, k: usize, i: usize, x: usize) -> usize {
        self.degens[k][i][x] as usize
    }

    pub fn is_degenerate(&self, k: usize, x: usize) -> bool {
        self.degenerate[k][x]
    }

    pub fn nondegenerate(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&x| !self.degenerate[k][x]).collect()
    }

    pub fn nondegenerate_counts(&self) -> Vec<usize> {
        (0..=self.bound).map(|k| self.nondegenerate(k).len()).collect()
    }

    /// Exhaustive check of the simplicial identities within the truncation.
    pub fn audit(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::MissingSimplex(format!("simplicial identity fails: {msg}")));
        // d_i d_j = d_{j-1} d_i for i < j
        for k in 2..=self.bound {
            for x in 0..self.count(k) {
                for j in 1..=k {
                    for i in 0..j {
                        let lhs = self.face(k - 1, i, self.face(k, j, x));
                        let rhs = self.face(k - 1, j - 1, self.face(k, i, x));
                        if lhs != rhs {
                            return fail(format!("d{i} d{j} on {k}-simplex {x}"));
                        }
                    }
                }
            }
        }
        // s_i s_j = s_{j+1} s_i for i <= j
        for k in 0..self.bound.saturating_sub(1) {
            for x in 0..self.count(k) {
                for j in 0..=k {
                    for i in 0..=j {
                        let lhs = self.degeneracy(k + 1, i, self.degeneracy(k, j, x));
                        let rhs = self.degeneracy(k + 1, j + 1, self.degeneracy(k, i, x));
                        if lhs != rhs {
                            return fail(format!("s{i} s{j} on {k}-simplex {x}"));
                        }
                    }
                }
            }
        }
        // mixed identities
        for k in 0..self.bound {
            for x in 0..self.count(k) {
                for j in 0..=k {
                    let sx = self.degeneracy(k, j, x);
                    for i in 0..=k + 1 {
                        let lhs = self.face(k + 1, i, sx);
                        let rhs = if i < j {
                            self.degeneracy(k - 1, j - 1, self.face(k, i, x))
                        } else if i == j || i == j + 1 {
                            x
                        } else {
                            self.degeneracy(k - 1, j, self.face(k, i - 1, x))
                        };
                        if lhs != rhs {
                            return fail(format!("d{i} s{j} on {k}-simplex {x}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Removes a nondegenerate simplex together with every simplex having it as an
    /// iterated face. Returns the new set and the old→new index map per degree.
    pub fn without_simplex(&self, k: usize, x: usize) -> Result<(Self, Vec<Vec<Option<u32>>>)> {
        if self.is_degenerate(k, x) {
            return Err(Error::BoundViolation("only nondegenerate simplices can be removed".into()));
        }
        let mut removed: Vec<Vec<bool>> = self.keys.iter().map(|ks| vec![false; ks.len]).collect();
        removed[k][x] = true;
        for d in k + 1..=self.bound {
            for y in 0..self.count(d) {
                removed[d][y] = (0..=d).any(|i| removed[d - 1][self.face(d, i, y)]);
            }
        }
        let remap: Vec<Vec<Option<u32>>> = removed
            .iter()
            .map(|r| {
                let mut next = 0u32;
                r.iter()
                    .map(|&gone| {
                        if gone {
                            None
                        } else {
                            next += 1;
                            Some(next - 1)
                        }
                    })
                    .collect()
            })
            .collect();
        let keys: Vec<Vec<SimplexKey>> = (0..=self.bound)
            .map(|d| {
                (0..self.count(d))
                    .filter(|&y| !removed[d][y])
                    .map(|y| SimplexKey::from(self.keys[d].get(y)))
                    .collect()
            })
            .collect();
        let faces = (0..=self.bound)
            .map(|d| {
                if d == 0 {
                    return Vec::new();
                }
                (0..=d)
                    .map(|i| {
                        (0..self.count(d))
                            .filter(|&y| !removed[d][y])
                            .map(|y| remap[d - 1][self.face(d, i, y)].expect("faces survive"))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let degens = (0..self.bound)
            .map(|d| {
                (0..=d)
                    .map(|i| {
                        (0..self.count(d))
                            .filter(|&y| !removed[d][y])
                            .map(|y| remap[d + 1][self.degeneracy(d, i, y)].expect("degeneracies survive"))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok((Self::from_tables(self.bound, keys, faces, degens), remap))
    }
}

/// A degreewise map of simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMap {
    pub maps: Vec<Vec<u32>>,
}

impl SimplicialMap {
    pub fn identity(x: &TruncatedSimplicialSet) -> Self {
        SimplicialMap {
            maps: (0..=x.bound).map(|k| (0..x.count(k) as u32).collect()).collect(),
        }
    }

    /// Builds a map by sending keys of `src` to keys of `tgt`.
    pub fn from_key_fn(
        src: &TruncatedSimplicialSet,
        tgt: &TruncatedSimplicialSet,
        f: impl Fn(usize, &[u32], &mut Vec<u32>),
    ) -> Result<Self> {
        if src.bound != tgt.bound {
            return Err(Error::BoundMismatch(src.bound, tgt.bound));
        }
        let mut maps = Vec::with_capacity(src.bound + 1);
        let mut buf = Vec::new();
        for k in 0..=src.bound {
            let m = src.keys[k]
                .iter()
                .map(|x| {
                    buf.clear();
                    f(k, x, &mut buf);
                    tgt.find(k, &buf)
                        .map(|i| i as u32)
                        .ok_or_else(|| Error::MissingSimplex(format!("image {buf:?} of {k}-simplex {x:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            maps.push(m);
        }
        Ok(SimplicialMap { maps })
    }

    pub fn apply(&self, k: usize, x: usize) -> usize {
        self.maps[k][x] as usize
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialMap) -> SimplicialMap {
        SimplicialMap {
            maps: self
                .maps
                .iter()
                .zip(&other.maps)
                .map(|(a, b)| a.iter().map(|&x| b[x as usize]).collect())
                .collect(),
        }
    }

    /// Checks that the map commutes with every face and degeneracy.
    pub fn audit(&self, src: &TruncatedSimplicialSet, tgt: &TruncatedSimplicialSet) -> Result<()> {
        if self.maps.len() != src.bound + 1 || src.bound != tgt.bound {
            return Err(Error::BoundMismatch(src.bound, tgt.bound));
        }
        for k in 0..=src.bound {
            if self.maps[k].len() != src.count(k) {
                return Err(Error::MissingSimplex(format!("map is not total in degree {k}")));
            }
            for x in 0..src.count(k) {
                let fx = self.apply(k, x);
                if k > 0 {
                    for i in 0..=k {
                        if self.apply(k - 1, src.face(k, i, x)) != tgt.face(k, i, fx) {
                            return Err(Error::MissingSimplex(format!(
                                "map does not commute with d{i} on {k}-simplex {x}"
                            )));
                        }
                    }
                }
                if k < src.bound {
                    for i in 0..=k {
                        if self.apply(k + 1, src.degeneracy(k, i, x)) != tgt.degeneracy(k, i, fx) {
                            return Err(Error::MissingSimplex(format!(
                                "map does not commute with s{i} on {k}-simplex {x}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Nerve of a finite category: `k`-simplices are composable `k`-chains.
pub fn nerve(c: &FinCategory, bound: usize, budget: Budget) -> Result<TruncatedSimplicialSet> {
    let mut keys: Vec<KeyTable> = Vec::with_capacity(bound + 1);
    let mut used = 0;
    for k in 0..=bound {
        let level = match k {
            0 => KeyTable::from_keys((0..c.num_objects()).map(|x| key([x as u32])).collect()),
            1 => KeyTable::from_keys((0..c.num_morphisms()).map(|f| key([f as u32])).collect()),
            _ => {
                let prev = &keys[k - 1];
                let mut level = KeyTable::new(k);
                for ch in prev.iter() {
                    for &g in c.out_of(c.target(ch[k - 2] as usize)) {
                        level.data.extend_from_slice(ch);
                        level.data.push(g as u32);
                        level.len += 1;
                    }
                    budget.check(used + level.len, || format!("enumerating {k}-simplices of a nerve"))?;
                }
                level
            }
        };
        used += level.len;
        budget.check(used, || format!("enumerating {k}-simplices of a nerve"))?;
        keys.push(level);
    }
    let mut slot = vec![0u32; c.num_morphisms()];
    for x in 0..c.num_objects() {
        for (p, &g) in c.out_of(x).iter().enumerate() {
            slot[g] = p as u32;
        }
    }
    let mut children = vec![Vec::new(); bound + 1];
    for k in 2..=bound {
        let mut next = 0u32;
        children[k] = keys[k - 1]
            .iter()
            .map(|ch| {
                let first = next;
                next += c.out_of(c.target(ch[k - 2] as usize)).len() as u32;
                first
            })
            .collect();
        debug_assert_eq!(next as usize, keys[k].len);
    }
    // The faces of a chain `(p, g)` come from the faces of its prefix `p`.
    let extend = |k: usize, q: u32, g: usize| -> u32 {
        if k == 2 {
            g as u32
        } else {
            children[k - 1][q as usize] + slot[g]
        }
    };
    let mut faces: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    if bound >= 1 {
        let nm = c.num_morphisms();
        faces.push(vec![
            (0..nm).map(|f| c.target(f) as u32).collect(),
            (0..nm).map(|f| c.source(f) as u32).collect(),
        ]);
    }
    for k in 2..=bound {
        let mut per_i: Vec<Vec<u32>> = (0..=k).map(|_| Vec::with_capacity(keys[k].len)).collect();
        for (p, ch) in keys[k - 1].iter().enumerate() {
            let last = ch[k - 2] as usize;
            for &g in c.out_of(c.target(last)) {
                for i in 0..k - 1 {
                    per_i[i].push(extend(k, faces[k - 1][i][p], g));
                }
                per_i[k - 1].push(extend(k, faces[k - 1][k - 1][p], c.comp(g, last)));
                per_i[k].push(p as u32);
            }
        }
        faces.push(per_i);
    }
    let vertex = |ch: &[u32], i: usize| -> u32 {
        if i == 0 {
            c.source(ch[0] as usize) as u32
        } else {
            c.target(ch[i - 1] as usize) as u32
        }
    };
    let locator = Locator::Chains {
        objects: c.num_objects() as u32,
        source: (0..c.num_morphisms()).map(|f| c.source(f) as u32).collect(),
        target: (0..c.num_morphisms()).map(|f| c.target(f) as u32).collect(),
        slot,
        children,
    };
    TruncatedSimplicialSet::with_faces(bound, keys, locator, faces, |k, i, ch, out| {
        if k == 0 {
            out.push(c.identity(ch[0] as usize) as u32);
            return;
        }
        out.extend_from_slice(&ch[..i]);
        out.push(c.identity(vertex(ch, i) as usize) as u32);
        out.extend_from_slice(&ch[i..]);
    })
}

/// The simplicial map `nerve(F)` induced by a functor.
pub fn nerve_map(
    functor: &RelFunctor,
    src: &TruncatedSimplicialSet,
    tgt: &TruncatedSimplicialSet,
) -> Result<SimplicialMap> {
    SimplicialMap::from_key_fn(src, tgt, |k, ch, out| {
        if k == 0 {
            out.push(functor.obj(ch[0] as usize) as u32);
        } else {
            out.extend(ch.iter().map(|&f| functor.mor(f as usize) as u32));
        }
    })
}

/// Classifying complex of a finite monoid: the nerve of its one-object category.
pub fn classifying_complex(monoid: &FinMonoid, bound: usize, budget: Budget) -> Result<TruncatedSimplicialSet> {
    nerve(&FinCategory::from_monoid(monoid, "*"), bound, budget)
}

/// Degreewise disjoint union; keys are `[component, index]`.
pub fn disjoint_union(parts: &[TruncatedSimplicialSet], bound: usize) -> Result<TruncatedSimplicialSet> {
    for p in parts {
        if p.bound != bound {
            return Err(Error::BoundMismatch(p.bound, bound));
        }
    }
    let mut offsets: Vec<Vec<u32>> = Vec::with_capacity(parts.len());
    let mut acc = vec![0u32; bound + 1];
    for p in parts {
        offsets.push(acc.clone());
        for (k, a) in acc.iter_mut().enumerate() {
            *a += p.count(k) as u32;
        }
    }
    let keys = (0..=bound)
        .map(|k| {
            parts
                .iter()
                .enumerate()
                .flat_map(|(c, p)| (0..p.count(k)).map(move |x| key([c as u32, x as u32])))
                .collect()
        })
        .collect();
    let faces = (0..=bound)
        .map(|k| {
            if k == 0 {
                return Vec::new();
            }
            (0..=k)
                .map(|i| {
                    parts
                        .iter()
                        .enumerate()
                        .flat_map(|(c, p)| {
                            let off = offsets[c][k - 1];
                            (0..p.count(k)).map(move |x| off + p.face(k, i, x) as u32)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let degens = (0..bound)
        .map(|k| {
            (0..=k)
                .map(|i| {
                    parts
                        .iter()
                        .enumerate()
                        .flat_map(|(c, p)| {
                            let off = offsets[c][k + 1];
                            (0..p.count(k)).map(move |x| off + p.degeneracy(k, i, x) as u32)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(TruncatedSimplicialSet::from_tables(bound, keys, faces, degens))
}

/// Strict pullback `X ×_Z Y`, with its two projections. Keys are `[x, y]`.
pub fn fiber_product(
    x: &TruncatedSimplicialSet,
    f: &SimplicialMap,
    y: &TruncatedSimplicialSet,
    g: &SimplicialMap,
    budget: Budget,
) -> Result<(TruncatedSimplicialSet, SimplicialMap, SimplicialMap)> {
    if x.bound != y.bound {
        return Err(Error::BoundMismatch(x.bound, y.bound));
    }
    let bound = x.bound;
    let mut keys = Vec::with_capacity(bound + 1);
    let mut rows = Vec::with_capacity(bound + 1);
    let mut rank = Vec::with_capacity(bound + 1);
    let mut used = 0;
    for k in 0..=bound {
        let mut over: HashMap<u32, Vec<u32>> = HashMap::default();
        let mut ranks = Vec::with_capacity(y.count(k));
        for j in 0..y.count(k) {
            let row = over.entry(g.maps[k][j]).or_default();
            ranks.push(row.len() as u32);
            row.push(j as u32);
        }
        let mut level = KeyTable::new(2);
        let mut row = Vec::with_capacity(x.count(k) + 1);
        for i in 0..x.count(k) {
            row.push(level.len as u32);
            if let Some(js) = over.get(&f.maps[k][i]) {
                for &j in js {
                    level.push(&[i as u32, j]);
                }
            }
            used += level.len - *row.last().expect("pushed") as usize;
            budget.check(used, || "enumerating a fiber product".into())?;
        }
        row.push(level.len as u32);
        keys.push(level);
        rows.push(row);
        rank.push(ranks);
    }
    let p = TruncatedSimplicialSet::located(
        bound,
        keys,
        Locator::Pairs { rows, rank },
        |k, i, s, out| out.extend([x.face(k, i, s[0] as usize) as u32, y.face(k, i, s[1] as usize) as u32]),
        |k, i, s, out| out.extend([x.degeneracy(k, i, s[0] as usize) as u32, y.degeneracy(k, i, s[1] as usize) as u32]),
    )?;
    let p1 = SimplicialMap {
        maps: (0..=bound).map(|k| p.keys[k].iter().map(|s| s[0]).collect()).collect(),
    };
    let p2 = SimplicialMap {
        maps: (0..=bound).map(|k| p.keys[k].iter().map(|s| s[1]).collect()).collect(),
    };
    Ok((p, p1, p2))
}

/// Connected components: the coequalizer of `d_0, d_1` on vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    /// Component label of each vertex, labels ordered by least vertex.
    pub label: Vec<usize>,
    pub count: usize,
}

pub fn pi0(x: &TruncatedSimplicialSet) -> Components {
    let mut uf = UnionFind::new(x.count(0));
    if x.bound >= 1 {
        for e in 0..x.count(1) {
            uf.union(x.face(1, 0, e), x.face(1, 1, e));
        }
    }
    let classes = uf.classes();
    let mut label = vec![0; x.count(0)];
    for (c, members) in classes.iter().enumerate() {
        for &v in members {
            label[v] = c;
        }
    }
    Components {
        label,
        count: classes.len(),
    }
}

/// A functor `D → sSet` on a finite index category: one set per object, one map per morphism.
#[derive(Clone, Debug)]
pub struct SimplicialDiagram<'a> {
    pub index: &'a FinCategory,
    pub values: Vec<&'a TruncatedSimplicialSet>,
    pub maps: Vec<&'a SimplicialMap>,
    /// Inner truncation bound shared by every value.
    pub bound: usize,
}

impl SimplicialDiagram<'_> {
    fn bound(&self) -> Result<usize> {
        for v in &self.values {
            if v.bound != self.bound {
                return Err(Error::BoundMismatch(v.bound, self.bound));
            }
        }
        Ok(self.bound)
    }

    /// Identities go to identities and composites to composites, degreewise.
    pub fn check_functorial(&self) -> Result<()> {
        let d = self.index;
        if self.values.len() != d.num_objects() || self.maps.len() != d.num_morphisms() {
            return Err(Error::NonFunctorial("diagram does not cover the index category".into()));
        }
        for x in 0..d.num_objects() {
            if *self.maps[d.identity(x)] != SimplicialMap::identity(self.values[x]) {
                return Err(Error::NonFunctorial(format!("identity of {} is not sent to identity", d.object_name(x))));
            }
        }
        for (&(g, f), &h) in d.composition_table() {
            if self.maps[f].then(self.maps[g]) != *self.maps[h] {
                return Err(Error::NonFunctorial(format!(
                    "{} . {} is not sent to the composite map",
                    d.name(g),
                    d.name(f)
                )));
            }
        }
        Ok(())
    }
}

/// Bousfield–Kan homotopy colimit: the diagonal of the simplicial replacement.
///
/// An `m`-simplex is a chain `α0 → … → αm` in the index category together with
/// an `m`-simplex of the value at `α0`; keys are `[α0, θ1, …, θm, σ]`. `d_0`
/// pushes `σ` forward along the first arrow.
pub fn bousfield_kan_hocolim(diagram: &SimplicialDiagram<'_>, budget: Budget) -> Result<TruncatedSimplicialSet> {
    diagram.check_functorial()?;
    let bound = diagram.bound()?;
    let d = diagram.index;
    let mut keys = Vec::with_capacity(bound + 1);
    let mut used = 0;
    for m in 0..=bound {
        let mut level = Vec::new();
        for chain in composable_chains(d, m) {
            let start = if m == 0 { chain[0] } else { d.source(chain[0]) };
            let x = diagram.values[start];
            for s in 0..x.count(m) {
                let mut k = Vec::with_capacity(m + 2);
                k.push(start as u32);
                if m > 0 {
                    k.extend(chain.iter().map(|&f| f as u32));
                }
                k.push(s as u32);
                level.push(k.into_boxed_slice());
            }
        }
        used += level.len();
        budget.check(used, || format!("enumerating {m}-simplices of a homotopy colimit"))?;
        keys.push(level);
    }
    TruncatedSimplicialSet::from_keys(
        bound,
        keys,
        |m, i, k, out| {
            let start = k[0] as usize;
            let chain = &k[1..m + 1];
            let s = k[m + 1] as usize;
            let x = diagram.values[start];
            if i == 0 {
                let theta = chain[0] as usize;
                let pushed = diagram.maps[theta].apply(m - 1, x.face(m, 0, s));
                out.push(d.target(theta) as u32);
                out.extend_from_slice(&chain[1..]);
                out.push(pushed as u32);
            } else if i == m {
                out.push(start as u32);
                out.extend_from_slice(&chain[..m - 1]);
                out.push(x.face(m, m, s) as u32);
            } else {
                out.push(start as u32);
                out.extend_from_slice(&chain[..i - 1]);
                out.push(d.comp(chain[i] as usize, chain[i - 1] as usize) as u32);
                out.extend_from_slice(&chain[i + 1..]);
                out.push(x.face(m, i, s) as u32);
            }
        },
        |m, i, k, out| {
            let start = k[0] as usize;
            let chain = &k[1..m + 1];
            let s = k[m + 1] as usize;
            let x = diagram.values[start];
            let vertex = if i == 0 { start } else { d.target(chain[i - 1] as usize) };
            out.push(start as u32);
            out.extend_from_slice(&chain[..i]);
            out.push(d.identity(vertex) as u32);
            out.extend_from_slice(&chain[i..]);
            out.push(x.degeneracy(m, i, s) as u32);
        },
    )
}

/// Splits a homotopy-colimit key into `(α0, chain, σ)`.
pub fn hocolim_key_parts(m: usize, k: &[u32]) -> (usize, &[u32], usize) {
    (k[0] as usize, &k[1..m + 1], k[m + 1] as usize)
}

/// The canonical map from the homotopy colimit to the target of a strict cocone.
pub fn map_to_cocone(
    hocolim: &TruncatedSimplicialSet,
    target: &TruncatedSimplicialSet,
    legs: &[&SimplicialMap],
) -> Result<SimplicialMap> {
    if hocolim.bound != target.bound {
        return Err(Error::BoundMismatch(hocolim.bound, target.bound));
    }
    let maps = (0..=hocolim.bound)
        .map(|m| {
            hocolim.keys[m]
                .iter()
                .map(|k| {
                    let (start, _, s) = hocolim_key_parts(m, k);
                    legs[start].maps[m][s]
                })
                .collect()
        })
        .collect();
    let f = SimplicialMap { maps };
    f.audit(hocolim, target)
        .map_err(|e| e.context("legs do not form a strict cocone"))?;
    Ok(f)
}

/// Levels `W_0..W_N` of a truncated simplicial space with outer structure maps.
#[derive(Clone, Debug)]
pub struct TruncatedBisimplicialSet {
    pub levels: Vec<TruncatedSimplicialSet>,
    /// `outer_faces[n][i]: W_n → W_{n-1}` for `n >= 1`.
    pub outer_faces: Vec<Vec<SimplicialMap>>,
    /// `outer_degens[n][i]: W_n → W_{n+1}` for `n < N`.
    pub outer_degens: Vec<Vec<SimplicialMap>>,
}

impl TruncatedBisimplicialSet {
    pub fn outer_bound(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn inner_bound(&self) -> usize {
        self.levels[0].bound()
    }

    pub fn outer_face(&self, n: usize, i: usize) -> &SimplicialMap {
        &self.outer_faces[n][i]
    }

    /// Outer simplicial identities as equalities of maps, plus inner audits of every level.
    pub fn audit(&self) -> Result<()> {
        for l in &self.levels {
            l.audit()?;
        }
        let n_max = self.outer_bound();
        for n in 1..=n_max {
            for (i, f) in self.outer_faces[n].iter().enumerate() {
                f.audit(&self.levels[n], &self.levels[n - 1])
                    .map_err(|e| e.context(format!("outer d{i} at level {n}")))?;
            }
        }
        for n in 0..n_max {
            for (i, s) in self.outer_degens[n].iter().enumerate() {
                s.audit(&self.levels[n], &self.levels[n + 1])
                    .map_err(|e| e.context(format!("outer s{i} at level {n}")))?;
            }
        }
        let bad = |what: String| Err(Error::MissingSimplex(format!("outer identity fails: {what}")));
        for n in 2..=n_max {
            for j in 1..=n {
                for i in 0..j {
                    let lhs = self.outer_faces[n][j].then(&self.outer_faces[n - 1][i]);
                    let rhs = self.outer_faces[n][i].then(&self.outer_faces[n - 1][j - 1]);
                    if lhs != rhs {
                        return bad(format!("d{i} d{j} at level {n}"));
                    }
                }
            }
        }
        for n in 0..n_max {
            for j in 0..=n {
                let s = &self.outer_degens[n][j];
                for i in 0..=n + 1 {
                    let lhs = s.then(&self.outer_faces[n + 1][i]);
                    let rhs = if i < j {
                        self.outer_faces[n][i].then(&self.outer_degens[n - 1][j - 1])
                    } else if i == j || i == j + 1 {
                        SimplicialMap::identity(&self.levels[n])
                    } else {
                        self.outer_faces[n][i - 1].then(&self.outer_degens[n - 1][j])
                    };
                    if lhs != rhs {
                        return bad(format!("d{i} s{j} at level {n}"));
                    }
                }
            }
        }
        for n in 0..n_max.saturating_sub(1) {
            for j in 0..=n {
                for i in 0..=j {
                    let lhs = self.outer_degens[n][j].then(&self.outer_degens[n + 1][i]);
                    let rhs = self.outer_degens[n][i].then(&self.outer_degens[n + 1][j + 1]);
                    if lhs != rhs {
                        return bad(format!("s{i} s{j} at level {n}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Deletes a nondegenerate simplex from level `n`, truncating the outer direction at `n`.
    /// Outer degeneracies into level `n` are dropped since they may hit the deleted simplex.
    pub fn with_simplex_removed(&self, n: usize, k: usize, x: usize) -> Result<Self> {
        let (level, remap) = self.levels[n].without_simplex(k, x)?;
        let mut levels: Vec<TruncatedSimplicialSet> = self.levels[..n].to_vec();
        levels.push(level);
        let mut outer_faces = self.outer_faces[..n].to_vec();
        if n >= 1 {
            let reindexed = self.outer_faces[n]
                .iter()
                .map(|f| SimplicialMap {
                    maps: f
                        .maps
                        .iter()
                        .enumerate()
                        .map(|(d, m)| {
                            m.iter()
                                .enumerate()
                                .filter(|(y, _)| remap[d][*y].is_some())
                                .map(|(_, &t)| t)
                                .collect()
                        })
                        .collect(),
                })
                .collect();
            outer_faces.push(reindexed);
        } else {
            outer_faces.push(Vec::new());
        }
        let mut outer_degens = self.outer_degens[..n.saturating_sub(1)].to_vec();
        if n >= 1 {
            outer_degens.push(Vec::new());
        }
        Ok(TruncatedBisimplicialSet {
            levels,
            outer_faces,
            outer_degens,
        })
    }
}

/// A map of truncated bisimplicial sets, one simplicial map per outer level.
pub type BisimplicialMap = Vec<SimplicialMap>;

/// Outer-levelwise Bousfield–Kan homotopy colimit of a diagram of bisimplicial sets,
/// every value truncated at `(n_max, inner)`.
pub fn hocolim_bisimplicial(
    index: &FinCategory,
    values: &[&TruncatedBisimplicialSet],
    maps: &[&BisimplicialMap],
    (n_max, inner): (usize, usize),
    budget: Budget,
) -> Result<TruncatedBisimplicialSet> {
    for v in values {
        if v.outer_bound() != n_max {
            return Err(Error::BoundMismatch(v.outer_bound(), n_max));
        }
    }
    let mut levels = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let diagram = SimplicialDiagram {
            index,
            values: values.iter().map(|v| &v.levels[n]).collect(),
            maps: maps.iter().map(|m| &m[n]).collect(),
            bound: inner,
        };
        levels.push(bousfield_kan_hocolim(&diagram, budget)?);
    }
    fn induced<'a>(
        src: &TruncatedSimplicialSet,
        tgt: &TruncatedSimplicialSet,
        per_object: impl Fn(usize) -> &'a SimplicialMap,
    ) -> Result<SimplicialMap> {
        SimplicialMap::from_key_fn(src, tgt, |m, k, out| {
            let (start, _, s) = hocolim_key_parts(m, k);
            out.extend_from_slice(k);
            out[m + 1] = per_object(start).maps[m][s];
        })
    }
    let mut outer_faces = vec![Vec::new()];
    for n in 1..=n_max {
        let mut per_i = Vec::with_capacity(n + 1);
        for i in 0..=n {
            per_i.push(induced(&levels[n], &levels[n - 1], |a| values[a].outer_face(n, i))?);
        }
        outer_faces.push(per_i);
    }
    let mut outer_degens = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let mut per_i = Vec::with_capacity(n + 1);
        for i in 0..=n {
            per_i.push(induced(&levels[n], &levels[n + 1], |a| &values[a].outer_degens[n][i])?);
        }
        outer_degens.push(per_i);
    }
    Ok(TruncatedBisimplicialSet {
        levels,
        outer_faces,
        outer_degens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{CategoryBuilder, FinMonoid};

    fn arrow() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let x = b.add_object_with_identity("0");
        let y = b.add_object_with_identity("1");
        b.add_morphism("a", x, y);
        b.build().unwrap()
    }

    #[test]
    fn nerve_of_point() {
        let p = TruncatedSimplicialSet::point(3);
        assert_eq!(p.counts(), vec![1, 1, 1, 1]);
        assert_eq!(p.nondegenerate_counts(), vec![1, 0, 0, 0]);
        p.audit().unwrap();
    }

    #[test]
    fn nerve_of_arrow() {
        let n = nerve(&arrow(), 3, Budget::default()).unwrap();
        assert_eq!(n.nondegenerate_counts(), vec![2, 1, 0, 0]);
        n.audit().unwrap();
    }

    /// The nerve by hashed key lookup, for comparison with the structural tables.
    fn nerve_by_lookup(c: &FinCategory, bound: usize) -> TruncatedSimplicialSet {
        let keys = (0..=bound)
            .map(|k| composable_chains(c, k).into_iter().map(|ch| key(ch.into_iter().map(|f| f as u32))).collect())
            .collect();
        TruncatedSimplicialSet::from_keys(
            bound,
            keys,
            |k, i, ch, out| {
                if k == 1 {
                    let f = ch[0] as usize;
                    out.push(if i == 0 { c.target(f) } else { c.source(f) } as u32);
                    return;
                }
                out.extend_from_slice(ch);
                if i == 0 {
                    out.remove(0);
                } else if i == k {
                    out.pop();
                } else {
                    out[i - 1] = c.comp(ch[i] as usize, ch[i - 1] as usize) as u32;
                    out.remove(i);
                }
            },
            |k, i, ch, out| {
                let v = if k == 0 { ch[0] as usize } else if i == 0 { c.source(ch[0] as usize) } else { c.target(ch[i - 1] as usize) };
                out.extend_from_slice(ch);
                if k == 0 {
                    out.clear();
                }
                out.insert(if k == 0 { 0 } else { i }, c.identity(v) as u32);
            },
        )
        .unwrap()
    }

    #[test]
    fn nerve_tables_match_lookup() {
        let mut b = CategoryBuilder::new();
        let x = b.add_object_with_identity("x");
        let y = b.add_object_with_identity("y");
        b.add_morphism("f", x, y);
        b.add_morphism("g", x, y);
        let cats = [
            arrow(),
            b.build().unwrap(),
            FinCategory::from_monoid(&FinMonoid::cyclic(3), "*"),
        ];
        for c in &cats {
            let fast = nerve(c, 4, Budget::default()).unwrap();
            let slow = nerve_by_lookup(c, 4);
            assert_eq!(fast.counts(), slow.counts());
            for k in 0..=4 {
                assert!(fast.keys(k).eq(slow.keys(k)));
                for x in 0..fast.count(k) {
                    assert_eq!(fast.find(k, fast.key_of(k, x)), Some(x));
                    for i in 0..=k {
                        if k > 0 {
                            assert_eq!(fast.face(k, i, x), slow.face(k, i, x));
                        }
                        if k < 4 {
                            assert_eq!(fast.degeneracy(k, i, x), slow.degeneracy(k, i, x));
                        }
                    }
                }
            }
            assert_eq!(fast.find(2, &[u32::MAX, 0]), None);
        }
    }

    #[test]
    fn fiber_product_lookup_rejects_unmatched_pairs() {
        let x = nerve(&arrow(), 2, Budget::default()).unwrap();
        let id = SimplicialMap::identity(&x);
        let (p, _, _) = fiber_product(&x, &id, &x, &id, Budget::default()).unwrap();
        for k in 0..=2 {
            for i in 0..x.count(k) as u32 {
                for j in 0..x.count(k) as u32 {
                    assert_eq!(p.find(k, &[i, j]).is_some(), i == j);
                }
            }
        }
    }

    #[test]
    fn nerve_of_z2_counts() {
        let b = classifying_complex(&FinMonoid::cyclic(2), 4, Budget::default()).unwrap();
        assert_eq!(b.counts(), vec![1, 2, 4, 8, 16]);
        assert_eq!(b.nondegenerate_counts(), vec![1, 1, 1, 1, 1]);
        b.audit().unwrap();
    }

    #[test]
    fn union_with_empty_and_points() {
        let p = TruncatedSimplicialSet::point(2);
        let e = TruncatedSimplicialSet::empty(2);
        let u = disjoint_union(&[p.clone(), e], 2).unwrap();
        assert_eq!(u.counts(), p.counts());
        let pp = disjoint_union(&[p.clone(), p], 2).unwrap();
        assert_eq!(pp.counts(), vec![2, 2, 2]);
        assert_eq!(pi0(&pp).count, 2);
        pp.audit().unwrap();
    }

    #[test]
    fn union_bound_mismatch() {
        let err = disjoint_union(&[TruncatedSimplicialSet::point(2), TruncatedSimplicialSet::point(3)], 2);
        assert!(matches!(err, Err(Error::BoundMismatch(3, 2))));
    }

    #[test]
    fn fiber_product_over_point_is_product() {
        let x = nerve(&arrow(), 2, Budget::default()).unwrap();
        let pt = TruncatedSimplicialSet::point(2);
        let to_pt = SimplicialMap::from_key_fn(&x, &pt, |k, _, out| out.resize(k.max(1), 0))
        .unwrap();
        let (p, p1, p2) = fiber_product(&x, &to_pt, &x, &to_pt, Budget::default()).unwrap();
        for k in 0..=2 {
            assert_eq!(p.count(k), x.count(k) * x.count(k));
        }
        p.audit().unwrap();
        p1.audit(&p, &x).unwrap();
        p2.audit(&p, &x).unwrap();
    }

    #[test]
    fn fiber_product_along_identities() {
        let x = nerve(&arrow(), 3, Budget::default()).unwrap();
        let id = SimplicialMap::identity(&x);
        let (p, _, _) = fiber_product(&x, &id, &x, &id, Budget::default()).unwrap();
        assert_eq!(p.counts(), x.counts());
    }

    #[test]
    fn removal_is_upward_closed() {
        let x = nerve(&arrow(), 2, Budget::default()).unwrap();
        let a = x.find(1, &[2]).unwrap();
        let (y, _) = x.without_simplex(1, a).unwrap();
        y.audit().unwrap();
        assert_eq!(pi0(&y).count, 2);
    }
}
