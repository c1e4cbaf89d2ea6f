//! Finite categories, relative categories and the categories derived from them.
//!
//! A [`FinCategory`] is stored as an explicit composition table. Everything built
//! on top of it (arrow categories `M^[n]`, weak-equivalence subcategories,
//! automorphism monoids) is computed by exhaustive enumeration, so the sizes
//! involved must stay at desk scale.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::util::UnionFind;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub name: String,
    pub source: ObjId,
    pub target: ObjId,
}

/// A finite category given by its total composition table.
#[derive(Clone, Debug)]
pub struct FinCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<MorId>,
    compose: HashMap<(MorId, MorId), MorId>,
    out: Vec<Vec<MorId>>,
    hom: HashMap<(ObjId, ObjId), Vec<MorId>>,
    object_index: HashMap<String, ObjId>,
    morphism_index: HashMap<String, MorId>,
}

/// Incremental construction of a [`FinCategory`].
///
/// Compositions with identities are filled in automatically unless given explicitly.
#[derive(Default, Debug)]
pub struct CategoryBuilder {
    objects: Vec<String>,
    identities: Vec<Option<MorId>>,
    morphisms: Vec<Morphism>,
    compose: HashMap<(MorId, MorId), MorId>,
}

impl CategoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_object(&mut self, name: impl Into<String>) -> ObjId {
        self.objects.push(name.into());
        self.identities.push(None);
        self.objects.len() - 1
    }

    /// Adds an object together with its identity named `1_<name>`.
    pub fn add_object_with_identity(&mut self, name: impl Into<String>) -> ObjId {
        let name = name.into();
        let id_name = format!("1_{name}");
        let x = self.add_object(name);
        self.add_identity(x, id_name);
        x
    }

    pub fn add_identity(&mut self, object: ObjId, name: impl Into<String>) -> MorId {
        let m = self.add_morphism(name, object, object);
        self.identities[object] = Some(m);
        m
    }

    pub fn add_morphism(&mut self, name: impl Into<String>, source: ObjId, target: ObjId) -> MorId {
        self.morphisms.push(Morphism {
            name: name.into(),
            source,
            target,
        });
        self.morphisms.len() - 1
    }

    pub fn identity_of(&self, object: ObjId) -> Option<MorId> {
        self.identities[object]
    }

    /// Records `g ∘ f = h`.
    pub fn set_compose(&mut self, g: MorId, f: MorId, h: MorId) {
        self.compose.insert((g, f), h);
    }

    pub fn build(self) -> Result<FinCategory> {
        let CategoryBuilder {
            objects,
            identities,
            morphisms,
            mut compose,
        } = self;
        let mut ids = Vec::with_capacity(objects.len());
        for (x, id) in identities.iter().enumerate() {
            match id {
                Some(m) => ids.push(*m),
                None => {
                    return Err(Error::InvalidCategory(format!(
                        "object {} has no identity",
                        objects[x]
                    )))
                }
            }
        }
        for (i, m) in morphisms.iter().enumerate() {
            if m.source >= objects.len() || m.target >= objects.len() {
                return Err(Error::InvalidCategory(format!(
                    "morphism {} has an endpoint out of range",
                    m.name
                )));
            }
            compose.entry((ids[m.target], i)).or_insert(i);
            compose.entry((i, ids[m.source])).or_insert(i);
        }
        FinCategory::from_parts(objects, morphisms, ids, compose)
    }
}

impl FinCategory {
    /// Assembles a category from raw tables. Only name uniqueness and index ranges
    /// are checked here; the category axioms are checked by [`validate_category`].
    pub fn from_parts(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<MorId>,
        compose: HashMap<(MorId, MorId), MorId>,
    ) -> Result<Self> {
        let mut object_index = HashMap::with_capacity(objects.len());
        for (i, o) in objects.iter().enumerate() {
            if object_index.insert(o.clone(), i).is_some() {
                return Err(Error::InvalidCategory(format!("duplicate object {o}")));
            }
        }
        let mut morphism_index = HashMap::with_capacity(morphisms.len());
        for (i, m) in morphisms.iter().enumerate() {
            if morphism_index.insert(m.name.clone(), i).is_some() {
                return Err(Error::InvalidCategory(format!("duplicate morphism {}", m.name)));
            }
        }
        if identities.len() != objects.len() {
            return Err(Error::InvalidCategory("identity table has wrong length".into()));
        }
        for (&(g, f), &h) in &compose {
            if g >= morphisms.len() || f >= morphisms.len() || h >= morphisms.len() {
                return Err(Error::InvalidCategory("composition table index out of range".into()));
            }
        }
        let mut out = vec![Vec::new(); objects.len()];
        let mut hom: HashMap<(ObjId, ObjId), Vec<MorId>> = HashMap::new();
        for (i, m) in morphisms.iter().enumerate() {
            out[m.source].push(i);
            hom.entry((m.source, m.target)).or_default().push(i);
        }
        Ok(FinCategory {
            objects,
            morphisms,
            identities,
            compose,
            out,
            hom,
            object_index,
            morphism_index,
        })
    }

    /// The terminal category `∗`.
    pub fn terminal() -> Self {
        let mut b = CategoryBuilder::new();
        b.add_object_with_identity("*");
        b.build().expect("terminal category")
    }

    /// Discrete category on the given object names.
    pub fn discrete<S: AsRef<str>>(names: &[S]) -> Self {
        let mut b = CategoryBuilder::new();
        for n in names {
            b.add_object_with_identity(n.as_ref());
        }
        b.build().expect("discrete category")
    }

    /// One-object category whose endomorphism monoid is `monoid`.
    pub fn from_monoid(monoid: &FinMonoid, object: &str) -> Self {
        let mut b = CategoryBuilder::new();
        let x = b.add_object(object);
        for (i, e) in monoid.elements.iter().enumerate() {
            let m = b.add_morphism(e.clone(), x, x);
            debug_assert_eq!(m, i);
        }
        b.identities[x] = Some(monoid.unit);
        for a in 0..monoid.len() {
            for c in 0..monoid.len() {
                b.set_compose(a, c, monoid.table[a][c]);
            }
        }
        b.build().expect("monoid category")
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_name(&self, x: ObjId) -> &str {
        &self.objects[x]
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn morphism(&self, f: MorId) -> &Morphism {
        &self.morphisms[f]
    }

    pub fn name(&self, f: MorId) -> &str {
        &self.morphisms[f].name
    }

    pub fn source(&self, f: MorId) -> ObjId {
        self.morphisms[f].source
    }

    pub fn target(&self, f: MorId) -> ObjId {
        self.morphisms[f].target
    }

    pub fn identity(&self, x: ObjId) -> MorId {
        self.identities[x]
    }

    pub fn identities(&self) -> &[MorId] {
        &self.identities
    }

    pub fn is_identity(&self, f: MorId) -> bool {
        self.identities[self.source(f)] == f
    }

    /// `g ∘ f`, when recorded.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.compose.get(&(g, f)).copied()
    }

    /// `g ∘ f` for a pair known to be composable.
    pub fn comp(&self, g: MorId, f: MorId) -> MorId {
        match self.compose.get(&(g, f)) {
            Some(&h) => h,
            None => panic!("composition {} . {} undefined", self.name(g), self.name(f)),
        }
    }

    pub fn composition_table(&self) -> &HashMap<(MorId, MorId), MorId> {
        &self.compose
    }

    /// Morphisms with the given source, in index order.
    pub fn out_of(&self, x: ObjId) -> &[MorId] {
        &self.out[x]
    }

    pub fn hom(&self, x: ObjId, y: ObjId) -> &[MorId] {
        self.hom.get(&(x, y)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn object_by_name(&self, name: &str) -> Option<ObjId> {
        self.object_index.get(name).copied()
    }

    pub fn morphism_by_name(&self, name: &str) -> Option<MorId> {
        self.morphism_index.get(name).copied()
    }

    /// The opposite category. Object and morphism indices are unchanged.
    pub fn opposite(&self) -> FinCategory {
        let morphisms = self
            .morphisms
            .iter()
            .map(|m| Morphism {
                name: m.name.clone(),
                source: m.target,
                target: m.source,
            })
            .collect();
        let compose = self.compose.iter().map(|(&(g, f), &h)| ((f, g), h)).collect();
        FinCategory::from_parts(self.objects.clone(), morphisms, self.identities.clone(), compose)
            .expect("opposite of a well-formed category")
    }
}

/// One violated category axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MissingComposite { g: String, f: String },
    IllTypedComposite { g: String, f: String, composite: String },
    SpuriousComposite { g: String, f: String },
    BadIdentity { object: String },
    IdentityLaw { morphism: String },
    Associativity { h: String, g: String, f: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingComposite { g, f: ff } => write!(f, "composite {g} . {ff} is missing"),
            Violation::IllTypedComposite { g, f: ff, composite } => {
                write!(f, "composite {g} . {ff} = {composite} has wrong source/target")
            }
            Violation::SpuriousComposite { g, f: ff } => {
                write!(f, "composite {g} . {ff} recorded for a non-composable pair")
            }
            Violation::BadIdentity { object } => write!(f, "identity of {object} is not an endomorphism"),
            Violation::IdentityLaw { morphism } => write!(f, "identity law fails for {morphism}"),
            Violation::Associativity { h, g, f: ff } => {
                write!(f, "associativity fails for ({h}, {g}, {ff})")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidCategory(v.to_string())),
        }
    }
}

/// Checks every category axiom exhaustively and reports all violations.
pub fn validate_category(c: &FinCategory) -> ValidationReport {
    let mut violations = Vec::new();
    for (x, &id) in c.identities.iter().enumerate() {
        if c.source(id) != x || c.target(id) != x {
            violations.push(Violation::BadIdentity {
                object: c.objects[x].clone(),
            });
        }
    }
    for (&(g, f), &h) in &c.compose {
        if c.target(f) != c.source(g) {
            violations.push(Violation::SpuriousComposite {
                g: c.name(g).into(),
                f: c.name(f).into(),
            });
        } else if c.source(h) != c.source(f) || c.target(h) != c.target(g) {
            violations.push(Violation::IllTypedComposite {
                g: c.name(g).into(),
                f: c.name(f).into(),
                composite: c.name(h).into(),
            });
        }
    }
    for f in 0..c.num_morphisms() {
        for &g in c.out_of(c.target(f)) {
            if c.compose(g, f).is_none() {
                violations.push(Violation::MissingComposite {
                    g: c.name(g).into(),
                    f: c.name(f).into(),
                });
            }
        }
    }
    // Identity laws and associativity only make sense on a total, well-typed table.
    if !violations.is_empty() {
        violations.sort_by_key(|v| v.to_string());
        return ValidationReport { violations };
    }
    for f in 0..c.num_morphisms() {
        let (s, t) = (c.source(f), c.target(f));
        if c.comp(c.identity(t), f) != f || c.comp(f, c.identity(s)) != f {
            violations.push(Violation::IdentityLaw {
                morphism: c.name(f).into(),
            });
        }
    }
    for f in 0..c.num_morphisms() {
        for &g in c.out_of(c.target(f)) {
            let gf = c.comp(g, f);
            for &h in c.out_of(c.target(g)) {
                if c.comp(h, gf) != c.comp(c.comp(h, g), f) {
                    violations.push(Violation::Associativity {
                        h: c.name(h).into(),
                        g: c.name(g).into(),
                        f: c.name(f).into(),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// A category with a marked class of weak equivalences.
#[derive(Clone, Debug)]
pub struct RelativeCategory {
    base: FinCategory,
    marked: Vec<bool>,
}

impl RelativeCategory {
    /// Requires identities marked and the marking closed under composition.
    pub fn new(base: FinCategory, marked: Vec<bool>) -> Result<Self> {
        check_marking(&base, &marked)?;
        Ok(RelativeCategory { base, marked })
    }

    /// Every morphism marked.
    /// Pairs a category with a marking without checking closure; callers close it afterwards.
    pub fn from_marking_unchecked(base: FinCategory, marked: Vec<bool>) -> Self {
        RelativeCategory { base, marked }
    }

    pub fn maximal(base: FinCategory) -> Self {
        let marked = vec![true; base.num_morphisms()];
        RelativeCategory { base, marked }
    }

    /// Only identities marked.
    pub fn minimal(base: FinCategory) -> Self {
        let mut marked = vec![false; base.num_morphisms()];
        for &id in base.identities() {
            marked[id] = true;
        }
        RelativeCategory { base, marked }
    }

    pub fn base(&self) -> &FinCategory {
        &self.base
    }

    pub fn is_marked(&self, f: MorId) -> bool {
        self.marked[f]
    }

    pub fn marking(&self) -> &[bool] {
        &self.marked
    }

    pub fn marked_morphisms(&self) -> impl Iterator<Item = MorId> + '_ {
        (0..self.marked.len()).filter(move |&f| self.marked[f])
    }

    pub fn opposite(&self) -> RelativeCategory {
        RelativeCategory {
            base: self.base.opposite(),
            marked: self.marked.clone(),
        }
    }
}

fn check_marking(base: &FinCategory, marked: &[bool]) -> Result<()> {
    if marked.len() != base.num_morphisms() {
        return Err(Error::InvalidCategory("marking has wrong length".into()));
    }
    for &id in base.identities() {
        if !marked[id] {
            return Err(Error::UnmarkedIdentity(base.name(id).into()));
        }
    }
    let mut pairs: Vec<_> = base.composition_table().iter().collect();
    pairs.sort();
    for (&(g, f), &h) in pairs {
        if marked[g] && marked[f] && !marked[h] {
            return Err(Error::MarkingNotClosed {
                g: base.name(g).into(),
                f: base.name(f).into(),
                composite: base.name(h).into(),
            });
        }
    }
    Ok(())
}

/// A weak-equivalence-preserving functor, stored as its object and morphism maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelFunctor {
    pub object_map: Vec<ObjId>,
    pub morphism_map: Vec<MorId>,
}

impl RelFunctor {
    pub fn identity(c: &FinCategory) -> Self {
        RelFunctor {
            object_map: (0..c.num_objects()).collect(),
            morphism_map: (0..c.num_morphisms()).collect(),
        }
    }

    pub fn obj(&self, x: ObjId) -> ObjId {
        self.object_map[x]
    }

    pub fn mor(&self, f: MorId) -> MorId {
        self.morphism_map[f]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &RelFunctor) -> RelFunctor {
        RelFunctor {
            object_map: self.object_map.iter().map(|&x| other.obj(x)).collect(),
            morphism_map: self.morphism_map.iter().map(|&f| other.mor(f)).collect(),
        }
    }

    /// Checks functor laws exhaustively.
    pub fn validate_functor(&self, src: &FinCategory, tgt: &FinCategory) -> Result<()> {
        if self.object_map.len() != src.num_objects() || self.morphism_map.len() != src.num_morphisms() {
            return Err(Error::InvalidFunctor("map sizes do not match the source".into()));
        }
        if self.object_map.iter().any(|&x| x >= tgt.num_objects())
            || self.morphism_map.iter().any(|&f| f >= tgt.num_morphisms())
        {
            return Err(Error::InvalidFunctor("map lands outside the target".into()));
        }
        for f in 0..src.num_morphisms() {
            let g = self.mor(f);
            if tgt.source(g) != self.obj(src.source(f)) || tgt.target(g) != self.obj(src.target(f)) {
                return Err(Error::InvalidFunctor(format!(
                    "{} is not sent to a morphism between the images of its endpoints",
                    src.name(f)
                )));
            }
        }
        for x in 0..src.num_objects() {
            if self.mor(src.identity(x)) != tgt.identity(self.obj(x)) {
                return Err(Error::InvalidFunctor(format!(
                    "identity of {} is not preserved",
                    src.object_name(x)
                )));
            }
        }
        for (&(g, f), &h) in src.composition_table() {
            if tgt.compose(self.mor(g), self.mor(f)) != Some(self.mor(h)) {
                return Err(Error::InvalidFunctor(format!(
                    "composite {} . {} is not preserved",
                    src.name(g),
                    src.name(f)
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self, src: &RelativeCategory, tgt: &RelativeCategory) -> Result<()> {
        self.validate_functor(src.base(), tgt.base())?;
        for f in src.marked_morphisms() {
            if !tgt.is_marked(self.mor(f)) {
                return Err(Error::InvalidFunctor(format!(
                    "marked {} is sent to unmarked {}",
                    src.base().name(f),
                    tgt.base().name(self.mor(f))
                )));
            }
        }
        Ok(())
    }
}

/// A finite monoid; `table[a][b]` is the product `a·b` (apply `b` first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinMonoid {
    pub elements: Vec<String>,
    pub unit: usize,
    pub table: Vec<Vec<usize>>,
}

impl FinMonoid {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn trivial() -> Self {
        FinMonoid {
            elements: vec!["1".into()],
            unit: 0,
            table: vec![vec![0]],
        }
    }

    /// The cyclic group of order `n`, elements `g^0 .. g^(n-1)`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0);
        FinMonoid {
            elements: (0..n).map(|k| format!("g{k}")).collect(),
            unit: 0,
            table: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
        }
    }

    pub fn is_valid(&self) -> bool {
        let n = self.len();
        if self.unit >= n || self.table.len() != n || self.table.iter().any(|r| r.len() != n) {
            return false;
        }
        let t = &self.table;
        (0..n).all(|a| t[self.unit][a] == a && t[a][self.unit] == a)
            && (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| t[t[a][b]][c] == t[a][t[b][c]])))
    }
}

/// `M^[n]` together with the chain and ladder data it was built from.
#[derive(Clone, Debug)]
pub struct ArrowPower {
    pub n: usize,
    pub category: RelativeCategory,
    /// For each object: the chain `[f1..fn]` (or `[x]` when `n = 0`).
    pub chains: Vec<Vec<usize>>,
    /// For each morphism: the ladder components `[u0..un]`.
    pub ladders: Vec<Vec<MorId>>,
    chain_index: HashMap<Vec<usize>, ObjId>,
    ladder_index: HashMap<(ObjId, ObjId, Vec<MorId>), MorId>,
}

impl ArrowPower {
    pub fn object_of_chain(&self, chain: &[usize]) -> Option<ObjId> {
        self.chain_index.get(chain).copied()
    }

    /// The morphism `source → target` with the given components.
    pub fn morphism_of_ladder(&self, source: ObjId, target: ObjId, ladder: &[MorId]) -> Option<MorId> {
        self.ladder_index.get(&(source, target, ladder.to_vec())).copied()
    }

    /// Objects of `M` at positions `0..=n` of the chain of object `c`.
    pub fn chain_vertices(&self, m: &FinCategory, c: ObjId) -> Vec<ObjId> {
        let chain = &self.chains[c];
        if self.n == 0 {
            return vec![chain[0]];
        }
        let mut v = vec![m.source(chain[0])];
        v.extend(chain.iter().map(|&f| m.target(f)));
        v
    }
}

/// Enumerates the composable `n`-chains of `c` in lexicographic order.
pub fn composable_chains(c: &FinCategory, n: usize) -> Vec<Vec<MorId>> {
    if n == 0 {
        return (0..c.num_objects()).map(|x| vec![x]).collect();
    }
    fn go(c: &FinCategory, n: usize, stack: &mut Vec<MorId>, out: &mut Vec<Vec<MorId>>) {
        if stack.len() == n {
            out.push(stack.clone());
            return;
        }
        let last = *stack.last().expect("non-empty prefix");
        for &g in c.out_of(c.target(last)) {
            stack.push(g);
            go(c, n, stack, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    for f in 0..c.num_morphisms() {
        stack.push(f);
        go(c, n, &mut stack, &mut out);
        stack.pop();
    }
    out
}

/// `M^[n]`: chains of length `n` with commuting ladders; marked ladders are levelwise marked.
pub fn arrow_category_power(m: &RelativeCategory, n: usize, budget: Budget) -> Result<ArrowPower> {
    let c = m.base();
    if n == 0 {
        let chains = (0..c.num_objects()).map(|x| vec![x]).collect::<Vec<_>>();
        let ladders = (0..c.num_morphisms()).map(|f| vec![f]).collect::<Vec<_>>();
        let chain_index = chains.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let ladder_index = ladders
            .iter()
            .enumerate()
            .map(|(i, k)| ((c.source(i), c.target(i), k.clone()), i))
            .collect();
        return Ok(ArrowPower {
            n,
            category: m.clone(),
            chains,
            ladders,
            chain_index,
            ladder_index,
        });
    }
    let chains = composable_chains(c, n);
    budget.check(chains.len(), || format!("enumerating objects of M^[{n}]"))?;
    let vertices: Vec<Vec<ObjId>> = chains
        .iter()
        .map(|ch| {
            let mut v = vec![c.source(ch[0])];
            v.extend(ch.iter().map(|&f| c.target(f)));
            v
        })
        .collect();

    let mut b = CategoryBuilder::new();
    let mut chain_index = HashMap::with_capacity(chains.len());
    for (i, ch) in chains.iter().enumerate() {
        let name = format!("[{}]", ch.iter().map(|&f| c.name(f)).collect::<Vec<_>>().join(","));
        b.add_object(name);
        chain_index.insert(ch.clone(), i);
    }

    let mut ladders: Vec<Vec<MorId>> = Vec::new();
    let mut ladder_index = HashMap::new();
    let mut marked = Vec::new();
    let mut name_uses: HashMap<String, usize> = HashMap::new();
    for (s, src) in chains.iter().enumerate() {
        for (t, tgt) in chains.iter().enumerate() {
            let (xs, ys) = (&vertices[s], &vertices[t]);
            let mut stack: Vec<MorId> = Vec::with_capacity(n + 1);
            let mut found: Vec<Vec<MorId>> = Vec::new();
            fn extend(
                c: &FinCategory,
                src: &[MorId],
                tgt: &[MorId],
                xs: &[ObjId],
                ys: &[ObjId],
                stack: &mut Vec<MorId>,
                found: &mut Vec<Vec<MorId>>,
            ) {
                let i = stack.len();
                if i == xs.len() {
                    found.push(stack.clone());
                    return;
                }
                for &u in c.hom(xs[i], ys[i]) {
                    if i > 0 {
                        // square: u_i ∘ f_i = g_i ∘ u_{i-1}
                        let prev = stack[i - 1];
                        if c.comp(u, src[i - 1]) != c.comp(tgt[i - 1], prev) {
                            continue;
                        }
                    }
                    stack.push(u);
                    extend(c, src, tgt, xs, ys, stack, found);
                    stack.pop();
                }
            }
            extend(c, src, tgt, xs, ys, &mut stack, &mut found);
            for ladder in found {
                let mut name = format!(
                    "({})",
                    ladder.iter().map(|&u| c.name(u)).collect::<Vec<_>>().join(",")
                );
                let seen = name_uses.entry(name.clone()).or_insert(0usize);
                *seen += 1;
                if *seen > 1 {
                    name = format!("{name}#{}", *seen - 1);
                }
                let id = b.add_morphism(name, s, t);
                marked.push(ladder.iter().all(|&u| m.is_marked(u)));
                ladder_index.insert((s, t, ladder.clone()), id);
                ladders.push(ladder);
            }
            budget.check(ladders.len(), || format!("enumerating morphisms of M^[{n}]"))?;
        }
    }
    for (i, v) in vertices.iter().enumerate() {
        let id_ladder: Vec<MorId> = v.iter().map(|&x| c.identity(x)).collect();
        let id = ladder_index[&(i, i, id_ladder)];
        b.identities[i] = Some(id);
    }
    // Compose ladders componentwise.
    let mut by_source: Vec<Vec<MorId>> = vec![Vec::new(); chains.len()];
    for i in 0..ladders.len() {
        by_source[b.morphisms[i].source].push(i);
    }
    for f in 0..ladders.len() {
        let mid = b.morphisms[f].target;
        for &g in &by_source[mid] {
            let comp: Vec<MorId> = ladders[g]
                .iter()
                .zip(&ladders[f])
                .map(|(&gu, &fu)| c.comp(gu, fu))
                .collect();
            let h = ladder_index[&(b.morphisms[f].source, b.morphisms[g].target, comp)];
            b.set_compose(g, f, h);
        }
    }
    let base = b.build()?;
    Ok(ArrowPower {
        n,
        category: RelativeCategory { base, marked },
        chains,
        ladders,
        chain_index,
        ladder_index,
    })
}

/// `we(M)` together with the index maps back to `M`.
#[derive(Clone, Debug)]
pub struct WeSubcategory {
    pub category: FinCategory,
    /// we-morphism → morphism of `M`.
    pub parent: Vec<MorId>,
    /// morphism of `M` → we-morphism, for marked morphisms.
    pub from_parent: Vec<Option<MorId>>,
}

/// The wide subcategory of marked morphisms. Objects keep their indices.
pub fn we_subcategory(m: &RelativeCategory) -> Result<WeSubcategory> {
    let c = m.base();
    check_marking(c, m.marking())?;
    let parent: Vec<MorId> = m.marked_morphisms().collect();
    let mut from_parent = vec![None; c.num_morphisms()];
    for (i, &p) in parent.iter().enumerate() {
        from_parent[p] = Some(i);
    }
    let morphisms = parent.iter().map(|&p| c.morphism(p).clone()).collect();
    let identities = c
        .identities()
        .iter()
        .map(|&id| from_parent[id].expect("identities are marked"))
        .collect();
    let mut compose = HashMap::new();
    for (&(g, f), &h) in c.composition_table() {
        if let (Some(g2), Some(f2)) = (from_parent[g], from_parent[f]) {
            compose.insert((g2, f2), from_parent[h].expect("closed marking"));
        }
    }
    let category = FinCategory::from_parts(c.objects().to_vec(), morphisms, identities, compose)?;
    Ok(WeSubcategory {
        category,
        parent,
        from_parent,
    })
}

/// Zigzag classes of objects under marked morphisms, each sorted, ordered by least member.
pub fn we_classes(m: &RelativeCategory) -> Vec<Vec<ObjId>> {
    let c = m.base();
    let mut uf = UnionFind::new(c.num_objects());
    for f in m.marked_morphisms() {
        uf.union(c.source(f), c.target(f));
    }
    uf.classes()
}

/// The monoid of marked endomorphisms of `x` under composition.
pub fn aut_h(m: &RelativeCategory, x: ObjId) -> FinMonoid {
    let c = m.base();
    let elems: Vec<MorId> = c.hom(x, x).iter().copied().filter(|&f| m.is_marked(f)).collect();
    let pos: HashMap<MorId, usize> = elems.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let table = elems
        .iter()
        .map(|&a| elems.iter().map(|&b| pos[&c.comp(a, b)]).collect())
        .collect();
    FinMonoid {
        elements: elems.iter().map(|&f| c.name(f).to_string()).collect(),
        unit: pos[&c.identity(x)],
        table,
    }
}

/// Smallest marking containing the given one that is closed under composition and 2-out-of-3.
pub fn two_out_of_three_closure(m: &RelativeCategory) -> RelativeCategory {
    let c = m.base();
    let mut marked = m.marking().to_vec();
    for &id in c.identities() {
        marked[id] = true;
    }
    let mut triples: Vec<(MorId, MorId, MorId)> =
        c.composition_table().iter().map(|(&(g, f), &h)| (g, f, h)).collect();
    triples.sort_unstable();
    loop {
        let mut changed = false;
        for &(g, f, h) in &triples {
            let count = marked[g] as u8 + marked[f] as u8 + marked[h] as u8;
            if count == 2 {
                marked[g] = true;
                marked[f] = true;
                marked[h] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    RelativeCategory {
        base: c.clone(),
        marked,
    }
}

/// Whether the marking satisfies composition closure and 2-out-of-3.
pub fn is_two_out_of_three_closed(m: &RelativeCategory) -> bool {
    m.base()
        .composition_table()
        .iter()
        .all(|(&(g, f), &h)| (m.is_marked(g) as u8 + m.is_marked(f) as u8 + m.is_marked(h) as u8) != 2)
}

/// Names of the marked morphisms, sorted.
pub fn marked_names(m: &RelativeCategory) -> BTreeSet<String> {
    m.marked_morphisms().map(|f| m.base().name(f).to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// a → b → c with the composite.
    fn chain3() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let a = b.add_object_with_identity("a");
        let bb = b.add_object_with_identity("b");
        let c = b.add_object_with_identity("c");
        let f = b.add_morphism("f", a, bb);
        let g = b.add_morphism("g", bb, c);
        let gf = b.add_morphism("gf", a, c);
        b.set_compose(g, f, gf);
        b.build().unwrap()
    }

    fn marked_arrow(marked: bool) -> RelativeCategory {
        let mut b = CategoryBuilder::new();
        let x = b.add_object_with_identity("x");
        let y = b.add_object_with_identity("y");
        let w = b.add_morphism("w", x, y);
        let c = b.build().unwrap();
        let mut m = RelativeCategory::minimal(c);
        m.marked[w] = marked;
        m
    }

    fn idempotent() -> RelativeCategory {
        let monoid = FinMonoid {
            elements: vec!["1".into(), "e".into()],
            unit: 0,
            table: vec![vec![0, 1], vec![1, 1]],
        };
        RelativeCategory::maximal(FinCategory::from_monoid(&monoid, "x"))
    }

    #[test]
    fn terminal_is_valid() {
        assert!(validate_category(&FinCategory::terminal()).is_valid());
    }

    #[test]
    fn free_chain_is_valid() {
        assert!(validate_category(&chain3()).is_valid());
    }

    #[test]
    fn missing_composite_is_named() {
        let mut b = CategoryBuilder::new();
        let a = b.add_object_with_identity("a");
        let bb = b.add_object_with_identity("b");
        b.add_morphism("f", a, bb);
        b.add_morphism("g", bb, a);
        let c = b.build().unwrap();
        let report = validate_category(&c);
        assert!(!report.is_valid());
        assert!(report
            .violations
            .contains(&Violation::MissingComposite { g: "g".into(), f: "f".into() }));
        assert!(report
            .violations
            .contains(&Violation::MissingComposite { g: "f".into(), f: "g".into() }));
    }

    #[test]
    fn associativity_violation_detected() {
        // Monoid-like table that is not associative: x·x = 1, x·y = y, y·x = x, y·y = y.
        let mut b = CategoryBuilder::new();
        let o = b.add_object_with_identity("o");
        let x = b.add_morphism("x", o, o);
        let y = b.add_morphism("y", o, o);
        let id = b.identity_of(o).unwrap();
        b.set_compose(x, x, id);
        b.set_compose(x, y, y);
        b.set_compose(y, x, x);
        b.set_compose(y, y, y);
        let c = b.build().unwrap();
        let report = validate_category(&c);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Associativity { .. })));
    }

    #[test]
    fn arrow_power_zero_is_m() {
        let m = RelativeCategory::maximal(chain3());
        let p = arrow_category_power(&m, 0, Budget::default()).unwrap();
        assert_eq!(p.category.base().num_objects(), 3);
        assert_eq!(p.category.base().num_morphisms(), 6);
        assert!(validate_category(p.category.base()).is_valid());
    }

    #[test]
    fn arrow_power_of_terminal_is_terminal() {
        let m = RelativeCategory::maximal(FinCategory::terminal());
        for n in 0..4 {
            let p = arrow_category_power(&m, n, Budget::default()).unwrap();
            assert_eq!(p.category.base().num_objects(), 1);
            assert_eq!(p.category.base().num_morphisms(), 1);
        }
    }

    #[test]
    fn arrow_power_one_of_marked_arrow() {
        // Objects of M^[1] are the morphisms of M: 1_x, 1_y, w.
        let m = marked_arrow(true);
        let p = arrow_category_power(&m, 1, Budget::default()).unwrap();
        assert_eq!(p.category.base().num_objects(), m.base().num_morphisms());
        assert_eq!(p.category.base().num_objects(), 3);
        assert!(validate_category(p.category.base()).is_valid());
        // 1_x -> w -> 1_y is a poset with three non-identity ladders.
        assert_eq!(p.category.base().num_morphisms(), 6);
    }

    #[test]
    fn we_subcategory_cases() {
        let all = RelativeCategory::maximal(chain3());
        assert_eq!(we_subcategory(&all).unwrap().category.num_morphisms(), 6);
        let none = RelativeCategory::minimal(chain3());
        let we = we_subcategory(&none).unwrap();
        assert_eq!(we.category.num_morphisms(), 3);
        assert_eq!(we.category.num_objects(), 3);

        let mut only_f = RelativeCategory::minimal(chain3());
        only_f.marked[chain3().morphism_by_name("f").unwrap()] = true;
        let we = we_subcategory(&only_f).unwrap();
        assert!(validate_category(&we.category).is_valid());
        assert_eq!(we.category.num_objects(), 3);
        assert_eq!(we.category.num_morphisms() - 3, 1);
    }

    #[test]
    fn unclosed_marking_is_rejected() {
        let c = chain3();
        let mut marked = vec![false; c.num_morphisms()];
        for &i in c.identities() {
            marked[i] = true;
        }
        marked[c.morphism_by_name("f").unwrap()] = true;
        marked[c.morphism_by_name("g").unwrap()] = true;
        let err = RelativeCategory::new(c, marked).unwrap_err();
        assert!(matches!(err, Error::MarkingNotClosed { ref g, ref f, .. } if g == "g" && f == "f"));
    }

    #[test]
    fn we_classes_cases() {
        let none = RelativeCategory::minimal(chain3());
        assert_eq!(we_classes(&none), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(we_classes(&marked_arrow(true)), vec![vec![0, 1]]);
        assert_eq!(we_classes(&marked_arrow(false)).len(), 2);
    }

    #[test]
    fn aut_h_cases() {
        let trivial = aut_h(&marked_arrow(true), 0);
        assert_eq!(trivial.len(), 1);
        let z2 = RelativeCategory::maximal(FinCategory::from_monoid(&FinMonoid::cyclic(2), "o"));
        let a = aut_h(&z2, 0);
        assert_eq!(a.len(), 2);
        assert!(a.is_valid());
        let e = aut_h(&idempotent(), 0);
        assert_eq!(e.elements, vec!["1".to_string(), "e".to_string()]);
        assert_eq!(e.table[1][1], 1);
    }

    #[test]
    fn two_of_three_rule_instance() {
        let c = chain3();
        let mut m = RelativeCategory::minimal(c.clone());
        m.marked[c.morphism_by_name("f").unwrap()] = true;
        m.marked[c.morphism_by_name("gf").unwrap()] = true;
        let closed = two_out_of_three_closure(&m);
        assert!(closed.is_marked(c.morphism_by_name("g").unwrap()));
        assert!(is_two_out_of_three_closed(&closed));
        let again = two_out_of_three_closure(&closed);
        assert_eq!(again.marking(), closed.marking());
    }

    #[test]
    fn opposite_is_valid_and_involutive() {
        let c = chain3();
        let op = c.opposite();
        assert!(validate_category(&op).is_valid());
        let f = c.morphism_by_name("f").unwrap();
        assert_eq!(op.source(f), c.target(f));
        let back = op.opposite();
        assert_eq!(back.composition_table(), c.composition_table());
    }

    #[test]
    fn functor_identity_and_composition() {
        let c = chain3();
        let id = RelFunctor::identity(&c);
        assert!(id.validate_functor(&c, &c).is_ok());
        assert_eq!(id.then(&id), id);
    }
}
