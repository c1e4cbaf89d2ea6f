//! Finitely presented categories with a shortlex Knuth–Bendix completion.
//!
//! Words are paths written in diagrammatic order: `[f, g]` is `g ∘ f`. Every rule
//! rewrites a path to a parallel path that is smaller in shortlex order, so a
//! completed system picks the shortlex-least word of each morphism as its normal
//! form, independently of the order the relations were given in.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fincat::{CategoryBuilder, FinCategory, MorId, ObjId};

pub type GenId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub source: ObjId,
    pub target: ObjId,
}

/// A path of generators starting at `source`; empty paths are identities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub source: ObjId,
    pub gens: Vec<GenId>,
}

impl Path {
    pub fn identity(source: ObjId) -> Self {
        Path {
            source,
            gens: Vec::new(),
        }
    }

    pub fn single(g: GenId, generators: &[Generator]) -> Self {
        Path {
            source: generators[g].source,
            gens: vec![g],
        }
    }

    pub fn target(&self, generators: &[Generator]) -> ObjId {
        self.gens.last().map_or(self.source, |&g| generators[g].target)
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// `other ∘ self` (follow `self`, then `other`).
    pub fn then(&self, other: &Path) -> Path {
        let mut gens = self.gens.clone();
        gens.extend_from_slice(&other.gens);
        Path {
            source: self.source,
            gens,
        }
    }
}

fn shortlex(a: &[GenId], b: &[GenId]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewriteBounds {
    pub max_word_length: usize,
    pub max_completion_passes: usize,
}

impl Default for RewriteBounds {
    fn default() -> Self {
        RewriteBounds {
            max_word_length: 8,
            max_completion_passes: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Vec<GenId>,
    pub rhs: Path,
}

/// A category presented by generators and relations, with its completed rewrite system.
#[derive(Clone, Debug)]
pub struct PresentedCategory {
    objects: Vec<String>,
    generators: Vec<Generator>,
    relations: Vec<(Path, Path)>,
    rules: Vec<Rule>,
    bounds: RewriteBounds,
    passes_used: usize,
}

impl PresentedCategory {
    /// Validates the presentation and runs completion within `bounds`.
    pub fn new(
        objects: Vec<String>,
        generators: Vec<Generator>,
        relations: Vec<(Path, Path)>,
        bounds: RewriteBounds,
    ) -> Result<Self> {
        for g in &generators {
            if g.source >= objects.len() || g.target >= objects.len() {
                return Err(Error::InvalidCategory(format!("generator {} has a bad endpoint", g.name)));
            }
        }
        let mut pc = PresentedCategory {
            objects,
            generators,
            relations: Vec::new(),
            rules: Vec::new(),
            bounds,
            passes_used: 0,
        };
        for (a, b) in &relations {
            pc.check_path(a)?;
            pc.check_path(b)?;
            if a.source != b.source || a.target(&pc.generators) != b.target(&pc.generators) {
                return Err(Error::InvalidCategory(format!(
                    "relation {} = {} is not between parallel words",
                    pc.show(a),
                    pc.show(b)
                )));
            }
        }
        pc.relations = relations;
        pc.complete()?;
        Ok(pc)
    }

    fn check_path(&self, p: &Path) -> Result<()> {
        let mut at = p.source;
        for &g in &p.gens {
            let gen = self
                .generators
                .get(g)
                .ok_or_else(|| Error::InvalidCategory(format!("unknown generator {g}")))?;
            if gen.source != at {
                return Err(Error::InvalidCategory(format!("word {} is not composable", self.show(p))));
            }
            at = gen.target;
        }
        Ok(())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relations(&self) -> &[(Path, Path)] {
        &self.relations
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn bounds(&self) -> RewriteBounds {
        self.bounds
    }

    pub fn passes_used(&self) -> usize {
        self.passes_used
    }

    /// Human-readable form of a word, in composition order.
    pub fn show(&self, p: &Path) -> String {
        if p.gens.is_empty() {
            return format!("1_{}", self.objects[p.source]);
        }
        p.gens
            .iter()
            .rev()
            .map(|&g| self.generators[g].name.as_str())
            .collect::<Vec<_>>()
            .join("∘")
    }

    fn find_redex(&self, word: &[GenId], index: &HashMap<GenId, Vec<usize>>) -> Option<(usize, usize)> {
        for pos in 0..word.len() {
            if let Some(cands) = index.get(&word[pos]) {
                for &r in cands {
                    let lhs = &self.rules[r].lhs;
                    if word[pos..].starts_with(lhs) {
                        return Some((pos, r));
                    }
                }
            }
        }
        None
    }

    fn rule_index(&self) -> HashMap<GenId, Vec<usize>> {
        let mut index: HashMap<GenId, Vec<usize>> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            index.entry(r.lhs[0]).or_default().push(i);
        }
        index
    }

    fn reduce_with(&self, p: &Path, index: &HashMap<GenId, Vec<usize>>) -> Path {
        let mut word = p.gens.clone();
        while let Some((pos, r)) = self.find_redex(&word, index) {
            let rule = &self.rules[r];
            let mut next = Vec::with_capacity(word.len());
            next.extend_from_slice(&word[..pos]);
            next.extend_from_slice(&rule.rhs.gens);
            next.extend_from_slice(&word[pos + rule.lhs.len()..]);
            word = next;
        }
        Path {
            source: p.source,
            gens: word,
        }
    }

    /// Normal form of a word under the completed system.
    pub fn normal_form(&self, p: &Path) -> Path {
        self.reduce_with(p, &self.rule_index())
    }

    fn orient(&self, a: Path, b: Path) -> Option<Rule> {
        match shortlex(&a.gens, &b.gens) {
            Ordering::Equal => None,
            Ordering::Greater => Some(Rule { lhs: a.gens, rhs: b }),
            Ordering::Less => Some(Rule { lhs: b.gens, rhs: a }),
        }
    }

    /// Shortlex Knuth–Bendix completion, bounded by passes and rule length.
    fn complete(&mut self) -> Result<()> {
        let mut pending: Vec<(Path, Path, String)> = self
            .relations
            .iter()
            .map(|(a, b)| (a.clone(), b.clone(), "relation".to_string()))
            .collect();
        for pass in 0..=self.bounds.max_completion_passes {
            self.passes_used = pass;
            self.absorb(pending)?;
            let unresolved = self.critical_pairs();
            if unresolved.is_empty() {
                return Ok(());
            }
            if pass == self.bounds.max_completion_passes {
                let (a, b, overlap) = &unresolved[0];
                return Err(Error::NonConfluent {
                    overlap: overlap.clone(),
                    left: self.show(a),
                    right: self.show(b),
                });
            }
            pending = unresolved;
        }
        unreachable!("completion loop returns from its last pass")
    }

    fn absorb(&mut self, mut pending: Vec<(Path, Path, String)>) -> Result<()> {
        // Deterministic processing order regardless of how the equations were listed.
        pending.sort_by(|x, y| {
            shortlex(&x.0.gens, &y.0.gens)
                .then_with(|| shortlex(&x.1.gens, &y.1.gens))
                .then_with(|| x.0.source.cmp(&y.0.source))
        });
        pending.reverse();
        while let Some((a, b, origin)) = pending.pop() {
            let index = self.rule_index();
            let a = self.reduce_with(&a, &index);
            let b = self.reduce_with(&b, &index);
            let Some(rule) = self.orient(a, b) else { continue };
            if rule.lhs.len() > self.bounds.max_word_length {
                return Err(Error::NonConfluent {
                    overlap: origin,
                    left: self.show(&Path {
                        source: rule.rhs.source,
                        gens: rule.lhs.clone(),
                    }),
                    right: format!("{} (rule longer than max-word-length)", self.show(&rule.rhs)),
                });
            }
            // Rules whose left side contains the new one are re-queued as equations.
            let mut kept = Vec::with_capacity(self.rules.len() + 1);
            for old in std::mem::take(&mut self.rules) {
                let contains = old.lhs.windows(rule.lhs.len()).any(|w| w == rule.lhs.as_slice());
                if contains {
                    let lhs = Path {
                        source: old.rhs.source,
                        gens: old.lhs,
                    };
                    pending.push((lhs, old.rhs, "interreduction".into()));
                } else {
                    kept.push(old);
                }
            }
            kept.push(rule);
            self.rules = kept;
            let index = self.rule_index();
            let rhss: Vec<Path> = self.rules.iter().map(|r| self.reduce_with(&r.rhs, &index)).collect();
            for (r, rhs) in self.rules.iter_mut().zip(rhss) {
                r.rhs = rhs;
            }
        }
        self.rules.sort_by(|x, y| shortlex(&x.lhs, &y.lhs));
        Ok(())
    }

    /// Critical pairs whose two reducts do not join.
    fn critical_pairs(&self) -> Vec<(Path, Path, String)> {
        let index = self.rule_index();
        let mut out = Vec::new();
        for (i, r1) in self.rules.iter().enumerate() {
            for (j, r2) in self.rules.iter().enumerate() {
                let (l1, l2) = (&r1.lhs, &r2.lhs);
                // Proper overlaps: a suffix of l1 is a prefix of l2.
                for k in 1..l1.len().min(l2.len()) {
                    if l1[l1.len() - k..] != l2[..k] {
                        continue;
                    }
                    let source = r1.rhs.source;
                    let mut left = r1.rhs.gens.clone();
                    left.extend_from_slice(&l2[k..]);
                    let mut right = l1[..l1.len() - k].to_vec();
                    right.extend_from_slice(&r2.rhs.gens);
                    let a = self.reduce_with(&Path { source, gens: left }, &index);
                    let b = self.reduce_with(&Path { source, gens: right }, &index);
                    if a != b {
                        let mut word = l1.clone();
                        word.extend_from_slice(&l2[k..]);
                        let overlap = self.show(&Path { source, gens: word });
                        out.push((a, b, overlap));
                    }
                }
                // Containment of l2 in l1.
                if i != j && l2.len() <= l1.len() {
                    for p in 0..=(l1.len() - l2.len()) {
                        if &l1[p..p + l2.len()] != l2.as_slice() {
                            continue;
                        }
                        let source = r1.rhs.source;
                        let mut right = l1[..p].to_vec();
                        right.extend_from_slice(&r2.rhs.gens);
                        right.extend_from_slice(&l1[p + l2.len()..]);
                        let a = self.reduce_with(&r1.rhs, &index);
                        let b = self.reduce_with(&Path { source, gens: right }, &index);
                        if a != b {
                            out.push((a, b, self.show(&Path { source, gens: l1.clone() })));
                        }
                    }
                }
            }
        }
        out
    }

    /// All irreducible words, grouped by length, up to the first empty length.
    ///
    /// Fails with [`Error::Unbounded`] when irreducible words still exist at
    /// `max_word_length + 1`, i.e. the category is infinite or too large for the bound.
    pub fn normal_forms(&self) -> Result<Vec<Path>> {
        let mut all: Vec<Path> = (0..self.objects.len()).map(Path::identity).collect();
        let mut frontier = all.clone();
        let mut length = 0;
        while !frontier.is_empty() {
            length += 1;
            if length > self.bounds.max_word_length {
                return Err(Error::Unbounded(length));
            }
            let mut next = Vec::new();
            for p in &frontier {
                let at = p.target(&self.generators);
                for (g, gen) in self.generators.iter().enumerate() {
                    if gen.source != at {
                        continue;
                    }
                    let mut gens = p.gens.clone();
                    gens.push(g);
                    let reducible = self
                        .rules
                        .iter()
                        .any(|r| r.lhs.len() <= gens.len() && gens.ends_with(&r.lhs));
                    if !reducible {
                        next.push(Path {
                            source: p.source,
                            gens,
                        });
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all.sort_by(|a, b| a.source.cmp(&b.source).then_with(|| shortlex(&a.gens, &b.gens)));
        Ok(all)
    }

    /// The finite category of normal forms, with the map from normal forms to morphisms.
    pub fn to_fin_category(&self) -> Result<(FinCategory, HashMap<Path, MorId>)> {
        let forms = self.normal_forms()?;
        let mut b = CategoryBuilder::new();
        for o in &self.objects {
            b.add_object(o.clone());
        }
        let mut index = HashMap::with_capacity(forms.len());
        for p in &forms {
            let m = if p.is_empty() {
                b.add_identity(p.source, self.show(p))
            } else {
                b.add_morphism(self.show(p), p.source, p.target(&self.generators))
            };
            index.insert(p.clone(), m);
        }
        let rules = self.rule_index();
        let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); self.objects.len()];
        for (i, p) in forms.iter().enumerate() {
            by_source[p.source].push(i);
        }
        for (fi, f) in forms.iter().enumerate() {
            let mid = f.target(&self.generators);
            for &gi in &by_source[mid] {
                let nf = self.reduce_with(&f.then(&forms[gi]), &rules);
                let h = *index.get(&nf).ok_or_else(|| {
                    Error::InvalidCategory(format!("normal form {} missing from enumeration", self.show(&nf)))
                })?;
                b.set_compose(index[&forms[gi]], index[&forms[fi]], h);
            }
        }
        Ok((b.build()?, index))
    }
}

impl fmt::Display for PresentedCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} objects, {} generators, {} relations, {} rules",
            self.objects.len(),
            self.generators.len(),
            self.relations.len(),
            self.rules.len()
        )?;
        for r in &self.rules {
            let lhs = Path {
                source: r.rhs.source,
                gens: r.lhs.clone(),
            };
            writeln!(f, "  {} -> {}", self.show(&lhs), self.show(&r.rhs))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(name: &str, s: ObjId, t: ObjId) -> Generator {
        Generator {
            name: name.into(),
            source: s,
            target: t,
        }
    }

    fn word(source: ObjId, gens: &[GenId]) -> Path {
        Path {
            source,
            gens: gens.to_vec(),
        }
    }

    #[test]
    fn cyclic_group_of_order_three() {
        // one object, generator a, a^3 = 1
        let pc = PresentedCategory::new(
            vec!["o".into()],
            vec![gen("a", 0, 0)],
            vec![(word(0, &[0, 0, 0]), word(0, &[]))],
            RewriteBounds::default(),
        )
        .unwrap();
        let forms = pc.normal_forms().unwrap();
        assert_eq!(forms.len(), 3);
        let (c, _) = pc.to_fin_category().unwrap();
        assert!(crate::fincat::validate_category(&c).is_valid());
    }

    #[test]
    fn completion_adds_critical_pair_rule() {
        // Z/2 x Z/2 presented by a^2 = 1, b^2 = 1, ba = ab: four elements.
        let pc = PresentedCategory::new(
            vec!["o".into()],
            vec![gen("a", 0, 0), gen("b", 0, 0)],
            vec![
                (word(0, &[0, 0]), word(0, &[])),
                (word(0, &[1, 1]), word(0, &[])),
                (word(0, &[0, 1]), word(0, &[1, 0])),
            ],
            RewriteBounds::default(),
        )
        .unwrap();
        assert_eq!(pc.normal_forms().unwrap().len(), 4);
    }

    #[test]
    fn free_monoid_is_unbounded() {
        let pc = PresentedCategory::new(
            vec!["o".into()],
            vec![gen("a", 0, 0)],
            vec![],
            RewriteBounds {
                max_word_length: 5,
                max_completion_passes: 4,
            },
        )
        .unwrap();
        assert!(matches!(pc.normal_forms(), Err(Error::Unbounded(6))));
    }

    #[test]
    fn non_parallel_relation_rejected() {
        let err = PresentedCategory::new(
            vec!["x".into(), "y".into()],
            vec![gen("f", 0, 1)],
            vec![(word(0, &[0]), word(0, &[]))],
            RewriteBounds::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCategory(_)));
    }

    #[test]
    fn pass_limit_reports_critical_pair() {
        // Braid relation aba = bab has no finite shortlex completion.
        let err = PresentedCategory::new(
            vec!["o".into()],
            vec![gen("a", 0, 0), gen("b", 0, 0)],
            vec![(word(0, &[0, 1, 0]), word(0, &[1, 0, 1]))],
            RewriteBounds {
                max_word_length: 12,
                max_completion_passes: 3,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConfluent { .. }), "{err}");
    }
}
