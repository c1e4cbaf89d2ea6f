//! The classification diagram `L_C`, Segal maps, and the `BAut^h` model of its low levels.

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fincat::{
    arrow_category_power, aut_h, we_classes, we_subcategory, ArrowPower, FinCategory, MorId, ObjId,
    RelFunctor, RelativeCategory, WeSubcategory,
};
use crate::homology::{simplicial_homology, HomologyGroup};
use crate::sset::{
    classifying_complex, disjoint_union, fiber_product, nerve, pi0, BisimplicialMap, SimplicialMap,
    TruncatedBisimplicialSet, TruncatedSimplicialSet,
};

/// `L_C(M)` truncated to outer levels `0..=N_outer` and inner degrees `0..=N_inner`.
#[derive(Clone, Debug)]
pub struct ClassificationDiagram {
    pub source: RelativeCategory,
    pub outer_bound: usize,
    pub inner_bound: usize,
    pub powers: Vec<ArrowPower>,
    pub we: Vec<WeSubcategory>,
    pub spaces: TruncatedBisimplicialSet,
}

impl ClassificationDiagram {
    pub fn level(&self, n: usize) -> &TruncatedSimplicialSet {
        &self.spaces.levels[n]
    }
}

fn chain_face(m: &FinCategory, n: usize, i: usize, chain: &[usize]) -> Vec<usize> {
    if n == 1 {
        let f = chain[0];
        return vec![if i == 0 { m.target(f) } else { m.source(f) }];
    }
    if i == 0 {
        chain[1..].to_vec()
    } else if i == n {
        chain[..n - 1].to_vec()
    } else {
        let mut v = chain[..i - 1].to_vec();
        v.push(m.comp(chain[i], chain[i - 1]));
        v.extend_from_slice(&chain[i + 1..]);
        v
    }
}

fn chain_degeneracy(m: &FinCategory, n: usize, i: usize, chain: &[usize]) -> Vec<usize> {
    if n == 0 {
        return vec![m.identity(chain[0])];
    }
    let vertex = if i == 0 { m.source(chain[0]) } else { m.target(chain[i - 1]) };
    let mut v = chain[..i].to_vec();
    v.push(m.identity(vertex));
    v.extend_from_slice(&chain[i..]);
    v
}

/// The functor `we(M^[n]) → we(N^[k])` given by acting on chains and ladders.
fn level_functor(
    src: &ArrowPower,
    src_we: &WeSubcategory,
    tgt: &ArrowPower,
    tgt_we: &WeSubcategory,
    on_chain: impl Fn(&[usize]) -> Vec<usize>,
    on_ladder: impl Fn(&[MorId]) -> Vec<MorId>,
) -> Result<RelFunctor> {
    let object_map = src
        .chains
        .iter()
        .map(|ch| {
            let image = on_chain(ch);
            tgt.object_of_chain(&image)
                .ok_or_else(|| Error::InvalidFunctor(format!("chain {image:?} is not an object of M^[{}]", tgt.n)))
        })
        .collect::<Result<Vec<ObjId>>>()?;
    let src_base = src.category.base();
    let morphism_map = src_we
        .parent
        .iter()
        .map(|&p| {
            let image = on_ladder(&src.ladders[p]);
            let (s, t) = (object_map[src_base.source(p)], object_map[src_base.target(p)]);
            let lad = tgt
                .morphism_of_ladder(s, t, &image)
                .ok_or_else(|| Error::InvalidFunctor(format!("ladder {image:?} does not commute")))?;
            tgt_we.from_parent[lad]
                .ok_or_else(|| Error::InvalidFunctor(format!("ladder {image:?} is not levelwise marked")))
        })
        .collect::<Result<Vec<MorId>>>()?;
    Ok(RelFunctor {
        object_map,
        morphism_map,
    })
}

fn nerve_key_map(
    functor: &RelFunctor,
    src: &TruncatedSimplicialSet,
    tgt: &TruncatedSimplicialSet,
) -> Result<SimplicialMap> {
    crate::sset::nerve_map(functor, src, tgt)
}

/// Builds `L_C(M)` with its outer faces and degeneracies.
pub fn classification_diagram(
    m: &RelativeCategory,
    outer: usize,
    inner: usize,
    budget: Budget,
) -> Result<ClassificationDiagram> {
    let mut powers = Vec::with_capacity(outer + 1);
    let mut we = Vec::with_capacity(outer + 1);
    let mut levels = Vec::with_capacity(outer + 1);
    for n in 0..=outer {
        let p = arrow_category_power(m, n, budget)?;
        let w = we_subcategory(&p.category)?;
        levels.push(nerve(&w.category, inner, budget).map_err(|e| e.context(format!("level {n}")))?);
        powers.push(p);
        we.push(w);
    }
    let c = m.base();
    let mut outer_faces = vec![Vec::new()];
    for n in 1..=outer {
        let mut per_i = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let f = level_functor(
                &powers[n],
                &we[n],
                &powers[n - 1],
                &we[n - 1],
                |ch| chain_face(c, n, i, ch),
                |lad| {
                    let mut v = lad.to_vec();
                    v.remove(i);
                    v
                },
            )?;
            per_i.push(nerve_key_map(&f, &levels[n], &levels[n - 1])?);
        }
        outer_faces.push(per_i);
    }
    let mut outer_degens = Vec::with_capacity(outer);
    for n in 0..outer {
        let mut per_i = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let f = level_functor(
                &powers[n],
                &we[n],
                &powers[n + 1],
                &we[n + 1],
                |ch| chain_degeneracy(c, n, i, ch),
                |lad| {
                    let mut v = lad.to_vec();
                    v.insert(i, lad[i]);
                    v
                },
            )?;
            per_i.push(nerve_key_map(&f, &levels[n], &levels[n + 1])?);
        }
        outer_degens.push(per_i);
    }
    Ok(ClassificationDiagram {
        source: m.clone(),
        outer_bound: outer,
        inner_bound: inner,
        powers,
        we,
        spaces: TruncatedBisimplicialSet {
            levels,
            outer_faces,
            outer_degens,
        },
    })
}

/// `L_C(F)` for a functor preserving marked morphisms.
pub fn classification_map(
    functor: &RelFunctor,
    src: &ClassificationDiagram,
    tgt: &ClassificationDiagram,
) -> Result<BisimplicialMap> {
    functor.validate(&src.source, &tgt.source)?;
    if src.outer_bound != tgt.outer_bound {
        return Err(Error::BoundMismatch(src.outer_bound, tgt.outer_bound));
    }
    (0..=src.outer_bound)
        .map(|n| {
            let f = level_functor(
                &src.powers[n],
                &src.we[n],
                &tgt.powers[n],
                &tgt.we[n],
                |ch| {
                    if n == 0 {
                        vec![functor.obj(ch[0])]
                    } else {
                        ch.iter().map(|&g| functor.mor(g)).collect()
                    }
                },
                |lad| lad.iter().map(|&u| functor.mor(u)).collect(),
            )?;
            nerve_key_map(&f, src.level(n), tgt.level(n))
        })
        .collect()
}

/// Outcome of checking that `φ_n: W_n → W_1 ×_{W_0} ⋯ ×_{W_0} W_1` is a strict isomorphism.
#[derive(Clone, Debug, Serialize)]
pub struct SegalReport {
    pub n: usize,
    pub source_counts: Vec<usize>,
    pub target_counts: Vec<usize>,
    pub strict_iso: bool,
    pub counterexample: Option<String>,
}

/// The spine map `W_n → W_1` keeping vertices `i-1, i`.
fn spine_projection(w: &TruncatedBisimplicialSet, n: usize, i: usize) -> SimplicialMap {
    let mut map = SimplicialMap::identity(&w.levels[n]);
    let mut level = n;
    while level > i {
        map = map.then(w.outer_face(level, level));
        level -= 1;
    }
    while level > 1 {
        map = map.then(w.outer_face(level, 0));
        level -= 1;
    }
    map
}

/// Unpacks a nested fiber-product key into its `W_1` components.
fn spine_components(parts: &[TruncatedSimplicialSet], d: usize, x: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(parts.len());
    let mut cur = x;
    for k in (1..parts.len()).rev() {
        let key = parts[k].key_of(d, cur);
        out.push(key[1] as usize);
        cur = key[0] as usize;
    }
    out.push(cur);
    out.reverse();
    out
}

pub fn segal_check(w: &TruncatedBisimplicialSet, n: usize, budget: Budget) -> Result<SegalReport> {
    if n < 2 || n > w.outer_bound() {
        return Err(Error::BoundViolation(format!(
            "Segal map needs 2 <= n <= {}, got {n}",
            w.outer_bound()
        )));
    }
    let w1 = &w.levels[1];
    let target = w.outer_face(1, 0);
    let source = w.outer_face(1, 1);
    let bound = w1.bound();
    let mut parts: Vec<TruncatedSimplicialSet> = vec![w1.clone()];
    let mut last = SimplicialMap::identity(w1);
    for _ in 2..=n {
        let prev = parts.last().expect("non-empty");
        let (p, _, p2) = fiber_product(prev, &last.then(target), w1, source, budget)?;
        parts.push(p);
        last = p2;
    }
    let spines: Vec<SimplicialMap> = (1..=n).map(|i| spine_projection(w, n, i)).collect();
    let wn = &w.levels[n];
    let pn = parts.last().expect("non-empty");
    let describe_w1 = |d: usize, idx: usize| format!("{:?}", w1.key_of(d, idx));
    let mut report = SegalReport {
        n,
        source_counts: wn.counts(),
        target_counts: pn.counts(),
        strict_iso: false,
        counterexample: None,
    };
    let mut phi: Vec<Vec<u32>> = Vec::with_capacity(bound + 1);
    for d in 0..=bound {
        let mut hit = vec![None; pn.count(d)];
        let mut images = Vec::with_capacity(wn.count(d));
        for x in 0..wn.count(d) {
            let mut cur = spines[0].apply(d, x);
            for (k, rho) in spines.iter().enumerate().skip(1) {
                let next = parts[k].find(d, &[cur as u32, rho.apply(d, x) as u32]);
                let Some(next) = next else {
                    report.counterexample = Some(format!(
                        "{d}-simplex {:?} of W_{n} has a spine that does not match over W_0",
                        wn.key_of(d, x)
                    ));
                    return Ok(report);
                };
                cur = next;
            }
            if let Some(prev) = hit[cur] {
                report.counterexample = Some(format!(
                    "{d}-simplices {:?} and {:?} of W_{n} share a spine",
                    wn.key_of(d, prev),
                    wn.key_of(d, x)
                ));
                return Ok(report);
            }
            hit[cur] = Some(x);
            images.push(cur as u32);
        }
        if let Some(missing) = hit.iter().position(Option::is_none) {
            let comps: Vec<String> = spine_components(&parts, d, missing)
                .into_iter()
                .map(|c| describe_w1(d, c))
                .collect();
            report.counterexample = Some(format!(
                "{d}-simplex ({}) of the iterated fiber product has no preimage in W_{n}",
                comps.join(", ")
            ));
            return Ok(report);
        }
        phi.push(images);
    }
    let phi = SimplicialMap { maps: phi };
    if let Err(e) = phi.audit(wn, pn) {
        report.counterexample = Some(e.to_string());
        return Ok(report);
    }
    report.strict_iso = true;
    Ok(report)
}

/// `∐_{⟨x⟩} BAut^h(x)` over the weak-equivalence classes of `M` (level 0) or `M^[1]` (level 1).
pub fn baut_model(m: &RelativeCategory, level: usize, bound: usize, budget: Budget) -> Result<TruncatedSimplicialSet> {
    let base = match level {
        0 => m.clone(),
        1 => arrow_category_power(m, 1, budget)?.category,
        _ => return Err(Error::BoundViolation(format!("BAut model is defined for levels 0 and 1, got {level}"))),
    };
    let parts = we_classes(&base)
        .iter()
        .map(|class| classifying_complex(&aut_h(&base, class[0]), bound, budget))
        .collect::<Result<Vec<_>>>()?;
    disjoint_union(&parts, bound)
}

#[derive(Clone, Debug, Serialize)]
pub struct BautLevel {
    pub level: usize,
    pub classes: usize,
    pub components_diagram: usize,
    pub components_model: usize,
    pub pi0_bijective: bool,
    pub homology_diagram: Vec<HomologyGroup>,
    pub homology_model: Vec<HomologyGroup>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BautReport {
    pub degree_bound: usize,
    pub levels: Vec<BautLevel>,
    pub passed: bool,
}

/// Compares levels 0 and 1 of `L_C(M)` with the `BAut^h` model: components and `H_k`, `k <= K`.
pub fn baut_certify(m: &RelativeCategory, k: usize, inner: usize, budget: Budget) -> Result<BautReport> {
    if k + 1 > inner {
        return Err(Error::BoundViolation(format!("H_{k} needs inner bound at least {}", k + 1)));
    }
    let mut levels = Vec::with_capacity(2);
    for level in 0..=1 {
        let power = arrow_category_power(m, level, budget)?;
        let we = we_subcategory(&power.category)?;
        let w = nerve(&we.category, inner, budget)?;
        let model = baut_model(m, level, inner, budget)?;
        let classes = we_classes(&power.category);
        let comps = pi0(&w);
        let mut seen = vec![false; comps.count];
        let mut injective = true;
        for class in &classes {
            let c = comps.label[class[0]];
            injective &= !seen[c] && class.iter().all(|&x| comps.label[x] == c);
            seen[c] = true;
        }
        let model_comps = pi0(&model).count;
        let pi0_bijective = injective && seen.iter().all(|&s| s) && model_comps == classes.len();
        let homology_diagram = simplicial_homology(&w, k)?;
        let homology_model = simplicial_homology(&model, k)?;
        let passed = pi0_bijective && homology_diagram == homology_model;
        levels.push(BautLevel {
            level,
            classes: classes.len(),
            components_diagram: comps.count,
            components_model: model_comps,
            pi0_bijective,
            homology_diagram,
            homology_model,
            passed,
        });
    }
    Ok(BautReport {
        degree_bound: k,
        passed: levels.iter().all(|l| l.passed),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{CategoryBuilder, FinMonoid};

    fn arrow(marked: bool) -> RelativeCategory {
        let mut b = CategoryBuilder::new();
        let x = b.add_object_with_identity("x");
        let y = b.add_object_with_identity("y");
        b.add_morphism("w", x, y);
        let base = b.build().unwrap();
        if marked {
            RelativeCategory::maximal(base)
        } else {
            RelativeCategory::minimal(base)
        }
    }

    fn z2() -> RelativeCategory {
        RelativeCategory::maximal(FinCategory::from_monoid(&FinMonoid::cyclic(2), "*"))
    }

    #[test]
    fn point_levels_are_points() {
        let lc = classification_diagram(&RelativeCategory::maximal(FinCategory::terminal()), 2, 3, Budget::default()).unwrap();
        for n in 0..=2 {
            assert_eq!(lc.level(n).nondegenerate_counts(), vec![1, 0, 0, 0]);
        }
        lc.spaces.audit().unwrap();
    }

    #[test]
    fn unmarked_arrow_levels_are_discrete() {
        let lc = classification_diagram(&arrow(false), 2, 2, Budget::default()).unwrap();
        assert_eq!(lc.level(0).nondegenerate_counts(), vec![2, 0, 0]);
        assert_eq!(lc.level(1).nondegenerate_counts(), vec![3, 0, 0]);
        assert_eq!(lc.level(2).nondegenerate_counts(), vec![4, 0, 0]);
        lc.spaces.audit().unwrap();
    }

    #[test]
    fn segal_on_small_cases() {
        for m in [arrow(true), arrow(false), z2()] {
            let lc = classification_diagram(&m, 3, 3, Budget::default()).unwrap();
            for n in 2..=3 {
                let r = segal_check(&lc.spaces, n, Budget::default()).unwrap();
                assert!(r.strict_iso, "{r:?}");
            }
        }
    }

    #[test]
    fn corrupted_level_gives_counterexample() {
        let lc = classification_diagram(&arrow(true), 2, 2, Budget::default()).unwrap();
        let w2 = lc.level(2);
        let victim = (0..w2.count(1)).find(|&e| !w2.is_degenerate(1, e)).unwrap();
        let broken = lc.spaces.with_simplex_removed(2, 1, victim).unwrap();
        let r = segal_check(&broken, 2, Budget::default()).unwrap();
        assert!(!r.strict_iso);
        assert!(r.counterexample.unwrap().contains("no preimage"));
    }

    #[test]
    fn baut_on_z2_shows_torsion() {
        let r = baut_certify(&z2(), 3, 4, Budget::default()).unwrap();
        assert!(r.passed, "{r:?}");
        let z2h = HomologyGroup::with_torsion(0, &[2]);
        assert_eq!(r.levels[0].homology_diagram[1], z2h);
        assert_eq!(r.levels[0].homology_model[3], z2h);
    }

    #[test]
    fn baut_marked_arrow_is_one_point() {
        let model = baut_model(&arrow(true), 0, 3, Budget::default()).unwrap();
        assert_eq!(pi0(&model).count, 1);
        let r = baut_certify(&arrow(true), 2, 3, Budget::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.levels[0].homology_diagram[0], HomologyGroup::free(1));
    }

    #[test]
    fn functor_induces_map() {
        let m = arrow(true);
        let pt = RelativeCategory::maximal(FinCategory::terminal());
        let to_pt = RelFunctor {
            object_map: vec![0, 0],
            morphism_map: vec![0; m.base().num_morphisms()],
        };
        let lm = classification_diagram(&m, 2, 2, Budget::default()).unwrap();
        let lp = classification_diagram(&pt, 2, 2, Budget::default()).unwrap();
        let maps = classification_map(&to_pt, &lm, &lp).unwrap();
        for (n, f) in maps.iter().enumerate() {
            f.audit(lm.level(n), lp.level(n)).unwrap();
        }
        let id = classification_map(&RelFunctor::identity(m.base()), &lm, &lm).unwrap();
        for (n, f) in id.iter().enumerate() {
            assert_eq!(*f, SimplicialMap::identity(lm.level(n)));
        }
    }
}
