//! Homotopy colimits of diagrams of relative categories as presented relative categories.
//!
//! The core construction inserts one marked generator `x_α → y_β` for each arrow
//! `θ: α → β` and each pair with a marked witness (`F x → y` for left variance,
//! `y → G x` for right variance). Relations: the composition tables of the `M_α`,
//! identification of composable inserted pairs, and the commuting squares between
//! inserted generators and internal morphisms. The opposite orientation is the
//! opposite of the core construction applied to the opposite diagram.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fincat::{
    two_out_of_three_closure, validate_category, FinCategory, MorId, ObjId, RelFunctor, RelativeCategory,
};
use crate::rewrite::{Generator, Path, PresentedCategory, RewriteBounds};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variance {
    Left,
    Right,
}

impl Variance {
    pub fn flip(self) -> Self {
        match self {
            Variance::Left => Variance::Right,
            Variance::Right => Variance::Left,
        }
    }
}

/// Orientation of inserted arrows: `Forward` runs `x_α → x_β`, `PaperLiteral` runs `x_β → x_α`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InsertDirection {
    #[default]
    Forward,
    PaperLiteral,
}

impl std::str::FromStr for InsertDirection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "forward" => Ok(InsertDirection::Forward),
            "paper-literal" => Ok(InsertDirection::PaperLiteral),
            other => Err(format!("unknown insert direction `{other}` (expected forward or paper-literal)")),
        }
    }
}

/// A functor from a finite index category to relative categories.
#[derive(Clone, Debug)]
pub struct DiagramOfRelCats {
    pub index: FinCategory,
    pub objects: Vec<RelativeCategory>,
    /// One functor per morphism of the index category, identities included.
    pub arrows: Vec<RelFunctor>,
    pub variance: Variance,
}

impl DiagramOfRelCats {
    /// Arrow functors preserve markings, identities go to identities, composites to composites.
    pub fn validate(&self) -> Result<()> {
        let d = &self.index;
        validate_category(d).into_result()?;
        if self.objects.len() != d.num_objects() || self.arrows.len() != d.num_morphisms() {
            return Err(Error::NonFunctorial("diagram does not cover the index category".into()));
        }
        for (t, f) in self.arrows.iter().enumerate() {
            f.validate(&self.objects[d.source(t)], &self.objects[d.target(t)])
                .map_err(|e| e.context(format!("arrow {}", d.name(t))))?;
        }
        for x in 0..d.num_objects() {
            if self.arrows[d.identity(x)] != RelFunctor::identity(self.objects[x].base()) {
                return Err(Error::NonFunctorial(format!(
                    "identity of {} is not sent to the identity functor",
                    d.object_name(x)
                )));
            }
        }
        let mut table: Vec<_> = d.composition_table().iter().map(|(&k, &v)| (k, v)).collect();
        table.sort_unstable();
        for ((g, f), h) in table {
            if self.arrows[f].then(&self.arrows[g]) != self.arrows[h] {
                return Err(Error::NonFunctorial(format!(
                    "{} . {} is not sent to the composite functor",
                    d.name(g),
                    d.name(f)
                )));
            }
        }
        Ok(())
    }

    /// Opposite categories at every object, same functors, flipped variance.
    pub fn opposite(&self) -> DiagramOfRelCats {
        DiagramOfRelCats {
            index: self.index.clone(),
            objects: self.objects.iter().map(RelativeCategory::opposite).collect(),
            arrows: self.arrows.clone(),
            variance: self.variance.flip(),
        }
    }

    fn functor(&self, theta: MorId) -> &RelFunctor {
        &self.arrows[theta]
    }
}

/// How a site is realized in the colimit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "morphism")]
pub enum Resolution {
    /// A fresh marked generator.
    Generator,
    /// Identified with an existing marked morphism `x → y` of `M_α` (only when `α = β`).
    Existing(MorId),
    /// Not realized: a marked morphism already relates the pair, but none runs `x → y`.
    Skipped,
}

/// A pair `(x_α, y_β)` qualifying for insertion along `θ`, with its recorded witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InsertionSite {
    pub theta: MorId,
    pub source: ObjId,
    pub target: ObjId,
    /// Marked `F x → y` (left) or `y → G x` (right) in the target category.
    pub witness: MorId,
    pub resolution: Resolution,
}

/// First marked morphism in `hom`, preferring an identity.
fn preferred_marked(m: &RelativeCategory, hom: &[MorId]) -> Option<MorId> {
    let c = m.base();
    hom.iter()
        .copied()
        .filter(|&f| m.is_marked(f))
        .min_by_key(|&f| (!c.is_identity(f), f))
}

/// Every qualifying `(θ, x_α, y_β)` in order of `θ`, then `x`, then `y`.
pub fn insertion_sites(diagram: &DiagramOfRelCats) -> Vec<InsertionSite> {
    let d = &diagram.index;
    let mut sites = Vec::new();
    for theta in 0..d.num_morphisms() {
        let (a, b) = (d.source(theta), d.target(theta));
        let (ma, mb) = (&diagram.objects[a], &diagram.objects[b]);
        let f = diagram.functor(theta);
        for x in 0..ma.base().num_objects() {
            let fx = f.obj(x);
            for y in 0..mb.base().num_objects() {
                let hom = match diagram.variance {
                    Variance::Left => mb.base().hom(fx, y),
                    Variance::Right => mb.base().hom(y, fx),
                };
                let Some(witness) = preferred_marked(mb, hom) else { continue };
                let resolution = if a != b {
                    Resolution::Generator
                } else {
                    let existing = preferred_marked(ma, ma.base().hom(x, y));
                    match (d.is_identity(theta), diagram.variance, existing) {
                        (true, Variance::Left, _) => Resolution::Existing(witness),
                        (_, _, Some(e)) => Resolution::Existing(e),
                        (true, Variance::Right, None) => Resolution::Skipped,
                        (false, _, None) => Resolution::Generator,
                    }
                };
                sites.push(InsertionSite {
                    theta,
                    source: x,
                    target: y,
                    witness,
                    resolution,
                });
            }
        }
    }
    sites
}

/// The core construction, before any reversal.
#[derive(Clone, Debug)]
pub struct CoreColimit {
    pub presented: PresentedCategory,
    pub category: RelativeCategory,
    pub normal_forms: HashMap<Path, MorId>,
    /// Object of the colimit for `(α, x)`.
    pub object_offsets: Vec<usize>,
    pub injections: Vec<RelFunctor>,
    pub sites: Vec<InsertionSite>,
    /// `units[θ][x]`: the morphism `x_α → (F_θ x)_β` from the identity-witness site.
    pub units: Vec<Vec<MorId>>,
    pub inserted: Vec<MorId>,
}

/// The colimit together with the construction it was read off from.
#[derive(Clone, Debug)]
pub struct HocolimCategory {
    pub direction: InsertDirection,
    pub variance: Variance,
    /// `true` when `category` is the opposite of `core.category`.
    pub reversed: bool,
    pub core_diagram: DiagramOfRelCats,
    pub core: CoreColimit,
    pub category: RelativeCategory,
}

impl HocolimCategory {
    /// The injections `M_α → Colim`. Under reversal they are the same index maps on opposites.
    pub fn injections(&self) -> &[RelFunctor] {
        &self.core.injections
    }
}

struct Builder<'a> {
    diagram: &'a DiagramOfRelCats,
    offsets: Vec<usize>,
    /// Generator of each non-identity morphism, per object of the index.
    internal: Vec<Vec<Option<usize>>>,
    generators: Vec<Generator>,
    relations: Vec<(Path, Path)>,
    site_of: HashMap<(MorId, ObjId, ObjId), usize>,
    site_gen: Vec<Option<usize>>,
}

impl Builder<'_> {
    fn object(&self, alpha: ObjId, x: ObjId) -> ObjId {
        self.offsets[alpha] + x
    }

    fn internal_path(&self, alpha: ObjId, f: MorId) -> Path {
        let c = self.diagram.objects[alpha].base();
        match self.internal[alpha][f] {
            Some(g) => Path {
                source: self.object(alpha, c.source(f)),
                gens: vec![g],
            },
            None => Path::identity(self.object(alpha, c.source(f))),
        }
    }

    fn site_path(&self, sites: &[InsertionSite], s: usize) -> Option<Path> {
        let site = &sites[s];
        let alpha = self.diagram.index.source(site.theta);
        match site.resolution {
            Resolution::Generator => {
                let g = self.site_gen[s].expect("generator sites have generators");
                Some(Path {
                    source: self.object(alpha, site.source),
                    gens: vec![g],
                })
            }
            Resolution::Existing(e) => Some(self.internal_path(alpha, e)),
            Resolution::Skipped => None,
        }
    }
}

fn core_colimit(diagram: &DiagramOfRelCats, bounds: RewriteBounds) -> Result<CoreColimit> {
    diagram.validate()?;
    let d = &diagram.index;
    let mut offsets = Vec::with_capacity(d.num_objects());
    let mut objects = Vec::new();
    for (alpha, m) in diagram.objects.iter().enumerate() {
        offsets.push(objects.len());
        for x in m.base().objects() {
            objects.push(format!("{}/{}", d.object_name(alpha), x));
        }
    }
    let mut b = Builder {
        diagram,
        offsets,
        internal: Vec::new(),
        generators: Vec::new(),
        relations: Vec::new(),
        site_of: HashMap::new(),
        site_gen: Vec::new(),
    };
    for (alpha, m) in diagram.objects.iter().enumerate() {
        let c = m.base();
        let mut ids = vec![None; c.num_morphisms()];
        for f in 0..c.num_morphisms() {
            if !c.is_identity(f) {
                ids[f] = Some(b.generators.len());
                b.generators.push(Generator {
                    name: format!("{}/{}", d.object_name(alpha), c.name(f)),
                    source: b.object(alpha, c.source(f)),
                    target: b.object(alpha, c.target(f)),
                });
            }
        }
        b.internal.push(ids);
    }
    // (a) composition tables
    for (alpha, m) in diagram.objects.iter().enumerate() {
        let c = m.base();
        let mut table: Vec<_> = c.composition_table().iter().map(|(&k, &v)| (k, v)).collect();
        table.sort_unstable();
        for ((g, f), h) in table {
            if c.is_identity(g) || c.is_identity(f) {
                continue;
            }
            let lhs = b.internal_path(alpha, f).then(&b.internal_path(alpha, g));
            b.relations.push((lhs, b.internal_path(alpha, h)));
        }
    }
    // inserted generators; (b) is the `Existing` resolution
    let sites = insertion_sites(diagram);
    for (s, site) in sites.iter().enumerate() {
        b.site_of.insert((site.theta, site.source, site.target), s);
        let gen = if site.resolution == Resolution::Generator {
            let (a, bt) = (d.source(site.theta), d.target(site.theta));
            let name = format!(
                "{}[{}>{}]",
                d.name(site.theta),
                diagram.objects[a].base().object_name(site.source),
                diagram.objects[bt].base().object_name(site.target)
            );
            b.generators.push(Generator {
                name,
                source: b.object(a, site.source),
                target: b.object(bt, site.target),
            });
            Some(b.generators.len() - 1)
        } else {
            None
        };
        b.site_gen.push(gen);
    }
    let generator_sites: Vec<usize> = (0..sites.len()).filter(|&s| b.site_gen[s].is_some()).collect();
    // (c) composable inserted pairs
    for &s1 in &generator_sites {
        for &s2 in &generator_sites {
            let (t1, t2) = (&sites[s1], &sites[s2]);
            if d.target(t1.theta) != d.source(t2.theta) || t1.target != t2.source {
                continue;
            }
            let composite = d.comp(t2.theta, t1.theta);
            let lhs = b.site_path(&sites, s1).unwrap().then(&b.site_path(&sites, s2).unwrap());
            let rhs = if d.is_identity(composite) {
                let m = diagram.objects[d.source(t1.theta)].base();
                let f2 = diagram.functor(t2.theta);
                match diagram.variance {
                    Variance::Left => Some(b.internal_path(
                        d.source(t1.theta),
                        m.comp(t2.witness, f2.mor(t1.witness)),
                    )),
                    Variance::Right => None,
                }
            } else {
                b.site_of
                    .get(&(composite, t1.source, t2.target))
                    .and_then(|&s| b.site_path(&sites, s))
            };
            if let Some(rhs) = rhs {
                b.relations.push((lhs, rhs));
            }
        }
    }
    // (n) squares between inserted generators and internal morphisms
    for &s1 in &generator_sites {
        for &s2 in &generator_sites {
            let (t1, t2) = (&sites[s1], &sites[s2]);
            if t1.theta != t2.theta {
                continue;
            }
            let theta = t1.theta;
            let (a, bt) = (d.source(theta), d.target(theta));
            let (ma, mb) = (diagram.objects[a].base(), diagram.objects[bt].base());
            let func = diagram.functor(theta);
            for &f in ma.hom(t1.source, t2.source) {
                for &g in mb.hom(t1.target, t2.target) {
                    let commutes = match diagram.variance {
                        Variance::Left => mb.comp(t2.witness, func.mor(f)) == mb.comp(g, t1.witness),
                        Variance::Right => mb.comp(func.mor(f), t1.witness) == mb.comp(t2.witness, g),
                    };
                    if commutes && !(s1 == s2 && ma.is_identity(f) && mb.is_identity(g)) {
                        let lhs = b.internal_path(a, f).then(&b.site_path(&sites, s2).unwrap());
                        let rhs = b.site_path(&sites, s1).unwrap().then(&b.internal_path(bt, g));
                        b.relations.push((lhs, rhs));
                    }
                }
            }
        }
    }
    let presented = PresentedCategory::new(objects, b.generators.clone(), b.relations.clone(), bounds)
        .map_err(|e| e.context("completing the colimit presentation"))?;
    let (base, normal_forms) = presented.to_fin_category()?;
    let nf = |p: &Path| normal_forms[&presented.normal_form(p)];

    let mut marked = vec![false; base.num_morphisms()];
    let mut injections = Vec::with_capacity(d.num_objects());
    for (alpha, m) in diagram.objects.iter().enumerate() {
        let c = m.base();
        let object_map = (0..c.num_objects()).map(|x| b.object(alpha, x)).collect();
        let morphism_map: Vec<MorId> = (0..c.num_morphisms()).map(|f| nf(&b.internal_path(alpha, f))).collect();
        for f in m.marked_morphisms() {
            marked[morphism_map[f]] = true;
        }
        injections.push(RelFunctor {
            object_map,
            morphism_map,
        });
    }
    let mut inserted = Vec::new();
    for &s in &generator_sites {
        let h = nf(&b.site_path(&sites, s).unwrap());
        marked[h] = true;
        inserted.push(h);
    }
    let category = two_out_of_three_closure(&RelativeCategory::from_marking_unchecked(base, marked));
    let category = RelativeCategory::new(category.base().clone(), category.marking().to_vec())?;

    let mut units = Vec::with_capacity(d.num_morphisms());
    for theta in 0..d.num_morphisms() {
        let a = d.source(theta);
        let func = diagram.functor(theta);
        let row = (0..diagram.objects[a].base().num_objects())
            .map(|x| {
                let s = b.site_of.get(&(theta, x, func.obj(x))).copied();
                s.and_then(|s| b.site_path(&sites, s)).map(|p| nf(&p)).ok_or_else(|| {
                    Error::InvalidCategory(format!(
                        "no unit for {} at {}",
                        d.name(theta),
                        diagram.objects[a].base().object_name(x)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        units.push(row);
    }
    for (alpha, f) in injections.iter().enumerate() {
        f.validate(&diagram.objects[alpha], &category)
            .map_err(|e| e.context(format!("injection of {}", d.object_name(alpha))))?;
    }
    Ok(CoreColimit {
        presented,
        category,
        normal_forms,
        object_offsets: b.offsets,
        injections,
        sites,
        units,
        inserted,
    })
}

/// Builds the homotopy colimit of `diagram` with the chosen orientation of inserted arrows.
pub fn hocolim_category(
    diagram: &DiagramOfRelCats,
    direction: InsertDirection,
    bounds: RewriteBounds,
) -> Result<HocolimCategory> {
    let reversed = direction == InsertDirection::PaperLiteral;
    let core_diagram = if reversed { diagram.opposite() } else { diagram.clone() };
    let core = core_colimit(&core_diagram, bounds)?;
    let category = if reversed {
        core.category.opposite()
    } else {
        core.category.clone()
    };
    Ok(HocolimCategory {
        direction,
        variance: diagram.variance,
        reversed,
        core_diagram,
        core,
        category,
    })
}

/// The injections and, per arrow `θ`, the units `ι_α x → ι_β F_θ x` in the core colimit.
pub fn canonical_cocone(h: &HocolimCategory) -> (&[RelFunctor], &[Vec<MorId>]) {
    (&h.core.injections, &h.core.units)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{is_two_out_of_three_closed, we_classes, CategoryBuilder};

    fn point() -> RelativeCategory {
        RelativeCategory::maximal(FinCategory::terminal())
    }

    fn span_index() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let a = b.add_object_with_identity("a");
        let l = b.add_object_with_identity("b");
        let r = b.add_object_with_identity("c");
        b.add_morphism("f", a, l);
        b.add_morphism("g", a, r);
        b.build().unwrap()
    }

    fn const_diagram(index: FinCategory) -> DiagramOfRelCats {
        let n = index.num_morphisms();
        DiagramOfRelCats {
            objects: vec![point(); index.num_objects()],
            arrows: vec![RelFunctor::identity(&FinCategory::terminal()); n],
            index,
            variance: Variance::Left,
        }
    }

    #[test]
    fn terminal_index_adds_nothing() {
        let h = hocolim_category(&const_diagram(FinCategory::terminal()), InsertDirection::Forward, RewriteBounds::default())
            .unwrap();
        assert_eq!(h.category.base().num_objects(), 1);
        assert_eq!(h.category.base().num_morphisms(), 1);
        assert!(h.core.inserted.is_empty());
    }

    #[test]
    fn pushout_of_points_is_one_class() {
        let h = hocolim_category(&const_diagram(span_index()), InsertDirection::Forward, RewriteBounds::default())
            .unwrap();
        let c = h.category.base();
        assert_eq!(c.num_objects(), 3);
        assert_eq!(h.core.inserted.len(), 2);
        assert_eq!(we_classes(&h.category).len(), 1);
        assert!(is_two_out_of_three_closed(&h.category));
        for f in 0..c.num_morphisms() {
            assert!(h.category.is_marked(f));
        }
    }

    #[test]
    fn literal_direction_reverses_arrows() {
        let fwd = hocolim_category(&const_diagram(span_index()), InsertDirection::Forward, RewriteBounds::default())
            .unwrap();
        let lit = hocolim_category(&const_diagram(span_index()), InsertDirection::PaperLiteral, RewriteBounds::default())
            .unwrap();
        let src = |h: &HocolimCategory, f: MorId| h.category.base().source(f);
        let tgt = |h: &HocolimCategory, f: MorId| h.category.base().target(f);
        for (&a, &b) in fwd.core.inserted.iter().zip(&lit.core.inserted) {
            assert_eq!(src(&fwd, a), tgt(&lit, b));
            assert_eq!(tgt(&fwd, a), src(&lit, b));
        }
    }

    #[test]
    fn identity_functor_sites_are_identity_witnesses() {
        let mut b = CategoryBuilder::new();
        let x = b.add_object_with_identity("x");
        let y = b.add_object_with_identity("y");
        b.add_morphism("u", x, y);
        let m = RelativeCategory::minimal(b.build().unwrap());
        let mut ib = CategoryBuilder::new();
        let a = ib.add_object_with_identity("a");
        let c = ib.add_object_with_identity("c");
        ib.add_morphism("t", a, c);
        let index = ib.build().unwrap();
        let id = RelFunctor::identity(m.base());
        let diagram = DiagramOfRelCats {
            index,
            objects: vec![m.clone(), m.clone()],
            arrows: vec![id.clone(), id.clone(), id],
            variance: Variance::Left,
        };
        let t = diagram.index.morphism_by_name("t").unwrap();
        let pairs: Vec<(ObjId, ObjId)> = insertion_sites(&diagram)
            .into_iter()
            .filter(|s| s.theta == t)
            .map(|s| (s.source, s.target))
            .collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn functor_to_point_pairs_everything() {
        let mut b = CategoryBuilder::new();
        b.add_object_with_identity("x");
        b.add_object_with_identity("y");
        let m = RelativeCategory::minimal(b.build().unwrap());
        let mut ib = CategoryBuilder::new();
        let a = ib.add_object_with_identity("a");
        let c = ib.add_object_with_identity("c");
        ib.add_morphism("t", a, c);
        let diagram = DiagramOfRelCats {
            index: ib.build().unwrap(),
            objects: vec![m.clone(), point()],
            arrows: vec![
                RelFunctor::identity(m.base()),
                RelFunctor::identity(point().base()),
                RelFunctor {
                    object_map: vec![0, 0],
                    morphism_map: vec![0, 0],
                },
            ],
            variance: Variance::Left,
        };
        let t = diagram.index.morphism_by_name("t").unwrap();
        let n = insertion_sites(&diagram).iter().filter(|s| s.theta == t).count();
        assert_eq!(n, 2);
    }

    #[test]
    fn invalid_diagram_is_rejected() {
        let mut d = const_diagram(span_index());
        d.arrows[0] = RelFunctor {
            object_map: vec![0],
            morphism_map: vec![0],
        };
        d.objects[0] = RelativeCategory::maximal(FinCategory::discrete(&["p", "q"]));
        assert!(d.validate().is_err());
    }
}
