//! End-to-end check of the comparison `hocolim_α L_C(M_α) → L_C(Colim_α M_α)`.

use std::time::Instant;

use serde::Serialize;

use crate::budget::Budget;
use crate::classify::{baut_certify, classification_diagram, classification_map, segal_check, BautReport, ClassificationDiagram, SegalReport};
use crate::error::{Error, Result};
use crate::fincat::{we_classes, MorId, ObjId};
use crate::hocolim_cat::{hocolim_category, DiagramOfRelCats, HocolimCategory, InsertDirection, Variance};
use crate::homology::{we_certificate, WeCertificate};
use crate::rewrite::RewriteBounds;
use crate::sset::{hocolim_bisimplicial, hocolim_key_parts, SimplexKey, SimplicialMap, TruncatedSimplicialSet};

pub const DIRECTION_NOTE: &str = "certified map runs hocolim_a L_C(M_a) -> L_C(Colim_a M_a); \
the theorem states the opposite arrow, and the homology-level certificate does not depend on direction";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub outer: usize,
    pub inner: usize,
    pub hdeg: usize,
    pub direction: InsertDirection,
    pub max_word_length: usize,
    pub max_completion_passes: usize,
    pub budget: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let bounds = RewriteBounds::default();
        VerifyConfig {
            outer: 2,
            inner: 4,
            hdeg: 3,
            direction: InsertDirection::Forward,
            max_word_length: bounds.max_word_length,
            max_completion_passes: bounds.max_completion_passes,
            budget: Budget::default().max_items,
        }
    }
}

impl VerifyConfig {
    pub fn rewrite_bounds(&self) -> RewriteBounds {
        RewriteBounds {
            max_word_length: self.max_word_length,
            max_completion_passes: self.max_completion_passes,
        }
    }

    pub fn budget(&self) -> Budget {
        Budget::new(self.budget)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportHeader {
    pub diagram: String,
    pub variance: Variance,
    pub direction: InsertDirection,
    /// Whether the certified colimit is the opposite of the reported one.
    pub certified_on_opposite: bool,
    pub note: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ColimitSummary {
    pub objects: usize,
    pub morphisms: usize,
    pub marked: usize,
    pub generators: usize,
    pub inserted: usize,
    pub relations: usize,
    pub rules: usize,
    pub completion_passes: usize,
    pub we_classes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub n: usize,
    pub hocolim_nondegenerate: Vec<usize>,
    pub colimit_nondegenerate: Vec<usize>,
    pub certificate: WeCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SegalSummary {
    pub hocolim: Vec<SegalReport>,
    pub colimit: Vec<SegalReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub header: ReportHeader,
    pub bounds: VerifyConfig,
    pub colimit: ColimitSummary,
    pub levels: Vec<LevelReport>,
    pub segal: SegalSummary,
    /// Reported for information; not part of the verdict.
    pub colimit_baut: BautReport,
    pub simplices: usize,
    pub passed: bool,
    pub wall_clock_ms: u64,
}

impl VerificationReport {
    /// The report without its wall-clock field, for byte-level comparisons.
    pub fn to_json_without_clock(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("wall_clock_ms");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// The composite `F_{θ_i} ∘ … ∘ F_{θ_1}` as an index morphism, or the identity at `start`.
fn chain_composites(h: &HocolimCategory, start: ObjId, chain: &[u32]) -> Vec<MorId> {
    let d = &h.core_diagram.index;
    let mut out = vec![d.identity(start)];
    for &t in chain {
        let prev = *out.last().expect("non-empty");
        out.push(d.comp(t as usize, prev));
    }
    out
}

/// Level `n` of the comparison map, assembled from the injections and units of the colimit.
pub fn comparison_map(
    h: &HocolimCategory,
    sources: &[ClassificationDiagram],
    hoc: &TruncatedSimplicialSet,
    target: &ClassificationDiagram,
    n: usize,
) -> Result<SimplicialMap> {
    let d = &h.core_diagram;
    let index = &d.index;
    let core = &h.core;
    let hc = core.category.base();
    let tp = &target.powers[n];
    let twe = &target.we[n];
    let y = target.level(n);

    let lift_chain = |phi: MorId, chain: &[usize]| -> Result<ObjId> {
        let f = &d.arrows[phi];
        let inj = &core.injections[index.target(phi)];
        let image: Vec<usize> = if n == 0 {
            vec![inj.obj(f.obj(chain[0]))]
        } else {
            chain.iter().map(|&g| inj.mor(f.mor(g))).collect()
        };
        tp.object_of_chain(&image)
            .ok_or_else(|| Error::MissingSimplex(format!("chain {image:?} is not an object of Colim^[{n}]")))
    };

    let mut maps = Vec::with_capacity(hoc.bound() + 1);
    for m in 0..=hoc.bound() {
        let mut level = Vec::with_capacity(hoc.count(m));
        for key in hoc.keys(m) {
            let (start, chain, s) = hocolim_key_parts(m, key);
            let src = &sources[start];
            let sp = &src.powers[n];
            let sbase = sp.category.base();
            let m_alpha = d.objects[start].base();
            let skey = src.level(n).key_of(m, s);
            let phis = chain_composites(h, start, chain);
            let image: SimplexKey = if m == 0 {
                let a0 = skey[0] as usize;
                Box::new([lift_chain(phis[0], &sp.chains[a0])? as u32])
            } else {
                let ladders: Vec<MorId> = skey.iter().map(|&w| src.we[n].parent[w as usize]).collect();
                let mut verts = vec![sbase.source(ladders[0])];
                verts.extend(ladders.iter().map(|&u| sbase.target(u)));
                let objs = verts
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| lift_chain(phis[i], &sp.chains[a]))
                    .collect::<Result<Vec<_>>>()?;
                let mut out = Vec::with_capacity(m);
                for i in 1..=m {
                    let theta = chain[i - 1] as usize;
                    let (f_prev, f_cur) = (&d.arrows[phis[i - 1]], &d.arrows[phis[i]]);
                    let inj = &core.injections[index.target(phis[i])];
                    let prev_vertices = sp.chain_vertices(m_alpha, verts[i - 1]);
                    let comps: Vec<MorId> = sp.ladders[ladders[i - 1]]
                        .iter()
                        .zip(&prev_vertices)
                        .map(|(&u, &v)| {
                            let unit = core.units[theta][f_prev.obj(v)];
                            hc.comp(inj.mor(f_cur.mor(u)), unit)
                        })
                        .collect();
                    let lad = tp.morphism_of_ladder(objs[i - 1], objs[i], &comps).ok_or_else(|| {
                        Error::MissingSimplex(format!("ladder {comps:?} of the comparison does not commute"))
                    })?;
                    let w = twe.from_parent[lad]
                        .ok_or_else(|| Error::MissingSimplex(format!("ladder {comps:?} is not marked")))?;
                    out.push(w as u32);
                }
                out.into_boxed_slice()
            };
            let t = y
                .find(m, &image)
                .ok_or_else(|| Error::MissingSimplex(format!("image {image:?} of {m}-simplex {key:?}")))?;
            level.push(t as u32);
        }
        maps.push(level);
    }
    let f = SimplicialMap { maps };
    f.audit(hoc, y).map_err(|e| e.context(format!("comparison map at level {n}")))?;
    Ok(f)
}

/// Builds both sides, the comparison map per outer level, and every certificate.
pub fn verify_theorem(name: &str, diagram: &DiagramOfRelCats, config: &VerifyConfig) -> Result<VerificationReport> {
    let clock = Instant::now();
    let budget = config.budget();
    if config.hdeg + 1 > config.inner {
        return Err(Error::BoundViolation(format!(
            "H_{} needs inner bound at least {}",
            config.hdeg,
            config.hdeg + 1
        )));
    }
    let h = hocolim_category(diagram, config.direction, config.rewrite_bounds())
        .map_err(|e| e.context("building the colimit"))?;
    let core_diagram = &h.core_diagram;
    let sources = core_diagram
        .objects
        .iter()
        .enumerate()
        .map(|(a, m)| {
            classification_diagram(m, config.outer, config.inner, budget)
                .map_err(|e| e.context(format!("L_C of {}", core_diagram.index.object_name(a))))
        })
        .collect::<Result<Vec<_>>>()?;
    let maps = (0..core_diagram.index.num_morphisms())
        .map(|t| {
            let idx = &core_diagram.index;
            classification_map(&core_diagram.arrows[t], &sources[idx.source(t)], &sources[idx.target(t)])
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<_> = sources.iter().map(|s| &s.spaces).collect();
    let map_refs: Vec<_> = maps.iter().collect();
    let hoc = hocolim_bisimplicial(&core_diagram.index, &values, &map_refs, (config.outer, config.inner), budget)
        .map_err(|e| e.context("homotopy colimit of the classification diagrams"))?;
    let target = classification_diagram(&h.core.category, config.outer, config.inner, budget)
        .map_err(|e| e.context("L_C of the colimit"))?;

    let mut simplices = target.spaces.levels.iter().map(|l| l.total()).sum::<usize>();
    simplices += hoc.levels.iter().map(|l| l.total()).sum::<usize>();
    budget.check(simplices, || "building both sides of the comparison".into())?;

    let mut levels = Vec::with_capacity(config.outer + 1);
    for n in 0..=config.outer {
        let f = comparison_map(&h, &sources, &hoc.levels[n], &target, n)?;
        let certificate = we_certificate(&f, &hoc.levels[n], target.level(n), config.hdeg)?;
        levels.push(LevelReport {
            n,
            hocolim_nondegenerate: hoc.levels[n].nondegenerate_counts(),
            colimit_nondegenerate: target.level(n).nondegenerate_counts(),
            certificate,
        });
    }
    let segal = SegalSummary {
        hocolim: (2..=config.outer)
            .map(|n| segal_check(&hoc, n, budget))
            .collect::<Result<Vec<_>>>()?,
        colimit: (2..=config.outer)
            .map(|n| segal_check(&target.spaces, n, budget))
            .collect::<Result<Vec<_>>>()?,
    };
    let colimit_baut = baut_certify(&h.core.category, config.hdeg, config.inner, budget)?;
    let pc = &h.core.presented;
    let colimit = ColimitSummary {
        objects: h.category.base().num_objects(),
        morphisms: h.category.base().num_morphisms(),
        marked: h.category.marked_morphisms().count(),
        generators: pc.generators().len(),
        inserted: h.core.inserted.len(),
        relations: pc.relations().len(),
        rules: pc.rules().len(),
        completion_passes: pc.passes_used(),
        we_classes: we_classes(&h.category).len(),
    };
    let passed = levels.iter().all(|l| l.certificate.passed)
        && segal.hocolim.iter().chain(&segal.colimit).all(|s| s.strict_iso);
    Ok(VerificationReport {
        header: ReportHeader {
            diagram: name.to_string(),
            variance: diagram.variance,
            direction: config.direction,
            certified_on_opposite: h.reversed,
            note: DIRECTION_NOTE,
        },
        bounds: *config,
        colimit,
        levels,
        segal,
        colimit_baut,
        simplices,
        passed,
        wall_clock_ms: clock.elapsed().as_millis() as u64,
    })
}
