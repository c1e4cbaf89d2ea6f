use std::collections::BTreeSet;

use relcat_core::fincat::{is_two_out_of_three_closed, two_out_of_three_closure};
use relcat_core::harness::corpus;
use relcat_core::harness::{parse_diagram_file, parse_relcat};
use relcat_core::hocolim_cat::{
    hocolim_category, insertion_sites, DiagramOfRelCats, InsertDirection, Resolution, Variance,
};
use relcat_core::rewrite::RewriteBounds;
use relcat_core::Error;

fn sites_of(d: &DiagramOfRelCats) -> BTreeSet<(usize, usize, usize)> {
    insertion_sites(d).iter().map(|s| (s.theta, s.source, s.target)).collect()
}

#[test]
fn endo_index_arrow_reuses_existing_equivalence() {
    let d = corpus::diagram("endo.diagram").unwrap();
    let sites = insertion_sites(&d);
    assert!(!sites.is_empty());
    assert!(sites.iter().all(|s| matches!(s.resolution, Resolution::Existing(_))));
    let h = hocolim_category(&d, InsertDirection::Forward, RewriteBounds::default()).unwrap();
    assert!(h.core.inserted.is_empty());
    assert_eq!(h.category.base().num_morphisms(), d.objects[0].base().num_morphisms());
}

#[test]
fn composable_inserted_words_agree() {
    let mut d = corpus::diagram("chain.diagram").unwrap();
    for variance in [Variance::Left, Variance::Right] {
        d.variance = variance;
        let h = hocolim_category(&d, InsertDirection::Forward, RewriteBounds::default()).unwrap();
        let idx = &d.index;
        let [f, g, gf] = ["f", "g", "h"].map(|n| idx.morphism_by_name(n).unwrap());
        let c = h.core.category.base();
        let units = &h.core.units;
        let two_step = c.comp(units[g][d.arrows[f].obj(0)], units[f][0]);
        assert_eq!(two_step, units[gf][0], "{variance:?}");
    }
}

#[test]
fn output_marking_is_a_closure_fixpoint() {
    for (name, _) in corpus::DIAGRAMS {
        let d = corpus::diagram(name).unwrap();
        for dir in [InsertDirection::Forward, InsertDirection::PaperLiteral] {
            let h = match hocolim_category(&d, dir, RewriteBounds::default()) {
                Ok(h) => h,
                Err(Error::Context { source, .. }) if matches!(*source, Error::Unbounded(_)) => continue,
                Err(Error::Unbounded(_)) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            assert!(is_two_out_of_three_closed(&h.category), "{name}");
            assert_eq!(two_out_of_three_closure(&h.category).marking(), h.category.marking(), "{name}");
        }
    }
}

#[test]
fn variances_give_mirror_sites() {
    for (name, _) in corpus::DIAGRAMS {
        let mut d = corpus::diagram(name).unwrap();
        for v in [Variance::Left, Variance::Right] {
            d.variance = v;
            assert_eq!(sites_of(&d), sites_of(&d.opposite()), "{name} {v:?}");
        }
    }
}

#[test]
fn corpus_round_trips() {
    for (name, text) in corpus::RELCATS {
        let m = parse_relcat(text).unwrap();
        let again = relcat_core::harness::serialize_relcat(&m);
        let m2 = parse_relcat(&again).unwrap();
        assert_eq!(relcat_core::harness::serialize_relcat(&m2), again, "{name}");
        assert_eq!(m.base().num_morphisms(), m2.base().num_morphisms(), "{name}");
        assert_eq!(m.marking(), m2.marking(), "{name}");
    }
    for (name, text) in corpus::DIAGRAMS {
        let d = parse_diagram_file(text).unwrap();
        assert_eq!(parse_diagram_file(&d.to_text()).unwrap().to_text(), d.to_text(), "{name}");
    }
}

#[test]
fn pushout_apex_counts() {
    let m = corpus::relcat("pushout_apex.relcat").unwrap();
    assert_eq!(m.base().num_objects(), 3);
    assert_eq!(m.base().num_morphisms(), 5);
    assert_eq!(m.marked_morphisms().count(), 4);
}

#[test]
fn unclosed_marking_names_pair() {
    let text = "[objects]\nx\ny\nz\n[morphisms]\nf : x -> y\ng : y -> z\nh : x -> z\n[compose]\ng . f = h\n[weq]\nf\ng\n";
    let err = parse_relcat(text).unwrap_err();
    assert!(matches!(err, Error::MarkingNotClosed { .. }), "{err}");
    assert!(err.to_string().contains("g . f = h"));
}

#[test]
fn unmapped_morphism_is_rejected() {
    let err = parse_diagram_file(
        "variance = left\n[index] arrow.relcat\n[object a] zmod2.relcat\n[object b] zmod2.relcat\n\
         [arrow f : a -> b]\nobj * |-> *\n",
    )
    .unwrap()
    .resolve(corpus::relcat)
    .unwrap_err();
    assert!(err.to_string().contains("morphism g is not mapped"), "{err}");
}
