use relcat_core::harness::corpus;
use relcat_core::harness::{verify_theorem, VerifyConfig};
use relcat_core::homology::HomologyGroup;
use relcat_core::hocolim_cat::InsertDirection;

#[test]
fn pushout_of_points_has_point_homology() {
    let d = corpus::diagram("pushout_points.diagram").unwrap();
    let r = verify_theorem("pushout_points", &d, &VerifyConfig::default()).unwrap();
    assert!(r.passed);
    assert_eq!(r.colimit.we_classes, 1);
    for l in &r.levels {
        let point = [HomologyGroup::free(1), HomologyGroup::default(), HomologyGroup::default(), HomologyGroup::default()];
        assert_eq!(l.certificate.source_homology, point);
        assert_eq!(l.certificate.target_homology, point);
    }
}

#[test]
fn report_is_deterministic() {
    let d = corpus::diagram("cofiber.diagram").unwrap();
    let config = VerifyConfig::default();
    let a = verify_theorem("cofiber", &d, &config).unwrap();
    let b = verify_theorem("cofiber", &d, &config).unwrap();
    assert_eq!(a.to_json_without_clock(), b.to_json_without_clock());
}

#[test]
fn empty_value_gives_disjoint_union() {
    let d = corpus::diagram("empty_discrete.diagram").unwrap();
    let r = verify_theorem("empty_discrete", &d, &VerifyConfig::default()).unwrap();
    assert!(r.passed);
    let z2 = corpus::relcat("zmod2.relcat").unwrap();
    assert_eq!(r.colimit.objects, z2.base().num_objects());
    assert_eq!(r.colimit.morphisms, z2.base().num_morphisms());
}

#[test]
fn directions_agree_on_small_diagrams() {
    for name in ["terminal.diagram", "pushout_points.diagram", "circle.diagram", "attach.diagram"] {
        let d = corpus::diagram(name).unwrap();
        let verdicts: Vec<bool> = [InsertDirection::Forward, InsertDirection::PaperLiteral]
            .into_iter()
            .map(|direction| {
                let config = VerifyConfig {
                    direction,
                    ..VerifyConfig::default()
                };
                verify_theorem(name, &d, &config).unwrap().passed
            })
            .collect();
        assert_eq!(verdicts, [true, true], "{name}");
    }
}

#[test]
fn hdeg_needs_room() {
    let d = corpus::diagram("terminal.diagram").unwrap();
    let config = VerifyConfig {
        inner: 3,
        ..VerifyConfig::default()
    };
    assert!(verify_theorem("terminal", &d, &config).is_err());
}
