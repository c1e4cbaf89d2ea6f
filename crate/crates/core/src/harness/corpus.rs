//! Built-in fixtures, embedded at compile time.

use crate::error::{Error, Result};
use crate::fincat::RelativeCategory;
use crate::hocolim_cat::DiagramOfRelCats;

use super::format::{parse_diagram_file, parse_relcat};

pub const RELCATS: &[(&str, &str)] = &[
    ("arrow.relcat", include_str!("../../fixtures/arrow.relcat")),
    ("chain3.relcat", include_str!("../../fixtures/chain3.relcat")),
    ("cofiber_source.relcat", include_str!("../../fixtures/cofiber_source.relcat")),
    ("cofiber_target.relcat", include_str!("../../fixtures/cofiber_target.relcat")),
    ("discrete2.relcat", include_str!("../../fixtures/discrete2.relcat")),
    ("empty.relcat", include_str!("../../fixtures/empty.relcat")),
    ("idempotent.relcat", include_str!("../../fixtures/idempotent.relcat")),
    ("involution.relcat", include_str!("../../fixtures/involution.relcat")),
    ("loop_pair.relcat", include_str!("../../fixtures/loop_pair.relcat")),
    ("marked_arrow.relcat", include_str!("../../fixtures/marked_arrow.relcat")),
    ("parallel.relcat", include_str!("../../fixtures/parallel.relcat")),
    ("pushout_apex.relcat", include_str!("../../fixtures/pushout_apex.relcat")),
    ("span.relcat", include_str!("../../fixtures/span.relcat")),
    ("terminal.relcat", include_str!("../../fixtures/terminal.relcat")),
    ("unmarked_arrow.relcat", include_str!("../../fixtures/unmarked_arrow.relcat")),
    ("zmod2.relcat", include_str!("../../fixtures/zmod2.relcat")),
];

pub const DIAGRAMS: &[(&str, &str)] = &[
    ("attach.diagram", include_str!("../../fixtures/attach.diagram")),
    ("chain.diagram", include_str!("../../fixtures/chain.diagram")),
    ("circle.diagram", include_str!("../../fixtures/circle.diagram")),
    ("coequalizer.diagram", include_str!("../../fixtures/coequalizer.diagram")),
    ("cofiber.diagram", include_str!("../../fixtures/cofiber.diagram")),
    ("cofiber_right.diagram", include_str!("../../fixtures/cofiber_right.diagram")),
    ("discrete2.diagram", include_str!("../../fixtures/discrete2.diagram")),
    ("empty.diagram", include_str!("../../fixtures/empty.diagram")),
    ("empty_discrete.diagram", include_str!("../../fixtures/empty_discrete.diagram")),
    ("endo.diagram", include_str!("../../fixtures/endo.diagram")),
    ("idempotent.diagram", include_str!("../../fixtures/idempotent.diagram")),
    ("pushout_points.diagram", include_str!("../../fixtures/pushout_points.diagram")),
    ("terminal.diagram", include_str!("../../fixtures/terminal.diagram")),
];

pub fn relcat_source(name: &str) -> Option<&'static str> {
    RELCATS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn diagram_source(name: &str) -> Option<&'static str> {
    DIAGRAMS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn relcat(name: &str) -> Result<RelativeCategory> {
    let text = relcat_source(name).ok_or_else(|| Error::Unknown {
        kind: "fixture",
        name: name.to_string(),
    })?;
    parse_relcat(text).map_err(|e| e.context(name.to_string()))
}

pub fn diagram(name: &str) -> Result<DiagramOfRelCats> {
    let text = diagram_source(name).ok_or_else(|| Error::Unknown {
        kind: "fixture",
        name: name.to_string(),
    })?;
    parse_diagram_file(text)
        .and_then(|d| d.resolve(relcat))
        .map_err(|e| e.context(name.to_string()))
}
