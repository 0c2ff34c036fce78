//! Network and dataset file formats.

mod bif;
mod json;

pub use bif::{parse_bif, write_bif, ROW_SUM_TOLERANCE};
pub use json::{
    network_from_json, network_to_json, pdag_from_json, pdag_to_json, structure_from_json,
    structure_to_json,
};

pub use crate::dataset::load_csv;

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{PgmError, Result};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Bif,
    Dot,
    Json,
}

impl FromStr for Format {
    type Err = PgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bif" => Ok(Format::Bif),
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            _ => Err(PgmError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn write_dot(net: &Network) -> String {
    let q = bif::quote_if_needed;
    let mut out = format!("digraph {} {{\n", q(&net.name));
    for v in net.variables() {
        writeln!(out, "  {};", q(&v.name)).unwrap();
    }
    for v in 0..net.n() {
        for &p in net.parents(v) {
            writeln!(out, "  {} -> {};", q(&net.variable(p).name), q(&net.variable(v).name)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// Render `net` in the named format (`bif`, `dot` or `json`).
pub fn convert(net: &Network, target: &str) -> Result<String> {
    Ok(match target.parse::<Format>()? {
        Format::Bif => write_bif(net),
        Format::Dot => write_dot(net),
        Format::Json => network_to_json(net),
    })
}

/// Read a network, picking the parser from the file extension when known and
/// otherwise from the content.
pub fn read_network(text: &str, path_hint: Option<&str>) -> Result<Network> {
    let ext = path_hint
        .and_then(|p| p.rsplit_once('.'))
        .map(|(_, e)| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("json") => network_from_json(text),
        Some("bif") => parse_bif(text),
        _ if text.trim_start().starts_with('{') => network_from_json(text),
        _ => parse_bif(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn json_round_trip() {
        let net = fixtures::asia_like();
        let back = network_from_json(&convert(&net, "json").unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn dot_has_edges() {
        let dot = convert(&fixtures::two_node(), "dot").unwrap();
        assert!(dot.contains("A -> B"), "{dot}");
    }

    #[test]
    fn unknown_target() {
        assert_eq!(
            convert(&fixtures::two_node(), "xml"),
            Err(PgmError::UnknownFormat("xml".into()))
        );
    }

    #[test]
    fn structure_json_accepts_network_docs() {
        let net = fixtures::asia_like();
        let s = structure_from_json(&network_to_json(&net)).unwrap();
        assert_eq!(s, net.structure());
        assert_eq!(structure_from_json(&structure_to_json(&s)).unwrap(), s);
    }
}
