//! Network file format.
//!
//! A network is stored as a JSON document with three fields:
//!
//! ```json
//! {
//!   "n": 3,
//!   "inputs": [
//!     [1, 2],
//!     [0, 2],
//!     [0, 1]
//!   ],
//!   "tables": [
//!     "0111",
//!     "1000",
//!     "0110"
//!   ]
//! }
//! ```
//!
//! `inputs[i]` lists the (0-based) sources of node `i` in order and
//! `tables[i]` is its output column, MSB-first over that order. The layout
//! above, with a trailing newline, is the canonical form written by
//! [`to_canonical_string`]; parsing and re-writing a canonical file gives
//! back the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{BooleanNetwork, TruthTable};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    n: usize,
    inputs: Vec<Vec<usize>>,
    tables: Vec<String>,
}

pub fn parse_network(text: &str) -> Result<BooleanNetwork> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if raw.n == 0 {
        return Err(Error::parse(
            "field `n`",
            "a network needs at least one node",
        ));
    }
    if raw.inputs.len() != raw.n {
        return Err(Error::parse(
            "field `inputs`",
            format!("expected {} input lists, found {}", raw.n, raw.inputs.len()),
        ));
    }
    if raw.tables.len() != raw.n {
        return Err(Error::parse(
            "field `tables`",
            format!("expected {} tables, found {}", raw.n, raw.tables.len()),
        ));
    }
    let mut tables = Vec::with_capacity(raw.n);
    for (i, (srcs, bits)) in raw.inputs.iter().zip(&raw.tables).enumerate() {
        if let Some(&bad) = srcs.iter().find(|&&s| s >= raw.n) {
            return Err(Error::parse(
                format!("inputs[{i}]"),
                format!("source {bad} is outside 0..{}", raw.n),
            ));
        }
        if srcs.is_empty() {
            return Err(Error::parse(
                format!("inputs[{i}]"),
                "every node needs at least one input",
            ));
        }
        let expected = 1usize.checked_shl(srcs.len() as u32).unwrap_or(0);
        if bits.len() != expected {
            return Err(Error::parse(
                format!("tables[{i}]"),
                format!(
                    "length {} does not match 2^{} = {} for {} inputs",
                    bits.len(),
                    srcs.len(),
                    expected,
                    srcs.len()
                ),
            ));
        }
        let table = TruthTable::from_bitstring(bits)
            .map_err(|e| Error::parse(format!("tables[{i}]"), e.to_string()))?;
        tables.push(table);
    }
    BooleanNetwork::new(raw.inputs, tables).map_err(|e| Error::parse("network", e.to_string()))
}

pub fn to_canonical_string(net: &BooleanNetwork) -> String {
    let n = net.n_nodes();
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"n\": {n},");
    let _ = writeln!(out, "  \"inputs\": [");
    for i in 0..n {
        let list = net
            .inputs(i)
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let sep = if i + 1 < n { "," } else { "" };
        let _ = writeln!(out, "    [{list}]{sep}");
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  \"tables\": [");
    for i in 0..n {
        let sep = if i + 1 < n { "," } else { "" };
        let _ = writeln!(out, "    \"{}\"{sep}", net.table(i));
    }
    let _ = writeln!(out, "  ]");
    let _ = writeln!(out, "}}");
    out
}

pub fn import_network(path: impl AsRef<Path>) -> Result<BooleanNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_network(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn export_network(net: &BooleanNetwork, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_canonical_string(net))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "{\n  \"n\": 3,\n  \"inputs\": [\n    [1, 2],\n    [0, 2],\n    [0, 1]\n  ],\n  \"tables\": [\n    \"0111\",\n    \"1000\",\n    \"0110\"\n  ]\n}\n";

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let net = parse_network(SAMPLE).unwrap();
        assert_eq!(to_canonical_string(&net), SAMPLE);
    }

    #[test]
    fn compact_input_is_accepted() {
        let net = parse_network(r#"{"n":2,"inputs":[[1],[0]],"tables":["10","10"]}"#).unwrap();
        assert_eq!(net.n_nodes(), 2);
        assert_eq!(net.table(0).to_bitstring(), "10");
    }

    #[test]
    fn bad_table_length_names_the_field() {
        let err = parse_network(r#"{"n":2,"inputs":[[1],[0]],"tables":["10","100"]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tables[1]"), "{msg}");
        assert!(err.is_user_error());
    }

    #[test]
    fn out_of_range_source_names_the_field() {
        let err = parse_network(r#"{"n":2,"inputs":[[1],[2]],"tables":["10","10"]}"#).unwrap_err();
        assert!(err.to_string().contains("inputs[1]"));
    }

    #[test]
    fn count_mismatches_are_rejected() {
        assert!(parse_network(r#"{"n":3,"inputs":[[1],[0]],"tables":["10","10"]}"#).is_err());
        assert!(parse_network(r#"{"n":2,"inputs":[[1],[0]],"tables":["10"]}"#).is_err());
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_network("{\n  \"n\": 2,\n  \"inputs\": [[1], [0]\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn self_loops_are_flagged_not_rejected() {
        let net = parse_network(r#"{"n":2,"inputs":[[0],[0, 0]],"tables":["01","0110"]}"#).unwrap();
        assert!(net.flags().self_loops);
        assert!(net.flags().duplicate_inputs);
    }
}
