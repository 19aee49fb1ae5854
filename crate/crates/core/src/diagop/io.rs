//! Operator file formats.
//!
//! JSON (monomial form):
//! `{"layout": [{"party": 0, "kind": "I", "width": 1}, ...],
//!   "terms": [{"mask": "3c", "num": 1, "log2den": 3}, ...]}`
//! where `party` is an index or `"env"`, `mask` is hexadecimal over the
//! global bit order, and each coefficient is `num / 2^log2den`.
//!
//! CSV (dense form): header `index,num,log2den`, then one row per basis index.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::layout::{Owner, Wire, WireKind, WireLayout};
use super::operator::DiagOperator;
use super::OpError;
use crate::scalar::Dyadic;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartyRef {
    Index(usize),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpec {
    pub party: PartyRef,
    pub kind: String,
    pub width: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpec {
    pub mask: String,
    pub num: i64,
    pub log2den: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub layout: Vec<WireSpec>,
    pub terms: Vec<TermSpec>,
}

/// Exact value in `{num, log2den}` form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicSpec {
    pub num: i64,
    pub log2den: u32,
}

impl From<Dyadic> for DyadicSpec {
    fn from(d: Dyadic) -> Self {
        DyadicSpec { num: i64::try_from(d.numerator()).expect("numerator fits i64"), log2den: d.log2_denominator() }
    }
}

impl From<DyadicSpec> for Dyadic {
    fn from(d: DyadicSpec) -> Self {
        Dyadic::new(d.num as i128, d.log2den)
    }
}

impl WireSpec {
    pub fn from_wire(wire: &Wire) -> Self {
        let party = match wire.owner {
            Owner::Party(k) => PartyRef::Index(k),
            Owner::Env => PartyRef::Named("env".into()),
        };
        let default_name = Wire::new(wire.owner, wire.kind, wire.width).name;
        WireSpec {
            party,
            kind: wire.kind.letter().to_string(),
            width: wire.width,
            name: (wire.name != default_name).then(|| wire.name.clone()),
        }
    }

    pub fn to_wire(&self) -> Result<Wire, OpError> {
        let owner = match &self.party {
            PartyRef::Index(k) => Owner::Party(*k),
            PartyRef::Named(s) if s == "env" => Owner::Env,
            PartyRef::Named(s) => return Err(OpError::Format(format!("unknown party {s:?}"))),
        };
        let kind = match self.kind.as_str() {
            "I" | "input" => WireKind::Input,
            "O" | "output" => WireKind::Output,
            other => return Err(OpError::Format(format!("unknown wire kind {other:?}"))),
        };
        let wire = Wire::new(owner, kind, self.width);
        Ok(match &self.name {
            Some(name) => wire.named(name.clone()),
            None => wire,
        })
    }
}

pub fn layout_from_specs(specs: &[WireSpec]) -> Result<WireLayout, OpError> {
    let wires = specs.iter().map(WireSpec::to_wire).collect::<Result<Vec<_>, _>>()?;
    WireLayout::new(wires)
}

impl OperatorFile {
    pub fn from_operator(op: &DiagOperator<Dyadic>) -> Self {
        let monomial = op.to_monomial_form();
        let terms = monomial
            .terms()
            .expect("monomial form")
            .iter()
            .map(|(&mask, c)| {
                let d = DyadicSpec::from(*c);
                TermSpec { mask: format!("{mask:x}"), num: d.num, log2den: d.log2den }
            })
            .collect();
        OperatorFile { layout: op.layout().wires().iter().map(WireSpec::from_wire).collect(), terms }
    }

    pub fn to_operator(&self) -> Result<DiagOperator<Dyadic>, OpError> {
        let layout = Arc::new(layout_from_specs(&self.layout)?);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mask = u64::from_str_radix(t.mask.trim_start_matches("0x"), 16)
                    .map_err(|e| OpError::Format(format!("bad mask {:?}: {e}", t.mask)))?;
                Ok((mask, Dyadic::new(t.num as i128, t.log2den)))
            })
            .collect::<Result<Vec<_>, OpError>>()?;
        DiagOperator::from_terms(layout, terms)
    }
}

pub fn to_json(op: &DiagOperator<Dyadic>) -> String {
    serde_json::to_string_pretty(&OperatorFile::from_operator(op)).expect("operator serializes")
}

pub fn from_json(text: &str) -> Result<DiagOperator<Dyadic>, OpError> {
    let file: OperatorFile = serde_json::from_str(text).map_err(|e| OpError::Format(e.to_string()))?;
    file.to_operator()
}

pub fn to_csv(op: &DiagOperator<Dyadic>) -> String {
    let mut out = String::from("index,num,log2den\n");
    for (index, value) in op.to_dense().iter().enumerate() {
        out.push_str(&format!("{index},{},{}\n", value.numerator(), value.log2_denominator()));
    }
    out
}

/// Reads a dense CSV. Rows may come in any order; missing indices are zero.
pub fn from_csv(layout: Arc<WireLayout>, text: &str) -> Result<DiagOperator<Dyadic>, OpError> {
    let mut entries = vec![Dyadic::ZERO; layout.dim()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse_err = |what: &str| OpError::Format(format!("line {}: bad {what}", lineno + 1));
        if fields.len() != 3 {
            return Err(parse_err("row"));
        }
        let index: usize = fields[0].parse().map_err(|_| parse_err("index"))?;
        let num: i128 = fields[1].parse().map_err(|_| parse_err("numerator"))?;
        let log2den: u32 = fields[2].parse().map_err(|_| parse_err("log2 denominator"))?;
        if index >= entries.len() {
            return Err(parse_err("index (out of range)"));
        }
        entries[index] = Dyadic::new(num, log2den);
    }
    DiagOperator::dense(layout, entries)
}
