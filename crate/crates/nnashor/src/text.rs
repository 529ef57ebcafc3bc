//! Circuit text format: one gate per line, `width <N>` header, `#` comments.
//!
//! Phases are written `<num>/<2^exp>`, e.g. `rz 3 5/2^4`.

use crate::circuit::Circuit;
use crate::gate::Gate;
use crate::phase::DyadicPhase;
use num_bigint::BigUint;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("missing width header")]
    MissingWidth,
}

fn phase_str(p: &DyadicPhase) -> String {
    format!("{}/2^{}", p.num(), p.exp())
}

fn parse_phase(s: &str) -> Option<DyadicPhase> {
    let (num, den) = s.split_once('/')?;
    let exp = den.strip_prefix("2^")?;
    let num = BigUint::from_str(num).ok()?;
    let exp: u32 = exp.parse().ok()?;
    Some(DyadicPhase::new(num, exp))
}

/// Serialize a circuit, with optional leading comment lines.
pub fn write_circuit(c: &Circuit, comments: &[&str]) -> String {
    let mut out = String::new();
    for line in comments {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "width {}", c.width).unwrap();
    for g in &c.gates {
        match g {
            Gate::Hadamard(w) => writeln!(out, "h {w}"),
            Gate::PauliX(w) => writeln!(out, "x {w}"),
            Gate::Rz(w, p) => writeln!(out, "rz {w} {}", phase_str(p)),
            Gate::CPhase(a, b, p) => writeln!(out, "cphase {a} {b} {}", phase_str(p)),
            Gate::CNot(a, b) => writeln!(out, "cnot {a} {b}"),
            Gate::Swap(a, b) => writeln!(out, "swap {a} {b}"),
            Gate::FusedCPhaseSwap(a, b, p) => writeln!(out, "fcps {a} {b} {}", phase_str(p)),
            Gate::FusedCRzSwap(a, b, p) => writeln!(out, "fcrzs {a} {b} {}", phase_str(p)),
            Gate::PseudoToffoliHalfA(a, b) => writeln!(out, "ptha {a} {b}"),
            Gate::PseudoToffoliHalfB(a, b) => writeln!(out, "pthb {a} {b}"),
            Gate::Measure(w, n) => writeln!(out, "measure {w} {n}"),
            Gate::ClassicalRz(w, p, n) => writeln!(out, "crz {w} {} {n}", phase_str(p)),
        }
        .unwrap();
    }
    out
}

/// Parse the text format back into a circuit. Layout maps are not part of
/// the format and come back empty.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut width: Option<usize> = None;
    let mut gates = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| ParseError::Line(ln + 1, m.to_string());
        let mut tok = line.split_whitespace();
        let kw = tok.next().unwrap();
        let next_usize = |tok: &mut std::str::SplitWhitespace| -> Result<usize, ParseError> {
            tok.next()
                .ok_or_else(|| err("missing operand"))?
                .parse()
                .map_err(|_| err("bad integer"))
        };
        match kw {
            "width" => {
                width = Some(next_usize(&mut tok)?);
            }
            "h" => gates.push(Gate::Hadamard(next_usize(&mut tok)?)),
            "x" => gates.push(Gate::PauliX(next_usize(&mut tok)?)),
            "rz" => {
                let w = next_usize(&mut tok)?;
                let p = parse_phase(tok.next().ok_or_else(|| err("missing phase"))?)
                    .ok_or_else(|| err("bad phase"))?;
                gates.push(Gate::Rz(w, p));
            }
            "cphase" | "fcps" | "fcrzs" => {
                let a = next_usize(&mut tok)?;
                let b = next_usize(&mut tok)?;
                let p = parse_phase(tok.next().ok_or_else(|| err("missing phase"))?)
                    .ok_or_else(|| err("bad phase"))?;
                gates.push(match kw {
                    "cphase" => Gate::CPhase(a, b, p),
                    "fcps" => Gate::FusedCPhaseSwap(a, b, p),
                    _ => Gate::FusedCRzSwap(a, b, p),
                });
            }
            "cnot" | "swap" | "ptha" | "pthb" => {
                let a = next_usize(&mut tok)?;
                let b = next_usize(&mut tok)?;
                gates.push(match kw {
                    "cnot" => Gate::CNot(a, b),
                    "swap" => Gate::Swap(a, b),
                    "ptha" => Gate::PseudoToffoliHalfA(a, b),
                    _ => Gate::PseudoToffoliHalfB(a, b),
                });
            }
            "measure" => {
                let w = next_usize(&mut tok)?;
                let n = tok.next().ok_or_else(|| err("missing bit name"))?;
                gates.push(Gate::Measure(w, n.to_string()));
            }
            "crz" => {
                let w = next_usize(&mut tok)?;
                let p = parse_phase(tok.next().ok_or_else(|| err("missing phase"))?)
                    .ok_or_else(|| err("bad phase"))?;
                let n = tok.next().ok_or_else(|| err("missing bit name"))?;
                gates.push(Gate::ClassicalRz(w, p, n.to_string()));
            }
            other => return Err(err(&format!("unknown keyword {other}"))),
        }
        if tok.next().is_some() {
            return Err(err("trailing tokens"));
        }
    }
    let width = width.ok_or(ParseError::MissingWidth)?;
    let mut c = Circuit::new(width);
    for g in gates {
        c.append_gate(g)
            .map_err(|e| ParseError::Line(0, e.to_string()))?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = Circuit::new(4);
        c.push(Gate::Hadamard(0));
        c.push(Gate::FusedCPhaseSwap(0, 1, DyadicPhase::from_u128(1, 2)));
        c.push(Gate::FusedCRzSwap(1, 2, DyadicPhase::from_u128(5, 4)));
        c.push(Gate::Measure(3, "e0".into()));
        c.push(Gate::ClassicalRz(2, DyadicPhase::from_u128(3, 3), "e0".into()));
        let text = write_circuit(&c, &["test circuit"]);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back.width, c.width);
        assert_eq!(back.gates, c.gates);
    }
}
