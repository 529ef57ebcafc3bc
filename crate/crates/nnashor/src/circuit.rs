//! Circuit container, validation, and the unit-cost scheduler.

use crate::gate::Gate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("wire {wire} out of range for width {width}")]
    WireOutOfRange { wire: usize, width: usize },
    #[error("two-wire gate references wire {0} twice")]
    DuplicateOperand(usize),
    #[error("nearest-neighbor violation at gate {index}: wires {a} and {b}")]
    NearestNeighbor { index: usize, a: usize, b: usize },
    #[error("circuit contains a measurement; not invertible")]
    MeasurementPresent,
    #[error("widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("layout mismatch on register {0}")]
    LayoutMismatch(String),
}

/// Placement of a logical register on the wire line: the wire holding each
/// bit, most significant first when `msb_first` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub wires: Vec<usize>,
    /// Orientation flag: true when `wires[0]` holds the most significant bit.
    pub msb_first: bool,
}

impl RegisterLayout {
    pub fn new(wires: Vec<usize>, msb_first: bool) -> Self {
        RegisterLayout { wires, msb_first }
    }

    /// Wires listed least-significant first, regardless of orientation.
    pub fn wires_lsb_first(&self) -> Vec<usize> {
        let mut w = self.wires.clone();
        if self.msb_first {
            w.reverse();
        }
        w
    }

    /// Basis-index contribution of this register holding `value`.
    pub fn encode(&self, value: u128) -> u64 {
        let mut idx = 0u64;
        for (bit, wire) in self.wires_lsb_first().into_iter().enumerate() {
            if value >> bit & 1 == 1 {
                idx |= 1 << wire;
            }
        }
        idx
    }

    /// Register value held in basis index `idx`.
    pub fn decode(&self, idx: u64) -> u128 {
        let mut v = 0u128;
        for (bit, wire) in self.wires_lsb_first().into_iter().enumerate() {
            if idx >> wire & 1 == 1 {
                v |= 1 << bit;
            }
        }
        v
    }
}

pub type LayoutMap = BTreeMap<String, RegisterLayout>;

/// Cost model flags: the nearest-neighbor restriction and, for the general
/// architecture, whether long-range controls are legal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub nearest_neighbor: bool,
    pub fanout_allowed: bool,
}

impl CostModel {
    pub fn nn() -> Self {
        CostModel {
            nearest_neighbor: true,
            fanout_allowed: false,
        }
    }
    pub fn general() -> Self {
        CostModel {
            nearest_neighbor: false,
            fanout_allowed: true,
        }
    }
}

/// Measured resources under the unit-cost model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub depth: usize,
    pub width: usize,
    pub size: usize,
}

/// An ordered gate list over `width` line-positioned wires, with declared
/// input and output register layouts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub width: usize,
    pub gates: Vec<Gate>,
    pub layout_in: LayoutMap,
    pub layout_out: LayoutMap,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
            layout_in: LayoutMap::new(),
            layout_out: LayoutMap::new(),
        }
    }

    fn check(&self, gate: &Gate) -> Result<(), CircuitError> {
        let (a, b) = gate.wires();
        if a >= self.width {
            return Err(CircuitError::WireOutOfRange {
                wire: a,
                width: self.width,
            });
        }
        if let Some(b) = b {
            if b >= self.width {
                return Err(CircuitError::WireOutOfRange {
                    wire: b,
                    width: self.width,
                });
            }
            if a == b {
                return Err(CircuitError::DuplicateOperand(a));
            }
        }
        Ok(())
    }

    /// Append one gate, preserving order.
    pub fn append_gate(&mut self, gate: Gate) -> Result<(), CircuitError> {
        self.check(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Append without the range check; used by builders that construct wire
    /// indices from a tracked layout and assert validity in tests.
    pub fn push(&mut self, gate: Gate) {
        debug_assert!(self.check(&gate).is_ok(), "bad gate {gate:?}");
        self.gates.push(gate);
    }

    /// Every two-wire gate whose operands are not adjacent, as
    /// `(gate index, a, b)` triples. Empty means the circuit is legal on a
    /// line.
    pub fn validate_nearest_neighbor(&self) -> Vec<(usize, usize, usize)> {
        let mut violations = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if let (a, Some(b)) = g.wires() {
                if a.abs_diff(b) != 1 {
                    violations.push((i, a, b));
                }
            }
        }
        violations
    }

    /// Depth under as-soon-as-possible list scheduling. Each wire runs at
    /// most one unit-cost gate per layer; fused gates occupy both wires for
    /// one layer; measurements and classically-controlled rotations occupy
    /// one layer on their wire; plain one-wire unitaries are free.
    pub fn compute_depth(&self, model: CostModel) -> Result<usize, CircuitError> {
        if model.nearest_neighbor {
            if let Some(&(index, a, b)) = self.validate_nearest_neighbor().first() {
                return Err(CircuitError::NearestNeighbor { index, a, b });
            }
        }
        Ok(self.depth_unchecked())
    }

    /// ASAP depth without cost-model validation.
    pub fn depth_unchecked(&self) -> usize {
        let mut clock = vec![0usize; self.width];
        let mut depth = 0;
        for g in &self.gates {
            if !g.occupies_layer() {
                continue;
            }
            let (a, b) = g.wires();
            let layer = match b {
                Some(b) => clock[a].max(clock[b]) + 1,
                None => clock[a] + 1,
            };
            clock[a] = layer;
            if let Some(b) = b {
                clock[b] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    /// Unit-cost gate count: every gate (including one-wire gates and each
    /// pseudo-Toffoli half) counts one.
    pub fn count_size(&self) -> usize {
        self.gates.len()
    }

    pub fn report(&self, model: CostModel) -> Result<ResourceReport, CircuitError> {
        Ok(ResourceReport {
            depth: self.compute_depth(model)?,
            width: self.width,
            size: self.count_size(),
        })
    }

    /// Gates reversed and replaced by their adjoints; layouts exchanged.
    /// Composing a circuit with its inverse simulates to the identity.
    pub fn invert(&self) -> Result<Circuit, CircuitError> {
        if self
            .gates
            .iter()
            .any(|g| matches!(g, Gate::Measure(..) | Gate::ClassicalRz(..)))
        {
            return Err(CircuitError::MeasurementPresent);
        }
        let mut inv = Circuit::new(self.width);
        inv.layout_in = self.layout_out.clone();
        inv.layout_out = self.layout_in.clone();
        for g in self.gates.iter().rev() {
            for a in g.adjoint() {
                inv.push(a);
            }
        }
        Ok(inv)
    }

    /// Wire `i` relabeled to `width - 1 - i` everywhere; an involution.
    pub fn mirror(&self) -> Circuit {
        let w = self.width;
        let flip = |i: usize| w - 1 - i;
        let mut m = Circuit::new(w);
        for g in &self.gates {
            m.push(g.relabel(flip));
        }
        let flip_map = |map: &LayoutMap| {
            map.iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        RegisterLayout::new(v.wires.iter().map(|&i| flip(i)).collect(), v.msb_first),
                    )
                })
                .collect()
        };
        m.layout_in = flip_map(&self.layout_in);
        m.layout_out = flip_map(&self.layout_out);
        m
    }

    /// Concatenate: `self` then `other`. Requires equal widths, and any
    /// register declared in both `self.layout_out` and `other.layout_in`
    /// must sit on the same wires with the same orientation.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit, CircuitError> {
        if self.width != other.width {
            return Err(CircuitError::WidthMismatch(self.width, other.width));
        }
        for (name, lay_in) in &other.layout_in {
            if let Some(lay_out) = self.layout_out.get(name) {
                if lay_out != lay_in {
                    return Err(CircuitError::LayoutMismatch(name.clone()));
                }
            }
        }
        let mut c = Circuit::new(self.width);
        c.gates = self.gates.clone();
        c.gates.extend(other.gates.iter().cloned());
        c.layout_in = self.layout_in.clone();
        c.layout_out = other.layout_out.clone();
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::DyadicPhase;

    #[test]
    fn append_identity_case() {
        let mut c = Circuit::new(1);
        c.append_gate(Gate::Hadamard(0)).unwrap();
        assert_eq!(c.count_size(), 1);
        assert!(c.width >= 1);
    }

    #[test]
    fn append_rejects_duplicate_operand() {
        let mut c = Circuit::new(4);
        assert_eq!(
            c.append_gate(Gate::Swap(2, 2)),
            Err(CircuitError::DuplicateOperand(2))
        );
    }

    #[test]
    fn append_rejects_out_of_range() {
        let mut c = Circuit::new(4);
        assert_eq!(
            c.append_gate(Gate::CPhase(0, 5, DyadicPhase::from_u128(1, 3))),
            Err(CircuitError::WireOutOfRange { wire: 5, width: 4 })
        );
    }

    #[test]
    fn nn_validation() {
        let mut c = Circuit::new(5);
        c.push(Gate::CNot(3, 4));
        assert!(c.validate_nearest_neighbor().is_empty());
        c.push(Gate::CNot(0, 2));
        assert_eq!(c.validate_nearest_neighbor(), vec![(1, 0, 2)]);
    }

    #[test]
    fn disjoint_swaps_share_a_layer() {
        let mut c = Circuit::new(4);
        c.push(Gate::Swap(0, 1));
        c.push(Gate::Swap(2, 3));
        assert_eq!(c.depth_unchecked(), 1);
    }

    #[test]
    fn free_gates_do_not_advance_depth() {
        let mut c = Circuit::new(2);
        c.push(Gate::Hadamard(0));
        c.push(Gate::Rz(0, DyadicPhase::half()));
        assert_eq!(c.depth_unchecked(), 0);
        c.push(Gate::Measure(0, "m".into()));
        assert_eq!(c.depth_unchecked(), 1);
    }

    #[test]
    fn depth_monotone_under_append() {
        let mut c = Circuit::new(3);
        let mut last = 0;
        for g in [
            Gate::Swap(0, 1),
            Gate::Hadamard(2),
            Gate::CNot(1, 2),
            Gate::Swap(0, 1),
            Gate::CNot(0, 1),
        ] {
            c.push(g);
            let d = c.depth_unchecked();
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn mirror_is_involution() {
        let mut c = Circuit::new(4);
        c.push(Gate::CNot(0, 1));
        c.push(Gate::FusedCRzSwap(1, 2, DyadicPhase::from_u128(1, 3)));
        let m = c.mirror();
        match &m.gates[0] {
            Gate::CNot(a, b) => assert_eq!((*a, *b), (3, 2)),
            g => panic!("unexpected {g:?}"),
        }
        assert_eq!(m.mirror(), c);
    }

    #[test]
    fn invert_rz_negates() {
        let mut c = Circuit::new(1);
        c.push(Gate::Rz(0, DyadicPhase::from_u128(1, 3)));
        let inv = c.invert().unwrap();
        assert_eq!(inv.gates, vec![Gate::Rz(0, DyadicPhase::from_u128(7, 3))]);
    }

    #[test]
    fn concat_checks_width() {
        let a = Circuit::new(2);
        let b = Circuit::new(3);
        assert_eq!(a.concat(&b), Err(CircuitError::WidthMismatch(2, 3)));
    }

    #[test]
    fn concat_with_empty_is_identity() {
        let mut a = Circuit::new(2);
        a.push(Gate::CNot(0, 1));
        let b = Circuit::new(2);
        let c = a.concat(&b).unwrap();
        assert_eq!(c.gates, a.gates);
    }
}
