//! The primitive gate set.

use crate::phase::DyadicPhase;
use serde::{Deserialize, Serialize};
use std::fmt;

/// One gate over line-positioned wires.
///
/// Two-wire gates are the unit of cost. The fused kinds bundle a rotation
/// with the swap that accompanies it in the nearest-neighbor constructions,
/// and count as a single unit. The pseudo-Toffoli halves are fixed two-wire
/// unitaries chosen so that `HalfA(u,v); CPhase(v,w,1/2); HalfA(u,v)` equals
/// the Toffoli `v ^= u&w` with a -1 phase on `|011>`, while `HalfB` is the
/// pair-finishing gate of the zero-target controlled-swap cascade:
///
/// * `PseudoToffoliHalfA(a, b)` = controlled Hadamard (control `a`, target `b`).
/// * `PseudoToffoliHalfB(a, b)` = controlled Hadamard (control `a`, target `b`)
///   followed by CNOT (control `b`, target `a`), as one unit.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Hadamard(usize),
    PauliX(usize),
    Rz(usize, DyadicPhase),
    CPhase(usize, usize, DyadicPhase),
    CNot(usize, usize),
    Swap(usize, usize),
    /// Controlled phase then swap of the same pair, one unit.
    FusedCPhaseSwap(usize, usize, DyadicPhase),
    /// Controlled Z-rotation (control, target) then swap, one unit.
    FusedCRzSwap(usize, usize, DyadicPhase),
    PseudoToffoliHalfA(usize, usize),
    PseudoToffoliHalfB(usize, usize),
    Measure(usize, String),
    /// Z-rotation applied only if the named previously-measured bit is 1.
    ClassicalRz(usize, DyadicPhase, String),
}

impl Gate {
    /// Wires the gate touches, in declaration order.
    pub fn wires(&self) -> (usize, Option<usize>) {
        match self {
            Gate::Hadamard(w)
            | Gate::PauliX(w)
            | Gate::Rz(w, _)
            | Gate::Measure(w, _)
            | Gate::ClassicalRz(w, _, _) => (*w, None),
            Gate::CPhase(a, b, _)
            | Gate::CNot(a, b)
            | Gate::Swap(a, b)
            | Gate::FusedCPhaseSwap(a, b, _)
            | Gate::FusedCRzSwap(a, b, _)
            | Gate::PseudoToffoliHalfA(a, b)
            | Gate::PseudoToffoliHalfB(a, b) => (*a, Some(*b)),
        }
    }

    pub fn is_two_wire(&self) -> bool {
        self.wires().1.is_some()
    }

    /// Whether the gate exchanges the contents of its two wires.
    pub fn swaps(&self) -> bool {
        matches!(
            self,
            Gate::Swap(..) | Gate::FusedCPhaseSwap(..) | Gate::FusedCRzSwap(..)
        )
    }

    /// Whether the gate occupies a scheduling layer on its wires.
    ///
    /// Plain one-wire unitaries are free; measurement and classically
    /// controlled rotations charge one layer on their wire; every two-wire
    /// gate charges one layer on both wires.
    pub fn occupies_layer(&self) -> bool {
        match self {
            Gate::Hadamard(_) | Gate::PauliX(_) | Gate::Rz(..) => false,
            Gate::Measure(..) | Gate::ClassicalRz(..) => true,
            _ => true,
        }
    }

    /// Gates legal in a purely classical reversible circuit.
    pub fn is_classical(&self) -> bool {
        matches!(
            self,
            Gate::PauliX(_)
                | Gate::CNot(..)
                | Gate::Swap(..)
                | Gate::Measure(..)
                | Gate::PseudoToffoliHalfA(..)
                | Gate::PseudoToffoliHalfB(..)
        )
    }

    /// Adjoint of the gate. `PseudoToffoliHalfB` is the only kind whose
    /// adjoint leaves the set; it expands to two gates.
    pub fn adjoint(&self) -> Vec<Gate> {
        match self {
            Gate::Hadamard(_) | Gate::PauliX(_) | Gate::CNot(..) | Gate::Swap(..) => {
                vec![self.clone()]
            }
            Gate::Rz(w, p) => vec![Gate::Rz(*w, p.neg())],
            Gate::CPhase(a, b, p) => vec![Gate::CPhase(*a, *b, p.neg())],
            // (S·P)† = P(-θ)·S = S·P(-θ) since symmetric phases commute with
            // their own swap.
            Gate::FusedCPhaseSwap(a, b, p) => vec![Gate::FusedCPhaseSwap(*a, *b, p.neg())],
            // (S·CRz_{c,t})† = CRz_{t,c}(-θ)·... swap conjugation exchanges the
            // roles, so the adjoint is the fused gate with roles swapped.
            Gate::FusedCRzSwap(c, t, p) => vec![Gate::FusedCRzSwap(*t, *c, p.neg())],
            Gate::PseudoToffoliHalfA(a, b) => vec![Gate::PseudoToffoliHalfA(*a, *b)],
            // HalfB = CNOT(b->a) ∘ CH(a->b); adjoint is CH(a->b) ∘ CNOT(b->a),
            // i.e. the circuit [CNot(b,a); HalfA(a,b)].
            Gate::PseudoToffoliHalfB(a, b) => {
                vec![Gate::CNot(*b, *a), Gate::PseudoToffoliHalfA(*a, *b)]
            }
            Gate::Measure(..) | Gate::ClassicalRz(..) => {
                panic!("adjoint of a measurement-dependent gate")
            }
        }
    }

    /// Relabel wires through `f` (used by `mirror`).
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::Hadamard(w) => Gate::Hadamard(f(*w)),
            Gate::PauliX(w) => Gate::PauliX(f(*w)),
            Gate::Rz(w, p) => Gate::Rz(f(*w), p.clone()),
            Gate::CPhase(a, b, p) => Gate::CPhase(f(*a), f(*b), p.clone()),
            Gate::CNot(a, b) => Gate::CNot(f(*a), f(*b)),
            Gate::Swap(a, b) => Gate::Swap(f(*a), f(*b)),
            Gate::FusedCPhaseSwap(a, b, p) => Gate::FusedCPhaseSwap(f(*a), f(*b), p.clone()),
            Gate::FusedCRzSwap(a, b, p) => Gate::FusedCRzSwap(f(*a), f(*b), p.clone()),
            Gate::PseudoToffoliHalfA(a, b) => Gate::PseudoToffoliHalfA(f(*a), f(*b)),
            Gate::PseudoToffoliHalfB(a, b) => Gate::PseudoToffoliHalfB(f(*a), f(*b)),
            Gate::Measure(w, n) => Gate::Measure(f(*w), n.clone()),
            Gate::ClassicalRz(w, p, n) => Gate::ClassicalRz(f(*w), p.clone(), n.clone()),
        }
    }
}

impl fmt::Debug for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Hadamard(w) => write!(f, "h {w}"),
            Gate::PauliX(w) => write!(f, "x {w}"),
            Gate::Rz(w, p) => write!(f, "rz {w} {p}"),
            Gate::CPhase(a, b, p) => write!(f, "cphase {a} {b} {p}"),
            Gate::CNot(a, b) => write!(f, "cnot {a} {b}"),
            Gate::Swap(a, b) => write!(f, "swap {a} {b}"),
            Gate::FusedCPhaseSwap(a, b, p) => write!(f, "fcps {a} {b} {p}"),
            Gate::FusedCRzSwap(a, b, p) => write!(f, "fcrzs {a} {b} {p}"),
            Gate::PseudoToffoliHalfA(a, b) => write!(f, "ptha {a} {b}"),
            Gate::PseudoToffoliHalfB(a, b) => write!(f, "pthb {a} {b}"),
            Gate::Measure(w, n) => write!(f, "measure {w} {n}"),
            Gate::ClassicalRz(w, p, n) => write!(f, "crz {w} {p} {n}"),
        }
    }
}
