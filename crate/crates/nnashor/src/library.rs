//! Builders for the reusable sub-circuits: nearest-neighbor QFT,
//! pseudo-Toffoli, zero-target controlled-swap cascade, mesh/unmesh, and the
//! general-architecture fanout.

use crate::circuit::{Circuit, RegisterLayout};
use crate::gate::Gate;
use crate::phase::DyadicPhase;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LibraryError {
    #[error("register length must be at least 1")]
    EmptyRegister,
    #[error("wires {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
}

/// Parameters of a QFT builder.
#[derive(Clone, Debug)]
pub struct QftSpec {
    pub n: usize,
    pub inverse: bool,
    /// Drop rotations finer than `2π/2^c` when set.
    pub approx_cutoff: Option<u32>,
    /// Nearest-neighbor form with fused swaps; `false` gives the
    /// linear-depth no-swap form, which is not NN-legal for n >= 3.
    pub include_swaps: bool,
}

impl QftSpec {
    pub fn nn(n: usize) -> Self {
        QftSpec {
            n,
            inverse: false,
            approx_cutoff: None,
            include_swaps: true,
        }
    }
}

/// Emit the pipelined NN QFT over `wires` (most significant input bit on
/// `wires[0]`). After the circuit, the qubit on `wires[j]` carries phase
/// `u / 2^{j+1}`: the register leaves reversed relative to its input
/// orientation. Negating `sign` emits the decoding network instead, which
/// maps that phase layout back to computational bits, most significant on
/// `wires[0]`.
pub(crate) fn emit_qft_network(c: &mut Circuit, wires: &[usize], sign: i8, cutoff: Option<u32>) {
    let n = wires.len();
    if n == 0 {
        return;
    }
    let phase = |k: usize| {
        let p = DyadicPhase::unit(k as u32 + 2);
        if sign < 0 {
            p.neg()
        } else {
            p
        }
    };
    for d in 1..n {
        c.push(Gate::Hadamard(wires[0]));
        for k in 0..n - d {
            let keep = cutoff.map_or(true, |cut| k as u32 + 2 <= cut);
            if keep {
                c.push(Gate::FusedCPhaseSwap(wires[k], wires[k + 1], phase(k)));
            } else {
                c.push(Gate::Swap(wires[k], wires[k + 1]));
            }
        }
    }
    c.push(Gate::Hadamard(wires[0]));
}

/// NN QFT (or its no-swap form): `n` Hadamards and `n(n-1)/2` fused
/// rotation+swap gates, depth `2n - 3` for `n >= 2`.
pub fn build_qft(spec: &QftSpec) -> Result<Circuit, LibraryError> {
    if spec.n == 0 {
        return Err(LibraryError::EmptyRegister);
    }
    let n = spec.n;
    let mut c = Circuit::new(n);
    let wires: Vec<usize> = (0..n).collect();
    c.layout_in
        .insert("u".into(), RegisterLayout::new(wires.clone(), true));
    if spec.include_swaps {
        emit_qft_network(&mut c, &wires, 1, spec.approx_cutoff);
        // The qubit on wire j ends carrying phase u/2^{j+1}, i.e. bit
        // n-1-j of the transform index: the physical qubits leave in
        // reversed order, which exactly cancels the QFT's bit reversal, so
        // the transform index also reads most-significant-first.
        c.layout_out
            .insert("u".into(), RegisterLayout::new(wires, true));
    } else {
        // No-swap form: qubits stay put, so every pair must interact at
        // distance; linear depth but not NN-legal for n >= 3.
        for t in 0..n {
            c.push(Gate::Hadamard(wires[t]));
            for i in t + 1..n {
                let k = (i - t) as u32 + 1;
                if spec.approx_cutoff.map_or(true, |cut| k <= cut) {
                    c.push(Gate::CPhase(wires[i], wires[t], DyadicPhase::unit(k)));
                }
            }
        }
        // Qubits stay put, so the transform index comes out bit-reversed.
        c.layout_out
            .insert("u".into(), RegisterLayout::new(wires, false));
    }
    if spec.inverse {
        return Ok(c.invert().expect("no measurements in a QFT"));
    }
    Ok(c)
}

/// Adjoint of [`build_qft`] with matching layout conventions.
pub fn build_inverse_qft(spec: &QftSpec) -> Result<Circuit, LibraryError> {
    let mut fwd = spec.clone();
    fwd.inverse = !fwd.inverse;
    build_qft(&fwd)
}

/// Which adjacent wire of the trio is the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PseudoToffoliSpec {
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

/// Pseudo-Toffoli `v ^= u & w` on adjacent wires `u, v, w`, with a phase of
/// -1 on the basis state `|u v w> = |0 1 1>`. Emitted as the sandwich
/// `HalfA(u,v); CPhase(v,w,1/2); HalfA(u,v)`, whose unitary equals the
/// Toffoli composed with that single phase flip exactly. Three unit gates;
/// a two-unit realization of this unitary over the pairs (u,v),(v,w) does
/// not exist.
pub fn build_pseudo_toffoli(u: usize, v: usize, w: usize) -> Result<Circuit, LibraryError> {
    if u.abs_diff(v) != 1 {
        return Err(LibraryError::NotAdjacent(u, v));
    }
    if v.abs_diff(w) != 1 {
        return Err(LibraryError::NotAdjacent(v, w));
    }
    let width = u.max(v).max(w) + 1;
    let mut c = Circuit::new(width);
    c.push(Gate::PseudoToffoliHalfA(u, v));
    c.push(Gate::CPhase(v, w, DyadicPhase::half()));
    c.push(Gate::PseudoToffoliHalfA(u, v));
    Ok(c)
}

/// Swap of two `n`-bit registers controlled by `c`, assuming `Y` starts
/// zero. Layout: control on wire 0, then `X_0, Y_0, X_1, Y_1, ...`. The
/// control is transported down the line; the interleave shifts up one wire
/// and the control ends at the far end. Depth `2n + 2`.
///
/// Per pair the emission is: a controlled-Hadamard lead-in on (X, Y), the
/// carrier swap past X, the fused CZ+swap past the prepared Y wire, and the
/// combined HalfB finisher. Every pseudo-Toffoli target is zero at
/// application time, so no basis state acquires a phase.
pub fn build_controlled_swap_cascade(n: usize) -> Result<Circuit, LibraryError> {
    if n == 0 {
        return Err(LibraryError::EmptyRegister);
    }
    let mut c = Circuit::new(2 * n + 1);
    c.layout_in
        .insert("c".into(), RegisterLayout::new(vec![0], false));
    c.layout_in.insert(
        "x".into(),
        RegisterLayout::new((0..n).map(|j| 2 * j + 1).collect(), false),
    );
    c.layout_in.insert(
        "y".into(),
        RegisterLayout::new((0..n).map(|j| 2 * j + 2).collect(), false),
    );
    for j in 0..n {
        let p = 2 * j; // carrier position entering pair j
        c.push(Gate::PseudoToffoliHalfA(p + 1, p + 2));
        c.push(Gate::Swap(p, p + 1));
        c.push(Gate::FusedCPhaseSwap(p + 1, p + 2, DyadicPhase::half()));
        c.push(Gate::PseudoToffoliHalfB(p, p + 1));
    }
    c.layout_out
        .insert("c".into(), RegisterLayout::new(vec![2 * n], false));
    c.layout_out.insert(
        "x".into(),
        RegisterLayout::new((0..n).map(|j| 2 * j).collect(), false),
    );
    c.layout_out.insert(
        "y".into(),
        RegisterLayout::new((0..n).map(|j| 2 * j + 1).collect(), false),
    );
    Ok(c)
}

/// Sort an interleave permutation into layers of adjacent swaps via
/// odd-even passes; `keys[i]` is the target order index of the bit starting
/// on wire `i`. Returns the swap layers (each a list of lower wire indices).
fn odd_even_sort_layers(mut keys: Vec<usize>) -> Vec<Vec<usize>> {
    let n = keys.len();
    let mut layers = Vec::new();
    let mut parity = 1usize; // pairs (1,2),(3,4),.. first matches the riffle
    while !keys.windows(2).all(|w| w[0] <= w[1]) {
        let mut layer = Vec::new();
        let mut j = parity;
        while j + 1 < n {
            if keys[j] > keys[j + 1] {
                keys.swap(j, j + 1);
                layer.push(j);
            }
            j += 2;
        }
        parity ^= 1;
        if !layer.is_empty() {
            layers.push(layer);
        }
    }
    layers
}

/// Un-interleave `A_0 B_0 A_1 B_1 ...` into `A`-block then `B`-block with a
/// triangular network of adjacent swaps; depth at most `n`, at most
/// `n(n-1)/2` swaps.
pub fn build_unmesh(n: usize) -> Result<Circuit, LibraryError> {
    if n == 0 {
        return Err(LibraryError::EmptyRegister);
    }
    let mut c = Circuit::new(2 * n);
    // Bit on wire 2j is A_j (target wire j); wire 2j+1 is B_j (target n+j).
    let keys: Vec<usize> = (0..2 * n)
        .map(|w| if w % 2 == 0 { w / 2 } else { n + w / 2 })
        .collect();
    for layer in odd_even_sort_layers(keys) {
        for a in layer {
            c.push(Gate::Swap(a, a + 1));
        }
    }
    c.layout_in.insert(
        "a".into(),
        RegisterLayout::new((0..n).map(|j| 2 * j).collect(), false),
    );
    c.layout_in.insert(
        "b".into(),
        RegisterLayout::new((0..n).map(|j| 2 * j + 1).collect(), false),
    );
    c.layout_out
        .insert("a".into(), RegisterLayout::new((0..n).collect(), false));
    c.layout_out
        .insert("b".into(), RegisterLayout::new((n..2 * n).collect(), false));
    Ok(c)
}

/// Interleave two adjacent `n`-bit blocks bit by bit; inverse of
/// [`build_unmesh`].
pub fn build_mesh(n: usize) -> Result<Circuit, LibraryError> {
    Ok(build_unmesh(n)?
        .invert()
        .expect("swap network has no measurements"))
}

/// Copy control `c` (wire 0) into `n` zeroed ancillae (wires 1..=n) with a
/// CNOT doubling tree of depth `ceil(log2(n+1))`. Not NN-legal; rejected
/// under the nearest-neighbor cost model by validation.
pub fn build_fanout(n: usize) -> Result<Circuit, LibraryError> {
    if n == 0 {
        return Err(LibraryError::EmptyRegister);
    }
    let mut c = Circuit::new(n + 1);
    let mut sources = 1usize; // wires 0..sources hold copies
    while sources < n + 1 {
        let new = sources.min(n + 1 - sources);
        for s in 0..new {
            c.push(Gate::CNot(s, sources + s));
        }
        sources += new;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CostModel;
    use crate::sim::{simulate, simulate_reversible, unitary_of, BitString};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn qft_depth_formula() {
        for n in 2..=64 {
            let c = build_qft(&QftSpec::nn(n)).unwrap();
            assert_eq!(c.compute_depth(CostModel::nn()).unwrap(), 2 * n - 3, "n={n}");
            assert_eq!(c.count_size(), n + n * (n - 1) / 2);
        }
        let c1 = build_qft(&QftSpec::nn(1)).unwrap();
        assert_eq!(c1.count_size(), 1);
        assert_eq!(c1.depth_unchecked(), 0);
    }

    #[test]
    fn qft_matches_dft_column() {
        // n = 3, input u = 5: amplitudes (1/sqrt 8) e^{2 pi i 5k/8} with bit
        // k_j read from wire j (the output register is reversed).
        let n = 3;
        let c = build_qft(&QftSpec::nn(n)).unwrap();
        let u = 5u64;
        // Input register: MSB on wire 0.
        let index = c.layout_in["u"].encode(u as u128);
        let (state, _) = simulate(&c, index, 0).unwrap();
        let out = c.layout_out["u"].clone();
        for k in 0..1u64 << n {
            let idx = out.encode(k as u128);
            let want = Complex64::from_polar(
                1.0 / (1u64 << n) as f64,
                0.0,
            );
            let angle = 2.0 * PI * (u * k) as f64 / (1u64 << n) as f64;
            let expect = Complex64::from_polar((1.0 / (1u64 << n) as f64).sqrt(), angle);
            let got = state.amplitude(idx);
            assert!((got - expect).norm() < 1e-9, "k={k}: {got} vs {expect}");
            let _ = want;
        }
    }

    #[test]
    fn qft_then_inverse_is_identity() {
        let n = 3;
        let qft = build_qft(&QftSpec::nn(n)).unwrap();
        let iqft = build_inverse_qft(&QftSpec::nn(n)).unwrap();
        let both = qft.concat(&iqft).unwrap();
        for u in 0..1u64 << n {
            let (s, _) = simulate(&both, u, 0).unwrap();
            assert!(s.fidelity_to_basis(u) > 1.0 - 1e-9);
        }
    }

    #[test]
    fn noswap_qft_not_nn_legal() {
        let mut spec = QftSpec::nn(4);
        spec.include_swaps = false;
        let c = build_qft(&spec).unwrap();
        assert!(!c.validate_nearest_neighbor().is_empty());
    }

    #[test]
    fn pseudo_toffoli_unitary_is_toffoli_with_phase() {
        let c = build_pseudo_toffoli(0, 1, 2).unwrap();
        let u = unitary_of(&c).unwrap();
        // Expected: |u v w> -> |u, v ^ (u&w), w>, phase -1 on |011>
        // (wire order u=0, v=1, w=2; index bit i is wire i).
        for col in 0..8usize {
            let ub = col & 1;
            let vb = (col >> 1) & 1;
            let wb = (col >> 2) & 1;
            let out = (ub) | ((vb ^ (ub & wb)) << 1) | (wb << 2);
            let sign = if ub == 0 && vb == 1 && wb == 1 { -1.0 } else { 1.0 };
            for row in 0..8usize {
                let want = if row == out { sign } else { 0.0 };
                let got = u[col][row];
                assert!(
                    (got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12,
                    "entry ({row},{col}): {got} want {want}"
                );
            }
        }
    }

    #[test]
    fn cascade_depth_and_semantics() {
        for n in 1..=8 {
            let c = build_controlled_swap_cascade(n).unwrap();
            assert_eq!(c.compute_depth(CostModel::nn()).unwrap(), 2 * n + 2, "n={n}");
            for ctrl in [0u8, 1] {
                for x in 0..1u128 << n {
                    let mut input = BitString::zeros(c.width);
                    input.deposit(&c.layout_in["c"].wires, (ctrl == 1) as u128);
                    input.deposit(&c.layout_in["x"].wires, x);
                    let out = simulate_reversible(&c, &input).unwrap();
                    let xo = out.extract(&c.layout_out["x"].wires);
                    let yo = out.extract(&c.layout_out["y"].wires);
                    let co = out.extract(&c.layout_out["c"].wires);
                    assert_eq!(co, ctrl as u128);
                    if ctrl == 1 {
                        assert_eq!((xo, yo), (0, x));
                    } else {
                        assert_eq!((xo, yo), (x, 0));
                    }
                }
            }
        }
    }

    #[test]
    fn cascade_no_phase_on_zero_targets() {
        // Statevector check that the cascade maps basis to basis with +1
        // amplitude (n = 3, all inputs).
        let n = 3;
        let c = build_controlled_swap_cascade(n).unwrap();
        for ctrl in [0u64, 1] {
            for x in 0..1u64 << n {
                let mut idx = 0u64;
                idx |= c.layout_in["c"].encode(ctrl as u128);
                idx |= c.layout_in["x"].encode(x as u128);
                let (state, _) = simulate(&c, idx, 0).unwrap();
                let mut want = 0u64;
                want |= c.layout_out["c"].encode(ctrl as u128);
                if ctrl == 1 {
                    want |= c.layout_out["y"].encode(x as u128);
                } else {
                    want |= c.layout_out["x"].encode(x as u128);
                }
                let amp = state.amplitude(want);
                assert!(
                    (amp - Complex64::new(1.0, 0.0)).norm() < 1e-10,
                    "ctrl={ctrl} x={x}: {amp}"
                );
            }
        }
    }

    #[test]
    fn unmesh_sorts_and_mesh_inverts() {
        for n in 1..=8 {
            let um = build_unmesh(n).unwrap();
            assert!(um.compute_depth(CostModel::nn()).unwrap() <= n, "n={n}");
            assert!(um.count_size() <= n * (n - 1) / 2 + 1);
            // permutation check by reversible simulation
            for trial in 0..4u128 {
                let a = trial.wrapping_mul(0x9e37) & ((1 << n) - 1);
                let b = trial.wrapping_mul(0x79b9) & ((1 << n) - 1);
                let mut input = BitString::zeros(um.width);
                input.deposit(&um.layout_in["a"].wires, a);
                input.deposit(&um.layout_in["b"].wires, b);
                let out = simulate_reversible(&um, &input).unwrap();
                assert_eq!(out.extract(&um.layout_out["a"].wires), a);
                assert_eq!(out.extract(&um.layout_out["b"].wires), b);
            }
            let mesh = build_mesh(n).unwrap();
            let round = mesh.concat(&um);
            // mesh then unmesh: block layout to block layout, identity
            let round = round.unwrap();
            let mut input = BitString::zeros(round.width);
            input.deposit(&mesh.layout_in["a"].wires, 0b1011 & ((1 << n) - 1));
            let out = simulate_reversible(&round, &input).unwrap();
            assert_eq!(
                out.extract(&um.layout_out["a"].wires),
                0b1011 & ((1 << n) - 1)
            );
        }
    }

    #[test]
    fn mesh_n2_is_single_middle_swap() {
        let mesh = build_mesh(2).unwrap();
        assert_eq!(mesh.gates, vec![Gate::Swap(1, 2)]);
        assert_eq!(mesh.depth_unchecked(), 1);
    }

    #[test]
    fn fanout_depth_and_identity() {
        let c1 = build_fanout(1).unwrap();
        assert_eq!(c1.gates, vec![Gate::CNot(0, 1)]);
        let c7 = build_fanout(7).unwrap();
        assert_eq!(c7.depth_unchecked(), 3);
        assert!(!c7.validate_nearest_neighbor().is_empty());
        // fanout then fan-in is the identity on all basis states, n = 4
        let c4 = build_fanout(4).unwrap();
        let inv = c4.invert().unwrap();
        let both = c4.concat(&inv).unwrap();
        for v in 0..2u64 {
            let (s, _) = simulate(&both, v, 0).unwrap();
            assert!(s.fidelity_to_basis(v) > 1.0 - 1e-12);
        }
    }
}
