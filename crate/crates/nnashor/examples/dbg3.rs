use nnashor::circuit::Circuit;
use nnashor::gate::Gate;
use nnashor::phase::DyadicPhase;
use nnashor::sim::simulate;
use num_bigint::BigUint;

fn main() {
    // Load phi(u) with phi_j on wire j (phi_0 top), decode with the no-swap
    // network on the reversed span, expect |u> with MSB at the bottom.
    let n = 3usize;
    for u in 0..8u64 {
        let mut c = Circuit::new(n);
        for j in 0..n {
            c.push(Gate::Hadamard(j));
            c.push(Gate::Rz(j, DyadicPhase::new(BigUint::from(u), j as u32 + 1)));
        }
        // inline the decode (same loop as emit_noswap_network, decode=true)
        let wires: Vec<usize> = (0..n).rev().collect();
        for s in 0..n {
            let tgt = wires[n - 1 - s];
            for k in 0..s {
                let exp = (s - k) as u32 + 1;
                c.push(Gate::CPhase(wires[n - 1 - k], tgt, DyadicPhase::unit(exp).neg()));
            }
            c.push(Gate::Hadamard(tgt));
        }
        let (state, _) = simulate(&c, 0, 0).unwrap();
        let mut nz = state.nonzero();
        nz.sort_by(|x, y| y.1.norm_sqr().total_cmp(&x.1.norm_sqr()));
        let (idx, amp) = nz[0];
        // MSB at bottom wire (n-1): value read with bit i at wire i
        let val_lsb_top = idx;
        println!("u={u}: top idx={idx:03b} amp={amp:.3} (lsb-at-top val={val_lsb_top})");
    }
}
