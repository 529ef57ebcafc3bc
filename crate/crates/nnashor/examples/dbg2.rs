use nnashor::qarith::*;
use nnashor::sim::simulate;
use num_bigint::BigUint;

fn main() {
    let mut pg = MultiplierParams::exact(3, 3, 7);
    pg.variant = Variant::General;
    let cg = build_general_modmul(&pg).unwrap();
    let mut okg = 0;
    for cval in [0u64, 1] {
        for b in 0..7u64 {
            let idx = cg.layout_in["b"].encode(b as u128) | cg.layout_in["c"].encode(cval as u128);
            let (state, _) = simulate(&cg, idx, 0).unwrap();
            let expect = if cval == 1 { 3 * b % 7 } else { b };
            let want = cg.layout_out["b"].encode(expect as u128)
                | cg.layout_out["c"].encode(cval as u128);
            if state.fidelity_to_basis(want) > 1.0 - 1e-6 { okg += 1; }
            else { println!("FAIL b={b} c={cval} fid={:.6}", state.fidelity_to_basis(want)); }
        }
    }
    println!("GEN n=3 exact: {okg}/14; NN-violations present: {}", !cg.validate_nearest_neighbor().is_empty());
    let n = 256usize;
    for l0 in [8usize, 16, 26] {
        let l = l0 + quotient_bits(n);
        let m = (BigUint::from(1u8) << n) - BigUint::from(3u8);
        let p = MultiplierParams {
            n, a: BigUint::from(0x5DEECE66Du64) % &m, m, z: BigUint::from(0u8),
            l0, l, t: quotient_bits(n) + 2, variant: Variant::General, exact_mode: false,
        };
        let g = build_general_modmul(&p).unwrap();
        let lgn = quotient_bits(n) as f64;
        let second = 6.0 * (2.0 * l as f64 - lgn) * lgn;
        println!(
            "GEN l0={l0:>2}: depth={} size={} | raw coeff={:.2} size/n^2={:.3}",
            g.depth_unchecked(), g.count_size(),
            (g.depth_unchecked() as f64 - second) / n as f64,
            g.count_size() as f64 / (n * n) as f64
        );
    }
}
