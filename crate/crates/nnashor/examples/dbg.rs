use nnashor::circuit::CostModel;
use nnashor::qarith::*;
use num_bigint::BigUint;

fn params_for(n: usize, defaults: bool, variant: Variant) -> MultiplierParams {
    let l0 = if defaults { MultiplierParams::defaults(n).0 } else { quotient_bits(n) };
    let l = l0 + quotient_bits(n);
    let m = (BigUint::from(1u8) << n) - BigUint::from(3u8);
    MultiplierParams {
        n, a: BigUint::from(0x5DEECE66Du64) % &m, m, z: BigUint::from(0u8),
        l0, l, t: quotient_bits(n) + 2, variant, exact_mode: false,
    }
}

fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = rows[0].len();
    let mut m = vec![vec![0.0; k + 1]; k];
    for (r, &yy) in rows.iter().zip(y) {
        for i in 0..k {
            for j in 0..k { m[i][j] += r[i] * r[j]; }
            m[i][k] += r[i] * yy;
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for j in col..=k { m[col][j] /= p; }
        for r in 0..k {
            if r != col {
                let f = m[r][col];
                for j in col..=k { m[r][j] -= f * m[col][j]; }
            }
        }
    }
    (0..k).map(|i| m[i][k]).collect()
}

fn main() {
    for defaults in [false, true] {
        let mut rows = vec![]; let mut ys = vec![];
        let mut srows = vec![]; let mut sys = vec![];
        for n in [32usize, 64, 128, 256] {
            let p = params_for(n, defaults, Variant::General);
            let l = p.l as f64;
            let lg = quotient_bits(n) as f64;
            let g = build_general_modmul(&p).unwrap();
            let nf = n as f64;
            rows.push(vec![nf, (2.0 * l - lg) * lg, 1.0]);
            ys.push(g.depth_unchecked() as f64);
            srows.push(vec![nf * nf, nf * l, 1.0]);
            sys.push(g.count_size() as f64);
        }
        let a = lstsq(&rows, &ys);
        let s = lstsq(&srows, &sys);
        println!(
            "defaults={defaults}: GEN depth fit alpha={:.2} beta={:.2}; size fit sigma={:.3} tau={:.2}",
            a[0], a[1], s[0], s[1]
        );
    }
    // NN fits with defaults too
    let mut rows = vec![]; let mut ys = vec![];
    let mut srows = vec![]; let mut sys = vec![];
    for n in [32usize, 64, 128, 256] {
        let p = params_for(n, true, Variant::Nn);
        let l = p.l as f64;
        let lg = quotient_bits(n) as f64;
        let c = build_controlled_modmul(&p).unwrap();
        let nf = n as f64;
        rows.push(vec![nf, (2.0 * l - lg) * lg, 1.0]);
        ys.push(c.compute_depth(CostModel::nn()).unwrap() as f64);
        srows.push(vec![nf * nf, nf * l, 1.0]);
        sys.push(c.count_size() as f64);
    }
    let a = lstsq(&rows, &ys);
    let s = lstsq(&srows, &sys);
    println!("defaults=true: NN depth fit alpha={:.2} beta={:.2}; size fit sigma={:.3} tau={:.2}", a[0], a[1], s[0], s[1]);
}
