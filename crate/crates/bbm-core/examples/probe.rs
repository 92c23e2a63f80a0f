use bbm_core::euler_lagrange::*;
use bbm_core::model::PotentialParams;
use std::time::Instant;

fn main() {
    for p in [0.25, 0.5, 1.5, 1.9] {
        let params = PotentialParams::binary(1.0, p).unwrap();
        let z_bar = frontier_endpoint(&params);
        for frac in [0.0f64, 0.3, 0.9] {
            let z = frac * z_bar;
            let t0 = Instant::now();
            let g = solve_constrained(&params, z).unwrap();
            let tc = t0.elapsed();
            let t0 = Instant::now();
            let h = solve_unconstrained(&params, z).unwrap();
            let tu = t0.elapsed();
            println!(
                "p={p} frac={frac}: constrained {:?} (sz={:.6}) unconstrained {:?} ({:.3e},{:.3e})",
                tc, g.s_switch, tu, g.k_value, h.k_value
            );
        }
    }
}
