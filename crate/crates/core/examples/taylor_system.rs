//! Osculating polynomial system of the C^{1,1} Grushin fields at the origin
//! and the decay of the bracket remainder.

use hormander::fields::{canonical_indices, commutator, taylor_system};
use hormander::linalg::dist;
use hormander::registry;

fn main() -> hormander::Result<()> {
    let sys = registry::get("grushin_c11")?;
    let t = taylor_system(&sys, &[0.0, 0.0])?;
    println!("validity radius {}", t.validity_radius);
    for idx in canonical_indices(&sys) {
        for k in [4, 6, 8] {
            let s = 0.5f64.powi(k);
            let x = [s, 0.0];
            let gap = dist(&commutator(&sys, &idx, &x)?, &commutator(&t.system, &idx, &x)?);
            println!("X_{} at |x| = 2^-{}: |X - S| = {:.3e}", idx, k, gap);
        }
    }
    Ok(())
}
