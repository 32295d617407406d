//! Iterated commutators of the Martinet fields, the Hormander rank at a few
//! points and the best basis at two scales.

use hormander::fields::{
    bracket_values, canonical_indices, commutator, hormander_rank, optimal_basis, MultiIndex,
};
use hormander::registry;

fn main() -> hormander::Result<()> {
    let sys = registry::get("martinet")?;
    let x = [0.3, -0.2, 0.1];
    for idx in canonical_indices(&sys) {
        println!("X_{:<10} = {:?}", idx.to_string(), commutator(&sys, &idx, &x)?);
    }
    let vals = bracket_values(&sys, &[0.0, 0.0, 0.0])?;
    println!("{} brackets evaluated at the origin", vals.indices.len());

    for p in [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]] {
        let rank = hormander_rank(&sys, &p)?;
        println!("rank at {:?}: {:?}", p, rank);
    }
    for rho in [0.5, 0.01] {
        let best = optimal_basis(&sys, &x, rho)?;
        println!("best basis at scale {}: {}", rho, best.basis);
    }
    let z = MultiIndex(vec![1, 1, 2]);
    println!("[X1,[X1,X2]] at x: {:?}", commutator(&sys, &z, &x)?);
    Ok(())
}
