//! Largest Sobolev exponent supported by bumps on shrinking balls.

use hormander::inequality::sobolev_exponent;
use hormander::registry;

fn main() -> hormander::Result<()> {
    for name in ["euclid2", "heisenberg"] {
        let sys = registry::get(name)?;
        let rep = sobolev_exponent(&sys, &vec![0.0; sys.dim], 0.2, 1.0, 1.0, 6, 20_000, 3, 1e-10)?;
        println!("{}: k = {:?}", name, rep.k);
        for row in &rep.rows {
            println!("  s {:.4}: ratio at k=2 {:.3}", row.s, row.ratios[9]);
        }
    }
    Ok(())
}
