//! Connect two points of the Martinet space, print the factors and the unit
//! speed reparametrisation.

use hormander::linalg::dist;
use hormander::metric::{connect, subunit_reparametrize};
use hormander::registry;

const TOL: f64 = 1e-10;

fn main() -> hormander::Result<()> {
    let sys = registry::get("martinet")?;
    let x = [0.1, 0.0, 0.0];
    for y in [[0.1, 0.05, 0.001], [-0.5, 0.4, -0.6]] {
        let path = connect(&sys, &x, &y, TOL)?;
        let end = path.reintegrate(&sys, TOL)?;
        println!("to {:?}: {} segments, class bound {:.4}, miss {:.1e}", y, path.segments.len(), path.class_bound, dist(&end, &y));
        for f in path.segments.iter().take(6) {
            println!("  exp({:+.4} X{})", f.time, f.field);
        }
        let sub = subunit_reparametrize(&path, sys.n())?.subunit.expect("drift-free");
        println!("  hitting time {:.4} over {} pieces", sub.hitting_time, sub.pieces.len());
    }
    Ok(())
}
