//! Estimates of d and d1 between points of the Heisenberg group and the
//! Euclidean comparison bracket.

use hormander::metric::{d1_graph, d1_upper, d_graph, euclid_bracket, euclid_constants, Resolution};
use hormander::registry;

const TOL: f64 = 1e-10;

fn main() -> hormander::Result<()> {
    let sys = registry::get("heisenberg")?;
    let consts = euclid_constants(&sys, 5)?;
    let x = [0.0, 0.0, 0.0];
    for c in [1e-2, 1e-3, 1e-4] {
        let y = [0.0, 0.0, c];
        let up = d1_upper(&sys, &x, &y, TOL)?;
        let res = Resolution::for_pair(&sys, up.upper, 8);
        let g1 = d1_graph(&sys, &x, &y, &res, TOL)?;
        let g = d_graph(&sys, &x, &y, g1, &res, 12, TOL)?;
        let eb = euclid_bracket(&sys, &consts, &x, &y)?;
        println!(
            "c = {:e}: euclid [{:.4}, {:.4}], d1 chart {:.4}, d1 graph {:.4}, d graph {:.4}, sqrt(c) {:.4}",
            c, eb.lower, eb.upper, up.upper, g1, g, c.sqrt()
        );
    }
    Ok(())
}
