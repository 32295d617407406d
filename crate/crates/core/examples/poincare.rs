//! Poincare constants on dyadic Grushin balls at the origin.

use hormander::inequality::{p_poincare_ratio, poincare_ratio, BallMeasure, TestFunction};
use hormander::metric::Flavor;
use hormander::registry;

const TOL: f64 = 1e-10;

fn main() -> hormander::Result<()> {
    let sys = registry::get("grushin")?;
    let u = TestFunction::from_system(&sys, "u")?;
    for k in 3..=6 {
        let rho = 0.5f64.powi(k);
        let ball = BallMeasure::new(&sys, &[0.0, 0.0], rho, 2.0, Flavor::D1, 4, TOL)?;
        let r = poincare_ratio(&sys, &u, &ball, 50_000, 1)?;
        let unit = BallMeasure::new(&sys, &[0.0, 0.0], rho, 1.0, Flavor::D1, 4, TOL)?;
        let p = p_poincare_ratio(&sys, &u, &unit, 2.0, 50_000, 1)?;
        println!("rho 2^-{}: C = {:.4}, C_2 = {:.4}", k, r.implied_constant, p.implied_constant);
    }
    Ok(())
}
