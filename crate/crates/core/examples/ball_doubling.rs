//! Volumes of control balls: doubling ratios and the bracket formula.

use hormander::metric::{ball_volume, doubling_sweep, volume_formula_ratio, BallMethod, Flavor, DEFAULT_STEPS};
use hormander::registry;

const TOL: f64 = 1e-10;

fn main() -> hormander::Result<()> {
    let radii: Vec<f64> = (3..=6).map(|k| 0.5f64.powi(k)).collect();
    for name in ["grushin", "heisenberg"] {
        let sys = registry::get(name)?;
        let x0 = vec![0.0; sys.dim];
        for row in doubling_sweep(&sys, &x0, &radii, Flavor::D1, DEFAULT_STEPS, TOL)? {
            println!("{} rho {:.4}: |B| {:.3e}, |2B|/|B| {:.2}", name, row.rho, row.volume, row.ratio);
        }
        for row in volume_formula_ratio(&sys, &x0, &radii, Flavor::D1, DEFAULT_STEPS, TOL)? {
            println!("{} rho {:.4}: |B| / sum |lambda| rho^w = {:.3} (dominant weight {})", name, row.rho, row.ratio, row.dominant_weight);
        }
    }
    let euclid = registry::get("euclid2")?;
    let method = BallMethod::FloodFill { steps: DEFAULT_STEPS };
    let b = ball_volume(&euclid, &[0.0, 0.0], 0.2, Flavor::D1, method, 0, TOL)?;
    println!("euclid2 flood area {:.4} (pi r^2 = {:.4})", b.volume, std::f64::consts::PI * 0.04);
    Ok(())
}
