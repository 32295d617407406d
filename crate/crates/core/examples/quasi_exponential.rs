//! Quasiexponential maps against the flow of the bracket they approximate.
//!
//! `C_2(t)` on the Heisenberg group lands exactly on `x + t^2 [X1,X2]`; on a
//! non-nilpotent system the residual divided by `t^|I|` decays with `t`.

use hormander::fields::{parse_system, MultiIndex};
use hormander::flows::{expansion_residual, quasi_exp};
use hormander::registry;

const TOL: f64 = 1e-12;

fn main() -> hormander::Result<()> {
    let h = registry::get("heisenberg")?;
    let x = [0.1, 0.2, 0.0];
    let i = MultiIndex(vec![1, 2]);
    for t in [0.1, 0.01] {
        let y = quasi_exp(&h, &i, t, &x, TOL)?;
        println!("C_2({}) x = {:?}, residual {:.2e}", t, y, expansion_residual(&h, &i, t, &x, TOL)?);
    }

    let cubic = parse_system(
        "name = cubic
dim = 3
nfields = 2
step = 3
domain = [-1,1]x[-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0 ; 0
field 2 smooth C{4}: 0 ; 1 ; x1^2 + x1^3
",
    )?;
    let i = MultiIndex(vec![1, 1, 2]);
    for k in 3..=8 {
        let t = 0.5f64.powi(k);
        println!("t = 2^-{}: residual {:.3e}", k, expansion_residual(&cubic, &i, t, &x, TOL)?);
    }
    Ok(())
}
