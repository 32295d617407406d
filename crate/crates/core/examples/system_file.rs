//! Load a system from text, audit its declared smoothness and round-trip it.

use hormander::fields::{audit_smoothness, hormander_rank, parse_system, system_to_text};

const TEXT: &str = "name = engel
dim = 4
nfields = 2
step = 3
domain = [-1,1]x[-1,1]x[-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0 ; 0 ; 0
field 2 smooth C{4}: 0 ; 1 ; x1 ; x1^2/2
function u: x4
";

fn main() -> hormander::Result<()> {
    let sys = parse_system(TEXT)?;
    println!("{}: dim {}, {} fields, step {}", sys.name, sys.dim, sys.n(), sys.step);
    println!("rank at 0: {:?}", hormander_rank(&sys, &[0.0; 4])?);
    println!("audit: {} issues", audit_smoothness(&sys).len());
    let again = parse_system(&system_to_text(&sys))?;
    println!("round trip equal: {}", again == sys);

    match parse_system("name = bad\ndim = 2\nfield 1 smooth C{4}: 1 ; (\n") {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("error: {}", e),
    }
    Ok(())
}
