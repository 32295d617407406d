//! Built-in example systems.

use crate::error::{Error, Result};
use crate::fields::{parse_system, VectorFieldSystem};

const EUCLID2: &str = "name = euclid2
dim = 2
nfields = 2
step = 2
domain = [-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0
field 2 smooth C{4}: 0 ; 1
function u: x1
function v: x1 + 0.5*x2^2
";

const GRUSHIN: &str = "name = grushin
dim = 2
nfields = 2
step = 2
domain = [-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0
field 2 smooth C{4}: 0 ; x1
function u: x2
function v: x1 + x2
";

const GRUSHIN_C11: &str = "name = grushin_c11
dim = 2
nfields = 2
step = 2
domain = [-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0
field 2 smooth C{1,1}: 0 ; x1 + 0.3*x1*abs(x1)
function u: x2
function v: x1 + x2
";

const HEISENBERG: &str = "name = heisenberg
dim = 3
nfields = 2
step = 2
domain = [-1,1]x[-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0 ; -x2/2
field 2 smooth C{4}: 0 ; 1 ; x1/2
function u: x3
function v: x1 + x3
";

const HEISENBERG_C11: &str = "name = heisenberg_c11
dim = 3
nfields = 2
step = 2
domain = [-1,1]x[-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0 ; -x2/2
field 2 smooth C{1,1}: 0 ; 1 ; x1/2 + 0.2*x1*abs(x1)
function u: x3
function v: x1 + x3
";

const MARTINET: &str = "name = martinet
dim = 3
nfields = 2
step = 3
domain = [-1,1]x[-1,1]x[-1,1]
field 1 smooth C{4}: 1 ; 0 ; 0
field 2 smooth C{4}: 0 ; 1 ; x1^2
function u: x3
function v: x2 + x3
";

/// Names of the built-in systems.
pub const NAMES: [&str; 6] = [
    "euclid2",
    "grushin",
    "grushin_c11",
    "heisenberg",
    "heisenberg_c11",
    "martinet",
];

/// Definition text of a built-in system.
pub fn source(name: &str) -> Result<&'static str> {
    match name {
        "euclid2" => Ok(EUCLID2),
        "grushin" => Ok(GRUSHIN),
        "grushin_c11" => Ok(GRUSHIN_C11),
        "heisenberg" => Ok(HEISENBERG),
        "heisenberg_c11" => Ok(HEISENBERG_C11),
        "martinet" => Ok(MARTINET),
        _ => Err(Error::Invalid(format!("unknown system '{}'", name))),
    }
}

pub fn get(name: &str) -> Result<VectorFieldSystem> {
    parse_system(source(name)?)
}

pub fn all() -> Vec<VectorFieldSystem> {
    NAMES
        .iter()
        .map(|n| get(n).expect("built-in systems parse"))
        .collect()
}
