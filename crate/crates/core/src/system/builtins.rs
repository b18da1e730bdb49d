use crate::error::{Error, Result};

use super::{parse_problem, Anchor, ParameterizedSystem};

pub const BUILTIN_NAMES: [&str; 4] = ["circle", "linear2x3", "sphere", "parabola-underdet"];

const CIRCLE: &str = "\
dims m=2 n=1 p=1
anchor y0=(1,0) x0=(1)
eq: y1^2 + y2^2 - x1
";

// A(y - y0) + B(x - x0) with A = [[1,2,0],[0,1,1]], B = [[1,0],[-1,2]].
const LINEAR_2X3: &str = "\
dims m=3 n=2 p=2
anchor y0=(1,2,0) x0=(1,0)
eq: y1 + 2 y2 + x1 - 6
eq: y2 + y3 - x1 + 2 x2 - 1
";

const SPHERE: &str = "\
dims m=3 n=1 p=1
anchor y0=(1,0,0) x0=(1)
eq: y1^2 + y2^2 + y3^2 - x1
";

// K(x) = [x, 1] moves with x, and r(x) = -x - x^2 is not linear in x.
const PARABOLA_UNDERDET: &str = "\
dims m=2 n=1 p=1
anchor y0=(0,0) x0=(0)
eq: y2 - y1^2 + x1 y1 - x1 - x1^2
";

/// Looks up one of the registered example systems with its anchor.
pub fn builtin(name: &str) -> Result<(ParameterizedSystem, Anchor)> {
    let text = match name {
        "circle" => CIRCLE,
        "linear2x3" => LINEAR_2X3,
        "sphere" => SPHERE,
        "parabola-underdet" => PARABOLA_UNDERDET,
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    let pf = parse_problem(text)?;
    let mut system = pf.system;
    system.name = name.to_string();
    let anchor = pf.anchor.expect("builtin problems carry an anchor");
    Ok((system, anchor))
}
