use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::plate::LoadModel;

/// Names accepted by [`preset_loads`].
pub const PRESETS: [&str; 4] = ["zero", "linear", "smooth", "semilinear"];

/// Ramp `sin²(2πt)`: zero with zero slope at `t = 0`, one at `t = 1/4`.
pub const RAMP: &str = "sin(2*pi*t)^2";

/// Pulse `sin²(4πt)`: one smooth bump on `[0, 1/4]`.
pub const PULSE: &str = "sin(4*pi*t)^2";

const BUMP: &str = "sin(pi*x1)*sin(pi*x2)";

/// Built-in loads, all with zero surface forces.
///
/// * `linear`: in-plane push `½ r(t) b(x̄)` along `x₁` and transverse force
///   `r(t) b(x̄)` with the slow [`RAMP`] and the sine bump `b`.
/// * `smooth`: transverse [`PULSE`] only. Its time scale is below the first
///   bending period, so the response is governed by inertia rather than by
///   the (ε-dependent) shear compliance of a thick layer.
/// * `semilinear`: `linear` plus the restoring term `−½ sin z`.
pub fn preset_loads(name: &str) -> Result<LoadModel> {
    let zero = Expr::zero;
    let (f, lipschitz) = match name {
        "zero" => return Ok(LoadModel::zero()),
        "linear" => (
            [Expr::parse(&format!("0.5*{RAMP}*{BUMP}"))?, zero(), Expr::parse(&format!("{RAMP}*{BUMP}"))?],
            0.0,
        ),
        "smooth" => ([zero(), zero(), Expr::parse(&format!("{PULSE}*{BUMP}"))?], 0.0),
        "semilinear" => (
            [
                Expr::parse(&format!("0.5*{RAMP}*{BUMP}"))?,
                zero(),
                Expr::parse(&format!("{RAMP}*{BUMP} - 0.5*sin(z)"))?,
            ],
            0.5,
        ),
        other => {
            return Err(Error::InvalidInput(format!("unknown load preset '{other}' (known: {})", PRESETS.join(", "))))
        }
    };
    LoadModel::new(f, [zero(), zero(), zero()], lipschitz)
}
