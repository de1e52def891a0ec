//! Uniform-grid interpolation used to carry optimized angles to a deeper
//! circuit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::ParameterSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpKind {
    /// Piecewise linear.
    Linear,
    /// Not-a-knot cubic spline; needs at least four samples.
    Cubic,
}

/// Resamples `values`, taken at uniform positions on `[0, 1]`, at `new_len`
/// uniform positions on the same interval. Output values that land on an
/// input knot are copied exactly.
pub fn interpolate(values: &[f64], new_len: usize, kind: InterpKind) -> Result<Vec<f64>> {
    let m = values.len();
    if m < 2 || new_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs at least 2 input and 2 output points (got {m} -> {new_len})"
        )));
    }
    let second = match kind {
        InterpKind::Linear => None,
        InterpKind::Cubic => Some(not_a_knot_second_derivatives(values)?),
    };

    let last = new_len - 1;
    let out = (0..new_len)
        .map(|j| {
            // Position in knot units is j * (m - 1) / last, kept rational.
            let num = j * (m - 1);
            let (i, rem) = (num / last, num % last);
            if rem == 0 {
                return values[i];
            }
            let u = rem as f64 / last as f64;
            let (y0, y1) = (values[i], values[i + 1]);
            let base = y0 + u * (y1 - y0);
            match &second {
                None => base,
                Some(mm) => {
                    let v = 1.0 - u;
                    base + (mm[i] * (v * v * v - v) + mm[i + 1] * (u * u * u - u)) / 6.0
                }
            }
        })
        .collect();
    Ok(out)
}

/// Second derivatives of the not-a-knot spline through `y` on a unit-spaced
/// grid. Third-derivative continuity at the first and last interior knots
/// closes the system.
fn not_a_knot_second_derivatives(y: &[f64]) -> Result<Vec<f64>> {
    let m = y.len();
    if m < 4 {
        return Err(Error::InvalidArgument(format!(
            "cubic interpolation needs at least 4 points, got {m}"
        )));
    }
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    a[(0, 0)] = 1.0;
    a[(0, 1)] = -2.0;
    a[(0, 2)] = 1.0;
    for i in 1..m - 1 {
        a[(i, i - 1)] = 1.0;
        a[(i, i)] = 4.0;
        a[(i, i + 1)] = 1.0;
        rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
    }
    a[(m - 1, m - 3)] = 1.0;
    a[(m - 1, m - 2)] = -2.0;
    a[(m - 1, m - 1)] = 1.0;

    let solved = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular spline system".into()))?;
    Ok(solved.iter().copied().collect())
}

/// Schedule for depth `p + 1` from an optimized depth-`p` schedule.
///
/// At `p = 1` the second layer scales the first: `gamma * 1.2`, `beta * 0.8`.
/// Otherwise both angle vectors are resampled, cubic from `p = 4` on and
/// linear below.
pub fn transfer_parameters(params: &ParameterSchedule) -> ParameterSchedule {
    let p = params.depth();
    let (gammas, betas) = if p == 1 {
        let (g, b) = (params.gammas()[0], params.betas()[0]);
        // x * 6 / 5 rounds once, so 0.5 maps to exactly 0.6.
        (vec![g, g * 6.0 / 5.0], vec![b, b * 4.0 / 5.0])
    } else {
        let kind = if p >= 4 { InterpKind::Cubic } else { InterpKind::Linear };
        let resample = |v: &[f64]| interpolate(v, p + 1, kind).expect("p >= 2 satisfies preconditions");
        (resample(params.gammas()), resample(params.betas()))
    };
    ParameterSchedule::new(gammas, betas).expect("equal non-empty lengths")
}

/// Starting angles for depth `current_depth + 1` when growing from `best`.
///
/// Usually `best` has `current_depth` layers and this is
/// [`transfer_parameters`]. When no improvement was found at the current
/// depth, `best` is shallower; it is then resampled straight to the new
/// depth, repeating a lone layer and using cubic interpolation only when
/// both the current depth and `best` have at least four layers.
pub fn grow_schedule(best: &ParameterSchedule, current_depth: usize) -> ParameterSchedule {
    if best.depth() == current_depth {
        return transfer_parameters(best);
    }
    let new_len = current_depth + 1;
    let kind = if current_depth >= 4 && best.depth() >= 4 {
        InterpKind::Cubic
    } else {
        InterpKind::Linear
    };
    let resample = |v: &[f64]| match v {
        [only] => vec![*only; new_len],
        _ => interpolate(v, new_len, kind).expect("at least two samples"),
    };
    ParameterSchedule::new(resample(best.gammas()), resample(best.betas())).expect("equal non-empty lengths")
}
