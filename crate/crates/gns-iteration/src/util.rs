//! Small numerical helpers shared by the stages.

use gns_torus::ops::partial;
use gns_torus::Field;

use crate::Result;

/// `∂_t` of a list of fields by fourth-order central differences improved by
/// two Richardson levels (steps `h`, `h/2`, `h/4`), eighth order overall.
pub fn fields_derivative<F>(f: F, t: f64, h: f64) -> Result<Vec<Field>>
where
    F: Fn(f64) -> Result<Vec<Field>>,
{
    let d = |h: f64| -> Result<Vec<Field>> {
        let (a, b, c, e) = (f(t - 2.0 * h)?, f(t - h)?, f(t + h)?, f(t + 2.0 * h)?);
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            out.push(a[i].axpy(-8.0, &b[i])?.axpy(8.0, &c[i])?.axpy(-1.0, &e[i])?.scale(1.0 / (12.0 * h)));
        }
        Ok(out)
    };
    let (d1, d2, d4) = (d(h)?, d(0.5 * h)?, d(0.25 * h)?);
    let mut out = Vec::with_capacity(d1.len());
    for i in 0..d1.len() {
        let ab = d2[i].axpy(1.0 / 15.0, &d2[i].sub(&d1[i])?)?;
        let bc = d4[i].axpy(1.0 / 15.0, &d4[i].sub(&d2[i])?)?;
        out.push(bc.axpy(1.0 / 63.0, &bc.sub(&ab)?)?);
    }
    Ok(out)
}

/// Single-field version of [`fields_derivative`].
pub fn field_derivative<F>(f: F, t: f64, h: f64) -> Result<Field>
where
    F: Fn(f64) -> Result<Field>,
{
    Ok(fields_derivative(|s| Ok(vec![f(s)?]), t, h)?.remove(0))
}

/// `max_a ‖∂_a f‖∞`.
pub fn gradient_sup(f: &Field) -> f64 {
    partial(f, 0).sup().max(partial(f, 1).sup())
}

/// `‖lhs − rhs‖∞` relative to `scale`, or absolute when the scale vanishes.
pub fn relative_to(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
