//! Blockwise calculus of the weighted group-ℓ2 norm: proximal map, ball
//! projection and projection onto the subdifferential.

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Scale factor `max(0, 1 - tau / ‖v‖)` of the block soft-threshold.
#[inline]
pub fn shrink_factor(norm: f64, tau: f64) -> f64 {
    if norm <= tau {
        0.0
    } else {
        1.0 - tau / norm
    }
}

/// `argmin_u ½‖u - v‖² + tau‖u‖₂`.
pub fn prox_block(v: &[f64], tau: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    prox_block_in_place(&mut out, tau);
    out
}

pub fn prox_block_in_place(v: &mut [f64], tau: f64) {
    let s = shrink_factor(norm2(v), tau);
    v.iter_mut().for_each(|a| *a *= s);
}

/// Euclidean projection onto the closed ball `{u : ‖u‖ ≤ radius}`.
pub fn project_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    project_ball_in_place(&mut out, radius);
    out
}

pub fn project_ball_in_place(v: &mut [f64], radius: f64) {
    let n = norm2(v);
    if n > radius {
        let s = if n > 0.0 { radius / n } else { 0.0 };
        v.iter_mut().for_each(|a| *a *= s);
    }
}

/// Distance from `v` to the ball of the given radius, i.e. `‖v - Π(v)‖`.
#[inline]
pub fn ball_excess(v: &[f64], radius: f64) -> f64 {
    (norm2(v) - radius).max(0.0)
}

/// Projection of `u` onto `∂(lam_w ‖·‖)(y_block)`.
///
/// At `y_block = 0` the set is the ball of radius `lam_w`; elsewhere it is
/// the single point `lam_w · y / ‖y‖`.
pub fn project_subdiff_block(u: &[f64], y_block: &[f64], lam_w: f64) -> Vec<f64> {
    let ny = norm2(y_block);
    if ny == 0.0 {
        project_ball(u, lam_w)
    } else {
        y_block.iter().map(|a| lam_w * a / ny).collect()
    }
}
