//! Lame operators `d^2 - B wp(omega; z)` and the closed-form third-order
//! operator commuting with the `B = 2` member.

use crate::elliptic::{g2_q, wp_half_q, wp_taylor, EllipticConstants};
use crate::error::Result;
use crate::operator::{DifferentialOperator, PoleSet};
use crate::qseries::QSeries;
use crate::scalar::{Ring, Scalar};
use crate::series::{TruncatedSeries, Variable};
use std::sync::Arc;

/// `d^2 - b wp` expanded around `center` through `z^z_order`, with a pointwise
/// evaluator for analytic continuation.
pub fn lame_operator(
    consts: &EllipticConstants,
    b: Scalar,
    center: Scalar,
    z_order: i64,
) -> Result<DifferentialOperator> {
    let wp = consts.wp_series(center, z_order)?;
    let one = TruncatedSeries::constant(Variable::Z, center, Scalar::new(1.0, 0.0), z_order);
    let zero = one.zero_like();
    let k = *consts;
    let eval = move |z: Scalar| -> Result<Vec<Scalar>> {
        Ok(vec![Scalar::new(1.0, 0.0), Scalar::new(0.0, 0.0), -b * k.wp(z)?])
    };
    Ok(DifferentialOperator::new(vec![one, zero, wp.scale(-b)])?
        .with_weight(2)
        .with_poles(PoleSet::Lattice(consts.lattice))
        .with_pointwise(Arc::new(eval)))
}

/// `d^3 - 3 wp d - (3/2) wp'`.
pub fn lame_q_closed_form(
    consts: &EllipticConstants,
    center: Scalar,
    z_order: i64,
) -> Result<DifferentialOperator> {
    let wp = consts.wp_series(center, z_order + 1)?;
    let dwp = wp.derivative();
    let wp = wp.truncate(z_order);
    let one = TruncatedSeries::constant(Variable::Z, center, Scalar::new(1.0, 0.0), z_order);
    let zero = one.zero_like();
    Ok(DifferentialOperator::new(vec![one, zero, wp.scale(Scalar::new(-3.0, 0.0)), dwp.scale(Scalar::new(-1.5, 0.0))])?
        .with_weight(3)
        .with_poles(PoleSet::Lattice(consts.lattice)))
}

/// Lame operator over the q-expansion ring, expanded around the half period
/// `1/2` where `wp' = 0` and `wp(1/2)` has a q-expansion.
pub fn lame_operator_q(b: Scalar, q_terms: usize, z_order: i64) -> Result<DifferentialOperator<QSeries>> {
    let center = Scalar::new(0.5, 0.0);
    let wp = wp_taylor(&g2_q(q_terms), &wp_half_q(q_terms), &QSeries::zero(), center, z_order);
    let one = TruncatedSeries::constant(Variable::Z, center, QSeries::one(), z_order);
    let zero = one.zero_like();
    Ok(DifferentialOperator::new(vec![one, zero, wp.scale(-b)])?.with_weight(2))
}

/// Polygonal loop: circle of `radius` around `center`, starting and ending at
/// `center + radius`.
pub fn circle_loop(center: Scalar, radius: f64, vertices: usize) -> Vec<Scalar> {
    (0..=vertices)
        .map(|k| center + Scalar::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / vertices as f64))
        .collect()
}
