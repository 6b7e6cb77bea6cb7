//! Four-parameter transient squeezing decomposition.
//!
//! A correlator pair determines the amplitudes and angles `(A, B, phi, psi)`
//! of
//!
//! ```text
//! K_{phi1 phi2} = A cos(phi1 - phi) cos(phi2 - psi)
//!               + B sin(phi1 - phi) sin(phi2 - psi)
//! ```
//!
//! through `(A - B) e^{i(phi + psi)} = K_ff` and
//! `(A + B) e^{i(phi - psi)} = K_ff*` (smooth part). In the steady state
//! `K_ff*` is real and `phi = psi`, leaving three parameters; transients need
//! all four.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::correlators::CorrelatorPair;

/// The four transient squeezing parameters.
///
/// Engine convention: `a - b = |K_ff| >= 0`, `a + b = |K_ff*| >= 0`, and
/// `phi` canonicalized into `(-pi/2, pi/2]` by the joint shift
/// `(phi, psi) -> (phi +- pi, psi +- pi)`, which leaves the correlator
/// invariant. When either modulus vanishes the corresponding angle
/// combination is undefined; it is set to 0 and the result is flagged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParams {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
    pub psi: f64,
    pub degenerate: bool,
}

/// Extracts `(A, B, phi, psi)` from a scaled pair's smooth parts.
pub fn decompose(pair: &CorrelatorPair) -> SqueezeParams {
    let mag_ff = pair.k_ff.norm();
    let mag_ffstar = pair.k_ffstar.norm();
    let degenerate = mag_ff == 0.0 || mag_ffstar == 0.0;
    let sum_angle = if mag_ff == 0.0 { 0.0 } else { pair.k_ff.arg() };
    let diff_angle = if mag_ffstar == 0.0 { 0.0 } else { pair.k_ffstar.arg() };
    let mut phi = 0.5 * (sum_angle + diff_angle);
    let mut psi = 0.5 * (sum_angle - diff_angle);
    while phi > core::f64::consts::FRAC_PI_2 {
        phi -= core::f64::consts::PI;
        psi -= core::f64::consts::PI;
    }
    while phi <= -core::f64::consts::FRAC_PI_2 {
        phi += core::f64::consts::PI;
        psi += core::f64::consts::PI;
    }
    SqueezeParams {
        a: 0.5 * (mag_ffstar + mag_ff),
        b: 0.5 * (mag_ffstar - mag_ff),
        phi,
        psi,
        degenerate,
    }
}

/// Rebuilds the smooth correlator pair from the parameters; inverse of
/// [`decompose`] for non-degenerate inputs.
pub fn reconstruct(params: &SqueezeParams, delta_weight: f64, t1: f64, t2: f64) -> CorrelatorPair {
    CorrelatorPair {
        k_ff: Complex64::from_polar(params.a - params.b, params.phi + params.psi),
        k_ffstar: Complex64::from_polar(params.a + params.b, params.phi - params.psi),
        delta_weight,
        t1,
        t2,
    }
}

/// Equal-angle correlator `K_{phi phi}` over a grid of quadrature angles;
/// traced in phase space this is always an ellipse.
pub fn ellipse(params: &SqueezeParams, phi_grid: &[f64]) -> Vec<f64> {
    phi_grid
        .iter()
        .map(|&phi| {
            params.a * (phi - params.phi).cos() * (phi - params.psi).cos()
                + params.b * (phi - params.phi).sin() * (phi - params.psi).sin()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{steady_general, steady_simple, SteadyParams};
    use crate::correlators::quadrature_correlator;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(k_ff: Complex64, k_ffstar: Complex64) -> CorrelatorPair {
        CorrelatorPair { k_ff, k_ffstar, delta_weight: 0.0, t1: 0.0, t2: 1.0 }
    }

    #[test]
    fn steady_pair_gives_equal_angles() {
        let p = SteadyParams::new(1.0, c(0.5, 0.0), 0.0).unwrap();
        let params = decompose(&steady_general(&p, 0.8));
        assert_eq!(params.phi, params.psi);
        assert!(!params.degenerate);
    }

    #[test]
    fn vanishing_k_ff_is_degenerate() {
        let params = decompose(&pair(c(0.0, 0.0), c(0.5, 0.0)));
        assert!(params.degenerate);
        assert_eq!((params.a, params.b), (0.25, 0.25));
        assert_eq!((params.phi, params.psi), (0.0, 0.0));
    }

    #[test]
    fn reconstruct_examples() {
        let p = SqueezeParams { a: 1.0, b: 0.0, phi: 0.0, psi: 0.0, degenerate: false };
        let r = reconstruct(&p, 0.0, 0.0, 1.0);
        assert!((r.k_ff - c(1.0, 0.0)).norm() < 1e-15);
        assert!((r.k_ffstar - c(1.0, 0.0)).norm() < 1e-15);

        let p = SqueezeParams { a: 0.3, b: 0.3, phi: 0.2, psi: 0.5, degenerate: false };
        assert_eq!(reconstruct(&p, 0.0, 0.0, 1.0).k_ff.norm(), 0.0);
    }

    #[test]
    fn roundtrip_on_generic_pairs() {
        let cases = [
            pair(c(0.4, -0.3), c(0.6, 0.2)),
            pair(c(-0.1, 0.05), c(0.02, -0.7)),
            pair(c(1e-4, 2e-3), c(-0.5, 0.5)),
        ];
        for original in cases {
            let params = decompose(&original);
            assert!(!params.degenerate);
            let back = reconstruct(&params, 0.0, original.t1, original.t2);
            assert!((back.k_ff - original.k_ff).norm() < 1e-12);
            assert!((back.k_ffstar - original.k_ffstar).norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_branch_is_deterministic_and_in_range() {
        let a = decompose(&pair(c(-0.4, -0.1), c(-0.3, 0.2)));
        let b = decompose(&pair(c(-0.4, -0.1), c(-0.3, 0.2)));
        assert_eq!(a, b);
        assert!(a.phi > -core::f64::consts::FRAC_PI_2 && a.phi <= core::f64::consts::FRAC_PI_2);
        assert!(a.a - a.b >= 0.0 && a.a + a.b >= 0.0);
    }

    #[test]
    fn parameterization_matches_direct_assembly() {
        // Eq.-level identity: the (A, B, phi, psi) form must reproduce the
        // quadrature correlator for arbitrary angle pairs.
        let p = pair(c(0.31, -0.17), c(0.44, 0.29));
        let params = decompose(&p);
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            // xorshift is plenty for test angle sampling
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let phi1 = (next() - 0.5) * 20.0;
            let phi2 = (next() - 0.5) * 20.0;
            let direct = quadrature_correlator(&p, phi1, phi2).smooth;
            let via_params = params.a
                * (phi1 - params.phi).cos()
                * (phi2 - params.psi).cos()
                + params.b * (phi1 - params.phi).sin() * (phi2 - params.psi).sin();
            assert!((direct - via_params).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_is_a_conic_in_double_angle() {
        let params = decompose(&pair(c(0.2, 0.45), c(0.7, -0.1)));
        // K(phi) = c0 + c1 cos(2 phi) + c2 sin(2 phi) exactly.
        let c0 = 0.5 * (params.a + params.b) * (params.phi - params.psi).cos();
        let c1 = 0.5 * (params.a - params.b) * (params.phi + params.psi).cos();
        let c2 = 0.5 * (params.a - params.b) * (params.phi + params.psi).sin();
        let grid: Vec<f64> = (0..37).map(|i| 0.17 * i as f64).collect();
        for (v, &phi) in ellipse(&params, &grid).iter().zip(&grid) {
            let conic = c0 + c1 * (2.0 * phi).cos() + c2 * (2.0 * phi).sin();
            assert!((v - conic).abs() < 1e-13);
        }
    }

    #[test]
    fn isotropic_params_trace_a_circle() {
        let params = SqueezeParams { a: 0.4, b: 0.4, phi: 0.3, psi: 0.3, degenerate: false };
        let grid: Vec<f64> = (0..20).map(|i| 0.33 * i as f64).collect();
        let values = ellipse(&params, &grid);
        for v in &values {
            assert!((v - values[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn steady_ellipse_extrema_match_closed_form() {
        let theta = 0.6;
        let p = SteadyParams::new(1.0, Complex64::from_polar(0.5, theta), 0.0).unwrap();
        let tau = 0.9;
        let params = decompose(&steady_general(&p, tau));
        let grid = [theta / 2.0, (theta + core::f64::consts::PI) / 2.0];
        let values = ellipse(&params, &grid);
        for (v, &phi) in values.iter().zip(&grid) {
            let reference = steady_simple(1.0, 0.5, theta, phi, tau).unwrap();
            assert!((v - reference.smooth).abs() < 1e-12);
        }
    }
}
