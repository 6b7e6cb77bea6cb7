//! Closed-form reference correlators.
//!
//! Everything here is evaluated directly from the steady-state and
//! phase-jump formulas, sharing no code with the ODE engine, so that
//! agreement tests between the two are meaningful.

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::correlators::{CorrelatorPair, QuadratureCorrelator};
use crate::error::{Error, Result};

/// Derived spectral quantities of a constant drive:
/// `eps_gap = sqrt(|eps|^2 - 4 Omega^2)` on the real branch (overdamped) or
/// `i sqrt(4 Omega^2 - |eps|^2)` (underdamped), and `kappa_pm = kappa +- eps_gap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyParams {
    pub kappa: f64,
    pub eps: Complex64,
    pub omega: f64,
    pub eps_gap: Complex64,
    pub kappa_plus: Complex64,
    pub kappa_minus: Complex64,
}

impl SteadyParams {
    /// Fails with a stability error unless `|eps|^2 < kappa^2 + 4 Omega^2`.
    pub fn new(kappa: f64, eps: Complex64, omega: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("kappa must be > 0, got {kappa}")));
        }
        let eps_mag_sq = eps.norm_sqr();
        if eps_mag_sq >= kappa * kappa + 4.0 * omega * omega {
            return Err(Error::Unstable { eps_mag: eps.norm(), kappa, omega });
        }
        let gap_sq = eps_mag_sq - 4.0 * omega * omega;
        let eps_gap = if gap_sq >= 0.0 {
            Complex64::new(gap_sq.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-gap_sq).sqrt())
        };
        Ok(SteadyParams {
            kappa,
            eps,
            omega,
            eps_gap,
            kappa_plus: Complex64::new(kappa, 0.0) + eps_gap,
            kappa_minus: Complex64::new(kappa, 0.0) - eps_gap,
        })
    }
}

/// Steady-state quadrature correlator for zero detuning and constant drive:
///
/// ```text
/// K(0, tau) = delta(tau)/4
///           - (kappa |eps| / 4 kappa_+) e^{-kappa_+ |tau|/2} cos^2(phi - theta/2)
///           + (kappa |eps| / 4 kappa_-) e^{-kappa_- |tau|/2} sin^2(phi - theta/2)
/// ```
///
/// with `kappa_pm = kappa +- |eps|`; requires `|eps| < kappa`.
pub fn steady_simple(
    kappa: f64,
    eps_mag: f64,
    theta: f64,
    phi: f64,
    tau: f64,
) -> Result<QuadratureCorrelator> {
    if !(eps_mag >= 0.0) {
        return Err(Error::InvalidArgument("pump magnitude must be >= 0".into()));
    }
    if eps_mag >= kappa {
        return Err(Error::Unstable { eps_mag, kappa, omega: 0.0 });
    }
    let kp = kappa + eps_mag;
    let km = kappa - eps_mag;
    let a = phi - theta / 2.0;
    let (sin_a, cos_a) = a.sin_cos();
    let smooth = -(kappa * eps_mag / (4.0 * kp)) * (-kp * tau.abs() / 2.0).exp() * cos_a * cos_a
        + (kappa * eps_mag / (4.0 * km)) * (-km * tau.abs() / 2.0).exp() * sin_a * sin_a;
    let delta_weight = if tau == 0.0 { 0.25 } else { 0.0 };
    Ok(QuadratureCorrelator { smooth, delta_weight })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    /// `phi = theta/2`, the deamplified quadrature.
    Squeezed,
    /// `phi = (theta + pi)/2`, the amplified quadrature.
    Antisqueezed,
}

/// Full-line integral of the steady-state quadrature correlator:
/// `(1/4)(kappa_-/kappa_+)^2` squeezed, `(1/4)(kappa_+/kappa_-)^2`
/// antisqueezed; both reduce to the vacuum value 1/4 at `eps = 0`.
pub fn integrated_steady(kappa: f64, eps_mag: f64, quad: Quadrature) -> Result<f64> {
    if !(eps_mag >= 0.0) {
        return Err(Error::InvalidArgument("pump magnitude must be >= 0".into()));
    }
    if eps_mag >= kappa {
        return Err(Error::Unstable { eps_mag, kappa, omega: 0.0 });
    }
    let kp = kappa + eps_mag;
    let km = kappa - eps_mag;
    Ok(match quad {
        Quadrature::Squeezed => 0.25 * (km / kp) * (km / kp),
        Quadrature::Antisqueezed => 0.25 * (kp / km) * (kp / km),
    })
}

/// Stable evaluation of `h(x) + h(-x)` and `(h(x) - h(-x)) / x` with
/// `h(x) = e^{x u} / (kappa - x)`, switching to a series for small `|x|` to
/// cover the degenerate branch point `|eps|^2 = 4 Omega^2`.
fn gap_combinations(kappa: f64, u: f64, x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 1e-6 * kappa {
        let x2 = x * x;
        let k1 = 1.0 / kappa;
        let even = 2.0 * k1 * (Complex64::new(1.0, 0.0) + x2 * (0.5 * u * u + u * k1 + k1 * k1));
        let odd = 2.0
            * k1
            * (Complex64::new(u + k1, 0.0)
                + x2 * (u * u * u / 6.0 + 0.5 * u * u * k1 + u * k1 * k1 + k1 * k1 * k1));
        (even, odd)
    } else {
        let hp = (x * u).exp() / (kappa - x);
        let hm = (-x * u).exp() / (kappa + x);
        (hp + hm, (hp - hm) / x)
    }
}

/// Steady-state `K_ff` and `K_ff*` for arbitrary detuning:
///
/// ```text
/// K_ff(0, tau)  = -(kappa eps / 4) [ (1 - 2i Omega/eps_gap) e^{-kappa_- |tau|/2}/kappa_-
///                                  + (1 + 2i Omega/eps_gap) e^{-kappa_+ |tau|/2}/kappa_+ ]
/// K_ff*(0, tau) = delta(tau)/2
///               + (kappa |eps|^2 / 4 eps_gap) ( e^{-kappa_- |tau|/2}/kappa_-
///                                             - e^{-kappa_+ |tau|/2}/kappa_+ )
/// ```
///
/// Both branches of `eps_gap` are handled, including the degenerate limit.
/// Times are reported relative to `t1 = 0`.
pub fn steady_general(p: &SteadyParams, tau: f64) -> CorrelatorPair {
    let u = tau.abs() / 2.0;
    let envelope = (-p.kappa * u).exp();
    let (even, odd) = gap_combinations(p.kappa, u, p.eps_gap);
    // even = g_- + g_+, odd = (g_- - g_+)/eps_gap, both without the e^{-k u}
    // envelope, where g_pm = e^{-kappa_pm |tau|/2} / kappa_pm.
    let two_i_omega = Complex64::new(0.0, 2.0 * p.omega);
    let k_ff = -(p.eps * (p.kappa / 4.0)) * envelope * (even - two_i_omega * odd);
    let k_ffstar = Complex64::new(p.kappa * p.eps.norm_sqr() / 4.0, 0.0) * envelope * odd;
    CorrelatorPair {
        k_ff,
        k_ffstar,
        delta_weight: if tau == 0.0 { 0.5 } else { 0.0 },
        t1: 0.0,
        t2: tau,
    }
}

/// Transient correlators after an abrupt pump-phase jump at `t = 0`
/// (`theta = 0` before, `theta_tilde` after; `Omega = 0`, `|eps| < kappa`):
///
/// ```text
/// K_ff(t1, t1+tau)  = kappa (P_- + P_+) e^{i theta_tilde}
/// K_ff*(t1, t1+tau) = kappa (P_+ - P_-)
/// P_pm = { kappa |eps| / (4 (kappa^2 - |eps|^2))
///            [ (1 - cos theta_tilde) e^{-kappa_pm t1} + i sin theta_tilde e^{-kappa t1} ]
///          - |eps| / (4 kappa_pm) } e^{-kappa_pm tau / 2}
/// ```
pub fn phase_jump(
    kappa: f64,
    eps_mag: f64,
    theta_tilde: f64,
    t1: f64,
    tau: f64,
) -> Result<CorrelatorPair> {
    if !(eps_mag >= 0.0) || !(t1 >= 0.0) || !(tau >= 0.0) {
        return Err(Error::InvalidArgument(
            "phase_jump requires eps_mag >= 0, t1 >= 0, tau >= 0".into(),
        ));
    }
    if eps_mag >= kappa {
        return Err(Error::Unstable { eps_mag, kappa, omega: 0.0 });
    }
    let kp = kappa + eps_mag;
    let km = kappa - eps_mag;
    let transient = kappa * eps_mag / (4.0 * (kappa * kappa - eps_mag * eps_mag));
    let one_minus_cos = 1.0 - theta_tilde.cos();
    let sin_t = theta_tilde.sin();
    let decay_k = (-kappa * t1).exp();
    let p = |k_pm: f64| -> Complex64 {
        let inner = Complex64::new(
            transient * one_minus_cos * (-k_pm * t1).exp() - eps_mag / (4.0 * k_pm),
            transient * sin_t * decay_k,
        );
        inner * (-k_pm * tau / 2.0).exp()
    };
    let p_plus = p(kp);
    let p_minus = p(km);
    Ok(CorrelatorPair {
        k_ff: (p_minus + p_plus) * Complex64::from_polar(kappa, theta_tilde),
        k_ffstar: (p_plus - p_minus) * kappa,
        delta_weight: if tau == 0.0 { 0.5 } else { 0.0 },
        t1,
        t2: t1 + tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::quadrature_correlator;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn steady_simple_values() {
        // tau -> 0+, phi = theta/2: smooth = -kappa eps / (4 kappa_+) = -1/12.
        let k = steady_simple(1.0, 0.5, 0.0, 0.0, 1e-300).unwrap();
        assert!((k.smooth + 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(k.delta_weight, 0.0);

        // phi = pi/4: cos^2 = sin^2 = 1/2.
        let k = steady_simple(1.0, 0.5, 0.0, core::f64::consts::FRAC_PI_4, 0.3).unwrap();
        let kp: f64 = 1.5;
        let km: f64 = 0.5;
        let expected = 0.5
            * (-(0.5 / (4.0 * kp)) * (-kp * 0.15f64).exp() + (0.5 / (4.0 * km)) * (-km * 0.15f64).exp());
        assert!((k.smooth - expected).abs() < 1e-12);

        // Vacuum pump.
        let k = steady_simple(1.0, 0.0, 0.0, 0.7, 2.0).unwrap();
        assert_eq!(k.smooth, 0.0);

        assert!(matches!(steady_simple(1.0, 1.0, 0.0, 0.0, 0.1), Err(Error::Unstable { .. })));
    }

    #[test]
    fn integrated_values() {
        assert!((integrated_steady(1.0, 0.5, Quadrature::Squeezed).unwrap() - 1.0 / 36.0).abs() < 1e-15);
        assert!((integrated_steady(1.0, 0.5, Quadrature::Antisqueezed).unwrap() - 2.25).abs() < 1e-15);
        assert_eq!(integrated_steady(1.0, 0.0, Quadrature::Squeezed).unwrap(), 0.25);
        assert_eq!(integrated_steady(1.0, 0.0, Quadrature::Antisqueezed).unwrap(), 0.25);
        assert!(integrated_steady(1.0, 1.2, Quadrature::Squeezed).is_err());
    }

    #[test]
    fn general_reduces_to_simple_at_zero_detuning() {
        let p = SteadyParams::new(1.0, c(0.5, 0.0), 0.0).unwrap();
        for i in 0..40 {
            let tau = 0.15 * i as f64 + 1e-9;
            let pair = steady_general(&p, tau);
            for &phi in &[0.0, 0.4, 1.1] {
                let q = quadrature_correlator(&pair, phi, phi);
                let reference = steady_simple(1.0, 0.5, 0.0, phi, tau).unwrap();
                assert!((q.smooth - reference.smooth).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn underdamped_kffstar_is_real() {
        let p = SteadyParams::new(1.0, c(0.5, 0.0), 1.0).unwrap();
        assert!(p.eps_gap.re == 0.0 && p.eps_gap.im > 0.0);
        for i in 0..60 {
            let tau = 0.1 * i as f64;
            let pair = steady_general(&p, tau);
            assert!(pair.k_ffstar.im.abs() < 1e-14, "tau = {tau}");
        }
    }

    #[test]
    fn degenerate_branch_is_continuous() {
        // Cross the |eps| = 2 Omega line; series and direct paths must agree.
        let omega = 0.25;
        for &eps_mag in &[0.5 - 1e-5, 0.5 - 1e-7, 0.5, 0.5 + 1e-7, 0.5 + 1e-5] {
            let p = SteadyParams::new(1.0, c(eps_mag, 0.0), omega).unwrap();
            let pair = steady_general(&p, 1.3);
            let reference = steady_general(&SteadyParams::new(1.0, c(0.5, 0.0), omega).unwrap(), 1.3);
            assert!((pair.k_ff - reference.k_ff).norm() < 1e-4);
            assert!((pair.k_ffstar - reference.k_ffstar).norm() < 1e-4);
        }
        // Exactly degenerate evaluation is finite.
        let p = SteadyParams::new(1.0, c(0.5, 0.0), 0.25).unwrap();
        let pair = steady_general(&p, 2.0);
        assert!(pair.k_ff.norm().is_finite() && pair.k_ffstar.norm().is_finite());
    }

    #[test]
    fn phase_jump_without_jump_is_steady() {
        let p = SteadyParams::new(1.0, c(0.5, 0.0), 0.0).unwrap();
        for &t1 in &[0.0, 0.3, 2.0, 10.0] {
            for i in 0..20 {
                let tau = 0.3 * i as f64;
                let jump = phase_jump(1.0, 0.5, 0.0, t1, tau).unwrap();
                let steady = steady_general(&p, tau);
                assert!((jump.k_ff - steady.k_ff).norm() < 1e-13);
                assert!((jump.k_ffstar - steady.k_ffstar).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn phase_jump_relaxes_to_rotated_steady_state() {
        let theta = core::f64::consts::FRAC_PI_2;
        let p = SteadyParams::new(1.0, Complex64::from_polar(0.5, theta), 0.0).unwrap();
        for i in 0..20 {
            let tau = 0.3 * i as f64;
            let jump = phase_jump(1.0, 0.5, theta, 60.0, tau).unwrap();
            let steady = steady_general(&p, tau);
            assert!((jump.k_ff - steady.k_ff).norm() < 1e-12);
            assert!((jump.k_ffstar - steady.k_ffstar).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_jump_rejects_unstable_or_bad_args() {
        assert!(matches!(
            phase_jump(1.0, 1.0, 0.4, 0.1, 0.1),
            Err(Error::Unstable { .. })
        ));
        assert!(phase_jump(1.0, 0.5, 0.4, -0.1, 0.1).is_err());
        assert!(phase_jump(1.0, 0.5, 0.4, 0.1, -0.1).is_err());
    }
}
