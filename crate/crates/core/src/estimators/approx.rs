//! Closed-form threshold approximations.

use crate::error::{Error, Result};

/// Critical reduced intensity of the planar Boolean model, `λ r²` at the
/// threshold times π.
pub const PBM_CONSTANT: f64 = 4.51;

/// Threshold `λ_c/γ` predicted by the Poisson Boolean model (streets
/// dense enough to look like the plane): `4.51 / (π (rγ)²)`.
pub fn pbm_threshold(r_gamma: f64) -> Result<f64> {
    if !(r_gamma.is_finite() && r_gamma > 0.0) {
        return Err(Error::invalid(
            "r_gamma",
            format!("must be positive, got {r_gamma}"),
        ));
    }
    Ok(PBM_CONSTANT / (std::f64::consts::PI * r_gamma * r_gamma))
}

/// Smallest positive root λ (per km) of `(λ/γ)·exp(−rλ) = −ln b_c`, the
/// bond-percolation approximation with critical bond probability `b_c`.
///
/// The left side peaks at λ = 1/r, so a root exists only if
/// `1/(e·rγ) ≥ −ln b_c`; it is found by bisection on `(0, min(1/r, 10⁶/γ)]`.
pub fn bernoulli_threshold(gamma: f64, r: f64, b_c: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(
            "gamma",
            format!("must be positive, got {gamma}"),
        ));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("must be positive, got {r}")));
    }
    if !(b_c > 0.0 && b_c < 1.0) {
        return Err(Error::invalid(
            "b_c",
            format!("must lie in (0, 1), got {b_c}"),
        ));
    }
    let target = -b_c.ln();
    let f = |lambda: f64| lambda / gamma * (-r * lambda).exp() - target;
    let upper = (1.0 / r).min(1e6 / gamma);
    if f(upper) < 0.0 {
        return Err(Error::NoRoot { upper });
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pbm_values() {
        assert!((pbm_threshold(1.0).unwrap() - 1.435_577_586_688_896).abs() < 1e-12);
        assert!((pbm_threshold(0.3).unwrap() - 15.95).abs() < 0.005);
        assert!((pbm_threshold(9.5).unwrap() - 0.0159).abs() < 0.00005);
        assert!(pbm_threshold(0.0).is_err());
    }

    #[test]
    fn bernoulli_small_radius_limit() {
        let l = bernoulli_threshold(20.0, 1e-9, 0.5).unwrap();
        assert!((l / 20.0 - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn bernoulli_root_satisfies_equation() {
        for &(g, r) in &[(20.0, 0.015), (20.0, 0.0025), (5.0, 0.01), (1.0, 0.2)] {
            let l = bernoulli_threshold(g, r, 0.5).unwrap();
            let resid = l / g * (-r * l).exp() - 2f64.ln();
            assert!(resid.abs() < 1e-9, "{g} {r}: {resid}");
            // smallest root: left side still increasing
            assert!(l <= 1.0 / r);
        }
    }

    #[test]
    fn bernoulli_without_root() {
        // 1/(e rγ) < ln 2 once rγ exceeds about 0.53
        assert!(matches!(
            bernoulli_threshold(20.0, 0.05, 0.5),
            Err(Error::NoRoot { .. })
        ));
        assert!(bernoulli_threshold(20.0, 0.05, 1.5).is_err());
    }
}
