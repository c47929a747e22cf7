//! Slater-type radial integrals and the local-resolvent element.
//!
//! Every closed-form element reduces to
//! `∫₀^∞ r^a e^(−σr) dr = Γ(a+1)/σ^(a+1)`. The resolvent element has a
//! rational weight and goes through adaptive quadrature.

use crate::error::{Error, Result};
use crate::model::{Constants, PotentialSpec, RadialFunction, SpinorTrial};
use crate::quadrature::{integrate_half_line, QuadratureConfig};
use crate::scalar::{lit, CompensatedSum, Real};
use crate::special::{gamma, ln_gamma};

/// `∫₀^∞ r^a e^(−σ r) dr`.
pub fn moment<T: Real>(a: T, sigma: T) -> Result<T> {
    if !(a > -T::one()) {
        return Err(Error::Domain(format!("moment power must exceed -1, got {a}")));
    }
    if !(sigma > T::zero()) {
        return Err(Error::Domain(format!("moment decay must be positive, got {sigma}")));
    }
    let n = a + T::one();
    if n < lit(100.0) {
        Ok(gamma(n) / sigma.powf(n))
    } else {
        Ok((ln_gamma(n) - n * sigma.ln()).exp())
    }
}

/// `∫ f1 f2 r^k dr`, or a divergence error when some term pair is not
/// integrable at the origin.
pub fn radial_product_moment<T: Real>(f1: &RadialFunction<T>, f2: &RadialFunction<T>, k: T) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for t1 in f1.terms() {
        for t2 in f2.terms() {
            let c = t1.coeff() * t2.coeff();
            if c == T::zero() {
                continue;
            }
            let a = t1.power() + t2.power() + k;
            if !(a > -T::one()) {
                return Err(Error::Divergent(format!(
                    "integrand behaves like r^{a} at the origin"
                )));
            }
            acc.add(c * moment(a, t1.zeta() + t2.zeta())?);
        }
    }
    Ok(acc.value())
}

/// Radial scalar product `(f1, f2) = ∫ f1 f2 r² dr`.
pub fn overlap<T: Real>(f1: &RadialFunction<T>, f2: &RadialFunction<T>) -> T {
    radial_product_moment(f1, f2, lit(2.0)).expect("RadialTerm invariants keep r^2 products integrable")
}

/// `(f1, eΦ f2) = −Z ∫ f1 f2 r dr`.
pub fn potential_element<T: Real>(
    f1: &RadialFunction<T>,
    f2: &RadialFunction<T>,
    potential: &PotentialSpec<T>,
) -> Result<T> {
    let z = potential.charge();
    if z == T::zero() {
        return Ok(T::zero());
    }
    Ok(-z * radial_product_moment(f1, f2, T::one())?)
}

/// `∫ g(r)² w(r) dr` by adaptive quadrature.
pub fn weighted_square<T: Real, W: Fn(T) -> T>(
    g: &RadialFunction<T>,
    weight: W,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    integrate_half_line(
        |r| {
            let v = g.eval(r);
            if v == T::zero() {
                T::zero()
            } else {
                v * v * weight(r)
            }
        },
        cfg,
    )
    .map(|i| i.value)
}

/// `∫ g² r³ / (A r + Z) dr` for a denominator scale `A = ε + mc² > 0`.
///
/// This is the radial form of `(σ·p u, [ε + mc² − eΦ]⁻¹ σ·p u)` when `g` is
/// the `σ·p` image of `u`; the inverse is a local multiplication because the
/// potential is.
pub fn resolvent_integral<T: Real>(
    g: &RadialFunction<T>,
    a: T,
    potential: &PotentialSpec<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    let z = potential.charge();
    if !(a > T::zero()) {
        return Err(Error::Branch(format!(
            "resolvent needs eps + mc^2 > 0, got {a}; use the finite lower-space path"
        )));
    }
    if z < T::zero() {
        return Err(Error::Branch(
            "resolvent denominator vanishes inside the domain for a repulsive potential".into(),
        ));
    }
    if z == T::zero() {
        return Ok(radial_product_moment(g, g, lit(2.0))? / a);
    }
    weighted_square(g, |r| r * r * r / (a * r + z), cfg)
}

/// Resolvent element with a rest-mass-inclusive energy `eps`; the caller
/// multiplies by `c²`.
pub fn resolvent_element<T: Real>(
    g: &RadialFunction<T>,
    eps: T,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    resolvent_integral(g, eps + constants.rest_energy(), potential, cfg)
}

/// Normalized radial density `r²(u² + l²)/[(u,u) + (l,l)]` on a grid.
pub fn radial_density<T: Real>(trial: &SpinorTrial<T>, r_grid: &[T]) -> Result<Vec<T>> {
    if r_grid.iter().any(|&r| !(r > T::zero())) {
        return Err(Error::InvalidGrid("radii must be positive".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("radii must be strictly increasing".into()));
    }
    let norm = trial.norm_squared();
    Ok(r_grid
        .iter()
        .map(|&r| {
            let u = trial.upper.radial.eval(r);
            let l = trial.lower.radial.eval(r);
            r * r * (u * u + l * l) / norm
        })
        .collect())
}
