//! The energy expectation value of a constrained-component spinor
//! `ψ = (u, Ωu)` and its behaviour along one-parameter coupling families.
//!
//! For `l = Ωu` the Rayleigh quotient is
//!
//! ```text
//! ε[u] = { mc²[(u,u) − (l,l)] + (u,eΦu) + (l,eΦl) + 2c (l, σ·p u) } / [(u,u) + (l,l)]
//! ```
//!
//! Energies are carried rest-mass-inclusive but the breakdown also exposes
//! `ε − mc²` and `ε + mc²` evaluated without cancelling against `mc²`.

use crate::error::{Error, Result};
use crate::integrals::{overlap, potential_element, radial_product_moment};
use crate::model::{gamma_for_real_kappa, sigma_p_apply, sigma_p_image, Component, Constants, PotentialSpec};
use crate::scalar::{lit, Real};

/// How the lower component is generated from the upper one.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec<T> {
    /// `l = λ σ·p u`.
    KineticBalance { lambda: T },
    /// `l = ζ⁻¹ [(1−γ(κ))/(1+γ(κ))]^(1/2) σ·p u` for a single-exponent `u`.
    KappaScaled { kappa_param: T },
    /// `l = λ u` radially, in the flipped channel.
    SameRadial { lambda: T },
    /// A fixed lower component.
    Explicit { lower: Component<T> },
}

impl<T: Real> CouplingSpec<T> {
    /// Whether the lower channel is always the flip of the upper one.
    pub fn flips_channel(&self) -> bool {
        !matches!(self, CouplingSpec::Explicit { .. })
    }
}

/// The one-parameter coupling families scanned by the drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingFamily {
    KineticBalance,
    SameRadial,
    /// Parametrized by `|κ|`.
    KappaScaled,
}

impl CouplingFamily {
    pub const ALL: [CouplingFamily; 3] = [
        CouplingFamily::KineticBalance,
        CouplingFamily::SameRadial,
        CouplingFamily::KappaScaled,
    ];

    pub fn spec<T: Real>(self, param: T) -> CouplingSpec<T> {
        match self {
            CouplingFamily::KineticBalance => CouplingSpec::KineticBalance { lambda: param },
            CouplingFamily::SameRadial => CouplingSpec::SameRadial { lambda: param },
            CouplingFamily::KappaScaled => CouplingSpec::KappaScaled { kappa_param: param },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CouplingFamily::KineticBalance => "kb",
            CouplingFamily::SameRadial => "same-radial",
            CouplingFamily::KappaScaled => "kappa-scaled",
        }
    }
}

/// `ζ⁻¹ [(1−γ)/(1+γ)]^(1/2)`, written as `αZ / (|κ| (1+γ) ζ)` to avoid the
/// cancellation in `1 − γ`.
pub fn kappa_scale<T: Real>(kappa_param: T, zeta: T, potential: &PotentialSpec<T>, constants: &Constants<T>) -> Result<T> {
    let k = kappa_param.abs();
    let gamma = gamma_for_real_kappa(k, potential.charge(), constants)?;
    let az = constants.alpha() * potential.charge().abs();
    Ok(az / (k * (T::one() + gamma) * zeta))
}

/// Builds `l = Ωu` for the given coupling.
pub fn materialize_lower<T: Real>(
    upper: &Component<T>,
    spec: &CouplingSpec<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<Component<T>> {
    match spec {
        CouplingSpec::KineticBalance { lambda } => Ok(sigma_p_apply(&upper.radial, upper.channel)?.scaled(*lambda)),
        CouplingSpec::KappaScaled { kappa_param } => {
            let zeta = upper.radial.single_exponent().ok_or_else(|| {
                Error::Domain("kappa-parametrized coupling needs a single-exponent upper function".into())
            })?;
            let s = kappa_scale(*kappa_param, zeta, potential, constants)?;
            Ok(sigma_p_apply(&upper.radial, upper.channel)?.scaled(s))
        }
        CouplingSpec::SameRadial { lambda } => Ok(Component::new(upper.radial.scaled(*lambda), upper.channel.flipped())),
        CouplingSpec::Explicit { lower } => Ok(lower.clone()),
    }
}

/// Pieces of the energy quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<T> {
    /// Total energy including `mc²`.
    pub eps: T,
    pub norm_u: T,
    pub norm_l: T,
    pub pot_u: T,
    pub pot_l: T,
    /// `c[(l, σ·p u) + (u, σ·p l)]`.
    pub cross: T,
    /// `mc²` the breakdown was evaluated with.
    pub rest: T,
}

impl<T: Real> EnergyBreakdown<T> {
    fn assemble(norm_u: T, norm_l: T, pot_u: T, pot_l: T, cross: T, rest: T) -> Self {
        let mut b = Self {
            eps: T::zero(),
            norm_u,
            norm_l,
            pot_u,
            pot_l,
            cross,
            rest,
        };
        b.eps = rest + b.shift();
        b
    }

    pub fn norm(&self) -> T {
        self.norm_u + self.norm_l
    }

    /// `ε − mc²`.
    pub fn shift(&self) -> T {
        let two = lit::<T>(2.0);
        (self.pot_u + self.pot_l + self.cross - two * self.rest * self.norm_l) / self.norm()
    }

    /// `ε + mc²`.
    pub fn offset_from_negative(&self) -> T {
        let two = lit::<T>(2.0);
        (self.pot_u + self.pot_l + self.cross + two * self.rest * self.norm_u) / self.norm()
    }

    /// `⟨eΦ⟩` over the normalized spinor.
    pub fn potential_expectation(&self) -> T {
        (self.pot_u + self.pot_l) / self.norm()
    }

    /// Relative residual of `ε·N = mc²(n_u − n_l) + pot_u + pot_l + cross`.
    pub fn identity_residual(&self) -> T {
        let rhs = self.rest * (self.norm_u - self.norm_l) + self.pot_u + self.pot_l + self.cross;
        let lhs = self.eps * self.norm();
        let scale = self.rest * self.norm() + self.pot_u.abs() + self.pot_l.abs() + self.cross.abs();
        (lhs - rhs).abs() / scale
    }

    /// Rough absolute roundoff level of [`shift`](Self::shift) and
    /// [`offset_from_negative`](Self::offset_from_negative).
    pub fn roundoff(&self) -> T {
        let mag = self.pot_u.abs() + self.pot_l.abs() + self.cross.abs() + lit::<T>(2.0) * self.rest * self.norm_l.max(self.norm_u);
        lit::<T>(16.0) * T::epsilon() * mag / self.norm()
    }
}

fn breakdown_with_lower<T: Real>(
    upper: &Component<T>,
    lower: &Component<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<EnergyBreakdown<T>> {
    let norm_u = overlap(&upper.radial, &upper.radial);
    let norm_l = overlap(&lower.radial, &lower.radial);
    let pot_u = potential_element(&upper.radial, &upper.radial, potential)?;
    let pot_l = potential_element(&lower.radial, &lower.radial, potential)?;
    let cross = if lower.channel == upper.channel.flipped() {
        let g = sigma_p_image(&upper.radial, upper.channel);
        lit::<T>(2.0) * constants.c() * radial_product_moment(&lower.radial, &g.radial, lit(2.0))?
    } else {
        // Different angular parts are orthogonal.
        T::zero()
    };
    if !(norm_u + norm_l > T::zero()) {
        return Err(Error::InvariantViolation("trial spinor has zero combined norm".into()));
    }
    Ok(EnergyBreakdown::assemble(norm_u, norm_l, pot_u, pot_l, cross, constants.rest_energy()))
}

/// Energy of `(u, Ωu)` for the given coupling.
pub fn energy<T: Real>(
    upper: &Component<T>,
    spec: &CouplingSpec<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<EnergyBreakdown<T>> {
    let lower = materialize_lower(upper, spec, potential, constants)?;
    breakdown_with_lower(upper, &lower, potential, constants)
}

/// A fixed upper component together with one coupling family, with all
/// matrix elements precomputed so that the energy is an O(1) function of
/// the family parameter.
///
/// Every family is linear in a scale `s(param)` multiplying a fixed lower
/// direction `d`, so `n_l = s²(d,d)`, `pot_l = s²(d,eΦd)` and
/// `cross = 2c·s·(d, σ·p u)`.
#[derive(Debug, Clone)]
pub struct CouplingProfile<T> {
    pub family: CouplingFamily,
    pub potential: PotentialSpec<T>,
    pub constants: Constants<T>,
    upper: Component<T>,
    zeta: Option<T>,
    norm_u: T,
    pot_u: T,
    dir_norm: T,
    dir_pot: T,
    dir_cross: T,
    p_squared: Option<T>,
}

impl<T: Real> CouplingProfile<T> {
    pub fn new(
        upper: &Component<T>,
        family: CouplingFamily,
        potential: &PotentialSpec<T>,
        constants: &Constants<T>,
    ) -> Result<Self> {
        let g = sigma_p_image(&upper.radial, upper.channel);
        let direction = match family {
            CouplingFamily::KineticBalance | CouplingFamily::KappaScaled => {
                sigma_p_apply(&upper.radial, upper.channel)?.radial
            }
            CouplingFamily::SameRadial => upper.radial.clone(),
        };
        let zeta = upper.radial.single_exponent();
        if family == CouplingFamily::KappaScaled && zeta.is_none() {
            return Err(Error::Domain(
                "kappa-parametrized coupling needs a single-exponent upper function".into(),
            ));
        }
        Ok(Self {
            family,
            potential: *potential,
            constants: *constants,
            upper: upper.clone(),
            zeta,
            norm_u: overlap(&upper.radial, &upper.radial),
            pot_u: potential_element(&upper.radial, &upper.radial, potential)?,
            dir_norm: overlap(&direction, &direction),
            dir_pot: potential_element(&direction, &direction, potential)?,
            dir_cross: radial_product_moment(&direction, &g.radial, lit(2.0))?,
            p_squared: radial_product_moment(&g.radial, &g.radial, lit(2.0)).ok(),
        })
    }

    pub fn upper(&self) -> &Component<T> {
        &self.upper
    }

    /// Admissible parameter interval (open at finite ends).
    pub fn domain(&self) -> (T, T) {
        match self.family {
            CouplingFamily::KappaScaled => (self.constants.alpha() * self.potential.charge().abs(), T::infinity()),
            _ => (T::neg_infinity(), T::infinity()),
        }
    }

    /// Lower-direction scale at a family parameter.
    pub fn scale(&self, param: T) -> Result<T> {
        match self.family {
            CouplingFamily::KappaScaled => kappa_scale(param, self.zeta.expect("checked in new"), &self.potential, &self.constants),
            _ => Ok(param),
        }
    }

    /// Family parameter producing a given lower-direction scale, if reachable.
    pub fn param_for_scale(&self, s: T) -> Option<T> {
        match self.family {
            CouplingFamily::KappaScaled => {
                // s ζ = αZ / (κ(1+γ)) ⇔ t = sζ, γ = (1−t²)/(1+t²), κ = αZ/√(1−γ²)
                let t = s * self.zeta?;
                if !(t > T::zero() && t < T::one()) {
                    return None;
                }
                let t2 = t * t;
                let az = self.constants.alpha() * self.potential.charge().abs();
                if az == T::zero() {
                    return None;
                }
                // √(1−γ²) = 2t/(1+t²)
                Some(az * (T::one() + t2) / (lit::<T>(2.0) * t))
            }
            _ => Some(s),
        }
    }

    pub fn energy_at(&self, param: T) -> Result<EnergyBreakdown<T>> {
        let s = self.scale(param)?;
        Ok(self.energy_at_scale(s))
    }

    pub fn energy_at_scale(&self, s: T) -> EnergyBreakdown<T> {
        let two = lit::<T>(2.0);
        EnergyBreakdown::assemble(
            self.norm_u,
            s * s * self.dir_norm,
            self.pot_u,
            s * s * self.dir_pot,
            two * self.constants.c() * s * self.dir_cross,
            self.constants.rest_energy(),
        )
    }

    /// `ε(s + ds) − ε(s)` without forming either energy, together with the
    /// magnitude of the terms that were summed (for roundoff estimates).
    fn increment(&self, s: T, ds: T) -> (T, T) {
        let two = lit::<T>(2.0);
        let rest = self.constants.rest_energy();
        // ε(s) = N(s)/D(s), N = n0 + 2 b s + q s², D = norm_u + dir_norm s²
        let n0 = rest * self.norm_u + self.pot_u;
        let b = self.constants.c() * self.dir_cross;
        let q = self.dir_pot - rest * self.dir_norm;
        let n = n0 + two * b * s + q * s * s;
        let d = self.norm_u + self.dir_norm * s * s;
        let n1 = two * b + two * q * s;
        let d1 = two * self.dir_norm * s;
        let d_next = d + (d1 + self.dir_norm * ds) * ds;
        let x = n1 * d - n * d1;
        let y = q * d - n * self.dir_norm;
        let value = ds * (x + ds * y) / (d * d_next);
        let size = ds.abs() * ((n1 * d).abs() + (n * d1).abs() + ds.abs() * ((q * d).abs() + (n * self.dir_norm).abs()))
            / (d * d_next);
        (value, size)
    }

    /// Lower-direction scales at which the positive and negative stationary
    /// points roughly sit, from the 2×2 problem with `ε ≈ ±mc²`.
    pub fn scale_seeds(&self) -> (T, T) {
        let c = self.constants.c();
        let two = lit::<T>(2.0);
        let b = c * self.dir_cross;
        let maximum = b / (two * c * c * self.dir_norm);
        let minimum = -two * c * c * self.norm_u / b;
        (maximum, minimum)
    }

    /// `⟨p²⟩ = (σ·p u, σ·p u)/(u,u)`, an error when it diverges.
    pub fn p_squared(&self) -> Result<T> {
        self.p_squared
            .map(|p2| p2 / self.norm_u)
            .ok_or_else(|| Error::Divergent("sigma.p image of the upper component is not square integrable".into()))
    }

    /// The lower direction (scale 1).
    pub fn lower_at_scale(&self, s: T) -> Result<Component<T>> {
        let g = sigma_p_apply(&self.upper.radial, self.upper.channel)?;
        Ok(match self.family {
            CouplingFamily::SameRadial => Component::new(self.upper.radial.scaled(s), self.upper.channel.flipped()),
            _ => g.scaled(s),
        })
    }
}

/// Second derivative of the energy with respect to the family parameter, by
/// central differences with step `max(1e−5|λ|, 1e−8)`.
///
/// The two increments `ε(λ±h) − ε(λ)` are formed algebraically from the
/// quadratic numerator and denominator of the quotient instead of by
/// subtracting energies of size `mc²`.
pub fn coupling_curvature<T: Real>(profile: &CouplingProfile<T>, at_param: T) -> Result<T> {
    let h = (lit::<T>(1e-5) * at_param.abs()).max(lit(1e-8));
    let s = profile.scale(at_param)?;
    let up = profile.scale(at_param + h)? - s;
    let down = profile.scale(at_param - h)? - s;
    let (d_up, n_up) = profile.increment(s, up);
    let (d_down, n_down) = profile.increment(s, down);
    let estimate = (d_up + d_down) / (h * h);
    let noise = lit::<T>(16.0) * T::epsilon() * (n_up + n_down) / (h * h);
    if !(estimate.abs() > lit::<T>(8.0) * noise) {
        return Err(Error::StepSize {
            estimate: estimate.to_f64().unwrap_or(f64::NAN),
            noise: noise.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RadialFunction, SpinorChannel};

    fn consts() -> Constants<f64> {
        Constants::default()
    }

    fn sto(power: f64, zeta: f64) -> Component<f64> {
        Component::new(RadialFunction::normalized_slater(power, zeta).unwrap(), SpinorChannel::S_HALF)
    }

    #[test]
    fn kinetic_balance_lower_of_1s() {
        let k = consts();
        let u = Component::new(RadialFunction::slater(0.0, 1.4).unwrap(), SpinorChannel::S_HALF);
        let l = materialize_lower(&u, &CouplingSpec::KineticBalance { lambda: 0.3 }, &PotentialSpec::free(), &k).unwrap();
        assert_eq!(l.channel, SpinorChannel::P_HALF);
        assert_eq!(l.radial.terms().len(), 1);
        assert!((l.radial.terms()[0].coeff() + 0.3 * 1.4).abs() < 1e-15);
        assert_eq!(l.radial.terms()[0].power(), 0.0);
    }

    #[test]
    fn same_radial_lower() {
        let k = consts();
        let u = Component::new(RadialFunction::slater(1.0, 0.8).unwrap(), SpinorChannel::S_HALF);
        let l = materialize_lower(&u, &CouplingSpec::SameRadial { lambda: 0.25 }, &PotentialSpec::free(), &k).unwrap();
        assert_eq!(l.channel, SpinorChannel::P_HALF);
        assert_eq!(l.radial, u.radial.scaled(0.25));
    }

    #[test]
    fn kappa_scaled_coefficient() {
        let k = consts();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        // sqrt((1-γ)/(1+γ)) with γ = sqrt(1-α²), mpmath
        let s = kappa_scale(-1.0, 1.0, &v, &k).unwrap();
        assert!((s - 3.648_724_860_173_856e-3).abs() < 1e-15);
        let u = Component::new(RadialFunction::slater(0.0, 1.0).unwrap(), SpinorChannel::S_HALF);
        let l = materialize_lower(&u, &CouplingSpec::KappaScaled { kappa_param: -1.0 }, &v, &k).unwrap();
        assert!((l.radial.terms()[0].coeff() + s).abs() < 1e-17);
        let two_exp = Component::new(
            RadialFunction::new(vec![
                crate::model::RadialTerm::new(1.0, 0.0, 1.0).unwrap(),
                crate::model::RadialTerm::new(1.0, 0.0, 2.0).unwrap(),
            ])
            .unwrap(),
            SpinorChannel::S_HALF,
        );
        assert!(materialize_lower(&two_exp, &CouplingSpec::KappaScaled { kappa_param: 1.0 }, &v, &k).is_err());
    }

    #[test]
    fn decoupled_upper_gives_potential_only() {
        let k = consts();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let b = energy(&sto(0.0, 1.0), &CouplingSpec::KineticBalance { lambda: 0.0 }, &v, &k).unwrap();
        assert!((b.shift() + 1.0).abs() < 1e-14);
        assert_eq!(b.eps, k.rest_energy() + b.shift());
        assert!(b.identity_residual() < 1e-15);
    }

    #[test]
    fn kinetic_balance_is_two_by_two_rayleigh_quotient() {
        let k = consts();
        let c = k.c();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        // H in {u, normalized σ·p u} with c² removed from the diagonal.
        let h = [[-1.0, c], [c, -2.0 * c * c - 1.0]];
        for lambda in [-0.5, -1e-3, 0.0, 1e-3, 1.0 / (2.0 * c), 0.02, 3.0] {
            let b = energy(&sto(0.0, 1.0), &CouplingSpec::KineticBalance { lambda }, &v, &k).unwrap();
            // σ·p u = −u radially, so the lower coefficient in the normalized basis is λ
            let x = [1.0, lambda];
            let num = h[0][0] * x[0] * x[0] + 2.0 * h[0][1] * x[0] * x[1] + h[1][1] * x[1] * x[1];
            let rq = num / (x[0] * x[0] + x[1] * x[1]);
            assert!((b.shift() - rq).abs() <= 1e-12 * rq.abs().max(1.0), "λ={lambda}");
            assert!(b.identity_residual() < 1e-12);
        }
    }

    #[test]
    fn profile_matches_direct_evaluation() {
        let k = consts();
        let v = PotentialSpec::coulomb(3.0, &k).unwrap();
        let u = sto(1.0, 1.7);
        for family in CouplingFamily::ALL {
            let p = CouplingProfile::new(&u, family, &v, &k).unwrap();
            for param in [0.5, 1.0, 2.5] {
                let fast = p.energy_at(param).unwrap();
                let direct = energy(&u, &family.spec(param), &v, &k).unwrap();
                assert!((fast.shift() - direct.shift()).abs() < 1e-9 * direct.shift().abs().max(1.0));
                assert!((fast.norm_l - direct.norm_l).abs() < 1e-12 * direct.norm_l.max(1.0));
            }
        }
    }

    #[test]
    fn kappa_scaled_inverse_scale() {
        let k = consts();
        let v = PotentialSpec::coulomb(20.0, &k).unwrap();
        let p = CouplingProfile::new(&sto(0.0, 18.0), CouplingFamily::KappaScaled, &v, &k).unwrap();
        for kappa in [0.2, 1.0, 7.5] {
            let s = p.scale(kappa).unwrap();
            let back = p.param_for_scale(s).unwrap();
            assert!((back - kappa).abs() < 1e-10 * kappa);
        }
        assert!(p.param_for_scale(1.0 / 18.0).is_none());
    }

    /// Second derivative of R(λ) = (a + 2bλ + eλ²)/(s + dλ²), differentiated by hand.
    fn rq_second_derivative(a: f64, b: f64, e: f64, s: f64, d: f64, x: f64) -> f64 {
        let n = a + 2.0 * b * x + e * x * x;
        let n1 = 2.0 * b + 2.0 * e * x;
        let n2 = 2.0 * e;
        let den = s + d * x * x;
        let d1 = 2.0 * d * x;
        let d2 = 2.0 * d;
        (n2 * den - n * d2) / (den * den) - 2.0 * d1 * (n1 * den - n * d1) / (den * den * den)
    }

    #[test]
    fn curvature_matches_analytic_quadratic_model() {
        let k = consts();
        let c = k.c();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let p = CouplingProfile::new(&sto(0.0, 1.0), CouplingFamily::KineticBalance, &v, &k).unwrap();
        // Shifted 2×2: a = −1, b = c, e = −2c² − 1, s = d = 1.
        for x in [1.0 / (2.0 * c), 0.01, -2.0 * c] {
            let fd = coupling_curvature(&p, x).unwrap();
            let exact = rq_second_derivative(-1.0, c, -2.0 * c * c - 1.0, 1.0, 1.0, x);
            assert!(((fd - exact) / exact).abs() < 1e-6, "x={x}: {fd} vs {exact}");
        }
    }

    #[test]
    fn curvature_flat_function_is_step_size_error() {
        let k = consts();
        let p = CouplingProfile::new(&sto(0.0, 1.0), CouplingFamily::KappaScaled, &PotentialSpec::free(), &k);
        // Free particle: the κ family collapses to the decoupled upper, energy is flat.
        let p = p.unwrap();
        assert!(matches!(coupling_curvature(&p, 1.0), Err(Error::StepSize { .. })));
    }

    #[test]
    fn scale_covariance_near_nonrelativistic_limit() {
        let k = consts().scaled(100.0).unwrap();
        let lambda = 1.0 / (2.0 * k.c());
        let base = {
            let v = PotentialSpec::coulomb(1.0, &k).unwrap();
            energy(&sto(0.0, 1.0), &CouplingSpec::KineticBalance { lambda }, &v, &k).unwrap().shift()
        };
        for s in [0.5, 1.5, 2.0] {
            let v = PotentialSpec::coulomb(s, &k).unwrap();
            let e = energy(&sto(0.0, s), &CouplingSpec::KineticBalance { lambda }, &v, &k).unwrap().shift();
            assert!(((e / (s * s) - base) / base).abs() < 1e-8, "s={s}");
        }
    }
}
