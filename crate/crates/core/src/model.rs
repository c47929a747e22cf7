//! Physical constants, the generalized Slater radial algebra, spinor channels,
//! the radial reduction of `σ·p`, and charge conjugation.
//!
//! Everything here is in atomic units (ħ = m = e = 1). A radial function is a
//! finite sum `Σ cᵢ r^pᵢ e^(−ζᵢ r)`; the angular parts of the four-component
//! spinor are never materialized, only the relativistic quantum number κ that
//! labels them.

use crate::error::{Error, Result};
use crate::functional::CouplingSpec;
use crate::integrals;
use crate::scalar::{lit, Real};

/// CODATA 2018 speed of light in atomic units.
pub const SPEED_OF_LIGHT_AU: f64 = 137.035999084;

/// Fundamental constants in atomic units. `c = 1/α` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants<T> {
    alpha: T,
    c: T,
    m: T,
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self::with_speed_of_light(lit(SPEED_OF_LIGHT_AU)).expect("CODATA value is valid")
    }
}

impl<T: Real> Constants<T> {
    pub fn with_speed_of_light(c: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::Domain(format!("speed of light must be positive, got {c}")));
        }
        Ok(Self {
            alpha: c.recip(),
            c,
            m: T::one(),
        })
    }

    /// Same constants with `c` multiplied by `factor` (nonrelativistic-limit studies).
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::with_speed_of_light(self.c * factor)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn m(&self) -> T {
        self.m
    }

    /// Rest energy `mc²`.
    pub fn rest_energy(&self) -> T {
        self.m * self.c * self.c
    }

    /// Exact point-nucleus ground-state energy minus `mc²`:
    /// `mc²(√(1−(αZ)²) − 1)`, written without cancellation.
    pub fn exact_ground_shift(&self, z: T) -> T {
        let x = self.alpha * z;
        let x2 = x * x;
        -self.rest_energy() * x2 / (T::one() + (T::one() - x2).sqrt())
    }

    /// Exact point-nucleus ground-state energy `mc²√(1−(αZ)²)` (rest mass included).
    pub fn exact_ground_energy(&self, z: T) -> T {
        let x = self.alpha * z;
        self.rest_energy() * (T::one() - x * x).sqrt()
    }
}

/// One generalized Slater term `coeff · r^power · e^(−zeta·r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialTerm<T> {
    coeff: T,
    power: T,
    zeta: T,
}

impl<T: Real> RadialTerm<T> {
    /// Smallest admissible power (exclusive): `r²·term²` must stay integrable at the origin.
    pub fn min_power() -> T {
        lit(-1.5)
    }

    pub fn new(coeff: T, power: T, zeta: T) -> Result<Self> {
        if !coeff.is_finite() || !power.is_finite() || !zeta.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "non-finite radial term ({coeff}, {power}, {zeta})"
            )));
        }
        if zeta <= T::zero() {
            return Err(Error::InvariantViolation(format!(
                "radial exponent zeta must be positive, got {zeta}"
            )));
        }
        if power <= Self::min_power() {
            return Err(Error::InvariantViolation(format!(
                "radial power {power} is not square integrable with the r^2 measure"
            )));
        }
        Ok(Self { coeff, power, zeta })
    }

    pub fn coeff(&self) -> T {
        self.coeff
    }

    pub fn power(&self) -> T {
        self.power
    }

    pub fn zeta(&self) -> T {
        self.zeta
    }

    pub fn eval(&self, r: T) -> T {
        if self.coeff == T::zero() {
            return T::zero();
        }
        self.coeff * r.powf(self.power) * (-self.zeta * r).exp()
    }
}

/// Finite nonempty sum of [`RadialTerm`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction<T> {
    terms: Vec<RadialTerm<T>>,
}

impl<T: Real> RadialFunction<T> {
    pub fn new(terms: Vec<RadialTerm<T>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvariantViolation(
                "radial function needs at least one term".into(),
            ));
        }
        Ok(Self { terms })
    }

    /// Unnormalized `r^power e^(−zeta r)`.
    pub fn slater(power: T, zeta: T) -> Result<Self> {
        Self::new(vec![RadialTerm::new(T::one(), power, zeta)?])
    }

    /// Unit-norm `r^power e^(−zeta r)`, i.e. `∫ f² r² dr = 1`.
    pub fn normalized_slater(power: T, zeta: T) -> Result<Self> {
        Self::slater(power, zeta)?.normalized()
    }

    pub fn terms(&self) -> &[RadialTerm<T>] {
        &self.terms
    }

    pub fn eval(&self, r: T) -> T {
        self.terms.iter().map(|t| t.eval(r)).sum()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| RadialTerm {
                    coeff: t.coeff * s,
                    ..*t
                })
                .collect(),
        }
    }

    /// Multiplies every exponent by `factor` (the function is not renormalized).
    pub fn with_scaled_exponents(&self, factor: T) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| RadialTerm::new(t.coeff, t.power, t.zeta * factor))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    /// `∫ f² r² dr`.
    pub fn norm_squared(&self) -> T {
        integrals::overlap(self, self)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_squared();
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "cannot normalize radial function with squared norm {n2}"
            )));
        }
        Ok(self.scaled(n2.sqrt().recip()))
    }

    /// The common exponent when every term shares one.
    pub fn single_exponent(&self) -> Option<T> {
        let zeta = self.terms[0].zeta;
        self.terms.iter().all(|t| t.zeta == zeta).then_some(zeta)
    }

    /// Merges terms with identical `(power, zeta)` and drops exact zeros,
    /// keeping at least one term.
    fn simplified(mut terms: Vec<RadialTerm<T>>) -> Vec<RadialTerm<T>> {
        let mut out: Vec<RadialTerm<T>> = Vec::with_capacity(terms.len());
        for t in terms.drain(..) {
            match out
                .iter_mut()
                .find(|o| o.power == t.power && o.zeta == t.zeta)
            {
                Some(o) => o.coeff = o.coeff + t.coeff,
                None => out.push(t),
            }
        }
        let nonzero: Vec<_> = out.iter().copied().filter(|t| t.coeff != T::zero()).collect();
        if nonzero.is_empty() {
            out.truncate(1);
            out
        } else {
            nonzero
        }
    }
}

/// Relativistic angular quantum number κ (nonzero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinorChannel(i32);

impl SpinorChannel {
    pub const S_HALF: SpinorChannel = SpinorChannel(-1);
    pub const P_HALF: SpinorChannel = SpinorChannel(1);

    pub fn new(kappa: i32) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvariantViolation("kappa must be nonzero".into()));
        }
        Ok(Self(kappa))
    }

    pub fn kappa(self) -> i32 {
        self.0
    }

    /// Channel reached by `σ·p` (κ → −κ).
    pub fn flipped(self) -> Self {
        Self(-self.0)
    }

    /// Orbital angular momentum `l` of the large component in this channel.
    pub fn orbital_l(self) -> i32 {
        if self.0 > 0 {
            self.0
        } else {
            -self.0 - 1
        }
    }
}

/// A radial function attached to its angular channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Component<T> {
    pub radial: RadialFunction<T>,
    pub channel: SpinorChannel,
}

impl<T: Real> Component<T> {
    pub fn new(radial: RadialFunction<T>, channel: SpinorChannel) -> Self {
        Self { radial, channel }
    }

    pub fn norm_squared(&self) -> T {
        self.radial.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        Ok(Self::new(self.radial.normalized()?, self.channel))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.radial.scaled(s), self.channel)
    }
}

/// Two-component radial trial spinor `ψ = (u, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorTrial<T> {
    pub upper: Component<T>,
    pub lower: Component<T>,
    pub coupling: CouplingSpec<T>,
}

impl<T: Real> SpinorTrial<T> {
    pub fn new(upper: Component<T>, lower: Component<T>, coupling: CouplingSpec<T>) -> Result<Self> {
        if coupling.flips_channel() && lower.channel != upper.channel.flipped() {
            return Err(Error::InvariantViolation(format!(
                "lower channel {} must be the flip of upper channel {}",
                lower.channel.kappa(),
                upper.channel.kappa()
            )));
        }
        let trial = Self {
            upper,
            lower,
            coupling,
        };
        if !(trial.norm_squared() > T::zero()) {
            return Err(Error::InvariantViolation(
                "trial spinor has zero combined norm".into(),
            ));
        }
        Ok(trial)
    }

    /// `(u,u) + (l,l)`.
    pub fn norm_squared(&self) -> T {
        self.upper.norm_squared() + self.lower.norm_squared()
    }
}

/// Point-nucleus electrostatic potential `eΦ(r) = −Z/r`.
///
/// The charge is signed so that the opposite-charge (conjugated) problem can be
/// represented; [`PotentialSpec::coulomb`] only admits attractive nuclei.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec<T> {
    charge: T,
}

impl<T: Real> PotentialSpec<T> {
    pub fn coulomb(z: T, constants: &Constants<T>) -> Result<Self> {
        if !z.is_finite() || z < T::zero() {
            return Err(Error::Domain(format!("nuclear charge must be >= 0, got {z}")));
        }
        Self::signed(z, constants)
    }

    /// Potential `−charge/r` with either sign of charge.
    pub fn signed(charge: T, constants: &Constants<T>) -> Result<Self> {
        if !charge.is_finite() {
            return Err(Error::Domain("nuclear charge must be finite".into()));
        }
        if constants.alpha() * charge.abs() >= T::one() {
            return Err(Error::Domain("alpha*Z >= 1".into()));
        }
        Ok(Self { charge })
    }

    /// The free particle.
    pub fn free() -> Self {
        Self { charge: T::zero() }
    }

    pub fn charge(&self) -> T {
        self.charge
    }

    /// Same potential felt by the opposite charge.
    pub fn opposite(&self) -> Self {
        Self {
            charge: -self.charge,
        }
    }

    pub fn eval(&self, r: T) -> T {
        -self.charge / r
    }
}

/// `γ = √(κ² − (αZ)²)/|κ|`, the reduced exponent of the point-nucleus solution
/// at the origin.
pub fn gamma_kappa<T: Real>(
    kappa: SpinorChannel,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<T> {
    let k = T::from_i32(kappa.kappa()).expect("kappa fits").abs();
    gamma_for_real_kappa(k, potential.charge(), constants)
}

/// [`gamma_kappa`] for a real-valued |κ| (used by the κ-parametrized coupling).
pub(crate) fn gamma_for_real_kappa<T: Real>(kappa_abs: T, z: T, constants: &Constants<T>) -> Result<T> {
    let az = constants.alpha() * z.abs();
    if !(kappa_abs > az) {
        return Err(Error::Domain(format!(
            "alpha*Z = {az} must be below |kappa| = {kappa_abs}"
        )));
    }
    let ratio = az / kappa_abs;
    Ok((T::one() - ratio * ratio).sqrt())
}

/// Radial reduction of `σ·p` acting on an upper radial function in channel
/// `kappa_u`: `g = f' + (1+κ_u) f / r`, landing in channel `−κ_u`.
///
/// With this sign convention `∫ g² r² dr = ⟨p²⟩_f` and the radial Dirac
/// Hamiltonian reads `[[mc²+V, c D†],[c D, −mc²+V]]` with `D` this map.
pub fn sigma_p_apply<T: Real>(f: &RadialFunction<T>, kappa_u: SpinorChannel) -> Result<Component<T>> {
    let g = sigma_p_image(f, kappa_u);
    if let Some(t) = g.radial.terms.iter().find(|t| t.power <= RadialTerm::<T>::min_power()) {
        return Err(Error::InvariantViolation(format!(
            "sigma.p image has power {}, not square integrable",
            t.power
        )));
    }
    Ok(g)
}

/// [`sigma_p_apply`] without the square-integrability check, for use inside
/// integrals whose weight tames the origin.
pub(crate) fn sigma_p_image<T: Real>(f: &RadialFunction<T>, kappa_u: SpinorChannel) -> Component<T> {
    let shift = T::one() + T::from_i32(kappa_u.kappa()).expect("kappa fits");
    let mut out = Vec::with_capacity(2 * f.terms.len());
    for t in &f.terms {
        let low = t.coeff * (t.power + shift);
        if low != T::zero() {
            out.push(RadialTerm {
                coeff: low,
                power: t.power - T::one(),
                zeta: t.zeta,
            });
        }
        out.push(RadialTerm {
            coeff: -t.zeta * t.coeff,
            power: t.power,
            zeta: t.zeta,
        });
    }
    Component::new(RadialFunction { terms: RadialFunction::simplified(out) }, kappa_u.flipped())
}

/// Charge conjugation on the radial level: the radial functions trade places
/// (one picking up a sign) and both channel slots change sign, so a state in
/// channel κ maps to one in −κ.
pub fn charge_conjugate<T: Real>(t: &SpinorTrial<T>) -> SpinorTrial<T> {
    let upper = Component::new(t.lower.radial.clone(), t.upper.channel.flipped());
    let lower = Component::new(t.upper.radial.scaled(-T::one()), t.lower.channel.flipped());
    SpinorTrial {
        coupling: CouplingSpec::Explicit {
            lower: lower.clone(),
        },
        upper,
        lower,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::CouplingSpec;

    fn consts() -> Constants<f64> {
        Constants::default()
    }

    #[test]
    fn constants_are_reciprocal() {
        let k = consts();
        assert_eq!(k.c(), SPEED_OF_LIGHT_AU);
        assert_eq!(k.alpha(), 1.0 / SPEED_OF_LIGHT_AU);
        assert_eq!(k.m(), 1.0);
        assert!(Constants::<f64>::with_speed_of_light(0.0).is_err());
    }

    #[test]
    fn exact_shift_matches_direct_formula() {
        let k = consts();
        for z in [1.0, 20.0, 90.0] {
            let direct = k.exact_ground_energy(z) - k.rest_energy();
            assert!((k.exact_ground_shift(z) - direct).abs() < 1e-10);
        }
        // mpmath, 40 digits
        assert!((k.exact_ground_shift(90.0) - -4617.757548982390441).abs() < 1e-10);
    }

    #[test]
    fn gamma_kappa_examples() {
        let k = consts();
        let free = PotentialSpec::free();
        assert_eq!(gamma_kappa(SpinorChannel::S_HALF, &free, &k).unwrap(), 1.0);
        let hyd = PotentialSpec::coulomb(1.0, &k).unwrap();
        let g = gamma_kappa(SpinorChannel::S_HALF, &hyd, &k).unwrap();
        // sqrt(1 - alpha^2), mpmath
        assert!((g - 0.999973373968267).abs() < 1e-9);
        let edge = PotentialSpec { charge: k.c() };
        assert!(matches!(
            gamma_kappa(SpinorChannel::S_HALF, &edge, &k),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gamma_decreases_with_charge() {
        let k = consts();
        let mut prev = 1.0;
        for i in 1..137 {
            let p = PotentialSpec::coulomb(i as f64, &k).unwrap();
            let g = gamma_kappa(SpinorChannel::S_HALF, &p, &k).unwrap();
            assert!(g < prev);
            assert!(g > 0.0);
            prev = g;
        }
    }

    #[test]
    fn potential_rejects_supercritical_charge() {
        let k = consts();
        let err = PotentialSpec::coulomb(200.0, &k).unwrap_err();
        assert_eq!(err, Error::Domain("alpha*Z >= 1".into()));
        assert!(PotentialSpec::coulomb(-1.0, &k).is_err());
    }

    #[test]
    fn sigma_p_of_1s_is_pure_derivative() {
        let f = RadialFunction::slater(0.0, 1.7).unwrap();
        let g = sigma_p_apply(&f, SpinorChannel::S_HALF).unwrap();
        assert_eq!(g.channel, SpinorChannel::P_HALF);
        assert_eq!(g.radial.terms(), &[RadialTerm::new(-1.7, 0.0, 1.7).unwrap()]);
    }

    #[test]
    fn sigma_p_product_rule() {
        let f = RadialFunction::slater(1.0, 2.0).unwrap();
        let g = sigma_p_apply(&f, SpinorChannel::S_HALF).unwrap();
        for r in [0.1f64, 0.5, 2.0] {
            let expected = (1.0 - 2.0 * r) * (-2.0 * r).exp();
            assert!((g.radial.eval(r) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_p_positive_kappa_adds_centrifugal_piece() {
        let f = RadialFunction::slater(0.0, 1.0).unwrap();
        let g = sigma_p_apply(&f, SpinorChannel::P_HALF).unwrap();
        assert_eq!(g.channel, SpinorChannel::S_HALF);
        for r in [0.3f64, 1.0, 4.0] {
            let expected = (2.0 / r - 1.0) * (-r).exp();
            assert!((g.radial.eval(r) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_p_rejects_non_normalizable_image() {
        let f = RadialFunction::slater(-0.6, 1.0).unwrap();
        assert!(matches!(
            sigma_p_apply(&f, SpinorChannel::S_HALF),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn radial_term_invariants() {
        assert!(RadialTerm::new(1.0, 0.0, 0.0).is_err());
        assert!(RadialTerm::new(1.0, -1.5, 1.0).is_err());
        assert!(RadialTerm::new(1.0, -1.4, 1.0).is_ok());
        assert!(RadialFunction::<f64>::new(vec![]).is_err());
        assert!(SpinorChannel::new(0).is_err());
    }

    #[test]
    fn charge_conjugation_example() {
        let f = RadialFunction::slater(0.0, 1.0).unwrap();
        let g = RadialFunction::slater(1.0, 0.5).unwrap();
        let t = SpinorTrial::new(
            Component::new(f.clone(), SpinorChannel::S_HALF),
            Component::new(g.clone(), SpinorChannel::P_HALF),
            CouplingSpec::Explicit {
                lower: Component::new(g.clone(), SpinorChannel::P_HALF),
            },
        )
        .unwrap();
        let cc = charge_conjugate(&t);
        assert_eq!(cc.upper.radial, g);
        assert_eq!(cc.upper.channel, SpinorChannel::P_HALF);
        assert_eq!(cc.lower.radial, f.scaled(-1.0));
        assert_eq!(cc.lower.channel, SpinorChannel::S_HALF);

        let twice = charge_conjugate(&cc);
        assert_eq!(twice.upper.radial, f.scaled(-1.0));
        assert_eq!(twice.lower.radial, g.scaled(-1.0));
        assert_eq!(twice.upper.channel, t.upper.channel);
        assert_eq!(twice.lower.channel, t.lower.channel);
    }

    #[test]
    fn generic_over_f32() {
        let k = Constants::<f32>::default();
        let p = PotentialSpec::coulomb(1.0f32, &k).unwrap();
        let g = gamma_kappa(SpinorChannel::S_HALF, &p, &k).unwrap();
        assert!((g - 0.99997337f32).abs() < 1e-6);
    }
}
