//! Stationary energies of the constrained-component functional.
//!
//! On the positive branch the optimal coupling is the local resolvent
//! `Ω = c (ε + mc² − eΦ)⁻¹ σ·p`, and the energy solves the scalar
//! Rosicky–Mark equation
//!
//! ```text
//! ε (u,u) = mc²(u,u) + (u,eΦu) + c² (σ·p u, [ε + mc² − eΦ]⁻¹ σ·p u)
//! ```
//!
//! The negative branch uses a finite lower space instead, since the
//! resolvent is singular there.

use crate::error::{Error, Result};
use crate::integrals::{overlap, potential_element, radial_product_moment, resolvent_integral, weighted_square};
use crate::linalg::generalized_eigen;
use crate::matrix::{build_blocks, BasisSet, Reference};
use crate::model::{sigma_p_apply, sigma_p_image, Component, Constants, PotentialSpec, RadialFunction};
use crate::quadrature::QuadratureConfig;
use crate::scalar::{lit, Real};

/// Which stationary root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

/// A stationary point of the energy functional for a fixed upper component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarySolution<T> {
    /// Total energy, rest mass included.
    pub eps0: T,
    /// `ε − mc²` on the positive branch, `ε + mc²` on the negative one.
    pub reduced: T,
    pub branch: Branch,
    pub residual: T,
    /// `(l,l) / [(u,u) + (l,l)]` at the solution.
    pub lower_norm_fraction: T,
    /// `⟨eΦ⟩` over the optimized spinor.
    pub potential_expectation: T,
}

struct PositiveSetup<T> {
    norm_u: T,
    pot_u: T,
    g: RadialFunction<T>,
}

fn positive_setup<T: Real>(u: &Component<T>, potential: &PotentialSpec<T>) -> Result<PositiveSetup<T>> {
    let norm_u = overlap(&u.radial, &u.radial);
    if !(norm_u > T::zero()) {
        return Err(Error::InvariantViolation("upper component has zero norm".into()));
    }
    Ok(PositiveSetup {
        norm_u,
        pot_u: potential_element(&u.radial, &u.radial, potential)?,
        g: sigma_p_image(&u.radial, u.channel).radial,
    })
}

/// Solves the Rosicky–Mark equation for the positive-branch root.
///
/// Works in `w = ε − mc²`; `h(w) = w(u,u) − (u,eΦu) − c² R(w + 2mc²)` is
/// increasing, so a sign change is located on 64 logarithmic probes of
/// `ε + mc²` over `(1e−9 mc², 5 mc²)`, refined by bisection and a few
/// secant steps.
pub fn stationary_positive<T: Real>(
    u: &Component<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<StationarySolution<T>> {
    let setup = positive_setup(u, potential)?;
    let rest = constants.rest_energy();
    let c2 = constants.c() * constants.c();
    let two_rest = lit::<T>(2.0) * rest;
    let h = |w: T| -> Result<T> {
        let r = resolvent_integral(&setup.g, w + two_rest, potential, cfg)?;
        Ok(w * setup.norm_u - setup.pot_u - c2 * r)
    };

    // probes in A = ε + mc² = w + 2mc²
    let probes = 64;
    let a_lo = lit::<T>(1e-9) * rest;
    let a_hi = lit::<T>(5.0) * rest;
    let ratio = (a_hi / a_lo).ln() / lit::<T>((probes - 1) as f64);
    let mut scanned = Vec::with_capacity(probes);
    let mut bracket = None;
    let mut prev: Option<(T, T)> = None;
    for i in 0..probes {
        let a = a_lo * (ratio * lit::<T>(i as f64)).exp();
        let w = a - two_rest;
        let hw = h(w)?;
        scanned.push((w.to_f64().unwrap_or(f64::NAN), hw.to_f64().unwrap_or(f64::NAN)));
        if let Some((wp, hp)) = prev {
            if hp <= T::zero() && hw >= T::zero() {
                bracket = Some((wp, hp, w, hw));
                break;
            }
        }
        prev = Some((w, hw));
    }
    let Some((mut lo, mut h_lo, mut hi, mut h_hi)) = bracket else {
        return Err(Error::BracketFailure { probes: scanned });
    };

    let width_tol = lit::<T>(1e-13) * rest;
    while hi - lo > width_tol {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid)?;
        if hm <= T::zero() {
            lo = mid;
            h_lo = hm;
        } else {
            hi = mid;
            h_hi = hm;
        }
    }
    // secant polish from the bracket ends
    let (mut w0, mut h0, mut w1, mut h1) = if h_lo.abs() < h_hi.abs() { (hi, h_hi, lo, h_lo) } else { (lo, h_lo, hi, h_hi) };
    for _ in 0..5 {
        if h1 == T::zero() || h1 == h0 {
            break;
        }
        let w2 = w1 - h1 * (w1 - w0) / (h1 - h0);
        if !w2.is_finite() {
            break;
        }
        let h2 = h(w2)?;
        if h2.abs() >= h1.abs() {
            break;
        }
        w0 = w1;
        h0 = h1;
        w1 = w2;
        h1 = h2;
    }
    let w = w1;
    let a = w + two_rest;

    // optimal lower: l = c g r/(A r + Z)
    let z = potential.charge();
    let norm_l = c2 * weighted_square(&setup.g, |r| {
        let d = a * r + z;
        r * r * r * r / (d * d)
    }, cfg)?;
    let pot_l = if z == T::zero() {
        T::zero()
    } else {
        -z * c2
            * weighted_square(&setup.g, |r| {
                let d = a * r + z;
                r * r * r / (d * d)
            }, cfg)?
    };
    let norm = setup.norm_u + norm_l;
    Ok(StationarySolution {
        eps0: rest + w,
        reduced: w,
        branch: Branch::Positive,
        residual: h1,
        lower_norm_fraction: norm_l / norm,
        potential_expectation: (setup.pot_u + pot_l) / norm,
    })
}

/// The Rosicky–Mark residual `h(ε)` at a total energy `eps`.
pub fn rosicky_mark_residual<T: Real>(
    u: &Component<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    eps: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    let setup = positive_setup(u, potential)?;
    let c2 = constants.c() * constants.c();
    let w = eps - constants.rest_energy();
    let r = resolvent_integral(&setup.g, eps + constants.rest_energy(), potential, cfg)?;
    Ok(w * setup.norm_u - setup.pot_u - c2 * r)
}

/// Pointwise optimal lower component `l(r) = c g(r) r / ((ε₀ + mc²) r + Z)`.
pub fn optimal_lower<T: Real>(
    u: &Component<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    eps0: T,
    r_grid: &[T],
) -> Result<Vec<T>> {
    let a = eps0 + constants.rest_energy();
    if !(a > T::zero()) {
        return Err(Error::Branch(format!("optimal lower needs eps0 + mc^2 > 0, got {a}")));
    }
    let g = sigma_p_image(&u.radial, u.channel).radial;
    let z = potential.charge();
    let c = constants.c();
    Ok(r_grid.iter().map(|&r| c * g.eval(r) * r / (a * r + z)).collect())
}

/// Truncated expansions of the two stationary roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEnergy<T> {
    pub eps_plus: T,
    pub eps_minus: T,
    /// `ε₊ − mc²`.
    pub plus_shift: T,
    /// `ε₋ + mc²`.
    pub minus_offset: T,
}

/// Expansion of the stationary energies in `1/c²`.
///
/// Order 0 is `mc² + ⟨p²⟩/2 + ⟨eΦ⟩`. Orders 1 and 2 keep the first one or
/// two terms of the resolvent series
/// `(A − eΦ)⁻¹ = A⁻¹ + eΦ A⁻² + (eΦ)² A⁻³ + …` (`A = ε + mc²`) and solve the
/// truncated equation for `ε` by Newton iteration. The negative root is
/// reported at leading order, `−mc² − ⟨p²⟩/2`.
pub fn series_energy<T: Real>(
    u: &Component<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    order: u8,
) -> Result<SeriesEnergy<T>> {
    if order > 2 {
        return Err(Error::Domain(format!("series order must be 0, 1 or 2, got {order}")));
    }
    let setup = positive_setup(u, potential)?;
    let rest = constants.rest_energy();
    let c2 = constants.c() * constants.c();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let p2 = overlap(&setup.g, &setup.g) / setup.norm_u;
    let v = setup.pot_u / setup.norm_u;
    let mut w = half * p2 + v;
    if order >= 1 {
        let s1 = potential_element(&setup.g, &setup.g, potential)? / setup.norm_u;
        let z = potential.charge();
        let s2 = if order >= 2 && z != T::zero() {
            z * z * radial_product_moment(&setup.g, &setup.g, T::zero())? / setup.norm_u
        } else {
            T::zero()
        };
        // w A = A⟨V⟩ + c²⟨p²⟩ + c² S1/A + c² S2/A², A = 2mc² + w
        let mut trace = Vec::new();
        let mut converged = false;
        for _ in 0..50 {
            let a = two * rest + w;
            let f = two * rest * w + w * w - c2 * p2 - a * v - c2 * s1 / a - c2 * s2 / (a * a);
            let df = two * rest + two * w - v + c2 * s1 / (a * a) + two * c2 * s2 / (a * a * a);
            let step = f / df;
            w = w - step;
            trace.push(w.to_f64().unwrap_or(f64::NAN));
            if step.abs() <= lit::<T>(4.0) * T::epsilon() * w.abs().max(T::one()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                stage: "series energy Newton".into(),
                trace,
            });
        }
    }
    let minus_offset = -half * p2;
    Ok(SeriesEnergy {
        eps_plus: rest + w,
        eps_minus: minus_offset - rest,
        plus_shift: w,
        minus_offset,
    })
}

/// Exponent multipliers of the extra even-tempered lower functions.
const NEGATIVE_LOWER_RATIOS: [f64; 7] = [2.0, 0.5, 4.0, 0.25, 8.0, 0.125, 16.0];

/// Largest accepted `lower_dim` for [`stationary_negative`].
pub const MAX_NEGATIVE_LOWER_DIM: usize = 1 + NEGATIVE_LOWER_RATIOS.len();

/// Negative-branch stationary root: the lowest eigenvalue over `{u}` and a
/// lower space of dimension `lower_dim`, made of the normalized `σ·p u`
/// followed by even-tempered `e^(−βr)` functions in the flipped channel.
pub fn stationary_negative<T: Real>(
    u: &Component<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    lower_dim: usize,
) -> Result<StationarySolution<T>> {
    if lower_dim == 0 || lower_dim > MAX_NEGATIVE_LOWER_DIM {
        return Err(Error::Domain(format!(
            "lower_dim must be in 1..={MAX_NEGATIVE_LOWER_DIM}, got {lower_dim}"
        )));
    }
    let g = sigma_p_apply(&u.radial, u.channel)?;
    let zeta = u
        .radial
        .terms()
        .iter()
        .map(|t| t.zeta())
        .fold(T::infinity(), T::min);
    let mut lowers = vec![g.normalized()?];
    for &ratio in NEGATIVE_LOWER_RATIOS.iter().take(lower_dim - 1) {
        lowers.push(Component::new(
            RadialFunction::normalized_slater(T::zero(), zeta * lit(ratio))?,
            g.channel,
        ));
    }
    let basis = BasisSet::new(vec![u.clone()], lowers)?;
    let blocks = build_blocks(&basis, potential, constants)?;
    let h = blocks.shifted(Reference::MinusRest);
    let s = blocks.overlap();
    let eig = generalized_eigen(&h, &s)?;
    let offset = eig.values[0];
    let x = eig.vectors.column(0);
    let sx = s.mul_vec(&x);
    let hx = h.mul_vec(&x);
    let residual = hx
        .iter()
        .zip(&sx)
        .map(|(a, b)| (*a - offset * *b).abs())
        .fold(T::zero(), T::max);
    let n_u = x[0] * sx[0];
    let n_total: T = x.iter().zip(&sx).map(|(a, b)| *a * *b).sum();
    let vx = blocks.potential().mul_vec(&x);
    let pot: T = x.iter().zip(&vx).map(|(a, b)| *a * *b).sum();
    Ok(StationarySolution {
        eps0: offset - constants.rest_energy(),
        reduced: offset,
        branch: Branch::Negative,
        residual,
        lower_norm_fraction: (n_total - n_u) / n_total,
        potential_expectation: pot / n_total,
    })
}
