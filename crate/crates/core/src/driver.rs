//! Nested optimization over coupling and exponent, and the parameter scans
//! built on it.
//!
//! The inner problem maximizes (positive branch) or minimizes (negative
//! branch) the energy along a coupling family for a fixed upper component.
//! The outer problem minimizes the inner maximum over the exponent of a
//! trial family. Scan points are independent and run on the rayon pool;
//! results always come back in grid order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functional::{coupling_curvature, CouplingFamily, CouplingProfile, EnergyBreakdown};
use crate::integrals::radial_density;
use crate::model::{gamma_kappa, Component, Constants, PotentialSpec, RadialFunction, SpinorChannel, SpinorTrial};
use crate::optimize::{golden_section, locate, Goal, OptimizerConfig};
use crate::quadrature::QuadratureConfig;
use crate::scalar::{from_usize, lit, Real};
use crate::stationary::{stationary_negative, stationary_positive};

/// Upper-component trial families, all in the `s₁/₂` channel and normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialFamily {
    /// `r^(n−1) e^(−ζr)`.
    Sto(u32),
    /// `r^(γ−1) e^(−ζr)` with the exact point-nucleus power.
    ExactPower,
}

impl TrialFamily {
    pub fn upper<T: Real>(self, zeta: T, potential: &PotentialSpec<T>, constants: &Constants<T>) -> Result<Component<T>> {
        let power = match self {
            TrialFamily::Sto(0) => return Err(Error::Domain("STO principal number must be at least 1".into())),
            TrialFamily::Sto(n) => lit::<T>(f64::from(n - 1)),
            TrialFamily::ExactPower => gamma_kappa(SpinorChannel::S_HALF, potential, constants)? - T::one(),
        };
        Ok(Component::new(RadialFunction::normalized_slater(power, zeta)?, SpinorChannel::S_HALF))
    }

    /// Nonrelativistic optimum exponent, `nZ` (or `Z` for the exact power).
    pub fn zeta_seed<T: Real>(self, potential: &PotentialSpec<T>) -> T {
        let n = match self {
            TrialFamily::Sto(n) => f64::from(n.max(1)),
            TrialFamily::ExactPower => 1.0,
        };
        lit::<T>(n) * potential.charge().abs()
    }

    /// The coupling used when none is requested. The exact power needs the
    /// same-radial lower: its `σ·p` image makes `(l, eΦ l)` diverge.
    pub fn default_coupling(self) -> CouplingFamily {
        match self {
            TrialFamily::Sto(_) => CouplingFamily::KineticBalance,
            TrialFamily::ExactPower => CouplingFamily::SameRadial,
        }
    }

    pub fn name(self) -> String {
        match self {
            TrialFamily::Sto(n) => format!("sto-{n}"),
            TrialFamily::ExactPower => "exact-power".into(),
        }
    }
}

/// Uniform grid plus optimizer tolerances for a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scan1DConfig<T> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
    pub optimizer: OptimizerConfig<T>,
}

impl<T: Real> Scan1DConfig<T> {
    pub fn new(lo: T, hi: T, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if points < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 points, got {points}")));
        }
        Ok(Self {
            lo,
            hi,
            points,
            optimizer: OptimizerConfig::default(),
        })
    }

    pub fn grid(&self) -> Vec<T> {
        linspace(self.lo, self.hi, self.points)
    }
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = from_usize::<T>(points - 1);
            (0..points)
                .map(|i| {
                    let t = from_usize::<T>(i) / last;
                    lo + (hi - lo) * t
                })
                .collect()
        }
    }
}

/// An optimum along a coupling family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerExtremum<T> {
    /// Family parameter at the optimum.
    pub param: T,
    pub breakdown: EnergyBreakdown<T>,
    pub iterations: usize,
}

impl<T: Real> InnerExtremum<T> {
    pub fn eps(&self) -> T {
        self.breakdown.eps
    }
}

fn positive_seed<T: Real>(profile: &CouplingProfile<T>) -> T {
    let (s_max, _) = profile.scale_seeds();
    let (dlo, dhi) = profile.domain();
    match profile.param_for_scale(s_max) {
        Some(p) if p > dlo && p < dhi && p != T::zero() => p,
        _ => match profile.family {
            CouplingFamily::KappaScaled => T::one().max(lit::<T>(2.0) * dlo),
            _ => lit::<T>(0.5) / profile.constants.c(),
        },
    }
}

/// Maximizes `ε − mc²` along the profile's coupling family, starting from
/// the 2×2 estimate of the maximizer (about `1/(2c)` for kinetic balance).
pub fn inner_maximize<T: Real>(profile: &CouplingProfile<T>, cfg: &OptimizerConfig<T>) -> Result<InnerExtremum<T>> {
    let seed = positive_seed(profile);
    let step = lit::<T>(0.05) * seed;
    let ext = locate(
        |p| profile.energy_at(p).map(|b| b.shift()),
        seed,
        step,
        profile.domain(),
        Goal::Maximize,
        cfg,
    )?;
    Ok(InnerExtremum {
        param: ext.arg,
        breakdown: profile.energy_at(ext.arg)?,
        iterations: ext.iterations,
    })
}

/// Minimizes `ε + mc²` along the coupling family (the spurious root).
///
/// The κ-parametrized family only reaches positive lower scales below
/// `1/ζ` and has no negative-branch stationary point.
pub fn inner_minimize<T: Real>(profile: &CouplingProfile<T>, cfg: &OptimizerConfig<T>) -> Result<InnerExtremum<T>> {
    let (_, s_min) = profile.scale_seeds();
    let seed = profile.param_for_scale(s_min).ok_or_else(|| {
        Error::Domain(format!("the {} family does not reach the negative branch", profile.family.name()))
    })?;
    let step = lit::<T>(0.05) * seed;
    let ext = locate(
        |p| profile.energy_at(p).map(|b| b.offset_from_negative()),
        seed,
        step,
        profile.domain(),
        Goal::Minimize,
        cfg,
    )?;
    Ok(InnerExtremum {
        param: ext.arg,
        breakdown: profile.energy_at(ext.arg)?,
        iterations: ext.iterations,
    })
}

/// One exponent visited by the outer search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint<T> {
    pub zeta: T,
    pub lambda_star: T,
    /// `ε_max(ζ) − mc²`.
    pub shift: T,
}

/// Outcome of the min-max search.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxResult<T> {
    pub eps_minmax: T,
    /// `eps_minmax − mc²`, computed without cancellation.
    pub shift: T,
    pub zeta_star: T,
    pub lambda_star: T,
    /// Finite-difference `d²ε_max/dζ²` at `ζ*`; positive certifies a minimum.
    pub zeta_curvature: T,
    /// Grid points, then the accepted optimum last.
    pub trace: Vec<TracePoint<T>>,
}

fn inner_at<T: Real>(
    trial: TrialFamily,
    family: CouplingFamily,
    zeta: T,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<(CouplingProfile<T>, InnerExtremum<T>)> {
    let u = trial.upper(zeta, potential, constants)?;
    let profile = CouplingProfile::new(&u, family, potential, constants)?;
    let ext = inner_maximize(&profile, cfg)?;
    Ok((profile, ext))
}

/// `ε_max(ζ) − mc²` over a list of exponents.
pub fn inner_maximize_scan<T: Real>(
    trial: TrialFamily,
    family: CouplingFamily,
    zetas: &[T],
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<Vec<TracePoint<T>>> {
    zetas
        .par_iter()
        .map(|&zeta| {
            let (_, ext) = inner_at(trial, family, zeta, potential, constants, cfg)?;
            Ok(TracePoint {
                zeta,
                lambda_star: ext.param,
                shift: ext.breakdown.shift(),
            })
        })
        .collect()
}

/// First and second derivative of `f` at `x` by fourth-order central
/// differences with step `h`.
fn derivatives<T: Real>(mut f: impl FnMut(T) -> Result<T>, x: T, h: T) -> Result<(T, T)> {
    let two = lit::<T>(2.0);
    let f0 = f(x)?;
    let p1 = f(x + h)?;
    let m1 = f(x - h)?;
    let p2 = f(x + two * h)?;
    let m2 = f(x - two * h)?;
    let d1 = (lit::<T>(8.0) * (p1 - m1) - (p2 - m2)) / (lit::<T>(12.0) * h);
    let d2 = (lit::<T>(16.0) * (p1 + m1) - (p2 + m2) - lit::<T>(30.0) * f0) / (lit::<T>(12.0) * h * h);
    Ok((d1, d2))
}

/// Relative step for the exponent derivatives.
const ZETA_STEP: f64 = 1e-4;

/// Minimizes the inner maximum over the exponent of `trial`.
///
/// The grid in `range` is scanned first; golden-section search then runs
/// between the neighbours of the best grid point, and a few Newton steps on
/// the finite-difference derivative finish the job. A best grid point at
/// either end of the range is an error.
pub fn outer_minimize<T: Real>(
    trial: TrialFamily,
    family: CouplingFamily,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    range: &Scan1DConfig<T>,
) -> Result<MinMaxResult<T>> {
    let cfg = &range.optimizer;
    if !(range.lo > T::zero()) {
        return Err(Error::InvalidGrid(format!("exponents must be positive, got lo = {}", range.lo)));
    }
    let mut trace = inner_maximize_scan(trial, family, &range.grid(), potential, constants, cfg)?;
    let mut best = 0;
    for (i, p) in trace.iter().enumerate() {
        if p.shift < trace[best].shift {
            best = i;
        }
    }
    if best == 0 || best + 1 == trace.len() {
        return Err(Error::NoInteriorExtremum(format!(
            "best exponent {} sits at the edge of [{}, {}]",
            trace[best].zeta, range.lo, range.hi
        )));
    }
    let phi = |zeta: T| inner_at(trial, family, zeta, potential, constants, cfg).map(|(_, e)| e.breakdown.shift());
    let golden = golden_section(phi, trace[best - 1].zeta, trace[best + 1].zeta, Goal::Minimize, cfg)?;

    let mut zeta = golden.arg;
    let mut curvature = T::zero();
    let mut steps = Vec::new();
    for _ in 0..4 {
        let h = lit::<T>(ZETA_STEP) * zeta;
        let (d1, d2) = derivatives(phi, zeta, h)?;
        curvature = d2;
        if !(d2 > T::zero()) {
            break;
        }
        let step = -d1 / d2;
        if step.abs() > h {
            break;
        }
        zeta = zeta + step;
        steps.push(zeta.to_f64().unwrap_or(f64::NAN));
        if step.abs() <= lit::<T>(1e-12) * zeta {
            break;
        }
    }
    if !(curvature > T::zero()) {
        return Err(Error::NonConvergence {
            stage: "outer minimization (no positive curvature at the optimum)".into(),
            trace: steps,
        });
    }
    let (_, ext) = inner_at(trial, family, zeta, potential, constants, cfg)?;
    let point = TracePoint {
        zeta,
        lambda_star: ext.param,
        shift: ext.breakdown.shift(),
    };
    trace.push(point);
    Ok(MinMaxResult {
        eps_minmax: ext.breakdown.eps,
        shift: point.shift,
        zeta_star: zeta,
        lambda_star: ext.param,
        zeta_curvature: curvature,
        trace,
    })
}

/// Derivative of the min-max energy under `u(r) → s^(3/2) u(sr)` at `s = 1`.
/// For the Slater families scaling multiplies the exponent, so this is
/// `ζ* · dε_max/dζ`.
pub fn virial_check<T: Real>(
    result: &MinMaxResult<T>,
    trial: TrialFamily,
    family: CouplingFamily,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<T> {
    Ok(result.zeta_star * exponent_derivative(result.zeta_star, trial, family, potential, constants, cfg)?)
}

/// `dε_max/dζ` at an arbitrary exponent.
pub fn exponent_derivative<T: Real>(
    zeta: T,
    trial: TrialFamily,
    family: CouplingFamily,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<T> {
    let phi = |z: T| inner_at(trial, family, z, potential, constants, cfg).map(|(_, e)| e.breakdown.shift());
    Ok(derivatives(phi, zeta, lit::<T>(ZETA_STEP) * zeta)?.0)
}

/// The spurious root along a grid of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct SpuriousScan<T> {
    /// Largest `ε₋ + mc²` seen on the grid.
    pub sup_offset: T,
    pub sup_zeta: T,
    /// `(ζ, λ_min(ζ), ε₋(ζ) + mc²)` in grid order.
    pub trace: Vec<MaxMinRecord<T>>,
}

/// Maximizes over the exponent the minimum over the coupling.
pub fn maxmin_spurious<T: Real>(
    trial: TrialFamily,
    family: CouplingFamily,
    zetas: &[T],
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<SpuriousScan<T>> {
    if zetas.is_empty() {
        return Err(Error::InvalidGrid("empty exponent grid".into()));
    }
    let trace: Vec<MaxMinRecord<T>> = zetas
        .par_iter()
        .map(|&zeta| {
            let u = trial.upper(zeta, potential, constants)?;
            let profile = CouplingProfile::new(&u, family, potential, constants)?;
            let ext = inner_minimize(&profile, cfg)?;
            Ok(MaxMinRecord {
                zeta,
                lambda_min: ext.param,
                minus_offset: ext.breakdown.offset_from_negative(),
            })
        })
        .collect::<Result<_>>()?;
    let mut sup = 0;
    for (i, r) in trace.iter().enumerate() {
        if r.minus_offset > trace[sup].minus_offset {
            sup = i;
        }
    }
    Ok(SpuriousScan {
        sup_offset: trace[sup].minus_offset,
        sup_zeta: trace[sup].zeta,
        trace,
    })
}

/// A row of a tabulated scan.
pub trait ScanRecord<T> {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<T>;
}

/// `ε(λ) − mc²` at one point of the shower grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShowerRecord<T> {
    pub zeta: T,
    pub lambda: T,
    pub shift: T,
}

impl<T: Real> ScanRecord<T> for ShowerRecord<T> {
    fn header() -> &'static [&'static str] {
        &["zeta", "lambda", "eps_minus_mc2"]
    }

    fn fields(&self) -> Vec<T> {
        vec![self.zeta, self.lambda, self.shift]
    }
}

/// Energy trajectories along the coupling for a set of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct ShowerScan<T> {
    /// Exponent-major, grid order.
    pub records: Vec<ShowerRecord<T>>,
    /// The located maximum of each trajectory.
    pub maxima: Vec<TracePoint<T>>,
}

impl<T: Real> ShowerScan<T> {
    /// Index of the exponent whose maximum is lowest.
    pub fn lowest_maximum(&self) -> Option<usize> {
        (0..self.maxima.len()).min_by(|&a, &b| {
            self.maxima[a]
                .shift
                .partial_cmp(&self.maxima[b].shift)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

pub fn shower_scan<T: Real>(
    trial: TrialFamily,
    family: CouplingFamily,
    zetas: &[T],
    lambdas: &[T],
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<ShowerScan<T>> {
    let per_zeta: Vec<(Vec<ShowerRecord<T>>, TracePoint<T>)> = zetas
        .par_iter()
        .map(|&zeta| {
            let (profile, ext) = inner_at(trial, family, zeta, potential, constants, cfg)?;
            let rows = lambdas
                .iter()
                .map(|&lambda| {
                    Ok(ShowerRecord {
                        zeta,
                        lambda,
                        shift: profile.energy_at(lambda)?.shift(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let max = TracePoint {
                zeta,
                lambda_star: ext.param,
                shift: ext.breakdown.shift(),
            };
            Ok((rows, max))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(zetas.len() * lambdas.len());
    let mut maxima = Vec::with_capacity(zetas.len());
    for (rows, max) in per_zeta {
        records.extend(rows);
        maxima.push(max);
    }
    Ok(ShowerScan { records, maxima })
}

/// Both stationary roots and their potential expectations at one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig5Record<T> {
    pub zeta: T,
    /// `ε₊ − mc²`.
    pub plus_shift: T,
    /// `ε₋ + mc²`.
    pub minus_offset: T,
    pub pot_plus: T,
    pub pot_minus: T,
}

impl<T: Real> ScanRecord<T> for Fig5Record<T> {
    fn header() -> &'static [&'static str] {
        &["zeta", "eps_plus_minus_mc2", "eps_minus_plus_mc2", "pot_plus", "pot_minus"]
    }

    fn fields(&self) -> Vec<T> {
        vec![self.zeta, self.plus_shift, self.minus_offset, self.pot_plus, self.pot_minus]
    }
}

/// Positive root from the resolvent equation, negative root from a lower
/// space of dimension `lower_dim`, over a grid of exponents.
pub fn fig5_scan<T: Real>(
    trial: TrialFamily,
    zetas: &[T],
    lower_dim: usize,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    quadrature: &QuadratureConfig<T>,
) -> Result<Vec<Fig5Record<T>>> {
    zetas
        .par_iter()
        .map(|&zeta| {
            let u = trial.upper(zeta, potential, constants)?;
            let plus = stationary_positive(&u, potential, constants, quadrature)?;
            let minus = stationary_negative(&u, potential, constants, lower_dim)?;
            Ok(Fig5Record {
                zeta,
                plus_shift: plus.reduced,
                minus_offset: minus.reduced,
                pot_plus: plus.potential_expectation,
                pot_minus: minus.potential_expectation,
            })
        })
        .collect()
}

/// `ε₋ + mc²` at one exponent of the max-min scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMinRecord<T> {
    pub zeta: T,
    pub lambda_min: T,
    pub minus_offset: T,
}

impl<T: Real> ScanRecord<T> for MaxMinRecord<T> {
    fn header() -> &'static [&'static str] {
        &["zeta", "eps_minus_plus_mc2"]
    }

    fn fields(&self) -> Vec<T> {
        vec![self.zeta, self.minus_offset]
    }
}

/// Min-max optimum for one STO principal number, with its radial density.
#[derive(Debug, Clone, PartialEq)]
pub struct DftFallacyRow<T> {
    pub n: u32,
    pub zeta_star: T,
    pub lambda_star: T,
    pub shift: T,
    /// `ε − E₁ₛ`.
    pub deviation: T,
    pub density: Vec<T>,
}

impl<T: Real> ScanRecord<T> for DftFallacyRow<T> {
    fn header() -> &'static [&'static str] {
        &["n", "zeta_star", "lambda_star", "eps_minus_mc2", "deviation_from_exact"]
    }

    fn fields(&self) -> Vec<T> {
        vec![lit(f64::from(self.n)), self.zeta_star, self.lambda_star, self.shift, self.deviation]
    }
}

/// Same-radial min-max for the trials `r^(n−1) e^(−ζr)`. Each search runs
/// over `[nZ/4, 4nZ]` with `points` grid points; densities are evaluated on
/// `r_grid`.
pub fn dft_fallacy_scan<T: Real>(
    ns: &[u32],
    points: usize,
    r_grid: &[T],
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<Vec<DftFallacyRow<T>>> {
    let exact = constants.exact_ground_shift(potential.charge());
    ns.par_iter()
        .map(|&n| {
            let trial = TrialFamily::Sto(n);
            let seed = trial.zeta_seed(potential);
            let mut range = Scan1DConfig::new(seed / lit(4.0), seed * lit(4.0), points)?;
            range.optimizer = *cfg;
            let family = CouplingFamily::SameRadial;
            let res = outer_minimize(trial, family, potential, constants, &range)?;
            let upper = trial.upper(res.zeta_star, potential, constants)?;
            let lower = family.spec(res.lambda_star);
            let profile = CouplingProfile::new(&upper, family, potential, constants)?;
            let spinor = SpinorTrial::new(upper, profile.lower_at_scale(res.lambda_star)?, lower)?;
            Ok(DftFallacyRow {
                n,
                zeta_star: res.zeta_star,
                lambda_star: res.lambda_star,
                shift: res.shift,
                deviation: res.shift - exact,
                density: radial_density(&spinor, r_grid)?,
            })
        })
        .collect()
}

/// Coupling curvature at the positive-branch maximizer.
pub fn curvature_at_maximum<T: Real>(profile: &CouplingProfile<T>, cfg: &OptimizerConfig<T>) -> Result<(InnerExtremum<T>, T)> {
    let ext = inner_maximize(profile, cfg)?;
    let k = coupling_curvature(profile, ext.param)?;
    Ok((ext, k))
}

/// Coupling curvature at the negative-branch minimizer.
pub fn curvature_at_minimum<T: Real>(profile: &CouplingProfile<T>, cfg: &OptimizerConfig<T>) -> Result<(InnerExtremum<T>, T)> {
    let ext = inner_minimize(profile, cfg)?;
    let k = coupling_curvature(profile, ext.param)?;
    Ok((ext, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> Constants<f64> {
        Constants::default()
    }

    fn range(lo: f64, hi: f64, n: usize) -> Scan1DConfig<f64> {
        Scan1DConfig::new(lo, hi, n).unwrap()
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0f64, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Scan1DConfig::new(1.0f64, 1.0, 5).is_err());
        assert!(Scan1DConfig::new(0.0f64, 1.0, 2).is_err());
    }

    #[test]
    fn kinetic_balance_maximizer_near_half_inverse_c() {
        let k = consts();
        let c = k.c();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(1.0, &v, &k).unwrap();
        let p = CouplingProfile::new(&u, CouplingFamily::KineticBalance, &v, &k).unwrap();
        let ext = inner_maximize(&p, &OptimizerConfig::default()).unwrap();
        let lambda = (c * c + 1.0).sqrt() - c;
        assert!((ext.param - lambda).abs() < 1e-7, "{}", ext.param);
        assert!((ext.breakdown.shift() - (-1.0 - c * c + c * (c * c + 1.0).sqrt())).abs() < 1e-11);
    }

    #[test]
    fn free_inner_maximum() {
        let k = consts();
        let c = k.c();
        let v = PotentialSpec::free();
        let u = TrialFamily::Sto(1).upper(1.0, &v, &k).unwrap();
        let p = CouplingProfile::new(&u, CouplingFamily::KineticBalance, &v, &k).unwrap();
        let ext = inner_maximize(&p, &OptimizerConfig::default()).unwrap();
        let expected = c * c / ((c * c * c * c + c * c).sqrt() + c * c);
        assert!((ext.breakdown.shift() - expected).abs() < 1e-11);
    }

    #[test]
    fn same_radial_n1_matches_kinetic_balance() {
        let k = consts();
        let v = PotentialSpec::coulomb(3.0, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(2.2, &v, &k).unwrap();
        let cfg = OptimizerConfig::default();
        let kb = inner_maximize(&CouplingProfile::new(&u, CouplingFamily::KineticBalance, &v, &k).unwrap(), &cfg).unwrap();
        let sr = inner_maximize(&CouplingProfile::new(&u, CouplingFamily::SameRadial, &v, &k).unwrap(), &cfg).unwrap();
        let pk = inner_maximize(&CouplingProfile::new(&u, CouplingFamily::KappaScaled, &v, &k).unwrap(), &cfg).unwrap();
        assert!((kb.breakdown.shift() - sr.breakdown.shift()).abs() < 1e-11);
        assert!((kb.breakdown.shift() - pk.breakdown.shift()).abs() < 1e-11);
        assert!((sr.param + 2.2 * kb.param).abs() < 1e-8);
    }

    #[test]
    fn hydrogen_sto_min_max() {
        let k = consts();
        let c = k.c();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let res = outer_minimize(TrialFamily::Sto(1), CouplingFamily::KineticBalance, &v, &k, &range(0.25, 4.0, 41)).unwrap();
        assert!((res.shift - (-0.5 - 1.0 / (8.0 * c * c))).abs() < 1e-9, "{}", res.shift);
        assert!((res.zeta_star - 1.0).abs() < 1e-4);
        assert!(res.zeta_curvature > 0.0);
        let min_trace = res.trace.iter().map(|p| p.shift).fold(f64::INFINITY, f64::min);
        assert_eq!(min_trace, res.shift);
        let d = virial_check(&res, TrialFamily::Sto(1), CouplingFamily::KineticBalance, &v, &k, &OptimizerConfig::default()).unwrap();
        assert!(d.abs() < 1e-8, "{d}");
        let off = exponent_derivative(1.5, TrialFamily::Sto(1), CouplingFamily::KineticBalance, &v, &k, &OptimizerConfig::default()).unwrap();
        assert!(off.abs() > 1e-3);
    }

    #[test]
    fn exact_power_min_max() {
        let k = consts();
        for (z, tol) in [(1.0, 1e-10), (90.0, 1e-9)] {
            let v = PotentialSpec::coulomb(z, &k).unwrap();
            let res = outer_minimize(TrialFamily::ExactPower, CouplingFamily::SameRadial, &v, &k, &range(z / 4.0, 4.0 * z, 41)).unwrap();
            let exact = k.exact_ground_shift(z);
            assert!((res.shift - exact).abs() < tol, "Z={z}: {} vs {exact}", res.shift);
            assert!((res.zeta_star / z - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn edge_minimum_is_reported() {
        let k = consts();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let r = outer_minimize(TrialFamily::Sto(1), CouplingFamily::KineticBalance, &v, &k, &range(2.0, 4.0, 11));
        assert!(matches!(r, Err(Error::NoInteriorExtremum(_))));
    }

    #[test]
    fn spurious_roots_stay_below_minus_rest() {
        let k = consts();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let zetas = linspace(1e-3, 1.0, 21);
        let scan = maxmin_spurious(TrialFamily::Sto(1), CouplingFamily::KineticBalance, &zetas, &v, &k, &OptimizerConfig::default()).unwrap();
        assert!(scan.trace.iter().all(|r| r.minus_offset < 0.0));
        assert!(scan.trace.windows(2).all(|w| w[0].minus_offset > w[1].minus_offset));
        assert_eq!(scan.sup_zeta, 1e-3);
        assert!(scan.sup_offset.abs() < 1.2e-3);
        for r in &scan.trace {
            let z = r.zeta;
            let c = k.c();
            let closed = -z - c * c * z * z / (c * c + (c * c * c * c + c * c * z * z).sqrt());
            assert!((r.minus_offset - closed).abs() < 1e-10);
        }
        let p = CouplingProfile::new(&TrialFamily::Sto(1).upper(1.0, &v, &k).unwrap(), CouplingFamily::KappaScaled, &v, &k).unwrap();
        assert!(inner_minimize(&p, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn shower_structure() {
        let k = consts();
        let c = k.c();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let zetas = [0.96, 0.98, 1.0, 1.02, 1.04];
        let lambdas = linspace(0.0, 2.0 / c, 60);
        let scan = shower_scan(TrialFamily::Sto(1), CouplingFamily::KineticBalance, &zetas, &lambdas, &v, &k, &OptimizerConfig::default()).unwrap();
        assert_eq!(scan.records.len(), 300);
        assert_eq!(scan.lowest_maximum(), Some(2));
        for (i, zeta) in zetas.iter().enumerate() {
            let row = scan.records[i * 60];
            assert_eq!(row.lambda, 0.0);
            assert!((row.shift + zeta).abs() < 1e-12);
            let traj: Vec<f64> = scan.records[i * 60..(i + 1) * 60].iter().map(|r| r.shift).collect();
            let peaks = (1..59).filter(|&j| traj[j] > traj[j - 1] && traj[j] > traj[j + 1]).count();
            assert!(peaks <= 1);
        }
        let p = CouplingProfile::new(&TrialFamily::Sto(1).upper(1.0, &v, &k).unwrap(), CouplingFamily::KineticBalance, &v, &k).unwrap();
        assert!(p.energy_at(1000.0 / c).unwrap().eps < 0.0);
    }

    #[test]
    fn fig5_rows() {
        let k = consts();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let rows = fig5_scan(TrialFamily::Sto(1), &[0.5, 1.0, 1.5], 1, &v, &k, &QuadratureConfig::precise()).unwrap();
        assert!((rows[1].plus_shift + 0.500_006_656_242_089_28).abs() < 1e-9);
        assert!(rows[1].plus_shift < rows[0].plus_shift && rows[1].plus_shift < rows[2].plus_shift);
        assert!(rows.iter().all(|r| r.minus_offset < 0.0));
        assert!((rows[1].pot_plus + 1.0).abs() < 5e-5);
    }

    #[test]
    fn dft_fallacy_energies_agree() {
        let k = consts();
        let v = PotentialSpec::coulomb(1.0, &k).unwrap();
        let grid = linspace(0.01, 20.0, 2000);
        let rows = dft_fallacy_scan(&[1, 2, 3], 41, &grid, &v, &k, &OptimizerConfig::default()).unwrap();
        for (row, n) in rows.iter().zip([1.0, 2.0, 3.0]) {
            assert!(row.deviation.abs() < 1e-4, "n={}: {}", row.n, row.deviation);
            assert!((row.zeta_star / n - 1.0).abs() < 1e-3);
            assert_eq!(row.density.len(), 2000);
        }
    }

    #[test]
    fn curvature_signs() {
        let k = consts();
        let v = PotentialSpec::coulomb(30.0, &k).unwrap();
        let cfg = OptimizerConfig::default();
        let u = TrialFamily::Sto(1).upper(25.0, &v, &k).unwrap();
        for fam in CouplingFamily::ALL {
            let p = CouplingProfile::new(&u, fam, &v, &k).unwrap();
            assert!(curvature_at_maximum(&p, &cfg).unwrap().1 < 0.0, "{}", fam.name());
        }
        for fam in [CouplingFamily::KineticBalance, CouplingFamily::SameRadial] {
            let p = CouplingProfile::new(&u, fam, &v, &k).unwrap();
            assert!(curvature_at_minimum(&p, &cfg).unwrap().1 > 0.0);
        }
    }

    #[test]
    fn scans_are_deterministic() {
        let k = consts();
        let v = PotentialSpec::coulomb(2.0, &k).unwrap();
        let zetas = linspace(0.5, 4.0, 32);
        let cfg = OptimizerConfig::default();
        let a = inner_maximize_scan(TrialFamily::Sto(2), CouplingFamily::SameRadial, &zetas, &v, &k, &cfg).unwrap();
        let b = inner_maximize_scan(TrialFamily::Sto(2), CouplingFamily::SameRadial, &zetas, &v, &k, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().zip(&zetas).all(|(p, z)| p.zeta == *z));
    }
}
