//! One-dimensional bracketing and golden-section search.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Stopping rules for [`golden_section`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Final bracket width relative to `max(|x|, abs_floor)`.
    pub param_tol: T,
    /// Absolute parameter floor for the relative test.
    pub abs_floor: T,
    /// Stop once the two interior values agree to this (absolute).
    pub value_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            param_tol: lit(1e-10),
            abs_floor: lit(1e-12),
            value_tol: lit(1e-12),
            max_iter: 200,
        }
    }
}

/// Located extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub arg: T,
    pub value: T,
    pub iterations: usize,
}

/// Direction of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

impl Goal {
    fn better<T: Real>(self, a: T, b: T) -> bool {
        match self {
            Goal::Minimize => a < b,
            Goal::Maximize => a > b,
        }
    }
}

/// Triple `a < b < c` (as a set; the walk may run either way) with `f(b)`
/// better than both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub mid: T,
    pub hi: T,
    pub f_mid: T,
}

/// Walks from `seed` in steps that double each time until the objective
/// turns, staying inside the open interval `domain`. Steps that would leave
/// the domain are halved toward its edge.
pub fn bracket<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    seed: T,
    step: T,
    domain: (T, T),
    goal: Goal,
    max_expansions: usize,
) -> Result<Bracket<T>> {
    let (dlo, dhi) = domain;
    if !(seed > dlo && seed < dhi) || step == T::zero() {
        return Err(Error::Domain("bracket seed must lie inside the domain".into()));
    }
    let clamp = |from: T, to: T| -> T {
        if to <= dlo {
            from - (from - dlo) * lit(0.5)
        } else if to >= dhi {
            from + (dhi - from) * lit(0.5)
        } else {
            to
        }
    };
    let mut a = seed;
    let mut fa = f(a)?;
    let mut b = clamp(a, a + step);
    let mut fb = f(b)?;
    let mut step = step;
    if goal.better(fa, fb) {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
        step = -step;
    }
    let mut trace = vec![(a.to_f64().unwrap_or(f64::NAN), fa.to_f64().unwrap_or(f64::NAN))];
    for _ in 0..max_expansions {
        step = step + step;
        let c = clamp(b, b + step);
        if c == b {
            break;
        }
        let fc = f(c)?;
        trace.push((b.to_f64().unwrap_or(f64::NAN), fb.to_f64().unwrap_or(f64::NAN)));
        if !goal.better(fc, fb) {
            return Ok(Bracket {
                lo: a.min(c),
                mid: b,
                hi: a.max(c),
                f_mid: fb,
            });
        }
        a = b;
        b = c;
        fb = fc;
    }
    trace.push((b.to_f64().unwrap_or(f64::NAN), fb.to_f64().unwrap_or(f64::NAN)));
    Err(Error::NoInteriorExtremum(format!(
        "objective kept improving out to {b}; walk (param, value): {trace:?}"
    )))
}

/// Golden-section search on `[lo, hi]`; assumes one extremum inside.
pub fn golden_section<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    lo: T,
    hi: T,
    goal: Goal,
    cfg: &OptimizerConfig<T>,
) -> Result<Extremum<T>> {
    let inv_phi = lit::<T>(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let center = lit::<T>(0.5) * (a + b);
        if b - a <= cfg.param_tol * center.abs().max(cfg.abs_floor) {
            break;
        }
        iterations += 1;
        if goal.better(f1, f2) || (f1 == f2 && x1 < x2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
        if (f1 - f2).abs() <= cfg.value_tol * lit(1e-6) && b - a <= cfg.param_tol.sqrt() * center.abs().max(cfg.abs_floor) {
            // flat to roundoff: further shrinking only chases noise
            break;
        }
    }
    // ties resolve toward the smaller parameter
    let (arg, value) = if goal.better(f2, f1) { (x2, f2) } else { (x1, f1) };
    Ok(Extremum {
        arg,
        value,
        iterations,
    })
}

/// [`bracket`] followed by [`golden_section`].
pub fn locate<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    seed: T,
    step: T,
    domain: (T, T),
    goal: Goal,
    cfg: &OptimizerConfig<T>,
) -> Result<Extremum<T>> {
    let br = bracket(&mut f, seed, step, domain, goal, 200)?;
    let ext = golden_section(&mut f, br.lo, br.hi, goal, cfg)?;
    if goal.better(br.f_mid, ext.value) {
        return Ok(Extremum {
            arg: br.mid,
            value: br.f_mid,
            iterations: ext.iterations,
        });
    }
    Ok(ext)
}
