//! Gamma function for real positive arguments.

use crate::scalar::{lit, Real};

const LANCZOS_G: f64 = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128, n = 15.
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_091_82,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// `Γ(1 + x)` for `x ∈ [0, 1)` via the Lanczos approximation.
fn gamma_one_plus<T: Real>(x: T) -> T {
    let mut series = lit::<T>(LANCZOS_COEFFS[0]);
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + lit::<T>(c) / (x + T::from_usize(k).unwrap());
    }
    let t = x + lit::<T>(LANCZOS_G + 0.5);
    let sqrt_two_pi = (T::PI() + T::PI()).sqrt();
    sqrt_two_pi * t.powf(x + lit(0.5)) * (-t).exp() * series
}

/// `Γ(x)` for `x > 0`; NaN otherwise.
///
/// The argument is shifted into `[1, 2)` with the recurrence `Γ(x+1) = xΓ(x)`,
/// so integer and half-integer arguments pick up only a handful of roundings.
pub fn gamma<T: Real>(x: T) -> T {
    if !(x > T::zero()) || !x.is_finite() {
        return T::nan();
    }
    if x > lit(171.0) {
        return T::infinity();
    }
    if x < T::one() {
        return gamma_one_plus(x) / x;
    }
    if let Some(exact) = gamma_lattice(x) {
        return exact;
    }
    let mut y = x;
    let mut prod = T::one();
    while y >= lit(2.0) {
        y = y - T::one();
        prod = prod * y;
    }
    prod * gamma_one_plus(y - T::one())
}

/// Integer and half-integer arguments by the recurrence from `Γ(1)` or
/// `Γ(1/2)`; these are the common Slater moments.
fn gamma_lattice<T: Real>(x: T) -> Option<T> {
    let two_x = x + x;
    if two_x.fract() != T::zero() {
        return None;
    }
    let (mut y, mut acc) = if x.fract() == T::zero() {
        (T::one(), T::one())
    } else {
        (lit(0.5), T::PI().sqrt())
    };
    while y < x {
        acc = acc * y;
        y = y + T::one();
    }
    Some(acc)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if !(x > T::zero()) {
        return T::nan();
    }
    if x < lit(100.0) {
        return gamma(x).ln();
    }
    let z = x - T::one();
    let mut series = lit::<T>(LANCZOS_COEFFS[0]);
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + lit::<T>(c) / (z + T::from_usize(k).unwrap());
    }
    let t = z + lit::<T>(LANCZOS_G + 0.5);
    lit::<T>(0.5) * (T::PI() + T::PI()).ln() + (z + lit(0.5)) * t.ln() - t + series.ln()
}
