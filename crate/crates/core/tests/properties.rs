use dirac_minmax::driver::{curvature_at_maximum, curvature_at_minimum};
use dirac_minmax::integrals::{moment, overlap};
use dirac_minmax::matrix::{conjugation_asymmetry, even_tempered, LowerFamily};
use dirac_minmax::special::gamma;
use dirac_minmax::{
    collapse_demo, energy, inner_maximize, kinetic_balance_basis, sigma_p_apply, stationary_negative,
    stationary_positive, Component64, Constants64, CouplingFamily, CouplingProfile, OptimizerConfig, PotentialSpec64,
    QuadratureConfig, RadialFunction64, SpinorChannel, TrialFamily,
};
use proptest::prelude::*;

fn k() -> Constants64 {
    Constants64::default()
}

fn family() -> impl Strategy<Value = CouplingFamily> {
    prop_oneof![
        Just(CouplingFamily::KineticBalance),
        Just(CouplingFamily::SameRadial),
        Just(CouplingFamily::KappaScaled),
    ]
}

/// Nuclear charge with αZ up to 0.7, and an exponent within a factor of 4 of Z.
fn charge_and_exponent() -> impl Strategy<Value = (f64, f64)> {
    (0.5f64..95.9, -1.386f64..1.386).prop_map(|(z, t)| (z, z * t.exp()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_maximum_bounds_the_exact_energy((z, zeta) in charge_and_exponent(), fam in family(), n in 1u32..4) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::Sto(n).upper(zeta, &v, &k).unwrap();
        let profile = CouplingProfile::new(&u, fam, &v, &k).unwrap();
        let ext = inner_maximize(&profile, &OptimizerConfig::default()).unwrap();
        prop_assert!(ext.breakdown.shift() >= k.exact_ground_shift(z) - 1e-10);
        prop_assert!(ext.breakdown.identity_residual() < 1e-12);
    }

    #[test]
    fn maximizer_beats_nearby_couplings((z, zeta) in charge_and_exponent(), fam in family(), d in 0.01f64..0.5) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(zeta, &v, &k).unwrap();
        let profile = CouplingProfile::new(&u, fam, &v, &k).unwrap();
        let ext = inner_maximize(&profile, &OptimizerConfig::default()).unwrap();
        for p in [ext.param * (1.0 + d), ext.param * (1.0 - d)] {
            if let Ok(e) = profile.energy_at(p) {
                prop_assert!(e.shift() <= ext.breakdown.shift() + 1e-12 * ext.breakdown.shift().abs().max(1.0));
            }
        }
    }

    #[test]
    fn curvature_signs((z, zeta) in charge_and_exponent(), balanced in any::<bool>()) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(zeta, &v, &k).unwrap();
        let fam = if balanced { CouplingFamily::KineticBalance } else { CouplingFamily::SameRadial };
        let profile = CouplingProfile::new(&u, fam, &v, &k).unwrap();
        let cfg = OptimizerConfig::default();
        prop_assert!(curvature_at_maximum(&profile, &cfg).unwrap().1 < 0.0);
        prop_assert!(curvature_at_minimum(&profile, &cfg).unwrap().1 > 0.0);
    }

    #[test]
    fn spurious_root_lies_below_minus_mc2((z, zeta) in charge_and_exponent(), dim in 1usize..5) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(zeta, &v, &k).unwrap();
        let sol = stationary_negative(&u, &v, &k, dim).unwrap();
        prop_assert!(sol.reduced < 0.0);
    }

    #[test]
    fn stationary_energy_matches_the_maximum((z, zeta) in charge_and_exponent()) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(zeta, &v, &k).unwrap();
        let sol = stationary_positive(&u, &v, &k, &QuadratureConfig::default()).unwrap();
        let profile = CouplingProfile::new(&u, CouplingFamily::KineticBalance, &v, &k).unwrap();
        let ext = inner_maximize(&profile, &OptimizerConfig::default()).unwrap();
        prop_assert!(sol.reduced >= ext.breakdown.shift() - 1e-9 * sol.reduced.abs().max(1.0));
        prop_assert!(sol.reduced >= k.exact_ground_shift(z) - 1e-10);
    }

    #[test]
    fn exact_power_is_exact(z in 0.5f64..130.0) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::ExactPower.upper(z, &v, &k).unwrap();
        let sol = stationary_positive(&u, &v, &k, &QuadratureConfig::default()).unwrap();
        let exact = k.exact_ground_shift(z);
        prop_assert!((sol.reduced - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn free_particle_dispersion(zeta in 0.05f64..20.0, power in 0u32..4) {
        let k = k();
        let c = k.c();
        let v = PotentialSpec64::free();
        let u = Component64::new(RadialFunction64::slater(f64::from(power), zeta).unwrap(), SpinorChannel::S_HALF);
        let sol = stationary_positive(&u, &v, &k, &QuadratureConfig::default()).unwrap();
        let p2 = CouplingProfile::new(&u, CouplingFamily::SameRadial, &v, &k).unwrap().p_squared().unwrap();
        let lhs = sol.reduced * (2.0 * k.rest_energy() + sol.reduced);
        prop_assert!((lhs - c * c * p2).abs() <= 1e-10 * c * c * p2);
    }

    #[test]
    fn sigma_p_squares_to_p_squared(zeta in 0.1f64..10.0) {
        // For e^(−ζr) in s₁/₂, ⟨p²⟩ = ζ².
        let f = RadialFunction64::normalized_slater(0.0, zeta).unwrap();
        let g = sigma_p_apply(&f, SpinorChannel::S_HALF).unwrap();
        prop_assert_eq!(g.channel.kappa(), 1);
        prop_assert!((overlap(&g.radial, &g.radial) - zeta * zeta).abs() <= 1e-12 * zeta * zeta);
    }

    #[test]
    fn moment_recurrence(a in -0.9f64..40.0, sigma in 0.05f64..30.0) {
        let m0 = moment(a, sigma).unwrap();
        let m1 = moment(a + 1.0, sigma).unwrap();
        prop_assert!((m1 - (a + 1.0) / sigma * m0).abs() <= 1e-12 * m1.abs());
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..60.0) {
        prop_assert!((gamma(x + 1.0) - x * gamma(x)).abs() <= 1e-12 * gamma(x + 1.0));
    }

    #[test]
    fn coupling_energy_matches_direct_evaluation((z, zeta) in charge_and_exponent(), fam in family(), t in 0.1f64..3.0) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let u = TrialFamily::Sto(1).upper(zeta, &v, &k).unwrap();
        let profile = CouplingProfile::new(&u, fam, &v, &k).unwrap();
        let param = profile.param_for_scale(t * profile.scale_seeds().0);
        if let Some(p) = param {
            let quick = profile.energy_at(p).unwrap();
            let direct = energy(&u, &fam.spec(p), &v, &k).unwrap();
            prop_assert!((quick.shift() - direct.shift()).abs() <= 1e-9 * quick.shift().abs().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn balanced_bases_never_collapse(z in 0.5f64..60.0, zeta0 in 0.1f64..2.0, ratio in 1.5f64..4.0, n in 1usize..6) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let uppers = even_tempered(zeta0 * z, ratio, n, 0.0, SpinorChannel::S_HALF).unwrap();
        let report = collapse_demo(&uppers, LowerFamily::Balanced, &v, &k).unwrap();
        prop_assert!(report.margin >= -1e-10, "margin {}", report.margin);
    }

    #[test]
    fn charge_conjugation_mirrors_the_spectrum(z in 0.5f64..60.0, zeta0 in 0.1f64..2.0, n in 1usize..5) {
        let k = k();
        let v = PotentialSpec64::coulomb(z, &k).unwrap();
        let uppers = even_tempered(zeta0, 2.5, n, 0.0, SpinorChannel::S_HALF).unwrap();
        let basis = kinetic_balance_basis(&uppers).unwrap();
        let asym = conjugation_asymmetry(&basis, &v, &k).unwrap();
        prop_assert!(asym <= 1e-12 * k.rest_energy() * 4.0);
    }
}
