use std::io::Write;
use std::path::PathBuf;

use dirac_minmax::driver::{
    dft_fallacy_scan, fig5_scan, maxmin_spurious, outer_minimize, shower_scan, virial_check, Scan1DConfig,
};
use dirac_minmax::matrix::{
    build_blocks, collapse_demo, conjugation_asymmetry, diagonalize, even_tempered, kinetic_balance_basis,
    nepp_spectrum, LowerFamily,
};
use dirac_minmax::{
    Component64, Constants64, Error, OptimizerConfig, PotentialSpec64, QuadratureConfig, SpinorChannel,
};
use serde::Serialize;

use crate::args::{
    BasisArgs, CollapseArgs, DftFallacyArgs, EvenTempered, Fig5Args, MaxminArgs, NeppArgs, ShowerArgs, SolveArgs,
    Target,
};
use crate::output::{csv_bytes, emit_csv, emit_json, records_csv, RunManifest};
use crate::CliError;

/// Maps a library error raised in `stage` onto the CLI's exit classes.
fn at(stage: &str) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| match e {
        Error::Domain(_) | Error::InvalidGrid(_) | Error::InvariantViolation(_) | Error::Divergent(_) => {
            CliError::Usage(format!("{stage}: {e}"))
        }
        other => CliError::Numerical {
            stage: stage.to_string(),
            source: other,
        },
    }
}

pub fn constants(c: Option<f64>) -> Result<Constants64, CliError> {
    match c {
        Some(c) => Constants64::with_speed_of_light(c).map_err(at("--c")),
        None => Ok(Constants64::default()),
    }
}

fn potential(z: f64, k: &Constants64) -> Result<PotentialSpec64, CliError> {
    PotentialSpec64::coulomb(z, k).map_err(at("--Z"))
}

fn positive_grid(name: &str, values: &[f64]) -> Result<(), CliError> {
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(CliError::Usage(format!("--{name} values must be positive")));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SolveReport {
    trial: String,
    coupling: String,
    eps_minmax: f64,
    eps_minus_mc2: f64,
    zeta_star: f64,
    lambda_star: f64,
    exact_formula_value: f64,
    gap_to_exact: f64,
    virial_residual: f64,
    zeta_curvature: f64,
}

pub fn solve(a: &SolveArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.z, k)?;
    let trial = a.trial.family()?;
    let coupling = a.trial.coupling()?;
    let seed = a.zeta.unwrap_or_else(|| trial.zeta_seed(&v));
    if !(seed > 0.0 && seed.is_finite()) {
        return Err(CliError::Usage("--zeta must be positive (it has no default when Z = 0)".into()));
    }
    let range = Scan1DConfig::new(seed / 4.0, seed * 4.0, a.points).map_err(at("exponent grid"))?;
    let res = outer_minimize(trial, coupling, &v, k, &range).map_err(at("outer minimization"))?;
    let virial = virial_check(&res, trial, coupling, &v, k, &range.optimizer).map_err(at("virial check"))?;
    let report = SolveReport {
        trial: trial.name(),
        coupling: coupling.name().into(),
        eps_minmax: res.eps_minmax,
        eps_minus_mc2: res.shift,
        zeta_star: res.zeta_star,
        lambda_star: res.lambda_star,
        exact_formula_value: k.exact_ground_energy(a.z),
        gap_to_exact: res.shift - k.exact_ground_shift(a.z),
        virial_residual: virial,
        zeta_curvature: res.zeta_curvature,
    };
    let manifest = RunManifest::new("solve", k)
        .param("Z", a.z)
        .param("trial", trial.name())
        .param("coupling", coupling.name())
        .param("zeta_seed", seed)
        .param("points", a.points);
    emit_json(a.out.as_deref(), &report, &manifest)
}

pub fn shower(a: &ShowerArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.z, k)?;
    let trial = a.trial.family()?;
    let coupling = a.trial.coupling()?;
    positive_grid("zeta", &a.zeta.values)?;
    let scan = shower_scan(trial, coupling, &a.zeta.values, &a.lambda.values, &v, k, &OptimizerConfig::default())
        .map_err(at("shower scan"))?;
    let manifest = RunManifest::new("scan shower", k)
        .param("Z", a.z)
        .param("trial", trial.name())
        .param("coupling", coupling.name())
        .param("zeta", &a.zeta)
        .param("lambda", &a.lambda);
    emit_csv(a.out.as_deref(), &records_csv(&scan.records)?, &manifest)
}

pub fn fig5(a: &Fig5Args, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.z, k)?;
    let trial = a.trial.family()?;
    positive_grid("zeta", &a.zeta.values)?;
    let rows = fig5_scan(trial, &a.zeta.values, a.lower_dim, &v, k, &QuadratureConfig::precise()).map_err(at("fig5 scan"))?;
    let manifest = RunManifest::new("scan fig5", k)
        .param("Z", a.z)
        .param("trial", trial.name())
        .param("zeta", &a.zeta)
        .param("lower_dim", a.lower_dim);
    emit_csv(a.out.as_deref(), &records_csv(&rows)?, &manifest)
}

fn density_path(out: &std::path::Path) -> PathBuf {
    out.with_extension("density.csv")
}

pub fn dft_fallacy(a: &DftFallacyArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.z, k)?;
    if a.z == 0.0 {
        return Err(CliError::Usage("--Z must be positive for the dft-fallacy scan".into()));
    }
    if a.n.is_empty() || a.n.contains(&0) {
        return Err(CliError::Usage("--n values must be at least 1".into()));
    }
    positive_grid("r", &a.r.values)?;
    let rows = dft_fallacy_scan(&a.n, a.points, &a.r.values, &v, k, &OptimizerConfig::default()).map_err(at("dft-fallacy scan"))?;
    let names = std::iter::once("r".to_string()).chain(a.n.iter().map(|n| format!("density_n{n}")));
    let header: Vec<String> = names.collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let density_rows = a.r.values.iter().enumerate().map(|(i, &r)| {
        std::iter::once(r).chain(rows.iter().map(|row| row.density[i])).collect::<Vec<f64>>()
    });
    let densities = csv_bytes(&header_refs, density_rows)?;
    let density_out = density_path(&a.out);
    let manifest = RunManifest::new("scan dft-fallacy", k)
        .param("Z", a.z)
        .param("n", a.n.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .param("points", a.points)
        .param("r", &a.r);
    emit_csv(Some(&density_out), &densities, &manifest.clone().param("summary", a.out.display()))?;
    emit_csv(Some(&a.out), &records_csv(&rows)?, &manifest.param("densities", density_out.display()))?;
    for row in &rows {
        eprintln!("n = {}: eps - E_1s = {:e} hartree", row.n, row.deviation);
    }
    Ok(())
}

pub fn maxmin(a: &MaxminArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.z, k)?;
    let trial = a.trial.family()?;
    let coupling = a.trial.coupling()?;
    positive_grid("zeta", &a.zeta.values)?;
    let scan = maxmin_spurious(trial, coupling, &a.zeta.values, &v, k, &OptimizerConfig::default()).map_err(at("max-min scan"))?;
    let manifest = RunManifest::new("scan maxmin", k)
        .param("Z", a.z)
        .param("trial", trial.name())
        .param("coupling", coupling.name())
        .param("zeta", &a.zeta);
    emit_csv(a.out.as_deref(), &records_csv(&scan.trace)?, &manifest)?;
    let _ = writeln!(
        std::io::stderr(),
        "sup (eps_minus + mc^2) = {:e} at zeta = {}",
        scan.sup_offset, scan.sup_zeta
    );
    Ok(())
}

fn uppers(spec: &EvenTempered) -> Result<Vec<Component64>, CliError> {
    even_tempered(spec.zeta0, spec.ratio, spec.count, 0.0, SpinorChannel::S_HALF).map_err(at("--uppers"))
}

fn basis_manifest(command: &str, b: &BasisArgs, k: &Constants64) -> RunManifest {
    RunManifest::new(command, k).param("Z", b.z).param("uppers", b.uppers)
}

#[derive(Debug, Serialize)]
struct CollapseJson {
    exact: f64,
    exact_minus_mc2: f64,
    balanced_gap_eigenvalue: f64,
    balanced_gap_minus_mc2: f64,
    detuned_gap_eigenvalue: f64,
    detuned_gap_minus_mc2: f64,
    detune_factor: f64,
    detuned_margin: f64,
    collapsed: bool,
    /// Lowest balanced gap value (minus mc²) using the first k uppers.
    balanced_prefix_gaps: Vec<f64>,
    /// Balanced prefixes whose lowest gap value falls below the exact energy by more than 1e-10.
    violations: usize,
}

pub fn collapse(a: &CollapseArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.basis.z, k)?;
    let us = uppers(&a.basis.uppers)?;
    let balanced = collapse_demo(&us, LowerFamily::Balanced, &v, k).map_err(at("balanced diagonalization"))?;
    let detuned = collapse_demo(&us, LowerFamily::Detuned(a.detune), &v, k).map_err(at("detuned diagonalization"))?;
    let prefix = (1..=us.len())
        .map(|n| collapse_demo(&us[..n], LowerFamily::Balanced, &v, k).map(|r| r.lowest_gap_shift))
        .collect::<Result<Vec<_>, _>>()
        .map_err(at("balanced prefix diagonalization"))?;
    let exact_shift = balanced.exact_shift;
    let report = CollapseJson {
        exact: k.exact_ground_energy(a.basis.z),
        exact_minus_mc2: exact_shift,
        balanced_gap_eigenvalue: balanced.lowest_gap,
        balanced_gap_minus_mc2: balanced.lowest_gap_shift,
        detuned_gap_eigenvalue: detuned.lowest_gap,
        detuned_gap_minus_mc2: detuned.lowest_gap_shift,
        detune_factor: a.detune,
        detuned_margin: detuned.margin,
        collapsed: detuned.collapsed,
        violations: prefix.iter().filter(|&&g| g < exact_shift - 1e-10).count(),
        balanced_prefix_gaps: prefix,
    };
    emit_json(a.basis.out.as_deref(), &report, &basis_manifest("matrix collapse", &a.basis, k).param("detune", a.detune))
}

#[derive(Debug, Serialize)]
struct NeppJson {
    e_g: f64,
    e_g_minus_mc2: f64,
    spectrum_before_minus_mc2: Vec<f64>,
    spectrum_after_minus_mc2: Vec<f64>,
    negative_branch_count: usize,
    lowest_gap_minus_mc2: Option<f64>,
    min_eigenvalue_minus_mc2: f64,
    bound_minus_mc2: f64,
    bound_satisfied: bool,
    /// Largest deviation of the shifted spectrum from {non-negative-branch values} ∪ {E_g}.
    identity_error: f64,
}

pub fn nepp(a: &NeppArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.basis.z, k)?;
    let basis = kinetic_balance_basis(&uppers(&a.basis.uppers)?).map_err(at("--uppers"))?;
    let blocks = build_blocks(&basis, &v, k).map_err(at("matrix blocks"))?;
    let spectrum = diagonalize(&blocks).map_err(at("diagonalization"))?;
    let e_g_shift = match a.eg {
        Target::Exact => k.exact_ground_shift(a.basis.z),
        Target::Value(e) => e - k.rest_energy(),
    };
    let after = nepp_spectrum(&blocks, &spectrum, e_g_shift).map_err(at("pseudopotential diagonalization"))?;
    let negatives = spectrum.indices(0).count();
    let mut expected: Vec<f64> = spectrum.indices(1).chain(spectrum.indices(2)).map(|i| spectrum.shifts[i]).collect();
    expected.extend(std::iter::repeat(e_g_shift).take(negatives));
    expected.sort_by(f64::total_cmp);
    let identity_error = expected.iter().zip(&after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let lowest_gap = spectrum.gap_shifts().first().copied();
    let bound = lowest_gap.map_or(e_g_shift, |g| g.min(e_g_shift));
    let min_after = after[0];
    let report = NeppJson {
        e_g: e_g_shift + k.rest_energy(),
        e_g_minus_mc2: e_g_shift,
        spectrum_before_minus_mc2: spectrum.shifts.clone(),
        spectrum_after_minus_mc2: after,
        negative_branch_count: negatives,
        lowest_gap_minus_mc2: lowest_gap,
        min_eigenvalue_minus_mc2: min_after,
        bound_minus_mc2: bound,
        bound_satisfied: min_after >= bound - 1e-10,
        identity_error,
    };
    emit_json(a.basis.out.as_deref(), &report, &basis_manifest("matrix nepp", &a.basis, k).param("eg", a.eg))
}

#[derive(Debug, Serialize)]
struct ConjugationJson {
    dim: usize,
    max_asymmetry: f64,
    max_asymmetry_over_mc2: f64,
}

pub fn conjugation(a: &BasisArgs, k: &Constants64) -> Result<(), CliError> {
    let v = potential(a.z, k)?;
    let basis = kinetic_balance_basis(&uppers(&a.uppers)?).map_err(at("--uppers"))?;
    let asym = conjugation_asymmetry(&basis, &v, k).map_err(at("conjugation spectra"))?;
    let report = ConjugationJson {
        dim: basis.uppers().len() + basis.lowers().len(),
        max_asymmetry: asym,
        max_asymmetry_over_mc2: asym / k.rest_energy(),
    };
    emit_json(a.out.as_deref(), &report, &basis_manifest("matrix conjugation", a, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes() {
        assert_eq!(at("x")(Error::Domain("d".into())).exit_code(), 2);
        assert_eq!(at("x")(Error::InvalidGrid("g".into())).exit_code(), 2);
        let e = at("outer minimization")(Error::NoInteriorExtremum("edge".into()));
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("outer minimization"));
    }

    #[test]
    fn density_name() {
        assert_eq!(density_path(std::path::Path::new("out/fig4.csv")), PathBuf::from("out/fig4.density.csv"));
    }
}
