//! Finite-basis Dirac matrices: block construction, diagonalization with
//! branch classification, partitioned min-max, the negative-energy
//! pseudopotential, and collapse demonstrations.
//!
//! Diagonal blocks are stored with the rest energy split off
//! (`H_uu = mc² S_uu + V_uu`, `H_ll = −mc² S_ll + V_ll`) so eigenvalues can
//! be produced relative to `±mc²` without cancellation.

use crate::error::{Error, Result};
use crate::integrals::{overlap, potential_element};
use crate::linalg::{generalized_eigen, spd_solve, Matrix};
use crate::model::{sigma_p_apply, Component, Constants, PotentialSpec, RadialFunction, SpinorChannel};
use crate::scalar::{lit, Real};

/// Upper and lower basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet<T> {
    uppers: Vec<Component<T>>,
    lowers: Vec<Component<T>>,
}

impl<T: Real> BasisSet<T> {
    pub fn new(uppers: Vec<Component<T>>, lowers: Vec<Component<T>>) -> Result<Self> {
        let Some(first) = uppers.first() else {
            return Err(Error::InvariantViolation("basis needs at least one upper function".into()));
        };
        if uppers.iter().any(|u| u.channel != first.channel) {
            return Err(Error::InvariantViolation("upper functions must share one channel".into()));
        }
        if let Some(l0) = lowers.first() {
            if lowers.iter().any(|l| l.channel != l0.channel) {
                return Err(Error::InvariantViolation("lower functions must share one channel".into()));
            }
        }
        Ok(Self { uppers, lowers })
    }

    pub fn uppers(&self) -> &[Component<T>] {
        &self.uppers
    }

    pub fn lowers(&self) -> &[Component<T>] {
        &self.lowers
    }

    /// Charge-conjugate basis: radial functions of the two blocks trade
    /// places and both channels change sign.
    pub fn conjugated(&self) -> Result<Self> {
        if self.lowers.is_empty() {
            return Err(Error::InvariantViolation("conjugation needs lower functions".into()));
        }
        let upper_channel = self.uppers[0].channel.flipped();
        let lower_channel = self.lowers[0].channel.flipped();
        Self::new(
            self.lowers.iter().map(|l| Component::new(l.radial.clone(), upper_channel)).collect(),
            self.uppers.iter().map(|u| Component::new(u.radial.clone(), lower_channel)).collect(),
        )
    }
}

/// Normalized even-tempered Slater functions `r^power e^(−ζ_k r)` with
/// `ζ_k = zeta0 · ratio^k`.
pub fn even_tempered<T: Real>(
    zeta0: T,
    ratio: T,
    count: usize,
    power: T,
    channel: SpinorChannel,
) -> Result<Vec<Component<T>>> {
    if !(zeta0 > T::zero() && ratio > T::zero()) || count == 0 {
        return Err(Error::Domain("even-tempered set needs zeta0 > 0, ratio > 0, count >= 1".into()));
    }
    let mut zeta = zeta0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(Component::new(RadialFunction::normalized_slater(power, zeta)?, channel));
        zeta = zeta * ratio;
    }
    Ok(out)
}

/// Uppers plus their normalized `σ·p` images.
pub fn kinetic_balance_basis<T: Real>(uppers: &[Component<T>]) -> Result<BasisSet<T>> {
    let lowers = uppers
        .iter()
        .map(|u| sigma_p_apply(&u.radial, u.channel)?.normalized())
        .collect::<Result<Vec<_>>>()?;
    BasisSet::new(uppers.to_vec(), lowers)
}

/// Uppers plus `σ·p` images whose exponents are multiplied by `factor`
/// (renormalized), which breaks the kinetic-balance matching for
/// `factor ≠ 1`.
pub fn detuned_basis<T: Real>(uppers: &[Component<T>], factor: T) -> Result<BasisSet<T>> {
    if !(factor > T::zero()) {
        return Err(Error::Domain(format!("detuning factor must be positive, got {factor}")));
    }
    let lowers = uppers
        .iter()
        .map(|u| {
            let g = sigma_p_apply(&u.radial, u.channel)?;
            Component::new(g.radial.with_scaled_exponents(factor)?, g.channel).normalized()
        })
        .collect::<Result<Vec<_>>>()?;
    BasisSet::new(uppers.to_vec(), lowers)
}

/// Dirac matrix blocks over a [`BasisSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBlocks<T> {
    pub rest: T,
    pub suu: Matrix<T>,
    pub sll: Matrix<T>,
    pub vuu: Matrix<T>,
    pub vll: Matrix<T>,
    /// `c (σ·p u_i, l_j)`.
    pub hul: Matrix<T>,
}

/// Energy origin for a shifted Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `H − mc² S`: eigenvalues are `ε − mc²`.
    PlusRest,
    /// `H + mc² S`: eigenvalues are `ε + mc²`.
    MinusRest,
}

impl<T: Real> MatrixBlocks<T> {
    pub fn n_upper(&self) -> usize {
        self.suu.rows()
    }

    pub fn n_lower(&self) -> usize {
        self.sll.rows()
    }

    pub fn dim(&self) -> usize {
        self.n_upper() + self.n_lower()
    }

    pub fn huu(&self) -> Matrix<T> {
        self.suu.scaled(self.rest).add(&self.vuu)
    }

    pub fn hll(&self) -> Matrix<T> {
        self.sll.scaled(-self.rest).add(&self.vll)
    }

    pub fn hlu(&self) -> Matrix<T> {
        self.hul.transpose()
    }

    /// Full overlap matrix.
    pub fn overlap(&self) -> Matrix<T> {
        let zul = Matrix::zeros(self.n_upper(), self.n_lower());
        let zlu = Matrix::zeros(self.n_lower(), self.n_upper());
        Matrix::block(&[&[&self.suu, &zul], &[&zlu, &self.sll]])
    }

    /// Full Hamiltonian, rest energy included.
    pub fn hamiltonian(&self) -> Matrix<T> {
        let hlu = self.hlu();
        Matrix::block(&[&[&self.huu(), &self.hul], &[&hlu, &self.hll()]])
    }

    /// `H ∓ mc² S` assembled block by block.
    pub fn shifted(&self, reference: Reference) -> Matrix<T> {
        let two_rest = lit::<T>(2.0) * self.rest;
        let (uu, ll) = match reference {
            Reference::PlusRest => (self.vuu.clone(), self.sll.scaled(-two_rest).add(&self.vll)),
            Reference::MinusRest => (self.suu.scaled(two_rest).add(&self.vuu), self.vll.clone()),
        };
        let hlu = self.hlu();
        Matrix::block(&[&[&uu, &self.hul], &[&hlu, &ll]])
    }

    /// Full potential matrix.
    pub fn potential(&self) -> Matrix<T> {
        let zul = Matrix::zeros(self.n_upper(), self.n_lower());
        let zlu = Matrix::zeros(self.n_lower(), self.n_upper());
        Matrix::block(&[&[&self.vuu, &zul], &[&zlu, &self.vll]])
    }
}

fn gram<T: Real>(fs: &[Component<T>], mut element: impl FnMut(&RadialFunction<T>, &RadialFunction<T>) -> Result<T>) -> Result<Matrix<T>> {
    let n = fs.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = element(&fs[i].radial, &fs[j].radial)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Assembles the Dirac blocks for a point nucleus.
pub fn build_blocks<T: Real>(
    basis: &BasisSet<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<MatrixBlocks<T>> {
    let uppers = basis.uppers();
    let lowers = basis.lowers();
    let suu = gram(uppers, |a, b| Ok(overlap(a, b)))?;
    let sll = gram(lowers, |a, b| Ok(overlap(a, b)))?;
    let vuu = gram(uppers, |a, b| potential_element(a, b, potential))?;
    let vll = gram(lowers, |a, b| potential_element(a, b, potential))?;
    let mut hul = Matrix::zeros(uppers.len(), lowers.len());
    for (i, u) in uppers.iter().enumerate() {
        let g = sigma_p_apply(&u.radial, u.channel)?;
        for (j, l) in lowers.iter().enumerate() {
            if l.channel == g.channel {
                hul[(i, j)] = constants.c() * overlap(&g.radial, &l.radial);
            }
        }
    }
    Ok(MatrixBlocks {
        rest: constants.rest_energy(),
        suu,
        sll,
        vuu,
        vll,
        hul,
    })
}

/// Eigenvalues split by the cuts `0` and `mc²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumClassification<T> {
    /// `ε < 0`.
    pub negative_branch: Vec<T>,
    /// `0 ≤ ε < mc²`.
    pub gap: Vec<T>,
    /// `ε ≥ mc²`.
    pub positive_branch: Vec<T>,
}

/// Result of [`diagonalize`].
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    /// Ascending, rest energy included.
    pub values: Vec<T>,
    /// `ε − mc²` for each value, computed without cancellation.
    pub shifts: Vec<T>,
    /// `S`-orthonormal eigenvectors (columns).
    pub vectors: Matrix<T>,
    pub classification: SpectrumClassification<T>,
    /// Index of each eigenvalue's branch: 0 negative, 1 gap, 2 positive.
    pub branch_of: Vec<u8>,
    pub condition: T,
}

impl<T: Real> Spectrum<T> {
    /// Shifts (`ε − mc²`) of the gap eigenvalues, ascending.
    pub fn gap_shifts(&self) -> Vec<T> {
        self.indices(1).map(|k| self.shifts[k]).collect()
    }

    /// Eigenvector indices on a branch (0 negative, 1 gap, 2 positive).
    pub fn indices(&self, branch: u8) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |&k| self.branch_of[k] == branch)
    }
}

/// Solves `H c = ε S c` and classifies the spectrum.
pub fn diagonalize<T: Real>(blocks: &MatrixBlocks<T>) -> Result<Spectrum<T>> {
    let s = blocks.overlap();
    let eig = generalized_eigen(&blocks.shifted(Reference::PlusRest), &s)?;
    let rest = blocks.rest;
    let mut classification = SpectrumClassification {
        negative_branch: Vec::new(),
        gap: Vec::new(),
        positive_branch: Vec::new(),
    };
    let mut branch_of = Vec::with_capacity(eig.values.len());
    let values: Vec<T> = eig.values.iter().map(|&w| w + rest).collect();
    for (&w, &e) in eig.values.iter().zip(&values) {
        if w < -rest {
            classification.negative_branch.push(e);
            branch_of.push(0);
        } else if w < T::zero() {
            classification.gap.push(e);
            branch_of.push(1);
        } else {
            classification.positive_branch.push(e);
            branch_of.push(2);
        }
    }
    Ok(Spectrum {
        values,
        shifts: eig.values,
        vectors: eig.vectors,
        classification,
        branch_of,
        condition: eig.condition,
    })
}

/// Largest generalized residual `‖(H − εS) c‖∞ / ‖H‖∞` over all pairs.
pub fn max_residual<T: Real>(blocks: &MatrixBlocks<T>, spectrum: &Spectrum<T>) -> T {
    let h = blocks.shifted(Reference::PlusRest);
    let s = blocks.overlap();
    let scale = blocks.hamiltonian().max_abs();
    let mut worst = T::zero();
    for k in 0..spectrum.values.len() {
        let x = spectrum.vectors.column(k);
        let hx = h.mul_vec(&x);
        let sx = s.mul_vec(&x);
        for i in 0..x.len() {
            worst = worst.max((hx[i] - spectrum.shifts[k] * sx[i]).abs() / scale);
        }
    }
    worst
}

/// A gap root found by the partitioned (upper-space) iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedRoot<T> {
    pub eps: T,
    /// `ε − mc²`.
    pub shift: T,
    pub iterations: usize,
    pub trace: Vec<T>,
}

/// `root_index`-th eigenvalue of `M(w) = V_uu + H_ul ((w + 2mc²) S_ll − V_ll)⁻¹ H_lu`
/// against `S_uu`; the partitioned problem is `λ_k(M(w)) = w`.
fn upper_effective_root<T: Real>(blocks: &MatrixBlocks<T>, w: T, root_index: usize) -> Result<T> {
    let m = if blocks.n_lower() == 0 {
        blocks.vuu.clone()
    } else {
        let a = blocks.sll.scaled(w + lit::<T>(2.0) * blocks.rest).add(&blocks.vll.scaled(-T::one()));
        let x = spd_solve(&a, &blocks.hlu())?;
        blocks.vuu.add(&blocks.hul.matmul(&x))
    };
    let m = Matrix::from_fn(m.rows(), m.cols(), |i, j| lit::<T>(0.5) * (m[(i, j)] + m[(j, i)]));
    let eig = generalized_eigen(&m, &blocks.suu)?;
    eig.values
        .get(root_index)
        .copied()
        .ok_or_else(|| Error::Domain(format!("root index {root_index} exceeds the upper dimension {}", blocks.n_upper())))
}

/// Talman-style min-max: for each trial energy the lower coefficients are
/// eliminated exactly (the inner maximum), leaving an upper-space problem
/// whose `root_index`-th eigenvalue must reproduce the trial energy. Solved
/// by secant iteration on `w = ε − mc²`.
pub fn partitioned_minmax<T: Real>(blocks: &MatrixBlocks<T>, root_index: usize) -> Result<PartitionedRoot<T>> {
    let rest = blocks.rest;
    let g = |w: T| -> Result<T> { Ok(upper_effective_root(blocks, w, root_index)? - w) };
    let mut trace = Vec::new();
    let mut w0 = T::zero();
    let mut g0 = g(w0)?;
    trace.push(w0);
    let mut w1 = w0 + g0;
    if !(w1 > -rest) {
        w1 = lit::<T>(-0.5) * rest;
    }
    let tol = lit::<T>(1e-15) * rest;
    for it in 0..100 {
        let g1 = g(w1)?;
        trace.push(w1);
        if g1.abs() <= tol || w1 == w0 {
            return Ok(PartitionedRoot {
                eps: w1 + rest,
                shift: w1,
                iterations: it + 1,
                trace,
            });
        }
        let mut next = if g1 != g0 { w1 - g1 * (w1 - w0) / (g1 - g0) } else { w1 + g1 };
        if !(next > -rest) || !next.is_finite() {
            next = lit::<T>(0.5) * (w1 - rest);
        }
        w0 = w1;
        g0 = g1;
        w1 = next;
    }
    Err(Error::NonConvergence {
        stage: "partitioned min-max secant".into(),
        trace: trace.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect(),
    })
}

/// `H + V` with the Phillips–Kleinman-form pseudopotential
/// `V = Σ₋ S c₋ (E_g − ε₋) c₋ᵀ S` built from the negative-branch
/// eigenvectors. Returned shifted by `−mc² S` (as [`Reference::PlusRest`]).
///
/// Assembled as `(1 − P)ᵀ H (1 − P) + E_g S P` with `P = Σ₋ c₋ c₋ᵀ S`, which
/// equals `H + V` exactly but only depends on the negative subspace, not on
/// the individual (nearly degenerate) eigenvectors inside it.
pub fn nepp_apply<T: Real>(blocks: &MatrixBlocks<T>, spectrum: &Spectrum<T>, e_g_shift: T) -> Matrix<T> {
    let s = blocks.overlap();
    let h = blocks.shifted(Reference::PlusRest);
    let n = blocks.dim();
    let mut sp = Matrix::zeros(n, n);
    let mut q = Matrix::identity(n);
    for k in spectrum.indices(0) {
        let c = spectrum.vectors.column(k);
        let sc = s.mul_vec(&c);
        for i in 0..n {
            for j in 0..n {
                sp[(i, j)] = sp[(i, j)] + sc[i] * sc[j];
                q[(i, j)] = q[(i, j)] - c[i] * sc[j];
            }
        }
    }
    let kept = q.transpose().matmul(&h).matmul(&q);
    Matrix::from_fn(n, n, |i, j| {
        let a = kept[(i, j)] + kept[(j, i)];
        lit::<T>(0.5) * a + e_g_shift * sp[(i, j)]
    })
}

/// Spectrum of `H + V^NEPP` (shifts `ε − mc²`, ascending).
pub fn nepp_spectrum<T: Real>(blocks: &MatrixBlocks<T>, spectrum: &Spectrum<T>, e_g_shift: T) -> Result<Vec<T>> {
    let h = nepp_apply(blocks, spectrum, e_g_shift);
    Ok(generalized_eigen(&h, &blocks.overlap())?.values)
}

/// Lower basis used by [`collapse_demo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerFamily<T> {
    Balanced,
    Detuned(T),
}

/// Outcome of a collapse demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport<T> {
    pub detune_factor: T,
    /// Lowest gap eigenvalue, rest energy included.
    pub lowest_gap: T,
    pub lowest_gap_shift: T,
    /// Exact point-nucleus ground state minus `mc²`.
    pub exact_shift: T,
    /// `lowest_gap_shift − exact_shift`; negative means collapse.
    pub margin: T,
    pub collapsed: bool,
}

/// Diagonalizes with balanced or detuned lowers and compares the lowest gap
/// eigenvalue with the exact ground state.
pub fn collapse_demo<T: Real>(
    uppers: &[Component<T>],
    family: LowerFamily<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<CollapseReport<T>> {
    let factor = match family {
        LowerFamily::Balanced => T::one(),
        LowerFamily::Detuned(f) => f,
    };
    let basis = if factor == T::one() {
        kinetic_balance_basis(uppers)?
    } else {
        detuned_basis(uppers, factor)?
    };
    let spectrum = diagonalize(&build_blocks(&basis, potential, constants)?)?;
    let k = spectrum
        .indices(1)
        .next()
        .ok_or_else(|| Error::Branch("no eigenvalue in the gap".into()))?;
    let exact_shift = constants.exact_ground_shift(potential.charge());
    let shift = spectrum.shifts[k];
    Ok(CollapseReport {
        detune_factor: factor,
        lowest_gap: spectrum.values[k],
        lowest_gap_shift: shift,
        exact_shift,
        margin: shift - exact_shift,
        collapsed: shift < exact_shift,
    })
}

/// Largest `|ε_k(basis, Z) + ε_{n−1−k}(conj basis, −Z)|`.
pub fn conjugation_asymmetry<T: Real>(
    basis: &BasisSet<T>,
    potential: &PotentialSpec<T>,
    constants: &Constants<T>,
) -> Result<T> {
    let direct = generalized_eigen(
        &build_blocks(basis, potential, constants)?.hamiltonian(),
        &build_blocks(basis, potential, constants)?.overlap(),
    )?;
    let conj_blocks = build_blocks(&basis.conjugated()?, &potential.opposite(), constants)?;
    let mirrored = generalized_eigen(&conj_blocks.hamiltonian(), &conj_blocks.overlap())?;
    let n = direct.values.len();
    Ok((0..n)
        .map(|k| (direct.values[k] + mirrored.values[n - 1 - k]).abs())
        .fold(T::zero(), T::max))
}
