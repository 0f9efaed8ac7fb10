//! Phase-estimation readouts of Trotterized evolutions.
//!
//! Three layers, all analytic (no ancilla-register circuit simulation):
//!
//! * [`qpe_distribution`] — the exact measurement distribution of textbook
//!   `l`-bit phase estimation for a state expanded in eigenphases, computed
//!   from the closed-form inverse-QFT kernel,
//! * [`qpe_trotter_shift`] — how far the phase detected on a Trotterized
//!   walk drifts from the target eigenphase, and how much success
//!   probability the eigenvector mismatch costs,
//! * [`rpe_extract`] — the two-channel (cosine/sine) robust readout of an
//!   eigenphase *difference* from overlaps of superposed eigenstates, with
//!   its arctangent reconstruction.
//!
//! All single phases are reduced modulo 2π to the representative interval
//! (−π, π]; register phases live on the unit torus [0, 1).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_dense, LayeredHamiltonian};
use crate::linalg::{
    hermitian_eig, state_overlap, DenseOperator, StateVector, Tolerances,
};
use crate::trotter::{effective_hamiltonian, spectral_comparison, trotter_step};

/// Largest supported phase register (2^20 outcomes ≈ 10^6 probabilities).
pub const MAX_REGISTER_BITS: usize = 20;

/// Probability weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-10;

/// Guard on the cosine channel `2 P_alpha - 1`: below this the arctangent
/// quadrant is unresolvable.
pub const QUADRANT_GUARD: f64 = 1e-8;

/// Reduces an angle in radians to the representative interval (−π, π].
pub fn principal_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * std::f64::consts::PI);
    if r > std::f64::consts::PI {
        r - 2.0 * std::f64::consts::PI
    } else {
        r
    }
}

/// Distance between two angles on the circle, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    principal_phase(a - b).abs()
}

// ---------------------------------------------------------------------------
// Register distribution
// ---------------------------------------------------------------------------

/// Measurement distribution of an `l`-bit phase-estimation register.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpeOutcome {
    /// Width `l` of the phase register.
    pub register_bits: usize,
    /// `P(a)` for every outcome `a` in `0..2^l`.
    pub distribution: Vec<f64>,
    /// The register phase being estimated: the eigenphase carrying the
    /// largest weight (the first on ties), in [0, 1).
    pub true_phase: f64,
}

impl QpeOutcome {
    /// The phase `a / 2^l` an outcome integer decodes to.
    pub fn phase_of_outcome(&self, outcome: usize) -> Result<f64> {
        if outcome >= self.distribution.len() {
            return Err(Error::IndexOutOfRange {
                index: outcome,
                dim: self.distribution.len(),
            });
        }
        Ok(outcome as f64 / self.distribution.len() as f64)
    }

    /// The outcome whose decoded phase is circularly closest to `phase`
    /// (ties round up, wrapping to outcome 0).
    pub fn nearest_outcome(&self, phase: f64) -> usize {
        let n = self.distribution.len();
        (phase.rem_euclid(1.0) * n as f64).round() as usize % n
    }

    /// Probability of the outcome nearest to the estimated phase.
    pub fn nearest_probability(&self) -> f64 {
        self.distribution[self.nearest_outcome(self.true_phase)]
    }
}

/// Single-eigenphase register response `|K_l(a, φ)|²`: the probability that
/// an `l`-bit register loaded with exact phase `φ` reads out the integer
/// `a`. Equals `(sin(2^l π δ) / (2^l sin(π δ)))²` with `δ = φ − a/2^l`,
/// extended by its limit 1 at on-grid phases.
pub fn register_response(register_bits: usize, outcome: usize, phase: f64) -> f64 {
    let n = (1u64 << register_bits) as f64;
    let delta = phase - outcome as f64 / n;
    // Both sines are π-periodic up to sign under integer shifts of δ, so
    // reduce first; this keeps the arguments small and the ratio stable.
    let reduced = delta - delta.round();
    if reduced == 0.0 {
        return 1.0;
    }
    let ratio = (n * std::f64::consts::PI * reduced).sin()
        / (n * (std::f64::consts::PI * reduced).sin());
    ratio * ratio
}

/// Exact outcome distribution of ideal `l`-bit phase estimation applied to
/// a state with the given eigenphase decomposition.
///
/// `eigenphases[k]` is the register phase of the `k`-th eigencomponent (in
/// [0, 1)) and `weights[k]` its population; the distribution is the
/// weight-mixture of single-phase register responses.
pub fn qpe_distribution(
    eigenphases: &[f64],
    weights: &[f64],
    register_bits: usize,
) -> Result<QpeOutcome> {
    if register_bits == 0 || register_bits > MAX_REGISTER_BITS {
        return Err(Error::BadRegisterWidth { bits: register_bits, max: MAX_REGISTER_BITS });
    }
    if eigenphases.is_empty() {
        return Err(Error::EmptyModel { what: "zero eigenphases" });
    }
    if eigenphases.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            left: eigenphases.len(),
            right: weights.len(),
        });
    }
    for &phase in eigenphases {
        if !phase.is_finite() || !(0.0..1.0).contains(&phase) {
            return Err(Error::PhaseOutOfRange { phase });
        }
    }
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::BadParam {
                key: "weights",
                reason: format!("weight {w} is not a probability"),
            });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::BadWeights { sum, tolerance: WEIGHT_SUM_TOLERANCE });
    }

    let outcomes = 1usize << register_bits;
    let mut distribution = vec![0.0f64; outcomes];
    for (p, slot) in distribution.iter_mut().enumerate() {
        *slot = eigenphases
            .iter()
            .zip(weights)
            .map(|(&phase, &w)| w * register_response(register_bits, p, phase))
            .sum();
    }

    let mut dominant = 0usize;
    for (k, &w) in weights.iter().enumerate() {
        if w > weights[dominant] {
            dominant = k;
        }
    }
    Ok(QpeOutcome {
        register_bits,
        distribution,
        true_phase: eigenphases[dominant],
    })
}

// ---------------------------------------------------------------------------
// Trotterized phase drift
// ---------------------------------------------------------------------------

/// Phase drift of a Trotterized evolution at one target eigenlevel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrotterPhaseShift {
    /// Number of product steps the requested duration was snapped to.
    pub steps: u64,
    /// The snapped duration `steps * dt` both phases are evaluated at.
    pub effective_time: f64,
    /// Target eigenphase `E_k * effective_time`, reduced to (−π, π].
    pub theta_exact: f64,
    /// Detected eigenphase `Ẽ_k * effective_time`, reduced to (−π, π].
    pub theta_eff: f64,
    /// Unreduced drift `(Ẽ_k − E_k) * effective_time`.
    pub raw_shift: f64,
    /// Success-probability loss `1 − |<ψ_k|ψ̃_k>|²` from preparing the
    /// target eigenvector instead of the effective one.
    pub overlap_penalty: f64,
}

/// Compares the eigenphase a phase-estimation run on `exp(-i H t0)` would
/// target against the one the Trotterized walk actually accumulates.
///
/// `t0` is snapped to the nearest whole number of product steps and both
/// phases are evaluated at the snapped duration, so the reported drift is
/// purely the generator mismatch, never the rounding. The drift must stay
/// within one branch (|shift| < π), otherwise the detected phase winds and
/// the comparison is meaningless.
pub fn qpe_trotter_shift(
    h: &LayeredHamiltonian,
    dt: f64,
    t0: f64,
    k: usize,
) -> Result<TrotterPhaseShift> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::BadTimeStep { dt });
    }
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::NonPositive { what: "t0", value: t0 });
    }
    let steps = (t0 / dt).round();
    if steps < 1.0 {
        return Err(Error::BadParam {
            key: "t0",
            reason: format!("duration {t0} rounds to zero steps of size {dt}"),
        });
    }
    let steps = steps as u64;
    let effective_time = steps as f64 * dt;

    let model = build_dense(h)?;
    let h_eff = effective_hamiltonian(&model.layers, dt)?;
    let cmp = spectral_comparison(&model.total, &h_eff)?;
    if k >= cmp.exact.len() {
        return Err(Error::IndexOutOfRange { index: k, dim: cmp.exact.len() });
    }

    let raw_shift = (cmp.effective[k] - cmp.exact[k]) * effective_time;
    if raw_shift.abs() >= std::f64::consts::PI {
        return Err(Error::PhaseWinding { shift: raw_shift });
    }

    let exact_eig = hermitian_eig(&model.total)?;
    let eff_eig = hermitian_eig(&h_eff)?;
    let overlap = state_overlap(
        &exact_eig.eigenvector(k)?,
        &eff_eig.eigenvector(cmp.matching[k])?,
    )?;
    let overlap_penalty = (1.0 - overlap.norm_sqr()).max(0.0);

    Ok(TrotterPhaseShift {
        steps,
        effective_time,
        theta_exact: principal_phase(cmp.exact[k] * effective_time),
        theta_eff: principal_phase(cmp.effective[k] * effective_time),
        raw_shift,
        overlap_penalty,
    })
}

// ---------------------------------------------------------------------------
// Robust phase estimation
// ---------------------------------------------------------------------------

/// Two-channel robust phase-estimation readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RpeReading {
    /// Cosine channel `|<α|W|α>|²` with `|α> = (|ψ₀> + |ψ₁>)/√2`.
    pub p_alpha: f64,
    /// Sine channel `|<α|W|β>|²` with `|β> = (|ψ₀> + i|ψ₁>)/√2`.
    pub p_beta: f64,
    /// `atan2(2 p_beta − 1, 2 p_alpha − 1)` in (−π, π].
    pub extracted_phase: f64,
    /// The phase the walk's own generator accumulates, reduced to (−π, π]:
    /// `(Ẽ₁ − Ẽ₀) t` for a Trotterized walk, `(E₁ − E₀) t` for an exact one.
    pub predicted_phase: f64,
}

/// Robust phase estimation of the eigenphase difference `(E₁ − E₀) t`
/// accumulated by `steps` Trotter steps of size `dt`, read out through the
/// exact eigenstates at positions `idx0` and `idx1`.
pub fn rpe_extract(
    h: &LayeredHamiltonian,
    dt: f64,
    steps: u64,
    idx0: usize,
    idx1: usize,
) -> Result<RpeReading> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::BadTimeStep { dt });
    }
    if steps == 0 {
        return Err(Error::NonPositive { what: "steps", value: 0.0 });
    }
    let model = build_dense(h)?;
    let t = steps as f64 * dt;

    let h_eff = effective_hamiltonian(&model.layers, dt)?;
    let cmp = spectral_comparison(&model.total, &h_eff)?;
    let predicted = principal_phase(
        (eigenvalue_at(&cmp.effective, &cmp.matching, idx1)?
            - eigenvalue_at(&cmp.effective, &cmp.matching, idx0)?)
            * t,
    );

    let walk = trotter_step(&model.layers, dt)?.pow(steps);
    rpe_channels(&model.total, &walk, idx0, idx1, predicted)
}

/// As [`rpe_extract`] with the exact evolution `exp(-i H t)` substituted
/// for the Trotterized walk; the extracted phase then reproduces
/// `(E₁ − E₀) t` up to roundoff.
pub fn rpe_extract_exact(
    h: &LayeredHamiltonian,
    t: f64,
    idx0: usize,
    idx1: usize,
) -> Result<RpeReading> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::NonPositive { what: "t", value: t });
    }
    let model = build_dense(h)?;
    let spectrum = hermitian_eig(&model.total)?;
    let e = spectrum.eigenvalues();
    if idx0 >= e.len() {
        return Err(Error::IndexOutOfRange { index: idx0, dim: e.len() });
    }
    if idx1 >= e.len() {
        return Err(Error::IndexOutOfRange { index: idx1, dim: e.len() });
    }
    let predicted = principal_phase((e[idx1] - e[idx0]) * t);
    rpe_channels(&model.total, &spectrum.evolve(t), idx0, idx1, predicted)
}

fn eigenvalue_at(matched: &[f64], matching: &[usize], idx: usize) -> Result<f64> {
    if idx >= matched.len() {
        return Err(Error::IndexOutOfRange { index: idx, dim: matching.len() });
    }
    Ok(matched[idx])
}

/// Shared channel evaluation: prepares the two superpositions from the
/// eigenstates of `target`, applies the walk operator, and reconstructs the
/// phase from the cosine/sine pair.
fn rpe_channels(
    target: &DenseOperator,
    walk: &DenseOperator,
    idx0: usize,
    idx1: usize,
    predicted_phase: f64,
) -> Result<RpeReading> {
    if idx0 == idx1 {
        return Err(Error::BadParam {
            key: "idx1",
            reason: format!("eigenstate indices must differ, both are {idx0}"),
        });
    }
    let tol = Tolerances::default();
    let spectrum = hermitian_eig(target)?;
    for idx in [idx0, idx1] {
        let gap = spectrum.gap_at(idx)?;
        if gap < tol.degeneracy {
            return Err(Error::DegenerateSpectrum {
                gap,
                index: idx,
                tolerance: tol.degeneracy,
            });
        }
    }
    let psi0 = spectrum.eigenvector(idx0)?;
    let psi1 = spectrum.eigenvector(idx1)?;
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    let alpha = StateVector::normalized(
        (psi0.amplitudes() + psi1.amplitudes()) * crate::linalg::C64::new(sqrt_half, 0.0),
    )?;
    let beta = StateVector::normalized(
        psi0.amplitudes() * crate::linalg::C64::new(sqrt_half, 0.0)
            + psi1.amplitudes() * crate::linalg::C64::new(0.0, sqrt_half),
    )?;

    let p_alpha = state_overlap(&alpha, &walk.apply(&alpha)?)?.norm_sqr();
    let p_beta = state_overlap(&alpha, &walk.apply(&beta)?)?.norm_sqr();

    let cosine = 2.0 * p_alpha - 1.0;
    if cosine.abs() < QUADRANT_GUARD {
        return Err(Error::QuadrantAmbiguity { value: cosine });
    }
    let extracted_phase = (2.0 * p_beta - 1.0).atan2(cosine);

    Ok(RpeReading { p_alpha, p_beta, extracted_phase, predicted_phase })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
