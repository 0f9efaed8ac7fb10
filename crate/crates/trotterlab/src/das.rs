//! Discretized adiabatic sweeps between two Hamiltonians.
//!
//! The protocol interpolates `H(s) = (1 - s) H_i + s H_f` over `M` steps of
//! total time `T`. Two walkers are compared against the adiabatic target
//! state (the maximal-overlap continuation of the ground state of `H_i` to
//! `s = 1`):
//!
//! * the *discretized* walker applies `exp(-i H(a/M) T/M)` for `a = 1..=M`
//!   (the first step already moves off `H_i`, the last lands exactly on
//!   `H_f`),
//! * the *step-split* walker replaces each factor by
//!   `exp(-i dt (1-s) H_i) exp(-i dt s H_f)` with the `H_f` factor acting
//!   first, i.e. a first-order product step of the same interpolant.
//!
//! Per sweep record four sine distances `sqrt(1 - |<a|b>|^2)` are reported:
//! discretized-vs-target (`eps_adb_d`), split-vs-discretized (`eps_tro`),
//! split-vs-target (`eps_tot_d`), and a discretization proxy comparing the
//! discretized walker against a four-times-finer rerun (`eps_dis_proxy`).
//!
//! The per-step interpolants do not depend on the total time, so a whole
//! grid of `T` values is propagated in lockstep: each `H(a/M)` is
//! diagonalized once and all columns of a state batch are advanced with two
//! matrix products. Models whose endpoint matrices are real (checked
//! entrywise, not from the symbolic letter content) additionally run in
//! split real arithmetic, which is several times faster than complex
//! products.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bounds::PathPoint;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_dense, LayeredHamiltonian};
use crate::linalg::{
    eig_real_symmetric, evolve_unitary, hermitian_eig, operator_norm, unitary_log, C64,
    DenseOperator, StateVector,
};
use crate::trotter::scaling_fit;

/// Resolution of the ground-state continuation used to identify the target
/// eigenstate at `s = 1`.
pub const CONTINUATION_POINTS: usize = 64;

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One sweep evaluation at a fixed total time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DasRecord {
    /// Total sweep time.
    #[serde(rename = "T")]
    pub total_time: f64,
    /// Number of sweep steps.
    #[serde(rename = "M")]
    pub steps: u64,
    /// Distance of the discretized walker from the adiabatic target.
    pub eps_adb_d: f64,
    /// Distance between the step-split and discretized walkers.
    pub eps_tro: f64,
    /// Distance of the step-split walker from the adiabatic target.
    pub eps_tot_d: f64,
    /// Distance of the discretized walker from its four-times-finer rerun.
    pub eps_dis_proxy: f64,
}

/// A full sweep over a grid of total times at fixed step count.
#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    /// One record per total time, in grid order.
    pub records: Vec<DasRecord>,
    /// Step count shared by all records.
    pub steps: u64,
    /// Position (ascending-energy index in `H_f`) of the adiabatic target.
    pub target_index: usize,
    /// Total time of the first minimum of `eps_tot_d` over the grid.
    pub turning_point_t: f64,
    /// Power-law exponent of `eps_adb_d` vs `T` on the pre-turning prefix
    /// (absent when the prefix is too short or touches exact zeros).
    pub slope_adb: Option<f64>,
    /// Number of records in the fitted prefix.
    pub prefix_len: usize,
}

// ---------------------------------------------------------------------------
// Real/complex lanes
// ---------------------------------------------------------------------------

/// Endpoint matrices, specialized to real arithmetic when possible.
enum Lane {
    Real { hi: DMatrix<f64>, hf: DMatrix<f64> },
    Complex { hi: DMatrix<C64>, hf: DMatrix<C64> },
}

/// Eigendecomposition of one interpolant, in the lane's arithmetic.
enum StepBasis {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

struct StepSpectrum {
    values: Vec<f64>,
    basis: StepBasis,
}

/// A batch of states, one column per sweep total time.
enum StateBatch {
    Real { re: DMatrix<f64>, im: DMatrix<f64> },
    Complex(DMatrix<C64>),
}

impl Lane {
    fn new(hi: &DenseOperator, hf: &DenseOperator) -> Self {
        if hi.is_real() && hf.is_real() {
            Lane::Real { hi: re_part(hi), hf: re_part(hf) }
        } else {
            Lane::Complex { hi: hi.matrix().clone(), hf: hf.matrix().clone() }
        }
    }

    /// Diagonalizes `H(s) = (1 - s) H_i + s H_f`.
    fn eig_at(&self, s: f64) -> Result<StepSpectrum> {
        match self {
            Lane::Real { hi, hf } => {
                let m = hi * (1.0 - s) + hf * s;
                let (values, basis) = eig_real_symmetric(&m);
                Ok(StepSpectrum { values, basis: StepBasis::Real(basis) })
            }
            Lane::Complex { hi, hf } => {
                let m = hi * C64::new(1.0 - s, 0.0) + hf * C64::new(s, 0.0);
                let spectrum = hermitian_eig(&DenseOperator::new(m)?)?;
                Ok(StepSpectrum {
                    values: spectrum.eigenvalues().to_vec(),
                    basis: StepBasis::Complex(spectrum.basis().clone()),
                })
            }
        }
    }

    /// A batch of `count` copies of one eigenvector column.
    fn batch_from_column(&self, spectrum: &StepSpectrum, col: usize, count: usize) -> StateBatch {
        match &spectrum.basis {
            StepBasis::Real(v) => {
                let mut re = DMatrix::<f64>::zeros(v.nrows(), count);
                for j in 0..count {
                    re.set_column(j, &v.column(col));
                }
                StateBatch::Real { re, im: DMatrix::zeros(v.nrows(), count) }
            }
            StepBasis::Complex(v) => {
                let mut s = DMatrix::<C64>::zeros(v.nrows(), count);
                for j in 0..count {
                    s.set_column(j, &v.column(col));
                }
                StateBatch::Complex(s)
            }
        }
    }
}

fn re_part(op: &DenseOperator) -> DMatrix<f64> {
    op.matrix().map(|z| z.re)
}

/// Advances every column `j` of the batch by `exp(-i H tau[j])` using the
/// eigendecomposition of `H`.
fn propagate_batch(spectrum: &StepSpectrum, batch: &mut StateBatch, taus: &[f64]) {
    match (&spectrum.basis, batch) {
        (StepBasis::Real(v), StateBatch::Real { re, im }) => {
            let mut wre = v.tr_mul(&*re);
            let mut wim = v.tr_mul(&*im);
            for j in 0..taus.len() {
                for (i, &e) in spectrum.values.iter().enumerate() {
                    let (sin, cos) = (e * taus[j]).sin_cos();
                    let a = wre[(i, j)];
                    let b = wim[(i, j)];
                    // (a + i b) (cos - i sin)
                    wre[(i, j)] = a * cos + b * sin;
                    wim[(i, j)] = b * cos - a * sin;
                }
            }
            *re = v * wre;
            *im = v * wim;
        }
        (StepBasis::Complex(v), StateBatch::Complex(s)) => {
            let mut w = v.ad_mul(&*s);
            for j in 0..taus.len() {
                for (i, &e) in spectrum.values.iter().enumerate() {
                    w[(i, j)] *= C64::from_polar(1.0, -e * taus[j]);
                }
            }
            *s = v * w;
        }
        // Lanes are fixed per sweep; mixing them is a programming error.
        _ => unreachable!("state batch lane must match the spectrum lane"),
    }
}

/// `|<target | column j>|^2`.
fn column_overlap_sq(batch: &StateBatch, j: usize, target: &TrackedVector) -> f64 {
    match (batch, target) {
        (StateBatch::Real { re, im }, TrackedVector::Real(t)) => {
            let dr = t.dot(&re.column(j));
            let di = t.dot(&im.column(j));
            dr * dr + di * di
        }
        (StateBatch::Complex(s), TrackedVector::Complex(t)) => {
            s.column(j).dotc(t).norm_sqr()
        }
        _ => unreachable!("target lane must match the batch lane"),
    }
}

/// `|<column j of a | column j of b>|^2`.
fn cross_overlap_sq(a: &StateBatch, b: &StateBatch, j: usize) -> f64 {
    match (a, b) {
        (StateBatch::Real { re: ar, im: ai }, StateBatch::Real { re: br, im: bi }) => {
            let re = ar.column(j).dot(&br.column(j)) + ai.column(j).dot(&bi.column(j));
            let im = ar.column(j).dot(&bi.column(j)) - ai.column(j).dot(&br.column(j));
            re * re + im * im
        }
        (StateBatch::Complex(sa), StateBatch::Complex(sb)) => {
            sa.column(j).dotc(&sb.column(j)).norm_sqr()
        }
        _ => unreachable!("cross overlaps require matching lanes"),
    }
}

fn sine_distance(overlap_sq: f64) -> f64 {
    (1.0 - overlap_sq).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Ground-state continuation
// ---------------------------------------------------------------------------

enum TrackedVector {
    Real(DVector<f64>),
    Complex(DVector<C64>),
}

impl TrackedVector {
    fn from_basis(spectrum: &StepSpectrum, col: usize) -> Self {
        match &spectrum.basis {
            StepBasis::Real(v) => TrackedVector::Real(v.column(col).into_owned()),
            StepBasis::Complex(v) => TrackedVector::Complex(v.column(col).into_owned()),
        }
    }

    /// Overlaps `|<basis_k | self>|^2` for every column of the new basis,
    /// returning the best column and its overlap.
    fn best_column(&self, spectrum: &StepSpectrum) -> (usize, f64) {
        let overlaps: Vec<f64> = match (&spectrum.basis, self) {
            (StepBasis::Real(v), TrackedVector::Real(t)) => {
                let proj = v.tr_mul(t);
                proj.iter().map(|x| x * x).collect()
            }
            (StepBasis::Complex(v), TrackedVector::Complex(t)) => {
                let proj = v.ad_mul(t);
                proj.iter().map(|z| z.norm_sqr()).collect()
            }
            _ => unreachable!("continuation stays within one lane"),
        };
        let (mut best, mut best_val) = (0usize, -1.0f64);
        for (k, &o) in overlaps.iter().enumerate() {
            if o > best_val {
                best = k;
                best_val = o;
            }
        }
        (best, best_val)
    }

    fn to_state(&self) -> Result<StateVector> {
        match self {
            TrackedVector::Real(t) => {
                StateVector::new(DVector::from_iterator(
                    t.len(),
                    t.iter().map(|&x| C64::new(x, 0.0)),
                ))
            }
            TrackedVector::Complex(t) => StateVector::new(t.clone()),
        }
    }
}

/// Follows the ground state of `H_i` along the interpolation by maximal
/// eigenvector overlap on [`CONTINUATION_POINTS`] equispaced points and
/// returns its position in the ascending spectrum of `H_f` together with
/// the vector itself.
///
/// On a gapped path this is the adiabatic target. Through an *exact* level
/// crossing maximal overlap follows the smooth (diabatic) branch instead;
/// the tracker only refuses when the step-to-step overlap drops below 1/2,
/// which signals a continuation too wild for the sampled resolution.
pub fn adiabatic_target(
    h_i: &DenseOperator,
    h_f: &DenseOperator,
) -> Result<(usize, StateVector)> {
    if h_i.dim() != h_f.dim() {
        return Err(Error::DimensionMismatch { left: h_i.dim(), right: h_f.dim() });
    }
    let lane = Lane::new(h_i, h_f);
    let n = CONTINUATION_POINTS - 1;
    let start = lane.eig_at(0.0)?;
    let mut tracked = TrackedVector::from_basis(&start, 0);
    let mut index = 0usize;
    for p in 1..=n {
        let s = p as f64 / n as f64;
        let spectrum = lane.eig_at(s)?;
        let (best, overlap) = tracked.best_column(&spectrum);
        if overlap <= 0.5 {
            return Err(Error::SubspaceLost { distance: (1.0 - overlap).sqrt() });
        }
        tracked = TrackedVector::from_basis(&spectrum, best);
        index = best;
    }
    Ok((index, tracked.to_state()?))
}

// ---------------------------------------------------------------------------
// Effective per-step generator
// ---------------------------------------------------------------------------

/// The exact generator of one step-split factor at interpolation point `s`:
/// `i log( exp(-i dt (1-s) H_i) exp(-i dt s H_f) ) / dt`. At the endpoints
/// the product degenerates to a single exponential and the corresponding
/// endpoint Hamiltonian is returned exactly.
pub fn effective_interpolant(
    h_i: &DenseOperator,
    h_f: &DenseOperator,
    s: f64,
    dt: f64,
) -> Result<DenseOperator> {
    if h_i.dim() != h_f.dim() {
        return Err(Error::DimensionMismatch { left: h_i.dim(), right: h_f.dim() });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::BadParam {
            key: "s",
            reason: format!("interpolation point {s} outside [0, 1]"),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::BadTimeStep { dt });
    }
    if s == 0.0 {
        return Ok(h_i.clone());
    }
    if s == 1.0 {
        return Ok(h_f.clone());
    }
    let uf = evolve_unitary(h_f, dt * s)?;
    let ui = evolve_unitary(h_i, dt * (1.0 - s))?;
    unitary_log(&(&ui * &uf), dt)
}

/// Samples gap and derivative norms of the linear interpolation for the
/// adiabatic path functional: `|H'| = |H_f - H_i|` is constant, `|H''| = 0`,
/// and the gap isolates the ground state of `H(s)`.
pub fn ground_path_sampler<'a>(
    h_i: &'a DenseOperator,
    h_f: &'a DenseOperator,
) -> Result<impl Fn(f64) -> Result<PathPoint> + 'a> {
    if h_i.dim() != h_f.dim() {
        return Err(Error::DimensionMismatch { left: h_i.dim(), right: h_f.dim() });
    }
    let dh = operator_norm(&(h_f - h_i))?;
    let lane = Lane::new(h_i, h_f);
    Ok(move |s: f64| {
        let spectrum = lane.eig_at(s)?;
        let gap = spectrum.values[1] - spectrum.values[0];
        Ok(PathPoint { gap, dh, d2h: 0.0 })
    })
}

// ---------------------------------------------------------------------------
// The sweep
// ---------------------------------------------------------------------------

fn validate_grid(t_values: &[f64]) -> Result<()> {
    if t_values.is_empty() {
        return Err(Error::EmptyModel { what: "zero sweep times" });
    }
    for &t in t_values {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositive { what: "sweep time", value: t });
        }
    }
    if t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadParam {
            key: "t_grid",
            reason: "sweep times must be strictly increasing".into(),
        });
    }
    Ok(())
}

/// Runs the discretized walker for `steps` steps, advancing all columns.
fn run_discretized(
    lane: &Lane,
    batch: &mut StateBatch,
    t_values: &[f64],
    steps: u64,
) -> Result<()> {
    let m = steps as f64;
    let taus: Vec<f64> = t_values.iter().map(|t| t / m).collect();
    for a in 1..=steps {
        let spectrum = lane.eig_at(a as f64 / m)?;
        propagate_batch(&spectrum, batch, &taus);
    }
    Ok(())
}

/// Runs the step-split walker: per step the `H_f` factor (weight `s`) acts
/// first, then the `H_i` factor (weight `1 - s`).
fn run_split(lane: &Lane, batch: &mut StateBatch, t_values: &[f64], steps: u64) -> Result<()> {
    let m = steps as f64;
    let spec_i = lane.eig_at(0.0)?;
    let spec_f = lane.eig_at(1.0)?;
    let mut taus = vec![0.0f64; t_values.len()];
    for a in 1..=steps {
        let s = a as f64 / m;
        for (j, &t) in t_values.iter().enumerate() {
            taus[j] = t / m * s;
        }
        propagate_batch(&spec_f, batch, &taus);
        for (j, &t) in t_values.iter().enumerate() {
            taus[j] = t / m * (1.0 - s);
        }
        propagate_batch(&spec_i, batch, &taus);
    }
    Ok(())
}

/// Evaluates the sweep on a grid of total times at fixed step count.
///
/// All grid columns advance in lockstep so each interpolant is diagonalized
/// once for the main walk and once for the four-times-finer discretization
/// proxy, independent of the grid size.
pub fn das_sweep(
    h_i: &LayeredHamiltonian,
    h_f: &LayeredHamiltonian,
    t_values: &[f64],
    steps: u64,
) -> Result<SweepResult> {
    if h_i.n_sites() != h_f.n_sites() {
        return Err(Error::SiteCountMismatch {
            expected: h_i.n_sites(),
            found: h_f.n_sites(),
        });
    }
    validate_grid(t_values)?;
    if steps == 0 {
        return Err(Error::NonPositive { what: "steps", value: 0.0 });
    }
    let hi = build_dense(h_i)?.total;
    let hf = build_dense(h_f)?.total;
    let lane = Lane::new(&hi, &hf);
    let count = t_values.len();

    let (target_index, target_state) = adiabatic_target(&hi, &hf)?;
    let target = match &lane {
        Lane::Real { .. } => {
            TrackedVector::Real(target_state.amplitudes().map(|z| z.re))
        }
        Lane::Complex { .. } => TrackedVector::Complex(target_state.amplitudes().clone()),
    };

    let start = lane.eig_at(0.0)?;
    let mut discretized = lane.batch_from_column(&start, 0, count);
    let mut split = lane.batch_from_column(&start, 0, count);
    let mut fine = lane.batch_from_column(&start, 0, count);

    run_discretized(&lane, &mut discretized, t_values, steps)?;
    run_split(&lane, &mut split, t_values, steps)?;
    run_discretized(&lane, &mut fine, t_values, steps * 4)?;

    let mut records = Vec::with_capacity(count);
    for (j, &t) in t_values.iter().enumerate() {
        records.push(DasRecord {
            total_time: t,
            steps,
            eps_adb_d: sine_distance(column_overlap_sq(&discretized, j, &target)),
            eps_tro: sine_distance(cross_overlap_sq(&discretized, &split, j)),
            eps_tot_d: sine_distance(column_overlap_sq(&split, j, &target)),
            eps_dis_proxy: sine_distance(cross_overlap_sq(&fine, &discretized, j)),
        });
    }

    let mut turning = 0usize;
    for (j, r) in records.iter().enumerate() {
        if r.eps_tot_d < records[turning].eps_tot_d {
            turning = j;
        }
    }
    let turning_point_t = records[turning].total_time;
    let prefix: Vec<&DasRecord> =
        records.iter().filter(|r| r.total_time <= turning_point_t).collect();
    let prefix_len = prefix.len();
    let ts: Vec<f64> = prefix.iter().map(|r| r.total_time).collect();
    let es: Vec<f64> = prefix.iter().map(|r| r.eps_adb_d).collect();
    let slope_adb = scaling_fit(&ts, &es).ok().map(|fit| fit.slope);

    Ok(SweepResult {
        records,
        steps,
        target_index,
        turning_point_t,
        slope_adb,
        prefix_len,
    })
}

/// Single-total-time convenience wrapper around [`das_sweep`].
pub fn das_errors(
    h_i: &LayeredHamiltonian,
    h_f: &LayeredHamiltonian,
    total_time: f64,
    steps: u64,
) -> Result<DasRecord> {
    let sweep = das_sweep(h_i, h_f, &[total_time], steps)?;
    Ok(sweep.records[0])
}

// ---------------------------------------------------------------------------
// Whole-schedule propagators as dense operators
// ---------------------------------------------------------------------------

fn endpoint_pair(
    h_i: &LayeredHamiltonian,
    h_f: &LayeredHamiltonian,
    total_time: f64,
    steps: u64,
) -> Result<(DenseOperator, DenseOperator)> {
    if h_i.n_sites() != h_f.n_sites() {
        return Err(Error::SiteCountMismatch {
            expected: h_i.n_sites(),
            found: h_f.n_sites(),
        });
    }
    if steps == 0 {
        return Err(Error::NonPositive { what: "steps", value: 0.0 });
    }
    if !(total_time.is_finite() && total_time > 0.0) {
        return Err(Error::NonPositive { what: "total time", value: total_time });
    }
    Ok((build_dense(h_i)?.total, build_dense(h_f)?.total))
}

/// The discretized schedule as one dense propagator,
/// `A_d = U_M ... U_1` with `U_a = exp(-i (T/M) H(a/M))`: the `a = 1`
/// factor acts first, and the last step lands exactly on `H_f`. One
/// eigendecomposition per step; intended for desk-scale verification, not
/// for sweeps (those run in lockstep on state batches instead).
pub fn discretized_evolution(
    h_i: &LayeredHamiltonian,
    h_f: &LayeredHamiltonian,
    total_time: f64,
    steps: u64,
) -> Result<DenseOperator> {
    let (hi, hf) = endpoint_pair(h_i, h_f, total_time, steps)?;
    let dt = total_time / steps as f64;
    let mut product = DenseOperator::identity(hi.dim())?;
    for a in 1..=steps {
        let s = a as f64 / steps as f64;
        let hs = DenseOperator::new(
            hi.matrix() * C64::new(1.0 - s, 0.0) + hf.matrix() * C64::new(s, 0.0),
        )?;
        product = &evolve_unitary(&hs, dt)? * &product;
    }
    Ok(product)
}

/// The step-split schedule as one dense propagator,
/// `A_t = S_M ... S_1` with `S_a = exp(-i dt (1-s_a) H_i) exp(-i dt s_a H_f)`,
/// `s_a = a/M`, and the `H_f` factor of each step acting first. The two
/// endpoint spectra are diagonalized once; only scalar phases change
/// between steps.
pub fn trotterized_evolution(
    h_i: &LayeredHamiltonian,
    h_f: &LayeredHamiltonian,
    total_time: f64,
    steps: u64,
) -> Result<DenseOperator> {
    let (hi, hf) = endpoint_pair(h_i, h_f, total_time, steps)?;
    let dt = total_time / steps as f64;
    let spec_i = hermitian_eig(&hi)?;
    let spec_f = hermitian_eig(&hf)?;
    let mut product = DenseOperator::identity(hi.dim())?;
    for a in 1..=steps {
        let s = a as f64 / steps as f64;
        let step = &spec_i.evolve(dt * (1.0 - s)) * &spec_f.evolve(dt * s);
        product = &step * &product;
    }
    Ok(product)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{tfim_pair, Layer, PauliTerm};
    use crate::linalg::state_overlap;

    fn single_term_model(n: usize, coeff: f64, letters: &str) -> LayeredHamiltonian {
        LayeredHamiltonian::new(
            n,
            vec![Layer::new(vec![PauliTerm::parse(coeff, letters).unwrap()]).unwrap()],
        )
        .unwrap()
    }

    /// Straightforward per-step reference walk on plain complex matrices.
    fn naive_walk(
        hi: &DenseOperator,
        hf: &DenseOperator,
        t: f64,
        m: u64,
        psi0: &StateVector,
    ) -> (StateVector, StateVector) {
        let dt = t / m as f64;
        let mut pd = psi0.clone();
        let mut pt = psi0.clone();
        for a in 1..=m {
            let s = a as f64 / m as f64;
            let hs = DenseOperator::new(
                hi.matrix() * C64::new(1.0 - s, 0.0) + hf.matrix() * C64::new(s, 0.0),
            )
            .unwrap();
            pd = evolve_unitary(&hs, dt).unwrap().apply(&pd).unwrap();
            let after_f = evolve_unitary(hf, dt * s).unwrap().apply(&pt).unwrap();
            pt = evolve_unitary(hi, dt * (1.0 - s)).unwrap().apply(&after_f).unwrap();
        }
        (pd, pt)
    }

    fn check_against_naive(h_i: &LayeredHamiltonian, h_f: &LayeredHamiltonian, t: f64, m: u64) {
        let hi = build_dense(h_i).unwrap().total;
        let hf = build_dense(h_f).unwrap().total;
        let psi0 = hermitian_eig(&hi).unwrap().eigenvector(0).unwrap();
        let (_, target) = adiabatic_target(&hi, &hf).unwrap();
        let (pd, pt) = naive_walk(&hi, &hf, t, m, &psi0);
        let expect_adb = sine_distance(state_overlap(&target, &pd).unwrap().norm_sqr());
        let expect_tot = sine_distance(state_overlap(&target, &pt).unwrap().norm_sqr());
        let expect_tro = sine_distance(state_overlap(&pd, &pt).unwrap().norm_sqr());
        let record = das_errors(h_i, h_f, t, m).unwrap();
        assert!((record.eps_adb_d - expect_adb).abs() < 1e-10, "adb {record:?}");
        assert!((record.eps_tot_d - expect_tot).abs() < 1e-10, "tot {record:?}");
        assert!((record.eps_tro - expect_tro).abs() < 1e-10, "tro {record:?}");
    }

    // ------------------------------------------------------------- oracles

    #[test]
    fn real_lane_matches_naive_walk() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        check_against_naive(&h_i, &h_f, 3.0, 20);
    }

    #[test]
    fn complex_lane_matches_naive_walk() {
        // A Y endpoint forces complex arithmetic.
        let h_i = single_term_model(2, 1.0, "XI");
        let h_f = single_term_model(2, 0.8, "YZ");
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        assert!(hi.is_real() && !hf.is_real());
        check_against_naive(&h_i, &h_f, 2.0, 15);
    }

    #[test]
    fn lockstep_grid_equals_separate_runs() {
        let (h_i, h_f) = tfim_pair(3).unwrap();
        let grid = [2.0, 5.0, 11.0];
        let sweep = das_sweep(&h_i, &h_f, &grid, 25).unwrap();
        for (j, &t) in grid.iter().enumerate() {
            let single = das_errors(&h_i, &h_f, t, 25).unwrap();
            let r = sweep.records[j];
            assert!((r.eps_adb_d - single.eps_adb_d).abs() < 1e-12);
            assert!((r.eps_tot_d - single.eps_tot_d).abs() < 1e-12);
            assert!((r.eps_tro - single.eps_tro).abs() < 1e-12);
            assert!((r.eps_dis_proxy - single.eps_dis_proxy).abs() < 1e-12);
        }
    }

    // ------------------------------------------------------------ physics

    #[test]
    fn slow_gapped_sweeps_are_adiabatic() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let fast = das_errors(&h_i, &h_f, 1.0, 400).unwrap();
        let slow = das_errors(&h_i, &h_f, 40.0, 400).unwrap();
        assert!(slow.eps_adb_d < 0.1, "slow sweep distance {}", slow.eps_adb_d);
        assert!(slow.eps_adb_d < fast.eps_adb_d);
    }

    #[test]
    fn distances_satisfy_triangle_inequality() {
        // The sine distance is a metric, so split-vs-target is at most
        // discretized-vs-target plus split-vs-discretized.
        let (h_i, h_f) = tfim_pair(3).unwrap();
        let sweep = das_sweep(&h_i, &h_f, &[4.0, 8.0, 16.0, 32.0], 60).unwrap();
        for r in &sweep.records {
            assert!(r.eps_tot_d <= r.eps_adb_d + r.eps_tro + 1e-9, "{r:?}");
            for e in [r.eps_adb_d, r.eps_tro, r.eps_tot_d, r.eps_dis_proxy] {
                assert!((0.0..=1.0 + 1e-12).contains(&e));
            }
        }
    }

    #[test]
    fn finer_discretization_shrinks_the_proxy() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let coarse = das_errors(&h_i, &h_f, 10.0, 20).unwrap();
        let fine = das_errors(&h_i, &h_f, 10.0, 320).unwrap();
        assert!(fine.eps_dis_proxy < coarse.eps_dis_proxy);
        assert!(fine.eps_dis_proxy < 1e-2);
    }

    // ----------------------------------------------------------- targeting

    #[test]
    fn gapped_path_targets_the_ground_state() {
        let (h_i, h_f) = tfim_pair(3).unwrap();
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        let (index, state) = adiabatic_target(&hi, &hf).unwrap();
        assert_eq!(index, 0);
        let gs = hermitian_eig(&hf).unwrap().eigenvector(0).unwrap();
        let overlap = state_overlap(&gs, &state).unwrap().norm();
        assert!(overlap > 1.0 - 1e-10, "overlap {overlap}");
    }

    #[test]
    fn exact_crossing_follows_the_smooth_branch() {
        // H(s) = (3s - 1) Z crosses zero at s = 1/3; maximal overlap keeps
        // the |0> branch, which ends as the *excited* state of H_f = 2Z.
        let h_i = single_term_model(1, -1.0, "Z");
        let h_f = single_term_model(1, 2.0, "Z");
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        let (index, state) = adiabatic_target(&hi, &hf).unwrap();
        assert_eq!(index, 1);
        let up = StateVector::basis_state(2, 0).unwrap();
        assert!(state_overlap(&up, &state).unwrap().norm() > 1.0 - 1e-12);
    }

    // ------------------------------------------------- effective interpolant

    #[test]
    fn interpolant_endpoints_are_exact() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        let at0 = effective_interpolant(&hi, &hf, 0.0, 0.1).unwrap();
        let at1 = effective_interpolant(&hi, &hf, 1.0, 0.1).unwrap();
        assert!(operator_norm(&(&at0 - &hi)).unwrap() == 0.0);
        assert!(operator_norm(&(&at1 - &hf)).unwrap() == 0.0);
    }

    #[test]
    fn interpolant_converges_linearly_in_dt() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        let hs = DenseOperator::new(
            hi.matrix() * C64::new(0.5, 0.0) + hf.matrix() * C64::new(0.5, 0.0),
        )
        .unwrap();
        let err = |dt: f64| {
            let eff = effective_interpolant(&hi, &hf, 0.5, dt).unwrap();
            operator_norm(&(&eff - &hs)).unwrap()
        };
        let coarse = err(0.08);
        let fine = err(0.04);
        assert!(coarse > 1e-4, "step drift should be visible, got {coarse}");
        let ratio = coarse / fine;
        assert!((ratio - 2.0).abs() < 0.2, "first-order drift ratio {ratio}");
    }

    #[test]
    fn interpolant_validates_inputs() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        assert!(matches!(
            effective_interpolant(&hi, &hf, 1.5, 0.1),
            Err(Error::BadParam { key: "s", .. })
        ));
        assert!(matches!(
            effective_interpolant(&hi, &hf, 0.5, 0.0),
            Err(Error::BadTimeStep { .. })
        ));
    }

    #[test]
    fn path_sampler_reports_constant_derivative() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let hi = build_dense(&h_i).unwrap().total;
        let hf = build_dense(&h_f).unwrap().total;
        let sampler = ground_path_sampler(&hi, &hf).unwrap();
        let p0 = sampler(0.0).unwrap();
        let p1 = sampler(1.0).unwrap();
        // |H'| = |H_f - H_i| everywhere; gap at s = 0 is 2 for the X field.
        assert!((p0.dh - p1.dh).abs() < 1e-13);
        assert!((p0.gap - 2.0).abs() < 1e-10, "gap {}", p0.gap);
        assert_eq!(p0.d2h, 0.0);
    }

    // ---------------------------------------------------------- validation

    #[test]
    fn sweep_validates_inputs() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        assert!(matches!(
            das_sweep(&h_i, &h_f, &[], 10),
            Err(Error::EmptyModel { .. })
        ));
        assert!(matches!(
            das_sweep(&h_i, &h_f, &[1.0, 1.0], 10),
            Err(Error::BadParam { key: "t_grid", .. })
        ));
        assert!(matches!(
            das_sweep(&h_i, &h_f, &[-1.0, 1.0], 10),
            Err(Error::NonPositive { .. })
        ));
        assert!(matches!(
            das_sweep(&h_i, &h_f, &[1.0], 0),
            Err(Error::NonPositive { .. })
        ));
        let (h3, _) = tfim_pair(3).unwrap();
        assert!(matches!(
            das_sweep(&h3, &h_f, &[1.0], 10),
            Err(Error::SiteCountMismatch { .. })
        ));
    }

    #[test]
    fn summary_finds_the_first_minimum() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        // Dense grid so a clear interior minimum exists: short sweeps are
        // diabatic, very long ones accumulate step error.
        let grid: Vec<f64> = (1..=30).map(|k| k as f64 * 4.0).collect();
        let sweep = das_sweep(&h_i, &h_f, &grid, 40).unwrap();
        let min = sweep
            .records
            .iter()
            .map(|r| r.eps_tot_d)
            .fold(f64::INFINITY, f64::min);
        let at_turning = sweep
            .records
            .iter()
            .find(|r| r.total_time == sweep.turning_point_t)
            .unwrap();
        assert_eq!(at_turning.eps_tot_d, min);
        assert_eq!(sweep.prefix_len, sweep.records.iter()
            .filter(|r| r.total_time <= sweep.turning_point_t).count());
    }

    fn max_entry_diff(a: &DenseOperator, b: &DenseOperator) -> f64 {
        (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0f64, f64::max)
    }

    #[test]
    fn discretized_constant_path_is_one_exponential() {
        let h = single_term_model(2, -1.0, "ZZ");
        let dense = build_dense(&h).unwrap().total;
        let a_d = discretized_evolution(&h, &h, 3.7, 7).unwrap();
        let exact = evolve_unitary(&dense, 3.7).unwrap();
        assert!(max_entry_diff(&a_d, &exact) <= 1e-10);
    }

    #[test]
    fn single_step_schedules_land_on_the_far_endpoint() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        let hf = build_dense(&h_f).unwrap().total;
        let exact = evolve_unitary(&hf, 0.8).unwrap();
        let a_d = discretized_evolution(&h_i, &h_f, 0.8, 1).unwrap();
        let a_t = trotterized_evolution(&h_i, &h_f, 0.8, 1).unwrap();
        assert!(max_entry_diff(&a_d, &exact) <= 1e-12);
        assert!(max_entry_diff(&a_t, &exact) <= 1e-12);
    }

    #[test]
    fn split_equals_discretized_for_commuting_endpoints() {
        let h_i = single_term_model(1, 1.0, "X");
        let h_f = single_term_model(1, -0.7, "X");
        let a_d = discretized_evolution(&h_i, &h_f, 2.0, 12).unwrap();
        let a_t = trotterized_evolution(&h_i, &h_f, 2.0, 12).unwrap();
        assert!(max_entry_diff(&a_d, &a_t) <= 1e-12);
    }

    #[test]
    fn schedule_propagators_are_unitary_and_match_the_record_walkers() {
        let (h_i, h_f) = tfim_pair(3).unwrap();
        let a_d = discretized_evolution(&h_i, &h_f, 5.0, 50).unwrap();
        let a_t = trotterized_evolution(&h_i, &h_f, 5.0, 50).unwrap();
        assert!(a_d.unitarity_residual() <= 1e-10);
        assert!(a_t.unitarity_residual() <= 1e-10);

        // Applying the propagators to the starting ground state must agree
        // with the lockstep walkers behind das_errors: the sine distance of
        // the operator-propagated pair reproduces the recorded step error.
        let hi = build_dense(&h_i).unwrap().total;
        let start = hermitian_eig(&hi).unwrap().eigenvector(0).unwrap();
        let via_d = a_d.apply(&start).unwrap();
        let via_t = a_t.apply(&start).unwrap();
        let overlap = state_overlap(&via_d, &via_t).unwrap();
        let eps_tro = (1.0 - overlap.norm_sqr()).max(0.0).sqrt();
        let record = das_errors(&h_i, &h_f, 5.0, 50).unwrap();
        assert!((eps_tro - record.eps_tro).abs() <= 1e-9);
    }

    #[test]
    fn schedule_propagators_reject_bad_inputs() {
        let (h_i, h_f) = tfim_pair(2).unwrap();
        assert!(matches!(
            discretized_evolution(&h_i, &h_f, 1.0, 0),
            Err(Error::NonPositive { .. })
        ));
        assert!(matches!(
            trotterized_evolution(&h_i, &h_f, 0.0, 5),
            Err(Error::NonPositive { .. })
        ));
        let (h3, _) = tfim_pair(3).unwrap();
        assert!(matches!(
            discretized_evolution(&h3, &h_f, 1.0, 5),
            Err(Error::SiteCountMismatch { .. })
        ));
    }
}
