//! Layered spin-chain Hamiltonians built from Pauli strings.
//!
//! A model is a list of *layers*; the sum of all layers is the target
//! Hamiltonian and each layer is exponentiated as a whole by one factor of
//! the product formula. **Stored layer order is application order**: layer 0
//! is the rightmost factor of the step unitary and acts on the state first.
//!
//! Layers built through [`Layer::new`] are verified to consist of pairwise
//! commuting terms (the usual construction, checked symbolically by Pauli
//! anticommutation counting). [`Layer::grouped`] skips that check for models
//! that deliberately bundle non-commuting terms into one exactly-
//! exponentiated block; nothing downstream depends on intra-layer
//! commutation because layer exponentials are always computed densely.
//!
//! Site 0 is the leftmost Kronecker factor (most-significant bit of the
//! computational-basis index), and `|0>` is spin-up (`Z|0> = +|0>`).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{commutator, operator_norm, C64, DenseOperator};

/// Sites above this cap refuse dense construction (`2^n` grows fast).
pub const DEFAULT_SITE_CAP: usize = 12;

// ---------------------------------------------------------------------------
// Pauli letters and terms
// ---------------------------------------------------------------------------

/// Single-site Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Parse one letter (case-sensitive, `I/X/Y/Z`).
    pub fn from_char(c: char, position: usize) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::BadPauliLetter { letter: c, position }),
        }
    }

    /// The letter for display.
    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn flips_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// A weighted Pauli string `coefficient * P_0 (x) P_1 (x) ... (x) P_{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    coefficient: f64,
    letters: Vec<Pauli>,
}

impl PauliTerm {
    /// Builds a term from a letter string such as `"XIZ"`.
    pub fn parse(coefficient: f64, letters: &str) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyPauliString);
        }
        let parsed: Result<Vec<Pauli>> = letters
            .chars()
            .enumerate()
            .map(|(i, c)| Pauli::from_char(c, i))
            .collect();
        Self::new(coefficient, parsed?)
    }

    /// Builds a term from explicit letters.
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyPauliString);
        }
        if !coefficient.is_finite() {
            let term: String = letters.iter().map(|p| p.to_char()).collect();
            return Err(Error::BadCoefficient { value: coefficient, term });
        }
        Ok(Self { coefficient, letters })
    }

    /// A term acting with `p` on `site` of an `n_sites` chain (identity
    /// elsewhere).
    pub fn single(n_sites: usize, site: usize, p: Pauli, coefficient: f64) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::IndexOutOfRange { index: site, dim: n_sites });
        }
        let mut letters = vec![Pauli::I; n_sites];
        letters[site] = p;
        Self::new(coefficient, letters)
    }

    /// A two-site term on `site` and `site + 1`.
    pub fn bond(
        n_sites: usize,
        site: usize,
        p_left: Pauli,
        p_right: Pauli,
        coefficient: f64,
    ) -> Result<Self> {
        if site + 1 >= n_sites {
            return Err(Error::IndexOutOfRange { index: site + 1, dim: n_sites });
        }
        let mut letters = vec![Pauli::I; n_sites];
        letters[site] = p_left;
        letters[site + 1] = p_right;
        Self::new(coefficient, letters)
    }

    /// The scalar weight.
    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    /// The per-site letters (length = number of sites).
    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Number of sites the string is written over.
    pub fn n_sites(&self) -> usize {
        self.letters.len()
    }

    /// Whether any letter is `Y` (the only letter with imaginary entries).
    pub fn uses_y(&self) -> bool {
        self.letters.iter().any(|p| matches!(p, Pauli::Y))
    }

    /// Symbolic commutation: two Pauli strings commute iff the number of
    /// sites where both act non-trivially with different letters is even.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let clashes = self
            .letters
            .iter()
            .zip(other.letters.iter())
            .filter(|(a, b)| {
                !matches!(a, Pauli::I) && !matches!(b, Pauli::I) && a != b
            })
            .count();
        clashes % 2 == 0
    }

    /// Dense matrix of the term alone.
    pub fn dense(&self) -> Result<DenseOperator> {
        let n = self.n_sites();
        let dim = 1usize << n;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        self.accumulate_dense(&mut m);
        DenseOperator::new(m)
    }

    /// Adds the term's matrix into `into`. Pauli strings have one nonzero
    /// per column, so this is O(dim) rather than O(dim^2).
    fn accumulate_dense(&self, into: &mut DMatrix<C64>) {
        let n = self.n_sites();
        let dim = 1usize << n;
        debug_assert_eq!(into.nrows(), dim);
        let mut flip_mask = 0usize;
        for (s, p) in self.letters.iter().enumerate() {
            if p.flips_bit() {
                flip_mask |= 1 << (n - 1 - s);
            }
        }
        for col in 0..dim {
            let mut val = C64::new(self.coefficient, 0.0);
            for (s, p) in self.letters.iter().enumerate() {
                let bit = (col >> (n - 1 - s)) & 1;
                match p {
                    Pauli::I | Pauli::X => {}
                    Pauli::Z => {
                        if bit == 1 {
                            val = -val;
                        }
                    }
                    Pauli::Y => {
                        // Y|0> = i|1>,  Y|1> = -i|0>.
                        val *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                    }
                }
            }
            let row = col ^ flip_mask;
            into[(row, col)] += val;
        }
    }
}

impl std::fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let letters: String = self.letters.iter().map(|p| p.to_char()).collect();
        write!(f, "{:+}*{}", self.coefficient, letters)
    }
}

// ---------------------------------------------------------------------------
// Layers and layered models
// ---------------------------------------------------------------------------

/// One factor of the product formula: a set of terms exponentiated together.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    terms: Vec<PauliTerm>,
}

impl Layer {
    /// Builds a layer, verifying that all terms pairwise commute.
    pub fn new(terms: Vec<PauliTerm>) -> Result<Self> {
        let layer = Self::grouped(terms)?;
        layer.verify_commuting()?;
        Ok(layer)
    }

    /// Builds a layer without the commutation check, for models that bundle
    /// non-commuting terms into one exactly-exponentiated block.
    pub fn grouped(terms: Vec<PauliTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyModel { what: "layer with zero terms" });
        }
        let n = terms[0].n_sites();
        for t in &terms {
            if t.n_sites() != n {
                return Err(Error::SiteCountMismatch { expected: n, found: t.n_sites() });
            }
        }
        Ok(Self { terms })
    }

    /// Checks pairwise symbolic commutation of all terms.
    pub fn verify_commuting(&self) -> Result<()> {
        for (i, a) in self.terms.iter().enumerate() {
            for b in self.terms.iter().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(Error::NonCommutingLayer {
                        first: a.to_string(),
                        second: b.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The terms in this layer.
    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Number of sites.
    pub fn n_sites(&self) -> usize {
        self.terms[0].n_sites()
    }

    /// Dense matrix of the layer (sum of its terms).
    pub fn dense(&self) -> Result<DenseOperator> {
        let dim = 1usize << self.n_sites();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for t in &self.terms {
            t.accumulate_dense(&mut m);
        }
        DenseOperator::new(m)
    }
}

/// A layered Hamiltonian `H = sum of layers`, with stored order = application
/// order of the product formula.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredHamiltonian {
    n_sites: usize,
    layers: Vec<Layer>,
    complex_allowed: bool,
}

impl LayeredHamiltonian {
    /// Assembles a model from layers, validating site-count consistency.
    pub fn new(n_sites: usize, layers: Vec<Layer>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::EmptyModel { what: "zero sites" });
        }
        if layers.is_empty() {
            return Err(Error::EmptyModel { what: "zero layers" });
        }
        for layer in &layers {
            if layer.n_sites() != n_sites {
                return Err(Error::SiteCountMismatch {
                    expected: n_sites,
                    found: layer.n_sites(),
                });
            }
        }
        let complex_allowed = layers
            .iter()
            .any(|l| l.terms().iter().any(PauliTerm::uses_y));
        Ok(Self { n_sites, layers, complex_allowed })
    }

    /// Number of sites.
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    /// The layers in application order.
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Whether any term uses `Y` (the model may have complex entries).
    pub fn complex_allowed(&self) -> bool {
        self.complex_allowed
    }

    /// Concatenates two models over the same sites; `self`'s layers keep
    /// acting first.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(Error::SiteCountMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Self::new(self.n_sites, layers)
    }
}

/// Dense form of a layered model: the total and each layer separately.
#[derive(Clone, Debug)]
pub struct DenseModel {
    /// Sum of all layers.
    pub total: DenseOperator,
    /// One dense operator per layer, in application order.
    pub layers: Vec<DenseOperator>,
}

/// Builds dense matrices for a layered model (site cap [`DEFAULT_SITE_CAP`]).
pub fn build_dense(h: &LayeredHamiltonian) -> Result<DenseModel> {
    build_dense_with_cap(h, DEFAULT_SITE_CAP)
}

/// As [`build_dense`] with an explicit site cap.
pub fn build_dense_with_cap(h: &LayeredHamiltonian, cap: usize) -> Result<DenseModel> {
    if h.n_sites() > cap {
        return Err(Error::TooManySites { n_sites: h.n_sites(), cap });
    }
    let dim = h.dim();
    let mut layers = Vec::with_capacity(h.layers().len());
    let mut total = DMatrix::<C64>::zeros(dim, dim);
    for layer in h.layers() {
        let d = layer.dense()?;
        total += d.matrix();
        layers.push(d);
    }
    Ok(DenseModel { total: DenseOperator::new(total)?, layers })
}

// ---------------------------------------------------------------------------
// Model builders
// ---------------------------------------------------------------------------

/// Transverse-field Ising pair on an open chain:
/// `H_i = -sum_j X_j` (one layer) and
/// `H_f = -sum_j Z_j - sum_j Z_j Z_{j+1}` (one layer).
pub fn tfim_pair(n_sites: usize) -> Result<(LayeredHamiltonian, LayeredHamiltonian)> {
    if n_sites == 0 {
        return Err(Error::EmptyModel { what: "zero sites" });
    }
    let mut x_terms = Vec::with_capacity(n_sites);
    for j in 0..n_sites {
        x_terms.push(PauliTerm::single(n_sites, j, Pauli::X, -1.0)?);
    }
    let mut z_terms = Vec::with_capacity(2 * n_sites - 1);
    for j in 0..n_sites {
        z_terms.push(PauliTerm::single(n_sites, j, Pauli::Z, -1.0)?);
    }
    for j in 0..n_sites.saturating_sub(1) {
        z_terms.push(PauliTerm::bond(n_sites, j, Pauli::Z, Pauli::Z, -1.0)?);
    }
    let h_i = LayeredHamiltonian::new(n_sites, vec![Layer::new(x_terms)?])?;
    let h_f = LayeredHamiltonian::new(n_sites, vec![Layer::new(z_terms)?])?;
    Ok((h_i, h_f))
}

/// The full transverse-field Ising chain as a two-layer model
/// (X layer applied first, then the Z layer).
pub fn tfim(n_sites: usize) -> Result<LayeredHamiltonian> {
    let (h_i, h_f) = tfim_pair(n_sites)?;
    h_i.concat(&h_f)
}

/// The same chain regrouped into overlapping nearest-neighbor blocks:
/// block `j` carries `-X_j - Z_j - Z_j Z_{j+1}` (the last block also takes
/// the final site's field terms). Blocks at distance >= 2 act on disjoint
/// sites, so the layer sequence is totally ordered: `[L_l, L_m] = 0`
/// whenever `|l - m| > 1`. Blocks are internally non-commuting, hence
/// grouped layers.
pub fn tfim_nn_blocks(n_sites: usize) -> Result<LayeredHamiltonian> {
    if n_sites < 2 {
        return Err(Error::TooFewSites { what: "blocked chain", min: 2, n: n_sites });
    }
    let mut layers = Vec::with_capacity(n_sites - 1);
    for j in 0..n_sites - 1 {
        let mut terms = vec![
            PauliTerm::single(n_sites, j, Pauli::X, -1.0)?,
            PauliTerm::single(n_sites, j, Pauli::Z, -1.0)?,
            PauliTerm::bond(n_sites, j, Pauli::Z, Pauli::Z, -1.0)?,
        ];
        if j == n_sites - 2 {
            terms.push(PauliTerm::single(n_sites, j + 1, Pauli::X, -1.0)?);
            terms.push(PauliTerm::single(n_sites, j + 1, Pauli::Z, -1.0)?);
        }
        layers.push(Layer::grouped(terms)?);
    }
    LayeredHamiltonian::new(n_sites, layers)
}

/// Ferromagnetic Heisenberg chain written as a sum of bond projectors,
/// `H = sum_j (I - SWAP_{j,j+1}) / 2`, split into even-bond and odd-bond
/// layers. Every bond projector annihilates the all-up product state, so the
/// model is frustration-free with `|0...0>` an exact zero-energy ground
/// state of every layer.
pub fn heisenberg_ff(n_sites: usize) -> Result<LayeredHamiltonian> {
    if n_sites < 2 {
        return Err(Error::TooFewSites { what: "heisenberg chain", min: 2, n: n_sites });
    }
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for j in 0..n_sites - 1 {
        let bucket = if j % 2 == 0 { &mut even } else { &mut odd };
        // (I - SWAP)/2 = (II - XX - YY - ZZ)/4 on the bond.
        bucket.push(PauliTerm::new(0.25, vec![Pauli::I; n_sites])?);
        bucket.push(PauliTerm::bond(n_sites, j, Pauli::X, Pauli::X, -0.25)?);
        bucket.push(PauliTerm::bond(n_sites, j, Pauli::Y, Pauli::Y, -0.25)?);
        bucket.push(PauliTerm::bond(n_sites, j, Pauli::Z, Pauli::Z, -0.25)?);
    }
    let mut layers = vec![Layer::new(even)?];
    if !odd.is_empty() {
        layers.push(Layer::new(odd)?);
    }
    LayeredHamiltonian::new(n_sites, layers)
}

/// Dense bond projector `(I - SWAP_{j,j+1}) / 2` of the Heisenberg chain.
pub fn heisenberg_bond_projector(n_sites: usize, bond: usize) -> Result<DenseOperator> {
    if n_sites < 2 {
        return Err(Error::TooFewSites { what: "heisenberg chain", min: 2, n: n_sites });
    }
    if bond + 1 >= n_sites {
        return Err(Error::IndexOutOfRange { index: bond, dim: n_sites - 1 });
    }
    let dim = 1usize << n_sites;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    PauliTerm::new(0.25, vec![Pauli::I; n_sites])?.accumulate_dense(&mut m);
    PauliTerm::bond(n_sites, bond, Pauli::X, Pauli::X, -0.25)?.accumulate_dense(&mut m);
    PauliTerm::bond(n_sites, bond, Pauli::Y, Pauli::Y, -0.25)?.accumulate_dense(&mut m);
    PauliTerm::bond(n_sites, bond, Pauli::Z, Pauli::Z, -0.25)?.accumulate_dense(&mut m);
    DenseOperator::new(m)
}

/// Default diagonal for [`counterexample_model`].
pub const COUNTEREXAMPLE_DIAG: [f64; 4] = [0.7, -0.3, 1.9, -1.1];

/// Two-qubit three-layer model whose first-order perturbation has a
/// *diagonal* component, breaking the second-order energy-shift behavior:
/// layers `X (x) I`, `Y (x) I`, and `Lambda - X(x)I - Y(x)I` with `Lambda`
/// the given nondegenerate diagonal. The total is exactly `Lambda`.
pub fn counterexample_model(diag: &[f64; 4]) -> Result<LayeredHamiltonian> {
    const TOL: f64 = 1e-9;
    for i in 0..4 {
        if !diag[i].is_finite() {
            return Err(Error::NonFinite { context: "diagonal values" });
        }
        for j in i + 1..4 {
            if (diag[i] - diag[j]).abs() <= TOL {
                return Err(Error::DegenerateDiagonal { a: diag[i], b: diag[j], tolerance: TOL });
            }
        }
    }
    let x1 = PauliTerm::parse(1.0, "XI")?;
    let y1 = PauliTerm::parse(1.0, "YI")?;
    // Lambda = a II + b ZI + c IZ + e ZZ (Walsh-Hadamard of the diagonal).
    let [d0, d1, d2, d3] = *diag;
    let a = 0.25 * (d0 + d1 + d2 + d3);
    let b = 0.25 * (d0 + d1 - d2 - d3);
    let c = 0.25 * (d0 - d1 + d2 - d3);
    let e = 0.25 * (d0 - d1 - d2 + d3);
    let mut third = vec![
        PauliTerm::parse(a, "II")?,
        PauliTerm::parse(b, "ZI")?,
        PauliTerm::parse(c, "IZ")?,
        PauliTerm::parse(e, "ZZ")?,
        PauliTerm::parse(-1.0, "XI")?,
        PauliTerm::parse(-1.0, "YI")?,
    ];
    third.retain(|t| t.coefficient() != 0.0);
    LayeredHamiltonian::new(
        2,
        vec![
            Layer::new(vec![x1])?,
            Layer::new(vec![y1])?,
            Layer::grouped(third)?,
        ],
    )
}

/// Seeded random model with real matrix entries: terms drawn from the
/// patterns `X`, `Z`, `XX`, `ZZ`, `XZ` with coefficients uniform in [-1, 1],
/// split into commuting layers (all-X, all-Z, even-bond XZ, odd-bond XZ).
/// Identical seeds produce identical models on every platform.
pub fn random_real_local(n_sites: usize, seed: u64) -> Result<LayeredHamiltonian> {
    if n_sites == 0 {
        return Err(Error::EmptyModel { what: "zero sites" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..=1.0);

    let mut x_terms = Vec::new();
    let mut z_terms = Vec::new();
    let mut xz_even = Vec::new();
    let mut xz_odd = Vec::new();
    for j in 0..n_sites {
        x_terms.push(PauliTerm::single(n_sites, j, Pauli::X, draw(&mut rng))?);
        z_terms.push(PauliTerm::single(n_sites, j, Pauli::Z, draw(&mut rng))?);
    }
    for j in 0..n_sites.saturating_sub(1) {
        x_terms.push(PauliTerm::bond(n_sites, j, Pauli::X, Pauli::X, draw(&mut rng))?);
        z_terms.push(PauliTerm::bond(n_sites, j, Pauli::Z, Pauli::Z, draw(&mut rng))?);
        let t = PauliTerm::bond(n_sites, j, Pauli::X, Pauli::Z, draw(&mut rng))?;
        if j % 2 == 0 {
            xz_even.push(t);
        } else {
            xz_odd.push(t);
        }
    }
    let mut layers = vec![Layer::new(x_terms)?, Layer::new(z_terms)?];
    if !xz_even.is_empty() {
        layers.push(Layer::new(xz_even)?);
    }
    if !xz_odd.is_empty() {
        layers.push(Layer::new(xz_odd)?);
    }
    LayeredHamiltonian::new(n_sites, layers)
}

// ---------------------------------------------------------------------------
// Interaction constants
// ---------------------------------------------------------------------------

/// Commutator-norm constants of one model, plus pair constants against a
/// second model when supplied. All entries are spectral norms, hence
/// non-negative; `alpha` vanishes exactly when all layer pairs commute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionConstants {
    /// `sum_{n > m} |[H_n, H_m]|` over the first model's layers.
    pub alpha: f64,
    /// `sum_{l >= n > m} |[H_l, [H_n, H_m]]|` over the first model's layers.
    pub beta: f64,
    /// Spectral norm of the first model's total.
    pub norm_h: f64,
    /// `|a|` (same as `norm_h`; named for pair-formula readability).
    pub c0: f64,
    /// `|[a, b]|`; zero when no second model is supplied.
    pub c1: f64,
    /// `|[a, [a, b]]|`; zero when no second model is supplied.
    pub c2: f64,
    /// `|a - b|`; zero when no second model is supplied.
    pub d: f64,
}

/// Computes commutator-norm constants for `a` (and pair constants against
/// `b` when given). Dense construction obeys the default site cap.
pub fn interaction_constants(
    a: &LayeredHamiltonian,
    b: Option<&LayeredHamiltonian>,
) -> Result<InteractionConstants> {
    let dense_a = build_dense(a)?;
    let layers = &dense_a.layers;
    let g = layers.len();

    let mut alpha = 0.0f64;
    let mut beta = 0.0f64;
    for n in 1..g {
        for m in 0..n {
            let inner = commutator(&layers[n], &layers[m]);
            alpha += operator_norm(&inner)?;
            for layer_l in layers.iter().skip(n) {
                beta += operator_norm(&commutator(layer_l, &inner))?;
            }
        }
    }
    let norm_h = operator_norm(&dense_a.total)?;

    let (c1, c2, d) = match b {
        None => (0.0, 0.0, 0.0),
        Some(b) => {
            if b.n_sites() != a.n_sites() {
                return Err(Error::SiteCountMismatch {
                    expected: a.n_sites(),
                    found: b.n_sites(),
                });
            }
            let dense_b = build_dense(b)?;
            let ab = commutator(&dense_a.total, &dense_b.total);
            let c1 = operator_norm(&ab)?;
            let c2 = operator_norm(&commutator(&dense_a.total, &ab))?;
            let d = operator_norm(&(&dense_a.total - &dense_b.total))?;
            (c1, c2, d)
        }
    };

    Ok(InteractionConstants { alpha, beta, norm_h, c0: norm_h, c1, c2, d })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
