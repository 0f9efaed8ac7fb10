//! Self-contained brute-force numerics used to cross-check the library:
//! naive O(n^3) loops, Taylor exponentials, power iteration, and a cyclic
//! Jacobi eigensolver. Nothing here calls into the crate under test — the
//! only import is the complex scalar type, so every result is produced by
//! an independent computation.

use trotterlab::linalg::C64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<C64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { n, a: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len());
        for (i, &x) in values.iter().enumerate() {
            m.set(i, i, C64::new(x, 0.0));
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.n + j] = v;
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let mut out = Mat::zeros(self.n);
        for k in 0..self.a.len() {
            out.a[k] = self.a[k] + other.a[k];
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let mut out = Mat::zeros(self.n);
        for k in 0..self.a.len() {
            out.a[k] = self.a[k] - other.a[k];
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Mat {
        let mut out = Mat::zeros(self.n);
        for k in 0..self.a.len() {
            out.a[k] = self.a[k] * factor;
        }
        out
    }

    /// Naive triple-loop product.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Naive Kronecker product.
    pub fn kron(&self, other: &Mat) -> Mat {
        let (p, q) = (self.n, other.n);
        let mut out = Mat::zeros(p * q);
        for i in 0..p {
            for j in 0..p {
                let s = self.get(i, j);
                for k in 0..q {
                    for l in 0..q {
                        out.set(i * q + k, j * q + l, s * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Mat {
        let mut out = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.n {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        self.sub(other).max_abs()
    }
}

// ---------------------------------------------------------------------------
// Pauli constructions
// ---------------------------------------------------------------------------

/// One of the four 2x2 Pauli matrices by letter.
pub fn pauli(letter: char) -> Mat {
    let mut m = Mat::zeros(2);
    match letter {
        'I' => {
            m.set(0, 0, C64::new(1.0, 0.0));
            m.set(1, 1, C64::new(1.0, 0.0));
        }
        'X' => {
            m.set(0, 1, C64::new(1.0, 0.0));
            m.set(1, 0, C64::new(1.0, 0.0));
        }
        'Y' => {
            m.set(0, 1, C64::new(0.0, -1.0));
            m.set(1, 0, C64::new(0.0, 1.0));
        }
        'Z' => {
            m.set(0, 0, C64::new(1.0, 0.0));
            m.set(1, 1, C64::new(-1.0, 0.0));
        }
        other => panic!("not a Pauli letter: {other}"),
    }
    m
}

/// `coefficient * P_0 (x) ... (x) P_{n-1}` by folding the naive Kronecker
/// product left to right.
pub fn pauli_string(coefficient: f64, letters: &str) -> Mat {
    let mut it = letters.chars();
    let first = it.next().expect("nonempty letter string");
    let mut m = pauli(first);
    for c in it {
        m = m.kron(&pauli(c));
    }
    m.scale(C64::new(coefficient, 0.0))
}

/// Sum of weighted Pauli strings.
pub fn pauli_sum(terms: &[(f64, &str)]) -> Mat {
    let n = terms.first().expect("nonempty term list").1.len();
    let mut total = Mat::zeros(1 << n);
    for &(coefficient, letters) in terms {
        total = total.add(&pauli_string(coefficient, letters));
    }
    total
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

/// `exp(factor * m)` by scaling-and-squaring around a plain Taylor series.
pub fn expm(m: &Mat, factor: C64) -> Mat {
    let scaled = m.scale(factor);
    // Halve until the norm proxy is comfortably inside the Taylor radius.
    let mut squarings = 0u32;
    let mut shrink = 1.0f64;
    while scaled.max_abs() * (m.n as f64) * shrink > 0.25 && squarings < 60 {
        squarings += 1;
        shrink *= 0.5;
    }
    let base = scaled.scale(C64::new(shrink, 0.0));
    let mut sum = Mat::identity(m.n);
    let mut term = Mat::identity(m.n);
    for k in 1..80 {
        term = term.matmul(&base).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
        if term.max_abs() < 1e-22 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

// ---------------------------------------------------------------------------
// Operator norm by power iteration
// ---------------------------------------------------------------------------

/// Largest singular value via power iteration on `m^dagger m`, run from
/// three fixed starting vectors to dodge unlucky orthogonal starts.
pub fn op_norm(m: &Mat) -> f64 {
    let gram = m.dagger().matmul(m);
    let n = m.n;
    let starts: [Box<dyn Fn(usize) -> C64>; 3] = [
        Box::new(|_| C64::new(1.0, 0.0)),
        Box::new(|i| C64::new(1.0 + i as f64, (i % 3) as f64 - 1.0)),
        Box::new(|i| {
            // Tiny deterministic linear-congruential scramble.
            let r = (1_103_515_245u64.wrapping_mul(i as u64 + 7) + 12_345) % 1000;
            C64::new(r as f64 / 1000.0 + 0.1, ((r * 7) % 1000) as f64 / 1000.0 - 0.5)
        }),
    ];
    let mut best = 0.0f64;
    for start in &starts {
        let mut v: Vec<C64> = (0..n).map(start).collect();
        let mut lambda = 0.0f64;
        for _ in 0..2000 {
            let w = gram.matvec(&v);
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            let next: Vec<C64> = w.iter().map(|z| z / norm).collect();
            let rayleigh = gram
                .matvec(&next)
                .iter()
                .zip(&next)
                .map(|(a, b)| (b.conj() * a).re)
                .sum::<f64>();
            let done = (rayleigh - lambda).abs() <= 1e-15 * rayleigh.abs().max(1.0);
            lambda = rayleigh;
            v = next;
            if done {
                break;
            }
        }
        best = best.max(lambda);
    }
    best.max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Real-symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) and matching eigenvector columns of a real
/// symmetric matrix, by cyclic Jacobi rotations.
pub fn jacobi_eig(sym: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = sym.len();
    let mut a: Vec<Vec<f64>> = sym.to_vec();
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "square input");
        for j in 0..n {
            assert!(
                (row[j] - sym[j][i]).abs() <= 1e-12 * (1.0 + row[j].abs()),
                "symmetric input"
            );
        }
    }
    // v[i][j]: i-th component of the j-th eigenvector.
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    // Run to the numerical floor: every rotation shrinks the off-diagonal
    // Frobenius norm, so stop only when it is zero or has stopped improving.
    // Eigenvector quality is then limited by machine precision rather than
    // an arbitrary threshold.
    let mut prev_off = f64::INFINITY;
    for _sweep in 0..300 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off == 0.0 || off >= prev_off {
            break;
        }
        prev_off = off;
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                // Rotation angle from tan(2 phi) = 2 a_pq / (a_pp - a_qq).
                let phi = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
                let (s, c) = phi.sin_cos();
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp + s * akq;
                    a[k][q] = -s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk + s * aqk;
                    a[q][k] = -s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp + s * vq;
                    row[q] = -s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let eigenvectors: Vec<Vec<f64>> =
        order.iter().map(|&j| (0..n).map(|i| v[i][j]).collect()).collect();
    (eigenvalues, eigenvectors)
}

/// Eigenvalues of a complex Hermitian matrix through the real embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is the Hermitian spectrum with
/// every eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    let n = m.n;
    let mut embedded = vec![vec![0.0f64; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            embedded[i][j] = z.re;
            embedded[i][j + n] = -z.im;
            embedded[i + n][j] = z.im;
            embedded[i + n][j + n] = z.re;
        }
    }
    let (doubled, _) = jacobi_eig(&embedded);
    // Every eigenvalue appears exactly twice; keep the even positions.
    doubled.into_iter().step_by(2).collect()
}

// ---------------------------------------------------------------------------
// Small helpers on state vectors
// ---------------------------------------------------------------------------

pub fn vec_overlap(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Least-squares slope/intercept of `y = slope * x + intercept` by the
/// normal equations.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}
