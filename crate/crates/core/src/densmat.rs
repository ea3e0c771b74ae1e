//! Dense complex matrices, pure and mixed qubit states.
//!
//! Qubit 0 is the leftmost tensor factor: the basis label `|b0 b1 … b(N-1)⟩`
//! maps to the row index `Σ b_i · 2^(N-1-i)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register accepted by the default constructors (4096 × 4096 matrices).
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Hermiticity and trace tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Tolerance for observables and the imaginary residue of expectation values.
pub const OBSERVABLE_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from complex rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(rows.len(), cols, data).expect("non-empty rows")
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_vec(rows.len(), cols, data).expect("non-empty rows")
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diagonal(entries: &[f64]) -> Self {
        let diag: Vec<_> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&diag)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diag().into_iter().sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims(
                format!("{} rows on the right", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::dims(self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `A · self · A†`
    pub fn conjugate_by(&self, a: &Self) -> Result<Self> {
        a.matmul(self)?.matmul(&a.adjoint())
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |m_ij − conj(m_ji)|`; infinite for non-square matrices.
    pub fn hermiticity_residue(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `‖M†M − 1‖_max`
    pub fn unitarity_residue(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let product = self.adjoint().matmul(self).expect("square");
        product.max_abs_diff(&Self::identity(self.rows))
    }

    /// Eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square(), "eigenvalues need a square matrix");
        let n = self.rows;
        let herm = DMatrix::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &Self, factor: Complex64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        let mut out = self.clone();
        out.add_assign_scaled(rhs, ONE);
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        let mut out = self.clone();
        out.add_assign_scaled(rhs, -ONE);
        out
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices and the 2×2 identity.
pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// Matrix for one of `I`, `X`, `Y`, `Z`.
    pub fn from_letter(letter: char) -> Option<ComplexMatrix> {
        match letter {
            'I' => Some(identity()),
            'X' => Some(x()),
            'Y' => Some(y()),
            'Z' => Some(z()),
            _ => None,
        }
    }

    /// Tensor product of the letters of a Pauli string, qubit 0 leftmost.
    pub fn string(label: &str) -> Option<ComplexMatrix> {
        let mut letters = label.chars();
        let first = from_letter(letters.next()?)?;
        letters.try_fold(first, |acc, c| Some(acc.kron(&from_letter(c)?)))
    }

    /// `r · σ` for a Cartesian vector `r`.
    pub fn dot(r: [f64; 3]) -> ComplexMatrix {
        let mut m = x().scale_real(r[0]);
        m.add_assign_scaled(&y(), Complex64::new(r[1], 0.0));
        m.add_assign_scaled(&z(), Complex64::new(r[2], 0.0));
        m
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_qubit_limit(num_qubits: usize, limit: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::InvalidArgument("at least one qubit is required".into()));
    }
    if num_qubits > limit {
        return Err(Error::InvalidArgument(format!(
            "{num_qubits} qubits exceeds the configured limit of {limit}"
        )));
    }
    Ok(())
}

/// Normalized state vector over `N` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_qubit_limit(amplitudes, DEFAULT_MAX_QUBITS)
    }

    pub fn with_qubit_limit(amplitudes: Vec<Complex64>, limit: usize) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        check_qubit_limit(num_qubits, limit)?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!(
                "state is not normalized: sum of |amplitude|^2 = {norm_sqr}"
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_limit(num_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self::new(amplitudes)
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Equal-weight superposition of every basis state.
    pub fn uniform(num_qubits: usize) -> Result<Self> {
        check_qubit_limit(num_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << num_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::new(vec![a; dim])
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`
    pub fn cat(num_qubits: usize) -> Result<Self> {
        check_qubit_limit(num_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << num_qubits;
        let mut amplitudes = vec![ZERO; dim];
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amplitudes[0] = a;
        amplitudes[dim - 1] = a;
        Self::new(amplitudes)
    }

    /// `(|01⟩ − |10⟩)/√2`
    pub fn singlet() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[0.0, a, -a, 0.0]).expect("normalized")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|ψ⟩⟨ψ|` as a raw matrix.
    pub fn projector(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (i, &a) in self.amplitudes.iter().enumerate() {
            for (j, &b) in self.amplitudes.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub hermiticity_residue: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

impl ValidityReport {
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residue <= STATE_TOL
    }

    pub fn has_unit_trace(&self) -> bool {
        self.trace_deviation <= STATE_TOL
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue >= PSD_TOL
    }
}

/// Hermitian, unit-trace, positive semidefinite `2^N × 2^N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_qubit_limit(matrix, DEFAULT_MAX_QUBITS)
    }

    pub fn with_qubit_limit(matrix: ComplexMatrix, limit: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims("square matrix", format!("{}x{}", matrix.rows(), matrix.cols())));
        }
        let num_qubits = qubits_for_dim(matrix.rows())?;
        check_qubit_limit(num_qubits, limit)?;
        let report = validate_matrix(&matrix);
        if !report.passed {
            return Err(Error::Validation(format!(
                "not a density matrix: hermiticity residue {:e}, trace deviation {:e}, min eigenvalue {:e}",
                report.hermiticity_residue, report.trace_deviation, report.min_eigenvalue
            )));
        }
        Ok(Self { num_qubits, matrix })
    }

    /// Wraps a matrix without the eigenvalue check. Callers guarantee the
    /// matrix came out of a trace-preserving, positivity-preserving map.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square() && matrix.rows().is_power_of_two());
        let num_qubits = matrix.rows().trailing_zeros() as usize;
        Self { num_qubits, matrix }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_qubit_limit(num_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << num_qubits;
        Ok(Self::from_trusted(
            ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        ))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ.
        self.matrix.frobenius_norm().powi(2)
    }

    /// `U ρ U†`; the caller supplies a unitary of matching dimension.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<Self> {
        if unitary.rows() != self.dim() || !unitary.is_square() {
            return Err(Error::dims(
                format!("{0}x{0} unitary", self.dim()),
                format!("{}x{}", unitary.rows(), unitary.cols()),
            ));
        }
        Ok(Self::from_trusted(self.matrix.conjugate_by(unitary)?))
    }

    /// Population of each computational basis state.
    pub fn diagonal_real(&self) -> Vec<f64> {
        self.matrix.diag().into_iter().map(|z| z.re).collect()
    }
}

/// `|ψ⟩⟨ψ|`
pub fn pure_to_density(psi: &PureState) -> DensityMatrix {
    DensityMatrix::from_trusted(psi.projector())
}

/// Kronecker product.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Tensor product of a sequence of matrices, first element leftmost.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut iter = factors.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, m| acc.kron(m)))
}

/// `Tr(ρ · obs)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, obs: &ComplexMatrix) -> Result<f64> {
    if obs.rows() != rho.dim() || obs.cols() != rho.dim() {
        return Err(Error::dims(
            format!("{0}x{0}", rho.dim()),
            format!("{}x{}", obs.rows(), obs.cols()),
        ));
    }
    let residue = obs.hermiticity_residue();
    if residue > OBSERVABLE_TOL {
        return Err(Error::Validation(format!(
            "observable is not Hermitian (residue {residue:e})"
        )));
    }
    let n = rho.dim();
    let m = rho.matrix();
    let mut tr = ZERO;
    for i in 0..n {
        for k in 0..n {
            tr += m[(i, k)] * obs[(k, i)];
        }
    }
    if tr.im.abs() > OBSERVABLE_TOL {
        return Err(Error::Invariant(format!(
            "expectation value has imaginary part {:e}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// Reduced state on the `keep` qubits, kept in ascending index order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace needs at least one kept qubit".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            num_qubits: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let bit = |q: usize| 1usize << (n - 1 - q);
    // Scatter the bits of a compact index onto the listed qubit positions.
    let spread = |compact: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(pos, _)| compact & (1 << (k - 1 - pos)) != 0)
            .map(|(_, &q)| bit(q))
            .sum()
    };

    let dim_keep = 1usize << kept.len();
    let dim_trace = 1usize << traced.len();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(dim_keep, dim_keep);
    for i in 0..dim_keep {
        let row = spread(i, &kept);
        for j in 0..dim_keep {
            let col = spread(j, &kept);
            let mut acc = ZERO;
            for t in 0..dim_trace {
                let offset = spread(t, &traced);
                acc += m[(row | offset, col | offset)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

fn validate_matrix(m: &ComplexMatrix) -> ValidityReport {
    let hermiticity_residue = m.hermiticity_residue();
    if !m.is_square() {
        return ValidityReport {
            hermiticity_residue,
            trace_deviation: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            passed: false,
        };
    }
    let tr = m.trace();
    let trace_deviation = (tr - ONE).norm();
    let min_eigenvalue = m
        .hermitian_eigenvalues()
        .first()
        .copied()
        .unwrap_or(f64::NEG_INFINITY);
    let passed = hermiticity_residue <= STATE_TOL
        && trace_deviation <= STATE_TOL
        && min_eigenvalue >= PSD_TOL;
    ValidityReport {
        hermiticity_residue,
        trace_deviation,
        min_eigenvalue,
        passed,
    }
}

/// Report-only check of the density-matrix invariants on any square matrix.
pub fn validate(m: &ComplexMatrix) -> ValidityReport {
    validate_matrix(m)
}
