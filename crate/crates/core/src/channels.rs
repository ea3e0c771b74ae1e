//! Gates and Kraus channels.
//!
//! Rotations follow `R_a(α) = exp(−i α σ_a / 2)`. Relaxation is amplitude
//! damping toward `|0⟩` followed by the extra phase damping needed to reach
//! the requested transverse decay.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::densmat::{pauli, ComplexMatrix, DensityMatrix, ONE};
use crate::error::{Error, Result};

/// Completeness tolerance `‖Σ E_k†E_k − 1‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub axis: Axis,
    /// Radians.
    pub angle: f64,
}

impl Rotation {
    pub fn new(axis: Axis, angle: f64) -> Self {
        Self { axis, angle }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        rotation_matrix(*self)
    }
}

/// `exp(−i·angle·σ_axis/2)`
pub fn rotation_matrix(rot: Rotation) -> ComplexMatrix {
    let (s, c) = (rot.angle / 2.0).sin_cos();
    let cc = Complex64::new(c, 0.0);
    match rot.axis {
        Axis::X => {
            let m = Complex64::new(0.0, -s);
            ComplexMatrix::from_rows(&[&[cc, m], &[m, cc]])
        }
        Axis::Y => ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]),
        Axis::Z => ComplexMatrix::diagonal(&[Complex64::new(c, -s), Complex64::new(c, s)]),
    }
}

/// `U = R_y(−θ)·R_z(−φ)`, which satisfies `U† σ_z U = r·σ` for
/// `r = (cos φ sin θ, sin φ sin θ, cos θ)`.
pub fn direction_unitary(theta: f64, phi: f64) -> ComplexMatrix {
    let ry = rotation_matrix(Rotation::new(Axis::Y, -theta));
    let rz = rotation_matrix(Rotation::new(Axis::Z, -phi));
    &ry * &rz
}

/// Lifts a 2×2 gate onto `qubit` of an `n`-qubit register.
pub fn embed_single(gate: &ComplexMatrix, qubit: usize, n: usize) -> Result<ComplexMatrix> {
    check_gate(gate)?;
    if qubit >= n {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits: n,
        });
    }
    let left = ComplexMatrix::identity(1 << qubit);
    let right = ComplexMatrix::identity(1 << (n - 1 - qubit));
    Ok(left.kron(gate).kron(&right))
}

/// Applies `gate` to `target` when `control` is `|1⟩`.
pub fn controlled(gate: &ComplexMatrix, control: usize, target: usize, n: usize) -> Result<ComplexMatrix> {
    check_gate(gate)?;
    for q in [control, target] {
        if q >= n {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: n,
            });
        }
    }
    if control == target {
        return Err(Error::InvalidArgument(format!(
            "control and target are both qubit {control}"
        )));
    }
    let dim = 1usize << n;
    let cbit = 1usize << (n - 1 - control);
    let tbit = 1usize << (n - 1 - target);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        if col & cbit == 0 {
            out[(col, col)] = ONE;
            continue;
        }
        let t_in = usize::from(col & tbit != 0);
        let base = col & !tbit;
        for t_out in 0..2 {
            out[(base | (t_out * tbit), col)] = gate[(t_out, t_in)];
        }
    }
    Ok(out)
}

pub fn cnot(control: usize, target: usize, n: usize) -> Result<ComplexMatrix> {
    controlled(&pauli::x(), control, target, n)
}

fn check_gate(gate: &ComplexMatrix) -> Result<()> {
    if gate.rows() != 2 || gate.cols() != 2 {
        return Err(Error::dims("2x2 gate", format!("{}x{}", gate.rows(), gate.cols())));
    }
    Ok(())
}

/// `G ρ G†` with `G` acting on a single qubit, without building the full operator.
pub(crate) fn conjugate_local(m: &ComplexMatrix, gate: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
    let dim = m.rows();
    let bit = 1usize << (n - 1 - qubit);
    let (g00, g01, g10, g11) = (gate[(0, 0)], gate[(0, 1)], gate[(1, 0)], gate[(1, 1)]);
    let mut out = m.clone();
    // Rows: G · M
    for i0 in (0..dim).filter(|i| i & bit == 0) {
        let i1 = i0 | bit;
        for j in 0..dim {
            let (a, b) = (m[(i0, j)], m[(i1, j)]);
            out[(i0, j)] = g00 * a + g01 * b;
            out[(i1, j)] = g10 * a + g11 * b;
        }
    }
    // Columns: (G · M) · G†
    let (h00, h01, h10, h11) = (g00.conj(), g01.conj(), g10.conj(), g11.conj());
    for i in 0..dim {
        for j0 in (0..dim).filter(|j| j & bit == 0) {
            let j1 = j0 | bit;
            let (a, b) = (out[(i, j0)], out[(i, j1)]);
            out[(i, j0)] = a * h00 + b * h01;
            out[(i, j1)] = a * h10 + b * h11;
        }
    }
    out
}

/// Applies a single-qubit unitary to one qubit of `rho`.
pub fn apply_local_unitary(rho: &DensityMatrix, gate: &ComplexMatrix, qubit: usize) -> Result<DensityMatrix> {
    check_gate(gate)?;
    let n = rho.num_qubits();
    if qubit >= n {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits: n,
        });
    }
    Ok(DensityMatrix::from_trusted(conjugate_local(rho.matrix(), gate, qubit, n)))
}

/// Trace-preserving set of Kraus operators `{E_k}` with `Σ E_k†E_k = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    elements: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        let dim = first.rows();
        if let Some(bad) = elements.iter().find(|e| e.rows() != dim || e.cols() != dim) {
            return Err(Error::dims(format!("{dim}x{dim}"), format!("{}x{}", bad.rows(), bad.cols())));
        }
        let channel = Self { elements };
        let residue = channel.completeness_residue();
        if residue > COMPLETENESS_TOL {
            return Err(Error::Validation(format!(
                "Kraus operators are not complete (residue {residue:e})"
            )));
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            elements: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Unitary evolution as a one-element channel.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Removes all single-qubit coherence: `{|0⟩⟨0|, |1⟩⟨1|}`.
    pub fn full_dephasing() -> Self {
        Self {
            elements: vec![
                ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
                ComplexMatrix::from_real_diagonal(&[0.0, 1.0]),
            ],
        }
    }

    /// Decay `|1⟩ → |0⟩` with probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_probability("decay probability", gamma)?;
        let e0 = ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
        let e1 = ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]);
        Self::new(vec![e0, e1])
    }

    /// Off-diagonal entries scaled by `sqrt(1 − lambda)`; populations untouched.
    pub fn phase_damping(lambda: f64) -> Result<Self> {
        check_probability("phase damping parameter", lambda)?;
        let e0 = ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - lambda).sqrt()]);
        let e1 = ComplexMatrix::from_real_diagonal(&[0.0, lambda.sqrt()]);
        Self::new(vec![e0, e1])
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn completeness_residue(&self) -> f64 {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &self.elements {
            sum.add_assign_scaled(&e.adjoint().matmul(e).expect("square"), ONE);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// `self` first, then `next`: elements `{F_j E_k}`.
    pub fn then(&self, next: &KrausChannel) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(Error::dims(self.dim(), next.dim()));
        }
        let elements = next
            .elements
            .iter()
            .flat_map(|f| self.elements.iter().map(move |e| f * e))
            .filter(|m| m.max_abs() > 0.0)
            .collect::<Vec<_>>();
        if elements.is_empty() {
            return Err(Error::Invariant("composed channel vanished".into()));
        }
        Ok(Self { elements })
    }

    /// Independent channels on separate registers, `self` on the left factor.
    pub fn tensor(&self, other: &KrausChannel) -> Self {
        let elements = self
            .elements
            .iter()
            .flat_map(|a| other.elements.iter().map(move |b| a.kron(b)))
            .collect();
        Self { elements }
    }
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `ρ → Σ_k E_k ρ E_k†`
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    if ch.dim() != rho.dim() {
        return Err(Error::dims(
            format!("{0}x{0} channel", rho.dim()),
            format!("{0}x{0}", ch.dim()),
        ));
    }
    let residue = ch.completeness_residue();
    if residue > COMPLETENESS_TOL {
        return Err(Error::Validation(format!(
            "Kraus operators are not complete (residue {residue:e})"
        )));
    }
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for e in ch.elements() {
        out.add_assign_scaled(&rho.matrix().conjugate_by(e)?, ONE);
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Applies a single-qubit channel to `qubit` of a multi-qubit state.
pub fn apply_channel_to_qubit(rho: &DensityMatrix, ch: &KrausChannel, qubit: usize) -> Result<DensityMatrix> {
    if ch.dim() != 2 {
        return Err(Error::dims("single-qubit channel", format!("{0}x{0}", ch.dim())));
    }
    let n = rho.num_qubits();
    if qubit >= n {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits: n,
        });
    }
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for e in ch.elements() {
        out.add_assign_scaled(&conjugate_local(rho.matrix(), e, qubit, n), ONE);
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Longitudinal and transverse relaxation times for one qubit, plus the
/// time over which they act. All in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationParams {
    pub t1: f64,
    pub t2: f64,
    pub duration: f64,
}

impl RelaxationParams {
    pub fn new(t1: f64, t2: f64, duration: f64) -> Result<Self> {
        let params = Self { t1, t2, duration };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { t1, t2, duration } = *self;
        if t1.is_nan() || t1 <= 0.0 || t2.is_nan() || t2 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "relaxation times must be positive (t1 = {t1}, t2 = {t2})"
            )));
        }
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "relaxation duration must be finite and non-negative, got {duration}"
            )));
        }
        if t2 > 2.0 * t1 {
            return Err(Error::InvalidArgument(format!(
                "t2 = {t2} exceeds 2·t1 = {}; pure dephasing rate would be negative",
                2.0 * t1
            )));
        }
        Ok(())
    }

    /// `1 − exp(−duration/t1)`
    pub fn decay_probability(&self) -> f64 {
        -(-self.duration / self.t1).exp_m1()
    }

    /// Total attenuation of single-qubit coherences, `exp(−duration/t2)`.
    pub fn coherence_factor(&self) -> f64 {
        (-self.duration / self.t2).exp()
    }
}

/// Single-qubit relaxation: amplitude damping then phase damping, so that
/// populations relax with `t1` and coherences decay with `t2`.
pub fn relaxation_channel(params: &RelaxationParams) -> Result<KrausChannel> {
    params.validate()?;
    let gamma = params.decay_probability();
    // Amplitude damping already scales coherences by exp(−t/(2·t1)); the
    // phase damping supplies the remaining exp(−t·(1/t2 − 1/(2·t1))).
    let pure_dephasing_rate = 1.0 / params.t2 - 0.5 / params.t1;
    let lambda = -(-2.0 * params.duration * pure_dephasing_rate).exp_m1();
    let lambda = lambda.clamp(0.0, 1.0);
    KrausChannel::amplitude_damping(gamma)?.then(&KrausChannel::phase_damping(lambda)?)
}

/// Applies independent relaxation to every qubit; `params[i]` acts on qubit `i`.
pub fn apply_relaxation(rho: &DensityMatrix, params: &[RelaxationParams]) -> Result<DensityMatrix> {
    if params.len() != rho.num_qubits() {
        return Err(Error::dims(
            format!("{} relaxation entries", rho.num_qubits()),
            params.len(),
        ));
    }
    params.iter().enumerate().try_fold(rho.clone(), |state, (q, p)| {
        apply_channel_to_qubit(&state, &relaxation_channel(p)?, q)
    })
}
