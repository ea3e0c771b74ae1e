//! Pseudo-pure and thermal state preparation.
//!
//! A pseudo-pure state is `(1 − ε)/2^N · 1 + ε·|ψ⟩⟨ψ|`. Only its deviation
//! from the identity is visible to readout, and that deviation transforms
//! exactly like `|ψ⟩⟨ψ|` under unitaries.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::channels::{cnot, controlled, rotation_matrix, Axis, Rotation};
use crate::densmat::{pauli, ComplexMatrix, DensityMatrix, PureState, ONE};
use crate::error::{Error, Result};
use crate::readout::gradient_dephase;

/// Largest accepted `|β·ω/2|` for the high-temperature expansion.
pub const HIGH_TEMPERATURE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPureState {
    epsilon: f64,
    target: PureState,
    rho: DensityMatrix,
}

impl PseudoPureState {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn target(&self) -> &PureState {
        &self.target
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> DensityMatrix {
        self.rho
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "polarization must lie in (0, 1], got {epsilon}"
        )));
    }
    Ok(())
}

/// `(1 − ε)/2^N · 1 + ε·|ψ⟩⟨ψ|`
pub fn make_pps(target: &PureState, epsilon: f64) -> Result<PseudoPureState> {
    check_epsilon(epsilon)?;
    let dim = target.dim();
    let mut m = target.projector().scale_real(epsilon);
    let background = (1.0 - epsilon) / dim as f64;
    for i in 0..dim {
        m[(i, i)] += background;
    }
    Ok(PseudoPureState {
        epsilon,
        target: target.clone(),
        rho: DensityMatrix::from_trusted(m),
    })
}

/// High-temperature equilibrium described by per-qubit weights `w_i = β·ω_i/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalConfig {
    weights: Vec<f64>,
}

impl ThermalConfig {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("thermal state needs at least one qubit".into()));
        }
        if let Some(w) = weights
            .iter()
            .find(|w| !w.is_finite() || w.abs() >= HIGH_TEMPERATURE_LIMIT)
        {
            return Err(Error::InvalidArgument(format!(
                "weight {w} is outside the high-temperature regime |β·ω/2| < {HIGH_TEMPERATURE_LIMIT}"
            )));
        }
        Ok(Self { weights })
    }

    /// Weights from an inverse temperature and Larmor frequencies.
    pub fn from_beta(beta: f64, frequencies: &[f64]) -> Result<Self> {
        Self::new(frequencies.iter().map(|w| beta * w / 2.0).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_qubits(&self) -> usize {
        self.weights.len()
    }
}

/// `(1 − βH)/2^N` with `|0⟩` the lower-energy level, so the diagonal entry of
/// basis state `b` is `(1 + Σ_i w_i·(−1)^{b_i}) / 2^N`.
pub fn thermal_state(cfg: &ThermalConfig) -> Result<DensityMatrix> {
    let n = cfg.num_qubits();
    let dim = 1usize << n;
    let diag: Vec<f64> = (0..dim)
        .map(|b| {
            let shift: f64 = cfg
                .weights
                .iter()
                .enumerate()
                .map(|(q, w)| if b & (1 << (n - 1 - q)) == 0 { *w } else { -*w })
                .sum();
            (1.0 + shift) / dim as f64
        })
        .collect();
    DensityMatrix::new(ComplexMatrix::from_real_diagonal(&diag))
}

/// Two-qubit spatial averaging: turns the thermal state into a `|00⟩`
/// pseudo-pure state with `ε = (w_0 + w_1)/3`.
///
/// Two population-mixing steps, each a controlled `R_y` followed by a
/// gradient, equalize the populations of `|01⟩`, `|10⟩` and `|11⟩`. Requires
/// `0 < w_1 ≤ 2·w_0`.
pub fn spatial_average(cfg: &ThermalConfig) -> Result<PseudoPureState> {
    let &[w0, w1] = cfg.weights() else {
        return Err(Error::InvalidArgument(format!(
            "spatial averaging is defined for two qubits, got {}",
            cfg.num_qubits()
        )));
    };
    if !(w0 > 0.0 && w1 > 0.0 && w1 <= 2.0 * w0) {
        return Err(Error::InvalidArgument(format!(
            "spatial averaging needs 0 < w1 <= 2·w0, got w0 = {w0}, w1 = {w1}"
        )));
    }
    let rho = thermal_state(cfg)?;

    // Step 1 mixes |01⟩ with |11⟩ so that |01⟩ reaches the common target level.
    let keep_fraction = (w0 + w1) / (3.0 * w0);
    let angle = 2.0 * keep_fraction.sqrt().acos();
    let mix_first = controlled(&rotation_matrix(Rotation::new(Axis::Y, angle)), 1, 0, 2)?;
    let rho = gradient_dephase(&rho.evolve(&mix_first)?);

    // Step 2 splits the remainder evenly between |10⟩ and |11⟩.
    let mix_second = controlled(&rotation_matrix(Rotation::new(Axis::Y, FRAC_PI_2)), 0, 1, 2)?;
    let rho = gradient_dephase(&rho.evolve(&mix_second)?);

    let epsilon = (w0 + w1) / 3.0;
    check_epsilon(epsilon)?;
    Ok(PseudoPureState {
        epsilon,
        target: PureState::zero(2)?,
        rho,
    })
}

/// Thermal weights whose spatial average yields polarization `epsilon`.
pub fn thermal_config_for_epsilon(epsilon: f64) -> Result<ThermalConfig> {
    check_epsilon(epsilon)?;
    ThermalConfig::new(vec![1.5 * epsilon; 2])
}

/// Gate-level cat-state preparation from the `|00⟩` pseudo-pure state:
/// gradient, `R_y(π/2)` on qubit 0, then `CNOT(0 → 1)`.
pub fn prep_sequence_cat(epsilon: f64) -> Result<PseudoPureState> {
    let start = make_pps(&PureState::zero(2)?, epsilon)?;
    cat_from_zero_pps(&start)
}

/// Runs the cat-preparation gates on an existing `|00⟩` pseudo-pure state.
pub fn cat_from_zero_pps(start: &PseudoPureState) -> Result<PseudoPureState> {
    if start.target() != &PureState::zero(2)? {
        return Err(Error::InvalidArgument("cat preparation starts from the |00⟩ pseudo-pure state".into()));
    }
    let hadamard_like = rotation_matrix(Rotation::new(Axis::Y, FRAC_PI_2)).kron(&pauli::identity());
    let rho = gradient_dephase(start.rho())
        .evolve(&hadamard_like)?
        .evolve(&cnot(0, 1, 2)?)?;
    Ok(PseudoPureState {
        epsilon: start.epsilon(),
        target: PureState::cat(2)?,
        rho,
    })
}

/// A unitary mapping `|0…0⟩` to `target` (phase-adjusted Householder reflection).
pub fn preparation_unitary(target: &PureState) -> ComplexMatrix {
    let dim = target.dim();
    let amps = target.amplitudes();
    let phase = if amps[0].norm() > 0.0 {
        amps[0] / amps[0].norm()
    } else {
        ONE
    };
    // φ = ψ / phase has a real, non-negative first entry.
    let phi: Vec<Complex64> = amps.iter().map(|a| a / phase).collect();
    let mut v = phi.iter().map(|a| -a).collect::<Vec<_>>();
    v[0] += ONE;
    let v_norm_sqr: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let mut u = ComplexMatrix::identity(dim);
    if v_norm_sqr > 1e-30 {
        for i in 0..dim {
            for j in 0..dim {
                u[(i, j)] -= v[i] * v[j].conj() * (2.0 / v_norm_sqr);
            }
        }
    }
    u.scale(phase)
}

/// Prepares `target` from the `|0…0⟩` pseudo-pure state by a single unitary.
pub fn prepare_from_zero_pps(start: &PseudoPureState, target: &PureState) -> Result<PseudoPureState> {
    if start.target() != &PureState::zero(target.num_qubits())? {
        return Err(Error::InvalidArgument(
            "preparation starts from the |0…0⟩ pseudo-pure state of matching size".into(),
        ));
    }
    let rho = gradient_dephase(start.rho()).evolve(&preparation_unitary(target))?;
    Ok(PseudoPureState {
        epsilon: start.epsilon(),
        target: target.clone(),
        rho,
    })
}

/// `ρ − 1·Tr(ρ)/d`
pub fn deviation(m: &ComplexMatrix) -> ComplexMatrix {
    let dim = m.rows();
    let shift = m.trace() / dim as f64;
    let mut out = m.clone();
    for i in 0..dim {
        out[(i, i)] -= shift;
    }
    out
}

/// Relative Frobenius deviation `‖D(ρ_exp) − D(ρ_id)‖ / ‖D(ρ_id)‖` between
/// the deviation matrices of an experimental and an ideal state.
pub fn fidelity_delta(rho_exp: &ComplexMatrix, rho_id: &ComplexMatrix) -> Result<f64> {
    if rho_exp.rows() != rho_id.rows() || rho_exp.cols() != rho_id.cols() || !rho_id.is_square() {
        return Err(Error::dims(
            format!("{}x{}", rho_id.rows(), rho_id.cols()),
            format!("{}x{}", rho_exp.rows(), rho_exp.cols()),
        ));
    }
    let ideal = deviation(rho_id);
    let reference = ideal.frobenius_norm();
    if reference < 1e-300 {
        return Err(Error::InvalidArgument(
            "reference deviation matrix has zero norm".into(),
        ));
    }
    Ok((&deviation(rho_exp) - &ideal).frobenius_norm() / reference)
}
