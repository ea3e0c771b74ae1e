//! NMR-style readout: gradient dephasing, populations, single-spin line
//! amplitudes with reference normalization, and Pauli-basis tomography.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{sample_shots, MeasurementDirection, OutcomeDistribution};
use crate::channels::{apply_local_unitary, Axis};
use crate::densmat::{expectation, pauli, validate, ComplexMatrix, DensityMatrix, ValidityReport, ZERO};
use crate::error::{Error, Result};

/// Populations below zero by less than this are clipped.
pub const POPULATION_CLIP: f64 = 1e-12;
/// Lines smaller than this cannot serve as a normalization reference.
pub const REFERENCE_FLOOR: f64 = 1e-14;

/// Zeroes every off-diagonal entry, keeping the diagonal bit for bit.
pub fn gradient_dephase(rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        out[(i, i)] = m[(i, i)];
    }
    DensityMatrix::from_trusted(out)
}

/// Diagonal of a state in computational-basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    num_qubits: usize,
    populations: Vec<f64>,
}

impl PopulationVector {
    pub fn new(populations: Vec<f64>) -> Result<Self> {
        let dim = populations.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "population vector length {dim} is not a power of two"
            )));
        }
        let populations: Vec<f64> = populations
            .into_iter()
            .map(|p| if (-POPULATION_CLIP..0.0).contains(&p) { 0.0 } else { p })
            .collect();
        if let Some(p) = populations.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::Validation(format!("negative population {p}")));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("populations sum to {total}")));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            populations,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    /// Basis labels such as `"01"`, qubit 0 first.
    pub fn labels(&self) -> Vec<String> {
        (0..self.populations.len())
            .map(|i| basis_label(i, self.num_qubits))
            .collect()
    }
}

pub fn basis_label(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index & (1 << (num_qubits - 1 - q)) == 0 { '0' } else { '1' })
        .collect()
}

pub fn extract_populations(rho: &DensityMatrix) -> Result<PopulationVector> {
    PopulationVector::new(rho.diagonal_real())
}

/// Line amplitudes of one spin: for every configuration of the other spins,
/// `P(spin = 0, c) − P(spin = 1, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    spin: usize,
    num_qubits: usize,
    line_amplitudes: Vec<f64>,
}

impl SpectrumModel {
    pub fn spin(&self) -> usize {
        self.spin
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Ordered by the partner configuration read as a binary number over
    /// the remaining qubits in ascending index order.
    pub fn line_amplitudes(&self) -> &[f64] {
        &self.line_amplitudes
    }

    /// Largest-magnitude line, sign included.
    pub fn peak(&self) -> f64 {
        self.line_amplitudes
            .iter()
            .copied()
            .fold(0.0, |best, a| if a.abs() > best.abs() { a } else { best })
    }

    /// `Σ_c (−1)^{popcount(c)} · line_c`, which equals the full N-spin
    /// correlation `Σ_s (Π s_j) P(s)`.
    pub fn correlation(&self) -> f64 {
        self.line_amplitudes
            .iter()
            .enumerate()
            .map(|(c, a)| if c.count_ones() % 2 == 0 { *a } else { -*a })
            .sum()
    }
}

pub fn spectral_amplitudes(pops: &PopulationVector, spin: usize) -> Result<SpectrumModel> {
    let n = pops.num_qubits();
    if spin >= n {
        return Err(Error::QubitOutOfRange {
            index: spin,
            num_qubits: n,
        });
    }
    let others: Vec<usize> = (0..n).filter(|&q| q != spin).collect();
    let spin_bit = 1usize << (n - 1 - spin);
    let p = pops.populations();
    let line_amplitudes = (0..1usize << others.len())
        .map(|c| {
            let base: usize = others
                .iter()
                .enumerate()
                .filter(|(pos, _)| c & (1 << (others.len() - 1 - pos)) != 0)
                .map(|(_, &q)| 1usize << (n - 1 - q))
                .sum();
            p[base] - p[base | spin_bit]
        })
        .collect();
    Ok(SpectrumModel {
        spin,
        num_qubits: n,
        line_amplitudes,
    })
}

/// Divides every line by the largest-magnitude line of `reference`.
pub fn normalize_by_reference(signal: &SpectrumModel, reference: &SpectrumModel) -> Result<SpectrumModel> {
    if signal.num_qubits != reference.num_qubits || signal.spin != reference.spin {
        return Err(Error::dims(
            format!("spin {} of {} qubits", reference.spin, reference.num_qubits),
            format!("spin {} of {} qubits", signal.spin, signal.num_qubits),
        ));
    }
    let peak = reference.peak();
    if peak.abs() <= REFERENCE_FLOOR {
        return Err(Error::InvalidArgument("reference spectrum has no usable line".into()));
    }
    Ok(SpectrumModel {
        spin: signal.spin,
        num_qubits: signal.num_qubits,
        line_amplitudes: signal.line_amplitudes.iter().map(|a| a / peak).collect(),
    })
}

/// One tomography readout: a Pauli basis per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TomographySetting {
    pub bases: Vec<Axis>,
}

impl TomographySetting {
    pub fn label(&self) -> String {
        self.bases
            .iter()
            .map(|a| match a {
                Axis::X => 'X',
                Axis::Y => 'Y',
                Axis::Z => 'Z',
            })
            .collect()
    }

    /// Readout directions whose rotation maps each basis Pauli onto `σ_z`.
    pub fn directions(&self) -> Vec<MeasurementDirection> {
        self.bases
            .iter()
            .map(|a| match a {
                Axis::X => MeasurementDirection::x(),
                Axis::Y => MeasurementDirection::y(),
                Axis::Z => MeasurementDirection::z(),
            })
            .collect()
    }
}

/// All `3^n` per-qubit basis combinations, `X < Y < Z` with qubit 0 slowest.
pub fn tomography_settings(n: usize) -> Vec<TomographySetting> {
    let mut settings = vec![TomographySetting { bases: Vec::new() }];
    for _ in 0..n {
        settings = settings
            .into_iter()
            .flat_map(|s| {
                [Axis::X, Axis::Y, Axis::Z].into_iter().map(move |a| {
                    let mut bases = s.bases.clone();
                    bases.push(a);
                    TomographySetting { bases }
                })
            })
            .collect();
    }
    settings
}

/// Rotates every qubit onto its readout direction, dephases, and returns populations.
pub fn read_populations(rho: &DensityMatrix, dirs: &[MeasurementDirection]) -> Result<PopulationVector> {
    if dirs.len() != rho.num_qubits() {
        return Err(Error::dims(
            format!("{} directions", rho.num_qubits()),
            dirs.len(),
        ));
    }
    let rotated = dirs.iter().enumerate().try_fold(rho.clone(), |state, (q, d)| {
        apply_local_unitary(&state, &d.unitary(), q)
    })?;
    extract_populations(&gradient_dephase(&rotated))
}

/// Finite-shot readout: number of shots per setting and the base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots: u64,
    pub seed: u64,
}

/// Pauli expectations estimated through the readout path: each setting
/// determines every string whose letters match it or are `I`; strings
/// reached by several settings are averaged.
pub fn measure_pauli_expectations(rho: &DensityMatrix, plan: Option<ShotPlan>) -> Result<BTreeMap<String, f64>> {
    let n = rho.num_qubits();
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (k, setting) in tomography_settings(n).iter().enumerate() {
        let pops = read_populations(rho, &setting.directions())?;
        let probs = match plan {
            None => pops.populations().to_vec(),
            Some(plan) => {
                let dist = OutcomeDistribution::new(pops.populations().to_vec())?;
                let sample = sample_shots(&dist, plan.shots, plan.seed.wrapping_add(k as u64))?;
                sample
                    .counts
                    .iter()
                    .map(|&c| c as f64 / plan.shots as f64)
                    .collect()
            }
        };
        let label: Vec<char> = setting.label().chars().collect();
        for mask in 1usize..(1 << n) {
            let string: String = (0..n)
                .map(|q| if mask & (1 << (n - 1 - q)) != 0 { label[q] } else { 'I' })
                .collect();
            let value: f64 = probs
                .iter()
                .enumerate()
                .map(|(b, p)| if (b & mask).count_ones() % 2 == 0 { *p } else { -*p })
                .sum();
            let entry = sums.entry(string).or_insert((0.0, 0));
            entry.0 += value;
            entry.1 += 1;
        }
    }
    let mut out: BTreeMap<String, f64> = sums
        .into_iter()
        .map(|(k, (sum, count))| (k, sum / count as f64))
        .collect();
    out.insert("I".repeat(n), 1.0);
    Ok(out)
}

/// All `4^n` Pauli strings over `I, X, Y, Z`, qubit 0 first.
pub fn pauli_strings(n: usize) -> Vec<String> {
    let mut strings = vec![String::new()];
    for _ in 0..n {
        strings = strings
            .into_iter()
            .flat_map(|s| ['I', 'X', 'Y', 'Z'].into_iter().map(move |c| format!("{s}{c}")))
            .collect();
    }
    strings
}

/// `Tr(ρ P)` for every Pauli string, computed directly from the matrix.
pub fn pauli_expectations(rho: &DensityMatrix) -> Result<BTreeMap<String, f64>> {
    pauli_strings(rho.num_qubits())
        .into_iter()
        .map(|s| {
            let op = pauli::string(&s).expect("valid letters");
            Ok((s, expectation(rho, &op)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    /// Hermitian with unit trace by construction; positivity is in `validity`.
    pub rho_reconstructed: ComplexMatrix,
    pub validity: ValidityReport,
    pub pauli_expectations: BTreeMap<String, f64>,
}

impl TomographyResult {
    pub fn num_qubits(&self) -> usize {
        self.rho_reconstructed.rows().trailing_zeros() as usize
    }

    /// The reconstruction as a validated density matrix.
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.rho_reconstructed.clone())
    }
}

/// `ρ = 2^{−N} Σ_P ⟨P⟩·P` over all Pauli strings.
pub fn tomography_reconstruct(expectations: &BTreeMap<String, f64>) -> Result<TomographyResult> {
    let n = expectations
        .keys()
        .next()
        .map(|k| k.chars().count())
        .ok_or_else(|| Error::InvalidArgument("no expectations supplied".into()))?;
    if n == 0 || n > crate::densmat::DEFAULT_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("unsupported Pauli string length {n}")));
    }
    if let Some(bad) = expectations
        .keys()
        .find(|k| k.chars().count() != n || !k.chars().all(|c| "IXYZ".contains(c)))
    {
        return Err(Error::InvalidArgument(format!("malformed Pauli string {bad:?}")));
    }
    let identity = "I".repeat(n);
    if let Some(v) = expectations.get(&identity) {
        if (v - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("identity expectation must be 1, got {v}")));
        }
    }
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for label in pauli_strings(n) {
        let value = if label == identity {
            1.0
        } else {
            *expectations
                .get(&label)
                .ok_or_else(|| Error::InvalidArgument(format!("missing expectation for {label}")))?
        };
        if !value.is_finite() || value.abs() > 1.0 + 1e-9 {
            return Err(Error::Validation(format!(
                "expectation of {label} is {value}, outside [-1, 1]"
            )));
        }
        if value != 0.0 {
            add_pauli_string(&mut m, &label, value / dim as f64);
        }
    }
    let validity = validate(&m);
    let mut pauli_expectations = expectations.clone();
    pauli_expectations.insert(identity, 1.0);
    Ok(TomographyResult {
        rho_reconstructed: m,
        validity,
        pauli_expectations,
    })
}

/// `m += weight · P` using the permutation-with-phases structure of `P`.
fn add_pauli_string(m: &mut ComplexMatrix, label: &str, weight: f64) {
    let letters: Vec<char> = label.chars().collect();
    let n = letters.len();
    let flip: usize = letters
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, 'X' | 'Y'))
        .map(|(q, _)| 1usize << (n - 1 - q))
        .sum();
    for row in 0..(1usize << n) {
        let mut phase = Complex64::new(weight, 0.0);
        for (q, c) in letters.iter().enumerate() {
            let bit = row & (1 << (n - 1 - q)) != 0;
            phase *= match (c, bit) {
                ('Y', false) => Complex64::new(0.0, -1.0),
                ('Y', true) => Complex64::new(0.0, 1.0),
                ('Z', true) => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(1.0, 0.0),
            };
        }
        if phase != ZERO {
            m[(row, row ^ flip)] += phase;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densmat::{pure_to_density, PureState};
    use crate::pps::{make_pps, thermal_state, ThermalConfig};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dephase_examples() {
        let diag = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.7, 0.3])).unwrap();
        assert_eq!(gradient_dephase(&diag), diag);
        let plus = pure_to_density(&PureState::uniform(1).unwrap());
        assert!(gradient_dephase(&plus)
            .matrix()
            .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
            < 1e-15);

        let eps = 1e-6;
        let cat = make_pps(&PureState::cat(2).unwrap(), eps).unwrap();
        let dephased = gradient_dephase(cat.rho());
        let expected: Vec<f64> = [0.5, 0.0, 0.0, 0.5]
            .iter()
            .map(|p| (1.0 - eps) / 4.0 + eps * p)
            .collect();
        assert_eq!(dephased.matrix(), &ComplexMatrix::from_real_diagonal(&expected));
    }

    #[test]
    fn population_examples() {
        let rho = pure_to_density(&PureState::basis(2, 0b01).unwrap());
        assert_eq!(extract_populations(&rho).unwrap().populations(), &[0.0, 1.0, 0.0, 0.0]);
        let flat = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(extract_populations(&flat).unwrap().populations(), &[0.25; 4]);
        let thermal = thermal_state(&ThermalConfig::new(vec![0.05, 0.05]).unwrap()).unwrap();
        let pops = extract_populations(&thermal).unwrap();
        for (p, e) in pops.populations().iter().zip([0.275, 0.25, 0.25, 0.225]) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-15);
        }
        assert_eq!(pops.labels(), vec!["00", "01", "10", "11"]);
    }

    #[test]
    fn population_vector_validation() {
        assert!(PopulationVector::new(vec![1.0 + 5e-13, -5e-13]).is_ok());
        assert!(PopulationVector::new(vec![1.1, -0.1]).is_err());
        assert!(PopulationVector::new(vec![0.5, 0.4]).is_err());
        assert!(PopulationVector::new(vec![0.5, 0.25, 0.25]).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let zero = extract_populations(&pure_to_density(&PureState::zero(2).unwrap())).unwrap();
        assert_eq!(spectral_amplitudes(&zero, 0).unwrap().line_amplitudes(), &[1.0, 0.0]);
        let flat = PopulationVector::new(vec![0.25; 4]).unwrap();
        assert_eq!(spectral_amplitudes(&flat, 1).unwrap().line_amplitudes(), &[0.0, 0.0]);
        let thermal = PopulationVector::new(vec![0.275, 0.25, 0.25, 0.225]).unwrap();
        let lines = spectral_amplitudes(&thermal, 0).unwrap();
        assert_abs_diff_eq!(lines.line_amplitudes()[0], 0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(lines.line_amplitudes()[1], 0.025, epsilon = 1e-15);
        assert!(matches!(
            spectral_amplitudes(&thermal, 2),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn spectrum_partner_order_on_three_qubits() {
        // Population only on |110⟩: spin 1 is 1, partners (q0, q2) = (1, 0) → config 0b10.
        let mut p = vec![0.0; 8];
        p[0b110] = 1.0;
        let lines = spectral_amplitudes(&PopulationVector::new(p).unwrap(), 1).unwrap();
        assert_eq!(lines.line_amplitudes(), &[0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn spectrum_correlation_matches_parity_sum() {
        let p = vec![0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.1, 0.1];
        let parity: f64 = p
            .iter()
            .enumerate()
            .map(|(b, x)| if (b as u32).count_ones() % 2 == 0 { *x } else { -*x })
            .sum();
        let pops = PopulationVector::new(p).unwrap();
        for spin in 0..3 {
            let lines = spectral_amplitudes(&pops, spin).unwrap();
            assert_abs_diff_eq!(lines.correlation(), parity, epsilon = 1e-15);
        }
    }

    #[test]
    fn normalization_examples() {
        let pops = PopulationVector::new(vec![0.4, 0.1, 0.3, 0.2]).unwrap();
        let lines = spectral_amplitudes(&pops, 0).unwrap();
        let normed = normalize_by_reference(&lines, &lines).unwrap();
        assert_abs_diff_eq!(normed.peak(), 1.0, epsilon = 1e-15);

        let scaled = |s: &SpectrumModel, k: f64| SpectrumModel {
            line_amplitudes: s.line_amplitudes.iter().map(|a| a * k).collect(),
            ..s.clone()
        };
        let reference = spectral_amplitudes(&PopulationVector::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap(), 0).unwrap();
        let base = normalize_by_reference(&lines, &reference).unwrap();
        let tiny = normalize_by_reference(&scaled(&lines, 1e-6), &scaled(&reference, 1e-6)).unwrap();
        for (a, b) in base.line_amplitudes().iter().zip(tiny.line_amplitudes()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }

        let flat = spectral_amplitudes(&PopulationVector::new(vec![0.25; 4]).unwrap(), 0).unwrap();
        assert!(normalize_by_reference(&lines, &flat).is_err());
    }

    #[test]
    fn settings_counts() {
        assert_eq!(tomography_settings(1).len(), 3);
        assert_eq!(tomography_settings(2).len(), 9);
        assert_eq!(tomography_settings(3).len(), 27);
        let labels: Vec<String> = tomography_settings(2).iter().map(|s| s.label()).collect();
        assert_eq!(labels[0], "XX");
        assert_eq!(labels[8], "ZZ");
    }

    #[test]
    fn setting_rotations_map_paulis_to_z() {
        for (setting, letter) in tomography_settings(1).iter().zip(['X', 'Y', 'Z']) {
            let u = setting.directions()[0].unitary();
            let conj = &(&u.adjoint() * &pauli::z()) * &u;
            assert!(conj.max_abs_diff(&pauli::from_letter(letter).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let map = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
        let zero = tomography_reconstruct(&map(&[("X", 0.0), ("Y", 0.0), ("Z", 1.0)])).unwrap();
        assert!(zero.rho_reconstructed.max_abs_diff(&PureState::zero(1).unwrap().projector()) < 1e-15);

        let mixed = tomography_reconstruct(&pauli_strings(2).into_iter().map(|s| {
            let v = if s == "II" { 1.0 } else { 0.0 };
            (s, v)
        }).collect()).unwrap();
        assert!(mixed.rho_reconstructed.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        assert!(mixed.validity.passed);

        let cat = pure_to_density(&PureState::cat(2).unwrap());
        let forward = pauli_expectations(&cat).unwrap();
        assert_abs_diff_eq!(forward["XX"], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(forward["YY"], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(forward["ZZ"], 1.0, epsilon = 1e-15);
        let nonzero = forward.iter().filter(|(_, v)| v.abs() > 1e-12).count();
        assert_eq!(nonzero, 4);
        let rebuilt = tomography_reconstruct(&forward).unwrap();
        assert!(rebuilt.rho_reconstructed.max_abs_diff(cat.matrix()) < 1e-15);
    }

    #[test]
    fn reconstruct_errors() {
        let mut partial: BTreeMap<String, f64> = [("X", 0.0), ("Z", 1.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert!(matches!(tomography_reconstruct(&partial), Err(Error::InvalidArgument(_))));
        partial.insert("Y".into(), 1.5);
        assert!(matches!(tomography_reconstruct(&partial), Err(Error::Validation(_))));
        partial.insert("Y".into(), 0.0);
        partial.insert("I".into(), 0.5);
        assert!(tomography_reconstruct(&partial).is_err());
        assert!(tomography_reconstruct(&BTreeMap::new()).is_err());
    }

    #[test]
    fn non_positive_reconstruction_is_reported() {
        // ⟨X⟩ = ⟨Z⟩ = 1 is not a physical qubit state.
        let map: BTreeMap<String, f64> = [("X", 1.0), ("Y", 0.0), ("Z", 1.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let result = tomography_reconstruct(&map).unwrap();
        assert!(!result.validity.passed);
        assert!(result.validity.is_hermitian() && result.validity.has_unit_trace());
        assert!(result.density_matrix().is_err());
    }

    #[test]
    fn readout_path_matches_trace_path() {
        let psi = PureState::normalized(vec![
            Complex64::new(0.2, 0.1),
            Complex64::new(-0.4, 0.3),
            Complex64::new(0.1, -0.6),
            Complex64::new(0.5, 0.0),
        ])
        .unwrap();
        let rho = make_pps(&psi, 0.4).unwrap().into_rho();
        let measured = measure_pauli_expectations(&rho, None).unwrap();
        let direct = pauli_expectations(&rho).unwrap();
        assert_eq!(measured.len(), 16);
        for (k, v) in &direct {
            assert_abs_diff_eq!(measured[k], *v, epsilon = 1e-13);
        }
    }
}
