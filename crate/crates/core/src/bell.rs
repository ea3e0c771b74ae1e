//! Correlation functions and Bell-inequality evaluation.
//!
//! Outcome convention: computational bit 0 reads as `s = +1`, bit 1 as `s = −1`.
//! A correlation is `E = Σ_s (Π_j s_j)·P(s)`, and an inequality is the
//! coefficient-weighted sum `Σ C(n⃗)·E(n⃗)` compared against its classical bound.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::channels::direction_unitary;
use crate::densmat::{expectation, pauli, tensor_all, ComplexMatrix, DensityMatrix};
use crate::error::{Error, Result};
use crate::readout::read_populations;

/// `|value|` must exceed the bound by more than this to count as a violation.
pub const VIOLATION_SLACK: f64 = 1e-9;
/// Classical CHSH bound.
pub const CHSH_BOUND: f64 = 2.0;

/// One observer's setting: polar angle `theta` and azimuth `phi`, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDirection {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// In the xz-plane at polar angle `theta`.
    pub fn polar(theta: f64) -> Self {
        Self::new(theta, 0.0)
    }

    pub fn x() -> Self {
        Self::new(FRAC_PI_2, 0.0)
    }

    pub fn y() -> Self {
        Self::new(FRAC_PI_2, FRAC_PI_2)
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    /// `(cos φ sin θ, sin φ sin θ, cos θ)`
    pub fn vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cp * st, sp * st, ct]
    }

    /// Readout rotation `R_y(−θ)·R_z(−φ)`.
    pub fn unitary(&self) -> ComplexMatrix {
        direction_unitary(self.theta, self.phi)
    }

    /// `r · σ`
    pub fn observable(&self) -> ComplexMatrix {
        pauli::dot(self.vector())
    }
}

/// Joint outcome probabilities indexed by computational basis state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    num_observers: usize,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    /// Clips entries in `[−1e−12, 0)` to zero; the total must be 1 within `1e−10`.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let dim = probabilities.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "distribution over {dim} outcomes is not over ±1 strings"
            )));
        }
        let probabilities: Vec<f64> = probabilities
            .into_iter()
            .map(|p| if (-1e-12..0.0).contains(&p) { 0.0 } else { p })
            .collect();
        if let Some(p) = probabilities.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::Validation(format!("negative probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            num_observers: dim.trailing_zeros() as usize,
            probabilities,
        })
    }

    pub fn num_observers(&self) -> usize {
        self.num_observers
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `s_j` values of outcome `index`, observer 0 first.
    pub fn outcomes(&self, index: usize) -> Vec<i8> {
        let n = self.num_observers;
        (0..n)
            .map(|j| if index & (1 << (n - 1 - j)) == 0 { 1 } else { -1 })
            .collect()
    }

    /// `P(s_1, …, s_N)`; `None` if the slice is not a ±1 string of the right length.
    pub fn probability(&self, outcomes: &[i8]) -> Option<f64> {
        if outcomes.len() != self.num_observers {
            return None;
        }
        let mut index = 0;
        for &s in outcomes {
            index <<= 1;
            match s {
                1 => {}
                -1 => index |= 1,
                _ => return None,
            }
        }
        Some(self.probabilities[index])
    }

    /// `Π_j s_j` of outcome `index`.
    pub fn product_sign(index: usize) -> f64 {
        if index.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Readout path: rotate each qubit by `U(r_i)`, dephase, read populations.
pub fn joint_probabilities(rho: &DensityMatrix, dirs: &[MeasurementDirection]) -> Result<OutcomeDistribution> {
    let pops = read_populations(rho, dirs)?;
    OutcomeDistribution::new(pops.populations().to_vec())
}

/// `Σ_s (Π s_j)·P(s)`
pub fn correlation_from_probs(dist: &OutcomeDistribution) -> f64 {
    dist.probabilities
        .iter()
        .enumerate()
        .map(|(i, p)| OutcomeDistribution::product_sign(i) * p)
        .sum()
}

/// Trace path: `Tr(ρ · r_1·σ ⊗ … ⊗ r_N·σ)`.
pub fn correlation_qm(rho: &DensityMatrix, dirs: &[MeasurementDirection]) -> Result<f64> {
    if dirs.len() != rho.num_qubits() {
        return Err(Error::dims(format!("{} directions", rho.num_qubits()), dirs.len()));
    }
    let observables: Vec<ComplexMatrix> = dirs.iter().map(|d| d.observable()).collect();
    let op = tensor_all(&observables).expect("at least one qubit");
    expectation(rho, &op)
}

/// One coefficient `C(n_1, …, n_N)` with 1-based setting indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityTerm {
    pub settings: Vec<usize>,
    pub coefficient: f64,
}

/// `|Σ C(n⃗)·E(n⃗)| ≤ L`
#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySpec {
    num_observers: usize,
    settings_per_observer: usize,
    terms: Vec<InequalityTerm>,
    classical_bound: f64,
    /// `directions[observer][setting − 1]`
    directions: Vec<Vec<MeasurementDirection>>,
}

impl InequalitySpec {
    pub fn new(
        terms: Vec<InequalityTerm>,
        classical_bound: f64,
        directions: Vec<Vec<MeasurementDirection>>,
    ) -> Result<Self> {
        let num_observers = directions.len();
        if num_observers == 0 {
            return Err(Error::InvalidArgument("an inequality needs at least one observer".into()));
        }
        let settings_per_observer = directions[0].len();
        if settings_per_observer == 0 || directions.iter().any(|d| d.len() != settings_per_observer) {
            return Err(Error::InvalidArgument(
                "every observer needs the same, nonzero number of settings".into(),
            ));
        }
        if !classical_bound.is_finite() || classical_bound <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "classical bound must be positive, got {classical_bound}"
            )));
        }
        let mut seen = BTreeSet::new();
        for term in &terms {
            if term.settings.len() != num_observers
                || term.settings.iter().any(|&s| s == 0 || s > settings_per_observer)
            {
                return Err(Error::InvalidArgument(format!(
                    "setting tuple {:?} is not in 1..={settings_per_observer} for {num_observers} observers",
                    term.settings
                )));
            }
            if !term.coefficient.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "coefficient for {:?} is not finite",
                    term.settings
                )));
            }
            if !seen.insert(term.settings.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "setting tuple {:?} appears twice",
                    term.settings
                )));
            }
        }
        if terms.iter().all(|t| t.coefficient == 0.0) {
            return Err(Error::InvalidArgument("at least one coefficient must be nonzero".into()));
        }
        Ok(Self {
            num_observers,
            settings_per_observer,
            terms,
            classical_bound,
            directions,
        })
    }

    pub fn num_observers(&self) -> usize {
        self.num_observers
    }

    pub fn settings_per_observer(&self) -> usize {
        self.settings_per_observer
    }

    pub fn terms(&self) -> &[InequalityTerm] {
        &self.terms
    }

    pub fn classical_bound(&self) -> f64 {
        self.classical_bound
    }

    pub fn directions(&self) -> &[Vec<MeasurementDirection>] {
        &self.directions
    }

    /// Per-observer directions for one term.
    pub fn term_directions(&self, term: &InequalityTerm) -> Vec<MeasurementDirection> {
        term.settings
            .iter()
            .enumerate()
            .map(|(obs, &s)| self.directions[obs][s - 1])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEvaluation {
    pub settings: Vec<usize>,
    pub coefficient: f64,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityEvaluation {
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    pub per_term: Vec<TermEvaluation>,
}

impl InequalityEvaluation {
    /// Assembles the weighted sum from correlations listed in term order.
    pub fn from_correlations(spec: &InequalitySpec, correlations: &[f64]) -> Result<Self> {
        if correlations.len() != spec.terms.len() {
            return Err(Error::dims(format!("{} correlations", spec.terms.len()), correlations.len()));
        }
        let per_term: Vec<TermEvaluation> = spec
            .terms
            .iter()
            .zip(correlations)
            .map(|(t, &e)| TermEvaluation {
                settings: t.settings.clone(),
                coefficient: t.coefficient,
                correlation: e,
            })
            .collect();
        let value = per_term.iter().map(|t| t.coefficient * t.correlation).sum();
        Ok(Self {
            value,
            bound: spec.classical_bound,
            violated: is_violation(value, spec.classical_bound),
            per_term,
        })
    }
}

pub fn is_violation(value: f64, bound: f64) -> bool {
    value.abs() > bound + VIOLATION_SLACK
}

/// Evaluates `spec` with correlations supplied by `correlator`.
pub fn evaluate_inequality_with<F>(spec: &InequalitySpec, mut correlator: F) -> Result<InequalityEvaluation>
where
    F: FnMut(&[MeasurementDirection]) -> Result<f64>,
{
    let correlations = spec
        .terms
        .iter()
        .map(|t| correlator(&spec.term_directions(t)))
        .collect::<Result<Vec<_>>>()?;
    InequalityEvaluation::from_correlations(spec, &correlations)
}

/// Evaluates `spec` on `rho` using the trace path for each correlation.
pub fn evaluate_inequality(spec: &InequalitySpec, rho: &DensityMatrix) -> Result<InequalityEvaluation> {
    if spec.num_observers != rho.num_qubits() {
        return Err(Error::dims(
            format!("{} qubits", spec.num_observers),
            format!("{} qubits", rho.num_qubits()),
        ));
    }
    evaluate_inequality_with(spec, |dirs| correlation_qm(rho, dirs))
}

/// CHSH with settings `n_1..n_4` at polar angles `0, 2θ, 4θ, 6θ` in the
/// xz-plane. Observer 1 holds `{n_1, n_3}`, observer 2 holds `{n_2, n_4}`:
///
/// `E(n_1,n_2) + E(n_3,n_2) + E(n_3,n_4) − E(n_1,n_4)`
pub fn chsh_spec(theta: f64) -> InequalitySpec {
    let n = [0.0, 2.0 * theta, 4.0 * theta, 6.0 * theta].map(MeasurementDirection::polar);
    let term = |a: usize, b: usize, coefficient: f64| InequalityTerm {
        settings: vec![a, b],
        coefficient,
    };
    InequalitySpec::new(
        vec![term(1, 1, 1.0), term(2, 1, 1.0), term(2, 2, 1.0), term(1, 2, -1.0)],
        CHSH_BOUND,
        vec![vec![n[0], n[2]], vec![n[1], n[3]]],
    )
    .expect("well-formed CHSH inequality")
}

/// Cat-state CHSH value `3 cos 2θ − cos 6θ`.
pub fn chsh_qm_prediction(theta: f64) -> f64 {
    3.0 * (2.0 * theta).cos() - (6.0 * theta).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSample {
    /// Counts in the distribution's outcome order.
    pub counts: Vec<u64>,
    pub shots: u64,
    pub e_estimate: f64,
    pub std_error: f64,
}

/// Draws `shots` outcomes from `dist` with a ChaCha8 stream seeded by `seed`.
///
/// Counts come from sequential conditional binomials, an exact multinomial
/// sampler. `std_error` is the sample standard deviation of `Π s_j`
/// divided by `√shots`.
pub fn sample_shots(dist: &OutcomeDistribution, shots: u64, seed: u64) -> Result<ShotSample> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = dist.probabilities();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0_f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == probs.len() - 1 {
            counts[k] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::Invariant(format!("binomial sampler: {e}")))?
            .sample(&mut rng);
        counts[k] = draw;
        remaining -= draw;
        mass_left -= p;
    }
    let n = shots as f64;
    let plus: u64 = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| OutcomeDistribution::product_sign(*i) > 0.0)
        .map(|(_, c)| c)
        .sum();
    let mean = (2.0 * plus as f64 - n) / n;
    let std_error = if shots > 1 {
        let variance = (n / (n - 1.0)) * (1.0 - mean * mean).max(0.0);
        (variance / n).sqrt()
    } else {
        0.0
    };
    Ok(ShotSample {
        counts,
        shots,
        e_estimate: mean,
        std_error,
    })
}

/// Serialized form of an [`InequalitySpec`]; angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityDocument {
    pub classical_bound: f64,
    /// `directions[observer][setting − 1]`
    pub directions: Vec<Vec<DirectionDegrees>>,
    pub terms: Vec<InequalityTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionDegrees {
    pub theta_deg: f64,
    #[serde(default)]
    pub phi_deg: f64,
}

impl From<&InequalitySpec> for InequalityDocument {
    fn from(spec: &InequalitySpec) -> Self {
        Self {
            classical_bound: spec.classical_bound,
            directions: spec
                .directions
                .iter()
                .map(|obs| {
                    obs.iter()
                        .map(|d| DirectionDegrees {
                            theta_deg: d.theta.to_degrees(),
                            phi_deg: d.phi.to_degrees(),
                        })
                        .collect()
                })
                .collect(),
            terms: spec.terms.clone(),
        }
    }
}

impl TryFrom<InequalityDocument> for InequalitySpec {
    type Error = Error;

    fn try_from(doc: InequalityDocument) -> Result<Self> {
        let directions = doc
            .directions
            .iter()
            .map(|obs| {
                obs.iter()
                    .map(|d| MeasurementDirection::from_degrees(d.theta_deg, d.phi_deg))
                    .collect()
            })
            .collect();
        InequalitySpec::new(doc.terms, doc.classical_bound, directions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densmat::{pure_to_density, PureState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn cat() -> DensityMatrix {
        pure_to_density(&PureState::cat(2).unwrap())
    }

    #[test]
    fn direction_vector_is_unit() {
        for k in 0..50 {
            let d = MeasurementDirection::new(k as f64 * 0.37, k as f64 * -1.13);
            let r = d.vector();
            assert_abs_diff_eq!(r.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn joint_probability_examples() {
        let zz = [MeasurementDirection::z(); 2];
        let zero = pure_to_density(&PureState::zero(2).unwrap());
        assert_abs_diff_eq!(joint_probabilities(&zero, &zz).unwrap().probability(&[1, 1]).unwrap(), 1.0);

        let dist = joint_probabilities(&cat(), &zz).unwrap();
        assert_abs_diff_eq!(dist.probability(&[1, 1]).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.probability(&[-1, -1]).unwrap(), 0.5, epsilon = 1e-15);

        let dist = joint_probabilities(&cat(), &[MeasurementDirection::z(), MeasurementDirection::x()]).unwrap();
        for p in dist.probabilities() {
            assert_abs_diff_eq!(*p, 0.25, epsilon = 1e-15);
        }
        assert!(joint_probabilities(&cat(), &zz[..1]).is_err());
    }

    #[test]
    fn correlation_from_probs_examples() {
        let d = |p: &[f64]| OutcomeDistribution::new(p.to_vec()).unwrap();
        assert_eq!(correlation_from_probs(&d(&[1.0, 0.0, 0.0, 0.0])), 1.0);
        assert_eq!(correlation_from_probs(&d(&[0.25; 4])), 0.0);
        assert_eq!(correlation_from_probs(&d(&[0.0, 0.5, 0.5, 0.0])), -1.0);
        assert_eq!(d(&[0.0, 0.5, 0.5, 0.0]).outcomes(1), vec![1, -1]);
    }

    #[test]
    fn distribution_validation() {
        assert!(OutcomeDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(OutcomeDistribution::new(vec![1.1, -0.1]).is_err());
        assert!(OutcomeDistribution::new(vec![1.0]).is_err());
        let d = OutcomeDistribution::new(vec![1.0, -1e-13]).unwrap();
        assert_eq!(d.probabilities(), &[1.0, 0.0]);
        assert_eq!(d.probability(&[0]), None);
    }

    #[test]
    fn correlation_qm_examples() {
        let xx = [MeasurementDirection::x(); 2];
        assert_abs_diff_eq!(correlation_qm(&cat(), &xx).unwrap(), 1.0, epsilon = 1e-15);

        let singlet = pure_to_density(&PureState::singlet());
        let zz = [MeasurementDirection::z(); 2];
        assert_abs_diff_eq!(correlation_qm(&singlet, &zz).unwrap(), -1.0, epsilon = 1e-15);
        let a = MeasurementDirection::new(0.3, 1.1);
        let b = MeasurementDirection::new(2.0, -0.4);
        let dot: f64 = a.vector().iter().zip(b.vector()).map(|(x, y)| x * y).sum();
        assert_abs_diff_eq!(correlation_qm(&singlet, &[a, b]).unwrap(), -dot, epsilon = 1e-14);

        let zero = pure_to_density(&PureState::zero(2).unwrap());
        let dirs = [MeasurementDirection::polar(PI / 3.0); 2];
        assert_abs_diff_eq!(correlation_qm(&zero, &dirs).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn inequality_examples() {
        let v = evaluate_inequality(&chsh_spec(22.5_f64.to_radians()), &cat()).unwrap();
        assert_abs_diff_eq!(v.value, 2.0 * SQRT_2, epsilon = 1e-12);
        assert!(v.violated);
        assert_eq!(v.per_term.len(), 4);

        let flat = DensityMatrix::maximally_mixed(2).unwrap();
        let v = evaluate_inequality(&chsh_spec(22.5_f64.to_radians()), &flat).unwrap();
        assert_abs_diff_eq!(v.value, 0.0, epsilon = 1e-15);
        assert!(!v.violated);

        let single = InequalitySpec::new(
            vec![InequalityTerm { settings: vec![1, 1], coefficient: 1.0 }],
            1.0,
            vec![vec![MeasurementDirection::z()]; 2],
        )
        .unwrap();
        let v = evaluate_inequality(&single, &cat()).unwrap();
        assert_abs_diff_eq!(v.value, 1.0, epsilon = 1e-15);
        assert!(!v.violated);

        let one_qubit = pure_to_density(&PureState::zero(1).unwrap());
        assert!(evaluate_inequality(&single, &one_qubit).is_err());
    }

    #[test]
    fn inequality_spec_validation() {
        let dirs = vec![vec![MeasurementDirection::z(); 2]; 2];
        let term = |s: Vec<usize>, c: f64| InequalityTerm { settings: s, coefficient: c };
        assert!(InequalitySpec::new(vec![term(vec![1, 3], 1.0)], 2.0, dirs.clone()).is_err());
        assert!(InequalitySpec::new(vec![term(vec![0, 1], 1.0)], 2.0, dirs.clone()).is_err());
        assert!(InequalitySpec::new(vec![term(vec![1], 1.0)], 2.0, dirs.clone()).is_err());
        assert!(InequalitySpec::new(vec![term(vec![1, 1], 0.0)], 2.0, dirs.clone()).is_err());
        assert!(InequalitySpec::new(vec![term(vec![1, 1], 1.0)], 0.0, dirs.clone()).is_err());
        assert!(InequalitySpec::new(
            vec![term(vec![1, 1], 1.0), term(vec![1, 1], 2.0)],
            2.0,
            dirs.clone()
        )
        .is_err());
        assert!(InequalitySpec::new(vec![term(vec![1, 1], 1.0)], 2.0, vec![]).is_err());
    }

    #[test]
    fn chsh_settings() {
        let zero_angle = chsh_spec(0.0);
        for obs in zero_angle.directions() {
            for d in obs {
                assert_eq!(*d, MeasurementDirection::z());
            }
        }
        let zero = pure_to_density(&PureState::zero(2).unwrap());
        let v = evaluate_inequality(&zero_angle, &zero).unwrap();
        assert_abs_diff_eq!(v.value, 2.0, epsilon = 1e-15);

        let spec = chsh_spec(22.5_f64.to_radians());
        let polar: Vec<f64> = spec
            .directions()
            .iter()
            .flatten()
            .map(|d| d.theta.to_degrees())
            .collect();
        for (p, e) in polar.iter().zip([0.0, 90.0, 45.0, 135.0]) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-12);
        }
        let v = evaluate_inequality(&chsh_spec(67.5_f64.to_radians()), &cat()).unwrap();
        assert_abs_diff_eq!(v.value.abs(), 2.0 * SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_values() {
        assert_abs_diff_eq!(chsh_qm_prediction(0.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chsh_qm_prediction(PI / 8.0), 2.0 * SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(chsh_qm_prediction(PI / 4.0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn shot_examples() {
        let certain = OutcomeDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let s = sample_shots(&certain, 1234, 7).unwrap();
        assert_eq!(s.e_estimate, 1.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.counts, vec![1234, 0, 0, 0]);

        // Binomial bound: σ(E) = 1/√n ≈ 0.00316 for n = 10⁵, so 0.02 is > 6σ.
        let flat = OutcomeDistribution::new(vec![0.25; 4]).unwrap();
        let s = sample_shots(&flat, 100_000, 11).unwrap();
        assert!(s.e_estimate.abs() < 0.02);
        assert_eq!(s.counts.iter().sum::<u64>(), 100_000);

        let parity = joint_probabilities(&cat(), &[MeasurementDirection::z(); 2]).unwrap();
        let s = sample_shots(&parity, 10_000, 3).unwrap();
        assert_eq!(s.e_estimate, 1.0);
        assert_eq!(s.counts[1] + s.counts[2], 0);

        assert!(sample_shots(&flat, 0, 1).is_err());
        assert_eq!(sample_shots(&flat, 1, 1).unwrap().std_error, 0.0);
    }

    #[test]
    fn shots_are_deterministic_per_seed() {
        let dist = OutcomeDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(sample_shots(&dist, 5000, 42).unwrap(), sample_shots(&dist, 5000, 42).unwrap());
        assert_ne!(sample_shots(&dist, 5000, 42).unwrap(), sample_shots(&dist, 5000, 43).unwrap());
    }

    #[test]
    fn document_round_trip() {
        let spec = chsh_spec(0.3);
        let doc = InequalityDocument::from(&spec);
        let json = serde_json::to_string(&doc).unwrap();
        let back: InequalityDocument = serde_json::from_str(&json).unwrap();
        let rebuilt = InequalitySpec::try_from(back).unwrap();
        assert_eq!(rebuilt.terms(), spec.terms());
        for (a, b) in rebuilt.directions().iter().flatten().zip(spec.directions().iter().flatten()) {
            assert_abs_diff_eq!(a.theta, b.theta, epsilon = 1e-15);
        }
        let bad = r#"{"classical_bound": 2, "directions": [[{"theta_deg": 0}]], "terms": [{"settings": [2], "coefficient": 1}]}"#;
        let doc: InequalityDocument = serde_json::from_str(bad).unwrap();
        assert!(InequalitySpec::try_from(doc).is_err());
    }
}
