//! Bulk-ensemble simulation of the NMR correlation measurement, the
//! separability gate for local hidden-variable descriptions, and
//! polarization sweeps.
//!
//! The bulk pipeline simulates every step as an operator-sum map: prepare a
//! pseudo-pure state, optionally relax, rotate each spin onto its readout
//! direction, dephase with a gradient, read single-spin line amplitudes, and
//! normalize them against a `|0…0⟩` reference processed the same way.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{chsh_spec, InequalityEvaluation, InequalitySpec, MeasurementDirection, CHSH_BOUND};
use crate::channels::{apply_relaxation, RelaxationParams};
use crate::densmat::{ComplexMatrix, DensityMatrix, PureState, ONE};
use crate::error::{Error, Result};
use crate::pps::{
    cat_from_zero_pps, make_pps, prepare_from_zero_pps, spatial_average, thermal_config_for_epsilon,
    PseudoPureState,
};
use crate::readout::{normalize_by_reference, read_populations, spectral_amplitudes, SpectrumModel};

/// Total duration of one experimental run, seconds.
pub const DEFAULT_EXPERIMENT_DURATION: f64 = 0.015;

/// Relaxation times of the two spins of the reference sample (seconds).
pub fn default_relaxation() -> Vec<RelaxationParams> {
    vec![
        RelaxationParams {
            t1: 5.0,
            t2: 0.2,
            duration: DEFAULT_EXPERIMENT_DURATION,
        },
        RelaxationParams {
            t1: 15.0,
            t2: 0.3,
            duration: DEFAULT_EXPERIMENT_DURATION,
        },
    ]
}

/// `1 / (1 + 2^{N−1})`: pseudo-pure states at or below this polarization are separable.
pub fn separability_bound(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("separability bound needs at least one qubit".into()));
    }
    if n > 1000 {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + 2f64.powi(n as i32 - 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub applicable: bool,
    /// `bound − ε`; non-negative exactly when applicable.
    pub margin: f64,
    pub bound: f64,
}

/// Whether a local hidden-variable description of the ensemble exists.
pub fn lrhvm_applicable(epsilon: f64, n: usize) -> Result<Applicability> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "polarization must lie in (0, 1], got {epsilon}"
        )));
    }
    let bound = separability_bound(n)?;
    Ok(Applicability {
        applicable: epsilon <= bound,
        margin: bound - epsilon,
        bound,
    })
}

/// How the pseudo-pure state is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrepRoute {
    /// Gate sequence from the `|0…0⟩` pseudo-pure state for two qubits,
    /// direct construction otherwise.
    #[default]
    Auto,
    /// `(1 − ε)/2^N · 1 + ε|ψ⟩⟨ψ|` written down directly.
    Direct,
    /// Two-qubit thermal state, spatial averaging, then the gate sequence.
    /// Needs `ε < 1/15` to stay in the high-temperature regime.
    Thermal,
}

/// Prepares the pseudo-pure state of `target` along `route`.
pub fn prepare(target: &PureState, epsilon: f64, route: PrepRoute) -> Result<PseudoPureState> {
    let n = target.num_qubits();
    let route = match route {
        PrepRoute::Auto if n == 2 => PrepRoute::Auto,
        PrepRoute::Auto => PrepRoute::Direct,
        other => other,
    };
    let start = match route {
        PrepRoute::Direct => return make_pps(target, epsilon),
        PrepRoute::Auto => make_pps(&PureState::zero(2)?, epsilon)?,
        PrepRoute::Thermal => {
            if n != 2 {
                return Err(Error::InvalidArgument(
                    "the thermal preparation route is defined for two qubits".into(),
                ));
            }
            spatial_average(&thermal_config_for_epsilon(epsilon)?)?
        }
    };
    if target == &PureState::cat(2)? {
        cat_from_zero_pps(&start)
    } else {
        prepare_from_zero_pps(&start, target)
    }
}

/// Relaxation of the polarized fraction: `(1 − ε)/d·1 + ε·Λ(|ψ⟩⟨ψ|)`.
///
/// The maximally mixed background stands in for the high-temperature
/// equilibrium and is left in place.
pub fn relax_pps(pps: &PseudoPureState, params: &[RelaxationParams]) -> Result<DensityMatrix> {
    let rho = pps.rho();
    let n = rho.num_qubits();
    let relaxed = apply_relaxation(rho, params)?;
    let mixed = DensityMatrix::maximally_mixed(n)?;
    let drift = &apply_relaxation(&mixed, params)?.into_matrix() - mixed.matrix();
    // Λ(ρ) − (1 − ε)·(Λ(1/d) − 1/d)
    let mut m = relaxed.into_matrix();
    m.add_assign_scaled(&drift, -ONE * (1.0 - pps.epsilon()));
    debug_assert!((m.trace().re - 1.0).abs() < 1e-12);
    Ok(DensityMatrix::from_trusted(m))
}

/// A prepared sample, ready for readout.
#[derive(Debug, Clone)]
pub struct BulkSample {
    pub rho: DensityMatrix,
    /// Line amplitudes of spin 0 for the `|0…0⟩` reference.
    pub reference: SpectrumModel,
    pub epsilon: f64,
}

impl BulkSample {
    pub fn new(
        target: &PureState,
        epsilon: f64,
        relaxation: Option<&[RelaxationParams]>,
        route: PrepRoute,
    ) -> Result<Self> {
        let n = target.num_qubits();
        let process = |psi: &PureState| -> Result<DensityMatrix> {
            let pps = prepare(psi, epsilon, route)?;
            match relaxation {
                Some(params) => relax_pps(&pps, params),
                None => Ok(pps.into_rho()),
            }
        };
        let rho = process(target)?;
        let reference_rho = process(&PureState::zero(n)?)?;
        let z = vec![MeasurementDirection::z(); n];
        let reference = spectral_amplitudes(&read_populations(&reference_rho, &z)?, 0)?;
        Ok(Self {
            rho,
            reference,
            epsilon,
        })
    }

    /// Raw and reference-normalized correlation for one set of directions.
    pub fn correlation(&self, dirs: &[MeasurementDirection]) -> Result<BulkCorrelation> {
        let lines = spectral_amplitudes(&read_populations(&self.rho, dirs)?, 0)?;
        let normalized = normalize_by_reference(&lines, &self.reference)?;
        Ok(BulkCorrelation {
            raw: lines.correlation(),
            normalized: normalized.correlation(),
        })
    }

    /// Evaluates every term of `spec` through the readout path.
    pub fn evaluate(&self, spec: &InequalitySpec) -> Result<(InequalityEvaluation, InequalityEvaluation)> {
        if spec.num_observers() != self.rho.num_qubits() {
            return Err(Error::dims(
                format!("{} qubits", spec.num_observers()),
                format!("{} qubits", self.rho.num_qubits()),
            ));
        }
        let correlations = spec
            .terms()
            .iter()
            .map(|t| self.correlation(&spec.term_directions(t)))
            .collect::<Result<Vec<_>>>()?;
        let normalized: Vec<f64> = correlations.iter().map(|c| c.normalized).collect();
        let raw: Vec<f64> = correlations.iter().map(|c| c.raw).collect();
        Ok((
            InequalityEvaluation::from_correlations(spec, &normalized)?,
            InequalityEvaluation::from_correlations(spec, &raw)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkCorrelation {
    /// `Σ (Π s_j)·P(s)` on the full ensemble; scales with ε.
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub label: String,
    pub target: PureState,
    pub epsilon: f64,
    /// One entry per qubit.
    pub relaxation: Option<Vec<RelaxationParams>>,
    /// Radians in `[0, π/2]`.
    pub theta_grid: Vec<f64>,
    pub route: PrepRoute,
}

impl EnsembleRun {
    pub fn new(label: impl Into<String>, target: PureState, epsilon: f64, theta_grid: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            target,
            epsilon,
            relaxation: None,
            theta_grid,
            route: PrepRoute::Auto,
        }
    }

    pub fn with_relaxation(mut self, params: Vec<RelaxationParams>) -> Self {
        self.relaxation = Some(params);
        self
    }

    pub fn with_route(mut self, route: PrepRoute) -> Self {
        self.route = route;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_grid.is_empty() {
            return Err(Error::InvalidArgument("theta grid is empty".into()));
        }
        let upper = std::f64::consts::FRAC_PI_2 + 1e-12;
        if let Some(t) = self.theta_grid.iter().find(|t| !(**t >= -1e-12 && **t <= upper)) {
            return Err(Error::InvalidArgument(format!(
                "theta {} deg lies outside [0, 90] deg",
                t.to_degrees()
            )));
        }
        if self.target.num_qubits() != 2 {
            return Err(Error::InvalidArgument(format!(
                "CHSH curves need a two-qubit target, got {} qubits",
                self.target.num_qubits()
            )));
        }
        if let Some(params) = &self.relaxation {
            if params.len() != self.target.num_qubits() {
                return Err(Error::dims(
                    format!("{} relaxation entries", self.target.num_qubits()),
                    params.len(),
                ));
            }
            for p in params {
                p.validate()?;
            }
        }
        Ok(())
    }
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub label: String,
    pub epsilon: f64,
    /// Radians.
    pub theta: f64,
    pub relaxed: bool,
    pub correlations_normalized: Vec<f64>,
    pub correlations_raw: Vec<f64>,
    pub chsh_normalized: f64,
    pub chsh_raw: f64,
    /// `|chsh_normalized| > 2`
    pub violated: bool,
    /// `|chsh_raw| > 2`
    pub violated_raw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<ExperimentRecord>,
    /// Polarization at which `|chsh_raw|` crosses the classical bound, if bracketed.
    pub threshold_epsilon: Option<f64>,
}

fn chsh_record(sample: &BulkSample, label: &str, theta: f64, relaxed: bool) -> Result<ExperimentRecord> {
    let (normalized, raw) = sample.evaluate(&chsh_spec(theta))?;
    Ok(ExperimentRecord {
        label: label.to_string(),
        epsilon: sample.epsilon,
        theta,
        relaxed,
        correlations_normalized: normalized.per_term.iter().map(|t| t.correlation).collect(),
        correlations_raw: raw.per_term.iter().map(|t| t.correlation).collect(),
        chsh_normalized: normalized.value,
        chsh_raw: raw.value,
        violated: normalized.violated,
        violated_raw: raw.violated,
    })
}

/// CHSH curve over `run.theta_grid` through the bulk readout pipeline.
pub fn bulk_chsh_curve(run: &EnsembleRun) -> Result<SweepResult> {
    run.validate()?;
    let sample = BulkSample::new(&run.target, run.epsilon, run.relaxation.as_deref(), run.route)?;
    let relaxed = run.relaxation.is_some();
    let records = run
        .theta_grid
        .par_iter()
        .map(|&theta| chsh_record(&sample, &run.label, theta, relaxed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        records,
        threshold_epsilon: None,
    })
}

/// CHSH on the pure target state via the trace path, for comparison.
pub fn pure_chsh_curve(target: &PureState, theta_grid: &[f64]) -> Result<Vec<f64>> {
    let rho = crate::densmat::pure_to_density(target);
    theta_grid
        .par_iter()
        .map(|&theta| Ok(crate::bell::evaluate_inequality(&chsh_spec(theta), &rho)?.value))
        .collect()
}

/// Raw and normalized CHSH at `theta_star` for each polarization, plus the
/// interpolated polarization where `|raw|` crosses the classical bound.
pub fn polarization_sweep(
    target: &PureState,
    eps_grid: &[f64],
    theta_star: f64,
) -> Result<SweepResult> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidArgument("polarization grid is empty".into()));
    }
    if let Some(e) = eps_grid.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "polarization {e} lies outside (0, 1]"
        )));
    }
    let records = eps_grid
        .par_iter()
        .map(|&eps| {
            let sample = BulkSample::new(target, eps, None, PrepRoute::Auto)?;
            chsh_record(&sample, "", theta_star, false)
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold_epsilon = crossing(
        &records.iter().map(|r| (r.epsilon, r.chsh_raw.abs())).collect::<Vec<_>>(),
        CHSH_BOUND,
    );
    Ok(SweepResult {
        records,
        threshold_epsilon,
    })
}

/// First `x` at which the piecewise-linear curve through `points` (sorted by
/// `x`) reaches `level`.
fn crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(&(x, _)) = sorted.iter().find(|(_, y)| *y == level) {
        return Some(x);
    }
    sorted.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if (y0 - level) * (y1 - level) < 0.0 {
            Some(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
        } else {
            None
        }
    })
}

/// The state a run actually prepares (route plus optional relaxation) next to
/// the ideal pseudo-pure matrix it should match.
pub fn prepared_state(
    target: &PureState,
    epsilon: f64,
    relaxation: Option<&[RelaxationParams]>,
    route: PrepRoute,
) -> Result<(DensityMatrix, ComplexMatrix)> {
    let pps = prepare(target, epsilon, route)?;
    let ideal = make_pps(target, epsilon)?.into_rho().into_matrix();
    let rho = match relaxation {
        Some(params) => relax_pps(&pps, params)?,
        None => pps.into_rho(),
    };
    Ok((rho, ideal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{chsh_qm_prediction, evaluate_inequality};
    use crate::densmat::validate;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn grid(points: usize) -> Vec<f64> {
        (0..points)
            .map(|i| (90.0 * i as f64 / (points - 1) as f64).to_radians())
            .collect()
    }

    #[test]
    fn bound_examples() {
        assert_eq!(separability_bound(1).unwrap(), 0.5);
        assert_eq!(separability_bound(2).unwrap(), 1.0 / 3.0);
        assert_eq!(separability_bound(12).unwrap(), 1.0 / 2049.0);
        assert!(separability_bound(0).is_err());
    }

    #[test]
    fn applicability_examples() {
        let a = lrhvm_applicable(1e-6, 2).unwrap();
        assert!(a.applicable);
        assert_abs_diff_eq!(a.margin, 1.0 / 3.0 - 1e-6, epsilon = 1e-15);
        assert_abs_diff_eq!(a.margin, 0.333332, epsilon = 1e-6);
        assert!(lrhvm_applicable(1.0 / 3.0, 2).unwrap().applicable);
        let a = lrhvm_applicable(0.916, 2).unwrap();
        assert!(!a.applicable);
        assert!(a.margin < 0.0);
        assert!(lrhvm_applicable(0.0, 2).is_err());
    }

    #[test]
    fn prep_routes_agree() {
        for psi in [PureState::cat(2).unwrap(), PureState::singlet(), PureState::uniform(2).unwrap()] {
            let direct = make_pps(&psi, 0.01).unwrap();
            for route in [PrepRoute::Auto, PrepRoute::Direct, PrepRoute::Thermal] {
                let pps = prepare(&psi, 0.01, route).unwrap();
                assert!(pps.rho().matrix().max_abs_diff(direct.rho().matrix()) < 1e-12);
            }
        }
        assert!(prepare(&PureState::cat(2).unwrap(), 0.5, PrepRoute::Thermal).is_err());
        assert!(prepare(&PureState::cat(3).unwrap(), 0.5, PrepRoute::Thermal).is_err());
        let three = prepare(&PureState::cat(3).unwrap(), 0.5, PrepRoute::Auto).unwrap();
        assert!(three.rho().matrix().max_abs_diff(make_pps(&PureState::cat(3).unwrap(), 0.5).unwrap().rho().matrix()) < 1e-15);
    }

    #[test]
    fn cat_curve_follows_closed_form() {
        for eps in [1e-6, 1.0] {
            let run = EnsembleRun::new("cat", PureState::cat(2).unwrap(), eps, grid(181));
            let result = bulk_chsh_curve(&run).unwrap();
            for r in &result.records {
                assert_abs_diff_eq!(r.chsh_normalized, chsh_qm_prediction(r.theta), epsilon = 1e-9);
                assert_abs_diff_eq!(r.chsh_raw, eps * chsh_qm_prediction(r.theta), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn product_state_curve() {
        let run = EnsembleRun::new("zero", PureState::zero(2).unwrap(), 1e-3, grid(91));
        for r in bulk_chsh_curve(&run).unwrap().records {
            let t = r.theta;
            let oracle = (2.0 * t).cos() * (1.0 + (4.0 * t).cos()) + (4.0 * t).cos() * (6.0 * t).cos()
                - (6.0 * t).cos();
            assert_abs_diff_eq!(r.chsh_normalized, oracle, epsilon = 1e-9);
            assert!(r.chsh_normalized.abs() <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn singlet_curve() {
        let run = EnsembleRun::new("singlet", PureState::singlet(), 1e-6, grid(37));
        for r in bulk_chsh_curve(&run).unwrap().records {
            assert_abs_diff_eq!(r.chsh_normalized, -chsh_qm_prediction(r.theta), epsilon = 1e-9);
        }
    }

    #[test]
    fn run_validation() {
        let bad_grid = EnsembleRun::new("cat", PureState::cat(2).unwrap(), 0.1, vec![]);
        assert!(bulk_chsh_curve(&bad_grid).is_err());
        let out_of_range = EnsembleRun::new("cat", PureState::cat(2).unwrap(), 0.1, vec![2.0]);
        assert!(bulk_chsh_curve(&out_of_range).is_err());
        let wrong_relax = EnsembleRun::new("cat", PureState::cat(2).unwrap(), 0.1, vec![0.1])
            .with_relaxation(default_relaxation()[..1].to_vec());
        assert!(bulk_chsh_curve(&wrong_relax).is_err());
    }

    #[test]
    fn relaxed_pps_keeps_background() {
        let psi = PureState::cat(2).unwrap();
        let params = default_relaxation();
        let pure = relax_pps(&make_pps(&psi, 1.0).unwrap(), &params).unwrap();
        for eps in [1e-6, 0.3] {
            let relaxed = relax_pps(&make_pps(&psi, eps).unwrap(), &params).unwrap();
            let expected = &ComplexMatrix::identity(4).scale_real((1.0 - eps) / 4.0)
                + &pure.matrix().scale_real(eps);
            assert!(relaxed.matrix().max_abs_diff(&expected) < 1e-15);
            assert!(validate(relaxed.matrix()).passed);
        }
    }

    #[test]
    fn sweep_threshold() {
        let eps: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
        let theta = 22.5_f64.to_radians();
        let result = polarization_sweep(&PureState::cat(2).unwrap(), &eps, theta).unwrap();
        assert_abs_diff_eq!(result.threshold_epsilon.unwrap(), 1.0 / SQRT_2, epsilon = 1e-9);
        let last = result.records.last().unwrap();
        assert_abs_diff_eq!(last.chsh_raw, 2.0 * SQRT_2, epsilon = 1e-12);
        assert!(last.violated_raw);
        let pure = evaluate_inequality(&chsh_spec(theta), &crate::densmat::pure_to_density(&PureState::cat(2).unwrap()))
            .unwrap()
            .value;
        for r in &result.records {
            assert_abs_diff_eq!(r.chsh_raw, r.epsilon * pure, epsilon = 1e-12);
        }
        assert!(polarization_sweep(&PureState::cat(2).unwrap(), &[], theta).is_err());
        assert!(polarization_sweep(&PureState::cat(2).unwrap(), &[1.5], theta).is_err());
        let below = polarization_sweep(&PureState::cat(2).unwrap(), &[0.1, 0.2], theta).unwrap();
        assert_eq!(below.threshold_epsilon, None);
    }

    #[test]
    fn crossing_interpolates() {
        assert_eq!(crossing(&[(0.0, 0.0), (1.0, 4.0)], 2.0), Some(0.5));
        assert_eq!(crossing(&[(1.0, 4.0), (0.0, 0.0)], 2.0), Some(0.5));
        assert_eq!(crossing(&[(0.0, 0.0), (0.5, 2.0), (1.0, 4.0)], 2.0), Some(0.5));
        assert_eq!(crossing(&[(0.0, 0.0), (1.0, 1.0)], 2.0), None);
    }
}
