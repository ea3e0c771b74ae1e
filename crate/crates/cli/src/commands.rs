//! One function per subcommand, each producing the bytes to emit.

use bellsim_core::bell::{evaluate_inequality, InequalityDocument};
use bellsim_core::densmat::{pure_to_density, validate, ValidityReport};
use bellsim_core::lrhvm::{
    bulk_chsh_curve, default_relaxation, lrhvm_applicable, polarization_sweep, prepared_state,
    pure_chsh_curve, BulkSample,
};
use bellsim_core::pps::fidelity_delta;
use bellsim_core::readout::{measure_pauli_expectations, tomography_reconstruct, tomography_settings, ShotPlan};
use bellsim_core::{
    chsh_spec, joint_probabilities, sample_shots, EnsembleRun, InequalitySpec, PureState, RelaxationParams,
};
use serde_json::{json, Value};

use crate::config::{CommandKind, Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_num, json_bytes, matrix_json, provenance_json, round_num, round_vec, Table};

/// Runs the configured command and returns the artifact bytes.
pub fn run(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    match cfg.command {
        CommandKind::ChshSweep => chsh_sweep(cfg),
        CommandKind::BellEval => bell_eval(cfg),
        CommandKind::PpsPrep => pps_prep(cfg),
        CommandKind::Tomography => tomography(cfg),
        CommandKind::PolarizationSweep => polarization(cfg),
        CommandKind::LrhvmCompare => lrhvm_compare(cfg),
    }
}

fn emit(cfg: &RunConfig, table: Table, json_body: Value) -> CliResult<Vec<u8>> {
    let provenance = cfg.provenance();
    match cfg.format {
        Format::Csv => table.to_csv(&provenance),
        Format::Json => {
            let mut doc = json!({
                "command": cfg.command.name(),
                "provenance": provenance_json(&provenance),
            });
            if let (Value::Object(doc), Value::Object(body)) = (&mut doc, json_body) {
                doc.extend(body);
            }
            Ok(json_bytes(&doc))
        }
    }
}

fn flag(b: bool) -> String {
    b.to_string()
}

fn theta_radians(cfg: &RunConfig) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let degrees = cfg.theta.points()?;
    let radians = degrees.iter().map(|d| d.to_radians()).collect();
    Ok((degrees, radians))
}

fn two_qubit_target(cfg: &RunConfig) -> CliResult<PureState> {
    let target = cfg.state.pure_state()?;
    if target.num_qubits() != 2 {
        return Err(CliError::validation(format!(
            "{} needs a two-qubit state, got {} qubits",
            cfg.command.name(),
            target.num_qubits()
        )));
    }
    Ok(target)
}

fn validity_json(v: &ValidityReport) -> Value {
    json!({
        "hermiticity_residue": round_num(v.hermiticity_residue),
        "trace_deviation": round_num(v.trace_deviation),
        "min_eigenvalue": round_num(v.min_eigenvalue),
        "passed": v.passed,
    })
}

fn applicability_json(epsilon: f64, n: usize) -> CliResult<Value> {
    let a = lrhvm_applicable(epsilon, n)?;
    Ok(json!({
        "applicable": a.applicable,
        "bound": round_num(a.bound),
        "margin": round_num(a.margin),
    }))
}

fn chsh_sweep(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let target = two_qubit_target(cfg)?;
    let (degrees, radians) = theta_radians(cfg)?;
    let mut run = EnsembleRun::new(cfg.state.label(), target.clone(), cfg.epsilon, radians.clone()).with_route(cfg.route);
    if let Some(params) = &cfg.relaxation {
        run = run.with_relaxation(params.clone());
    }
    let sweep = bulk_chsh_curve(&run)?;
    let qm = pure_chsh_curve(&target, &radians)?;

    let mut table = Table::new(&["theta_deg", "chsh_normalized", "chsh_raw", "qm_prediction", "violated"]);
    let mut records = Vec::with_capacity(degrees.len());
    for ((deg, rec), q) in degrees.iter().zip(&sweep.records).zip(&qm) {
        table.push(vec![
            fmt_num(*deg),
            fmt_num(rec.chsh_normalized),
            fmt_num(rec.chsh_raw),
            fmt_num(*q),
            flag(rec.violated),
        ]);
        records.push(json!({
            "theta_deg": round_num(*deg),
            "chsh_normalized": round_num(rec.chsh_normalized),
            "chsh_raw": round_num(rec.chsh_raw),
            "qm_prediction": round_num(*q),
            "violated": rec.violated,
            "violated_raw": rec.violated_raw,
            "correlations_normalized": round_vec(&rec.correlations_normalized),
            "correlations_raw": round_vec(&rec.correlations_raw),
        }));
    }
    let applicability = lrhvm_applicable(cfg.epsilon, 2)?;
    table.result("lrhvm_applicable", flag(applicability.applicable));
    table.result("separability_bound", fmt_num(applicability.bound));
    emit(
        cfg,
        table,
        json!({
            "lrhvm": applicability_json(cfg.epsilon, 2)?,
            "records": records,
        }),
    )
}

fn load_inequality(cfg: &RunConfig) -> CliResult<InequalitySpec> {
    let Some(path) = &cfg.inequality else {
        return Ok(chsh_spec(cfg.theta_star.to_radians()));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read inequality {}: {e}", path.display())))?;
    let doc: InequalityDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("malformed inequality document: {e}")))?;
    Ok(InequalitySpec::try_from(doc)?)
}

fn bell_eval(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let target = cfg.state.pure_state()?;
    let n = target.num_qubits();
    let spec = load_inequality(cfg)?;
    if spec.num_observers() != n {
        return Err(CliError::validation(format!(
            "inequality has {} observers but the state has {n} qubits",
            spec.num_observers()
        )));
    }
    let relaxation = checked_relaxation(cfg, n)?;
    let sample = BulkSample::new(&target, cfg.epsilon, relaxation.as_deref(), cfg.route)?;
    let (normalized, raw) = sample.evaluate(&spec)?;
    let pure = evaluate_inequality(&spec, &pure_to_density(&target))?;

    let sampled = match cfg.shots {
        None => None,
        Some(shots) => Some(
            spec.terms()
                .iter()
                .enumerate()
                .map(|(k, term)| {
                    let dist = joint_probabilities(&sample.rho, &spec.term_directions(term))?;
                    sample_shots(&dist, shots, cfg.seed.wrapping_add(k as u64))
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };

    let mut table = Table::new(&[
        "term",
        "settings",
        "coefficient",
        "qm_pure",
        "bulk_normalized",
        "bulk_raw",
        "shot_estimate",
        "shot_std_error",
    ]);
    let mut terms = Vec::new();
    for (k, term) in spec.terms().iter().enumerate() {
        let settings = term.settings.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
        let shot = sampled.as_ref().map(|s| &s[k]);
        table.push(vec![
            (k + 1).to_string(),
            settings,
            fmt_num(term.coefficient),
            fmt_num(pure.per_term[k].correlation),
            fmt_num(normalized.per_term[k].correlation),
            fmt_num(raw.per_term[k].correlation),
            shot.map_or(String::new(), |s| fmt_num(s.e_estimate)),
            shot.map_or(String::new(), |s| fmt_num(s.std_error)),
        ]);
        terms.push(json!({
            "settings": term.settings,
            "coefficient": round_num(term.coefficient),
            "qm_pure": round_num(pure.per_term[k].correlation),
            "bulk_normalized": round_num(normalized.per_term[k].correlation),
            "bulk_raw": round_num(raw.per_term[k].correlation),
            "shots": shot.map(|s| json!({
                "counts": s.counts,
                "estimate": round_num(s.e_estimate),
                "std_error": round_num(s.std_error),
            })),
        }));
    }

    let shot_total = sampled.as_ref().map(|samples| {
        let value: f64 = samples
            .iter()
            .zip(spec.terms())
            .map(|(s, t)| t.coefficient * s.e_estimate)
            .sum();
        let se = samples
            .iter()
            .zip(spec.terms())
            .map(|(s, t)| (t.coefficient * s.std_error).powi(2))
            .sum::<f64>()
            .sqrt();
        (value, se)
    });

    let applicability = lrhvm_applicable(cfg.epsilon, n)?;
    table.result("bound", fmt_num(spec.classical_bound()));
    table.result("value_qm_pure", fmt_num(pure.value));
    table.result("value_normalized", fmt_num(normalized.value));
    table.result("value_raw", fmt_num(raw.value));
    table.result("violated", flag(normalized.violated));
    table.result("violated_raw", flag(raw.violated));
    if let Some((value, se)) = shot_total {
        table.result("value_shots", fmt_num(value));
        table.result("std_error_shots", fmt_num(se));
    }
    table.result("lrhvm_applicable", flag(applicability.applicable));

    emit(
        cfg,
        table,
        json!({
            "inequality": serde_json::to_value(InequalityDocument::from(&spec)).expect("document serializes"),
            "bound": round_num(spec.classical_bound()),
            "value_qm_pure": round_num(pure.value),
            "value_normalized": round_num(normalized.value),
            "value_raw": round_num(raw.value),
            "violated": normalized.violated,
            "violated_raw": raw.violated,
            "shots": shot_total.map(|(v, se)| json!({ "value": round_num(v), "std_error": round_num(se) })),
            "lrhvm": applicability_json(cfg.epsilon, n)?,
            "terms": terms,
        }),
    )
}

fn checked_relaxation(cfg: &RunConfig, n: usize) -> CliResult<Option<Vec<RelaxationParams>>> {
    match &cfg.relaxation {
        Some(params) if params.len() != n => Err(CliError::validation(format!(
            "relax lists {} qubits but the state has {n}",
            params.len()
        ))),
        other => Ok(other.clone()),
    }
}

fn pps_prep(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let target = cfg.state.pure_state()?;
    let n = target.num_qubits();
    let relaxation = checked_relaxation(cfg, n)?;
    let (rho, ideal) = prepared_state(&target, cfg.epsilon, relaxation.as_deref(), cfg.route)?;
    let delta = fidelity_delta(rho.matrix(), &ideal)?;
    let validity = validate(rho.matrix());
    if !validity.passed {
        return Err(CliError::internal("prepared state failed density-matrix validation"));
    }

    let mut table = Table::new(&["row", "col", "re", "im"]);
    let m = rho.matrix();
    for i in 0..m.rows() {
        for (j, z) in m.row(i).iter().enumerate() {
            table.push(vec![i.to_string(), j.to_string(), fmt_num(z.re), fmt_num(z.im)]);
        }
    }
    table.result("num_qubits", n.to_string());
    table.result("delta_vs_ideal", fmt_num(delta));
    table.result("min_eigenvalue", fmt_num(validity.min_eigenvalue));

    emit(
        cfg,
        table,
        json!({
            "num_qubits": n,
            "epsilon": round_num(cfg.epsilon),
            "matrix": matrix_json(m),
            "delta_vs_ideal": round_num(delta),
            "validity": validity_json(&validity),
        }),
    )
}

fn tomography(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let target = cfg.state.pure_state()?;
    let n = target.num_qubits();
    let relaxation = checked_relaxation(cfg, n)?;
    let (rho, ideal) = prepared_state(&target, cfg.epsilon, relaxation.as_deref(), cfg.route)?;
    let plan = cfg.shots.map(|shots| ShotPlan { shots, seed: cfg.seed });
    let expectations = measure_pauli_expectations(&rho, plan)?;
    let result = tomography_reconstruct(&expectations)?;
    let error = (&result.rho_reconstructed - rho.matrix()).frobenius_norm();
    let delta = fidelity_delta(&result.rho_reconstructed, &ideal)?;
    let settings: Vec<String> = tomography_settings(n).iter().map(|s| s.label()).collect();

    let mut table = Table::new(&["pauli", "expectation"]);
    for (label, value) in &expectations {
        table.push(vec![label.clone(), fmt_num(*value)]);
    }
    table.result("settings", settings.join(";"));
    table.result("frobenius_error", fmt_num(error));
    table.result("delta_vs_ideal", fmt_num(delta));
    table.result("positive", flag(result.validity.is_positive()));

    let expectations_json: serde_json::Map<String, Value> = expectations
        .iter()
        .map(|(k, v)| (k.clone(), round_num(*v)))
        .collect();
    emit(
        cfg,
        table,
        json!({
            "num_qubits": n,
            "settings": settings,
            "expectations": expectations_json,
            "matrix": matrix_json(&result.rho_reconstructed),
            "frobenius_error": round_num(error),
            "delta_vs_ideal": round_num(delta),
            "validity": validity_json(&result.validity),
        }),
    )
}

fn polarization(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let target = two_qubit_target(cfg)?;
    let eps = cfg.eps.points()?;
    let sweep = polarization_sweep(&target, &eps, cfg.theta_star.to_radians())?;

    let mut table = Table::new(&[
        "record",
        "epsilon",
        "chsh_raw",
        "chsh_normalized",
        "violated",
        "lrhvm_applicable",
    ]);
    let mut records = Vec::new();
    for rec in &sweep.records {
        let applicable = lrhvm_applicable(rec.epsilon, 2)?.applicable;
        table.push(vec![
            "point".into(),
            fmt_num(rec.epsilon),
            fmt_num(rec.chsh_raw),
            fmt_num(rec.chsh_normalized),
            flag(rec.violated_raw),
            flag(applicable),
        ]);
        records.push(json!({
            "epsilon": round_num(rec.epsilon),
            "chsh_raw": round_num(rec.chsh_raw),
            "chsh_normalized": round_num(rec.chsh_normalized),
            "violated": rec.violated_raw,
            "lrhvm_applicable": applicable,
        }));
    }
    let threshold = sweep.threshold_epsilon;
    table.push(vec![
        "threshold".into(),
        threshold.map_or(String::new(), fmt_num),
        fmt_num(bellsim_core::bell::CHSH_BOUND),
        String::new(),
        String::new(),
        String::new(),
    ]);
    table.result("threshold_epsilon", threshold.map_or("none".into(), fmt_num));

    emit(
        cfg,
        table,
        json!({
            "theta_star_deg": round_num(cfg.theta_star),
            "threshold_epsilon": threshold.map(round_num),
            "records": records,
        }),
    )
}

fn lrhvm_compare(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let target = two_qubit_target(cfg)?;
    let (degrees, radians) = theta_radians(cfg)?;
    let qm = pure_chsh_curve(&target, &radians)?;
    let run = EnsembleRun::new(cfg.state.label(), target, cfg.epsilon, radians).with_route(cfg.route);
    let relaxation = cfg.relaxation.clone().unwrap_or_else(|| {
        default_relaxation()
            .into_iter()
            .map(|p| RelaxationParams { duration: cfg.duration, ..p })
            .collect()
    });
    let bulk = bulk_chsh_curve(&run)?;
    let relaxed = bulk_chsh_curve(&run.clone().with_relaxation(relaxation))?;

    let mut table = Table::new(&["theta_deg", "qm_pure", "bulk_normalized", "bulk_relaxed", "abs_diff"]);
    let mut records = Vec::new();
    let mut max_diff = 0.0_f64;
    for (k, deg) in degrees.iter().enumerate() {
        let b = bulk.records[k].chsh_normalized;
        let r = relaxed.records[k].chsh_normalized;
        let diff = (qm[k] - b).abs();
        max_diff = max_diff.max(diff);
        table.push(vec![fmt_num(*deg), fmt_num(qm[k]), fmt_num(b), fmt_num(r), fmt_num(diff)]);
        records.push(json!({
            "theta_deg": round_num(*deg),
            "qm_pure": round_num(qm[k]),
            "bulk_normalized": round_num(b),
            "bulk_relaxed": round_num(r),
            "abs_diff": round_num(diff),
        }));
    }
    table.result("max_abs_diff", fmt_num(max_diff));

    emit(
        cfg,
        table,
        json!({
            "max_abs_diff": round_num(max_diff),
            "records": records,
        }),
    )
}
