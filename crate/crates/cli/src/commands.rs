//! Subcommand implementations.

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use hound_core::coefficients::{run_identity_suite, GainTable};
use hound_core::continuous::{
    closed_form_errors, error_bound, fit_constants_from_state, forcing_integral,
    integrate_continuous, ContinuousRun, ErrorBoundParams,
};
use hound_core::signals::variance_slope;
use hound_core::{
    Differentiator, DifferentiatorConfig, Error as CoreError, Sample, SignalSpec, Update,
};

use crate::args::{ExtractArgs, GenerateArgs, OracleArgs, OutputFormat, RunArgs, VarianceArgs};
use crate::input::{ColumnRef, Columns, Row, SampleReader};
use crate::output::{Format, RowWriter};
use crate::signal_config::{parse_float_list, parse_harmonic, parse_signal_config};

/// Failures are split by exit code: bad input (2) versus a check that ran
/// and failed (1).
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Validation(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(msg) | CliError::Validation(msg) => msg,
        }
    }
}

fn input_err<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Input(err.to_string())
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>, CliError> {
    if path == "-" {
        Ok(Box::new(io::BufReader::new(io::stdin())))
    } else {
        let file = fs::File::open(path)
            .map_err(|e| CliError::Input(format!("cannot open {path}: {e}")))?;
        Ok(Box::new(io::BufReader::new(file)))
    }
}

fn open_output(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        let file = fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot create {path}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn load_signal(path: &Path) -> Result<SignalSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let (spec, _) = parse_signal_config(&text).map_err(CliError::Input)?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EmitSet {
    errors: bool,
    coeffs: bool,
    extrapolation: bool,
}

fn parse_emit(list: &str) -> Result<EmitSet, CliError> {
    let mut set = EmitSet {
        errors: false,
        coeffs: false,
        extrapolation: false,
    };
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            // always present in rows; accepted for symmetry
            "estimates" | "residual" => {}
            "errors" => set.errors = true,
            "coeffs" => set.coeffs = true,
            "extrapolation" => set.extrapolation = true,
            other => {
                return Err(CliError::Input(format!(
                "unknown emit item `{other}` (estimates, residual, errors, coeffs, extrapolation)"
            )))
            }
        }
    }
    Ok(set)
}

fn parse_extrapolation_range(spec: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(
            "--extrapolate needs start:end:step".to_string(),
        ));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad number `{p}` in --extrapolate")))
        })
        .collect::<Result<_, _>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 || end < start {
        return Err(CliError::Input(
            "--extrapolate range must be well-ordered with positive step".to_string(),
        ));
    }
    Ok((start, end, step))
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let emit = parse_emit(&args.emit)?;
    let truth = match &args.truth {
        Some(path) => Some(load_signal(path)?),
        None => None,
    };
    if emit.errors && truth.is_none() {
        return Err(CliError::Input(
            "--emit errors needs --truth <signal config>".to_string(),
        ));
    }
    let extrapolate = match &args.extrapolate {
        Some(spec) => Some(parse_extrapolation_range(spec)?),
        None => {
            if emit.extrapolation {
                return Err(CliError::Input(
                    "--emit extrapolation needs --extrapolate start:end:step".to_string(),
                ));
            }
            None
        }
    };

    // Initial state: fresh (order required) or restored from a snapshot.
    let mut state: Option<Differentiator> = match &args.resume_from {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let mut restored = Differentiator::from_snapshot(&text).map_err(input_err)?;
            restored.set_skip_repeats(args.skip_repeats);
            if let Some(order) = args.order {
                if order != restored.order() {
                    return Err(CliError::Input(format!(
                        "--order {order} conflicts with snapshot order {}",
                        restored.order()
                    )));
                }
            }
            Some(restored)
        }
        None => None,
    };
    let order = match (&state, args.order) {
        (Some(diff), _) => diff.order(),
        (None, Some(order)) => order,
        (None, None) => {
            return Err(CliError::Input(
                "--order is required unless --resume-from is given".to_string(),
            ))
        }
    };

    // In explicit-dt mode timestamps are synthesized; only the value
    // column is read (the last entry of the --columns spec).
    let columns = match args.dt {
        Some(_) => {
            let value = value_column(&args.columns)?;
            Columns {
                t: value.clone(),
                f: value,
            }
        }
        None => Columns::parse(&args.columns).map_err(CliError::Input)?,
    };
    let reader = open_input(&args.input)?;
    let sink = open_output(&args.output)?;
    let format = match args.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::JsonLines => Format::JsonLines,
    };
    let mut writer = RowWriter::new(sink, format, order, emit.errors, emit.coeffs);

    let gains_checksum = match &state {
        Some(diff) => diff.gains_checksum(),
        None => GainTable::new(order).map_err(input_err)?.checksum(),
    };

    let mut rows = SampleReader::new(reader, columns);
    let mut accepted: u64 = 0;
    let mut skipped: u64 = 0;
    let mut wrote_meta = false;
    let resumed = state.is_some();

    let io_err = |e: io::Error| CliError::Input(format!("write failed: {e}"));

    loop {
        let row = rows.next_row().map_err(CliError::Input)?;
        let Some(row) = row else { break };
        let (line, t_raw, f) = match row {
            Row::Sample { line, t, f } => (line, t, f),
            Row::Skipped { line, reason } => {
                skipped += 1;
                eprintln!("line {line}: skipped ({reason})");
                continue;
            }
        };
        // Explicit-dt mode synthesizes timestamps and ignores the t column.
        let t = match args.dt {
            Some(dt) => match &state {
                Some(diff) => diff.t() + dt,
                None => args.t0,
            },
            None => t_raw,
        };

        let outcome = match state.as_mut() {
            None => {
                let mut config = DifferentiatorConfig::new(order);
                config = config.skip_repeats(args.skip_repeats);
                match Differentiator::new(config, Sample::new(t, f)) {
                    Ok(diff) => {
                        state = Some(diff);
                        Some(0.0) // init row: no prediction, zero residual
                    }
                    Err(err) => {
                        skipped += 1;
                        eprintln!("line {line}: skipped ({err})");
                        None
                    }
                }
            }
            Some(diff) => match diff.update(Sample::new(t, f)) {
                Ok(Update::Applied { residual }) => Some(residual),
                Ok(Update::SkippedRepeat) => {
                    skipped += 1;
                    eprintln!("line {line}: skipped (repeated value)");
                    None
                }
                Err(
                    err @ (CoreError::NonMonotonicTime { .. }
                    | CoreError::UpdateAtZeroTime
                    | CoreError::NonFiniteSample { .. }
                    | CoreError::NonFiniteState { .. }),
                ) => {
                    skipped += 1;
                    eprintln!("line {line}: skipped ({err})");
                    None
                }
                Err(err) => return Err(input_err(err)),
            },
        };

        let Some(residual) = outcome else { continue };
        let diff = state.as_ref().expect("state exists after acceptance");
        accepted += 1;
        if !wrote_meta {
            writer.metadata(diff.t(), gains_checksum).map_err(io_err)?;
            wrote_meta = true;
        }
        let errors = truth.as_ref().filter(|_| emit.errors).map(|signal| {
            let truth_vec: Vec<f64> = (0..order).map(|m| signal.derivative(diff.t(), m)).collect();
            diff.state_error(&truth_vec).expect("lengths match")
        });
        let coeffs = if emit.coeffs {
            Some(diff.taylor_model().poly_coefficients())
        } else {
            None
        };
        writer
            .row(
                diff.t(),
                diff.estimates(),
                residual,
                errors.as_deref(),
                coeffs.as_deref(),
            )
            .map_err(io_err)?;
    }

    let Some(diff) = state.as_ref() else {
        if skipped > 0 {
            return Err(CliError::Input(format!(
                "no usable samples ({skipped} rows skipped)"
            )));
        }
        eprintln!("no samples");
        let mut empty = writer;
        empty.metadata(args.t0, gains_checksum).map_err(io_err)?;
        empty.summary(0, 0, None, None).map_err(io_err)?;
        empty.flush().map_err(io_err)?;
        return Ok(());
    };
    if accepted == 0 && !resumed {
        return Err(CliError::Input("no usable samples".to_string()));
    }
    if !wrote_meta {
        // Resumed run whose input added no rows: still emit the header.
        writer.metadata(diff.t(), gains_checksum).map_err(io_err)?;
    }

    let model = diff.taylor_model();
    let final_coeffs = model.poly_coefficients();
    let table: Option<Vec<(f64, Vec<f64>)>> = extrapolate.map(|(start, end, step)| {
        let mut rows = Vec::new();
        let mut tau = start;
        while tau <= end + 0.5 * step {
            let values: Vec<f64> = (0..order)
                .map(|m| model.eval_derivative(m, tau).expect("valid index"))
                .collect();
            rows.push((tau, values));
            tau += step;
        }
        rows
    });
    writer
        .summary(accepted, skipped, Some(&final_coeffs), table.as_deref())
        .map_err(io_err)?;
    writer.flush().map_err(io_err)?;

    if let Some(path) = &args.save_snapshot {
        fs::write(path, diff.snapshot_string())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let (mut spec, mut range) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            parse_signal_config(&text).map_err(CliError::Input)?
        }
        None => (
            SignalSpec {
                poly: Vec::new(),
                harmonics: Vec::new(),
                noise_sigma: 0.0,
                seed: 0,
            },
            Default::default(),
        ),
    };
    if let Some(poly) = &args.poly {
        spec.poly = parse_float_list(poly).map_err(CliError::Input)?;
    }
    for h in &args.harmonic {
        spec.harmonics
            .push(parse_harmonic(h).map_err(CliError::Input)?);
    }
    if let Some(sigma) = args.sigma {
        if sigma < 0.0 {
            return Err(CliError::Input("sigma must be nonnegative".to_string()));
        }
        spec.noise_sigma = sigma;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(t) = args.t_start {
        range.t_start = Some(t);
    }
    if let Some(t) = args.t_end {
        range.t_end = Some(t);
    }
    if let Some(dt) = args.dt {
        range.dt = Some(dt);
    }

    let t_start = range.t_start.unwrap_or(0.0);
    let t_end = range
        .t_end
        .ok_or_else(|| CliError::Input("t_end is required (flag or config)".to_string()))?;
    let dt = range.dt.unwrap_or(1.0);
    if !dt.is_finite() || dt <= 0.0 || t_end < t_start {
        return Err(CliError::Input(
            "need t_end >= t_start and dt > 0".to_string(),
        ));
    }

    let mut out = open_output(&args.output)?;
    let io_err = |e: io::Error| CliError::Input(format!("write failed: {e}"));
    writeln!(
        out,
        "# hound generate sigma={} seed={} dt={dt}",
        spec.noise_sigma, spec.seed
    )
    .map_err(io_err)?;
    writeln!(out, "t,f").map_err(io_err)?;
    let steps = ((t_end - t_start) / dt).round() as u64;
    for index in 0..=steps {
        let t = t_start + index as f64 * dt;
        let value = spec.sample_at(t, index);
        writeln!(out, "{t},{value}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

pub fn verify_identities(max_order: usize) -> Result<(), CliError> {
    if max_order == 0 {
        return Err(CliError::Input(
            "--max-order must be at least 1".to_string(),
        ));
    }
    let outcomes = run_identity_suite(max_order).map_err(input_err)?;
    let mut failures = 0usize;
    for outcome in &outcomes {
        println!(
            "order {:>2}: {:<28} {}",
            outcome.order,
            outcome.identity,
            if outcome.passed { "PASS" } else { "FAIL" }
        );
        if !outcome.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CliError::Validation(format!(
            "{failures} identity checks failed"
        )));
    }
    println!("all identities hold exactly for orders 1..={max_order}");
    Ok(())
}

pub fn extract_coeffs(args: &ExtractArgs) -> Result<(), CliError> {
    let columns = match args.dt {
        Some(_) => {
            let value = value_column(&args.columns)?;
            Columns {
                t: value.clone(),
                f: value,
            }
        }
        None => Columns::parse(&args.columns).map_err(CliError::Input)?,
    };
    let reader = open_input(&args.input)?;
    let mut rows = SampleReader::new(reader, columns);
    let mut state: Option<Differentiator> = None;
    let mut accepted = 0u64;
    let mut skipped = 0u64;
    while let Some(row) = rows.next_row().map_err(CliError::Input)? {
        let (line, t_raw, f) = match row {
            Row::Sample { line, t, f } => (line, t, f),
            Row::Skipped { line, reason } => {
                skipped += 1;
                eprintln!("line {line}: skipped ({reason})");
                continue;
            }
        };
        let t = match args.dt {
            Some(dt) => state.as_ref().map(|d| d.t() + dt).unwrap_or(args.t0),
            None => t_raw,
        };
        match state.as_mut() {
            None => {
                match Differentiator::new(DifferentiatorConfig::new(args.order), Sample::new(t, f))
                {
                    Ok(diff) => {
                        state = Some(diff);
                        accepted += 1;
                    }
                    Err(err) => {
                        skipped += 1;
                        eprintln!("line {line}: skipped ({err})");
                    }
                }
            }
            Some(diff) => match diff.update(Sample::new(t, f)) {
                Ok(_) => accepted += 1,
                Err(err) => {
                    skipped += 1;
                    eprintln!("line {line}: skipped ({err})");
                }
            },
        }
    }
    let Some(diff) = state else {
        return Err(CliError::Input("no usable samples".to_string()));
    };
    println!(
        "# coeffs order={} accepted={accepted} skipped={skipped}",
        args.order
    );
    for (j, k) in diff.taylor_model().poly_coefficients().iter().enumerate() {
        println!("{j},{k}");
    }
    Ok(())
}

pub fn oracle_check(args: &OracleArgs) -> Result<(), CliError> {
    let mut failures = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        println!("{}  {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            failures.push(name.to_string());
        }
    };

    // 1. RK4 against the analytic order-1 solution on a ramp.
    {
        let gains = GainTable::new(1).map_err(input_err)?;
        let signal = SignalSpec::polynomial(&[0.0, 1.0]);
        let run = ContinuousRun {
            gains: &gains,
            t0: 1.0,
            step: 1e-3,
            initial: vec![0.0],
            signal: &signal,
        };
        let traj = integrate_continuous(&run, 10.0).map_err(input_err)?;
        let mut worst = 0.0f64;
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let analytic = t - (t * t + 1.0) / (2.0 * t);
            worst = worst.max((state[0] - analytic).abs());
        }
        check(
            "rk4-vs-analytic-ramp",
            worst <= 1e-8,
            format!("max |rk4 - analytic| = {worst:.3e} (limit 1e-8)"),
        );
    }

    // 2. Closed-form error solution against RK4 on a tracked polynomial
    //    and on the lowest untracked power.
    {
        let order = args.order;
        let gains = GainTable::new(order).map_err(input_err)?;
        let tracked: Vec<f64> = (0..order).map(|j| 1.0 + j as f64).collect();
        let mut untracked = vec![0.0; order + 1];
        untracked[order] = 1.0;
        for (label, coeffs) in [("tracked-poly", tracked), ("degree-n-poly", untracked)] {
            let signal = SignalSpec::polynomial(&coeffs);
            let run = ContinuousRun {
                gains: &gains,
                t0: 1.0,
                step: 1e-3,
                initial: {
                    let mut z = vec![0.0; order];
                    z[0] = signal.clean_value(1.0);
                    z
                },
                signal: &signal,
            };
            let traj = integrate_continuous(&run, args.t_end).map_err(input_err)?;
            let e0: Vec<f64> = (0..order)
                .map(|m| traj.states[0][m] - signal.derivative(1.0, m))
                .collect();
            let constants = fit_constants_from_state(&gains, 1.0, &e0).map_err(input_err)?;
            let mut worst_rel = 0.0f64;
            let stride = (traj.times.len() / 50).max(1);
            for idx in (stride..traj.times.len()).step_by(stride) {
                let t = traj.times[idx];
                let integrals: Vec<f64> = (1..=order)
                    .map(|d| forcing_integral(&signal, order, d, 1.0, t))
                    .collect();
                let predicted =
                    closed_form_errors(&gains, &constants, t, &integrals).map_err(input_err)?;
                for (m, pred) in predicted.iter().enumerate() {
                    let observed = traj.states[idx][m] - signal.derivative(t, m);
                    let rel = (pred - observed).abs() / observed.abs().max(1e-9);
                    worst_rel = worst_rel.max(rel);
                }
            }
            check(
                &format!("closed-form-vs-rk4 ({label})"),
                worst_rel <= 1e-6,
                format!("max relative gap {worst_rel:.3e} (limit 1e-6)"),
            );
        }
    }

    // 3. Discretization order: halving the sample step at least halves
    //    (x1.8) the gap between the recurrence and the fine RK4 path.
    {
        let gains = GainTable::new(3).map_err(input_err)?;
        let signal = SignalSpec::polynomial(&[1.0, 2.0, 3.0]);
        let t0 = 1.0;
        let run = ContinuousRun {
            gains: &gains,
            t0,
            step: 5e-4,
            initial: vec![signal.clean_value(t0), 0.0, 0.0],
            signal: &signal,
        };
        let reference = integrate_continuous(&run, 30.0).map_err(input_err)?;
        let discrepancy = |stride: usize| -> Result<f64, CliError> {
            let mut diff = Differentiator::new(
                DifferentiatorConfig::new(3).initial_estimates(run.initial.clone()),
                Sample::new(t0, signal.clean_value(t0)),
            )
            .map_err(input_err)?;
            let mut worst = 0.0f64;
            let mut idx = stride;
            while idx < reference.times.len() {
                let t = reference.times[idx];
                diff.update(Sample::new(t, signal.clean_value(t)))
                    .map_err(input_err)?;
                for (a, b) in diff.estimates().iter().zip(&reference.states[idx]) {
                    worst = worst.max((a - b).abs());
                }
                idx += stride;
            }
            Ok(worst)
        };
        let coarse = discrepancy(40)?;
        let fine = discrepancy(20)?;
        let ratio = coarse / fine;
        check(
            "discretization-order",
            ratio >= 1.8,
            format!("gap {coarse:.3e} at h=0.02 vs {fine:.3e} at h=0.01, ratio {ratio:.2}"),
        );
    }

    // 4. Lipschitz bound on a pure harmonic.
    {
        let gains = GainTable::new(2).map_err(input_err)?;
        let signal = SignalSpec::harmonic(1.0, 1.0, 0.0);
        let t0 = 1.0;
        let run = ContinuousRun {
            gains: &gains,
            t0,
            step: 2e-3,
            initial: vec![signal.clean_value(t0), 0.0],
            signal: &signal,
        };
        let traj = integrate_continuous(&run, 200.0).map_err(input_err)?;
        let e0 = [
            traj.states[0][0] - signal.clean_value(t0),
            traj.states[0][1] - signal.derivative(t0, 1),
        ];
        let constants = fit_constants_from_state(&gains, t0, &e0).map_err(input_err)?;
        let params = ErrorBoundParams {
            lipschitz: 1.0,
            c_abs: constants.iter().map(|c| c.abs()).collect(),
            t0,
        };
        let mut min_margin = f64::INFINITY;
        for (t, state) in traj.times.iter().zip(&traj.states) {
            for m in 1..=2usize {
                let err = (state[m - 1] - signal.derivative(*t, m - 1)).abs();
                let bound = error_bound(&gains, &params, m, *t).map_err(input_err)?;
                min_margin = min_margin.min(bound - err);
            }
        }
        check(
            "lipschitz-bound",
            min_margin >= -1e-6,
            format!("min (bound - |e|) = {min_margin:.4}"),
        );
    }

    if failures.is_empty() {
        println!("oracle checks passed");
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "oracle checks failed: {}",
            failures.join(", ")
        )))
    }
}

pub fn variance_check(args: &VarianceArgs) -> Result<(), CliError> {
    let poly = parse_float_list(&args.poly).map_err(CliError::Input)?;
    let grid = parse_float_list(&args.grid).map_err(CliError::Input)?;
    let spec = SignalSpec {
        poly,
        harmonics: Vec::new(),
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    let mut failures = 0usize;
    for m in 1..=args.order {
        let report =
            variance_slope(&spec, args.order, m, args.runs, &grid).map_err(|e| match e {
                CoreError::InsufficientRuns { .. } | CoreError::SignalDegreeTooHigh { .. } => {
                    CliError::Input(e.to_string())
                }
                other => CliError::Input(other.to_string()),
            })?;
        let target = -((2 * m - 1) as f64);
        match report.slope {
            None => {
                println!("m={m}: variance degenerate (sigma = 0?), slope undefined");
                failures += 1;
            }
            Some(slope) => {
                let passed = (slope - target).abs() <= args.tolerance && !report.transient_warning;
                println!(
                    "{}  m={m}: slope {slope:.3}, target {target} +/- {}{}",
                    if passed { "PASS" } else { "FAIL" },
                    args.tolerance,
                    if report.transient_warning {
                        " (warning: variance not monotone over tail of grid)"
                    } else {
                        ""
                    }
                );
                if !passed {
                    failures += 1;
                }
            }
        }
    }
    if failures > 0 {
        Err(CliError::Validation(format!(
            "{failures} variance checks failed"
        )))
    } else {
        Ok(())
    }
}

/// Columns helper for explicit-dt mode: value column only.
pub fn value_column(spec: &str) -> Result<ColumnRef, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    let token = match parts.len() {
        1 => parts[0],
        2 => parts[1], // (t, f) spec given; timestamps are synthesized
        _ => {
            return Err(CliError::Input(format!(
                "--columns `{spec}` has too many entries"
            )))
        }
    };
    Ok(match token.trim().parse::<usize>() {
        Ok(idx) => ColumnRef::Index(idx),
        Err(_) => ColumnRef::Name(token.trim().to_string()),
    })
}
