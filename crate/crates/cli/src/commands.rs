//! One function per subcommand. Each writes its artifacts into `out`.

use std::sync::Arc;

use num_complex::Complex64;
use paramosc::characteristic::{
    solve_standard_pair, CharacteristicForm, CharacteristicSolution, SolverOptions,
};
use paramosc::ermakov::{ErmakovSolution, HermiteGaussianSpec};
use paramosc::field::{Grid, WaveField};
use paramosc::ince::{classify_periodicity_with, to_ince_form};
use paramosc::models::{ModelSpec, OscillatorModel, OscillatorParams, PumpSpec};
use paramosc::oracles::{crank_nicolson_run, OracleConfig};
use paramosc::propagator::{
    greens_coefficients, greens_kernel, propagate_gaussian_analytic, propagate_quadrature,
};
use paramosc::validation::{run_suite, Check, Suite};
use serde::Serialize;

use crate::config::{PropagationMethod, RunConfig};
use crate::output::{float, Output};
use crate::CliError;

/// Result of one command: whether every check passed (always true outside `validate`).
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
}

impl Outcome {
    fn ok(summary: Vec<String>) -> Self {
        Self {
            passed: true,
            summary,
        }
    }
}

fn model_spec(cfg: &RunConfig) -> Result<&ModelSpec, CliError> {
    cfg.model
        .as_ref()
        .ok_or_else(|| CliError::Config("model: missing field `model`".into()))
}

fn model(cfg: &RunConfig) -> Result<OscillatorModel, CliError> {
    Ok(model_spec(cfg)?.build()?)
}

fn options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        rtol: cfg.solve.rtol,
        atol: cfg.solve.atol,
        mu1_init: cfg.solve.mu1_init,
        max_step: None,
    }
}

fn solve(
    cfg: &RunConfig,
    model: OscillatorModel,
    t_max: f64,
) -> Result<Arc<CharacteristicSolution>, CliError> {
    let form = CharacteristicForm::new(model);
    Ok(Arc::new(solve_standard_pair(&form, t_max, &options(cfg))?))
}

fn positive_times(section: &str, times: &[f64]) -> Result<f64, CliError> {
    if times.is_empty() {
        return Err(CliError::Config(format!(
            "{section}.times: must not be empty"
        )));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Config(format!(
            "{section}.times: times must be positive, got {t}"
        )));
    }
    Ok(times.iter().copied().fold(0.0, f64::max))
}

fn field_rows(field: &WaveField) -> Vec<Vec<String>> {
    field
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, z)| {
            vec![
                float(field.grid.x(i)),
                float(z.re),
                float(z.im),
                float(z.norm_sqr()),
            ]
        })
        .collect()
}

const FIELD_HEADER: [&str; 4] = [
    "x [length]",
    "re_psi [length^-1/2]",
    "im_psi [length^-1/2]",
    "abs2_psi [length^-1]",
];

pub fn solve_mu(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let s = &cfg.solve;
    if !(s.t_max > 0.0 && s.t_max.is_finite()) {
        return Err(CliError::Config(format!(
            "solve.t_max: must be positive, got {}",
            s.t_max
        )));
    }
    if s.samples < 2 {
        return Err(CliError::Config(
            "solve.samples: need at least 2 points".into(),
        ));
    }
    let sol = solve(cfg, model(cfg)?, s.t_max)?;
    let mut rows = Vec::with_capacity(s.samples);
    for k in 0..s.samples {
        let t = s.t_max * k as f64 / (s.samples - 1) as f64;
        let p = sol.at(t)?;
        rows.push(vec![
            float(t),
            float(p.mu0),
            float(p.dmu0),
            float(p.mu1),
            float(p.dmu1),
            float(p.lambda_f),
            float(sol.wronskian_residual(t)?),
        ]);
    }
    let header = [
        "t [time]",
        "mu0 [length^2]",
        "dmu0 [length^2/time]",
        "mu1 [1]",
        "dmu1 [1/time]",
        "lambda_f [1]",
        "wronskian_residual [length^2/time]",
    ];
    let csv = out.csv("mu.csv", &header, rows)?;

    #[derive(Serialize)]
    struct Zeros<'a> {
        t_max: f64,
        /// Zeros of μ₀ on (0, t_max]: the caustics of the propagator.
        mu0_zeros: &'a [f64],
    }
    let json = out.json(
        "mu_zeros.json",
        &Zeros {
            t_max: s.t_max,
            mu0_zeros: sol.zeros(),
        },
    )?;
    Ok(Outcome::ok(vec![
        csv.display().to_string(),
        json.display().to_string(),
    ]))
}

/// Constant-pump parameters, the only models with an Ince form.
fn constant_pump(spec: &ModelSpec) -> Result<OscillatorParams, CliError> {
    match spec {
        ModelSpec::Dpo {
            m,
            omega,
            lambda,
            hbar,
        } => Ok(OscillatorParams::new(*m, *omega, *lambda, *hbar)?),
        ModelSpec::Raiford {
            m,
            omega,
            hbar,
            pump: PumpSpec::Constant { amplitude },
        } => Ok(OscillatorParams::new(*m, *omega, *amplitude, *hbar)?),
        _ => Err(CliError::Module(paramosc::Error::UnsupportedModel(
            "periodicity classification needs a constant pump".into(),
        ))),
    }
}

pub fn classify_ince(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    if cfg.classify.xi_max < 0 {
        return Err(CliError::Config(
            "classify.xi_max: must be non-negative".into(),
        ));
    }
    let form = to_ince_form(&constant_pump(model_spec(cfg)?)?)?;
    let report = classify_periodicity_with(&form, cfg.classify.xi_max);
    let path = out.json("periodicity.json", &report)?;
    Ok(Outcome::ok(vec![
        path.display().to_string(),
        format!(
            "pi_pair_possible={} two_pi_pair_possible={}",
            report.pi_pair_possible, report.two_pi_pair_possible
        ),
    ]))
}

pub fn green(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let t_max = positive_times("green", &cfg.green.times)?;
    let sol = solve(cfg, model(cfg)?, t_max)?;
    let coefficients = cfg
        .green
        .times
        .iter()
        .map(|&t| greens_coefficients(&sol, t))
        .collect::<paramosc::Result<Vec<_>>>()?;
    let mut summary = vec![out
        .json("coefficients.json", &coefficients)?
        .display()
        .to_string()];
    if let Some(slice) = &cfg.green.kernel {
        slice
            .grid
            .validate()
            .map_err(|e| CliError::Config(format!("green.kernel.grid: {e}")))?;
        let mut rows = Vec::new();
        for pc in &coefficients {
            for x in slice.grid.points() {
                let g = greens_kernel(pc, x, slice.y);
                rows.push(vec![
                    float(pc.t),
                    float(x),
                    float(slice.y),
                    float(g.re),
                    float(g.im),
                ]);
            }
        }
        let header = [
            "t [time]",
            "x [length]",
            "y [length]",
            "re_G [1/length]",
            "im_G [1/length]",
        ];
        summary.push(out.csv("kernel.csv", &header, rows)?.display().to_string());
    }
    Ok(Outcome::ok(summary))
}

#[derive(Serialize)]
struct Snapshot {
    index: usize,
    t: f64,
    file: String,
    norm: f64,
}

pub fn propagate(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let p = &cfg.propagate;
    let t_max = positive_times("propagate", &p.times)?;
    p.grid
        .validate()
        .map_err(|e| CliError::Config(format!("propagate.grid: {e}")))?;
    let spec = HermiteGaussianSpec::new(p.initial.epsilon, p.initial.delta, p.initial.n)
        .map_err(|e| CliError::Config(format!("propagate.initial: {e}")))?;
    if p.method == PropagationMethod::Analytic && spec.n != 0 {
        return Err(CliError::Config(
            "propagate.initial.n: the analytic method needs n = 0".into(),
        ));
    }
    let model = model(cfg)?;
    let chi = WaveField::from_fn(p.grid, 0.0, |x| spec.eval(x))?;

    let fields: Vec<WaveField> = match p.method {
        PropagationMethod::Quadrature | PropagationMethod::Analytic => {
            let sol = solve(cfg, model, t_max)?;
            p.times
                .iter()
                .map(|&t| {
                    let pc = greens_coefficients(&sol, t)?;
                    if p.method == PropagationMethod::Analytic {
                        propagate_gaussian_analytic(&pc, spec.epsilon, spec.delta)?
                            .sample(p.grid, t)
                    } else {
                        propagate_quadrature(&pc, &chi)
                    }
                })
                .collect::<paramosc::Result<_>>()?
        }
        PropagationMethod::CrankNicolson => {
            if p.times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Config(
                    "propagate.times: Crank-Nicolson needs strictly increasing times".into(),
                ));
            }
            let oracle = OracleConfig::new(p.grid, p.dt)
                .map_err(|e| CliError::Config(format!("propagate.dt: {e}")))?;
            let mut current = chi.clone();
            let mut fields = Vec::new();
            for &t in &p.times {
                current = crank_nicolson_run(&model, &current, t, &oracle, |_| Ok(()))?.field;
                fields.push(current.clone());
            }
            fields
        }
    };

    let mut snapshots = vec![Snapshot {
        index: 0,
        t: 0.0,
        file: "field_000.csv".into(),
        norm: chi.norm(),
    }];
    out.csv("field_000.csv", &FIELD_HEADER, field_rows(&chi))?;
    for (k, f) in fields.iter().enumerate() {
        let file = format!("field_{:03}.csv", k + 1);
        out.csv(&file, &FIELD_HEADER, field_rows(f))?;
        snapshots.push(Snapshot {
            index: k + 1,
            t: f.t,
            file,
            norm: f.norm(),
        });
    }
    let path = out.json("fields.json", &snapshots)?;
    Ok(Outcome::ok(vec![
        path.display().to_string(),
        format!("{} snapshots", snapshots.len()),
    ]))
}

fn complex_matrix(rows: &[Vec<Complex64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = rows
        .iter()
        .map(|r| r.iter().map(|z| z.re).collect())
        .collect();
    let im = rows
        .iter()
        .map(|r| r.iter().map(|z| z.im).collect())
        .collect();
    (re, im)
}

pub fn eigenstates(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    let e = &cfg.eigenstates;
    if e.times.is_empty() || e.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(CliError::Config(
            "eigenstates.times: need non-negative finite times".into(),
        ));
    }
    let grid: Grid = e.grid;
    grid.validate()
        .map_err(|err| CliError::Config(format!("eigenstates.grid: {err}")))?;
    let spec = HermiteGaussianSpec::new(e.epsilon, e.delta, 0)
        .map_err(|err| CliError::Config(format!("eigenstates: {err}")))?;
    let t_max = e.times.iter().copied().fold(0.0, f64::max).max(1e-6);
    let es = ErmakovSolution::from_gaussian(solve(cfg, model(cfg)?, t_max)?, &spec, e.c0)?;
    let xs = grid.points();

    #[derive(Serialize)]
    struct EigenSnapshot {
        index: usize,
        t: f64,
        file: String,
        mu: f64,
        phase: f64,
        invariant_expectation: Vec<f64>,
        gram_max_deviation: f64,
        gram_re: Vec<Vec<f64>>,
        gram_im: Vec<Vec<f64>>,
    }
    #[derive(Serialize)]
    struct Report {
        c0: f64,
        mu_init: f64,
        dmu_init: f64,
        eigenvalues: Vec<f64>,
        snapshots: Vec<EigenSnapshot>,
    }

    let mut header = vec!["x [length]".to_string()];
    for n in 0..=e.n_max {
        header.push(format!("re_psi{n} [length^-1/2]"));
        header.push(format!("im_psi{n} [length^-1/2]"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut snapshots = Vec::new();
    for (k, &t) in e.times.iter().enumerate() {
        let fields: Vec<WaveField> = (0..=e.n_max)
            .map(|n| WaveField::new(grid, es.wavefunction(n, t, &xs)?, t))
            .collect::<paramosc::Result<_>>()?;
        let mut gram = Vec::new();
        let mut deviation: f64 = 0.0;
        for (m, a) in fields.iter().enumerate() {
            let mut row = Vec::new();
            for (n, b) in fields.iter().enumerate() {
                let z = a.inner(b)?;
                let target = if m == n { 1.0 } else { 0.0 };
                deviation = deviation.max((z - target).norm());
                row.push(z);
            }
            gram.push(row);
        }
        let invariant_expectation = fields
            .iter()
            .map(|f| Ok(f.inner(&es.apply_invariant(f)?)?.re))
            .collect::<paramosc::Result<_>>()?;
        let rows = (0..xs.len()).map(|i| {
            let mut row = vec![float(xs[i])];
            for f in &fields {
                row.push(float(f.amplitudes[i].re));
                row.push(float(f.amplitudes[i].im));
            }
            row
        });
        let file = format!("eigenstates_{k:03}.csv");
        out.csv(&file, &header, rows)?;
        let (gram_re, gram_im) = complex_matrix(&gram);
        snapshots.push(EigenSnapshot {
            index: k,
            t,
            file,
            mu: es.mu(t)?.0,
            phase: es.phase(t)?,
            invariant_expectation,
            gram_max_deviation: deviation,
            gram_re,
            gram_im,
        });
    }
    let (mu_init, dmu_init) = es.initial_data();
    let report = Report {
        c0: es.c0(),
        mu_init,
        dmu_init,
        eigenvalues: (0..=e.n_max).map(|n| es.eigenvalue(n)).collect(),
        snapshots,
    };
    let path = out.json("gram.json", &report)?;
    Ok(Outcome::ok(vec![path.display().to_string()]))
}

pub fn validate(cfg: &RunConfig, out: &Output) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct SuiteReport {
        suite: Suite,
        criterion: usize,
        title: &'static str,
        passed: bool,
        checks: Vec<Check>,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        passed: bool,
        tolerances: &'a paramosc::validation::ValidationTolerances,
        suites: Vec<SuiteReport>,
    }

    let mut suites = Vec::new();
    let mut summary = Vec::new();
    for suite in cfg.validate.selected() {
        let checks = run_suite(suite, &cfg.validate.tolerances)?;
        let passed = checks.iter().all(|c| c.passed);
        summary.push(format!(
            "{} criterion {:>2} {}",
            if passed { "PASS" } else { "FAIL" },
            suite.criterion(),
            suite.title()
        ));
        suites.push(SuiteReport {
            suite,
            criterion: suite.criterion(),
            title: suite.title(),
            passed,
            checks,
        });
    }
    let passed = suites.iter().all(|s| s.passed);
    let path = out.json(
        "validation.json",
        &Report {
            passed,
            tolerances: &cfg.validate.tolerances,
            suites,
        },
    )?;
    summary.push(path.display().to_string());
    Ok(Outcome { passed, summary })
}
