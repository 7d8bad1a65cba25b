//! Validation battery: each suite measures residuals against the closed-form
//! and PDE oracles and compares them with configurable limits.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::characteristic::{
    solve_standard_pair_on, CharacteristicForm, CharacteristicSolution, SolverOptions,
};
use crate::ermakov::{ErmakovSolution, HermiteGaussianSpec};
use crate::error::Result;
use crate::field::{Grid, WaveField};
use crate::ince::{classify_periodicity, fourier_trial, to_ince_form, InceForm, SeriesClass};
use crate::models::{
    CoefficientFn, CoefficientModel, GenericCoefficients, OscillatorModel, OscillatorParams,
    PumpSchedule,
};
use crate::oracles::{self, OracleConfig};
use crate::propagator::{self, greens_coefficients, greens_kernel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    SpecialCase,
    GreenCoefficients,
    Riccati,
    Wronskian,
    HarmonicLimit,
    Cauchy,
    Unitarity,
    Eigenstates,
    Pinney,
    Periodicity,
    FourierTrial,
    Consistency,
    Gauge,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::SpecialCase,
        Suite::GreenCoefficients,
        Suite::Riccati,
        Suite::Wronskian,
        Suite::HarmonicLimit,
        Suite::Cauchy,
        Suite::Unitarity,
        Suite::Eigenstates,
        Suite::Pinney,
        Suite::Periodicity,
        Suite::FourierTrial,
        Suite::Consistency,
        Suite::Gauge,
    ];

    /// Position in the acceptance list, starting at 1.
    pub fn criterion(self) -> usize {
        Self::ALL.iter().position(|&s| s == self).expect("listed") + 1
    }

    pub fn title(self) -> &'static str {
        match self {
            Suite::SpecialCase => "special-case ODE reproduction",
            Suite::GreenCoefficients => "Green's-function coefficient identity",
            Suite::Riccati => "Riccati invariant",
            Suite::Wronskian => "Abel/Wronskian invariant",
            Suite::HarmonicLimit => "harmonic-limit anchor",
            Suite::Cauchy => "Cauchy-problem cross-validation",
            Suite::Unitarity => "unitarity",
            Suite::Eigenstates => "eigenstate suite",
            Suite::Pinney => "Pinney/Ermakov residual",
            Suite::Periodicity => "periodicity classification",
            Suite::FourierTrial => "Fourier-trial convergence",
            Suite::Consistency => "consistency triangle",
            Suite::Gauge => "C0 gauge invariance",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// measured ≤ limit
    Max,
    /// measured ≥ limit
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn new(
        suite: Suite,
        name: impl Into<String>,
        measured: f64,
        bound: Bound,
        limit: f64,
    ) -> Self {
        let passed = match bound {
            Bound::Max => measured <= limit,
            Bound::Min => measured >= limit,
        };
        Self {
            suite,
            name: name.into(),
            measured,
            limit,
            bound,
            passed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationTolerances {
    pub special_case_mu: f64,
    pub green_coefficients: f64,
    pub riccati: f64,
    pub wronskian: f64,
    pub mehler: f64,
    pub cauchy: f64,
    pub norm: f64,
    pub crank_nicolson_step_drift: f64,
    pub schrodinger: f64,
    pub invariant_expectation: f64,
    pub gram: f64,
    pub pinney: f64,
    pub polynomial_minimum: f64,
    pub fourier_converged: f64,
    pub fourier_floor: f64,
    pub consistency: f64,
    pub gauge: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self {
            special_case_mu: 1e-8,
            green_coefficients: 1e-8,
            riccati: 1e-5,
            wronskian: 1e-8,
            mehler: 1e-10,
            cauchy: 1e-4,
            norm: 1e-6,
            crank_nicolson_step_drift: 1e-10,
            schrodinger: 1e-4,
            invariant_expectation: 1e-6,
            gram: 1e-8,
            pinney: 1e-5,
            polynomial_minimum: 1e-12,
            fourier_converged: 1e-8,
            fourier_floor: 1e-3,
            consistency: 1e-6,
            gauge: 1e-8,
        }
    }
}

/// Half-width of the window around each μ₀ zero excluded from the Riccati check.
pub const CAUSTIC_EXCLUSION: f64 = 0.2;
/// Time step of the Riccati and Schrödinger difference quotients.
pub const RICCATI_STEP: f64 = 1e-4;
pub const SCHRODINGER_STEP: f64 = 1e-4;
/// Fourier truncation orders scanned by the trial suite.
pub const FOURIER_ORDERS: [usize; 4] = [8, 16, 32, 64];
/// Ince form with d₀ = 0, for which P(0) = 0.
pub const D0_ZERO_FORM: InceForm = InceForm {
    a0: 0.3,
    b0: 0.6,
    c0: 1.0,
    d0: 0.0,
    omega: None,
};

const TIGHT: SolverOptions = SolverOptions {
    rtol: 1e-12,
    atol: 1e-14,
    mu1_init: 1.0,
    max_step: None,
};

pub fn run_suite(suite: Suite, tol: &ValidationTolerances) -> Result<Vec<Check>> {
    match suite {
        Suite::SpecialCase => special_case(tol),
        Suite::GreenCoefficients => green_coefficients(tol),
        Suite::Riccati => riccati(tol),
        Suite::Wronskian => wronskian(tol),
        Suite::HarmonicLimit => harmonic_limit(tol),
        Suite::Cauchy => cauchy(tol),
        Suite::Unitarity => unitarity(tol),
        Suite::Eigenstates => eigenstates(tol),
        Suite::Pinney => pinney(tol),
        Suite::Periodicity => periodicity(tol),
        Suite::FourierTrial => fourier(tol),
        Suite::Consistency => consistency(tol),
        Suite::Gauge => gauge(tol),
    }
}

fn solve(
    model: impl CoefficientModel + 'static,
    t_min: f64,
    t_max: f64,
    opts: &SolverOptions,
) -> Result<Arc<CharacteristicSolution>> {
    let form = CharacteristicForm::new(model);
    Ok(Arc::new(solve_standard_pair_on(&form, t_min, t_max, opts)?))
}

fn dpo(ratio: f64) -> Result<OscillatorModel> {
    Ok(OscillatorModel::Dpo(OscillatorParams::natural(1.0, ratio)?))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

fn ground_state(grid: Grid) -> Result<WaveField> {
    let spec = HermiteGaussianSpec::new(1.0, 0.0, 0)?;
    WaveField::from_fn(grid, 0.0, |x| spec.eval(x))
}

fn special_case(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let sol = solve(
        OscillatorModel::special_case(),
        0.0,
        1.4,
        &SolverOptions::with_tolerances(1e-10, 1e-12),
    )?;
    let mut times = linspace(0.0, 1.4, 141);
    times.extend(sol.mesh());
    let mut worst: f64 = 0.0;
    for t in times {
        let p = sol.at(t)?;
        let e = oracles::special_case_mu(t);
        for d in [
            p.mu0 - e.mu0,
            p.mu1 - e.mu1,
            p.dmu0 - e.dmu0,
            p.dmu1 - e.dmu1,
        ] {
            worst = worst.max(d.abs());
        }
    }
    Ok(vec![Check::new(
        Suite::SpecialCase,
        "max |mu - closed form| on [0, 1.4]",
        worst,
        Bound::Max,
        tol.special_case_mu,
    )])
}

fn green_coefficients(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let sol = solve(
        OscillatorModel::special_case(),
        0.0,
        1.2,
        &SolverOptions::default(),
    )?;
    let mut checks = Vec::new();
    for t in [0.2, 0.5, 1.0] {
        let pc = greens_coefficients(&sol, t)?;
        let m = oracles::special_case_mu(t);
        let (s, c) = t.sin_cos();
        let alpha = (c * t.cosh() - s * t.sinh()) / (2.0 * m.mu0);
        let beta = -1.0 / m.mu0;
        let gamma = m.mu1 / (2.0 * m.mu0);
        let err = (pc.alpha - alpha)
            .abs()
            .max((pc.beta - beta).abs())
            .max((pc.gamma - gamma).abs());
        checks.push(Check::new(
            Suite::GreenCoefficients,
            format!("max coefficient error at t = {t}"),
            err,
            Bound::Max,
            tol.green_coefficients,
        ));
    }
    Ok(checks)
}

/// Riccati residual over [t0, t1] on a uniform mesh, skipping windows around caustics.
pub fn riccati_on(
    sol: &CharacteristicSolution,
    t0: f64,
    t1: f64,
    dt: f64,
    exclusion: f64,
) -> Result<f64> {
    let n = ((t1 - t0) / dt).round() as usize;
    let zeros = sol.zeros().to_vec();
    let mut worst: f64 = 0.0;
    let mut run: Vec<propagator::PropagatorCoefficients> = Vec::new();
    for k in 0..=n {
        let t = t0 + k as f64 * dt;
        if zeros.iter().any(|z| (t - z).abs() < exclusion) {
            worst = worst.max(propagator::riccati_residual(&run));
            run.clear();
            continue;
        }
        run.push(greens_coefficients(sol, t)?);
    }
    Ok(worst.max(propagator::riccati_residual(&run)))
}

fn riccati(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for ratio in [0.2, 0.5] {
        let sol = solve(dpo(ratio)?, 0.0, 3.1, &TIGHT)?;
        let r = riccati_on(&sol, 0.2, 3.0, RICCATI_STEP, CAUSTIC_EXCLUSION)?;
        checks.push(Check::new(
            Suite::Riccati,
            format!("max |dgamma/dt + a beta^2|, DPO lambda/omega = {ratio}"),
            r,
            Bound::Max,
            tol.riccati,
        ));
    }
    Ok(checks)
}

/// Models exercised by the Wronskian suite, with their time spans.
pub fn wronskian_models() -> Result<Vec<(&'static str, OscillatorModel, f64)>> {
    let params = OscillatorParams::natural(1.0, 0.3)?;
    let skew = GenericCoefficients {
        a: CoefficientFn::new(|t| 0.5 + 0.2 * t.cos()),
        b: CoefficientFn::new(|t| 0.5 - 0.1 * (2.0 * t).sin()),
        c: CoefficientFn::new(|t| 0.3 * t.sin()),
        d: CoefficientFn::new(|t| -0.1 + 0.05 * t.cos()),
    };
    Ok(vec![
        ("special case", OscillatorModel::special_case(), 1.4),
        ("harmonic", OscillatorModel::harmonic(1.0, 1.0, 1.0)?, 10.0),
        ("DPO lambda/omega = 0.2", dpo(0.2)?, 6.0),
        ("DPO lambda/omega = 0.5", dpo(0.5)?, 6.0),
        (
            "Raiford, detuned pump",
            OscillatorModel::Raiford {
                params,
                pump: PumpSchedule::detuned(0.3, 0.05)?,
            },
            6.0,
        ),
        ("generic, c != d", OscillatorModel::Generic(skew), 4.0),
    ])
}

fn wronskian(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, model, t_max) in wronskian_models()? {
        let sol = solve(model, 0.0, t_max, &SolverOptions::default())?;
        let mut worst: f64 = 0.0;
        for t in linspace(0.0, t_max, 50) {
            worst = worst.max(sol.wronskian_residual(t)?);
        }
        checks.push(Check::new(
            Suite::Wronskian,
            format!("max |W + 2 mu1(0) lambda_f^2 a|, {name}"),
            worst,
            Bound::Max,
            tol.wronskian,
        ));
    }
    Ok(checks)
}

fn harmonic_limit(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let sol = solve(OscillatorModel::harmonic(1.0, 1.0, 1.0)?, 0.0, 1.0, &TIGHT)?;
    let t = 0.7;
    let pc = greens_coefficients(&sol, t)?;
    let xs = linspace(-4.0, 4.0, 64);
    let mut worst: f64 = 0.0;
    for &x in &xs {
        for &y in &xs {
            let g = greens_kernel(&pc, x, y);
            let m = oracles::mehler_kernel(1.0, 1.0, 1.0, x, y, t)?;
            worst = worst.max((g - m).norm());
        }
    }
    Ok(vec![Check::new(
        Suite::HarmonicLimit,
        "max |G - Mehler| on 64x64 samples of [-4, 4]^2, t = 0.7",
        worst,
        Bound::Max,
        tol.mehler,
    )])
}

/// Grid, step and model of the Cauchy cross-validation.
pub fn cauchy_setup() -> Result<(OscillatorModel, OracleConfig)> {
    Ok((
        dpo(0.2)?,
        OracleConfig::new(Grid::new(-10.0, 10.0, 2048)?, 1e-3)?,
    ))
}

fn cauchy(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let (model, cfg) = cauchy_setup()?;
    let chi = ground_state(cfg.grid)?;
    let sol = solve(model.clone(), 0.0, 1.5, &TIGHT)?;
    let psi = propagator::propagate_quadrature(&greens_coefficients(&sol, 1.0)?, &chi)?;
    let cn = oracles::crank_nicolson_evolve(&model, &chi, 1.0, &cfg)?;
    Ok(vec![Check::new(
        Suite::Cauchy,
        "relative L2 distance, Green quadrature vs Crank-Nicolson, t = 1",
        psi.relative_distance(&cn)?,
        Bound::Max,
        tol.cauchy,
    )])
}

fn unitarity(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let (model, cfg) = cauchy_setup()?;
    let chi = ground_state(cfg.grid)?;
    let norm0 = chi.norm();
    let sol = solve(model.clone(), 0.0, 2.5, &TIGHT)?;
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let pc = greens_coefficients(&sol, t)?;
        let psi = propagator::propagate_quadrature(&pc, &chi)?;
        worst = worst.max((psi.norm() - norm0).abs() / norm0);
        let exact = propagator::propagate_gaussian_analytic(&pc, 1.0, 0.0)?.sample(cfg.grid, t)?;
        worst = worst.max((exact.norm() - norm0).abs() / norm0);
    }
    let run = oracles::crank_nicolson_run(&model, &chi, 1.0, &cfg, |_| Ok(()))?;
    worst = worst.max((run.field.norm() - norm0).abs() / norm0);
    Ok(vec![
        Check::new(
            Suite::Unitarity,
            "max relative norm change of propagated fields",
            worst,
            Bound::Max,
            tol.norm,
        ),
        Check::new(
            Suite::Unitarity,
            "max Crank-Nicolson norm drift per step",
            run.max_step_norm_drift,
            Bound::Max,
            tol.crank_nicolson_step_drift,
        ),
    ])
}

fn sampled(es: &ErmakovSolution, n: usize, t: f64, grid: Grid, eigen: bool) -> Result<WaveField> {
    let xs = grid.points();
    let amps = if eigen {
        es.eigenfunction(n, t, &xs)?
    } else {
        es.wavefunction(n, t, &xs)?
    };
    WaveField::new(grid, amps, t)
}

fn eigenstates(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let model = dpo(0.2)?;
    let sol = solve(model.clone(), 0.0, 2.5, &TIGHT)?;
    let es = ErmakovSolution::new(sol, 1.0, 1.0, 0.0)?;
    let grid = Grid::new(-12.0, 12.0, 4096)?;
    let dt = SCHRODINGER_STEP;
    let (mut schrodinger, mut invariant, mut gram) = (0f64, 0f64, 0f64);
    for t in [0.5, 1.0, 2.0] {
        let eig: Vec<WaveField> = (0..=5)
            .map(|n| sampled(&es, n, t, grid, true))
            .collect::<Result<_>>()?;
        for n in 0..=5 {
            let f = |s| sampled(&es, n, s, grid, false);
            let (a, b, c) = (f(t - dt)?, f(t)?, f(t + dt)?);
            schrodinger = schrodinger.max(oracles::schrodinger_residual(&model, [&a, &b, &c])?);
            let e = es.apply_invariant(&eig[n])?;
            let expectation = eig[n].inner(&e)?;
            invariant = invariant.max((expectation - es.eigenvalue(n)).norm());
            for m in 0..=5 {
                let target = if m == n { 1.0 } else { 0.0 };
                gram = gram.max((eig[m].inner(&eig[n])? - target).norm());
            }
        }
    }
    Ok(vec![
        Check::new(
            Suite::Eigenstates,
            "max Schrodinger residual, n <= 5",
            schrodinger,
            Bound::Max,
            tol.schrodinger,
        ),
        Check::new(
            Suite::Eigenstates,
            "max |<Psi_n, E Psi_n> - 2 sqrt(C0)(n + 1/2)|",
            invariant,
            Bound::Max,
            tol.invariant_expectation,
        ),
        Check::new(
            Suite::Eigenstates,
            "max |Gram - identity|",
            gram,
            Bound::Max,
            tol.gram,
        ),
    ])
}

fn pinney(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let params = OscillatorParams::natural(1.0, 0.5)?;
    let sol = solve(OscillatorModel::Dpo(params), -0.1, 3.1, &TIGHT)?;
    let from_gaussian = crate::ermakov::initial_conditions_from_gaussian(
        &HermiteGaussianSpec::new(1.0, 0.25, 0)?,
        1.0,
        &params,
    )?;
    let triples = [
        ("mu(0) = 1, mu'(0) = 0, C0 = 1".to_string(), 1.0, 0.0, 1.0),
        (
            "mu(0) = 2, mu'(0) = 0.5, C0 = 0.7".to_string(),
            2.0,
            0.5,
            0.7,
        ),
        (
            "(eps, delta, C0) = (1, 0.25, 1)".to_string(),
            from_gaussian.0,
            from_gaussian.1,
            1.0,
        ),
    ];
    let mut checks = Vec::new();
    for (name, mu, dmu, c0) in triples {
        let es = ErmakovSolution::new(sol.clone(), c0, mu, dmu)?;
        let mut worst: f64 = 0.0;
        for t in linspace(0.0, 3.0, 50) {
            worst = worst.max(es.residual(t)?);
        }
        checks.push(Check::new(
            Suite::Pinney,
            format!("max Pinney residual on [0, 3], {name}"),
            worst,
            Bound::Max,
            tol.pinney,
        ));
    }
    Ok(checks)
}

fn periodicity(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let (mut dev_p, mut dev_q, mut wrong) = (0f64, 0f64, 0usize);
    for k in 1..=20 {
        let r = k as f64 / 21.0;
        let report = classify_periodicity(&to_ince_form(&OscillatorParams::natural(1.0, r)?)?);
        let min_p = 2.0 * r * r * r / 4.0;
        let min_q = 4.0 * r * r * r / 4.0;
        dev_p = dev_p.max(report.min_p.map_or(f64::INFINITY, |m| (m - min_p).abs()));
        dev_q = dev_q.max(report.min_q.map_or(f64::INFINITY, |m| (m - min_q).abs()));
        if report.pi_pair_possible || report.two_pi_pair_possible || report.degenerate {
            wrong += 1;
        }
    }
    let test = classify_periodicity(&D0_ZERO_FORM);
    let d0_ok = test.p.eval(0.0) == 0.0 && test.pi_pair_possible;
    Ok(vec![
        Check::new(
            Suite::Periodicity,
            "DPO forms reporting a possible pair (20 ratios)",
            wrong as f64,
            Bound::Max,
            0.0,
        ),
        Check::new(
            Suite::Periodicity,
            "max |min P - closed form|",
            dev_p,
            Bound::Max,
            tol.polynomial_minimum,
        ),
        Check::new(
            Suite::Periodicity,
            "max |min Q - closed form|",
            dev_q,
            Bound::Max,
            tol.polynomial_minimum,
        ),
        Check::new(
            Suite::Periodicity,
            "d0 = 0 form: P(0) = 0 and pi pair possible (1 = yes)",
            if d0_ok { 1.0 } else { 0.0 },
            Bound::Min,
            1.0,
        ),
    ])
}

/// Smallest r(N) over all series classes and the scanned orders.
pub fn smallest_trial_residual(form: &InceForm) -> Result<f64> {
    let mut best = f64::INFINITY;
    for class in SeriesClass::ALL {
        for n in FOURIER_ORDERS {
            best = best.min(fourier_trial(form, class, n)?.residual_norm);
        }
    }
    Ok(best)
}

fn fourier(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let dpo_form = to_ince_form(&OscillatorParams::natural(1.0, 0.5)?)?;
    Ok(vec![
        Check::new(
            Suite::FourierTrial,
            "d0 = 0 form: smallest r(N), N <= 64, any class",
            smallest_trial_residual(&D0_ZERO_FORM)?,
            Bound::Max,
            tol.fourier_converged,
        ),
        Check::new(
            Suite::FourierTrial,
            "DPO lambda/omega = 0.5: smallest r(N), N <= 64, any class",
            smallest_trial_residual(&dpo_form)?,
            Bound::Min,
            tol.fourier_floor,
        ),
    ])
}

fn consistency(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let sol = solve(dpo(0.2)?, 0.0, 1.5, &TIGHT)?;
    let grid = Grid::new(-10.0, 10.0, 2048)?;
    let mut checks = Vec::new();
    for (eps, delta) in [(1.0, 0.0), (1.2, 0.25)] {
        let spec = HermiteGaussianSpec::new(eps, delta, 0)?;
        let es = ErmakovSolution::from_gaussian(sol.clone(), &spec, 1.0)?;
        let mut worst: f64 = 0.0;
        for t in [0.5, 1.0] {
            let psi = sampled(&es, 0, t, grid, false)?;
            let g = propagator::propagate_gaussian_analytic(
                &greens_coefficients(&sol, t)?,
                eps,
                delta,
            )?;
            worst = worst.max(psi.relative_distance(&g.sample(grid, t)?)?);
        }
        checks.push(Check::new(
            Suite::Consistency,
            format!(
                "wavefunction(n = 0) vs closed-form propagation, (eps, delta) = ({eps}, {delta})"
            ),
            worst,
            Bound::Max,
            tol.consistency,
        ));
    }
    Ok(checks)
}

fn gauge(tol: &ValidationTolerances) -> Result<Vec<Check>> {
    let sol = solve(dpo(0.2)?, 0.0, 2.5, &TIGHT)?;
    let grid = Grid::new(-12.0, 12.0, 2048)?;
    let mut worst: f64 = 0.0;
    for n in 0..=5 {
        let spec = HermiteGaussianSpec::new(1.0, 0.25, n)?;
        let base = ErmakovSolution::from_gaussian(sol.clone(), &spec, 1.0)?;
        let scaled = ErmakovSolution::from_gaussian(sol.clone(), &spec, 4.0)?;
        for t in [0.5, 1.0, 2.0] {
            let a = sampled(&base, n, t, grid, false)?;
            let b = sampled(&scaled, n, t, grid, false)?;
            worst = worst.max(b.relative_distance(&a)?);
        }
    }
    Ok(vec![Check::new(
        Suite::Gauge,
        "max relative L2 change of psi_n, C0 = 1 -> 4, n <= 5",
        worst,
        Bound::Max,
        tol.gauge,
    )])
}
