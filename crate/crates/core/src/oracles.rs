//! Independent reference solutions: the closed-form case λ = ω = m = ħ = 1,
//! the Mehler kernel, a Crank–Nicolson integrator and a Schrödinger
//! residual meter.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, WaveField};
use crate::models::CoefficientModel;
use crate::operators;

/// Edge amplitude, relative to the initial peak, that aborts an evolution.
pub const CONTAMINATION_LIMIT: f64 = 1e-8;
const CAUSTIC_FLOOR: f64 = 1e-12;

/// Standard solutions of μ″ + 2 tan t·μ′ − 2μ = 0 with values and slopes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialCaseMu {
    pub mu0: f64,
    pub mu1: f64,
    pub dmu0: f64,
    pub dmu1: f64,
}

pub fn special_case_mu(t: f64) -> SpecialCaseMu {
    let (s, c) = t.sin_cos();
    let (sh, ch) = (t.sinh(), t.cosh());
    SpecialCaseMu {
        mu0: c * sh + s * ch,
        mu1: c * ch + s * sh,
        dmu0: 2.0 * c * ch,
        dmu1: 2.0 * c * sh,
    }
}

/// (μ₀″, μ₁″) of the closed forms.
pub fn special_case_mu_second(t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    let (sh, ch) = (t.sinh(), t.cosh());
    (2.0 * (c * sh - s * ch), 2.0 * (c * ch - s * sh))
}

/// Closed-form kernel of the special case on the principal branch.
pub fn special_case_green(x: f64, y: f64, t: f64) -> Result<Complex64> {
    let mu = special_case_mu(t);
    if mu.mu0.abs() < CAUSTIC_FLOOR {
        return Err(Error::CausticEncountered { t, mu0: mu.mu0 });
    }
    let (s, c) = t.sin_cos();
    let (sh, ch) = (t.sinh(), t.cosh());
    let num = (x * x - y * y) * s * sh + 2.0 * x * y - (x * x + y * y) * c * ch;
    let exponent = Complex64::new(num, 0.0) / Complex64::new(0.0, 2.0 * mu.mu0);
    let prefactor = Complex64::new(0.0, 2.0 * PI * mu.mu0).sqrt().inv();
    Ok(prefactor * exponent.exp())
}

/// Harmonic-oscillator propagator with Maslov index ⌊ωt/π⌋.
pub fn mehler_kernel(omega: f64, m: f64, hbar: f64, x: f64, y: f64, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::TimeNotPositive { t });
    }
    let (s, c) = (omega * t).sin_cos();
    if s.abs() < CAUSTIC_FLOOR {
        return Err(Error::CausticEncountered { t, mu0: s });
    }
    let maslov = (omega * t / PI).floor();
    let modulus = (2.0 * PI * hbar / (m * omega) * s.abs()).sqrt().recip();
    let prefactor = Complex64::from_polar(modulus, -(FRAC_PI_4 + maslov * FRAC_PI_2));
    let phase = m * omega * ((x * x + y * y) * c - 2.0 * x * y) / (2.0 * hbar * s);
    Ok(prefactor * Complex64::from_polar(1.0, phase))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub grid: Grid,
    pub dt: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl OracleConfig {
    pub fn new(grid: Grid, dt: f64) -> Result<Self> {
        grid.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self {
            grid,
            dt,
            boundary: Boundary::Dirichlet,
        })
    }
}

/// Outcome of a Crank–Nicolson run.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub field: WaveField,
    pub steps: usize,
    /// Largest |‖ψₖ₊₁‖ − ‖ψₖ‖| / ‖ψₖ‖ over the run.
    pub max_step_norm_drift: f64,
}

/// Evolve iψ_t = H(t)ψ from `chi.t` to `t_final`.
pub fn crank_nicolson_evolve(
    model: &dyn CoefficientModel,
    chi: &WaveField,
    t_final: f64,
    cfg: &OracleConfig,
) -> Result<WaveField> {
    Ok(crank_nicolson_run(model, chi, t_final, cfg, |_| Ok(()))?.field)
}

/// As `crank_nicolson_evolve`, calling `observer` on the initial field and
/// after every step.
pub fn crank_nicolson_run(
    model: &dyn CoefficientModel,
    chi: &WaveField,
    t_final: f64,
    cfg: &OracleConfig,
    mut observer: impl FnMut(&WaveField) -> Result<()>,
) -> Result<Evolution> {
    if chi.grid != cfg.grid {
        return Err(Error::GridMismatch);
    }
    let span = t_final - chi.t;
    if !(span >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "final time {t_final} precedes the initial time {}",
            chi.t
        )));
    }
    let steps = (span / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { 0.0 } else { span / steps as f64 };
    let peak = chi.max_amplitude();
    let half = Complex64::new(0.0, 0.5 * dt);

    let mut field = chi.clone();
    observer(&field)?;
    let mut norm = field.norm();
    let mut max_drift: f64 = 0.0;
    for k in 0..steps {
        let t0 = chi.t + k as f64 * dt;
        let q = model.coefficients(t0 + 0.5 * dt)?;
        let h = operators::hamiltonian(&cfg.grid, &q);
        let explicit = h.shifted_identity(-half);
        let implicit = h.shifted_identity(half);
        let rhs = explicit.apply(&field.amplitudes);
        field.amplitudes = implicit.solve(&rhs)?;
        field.t = if k + 1 == steps { t_final } else { t0 + dt };

        let n = field.amplitudes.len();
        let edge = field.amplitudes[0]
            .norm()
            .max(field.amplitudes[n - 1].norm());
        if edge > CONTAMINATION_LIMIT * peak {
            return Err(Error::BoundaryContamination {
                t: field.t,
                amplitude: edge,
            });
        }
        let next = field.norm();
        max_drift = max_drift.max((next - norm).abs() / norm);
        norm = next;
        observer(&field)?;
    }
    Ok(Evolution {
        field,
        steps,
        max_step_norm_drift: max_drift,
    })
}

/// ‖i(ψ₊ − ψ₋)/(2Δt) − H(t)ψ‖ / ‖ψ‖ for fields at t − Δt, t, t + Δt.
pub fn schrodinger_residual(model: &dyn CoefficientModel, fields: [&WaveField; 3]) -> Result<f64> {
    let [before, now, after] = fields;
    if before.grid != now.grid || after.grid != now.grid {
        return Err(Error::GridMismatch);
    }
    let dt = 0.5 * (after.t - before.t);
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(
            "fields must be ordered in time".into(),
        ));
    }
    let h = operators::hamiltonian(&now.grid, &model.coefficients(now.t)?);
    let hpsi = h.apply(&now.amplitudes);
    let i = Complex64::new(0.0, 1.0);
    let diff: Vec<Complex64> = after
        .amplitudes
        .iter()
        .zip(&before.amplitudes)
        .zip(&hpsi)
        .map(|((p, m), hp)| i * (p - m) / (2.0 * dt) - hp)
        .collect();
    let residual = WaveField::new(now.grid, diff, now.t)?;
    Ok(residual.norm() / now.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::OscillatorModel;

    #[test]
    fn special_case_values() {
        let m = special_case_mu(0.0);
        assert_eq!((m.mu0, m.mu1, m.dmu0, m.dmu1), (0.0, 1.0, 2.0, 0.0));
        let m = special_case_mu(0.5);
        assert!((m.mu0 - 0.997_916_838_897_402_7).abs() < 1e-15);
        assert!((m.mu1 - 1.239_411_280_900_381_4).abs() < 1e-15);
    }

    #[test]
    fn special_case_ode_residual() {
        let t: f64 = 0.3;
        let m = special_case_mu(t);
        let (d0, d1) = special_case_mu_second(t);
        assert!((d0 + 2.0 * t.tan() * m.dmu0 - 2.0 * m.mu0).abs() < 1e-9);
        assert!((d1 + 2.0 * t.tan() * m.dmu1 - 2.0 * m.mu1).abs() < 1e-9);
    }

    #[test]
    fn special_case_green_prefactor() {
        let g = special_case_green(0.0, 0.0, 0.5).unwrap();
        assert!((g.norm() - 0.399_358_461_263_6).abs() < 1e-12);
        assert!(matches!(
            special_case_green(0.0, 0.0, 0.0),
            Err(Error::CausticEncountered { .. })
        ));
    }

    #[test]
    fn mehler_quarter_period_and_symmetry() {
        let g = mehler_kernel(1.0, 1.0, 1.0, 0.7, -1.2, FRAC_PI_2).unwrap();
        let e = Complex64::new(0.0, 2.0 * PI).sqrt().inv() * Complex64::from_polar(1.0, 0.7 * 1.2);
        assert!((g - e).norm() < 1e-14);
        for t in [0.3, 2.0, 4.0] {
            let a = mehler_kernel(2.0, 0.5, 1.0, 0.4, 1.9, t).unwrap();
            let b = mehler_kernel(2.0, 0.5, 1.0, 1.9, 0.4, t).unwrap();
            assert_eq!(a, b);
        }
        assert!(matches!(
            mehler_kernel(1.0, 1.0, 1.0, 0.0, 0.0, PI),
            Err(Error::CausticEncountered { .. })
        ));
    }

    #[test]
    fn ground_state_is_stationary_under_crank_nicolson() {
        let grid = Grid::new(-10.0, 10.0, 1024).unwrap();
        let chi = WaveField::from_fn(grid, 0.0, |x| {
            Complex64::new((-x * x / 2.0).exp() / PI.powf(0.25), 0.0)
        })
        .unwrap();
        let model = OscillatorModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let cfg = OracleConfig::new(grid, 1e-3).unwrap();
        let mut worst: f64 = 0.0;
        let run = crank_nicolson_run(&model, &chi, 2.0 * PI, &cfg, |f| {
            for (a, b) in f.amplitudes.iter().zip(&chi.amplitudes) {
                worst = worst.max((a.norm_sqr() - b.norm_sqr()).abs());
            }
            Ok(())
        })
        .unwrap();
        assert!(worst < 1e-6, "{worst}");
        assert!(run.max_step_norm_drift < 1e-10);
        assert_eq!(run.field.t, 2.0 * PI);
    }

    #[test]
    fn contamination_is_detected() {
        let grid = Grid::new(-3.0, 3.0, 256).unwrap();
        let chi = WaveField::from_fn(grid, 0.0, |x| {
            Complex64::new((-(x - 1.5).powi(2) * 4.0).exp(), 0.0)
        })
        .unwrap();
        let model = OscillatorModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let cfg = OracleConfig::new(grid, 1e-3).unwrap();
        assert!(matches!(
            crank_nicolson_evolve(&model, &chi, 1.0, &cfg),
            Err(Error::BoundaryContamination { .. })
        ));
    }

    #[test]
    fn residual_separates_solutions_from_noise() {
        let grid = Grid::new(-10.0, 10.0, 1024).unwrap();
        let model = OscillatorModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let dt = 1e-4;
        let exact = |t: f64| {
            WaveField::from_fn(grid, t, |x| {
                Complex64::from_polar((-x * x / 2.0).exp() / PI.powf(0.25), -0.5 * t)
            })
            .unwrap()
        };
        let (a, b, c) = (exact(0.5 - dt), exact(0.5), exact(0.5 + dt));
        assert!(schrodinger_residual(&model, [&a, &b, &c]).unwrap() < 1e-6);

        let noise = |t: f64, seed: f64| {
            WaveField::from_fn(grid, t, |x| {
                Complex64::new((seed * x).sin(), (3.1 * x + seed).cos()) * (-x * x / 8.0).exp()
            })
            .unwrap()
        };
        let (a, b, c) = (noise(0.5 - dt, 1.0), noise(0.5, 2.0), noise(0.5 + dt, 3.0));
        assert!(schrodinger_residual(&model, [&a, &b, &c]).unwrap() > 0.1);
    }
}
