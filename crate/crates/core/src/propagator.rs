//! Gaussian propagator G(x, y, t) = (2πiμ₀)^(−1/2)·exp(i(α₀x² + β₀xy + γ₀y²))
//! assembled from the standard pair, and the Cauchy problem solved with it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::characteristic::CharacteristicSolution;
use crate::error::{Error, Result};
use crate::field::{Grid, WaveField};

/// Edge amplitude (relative to the peak) above which an initial field is
/// considered truncated by its grid.
pub const TAIL_THRESHOLD: f64 = 1e-12;
/// Largest admissible kernel phase increment |β₀|·x_max·h per grid step.
pub const PHASE_GATE: f64 = FRAC_PI_4;
/// Grids up to this size are summed directly; larger ones use a chirp-z transform.
pub const DIRECT_SUM_LIMIT: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorCoefficients {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu0: f64,
    /// Number of μ₀ zeros crossed on (0, t).
    pub branch: usize,
    /// (2πiμ₀)^(−1/2) on the continued branch.
    pub prefactor: Complex64,
    /// a(t), kept for the Riccati check.
    pub a: f64,
}

/// Phase of (2πiμ₀)^(−1/2) after `branch` caustics, given sign(a(0)).
fn prefactor_phase(a0: f64, branch: usize) -> f64 {
    -a0.signum() * (FRAC_PI_4 + branch as f64 * FRAC_PI_2)
}

pub fn greens_coefficients(sol: &CharacteristicSolution, t: f64) -> Result<PropagatorCoefficients> {
    if !(t > 0.0) {
        return Err(Error::TimeNotPositive { t });
    }
    let p = sol.at(t)?;
    if p.mu0.abs() < sol.options().atol * (1.0 + p.mu1.abs()) {
        return Err(Error::CausticEncountered { t, mu0: p.mu0 });
    }
    let q = sol.coefficients(t)?;
    let a0 = sol.a0();
    let alpha = p.dmu0 / (4.0 * q.a * p.mu0) - q.c / (2.0 * q.a);
    let beta = -p.lambda_f / p.mu0;
    let gamma = p.mu1 / (2.0 * sol.mu1_init() * p.mu0) + sol.c0() / (2.0 * a0);
    let branch = sol.zeros_before(t);
    let prefactor = Complex64::from_polar(
        (2.0 * PI * p.mu0.abs()).sqrt().recip(),
        prefactor_phase(a0, branch),
    );
    Ok(PropagatorCoefficients {
        t,
        alpha,
        beta,
        gamma,
        mu0: p.mu0,
        branch,
        prefactor,
        a: q.a,
    })
}

/// Coefficients at each of `times`.
pub fn coefficient_series(
    sol: &CharacteristicSolution,
    times: &[f64],
) -> Result<Vec<PropagatorCoefficients>> {
    times.iter().map(|&t| greens_coefficients(sol, t)).collect()
}

pub fn greens_kernel(pc: &PropagatorCoefficients, x: f64, y: f64) -> Complex64 {
    let phase = pc.alpha * x * x + pc.beta * x * y + pc.gamma * y * y;
    pc.prefactor * Complex64::from_polar(1.0, phase)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    #[default]
    Auto,
    Direct,
    ChirpZ,
}

/// ψ(x, t) = ∫ G(x, y, t) χ(y) dy by the trapezoidal rule on χ's grid.
pub fn propagate_quadrature(pc: &PropagatorCoefficients, chi: &WaveField) -> Result<WaveField> {
    propagate_quadrature_with(pc, chi, QuadratureMethod::Auto)
}

pub fn propagate_quadrature_with(
    pc: &PropagatorCoefficients,
    chi: &WaveField,
    method: QuadratureMethod,
) -> Result<WaveField> {
    let grid = chi.grid;
    let relative = chi.edge_ratio();
    if relative > TAIL_THRESHOLD {
        return Err(Error::TailNotDecayed { relative });
    }
    let step_phase = pc.beta.abs() * grid.extent() * grid.spacing();
    if !(step_phase < PHASE_GATE) {
        return Err(Error::GridUnderResolved(format!(
            "kernel phase per step {step_phase:.3e} exceeds {PHASE_GATE:.3e}; refine to h < {:.3e}",
            PHASE_GATE / (pc.beta.abs() * grid.extent())
        )));
    }
    let direct = match method {
        QuadratureMethod::Auto => grid.n <= DIRECT_SUM_LIMIT,
        QuadratureMethod::Direct => true,
        QuadratureMethod::ChirpZ => false,
    };
    let amps = if direct {
        direct_sum(pc, &grid, &chi.amplitudes)
    } else {
        chirp_z_sum(pc, &grid, &chi.amplitudes)
    };
    WaveField::new(grid, amps, chi.t + pc.t)
}

fn trapezoid_weight(j: usize, n: usize, h: f64) -> f64 {
    if j == 0 || j + 1 == n {
        0.5 * h
    } else {
        h
    }
}

fn direct_sum(pc: &PropagatorCoefficients, grid: &Grid, chi: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n;
    let h = grid.spacing();
    let ys = grid.points();
    let weighted: Vec<Complex64> = ys
        .iter()
        .enumerate()
        .map(|(j, &y)| chi[j] * Complex64::from_polar(trapezoid_weight(j, n, h), pc.gamma * y * y))
        .collect();
    ys.iter()
        .map(|&x| {
            let s: Complex64 = ys
                .iter()
                .zip(&weighted)
                .map(|(&y, &w)| w * Complex64::from_polar(1.0, pc.beta * x * y))
                .sum();
            pc.prefactor * Complex64::from_polar(1.0, pc.alpha * x * x) * s
        })
        .collect()
}

/// Bluestein evaluation of Σ_j f_j exp(iβ h² i j) via i·j = (i² + j² − (i−j)²)/2.
fn chirp_z_sum(pc: &PropagatorCoefficients, grid: &Grid, chi: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n;
    let h = grid.spacing();
    let x0 = grid.x_min;
    let theta = pc.beta * h * h;
    let chirp = |k: f64| Complex64::from_polar(1.0, 0.5 * theta * k * k);

    let len = (2 * n - 1).next_power_of_two();
    let mut u = vec![Complex64::new(0.0, 0.0); len];
    for (j, uj) in u.iter_mut().enumerate().take(n) {
        let y = grid.x(j);
        let phase = pc.gamma * y * y + pc.beta * x0 * h * j as f64;
        *uj = chi[j] * Complex64::from_polar(trapezoid_weight(j, n, h), phase) * chirp(j as f64);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..n {
        let c = chirp(k as f64).conj();
        v[k] = c;
        if k > 0 {
            v[len - k] = c;
        }
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut u);
    fwd.process(&mut v);
    for (a, b) in u.iter_mut().zip(&v) {
        *a *= b;
    }
    inv.process(&mut u);
    let scale = 1.0 / len as f64;
    (0..n)
        .map(|i| {
            let x = grid.x(i);
            let outer = pc.alpha * x * x + pc.beta * x0 * x0 + pc.beta * x0 * h * i as f64;
            pc.prefactor * Complex64::from_polar(scale, outer) * chirp(i as f64) * u[i]
        })
        .collect()
}

/// ψ(x) = amplitude · exp(quadratic · x²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub amplitude: Complex64,
    pub quadratic: Complex64,
}

impl GaussianState {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.amplitude * (self.quadratic * x * x).exp()
    }

    pub fn sample(&self, grid: Grid, t: f64) -> Result<WaveField> {
        WaveField::from_fn(grid, t, |x| self.eval(x))
    }
}

/// Closed-form propagation of the normalized Gaussian
/// √(ε/√π)·exp((iδ − ε²/2)y²).
pub fn propagate_gaussian_analytic(
    pc: &PropagatorCoefficients,
    epsilon: f64,
    delta: f64,
) -> Result<GaussianState> {
    let p = Complex64::new(0.5 * epsilon * epsilon, -(pc.gamma + delta));
    if !(p.re > 0.0) {
        return Err(Error::NonConvergentIntegral { re_p: p.re });
    }
    if !(epsilon > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let norm = (epsilon / PI.sqrt()).sqrt();
    let amplitude = pc.prefactor * norm * (PI / p).sqrt();
    let quadratic = Complex64::new(0.0, pc.alpha) - pc.beta * pc.beta / (4.0 * p);
    Ok(GaussianState {
        amplitude,
        quadratic,
    })
}

/// max over interior points of |dγ₀/dt + aβ₀²| with centered differences.
pub fn riccati_residual(pcs: &[PropagatorCoefficients]) -> f64 {
    pcs.windows(3)
        .map(|w| {
            let dgamma = (w[2].gamma - w[0].gamma) / (w[2].t - w[0].t);
            (dgamma + w[1].a * w[1].beta * w[1].beta).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::{solve_standard_pair, CharacteristicForm, SolverOptions};
    use crate::models::{OscillatorModel, OscillatorParams};

    fn harmonic(t_max: f64) -> CharacteristicSolution {
        let form = CharacteristicForm::new(OscillatorModel::harmonic(1.0, 1.0, 1.0).unwrap());
        solve_standard_pair(&form, t_max, &SolverOptions::with_tolerances(1e-12, 1e-14)).unwrap()
    }

    fn ground(grid: Grid) -> WaveField {
        WaveField::from_fn(grid, 0.0, |x| {
            Complex64::new((-x * x / 2.0).exp() / PI.powf(0.25), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn harmonic_coefficients() {
        let sol = harmonic(4.0);
        for t in [0.3, 1.0, 2.5, 3.5] {
            let pc = greens_coefficients(&sol, t).unwrap();
            assert!((pc.alpha - t.cos() / (2.0 * t.sin())).abs() < 1e-9);
            assert!((pc.gamma - t.cos() / (2.0 * t.sin())).abs() < 1e-9);
            assert!((pc.beta + 1.0 / t.sin()).abs() < 1e-9);
        }
        assert_eq!(greens_coefficients(&sol, 3.5).unwrap().branch, 1);
        assert_eq!(
            greens_coefficients(&sol, 0.0),
            Err(Error::TimeNotPositive { t: 0.0 })
        );
        assert!(matches!(
            greens_coefficients(&sol, PI),
            Err(Error::CausticEncountered { .. })
        ));
    }

    #[test]
    fn kernel_at_quarter_period() {
        let sol = harmonic(2.0);
        let pc = greens_coefficients(&sol, FRAC_PI_2).unwrap();
        let expected = (Complex64::new(0.0, 2.0 * PI)).sqrt().inv();
        for (x, y) in [(0.0, 0.0), (1.0, 0.5), (-2.0, 1.5)] {
            let g = greens_kernel(&pc, x, y);
            let e = expected * Complex64::from_polar(1.0, -x * y);
            assert!((g - e).norm() < 1e-9, "{g} vs {e}");
        }
    }

    #[test]
    fn special_case_prefactor() {
        let form = CharacteristicForm::new(OscillatorModel::special_case());
        let sol = solve_standard_pair(&form, 1.0, &SolverOptions::default()).unwrap();
        let pc = greens_coefficients(&sol, 0.5).unwrap();
        let g = greens_kernel(&pc, 0.0, 0.0);
        assert!((g.norm() - 0.399_358_461_263_6).abs() < 1e-9);
        assert!((g.arg() + FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn ground_state_picks_up_phase() {
        let sol = harmonic(2.0);
        let pc = greens_coefficients(&sol, FRAC_PI_2).unwrap();
        let grid = Grid::new(-10.0, 10.0, 2048).unwrap();
        let chi = ground(grid);
        let psi = propagate_quadrature(&pc, &chi).unwrap();
        let phase = Complex64::from_polar(1.0, -FRAC_PI_4);
        let expected = WaveField::new(
            grid,
            chi.amplitudes.iter().map(|z| z * phase).collect(),
            0.0,
        )
        .unwrap();
        let err = psi
            .amplitudes
            .iter()
            .zip(&expected.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn chirp_z_matches_direct_sum() {
        let params = OscillatorParams::natural(1.0, 0.2).unwrap();
        let form = CharacteristicForm::new(OscillatorModel::Dpo(params));
        let sol = solve_standard_pair(&form, 1.5, &SolverOptions::default()).unwrap();
        let pc = greens_coefficients(&sol, 1.0).unwrap();
        let grid = Grid::new(-9.0, 8.0, 700).unwrap();
        let chi = WaveField::from_fn(grid, 0.0, |x| {
            Complex64::new(0.3 * x, 1.0) * (-(x - 0.5).powi(2) / 1.5).exp()
        })
        .unwrap();
        let a = propagate_quadrature_with(&pc, &chi, QuadratureMethod::Direct).unwrap();
        let b = propagate_quadrature_with(&pc, &chi, QuadratureMethod::ChirpZ).unwrap();
        assert!(b.relative_distance(&a).unwrap() < 1e-12);
    }

    #[test]
    fn analytic_matches_quadrature() {
        let params = OscillatorParams::natural(1.0, 0.2).unwrap();
        let form = CharacteristicForm::new(OscillatorModel::Dpo(params));
        let sol = solve_standard_pair(&form, 1.5, &SolverOptions::default()).unwrap();
        let pc = greens_coefficients(&sol, 1.0).unwrap();
        let grid = Grid::new(-10.0, 10.0, 2048).unwrap();
        let chi = ground(grid);
        let num = propagate_quadrature(&pc, &chi).unwrap();
        let exact = propagate_gaussian_analytic(&pc, 1.0, 0.0)
            .unwrap()
            .sample(grid, 1.0)
            .unwrap();
        assert!(num.relative_distance(&exact).unwrap() < 1e-8);
        assert!((num.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_harmonic_is_stationary() {
        let sol = harmonic(3.0);
        for t in [0.4, 1.3, 2.9] {
            let pc = greens_coefficients(&sol, t).unwrap();
            let g = propagate_gaussian_analytic(&pc, 1.0, 0.0).unwrap();
            assert!((g.quadratic - Complex64::new(-0.5, 0.0)).norm() < 1e-9);
            assert!((g.amplitude.norm() - PI.powf(-0.25)).abs() < 1e-9);
        }
    }

    #[test]
    fn under_resolved_and_truncated_fields_are_refused() {
        let sol = harmonic(1.0);
        let pc = greens_coefficients(&sol, 1e-3).unwrap();
        let grid = Grid::new(-10.0, 10.0, 512).unwrap();
        assert!(matches!(
            propagate_quadrature(&pc, &ground(grid)),
            Err(Error::GridUnderResolved(_))
        ));
        let narrow = Grid::new(-3.0, 3.0, 64).unwrap();
        assert!(matches!(
            propagate_quadrature(&pc, &ground(narrow)),
            Err(Error::TailNotDecayed { .. })
        ));
    }

    #[test]
    fn riccati_harmonic() {
        let sol = harmonic(2.0);
        let times: Vec<f64> = (0..=100).map(|k| 0.5 + 1e-4 * k as f64).collect();
        let pcs = coefficient_series(&sol, &times).unwrap();
        assert!(riccati_residual(&pcs) < 1e-6);
    }
}
