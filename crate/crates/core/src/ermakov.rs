//! Pinney solutions of the auxiliary equation
//! μ″ − τμ′ + 4σμ = 4C₀a²λ_f⁴/μ³, the phase they generate, and the
//! Hermite–Gaussian eigenstates of the quadratic invariant
//! E = (μp + f x)² + (C₀/μ²)x² with f = (2cμ − μ′)/(2a).
//!
//! Eigenstates and phases assume c = d (λ_f ≡ 1), which covers the DPO
//! and Raiford models.

use std::cell::Cell;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::CharacteristicSolution;
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::hermite::hermite_function;
use crate::models::{dpo_coefficients, OscillatorParams, QuadraticCoefficients};
use crate::operators;

/// Finite-difference step for μ″ in the residual.
pub const RESIDUAL_STEP: f64 = 1e-5;
/// Absolute accuracy of the phase integral.
pub const PHASE_TOLERANCE: f64 = 1e-10;
/// Edge amplitude (relative to the peak) tolerated by `apply_invariant`.
pub const INVARIANT_TAIL: f64 = 1e-10;
const LAMBDA_F_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HermiteGaussianSpec {
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
}

impl HermiteGaussianSpec {
    pub fn new(epsilon: f64, delta: f64, n: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(Self { epsilon, delta, n })
    }

    /// √(ε/(√π 2ⁿ n!))·exp((iδ − ε²/2)x²)·H_n(εx).
    pub fn eval(&self, x: f64) -> Complex64 {
        let z = self.epsilon * x;
        let envelope = self.epsilon.sqrt() * hermite_function(self.n, z);
        Complex64::from_polar(envelope, self.delta * x * x)
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if c0 > 0.0 && c0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInvariantConstant { c0 })
    }
}

/// (μ, μ′) from the standard pair:
/// μ² = (μ′(0)/(2a(0))·μ₀ + μ(0)/μ₁(0)·μ₁)² + (C₀/μ(0)²)·μ₀².
pub fn pinney_mu(
    sol: &CharacteristicSolution,
    mu_init: f64,
    dmu_init: f64,
    c0: f64,
    t: f64,
) -> Result<(f64, f64)> {
    check_c0(c0)?;
    if !(mu_init != 0.0 && mu_init.is_finite() && dmu_init.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mu(0) must be nonzero and finite, got {mu_init}"
        )));
    }
    let p = sol.at(t)?;
    let ku = dmu_init / (2.0 * sol.a0());
    let kv = mu_init / sol.mu1_init();
    let kw = c0.sqrt() / mu_init;
    let u = ku * p.mu0 + kv * p.mu1;
    let du = ku * p.dmu0 + kv * p.dmu1;
    let w = kw * p.mu0;
    let dw = kw * p.dmu0;
    let mu = u.hypot(w);
    Ok((mu, (u * du + w * dw) / mu))
}

/// (μ(0), μ′(0)) matching a Hermite–Gaussian initial state for a model
/// with coefficients `q0` at t = 0: μ(0) = C₀^{1/4}/ε, μ′(0) = μ(0)(4a(0)δ + 2c(0)).
pub fn initial_conditions_for(
    spec: &HermiteGaussianSpec,
    c0: f64,
    q0: &QuadraticCoefficients,
) -> Result<(f64, f64)> {
    check_c0(c0)?;
    let mu = c0.powf(0.25) / spec.epsilon;
    Ok((mu, mu * (4.0 * q0.a * spec.delta + 2.0 * q0.c)))
}

/// DPO form: μ(0) = C₀^{1/4}/ε, μ′(0) = 2C₀^{1/4}(ħ/m)(1 + λ/ω)δ/ε.
pub fn initial_conditions_from_gaussian(
    spec: &HermiteGaussianSpec,
    c0: f64,
    params: &OscillatorParams,
) -> Result<(f64, f64)> {
    initial_conditions_for(spec, c0, &dpo_coefficients(params, 0.0))
}

#[derive(Clone, Debug)]
pub struct ErmakovSolution {
    sol: Arc<CharacteristicSolution>,
    c0: f64,
    mu_init: f64,
    dmu_init: f64,
    /// (t, φ(t)) at the integrator mesh, ascending, containing t = 0.
    phase_nodes: Vec<(f64, f64)>,
}

impl ErmakovSolution {
    pub fn new(
        sol: Arc<CharacteristicSolution>,
        c0: f64,
        mu_init: f64,
        dmu_init: f64,
    ) -> Result<Self> {
        check_c0(c0)?;
        pinney_mu(&sol, mu_init, dmu_init, c0, 0.0)?;
        let mesh = sol.mesh();
        for &t in &mesh {
            let lf = sol.at(t)?.lambda_f;
            if (lf - 1.0).abs() > LAMBDA_F_TOLERANCE {
                return Err(Error::UnsupportedModel(format!(
                    "invariant eigenstates need c = d; integrating factor is {lf} at t = {t}"
                )));
            }
        }
        let mut es = Self {
            sol,
            c0,
            mu_init,
            dmu_init,
            phase_nodes: Vec::new(),
        };
        es.phase_nodes = es.accumulate_phase(&mesh)?;
        Ok(es)
    }

    pub fn from_gaussian(
        sol: Arc<CharacteristicSolution>,
        spec: &HermiteGaussianSpec,
        c0: f64,
    ) -> Result<Self> {
        let q0 = sol.coefficients(0.0)?;
        let (mu, dmu) = initial_conditions_for(spec, c0, &q0)?;
        Self::new(sol, c0, mu, dmu)
    }

    pub fn characteristic(&self) -> &CharacteristicSolution {
        &self.sol
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn initial_data(&self) -> (f64, f64) {
        (self.mu_init, self.dmu_init)
    }

    /// (μ(t), μ′(t)).
    pub fn mu(&self, t: f64) -> Result<(f64, f64)> {
        pinney_mu(&self.sol, self.mu_init, self.dmu_init, self.c0, t)
    }

    /// Coefficients (A, B, C) of μ² = Aμ₀² + 2Cμ₀μ₁ + Bμ₁².
    pub fn pinney_constants(&self) -> (f64, f64, f64) {
        let p = self.dmu_init / (2.0 * self.sol.a0());
        let q = self.mu_init / self.sol.mu1_init();
        let r = self.c0 / (self.mu_init * self.mu_init);
        (p * p + r, q * q, p * q)
    }

    fn phase_rate(&self, t: f64) -> Result<f64> {
        let (mu, _) = self.mu(t)?;
        let a = self.sol.coefficients(t)?.a;
        Ok(self.c0.sqrt() * 2.0 * a / (mu * mu))
    }

    fn integrate_phase(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0 == t1 {
            return Ok(0.0);
        }
        let failure: Cell<Option<Error>> = Cell::new(None);
        let out = quadrature::double_exponential::integrate(
            |s| match self.phase_rate(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            },
            t0,
            t1,
            PHASE_TOLERANCE * 1e-2,
        );
        match failure.take() {
            Some(e) => Err(e),
            None => Ok(out.integral),
        }
    }

    fn accumulate_phase(&self, mesh: &[f64]) -> Result<Vec<(f64, f64)>> {
        let origin = mesh
            .iter()
            .position(|&t| t == 0.0)
            .expect("mesh contains t = 0");
        let mut nodes = vec![(0.0, 0.0); mesh.len()];
        for i in origin + 1..mesh.len() {
            nodes[i] = (
                mesh[i],
                nodes[i - 1].1 + self.integrate_phase(mesh[i - 1], mesh[i])?,
            );
        }
        for i in (0..origin).rev() {
            nodes[i] = (
                mesh[i],
                nodes[i + 1].1 - self.integrate_phase(mesh[i], mesh[i + 1])?,
            );
        }
        Ok(nodes)
    }

    /// φ(t) = ∫₀ᵗ 2a√C₀/μ² ds.
    pub fn phase(&self, t: f64) -> Result<f64> {
        let first = self.phase_nodes[0].0;
        let last = self.phase_nodes[self.phase_nodes.len() - 1].0;
        if !(t >= first && t <= last) {
            return Err(Error::OutOfSolvedRange {
                t,
                t_min: first,
                t_max: last,
            });
        }
        let k = self
            .phase_nodes
            .partition_point(|&(s, _)| s <= t)
            .saturating_sub(1);
        let (s, phi) = self.phase_nodes[k];
        Ok(phi + self.integrate_phase(s, t)?)
    }

    /// |μ″ − τμ′ + 4σμ − 4C₀a²λ_f⁴/μ³| with μ″ from centered differences of μ′.
    pub fn residual(&self, t: f64) -> Result<f64> {
        let h = RESIDUAL_STEP;
        let (mu, dmu) = self.mu(t)?;
        let ddmu = (self.mu(t + h)?.1 - self.mu(t - h)?.1) / (2.0 * h);
        let form = self.sol.form().eval(t)?;
        let a = form.coefficients.a;
        let lf = self.sol.at(t)?.lambda_f;
        let forcing = 4.0 * self.c0 * a * a * lf.powi(4) / mu.powi(3);
        Ok((ddmu - form.tau * dmu + 4.0 * form.sigma * mu - forcing).abs())
    }

    /// Chirp g(t) in Ψ_n ∝ exp(igx²): (μ′/μ − 2c)/(4a).
    fn chirp(&self, t: f64) -> Result<(f64, f64)> {
        let (mu, dmu) = self.mu(t)?;
        let q = self.sol.coefficients(t)?;
        Ok((mu, (dmu / mu - 2.0 * q.c) / (4.0 * q.a)))
    }

    /// Invariant eigenfunction Ψ_n(x, t) with real positive normalization.
    pub fn eigenfunction(&self, n: usize, t: f64, xs: &[f64]) -> Result<Vec<Complex64>> {
        let (mu, g) = self.chirp(t)?;
        let scale = self.c0.powf(0.25) / mu;
        let amp = scale.sqrt();
        Ok(xs
            .iter()
            .map(|&x| Complex64::from_polar(amp * hermite_function(n, scale * x), g * x * x))
            .collect())
    }

    /// ψ_n(x, t) = e^{−i(n+1/2)φ(t)} Ψ_n(x, t).
    pub fn wavefunction(&self, n: usize, t: f64, xs: &[f64]) -> Result<Vec<Complex64>> {
        let phase = Complex64::from_polar(1.0, -(n as f64 + 0.5) * self.phase(t)?);
        Ok(self
            .eigenfunction(n, t, xs)?
            .into_iter()
            .map(|z| z * phase)
            .collect())
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        2.0 * self.c0.sqrt() * (n as f64 + 0.5)
    }

    /// E ψ with A = μ(−iD₁) + f x applied twice.
    pub fn apply_invariant(&self, field: &WaveField) -> Result<WaveField> {
        let relative = field.edge_ratio();
        if relative > INVARIANT_TAIL {
            return Err(Error::GridUnderResolved(format!(
                "field edge amplitude {relative:.3e} exceeds {INVARIANT_TAIL:.0e} of its peak"
            )));
        }
        let t = field.t;
        let (mu, dmu) = self.mu(t)?;
        let q = self.sol.coefficients(t)?;
        let f = (2.0 * q.c * mu - dmu) / (2.0 * q.a);
        let grid = field.grid;
        let xs = grid.points();
        let apply_a = |v: &[Complex64]| -> Vec<Complex64> {
            operators::d1(&grid, v)
                .into_iter()
                .zip(v)
                .zip(&xs)
                .map(|((dv, &vi), &x)| Complex64::new(0.0, -mu) * dv + vi * (f * x))
                .collect()
        };
        let av = apply_a(&field.amplitudes);
        let aav = apply_a(&av);
        let k = self.c0 / (mu * mu);
        let out = aav
            .into_iter()
            .zip(&field.amplitudes)
            .zip(&xs)
            .map(|((e, &v), &x)| e + v * (k * x * x))
            .collect();
        WaveField::new(grid, out, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::{solve_standard_pair, CharacteristicForm, SolverOptions};
    use crate::field::Grid;
    use crate::models::OscillatorModel;
    use std::f64::consts::FRAC_PI_2;

    fn solve(model: OscillatorModel, t_max: f64) -> Arc<CharacteristicSolution> {
        let form = CharacteristicForm::new(model);
        Arc::new(
            solve_standard_pair(&form, t_max, &SolverOptions::with_tolerances(1e-12, 1e-14))
                .unwrap(),
        )
    }

    fn harmonic(t_max: f64) -> Arc<CharacteristicSolution> {
        solve(OscillatorModel::harmonic(1.0, 1.0, 1.0).unwrap(), t_max)
    }

    #[test]
    fn stationary_and_breathing_modes() {
        let sol = harmonic(3.0);
        for t in [0.0, 0.9, 2.2] {
            let (mu, dmu) = pinney_mu(&sol, 1.0, 0.0, 1.0, t).unwrap();
            assert!((mu - 1.0).abs() < 1e-10 && dmu.abs() < 1e-10);
        }
        let (mu, _) = pinney_mu(&sol, 2.0, 0.0, 1.0, FRAC_PI_2).unwrap();
        assert!((mu - 0.5).abs() < 1e-10);
        let es = ErmakovSolution::new(sol, 1.0, 2.0, 0.0).unwrap();
        assert!(es.residual(0.7).unwrap() < 1e-6);
    }

    #[test]
    fn stationary_phase_is_time() {
        let es = ErmakovSolution::new(harmonic(3.0), 1.0, 1.0, 0.0).unwrap();
        for t in [0.0, 0.37, 1.0, 2.99] {
            assert!((es.phase(t).unwrap() - t).abs() < 1e-10);
        }
    }

    #[test]
    fn initial_conditions() {
        let p = OscillatorParams::natural(1.0, 0.5).unwrap();
        let ic = |e, d, c0| {
            initial_conditions_from_gaussian(&HermiteGaussianSpec::new(e, d, 0).unwrap(), c0, &p)
                .unwrap()
        };
        assert_eq!(ic(1.0, 0.0, 1.0), (1.0, 0.0));
        let (m, dm) = ic(1.0, 0.25, 1.0);
        assert!((m - 1.0).abs() < 1e-15 && (dm - 0.75).abs() < 1e-15);
        assert_eq!(ic(2.0, 0.0, 16.0), (1.0, 0.0));
        let spec = HermiteGaussianSpec::new(1.0, 0.0, 0).unwrap();
        assert_eq!(
            initial_conditions_from_gaussian(&spec, 0.0, &p),
            Err(Error::InvalidInvariantConstant { c0: 0.0 })
        );
    }

    #[test]
    fn eigenfunction_reproduces_initial_state() {
        let p = OscillatorParams::natural(1.0, 0.5).unwrap();
        let sol = solve(OscillatorModel::Dpo(p), 1.0);
        let xs: Vec<f64> = (-40..=40).map(|k| 0.1 * k as f64).collect();
        for n in 0..4 {
            let spec = HermiteGaussianSpec::new(1.3, 0.25, n).unwrap();
            let es = ErmakovSolution::from_gaussian(sol.clone(), &spec, 2.0).unwrap();
            let psi = es.eigenfunction(n, 0.0, &xs).unwrap();
            for (x, z) in xs.iter().zip(&psi) {
                assert!((z - spec.eval(*x)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn invariant_eigenvalues() {
        let p = OscillatorParams::natural(1.0, 0.2).unwrap();
        let es = ErmakovSolution::new(solve(OscillatorModel::Dpo(p), 1.5), 1.0, 1.0, 0.0).unwrap();
        let grid = Grid::new(-12.0, 12.0, 4096).unwrap();
        let t = 1.1;
        for n in 0..4 {
            let psi =
                WaveField::new(grid, es.eigenfunction(n, t, &grid.points()).unwrap(), t).unwrap();
            let e = es.apply_invariant(&psi).unwrap();
            let expectation = psi.inner(&e).unwrap();
            assert!(
                (expectation.re - es.eigenvalue(n)).abs() < 1e-6,
                "n={n}: {expectation}"
            );
            assert!(expectation.im.abs() < 1e-8);
        }
    }

    #[test]
    fn pinney_constants_relation() {
        let p = OscillatorParams::natural(1.0, 0.5).unwrap();
        let sol = solve(OscillatorModel::Dpo(p), 1.0);
        let es = ErmakovSolution::new(sol.clone(), 1.5, 0.8, 0.3).unwrap();
        let (a, b, c) = es.pinney_constants();
        let w = sol.at(0.0).unwrap().wronskian();
        let a0 = sol.a0();
        assert!((a * b - c * c - 1.5 * (2.0 * a0).powi(2) / (w * w)).abs() < 1e-10);
    }

    #[test]
    fn generic_model_with_unequal_cross_terms_is_rejected() {
        use crate::models::{CoefficientFn, GenericCoefficients};
        let g = GenericCoefficients {
            a: CoefficientFn::constant(0.5),
            b: CoefficientFn::constant(0.5),
            c: CoefficientFn::constant(0.2),
            d: CoefficientFn::constant(0.0),
        };
        let sol = solve(OscillatorModel::Generic(g), 1.0);
        assert!(matches!(
            ErmakovSolution::new(sol, 1.0, 1.0, 0.0),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
