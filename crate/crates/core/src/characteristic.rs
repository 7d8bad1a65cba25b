//! The characteristic equation μ″ − τ μ′ + 4σ μ = 0 and its standard
//! solution pair.
//!
//! With H = a p² + b x² + c p x + d x p,
//!
//! ```text
//! τ = a′/a + 2c − 2d,      σ = ab − cd + a′c/(2a) − c′/2
//! ```
//!
//! and the standard solutions are fixed by μ₀(0) = 0, μ₀′(0) = 2a(0),
//! μ₁(0) ≠ 0, μ₁′(0) = 0. The integrating factor λ_f = exp ∫₀ᵗ (c − d) is
//! integrated alongside the pair; Abel's theorem then pins the Wronskian to
//! W(μ₀, μ₁) = −2 μ₁(0) λ_f²(t) a(t).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{CoefficientModel, QuadraticCoefficients};
use crate::ode::{self, DenseTrajectory, Tolerances};

/// |a| below this is treated as a vanishing kinetic term.
pub const KINETIC_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormValues {
    pub tau: f64,
    pub sigma: f64,
    pub coefficients: QuadraticCoefficients,
}

/// τ(t), σ(t) evaluated on demand from a coefficient model.
#[derive(Clone)]
pub struct CharacteristicForm {
    model: Arc<dyn CoefficientModel>,
}

impl std::fmt::Debug for CharacteristicForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CharacteristicForm")
    }
}

pub fn characteristic_form(model: Arc<dyn CoefficientModel>) -> CharacteristicForm {
    CharacteristicForm { model }
}

impl CharacteristicForm {
    pub fn new(model: impl CoefficientModel + 'static) -> Self {
        Self {
            model: Arc::new(model),
        }
    }

    pub fn model(&self) -> &Arc<dyn CoefficientModel> {
        &self.model
    }

    pub fn coefficients(&self, t: f64) -> Result<QuadraticCoefficients> {
        self.model.coefficients(t)
    }

    pub fn eval(&self, t: f64) -> Result<FormValues> {
        let q = self.model.coefficients(t)?;
        if !(q.a.abs() >= KINETIC_FLOOR) {
            return Err(Error::KineticDegenerate { t, a: q.a });
        }
        // c/2·(a′/a − c′/c) written without the spurious 1/c
        let tau = q.da / q.a + 2.0 * q.c - 2.0 * q.d;
        let sigma = q.a * q.b - q.c * q.d + q.da * q.c / (2.0 * q.a) - 0.5 * q.dc;
        Ok(FormValues {
            tau,
            sigma,
            coefficients: q,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// μ₁(0); any nonzero value.
    pub mu1_init: f64,
    pub max_step: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            mu1_init: 1.0,
            max_step: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

/// μ₀, μ₁, their derivatives and λ_f at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardPair {
    pub t: f64,
    pub mu0: f64,
    pub dmu0: f64,
    pub mu1: f64,
    pub dmu1: f64,
    pub lambda_f: f64,
}

impl StandardPair {
    fn from_state(t: f64, y: [f64; 5]) -> Self {
        Self {
            t,
            mu0: y[0],
            dmu0: y[1],
            mu1: y[2],
            dmu1: y[3],
            lambda_f: y[4],
        }
    }

    /// W(μ₀, μ₁) = μ₀ μ₁′ − μ₀′ μ₁.
    pub fn wronskian(&self) -> f64 {
        self.mu0 * self.dmu1 - self.dmu0 * self.mu1
    }
}

/// Dense-output standard pair on [t_min, t_max].
#[derive(Clone, Debug)]
pub struct CharacteristicSolution {
    form: CharacteristicForm,
    forward: DenseTrajectory<5>,
    backward: Option<DenseTrajectory<5>>,
    options: SolverOptions,
    a0: f64,
    c0: f64,
    zeros: Vec<f64>,
}

/// Solve the standard pair on [0, t_max].
pub fn solve_standard_pair(
    form: &CharacteristicForm,
    t_max: f64,
    options: &SolverOptions,
) -> Result<CharacteristicSolution> {
    solve_standard_pair_on(form, 0.0, t_max, options)
}

/// Solve the standard pair on [t_min, t_max] with t_min ≤ 0 < t_max.
pub fn solve_standard_pair_on(
    form: &CharacteristicForm,
    t_min: f64,
    t_max: f64,
    options: &SolverOptions,
) -> Result<CharacteristicSolution> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    if !(t_min <= 0.0 && t_min.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_min must be <= 0, got {t_min}"
        )));
    }
    if !(options.rtol > 0.0 && options.atol > 0.0) {
        return Err(Error::InvalidParameter(
            "tolerances must be positive".into(),
        ));
    }
    if !(options.mu1_init != 0.0 && options.mu1_init.is_finite()) {
        return Err(Error::InvalidParameter("mu1(0) must be nonzero".into()));
    }

    let start = form.eval(0.0)?;
    let a0 = start.coefficients.a;
    let y0 = [0.0, 2.0 * a0, options.mu1_init, 0.0, 1.0];
    let rhs = |t: f64, y: &[f64; 5]| -> Result<[f64; 5]> {
        let v = form.eval(t)?;
        let q = v.coefficients;
        Ok([
            y[1],
            v.tau * y[1] - 4.0 * v.sigma * y[0],
            y[3],
            v.tau * y[3] - 4.0 * v.sigma * y[2],
            (q.c - q.d) * y[4],
        ])
    };
    let tol = Tolerances {
        rtol: options.rtol,
        atol: options.atol,
        max_step: options.max_step,
        ..Tolerances::default()
    };
    let forward = ode::integrate(rhs, 0.0, y0, t_max, &tol)?;
    let backward = if t_min < 0.0 {
        Some(ode::integrate(rhs, 0.0, y0, t_min, &tol)?)
    } else {
        None
    };

    let mut sol = CharacteristicSolution {
        form: form.clone(),
        forward,
        backward,
        options: *options,
        a0,
        c0: start.coefficients.c,
        zeros: Vec::new(),
    };
    sol.zeros = sol.locate_mu0_zeros();

    for t in [t_min, t_max] {
        let p = sol.at(t)?;
        let scale = 1f64.max((p.mu0 * p.dmu1).abs() + (p.dmu0 * p.mu1).abs());
        let residual = sol.wronskian_residual(t)?;
        let limit = 100.0 * options.rtol * scale;
        if !(residual <= limit) {
            return Err(Error::ToleranceNotMet { residual, limit });
        }
    }
    Ok(sol)
}

impl CharacteristicSolution {
    pub fn form(&self) -> &CharacteristicForm {
        &self.form
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn mu1_init(&self) -> f64 {
        self.options.mu1_init
    }

    /// a(0).
    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// c(0).
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn t_min(&self) -> f64 {
        self.backward.as_ref().map_or(0.0, DenseTrajectory::t_end)
    }

    pub fn t_max(&self) -> f64 {
        self.forward.t_end()
    }

    /// Zeros of μ₀ in (0, t_max], ascending.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    /// Number of μ₀ zeros strictly before `t`.
    pub fn zeros_before(&self, t: f64) -> usize {
        self.zeros.partition_point(|&z| z < t)
    }

    /// Accepted integrator mesh, ascending.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = match &self.backward {
            Some(b) => b.mesh().into_iter().skip(1).rev().collect(),
            None => Vec::new(),
        };
        m.extend(self.forward.mesh());
        m
    }

    pub fn coefficients(&self, t: f64) -> Result<QuadraticCoefficients> {
        self.form.coefficients(t)
    }

    pub fn at(&self, t: f64) -> Result<StandardPair> {
        let y = if t >= 0.0 {
            self.forward.eval(t)
        } else {
            self.backward.as_ref().and_then(|b| b.eval(t))
        };
        y.map(|y| StandardPair::from_state(t, y))
            .ok_or(Error::OutOfSolvedRange {
                t,
                t_min: self.t_min(),
                t_max: self.t_max(),
            })
    }

    /// |W(μ₀, μ₁)(t) + 2 μ₁(0) λ_f²(t) a(t)|.
    pub fn wronskian_residual(&self, t: f64) -> Result<f64> {
        let p = self.at(t)?;
        let a = self.form.coefficients(t)?.a;
        Ok((p.wronskian() + 2.0 * self.mu1_init() * p.lambda_f * p.lambda_f * a).abs())
    }

    fn mu0(&self, t: f64) -> f64 {
        self.forward.eval(t).map_or(f64::NAN, |y| y[0])
    }

    fn locate_mu0_zeros(&self) -> Vec<f64> {
        let mut zeros = Vec::new();
        let nodes: Vec<(f64, f64)> = self.forward.nodes().map(|(t, y)| (t, y[0])).collect();
        for (i, w) in nodes.windows(2).enumerate() {
            let (t0, mut v0) = w[0];
            let (t1, v1) = w[1];
            if i == 0 {
                // μ₀(0) = 0 exactly; its sign just after 0 is the sign of a(0)
                v0 = self.a0;
            }
            if v1 == 0.0 {
                zeros.push(t1);
                continue;
            }
            if v0 == 0.0 || v0.signum() == v1.signum() {
                continue;
            }
            let (mut lo, mut hi) = (t0, t1);
            let lo_sign = v0.signum();
            // bisect down to adjacent floats
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let v = self.mu0(mid);
                if v == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if v.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = if self.mu0(lo).abs() <= self.mu0(hi).abs() {
                lo
            } else {
                hi
            };
            zeros.push(z);
        }
        zeros
    }
}
