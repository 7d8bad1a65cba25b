//! Time-dependent coefficients of the quadratic Hamiltonian
//!
//! ```text
//! H = a(t) p² + b(t) x² + c(t) p x + d(t) x p,    p = -i ∂/∂x
//! ```
//!
//! with ħ and m folded into the coefficients. Models: the degenerate
//! parametric oscillator (constant pump), the pumped oscillator with a
//! time-dependent amplitude and phase, and user-supplied coefficient
//! functions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Physical constants of a pumped oscillator mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub m: f64,
    pub omega: f64,
    /// Pump coupling λ (not the integrating factor of the characteristic equation).
    pub lambda: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(m: f64, omega: f64, lambda: f64, hbar: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(m) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {m}"
            )));
        }
        if !ok(omega) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {omega}"
            )));
        }
        if !ok(hbar) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be non-negative, got {lambda}"
            )));
        }
        Ok(Self {
            m,
            omega,
            lambda,
            hbar,
        })
    }

    /// Natural units m = ħ = 1.
    pub fn natural(omega: f64, lambda: f64) -> Result<Self> {
        Self::new(1.0, omega, lambda, 1.0)
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.lambda / self.omega
    }

    /// `true` when λ/ω ≥ 1, i.e. a(t) reaches zero during a pump period.
    pub fn kinetic_degenerate(&self) -> bool {
        self.coupling_ratio() >= 1.0
    }
}

/// a, b, c, d at one instant together with a′ and c′.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadraticCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub da: f64,
    pub dc: f64,
}

impl QuadraticCoefficients {
    fn check_finite(self, t: f64) -> Result<Self> {
        let named = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("a'", self.da),
            ("c'", self.dc),
        ];
        match named.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, _)) => Err(Error::NonFiniteCoefficient { name, t }),
            None => Ok(self),
        }
    }
}

/// Anything that can produce Hamiltonian coefficients at a given time.
pub trait CoefficientModel: Send + Sync {
    fn coefficients(&self, t: f64) -> Result<QuadraticCoefficients>;
}

// Shared by the constant-pump and scheduled-pump models so that a constant
// schedule reproduces the constant-pump coefficients bit for bit.
fn pumped_coefficients(
    params: &OscillatorParams,
    pump: PumpState,
    t: f64,
) -> QuadraticCoefficients {
    let OscillatorParams { m, omega, hbar, .. } = *params;
    let theta = 2.0 * omega * t + pump.phase;
    let theta_rate = 2.0 * omega + pump.phase_rate;
    let (sin, cos) = theta.sin_cos();
    let ratio = pump.amplitude / omega;
    let ratio_rate = pump.amplitude_rate / omega;

    let kinetic = hbar / (2.0 * m);
    let potential = m * omega * omega / (2.0 * hbar);
    let a = kinetic * (1.0 + ratio * cos);
    let b = potential * (1.0 - ratio * cos);
    let c = 0.5 * pump.amplitude * sin;
    let da = kinetic * (ratio_rate * cos - ratio * theta_rate * sin);
    let dc = 0.5 * (pump.amplitude_rate * sin + pump.amplitude * theta_rate * cos);
    QuadraticCoefficients {
        a,
        b,
        c,
        d: c,
        da,
        dc,
    }
}

/// Degenerate parametric oscillator coefficients at time `t`.
pub fn dpo_coefficients(params: &OscillatorParams, t: f64) -> QuadraticCoefficients {
    pumped_coefficients(params, PumpState::constant(params.lambda), t)
}

/// Pumped oscillator with time-dependent amplitude λ(t) and phase δ(t).
pub fn raiford_coefficients(
    params: &OscillatorParams,
    pump: &PumpSchedule,
    t: f64,
) -> Result<QuadraticCoefficients> {
    let state = pump.state(t)?;
    pumped_coefficients(params, state, t).check_finite(t)
}

/// Instantaneous pump amplitude and phase with their rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpState {
    pub amplitude: f64,
    pub amplitude_rate: f64,
    pub phase: f64,
    pub phase_rate: f64,
}

impl PumpState {
    fn constant(amplitude: f64) -> Self {
        Self {
            amplitude,
            amplitude_rate: 0.0,
            phase: 0.0,
            phase_rate: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PumpSchedule {
    Constant {
        amplitude: f64,
    },
    /// Pump detuned by `detuning` from 2ω: δ(t) = ε t.
    Detuned {
        amplitude: f64,
        detuning: f64,
    },
    Tabulated {
        amplitude: CubicSpline,
        phase: CubicSpline,
    },
}

impl PumpSchedule {
    pub fn constant(amplitude: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        Ok(Self::Constant { amplitude })
    }

    pub fn detuned(amplitude: f64, detuning: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        if !detuning.is_finite() {
            return Err(Error::InvalidParameter("detuning must be finite".into()));
        }
        Ok(Self::Detuned {
            amplitude,
            detuning,
        })
    }

    pub fn tabulated(times: Vec<f64>, amplitude: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if amplitude.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(
                "tabulated pump amplitude must be non-negative".into(),
            ));
        }
        Ok(Self::Tabulated {
            amplitude: CubicSpline::new(times.clone(), amplitude)?,
            phase: CubicSpline::new(times, phase)?,
        })
    }

    pub fn state(&self, t: f64) -> Result<PumpState> {
        match self {
            Self::Constant { amplitude } => Ok(PumpState::constant(*amplitude)),
            Self::Detuned {
                amplitude,
                detuning,
            } => Ok(PumpState {
                amplitude: *amplitude,
                amplitude_rate: 0.0,
                phase: detuning * t,
                phase_rate: *detuning,
            }),
            Self::Tabulated { amplitude, phase } => {
                let ((lam, dlam), (del, ddel)) = amplitude
                    .eval(t)
                    .zip(phase.eval(t))
                    .ok_or(Error::PumpOutOfDomain { t })?;
                if lam < 0.0 {
                    return Err(Error::NegativePumpAmplitude { t, amplitude: lam });
                }
                Ok(PumpState {
                    amplitude: lam,
                    amplitude_rate: dlam,
                    phase: del,
                    phase_rate: ddel,
                })
            }
        }
    }
}

fn check_amplitude(amplitude: f64) -> Result<()> {
    if amplitude.is_finite() && amplitude >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "pump amplitude must be non-negative, got {amplitude}"
        )))
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied coefficient function with an optional analytic derivative.
#[derive(Clone)]
pub struct CoefficientFn {
    value: ScalarFn,
    derivative: Option<ScalarFn>,
}

impl CoefficientFn {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
        }
    }

    pub fn constant(v: f64) -> Self {
        Self::with_derivative(move |_| v, |_| 0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    /// Analytic derivative when supplied, otherwise a central difference
    /// with step 1e-6·max(1, |t|).
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * t.abs().max(1.0);
                ((self.value)(t + h) - (self.value)(t - h)) / (2.0 * h)
            }
        }
    }
}

impl fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFn")
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct GenericCoefficients {
    pub a: CoefficientFn,
    pub b: CoefficientFn,
    pub c: CoefficientFn,
    pub d: CoefficientFn,
}

/// Wrap user callables in the common coefficient interface.
pub fn generic_coefficients(user: &GenericCoefficients, t: f64) -> Result<QuadraticCoefficients> {
    QuadraticCoefficients {
        a: user.a.value(t),
        b: user.b.value(t),
        c: user.c.value(t),
        d: user.d.value(t),
        da: user.a.derivative(t),
        dc: user.c.derivative(t),
    }
    .check_finite(t)
}

#[derive(Clone, Debug)]
pub enum OscillatorModel {
    Dpo(OscillatorParams),
    Raiford {
        params: OscillatorParams,
        pump: PumpSchedule,
    },
    Generic(GenericCoefficients),
}

impl OscillatorModel {
    pub fn dpo(params: OscillatorParams) -> Self {
        Self::Dpo(params)
    }

    /// λ = 0: the linear harmonic oscillator.
    pub fn harmonic(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        Ok(Self::Dpo(OscillatorParams::new(m, omega, 0.0, hbar)?))
    }

    /// The integrable case λ = ω = m = ħ = 1, where a(t) = cos²t.
    pub fn special_case() -> Self {
        Self::Dpo(OscillatorParams {
            m: 1.0,
            omega: 1.0,
            lambda: 1.0,
            hbar: 1.0,
        })
    }

    pub fn params(&self) -> Option<&OscillatorParams> {
        match self {
            Self::Dpo(p) | Self::Raiford { params: p, .. } => Some(p),
            Self::Generic(_) => None,
        }
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        spec.build()
    }
}

impl CoefficientModel for OscillatorModel {
    fn coefficients(&self, t: f64) -> Result<QuadraticCoefficients> {
        match self {
            Self::Dpo(p) => dpo_coefficients(p, t).check_finite(t),
            Self::Raiford { params, pump } => raiford_coefficients(params, pump, t),
            Self::Generic(g) => generic_coefficients(g, t),
        }
    }
}

impl<M: CoefficientModel + ?Sized> CoefficientModel for Arc<M> {
    fn coefficients(&self, t: f64) -> Result<QuadraticCoefficients> {
        (**self).coefficients(t)
    }
}

// ---------------------------------------------------------------------------
// JSON model documents

fn one() -> f64 {
    1.0
}

/// Serialized model definition, tagged by `"model"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Dpo {
        #[serde(default = "one")]
        m: f64,
        omega: f64,
        lambda: f64,
        #[serde(default = "one")]
        hbar: f64,
    },
    Raiford {
        #[serde(default = "one")]
        m: f64,
        omega: f64,
        #[serde(default = "one")]
        hbar: f64,
        pump: PumpSpec,
    },
    Generic {
        coefficients: GenericSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PumpSpec {
    Constant {
        amplitude: f64,
    },
    Detuned {
        amplitude: f64,
        detuning: f64,
    },
    Tabulated {
        times: Vec<f64>,
        amplitude: Vec<f64>,
        phase: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericSpec {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
    pub d: CoefficientSpec,
}

/// A coefficient given either as a constant or as a table (cubic spline).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl CoefficientSpec {
    fn build(&self) -> Result<CoefficientFn> {
        match self {
            Self::Constant(v) => Ok(CoefficientFn::constant(*v)),
            Self::Tabulated { times, values } => {
                let spline = Arc::new(CubicSpline::new(times.clone(), values.clone())?);
                let s2 = Arc::clone(&spline);
                Ok(CoefficientFn::with_derivative(
                    move |t| spline.eval(t).map_or(f64::NAN, |v| v.0),
                    move |t| s2.eval(t).map_or(f64::NAN, |v| v.1),
                ))
            }
        }
    }
}

impl PumpSpec {
    pub fn build(&self) -> Result<PumpSchedule> {
        match self {
            Self::Constant { amplitude } => PumpSchedule::constant(*amplitude),
            Self::Detuned {
                amplitude,
                detuning,
            } => PumpSchedule::detuned(*amplitude, *detuning),
            Self::Tabulated {
                times,
                amplitude,
                phase,
            } => PumpSchedule::tabulated(times.clone(), amplitude.clone(), phase.clone()),
        }
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<OscillatorModel> {
        match self {
            Self::Dpo {
                m,
                omega,
                lambda,
                hbar,
            } => Ok(OscillatorModel::Dpo(OscillatorParams::new(
                *m, *omega, *lambda, *hbar,
            )?)),
            Self::Raiford {
                m,
                omega,
                hbar,
                pump,
            } => Ok(OscillatorModel::Raiford {
                params: OscillatorParams::new(*m, *omega, 0.0, *hbar)?,
                pump: pump.build()?,
            }),
            Self::Generic { coefficients } => Ok(OscillatorModel::Generic(GenericCoefficients {
                a: coefficients.a.build()?,
                b: coefficients.b.build()?,
                c: coefficients.c.build()?,
                d: coefficients.d.build()?,
            })),
        }
    }
}

/// One pump period π/ω, handy for sampling.
pub fn pump_period(params: &OscillatorParams) -> f64 {
    PI / params.omega
}
