//! Ince's equation
//!
//! ```text
//! (1 + a₀ cos 2s) y″ + b₀ sin 2s y′ + (c₀ + d₀ cos 2s) y = 0
//! ```
//!
//! For the degenerate parametric oscillator s = ωt and
//! a₀ = λ/ω, b₀ = 2a₀, c₀ = 1 − 3a₀², d₀ = −a₀(1 + a₀²).
//!
//! Two independent π-periodic solutions require an integer zero of
//! P(ξ) = 2a₀ξ² − b₀ξ − d₀/2; two 2π-periodic solutions require an integer
//! zero of Q(ξ) = 2P(ξ − 1/2). These are necessary conditions only, so the
//! report says "possible" or "ruled out", never "exists".
//!
//! Substituting a cosine or sine series with harmonics k into the equation
//! and applying product-to-sum identities gives, for the coefficient of
//! harmonic m,
//!
//! ```text
//! (c₀ − m²) A_m − ½(a₀(m−2)² − b₀(m−2) − d₀) A_{m−2}
//!              − ½(a₀(m+2)² + b₀(m+2) − d₀) A_{m+2} = 0
//! ```
//!
//! with the obvious folding of negative harmonics (cos(−ks) = cos ks,
//! sin(−ks) = −sin ks).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::OscillatorParams;

pub const DEFAULT_XI_MAX: i64 = 50;
/// Integrality tolerance for the closed-form roots of P and Q.
pub const ROOT_INTEGRALITY_TOL: f64 = 1e-9;
/// Grid size for the defect norm of a truncated series.
pub const DEFECT_GRID: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InceForm {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
    /// Time scale ω of s = ωt, when the form came from an oscillator.
    pub omega: Option<f64>,
}

impl InceForm {
    pub fn new(a0: f64, b0: f64, c0: f64, d0: f64) -> Self {
        Self {
            a0,
            b0,
            c0,
            d0,
            omega: None,
        }
    }

    /// Defect (1 + a₀cos 2s)y″ + b₀ sin 2s y′ + (c₀ + d₀cos 2s)y.
    pub fn defect(&self, s: f64, y: f64, dy: f64, d2y: f64) -> f64 {
        let (sin2, cos2) = (2.0 * s).sin_cos();
        (1.0 + self.a0 * cos2) * d2y + self.b0 * sin2 * dy + (self.c0 + self.d0 * cos2) * y
    }

    /// τ(t), σ(t) of the equivalent characteristic equation
    /// μ″ − τμ′ + 4σμ = 0 in the original time variable.
    pub fn characteristic_tau_sigma(&self, t: f64) -> (f64, f64) {
        let omega = self.omega.unwrap_or(1.0);
        let (sin2, cos2) = (2.0 * omega * t).sin_cos();
        let lead = 1.0 + self.a0 * cos2;
        let tau = -omega * self.b0 * sin2 / lead;
        let sigma = omega * omega * (self.c0 + self.d0 * cos2) / (4.0 * lead);
        (tau, sigma)
    }
}

/// Ince parameters of the degenerate parametric oscillator.
pub fn to_ince_form(params: &OscillatorParams) -> Result<InceForm> {
    let r = params.coupling_ratio();
    if r >= 1.0 {
        return Err(Error::KineticDegenerate { t: 0.0, a: 0.0 });
    }
    Ok(InceForm {
        a0: r,
        b0: 2.0 * r,
        c0: 1.0 - 3.0 * r * r,
        d0: -r * (1.0 + r * r),
        omega: Some(params.omega),
    })
}

/// q₂ ξ² + q₁ ξ + q₀, stored as `[q₂, q₁, q₀]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadratic(pub [f64; 3]);

impl Quadratic {
    pub fn eval(&self, xi: f64) -> f64 {
        let [q2, q1, q0] = self.0;
        (q2 * xi + q1) * xi + q0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Infimum over the real line; `None` when unbounded below.
    pub fn minimum(&self) -> Option<f64> {
        let [q2, q1, q0] = self.0;
        if q2 > 0.0 {
            Some(q0 - q1 * q1 / (4.0 * q2))
        } else if q2 == 0.0 && q1 == 0.0 {
            Some(q0)
        } else {
            None
        }
    }

    pub fn real_roots(&self) -> Vec<f64> {
        let [q2, q1, q0] = self.0;
        if q2 == 0.0 {
            return if q1 == 0.0 {
                Vec::new()
            } else {
                vec![-q0 / q1]
            };
        }
        let disc = q1 * q1 - 4.0 * q2 * q0;
        if disc < 0.0 {
            return Vec::new();
        }
        // numerically stable pair
        let sign = if q1 >= 0.0 { 1.0 } else { -1.0 };
        let s = -0.5 * (q1 + sign * disc.sqrt());
        let mut r = if s == 0.0 {
            vec![0.0]
        } else {
            vec![s / q2, q0 / s]
        };
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }
}

/// P(ξ) = 2a₀ξ² − b₀ξ − d₀/2 and Q(ξ) = 2P(ξ − 1/2).
pub fn periodicity_polynomials(form: &InceForm) -> (Quadratic, Quadratic) {
    let InceForm { a0, b0, d0, .. } = *form;
    let p = Quadratic([2.0 * a0, -b0, -0.5 * d0]);
    let q = Quadratic([4.0 * a0, -4.0 * a0 - 2.0 * b0, a0 + b0 - d0]);
    (p, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub form: InceForm,
    pub p: Quadratic,
    pub q: Quadratic,
    pub xi_max: i64,
    /// Integers in [−ξ_max, ξ_max] or integral real roots where P vanishes.
    pub p_integer_zeros: Vec<i64>,
    pub q_integer_zeros: Vec<i64>,
    pub min_p: Option<f64>,
    pub min_q: Option<f64>,
    /// P ≡ 0: every integer is a zero.
    pub degenerate: bool,
    pub pi_pair_possible: bool,
    pub two_pi_pair_possible: bool,
}

fn integer_zeros(poly: &Quadratic, xi_max: i64) -> Vec<i64> {
    let scale = poly.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut zeros: Vec<i64> = (-xi_max..=xi_max)
        .filter(|&k| {
            let x = k as f64;
            poly.eval(x).abs() <= 1e-12 * scale * (1.0 + x * x)
        })
        .collect();
    for r in poly.real_roots() {
        let k = r.round();
        if (r - k).abs() <= ROOT_INTEGRALITY_TOL && k.abs() < i64::MAX as f64 {
            zeros.push(k as i64);
        }
    }
    zeros.sort_unstable();
    zeros.dedup();
    zeros
}

pub fn classify_periodicity(form: &InceForm) -> PeriodicityReport {
    classify_periodicity_with(form, DEFAULT_XI_MAX)
}

pub fn classify_periodicity_with(form: &InceForm, xi_max: i64) -> PeriodicityReport {
    let (p, q) = periodicity_polynomials(form);
    let degenerate = p.is_zero();
    let p_integer_zeros = if degenerate {
        Vec::new()
    } else {
        integer_zeros(&p, xi_max)
    };
    let q_integer_zeros = if degenerate {
        Vec::new()
    } else {
        integer_zeros(&q, xi_max)
    };
    PeriodicityReport {
        form: *form,
        p,
        q,
        xi_max,
        min_p: p.minimum(),
        min_q: q.minimum(),
        degenerate,
        pi_pair_possible: degenerate || !p_integer_zeros.is_empty(),
        two_pi_pair_possible: degenerate || !q_integer_zeros.is_empty(),
        p_integer_zeros,
        q_integer_zeros,
    }
}

/// Which Fourier family a trial solution is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesClass {
    /// Σ A₂ₙ cos 2ns, n = 0..N
    EvenPi,
    /// Σ B₂ₙ sin 2ns, n = 1..N+1
    OddPi,
    /// Σ A₂ₙ₊₁ cos (2n+1)s
    Even2Pi,
    /// Σ B₂ₙ₊₁ sin (2n+1)s
    Odd2Pi,
}

impl SeriesClass {
    pub const ALL: [SeriesClass; 4] = [Self::EvenPi, Self::OddPi, Self::Even2Pi, Self::Odd2Pi];

    pub fn harmonics(self, n: usize) -> Vec<i64> {
        (0..=n as i64)
            .map(|i| match self {
                Self::EvenPi => 2 * i,
                Self::OddPi => 2 * i + 2,
                Self::Even2Pi | Self::Odd2Pi => 2 * i + 1,
            })
            .collect()
    }

    pub fn is_sine(self) -> bool {
        matches!(self, Self::OddPi | Self::Odd2Pi)
    }

    pub fn period(self) -> f64 {
        match self {
            Self::EvenPi | Self::OddPi => std::f64::consts::PI,
            Self::Even2Pi | Self::Odd2Pi => 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTrialSolution {
    pub class: SeriesClass,
    pub order: usize,
    pub harmonics: Vec<i64>,
    /// Unit norm, first nonzero entry positive.
    pub coefficients: Vec<f64>,
    /// L² norm of the Ince defect of the truncated series over one period.
    pub residual_norm: f64,
    /// ‖M v‖ for the banded system M.
    pub system_residual: f64,
    /// Spectral norm ‖M‖.
    pub system_norm: f64,
}

impl FourierTrialSolution {
    /// y, y′, y″ of the truncated series at s.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let sine = self.class.is_sine();
        self.harmonics.iter().zip(&self.coefficients).fold(
            (0.0, 0.0, 0.0),
            |(y, dy, d2y), (&k, &c)| {
                let k = k as f64;
                let (sn, cs) = (k * s).sin_cos();
                if sine {
                    (y + c * sn, dy + c * k * cs, d2y - c * k * k * sn)
                } else {
                    (y + c * cs, dy - c * k * sn, d2y - c * k * k * cs)
                }
            },
        )
    }
}

/// The (N+1)×(N+1) three-term system for the chosen series class.
pub fn trial_system(form: &InceForm, class: SeriesClass, n: usize) -> (Vec<i64>, DMatrix<f64>) {
    let harmonics = class.harmonics(n);
    let index = |m: i64| harmonics.iter().position(|&k| k == m);
    let sine = class.is_sine();
    let InceForm { a0, b0, c0, d0, .. } = *form;
    let mut mat = DMatrix::zeros(n + 1, n + 1);
    for (col, &k) in harmonics.iter().enumerate() {
        let kf = k as f64;
        let mut add = |m: i64, v: f64| {
            let (m, sign) = if m < 0 {
                (-m, if sine { -1.0 } else { 1.0 })
            } else {
                (m, 1.0)
            };
            if sine && m == 0 {
                return;
            }
            if let Some(row) = index(m) {
                mat[(row, col)] += sign * v;
            }
        };
        add(k, c0 - kf * kf);
        add(k + 2, -0.5 * (a0 * kf * kf - b0 * kf - d0));
        add(k - 2, -0.5 * (a0 * kf * kf + b0 * kf - d0));
    }
    (harmonics, mat)
}

/// Trapezoidal L² norm of the Ince defect over one period.
pub fn defect_norm(form: &InceForm, trial: &FourierTrialSolution) -> f64 {
    let period = trial.class.period();
    let h = period / DEFECT_GRID as f64;
    // periodic integrand: the trapezoid rule is a plain sum
    let sum: f64 = (0..DEFECT_GRID)
        .map(|i| {
            let s = i as f64 * h;
            let (y, dy, d2y) = trial.eval(s);
            form.defect(s, y, dy, d2y).powi(2)
        })
        .sum();
    (sum * h).sqrt()
}

/// Truncated Fourier trial solution from the minimal right singular vector.
pub fn fourier_trial(
    form: &InceForm,
    class: SeriesClass,
    n: usize,
) -> Result<FourierTrialSolution> {
    if n < 4 {
        return Err(Error::TruncationTooSmall { n });
    }
    let (harmonics, mat) = trial_system(form, class, n);
    let svd = mat.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty system");
    let system_norm = svd.singular_values.max();
    let mut coefficients: Vec<f64> = v_t.row(imin).iter().copied().collect();
    let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
    coefficients.iter_mut().for_each(|c| *c /= norm);
    if let Some(first) = coefficients.iter().find(|c| c.abs() > 1e-14) {
        if *first < 0.0 {
            coefficients.iter_mut().for_each(|c| *c = -*c);
        }
    }
    let v = nalgebra::DVector::from_column_slice(&coefficients);
    let system_residual = (&mat * v).norm();

    let mut trial = FourierTrialSolution {
        class,
        order: n,
        harmonics,
        coefficients,
        residual_norm: 0.0,
        system_residual,
        system_norm,
    };
    trial.residual_norm = defect_norm(form, &trial);
    Ok(trial)
}

/// (N, r(N)) for each requested order.
pub fn convergence_table(
    form: &InceForm,
    class: SeriesClass,
    orders: &[usize],
) -> Result<Vec<(usize, f64)>> {
    orders
        .iter()
        .map(|&n| fourier_trial(form, class, n).map(|t| (n, t.residual_norm)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dpo_form(r: f64) -> InceForm {
        to_ince_form(&OscillatorParams::natural(1.0, r).unwrap()).unwrap()
    }

    #[test]
    fn dpo_parameters() {
        let f = dpo_form(0.5);
        assert_eq!((f.a0, f.b0, f.c0, f.d0), (0.5, 1.0, 0.25, -0.625));
        let f = dpo_form(0.0);
        assert_eq!((f.a0, f.b0, f.c0), (0.0, 0.0, 1.0));
        assert_eq!(f.d0, 0.0);
        assert!(matches!(
            to_ince_form(&OscillatorParams::natural(1.0, 1.0).unwrap()),
            Err(Error::KineticDegenerate { .. })
        ));
    }

    #[test]
    fn polynomial_values() {
        let (p, q) = periodicity_polynomials(&dpo_form(0.5));
        assert!((p.eval(0.0) - 0.3125).abs() < 1e-15);
        assert!((p.minimum().unwrap() - 0.0625).abs() < 1e-15);
        assert!((p.eval(0.5) - 0.0625).abs() < 1e-15);
        assert!((q.eval(1.0) - 0.125).abs() < 1e-15);

        let (p, q) = periodicity_polynomials(&dpo_form(0.0));
        assert!(p.is_zero());
        assert!(q.is_zero());
    }

    #[test]
    fn dpo_rules_out_periodic_pairs() {
        let report = classify_periodicity(&dpo_form(0.3));
        assert!(!report.pi_pair_possible);
        assert!(!report.two_pi_pair_possible);
        assert!(!report.degenerate);
        assert!((report.min_p.unwrap() - 0.6 * 0.0225).abs() < 1e-15);
    }

    #[test]
    fn d0_zero_form_has_p_zero_at_origin() {
        let form = InceForm::new(0.3, 0.6, 1.0, 0.0);
        let report = classify_periodicity(&form);
        assert_eq!(report.p.eval(0.0), 0.0);
        assert!(report.pi_pair_possible);
        assert!(report.p_integer_zeros.contains(&0));
        assert!(report.p_integer_zeros.contains(&1));
    }

    #[test]
    fn pump_off_is_degenerate() {
        let report = classify_periodicity(&dpo_form(0.0));
        assert!(report.degenerate);
        assert!(report.pi_pair_possible && report.two_pi_pair_possible);
    }

    #[test]
    fn large_integer_roots_are_found_beyond_the_scan() {
        // P(ξ) = (ξ − 120)(ξ + 3)·2a₀ with a₀ = 0.5
        let a0 = 0.5;
        let b0 = 2.0 * a0 * 117.0;
        let d0 = 2.0 * 2.0 * a0 * 360.0;
        let report = classify_periodicity(&InceForm::new(a0, b0, 1.0, d0));
        assert_eq!(report.p_integer_zeros, vec![-3, 120]);
    }

    #[test]
    fn ince_form_reproduces_characteristic_form() {
        use crate::characteristic::CharacteristicForm;
        use crate::models::OscillatorModel;
        let params = OscillatorParams::new(1.0, 1.7, 0.6, 1.0).unwrap();
        let form = to_ince_form(&params).unwrap();
        let ch = CharacteristicForm::new(OscillatorModel::Dpo(params));
        for i in 0..50 {
            let t = 0.137 * i as f64;
            let (tau, sigma) = form.characteristic_tau_sigma(t);
            let v = ch.eval(t).unwrap();
            assert!((tau - v.tau).abs() < 1e-10, "tau at {t}");
            assert!((sigma - v.sigma).abs() < 1e-10, "sigma at {t}");
        }
    }

    #[test]
    fn trivial_cosine_is_exact() {
        let form = InceForm::new(0.0, 0.0, 1.0, 0.0);
        let trial = fourier_trial(&form, SeriesClass::Even2Pi, 8).unwrap();
        assert_eq!(trial.coefficients.len(), 9);
        assert!((trial.coefficients[0] - 1.0).abs() < 1e-14);
        assert!(trial.residual_norm <= 1e-12);
        assert!(trial.system_residual <= 1e-10 * trial.system_norm);
    }

    #[test]
    fn truncation_floor() {
        assert_eq!(
            fourier_trial(&dpo_form(0.5), SeriesClass::EvenPi, 3),
            Err(Error::TruncationTooSmall { n: 3 })
        );
    }

    #[test]
    fn dpo_trials_do_not_converge() {
        let form = dpo_form(0.5);
        for class in SeriesClass::ALL {
            for n in [8, 16, 32, 64] {
                let t = fourier_trial(&form, class, n).unwrap();
                assert!(
                    t.residual_norm > 1e-3,
                    "{class:?} N={n}: {}",
                    t.residual_norm
                );
            }
        }
    }

    #[test]
    fn trial_normalization() {
        let t = fourier_trial(&dpo_form(0.2), SeriesClass::OddPi, 16).unwrap();
        let norm: f64 = t.coefficients.iter().map(|c| c * c).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        assert!(t.coefficients.iter().find(|c| c.abs() > 1e-14).unwrap() > &0.0);
        assert!(t.residual_norm.is_finite() && t.residual_norm >= 0.0);
    }

    #[test]
    fn terminating_series_is_recovered() {
        // With P(1) = 0 the coupling sin 2s → sin 4s vanishes, and c₀ = 4
        // makes sin 2s an exact solution.
        let form = InceForm::new(0.3, 0.6, 4.0, 0.0);
        let t = fourier_trial(&form, SeriesClass::OddPi, 8).unwrap();
        assert!(t.residual_norm < 1e-12, "{}", t.residual_norm);
        assert!((t.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(t.system_residual <= 1e-10 * t.system_norm);
    }
}
