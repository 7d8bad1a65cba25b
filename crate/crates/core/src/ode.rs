//! Dormand–Prince 5(4) integrator with Shampine's continuous extension.
//!
//! Step-size control follows Hairer, Nørsett & Wanner (DOPRI5). The dense
//! output is a quartic in θ that matches y and y′ at both ends of every
//! accepted step, so the interpolant is C¹ across step boundaries.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on |h|; `None` lets the controller choose.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }

    fn end(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Accepted steps of one integration together with their interpolants.
#[derive(Clone, Debug)]
pub struct DenseTrajectory<const N: usize> {
    t_start: f64,
    y_start: [f64; N],
    steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseTrajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(self.t_start, DenseStep::end)
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Times of all accepted mesh points, including the start.
    pub fn mesh(&self) -> Vec<f64> {
        std::iter::once(self.t_start)
            .chain(self.steps.iter().map(DenseStep::end))
            .collect()
    }

    fn forward(&self) -> bool {
        self.t_end() >= self.t_start
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.forward() {
            (self.t_start, self.t_end())
        } else {
            (self.t_end(), self.t_start)
        };
        // absorb rounding in caller-computed sample times such as k·Δt
        let slack = 1e-13 * lo.abs().max(hi.abs()).max(1.0);
        t >= lo - slack && t <= hi + slack
    }

    /// Dense-output state at `t`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if !self.contains(t) {
            return None;
        }
        if t == self.t_start || self.steps.is_empty() {
            return Some(self.y_start);
        }
        let idx = if self.forward() {
            self.steps.partition_point(|s| s.end() < t)
        } else {
            self.steps.partition_point(|s| s.end() > t)
        };
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        Some(step.eval(t))
    }

    /// State at the end of each accepted step.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, [f64; N])> + '_ {
        std::iter::once((self.t_start, self.y_start)).chain(self.steps.iter().map(|s| {
            (
                s.end(),
                std::array::from_fn(|i| s.rcont[0][i] + s.rcont[1][i]),
            )
        }))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    tol: &Tolerances,
) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

/// Integrate `y′ = f(t, y)` from `t0` to `t_end` (either direction).
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
) -> Result<DenseTrajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut traj = DenseTrajectory {
        t_start: t0,
        y_start: y0,
        steps: Vec::new(),
    };
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = span.signum();
    let max_step = tol.max_step.unwrap_or(span.abs()).min(span.abs());

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;

    // initial step guess (Hairer's heuristic)
    let mut h = {
        let sc: [f64; N] = std::array::from_fn(|i| tol.atol + tol.rtol * y[i].abs());
        let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d1 = (k1
            .iter()
            .zip(&sc)
            .map(|(v, s)| (v / s).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(max_step);
        let y1 = axpy(&y, dir * h0, &[(1.0, &k1)]);
        let k2 = f(t + dir * h0, &y1)?;
        let d2 = (k2
            .iter()
            .zip(&k1)
            .zip(&sc)
            .map(|((a, b), s)| ((a - b) / s).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(max_step) * dir
    };

    let mut rejected_last = false;
    while (t_end - t) * dir > 0.0 {
        if traj.steps.len() >= tol.max_steps {
            return Err(Error::MaxStepsExceeded { t });
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }

        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = f(t + C2 * h, &y2)?;
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * h, &y3)?;
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * h, &y4)?;
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * h, &y5)?;
        let y6 = axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let t_new = if (t + h - t_end) * dir >= 0.0 {
            t_end
        } else {
            t + h
        };
        let k6 = f(t_new, &y6)?;
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t_new, &y_new)?;

        let err: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = error_norm(&err, &y, &y_new, tol);

        if !err.is_finite() {
            h *= 0.25;
            rejected_last = true;
            continue;
        }

        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 10.0);
        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                }),
            ];
            traj.steps.push(DenseStep {
                t0: t,
                h: t_new - t,
                rcont,
            });
            t = t_new;
            y = y_new;
            k1 = k7;
            let fac = if rejected_last { fac.min(1.0) } else { fac };
            h = (h * fac).abs().min(max_step) * dir;
            rejected_last = false;
        } else {
            h *= fac.min(1.0);
            rejected_last = true;
        }
    }
    Ok(traj)
}
