//! Pentadiagonal finite-difference operators on a uniform grid with
//! homogeneous Dirichlet edges.
//!
//! p² → −D₂ and p = −i D₁ with fourth-order central stencils. The mixed
//! term c·px + d·xp becomes −i(c D₁X + d XD₁), which is Hermitian when
//! c = d.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::models::QuadraticCoefficients;

const BANDS: usize = 5;
const HALF: usize = 2;

/// Fourth-order first-derivative stencil over offsets −2..=2.
pub const D1_STENCIL: [f64; BANDS] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
/// Fourth-order second-derivative stencil over offsets −2..=2.
pub const D2_STENCIL: [f64; BANDS] = [
    -1.0 / 12.0,
    16.0 / 12.0,
    -30.0 / 12.0,
    16.0 / 12.0,
    -1.0 / 12.0,
];

/// Row-wise band storage: `rows[i][k]` is the entry (i, i + k − 2).
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix {
    rows: Vec<[Complex64; BANDS]>,
}

impl BandedMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![[Complex64::new(0.0, 0.0); BANDS]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = j as isize - i as isize + HALF as isize;
        if (0..BANDS as isize).contains(&k) {
            self.rows[i][k as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.rows.len();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &m) in self.rows[i].iter().enumerate() {
                    let j = i as isize + k as isize - HALF as isize;
                    if j >= 0 && (j as usize) < n {
                        acc += m * v[j as usize];
                    }
                }
                acc
            })
            .collect()
    }

    /// I + s·self.
    pub fn shifted_identity(&self, s: Complex64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = r.map(|m| s * m);
                out[HALF] += 1.0;
                out
            })
            .collect();
        Self { rows }
    }

    /// Solve self·x = rhs by band LU without pivoting.
    ///
    /// Intended for Cayley-type matrices I + iK with Hermitian K, whose
    /// Hermitian part is the identity.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.rows.len();
        let mut a = self.rows.clone();
        let mut x = rhs.to_vec();
        for i in 0..n {
            let pivot = a[i][HALF];
            if pivot.norm() < 1e-300 {
                return Err(Error::LinearSolveFailure { row: i });
            }
            for r in 1..=HALF {
                let row = i + r;
                if row >= n {
                    break;
                }
                // entry (row, i) lives at band index HALF − r
                let factor = a[row][HALF - r] / pivot;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..=HALF {
                    // (row, i + c) ← (row, i + c) − factor·(i, i + c)
                    let src = a[i][HALF + c];
                    a[row][HALF - r + c] -= factor * src;
                }
                x[row] = x[row] - factor * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for c in 1..=HALF {
                if i + c < n {
                    acc -= a[i][HALF + c] * x[i + c];
                }
            }
            x[i] = acc / a[i][HALF];
        }
        Ok(x)
    }
}

/// H = a p² + b x² + c px + d xp discretized on `grid`.
pub fn hamiltonian(grid: &Grid, q: &QuadraticCoefficients) -> BandedMatrix {
    let h = grid.spacing();
    let n = grid.n;
    let i_unit = Complex64::new(0.0, 1.0);
    let mut m = BandedMatrix::zeros(n);
    for i in 0..n {
        let xi = grid.x(i);
        for k in 0..BANDS {
            let j = i as isize + k as isize - HALF as isize;
            if j < 0 || j as usize >= n {
                continue;
            }
            let xj = grid.x(j as usize);
            let kinetic = -q.a * D2_STENCIL[k] / (h * h);
            let mixed = -i_unit * (q.c * xj + q.d * xi) * D1_STENCIL[k] / h;
            m.rows[i][k] = Complex64::new(kinetic, 0.0) + mixed;
        }
        m.rows[i][HALF] += q.b * xi * xi;
    }
    m
}

/// Fourth-order D₁ applied to samples (zero outside the grid).
pub fn d1(grid: &Grid, v: &[Complex64]) -> Vec<Complex64> {
    stencil_apply(v, &D1_STENCIL, 1.0 / grid.spacing())
}

/// Fourth-order D₂ applied to samples (zero outside the grid).
pub fn d2(grid: &Grid, v: &[Complex64]) -> Vec<Complex64> {
    let h = grid.spacing();
    stencil_apply(v, &D2_STENCIL, 1.0 / (h * h))
}

fn stencil_apply(v: &[Complex64], stencil: &[f64; BANDS], scale: f64) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &w) in stencil.iter().enumerate() {
                let j = i as isize + k as isize - HALF as isize;
                if w != 0.0 && j >= 0 && (j as usize) < n {
                    acc += v[j as usize] * w;
                }
            }
            acc * scale
        })
        .collect()
}
