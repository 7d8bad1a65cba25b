//! Hermite polynomials and orthonormal Hermite functions.

use std::f64::consts::PI;

/// Physicists' H_n(z) by H_{n+1} = 2zH_n − 2nH_{n−1}.
pub fn hermite_polynomial(n: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * z);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// h_n(z) = (2ⁿ n! √π)^(−1/2) H_n(z) e^(−z²/2).
///
/// The normalization is carried through the recurrence
/// h_{n+1} = √(2/(n+1)) z h_n − √(n/(n+1)) h_{n−1}, so no factorial is formed.
pub fn hermite_function(n: usize, z: f64) -> f64 {
    let h0 = PI.powf(-0.25) * (-0.5 * z * z).exp();
    if n == 0 {
        return h0;
    }
    let (mut prev, mut cur) = (h0, std::f64::consts::SQRT_2 * z * h0);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_polynomials() {
        let z = 0.7;
        assert_eq!(hermite_polynomial(0, z), 1.0);
        assert!((hermite_polynomial(2, z) - (4.0 * z * z - 2.0)).abs() < 1e-14);
        assert!((hermite_polynomial(3, z) - (8.0 * z.powi(3) - 12.0 * z)).abs() < 1e-14);
    }

    #[test]
    fn functions_match_polynomials() {
        let mut fact = 1.0;
        for n in 0..12 {
            if n > 0 {
                fact *= n as f64;
            }
            for z in [-2.3, -0.4, 0.0, 1.1, 3.0] {
                let direct = hermite_polynomial(n, z) * (-0.5 * z * z).exp()
                    / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt();
                assert!(
                    (hermite_function(n, z) - direct).abs() < 1e-13,
                    "n={n} z={z}"
                );
            }
        }
    }

    #[test]
    fn high_order_stays_finite_and_normalized() {
        let n = 200;
        let h = 0.01;
        let norm: f64 = (-4000..=4000)
            .map(|k| hermite_function(n, k as f64 * h).powi(2) * h)
            .sum();
        assert!((norm - 1.0).abs() < 1e-10, "{norm}");
    }
}
