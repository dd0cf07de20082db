//! Symmetric eigenvalues by cyclic Jacobi rotations.

use alloc::vec::Vec;

use crate::math::{abs, sqrt};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of the symmetric `n × n` matrix stored row-major in `a`,
/// sorted ascending. Only the upper triangle is read.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m: Vec<f64> = a.to_vec();
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let scale: f64 = m.iter().map(|v| v * v).sum::<f64>();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                if abs(m[p * n + q]) < f64::MIN_POSITIVE {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        assert_eq!(
            symmetric_eigenvalues(3, &[3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]),
            [-1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn two_by_two() {
        let e = symmetric_eigenvalues(2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(abs(e[0] - 1.0) < 1e-14 && abs(e[1] - 3.0) < 1e-14);
    }

    #[test]
    fn trace_and_determinant() {
        let a = [4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0];
        let e = symmetric_eigenvalues(3, &a);
        assert!(abs(e.iter().sum::<f64>() - 9.0) < 1e-12);
        let det = 4.0 * (2.0 * 3.0 - 0.25) - 1.0 * (3.0 + 1.0) + (-2.0) * (0.5 + 4.0);
        assert!(abs(e.iter().product::<f64>() - det) < 1e-11);
    }
}
