use super::Matrix;
use crate::error::{contract, numeric, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix: eigenvalues in descending order and the
/// matching orthonormal eigenvectors as the columns of `basis`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: Matrix,
}

impl EigenDecomposition {
    /// `V · diag(λ) · Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvalues.len();
        let mut s = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = (0..n)
                    .map(|k| self.basis[(i, k)] * self.eigenvalues[k] * self.basis[(j, k)])
                    .sum();
            }
        }
        s
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below `1e-14`
/// times the Frobenius norm of the input.
pub fn sym_eig(s: &Matrix) -> Result<EigenDecomposition> {
    let n = s.dim();
    if !s.is_finite() {
        return Err(contract("sym_eig: non-finite entries"));
    }
    let scale = s.max_abs();
    for i in 0..n {
        for j in i + 1..n {
            if (s[(i, j)] - s[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(contract(format!(
                    "sym_eig: matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    let mut a = s.clone();
    // Symmetrise so the rotations act on an exactly symmetric matrix.
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let total = a.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOL * total;

    let mut converged = total == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off > threshold {
            return Err(numeric(format!(
                "sym_eig: no convergence after {MAX_SWEEPS} sweeps (off-diagonal {off:e})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let cols: Vec<Vec<f64>> = order.iter().map(|&j| v.column(j)).collect();
    Ok(EigenDecomposition {
        eigenvalues,
        basis: Matrix::from_columns(&cols)?,
    })
}

/// Operator 2-norm `max_{|x|=1} |Ax|`.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let eig = sym_eig(&a.gram())?;
    Ok(eig.eigenvalues[0].max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_eigenvalues() {
        let e = sym_eig(&Matrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_sorted_descending_with_permuted_basis() {
        let e = sym_eig(&Matrix::from_diag(&[1.0, 4.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![4.0, 1.0]);
        assert_eq!(e.basis.column(0).iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert_eq!(e.basis.column(1).iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn spectral_norms() {
        assert!((spectral_norm(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        assert!((spectral_norm(&Matrix::from_diag(&[3.0, 1.0])).unwrap() - 3.0).abs() < 1e-15);
        for k in 0..16 {
            let th = 0.37 * k as f64;
            let r = Matrix::from_rows(&[vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]])
                .unwrap();
            assert!((spectral_norm(&r).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix() {
        let e = sym_eig(&Matrix::zeros(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
    }
}
