//! Dense linear algebra for the tiny systems this crate solves
//! (dimensions up to 5: chart dimension plus the time axis).

/// Cholesky factor (lower triangular, row-major) of a symmetric
/// positive-definite matrix; `None` when the matrix is not PD.
pub fn cholesky(dim: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(dim: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * y[k];
        }
        y[i] = s / l[i * dim + i];
    }
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut s = y[i];
        for k in i + 1..dim {
            s -= l[k * dim + i] * x[k];
        }
        x[i] = s / l[i * dim + i];
    }
    x
}

/// Solve a symmetric positive-definite system.
pub fn solve_spd(dim: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    cholesky(dim, a).map(|l| cholesky_solve(dim, &l, b))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn invert_spd(dim: usize, a: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(dim, a)?;
    let mut inv = vec![0.0; dim * dim];
    let mut e = vec![0.0; dim];
    for j in 0..dim {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(dim, &l, &e);
        for i in 0..dim {
            inv[i * dim + j] = col[i];
        }
    }
    inv
}

/// Solve a general square system by LU with partial pivoting.
pub fn solve_lu(dim: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..dim).collect();
    for col in 0..dim {
        let (piv, piv_val) = (col..dim)
            .map(|r| (r, m[perm[r] * dim + col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if piv_val == 0.0 || !piv_val.is_finite() {
            return None;
        }
        perm.swap(col, piv);
        let p = perm[col];
        for r in col + 1..dim {
            let q = perm[r];
            let f = m[q * dim + col] / m[p * dim + col];
            m[q * dim + col] = 0.0;
            for c in col + 1..dim {
                m[q * dim + c] -= f * m[p * dim + c];
            }
            x[q] -= f * x[p];
        }
    }
    let mut out = vec![0.0; dim];
    for i in (0..dim).rev() {
        let p = perm[i];
        let mut s = x[p];
        for c in i + 1..dim {
            s -= m[p * dim + c] * out[c];
        }
        out[i] = s / m[p * dim + i];
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spd_solve_roundtrip() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0];
        let b = [1.0, -2.0, 0.7];
        let x = solve_spd(3, &a, &b).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert_relative_eq!(r, b[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert!(cholesky(2, &a).is_none());
    }

    #[test]
    fn lu_handles_indefinite() {
        // Lorentzian-style matrix.
        let a = [1.0, 0.0, 0.3, 0.0, 1.0, 0.0, 0.3, 0.0, -2.0];
        let b = [0.5, 1.0, -1.0];
        let x = solve_lu(3, &a, &b).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert_relative_eq!(r, b[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn invert_spd_gives_identity() {
        let a = [2.0, 0.3, 0.3, 1.5];
        let inv = invert_spd(2, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    s += a[i * 2 + k] * inv[k * 2 + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(s, want, epsilon = 1e-13);
            }
        }
    }
}
