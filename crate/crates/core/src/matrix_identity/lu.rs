use num_complex::Complex64;

/// Determinant of a dense row-major complex matrix by LU factorization with
/// partial pivoting.
pub fn determinant(n: usize, entries: &[Complex64]) -> Complex64 {
    let mut m = entries.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row * n + col].norm() > m[piv * n + col].norm() {
                piv = row;
            }
        }
        if m[piv * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det *= d;
        for row in col + 1..n {
            let f = m[row * n + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for j in col..n {
                let u = m[col * n + j];
                m[row * n + j] -= f * u;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_small_matrices() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!((determinant(2, &[c(2.0), c(1.0), c(1.0), c(2.0)]) - c(3.0)).norm() < 1e-14);
        // needs a row swap
        let m = [c(0.0), c(1.0), c(1.0), c(0.0)];
        assert!((determinant(2, &m) - c(-1.0)).norm() < 1e-14);
        let i = Complex64::new(0.0, 1.0);
        let h = [c(1.0), i, -i, c(1.0)];
        assert!(determinant(2, &h).norm() < 1e-14);
    }
}
