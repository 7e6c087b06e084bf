//! Fixed-size dense helpers for fiber computations (n = 2 or 3).

pub type Vector<const D: usize> = [f64; D];
pub type Matrix<const D: usize> = [[f64; D]; D];

#[inline]
pub fn dot<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm<const D: usize>(a: &Vector<D>) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    let mut out = *a;
    for i in 0..D {
        out[i] += b[i];
    }
    out
}

#[inline]
pub fn sub<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    let mut out = *a;
    for i in 0..D {
        out[i] -= b[i];
    }
    out
}

#[inline]
pub fn scale<const D: usize>(a: &Vector<D>, s: f64) -> Vector<D> {
    let mut out = *a;
    for v in out.iter_mut() {
        *v *= s;
    }
    out
}

#[inline]
pub fn axpy<const D: usize>(y: &mut Vector<D>, alpha: f64, x: &Vector<D>) {
    for i in 0..D {
        y[i] += alpha * x[i];
    }
}

#[inline]
pub fn matvec<const D: usize>(m: &Matrix<D>, v: &Vector<D>) -> Vector<D> {
    let mut out = [0.0; D];
    for i in 0..D {
        for j in 0..D {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

/// `⟨m v, v⟩`
#[inline]
pub fn quad<const D: usize>(m: &Matrix<D>, v: &Vector<D>) -> f64 {
    dot(&matvec(m, v), v)
}

pub fn identity<const D: usize>() -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn diag<const D: usize>(d: &Vector<D>) -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        m[i][i] = d[i];
    }
    m
}

pub fn outer<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

pub fn mat_add_scaled<const D: usize>(a: &mut Matrix<D>, s: f64, b: &Matrix<D>) {
    for i in 0..D {
        for j in 0..D {
            a[i][j] += s * b[i][j];
        }
    }
}

pub fn mat_mul<const D: usize>(a: &Matrix<D>, b: &Matrix<D>) -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            for k in 0..D {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn transpose<const D: usize>(a: &Matrix<D>) -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[j][i];
        }
    }
    m
}

pub fn is_symmetric<const D: usize>(m: &Matrix<D>, tol: f64) -> bool {
    for i in 0..D {
        for j in 0..i {
            let scale = 1.0 + m[i][j].abs().max(m[j][i].abs());
            if (m[i][j] - m[j][i]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes relative to the matrix scale.
pub fn solve<const D: usize>(m: &Matrix<D>, b: &Vector<D>) -> Option<Vector<D>> {
    let mut a = *m;
    let mut x = *b;
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..D {
        let mut piv = col;
        for r in col + 1..D {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..D {
            let f = a[r][col] / a[col][col];
            for c in col..D {
                a[r][c] -= f * a[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..D).rev() {
        let mut s = x[col];
        for c in col + 1..D {
            s -= a[col][c] * x[c];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

pub fn inverse<const D: usize>(m: &Matrix<D>) -> Option<Matrix<D>> {
    let mut inv = [[0.0; D]; D];
    for j in 0..D {
        let mut e = [0.0; D];
        e[j] = 1.0;
        let col = solve(m, &e)?;
        for i in 0..D {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues<const D: usize>(m: &Matrix<D>) -> Vector<D> {
    sym_eigen(m).0
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// matching eigenvectors as columns.
pub fn sym_eigen<const D: usize>(m: &Matrix<D>) -> (Vector<D>, Matrix<D>) {
    let mut a = *m;
    let mut v = identity::<D>();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..D {
            for j in 0..i {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..D {
            for q in p + 1..D {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..D {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..D {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..D {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..D).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut vals = [0.0; D];
    let mut vecs = [[0.0; D]; D];
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = a[src][src];
        for k in 0..D {
            vecs[k][dst] = v[k][src];
        }
    }
    (vals, vecs)
}

pub fn is_finite<const D: usize>(v: &Vector<D>) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn cross(a: &Vector<3>, b: &Vector<3>) -> Vector<3> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse_round_trip() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = inverse(&m).unwrap();
        let p = mat_mul(&m, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[i][j] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = [[1.0, 2.0], [2.0, 4.0]];
        assert!(solve(&m, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_eigenvalues_match_closed_form() {
        let m = [[2.0, 1.0], [1.0, 2.0]];
        let ev = sym_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
        let m3 = [[2.0, 0.0, 0.0], [0.0, 3.0, 4.0], [0.0, 4.0, 9.0]];
        let ev3 = sym_eigenvalues(&m3);
        assert!((ev3[0] - 1.0).abs() < 1e-12);
        assert!((ev3[1] - 2.0).abs() < 1e-12);
        assert!((ev3[2] - 11.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let m = [[3.0, 0.4, -0.2], [0.4, 1.0, 0.3], [-0.2, 0.3, 2.0]];
        let (vals, vecs) = sym_eigen(&m);
        for k in 0..3 {
            let col = [vecs[0][k], vecs[1][k], vecs[2][k]];
            let mv = matvec(&m, &col);
            for i in 0..3 {
                assert!((mv[i] - vals[k] * col[i]).abs() < 1e-12);
            }
        }
    }
}
