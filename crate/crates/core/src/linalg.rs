//! Dense helpers on top of nalgebra: full SVD, null spaces, subspace intersections.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, SVD};

/// Thin SVD. nalgebra's bidiagonal iteration occasionally returns factors that do not
/// reconstruct `a` (seen on rank-one 2x2 input); those cases fall back to one-sided Jacobi.
pub fn svd(a: &DMatrix<f64>, compute_u: bool, compute_v: bool) -> SVD<f64, Dyn, Dyn> {
    let mut s = a.clone().svd(true, true);
    let (u, vt) = (s.u.as_ref().unwrap(), s.v_t.as_ref().unwrap());
    let recon = u * DMatrix::from_diagonal(&s.singular_values) * vt;
    let scale = a.norm().max(f64::MIN_POSITIVE);
    if (recon - a).norm() > 1e-12 * scale * (a.nrows().max(a.ncols()) as f64) {
        s = jacobi_svd(a);
    }
    if !compute_u {
        s.u = None;
    }
    if !compute_v {
        s.v_t = None;
    }
    s
}

/// One-sided (Hestenes) Jacobi SVD, singular values descending.
pub fn jacobi_svd(a: &DMatrix<f64>) -> SVD<f64, Dyn, Dyn> {
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.transpose());
        return SVD { u: t.v_t.map(|v| v.transpose()), v_t: t.u.map(|u| u.transpose()), singular_values: t.singular_values };
    }
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let mut u = DMatrix::<f64>::zeros(m, n);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > f64::EPSILON * smax * (m as f64) && norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / norms[j]));
            filled = k + 1;
        }
    }
    // complete the left factor for negligible singular values
    let mut e = 0;
    for k in filled..n {
        loop {
            let mut x = DVector::<f64>::zeros(m);
            x[e % m] = 1.0;
            e += 1;
            for _ in 0..2 {
                for i in 0..k {
                    let proj = u.column(i).dot(&x);
                    x -= u.column(i) * proj;
                }
            }
            let nx = x.norm();
            if nx > 1e-8 {
                u.set_column(k, &(x / nx));
                break;
            }
        }
    }
    let s = DVector::from_iterator(n, order.iter().map(|&j| norms[j]));
    let vt = DMatrix::from_fn(n, n, |r, c| v[(c, order[r])]);
    SVD { u: Some(u), v_t: Some(vt), singular_values: s }
}

/// Singular values (descending) and the full set of right singular vectors (columns).
pub fn full_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    if n == 0 {
        return (vec![], DMatrix::zeros(0, 0));
    }
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd(&padded, false, true);
    let vt = svd.v_t.expect("right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(n, n, |r, c| vt[(order[c], r)]);
    (s, v)
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = svd(a, false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis of `ker a`: right singular vectors with `s <= rel_tol * max(s_max, floor)`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64, floor: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (s, v) = full_svd(a);
    let smax = s.first().cloned().unwrap_or(0.0).max(floor);
    let rank = s.iter().filter(|&&x| x > rel_tol * smax).count();
    columns(&v, rank..n)
}

/// Orthonormal basis of the column space of `a`.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64, floor: f64) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = svd(a, true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max).max(floor);
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn columns(a: &DMatrix<f64>, range: std::ops::Range<usize>) -> DMatrix<f64> {
    let k = range.len();
    a.view((0, range.start), (a.nrows(), k)).into_owned()
}

/// Orthonormal basis of `span(a) ∩ span(b)` for orthonormal column sets, from the
/// eigenvalues of `P_a + P_b` above `2 - tol`.
pub fn intersection(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let p = a * a.transpose() + b * b.transpose();
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 2.0 - tol).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    if idx.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    let cols: Vec<_> = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Minimum-norm least-squares solution and the residual norm.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, f64) {
    let svd = svd(a, true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd.solve(b, rel_tol * smax).expect("svd solve");
    let r = (a * &x - b).norm();
    (x, r)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 {
        return vec![];
    }
    let mut e: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().cloned().collect();
    e.sort_by(|x, y| x.total_cmp(y));
    e
}

/// Block-diagonal placement of `blocks` (row offset, col offset) into an `m x n` matrix.
pub fn place(target: &mut DMatrix<f64>, r: usize, c: usize, block: &DMatrix<f64>) {
    target.view_mut((r, c), block.shape()).copy_from(block);
}
