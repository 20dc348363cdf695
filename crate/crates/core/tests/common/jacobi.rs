//! Cyclic Jacobi eigensolver for small real symmetric matrices.

use nalgebra::{DMatrix, DVector};

/// Eigenvalues ascending and eigenvectors as columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() < 1e-15 * (1.0 + a.norm()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// `e^{-iHt} psi` via the Jacobi eigenbasis.
pub fn evolve(h: &DMatrix<f64>, psi: &[num_complex::Complex64], times: &[f64]) -> Vec<Vec<num_complex::Complex64>> {
    use num_complex::Complex64;
    let (e, v) = jacobi_eigen(h);
    let re = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.re));
    let im = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.im));
    let cr = v.tr_mul(&re);
    let ci = v.tr_mul(&im);
    times
        .iter()
        .map(|&t| {
            let phased: Vec<Complex64> = (0..e.len())
                .map(|k| Complex64::new(cr[k], ci[k]) * Complex64::from_polar(1.0, -e[k] * t))
                .collect();
            (0..psi.len())
                .map(|r| (0..e.len()).map(|k| phased[k] * v[(r, k)]).sum())
                .collect()
        })
        .collect()
}
