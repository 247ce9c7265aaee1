//! Dense hermitian eigen-solvers.
//!
//! Two independent routes are kept on purpose: Householder tridiagonalization
//! followed by implicit-shift QL (the default), and cyclic complex Jacobi
//! sweeps. Operator diagnostics cross-check one against the other, so neither
//! may be expressed in terms of the other.

use ndarray::Array2;
use num_complex::Complex64 as Cx;

use crate::error::{Error, Result};

const MAX_QL_ITER: usize = 60;
const MAX_JACOBI_SWEEPS: usize = 40;

pub fn is_hermitian(a: &Array2<Cx>, tol: f64) -> bool {
    let n = a.nrows();
    if n != a.ncols() {
        return false;
    }
    for i in 0..n {
        for j in i..n {
            if (a[[i, j]] - a[[j, i]].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues (ascending) and optional eigenvectors of a real symmetric
/// tridiagonal matrix. `d` holds the diagonal, `e[i]` the entry (i, i+1).
///
/// Implicit-shift QL, adapted from the EISPACK `tql2` routine.
pub fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    offdiag: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Array2<f64>>)> {
    let n = diag.len();
    assert!(offdiag.len() + 1 >= n, "offdiag too short");
    let mut d = diag.to_vec();
    // e is shifted so e[i] couples (i-1, i); e[0] unused.
    let mut e = vec![0.0f64];
    e.extend_from_slice(&offdiag[..n.saturating_sub(1)]);
    e.push(0.0);
    let mut z = if want_vectors {
        Some(Array2::<f64>::eye(n))
    } else {
        None
    };
    if n == 0 {
        return Ok((d, z));
    }

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // Look for a negligible subdiagonal element.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m + 1].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::NoConvergence(format!(
                    "tridiagonal QL exceeded {MAX_QL_ITER} iterations at index {l}"
                )));
            }
            // Form the implicit shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l + 1]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l + 1] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut i = m;
            while i > l {
                let idx = i - 1;
                let mut f = s * e[idx + 1];
                let b = c * e[idx + 1];
                r = f.hypot(g);
                e[idx + 2] = r;
                if r == 0.0 {
                    // Underflow: recover and retry.
                    d[idx + 1] -= p;
                    e[m + 1] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[idx + 1] - p;
                r = (d[idx] - g) * s + 2.0 * c * b;
                p = s * r;
                d[idx + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_mut() {
                    for k in 0..n {
                        f = zm[[k, idx + 1]];
                        zm[[k, idx + 1]] = s * zm[[k, idx]] + c * f;
                        zm[[k, idx]] = c * zm[[k, idx]] - s * f;
                    }
                }
                i -= 1;
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            e[l + 1] = g;
            e[m + 1] = 0.0;
        }
    }

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let sorted_d: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let sorted_z = z.map(|zm| {
        let mut out = Array2::<f64>::zeros((n, n));
        for (new, &old) in order.iter().enumerate() {
            for k in 0..n {
                out[[k, new]] = zm[[k, old]];
            }
        }
        out
    });
    Ok((sorted_d, sorted_z))
}

/// Householder reduction of a hermitian matrix to real symmetric tridiagonal
/// form. Returns (diag, offdiag, q) with a = q * tridiag(diag, offdiag) * q^*.
fn hermitian_to_tridiagonal(a: &Array2<Cx>) -> (Vec<f64>, Vec<f64>, Array2<Cx>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut q = Array2::<Cx>::eye(n);

    for k in 0..n.saturating_sub(2) {
        // Column below the diagonal.
        let mut xnorm2 = 0.0f64;
        for i in k + 1..n {
            xnorm2 += a[[i, k]].norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        if xnorm < 1e-300 {
            continue;
        }
        let x0 = a[[k + 1, k]];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Cx::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        // v = x - alpha*e1
        let mut v = vec![Cx::new(0.0, 0.0); n - k - 1];
        for i in k + 1..n {
            v[i - k - 1] = a[[i, k]];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // p = beta * A22 * v
        let m = n - k - 1;
        let mut p = vec![Cx::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = Cx::new(0.0, 0.0);
            for j in 0..m {
                acc += a[[k + 1 + i, k + 1 + j]] * v[j];
            }
            p[i] = acc * beta;
        }
        // kappa = (beta/2) * v^* p  (real because A22 is hermitian)
        let vp: Cx = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = 0.5 * beta * vp.re;
        // w = p - kappa v ; A22 <- A22 - v w^* - w v^*
        let w: Vec<Cx> = p
            .iter()
            .zip(&v)
            .map(|(pi, vi)| pi - vi * kappa)
            .collect();
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[[k + 1 + i, k + 1 + j]] -= upd;
            }
        }
        // Column/row k collapse to the single subdiagonal entry alpha.
        a[[k + 1, k]] = alpha;
        a[[k, k + 1]] = alpha.conj();
        for i in k + 2..n {
            a[[i, k]] = Cx::new(0.0, 0.0);
            a[[k, i]] = Cx::new(0.0, 0.0);
        }
        // Accumulate Q <- Q * P with P = I - beta v v^*.
        for row in 0..n {
            let mut acc = Cx::new(0.0, 0.0);
            for j in 0..m {
                acc += q[[row, k + 1 + j]] * v[j];
            }
            acc *= beta;
            for j in 0..m {
                let vj = v[j].conj();
                q[[row, k + 1 + j]] -= acc * vj;
            }
        }
    }

    // Phase-scale so the subdiagonal becomes real nonnegative.
    let mut scale = vec![Cx::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let t = a[[k + 1, k]];
        scale[k + 1] = if t.norm() > 0.0 {
            scale[k] * (t / t.norm())
        } else {
            scale[k]
        };
    }
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n.saturating_sub(1)];
    for i in 0..n {
        d[i] = a[[i, i]].re;
    }
    for k in 0..n.saturating_sub(1) {
        e[k] = a[[k + 1, k]].norm();
    }
    for (col, s) in scale.iter().enumerate() {
        for row in 0..n {
            q[[row, col]] *= s;
        }
    }
    (d, e, q)
}

/// Eigenvalues (ascending) of a hermitian matrix via tridiagonalization + QL.
pub fn hermitian_eigenvalues(a: &Array2<Cx>) -> Result<Vec<f64>> {
    let (d, e, _) = hermitian_to_tridiagonal(a);
    let (vals, _) = symmetric_tridiagonal_eigen(&d, &e, false)?;
    Ok(vals)
}

/// Eigen-decomposition (ascending eigenvalues, unitary eigenvector columns)
/// of a hermitian matrix via tridiagonalization + QL.
pub fn hermitian_eigen(a: &Array2<Cx>) -> Result<(Vec<f64>, Array2<Cx>)> {
    let n = a.nrows();
    let (d, e, q) = hermitian_to_tridiagonal(a);
    let (vals, z) = symmetric_tridiagonal_eigen(&d, &e, true)?;
    let z = z.expect("vectors requested");
    let mut vecs = Array2::<Cx>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = Cx::new(0.0, 0.0);
            for k in 0..n {
                acc += q[[i, k]] * z[[k, j]];
            }
            vecs[[i, j]] = acc;
        }
    }
    Ok((vals, vecs))
}

/// Eigen-decomposition of a hermitian matrix by cyclic complex Jacobi sweeps.
/// Independent of the QL route; used as a cross-method oracle.
pub fn hermitian_eigen_jacobi(a: &Array2<Cx>) -> Result<(Vec<f64>, Array2<Cx>)> {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<Cx>::eye(n);
    let frob: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let tol = (frob.max(1e-300)) * 1e-15 * (n as f64);

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            let mut vals: Vec<(f64, usize)> =
                (0..n).map(|i| (a[[i, i]].re, i)).collect();
            vals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let order: Vec<usize> = vals.iter().map(|&(_, i)| i).collect();
            let eigvals: Vec<f64> = vals.iter().map(|&(x, _)| x).collect();
            let mut vecs = Array2::<Cx>::zeros((n, n));
            for (new, &old) in order.iter().enumerate() {
                for k in 0..n {
                    vecs[[k, new]] = v[[k, old]];
                }
            }
            return Ok((eigvals, vecs));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                let mag = apq.norm();
                if mag <= tol / (n as f64) {
                    continue;
                }
                let phase = apq / mag; // e^{i phi}
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary columns: u_p = (c, -s e^{-i phi}), u_q = (s, c e^{-i phi}).
                let e_mphi = phase.conj();
                // Column update.
                for i in 0..n {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = aip * c - aiq * (e_mphi * s);
                    a[[i, q]] = aip * s + aiq * (e_mphi * c);
                }
                // Row update (conjugate coefficients).
                for j in 0..n {
                    let apj = a[[p, j]];
                    let aqj = a[[q, j]];
                    a[[p, j]] = apj * c - aqj * (phase * s);
                    a[[q, j]] = apj * s + aqj * (phase * c);
                }
                // Clean the rotated pair.
                a[[p, q]] = Cx::new(0.0, 0.0);
                a[[q, p]] = Cx::new(0.0, 0.0);
                a[[p, p]] = Cx::new(a[[p, p]].re, 0.0);
                a[[q, q]] = Cx::new(a[[q, q]].re, 0.0);
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * c - viq * (e_mphi * s);
                    v[[i, q]] = vip * s + viq * (e_mphi * c);
                }
            }
        }
    }
    Err(Error::NoConvergence(format!(
        "Jacobi sweeps did not converge within {MAX_JACOBI_SWEEPS} passes"
    )))
}

/// Largest singular value of a general complex matrix: the square root of the
/// top eigenvalue of A^* A.
pub fn spectral_norm(a: &Array2<Cx>) -> Result<f64> {
    let svs = singular_values_general(a)?;
    Ok(svs.first().copied().unwrap_or(0.0))
}

/// All singular values, descending, of a general complex matrix.
pub fn singular_values_general(a: &Array2<Cx>) -> Result<Vec<f64>> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    // Gram matrix A^* A (cols x cols).
    let mut g = Array2::<Cx>::zeros((cols, cols));
    for i in 0..cols {
        for j in 0..cols {
            let mut acc = Cx::new(0.0, 0.0);
            for k in 0..rows {
                acc += a[[k, i]].conj() * a[[k, j]];
            }
            g[[i, j]] = acc;
        }
    }
    let vals = hermitian_eigenvalues(&g)?;
    let mut svs: Vec<f64> = vals.iter().rev().map(|&l| l.max(0.0).sqrt()).collect();
    svs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(svs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> Array2<Cx> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::<Cx>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                if i == j {
                    a[[i, j]] = Cx::new(rng.gen_range(-1.0..1.0), 0.0);
                } else {
                    let v = Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    a[[i, j]] = v;
                    a[[j, i]] = v.conj();
                }
            }
        }
        a
    }

    #[test]
    fn tridiagonal_eigen_known_matrix() {
        // tridiag(diag=2, off=-1) of size n has eigenvalues 2 - 2cos(k pi/(n+1)).
        let n = 12;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let (vals, vecs) = symmetric_tridiagonal_eigen(&d, &e, true).unwrap();
        for (k, &v) in vals.iter().enumerate() {
            let expect =
                2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n as f64 + 1.0)).cos();
            assert!((v - expect).abs() < 1e-12, "k={k} got={v} want={expect}");
        }
        // Orthonormal eigenvectors.
        let z = vecs.unwrap();
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| z[[k, i]] * z[[k, j]]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn hermitian_routes_agree() {
        let a = random_hermitian(50, 7);
        let v1 = hermitian_eigenvalues(&a).unwrap();
        let (v2, _) = hermitian_eigen_jacobi(&a).unwrap();
        for (x, y) in v1.iter().zip(&v2) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let n = 20;
        let a = random_hermitian(n, 3);
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        // A v_j = lambda_j v_j
        for j in 0..n {
            for i in 0..n {
                let mut av = Cx::new(0.0, 0.0);
                for k in 0..n {
                    av += a[[i, k]] * vecs[[k, j]];
                }
                let diff = (av - vecs[[i, j]] * vals[j]).norm();
                assert!(diff < 1e-10, "residual {diff} at ({i},{j})");
            }
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let mut a = Array2::<Cx>::zeros((5, 5));
        for k in 0..5 {
            a[[k, k]] = Cx::new(-1.0 / (k as f64 + 2.0), 0.0);
        }
        let svs = singular_values_general(&a).unwrap();
        let expect = [0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0];
        for (got, want) in svs.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
