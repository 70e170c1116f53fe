//! Small dense symmetric eigensolver (Householder + implicit QL) and a
//! Lanczos iteration for extreme eigenvalues of large sparse operators.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, hypot, sqrt};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.a[i * n + j] * x[j]).sum())
            .collect()
    }
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues sorted in
/// decreasing order and the matching unit eigenvectors (column `k` of
/// `vectors`, stored row-major so `vectors.get(i, k)` is entry `i`).
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Dense,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.n)
            .map(|i| self.vectors.get(i, k))
            .collect()
    }
}

/// Full symmetric eigen-decomposition.
pub fn sym_eigen(m: &Dense) -> SymEigen {
    let n = m.n;
    if n == 0 {
        return SymEigen {
            values: Vec::new(),
            vectors: Dense::zeros(0),
        };
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| m.a[i * n..(i + 1) * n].to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        d[b].partial_cmp(&d[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut vectors = Dense::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, k, v[i][src]);
        }
    }
    SymEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors,
    }
}

/// Eigenvalues only of a symmetric tridiagonal matrix (diagonal `d`,
/// off-diagonal `e[1..]`), returned in decreasing order.
pub fn tridiag_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut dd = d.to_vec();
    let mut ee = vec![0.0; n];
    ee[..n].copy_from_slice(&e[..n]);
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect();
    tql2(&mut z, &mut dd, &mut ee);
    dd.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    dd
}

// Householder reduction to tridiagonal form (after the public-domain JAMA routine).
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += abs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal form, accumulating rotations into `v`.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(abs(d[l]) + abs(e[l]));
        let mut m = l;
        while m < n {
            if abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Extreme eigenvalues of a symmetric operator restricted to the orthogonal
/// complement of `deflate` (unit vectors), by Lanczos with full
/// reorthogonalisation. Returns Ritz values in decreasing order.
pub fn lanczos<F: FnMut(&[f64], &mut [f64])>(
    n: usize,
    mut op: F,
    deflate: &[Vec<f64>],
    steps: usize,
    seed: u64,
) -> Vec<f64> {
    use rand::Rng as _;
    let mut rng = crate::rng::seeded(seed);
    let project = |x: &mut [f64], basis: &[Vec<f64>]| {
        for b in basis {
            let c: f64 = x.iter().zip(b).map(|(a, b)| a * b).sum();
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    };
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    project(&mut q, deflate);
    let nrm = sqrt(q.iter().map(|x| x * x).sum());
    if nrm == 0.0 {
        return Vec::new();
    }
    q.iter_mut().for_each(|x| *x /= nrm);
    let steps = steps.min(n.saturating_sub(deflate.len())).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta = vec![0.0];
    let mut w = vec![0.0; n];
    for _ in 0..steps {
        op(&q, &mut w);
        let a: f64 = w.iter().zip(&q).map(|(x, y)| x * y).sum();
        alpha.push(a);
        basis.push(q.clone());
        // Two passes of Gram-Schmidt against everything seen so far.
        for _ in 0..2 {
            project(&mut w, deflate);
            project(&mut w, &basis);
        }
        let b = sqrt(w.iter().map(|x| x * x).sum());
        if b < 1e-12 {
            break;
        }
        beta.push(b);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / b;
        }
    }
    let k = alpha.len();
    let mut e = vec![0.0; k];
    e[1..k].copy_from_slice(&beta[1..k]);
    tridiag_eigenvalues(&alpha, &e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalises_small_matrix() {
        let mut m = Dense::zeros(3);
        let vals = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, vals[i][j]);
            }
        }
        let eig = sym_eigen(&m);
        let r2 = core::f64::consts::SQRT_2;
        let want = [2.0 + r2, 2.0, 2.0 - r2];
        for (a, b) in eig.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        for k in 0..3 {
            let x = eig.vector(k);
            let mx = m.mul_vec(&x);
            for i in 0..3 {
                assert!((mx[i] - eig.values[k] * x[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        let n = 40;
        let mut m = Dense::zeros(n);
        for i in 0..n {
            m.set(i, i, (i % 7) as f64 * 0.3);
            if i + 1 < n {
                m.set(i, i + 1, 1.0);
                m.set(i + 1, i, 1.0);
            }
        }
        let full = sym_eigen(&m).values;
        let ritz = lanczos(n, |x, y| y.copy_from_slice(&m.mul_vec(x)), &[], n, 7);
        assert!((full[0] - ritz[0]).abs() < 1e-9);
        assert!((full[n - 1] - ritz[ritz.len() - 1]).abs() < 1e-9);
    }
}
