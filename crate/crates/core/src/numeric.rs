//! Small dense complex linear algebra used by the numeric audits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NumMatrix = DMatrix<Complex64>;
pub type NumVector = DVector<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest singular value.
pub fn spectral_norm(a: &NumMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(a: &NumMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn max_abs(a: &NumMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity_deviation(a: &NumMatrix) -> f64 {
    max_abs(&(a - NumMatrix::identity(a.nrows(), a.ncols())))
}

/// Orthonormal basis of the numerical kernel: right singular vectors whose
/// singular value is at most `threshold` (absolute).
pub fn null_space(a: &NumMatrix, threshold: f64) -> Vec<NumVector> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^*");
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= threshold {
            basis.push(v_t.row(k).adjoint().into_owned());
        }
    }
    // thin SVD of a square matrix returns n values; nothing missing
    debug_assert!(svd.singular_values.len() == n || a.nrows() < n);
    basis
}

/// Numerical rank with an absolute singular value threshold.
pub fn rank(a: &NumMatrix, threshold: f64) -> usize {
    singular_values(a)
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

/// Raw eigenvalues from the complex Schur form.
pub fn raw_eigenvalues(a: &NumMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: a.ncols(),
        });
    }
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// A group of numerically coincident eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Eigenvalues grouped by single linkage within `rel_tol * max(1, |A|)`.
///
/// A defective eigenvalue of multiplicity k splits by roughly eps^(1/k) in
/// floating point; the cluster mean (a trace of the invariant subspace) is
/// accurate to working precision.
pub fn eigen_clusters(a: &NumMatrix, rel_tol: f64) -> Result<Vec<EigenCluster>> {
    let raw = raw_eigenvalues(a)?;
    let radius = rel_tol * spectral_norm(a).max(1.0);
    let n = raw.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (raw[i] - raw[j]).norm() <= radius {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[rj.max(ri)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<(usize, Complex64, usize)> = Vec::new();
    for (i, &z) in raw.iter().enumerate() {
        let root = find(&mut label, i);
        match clusters.iter_mut().find(|c| c.0 == root) {
            Some(c) => {
                c.1 += z;
                c.2 += 1;
            }
            None => clusters.push((root, z, 1)),
        }
    }
    let mut out: Vec<EigenCluster> = clusters
        .into_iter()
        .map(|(_, sum, k)| EigenCluster {
            value: sum / k as f64,
            multiplicity: k,
        })
        .collect();
    out.sort_by(|x, y| complex_order(&x.value, &y.value));
    Ok(out)
}

/// Eigenvalues with multiplicity, cluster-refined, ordered by argument then
/// modulus.
pub fn eigenvalues(a: &NumMatrix, rel_tol: f64) -> Result<Vec<Complex64>> {
    Ok(eigen_clusters(a, rel_tol)?
        .into_iter()
        .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
        .collect())
}

pub(crate) fn complex_order(x: &Complex64, y: &Complex64) -> std::cmp::Ordering {
    x.arg()
        .total_cmp(&y.arg())
        .then(x.norm().total_cmp(&y.norm()))
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &NumMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Counts of positive, negative and (numerically) zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub p: usize,
    pub q: usize,
    pub z: usize,
}

impl Inertia {
    pub fn new(p: usize, q: usize, z: usize) -> Self {
        Self { p, q, z }
    }
}

/// Inertia with zero threshold `rel_tol * |H|`.
pub fn inertia(h: &NumMatrix, rel_tol: f64) -> Inertia {
    let ev = hermitian_eigenvalues(h);
    let scale = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tau = rel_tol * scale;
    let mut out = Inertia::new(0, 0, 0);
    for x in ev {
        if x > tau {
            out.p += 1;
        } else if x < -tau {
            out.q += 1;
        } else {
            out.z += 1;
        }
    }
    out
}

/// `max |H - H^*| / max(1, |H|)`.
pub fn hermitian_residual(h: &NumMatrix) -> f64 {
    max_abs(&(h - h.adjoint())) / max_abs(h).max(1.0)
}
