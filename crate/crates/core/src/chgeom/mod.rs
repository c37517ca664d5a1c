//! Projective-model geometry of complex hyperbolic space.
//!
//! A Hermitian form `J` of signature `(n,1)` pairs column vectors as
//! `<Z, W> = Z^T J conj(W)`; the space is the set of negative lines and its
//! boundary the null lines. A matrix `A` acts by `Z -> A Z` and is an isometry
//! when `A^T J conj(A) = J`. Distances are normalized by
//! `cosh^2(d/2) = |<P,Q>|^2 / (<P,P><Q,Q>)`, so real hyperbolic subspaces have
//! curvature -1/4 and Busemann functions have unit speed.
//!
//! Real hyperbolic space is the special case of a real form and real points.

mod audit;
mod classify;
mod horoball;

pub use audit::{
    calibrate_level, consistency_audit, cusp_base_point, parabolic_preserving_audit, AuditOptions,
    AuditReport, Calibration, Condition1Entry, Condition1Report, Condition2Report, Faithfulness,
    IsometryPair, PairVerdict, ParabolicAuditReport, SpectrumEntry, Violation, CERTIFICATION_NOTE,
};
pub use classify::{
    classify_isometry, eigenspace_null_vector, fixed_boundary_point, geometric_multiplicity,
    IsometryClass, IsometryTag,
};
pub use horoball::{
    estimate_shadow_radius, orthogeodesic, orthogeodesic_length, shadow_contains, Horoball,
    Orthogeodesic,
};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{hermitian_residual, inertia, max_abs, Inertia, NumMatrix, NumVector};

/// Numeric thresholds. All are relative to the natural scale of the object
/// being tested (the form or the matrix norm).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Null-vector test `|<Q,Q>| <= null * |J| |Q|^2`.
    pub null: f64,
    /// Unit-circle test for eigenvalue moduli.
    pub eig: f64,
    /// Singular value threshold for numerical rank, times `|A|`.
    pub rank: f64,
    /// Zero threshold for inertia, times `|J|`.
    pub sig: f64,
    /// Eigenvalue clustering radius, times `max(1, |A|)`.
    pub cluster: f64,
    /// Form-preservation residual.
    pub compat: f64,
    /// Busemann level agreement.
    pub level: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            null: 1e-8,
            eig: 1e-8,
            rank: 1e-8,
            sig: 1e-8,
            cluster: 1e-5,
            compat: 1e-8,
            level: 1e-8,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by `CHDEF_TOL_NULL`, `CHDEF_TOL_EIG`,
    /// `CHDEF_TOL_RANK`, `CHDEF_TOL_SIG`, `CHDEF_TOL_CLUSTER`,
    /// `CHDEF_TOL_COMPAT` and `CHDEF_TOL_LEVEL`.
    pub fn from_env() -> Result<Self> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let mut t = Self::default();
        let fields: [(&str, &mut f64); 7] = [
            ("CHDEF_TOL_NULL", &mut t.null),
            ("CHDEF_TOL_EIG", &mut t.eig),
            ("CHDEF_TOL_RANK", &mut t.rank),
            ("CHDEF_TOL_SIG", &mut t.sig),
            ("CHDEF_TOL_CLUSTER", &mut t.cluster),
            ("CHDEF_TOL_COMPAT", &mut t.compat),
            ("CHDEF_TOL_LEVEL", &mut t.level),
        ];
        for (key, slot) in fields {
            if let Some(raw) = lookup(key) {
                let v: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("{key}={raw:?} is not a number")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("{key} must be positive")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

/// Hermitian form with cached inertia and norm.
#[derive(Clone, Debug)]
pub struct HermitianForm {
    matrix: NumMatrix,
    inertia: Inertia,
    norm: f64,
}

impl HermitianForm {
    pub fn new(matrix: NumMatrix, sig_tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        let residual = hermitian_residual(&matrix);
        if residual > 1e-12 {
            return Err(Error::NotHermitian(residual));
        }
        let inertia = inertia(&matrix, sig_tol);
        let norm = max_abs(&matrix);
        Ok(Self {
            matrix,
            inertia,
            norm,
        })
    }

    /// `Diag(1, ..., 1, -1)` on `C^{n+1}`.
    pub fn standard(n: usize) -> Self {
        let mut diag = vec![Complex64::new(1.0, 0.0); n + 1];
        diag[n] = Complex64::new(-1.0, 0.0);
        Self::new(NumMatrix::from_diagonal(&DVector::from_vec(diag)), 1e-12).expect("diagonal form")
    }

    pub fn matrix(&self) -> &NumMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    /// Largest entry modulus.
    pub fn scale(&self) -> f64 {
        self.norm
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.inertia.q == 1 && self.inertia.z == 0 && self.inertia.p >= 1
    }

    pub fn require_hyperbolic(&self) -> Result<()> {
        if self.is_hyperbolic() {
            Ok(())
        } else {
            Err(Error::BadSignature {
                p: self.inertia.p,
                q: self.inertia.q,
                z: self.inertia.z,
            })
        }
    }

    /// `<Z, W> = Z^T J conj(W)`.
    pub fn pair(&self, z: &NumVector, w: &NumVector) -> Complex64 {
        let jw = &self.matrix * w.map(|c| c.conj());
        z.iter().zip(jw.iter()).map(|(a, b)| a * b).sum()
    }

    /// `<Z, Z>`, which is real.
    pub fn norm_sq(&self, z: &NumVector) -> f64 {
        self.pair(z, z).re
    }

    /// Relative residual `|A^T J conj(A) - J| / (|J| max(1, |A|^2))`.
    pub fn preservation_residual(&self, a: &NumMatrix) -> f64 {
        let lhs = a.transpose() * &self.matrix * a.map(|c| c.conj());
        let scale = self.norm.max(f64::MIN_POSITIVE) * max_abs(a).powi(2).max(1.0);
        max_abs(&(lhs - &self.matrix)) / scale
    }

    /// Coordinates in which the form is standard.
    pub fn frame(&self) -> FormFrame {
        FormFrame::new(self)
    }

    /// Deterministic basepoint: the eigenvector of the negative eigenvalue.
    pub fn canonical_origin(&self) -> Result<ProjPoint> {
        self.require_hyperbolic()?;
        let frame = self.frame();
        let n = self.dim();
        let mut y = NumVector::zeros(n);
        y[n - 1] = Complex64::new(1.0, 0.0);
        ProjPoint::new(self, frame.from_standard(&y))
    }
}

/// Linear change of coordinates `Y = S Z` with `<Z, W> = (SW)^* E (SZ)` and
/// `E = Diag(1, ..., 1, -1)`.
#[derive(Clone, Debug)]
pub struct FormFrame {
    to_standard: NumMatrix,
    from_standard: NumMatrix,
}

impl FormFrame {
    fn new(form: &HermitianForm) -> Self {
        // <Z,W> = W^* conj(J) Z
        let gram = form.matrix.map(|c| c.conj());
        let eig = gram.symmetric_eigen();
        let n = form.dim();
        let mut order: Vec<usize> = (0..n).collect();
        // positive eigenvalues first, most negative last
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut to_standard = NumMatrix::zeros(n, n);
        let mut from_standard = NumMatrix::zeros(n, n);
        for (row, &k) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[k].abs().sqrt();
            let v = eig.eigenvectors.column(k);
            for i in 0..n {
                to_standard[(row, i)] = v[i].conj() * lambda;
                from_standard[(i, row)] = v[i] / lambda;
            }
        }
        Self {
            to_standard,
            from_standard,
        }
    }

    pub fn to_standard(&self, z: &NumVector) -> NumVector {
        &self.to_standard * z
    }

    pub fn from_standard(&self, y: &NumVector) -> NumVector {
        &self.from_standard * y
    }

    /// Conjugates a standard-form isometry into this form's coordinates.
    pub fn conjugate_from_standard(&self, a: &NumMatrix) -> NumMatrix {
        &self.from_standard * a * &self.to_standard
    }

    fn dim(&self) -> usize {
        self.to_standard.nrows()
    }

    /// Random point with standard coordinates `(x, 1)`, `|x| <= radius < 1`.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> NumVector {
        let n = self.dim();
        let dir = random_unit(rng, n - 1);
        let r = radius * rng.random::<f64>().powf(1.0 / (2.0 * (n - 1) as f64));
        let mut y = NumVector::zeros(n);
        for i in 0..n - 1 {
            y[i] = dir[i] * r;
        }
        y[n - 1] = Complex64::new(1.0, 0.0);
        self.from_standard(&y)
    }

    /// Random null vector with standard coordinates `(x, 1)`, `|x| = 1`.
    pub fn random_boundary_point<R: Rng + ?Sized>(&self, rng: &mut R) -> NumVector {
        let n = self.dim();
        let dir = random_unit(rng, n - 1);
        let mut y = NumVector::zeros(n);
        for i in 0..n - 1 {
            y[i] = dir[i];
        }
        y[n - 1] = Complex64::new(1.0, 0.0);
        self.from_standard(&y)
    }

    /// Random form-unitary matrix with determinant 1: `U_1 B(t) U_2` in
    /// standard coordinates, with `U_i` in `U(n) x U(1)` and `B(t)` a boost
    /// of rapidity `|t| <= max_rapidity`.
    pub fn random_isometry<R: Rng + ?Sized>(&self, rng: &mut R, max_rapidity: f64) -> NumMatrix {
        let n = self.dim();
        let u1 = random_block_unitary(rng, n);
        let u2 = random_block_unitary(rng, n);
        let t = max_rapidity * (2.0 * rng.random::<f64>() - 1.0);
        let mut boost = NumMatrix::identity(n, n);
        boost[(0, 0)] = Complex64::new(t.cosh(), 0.0);
        boost[(n - 1, n - 1)] = Complex64::new(t.cosh(), 0.0);
        boost[(0, n - 1)] = Complex64::new(t.sinh(), 0.0);
        boost[(n - 1, 0)] = Complex64::new(t.sinh(), 0.0);
        let a = self.conjugate_from_standard(&(u1 * boost * u2));
        let det = a.determinant();
        let phase = Complex64::from_polar(1.0, -det.arg() / n as f64);
        a * phase
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn random_block_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> NumMatrix {
    let k = n - 1;
    let g = NumMatrix::from_fn(k, k, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = NumMatrix::zeros(n, n);
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..k {
            out[(i, j)] = q[(i, j)] * phase;
        }
    }
    out[(k, k)] = Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
    out
}

/// A point of complex hyperbolic space, given by a negative lift.
#[derive(Clone, Debug)]
pub struct ProjPoint {
    lift: NumVector,
}

impl ProjPoint {
    pub fn new(form: &HermitianForm, lift: NumVector) -> Result<Self> {
        check_dim(form, &lift)?;
        let nsq = form.norm_sq(&lift);
        // NaN fails too
        if nsq.partial_cmp(&(-form.scale() * 1e-14 * lift.norm_squared()))
            != Some(std::cmp::Ordering::Less)
        {
            return Err(Error::NotNegative(nsq));
        }
        Ok(Self::unchecked(lift))
    }

    pub(crate) fn unchecked(lift: NumVector) -> Self {
        let norm = lift.norm();
        Self {
            lift: lift / Complex64::new(norm, 0.0),
        }
    }

    pub fn lift(&self) -> &NumVector {
        &self.lift
    }

    pub fn transform(&self, g: &NumMatrix) -> Self {
        Self::unchecked(g * &self.lift)
    }
}

/// A point of the boundary, given by a null lift.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    lift: NumVector,
}

impl BoundaryPoint {
    pub fn new(form: &HermitianForm, lift: NumVector, tol: &Tolerances) -> Result<Self> {
        check_dim(form, &lift)?;
        let nsq = form.norm_sq(&lift);
        if nsq.abs() > tol.null * form.scale() * lift.norm_squared() {
            return Err(Error::NotNull(nsq.abs() / lift.norm_squared()));
        }
        Ok(Self::unchecked(lift))
    }

    pub(crate) fn unchecked(lift: NumVector) -> Self {
        let norm = lift.norm();
        Self {
            lift: lift / Complex64::new(norm, 0.0),
        }
    }

    pub fn lift(&self) -> &NumVector {
        &self.lift
    }

    pub fn transform(&self, g: &NumMatrix) -> Self {
        Self::unchecked(g * &self.lift)
    }

    /// Sine of the angle between the lines spanned by the two lifts.
    pub fn projective_distance(&self, other: &BoundaryPoint) -> f64 {
        line_distance(&self.lift, &other.lift)
    }
}

pub(crate) fn line_distance(a: &NumVector, b: &NumVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let overlap = a.dotc(b).norm() / (na * nb);
    (1.0 - overlap.min(1.0).powi(2)).max(0.0).sqrt()
}

fn check_dim(form: &HermitianForm, v: &NumVector) -> Result<()> {
    if v.len() != form.dim() {
        return Err(Error::DimensionMismatch {
            left: form.dim(),
            right: v.len(),
        });
    }
    Ok(())
}

/// Hyperbolic distance, with `cosh^2(d/2) = |<P,Q>|^2 / (<P,P><Q,Q>)`.
///
/// Evaluated as `sinh^2(d/2) = <Q',Q'> / -<Q,Q>` where `Q'` is the component
/// of `Q` orthogonal to `P`, which stays accurate for nearby points.
pub fn distance(form: &HermitianForm, p: &ProjPoint, q: &ProjPoint) -> Result<f64> {
    form.require_hyperbolic()?;
    let (pv, qv) = (p.lift(), q.lift());
    let pp = form.norm_sq(pv);
    let qq = form.norm_sq(qv);
    let qp = form.pair(qv, pv);
    let q_perp = qv - pv * (qp / pp);
    let perp_sq = form.norm_sq(&q_perp);
    let sinh_sq = perp_sq / -qq;
    let slack = 1e-9 * (1.0 + sinh_sq.abs());
    if !sinh_sq.is_finite() || sinh_sq < -slack {
        return Err(Error::Numeric(format!(
            "cosh^2(d/2) = {} < 1",
            1.0 + sinh_sq
        )));
    }
    Ok(2.0 * sinh_sq.max(0.0).sqrt().asinh())
}

/// `log |<Z,Q>|^2 / -<Z,Z>`; a Busemann function for `Q` up to an additive
/// constant that depends on the scale of the lift of `Q`.
pub(crate) fn height(form: &HermitianForm, base: &NumVector, z: &NumVector) -> Result<f64> {
    let zq = form.pair(z, base).norm_sqr();
    let zz = form.norm_sq(z);
    if zq == 0.0 || !zq.is_finite() {
        return Err(Error::AtBasePoint);
    }
    Ok((zq / -zz).ln())
}

/// Busemann function of `base`, normalized to vanish at `origin`:
/// `log( |<Z,Q>|^2 <O,O> / (<Z,Z> |<O,Q>|^2) )`. It decreases with unit speed
/// along geodesics towards `base`.
pub fn busemann(
    form: &HermitianForm,
    base: &BoundaryPoint,
    origin: &ProjPoint,
    z: &ProjPoint,
) -> Result<f64> {
    form.require_hyperbolic()?;
    Ok(height(form, base.lift(), z.lift())? - height(form, base.lift(), origin.lift())?)
}

/// Point at parameter `s` on the geodesic segment from `p` (s = 0) to `q`
/// (s = 1).
pub fn geodesic_point(form: &HermitianForm, p: &ProjPoint, q: &ProjPoint, s: f64) -> ProjPoint {
    let (pv, qv) = (p.lift(), q.lift());
    let pp = (-form.norm_sq(pv)).sqrt();
    let qq = (-form.norm_sq(qv)).sqrt();
    let pair = form.pair(pv, qv);
    // rotate q so that <p, q> is real negative; the real span is then the
    // geodesic
    let phase = if pair.norm() > 0.0 {
        -(pair / pair.norm()).conj()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let p_hat = pv / Complex64::new(pp, 0.0);
    let q_hat = qv * phase / Complex64::new(qq, 0.0);
    ProjPoint::unchecked(p_hat * Complex64::new(1.0 - s, 0.0) + q_hat * Complex64::new(s, 0.0))
}
