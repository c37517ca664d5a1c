use num_complex::Complex64;
use rand::Rng;

use super::{
    busemann, distance, geodesic_point, height, BoundaryPoint, HermitianForm, ProjPoint, Tolerances,
};
use crate::error::{Error, Result};
use crate::numeric::{NumMatrix, NumVector};

/// Closed horoball `{Z : B(Z) <= level}`, where `B` is the Busemann function
/// of `base` normalized to vanish at `origin`.
#[derive(Clone, Debug)]
pub struct Horoball {
    pub base: BoundaryPoint,
    pub origin: ProjPoint,
    pub level: f64,
}

impl Horoball {
    pub fn new(base: BoundaryPoint, origin: ProjPoint, level: f64) -> Self {
        Self {
            base,
            origin,
            level,
        }
    }

    pub fn with_level(&self, level: f64) -> Self {
        Self {
            level,
            ..self.clone()
        }
    }

    /// Image under an isometry. Busemann levels are equivariant, so the
    /// translate of the horoball keeps its level relative to the moved origin.
    pub fn transform(&self, g: &NumMatrix) -> Self {
        Self {
            base: self.base.transform(g),
            origin: self.origin.transform(g),
            level: self.level,
        }
    }

    pub fn busemann(&self, form: &HermitianForm, z: &ProjPoint) -> Result<f64> {
        busemann(form, &self.base, &self.origin, z)
    }

    pub fn contains(&self, form: &HermitianForm, z: &ProjPoint) -> Result<bool> {
        Ok(self.busemann(form, z)? <= self.level)
    }

    /// The horoball is `{height(Z) <= c}` for this `c`, with height measured
    /// against the stored lift of the base point.
    pub(crate) fn height_bound(&self, form: &HermitianForm) -> Result<f64> {
        Ok(self.level + height(form, self.base.lift(), self.origin.lift())?)
    }

    /// Moves `z` along the geodesic through the base point onto the
    /// horosphere.
    pub fn project(&self, form: &HermitianForm, z: &ProjPoint) -> Result<ProjPoint> {
        form.require_hyperbolic()?;
        let q = self.base.lift();
        let x = z.lift();
        let kappa = form.pair(q, x);
        if kappa.norm() == 0.0 {
            return Err(Error::AtBasePoint);
        }
        let xx = form.norm_sq(x);
        // X = P + beta Q with P null
        let beta = Complex64::new(xx / 2.0, 0.0) / kappa;
        let p = x - q * beta;
        let c = self.height_bound(form)?;
        let t = kappa.norm_sqr() / (-xx * c.exp());
        ProjPoint::new(form, q * (beta * t) + p)
    }
}

/// Common perpendicular of two horoballs.
#[derive(Clone, Debug)]
pub struct Orthogeodesic {
    /// Signed length; negative when the horoballs overlap.
    pub length: f64,
    pub foot1: ProjPoint,
    pub foot2: ProjPoint,
}

/// Signed distance between two horoballs and the feet of the perpendicular.
///
/// The perpendicular lies on the geodesic joining the base points. With lifts
/// normalized so that `<Q1, Q2'> = -1/2`, that geodesic is
/// `r -> e^r Q1 + e^-r Q2'` at unit-speed parameter `2r`, and each horosphere
/// crosses it at one explicit parameter.
pub fn orthogeodesic(
    form: &HermitianForm,
    h1: &Horoball,
    h2: &Horoball,
    tol: &Tolerances,
) -> Result<Orthogeodesic> {
    form.require_hyperbolic()?;
    let (q1, q2) = (h1.base.lift(), h2.base.lift());
    let a = form.pair(q1, q2);
    if a.norm() <= tol.null * form.scale() * q1.norm() * q2.norm() {
        return Err(Error::IdenticalBasePoints);
    }
    let c1 = h1.height_bound(form)?;
    let c2 = h2.height_bound(form)?;
    let log_a = a.norm_sqr().ln();
    let length = log_a - 4f64.ln() - c1 - c2;
    let q2n = q2 * (-0.5 / a.conj());
    let r1 = -(c1 + 4f64.ln()) / 2.0;
    let r2 = (c2 - log_a) / 2.0;
    let point = |r: f64| -> NumVector {
        // keep the larger coefficient at 1 to avoid overflow
        let (s, t) = if r >= 0.0 {
            (1.0, (-2.0 * r).exp())
        } else {
            ((2.0 * r).exp(), 1.0)
        };
        q1 * Complex64::new(s, 0.0) + &q2n * Complex64::new(t, 0.0)
    };
    Ok(Orthogeodesic {
        length,
        foot1: ProjPoint::unchecked(point(r1)),
        foot2: ProjPoint::unchecked(point(r2)),
    })
}

pub fn orthogeodesic_length(
    form: &HermitianForm,
    h1: &Horoball,
    h2: &Horoball,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(orthogeodesic(form, h1, h2, tol)?.length)
}

/// Whether the geodesic ray leaving `h1` at `x` (pointing away from the base
/// of `h1`) meets `h2`.
///
/// Along the ray `Z(t) = t beta Q1 + P`, `t` in `(0, 1]`, the height over the
/// base of `h2` is `log(|t A + B|^2 / (t n))`, whose minimum is explicit.
pub fn shadow_contains(
    form: &HermitianForm,
    h1: &Horoball,
    h2: &Horoball,
    x: &ProjPoint,
    tol: &Tolerances,
) -> Result<bool> {
    form.require_hyperbolic()?;
    let offset = h1.busemann(form, x)? - h1.level;
    if offset.abs() > tol.level * h1.level.abs().max(1.0) {
        return Err(Error::NotOnHorosphere(offset));
    }
    let q1 = h1.base.lift();
    let q2 = h2.base.lift();
    let xv = x.lift();
    let kappa = form.pair(q1, xv);
    let xx = form.norm_sq(xv);
    let beta = Complex64::new(xx / 2.0, 0.0) / kappa;
    let p = xv - q1 * beta;
    let a = beta * form.pair(q1, q2);
    let b = form.pair(&p, q2);
    let n = -xx;
    if b.norm() == 0.0 {
        // the ray ends at the base of h2
        return Ok(true);
    }
    let t = if a.norm() == 0.0 {
        1.0
    } else {
        (b.norm() / a.norm()).min(1.0)
    };
    let g = (a * t + b).norm_sqr() / (t * n);
    Ok(g.ln() <= h2.height_bound(form)?)
}

/// Empirical radius of the shadow cast on `h1` by horoballs tangent to it.
///
/// For each sample a random tangent horoball is placed, and the boundary of
/// its shadow is located by bisection along horosphere paths leaving the
/// foot. Returns the smallest radius seen, or `None` if no sample succeeded.
/// This is an estimate, not a bound.
pub fn estimate_shadow_radius<R: Rng + ?Sized>(
    form: &HermitianForm,
    h1: &Horoball,
    rng: &mut R,
    samples: usize,
    tol: &Tolerances,
) -> Result<Option<f64>> {
    form.require_hyperbolic()?;
    let frame = form.frame();
    let mut best: Option<f64> = None;
    for _ in 0..samples {
        let q2 = BoundaryPoint::unchecked(frame.random_boundary_point(rng));
        if q2.projective_distance(&h1.base) < 1e-3 {
            continue;
        }
        let probe = Horoball::new(q2, h1.origin.clone(), 0.0);
        let length = orthogeodesic_length(form, h1, &probe, tol)?;
        // shift so the horoballs touch; slightly shrunk to keep the foot strictly inside
        let h2 = probe.with_level(-length - 1e-9);
        let foot = orthogeodesic(form, h1, &h2, tol)?.foot1;
        let foot = h1.project(form, &foot)?;
        let mut far = None;
        for _ in 0..20 {
            let y = h1.project(form, &ProjPoint::unchecked(frame.random_point(rng, 0.999)))?;
            if !shadow_contains(form, h1, &h2, &y, tol)? {
                far = Some(y);
                break;
            }
        }
        let Some(far) = far else { continue };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let z = h1.project(form, &geodesic_point(form, &foot, &far, mid))?;
            if shadow_contains(form, h1, &h2, &z, tol)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let edge = h1.project(form, &geodesic_point(form, &foot, &far, lo))?;
        let r = distance(form, &foot, &edge)?;
        best = Some(best.map_or(r, |b: f64| b.min(r)));
    }
    Ok(best)
}
