//! Independent oracles for the geometry tests. Nothing here calls the
//! closed forms it is used to check.
#![allow(dead_code)]

use chdef::chgeom::{distance, BoundaryPoint, HermitianForm, Horoball, ProjPoint, Tolerances};
use chdef::numeric::{c64, NumMatrix, NumVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Random Hermitian form of signature (n,1): `S^T E conj(S)` with `S` near
/// the identity.
pub fn random_form<R: Rng>(rng: &mut R, n: usize) -> HermitianForm {
    let d = n + 1;
    let s = NumMatrix::from_fn(d, d, |i, j| {
        let g = c64(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 0.3;
        if i == j {
            g + c64(1.0, 0.0)
        } else {
            g
        }
    });
    let mut e = NumMatrix::identity(d, d);
    e[(n, n)] = c64(-1.0, 0.0);
    let j = s.transpose() * e * s.map(|c| c.conj());
    let j = (&j + j.adjoint()) * c64(0.5, 0.0);
    HermitianForm::new(j, 1e-10).expect("hermitian")
}

pub fn random_point<R: Rng>(rng: &mut R, form: &HermitianForm, radius: f64) -> ProjPoint {
    ProjPoint::new(form, form.frame().random_point(rng, radius)).unwrap()
}

pub fn random_boundary<R: Rng>(rng: &mut R, form: &HermitianForm) -> BoundaryPoint {
    BoundaryPoint::new(
        form,
        form.frame().random_boundary_point(rng),
        &Tolerances::default(),
    )
    .unwrap()
}

pub fn random_scalar<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(
        rng.random_range(0.1..10.0),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

/// Unit phase making `<a, b>` real and negative after `b -> b * phase`.
fn align(form: &HermitianForm, a: &NumVector, b: &NumVector) -> Complex64 {
    let p = form.pair(a, b);
    -(p / p.norm())
}

/// Length of the segment from `p` to `q` by Simpson quadrature of the
/// Bergman line element
/// `ds^2 = 4 (|<Z,dZ>|^2 - <Z,Z><dZ,dZ>) / <Z,Z>^2`
/// along the real span of the aligned lifts.
pub fn arc_length(form: &HermitianForm, p: &ProjPoint, q: &ProjPoint, intervals: usize) -> f64 {
    let a = p.lift() / c64((-form.norm_sq(p.lift())).sqrt(), 0.0);
    let b0 = q.lift() / c64((-form.norm_sq(q.lift())).sqrt(), 0.0);
    let b = &b0 * align(form, &a, &b0);
    let dz = &b - &a;
    let speed = |s: f64| {
        let z = &a * c64(1.0 - s, 0.0) + &b * c64(s, 0.0);
        let zz = form.norm_sq(&z);
        let zdz = form.pair(&z, &dz).norm_sqr();
        let dd = form.norm_sq(&dz);
        2.0 * (zdz - zz * dd).max(0.0).sqrt() / zz.abs()
    };
    let n = intervals + intervals % 2;
    let h = 1.0 / n as f64;
    let mut sum = speed(0.0) + speed(1.0);
    for k in 1..n {
        sum += speed(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Point `O + s Q'` on the geodesic ray from `o` to `q`.
pub fn ray_point(form: &HermitianForm, o: &ProjPoint, q: &BoundaryPoint, s: f64) -> ProjPoint {
    let phase = align(form, o.lift(), q.lift());
    let ov = o.lift() / c64((-form.norm_sq(o.lift())).sqrt(), 0.0);
    ProjPoint::new(form, ov + q.lift() * (phase * s)).unwrap()
}

/// `lim d(z, r(s)) - d(o, r(s))` along the ray from `o` to `q`, with one
/// Richardson step.
pub fn busemann_limit(
    form: &HermitianForm,
    q: &BoundaryPoint,
    o: &ProjPoint,
    z: &ProjPoint,
) -> f64 {
    let f = |s: f64| {
        let r = ray_point(form, o, q, s);
        distance(form, z, &r).unwrap() - distance(form, o, &r).unwrap()
    };
    let s = 1e7;
    2.0 * f(2.0 * s) - f(s)
}

/// Signed distance between two horoballs, found by locating where each
/// horosphere crosses the geodesic joining the base points (bisection on
/// the Busemann functions) and measuring between the crossings.
pub fn orthogeodesic_scan(form: &HermitianForm, h1: &Horoball, h2: &Horoball) -> f64 {
    let q1 = h1.base.lift();
    let phase = align(form, q1, h2.base.lift());
    let q2 = h2.base.lift() * phase;
    let point = |ls: f64| {
        // keep the larger coefficient at one
        let (a, b) = if ls <= 0.0 {
            (1.0, ls.exp())
        } else {
            ((-ls).exp(), 1.0)
        };
        ProjPoint::new(form, q1 * c64(a, 0.0) + &q2 * c64(b, 0.0))
    };
    let crossing = |h: &Horoball, increasing: bool| {
        let (mut lo, mut hi) = (-30.0, 30.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            // a point too close to the boundary to resolve lies deep in the
            // horoball at that end
            let forward = match point(mid) {
                Ok(z) => (h.busemann(form, &z).unwrap() > h.level) == increasing,
                Err(_) => mid > 0.0,
            };
            if forward {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // moving from q1 towards q2, B1 increases and B2 decreases
    let s1 = crossing(h1, true);
    let s2 = crossing(h2, false);
    let d = distance(form, &point(s1).unwrap(), &point(s2).unwrap()).unwrap();
    if s1 <= s2 {
        d
    } else {
        -d
    }
}

/// Smallest distance over sampled pairs of horosphere points clustered
/// around the given points; an upper bound for the true gap that tightens
/// as samples approach the feet.
pub fn sampled_pair_distance<R: Rng>(
    rng: &mut R,
    form: &HermitianForm,
    h1: &Horoball,
    h2: &Horoball,
    near1: &ProjPoint,
    near2: &ProjPoint,
    samples: usize,
) -> f64 {
    let jitter = |rng: &mut R, p: &ProjPoint, scale: f64| {
        let v: NumVector = p
            .lift()
            .map(|c| c + c64(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale);
        ProjPoint::new(form, v).ok()
    };
    let mut best = f64::INFINITY;
    for k in 0..samples {
        let scale = 10f64.powf(-1.0 - 6.0 * (k as f64 / samples as f64));
        let scale1 = scale * near1.lift().norm();
        let scale2 = scale * near2.lift().norm();
        let (Some(a), Some(b)) = (jitter(rng, near1, scale1), jitter(rng, near2, scale2)) else {
            continue;
        };
        let (Ok(x), Ok(y)) = (h1.project(form, &a), h2.project(form, &b)) else {
            continue;
        };
        best = best.min(distance(form, &x, &y).unwrap());
    }
    best
}

/// Whether the ray leaving `h1` at `x` enters `h2`, by dense sampling of the
/// Busemann function of `h2`. Also returns the largest deviation from
/// `|B1(z) - B1(x)| = d(x, z)`, which certifies the samples lie on the
/// geodesic through the base of `h1`.
pub fn ray_hits(form: &HermitianForm, h1: &Horoball, h2: &Horoball, x: &ProjPoint) -> (bool, f64) {
    let q1 = h1.base.lift();
    let xv = x.lift();
    // the second null point on the complex line through q1 and x
    let kappa = form.pair(q1, xv);
    let beta = c64(form.norm_sq(xv), 0.0) / (kappa * 2.0);
    let p = xv - q1 * beta;
    let b1x = h1.busemann(form, x).unwrap();
    let mut hit = false;
    let mut off_geodesic: f64 = 0.0;
    let steps = 3000;
    for k in 0..=steps {
        let w = k as f64 / steps as f64;
        // walk from x (w = 0) to p, log-spaced in the weight of q1
        let t = 10f64.powf(-12.0 * w);
        let z = ProjPoint::new(form, q1 * (beta * t) + &p);
        let Ok(z) = z else { continue };
        if h2.busemann(form, &z).unwrap() <= h2.level {
            hit = true;
        }
        if k % 300 == 0 {
            let db = (h1.busemann(form, &z).unwrap() - b1x).abs();
            off_geodesic = off_geodesic.max((db - distance(form, x, &z).unwrap()).abs());
        }
    }
    (hit, off_geodesic)
}

#[derive(Debug, Default)]
pub struct ShadowTrials {
    pub trials: usize,
    /// Pairs where `y` is shadowed, `x` is closer to the foot, but the ray
    /// from `x` misses the second horoball.
    pub violations: usize,
    /// Trials where `shadow_contains` and `ray_hits` disagree.
    pub disagreements: usize,
    pub off_geodesic: f64,
}

/// Monotonicity trials on the boundary of a horoball in dimension 2.
/// With `real` set, every point and base is taken in the real slice.
pub fn shadow_trials(real: bool, seed: u64, count: usize) -> ShadowTrials {
    use chdef::chgeom::{orthogeodesic, orthogeodesic_length, shadow_contains};
    use rand::SeedableRng;
    let tol = Tolerances::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let form = HermitianForm::standard(2);
    let frame = form.frame();
    let point = |rng: &mut rand_chacha::ChaCha8Rng| {
        let v = frame.random_point(rng, 0.999);
        let v = if real { v.map(|c| c64(c.re, 0.0)) } else { v };
        ProjPoint::new(&form, v).unwrap()
    };
    let boundary = |rng: &mut rand_chacha::ChaCha8Rng| {
        let v = frame.random_boundary_point(rng);
        let v = if real {
            let n = v[0].re.hypot(v[1].re);
            NumVector::from_vec(vec![
                c64(v[0].re / n, 0.0),
                c64(v[1].re / n, 0.0),
                c64(1.0, 0.0),
            ])
        } else {
            v
        };
        BoundaryPoint::new(&form, v, &tol).unwrap()
    };
    let mut out = ShadowTrials::default();
    while out.trials < count {
        let o = form.canonical_origin().unwrap();
        let h1 = Horoball::new(boundary(&mut rng), o.clone(), -0.5);
        let h2 = Horoball::new(boundary(&mut rng), o, 0.0);
        let len = orthogeodesic_length(&form, &h1, &h2, &tol).unwrap();
        let gap: f64 = rng.random::<f64>() * 2.0;
        let h2 = h2.with_level(-len - gap - 1e-9);
        let foot = h1
            .project(&form, &orthogeodesic(&form, &h1, &h2, &tol).unwrap().foot1)
            .unwrap();
        let mut y = None;
        for _ in 0..3000 {
            let c = h1.project(&form, &point(&mut rng)).unwrap();
            if shadow_contains(&form, &h1, &h2, &c, &tol).unwrap() {
                y = Some(c);
                break;
            }
        }
        let Some(y) = y else { continue };
        let dy = distance(&form, &foot, &y).unwrap();
        let mut x = None;
        for _ in 0..3000 {
            let c = h1.project(&form, &point(&mut rng)).unwrap();
            if distance(&form, &foot, &c).unwrap() < dy {
                x = Some(c);
                break;
            }
        }
        let Some(x) = x else { continue };
        out.trials += 1;
        let claimed = shadow_contains(&form, &h1, &h2, &x, &tol).unwrap();
        let (hx, ex) = ray_hits(&form, &h1, &h2, &x);
        let (hy, ey) = ray_hits(&form, &h1, &h2, &y);
        out.off_geodesic = out.off_geodesic.max(ex).max(ey);
        if hx != claimed || !hy {
            out.disagreements += 1;
        }
        if !hx {
            out.violations += 1;
        }
    }
    out
}
