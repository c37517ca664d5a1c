//! The one-parameter family of representations of the figure-eight knot
//! group into SU(3,1), with `u = e^{i alpha}` and `conj(u)` stored as `u^-1`.
//!
//! At `u = 1` the family is a lattice embedding into a real form.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chgeom::{
    classify_isometry, geometric_multiplicity, HermitianForm, IsometryClass, Tolerances,
};
use crate::error::{Error, Result};
use crate::numeric::{eigenvalues, Inertia, NumMatrix};
use crate::ring::{RingMatrix, StarLaurent};
use crate::words::{ExactRep, NumericRep, Presentation, Word};

pub const PRESENTATION: &str = include_str!("../data/figure8.pres");

fn p(terms: &[(i64, i64, i64)]) -> StarLaurent {
    StarLaurent::from_terms(terms)
}

/// `c + (s_num/s_den)(u + u^-1)`.
fn s_affine(c: i64, s_num: i64, s_den: i64) -> StarLaurent {
    p(&[(0, c, 1), (1, s_num, s_den), (-1, s_num, s_den)])
}

pub fn m_matrix() -> RingMatrix {
    let (o, z) = (StarLaurent::one(), StarLaurent::zero());
    RingMatrix::from_rows(vec![
        vec![o.clone(), z.clone(), o.clone(), p(&[(1, 1, 2), (0, -1, 1)])],
        vec![z.clone(), o.clone(), o.clone(), p(&[(1, 1, 2)])],
        vec![z.clone(), z.clone(), o.clone(), p(&[(1, 1, 2), (0, 1, 2)])],
        vec![z.clone(), z.clone(), z, o],
    ])
    .expect("square")
}

pub fn n_matrix() -> RingMatrix {
    let (o, z) = (StarLaurent::one(), StarLaurent::zero());
    let two = StarLaurent::from_int(2);
    RingMatrix::from_rows(vec![
        vec![o.clone(), z.clone(), z.clone(), z.clone()],
        vec![p(&[(0, 2, 1), (-1, 2, 1)]), o.clone(), z.clone(), z.clone()],
        vec![two, o.clone(), o.clone(), z.clone()],
        vec![o.clone(), o.clone(), z, o],
    ])
    .expect("square")
}

/// The invariant Hermitian form.
pub fn form_matrix() -> RingMatrix {
    let a = s_affine(1, 1, 2);
    let na = -&a;
    let b = s_affine(4, 2, 1);
    let nb = -&b;
    let one_u = p(&[(0, 1, 1), (1, 1, 1)]);
    let one_ubar = one_u.star();
    let corner = p(&[(0, -3, 1), (1, -2, 1), (-1, -2, 1), (-2, -1, 1)]);
    RingMatrix::from_rows(vec![
        vec![a.clone(), na.clone(), one_u.clone(), corner.clone()],
        vec![na, a, -&one_u, one_u],
        vec![one_ubar.clone(), -&one_ubar, b.clone(), nb.clone()],
        vec![corner.star(), one_ubar, nb, b],
    ])
    .expect("square")
}

/// `det J_u` as a Laurent polynomial in `u` with symmetric coefficients.
pub fn det_expansion() -> StarLaurent {
    let coeffs = [-96, -83, -53, -24, -7, -1];
    let mut out = StarLaurent::from_int(coeffs[0]);
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        out = &out + &p(&[(k as i64, c, 1), (-(k as i64), c, 1)]);
    }
    out
}

/// `-4 (c+1)^2 (2c+1)^3` with `c = (u + u^-1)/2`.
pub fn det_factored() -> StarLaurent {
    let c = s_affine(0, 1, 2);
    let c1 = &c + &StarLaurent::one();
    let c2 = &(&c + &c) + &StarLaurent::one();
    &(&StarLaurent::from_int(-4) * &c1.pow(2)) * &c2.pow(3)
}

#[derive(Clone, Debug)]
pub struct FigureEightFamily {
    rep: ExactRep,
    form: RingMatrix,
    meridian: Word,
    longitude: Word,
}

impl FigureEightFamily {
    /// The family as printed, refusing to build if the relator fails.
    pub fn build() -> Result<Self> {
        let fam = Self::assemble(m_matrix(), n_matrix(), form_matrix())?;
        if !fam.relation_holds() {
            return Err(Error::Transcription(
                "relator m w n^-1 w^-1 is not the identity".into(),
            ));
        }
        Ok(fam)
    }

    /// Builds from arbitrary images without checking the relation.
    pub fn assemble(m: RingMatrix, n: RingMatrix, form: RingMatrix) -> Result<Self> {
        let pres = Presentation::parse(PRESENTATION)?;
        let meridian = pres.parse_word("m")?;
        let longitude = pres.parse_word("l")?;
        if form.dim() != m.dim() {
            return Err(Error::DimensionMismatch {
                left: m.dim(),
                right: form.dim(),
            });
        }
        Ok(Self {
            rep: ExactRep::new(pres, vec![m, n])?,
            form,
            meridian,
            longitude,
        })
    }

    pub fn rep(&self) -> &ExactRep {
        &self.rep
    }

    pub fn form(&self) -> &RingMatrix {
        &self.form
    }

    pub fn meridian(&self) -> &Word {
        &self.meridian
    }

    pub fn longitude(&self) -> &Word {
        &self.longitude
    }

    pub fn m(&self) -> &RingMatrix {
        self.rep.image(0)
    }

    pub fn n(&self) -> &RingMatrix {
        self.rep.image(1)
    }

    pub fn l(&self) -> RingMatrix {
        self.rep.evaluate_word(&self.longitude)
    }

    pub fn relation_holds(&self) -> bool {
        self.rep.check_relations().iter().all(|r| r.passes(0.0))
    }

    pub fn numeric(&self, alpha: f64) -> Result<NumericRep> {
        self.rep.evaluate(alpha)
    }

    pub fn numeric_form(&self, alpha: f64, tol: &Tolerances) -> Result<HermitianForm> {
        HermitianForm::new(self.form.evaluate(alpha), tol.sig)
    }
}

/// Whether `A^T J star(A) = J` holds exactly.
pub fn preserves_form(a: &RingMatrix, form: &RingMatrix) -> bool {
    let lhs = a
        .transpose()
        .mul(form)
        .and_then(|x| x.mul(&a.star_entries()));
    matches!(lhs, Ok(x) if x == *form)
}

/// Exact form invariance for each generator, in order.
pub fn verify_form_invariance(fam: &FigureEightFamily) -> Vec<(String, bool)> {
    let pres = fam.rep.presentation();
    fam.rep
        .images()
        .iter()
        .enumerate()
        .map(|(i, a)| (pres.generators()[i].clone(), preserves_form(a, &fam.form)))
        .collect()
}

/// `det J_u` agrees exactly with both the symmetric expansion and the
/// factored form.
pub fn verify_det_closed_form(fam: &FigureEightFamily) -> bool {
    let det = fam.form.det();
    det == det_expansion() && det == det_factored()
}

pub fn signature_at(fam: &FigureEightFamily, alpha: f64, tol: &Tolerances) -> Result<Inertia> {
    Ok(fam.numeric_form(alpha, tol)?.inertia())
}

/// `Tr(M N)` as a Laurent polynomial.
pub fn trace_polynomial(fam: &FigureEightFamily) -> StarLaurent {
    fam.m().mul(fam.n()).expect("same dimension").trace()
}

pub fn trace_separation(fam: &FigureEightFamily, alphas: &[f64]) -> Vec<Complex64> {
    let t = trace_polynomial(fam);
    alphas.iter().map(|&a| t.eval_angle(a)).collect()
}

/// Smallest `k` with `(A - I)^k = 0`, if at most `A.dim()`.
pub fn unipotence_degree(a: &RingMatrix) -> Option<usize> {
    let d = a.sub(&RingMatrix::identity(a.dim())).ok()?;
    let mut power = RingMatrix::identity(a.dim());
    for k in 1..=a.dim() {
        power = power.mul(&d).ok()?;
        if power.is_zero() {
            return Some(k);
        }
    }
    None
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeripheralAnalysis {
    pub alpha: f64,
    /// Eigenvalues of the longitude image with multiplicity.
    pub l_eigenvalues: Vec<Complex64>,
    /// Geometric multiplicity of `u` as an eigenvalue of the longitude.
    pub geo_mult_u: usize,
    pub m_unipotence_degree: Option<usize>,
    pub m_class: IsometryClass,
    pub l_class: IsometryClass,
    /// Common fixed null lift, as exact rationals when recognised.
    pub fixed_lift: Vec<String>,
    /// `M v = v`, `L v = u v` and `<v, v> = 0` hold exactly.
    pub fixed_lift_exact: bool,
}

/// Peripheral structure at `alpha`. Requires a hyperbolic form.
pub fn peripheral_analysis(
    fam: &FigureEightFamily,
    alpha: f64,
    tol: &Tolerances,
) -> Result<PeripheralAnalysis> {
    let form = fam.numeric_form(alpha, tol)?;
    form.require_hyperbolic()?;
    let l_exact = fam.l();
    let m_num = fam.m().evaluate(alpha);
    let l_num: NumMatrix = l_exact.evaluate(alpha);
    let u = Complex64::from_polar(1.0, alpha);
    let m_class = classify_isometry(&form, &m_num, tol)?;
    let l_class = classify_isometry(&form, &l_num, tol)?;
    let numeric_lift = m_class
        .fixed_points
        .first()
        .cloned()
        .ok_or(Error::NoFixedNullVector)?;
    let (lift, exact) = match snap_rational(&numeric_lift) {
        Some(v) => {
            let ring: Vec<StarLaurent> = v.iter().cloned().map(StarLaurent::constant).collect();
            let ok = fixed_lift_checks(fam.m(), &l_exact, &fam.form, &ring)?;
            (v.iter().map(|c| c.to_string()).collect(), ok)
        }
        None => (numeric_lift.iter().map(|c| format!("{c}")).collect(), false),
    };
    Ok(PeripheralAnalysis {
        alpha,
        l_eigenvalues: eigenvalues(&l_num, tol.cluster)?,
        geo_mult_u: geometric_multiplicity(&l_num, u, tol.rank),
        m_unipotence_degree: unipotence_degree(fam.m()),
        m_class,
        l_class,
        fixed_lift: lift,
        fixed_lift_exact: exact,
    })
}

fn fixed_lift_checks(
    m: &RingMatrix,
    l: &RingMatrix,
    form: &RingMatrix,
    v: &[StarLaurent],
) -> Result<bool> {
    let mv = m.apply(v)?;
    let lv = l.apply(v)?;
    let u = StarLaurent::var();
    let l_ok = lv.iter().zip(v).all(|(a, b)| *a == &u * b);
    let v_star: Vec<StarLaurent> = v.iter().map(StarLaurent::star).collect();
    let jv = form.apply(&v_star)?;
    let norm = v
        .iter()
        .zip(&jv)
        .fold(StarLaurent::zero(), |acc, (a, b)| &acc + &(a * b));
    Ok(mv.as_slice() == v && l_ok && norm.is_zero())
}

/// Rescales so the largest entry is real and 1, then recognises entries as
/// rationals with denominator at most 12.
fn snap_rational(v: &[Complex64]) -> Option<Vec<BigRational>> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
    if pivot.norm() == 0.0 {
        return None;
    }
    v.iter()
        .map(|&c| {
            let x = c / pivot;
            if x.im.abs() > 1e-9 {
                return None;
            }
            (1..=12i64).find_map(|den| {
                let num = (x.re * den as f64).round();
                if (x.re * den as f64 - num).abs() >= 1e-9 * den as f64 {
                    return None;
                }
                Some(BigRational::new(
                    BigInt::from(num.to_i64()?),
                    BigInt::from(den),
                ))
            })
        })
        .collect::<Option<Vec<_>>>()
        .map(|mut out| {
            // prefer a positive leading nonzero entry
            if let Some(first) = out.iter().find(|c| !c.is_zero()) {
                if first.is_negative() {
                    out.iter_mut().for_each(|c| *c = -c.clone());
                }
            }
            out
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_entries() {
        let fam = FigureEightFamily::build().unwrap();
        assert_eq!(*fam.m().get(2, 3), p(&[(1, 1, 2), (0, 1, 2)]));
        assert_eq!(*fam.n().get(1, 0), p(&[(0, 2, 1), (-1, 2, 1)]));
        assert_eq!(
            *fam.form().get(0, 3),
            p(&[(0, -3, 1), (1, -2, 1), (-1, -2, 1), (-2, -1, 1)])
        );
        assert!(fam.form().star_transpose() == *fam.form());
    }

    #[test]
    fn exact_identities() {
        let fam = FigureEightFamily::build().unwrap();
        assert!(verify_form_invariance(&fam).iter().all(|(_, ok)| *ok));
        assert!(verify_det_closed_form(&fam));
        assert_eq!(trace_polynomial(&fam), p(&[(0, 6, 1), (1, 1, 1)]));
        assert_eq!(unipotence_degree(fam.m()), Some(3));
        assert!(fam.rep().is_unimodular());
        assert!((fam.form().det().eval_angle(0.0).re + 432.0).abs() < 1e-9);
    }

    #[test]
    fn transcription_guard() {
        let mut m = m_matrix();
        m.set(0, 2, StarLaurent::from_int(2));
        let fam = FigureEightFamily::assemble(m.clone(), n_matrix(), form_matrix()).unwrap();
        assert!(!fam.relation_holds());
        assert!(!preserves_form(&m, &form_matrix()));
    }

    #[test]
    fn signatures() {
        let fam = FigureEightFamily::build().unwrap();
        let tol = Tolerances::default();
        assert_eq!(
            signature_at(&fam, 0.0, &tol).unwrap(),
            Inertia::new(3, 1, 0)
        );
        assert_eq!(
            signature_at(&fam, 2.356194490192345, &tol).unwrap(),
            Inertia::new(2, 2, 0)
        );
        assert!(
            signature_at(&fam, 2.0 * std::f64::consts::FRAC_PI_3, &tol)
                .unwrap()
                .z
                >= 1
        );
    }

    #[test]
    fn peripheral_structure() {
        let fam = FigureEightFamily::build().unwrap();
        let tol = Tolerances::default();
        let pa = peripheral_analysis(&fam, 0.5, &tol).unwrap();
        assert!(pa.fixed_lift_exact);
        assert_eq!(pa.fixed_lift, vec!["1", "1", "0", "0"]);
        assert!(pa.geo_mult_u < 3);
        assert!(peripheral_analysis(&fam, 2.5, &tol).is_err());
    }
}
