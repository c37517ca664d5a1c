use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoundaryPoint, HermitianForm, Tolerances};
use crate::error::{Error, Result};
use crate::numeric::{
    eigen_clusters, null_space, singular_values, spectral_norm, EigenCluster, NumMatrix, NumVector,
};

/// Ratio between the rank threshold and the smallest singular value that is
/// trusted to be nonzero. Values in between make the rank ambiguous.
const RANK_GAP: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsometryTag {
    Loxodromic,
    ParabolicUnipotent,
    ElliptoParabolic,
    EllipticBoundary,
    EllipticSinglePoint,
    Identity,
    /// The numerical rank was too close to the threshold to decide.
    Indeterminate,
}

impl IsometryTag {
    pub fn is_parabolic(self) -> bool {
        matches!(self, Self::ParabolicUnipotent | Self::ElliptoParabolic)
    }

    pub fn is_boundary_elliptic(self) -> bool {
        matches!(self, Self::EllipticBoundary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Loxodromic => "loxodromic",
            Self::ParabolicUnipotent => "parabolic-unipotent",
            Self::ElliptoParabolic => "ellipto-parabolic",
            Self::EllipticBoundary => "elliptic-boundary",
            Self::EllipticSinglePoint => "elliptic-single-point",
            Self::Identity => "identity",
            Self::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for IsometryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsometryClass {
    pub tag: IsometryTag,
    pub eigenvalues: Vec<EigenCluster>,
    /// Geometric multiplicity per eigenvalue cluster.
    pub geometric_multiplicities: Vec<usize>,
    /// For ellipto-parabolic elements, `arg(lambda / lambda_0)` for every
    /// eigenvalue other than the one at the fixed null vector, with
    /// multiplicity.
    pub rotation_angles: Vec<f64>,
    pub translation_length: Option<f64>,
    /// Lifts of fixed boundary points found along the way.
    pub fixed_points: Vec<Vec<Complex64>>,
}

/// Number of singular values of `A - lambda I` below `rank_tol * |A|`.
pub fn geometric_multiplicity(a: &NumMatrix, lambda: Complex64, rank_tol: f64) -> usize {
    let threshold = rank_tol * spectral_norm(a).max(1.0);
    let shifted = a - NumMatrix::identity(a.nrows(), a.ncols()) * lambda;
    singular_values(&shifted)
        .iter()
        .filter(|&&s| s <= threshold)
        .count()
}

/// A null vector in the span of `basis`, if the restricted form is
/// degenerate or indefinite there.
pub fn eigenspace_null_vector(
    form: &HermitianForm,
    basis: &[NumVector],
    tol: &Tolerances,
) -> Option<NumVector> {
    let k = basis.len();
    if k == 0 {
        return None;
    }
    // x^* S x = <B x, B x>
    let s = NumMatrix::from_fn(k, k, |a, b| form.pair(&basis[b], &basis[a]));
    let eig = s.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let combine = |x: nalgebra::DVectorView<Complex64>| -> NumVector {
        let mut out = NumVector::zeros(form.dim());
        for (i, b) in basis.iter().enumerate() {
            out += b * x[i];
        }
        out.normalize()
    };
    let threshold = tol.null * form.scale();
    if let Some(i) = (0..k)
        .filter(|&i| vals[i].abs() <= threshold)
        .min_by(|&i, &j| vals[i].abs().total_cmp(&vals[j].abs()))
    {
        return Some(combine(eig.eigenvectors.column(i)));
    }
    let pos = (0..k).find(|&i| vals[i] > 0.0)?;
    let neg = (0..k).find(|&i| vals[i] < 0.0)?;
    let x = eig.eigenvectors.column(pos) / Complex64::new(vals[pos].sqrt(), 0.0)
        + eig.eigenvectors.column(neg) / Complex64::new((-vals[neg]).sqrt(), 0.0);
    Some(combine(x.column(0)))
}

struct Analysis {
    clusters: Vec<EigenCluster>,
    geo: Vec<usize>,
    eigenspaces: Vec<Vec<NumVector>>,
    ambiguous: bool,
}

fn analyse(a: &NumMatrix, tol: &Tolerances) -> Result<Analysis> {
    let n = a.nrows();
    let clusters = eigen_clusters(a, tol.cluster)?;
    let threshold = tol.rank * spectral_norm(a).max(1.0);
    let mut geo = Vec::new();
    let mut eigenspaces = Vec::new();
    let mut ambiguous = false;
    for c in &clusters {
        let shifted = a - NumMatrix::identity(n, n) * c.value;
        let sv = singular_values(&shifted);
        if sv
            .iter()
            .any(|&s| s > threshold && s <= RANK_GAP * threshold)
        {
            ambiguous = true;
        }
        let basis = null_space(&shifted, threshold);
        geo.push(basis.len());
        eigenspaces.push(basis);
    }
    Ok(Analysis {
        clusters,
        geo,
        eigenspaces,
        ambiguous,
    })
}

fn check_preconditions(form: &HermitianForm, a: &NumMatrix, tol: &Tolerances) -> Result<()> {
    form.require_hyperbolic()?;
    if a.nrows() != form.dim() || a.ncols() != form.dim() {
        return Err(Error::DimensionMismatch {
            left: form.dim(),
            right: a.nrows(),
        });
    }
    let residual = form.preservation_residual(a);
    if residual > tol.compat {
        return Err(Error::NotFormPreserving(residual));
    }
    let det = a.determinant().norm();
    if (det - 1.0).abs() > tol.compat.max(1e-10) * 1e2 {
        return Err(Error::BadDeterminant(det));
    }
    Ok(())
}

/// Classifies a form-preserving matrix by its spectrum and Jordan structure.
///
/// Eigenvalues off the unit circle give a loxodromic element. Otherwise
/// diagonalizable elements are elliptic (boundary elliptic when some
/// eigenspace contains a null vector, the identity when projectively
/// scalar) and non-diagonalizable ones are parabolic. A determinant of
/// modulus one is accepted since a unit scalar does not change the action.
pub fn classify_isometry(
    form: &HermitianForm,
    a: &NumMatrix,
    tol: &Tolerances,
) -> Result<IsometryClass> {
    check_preconditions(form, a, tol)?;
    let n = a.nrows();
    let an = analyse(a, tol)?;
    let mut class = IsometryClass {
        tag: IsometryTag::Indeterminate,
        eigenvalues: an.clusters.clone(),
        geometric_multiplicities: an.geo.clone(),
        rotation_angles: Vec::new(),
        translation_length: None,
        fixed_points: Vec::new(),
    };

    let max_mod = an
        .clusters
        .iter()
        .map(|c| c.value.norm())
        .fold(0.0, f64::max);
    let min_mod = an
        .clusters
        .iter()
        .map(|c| c.value.norm())
        .fold(f64::INFINITY, f64::min);
    if max_mod - 1.0 > tol.eig || 1.0 - min_mod > tol.eig {
        class.tag = IsometryTag::Loxodromic;
        class.translation_length = Some(2.0 * max_mod.ln());
        for (c, basis) in an.clusters.iter().zip(&an.eigenspaces) {
            if (c.value.norm() - 1.0).abs() > tol.eig {
                if let Some(v) = basis.first() {
                    class.fixed_points.push(v.iter().copied().collect());
                }
            }
        }
        return Ok(class);
    }
    if an.ambiguous {
        return Ok(class);
    }

    let diagonalizable = an.geo.iter().sum::<usize>() == n;
    if diagonalizable {
        if an.clusters.len() == 1 {
            class.tag = IsometryTag::Identity;
            return Ok(class);
        }
        for basis in &an.eigenspaces {
            if let Some(v) = eigenspace_null_vector(form, basis, tol) {
                class.fixed_points.push(v.iter().copied().collect());
            }
        }
        class.tag = if class.fixed_points.is_empty() {
            IsometryTag::EllipticSinglePoint
        } else {
            IsometryTag::EllipticBoundary
        };
        return Ok(class);
    }

    // parabolic: the fixed point sits in an eigenspace of a defective cluster
    let fixed = (0..an.clusters.len())
        .filter(|&k| an.geo[k] < an.clusters[k].multiplicity)
        .chain(0..an.clusters.len())
        .find_map(|k| eigenspace_null_vector(form, &an.eigenspaces[k], tol).map(|v| (k, v)));
    let Some((k0, v)) = fixed else {
        return Err(Error::NoFixedNullVector);
    };
    class.fixed_points.push(v.iter().copied().collect());
    if an.clusters.len() == 1 {
        class.tag = IsometryTag::ParabolicUnipotent;
    } else {
        class.tag = IsometryTag::ElliptoParabolic;
        let lambda0 = an.clusters[k0].value;
        for (k, c) in an.clusters.iter().enumerate() {
            let extra = if k == k0 {
                c.multiplicity.saturating_sub(1)
            } else {
                c.multiplicity
            };
            // rotation on the complement of the fixed line
            if k != k0 {
                class
                    .rotation_angles
                    .extend(std::iter::repeat_n((c.value / lambda0).arg(), extra));
            }
        }
    }
    Ok(class)
}

/// A null eigenvector of `A` with unit-modulus eigenvalue, preferring
/// defective eigenvalues (the parabolic fixed point).
pub fn fixed_boundary_point(
    form: &HermitianForm,
    a: &NumMatrix,
    tol: &Tolerances,
) -> Result<BoundaryPoint> {
    check_preconditions(form, a, tol)?;
    let an = analyse(a, tol)?;
    let mut order: Vec<usize> = (0..an.clusters.len())
        .filter(|&k| (an.clusters[k].value.norm() - 1.0).abs() <= tol.eig)
        .collect();
    order.sort_by_key(|&k| an.geo[k] >= an.clusters[k].multiplicity);
    for k in order {
        if let Some(v) = eigenspace_null_vector(form, &an.eigenspaces[k], tol) {
            return BoundaryPoint::new(form, v, tol);
        }
    }
    Err(Error::NoFixedNullVector)
}
