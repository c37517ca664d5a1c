//! Bending deformations along a totally geodesic hypersurface.
//!
//! The twist `M = Diag(v^n, v^-1 I_n)` with `v = e^{i theta/n}` centralizes
//! every matrix of block form `Diag(1, A)`. For an amalgam `G1 *_D G2` the
//! bent representation conjugates the second factor by `M`; for an HNN
//! extension it multiplies the stable letter by `M`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chgeom::IsometryTag;
use crate::error::{Error, Result};
use crate::ring::{RingMatrix, StarLaurent};
use crate::words::{ExactRep, NumericRep, Presentation, RelationReport, Word};

/// `Diag(v^n, v^-1, ..., v^-1)` on `n + 1` coordinates.
pub fn twist_matrix(n: usize) -> Result<RingMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("twist needs n >= 2, got {n}")));
    }
    let mut diag = vec![StarLaurent::one().shift(-1); n + 1];
    diag[0] = StarLaurent::var().pow(n as u32);
    Ok(RingMatrix::diagonal(diag))
}

/// `Diag(1, ..., 1, -1)`.
pub fn standard_form(dim: usize) -> RingMatrix {
    let mut diag = vec![StarLaurent::one(); dim];
    diag[dim - 1] = StarLaurent::from_int(-1);
    RingMatrix::diagonal(diag)
}

/// Words whose images fail to commute with the twist, exactly in `v`.
pub fn centralizer_failures(
    twist: &RingMatrix,
    rep: &ExactRep,
    delta: &[Word],
) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for w in delta {
        let g = rep.evaluate_word(w);
        if twist.mul(&g)? != g.mul(twist)? {
            bad.push(rep.presentation().format_word(w));
        }
    }
    Ok(bad)
}

pub fn verify_centralizes(twist: &RingMatrix, rep: &ExactRep, delta: &[Word]) -> Result<bool> {
    Ok(centralizer_failures(twist, rep, delta)?.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionKind {
    Amalgam,
    Hnn,
}

/// Which piece of the decomposition a generator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
    Stable,
}

impl Serialize for Side {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Side::First => s.serialize_u8(1),
            Side::Second => s.serialize_u8(2),
            Side::Stable => s.serialize_str("t"),
        }
    }
}

impl<'de> Deserialize<'de> for Side {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(1) => Ok(Side::First),
            Raw::Num(2) => Ok(Side::Second),
            Raw::Text(t) if t == "1" => Ok(Side::First),
            Raw::Text(t) if t == "2" => Ok(Side::Second),
            Raw::Text(t) if t == "t" => Ok(Side::Stable),
            _ => Err(serde::de::Error::custom("side must be 1, 2 or \"t\"")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumGenerator {
    pub name: String,
    pub side: Side,
    pub image: RingMatrix,
}

/// Decomposition data plus a base representation, as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BendingDatum {
    pub kind: DecompositionKind,
    pub gens: Vec<DatumGenerator>,
    #[serde(default)]
    pub relators: Vec<String>,
    #[serde(default)]
    pub delta: Vec<String>,
    #[serde(default)]
    pub crossings: BTreeMap<String, Vec<i64>>,
    /// Invariant form; `Diag(1, ..., 1, -1)` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<RingMatrix>,
}

impl BendingDatum {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn presentation(&self) -> Result<Presentation> {
        let mut pres = Presentation::new(self.gens.iter().map(|g| g.name.clone()).collect())?;
        for r in &self.relators {
            let w = pres.parse_relation(r)?;
            pres.add_relator(w)?;
        }
        Ok(pres)
    }

    pub fn base_rep(&self) -> Result<ExactRep> {
        let images: Vec<RingMatrix> = self.gens.iter().map(|g| g.image.clone()).collect();
        if let Some(g) = self.gens.iter().find(|g| !g.image.is_constant()) {
            return Err(Error::InvalidInput(format!(
                "base image of {} is not constant",
                g.name
            )));
        }
        ExactRep::new(self.presentation()?, images)
    }

    pub fn delta_words(&self, pres: &Presentation) -> Result<Vec<Word>> {
        self.delta.iter().map(|d| pres.parse_word(d)).collect()
    }

    pub fn form_matrix(&self, dim: usize) -> RingMatrix {
        self.form.clone().unwrap_or_else(|| standard_form(dim))
    }

    fn validate(&self) -> Result<()> {
        if self.gens.is_empty() {
            return Err(Error::InvalidInput("no generators".into()));
        }
        let stable = self.gens.iter().filter(|g| g.side == Side::Stable).count();
        match self.kind {
            DecompositionKind::Amalgam if stable > 0 => Err(Error::InvalidInput(
                "amalgam generators must be on side 1 or 2".into(),
            )),
            DecompositionKind::Hnn
                if stable != 1 || self.gens.iter().any(|g| g.side == Side::Second) =>
            {
                Err(Error::InvalidInput(
                    "HNN data needs exactly one stable letter and no side 2".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Bent representation, exact in `v = e^{i theta/n}`.
#[derive(Clone, Debug)]
pub struct Bending {
    pub base: ExactRep,
    pub bent: ExactRep,
    pub twist: RingMatrix,
    pub form: RingMatrix,
    pub n: usize,
    pub relations: Vec<RelationReport>,
}

impl Bending {
    /// Numeric representation at bending angle `theta`.
    pub fn at_angle(&self, theta: f64) -> Result<NumericRep> {
        self.bent.evaluate(theta / self.n as f64)
    }

    /// Exact substitution `v = 1`.
    pub fn at_unity(&self) -> Result<ExactRep> {
        self.bent.map_images(RingMatrix::at_unity)
    }
}

/// Applies the bending construction and checks every relator exactly.
pub fn bend(datum: &BendingDatum) -> Result<Bending> {
    datum.validate()?;
    let base = datum.base_rep()?;
    let dim = base.dim();
    let n = dim - 1;
    let twist = twist_matrix(n)?;
    let form = datum.form_matrix(dim);
    let twist_inv = twist.inverse()?;
    let delta = datum.delta_words(base.presentation())?;
    if let Some(bad) = centralizer_failures(&twist, &base, &delta)?
        .into_iter()
        .next()
    {
        return Err(Error::CentralizerFailure(bad));
    }
    if twist.transpose().mul(&form)?.mul(&twist.star_entries())? != form {
        return Err(Error::InvalidInput(
            "twist does not preserve the form".into(),
        ));
    }
    let images = datum
        .gens
        .iter()
        .map(|g| match g.side {
            Side::First => Ok(g.image.clone()),
            Side::Second => twist.mul(&g.image)?.mul(&twist_inv),
            Side::Stable => twist.mul(&g.image),
        })
        .collect::<Result<Vec<_>>>()?;
    let bent = ExactRep::new(base.presentation().clone(), images)?;
    let relations = bent.check_relations();
    if let Some(bad) = relations.iter().find(|r| !r.passes(0.0)) {
        return Err(Error::RelationFailure(bad.relator.clone()));
    }
    Ok(Bending {
        base,
        bent,
        twist,
        form,
        n,
        relations,
    })
}

/// Predicted behaviour of a peripheral element after bending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeripheralPrediction {
    pub epsilon: i64,
    pub predicted: IsometryTag,
    /// Rotation angle as a multiple of `theta`.
    pub angle_multiple: i64,
}

impl PeripheralPrediction {
    /// Rotation measured as an eigenvalue ratio at bending angle `theta`.
    /// The twist has determinant one, so projectively it is
    /// `Diag(e^{i theta (n+1)/n}, 1, ..., 1)` and the ratio carries the extra
    /// factor `(n+1)/n`.
    pub fn eigenvalue_rotation(&self, theta: f64, n: usize) -> f64 {
        self.angle_multiple as f64 * theta * (n as f64 + 1.0) / n as f64
    }
}

/// A peripheral loop crossing the hypersurface with signs `e_i` picks up a
/// rotation of `(sum e_i) theta`.
pub fn peripheral_rotation(crossing_signs: &[i64]) -> PeripheralPrediction {
    let epsilon: i64 = crossing_signs.iter().sum();
    PeripheralPrediction {
        epsilon,
        predicted: if epsilon == 0 {
            IsometryTag::ParabolicUnipotent
        } else {
            IsometryTag::ElliptoParabolic
        },
        angle_multiple: epsilon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twist_shape() {
        let m = twist_matrix(3).unwrap();
        assert_eq!(*m.get(0, 0), StarLaurent::var().pow(3));
        assert_eq!(*m.get(2, 2), StarLaurent::one().shift(-1));
        assert!(m.det().is_one());
        assert!(m.at_unity().is_identity());
        assert!(twist_matrix(1).is_err());
    }

    #[test]
    fn rotation_predictions() {
        assert_eq!(
            peripheral_rotation(&[1, -1]).predicted,
            IsometryTag::ParabolicUnipotent
        );
        let p = peripheral_rotation(&[1, 1]);
        assert_eq!(
            (p.epsilon, p.angle_multiple, p.predicted),
            (2, 2, IsometryTag::ElliptoParabolic)
        );
        assert_eq!(peripheral_rotation(&[]).epsilon, 0);
    }

    #[test]
    fn side_json() {
        let s: Vec<Side> = serde_json::from_str(r#"[1, 2, "t"]"#).unwrap();
        assert_eq!(s, vec![Side::First, Side::Second, Side::Stable]);
        assert!(serde_json::from_str::<Side>("3").is_err());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"[1,2,"t"]"#);
    }
}
