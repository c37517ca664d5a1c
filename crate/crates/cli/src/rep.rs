//! Representation files.

use std::collections::BTreeMap;
use std::path::Path;

use chdef::chgeom::{HermitianForm, Tolerances};
use chdef::figure8::FigureEightFamily;
use chdef::words::RelationReport;
use chdef::{ExactRep, NumericRep, Presentation, RingMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// On-disk representation: a presentation, exact generator images, the
/// invariant form, and the divisor applied to the evaluation angle.
///
/// With `angle_divisor = k` the variable is set to `e^{i alpha / k}`, so a
/// bent representation stored in `v = e^{i theta/n}` is evaluated at the
/// bending angle directly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepFile {
    pub presentation: String,
    pub images: BTreeMap<String, RingMatrix>,
    pub form: RingMatrix,
    #[serde(default = "one")]
    pub angle_divisor: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn one() -> u32 {
    1
}

/// A loaded representation ready for evaluation.
pub struct LoadedRep {
    pub rep: ExactRep,
    pub form: RingMatrix,
    pub angle_divisor: u32,
}

impl LoadedRep {
    pub fn figure8() -> CliResult<Self> {
        let fam = FigureEightFamily::build()?;
        Ok(Self {
            rep: fam.rep().clone(),
            form: fam.form().clone(),
            angle_divisor: 1,
        })
    }

    /// `figure8` names the built-in family; anything else is a path.
    pub fn load(spec: &str) -> CliResult<Self> {
        if spec == "figure8" {
            return Self::figure8();
        }
        let text = std::fs::read_to_string(spec).map_err(|e| CliError::io(Path::new(spec), e))?;
        let file: RepFile =
            serde_json::from_str(&text).map_err(|e| CliError::Malformed(format!("{spec}: {e}")))?;
        Self::from_file(file)
    }

    pub fn from_file(file: RepFile) -> CliResult<Self> {
        if file.angle_divisor == 0 {
            return Err(CliError::Malformed("angle_divisor must be positive".into()));
        }
        let pres = Presentation::parse(&file.presentation)?;
        let mut images = Vec::with_capacity(pres.num_generators());
        for g in pres.generators() {
            let m = file
                .images
                .get(g)
                .ok_or_else(|| CliError::Malformed(format!("no image for generator {g}")))?;
            images.push(m.clone());
        }
        if file.images.len() != images.len() {
            return Err(CliError::Malformed("images name unknown generators".into()));
        }
        Ok(Self {
            rep: ExactRep::new(pres, images)?,
            form: file.form,
            angle_divisor: file.angle_divisor,
        })
    }

    pub fn to_file(&self) -> RepFile {
        let images = self
            .rep
            .presentation()
            .generators()
            .iter()
            .zip(self.rep.images())
            .map(|(g, m)| (g.clone(), m.clone()))
            .collect();
        RepFile {
            presentation: self.rep.presentation().to_text(),
            images,
            form: self.form.clone(),
            angle_divisor: self.angle_divisor,
            relations: Vec::new(),
            seed: None,
        }
    }

    fn angle(&self, alpha: f64) -> f64 {
        alpha / self.angle_divisor as f64
    }

    pub fn numeric(&self, alpha: f64) -> CliResult<NumericRep> {
        Ok(self.rep.evaluate(self.angle(alpha))?)
    }

    pub fn numeric_form(&self, alpha: f64, tol: &Tolerances) -> CliResult<HermitianForm> {
        Ok(HermitianForm::new(
            self.form.evaluate(self.angle(alpha)),
            tol.sig,
        )?)
    }
}
