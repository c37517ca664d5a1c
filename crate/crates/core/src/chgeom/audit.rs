use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    classify_isometry, estimate_shadow_radius, fixed_boundary_point, line_distance,
    orthogeodesic_length, BoundaryPoint, HermitianForm, Horoball, IsometryTag, ProjPoint,
    Tolerances,
};
use crate::error::{Error, Result};
use crate::numeric::{identity_deviation, NumMatrix};
use crate::words::{NumericRep, Word};

/// Fixed wording attached to every audit report.
pub const CERTIFICATION_NOTE: &str = "not a discreteness proof";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Horosphere points sampled per cusp generator.
    pub boundary_samples: usize,
    /// Lengths closer than this are merged in the spectrum.
    pub spectrum_tol: f64,
    /// Samples for the shadow radius estimate; zero skips it.
    pub shadow_samples: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            boundary_samples: 50,
            spectrum_tol: 1e-6,
            shadow_samples: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition1Entry {
    pub word: String,
    pub base_deviation: f64,
    pub max_level_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition1Report {
    pub generators: Vec<Condition1Entry>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub word: String,
    pub length: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub length: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition2Report {
    /// Smallest orthogeodesic length between the horoball and a tested
    /// translate; `None` when no word was tested.
    pub min_margin: Option<f64>,
    pub closest_word: Option<String>,
    pub spectrum: Vec<SpectrumEntry>,
    pub violations: Vec<Violation>,
    pub peripheral_excluded: usize,
    pub pass: bool,
}

/// The finite faithfulness statement that follows from a passing audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Faithfulness {
    pub words_checked: usize,
    pub trivial_images: Vec<String>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairVerdict {
    pub label: String,
    pub original: Option<IsometryTag>,
    pub deformed: Option<IsometryTag>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParabolicAuditReport {
    pub pairs: Vec<PairVerdict>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub condition1: Condition1Report,
    pub condition2: Condition2Report,
    pub parabolic_audit: Vec<PairVerdict>,
    pub faithfulness: Faithfulness,
    pub words_tested: usize,
    pub level: f64,
    pub shadow_radius_estimate: Option<f64>,
    pub certification: String,
    pub seed: u64,
    pub pass: bool,
}

impl AuditReport {
    /// Adds a parabolic-preservation verdict; the overall result then
    /// requires it as well.
    pub fn attach_parabolic(&mut self, audit: ParabolicAuditReport) {
        self.pass &= audit.pass;
        self.parabolic_audit = audit.pairs;
    }
}

/// Common fixed boundary point of the cusp images.
pub fn cusp_base_point(
    form: &HermitianForm,
    cusp: &[NumMatrix],
    tol: &Tolerances,
) -> Result<BoundaryPoint> {
    let mut candidate = None;
    for g in cusp {
        if identity_deviation(g) <= tol.compat {
            continue;
        }
        let class = classify_isometry(form, g, tol)?;
        if class.tag.is_parabolic() || class.tag.is_boundary_elliptic() {
            candidate = Some(fixed_boundary_point(form, g, tol)?);
            break;
        }
    }
    let q = candidate.ok_or(Error::NoCommonFixedPoint)?;
    for g in cusp {
        if line_distance(&(g * q.lift()), q.lift()) > fix_tol(tol) {
            return Err(Error::NoCommonFixedPoint);
        }
    }
    Ok(q)
}

fn fix_tol(tol: &Tolerances) -> f64 {
    tol.null.sqrt().min(1e-6).max(tol.null)
}

fn moves_base(g: &NumMatrix, q: &BoundaryPoint, tol: &Tolerances) -> f64 {
    let d = line_distance(&(g * q.lift()), q.lift());
    if d <= fix_tol(tol) {
        0.0
    } else {
        d
    }
}

/// Result of level calibration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    /// Highest level at which every tested translate is still disjoint.
    pub tangency_level: f64,
    pub backoff: f64,
    pub level: f64,
    pub closest_word: Option<String>,
}

/// Orthogeodesic length to a translate changes by `-2 ds` when the level
/// rises by `ds`, so the first tangency over the test set is found by
/// bisection on the minimum length and the returned level backs off from it.
pub fn calibrate_level(
    form: &HermitianForm,
    rep: &NumericRep,
    base: &BoundaryPoint,
    origin: &ProjPoint,
    test_words: &[Word],
    backoff: f64,
    tol: &Tolerances,
) -> Result<Calibration> {
    let probe = Horoball::new(base.clone(), origin.clone(), 0.0);
    let lengths = translate_lengths(form, rep, &probe, test_words, tol)?;
    let closest = lengths
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|l| (i, l)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((idx, min_len)) = closest else {
        return Ok(Calibration {
            tangency_level: f64::INFINITY,
            backoff,
            level: 0.0,
            closest_word: None,
        });
    };
    let g = rep.evaluate_word(&test_words[idx]);
    let margin_at = |s: f64| -> Result<f64> {
        let h = probe.with_level(s);
        orthogeodesic_length(form, &h, &h.transform(&g), tol)
    };
    // bracket the root of the closest word's length, then bisect
    let guess = min_len / 2.0;
    let (mut lo, mut hi) = (guess - 1.0, guess + 1.0);
    while margin_at(lo)? <= 0.0 {
        lo -= 1.0;
    }
    while margin_at(hi)? > 0.0 {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if margin_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        tangency_level: lo,
        backoff,
        level: lo - backoff,
        closest_word: Some(rep.presentation().format_word(&test_words[idx])),
    })
}

/// Orthogeodesic length from the horoball to each translate, `None` for
/// words whose image fixes the base point.
fn translate_lengths(
    form: &HermitianForm,
    rep: &NumericRep,
    h: &Horoball,
    words: &[Word],
    tol: &Tolerances,
) -> Result<Vec<Option<f64>>> {
    words
        .par_iter()
        .map(|w| {
            let g = rep.evaluate_word(w);
            if moves_base(&g, &h.base, tol) == 0.0 {
                return Ok(None);
            }
            orthogeodesic_length(form, h, &h.transform(&g), tol).map(Some)
        })
        .collect()
}

/// Finite check of the two consistency conditions for a horoball:
/// the cusp images preserve it, and every other tested translate is
/// disjoint from it.
pub fn consistency_audit(
    form: &HermitianForm,
    rep: &NumericRep,
    cusp_words: &[Word],
    test_words: &[Word],
    horoball: &Horoball,
    opts: &AuditOptions,
    tol: &Tolerances,
) -> Result<AuditReport> {
    form.require_hyperbolic()?;
    let pres = rep.presentation();
    let cusp: Vec<NumMatrix> = cusp_words.iter().map(|w| rep.evaluate_word(w)).collect();
    let base = cusp_base_point(form, &cusp, tol)?;
    if base.projective_distance(&horoball.base) > fix_tol(tol) {
        return Err(Error::InvalidInput(
            "horoball is not based at the cusp fixed point".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let frame = form.frame();
    let mut samples = Vec::with_capacity(opts.boundary_samples);
    for _ in 0..opts.boundary_samples {
        let z = ProjPoint::new(form, frame.random_point(&mut rng, 0.9))?;
        samples.push(horoball.project(form, &z)?);
    }
    let level_tol = tol.level * horoball.level.abs().max(1.0);
    let mut generators = Vec::new();
    for (w, g) in cusp_words.iter().zip(&cusp) {
        let base_deviation = line_distance(&(g * horoball.base.lift()), horoball.base.lift());
        let mut max_dev: f64 = 0.0;
        for z in &samples {
            let b = horoball.busemann(form, &z.transform(g))?;
            max_dev = max_dev.max((b - horoball.level).abs());
        }
        generators.push(Condition1Entry {
            word: pres.format_word(w),
            base_deviation,
            max_level_deviation: max_dev,
            pass: base_deviation <= fix_tol(tol) && max_dev <= level_tol,
        });
    }
    let condition1 = Condition1Report {
        pass: generators.iter().all(|e| e.pass),
        generators,
    };

    let lengths = translate_lengths(form, rep, horoball, test_words, tol)?;
    let mut violations = Vec::new();
    let mut tested = Vec::new();
    let mut peripheral_excluded = 0;
    let mut closest: Option<(f64, usize)> = None;
    for (i, l) in lengths.iter().enumerate() {
        match l {
            None => peripheral_excluded += 1,
            Some(l) => {
                tested.push(*l);
                if closest.is_none_or(|(c, _)| *l < c) {
                    closest = Some((*l, i));
                }
                if *l <= 0.0 {
                    violations.push(Violation {
                        word: pres.format_word(&test_words[i]),
                        length: *l,
                    });
                }
            }
        }
    }
    tested.sort_by(f64::total_cmp);
    let mut spectrum: Vec<SpectrumEntry> = Vec::new();
    for l in &tested {
        match spectrum.last_mut() {
            Some(last)
                if (l - last.length).abs() <= opts.spectrum_tol * last.length.abs().max(1.0) =>
            {
                last.multiplicity += 1
            }
            _ => spectrum.push(SpectrumEntry {
                length: *l,
                multiplicity: 1,
            }),
        }
    }
    let words_tested = tested.len();
    let condition2 = Condition2Report {
        min_margin: closest.map(|c| c.0),
        closest_word: closest.map(|c| pres.format_word(&test_words[c.1])),
        spectrum,
        pass: violations.is_empty(),
        violations,
        peripheral_excluded,
    };

    let trivial_images: Vec<String> = test_words
        .par_iter()
        .filter(|w| !w.is_empty())
        .filter_map(|w| {
            let g = rep.evaluate_word(w);
            let scale = g[(0, 0)];
            // projectively trivial: a unit scalar matrix
            let scalar = scale.norm() > 0.0 && identity_deviation(&(g / scale)) <= tol.compat;
            scalar.then(|| pres.format_word(w))
        })
        .collect();
    let faithfulness = Faithfulness {
        words_checked: test_words.iter().filter(|w| !w.is_empty()).count(),
        holds: trivial_images.is_empty(),
        trivial_images,
    };

    let shadow_radius_estimate = if opts.shadow_samples > 0 {
        estimate_shadow_radius(form, horoball, &mut rng, opts.shadow_samples, tol)?
    } else {
        None
    };

    let pass = condition1.pass && condition2.pass && faithfulness.holds;
    Ok(AuditReport {
        condition1,
        condition2,
        parabolic_audit: Vec::new(),
        faithfulness,
        words_tested,
        level: horoball.level,
        shadow_radius_estimate,
        certification: format!("certified on {words_tested} words, {CERTIFICATION_NOTE}"),
        seed: opts.seed,
        pass,
    })
}

/// An element before and after deformation.
#[derive(Clone, Debug)]
pub struct IsometryPair {
    pub label: String,
    pub original: NumMatrix,
    pub deformed: NumMatrix,
}

/// Checks that parabolic elements stay parabolic and boundary elliptic
/// elements stay boundary elliptic.
pub fn parabolic_preserving_audit(
    pairs: &[IsometryPair],
    form_orig: &HermitianForm,
    form_def: &HermitianForm,
    tol: &Tolerances,
) -> ParabolicAuditReport {
    let verdicts: Vec<PairVerdict> = pairs
        .iter()
        .map(|p| {
            let orig = classify_isometry(form_orig, &p.original, tol);
            let def = classify_isometry(form_def, &p.deformed, tol);
            let error = match (&orig, &def) {
                (Err(e), _) => Some(format!("original: {e}")),
                (_, Err(e)) => Some(format!("deformed: {e}")),
                _ => None,
            };
            let original = orig.ok().map(|c| c.tag);
            let deformed = def.ok().map(|c| c.tag);
            let pass = match (original, deformed) {
                (Some(o), Some(d)) => {
                    if o.is_parabolic() {
                        d.is_parabolic()
                    } else if o.is_boundary_elliptic() {
                        d.is_boundary_elliptic()
                    } else {
                        o != IsometryTag::Indeterminate
                    }
                }
                _ => false,
            };
            PairVerdict {
                label: p.label.clone(),
                original,
                deformed,
                error,
                pass,
            }
        })
        .collect();
    ParabolicAuditReport {
        pass: verdicts.iter().all(|v| v.pass),
        pairs: verdicts,
    }
}
