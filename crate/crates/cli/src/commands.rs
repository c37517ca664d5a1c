use std::io::Write;
use std::path::Path;

use chdef::bending::{bend, BendingDatum};
use chdef::chgeom::{
    calibrate_level, classify_isometry, consistency_audit, cusp_base_point,
    parabolic_preserving_audit, AuditOptions, AuditReport, Calibration, Horoball, IsometryClass,
    IsometryPair, Tolerances,
};
use chdef::figure8::{
    det_expansion, det_factored, form_matrix, m_matrix, n_matrix, peripheral_analysis,
    preserves_form, trace_polynomial, unipotence_degree, FigureEightFamily,
};
use chdef::numeric::{eigenvalues, inertia, Inertia};
use chdef::words::word_ball;
use chdef::{StarLaurent, Word};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::rep::{LoadedRep, RepFile};

/// Outcome of a command: whether every asserted check passed.
pub type Outcome = CliResult<bool>;

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub relation_exact: bool,
    pub form_invariant_exact: bool,
    pub det_formula_exact: bool,
    pub trace_formula_exact: bool,
    pub unipotent_exact: bool,
    pub seed: u64,
}

impl VerifyReport {
    fn pass(&self) -> bool {
        self.relation_exact
            && self.form_invariant_exact
            && self.det_formula_exact
            && self.trace_formula_exact
            && self.unipotent_exact
    }
}

pub fn figure8_verify(json: Option<&Path>, inject_fault: bool, seed: u64) -> Outcome {
    let mut m = m_matrix();
    if inject_fault {
        // a plausible misprint in one entry of M
        m.set(0, 2, StarLaurent::from_int(2));
    }
    let fam = FigureEightFamily::assemble(m, n_matrix(), form_matrix())?;
    let det = fam.form().det();
    let report = VerifyReport {
        relation_exact: fam.relation_holds(),
        form_invariant_exact: fam
            .rep()
            .images()
            .iter()
            .all(|a| preserves_form(a, fam.form())),
        det_formula_exact: det == det_expansion() && det == det_factored(),
        trace_formula_exact: trace_polynomial(&fam)
            == &StarLaurent::from_int(6) + &StarLaurent::var(),
        unipotent_exact: unipotence_degree(fam.m()).is_some(),
        seed,
    };
    let bytes = to_json(&report);
    if let Some(path) = json {
        write_file(path, &bytes)?;
    }
    std::io::stdout().write_all(&bytes).ok();
    Ok(report.pass())
}

/// Fixed-precision CSV number with negative zero printed as zero.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub struct SweepConfig {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub audit: bool,
    pub ball_length: usize,
    pub level: Option<f64>,
    pub seed: u64,
}

/// Grid of `steps` points from `start` to `end` inclusive.
pub fn sweep_grid(start: f64, end: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    (0..steps)
        .map(|k| start + (end - start) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn sort_key(z: &Complex64) -> (f64, f64) {
    (z.arg(), z.norm())
}

pub fn figure8_sweep(cfg: &SweepConfig, out: &Path, tol: &Tolerances) -> Outcome {
    use std::f64::consts::PI;
    if cfg.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    for a in [cfg.start, cfg.end] {
        if !(a > -PI && a <= PI) {
            return Err(CliError::Usage(format!("alpha {a} outside (-pi, pi]")));
        }
    }
    let fam = FigureEightFamily::build()?;
    let grid = sweep_grid(cfg.start, cfg.end, cfg.steps);
    let words = word_ball(2, cfg.ball_length);
    let cusp = vec![fam.meridian().clone(), fam.longitude().clone()];
    let level = match (cfg.audit, cfg.level) {
        (false, _) => None,
        (true, Some(l)) => Some(l),
        (true, None) => Some(calibrate(&fam, 0.0, &cusp, &words, 0.5, tol)?.level),
    };
    let rows: Vec<CliResult<Vec<String>>> = grid
        .par_iter()
        .map(|&alpha| {
            let form = fam.numeric_form(alpha, tol)?;
            let mn = fam.m().evaluate(alpha) * fam.n().evaluate(alpha);
            let trace = mn.trace();
            let sig: Inertia = inertia(form.matrix(), tol.sig);
            let det = fam.form().det().eval_angle(alpha).re;
            let l = fam.l().evaluate(alpha);
            let mut eig = eigenvalues(&l, tol.cluster)?;
            eig.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).expect("finite"));
            let u = Complex64::from_polar(1.0, alpha);
            let geo = chdef::chgeom::geometric_multiplicity(&l, u, tol.rank);
            let mut row = vec![
                fmt_num(alpha),
                fmt_num(trace.re),
                fmt_num(trace.im),
                sig.p.to_string(),
                sig.q.to_string(),
                sig.z.to_string(),
                fmt_num(det),
            ];
            for z in &eig {
                row.push(fmt_num(z.re));
                row.push(fmt_num(z.im));
            }
            row.push(geo.to_string());
            if let Some(level) = level {
                let margin = if form.is_hyperbolic() {
                    sweep_margin(&fam, alpha, &cusp, &words, level, cfg.seed, tol)
                } else {
                    None
                };
                row.push(margin.map(fmt_num).unwrap_or_default());
            }
            row.push(cfg.seed.to_string());
            Ok(row)
        })
        .collect();

    let mut header: Vec<String> = [
        "alpha", "re_trace", "im_trace", "sig_p", "sig_q", "sig_z", "det_J",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for k in 0..4 {
        header.push(format!("eig_L{k}_re"));
        header.push(format!("eig_L{k}_im"));
    }
    header.push("geo_mult_u".into());
    if level.is_some() {
        header.push("consistency_margin".into());
    }
    header.push("seed".into());

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&header)
        .map_err(|e| CliError::Malformed(e.to_string()))?;
    for row in rows {
        w.write_record(&row?)
            .map_err(|e| CliError::Malformed(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Malformed(e.to_string()))?;
    write_file(out, &bytes)?;
    Ok(true)
}

fn calibrate(
    fam: &FigureEightFamily,
    alpha: f64,
    cusp: &[Word],
    words: &[Word],
    backoff: f64,
    tol: &Tolerances,
) -> CliResult<Calibration> {
    let form = fam.numeric_form(alpha, tol)?;
    let rep = fam.numeric(alpha)?;
    let mats: Vec<_> = cusp.iter().map(|w| rep.evaluate_word(w)).collect();
    let base = cusp_base_point(&form, &mats, tol)?;
    let origin = form.canonical_origin()?;
    Ok(calibrate_level(
        &form, &rep, &base, &origin, words, backoff, tol,
    )?)
}

fn sweep_margin(
    fam: &FigureEightFamily,
    alpha: f64,
    cusp: &[Word],
    words: &[Word],
    level: f64,
    seed: u64,
    tol: &Tolerances,
) -> Option<f64> {
    let form = fam.numeric_form(alpha, tol).ok()?;
    let rep = fam.numeric(alpha).ok()?;
    let mats: Vec<_> = cusp.iter().map(|w| rep.evaluate_word(w)).collect();
    let base = cusp_base_point(&form, &mats, tol).ok()?;
    let h = Horoball::new(base, form.canonical_origin().ok()?, level);
    let opts = AuditOptions {
        seed,
        ..AuditOptions::default()
    };
    consistency_audit(&form, &rep, cusp, words, &h, &opts, tol)
        .ok()?
        .condition2
        .min_margin
}

#[derive(Debug, Serialize)]
struct BendSummary<'a> {
    out: String,
    n: usize,
    relations: &'a [chdef::words::RelationReport],
    seed: u64,
}

pub fn bend_cmd(datum: &Path, out: &Path, seed: u64) -> Outcome {
    let text = std::fs::read_to_string(datum).map_err(|e| CliError::io(datum, e))?;
    let datum = BendingDatum::from_json(&text)?;
    let b = bend(&datum)?;
    let loaded = LoadedRep {
        rep: b.bent.clone(),
        form: b.form.clone(),
        angle_divisor: b.n as u32,
    };
    let file = RepFile {
        relations: b.relations.clone(),
        seed: Some(seed),
        ..loaded.to_file()
    };
    write_file(out, &to_json(&file))?;
    let summary = BendSummary {
        out: out.display().to_string(),
        n: b.n,
        relations: &b.relations,
        seed,
    };
    std::io::stdout().write_all(&to_json(&summary)).ok();
    Ok(b.relations.iter().all(|r| r.passes(0.0)))
}

pub enum LevelChoice {
    Fixed(f64),
    Calibrate { backoff: f64 },
}

pub struct AuditConfig {
    pub rep: String,
    pub cusp: String,
    pub ball_length: usize,
    pub level: LevelChoice,
    pub alpha: f64,
    pub reference_alpha: Option<f64>,
    pub shadow_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct AuditOutput {
    rep: String,
    alpha: f64,
    cusp: Vec<String>,
    ball_length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<Calibration>,
    #[serde(flatten)]
    report: AuditReport,
}

pub fn audit_cmd(cfg: &AuditConfig, out: &Path, tol: &Tolerances) -> Outcome {
    let loaded = LoadedRep::load(&cfg.rep)?;
    let pres = loaded.rep.presentation();
    let cusp: Vec<Word> = cfg
        .cusp
        .split(',')
        .map(|s| pres.parse_word(s.trim()))
        .collect::<chdef::Result<_>>()?;
    if cusp.is_empty() {
        return Err(CliError::Usage("--cusp needs at least one word".into()));
    }
    let form = loaded.numeric_form(cfg.alpha, tol)?;
    form.require_hyperbolic()?;
    let rep = loaded.numeric(cfg.alpha)?;
    let words = word_ball(pres.num_generators(), cfg.ball_length);
    let mats: Vec<_> = cusp.iter().map(|w| rep.evaluate_word(w)).collect();
    let base = cusp_base_point(&form, &mats, tol)?;
    let origin = form.canonical_origin()?;
    let (level, calibration) = match cfg.level {
        LevelChoice::Fixed(s) => (s, None),
        LevelChoice::Calibrate { backoff } => {
            let cal = calibrate_level(&form, &rep, &base, &origin, &words, backoff, tol)?;
            (cal.level, Some(cal))
        }
    };
    let h = Horoball::new(base, origin, level);
    let opts = AuditOptions {
        shadow_samples: cfg.shadow_samples,
        seed: cfg.seed,
        ..AuditOptions::default()
    };
    let mut report = consistency_audit(&form, &rep, &cusp, &words, &h, &opts, tol)?;
    if let Some(a0) = cfg.reference_alpha {
        let form0 = loaded.numeric_form(a0, tol)?;
        let rep0 = loaded.numeric(a0)?;
        let pairs: Vec<IsometryPair> = cusp
            .iter()
            .map(|w| IsometryPair {
                label: pres.format_word(w),
                original: rep0.evaluate_word(w),
                deformed: rep.evaluate_word(w),
            })
            .collect();
        report.attach_parabolic(parabolic_preserving_audit(&pairs, &form0, &form, tol));
    }
    let pass = report.pass;
    let output = AuditOutput {
        rep: cfg.rep.clone(),
        alpha: cfg.alpha,
        cusp: cusp.iter().map(|w| pres.format_word(w)).collect(),
        ball_length: cfg.ball_length,
        calibration,
        report,
    };
    write_file(out, &to_json(&output))?;
    println!(
        "audit {}: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        output
            .report
            .condition2
            .min_margin
            .map(|m| format!("min margin {}", fmt_num(m)))
            .unwrap_or_else(|| "no translates tested".into()),
        output.report.certification
    );
    Ok(pass)
}

#[derive(Debug, Serialize)]
struct ClassifyOutput {
    word: String,
    alpha: f64,
    #[serde(flatten)]
    class: IsometryClass,
    seed: u64,
}

pub fn classify_cmd(rep: &str, word: &str, alpha: f64, seed: u64, tol: &Tolerances) -> Outcome {
    let loaded = LoadedRep::load(rep)?;
    let pres = loaded.rep.presentation();
    let w = pres.parse_word(word)?;
    let form = loaded.numeric_form(alpha, tol)?;
    let g = loaded.numeric(alpha)?.evaluate_word(&w);
    let class = classify_isometry(&form, &g, tol)?;
    let output = ClassifyOutput {
        word: pres.format_word(&w),
        alpha,
        class,
        seed,
    };
    std::io::stdout().write_all(&to_json(&output)).ok();
    Ok(true)
}

/// Peripheral summary of the built-in family, used by `figure8 peripheral`.
pub fn figure8_peripheral(alpha: f64, seed: u64, tol: &Tolerances) -> Outcome {
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        analysis: chdef::figure8::PeripheralAnalysis,
        seed: u64,
    }
    let fam = FigureEightFamily::build()?;
    let analysis = peripheral_analysis(&fam, alpha, tol)?;
    let ok = analysis.fixed_lift_exact;
    std::io::stdout()
        .write_all(&to_json(&Out { analysis, seed }))
        .ok();
    Ok(ok)
}
