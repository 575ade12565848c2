//! Report types and their verdict logic.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use kahler_frobenius::catalog::ExpectedClass;
use serde::Serialize;

use crate::config::Tolerances;
use crate::spec_file::Pair;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DISCLAIMER: &str = "verification is chart-local: identities are checked at the sampled points \
of one chart; compactness and global structure are not checked";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Frobenius,
    PreFrobenius,
    NotFrobenius,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Frobenius => "frobenius",
            Self::PreFrobenius => "pre-frobenius",
            Self::NotFrobenius => "not-frobenius",
            Self::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilRow {
    pub lambda: f64,
    pub curvature: f64,
    pub he_trace: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub min_eigenvalue: f64,
    pub condition_number: f64,
    pub kahler_closure: f64,
    pub rank3_symmetry: f64,
    pub max_curvature: f64,
    pub wdvv: f64,
    pub associator: f64,
    pub commutator: f64,
    /// trace residual of the Chern connection itself (`λ = 0`)
    pub he_trace: f64,
    /// metric Ricci form against the trace of the fibre-algebra pencil at `λ = 0`
    pub ricci_agreement: f64,
    /// only on the first few samples
    pub fd_curvature: Option<f64>,
    pub pencil: Vec<PencilRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub point: Vec<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<SampleMetrics>,
}

/// Maxima over the samples that evaluated; `min_eigenvalue` is a minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub evaluated: usize,
    pub failed: usize,
    pub min_eigenvalue: f64,
    pub kahler: f64,
    pub max_curvature: f64,
    pub wdvv: f64,
    pub associator: f64,
    pub commutator: f64,
    pub pencil_curvature: f64,
    pub he_trace: f64,
    pub ricci_agreement: f64,
    pub fd_curvature: f64,
}

impl Summary {
    pub fn of(samples: &[SampleRecord]) -> Self {
        let mut s = Summary {
            evaluated: 0,
            failed: 0,
            min_eigenvalue: f64::INFINITY,
            kahler: 0.0,
            max_curvature: 0.0,
            wdvv: 0.0,
            associator: 0.0,
            commutator: 0.0,
            pencil_curvature: 0.0,
            he_trace: 0.0,
            ricci_agreement: 0.0,
            fd_curvature: 0.0,
        };
        for r in samples {
            let Some(m) = &r.metrics else {
                s.failed += 1;
                continue;
            };
            s.evaluated += 1;
            s.min_eigenvalue = s.min_eigenvalue.min(m.min_eigenvalue);
            s.kahler = s.kahler.max(m.kahler_closure).max(m.rank3_symmetry);
            s.max_curvature = s.max_curvature.max(m.max_curvature);
            s.wdvv = s.wdvv.max(m.wdvv);
            s.associator = s.associator.max(m.associator);
            s.commutator = s.commutator.max(m.commutator);
            s.he_trace = s.he_trace.max(m.he_trace);
            s.ricci_agreement = s.ricci_agreement.max(m.ricci_agreement);
            s.fd_curvature = s.fd_curvature.max(m.fd_curvature.unwrap_or(0.0));
            for p in &m.pencil {
                s.pencil_curvature = s.pencil_curvature.max(p.curvature);
                s.he_trace = s.he_trace.max(p.he_trace);
            }
        }
        if s.evaluated == 0 {
            s.min_eigenvalue = f64::NAN;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub element: usize,
    pub point: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSection {
    pub present: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<BTreeMap<String, bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation_free: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isometry_defect: Option<f64>,
}

impl GroupSection {
    pub fn absent() -> Self {
        Self {
            present: false,
            order: None,
            valid: None,
            checks: None,
            free: None,
            witness: None,
            translation_free: None,
            isometry_defect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub m: u32,
    pub valid: bool,
}

/// Table flags of an entry that carries no geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlFlags {
    pub kodaira_class: String,
    pub betti: String,
    pub frobenius: bool,
    pub affine_structure: bool,
    pub kahler: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfData>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub spec: String,
    pub version: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub dim: usize,
    pub potential: String,
    pub expected_class: Option<String>,
    pub samples: Vec<SampleRecord>,
    pub summary: Option<Summary>,
    pub group: GroupSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlFlags>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
    pub disclaimer: String,
}

impl Report {
    /// `None` without an expected class.
    pub fn matches_expectation(&self) -> Option<bool> {
        let class: ExpectedClass = self.expected_class.as_deref()?.parse().ok()?;
        Some(match class {
            ExpectedClass::Torus | ExpectedClass::Hyperelliptic => self.verdict == Verdict::Frobenius,
            ExpectedClass::NegativeControl => matches!(self.verdict, Verdict::NotFrobenius | Verdict::PreFrobenius),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {}", self.spec, self.verdict.as_str());
        if let Some(s) = &self.summary {
            let _ = writeln!(out, "  samples evaluated {} failed {}", s.evaluated, s.failed);
            let rows = [
                ("max |R|", s.max_curvature),
                ("WDVV", s.wdvv),
                ("associator", s.associator),
                ("commutator", s.commutator),
                ("Kähler symmetry", s.kahler),
                ("pencil curvature", s.pencil_curvature),
                ("HE trace", s.he_trace),
                ("Ricci agreement", s.ricci_agreement),
                ("FD curvature", s.fd_curvature),
                ("min eigenvalue of g", s.min_eigenvalue),
            ];
            for (label, v) in rows {
                let _ = writeln!(out, "  {label:<20} {v:.3e}");
            }
        }
        if self.group.present {
            let g = &self.group;
            let _ = writeln!(
                out,
                "  group order {} valid {} free {} translation-free {} isometry defect {:.1e}",
                g.order.unwrap_or(0),
                g.valid.unwrap_or(false),
                g.free.map_or("?".to_string(), |f| f.to_string()),
                g.translation_free.unwrap_or(false),
                g.isometry_defect.unwrap_or(f64::NAN),
            );
        }
        if let Some(c) = &self.control {
            let yn = |b: bool| if b { "yes" } else { "no" };
            let _ = writeln!(out, "  (FM) {}  (AS) {}  (K) {}", yn(c.frobenius), yn(c.affine_structure), yn(c.kahler));
        }
        for r in &self.reasons {
            let _ = writeln!(out, "  - {r}");
        }
        out
    }
}

/// Verdict and reasons from the summary and group section.
pub fn decide(summary: &Summary, group: &GroupSection, tol: &Tolerances) -> (Verdict, Vec<String>) {
    let mut reasons = Vec::new();
    if summary.failed > 0 {
        reasons.push(format!("{} of {} samples could not be evaluated", summary.failed, summary.failed + summary.evaluated));
        return (Verdict::Error, reasons);
    }
    let s = tol.structural;
    let mut check = |ok: bool, msg: String| {
        if !ok {
            reasons.push(msg);
        }
        ok
    };
    let positive = check(summary.min_eigenvalue > 0.0, format!("metric not positive definite (min eigenvalue {:.3e})", summary.min_eigenvalue));
    let kahler = check(summary.kahler <= s, format!("Kähler symmetry residual {:.3e}", summary.kahler));
    let commutative = check(summary.commutator <= s, format!("fibre algebra not commutative ({:.3e})", summary.commutator));
    let ricci = check(summary.ricci_agreement <= s, format!("Ricci contractions disagree ({:.3e})", summary.ricci_agreement));
    let fd = check(summary.fd_curvature <= tol.fd, format!("curvature disagrees with finite differences ({:.3e})", summary.fd_curvature));
    let structural = positive && kahler && commutative && ricci && fd;

    let mut group_ok = true;
    if group.present {
        group_ok &= check(group.valid == Some(true), "group axioms fail modulo the lattice".into());
        group_ok &= check(group.free == Some(true), "action not free".into());
        group_ok &= check(group.translation_free == Some(true), "action contains translations".into());
        group_ok &= check(group.isometry_defect.is_some_and(|d| d <= s), "action is not isometric for the flat metric".into());
    }

    let wdvv = check(summary.wdvv <= s, format!("WDVV residual {:.3e}", summary.wdvv));
    let he = check(summary.he_trace <= s, format!("Hermitian–Einstein trace residual {:.3e}", summary.he_trace));
    let curvature = check(summary.max_curvature <= s, format!("max |R| {:.3e}", summary.max_curvature));
    let associative = check(summary.associator <= s, format!("associator {:.3e}", summary.associator));
    let pencil = check(summary.pencil_curvature <= s, format!("pencil curvature {:.3e}", summary.pencil_curvature));

    let core = structural && group_ok && wdvv && he;
    let verdict = match (core, curvature && associative && pencil) {
        (true, true) => Verdict::Frobenius,
        (true, false) => Verdict::PreFrobenius,
        _ => Verdict::NotFrobenius,
    };
    (verdict, reasons)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorResidual {
    pub generator: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaReport {
    pub spec: String,
    pub version: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub genus: usize,
    pub level: u32,
    pub radius: u32,
    pub tau: Vec<Vec<Pair>>,
    pub samples: usize,
    pub tail_bound: f64,
    pub quasi_periodicity: Vec<GeneratorResidual>,
    pub multiplicativity: f64,
    pub level_dimension: usize,
    pub expected_dimension: usize,
    pub passed: bool,
    pub reasons: Vec<String>,
}

impl ThetaReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theta g={} s={} R={}: {}", self.genus, self.level, self.radius, if self.passed { "pass" } else { "fail" });
        for q in &self.quasi_periodicity {
            let _ = writeln!(out, "  generator {}: residual {:.3e}", q.generator, q.max_residual);
        }
        let _ = writeln!(out, "  multiplicativity {:.3e}", self.multiplicativity);
        let _ = writeln!(out, "  level dimension {} (expected {})", self.level_dimension, self.expected_dimension);
        let _ = writeln!(out, "  tail bound {:.1e}", self.tail_bound);
        for r in &self.reasons {
            let _ = writeln!(out, "  - {r}");
        }
        out
    }
}
