//! Verification pipelines behind the subcommands.

use kahler_frobenius::catalog::{
    contains_translations, hopf_affine_condition, hyperelliptic_catalog, is_free, negative_controls, unitarity_defect,
    validate_group, ExpectedClass, GroupAction, HOPF_CONTROL,
};
use kahler_frobenius::frobenius::{associator, commutator, fiber_algebra_from_metric, he_trace_matrix, hermitian_einstein_trace, pencil_sweep};
use kahler_frobenius::kahler::{fd_curvature_discrepancy, kahler_residuals, metric_from_jet, wdvv_residual_at, ChartPoint, MetricData, FD_STEP};
use kahler_frobenius::sampling::{box_points, chart_points, SampleDomain};
use kahler_frobenius::theta::{
    eval_riemann_theta, level_space_dimension, product_residual, quasi_periodicity_residual, RiemannThetaSpec, ThetaError,
};
use kahler_frobenius::wirtinger::jet_eval;
use kahler_frobenius::Complex64;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::config::{Config, FD_SAMPLES};
use crate::report::{
    decide, ControlFlags, GeneratorResidual, GroupSection, HopfData, PencilRow, Report, SampleMetrics, SampleRecord, Summary,
    ThetaReport, Verdict, Witness, DISCLAIMER, VERSION,
};
use crate::spec_file::{InputError, Manifold, Pair};

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

/// `max |T + (Ric · g⁻¹)ᵀ|` with `T` the fibre-algebra trace at `λ = 0`.
fn ricci_agreement(md: &MetricData) -> f64 {
    let n = md.dim();
    let t = he_trace_matrix(md, 0.0);
    let mut worst = 0.0f64;
    for k in 0..n {
        for a in 0..n {
            let contraction: Complex64 = (0..n).map(|b| md.ricci[(a, b)] * md.g_inv[(b, k)]).sum();
            worst = worst.max((t[(k, a)] + contraction).norm());
        }
    }
    worst
}

fn evaluate(manifold: &Manifold, point: &[Complex64], with_fd: bool, grid: &[f64]) -> Result<SampleMetrics, String> {
    let jet = jet_eval(&manifold.potential, point).map_err(|e| e.to_string())?;
    let md = metric_from_jet(&jet, &ChartPoint::new(point.to_vec())).map_err(|e| e.to_string())?;
    let residuals = kahler_residuals(&md, &jet);
    let (holo, _) = fiber_algebra_from_metric(&md);
    let fd_curvature = if with_fd {
        Some(fd_curvature_discrepancy(&manifold.potential, &md, FD_STEP).map_err(|e| format!("finite differences: {e}"))?)
    } else {
        None
    };
    let pencil = pencil_sweep(&md, grid)
        .into_iter()
        .map(|s| PencilRow { lambda: s.lambda, curvature: s.curvature_norm, he_trace: s.trace_norm })
        .collect();
    Ok(SampleMetrics {
        min_eigenvalue: md.min_eigenvalue,
        condition_number: md.condition_number(),
        kahler_closure: residuals.closure,
        rank3_symmetry: residuals.rank3_symmetry,
        max_curvature: md.max_curvature(),
        wdvv: wdvv_residual_at(&md),
        associator: associator(&holo),
        commutator: commutator(&holo),
        he_trace: hermitian_einstein_trace(&md, 0.0),
        ricci_agreement: ricci_agreement(&md),
        fd_curvature,
        pencil,
    })
}

fn group_section(action: &GroupAction) -> GroupSection {
    let report = validate_group(action);
    let checks = BTreeMap::from([
        ("closure".to_string(), report.closure),
        ("faithful".to_string(), report.faithful),
        ("finite".to_string(), report.finite),
        ("identity".to_string(), report.identity),
        ("inverses".to_string(), report.inverses),
        ("lattice_stable".to_string(), report.lattice_stable),
    ]);
    // fixed points only make sense for maps that descend to the torus
    let freeness = if report.lattice_stable { is_free(action).ok() } else { None };
    GroupSection {
        present: true,
        order: Some(action.order()),
        valid: Some(report.is_valid()),
        checks: Some(checks),
        free: freeness.as_ref().map(|f| f.free),
        witness: freeness
            .and_then(|f| f.witness)
            .map(|w| Witness { element: w.element, point: w.point.into_iter().map(pair).collect() }),
        translation_free: Some(!contains_translations(action)),
        isometry_defect: Some(unitarity_defect(action)),
    }
}

/// Samples, group checks and verdict for one manifold.
pub fn run_verify(manifold: &Manifold, config: &Config) -> Report {
    let points = box_points(&manifold.domain_re, &manifold.domain_im, config.samples, config.seed);
    let samples: Vec<SampleRecord> = points
        .into_par_iter()
        .enumerate()
        .map(|(index, point)| {
            let result = evaluate(manifold, &point, index < FD_SAMPLES, &config.lambda_grid);
            let point = point.into_iter().map(pair).collect();
            match result {
                Ok(m) => SampleRecord { index, point, error: None, metrics: Some(m) },
                Err(e) => SampleRecord { index, point, error: Some(e), metrics: None },
            }
        })
        .collect();
    let summary = Summary::of(&samples);
    let group = manifold.action.as_ref().map_or_else(GroupSection::absent, group_section);
    let (verdict, mut reasons) = decide(&summary, &group, &config.tolerances);
    if verdict == Verdict::Error {
        for s in samples.iter().filter(|s| s.error.is_some()).take(5) {
            reasons.push(format!("sample {}: {}", s.index, s.error.as_deref().unwrap_or_default()));
        }
    }
    Report {
        spec: manifold.name.clone(),
        version: VERSION.to_string(),
        seed: config.seed,
        tolerances: config.tolerances.to_map(),
        dim: manifold.dim,
        potential: manifold.source.clone(),
        expected_class: manifold.expected_class.map(|c| c.as_str().to_string()),
        samples,
        summary: Some(summary),
        group,
        control: None,
        verdict,
        reasons,
        disclaimer: DISCLAIMER.to_string(),
    }
}

fn control_reports(config: &Config) -> Vec<Report> {
    negative_controls()
        .into_iter()
        .map(|row| {
            let hopf = row.name.starts_with("hopf").then(|| {
                let (a, b, c, m) = HOPF_CONTROL;
                let v = hopf_affine_condition(Complex64::new(a, 0.0), Complex64::new(b, 0.0), Complex64::new(c, 0.0), m);
                (HopfData { a, b, c, m, valid: v.valid }, v)
            });
            let affine = hopf.as_ref().map_or(row.affine_structure, |(_, v)| v.affine);
            let kahler = hopf.as_ref().map_or(row.kahler, |(_, v)| v.kahler);
            let frobenius = hopf.as_ref().map_or(row.frobenius, |(_, v)| v.frobenius);
            let mut reasons = vec!["table entry without chart data: no Frobenius structure".to_string()];
            if !kahler {
                reasons.push("admits no Kähler metric".into());
            }
            if !affine {
                reasons.push("admits no holomorphic affine structure".into());
            }
            Report {
                spec: row.name.to_string(),
                version: VERSION.to_string(),
                seed: config.seed,
                tolerances: config.tolerances.to_map(),
                dim: 2,
                potential: String::new(),
                expected_class: Some(ExpectedClass::NegativeControl.as_str().to_string()),
                samples: Vec::new(),
                summary: None,
                group: GroupSection::absent(),
                control: Some(ControlFlags {
                    kodaira_class: row.kodaira_class.to_string(),
                    betti: row.betti.to_string(),
                    frobenius,
                    affine_structure: affine,
                    kahler,
                    hopf: hopf.map(|(d, _)| d),
                }),
                verdict: if frobenius { Verdict::Frobenius } else { Verdict::NotFrobenius },
                reasons,
                disclaimer: DISCLAIMER.to_string(),
            }
        })
        .collect()
}

/// The eight surfaces without a filter; with one, every surface or
/// negative control whose name contains it.
pub fn run_catalog(filter: Option<&str>, config: &Config) -> Result<Vec<Report>, InputError> {
    let entries = hyperelliptic_catalog();
    let keep = |name: &str| filter.is_none_or(|f| name.contains(f));
    let manifolds: Vec<Manifold> = entries.iter().filter(|e| keep(&e.name)).map(Manifold::from_entry).collect();
    let mut reports: Vec<Report> = manifolds.par_iter().map(|m| run_verify(m, config)).collect();
    if filter.is_some() {
        reports.extend(control_reports(config).into_iter().filter(|r| keep(&r.spec)));
    }
    if reports.is_empty() {
        return Err(InputError::Invalid(format!("no catalog entry matches {:?}", filter.unwrap_or_default())));
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaParams {
    pub tau: DMatrix<Complex64>,
    pub level: u32,
}

impl Default for ThetaParams {
    fn default() -> Self {
        Self { tau: DMatrix::from_element(1, 1, Complex64::i()), level: 2 }
    }
}

/// Quasi-periodicity on every generator, the product law for two
/// characteristics, and the level-`s` dimension.
pub fn run_theta(params: &ThetaParams, config: &Config) -> Result<ThetaReport, ThetaError> {
    let g = params.tau.nrows();
    let s = params.level;
    let plain = RiemannThetaSpec::plain(params.tau.clone())?;
    let shifted = RiemannThetaSpec::new(params.tau.clone(), vec![0.5; g], vec![0.0; g], 1)?;
    let radius = config.radius;
    let points = chart_points(g, SampleDomain { re: (-1.0, 1.0), im: (-0.5, 0.5) }, config.samples, config.seed);

    let per_point: Vec<(Vec<f64>, f64, f64)> = points
        .par_iter()
        .map(|z| {
            let mut laws = Vec::with_capacity(2 * g);
            let mut product = 0.0f64;
            for k in 0..2 * g {
                laws.push(quasi_periodicity_residual(&plain, z, k, radius)?);
                let mut l = vec![0; 2 * g];
                l[k] = 1;
                product = product.max(product_residual(&plain, &shifted, z, &l, radius)?);
            }
            let tail = eval_riemann_theta(&plain, z, radius)?.tail_bound;
            Ok((laws, product, tail))
        })
        .collect::<Result<_, ThetaError>>()?;
    let quasi_periodicity = (0..2 * g)
        .map(|k| GeneratorResidual { generator: k, max_residual: per_point.iter().map(|p| p.0[k]).fold(0.0, f64::max) })
        .collect::<Vec<_>>();
    let multiplicativity = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
    let tail_bound = per_point.iter().map(|p| p.2).fold(0.0, f64::max);

    let expected_dimension = (s as usize).pow(g as u32);
    let samples = config.samples.max(4 * expected_dimension);
    let level_dimension = level_space_dimension(g, s, &params.tau, samples, config.seed)?;

    let tol = config.tolerances.theta;
    let mut reasons = Vec::new();
    for q in &quasi_periodicity {
        if !(q.max_residual < tol) {
            reasons.push(format!("generator {} residual {:.3e}", q.generator, q.max_residual));
        }
    }
    // one order looser for products of two truncated series
    if !(multiplicativity < 10.0 * tol) {
        reasons.push(format!("product law residual {multiplicativity:.3e}"));
    }
    if level_dimension != expected_dimension {
        reasons.push(format!("level dimension {level_dimension}, expected {expected_dimension}"));
    }
    Ok(ThetaReport {
        spec: "theta".to_string(),
        version: VERSION.to_string(),
        seed: config.seed,
        tolerances: config.tolerances.to_map(),
        genus: g,
        level: s,
        radius,
        tau: (0..g).map(|i| (0..g).map(|j| pair(params.tau[(i, j)])).collect()).collect(),
        samples: config.samples,
        tail_bound,
        quasi_periodicity,
        multiplicativity,
        level_dimension,
        expected_dimension,
        passed: reasons.is_empty(),
        reasons,
    })
}
