//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::process::Command;
use std::time::Instant;

use frobenius_verify::{run_catalog, Config, Report, Verdict};
use kahler_frobenius::catalog::{
    classification_counts, contains_translations, find_entry, hopf_affine_condition, hyperelliptic_catalog, is_free,
    isometry_check, validate_group, AffineMap, CatalogEntry, ClassificationCounts, GroupAction, Lattice, HOPF_CONTROL,
};
use kahler_frobenius::expr::{parse, PotentialExpr};
use kahler_frobenius::frobenius::{
    associator, fiber_algebra_from_metric, he_trace_matrix, hermitian_einstein_trace, pencil_form, pencil_sweep, DEFAULT_LAMBDA_GRID,
};
use kahler_frobenius::kahler::{kahler_residuals, metric_from_jet, wdvv_residual_at, ChartPoint, MetricData};
use kahler_frobenius::sampling::{chart_points, SampleDomain};
use kahler_frobenius::tensor::Tensor4;
use kahler_frobenius::theta::{
    level_space_dimension, product_residual, quasi_periodicity_residual, RiemannThetaSpec, DEFAULT_RADIUS,
};
use kahler_frobenius::wirtinger::jet_eval;
use kahler_frobenius::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;
const SAMPLES: usize = 64;
const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(where, max|R|, WDVV, associator)` for every point any criterion samples.
#[derive(Default)]
struct Probe(Vec<(String, f64, f64, f64)>);

impl Probe {
    fn record(&mut self, source: &str, md: &MetricData) {
        let (holo, _) = fiber_algebra_from_metric(md);
        self.0.push((source.to_string(), md.max_curvature(), wdvv_residual_at(md), associator(&holo)));
    }

    fn record_report(&mut self, r: &Report) {
        for s in &r.samples {
            if let Some(m) = &s.metrics {
                self.0.push((r.spec.clone(), m.max_curvature, m.wdvv, m.associator));
            }
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn metric(expr: &PotentialExpr, p: &[Complex64]) -> (MetricData, f64) {
    let jet = jet_eval(expr, p).unwrap();
    let md = metric_from_jet(&jet, &ChartPoint::new(p.to_vec())).unwrap();
    let k = kahler_residuals(&md, &jet).max();
    (md, k)
}

/// The flat-case checks at 64 seeded samples; returns the worst residual.
fn flat_suite(entry: &CatalogEntry, probe: &mut Probe) -> f64 {
    let mut worst = 0.0f64;
    for p in chart_points(entry.dim, SampleDomain::default(), SAMPLES, SEED) {
        let (md, kahler) = metric(&entry.potential, &p);
        probe.record(&entry.name, &md);
        let (holo, _) = fiber_algebra_from_metric(&md);
        let mut values = vec![md.max_curvature(), wdvv_residual_at(&md), kahler, associator(&holo), hermitian_einstein_trace(&md, 0.0)];
        for s in pencil_sweep(&md, &DEFAULT_LAMBDA_GRID) {
            values.push(s.curvature_norm);
            values.push(s.trace_norm);
        }
        worst = values.into_iter().fold(worst, f64::max);
    }
    worst
}

fn criterion_1(probe: &mut Probe) -> Outcome {
    let start = Instant::now();
    let worst = (1..=3).map(|n| flat_suite(&find_entry(&torus_name(n)).unwrap(), probe)).fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    outcome(worst < TOL && elapsed < 10.0, format!("tori n=1..3, 64 samples: worst residual {worst:.1e}, {elapsed:.2} s"))
}

fn torus_name(n: usize) -> String {
    if n == 2 { "complex-torus".into() } else { format!("complex-torus-{n}") }
}

fn criterion_2(probe: &mut Probe) -> Outcome {
    let cat = hyperelliptic_catalog();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for e in &cat {
        if let Some(a) = &e.action {
            let ok = validate_group(a).is_valid()
                && is_free(a).map(|f| f.free).unwrap_or(false)
                && !contains_translations(a)
                && isometry_check(e) < 1e-12;
            if !ok {
                failures.push(e.name.clone());
            }
        }
        worst = worst.max(flat_suite(e, probe));
    }
    let pass = cat.len() == 8 && failures.is_empty() && worst < TOL;
    outcome(pass, format!("{} entries, group failures {failures:?}, worst flat residual {worst:.1e}", cat.len()))
}

fn criterion_3() -> Outcome {
    let counts = classification_counts();
    let pass = counts == ClassificationCounts { surfaces: 8, threefolds: 174 } && counts.surfaces == hyperelliptic_catalog().len();
    outcome(pass, format!("surfaces {} (derived from the catalog), threefolds {} (stored metadata)", counts.surfaces, counts.threefolds))
}

fn criterion_4(probe: &mut Probe) -> Outcome {
    let fs = parse("log(1 + z1*zbar1 + z2*zbar2)", 2).unwrap();
    let (mut wdvv, mut curv) = (0.0f64, 0.0f64);
    for p in chart_points(2, SampleDomain::default(), SAMPLES, SEED) {
        let (md, _) = metric(&fs, &p);
        probe.record("fubini-study", &md);
        wdvv = wdvv.max(wdvv_residual_at(&md));
        curv = curv.max(md.max_curvature());
    }
    let sensitive = wdvv > 1e-2 && curv > 1e-2;

    let (a, b, cc, m) = HOPF_CONTROL;
    let row = hopf_affine_condition(c(a, 0.0), c(b, 0.0), c(cc, 0.0), m);
    let mut hopf = row.valid && row.affine && !row.frobenius && !row.kahler;
    // (AS) iff c(m - 1) = 0 across valid contractions
    for (a, b, cc, m) in [(0.5, 0.5, 0.0, 3), (0.5, 0.5, 1.0, 1), (0.36, 0.6, 1.0, 2), (0.125, 0.5, 2.0, 3), (0.2, 0.7, 0.0, 1)] {
        let v = hopf_affine_condition(c(a, 0.0), c(b, 0.0), c(cc, 0.0), m);
        hopf &= v.valid && v.affine == (cc * (m as f64 - 1.0) == 0.0) && !v.frobenius && !v.kahler;
    }

    let lattice = Lattice::gaussian(1);
    let minus = AffineMap::diagonal(&[c(-1.0, 0.0)], vec![c(0.0, 0.0)]).unwrap();
    let action = GroupAction::new("Z2-rotation", lattice.clone(), vec![AffineMap::identity(1), minus]).unwrap();
    let freeness = is_free(&action).unwrap();
    let witness_ok = freeness.witness.as_ref().is_some_and(|w| {
        let moved = action.elements[w.element].apply(&w.point);
        lattice.contains(&[moved[0] - w.point[0]])
    });
    let reflection = !freeness.free && witness_ok;
    outcome(
        sensitive && hopf && reflection,
        format!("Fubini-Study WDVV {wdvv:.3}, max|R| {curv:.3}; Hopf rows {hopf}; rotation witness {:?}", freeness.witness.map(|w| w.point)),
    )
}

/// `ops[k] = (coordinate, antiholomorphic?)` applied by nested central
/// differences of the potential's values; no jets involved.
fn nested_fd(f: &dyn Fn(&[Complex64]) -> Complex64, p: &[Complex64], ops: &[(usize, bool)], h: f64) -> Complex64 {
    let Some((&(a, anti), rest)) = ops.split_first() else {
        return f(p);
    };
    let at = |d: Complex64| {
        let mut q = p.to_vec();
        q[a] += d;
        nested_fd(f, &q, rest, h)
    };
    let dx = (at(c(h, 0.0)) - at(c(-h, 0.0))) / (2.0 * h);
    let dy = (at(c(0.0, h)) - at(c(0.0, -h))) / (2.0 * h);
    if anti { (dx + Complex64::i() * dy) / 2.0 } else { (dx - Complex64::i() * dy) / 2.0 }
}

fn fd(f: &dyn Fn(&[Complex64]) -> Complex64, p: &[Complex64], ops: &[(usize, bool)]) -> Complex64 {
    let h = 0.08;
    let d = [h, h / 2.0, h / 4.0].map(|s| nested_fd(f, p, ops, s));
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// `R_{a bbar c dbar} = Φ_{a bbar c dbar} - Σ Φ_{a c γbar} g^{γbar e} Φ_{e bbar dbar}`.
fn fd_curvature(expr: &PotentialExpr, p: &[Complex64]) -> Vec<Complex64> {
    let n = expr.dim();
    let f = |q: &[Complex64]| expr.eval_point(q).unwrap();
    let h = |a| (a, false);
    let hb = |a| (a, true);
    let g = DMatrix::from_fn(n, n, |a, b| fd(&f, p, &[h(a), hb(b)]));
    let g_inv = g.try_inverse().unwrap();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let fourth = fd(&f, p, &[h(a), hb(b), h(cc), hb(d)]);
                    let mut gradient = c(0.0, 0.0);
                    for gamma in 0..n {
                        for e in 0..n {
                            gradient += fd(&f, p, &[h(a), h(cc), hb(gamma)]) * g_inv[(gamma, e)] * fd(&f, p, &[h(e), hb(b), hb(d)]);
                        }
                    }
                    out.push(fourth - gradient);
                }
            }
        }
    }
    out
}

/// Flat part plus four random real quartic-or-lower terms, kept positive on
/// the sampling box.
fn random_potentials(count: usize, seed: u64) -> Vec<PotentialExpr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = chart_points(2, SampleDomain::default(), 16, seed);
    let mut out = Vec::new();
    while out.len() < count {
        let mut text = String::from("z1*zbar1 + z2*zbar2");
        for _ in 0..4 {
            let (alpha, beta) = loop {
                let e: [u32; 4] = std::array::from_fn(|_| rng.random_range(0..3));
                let (ha, hb) = (e[0] + e[1], e[2] + e[3]);
                if ha >= 1 && hb >= 1 && ha + hb >= 3 && ha + hb <= 4 {
                    break ([e[0], e[1]], [e[2], e[3]]);
                }
            };
            let coef: f64 = rng.random_range(-0.3..0.3);
            let mono = |x: [u32; 2], y: [u32; 2]| format!("z1^{}*z2^{}*zbar1^{}*zbar2^{}", x[0], x[1], y[0], y[1]);
            text += &format!(" + {coef:.4}*({} + {})", mono(alpha, beta), mono(beta, alpha));
        }
        let expr = parse(&text, 2).unwrap();
        let positive = domain.iter().all(|p| metric(&expr, p).0.min_eigenvalue > 0.1);
        if positive {
            out.push(expr);
        }
    }
    out
}

fn criterion_5(probe: &mut Probe) -> Outcome {
    let mut worst = 0.0f64;
    let mut entries = 0;
    for (k, expr) in random_potentials(5, SEED).iter().enumerate() {
        for p in chart_points(2, SampleDomain::default(), 20, SEED + k as u64) {
            let (md, _) = metric(expr, &p);
            probe.record("random-polynomial", &md);
            for (ad, fd) in md.curvature.as_slice().iter().zip(fd_curvature(expr, &p)) {
                worst = worst.max((ad - fd).norm() / ad.norm().max(1.0));
                entries += 1;
            }
        }
    }
    outcome(worst < 1e-4, format!("5 random polynomials x 20 samples, {entries} entries: worst relative gap {worst:.1e}"))
}

fn criterion_6(probe: &Probe) -> Outcome {
    let flat: Vec<_> = probe.0.iter().filter(|r| r.1 < TOL).collect();
    let counter: Vec<_> = flat.iter().filter(|r| !(r.2 < TOL && r.3 < TOL)).collect();
    let curved = probe.0.len() - flat.len();
    let pass = counter.is_empty() && !flat.is_empty() && curved > 0;
    let first = counter.first().map(|r| r.0.clone());
    outcome(pass, format!("{} points ({} flat, {curved} curved), counterexamples {} {first:?}", probe.0.len(), flat.len(), counter.len()))
}

fn criterion_7(probe: &mut Probe) -> Outcome {
    let quadratic = |f1: &Tensor4, f2: &Tensor4, f3: &Tensor4| f1.axpy(c(-3.0, 0.0), f2).axpy(c(3.0, 0.0), f3);
    let mut worst = 0.0f64;
    for (k, expr) in random_potentials(3, SEED + 100).iter().enumerate() {
        for p in chart_points(2, SampleDomain::default(), 8, SEED + k as u64) {
            let (md, _) = metric(expr, &p);
            probe.record("random-polynomial", &md);
            let f: Vec<_> = [1.0, 2.0, 3.0, 4.0].iter().map(|&l| pencil_form(&md, l)).collect();
            worst = worst.max(quadratic(&f[0].holo, &f[1].holo, &f[2].holo).max_abs_diff(&f[3].holo));
            worst = worst.max(quadratic(&f[0].mixed, &f[1].mixed, &f[2].mixed).max_abs_diff(&f[3].mixed));
        }
    }
    outcome(worst < 1e-8, format!("3 random potentials: worst prediction error at λ=4 {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let tau1 = DMatrix::from_element(1, 1, Complex64::i());
    let tau2 = DMatrix::from_row_slice(2, 2, &[Complex64::i(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]);
    let (mut quasi, mut product) = (0.0f64, 0.0f64);
    for tau in [&tau1, &tau2] {
        let g = tau.nrows();
        let plain = RiemannThetaSpec::plain(tau.clone()).unwrap();
        let other = RiemannThetaSpec::new(tau.clone(), vec![0.5; g], vec![0.5; g], 1).unwrap();
        for z in chart_points(g, SampleDomain { re: (-1.0, 1.0), im: (-0.5, 0.5) }, 20, SEED) {
            for k in 0..2 * g {
                quasi = quasi.max(quasi_periodicity_residual(&plain, &z, k, DEFAULT_RADIUS).unwrap());
                let mut l = vec![0; 2 * g];
                l[k] = 1;
                product = product.max(product_residual(&plain, &other, &z, &l, DEFAULT_RADIUS).unwrap());
            }
        }
    }
    let dims: Vec<(usize, u32, usize)> = [(1, 2, &tau1), (1, 3, &tau1), (2, 2, &tau2)]
        .iter()
        .map(|&(g, s, tau)| (g, s, level_space_dimension(g, s, tau, 8 * (s as usize).pow(g as u32), SEED).unwrap_or(0)))
        .collect();
    let dims_ok = dims.iter().all(|&(g, s, d)| d == (s as usize).pow(g as u32));
    let elapsed = start.elapsed().as_secs_f64();
    let pass = quasi < 1e-8 && product < 1e-7 && dims_ok && elapsed < 30.0;
    outcome(pass, format!("quasi-periodicity {quasi:.1e}, product {product:.1e}, dimensions {dims:?}, {elapsed:.2} s"))
}

fn criterion_9(probe: &mut Probe) -> Outcome {
    let mut trace = 0.0f64;
    let mut flat_entries: Vec<CatalogEntry> = hyperelliptic_catalog();
    flat_entries.extend([find_entry("complex-torus-1").unwrap(), find_entry("complex-torus-3").unwrap()]);
    for e in &flat_entries {
        for p in chart_points(e.dim, SampleDomain::default(), SAMPLES, SEED) {
            let (md, _) = metric(&e.potential, &p);
            for s in pencil_sweep(&md, &DEFAULT_LAMBDA_GRID) {
                trace = trace.max(s.trace_norm);
            }
        }
    }
    // both contractions on curved metrics, where they are not trivially zero
    let mut curved = random_potentials(2, SEED + 200);
    curved.push(parse("log(1 + z1*zbar1 + z2*zbar2)", 2).unwrap());
    let mut ricci = 0.0f64;
    let mut largest = 0.0f64;
    for expr in &curved {
        for p in chart_points(2, SampleDomain::default(), 20, SEED) {
            let (md, _) = metric(expr, &p);
            probe.record("ricci-probe", &md);
            let t = he_trace_matrix(&md, 0.0);
            for k in 0..2 {
                for a in 0..2 {
                    let contraction: Complex64 = (0..2).map(|b| md.ricci[(a, b)] * md.g_inv[(b, k)]).sum();
                    ricci = ricci.max((t[(k, a)] + contraction).norm());
                    largest = largest.max(contraction.norm());
                }
            }
        }
    }
    let pass = trace < TOL && ricci < TOL && largest > 1e-2;
    outcome(pass, format!("flat trace residual {trace:.1e} over {} entries; Ricci contractions differ by {ricci:.1e} (entries up to {largest:.2})", flat_entries.len()))
}

fn criterion_10(probe: &mut Probe) -> Outcome {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_frobenius-verify"))
            .env_remove("FROBENIUS_VERIFY_SEED")
            .args(["catalog", "--seed", seed])
            .output()
            .expect("binary runs")
    };
    let (a, b, other) = (run("11"), run("11"), run("12"));
    let identical = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    let seed_matters = a.stdout != other.stdout;
    let config = Config { seed: 11, ..Config::default() };
    let lib = run_catalog(None, &config).unwrap();
    let in_process = serde_json::to_string_pretty(&lib).unwrap() + "\n";
    let same_as_binary = in_process.as_bytes() == a.stdout.as_slice();
    let all_frobenius = lib.len() == 8 && lib.iter().all(|r| r.verdict == Verdict::Frobenius);
    for r in &lib {
        probe.record_report(r);
    }
    outcome(
        identical && seed_matters && same_as_binary && all_frobenius,
        format!("{} bytes, identical {identical}, library output equal {same_as_binary}, seed changes output {seed_matters}", a.stdout.len()),
    )
}

fn main() {
    let mut probe = Probe::default();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "flat case end to end", criterion_1(&mut probe)),
        (2, "eight surfaces", criterion_2(&mut probe)),
        (3, "threefold count metadata", criterion_3()),
        (4, "negative controls", criterion_4(&mut probe)),
        (5, "curvature oracle", criterion_5(&mut probe)),
        (7, "pencil polynomiality", criterion_7(&mut probe)),
        (8, "theta suite", criterion_8()),
        (9, "Hermitian-Einstein", criterion_9(&mut probe)),
        (10, "determinism", criterion_10(&mut probe)),
    ];
    results.push((6, "equivalence probe", criterion_6(&probe)));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
