//! Theta series against a direct double loop, and the automorphy laws with
//! factors written out by hand.

use kahler_frobenius::theta::{
    eval_riemann_theta, level_space_dimension, multiply_types, product_residual, quasi_periodicity_residual,
    riemann_type_of, RiemannThetaSpec, ThetaError, ThetaType, DEFAULT_RADIUS,
};
use kahler_frobenius::sampling::{chart_points, SampleDomain};
use kahler_frobenius::Complex64;
use nalgebra::DMatrix;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tau1() -> DMatrix<Complex64> {
    DMatrix::from_element(1, 1, c(0.0, 1.0))
}

fn tau2() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)])
}

fn tau2_coupled() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(0.1, 1.0), c(0.2, 0.3), c(0.2, 0.3), c(-0.3, 1.2)])
}

/// Plain loop over `n ∈ [-50, 50]^g`, genus 1 or 2.
fn direct(tau: &DMatrix<Complex64>, alpha: &[f64], beta: &[f64], z: &[Complex64]) -> Complex64 {
    let g = z.len();
    let i = Complex64::i();
    let term = |m: &[f64]| {
        let mut q = c(0.0, 0.0);
        let mut l = c(0.0, 0.0);
        for a in 0..g {
            for b in 0..g {
                q += tau[(a, b)] * m[a] * m[b];
            }
            l += (z[a] + beta[a]) * m[a];
        }
        (PI * i * q + 2.0 * PI * i * l).exp()
    };
    let mut total = c(0.0, 0.0);
    for n1 in -50..=50 {
        if g == 1 {
            total += term(&[n1 as f64 + alpha[0]]);
        } else {
            for n2 in -50..=50 {
                total += term(&[n1 as f64 + alpha[0], n2 as f64 + alpha[1]]);
            }
        }
    }
    total
}

fn specs() -> Vec<RiemannThetaSpec> {
    vec![
        RiemannThetaSpec::plain(tau1()).unwrap(),
        RiemannThetaSpec::new(tau1(), vec![0.5], vec![0.5], 1).unwrap(),
        RiemannThetaSpec::new(tau1(), vec![1.0 / 3.0], vec![0.0], 3).unwrap(),
        RiemannThetaSpec::plain(tau2()).unwrap(),
        RiemannThetaSpec::new(tau2(), vec![0.5, 0.0], vec![0.0, 0.5], 2).unwrap(),
        RiemannThetaSpec::new(tau2_coupled(), vec![0.25, 0.5], vec![0.5, 0.0], 4).unwrap(),
    ]
}

fn points(g: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    chart_points(g, SampleDomain { re: (-1.0, 1.0), im: (-0.5, 0.5) }, count, seed)
}

#[test]
fn series_matches_direct_summation() {
    let v = eval_riemann_theta(&RiemannThetaSpec::plain(tau1()).unwrap(), &[c(0.5, 0.0)], DEFAULT_RADIUS).unwrap();
    let oracle = direct(&tau1(), &[0.0], &[0.0], &[c(0.5, 0.0)]);
    assert!((v.value - oracle).norm() < 1e-14 * oracle.norm());
    assert!(v.tail_bound < 1e-100);
    for s in specs() {
        let g = s.genus();
        for z in points(g, 5, 3) {
            let ours = eval_riemann_theta(&s, &z, DEFAULT_RADIUS).unwrap();
            let oracle = direct(s.tau(), s.alpha(), s.beta(), &z);
            assert!((ours.value - oracle).norm() < 1e-12 * ours.abs_sum, "{z:?}");
        }
    }
}

#[test]
fn evenness_and_the_odd_zero() {
    let s = RiemannThetaSpec::plain(tau1()).unwrap();
    for z in points(1, 20, 17) {
        let a = eval_riemann_theta(&s, &z, DEFAULT_RADIUS).unwrap().value;
        let b = eval_riemann_theta(&s, &[-z[0]], DEFAULT_RADIUS).unwrap().value;
        assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
    }
    let zero = [c(0.5, 0.5)];
    assert!(eval_riemann_theta(&s, &zero, DEFAULT_RADIUS).unwrap().value.norm() < 1e-10);
    assert!(direct(&tau1(), &[0.0], &[0.0], &zero).norm() < 1e-10);
    // the floor keeps the law finite at the zero
    for k in 0..2 {
        assert!(quasi_periodicity_residual(&s, &zero, k, DEFAULT_RADIUS).unwrap() < 1e-8);
    }
}

#[test]
fn laws_hold_against_hand_written_factors() {
    // θ(z + 1) = θ(z), θ(z + τ) = e^{-πiτ - 2πiz} θ(z)
    let i = Complex64::i();
    for z in points(1, 20, 5) {
        let h = direct(&tau1(), &[0.0], &[0.0], &z);
        let h1 = direct(&tau1(), &[0.0], &[0.0], &[z[0] + 1.0]);
        let ht = direct(&tau1(), &[0.0], &[0.0], &[z[0] + i]);
        assert!((h1 - h).norm() < 1e-10 * h.norm());
        let factor = (-PI * i * i - 2.0 * PI * i * z[0]).exp();
        assert!((ht - factor * h).norm() < 1e-10 * (factor * h).norm());
    }
}

#[test]
fn quasi_periodicity_for_every_generator() {
    for s in specs() {
        let g = s.genus();
        for z in points(g, 20, 29) {
            for k in 0..2 * g {
                let r = quasi_periodicity_residual(&s, &z, k, DEFAULT_RADIUS).unwrap();
                assert!(r < 1e-8, "generator {k} at {z:?}: {r:e}");
            }
        }
    }
}

#[test]
fn larger_radius_never_worse() {
    for s in specs() {
        let g = s.genus();
        for z in points(g, 10, 31) {
            for k in 0..2 * g {
                let r20 = quasi_periodicity_residual(&s, &z, k, 20).unwrap();
                let r40 = quasi_periodicity_residual(&s, &z, k, 40).unwrap();
                assert!(r40 <= r20 + 1e-12);
            }
        }
    }
}

#[test]
fn products_follow_product_types() {
    let pairs = [
        (RiemannThetaSpec::plain(tau1()).unwrap(), RiemannThetaSpec::new(tau1(), vec![0.5], vec![0.0], 1).unwrap()),
        (RiemannThetaSpec::new(tau2(), vec![0.0, 0.5], vec![0.5, 0.0], 1).unwrap(), RiemannThetaSpec::plain(tau2()).unwrap()),
    ];
    for (s1, s2) in pairs {
        let g = s1.genus();
        for z in points(g, 10, 37) {
            for k in 0..2 * g {
                let mut l = vec![0; 2 * g];
                l[k] = 1;
                assert!(product_residual(&s1, &s2, &z, &l, DEFAULT_RADIUS).unwrap() < 1e-7);
            }
            let mixed: Vec<i64> = (0..2 * g as i64).map(|k| k % 3 - 1).collect();
            assert!(product_residual(&s1, &s2, &z, &mixed, DEFAULT_RADIUS).unwrap() < 1e-7);
        }
    }
}

#[test]
fn type_group_structure() {
    let s = specs();
    let (a, b, d) = (riemann_type_of(&s[0]), riemann_type_of(&s[1]), riemann_type_of(&s[2]));
    let ab = multiply_types(&a, &b).unwrap();
    assert_eq!(ab, multiply_types(&b, &a).unwrap());
    let left = multiply_types(&ab, &d).unwrap();
    let right = multiply_types(&a, &multiply_types(&b, &d).unwrap()).unwrap();
    assert_eq!(left, right);
    let trivial = ThetaType::trivial(a.lattice().clone());
    assert_eq!(multiply_types(&a, &trivial).unwrap(), a);
    // sums of rows and constants, entry by entry
    for j in 0..2 {
        assert_eq!(ab.constants()[j], a.constants()[j] + b.constants()[j]);
        assert_eq!(ab.rows()[j][0], a.rows()[j][0] + b.rows()[j][0]);
    }
    let other = riemann_type_of(&s[3]);
    assert!(matches!(multiply_types(&a, &other), Err(ThetaError::LatticeMismatch)));
}

#[test]
fn level_dimensions_are_s_to_the_g() {
    for (g, s, tau) in [(1, 2, tau1()), (1, 3, tau1()), (2, 2, tau2()), (1, 4, tau1())] {
        let samples = 4 * (s as usize).pow(g as u32) * 2;
        assert_eq!(level_space_dimension(g, s, &tau, samples, 7).unwrap(), (s as usize).pow(g as u32));
    }
    assert!(matches!(level_space_dimension(1, 2, &tau1(), 3, 7), Err(ThetaError::TooFewSamples { .. })));
    assert!(matches!(level_space_dimension(3, 2, &tau1(), 64, 7), Err(ThetaError::OutOfRange { .. })));
    let flat = DMatrix::from_element(1, 1, c(1.0, 0.0));
    assert!(matches!(level_space_dimension(1, 2, &flat, 64, 7), Err(ThetaError::NotSiegel)));
}
