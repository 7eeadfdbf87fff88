//! Spin-pointer measurement model.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use qetlab::superposition::{apply_controlled_rotation, pointer_measure, PointerModel};
use qetlab::C64;

fn model(n: usize, theta: f64) -> PointerModel {
    PointerModel::new(n, theta, C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap()
}

/// `⟨M₊|M₋⟩` from dense device vectors built spin by spin.
fn dense_overlap(n: usize, theta: f64) -> f64 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut plus = vec![1.0f64];
    let mut minus = vec![1.0f64];
    for _ in 0..n {
        plus = plus.iter().flat_map(|&a| [a * c, a * s]).collect();
        minus = minus.iter().flat_map(|&a| [a * c, -a * s]).collect();
    }
    plus.iter().zip(&minus).map(|(a, b)| a * b).sum::<f64>().abs()
}

#[test]
fn overlap_matches_dense_construction() {
    for theta in [0.1, 0.451, 1.2, FRAC_PI_2, 2.5] {
        for n in [1, 3, 8, 12] {
            let out = pointer_measure(&model(n, theta));
            assert!((out.branch_overlap - dense_overlap(n, theta)).abs() < 1e-12);
            assert!((out.branch_overlap - out.closed_form).abs() < 1e-12);
        }
    }
}

#[test]
fn controlled_rotation_is_unitary_and_linear() {
    let n = 6;
    let dim = 2 << n;
    for (i, theta) in [0.3, 0.451, FRAC_PI_2].into_iter().enumerate() {
        // A generic input, not only qubit ⊗ |0…0⟩.
        let raw: Vec<C64> = (0..dim)
            .map(|k| C64::new(((k * 7 + i) as f64).sin(), ((k * 3 + 1) as f64).cos()))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let x: Vec<C64> = raw.iter().map(|z| z / norm).collect();
        let y: Vec<C64> = (0..dim).map(|k| C64::new(0.0, (k as f64 * 0.1).cos()) / (dim as f64).sqrt()).collect();
        let ux = apply_controlled_rotation(theta, n, &x).unwrap();
        let uy = apply_controlled_rotation(theta, n, &y).unwrap();
        let (a, b) = (C64::new(0.3, -0.2), C64::new(-1.1, 0.4));
        let combo: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let uc = apply_controlled_rotation(theta, n, &combo).unwrap();
        for k in 0..dim {
            assert!((uc[k] - (a * ux[k] + b * uy[k])).norm() < 1e-12);
        }
        let nx: f64 = ux.iter().map(|z| z.norm_sqr()).sum();
        assert!((nx - 1.0).abs() < 1e-12);
        let inner_before: C64 = x.iter().zip(&y).map(|(p, q)| p.conj() * q).sum();
        let inner_after: C64 = ux.iter().zip(&uy).map(|(p, q)| p.conj() * q).sum();
        assert!((inner_before - inner_after).norm() < 1e-12);
    }
}

#[test]
fn final_state_is_the_branch_superposition() {
    let m = model(5, 0.7);
    let dense = pointer_measure(&m).state.to_dense().unwrap();
    let half = 1 << 5;
    let mut input = vec![C64::new(0.0, 0.0); 2 * half];
    input[0] = m.c_plus;
    input[half] = m.c_minus;
    let applied = apply_controlled_rotation(m.theta, 5, &input).unwrap();
    for (a, b) in dense.iter().zip(&applied) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn overlap_decays_exponentially() {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    for theta in [0.1, 0.451, 1.0] {
        let logs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&n| pointer_measure(&PointerModel::new(n, theta, h, h).unwrap()).branch_overlap.ln())
            .collect();
        let rate = theta.cos().abs().ln();
        assert!(((logs[1] - logs[0]) / 10.0 - rate).abs() < 1e-9);
        assert!(((logs[2] - logs[1]) / 20.0 - rate).abs() < 1e-9);
    }
}
