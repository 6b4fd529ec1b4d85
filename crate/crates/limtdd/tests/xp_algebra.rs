mod common;

use common::*;
use limtdd::xp::{lim_compare, omega_pow, LimWeight, XPOperator, XpError};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use std::cmp::Ordering;

fn to_op(a: &Xp) -> XPOperator {
    XPOperator::new(a.n, a.p, &a.x, &a.z).unwrap()
}

fn dense(op: &XPOperator) -> Vec<Vec<Complex64>> {
    let m = op.to_dense().unwrap();
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect()).collect()
}

/// Integer components of `u1·u2` via the antisymmetric-operator identity.
fn product_components(a: &Xp, b: &Xp) -> (u32, Vec<u8>, Vec<u32>) {
    let n = a.n as i64;
    let d: Vec<i64> = (0..a.rank()).map(|i| 2 * b.x[i] as i64 * a.z[i]).collect();
    let p = a.p + b.p + d.iter().sum::<i64>();
    let x = a.x.iter().zip(&b.x).map(|(u, v)| u ^ v).collect();
    let z = (0..a.rank()).map(|i| (a.z[i] + b.z[i] - d[i]).rem_euclid(n) as u32).collect();
    (p.rem_euclid(2 * n) as u32, x, z)
}

fn inverse_components(a: &Xp) -> (u32, Vec<u8>, Vec<u32>) {
    let n = a.n as i64;
    let d: Vec<i64> = (0..a.rank()).map(|i| -2 * a.x[i] as i64 * a.z[i]).collect();
    let p = -a.p + d.iter().sum::<i64>();
    let z = (0..a.rank()).map(|i| (-a.z[i] - d[i]).rem_euclid(n) as u32).collect();
    (p.rem_euclid(2 * n) as u32, a.x.clone(), z)
}

fn parts(op: &XPOperator) -> (u32, Vec<u8>, Vec<u32>) {
    (op.phase(), op.x().to_vec(), op.z().to_vec())
}

#[test]
fn dense_matches_definition() {
    let mut r = rng(1);
    for _ in 0..200 {
        let n = [1, 2, 4, 8][r.gen_range(0..4)];
        let k = r.gen_range(1..=4);
        let a = Xp::random(&mut r, n, k);
        assert!(mat_diff(&dense(&to_op(&a)), &a.matrix()) < 1e-12);
    }
}

#[test]
fn p_is_diag_one_omega_squared() {
    let p = XPOperator::new(8, 0, &[0], &[1]).unwrap();
    let m = p.to_dense().unwrap();
    assert_eq!(m.get(0, 0), Complex64::new(1.0, 0.0));
    assert!((m.get(1, 1) - Complex64::from_polar(1.0, std::f64::consts::PI / 4.0)).norm() < 1e-15);
}

#[test]
fn omega_pow_axes_are_exact() {
    assert_eq!(omega_pow(4, 2), Complex64::new(0.0, 1.0));
    assert_eq!(omega_pow(4, 4), Complex64::new(-1.0, 0.0));
    assert_eq!(omega_pow(4, -2), Complex64::new(0.0, -1.0));
    assert_eq!(omega_pow(0, 7), Complex64::new(1.0, 0.0));
}

#[test]
fn antisym_is_diagonal_with_phase_sum() {
    let d = XPOperator::antisym(4, &[1, 3]);
    assert_eq!(d.phase(), 4);
    assert_eq!(d.x(), &[0, 0]);
    assert_eq!(d.z(), &[3, 1]);
}

#[test]
fn precision_and_rank_mismatch_are_errors() {
    let a = XPOperator::identity(4, 2);
    let b = XPOperator::identity(8, 2);
    let c = XPOperator::identity(4, 3);
    assert_eq!(a.mul(&b), Err(XpError::PrecisionMismatch(4, 8)));
    assert_eq!(a.mul(&c), Err(XpError::RankMismatch(2, 3)));
    assert_eq!(XPOperator::new(0, 0, &[1], &[0]), Err(XpError::ScalarOnly));
}

#[test]
fn components_reduce_modulo() {
    let a = XPOperator::new(4, -1, &[3], &[-1]).unwrap();
    assert_eq!(parts(&a), (7, vec![1], vec![3]));
}

#[test]
fn display_form() {
    let a = XPOperator::new(8, 3, &[1, 0], &[2, 5]).unwrap();
    assert_eq!(a.to_string(), "XP_8(3|10|2,5)");
}

#[test]
fn phase_extract_leaves_residual_below_one_over_n() {
    let mut r = rng(2);
    for _ in 0..200 {
        let n = [1, 2, 4, 8][r.gen_range(0..4)];
        let a = Xp::random(&mut r, n, 2);
        let w = LimWeight::new(Complex64::from_polar(r.gen_range(0.1..2.0), r.gen_range(-3.0..3.0)), to_op(&a));
        let (k, res) = w.phase_extract().unwrap();
        assert!(res.combined_angle() < 1.0 / n as f64 + 1e-12);
        let back = res.coefficient() * omega_pow(n, 2 * k as i64);
        assert!((back - w.coefficient()).norm() < 1e-12);
    }
}

#[test]
fn split_multiplies_back() {
    let mut r = rng(3);
    for _ in 0..100 {
        let a = Xp::random(&mut r, 4, 4);
        let w = LimWeight::new(Complex64::new(0.3, -1.1), to_op(&a));
        let (on, off) = w.split(&[0, 2]).unwrap();
        assert!(on.to_dense().unwrap().mul(&off.to_dense().unwrap()).approx_eq(&w.to_dense().unwrap(), 1e-12));
        assert_eq!(on.op().x()[1], 0);
        assert_eq!(off.op().z()[0], 0);
    }
    let w = LimWeight::one(2, 2);
    assert_eq!(w.split(&[5]).unwrap_err(), XpError::Position(5));
}

#[test]
fn zero_weight_has_no_inverse() {
    assert_eq!(LimWeight::zero(4, 1).inverse().unwrap_err(), XpError::ZeroWeight);
}

#[test]
fn lim_order_puts_components_before_scalars() {
    let a = LimWeight::new(Complex64::new(5.0, 0.0), XPOperator::new(4, 0, &[0], &[1]).unwrap());
    let b = LimWeight::new(Complex64::new(0.1, 0.0), XPOperator::new(4, 0, &[0], &[2]).unwrap());
    let c = LimWeight::new(Complex64::new(0.1, 0.0), XPOperator::new(4, 0, &[1], &[0]).unwrap());
    assert_eq!(lim_compare(&a, &b), Ordering::Less);
    assert_eq!(lim_compare(&b, &c), Ordering::Less);
    assert_eq!(lim_compare(&a, &a.clone()), Ordering::Equal);
}

fn xp_strategy() -> impl Strategy<Value = (Xp, Xp, Xp)> {
    (prop::sample::select(vec![1u32, 2, 4, 8]), 1usize..=4).prop_flat_map(|(n, k)| {
        let one = move || {
            (0..2 * n as i64, prop::collection::vec(0u8..2, k), prop::collection::vec(0..n as i64, k))
                .prop_map(move |(p, x, z)| Xp { n, p, x, z })
        };
        (one(), one(), one())
    })
}

proptest! {
    #[test]
    fn product_follows_component_rule((a, b, _c) in xp_strategy()) {
        let ab = to_op(&a).mul(&to_op(&b)).unwrap();
        prop_assert_eq!(parts(&ab), product_components(&a, &b));
        prop_assert!(mat_diff(&dense(&ab), &mat_mul(&a.matrix(), &b.matrix())) < 1e-12);
    }

    #[test]
    fn inverse_follows_component_rule((a, _b, _c) in xp_strategy()) {
        let inv = to_op(&a).inverse();
        prop_assert_eq!(parts(&inv), inverse_components(&a));
        let d = 1 << a.rank();
        prop_assert!(mat_diff(&mat_mul(&dense(&inv), &a.matrix()), &identity(d)) < 1e-12);
    }

    #[test]
    fn product_is_associative((a, b, c) in xp_strategy()) {
        let (a, b, c) = (to_op(&a), to_op(&b), to_op(&c));
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn transpose_matches_dense((a, _b, _c) in xp_strategy()) {
        prop_assert!(mat_diff(&dense(&to_op(&a).transpose()), &transpose(&a.matrix())) < 1e-12);
    }

    #[test]
    fn weights_multiply_like_matrices((a, b, _c) in xp_strategy(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        prop_assume!(re.abs() + im.abs() > 0.05);
        let wa = LimWeight::new(Complex64::new(re, im), to_op(&a));
        let wb = LimWeight::new(Complex64::new(im, -re), to_op(&b));
        let prod = wa.mul(&wb).unwrap().to_dense().unwrap();
        let want = wa.to_dense().unwrap().mul(&wb.to_dense().unwrap());
        prop_assert!(prod.approx_eq(&want, 1e-9));
        let id = wa.mul(&wa.inverse().unwrap()).unwrap();
        prop_assert!(id.is_one());
    }

    #[test]
    fn canonical_angle_is_in_range((a, _b, _c) in xp_strategy(), turns in -5.0..5.0f64) {
        let w = LimWeight::from_polar(1.5, turns, to_op(&a));
        let n = a.n as f64;
        prop_assert!(w.angle() >= 0.0 && w.angle() < 1.0 / (2.0 * n));
        let want = Complex64::from_polar(1.5, 2.0 * std::f64::consts::PI * turns) * omega(a.n, a.p);
        prop_assert!((w.coefficient() - want).norm() < 1e-9);
    }
}
