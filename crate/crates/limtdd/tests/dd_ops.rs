mod common;

use common::*;
use limtdd::dd::{DdError, LimTdd, Manager, NodeId, StabMode};
use limtdd::dense::DenseTensor;
use limtdd::xp::{LimWeight, XPOperator};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const POOL: usize = 7;

fn manager(n: u32) -> Manager {
    let mut m = Manager::new(n, StabMode::Fast).unwrap();
    for name in names("i", POOL) {
        m.register_index(&name);
    }
    m
}

fn subset(r: &mut rand_chacha::ChaCha8Rng, k: usize) -> Vec<String> {
    let mut all = names("i", POOL);
    all.shuffle(r);
    all.truncate(k);
    all
}

fn example_state() -> DenseTensor {
    let h = 1.0 / (2.0 * 2f64.sqrt());
    let i = Complex64::new(0.0, 1.0);
    let v = [C1, C1, C1, -C1, -i, i, -C1, -C1];
    DenseTensor::new(vec!["x3".into(), "x2".into(), "x1".into()], v.iter().map(|c| c * h).collect()).unwrap()
}

fn example_manager(n: u32, mode: StabMode) -> Manager {
    let mut m = Manager::new(n, mode).unwrap();
    for x in ["x3", "x2", "x1"] {
        m.register_index(x);
    }
    m
}

fn is_tower(m: &Manager, f: &LimTdd) -> bool {
    let mut v = f.root();
    while let Some((lo, hi)) = m.node_children(v) {
        if lo.v != hi.v {
            return false;
        }
        v = lo.v;
    }
    true
}

#[test]
fn example_state_is_a_tower_of_four_nodes() {
    let mut m = example_manager(8, StabMode::Fast);
    let f = m.generate(&example_state()).unwrap();
    assert_eq!(m.size(&f), 4);
    assert!(is_tower(&m, &f));
    let back = m.to_tensor(&f).unwrap();
    assert!(back.max_abs_diff(&example_state()).unwrap() < 1e-12);
}

#[test]
fn example_amplitudes() {
    let mut m = example_manager(8, StabMode::Fast);
    let f = m.generate(&example_state()).unwrap();
    let h = 1.0 / (2.0 * 2f64.sqrt());
    let a = m.amplitude(&f, &[("x3", 0), ("x2", 0), ("x1", 0)]).unwrap();
    assert!((a - Complex64::new(h, 0.0)).norm() < 1e-12);
    let a = m.amplitude(&f, &[("x1", 0), ("x2", 0), ("x3", 1)]).unwrap();
    assert!((a - Complex64::new(0.0, -h)).norm() < 1e-12);
    assert!(matches!(m.amplitude(&f, &[("x3", 0)]), Err(DdError::MissingIndex(_))));
}

#[test]
fn example_slice_on_top_index() {
    let mut m = example_manager(8, StabMode::Fast);
    let f = m.generate(&example_state()).unwrap();
    let s = m.slicing(&f, "x3", 1).unwrap();
    let want = example_state().slice("x3", 1);
    let h = 1.0 / (2.0 * 2f64.sqrt());
    let i = Complex64::new(0.0, 1.0);
    let expect = [-i * h, i * h, -C1 * h, -C1 * h];
    assert!(max_diff(want.data(), &expect) < 1e-15);
    assert!(m.to_tensor(&s).unwrap().max_abs_diff(&want).unwrap() < 1e-12);
    assert_eq!(m.index_names(&s), vec!["x2", "x1"]);
}

#[test]
fn slicing_a_trivial_diagram_is_identity() {
    let mut m = manager(4);
    let c = m.constant(Complex64::new(0.5, 0.5));
    let s = m.slicing(&c, "i0", 1).unwrap();
    assert_eq!(s, c);
}

#[test]
fn constants_and_zero() {
    let mut m = manager(4);
    let c = m.constant(Complex64::new(2.0, -1.0));
    assert_eq!(m.size(&c), 1);
    assert!((m.coefficient(&c) - Complex64::new(2.0, -1.0)).norm() < 1e-12);
    let z = m.zero(&[]);
    assert!(z.is_zero());
    assert_eq!(m.size(&z), 1);
    let t = m.to_tensor(&c).unwrap();
    assert_eq!(t.rank(), 0);
}

#[test]
fn loc_norm_of_two_zeros_is_zero() {
    let mut m = manager(8);
    let z0 = m.zero(&[]);
    let f = m.loc_norm("i0", &z0, &z0.clone()).unwrap();
    assert!(f.is_zero());
    let t = m.to_tensor(&f).unwrap();
    assert!(t.data().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn loc_norm_minus_one_shares_the_plus_node() {
    let mut m = manager(8);
    let one = m.constant(C1);
    let minus = m.constant(-C1);
    let plus = m.loc_norm("i0", &one, &one.clone()).unwrap();
    let f = m.loc_norm("i0", &one, &minus).unwrap();
    assert_eq!(f.root(), plus.root());
    let w = m.weight(&f);
    assert_eq!(w.op().z(), &[4]);
    assert_eq!(w.op().x(), &[0]);
    let t = m.to_tensor(&f).unwrap();
    assert!(max_diff(t.data(), &[C1, -C1]) < 1e-12);
}

#[test]
fn loc_norm_rejects_out_of_order_index() {
    let mut m = manager(4);
    let t = DenseTensor::random(vec!["i1".into()], 1).unwrap();
    let f = m.generate(&t).unwrap();
    assert!(matches!(m.loc_norm("i2", &f, &f.clone()), Err(DdError::Order(_))));
}

#[test]
fn make_dd_in_scalar_mode_eliminates_redundant_nodes() {
    let mut m = manager(0);
    let t = DenseTensor::random(vec!["i1".into()], 3).unwrap();
    let f = m.generate(&t).unwrap();
    let one = LimWeight::one(0, 1);
    let g = m.make_dd_lim(&LimWeight::one(0, 2), "i0", &one, &f, &one, &f).unwrap();
    assert_eq!(g.root(), f.root());
    let z = m.constant(C0);
    let zw = LimWeight::zero(0, 0);
    let g = m.make_dd_lim(&LimWeight::one(0, 1), "i0", &zw, &z, &zw, &z).unwrap();
    assert!(g.is_zero());
}

#[test]
fn make_dd_is_hash_consed() {
    let mut m = manager(4);
    let t = DenseTensor::random(vec!["i1".into()], 3).unwrap();
    let f = m.generate(&t).unwrap();
    let one = LimWeight::one(4, 1);
    let x = LimWeight::from_op(XPOperator::new(4, 0, &[1], &[0]).unwrap());
    let a = m.make_dd_lim(&LimWeight::one(4, 2), "i0", &one, &f, &x, &f).unwrap();
    let b = m.make_dd_lim(&LimWeight::one(4, 2), "i0", &one, &f, &x, &f).unwrap();
    assert_eq!(a.root(), b.root());
    let want = DenseTensor::from_fn(vec!["i0".into(), "i1".into()], |bits| {
        if bits[0] == 0 { t.get(&[bits[1]]) } else { t.get(&[1 - bits[1]]) }
    })
    .unwrap();
    assert!(m.to_tensor(&a).unwrap().max_abs_diff(&want).unwrap() < 1e-12);
}

#[test]
fn add_identities() {
    let mut m = manager(8);
    let mut r = rng(11);
    let t = mixed(&mut r, names("i", 3), 8);
    let f = m.generate(&t).unwrap();
    let z = m.zero(f.vars());
    let s = m.add(&f, &z).unwrap();
    assert_eq!(s.root(), f.root());
    let d = m.add(&f, &f).unwrap();
    assert_eq!(d.root(), f.root());
    assert!((m.coefficient(&d) - 2.0 * m.coefficient(&f)).norm() < 1e-12);
    let neg = m.generate(&t.scaled(-C1)).unwrap();
    assert!(m.add(&f, &neg).unwrap().is_zero());
}

#[test]
fn trivial_contraction_scales_by_two_per_index() {
    let mut m = manager(4);
    let a = m.constant_over(Complex64::new(0.5, 0.0), &["i0", "i1", "i2"]).unwrap();
    let b = m.constant_over(Complex64::new(0.0, 3.0), &["i0", "i1", "i2"]).unwrap();
    let c = m.contract(&a, &b, &["i0", "i1", "i2"]).unwrap();
    assert!(c.vars().is_empty());
    assert!((m.coefficient(&c) - Complex64::new(0.0, 1.5 * 8.0)).norm() < 1e-12);
}

#[test]
fn identity_contraction_renames_the_wire() {
    let mut m = manager(8);
    let mut r = rng(12);
    let t = mixed(&mut r, vec!["i0".into(), "i2".into()], 8);
    let f = m.generate(&t).unwrap();
    let id = DenseTensor::from_fn(vec!["i1".into(), "i2".into()], |b| if b[0] == b[1] { C1 } else { C0 }).unwrap();
    let g = m.generate(&id).unwrap();
    let h = m.contract(&f, &g, &["i2"]).unwrap();
    assert_eq!(m.index_names(&h), vec!["i0", "i1"]);
    let renamed = DenseTensor::new(vec!["i0".into(), "i1".into()], t.data().to_vec()).unwrap();
    assert!(m.to_tensor(&h).unwrap().max_abs_diff(&renamed).unwrap() < 1e-12);
}

#[test]
fn handle_and_index_errors() {
    let mut m = manager(4);
    let mut other = manager(4);
    let f = other.constant(C1);
    assert!(matches!(m.to_tensor(&f), Err(DdError::ForeignHandle)));
    let t = DenseTensor::random(vec!["nope".into()], 0).unwrap();
    assert!(matches!(m.generate(&t), Err(DdError::UnknownIndex(_))));
    let a = m.generate(&DenseTensor::random(vec!["i0".into()], 1).unwrap()).unwrap();
    let b = m.generate(&DenseTensor::random(vec!["i1".into()], 2).unwrap()).unwrap();
    assert!(matches!(m.contract(&a, &b, &["i0"]), Err(DdError::NotShared(_))));
    assert!(matches!(Manager::new(3, StabMode::Fast), Err(DdError::InvalidPrecision(3))));
    assert!(matches!(m.register_index_at("i0", 99), Err(DdError::DuplicateIndex(_))));
}

#[test]
fn generate_registering_appends_new_indices() {
    let mut m = Manager::new(2, StabMode::Fast).unwrap();
    let t = DenseTensor::random(vec!["b".into(), "a".into()], 4).unwrap();
    let f = m.generate_registering(&t).unwrap();
    assert_eq!(m.index_names(&f), vec!["b", "a"]);
    assert!(m.var("b").unwrap() < m.var("a").unwrap());
}

#[test]
fn dot_lists_every_node() {
    let mut m = example_manager(8, StabMode::Fast);
    let f = m.generate(&example_state()).unwrap();
    let dot = m.export_dot(&f).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("shape=circle").count(), 3);
    assert_eq!(dot.matches("shape=box").count(), 1);
    assert_eq!(dot.matches("style=dashed").count(), 3);
    assert!(dot.contains("label=\"x3\""));
}

#[test]
fn garbage_collection_keeps_roots_intact() {
    let mut m = manager(4);
    let mut r = rng(13);
    let keep_t = mixed(&mut r, names("i", 5), 4);
    let keep = m.generate(&keep_t).unwrap();
    for _ in 0..20 {
        let t = generic(&mut r, names("i", 5));
        m.generate(&t).unwrap();
    }
    let before = m.live_nodes();
    m.collect_garbage(&[&keep]);
    assert!(m.live_nodes() < before);
    assert_eq!(m.cache_entries(), 0);
    assert!(m.to_tensor(&keep).unwrap().max_abs_diff(&keep_t).unwrap() < 1e-12);
    let again = m.generate(&keep_t).unwrap();
    assert_eq!(again.root(), keep.root());
    assert_eq!(m.stats().collections, 1);
}

#[test]
fn node_queries() {
    let mut m = example_manager(8, StabMode::Fast);
    let f = m.generate(&example_state()).unwrap();
    let v = f.root();
    assert_eq!(m.index_name(m.node_var(v)), "x3");
    assert_eq!(m.node_vars(v).len(), 3);
    assert!(m.node_children(NodeId::TERMINAL).is_none());
    assert_eq!(m.node_serial(NodeId::TERMINAL), 0);
}

fn precision() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![0u32, 1, 2, 4, 8])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(seed in any::<u64>(), n in precision(), k in 0usize..=5) {
        let mut r = rng(seed);
        let mut m = manager(n);
        let it = subset(&mut r, k);
        let t = mixed(&mut r, it, n);
        let f = m.generate(&t).unwrap();
        prop_assert!(m.to_tensor(&f).unwrap().max_abs_diff(&t).unwrap() < 1e-9);
    }

    #[test]
    fn generation_is_canonical_under_scaling(seed in any::<u64>(), n in precision(), k in 1usize..=4, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let mut r = rng(seed);
        let mut m = manager(n);
        let it = subset(&mut r, k);
        let t = mixed(&mut r, it, n);
        let f = m.generate(&t).unwrap();
        let g = m.generate(&t.scaled(Complex64::new(re, im))).unwrap();
        prop_assert_eq!(f.root(), g.root());
    }

    #[test]
    fn slicing_matches_dense(seed in any::<u64>(), n in precision(), k in 1usize..=4, c in 0u8..2) {
        let mut r = rng(seed);
        let mut m = manager(n);
        let idx = subset(&mut r, k);
        let t = mixed(&mut r, idx.clone(), n);
        let x = idx.choose(&mut r).unwrap().clone();
        let f = m.generate(&t).unwrap();
        let s = m.slicing(&f, &x, c).unwrap();
        prop_assert!(m.to_tensor(&s).unwrap().max_abs_diff(&t.slice(&x, c)).unwrap() < 1e-9);
    }

    #[test]
    fn addition_matches_dense(seed in any::<u64>(), n in precision(), ka in 0usize..=4, kb in 0usize..=4) {
        let mut r = rng(seed);
        let mut m = manager(n);
        let ia = subset(&mut r, ka);
        let a = mixed(&mut r, ia, n);
        let ib = subset(&mut r, kb);
        let b = mixed(&mut r, ib, n);
        let (fa, fb) = (m.generate(&a).unwrap(), m.generate(&b).unwrap());
        let s = m.add(&fa, &fb).unwrap();
        prop_assert!(m.to_tensor(&s).unwrap().max_abs_diff(&a.add(&b).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn contraction_matches_dense(seed in any::<u64>(), n in precision(), ka in 1usize..=4, kb in 1usize..=4) {
        let mut r = rng(seed);
        let mut m = manager(n);
        let ia = subset(&mut r, ka);
        let ib = subset(&mut r, kb);
        let shared: Vec<String> = ia.iter().filter(|x| ib.contains(x)).cloned().collect();
        let var: Vec<String> = shared.iter().filter(|_| r.gen_bool(0.6)).cloned().collect();
        let a = mixed(&mut r, ia, n);
        let b = mixed(&mut r, ib, n);
        let (fa, fb) = (m.generate(&a).unwrap(), m.generate(&b).unwrap());
        let vr: Vec<&str> = var.iter().map(String::as_str).collect();
        let c = m.contract(&fa, &fb, &vr).unwrap();
        let want = contract_ref(&a, &b, &var);
        prop_assert!(m.to_tensor(&c).unwrap().max_abs_diff(&want).unwrap() < 1e-9);
    }

    #[test]
    fn amplitudes_agree_with_reconstruction(seed in any::<u64>(), n in precision(), k in 1usize..=5) {
        let mut r = rng(seed);
        let mut m = manager(n);
        let idx = subset(&mut r, k);
        let t = mixed(&mut r, idx.clone(), n);
        let f = m.generate(&t).unwrap();
        for _ in 0..8 {
            let bits: Vec<u8> = (0..k).map(|_| r.gen_range(0..2)).collect();
            let assign: Vec<(&str, u8)> = idx.iter().map(String::as_str).zip(bits.iter().copied()).collect();
            let got = m.amplitude(&f, &assign).unwrap();
            prop_assert!((got - t.get(&bits)).norm() < 1e-10);
        }
    }

    #[test]
    fn weight_transfer_on_root(seed in any::<u64>(), k in 1usize..=4) {
        let mut r = rng(seed);
        let mut m = Manager::new(4, StabMode::Full).unwrap();
        let idx = names("i", k);
        for x in &idx {
            m.register_index(x);
        }
        let t = structured(&mut r, idx, 4);
        let f = m.generate(&t).unwrap();
        prop_assume!(!f.is_zero());
        let w = m.weight(&f);
        let node = t.apply_lim(&w.inverse().unwrap()).unwrap();
        let g = m.generate(&node).unwrap();
        prop_assert_eq!(g.root(), f.root());
        prop_assert!(m.weight(&g).is_one());
    }
}
