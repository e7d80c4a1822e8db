mod common;

use persreg_core::{persistent_entropy, select_from_lengths, BarLengths};
use proptest::prelude::*;

#[test]
fn reference_trace_separates_two_long_bars() {
    let l = [10.0, 9.5, 0.5, 0.4, 0.35, 0.3];
    assert_eq!(common::reference_select(&l), vec![0, 1]);
    let sel = select_from_lengths(&l).unwrap();
    assert_eq!(sel.selected, vec![0, 1]);
    assert_eq!(sel.noise, vec![2, 3, 4, 5]);
}

#[test]
fn hand_trace_first_pass() {
    // Pass i = 1 neutralises 9.5 against {0.5, 0.4, 0.35, 0.3, 10}.
    let rest = [0.5, 0.4, 0.35, 0.3, 10.0];
    let p: f64 = rest.iter().sum();
    let e = persistent_entropy(&BarLengths::new(rest.to_vec()).unwrap()).unwrap();
    let s1 = p + p / e.exp();
    let c1 = 21.05 / s1;
    let sel = select_from_lengths(&[10.0, 9.5, 0.5, 0.4, 0.35, 0.3]).unwrap();
    let first = sel.q_trace[0];
    assert_eq!(first.i, 1);
    assert!((first.c - c1).abs() < 1e-12);
    assert!(first.c >= 1.0);
    // The bound is 0 for six bars at this ratio, so the scan restarts on
    // {9.5, r, T}, where the single pass keeps 9.5.
    assert_eq!(first.q, 0);
    let last = sel.q_trace.last().unwrap();
    assert_eq!((last.i, last.n_prime), (1, 3));
    assert!(last.c >= 1.0);
}

#[test]
fn edge_cases() {
    assert_eq!(
        select_from_lengths(&[2.0; 4]).unwrap().selected,
        vec![0, 1, 2, 3]
    );
    let two = select_from_lengths(&[3.0, 1.0]).unwrap();
    assert_eq!((two.selected, two.noise), (vec![0], vec![1]));
    assert!(two.q_trace.is_empty());
    assert_eq!(select_from_lengths(&[4.0]).unwrap().selected, vec![0]);
}

#[test]
fn separation_grid() {
    // Two well-separated groups: when the feature bound does not bind, exactly
    // the long bars are features; when it does, the selection still contains
    // only long bars.
    let mut checked = 0;
    for &a in &[1.0, 5.0, 20.0, 100.0] {
        for &ratio in &[20.0, 50.0, 200.0, 1000.0] {
            let b = a / ratio;
            for p in 1..=6 {
                for q in 1..=8 {
                    let mut l = vec![a; p];
                    l.extend(std::iter::repeat_n(b, q));
                    let sel = select_from_lengths(&l).unwrap().selected;
                    assert_eq!(sel, common::reference_select(&l));
                    let big: Vec<usize> = (0..p).collect();
                    if p <= 2 {
                        assert_eq!(sel, big, "a={a} b={b} p={p} q={q}");
                    } else {
                        assert!(sel.iter().all(|&j| j < p), "a={a} b={b} p={p} q={q}");
                    }
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 4 * 4 * 6 * 8);
}

fn barcode() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.0f64..1.0, 0.0f64..100.0, Just(1.0)], 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn agrees_with_reference(l in barcode()) {
        prop_assume!(l.iter().any(|&x| x > 0.0));
        let sel = select_from_lengths(&l).unwrap();
        prop_assert_eq!(&sel.selected, &common::reference_select(&l));
    }

    #[test]
    fn longest_in_shortest_out(l in barcode()) {
        let sel = select_from_lengths(&l).unwrap();
        let max = l.iter().cloned().fold(f64::MIN, f64::max);
        let min = l.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(sel.selected.iter().any(|&j| l[j] == max));
        if max > min {
            prop_assert!(sel.selected.iter().all(|&j| l[j] > min));
        }
        let mut all: Vec<usize> = sel.selected.iter().chain(&sel.noise).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
    }

    #[test]
    fn restarts_shrink_the_barcode(l in barcode()) {
        let sel = select_from_lengths(&l).unwrap();
        for w in sel.q_trace.windows(2) {
            if w[1].i <= w[0].i {
                prop_assert!(w[1].n_prime < w[0].n_prime);
            } else {
                prop_assert_eq!(w[1].n_prime, w[0].n_prime);
            }
        }
    }

    #[test]
    fn entropy_bounds(l in prop::collection::vec(0.0f64..1e3, 1..100)) {
        prop_assume!(l.iter().sum::<f64>() > 0.0);
        let e = persistent_entropy(&BarLengths::new(l.clone()).unwrap()).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!(e <= (l.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn entropy_permutation_and_scale_invariant(
        l in prop::collection::vec(0.01f64..1e3, 1..60),
        c in 1e-3f64..1e3,
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let e = persistent_entropy(&BarLengths::new(l.clone()).unwrap()).unwrap();
        let mut shuffled = l.clone();
        shuffled.shuffle(&mut common::rng(seed));
        let scaled: Vec<f64> = l.iter().map(|x| x * c).collect();
        let e_perm = persistent_entropy(&BarLengths::new(shuffled).unwrap()).unwrap();
        let e_scaled = persistent_entropy(&BarLengths::new(scaled).unwrap()).unwrap();
        prop_assert!((e - e_perm).abs() <= 1e-12);
        prop_assert!((e - e_scaled).abs() <= 1e-12);
    }
}
