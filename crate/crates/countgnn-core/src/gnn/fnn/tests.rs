use super::*;
use crate::rational::{int, ratio};
use proptest::prelude::*;

fn min_one() -> Fnn {
    Fnn::new(
        1,
        vec![
            Dense::from_ints(&[&[1], &[1]], &[0, -1], Activation::Relu).unwrap(),
            Dense::from_ints(&[&[1, -1]], &[0], Activation::Id).unwrap(),
        ],
    )
    .unwrap()
}

#[test]
fn spec_evaluations() {
    let id = Fnn::identity(2);
    assert_eq!(id.eval(&[ratio(1, 2), int(-3)]).unwrap(), vec![ratio(1, 2), int(-3)]);
    let shift = Fnn::new(1, vec![Dense::from_ints(&[&[1]], &[-1], Activation::Relu).unwrap()]).unwrap();
    assert_eq!(shift.eval(&[ratio(1, 2)]).unwrap(), vec![int(0)]);
    assert_eq!(min_one().eval(&[int(3)]).unwrap(), vec![int(1)]);
    assert_eq!(min_one().eval(&[ratio(1, 3)]).unwrap(), vec![ratio(1, 3)]);
}

#[test]
fn dimension_errors() {
    assert!(matches!(Fnn::identity(2).eval(&[int(1)]), Err(GnnError::Dimension { .. })));
    let bad = Fnn::new(2, vec![Dense::from_ints(&[&[1]], &[0], Activation::Id).unwrap()]);
    assert!(matches!(bad, Err(GnnError::Dimension { what: "layer input", expected: 2, found: 1 })));
    assert!(Dense::new(vec![vec![int(1)]], vec![], 1, Activation::Id).is_err());
}

#[test]
fn lipschitz_examples() {
    assert_eq!(Fnn::identity(3).lipschitz_bound(), int(1));
    let row = Fnn::new(2, vec![Dense::from_ints(&[&[2, -1]], &[0], Activation::Id).unwrap()]).unwrap();
    assert_eq!(row.lipschitz_bound(), int(3));
    let two = Fnn::new(
        2,
        vec![
            Dense::from_ints(&[&[2, -1], &[1, 1]], &[0, 0], Activation::Relu).unwrap(),
            Dense::new(vec![vec![ratio(1, 4), ratio(-1, 4)]], vec![int(0)], 2, Activation::Id).unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(two.lipschitz_bound(), ratio(3, 2));
    assert_eq!(row.lipschitz_bound_on(1..2), int(1));
}

#[test]
fn identity_detection() {
    assert!(Fnn::identity(2).is_identity());
    assert!(Fnn::new(3, vec![]).unwrap().is_identity());
    assert!(!Fnn::select(2, &[1, 0]).is_identity());
    assert!(!min_one().is_identity());
}

#[test]
fn bitsize_grows_with_denominators() {
    let a = Fnn::affine(vec![vec![ratio(1, 3)]], vec![int(0)], 1).unwrap();
    let b = Fnn::affine(vec![vec![ratio(1, 6)]], vec![int(0)], 1).unwrap();
    assert!(b.bitsize() > a.bitsize());
}

#[test]
fn interval_bounds_contain_samples() {
    let f = min_one();
    let (lo, hi) = f.interval(&[int(-2)], &[int(5)]);
    assert!(lo[0] <= int(-1) && hi[0] >= int(1));
    let (lo, hi) = f.interval(&[int(0)], &[int(1)]);
    assert!(lo[0] <= int(0) && hi[0] >= int(1));
}

#[test]
fn normal_form_shape() {
    let f = Fnn::affine(vec![vec![int(2)]], vec![int(1)], 1).unwrap().then(&min_one()).unwrap().then(&Fnn::identity(1)).unwrap();
    let nf = f.normal_form();
    assert_eq!(nf.depth(), 2);
    assert_eq!(nf.layers()[0].activation(), Activation::Relu);
    assert_eq!(nf.layers()[1].activation(), Activation::Id);
    let relu_last = Fnn::new(1, vec![Dense::from_ints(&[&[1]], &[0], Activation::Relu).unwrap()]).unwrap();
    assert_eq!(relu_last.normal_form().depth(), 2);
    assert_eq!(Fnn::new(2, vec![]).unwrap().normal_form().depth(), 1);
}

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| ratio(a, b))
}

fn arb_fnn(input: usize) -> impl Strategy<Value = Fnn> {
    prop::collection::vec((1usize..4, any::<bool>()), 0..4).prop_flat_map(move |shape| {
        let mut dims = vec![input];
        dims.extend(shape.iter().map(|s| s.0));
        let layers: Vec<_> = shape
            .iter()
            .enumerate()
            .map(|(i, &(rows, relu))| {
                let cols = dims[i];
                (prop::collection::vec(prop::collection::vec(small_q(), cols), rows), prop::collection::vec(small_q(), rows))
                    .prop_map(move |(w, b)| Dense::new(w, b, cols, if relu { Activation::Relu } else { Activation::Id }).unwrap())
            })
            .collect();
        layers.prop_map(move |ls| Fnn::new(input, ls).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normal_form_preserves_function(f in arb_fnn(2), x in prop::collection::vec(small_q(), 2)) {
        prop_assert_eq!(f.normal_form().eval(&x).unwrap(), f.eval(&x).unwrap());
    }

    #[test]
    fn parallel_and_fanout_evaluate_blockwise(
        f in arb_fnn(2), g in arb_fnn(2), x in prop::collection::vec(small_q(), 2), y in prop::collection::vec(small_q(), 2)
    ) {
        let mut xy = x.clone();
        xy.extend(y.iter().cloned());
        let mut expected = f.eval(&x).unwrap();
        expected.extend(g.eval(&y).unwrap());
        prop_assert_eq!(f.parallel(&g).eval(&xy).unwrap(), expected);
        let mut shared = f.eval(&x).unwrap();
        shared.extend(g.eval(&x).unwrap());
        prop_assert_eq!(f.fanout(&g).unwrap().eval(&x).unwrap(), shared);
    }

    #[test]
    fn lipschitz_bound_holds(f in arb_fnn(2), x in prop::collection::vec(small_q(), 2), y in prop::collection::vec(small_q(), 2)) {
        let dx = rational::vec_sub_abs_max(&x, &y);
        let dy = rational::vec_sub_abs_max(&f.eval(&x).unwrap(), &f.eval(&y).unwrap());
        prop_assert!(dy <= f.lipschitz_bound() * dx);
    }

    #[test]
    fn interval_encloses_outputs(f in arb_fnn(2), x in prop::collection::vec(small_q(), 2)) {
        let lo: Vec<Q> = x.iter().map(|v| v - int(1)).collect();
        let hi: Vec<Q> = x.iter().map(|v| v + int(1)).collect();
        let (olo, ohi) = f.interval(&lo, &hi);
        let y = f.eval(&x).unwrap();
        for i in 0..y.len() {
            prop_assert!(olo[i] <= y[i] && y[i] <= ohi[i]);
        }
    }
}
