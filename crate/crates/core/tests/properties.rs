use std::collections::BTreeMap;

use proptest::prelude::*;
use visdiv::corpus::ClassLabel;
use visdiv::diversity::{combine, eigenspectrum, similarity_matrix, EigenSpectrum};
use visdiv::features::Attribute;
use visdiv::learning::{spearman, weighted_f1, Confusion};
use visdiv::neighbors::NeighborIndex;

fn vectors(max_n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, dim), 2..max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_matrix_is_a_bounded_symmetric_gram(vs in vectors(12, 5)) {
        let m = similarity_matrix("x", Attribute::Color, &vs).unwrap();
        for (i, v) in vs.iter().enumerate() {
            for j in 0..m.n {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert!((-1.0..=1.0).contains(&m.get(i, j)));
            }
            let zero = v.iter().all(|&v| v == 0.0);
            prop_assert_eq!(m.get(i, i), if zero { 0.0 } else { 1.0 });
        }
        let s = eigenspectrum(&m).unwrap();
        prop_assert!((s.eigenvalues.iter().sum::<f64>() - m.trace()).abs() < 1e-9);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(*s.eigenvalues.last().unwrap() > -1e-9);
    }

    #[test]
    fn image_order_does_not_change_the_spectrum(vs in vectors(12, 4), rot in 0usize..12) {
        let n = vs.len();
        let mut shifted = vs.clone();
        shifted.rotate_left(rot % n);
        let a = eigenspectrum(&similarity_matrix("x", Attribute::Hog, &vs).unwrap()).unwrap();
        let b = eigenspectrum(&similarity_matrix("x", Attribute::Hog, &shifted).unwrap()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn combined_vector_concatenates_in_order(a in proptest::collection::vec(-3.0f64..3.0, 1..10), b in proptest::collection::vec(-3.0f64..3.0, 1..10)) {
        let mut spectra = BTreeMap::new();
        spectra.insert(Attribute::Color, EigenSpectrum { lemma: "w".into(), attribute: Attribute::Color, n: a.len(), eigenvalues: a.clone() });
        spectra.insert(Attribute::Gist, EigenSpectrum { lemma: "w".into(), attribute: Attribute::Gist, n: b.len(), eigenvalues: b.clone() });
        let s = combine("w", Some(ClassLabel::Abstract), None, &spectra, &[Attribute::Gist, Attribute::Color]);
        if a.len() == b.len() {
            let s = s.unwrap();
            prop_assert_eq!(&s.vector[..b.len()], &b[..]);
            prop_assert_eq!(&s.vector[b.len()..], &a[..]);
        } else {
            prop_assert!(s.is_err());
        }
    }

    #[test]
    fn neighbours_are_ranked_and_exclude_the_query(vs in vectors(30, 3), topn in 1usize..10) {
        let items: Vec<(String, Vec<f64>)> = vs.iter().enumerate().map(|(i, v)| (format!("i{i:03}"), v.clone())).collect();
        let index = NeighborIndex::new(items).unwrap();
        for id in index.ids() {
            match index.query(id, topn) {
                Ok(r) => {
                    prop_assert_eq!(r.neighbors.len(), topn);
                    prop_assert!(r.neighbors.iter().all(|n| &n.image_id != id));
                    prop_assert!(r.neighbors.windows(2).all(|w| w[0].similarity > w[1].similarity
                        || (w[0].similarity == w[1].similarity && w[0].image_id < w[1].image_id)));
                }
                Err(_) => prop_assert!(topn + 1 > index.len()),
            }
        }
    }

    #[test]
    fn rank_correlation_is_bounded_and_symmetric(xy in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        match (spearman(&x, &y), spearman(&y, &x)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
                prop_assert!((a - b).abs() < 1e-12);
            }
            (a, b) => prop_assert!(a.is_err() && b.is_err()),
        }
    }

    #[test]
    fn weighted_f1_is_a_probability(pairs in proptest::collection::vec((0usize..2, 0usize..2), 1..50)) {
        let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let f = weighted_f1(&Confusion::from_pairs(2, &t, &p)).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f == 1.0, t == p);
    }
}
