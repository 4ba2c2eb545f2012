//! Property-based checks of the numeric and embedding primitives.

use maxcosine::embedding::EmbeddingLibrary;
use maxcosine::matcher::{match_fast, match_word, Candidates};
use maxcosine::numerics::{argmax, dot, softmax, Matrix};
use maxcosine::cosine;
use proptest::prelude::*;

fn vec_of(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn nonzero(v: &[f64]) -> bool {
    v.iter().any(|x| x.abs() > 1e-3)
}

proptest! {
    #[test]
    fn cosine_is_bounded_symmetric_and_scale_free(
        (x, y) in (1usize..12).prop_flat_map(|d| (vec_of(d), vec_of(d))),
        a in 0.01f64..100.0,
    ) {
        let c = cosine(&x, &y).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
        prop_assert_eq!(c, cosine(&y, &x).unwrap());
        if nonzero(&x) && nonzero(&y) {
            let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
            prop_assert!((cosine(&scaled, &y).unwrap() - c).abs() < 1e-12);
        }
    }

    #[test]
    fn matvec_is_linear(
        (rows, cols) in (1usize..6, 1usize..6),
        seed in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let mut rng = maxcosine::numerics::Rng::new(seed);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.uniform_range(-5.0, 5.0)).collect() };
        let w = Matrix::from_vec(rows, cols, draw(rows * cols)).unwrap();
        let (u, v) = (draw(cols), draw(cols));
        let mix: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let lhs = w.matvec(&mix).unwrap();
        let (wu, wv) = (w.matvec(&u).unwrap(), w.matvec(&v).unwrap());
        for i in 0..rows {
            prop_assert!((lhs[i] - (a * wu[i] + b * wv[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn softmax_is_a_distribution(p in prop::collection::vec(-300.0f64..300.0, 1..8), c in -100.0f64..100.0) {
        let s = softmax(&p);
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(s.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert_eq!(argmax(&s), argmax(&p));
        let shifted: Vec<f64> = p.iter().map(|x| x + c).collect();
        for (a, b) in s.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn concatenated_dot_products_add(
        (a1, b1, a2, b2) in (1usize..6, 1usize..6).prop_flat_map(|(d1, d2)| (vec_of(d1), vec_of(d1), vec_of(d2), vec_of(d2)))
    ) {
        let cat = |x: &[f64], y: &[f64]| [x, y].concat();
        let lhs = dot(&cat(&a1, &a2), &cat(&b1, &b2));
        prop_assert!((lhs - (dot(&a1, &b1) + dot(&a2, &b2))).abs() < 1e-9);
    }

    #[test]
    fn fast_matcher_equals_reference(
        (q, rows) in (1usize..6).prop_flat_map(|d| (vec_of(d), prop::collection::vec(vec_of(d), 1..10)))
    ) {
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let (fast, _) = match_fast(&q, &Candidates::new(refs.clone())).unwrap();
        prop_assert_eq!(fast, match_word(&q, &refs).unwrap());
    }

    #[test]
    fn text_embeddings_round_trip(rows in prop::collection::vec(vec_of(3), 1..20)) {
        let named: Vec<(String, Vec<f64>)> =
            rows.iter().enumerate().map(|(i, r)| (format!("tok{i}"), r.clone())).collect();
        let lib = EmbeddingLibrary::from_rows(3, named).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt");
        lib.write_text(&path).unwrap();
        let back = EmbeddingLibrary::load_text(&path, Some(3)).unwrap();
        prop_assert_eq!(back.words(), lib.words());
        prop_assert_eq!(back.matrix(), lib.matrix());
    }
}
