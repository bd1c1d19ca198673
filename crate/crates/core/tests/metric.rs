mod common;

use nsbench::param::{delta_change, ParamValue};
use proptest::prelude::*;

fn cat(p: &[f64]) -> ParamValue {
    let support: Vec<String> = (0..p.len()).map(|i| format!("s{i}")).collect();
    ParamValue::categorical(p.to_vec(), support).unwrap()
}

fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, n).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.iter().map(|x| x / total).collect()
    })
}

fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..8).prop_flat_map(|n| (dist(n), dist(n), dist(n)))
}

proptest! {
    #[test]
    fn matches_transport_oracle((p, q, _) in triple()) {
        let got = delta_change(&cat(&p), &cat(&q)).unwrap();
        prop_assert!((got - common::transport_w1(&p, &q)).abs() < 1e-9);
    }

    #[test]
    fn metric_laws((p, q, r) in triple()) {
        let d = |a: &[f64], b: &[f64]| delta_change(&cat(a), &cat(b)).unwrap();
        prop_assert!(d(&p, &p).abs() < 1e-12);
        prop_assert!(d(&p, &q) >= 0.0);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
        // on unit-spaced support the distance never exceeds the support width
        prop_assert!(d(&p, &q) <= (p.len() - 1) as f64 + 1e-12);
    }

    #[test]
    fn scalar_delta_is_absolute_difference(a in -100.0f64..100.0, b in -100.0f64..100.0) {
        let lo = -1000.0;
        let hi = 1000.0;
        let d = delta_change(&ParamValue::scalar(a, lo, hi).unwrap(), &ParamValue::scalar(b, lo, hi).unwrap()).unwrap();
        prop_assert_eq!(d, (a - b).abs());
    }
}

#[test]
fn point_masses_are_index_distance() {
    for i in 0..4 {
        for j in 0..4 {
            let mut p = vec![0.0; 4];
            let mut q = vec![0.0; 4];
            p[i] = 1.0;
            q[j] = 1.0;
            let d = delta_change(&cat(&p), &cat(&q)).unwrap();
            assert!((d - (i as f64 - j as f64).abs()).abs() < 1e-12);
        }
    }
}
