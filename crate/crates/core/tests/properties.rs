//! Property tests over randomly perturbed metrics written in the spec
//! grammar.

use proptest::prelude::*;

use curvsym::curvature::{curvature_bundle, trace_residual, DiffConfig};
use curvsym::metricspace::{parse_metric_spec, ChartPoint, MetricField};

#[derive(Debug, Clone)]
struct Wave {
    amp: f64,
    k: Vec<f64>,
    phase: f64,
}

fn wave(n: usize, amp: f64) -> impl Strategy<Value = Wave> {
    (-amp..amp, prop::collection::vec(-1.5f64..1.5, n), 0.0f64..6.0).prop_map(|(amp, k, phase)| Wave { amp, k, phase })
}

fn render(w: &Wave, coords: &[&str]) -> String {
    let arg: Vec<String> = w.k.iter().zip(coords).map(|(k, c)| format!("{k:?}*{c}")).collect();
    format!("{:?}*sin({} + {:?})", w.amp, arg.join(" + "), w.phase)
}

const COORDS: [&str; 4] = ["x", "y", "z", "w"];

/// `g_ij = δ_ij + small waves`, optionally times `exp(2f)` with `f` linear.
fn metric_text(n: usize, waves: &[Wave], conformal: Option<&[f64]>) -> String {
    let coords = &COORDS[..n];
    let mut s = format!("dim {n}\ncoords {}\n", coords.join(" "));
    let factor = conformal.map(|a| {
        let f: Vec<String> = a.iter().zip(coords).map(|(a, c)| format!("{a:?}*{c}")).collect();
        format!(" * exp(2*({}))", f.join(" + "))
    });
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let base = if i == j { "1 + " } else { "" };
            s += &format!("g {i} {j} = ({base}{}){}\n", render(&waves[k], coords), factor.clone().unwrap_or_default());
            k += 1;
        }
    }
    s
}

fn perturbed(n: usize) -> impl Strategy<Value = (Vec<Wave>, Vec<f64>)> {
    let m = n * (n + 1) / 2;
    (
        prop::collection::vec(wave(n, 0.1), m),
        prop::collection::vec(-0.5f64..0.5, n),
    )
}

fn field(text: &str) -> MetricField {
    parse_metric_spec(text).unwrap()
}

fn point(x: &[f64]) -> ChartPoint {
    ChartPoint::new(x.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jet_and_differences_agree((waves, x) in perturbed(3)) {
        let f = field(&metric_text(3, &waves, None));
        let p = point(&x);
        let a = curvature_bundle(&f, &p, &DiffConfig::default()).unwrap();
        let b = curvature_bundle(&f, &p, &DiffConfig::finite_difference(1e-4)).unwrap();
        let d = a.r04.axpy(-1.0, &b.r04).norm_inf() / (1.0 + a.r04.norm_inf());
        prop_assert!(d <= 1e-5, "{}", d);
    }

    #[test]
    fn curvature_symmetries_and_bianchi((waves, x) in perturbed(4)) {
        let f = field(&metric_text(4, &waves, None));
        let b = curvature_bundle(&f, &point(&x), &DiffConfig::default()).unwrap();
        prop_assert!(b.r04.curvature_like_residual().max() <= 1e-9);
        prop_assert!(b.rr.proposition_residuals().max() <= 1e-8);
        prop_assert!(b.tach_r.proposition_residuals().max() <= 1e-8);
    }

    #[test]
    fn weyl_is_trace_free((waves, x) in perturbed(4)) {
        let f = field(&metric_text(4, &waves, None));
        let b = curvature_bundle(&f, &point(&x), &DiffConfig::default()).unwrap();
        prop_assert!(trace_residual(&b.weyl, &b.g_inv) <= 1e-9);
    }

    #[test]
    fn weyl_is_conformally_invariant((waves, x) in perturbed(4), a in prop::collection::vec(-0.4f64..0.4, 4)) {
        let f = field(&metric_text(4, &waves, None));
        let h = field(&metric_text(4, &waves, Some(&a)));
        let p = point(&x);
        let bf = curvature_bundle(&f, &p, &DiffConfig::default()).unwrap();
        let bh = curvature_bundle(&h, &p, &DiffConfig::default()).unwrap();
        // the (0,4) Weyl tensor picks up the conformal factor once
        let e2f = (2.0 * a.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>()).exp();
        let d = bh.weyl.axpy(-e2f, &bf.weyl).norm_inf() / (1.0 + bh.weyl.norm_inf());
        prop_assert!(d <= 1e-9, "{}", d);
    }
}
