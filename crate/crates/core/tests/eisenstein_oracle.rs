use eisenlab_core::eisenstein::{coset_sum_eval, eval_eisenstein, EisensteinSeries};
use eisenlab_core::halfplane::{
    act_int, random_gamma0, random_point_in_f, reduce_to_fundamental_domain, Cusp, HalfPlanePoint,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn expansion_agrees_with_coset_sum_at_s2() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = Complex64::new(2.0, 0.0);
    let mut worst: f64 = 0.0;
    for (q, cusp) in [
        (1, Cusp::Infinity),
        (5, Cusp::Infinity),
        (5, Cusp::Zero),
        (11, Cusp::Infinity),
        (11, Cusp::Zero),
    ] {
        for _ in 0..5 {
            let z = random_point_in_f(&mut rng);
            let e = eval_eisenstein(q, cusp, &z, s, 1e-12).unwrap();
            let o = coset_sum_eval(q, cusp, &z, s, 300.0).unwrap();
            let diff = (e - o.value).norm();
            worst = worst.max(diff / o.tail);
            assert!(
                diff <= o.tail + 1e-8,
                "q={q} {cusp:?} z={z:?}: {e} vs {} (tail {})",
                o.value,
                o.tail
            );
            // Omitted cosets contribute positive terms at real s.
            assert!(
                e.re - o.value.re >= -1e-10,
                "partial sum exceeds the series"
            );
            assert!(e.im.abs() < 1e-12);
        }
    }
    println!("worst diff / tail = {worst}");
}

#[test]
fn expansion_at_cusp_zero_matches_oracle_off_axis() {
    let z = HalfPlanePoint::new(0.1, 1.2).unwrap();
    let s = Complex64::new(2.0, 0.0);
    let e = eval_eisenstein(5, Cusp::Zero, &z, s, 1e-12).unwrap();
    let o = coset_sum_eval(5, Cusp::Zero, &z, s, 600.0).unwrap();
    assert!((e - o.value).norm() <= o.tail + 1e-8);
}

#[test]
fn abs2_is_gamma0_invariant_on_critical_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in [5u64, 11] {
        for t in [1.0, 5.0] {
            let s = Complex64::new(0.5, t);
            let series = EisensteinSeries::new(q, Cusp::Infinity, s).unwrap();
            for _ in 0..5 {
                let z = random_point_in_f(&mut rng);
                let g = random_gamma0(q, 50, &mut rng);
                let gz = act_int(&g, &z).unwrap();
                let a = series.eval_expansion(&z, 1e-13).unwrap().norm_sqr();
                let b = series.eval_anywhere(&gz, 1e-13).unwrap().norm_sqr();
                assert!(
                    (a - b).abs() <= 1e-7 * a.max(1e-3),
                    "q={q} t={t} g={g}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn anywhere_matches_coset_sum_at_low_height() {
    // Points far below the fundamental domain exercise the Fricke route.
    let s = Complex64::new(2.0, 0.0);
    for cusp in [Cusp::Infinity, Cusp::Zero] {
        let series = EisensteinSeries::new(5, cusp, s).unwrap();
        for (x, y) in [(0.37, 0.11), (-0.2, 0.3), (1.7, 0.05)] {
            let w = HalfPlanePoint::new(x, y).unwrap();
            let (z, _) = reduce_to_fundamental_domain(&w);
            assert!(z.y() > y);
            let e = series.eval_anywhere(&w, 1e-12).unwrap();
            let o = coset_sum_eval(5, cusp, &w, s, 400.0).unwrap();
            assert!(
                (e - o.value).norm() <= o.tail + 1e-8,
                "{cusp:?} w=({x},{y}): {e} vs {}",
                o.value
            );
        }
    }
}
