use doa_web::{double_gamma_impl, order_scores_impl, spectra_impl};

#[test]
fn spectra_layout_and_peaks() {
    let out = spectra_impl(16, 2, 64, 20.0, 0.0, 1, 2, 1.0).unwrap();
    assert_eq!(out.len(), 3 * 180);
    let (grid, rest) = out.split_at(180);
    let music = &rest[180..];
    assert_eq!(grid[0], 0.0);
    assert!(music.iter().all(|v| *v <= 0.0));
    let best = music.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!([10.0, 95.0].iter().any(|t| (grid[best] - t).abs() <= 1.0));
}

#[test]
fn order_scores_find_sources() {
    for method in ["pca", "music", "dtft"] {
        let out = order_scores_impl(16, 2, 64, 20.0, 0.0, 3, 5, method).unwrap();
        assert_eq!(out.len(), 7);
        assert_eq!(out[0], 2.0, "{method}: {out:?}");
    }
    assert!(order_scores_impl(16, 2, 64, 20.0, 0.0, 3, 5, "nope").is_err());
}

#[test]
fn double_gamma_curves_integrate_to_one() {
    let n = 4000;
    let out = double_gamma_impl(2, 3, 1.0, 1.0, 40.0, n).unwrap();
    assert!((out[0] - 0.6875).abs() < 1e-12);
    let dx = 40.0 / n as f64;
    for branch in 0..2 {
        let pdf = &out[1 + n * (branch + 1)..1 + n * (branch + 2)];
        let mass: f64 = pdf.iter().sum::<f64>() * dx;
        assert!((mass - 1.0).abs() < 1e-3, "{mass}");
    }
}
