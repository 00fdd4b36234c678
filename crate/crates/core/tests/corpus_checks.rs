use geq_core::corpus;
use geq_core::equiv::{compatibility_residual, l_field, spectral_groups};
use geq_core::fields::nijenhuis;

#[test]
fn corpus_shape() {
    let specs = corpus::levi_civita_specs();
    assert!(specs.len() >= 10);
    for n in 2..=4 {
        assert!(specs.iter().any(|(_, s)| s.chart.dim() == n));
    }
    assert!(specs
        .iter()
        .any(|(_, s)| !s.multiple.is_empty() && !s.simple.is_empty()));
    assert!(specs.iter().any(|(_, s)| s.signs.iter().any(|&x| x < 0.0)));
    let mut names: Vec<_> = specs.iter().map(|(n, _)| *n).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), specs.len());
}

#[test]
fn positive_entries_are_compatible() {
    for e in corpus::positive().unwrap() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let groups = spectral_groups(&l, e.g.chart().base()).unwrap();
        assert!(!groups.is_empty());
        for p in e.g.chart().sample_points(30, 11) {
            let r = compatibility_residual(&e.g, &l, &p).unwrap();
            assert!(r.value <= 1e-9, "{}: {}", e.name, r.value);
            assert!(
                nijenhuis(&l, &p).unwrap().norm() <= 1e-6 * (1.0 + r.dl_norm),
                "{}",
                e.name
            );
        }
    }
}

#[test]
fn negative_entries_are_incompatible() {
    for e in corpus::negative_controls().unwrap() {
        let l = l_field(&e.g, &e.gbar).unwrap();
        let worst =
            e.g.chart()
                .sample_points(30, 11)
                .iter()
                .map(|p| compatibility_residual(&e.g, &l, p).unwrap().value)
                .fold(0.0, f64::max);
        assert!(worst >= 1e-6, "{}: {worst}", e.name);
    }
}
