use edgecolor_core::driver::Resolution;
use edgecolor_core::exchange::{audit, Certificate};
use edgecolor_core::oracle::{self, corpus, fixtures, pendant_core, tight};
use edgecolor_core::{
    color_multigraph, replay, Bundle, ColoringRun, DriverConfig, DriverError, Mode, Multigraph, Outcome,
};
use proptest::prelude::*;

fn audited() -> DriverConfig {
    DriverConfig {
        keep_certificates: true,
        ..Default::default()
    }
}

fn strict(k: usize) -> DriverConfig {
    DriverConfig {
        mode: Mode::Strict,
        k_override: Some(k),
        ..Default::default()
    }
}

/// Everything a finished run promises about itself.
fn check_run(g: &Multigraph, run: &ColoringRun) {
    let phi = run.coloring(g).unwrap();
    assert!(phi.is_complete());
    assert!(oracle::is_proper(g, &run.colors, run.k_final));
    assert!(run.colors.iter().all(|&c| (1..=run.k_final).contains(&c)));
    assert!(run.stats.passes <= g.edge_count());
    let initial = run.initial_coloring(g).unwrap();
    assert_eq!(replay(g, &initial, &run.log).unwrap().assignment(), &run.colors[..]);
    for w in &run.witnesses {
        w.verify(g).unwrap();
        assert!(w.refuted < run.k_final);
    }
    for step in &run.reductions {
        assert!(step.to < step.from, "{} -> {}", step.from, step.to);
    }
    for cert in &run.certificates {
        audit(g, cert).unwrap();
    }
}

#[test]
fn named_graphs() {
    let run = color_multigraph(&fixtures::k2(), &DriverConfig::default()).unwrap();
    assert_eq!((run.colors_used, run.k_final), (1, 2));
    let p = fixtures::petersen();
    let run = color_multigraph(&p, &DriverConfig::default()).unwrap();
    check_run(&p, &run);
    assert_eq!(run.colors_used, oracle::chromatic_index_exact(&p).unwrap());
    for mu in 1..=4 {
        let g = fixtures::shannon(mu);
        let run = color_multigraph(&g, &DriverConfig::default()).unwrap();
        check_run(&g, &run);
        assert_eq!(run.colors_used, oracle::gamma_exact(&g).unwrap().0);
    }
}

#[test]
fn strict_refusals() {
    let g = fixtures::shannon(2);
    match color_multigraph(&g, &strict(5)) {
        Err(DriverError::Insufficient { k: 5, witness }) => {
            assert_eq!(witness.vertices, vec![0, 1, 2]);
            witness.verify(&g).unwrap();
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        color_multigraph(&fixtures::shannon(1), &strict(2)),
        Err(DriverError::Insufficient { k: 2, .. })
    ));
    assert!(matches!(
        color_multigraph(&fixtures::path(3), &strict(1)),
        Err(DriverError::DegreeExceedsPalette { k: 1, vertex: 1, degree: 2 })
    ));
    assert!(matches!(
        color_multigraph(&fixtures::petersen(), &strict(3)),
        Err(DriverError::PaletteBelowDegree { k: 3, needed: 4 })
    ));
    let run = color_multigraph(&fixtures::petersen(), &strict(6)).unwrap();
    assert_eq!(run.k_final, 6);
}

#[test]
fn corpus_within_bound() {
    for (n, seed, g) in corpus(30) {
        let rep = oracle::report(&g).unwrap();
        let run = color_multigraph(&g, &audited()).unwrap();
        check_run(&g, &run);
        assert!(run.escalations.is_empty());
        assert!(
            rep.chromatic_index <= run.colors_used && run.colors_used <= rep.bound,
            "gen({n}, {seed}): used {} outside [{}, {}]",
            run.colors_used,
            rep.chromatic_index,
            rep.bound
        );
    }
}

#[test]
fn tight_families_exercise_the_reducer() {
    let mut reduce_calls = 0;
    let mut reduced = 0;
    for seed in 0..40 {
        let g = tight(seed);
        let run = color_multigraph(&g, &audited()).unwrap();
        check_run(&g, &run);
        assert!(run.escalations.is_empty(), "seed {seed}: {:?}", run.escalations[0].stress);
        assert_eq!(run.k_final, g.max_degree() + 1);
        reduce_calls += run.stats.reduce_calls;
        reduced += run
            .certificates
            .iter()
            .filter(|c| matches!(c, Certificate::Reduced { .. }))
            .count();
    }
    assert!(reduce_calls > 0 && reduced > 0);
    for (c, mu) in [(5, 2), (7, 2), (9, 3)] {
        let g = pendant_core(c, mu);
        let run = color_multigraph(&g, &audited()).unwrap();
        check_run(&g, &run);
        assert_eq!(run.colors_used, mu * c);
    }
}

#[test]
fn runs_are_deterministic() {
    for g in [fixtures::petersen(), tight(3), oracle::gen(9, 4)] {
        let a = color_multigraph(&g, &audited()).unwrap();
        let b = color_multigraph(&g, &audited()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}

#[test]
fn exhausted_budget_escalates_with_a_replayable_bundle() {
    let g = fixtures::shannon(3);
    let cfg = DriverConfig {
        edge_budget: Some(0),
        ..Default::default()
    };
    let result = color_multigraph(&g, &cfg);
    let run = result.as_ref().unwrap();
    check_run(&g, run);
    assert!(!run.escalations.is_empty());
    assert!(run.escalations.iter().all(|e| e.resolution != Resolution::Failed));
    let bundle = Bundle::parse(&Bundle::new(&g, &cfg, &result).to_json()).unwrap();
    let again = bundle.replay().unwrap();
    assert!(again.matches);
    let Outcome::Colored { escalations, .. } = again.outcome else {
        panic!("expected a coloring");
    };
    assert_eq!(escalations, run.escalations);
}

#[test]
fn strict_budget_failure_is_reported() {
    let g = fixtures::shannon(3);
    let cfg = DriverConfig {
        mode: Mode::Strict,
        edge_budget: Some(0),
        ..Default::default()
    };
    match color_multigraph(&g, &cfg) {
        Err(DriverError::Unresolved { record, run }) => {
            assert_eq!(record.resolution, Resolution::Failed);
            assert_eq!(record.k, run.k_final);
        }
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_multigraphs_meet_the_bound(n in 3usize..8, pairs in prop::collection::vec((0usize..8, 0usize..8), 1..22)) {
        let edges: Vec<_> = pairs.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
        prop_assume!(!edges.is_empty());
        let g = Multigraph::new(n, &edges).unwrap();
        let rep = oracle::report(&g).unwrap();
        let run = color_multigraph(&g, &audited()).unwrap();
        check_run(&g, &run);
        prop_assert!(rep.chromatic_index <= run.colors_used);
        prop_assert!(run.colors_used <= rep.bound);
    }
}
