//! Bundled-fixture behavior: exact annotation hygiene, the trigger-turn
//! matrix across thresholds, exposure comparisons, and byte-identical
//! report emission.

use std::collections::BTreeMap;

use camp_core::{EntityType, RecognizerSet, SensitivityWeights};
use camp_harness::{emit_reports, fixtures, run_scenario, sweep, Mode, RunConfig};

fn recognizers() -> RecognizerSet {
    RecognizerSet::with_defaults(SensitivityWeights::standard())
}

#[test]
fn bundled_fixtures_validate_exactly() {
    let set = recognizers();
    for spec in fixtures::all() {
        spec.validate_exact(&set).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
    }
}

#[test]
fn corpus_recall_is_total_with_exact_surfaces() {
    let set = recognizers();
    let mut per_type: BTreeMap<EntityType, usize> = BTreeMap::new();
    for example in fixtures::structured_corpus() {
        let detected = set.detect(&example.text);
        for w in detected.windows(2) {
            assert!(w[0].end <= w[1].start, "overlap in {:?}", example.text);
        }
        for annotation in &example.entities {
            let hit = detected.iter().any(|s| {
                s.entity_type == annotation.entity_type && s.surface == annotation.surface
            });
            assert!(hit, "missed {annotation:?} in {:?}", example.text);
            *per_type.entry(annotation.entity_type).or_default() += 1;
        }
        // No stray detections either: the corpus is exactly labeled.
        assert_eq!(detected.len(), example.entities.len(), "extras in {:?}", example.text);
    }
    for t in [
        EntityType::Email,
        EntityType::Phone,
        EntityType::Ssn,
        EntityType::CreditCard,
        EntityType::IpAddress,
        EntityType::DateOfBirth,
        EntityType::Salary,
    ] {
        assert!(per_type.get(&t).copied().unwrap_or(0) >= 10, "{t} has fewer than 10 examples");
    }
}

#[test]
fn trigger_turn_matrix_across_thresholds() {
    let taus = [1.5, 2.0, 2.5];
    let expected: [(&str, [usize; 3]); 4] =
        [("S1", [4, 4, 4]), ("S2", [2, 2, 2]), ("S3", [2, 2, 3]), ("S4", [3, 5, 5])];
    for (spec, (id, triggers)) in fixtures::all().iter().zip(expected) {
        assert_eq!(spec.id, id);
        let table = sweep(spec, &taus, 0.3, 0).unwrap();
        let got: Vec<Option<usize>> = table.rows.iter().map(|r| r.trigger_turn).collect();
        let want: Vec<Option<usize>> = triggers.iter().map(|t| Some(*t)).collect();
        assert_eq!(got, want, "{id} trigger turns");
    }
}

#[test]
fn exposure_comparison_at_default_threshold() {
    let cfg = RunConfig::default();
    for spec in fixtures::all() {
        let camp = run_scenario(&spec, Mode::Camp, &cfg).unwrap();
        let baseline = run_scenario(&spec, Mode::PerTurnBaseline, &cfg).unwrap();
        let none = run_scenario(&spec, Mode::NoProtection, &cfg).unwrap();
        assert_eq!(camp.exposure_final, 0, "{}", spec.id);
        assert!(baseline.exposure_final >= 3, "{}", spec.id);
        assert_eq!(none.exposure_final, spec.annotated_types().len(), "{}", spec.id);
        assert!(none.trigger_turn.is_none() && baseline.trigger_turn.is_none());
    }
}

#[test]
fn cpe_series_non_decreasing_everywhere() {
    let cfg = RunConfig::default();
    for spec in fixtures::all() {
        for mode in Mode::ALL {
            let report = run_scenario(&spec, mode, &cfg).unwrap();
            assert_eq!(report.cpe_series.len(), spec.turn_count());
            assert!(
                report.cpe_series.windows(2).all(|w| w[0] <= w[1]),
                "{} {mode} series decreases",
                spec.id
            );
        }
    }
}

#[test]
fn emitted_reports_are_byte_identical_across_runs() {
    let cfg = RunConfig { tau: 2.0, alpha: 0.3, seed: 7 };
    let spec = fixtures::s1();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let reports = vec![
            run_scenario(&spec, Mode::Camp, &cfg).unwrap(),
            run_scenario(&spec, Mode::PerTurnBaseline, &cfg).unwrap(),
        ];
        emit_reports(&reports, dir.path()).unwrap();
    }
    let mut names: Vec<String> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    // Both modes share one series file (same scenario and tau).
    assert_eq!(names.len(), 4, "summary + 2 json + 1 series");
    for name in names {
        let a = std::fs::read(dirs[0].path().join(&name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn twelve_summary_rows_for_full_grid() {
    let mut reports = Vec::new();
    for spec in fixtures::all() {
        for tau in [1.5, 2.0, 2.5] {
            reports
                .push(run_scenario(&spec, Mode::Camp, &RunConfig { tau, alpha: 0.3, seed: 0 }).unwrap());
        }
    }
    let csv = camp_harness::summary_csv(&reports);
    assert_eq!(csv.lines().count(), 13, "header plus 12 rows");
}
