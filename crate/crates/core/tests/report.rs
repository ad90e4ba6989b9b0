//! Golden renderings of hand-built results tables.

use std::path::PathBuf;

use dimcf::bench::{
    render_report, FailureRecord, Method, Metric, PerturbationKind, ResultsTable, RunRecord,
};

fn record(repetition: usize, sample: usize, method: Method, vals: [f64; 3], recall: Option<f64>) -> RunRecord {
    RunRecord {
        repetition,
        sample,
        method,
        members: 3,
        cf_sparse: vals[0],
        cf_div: vals[1],
        cf_dist: vals[2],
        recall,
    }
}

fn table(name: &str, perturbation: PerturbationKind, records: Vec<RunRecord>, failures: Vec<FailureRecord>) -> ResultsTable {
    let mut rt = ResultsTable {
        name: name.into(),
        dataset: "toy(20x4)".into(),
        projector: "linear".into(),
        perturbation,
        k: 3,
        repetitions: 2,
        samples_per_repetition: 2,
        summaries: Vec::new(),
        rankings: Vec::new(),
        records,
        failures,
    };
    rt.summarize();
    rt
}

fn plain() -> ResultsTable {
    table(
        "plain",
        PerturbationKind::None,
        vec![
            record(0, 0, Method::Algo1, [0.25, 0.0, 0.5], None),
            record(0, 0, Method::ModelAgnos, [1.0, 4.0, 2.0], None),
            record(0, 1, Method::Algo1, [0.75, 0.0, 1.5], None),
            record(0, 1, Method::ModelAgnos, [1.0, 2.0, 3.0], None),
        ],
        Vec::new(),
    )
}

fn shifted() -> ResultsTable {
    table(
        "shifted",
        PerturbationKind::Shift,
        vec![
            record(0, 3, Method::Algo1, [0.5, 0.0, 0.1], Some(2.0 / 3.0)),
            record(1, 7, Method::Algo1, [0.5, 0.0, 0.3], Some(1.0)),
            record(0, 3, Method::ModelAgnos, [1.0, 3.0, 1.0], Some(1.0)),
            record(1, 7, Method::ModelAgnos, [1.0, 3.0, 1.0], Some(1.0)),
        ],
        vec![FailureRecord {
            repetition: 1,
            sample: 9,
            method: Method::Algo1,
            error: "infeasible counterfactual: margin not reached".into(),
        }],
    )
}

/// Every Algo1 request failed, so its summaries are undefined.
fn one_sided() -> ResultsTable {
    table(
        "one-sided",
        PerturbationKind::Gaussian,
        vec![record(0, 1, Method::ModelAgnos, [0.5, 1.0, 1e-7], Some(0.0))],
        vec![FailureRecord {
            repetition: 0,
            sample: 1,
            method: Method::Algo1,
            error: "solver failed".into(),
        }],
    )
}

fn check_golden(name: &str, ext: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}.{ext}"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{} differs; rerun with UPDATE_GOLDEN=1 after intended changes", path.display());
}

#[test]
fn summaries_match_hand_computation() {
    let rt = plain();
    let s = rt.summary(Method::Algo1, Metric::CfSparse).unwrap();
    assert_eq!((s.mean, s.std, s.runs), (0.5, 0.25, 2));
    let s = rt.summary(Method::ModelAgnos, Metric::CfDiv).unwrap();
    assert_eq!((s.mean, s.std), (3.0, 1.0));
    assert!(rt.summary(Method::Algo1, Metric::Recall).is_none());
    // CfDiv counts overlap, so lower wins there too.
    assert_eq!(rt.ranking(Method::Algo1).unwrap().wins, 3);
    assert_eq!(rt.ranking(Method::ModelAgnos).unwrap().wins, 0);

    let rt = shifted();
    let s = rt.summary(Method::Algo1, Metric::Recall).unwrap();
    assert!((s.mean - 5.0 / 6.0).abs() < 1e-15);
    assert!((s.std - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(rt.ranking(Method::Algo1).unwrap().compared, 4);
}

#[test]
fn plain_table_renders_to_golden() {
    let report = render_report(&plain()).unwrap();
    check_golden("plain", "txt", &report.text);
    check_golden("plain", "json", &report.json);
    check_golden("plain", "csv", &report.csv);
}

#[test]
fn shifted_table_renders_to_golden() {
    let report = render_report(&shifted()).unwrap();
    assert!(report.text.contains("failed requests: 1"));
    check_golden("shifted", "txt", &report.text);
    check_golden("shifted", "json", &report.json);
    check_golden("shifted", "csv", &report.csv);
}

#[test]
fn one_sided_table_renders_to_golden() {
    let report = render_report(&one_sided()).unwrap();
    assert!(report.csv.contains("Algo1,CfSparse,NaN,NaN,0"));
    assert!(report.csv.contains("1e-7"));
    check_golden("one-sided", "txt", &report.text);
    check_golden("one-sided", "json", &report.json);
    check_golden("one-sided", "csv", &report.csv);
}

#[test]
fn json_report_round_trips() {
    for rt in [plain(), shifted()] {
        let report = render_report(&rt).unwrap();
        let back: ResultsTable = serde_json::from_str(&report.json).unwrap();
        assert_eq!(back, rt);
        assert_eq!(render_report(&back).unwrap(), report);
    }
}
