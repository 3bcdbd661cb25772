use varmp::diagnostics::{write_atomic, CpsTrace, TraceRow, TRACE_HEADER};

fn row(iter: usize, lu: f64) -> TraceRow {
    TraceRow {
        iter,
        energy: 1.0 / (iter + 1) as f64,
        cps: 10f64.powi(-(iter as i32)),
        wu: 1.0,
        wv: 0.5,
        lu,
        lv: 0.1,
        step: 0.25,
    }
}

#[test]
fn export_import_and_linf_monitor() {
    let mut t = CpsTrace::new();
    for (i, lu) in [1.0, 3.0, 2.0].into_iter().enumerate() {
        t.push(row(i, lu)).unwrap();
    }
    assert!(t.push(row(1, 0.0)).is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/trace.csv");
    t.export(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some(TRACE_HEADER));
    assert_eq!(CpsTrace::import(&path).unwrap(), t);

    let ok = t.linf_monitor(5.0);
    assert!(ok.pass && ok.max == 3.0);
    let bad = t.linf_monitor(2.5);
    assert!(!bad.pass && bad.row == Some(1));
    let s = t.summary();
    assert_eq!((s.iters, s.final_cps, s.linf_max), (2, 1e-2, 3.0));
}

#[test]
fn atomic_write_replaces_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.json");
    write_atomic(&p, b"first").unwrap();
    write_atomic(&p, b"second").unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), b"second");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn malformed_csv_is_a_parse_error() {
    let text = format!("{TRACE_HEADER}\n0,1,2,3\n");
    assert!(matches!(
        CpsTrace::read_csv(text.as_bytes()),
        Err(varmp::Error::Parse { line: 2, .. })
    ));
}
