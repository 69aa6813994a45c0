use std::io::Write;

use pi_core::ast::{parse_query, unparse, sql_catalog, SQL_SUBSET};
use pi_core::gen::{generate_olap_log, OlapGenConfig, OLAP_STATEMENTS};
use pi_core::log::{write_log, QueryEntry, QueryLog};
use pi_core::mining::LabelKind;
use pi_core::pilang::parse_pilang;
use pi_core::pipeline::{apply_widgets, pipeline, replay_trace, run_pipeline, ApplyError, InterfaceSpec, PipelineError, PipelineOpts, WidgetState};
use pi_core::synth::{WidgetType, WidgetValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn olap(steps: usize) -> (QueryLog, InterfaceSpec) {
    let log = QueryLog { entries: generate_olap_log(&OlapGenConfig { steps, ..Default::default() }).unwrap(), rejected: vec![] };
    let spec = pipeline(&log, &parse_pilang(OLAP_STATEMENTS).unwrap(), &PipelineOpts::default()).unwrap().1;
    (log, spec)
}

#[test]
fn olap_log_fits_one_interface_and_every_claim_replays() {
    let (log, spec) = olap(150);
    assert_eq!(spec.interfaces.len(), 1);
    assert_eq!(spec.meta.coverage, 1.0);
    assert!(spec.coverage_met());
    let i = &spec.interfaces[0];
    assert_eq!(i.closure.len(), log.entries.len());
    let rebuilt = replay_trace(&spec, &i.id).unwrap();
    for e in &log.entries {
        assert_eq!(rebuilt[&e.pid], e.ast, "{}", e.pid);
    }
}

#[test]
fn random_walks_only_reach_parseable_queries() {
    let (_, spec) = olap(120);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in &spec.interfaces {
        let mut current = i.initial_query.clone();
        let mut applied = 0;
        for _ in 0..100 {
            let w = &i.widgets[rng.gen_range(0..i.widgets.len())];
            let value = match w.kind {
                LabelKind::Collection => WidgetValue::Set(w.domain.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()),
                _ => WidgetValue::Tuple(w.domain[rng.gen_range(0..w.domain.len())].clone()),
            };
            let state: WidgetState = [(w.id.clone(), value)].into();
            match apply_widgets(&spec, &i.id, &state, Some(&current)) {
                Ok((sql, ast)) => {
                    assert_eq!(parse_query(&sql, SQL_SUBSET).unwrap(), ast, "{sql}");
                    current = sql;
                    applied += 1;
                }
                // a structural widget may have removed what this one edits
                Err(ApplyError::PathNotFound { .. }) => {}
                Err(e) => panic!("{}: {e}", w.id),
            }
        }
        assert!(applied > 50);
    }
}

#[test]
fn same_inputs_same_bytes() {
    assert_eq!(olap(80).1.to_json(), olap(80).1.to_json());
}

#[test]
fn collection_state_rewrites_the_list() {
    let log = QueryLog {
        entries: ["SELECT a, b, c FROM t", "SELECT a, d FROM t"].iter().enumerate().map(|(i, q)| QueryEntry::parse(format!("q{i}"), *q).unwrap()).collect(),
        rejected: vec![],
    };
    let s = parse_pilang("FROM Project/* AS C MATCH project-change(C)").unwrap();
    let spec = pipeline(&log, &s, &PipelineOpts::default()).unwrap().1;
    assert_eq!(spec.interfaces.len(), 1);
    let w = &spec.interfaces[0].widgets;
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].kind, LabelKind::Collection);
    assert!(w[0].type_id.collection_capable());
    let pick = |c: &str| w[0].domain.iter().find(|t| t.iter().any(|v| v.as_str() == Some(c))).unwrap().clone();
    let state: WidgetState = [(w[0].id.clone(), WidgetValue::Set(vec![pick("b"), pick("d")]))].into();
    let (sql, ast) = apply_widgets(&spec, "i0", &state, None).unwrap();
    assert_eq!(ast, parse_query("SELECT b, d FROM t", SQL_SUBSET).unwrap());
    assert_eq!(parse_query(&sql, SQL_SUBSET).unwrap(), ast);
    let outside = vec![pi_core::ast::Value::from("zz")];
    let bad: WidgetState = [(w[0].id.clone(), WidgetValue::Set(vec![outside]))].into();
    assert!(matches!(apply_widgets(&spec, "i0", &bad, None), Err(ApplyError::DomainViolation { .. })));
}

#[test]
fn textbox_takes_any_value() {
    let log = QueryLog {
        entries: ["SELECT m FROM t WHERE x = 'a'", "SELECT m FROM t WHERE x = 'b'"].iter().enumerate().map(|(i, q)| QueryEntry::parse(format!("q{i}"), *q).unwrap()).collect(),
        rejected: vec![],
    };
    let s = parse_pilang("FROM Where//* AS T MATCH literal-change(T)").unwrap();
    let mut opts = PipelineOpts::default();
    opts.synth.types = vec![WidgetType::Textbox];
    // a textbox costs more than c0 = 1, so raise it to make merging pay
    opts.synth.c0 = 2.0;
    let spec = pipeline(&log, &s, &opts).unwrap().1;
    let w = &spec.interfaces[0].widgets[0];
    assert_eq!(w.type_id, WidgetType::Textbox);
    let state: WidgetState = [(w.id.clone(), WidgetValue::Tuple(vec!["zebra".into()]))].into();
    let (sql, _) = apply_widgets(&spec, "i0", &state, None).unwrap();
    assert_eq!(sql, unparse(&parse_query("SELECT m FROM t WHERE x = 'zebra'", SQL_SUBSET).unwrap(), sql_catalog()).unwrap());
}

#[test]
fn files_in_spec_out() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("log.jsonl");
    let entries = generate_olap_log(&OlapGenConfig { steps: 40, ..Default::default() }).unwrap();
    write_log(&entries, std::fs::File::create(&log_path).unwrap()).unwrap();
    let pil = dir.path().join("olap.pil");
    std::fs::write(&pil, OLAP_STATEMENTS).unwrap();
    let (_, spec) = run_pipeline(&log_path, &pil, &PipelineOpts::default()).unwrap();
    assert_eq!(spec.meta.log_size, 40);
    assert_eq!(spec.meta.coverage, 1.0);

    let empty = dir.path().join("empty.pil");
    std::fs::write(&empty, "").unwrap();
    let (_, spec) = run_pipeline(&log_path, &empty, &PipelineOpts::default()).unwrap();
    let distinct: std::collections::BTreeSet<_> = entries.iter().map(|e| e.ast.clone()).collect();
    assert_eq!(spec.interfaces.len(), distinct.len());
    assert_eq!(spec.meta.coverage, 1.0);
    assert!((spec.meta.total_cost - distinct.len() as f64).abs() < 1e-9);

    let broken = dir.path().join("broken.pil");
    std::fs::write(&broken, "FROM Where//* AS T\nMATCH (").unwrap();
    let e = run_pipeline(&log_path, &broken, &PipelineOpts::default()).unwrap_err();
    assert!(matches!(e, PipelineError::Pilang { .. }));
    assert!(e.to_string().contains("broken.pil") && e.to_string().contains("line 2"), "{e}");

    let bad_log = dir.path().join("bad.jsonl");
    let mut f = std::fs::File::create(&bad_log).unwrap();
    writeln!(f, r#"{{"pid": "a", "query": "SELECT x FROM t"}}"#).unwrap();
    writeln!(f, "not json").unwrap();
    let e = run_pipeline(&bad_log, &pil, &PipelineOpts::default()).unwrap_err();
    assert!(e.to_string().contains("bad.jsonl") && e.to_string().contains('2'), "{e}");
}

#[test]
fn unparseable_entries_count_against_coverage() {
    let mut log = QueryLog { entries: vec![QueryEntry::parse("a", "SELECT x FROM t").unwrap()], rejected: vec![] };
    let text = r#"{"pid": "b", "query": "SELEKT"}"#;
    let parsed = pi_core::log::read_log(std::io::Cursor::new(text)).unwrap();
    log.rejected = parsed.rejected;
    let spec = pipeline(&log, &[], &PipelineOpts::default()).unwrap().1;
    assert_eq!(spec.meta.log_size, 2);
    assert_eq!(spec.meta.coverage, 0.5);
    assert!(!spec.coverage_met());
}
