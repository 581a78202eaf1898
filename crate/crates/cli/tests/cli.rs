use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn threeap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_threeap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_result(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(o)).unwrap();
    doc["result"].clone()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn ratio(s: &str) -> f64 {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap()
}

#[test]
fn count_documents() {
    let dir = tempfile::tempdir().unwrap();
    let full = write(dir.path(), "a.json", r#"{"modulus":5,"elements":[1,2,3,4]}"#);
    let r = json_result(&threeap(&["count", &full]));
    assert_eq!(r["t3"], 12);

    let empty = write(dir.path(), "e.json", r#"{"modulus":7,"elements":[]}"#);
    assert_eq!(json_result(&threeap(&["count", &empty]))["t3"], 0);

    let bad = write(dir.path(), "b.json", r#"{"modulus":5,"elements":[5]}"#);
    let o = threeap(&["count", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());

    let junk = write(dir.path(), "j.json", "not json");
    assert_eq!(threeap(&["count", &junk]).status.code(), Some(2));
    assert_eq!(threeap(&["count", "/nonexistent/set.json"]).status.code(), Some(2));
}

#[test]
fn integer_search_reports_both_witnesses() {
    let r = json_result(&threeap(&["search", "5", "--integers"]));
    assert_eq!(r["result"]["value"], 13);
    let tags: Vec<&str> = r["classifications"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["tag"].as_str().unwrap())
        .collect();
    assert_eq!(tags, ["E(2,0)", "E(1,1)"]);
}

#[test]
fn modular_search_and_guards() {
    let r = json_result(&threeap(&["search", "4", "-N", "5"]));
    assert_eq!(r["result"]["value"], 12);
    let via = json_result(&threeap(&["search", "4", "--N", "5", "--via-complement"]));
    assert_eq!(via["result"]["witnesses"], r["result"]["witnesses"]);

    let o = threeap(&["search", "10", "-N", "101"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty(), "no partial result on budget exhaustion");

    assert_eq!(threeap(&["search", "4", "-N", "6"]).status.code(), Some(2));
    assert_eq!(threeap(&["search", "4"]).status.code(), Some(2));
    assert_eq!(threeap(&["search", "4", "-N", "5", "--budget-nodes", "0"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let o = threeap(&["verify", "complement", "--N", "7", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# threeap"));
    assert!(text.lines().nth(1).unwrap() == "case,lhs,rhs,holds");

    let r = json_result(&threeap(&["verify", "extremal-int", "--n-max", "8"]));
    assert_eq!(r["passed"], true);
    let values: Vec<&Value> = r["cases"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["case"].as_str().unwrap().starts_with("value-"))
        .collect();
    assert_eq!(values.len(), 8);
    for (n, c) in (1u64..).zip(values) {
        assert_eq!(c["lhs"].as_str().unwrap(), (n * n).div_ceil(2).to_string());
    }

    let r = json_result(&threeap(&["verify", "t3-energy", "--cases", "1000", "--seed", "1"]));
    assert_eq!(r["violations"], 0);

    assert_eq!(threeap(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn bounds_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.json");
    let ledger = ledger.to_str().unwrap();
    json_result(&threeap(&["bounds", "build", "--ledger", ledger, "--q", "24"]));
    let stats = json_result(&threeap(&["bounds", "closure", "--ledger", ledger]));
    assert_eq!(stats["consistent"], true);
    assert_eq!(stats["converged"], true);

    let best = json_result(&threeap(&["bounds", "query", "--ledger", ledger, "--alpha", "1/4"]));
    let m3_upper = best
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["target"] == "m3" && r["side"] == "upper")
        .expect("m3(1/4) upper bound");
    assert!(ratio(m3_upper["value"].as_str().unwrap()) <= 25.0 / 2304.0);

    let csv = stdout(&threeap(&["bounds", "export", "--ledger", ledger, "--format", "csv"]));
    assert_eq!(csv.lines().nth(1), Some("target,alpha,side,value,provenance"));

    let corrupt = write(dir.path(), "corrupt.json", "{\"grid\": 3}");
    assert_eq!(threeap(&["bounds", "export", "--ledger", &corrupt]).status.code(), Some(2));
}

#[test]
fn cutoff_to_twelve_digits() {
    let r = json_result(&threeap(&["bounds", "cutoff"]));
    assert_eq!(r["value"], "0.317306119615");
    assert_eq!(r["below"]["product_wins"], true);
    assert_eq!(r["above"]["product_wins"], false);
}

#[test]
fn constructions() {
    let e = json_result(&threeap(&["construct", "family", "e", "1", "1"]));
    assert_eq!(e["set"]["elements"], serde_json::json!([-3, -1, 0, 1, 3]));
    let f = json_result(&threeap(&["construct", "family", "f", "1", "1"]));
    assert_eq!(f["set"]["elements"], serde_json::json!([-1, 0, 1, 3]));
    let m = json_result(&threeap(&["construct", "family", "e", "1", "1", "-N", "11", "--shift", "-1"]));
    assert_eq!(m["set"]["elements"], serde_json::json!([0, 2, 7, 9, 10]));

    let w = json_result(&threeap(&["construct", "wraparound", "-N", "101", "8", "17"]));
    assert_eq!(w["size"], 101 - 51);
    let b = json_result(&threeap(&["construct", "behrend", "2", "4"]));
    assert_eq!(b["combinatorial"], 0);
}

#[test]
fn seeded_pipeline_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let a = dir.path().join(format!("a{threads}.json"));
        let a = a.to_str().unwrap();
        let o = threeap(&["construct", "random", "-N", "211", "105", "--seed", "9", "--threads", threads, "--out", a]);
        assert_eq!(o.status.code(), Some(0));
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(a).unwrap()).unwrap();
        let set = write(dir.path(), &format!("set{threads}.json"), &doc["result"]["set"].to_string());
        let inter = threeap(&["construct", "intersect", &set, &set, "--seed", "9", "--threads", threads]);
        let search = threeap(&["search", "5", "-N", "13", "--side", "min", "--threads", threads]);
        let suite = threeap(&["verify", "energy-lemma", "--cases", "50", "--seed", "3", "--threads", threads]);
        let rect = threeap(&["analyze", "rectify", &set, "--coverage", "0.5", "--threads", threads]);
        [doc.to_string(), stdout(&inter), stdout(&search), stdout(&suite), stdout(&rect)]
    };
    let one = run("1");
    let four = run("4");
    for (a, b) in one.iter().zip(&four) {
        assert!(!a.is_empty());
        assert_eq!(a.replace("a1.json", "").replace("set1.json", ""), b.replace("a4.json", "").replace("set4.json", ""));
    }
    assert!(one[0].contains("\"seed\":9"));
    assert!(!one[1].contains("threads"), "thread count stays off stdout");
}

#[test]
fn analysis_commands() {
    let dir = tempfile::tempdir().unwrap();
    let arc = write(dir.path(), "arc.json", r#"{"modulus":101,"elements":[3,10,17,24,31]}"#);
    let r = json_result(&threeap(&["analyze", "rectify", &arc]));
    assert_eq!(r["arc_length"], 4);
    let fl = json_result(&threeap(&["analyze", "final-lemma", &arc]));
    assert_eq!(fl["applicable"], false);
    let near = write(dir.path(), "near.json", r#"{"modulus":1009,"elements":[0,1,2,3,4,1008]}"#);
    let fl = json_result(&threeap(&["analyze", "final-lemma", &near]));
    assert_eq!(fl["holds"], true);
    assert_eq!(fl["t3"], 18);
    let d = json_result(&threeap(&["analyze", "decompose", &near]));
    assert!(d["conditions"]["total"].as_u64().unwrap() == 6);
    let integers = write(dir.path(), "z.json", r#"{"modulus":null,"elements":[1,2]}"#);
    assert_eq!(threeap(&["analyze", "rectify", &integers]).status.code(), Some(2));
}
