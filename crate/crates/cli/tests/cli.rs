use std::process::{Command, Output};

fn amact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amact")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn ratio_presets() {
    let out = amact(&["ratio", "z-interval", "--n", "10"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["ratios"]["tests"][0]["ratio"], "1/5");
    let v = json(&amact(&["ratio", "z2-box", "--n", "8"]));
    for t in v["ratios"]["tests"].as_array().unwrap() {
        assert_eq!(t["ratio"], "1/4");
    }
    // Radius-5 diamond: 61 points, 11 leave along each axis direction.
    let v = json(&amact(&["ratio", "z2-ball", "--k", "5"]));
    assert_eq!(v["size"], 61);
    assert_eq!(v["ratios"]["tests"][0]["ratio"], "22/61");
}

#[test]
fn match_folner_reports() {
    let v = json(&amact(&["match-folner", "--eps", "1/2"]));
    assert_eq!(v["outcome"]["n"], 17);
    assert_eq!(v["outcome"]["d"], 28);
    assert_eq!(v["outcome"]["r"], 9);
    assert_eq!(v["verified"], true);
    let v = json(&amact(&["match-folner", "--eps", "1/2", "--c0", "17"]));
    assert_eq!(v["outcome"]["r"], 0);
    assert!(v["note"].as_str().unwrap().contains("no deletion"));
    let out = amact(&["match-folner", "--eps", "1/1000", "--max-stream", "40"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda*|C0| = 80000"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(amact(&["match-folner", "--eps", "0.5"]).status.code(), Some(1));
    assert_eq!(amact(&["match-folner", "--eps", "-1/2"]).status.code(), Some(1));
    assert_eq!(amact(&["ratio", "nope"]).status.code(), Some(1));
    assert_eq!(amact(&["bass-serre", "double", "--group", "q9", "--sub", "0"]).status.code(), Some(1));
}

#[test]
fn bass_serre_doubles() {
    let v = json(&amact(&["bass-serre", "double", "--group", "z4", "--sub", "0,2"]));
    assert_eq!(v["graph"]["betti"], 1);
    assert_eq!(v["circuit"]["letters"], "G:1 H:3");
    let v = json(&amact(&["bass-serre", "double", "--group", "z6", "--sub", "0,3"]));
    assert_eq!(v["graph"]["betti"], 2);
    let out = amact(&["bass-serre", "double", "--group", "z4", "--sub", "all"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[H : pi(A)] >= 2"));
}

#[test]
fn csv_and_out_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = dir.path().join("r.json");
    let st = amact(&["prescribed-folner", "--sizes", "1,3,5,9", "--csv", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(st.status.success());
    assert!(st.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("n,size,radius"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["all_hold"], true);
}

#[test]
fn build_action_free_product_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    let a = amact(&["build-action", "--preset", "z-free-z", "--L", "2", "--certificate", cert.to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = amact(&["build-action", "--preset", "z-free-z", "--L", "2"]);
    assert_eq!(a.stdout, b.stdout, "reports are deterministic");
    assert_eq!(json(&a)["verdict"]["ok"], true);
    let v = amact(&["verify", "--preset", "z-free-z", "--certificate", cert.to_str().unwrap()]);
    assert!(v.status.success());
    // Tamper with one offset-free assignment: point a block elsewhere.
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut c: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first = c["sigma"]["assignments"][0]["y_base"].clone();
    let second = c["sigma"]["assignments"][1]["y_base"].clone();
    c["sigma"]["assignments"][0]["y_base"] = second;
    c["sigma"]["assignments"][1]["y_base"] = first;
    std::fs::write(&cert, serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(amact(&["verify", "--preset", "z-free-z", "--certificate", cert.to_str().unwrap()]).status.code(), Some(2));
    let z = amact(&["build-action", "--preset", "z-free-z", "--L", "0", "--matches", "0"]);
    assert!(z.status.success());
    assert_eq!(json(&z)["words"], 0);
}

#[test]
fn config_file_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[groups.q]\nkind = \"cyclic\"\nordr = 3\n").unwrap();
    let out = amact(&["presets", "list", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ordr"));
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "[groups.q]\nkind = \"cyclic\"\norder = 10\n").unwrap();
    let v = json(&amact(&["bass-serre", "double", "--group", "q", "--sub", "5", "--config", good.to_str().unwrap()]));
    assert_eq!(v["graph"]["betti"], 4);
    let v = json(&amact(&["presets", "list"]));
    assert!(v.as_array().unwrap().iter().any(|e| e["name"] == "zxz2-sym3"));
}

#[test]
fn check_aprime_preset() {
    let out = amact(&["check-aprime", "--preset", "zxz2-sym3", "--pairs", "2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["all_pass"], true);
}
