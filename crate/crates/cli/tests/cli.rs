use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_ppcount"))
        .args(["--format", "json"])
        .args(args)
        .env_remove("PPCOUNT_THREADS")
        .output()
        .unwrap();
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (v, code)
}

#[test]
fn count_examples() {
    let (v, code) = run(&["count", "--self-rank", "7"]);
    assert_eq!((code, &v["result"]["count"]), (0, &Value::from(1)));
    let (v, _) = run(&["count", "--self-rank", "12"]);
    assert_eq!(v["result"]["count"], 3);
    assert_eq!(v["result"]["method"], "self_product_lattice");
    let (v, _) = run(&["count", "--surface-degree", "3"]);
    assert_eq!(v["result"]["count"], 2);
    assert_eq!(v["result"]["method"], "surface_binary_form");
}

#[test]
fn count_from_config_files() {
    let dir = std::env::temp_dir().join(format!("ppcount-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let blocks = dir.join("blocks.json");
    std::fs::write(&blocks, r#"{"blocks":[{"degrees":[1,3]},{"degrees":[1,1,1,1,1,1,1,1]}]}"#).unwrap();
    let (v, code) = run(&["count", "--config", blocks.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 4);
    assert_eq!(v["result"]["method"], "block_product");

    let mixed = dir.join("mixed.json");
    std::fs::write(&mixed, r#"{"degrees":[1,2,4]}"#).unwrap();
    let (_, code) = run(&["count", "--config", mixed.to_str().unwrap()]);
    assert_eq!(code, 1);

    let broken = dir.join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    let (_, code) = run(&["count", "--config", broken.to_str().unwrap()]);
    assert_eq!(code, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn classify_examples() {
    let (v, code) = run(&["classify", "--rank", "8", "--mass-check"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["classes"].as_array().unwrap().len(), 2);
    assert_eq!(v["result"]["mass_observed"], v["result"]["mass_predicted"]);
    let (v, _) = run(&["classify", "--rank", "1"]);
    assert_eq!(v["result"]["classes"].as_array().unwrap().len(), 1);
    assert_eq!(v["complete"], true);
}

#[test]
fn classify_incomplete_exits_three() {
    let (v, code) = run(&["classify", "--rank", "12", "--budget", "0"]);
    assert_eq!(code, 3);
    assert_eq!(v["complete"], false);
    let (_, code) = run(&["count", "--self-rank", "12", "--budget", "0"]);
    assert_eq!(code, 3);
}

#[test]
fn classify_save_and_load() {
    let path = std::env::temp_dir().join(format!("ppcount-r10-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let (computed, code) = run(&["classify", "--rank", "10", "--mass-check", "--save", p]);
    assert_eq!(code, 0);
    let (loaded, code) = run(&["classify", "--rank", "10", "--load", p]);
    assert_eq!(code, 0);
    assert_eq!(computed["result"], loaded["result"]);
    let (_, code) = run(&["classify", "--rank", "11", "--load", p]);
    assert_eq!(code, 1);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn form_examples() {
    let (v, _) = run(&["form", "classnum", "--det", "1"]);
    assert_eq!(v["result"]["class_number"], 1);
    let (v, _) = run(&["form", "classnum", "--det", "3"]);
    assert_eq!(v["result"]["class_number"], 2);
    let (v, code) = run(&["form", "reduce", "--a", "1", "--b", "1", "--c", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["reduced"], serde_json::json!({"a": 1, "b": 0, "c": 1}));
    let (v, _) = run(&["form", "reduce", "--a", "5", "--b", "-7", "--c", "11"]);
    assert_eq!(v["result"]["reduced"], serde_json::json!({"a": 2, "b": 0, "c": 3}));
    let (_, code) = run(&["form", "reduce", "--a", "1", "--b", "2", "--c", "1"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_examples() {
    for degrees in ["1", "1,3", "1,2,4"] {
        let (v, code) = run(&["verify", "--degrees", degrees, "--trials", "100"]);
        assert_eq!(code, 0, "{degrees}");
        assert_eq!(v["result"]["pass"], true);
    }
    let (v, code) = run(&["verify", "--degrees", "1,3", "--trials", "10", "--tol", "1e-18"]);
    assert_eq!(code, 4);
    assert_eq!(v["result"]["pass"], false);
    let (_, code) = run(&["verify", "--degrees", "2,3"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["verify", "--degrees", "1,2", "--tol", "-1"]);
    assert_eq!(code, 2);
}

#[test]
fn usage_errors_exit_two() {
    let (_, code) = run(&["count"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["count", "--self-rank", "3", "--surface-degree", "2"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn timing_is_opt_in() {
    let (v, _) = run(&["form", "classnum", "--det", "5"]);
    assert!(v.get("timing_ms").is_none());
    let (v, _) = run(&["--timing", "form", "classnum", "--det", "5"]);
    assert!(v["timing_ms"].is_u64());
}
