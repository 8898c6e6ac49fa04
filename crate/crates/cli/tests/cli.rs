use std::path::Path;
use std::process::{Command, Output};

fn cmcnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmcnet")).args(args).env_remove("CMCNET_TOL").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn generate(dir: &Path) -> String {
    let net = dir.join("rev.json").to_str().unwrap().to_string();
    let o = cmcnet(&["generate", "revolution", "--H", "0.5", "--kappa", "0", "--steps", "3", "--angles", "8", "-o", &net]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    net
}

#[test]
fn generated_net_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(dir.path());
    let o = cmcnet(&["verify", &net]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = cmcnet(&["classify", &net]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("cmc-euclidean"));
}

#[test]
fn perturbed_lift_fails_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&net).unwrap()).unwrap();
    let x = &mut v["lifts"][1][1][2];
    *x = serde_json::json!(x.as_f64().unwrap() + 1e-3);
    std::fs::write(&net, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(code(&cmcnet(&["verify", &net])), 2);
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(code(&cmcnet(&["verify", "--bogus"])), 1);
    assert_eq!(code(&cmcnet(&["verify", "/nonexistent/net.json"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = cmcnet(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
    assert_eq!(code(&cmcnet(&["--help"])), 0);
}

#[test]
fn export_writes_obj_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(dir.path());
    let obj = dir.path().join("rev.obj");
    let o = cmcnet(&["export", &net, "--model", "euclidean", "-o", obj.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&obj).unwrap();
    // 2 + 2 * 3 meridian points, 9 angles.
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8 * 9);
    let o = cmcnet(&["export", &net, "--model", "poincare", "-o", obj.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn transforms_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cyl = dir.path().join("cyl.json");
    let out = dir.path().join("bt.json");
    let o = cmcnet(&["generate", "cylinder", "--rows", "5", "--cols", "5", "-o", cyl.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = cmcnet(&["transform", "backlund", "--mu", "-1", "-i", cyl.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&cmcnet(&["verify", out.to_str().unwrap()])), 0);
    let o = cmcnet(&["transform", "calapso", "--mu", "0.5", "-i", cyl.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
