use std::path::Path;
use std::process::{Command, Output};

fn pogorelov(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pogorelov"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn embed_obj_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = pogorelov(
        &[
            "embed",
            "--a",
            "1",
            "--rho-max",
            "0.74",
            "--n-theta",
            "128",
            "--format",
            "obj",
            "--out",
            "surf.obj",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let obj = std::fs::read_to_string(dir.path().join("surf.obj")).unwrap();
    assert!(obj.starts_with("# pogorelov a=1 rho_max=0.74\n"));
    assert!(!obj.contains('\r'));
    let v = obj.lines().filter(|l| l.starts_with("v ")).count();
    let f = obj.lines().filter(|l| l.starts_with("f ")).count();
    assert!(v > 128 && f > 128);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("surf.obj.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "embed");
    assert_eq!(manifest["parameters"]["n_theta"], "128");
    assert_eq!(manifest["parameters"]["format"], "obj");
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    use sha2::Digest;
    assert_eq!(digest, hex::encode(sha2::Sha256::digest(obj.as_bytes())));
}

#[test]
fn check_closed_form_prints_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let out = pogorelov(&["curvature", "--a", "1", "--check-closed-form"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("max relative discrepancy: "));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["profile", "--bogus"][..],
        &["frobnicate"],
        &["profile", "--a", "-1"],
        &["embed", "--rho-max", "0.9"],
        &["verify", "--format", "obj"],
        &["assemble", "--n-max", "0"],
        &["regularity", "--grid", "10"],
        &["lemmas", "--format", "csv"],
    ] {
        let out = pogorelov(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let first = |args: &[&str]| {
        let out = pogorelov(args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(
        first(&["curvature", "--grid", "10"]),
        "rho,K_formula,K_closed,K_fd,abs_err"
    );
    assert_eq!(first(&["embed", "--format", "csv"]), "rho,r,z,dz,d2z_left,d2z_right");
    assert_eq!(first(&["assemble", "--n-max", "3", "--grid", "20"]), "x,y,h11,h12,h22");
    assert_eq!(
        first(&["regularity", "--n-max", "2"]),
        "n,a,sup_dev,sup_D1,sup_D2,lip_D2"
    );
    assert_eq!(first(&["profile", "--grid", "10"]), "rho,f,df,d2f,d3f");
}

#[test]
fn layout_json_and_repeat_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = pogorelov(&["assemble", "--n-max", "3", "--format", "json"], dir.path());
    let b = pogorelov(&["assemble", "--n-max", "3", "--format", "json"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[1]["n"], 2);
    assert_eq!(v[0]["r"].as_f64(), Some(0.125));
}

#[test]
fn lemmas_quick_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = pogorelov(
        &["lemmas", "--quick", "--seed", "5", "--out", "lemmas.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lemmas.json")).unwrap()).unwrap();
    assert_eq!(v["convex"][0]["seeds"], serde_json::json!([5, 6, 7]));
    assert_eq!(v["convex"][0]["passed"], 60);
    assert_eq!(v["affine"][2]["qualifying"], v["affine"][2]["expected"]);
}
