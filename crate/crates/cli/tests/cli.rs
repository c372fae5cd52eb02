use assert_cmd::Command;

fn psl3() -> Command {
    let mut cmd = Command::cargo_bin("psl3").unwrap();
    cmd.env_remove("PSL3_CACHE_DIR");
    cmd
}

fn stdout_of(cmd: &mut Command) -> String {
    String::from_utf8(cmd.assert().get_output().stdout.clone()).unwrap()
}

#[test]
fn character_table_has_expected_rows() {
    let out = stdout_of(
        psl3()
            .args([
                "character",
                "--k",
                "1",
                "--family",
                "A",
                "--i",
                "1",
                "--max-charge",
                "2",
                "--max-q",
                "4",
            ])
            .args(["--format", "table"]),
    );
    assert!(out.contains("  1   1    2  2\n"), "{out}");
    assert!(out.contains("conformal weight  h=0"));
}

#[test]
fn character_csv_and_json() {
    let csv = stdout_of(
        psl3()
            .args([
                "character",
                "--k",
                "1",
                "--family",
                "B",
                "--i",
                "0",
                "--max-charge",
                "1",
            ])
            .args(["--max-q", "2", "--format", "csv"]),
    );
    assert!(csv.starts_with("r1,r2,s,coeff\n0,0,0,1\n"), "{csv}");
    let json = stdout_of(
        psl3()
            .args([
                "character",
                "--k",
                "1",
                "--family",
                "A",
                "--i",
                "1",
                "--max-charge",
                "1",
            ])
            .args(["--max-q", "1", "--format", "json"]),
    );
    let series = psl3_core::Series::from_json(json.trim()).unwrap();
    assert_eq!(series.coefficient(1, 0, 1).unwrap(), 1.into());
}

#[test]
fn character_rejects_out_of_range_index() {
    psl3()
        .args(["character", "--k", "2", "--family", "A", "--i", "5"])
        .assert()
        .code(2);
}

#[test]
fn verify_exit_codes() {
    psl3()
        .args(["verify", "--k", "2", "--max-charge", "3", "--max-q", "6"])
        .assert()
        .code(0);
    psl3()
        .args(["verify", "--k", "1", "--identity", "FOUR1", "--i", "1"])
        .assert()
        .code(2);
    let out = psl3()
        .args([
            "verify",
            "--k",
            "2",
            "--identity",
            "SEQ1",
            "--i",
            "1",
            "--inject-fault",
            "1,0,2",
        ])
        .args(["--format", "json"])
        .assert()
        .code(1)
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    assert!(
        text.contains(r#""firstFailure":{"r1":1,"r2":0,"s":2,"c":"1"}"#),
        "{text}"
    );
}

#[test]
fn oracle_output_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "oracle",
        "--weight",
        "1,0,0",
        "--max-charge",
        "2",
        "--max-weight",
        "4",
        "--format",
        "json",
    ];
    let first = psl3()
        .args(args)
        .arg("--cache-dir")
        .arg(dir.path())
        .assert()
        .success()
        .get_output()
        .clone();
    assert!(String::from_utf8_lossy(&first.stderr).contains("computed"));
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    assert!(text.contains(r#"{"r1":1,"r2":1,"s":1,"dim":1}"#));
    assert!(text.contains(r#"{"r1":1,"r2":1,"s":2,"dim":2}"#));
    let second = psl3()
        .args(args)
        .env("PSL3_CACHE_DIR", dir.path())
        .assert()
        .success()
        .get_output()
        .clone();
    assert!(String::from_utf8_lossy(&second.stderr).contains("served from cache"));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn oracle_handles_general_weights_and_budget() {
    let out = stdout_of(psl3().args([
        "oracle",
        "--weight",
        "1,1,1",
        "--max-charge",
        "2",
        "--max-weight",
        "3",
    ]));
    assert!(out.contains("  0   0   0  1\n"), "{out}");
    psl3()
        .args([
            "oracle",
            "--weight",
            "2,0,0",
            "--max-charge",
            "8",
            "--max-weight",
            "8",
        ])
        .assert()
        .code(3);
    psl3()
        .args([
            "oracle",
            "--weight",
            "1,0",
            "--max-charge",
            "1",
            "--max-weight",
            "1",
        ])
        .assert()
        .code(2);
}

#[test]
fn compare_exit_codes() {
    psl3()
        .args([
            "compare",
            "--weight",
            "1,0,0",
            "--max-charge",
            "2",
            "--max-q",
            "4",
        ])
        .assert()
        .code(0);
    psl3()
        .args([
            "compare",
            "--weight",
            "0,1,1",
            "--max-charge",
            "2",
            "--max-q",
            "4",
        ])
        .assert()
        .code(0);
    let out = psl3()
        .args([
            "compare",
            "--weight",
            "1,1,1",
            "--max-charge",
            "2",
            "--max-q",
            "4",
        ])
        .assert()
        .code(2);
    assert!(String::from_utf8_lossy(&out.get_output().stderr).contains("psl3 oracle"));
}

#[test]
fn dsl_command() {
    let out = stdout_of(psl3().args([
        "dsl",
        "--expr",
        "chi(1;1,0,0)(x1*q^1,x2) - chi(1;0,1,0)(x1,x2)",
    ]));
    assert!(out.starts_with("zero on window"));
    psl3()
        .args(["dsl", "--expr", "chi(1;1,0,0)(x1,x2)"])
        .assert()
        .code(1);
    let out = psl3()
        .args(["dsl", "--expr", "chi(1;1,0,0"])
        .assert()
        .code(2);
    assert!(String::from_utf8_lossy(&out.get_output().stderr).contains("byte 11"));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "verify",
        "--k",
        "2",
        "--max-charge",
        "3",
        "--max-q",
        "5",
        "--format",
        "json",
    ];
    assert_eq!(stdout_of(psl3().args(args)), stdout_of(psl3().args(args)));
}
