use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quantreach::network::Network;
use quantreach::spec::{format_lp_spec, parse_lp_spec};

fn quantreach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantreach"))
        .args(args)
        .env_remove("QUANTREACH_MAX_INPUTS")
        .env_remove("QUANTREACH_MAX_STATES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const NET: &str = "format=1\nfnn k=1 dims=1,1 final=relu\nlayer 1\n1\nbias 1/2\n";
const FIX: &str = "fix:b=4,f=1,round=nearest,ovf=sat";

#[test]
fn verify_bv_on_both_backends() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "n.fnn", NET);
    // y1 = 3 is relu(5/2 + 1/2); 0b0110 is 3 in this format
    let spec = write(dir.path(), "s.bv", "format=1\nwidth 4\n@out\ny1 = 0b0110\n");
    for backend in ["automata", "brute"] {
        let args = [
            "--jobs", "1", "verify", "--problem", "reach-bv", "--backend", backend, "--net", &net, "--spec", &spec,
            "--arith", FIX,
        ];
        let out = quantreach(&args);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let text = stdout(&out);
        assert!(text.starts_with("format=1\nproblem reach-bv\n"), "{text}");
        assert!(text.contains("verdict valid\n") && text.contains("x1 5/2\n") && text.contains("y1 3\n"), "{text}");
        // single-threaded runs are byte-identical
        assert_eq!(stdout(&quantreach(&args)), text);
    }
    let without = quantreach(&[
        "verify", "--problem", "reach-bv", "--net", &net, "--spec", &spec, "--arith", FIX, "--no-witness",
    ]);
    assert!(!stdout(&without).contains("x1 "));
}

#[test]
fn resource_verdict_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "n.fnn", NET);
    let spec = write(dir.path(), "s.bv", "format=1\nwidth 4\n");
    let out = quantreach(&[
        "verify", "--problem", "reach-f-bv", "--net", &net, "--spec", &spec, "--arith", FIX, "--max-inputs", "3",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stdout(&out).contains("verdict resource\nreason "));
}

#[test]
fn usage_and_parse_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.fnn", "format=1\nfnn k=1 dims=1,1\nlayer 1\n1 2\nbias 0\n");
    let spec = write(dir.path(), "s.lp", "format=1\n");
    let out = quantreach(&["verify", "--problem", "reach-q-lp", "--net", &bad, "--spec", &spec]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("bad.fnn") && err.contains("4:1"), "{err}");

    assert_eq!(quantreach(&["verify", "--bogus"]).status.code(), Some(1));
    assert_eq!(quantreach(&["eval", "--net", &bad, "--input", "0", "--arith", "fix:b=0"]).status.code(), Some(1));
    let good = write(dir.path(), "n.fnn", NET);
    let wrong_backend = quantreach(&["verify", "--problem", "reach-q-lp", "--backend", "brute", "--net", &good, "--spec", &spec]);
    assert_eq!(wrong_backend.status.code(), Some(1));
    assert_eq!(quantreach(&["--help"]).status.code(), Some(0));
}

#[test]
fn reduce_emits_reingestible_instances() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [("sat", "p cnf 3 2\n1 -2 3 0\n-1 2 0\n", "valid"), ("unsat", "p cnf 1 2\n1 0\n-1 0\n", "invalid")];
    for (name, cnf, want) in cases {
        let path = write(dir.path(), &format!("{name}.cnf"), cnf);
        let out_dir = dir.path().join(name);
        let out = quantreach(&["reduce", "--dimacs", &path, "--frac-bits", "2", "--out-dir", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let net_path = out_dir.join("network.fnn");
        let spec_path = out_dir.join("spec.lp");
        let arith = fs::read_to_string(out_dir.join("arith.txt")).unwrap();

        // files parse back to the same text
        let net_text = fs::read_to_string(&net_path).unwrap();
        let net: Network = net_text.parse().unwrap();
        assert_eq!(net.to_string(), net_text);
        let spec_text = fs::read_to_string(&spec_path).unwrap();
        let (l1, l2) = parse_lp_spec(&spec_text, net.input_dim(), net.output_dim()).unwrap();
        assert_eq!(format_lp_spec(&l1, &l2), spec_text);

        let (net_arg, spec_arg) = (net_path.to_str().unwrap(), spec_path.to_str().unwrap());
        let q = stdout(&quantreach(&["verify", "--problem", "reach-q-lp", "--net", net_arg, "--spec", spec_arg]));
        assert!(q.contains(&format!("verdict {want}\n")), "{q}");
        let f = stdout(&quantreach(&[
            "verify", "--problem", "reach-lp", "--net", net_arg, "--spec", spec_arg, "--arith", arith.trim(),
        ]));
        assert!(f.contains(&format!("verdict {want}\n")), "{f}");
    }
}

#[test]
fn quantise_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "n.fnn", "format=1\nfnn k=1 dims=2,1 final=linear\nlayer 1\n1/3 -7/5\nbias 9\n");
    let out_path = dir.path().join("q.fnn");
    let out = quantreach(&["quantise", "--net", &net, "--arith", FIX, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text, "format=1\nfnn k=1 dims=2,1 final=linear\nlayer 1\n1/2 -3/2\nbias 7/2\n");
    let again = stdout(&quantreach(&["quantise", "--net", out_path.to_str().unwrap(), "--arith", FIX]));
    assert_eq!(again, text);
}

#[test]
fn eval_exact_and_quantised() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "n.fnn", NET);
    let exact = stdout(&quantreach(&["eval", "--net", &net, "--input", "1/3", "--input", "-2"]));
    assert_eq!(exact, "format=1\npoint 1\nx1 1/3\ny1 5/6\npoint 2\nx1 -2\ny1 0\n");
    let q = stdout(&quantreach(&["eval", "--net", &net, "--arith", FIX, "--input", "7/2"]));
    assert_eq!(q, "format=1\npoint 1\nx1 7/2\ny1 7/2\n");
}

#[test]
fn getbit_fixed_and_float() {
    // -1/3 = ...1110.101010 in two's complement
    let bit = |args: &[&str]| stdout(&quantreach(args));
    assert_eq!(bit(&["getbit", "--value", "-1/3", "--weight", "-1"]), "format=1\nbit 1\n");
    assert_eq!(bit(&["getbit", "--value", "-1/3", "--weight", "-2"]), "format=1\nbit 0\n");
    assert_eq!(bit(&["getbit", "--value", "-1/3", "--weight", "40"]), "format=1\nbit 1\n");
    // 3/2 = +1.1 x 2^0: sign 0, exponent field = bias = 1 (LSB first), mantissa 10
    let float = "float:m=2,e=2,round=nearest";
    let bits: String = (0..5)
        .map(|i| {
            let out = bit(&["getbit", "--value", "3/2", "--arith", float, "--position", &i.to_string()]);
            out.trim_end().chars().last().unwrap()
        })
        .collect();
    assert_eq!(bits, "01010");
    assert_eq!(quantreach(&["getbit", "--value", "0", "--arith", float, "--position", "0"]).status.code(), Some(1));
}

#[test]
fn selfcheck_reports_agreement() {
    let out = quantreach(&["--jobs", "2", "selfcheck", "--count", "6", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("instance ")).count(), 6);
    assert!(text.ends_with("agree 6/6\n"), "{text}");
}
