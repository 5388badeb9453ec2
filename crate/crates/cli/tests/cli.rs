use std::process::Command as Process;

use proptest::prelude::*;

use nap_cli::{parse, run, ErrorKind, Format, Options};

fn nap(args: &[&str]) -> (String, String, i32) {
    let out = Process::new(env!("CARGO_BIN_EXE_nap"))
        .args(args)
        .env_remove("NAP_ORACLE_CAPS")
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn golden_probabilities() {
    let (out, _, code) = nap(&["space nat factorial; let N7 = prog(7,0); prob N7"]);
    assert_eq!(code, 0);
    assert_eq!(out, "prob prog(7,0)\n  exact: (1)/(7)\n  st: 1/7 ~ 0.142857\n");
    let (out, _, _) = nap(&["space nat all; prob prog(2,0)"]);
    assert!(out.contains("candidates: (1)/(2), (a - 1)/(2*a)\n  st: 1/2 ~ 0.500000"), "{out}");
    let (out, _, _) = nap(&["--digits", "2", "space q grid; cond prog(2,0)&nat nat"]);
    assert!(out.ends_with("exact: (1)/(2)\n  st: 1/2 ~ 0.50\n"), "{out}");
    let (out, _, _) = nap(&["space coin ct; prob cyl(i1=H,i2=H,i3=H)"]);
    assert!(out.contains("exact: (1)/(8)"), "{out}");
}

#[test]
fn verification_passes_and_exits_zero() {
    let (out, _, code) = nap(&["space nat factorial; verify prog(2,0)"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS: prog(2,0): 7/7 indices"), "{out}");
}

#[test]
fn nothing_to_verify_is_a_failure() {
    let (_, _, code) = nap(&["--max-m", "1", "space nat factorial; verify prog(2,0)"]);
    assert_eq!(code, 1);
}

#[test]
fn errors_exit_nonzero_with_positions() {
    let (out, err, code) = nap(&["space nat factorial;\nprob prog(2,0) &"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.starts_with("syntax error at line 2"), "{err}");
    let (_, err, code) = nap(&["space coin ct; density cyl(i1=H)"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("event error at line 1, column 16"), "{err}");
    let (_, err, code) = nap(&["--format", "json", "space q ct"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "family_mismatch");
}

#[test]
fn earlier_results_survive_a_later_error() {
    let out = run("space nat factorial; prob nat; numerosity prog(2,0); condfin nat nat", &Options::default());
    assert_eq!(out.status, 2);
    assert_eq!(out.stdout.matches('\n').count(), 5);
    assert!(out.stderr.starts_with("usage error at line 1, column 54"), "{}", out.stderr);
}

#[test]
fn weighted_spaces_refuse_numerosity() {
    let out = run("space nat factorial weight [2,1]; numerosity prog(2,0)", &Options::default());
    assert_eq!(out.status, 2);
    assert!(out.stderr.starts_with("engine error"), "{}", out.stderr);
}

#[test]
fn json_lines() {
    let opts = Options {
        format: Format::Json,
        ..Options::default()
    };
    let out = run("space nat factorial weight [2,1]; prob prog(2,0); verify prog(3,0)", &opts);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let lines: Vec<serde_json::Value> = out.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["kind"], "exact");
    assert_eq!(lines[0]["values"][0], "(2)/(3)");
    assert_eq!(lines[0]["st"], "2/3");
    assert_eq!(lines[0]["provenance"], "symbolic");
    assert_eq!(lines[1]["provenance"], "oracle-verified");
    assert_eq!(lines[1]["passed"], true);
}

#[test]
fn unknown_names_are_reported() {
    let e = parse("space nat factorial; let A = prog(2,0); prob A & B").unwrap_err();
    assert_eq!(e.kind, ErrorKind::UnknownIdentifier);
}

const CORPUS: &[&str] = &[
    "space nat factorial; let E = prog(2,0); prob E",
    "space q grid; cond prog(2,0)&nat nat",
    "space coin ct; prob cyl(i1=H,i2=H,i3=H)",
    "space nat odd; numerosity prog(2,0) | fin{1,3}; density ~prog(5,2)",
    "space r grid; prob interval(-1/2, sqrt(2)/2 + 1) & ~rat; st pos",
    "space nat all weight [1,3] except{2:5}; sum weight [1/2] prog(3,1); axioms prog(2,0), nat partition prog(2,0), prog(2,1)",
    "space coin ct; condfin cyl(i2=T) seq(tail=H) | seq(HT,tail=T); prob ~(cyl(i1=H) | seq(tail=T))",
];

#[test]
fn corpus_round_trips_and_is_deterministic() {
    for src in CORPUS {
        let p = parse(src).unwrap();
        let rendered = p.to_string();
        assert_eq!(parse(&rendered).unwrap(), p, "{src}");
        assert_eq!(parse(&rendered).unwrap().to_string(), rendered);
        let a = run(src, &Options::default());
        let b = run(&rendered, &Options::default());
        assert_eq!(a.status, 0, "{src}: {}", a.stderr);
        assert_eq!(a, b);
    }
}

#[test]
fn binary_output_is_byte_identical() {
    let src = CORPUS.join("; ");
    let first = nap(&["--format", "json", &src]);
    let second = nap(&["--format", "json", &src]);
    assert_eq!(first.2, 0, "{}", first.1);
    assert_eq!(first, second);
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u64..7).prop_flat_map(|k| (Just(k), 0..k)).prop_map(|(k, l)| format!("prog({k},{l})")),
        Just("nat".to_string()),
        Just("int".to_string()),
        Just("rat".to_string()),
        Just("pos".to_string()),
        Just("all".to_string()),
        Just("empty".to_string()),
        (-5i64..5, 1i64..5).prop_map(|(p, q)| format!("fin{{{p}/{q}, sqrt(3)}}")),
        (-5i64..5, 1i64..4).prop_map(|(a, w)| format!("interval({a}, {a}+{w}*sqrt(2))")),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    atom().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} | {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})&{b}")),
            inner.prop_map(|a| format!("~({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn render_is_a_normal_form(a in expr(), b in expr()) {
        let src = format!("space r grid; let X = {a}; cond X {b}; prob ({a}) | X");
        let p = parse(&src).unwrap();
        let rendered = p.to_string();
        let q = parse(&rendered).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(q.to_string(), rendered);
    }
}
