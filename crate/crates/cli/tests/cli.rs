use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use zp3_cli::{exit_code, RunConfig};
use zp3_core::report::Verdict;

fn zp3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zp3")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn dims_csv_lists_degree_three() {
    let out = zp3(&["dims", "--p", "7", "--module", "V1", "--max-degree", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("d,dimI,dimR,oracle\n"));
    assert!(text.lines().any(|l| l == "3,1,1,1"));
}

#[test]
fn zsum_analysis() {
    let out = zp3(&["zsum", "--p", "7", "--seq", "1,1,5"]);
    assert_eq!(out.status.code(), Some(0));
    let c = &json(&out)["instances"][0]["certificate"];
    assert_eq!(c["zero_sum"], true);
    assert_eq!(c["irreducible"], true);
    assert_eq!(c["height"], 2);
}

#[test]
fn prop33_standard_tier_lists_findings() {
    let out = zp3(&["verify", "prop33", "--p", "7", "--tier", "standard"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verdict"], "PASS");
    let inst = r["instances"].as_array().unwrap();
    assert!(inst.iter().any(|i| i["status"] == "FINDING" && i["mode"] == "exact"));
    assert!(inst.iter().all(|i| i["status"] != "FAIL"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = zp3(&["dims", "--module", "U1+X2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("position 3"), "{err}");
    assert!(err.contains("     ^"), "{err}");

    let out = zp3(&["span", "--expr", "I+*Q"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("position 3"));

    for args in [
        &["zsum", "--p", "7", "--seq", "1,x"][..],
        &["dims", "--p", "11"],
        &["verify", "prop31", "--module", "U1+V1"],
        &["verify", "prop31", "--k", "2"],
        &["verify", "betak", "--k", "2"],
        &["verify", "exceptional", "--p", "13", "--tier", "slow"],
        &["verify", "cor32", "--from", "9", "--to", "8"],
        &["sep", "pair", "--v1", "1,1,0", "--v2", "1,1,0,0"],
        &["nonsense"],
    ] {
        assert_eq!(zp3(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sep_pair_outcomes() {
    let sep = zp3(&["sep", "pair", "--p", "7", "--module", "U1+V1", "--v1", "1,1,0,0", "--v2", "w,1,0,0", "--dmax", "8"]);
    assert_eq!(sep.status.code(), Some(0));
    let r = json(&sep);
    assert_eq!(r["instances"][0]["outcome"], "separated");
    assert_eq!(r["instances"][0]["degree"], 8);

    let short = json(&zp3(&["sep", "pair", "--v1", "1,1,0,0", "--v2", "w,1,0,0", "--dmax", "7"]));
    assert_eq!(short["instances"][0]["outcome"], "inconclusive");
    assert_eq!(short["verdict"], "FINDING");

    // d·(w, 1, 0, 0) cycles the induced coordinates and multiplies y by ω
    let same = json(&zp3(&["sep", "pair", "--v1", "w,1,0,0", "--v2", "w^2,0,0,1"]));
    assert_eq!(same["instances"][0]["outcome"], "same-orbit");
}

#[test]
fn out_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("zp3-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dims.json");
    let out = zp3(&["dims", "--max-degree", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["statement"], "dims");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn text_format_is_a_projection() {
    let out = zp3(&["dims", "--max-degree", "3", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("dims: PASS (3 instances"));
    assert!(text.contains("[PASS] d=3 degree 3: dimI=1 dimR=1 (exact)"));
}

#[test]
fn exit_codes_follow_the_verdict() {
    assert_eq!(exit_code(Verdict::Pass), 0);
    assert_eq!(exit_code(Verdict::Finding), 0);
    assert_eq!(exit_code(Verdict::Fail), 1);
}

fn round_trip(line: &str) {
    let cfg = RunConfig::parse(line).unwrap_or_else(|e| panic!("{line}: {e}"));
    let canon = cfg.canonical();
    let again = RunConfig::parse(&canon).unwrap_or_else(|e| panic!("{canon}: {e}"));
    assert_eq!(again, cfg, "{canon}");
    assert_eq!(again.canonical(), canon);
}

#[test]
fn canonical_strings_round_trip() {
    for line in [
        "dims --p 7 --module V1 --max-degree 5 --format csv",
        "dims --module ' U1 + 2*V1 '",
        "zsum --p 7 --seq -1,8,3",
        "span --p 13 --module V1+V2 --expr 'I+*R+<=7+I_2*I+^2' --from 3 --to 4 --rank-mode exact",
        "beta --module U1+2*V1 --k 1",
        "verify prop31",
        "verify prop31 --tier tiny --format text",
        "verify cor32 --module V2+V1 --from 8 --to 11 --rank-mode modular --prime 1000000033",
        "verify prop33 --witnesses",
        "verify exceptional",
        "verify betak --k 2 --tier slow",
        "verify i3 --r 4 --module U1+2*V1+2*V2 --from 1 --to 12",
        "sep verify-lower --p 13",
        "sep verify-upper --trials 200 --seed 42 --out /tmp/x.json",
        "sep pair --v1 '1, w, 0, 0' --v2 -w^2,1,0,2w",
        "sep relative --points 3 --full-group",
    ] {
        round_trip(line);
    }
}

#[test]
fn invalid_combinations_are_rejected() {
    for line in [
        "verify betak --k 0",
        "verify cor32 --prime 11",
        "verify cor32 --rank-mode exact --prime 1073741827",
        "verify exceptional --from 9",
        "verify i3 --p 13",
        "sep pair --v1 1,1,0,0",
    ] {
        assert!(RunConfig::parse(line).is_err(), "{line}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn random_configurations_round_trip(
        stmt in prop::sample::select(vec!["prop31", "cor32", "prop33", "i3"]),
        ms in prop::collection::vec((1u32..3, 1u32..3), 1..3),
        from in 1u32..10, len in 0u32..4,
        mode in prop::sample::select(vec!["exact", "modular", "certified"]),
        tier in prop::sample::select(vec!["tiny", "standard", "slow"]),
        format in prop::sample::select(vec!["json", "csv", "text"]),
        witnesses in any::<bool>(),
    ) {
        let module: Vec<String> = ms.iter().map(|(m, v)| format!("{m}*V{v}")).collect();
        let mut line = format!(
            "verify {stmt} --module {} --from {from} --to {} --rank-mode {mode} --tier {tier} --format {format}",
            module.join("+"), from + len
        );
        if witnesses {
            line += " --witnesses";
        }
        round_trip(&line);
    }

    #[test]
    fn sequences_round_trip(seq in prop::collection::vec(-20i64..20, 0..8), p in prop::sample::select(vec![5u32, 7, 13])) {
        let s: Vec<String> = seq.iter().map(i64::to_string).collect();
        let line = format!("zsum --p {p} --seq '{}'", s.join(","));
        round_trip(&line);
    }
}
