//! The thirteen acceptance criteria. Each prints one PASS/FAIL line; CLI
//! runs are executed twice and compared byte for byte without the timing
//! field.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::Command;

use serde_json::Value;
use zp3_core::zsum::{self, ZSequence};

struct Run {
    code: Option<i32>,
    stdout: String,
    report: Value,
}

fn zp3(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_zp3")).args(args).output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 output");
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    Run { code: out.status.code(), stdout, report }
}

fn without_timing(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timing_ms\"")).collect::<Vec<_>>().join("\n")
}

fn instances(r: &Value) -> &[Value] {
    r["instances"].as_array().map(Vec::as_slice).unwrap_or(&[])
}

fn passed(run: &Run) -> bool {
    run.code == Some(0) && run.report["verdict"] == "PASS"
}

/// Non-decreasing sequences over `lo..p` of every length up to `max_len`.
fn multisets(p: u32, lo: u32, max_len: usize) -> Vec<Vec<u32>> {
    fn rec(p: u32, start: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for a in start..p {
            cur.push(a);
            rec(p, a, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, lo, max_len, &mut Vec::new(), &mut out);
    out
}

/// Subset sums by enumerating index subsets, the empty one included.
fn brute_sigma(p: u32, s: &[u32]) -> Vec<u32> {
    let mut seen = vec![false; p as usize];
    for mask in 0u32..(1 << s.len()) {
        let t: u32 = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).sum();
        seen[(t % p) as usize] = true;
    }
    (0..p).filter(|&x| seen[x as usize]).collect()
}

fn seq(p: u32, s: &[u32]) -> ZSequence {
    ZSequence::new(p, &s.iter().map(|&x| x as i64).collect::<Vec<_>>())
}

fn lemma_exhaustive() -> bool {
    for p in [5u32, 7] {
        for s in multisets(p, 1, 6) {
            let d = s.len() as u32;
            let size = brute_sigma(p, &s).len() as u32;
            let chk = zsum::lemma_easy_check(&seq(p, &s)).unwrap();
            if size < p.min(d + 1) || chk.sigma_size != size || !chk.bound_holds {
                return false;
            }
            if size == d + 1 && size < p {
                // some a with every element equal to a or -a
                let shape = (1..p).find(|&a| a != p - a && s.iter().all(|&x| x == a || x == p - a));
                let Some((a, k)) = chk.equality_case else { return false };
                let rebuilt: Vec<u32> = std::iter::repeat_n(p - a, k as usize).chain(std::iter::repeat_n(a, (d - k) as usize)).collect();
                if shape.is_none() || seq(p, &rebuilt) != seq(p, &s) {
                    return false;
                }
            } else if chk.equality_case.is_some() {
                return false;
            }
        }
    }
    true
}

fn davenport() -> bool {
    [5u32, 7].iter().all(|&p| {
        let witness = vec![1u32; p as usize - 1];
        let free = brute_sigma(p, &witness).len() == p as usize - 1 + 1 && (1..=witness.len()).all(|k| !(k as u32).is_multiple_of(p));
        zsum::davenport_constant(p).unwrap() == p && zsum::classify(&seq(p, &witness)).unwrap().zero_sum_free && free
    })
}

fn additive_bounds() -> bool {
    let p = 7;
    let (mut bal, mut fs) = (0, 0);
    for s in multisets(p, 0, 5) {
        let z = seq(p, &s);
        let b = zsum::balandraud_bound(&z);
        let f = zsum::freeze_smith_bound(&z);
        if b.applicable {
            bal += 1;
            if !b.holds {
                return false;
            }
        }
        if f.applicable {
            fs += 1;
            if !f.holds {
                return false;
            }
        }
    }
    bal > 0 && fs > 0
}

fn status_of(inst: &Value) -> &str {
    inst["status"].as_str().unwrap_or("")
}

fn degree_instance(r: &Value, d: u64) -> Option<&Value> {
    instances(r).iter().find(|i| i["degree"] == d && i["monomial"].as_str().is_some_and(|m| m.starts_with("(R_+)")))
}

#[test]
fn acceptance() {
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("dims-V1", vec!["dims", "--p", "7", "--module", "V1", "--from", "0", "--max-degree", "12"]),
        ("dims-V1+V2", vec!["dims", "--p", "7", "--module", "V1+V2", "--from", "0", "--max-degree", "12"]),
        ("dims-U1+V1", vec!["dims", "--p", "7", "--module", "U1+V1", "--from", "0", "--max-degree", "12"]),
        ("dims-U1+2*V1", vec!["dims", "--p", "7", "--module", "U1+2*V1", "--from", "0", "--max-degree", "12"]),
        ("prop31", vec!["verify", "prop31", "--p", "7", "--module", "V1+V2", "--from", "8", "--to", "10"]),
        ("cor32", vec!["verify", "cor32", "--p", "7", "--module", "V1+V2", "--from", "8", "--to", "11"]),
        ("prop33", vec!["verify", "prop33", "--p", "7", "--module", "2*V1+2*V2", "--from", "8", "--to", "9"]),
        ("betak1", vec!["verify", "betak", "--p", "7", "--module", "U1+2*V1+2*V2", "--k", "1", "--from", "9", "--to", "11"]),
        ("betak2", vec!["verify", "betak", "--p", "7", "--module", "U1+2*V1", "--k", "2", "--from", "15", "--to", "18", "--tier", "slow"]),
        ("i3", vec!["verify", "i3", "--p", "7", "--module", "U1+2*V1+2*V2", "--from", "1", "--to", "12"]),
        ("lower7", vec!["sep", "verify-lower", "--p", "7"]),
        ("lower13", vec!["sep", "verify-lower", "--p", "13"]),
        ("upper", vec!["sep", "verify-upper", "--p", "7", "--trials", "200", "--seed", "42"]),
        ("relative", vec!["sep", "relative", "--p", "7", "--points", "20", "--seed", "42"]),
    ];
    let results: BTreeMap<&str, (Run, Run)> = std::thread::scope(|s| {
        let handles: Vec<_> = runs
            .iter()
            .flat_map(|(name, args)| [(*name, s.spawn(|| zp3(args))), (*name, s.spawn(|| zp3(args)))])
            .collect();
        let mut done: BTreeMap<&str, Vec<Run>> = BTreeMap::new();
        for (name, h) in handles {
            done.entry(name).or_default().push(h.join().unwrap());
        }
        done.into_iter()
            .map(|(k, mut v)| {
                let b = v.pop().unwrap();
                (k, (v.pop().unwrap(), b))
            })
            .collect()
    });
    let r = |name: &str| &results[name].0;

    let mut verdicts: Vec<(u32, &str, bool)> = Vec::new();

    let dims_ok = ["dims-V1", "dims-V1+V2", "dims-U1+V1", "dims-U1+2*V1"].iter().all(|n| {
        let run = r(n);
        passed(run)
            && instances(&run.report).len() == 13
            && instances(&run.report).iter().all(|i| {
                let c = &i["certificate"];
                c["tau_rank"] == c["oracle"] && c["dim_r"] == c["oracle"]
            })
    });
    verdicts.push((1, "transfer-image rank equals the Burnside dimension, d <= 12", dims_ok));
    verdicts.push((2, "|Sigma(S)| >= min{p, d+1} with extremal structure, p = 5, 7", lemma_exhaustive()));
    verdicts.push((3, "Davenport constant of Z_p is p, p = 5, 7", davenport()));
    verdicts.push((4, "Balandraud and Freeze-Smith bounds, p = 7, |S| <= 5", additive_bounds()));

    let p31 = r("prop31");
    let p31_ok = passed(p31) && (8..=10).all(|d| instances(&p31.report).iter().any(|i| i["degree"] == d && status_of(i) == "PASS"));
    verdicts.push((5, "qualifying monomials lie in I+*R+<=7, V1+V2, d = 8..10", p31_ok));

    let c32 = r("cor32");
    let c32_ok = passed(c32) && (8..=11).all(|d| instances(&c32.report).iter().any(|i| i["degree"] == d && status_of(i) == "PASS"));
    verdicts.push((6, "I_d inside the sum of R_e * I_(d-e), V1+V2, d = 8..11", c32_ok));

    let p33 = r("prop33");
    let findings: Vec<&Value> = instances(&p33.report).iter().filter(|i| status_of(i) == "FINDING").collect();
    let p33_ok = passed(p33)
        && !findings.is_empty()
        && findings.iter().all(|i| i["mode"] == "exact" && (i["outcome"] == "member" || i["outcome"] == "not-member"))
        && instances(&p33.report).iter().all(|i| status_of(i) != "FAIL");
    verdicts.push((7, "non-exceptional monomials contained, exceptional ones decided exactly, 2*V1+2*V2", p33_ok));

    let b1 = r("betak1");
    let b2 = r("betak2");
    let contained = |run: &Run, d: u64| degree_instance(&run.report, d).is_some_and(|i| i["outcome"] == "contained");
    let b1_ok = passed(b1)
        && degree_instance(&b1.report, 9).is_some_and(|i| i["outcome"] == "not-contained")
        && instances(&b1.report).iter().any(|i| i["degree"] == 9 && i["outcome"] == "not-member" && i["mode"] == "exact")
        && contained(b1, 10)
        && contained(b1, 11)
        && b1.report["params"]["beta_window"] == 9;
    let b2_ok = passed(b2) && b2.report["params"]["beta_window"].as_u64().is_some_and(|b| b <= 16) && contained(b2, 17) && contained(b2, 18);
    verdicts.push((8, "beta_1 window on U1+2*V1+2*V2 is 9; beta_2 window on U1+2*V1 is at most 16", b1_ok && b2_ok));

    let i3 = r("i3");
    verdicts.push((9, "I+^3 inside I+*R+ + R+ on U1+2*V1+2*V2, d <= 12", passed(i3)));

    let lower_ok = ["lower7", "lower13"].iter().all(|n| {
        let run = r(n);
        let p = run.report["params"]["p"].as_u64().unwrap_or(0);
        passed(run)
            && instances(&run.report).iter().filter(|i| i["outcome"] == "agree").count() as u64 == p
            && instances(&run.report).iter().any(|i| i["monomial"] == "y*tau_chi(x1^p)" && i["certificate"]["values"] == serde_json::json!(["1", format!("z{}^{}", 3 * p, p)]))
    });
    verdicts.push((10, "(1,1,0,0) and (w,1,0,0) agree up to degree p and split in degree p+1, p = 7, 13", lower_ok));

    let up = r("upper");
    let up_ok = passed(up)
        && instances(&up.report).len() > 200
        && instances(&up.report).iter().all(|i| i["outcome"] == "same-orbit" || (i["outcome"] == "separated" && i["degree"].as_u64().is_some_and(|d| d <= 8)));
    verdicts.push((11, "random and structured pairs separated in degree <= 8, p = 7", up_ok));

    let rel = r("relative");
    let rel_ok = passed(rel) && instances(&rel.report).len() == 40 && instances(&rel.report).iter().all(|i| i["outcome"] == "relative-invariant");
    verdicts.push((12, "relative invariants non-vanishing at 20 free points for both characters", rel_ok));

    let det: Vec<&str> = results
        .iter()
        .filter(|(_, (a, b))| a.stdout.is_empty() || without_timing(&a.stdout) != without_timing(&b.stdout))
        .map(|(n, _)| *n)
        .collect();
    verdicts.push((13, "repeated CLI runs give identical JSON apart from timing", det.is_empty()));

    let mut out = std::io::stdout().lock();
    for (n, desc, ok) in &verdicts {
        writeln!(out, "criterion {n:>2}: {} {desc}", if *ok { "PASS" } else { "FAIL" }).unwrap();
    }
    for (name, (run, _)) in &results {
        writeln!(out, "  {name}: exit {:?}, verdict {}, {} ms", run.code, run.report["verdict"], run.report["timing_ms"]).unwrap();
    }
    if !det.is_empty() {
        writeln!(out, "  non-deterministic: {det:?}").unwrap();
    }
    drop(out);
    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.2).map(|v| v.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
