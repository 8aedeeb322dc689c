//! Seeded properties of the command surface: determinism, replay from the
//! manifest, and exit codes that agree with the recorded verifications.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

use crate::props::{check, Property};

pub const PROPS: &[(&str, Property)] = &[("cli_deterministic_replayable_exit_codes", deterministic_replayable)];

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn domain_args() -> impl Strategy<Value = (Vec<String>, &'static str)> {
    prop_oneof![
        (2usize..=4, 0u32..=2).prop_map(|(d, k)| (vec![s("simplex"), s(d), s(k)], "simplex")),
        (1usize..=2, 1u32..=2).prop_map(|(d, k)| (vec![s("cube"), s(d), s(k)], "cube")),
        (1usize..=2, 1u32..=2).prop_map(|(d, k)| (vec![s("positive"), s(d), s(k)], "positive")),
        (1u32..=2).prop_map(|k| (vec![s("ball_euclid"), s(2), s(k)], "ball")),
    ]
    .prop_map(|(v, body)| {
        let args = vec![s("--body"), v[0].clone(), s("--dim"), v[1].clone(), s("--k"), v[2].clone()];
        (args, body)
    })
}

fn function_for(body: &'static str, dim: usize) -> BoxedStrategy<(String, bool)> {
    let affine = proptest::collection::vec(-4i32..=4, dim + 1)
        .prop_map(|c| format!("affine:{}", c.iter().map(|v| (*v as f64 / 2.0).to_string()).collect::<Vec<_>>().join(",")));
    let common = prop_oneof![
        Just(s("ribe")),
        Just(s("kalton")),
        Just(s("sqnorm")),
        Just(s("supnorm")),
        Just(s("zero")),
        affine,
    ];
    match body {
        "simplex" => prop_oneof![common, Just(s("entropy")), Just(s("simplexmax")), Just(s("omega"))]
            .prop_map(|f| (f, false))
            .boxed(),
        "positive" => prop_oneof![
            common.prop_map(|f| (f, false)),
            prop_oneof![Just("sup"), Just("l1"), Just("l2")].prop_map(|n| (format!("neglog:{n}"), true)),
        ]
        .boxed(),
        _ => common.prop_map(|f| (f, false)).boxed(),
    }
}

fn kind() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("convex"), Just("affine"), Just("jensen")]
}

fn grid_command() -> impl Strategy<Value = Vec<String>> {
    (domain_args(), any::<bool>(), kind(), proptest::option::of(1u8..=3)).prop_flat_map(|((dargs, body), defect, kind, t)| {
        let dim: usize = dargs[3].parse().unwrap();
        function_for(body, dim).prop_map(move |(f, exclude)| {
            let mut a = vec![s(if defect { "defect" } else { "distance" })];
            a.extend(dargs.iter().cloned());
            if exclude {
                a.push(s("--exclude-origin"));
            }
            a.extend([s("--fn"), f]);
            a.extend([s(if defect { "--kind" } else { "--class" }), s(kind)]);
            if let (true, Some(t)) = (defect, t) {
                a.extend([s("--t-power"), s(t)]);
            }
            a
        })
    })
}

fn gallery_command() -> impl Strategy<Value = Vec<String>> {
    let family = prop_oneof![Just("omega"), Just("entropy"), Just("simplexmax"), Just("fstar:blocks"), Just("fstar:nested")];
    (family, 1usize..=6, 0usize..=3, any::<bool>()).prop_map(|(f, a, len, list)| {
        let n = if list { (a..=a + len).map(s).collect::<Vec<_>>().join(",") } else { format!("{a}..{}", a + len) };
        vec![s("gallery"), s("--family"), s(f), s("--n"), n]
    })
}

fn lift_command() -> impl Strategy<Value = Vec<String>> {
    let body = prop_oneof![Just("cube"), Just("ball_sup"), Just("ball_euclid")];
    (body, 1usize..=2, 1u32..=2, 0u32..=10, 0u64..1000, any::<bool>()).prop_map(|(b, d, k, noise, seed, all)| {
        let d = if b == "ball_euclid" { 2 } else { d };
        vec![
            s("lift"),
            s("--body"),
            s(b),
            s("--dim"),
            s(d),
            s("--k"),
            s(k),
            s("--noise"),
            s(noise as f64 / 100.0),
            s("--seed"),
            s(seed),
            s("--directions"),
            s(if all { "all" } else { "sphere" }),
        ]
    })
}

fn talagrand_command() -> impl Strategy<Value = Vec<String>> {
    let system = prop_oneof![Just(("1", "2,3")), Just(("1", "2")), Just(("1/2", "2,4")), Just(("2", "1,2"))];
    (system, prop_oneof![Just("1/2"), Just("2/3"), Just("1")])
        .prop_map(|((e, n), p)| vec![s("talagrand"), s("--eps"), s(e), s("--n"), s(n), s("--p"), s(p)])
}

fn preimage_command() -> impl Strategy<Value = Vec<String>> {
    (1usize..=6, prop_oneof![Just(0.0), Just(0.125), Just(0.25)], 0usize..=25, 0u64..1000, prop_oneof![Just("1/2"), Just("1")])
        .prop_map(|(d, e, k, seed, p)| {
            vec![
                s("preimage"),
                s("--dim"),
                s(d),
                s("--eps"),
                s(e),
                s("--k"),
                s(k),
                s("--seed"),
                s(seed),
                s("--p"),
                s(p),
            ]
        })
}

/// Invocations that must be rejected with a usage error.
fn invalid_command() -> impl Strategy<Value = Vec<String>> {
    let words = |w: &[&str]| w.iter().map(|v| v.to_string()).collect::<Vec<_>>();
    prop_oneof![
        Just(words(&["defect", "--body", "cube", "--dim", "1", "--k", "1", "--fn", "nosuch", "--kind", "convex"])),
        Just(words(&["distance", "--body", "cube", "--dim", "2", "--k", "1", "--fn", "affine:1,2", "--class", "affine"])),
        Just(words(&["talagrand", "--eps", "1", "--n", "2", "--p", "3/2"])),
        Just(words(&["preimage", "--dim", "2", "--eps", "0.5"])),
        Just(words(&["preimage", "--dim", "3", "--target", "0.5,0.5"])),
        Just(words(&["gallery", "--family", "bogus"])),
        Just(words(&["lift", "--noise", "-1"])),
    ]
}

pub fn any_command() -> impl Strategy<Value = Vec<String>> {
    prop_oneof![
        1 => invalid_command(),
        3 => grid_command(),
        1 => gallery_command(),
        1 => lift_command(),
        1 => talagrand_command(),
        1 => preimage_command(),
    ]
}

fn run(args: &[String], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_approxconvex"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// Output files other than the manifest, by name.
fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .map(|rd| {
            rd.map(|e| e.unwrap())
                .filter(|e| e.file_name() != "manifest.json")
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
                .collect()
        })
        .unwrap_or_default()
}

/// Drops a trailing `--out DIR` so the arguments can be replayed elsewhere.
fn without_out(args: &[String]) -> Vec<String> {
    let mut v = args.to_vec();
    if let Some(i) = v.iter().position(|a| a == "--out") {
        v.drain(i..(i + 2).min(v.len()));
    }
    v
}

fn deterministic_replayable() -> Result<(), String> {
    check(701, any_command(), |args| {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run(&args, a.path());
        let code = first.status.code();
        prop_assert!(matches!(code, Some(0..=2)), "exit {:?}", code);
        if code == Some(2) {
            prop_assert!(!first.stderr.is_empty());
            prop_assert!(!a.path().join("manifest.json").exists());
            let again = run(&args, b.path());
            prop_assert_eq!(again.status.code(), Some(2));
            prop_assert_eq!(again.stderr, first.stderr);
            return Ok(());
        }
        let manifest: Value = serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
        let passed = manifest["passed"].as_bool().unwrap();
        prop_assert_eq!(passed, code == Some(0));
        let failed = manifest["verifications"].as_array().unwrap().iter().filter(|c| c["passed"] == false).count();
        prop_assert_eq!(failed == 0, passed);
        if !passed {
            prop_assert!(!first.stderr.is_empty());
        }
        for p in manifest["outputs"].as_array().unwrap() {
            prop_assert!(Path::new(p.as_str().unwrap()).exists());
        }
        let recorded: Vec<String> =
            manifest["arguments"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
        let replay = run(&without_out(&recorded), b.path());
        prop_assert_eq!(replay.status.code(), code);
        let (x, y) = (outputs(a.path()), outputs(b.path()));
        prop_assert!(!x.is_empty());
        prop_assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>());
        for (name, bytes) in &x {
            prop_assert!(bytes == &y[name], "{} differs on replay", name);
        }
        Ok(())
    })
}
