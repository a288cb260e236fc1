//! End-to-end runs of every verb: exit codes, schema validity, byte-identical
//! reruns, and the documented input examples.

use multicat::cli::run;
use serde_json::Value as Json;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn schema(command: &str) -> Json {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{command}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn validate(command: &str, out: &Json) {
    let v = jsonschema::validator_for(&schema(command)).unwrap();
    let errors: Vec<String> = v.iter_errors(out).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{command}: {errors:?}");
}

fn ok(args: &[&str]) -> Json {
    let mut all = vec!["multicat"];
    all.extend_from_slice(args);
    let (code, out, err) = run(all.clone());
    assert_eq!(code, 0, "{args:?}: {err}");
    let j: Json = serde_json::from_str(&out).unwrap();
    validate(j["command"].as_str().unwrap(), &j);
    let (_, again, _) = run(all);
    assert_eq!(out, again, "{args:?} is not deterministic");
    j
}

fn fails(args: &[&str]) -> (i32, Json) {
    let mut all = vec!["multicat"];
    all.extend_from_slice(args);
    let (code, out, err) = run(all);
    assert!(out.is_empty());
    let j: Json = serde_json::from_str(&err).unwrap();
    validate("error", &j);
    (code, j)
}

#[test]
fn two_globe_cell_counts() {
    let j = ok(&["convert", &data("globe2.txt")]);
    let counts: Vec<usize> = j["result"]["cells"].as_array().unwrap().iter().map(|c| c.as_array().unwrap().len()).collect();
    assert_eq!(counts, vec![2, 2, 1]);
    let g = ok(&["convert", &data("globe2.txt"), "--to", "graph"]);
    assert_eq!(g["result"]["value"]["level"], 2);
}

#[test]
fn empty_cells_section_is_the_empty_set() {
    let j = ok(&["convert", &data("empty.txt")]);
    assert_eq!(j["result"]["cells"], serde_json::json!([[]]));
}

#[test]
fn globularity_violation_is_rejected_by_name() {
    let (code, e) = fails(&["convert", &data("bad_globular.txt")]);
    assert_eq!(code, 1);
    assert!(e["message"].as_str().unwrap().contains("alpha"), "{e}");
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    std::fs::write(&p, "OBJECTS\na b\nARROWS\nf : a b\n").unwrap();
    let (code, e) = fails(&["convert", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!((e["error"].as_str(), e["line"].as_u64(), e["column"].as_u64()), (Some("parse"), Some(4), Some(7)));
}

/// Paths of at most `bound` edges by depth-first search over the edge list.
fn dfs_paths(edges: &[(&str, &str, &str)], objects: &[&str], bound: usize) -> BTreeSet<(String, String, Vec<String>)> {
    let mut out = BTreeSet::new();
    fn go(
        edges: &[(&str, &str, &str)],
        start: &str,
        at: &str,
        path: &mut Vec<String>,
        bound: usize,
        out: &mut BTreeSet<(String, String, Vec<String>)>,
    ) {
        out.insert((start.to_string(), at.to_string(), path.clone()));
        if path.len() == bound {
            return;
        }
        for (s, t, e) in edges {
            if *s == at {
                path.push(e.to_string());
                go(edges, start, t, path, bound, out);
                path.pop();
            }
        }
    }
    for o in objects {
        go(edges, o, o, &mut vec![], bound, &mut out);
    }
    out
}

#[test]
fn free_ncat_one_lists_paths() {
    let j = ok(&["free-ncat", "1", &data("two_objects.txt"), "--bound", "3"]);
    let mut got = BTreeSet::new();
    for c in j["result"]["cells"].as_array().unwrap().iter().filter(|c| c["dimension"] == 1) {
        let edges: Vec<String> = c["cell"]["children"].as_array().unwrap().iter().map(|e| e.as_str().unwrap().to_string()).collect();
        got.insert((c["source"].as_str().unwrap().to_string(), c["target"].as_str().unwrap().to_string(), edges));
    }
    let want = dfs_paths(&[("a", "b", "f"), ("b", "a", "g"), ("a", "a", "l")], &["a", "b"], 3);
    assert_eq!(got, want);
    let beyond = dfs_paths(&[("a", "b", "f"), ("b", "a", "g"), ("a", "a", "l")], &["a", "b"], 4).len() - want.len();
    assert_eq!(j["result"]["truncated"].as_u64(), Some(beyond as u64));
}

#[test]
fn lift_of_t_cross_is_the_product_category() {
    let j = ok(&["lift", "--multitensor", "tcross:free-category", &data("arrow.txt"), &data("span.txt")]);
    let r = &j["result"];
    assert_eq!(r["isomorphic_to_product"], true);
    assert_eq!(r["certificate"]["kind"], "split");
    // objects 2·3, arrows (1+2)·(3+2)
    assert_eq!(r["category"]["objects"].as_array().unwrap().len(), 6);
    assert_eq!(r["category"]["arrows"].as_array().unwrap().len(), 15);
}

#[test]
fn lift_of_a_monoid_operad() {
    let j = ok(&["lift", "--multitensor", "operad:monoid:cyclic2+", &data("flip.txt"), &data("trivial2.txt")]);
    // {x, y} are identified by the flip, z stays: 2 classes times 2 points.
    assert_eq!(j["result"]["counts"], serde_json::json!([4]));
}

#[test]
fn contractibility_of_the_identity() {
    let j = ok(&["check-contractible", "--collection", "identity:product"]);
    assert!(j["result"]["verdict"].as_str().unwrap().starts_with("contractible up to bound"));
    let j = ok(&["check-contractible", "--collection", "operad:monoid:cyclic2+"]);
    assert_eq!(j["result"]["contractible"], false);
}

#[test]
fn coequalise_presentations() {
    for (file, size) in [("idempotent.txt", 2), ("klein.txt", 4)] {
        let j = ok(&["coequalise", &data(file), "--bound", "4"]);
        assert_eq!(j["result"]["size"], size, "{file}");
    }
}

#[test]
fn every_other_verb_validates() {
    let runs: Vec<Vec<String>> = vec![
        vec!["gamma".into(), "--multitensor".into(), "product".into(), data("two_objects.txt"), "--bound".into(), "2".into()],
        vec!["bar".into(), "--monad".into(), "free-category".into(), "--sizes".into(), "1,2".into()],
        vec!["compose".into(), "--left".into(), "product".into(), "--right".into(), "operad:two-binary".into(), "--sizes".into(), "1,2".into()],
        vec!["pushforward".into(), "--map".into(), "unit:free-monoid".into(), data("points.txt")],
        vec!["law".into(), "--monad".into(), "free-category".into(), data("two_objects.txt"), "--bound".into(), "2".into()],
        vec!["check-axioms".into(), "--multitensor".into(), "operad:file:".to_string() + &data("two_ops.txt"), "--seed".into(), "7".into()],
        vec!["check-pathlike".into(), "--monad".into(), "free-category".into(), data("two_objects.txt")],
        vec!["check-cartesian".into(), "--collection".into(), "enlarged-fibre".into(), "--seed".into(), "3".into()],
        vec!["convert".into(), data("globe2.txt"), "--to".into(), "presheaf".into()],
        vec!["convert".into(), data("klein.txt"), "--to".into(), "text".into()],
    ];
    for r in runs {
        let args: Vec<&str> = r.iter().map(String::as_str).collect();
        let j = ok(&args);
        if let Some(p) = j["result"].get("passed") {
            let expected = args[0] != "check-cartesian";
            assert_eq!(p.as_bool(), Some(expected), "{args:?}");
        }
    }
}

#[test]
fn text_round_trip_through_convert() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["globe2.txt", "arrow.txt", "two_objects.txt", "klein.txt", "flip.txt", "two_ops.txt"] {
        let j = ok(&["convert", &data(f), "--to", "text"]);
        let p = dir.path().join(f);
        std::fs::write(&p, j["result"]["text"].as_str().unwrap()).unwrap();
        let a = ok(&["convert", &data(f)]);
        let b = ok(&["convert", p.to_str().unwrap()]);
        assert_eq!(a["result"], b["result"], "{f}");
    }
}

#[test]
fn json_inputs_read_back() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["globe2.txt", "span.txt", "two_objects.txt"] {
        let a = ok(&["convert", &data(f)]);
        let p = dir.path().join(format!("{f}.json"));
        std::fs::write(&p, serde_json::to_string(&a["result"]).unwrap()).unwrap();
        let b = ok(&["convert", p.to_str().unwrap()]);
        assert_eq!(a["result"], b["result"], "{f}");
    }
}

fn binary(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut c = Command::new(env!("CARGO_BIN_EXE_multicat"));
    c.args(args).env_remove("MULTICAT_BOUND");
    for (k, v) in env {
        c.env(k, v);
    }
    let o = c.output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

#[test]
fn exit_codes_and_environment() {
    let (code, out, _) = binary(&["coequalise", &data("klein.txt")], &[("MULTICAT_BOUND", "4")]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Json>(&out).unwrap()["bound"], 4);
    let (code, out, _) = binary(&["coequalise", &data("klein.txt"), "--bound", "5"], &[("MULTICAT_BOUND", "4")]);
    assert_eq!((code, serde_json::from_str::<Json>(&out).unwrap()["bound"].as_u64()), (0, Some(5)));
    let (code, _, err) = binary(&["law", "--monad", "free-category", &data("two_objects.txt"), "--bound", "3"], &[]);
    assert_eq!(code, 2, "{err}");
    let (code, _, err) = binary(&["no-such-verb"], &[]);
    assert_eq!(code, 1);
    assert_eq!(serde_json::from_str::<Json>(&err).unwrap()["error"], "usage");
    let (code, _, _) = binary(&["convert", "/nonexistent"], &[]);
    assert_eq!(code, 1);
    let (code, _, _) = binary(&["convert", &data("globe2.txt"), "--bound", "0"], &[]);
    assert_eq!(code, 1);
    let (code, out, _) = binary(&["--help"], &[]);
    assert!(code == 0 && out.contains("free-ncat"));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("o.json");
    let (code, out, _) = run(["multicat", "convert", &data("arrow.txt"), "--out", p.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
    let j: Json = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    validate("convert", &j);
}

#[test]
fn text_format_lists_cells() {
    let (code, out, _) = run(["multicat", "free-ncat", "1", &data("two_objects.txt"), "--bound", "1", "--format", "text"]);
    assert_eq!(code, 0);
    let lines: BTreeMap<&str, usize> = out.lines().fold(BTreeMap::new(), |mut m, l| {
        *m.entry(l.split(' ').next().unwrap()).or_default() += 1;
        m
    });
    // 2 objects, 2 identities and 3 edges
    assert_eq!((lines.get("0"), lines.get("1")), (Some(&2), Some(&5)));
}
