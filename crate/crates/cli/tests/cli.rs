use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ruleparse_core::conllu::{parse_conllu, to_conllu_string};
use ruleparse_core::eval::score;
use ruleparse_core::{LemmaSuffixMatrix, SuffixInventory};
use serde_json::Value;
use tempfile::TempDir;

fn examples() -> (PathBuf, PathBuf) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/examples");
    (dir.join("examples.conllu"), dir.join("examples.morph"))
}

fn ruleparse(args: &[&str]) -> Output {
    ruleparse_env(args, &[])
}

fn ruleparse_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ruleparse"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn rule_codes(conllu: &str) -> Vec<String> {
    conllu
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .filter_map(|l| l.split('\t').nth(9)?.split('|').find_map(|kv| kv.strip_prefix("Rule=")).map(str::to_owned))
        .collect()
}

#[test]
fn annotate_writes_rule_codes_and_manifest() {
    let (tb, morph) = examples();
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("ann.conllu");
    ok(&ruleparse(&["annotate", p(&tb), p(&morph), "-o", p(&out)]));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# global.rule_codes = CPI NC PC AC AJC AAJ AV AJN NV NONE\n"));
    assert!(text.contains("\tRule=CPI|RuleHead=3\n"), "{}", text);
    let sentences = parse_conllu(&text).unwrap();
    assert_eq!(rule_codes(&text).len(), sentences.iter().map(|s| s.len()).sum::<usize>());

    let manifest: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("ann.conllu.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "annotate");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    let digest = manifest["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.bytes().all(|b| b.is_ascii_hexdigit()));
    assert_eq!(manifest["config"]["rules"], serde_json::json!(["CPI", "NC", "PC", "AC", "AJC", "AAJ", "AJN"]));
    let fires = manifest["diagnostics"]["fires"].as_array().unwrap();
    assert_eq!(fires.len(), 9);
    assert!(manifest["started_at"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn rules_flag_restricts_engine() {
    let (tb, morph) = examples();
    let text = ok(&ruleparse(&["annotate", p(&tb), p(&morph), "--rules", "cpi,nc"]));
    let codes = rule_codes(&text);
    assert!(codes.iter().any(|c| c == "CPI"));
    assert!(codes.iter().all(|c| ["CPI", "NC", "NONE"].contains(&c.as_str())), "{:?}", codes);
}

#[test]
fn flags_override_environment() {
    let (tb, morph) = examples();
    let from_env = ok(&ruleparse_env(&["annotate", p(&tb), p(&morph)], &[("RULEPARSE_RULES", "nc")]));
    assert!(rule_codes(&from_env).iter().all(|c| c == "NC" || c == "NONE"));
    let flag = ok(&ruleparse_env(&["annotate", p(&tb), p(&morph), "--rules", "pc"], &[("RULEPARSE_RULES", "nc")]));
    assert!(rule_codes(&flag).iter().all(|c| c == "PC" || c == "NONE"));
    assert!(rule_codes(&flag).iter().any(|c| c == "PC"));
}

#[test]
fn missing_sidecar_is_an_input_error() {
    let (tb, _) = examples();
    let out = ruleparse(&["annotate", p(&tb), "/nonexistent/examples.morph"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/examples.morph"));
}

#[test]
fn malformed_treebank_is_an_input_error() {
    let (_, morph) = examples();
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.conllu");
    fs::write(&bad, "1\tev\n\n").unwrap();
    let out = ruleparse(&["annotate", p(&bad), p(&morph)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_does_not_depend_on_jobs() {
    let (tb, morph) = examples();
    let one = ok(&ruleparse(&["--jobs", "1", "features", p(&tb), "--morph", p(&morph), "--hybrid", "rule+infl"]));
    let four = ok(&ruleparse(&["--jobs", "4", "features", p(&tb), "--morph", p(&morph), "--hybrid", "rule+infl"]));
    assert_eq!(one, four);
}

#[test]
fn features_jsonl_and_sufvec() {
    let (tb, morph) = examples();
    let jsonl = ok(&ruleparse(&["features", p(&tb), "--morph", p(&morph), "--hybrid", "rule+last", "--format", "jsonl"]));
    let first: Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["rule_code"], "PC");
    assert_eq!(first["last_suffix"], "NONE");
    let second: Value = serde_json::from_str(jsonl.lines().nth(1).unwrap()).unwrap();
    assert_eq!(second["last_suffix"], "Acc");

    let missing = ruleparse(&["features", p(&tb), "--morph", p(&morph), "--hybrid", "sufvec"]);
    assert_eq!(missing.status.code(), Some(2));
    let conflict = ruleparse(&["features", p(&tb), "--morph", p(&morph), "--hybrid", "last+infl"]);
    assert_eq!(conflict.status.code(), Some(2));

    let tmp = TempDir::new().unwrap();
    let m = tmp.path().join("m.tsv");
    ok(&ruleparse(&["matrix", p(&morph), "-o", p(&m)]));
    let text = ok(&ruleparse(&["features", p(&tb), "--morph", p(&morph), "--hybrid", "sufvec", "--matrix", p(&m)]));
    let vec_field = text
        .lines()
        .find(|l| l.starts_with("1\tHer\t"))
        .and_then(|l| l.split('\t').nth(9))
        .and_then(|misc| misc.strip_prefix("SufVec="))
        .unwrap();
    assert_eq!(vec_field.split(',').count(), 81);
}

#[test]
fn matrix_cap_and_reload() {
    let tmp = TempDir::new().unwrap();
    let morph = tmp.path().join("c.morph");
    fs::write(&morph, "1\t1\tev\tNoun+A3sg+Gen\n1\t2\tev\tNoun+A3pl\n1\t3\tgit\tVerb+Past\n").unwrap();
    let capped = ok(&ruleparse(&["matrix", p(&morph), "--cap", "1"]));
    let rows: Vec<&str> = capped.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(rows, vec!["ev"]);

    let full = ok(&ruleparse(&["matrix", p(&morph)]));
    let m = LemmaSuffixMatrix::read_tsv(full.as_bytes(), SuffixInventory::default()).unwrap();
    assert_eq!(m.to_tsv_string(), full);
    let ev = m.row("ev").unwrap();
    let inv = SuffixInventory::default();
    for tag in ["A3sg", "Gen", "A3pl"] {
        assert!((ev[inv.index_of(tag).unwrap()] - 1.0 / 3.0).abs() < 1e-9, "{}", tag);
    }
    assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let empty = tmp.path().join("empty.morph");
    fs::write(&empty, "").unwrap();
    let text = ok(&ruleparse(&["matrix", p(&empty)]));
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("lemma\tA1sg\t"));
}

#[test]
fn score_reports_and_errors() {
    let (tb, _) = examples();
    let report: Value = serde_json::from_str(&ok(&ruleparse(&["score", p(&tb), p(&tb)]))).unwrap();
    assert_eq!(report["uas"], 1.0);
    assert_eq!(report["las"], 1.0);

    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(&tb).unwrap();
    let mut system = parse_conllu(&text).unwrap();
    for s in &mut system {
        reattach(s, |id| id % 3 == 0);
    }
    let sys = tmp.path().join("sys.conllu");
    fs::write(&sys, to_conllu_string(&system)).unwrap();
    let report: Value = serde_json::from_str(&ok(&ruleparse(&["score", p(&tb), p(&sys)]))).unwrap();
    let lib = score(&parse_conllu(&text).unwrap(), &system).unwrap();
    assert_eq!(report["uas"].as_f64().unwrap(), lib.uas);
    assert_eq!(report["las"].as_f64().unwrap(), lib.las);
    assert_eq!(report["correct_heads"].as_u64().unwrap() as usize, lib.correct_heads);

    let short = tmp.path().join("short.conllu");
    let mut truncated = parse_conllu(&text).unwrap();
    truncated[0].tokens.pop();
    fs::write(&short, to_conllu_string(&truncated)).unwrap();
    assert_eq!(ruleparse(&["score", p(&tb), p(&short)]).status.code(), Some(2));
}

/// Reattaches the selected tokens to the sentence's root word, which keeps
/// the tree valid.
fn reattach(s: &mut ruleparse_core::Sentence, pick: impl Fn(usize) -> bool) {
    let root = s.tokens.iter().find(|t| t.head == Some(0)).unwrap().id;
    for t in &mut s.tokens {
        if t.id != root && pick(t.id) {
            t.head = Some(root);
            t.deprel = Some("dep".into());
        }
    }
}

fn write_outputs(dir: &Path, gold: &str, variants: usize) {
    fs::create_dir_all(dir).unwrap();
    let base = parse_conllu(gold).unwrap();
    for k in 0..variants {
        let mut sys = base.clone();
        for (i, s) in sys.iter_mut().enumerate() {
            reattach(s, |id| (id + i + k) % (k + 2) == 0);
        }
        fs::write(dir.join(format!("run{}.conllu", k)), to_conllu_string(&sys)).unwrap();
    }
}

#[test]
fn sigtest_pairs_and_determinism() {
    let (tb, _) = examples();
    let gold = fs::read_to_string(&tb).unwrap();
    let tmp = TempDir::new().unwrap();
    let (a, b, same) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("same"));
    write_outputs(&a, &gold, 5);
    write_outputs(&b, &gold, 5);
    fs::create_dir_all(&same).unwrap();
    for k in 0..5 {
        fs::copy(a.join("run0.conllu"), same.join(format!("copy{}.conllu", k))).unwrap();
    }
    fs::write(b.join("notes.txt"), "ignored").unwrap();

    let args = ["--seed", "7", "sigtest", p(&tb), p(&a), p(&b), "--shuffles", "2000"];
    let first = ok(&ruleparse(&args));
    let result: Value = serde_json::from_str(&first).unwrap();
    let p_values = result["p_values"].as_array().unwrap();
    assert_eq!(p_values.iter().map(|r| r.as_array().unwrap().len()).sum::<usize>(), 25);
    assert_eq!(first, ok(&ruleparse(&args)));

    let result: Value = serde_json::from_str(&ok(&ruleparse(&["sigtest", p(&tb), p(&same), p(&same), "--shuffles", "500"]))).unwrap();
    assert_eq!(result["harmonic_mean_p"], 1.0);

    let empty = tmp.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    assert_eq!(ruleparse(&["sigtest", p(&tb), p(&a), p(&empty)]).status.code(), Some(2));
}

#[test]
fn ablate_rows() {
    let (tb, morph) = examples();
    let rows: Value = serde_json::from_str(&ok(&ruleparse(&["ablate", p(&tb), p(&morph)]))).unwrap();
    let rows = rows.as_array().unwrap();
    let labels: Vec<&str> = rows.iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels, vec!["no rule", "CPI", "+NC", "+PC", "+AC+AAJ", "+AV", "+AJC+AJN", "+NV"]);
    assert_eq!(rows[0]["coverage"], 0.0);
    assert!(rows[0]["precision"].is_null());

    let rows: Value = serde_json::from_str(&ok(&ruleparse(&["ablate", p(&tb), p(&morph), "--no-av-nv"]))).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 6);
}
