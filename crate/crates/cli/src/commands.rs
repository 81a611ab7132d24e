use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use ruleparse_core::conllu::{parse_conllu_bytes, to_conllu_string};
use ruleparse_core::engine::{self, EngineReport, Parse, RuleConfig};
use ruleparse_core::eval::{ablate, no_av_nv_steps, randomization_test, score, table1_steps};
use ruleparse_core::features::{export, write_jsonl, Encoder, FeatureBundle, HybridConfig};
use ruleparse_core::matrix::build_matrix_parallel;
use ruleparse_core::sidecar::align_analyses;
use ruleparse_core::{read_morph_sidecar, Lexicon, LemmaSuffixMatrix, MorphAnalysis, Sentence, SuffixInventory};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{AblateArgs, AnnotateArgs, Cli, Command, FeaturesArgs, Format, MatrixArgs, ScoreArgs, SigtestArgs};

/// MISC key holding the head a rule chose.
pub const RULE_HEAD_KEY: &str = "RuleHead";

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Annotate(args) => annotate(cli, args),
        Command::Features(args) => features(cli, args),
        Command::Matrix(args) => matrix(cli, args),
        Command::Score(args) => score_cmd(cli, args),
        Command::Sigtest(args) => sigtest(cli, args),
        Command::Ablate(args) => ablate_cmd(cli, args),
    }
}

fn read_treebank(manifest: &mut RunManifest, path: &Path) -> Result<Vec<Sentence>> {
    let bytes = manifest.read(path)?;
    parse_conllu_bytes(&bytes).with_context(|| format!("{}", path.display()))
}

fn read_analyses(manifest: &mut RunManifest, path: &Path, sentences: &[Sentence]) -> Result<Vec<Vec<MorphAnalysis>>> {
    let bytes = manifest.read(path)?;
    let map = read_morph_sidecar(bytes.as_slice()).with_context(|| format!("{}", path.display()))?;
    align_analyses(&map, sentences).with_context(|| format!("{} does not match the treebank", path.display()))
}

fn load_lexicon(manifest: &mut RunManifest, spec: &str) -> Result<Lexicon> {
    if spec == "sample" {
        return Ok(Lexicon::sample());
    }
    let dir = Path::new(spec);
    for file in ruleparse_core::lexicon::LexiconFile::ALL {
        manifest.read(&dir.join(file.file_name()))?;
    }
    Lexicon::load_dir(dir).with_context(|| format!("lexicon {}", dir.display()))
}

fn load_inventory(manifest: &mut RunManifest, path: Option<&Path>) -> Result<SuffixInventory> {
    match path {
        None => Ok(SuffixInventory::default()),
        Some(p) => {
            let bytes = manifest.read(p)?;
            let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", p.display()))?;
            SuffixInventory::parse(&text).with_context(|| format!("{}", p.display()))
        }
    }
}

fn write_output(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json_line<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    Ok(text)
}

/// Runs the engine on every sentence; order matches the input.
fn run_engine(
    sentences: &[Sentence],
    analyses: &[Vec<MorphAnalysis>],
    lex: &Lexicon,
    cfg: &RuleConfig,
) -> Result<Vec<Parse>> {
    sentences
        .par_iter()
        .zip(analyses)
        .enumerate()
        .map(|(i, (s, a))| engine::run(s, a, lex, cfg).with_context(|| format!("sentence {}", i + 1)))
        .collect()
}

fn merged_report(parses: &[Parse]) -> EngineReport {
    let mut total = EngineReport::default();
    for p in parses {
        total.merge(&p.report);
    }
    total
}

fn render(sentences: &mut [Sentence], bundles: &[Vec<FeatureBundle>], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Conllu => {
            export(sentences, bundles)?;
            Ok(to_conllu_string(sentences).into_bytes())
        }
        Format::Jsonl => {
            let mut out = Vec::new();
            write_jsonl(&mut out, sentences, bundles)?;
            Ok(out)
        }
    }
}

fn annotate(cli: &Cli, args: &AnnotateArgs) -> Result<()> {
    let mut manifest = RunManifest::new(
        "annotate",
        json!({ "rules": args.engine.rules, "lexicon": args.engine.lexicon, "format": format_name(args.format), "seed": cli.seed }),
    );
    let mut sentences = read_treebank(&mut manifest, &args.treebank)?;
    let analyses = read_analyses(&mut manifest, &args.morph, &sentences)?;
    let lex = load_lexicon(&mut manifest, &args.engine.lexicon)?;
    let parses = run_engine(&sentences, &analyses, &lex, &RuleConfig::new(args.engine.rules))?;
    let encoder = Encoder::new(HybridConfig::RULE, SuffixInventory::default(), None)?;
    let bundles: Vec<Vec<FeatureBundle>> = sentences
        .iter()
        .zip(&parses)
        .map(|(s, p)| encoder.encode(s, &p.assignments, &[]))
        .collect::<Result<_, _>>()?;
    let bytes = match args.format {
        Format::Jsonl => render(&mut sentences, &bundles, args.format)?,
        Format::Conllu => {
            export(&mut sentences, &bundles)?;
            for (s, p) in sentences.iter_mut().zip(&parses) {
                for t in &mut s.tokens {
                    t.misc.remove(RULE_HEAD_KEY);
                }
                for a in &p.assignments {
                    s.tokens[a.dependent - 1].misc.insert(RULE_HEAD_KEY, a.head.to_string());
                }
            }
            to_conllu_string(&sentences).into_bytes()
        }
    };
    write_output(args.output.as_deref(), &bytes)?;
    manifest.diagnostics = Some(serde_json::to_value(merged_report(&parses))?);
    manifest.finish(args.output.as_deref())
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Conllu => "conllu",
        Format::Jsonl => "jsonl",
    }
}

fn features(cli: &Cli, args: &FeaturesArgs) -> Result<()> {
    let cfg = args.hybrid;
    let mut manifest = RunManifest::new(
        "features",
        json!({
            "hybrid": cfg.to_string(),
            "rules": args.engine.rules,
            "lexicon": args.engine.lexicon,
            "format": format_name(args.format),
            "seed": cli.seed,
        }),
    );
    let mut sentences = read_treebank(&mut manifest, &args.treebank)?;
    let analyses = match &args.morph {
        Some(path) => read_analyses(&mut manifest, path, &sentences)?,
        None if cfg.needs_analyses() || cfg.rule => bail!("--hybrid {} needs --morph", cfg),
        None => vec![Vec::new(); sentences.len()],
    };
    let inventory = load_inventory(&mut manifest, args.inventory.as_deref())?;
    let matrix = match (&args.matrix, cfg.needs_matrix()) {
        (Some(path), true) => {
            let bytes = manifest.read(path)?;
            Some(
                LemmaSuffixMatrix::read_tsv(bytes.as_slice(), inventory.clone())
                    .with_context(|| format!("{}", path.display()))?,
            )
        }
        (None, true) => bail!("--hybrid {} needs --matrix", cfg),
        (Some(_), false) => bail!("--matrix is only used by the sufvec mode"),
        (None, false) => None,
    };
    let parses = if cfg.rule {
        let lex = load_lexicon(&mut manifest, &args.engine.lexicon)?;
        Some(run_engine(&sentences, &analyses, &lex, &RuleConfig::new(args.engine.rules))?)
    } else {
        None
    };
    let encoder = Encoder::new(cfg, inventory, matrix)?;
    let bundles: Vec<Vec<FeatureBundle>> = sentences
        .par_iter()
        .zip(&analyses)
        .enumerate()
        .map(|(i, (s, a))| {
            let assignments = parses.as_ref().map_or(&[][..], |p| &p[i].assignments[..]);
            encoder.encode(s, assignments, a).with_context(|| format!("sentence {}", i + 1))
        })
        .collect::<Result<_>>()?;
    let bytes = render(&mut sentences, &bundles, args.format)?;
    write_output(args.output.as_deref(), &bytes)?;
    if let Some(p) = &parses {
        manifest.diagnostics = Some(serde_json::to_value(merged_report(p))?);
    }
    manifest.finish(args.output.as_deref())
}

fn matrix(cli: &Cli, args: &MatrixArgs) -> Result<()> {
    let mut manifest = RunManifest::new("matrix", json!({ "cap": args.cap, "seed": cli.seed }));
    let inventory = load_inventory(&mut manifest, args.inventory.as_deref())?;
    let mut corpus = Vec::new();
    for path in &args.morph {
        let bytes = manifest.read(path)?;
        let map = read_morph_sidecar(bytes.as_slice()).with_context(|| format!("{}", path.display()))?;
        corpus.extend(map.into_values());
    }
    let (m, report) = build_matrix_parallel(&inventory, &corpus, args.cap);
    write_output(args.output.as_deref(), m.to_tsv_string().as_bytes())?;
    manifest.diagnostics = Some(serde_json::to_value(report)?);
    manifest.finish(args.output.as_deref())
}

fn score_cmd(cli: &Cli, args: &ScoreArgs) -> Result<()> {
    let mut manifest = RunManifest::new("score", json!({ "seed": cli.seed }));
    let gold = read_treebank(&mut manifest, &args.gold)?;
    let system = read_treebank(&mut manifest, &args.system)?;
    let scores = score(&gold, &system)?;
    write_output(args.output.as_deref(), &to_json_line(&scores)?)?;
    manifest.finish(args.output.as_deref())
}

/// The `.conllu` files of `dir` in name order.
fn output_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "conllu"));
    files.sort();
    if files.is_empty() {
        bail!("{} contains no .conllu files", dir.display());
    }
    Ok(files)
}

fn sigtest(cli: &Cli, args: &SigtestArgs) -> Result<()> {
    let mut manifest = RunManifest::new(
        "sigtest",
        json!({ "shuffles": args.shuffles, "metric": args.metric, "seed": cli.seed }),
    );
    let gold = read_treebank(&mut manifest, &args.gold)?;
    let mut load_dir = |dir: &Path| -> Result<Vec<Vec<Sentence>>> {
        output_files(dir)?.iter().map(|f| read_treebank(&mut manifest, f)).collect()
    };
    let a = load_dir(&args.dir_a)?;
    let b = load_dir(&args.dir_b)?;
    let result = randomization_test(&gold, &a, &b, args.shuffles, args.metric, cli.seed)?;
    write_output(args.output.as_deref(), &to_json_line(&result)?)?;
    manifest.finish(args.output.as_deref())
}

fn ablate_cmd(cli: &Cli, args: &AblateArgs) -> Result<()> {
    let mut manifest = RunManifest::new(
        "ablate",
        json!({ "lexicon": args.lexicon, "no_av_nv": args.no_av_nv, "seed": cli.seed }),
    );
    let gold = read_treebank(&mut manifest, &args.gold)?;
    let analyses = read_analyses(&mut manifest, &args.morph, &gold)?;
    let lex = load_lexicon(&mut manifest, &args.lexicon)?;
    let steps = if args.no_av_nv { no_av_nv_steps() } else { table1_steps() };
    let rows = ablate(&gold, &analyses, &lex, &steps)?;
    write_output(args.output.as_deref(), &to_json_line(&rows)?)?;
    manifest.finish(args.output.as_deref())
}
