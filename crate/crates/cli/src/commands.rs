use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use sri_core::corpus::{
    extract_frames, read_alignments, read_conll, read_sidecar, AlignmentOptions, ColumnProfile, ConllOptions, Corpus,
    CorpusStats, ExtractOptions, Frame, LanguageInput, SidecarFile,
};
use sri_core::eval::{
    evaluate, gold_inventory, select_fraction, stratified_shuffling, supervised_baseline, syntactic_baseline,
    Clustering, LabelSet, RoleMapping, SignificanceEntry,
};
use sri_core::inference::{self, ClampMask, ClampSource, DecodeConfig, FittedModel, TrainConfig};
use sri_core::synth::{generate_corpus, SyntheticConfig};
use sri_core::Error;

use crate::manifest::{default_path, RunManifest};
use crate::{BaselineArgs, BaselineKind, DecodeArgs, EvalArgs, GenerateArgs, IngestArgs, Profile, Rules, StatsArgs, TrainArgs};

/// Bad command-line usage that clap cannot detect.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// 1 usage or configuration, 2 data, 3 internal invariant violation.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Domain(_)) => 1,
        Some(Error::Contract(_)) => 3,
        _ => 2,
    }
}

fn finish(m: RunManifest, explicit: Option<PathBuf>, primary: &Path) -> Result<()> {
    m.finish(&explicit.unwrap_or_else(|| default_path(primary)))
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| usage(format!("expected LANG=VALUE, got {s:?}")))
}

fn language_of(corpus: &Corpus, name: &str) -> Result<usize> {
    corpus
        .language_index(name)
        .ok_or_else(|| usage(format!("language {name:?} is not in the corpus ({})", corpus.languages.join(", "))))
}

fn write(path: &Path, text: &str, m: &mut RunManifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    m.output(path)
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let mut m = RunManifest::start("ingest");
    if a.conll.len() > 2 {
        return Err(usage("at most two --conll languages"));
    }
    if a.conll.len() == 2 && a.alignments.is_none() {
        return Err(usage("two languages need --alignments"));
    }
    if a.conll.len() == 1 && a.alignments.is_some() {
        return Err(usage("--alignments needs two --conll languages"));
    }
    let options = ConllOptions {
        profile: match a.profile {
            Profile::Gold => ColumnProfile::Gold,
            Profile::Predicted => ColumnProfile::Predicted,
        },
    };
    let mut langs = Vec::new();
    for spec in &a.conll {
        let (name, path) = split_pair(spec)?;
        let path = PathBuf::from(path);
        m.input(&path)?;
        let sentences = read_conll(&path, &options)?;
        langs.push((name.to_string(), sentences));
    }
    let mut sidecars: Vec<Option<SidecarFile>> = vec![None; langs.len()];
    for spec in &a.sidecar {
        let (name, path) = split_pair(spec)?;
        let i = langs
            .iter()
            .position(|l| l.0 == name)
            .ok_or_else(|| usage(format!("--sidecar for unknown language {name}")))?;
        let path = PathBuf::from(path);
        m.input(&path)?;
        sidecars[i] = Some(read_sidecar(&path)?);
    }
    let mut rules = vec![Rules::English; langs.len()];
    for spec in &a.rules {
        let (name, value) = split_pair(spec)?;
        let i = langs
            .iter()
            .position(|l| l.0 == name)
            .ok_or_else(|| usage(format!("--rules for unknown language {name}")))?;
        rules[i] = match value {
            "english" => Rules::English,
            "german" => Rules::German,
            other => return Err(usage(format!("unknown rules {other:?}; use english or german"))),
        };
    }
    let options: Vec<ExtractOptions> = rules
        .iter()
        .map(|r| match r {
            Rules::English => ExtractOptions::english(),
            Rules::German => ExtractOptions::german(),
        })
        .collect();
    let alignments = match &a.alignments {
        Some(p) => {
            m.input(p)?;
            Some(read_alignments(p, AlignmentOptions { one_to_one: a.one_to_one })?)
        }
        None => None,
    };
    let inputs: Vec<LanguageInput<'_>> = langs
        .iter()
        .enumerate()
        .map(|(i, (name, sentences))| LanguageInput {
            name,
            sentences,
            sidecar: sidecars[i].as_ref(),
            options: &options[i],
        })
        .collect();
    let corpus = extract_frames(&inputs, alignments.as_deref())?;
    write(&a.out, &(corpus.to_json()? + "\n"), &mut m)?;
    print!("{}", CorpusStats::of(&corpus));
    finish(m, a.manifest.manifest, &a.out)
}

fn trace_tsv(trace: &[inference::TraceRecord]) -> String {
    let mut s = String::from("chain\titeration\tburn_in\tlog_joint\n");
    for r in trace {
        s.push_str(&format!("{}\t{}\t{}\t{}\n", r.chain, r.iteration, r.burn_in, r.log_joint));
    }
    s
}

pub fn train(a: TrainArgs) -> Result<()> {
    let mut m = RunManifest::start("train");
    m.config(&a.config)?;
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let config = TrainConfig::from_toml(&text)?;
    m.seed = Some(config.seed);
    m.input(&a.corpus)?;
    let corpus = Corpus::load(&a.corpus)?;
    let space = config.space()?;
    let clamps = match &config.clamp {
        None => ClampMask::none(&corpus),
        Some(c) => {
            let labels = match (c.source, &c.path) {
                (ClampSource::Labels, Some(p)) => {
                    let p = a.config.parent().map_or_else(|| p.clone(), |d| d.join(p));
                    m.input(&p)?;
                    Some(LabelSet::load(&p)?)
                }
                _ => None,
            };
            ClampMask::from_config(&corpus, c, &space, config.seed, labels.as_ref())?
        }
    };
    log::info!("clamped {} arguments", clamps.n_clamped());
    let out = inference::train(&corpus, &config, &clamps)?;
    write(&a.out, &(out.model.to_json()? + "\n"), &mut m)?;
    let trace = a.trace.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(".trace.tsv");
        PathBuf::from(s)
    });
    write(&trace, &trace_tsv(&out.trace), &mut m)?;
    if let Some(dir) = &a.labels_dir {
        for (l, name) in corpus.languages.iter().enumerate() {
            let labels = LabelSet::from_assignments(name, corpus.frames(l), &out.assignments[l])?;
            write(&dir.join(format!("{name}.tsv")), &labels.to_tsv(), &mut m)?;
        }
    }
    let d = &out.diagnostics;
    println!(
        "trained {:?} model: chain {} selected, final log joint {:.3}, clamped {}",
        config.regime, d.selected_chain, d.final_log_joint[d.selected_chain], d.clamped
    );
    if let Some(r) = d.r_hat {
        println!("R-hat {r:.4}");
    }
    finish(m, a.manifest.manifest, &a.out)
}

fn decode_labels(corpus: &Corpus, lang: usize, model: &FittedModel, config: &DecodeConfig) -> Result<LabelSet> {
    let name = &corpus.languages[lang];
    let ml = model
        .language_index(name)
        .ok_or_else(|| Error::Data(format!("the model has no language {name:?}")))?;
    let frames: Vec<&Frame> = corpus.frames(lang).collect();
    let unseen = frames.iter().filter(|f| !model.covers(ml, f)).count();
    if unseen > 0 {
        log::info!("{unseen} frames have predicates the model never saw; using pooled counts");
    }
    let assignments = inference::decode(&frames, model, ml, config)?;
    Ok(LabelSet::from_assignments(name, frames.iter().copied(), &assignments)?)
}

pub fn decode(a: DecodeArgs) -> Result<()> {
    let mut m = RunManifest::start("decode");
    m.seed = Some(a.seed);
    m.input(&a.corpus)?;
    m.input(&a.model)?;
    let corpus = Corpus::load(&a.corpus)?;
    let model = FittedModel::load(&a.model)?;
    let lang = language_of(&corpus, &a.language)?;
    let config = DecodeConfig {
        iterations: a.iterations,
        seed: a.seed,
    };
    let labels = decode_labels(&corpus, lang, &model, &config)?;
    write(&a.out, &labels.to_tsv(), &mut m)?;
    println!("decoded {} frames", labels.frames.len());
    finish(m, a.manifest.manifest, &a.out)
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let mut m = RunManifest::start("eval");
    m.seed = Some(a.seed);
    m.input(&a.corpus)?;
    let corpus = Corpus::load(&a.corpus)?;
    let lang = language_of(&corpus, &a.language)?;
    let frames: Vec<&Frame> = corpus.frames(lang).collect();
    let gold = match &a.gold {
        Some(p) => {
            m.input(p)?;
            LabelSet::load(p)?
        }
        None => LabelSet::gold(&a.language, frames.iter().copied()),
    };
    let (labels, primary) = match (&a.labels, &a.model) {
        (Some(p), _) => {
            m.input(p)?;
            (LabelSet::load(p)?, p.clone())
        }
        (None, Some(p)) => {
            m.input(p)?;
            let model = FittedModel::load(p)?;
            let config = DecodeConfig {
                seed: a.seed,
                ..DecodeConfig::default()
            };
            (decode_labels(&corpus, lang, &model, &config)?, p.clone())
        }
        (None, None) => return Err(usage("give --labels or --model")),
    };
    let mut report = evaluate(&frames, &labels, &gold)?;
    print!("{report}");
    if let Some(other) = &a.compare {
        m.input(other)?;
        let other_labels = LabelSet::load(other)?;
        let other_report = evaluate(&frames, &other_labels, &gold)?;
        println!("{}: F1 = {:.3}", primary.display(), report.f1);
        println!("{}: F1 = {:.3}", other.display(), other_report.f1);
        let g = Clustering::gold(frames.iter().copied(), &gold)?;
        let ca = Clustering::restricted(frames.iter().copied(), &labels, &g)?;
        let cb = Clustering::restricted(frames.iter().copied(), &other_labels, &g)?;
        let p = stratified_shuffling(&ca, &cb, &g, a.shuffles, a.seed)?;
        println!("p = {p:.4} ({} shuffles, seed {})", a.shuffles, a.seed);
        report.significance.push(SignificanceEntry {
            comparison: format!("{} vs {}", primary.display(), other.display()),
            p_value: p,
            iterations: a.shuffles,
            seed: a.seed,
        });
    }
    let json_path = a.json.clone().unwrap_or_else(|| {
        let mut s = primary.as_os_str().to_owned();
        s.push(".eval.json");
        PathBuf::from(s)
    });
    write(&json_path, &(report.to_json()? + "\n"), &mut m)?;
    finish(m, a.manifest.manifest, &json_path)
}

pub fn baseline(a: BaselineArgs) -> Result<()> {
    let mut m = RunManifest::start("baseline");
    m.input(&a.corpus)?;
    let corpus = Corpus::load(&a.corpus)?;
    let lang = language_of(&corpus, &a.language)?;
    let frames: Vec<&Frame> = corpus.frames(lang).collect();
    let labels = match a.kind {
        BaselineKind::Syntactic => {
            if a.n == 0 {
                return Err(usage("-n must be at least 1"));
            }
            syntactic_baseline(&a.language, &frames, a.n)
        }
        BaselineKind::Supervised => {
            let path = a.config.as_ref().ok_or_else(|| usage("the supervised baseline needs --config"))?;
            m.config(path)?;
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config = TrainConfig::from_toml(&text)?;
            if !(0.0..=1.0).contains(&a.fraction) {
                return Err(usage("--fraction must lie in [0, 1]"));
            }
            m.seed = Some(a.selection_seed);
            let space = config.space()?;
            let mapping = RoleMapping::for_inventory(&gold_inventory(frames.iter().copied()), &space)?;
            let labeled: Vec<&Frame> = select_fraction(frames.len(), a.fraction, a.selection_seed)
                .into_iter()
                .map(|i| frames[i])
                .collect();
            supervised_baseline(&a.language, &labeled, &frames, &mapping, &config)?
        }
    };
    write(&a.out, &labels.to_tsv(), &mut m)?;
    println!("labeled {} frames", labels.frames.len());
    finish(m, a.manifest.manifest, &a.out)
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let mut m = RunManifest::start("generate");
    m.config(&a.config)?;
    let config = SyntheticConfig::load(&a.config)?;
    m.seed = Some(config.seed);
    let s = generate_corpus(&config)?;
    write(&a.out, &(s.corpus.to_json()? + "\n"), &mut m)?;
    let dir = a
        .labels_dir
        .clone()
        .unwrap_or_else(|| a.out.parent().map(Path::to_path_buf).unwrap_or_default());
    for l in 0..s.corpus.num_languages() {
        let path = dir.join(format!("{}.gold.tsv", s.corpus.languages[l]));
        write(&path, &s.gold(l).to_tsv(), &mut m)?;
    }
    let params = a.params.clone().unwrap_or_else(|| {
        let mut p = a.out.as_os_str().to_owned();
        p.push(".params.json");
        PathBuf::from(p)
    });
    let doc = serde_json::json!({
        "languages": s.corpus.languages,
        "params": s.params,
        "clv": s.clv,
    });
    write(&params, &(serde_json::to_string(&doc)? + "\n"), &mut m)?;
    print!("{}", CorpusStats::of(&s.corpus));
    if !s.corpus.parallel_pairs.is_empty() {
        println!("link rate: {:.4}", s.link_rate());
    }
    finish(m, a.manifest.manifest, &a.out)
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let mut m = RunManifest::start("stats");
    m.input(&a.corpus)?;
    let corpus = Corpus::load(&a.corpus)?;
    let stats = CorpusStats::of(&corpus);
    print!("{stats}");
    match &a.json {
        Some(p) => {
            write(p, &(serde_json::to_string_pretty(&stats)? + "\n"), &mut m)?;
            finish(m, a.manifest.manifest, p)
        }
        None => match a.manifest.manifest {
            Some(p) => m.finish(&p),
            None => Ok(()),
        },
    }
}
