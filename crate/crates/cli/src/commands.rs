use std::fmt::Write as _;
use std::fs;

use hostility_core::corpus::{
    corpus_stats, generate_synthetic, load_corpus, write_corpus, Corpus, SECONDS_PER_HOUR,
};
use hostility_core::embed::{load_table, ngram_path, save_table, EmbeddingTable};
use hostility_core::experiment::{
    buckets_csv, build_task1, build_task2, default_buckets, fit_full, run_ablation, stratify_report,
    train_embeddings, Context, FeatureSet, Report, TaskDataset, TaskKind,
};
use hostility_core::ksc::{build_series, export_clusters, ksc_cluster, smooth};
use hostility_core::linmodel::Sign;
use hostility_core::textfeat::{Group, Lexicons, TokenCache};
use hostility_core::Error;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::rundir::RunDir;

pub const WORD_VECTORS: &str = "word.vec";
pub const SUBWORD_VECTORS: &str = "subword.vec";

fn corpus(cfg: &RunConfig, run: &mut RunDir) -> Result<Corpus, CliError> {
    match &cfg.corpus {
        Some(p) => {
            run.input(p)?;
            Ok(load_corpus(p)?)
        }
        None => Ok(generate_synthetic(&cfg.synth)?.corpus),
    }
}

fn lexicons(cfg: &RunConfig, run: &mut RunDir) -> Result<Lexicons, CliError> {
    let Some(dir) = &cfg.lexicon_dir else {
        return Ok(Lexicons::builtin());
    };
    let lex = Lexicons::load_dir(dir)?;
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    for f in files {
        run.input(&f)?;
    }
    Ok(lex)
}

fn needs_embeddings(sets: &[FeatureSet]) -> bool {
    sets.iter().any(|s| s.groups.iter().any(|g| !matches!(g, Group::Unigram | Group::Lex | Group::User)))
}

/// Loads the word and subword tables, or trains them on the corpus.
fn embeddings(
    cfg: &RunConfig,
    run: &mut RunDir,
    corpus: &Corpus,
) -> Result<(EmbeddingTable, EmbeddingTable), CliError> {
    match &cfg.embeddings_dir {
        Some(dir) => {
            let (w, s) = (dir.join(WORD_VECTORS), dir.join(SUBWORD_VECTORS));
            for p in [&w, &s, &ngram_path(&s)] {
                if p.exists() {
                    run.input(p)?;
                }
            }
            Ok((load_table(&w)?, load_table(&s)?))
        }
        None => {
            log::info!("training embeddings on the corpus");
            Ok(train_embeddings(corpus, &TokenCache::new(corpus), &cfg.sgns)?)
        }
    }
}

pub fn synth(cfg: &RunConfig, run: &mut RunDir) -> Result<(), CliError> {
    let s = generate_synthetic(&cfg.synth)?;
    let mut buf = Vec::new();
    write_corpus(&s.corpus, &mut buf)?;
    run.write("corpus.jsonl", buf)?;
    let mut arch = String::from("post_id,archetype,onset_hours\n");
    for (i, p) in s.corpus.posts().iter().enumerate() {
        if let (Some(a), Some(t)) = (s.archetypes[i], s.onsets[i]) {
            let _ = writeln!(arch, "{},{},{}", p.id, a as u8, t / SECONDS_PER_HOUR);
        }
    }
    run.write("archetypes.csv", arch)
}

pub fn stats(cfg: &RunConfig, run: &mut RunDir) -> Result<(), CliError> {
    let c = corpus(cfg, run)?;
    let report = corpus_stats(&c)?;
    report.write_csv(run.staging())?;
    for (name, _) in report.series() {
        run.track(&format!("{name}.csv"));
    }
    run.track("table.csv");
    Ok(())
}

pub fn embed(cfg: &RunConfig, run: &mut RunDir) -> Result<(), CliError> {
    let c = corpus(cfg, run)?;
    let (w, s) = train_embeddings(&c, &TokenCache::new(&c), &cfg.sgns)?;
    save_table(&w, run.staging().join(WORD_VECTORS))?;
    save_table(&s, run.staging().join(SUBWORD_VECTORS))?;
    run.track(WORD_VECTORS);
    run.track(SUBWORD_VECTORS);
    run.track(&format!("{SUBWORD_VECTORS}.ngrams"));
    Ok(())
}

pub fn cluster(cfg: &RunConfig, run: &mut RunDir) -> Result<(), CliError> {
    let c = corpus(cfg, run)?;
    let mut raw = Vec::new();
    for p in c.posts().iter().filter(|p| p.is_hostile()) {
        match build_series(p) {
            Ok(s) => raw.push(s),
            Err(Error::NoHostileComment(id)) => log::warn!("post {id}: no hostility inside the series window"),
            Err(e) => return Err(e.into()),
        }
    }
    let smoothed: Vec<Vec<f64>> = raw.iter().map(|s| smooth(s).values).collect();
    let result = ksc_cluster(&smoothed, &cfg.ksc)?;
    let export = export_clusters(&result, &raw);
    for (i, csv) in export.clusters.iter().enumerate() {
        run.write(&format!("cluster_{i}.csv"), csv)?;
    }
    run.write("summary.csv", &export.summary)?;
    let mut assign = String::from("post_id,cluster,shift\n");
    for (i, s) in raw.iter().enumerate() {
        let _ = writeln!(assign, "{},{},{}", s.post_id, result.assignments[i], result.shifts[i]);
    }
    run.write("assignments.csv", assign)?;
    let mut trace = String::from("iteration,objective\n");
    for (i, o) in result.objective_trace.iter().enumerate() {
        let _ = writeln!(trace, "{i},{o}");
    }
    run.write("objective.csv", trace)
}

fn dataset(c: &Corpus, task: TaskKind, param: f64, cfg: &RunConfig) -> Result<TaskDataset, CliError> {
    let ds = match task {
        TaskKind::Presence => build_task1(c, param, cfg.seed)?,
        TaskKind::Intensity => build_task2(c, param as usize)?,
    };
    Ok(if cfg.permute_labels { ds.permuted(cfg.seed) } else { ds })
}

fn params(cfg: &RunConfig, task: TaskKind) -> Result<Vec<f64>, CliError> {
    let p: Vec<f64> = match task {
        TaskKind::Presence => cfg.lead_hours.clone(),
        TaskKind::Intensity => cfg.n_thresholds.iter().map(|&n| n as f64).collect(),
    };
    if p.is_empty() {
        return Err(CliError::Config(format!("no parameter values for {}", task.tag())));
    }
    Ok(p)
}

/// Cross-validates the configured feature sets for every parameter value of
/// each task and writes `<task>_*.csv` reports plus a leakage audit.
pub fn tasks(cfg: &RunConfig, run: &mut RunDir, tasks: &[TaskKind]) -> Result<(), CliError> {
    let sets: Vec<(TaskKind, Vec<FeatureSet>)> =
        tasks.iter().map(|&t| Ok((t, cfg.feature_sets(t)?))).collect::<Result<_, CliError>>()?;
    let plans: Vec<(TaskKind, Vec<f64>)> =
        tasks.iter().map(|&t| Ok((t, params(cfg, t)?))).collect::<Result<_, CliError>>()?;
    let c = corpus(cfg, run)?;
    let lex = lexicons(cfg, run)?;
    let tables = if sets.iter().any(|(_, s)| needs_embeddings(s)) { Some(embeddings(cfg, run, &c)?) } else { None };
    let mut ctx = Context::new(&c, &lex, tables.as_ref().map(|t| &t.0), tables.as_ref().map(|t| &t.1));
    let mut audit = serde_json::Map::new();
    for ((task, sets), (_, values)) in sets.iter().zip(&plans) {
        let mut report = Report::default();
        let mut sizes = String::from("param,positives,negatives\n");
        for &v in values {
            let ds = dataset(&c, *task, v, cfg)?;
            let (p, n) = ds.class_counts();
            let _ = writeln!(sizes, "{v},{p},{n}");
            log::info!("{} param {v}: {p} positives, {n} negatives", task.tag());
            report.merge(run_ablation(&mut ctx, &ds, sets, &cfg.experiment)?.report);
        }
        let tag = task.tag();
        run.write(&format!("{tag}_datasets.csv"), sizes)?;
        run.write(&format!("{tag}_folds.csv"), report.folds_csv())?;
        run.write(&format!("{tag}_summary.csv"), report.summary_csv())?;
        run.write(&format!("{tag}_series.csv"), report.series_csv())?;
        run.write(&format!("{tag}_oof.csv"), report.oof_csv())?;
        if *task == TaskKind::Presence {
            run.write(&format!("{tag}_buckets.csv"), buckets_csv(&stratify_report(&report, &default_buckets())?))?;
        }
        audit.insert(tag.to_string(), serde_json::to_value(report.audit)?);
        if !report.audit.clean() {
            return Err(CliError::Core(Error::InsufficientData(format!(
                "{tag}: {} leaked predictions",
                report.audit.violations
            ))));
        }
    }
    run.write("audit.json", serde_json::to_string_pretty(&audit)? + "\n")
}

/// Fits one feature set on a whole dataset and writes the model, its largest
/// coefficients and every instance's feature vector.
pub fn inspect(cfg: &RunConfig, run: &mut RunDir) -> Result<(), CliError> {
    let task = cfg.task;
    let set = cfg.feature_sets(task)?.remove(0);
    let param = params(cfg, task)?[0];
    let c = corpus(cfg, run)?;
    let lex = lexicons(cfg, run)?;
    let tables = if needs_embeddings(std::slice::from_ref(&set)) { Some(embeddings(cfg, run, &c)?) } else { None };
    let mut ctx = Context::new(&c, &lex, tables.as_ref().map(|t| &t.0), tables.as_ref().map(|t| &t.1));
    let ds = dataset(&c, task, param, cfg)?;
    let fit = fit_full(&mut ctx, &ds, &set, &cfg.experiment)?;
    run.write("model.json", fit.model.to_json()? + "\n")?;
    let mut coef = String::from("sign,rank,name,weight\n");
    for (sign, tag) in [(Sign::Positive, "positive"), (Sign::Negative, "negative")] {
        for (r, (name, w)) in fit.model.top_coefficients(cfg.top_k, sign).into_iter().enumerate() {
            let _ = writeln!(coef, "{tag},{},{},{w}", r + 1, csv_field(&name));
        }
    }
    run.write("coefficients.csv", coef)?;
    let mut dump = String::from("post_id,label,group,index,name,value\n");
    for (inst, v) in ds.instances.iter().zip(&fit.vectors) {
        for line in v.dump_csv().lines().skip(1) {
            let _ = writeln!(dump, "{},{},{line}", inst.post_id, inst.label as u8);
        }
    }
    run.write("features.csv", dump)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
