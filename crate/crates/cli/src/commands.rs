use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use grasspod::chart::ReferencePolicy;
use grasspod::harness::{
    cross_validate, evaluate_split, format_table, read_records_csv, records_csv, score_cases, summarize,
    summarize_folds, train as train_model, CaseRecord, Dataset, ExperimentConfig, Method, MethodSummary,
};
use grasspod::io::{self, read_csv_matrix, write_atomic, write_snapshot_file, Fingerprint, Manifest, ManifestEntry, ModelFile};
use grasspod::pdelab::{Problem, Split};
use grasspod::{Error, Result, TrainConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{Common, MethodArg, Outcome};

fn resolve(common: &Common, problem: Option<Problem>) -> Result<RunConfig> {
    let mut cfg = match (&common.config, problem) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => RunConfig::for_problem(p),
        (None, None) => return Err(Error::InvalidConfig("either --problem or --config is required".into())),
    };
    if let Some(p) = problem {
        if common.config.is_some() && cfg.problem != p {
            log::warn!("config problem '{}' differs from '{}'", cfg.problem.name(), p.name());
        }
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.rank.is_some() {
        cfg.rank = common.rank;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

fn methods(arg: MethodArg) -> Vec<Method> {
    match arg {
        MethodArg::Cxgb => vec![Method::Cxgb],
        MethodArg::Interp => vec![Method::Interp],
        MethodArg::Oracle => vec![Method::Oracle],
        MethodArg::Both => vec![Method::Cxgb, Method::Interp],
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn generate(problem: Option<Problem>, common: &Common) -> Result<Outcome> {
    let cfg = resolve(common, problem)?;
    if cfg.problem == Problem::External {
        return Err(Error::InvalidConfig("external data is brought in with `import`".into()));
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(cfg.problem.name()));
    let grid = cfg.grid();
    let runs: Vec<Result<_>> = grid.par_iter().map(|g| cfg.problem.simulate(&g.parameter)).collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut shape = None;
    for (i, (point, run)) in grid.iter().zip(runs).enumerate() {
        match run {
            Ok(s) => {
                let name = format!("{}_{i:03}.gpm", cfg.problem.name());
                write_snapshot_file(&out.join(&name), s.data())?;
                shape.get_or_insert(s.data().shape());
                entries.push(ManifestEntry {
                    parameter: point.parameter.clone(),
                    path: name,
                    split: point.split,
                });
            }
            Err(e) => {
                log::error!("grid point {:?} failed: {e}", point.parameter);
                failures.push(format!("{:?}: {e}", point.parameter));
            }
        }
    }
    let (n, n_t) = shape.unwrap_or((0, 0));
    let manifest = Manifest {
        problem: cfg.problem,
        n,
        n_t,
        r: cfg.rank().ok(),
        complete: failures.is_empty(),
        failures,
        entries,
    };
    manifest.save(&out.join("manifest.json"))?;
    println!(
        "wrote {} snapshot files ({n}x{n_t}) and {}",
        manifest.entries.len(),
        out.join("manifest.json").display()
    );
    Ok(if manifest.complete {
        Outcome::Done
    } else {
        Outcome::CaseFailures(manifest.failures.len())
    })
}

pub fn import(input: &Path, output: &Path, manifest: Option<&Path>, parameter: Vec<f64>, split: Split) -> Result<Outcome> {
    let m = read_csv_matrix(input)?;
    write_snapshot_file(output, &m)?;
    let back = io::read_snapshot_file(output)?;
    if back.shape() != m.shape() || back.iter().zip(m.iter()).any(|(a, b)| a.to_bits() != b.to_bits()) {
        return Err(Error::Format("snapshot file did not round-trip".into()));
    }
    println!("imported {}x{} matrix into {}", m.nrows(), m.ncols(), output.display());
    let Some(mpath) = manifest else {
        return Ok(Outcome::Done);
    };
    let mut man = if mpath.exists() {
        Manifest::load(mpath)?
    } else {
        Manifest {
            problem: Problem::External,
            n: m.nrows(),
            n_t: m.ncols(),
            r: None,
            complete: true,
            failures: Vec::new(),
            entries: Vec::new(),
        }
    };
    if (man.n, man.n_t) != m.shape() {
        return Err(Error::InvalidDataset(format!(
            "manifest holds {}x{} matrices, got {}x{}",
            man.n,
            man.n_t,
            m.nrows(),
            m.ncols()
        )));
    }
    let base = manifest_dir(mpath);
    let abs_out = std::path::absolute(output)?;
    let abs_base = std::path::absolute(&base)?;
    let path = abs_out
        .strip_prefix(&abs_base)
        .map(|p| p.to_string_lossy().into_owned())
        .unwrap_or_else(|_| abs_out.to_string_lossy().into_owned());
    man.entries.retain(|e| e.path != path);
    man.entries.push(ManifestEntry { parameter, path, split });
    man.validate()?;
    man.save(mpath)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PodRecord<'a> {
    index: usize,
    parameter: &'a [f64],
    basis: String,
    floor: f64,
    energy_captured: f64,
    singular_values: Vec<f64>,
}

pub fn pod(manifest_path: &Path, common: &Common) -> Result<Outcome> {
    let manifest = Manifest::load(manifest_path)?;
    let cfg = resolve(common, Some(manifest.problem))?;
    let rank = cfg.rank.or(manifest.r).map_or_else(|| cfg.rank(), Ok)?;
    let snapshots = manifest.load_snapshots(&manifest_dir(manifest_path))?;
    let data = Dataset::new(snapshots, rank)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("pod"));
    let mut records = Vec::with_capacity(data.len());
    for (i, p) in data.pods().iter().enumerate() {
        let name = format!("basis_{i:03}.gpm");
        write_snapshot_file(&out.join(&name), p.basis.matrix())?;
        records.push(PodRecord {
            index: i,
            parameter: data.parameter(i),
            basis: name,
            floor: p.truncation_floor(),
            energy_captured: p.energy_captured,
            singular_values: p.singular_values.iter().copied().collect(),
        });
    }
    write_json(&out.join("pod.json"), &records)?;
    println!("wrote {} rank-{rank} bases to {}", records.len(), out.display());
    Ok(Outcome::Done)
}

fn experiment(cfg: &RunConfig, manifest: &Manifest) -> Result<ExperimentConfig> {
    let rank = match (cfg.rank, manifest.r) {
        (Some(r), _) => r,
        (None, Some(r)) => r,
        (None, None) => cfg.rank()?,
    };
    Ok(ExperimentConfig {
        rank,
        train: cfg.train(),
        reference: cfg.reference,
    })
}

pub fn train(manifest_path: &Path, common: &Common) -> Result<Outcome> {
    let manifest = Manifest::load(manifest_path)?;
    let cfg = resolve(common, Some(manifest.problem))?;
    let exp = experiment(&cfg, &manifest)?;
    let train_idx = manifest.indices(Split::Train);
    if train_idx.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let all = manifest.load_snapshots(&manifest_dir(manifest_path))?;
    let snapshots: Vec<_> = train_idx.iter().map(|&i| all[i].clone()).collect();
    let fingerprint = Fingerprint::of(&snapshots.iter().collect::<Vec<_>>(), exp.rank);
    let data = Dataset::new(snapshots, exp.rank)?;
    let local: Vec<usize> = (0..data.len()).collect();
    let mut model = train_model(&data, &local, &exp).map_err(|e| match e {
        Error::NoFeasibleReference { offending } => {
            let params: Vec<String> = offending
                .iter()
                .map(|&k| format!("{:?}", manifest.entries[train_idx[k]].parameter))
                .collect();
            Error::InvalidDataset(format!(
                "no training basis works as chart reference; out of reach: {}",
                params.join(", ")
            ))
        }
        e => e,
    })?;
    model.reference_index = train_idx[model.reference_index];
    let file = ModelFile::new(manifest.problem, exp.rank, exp.train.clone(), exp.reference, &model, fingerprint);
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("model.json"));
    file.save(&out)?;
    let loss = model.report.loss_history.last().copied().unwrap_or(0.0);
    println!(
        "trained {} trees on {} cases (rank {}, reference {}), final loss {loss:e}, max |y| {:.6}; wrote {}",
        model.ensemble.trees.len(),
        data.len(),
        exp.rank,
        model.reference_index,
        model.report.max_prediction_norm,
        out.display()
    );
    Ok(Outcome::Done)
}

pub fn predict(model_path: &Path, theta: &[f64], method: MethodArg, out: Option<&Path>) -> Result<Outcome> {
    let file = ModelFile::load(model_path)?;
    let model = file.to_trained()?;
    let (basis, clipped) = match method {
        MethodArg::Cxgb => {
            let p = model.predict_cxgb(theta)?;
            (p.basis, p.clipped)
        }
        MethodArg::Interp => {
            let p = model.interpolator()?.predict(theta);
            (model.chart.wrap_back(&p.y)?, p.clipped)
        }
        _ => return Err(Error::InvalidConfig("predict supports --method cxgb or interp".into())),
    };
    let distance = grasspod::geodesic_distance(model.chart.reference(), &basis)?;
    println!(
        "predicted {}x{} basis at {theta:?}; distance to reference {distance:.6}{}",
        basis.n(),
        basis.r(),
        if clipped { " (clipped to the chart ball)" } else { "" }
    );
    if let Some(path) = out {
        write_snapshot_file(path, basis.matrix())?;
    }
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct Summary<'a> {
    problem: &'a str,
    command: &'a str,
    seed: u64,
    rank: usize,
    folds: Option<usize>,
    reference: ReferencePolicy,
    config: &'a TrainConfig,
    cases: usize,
    methods: BTreeMap<Method, MethodSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_fold: Option<BTreeMap<usize, BTreeMap<Method, MethodSummary>>>,
}

fn emit(out: &Path, problem: &str, records: &[CaseRecord], summary: &Summary<'_>) -> Result<Outcome> {
    write_atomic(&out.join("cases.csv"), records_csv(problem, records)?.as_bytes())?;
    write_json(&out.join("summary.json"), summary)?;
    print!("{}", format_table(&summary.methods));
    println!("wrote {}", out.display());
    let failures = records.iter().filter(|r| r.error.is_none()).count();
    Ok(if failures > 0 {
        Outcome::CaseFailures(failures)
    } else {
        Outcome::Done
    })
}

pub fn evaluate(manifest_path: &Path, model_path: Option<&Path>, method: MethodArg, common: &Common) -> Result<Outcome> {
    let manifest = Manifest::load(manifest_path)?;
    let mut cfg = resolve(common, Some(manifest.problem))?;
    let model_file = model_path.map(ModelFile::load).transpose()?;
    if let Some(f) = &model_file {
        f.check_compatible(manifest.n, cfg.rank.unwrap_or(f.rank))?;
        cfg.rank = Some(f.rank);
        cfg.train = Some(f.config.clone());
        cfg.reference = f.reference_policy;
    }
    let exp = experiment(&cfg, &manifest)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("report"));
    let test_idx = manifest.indices(Split::Test);
    let methods = methods(method);
    let problem = manifest.problem.name();
    let mut summary = Summary {
        problem,
        command: "evaluate",
        seed: exp.train.seed,
        rank: exp.rank,
        folds: None,
        reference: exp.reference,
        config: &exp.train,
        cases: test_idx.len(),
        methods: BTreeMap::new(),
        per_fold: None,
    };
    if test_idx.is_empty() {
        emit(&out, problem, &[], &summary)?;
        return Ok(Outcome::NoOp);
    }
    let data = Dataset::new(manifest.load_snapshots(&manifest_dir(manifest_path))?, exp.rank)?;
    let records = match &model_file {
        Some(f) => score_cases(&data, &test_idx, Some(&f.to_trained()?), &methods, 0)?,
        None => evaluate_split(&data, &manifest.indices(Split::Train), &test_idx, &exp, &methods, 0)?,
    };
    summary.methods = summarize(&records);
    emit(&out, problem, &records, &summary)
}

pub fn cv(manifest_path: &Path, folds: Option<usize>, method: MethodArg, common: &Common) -> Result<Outcome> {
    let manifest = Manifest::load(manifest_path)?;
    let cfg = resolve(common, Some(manifest.problem))?;
    let exp = experiment(&cfg, &manifest)?;
    let k = folds.or(cfg.folds).unwrap_or(5);
    let seed = cfg.seed();
    let data = Dataset::new(manifest.load_snapshots(&manifest_dir(manifest_path))?, exp.rank)?;
    let methods = methods(method);
    let records = cross_validate(&data, k, seed, &exp, &methods)?;
    let problem = manifest.problem.name();
    let summary = Summary {
        problem,
        command: "cv",
        seed,
        rank: exp.rank,
        folds: Some(k),
        reference: exp.reference,
        config: &exp.train,
        cases: data.len(),
        methods: summarize(&records),
        per_fold: Some(summarize_folds(&records)),
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("cv"));
    emit(&out, problem, &records, &summary)
}

pub fn report(input: &Path, out: Option<&Path>) -> Result<Outcome> {
    let text = std::fs::read_to_string(input)?;
    let (_, records) = read_records_csv(&text)?;
    let methods = summarize(&records);
    print!("{}", format_table(&methods));
    if let Some(path) = out {
        write_json(path, &methods)?;
    }
    Ok(if records.is_empty() { Outcome::NoOp } else { Outcome::Done })
}
