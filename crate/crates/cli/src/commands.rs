use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sleepsig::classical::{read_features, run_classical_parallel, write_features, FeatureVector};
use sleepsig::data::{assemble_tensor, load_dataset, save_dataset};
use sleepsig::experiments::{fit_model, render_report, run_experiment_parallel, DatasetSummary, RowSpec};
use sleepsig::synth::{generate, pseudo_features, shuffle_labels, SynthSpec};
use sleepsig::{Dataset, ExperimentConfig, ExperimentReport, TaskId, Technique};

use crate::args::{ClassicalArgs, ReportArgs, RunArgs, SweepArgs, SynthArgs, TrainArgs, ValidateArgs};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn read_config(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| sleepsig::Error::io(path, e))?;
    Ok(serde_json::from_str(&text).map_err(sleepsig::Error::from)?)
}

/// Defaults, then the config file, then flags. The subcommand fixes the
/// technique; a config naming a different one is a usage error.
fn resolve_config(run: &RunArgs, technique: Technique) -> Result<ExperimentConfig> {
    let mut config = match &run.config {
        Some(path) => {
            let value = read_config(path)?;
            if let Some(t) = value.get("technique") {
                let named: Technique = serde_json::from_value(t.clone()).map_err(sleepsig::Error::from)?;
                if named != technique {
                    return Err(CliError::Usage(format!(
                        "config technique {named:?} conflicts with the subcommand's {technique:?}"
                    )));
                }
            }
            let seeded = value.get("seed").is_some();
            let config: ExperimentConfig = serde_json::from_value(value).map_err(sleepsig::Error::from)?;
            if !seeded && run.seed.is_none() {
                return Err(missing_seed());
            }
            config
        }
        None if run.seed.is_none() => return Err(missing_seed()),
        None => ExperimentConfig::default(),
    };
    config.technique = technique;
    if let Some(seed) = run.seed {
        config.seed = seed;
    }
    if let Some(v) = run.epochs {
        config.epochs = v;
    }
    if let Some(v) = run.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = run.lr {
        config.lr = v;
    }
    if let Some(v) = run.rounds {
        config.rounds = v;
    }
    if let Some(v) = run.train_fraction {
        config.train_fraction = v;
    }
    if run.balance {
        config.balance_classes = true;
    }
    let config = config.normalized();
    config.validate()?;
    Ok(config)
}

fn missing_seed() -> CliError {
    CliError::Usage("a seed is required: pass --seed or set \"seed\" in the config".into())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| sleepsig::Error::io(dir, e))?;
            }
            fs::write(path, text).map_err(|e| sleepsig::Error::io(path, e))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value"));
}

fn write_report(run: &RunArgs, report: &ExperimentReport) -> Result<()> {
    let text = render_report(report, run.format.into())?;
    emit(run.out.as_deref(), &text)
}

/// Assembles one input per session for every row, which is everything
/// training would touch short of the weights.
fn check_inputs(dataset: &Dataset, technique: &Technique) -> Result<Vec<RowSpec>> {
    let specs = RowSpec::expand(technique)?;
    for spec in &specs {
        let selection = spec.selection();
        for session in dataset.sessions() {
            assemble_tensor(session, dataset.layout(), &selection)?;
        }
    }
    Ok(specs)
}

fn plan(config: &ExperimentConfig, dataset: &Dataset, rows: usize, out: Option<&Path>) -> Value {
    json!({
        "dry_run": true,
        "config": config,
        "dataset": DatasetSummary::of(dataset),
        "rows": rows,
        "out": out,
    })
}

fn experiment(run: &RunArgs, technique: Technique) -> Result<()> {
    let config = resolve_config(run, technique)?;
    let dataset = load_dataset(&run.data)?;
    if run.dry_run {
        let specs = check_inputs(&dataset, &config.technique)?;
        print_json(&plan(&config, &dataset, specs.len(), run.out.as_deref()));
        return Ok(());
    }
    let report = run_experiment_parallel(&config, &dataset, run.parallel as usize)?;
    write_report(run, &report)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let technique = if !args.tasks.is_empty() {
        Technique::Separate(args.tasks.iter().copied().collect())
    } else if !args.mask.is_empty() {
        Technique::Mask(args.mask.iter().copied().collect())
    } else {
        Technique::Baseline
    };
    let Some(model_path) = &args.save_model else {
        return experiment(&args.run, technique);
    };
    let config = resolve_config(&args.run, technique)?;
    let dataset = load_dataset(&args.run.data)?;
    if args.run.dry_run {
        let specs = check_inputs(&dataset, &config.technique)?;
        let mut plan = plan(&config, &dataset, specs.len(), args.run.out.as_deref());
        plan["save_model"] = json!(model_path);
        print_json(&plan);
        return Ok(());
    }
    let report = run_experiment_parallel(&config, &dataset, args.run.parallel as usize)?;
    let params = fit_model(&config, &dataset)?;
    params.save(model_path)?;
    write_report(&args.run, &report)
}

pub fn mask_sweep(args: SweepArgs) -> Result<()> {
    experiment(&args.run, Technique::MaskSweep)
}

pub fn separate_sweep(args: SweepArgs) -> Result<()> {
    experiment(&args.run, Technique::SeparateSweep)
}

fn check_features(dataset: &Dataset, features: &[FeatureVector]) -> Result<()> {
    let ids: BTreeSet<&str> = dataset.sessions().iter().map(|s| s.id()).collect();
    if let Some(f) = features.iter().find(|f| !ids.contains(f.session_id.as_str())) {
        return Err(sleepsig::Error::Features(format!("features for unknown session {:?}", f.session_id)).into());
    }
    let covered: BTreeSet<&str> = features.iter().map(|f| f.session_id.as_str()).collect();
    if let Some(missing) = ids.iter().find(|id| !covered.contains(*id)) {
        return Err(sleepsig::Error::Features(format!("no features for session {missing:?}")).into());
    }
    Ok(())
}

pub fn baseline_classical(args: ClassicalArgs) -> Result<()> {
    let config = resolve_config(&args.run, Technique::Classical)?;
    let dataset = load_dataset(&args.run.data)?;
    let features = read_features(&args.features)?;
    check_features(&dataset, &features)?;
    if args.run.dry_run {
        let tasks: BTreeSet<TaskId> = features.iter().filter_map(|f| f.task).collect();
        print_json(&plan(&config, &dataset, tasks.len() + 1, args.run.out.as_deref()));
        return Ok(());
    }
    let report = run_classical_parallel(&config, &dataset, &features, args.run.parallel as usize)?;
    write_report(&args.run, &report)
}

pub fn validate(args: ValidateArgs) -> Result<()> {
    let dataset = load_dataset(&args.data)?;
    let layout = dataset.layout();
    let complete = dataset.sessions().iter().filter(|s| s.is_complete(layout)).count();
    let mut summary = json!({
        "valid": true,
        "dataset": DatasetSummary::of(&dataset),
        "complete_sessions": complete,
        "tasks": TaskId::ALL.iter().map(|&t| (t.name().to_string(), json!(layout.count(t)))).collect::<serde_json::Map<_, _>>(),
    });
    if complete == dataset.len() {
        check_inputs(&dataset, &Technique::Baseline)?;
    }
    if let Some(path) = &args.features {
        let features = read_features(path)?;
        check_features(&dataset, &features)?;
        summary["feature_rows"] = json!(features.len());
    }
    if let Some(path) = &args.config {
        let config: ExperimentConfig = serde_json::from_value(read_config(path)?).map_err(sleepsig::Error::from)?;
        config.validate()?;
        summary["config"] = json!(config);
    }
    print_json(&summary);
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_sessions: args.sessions,
        sleepy_fraction: args.sleepy_fraction,
        signal_tasks: args.signal_tasks.iter().copied().collect(),
        signal_strength: args.signal_strength,
        noise_std: args.noise_std,
        frames_per_utterance: args.frames,
        seed: args.seed,
    };
    spec.validate()?;
    if !(0.0..=1.0).contains(&spec.sleepy_fraction) {
        return Err(sleepsig::Error::InvalidConfig("sleepy_fraction must lie in [0, 1]".into()).into());
    }
    if args.dry_run {
        print_json(&json!({ "dry_run": true, "spec": spec, "out": args.out }));
        return Ok(());
    }
    let mut dataset = generate(&spec)?;
    if args.shuffle_labels {
        dataset = shuffle_labels(&dataset, args.seed)?;
    }
    let manifest = save_dataset(&dataset, &args.out)?;
    let mut summary = json!({
        "manifest": manifest,
        "dataset": DatasetSummary::of(&dataset),
        "spec": spec,
    });
    if args.features {
        let path = args.out.join("features.csv");
        write_features(&path, &pseudo_features(&dataset, args.seed))?;
        summary["features"] = json!(path);
    }
    print_json(&summary);
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).map_err(|e| sleepsig::Error::io(&args.input, e))?;
    let report: ExperimentReport = serde_json::from_str(&text).map_err(sleepsig::Error::from)?;
    let rendered = render_report(&report, args.format.into())?;
    emit(args.out.as_deref(), &rendered)
}
