use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use plmgraph::metrics::{
    docking_report, lba_report, mqa_report, ppi_report, read_pts, AffinityUnit, DockingCase, MetricReport, PointSetLabel,
    ScoredSet,
};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use crate::error::{read_bytes, write_text, CliError, Result};
use crate::manifest::{beside, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Mqa,
    Docking,
    Ppi,
    Lba,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub suite: Suite,
    /// mqa: ScoredSet JSON files; docking: case manifest JSON; ppi: CSV (score,label);
    /// lba: CSV (predicted,true).
    #[arg(long = "input", required_unless_present = "receptor")]
    pub inputs: Vec<PathBuf>,
    /// Single docking case: receptor PTS file.
    #[arg(long, requires_all = ["true_ligand", "pred_ligand"])]
    pub receptor: Option<PathBuf>,
    #[arg(long)]
    pub true_ligand: Option<PathBuf>,
    #[arg(long)]
    pub pred_ligand: Option<PathBuf>,
    /// Unit of lba affinities.
    #[arg(long, default_value = "pk")]
    pub affinity_unit: AffinityUnit,
    /// Worker threads for loading docking cases.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Mqa => "mqa",
        Suite::Docking => "docking",
        Suite::Ppi => "ppi",
        Suite::Lba => "lba",
    }
}

type Inputs = Vec<(PathBuf, Vec<u8>)>;

fn load_mqa(args: &MetricsArgs, seen: &mut Inputs) -> Result<MetricReport> {
    let mut sets: Vec<ScoredSet<f64>> = Vec::new();
    for p in &args.inputs {
        let raw = read_bytes(p)?;
        let value: serde_json::Value =
            serde_json::from_slice(&raw).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        let parsed: std::result::Result<Vec<ScoredSet<f64>>, _> = if value.is_array() {
            serde_json::from_value(value)
        } else {
            serde_json::from_value(value).map(|s| vec![s])
        };
        sets.extend(parsed.map_err(|e| CliError::input(format!("{}: {e}", p.display())))?);
        seen.push((p.clone(), raw));
    }
    mqa_report(&sets).map_err(CliError::domain)
}

#[derive(Debug, Deserialize)]
struct CaseEntry {
    target_id: String,
    receptor: PathBuf,
    true_ligand: PathBuf,
    pred_ligand: PathBuf,
}

type LoadedCase = (DockingCase<f64>, Inputs);

fn load_case(target_id: &str, files: [&Path; 3]) -> Result<LoadedCase> {
    let labels = [PointSetLabel::Receptor, PointSetLabel::Ligand, PointSetLabel::Ligand];
    let mut sets = Vec::with_capacity(3);
    let mut raws = Vec::with_capacity(3);
    for (p, label) in files.into_iter().zip(labels) {
        let raw = read_bytes(p)?;
        let pts = read_pts::<f64>(&String::from_utf8_lossy(&raw), label)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        sets.push(pts);
        raws.push((p.to_path_buf(), raw));
    }
    let pred_ligand = sets.pop().expect("three sets");
    let true_ligand = sets.pop().expect("three sets");
    let receptor = sets.pop().expect("three sets");
    Ok((
        DockingCase {
            target_id: target_id.to_string(),
            receptor,
            true_ligand,
            pred_ligand,
        },
        raws,
    ))
}

fn load_docking(args: &MetricsArgs, seen: &mut Inputs) -> Result<MetricReport> {
    let mut jobs: Vec<(String, [PathBuf; 3])> = Vec::new();
    if let (Some(r), Some(t), Some(p)) = (&args.receptor, &args.true_ligand, &args.pred_ligand) {
        jobs.push(("case".into(), [r.clone(), t.clone(), p.clone()]));
    }
    for m in &args.inputs {
        let raw = read_bytes(m)?;
        let entries: Vec<CaseEntry> =
            serde_json::from_slice(&raw).map_err(|e| CliError::input(format!("{}: {e}", m.display())))?;
        let base = m.parent().unwrap_or(Path::new("."));
        let at = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        for e in entries {
            jobs.push((e.target_id.clone(), [at(&e.receptor), at(&e.true_ligand), at(&e.pred_ligand)]));
        }
        seen.push((m.clone(), raw));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::domain(format!("thread pool: {e}")))?;
    let loaded: Vec<LoadedCase> = pool.install(|| {
        jobs.par_iter()
            .map(|(id, files)| load_case(id, [&files[0], &files[1], &files[2]]))
            .collect::<Result<_>>()
    })?;
    let mut cases = Vec::with_capacity(loaded.len());
    for (case, raws) in loaded {
        seen.extend(raws);
        cases.push(case);
    }
    docking_report(&cases).map_err(CliError::domain)
}

fn read_columns(p: &Path, names: [&str; 2], seen: &mut Inputs) -> Result<(Vec<f64>, Vec<f64>)> {
    let raw = read_bytes(p)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(raw.as_slice());
    let headers = rdr
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::input(format!("{}: missing column {name:?}", p.display())))
    };
    let (ia, ib) = (col(names[0])?, col(names[1])?);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        let parse = |i: usize| -> Result<f64> {
            let v = rec.get(i).unwrap_or("");
            let x = match v.to_ascii_lowercase().as_str() {
                "true" => 1.0,
                "false" => 0.0,
                _ => v.parse::<f64>().map_err(|_| {
                    CliError::input(format!("{}: record {}: cannot parse {v:?}", p.display(), line + 1))
                })?,
            };
            if x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::input(format!("{}: record {}: non-finite value", p.display(), line + 1)))
            }
        };
        a.push(parse(ia)?);
        b.push(parse(ib)?);
    }
    seen.push((p.to_path_buf(), raw));
    Ok((a, b))
}

fn read_all_columns(args: &MetricsArgs, names: [&str; 2], seen: &mut Inputs) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for p in &args.inputs {
        let (x, y) = read_columns(p, names, seen)?;
        a.extend(x);
        b.extend(y);
    }
    Ok((a, b))
}

pub fn run(args: MetricsArgs) -> Result<()> {
    let mut seen = Inputs::new();
    let report = match args.suite {
        Suite::Mqa => load_mqa(&args, &mut seen)?,
        Suite::Docking => load_docking(&args, &mut seen)?,
        Suite::Ppi => {
            let (scores, labels) = read_all_columns(&args, ["score", "label"], &mut seen)?;
            let labels = labels
                .iter()
                .map(|&l| match l {
                    0.0 => Ok(false),
                    1.0 => Ok(true),
                    other => Err(CliError::input(format!("label {other} is not 0 or 1"))),
                })
                .collect::<Result<Vec<bool>>>()?;
            ppi_report(&scores, &labels).map_err(CliError::domain)?
        }
        Suite::Lba => {
            let (pred, truth) = read_all_columns(&args, ["predicted", "true"], &mut seen)?;
            lba_report(&pred, &truth, args.affinity_unit).map_err(CliError::domain)?
        }
    };
    report.validate().map_err(CliError::domain)?;

    let config = json!({
        "suite": suite_name(args.suite),
        "affinity_unit": args.affinity_unit,
        "jobs": args.jobs,
    });
    let mut manifest = RunManifest::new("metrics", config, None);
    for (p, raw) in &seen {
        manifest.add_input(p, raw);
    }
    let doc = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(out) => {
            manifest.add_output(out);
            manifest.write(Some(&beside(out)))?;
            write_text(out, &doc)
        }
        None => {
            manifest.write(None)?;
            print!("{doc}");
            Ok(())
        }
    }
}
