use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use plmgraph::egnn::{EgnnConfig, Head};
use plmgraph::embedio::{read_pre, PositionalKind};
use plmgraph::graphbuild::{attach_features, graph_from_json, FusionMode, GraphMode, DEFAULT_CUTOFF, DEFAULT_K};
use plmgraph::trainer::{
    self, synth_dataset, with_positional_features, GraphSpec, Split, TaskKind, ToyTask, TrainConfig, DEFAULT_L_MAX,
    TOY_EPOCHS, TOY_HIDDEN, TOY_LAYERS,
};
use plmgraph::Graph;
use serde::Deserialize;
use serde_json::json;

use crate::error::{read_bytes, write_text, CliError, Result};
use crate::manifest::{beside, RunManifest};

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// Residue-type one-hot only (no positional signal).
    Onehot,
    /// One-hot of the residue index, width = longest chain.
    Positional,
    Sinusoidal,
    /// PRE files: from each manifest entry, or `<dir>/<stem>.pre`.
    Pre(Option<PathBuf>),
}

impl FromStr for Features {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "onehot" => Ok(Self::Onehot),
            "positional" | "onehot_index" => Ok(Self::Positional),
            "sinusoidal" => Ok(Self::Sinusoidal),
            "pre" => Ok(Self::Pre(None)),
            _ => match s.strip_prefix("pre:") {
                Some(dir) if !dir.is_empty() => Ok(Self::Pre(Some(PathBuf::from(dir)))),
                _ => Err(format!(
                    "unknown features {s:?} (expected onehot, positional, sinusoidal, pre or pre:<dir>)"
                )),
            },
        }
    }
}

impl Features {
    fn describe(&self) -> String {
        match self {
            Self::Onehot => "onehot".into(),
            Self::Positional => "positional".into(),
            Self::Sinusoidal => "sinusoidal".into(),
            Self::Pre(None) => "pre".into(),
            Self::Pre(Some(d)) => format!("pre:{}", d.display()),
        }
    }
}

/// `COUNTxLENGTH`, e.g. `50x100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Synthetic {
    pub count: usize,
    pub length: usize,
}

impl FromStr for Synthetic {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected COUNTxLENGTH, got {s:?}"))?;
        let count = a.trim().parse().map_err(|_| format!("bad chain count in {s:?}"))?;
        let length = b.trim().parse().map_err(|_| format!("bad chain length in {s:?}"))?;
        Ok(Self { count, length })
    }
}

#[derive(Debug, Args)]
pub struct ToytaskArgs {
    #[arg(long)]
    pub task: TaskKind,
    #[arg(long, default_value = "onehot")]
    pub features: Features,
    #[arg(long, default_value = "knn")]
    pub graph_mode: GraphMode,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Synthetic dataset as COUNTxLENGTH (used unless --manifest is given).
    #[arg(long, default_value = "50x100", conflicts_with = "manifest")]
    pub synthetic: Synthetic,
    /// JSON list of {"graph": path, "split": train|val|test, "pre": optional path}.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Seeds data generation, splitting, initialization and batching.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TOY_EPOCHS)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub batch_size: usize,
    #[arg(long, default_value_t = TOY_LAYERS)]
    pub layers: usize,
    #[arg(long, default_value_t = TOY_HIDDEN)]
    pub hidden: usize,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub l_max: usize,
    #[arg(long)]
    pub update_coords: bool,
    /// Width of sinusoidal features.
    #[arg(long, default_value_t = 64)]
    pub pos_dim: usize,
    /// How PRE features are combined with the residue one-hot.
    #[arg(long, default_value = "replace")]
    pub fusion: FusionMode,
    /// Train/val/test fractions for synthetic data.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.8, 0.1, 0.1])]
    pub split: Vec<f64>,
    /// Permute labels within each graph (chance-level control).
    #[arg(long)]
    pub shuffle_labels: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct Entry {
    graph: PathBuf,
    split: SplitTag,
    #[serde(default)]
    pre: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SplitTag {
    Train,
    Val,
    Test,
}

struct Dataset {
    graphs: Vec<Graph>,
    names: Vec<String>,
    pre_paths: Vec<Option<PathBuf>>,
    split: Option<Split>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_manifest(path: &Path, manifest: &mut RunManifest) -> Result<Dataset> {
    let raw = read_bytes(path)?;
    manifest.add_input(path, &raw);
    let entries: Vec<Entry> = serde_json::from_slice(&raw)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut ds = Dataset {
        graphs: Vec::new(),
        names: Vec::new(),
        pre_paths: Vec::new(),
        split: Some(Split {
            train: vec![],
            val: vec![],
            test: vec![],
        }),
    };
    for (i, e) in entries.iter().enumerate() {
        let gp = resolve(base, &e.graph);
        let graw = read_bytes(&gp)?;
        manifest.add_input(&gp, &graw);
        let g = graph_from_json::<f64>(&String::from_utf8_lossy(&graw))
            .map_err(|err| CliError::input(format!("{}: {err}", gp.display())))?;
        let name = gp
            .file_name()
            .map(|n| n.to_string_lossy().trim_end_matches(".json").trim_end_matches(".graph").to_string())
            .unwrap_or_default();
        let split = ds.split.as_mut().expect("set above");
        match e.split {
            SplitTag::Train => split.train.push(i),
            SplitTag::Val => split.val.push(i),
            SplitTag::Test => split.test.push(i),
        }
        ds.graphs.push(g);
        ds.names.push(name);
        ds.pre_paths.push(e.pre.as_ref().map(|p| resolve(base, p)));
    }
    Ok(ds)
}

fn apply_features(args: &ToytaskArgs, ds: &Dataset, manifest: &mut RunManifest) -> Result<Vec<Graph>> {
    match &args.features {
        Features::Onehot => Ok(ds.graphs.clone()),
        Features::Positional => {
            let dim = ds.graphs.iter().map(|g| g.n()).max().unwrap_or(1);
            with_positional_features(&ds.graphs, PositionalKind::OnehotIndex, dim).map_err(CliError::domain)
        }
        Features::Sinusoidal => {
            with_positional_features(&ds.graphs, PositionalKind::Sinusoidal, args.pos_dim).map_err(CliError::domain)
        }
        Features::Pre(dir) => ds
            .graphs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let path = match dir {
                    Some(d) => d.join(format!("{}.pre", ds.names[i])),
                    None => ds.pre_paths[i].clone().ok_or_else(|| {
                        CliError::domain(format!("--features pre needs a \"pre\" path for graph {}", ds.names[i]))
                    })?,
                };
                let raw = read_bytes(&path)?;
                manifest.add_input(&path, &raw);
                let e = read_pre::<f64>(&String::from_utf8_lossy(&raw))
                    .map_err(|err| CliError::input(format!("{}: {err}", path.display())))?;
                attach_features(g, e.data(), args.fusion).map_err(|err| CliError::domain(format!("{}: {err}", path.display())))
            })
            .collect(),
    }
}

pub fn run(args: ToytaskArgs) -> Result<()> {
    let spec = GraphSpec {
        mode: args.graph_mode,
        k: args.k,
        cutoff: args.cutoff,
    };
    let config = json!({
        "task": args.task,
        "features": args.features.describe(),
        "graph_mode": args.graph_mode.to_string(),
        "k": args.k,
        "cutoff": args.cutoff,
        "synthetic": args.manifest.is_none().then(|| format!("{}x{}", args.synthetic.count, args.synthetic.length)),
        "epochs": args.epochs,
        "lr": args.lr,
        "batch_size": args.batch_size,
        "layers": args.layers,
        "hidden": args.hidden,
        "l_max": args.l_max,
        "update_coords": args.update_coords,
        "pos_dim": args.pos_dim,
        "fusion": format!("{:?}", args.fusion).to_lowercase(),
        "split": args.split,
        "shuffle_labels": args.shuffle_labels,
    });
    let mut manifest = RunManifest::new("toytask", config, Some(args.seed));

    let ds = match &args.manifest {
        Some(p) => load_manifest(p, &mut manifest)?,
        None => {
            let graphs =
                synth_dataset::<f64>(args.synthetic.count, args.synthetic.length, args.seed, spec).map_err(CliError::domain)?;
            let n = graphs.len();
            Dataset {
                graphs,
                names: (0..n).map(|i| format!("syn{i:04}")).collect(),
                pre_paths: vec![None; n],
                split: None,
            }
        }
    };
    let graphs = apply_features(&args, &ds, &mut manifest)?;

    let mut task = ToyTask::new(args.task, graphs, args.l_max);
    if task.skipped > 0 && ds.split.is_some() {
        return Err(CliError::domain(format!(
            "{} manifest graphs exceed --l-max {}; drop them from the manifest",
            task.skipped, args.l_max
        )));
    }
    if args.shuffle_labels {
        task = task.with_shuffled_labels(args.seed.wrapping_add(1));
    }
    let in_dim = task.graphs.first().map(|g| g.feat_dim()).unwrap_or(0);
    let head = match args.task {
        TaskKind::Apr => Head::NodeClass { l_max: args.l_max },
        TaskKind::Rpe => Head::NodeRegress,
    };
    let model_cfg = EgnnConfig {
        n_layers: args.layers,
        hidden_dim: args.hidden,
        update_coords: args.update_coords,
        seed: args.seed,
        ..EgnnConfig::new(in_dim, head)
    };
    let split: [f64; 3] = args.split.clone().try_into().map_err(|_| CliError::domain("--split needs three fractions"))?;
    let train_cfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        batch_size: args.batch_size,
        seed: args.seed,
        split,
        ..TrainConfig::default()
    };

    if let Some(out) = &args.out {
        manifest.add_output(out);
        manifest.write(Some(&beside(out)))?;
    } else {
        manifest.write(None)?;
    }
    let (report, _) = trainer::train_with_split(&task, model_cfg, &train_cfg, ds.split).map_err(CliError::domain)?;
    let doc = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(out) => write_text(out, &doc),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}
