use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use plmgraph::graphbuild::{self, graph_to_json, GraphMode, DEFAULT_CUTOFF, DEFAULT_K};
use plmgraph::structio::{parse_pdb, Structure};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{read_bytes, write_text, CliError, Result};
use crate::manifest::{beside, RunManifest};

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// PDB files; more than one needs --out-dir.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "knn")]
    pub mode: GraphMode,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Chains to keep (comma separated or repeated); all chains by default.
    #[arg(long, value_delimiter = ',')]
    pub chain: Vec<char>,
    /// Output file for a single input; standard output when omitted.
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Output directory for batch mode (`<stem>.graph.json` per input).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for batch mode.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn chain_filter(chains: &[char]) -> Option<BTreeSet<char>> {
    (!chains.is_empty()).then(|| chains.iter().copied().collect())
}

pub fn load_structure(path: &Path, chains: &[char]) -> Result<(Structure, Vec<u8>)> {
    let raw = read_bytes(path)?;
    let text = String::from_utf8_lossy(&raw);
    let filter = chain_filter(chains);
    let s = parse_pdb(&text, filter.as_ref()).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((s, raw))
}

fn build_one(args: &GraphArgs, s: &Structure, path: &Path) -> Result<String> {
    let g = graphbuild::build::<f64>(s, args.mode, args.k, args.cutoff)
        .map_err(|e| CliError::domain(format!("{}: {e}", path.display())))?;
    Ok(graph_to_json(&g) + "\n")
}

pub fn run(args: GraphArgs) -> Result<()> {
    if args.jobs == 0 {
        return Err(CliError::domain("--jobs must be at least 1"));
    }
    if args.inputs.len() > 1 && args.out_dir.is_none() {
        return Err(CliError::domain("several inputs need --out-dir"));
    }
    let config = json!({
        "mode": args.mode.to_string(),
        "k": args.k,
        "cutoff": args.cutoff,
        "chain": args.chain.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "jobs": args.jobs,
    });
    let mut manifest = RunManifest::new("graph", config, None);

    let loaded: Vec<(Structure, Vec<u8>)> = args
        .inputs
        .iter()
        .map(|p| load_structure(p, &args.chain))
        .collect::<Result<_>>()?;
    for (p, (_, raw)) in args.inputs.iter().zip(&loaded) {
        manifest.add_input(p, raw);
    }

    match &args.out_dir {
        None => {
            let doc = build_one(&args, &loaded[0].0, &args.inputs[0])?;
            if let Some(out) = &args.out {
                manifest.add_output(out);
                manifest.write(Some(&beside(out)))?;
                write_text(out, &doc)
            } else {
                manifest.write(None)?;
                print!("{doc}");
                Ok(())
            }
        }
        Some(dir) => {
            let outs: Vec<PathBuf> = args
                .inputs
                .iter()
                .map(|p| {
                    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    dir.join(format!("{stem}.graph.json"))
                })
                .collect();
            let unique: BTreeSet<&PathBuf> = outs.iter().collect();
            if unique.len() != outs.len() {
                return Err(CliError::domain("input file stems collide in --out-dir"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.jobs)
                .build()
                .map_err(|e| CliError::domain(format!("thread pool: {e}")))?;
            let docs: Vec<String> = pool.install(|| {
                loaded
                    .par_iter()
                    .zip(args.inputs.par_iter())
                    .map(|((s, _), p)| build_one(&args, s, p))
                    .collect::<Result<_>>()
            })?;
            outs.iter().for_each(|o| manifest.add_output(o));
            manifest.write(Some(&dir.join("manifest.json")))?;
            for (o, d) in outs.iter().zip(&docs) {
                write_text(o, d)?;
            }
            Ok(())
        }
    }
}
