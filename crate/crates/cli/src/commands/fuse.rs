use std::path::PathBuf;

use clap::Args;
use plmgraph::embedio::read_pre;
use plmgraph::graphbuild::{attach_features, graph_from_json, graph_to_json, FusionMode, GraphError};
use plmgraph::seqalign::{align_global, restrict_embedding, Scoring};
use plmgraph::structio::{parse_fasta, Sequence};
use serde_json::json;

use crate::commands::graph::load_structure;
use crate::error::{read_bytes, write_text, CliError, Result};
use crate::manifest::{beside, RunManifest};

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Graph JSON produced by `graph`.
    #[arg(long)]
    pub graph: PathBuf,
    /// Per-residue embedding in PRE format.
    #[arg(long)]
    pub pre: PathBuf,
    #[arg(long, default_value = "replace")]
    pub mode: FusionMode,
    /// FASTA holding the full sequence the embedding was computed on.
    #[arg(long, requires = "structure")]
    pub align: Option<PathBuf>,
    /// Structure the graph was built from (needed with --align).
    #[arg(long, requires = "align")]
    pub structure: Option<PathBuf>,
    /// Chains used when the graph was built.
    #[arg(long, value_delimiter = ',')]
    pub chain: Vec<char>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn fusion_name(m: FusionMode) -> &'static str {
    match m {
        FusionMode::Replace => "replace",
        FusionMode::Concat => "concat",
        FusionMode::Sum => "sum",
    }
}

pub fn run(args: FuseArgs) -> Result<()> {
    let graph_raw = read_bytes(&args.graph)?;
    let g = graph_from_json::<f64>(&String::from_utf8_lossy(&graph_raw))
        .map_err(|e| CliError::input(format!("{}: {e}", args.graph.display())))?;
    let pre_raw = read_bytes(&args.pre)?;
    let mut emb = read_pre::<f64>(&String::from_utf8_lossy(&pre_raw))
        .map_err(|e| CliError::input(format!("{}: {e}", args.pre.display())))?;
    let mut extra = Vec::new();

    if let (Some(fasta), Some(structure)) = (&args.align, &args.structure) {
        let fasta_raw = read_bytes(fasta)?;
        let records = parse_fasta(&String::from_utf8_lossy(&fasta_raw))
            .map_err(|e| CliError::input(format!("{}: {e}", fasta.display())))?;
        let full = records
            .into_iter()
            .next()
            .ok_or_else(|| CliError::input(format!("{} holds no records", fasta.display())))?;
        let (s, s_raw) = load_structure(structure, &args.chain)?;
        let frag = Sequence {
            id: s.id.clone(),
            residues: s.sequence_string(),
        };
        let al = align_global(&full, &frag, Scoring::default()).map_err(CliError::domain)?;
        emb = restrict_embedding(&emb, &al).map_err(CliError::domain)?;
        extra.push((fasta.clone(), fasta_raw));
        extra.push((structure.clone(), s_raw));
    }

    let fused = attach_features(&g, emb.data(), args.mode).map_err(|e| match e {
        GraphError::RowCountMismatch { expected, found } => CliError::domain(format!(
            "embedding has {found} rows but the graph has {expected} nodes"
        )),
        other => CliError::domain(other),
    })?;
    let config = json!({
        "mode": fusion_name(args.mode),
        "align": args.align.is_some(),
        "chain": args.chain.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "graph_feat_dim": g.feat_dim(),
        "embedding_dim": emb.dim(),
        "embedding_source": emb.source(),
        "fused_feat_dim": fused.feat_dim(),
    });
    let mut manifest = RunManifest::new("fuse", config, None);
    manifest.add_input(&args.graph, &graph_raw);
    manifest.add_input(&args.pre, &pre_raw);
    for (p, raw) in &extra {
        manifest.add_input(p, raw);
    }
    let doc = graph_to_json(&fused) + "\n";
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
