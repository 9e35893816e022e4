//! PDB and FASTA parsing into residue-level structures.
//!
//! Only `ATOM` records are read. Each residue is represented by its Cα atom;
//! residues without one are dropped and counted in [`ParseStats`]. Alternate
//! locations other than blank or `A` are skipped and parsing stops at the
//! first `ENDMDL`, so multi-model entries contribute model 1 only.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructError {
    #[error("malformed record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("no C-alpha atoms found after filtering")]
    EmptyStructure,
    #[error("FASTA input contains no '>' records")]
    NoRecords,
    #[error("illegal residue symbol {symbol:?} in record {record:?}")]
    IllegalCharacter { record: String, symbol: char },
    #[error("sequence data before the first '>' header on line {line}")]
    MissingHeader { line: usize },
    #[error("record {0:?} has an empty sequence")]
    EmptySequence(String),
    #[error("unknown chain {0:?}")]
    UnknownChain(String),
}

pub type Result<T> = std::result::Result<T, StructError>;

/// The 20 standard amino acids in the order used for one-hot encoding; `X` is index 20.
pub const AMINO_ACIDS: [char; 20] = [
    'A', 'R', 'N', 'D', 'C', 'Q', 'E', 'G', 'H', 'I', 'L', 'K', 'M', 'F', 'P', 'S', 'T', 'W', 'Y',
    'V',
];

/// Index of a one-letter code in the 21-symbol alphabet (20 standard + `X`).
pub fn aa_index(aa: char) -> usize {
    AMINO_ACIDS.iter().position(|&c| c == aa).unwrap_or(20)
}

/// Maps a three-letter residue name to its one-letter code; anything unknown is `X`.
pub fn three_to_one(name: &str) -> char {
    match name.trim().to_ascii_uppercase().as_str() {
        "ALA" => 'A',
        "ARG" => 'R',
        "ASN" => 'N',
        "ASP" => 'D',
        "CYS" => 'C',
        "GLN" => 'Q',
        "GLU" => 'E',
        "GLY" => 'G',
        "HIS" => 'H',
        "ILE" => 'I',
        "LEU" => 'L',
        "LYS" => 'K',
        "MET" => 'M',
        "PHE" => 'F',
        "PRO" => 'P',
        "SER" => 'S',
        "THR" => 'T',
        "TRP" => 'W',
        "TYR" => 'Y',
        "VAL" => 'V',
        _ => 'X',
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residue {
    pub res_seq: i32,
    pub icode: Option<char>,
    pub aa: char,
    /// Cα position in Å.
    pub ca: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub chain_id: char,
    pub residues: Vec<Residue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub id: String,
    pub chains: Vec<Chain>,
}

impl Structure {
    pub fn chain(&self, chain_id: char) -> Option<&Chain> {
        self.chains.iter().find(|c| c.chain_id == chain_id)
    }

    /// Residues of all chains in chain order.
    pub fn residues(&self) -> impl Iterator<Item = &Residue> {
        self.chains.iter().flat_map(|c| c.residues.iter())
    }

    pub fn residue_count(&self) -> usize {
        self.chains.iter().map(|c| c.residues.len()).sum()
    }

    pub fn ca_coords(&self) -> Vec<[f64; 3]> {
        self.residues().map(|r| r.ca).collect()
    }

    /// One-letter codes of all chains concatenated in chain order.
    pub fn sequence_string(&self) -> String {
        self.residues().map(|r| r.aa).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub id: String,
    pub residues: String,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

/// Bookkeeping produced alongside a parsed structure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    /// Residues seen in `ATOM` records that had no usable Cα.
    pub dropped_residues: usize,
    /// `ATOM` records skipped because of their alternate location tag.
    pub skipped_altloc: usize,
}

fn column(line: &str, start: usize, end: usize) -> &str {
    // 1-based inclusive PDB columns; lines may be shorter than the record width.
    let bytes = line.as_bytes();
    let s = (start - 1).min(bytes.len());
    let e = end.min(bytes.len());
    line.get(s..e).unwrap_or("")
}

fn parse_coord(line: &str, lineno: usize, start: usize, end: usize, axis: &str) -> Result<f64> {
    let field = column(line, start, end).trim();
    let v: f64 = field.parse().map_err(|_| StructError::MalformedRecord {
        line: lineno,
        reason: format!("{axis} coordinate {field:?} is not numeric"),
    })?;
    if !v.is_finite() {
        return Err(StructError::MalformedRecord {
            line: lineno,
            reason: format!("{axis} coordinate {field:?} is not finite"),
        });
    }
    Ok(v)
}

/// Parses PDB text; see [`parse_pdb_with_stats`].
pub fn parse_pdb(text: &str, chain_filter: Option<&BTreeSet<char>>) -> Result<Structure> {
    parse_pdb_with_stats(text, chain_filter).map(|(s, _)| s)
}

/// Parses PDB text into a residue-level [`Structure`].
///
/// The structure id comes from the `HEADER` record (columns 63–66) when present.
pub fn parse_pdb_with_stats(
    text: &str,
    chain_filter: Option<&BTreeSet<char>>,
) -> Result<(Structure, ParseStats)> {
    let mut id = String::new();
    let mut stats = ParseStats::default();
    let mut chain_order: Vec<char> = Vec::new();
    // key: (chain, resSeq, icode) -> (aa, Option<ca>)
    let mut residues: HashMap<(char, i32, Option<char>), (char, Option<[f64; 3]>)> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with("ENDMDL") {
            break;
        }
        if line.starts_with("HEADER") && id.is_empty() {
            id = column(line, 63, 66).trim().to_string();
            continue;
        }
        if !line.starts_with("ATOM  ") {
            continue;
        }
        if line.len() < 54 {
            return Err(StructError::MalformedRecord {
                line: lineno,
                reason: format!("ATOM record has {} columns, need at least 54", line.len()),
            });
        }
        let chain_id = column(line, 22, 22).chars().next().unwrap_or(' ');
        if let Some(filter) = chain_filter {
            if !filter.contains(&chain_id) {
                continue;
            }
        }
        let alt = column(line, 17, 17).chars().next().unwrap_or(' ');
        if alt != ' ' && alt != 'A' {
            stats.skipped_altloc += 1;
            continue;
        }
        let res_seq_field = column(line, 23, 26).trim();
        let res_seq: i32 = res_seq_field.parse().map_err(|_| StructError::MalformedRecord {
            line: lineno,
            reason: format!("resSeq {res_seq_field:?} is not an integer"),
        })?;
        let icode = column(line, 27, 27).chars().next().filter(|c| *c != ' ');
        let aa = three_to_one(column(line, 18, 20));
        let atom_name = column(line, 13, 16).trim();

        let key = (chain_id, res_seq, icode);
        if !chain_order.contains(&chain_id) {
            chain_order.push(chain_id);
        }
        let entry = residues.entry(key).or_insert((aa, None));
        if atom_name == "CA" && entry.1.is_none() {
            let x = parse_coord(line, lineno, 31, 38, "x")?;
            let y = parse_coord(line, lineno, 39, 46, "y")?;
            let z = parse_coord(line, lineno, 47, 54, "z")?;
            *entry = (aa, Some([x, y, z]));
        }
    }

    let mut chains: Vec<Chain> = Vec::new();
    for chain_id in chain_order {
        let mut list: Vec<Residue> = Vec::new();
        for (&(c, res_seq, icode), &(aa, ca)) in residues.iter() {
            if c != chain_id {
                continue;
            }
            match ca {
                Some(ca) => list.push(Residue {
                    res_seq,
                    icode,
                    aa,
                    ca,
                }),
                None => stats.dropped_residues += 1,
            }
        }
        list.sort_by_key(|r| (r.res_seq, r.icode.unwrap_or(' ')));
        if !list.is_empty() {
            chains.push(Chain {
                chain_id,
                residues: list,
            });
        }
    }
    if chains.is_empty() {
        return Err(StructError::EmptyStructure);
    }
    if id.is_empty() {
        id = "UNKN".to_string();
    }
    Ok((Structure { id, chains }, stats))
}

/// Parses FASTA text. Whitespace inside sequences is removed and letters are
/// uppercased; alphabetic symbols outside the 20 standard residues become `X`.
pub fn parse_fasta(text: &str) -> Result<Vec<Sequence>> {
    let mut out: Vec<Sequence> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            out.push(Sequence {
                id,
                residues: String::new(),
            });
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some(current) = out.last_mut() else {
            return Err(StructError::MissingHeader { line: idx + 1 });
        };
        for ch in line.chars().filter(|c| !c.is_whitespace()) {
            if !ch.is_ascii_alphabetic() {
                return Err(StructError::IllegalCharacter {
                    record: current.id.clone(),
                    symbol: ch,
                });
            }
            let up = ch.to_ascii_uppercase();
            current
                .residues
                .push(if AMINO_ACIDS.contains(&up) { up } else { 'X' });
        }
    }
    if out.is_empty() {
        return Err(StructError::NoRecords);
    }
    if let Some(empty) = out.iter().find(|s| s.residues.is_empty()) {
        return Err(StructError::EmptySequence(empty.id.clone()));
    }
    Ok(out)
}

/// The fragmentary sequence of one chain: its one-letter codes in residue order.
pub fn structure_sequence(s: &Structure, chain_id: char) -> Result<Sequence> {
    let chain = s
        .chain(chain_id)
        .ok_or_else(|| StructError::UnknownChain(chain_id.to_string()))?;
    Ok(Sequence {
        id: format!("{}_{}", s.id, chain_id),
        residues: chain.residues.iter().map(|r| r.aa).collect(),
    })
}

/// Like [`structure_sequence`] but takes the chain id as text; empty or
/// multi-character ids are unknown chains.
pub fn structure_sequence_str(s: &Structure, chain_id: &str) -> Result<Sequence> {
    let mut chars = chain_id.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => structure_sequence(s, c),
        _ => Err(StructError::UnknownChain(chain_id.to_string())),
    }
}

/// Formats one `ATOM` Cα record in PDB fixed columns.
pub fn format_ca_record(serial: usize, res_name: &str, chain: char, res_seq: i32, ca: [f64; 3]) -> String {
    format!(
        "ATOM  {:>5}  CA  {:>3} {}{:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00           C",
        serial, res_name, chain, res_seq, ca[0], ca[1], ca[2]
    )
}

/// Three-letter name of a one-letter code (`UNK` for `X`).
pub fn one_to_three(aa: char) -> &'static str {
    match aa {
        'A' => "ALA",
        'R' => "ARG",
        'N' => "ASN",
        'D' => "ASP",
        'C' => "CYS",
        'Q' => "GLN",
        'E' => "GLU",
        'G' => "GLY",
        'H' => "HIS",
        'I' => "ILE",
        'L' => "LEU",
        'K' => "LYS",
        'M' => "MET",
        'F' => "PHE",
        'P' => "PRO",
        'S' => "SER",
        'T' => "THR",
        'W' => "TRP",
        'Y' => "TYR",
        'V' => "VAL",
        _ => "UNK",
    }
}

/// Renders a structure as Cα-only PDB text.
pub fn write_ca_pdb(s: &Structure) -> String {
    let mut out = String::new();
    if s.id.len() <= 4 {
        out.push_str(&format!("HEADER    {:<52}{:<4}\n", "", s.id));
    }
    let mut serial = 1;
    for chain in &s.chains {
        for r in &chain.residues {
            let mut line = format_ca_record(serial, one_to_three(r.aa), chain.chain_id, r.res_seq, r.ca);
            if let Some(ic) = r.icode {
                line.replace_range(26..27, &ic.to_string());
            }
            out.push_str(&line);
            out.push('\n');
            serial += 1;
        }
        out.push_str("TER\n");
    }
    out.push_str("END\n");
    out
}
