use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::{AnnotatedSentence, EntityRole};
use crate::{Error, Result};

pub const POS_DIM: usize = 8;
pub const CHUNK_DIM: usize = 18;
pub const ENTITY_DIM: usize = 4;
pub const DEP_DIM: usize = 101;
/// Sign bit plus nine magnitude bins, per distance.
pub const POSITION_HALF: usize = 10;
pub const POSITION_DIM: usize = 2 * POSITION_HALF;

/// Offsets of the one-hot slices relative to the end of the word slice.
pub const POS_OFFSET: usize = 0;
pub const CHUNK_OFFSET: usize = POS_OFFSET + POS_DIM;
pub const ENTITY_OFFSET: usize = CHUNK_OFFSET + CHUNK_DIM;
pub const DEP_OFFSET: usize = ENTITY_OFFSET + ENTITY_DIM;
pub const POSITION_OFFSET: usize = DEP_OFFSET + DEP_DIM;
/// Width of everything after the word slice (151).
pub const FEATURE_DIM: usize = POSITION_OFFSET + POSITION_DIM;

pub const POS_GROUPS: [&str; POS_DIM] = [
    "NOUN", "ADJ", "ADV", "VERB", "PRON_DET", "ADP_CONJ", "NUM", "OTHER",
];
pub const POS_OTHER: usize = 7;

const DEFAULT_POS_RULES: &[(&str, &str)] = &[
    ("NOUN", "NN*"),
    ("ADJ", "JJ*"),
    ("ADV", "RB*"),
    ("VERB", "VB*"),
    ("VERB", "MD"),
    ("PRON_DET", "PRP*"),
    ("PRON_DET", "DT"),
    ("PRON_DET", "WDT"),
    ("PRON_DET", "WP*"),
    ("ADP_CONJ", "IN"),
    ("ADP_CONJ", "TO"),
    ("ADP_CONJ", "CC"),
    ("NUM", "CD"),
];

const DEFAULT_CHUNKS: [&str; CHUNK_DIM] = [
    "O", "B-NP", "I-NP", "B-VP", "I-VP", "B-PP", "I-PP", "B-ADJP", "I-ADJP", "B-ADVP", "I-ADVP",
    "B-SBAR", "I-SBAR", "B-PRT", "I-PRT", "B-CONJP", "I-CONJP", "B-INTJ",
];

pub const DEP_UNK: &str = "<UNK>";
pub const DEP_ROOT: &str = "ROOT";

/// Inclusive magnitude range; `hi = None` is open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bin {
    pub lo: u64,
    pub hi: Option<u64>,
}

const DEFAULT_BINS: [Bin; 9] = [
    Bin { lo: 0, hi: Some(0) },
    Bin { lo: 1, hi: Some(1) },
    Bin { lo: 2, hi: Some(2) },
    Bin { lo: 3, hi: Some(3) },
    Bin { lo: 4, hi: Some(4) },
    Bin { lo: 5, hi: Some(8) },
    Bin {
        lo: 9,
        hi: Some(16),
    },
    Bin {
        lo: 17,
        hi: Some(32),
    },
    Bin { lo: 33, hi: None },
];

/// Frozen vocabularies for the categorical features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    /// `(group, pattern)`; a trailing `*` makes the pattern a prefix match.
    pos_rules: Vec<(usize, String)>,
    chunk_vocab: Vec<String>,
    dep_vocab: Vec<String>,
    position_bins: Vec<Bin>,
    chunk_index: HashMap<String, usize>,
    dep_index: HashMap<String, usize>,
}

impl FeatureSchema {
    fn build(
        pos_rules: Vec<(usize, String)>,
        chunk_vocab: Vec<String>,
        dep_vocab: Vec<String>,
        position_bins: Vec<Bin>,
    ) -> Result<Self> {
        if chunk_vocab.len() != CHUNK_DIM || !chunk_vocab.iter().any(|c| c == "O") {
            return Err(Error::Format(format!(
                "chunk vocabulary needs {} tags including O, found {}",
                CHUNK_DIM,
                chunk_vocab.len()
            )));
        }
        if dep_vocab.len() != DEP_DIM
            || !dep_vocab.iter().any(|d| d == DEP_UNK)
            || !dep_vocab.iter().any(|d| d == DEP_ROOT)
        {
            return Err(Error::Format(format!(
                "dependency vocabulary needs {} labels including {} and {}, found {}",
                DEP_DIM,
                DEP_UNK,
                DEP_ROOT,
                dep_vocab.len()
            )));
        }
        if position_bins.len() != POSITION_HALF - 1 {
            return Err(Error::Format(format!(
                "expected {} position bins, found {}",
                POSITION_HALF - 1,
                position_bins.len()
            )));
        }
        let mut expect = 0;
        for (i, b) in position_bins.iter().enumerate() {
            let last = i + 1 == position_bins.len();
            if b.lo != expect || b.hi.is_none() != last || b.hi.is_some_and(|h| h < b.lo) {
                return Err(Error::Format(
                    "position bins must tile 0.. contiguously and end open".into(),
                ));
            }
            expect = b.hi.map_or(0, |h| h + 1);
        }
        let index = |v: &[String]| -> Result<HashMap<String, usize>> {
            let map: HashMap<_, _> = v.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
            if map.len() != v.len() {
                return Err(Error::Format("duplicate vocabulary entry".into()));
            }
            Ok(map)
        };
        Ok(FeatureSchema {
            chunk_index: index(&chunk_vocab)?,
            dep_index: index(&dep_vocab)?,
            pos_rules,
            chunk_vocab,
            dep_vocab,
            position_bins,
        })
    }

    /// Default groups, chunk tags and bins, with the dependency vocabulary
    /// taken from `labels`: the 99 most frequent plus ROOT, sorted, behind an
    /// UNK slot and padded to 101.
    pub fn with_dep_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for l in labels {
            if l != DEP_ROOT && l != DEP_UNK {
                *counts.entry(l).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut kept: Vec<String> = ranked
            .into_iter()
            .take(DEP_DIM - 2)
            .map(|(l, _)| l.to_string())
            .collect();
        kept.push(DEP_ROOT.to_string());
        kept.sort();

        let mut dep_vocab = vec![DEP_UNK.to_string()];
        dep_vocab.extend(kept);
        let mut pad = 0;
        while dep_vocab.len() < DEP_DIM {
            dep_vocab.push(format!("<PAD{}>", pad));
            pad += 1;
        }

        let pos_rules = DEFAULT_POS_RULES
            .iter()
            .map(|(g, p)| (group_index(g).expect("default group"), p.to_string()))
            .collect();
        FeatureSchema::build(
            pos_rules,
            DEFAULT_CHUNKS.iter().map(|s| s.to_string()).collect(),
            dep_vocab,
            DEFAULT_BINS.to_vec(),
        )
        .expect("default schema is well-formed")
    }

    pub fn from_sentences(sentences: &[AnnotatedSentence]) -> Self {
        FeatureSchema::with_dep_labels(
            sentences
                .iter()
                .flat_map(|s| s.tokens.iter().map(|t| t.dep_label.as_str())),
        )
    }

    pub fn chunk_vocab(&self) -> &[String] {
        &self.chunk_vocab
    }

    pub fn dep_vocab(&self) -> &[String] {
        &self.dep_vocab
    }

    pub fn position_bins(&self) -> &[Bin] {
        &self.position_bins
    }

    pub fn pos_group(&self, pos: &str) -> usize {
        let mut best: Option<(usize, usize)> = None;
        for (group, pattern) in &self.pos_rules {
            let score = match pattern.strip_suffix('*') {
                Some(prefix) if pos.starts_with(prefix) => prefix.len(),
                None if pattern == pos => usize::MAX,
                _ => continue,
            };
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, *group));
            }
        }
        best.map_or(POS_OTHER, |(_, g)| g)
    }

    pub fn chunk_index(&self, chunk: &str) -> usize {
        self.chunk_index
            .get(chunk)
            .or_else(|| self.chunk_index.get("O"))
            .copied()
            .expect("O is always present")
    }

    pub fn dep_index(&self, label: &str) -> usize {
        self.dep_index
            .get(label)
            .filter(|_| !label.starts_with("<PAD"))
            .or_else(|| self.dep_index.get(DEP_UNK))
            .copied()
            .expect("UNK is always present")
    }

    pub fn bin_index(&self, magnitude: u64) -> usize {
        self.position_bins
            .iter()
            .position(|b| magnitude >= b.lo && b.hi.is_none_or(|h| magnitude <= h))
            .expect("bins cover every magnitude")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("[pos_groups]\n");
        for (g, p) in &self.pos_rules {
            out.push_str(&format!("{}\t{}\n", POS_GROUPS[*g], p));
        }
        out.push_str("[chunk_vocab]\n");
        for c in &self.chunk_vocab {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("[dep_vocab]\n");
        for d in &self.dep_vocab {
            out.push_str(d);
            out.push('\n');
        }
        out.push_str("[position_bins]\n");
        for b in &self.position_bins {
            match b.hi {
                Some(h) if h == b.lo => out.push_str(&format!("{}\n", b.lo)),
                Some(h) => out.push_str(&format!("{}-{}\n", b.lo, h)),
                None => out.push_str(&format!("{}+\n", b.lo)),
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut section = "";
        let mut pos_rules = Vec::new();
        let mut chunks = Vec::new();
        let mut deps = Vec::new();
        let mut bins = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = match line {
                    "[pos_groups]" | "[chunk_vocab]" | "[dep_vocab]" | "[position_bins]" => line,
                    other => return Err(Error::parse(n + 1, format!("unknown section {}", other))),
                };
                continue;
            }
            match section {
                "[pos_groups]" => {
                    let (g, p) = line
                        .split_once('\t')
                        .ok_or_else(|| Error::parse(n + 1, "expected GROUP<TAB>pattern"))?;
                    let g = group_index(g)
                        .ok_or_else(|| Error::parse(n + 1, format!("unknown POS group {:?}", g)))?;
                    pos_rules.push((g, p.to_string()));
                }
                "[chunk_vocab]" => chunks.push(line.to_string()),
                "[dep_vocab]" => deps.push(line.to_string()),
                "[position_bins]" => bins.push(
                    parse_bin(line)
                        .ok_or_else(|| Error::parse(n + 1, format!("bad bin {:?}", line)))?,
                ),
                _ => return Err(Error::parse(n + 1, "entry outside of a section")),
            }
        }
        FeatureSchema::build(pos_rules, chunks, deps, bins)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        FeatureSchema::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{:02x}", b)).collect()
    }
}

fn group_index(name: &str) -> Option<usize> {
    POS_GROUPS.iter().position(|g| *g == name)
}

fn parse_bin(s: &str) -> Option<Bin> {
    if let Some(lo) = s.strip_suffix('+') {
        return Some(Bin {
            lo: lo.parse().ok()?,
            hi: None,
        });
    }
    match s.split_once('-') {
        Some((lo, hi)) => Some(Bin {
            lo: lo.parse().ok()?,
            hi: Some(hi.parse().ok()?),
        }),
        None => {
            let v = s.parse().ok()?;
            Some(Bin { lo: v, hi: Some(v) })
        }
    }
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub fn encode_pos(pos: &str, schema: &FeatureSchema) -> Vec<f64> {
    one_hot(POS_DIM, schema.pos_group(pos))
}

pub fn encode_chunk(chunk: &str, schema: &FeatureSchema) -> Vec<f64> {
    one_hot(CHUNK_DIM, schema.chunk_index(chunk))
}

/// One-hot in the order PROT1, PROT2, PROT, O.
pub fn encode_entity(role: EntityRole) -> Vec<f64> {
    one_hot(ENTITY_DIM, entity_index(role))
}

pub fn entity_index(role: EntityRole) -> usize {
    match role {
        EntityRole::Prot1 => 0,
        EntityRole::Prot2 => 1,
        EntityRole::Prot => 2,
        EntityRole::O => 3,
    }
}

pub fn encode_dep(label: &str, schema: &FeatureSchema) -> Vec<f64> {
    one_hot(DEP_DIM, schema.dep_index(label))
}

/// Active offsets (within one 10-bit half) for a signed distance.
pub fn position_bits(distance: i64, schema: &FeatureSchema) -> (bool, usize) {
    (distance < 0, 1 + schema.bin_index(distance.unsigned_abs()))
}

/// `[sign, bins...]` for `d1` followed by the same for `d2`.
pub fn encode_position(d1: i64, d2: i64, schema: &FeatureSchema) -> Vec<f64> {
    let mut v = vec![0.0; POSITION_DIM];
    for (half, d) in [d1, d2].into_iter().enumerate() {
        let (negative, bin) = position_bits(d, schema);
        if negative {
            v[half * POSITION_HALF] = 1.0;
        }
        v[half * POSITION_HALF + bin] = 1.0;
    }
    v
}
