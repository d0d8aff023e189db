//! Two-channel token featureization.
//!
//! A token row is `word ⊕ pos(8) ⊕ chunk(18) ⊕ entity(4) ⊕ dep(101) ⊕
//! position(20)`, 351 wide with 200-dimensional word vectors. Channel 1
//! holds each token's own row; channel 2 holds the row of its dependency head
//! (or of the ROOT pseudo-token), keeping the child's own distances to the
//! candidate proteins so that both channels stay row-aligned.
//!
//! Instances are stored compactly, as an embedding row index plus the active
//! one-hot offsets per token, and materialized into dense matrices on demand.

mod embeddings;
mod schema;

pub use embeddings::{fallback_vector, EmbeddingTable, ROOT_KEY, UNK_KEY};
pub use schema::{
    encode_chunk, encode_dep, encode_entity, encode_pos, encode_position, entity_index,
    position_bits, Bin, FeatureSchema, CHUNK_DIM, CHUNK_OFFSET, DEP_DIM, DEP_OFFSET, DEP_ROOT,
    DEP_UNK, ENTITY_DIM, ENTITY_OFFSET, FEATURE_DIM, POSITION_DIM, POSITION_HALF, POSITION_OFFSET,
    POS_DIM, POS_GROUPS, POS_OFFSET, POS_OTHER,
};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::corpus::{AnnotatedSentence, AnnotatedToken, EntityRole, Head, Label, PpiInstance};
use crate::tensor::Matrix;
use crate::{Error, Result};

pub const DEFAULT_MAX_LEN: usize = 160;
pub const CHANNELS: usize = 2;

/// One encoded token: an embedding row plus the set one-hot offsets
/// (relative to the end of the word slice, ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRow {
    pub word: usize,
    pub active: Vec<u16>,
}

impl TokenRow {
    fn write_into(&self, table: &Matrix, out: &mut [f64]) {
        let word_dim = table.cols();
        out[..word_dim].copy_from_slice(table.row(self.word));
        for &a in &self.active {
            out[word_dim + a as usize] = 1.0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// Per-channel dense rows; only the first `valid_len` rows are read.
    Dense(Vec<Matrix>),
    Sparse {
        table: Arc<Matrix>,
        channels: Vec<Vec<TokenRow>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInstance {
    pub instance_id: String,
    pub doc_id: String,
    pub label: Label,
    pub difficult: bool,
    pub max_len: usize,
    pub valid_len: usize,
    pub dim: usize,
    pub features: Features,
}

impl EncodedInstance {
    /// Wraps raw channel matrices, e.g. for tests on arbitrary inputs.
    pub fn dense(
        instance_id: impl Into<String>,
        label: Label,
        channels: Vec<Matrix>,
        valid_len: usize,
    ) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::Shape("at least one channel required".into()))?;
        let (max_len, dim) = first.shape();
        if valid_len == 0 || valid_len > max_len {
            return Err(Error::Shape(format!(
                "valid length {} must lie in 1..={}",
                valid_len, max_len
            )));
        }
        for c in &channels {
            c.expect_shape((max_len, dim), "channel")?;
        }
        Ok(EncodedInstance {
            instance_id: instance_id.into(),
            doc_id: String::new(),
            label,
            difficult: false,
            max_len,
            valid_len,
            dim,
            features: Features::Dense(channels),
        })
    }

    pub fn channel_count(&self) -> usize {
        match &self.features {
            Features::Dense(c) => c.len(),
            Features::Sparse { channels, .. } => channels.len(),
        }
    }

    pub fn word_dim(&self) -> Option<usize> {
        match &self.features {
            Features::Dense(_) => None,
            Features::Sparse { table, .. } => Some(table.cols()),
        }
    }

    /// Embedding rows used by each valid token of channel `c`.
    pub fn word_rows(&self, c: usize) -> Option<Vec<usize>> {
        match &self.features {
            Features::Dense(_) => None,
            Features::Sparse { channels, .. } => Some(channels[c].iter().map(|r| r.word).collect()),
        }
    }

    /// Dense `valid_len x dim` view of channel `c`. `embeddings` overrides
    /// the word vectors of sparse instances (fine-tuning).
    pub fn channel(&self, c: usize, embeddings: Option<&Matrix>) -> Matrix {
        match &self.features {
            Features::Dense(ch) => {
                let src = &ch[c];
                Matrix::from_vec(
                    self.valid_len,
                    self.dim,
                    src.data()[..self.valid_len * self.dim].to_vec(),
                )
                .expect("slice length matches")
            }
            Features::Sparse { table, channels } => {
                let table = embeddings.unwrap_or(table);
                let mut m = Matrix::zeros(self.valid_len, self.dim);
                for (i, row) in channels[c].iter().enumerate() {
                    row.write_into(table, m.row_mut(i));
                }
                m
            }
        }
    }

    /// Full `max_len x dim` matrix with zero padding.
    pub fn padded_channel(&self, c: usize) -> Matrix {
        let mut m = Matrix::zeros(self.max_len, self.dim);
        let valid = self.channel(c, None);
        m.data_mut()[..valid.data().len()].copy_from_slice(valid.data());
        m
    }
}

/// The dependency head of a token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadToken<'a> {
    Token {
        index: usize,
        token: &'a AnnotatedToken,
    },
    Root,
}

pub fn head_of(index: usize, sentence: &AnnotatedSentence) -> HeadToken<'_> {
    match sentence.tokens[index].head {
        Head::Root => HeadToken::Root,
        Head::Token(h) => HeadToken::Token {
            index: h,
            token: &sentence.tokens[h],
        },
    }
}

fn position_offsets(d1: i64, d2: i64, schema: &FeatureSchema, active: &mut Vec<u16>) {
    for (half, d) in [d1, d2].into_iter().enumerate() {
        let base = POSITION_OFFSET + half * POSITION_HALF;
        let (negative, bin) = position_bits(d, schema);
        if negative {
            active.push(base as u16);
        }
        active.push((base + bin) as u16);
    }
}

pub fn token_row(
    tok: &AnnotatedToken,
    d1: i64,
    d2: i64,
    emb: &EmbeddingTable,
    schema: &FeatureSchema,
) -> TokenRow {
    let mut active = vec![
        (POS_OFFSET + schema.pos_group(&tok.pos)) as u16,
        (CHUNK_OFFSET + schema.chunk_index(&tok.chunk)) as u16,
        (ENTITY_OFFSET + entity_index(tok.entity_role)) as u16,
        (DEP_OFFSET + schema.dep_index(&tok.dep_label)) as u16,
    ];
    position_offsets(d1, d2, schema, &mut active);
    TokenRow {
        word: emb.lookup(&tok.surface),
        active,
    }
}

/// The ROOT pseudo-token: ROOT word vector, POS OTHER, chunk O, entity O,
/// dependency ROOT.
pub fn root_row(d1: i64, d2: i64, emb: &EmbeddingTable, schema: &FeatureSchema) -> TokenRow {
    let mut active = vec![
        (POS_OFFSET + POS_OTHER) as u16,
        (CHUNK_OFFSET + schema.chunk_index("O")) as u16,
        (ENTITY_OFFSET + entity_index(EntityRole::O)) as u16,
        (DEP_OFFSET + schema.dep_index(DEP_ROOT)) as u16,
    ];
    position_offsets(d1, d2, schema, &mut active);
    TokenRow {
        word: emb.root_row(),
        active,
    }
}

/// Dense `word ⊕ pos ⊕ chunk ⊕ entity ⊕ dep ⊕ position` vector.
pub fn token_vector(
    tok: &AnnotatedToken,
    d1: i64,
    d2: i64,
    emb: &EmbeddingTable,
    schema: &FeatureSchema,
) -> Vec<f64> {
    let mut out = vec![0.0; emb.dim() + FEATURE_DIM];
    token_row(tok, d1, d2, emb, schema).write_into(emb.vectors(), &mut out);
    out
}

pub fn encode_instance(
    inst: &PpiInstance,
    emb: &EmbeddingTable,
    schema: &FeatureSchema,
    max_len: usize,
) -> EncodedInstance {
    let sentence = &inst.sentence;
    let valid_len = sentence.len().min(max_len);
    let mut own = Vec::with_capacity(valid_len);
    let mut heads = Vec::with_capacity(valid_len);
    for i in 0..valid_len {
        let d1 = inst.prot1.distance_from(i);
        let d2 = inst.prot2.distance_from(i);
        own.push(token_row(&sentence.tokens[i], d1, d2, emb, schema));
        heads.push(match head_of(i, sentence) {
            HeadToken::Token { token, .. } => token_row(token, d1, d2, emb, schema),
            HeadToken::Root => root_row(d1, d2, emb, schema),
        });
    }
    EncodedInstance {
        instance_id: inst.instance_id.clone(),
        doc_id: sentence.doc_id.clone(),
        label: inst.label,
        difficult: inst.difficult,
        max_len,
        valid_len,
        dim: emb.dim() + FEATURE_DIM,
        features: Features::Sparse {
            table: Arc::clone(emb.vectors()),
            channels: vec![own, heads],
        },
    }
}

/// An encoded corpus tagged with the schema it was built against.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSet {
    pub schema_hash: String,
    pub max_len: usize,
    pub word_dim: usize,
    pub instances: Vec<EncodedInstance>,
}

impl EncodedSet {
    pub fn dim(&self) -> usize {
        self.word_dim + FEATURE_DIM
    }

    pub fn subset<F: Fn(&EncodedInstance) -> bool>(&self, keep: F) -> EncodedSet {
        EncodedSet {
            schema_hash: self.schema_hash.clone(),
            max_len: self.max_len,
            word_dim: self.word_dim,
            instances: self.instances.iter().filter(|i| keep(i)).cloned().collect(),
        }
    }

    /// Text container: header, the referenced embedding rows, then one `i`
    /// record per instance followed by its `r` rows (channel 1 then 2).
    pub fn to_text(&self) -> Result<String> {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut order: Vec<(usize, Arc<Matrix>)> = Vec::new();
        for inst in &self.instances {
            let Features::Sparse { table, channels } = &inst.features else {
                return Err(Error::Format(
                    "only corpus-encoded instances can be written".into(),
                ));
            };
            for row in channels.iter().flatten() {
                remap.entry(row.word).or_insert_with(|| {
                    order.push((row.word, Arc::clone(table)));
                    order.len() - 1
                });
            }
        }

        let mut out = String::new();
        writeln!(out, "mcdepcnn-encoded v1").unwrap();
        writeln!(out, "schema_hash\t{}", self.schema_hash).unwrap();
        writeln!(out, "max_len\t{}", self.max_len).unwrap();
        writeln!(out, "word_dim\t{}", self.word_dim).unwrap();
        writeln!(out, "vectors\t{}", order.len()).unwrap();
        writeln!(out, "instances\t{}", self.instances.len()).unwrap();
        for (word, table) in &order {
            let values: Vec<String> = table.row(*word).iter().map(|v| v.to_string()).collect();
            writeln!(out, "v\t{}", values.join(" ")).unwrap();
        }
        for inst in &self.instances {
            writeln!(
                out,
                "i\t{}\t{}\t{}\t{}\t{}",
                inst.instance_id,
                inst.doc_id,
                inst.label,
                u8::from(inst.difficult),
                inst.valid_len
            )
            .unwrap();
            if let Features::Sparse { channels, .. } = &inst.features {
                for (c, rows) in channels.iter().enumerate() {
                    for row in rows {
                        let active: Vec<String> =
                            row.active.iter().map(|a| a.to_string()).collect();
                        writeln!(out, "r\t{}\t{}\t{}", c, remap[&row.word], active.join(","))
                            .unwrap();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<EncodedSet> {
        let mut lines = text.lines().enumerate().peekable();
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(n, l)| (n + 1, l))
                .ok_or_else(|| Error::Format(format!("truncated file, expected {}", what)))
        };
        let (_, magic) = next("header")?;
        if magic != "mcdepcnn-encoded v1" {
            return Err(Error::Format("not an encoded dataset file".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let (n, line) = next(key)?;
            match line.split_once('\t') {
                Some((k, v)) if k == key => Ok(v.to_string()),
                _ => Err(Error::parse(n, format!("expected {}", key))),
            }
        };
        let schema_hash = field("schema_hash")?;
        let num = |s: String, key: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Format(format!("bad {}", key)))
        };
        let max_len = num(field("max_len")?, "max_len")?;
        let word_dim = num(field("word_dim")?, "word_dim")?;
        let n_vectors = num(field("vectors")?, "vectors")?;
        let n_instances = num(field("instances")?, "instances")?;

        let mut data = Vec::with_capacity(n_vectors * word_dim);
        for _ in 0..n_vectors {
            let (n, line) = next("vector")?;
            let body = line
                .strip_prefix("v\t")
                .ok_or_else(|| Error::parse(n, "expected vector record"))?;
            let before = data.len();
            for v in body.split(' ').filter(|s| !s.is_empty()) {
                data.push(
                    v.parse::<f64>()
                        .map_err(|_| Error::parse(n, "bad vector component"))?,
                );
            }
            if data.len() - before != word_dim {
                return Err(Error::parse(n, "vector has the wrong dimension"));
            }
        }
        let table = Arc::new(Matrix::from_vec(n_vectors, word_dim, data)?);

        let mut instances = Vec::with_capacity(n_instances);
        for _ in 0..n_instances {
            let (n, line) = next("instance")?;
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 || f[0] != "i" {
                return Err(Error::parse(n, "expected instance record"));
            }
            let label: Label = f[3].parse().map_err(|e| Error::parse(n, e))?;
            let valid_len: usize = f[5]
                .parse()
                .map_err(|_| Error::parse(n, "bad valid length"))?;
            let mut channels: Vec<Vec<_>> = (0..CHANNELS)
                .map(|_| Vec::with_capacity(valid_len))
                .collect();
            for c in 0..CHANNELS {
                for _ in 0..valid_len {
                    let (n, line) = next("token row")?;
                    let r: Vec<&str> = line.split('\t').collect();
                    if r.len() != 4 || r[0] != "r" || r[1] != c.to_string() {
                        return Err(Error::parse(n, "expected token row"));
                    }
                    let word: usize = r[2].parse().map_err(|_| Error::parse(n, "bad word row"))?;
                    if word >= n_vectors {
                        return Err(Error::parse(n, "word row out of range"));
                    }
                    let active = r[3]
                        .split(',')
                        .map(|a| match a.parse::<u16>() {
                            Ok(v) if (v as usize) < FEATURE_DIM => Ok(v),
                            _ => Err(Error::parse(n, "bad feature offset")),
                        })
                        .collect::<Result<Vec<u16>>>()?;
                    channels[c].push(TokenRow { word, active });
                }
            }
            instances.push(EncodedInstance {
                instance_id: f[1].to_string(),
                doc_id: f[2].to_string(),
                label,
                difficult: f[4] == "1",
                max_len,
                valid_len,
                dim: word_dim + FEATURE_DIM,
                features: Features::Sparse {
                    table: Arc::clone(&table),
                    channels,
                },
            });
        }
        Ok(EncodedSet {
            schema_hash,
            max_len,
            word_dim,
            instances,
        })
    }
}

pub fn encode_all(
    instances: &[PpiInstance],
    emb: &EmbeddingTable,
    schema: &FeatureSchema,
    max_len: usize,
) -> EncodedSet {
    EncodedSet {
        schema_hash: schema.hash(),
        max_len,
        word_dim: emb.dim(),
        instances: instances
            .iter()
            .map(|i| encode_instance(i, emb, schema, max_len))
            .collect(),
    }
}
