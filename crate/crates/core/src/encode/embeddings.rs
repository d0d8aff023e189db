use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::AnnotatedSentence;
use crate::tensor::Matrix;
use crate::{Error, Result};

pub const UNK_KEY: &str = "<UNK>";
pub const ROOT_KEY: &str = "<ROOT>";
const FALLBACK_RANGE: f64 = 0.05;

/// Word vectors plus the unknown-word and ROOT rows, which sit after the
/// vocabulary rows in `vectors`. Padding is implicit (all zero).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Arc<Matrix>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic per-word vector, uniform in [-0.05, 0.05].
pub fn fallback_vector(word: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(word.as_bytes()) ^ seed.rotate_left(17));
    (0..dim)
        .map(|_| rng.gen_range(-FALLBACK_RANGE..=FALLBACK_RANGE))
        .collect()
}

impl EmbeddingTable {
    fn assemble(
        dim: usize,
        entries: Vec<(String, Vec<f64>)>,
        unk: Vec<f64>,
        root: Vec<f64>,
    ) -> Self {
        let mut words = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut data = Vec::with_capacity((entries.len() + 2) * dim);
        for (w, v) in entries {
            if index.contains_key(&w) {
                continue;
            }
            index.insert(w.clone(), words.len());
            words.push(w);
            data.extend(v);
        }
        data.extend(unk);
        data.extend(root);
        let vectors = Matrix::from_vec(words.len() + 2, dim, data).expect("rows have length dim");
        EmbeddingTable {
            dim,
            words,
            index,
            vectors: Arc::new(vectors),
        }
    }

    /// Random-init mode: one fallback vector per distinct surface form.
    pub fn random(sentences: &[AnnotatedSentence], dim: usize, seed: u64) -> Self {
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for s in sentences {
            for t in &s.tokens {
                if seen.insert(t.surface.as_str()) {
                    entries.push((t.surface.clone(), fallback_vector(&t.surface, dim, seed)));
                }
            }
        }
        EmbeddingTable::assemble(
            dim,
            entries,
            fallback_vector(UNK_KEY, dim, seed),
            fallback_vector(ROOT_KEY, dim, seed),
        )
    }

    /// Reads the word2vec text format: a `count dim` header, then one
    /// `word v1 .. vdim` line per word. `<UNK>` and `<ROOT>` entries, when
    /// present, supply the special rows; otherwise they come from
    /// [`fallback_vector`] with `seed`.
    pub fn parse_word2vec(text: &str, dim: usize, seed: u64) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Format("missing word2vec header".into()))?;
        let mut parts = header.split_whitespace();
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(1, "bad vocabulary size in header"))?;
        let file_dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(1, "bad dimension in header"))?;
        if file_dim != dim {
            return Err(Error::Format(format!(
                "embedding file has dimension {}, expected {}",
                file_dim, dim
            )));
        }

        let mut entries = Vec::with_capacity(count);
        let mut unk = None;
        let mut root = None;
        let mut read = 0;
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-empty line");
            let vector = fields
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| {
                            Error::parse(n + 1, format!("non-numeric component {:?}", f))
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            if vector.len() != dim {
                return Err(Error::parse(
                    n + 1,
                    format!("expected {} components, found {}", dim, vector.len()),
                ));
            }
            read += 1;
            match word {
                UNK_KEY => unk = Some(vector),
                ROOT_KEY => root = Some(vector),
                _ => entries.push((word.to_string(), vector)),
            }
        }
        if read != count {
            return Err(Error::Format(format!(
                "header announces {} vectors, file holds {}",
                count, read
            )));
        }
        Ok(EmbeddingTable::assemble(
            dim,
            entries,
            unk.unwrap_or_else(|| fallback_vector(UNK_KEY, dim, seed)),
            root.unwrap_or_else(|| fallback_vector(ROOT_KEY, dim, seed)),
        ))
    }

    pub fn load_word2vec(path: impl AsRef<Path>, dim: usize, seed: u64) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EmbeddingTable::parse_word2vec(&text, dim, seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn unk_row(&self) -> usize {
        self.words.len()
    }

    pub fn root_row(&self) -> usize {
        self.words.len() + 1
    }

    /// Exact match, then lowercased, then the unknown-word row.
    pub fn lookup(&self, surface: &str) -> usize {
        self.index
            .get(surface)
            .or_else(|| self.index.get(&surface.to_lowercase()))
            .copied()
            .unwrap_or(self.unk_row())
    }

    pub fn row(&self, r: usize) -> &[f64] {
        self.vectors.row(r)
    }

    pub fn vector(&self, surface: &str) -> &[f64] {
        self.row(self.lookup(surface))
    }

    pub fn unk_vector(&self) -> &[f64] {
        self.row(self.unk_row())
    }

    pub fn root_vector(&self) -> &[f64] {
        self.row(self.root_row())
    }

    pub fn vectors(&self) -> &Arc<Matrix> {
        &self.vectors
    }

    pub fn word(&self, r: usize) -> &str {
        if r == self.unk_row() {
            UNK_KEY
        } else if r == self.root_row() {
            ROOT_KEY
        } else {
            &self.words[r]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(count: usize, dim: usize, words: &[&str]) -> String {
        let mut s = format!("{} {}\n", count, dim);
        for (i, w) in words.iter().enumerate() {
            let v: Vec<String> = (0..dim)
                .map(|j| format!("{}", (i * dim + j) as f64 / 100.0))
                .collect();
            s.push_str(&format!("{} {}\n", w, v.join(" ")));
        }
        s
    }

    #[test]
    fn reads_well_formed_file() {
        let t = EmbeddingTable::parse_word2vec(&file(3, 200, &["a", "b", "c"]), 200, 1).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dim(), 200);
        assert_eq!(t.vector("b")[0], 2.0);
        assert!(t.unk_vector().iter().all(|x| x.abs() <= 0.05));
        assert_eq!(t.vector("zzz"), t.unk_vector());
    }

    #[test]
    fn dim_mismatch_is_format_error() {
        let r = EmbeddingTable::parse_word2vec(&file(3, 100, &["a", "b", "c"]), 200, 1);
        assert!(matches!(r, Err(Error::Format(_))));
    }

    #[test]
    fn non_numeric_component_names_line() {
        let text = file(2, 3, &["a", "b"]).replace("b 0.03", "b x");
        match EmbeddingTable::parse_word2vec(&text, 3, 1) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn special_rows_from_file() {
        let t =
            EmbeddingTable::parse_word2vec(&file(3, 2, &["a", "<UNK>", "<ROOT>"]), 2, 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.unk_vector(), &[0.02, 0.03]);
        assert_eq!(t.root_vector(), &[0.04, 0.05]);
    }

    #[test]
    fn lowercase_fallback() {
        let t = EmbeddingTable::parse_word2vec(&file(1, 2, &["binds"]), 2, 1).unwrap();
        assert_eq!(t.lookup("Binds"), 0);
    }

    #[test]
    fn fallback_is_seeded_per_word() {
        assert_eq!(fallback_vector("p53", 8, 3), fallback_vector("p53", 8, 3));
        assert_ne!(fallback_vector("p53", 8, 3), fallback_vector("p53", 8, 4));
        assert_ne!(fallback_vector("p53", 8, 3), fallback_vector("MDM2", 8, 3));
    }
}
