//! Versioned text checkpoints and model manifests.
//!
//! ```text
//! mcdepcnn-checkpoint v1
//! [manifest]
//! windows 3
//! ...
//! schema_hash <hex>
//! [seeds]
//! model 1
//! [tensor conv3.ch1.w 1053 400]
//! <one row per line, space separated>
//! [adam 12 0.0007 0.9 0.999 1e-8]
//! [adam.m conv3.ch1.w 1053 400]
//! ...
//! ```
//!
//! Values are written in exponent form, which round-trips `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::model::{init_model, ModelConfig, ModelParams};
use crate::tensor::{AdamConfig, AdamState, Matrix};
use crate::{Error, Result};

const MAGIC: &str = "mcdepcnn-checkpoint v1";

/// Model configuration plus the schema it was trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub config: ModelConfig,
    pub schema_hash: String,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let windows: Vec<String> = c.windows.iter().map(usize::to_string).collect();
        format!(
            "windows {}\nfilters_per_window {}\nmax_len {}\nkeep_prob {}\nchannels {}\ninput_dim {}\nfine_tune_embeddings {}\nseed {}\nschema_hash {}\n",
            windows.join(","),
            c.filters_per_window,
            c.max_len,
            c.keep_prob,
            c.channels,
            c.input_dim,
            c.fine_tune_embeddings,
            c.seed,
            self.schema_hash
        )
    }

    pub fn parse(text: &str) -> Result<Manifest> {
        let mut fields = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(n + 1, "expected `key value`"))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| -> Result<&String> {
            fields
                .get(k)
                .ok_or_else(|| Error::Format(format!("manifest lacks {}", k)))
        };
        let bad = |k: &str| Error::Format(format!("manifest has a malformed {}", k));
        let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(k)) };
        let windows = get("windows")?
            .split(',')
            .map(|w| w.parse().map_err(|_| bad("windows")))
            .collect::<Result<Vec<usize>>>()?;
        let config = ModelConfig {
            windows,
            filters_per_window: num("filters_per_window")?,
            max_len: num("max_len")?,
            keep_prob: get("keep_prob")?.parse().map_err(|_| bad("keep_prob"))?,
            channels: num("channels")?,
            input_dim: num("input_dim")?,
            fine_tune_embeddings: get("fine_tune_embeddings")?
                .parse()
                .map_err(|_| bad("fine_tune_embeddings"))?,
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
        };
        config.validate()?;
        Ok(Manifest {
            config,
            schema_hash: get("schema_hash")?.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub manifest: Manifest,
    pub seeds: BTreeMap<String, u64>,
    pub params: ModelParams,
    pub adam: Option<AdamState>,
}

fn write_matrix(out: &mut String, header: &str, m: &Matrix) {
    writeln!(out, "[{} {} {}]", header, m.rows(), m.cols()).unwrap();
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format!("{:e}", v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{}\n[manifest]\n{}[seeds]\n",
            MAGIC,
            self.manifest.to_text()
        );
        for (k, v) in &self.seeds {
            writeln!(out, "{} {}", k, v).unwrap();
        }
        let named = self.params.named();
        for (name, m) in &named {
            write_matrix(&mut out, &format!("tensor {}", name), m);
        }
        if let Some(adam) = &self.adam {
            let c = adam.config;
            writeln!(
                out,
                "[adam {} {:e} {:e} {:e} {:e}]",
                adam.t, c.learning_rate, c.beta1, c.beta2, c.epsilon
            )
            .unwrap();
            for ((name, _), m) in named.iter().zip(&adam.m) {
                write_matrix(&mut out, &format!("adam.m {}", name), m);
            }
            for ((name, _), m) in named.iter().zip(&adam.v) {
                write_matrix(&mut out, &format!("adam.v {}", name), m);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Checkpoint> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&MAGIC) {
            return Err(Error::Format("not a checkpoint file".into()));
        }
        let mut i = 1;
        let expect = |i: usize, what: &str| -> Result<&str> {
            lines
                .get(i)
                .copied()
                .ok_or_else(|| Error::Format(format!("truncated checkpoint, expected {}", what)))
        };
        if expect(i, "[manifest]")? != "[manifest]" {
            return Err(Error::parse(i + 1, "expected [manifest]"));
        }
        i += 1;
        let start = i;
        while expect(i, "[seeds]")? != "[seeds]" {
            i += 1;
        }
        let manifest = Manifest::parse(&lines[start..i].join("\n"))?;
        i += 1;
        let mut seeds = BTreeMap::new();
        while let Some(line) = lines.get(i).filter(|l| !l.starts_with('[')) {
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(i + 1, "expected `name seed`"))?;
            let v = v.parse().map_err(|_| Error::parse(i + 1, "bad seed"))?;
            seeds.insert(k.to_string(), v);
            i += 1;
        }

        let read_matrix = |i: &mut usize, kind: &str| -> Result<(String, Matrix)> {
            let line = expect(*i, kind)?;
            let inner = line
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
                .ok_or_else(|| Error::parse(*i + 1, format!("expected [{} ...]", kind)))?;
            let parts: Vec<&str> = inner.split(' ').collect();
            if parts.len() != 4 || parts[0] != kind {
                return Err(Error::parse(
                    *i + 1,
                    format!("expected [{} name rows cols]", kind),
                ));
            }
            let rows: usize = parts[2]
                .parse()
                .map_err(|_| Error::parse(*i + 1, "bad rows"))?;
            let cols: usize = parts[3]
                .parse()
                .map_err(|_| Error::parse(*i + 1, "bad cols"))?;
            *i += 1;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = expect(*i, "matrix row")?;
                let before = data.len();
                for v in line.split(' ').filter(|s| !s.is_empty()) {
                    data.push(
                        v.parse::<f64>()
                            .map_err(|_| Error::parse(*i + 1, "bad value"))?,
                    );
                }
                if data.len() - before != cols {
                    return Err(Error::parse(*i + 1, "row has the wrong length"));
                }
                *i += 1;
            }
            Ok((parts[1].to_string(), Matrix::from_vec(rows, cols, data)?))
        };

        let mut params = init_model(&manifest.config, 0)?;
        if manifest.config.fine_tune_embeddings {
            params.embeddings = Some(Matrix::zeros(0, 0));
        }
        let names: Vec<String> = params.named().into_iter().map(|(n, _)| n).collect();
        let mut loaded = Vec::with_capacity(names.len());
        for name in &names {
            let (found, m) = read_matrix(&mut i, "tensor")?;
            if &found != name {
                return Err(Error::Format(format!(
                    "expected tensor {}, found {}",
                    name, found
                )));
            }
            loaded.push(m);
        }
        for (slot, m) in params.tensors_mut().into_iter().zip(loaded) {
            if slot.shape() != (0, 0) {
                m.expect_shape(slot.shape(), "checkpoint tensor")?;
            }
            *slot = m;
        }
        params.check_finite()?;

        let adam = match lines.get(i) {
            None => None,
            Some(line) => {
                let inner = line
                    .strip_prefix("[adam ")
                    .and_then(|l| l.strip_suffix(']'))
                    .ok_or_else(|| Error::parse(i + 1, "expected [adam ...]"))?;
                let p: Vec<&str> = inner.split(' ').collect();
                let f = |s: &str| -> Result<f64> {
                    s.parse()
                        .map_err(|_| Error::parse(i + 1, "bad optimizer field"))
                };
                if p.len() != 5 {
                    return Err(Error::parse(i + 1, "expected [adam t lr beta1 beta2 eps]"));
                }
                let t: u64 = p[0].parse().map_err(|_| Error::parse(i + 1, "bad step"))?;
                let config = AdamConfig {
                    learning_rate: f(p[1])?,
                    beta1: f(p[2])?,
                    beta2: f(p[3])?,
                    epsilon: f(p[4])?,
                };
                i += 1;
                let mut state = AdamState::new(config, params.tensors());
                state.t = t;
                for kind in ["adam.m", "adam.v"] {
                    for (j, name) in names.iter().enumerate() {
                        let (found, m) = read_matrix(&mut i, kind)?;
                        if &found != name {
                            return Err(Error::Format(format!(
                                "expected {} {}, found {}",
                                kind, name, found
                            )));
                        }
                        let slot = if kind == "adam.m" {
                            &mut state.m[j]
                        } else {
                            &mut state.v[j]
                        };
                        m.expect_shape(slot.shape(), kind)?;
                        *slot = m;
                    }
                }
                Some(state)
            }
        };
        if i != lines.len() {
            return Err(Error::parse(i + 1, "trailing content"));
        }
        Ok(Checkpoint {
            manifest,
            seeds,
            params,
            adam,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        Checkpoint::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Loads and rejects checkpoints built against a different schema.
    pub fn load_for_schema(path: impl AsRef<Path>, schema_hash: &str) -> Result<Checkpoint> {
        let ckpt = Checkpoint::load(path)?;
        if ckpt.manifest.schema_hash != schema_hash {
            return Err(Error::SchemaMismatch {
                expected: schema_hash.to_string(),
                found: ckpt.manifest.schema_hash,
            });
        }
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gradcheck::reference_setup;
    use crate::model::{loss_and_grads, Dropout};

    fn sample(with_adam: bool, fine_tune: bool) -> Checkpoint {
        let (mut config, mut params, batch) = reference_setup(3).unwrap();
        if fine_tune {
            config.fine_tune_embeddings = true;
            params.embeddings = Some(crate::tensor::xavier_init(4, 3, 1));
        }
        let adam = with_adam.then(|| {
            let mut state = AdamState::new(AdamConfig::default(), params.tensors());
            let refs: Vec<_> = batch.iter().collect();
            if !fine_tune {
                let (_, g) = loss_and_grads(&refs, &params, &config, Dropout::Off).unwrap();
                state.step(&mut params.tensors_mut(), &g.tensors()).unwrap();
            }
            state
        });
        Checkpoint {
            manifest: Manifest {
                config,
                schema_hash: "abc123".into(),
            },
            seeds: [("model".to_string(), 3u64), ("shuffle".to_string(), 9)].into(),
            params,
            adam,
        }
    }

    #[test]
    fn round_trips_exactly() {
        for (adam, ft) in [(false, false), (true, false), (true, true)] {
            let c = sample(adam, ft);
            let back = Checkpoint::parse(&c.to_text()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        sample(false, false).save(&path).unwrap();
        assert!(Checkpoint::load_for_schema(&path, "abc123").is_ok());
        assert!(matches!(
            Checkpoint::load_for_schema(&path, "other"),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let text = sample(true, false).to_text();
        let cut = &text[..text.len() / 2];
        assert!(Checkpoint::parse(cut).is_err());
    }
}
