//! Flat `key = value` settings with defaults, file values and overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::augment::AugmentConfig;
use crate::error::{Error, Result};
use crate::eval::{EvalConfig, Punctuation};
use crate::scorer::ScorerConfig;
use crate::selftrain::SelfTrainConfig;
use crate::trainer::TrainConfig;

/// Every recognized key with its default value.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("seed", "0"),
    ("encoder", "bilstm"),
    ("embedding_dim", "100"),
    ("hidden_dim", "200"),
    ("ff_dim", "250"),
    ("dropout", "0.2"),
    ("max_positions", "256"),
    ("vocab_size", "all"),
    ("epochs", "30"),
    ("epochs_augmented", "10"),
    ("batch_size", "8"),
    ("learning_rate", "0.001"),
    ("beta1", "0.9"),
    ("beta2", "0.999"),
    ("epsilon", "1e-8"),
    ("patience", "5"),
    ("eval_every", "1"),
    ("max_len", "60"),
    ("augment_size", "10000"),
    ("augment_source", "original"),
    ("augment_max_len", "60"),
    ("st_steps", "5"),
    ("st_epochs", "15"),
    ("st_warm_start", "false"),
    ("st_dev_fraction", "0.1"),
    ("eval_mode", "corpus"),
    ("eval_exclude_trivial", "false"),
    ("eval_max_length", "none"),
    ("grid.budgets", "10/5"),
    ("grid.augment", "0"),
    ("grid.st_steps", "0"),
    ("grid.vocab_sizes", "all"),
    ("grid.seeds", "1"),
    ("data", "synthetic"),
    ("data.synthetic_size", "1500"),
    ("data.synthetic_seed", "2021"),
    ("data.synthetic_max_len", "30"),
    ("data.test_size", "200"),
    ("data.pool_size", "1000"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl Settings {
    /// Applies a settings file on top of the current values.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected key = value, found {line:?}"),
                });
            };
            let key = key.trim();
            if let Some(first) = seen.insert(key.to_string(), idx + 1) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("key {key} already set on line {first}"),
                });
            }
            self.set(key, value.trim()).map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(Error::config(format!("unknown key {key}"))),
        }
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected KEY=VALUE, found {pair:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("{key} is not a known setting"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| Error::config(format!("{key}: cannot parse {raw:?}: {e}")))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(Error::config(format!("{key}: expected true or false, found {other:?}"))),
        }
    }

    /// `none` maps to `None`.
    pub fn get_optional<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(key) == "none" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    /// Comma separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        let items = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e| Error::config(format!("{key}: cannot parse {s:?}: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(Error::config(format!("{key}: empty list")));
        }
        Ok(items)
    }

    /// Resolved settings, one `key = value` per line, in key order.
    pub fn render(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn log_resolved(&self, command: &str) {
        log::info!("{command}: resolved configuration");
        for (k, v) in &self.values {
            log::info!("  {k} = {v}");
        }
    }

    pub fn vocab_size(&self) -> Result<usize> {
        parse_vocab_size(self.raw("vocab_size"))
            .map_err(|e| Error::config(format!("vocab_size: {e}")))
    }

    pub fn scorer_config(&self) -> Result<ScorerConfig> {
        let config = ScorerConfig {
            encoder: self.get("encoder")?,
            embedding_dim: self.get("embedding_dim")?,
            hidden_dim: self.get("hidden_dim")?,
            ff_dim: self.get("ff_dim")?,
            dropout: self.get("dropout")?,
            max_positions: self.get("max_positions")?,
            seed: crate::derive_seed(self.get("seed")?, 1),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let config = TrainConfig {
            epochs: self.get("epochs")?,
            batch_size: self.get("batch_size")?,
            learning_rate: self.get("learning_rate")?,
            beta1: self.get("beta1")?,
            beta2: self.get("beta2")?,
            epsilon: self.get("epsilon")?,
            patience: self.get("patience")?,
            eval_every: self.get("eval_every")?,
            seed: crate::derive_seed(self.get("seed")?, 2),
            max_len: self.get("max_len")?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn augment_config(&self) -> Result<AugmentConfig> {
        Ok(AugmentConfig {
            target_size: self.get("augment_size")?,
            seed: crate::derive_seed(self.get("seed")?, 3),
            source: self.get("augment_source")?,
            max_len: self.get("augment_max_len")?,
        })
    }

    pub fn selftrain_config(&self) -> Result<SelfTrainConfig> {
        Ok(SelfTrainConfig {
            steps: self.get("st_steps")?,
            train: TrainConfig {
                epochs: self.get("st_epochs")?,
                ..self.train_config()?
            },
            warm_start: self.get_bool("st_warm_start")?,
            dev_fraction: self.get("st_dev_fraction")?,
            dump_dir: None,
        })
    }

    pub fn eval_config(&self) -> Result<EvalConfig> {
        Ok(EvalConfig {
            mode: self.get("eval_mode")?,
            punctuation: Punctuation::default(),
            exclude_trivial: self.get_bool("eval_exclude_trivial")?,
            max_length: self.get_optional("eval_max_length")?,
        })
    }
}

/// `all` means no cap.
pub fn parse_vocab_size(raw: &str) -> std::result::Result<usize, String> {
    match raw {
        "all" => Ok(usize::MAX),
        s => match s.parse::<usize>() {
            Ok(0) => Err("must be positive".into()),
            Ok(n) => Ok(n),
            Err(e) => Err(format!("cannot parse {s:?}: {e}")),
        },
    }
}
