use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tabexec::correction::CorrectionPolicy;
use tabexec::forge::{load_tabfact, load_wtq, FactRecord, QaRecord, TableCatalog, PANWIKI_TARGET};
use tabexec::gateway::ModelConfig;
use tabexec::table::{CorpusProfile, DEFAULT_NULL_TOKENS};

/// Everything a run needs, read from one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// JSONL log of every gateway exchange.
    pub audit_log: Option<PathBuf>,
    pub corpus: Corpora,
    pub model: ModelConfig,
    pub policy: CorrectionPolicy,
    pub build: BuildSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            workers: 4,
            out_dir: PathBuf::from("out"),
            audit_log: None,
            corpus: Corpora::default(),
            model: ModelConfig::default(),
            policy: CorrectionPolicy::default(),
            build: BuildSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Corpora {
    pub tabfact: Option<TabfactCorpus>,
    pub wtq: Option<WtqCorpus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabfactCorpus {
    /// JSON file mapping table ids to statements and labels.
    pub statements: PathBuf,
    /// Directory holding the referenced table files.
    pub tables: PathBuf,
    #[serde(default = "tabfact_delimiter")]
    pub delimiter: char,
    pub null_tokens: Option<Vec<String>>,
}

fn tabfact_delimiter() -> char {
    '#'
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtqCorpus {
    /// Tab-separated examples file.
    pub examples: PathBuf,
    /// Directory that `context` paths are relative to.
    pub root: PathBuf,
    pub null_tokens: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildSection {
    pub panwiki_target: Option<usize>,
    pub ood_n: usize,
    pub ood_max_resamples: usize,
}

impl Default for BuildSection {
    fn default() -> Self {
        BuildSection {
            panwiki_target: Some(PANWIKI_TARGET),
            ood_n: 300,
            ood_max_resamples: 3,
        }
    }
}

fn profile(delimiter: Option<char>, null_tokens: &Option<Vec<String>>) -> CorpusProfile {
    CorpusProfile {
        delimiter,
        null_tokens: null_tokens
            .clone()
            .unwrap_or_else(|| DEFAULT_NULL_TOKENS.iter().map(|s| s.to_string()).collect()),
        ..CorpusProfile::default()
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        Ok(config)
    }

    /// Resolves relative paths against `dir`, the config file's directory.
    pub fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        if let Some(p) = self.audit_log.as_mut() {
            fix(p);
        }
        if let Some(t) = self.corpus.tabfact.as_mut() {
            fix(&mut t.statements);
            fix(&mut t.tables);
        }
        if let Some(w) = self.corpus.wtq.as_mut() {
            fix(&mut w.examples);
            fix(&mut w.root);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        self.model.validate()?;
        if self.build.ood_n == 0 {
            bail!("build.ood_n must be at least 1");
        }
        if let Some(t) = &self.corpus.tabfact {
            require_file(&t.statements)?;
            require_dir(&t.tables)?;
        }
        if let Some(w) = &self.corpus.wtq {
            require_file(&w.examples)?;
            require_dir(&w.root)?;
        }
        Ok(())
    }

    pub fn tabfact(&self) -> Result<(Vec<FactRecord>, TableCatalog)> {
        let t = self
            .corpus
            .tabfact
            .as_ref()
            .context("config has no [corpus.tabfact] section")?;
        Ok(load_tabfact(
            &t.statements,
            &t.tables,
            &profile(Some(t.delimiter), &t.null_tokens),
        )?)
    }

    pub fn wtq(&self) -> Result<(Vec<QaRecord>, TableCatalog)> {
        let w = self
            .corpus
            .wtq
            .as_ref()
            .context("config has no [corpus.wtq] section")?;
        Ok(load_wtq(
            &w.examples,
            &w.root,
            &profile(None, &w.null_tokens),
        )?)
    }

    /// Tables from every configured corpus.
    pub fn all_tables(&self) -> Result<TableCatalog> {
        let mut catalog = TableCatalog::new();
        if self.corpus.tabfact.is_some() {
            catalog.extend(self.tabfact()?.1);
        }
        if self.corpus.wtq.is_some() {
            catalog.extend(self.wtq()?.1);
        }
        if catalog.is_empty() {
            bail!("no corpus configured; add [corpus.tabfact] or [corpus.wtq]");
        }
        Ok(catalog)
    }
}

fn require_file(p: &Path) -> Result<()> {
    if !p.is_file() {
        bail!("corpus file not found: {}", p.display());
    }
    Ok(())
}

fn require_dir(p: &Path) -> Result<()> {
    if !p.is_dir() {
        bail!("corpus directory not found: {}", p.display());
    }
    Ok(())
}
