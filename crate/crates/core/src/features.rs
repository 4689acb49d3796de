//! TF-IDF features over a whitespace/punctuation tokenizer.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Document};
use crate::{Error, Real, Result};

pub const DEFAULT_MIN_DF: usize = 2;
pub const DEFAULT_MAX_FEATURES: usize = 50_000;
pub const DEFAULT_MIN_TOKEN_LEN: usize = 2;
const FORMAT_VERSION: u32 = 1;

/// Lowercases, splits on runs of non-alphanumeric characters and drops
/// tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, DEFAULT_MIN_TOKEN_LEN)
}

pub fn tokenize_with(text: &str, min_len: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= min_len.max(1))
        .map(str::to_lowercase)
        .collect()
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector<F> {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<F>,
}

impl<F: Real> SparseVector<F> {
    pub fn new(dim: usize, entries: Vec<(usize, F)>) -> Result<Self> {
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            if i >= dim {
                return Err(Error::invalid("index", format!("{i} out of range for dimension {dim}")));
            }
            if indices.last().is_some_and(|&last| i <= last) {
                return Err(Error::invalid("index", "indices must be strictly increasing"));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sparse vector value"));
            }
            indices.push(i);
            values.push(v);
        }
        Ok(Self { dim, indices, values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, F)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> F {
        self.values.iter().map(|&v| v * v).sum::<F>().sqrt()
    }

    pub fn dot_dense(&self, dense: &[F]) -> F {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    pub fn to_dense(&self) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerSettings {
    pub min_df: usize,
    pub max_features: usize,
    pub min_token_len: usize,
}

impl Default for VectorizerSettings {
    fn default() -> Self {
        Self {
            min_df: DEFAULT_MIN_DF,
            max_features: DEFAULT_MAX_FEATURES,
            min_token_len: DEFAULT_MIN_TOKEN_LEN,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VectorizerFile {
    version: u32,
    settings: VectorizerSettings,
    documents: usize,
    tokens: Vec<String>,
    df: Vec<usize>,
}

/// Fitted TF-IDF vocabulary. `idf_t = ln((1 + M) / (1 + df_t)) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectorizer<F> {
    settings: VectorizerSettings,
    documents: usize,
    tokens: Vec<String>,
    df: Vec<usize>,
    idf: Vec<F>,
    index: HashMap<String, usize>,
}

impl<F: Real> Vectorizer<F> {
    pub fn fit(train: &Corpus, settings: VectorizerSettings) -> Result<Self> {
        Self::fit_texts(train.documents.iter().map(|d| d.text.as_str()), settings)
    }

    pub fn fit_texts<'a>(texts: impl IntoIterator<Item = &'a str>, settings: VectorizerSettings) -> Result<Self> {
        if settings.max_features == 0 {
            return Err(Error::invalid("max_features", "must be positive"));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut m = 0usize;
        for text in texts {
            m += 1;
            let unique: HashSet<String> = tokenize_with(text, settings.min_token_len).into_iter().collect();
            for t in unique {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        if m == 0 {
            return Err(Error::Empty("training corpus"));
        }
        if settings.min_df > m {
            return Err(Error::invalid(
                "min_df",
                format!("min_df {} exceeds the {m} training documents", settings.min_df),
            ));
        }
        let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, n)| *n >= settings.min_df).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(settings.max_features);
        if kept.is_empty() {
            return Err(Error::Empty("vocabulary after min_df filtering"));
        }
        // feature index order is lexicographic, independent of df ranking
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        let (tokens, df): (Vec<String>, Vec<usize>) = kept.into_iter().unzip();
        Ok(Self::assemble(settings, m, tokens, df))
    }

    fn assemble(settings: VectorizerSettings, documents: usize, tokens: Vec<String>, df: Vec<usize>) -> Self {
        let m = F::from_count(documents);
        let idf = df
            .iter()
            .map(|&d| ((F::one() + m) / (F::one() + F::from_count(d))).ln() + F::one())
            .collect();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            settings,
            documents,
            tokens,
            df,
            idf,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn idf(&self) -> &[F] {
        &self.idf
    }

    pub fn settings(&self) -> VectorizerSettings {
        self.settings
    }

    pub fn feature(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn df(&self, token: &str) -> Option<usize> {
        self.feature(token).map(|i| self.df[i])
    }

    /// Raw-count TF times IDF, L2-normalized. Unknown tokens are ignored.
    pub fn transform_text(&self, text: &str) -> SparseVector<F> {
        let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
        for t in tokenize_with(text, self.settings.min_token_len) {
            if let Some(&i) = self.index.get(&t) {
                *tf.entry(i).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(usize, F)> = tf
            .into_iter()
            .map(|(i, n)| (i, F::from_count(n) * self.idf[i]))
            .collect();
        let norm = entries.iter().map(|&(_, v)| v * v).sum::<F>().sqrt();
        if norm > F::zero() {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        let (indices, values) = entries.into_iter().unzip();
        SparseVector {
            dim: self.dim(),
            indices,
            values,
        }
    }

    pub fn transform(&self, doc: &Document) -> SparseVector<F> {
        self.transform_text(&doc.text)
    }

    pub fn transform_corpus(&self, corpus: &Corpus) -> Vec<SparseVector<F>> {
        corpus.documents.iter().map(|d| self.transform(d)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = VectorizerFile {
            version: FORMAT_VERSION,
            settings: self.settings,
            documents: self.documents,
            tokens: self.tokens.clone(),
            df: self.df.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: VectorizerFile = serde_json::from_str(json)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::invalid(
                "vectorizer",
                format!("unsupported format version {}", file.version),
            ));
        }
        if file.tokens.len() != file.df.len() {
            return Err(Error::invalid("vectorizer", "token and df lists differ in length"));
        }
        Ok(Self::assemble(file.settings, file.documents, file.tokens, file.df))
    }

    /// SHA-256 of the serialized form, used to tie checkpoints to their features.
    pub fn fingerprint(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_json()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}
