use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LossKind {
    #[serde(rename = "bce")]
    Bce,
    #[serde(rename = "fl")]
    Fl,
    #[serde(rename = "cb")]
    Cb,
    #[serde(rename = "r-fl")]
    RFl,
    #[serde(rename = "ntr-fl")]
    NtrFl,
    #[serde(rename = "db-0fl")]
    Db0Fl,
    #[serde(rename = "cb-ntr")]
    CbNtr,
    #[serde(rename = "db")]
    Db,
}

impl LossKind {
    pub const ALL: [LossKind; 8] = [
        LossKind::Bce,
        LossKind::Fl,
        LossKind::Cb,
        LossKind::RFl,
        LossKind::NtrFl,
        LossKind::Db0Fl,
        LossKind::CbNtr,
        LossKind::Db,
    ];

    /// Lowercase identifier used on the command line and in config files.
    pub fn key(self) -> &'static str {
        match self {
            LossKind::Bce => "bce",
            LossKind::Fl => "fl",
            LossKind::Cb => "cb",
            LossKind::RFl => "r-fl",
            LossKind::NtrFl => "ntr-fl",
            LossKind::Db0Fl => "db-0fl",
            LossKind::CbNtr => "cb-ntr",
            LossKind::Db => "db",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LossKind::Bce => "BCE",
            LossKind::Fl => "FL",
            LossKind::Cb => "CB",
            LossKind::RFl => "R-FL",
            LossKind::NtrFl => "NTR-FL",
            LossKind::Db0Fl => "DB-0FL",
            LossKind::CbNtr => "CB-NTR",
            LossKind::Db => "DB",
        }
    }

    pub fn uses_focal(self) -> bool {
        !matches!(self, LossKind::Bce | LossKind::Db0Fl)
    }

    pub fn uses_cb_weight(self) -> bool {
        matches!(self, LossKind::Cb | LossKind::CbNtr)
    }

    pub fn uses_db_weight(self) -> bool {
        matches!(self, LossKind::RFl | LossKind::Db0Fl | LossKind::Db)
    }

    /// Negative-tolerant regularization: λ-scaled negatives and class bias `v`.
    pub fn uses_ntr(self) -> bool {
        matches!(self, LossKind::NtrFl | LossKind::Db0Fl | LossKind::CbNtr | LossKind::Db)
    }

    fn valid_keys() -> String {
        Self::ALL.iter().map(|k| k.key()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.key() == wanted)
            .ok_or_else(|| Error::Config(format!("unknown loss kind {s:?}; valid kinds: {}", Self::valid_keys())))
    }
}

/// Loss selector plus every hyperparameter any kind may read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec<F> {
    pub kind: LossKind,
    /// Focusing parameter γ ≥ 0.
    pub gamma: F,
    /// Class-balanced β in [0, 1).
    pub beta_cb: F,
    /// Smoothing floor α ≥ 0.
    pub alpha: F,
    /// Smoothing slope β > 0.
    pub beta_smooth: F,
    /// Smoothing shift μ.
    pub mu: F,
    /// Negative scale λ ≥ 1.
    pub lambda: F,
    /// Class-bias scale κ ≥ 0.
    pub kappa: F,
}

impl<F: Real> LossSpec<F> {
    pub const KEYS: [&'static str; 8] = ["kind", "gamma", "beta_cb", "alpha", "beta_smooth", "mu", "lambda", "kappa"];

    pub fn new(kind: LossKind) -> Self {
        Self {
            kind,
            gamma: F::lit(2.0),
            beta_cb: F::lit(0.9),
            alpha: F::lit(0.1),
            beta_smooth: F::lit(10.0),
            mu: F::lit(0.9),
            lambda: F::lit(2.0),
            kappa: F::lit(0.05),
        }
    }

    pub fn with_kind(self, kind: LossKind) -> Self {
        Self { kind, ..self }
    }

    /// γ actually applied: DB-0FL and BCE drop the focal factor.
    pub fn effective_gamma(&self) -> F {
        if self.kind.uses_focal() {
            self.gamma
        } else {
            F::zero()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, v: F, range: &str| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} outside {range}")))
            }
        };
        check(self.gamma >= F::zero(), "gamma", self.gamma, "[0, inf)")?;
        check(self.beta_cb >= F::zero() && self.beta_cb < F::one(), "beta_cb", self.beta_cb, "[0, 1)")?;
        check(self.alpha >= F::zero(), "alpha", self.alpha, "[0, inf)")?;
        check(self.beta_smooth > F::zero(), "beta_smooth", self.beta_smooth, "(0, inf)")?;
        check(true, "mu", self.mu, "finite values")?;
        check(self.lambda >= F::one(), "lambda", self.lambda, "[1, inf)")?;
        check(self.kappa >= F::zero(), "kappa", self.kappa, "[0, inf)")?;
        Ok(())
    }

    /// Flat `(key, value)` pairs, floats in shortest round-trip form.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", self.kind.key().to_owned()),
            ("gamma", format!("{:?}", self.gamma)),
            ("beta_cb", format!("{:?}", self.beta_cb)),
            ("alpha", format!("{:?}", self.alpha)),
            ("beta_smooth", format!("{:?}", self.beta_smooth)),
            ("mu", format!("{:?}", self.mu)),
            ("lambda", format!("{:?}", self.lambda)),
            ("kappa", format!("{:?}", self.kappa)),
        ]
    }

    /// Sets one field from its flat key; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "kind" {
            self.kind = value.parse()?;
            return Ok(());
        }
        let parsed: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("loss.{key}: expected a number, got {value:?}")))?;
        let parsed = F::lit(parsed);
        let slot = match key {
            "gamma" => &mut self.gamma,
            "beta_cb" => &mut self.beta_cb,
            "alpha" => &mut self.alpha,
            "beta_smooth" => &mut self.beta_smooth,
            "mu" => &mut self.mu,
            "lambda" => &mut self.lambda,
            "kappa" => &mut self.kappa,
            _ => {
                return Err(Error::Config(format!(
                    "unknown loss key {key:?}; valid keys: {}",
                    Self::KEYS.join(", ")
                )))
            }
        };
        *slot = parsed;
        Ok(())
    }
}

impl<F: Real> Default for LossSpec<F> {
    fn default() -> Self {
        Self::new(LossKind::Db)
    }
}
