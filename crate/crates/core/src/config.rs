//! Run configuration: defaults, flat `key=value` config files with dotted
//! keys, CLI overrides, and exhaustive validation.

use std::path::Path;

use crate::diffusion::{DiffusionConfig, SparsifyRule};
use crate::error::{Error, Result};
use crate::eval::FermiDiracConfig;
use crate::geometry::LiftMode;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub signature: String,
    pub lr: f64,
    pub epochs: usize,
    pub gamma: f64,
    pub view_dim: usize,
    pub lift: LiftMode,
    pub diffusion_alpha: f64,
    pub sparsify: SparsifyRule,
    pub fermi_r: f64,
    pub fermi_t: f64,
    pub split: (f64, f64, f64),
    pub nc_train_ratio: f64,
    pub seed: u64,
    /// Upper bound on worker threads for data-parallel evaluation.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            signature: "h4x2,s4x2,e8".to_string(),
            lr: 3e-3,
            epochs: 200,
            gamma: 1.0,
            view_dim: 16,
            lift: LiftMode::Exp0,
            diffusion_alpha: 0.2,
            sparsify: SparsifyRule::TopK(16),
            fermi_r: 2.0,
            fermi_t: 1.0,
            split: (0.85, 0.05, 0.10),
            nc_train_ratio: 0.6,
            seed: 7,
            threads: 1,
        }
    }
}

impl RunConfig {
    /// Applies one dotted-key assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("{key} = {value:?}: expected {what}"));
        match key {
            "signature" => self.signature = value.to_string(),
            "lr" => self.lr = value.parse().map_err(|_| bad("a number"))?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad("an integer"))?,
            "gamma" => self.gamma = value.parse().map_err(|_| bad("a number"))?,
            "view.dim" => self.view_dim = value.parse().map_err(|_| bad("an integer"))?,
            "lift" => {
                self.lift = match value {
                    "exp0" => LiftMode::Exp0,
                    "rho" => LiftMode::Rho,
                    _ => return Err(bad("exp0 or rho")),
                }
            }
            "diffusion.alpha" => {
                self.diffusion_alpha = value.parse().map_err(|_| bad("a number"))?
            }
            "diffusion.topk" => {
                self.sparsify = SparsifyRule::TopK(value.parse().map_err(|_| bad("an integer"))?)
            }
            "diffusion.threshold" => {
                self.sparsify =
                    SparsifyRule::Threshold(value.parse().map_err(|_| bad("a number"))?)
            }
            "fermi.r" => self.fermi_r = value.parse().map_err(|_| bad("a number"))?,
            "fermi.t" => self.fermi_t = value.parse().map_err(|_| bad("a number"))?,
            "split.train" => self.split.0 = value.parse().map_err(|_| bad("a number"))?,
            "split.val" => self.split.1 = value.parse().map_err(|_| bad("a number"))?,
            "split.test" => self.split.2 = value.parse().map_err(|_| bad("a number"))?,
            "nc.train_ratio" => {
                self.nc_train_ratio = value.parse().map_err(|_| bad("a number"))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("an integer"))?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?} (known: signature, lr, epochs, gamma, view.dim, lift, \
                     diffusion.alpha, diffusion.topk, diffusion.threshold, fermi.r, fermi.t, \
                     split.train, split.val, split.test, nc.train_ratio, seed)"
                )))
            }
        }
        Ok(())
    }

    /// Merges a flat `key = value` file over the current values.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Validates everything at once; the error lists every failure.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = crate::product::parse_signature(&self.signature) {
            problems.push(format!("signature: {e}"));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            problems.push(format!("lr {} must be a nonnegative number", self.lr));
        }
        if self.epochs == 0 {
            problems.push("epochs must be at least 1".to_string());
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            problems.push(format!("gamma {} must be nonnegative", self.gamma));
        }
        if self.view_dim == 0 {
            problems.push("view.dim must be at least 1".to_string());
        }
        if let Err(e) = self.diffusion().validate() {
            problems.push(format!("diffusion: {e}"));
        }
        if let Err(e) = self.fermi().validate() {
            problems.push(format!("fermi: {e}"));
        }
        let (a, b, c) = self.split;
        if a < 0.0 || b < 0.0 || c < 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
            problems.push(format!(
                "split ratios ({a}, {b}, {c}) must be nonnegative and sum to 1"
            ));
        }
        if !(self.nc_train_ratio > 0.0 && self.nc_train_ratio < 1.0) {
            problems.push(format!("nc.train_ratio {} outside (0, 1)", self.nc_train_ratio));
        }
        if self.threads == 0 {
            problems.push("threads must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("\n")))
        }
    }

    pub fn diffusion(&self) -> DiffusionConfig {
        DiffusionConfig { alpha: self.diffusion_alpha, sparsify: self.sparsify }
    }

    pub fn fermi(&self) -> FermiDiracConfig {
        FermiDiracConfig { r: self.fermi_r, t: self.fermi_t }
    }

    pub fn train_config(&self) -> crate::contrastive::TrainConfig {
        crate::contrastive::TrainConfig {
            signature: self.signature.clone(),
            epochs: self.epochs,
            lr: self.lr,
            gamma: self.gamma,
            view_dim: self.view_dim,
            lift: self.lift,
            diffusion: self.diffusion(),
            seed: self.seed,
        }
    }

    pub fn lift_name(&self) -> &'static str {
        match self.lift {
            LiftMode::Exp0 => "exp0",
            LiftMode::Rho => "rho",
        }
    }
}

/// Parses the `MIXCURV_THREADS` cap; absent means 1.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var("MIXCURV_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                Error::Config(format!("MIXCURV_THREADS={v:?} is not a positive integer"))
            })?;
            if n == 0 {
                return Err(Error::Config("MIXCURV_THREADS must be at least 1".into()));
            }
            Ok(n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn file_merge_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# test config\nsignature = h2,e2\nlr = 0.001\ndiffusion.alpha = 0.4\nsplit.train=0.8\nsplit.val=0.1\nsplit.test=0.1\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.merge_file(&path).unwrap();
        assert_eq!(cfg.signature, "h2,e2");
        assert_eq!(cfg.lr, 0.001);
        assert_eq!(cfg.diffusion_alpha, 0.4);
        cfg.set("seed", "99").unwrap();
        assert_eq!(cfg.seed, 99);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = RunConfig::default();
        let err = cfg.set("not.a.key", "1").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut cfg = RunConfig::default();
        cfg.epochs = 0;
        cfg.gamma = -1.0;
        cfg.split = (0.5, 0.1, 0.1);
        cfg.fermi_t = 0.0;
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("epochs"));
        assert!(msg.contains("gamma"));
        assert!(msg.contains("split"));
        assert!(msg.contains("fermi"));
    }
}
