use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::data::SyntheticSpec;
use crate::repr::LossConfig;
use crate::{Error, Result};

/// Full-batch steps on z-scored inputs need a larger step than the bare
/// loss default to train in 200 epochs.
pub const DEFAULT_LEARNING_RATE: f64 = 5e-3;

/// Where the dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DatasetSource {
    Dir(PathBuf),
    /// Generated per run. `seed` pins the data; `None` derives it from the
    /// run seed so every seed sees fresh data.
    Synthetic {
        k: usize,
        n: usize,
        dims: Vec<usize>,
        separation: f64,
        seed: Option<u64>,
    },
}

impl DatasetSource {
    /// `k,n,d1,d2[,...],sep`
    pub fn parse_synthetic(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 4 {
            return Err(Error::invalid(format!("synthetic spec `{s}` needs k,n,d1[,d2...],sep")));
        }
        let k = parse_value(parts[0], "synthetic k")?;
        let n = parse_value(parts[1], "synthetic n")?;
        let separation = parse_value(parts[parts.len() - 1], "synthetic separation")?;
        let dims = parts[2..parts.len() - 1]
            .iter()
            .map(|d| parse_value(d, "synthetic dimension"))
            .collect::<Result<Vec<usize>>>()?;
        Ok(DatasetSource::Synthetic {
            k,
            n,
            dims,
            separation,
            seed: None,
        })
    }

    pub fn synthetic_spec(&self, run_seed: u64) -> Option<SyntheticSpec> {
        match self {
            DatasetSource::Dir(_) => None,
            DatasetSource::Synthetic {
                k,
                n,
                dims,
                separation,
                seed,
            } => Some(SyntheticSpec {
                k: *k,
                n: *n,
                dims: dims.clone(),
                separation: *separation,
                seed: seed.unwrap_or(run_seed),
            }),
        }
    }

    /// Short name used in reports.
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Dir(p) => p
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            DatasetSource::Synthetic {
                k,
                n,
                dims,
                separation,
                ..
            } => {
                let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                format!("synthetic-k{k}-n{n}-d{}-s{separation}", dims.join("x"))
            }
        }
    }
}

/// How the re-represented views are mapped to the shared latent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EncoderKind {
    /// Two trained encoders.
    Trained,
    /// Skip training and use the anchor re-representation as the latent.
    Identity,
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trained" => Ok(EncoderKind::Trained),
            "identity" => Ok(EncoderKind::Identity),
            _ => Err(Error::invalid(format!("encoder must be `trained` or `identity`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub align_rates: Vec<f64>,
    pub missing_rate: f64,
    /// Separate missing rate per view; overrides `missing_rate` and lets the
    /// views end up with different sizes.
    pub view_missing_rates: Option<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub n_anchors: Option<usize>,
    pub radius: Option<f64>,
    pub alpha: f64,
    pub walk_schedule: Option<(usize, usize)>,
    pub loss: LossConfig,
    pub latent: Option<usize>,
    pub encoder: EncoderKind,
    pub sigma: Option<f64>,
    pub ipt: bool,
    pub restarts: usize,
    pub out_dir: PathBuf,
    pub dump_matrices: bool,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource) -> Self {
        ExperimentConfig {
            dataset,
            align_rates: vec![0.3, 0.5, 0.7],
            missing_rate: 0.5,
            view_missing_rates: None,
            seeds: vec![0],
            n_anchors: None,
            radius: None,
            alpha: 0.5,
            walk_schedule: None,
            loss: LossConfig {
                learning_rate: DEFAULT_LEARNING_RATE,
                ..LossConfig::default()
            },
            latent: None,
            encoder: EncoderKind::Trained,
            sigma: None,
            ipt: true,
            restarts: 10,
            out_dir: PathBuf::from("results"),
            dump_matrices: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.align_rates.is_empty() {
            return Err(Error::invalid("at least one align rate is required"));
        }
        if let Some(r) = self.align_rates.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::invalid(format!("align rate {r} outside (0, 1]")));
        }
        if !(self.missing_rate >= 0.0 && self.missing_rate < 1.0) {
            return Err(Error::invalid(format!("missing rate {} outside [0, 1)", self.missing_rate)));
        }
        if let Some(rates) = &self.view_missing_rates {
            if rates.len() != 2 || rates.iter().any(|r| !(*r >= 0.0 && *r < 1.0)) {
                return Err(Error::invalid(format!("view missing rates {rates:?} must be two values in [0, 1)")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        if self.n_anchors == Some(0) {
            return Err(Error::invalid("anchors must be >= 1"));
        }
        if self.radius.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::invalid("radius must be > 0"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be >= 0"));
        }
        if self.walk_schedule.is_some_and(|(w, l)| w == 0 || l == 0) {
            return Err(Error::invalid("walks and walk_length must be >= 1"));
        }
        if self.latent == Some(0) {
            return Err(Error::invalid("latent must be >= 1"));
        }
        if self.sigma.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::invalid("sigma must be > 0"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be >= 1"));
        }
        if let DatasetSource::Synthetic { dims, .. } = &self.dataset {
            if dims.len() != 2 {
                return Err(Error::invalid(format!("the pipeline needs 2 views, synthetic spec has {}", dims.len())));
            }
        }
        self.loss.validate()
    }

    /// Parses a `key = value` file. `#` starts a comment; blank lines are
    /// ignored. Keys are listed in the README.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            file: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|(line, msg)| Error::Parse {
            file: path.to_path_buf(),
            line,
            msg,
        })
    }

    /// Parses config text; relative dataset paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> std::result::Result<Self, (u64, String)> {
        let mut cfg = ExperimentConfig::new(DatasetSource::Synthetic {
            k: 3,
            n: 300,
            dims: vec![10, 15],
            separation: 6.0,
            seed: None,
        });
        let mut data_seed = None;
        let mut walks = None;
        let mut walk_length = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or((line_no, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| (line_no, e.to_string());
            match key {
                "dataset" => {
                    let p = PathBuf::from(value);
                    cfg.dataset = DatasetSource::Dir(if p.is_absolute() { p } else { base.join(p) });
                }
                "synthetic" => cfg.dataset = DatasetSource::parse_synthetic(value).map_err(at)?,
                "data_seed" => data_seed = Some(parse_value(value, key).map_err(at)?),
                "align_rates" => cfg.align_rates = parse_list(value, key).map_err(at)?,
                "missing_rate" => cfg.missing_rate = parse_value(value, key).map_err(at)?,
                "view_missing_rates" => cfg.view_missing_rates = parse_auto_list(value, key).map_err(at)?,
                "seeds" => cfg.seeds = parse_list(value, key).map_err(at)?,
                "anchors" => cfg.n_anchors = parse_auto(value, key).map_err(at)?,
                "radius" => cfg.radius = parse_auto(value, key).map_err(at)?,
                "alpha" => cfg.alpha = parse_value(value, key).map_err(at)?,
                "walks" => walks = parse_auto(value, key).map_err(at)?,
                "walk_length" => walk_length = parse_auto(value, key).map_err(at)?,
                "margin" => cfg.loss.margin = parse_value(value, key).map_err(at)?,
                "a" => cfg.loss.a = parse_value(value, key).map_err(at)?,
                "learning_rate" => cfg.loss.learning_rate = parse_value(value, key).map_err(at)?,
                "epochs" => cfg.loss.epochs = parse_value(value, key).map_err(at)?,
                "neg_ratio" => cfg.loss.neg_ratio = parse_value(value, key).map_err(at)?,
                "latent" => cfg.latent = parse_auto(value, key).map_err(at)?,
                "encoder" => cfg.encoder = value.parse().map_err(at)?,
                "sigma" => cfg.sigma = parse_auto(value, key).map_err(at)?,
                "ipt" => cfg.ipt = parse_value(value, key).map_err(at)?,
                "restarts" => cfg.restarts = parse_value(value, key).map_err(at)?,
                "out" => cfg.out_dir = PathBuf::from(value),
                "dump_matrices" => cfg.dump_matrices = parse_value(value, key).map_err(at)?,
                _ => return Err((line_no, format!("unknown key `{key}`"))),
            }
        }
        match (walks, walk_length) {
            (Some(w), Some(l)) => cfg.walk_schedule = Some((w, l)),
            (None, None) => {}
            _ => return Err((0, "walks and walk_length must be set together".into())),
        }
        if let (Some(s), DatasetSource::Synthetic { seed, .. }) = (data_seed, &mut cfg.dataset) {
            *seed = Some(s);
        }
        Ok(cfg)
    }
}

fn parse_value<T: FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e: T::Err| Error::invalid(format!("bad {what} `{s}`: {e}")))
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    s.split(',').map(|p| parse_value(p, what)).collect()
}

/// `auto` (or empty) leaves the value to its default.
fn parse_auto<T: FromStr>(s: &str, what: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    if s.is_empty() || s == "auto" {
        Ok(None)
    } else {
        parse_value(s, what).map(Some)
    }
}

fn parse_auto_list<T: FromStr>(s: &str, what: &str) -> Result<Option<Vec<T>>>
where
    T::Err: fmt::Display,
{
    if s.is_empty() || s == "auto" {
        Ok(None)
    } else {
        parse_list(s, what).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let text = "\
# sweep
synthetic = 3,90,4,5,6   # three classes
align_rates = 0.5, 0.7
missing_rate = 0.25
seeds = 1,2,3
anchors = auto
epochs = 20
encoder = identity
ipt = false
walks = 4
walk_length = 6
";
        let cfg = ExperimentConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.align_rates, vec![0.5, 0.7]);
        assert_eq!(cfg.missing_rate, 0.25);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.n_anchors, None);
        assert_eq!(cfg.loss.epochs, 20);
        assert_eq!(cfg.encoder, EncoderKind::Identity);
        assert!(!cfg.ipt);
        assert_eq!(cfg.walk_schedule, Some((4, 6)));
        assert_eq!(
            cfg.dataset,
            DatasetSource::Synthetic {
                k: 3,
                n: 90,
                dims: vec![4, 5],
                separation: 6.0,
                seed: None
            }
        );
        cfg.validate().unwrap();
    }

    #[test]
    fn relative_dataset_path() {
        let cfg = ExperimentConfig::parse("dataset = data/two", Path::new("/cfg")).unwrap();
        assert_eq!(cfg.dataset, DatasetSource::Dir(PathBuf::from("/cfg/data/two")));
        assert_eq!(cfg.dataset.name(), "two");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let (line, msg) = ExperimentConfig::parse("seeds = 1\nbogus = 2\n", Path::new(".")).unwrap_err();
        assert_eq!(line, 2);
        assert!(msg.contains("bogus"));
        let (line, _) = ExperimentConfig::parse("\n\nmissing_rate = lots", Path::new(".")).unwrap_err();
        assert_eq!(line, 3);
        assert!(ExperimentConfig::parse("no equals sign", Path::new(".")).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::parse("", Path::new(".")).unwrap();
        cfg.validate().unwrap();
        cfg.align_rates = vec![0.0];
        assert!(cfg.validate().is_err());
        cfg.align_rates = vec![1.0];
        cfg.missing_rate = 1.0;
        assert!(cfg.validate().is_err());
        cfg.missing_rate = 0.0;
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
    }
}
