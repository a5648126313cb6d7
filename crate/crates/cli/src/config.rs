//! Experiment configuration: one TOML file per experiment, every key
//! optional, defaults matching the reference study (γ = 20 per km, 30 km
//! threshold windows shrinking to 10 km for small rγ, 5 km for stretch).

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use streetperc::estimators::{FitMethod, DEFAULT_CROSSING_PROBABILITY};
use streetperc::TessellationKind;

pub const DEFAULT_GAMMA: f64 = 20.0;
pub const DEFAULT_STRETCH_WINDOW: f64 = 5.0;
pub const DEFAULT_TABLE_R_GAMMA: [f64; 11] =
    [0.3, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5, 9.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Threshold,
    CrossingCurves,
    Theta,
    Stretch,
    Table1,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Threshold => "threshold",
            Experiment::CrossingCurves => "crossing-curves",
            Experiment::Theta => "theta",
            Experiment::Stretch => "stretch",
            Experiment::Table1 => "table1",
        })
    }
}

/// Raw config as written by the user. After [`ExperimentConfig::resolve`]
/// every field the experiment uses is filled in, and that resolved form is
/// what the manifest records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub kind: Option<TessellationKind>,
    pub kinds: Option<Vec<TessellationKind>>,
    /// Street length intensity, per km.
    pub gamma: Option<f64>,
    /// Connection radius, km.
    pub r: Option<f64>,
    /// Dimensionless radius `r·γ`.
    pub r_gamma: Option<f64>,
    /// Table rows (`table1` only).
    pub r_gamma_values: Option<Vec<f64>>,
    /// Device intensities, per km.
    pub lambda: Option<Vec<f64>>,
    /// Dimensionless intensities `λ/γ`.
    pub lambda_over_gamma: Option<Vec<f64>>,
    /// Torus side, km.
    pub window: Option<f64>,
    /// Torus sides compared by `crossing-curves`.
    pub windows: Option<Vec<f64>>,
    /// Runs per λ on a fixed grid, and fine-stage runs of a scan.
    pub runs: Option<usize>,
    pub coarse_points: Option<usize>,
    pub coarse_runs: Option<usize>,
    pub fine_points: Option<usize>,
    pub fit: Option<FitMethod>,
    pub p_cross: Option<f64>,
    /// Tessellations per θ experiment.
    pub n: Option<usize>,
    /// Origin placements per tessellation.
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// Device budget per θ run, in expected devices at the largest λ.
    pub budget_factor: Option<f64>,
    /// Stored θ samples to replay instead of simulating.
    pub samples: Option<PathBuf>,
    pub simulations: Option<usize>,
    /// Stretch pair filter, km.
    pub min_dist: Option<f64>,
    pub plots: Option<bool>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Checks the config against `experiment` and fills in every default it
    /// uses. Errors name the offending field.
    pub fn resolve(&self, experiment: Experiment) -> Result<Resolved> {
        if let Some(e) = self.experiment {
            if e != experiment {
                bail!("config field `experiment`: file is for `{e}`, not `{experiment}`");
            }
        }
        let gamma = positive("gamma", self.gamma.unwrap_or(DEFAULT_GAMMA))?;
        let kinds = self.kinds(experiment)?;
        let mut c = ExperimentConfig {
            experiment: Some(experiment),
            seed: Some(self.seed.unwrap_or(1)),
            output: self.output.clone(),
            kinds: Some(kinds),
            gamma: Some(gamma),
            plots: Some(self.plots.unwrap_or(true)),
            ..Default::default()
        };
        let is = |e: &[Experiment]| e.contains(&experiment);
        self.forbid(&[
            (
                "r_gamma_values",
                self.r_gamma_values.is_some() && !is(&[Experiment::Table1]),
            ),
            (
                "windows",
                self.windows.is_some() && !is(&[Experiment::CrossingCurves]),
            ),
            (
                "window",
                self.window.is_some() && is(&[Experiment::CrossingCurves]),
            ),
            (
                "coarse_points",
                self.coarse_points.is_some() && !is(&[Experiment::Threshold, Experiment::Table1]),
            ),
            (
                "coarse_runs",
                self.coarse_runs.is_some() && !is(&[Experiment::Threshold, Experiment::Table1]),
            ),
            (
                "fine_points",
                self.fine_points.is_some() && !is(&[Experiment::Threshold, Experiment::Table1]),
            ),
            (
                "runs",
                self.runs.is_some() && is(&[Experiment::Theta, Experiment::Stretch]),
            ),
            (
                "fit",
                self.fit.is_some() && is(&[Experiment::Theta, Experiment::Stretch]),
            ),
            (
                "p_cross",
                self.p_cross.is_some() && is(&[Experiment::Theta, Experiment::Stretch]),
            ),
            ("n", self.n.is_some() && !is(&[Experiment::Theta])),
            ("M", self.m.is_some() && !is(&[Experiment::Theta])),
            (
                "budget_factor",
                self.budget_factor.is_some() && !is(&[Experiment::Theta]),
            ),
            (
                "samples",
                self.samples.is_some() && !is(&[Experiment::Theta]),
            ),
            (
                "simulations",
                self.simulations.is_some() && !is(&[Experiment::Stretch]),
            ),
            (
                "min_dist",
                self.min_dist.is_some() && !is(&[Experiment::Stretch]),
            ),
            ("lambda", self.lambda.is_some() && is(&[Experiment::Table1])),
            (
                "lambda_over_gamma",
                self.lambda_over_gamma.is_some() && is(&[Experiment::Table1]),
            ),
        ])?;

        if experiment == Experiment::Table1 {
            if self.r.is_some() || self.r_gamma.is_some() {
                bail!("config field `r` / `r_gamma`: table1 takes its rows from `r_gamma_values`");
            }
            let rows = self
                .r_gamma_values
                .clone()
                .unwrap_or_else(|| DEFAULT_TABLE_R_GAMMA.to_vec());
            nonempty_positive("r_gamma_values", &rows)?;
            c.r_gamma_values = Some(rows);
            if let Some(w) = self.window {
                c.window = Some(positive("window", w)?);
            }
        } else {
            let r = self.radius(gamma)?;
            c.r = Some(r);
        }

        if let Some(grid) = self.lambda_grid(gamma)? {
            c.lambda = Some(grid);
        }

        let r_gamma = c.r.map_or(f64::NAN, |r| r * gamma);
        match experiment {
            Experiment::Threshold | Experiment::Table1 => {
                if experiment == Experiment::Threshold {
                    c.window = Some(positive(
                        "window",
                        self.window.unwrap_or_else(|| default_window(r_gamma)),
                    )?);
                }
                c.runs = Some(at_least("runs", self.runs.unwrap_or(50), 1)?);
                c.fit = Some(self.fit.unwrap_or_default());
                c.p_cross = Some(probability("p_cross", self.p_cross)?);
                if c.lambda.is_none() {
                    c.coarse_points = Some(at_least(
                        "coarse_points",
                        self.coarse_points.unwrap_or(8),
                        2,
                    )?);
                    c.coarse_runs =
                        Some(at_least("coarse_runs", self.coarse_runs.unwrap_or(20), 1)?);
                    c.fine_points =
                        Some(at_least("fine_points", self.fine_points.unwrap_or(10), 2)?);
                } else {
                    for (name, set) in [
                        ("coarse_points", self.coarse_points.is_some()),
                        ("coarse_runs", self.coarse_runs.is_some()),
                        ("fine_points", self.fine_points.is_some()),
                    ] {
                        if set {
                            bail!("config field `{name}`: only used by the automatic scan, which a fixed λ grid replaces");
                        }
                    }
                }
            }
            Experiment::CrossingCurves => {
                let windows = self
                    .windows
                    .clone()
                    .unwrap_or_else(|| vec![5.0, 10.0, 20.0]);
                nonempty_positive("windows", &windows)?;
                c.windows = Some(windows);
                c.runs = Some(at_least("runs", self.runs.unwrap_or(50), 1)?);
                c.fit = Some(self.fit.unwrap_or_default());
                c.p_cross = Some(probability("p_cross", self.p_cross)?);
                if c.lambda.is_none() {
                    bail!("config field `lambda` / `lambda_over_gamma`: crossing-curves needs a λ grid");
                }
            }
            Experiment::Theta => {
                c.window = Some(positive(
                    "window",
                    self.window.unwrap_or_else(|| default_window(r_gamma)),
                )?);
                if c.lambda.is_none() {
                    bail!("config field `lambda` / `lambda_over_gamma`: theta needs a λ grid");
                }
                if let Some(samples) = &self.samples {
                    if c.kinds.as_ref().is_some_and(|k| k.len() != 1) {
                        bail!("config field `samples`: replay takes exactly one `kind`");
                    }
                    c.samples = Some(samples.clone());
                } else {
                    c.n = Some(at_least("n", self.n.unwrap_or(10), 1)?);
                    c.m = Some(at_least("M", self.m.unwrap_or(30), 1)?);
                    c.budget_factor = Some(positive(
                        "budget_factor",
                        self.budget_factor.unwrap_or(50.0),
                    )?);
                }
            }
            Experiment::Stretch => {
                c.window = Some(positive(
                    "window",
                    self.window.unwrap_or(DEFAULT_STRETCH_WINDOW),
                )?);
                if c.lambda.is_none() {
                    bail!("config field `lambda` / `lambda_over_gamma`: stretch needs a λ grid");
                }
                c.simulations = Some(at_least("simulations", self.simulations.unwrap_or(100), 1)?);
                c.min_dist = Some(positive("min_dist", self.min_dist.unwrap_or(4.0))?);
            }
        }
        Ok(Resolved {
            experiment,
            config: c,
        })
    }

    fn forbid(&self, checks: &[(&str, bool)]) -> Result<()> {
        for &(name, bad) in checks {
            if bad {
                bail!("config field `{name}`: not used by this experiment");
            }
        }
        Ok(())
    }

    fn kinds(&self, experiment: Experiment) -> Result<Vec<TessellationKind>> {
        let kinds = match (self.kind, &self.kinds) {
            (Some(_), Some(_)) => bail!("config field `kind` / `kinds`: give at most one of them"),
            (Some(k), None) => vec![k],
            (None, Some(ks)) => ks.clone(),
            (None, None) if experiment == Experiment::Table1 => TessellationKind::ALL.to_vec(),
            (None, None) => vec![TessellationKind::Pvt],
        };
        if kinds.is_empty() {
            bail!("config field `kinds`: must not be empty");
        }
        for (i, k) in kinds.iter().enumerate() {
            if kinds[..i].contains(k) {
                bail!("config field `kinds`: {k} listed twice");
            }
        }
        Ok(kinds)
    }

    fn radius(&self, gamma: f64) -> Result<f64> {
        match (self.r, self.r_gamma) {
            (Some(r), None) => positive("r", r),
            (None, Some(rg)) => Ok(positive("r_gamma", rg)? / gamma),
            _ => bail!("config field `r` / `r_gamma`: give exactly one of them"),
        }
    }

    fn lambda_grid(&self, gamma: f64) -> Result<Option<Vec<f64>>> {
        let (name, grid, scale) = match (&self.lambda, &self.lambda_over_gamma) {
            (Some(_), Some(_)) => {
                bail!("config field `lambda` / `lambda_over_gamma`: give at most one of them")
            }
            (Some(g), None) => ("lambda", g, 1.0),
            (None, Some(g)) => ("lambda_over_gamma", g, gamma),
            (None, None) => return Ok(None),
        };
        if grid.is_empty() {
            bail!("config field `{name}`: grid must not be empty");
        }
        if let Some(x) = grid.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            bail!("config field `{name}`: values must be finite and >= 0, got {x}");
        }
        Ok(Some(grid.iter().map(|x| x * scale).collect()))
    }

    pub fn kind_list(&self) -> &[TessellationKind] {
        self.kinds.as_deref().unwrap_or(&[])
    }
}

/// A config checked for one experiment, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
}

impl Resolved {
    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(1)
    }

    pub fn gamma(&self) -> f64 {
        self.config.gamma.unwrap_or(DEFAULT_GAMMA)
    }

    /// Connection radius; absent for `table1`, whose rows set it.
    pub fn r(&self) -> Option<f64> {
        self.config.r
    }

    pub fn lambdas(&self) -> &[f64] {
        self.config.lambda.as_deref().unwrap_or(&[])
    }
}

/// Torus side for threshold-type experiments: 10 km for rγ < 1, 15 km for
/// rγ < 2, 30 km otherwise.
pub fn default_window(r_gamma: f64) -> f64 {
    if r_gamma < 1.0 {
        10.0
    } else if r_gamma < 2.0 {
        15.0
    } else {
        30.0
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        bail!("config field `{name}`: must be positive, got {x}")
    }
}

fn at_least(name: &str, x: usize, min: usize) -> Result<usize> {
    if x >= min {
        Ok(x)
    } else {
        bail!("config field `{name}`: must be at least {min}, got {x}")
    }
}

fn probability(name: &str, p: Option<f64>) -> Result<f64> {
    let p = p.unwrap_or(DEFAULT_CROSSING_PROBABILITY);
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        bail!("config field `{name}`: must lie in (0, 1), got {p}")
    }
}

fn nonempty_positive(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        bail!("config field `{name}`: must not be empty");
    }
    for &x in xs {
        positive(name, x)?;
    }
    Ok(())
}
