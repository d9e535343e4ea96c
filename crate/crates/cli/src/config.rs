use std::path::Path;

use anyhow::Context;
use gamma_damage_core::densities::{Hooke, Limit, RegimeParams, Sym2};
use gamma_damage_core::fem::SolverOptions;
use gamma_damage_core::mesh::Point2;
use gamma_damage_core::recovery::{LaminationWindow, PiecewiseConstant, PolynomialField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::regime::ScalingLaw;

pub fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Target displacement of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Affine { xi: Sym2 },
    Polynomial(PolynomialField),
    Step { jump: [f64; 2] },
    PiecewiseConstant(PiecewiseConstant),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiInit {
    #[default]
    Recovery,
    Sound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltMinConfig {
    #[serde(default)]
    pub init: ChiInit,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
}

fn default_max_iters() -> usize {
    50
}

fn default_energy_tol() -> f64 {
    1e-10
}

fn default_omega_factor() -> f64 {
    6.0
}

fn default_max_columns() -> usize {
    64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Full,
    Periods(usize),
}

impl Default for Window {
    fn default() -> Self {
        Window::Periods(1)
    }
}

impl From<Window> for LaminationWindow {
    fn from(w: Window) -> Self {
        match w {
            Window::Full => LaminationWindow::Full,
            Window::Periods(k) => LaminationWindow::Periods(k),
        }
    }
}

/// Configuration of `sweep` and `recover`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kappa: f64,
    pub theta0_deg: f64,
    #[serde(default = "default_omega_factor")]
    pub omega_factor: f64,
    pub a0: Hooke,
    pub a1: Hooke,
    pub law: ScalingLaw,
    pub target: Target,
    #[serde(default = "yes")]
    pub recovery: bool,
    #[serde(default)]
    pub altmin: Option<AltMinConfig>,
    #[serde(default)]
    pub window: Window,
    #[serde(default = "default_max_columns")]
    pub max_columns: usize,
}

fn yes() -> bool {
    true
}

impl SweepConfig {
    pub fn theta0(&self) -> f64 {
        self.theta0_deg.to_radians()
    }
}

/// Explicit ε-level parameters for `solve`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub kappa: f64,
    pub eps: f64,
    pub eta: f64,
    pub h: f64,
    #[serde(default = "default_omega_factor")]
    pub omega_factor: f64,
    pub theta0_deg: f64,
    pub alpha: Limit,
    pub beta: Limit,
}

impl From<ParamsConfig> for RegimeParams {
    fn from(c: ParamsConfig) -> Self {
        RegimeParams {
            kappa: c.kappa,
            eps: c.eps,
            eta: c.eta,
            h: c.h,
            omega_factor: c.omega_factor,
            theta0: c.theta0_deg.to_radians(),
            alpha: c.alpha,
            beta: c.beta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Uniform {
        n: usize,
        #[serde(default)]
        refine: usize,
    },
    Stripe {
        b: [f64; 2],
        damaged: f64,
        sound: f64,
        cross: f64,
    },
    DoubleStripe {
        b: [f64; 2],
        damaged: [f64; 2],
        sound: [f64; 2],
        cross: f64,
    },
    JumpStrip {
        band_halfwidth: f64,
        layer_height: f64,
        n_columns: usize,
        row_height: f64,
    },
    Cohesive {
        segment: [Point2; 2],
        amplitude: f64,
        h: f64,
        theta_deg: f64,
        theta0_deg: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshClassConfig {
    pub h: f64,
    #[serde(default = "default_omega_factor")]
    pub omega_factor: f64,
    pub theta0_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshGenConfig {
    pub generator: Generator,
    #[serde(default)]
    pub validate: Option<MeshClassConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshValidateConfig {
    pub mesh: String,
    #[serde(flatten)]
    pub class: MeshClassConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshSource {
    File(String),
    Generator(Generator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Affine { xi: Sym2 },
    Step { jump: [f64; 2] },
    Polynomial(PolynomialField),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveInit {
    #[default]
    Sound,
    Damaged,
    Tags,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub mesh: MeshSource,
    pub a0: Hooke,
    pub a1: Hooke,
    pub params: ParamsConfig,
    pub dirichlet: Boundary,
    #[serde(default)]
    pub chi_init: SolveInit,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    Closed,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub a0: Hooke,
    pub a1: Hooke,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta0_deg: f64,
    pub mode: DensityMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub xi: Vec<Sym2>,
    #[serde(default)]
    pub t: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnedConfig {
    pub xi: f64,
    pub a0: f64,
    pub a1: f64,
    pub kappa: f64,
    pub law: ScalingLaw,
    #[serde(default = "default_omega_factor")]
    pub omega_factor: f64,
    #[serde(default = "default_intervals")]
    pub intervals: usize,
}

fn default_intervals() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    pub csv: String,
    #[serde(default)]
    pub title: Option<String>,
}
