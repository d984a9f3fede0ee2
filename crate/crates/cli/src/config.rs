//! TOML run configuration. Every section is optional; unknown keys are
//! rejected with a suggestion.

use std::path::Path;

use serde::{Deserialize, Serialize};
use slipflow_core::linear::BcKind;
use slipflow_core::model::{FlowParams, RegimeConstants};
use slipflow_core::nonlinear::NonlinearConfig;
use slipflow_core::norms::{EstimateId, ModeShape, SlipRule};

use crate::CliError;

fn default_grid() -> usize {
    48
}
fn default_eps1() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slip: Option<f64>,
    /// M for the mode solvers and the nonlinear system
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_eps1")]
    pub eps1: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub linear: LinearSection,
    #[serde(default)]
    pub swirl: SwirlSection,
    #[serde(default)]
    pub decompose: DecomposeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub nonlinear: NonlinearSection,
    #[serde(default)]
    pub inequalities: InequalitySection,
    #[serde(default)]
    pub specfun: SpecfunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallCondition {
    Navier,
    Slip,
}

impl From<WallCondition> for BcKind {
    fn from(w: WallCondition) -> Self {
        match w {
            WallCondition::Navier => BcKind::Navier,
            WallCondition::Slip => BcKind::Slip,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSection {
    pub n: i64,
    pub bc: WallCondition,
    /// monomial coefficients of F^r and F^z
    pub fr: Vec<f64>,
    pub fz: Vec<f64>,
    pub residual_tolerance: f64,
}

impl Default for LinearSection {
    fn default() -> Self {
        Self { n: 1, bc: WallCondition::Navier, fr: vec![1.0, 0.0, -1.0], fz: vec![0.0, 0.0, 1.0], residual_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwirlSection {
    pub n: i64,
    pub ftheta: Vec<f64>,
    pub residual_tolerance: f64,
}

impl Default for SwirlSection {
    fn default() -> Self {
        Self { n: 1, ftheta: vec![0.0, 1.0, 0.0, -1.0], residual_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    pub n: i64,
    pub fr: Vec<f64>,
    pub fz: Vec<f64>,
    pub tolerance: f64,
}

impl Default for DecomposeSection {
    fn default() -> Self {
        Self { n: 1, fr: vec![1.0, 0.0, -1.0], fz: vec![0.0, 0.0, 1.0], tolerance: 1e-6 }
    }
}

fn smooth_mode(n: i64) -> ModeShape {
    ModeShape { n, fr: vec![1.0, 0.0, -1.0], fz: vec![0.0, 0.0, 1.0], ftheta: vec![0.0, 1.0, 0.0, -1.0] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRun {
    pub estimate: String,
    #[serde(default = "default_slips")]
    pub slips: Vec<SlipRule>,
    #[serde(default = "default_modes")]
    pub modes: Vec<ModeShape>,
}

fn default_slips() -> Vec<SlipRule> {
    vec![SlipRule::Fixed { value: 0.0 }]
}
fn default_modes() -> Vec<ModeShape> {
    vec![smooth_mode(1)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub fluxes: Vec<f64>,
    pub grid_size: usize,
    pub slack: f64,
    pub spread_bound: f64,
    pub resolve_family: bool,
    pub runs: Vec<SweepRun>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let run = |id: &str, slips: Vec<SlipRule>, n: i64| SweepRun { estimate: id.into(), slips, modes: vec![smooth_mode(n)] };
        Self {
            fluxes: vec![1e3, 1e4, 1e5, 1e6],
            grid_size: 192,
            slack: 0.15,
            spread_bound: 50.0,
            resolve_family: true,
            runs: vec![
                run("case3-13", default_slips(), 1),
                run("6-0", vec![SlipRule::FluxScaled { factor: 1.0, power: 1.0 / 3.0 }], 1),
                run("swirl-36", default_slips(), 1),
                run("B-1", default_slips(), 0),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearSection {
    pub truncation: usize,
    /// defaults to the top-level grid_size
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
    pub forcing: Vec<ModeShape>,
    /// rescale the forcing to this ‖F‖
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forcing_norm: Option<f64>,
    /// rescale the forcing to the default smallness threshold instead
    pub scale_to_threshold: bool,
    pub residual_bound: f64,
    pub uniqueness: bool,
    /// H^{3/2} surrogate of the second start's offset; default Φ^{1/64}/10
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
    pub uniqueness_bound: f64,
}

impl Default for NonlinearSection {
    fn default() -> Self {
        let c = NonlinearConfig::default();
        Self {
            truncation: c.truncation,
            grid_size: None,
            tolerance: c.tolerance,
            max_iterations: c.max_iterations,
            relaxation: c.relaxation,
            forcing: Vec::new(),
            forcing_norm: None,
            scale_to_threshold: false,
            residual_bound: 1e-6,
            uniqueness: false,
            perturbation: None,
            uniqueness_bound: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalitySection {
    pub samples: usize,
    pub grid_size: usize,
}

impl Default for InequalitySection {
    fn default() -> Self {
        Self { samples: 100, grid_size: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialFunction {
    BesselI0,
    BesselI1,
    AiryAi,
    CutoffChi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecfunSection {
    pub function: SpecialFunction,
    /// [re, im] pairs; real functions require im = 0
    pub points: Vec<[f64; 2]>,
}

impl Default for SpecfunSection {
    fn default() -> Self {
        Self { function: SpecialFunction::BesselI1, points: vec![[0.5, 0.0], [1.0, 0.0], [5.0, 0.0], [20.0, 0.0]] }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::usage(msg)
}

fn field(name: &str, ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(config_error(format!("`{name}`: {msg}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_error(with_suggestion(e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError { message: format!("{}: {}", path.display(), e.message), ..e })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(f) = self.flux {
            field("flux", f.is_finite() && f > 0.0, &format!("must be finite and > 0, got {f}"))?;
        }
        if let Some(a) = self.slip {
            field("slip", a.is_finite() && a >= 0.0, &format!("must be finite and >= 0, got {a}"))?;
        }
        field("grid_size", self.grid_size >= 4, "must be >= 4")?;
        field("eps1", self.eps1 > 0.0 && self.eps1 < 1.0, "must lie in (0, 1)")?;
        field("delta", self.delta > 0.0 && self.delta < 1.0, "must lie in (0, 1)")?;
        let tol = |x: f64| x > 0.0 && x.is_finite();
        field("linear.residual_tolerance", tol(self.linear.residual_tolerance), "must be > 0")?;
        field("swirl.residual_tolerance", tol(self.swirl.residual_tolerance), "must be > 0")?;
        field("decompose.tolerance", tol(self.decompose.tolerance), "must be > 0")?;
        field("decompose.n", self.decompose.n != 0, "the decomposition needs n != 0")?;
        let s = &self.sweep;
        field("sweep.grid_size", s.grid_size >= 4, "must be >= 4")?;
        field("sweep.fluxes", s.fluxes.iter().all(|f| f.is_finite() && *f > 0.0), "entries must be finite and > 0")?;
        for (i, run) in s.runs.iter().enumerate() {
            run.estimate.parse::<EstimateId>().map_err(|e| config_error(format!("`sweep.runs[{i}].estimate`: {e}")))?;
            field(&format!("sweep.runs[{i}].slips"), !run.slips.is_empty(), "must not be empty")?;
            field(&format!("sweep.runs[{i}].modes"), !run.modes.is_empty(), "must not be empty")?;
        }
        let n = &self.nonlinear;
        self.nonlinear_config().validate().map_err(|e| config_error(format!("`nonlinear`: {e}")))?;
        for (i, m) in n.forcing.iter().enumerate() {
            field(
                &format!("nonlinear.forcing[{i}].n"),
                m.n >= 0 && m.n as usize <= n.truncation,
                &format!("must lie in 0..={}", n.truncation),
            )?;
        }
        if let Some(v) = n.forcing_norm {
            field("nonlinear.forcing_norm", v.is_finite() && v >= 0.0, "must be finite and >= 0")?;
        }
        if let Some(v) = n.perturbation {
            field("nonlinear.perturbation", v.is_finite() && v >= 0.0, "must be finite and >= 0")?;
        }
        field("nonlinear.residual_bound", tol(n.residual_bound), "must be > 0")?;
        field("nonlinear.uniqueness_bound", tol(n.uniqueness_bound), "must be > 0")?;
        field("inequalities.samples", self.inequalities.samples >= 50, "must be >= 50")?;
        field("inequalities.grid_size", self.inequalities.grid_size >= 18, "must be >= 18")?;
        field("specfun.points", self.specfun.points.iter().flatten().all(|v| v.is_finite()), "entries must be finite")?;
        Ok(())
    }

    pub fn regime(&self) -> RegimeConstants {
        RegimeConstants { eps1: self.eps1, delta: self.delta, ..Default::default() }
    }

    /// Flow parameters; flux and slip are required by the solving commands.
    pub fn params(&self) -> Result<FlowParams, CliError> {
        let flux = self.flux.ok_or_else(|| config_error("missing key `flux`"))?;
        let slip = self.slip.ok_or_else(|| config_error("missing key `slip`"))?;
        FlowParams::new(flux, slip).map_err(CliError::from)
    }

    pub fn nonlinear_config(&self) -> NonlinearConfig {
        let n = &self.nonlinear;
        NonlinearConfig {
            truncation: n.truncation,
            grid_size: n.grid_size.unwrap_or(self.grid_size),
            tolerance: n.tolerance,
            max_iterations: n.max_iterations,
            relaxation: n.relaxation,
        }
    }
}

/// Appends "did you mean" to serde's unknown-field message.
fn with_suggestion(msg: &str) -> String {
    let Some(rest) = msg.strip_prefix("unknown field `") else {
        return msg.to_string();
    };
    let Some((bad, tail)) = rest.split_once('`') else {
        return msg.to_string();
    };
    let candidates: Vec<&str> = tail.split('`').skip(1).step_by(2).collect();
    let best = candidates
        .iter()
        .map(|c| (strsim::levenshtein(bad, c), *c))
        .filter(|(d, c)| *d <= 2.max(c.len() / 3))
        .min();
    match best {
        Some((_, c)) => format!("unknown key `{bad}`, did you mean `{c}`? ({msg})"),
        None => format!("unknown key `{bad}` ({msg})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = RunConfig::parse("flux = 1e4\nslip = 0").unwrap();
        assert_eq!(c.grid_size, 48);
        assert_eq!((c.eps1, c.delta, c.seed), (0.1, 0.1, 0));
        assert_eq!(c.params().unwrap().flux, 1e4);
    }

    #[test]
    fn negative_flux_names_the_field() {
        let e = RunConfig::parse("flux = -1\nslip = 0").unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("`flux`"), "{}", e.message);
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let e = RunConfig::parse("fluxx = 1e4").unwrap_err();
        assert!(e.message.contains("did you mean `flux`"), "{}", e.message);
        let e = RunConfig::parse("[sweep]\nflux = [1.0]").unwrap_err();
        assert!(e.message.contains("did you mean `fluxes`"), "{}", e.message);
        let e = RunConfig::parse("[nonlinear]\nzzzzzzzz = 1").unwrap_err();
        assert!(!e.message.contains("did you mean"), "{}", e.message);
    }

    #[test]
    fn estimate_ids_are_checked() {
        let e = RunConfig::parse("[[sweep.runs]]\nestimate = \"case9\"").unwrap_err();
        assert!(e.message.contains("sweep.runs[0].estimate"), "{}", e.message);
    }

    #[test]
    fn forcing_and_slip_rules_parse() {
        let text = r#"
flux = 1e3
slip = 1
[[nonlinear.forcing]]
n = 1
fr = [1.0, 0.0, -1.0]
[[sweep.runs]]
estimate = "6-0"
slips = [{ rule = "flux_scaled", factor = 1.0, power = 0.3333333333333333 }]
"#;
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.nonlinear.forcing[0].fz, Vec::<f64>::new());
        assert!(matches!(c.sweep.runs[0].slips[0], SlipRule::FluxScaled { .. }));
        let e = RunConfig::parse("[[nonlinear.forcing]]\nn = 40").unwrap_err();
        assert!(e.message.contains("nonlinear.forcing[0].n"));
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::parse("flux = 1e4\nslip = 2").unwrap();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}
