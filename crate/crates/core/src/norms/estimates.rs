//! Dimensionless ratios LHS / (scaling · RHS) for the mode and field
//! estimates.

use std::fmt;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bundle::{sobolev_squares, surrogate_from_squares, weighted_norms};
use crate::error::{Error, Result};
use crate::linear::{
    curl_forcing, BcKind, ModeRef, StreamMode, StreamSolver, SwirlMode, SwirlSolver,
};
use crate::model::{classify_with, FlowParams, RadialField, RegimeConstants, RegimeTag};

/// Identifier of a checked estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimateId {
    B1,
    Case3_13,
    Case3_15,
    Case4_13,
    Case4_15,
    Highf1,
    Highf2,
    E6_0,
    E6_1,
    E6_2,
    E6_3,
    Swirl28,
    Swirl36,
    Swirl37,
    E2_1_0,
    B6,
    E7_1,
    E8_1H32,
    E8_1H2,
    ThmH32,
    ThmH2,
}

const ALL: [(EstimateId, &str); 21] = [
    (EstimateId::B1, "B-1"),
    (EstimateId::Case3_13, "case3-13"),
    (EstimateId::Case3_15, "case3-15"),
    (EstimateId::Case4_13, "case4-13"),
    (EstimateId::Case4_15, "case4-15"),
    (EstimateId::Highf1, "highf1"),
    (EstimateId::Highf2, "highf2"),
    (EstimateId::E6_0, "6-0"),
    (EstimateId::E6_1, "6-1"),
    (EstimateId::E6_2, "6-2"),
    (EstimateId::E6_3, "6-3"),
    (EstimateId::Swirl28, "swirl-28"),
    (EstimateId::Swirl36, "swirl-36"),
    (EstimateId::Swirl37, "swirl-37"),
    (EstimateId::E2_1_0, "2-1-0"),
    (EstimateId::B6, "B6"),
    (EstimateId::E7_1, "7-1"),
    (EstimateId::E8_1H32, "8-1-h32"),
    (EstimateId::E8_1H2, "8-1-h2"),
    (EstimateId::ThmH32, "thm-h32"),
    (EstimateId::ThmH2, "thm-h2"),
];

/// What an estimate is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// Weighted integrals of one stream mode against ∫|F*ₙ|²r.
    StreamMode,
    /// Weighted integrals of one swirl mode against ∫|Fₙ^θ|²r.
    SwirlMode,
    /// Sobolev surrogate of a multi-mode field against ‖F‖, not squared.
    Field,
}

impl EstimateId {
    pub fn all() -> impl Iterator<Item = EstimateId> {
        ALL.iter().map(|(id, _)| *id)
    }

    pub fn as_str(&self) -> &'static str {
        ALL.iter().find(|(id, _)| id == self).map(|(_, s)| *s).unwrap_or("?")
    }

    pub fn kind(&self) -> EstimateKind {
        use EstimateId::*;
        match self {
            Swirl28 | Swirl36 | Swirl37 => EstimateKind::SwirlMode,
            E2_1_0 | B6 | E7_1 | E8_1H32 | E8_1H2 | ThmH32 | ThmH2 => EstimateKind::Field,
            _ => EstimateKind::StreamMode,
        }
    }

    /// Key of the left-hand side in a [`super::NormBundle`].
    fn bundle_key(&self) -> &'static str {
        use EstimateId::*;
        match self {
            Case4_13 | E6_1 => "case3-13",
            Case4_15 => "case3-15",
            other => other.as_str(),
        }
    }

    /// Field estimates: Sobolev index and whether the swirl part is left out
    /// (estimates on v* and F* = F^r e_r + F^z e_z).
    fn field_norm(&self) -> Option<(f64, bool)> {
        use EstimateId::*;
        match self {
            E2_1_0 | B6 | E7_1 | E8_1H2 => Some((2.0, true)),
            E8_1H32 => Some((1.5, true)),
            ThmH32 => Some((1.5, false)),
            ThmH2 => Some((2.0, false)),
            _ => None,
        }
    }

    /// Factor multiplying the data term on the right-hand side. Mode
    /// estimates scale ∫|F|²r, field estimates scale ‖F‖.
    pub fn scaling(&self, params: &FlowParams, n: i64) -> f64 {
        use EstimateId::*;
        let s = params.flux * n.unsigned_abs() as f64;
        let an = n.unsigned_abs() as f64;
        match self {
            Case3_13 | Case4_13 | E6_1 | Swirl36 => s.powf(-4.0 / 3.0),
            Highf1 | Highf2 => an.powi(-2),
            E6_0 => s.powf(-5.0 / 3.0),
            E6_2 | Swirl37 => s.powf(-2.0 / 3.0),
            E6_3 => s.powf(-0.5),
            E2_1_0 => 1.0 + params.flux.powf(1.5),
            E8_1H2 => params.flux.powf(0.25),
            ThmH2 => 1.0 + params.flux.powf(0.25),
            B1 | Case3_15 | Case4_15 | Swirl28 | B6 | E7_1 | E8_1H32 | ThmH32 => 1.0,
        }
    }

    /// Large-Φ exponent of the scaling at fixed n and α-rule.
    pub fn target_exponent(&self) -> f64 {
        use EstimateId::*;
        match self {
            Case3_13 | Case4_13 | E6_1 | Swirl36 => -4.0 / 3.0,
            E6_0 => -5.0 / 3.0,
            E6_2 | Swirl37 => -2.0 / 3.0,
            E6_3 => -0.5,
            E2_1_0 => 1.5,
            E8_1H2 | ThmH2 => 0.25,
            B1 | Case3_15 | Case4_15 | Highf1 | Highf2 | Swirl28 | B6 | E7_1 | E8_1H32 | ThmH32 => 0.0,
        }
    }

    /// Whether the estimate applies to a mode in `regime`.
    pub fn admits(&self, regime: RegimeTag) -> bool {
        use EstimateId::*;
        use RegimeTag::*;
        match self {
            B1 | B6 => regime == ZeroMode,
            Case3_13 | Case3_15 => regime == Z1SmallSlip,
            Case4_13 | Case4_15 => regime == Z2LargeSlip,
            E6_0 | E6_1 | E6_2 | E6_3 | E8_1H32 | E8_1H2 => regime == Z3IntermediateSlip,
            E7_1 => matches!(regime, Z1SmallSlip | Z2LargeSlip),
            Highf1 | Highf2 => regime == HighFrequency,
            Swirl28 | Swirl36 | Swirl37 => regime != ZeroMode,
            E2_1_0 | ThmH32 | ThmH2 => true,
        }
    }

    /// Member of the same family of identical statements that applies in
    /// `regime`: (case3-13, case4-13, 6-1) and (case3-15, case4-15).
    pub fn family_member(&self, regime: RegimeTag) -> Option<EstimateId> {
        use EstimateId::*;
        let fam: &[EstimateId] = match self {
            Case3_13 | Case4_13 | E6_1 => &[Case3_13, Case4_13, E6_1],
            Case3_15 | Case4_15 => &[Case3_15, Case4_15],
            other => return other.admits(regime).then_some(*other),
        };
        fam.iter().copied().find(|id| id.admits(regime))
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL.iter().find(|(_, name)| *name == s).map(|(id, _)| *id).ok_or_else(|| {
            let names: Vec<&str> = ALL.iter().map(|(_, n)| *n).collect();
            Error::Config(format!("unknown estimate id `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

impl TryFrom<String> for EstimateId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimateId> for String {
    fn from(id: EstimateId) -> String {
        id.as_str().to_string()
    }
}

/// Mode data (F^r, F^z, F^θ) of mode n.
#[derive(Debug, Clone)]
pub struct ModeForcing {
    pub n: i64,
    pub fr: RadialField,
    pub fz: RadialField,
    pub ftheta: RadialField,
}

/// Result of one estimate evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateValue {
    pub estimate: EstimateId,
    pub n: i64,
    /// LHS of the estimate (a norm for field estimates).
    pub lhs: f64,
    /// Data term (∫|F|²r for mode estimates, ‖F‖ for field estimates).
    pub rhs: f64,
    pub scaling: f64,
    /// lhs / (scaling · rhs)
    pub ratio: f64,
    /// lhs / rhs
    pub raw: f64,
    /// Set when the data term vanishes; ratio and raw are then 0.
    pub zero_data: bool,
}

fn value(estimate: EstimateId, n: i64, lhs: f64, rhs: f64, scaling: f64) -> EstimateValue {
    let zero_data = rhs == 0.0;
    let (raw, ratio) = if zero_data { (0.0, 0.0) } else { (lhs / rhs, lhs / (scaling * rhs)) };
    EstimateValue { estimate, n, lhs, rhs, scaling, ratio, raw, zero_data }
}

fn check_grids(f: &ModeForcing) -> Result<()> {
    let m = f.fr.len();
    if f.fz.len() != m || f.ftheta.len() != m {
        return Err(Error::Input(format!("mode {} data uses mismatched grids", f.n)));
    }
    Ok(())
}

fn regime_error(id: EstimateId, n: i64, regime: RegimeTag) -> Error {
    Error::Regime(format!("estimate {id} does not apply to mode n={n} in regime {}", regime.as_str()))
}

/// Ratio for one estimate on mode n with data F = (F^r, F^z, F^θ), regime
/// classified with the default constants.
pub fn estimate_ratio(
    params: &FlowParams,
    n: i64,
    f: (&RadialField, &RadialField, &RadialField),
    estimate: EstimateId,
) -> Result<EstimateValue> {
    estimate_ratio_with(params, n, f, estimate, &RegimeConstants::default())
}

/// [`estimate_ratio`] with explicit regime constants. Field estimates use the
/// real field made of mode n and its conjugate.
pub fn estimate_ratio_with(
    params: &FlowParams,
    n: i64,
    f: (&RadialField, &RadialField, &RadialField),
    estimate: EstimateId,
    constants: &RegimeConstants,
) -> Result<EstimateValue> {
    let data = ModeForcing { n, fr: f.0.clone(), fz: f.1.clone(), ftheta: f.2.clone() };
    check_grids(&data)?;
    if estimate.kind() == EstimateKind::Field {
        return field_estimate(params, std::slice::from_ref(&data), estimate, constants);
    }
    let regime = classify_with(params, n, constants)?;
    if !estimate.admits(regime) {
        return Err(regime_error(estimate, n, regime));
    }
    let grid = &data.fr.grid;
    let scaling = estimate.scaling(params, n);
    match estimate.kind() {
        EstimateKind::StreamMode => {
            let fc = curl_forcing(n, &data.fr, &data.fz)?;
            let mode = StreamSolver::new(params, n, grid, BcKind::Navier)?.solve(&fc.values)?;
            let b = weighted_norms(ModeRef::Stream(&mode), params);
            let rhs = grid.norm_sq(&data.fr.values, 1) + grid.norm_sq(&data.fz.values, 1);
            Ok(value(estimate, n, b.get(estimate.bundle_key()).unwrap_or(0.0), rhs, scaling))
        }
        EstimateKind::SwirlMode => {
            let mode = SwirlSolver::new(params, n, grid)?.solve(&data.ftheta.values)?;
            let b = weighted_norms(ModeRef::Swirl(&mode), params);
            let lhs = b.get(estimate.bundle_key()).unwrap_or(0.0);
            let rhs = if estimate == EstimateId::Swirl28 {
                grid.inner(&data.ftheta.values, &mode.vtheta.values, 1).norm()
            } else {
                grid.norm_sq(&data.ftheta.values, 1)
            };
            Ok(value(estimate, n, lhs, rhs, scaling))
        }
        EstimateKind::Field => unreachable!(),
    }
}

/// Solves every mode of a real field given by its modes n ≥ 0 and returns
/// (n, stream, swirl) for n and −n.
pub(crate) fn solve_field(
    params: &FlowParams,
    data: &[ModeForcing],
    with_swirl: bool,
) -> Result<Vec<(i64, StreamMode, SwirlMode)>> {
    let mut out = Vec::with_capacity(2 * data.len());
    for d in data {
        let grid = &d.fr.grid;
        let fc = curl_forcing(d.n, &d.fr, &d.fz)?;
        let s = StreamSolver::new(params, d.n, grid, BcKind::Navier)?.solve(&fc.values)?;
        let v = if with_swirl {
            SwirlSolver::new(params, d.n, grid)?.solve(&d.ftheta.values)?
        } else {
            SwirlMode::zeros(d.n, grid.clone())
        };
        if d.n != 0 {
            out.push((-d.n, s.conjugate(), v.conjugate()));
        }
        out.push((d.n, s, v));
    }
    out.sort_by_key(|(n, _, _)| *n);
    Ok(out)
}

/// ‖F‖ = (2π Σₙ ∫(|F^r|² + |F^z|² + |F^θ|²) r dr)^{1/2} over n and −n.
pub fn forcing_norm(data: &[ModeForcing], with_swirl: bool) -> f64 {
    let mut acc = 0.0;
    for d in data {
        let g = &d.fr.grid;
        let mut e = g.norm_sq(&d.fr.values, 1) + g.norm_sq(&d.fz.values, 1);
        if with_swirl {
            e += g.norm_sq(&d.ftheta.values, 1);
        }
        acc += if d.n == 0 { e } else { 2.0 * e };
    }
    (2.0 * PI * acc).sqrt()
}

/// Field estimate on the real field with modes `data` (n ≥ 0, distinct).
/// Ratio = ‖v‖_{H^s} / (scaling · ‖F‖).
pub fn field_estimate(
    params: &FlowParams,
    data: &[ModeForcing],
    estimate: EstimateId,
    constants: &RegimeConstants,
) -> Result<EstimateValue> {
    let (s, stream_only) = estimate
        .field_norm()
        .ok_or_else(|| Error::Config(format!("{estimate} is not a field estimate")))?;
    if data.is_empty() {
        return Err(Error::Input("field estimate needs at least one mode".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for d in data {
        check_grids(d)?;
        if d.n < 0 || !seen.insert(d.n) {
            return Err(Error::Input(format!("field modes must be distinct and >= 0, got n={}", d.n)));
        }
        let regime = classify_with(params, d.n, constants)?;
        let ok = match estimate {
            EstimateId::B6 => d.n == 0,
            EstimateId::E7_1 | EstimateId::E8_1H32 | EstimateId::E8_1H2 => estimate.admits(regime),
            _ => true,
        };
        if !ok {
            return Err(regime_error(estimate, d.n, regime));
        }
    }
    let modes = solve_field(params, data, !stream_only)?;
    let sq = sobolev_squares(modes.iter().map(|(n, a, b)| (*n, Some(a), Some(b))));
    let lhs = surrogate_from_squares(sq, s)?;
    let rhs = forcing_norm(data, !stream_only);
    let nmax = data.iter().map(|d| d.n).max().unwrap_or(0);
    Ok(value(estimate, nmax, lhs, rhs, estimate.scaling(params, nmax)))
}
