//! Scenario files: parsing and validation.

use std::collections::BTreeMap;

use msk_core::circle_fun::check_grid;
use msk_core::selftest::Tolerances;
use msk_core::{CMat, InnerSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Basis,
    Tto,
    Crofoot,
    Zero,
    Dim,
    Selftest,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Basis => "basis",
            Task::Tto => "tto",
            Task::Crofoot => "crofoot",
            Task::Zero => "zero",
            Task::Dim => "dim",
            Task::Selftest => "selftest",
        }
    }

    /// Offset mixed into the scenario seed for the task's own draws, so a
    /// task's numbers do not depend on which tasks precede it.
    pub fn stream(self) -> u64 {
        match self {
            Task::Basis => 0x11,
            Task::Tto => 0x22,
            Task::Crofoot => 0x33,
            Task::Zero => 0x44,
            Task::Dim => 0x55,
            Task::Selftest => 0x66,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSymbol {
    pub degree: i64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolSource {
    /// `[[k, matrix], ...]`
    Coeffs(Vec<(i64, CMat)>),
    Random(RandomSymbol),
}

fn default_grid() -> usize {
    msk_core::circle_fun::DEFAULT_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub seed: u64,
    #[serde(rename = "M", default = "default_grid")]
    pub grid: usize,
    pub d: usize,
    pub theta1: InnerSpec,
    pub theta2: InnerSpec,
    pub symbol: SymbolSource,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<CMat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<CMat>,
}

/// A scenario that passed validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario(RawScenario);

impl Scenario {
    pub fn raw(&self) -> &RawScenario {
        &self.0
    }

    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(
        self,
        seed: Option<u64>,
        grid: Option<usize>,
        tol: &BTreeMap<String, f64>,
    ) -> Result<Scenario, String> {
        let mut raw = self.0;
        if let Some(s) = seed {
            raw.seed = s;
        }
        if let Some(g) = grid {
            raw.grid = g;
        }
        raw.tolerances.extend(tol.iter().map(|(k, v)| (k.clone(), *v)));
        Scenario::try_from(raw)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::default()
            .with_overrides(&self.0.tolerances)
            .expect("validated tolerance keys")
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> RawScenario {
        s.0
    }
}

fn check_matrix(name: &str, m: &CMat, d: usize) -> Result<(), String> {
    if m.shape() != (d, d) {
        return Err(format!("{name} has shape {:?}, expected {d}x{d}", m.shape()));
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(format!("{name} has non-finite entries"));
    }
    Ok(())
}

impl TryFrom<RawScenario> for Scenario {
    type Error = String;

    fn try_from(raw: RawScenario) -> Result<Self, String> {
        check_grid(raw.grid).map_err(|e| e.to_string())?;
        if raw.d == 0 || raw.d > 8 {
            return Err(format!("d = {} outside [1, 8]", raw.d));
        }
        for (name, spec) in [("theta1", &raw.theta1), ("theta2", &raw.theta2)] {
            if spec.dim() != raw.d {
                return Err(format!("{name} acts on C^{} but d = {}", spec.dim(), raw.d));
            }
        }
        if raw.tasks.is_empty() {
            return Err("tasks must not be empty".into());
        }
        Tolerances::default().with_overrides(&raw.tolerances).map_err(|e| e.to_string())?;
        if let Some((k, v)) = raw.tolerances.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(format!("tolerance {k} = {v} must be finite and non-negative"));
        }
        let quarter = (raw.grid / 4) as i64;
        match &raw.symbol {
            SymbolSource::Coeffs(list) => {
                for (k, m) in list {
                    if k.abs() >= quarter {
                        return Err(format!("symbol degree {k} needs a grid larger than {}", raw.grid));
                    }
                    check_matrix(&format!("symbol coefficient {k}"), m, raw.d)?;
                }
            }
            SymbolSource::Random(r) => {
                if r.degree < 0 || r.degree >= quarter {
                    return Err(format!("random symbol degree {} outside [0, {quarter})", r.degree));
                }
                if !r.scale.is_finite() {
                    return Err("random symbol scale must be finite".into());
                }
            }
        }
        for (name, w) in [("w1", &raw.w1), ("w2", &raw.w2)] {
            if let Some(w) = w {
                check_matrix(name, w, raw.d)?;
            }
        }
        Ok(Scenario(raw))
    }
}

/// Parses scenario text; the error string carries line and column.
pub fn parse(text: &str) -> Result<Scenario, serde_json::Error> {
    serde_json::from_str(text)
}
