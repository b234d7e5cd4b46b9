//! TOML run configuration.
//!
//! ```toml
//! [system]
//! name = "osc2d"            # or: m = 1, hamiltonian = "(p1^2+q1^2)/2"
//!
//! [integrals]
//! exprs = ["(p1^2+q1^2)/2"]
//!
//! [sampling]
//! count = 200
//! seed = 7
//! half_width = 2.0
//! t = [0.0, 2.0]
//! require = ["(p1^2+q1^2)/2 - 0.1"]
//!
//! [integrator]
//! method = "rk4"
//! step = 1e-3
//!
//! [checks]
//! run = ["independence", "closure", "corank"]
//!
//! [output]
//! report = "verdict.json"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::catalog::{self, CatalogEntry};
use crate::dynamics::{IntegratorConfig, Method};
use crate::expr::ScalarField;
use crate::integrability::Check;
use crate::phase_space::{PhasePoint, SystemSpec};
use crate::sampling::{SampleBox, SamplingConfig};

use super::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub integrals: IntegralsSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: Option<String>,
    pub m: Option<usize>,
    pub hamiltonian: Option<String>,
    /// Initial point `[t, q.., p..]` for `integrate`.
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralsSection {
    #[serde(default)]
    pub exprs: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub half_width: Option<f64>,
    pub t: Option<(f64, f64)>,
    pub q: Option<Vec<(f64, f64)>>,
    pub p: Option<Vec<(f64, f64)>>,
    pub p0: Option<(f64, f64)>,
    /// Keep a sample iff every expression is strictly positive there.
    pub require: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: Option<String>,
    pub step: Option<f64>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub max_steps: Option<usize>,
    pub blowup: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    pub run: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// JSON report path; stdout when absent.
    pub report: Option<PathBuf>,
    /// CSV path for trajectories and tables.
    pub csv: Option<PathBuf>,
}

/// A configuration with the system resolved and defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub system: SystemSpec,
    pub entry: Option<CatalogEntry>,
    pub sampling: SamplingConfig,
    pub integrator: IntegratorConfig,
    pub checks: Option<Vec<Check>>,
    pub start: Option<PhasePoint>,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    /// A config naming a catalog entry and nothing else.
    pub fn named(name: &str) -> Self {
        let mut c = RunConfig::default();
        c.system.name = Some(name.to_string());
        c
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let input = |msg: String| CliError::Input(msg);
        let sys = &self.system;
        let inline = sys.m.is_some() || sys.hamiltonian.is_some() || !self.integrals.exprs.is_empty();
        let (system, entry) = match (&sys.name, inline) {
            (Some(_), true) => return Err(input("[system] takes either a catalog name or an inline definition, not both".into())),
            (None, false) => return Err(input("[system] needs a catalog name or m and hamiltonian".into())),
            (Some(name), false) => {
                let entry = catalog::entry(name).ok_or_else(|| input(format!("unknown catalog system `{name}`")))?;
                (entry.system.clone(), Some(entry))
            }
            (None, true) => {
                let m = sys.m.ok_or_else(|| input("[system] m is missing".into()))?;
                if m == 0 {
                    return Err(input("[system] m must be at least 1".into()));
                }
                let h = sys.hamiltonian.as_deref().ok_or_else(|| input("[system] hamiltonian is missing".into()))?;
                let srcs: Vec<&str> = self.integrals.exprs.iter().map(String::as_str).collect();
                let spec = SystemSpec::parse("inline", m, h, &srcs).map_err(|e| input(format!("expression: {e}")))?;
                (spec, None)
            }
        };
        let m = system.m;

        let mut sampling = entry.as_ref().map_or_else(|| SamplingConfig::new(m), |e| e.sampling.clone());
        let s = &self.sampling;
        if let Some(c) = s.count {
            if c == 0 {
                return Err(input("[sampling] count must be at least 1".into()));
            }
            sampling.count = c;
        }
        if let Some(seed) = s.seed {
            sampling.seed = seed;
        }
        if let Some(h) = s.half_width {
            sampling.bounds = SampleBox::symmetric(m, h);
        }
        if let Some(t) = s.t {
            sampling.bounds.t = t;
        }
        for (name, ranges, dst) in [("q", &s.q, &mut sampling.bounds.q), ("p", &s.p, &mut sampling.bounds.p)] {
            if let Some(r) = ranges {
                if r.len() != m {
                    return Err(input(format!("[sampling] {name} needs {m} ranges")));
                }
                *dst = r.clone();
            }
        }
        if let Some(p0) = s.p0 {
            sampling.bounds.p0 = p0;
        }
        if let Some(req) = &s.require {
            sampling.require = req
                .iter()
                .enumerate()
                .map(|(i, src)| ScalarField::parse(&format!("require{}", i + 1), src, m, false))
                .collect::<Result<_, _>>()
                .map_err(|e| input(format!("[sampling] require: {e}")))?;
        }

        let integrator = self.integrator.build()?;
        let checks = match &self.checks.run {
            None => None,
            Some(names) => Some(
                names
                    .iter()
                    .map(|n| Check::from_name(n).ok_or_else(|| input(format!("unknown check `{n}`"))))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let start = match &sys.start {
            Some(c) if c.len() == 1 + 2 * m => Some(PhasePoint::from_coords(m, c)),
            Some(_) => return Err(input(format!("[system] start needs {} numbers (t, q, p)", 1 + 2 * m))),
            None => entry.as_ref().and_then(|e| e.initial_points.first().cloned()),
        };
        Ok(Resolved {
            system,
            entry,
            sampling,
            integrator,
            checks,
            start,
            output: self.output.clone(),
        })
    }
}

impl IntegratorSection {
    fn build(&self) -> Result<IntegratorConfig, CliError> {
        let mut cfg = match self.method.as_deref().unwrap_or("rk4") {
            "rk4" => IntegratorConfig::rk4(self.step.unwrap_or(1e-3)),
            "dopri5" => IntegratorConfig::dopri5(self.atol.unwrap_or(1e-12), self.rtol.unwrap_or(1e-12)),
            other => return Err(CliError::Input(format!("unknown integrator `{other}`"))),
        };
        if let Some(n) = self.max_steps {
            cfg.max_steps = n;
        }
        if let Some(b) = self.blowup {
            cfg.blowup_threshold = b;
        }
        if let Some(r) = self.record_every {
            cfg.record_every = r;
        }
        let ok = match cfg.method {
            Method::Rk4 { step } => step > 0.0,
            Method::Dopri5 { atol, rtol } => atol > 0.0 && rtol > 0.0,
        };
        if !ok || cfg.max_steps == 0 || cfg.record_every == 0 || !(cfg.blowup_threshold > 0.0) {
            return Err(CliError::Input("[integrator] step, tolerances and limits must be positive".into()));
        }
        Ok(cfg)
    }
}
