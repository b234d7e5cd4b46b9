//! Reference systems with declared outcomes, closed-form charts and
//! negative fixtures.

use serde::Serialize;

use crate::action_angle::{ActionAngleChart, ChartDef, LevelData};
use crate::expr::ScalarField;
use crate::integrability::Check;
use crate::phase_space::{PhasePoint, SystemSpec};
use crate::sampling::SamplingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Superintegrable,
    CompletelyIntegrable,
    /// Dynamics-only system without declared integrals.
    Dynamics,
    /// Built to fail specific checks.
    NegativeFixture,
}

/// Declared verifier outcomes under the default configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub n: usize,
    pub k: usize,
    pub r: Option<usize>,
    /// Checks that must fail; everything else requested must pass.
    pub failing: Vec<Check>,
}

impl Expected {
    pub fn passes(&self, c: Check) -> bool {
        !self.failing.contains(&c)
    }
}

/// A compact factor whose loop action has a closed form.
#[derive(Debug, Clone)]
pub struct ActionFactor {
    pub dof: usize,
    pub closed_form: ScalarField,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: EntryKind,
    pub system: SystemSpec,
    pub expected: Option<Expected>,
    /// Sampling box and exclusion predicates.
    pub sampling: SamplingConfig,
    /// First chart is the plain one; an initial-data chart may follow.
    pub charts: Vec<ActionAngleChart>,
    pub action_factors: Vec<ActionFactor>,
    pub initial_points: Vec<PhasePoint>,
    /// False when the Hamilton vector field is known to blow up.
    pub complete_flow: bool,
    pub notes: Vec<&'static str>,
}

impl CatalogEntry {
    pub fn plain_chart(&self) -> Option<&ActionAngleChart> {
        self.charts.iter().find(|c| !c.initial_data)
    }

    pub fn initial_data_chart(&self) -> Option<&ActionAngleChart> {
        self.charts.iter().find(|c| c.initial_data)
    }

    /// Start of the orbit at energy `e` in factor `dof`: `q = 0`,
    /// `p = √(2e)`, every other coordinate from the first initial point.
    pub fn level(&self, energy: f64, dof: usize) -> Option<LevelData> {
        self.action_factors.iter().find(|f| f.dof == dof)?;
        let mut start = self.initial_points.first()?.clone();
        start.q[dof] = 0.0;
        start.p[dof] = (2.0 * energy).sqrt();
        Some(LevelData {
            start,
            dof,
            horizon: 20.0,
        })
    }

    /// Expression sources of the Hamiltonian and the integrals.
    pub fn describe(&self) -> String {
        let mut out = format!("{}: {}\n", self.name, self.description);
        out += &format!("  kind: {:?}\n  m = {}\n", self.kind, self.system.m);
        out += &format!("  H = {}\n", self.system.hamiltonian.expression());
        for f in &self.system.integrals {
            out += &format!("  {} = {}\n", f.name(), f.expression());
        }
        if let Some(e) = &self.expected {
            out += &format!("  expected: n = {}, k = {}", e.n, e.k);
            if let Some(r) = e.r {
                out += &format!(", r = {r}");
            }
            if e.failing.is_empty() {
                out += ", all checks pass\n";
            } else {
                let names: Vec<&str> = e.failing.iter().map(|c| c.name()).collect();
                out += &format!(", failing: {}\n", names.join(", "));
            }
        }
        for f in &self.sampling.require {
            out += &format!("  require {} > 0\n", f.expression());
        }
        for c in &self.charts {
            let kind = if c.initial_data { "initial-data" } else { "plain" };
            out += &format!("  chart {} ({kind}, k = {}, r = {})\n", c.name, c.k, c.r);
        }
        for n in &self.notes {
            out += &format!("  note: {n}\n");
        }
        out
    }
}

struct Def {
    name: &'static str,
    description: &'static str,
    kind: EntryKind,
    m: usize,
    hamiltonian: &'static str,
    integrals: &'static [&'static str],
    expected: Option<Expected>,
    require: &'static [&'static str],
    charts: Vec<ChartDef<'static>>,
    actions: &'static [(usize, &'static str)],
    initial: Vec<(f64, Vec<f64>, Vec<f64>)>,
    complete_flow: bool,
    notes: Vec<&'static str>,
}

const E1: &str = "(p1^2+q1^2)/2";
const E2: &str = "(p2^2+q2^2)/2";
const OSC2: &str = "(p1^2+q1^2)/2 + (p2^2+q2^2)/2";
const KEPLER: &str = "(p1^2+p2^2)/2 - (q1^2+q2^2)^(-0.5)";

fn expected(n: usize, k: usize, r: Option<usize>, failing: &[Check]) -> Option<Expected> {
    Some(Expected {
        n,
        k,
        r,
        failing: failing.to_vec(),
    })
}

fn defs() -> Vec<Def> {
    let mut defs = vec![
        Def {
            name: "free2d",
            description: "free particle in the plane with the time-dependent integral q1 - t*p1",
            kind: EntryKind::Superintegrable,
            m: 2,
            hamiltonian: "(p1^2+p2^2)/2",
            integrals: &["p1", "p2", "q1 - t*p1"],
            expected: expected(3, 1, Some(0), &[]),
            require: &[],
            charts: vec![
                ChartDef {
                    name: "free2d",
                    m: 2,
                    r: 0,
                    pair_mom: &["p1"],
                    pair_pos: &["q1 - t*p1"],
                    actions: &["p2"],
                    angles: &["q2"],
                    inverse_q: &["Q1 + t*P1", "y1"],
                    inverse_p: &["P1", "I1"],
                    correction: "-P1^2/2",
                    ..Default::default()
                },
                ChartDef {
                    name: "free2d-initial",
                    m: 2,
                    r: 0,
                    pair_mom: &["p1"],
                    pair_pos: &["q1 - t*p1"],
                    actions: &["p2"],
                    angles: &["q2 - t*p2"],
                    inverse_q: &["Q1 + t*P1", "y1 + t*I1"],
                    inverse_p: &["P1", "I1"],
                    correction: "-(P1^2 + I1^2)/2",
                    initial_data: true,
                    ..Default::default()
                },
            ],
            actions: &[],
            initial: vec![(0.0, vec![0.3, -0.2], vec![1.1, 0.7]), (0.5, vec![-1.0, 0.4], vec![-0.6, 1.5])],
            complete_flow: true,
            notes: vec!["structure matrix is the constant [[0,0,1],[0,0,0],[-1,0,0]]"],
        },
        Def {
            name: "osc1d",
            description: "harmonic oscillator with unit frequency",
            kind: EntryKind::CompletelyIntegrable,
            m: 1,
            hamiltonian: E1,
            integrals: &[E1],
            expected: expected(1, 1, Some(1), &[]),
            require: &[],
            charts: vec![
                ChartDef {
                    name: "osc1d",
                    m: 1,
                    r: 1,
                    actions: &[E1],
                    angles: &["atan2(q1, p1)"],
                    inverse_q: &["sqrt(2*I1)*sin(y1)"],
                    inverse_p: &["sqrt(2*I1)*cos(y1)"],
                    domain: &["(p1^2+q1^2)/2 - 0.05"],
                    ..Default::default()
                },
                ChartDef {
                    name: "osc1d-initial",
                    m: 1,
                    r: 1,
                    actions: &[E1],
                    angles: &["atan2(q1, p1) - t"],
                    inverse_q: &["sqrt(2*I1)*sin(y1 + t)"],
                    inverse_p: &["sqrt(2*I1)*cos(y1 + t)"],
                    correction: "-I1",
                    domain: &["(p1^2+q1^2)/2 - 0.05"],
                    initial_data: true,
                    ..Default::default()
                },
            ],
            actions: &[(0, E1)],
            initial: vec![(0.0, vec![1.0], vec![0.0]), (0.3, vec![-0.5], vec![1.2])],
            complete_flow: true,
            notes: vec![],
        },
        Def {
            name: "osc2d",
            description: "isotropic oscillator with integrals E1, S1 = p1*p2 + q1*q2, L = q1*p2 - q2*p1",
            kind: EntryKind::Superintegrable,
            m: 2,
            hamiltonian: OSC2,
            integrals: &[E1, "p1*p2 + q1*q2", "q1*p2 - q2*p1"],
            expected: expected(3, 1, Some(1), &[]),
            require: &["(p1^2+q1^2)/2 - 0.1"],
            charts: vec![ChartDef {
                name: "osc2d",
                m: 2,
                r: 1,
                pair_mom: &[E2],
                pair_pos: &["atan2(q2*p1 - p2*q1, p1*p2 + q1*q2)"],
                actions: &[OSC2],
                angles: &["atan2(q1, p1)"],
                inverse_q: &["sqrt(2*(I1 - P1))*sin(y1)", "sqrt(2*P1)*sin(Q1 + y1)"],
                inverse_p: &["sqrt(2*(I1 - P1))*cos(y1)", "sqrt(2*P1)*cos(Q1 + y1)"],
                domain: &["(p1^2+q1^2)/2 - 0.1", "(p2^2+q2^2)/2 - 0.1"],
                ..Default::default()
            }],
            actions: &[(0, E1), (1, E2)],
            initial: vec![(0.0, vec![1.0, 0.0], vec![0.0, 1.0]), (0.2, vec![0.4, -0.9], vec![1.1, 0.3])],
            complete_flow: true,
            notes: vec![
                "structure functions s12 = -L, s13 = S1, s23 = 2(E2 - E1) with E2 = (S1^2 + L^2)/(4 E1), single-valued on E1 > 0",
                "Q1 is the phase difference of the two factors, written so that it is constant along the flow",
            ],
        },
        Def {
            name: "driven_osc",
            description: "oscillator driven by sin(t); no integrals declared",
            kind: EntryKind::Dynamics,
            m: 1,
            hamiltonian: "(p1^2+q1^2)/2 - sin(t)*q1",
            integrals: &[],
            expected: None,
            require: &[],
            charts: vec![],
            actions: &[],
            initial: vec![(0.0, vec![1.0], vec![0.0]), (1.0, vec![-0.3], vec![0.8])],
            complete_flow: true,
            notes: vec![],
        },
        Def {
            name: "blowup_fixture",
            description: "inverted quartic well; solutions reach infinity in finite time",
            kind: EntryKind::NegativeFixture,
            m: 1,
            hamiltonian: "p1^2/2 - q1^4",
            integrals: &[],
            expected: None,
            require: &[],
            charts: vec![],
            actions: &[],
            initial: vec![(0.0, vec![1.0], vec![0.0])],
            complete_flow: false,
            notes: vec!["H = -q1^4 alone has a flow linear in time; the kinetic term is needed for finite-time escape"],
        },
        Def {
            name: "broken_closure",
            description: "independent pair whose bracket -q2 is not a function of the pair",
            kind: EntryKind::NegativeFixture,
            m: 2,
            hamiltonian: "0",
            integrals: &["q1", "p1*q2"],
            expected: expected(2, 2, None, &[Check::Closure, Check::Corank, Check::Lifted]),
            require: &[],
            charts: vec![],
            actions: &[],
            initial: vec![(0.0, vec![0.5, 1.0], vec![-0.2, 0.3])],
            complete_flow: true,
            notes: vec!["a nonzero 2x2 antisymmetric matrix has corank 0, so corank and the lifted corank fail alongside closure"],
        },
        Def {
            name: "duplicated_integral",
            description: "free particle with the dependent pair p1, 2*p1",
            kind: EntryKind::NegativeFixture,
            m: 2,
            hamiltonian: "(p1^2+p2^2)/2",
            integrals: &["p1", "2*p1"],
            expected: expected(2, 2, None, &[Check::Independence]),
            require: &[],
            charts: vec![],
            actions: &[],
            initial: vec![(0.0, vec![0.1, 0.2], vec![0.9, -0.4])],
            complete_flow: true,
            notes: vec![],
        },
        Def {
            name: "free2d_involutive",
            description: "free particle in the plane with the momenta as integrals in involution",
            kind: EntryKind::CompletelyIntegrable,
            m: 2,
            hamiltonian: "(p1^2+p2^2)/2",
            integrals: &["p1", "p2"],
            expected: expected(2, 2, Some(0), &[]),
            require: &[],
            charts: vec![ChartDef {
                name: "free2d_involutive",
                m: 2,
                r: 0,
                actions: &["p1", "p2"],
                angles: &["q1", "q2"],
                inverse_q: &["y1", "y2"],
                inverse_p: &["I1", "I2"],
                ..Default::default()
            }],
            actions: &[],
            initial: vec![(0.0, vec![0.3, -0.2], vec![1.1, 0.7])],
            complete_flow: true,
            notes: vec![],
        },
        Def {
            name: "osc2d_involutive",
            description: "isotropic oscillator with the partial energies as integrals in involution",
            kind: EntryKind::CompletelyIntegrable,
            m: 2,
            hamiltonian: OSC2,
            integrals: &[E1, E2],
            expected: expected(2, 2, Some(2), &[]),
            require: &["(p1^2+q1^2)/2 - 0.1", "(p2^2+q2^2)/2 - 0.1"],
            charts: vec![ChartDef {
                name: "osc2d_involutive",
                m: 2,
                r: 2,
                actions: &[E1, E2],
                angles: &["atan2(q1, p1)", "atan2(q2, p2)"],
                inverse_q: &["sqrt(2*I1)*sin(y1)", "sqrt(2*I2)*sin(y2)"],
                inverse_p: &["sqrt(2*I1)*cos(y1)", "sqrt(2*I2)*cos(y2)"],
                domain: &["(p1^2+q1^2)/2 - 0.1", "(p2^2+q2^2)/2 - 0.1"],
                ..Default::default()
            }],
            actions: &[(0, E1), (1, E2)],
            initial: vec![(0.0, vec![1.0, 0.0], vec![0.0, 1.0])],
            complete_flow: true,
            notes: vec![],
        },
        Def {
            name: "free1d",
            description: "free particle on the line with the time-dependent integral q1 - t*p1",
            kind: EntryKind::CompletelyIntegrable,
            m: 1,
            hamiltonian: "p1^2/2",
            integrals: &["q1 - t*p1"],
            expected: expected(1, 1, Some(0), &[]),
            require: &[],
            charts: vec![ChartDef {
                name: "free1d-initial",
                m: 1,
                r: 0,
                actions: &["q1 - t*p1"],
                angles: &["-p1"],
                inverse_q: &["I1 - t*y1"],
                inverse_p: &["-y1"],
                correction: "-y1^2/2",
                initial_data: true,
                ..Default::default()
            }],
            actions: &[],
            initial: vec![(0.0, vec![0.0], vec![1.0])],
            complete_flow: true,
            notes: vec!["the action is the initial position, so the chart is of initial-data type"],
        },
    ];
    if cfg!(feature = "kepler") {
        defs.push(Def {
            name: "kepler2d",
            description: "planar Kepler problem with energy, angular momentum and the first Runge-Lenz component",
            kind: EntryKind::Superintegrable,
            m: 2,
            hamiltonian: KEPLER,
            integrals: &[KEPLER, "q1*p2 - q2*p1", "p2*(q1*p2 - q2*p1) - q1*(q1^2+q2^2)^(-0.5)"],
            expected: expected(3, 1, None, &[]),
            require: &["-((p1^2+p2^2)/2 - (q1^2+q2^2)^(-0.5)) - 0.1", "q1^2 + q2^2 - 0.04"],
            charts: vec![],
            actions: &[],
            initial: vec![(0.0, vec![1.0, 0.0], vec![0.0, 1.0]), (0.0, vec![0.8, 0.3], vec![-0.4, 0.9])],
            complete_flow: true,
            notes: vec![
                "closure holds only locally: {L, A1} is A2 = ±sqrt(1 + 2 H L^2 - A1^2), a two-branch structure function",
                "the box is restricted to bound orbits (H < -0.1) away from the collision point (|q| > 0.2)",
            ],
        });
    }
    defs
}

fn build(def: Def) -> CatalogEntry {
    let system = SystemSpec::parse(def.name, def.m, def.hamiltonian, def.integrals)
        .unwrap_or_else(|e| panic!("catalog entry {}: {e}", def.name));
    let mut sampling = SamplingConfig::new(def.m);
    sampling.require = def
        .require
        .iter()
        .enumerate()
        .map(|(i, s)| ScalarField::parse(&format!("require{}", i + 1), s, def.m, false).expect("catalog predicate"))
        .collect();
    CatalogEntry {
        name: def.name,
        description: def.description,
        kind: def.kind,
        expected: def.expected,
        sampling,
        charts: def
            .charts
            .iter()
            .map(|c| ActionAngleChart::from_def(c).unwrap_or_else(|e| panic!("chart {}: {e}", c.name)))
            .collect(),
        action_factors: def
            .actions
            .iter()
            .map(|(dof, src)| ActionFactor {
                dof: *dof,
                closed_form: ScalarField::parse("action", src, def.m, false).expect("catalog action"),
            })
            .collect(),
        initial_points: def
            .initial
            .into_iter()
            .map(|(t, q, p)| PhasePoint::new(t, q, p))
            .collect(),
        complete_flow: def.complete_flow,
        notes: def.notes,
        system,
    }
}

pub fn catalog_entries() -> Vec<CatalogEntry> {
    defs().into_iter().map(build).collect()
}

pub fn names() -> Vec<&'static str> {
    defs().iter().map(|d| d.name).collect()
}

pub fn entry(name: &str) -> Option<CatalogEntry> {
    defs().into_iter().find(|d| d.name == name).map(build)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_consistent() {
        let entries = catalog_entries();
        assert!(entries.len() >= 6);
        for e in &entries {
            if let Some(x) = &e.expected {
                assert_eq!(x.n, e.system.n(), "{}", e.name);
                assert_eq!(x.k, 2 * e.system.m - x.n, "{}", e.name);
                if e.kind == EntryKind::Superintegrable {
                    assert!(e.system.m <= x.n && x.n < 2 * e.system.m);
                }
                if e.kind == EntryKind::CompletelyIntegrable {
                    assert_eq!(x.n, e.system.m);
                }
            }
            for c in &e.charts {
                assert_eq!(c.m, e.system.m);
                if let Some(r) = e.expected.as_ref().and_then(|x| x.r) {
                    assert_eq!(c.r, r, "{}", e.name);
                }
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(entry("free2d").is_some());
        assert!(entry("nope").is_none());
        assert!(entry("free2d").unwrap().describe().contains("q1 - t*p1"));
    }
}
