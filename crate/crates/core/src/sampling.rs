//! Low-discrepancy sample points for pointwise identity checks.
//!
//! Points come from a Halton sequence with a seeded Cranley–Patterson shift,
//! so two seeds give two different but equally well-spread point sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::ScalarField;
use crate::lift::ExtendedPoint;
use crate::phase_space::PhasePoint;

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Candidates drawn per requested sample before giving up.
const ATTEMPTS_PER_SAMPLE: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplingError {
    #[error("degenerate sample box: {0}")]
    DegenerateSampleBox(String),
}

/// Axis-aligned box in `(t, q, p)`, plus a range for `p0` on T*Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub t: (f64, f64),
    pub q: Vec<(f64, f64)>,
    pub p: Vec<(f64, f64)>,
    pub p0: (f64, f64),
}

impl SampleBox {
    /// `[−half, half]` for every q, p and p0; `t ∈ [0, 2]`.
    pub fn symmetric(m: usize, half: f64) -> Self {
        SampleBox {
            t: (0.0, 2.0),
            q: vec![(-half, half); m],
            p: vec![(-half, half); m],
            p0: (-half, half),
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    fn ranges(&self, extended: bool) -> Vec<(f64, f64)> {
        let mut r = vec![self.t];
        r.extend(&self.q);
        r.extend(&self.p);
        if extended {
            r.push(self.p0);
        }
        r
    }

    fn validate(&self) -> Result<(), SamplingError> {
        if self.q.len() != self.p.len() {
            return Err(SamplingError::DegenerateSampleBox(
                "q and p ranges differ in length".into(),
            ));
        }
        let ranges = self.ranges(true);
        if let Some((lo, hi)) = ranges.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(SamplingError::DegenerateSampleBox(format!("invalid range [{lo}, {hi}]")));
        }
        if ranges.iter().all(|(lo, hi)| lo == hi) {
            return Err(SamplingError::DegenerateSampleBox("box has zero volume".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SamplingConfig {
    pub count: usize,
    pub seed: u64,
    pub bounds: SampleBox,
    /// A candidate is kept iff every field is strictly positive there.
    pub require: Vec<ScalarField>,
}

impl SamplingConfig {
    pub fn new(m: usize) -> Self {
        SamplingConfig {
            count: 200,
            seed: 0,
            bounds: SampleBox::symmetric(m, 2.0),
            require: Vec::new(),
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u32) -> f64 {
    let b = b as u64;
    let inv = 1.0 / b as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Shifted Halton points in the unit cube of dimension `dim`.
pub struct Halton {
    index: u64,
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Halton {
            index: 1,
            shift: (0..dim).map(|_| rng.random::<f64>()).collect(),
        }
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let i = self.index;
        self.index += 1;
        Some(
            self.shift
                .iter()
                .zip(PRIMES)
                .map(|(s, b)| (radical_inverse(i, b) + s).fract())
                .collect(),
        )
    }
}

fn accepted(require: &[ScalarField], coords: &[f64]) -> bool {
    require
        .iter()
        .all(|f| f.value(coords).is_ok_and(|v| v > 0.0))
}

fn draw(cfg: &SamplingConfig, extended: bool) -> Result<Vec<Vec<f64>>, SamplingError> {
    cfg.bounds.validate()?;
    if cfg.count == 0 {
        return Err(SamplingError::DegenerateSampleBox("sample count is zero".into()));
    }
    let ranges = cfg.bounds.ranges(extended);
    let mut out = Vec::with_capacity(cfg.count);
    for u in Halton::new(ranges.len(), cfg.seed).take(cfg.count * ATTEMPTS_PER_SAMPLE) {
        let c: Vec<f64> = u
            .iter()
            .zip(&ranges)
            .map(|(u, (lo, hi))| lo + u * (hi - lo))
            .collect();
        if accepted(&cfg.require, &c) {
            out.push(c);
            if out.len() == cfg.count {
                return Ok(out);
            }
        }
    }
    Err(SamplingError::DegenerateSampleBox(format!(
        "only {} of {} candidates satisfied the exclusion predicates",
        out.len(),
        cfg.count
    )))
}

pub fn sample_points(cfg: &SamplingConfig) -> Result<Vec<PhasePoint>, SamplingError> {
    let m = cfg.bounds.dof();
    Ok(draw(cfg, false)?
        .iter()
        .map(|c| PhasePoint::from_coords(m, c))
        .collect())
}

/// Points of T*Q; `p0` is drawn from its own range, so most points lie off
/// the section.
pub fn sample_extended_points(cfg: &SamplingConfig) -> Result<Vec<ExtendedPoint>, SamplingError> {
    let m = cfg.bounds.dof();
    Ok(draw(cfg, true)?
        .iter()
        .map(|c| ExtendedPoint::from_coords(m, c))
        .collect())
}
