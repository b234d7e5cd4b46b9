//! Sampled verification of superintegrability and complete integrability.
//!
//! Every check is pointwise evidence at a finite sample, never a proof.
//! Ranks come from singular values: `sᵢ` counts iff
//! `sᵢ > rel_tol · s₁` and `sᵢ > abs_floor`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::EvalError;
use crate::lift::{extended_bracket_from_grads, ExtendedPoint, LiftedSystem};
use crate::phase_space::{bracket_from_grads, bracket_gradient_from_duals, lie_derivative, PhasePoint, SystemSpec};
use crate::sampling::{sample_extended_points, sample_points, SamplingConfig, SamplingError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("involution check needs n = m integrals, got n = {n}, m = {m}")]
    WrongCount { n: usize, m: usize },
    #[error("no sample points")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankPolicy {
    pub rel_tol: f64,
    pub abs_floor: f64,
    /// Fraction of samples that must share the modal rank.
    pub agreement: f64,
    /// Samples allowed to deviate before a rank check fails.
    pub failure_quota: usize,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy {
            rel_tol: 1e-9,
            abs_floor: 1e-12,
            agreement: 0.95,
            failure_quota: 0,
        }
    }
}

/// Descending singular values and the decided rank.
pub fn numerical_rank(a: &DMatrix<f64>, policy: &RankPolicy) -> (usize, Vec<f64>) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (0, Vec::new());
    }
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let cut = (policy.rel_tol * sv[0]).max(policy.abs_floor);
    (sv.iter().filter(|s| **s > cut).count(), sv)
}

/// Rows `(∂_tΦα, ∂ᵢΦα, ∂ⁱΦα)`, in integral order.
pub fn full_jacobian(system: &SystemSpec, x: &PhasePoint) -> Result<DMatrix<f64>, EvalError> {
    let c = x.coords();
    let rows = system
        .integrals
        .iter()
        .map(|f| f.dual1(&c).map(|d| d.grad))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DMatrix::from_fn(rows.len(), c.len(), |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRank {
    pub point: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub expected: usize,
    pub consensus: usize,
    pub agreement: f64,
    pub consensus_reached: bool,
    pub rel_tol: f64,
    /// Indices of samples whose rank differs from `expected`.
    pub failures: Vec<usize>,
    pub witness: Option<SampleRank>,
    pub pass: bool,
    #[serde(skip)]
    pub samples: Vec<SampleRank>,
}

fn modal(values: &[usize]) -> (usize, f64) {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(*v).or_insert(0usize) += 1;
    }
    let (mode, count) = counts
        .into_iter()
        .max_by_key(|(v, c)| (*c, std::cmp::Reverse(*v)))
        .unwrap_or((0, 0));
    (mode, count as f64 / values.len().max(1) as f64)
}

fn rank_report(samples: Vec<SampleRank>, expected: usize, policy: &RankPolicy) -> RankReport {
    let ranks: Vec<usize> = samples.iter().map(|s| s.rank).collect();
    let (consensus, agreement) = modal(&ranks);
    let failures: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] != expected).collect();
    RankReport {
        expected,
        consensus,
        agreement,
        consensus_reached: agreement >= policy.agreement,
        rel_tol: policy.rel_tol,
        witness: failures.first().map(|&i| samples[i].clone()),
        pass: failures.len() <= policy.failure_quota,
        failures,
        samples,
    }
}

fn require_samples<T>(samples: &[T]) -> Result<(), VerifyError> {
    if samples.is_empty() {
        Err(VerifyError::NoSamples)
    } else {
        Ok(())
    }
}

/// Independence: the Jacobian of `(Φ₁..Φₙ)` has rank `n` everywhere.
pub fn independence_check(system: &SystemSpec, samples: &[PhasePoint], policy: &RankPolicy) -> Result<RankReport, VerifyError> {
    require_samples(samples)?;
    let per: Vec<SampleRank> = samples
        .par_iter()
        .map(|x| {
            let (rank, sv) = numerical_rank(&full_jacobian(system, x)?, policy);
            Ok(SampleRank {
                point: x.coords(),
                singular_values: sv,
                rank,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(rank_report(per, system.n(), policy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub alpha: usize,
    pub beta: usize,
    pub pass: bool,
    pub failures: usize,
    pub witness: Option<SampleRank>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub pairs: Vec<PairEvidence>,
    pub pass: bool,
}

/// Closure via functional dependence: each `Bαβ = {Φα, Φβ}_V`
/// must not raise the rank of the Jacobian when its gradient is appended.
/// The comparison is against `rank(DΦ)` at the same point, so a failure of
/// independence does not also register as a failure of closure.
pub fn closure_check(system: &SystemSpec, samples: &[PhasePoint], policy: &RankPolicy) -> Result<ClosureReport, VerifyError> {
    require_samples(samples)?;
    let n = system.n();
    let m = system.m;
    // per sample: for each pair, Some(witness) if the rank rose
    let per: Vec<Vec<Option<SampleRank>>> = samples
        .par_iter()
        .map(|x| {
            let c = x.coords();
            let duals = system
                .integrals
                .iter()
                .map(|f| f.dual2(&c))
                .collect::<Result<Vec<_>, _>>()?;
            let jac = DMatrix::from_fn(n, c.len(), |i, j| duals[i].d(j));
            let (base_rank, _) = numerical_rank(&jac, policy);
            let mut out = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let gb = bracket_gradient_from_duals(m, &duals[a], &duals[b]);
                    let aug = DMatrix::from_fn(n + 1, c.len(), |i, j| if i < n { jac[(i, j)] } else { gb[j] });
                    let (rank, sv) = numerical_rank(&aug, policy);
                    out.push((rank > base_rank).then(|| SampleRank {
                        point: c.clone(),
                        singular_values: sv,
                        rank,
                    }));
                }
            }
            Ok(out)
        })
        .collect::<Result<_, EvalError>>()?;
    let mut pairs = Vec::new();
    let mut idx = 0;
    for a in 0..n {
        for b in a + 1..n {
            let bad: Vec<&SampleRank> = per.iter().filter_map(|s| s[idx].as_ref()).collect();
            pairs.push(PairEvidence {
                alpha: a + 1,
                beta: b + 1,
                pass: bad.len() <= policy.failure_quota,
                failures: bad.len(),
                witness: bad.first().map(|w| (*w).clone()),
            });
            idx += 1;
        }
    }
    Ok(ClosureReport {
        pass: pairs.iter().all(|p| p.pass),
        pairs,
    })
}

/// `sαβ = {Φα, Φβ}_V` at one point, with the image `Φ(x)` on N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureMatrix {
    pub point: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
}

impl StructureMatrix {
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.values.len();
        DMatrix::from_fn(n, n, |i, j| self.values[i][j])
    }
}

pub fn structure_matrix(system: &SystemSpec, x: &PhasePoint) -> Result<StructureMatrix, EvalError> {
    let c = x.coords();
    let duals = system
        .integrals
        .iter()
        .map(|f| f.dual1(&c))
        .collect::<Result<Vec<_>, _>>()?;
    let n = duals.len();
    let mut values = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let s = bracket_from_grads(system.m, &duals[a].grad, &duals[b].grad);
            values[a][b] = s;
            values[b][a] = -s;
        }
    }
    Ok(StructureMatrix {
        point: c,
        values,
        phi: duals.iter().map(|d| d.value).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorankReport {
    /// Corank at the first sample.
    pub k: usize,
    pub constant: bool,
    pub expected: Option<usize>,
    pub values_seen: Vec<usize>,
    pub witness: Option<SampleRank>,
    pub pass: bool,
}

fn corank_report(per: Vec<SampleRank>, size: usize, expected: Option<usize>) -> CorankReport {
    let coranks: Vec<usize> = per.iter().map(|s| size - s.rank).collect();
    let mut seen = coranks.clone();
    seen.sort_unstable();
    seen.dedup();
    let k = coranks[0];
    let constant = seen.len() == 1;
    let witness = match expected {
        Some(e) => coranks.iter().position(|c| *c != e),
        None => coranks.iter().position(|c| *c != k),
    }
    .map(|i| per[i].clone());
    CorankReport {
        k,
        constant,
        pass: constant && expected == Some(k),
        expected,
        values_seen: seen,
        witness,
    }
}

/// `2m − n` when it is non-negative.
pub fn expected_corank(system: &SystemSpec) -> Option<usize> {
    (2 * system.m).checked_sub(system.n())
}

/// Corank: `s` has constant corank `2m − n`.
pub fn corank_check(system: &SystemSpec, samples: &[PhasePoint], policy: &RankPolicy) -> Result<CorankReport, VerifyError> {
    require_samples(samples)?;
    let per: Vec<SampleRank> = samples
        .par_iter()
        .map(|x| {
            let s = structure_matrix(system, x)?;
            let (rank, sv) = numerical_rank(&s.matrix(), policy);
            Ok(SampleRank {
                point: s.point,
                singular_values: sv,
                rank,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(corank_report(per, system.n(), expected_corank(system)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub max_bracket: f64,
    pub tol: f64,
    pub witness: Option<Vec<f64>>,
    pub independence: RankReport,
    pub pass: bool,
}

/// Involution: `m` independent integrals with pairwise vanishing brackets.
pub fn involution_check(
    system: &SystemSpec,
    samples: &[PhasePoint],
    policy: &RankPolicy,
    tol: f64,
) -> Result<InvolutionReport, VerifyError> {
    if system.n() != system.m {
        return Err(VerifyError::WrongCount {
            n: system.n(),
            m: system.m,
        });
    }
    require_samples(samples)?;
    let per: Vec<(f64, Vec<f64>)> = samples
        .par_iter()
        .map(|x| {
            let s = structure_matrix(system, x)?;
            let max = s.values.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
            Ok((max, s.point))
        })
        .collect::<Result<_, EvalError>>()?;
    let max_bracket = per.iter().fold(0.0_f64, |a, (v, _)| a.max(*v));
    let witness = per.iter().find(|(v, _)| !(*v < tol)).map(|(_, p)| p.clone());
    let independence = independence_check(system, samples, policy)?;
    Ok(InvolutionReport {
        pass: witness.is_none() && independence.pass,
        max_bracket,
        tol,
        witness,
        independence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `(name, max |∂_tΦα + {ℋ, Φα}_V|)` per integral.
    pub per_integral: Vec<(String, f64)>,
    pub max: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn integrals_residual(system: &SystemSpec, samples: &[PhasePoint], threshold: f64) -> Result<ResidualReport, VerifyError> {
    require_samples(samples)?;
    let per: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|x| {
            system
                .integrals
                .iter()
                .map(|f| lie_derivative(system, f, x).map(f64::abs))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, EvalError>>()?;
    let per_integral: Vec<(String, f64)> = system
        .integrals
        .iter()
        .enumerate()
        .map(|(a, f)| (f.name().to_string(), per.iter().fold(0.0_f64, |m, r| m.max(r[a]))))
        .collect();
    let max = per_integral.iter().fold(0.0_f64, |m, (_, v)| m.max(*v));
    Ok(ResidualReport {
        pass: max < threshold,
        per_integral,
        max,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedReport {
    /// Max `|{ℋ*, ζ*Φα}|` over samples and α.
    pub max_s0: f64,
    pub s0_pass: bool,
    pub corank: CorankReport,
    pub pass: bool,
}

/// On T*Q: `s0α = {ℋ*, ζ*Φα}` must vanish and the bordered matrix
/// `(s0α; sαβ)` must have constant corank `2m + 1 − n`.
pub fn lifted_report(
    system: &SystemSpec,
    samples: &[ExtendedPoint],
    policy: &RankPolicy,
    tol: f64,
) -> Result<LiftedReport, VerifyError> {
    require_samples(samples)?;
    let lifted = LiftedSystem::new(system);
    let m = system.m;
    let mut fields = vec![&lifted.hstar];
    fields.extend(lifted.lifted_integrals());
    let size = fields.len();
    let per: Vec<(f64, SampleRank)> = samples
        .par_iter()
        .map(|x| {
            let c = x.coords();
            let grads = fields
                .iter()
                .map(|f| f.dual1(&c).map(|d| d.grad))
                .collect::<Result<Vec<_>, _>>()?;
            let mut mat = DMatrix::zeros(size, size);
            for a in 0..size {
                for b in a + 1..size {
                    let s = extended_bracket_from_grads(m, &grads[a], &grads[b]);
                    mat[(a, b)] = s;
                    mat[(b, a)] = -s;
                }
            }
            let s0 = (1..size).fold(0.0_f64, |acc, b| acc.max(mat[(0, b)].abs()));
            let (rank, sv) = numerical_rank(&mat, policy);
            Ok((
                s0,
                SampleRank {
                    point: c,
                    singular_values: sv,
                    rank,
                },
            ))
        })
        .collect::<Result<_, EvalError>>()?;
    let max_s0 = per.iter().fold(0.0_f64, |a, (s, _)| a.max(*s));
    let expected = (2 * m + 1).checked_sub(system.n());
    let corank = corank_report(per.into_iter().map(|(_, r)| r).collect(), size, expected);
    let s0_pass = max_s0 < tol;
    Ok(LiftedReport {
        pass: s0_pass && corank.pass,
        max_s0,
        s0_pass,
        corank,
    })
}

/// Pairwise extended brackets of `(ℋ*, ζ*F₁, …, ζ*F_m)`; the largest magnitude.
pub fn lifted_involution_residual(system: &SystemSpec, samples: &[ExtendedPoint]) -> Result<f64, VerifyError> {
    let lifted = LiftedSystem::new(system);
    let mut fields = vec![&lifted.hstar];
    fields.extend(lifted.lifted_integrals());
    let maxes = samples
        .par_iter()
        .map(|x| {
            let c = x.coords();
            let grads = fields
                .iter()
                .map(|f| f.dual1(&c).map(|d| d.grad))
                .collect::<Result<Vec<_>, _>>()?;
            let mut max = 0.0_f64;
            for a in 0..grads.len() {
                for b in a + 1..grads.len() {
                    max = max.max(extended_bracket_from_grads(system.m, &grads[a], &grads[b]).abs());
                }
            }
            Ok(max)
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;
    Ok(maxes.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Independence,
    Closure,
    Corank,
    Involution,
    Residuals,
    Lifted,
    Equivalence,
    Chart,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Independence,
        Check::Closure,
        Check::Corank,
        Check::Involution,
        Check::Residuals,
        Check::Lifted,
        Check::Equivalence,
        Check::Chart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Independence => "independence",
            Check::Closure => "closure",
            Check::Corank => "corank",
            Check::Involution => "involution",
            Check::Residuals => "residuals",
            Check::Lifted => "lifted",
            Check::Equivalence => "equivalence",
            Check::Chart => "chart",
        }
    }

    pub fn from_name(s: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub sampling: SamplingConfig,
    pub policy: RankPolicy,
    pub residual_tol: f64,
    pub bracket_tol: f64,
    /// Only the integrability checks are run here; equivalence and chart
    /// belong to the dynamics and action-angle layers.
    pub checks: Vec<Check>,
}

impl VerifyConfig {
    pub fn new(m: usize) -> Self {
        VerifyConfig {
            sampling: SamplingConfig::new(m),
            policy: RankPolicy::default(),
            residual_tol: 1e-10,
            bracket_tol: 1e-10,
            checks: vec![
                Check::Independence,
                Check::Closure,
                Check::Corank,
                Check::Residuals,
                Check::Lifted,
            ],
        }
    }

    fn wants(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierVerdict {
    pub schema: u32,
    pub system: String,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub sample_count: usize,
    /// `2m − n`; absent when `n > 2m`.
    pub expected_k: Option<usize>,
    /// `m ≤ n < 2m`, or `n = m` for the involution check.
    pub count_ok: bool,
    pub evidence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independence: Option<RankReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<ClosureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corank: Option<CorankReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub involution: Option<InvolutionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrals_residual: Option<ResidualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifted: Option<LiftedReport>,
    pub pass: bool,
}

impl VerifierVerdict {
    /// Names of requested checks that failed.
    pub fn failed_checks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut note = |c: Check, pass: Option<bool>| {
            if pass == Some(false) {
                out.push(c.name());
            }
        };
        note(Check::Independence, self.independence.as_ref().map(|r| r.pass));
        note(Check::Closure, self.closure.as_ref().map(|r| r.pass));
        note(Check::Corank, self.corank.as_ref().map(|r| r.pass));
        note(Check::Involution, self.involution.as_ref().map(|r| r.pass));
        note(Check::Residuals, self.integrals_residual.as_ref().map(|r| r.pass));
        note(Check::Lifted, self.lifted.as_ref().map(|r| r.pass));
        out
    }
}

/// Runs the requested integrability checks on freshly drawn samples.
pub fn verify(system: &SystemSpec, cfg: &VerifyConfig) -> Result<VerifierVerdict, VerifyError> {
    let samples = sample_points(&cfg.sampling)?;
    let (m, n) = (system.m, system.n());
    let independence = cfg
        .wants(Check::Independence)
        .then(|| independence_check(system, &samples, &cfg.policy))
        .transpose()?;
    let closure = cfg
        .wants(Check::Closure)
        .then(|| closure_check(system, &samples, &cfg.policy))
        .transpose()?;
    let corank = cfg
        .wants(Check::Corank)
        .then(|| corank_check(system, &samples, &cfg.policy))
        .transpose()?;
    let involution = cfg
        .wants(Check::Involution)
        .then(|| involution_check(system, &samples, &cfg.policy, cfg.bracket_tol))
        .transpose()?;
    let integrals_residual = cfg
        .wants(Check::Residuals)
        .then(|| integrals_residual(system, &samples, cfg.residual_tol))
        .transpose()?;
    let lifted = if cfg.wants(Check::Lifted) {
        let ext = sample_extended_points(&cfg.sampling)?;
        Some(lifted_report(system, &ext, &cfg.policy, cfg.bracket_tol)?)
    } else {
        None
    };
    let count_ok = if cfg.wants(Check::Corank) {
        m <= n && n < 2 * m
    } else if cfg.wants(Check::Involution) {
        n == m
    } else {
        true
    };
    let mut verdict = VerifierVerdict {
        schema: 1,
        system: system.name.clone(),
        m,
        n,
        seed: cfg.sampling.seed,
        sample_count: samples.len(),
        expected_k: expected_corank(system),
        count_ok,
        evidence: "sampled".into(),
        independence,
        closure,
        corank,
        involution,
        integrals_residual,
        lifted,
        pass: false,
    };
    verdict.pass = count_ok && verdict.failed_checks().is_empty();
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free2d() -> SystemSpec {
        SystemSpec::parse("free2d", 2, "(p1^2+p2^2)/2", &["p1", "p2", "q1 - t*p1"]).unwrap()
    }

    #[test]
    fn free2d_jacobian() {
        let x = PhasePoint::new(1.0, vec![0.0, 0.0], vec![2.0, 0.0]);
        let j = full_jacobian(&free2d(), &x).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            5,
            &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -2.0, 1.0, 0.0, -1.0, 0.0],
        );
        assert_eq!(j, expected);
        let (rank, _) = numerical_rank(&j, &RankPolicy::default());
        assert_eq!(rank, 3);
    }

    #[test]
    fn duplicated_rows_have_rank_one() {
        let s = SystemSpec::parse("dup", 2, "0", &["p1", "p1"]).unwrap();
        let x = PhasePoint::new(0.0, vec![1.0, 2.0], vec![3.0, 4.0]);
        assert_eq!(numerical_rank(&full_jacobian(&s, &x).unwrap(), &RankPolicy::default()).0, 1);
    }

    #[test]
    fn free2d_structure_matrix() {
        let x = PhasePoint::new(0.7, vec![0.1, -0.4], vec![1.3, 0.2]);
        let s = structure_matrix(&free2d(), &x).unwrap();
        assert_eq!(s.values, vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]);
    }

    #[test]
    fn osc2d_structure_matrix_at_reference_point() {
        let s = SystemSpec::parse(
            "osc2d",
            2,
            "(p1^2+q1^2)/2 + (p2^2+q2^2)/2",
            &["(p1^2+q1^2)/2", "p1*p2 + q1*q2", "q1*p2 - q2*p1"],
        )
        .unwrap();
        let x = PhasePoint::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]);
        let sm = structure_matrix(&s, &x).unwrap();
        assert_eq!(sm.phi, vec![0.5, 0.0, 1.0]);
        assert_eq!(sm.values, vec![vec![0.0, -1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
    }

    #[test]
    fn free2d_passes_everything() {
        let v = verify(&free2d(), &VerifyConfig::new(2)).unwrap();
        assert!(v.pass, "{:?}", v.failed_checks());
        assert_eq!(v.corank.as_ref().unwrap().k, 1);
        assert_eq!(v.lifted.as_ref().unwrap().corank.k, 2);
        assert_eq!(v.integrals_residual.as_ref().unwrap().max, 0.0);
    }

    #[test]
    fn broken_closure_has_witness() {
        let s = SystemSpec::parse("broken", 2, "0", &["q1", "p1*q2"]).unwrap();
        let samples = sample_points(&SamplingConfig::new(2)).unwrap();
        let r = closure_check(&s, &samples, &RankPolicy::default()).unwrap();
        assert!(!r.pass);
        let w = r.pairs[0].witness.as_ref().unwrap();
        assert_eq!(w.rank, 3);
    }

    #[test]
    fn involution_examples() {
        let samples = sample_points(&SamplingConfig::new(2)).unwrap();
        let p = RankPolicy::default();
        let s = SystemSpec::parse("free", 2, "(p1^2+p2^2)/2", &["p1", "p2"]).unwrap();
        assert!(involution_check(&s, &samples, &p, 1e-10).unwrap().pass);
        let s = SystemSpec::parse("osc", 2, "(p1^2+q1^2)/2 + (p2^2+q2^2)/2", &["(p1^2+q1^2)/2", "q1*p2 - q2*p1"]).unwrap();
        assert!(!involution_check(&s, &samples, &p, 1e-10).unwrap().pass);
        assert!(matches!(
            involution_check(&free2d(), &samples, &p, 1e-10),
            Err(VerifyError::WrongCount { n: 3, m: 2 })
        ));
    }

    #[test]
    fn residual_of_non_integral() {
        let s = SystemSpec::parse("k", 1, "p1^2/2", &["q1"]).unwrap();
        let samples = sample_points(&SamplingConfig::new(1)).unwrap();
        let r = integrals_residual(&s, &samples, 1e-10).unwrap();
        assert!(!r.pass);
        let max_p = samples.iter().fold(0.0_f64, |a, x| a.max(x.p[0].abs()));
        assert_eq!(r.max, max_p);
    }
}
