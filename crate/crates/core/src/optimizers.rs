//! StableOpt, its four baselines, confidence bounds and regret accounting.
//!
//! Every argmax/argmin over domain indices breaks ties towards the lowest
//! index, so runs are reproducible bit-for-bit.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gp::{DomainPosterior, GpPosterior};
use crate::kernels::{gram, KernelSpec};
use crate::linalg::CholeskyFactor;
use crate::robust_sets::{FiniteDomain, PerturbationSet};
use crate::testbed::ObjectiveTable;

/// Exploration schedule `β_t^{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BetaSchedule {
    /// `β_t = (B + σ √(2(γ_{t−1} + ln(e/ξ))))²`. Without `gamma_bound` the
    /// realized information gain of the points observed so far stands in
    /// for `γ_{t−1}`.
    Theoretical {
        rkhs_bound: f64,
        noise_std: f64,
        xi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_bound: Option<f64>,
    },
    Constant {
        root: f64,
    },
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaSchedule::Theoretical {
                rkhs_bound,
                noise_std,
                xi,
                gamma_bound,
            } => {
                if !(rkhs_bound > 0.0) {
                    return Err(invalid("rkhs_bound", "must be positive"));
                }
                if !(noise_std > 0.0) {
                    return Err(invalid("noise_std", "must be positive"));
                }
                if !(xi > 0.0 && xi < 1.0) {
                    return Err(invalid("xi", "must lie in (0, 1)"));
                }
                if gamma_bound.is_some_and(|g| !(g >= 0.0)) {
                    return Err(invalid("gamma_bound", "must be non-negative"));
                }
                Ok(())
            }
            BetaSchedule::Constant { root } => {
                if !(root > 0.0) {
                    return Err(invalid("root", "must be positive"));
                }
                Ok(())
            }
        }
    }

    /// `β_t^{1/2}` given the information gain `γ_{t−1}`.
    pub fn root(&self, gamma_prev: f64) -> f64 {
        match *self {
            BetaSchedule::Theoretical {
                rkhs_bound,
                noise_std,
                xi,
                gamma_bound,
            } => {
                let gamma = gamma_bound.unwrap_or(gamma_prev);
                rkhs_bound + noise_std * (2.0 * (gamma + (std::f64::consts::E / xi).ln())).sqrt()
            }
            BetaSchedule::Constant { root } => root,
        }
    }
}

/// Per-point `(lcb, ucb)` at one round.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceField {
    pub lcb: Vec<f64>,
    pub ucb: Vec<f64>,
    pub beta_root: f64,
}

impl ConfidenceField {
    pub fn from_moments(means: &[f64], variances: &[f64], beta_root: f64) -> Self {
        let (lcb, ucb) = means
            .iter()
            .zip(variances)
            .map(|(m, v)| {
                let w = beta_root * v.sqrt();
                (m - w, m + w)
            })
            .unzip();
        ConfidenceField { lcb, ucb, beta_root }
    }

    pub fn len(&self) -> usize {
        self.lcb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lcb.is_empty()
    }

    /// Elementwise intersection: `lcb ← max`, `ucb ← min`.
    pub fn intersect(&mut self, other: &ConfidenceField) {
        for (a, b) in self.lcb.iter_mut().zip(&other.lcb) {
            *a = a.max(*b);
        }
        for (a, b) in self.ucb.iter_mut().zip(&other.ucb) {
            *a = a.min(*b);
        }
    }

    /// Whether `lcb ≤ f ≤ ucb` at every point.
    pub fn contains(&self, values: &[f64]) -> bool {
        self.lcb
            .iter()
            .zip(&self.ucb)
            .zip(values)
            .all(|((l, u), f)| l <= f && f <= u)
    }
}

/// Confidence bounds from `post` (holding `t − 1` observations) at round `t`.
pub fn confidence_field(
    post: &GpPosterior,
    domain: &FiniteDomain,
    schedule: &BetaSchedule,
    t: usize,
    gamma_prev: f64,
) -> Result<ConfidenceField> {
    if t == 0 {
        return Err(invalid("t", "rounds are numbered from 1"));
    }
    schedule.validate()?;
    let root = schedule.root(gamma_prev);
    let moments = post.mean_var_batch(&domain.points().collect::<Vec<_>>())?;
    let (means, vars): (Vec<f64>, Vec<f64>) = moments.into_iter().unzip();
    Ok(ConfidenceField::from_moments(&means, &vars, root))
}

fn check_field(field: &ConfidenceField, pset: &PerturbationSet) -> Result<()> {
    if field.len() != pset.len() {
        return Err(Error::DimensionMismatch {
            expected: pset.len(),
            found: field.len(),
        });
    }
    Ok(())
}

/// `x̃ = argmax_i min_{j∈N(i)} ucb(j)` and the pessimistic perturbation
/// target `argmin_{j∈N(x̃)} lcb(j)`.
pub fn stableopt_step(field: &ConfidenceField, pset: &PerturbationSet) -> Result<(usize, usize)> {
    check_field(field, pset)?;
    let (candidate, _) = pset.argmax_worst_case(&field.ucb);
    Ok((candidate, pset.argmin_within(candidate, &field.lcb)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[serde(rename = "stableopt")]
    StableOpt,
    GpUcb,
    #[serde(rename = "maximin-gp-ucb")]
    MaxiMinGpUcb,
    StableGpRandom,
    StableGpUcb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::StableOpt,
        Algorithm::GpUcb,
        Algorithm::MaxiMinGpUcb,
        Algorithm::StableGpRandom,
        Algorithm::StableGpUcb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::StableOpt => "stableopt",
            Algorithm::GpUcb => "gp-ucb",
            Algorithm::MaxiMinGpUcb => "maximin-gp-ucb",
            Algorithm::StableGpRandom => "stable-gp-random",
            Algorithm::StableGpUcb => "stable-gp-ucb",
        }
    }

    /// Fixed tag used to derive this algorithm's random stream.
    pub fn stream_tag(self) -> u64 {
        match self {
            Algorithm::StableOpt => 1,
            Algorithm::GpUcb => 2,
            Algorithm::MaxiMinGpUcb => 3,
            Algorithm::StableGpRandom => 4,
            Algorithm::StableGpUcb => 5,
        }
    }

    /// Whether the reported point is chosen by a lower-confidence-bound rule
    /// (as opposed to reporting the latest sampled point).
    pub fn reports_by_lcb(self) -> bool {
        matches!(
            self,
            Algorithm::StableOpt | Algorithm::StableGpRandom | Algorithm::StableGpUcb
        )
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Sampled index of a baseline.
pub fn baseline_step(
    kind: Algorithm,
    field: &ConfidenceField,
    pset: &PerturbationSet,
    rng: &mut impl Rng,
) -> Result<usize> {
    check_field(field, pset)?;
    match kind {
        Algorithm::GpUcb | Algorithm::StableGpUcb => Ok(argmax(&field.ucb)),
        Algorithm::MaxiMinGpUcb => Ok(pset.argmax_worst_case(&field.ucb).0),
        Algorithm::StableGpRandom => Ok(rng.random_range(0..pset.len())),
        Algorithm::StableOpt => Err(Error::Unsupported(
            "StableOpt is not a baseline; use stableopt_step".into(),
        )),
    }
}

/// One round's choice: `candidate` is `x̃_t` (StableOpt) or the sampled
/// point (baselines); `target` is the perturbed point actually sampled.
fn select(
    algorithm: Algorithm,
    field: &ConfidenceField,
    pset: &PerturbationSet,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, usize)> {
    match algorithm {
        Algorithm::StableOpt => stableopt_step(field, pset),
        other => {
            let i = baseline_step(other, field, pset, rng)?;
            Ok((i, i))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportingRule {
    /// Candidate `τ` scored with its own round's bound `lcb_{τ−1}`.
    #[default]
    PerRoundLcb,
    /// All candidates scored with the latest bound after intersecting every
    /// field seen so far.
    CommonLcbMonotone,
}

/// Picks the reported point among `candidates` and returns `(index, t*)`
/// with `t*` 1-based.
///
/// `fields[τ]` is the field in force when candidate `τ` (0-based) was
/// chosen. Under [`ReportingRule::CommonLcbMonotone`] every field in
/// `fields` (which may include one more, post-update field) is intersected
/// and the result scores all candidates. Ties go to the earliest round.
pub fn report_point(
    candidates: &[usize],
    fields: &[ConfidenceField],
    pset: &PerturbationSet,
    rule: ReportingRule,
) -> Result<(usize, usize)> {
    if candidates.is_empty() {
        return Err(Error::Empty("round history"));
    }
    if fields.len() < candidates.len() {
        return Err(Error::DimensionMismatch {
            expected: candidates.len(),
            found: fields.len(),
        });
    }
    let scores: Vec<f64> = match rule {
        ReportingRule::PerRoundLcb => candidates
            .iter()
            .zip(fields)
            .map(|(&c, f)| pset.worst_case(c, &f.lcb))
            .collect(),
        ReportingRule::CommonLcbMonotone => {
            let mut merged = fields[0].clone();
            for f in &fields[1..] {
                merged.intersect(f);
            }
            candidates.iter().map(|&c| pset.worst_case(c, &merged.lcb)).collect()
        }
    };
    let t = argmax(&scores);
    Ok((candidates[t], t + 1))
}

/// `½ log det(I + σ⁻² K)` for the given points.
pub fn information_gain<P: AsRef<[f64]>>(kernel: &KernelSpec, points: &[P], noise_variance: f64) -> Result<f64> {
    if !(noise_variance > 0.0) {
        return Err(invalid("noise_variance", "must be positive"));
    }
    let mut k = gram(kernel, points)?;
    let n = k.nrows();
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] /= noise_variance;
        }
        k[(i, i)] += 1.0;
    }
    Ok(0.5 * CholeskyFactor::factorize(&k, 0.0)?.log_det())
}

/// `r_ε(reported) = max_i min_{N(i)} f − min_{N(reported)} f`.
pub fn eps_regret(pset: &PerturbationSet, values: &[f64], reported: usize) -> Result<f64> {
    if values.len() != pset.len() {
        return Err(Error::DimensionMismatch {
            expected: pset.len(),
            found: values.len(),
        });
    }
    if reported >= pset.len() {
        return Err(Error::IndexOutOfRange {
            index: reported,
            len: pset.len(),
        });
    }
    let (_, best) = pset.argmax_worst_case(values);
    Ok(best - pset.worst_case(reported, values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub kernel: KernelSpec,
    pub noise_std: f64,
    pub schedule: BetaSchedule,
    pub rounds: usize,
    #[serde(default)]
    pub reporting: ReportingRule,
    pub seed: u64,
}

/// One round of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundEntry {
    pub round: usize,
    /// `x̃_t` for StableOpt, the sampled point for baselines.
    pub candidate: usize,
    /// Perturbation target `x̃_t + δ_t` (equals `candidate` for baselines).
    pub target: usize,
    pub sampled: usize,
    pub observation: f64,
    pub reported: usize,
    pub t_star: usize,
    /// `min_{N(candidate)} lcb_{t−1}`.
    pub candidate_score: f64,
    pub beta_root: f64,
    /// `σ_{t−1}(sampled)`.
    pub sampled_std: f64,
    /// `ucb_{t−1} − lcb_{t−1}` at the sampled point.
    pub sampled_width: f64,
    /// Realized information gain of all observations after this round.
    pub information_gain: f64,
    /// The following need ground truth.
    pub eps_regret: Option<f64>,
    pub candidate_regret: Option<f64>,
    /// `max–min f − min_{N(candidate)} lcb_{t−1}`.
    pub pessimistic_regret: Option<f64>,
    pub field_contains_truth: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub rounds: Vec<RoundEntry>,
}

/// Header of [`RunRecord::write_csv`].
pub const RUN_CSV_HEADER: &str = "round,candidate,target,sampled,observation,reported,t_star,candidate_score,beta_root,sampled_std,information_gain,eps_regret";

impl RunRecord {
    pub fn final_report(&self) -> Option<(usize, usize)> {
        self.rounds.last().map(|r| (r.reported, r.t_star))
    }

    pub fn regret_curve(&self) -> Option<Vec<f64>> {
        self.rounds.iter().map(|r| r.eps_regret).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "{RUN_CSV_HEADER}").map_err(io)?;
        for r in &self.rounds {
            let regret = r.eps_regret.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.round,
                r.candidate,
                r.target,
                r.sampled,
                r.observation,
                r.reported,
                r.t_star,
                r.candidate_score,
                r.beta_root,
                r.sampled_std,
                r.information_gain,
                regret
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// What an observer sees at the moment a round's point has been chosen,
/// before the observation is made.
pub struct RoundView<'r, 'a> {
    pub round: usize,
    pub posterior: &'r DomainPosterior<'a>,
    pub field: &'r ConfidenceField,
    pub candidate: usize,
    pub target: usize,
}

/// Runs `config.rounds` rounds of the configured algorithm.
///
/// `init` observations are absorbed before round 1. `objective` returns the
/// (noisy) observation at a domain index. With `truth`, every round also
/// records ε-regret and the instrumentation used by the regret analysis.
pub fn run(
    config: &RunConfig,
    pset: &PerturbationSet,
    init: &[(usize, f64)],
    objective: &mut dyn FnMut(usize) -> f64,
    truth: Option<&ObjectiveTable>,
) -> Result<RunRecord> {
    run_observed(config, pset, init, objective, truth, &mut |_| {})
}

pub fn run_observed(
    config: &RunConfig,
    pset: &PerturbationSet,
    init: &[(usize, f64)],
    objective: &mut dyn FnMut(usize) -> f64,
    truth: Option<&ObjectiveTable>,
    observer: &mut dyn FnMut(&RoundView<'_, '_>),
) -> Result<RunRecord> {
    if config.rounds == 0 {
        return Err(invalid("rounds", "must be at least 1"));
    }
    if !(config.noise_std > 0.0) {
        return Err(invalid("noise_std", "must be positive"));
    }
    config.schedule.validate()?;
    if let Some(t) = truth {
        if t.values().len() != pset.len() {
            return Err(Error::DimensionMismatch {
                expected: pset.len(),
                found: t.values().len(),
            });
        }
    }
    let noise_var = config.noise_std * config.noise_std;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut posterior = DomainPosterior::new(&config.kernel, noise_var, pset.domain())?;
    let mut gain = 0.0;
    for &(i, y) in init {
        gain += 0.5 * (posterior.variance_checked(i)? / noise_var).ln_1p();
        posterior.observe(i, y)?;
    }

    let mut report = ReportTracker::new(config.reporting, config.algorithm);
    let mut rounds = Vec::with_capacity(config.rounds);
    let mut field =
        ConfidenceField::from_moments(posterior.means(), &posterior.variances(), config.schedule.root(gain));
    for t in 1..=config.rounds {
        let (candidate, target) = select(config.algorithm, &field, pset, &mut rng)?;
        let sampled = target;
        observer(&RoundView {
            round: t,
            posterior: &posterior,
            field: &field,
            candidate,
            target,
        });
        let candidate_score = pset.worst_case(candidate, &field.lcb);
        let sampled_var = posterior.variance(sampled);
        let sampled_width = field.ucb[sampled] - field.lcb[sampled];
        let contains = truth.map(|tr| field.contains(tr.values()));
        let pessimistic = truth.map(|tr| tr.robust_optimum().1 - candidate_score);
        let candidate_regret = truth.map(|tr| tr.robust_optimum().1 - tr.robust_values()[candidate]);
        let beta_root = field.beta_root;

        let y = objective(sampled);
        gain += 0.5 * (sampled_var / noise_var).ln_1p();
        posterior.observe(sampled, y)?;
        let next = ConfidenceField::from_moments(posterior.means(), &posterior.variances(), config.schedule.root(gain));
        let (reported, t_star) = report.record(candidate, candidate_score, &field, &next, pset);
        let eps_regret = truth.map(|tr| tr.robust_optimum().1 - tr.robust_values()[reported]);

        rounds.push(RoundEntry {
            round: t,
            candidate,
            target,
            sampled,
            observation: y,
            reported,
            t_star,
            candidate_score,
            beta_root,
            sampled_std: sampled_var.sqrt(),
            sampled_width,
            information_gain: gain,
            eps_regret,
            candidate_regret,
            pessimistic_regret: pessimistic,
            field_contains_truth: contains,
        });
        field = next;
    }
    Ok(RunRecord {
        algorithm: config.algorithm,
        rounds,
    })
}

/// Incremental form of [`report_point`] used inside the run loop.
struct ReportTracker {
    rule: ReportingRule,
    by_lcb: bool,
    candidates: Vec<usize>,
    scores: Vec<f64>,
    merged: Option<ConfidenceField>,
}

impl ReportTracker {
    fn new(rule: ReportingRule, algorithm: Algorithm) -> Self {
        ReportTracker {
            rule,
            by_lcb: algorithm.reports_by_lcb(),
            candidates: Vec::new(),
            scores: Vec::new(),
            merged: None,
        }
    }

    fn record(
        &mut self,
        candidate: usize,
        score: f64,
        field: &ConfidenceField,
        next: &ConfidenceField,
        pset: &PerturbationSet,
    ) -> (usize, usize) {
        self.candidates.push(candidate);
        if !self.by_lcb {
            return (candidate, self.candidates.len());
        }
        match self.rule {
            ReportingRule::PerRoundLcb => self.scores.push(score),
            ReportingRule::CommonLcbMonotone => {
                let merged = self.merged.get_or_insert_with(|| field.clone());
                merged.intersect(field);
                merged.intersect(next);
                let lcb = &merged.lcb;
                self.scores = self.candidates.iter().map(|&c| pset.worst_case(c, lcb)).collect();
            }
        }
        let t = argmax(&self.scores);
        (self.candidates[t], t + 1)
    }
}

impl DomainPosterior<'_> {
    fn variance_checked(&self, i: usize) -> Result<f64> {
        if i >= self.domain().len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.domain().len(),
            });
        }
        Ok(self.variance(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust_sets::{build_neighborhoods, DistanceSpec};

    fn line_pset(n: usize, eps: f64) -> PerturbationSet {
        build_neighborhoods(FiniteDomain::grid(&[(0.0, 1.0)], &[n]).unwrap(), DistanceSpec::L2, eps).unwrap()
    }

    fn field(ucb: &[f64], lcb: &[f64]) -> ConfidenceField {
        ConfidenceField {
            lcb: lcb.to_vec(),
            ucb: ucb.to_vec(),
            beta_root: 1.0,
        }
    }

    #[test]
    fn prior_field_with_constant_beta() {
        let ps = line_pset(7, 0.1);
        let post = GpPosterior::prior(&KernelSpec::se(0.3), 0.01).unwrap();
        let f = confidence_field(&post, ps.domain(), &BetaSchedule::Constant { root: 2.0 }, 1, 0.0).unwrap();
        assert!(f.ucb.iter().all(|u| *u == 2.0));
        assert!(f.lcb.iter().all(|l| *l == -2.0));
        assert!(confidence_field(&post, ps.domain(), &BetaSchedule::Constant { root: 2.0 }, 0, 0.0).is_err());
    }

    #[test]
    fn theoretical_root_hand_value() {
        let s = BetaSchedule::Theoretical {
            rkhs_bound: 1.0,
            noise_std: 0.1,
            xi: 0.1,
            gamma_bound: None,
        };
        // 1 + 0.1·√(2·(1 + ln 10)), evaluated by hand
        assert!((s.root(0.0) - 1.257_005_256_482_977).abs() < 1e-12);
        assert!(s.root(1.0) > s.root(0.0));
        let fixed = BetaSchedule::Theoretical {
            rkhs_bound: 1.0,
            noise_std: 0.1,
            xi: 0.1,
            gamma_bound: Some(5.0),
        };
        assert_eq!(fixed.root(0.0), fixed.root(100.0));
        assert!(BetaSchedule::Theoretical {
            rkhs_bound: 1.0,
            noise_std: 0.1,
            xi: 1.0,
            gamma_bound: None
        }
        .validate()
        .is_err());
    }

    #[test]
    fn singleton_neighbourhoods_collapse_to_ucb() {
        let ps = line_pset(5, 0.0);
        let f = field(&[0.1, 0.9, 0.3, 0.9, 0.0], &[0.0, 0.2, 0.1, 0.5, -1.0]);
        assert_eq!(stableopt_step(&f, &ps).unwrap(), (1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(baseline_step(Algorithm::GpUcb, &f, &ps, &mut rng).unwrap(), 1);
        assert!(baseline_step(Algorithm::StableOpt, &f, &ps, &mut rng).is_err());
    }

    #[test]
    fn constant_ucb_breaks_ties_to_index_zero() {
        let ps = line_pset(6, 0.3);
        let f = field(&[1.0; 6], &[0.0; 6]);
        assert_eq!(stableopt_step(&f, &ps).unwrap(), (0, 0));
    }

    #[test]
    fn report_hand_table() {
        let ps = line_pset(3, 0.0);
        let mk = |v: f64| field(&[v + 1.0; 3], &[v; 3]);
        let fields = vec![mk(-1.0), mk(0.4), mk(0.2)];
        assert_eq!(
            report_point(&[0, 1, 2], &fields, &ps, ReportingRule::PerRoundLcb).unwrap(),
            (1, 2)
        );
        assert_eq!(
            report_point(&[2], &fields[..1], &ps, ReportingRule::PerRoundLcb).unwrap(),
            (2, 1)
        );
        assert!(report_point(&[], &fields, &ps, ReportingRule::PerRoundLcb).is_err());
    }

    #[test]
    fn single_point_information_gain() {
        let g = information_gain(&KernelSpec::se(1.0), &[vec![0.3]], 0.01).unwrap();
        assert!((g - 0.5 * 101f64.ln()).abs() < 1e-14);
        let empty: Vec<Vec<f64>> = vec![];
        assert_eq!(information_gain(&KernelSpec::se(1.0), &empty, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn regret_zero_at_robust_optimum_and_simple_regret_at_zero_eps() {
        let vals = [0.0, 3.0, 1.0, 2.5, 2.4];
        let robust = line_pset(5, 0.25);
        let (best, _) = robust.argmax_worst_case(&vals);
        assert_eq!(eps_regret(&robust, &vals, best).unwrap(), 0.0);
        let plain = line_pset(5, 0.0);
        assert!((eps_regret(&plain, &vals, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!(eps_regret(&plain, &vals, 5).is_err());
    }

    #[test]
    fn first_round_stableopt_on_prior_is_index_zero() {
        let ps = line_pset(10, 0.2);
        let cfg = RunConfig {
            algorithm: Algorithm::StableOpt,
            kernel: KernelSpec::se(0.2),
            noise_std: 0.1,
            schedule: BetaSchedule::Constant { root: 2.0 },
            rounds: 1,
            reporting: ReportingRule::PerRoundLcb,
            seed: 0,
        };
        let rec = run(&cfg, &ps, &[], &mut |_| 0.0, None).unwrap();
        assert_eq!(rec.rounds[0].candidate, 0);
        assert_eq!(rec.final_report(), Some((0, 1)));
        assert!(run(&RunConfig { rounds: 0, ..cfg }, &ps, &[], &mut |_| 0.0, None).is_err());
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ucb".parse::<Algorithm>().is_err());
    }
}
