//! Seeded synthetic panels, estimator-recovery experiments, and the
//! item-resampling bootstrap.
//!
//! The generator realizes the crossed random-effects model directly:
//! every score is the grand mean plus independent zero-mean normal draws
//! for the seven effects. All randomness flows from ChaCha streams derived
//! deterministically from the caller's seed, so identical seeds give
//! bit-identical output regardless of execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classical::{pearson, sample_variance};
use crate::data::ResponseCube;
use crate::error::{Error, Result};
use crate::gstudy::{self, Components, Effect};

/// Specification of a synthetic crossed panel with known true components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub group: String,
    pub n_p: usize,
    pub n_i: usize,
    pub n_o: usize,
    pub true_components: Components,
    pub grand_mean: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        if self.n_p == 0 || self.n_i == 0 || self.n_o == 0 {
            return Err(Error::Domain(
                "generator dimensions must be at least 1".to_string(),
            ));
        }
        if !self.true_components.is_valid_variance_set() {
            return Err(Error::Domain(
                "true components must be finite and nonnegative".to_string(),
            ));
        }
        if !self.grand_mean.is_finite() {
            return Err(Error::Domain("grand mean must be finite".to_string()));
        }
        Ok(())
    }
}

/// SplitMix64 mix of a base seed and a counter; gives well-separated
/// deterministic sub-seeds for independent streams.
fn stream_seed(base: u64, counter: u64) -> u64 {
    let mut z = base.wrapping_add(counter.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct EffectDraws {
    person: Vec<f64>,
    item: Vec<f64>,
    occasion: Vec<f64>,
    person_item: Vec<f64>,
    person_occasion: Vec<f64>,
    item_occasion: Vec<f64>,
    residual: Vec<f64>,
}

fn draw_effects(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<EffectDraws> {
    let draw = |rng: &mut ChaCha8Rng, len: usize, variance: f64| -> Result<Vec<f64>> {
        let normal = Normal::new(0.0, variance.sqrt())
            .map_err(|e| Error::Domain(format!("invalid effect distribution: {e}")))?;
        Ok((0..len).map(|_| normal.sample(rng)).collect())
    };
    let c = &spec.true_components;
    Ok(EffectDraws {
        person: draw(rng, spec.n_p, c.person)?,
        item: draw(rng, spec.n_i, c.item)?,
        occasion: draw(rng, spec.n_o, c.occasion)?,
        person_item: draw(rng, spec.n_p * spec.n_i, c.person_item)?,
        person_occasion: draw(rng, spec.n_p * spec.n_o, c.person_occasion)?,
        item_occasion: draw(rng, spec.n_i * spec.n_o, c.occasion_item)?,
        residual: draw(rng, spec.n_p * spec.n_i * spec.n_o, c.residual)?,
    })
}

fn assemble(spec: &GeneratorSpec, draws: &EffectDraws) -> Result<ResponseCube> {
    let (n_p, n_i, n_o) = (spec.n_p, spec.n_i, spec.n_o);
    let mut scores = Vec::with_capacity(n_p * n_i * n_o);
    for p in 0..n_p {
        for i in 0..n_i {
            for o in 0..n_o {
                scores.push(
                    spec.grand_mean
                        + draws.person[p]
                        + draws.item[i]
                        + draws.occasion[o]
                        + draws.person_item[p * n_i + i]
                        + draws.person_occasion[p * n_o + o]
                        + draws.item_occasion[i * n_o + o]
                        + draws.residual[(p * n_i + i) * n_o + o],
                );
            }
        }
    }
    let width = spec.n_p.to_string().len().max(4);
    ResponseCube::new(
        spec.group.clone(),
        (1..=n_p).map(|p| format!("p{p:0width$}")).collect(),
        (1..=n_i as u32).collect(),
        (1..=n_o as u32).collect(),
        scores,
    )
}

/// Generate a synthetic cube. Deterministic given the spec's seed.
pub fn generate(spec: &GeneratorSpec) -> Result<ResponseCube> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws = draw_effects(spec, &mut rng)?;
    assemble(spec, &draws)
}

/// Round every score to the nearest integer and clamp into the scale
/// bounds; a coarse Likert realism mode, excluded from validation
/// tolerances.
pub fn discretize(cube: &ResponseCube, scale_min: f64, scale_max: f64) -> ResponseCube {
    cube.map_scores(|s| s.round().clamp(scale_min, scale_max))
}

/// Recovery diagnostics for one variance component.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComponentRecovery {
    pub truth: f64,
    pub mean_raw_estimate: f64,
    /// `mean_raw_estimate - truth`.
    pub bias: f64,
    /// Standard deviation of the raw estimates across replications.
    pub empirical_sd: f64,
    /// Mean of the normal-theory standard errors.
    pub mean_std_error: f64,
    /// `mean_std_error / empirical_sd`; 1.0 means calibrated.
    pub se_ratio: f64,
    /// Share of replications whose raw estimate +- 1.96 SE covers truth.
    pub coverage95: f64,
}

/// Estimator-recovery experiment summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub n_p: usize,
    pub n_i: usize,
    pub n_o: usize,
    pub replications: usize,
    pub seed: u64,
    pub person: ComponentRecovery,
    pub occasion: ComponentRecovery,
    pub item: ComponentRecovery,
    pub person_occasion: ComponentRecovery,
    pub person_item: ComponentRecovery,
    pub occasion_item: ComponentRecovery,
    pub residual: ComponentRecovery,
}

impl RecoveryReport {
    pub fn component(&self, effect: Effect) -> &ComponentRecovery {
        match effect {
            Effect::Person => &self.person,
            Effect::Occasion => &self.occasion,
            Effect::Item => &self.item,
            Effect::PersonOccasion => &self.person_occasion,
            Effect::PersonItem => &self.person_item,
            Effect::OccasionItem => &self.occasion_item,
            Effect::Residual => &self.residual,
        }
    }
}

/// Generate `replications` independent panels from the spec, estimate the
/// components of each, and summarize bias and standard-error calibration.
/// Replication streams derive from the spec seed, so results do not depend
/// on evaluation order.
pub fn recovery_experiment(spec: &GeneratorSpec, replications: usize) -> Result<RecoveryReport> {
    spec.validate()?;
    if replications < 2 {
        return Err(Error::Domain(
            "recovery experiment needs at least 2 replications".to_string(),
        ));
    }

    let mut raws: Vec<Vec<f64>> = vec![Vec::with_capacity(replications); Effect::ALL.len()];
    let mut std_errors: Vec<Vec<f64>> = vec![Vec::with_capacity(replications); Effect::ALL.len()];
    for replication in 0..replications {
        let replication_spec = GeneratorSpec {
            seed: stream_seed(spec.seed, replication as u64),
            ..spec.clone()
        };
        let cube = generate(&replication_spec)?;
        let vc = gstudy::estimate_components(&gstudy::mean_squares(&cube)?);
        for (idx, effect) in Effect::ALL.iter().enumerate() {
            let component = vc.component(*effect);
            raws[idx].push(component.raw);
            std_errors[idx].push(component.std_error);
        }
    }

    let summarize = |idx: usize, effect: Effect| -> ComponentRecovery {
        let truth = spec.true_components.get(effect);
        let n = replications as f64;
        let mean_raw = raws[idx].iter().sum::<f64>() / n;
        let empirical_sd = sample_variance(&raws[idx]).sqrt();
        let mean_se = std_errors[idx].iter().sum::<f64>() / n;
        let covered = raws[idx]
            .iter()
            .zip(std_errors[idx].iter())
            .filter(|(raw, se)| (truth - **raw).abs() <= 1.96 * **se)
            .count();
        ComponentRecovery {
            truth,
            mean_raw_estimate: mean_raw,
            bias: mean_raw - truth,
            empirical_sd,
            mean_std_error: mean_se,
            se_ratio: if empirical_sd > 0.0 {
                mean_se / empirical_sd
            } else {
                f64::NAN
            },
            coverage95: covered as f64 / n,
        }
    };

    Ok(RecoveryReport {
        n_p: spec.n_p,
        n_i: spec.n_i,
        n_o: spec.n_o,
        replications,
        seed: spec.seed,
        person: summarize(0, Effect::Person),
        occasion: summarize(1, Effect::Occasion),
        item: summarize(2, Effect::Item),
        person_occasion: summarize(3, Effect::PersonOccasion),
        person_item: summarize(4, Effect::PersonItem),
        occasion_item: summarize(5, Effect::OccasionItem),
        residual: summarize(6, Effect::Residual),
    })
}

/// Item-resampling bootstrap configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub k_values: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
}

impl BootstrapSpec {
    pub fn new(k_values: Vec<usize>, replications: usize, seed: u64) -> Self {
        BootstrapSpec {
            k_values,
            replications,
            seed,
        }
    }
}

/// Bootstrap summary for one composite length k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub k: usize,
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
    /// Replications whose composite correlation was undefined
    /// (zero-variance composite) and were excluded.
    pub undefined_count: usize,
}

/// Parallel-forms bootstrap of scale reliability at one occasion.
///
/// Per replication, two independent k-item multisets are drawn with
/// replacement from the cube's items; each person's two mean-score
/// composites are correlated across persons. Reported per k: median and
/// quartiles of the correlations over replications. Each (k, replication)
/// pair has its own seed-derived stream, so output is independent of
/// evaluation order.
pub fn bootstrap_scale_reliability(
    cube: &ResponseCube,
    occasion: u32,
    spec: &BootstrapSpec,
) -> Result<Vec<BootstrapSummary>> {
    let o = cube
        .occasion_position(occasion)
        .ok_or(Error::OccasionNotFound { occasion })?;
    if cube.n_items() < 2 {
        return Err(Error::Design {
            facet: "items",
            needed: 2,
            got: cube.n_items(),
        });
    }
    if spec.k_values.is_empty() {
        return Err(Error::Domain("k_values must be nonempty".to_string()));
    }
    if spec.replications < 1 {
        return Err(Error::Domain(
            "bootstrap needs at least 1 replication".to_string(),
        ));
    }
    if spec.k_values.iter().any(|&k| k == 0) {
        return Err(Error::Domain("k values must be at least 1".to_string()));
    }

    let n_p = cube.n_persons();
    let n_i = cube.n_items();
    // Persons x items slice at the requested occasion.
    let wave: Vec<Vec<f64>> = (0..n_p)
        .map(|p| (0..n_i).map(|i| cube.score(p, i, o)).collect())
        .collect();

    let mut summaries = Vec::with_capacity(spec.k_values.len());
    for (k_index, &k) in spec.k_values.iter().enumerate() {
        let mut correlations = Vec::with_capacity(spec.replications);
        let mut undefined = 0usize;
        let k_seed = stream_seed(spec.seed, k_index as u64);
        for replication in 0..spec.replications {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(k_seed, replication as u64));
            let composite_a = composite(&wave, k, n_i, &mut rng);
            let composite_b = composite(&wave, k, n_i, &mut rng);
            match pearson(&composite_a, &composite_b) {
                Some(r) => correlations.push(r),
                None => undefined += 1,
            }
        }
        correlations.sort_by(|a, b| a.total_cmp(b));
        summaries.push(BootstrapSummary {
            k,
            median: quantile(&correlations, 0.5),
            q25: quantile(&correlations, 0.25),
            q75: quantile(&correlations, 0.75),
            undefined_count: undefined,
        });
    }
    Ok(summaries)
}

/// Mean score per person over a k-item multiset drawn with replacement.
fn composite(wave: &[Vec<f64>], k: usize, n_i: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let picks: Vec<usize> = (0..k).map(|_| rng.random_range(0..n_i)).collect();
    wave.iter()
        .map(|row| picks.iter().map(|&i| row[i]).sum::<f64>() / k as f64)
        .collect()
}

/// Linear-interpolation quantile of sorted data; `None` when empty.
fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        return Some(sorted[lo]);
    }
    let fraction = h - lo as f64;
    Some(sorted[lo] + fraction * (sorted[hi] - sorted[lo]))
}
