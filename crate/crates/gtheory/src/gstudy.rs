//! Variance-component estimation for the fully crossed two-facet random
//! design p x i x o.
//!
//! [`mean_squares`] computes the ANOVA decomposition from definitional
//! marginal-mean formulas (two-pass, no shortcut sums), and
//! [`estimate_components`] inverts the expected mean squares of the balanced
//! random model to obtain the seven variance components with normal-theory
//! standard errors. Negative raw estimates are truncated to zero for
//! reporting and all downstream use; the raw value is retained.

use serde::{Deserialize, Serialize};

use crate::data::ResponseCube;
use crate::error::{Error, Result};

/// The seven effects of the crossed p x i x o random design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Person,
    Occasion,
    Item,
    PersonOccasion,
    PersonItem,
    OccasionItem,
    /// Three-way interaction confounded with residual error (pio,e).
    Residual,
}

impl Effect {
    /// All effects in reporting order.
    pub const ALL: [Effect; 7] = [
        Effect::Person,
        Effect::Occasion,
        Effect::Item,
        Effect::PersonOccasion,
        Effect::PersonItem,
        Effect::OccasionItem,
        Effect::Residual,
    ];

    /// Row label used in table output.
    pub fn label(self) -> &'static str {
        match self {
            Effect::Person => "Person",
            Effect::Occasion => "Occasion",
            Effect::Item => "Item",
            Effect::PersonOccasion => "Person Occasion",
            Effect::PersonItem => "Person Item",
            Effect::OccasionItem => "Occasion Item",
            Effect::Residual => "Person Occasion Item",
        }
    }
}

/// Sum of squares, degrees of freedom, and mean square for one effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectEntry {
    pub sum_of_squares: f64,
    pub df: usize,
    pub mean_square: f64,
}

/// The ANOVA decomposition of a cube: per-effect sums of squares, degrees
/// of freedom, and mean squares, plus the grand mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSquaresTable {
    pub n_p: usize,
    pub n_i: usize,
    pub n_o: usize,
    pub grand_mean: f64,
    pub person: EffectEntry,
    pub occasion: EffectEntry,
    pub item: EffectEntry,
    pub person_occasion: EffectEntry,
    pub person_item: EffectEntry,
    pub occasion_item: EffectEntry,
    pub residual: EffectEntry,
}

impl MeanSquaresTable {
    pub fn entry(&self, effect: Effect) -> &EffectEntry {
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

    /// Total corrected sum of squares (sum over the seven effects).
    pub fn total_sum_of_squares(&self) -> f64 {
        Effect::ALL
            .iter()
            .map(|&e| self.entry(e).sum_of_squares)
            .sum()
    }
}

/// A set of seven variance values, one per effect. Used for truncated
/// estimates, raw estimates, standard errors, and simulation truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub person: f64,
    pub occasion: f64,
    pub item: f64,
    pub person_occasion: f64,
    pub person_item: f64,
    pub occasion_item: f64,
    pub residual: f64,
}

impl Components {
    pub const ZERO: Components = Components {
        person: 0.0,
        occasion: 0.0,
        item: 0.0,
        person_occasion: 0.0,
        person_item: 0.0,
        occasion_item: 0.0,
        residual: 0.0,
    };

    pub fn get(&self, effect: Effect) -> f64 {
        match effect {
            Effect::Person => self.person,
            Effect::Occasion => self.occasion,
            Effect::Item => self.item,
            Effect::PersonOccasion => self.person_occasion,
            Effect::PersonItem => self.person_item,
            Effect::OccasionItem => self.occasion_item,
            Effect::Residual => self.residual,
        }
    }

    pub fn set(&mut self, effect: Effect, value: f64) {
        match effect {
            Effect::Person => self.person = value,
            Effect::Occasion => self.occasion = value,
            Effect::Item => self.item = value,
            Effect::PersonOccasion => self.person_occasion = value,
            Effect::PersonItem => self.person_item = value,
            Effect::OccasionItem => self.occasion_item = value,
            Effect::Residual => self.residual = value,
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Components {
        let mut out = Components::ZERO;
        for effect in Effect::ALL {
            out.set(effect, f(self.get(effect)));
        }
        out
    }

    /// True when every entry is finite and nonnegative.
    pub fn is_valid_variance_set(&self) -> bool {
        Effect::ALL
            .iter()
            .all(|&e| self.get(e).is_finite() && self.get(e) >= 0.0)
    }
}

/// Raw estimate, truncated estimate, and normal-theory standard error for
/// one variance component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentEstimate {
    /// EMS-inversion solution; may be negative.
    pub raw: f64,
    /// `max(raw, 0)`, used for all downstream computation.
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimated variance components of a G-study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    pub n_p: usize,
    pub n_i: usize,
    pub n_o: usize,
    pub person: ComponentEstimate,
    pub occasion: ComponentEstimate,
    pub item: ComponentEstimate,
    pub person_occasion: ComponentEstimate,
    pub person_item: ComponentEstimate,
    pub occasion_item: ComponentEstimate,
    pub residual: ComponentEstimate,
}

impl VarianceComponents {
    pub fn component(&self, effect: Effect) -> &ComponentEstimate {
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

    /// The truncated (nonnegative) estimates as a component set.
    pub fn estimates(&self) -> Components {
        let mut out = Components::ZERO;
        for effect in Effect::ALL {
            out.set(effect, self.component(effect).estimate);
        }
        out
    }

    /// The raw (possibly negative) estimates as a component set.
    pub fn raw_estimates(&self) -> Components {
        let mut out = Components::ZERO;
        for effect in Effect::ALL {
            out.set(effect, self.component(effect).raw);
        }
        out
    }
}

/// Compute the ANOVA table for a cube.
///
/// Requires at least 2 persons, 2 items, and 2 occasions. Sums of squares
/// come from marginal means, e.g. `SS_p = n_i n_o sum_p (mean_p - grand)^2`
/// and `SS_pi = n_o sum_pi (mean_pi - mean_p - mean_i + grand)^2`; the
/// three-way term is the total corrected SS minus all other effects.
pub fn mean_squares(cube: &ResponseCube) -> Result<MeanSquaresTable> {
    let n_p = cube.n_persons();
    let n_i = cube.n_items();
    let n_o = cube.n_occasions();
    check_facet("persons", n_p)?;
    check_facet("items", n_i)?;
    check_facet("occasions", n_o)?;

    let pf = n_p as f64;
    let if_ = n_i as f64;
    let of = n_o as f64;
    let total_cells = pf * if_ * of;

    // First pass: marginal sums.
    let mut sum_p = vec![0.0; n_p];
    let mut sum_i = vec![0.0; n_i];
    let mut sum_o = vec![0.0; n_o];
    let mut sum_pi = vec![0.0; n_p * n_i];
    let mut sum_po = vec![0.0; n_p * n_o];
    let mut sum_io = vec![0.0; n_i * n_o];
    let mut grand_sum = 0.0;
    for p in 0..n_p {
        for i in 0..n_i {
            for o in 0..n_o {
                let x = cube.score(p, i, o);
                grand_sum += x;
                sum_p[p] += x;
                sum_i[i] += x;
                sum_o[o] += x;
                sum_pi[p * n_i + i] += x;
                sum_po[p * n_o + o] += x;
                sum_io[i * n_o + o] += x;
            }
        }
    }
    let grand_mean = grand_sum / total_cells;
    let mean_p: Vec<f64> = sum_p.iter().map(|s| s / (if_ * of)).collect();
    let mean_i: Vec<f64> = sum_i.iter().map(|s| s / (pf * of)).collect();
    let mean_o: Vec<f64> = sum_o.iter().map(|s| s / (pf * if_)).collect();
    let mean_pi: Vec<f64> = sum_pi.iter().map(|s| s / of).collect();
    let mean_po: Vec<f64> = sum_po.iter().map(|s| s / if_).collect();
    let mean_io: Vec<f64> = sum_io.iter().map(|s| s / pf).collect();

    // Second pass: deviations.
    let ss_p = if_ * of * mean_p.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();
    let ss_i = pf * of * mean_i.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();
    let ss_o = pf * if_ * mean_o.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();

    let mut ss_pi = 0.0;
    for p in 0..n_p {
        for i in 0..n_i {
            let dev = mean_pi[p * n_i + i] - mean_p[p] - mean_i[i] + grand_mean;
            ss_pi += dev * dev;
        }
    }
    ss_pi *= of;

    let mut ss_po = 0.0;
    for p in 0..n_p {
        for o in 0..n_o {
            let dev = mean_po[p * n_o + o] - mean_p[p] - mean_o[o] + grand_mean;
            ss_po += dev * dev;
        }
    }
    ss_po *= if_;

    let mut ss_io = 0.0;
    for i in 0..n_i {
        for o in 0..n_o {
            let dev = mean_io[i * n_o + o] - mean_i[i] - mean_o[o] + grand_mean;
            ss_io += dev * dev;
        }
    }
    ss_io *= pf;

    let mut ss_total = 0.0;
    for p in 0..n_p {
        for i in 0..n_i {
            for o in 0..n_o {
                let dev = cube.score(p, i, o) - grand_mean;
                ss_total += dev * dev;
            }
        }
    }
    let ss_residual = (ss_total - ss_p - ss_i - ss_o - ss_pi - ss_po - ss_io).max(0.0);

    let df_p = n_p - 1;
    let df_i = n_i - 1;
    let df_o = n_o - 1;
    let entry = |ss: f64, df: usize| EffectEntry {
        sum_of_squares: ss,
        df,
        mean_square: ss / df as f64,
    };

    Ok(MeanSquaresTable {
        n_p,
        n_i,
        n_o,
        grand_mean,
        person: entry(ss_p, df_p),
        occasion: entry(ss_o, df_o),
        item: entry(ss_i, df_i),
        person_occasion: entry(ss_po, df_p * df_o),
        person_item: entry(ss_pi, df_p * df_i),
        occasion_item: entry(ss_io, df_i * df_o),
        residual: entry(ss_residual, df_p * df_i * df_o),
    })
}

fn check_facet(facet: &'static str, got: usize) -> Result<()> {
    if got < 2 {
        return Err(Error::Design {
            facet,
            needed: 2,
            got,
        });
    }
    Ok(())
}

/// The linear combination of mean squares that estimates one component,
/// as (effect, coefficient) pairs.
fn ems_solution(effect: Effect, n_p: f64, n_i: f64, n_o: f64) -> Vec<(Effect, f64)> {
    match effect {
        Effect::Residual => vec![(Effect::Residual, 1.0)],
        Effect::PersonItem => vec![
            (Effect::PersonItem, 1.0 / n_o),
            (Effect::Residual, -1.0 / n_o),
        ],
        Effect::PersonOccasion => vec![
            (Effect::PersonOccasion, 1.0 / n_i),
            (Effect::Residual, -1.0 / n_i),
        ],
        Effect::OccasionItem => vec![
            (Effect::OccasionItem, 1.0 / n_p),
            (Effect::Residual, -1.0 / n_p),
        ],
        Effect::Person => {
            let k = 1.0 / (n_i * n_o);
            vec![
                (Effect::Person, k),
                (Effect::PersonItem, -k),
                (Effect::PersonOccasion, -k),
                (Effect::Residual, k),
            ]
        }
        Effect::Item => {
            let k = 1.0 / (n_p * n_o);
            vec![
                (Effect::Item, k),
                (Effect::PersonItem, -k),
                (Effect::OccasionItem, -k),
                (Effect::Residual, k),
            ]
        }
        Effect::Occasion => {
            let k = 1.0 / (n_p * n_i);
            vec![
                (Effect::Occasion, k),
                (Effect::PersonOccasion, -k),
                (Effect::OccasionItem, -k),
                (Effect::Residual, k),
            ]
        }
    }
}

/// Invert the expected mean squares of the balanced random crossed design.
///
/// Standard errors use the normal-theory approximation
/// `Var(s2) = 2 sum_q (c_q MS_q)^2 / (df_q + 2)` for the estimator
/// `s2 = sum_q c_q MS_q`.
pub fn estimate_components(ms: &MeanSquaresTable) -> VarianceComponents {
    let (n_p, n_i, n_o) = (ms.n_p as f64, ms.n_i as f64, ms.n_o as f64);
    let estimate_for = |effect: Effect| -> ComponentEstimate {
        let mut raw = 0.0;
        let mut variance = 0.0;
        for (source, coeff) in ems_solution(effect, n_p, n_i, n_o) {
            let entry = ms.entry(source);
            let term = coeff * entry.mean_square;
            raw += term;
            variance += 2.0 * term * term / (entry.df as f64 + 2.0);
        }
        ComponentEstimate {
            raw,
            estimate: raw.max(0.0),
            std_error: variance.sqrt(),
        }
    };
    VarianceComponents {
        n_p: ms.n_p,
        n_i: ms.n_i,
        n_o: ms.n_o,
        person: estimate_for(Effect::Person),
        occasion: estimate_for(Effect::Occasion),
        item: estimate_for(Effect::Item),
        person_occasion: estimate_for(Effect::PersonOccasion),
        person_item: estimate_for(Effect::PersonItem),
        occasion_item: estimate_for(Effect::OccasionItem),
        residual: estimate_for(Effect::Residual),
    }
}

/// Expected mean squares implied by a component set, per effect.
///
/// This is the forward map inverted by [`estimate_components`]: feeding the
/// raw estimates back through it reproduces the observed mean squares.
pub fn expected_mean_squares(c: &Components, n_p: usize, n_i: usize, n_o: usize) -> Components {
    let (pf, if_, of) = (n_p as f64, n_i as f64, n_o as f64);
    Components {
        residual: c.residual,
        person_item: c.residual + of * c.person_item,
        person_occasion: c.residual + if_ * c.person_occasion,
        occasion_item: c.residual + pf * c.occasion_item,
        person: c.residual + of * c.person_item + if_ * c.person_occasion + if_ * of * c.person,
        item: c.residual + of * c.person_item + pf * c.occasion_item + pf * of * c.item,
        occasion: c.residual + if_ * c.person_occasion + pf * c.occasion_item + pf * if_ * c.occasion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ResponseCube;

    fn cube_from_fn<F: Fn(usize, usize, usize) -> f64>(
        n_p: usize,
        n_i: usize,
        n_o: usize,
        f: F,
    ) -> ResponseCube {
        let mut scores = Vec::with_capacity(n_p * n_i * n_o);
        for p in 0..n_p {
            for i in 0..n_i {
                for o in 0..n_o {
                    scores.push(f(p, i, o));
                }
            }
        }
        ResponseCube::new(
            "test".to_string(),
            (0..n_p).map(|p| format!("p{p}")).collect(),
            (1..=n_i as u32).collect(),
            (1..=n_o as u32).collect(),
            scores,
        )
        .unwrap()
    }

    #[test]
    fn person_effect_only_cube() {
        // Person means {1, 2, 3}, constant across items and occasions.
        let cube = cube_from_fn(3, 2, 2, |p, _, _| (p + 1) as f64);
        let ms = mean_squares(&cube).unwrap();
        assert!((ms.person.mean_square - 2.0 * 2.0 * 1.0).abs() < 1e-12);
        assert_eq!(ms.person_item.mean_square, 0.0);
        assert_eq!(ms.person_occasion.mean_square, 0.0);
        assert_eq!(ms.residual.mean_square, 0.0);
        let vc = estimate_components(&ms);
        assert!((vc.person.estimate - 1.0).abs() < 1e-12);
        for effect in [
            Effect::Occasion,
            Effect::Item,
            Effect::PersonOccasion,
            Effect::PersonItem,
            Effect::OccasionItem,
            Effect::Residual,
        ] {
            assert_eq!(vc.component(effect).estimate, 0.0, "{effect:?}");
        }
    }

    #[test]
    fn constant_cube_has_zero_sums_of_squares() {
        let cube = cube_from_fn(3, 2, 2, |_, _, _| 4.0);
        let ms = mean_squares(&cube).unwrap();
        for effect in Effect::ALL {
            assert_eq!(ms.entry(effect).sum_of_squares, 0.0, "{effect:?}");
        }
        assert_eq!(ms.grand_mean, 4.0);
    }

    #[test]
    fn degrees_of_freedom_follow_the_design() {
        let cube = cube_from_fn(5, 4, 3, |p, i, o| (p * 31 + i * 7 + o) as f64);
        let ms = mean_squares(&cube).unwrap();
        assert_eq!(ms.person.df, 4);
        assert_eq!(ms.item.df, 3);
        assert_eq!(ms.occasion.df, 2);
        assert_eq!(ms.person_item.df, 12);
        assert_eq!(ms.person_occasion.df, 8);
        assert_eq!(ms.occasion_item.df, 6);
        assert_eq!(ms.residual.df, 24);
    }

    #[test]
    fn too_small_facet_is_named() {
        let cube = cube_from_fn(3, 2, 1, |_, _, _| 1.0);
        match mean_squares(&cube).unwrap_err() {
            Error::Design { facet, needed, got } => {
                assert_eq!(facet, "occasions");
                assert_eq!((needed, got), (2, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn negative_raw_is_truncated_and_preserved() {
        // A mean-squares table where MS_pio exceeds MS_pi.
        let entry = |ss: f64, df: usize| EffectEntry {
            sum_of_squares: ss,
            df,
            mean_square: ss / df as f64,
        };
        let ms = MeanSquaresTable {
            n_p: 10,
            n_i: 4,
            n_o: 3,
            grand_mean: 0.0,
            person: entry(90.0, 9),
            occasion: entry(8.0, 2),
            item: entry(9.0, 3),
            person_occasion: entry(36.0, 18),
            person_item: entry(27.0, 27),     // MS_pi = 1.0
            occasion_item: entry(12.0, 6),
            residual: entry(108.0, 54),       // MS_pio = 2.0
        };
        let vc = estimate_components(&ms);
        assert!((vc.person_item.raw - (1.0 - 2.0) / 3.0).abs() < 1e-12);
        assert_eq!(vc.person_item.estimate, 0.0);
        assert!(vc.person_item.std_error > 0.0);
    }

    #[test]
    fn ems_round_trip_reproduces_mean_squares() {
        let cube = cube_from_fn(4, 3, 2, |p, i, o| {
            ((p * 17 + i * 5 + o * 3 + p * i + o * i) % 7) as f64
        });
        let ms = mean_squares(&cube).unwrap();
        let vc = estimate_components(&ms);
        let ems = expected_mean_squares(&vc.raw_estimates(), ms.n_p, ms.n_i, ms.n_o);
        for effect in Effect::ALL {
            let expected = ems.get(effect);
            let observed = ms.entry(effect).mean_square;
            assert!(
                (expected - observed).abs() <= 1e-9 * observed.abs().max(1.0),
                "{effect:?}: {expected} vs {observed}"
            );
        }
    }

    #[test]
    fn effect_sums_of_squares_add_to_total() {
        let cube = cube_from_fn(6, 3, 4, |p, i, o| {
            (p as f64).sin() + (i as f64 * 2.3).cos() * (o as f64 + 0.5)
        });
        let ms = mean_squares(&cube).unwrap();
        let mut direct_total = 0.0;
        for p in 0..6 {
            for i in 0..3 {
                for o in 0..4 {
                    direct_total += (cube.score(p, i, o) - ms.grand_mean).powi(2);
                }
            }
        }
        let table_total = ms.total_sum_of_squares();
        assert!((direct_total - table_total).abs() <= 1e-9 * direct_total.max(1.0));
    }
}
