//! Plain-text tables and CSV payloads for analysis results.
//!
//! Table mode prints every number with 3 decimal places; CSV and JSON keep
//! full precision. JSON output comes from the result types' `Serialize`
//! implementations directly.

use std::fmt::Write as _;

use crate::data::CellSummary;
use crate::dstudy::DStudyCell;
use crate::gstudy::{Effect, VarianceComponents};
use crate::simulate::{BootstrapSummary, RecoveryReport};

fn fmt3(value: f64) -> String {
    format!("{value:.3}")
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Aligned Estimate / Std. Error table of variance components.
pub fn components_table(group: Option<&str>, vc: &VarianceComponents) -> String {
    let mut out = String::new();
    if let Some(group) = group {
        let _ = writeln!(out, "Group: {group}");
    }
    let _ = writeln!(out, "{:<22}{:>10}  {:>10}", "Effect", "Estimate", "Std. Error");
    for effect in Effect::ALL {
        let component = vc.component(effect);
        let _ = writeln!(
            out,
            "{:<22}{:>10}  {:>10}",
            effect.label(),
            fmt3(component.estimate),
            fmt3(component.std_error)
        );
    }
    let _ = writeln!(out, "{:<22}{:>10}", "N", vc.n_p);
    out
}

/// D-study table: component rows with one column per scenario, reliability
/// row at the bottom. Column headers carry occasions over items. When the
/// components come from a G-study, pass it to add the Std. Error column
/// and sample size.
pub fn dstudy_table(cells: &[DStudyCell], source: Option<&VarianceComponents>) -> String {
    let mut out = String::new();
    let label_width = 22;
    let column_width = 8;

    // Header rows: occasions then items.
    let _ = write!(out, "{:<label_width$}{:>10}", "", "Estimate");
    if source.is_some() {
        let _ = write!(out, "  {:>10}", "Std. Error");
    }
    for cell in cells {
        let _ = write!(out, "{:>column_width$}", cell.n_occasions);
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:<label_width$}{:>10}", "", "");
    if source.is_some() {
        let _ = write!(out, "  {:>10}", "");
    }
    for cell in cells {
        let _ = write!(out, "{:>column_width$}", cell.n_items);
    }
    let _ = writeln!(out);

    let attenuated = |cell: &DStudyCell, effect: Effect| -> f64 {
        match effect {
            Effect::Person => cell.person,
            Effect::Occasion => cell.occasion,
            Effect::Item => cell.item,
            Effect::PersonOccasion => cell.person_occasion,
            Effect::PersonItem => cell.person_item,
            Effect::OccasionItem => cell.occasion_item,
            Effect::Residual => cell.residual,
        }
    };
    // Unattenuated inputs shown in the Estimate column come from any cell.
    let base = &cells[0];
    let unattenuated = |effect: Effect| -> f64 {
        match effect {
            Effect::Person => base.person,
            Effect::Occasion => base.occasion * base.n_occasions as f64,
            Effect::Item => base.item * base.n_items as f64,
            Effect::PersonOccasion => base.person_occasion * base.n_occasions as f64,
            Effect::PersonItem => base.person_item * base.n_items as f64,
            Effect::OccasionItem => {
                base.occasion_item * (base.n_items * base.n_occasions) as f64
            }
            Effect::Residual => base.residual * (base.n_items * base.n_occasions) as f64,
        }
    };

    for effect in Effect::ALL {
        let _ = write!(
            out,
            "{:<label_width$}{:>10}",
            effect.label(),
            fmt3(unattenuated(effect))
        );
        if let Some(vc) = source {
            let _ = write!(out, "  {:>10}", fmt3(vc.component(effect).std_error));
        }
        for cell in cells {
            let _ = write!(out, "{:>column_width$}", fmt3(attenuated(cell, effect)));
        }
        let _ = writeln!(out);
    }

    // Reliability at (1, 1) in the Estimate column.
    let c = crate::gstudy::Components {
        person: unattenuated(Effect::Person),
        occasion: unattenuated(Effect::Occasion),
        item: unattenuated(Effect::Item),
        person_occasion: unattenuated(Effect::PersonOccasion),
        person_item: unattenuated(Effect::PersonItem),
        occasion_item: unattenuated(Effect::OccasionItem),
        residual: unattenuated(Effect::Residual),
    };
    let single = crate::dstudy::g_coefficient(&c, 1, 1)
        .map(fmt3)
        .unwrap_or_default();
    let _ = write!(out, "{:<label_width$}{:>10}", "Reliability", single);
    if source.is_some() {
        let _ = write!(out, "  {:>10}", "");
    }
    for cell in cells {
        let _ = write!(out, "{:>column_width$}", fmt3(cell.g_coefficient));
    }
    let _ = writeln!(out);

    if let Some(vc) = source {
        let _ = writeln!(out, "{:<label_width$}{:>10}", "N", vc.n_p);
    }
    out
}

/// Long-format grid CSV: one row per scenario with attenuated components
/// and both coefficients.
pub fn dstudy_csv(cells: &[DStudyCell]) -> String {
    let mut out = String::from(
        "n_occasions,n_items,person,occasion,item,person_occasion,person_item,occasion_item,residual,g_coefficient,dependability\n",
    );
    for cell in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cell.n_occasions,
            cell.n_items,
            cell.person,
            cell.occasion,
            cell.item,
            cell.person_occasion,
            cell.person_item,
            cell.occasion_item,
            cell.residual,
            cell.g_coefficient,
            cell.dependability
        );
    }
    out
}

/// Per-wave reliability table: one row per group, one column per wave,
/// average in the last column. Standard errors in parentheses.
pub fn scale_reliability_table(
    rows: &[(String, crate::classical::ScaleReliabilityReport)],
) -> String {
    let mut occasions: Vec<u32> = Vec::new();
    for (_, report) in rows {
        for &occasion in report.per_wave.keys() {
            if !occasions.contains(&occasion) {
                occasions.push(occasion);
            }
        }
    }
    occasions.sort_unstable();

    let mut out = String::new();
    let _ = write!(out, "{:<12}", "Group");
    for occasion in &occasions {
        let _ = write!(out, "{:>16}", format!("rho_w{occasion}"));
    }
    let _ = writeln!(out, "{:>10}", "avg");
    for (group, report) in rows {
        let _ = write!(out, "{group:<12}");
        for occasion in &occasions {
            match report.per_wave.get(occasion) {
                Some((rho, se)) => {
                    let _ = write!(out, "{:>16}", format!("{} ({})", fmt3(*rho), fmt3(*se)));
                }
                None => {
                    let _ = write!(out, "{:>16}", "");
                }
            }
        }
        let _ = writeln!(out, "{:>10}", fmt3(report.average));
    }
    out
}

/// Correlation matrix CSV with wave labels; undefined entries are empty.
pub fn correlation_csv(occasions: &[u32], matrix: &[Vec<Option<f64>>]) -> String {
    let mut out = String::from("occasion");
    for occasion in occasions {
        let _ = write!(out, ",w{occasion}");
    }
    out.push('\n');
    for (row_idx, row) in matrix.iter().enumerate() {
        let _ = write!(out, "w{}", occasions[row_idx]);
        for entry in row {
            let _ = write!(out, ",{}", fmt_opt(*entry));
        }
        out.push('\n');
    }
    out
}

/// Scree CSV: descending eigenvalues with their rank.
pub fn scree_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("rank,eigenvalue\n");
    for (idx, value) in eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{},{}", idx + 1, value);
    }
    out
}

/// Bootstrap summary CSV: `k,median,q25,q75,undefined_count`.
pub fn bootstrap_csv(summaries: &[BootstrapSummary]) -> String {
    let mut out = String::from("k,median,q25,q75,undefined_count\n");
    for summary in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            summary.k,
            fmt_opt(summary.median),
            fmt_opt(summary.q25),
            fmt_opt(summary.q75),
            summary.undefined_count
        );
    }
    out
}

/// Descriptive summary CSV: `item,occasion,mean,sd,ci_half_width`.
pub fn describe_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from("item,occasion,mean,sd,ci_half_width\n");
    for cell in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            cell.item,
            cell.occasion,
            cell.mean,
            fmt_opt(cell.sd),
            fmt_opt(cell.ci_half_width)
        );
    }
    out
}

/// Recovery experiment table: truth, bias, and SE calibration per effect.
pub fn recovery_table(report: &RecoveryReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22}{:>10}{:>12}{:>10}{:>14}{:>14}{:>10}{:>12}",
        "Effect", "Truth", "Mean raw", "Bias", "Empirical sd", "Mean SE", "SE ratio", "Coverage95"
    );
    for effect in Effect::ALL {
        let c = report.component(effect);
        let _ = writeln!(
            out,
            "{:<22}{:>10}{:>12}{:>10}{:>14}{:>14}{:>10}{:>12}",
            effect.label(),
            fmt3(c.truth),
            fmt3(c.mean_raw_estimate),
            fmt3(c.bias),
            fmt3(c.empirical_sd),
            fmt3(c.mean_std_error),
            fmt3(c.se_ratio),
            fmt3(c.coverage95)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dstudy::dstudy_grid;
    use crate::gstudy::Components;

    fn reference() -> Components {
        Components {
            person: 0.450,
            occasion: 0.057,
            item: 0.328,
            person_occasion: 0.0,
            person_item: 0.275,
            occasion_item: 1.139,
            residual: 1.563,
        }
    }

    #[test]
    fn dstudy_table_shows_three_decimals_and_reliability_row() {
        let cells = dstudy_grid(&reference(), &[2, 3], &[2, 3]).unwrap();
        let diag: Vec<_> = cells
            .iter()
            .filter(|c| c.n_occasions == c.n_items)
            .copied()
            .collect();
        let table = dstudy_table(&diag, None);
        assert!(table.contains("Person Occasion Item"));
        assert!(table.contains("Reliability"));
        assert!(table.contains("0.460"));
        assert!(table.contains("0.629"));
    }

    #[test]
    fn dstudy_csv_has_one_row_per_cell() {
        let cells = dstudy_grid(&reference(), &[1, 2], &[1, 2, 3]).unwrap();
        let csv = dstudy_csv(&cells);
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.starts_with("n_occasions,n_items,person,"));
    }

    #[test]
    fn bootstrap_csv_renders_missing_quartiles_empty() {
        let summaries = vec![crate::simulate::BootstrapSummary {
            k: 2,
            median: None,
            q25: None,
            q75: None,
            undefined_count: 10,
        }];
        let csv = bootstrap_csv(&summaries);
        assert!(csv.contains("2,,,,10"));
    }
}
