//! Reliability projection under hypothetical numbers of items and occasions.
//!
//! Given truncated (nonnegative) variance components, the generalizability
//! coefficient divides person variance by person variance plus the
//! person-crossed error terms, each attenuated by the scenario's facet
//! counts:
//!
//! ```text
//! g = s2_p / (s2_p + s2_pi/n_i' + s2_po/n_o' + s2_pio,e/(n_i' n_o'))
//! ```
//!
//! The dependability coefficient additionally counts the non-person-crossed
//! sources (item, occasion, item-occasion) in the denominator, so it is
//! never larger than the generalizability coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gstudy::Components;

/// One D-study scenario: attenuated error components and both coefficients
/// at a given (occasions, items) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DStudyCell {
    pub n_occasions: usize,
    pub n_items: usize,
    /// Person variance, unattenuated.
    pub person: f64,
    /// s2_o / n_o'
    pub occasion: f64,
    /// s2_i / n_i'
    pub item: f64,
    /// s2_po / n_o'
    pub person_occasion: f64,
    /// s2_pi / n_i'
    pub person_item: f64,
    /// s2_io / (n_i' n_o')
    pub occasion_item: f64,
    /// s2_pio,e / (n_i' n_o')
    pub residual: f64,
    pub g_coefficient: f64,
    pub dependability: f64,
}

fn validate_components(c: &Components) -> Result<()> {
    if !c.is_valid_variance_set() {
        return Err(Error::Domain(
            "variance components must be finite and nonnegative for reliability projection"
                .to_string(),
        ));
    }
    Ok(())
}

fn validate_counts(n_occasions: usize, n_items: usize) -> Result<()> {
    if n_occasions < 1 || n_items < 1 {
        return Err(Error::Domain(format!(
            "scenario counts must be at least 1, got {n_occasions} occasion(s), {n_items} item(s)"
        )));
    }
    Ok(())
}

/// Generalizability coefficient at a scenario. Errors if the person
/// variance and all person-crossed error variances are zero.
pub fn g_coefficient(c: &Components, n_occasions: usize, n_items: usize) -> Result<f64> {
    validate_components(c)?;
    validate_counts(n_occasions, n_items)?;
    let ni = n_items as f64;
    let no = n_occasions as f64;
    let relative_error = c.person_item / ni + c.person_occasion / no + c.residual / (ni * no);
    let denominator = c.person + relative_error;
    if denominator == 0.0 {
        return Err(Error::DegenerateMeasurement);
    }
    Ok(c.person / denominator)
}

/// Dependability coefficient (absolute-error companion) at a scenario.
pub fn dependability(c: &Components, n_occasions: usize, n_items: usize) -> Result<f64> {
    validate_components(c)?;
    validate_counts(n_occasions, n_items)?;
    let ni = n_items as f64;
    let no = n_occasions as f64;
    let relative_error = c.person_item / ni + c.person_occasion / no + c.residual / (ni * no);
    if c.person + relative_error == 0.0 {
        return Err(Error::DegenerateMeasurement);
    }
    let absolute_error =
        relative_error + c.item / ni + c.occasion / no + c.occasion_item / (ni * no);
    Ok(c.person / (c.person + absolute_error))
}

/// Full cell at one scenario: attenuated components plus both coefficients.
pub fn dstudy_cell(c: &Components, n_occasions: usize, n_items: usize) -> Result<DStudyCell> {
    let g = g_coefficient(c, n_occasions, n_items)?;
    let phi = dependability(c, n_occasions, n_items)?;
    let ni = n_items as f64;
    let no = n_occasions as f64;
    Ok(DStudyCell {
        n_occasions,
        n_items,
        person: c.person,
        occasion: c.occasion / no,
        item: c.item / ni,
        person_occasion: c.person_occasion / no,
        person_item: c.person_item / ni,
        occasion_item: c.occasion_item / (ni * no),
        residual: c.residual / (ni * no),
        g_coefficient: g,
        dependability: phi,
    })
}

/// One cell per (occasion, item) pair of the cross product, in input order
/// (occasions outer, items inner).
pub fn dstudy_grid(c: &Components, occasions: &[usize], items: &[usize]) -> Result<Vec<DStudyCell>> {
    if occasions.is_empty() || items.is_empty() {
        return Err(Error::Domain(
            "occasion and item lists must be nonempty".to_string(),
        ));
    }
    let mut cells = Vec::with_capacity(occasions.len() * items.len());
    for &n_o in occasions {
        for &n_i in items {
            cells.push(dstudy_cell(c, n_o, n_i)?);
        }
    }
    Ok(cells)
}
