//! Response coding: scale bounds and reverse-keyed items.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scale bounds plus the set of reverse-coded items.
///
/// Reverse coding maps `x` to `scale_min + scale_max - x` and is applied at
/// most once per record, during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingConfig {
    pub reverse_coded_items: BTreeSet<u32>,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for CodingConfig {
    /// 7-point scale with no reverse-coded items.
    fn default() -> Self {
        CodingConfig {
            reverse_coded_items: BTreeSet::new(),
            scale_min: 1.0,
            scale_max: 7.0,
        }
    }
}

impl CodingConfig {
    pub fn new(reverse_coded_items: BTreeSet<u32>, scale_min: f64, scale_max: f64) -> Result<Self> {
        if !scale_min.is_finite() || !scale_max.is_finite() || scale_min >= scale_max {
            return Err(Error::Domain(format!(
                "scale bounds must be finite with scale_min < scale_max, got [{scale_min}, {scale_max}]"
            )));
        }
        Ok(CodingConfig {
            reverse_coded_items,
            scale_min,
            scale_max,
        })
    }

    /// Parse a `key = value` config. Recognized keys: `scale_min`,
    /// `scale_max`, `reverse_coded_items` (comma-separated item indices).
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut scale_min = 1.0;
        let mut scale_max = 7.0;
        let mut reverse = BTreeSet::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "scale_min" => scale_min = parse_float(value, line_no)?,
                "scale_max" => scale_max = parse_float(value, line_no)?,
                "reverse_coded_items" => {
                    for part in value.split(',') {
                        let part = part.trim();
                        if part.is_empty() {
                            continue;
                        }
                        let item: u32 = part.parse().map_err(|_| Error::Config {
                            line: line_no,
                            message: format!("invalid item index `{part}`"),
                        })?;
                        if item == 0 {
                            return Err(Error::Config {
                                line: line_no,
                                message: "item indices start at 1".to_string(),
                            });
                        }
                        reverse.insert(item);
                    }
                }
                other => {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        CodingConfig::new(reverse, scale_min, scale_max)
    }

    /// Apply reverse coding to a response if the item is reverse-keyed.
    pub fn recode(&self, item: u32, response: f64) -> f64 {
        if self.reverse_coded_items.contains(&item) {
            self.scale_min + self.scale_max - response
        } else {
            response
        }
    }

    /// Whether a (recoded) response lies inside the configured bounds.
    pub fn in_range(&self, response: f64) -> bool {
        response >= self.scale_min && response <= self.scale_max
    }
}

fn parse_float(value: &str, line: usize) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| Error::Config {
        line,
        message: format!("invalid number `{value}`"),
    })?;
    if !parsed.is_finite() {
        return Err(Error::Config {
            line,
            message: format!("number must be finite, got `{value}`"),
        });
    }
    Ok(parsed)
}
