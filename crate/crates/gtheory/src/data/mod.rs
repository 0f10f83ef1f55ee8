//! Panel data representation and ingestion.
//!
//! Long-format records are grouped by label, reverse-coded, validated, and
//! assembled into complete-case [`ResponseCube`]s: one dense person x item x
//! occasion array per group. Persons missing any cell of the full crossing
//! are dropped (listwise), because the downstream estimators assume a
//! balanced fully crossed design.

mod coding;
mod io;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use coding::CodingConfig;
pub use io::{
    parse_records, read_records, read_records_from_path, records_to_csv, write_records,
};

use crate::error::{Error, Result};

/// One observed response in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRecord {
    pub group: String,
    pub person: String,
    /// Wave number, 1-based.
    pub occasion: u32,
    /// Item index, 1-based.
    pub item: u32,
    pub response: f64,
}

/// A complete fully crossed person x item x occasion score array for one
/// group. Scores are stored person-major: `[p][i][o]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCube {
    group: String,
    persons: Vec<String>,
    items: Vec<u32>,
    occasions: Vec<u32>,
    scores: Vec<f64>,
}

impl ResponseCube {
    /// Build a cube from a dense score array. `scores` must hold
    /// `persons * items * occasions` finite values in `[p][i][o]` order.
    pub fn new(
        group: String,
        persons: Vec<String>,
        items: Vec<u32>,
        occasions: Vec<u32>,
        scores: Vec<f64>,
    ) -> Result<Self> {
        let expected = persons.len() * items.len() * occasions.len();
        if persons.is_empty() || items.is_empty() || occasions.is_empty() {
            return Err(Error::Domain("cube dimensions must be nonzero".into()));
        }
        if scores.len() != expected {
            return Err(Error::Domain(format!(
                "score array has {} cells, dimensions imply {expected}",
                scores.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Domain(format!("non-finite score {bad} in cube")));
        }
        Ok(ResponseCube {
            group,
            persons,
            items,
            occasions,
            scores,
        })
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    pub fn n_persons(&self) -> usize {
        self.persons.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_occasions(&self) -> usize {
        self.occasions.len()
    }

    pub fn persons(&self) -> &[String] {
        &self.persons
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn occasions(&self) -> &[u32] {
        &self.occasions
    }

    /// Score at positional indices (person, item, occasion).
    pub fn score(&self, person: usize, item: usize, occasion: usize) -> f64 {
        debug_assert!(
            person < self.n_persons() && item < self.n_items() && occasion < self.n_occasions()
        );
        self.scores[(person * self.n_items() + item) * self.n_occasions() + occasion]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Positional index of an item label, if present.
    pub fn item_position(&self, item: u32) -> Option<usize> {
        self.items.iter().position(|&i| i == item)
    }

    /// Positional index of an occasion label, if present.
    pub fn occasion_position(&self, occasion: u32) -> Option<usize> {
        self.occasions.iter().position(|&o| o == occasion)
    }

    /// Whether the cube satisfies the G-study design minima
    /// (at least 2 persons, 2 items, 2 occasions).
    pub fn usable_for_gstudy(&self) -> bool {
        self.n_persons() >= 2 && self.n_items() >= 2 && self.n_occasions() >= 2
    }

    /// Flatten back to long-format records (already-recoded values).
    pub fn to_records(&self) -> Vec<LongRecord> {
        let mut records = Vec::with_capacity(self.scores.len());
        for (p, person) in self.persons.iter().enumerate() {
            for (i, &item) in self.items.iter().enumerate() {
                for (o, &occasion) in self.occasions.iter().enumerate() {
                    records.push(LongRecord {
                        group: self.group.clone(),
                        person: person.clone(),
                        occasion,
                        item,
                        response: self.score(p, i, o),
                    });
                }
            }
        }
        records
    }

    /// Copy of the cube with every score passed through `f`.
    pub fn map_scores<F: Fn(f64) -> f64>(&self, f: F) -> ResponseCube {
        ResponseCube {
            group: self.group.clone(),
            persons: self.persons.clone(),
            items: self.items.clone(),
            occasions: self.occasions.clone(),
            scores: self.scores.iter().map(|&s| f(s)).collect(),
        }
    }
}

/// Per-group ingestion accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupIngest {
    pub group: String,
    /// Distinct persons observed in the input.
    pub persons_seen: usize,
    /// Complete-case persons retained in the cube.
    pub persons_retained: usize,
    /// Persons dropped for missing at least one cell of the crossing.
    pub persons_dropped: usize,
    /// Observed cells discarded along with dropped persons.
    pub cells_dropped: usize,
    /// Responses outside the coding bounds after reverse-coding. These are
    /// kept as-is, never clamped; the keys of the first few are listed.
    pub out_of_range: usize,
    pub out_of_range_examples: Vec<String>,
    pub n_items: usize,
    pub n_occasions: usize,
    /// False when no complete case exists, so no cube was built.
    pub cube_built: bool,
    /// Whether the cube meets the G-study minima (n_p, n_i, n_o >= 2).
    pub usable_for_gstudy: bool,
    pub unusable_reason: Option<String>,
}

/// Ingestion summary across groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_read: usize,
    pub groups: Vec<GroupIngest>,
}

impl IngestReport {
    pub fn group(&self, name: &str) -> Option<&GroupIngest> {
        self.groups.iter().find(|g| g.group == name)
    }
}

struct GroupAccumulator {
    cells: BTreeMap<(String, u32, u32), f64>,
    items: BTreeSet<u32>,
    occasions: BTreeSet<u32>,
    out_of_range: usize,
    out_of_range_examples: Vec<String>,
}

/// Assemble complete-case cubes per group.
///
/// Reverse coding is applied exactly once, before range validation.
/// Out-of-range responses are reported in the [`IngestReport`] but kept
/// unmodified. Duplicate (person, occasion, item) keys within a group and
/// non-finite responses reject the whole stream.
pub fn ingest<I>(records: I, coding: &CodingConfig) -> Result<(BTreeMap<String, ResponseCube>, IngestReport)>
where
    I: IntoIterator<Item = LongRecord>,
{
    let mut groups: BTreeMap<String, GroupAccumulator> = BTreeMap::new();
    let mut records_read = 0usize;

    for record in records {
        records_read += 1;
        if !record.response.is_finite() {
            return Err(Error::NonFiniteResponse {
                group: record.group,
                person: record.person,
                occasion: record.occasion,
                item: record.item,
            });
        }
        let value = coding.recode(record.item, record.response);
        let acc = groups
            .entry(record.group.clone())
            .or_insert_with(|| GroupAccumulator {
                cells: BTreeMap::new(),
                items: BTreeSet::new(),
                occasions: BTreeSet::new(),
                out_of_range: 0,
                out_of_range_examples: Vec::new(),
            });
        if !coding.in_range(value) {
            acc.out_of_range += 1;
            if acc.out_of_range_examples.len() < 5 {
                acc.out_of_range_examples.push(format!(
                    "person `{}`, occasion {}, item {}: {}",
                    record.person, record.occasion, record.item, value
                ));
            }
        }
        acc.items.insert(record.item);
        acc.occasions.insert(record.occasion);
        let key = (record.person.clone(), record.occasion, record.item);
        if acc.cells.insert(key, value).is_some() {
            return Err(Error::DuplicateRecord {
                group: record.group,
                person: record.person,
                occasion: record.occasion,
                item: record.item,
            });
        }
    }

    if records_read == 0 {
        return Err(Error::EmptyInput);
    }

    let mut cubes = BTreeMap::new();
    let mut report_groups = Vec::new();

    for (group, acc) in groups {
        let items: Vec<u32> = acc.items.iter().copied().collect();
        let occasions: Vec<u32> = acc.occasions.iter().copied().collect();
        let cells_per_person = items.len() * occasions.len();

        let mut per_person: BTreeMap<&str, usize> = BTreeMap::new();
        for (person, _, _) in acc.cells.keys() {
            *per_person.entry(person.as_str()).or_insert(0) += 1;
        }
        let persons_seen = per_person.len();
        let complete: Vec<String> = per_person
            .iter()
            .filter(|(_, &count)| count == cells_per_person)
            .map(|(person, _)| person.to_string())
            .collect();
        let persons_retained = complete.len();
        let persons_dropped = persons_seen - persons_retained;
        let cells_dropped = acc.cells.len() - persons_retained * cells_per_person;

        let mut cube_built = false;
        let mut usable_for_gstudy = false;
        let mut unusable_reason = None;

        if complete.is_empty() {
            unusable_reason = Some("no complete-case persons".to_string());
        } else {
            let mut scores = Vec::with_capacity(persons_retained * cells_per_person);
            for person in &complete {
                for &item in &items {
                    for &occasion in &occasions {
                        scores.push(acc.cells[&(person.clone(), occasion, item)]);
                    }
                }
            }
            let cube = ResponseCube::new(
                group.clone(),
                complete,
                items.clone(),
                occasions.clone(),
                scores,
            )?;
            cube_built = true;
            usable_for_gstudy = cube.usable_for_gstudy();
            if !usable_for_gstudy {
                unusable_reason = Some(gstudy_shortfall(&cube));
            }
            cubes.insert(group.clone(), cube);
        }

        report_groups.push(GroupIngest {
            group,
            persons_seen,
            persons_retained,
            persons_dropped,
            cells_dropped,
            out_of_range: acc.out_of_range,
            out_of_range_examples: acc.out_of_range_examples,
            n_items: items.len(),
            n_occasions: occasions.len(),
            cube_built,
            usable_for_gstudy,
            unusable_reason,
        });
    }

    Ok((cubes, IngestReport {
        records_read,
        groups: report_groups,
    }))
}

fn gstudy_shortfall(cube: &ResponseCube) -> String {
    let mut short = Vec::new();
    if cube.n_persons() < 2 {
        short.push(format!("{} person(s)", cube.n_persons()));
    }
    if cube.n_items() < 2 {
        short.push(format!("{} item(s)", cube.n_items()));
    }
    if cube.n_occasions() < 2 {
        short.push(format!("{} occasion(s)", cube.n_occasions()));
    }
    format!("G-study needs at least 2 of each facet, found {}", short.join(", "))
}

/// Mean, sample standard deviation, and 95% CI half-width for one
/// (item, occasion) cell across persons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub item: u32,
    pub occasion: u32,
    pub mean: f64,
    /// Absent when fewer than 2 persons.
    pub sd: Option<f64>,
    /// `1.96 * sd / sqrt(n_p)`; absent when fewer than 2 persons.
    pub ci_half_width: Option<f64>,
}

/// Per-(item, occasion) descriptive summary, ordered by item then occasion.
pub fn describe(cube: &ResponseCube) -> Vec<CellSummary> {
    let n_p = cube.n_persons();
    let mut summaries = Vec::with_capacity(cube.n_items() * cube.n_occasions());
    for (i, &item) in cube.items().iter().enumerate() {
        for (o, &occasion) in cube.occasions().iter().enumerate() {
            let values: Vec<f64> = (0..n_p).map(|p| cube.score(p, i, o)).collect();
            let mean = values.iter().sum::<f64>() / n_p as f64;
            let (sd, ci_half_width) = if n_p >= 2 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (n_p - 1) as f64;
                let sd = var.sqrt();
                (Some(sd), Some(1.96 * sd / (n_p as f64).sqrt()))
            } else {
                (None, None)
            };
            summaries.push(CellSummary {
                item,
                occasion,
                mean,
                sd,
                ci_half_width,
            });
        }
    }
    summaries
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(group: &str, person: &str, occasion: u32, item: u32, response: f64) -> LongRecord {
        LongRecord {
            group: group.to_string(),
            person: person.to_string(),
            occasion,
            item,
            response,
        }
    }

    fn full_grid(group: &str, persons: &[&str], items: &[u32], occasions: &[u32]) -> Vec<LongRecord> {
        let mut records = Vec::new();
        for person in persons {
            for &item in items {
                for &occasion in occasions {
                    records.push(record(group, person, occasion, item, 4.0));
                }
            }
        }
        records
    }

    #[test]
    fn single_person_cube_is_flagged_unusable_for_gstudy() {
        let records = full_grid("g", &["p1"], &[1, 2], &[1]);
        let (cubes, report) = ingest(records, &CodingConfig::default()).unwrap();
        let cube = &cubes["g"];
        assert_eq!((cube.n_persons(), cube.n_items(), cube.n_occasions()), (1, 2, 1));
        let entry = report.group("g").unwrap();
        assert!(entry.cube_built);
        assert!(!entry.usable_for_gstudy);
        assert!(entry.unusable_reason.as_deref().unwrap().contains("person"));
    }

    #[test]
    fn incomplete_person_is_dropped_and_counted() {
        // p2 misses 1 of its 40 cells and must be excluded entirely.
        let mut records = full_grid("g", &["p1", "p2", "p3"], &[1, 2, 3, 4, 5, 6, 7, 8], &[1, 2, 3, 4, 5]);
        let drop_idx = records
            .iter()
            .position(|r| r.person == "p2" && r.item == 8 && r.occasion == 5)
            .unwrap();
        records.remove(drop_idx);
        let (cubes, report) = ingest(records, &CodingConfig::default()).unwrap();
        let cube = &cubes["g"];
        assert_eq!(cube.n_persons(), 2);
        assert!(!cube.persons().iter().any(|p| p == "p2"));
        let entry = report.group("g").unwrap();
        assert_eq!(entry.persons_seen, 3);
        assert_eq!(entry.persons_retained, 2);
        assert_eq!(entry.persons_dropped, 1);
        assert_eq!(entry.cells_dropped, 39);
    }

    #[test]
    fn duplicate_key_rejects_stream_with_offending_key() {
        let mut records = full_grid("g", &["p1", "p2"], &[1, 2], &[1, 2]);
        records.push(record("g", "p1", 2, 2, 3.0));
        let err = ingest(records, &CodingConfig::default()).unwrap_err();
        match err {
            Error::DuplicateRecord { person, occasion, item, .. } => {
                assert_eq!(person, "p1");
                assert_eq!((occasion, item), (2, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn group_without_complete_cases_is_flagged_not_fabricated() {
        // Two persons, each missing a different cell.
        let mut records = full_grid("g", &["p1", "p2"], &[1, 2], &[1, 2]);
        records.retain(|r| !(r.person == "p1" && r.item == 1 && r.occasion == 1));
        records.retain(|r| !(r.person == "p2" && r.item == 2 && r.occasion == 2));
        let (cubes, report) = ingest(records, &CodingConfig::default()).unwrap();
        assert!(cubes.is_empty());
        let entry = report.group("g").unwrap();
        assert!(!entry.cube_built);
        assert_eq!(entry.persons_retained, 0);
        assert_eq!(entry.unusable_reason.as_deref(), Some("no complete-case persons"));
    }

    #[test]
    fn out_of_range_values_are_reported_not_clamped() {
        let mut records = full_grid("g", &["p1", "p2"], &[1, 2], &[1]);
        records[0].response = 9.0;
        let (cubes, report) = ingest(records, &CodingConfig::default()).unwrap();
        let entry = report.group("g").unwrap();
        assert_eq!(entry.out_of_range, 1);
        // Value retained as-is.
        let cube = &cubes["g"];
        assert!(cube.scores().contains(&9.0));
    }

    #[test]
    fn reverse_coding_applied_before_range_check() {
        let mut records = full_grid("g", &["p1", "p2"], &[1, 2], &[1]);
        for r in &mut records {
            if r.item == 2 {
                r.response = 6.0;
            }
        }
        let coding = CodingConfig::parse("reverse_coded_items = 2").unwrap();
        let (cubes, report) = ingest(records, &coding).unwrap();
        assert_eq!(report.group("g").unwrap().out_of_range, 0);
        let cube = &cubes["g"];
        let i2 = cube.item_position(2).unwrap();
        assert_eq!(cube.score(0, i2, 0), 2.0);
    }

    #[test]
    fn empty_stream_is_an_error() {
        let err = ingest(Vec::new(), &CodingConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyInput));
    }

    #[test]
    fn describe_constant_cube() {
        let records = full_grid("g", &["p1", "p2", "p3"], &[1, 2], &[1, 2]);
        let (cubes, _) = ingest(records, &CodingConfig::default()).unwrap();
        for cell in describe(&cubes["g"]) {
            assert_eq!(cell.mean, 4.0);
            assert_eq!(cell.sd, Some(0.0));
            assert_eq!(cell.ci_half_width, Some(0.0));
        }
    }

    #[test]
    fn describe_two_point_cell() {
        let records = vec![
            record("g", "p1", 1, 1, 3.0),
            record("g", "p2", 1, 1, 5.0),
        ];
        let (cubes, _) = ingest(records, &CodingConfig::default()).unwrap();
        let cells = describe(&cubes["g"]);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].mean, 4.0);
        assert!((cells[0].sd.unwrap() - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn describe_single_person_has_no_ci() {
        let records = full_grid("g", &["p1"], &[1, 2], &[1]);
        let (cubes, _) = ingest(records, &CodingConfig::default()).unwrap();
        for cell in describe(&cubes["g"]) {
            assert!(cell.sd.is_none());
            assert!(cell.ci_half_width.is_none());
        }
    }

    #[test]
    fn cube_round_trips_through_csv() {
        let mut records = full_grid("g", &["p1", "p2"], &[1, 2, 3], &[1, 2]);
        for (idx, r) in records.iter_mut().enumerate() {
            r.response = 1.0 + (idx as f64) * 0.37;
        }
        let (cubes, _) = ingest(records, &CodingConfig::default()).unwrap();
        let cube = &cubes["g"];
        let csv_text = records_to_csv(&cube.to_records());
        let reparsed = parse_records(&csv_text).unwrap();
        let (cubes2, _) = ingest(reparsed, &CodingConfig::default()).unwrap();
        assert_eq!(cubes2["g"], *cube);
    }
}
