//! Command-line entry point wiring ingestion, G-study estimation, D-study
//! projection, classical reliability, and simulation into scriptable
//! reports.
//!
//! Exit codes: 0 success, 1 analysis error, 2 I/O or usage error.

mod manifest;
mod output;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use gtheory::classical::{
    cross_wave_correlations, scale_reliability, scree_eigenvalues, single_item_panel,
    ScaleReliabilityReport,
};
use gtheory::data::{describe, ingest, read_records_from_path, records_to_csv, CodingConfig};
use gtheory::dstudy::dstudy_grid;
use gtheory::gstudy::{estimate_components, mean_squares, Components, VarianceComponents};
use gtheory::report;
use gtheory::simulate::{bootstrap_scale_reliability, generate, BootstrapSpec, GeneratorSpec};
use gtheory::ResponseCube;

use manifest::{file_digest, RunManifest};
use output::emit;

#[derive(Parser)]
#[command(
    name = "gtheory",
    version,
    about = "Reliability analysis for fully crossed person x item x occasion survey panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the seven variance components per group
    Gstudy(GstudyArgs),
    /// Project reliability over a grid of occasion/item scenarios
    Dstudy(DstudyArgs),
    /// Classical reliability: per-wave alpha, cross-wave correlations, scree
    Ctt(CttArgs),
    /// Generate a synthetic panel with known variance components
    Simulate(SimulateArgs),
    /// Item-resampling bootstrap of scale reliability at one occasion
    Bootstrap(BootstrapArgs),
    /// Per-(item, occasion) means, sds, and 95% confidence intervals
    Describe(DescribeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct DataOpts {
    /// Long-format CSV: group,person,occasion,item,response
    #[arg(long)]
    input: PathBuf,
    /// Coding config (key = value): scale bounds, reverse-coded items
    #[arg(long)]
    coding: Option<PathBuf>,
    /// Restrict the analysis to one group
    #[arg(long)]
    group: Option<String>,
}

#[derive(Args)]
struct GstudyArgs {
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Output path; stdout when omitted. Relative paths join GTHEORY_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DstudyArgs {
    /// Components JSON: a gstudy report, a components block, or plain values
    #[arg(long, conflicts_with = "values")]
    components: Option<PathBuf>,
    /// Inline components: person,occasion,item,po,pi,io,residual
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
    /// Group to pick when the components file holds several
    #[arg(long)]
    group: Option<String>,
    /// Comma-separated occasion counts, e.g. 1,2,3,4,5
    #[arg(long)]
    occasions: String,
    /// Comma-separated item counts, e.g. 2,4,8
    #[arg(long)]
    items: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CttArgs {
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n_persons: usize,
    #[arg(long)]
    n_items: usize,
    #[arg(long)]
    n_occasions: usize,
    /// True components: person,occasion,item,po,pi,io,residual
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    grand_mean: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "sim")]
    group: String,
    /// Round scores to integers and clamp into "min,max"
    #[arg(long)]
    discretize: Option<String>,
    /// Output CSV path; stdout when omitted (manifest goes to stderr)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    #[command(flatten)]
    data: DataOpts,
    /// Occasion (wave) to resample
    #[arg(long)]
    occasion: u32,
    /// Comma-separated composite lengths, e.g. 1,2,4,8,16,25
    #[arg(long)]
    k_values: String,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DescribeArgs {
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad arguments or unreadable/malformed input: exit 2.
    Usage(String),
    /// The data cannot support the requested analysis: exit 1.
    Analysis(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(message) | CliError::Analysis(message) => message,
        }
    }
}

impl From<gtheory::Error> for CliError {
    fn from(error: gtheory::Error) -> Self {
        use gtheory::Error::*;
        match error {
            Io(_) | Csv { .. } | Header { .. } | Config { .. } | Json(_) | EmptyInput
            | DuplicateRecord { .. } | NonFiniteResponse { .. } => {
                CliError::Usage(error.to_string())
            }
            _ => CliError::Analysis(error.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> Self {
        CliError::Usage(error.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gstudy(args) => cmd_gstudy(args),
        Command::Dstudy(args) => cmd_dstudy(args),
        Command::Ctt(args) => cmd_ctt(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::Describe(args) => cmd_describe(args),
    };
    if let Err(error) = result {
        eprintln!("error: {}", error.message());
        std::process::exit(error.exit_code());
    }
}

/// Parse a comma-separated list of positive counts.
fn parse_counts(raw: &str, what: &str) -> Result<Vec<usize>, CliError> {
    let mut counts = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let value: usize = part
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid {what} entry `{part}`")))?;
        if value == 0 {
            return Err(CliError::Usage(format!("{what} entries must be at least 1")));
        }
        counts.push(value);
    }
    if counts.is_empty() {
        return Err(CliError::Usage(format!("{what} list is empty")));
    }
    Ok(counts)
}

/// Parse seven comma-separated variance values in reporting order.
fn parse_component_values(raw: &str) -> Result<Components, CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 7 {
        return Err(CliError::Usage(format!(
            "expected 7 components (person,occasion,item,person_occasion,person_item,occasion_item,residual), found {}",
            parts.len()
        )));
    }
    let mut values = [0.0f64; 7];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid component value `{part}`")))?;
    }
    let components = Components {
        person: values[0],
        occasion: values[1],
        item: values[2],
        person_occasion: values[3],
        person_item: values[4],
        occasion_item: values[5],
        residual: values[6],
    };
    if !components.is_valid_variance_set() {
        return Err(CliError::Usage(
            "variance components must be nonnegative and finite: the reliability \
             projection assumes nonnegative (truncated) variance components"
                .to_string(),
        ));
    }
    Ok(components)
}

fn load_coding(path: Option<&Path>) -> Result<CodingConfig, CliError> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(CodingConfig::parse(&text)?)
        }
        None => Ok(CodingConfig::default()),
    }
}

struct LoadedData {
    cubes: BTreeMap<String, ResponseCube>,
    report: gtheory::IngestReport,
    manifest_inputs: Vec<String>,
    config_digest: String,
}

fn load_data(opts: &DataOpts) -> Result<LoadedData, CliError> {
    let coding = load_coding(opts.coding.as_deref())?;
    let records = read_records_from_path(&opts.input)?;
    let (mut cubes, report) = ingest(records, &coding)?;

    if let Some(group) = &opts.group {
        if !cubes.contains_key(group) {
            return Err(CliError::Analysis(format!(
                "group `{group}` not found or has no complete cases"
            )));
        }
        cubes.retain(|name, _| name == group);
    }

    let mut manifest_inputs = vec![opts.input.display().to_string()];
    if let Some(coding_path) = &opts.coding {
        manifest_inputs.push(coding_path.display().to_string());
    }
    let config_digest = file_digest(opts.coding.as_deref())?;
    Ok(LoadedData {
        cubes,
        report,
        manifest_inputs,
        config_digest,
    })
}

/// Run a per-group analysis, emitting reports for the groups that succeed
/// and failing with named groups when any cannot be analyzed.
fn per_group<T>(
    cubes: &BTreeMap<String, ResponseCube>,
    analyze: impl Fn(&ResponseCube) -> Result<T, gtheory::Error>,
) -> Result<Vec<(String, T)>, CliError> {
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (group, cube) in cubes {
        match analyze(cube) {
            Ok(value) => results.push((group.clone(), value)),
            Err(error) => failures.push(format!("group `{group}`: {error}")),
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Analysis(failures.join("; ")));
    }
    Ok(results)
}

#[derive(Serialize)]
struct GstudyGroupReport {
    group: String,
    grand_mean: f64,
    ingest: gtheory::data::GroupIngest,
    components: VarianceComponents,
}

#[derive(Serialize)]
struct GstudyReport {
    manifest: RunManifest,
    groups: Vec<GstudyGroupReport>,
}

fn cmd_gstudy(args: GstudyArgs) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    if data.cubes.is_empty() {
        return Err(CliError::Analysis(unusable_summary(&data.report)));
    }
    let analyzed = per_group(&data.cubes, |cube| {
        let ms = mean_squares(cube)?;
        Ok((ms.grand_mean, estimate_components(&ms)))
    })?;
    let manifest = RunManifest::new(data.manifest_inputs, data.config_digest, None);

    let payload = match args.format {
        Format::Json => {
            let report = GstudyReport {
                manifest,
                groups: analyzed
                    .into_iter()
                    .map(|(group, (grand_mean, components))| {
                        let ingest = data
                            .report
                            .group(&group)
                            .expect("analyzed group is in the ingest report")
                            .clone();
                        GstudyGroupReport {
                            group,
                            grand_mean,
                            ingest,
                            components,
                        }
                    })
                    .collect(),
            };
            serde_json::to_string_pretty(&report).map_err(gtheory::Error::from)?
        }
        Format::Table | Format::Csv => {
            let mut out = manifest.comment_block();
            for (group, (grand_mean, components)) in &analyzed {
                out.push('\n');
                out.push_str(&report::components_table(Some(group), components));
                let _ = writeln!(out, "{:<22}{:>10.3}", "Grand mean", grand_mean);
            }
            out
        }
    };
    emit(args.out.as_deref(), &payload)?;
    Ok(())
}

fn unusable_summary(report: &gtheory::IngestReport) -> String {
    let mut parts = Vec::new();
    for group in &report.groups {
        if !group.cube_built {
            parts.push(format!(
                "group `{}` unusable: {}",
                group.group,
                group.unusable_reason.as_deref().unwrap_or("no cube")
            ));
        }
    }
    if parts.is_empty() {
        "no usable groups in input".to_string()
    } else {
        parts.join("; ")
    }
}

#[derive(Deserialize)]
struct ComponentsFileGroup {
    group: String,
    components: VarianceComponents,
}

#[derive(Deserialize)]
struct ComponentsFileReport {
    groups: Vec<ComponentsFileGroup>,
}

/// Components from a JSON file: a full gstudy report, a single
/// components block, or a bare seven-value set.
fn load_components_file(
    path: &Path,
    group: Option<&str>,
) -> Result<(Components, Option<VarianceComponents>), CliError> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(vc) = serde_json::from_str::<VarianceComponents>(&text) {
        return Ok((vc.estimates(), Some(vc)));
    }
    if let Ok(report) = serde_json::from_str::<ComponentsFileReport>(&text) {
        let picked = match group {
            Some(name) => report
                .groups
                .into_iter()
                .find(|g| g.group == name)
                .ok_or_else(|| {
                    CliError::Usage(format!("group `{name}` not present in components file"))
                })?,
            None => {
                if report.groups.len() != 1 {
                    return Err(CliError::Usage(
                        "components file holds several groups; pick one with --group".to_string(),
                    ));
                }
                report.groups.into_iter().next().unwrap()
            }
        };
        return Ok((picked.components.estimates(), Some(picked.components)));
    }
    if let Ok(c) = serde_json::from_str::<Components>(&text) {
        if !c.is_valid_variance_set() {
            return Err(CliError::Usage(
                "variance components must be nonnegative and finite: the reliability \
                 projection assumes nonnegative (truncated) variance components"
                    .to_string(),
            ));
        }
        return Ok((c, None));
    }
    Err(CliError::Usage(format!(
        "could not parse `{}` as a components file",
        path.display()
    )))
}

#[derive(Serialize)]
struct DstudyReport {
    manifest: RunManifest,
    components: Components,
    cells: Vec<gtheory::DStudyCell>,
}

fn cmd_dstudy(args: DstudyArgs) -> Result<(), CliError> {
    let occasions = parse_counts(&args.occasions, "occasions")?;
    let items = parse_counts(&args.items, "items")?;

    let (components, source, inputs, digest) = match (&args.components, &args.values) {
        (Some(path), None) => {
            let (components, source) = load_components_file(path, args.group.as_deref())?;
            (
                components,
                source,
                vec![path.display().to_string()],
                file_digest(Some(path))?,
            )
        }
        (None, Some(values)) => (
            parse_component_values(values)?,
            None,
            Vec::new(),
            "none".to_string(),
        ),
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --components or --values".to_string(),
            ))
        }
    };

    let cells = dstudy_grid(&components, &occasions, &items)?;
    let manifest = RunManifest::new(inputs, digest, None);

    let payload = match args.format {
        Format::Json => serde_json::to_string_pretty(&DstudyReport {
            manifest,
            components,
            cells,
        })
        .map_err(gtheory::Error::from)?,
        Format::Csv => format!("{}{}", manifest.comment_block(), report::dstudy_csv(&cells)),
        Format::Table => format!(
            "{}\n{}",
            manifest.comment_block(),
            report::dstudy_table(&cells, source.as_ref())
        ),
    };
    emit(args.out.as_deref(), &payload)?;
    Ok(())
}

#[derive(Serialize)]
struct ItemMatrix {
    item: u32,
    occasions: Vec<u32>,
    matrix: Vec<Vec<Option<f64>>>,
}

#[derive(Serialize)]
struct OccasionScree {
    occasion: u32,
    eigenvalues: Vec<f64>,
}

#[derive(Serialize)]
struct CttGroupReport {
    group: String,
    scale_reliability: ScaleReliabilityReport,
    cross_wave_correlations: Vec<ItemMatrix>,
    scree: Vec<OccasionScree>,
}

#[derive(Serialize)]
struct CttReport {
    manifest: RunManifest,
    groups: Vec<CttGroupReport>,
}

fn ctt_group(cube: &ResponseCube) -> Result<CttGroupReport, gtheory::Error> {
    let reliability = scale_reliability(cube)?;
    let mut matrices = Vec::new();
    for &item in cube.items() {
        let panel = single_item_panel(cube, item)?;
        matrices.push(ItemMatrix {
            item,
            occasions: cube.occasions().to_vec(),
            matrix: cross_wave_correlations(&panel)?,
        });
    }
    let mut scree = Vec::new();
    for &occasion in cube.occasions() {
        scree.push(OccasionScree {
            occasion,
            eigenvalues: scree_eigenvalues(cube, occasion)?,
        });
    }
    Ok(CttGroupReport {
        group: cube.group().to_string(),
        scale_reliability: reliability,
        cross_wave_correlations: matrices,
        scree,
    })
}

fn cmd_ctt(args: CttArgs) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    if data.cubes.is_empty() {
        return Err(CliError::Analysis(unusable_summary(&data.report)));
    }
    let analyzed = per_group(&data.cubes, ctt_group)?;
    let manifest = RunManifest::new(data.manifest_inputs, data.config_digest, None);

    let payload = match args.format {
        Format::Json => {
            let groups = analyzed.into_iter().map(|(_, report)| report).collect();
            serde_json::to_string_pretty(&CttReport { manifest, groups })
                .map_err(gtheory::Error::from)?
        }
        Format::Table => {
            let mut out = manifest.comment_block();
            out.push('\n');
            let rows: Vec<(String, ScaleReliabilityReport)> = analyzed
                .iter()
                .map(|(group, report)| (group.clone(), report.scale_reliability.clone()))
                .collect();
            out.push_str(&report::scale_reliability_table(&rows));
            for (group, report) in &analyzed {
                for matrix in &report.cross_wave_correlations {
                    let _ = writeln!(
                        out,
                        "\nCross-wave correlations, group {group}, item {}",
                        matrix.item
                    );
                    out.push_str(&format_matrix(&matrix.occasions, &matrix.matrix));
                }
                let _ = writeln!(out, "\nScree eigenvalues, group {group}");
                for entry in &report.scree {
                    let rendered: Vec<String> = entry
                        .eigenvalues
                        .iter()
                        .map(|v| format!("{v:.3}"))
                        .collect();
                    let _ = writeln!(out, "occasion {}: {}", entry.occasion, rendered.join(", "));
                }
            }
            out
        }
        Format::Csv => {
            let mut out = manifest.comment_block();
            for (group, report) in &analyzed {
                let _ = writeln!(out, "# section: scale_reliability group={group}");
                out.push_str("occasion,rho,std_error\n");
                for (occasion, (rho, se)) in &report.scale_reliability.per_wave {
                    let _ = writeln!(out, "{occasion},{rho},{se}");
                }
                let _ = writeln!(out, "average,{},", report.scale_reliability.average);
                for matrix in &report.cross_wave_correlations {
                    let _ = writeln!(
                        out,
                        "# section: cross_wave_correlations group={group} item={}",
                        matrix.item
                    );
                    out.push_str(&report::correlation_csv(&matrix.occasions, &matrix.matrix));
                }
                for entry in &report.scree {
                    let _ = writeln!(
                        out,
                        "# section: scree group={group} occasion={}",
                        entry.occasion
                    );
                    out.push_str(&report::scree_csv(&entry.eigenvalues));
                }
            }
            out
        }
    };
    emit(args.out.as_deref(), &payload)?;
    Ok(())
}

fn format_matrix(occasions: &[u32], matrix: &[Vec<Option<f64>>]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>8}", "");
    for occasion in occasions {
        let _ = write!(out, "{:>8}", format!("w{occasion}"));
    }
    out.push('\n');
    for (row_idx, row) in matrix.iter().enumerate() {
        let _ = write!(out, "{:>8}", format!("w{}", occasions[row_idx]));
        for entry in row {
            match entry {
                Some(value) => {
                    let _ = write!(out, "{:>8}", format!("{value:.3}"));
                }
                None => {
                    let _ = write!(out, "{:>8}", ".");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let components = parse_component_values(&args.values)?;
    let spec = GeneratorSpec {
        group: args.group.clone(),
        n_p: args.n_persons,
        n_i: args.n_items,
        n_o: args.n_occasions,
        true_components: components,
        grand_mean: args.grand_mean,
        seed: args.seed,
    };
    let mut cube = generate(&spec)?;
    if let Some(bounds) = &args.discretize {
        let (min, max) = parse_bounds(bounds)?;
        cube = gtheory::simulate::discretize(&cube, min, max);
    }
    let csv_text = records_to_csv(&cube.to_records());
    let manifest = RunManifest::new(Vec::new(), "none".to_string(), Some(args.seed));
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(gtheory::Error::from)?;

    // The data file must stay ingestible, so the manifest travels separately.
    match &args.out {
        Some(path) => {
            emit(Some(path), &csv_text)?;
            println!("{manifest_json}");
        }
        None => {
            emit(None, &csv_text)?;
            eprintln!("{manifest_json}");
        }
    }
    Ok(())
}

fn parse_bounds(raw: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(
            "discretize bounds must be `min,max`".to_string(),
        ));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid bound `{}`", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid bound `{}`", parts[1])))?;
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(CliError::Usage("bounds must be finite with min < max".to_string()));
    }
    Ok((min, max))
}

#[derive(Serialize)]
struct BootstrapReport {
    manifest: RunManifest,
    group: String,
    occasion: u32,
    replications: usize,
    summaries: Vec<gtheory::BootstrapSummary>,
}

fn cmd_bootstrap(args: BootstrapArgs) -> Result<(), CliError> {
    let k_values = parse_counts(&args.k_values, "k")?;
    let data = load_data(&args.data)?;
    if data.cubes.len() != 1 {
        return Err(CliError::Usage(format!(
            "bootstrap analyzes one group at a time; found {} (pick one with --group)",
            data.cubes.len()
        )));
    }
    let (group, cube) = data.cubes.iter().next().unwrap();
    let spec = BootstrapSpec::new(k_values, args.replications, args.seed);
    let summaries = bootstrap_scale_reliability(cube, args.occasion, &spec)?;
    let manifest = RunManifest::new(data.manifest_inputs, data.config_digest, Some(args.seed));

    let payload = match args.format {
        Format::Json => serde_json::to_string_pretty(&BootstrapReport {
            manifest,
            group: group.clone(),
            occasion: args.occasion,
            replications: args.replications,
            summaries,
        })
        .map_err(gtheory::Error::from)?,
        Format::Csv | Format::Table => format!(
            "{}{}",
            manifest.comment_block(),
            report::bootstrap_csv(&summaries)
        ),
    };
    emit(args.out.as_deref(), &payload)?;
    Ok(())
}

#[derive(Serialize)]
struct DescribeGroupReport {
    group: String,
    ingest: gtheory::data::GroupIngest,
    cells: Vec<gtheory::CellSummary>,
}

#[derive(Serialize)]
struct DescribeReport {
    manifest: RunManifest,
    groups: Vec<DescribeGroupReport>,
}

fn cmd_describe(args: DescribeArgs) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    if data.cubes.is_empty() {
        return Err(CliError::Analysis(unusable_summary(&data.report)));
    }
    let analyzed = per_group(&data.cubes, |cube| Ok(describe(cube)))?;
    let manifest = RunManifest::new(data.manifest_inputs, data.config_digest, None);

    let payload = match args.format {
        Format::Json => {
            let groups = analyzed
                .into_iter()
                .map(|(group, cells)| DescribeGroupReport { group, cells })
                .collect();
            serde_json::to_string_pretty(&DescribeReport { manifest, groups })
                .map_err(gtheory::Error::from)?
        }
        Format::Csv => {
            let mut out = manifest.comment_block();
            for (group, cells) in &analyzed {
                let _ = writeln!(out, "# section: describe group={group}");
                out.push_str(&report::describe_csv(cells));
            }
            out
        }
        Format::Table => {
            let mut out = manifest.comment_block();
            for (group, cells) in &analyzed {
                let _ = writeln!(out, "\nGroup: {group}");
                let _ = writeln!(
                    out,
                    "{:>6}{:>10}{:>10}{:>10}{:>10}",
                    "item", "occasion", "mean", "sd", "ci95"
                );
                for cell in cells {
                    let _ = writeln!(
                        out,
                        "{:>6}{:>10}{:>10.3}{:>10}{:>10}",
                        cell.item,
                        cell.occasion,
                        cell.mean,
                        cell.sd.map(|v| format!("{v:.3}")).unwrap_or_else(|| ".".into()),
                        cell.ci_half_width
                            .map(|v| format!("{v:.3}"))
                            .unwrap_or_else(|| ".".into()),
                    );
                }
            }
            out
        }
    };
    emit(args.out.as_deref(), &payload)?;
    Ok(())
}
