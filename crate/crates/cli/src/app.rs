//! Resolution of command-line arguments into self-contained invocations,
//! their execution, and the run manifest that lets any output be replayed.

use std::fmt;
use std::path::{Path, PathBuf};

use assayqc_core::hits::{
    apply_threshold, assay_quality, load_plate_csv, train_test_evaluate, Direction, HitOptions, HitReport, RuleKind,
    ThresholdEvaluation, ThresholdRule, MIN_CONTROLS,
};
use assayqc_core::simulation::figures::{run_figure, Figure, FigureOverrides, FigureSettings};
use assayqc_core::simulation::{calibrate_null, DistributionSpec};
use assayqc_core::{Error, MetricReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::{Command, DirectionArg, DistArg, Format, GlobalArgs, HitsArgs, RuleArg};
use crate::input::{load_metric_input, read_file, select_plate};
use crate::output;

pub const TOOL: &str = "assayqc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status with its message. Code 2 is bad input or configuration, 3 a
/// numerical failure on valid input (or a replay that did not reproduce).
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

pub type AppResult<T> = std::result::Result<T, Failure>;

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Everything needed to recompute a command's output, with defaults filled
/// in and input paths made absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    Metrics {
        input: PathBuf,
        bins: Option<usize>,
        format: Format,
    },
    Simulate {
        figure: Figure,
        settings: FigureSettings,
        seed: u64,
    },
    Hits {
        train: PathBuf,
        test: Option<PathBuf>,
        train_plate: Option<String>,
        test_plate: Option<String>,
        rule: ThresholdRule,
        direction: Option<Direction>,
        log_transform: bool,
        bins: Option<usize>,
        format: Format,
    },
    Calibrate {
        sizes: Vec<usize>,
        trials: usize,
        dist: DistributionSpec,
        bins: Option<usize>,
        seed: u64,
        format: Format,
    },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Metrics { .. } => "metrics",
            Invocation::Simulate { .. } => "simulate",
            Invocation::Hits { .. } => "hits",
            Invocation::Calibrate { .. } => "calibrate",
        }
    }

    /// File-name stem for this run's outputs and manifest.
    fn stem(&self) -> &'static str {
        match self {
            Invocation::Simulate { figure, .. } => figure.name(),
            other => other.name(),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Simulate { seed, .. } | Invocation::Calibrate { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        match self {
            Invocation::Metrics { input, .. } => vec![input.as_path()],
            Invocation::Hits { train, test, .. } => std::iter::once(train.as_path()).chain(test.as_deref()).collect(),
            _ => Vec::new(),
        }
    }
}

fn absolute(path: &Path) -> AppResult<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn require_seed(global: &GlobalArgs, what: &str) -> AppResult<u64> {
    global
        .seed
        .ok_or_else(|| invalid(format!("{what} requires --seed <u64>; runs never draw from ambient entropy")))
}

/// Builds the invocation for a parsed command line. `Replay` is handled by
/// the caller.
pub fn resolve(command: &Command, global: &GlobalArgs) -> AppResult<Invocation> {
    match command {
        Command::Metrics { input } => Ok(Invocation::Metrics {
            input: absolute(input)?,
            bins: global.bins,
            format: global.format,
        }),
        Command::Simulate { scenario, config } => {
            let figure: Figure = scenario.parse()?;
            let seed = require_seed(global, "simulate")?;
            let mut settings = figure.defaults();
            if let Some(path) = config {
                let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                settings = FigureOverrides::from_toml_str(&text)?.apply(settings);
            }
            if global.bins.is_some() {
                settings.bins = global.bins;
            }
            Ok(Invocation::Simulate { figure, settings, seed })
        }
        Command::Hits(args) => resolve_hits(args, global),
        Command::Calibrate {
            sizes,
            trials,
            dist,
            location,
            scale,
        } => {
            let dist = match dist {
                DistArg::Normal => DistributionSpec::normal(*location, *scale)?,
                DistArg::Lognormal => DistributionSpec::log_normal(*location, *scale)?,
            };
            Ok(Invocation::Calibrate {
                sizes: sizes.clone(),
                trials: *trials,
                dist,
                bins: global.bins,
                seed: require_seed(global, "calibrate")?,
                format: global.format,
            })
        }
        Command::Replay { .. } => Err(invalid("replay cannot be nested")),
    }
}

fn resolve_hits(args: &HitsArgs, global: &GlobalArgs) -> AppResult<Invocation> {
    let kind = match args.rule {
        RuleArg::Gssmd => RuleKind::GssmdOverlap,
        RuleArg::Sigma => RuleKind::SigmaRule,
        RuleArg::Ssmd => RuleKind::SsmdRule,
        RuleArg::Logistic => RuleKind::Logistic,
    };
    let given = [("--alpha", args.alpha, RuleKind::GssmdOverlap), ("--k", args.k, RuleKind::SigmaRule), ("--beta", args.beta, RuleKind::SsmdRule)];
    for (flag, value, owner) in given {
        if value.is_some() && owner != kind {
            return Err(invalid(format!("{flag} does not apply to the {kind} rule")));
        }
    }
    let rule = match kind {
        RuleKind::GssmdOverlap => args.alpha,
        RuleKind::SigmaRule => args.k,
        RuleKind::SsmdRule => args.beta,
        RuleKind::Logistic => None,
    }
    .map_or(Ok(ThresholdRule::default_for(kind)), |p| ThresholdRule::new(kind, p))?;
    Ok(Invocation::Hits {
        train: absolute(&args.train)?,
        test: args.test.as_deref().map(absolute).transpose()?,
        train_plate: args.train_plate.clone(),
        test_plate: args.test_plate.clone(),
        rule,
        direction: match args.direction {
            DirectionArg::Auto => None,
            DirectionArg::Higher => Some(Direction::PositiveIsHigher),
            DirectionArg::Lower => Some(Direction::PositiveIsLower),
        },
        log_transform: args.log_transform,
        bins: global.bins,
        format: global.format,
    })
}

/// One output file: name relative to the output directory, and content.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

fn rule_note(kind: RuleKind) -> &'static str {
    match kind {
        RuleKind::GssmdOverlap => "crossing point of the control histograms; quality requires |GSSMD| >= 1 - alpha",
        RuleKind::SigmaRule => "conventional stand-in for the Z'-factor recommendation: mean(neg) +/- k*sd(neg)",
        RuleKind::SsmdRule => "conventional stand-in for the SSMD recommendation: mean(neg) +/- beta*sqrt(2)*sd(neg)",
        RuleKind::Logistic => "decision boundary of a logistic regression fitted to the controls",
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HitsOutput {
    pub rule_note: String,
    pub train: HitReport,
    pub test: Option<HitReport>,
    pub evaluation: Option<ThresholdEvaluation>,
}

fn panel_file(figure: Figure, panel: &str) -> String {
    let clean: String = panel
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("{}_{}.csv", figure.name(), clean.trim_matches('_'))
}

/// Runs an invocation and returns its output files.
pub fn execute(inv: &Invocation) -> AppResult<Vec<Artifact>> {
    let single = |format: Format, content: String| {
        vec![Artifact {
            name: format!("{}.{}", inv.stem(), format.extension()),
            content,
        }]
    };
    match inv {
        Invocation::Metrics { input, bins, format } => {
            let pairs = load_metric_input(&read_file(input)?, MIN_CONTROLS)?;
            let reports = pairs
                .iter()
                .map(|p| Ok(MetricReport::compute(&p.neg, &p.pos, *bins)?.with_label(p.label.clone())))
                .collect::<assayqc_core::Result<Vec<_>>>()?;
            let content = match format {
                Format::Json => output::to_json(&reports)?,
                Format::Csv => output::metrics_csv(&reports)?,
            };
            Ok(single(*format, content))
        }
        Invocation::Simulate { figure, settings, seed } => run_figure(*figure, settings, *seed)?
            .iter()
            .map(|panel| {
                Ok(Artifact {
                    name: panel_file(*figure, &panel.name),
                    content: output::panel_csv(panel)?,
                })
            })
            .collect(),
        Invocation::Hits {
            train,
            test,
            train_plate,
            test_plate,
            rule,
            direction,
            log_transform,
            bins,
            format,
        } => {
            let train_plates = load_plate_csv(read_file(train)?.as_slice())?;
            let test_plates = match test {
                Some(path) => Some(load_plate_csv(read_file(path)?.as_slice())?),
                None => None,
            };
            let train_p = select_plate(&train_plates, train_plate.as_deref(), "training")?;
            let test_p = match (&test_plates, test_plate) {
                (Some(plates), id) => Some(select_plate(plates, id.as_deref(), "test")?),
                (None, Some(id)) => Some(select_plate(&train_plates, Some(id), "test")?),
                (None, None) => None,
            };
            let opts = HitOptions {
                bins: *bins,
                direction: *direction,
                log_transform: *log_transform,
                ..HitOptions::default()
            };
            // The test plate only scores the threshold; without one the
            // training plate stands in and the evaluation is dropped.
            let (threshold, evaluation) = train_test_evaluate(train_p, test_p.unwrap_or(train_p), rule, &opts)?;
            let train_report = apply_threshold(train_p, threshold.clone(), assay_quality(train_p, *bins)?);
            let test_report = match test_p {
                Some(p) => Some(apply_threshold(p, threshold, assay_quality(p, *bins)?)),
                None => None,
            };
            let evaluation = test_p.map(|_| evaluation);
            let content = match format {
                Format::Json => output::to_json(&HitsOutput {
                    rule_note: rule_note(rule.kind).into(),
                    train: train_report,
                    test: test_report,
                    evaluation,
                })?,
                Format::Csv => {
                    let reports: Vec<&HitReport> = std::iter::once(&train_report).chain(test_report.as_ref()).collect();
                    output::hits_csv(&reports, evaluation.as_ref())?
                }
            };
            Ok(single(*format, content))
        }
        Invocation::Calibrate {
            sizes,
            trials,
            dist,
            bins,
            seed,
            format,
        } => {
            let table = calibrate_null(sizes, *trials, dist, *seed, *bins)?;
            let content = match format {
                Format::Json => output::to_json(&table)?,
                Format::Csv => output::calibration_csv(&table)?,
            };
            Ok(single(*format, content))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    fn of(path: impl Into<String>, content: &[u8]) -> Self {
        let hash = Sha256::digest(content);
        Self {
            path: path.into(),
            sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
            bytes: content.len() as u64,
        }
    }
}

/// Provenance of a set of output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub timestamp: String,
    pub config: Invocation,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn file_name(inv: &Invocation) -> String {
        format!("{}.manifest.json", inv.stem())
    }
}

fn write(path: &Path, content: &[u8]) -> AppResult<()> {
    std::fs::write(path, content).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn digest_inputs(inv: &Invocation) -> AppResult<Vec<FileDigest>> {
    inv.inputs()
        .into_iter()
        .map(|p| Ok(FileDigest::of(p.display().to_string(), &read_file(p)?)))
        .collect()
}

/// Writes the artifacts and their manifest into `dir`, returning the paths
/// written (manifest last).
pub fn write_outputs(inv: &Invocation, artifacts: &[Artifact], dir: &Path) -> AppResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = dir.join(&a.name);
        write(&path, a.content.as_bytes())?;
        written.push(path);
    }
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        subcommand: inv.name().into(),
        seed: inv.seed(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: inv.clone(),
        inputs: digest_inputs(inv)?,
        outputs: artifacts.iter().map(|a| FileDigest::of(a.name.clone(), a.content.as_bytes())).collect(),
    };
    let path = dir.join(RunManifest::file_name(inv));
    write(&path, output::to_json(&manifest)?.as_bytes())?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Serialize)]
pub struct ReplayFile {
    pub path: String,
    pub expected_sha256: Option<String>,
    pub actual_sha256: Option<String>,
    pub matches: bool,
}

#[derive(Debug, Serialize)]
pub struct ReplayReport {
    pub manifest: String,
    pub out_dir: String,
    pub reproduced: bool,
    pub files: Vec<ReplayFile>,
}

/// Re-runs the manifest's invocation into `out_dir` (default: `replay/`
/// beside the manifest) and compares every output with its recorded digest.
pub fn replay(manifest_path: &Path, out_dir: Option<&Path>) -> AppResult<ReplayReport> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| invalid(format!("{}: {e}", manifest_path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: not a run manifest: {e}", manifest_path.display())))?;
    if manifest.tool != TOOL {
        return Err(invalid(format!("manifest was written by '{}', not {TOOL}", manifest.tool)));
    }
    if manifest.version != VERSION {
        eprintln!("warning: manifest written by version {}, replaying with {VERSION}", manifest.version);
    }
    let current = digest_inputs(&manifest.config)?;
    for (now, then) in current.iter().zip(&manifest.inputs) {
        if now.sha256 != then.sha256 {
            return Err(invalid(format!("input {} changed since the recorded run", then.path)));
        }
    }
    let artifacts = execute(&manifest.config)?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => manifest_path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    write_outputs(&manifest.config, &artifacts, &dir)?;

    let mut files: Vec<ReplayFile> = manifest
        .outputs
        .iter()
        .map(|expected| {
            let actual = artifacts
                .iter()
                .find(|a| a.name == expected.path)
                .map(|a| FileDigest::of(a.name.clone(), a.content.as_bytes()).sha256);
            ReplayFile {
                path: expected.path.clone(),
                matches: actual.as_deref() == Some(expected.sha256.as_str()),
                expected_sha256: Some(expected.sha256.clone()),
                actual_sha256: actual,
            }
        })
        .collect();
    for a in &artifacts {
        if !manifest.outputs.iter().any(|o| o.path == a.name) {
            files.push(ReplayFile {
                path: a.name.clone(),
                expected_sha256: None,
                actual_sha256: Some(FileDigest::of(a.name.clone(), a.content.as_bytes()).sha256),
                matches: false,
            });
        }
    }
    Ok(ReplayReport {
        manifest: manifest_path.display().to_string(),
        out_dir: dir.display().to_string(),
        reproduced: files.iter().all(|f| f.matches),
        files,
    })
}
