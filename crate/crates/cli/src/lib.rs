//! Batch scenario runner: reads a TOML scenario, runs it, and writes text
//! reports into an output directory.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bridge_core::incentives::vampire_metrics;
use bridge_core::simnet::{AdversarySpec, RaceError, ScenarioError};
use bridge_core::{explore_races, run, AnonymityReport, Scenario, SimOutcome, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportKind {
    Transcript,
    Races,
    Anonymity,
    Liquidity,
    Storage,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] =
        [ReportKind::Transcript, ReportKind::Races, ReportKind::Anonymity, ReportKind::Liquidity, ReportKind::Storage];

    pub fn file_name(self) -> &'static str {
        match self {
            ReportKind::Transcript => "transcript.log",
            ReportKind::Races => "races.txt",
            ReportKind::Anonymity => "anonymity.txt",
            ReportKind::Liquidity => "liquidity.txt",
            ReportKind::Storage => "storage.txt",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Transcript => "transcript",
            ReportKind::Races => "races",
            ReportKind::Anonymity => "anonymity",
            ReportKind::Liquidity => "liquidity",
            ReportKind::Storage => "storage",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown report `{s}` (expected one of transcript, races, anonymity, liquidity, storage, all)"))
    }
}

/// Parses a comma-separated report list; `all` selects every report.
pub fn parse_reports(s: &str) -> Result<BTreeSet<ReportKind>, String> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(ReportKind::ALL);
        } else {
            out.insert(part.parse()?);
        }
    }
    if out.is_empty() {
        return Err("no reports selected".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub scenario_path: PathBuf,
    pub out_dir: PathBuf,
    pub reports: BTreeSet<ReportKind>,
    pub seed_override: Option<u64>,
    pub epsilon_override: Option<i64>,
}

impl RunConfig {
    pub fn new(scenario_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            scenario_path: scenario_path.into(),
            out_dir: out_dir.into(),
            reports: ReportKind::ALL.into_iter().collect(),
            seed_override: None,
            epsilon_override: None,
        }
    }

    /// Reads, overrides and validates the scenario.
    pub fn load_scenario(&self) -> Result<Scenario, CliError> {
        let text = fs::read_to_string(&self.scenario_path)
            .map_err(|e| CliError::Io { path: self.scenario_path.clone(), source: e })?;
        let mut sc = Scenario::from_toml_str(&text).map_err(|e| CliError::Scenario {
            path: self.scenario_path.clone(),
            source: e,
        })?;
        if let Some(seed) = self.seed_override {
            sc.seed = seed;
        }
        if let Some(eps) = self.epsilon_override {
            sc.epsilon = eps;
        }
        sc.validate().map_err(|e| CliError::Scenario { path: self.scenario_path.clone(), source: e })?;
        Ok(sc)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error("race sweep: {0}")]
    Race(#[from] RaceError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Input, usage and I/O errors all exit with 2.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// What a command wrote and which protocol properties it saw broken.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommandReport {
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl CommandReport {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

fn write(out_dir: &Path, kind: ReportKind, body: &str, report: &mut CommandReport) -> Result<(), CliError> {
    let path = out_dir.join(kind.file_name());
    fs::write(&path, body).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
    report.written.push(path);
    Ok(())
}

/// `t'` values swept by default: `0..=2 * processing_delay`.
pub fn race_range(sc: &Scenario) -> Result<std::ops::RangeInclusive<Tick>, CliError> {
    match &sc.adversary {
        Some(AdversarySpec::DoubleWithdraw { t_prime_range: Some([lo, hi]), .. }) => Ok(*lo..=*hi),
        Some(AdversarySpec::DoubleWithdraw { .. }) => {
            let d = sc.delay_bound().unwrap_or(0);
            Ok(0..=2 * (d as i64 + sc.epsilon).max(0) as Tick)
        }
        _ => Err(CliError::Race(RaceError::MissingAdversary)),
    }
}

fn races_table(sc: &Scenario) -> Result<String, CliError> {
    if !matches!(sc.adversary, Some(AdversarySpec::DoubleWithdraw { .. })) {
        return Ok("t_prime first_chain payouts\n#summary {\"adversary\":false,\"rows\":0}\n".into());
    }
    Ok(explore_races(sc, race_range(sc)?)?.to_table())
}

fn outcome_failures(out: &SimOutcome) -> Vec<String> {
    let mut failures: Vec<String> = out.violations.iter().map(|v| format!("invariant violation: {v}")).collect();
    for note in out.double_payouts() {
        failures.push(format!("double payout of note {note}"));
    }
    failures
}

/// Runs the scenario and writes the requested reports. A run that breaks an
/// invariant or pays a note twice also dumps the transcript.
pub fn cmd_run(cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let sc = cfg.load_scenario()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::Io { path: cfg.out_dir.clone(), source: e })?;
    let out = run(&sc).map_err(|e| CliError::Scenario { path: cfg.scenario_path.clone(), source: e })?;
    let mut report = CommandReport { failures: outcome_failures(&out), ..Default::default() };
    let mut kinds = cfg.reports.clone();
    if !report.failures.is_empty() {
        kinds.insert(ReportKind::Transcript);
    }
    for kind in kinds {
        let body = match kind {
            ReportKind::Transcript => out.transcript.render(),
            ReportKind::Races => races_table(&sc)?,
            ReportKind::Anonymity => AnonymityReport::from_transcript(&out.transcript)
                .map_err(|e| CliError::Usage(format!("anonymity report: {e}")))?
                .to_table(),
            ReportKind::Liquidity => vampire_metrics(&out.transcript)
                .map_err(|e| CliError::Usage(format!("liquidity report: {e}")))?
                .to_table(),
            ReportKind::Storage => out.storage_table(),
        };
        write(&cfg.out_dir, kind, &body, &mut report)?;
    }
    Ok(report)
}

/// Sweeps the double-withdrawal adversary and writes `races.txt`.
pub fn cmd_races(cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let sc = cfg.load_scenario()?;
    let range = race_range(&sc)?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::Io { path: cfg.out_dir.clone(), source: e })?;
    let rep = explore_races(&sc, range)?;
    let mut report = CommandReport::default();
    for r in rep.double_payout_rows() {
        report.failures.push(format!(
            "double payout: t'={} first_chain={} payouts={}",
            r.t_prime, r.first_chain, r.payouts
        ));
    }
    write(&cfg.out_dir, ReportKind::Races, &rep.to_table(), &mut report)?;
    Ok(report)
}
