//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::detectors::{linked_repositories, run_detectors, Detection, DetectorConfig, RulePacks, Targets};
use crate::fact_model::{BehaviorType, RepoId, Subject};
use crate::fixtures::{render_matrix, run_fixture_suite};
use crate::ingestion::{
    build_store, load_snapshot, save_snapshot, FetchBudget, GitHubClient, Scope, Snapshot, TOKEN_VAR,
};
use crate::license::LicenseCatalog;
use crate::report::{exit_status, RunReport, EXIT_ERROR};
use crate::source::SourceFilter;

#[derive(Debug, Parser)]
#[command(name = "ethoscan", version, about = "Rule-based checks for unethical behavior in open-source repositories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a repository or issue for potential violations.
    Check(Box<CheckArgs>),
    /// Capture a snapshot from the live API.
    Fetch(FetchArgs),
    /// Run the offline fixture suite and print the result matrix.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Repo,
    Issue,
    Both,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Repo => Scope::RepoLevel,
            ScopeArg::Issue => Scope::IssueLevel,
            ScopeArg::Both => Scope::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Hard cap on live requests (default depends on whether a token is set).
    #[arg(long)]
    pub max_requests: Option<u32>,
    /// Minimum pause between live requests.
    #[arg(long)]
    pub min_interval_ms: Option<u64>,
    /// Alternative API base URL.
    #[arg(long)]
    pub api_base: Option<String>,
}

impl BudgetArgs {
    fn budget(&self) -> FetchBudget {
        let token = std::env::var(TOKEN_VAR).is_ok_and(|t| !t.is_empty());
        let mut b = if token {
            FetchBudget::authenticated()
        } else {
            FetchBudget::anonymous()
        };
        if let Some(n) = self.max_requests {
            b.max_requests = n;
        }
        if let Some(ms) = self.min_interval_ms {
            b.min_interval_ms = ms;
        }
        b
    }

    fn client(&self, filter: SourceFilter) -> Result<GitHubClient, String> {
        let mut c = GitHubClient::from_env(self.budget()).map_err(|e| e.to_string())?;
        if let Some(base) = &self.api_base {
            c = c.with_api_base(base);
        }
        Ok(c.with_source_filter(filter))
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Live repository OWNER/NAME.
    #[arg(long, group = "input")]
    pub repo: Option<String>,
    /// Offline snapshot file.
    #[arg(long, group = "input")]
    pub snapshot: Option<PathBuf>,
    /// Issue URL (live), or an issue number restricting issue-level checks.
    #[arg(long)]
    pub issue: Option<String>,
    /// Behavior types: s1, s2, s5, s6, s8, s9 or all (comma separated or repeated).
    #[arg(long = "type", value_delimiter = ',', required = true)]
    pub types: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Evaluation date for staleness checks (YYYY-MM-DD); defaults to today.
    #[arg(long)]
    pub date: Option<NaiveDate>,
    /// Second repository for s2: a snapshot path, or OWNER/NAME when live.
    #[arg(long)]
    pub pair: Option<String>,
    /// Additional snapshots, such as repositories linked from issues.
    #[arg(long)]
    pub related: Vec<PathBuf>,
    /// Recognise only full Stack Overflow question links, not /a/ID or /q/ID.
    #[arg(long)]
    pub full_links_only: bool,
    /// Minimum share of an answer's code grams found in a file, in (0, 1] [default: 0.10].
    #[arg(long)]
    pub s1_threshold: Option<f64>,
    /// Releases older than this many days are stale [default: 183].
    #[arg(long)]
    pub s9_stale_days: Option<i64>,
    /// Comma-separated path segments that exempt an s8 link.
    #[arg(long, value_delimiter = ',')]
    pub s8_exclude: Option<Vec<String>>,
    /// Linked repositories resolved per issue [default: 10].
    #[arg(long)]
    pub s8_max_candidates: Option<usize>,
    /// Comma-separated phrases marking a paid store listing.
    #[arg(long, value_delimiter = ',')]
    pub s9_paid_markers: Option<Vec<String>>,
    /// Compare s2 source files as token streams instead of bytes.
    #[arg(long)]
    pub s2_token_compare: bool,
    /// Directory of replacement rule packs (s1.rules ... s9.rules).
    #[arg(long)]
    pub rules_dir: Option<PathBuf>,
    /// Additional rules for one pack, as TYPE=PATH.
    #[arg(long)]
    pub extra_rules: Vec<String>,
    /// License catalog JSON replacing the bundled one.
    #[arg(long)]
    pub license_catalog: Option<PathBuf>,
    /// Comma-separated source file extensions.
    #[arg(long, value_delimiter = ',')]
    pub source_ext: Option<Vec<String>>,
    /// Include per-detector timings in the report.
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub live: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Repository OWNER/NAME.
    #[arg(long)]
    pub repo: String,
    /// Repository facts, issues, or both.
    #[arg(long, value_enum, default_value = "both")]
    pub scope: ScopeArg,
    /// Snapshot file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also capture contributors of repositories linked from issues, one
    /// snapshot each, next to OUT.
    #[arg(long)]
    pub related: bool,
    /// Comma-separated source file extensions whose contents are captured.
    #[arg(long, value_delimiter = ',')]
    pub source_ext: Option<Vec<String>>,
    #[command(flatten)]
    pub live: BudgetArgs,
}

/// Parses `args` and runs the command, writing the report to `out` and
/// messages to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match cli.command {
        Command::Check(args) => check(&args, out, err),
        Command::Fetch(args) => fetch(&args, out),
        Command::Fixtures { dir } => fixtures(&dir, out),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

fn parse_types(raw: &[String]) -> Result<(Vec<BehaviorType>, bool), String> {
    let mut types = Vec::new();
    let mut all = false;
    for t in raw.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
        if t.eq_ignore_ascii_case("all") {
            all = true;
            types.extend(BehaviorType::ALL);
        } else {
            types.push(t.parse::<BehaviorType>()?);
        }
    }
    if types.is_empty() {
        return Err("no behavior type given".into());
    }
    types.sort();
    types.dedup();
    Ok((types, all))
}

fn config(args: &CheckArgs) -> Result<DetectorConfig, String> {
    let mut c = DetectorConfig::default();
    if args.full_links_only {
        c = c.with_full_links_only();
    }
    if let Some(v) = args.s1_threshold {
        c.s1_threshold = v;
    }
    if let Some(v) = args.s9_stale_days {
        c.s9_stale_days = v;
    }
    if let Some(v) = &args.s8_exclude {
        c.s8_excluded_path_segments = v.iter().filter(|s| !s.is_empty()).cloned().collect();
    }
    if let Some(v) = args.s8_max_candidates {
        c.s8_max_candidates = v;
    }
    if let Some(v) = &args.s9_paid_markers {
        c.s9_paid_markers = v.clone();
    }
    if args.s2_token_compare {
        c.s2_require_exact = false;
    }
    if let Some(exts) = &args.source_ext {
        c.source_filter = SourceFilter::new(exts);
    }
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn rules(args: &CheckArgs) -> Result<RulePacks, String> {
    let mut packs = match &args.rules_dir {
        Some(dir) => RulePacks::from_dir(dir).map_err(|e| e.to_string())?,
        None => RulePacks::bundled(),
    };
    for spec in &args.extra_rules {
        let (t, path) = spec
            .split_once('=')
            .ok_or_else(|| format!("--extra-rules expects TYPE=PATH, got `{spec}`"))?;
        let t: BehaviorType = t.parse()?;
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))?;
        packs = packs.with_extra(t, &text).map_err(|e| e.to_string())?;
    }
    Ok(packs)
}

/// `owner/name#number` from an issue or pull request URL.
fn parse_issue_url(url: &str) -> Option<(RepoId, u64)> {
    let rest = url.split("github.com/").nth(1)?;
    let parts: Vec<&str> = rest.trim_end_matches('/').split('/').collect();
    match parts.as_slice() {
        [owner, name, "issues" | "pull", n, ..] => {
            let number = n.split(['#', '?']).next()?.parse().ok()?;
            Some((RepoId::new(owner, name).ok()?, number))
        }
        _ => None,
    }
}

struct Inputs {
    snapshots: Vec<Snapshot>,
    repo: RepoId,
    pair: Option<RepoId>,
    issue: Option<u64>,
}

fn load(path: &Path) -> Result<Snapshot, String> {
    load_snapshot(path).map_err(|e| e.to_string())
}

fn gather(args: &CheckArgs, types: &[BehaviorType], filter: &SourceFilter, config: &DetectorConfig) -> Result<Inputs, String> {
    let issue_number = args.issue.as_deref().and_then(|s| s.parse::<u64>().ok());
    let issue_url = args.issue.as_deref().filter(|_| issue_number.is_none());
    let sources = usize::from(args.repo.is_some()) + usize::from(args.snapshot.is_some()) + usize::from(issue_url.is_some());
    if sources != 1 {
        return Err("give exactly one input: --repo OWNER/NAME, --snapshot PATH or --issue URL".into());
    }
    let mut snapshots = Vec::new();
    let (repo, issue) = if let Some(path) = &args.snapshot {
        let s = load(path)?;
        let id = s.repo.id().map_err(|e| e.to_string())?;
        snapshots.push(s);
        (id, issue_number)
    } else {
        let (owner, name, issue) = match (&args.repo, issue_url) {
            (Some(r), _) => {
                let id: RepoId = r.parse().map_err(|e: crate::fact_model::FactError| e.to_string())?;
                (id.owner().to_string(), id.name().to_string(), issue_number)
            }
            (None, Some(url)) => {
                let (id, n) = parse_issue_url(url).ok_or_else(|| format!("not an issue or pull request URL: `{url}`"))?;
                (id.owner().to_string(), id.name().to_string(), Some(n))
            }
            (None, None) => unreachable!("one input source is present"),
        };
        let wants_issues = types.iter().any(|t| t.is_issue_level());
        let wants_repo = types.iter().any(|t| !t.is_issue_level());
        let scope = match (wants_repo, wants_issues) {
            (true, true) => Scope::Both,
            (false, true) => Scope::IssueLevel,
            _ => Scope::RepoLevel,
        };
        let mut client = args.live.client(filter.clone())?;
        let snap = client.fetch_repository(&owner, &name, scope).map_err(|e| e.to_string())?;
        if types.contains(&BehaviorType::S8) {
            if let Some(issues) = &snap.issues {
                for linked in linked_repositories(issues, config) {
                    let Some((o, n)) = linked.split_once('/') else { continue };
                    match client.fetch_contributors(o, n) {
                        Ok(s) => snapshots.push(s),
                        Err(e) => log::warn!("cannot resolve {linked}: {e}"),
                    }
                }
            }
        }
        let id = snap.repo.id().map_err(|e| e.to_string())?;
        snapshots.insert(0, snap);
        (id, issue)
    };
    let pair = match &args.pair {
        None => None,
        Some(p) if Path::new(p).is_file() => {
            let s = load(Path::new(p))?;
            let id = s.repo.id().map_err(|e| e.to_string())?;
            snapshots.push(s);
            Some(id)
        }
        Some(p) if args.snapshot.is_none() => {
            let id: RepoId = p.parse().map_err(|e: crate::fact_model::FactError| e.to_string())?;
            let mut client = args.live.client(filter.clone())?;
            snapshots.push(client.fetch_repository(id.owner(), id.name(), Scope::RepoLevel).map_err(|e| e.to_string())?);
            Some(id)
        }
        Some(p) => return Err(format!("--pair `{p}` is not a snapshot file; offline checks never fetch")),
    };
    for path in &args.related {
        snapshots.push(load(path)?);
    }
    Ok(Inputs {
        snapshots,
        repo,
        pair,
        issue,
    })
}

fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let (mut types, all) = parse_types(&args.types)?;
    let config = config(args)?;
    let rules = rules(args)?;
    let catalog = match &args.license_catalog {
        Some(p) => LicenseCatalog::load(p).map_err(|e| e.to_string())?,
        None => LicenseCatalog::bundled(),
    };
    if types.contains(&BehaviorType::S2) && args.pair.is_none() {
        if all {
            let _ = writeln!(err, "note: skipping s2, which needs --pair");
            types.retain(|t| *t != BehaviorType::S2);
        } else {
            return Err("s2 needs a second repository (--pair)".into());
        }
    }
    let inputs = gather(args, &types, &config.source_filter, &config)?;
    let (store, pages) = build_store(&inputs.snapshots).map_err(|e| e.to_string())?;
    if !store.has_issue_facts(&inputs.repo) && types.iter().any(|t| t.is_issue_level()) {
        if all {
            let _ = writeln!(err, "note: skipping s1 and s8, the input has no issue facts");
            types.retain(|t| !t.is_issue_level());
        } else {
            return Err(format!(
                "issue-level types need issue facts, but the snapshot of {} was captured without issues",
                inputs.repo
            ));
        }
    }
    let evaluation_date = args.date.unwrap_or_else(|| Utc::now().date_naive());
    let det = Detection {
        store: &store,
        pages: &pages,
        config: &config,
        catalog: &catalog,
        rules: &rules,
        evaluation_date,
    };
    let targets = Targets {
        repo: inputs.repo.clone(),
        pair: inputs.pair.clone(),
        issue: inputs.issue,
    };
    let (findings, timings) = run_detectors(&det, &targets, &types).map_err(|e| e.to_string())?;
    let mut subjects = vec![match inputs.issue {
        Some(n) => Subject::issue(inputs.repo.clone(), n),
        None => Subject::repo(inputs.repo.clone()),
    }];
    if let Some(p) = &inputs.pair {
        subjects.push(Subject::repo(p.clone()));
    }
    let mut report = RunReport::new(evaluation_date, subjects, findings);
    if args.timings {
        report = report.with_timings(&timings);
    }
    let rendered = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    out.write_all(rendered.as_bytes()).map_err(|e| e.to_string())?;
    Ok(report.exit_status())
}

fn fetch(args: &FetchArgs, out: &mut dyn Write) -> Result<i32, String> {
    let id: RepoId = args.repo.parse().map_err(|e: crate::fact_model::FactError| e.to_string())?;
    let filter = args.source_ext.as_ref().map(SourceFilter::new).unwrap_or_default();
    let mut client = args.live.client(filter)?;
    let snap = client
        .fetch_repository(id.owner(), id.name(), args.scope.into())
        .map_err(|e| e.to_string())?;
    save_snapshot(&snap, &args.out).map_err(|e| e.to_string())?;
    let _ = writeln!(out, "wrote {} ({} requests)", args.out.display(), client.requests_used());
    if args.related {
        let dir = args.out.parent().unwrap_or(Path::new("."));
        for linked in linked_repositories(snap.issues.as_deref().unwrap_or(&[]), &DetectorConfig::default()) {
            let Some((o, n)) = linked.split_once('/') else { continue };
            let related = client.fetch_contributors(o, n).map_err(|e| e.to_string())?;
            let path = dir.join(format!("{o}__{n}.json"));
            save_snapshot(&related, &path).map_err(|e| e.to_string())?;
            let _ = writeln!(out, "wrote {}", path.display());
        }
    }
    Ok(0)
}

fn fixtures(dir: &Path, out: &mut dyn Write) -> Result<i32, String> {
    let outcomes = run_fixture_suite(dir).map_err(|e| e.to_string())?;
    out.write_all(render_matrix(&outcomes).as_bytes()).map_err(|e| e.to_string())?;
    Ok(exit_status(false, outcomes.iter().any(|o| !o.passed()), false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn issue_urls() {
        let (id, n) = parse_issue_url("https://github.com/o/r/issues/12").unwrap();
        assert_eq!((id.as_str(), n), ("o/r", 12));
        assert_eq!(parse_issue_url("https://github.com/o/r/pull/3#discussion").unwrap().1, 3);
        assert!(parse_issue_url("https://github.com/o/r").is_none());
    }

    #[test]
    fn type_lists() {
        let (t, all) = parse_types(&["s5".into(), "S1".into(), "s5".into()]).unwrap();
        assert_eq!(t, [BehaviorType::S1, BehaviorType::S5]);
        assert!(!all);
        assert_eq!(parse_types(&["all".into()]).unwrap().0.len(), 6);
        assert!(parse_types(&["s3".into()]).is_err());
    }
}
