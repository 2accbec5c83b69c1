//! Loading fixture cases with an overridable detector configuration.

use std::path::{Path, PathBuf};

use ethoscan::detectors::{run_detectors, Detection, DetectorConfig, Findings, PageCache, RulePacks, Targets};
use ethoscan::fact_model::{BehaviorType, FactStore, RepoId};
use ethoscan::fixtures::{case_dirs, load_case, FixtureCase};
use ethoscan::ingestion::{build_store, load_snapshot};
use ethoscan::license::LicenseCatalog;

pub fn fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub struct Loaded {
    pub dir: PathBuf,
    pub case: FixtureCase,
    pub store: FactStore,
    pub pages: PageCache,
    pub targets: Targets,
}

pub fn load(dir: &Path) -> Loaded {
    let case = load_case(dir).unwrap();
    let snaps: Vec<_> = case
        .snapshot_paths
        .iter()
        .map(|p| load_snapshot(&dir.join(p)).unwrap())
        .collect();
    let (store, pages) = build_store(&snaps).unwrap();
    let targets = Targets {
        repo: snaps[0].repo.id().unwrap(),
        pair: case.pair.as_deref().map(|p| p.parse::<RepoId>().unwrap()),
        issue: case.issue,
    };
    Loaded {
        dir: dir.to_path_buf(),
        case,
        store,
        pages,
        targets,
    }
}

pub fn all() -> Vec<Loaded> {
    case_dirs(&fixture_root()).unwrap().iter().map(|d| load(d)).collect()
}

impl Loaded {
    pub fn types(&self) -> Vec<BehaviorType> {
        self.case.detectors().unwrap()
    }

    pub fn run(&self, config: &DetectorConfig, types: &[BehaviorType]) -> Findings {
        let catalog = LicenseCatalog::bundled();
        let rules = RulePacks::bundled();
        let det = Detection {
            store: &self.store,
            pages: &self.pages,
            config,
            catalog: &catalog,
            rules: &rules,
            evaluation_date: self.case.evaluation_date,
        };
        run_detectors(&det, &self.targets, types).unwrap().0
    }
}
