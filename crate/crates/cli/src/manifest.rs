use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub pinned_core: &'static str,
    pub pinned_cli: &'static str,
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub versions: Versions,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunManifest {
    pub fn start(argv: &[String]) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Self {
            command: argv.to_vec(),
            inputs: Vec::new(),
            seeds: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            versions: Versions {
                pinned_core: pinned_core::VERSION,
                pinned_cli: env!("CARGO_PKG_VERSION"),
            },
            started_unix,
            wall_clock_seconds: 0.0,
            clock: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, path: &std::path::Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    pub fn finish(&mut self) {
        if let Some(c) = self.clock {
            self.wall_clock_seconds = c.elapsed().as_secs_f64();
        }
    }
}

/// A report with its manifest attached.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub manifest: RunManifest,
    pub report: T,
}
