//! Seeded wake/sleep experiments and their metric streams.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{CellId, ChainComplex};
use crate::engine::{Engine, EngineConfig, StoreSnapshot, STORE_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::search::ScaffoldTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub seed: u64,
    /// Number of random queries per epoch (ignored when `schedule` is given).
    #[serde(default)]
    pub queries: usize,
    /// Draw the queries from this many distinct random pairs.
    #[serde(default)]
    pub pool: Option<usize>,
    /// Explicit `[source, target]` list, replayed every epoch.
    #[serde(default)]
    pub schedule: Option<Vec<(CellId, CellId)>>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub band: (f64, f64),
    #[serde(default = "default_tau")]
    pub tau: usize,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub capacity: Option<usize>,
}

fn default_epochs() -> usize {
    1
}

fn default_tau() -> usize {
    2
}

impl ExperimentConfig {
    pub fn new(graph: GraphSpec) -> Self {
        Self {
            graph,
            seed: 0,
            queries: 0,
            pool: None,
            schedule: None,
            epochs: default_epochs(),
            band: (0.0, 0.0),
            tau: default_tau(),
            budget: None,
            k: None,
            capacity: None,
        }
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.into()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.band.0.is_nan() || self.band.1.is_nan() || self.band.0 > self.band.1 {
            return bad("band must satisfy lo <= hi");
        }
        if self.k == Some(0) {
            return bad("k must be at least 1");
        }
        if self.capacity == Some(0) {
            return bad("capacity must be at least 1");
        }
        if self.pool == Some(0) && self.queries > 0 && self.schedule.is_none() {
            return bad("pool must be non-empty when queries are drawn from it");
        }
        Ok(())
    }

    fn engine_config(&self) -> EngineConfig {
        EngineConfig { tau: self.tau, budget: self.budget, k: self.k, band: self.band, capacity: self.capacity }
    }

    /// The query list replayed every epoch.
    pub fn schedule_for(&self, graph: &ChainComplex) -> Result<Vec<(CellId, CellId)>> {
        let vertices = graph.cells_of_dim(0);
        if let Some(s) = &self.schedule {
            for &(u, v) in s {
                for x in [u, v] {
                    if graph.cell(x).is_none_or(|c| c.dim != 0) {
                        return Err(Error::ConfigInvalid(format!("schedule names unknown vertex {x}")));
                    }
                }
            }
            return Ok(s.clone());
        }
        if self.queries == 0 {
            return Ok(Vec::new());
        }
        if vertices.len() < 2 {
            return Err(Error::ConfigInvalid("random queries need at least two vertices".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        let pair = |rng: &mut ChaCha8Rng| loop {
            let (a, b) = (rng.gen_range(0..vertices.len()), rng.gen_range(0..vertices.len()));
            if a != b {
                return (vertices[a], vertices[b]);
            }
        };
        Ok(match self.pool {
            Some(p) => {
                let pool: Vec<_> = (0..p).map(|_| pair(&mut rng)).collect();
                (0..self.queries).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
            }
            None => (0..self.queries).map(|_| pair(&mut rng)).collect(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub queries: usize,
    pub answered: usize,
    pub unreachable: usize,
    pub expansions: u64,
    pub search_expansions: u64,
    pub dp_expansions: u64,
    pub adapt_expansions: u64,
    pub scaffold_hits: usize,
    pub retrieval_hits: usize,
    pub searches: usize,
    pub store_size: usize,
    pub scaffold_size: usize,
    pub chi: i64,
    pub capacity: usize,
    pub phi_topo: usize,
    #[serde(rename = "U")]
    pub uncertainty: f64,
    pub epsilon_mean: f64,
    pub h_phi_psi_before: f64,
    pub h_phi_psi_after: f64,
    pub inserted: usize,
    pub dropped: usize,
    pub half_step_consistent: usize,
    pub half_step_total: usize,
    /// Answer length for every query, in schedule order (`null` if
    /// unanswered).
    pub answer_lengths: Vec<Option<usize>>,
}

/// Everything needed to resume navigation from a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub version: u32,
    pub store: StoreSnapshot,
    pub scaffold: ScaffoldTable,
}

impl EngineState {
    pub fn parse(json: &str) -> Result<Self> {
        let state: EngineState = serde_json::from_str(json)?;
        if state.version != STORE_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(state.version));
        }
        Ok(state)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub epochs: Vec<EpochMetrics>,
    pub engine: Engine,
}

impl ExperimentReport {
    /// One JSON document per epoch, newline terminated.
    pub fn metrics_jsonl(&self) -> String {
        self.epochs.iter().map(|m| serde_json::to_string(m).unwrap() + "\n").collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("epoch,expansions,store_size,chi,capacity,phi_topo,U,epsilon_mean\n");
        for m in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                m.epoch, m.expansions, m.store_size, m.chi, m.capacity, m.phi_topo, m.uncertainty, m.epsilon_mean
            )
            .unwrap();
        }
        out
    }

    pub fn state(&self) -> EngineState {
        EngineState {
            version: STORE_FORMAT_VERSION,
            store: self.engine.store.snapshot(),
            scaffold: self.engine.scaffold.clone(),
        }
    }
}

/// Runs `epochs` rounds of wake then sleep over the same query schedule.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let graph = config.graph.build(config.seed)?;
    let schedule = config.schedule_for(&graph)?;
    let mut engine = Engine::new(graph, &config.engine_config()).map_err(|e| Error::ConfigInvalid(e.to_string()))?;

    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let wake = engine.wake_step(&schedule);
        let mut gaps = Vec::new();
        let mut lengths = Vec::with_capacity(wake.answers.len());
        for a in &wake.answers {
            let len = a.trajectory.as_ref().map(|t| t.len());
            if let Some(len) = len {
                let shortest = engine.graph().shortest_path(a.source, a.target)?.map_or(len, |p| p.len() - 1);
                gaps.push((len - shortest) as f64);
            }
            lengths.push(len);
        }
        let sleep = engine.sleep_step(&wake)?;
        let (consistent, total) = engine.half_step_sweep()?;
        let st = wake.stats;
        epochs.push(EpochMetrics {
            epoch,
            queries: schedule.len(),
            answered: gaps.len(),
            unreachable: st.unreachable,
            expansions: st.expansions,
            search_expansions: st.search_expansions,
            dp_expansions: st.dp_expansions,
            adapt_expansions: st.adapt_expansions,
            scaffold_hits: st.scaffold_hits,
            retrieval_hits: st.retrieval_hits,
            searches: st.searches,
            store_size: sleep.store_size,
            scaffold_size: sleep.scaffold_size,
            chi: sleep.chi,
            capacity: sleep.capacity,
            phi_topo: sleep.phi_topo,
            uncertainty: sleep.uncertainty,
            epsilon_mean: if gaps.is_empty() { 0.0 } else { gaps.iter().sum::<f64>() / gaps.len() as f64 },
            h_phi_psi_before: sleep.h_phi_psi_before,
            h_phi_psi_after: sleep.h_phi_psi_after,
            inserted: sleep.inserted,
            dropped: sleep.dropped_noise + sleep.dropped_nonpersistent,
            half_step_consistent: consistent,
            half_step_total: total,
            answer_lengths: lengths,
        });
    }
    Ok(ExperimentReport { epochs, engine })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_config(queries: usize, epochs: usize) -> ExperimentConfig {
        ExperimentConfig {
            queries,
            epochs,
            seed: 11,
            pool: Some(10),
            ..ExperimentConfig::new(GraphSpec::Grid { n: 5 })
        }
    }

    #[test]
    fn second_epoch_is_cheaper() {
        let r = run_experiment(&grid_config(20, 2)).unwrap();
        assert_eq!(r.epochs.len(), 2);
        assert!(r.epochs[1].expansions < r.epochs[0].expansions);
        assert_eq!(r.epochs[1].search_expansions, 0);
        assert_eq!(r.epochs[1].half_step_consistent, r.epochs[1].half_step_total);
    }

    #[test]
    fn zero_queries_give_zero_activity() {
        let r = run_experiment(&grid_config(0, 2)).unwrap();
        for m in &r.epochs {
            assert_eq!((m.expansions, m.store_size, m.scaffold_size, m.answered), (0, 0, 0, 0));
            assert_eq!(m.uncertainty, 0.0);
            assert_eq!(m.epsilon_mean, 0.0);
        }
    }

    #[test]
    fn fixed_seed_replays_exactly() {
        let cfg = ExperimentConfig { graph: GraphSpec::Gnp { n: 16, p: 0.2 }, ..grid_config(15, 2) };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.metrics_jsonl(), b.metrics_jsonl());
        assert_eq!(a.summary_csv(), b.summary_csv());
    }

    #[test]
    fn config_validation() {
        let bad = ExperimentConfig { epochs: 0, ..grid_config(1, 1) };
        assert!(matches!(run_experiment(&bad), Err(Error::ConfigInvalid(_))));
        let bad = ExperimentConfig { band: (1.0, 0.0), ..grid_config(1, 1) };
        assert!(matches!(run_experiment(&bad), Err(Error::ConfigInvalid(_))));
        let bad = ExperimentConfig { schedule: Some(vec![(0, 99)]), ..grid_config(1, 1) };
        assert!(matches!(run_experiment(&bad), Err(Error::ConfigInvalid(_))));
        assert!(matches!(
            ExperimentConfig::parse(r#"{"graph":{"family":"grid","n":3},"x":1}"#),
            Err(Error::ConfigInvalid(_))
        ));
        let parsed =
            ExperimentConfig::parse(r#"{"graph":{"family":"grid","n":3},"band":[0,1],"schedule":[[0,8]]}"#).unwrap();
        assert_eq!(parsed.band, (0.0, 1.0));
        assert_eq!(parsed.schedule, Some(vec![(0, 8)]));
    }

    #[test]
    fn csv_header_and_rows() {
        let r = run_experiment(&grid_config(5, 2)).unwrap();
        let csv = r.summary_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "epoch,expansions,store_size,chi,capacity,phi_topo,U,epsilon_mean");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn state_roundtrip() {
        let r = run_experiment(&grid_config(5, 1)).unwrap();
        let json = serde_json::to_string(&r.state()).unwrap();
        assert_eq!(EngineState::parse(&json).unwrap(), r.state());
    }
}
