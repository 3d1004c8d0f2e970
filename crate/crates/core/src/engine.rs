//! The memory-amortized inference loop: a store of (context, content) pairs,
//! retrieval with local adaptation, bootstrapping through consolidation, and
//! the wake/sleep alternation that fills store and scaffold.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::complex::{CellId, Chain, ChainComplex};
use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;
use crate::graph::Graph;
use crate::homology::{homology_basis, HomologyBasis};
use crate::memory::{
    conditional_entropy, consolidate, decompose_trace, extract_backbone, joint_uncertainty, ConsolidatedTrace,
    TraceBundle,
};
use crate::parity::parity_profile;
use crate::search::{close_cycle, dp_lookup, savitch_reach, ExploredComplex, ScaffoldTable, Trajectory};
use crate::sheaf::content_recurrence_walk;

pub const STORE_FORMAT_VERSION: u32 = 1;

/// Query context. Ordering is by source, target, then signature.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContextKey {
    pub source: CellId,
    pub target: CellId,
    /// `H_0` coordinates of the source followed by those of the target.
    pub class_signature: Gf2Vec,
}

impl ContextKey {
    pub fn new(basis0: &HomologyBasis, source: CellId, target: CellId) -> Result<Self> {
        let coords = |v: CellId| -> Result<Gf2Vec> {
            basis0.complex().cell(v).filter(|c| c.dim == 0).ok_or(Error::UnknownVertex(v))?;
            Ok(basis0.coordinates(&Chain::from_cells(0, [v]))?.a)
        };
        Ok(Self { source, target, class_signature: coords(source)?.concat(&coords(target)?) })
    }

    /// Hamming distance on signatures plus 2 per differing endpoint.
    pub fn distance(&self, other: &ContextKey) -> usize {
        self.class_signature.hamming(&other.class_signature)
            + 2 * usize::from(self.source != other.source)
            + 2 * usize::from(self.target != other.target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentValue {
    /// Edge ids of the stored path.
    pub path: Vec<CellId>,
    pub vertices: Vec<CellId>,
    pub cost: usize,
    pub ltm: ConsolidatedTrace,
}

impl ContentValue {
    pub fn trajectory(&self) -> Trajectory {
        Trajectory { vertices: self.vertices.clone(), edges: self.path.clone(), expansions: 0 }
    }
}

/// Entries keyed by context, at most one per key, with optional capacity and
/// least-recently-retrieved eviction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MemoryStore {
    entries: BTreeMap<ContextKey, ContentValue>,
    recency: BTreeMap<ContextKey, u64>,
    capacity: Option<usize>,
    clock: u64,
}

impl MemoryStore {
    pub fn new(capacity: Option<usize>) -> Self {
        Self { capacity, ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn get(&self, key: &ContextKey) -> Option<&ContentValue> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContextKey, &ContentValue)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &ContextKey> {
        self.entries.keys()
    }

    /// Marks a key as just retrieved.
    pub fn touch(&mut self, key: &ContextKey) {
        if self.entries.contains_key(key) {
            self.clock += 1;
            self.recency.insert(key.clone(), self.clock);
        }
    }

    /// Inserts or replaces; returns the evicted key when capacity forced one
    /// out.
    pub fn insert(&mut self, key: ContextKey, value: ContentValue) -> Option<ContextKey> {
        if self.capacity == Some(0) {
            return None;
        }
        let mut evicted = None;
        if !self.entries.contains_key(&key) && self.capacity.is_some_and(|c| self.entries.len() >= c) {
            let stale = self.recency.iter().min_by_key(|(k, &t)| (t, (*k).clone())).map(|(k, _)| k.clone()).unwrap();
            self.entries.remove(&stale);
            self.recency.remove(&stale);
            evicted = Some(stale);
        }
        self.clock += 1;
        self.recency.insert(key.clone(), self.clock);
        self.entries.insert(key, value);
        evicted
    }

    fn set_ltm(&mut self, key: &ContextKey, ltm: ConsolidatedTrace) {
        if let Some(v) = self.entries.get_mut(key) {
            v.ltm = ltm;
        }
    }

    pub fn snapshot(&self) -> StoreSnapshot {
        StoreSnapshot {
            version: STORE_FORMAT_VERSION,
            capacity: self.capacity,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| StoreEntry { key: k.clone(), value: v.clone(), last_retrieved: self.recency[k] })
                .collect(),
        }
    }

    pub fn from_snapshot(s: StoreSnapshot) -> Result<Self> {
        if s.version != STORE_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(s.version));
        }
        let mut store = MemoryStore::new(s.capacity);
        for e in s.entries {
            store.clock = store.clock.max(e.last_retrieved);
            store.recency.insert(e.key.clone(), e.last_retrieved);
            store.entries.insert(e.key, e.value);
        }
        Ok(store)
    }

    /// `(context, ltm chain)` pairs.
    pub fn pairs(&self) -> Vec<(ContextKey, Chain)> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.ltm.ltm.clone())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoreSnapshot {
    pub version: u32,
    pub capacity: Option<usize>,
    pub entries: Vec<StoreEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoreEntry {
    pub key: ContextKey,
    pub value: ContentValue,
    pub last_retrieved: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Retrieved {
    pub key: ContextKey,
    pub value: ContentValue,
    pub distance: usize,
}

/// Nearest entry within `tau`; ties go to the lower key.
pub fn retrieve(store: &MemoryStore, query: &ContextKey, tau: usize) -> Option<Retrieved> {
    let mut best: Option<(&ContextKey, &ContentValue, usize)> = None;
    for (k, v) in store.iter() {
        let d = query.distance(k);
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((k, v, d));
        }
    }
    best.filter(|&(_, _, d)| d <= tau).map(|(k, v, d)| Retrieved { key: k.clone(), value: v.clone(), distance: d })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adapted {
    pub value: ContentValue,
    pub expansions: u64,
}

/// Breadth-first search from `start` to the first vertex on the stored path.
fn bfs_to_path(
    g: &Graph,
    start: usize,
    on_path: &HashMap<usize, usize>,
    used: &mut u64,
    budget: u64,
) -> Result<(Vec<usize>, usize)> {
    if let Some(&pos) = on_path.get(&start) {
        return Ok((vec![start], pos));
    }
    let mut parent = vec![usize::MAX; g.vertex_count()];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        if *used >= budget {
            return Err(Error::AdaptationFailed(format!("budget of {budget} expansions exhausted")));
        }
        *used += 1;
        for &w in g.neighbors(u) {
            if parent[w] != usize::MAX {
                continue;
            }
            parent[w] = u;
            if let Some(&pos) = on_path.get(&w) {
                let mut walk = vec![w];
                while *walk.last().unwrap() != start {
                    walk.push(parent[*walk.last().unwrap()]);
                }
                walk.reverse();
                return Ok((walk, pos));
            }
            queue.push_back(w);
        }
    }
    Err(Error::AdaptationFailed(format!("vertex {} cannot reach the stored path", g.id_of(start))))
}

fn adapt_counted(candidate: &ContentValue, query: &ContextKey, g: &Graph, budget: u64) -> (Result<ContentValue>, u64) {
    let mut used = 0;
    let result = (|| {
        let (s, t) = (g.index_of(query.source)?, g.index_of(query.target)?);
        let mut on_path = HashMap::new();
        for (i, &v) in candidate.vertices.iter().enumerate() {
            on_path.entry(g.index_of(v)?).or_insert(i);
        }
        let (head, i) = bfs_to_path(g, s, &on_path, &mut used, budget)?;
        let (mut tail, j) = bfs_to_path(g, t, &on_path, &mut used, budget)?;
        tail.reverse();

        let mut vertices: Vec<CellId> = head.iter().map(|&x| g.id_of(x)).collect();
        let mut edges = g.walk_edges(&head)?;
        if i <= j {
            vertices.extend(&candidate.vertices[i + 1..=j]);
            edges.extend(&candidate.path[i..j]);
        } else {
            vertices.extend(candidate.vertices[j..i].iter().rev());
            edges.extend(candidate.path[j..i].iter().rev());
        }
        vertices.extend(tail[1..].iter().map(|&x| g.id_of(x)));
        edges.extend(g.walk_edges(&tail)?);
        Ok(ContentValue { cost: edges.len(), path: edges, vertices, ltm: candidate.ltm.clone() })
    })();
    (result, used)
}

/// Splices the query endpoints onto a retrieved path with bounded
/// breadth-first repair. The stored consolidated trace is carried along.
pub fn adapt(candidate: &ContentValue, query: &ContextKey, g: &Graph, budget: u64) -> Result<Adapted> {
    let (value, expansions) = adapt_counted(candidate, query, g, budget);
    Ok(Adapted { value: value?, expansions })
}

/// The stored path plus the virtual return edge of the query endpoints.
fn closed_chain(phi: &ContentValue, psi: &ContextKey, explored: &ExploredComplex) -> Result<Chain> {
    let walk = Chain::from_cells(1, phi.path.iter().copied());
    if psi.source == psi.target {
        return Ok(walk);
    }
    let e = explored.virtual_edge(psi.source, psi.target).ok_or(Error::NotACycle)?;
    Ok(walk.add(&Chain::from_cells(1, [e])))
}

/// One update step: close, decompose against `bundle`, consolidate.
pub fn bootstrap(
    phi: &ContentValue,
    psi: &ContextKey,
    explored: &ExploredComplex,
    bundle: &TraceBundle,
) -> Result<ContentValue> {
    let chain = closed_chain(phi, psi, explored)?;
    let trace = decompose_trace(&chain, bundle)?;
    Ok(ContentValue { ltm: consolidate(&trace, &bundle.basis), ..phi.clone() })
}

/// Bundle with an all-zero backbone, for refreshing classes on a basis.
pub fn empty_bundle(basis: HomologyBasis) -> TraceBundle {
    let backbone = Gf2Vec::zeros(basis.betti());
    TraceBundle { traces: Vec::new(), basis, backbone }
}

/// Whether retrieve-then-adapt on `key` lands in the same homology class as
/// bootstrapping the stored value.
pub fn half_step_consistency(
    store: &MemoryStore,
    key: &ContextKey,
    explored: &ExploredComplex,
    bundle: &TraceBundle,
    g: &Graph,
    budget: u64,
) -> Result<bool> {
    let stored = store.get(key).ok_or(Error::KeyAbsent)?;
    let Some(hit) = retrieve(store, key, 0) else { return Ok(false) };
    let Ok(adapted) = adapt(&hit.value, key, g, budget) else { return Ok(false) };
    Ok(match bootstrap(stored, key, explored, bundle) {
        Ok(fresh) => fresh.ltm.class == adapted.value.ltm.class,
        Err(_) => false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Scaffold,
    Retrieved,
    Search,
    Unreachable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Answer {
    pub source: CellId,
    pub target: CellId,
    pub route: Route,
    pub trajectory: Option<Trajectory>,
    pub expansions: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WakeStats {
    pub expansions: u64,
    pub dp_expansions: u64,
    pub adapt_expansions: u64,
    pub search_expansions: u64,
    pub scaffold_hits: usize,
    pub retrieval_hits: usize,
    pub searches: usize,
    pub unreachable: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WakeReport {
    pub answers: Vec<Answer>,
    pub buffer: Vec<Trajectory>,
    pub retrieved: Vec<ContextKey>,
    pub stats: WakeStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SleepMetrics {
    pub chi: i64,
    pub capacity: usize,
    pub phi_topo: usize,
    #[serde(rename = "U")]
    pub uncertainty: f64,
    pub store_size: usize,
    pub scaffold_size: usize,
    pub inserted: usize,
    pub dropped_noise: usize,
    pub dropped_nonpersistent: usize,
    pub virtual_edges: usize,
    /// `H(Phi|Psi)` over the replayed pairs, on raw chains and after
    /// consolidation.
    pub h_phi_psi_before: f64,
    pub h_phi_psi_after: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmortizationReport {
    pub full_cost: u64,
    pub retrieval_cost: u64,
    pub epsilon: usize,
    pub route: Route,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub tau: usize,
    /// Adaptation budget; defaults to four times the diameter estimate.
    pub budget: Option<u64>,
    /// Savitch length bound; defaults to the vertex count.
    pub k: Option<usize>,
    pub band: (f64, f64),
    pub capacity: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { tau: 2, budget: None, k: None, band: (0.0, 0.0), capacity: None }
    }
}

/// Graph, explored complex, store and scaffold of one navigation run.
#[derive(Clone, Debug)]
pub struct Engine {
    graph: Graph,
    components: Vec<usize>,
    basis0: HomologyBasis,
    explored: ExploredComplex,
    pub store: MemoryStore,
    pub scaffold: ScaffoldTable,
    tau: usize,
    budget: u64,
    k: usize,
    band: (f64, f64),
}

impl Engine {
    pub fn new(base: ChainComplex, config: &EngineConfig) -> Result<Self> {
        if config.band.0 > config.band.1 {
            return Err(Error::BandEmpty { lo: config.band.0, hi: config.band.1 });
        }
        let graph = Graph::from_complex(&base);
        let basis0 = homology_basis(&base, 0)?;
        let budget = config.budget.unwrap_or(4 * graph.diameter_estimate().max(1) as u64);
        let k = config.k.unwrap_or(graph.vertex_count()).max(1);
        Ok(Self {
            components: graph.components(),
            graph,
            basis0,
            explored: ExploredComplex::new(base),
            store: MemoryStore::new(config.capacity),
            scaffold: ScaffoldTable::new(),
            tau: config.tau,
            budget,
            k,
            band: config.band,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn explored(&self) -> &ExploredComplex {
        &self.explored
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn key(&self, s: CellId, t: CellId) -> Result<ContextKey> {
        ContextKey::new(&self.basis0, s, t)
    }

    fn connected(&self, s: CellId, t: CellId) -> Result<bool> {
        Ok(self.components[self.graph.index_of(s)?] == self.components[self.graph.index_of(t)?])
    }

    /// From-scratch search, loop-erased.
    fn search(&self, s: CellId, t: CellId) -> Result<(Option<Trajectory>, u64)> {
        if !self.connected(s, t)? {
            return Ok((None, 0));
        }
        let (traj, stats) = savitch_reach(&self.graph, s, t, self.k)?;
        Ok((traj.map(|t| t.loop_erased()), stats.expansions))
    }

    fn answer(&self, s: CellId, t: CellId) -> (Answer, Option<ContextKey>) {
        let mut answer =
            Answer { source: s, target: t, route: Route::Unreachable, trajectory: None, expansions: 0, error: None };
        if let Err(e) = self.graph.index_of(s).and(self.graph.index_of(t)) {
            answer.error = Some(e.to_string());
            return (answer, None);
        }
        if let Some(traj) = dp_lookup(&self.scaffold, s, t) {
            answer.expansions = traj.expansions;
            answer.route = Route::Scaffold;
            answer.trajectory = Some(traj);
            return (answer, None);
        }
        let key = self.key(s, t).expect("vertices were checked");
        if let Some(hit) = retrieve(&self.store, &key, self.tau) {
            let (adapted, used) = adapt_counted(&hit.value, &key, &self.graph, self.budget);
            answer.expansions += used;
            if let Ok(value) = adapted {
                let mut traj = value.trajectory();
                traj.expansions = used;
                answer.route = Route::Retrieved;
                answer.trajectory = Some(traj);
                return (answer, Some(hit.key));
            }
        }
        match self.search(s, t) {
            Ok((Some(traj), used)) => {
                answer.expansions += used;
                answer.route = Route::Search;
                answer.trajectory = Some(traj);
            }
            Ok((None, used)) => {
                answer.expansions += used;
                answer.error = Some(Error::Unreachable(s, t).to_string());
            }
            Err(e) => answer.error = Some(e.to_string()),
        }
        (answer, None)
    }

    /// Answers every query against a fixed store and scaffold; nothing is
    /// written.
    pub fn wake_step(&self, queries: &[(CellId, CellId)]) -> WakeReport {
        let mut report = WakeReport::default();
        for &(s, t) in queries {
            let (answer, used_key) = self.answer(s, t);
            let st = &mut report.stats;
            st.expansions += answer.expansions;
            match answer.route {
                Route::Scaffold => {
                    st.scaffold_hits += 1;
                    st.dp_expansions += answer.expansions;
                }
                Route::Retrieved => {
                    st.retrieval_hits += 1;
                    st.adapt_expansions += answer.expansions;
                }
                Route::Search => {
                    st.searches += 1;
                    st.search_expansions += answer.expansions;
                }
                Route::Unreachable => st.unreachable += 1,
            }
            if let Some(traj) = &answer.trajectory {
                report.buffer.push(traj.clone());
            }
            report.retrieved.extend(used_key);
            report.answers.push(answer);
        }
        report
    }

    /// Replays the episodic buffer: closes every walk, keeps the persistent
    /// nontrivial ones, consolidates them into the store, and memoizes every
    /// answered path into the scaffold. Existing entries are refreshed on the
    /// new homology basis.
    pub fn sleep_step(&mut self, wake: &WakeReport) -> Result<SleepMetrics> {
        let mut m = SleepMetrics::default();
        for key in &wake.retrieved {
            self.store.touch(key);
        }

        let mut closed = Vec::new();
        for raw in &wake.buffer {
            let traj = raw.loop_erased();
            if traj.is_empty() {
                m.dropped_noise += 1;
                continue;
            }
            let closure = close_cycle(&traj, &mut self.explored)?;
            if closure.chain.is_zero() {
                m.dropped_noise += 1;
                continue;
            }
            closed.push((traj, closure));
        }

        let filtration = self.explored.filtration();
        let mut survivors = Vec::new();
        for (traj, closure) in closed {
            let mut vertices = traj.vertices.clone();
            vertices.push(traj.source());
            let mut edges = traj.edges.clone();
            edges.extend(closure.virtual_edge);
            if content_recurrence_walk(&vertices, &edges, &filtration, self.band).unwrap_or(false) {
                survivors.push((traj, closure.chain));
            } else {
                m.dropped_nonpersistent += 1;
                self.scaffold.condense(&traj, None)?;
            }
        }

        if !survivors.is_empty() || !self.store.is_empty() {
            let basis = homology_basis(self.explored.complex(), 1)?;
            let refresh = empty_bundle(basis.clone());
            let keys: Vec<ContextKey> = self.store.keys().cloned().collect();
            for key in keys {
                let fresh = bootstrap(self.store.get(&key).unwrap(), &key, &self.explored, &refresh)?;
                self.store.set_ltm(&key, fresh.ltm);
            }
            if !survivors.is_empty() {
                let bundle = extract_backbone(survivors.iter().map(|(_, c)| c.clone()).collect(), &basis)?;
                let mut before = Vec::new();
                let mut after = Vec::new();
                for (traj, chain) in &survivors {
                    let key = self.key(traj.source(), traj.target())?;
                    let ltm = consolidate(&decompose_trace(chain, &bundle)?, &basis);
                    self.scaffold.condense(traj, Some(&ltm.class))?;
                    before.push((key.clone(), chain.clone()));
                    after.push((key.clone(), ltm.ltm.clone()));
                    let value = ContentValue {
                        path: traj.edges.clone(),
                        vertices: traj.vertices.clone(),
                        cost: traj.len(),
                        ltm,
                    };
                    self.store.insert(key, value);
                    m.inserted += 1;
                }
                m.h_phi_psi_before = conditional_entropy(&before);
                m.h_phi_psi_after = conditional_entropy(&after);
            }
        }

        let profile = parity_profile(self.explored.complex());
        m.chi = profile.chi;
        m.capacity = profile.capacity;
        m.phi_topo = profile.phi_topo;
        m.uncertainty = if self.store.is_empty() { 0.0 } else { joint_uncertainty(&self.store.pairs())? };
        m.store_size = self.store.len();
        m.scaffold_size = self.scaffold.len();
        m.virtual_edges = self.explored.virtual_count();
        Ok(m)
    }

    /// Bundle with a zero backbone on the current explored complex.
    pub fn current_bundle(&self) -> Result<TraceBundle> {
        Ok(empty_bundle(homology_basis(self.explored.complex(), 1)?))
    }

    pub fn half_step(&self, key: &ContextKey) -> Result<bool> {
        let bundle = self.current_bundle()?;
        half_step_consistency(&self.store, key, &self.explored, &bundle, &self.graph, self.budget)
    }

    /// `(consistent, total)` over every store entry.
    pub fn half_step_sweep(&self) -> Result<(usize, usize)> {
        let bundle = self.current_bundle()?;
        let mut ok = 0;
        for key in self.store.keys() {
            if half_step_consistency(&self.store, key, &self.explored, &bundle, &self.graph, self.budget)? {
                ok += 1;
            }
        }
        Ok((ok, self.store.len()))
    }

    /// Compares a from-scratch search with the amortized route for one query.
    pub fn amortization_gap(&self, s: CellId, t: CellId) -> Result<AmortizationReport> {
        let shortest = self.graph.shortest_path(s, t)?.ok_or(Error::Unreachable(s, t))?.len() - 1;
        let (full, full_cost) = self.search(s, t)?;
        let full = full.ok_or(Error::Unreachable(s, t))?;
        let (route, cost, len) = if let Some(traj) = dp_lookup(&self.scaffold, s, t) {
            (Route::Scaffold, traj.expansions, traj.len())
        } else {
            let key = self.key(s, t)?;
            match retrieve(&self.store, &key, self.tau)
                .map(|hit| adapt_counted(&hit.value, &key, &self.graph, self.budget))
            {
                Some((Ok(v), used)) => (Route::Retrieved, used, v.cost),
                _ => (Route::Search, full_cost, full.len()),
            }
        };
        Ok(AmortizationReport { full_cost, retrieval_cost: cost, epsilon: len - shortest, route })
    }
}
