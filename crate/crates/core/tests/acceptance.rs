//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::time::{Duration, Instant};

use mai_core::complex::{Cell, CellId, Chain, ChainComplex, Filtration};
use mai_core::experiment::{run_experiment, ExperimentConfig};
use mai_core::fixtures;
use mai_core::generate::{
    fundamental_cycle, mutate, random_complex, random_connected_graph, random_filtration, random_graph, random_sheaf,
};
use mai_core::graph::{grid_graph, Graph, GraphSpec};
use mai_core::homology::{betti_numbers, homology_basis, persistence_barcode};
use mai_core::memory::{consolidate, decompose_trace, extract_backbone, joint_uncertainty, semanticize};
use mai_core::parity::{euler_characteristic, parity_profile, EulerMethod};
use mai_core::search::{depth_bound, dp_lookup, savitch_reach};
use mai_core::sheaf::{sheaf_cohomology, CellularSheaf};
use mai_core::verify_d2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Rank over GF(2) of a dense 0/1 matrix by plain row reduction.
fn dense_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] {
                let pivot = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers from cell lists alone: `b_k = n_k - rank d_k - rank d_{k+1}`.
fn oracle_betti(cells: &[&Cell]) -> Vec<usize> {
    let top = match cells.iter().map(|c| c.dim).max() {
        Some(d) => d,
        None => return Vec::new(),
    };
    let by_dim: Vec<Vec<&Cell>> = (0..=top).map(|d| cells.iter().copied().filter(|c| c.dim == d).collect()).collect();
    let rank_d = |k: usize| -> usize {
        if k == 0 || k > top {
            return 0;
        }
        let faces: BTreeMap<CellId, usize> = by_dim[k - 1].iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        let rows = by_dim[k]
            .iter()
            .map(|c| {
                let mut row = vec![false; faces.len()];
                for f in &c.boundary {
                    row[faces[f]] ^= true;
                }
                row
            })
            .collect();
        dense_rank(rows)
    };
    (0..=top).map(|k| by_dim[k].len() - rank_d(k) - rank_d(k + 1)).collect()
}

fn bfs_distance(g: &ChainComplex, s: CellId, t: CellId) -> Option<usize> {
    let mut adj: BTreeMap<CellId, Vec<CellId>> = BTreeMap::new();
    for &e in g.cells_of_dim(1) {
        let b = &g.cell(e).unwrap().boundary;
        adj.entry(b[0]).or_default().push(b[1]);
        adj.entry(b[1]).or_default().push(b[0]);
    }
    let mut dist = BTreeMap::from([(s, 0)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &w in adj.get(&u).map(|v| v.as_slice()).unwrap_or(&[]) {
            if !dist.contains_key(&w) {
                dist.insert(w, dist[&u] + 1);
                queue.push_back(w);
            }
        }
    }
    dist.get(&t).copied()
}

fn named_fixtures() -> Vec<(&'static str, ChainComplex)> {
    vec![
        ("hollow triangle", fixtures::hollow_triangle()),
        ("filled triangle", fixtures::filled_triangle()),
        ("theta", fixtures::theta()),
        ("theta with face", fixtures::theta_with_face()),
        ("sphere", fixtures::sphere()),
        ("torus", fixtures::torus(2)),
        ("torus 3x3", fixtures::torus(3)),
        ("klein bottle", fixtures::klein_bottle(3)),
        ("square with pendant", fixtures::square_with_pendant()),
    ]
}

fn boundary_law() -> Outcome {
    let start = Instant::now();
    for seed in 0..1000 {
        let k = random_complex(&mut rng(seed), 50, 3);
        ensure(k.len() <= 50 && k.max_dim() <= Some(3), || format!("seed {seed}: generator out of range"))?;
        ensure(verify_d2(&k), || format!("seed {seed}: d^2 != 0 on a valid complex"))?;
        let bad = mutate(&k).ok_or(format!("seed {seed}: nothing to mutate"))?;
        ensure(!verify_d2(&bad), || format!("seed {seed}: mutation not detected"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("1000 complexes valid, 1000 mutants rejected in {:.2}s", took.as_secs_f64()))
}

fn euler_poincare() -> Outcome {
    let expected: BTreeMap<&str, Vec<usize>> = [
        ("hollow triangle", vec![1, 1]),
        ("filled triangle", vec![1, 0, 0]),
        ("theta", vec![1, 2]),
        ("theta with face", vec![1, 1, 0]),
        ("sphere", vec![1, 0, 1]),
        ("torus", vec![1, 2, 1]),
        ("torus 3x3", vec![1, 2, 1]),
        ("klein bottle", vec![1, 2, 1]),
        ("square with pendant", vec![1, 1]),
    ]
    .into();
    for (name, k) in named_fixtures() {
        let b = betti_numbers(&k);
        ensure(b == expected[name], || format!("{name}: betti {b:?}"))?;
        let cells: Vec<&Cell> = k.cells().iter().collect();
        ensure(oracle_betti(&cells) == b, || format!("{name}: oracle disagrees"))?;
        let (c, h) = (euler_characteristic(&k, EulerMethod::Cells), euler_characteristic(&k, EulerMethod::Betti));
        ensure(c == h, || format!("{name}: cells {c} vs betti {h}"))?;
    }
    for seed in 0..500 {
        let k = random_complex(&mut rng(10_000 + seed), 50, 3);
        let (c, h) = (euler_characteristic(&k, EulerMethod::Cells), euler_characteristic(&k, EulerMethod::Betti));
        ensure(c == h, || format!("seed {seed}: cells {c} vs betti {h}"))?;
    }
    Ok("9 fixtures and 500 random complexes agree".into())
}

fn parity_identity() -> Outcome {
    let mut checked = 0;
    let randoms = (0..500).map(|s| ("random", random_complex(&mut rng(10_000 + s), 50, 3)));
    for (name, k) in named_fixtures().into_iter().chain(randoms) {
        let p = parity_profile(&k);
        let two_min = 2 * p.dim_phi.min(p.dim_psi);
        let via_chi = p.capacity as i64 - p.chi.abs();
        ensure(p.phi_topo == two_min && p.phi_topo as i64 == via_chi, || format!("{name}: {p:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} complexes"))
}

fn random_cycle(rng: &mut ChaCha8Rng, k: &ChainComplex, generators: &[Chain]) -> Chain {
    let mut c = Chain::zero(1);
    for g in generators {
        if rng.gen_bool(0.5) {
            c = c.add(g);
        }
    }
    // add a random boundary
    for &f in k.cells_of_dim(2) {
        if rng.gen_bool(0.3) {
            c = c.add(&Chain::from_cells(1, k.cell(f).unwrap().boundary.iter().copied()));
        }
    }
    c
}

fn trace_roundtrip() -> Outcome {
    let complexes = [
        fixtures::theta_with_face(),
        fixtures::torus(2),
        fixtures::torus(3),
        fixtures::klein_bottle(3),
        fixtures::sphere(),
        fixtures::square_with_pendant(),
    ];
    let mut r = rng(4);
    let mut total = 0;
    for k in &complexes {
        let basis = homology_basis(k, 1).map_err(|e| e.to_string())?;
        let generators: Vec<Chain> = k.cells_of_dim(1).iter().filter_map(|&e| fundamental_cycle(k, e)).collect();
        let per = 1000 / complexes.len() + 1;
        let bundle_traces: Vec<Chain> = (0..3).map(|_| random_cycle(&mut r, k, &generators)).collect();
        let bundle = extract_backbone(bundle_traces, &basis).map_err(|e| e.to_string())?;
        for _ in 0..per {
            let c = random_cycle(&mut r, k, &generators);
            let t = decompose_trace(&c, &bundle).map_err(|e| e.to_string())?;
            ensure(t.reconstruct(&basis) == c, || format!("reconstruction failed for {c:?}"))?;
            let ltm = consolidate(&t, &basis);
            let again = consolidate(&decompose_trace(&ltm.ltm, &bundle).map_err(|e| e.to_string())?, &basis);
            ensure(again == ltm, || "consolidate not idempotent".into())?;
            let a_raw = basis.coordinates(&c).unwrap().a;
            let a_ltm = basis.coordinates(&ltm.ltm).unwrap().a;
            ensure(a_raw == a_ltm, || "class changed by consolidation".into())?;
            total += 1;
        }
    }
    ensure(total >= 1000, || format!("only {total} cycles"))?;
    Ok(format!("{total} random cycles on {} fixtures", complexes.len()))
}

fn persistence_oracle() -> Outcome {
    let mut filtrations = vec![fixtures::triangle_filtration()];
    for seed in 0..300 {
        let mut r = rng(20_000 + seed);
        let k = random_complex(&mut r, 12, 3);
        filtrations.push(random_filtration(&mut r, &k, 4));
    }
    let mut values_checked = 0;
    for (i, k) in filtrations.into_iter().enumerate() {
        ensure(k.len() <= 12, || format!("filtration {i} too large"))?;
        let top = k.max_dim().unwrap_or(0);
        let f = Filtration::new(k.clone());
        let bars: Vec<_> = (0..=top).map(|d| persistence_barcode(&f, d)).collect();
        let values: BTreeSet<u64> = k.cells().iter().map(|c| c.birth.to_bits()).collect();
        for bits in values {
            let t = f64::from_bits(bits);
            let prefix: Vec<&Cell> = k.cells().iter().filter(|c| c.birth <= t).collect();
            let mut expect = oracle_betti(&prefix);
            expect.resize(top + 1, 0);
            for d in 0..=top {
                let alive = bars[d].intervals.iter().filter(|iv| iv.contains(t)).count();
                ensure(alive == expect[d], || format!("filtration {i}, t={t}, dim {d}: {alive} vs {}", expect[d]))?;
            }
            values_checked += 1;
        }
    }
    Ok(format!("301 filtrations, {values_checked} filtration values"))
}

fn sheaf_oracle() -> Outcome {
    for seed in 0..200 {
        let s = random_sheaf(&mut rng(30_000 + seed), 10);
        let base = s.base();
        let vertices = base.cells_of_dim(0).to_vec();
        let edges = base.cells_of_dim(1).to_vec();
        let (c0, c1) = s.cochain_dims();
        ensure(c0 + c1 <= 10, || format!("seed {seed}: cochain dimension {}", c0 + c1))?;
        // enumerate every 0-cochain and apply the restrictions directly
        let mut kernel = 0usize;
        let mut image = HashSet::new();
        for x in 0u32..(1 << c0) {
            let mut offset = 0;
            let mut value: BTreeMap<CellId, Vec<bool>> = BTreeMap::new();
            for &v in &vertices {
                let d = s.stalk_dim(v);
                value.insert(v, (0..d).map(|i| x >> (offset + i) & 1 == 1).collect());
                offset += d;
            }
            let mut out = Vec::with_capacity(c1);
            for &e in &edges {
                let mut y = vec![false; s.stalk_dim(e)];
                for &v in &base.cell(e).unwrap().boundary {
                    let m = s.restriction(v, e).unwrap();
                    for (r, yr) in y.iter_mut().enumerate() {
                        for (c, &xc) in value[&v].iter().enumerate() {
                            *yr ^= m.get(r, c) && xc;
                        }
                    }
                }
                out.extend(y);
            }
            if out.iter().all(|b| !b) {
                kernel += 1;
            }
            image.insert(out);
        }
        let h0 = kernel.trailing_zeros() as usize;
        let rank = image.len().trailing_zeros() as usize;
        let expect = (h0, c1 - rank);
        let got = sheaf_cohomology(&s);
        ensure(got == expect, || format!("seed {seed}: {got:?} vs enumeration {expect:?}"))?;
    }
    for seed in 0..100 {
        let mut r = rng(31_000 + seed);
        let n = r.gen_range(2..=20);
        let extra = r.gen_range(0..=n);
        let g = random_connected_graph(&mut r, n, extra);
        let s = CellularSheaf::constant(g.clone(), 1).map_err(|e| e.to_string())?;
        let (v, e) = (g.count(0) as i64, g.count(1) as i64);
        let (_, h1) = sheaf_cohomology(&s);
        ensure(h1 as i64 == e - v + 1, || format!("seed {seed}: h1 {h1} vs E-V+1 {}", e - v + 1))?;
    }
    Ok("200 sheaves match enumeration, 100 constant sheaves satisfy h1 = E - V + 1".into())
}

/// Largest `k <= n` whose worst-case recursion `n^(ceil log2 k)` stays under
/// `cap`, so exhaustive failures remain affordable.
fn affordable_k(n: usize, cap: f64) -> usize {
    (1..=n.max(1)).filter(|&k| (n as f64).powi(depth_bound(k) as i32 - 1) <= cap).max().unwrap_or(1)
}

fn savitch_oracle() -> Outcome {
    let (mut found, mut missing) = (0, 0);
    for seed in 0..500 {
        let mut r = rng(40_000 + seed);
        let n = r.gen_range(2..=64);
        let g = if r.gen_bool(0.5) {
            let p = r.gen_range(0.02..0.3);
            random_graph(&mut r, n, p)
        } else {
            let extra = r.gen_range(0..n);
            random_connected_graph(&mut r, n, extra)
        };
        let (s, t) = (r.gen_range(0..n), r.gen_range(0..n));
        let k = r.gen_range(1..=affordable_k(n, 3e5));
        let view = Graph::from_complex(&g);
        let (traj, stats) = savitch_reach(&view, s, t, k).map_err(|e| e.to_string())?;
        let oracle = bfs_distance(&g, s, t).is_some_and(|d| d <= k);
        ensure(traj.is_some() == oracle, || format!("seed {seed}: n={n} ({s},{t}) k={k} disagrees with BFS"))?;
        ensure(stats.max_depth <= depth_bound(k), || format!("seed {seed}: depth {}", stats.max_depth))?;
        ensure(stats.max_live_midpoints <= stats.max_depth, || format!("seed {seed}: live midpoints"))?;
        if let Some(tr) = traj {
            tr.validate(&g).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(tr.source() == s && tr.target() == t && tr.len() <= k, || format!("seed {seed}: bad walk"))?;
            found += 1;
        } else {
            missing += 1;
        }
    }
    Ok(format!("500 instances ({found} reachable, {missing} not), depth bound held"))
}

struct GridRun {
    report: mai_core::experiment::ExperimentReport,
    config: ExperimentConfig,
    took: Duration,
}

fn grid_run() -> Result<GridRun, String> {
    let config =
        ExperimentConfig { seed: 8, queries: 50, epochs: 2, ..ExperimentConfig::new(GraphSpec::Grid { n: 8 }) };
    let start = Instant::now();
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    Ok(GridRun { report, config, took: start.elapsed() })
}

fn amortization(run: &GridRun) -> Outcome {
    let e = &run.report.epochs;
    ensure(e.len() == 2, || "expected two epochs".into())?;
    let (first, second) = (e[0].expansions, e[1].expansions);
    ensure(second * 10 <= first, || format!("epoch 2 used {second} of {first} expansions"))?;
    let schedule = run.config.schedule_for(&grid_graph(8)).map_err(|x| x.to_string())?;
    for &(s, t) in &schedule {
        let traj = dp_lookup(&run.report.engine.scaffold, s, t).ok_or(format!("({s},{t}) not memoized"))?;
        ensure(traj.expansions == traj.len() as u64, || format!("({s},{t}): {} expansions", traj.expansions))?;
    }
    ensure(run.took < Duration::from_secs(5), || format!("took {:?}", run.took))?;
    Ok(format!(
        "epoch 2 used {second} of {first} expansions ({:.3}%), {:.2}s",
        100.0 * second as f64 / first as f64,
        run.took.as_secs_f64()
    ))
}

fn half_step(run: &GridRun) -> Outcome {
    for m in &run.report.epochs {
        ensure(m.half_step_total > 0 && m.half_step_consistent == m.half_step_total, || {
            format!("epoch {}: {}/{}", m.epoch, m.half_step_consistent, m.half_step_total)
        })?;
    }
    let counts: Vec<String> = run.report.epochs.iter().map(|m| m.half_step_total.to_string()).collect();
    Ok(format!("all entries consistent after each sleep ({} entries)", counts.join(", ")))
}

fn uncertainty(run: &GridRun) -> Outcome {
    for m in &run.report.epochs {
        ensure(m.h_phi_psi_after <= m.h_phi_psi_before, || {
            format!("epoch {}: {} -> {}", m.epoch, m.h_phi_psi_before, m.h_phi_psi_after)
        })?;
    }
    let pairs = [("psi1", "phi1"), ("psi1", "phi1"), ("psi2", "phi2"), ("psi1", "phi2")];
    let u = joint_uncertainty(&pairs).map_err(|e| e.to_string())?;
    // H(Phi|Psi) = 3/4 * H(2/3, 1/3); H(Psi|Phi) = 1/2 * H(1/2, 1/2)
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let oracle = 0.75 * h(2.0 / 3.0) + 0.5 * h(0.5);
    ensure((u - oracle).abs() < 1e-9, || format!("U = {u}, oracle {oracle}"))?;
    Ok(format!("H(Phi|Psi) non-increasing in every epoch; U = {u:.10} bits"))
}

fn semanticization() -> Outcome {
    let k = fixtures::square_with_pendant();
    let square = Chain::from_cells(1, [5, 6, 7, 8]);
    let q = semanticize(&k, &square).map_err(|e| e.to_string())?;
    ensure(betti_numbers(&q) == vec![1, 0], || format!("pendant fixture gives {:?}", betti_numbers(&q)))?;
    for seed in 0..100 {
        let mut r = rng(50_000 + seed);
        let n = r.gen_range(3..=15);
        let extra = r.gen_range(1..=n);
        let g = random_connected_graph(&mut r, n, extra);
        let cycles: Vec<Chain> = g.cells_of_dim(1).iter().filter_map(|&e| fundamental_cycle(&g, e)).collect();
        let c = &cycles[r.gen_range(0..cycles.len())];
        let before = betti_numbers(&g);
        let after = betti_numbers(&semanticize(&g, c).map_err(|e| format!("seed {seed}: {e}"))?);
        let b1_after = after.get(1).copied().unwrap_or(0);
        ensure(b1_after < before[1] && after[0] == 1, || format!("seed {seed}: {before:?} -> {after:?}"))?;
    }
    Ok("pendant fixture gives [1, 0]; b1 dropped on 100 random inputs".into())
}

fn determinism(run: &GridRun) -> Outcome {
    let again = run_experiment(&run.config).map_err(|e| e.to_string())?;
    ensure(again.metrics_jsonl() == run.report.metrics_jsonl(), || "metrics stream differs".into())?;
    ensure(again.summary_csv() == run.report.summary_csv(), || "summary differs".into())?;
    let other = ExperimentConfig { graph: GraphSpec::Gnp { n: 30, p: 0.1 }, seed: 3, ..run.config.clone() };
    let (a, b) =
        (run_experiment(&other).map_err(|e| e.to_string())?, run_experiment(&other).map_err(|e| e.to_string())?);
    ensure(a.metrics_jsonl() == b.metrics_jsonl(), || "random graph run differs".into())?;
    Ok(format!("{} bytes of metrics identical across runs", run.report.metrics_jsonl().len()))
}

fn main() {
    let run = grid_run();
    let with_run = |f: fn(&GridRun) -> Outcome| -> Outcome { run.as_ref().map_err(|e| e.clone()).and_then(f) };
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "boundary law", boundary_law()),
        (2, "Euler-Poincare", euler_poincare()),
        (3, "parity identity", parity_identity()),
        (4, "trace round-trip", trace_roundtrip()),
        (5, "persistence oracle", persistence_oracle()),
        (6, "sheaf oracle", sheaf_oracle()),
        (7, "Savitch correctness and space bound", savitch_oracle()),
        (8, "amortization", with_run(amortization)),
        (9, "half-step consistency", with_run(half_step)),
        (10, "uncertainty monotonicity", with_run(uncertainty)),
        (11, "semanticization", semanticization()),
        (12, "determinism", with_run(determinism)),
    ];
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
