//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use edgecolor_core::exchange::audit;
use edgecolor_core::forest::check::Snapshot;
use edgecolor_core::forest::{closure_with_order, OrderedTree};
use edgecolor_core::format::{parse_coloring, parse_witnesses, write_graph};
use edgecolor_core::oracle::{self, corpus, fixtures, pendant_core, tight};
use edgecolor_core::{
    color_multigraph, greedy_partial_color, Bundle, ColoringRun, DriverConfig, EdgeId, Multigraph,
    PartialColoring,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_EDGE_CAP: usize = 30;
const CORPUS_MIN_INSTANCES: usize = 200;
const CORPUS_TIME_LIMIT: Duration = Duration::from_secs(60);
const SMALL_TIME_LIMIT: Duration = Duration::from_secs(1);
const FUZZ_EXCHANGES: usize = 10_000;
const CLOSURE_INSTANCES: usize = 20;
const CLOSURE_ORDERS: usize = 100;
const TIGHT_SEEDS: u64 = 60;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("[{}] {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

struct Instance {
    label: String,
    graph: Multigraph,
    run: ColoringRun,
}

fn audited() -> DriverConfig {
    DriverConfig {
        keep_certificates: true,
        ..Default::default()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edgecolor"))
}

fn with_gap(graph: &Multigraph) -> (PartialColoring, EdgeId) {
    let k = graph.max_degree() + 1;
    let (phi, queue) = greedy_partial_color(graph, k);
    match queue.front() {
        Some(&e) => (phi, e),
        None => {
            let e = graph.edge_count() - 1;
            let mut colors = phi.assignment().to_vec();
            colors[e] = 0;
            (PartialColoring::from_assignment(graph, k, &colors).unwrap(), e)
        }
    }
}

fn bound_reproduction(r: &mut Report, runs: &mut Vec<Instance>) {
    let start = Instant::now();
    let mut count = 0;
    let mut bad = Vec::new();
    for (n, seed, g) in corpus(CORPUS_EDGE_CAP) {
        count += 1;
        let rep = oracle::report(&g).expect("corpus instances are small");
        match color_multigraph(&g, &audited()) {
            Ok(run) => {
                if run.colors_used < rep.chromatic_index || run.colors_used > rep.bound {
                    bad.push(format!("gen({n},{seed}) used {} not in [{}, {}]", run.colors_used, rep.chromatic_index, rep.bound));
                }
                runs.push(Instance {
                    label: format!("gen({n},{seed})"),
                    graph: g,
                    run,
                });
            }
            Err(e) => bad.push(format!("gen({n},{seed}): {e}")),
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && count >= CORPUS_MIN_INSTANCES && elapsed < CORPUS_TIME_LIMIT;
    let mut detail = format!(
        "{count} instances (need >= {CORPUS_MIN_INSTANCES}), {} outside [chi', max(D+1, Gamma)], {:.2?} (limit {:?})",
        bad.len(),
        elapsed,
        CORPUS_TIME_LIMIT
    );
    if let Some(first) = bad.first() {
        detail += &format!("; first: {first}");
    }
    r.line(1, "bound reproduction", ok, detail);
}

fn shannon_family(r: &mut Report, dir: &Path) {
    let mut notes = Vec::new();
    let mut ok = true;
    for mu in 1..=4 {
        let g = fixtures::shannon(mu);
        let target = 3 * mu;
        let (gamma, _) = oracle::gamma_exact(&g).unwrap();
        let chi = oracle::chromatic_index_exact(&g).unwrap();
        let path = dir.join(format!("sh{mu}.mg"));
        std::fs::write(&path, write_graph(&g)).unwrap();

        let t = Instant::now();
        let out = bin().arg("color").arg(&path).output().unwrap();
        let colored_in = t.elapsed();
        let colors = parse_coloring(&String::from_utf8_lossy(&out.stdout), &g).unwrap_or_default();
        let used: BTreeSet<_> = colors.iter().copied().filter(|&c| c > 0).collect();
        let proper = oracle::is_proper(&g, &colors, used.len().max(1));
        let colored_ok = out.status.code() == Some(0)
            && proper
            && used.len() == target
            && gamma == target
            && chi == target
            && colored_in < SMALL_TIME_LIMIT;

        let witness_base = dir.join(format!("sh{mu}.strict"));
        let t = Instant::now();
        let strict = bin()
            .arg("color")
            .arg(&path)
            .args(["--colors", &(target - 1).to_string(), "--mode", "strict", "-o"])
            .arg(&witness_base)
            .output()
            .unwrap();
        let strict_in = t.elapsed();
        let mut sidecar = witness_base.into_os_string();
        sidecar.push(".witness");
        let witnesses = std::fs::read_to_string(&sidecar)
            .ok()
            .and_then(|text| parse_witnesses(&text, &g).ok())
            .unwrap_or_default();
        let strict_ok = strict.status.code() == Some(2)
            && witnesses.len() == 1
            && witnesses[0].refuted == target - 1
            && strict_in < SMALL_TIME_LIMIT;

        ok &= colored_ok && strict_ok;
        notes.push(format!(
            "SH({mu}) {}/{target} colors {:.0?}, strict {} exit {} {:.0?}",
            used.len(),
            colored_in,
            target - 1,
            strict.status.code().unwrap_or(-1),
            strict_in
        ));
    }
    r.line(2, "Shannon family", ok, notes.join("; "));
}

fn petersen(r: &mut Report, dir: &Path) {
    let g = fixtures::petersen();
    let chi = oracle::chromatic_index_exact(&g).unwrap();
    let path = dir.join("petersen.mg");
    std::fs::write(&path, write_graph(&g)).unwrap();
    let t = Instant::now();
    let out = bin().arg("color").arg(&path).output().unwrap();
    let elapsed = t.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let colors = parse_coloring(&text, &g).unwrap_or_default();
    let used: BTreeSet<_> = colors.iter().copied().filter(|&c| c > 0).collect();
    let ok = out.status.code() == Some(0)
        && used.len() == 4
        && chi == 4
        && oracle::is_proper(&g, &colors, 4)
        && text.contains("k_used=4")
        && elapsed < SMALL_TIME_LIMIT;
    r.line(3, "Petersen", ok, format!("{} colors (chi' oracle {chi}), {:.0?} (limit {:?})", used.len(), elapsed, SMALL_TIME_LIMIT));
}

fn kempe_fuzz(r: &mut Report) {
    let graphs = corpus(CORPUS_EDGE_CAP);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    let mut violations = 0;
    while done < FUZZ_EXCHANGES {
        let g = &graphs[rng.gen_range(0..graphs.len())].2;
        let (mut phi, _) = greedy_partial_color(g, g.max_degree() + 1);
        let k = phi.k();
        for _ in 0..50 {
            let v = rng.gen_range(0..g.vertex_count());
            let a = rng.gen_range(1..=k);
            let b = rng.gen_range(1..=k);
            if a == b {
                continue;
            }
            phi.swap_at(g, v, a, b).unwrap();
            done += 1;
            if phi.validate(g).is_err() || !oracle::is_proper(g, phi.assignment(), k) {
                violations += 1;
            }
        }
    }
    r.line(4, "properness fuzz", violations == 0, format!("{done} exchanges, {violations} violations"));
}

fn closure_uniqueness(r: &mut Report) {
    let mut graphs: Vec<Multigraph> = corpus(CORPUS_EDGE_CAP).into_iter().step_by(41).map(|(_, _, g)| g).collect();
    graphs.extend((0..8).map(tight));
    graphs.truncate(CLOSURE_INSTANCES);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut mismatches = 0;
    for g in &graphs {
        let (phi, e) = with_gap(g);
        let (u, v) = g.ends(e);
        let expected = Snapshot::new(g, phi.assignment(), phi.k()).closure(&BTreeSet::from([u, v]));
        for _ in 0..CLOSURE_ORDERS {
            let t = closure_with_order(g, &phi, OrderedTree::rooted(g, e), |c| rng.gen_range(0..c.len()));
            let got: BTreeSet<_> = t.vertices().iter().copied().collect();
            if got != expected {
                mismatches += 1;
            }
        }
    }
    let ok = mismatches == 0 && graphs.len() == CLOSURE_INSTANCES;
    r.line(5, "closure uniqueness", ok, format!("{} instances x {CLOSURE_ORDERS} orders, {mismatches} mismatches", graphs.len()));
}

fn tight_runs(runs: &mut Vec<Instance>) -> Vec<String> {
    let mut failures = Vec::new();
    let mut graphs: Vec<(String, Multigraph)> = (0..TIGHT_SEEDS).map(|s| (format!("tight({s})"), tight(s))).collect();
    for (c, mu) in [(5, 2), (7, 2), (9, 2), (7, 3), (9, 3)] {
        graphs.push((format!("pendant_core({c},{mu})"), pendant_core(c, mu)));
    }
    for (label, graph) in graphs {
        match color_multigraph(&graph, &audited()) {
            Ok(run) => runs.push(Instance { label, graph, run }),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    failures
}

fn monotonicity(r: &mut Report, runs: &[Instance]) {
    let calls: usize = runs.iter().map(|i| i.run.stats.reduce_calls).sum();
    let steps: usize = runs.iter().map(|i| i.run.reductions.len()).sum();
    let bad: Vec<String> = runs
        .iter()
        .flat_map(|i| {
            i.run
                .reductions
                .iter()
                .filter(|s| s.to >= s.from)
                .map(move |s| format!("{} {} -> {}", i.label, s.from, s.to))
        })
        .collect();
    let ok = bad.is_empty() && steps == calls;
    r.line(
        6,
        "potential monotonicity",
        ok,
        format!("{} runs, {calls} reduce calls, {steps} strict decreases, {} violations", runs.len(), bad.len()),
    );
}

fn pass_bound(r: &mut Report, runs: &[Instance]) {
    let over: Vec<&str> = runs
        .iter()
        .filter(|i| i.run.stats.passes > i.graph.edge_count())
        .map(|i| i.label.as_str())
        .collect();
    let max_ratio = runs
        .iter()
        .filter(|i| i.graph.edge_count() > 0)
        .map(|i| i.run.stats.passes as f64 / i.graph.edge_count() as f64)
        .fold(0.0, f64::max);
    r.line(7, "outer-loop bound", over.is_empty(), format!("{} runs, max passes/|E| = {max_ratio:.3}, {} over", runs.len(), over.len()));
}

fn certificate_audit(r: &mut Report, runs: &[Instance]) {
    let issued: usize = runs.iter().map(|i| i.run.stats.certificates).sum();
    let kept: usize = runs.iter().map(|i| i.run.certificates.len()).sum();
    let mut failed = Vec::new();
    for i in runs {
        for cert in &i.run.certificates {
            if let Err(e) = audit(&i.graph, cert) {
                failed.push(format!("{}: {e}", i.label));
            }
        }
    }
    let ok = failed.is_empty() && issued == kept;
    let mut detail = format!("{kept}/{issued} certificates audited, {} failed", failed.len());
    if let Some(f) = failed.first() {
        detail += &format!("; first: {f}");
    }
    r.line(8, "postcondition audit", ok, detail);
}

fn determinism(r: &mut Report, runs: &[Instance]) {
    let mut differ = 0;
    let mut bundles = 0;
    let mut replay_fail = 0;
    for i in runs.iter().step_by(5) {
        let cfg = audited();
        let again = color_multigraph(&i.graph, &cfg).unwrap();
        if again.to_json() != i.run.to_json() {
            differ += 1;
        }
        let bundle = Bundle::new(&i.graph, &cfg, &Ok(again));
        bundles += 1;
        match Bundle::parse(&bundle.to_json()).and_then(|b| b.replay()) {
            Ok(rep) if rep.matches => {}
            _ => replay_fail += 1,
        }
    }
    r.line(
        9,
        "determinism",
        differ == 0 && replay_fail == 0,
        format!("{bundles} reruns byte-compared, {differ} differ; {bundles} bundles replayed, {replay_fail} diverged"),
    );
}

fn escalations(r: &mut Report, runs: &[Instance]) {
    let mut total = 0;
    let mut unbacked = 0;
    for i in runs.iter().filter(|i| !i.run.escalations.is_empty()) {
        total += i.run.escalations.len();
        let cfg = audited();
        let result = Ok(i.run.clone());
        let backed = Bundle::parse(&Bundle::new(&i.graph, &cfg, &result).to_json())
            .and_then(|b| b.replay())
            .is_ok_and(|rep| rep.matches)
            && oracle::is_proper(&i.graph, &i.run.colors, i.run.k_final);
        if !backed {
            unbacked += 1;
        }
    }
    // Force the diagnostic path so that it is exercised even at zero.
    let g = fixtures::shannon(3);
    let cfg = DriverConfig {
        edge_budget: Some(0),
        ..Default::default()
    };
    let forced = color_multigraph(&g, &cfg);
    let forced_ok = match &forced {
        Ok(run) => {
            !run.escalations.is_empty()
                && oracle::is_proper(&g, &run.colors, run.k_final)
                && Bundle::parse(&Bundle::new(&g, &cfg, &forced).to_json())
                    .and_then(|b| b.replay())
                    .is_ok_and(|rep| rep.matches)
        }
        Err(_) => false,
    };
    r.line(
        10,
        "escalation rate",
        unbacked == 0 && forced_ok,
        format!(
            "{total} escalations over {} runs (target 0), {unbacked} without a replayable bundle; forced budget run bundled and replayed: {forced_ok}",
            runs.len()
        ),
    );
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = Report { failed: 0 };
    let mut runs = Vec::new();
    bound_reproduction(&mut r, &mut runs);
    shannon_family(&mut r, dir.path());
    petersen(&mut r, dir.path());
    kempe_fuzz(&mut r);
    closure_uniqueness(&mut r);
    let tight_failures = tight_runs(&mut runs);
    for f in &tight_failures {
        println!("       tight family run failed: {f}");
    }
    monotonicity(&mut r, &runs);
    pass_bound(&mut r, &runs);
    certificate_audit(&mut r, &runs);
    determinism(&mut r, &runs);
    escalations(&mut r, &runs);
    if !tight_failures.is_empty() {
        r.failed += 1;
    }
    println!("acceptance: {} failed", r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
