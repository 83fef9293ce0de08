//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion that fails only because the sample of successful pipeline runs
//! is too small is reported as FAIL but does not fail the process; any broken
//! exactness check does.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use petgraph::algo::is_isomorphic;
use petgraph::graph::UnGraph;

use irreg_core::error::Stage;
use irreg_core::generate::random_regular;
use irreg_core::kkp::pair_of;
use irreg_core::lab::{binomial_tail_estimates, chernoff_bounds};
use irreg_core::params::{degree_range, PipelineParams};
use irreg_core::partition::{Tag, CLASSES};
use irreg_core::pipeline::{run_pipeline, Outcome, PipelineRun};
use irreg_core::seed::splitmix64;
use irreg_core::verify::{exact_strength, is_irregular, regular_lower_bound, weighted_degrees, Strength};
use irreg_core::{Graph, Vertex};

const A1_CASES: usize = 200;
const A2_KMAX: u64 = 8;
const A2_CUBIC_COUNTS: [(usize, usize); 4] = [(4, 1), (6, 2), (8, 5), (10, 19)];
const A3_B: f64 = 0.2;
const A3_EPS: f64 = 0.05;
const A3_MIN_SUCCESSES: usize = 20;
/// `(n, d, seeds)`; both degrees lie inside the strict range for b=0.2, eps=0.05.
const A3_RUNS: [(usize, usize, u64); 2] = [(5000, 1240, 24), (20_000, 1000, 4)];
const A3_RETRIES: usize = 100;
const A4_BUDGET_SECS: f64 = 300.0;
const A5_M: std::ops::RangeInclusive<i64> = 1..=10;
const A5_VALUES: std::ops::RangeInclusive<i64> = -100..=100;
const A6_TRIALS: u64 = 100_000;
const A6_SIGMAS: f64 = 3.0;
const A6_SEED: u64 = 0xC0FFEE;

struct Verdict {
    id: &'static str,
    pass: bool,
    /// A failure here is a defect, not a shortfall.
    hard: bool,
    detail: String,
}

fn verdict(id: &'static str, pass: bool, hard: bool, detail: String) -> Verdict {
    Verdict { id, pass, hard, detail }
}

fn sub_graph(n: usize, seed: u64, density: u64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if splitmix64(seed ^ splitmix64((u * n + v) as u64)) % 100 < density {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn smallest_collision(sigma: &[i64]) -> Option<(Vertex, Vertex)> {
    for u in 0..sigma.len() {
        for v in u + 1..sigma.len() {
            if sigma[u] == sigma[v] {
                return Some((u as Vertex, v as Vertex));
            }
        }
    }
    None
}

fn a1() -> Verdict {
    let mut bad = Vec::new();
    for case in 0..A1_CASES as u64 {
        let n = 10 + (case % 31) as usize;
        let d = 2 + (case % 4) as usize;
        let d = if n * d % 2 == 1 { d + 1 } else { d };
        let g = random_regular(n, d, case).unwrap();
        let v = (splitmix64(case) % n as u64) as Vertex;
        let twin = n;
        let mut edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
        edges.extend(g.neighbors(v).iter().map(|&w| (w as usize, twin)));
        let h = Graph::from_edges(n + 1, edges).unwrap();
        let w_of = |a: Vertex, b: Vertex| 1 + (splitmix64(case ^ splitmix64(((a as u64) << 32) | b as u64)) % 5) as i64;
        let w: Vec<i64> = h
            .edges()
            .iter()
            .map(|&(a, b)| if b as usize == twin { w_of(a.min(v), a.max(v)) } else { w_of(a, b) })
            .collect();
        let sigma = weighted_degrees(&h, &w).unwrap();
        let r = is_irregular(&h, &w).unwrap();
        let ok = !r.irregular
            && sigma[v as usize] == sigma[twin]
            && r.witness == smallest_collision(&sigma)
            && r.witness.is_some_and(|(a, b)| sigma[a as usize] == sigma[b as usize]);
        if !ok {
            bad.push(format!("planted case {case}"));
        }
    }
    let mut witnesses = 0;
    let mut seed = 0u64;
    while witnesses < A1_CASES {
        seed += 1;
        let n = 3 + (seed % 6) as usize;
        let g = sub_graph(n, seed, 40 + seed % 50);
        if g.size() > 20 {
            continue;
        }
        let Ok(Strength::Exact { weights, .. }) = exact_strength(&g, A2_KMAX) else {
            continue;
        };
        if !is_irregular(&g, &weights).unwrap().irregular {
            bad.push(format!("oracle witness seed {seed}"));
        }
        witnesses += 1;
    }
    let pass = bad.is_empty();
    verdict(
        "A1",
        pass,
        true,
        format!("{A1_CASES} planted collisions, {witnesses} oracle witnesses, {} mismatches {:?}", bad.len(), &bad[..bad.len().min(3)]),
    )
}

fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

/// Connected cubic graphs on `n` vertices, one per isomorphism class.
fn cubic_graphs(n: usize) -> Vec<Graph> {
    fn rec(n: usize, adj: &mut Vec<Vec<bool>>, deg: &mut Vec<usize>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(v) = (0..n).find(|&v| deg[v] < 3) else {
            let mut edges = Vec::new();
            for u in 0..n {
                for w in u + 1..n {
                    if adj[u][w] {
                        edges.push((u, w));
                    }
                }
            }
            out.push(edges);
            return;
        };
        let lo = (v + 1..n).rev().find(|&w| adj[v][w]).unwrap_or(v);
        for w in lo + 1..n {
            if deg[w] < 3 && !adj[v][w] {
                adj[v][w] = true;
                adj[w][v] = true;
                deg[v] += 1;
                deg[w] += 1;
                rec(n, adj, deg, out);
                adj[v][w] = false;
                adj[w][v] = false;
                deg[v] -= 1;
                deg[w] -= 1;
            }
        }
    }
    let mut adj = vec![vec![false; n]; n];
    let mut deg = vec![0; n];
    for w in 1..=3 {
        adj[0][w] = true;
        adj[w][0] = true;
        deg[0] += 1;
        deg[w] += 1;
    }
    let mut labelled = Vec::new();
    rec(n, &mut adj, &mut deg, &mut labelled);

    let mut reps: HashMap<Vec<(usize, usize)>, Vec<(UnGraph<(), ()>, Graph)>> = HashMap::new();
    for edges in labelled {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        if g.components_with_order().len() != 1 {
            continue;
        }
        let mut key: Vec<(usize, usize)> = (0..n as Vertex)
            .map(|v| {
                let nb = g.neighbors(v);
                let tri = nb.iter().enumerate().map(|(i, &a)| nb[i + 1..].iter().filter(|&&b| g.has_edge(a, b)).count()).sum();
                let second: BTreeSet<Vertex> = nb.iter().flat_map(|&a| g.neighbors(a).iter().copied()).filter(|&b| b != v && !g.has_edge(v, b)).collect();
                (tri, second.len())
            })
            .collect();
        key.sort_unstable();
        let pg = UnGraph::<(), ()>::from_edges(edges.iter().map(|&(a, b)| (a as u32, b as u32)));
        let bucket = reps.entry(key).or_default();
        if !bucket.iter().any(|(h, _)| is_isomorphic(h, &pg)) {
            bucket.push((pg, g));
        }
    }
    let mut out: Vec<Graph> = reps.into_values().flatten().map(|(_, g)| g).collect();
    out.sort_by(|a, b| a.edges().cmp(b.edges()));
    out
}

fn a2() -> Verdict {
    let mut bad = Vec::new();
    // P3 is not regular; its bound is the trivial one
    let mut cases = vec![("P3".to_string(), Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap(), 2, Some(2))];
    for n in 3..=12 {
        let expect = matches!(n, 4 | 5).then_some(3);
        cases.push((format!("C{n}"), cycle(n), 2, expect));
    }
    let mut counts = Vec::new();
    for (n, want) in A2_CUBIC_COUNTS {
        let graphs = cubic_graphs(n);
        counts.push(format!("{n}:{}", graphs.len()));
        if graphs.len() != want {
            bad.push(format!("found {} connected cubic graphs on {n} vertices, expected {want}", graphs.len()));
        }
        for (i, g) in graphs.into_iter().enumerate() {
            cases.push((format!("cubic{n}#{i}"), g, 3, None));
        }
    }
    let mut strengths = Vec::new();
    for (name, g, d, expect) in &cases {
        let lb = regular_lower_bound(g.order() as u64, *d).unwrap();
        match exact_strength(g, A2_KMAX) {
            Ok(Strength::Exact { k, weights }) => {
                let valid = weights.iter().all(|&w| 1 <= w && w <= k as i64) && is_irregular(g, &weights).unwrap().irregular;
                if k < lb || !valid || expect.is_some_and(|e| e != k) {
                    bad.push(format!("{name}: s={k}, bound {lb}, witness valid {valid}"));
                }
                strengths.push(format!("{name}={k}"));
            }
            other => bad.push(format!("{name}: {other:?}")),
        }
    }
    let pass = bad.is_empty();
    verdict(
        "A2",
        pass,
        true,
        format!("{} graphs (cubic counts {}); {}; violations {:?}", cases.len(), counts.join(" "), strengths[..11.min(strengths.len())].join(" "), bad),
    )
}

fn names_condition(run: &PipelineRun) -> bool {
    match &run.outcome {
        Outcome::Irregular => true,
        Outcome::NotIrregular => run.verification.as_ref().is_some_and(|v| v.witness.is_some()),
        Outcome::Failed(f) => {
            let w = &f.witness;
            match f.stage {
                Stage::Partition | Stage::Labels => w.contains('°'),
                Stage::ResidualWeights => w.contains("Δ_j") || w.contains("V0 below U"),
                Stage::UnionPass => {
                    w.contains("achievable") || w.contains("last two vertices") || w.contains("isolated vertex") || w.contains("share weighted degree")
                }
                Stage::Separation => w.contains('('),
                Stage::InitialWeights | Stage::Finalize => false,
            }
        }
    }
}

/// Exactness checks on every stage a run completed.
fn stage_violations(g: &Graph, run: &PipelineRun) -> Vec<String> {
    let mut out = Vec::new();
    let (Some(part), Some(b)) = (&run.partition, Some(&run.budgets)) else {
        return out;
    };
    if let Some(w1) = &run.omega1 {
        let mut got: Vec<i64> = part.v0().iter().map(|&v| w1.sigma(v)).collect();
        got.sort_unstable();
        let want: Vec<i64> = (1..=part.n0() as i64).map(|j| b.b0 + j).collect();
        if got != want {
            out.push("σ on V0 is not {B0+1..B0+n0}".into());
        }
        if let Some(w2) = &run.omega2 {
            let m = b.kkp_step;
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                let e = e as u32;
                let inc = w2.weight(e) - w1.weight(e);
                let inside = part.in_u(u) && part.in_u(v);
                if (inside && !(0..=3 * m).contains(&inc)) || (!inside && inc != 0) || w2.modifications(e) > 2 {
                    out.push(format!("edge ({u},{v}): increment {inc}, {} modifications", w2.modifications(e)));
                    break;
                }
            }
            for c in 1..=CLASSES as Tag {
                let members = part.members(c);
                let distinct: BTreeSet<i64> = members.iter().map(|&v| w2.sigma(v)).collect();
                if distinct.len() != members.len() {
                    out.push(format!("σ not injective on U_{c}"));
                }
            }
        }
    }
    if run.succeeded() {
        let v = run.verification.as_ref().unwrap();
        let w3 = run.omega3.as_ref().unwrap();
        if !is_irregular(g, w3.weights()).unwrap().irregular || v.min_label.unwrap_or(1) < 1 || v.bound_ok != Some(true) {
            out.push("successful run fails the end-to-end contract".into());
        }
    }
    out
}

struct PipelineSample {
    runs: usize,
    residual_ok: usize,
    kkp_ok: usize,
    kkp_ok_sep_fail: usize,
    successes: usize,
    by_stage: HashMap<String, usize>,
    unnamed: usize,
    violations: Vec<String>,
    out_of_range: Vec<(usize, usize)>,
    slowest_20000: f64,
}

fn pipeline_sample() -> PipelineSample {
    let mut s = PipelineSample {
        runs: 0,
        residual_ok: 0,
        kkp_ok: 0,
        kkp_ok_sep_fail: 0,
        successes: 0,
        by_stage: HashMap::new(),
        unnamed: 0,
        violations: Vec::new(),
        out_of_range: Vec::new(),
        slowest_20000: 0.0,
    };
    let p = PipelineParams::empirical(A3_B, A3_EPS, 1.0).with_retries(A3_RETRIES);
    for (n, d, seeds) in A3_RUNS {
        if !degree_range(n, d, A3_B, A3_EPS).unwrap().contains {
            s.out_of_range.push((n, d));
        }
        for seed in 0..seeds {
            let t = Instant::now();
            let g = random_regular(n, d, seed).unwrap();
            let run = run_pipeline(&g, &p, seed).unwrap();
            if n == 20_000 {
                s.slowest_20000 = s.slowest_20000.max(t.elapsed().as_secs_f64());
            }
            s.runs += 1;
            s.residual_ok += run.omega1.is_some() as usize;
            s.kkp_ok += run.kkp.is_some() as usize;
            s.kkp_ok_sep_fail += run.separation.as_ref().is_some_and(|r| !r.passed()) as usize;
            s.successes += run.succeeded() as usize;
            let key = match &run.outcome {
                Outcome::Failed(f) => f.stage.name().to_string(),
                o => o.name().to_string(),
            };
            *s.by_stage.entry(key).or_default() += 1;
            s.unnamed += !names_condition(&run) as usize;
            for v in stage_violations(&g, &run) {
                s.violations.push(format!("n={n} d={d} seed={seed}: {v}"));
            }
        }
    }
    s
}

fn a3(s: &PipelineSample) -> Verdict {
    let exact = s.violations.is_empty() && s.out_of_range.is_empty();
    let enough = s.kkp_ok - s.kkp_ok_sep_fail >= A3_MIN_SUCCESSES && s.residual_ok >= A3_MIN_SUCCESSES;
    let mut stages: Vec<_> = s.by_stage.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    stages.sort();
    verdict(
        "A3",
        exact && enough,
        !exact,
        format!(
            "{} runs; residual step succeeded {}, union pass {} (separation failed in {}); need {A3_MIN_SUCCESSES}; outcomes {}; exactness violations {:?}",
            s.runs,
            s.residual_ok,
            s.kkp_ok,
            s.kkp_ok_sep_fail,
            stages.join(" "),
            &s.violations[..s.violations.len().min(3)]
        ),
    )
}

fn a4(s: &PipelineSample) -> Verdict {
    let exact = s.violations.is_empty() && s.unnamed == 0 && s.slowest_20000 <= A4_BUDGET_SECS;
    verdict(
        "A4",
        exact && s.successes >= A3_MIN_SUCCESSES,
        !exact,
        format!(
            "{} successful end-to-end runs of {} (need {A3_MIN_SUCCESSES}); failures without a named condition: {}; slowest n=20000 run {:.1}s",
            s.successes, s.runs, s.unnamed, s.slowest_20000
        ),
    )
}

fn a5() -> Verdict {
    let mut bad = Vec::new();
    for m in A5_M {
        let mut owner: HashMap<i64, i64> = HashMap::new();
        for v in A5_VALUES {
            let s = pair_of(v, m).unwrap();
            if !s.contains(v) {
                bad.push(format!("m={m}: {v} not in its own pair"));
            }
            let other = if s.low == v { s.high() } else { s.low };
            if pair_of(other, m).unwrap() != s {
                bad.push(format!("m={m}: pair of {v} not idempotent"));
            }
            for x in [s.low, s.high()] {
                if let Some(&low) = owner.get(&x) {
                    if low != s.low {
                        bad.push(format!("m={m}: {x} in two pairs"));
                    }
                }
                owner.insert(x, s.low);
            }
        }
    }
    verdict("A5", bad.is_empty(), true, format!("m in 1..=10, values in -100..=100; violations {:?}", &bad[..bad.len().min(3)]))
}

fn a6() -> Verdict {
    let mut bad = Vec::new();
    let mut points = 0;
    for (i, n) in [100u64, 1000, 10_000].into_iter().enumerate() {
        for (j, p) in [0.1, 0.5].into_iter().enumerate() {
            let np = n as f64 * p;
            let ts = [0.2 * np, 0.5 * np, np];
            let seed = splitmix64(A6_SEED ^ (i * 2 + j) as u64);
            for e in binomial_tail_estimates(n, p, &ts, A6_TRIALS, seed).unwrap() {
                let c = chernoff_bounds(n, p, e.t).unwrap();
                points += 1;
                if e.above > c.upper + A6_SIGMAS * e.se_above || e.below > c.lower + A6_SIGMAS * e.se_below {
                    bad.push(format!("n={n} p={p} t={}: above {} vs {}, below {} vs {}", e.t, e.above, c.upper, e.below, c.lower));
                }
            }
        }
    }
    verdict("A6", bad.is_empty(), true, format!("{points} grid points x {A6_TRIALS} trials; violations {bad:?}"))
}

fn irreg(dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_irreg"))
        .current_dir(dir)
        .env_remove("IRREG_SEED")
        .args(args)
        .output()
        .expect("run irreg");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn a7() -> Verdict {
    let runs: &[&[&str]] = &[
        &["gen", "--n", "300", "--d", "8", "--seed", "5", "--out", "g.txt"],
        &["gen", "--n", "300", "--d", "8", "--seed", "5", "--out", "g.g6"],
        &["gen", "--n", "10", "--d", "3", "--seed", "1"],
        &["weight", "--graph", "g.txt", "--mode", "empirical", "--slack", "3", "--seed", "2", "--retries", "5", "--out-weights", "w.csv", "--out-report", "r.txt"],
        &["gen", "--n", "5000", "--d", "1240", "--seed", "1", "--out", "big.txt"],
        &["weight", "--graph", "big.txt", "--b", "0.2", "--eps", "0.05", "--mode", "empirical", "--seed", "1", "--out-weights", "w2.csv"],
        &["verify", "--graph", "big.txt", "--weights", "w2.csv"],
        &["weight", "--n", "400", "--d", "20", "--preset", "corollary1"],
        &["exact", "--graph", "c5.txt", "--out-weights", "x.csv"],
        &["verify", "--graph", "c5.txt", "--weights", "x.csv"],
        &["bounds", "--n", "20000", "--d", "1000", "--b", "0.2", "--eps", "0.05"],
        &["lab", "chernoff", "--n", "100,1000", "--trials", "2000", "--seed", "3"],
        &["lab", "conditions", "--n", "600", "--d", "30", "--trials", "6", "--seed", "3"],
    ];
    let files = ["g.txt", "g.g6", "w.csv", "w2.csv", "r.txt", "x.csv"];
    let mut transcripts = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c5.txt"), "0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
        let mut t = Vec::new();
        for args in runs {
            let (code, stdout) = irreg(dir.path(), args);
            t.push((format!("{} -> exit {code}", args.join(" ")), code, stdout));
        }
        for f in files {
            t.push((f.to_string(), 0, std::fs::read(dir.path().join(f)).unwrap_or_default()));
        }
        transcripts.push(t);
    }
    let diffs: Vec<&String> = transcripts[0]
        .iter()
        .zip(&transcripts[1])
        .filter(|(a, b)| a != b)
        .map(|(a, _)| &a.0)
        .collect();
    let codes: Vec<i32> = transcripts[0].iter().take(runs.len()).map(|(_, c, _)| *c).collect();
    verdict(
        "A7",
        diffs.is_empty(),
        true,
        format!("{} invocations and {} files compared twice; differing {diffs:?}; exit codes {codes:?}", runs.len(), files.len()),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let t = Instant::now();
    let mut verdicts = vec![a1(), a2()];
    let sample = pipeline_sample();
    verdicts.push(a3(&sample));
    verdicts.push(a4(&sample));
    verdicts.extend([a5(), a6(), a7()]);
    let mut defect = false;
    for v in &verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.detail);
        defect |= !v.pass && v.hard;
    }
    println!("acceptance finished in {:.1}s", t.elapsed().as_secs_f64());
    if defect {
        std::process::exit(1);
    }
}
