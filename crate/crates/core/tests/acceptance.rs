//! Acceptance gate. Runs every criterion at its stated tolerance and time
//! limit, prints one PASS/FAIL line per criterion and exits non-zero if any
//! fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thc::hardness::{
    brute_force_3color, coloring_from_witness, monochromatic_edge, pad_coloring,
    reduce_from_graph, search_color_class_witness, verify_witness, witness_from_coloring, Graph,
};
use thc::labeling::{
    build_flow_instance, check_contiguity, min_feasible_flow, solve_labeled, LabeledSolution,
};
use thc::simgen::{run, SimConfig};
use thc::temporal::{evaluate_general, locality, solve_local};
use thc::ultrametric::{
    fkw_fit, fkw_nearest_ultrametric, instability_pair, subdominant_ultrametric, to_dendrogram,
    Node,
};
use thc::{linf_distance, perturb, Distances, FitScheme, PseudoUltrametric, TemporalSampling};

use common::*;

const GOLDEN: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn figure_four() -> Outcome {
    let eps = 0.1;
    let pair = instability_pair(11, eps).map_err(|e| e.to_string())?;
    let (u, v) = (pair.u.as_str(), pair.v.as_str());
    let m = fkw_nearest_ultrametric(&pair.original);
    let mp = fkw_nearest_ultrametric(&pair.perturbed);
    let muv = m.distance(u, v).unwrap();
    let mpuv = mp.distance(u, v).unwrap();
    ensure!(pair.original.diameter() == 9.0, "diam(M) = {}", pair.original.diameter());
    ensure!((muv - 2.0).abs() <= GOLDEN, "mu(u,v) on M = {muv}, want 2");
    ensure!((mpuv - 5.05).abs() <= GOLDEN, "mu(u,v) on M' = {mpuv}, want 5.05");
    let uniform = rows(&mp)
        .iter()
        .enumerate()
        .all(|(i, r)| r.iter().enumerate().all(|(j, &x)| i == j || (x - 5.05).abs() <= GOLDEN));
    ensure!(uniform, "fkw(M') is not uniform at 5.05");
    for e in [0.02, 0.3, 0.7] {
        let p = instability_pair(11, e).unwrap();
        let h = fkw_nearest_ultrametric(&p.perturbed).distance(u, v).unwrap();
        ensure!((h - (5.0 + e / 2.0)).abs() <= GOLDEN, "eps {e}: mu'(u,v) = {h}");
    }
    Ok(format!("mu(u,v) = {muv}, mu'(u,v) = {mpuv}"))
}

fn stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    for case in 0..1000 {
        let n = rng.gen_range(1..=15);
        let eps = rng.gen_range(0.0..=1.0);
        let m = random_metric(&mut rng, n);
        let mp = perturb(&m, eps, rng.gen());
        let moved = linf_distance(&m, &mp).unwrap();
        ensure!(moved <= eps + GOLDEN, "case {case}: perturbation moved {moved} > {eps}");
        let gap = linf_distance(&subdominant_ultrametric(&m), &subdominant_ultrametric(&mp)).unwrap();
        let oracle_gap = linf(&minimax(&rows(&m)), &minimax(&rows(&mp)));
        ensure!((gap - oracle_gap).abs() <= GOLDEN, "case {case}: library {gap} vs oracle {oracle_gap}");
        ensure!(gap <= eps + GOLDEN, "case {case}: n = {n}, gap {gap} > eps {eps}");
        worst = worst.max(gap - eps);
    }
    Ok(format!("1000 cases, max(gap - eps) = {worst:.3e}"))
}

fn instability() -> Outcome {
    let eps = 0.1;
    let mut notes = Vec::new();
    for n in [10, 20, 40] {
        let p = instability_pair(n, eps).unwrap();
        let moved = linf_distance(&p.original, &p.perturbed).unwrap();
        ensure!((moved - eps).abs() <= GOLDEN, "n = {n}: L∞(M, M') = {moved}");
        let diam = p.original.diameter();
        let gap = linf_distance(
            &fkw_nearest_ultrametric(&p.original),
            &fkw_nearest_ultrametric(&p.perturbed),
        )
        .unwrap();
        ensure!(gap >= diam / 4.0, "n = {n}: fkw gap {gap} < diam/4 = {}", diam / 4.0);
        let sub = linf_distance(
            &subdominant_ultrametric(&p.original),
            &subdominant_ultrametric(&p.perturbed),
        )
        .unwrap();
        ensure!(sub <= eps + GOLDEN, "n = {n}: subdominant gap {sub} > eps");
        notes.push(format!("n={n}: gap {gap:.2} vs diam/4 {:.2}", diam / 4.0));
    }
    Ok(notes.join(", "))
}

fn two_approximation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut clamped = 0;
    for case in 0..500 {
        let n = rng.gen_range(1..=15);
        let m = random_metric(&mut rng, n);
        let d = rows(&m);
        let sub_err = linf_distance(&subdominant_ultrametric(&m), &m).unwrap();
        let fit = fkw_fit(&m);
        let fkw_err = linf_distance(&fit.ultrametric, &m).unwrap();
        ensure!(sub_err <= 2.0 * fkw_err + GOLDEN, "case {case}: {sub_err} > 2 * {fkw_err}");
        ensure!(is_ultrametric(&rows(&fit.ultrametric), GOLDEN), "case {case}: fkw output not ultrametric");

        let mu = minimax(&d);
        let half = linf(&mu, &d) / 2.0;
        let shifted: Matrix = mu
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, &x)| if i == j { 0.0 } else { x + half }).collect())
            .collect();
        ensure!(is_ultrametric(&shifted, GOLDEN), "case {case}: shifted witness not ultrametric");
        let witness_err = linf(&shifted, &d);
        ensure!((witness_err - half).abs() <= GOLDEN, "case {case}: shifted witness error {witness_err}");
        if fit.clamped > 0 {
            clamped += 1;
        }
        ensure!(
            (fkw_err - half).abs() <= GOLDEN,
            "case {case}: fkw error {fkw_err} != half subdominant error {half} (clamped {})",
            fit.clamped
        );
    }
    Ok(format!("500 cases, exact half on all ({clamped} had clamped heights)"))
}

fn local_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut full, mut threshold) = (0, 0);
    for case in 0..200 {
        let t = rng.gen_range(2..=4);
        let s = random_sampling(&mut rng, t, 5);
        let d = rows(s.ambient());
        let sol = solve_local(&s, FitScheme::Fkw);
        let mut delta = 0.0f64;
        for i in 0..t - 1 {
            let (p, q) = (s.level(i), s.level(i + 1));
            let dh = hausdorff(p, q, &d);
            let got = locality(&sol.correspondences[i], s.ambient()).unwrap();
            ensure!(got == dh, "case {case} link {i}: locality {got} != d_H {dh}");
            if p.len() * q.len() <= 16 {
                full += 1;
            } else {
                threshold += 1;
            }
            let best = min_locality(p, q, &d, 16);
            ensure!(best >= dh - GOLDEN, "case {case} link {i}: a correspondence reaches {best} < {dh}");
            delta = delta.max(dh);
        }
        ensure!(sol.delta == delta, "case {case}: delta {} != max d_H {delta}", sol.delta);
    }
    Ok(format!("{full} links by full relation enumeration, {threshold} by threshold relations"))
}

fn check_labels(s: &TemporalSampling, sol: &LabeledSolution) -> Result<(), String> {
    for i in 0..s.len().saturating_sub(1) {
        let delta = locality(&sol.local.correspondences[i], s.ambient()).unwrap();
        let c = check_contiguity(
            &sol.labeling.levels[i],
            &sol.labeling.levels[i + 1],
            delta,
            s.ambient(),
        )
        .map_err(|e| e.to_string())?;
        ensure!(c.holds(), "levels {i}/{}: {c:?}", i + 1);
    }
    Ok(())
}

fn flow_pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut brute = 0;
    for case in 0..500 {
        let t = rng.gen_range(1..=5);
        let max = if rng.gen_bool(0.5) { 3 } else { 6 };
        let s = random_sampling(&mut rng, t, max);
        let n = s.size();
        let sol = solve_labeled(&s, FitScheme::Fkw).map_err(|e| format!("case {case}: {e}"))?;
        let net = build_flow_instance(&s, &sol.local.correspondences).unwrap();
        let flow = min_feasible_flow(&net).unwrap();
        flow.check_feasible(&net).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(flow.value == sol.flow_value, "case {case}: flow value differs on recomputation");
        ensure!(flow.value as usize <= n, "case {case}: flow {} > n = {n}", flow.value);
        ensure!(sol.labeling.k as usize <= n, "case {case}: k {} > n = {n}", sol.labeling.k);
        sol.labeling.validate().map_err(|e| format!("case {case}: {e}"))?;
        check_labels(&s, &sol).map_err(|e| format!("case {case}: {e}"))?;
        if n <= 10 {
            let d = rows(s.ambient());
            let links: Vec<Vec<(usize, usize)>> = (0..t - 1)
                .map(|i| {
                    let (p, q) = (s.level(i), s.level(i + 1));
                    let h = hausdorff(p, q, &d);
                    (0..p.len())
                        .flat_map(|a| (0..q.len()).map(move |b| (a, b)))
                        .filter(|&(a, b)| d[p[a]][q[b]] <= h + thc::TOL)
                        .collect()
                })
                .collect();
            let sizes: Vec<usize> = (0..t).map(|i| s.level(i).len()).collect();
            let want = brute_min_path_cover(&sizes, &links).unwrap();
            ensure!(flow.value as usize == want, "case {case}: flow {} vs brute force {want}", flow.value);
            brute += 1;
        }
    }
    Ok(format!("500 samplings, {brute} matched against brute force"))
}

fn hardness() -> Outcome {
    let mut graphs = 0;
    let mut colorable = 0;
    for n in 1..=6usize {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = (0..pairs.len()).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
            let g = Graph::from_indices(n, &edges).unwrap();
            graphs += 1;
            let three = brute_force_3color(&g).unwrap();
            let found = search_color_class_witness(&g, 1.0, 0.0).unwrap();
            let inst = reduce_from_graph(&g);
            if n < 3 {
                ensure!(found.is_none(), "{n} vertices, mask {mask}: a witness covers r, g, b");
            } else {
                ensure!(
                    found.is_some() == three.is_some(),
                    "{n} vertices, mask {mask}: witness {} but colorable {}",
                    found.is_some(),
                    three.is_some()
                );
            }
            if let Some((_, w)) = &found {
                let c = coloring_from_witness(&inst, w).map_err(|e| e.to_string())?;
                ensure!(monochromatic_edge(&g, &c).is_none(), "mask {mask}: improper extraction");
            }
            if let Some(c) = three {
                colorable += 1;
                if let Some(c) = pad_coloring(&g, &c).unwrap() {
                    let w = witness_from_coloring(&g, &c).map_err(|e| e.to_string())?;
                    let r = verify_witness(&inst, &w, 1.0, 0.0).unwrap();
                    ensure!(r.accepted, "{n} vertices, mask {mask}: generated witness rejected");
                    let back = coloring_from_witness(&inst, &w).map_err(|e| e.to_string())?;
                    ensure!(monochromatic_edge(&g, &back).is_none(), "mask {mask}: improper extraction");
                }
            }
        }
    }
    ensure!(brute_force_3color(&Graph::complete(4)).unwrap().is_none(), "K4 colored");
    Ok(format!("{graphs} labelled graphs, {colorable} 3-colorable; iff checked for 3..=6 vertices"))
}

fn distortion_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..500 {
        let t = rng.gen_range(1..=5);
        let s = random_sampling(&mut rng, t, 6);
        for scheme in [FitScheme::Fkw, FitScheme::Subdominant] {
            let sol = solve_local(&s, scheme);
            let cert = evaluate_general(&s, &sol).map_err(|e| format!("case {case} {scheme}: {e}"))?;
            let bound = match scheme {
                FitScheme::Fkw => 2.0 * sol.chi + 2.0 * sol.delta,
                FitScheme::Subdominant => sol.chi + 2.0 * sol.delta,
            };
            let mut rho = 0.0f64;
            for i in 0..t - 1 {
                let (p, q) = (s.level_ids(i), s.level_ids(i + 1));
                let pairs: Vec<(usize, usize)> = sol.correspondences[i]
                    .pairs()
                    .iter()
                    .map(|(a, b)| {
                        (
                            p.iter().position(|x| *x == a.as_str()).unwrap(),
                            q.iter().position(|y| *y == b.as_str()).unwrap(),
                        )
                    })
                    .collect();
                let h: [&PseudoUltrametric; 2] = [&sol.ultrametrics[i], &sol.ultrametrics[i + 1]];
                rho = rho.max(distortion(&rows(h[0]), &rows(h[1]), &pairs));
            }
            ensure!((rho - sol.rho).abs() <= GOLDEN, "case {case} {scheme}: rho {} vs oracle {rho}", sol.rho);
            ensure!(rho <= bound + GOLDEN, "case {case} {scheme}: rho {rho} > bound {bound}");
            ensure!((cert.rho_bound - bound).abs() <= GOLDEN, "case {case}: certified bound differs");
        }
    }
    Ok("500 samplings, both schemes".into())
}

fn end_to_end() -> Outcome {
    let cfg = SimConfig::default();
    let first = run(&cfg).map_err(|e| e.to_string())?;
    let sol = solve_labeled(&first.sampling, FitScheme::Fkw).map_err(|e| e.to_string())?;
    let again = run(&cfg).map_err(|e| e.to_string())?;
    let sol2 = solve_labeled(&again.sampling, FitScheme::Fkw).map_err(|e| e.to_string())?;
    ensure!(
        serde_json::to_string(&first).unwrap() == serde_json::to_string(&again).unwrap(),
        "simulation is not deterministic"
    );
    ensure!(
        serde_json::to_string(&sol).unwrap() == serde_json::to_string(&sol2).unwrap(),
        "labeled solution is not deterministic"
    );
    let changes = first.population.windows(2).filter(|w| w[0] != w[1]).count();
    ensure!(changes > 0, "population constant: {:?}", first.population);
    let merging: Vec<usize> = (0..first.sampling.len())
        .filter(|&i| {
            to_dendrogram(&sol.local.ultrametrics[i])
                .unwrap()
                .merges()
                .iter()
                .any(|m| matches!((&m.left, &m.right), (Node::Merge(_), Node::Merge(_))))
        })
        .collect();
    ensure!(!merging.is_empty(), "no level merges two clusters");
    check_labels(&first.sampling, &sol)?;
    Ok(format!(
        "{} levels, population {:?}, {} levels with cluster merges, k = {}",
        first.sampling.len(),
        first.population,
        merging.len(),
        sol.labeling.k
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 figure-4 golden values", Duration::from_secs(1), figure_four),
        ("2 subdominant stability", Duration::from_secs(10), stability),
        ("3 optimal-fit instability", Duration::from_secs(1), instability),
        ("4 two-approximation", Duration::from_secs(10), two_approximation),
        ("5 local optimality", Duration::from_secs(30), local_optimality),
        ("6 flow pipeline", Duration::from_secs(60), flow_pipeline),
        ("7 hardness round trip", Duration::from_secs(60), hardness),
        ("8 distortion bound", Duration::from_secs(30), distortion_bound),
        ("9 end-to-end simulation", Duration::from_secs(60), end_to_end),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(_) if took > limit => (false, format!("over time limit {limit:?}")),
            Ok(d) => (true, d),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} [{name}] {:.2}s (limit {}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
