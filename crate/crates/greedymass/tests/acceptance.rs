//! Acceptance suite: one pass/fail line per criterion.
//!
//! Every tolerance and threshold is pinned in this file; nothing defers to
//! later calibration. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use greedymass::estimators::{
    check_concavity, check_monotonicity, check_symmetry, divergence_probe,
    estimate_directional_limit, few_tsp_path, maximal_inequality_check, moment_property_check,
    sandwich_and_identity_suite, standard_box_pairs, tail_bound_check, DirectionalQuery,
    DivergenceClass, DivergenceFamily, DivergenceThresholds, GridPoint, ProcessSpec,
    SuperadditiveProcessSpec, C5_SWEEP,
};
use greedymass::geometry::norm2;
use greedymass::pointproc::{
    projection_kernel, BoxRegion, DppKernelSpec, MarkDistribution, MarkedRealization, Window,
};
use greedymass::rng::stream_rng;
use greedymass::solvers::{
    brute_force_animal_oracle, brute_force_path_oracle, lattice_max_animal,
    lattice_max_path, lattice_reduction_check, max_mass_animal_inf, max_mass_path, Anchors,
    AnimalQuery, NormParam, PathMode, PathQuery, QValue, Restriction,
};
use rand::Rng;

fn criterion_line(n: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

/// Dyadic masses keep every mass sum exact in f64, so solver-vs-oracle
/// comparisons are exact equality.
fn dyadic_marks() -> MarkDistribution {
    MarkDistribution::Discrete {
        values: (1..=32).map(|k| k as f64 / 8.0).collect(),
        probs: vec![1.0 / 32.0; 32],
    }
}

// ---------------------------------------------------------------- 1 & 2

#[test]
fn criterion_01_path_oracle_equivalence() {
    let t0 = Instant::now();
    let process = ProcessSpec::Poisson {
        lambda: 0.4,
        marks: dyadic_marks(),
    };
    let window = Window::centered_box(vec![3.5, 3.5]);
    let mut checked = 0usize;
    let mut seed_counter = 0u64;
    while checked < 500 {
        seed_counter += 1;
        let mut rng = stream_rng(101, &[seed_counter]);
        let sample_seed: u64 = rng.gen();
        let r = process.sample(&window, sample_seed).unwrap();
        let q = match seed_counter % 3 {
            0 => PathQuery {
                mode: PathMode::FromOrigin {
                    ell: rng.gen_range(0.8..2.2),
                },
                restriction: Restriction::None,
                norm: NormParam::l2(),
            },
            1 => PathQuery {
                mode: PathMode::TwoPoint {
                    x: vec![-1.0, 0.0],
                    y: vec![1.0, 0.0],
                    ell: rng.gen_range(2.0..3.2),
                },
                restriction: Restriction::None,
                norm: NormParam::l2(),
            },
            _ => PathQuery {
                mode: PathMode::TwoPoint {
                    x: vec![-1.0, 0.0],
                    y: vec![1.0, 0.0],
                    ell: rng.gen_range(2.0..3.2),
                },
                restriction: if seed_counter % 2 == 0 {
                    Restriction::Diamond { delta: 0.5 }
                } else {
                    Restriction::Antidiamond { delta: 0.5 }
                },
                norm: NormParam::l2(),
            },
        };
        let oracle = match brute_force_path_oracle(&r, &q) {
            Ok(v) => v,
            Err(_) => continue, // pool beyond the oracle cap; next seed
        };
        let solver = max_mass_path(&r, &q, None).unwrap();
        assert_eq!(
            solver.value, oracle,
            "instance seed {seed_counter}: solver {} oracle {}",
            solver.value, oracle
        );
        checked += 1;
    }
    let dt = t0.elapsed();
    criterion_line(
        1,
        "path oracle equivalence",
        dt.as_secs() <= 120,
        &format!("500 instances exact, {dt:.2?} (limit 120s)"),
    );
}

#[test]
fn criterion_02_animal_oracle_equivalence() {
    let t0 = Instant::now();
    let process = ProcessSpec::Poisson {
        lambda: 0.5,
        marks: dyadic_marks(),
    };
    let window = Window::centered_box(vec![4.0, 4.0]);
    let mut checked = 0usize;
    let mut seed_counter = 0u64;
    while checked < 300 {
        seed_counter += 1;
        let mut rng = stream_rng(102, &[seed_counter]);
        let sample_seed: u64 = rng.gen();
        let r = process.sample(&window, sample_seed).unwrap();
        let q = AnimalQuery {
            anchors: if seed_counter % 2 == 0 {
                Anchors::One { x: vec![0.0, 0.0] }
            } else {
                Anchors::Two {
                    x: vec![-1.0, 0.0],
                    y: vec![1.0, 0.0],
                }
            },
            ell: rng.gen_range(1.0..2.8),
            q: QValue::Inf,
            restriction: if seed_counter % 5 == 0 {
                Restriction::Antidiamond { delta: 0.4 }
            } else {
                Restriction::None
            },
            norm: NormParam::l2(),
        };
        let q = match (&q.anchors, &q.restriction) {
            (Anchors::One { .. }, Restriction::Antidiamond { .. }) => AnimalQuery {
                restriction: Restriction::None,
                ..q
            },
            _ => q,
        };
        let oracle = match brute_force_animal_oracle(&r, &q) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let solver = max_mass_animal_inf(&r, &q, None).unwrap();
        assert_eq!(
            solver.value, oracle,
            "instance seed {seed_counter}: solver {} oracle {}",
            solver.value, oracle
        );
        checked += 1;
    }
    let dt = t0.elapsed();
    criterion_line(
        2,
        "animal oracle equivalence",
        dt.as_secs() <= 300,
        &format!("300 instances exact, {dt:.2?} (limit 300s)"),
    );
}

// ------------------------------------------------------------------- 3

type Site = (i64, i64);

fn site_masses(r: &MarkedRealization) -> HashMap<Site, f64> {
    r.atoms
        .iter()
        .map(|a| ((a.loc[0] as i64, a.loc[1] as i64), a.mass))
        .collect()
}

fn neighbors4(s: Site) -> [Site; 4] {
    [(s.0 + 1, s.1), (s.0 - 1, s.1), (s.0, s.1 + 1), (s.0, s.1 - 1)]
}

/// Exhaustive max-mass connected subset of the window of size <= n
/// containing the anchors: BFS over canonical frontier sets.
fn lattice_animal_oracle(
    masses: &HashMap<Site, f64>,
    half: i64,
    n: usize,
    anchors: &[Site],
) -> f64 {
    let in_win = |s: &Site| s.0.abs() <= half && s.1.abs() <= half;
    let root = anchors[0];
    let mut best = 0.0f64;
    let mut seen: HashSet<BTreeSet<Site>> = HashSet::new();
    let mut frontier: Vec<BTreeSet<Site>> = vec![BTreeSet::from([root])];
    seen.insert(frontier[0].clone());
    while let Some(set) = frontier.pop() {
        if anchors.iter().all(|a| set.contains(a)) {
            let mass: f64 = {
                // canonical order: BTreeSet iterates sorted
                set.iter().filter_map(|s| masses.get(s)).sum()
            };
            if mass > best {
                best = mass;
            }
        }
        if set.len() >= n {
            continue;
        }
        for cell in set.iter().cloned().collect::<Vec<_>>() {
            for nb in neighbors4(cell) {
                if in_win(&nb) && !set.contains(&nb) {
                    let mut bigger = set.clone();
                    bigger.insert(nb);
                    if seen.insert(bigger.clone()) {
                        frontier.push(bigger);
                    }
                }
            }
        }
    }
    best
}

/// Exhaustive max vertex-set mass over n-step lattice paths.
fn lattice_path_oracle(
    masses: &HashMap<Site, f64>,
    half: i64,
    n: usize,
    anchor: Site,
    self_avoiding: bool,
) -> f64 {
    fn rec_free(
        masses: &HashMap<Site, f64>,
        half: i64,
        cur: Site,
        left: usize,
        visited: &mut Vec<Site>,
        best: &mut f64,
    ) {
        let mass: f64 = {
            let uniq: BTreeSet<Site> = visited.iter().cloned().collect();
            uniq.iter().filter_map(|s| masses.get(s)).sum()
        };
        if mass > *best {
            *best = mass;
        }
        if left == 0 {
            return;
        }
        for nb in neighbors4(cur) {
            if nb.0.abs() > half || nb.1.abs() > half {
                continue;
            }
            visited.push(nb);
            rec_free(masses, half, nb, left - 1, visited, best);
            visited.pop();
        }
    }
    fn rec_sa(
        masses: &HashMap<Site, f64>,
        half: i64,
        cur: Site,
        left: usize,
        visited: &mut Vec<Site>,
        best: &mut f64,
    ) {
        let mass: f64 = visited.iter().filter_map(|s| masses.get(s)).sum();
        if mass > *best {
            *best = mass;
        }
        if left == 0 {
            return;
        }
        for nb in neighbors4(cur) {
            if nb.0.abs() > half || nb.1.abs() > half || visited.contains(&nb) {
                continue;
            }
            visited.push(nb);
            rec_sa(masses, half, nb, left - 1, visited, best);
            visited.pop();
        }
    }
    let mut best = 0.0;
    let mut visited = vec![anchor];
    if self_avoiding {
        rec_sa(masses, half, anchor, n, &mut visited, &mut best);
    } else {
        rec_free(masses, half, anchor, n, &mut visited, &mut best);
    }
    best
}

#[test]
fn criterion_03_lattice_oracle_equivalence() {
    let t0 = Instant::now();
    let process = ProcessSpec::LatticeIid {
        marks: MarkDistribution::Discrete {
            values: vec![0.25, 1.0, 2.0],
            probs: vec![0.5, 0.3, 0.2],
        },
    };
    let window = Window::centered_box(vec![2.5, 2.5]); // 5x5 sites
    for i in 0..200u64 {
        let mut rng = stream_rng(103, &[i]);
        let sample_seed: u64 = rng.gen();
        let r = process.sample(&window, sample_seed).unwrap();
        let masses = site_masses(&r);
        // animals, n <= 7; window capacity caps the solver reach, so the
        // oracle window is authoritative here
        let n = 2 + (i % 6) as usize; // 2..=7
        let anchors: Vec<Site> = if i % 3 == 0 {
            vec![(0, 0), (1, 1)]
        } else {
            vec![(0, 0)]
        };
        let oracle = lattice_animal_oracle(&masses, 2, n, &anchors);
        let anchor_vecs: Vec<Vec<i64>> = anchors.iter().map(|s| vec![s.0, s.1]).collect();
        let solver = lattice_max_animal(&r, n, &anchor_vecs, None).unwrap();
        assert_eq!(solver.value, oracle, "animal instance {i} n={n}");

        // paths, n <= 8, both flags, on the same 5x5 window
        let steps = 3 + (i % 6) as usize; // 3..=8
        for sa in [true, false] {
            let oracle = lattice_path_oracle(&masses, 2, steps, (0, 0), sa);
            let solver = lattice_max_path(&r, steps, &[0, 0], sa, None).unwrap();
            assert_eq!(solver.value, oracle, "path instance {i} steps={steps} sa={sa}");
        }
    }
    let dt = t0.elapsed();
    criterion_line(
        3,
        "lattice oracle equivalence",
        dt.as_secs() <= 300,
        &format!("200 instances exact (animals n<=7, paths n<=8), {dt:.2?} (limit 300s)"),
    );
}

// ------------------------------------------------------------------- 4

#[test]
fn criterion_04_sandwich_chain() {
    let poisson = ProcessSpec::Poisson {
        lambda: 0.4,
        marks: dyadic_marks(),
    };
    let lattice = ProcessSpec::LatticeIid {
        marks: MarkDistribution::Bernoulli { p: 0.45, scale: 1.0 },
    };
    let rep_p = sandwich_and_identity_suite(&poisson, 500, 104, None).unwrap();
    let rep_l = sandwich_and_identity_suite(&lattice, 500, 105, None).unwrap();
    let all_lines = rep_p
        .diagnostic
        .lines
        .iter()
        .chain(rep_l.diagnostic.lines.iter());
    let chain_total = all_lines
        .clone()
        .filter(|l| l.label.contains("P(l)") || l.label.contains("P(2l)"))
        .count();
    let pass = rep_p.diagnostic.pass && rep_l.diagnostic.pass;
    criterion_line(
        4,
        "sandwich chain",
        pass,
        &format!(
            "1000 instances, {} chain inequalities, 100% hold ({} failures)",
            chain_total,
            rep_p.failures.len() + rep_l.failures.len()
        ),
    );
}

// ------------------------------------------------------------------- 5

#[test]
fn criterion_05_lattice_reduction() {
    let t0 = Instant::now();
    // strictly positive marks keep every site occupied (the identity's
    // hypothesis)
    let process = ProcessSpec::LatticeIid {
        marks: dyadic_marks(),
    };
    let window = Window::centered_box(vec![7.5, 7.5]);
    let mut all_equal = true;
    for i in 0..200u64 {
        let mut rng = stream_rng(106, &[i]);
        let sample_seed: u64 = rng.gen();
        let r = process.sample(&window, sample_seed).unwrap();
        let n = (i % 6) as usize; // 0..=5
        let y = vec![(i % 3) as i64 - 1, ((i / 3) % 3) as i64 - 1];
        let equal = lattice_reduction_check(&r, &[0, 0], &y, n, None).unwrap();
        if !equal {
            all_equal = false;
            eprintln!("reduction mismatch at instance {i}, n={n}, y={y:?}");
        }
    }
    criterion_line(
        5,
        "lattice reduction identity",
        all_equal,
        &format!("200 instances, exact equality 100%, {:.2?}", t0.elapsed()),
    );
}

// ------------------------------------------------------------------- 6

#[test]
fn criterion_06_layer_identity() {
    let process = ProcessSpec::Poisson {
        lambda: 2.0,
        marks: MarkDistribution::Exponential { rate: 0.7 },
    };
    let window = Window::centered_box(vec![6.0, 6.0]);
    let mut sets = 0usize;
    let mut worst = 0.0f64;
    let mut seed = 0u64;
    while sets < 10_000 {
        seed += 1;
        let mut rng = stream_rng(107, &[seed]);
        let sample_seed: u64 = rng.gen();
        let r = process.sample(&window, sample_seed).unwrap();
        for _ in 0..50 {
            let mut verts = Vec::new();
            for a in &r.atoms {
                if rng.gen_bool(0.3) {
                    verts.push(a.loc.clone());
                }
            }
            let direct = r.mass_of_vertices(&verts);
            let layered = r.layered_mass_of_vertices(&verts);
            let rel = (direct - layered).abs() / (1.0 + direct.abs());
            worst = worst.max(rel);
            sets += 1;
            assert!(rel <= 1e-12, "layer identity deviation {rel}");
            if sets >= 10_000 {
                break;
            }
        }
    }
    criterion_line(
        6,
        "layer identity",
        worst <= 1e-12,
        &format!("10^4 sets, worst relative residual {worst:.2e} (tol 1e-12)"),
    );
}

// ------------------------------------------------------------------- 7

#[test]
fn criterion_07_superadditivity() {
    let t0 = Instant::now();
    let process = ProcessSpec::Poisson {
        lambda: 1.0,
        marks: dyadic_marks(),
    };
    let mut violations = 0usize;
    let mut tuples = 0usize;
    let mut group_seed = 0u64;
    while tuples < 10_000 {
        group_seed += 1;
        let mut rng = stream_rng(108, &[group_seed]);
        let sample_seed: u64 = rng.gen();
        // direction and delta per group
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let beta = rng.gen_range(0.3..0.85);
        let u = vec![beta * angle.cos(), beta * angle.sin()];
        let delta = rng.gen_range(0.15..0.85);
        let span = 2.2f64;
        let extent = span * norm2(&u) + 2.0 * span + 1.0;
        let window = Window::centered_box(vec![extent, extent]);
        let r = process.sample(&window, sample_seed).unwrap();
        for _ in 0..4 {
            let mut ss = [
                rng.gen_range(-span..span),
                rng.gen_range(-span..span),
                rng.gen_range(-span..span),
            ];
            ss.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (s1, s2, s3) = (ss[0], ss[1], ss[2]);
            if s2 - s1 < 0.3 || s3 - s2 < 0.3 {
                continue;
            }
            let eval = |a: f64, b: f64| -> f64 {
                let x: Vec<f64> = u.iter().map(|e| a * e).collect();
                let y: Vec<f64> = u.iter().map(|e| b * e).collect();
                max_mass_animal_inf(
                    &r,
                    &AnimalQuery {
                        anchors: Anchors::Two { x, y },
                        ell: b - a,
                        q: QValue::Inf,
                        restriction: Restriction::Diamond { delta },
                        norm: NormParam::l2(),
                    },
                    None,
                )
                .unwrap()
                .value
            };
            let whole = eval(s1, s3);
            let left = eval(s1, s2);
            let right = eval(s2, s3);
            tuples += 1;
            if whole < left + right {
                violations += 1;
                eprintln!(
                    "superadditivity violated: group {group_seed} s=({s1:.3},{s2:.3},{s3:.3}) \
                     whole={whole} left={left} right={right}"
                );
            }
            if tuples >= 10_000 {
                break;
            }
        }
    }
    criterion_line(
        7,
        "diamond process superadditivity",
        violations == 0,
        &format!("10^4 tuples, {violations} violations, {:.2?}", t0.elapsed()),
    );
}

// ------------------------------------------------------------------- 8

#[test]
fn criterion_08_directional_shape_checks() {
    let t0 = Instant::now();
    let process = ProcessSpec::Poisson {
        lambda: 1.0,
        marks: MarkDistribution::Constant { c: 1.0 },
    };
    let query = DirectionalQuery {
        direction: vec![1.0, 0.0],
        beta_grid: vec![-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8],
        delta: 0.3,
        ell_grid: vec![4.0],
        a: 0.0,
        b: 1.0,
    };
    let rep = estimate_directional_limit(&query, &process, 200, 109, None).unwrap();
    assert_eq!(rep.solver_flags, 0, "no budget-capped solves allowed here");
    let mut all_pass = true;
    let mut detail = String::new();
    for series in ["diamond", "antidiamond"] {
        let pts: Vec<GridPoint> = rep
            .grid
            .iter()
            .filter(|g| g.series == series)
            .cloned()
            .collect();
        let conc = check_concavity(&pts).unwrap();
        let sym = check_symmetry(&pts).unwrap();
        let mono = check_monotonicity(&pts).unwrap();
        all_pass &= conc.pass && sym.pass && mono.pass;
        detail.push_str(&format!(
            "{series}: conc {} sym {} mono {}; ",
            conc.pass, sym.pass, mono.pass
        ));
    }
    let dt = t0.elapsed();
    criterion_line(
        8,
        "directional symmetry/concavity/monotonicity",
        all_pass && dt.as_secs() <= 1800,
        &format!("{detail}{dt:.2?} (limit 30 min)"),
    );
}

// ------------------------------------------------------------------- 9

#[test]
fn criterion_09_tail_bound() {
    let rep = tail_bound_check(1.0, 2, &[6.0, 8.0, 10.0, 14.0], 3.0, 2000, 110).unwrap();
    // pinned constant from the construction at alpha = 10: 2^{d+1}·e/α² = 8e/100
    assert!((rep.bounds[2] - 8.0 * std::f64::consts::E / 100.0).abs() < 1e-12);
    let detail: Vec<String> = rep
        .diagnostic
        .lines
        .iter()
        .map(|l| format!("{}: freq {:.4} <= bound {:.4}+{:.4}", l.label, l.lhs, l.rhs, l.slack))
        .collect();
    criterion_line(
        9,
        "poisson path tail bound",
        rep.diagnostic.pass,
        &detail.join("; "),
    );
}

// ------------------------------------------------------------------ 10

#[test]
fn criterion_10_maximal_inequality() {
    // exact additive case: constant unit marks
    let additive = SuperadditiveProcessSpec::SyntheticIidSum {
        marks: MarkDistribution::Constant { c: 1.0 },
    };
    let rep_add = maximal_inequality_check(&additive, &[1.5, 2.0, 4.0], 4, 300, 111, None).unwrap();
    // statistical case: diamond-restricted model process on unit-mark Poisson
    let diamond = SuperadditiveProcessSpec::DiamondRestricted {
        process: ProcessSpec::Poisson {
            lambda: 1.0,
            marks: MarkDistribution::Constant { c: 1.0 },
        },
        direction: vec![0.5, 0.0],
        delta: 0.3,
    };
    let rep_dia = maximal_inequality_check(&diamond, &[1.0, 2.0, 4.0], 2, 300, 112, None).unwrap();
    let pass = rep_add.diagnostic.pass
        && rep_dia.diagnostic.pass
        && rep_add.fekete.compatibility.pass
        && rep_dia.fekete.compatibility.pass;
    criterion_line(
        10,
        "maximal inequality",
        pass,
        &format!(
            "additive TC {:.3} (exact), diamond TC {:.3}, all alpha lines hold",
            rep_add.tc_estimate, rep_dia.tc_estimate
        ),
    );
}

// ------------------------------------------------------------------ 11

#[test]
fn criterion_11_few_sweep_bound() {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for &d in &[2usize, 3] {
        for &n in &[100usize, 1000, 10_000] {
            for inst in 0..10u64 {
                let mut rng = stream_rng(113, &[d as u64, n as u64, inst]);
                let side = 5.0;
                let pts: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..d).map(|_| rng.gen_range(0.0..side)).collect())
                    .collect();
                let (path, ratio) = few_tsp_path(&pts, side, d).unwrap();
                assert_eq!(path.vertices.len(), n + 1);
                assert!(ratio <= C5_SWEEP, "d={d} n={n} ratio={ratio}");
                worst = worst.max(ratio);
                count += 1;
            }
        }
    }
    criterion_line(
        11,
        "few sweep bound",
        worst <= C5_SWEEP,
        &format!("{count} instances, worst ratio {worst:.3} <= C5 = {C5_SWEEP} (documented in tsp module)"),
    );
}

// ------------------------------------------------------------------ 12

#[test]
fn criterion_12_moment_property() {
    // Poisson factorization at C = 1
    let poisson = ProcessSpec::Poisson {
        lambda: 1.0,
        marks: MarkDistribution::Constant { c: 1.0 },
    };
    let window = Window::centered_box(vec![4.0, 4.0]);
    let batch: Vec<MarkedRealization> = (0..3000)
        .map(|i| {
            let mut rng = stream_rng(114, &[1, i]);
            let s: u64 = rng.gen();
            poisson.sample(&window, s).unwrap()
        })
        .collect();
    let pairs = standard_box_pairs(4.0, 20);
    let poisson_diag = moment_property_check(&batch, &pairs, 1.0).unwrap();

    // grid DPP: projection kernel, negative correlations
    let (kernel, _rank) = projection_kernel(8, 2, 20);
    let spec = DppKernelSpec {
        side_length: 8.0,
        cells_per_side: 8,
        dim: 2,
        kernel,
        mark_dist: MarkDistribution::Constant { c: 1.0 },
    };
    let sampler = spec.build().unwrap();
    let dpp_batch: Vec<MarkedRealization> =
        (0..2500).map(|i| sampler.sample(500_000 + i).unwrap()).collect();
    // box pairs inside the torus [0,8]^2
    let mut dpp_pairs = Vec::new();
    for k in 0..20usize {
        let x0 = (k % 5) as f64 * 1.3 + 0.2;
        let b1 = BoxRegion::new(vec![x0, 0.5], vec![x0 + 1.2, 1.9]).unwrap();
        let b2 = if k % 3 == 2 {
            b1.clone()
        } else {
            BoxRegion::new(vec![x0, 5.5], vec![x0 + 1.2, 6.9]).unwrap()
        };
        dpp_pairs.push((b1, b2));
    }
    let dpp_diag = moment_property_check(&dpp_batch, &dpp_pairs, 1.0).unwrap();

    // clustered negative control must violate C = 1
    let cluster = ProcessSpec::PoissonCluster {
        lambda: 1.0,
        marks: MarkDistribution::Constant { c: 1.0 },
        offset: 0.05,
    };
    let cluster_batch: Vec<MarkedRealization> = (0..3000)
        .map(|i| {
            let mut rng = stream_rng(114, &[2, i]);
            let s: u64 = rng.gen();
            cluster.sample(&window, s).unwrap()
        })
        .collect();
    let same_box = BoxRegion::new(vec![-1.5, -1.5], vec![1.5, 1.5]).unwrap();
    let cluster_diag =
        moment_property_check(&cluster_batch, &[(same_box.clone(), same_box)], 1.0).unwrap();

    let pass = poisson_diag.pass && dpp_diag.pass && !cluster_diag.pass;
    criterion_line(
        12,
        "moment property",
        pass,
        &format!(
            "poisson 20 pairs: {}, dpp 20 pairs: {}, clustered control violates: {}",
            poisson_diag.pass, dpp_diag.pass, !cluster_diag.pass
        ),
    );
}

// ------------------------------------------------------------------ 13

#[test]
fn criterion_13_divergence_probes() {
    let thresholds = DivergenceThresholds::default(); // {2, 4, 8} fixed
    let budget = Some(300_000u64);

    let columnar_exp = DivergenceFamily::Columnar {
        marks: MarkDistribution::Exponential { rate: 0.25 },
    };
    let rep1 = divergence_probe(&columnar_exp, &[16.0, 32.0, 64.0], 50, 115, &thresholds, budget)
        .unwrap();

    let columnar_const = DivergenceFamily::Columnar {
        marks: MarkDistribution::Constant { c: 1.0 },
    };
    let rep2 = divergence_probe(&columnar_const, &[16.0, 32.0, 64.0], 50, 116, &thresholds, budget)
        .unwrap();

    let heavy = DivergenceFamily::Poisson {
        lambda: 1.0,
        marks: MarkDistribution::Pareto {
            alpha: 1.2,
            x_min: 1.0,
        },
    };
    let rep3 =
        divergence_probe(&heavy, &[4.0, 8.0, 16.0], 50, 117, &thresholds, budget).unwrap();

    let light = DivergenceFamily::Poisson {
        lambda: 1.0,
        marks: MarkDistribution::Pareto {
            alpha: 8.0,
            x_min: 0.25,
        },
    };
    let rep4 =
        divergence_probe(&light, &[4.0, 8.0, 16.0], 50, 118, &thresholds, budget).unwrap();

    let pass = rep1.classification == DivergenceClass::DivergenceConsistent
        && rep2.classification == DivergenceClass::Plateau
        && rep3.classification == DivergenceClass::DivergenceConsistent
        && rep4.classification == DivergenceClass::Plateau;
    criterion_line(
        13,
        "divergence probes",
        pass,
        &format!(
            "columnar-exp {:?} (stat {:.2}), columnar-const {:?} (stat {:.2}), \
             pareto<d {:?} (stat {:.2}), pareto>>d {:?} (stat {:.2})",
            rep1.classification,
            rep1.grid.last().unwrap().mean,
            rep2.classification,
            rep2.grid.last().unwrap().mean,
            rep3.classification,
            rep3.grid.last().unwrap().mean,
            rep4.classification,
            rep4.grid.last().unwrap().mean,
        ),
    );
}

// ------------------------------------------------------------------ 14

#[test]
fn criterion_14_determinism_across_parallelism() {
    use greedymass::cli::{run_config, ExperimentConfig};
    let tmp = tempfile::tempdir().unwrap();
    let configs: Vec<(&str, serde_json::Value)> = vec![
        (
            "lln",
            serde_json::json!({
                "kind": "estimate", "seed": 21,
                "spec": {"pipeline": "lln",
                    "process": {"kind": "poisson", "lambda": 1.0, "marks": {"kind": "constant", "c": 1.0}},
                    "mode": "path", "ell_grid": [1.0, 2.0], "replicas": 60}
            }),
        ),
        (
            "directional",
            serde_json::json!({
                "kind": "estimate", "seed": 22,
                "spec": {"pipeline": "directional",
                    "process": {"kind": "poisson", "lambda": 1.0, "marks": {"kind": "constant", "c": 1.0}},
                    "query": {"direction": [1.0, 0.0], "beta_grid": [-0.4, 0.0, 0.4],
                              "delta": 0.3, "ell_grid": [2.0], "a": 0.0, "b": 1.0},
                    "replicas": 50}
            }),
        ),
        (
            "verify-suites",
            serde_json::json!({
                "kind": "verify", "seed": 23,
                "spec": {"suites": [
                    {"suite": "sandwich",
                     "process": {"kind": "poisson", "lambda": 0.3,
                                 "marks": {"kind": "discrete", "values": [0.5, 1.0, 2.0],
                                           "probs": [0.5, 0.3, 0.2]}},
                     "instances": 30},
                    {"suite": "tail_bound", "lambda": 1.0, "dim": 2,
                     "alpha_grid": [8.0, 12.0], "ell_max": 2.0, "replicas": 200},
                    {"suite": "maximal_inequality",
                     "process": {"kind": "synthetic_iid_sum",
                                 "marks": {"kind": "exponential", "rate": 1.0}},
                     "alpha_grid": [2.0, 5.0], "n_max": 3, "replicas": 100},
                    {"suite": "moment_property",
                     "process": {"kind": "poisson", "lambda": 1.0,
                                 "marks": {"kind": "constant", "c": 1.0}},
                     "window_half": 3.0, "pairs": 5, "replicas": 400,
                     "constant": 1.0},
                    {"suite": "divergence",
                     "family": {"kind": "columnar", "marks": {"kind": "constant", "c": 1.0}},
                     "window_grid": [8.0, 16.0], "replicas": 50,
                     "expect": "plateau"},
                    {"suite": "few_tsp", "n_values": [100], "dims": [2, 3],
                     "side": 5.0, "instances_per": 5}
                ]}
            }),
        ),
        (
            "generate",
            serde_json::json!({
                "kind": "generate", "seed": 24,
                "spec": {"process": {"kind": "lattice_iid",
                                     "marks": {"kind": "bernoulli", "p": 0.4, "scale": 1.0}},
                         "window": {"shape": "box", "center": [0.0, 0.0],
                                    "half_widths": [5.0, 5.0]},
                         "count": 3}
            }),
        ),
    ];
    let mut all_identical = true;
    for (name, json) in &configs {
        let cfg: ExperimentConfig = serde_json::from_value(json.clone()).unwrap();
        let out1 = tmp.path().join(format!("{name}-jobs1"));
        let out8 = tmp.path().join(format!("{name}-jobs8"));
        let o1 = run_config(&cfg, tmp.path(), Some(&out1), None, Some(1)).unwrap();
        let o8 = run_config(&cfg, tmp.path(), Some(&out8), None, Some(8)).unwrap();
        assert_eq!(o1.exit, 0, "{name} run failed");
        assert_eq!(o8.exit, 0, "{name} run failed");
        let b1 = std::fs::read(out1.join("report.json")).unwrap();
        let b8 = std::fs::read(out8.join("report.json")).unwrap();
        if b1 != b8 {
            all_identical = false;
            eprintln!("{name}: reports differ between --jobs 1 and --jobs 8");
        }
        // replay round trip on the jobs-1 artifacts
        let identical = greedymass::cli::replay(&out1.join("manifest.json"), Some(4)).unwrap();
        if !identical {
            all_identical = false;
            eprintln!("{name}: replay mismatch");
        }
    }
    criterion_line(
        14,
        "determinism (jobs 1 vs 8 + replay)",
        all_identical,
        &format!("{} pipelines byte-identical", configs.len()),
    );
}
