use greedymass::pointproc::{sample_poisson_marked, MarkDistribution, Window};
use greedymass::solvers::{
    max_mass_animal_inf, max_mass_path, Anchors, AnimalQuery, NormParam, PathMode, PathQuery,
    QValue, Restriction,
};
use std::time::Instant;

#[test]
#[ignore]
fn bench_animal_solver_scaling() {
    let nu = MarkDistribution::Constant { c: 1.0 };
    for ell in [3.0f64, 4.0] {
        for beta in [0.0f64, 0.4, 0.8] {
            let mut total_nodes = 0u64;
            let mut total_value = 0.0;
            let t0 = Instant::now();
            let reps = 8;
            for seed in 0..reps {
                let half = ell + 1.0;
                let w = Window::centered_box(vec![half, half]);
                let r = sample_poisson_marked(1.0, &nu, &w, 42_000 + seed).unwrap();
                let (anchors, restriction) = if beta == 0.0 {
                    (Anchors::One { x: vec![0.0, 0.0] }, Restriction::None)
                } else {
                    (
                        Anchors::Two {
                            x: vec![-0.5 * ell * beta, 0.0],
                            y: vec![0.5 * ell * beta, 0.0],
                        },
                        Restriction::Antidiamond { delta: 0.3 },
                    )
                };
                let q = AnimalQuery {
                    anchors,
                    ell,
                    q: QValue::Inf,
                    restriction,
                    norm: NormParam::l2(),
                };
                let res = max_mass_animal_inf(&r, &q, Some(400_000_000)).unwrap();
                total_nodes += res.nodes_explored;
                total_value += res.value;
                assert!(res.proven_optimal, "ell {ell} beta {beta}");
            }
            println!(
                "animal ell={ell} beta={beta}: avg_value={:.2} avg_nodes={} per_solve={:?}",
                total_value / reps as f64,
                total_nodes / reps,
                t0.elapsed() / reps as u32
            );
        }
    }
}

#[test]
#[ignore]
fn bench_path_solver_scaling() {
    let nu = MarkDistribution::Constant { c: 1.0 };
    for ell in [3.0f64, 4.0, 5.0, 6.0] {
        let mut total_nodes = 0u64;
        let mut total_value = 0.0;
        let t0 = Instant::now();
        let reps = 8;
        for seed in 0..reps {
            let half = ell + 1.0;
            let w = Window::centered_box(vec![half, half]);
            let r = sample_poisson_marked(1.0, &nu, &w, 55_000 + seed).unwrap();
            let q = PathQuery {
                mode: PathMode::FromOrigin { ell },
                restriction: Restriction::None,
                norm: NormParam::l2(),
            };
            let res = max_mass_path(&r, &q, Some(400_000_000)).unwrap();
            total_nodes += res.nodes_explored;
            total_value += res.value;
            assert!(res.proven_optimal, "ell {ell}");
        }
        println!(
            "path ell={ell}: avg_value={:.2} avg_nodes={} per_solve={:?}",
            total_value / reps as f64,
            total_nodes / reps,
            t0.elapsed() / reps as u32
        );
    }
}
