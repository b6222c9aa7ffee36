use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::process::ProcessSpec;
use super::report::{CheckLine, Diagnostic};
use crate::error::{Error, Result};
use crate::pointproc::{MarkedRealization, Window};
use crate::rng::{stage, stream_rng};
use crate::solvers::{
    lattice_reduction_check, max_mass_animal_inf, max_mass_path, Anchors, AnimalQuery, NormParam,
    PathMode, PathQuery, QValue, Restriction,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub diagnostic: Diagnostic,
    pub instances: usize,
    /// Failing instances as reproducible artifacts.
    pub failures: Vec<serde_json::Value>,
}

/// Per-instance structural suite: the sandwich chain
/// `P(ℓ) ≤ Â^∞(ℓ) ≤ P(2ℓ)`, restriction monotonicity, the layer identity,
/// and (on lattice processes) the lattice/continuum reduction equality.
/// Structural assertions carry no statistical slack; any failure is
/// reported with the instance attached.
pub fn sandwich_and_identity_suite(
    process: &ProcessSpec,
    instance_count: usize,
    seed: u64,
    node_budget: Option<u64>,
) -> Result<SandwichReport> {
    process.validate()?;
    if instance_count == 0 {
        return Err(Error::invalid("need at least one instance"));
    }
    let per_instance: Vec<Result<(Vec<CheckLine>, Option<serde_json::Value>, u64)>> = (0
        ..instance_count)
        .into_par_iter()
        .map(|i| run_instance(process, i, seed, node_budget))
        .collect();

    let mut lines = Vec::new();
    let mut failures = Vec::new();
    let mut flags = 0u64;
    for out in per_instance {
        let (ls, failure, f) = out?;
        flags += f;
        lines.extend(ls);
        if let Some(artifact) = failure {
            failures.push(artifact);
        }
    }
    Ok(SandwichReport {
        diagnostic: Diagnostic::from_lines("sandwich_and_identities", lines, flags),
        instances: instance_count,
        failures,
    })
}

fn run_instance(
    process: &ProcessSpec,
    index: usize,
    seed: u64,
    node_budget: Option<u64>,
) -> Result<(Vec<CheckLine>, Option<serde_json::Value>, u64)> {
    use rand::Rng;
    let mut rng = stream_rng(seed, &[stage::SANDWICH, index as u64]);
    let sample_seed: u64 = rng.gen();
    let dim = 2usize;
    let ell: f64 = if process.is_lattice() {
        2.0 + (index % 3) as f64
    } else {
        1.0 + (index % 2) as f64
    };
    let half = 2.0 * ell + 1.0;
    let window = Window::centered_box(vec![half; dim]);
    let r = process.sample(&window, sample_seed)?;
    let norm = if process.is_lattice() {
        NormParam::l1()
    } else {
        NormParam::l2()
    };

    let mut flags = 0u64;
    let mut lines = Vec::new();

    // sandwich chain P(ℓ) ≤ Â^∞(ℓ) ≤ P(2ℓ)
    let p1 = max_mass_path(
        &r,
        &PathQuery {
            mode: PathMode::FromOrigin { ell },
            restriction: Restriction::None,
            norm,
        },
        node_budget,
    )?;
    let a = max_mass_animal_inf(
        &r,
        &AnimalQuery {
            anchors: Anchors::One { x: vec![0.0; dim] },
            ell,
            q: QValue::Inf,
            restriction: Restriction::None,
            norm,
        },
        node_budget,
    )?;
    let p2 = max_mass_path(
        &r,
        &PathQuery {
            mode: PathMode::FromOrigin { ell: 2.0 * ell },
            restriction: Restriction::None,
            norm,
        },
        node_budget,
    )?;
    flags += [&p1, &a, &p2].iter().filter(|s| !s.proven_optimal).count() as u64;
    lines.push(CheckLine::le(
        format!("i{index}: P(l) <= A_inf(l)"),
        p1.value,
        a.value,
        0.0,
    ));
    lines.push(CheckLine::le(
        format!("i{index}: A_inf(l) <= P(2l)"),
        a.value,
        p2.value,
        0.0,
    ));

    // restriction monotonicity between fixed anchors
    let (x, y) = (vec![-ell / 2.0, 0.0], vec![ell / 2.0, 0.0]);
    let mut restricted = Vec::new();
    for restriction in [
        Restriction::Diamond { delta: 0.4 },
        Restriction::Antidiamond { delta: 0.4 },
        Restriction::None,
    ] {
        let res = max_mass_animal_inf(
            &r,
            &AnimalQuery {
                anchors: Anchors::Two {
                    x: x.clone(),
                    y: y.clone(),
                },
                ell,
                q: QValue::Inf,
                restriction,
                norm,
            },
            node_budget,
        )?;
        flags += (!res.proven_optimal) as u64;
        restricted.push(res.value);
    }
    lines.push(CheckLine::le(
        format!("i{index}: diamond <= antidiamond"),
        restricted[0],
        restricted[1],
        0.0,
    ));
    lines.push(CheckLine::le(
        format!("i{index}: antidiamond <= unrestricted"),
        restricted[1],
        restricted[2],
        0.0,
    ));

    // layer identity on a random vertex subset
    let mut verts = Vec::new();
    for atom in &r.atoms {
        if rng.gen_bool(0.5) {
            verts.push(atom.loc.clone());
        }
    }
    let direct = r.mass_of_vertices(&verts);
    let layered = r.layered_mass_of_vertices(&verts);
    lines.push(CheckLine::le(
        format!("i{index}: layer identity"),
        (direct - layered).abs(),
        0.0,
        1e-12 * (1.0 + direct.abs()),
    ));

    // lattice reduction: exact equality needs every site occupied (absent
    // atoms may still serve as lattice connectors); on sparse realizations
    // only the lattice >= continuum direction is a theorem
    if process.is_lattice() {
        let n = 1 + (index % 4);
        let y_site = vec![(index % 2) as i64, ((index / 2) % 2) as i64];
        let reach = (n + 1) as i64;
        let mut occupied = true;
        'scan: for dx in -reach..=reach {
            for dy in -reach..=reach {
                if dx.abs() + dy.abs() <= reach {
                    let site = vec![dx as f64, dy as f64];
                    if r.window.contains(&site, 1e-9) && r.atom_at(&site).is_none() {
                        occupied = false;
                        break 'scan;
                    }
                }
            }
        }
        if occupied {
            let equal = lattice_reduction_check(&r, &[0, 0], &y_site, n, node_budget)?;
            lines.push(CheckLine::le(
                format!("i{index}: lattice reduction n={n}"),
                if equal { 0.0 } else { 1.0 },
                0.0,
                0.0,
            ));
        } else {
            let sides = lattice_reduction_sides(&r, &y_site, n, node_budget)?;
            lines.push(CheckLine::le(
                format!("i{index}: lattice reduction (sparse, one-sided) n={n}"),
                sides.1,
                sides.0,
                0.0,
            ));
        }
    }

    let failed = lines.iter().any(|l| !l.pass);
    return finish_instance(index, sample_seed, &r, lines, failed, flags);
}

/// `(lattice value at n+1, continuum q = ∞ value at n)` for the one-sided
/// sparse comparison.
fn lattice_reduction_sides(
    r: &MarkedRealization,
    y_site: &[i64],
    n: usize,
    node_budget: Option<u64>,
) -> Result<(f64, f64)> {
    use crate::solvers::lattice_max_animal;
    let anchors = if y_site.iter().all(|&c| c == 0) {
        vec![vec![0, 0]]
    } else {
        vec![vec![0, 0], y_site.to_vec()]
    };
    let lat = lattice_max_animal(r, n + 1, &anchors, node_budget)?;
    let xf = vec![0.0, 0.0];
    let yf: Vec<f64> = y_site.iter().map(|&c| c as f64).collect();
    let cont = max_mass_animal_inf(
        r,
        &AnimalQuery {
            anchors: if xf == yf {
                Anchors::One { x: xf }
            } else {
                Anchors::Two { x: xf, y: yf }
            },
            ell: n as f64,
            q: QValue::Inf,
            restriction: Restriction::None,
            norm: NormParam::l1(),
        },
        node_budget,
    )?;
    Ok((lat.value, cont.value))
}

fn finish_instance(
    index: usize,
    sample_seed: u64,
    r: &MarkedRealization,
    lines: Vec<CheckLine>,
    failed: bool,
    flags: u64,
) -> Result<(Vec<CheckLine>, Option<serde_json::Value>, u64)> {
    let artifact = if failed {
        Some(serde_json::json!({
            "instance": index,
            "sample_seed": sample_seed,
            "realization": serde_json::to_value(r)?,
            "failed_checks": lines
                .iter()
                .filter(|l| !l.pass)
                .map(|l| l.label.clone())
                .collect::<Vec<_>>(),
        }))
    } else {
        None
    };
    Ok((lines, artifact, flags))
}
