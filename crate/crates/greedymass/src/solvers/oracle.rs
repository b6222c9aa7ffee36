use super::{passes_restriction, sum_masses, Anchors, AnimalQuery, PathMode, PathQuery, QValue, Restriction};
use crate::error::{Error, Result};
use crate::geometry::mst_length;
use crate::pointproc::MarkedRealization;

const PATH_ORACLE_CAP: usize = 8;
const ANIMAL_ORACLE_CAP: usize = 12;

/// Exhaustive enumeration over ordered atom subsets. Test oracle only;
/// refuses pools larger than 8 atoms.
pub fn brute_force_path_oracle(r: &MarkedRealization, q: &PathQuery) -> Result<f64> {
    let norm = q.validate(r.dim())?;
    let (start, end, ell) = match &q.mode {
        PathMode::FromOrigin { ell } => (vec![0.0; r.dim()], None, *ell),
        PathMode::TwoPoint { x, y, ell } => (x.clone(), Some(y.clone()), *ell),
    };
    if let Some(y) = &end {
        if norm.dist(&start, y) > ell {
            return Ok(0.0);
        }
    }
    let (rx, ry) = match &q.mode {
        PathMode::TwoPoint { x, y, .. } => (x.clone(), y.clone()),
        PathMode::FromOrigin { .. } => (start.clone(), start.clone()),
    };
    let mut base: Vec<usize> = Vec::new();
    if let Some(i) = r.atom_at(&start) {
        base.push(i);
    }
    if let Some(y) = &end {
        if let Some(i) = r.atom_at(y) {
            if !base.contains(&i) {
                base.push(i);
            }
        }
    }
    let pool: Vec<usize> = (0..r.atoms.len())
        .filter(|i| !base.contains(i))
        .filter(|&i| {
            matches!(q.restriction, Restriction::None)
                || passes_restriction(&q.restriction, &rx, &ry, &r.atoms[i].loc)
        })
        .collect();
    if pool.len() > PATH_ORACLE_CAP {
        return Err(Error::SizeCap(format!(
            "path oracle handles at most {PATH_ORACLE_CAP} atoms, got {}",
            pool.len()
        )));
    }
    base.sort_unstable();
    let base_mass = sum_masses(r, &base);

    // recursive enumeration of all ordered subsets
    fn rec(
        r: &MarkedRealization,
        pool: &[usize],
        norm: &crate::geometry::NormSpec,
        cur: &[f64],
        end: Option<&[f64]>,
        used: f64,
        ell: f64,
        chosen: &mut Vec<usize>,
        best: &mut f64,
        base_mass: f64,
    ) {
        // every prefix that can still close is a candidate
        let closing = match end {
            Some(y) => used + norm.dist(cur, y) <= ell,
            None => used <= ell,
        };
        if closing {
            let mut idx = chosen.clone();
            idx.sort_unstable();
            let v = base_mass + sum_masses(r, &idx);
            if v > *best {
                *best = v;
            }
        }
        for &a in pool {
            if chosen.contains(&a) {
                continue;
            }
            let leg = norm.dist(cur, &r.atoms[a].loc);
            if used + leg > ell {
                continue;
            }
            chosen.push(a);
            rec(
                r,
                pool,
                norm,
                &r.atoms[a].loc,
                end,
                used + leg,
                ell,
                chosen,
                best,
                base_mass,
            );
            chosen.pop();
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut chosen = Vec::new();
    rec(
        r,
        &pool,
        &norm,
        &start,
        end.as_deref(),
        0.0,
        ell,
        &mut chosen,
        &mut best,
        base_mass,
    );
    Ok(best.max(0.0))
}

/// Exhaustive enumeration over atom subsets with exact MST cost. Test
/// oracle only; refuses pools larger than 12 atoms.
pub fn brute_force_animal_oracle(r: &MarkedRealization, q: &AnimalQuery) -> Result<f64> {
    let norm = q.validate(r.dim())?;
    if q.q != QValue::Inf {
        return Err(Error::Unsupported("animal oracle covers q = inf only".into()));
    }
    let (x, y) = match &q.anchors {
        Anchors::One { x } => (x.clone(), None),
        Anchors::Two { x, y } => (x.clone(), Some(y.clone())),
    };
    let pool: Vec<usize> = (0..r.atoms.len())
        .filter(|&i| {
            matches!(q.restriction, Restriction::None)
                || passes_restriction(
                    &q.restriction,
                    &x,
                    y.as_ref().expect("validated"),
                    &r.atoms[i].loc,
                )
        })
        .collect();
    if pool.len() > ANIMAL_ORACLE_CAP {
        return Err(Error::SizeCap(format!(
            "animal oracle handles at most {ANIMAL_ORACLE_CAP} atoms, got {}",
            pool.len()
        )));
    }
    let mut best = 0.0f64; // empty set is feasible with value 0
    for mask in 0u32..(1u32 << pool.len()) {
        let subset: Vec<usize> = (0..pool.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| pool[k])
            .collect();
        if subset.is_empty() {
            continue;
        }
        let points: Vec<Vec<f64>> = subset.iter().map(|&i| r.atoms[i].loc.clone()).collect();
        let mut cost = mst_length(&points, &norm)?;
        cost += points
            .iter()
            .map(|p| norm.dist(&x, p))
            .fold(f64::INFINITY, f64::min);
        if let Some(y) = &y {
            cost += points
                .iter()
                .map(|p| norm.dist(y, p))
                .fold(f64::INFINITY, f64::min);
        }
        if cost <= q.ell {
            let mut idx = subset.clone();
            idx.sort_unstable();
            let v = sum_masses(r, &idx);
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{Atom, Window};
    use crate::solvers::{max_mass_animal_inf, max_mass_path, NormParam};
    use rand::Rng;

    fn random_realization(
        rng: &mut impl Rng,
        n: usize,
        spread: f64,
        half: f64,
    ) -> MarkedRealization {
        let atoms = (0..n)
            .map(|_| Atom {
                loc: vec![
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-spread..spread),
                ],
                // dyadic masses make sums exact
                mass: (rng.gen_range(1..=512) as f64) / 64.0,
            })
            .collect();
        MarkedRealization::new(atoms, Window::centered_box(vec![half, half]), false).unwrap()
    }

    #[test]
    fn oracle_trivial_cases() {
        let r = MarkedRealization::empty(Window::centered_box(vec![10.0, 10.0])).unwrap();
        let q = PathQuery {
            mode: PathMode::FromOrigin { ell: 2.0 },
            restriction: Restriction::None,
            norm: NormParam::l2(),
        };
        assert_eq!(brute_force_path_oracle(&r, &q).unwrap(), 0.0);
    }

    #[test]
    fn oracle_rejects_large_pools() {
        let mut rng = crate::rng::stream_rng(31, &[9]);
        let r = random_realization(&mut rng, 20, 2.0, 50.0);
        let q = PathQuery {
            mode: PathMode::FromOrigin { ell: 2.0 },
            restriction: Restriction::None,
            norm: NormParam::l2(),
        };
        assert!(brute_force_path_oracle(&r, &q).is_err());
    }

    /// The defining property: solver equals oracle on randomized suites.
    #[test]
    fn solver_matches_path_oracle() {
        let mut rng = crate::rng::stream_rng(31, &[1]);
        for case in 0..120 {
            let n = rng.gen_range(0..=8usize);
            let r = random_realization(&mut rng, n, 2.0, 60.0);
            let two_point = rng.gen_bool(0.5);
            let q = if two_point {
                PathQuery {
                    mode: PathMode::TwoPoint {
                        x: vec![-1.0, 0.0],
                        y: vec![1.0, 0.0],
                        ell: rng.gen_range(2.0..7.0),
                    },
                    restriction: Restriction::None,
                    norm: NormParam::l2(),
                }
            } else {
                PathQuery {
                    mode: PathMode::FromOrigin {
                        ell: rng.gen_range(0.5..6.0),
                    },
                    restriction: Restriction::None,
                    norm: NormParam::l2(),
                }
            };
            let solver = max_mass_path(&r, &q, None).unwrap();
            let oracle = brute_force_path_oracle(&r, &q).unwrap();
            assert_eq!(solver.value, oracle, "case {case}");
        }
    }

    #[test]
    fn solver_matches_animal_oracle() {
        let mut rng = crate::rng::stream_rng(31, &[2]);
        for case in 0..60 {
            let n = rng.gen_range(0..=10usize);
            let r = random_realization(&mut rng, n, 2.0, 60.0);
            let q = AnimalQuery {
                anchors: if rng.gen_bool(0.5) {
                    Anchors::One { x: vec![0.0, 0.0] }
                } else {
                    Anchors::Two {
                        x: vec![-1.0, 0.0],
                        y: vec![1.0, 0.0],
                    }
                },
                ell: rng.gen_range(1.0..7.0),
                q: QValue::Inf,
                restriction: Restriction::None,
                norm: NormParam::l2(),
            };
            let solver = max_mass_animal_inf(&r, &q, None).unwrap();
            let oracle = brute_force_animal_oracle(&r, &q).unwrap();
            assert_eq!(solver.value, oracle, "case {case}");
        }
    }

    #[test]
    fn restricted_queries_match_oracle_and_are_monotone() {
        let mut rng = crate::rng::stream_rng(31, &[3]);
        for case in 0..60 {
            let n = rng.gen_range(0..=8usize);
            let r = random_realization(&mut rng, n, 2.0, 60.0);
            let (x, y) = (vec![-1.5, 0.0], vec![1.5, 0.0]);
            let ell = rng.gen_range(3.5..8.0);
            let delta = rng.gen_range(0.1..0.9);
            let mut values = Vec::new();
            for restriction in [
                Restriction::Diamond { delta },
                Restriction::Antidiamond { delta },
                Restriction::None,
            ] {
                let q = PathQuery {
                    mode: PathMode::TwoPoint {
                        x: x.clone(),
                        y: y.clone(),
                        ell,
                    },
                    restriction,
                    norm: NormParam::l2(),
                };
                let solver = max_mass_path(&r, &q, None).unwrap();
                let oracle = brute_force_path_oracle(&r, &q).unwrap();
                assert_eq!(solver.value, oracle, "case {case}");
                values.push(solver.value);
            }
            // diamond <= antidiamond <= unrestricted
            assert!(values[0] <= values[1] && values[1] <= values[2], "case {case}");
        }
    }
}
