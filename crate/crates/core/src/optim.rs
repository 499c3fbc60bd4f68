//! Derivative-free Nelder-Mead simplex minimiser.
//!
//! Deterministic by construction: fixed initial simplex (one vertex per
//! coordinate offset by `step`), fixed reflection/expansion/contraction
//! coefficients, no randomness. The fitting code relies on this so that
//! identical inputs always produce identical coefficients.

pub(crate) struct SimplexResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub converged: bool,
}

/// Minimises `f` starting from `init`, stopping when the value spread across
/// the simplex drops below `tol` or after `max_evals` function evaluations.
pub(crate) fn nelder_mead<F>(
    mut f: F,
    init: &[f64],
    step: f64,
    tol: f64,
    max_evals: usize,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = init.len();
    if dim == 0 {
        let v = f(init);
        return SimplexResult {
            best: Vec::new(),
            best_value: v,
            converged: true,
        };
    }

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    // Initial simplex: init plus one vertex per coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = init.to_vec();
    let f0 = eval(&v0, &mut evals);
    simplex.push((v0, f0));
    for i in 0..dim {
        let mut v = init.to_vec();
        v[i] += step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() < tol {
            converged = true;
            break;
        }

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let worst = simplex[dim].clone();
        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_r = eval(&reflected, &mut evals);

        if f_r < simplex[0].1 {
            // Try to expand further along the same direction.
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let f_e = eval(&expanded, &mut evals);
            simplex[dim] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
        } else if f_r < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_r);
        } else {
            // Contract toward the centroid from whichever of worst/reflected
            // is better.
            let (base, f_base) = if f_r < worst.1 {
                (&reflected, f_r)
            } else {
                (&worst.0, worst.1)
            };
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(base)
                .map(|(c, b)| c + rho * (b - c))
                .collect();
            let f_c = eval(&contracted, &mut evals);
            if f_c < f_base {
                simplex[dim] = (contracted, f_c);
            } else {
                // Shrink everything toward the current best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, x)| b + sigma * (x - b))
                        .collect();
                    let f_s = eval(&shrunk, &mut evals);
                    *entry = (shrunk, f_s);
                    if evals >= max_evals {
                        break;
                    }
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    SimplexResult {
        best: simplex[0].0.clone(),
        best_value: simplex[0].1,
        converged,
    }
}
