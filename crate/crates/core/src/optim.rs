//! Derivative-free minimisation used by the intensity estimators.
//!
//! A plain Nelder–Mead simplex with the standard coefficients
//! (reflection 1, expansion 2, contraction 0.5, shrink 0.5). Convergence is
//! declared when the simplex diameter (max pairwise ∞-norm distance of the
//! vertices) falls below the tolerance.

use rand::Rng;

pub(crate) struct NelderMead {
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct NmOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64], steps: &[f64]) -> NmOutcome {
        let dim = x0.len();
        assert!(dim >= 1 && steps.len() == dim);

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((x0.to_vec(), f(x0)));
        for i in 0..dim {
            let mut v = x0.to_vec();
            let step = if steps[i] != 0.0 {
                steps[i]
            } else {
                1e-3 * (1.0 + x0[i].abs())
            };
            v[i] += step;
            let fv = f(&v);
            simplex.push((v, fv));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            if simplex_diameter(&simplex) < self.tol {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let best_f = simplex[0].1;
            let second_worst_f = simplex[dim - 1].1;

            let point_at = |coef: f64| -> Vec<f64> {
                (0..dim)
                    .map(|j| centroid[j] + coef * (centroid[j] - worst.0[j]))
                    .collect()
            };

            let reflected = point_at(1.0);
            let f_reflected = f(&reflected);

            if f_reflected < best_f {
                let expanded = point_at(2.0);
                let f_expanded = f(&expanded);
                simplex[dim] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
            } else if f_reflected < second_worst_f {
                simplex[dim] = (reflected, f_reflected);
            } else {
                let (contracted, f_contracted) = if f_reflected < worst.1 {
                    let p = point_at(0.5);
                    let fp = f(&p);
                    (p, fp)
                } else {
                    let p = point_at(-0.5);
                    let fp = f(&p);
                    (p, fp)
                };
                if f_contracted < worst.1.min(f_reflected) {
                    simplex[dim] = (contracted, f_contracted);
                } else {
                    // Shrink toward the best vertex.
                    let best = simplex[0].0.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        for j in 0..dim {
                            entry.0[j] = best[j] + 0.5 * (entry.0[j] - best[j]);
                        }
                        entry.1 = f(&entry.0);
                    }
                }
            }
        }

        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, _) = simplex.swap_remove(0);
        NmOutcome {
            x,
            iterations,
            converged,
        }
    }
}

fn simplex_diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in (i + 1)..simplex.len() {
            let dist = simplex[i]
                .0
                .iter()
                .zip(&simplex[j].0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            d = d.max(dist);
        }
    }
    d
}

/// `n` Latin-hypercube samples over the axis-aligned box `bounds`
/// (one uniform draw per stratum, strata shuffled per axis).
pub(crate) fn latin_hypercube<R: Rng>(
    rng: &mut R,
    n: usize,
    bounds: &[(f64, f64)],
) -> Vec<Vec<f64>> {
    let dim = bounds.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for &(lo, hi) in bounds {
        let mut strata: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            strata.swap(i, j);
        }
        let width = (hi - lo) / n as f64;
        let column = strata
            .into_iter()
            .map(|s| lo + width * (s as f64 + rng.random::<f64>()))
            .collect();
        columns.push(column);
    }
    (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimizes_quadratic_bowl() {
        let nm = NelderMead {
            tol: 1e-10,
            max_iters: 2000,
        };
        let out = nm.minimize(
            |x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.5).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
        );
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-6);
        assert!((out.x[1] + 1.5).abs() < 1e-6);
    }

    #[test]
    fn minimizes_rosenbrock_2d() {
        let nm = NelderMead {
            tol: 1e-12,
            max_iters: 5000,
        };
        let out = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
        );
        assert!((out.x[0] - 1.0).abs() < 1e-4, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn reports_non_convergence_when_budget_exhausted() {
        let nm = NelderMead {
            tol: 1e-16,
            max_iters: 3,
        };
        let out = nm.minimize(|x| x[0] * x[0], &[5.0], &[1.0]);
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn latin_hypercube_covers_strata() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples = latin_hypercube(&mut rng, 8, &[(0.0, 8.0), (-4.0, 4.0)]);
        assert_eq!(samples.len(), 8);
        for axis in 0..2 {
            let (lo, hi) = [(0.0, 8.0), (-4.0, 4.0)][axis];
            let mut seen = vec![false; 8];
            for s in &samples {
                assert!(s[axis] >= lo && s[axis] <= hi);
                let stratum = (((s[axis] - lo) / (hi - lo) * 8.0) as usize).min(7);
                seen[stratum] = true;
            }
            assert!(seen.iter().all(|&b| b), "stratum missed on axis {axis}");
        }
    }
}
