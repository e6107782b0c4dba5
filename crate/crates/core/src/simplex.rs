//! Nelder–Mead downhill simplex on fixed-size parameter vectors.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub max_iterations: usize,
    /// Stop once the largest vertex-to-vertex distance drops below this.
    pub diameter_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_iterations: 500,
            diameter_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    /// The diameter criterion was met before the iteration cap.
    pub converged: bool,
}

fn diameter<const N: usize>(vertices: &[[f64; N]]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            let dist = a
                .iter()
                .zip(b)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            d = d.max(dist);
        }
    }
    d
}

fn lerp<const N: usize>(from: &[f64; N], to: &[f64; N], t: f64) -> [f64; N] {
    std::array::from_fn(|k| from[k] + t * (to[k] - from[k]))
}

/// Minimise `f` from `x0` with an axis-aligned initial simplex of edge `step`.
/// NaN objective values are treated as +∞.
pub fn minimize<const N: usize, F>(
    mut f: F,
    x0: [f64; N],
    step: f64,
    opts: &SimplexOptions,
) -> SimplexResult<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut eval = |x: &[f64; N]| {
        let y = f(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };

    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, eval(&x0)));
    for k in 0..N {
        let mut x = x0;
        x[k] += step;
        let y = eval(&x);
        simplex.push((x, y));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let vertices: Vec<[f64; N]> = simplex.iter().map(|v| v.0).collect();
        if diameter(&vertices) < opts.diameter_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let best = simplex[0].1;
        let second_worst = simplex[N - 1].1;
        let (worst_x, worst) = simplex[N];

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for k in 0..N {
                centroid[k] += x[k] / N as f64;
            }
        }

        let reflected = lerp(&centroid, &worst_x, -opts.reflection);
        let fr = eval(&reflected);

        if fr < best {
            let expanded = lerp(&centroid, &reflected, opts.expansion);
            let fe = eval(&expanded);
            simplex[N] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < second_worst {
            simplex[N] = (reflected, fr);
            continue;
        }

        let accepted = if fr < worst {
            let outside = lerp(&centroid, &reflected, opts.contraction);
            let fc = eval(&outside);
            (fc <= fr).then_some((outside, fc))
        } else {
            let inside = lerp(&centroid, &worst_x, opts.contraction);
            let fc = eval(&inside);
            (fc < worst).then_some((inside, fc))
        };

        match accepted {
            Some(v) => simplex[N] = v,
            None => {
                let anchor = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&anchor, &vertex.0, opts.shrink);
                    *vertex = (x, eval(&x));
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex[0];
    SimplexResult {
        x,
        value,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let opts = SimplexOptions {
            max_iterations: 5000,
            ..Default::default()
        };
        let r = minimize(
            |x: &[f64; 3]| {
                (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0 * (x[2] - 2.0).powi(2)
            },
            [0.0, 0.0, 0.0],
            0.5,
            &opts,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8);
        assert!((r.x[1] + 0.5).abs() < 1e-8);
        assert!((r.x[2] - 2.0).abs() < 1e-8);
        assert!(r.value < 1e-15);
    }

    #[test]
    fn rosenbrock() {
        let opts = SimplexOptions {
            max_iterations: 10_000,
            ..Default::default()
        };
        let r = minimize(
            |x: &[f64; 2]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            [-1.2, 1.0],
            0.1,
            &opts,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6, "{:?}", r);
        assert!((r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn retreats_from_infeasible_region() {
        // +∞ outside x > 0 behaves like a wall
        let r = minimize(
            |x: &[f64; 2]| {
                if x[0] <= 0.0 {
                    f64::INFINITY
                } else {
                    x[0] + (x[1] - 3.0).powi(2)
                }
            },
            [2.0, 0.0],
            0.5,
            &SimplexOptions {
                max_iterations: 5000,
                ..Default::default()
            },
        );
        assert!(r.x[0] > 0.0 && r.x[0] < 1e-6);
        assert!((r.x[1] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn nan_is_treated_as_infinite() {
        let r = minimize(
            |x: &[f64; 1]| {
                if x[0] < -1.0 {
                    f64::NAN
                } else {
                    (x[0] + 0.5).powi(2)
                }
            },
            [0.0],
            0.3,
            &SimplexOptions::default(),
        );
        assert!((r.x[0] + 0.5).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let opts = SimplexOptions {
            max_iterations: 3,
            ..Default::default()
        };
        let r = minimize(
            |x: &[f64; 2]| x[0] * x[0] + x[1] * x[1],
            [5.0, 5.0],
            1.0,
            &opts,
        );
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
    }
}
