//! Derivative-free minimizers used by the smoothing-parameter search and
//! the benchmark fits: Nelder-Mead simplex and golden-section line search.
//! Both are deterministic given their starting points.

/// Result of a simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead with standard coefficients (reflect 1, expand 2,
/// contract 0.5, shrink 0.5). Stops when the simplex value spread falls
/// under `tol` or `max_eval` evaluations are spent.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    initial_step: f64,
    tol: f64,
    max_eval: usize,
) -> SimplexResult {
    let n = start.len();
    assert!(n >= 1, "simplex needs at least one dimension");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // initial simplex: start plus one step along each axis
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    points.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += initial_step;
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| eval(p, &mut evals)).collect();

    let mut converged = false;
    while evals < max_eval {
        // order the simplex
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if (values[worst] - values[best]).abs() <= tol * (values[best].abs() + tol) {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, p) in centroid.iter_mut().zip(points[i].iter()) {
                *c += p / n as f64;
            }
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b.iter()).map(|(x, y)| x + t * (y - x)).collect()
        };

        // reflection
        let reflected = blend(&centroid, &points[worst], -1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < values[best] {
            // expansion
            let expanded = blend(&centroid, &points[worst], -2.0);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                points[worst] = expanded;
                values[worst] = fe;
            } else {
                points[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            points[worst] = reflected;
            values[worst] = fr;
        } else {
            // contraction (outside if reflection helped, inside otherwise)
            let (candidate, fc) = if fr < values[worst] {
                let c = blend(&centroid, &points[worst], -0.5);
                let v = eval(&c, &mut evals);
                (c, v)
            } else {
                let c = blend(&centroid, &points[worst], 0.5);
                let v = eval(&c, &mut evals);
                (c, v)
            };
            if fc < values[worst].min(fr) {
                points[worst] = candidate;
                values[worst] = fc;
            } else {
                // shrink toward the best point
                let best_point = points[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    points[i] = blend(&best_point, &points[i], 0.5);
                    values[i] = eval(&points[i], &mut evals);
                }
            }
        }
    }

    let (argmin, &value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    SimplexResult { x: points[argmin].clone(), value, evaluations: evals, converged }
}

/// Golden-section minimization on `[lo, hi]`; returns the bracketing
/// midpoint once the interval shrinks below `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}
