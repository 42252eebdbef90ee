//! Derivative-free Nelder-Mead simplex minimization.

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop when the spread of simplex values drops below this.
    pub f_tol: f64,
    /// ... and the simplex diameter below this.
    pub x_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { max_evals: 20_000, f_tol: 1e-12, x_tol: 1e-9, initial_step: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut evals = n + 1;
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut converged = false;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread.abs() <= self.f_tol && diameter <= self.x_tol {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..n).map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect()
            };

            let xr = along(-alpha);
            let fr = f(&xr);
            evals += 1;
            if fr < values[0] {
                let xe = along(-gamma);
                let fe = f(&xe);
                evals += 1;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let x = along(-rho);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(rho);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                let s: Vec<f64> = simplex[i].iter().zip(&simplex[0]).map(|(x, b)| b + sigma * (x - b)).collect();
                values[i] = f(&s);
                simplex[i] = s;
                evals += 1;
            }
        }
        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        Minimum { x: simplex[best].clone(), value: values[best], evals, converged }
    }
}
