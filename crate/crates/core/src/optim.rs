//! Small derivative-free minimisers used by the fitting and ansatz code.

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Stops after `max_evals` function evaluations or once the bracket is
/// narrower than `tol`. Returns `(x, f(x))` for the best point evaluated.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_evals: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    while evals < max_evals && (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
        evals += 1;
    }
    best
}

/// Box-constrained Nelder–Mead. Points are clamped into `[lo_i, hi_i]`
/// before every evaluation.
pub struct NelderMead {
    pub max_iters: usize,
    /// Converged when the spread of simplex values and its diameter drop
    /// below these.
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            f_tol: 1e-28,
            x_tol: 1e-12,
        }
    }
}

impl NelderMead {
    /// Minimise `f` from `start` with initial edge lengths `step`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        start: &[f64],
        step: &[f64],
        lo: &[f64],
        hi: &[f64],
    ) -> (Vec<f64>, f64) {
        let dim = start.len();
        let clamp = |x: &mut Vec<f64>| {
            for i in 0..dim {
                x[i] = x[i].clamp(lo[i], hi[i]);
            }
        };
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        let mut x0 = start.to_vec();
        clamp(&mut x0);
        simplex.push(x0.clone());
        for i in 0..dim {
            let mut x = x0.clone();
            // Step inward if the vertex would land outside the box.
            x[i] = if x[i] + step[i] <= hi[i] {
                x[i] + step[i]
            } else {
                x[i] - step[i]
            };
            clamp(&mut x);
            simplex.push(x);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

        for _ in 0..self.max_iters {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[dim] - values[0];
            let diameter = simplex[1..]
                .iter()
                .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread.abs() <= self.f_tol || diameter <= self.x_tol {
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|x| x[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                let mut x: Vec<f64> = (0..dim)
                    .map(|j| centroid[j] + t * (simplex[dim][j] - centroid[j]))
                    .collect();
                clamp(&mut x);
                x
            };

            let xr = along(-1.0);
            let fr = f(&xr);
            if fr < values[0] {
                let xe = along(-2.0);
                let fe = f(&xe);
                if fe < fr {
                    simplex[dim] = xe;
                    values[dim] = fe;
                } else {
                    simplex[dim] = xr;
                    values[dim] = fr;
                }
            } else if fr < values[dim - 1] {
                simplex[dim] = xr;
                values[dim] = fr;
            } else {
                let (xc, fc) = if fr < values[dim] {
                    let x = along(-0.5);
                    let v = f(&x);
                    (x, v)
                } else {
                    let x = along(0.5);
                    let v = f(&x);
                    (x, v)
                };
                if fc < values[dim].min(fr) {
                    simplex[dim] = xc;
                    values[dim] = fc;
                } else {
                    for i in 1..=dim {
                        let mut x: Vec<f64> = (0..dim)
                            .map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]))
                            .collect();
                        clamp(&mut x);
                        values[i] = f(&x);
                        simplex[i] = x;
                    }
                }
            }
        }
        let best = (0..=dim)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("non-empty simplex");
        (simplex[best].clone(), values[best])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_respects_eval_cap() {
        let mut n = 0;
        golden_section(
            |x| {
                n += 1;
                x * x
            },
            -1.0,
            1.0,
            0.0,
            50,
        );
        assert_eq!(n, 50);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let nm = NelderMead {
            max_iters: 5000,
            ..Default::default()
        };
        let (x, fx) = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &[-5.0, -5.0],
            &[5.0, 5.0],
        );
        assert!(fx < 1e-12, "{fx}");
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_stays_in_box() {
        let (x, _) = NelderMead::default().minimize(
            |x| (x[0] - 10.0).powi(2),
            &[0.0],
            &[0.5],
            &[-1.0],
            &[1.0],
        );
        assert!((x[0] - 1.0).abs() < 1e-9);
    }
}
