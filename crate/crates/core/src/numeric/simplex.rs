/// Nelder–Mead minimisation of `f` from `x0` with initial step `step`.
///
/// Stops after `max_evals` evaluations or when the simplex values agree to
/// within `ftol`. Returns the best point and its value.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, ftol: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let m = x0.len();
    if m == 0 {
        let v = f(x0);
        return (Vec::new(), v);
    }
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..m {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = m + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=m).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[m] - vals[0]).abs() <= ftol {
            break;
        }
        let centroid: Vec<f64> = (0..m).map(|k| pts[..m].iter().map(|p| p[k]).sum::<f64>() / m as f64).collect();
        let toward = |w: f64| -> Vec<f64> { centroid.iter().zip(&pts[m]).map(|(c, w0)| c + w * (c - w0)).collect() };
        let xr = toward(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = toward(2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[m] = xe;
                vals[m] = fe;
            } else {
                pts[m] = xr;
                vals[m] = fr;
            }
        } else if fr < vals[m - 1] {
            pts[m] = xr;
            vals[m] = fr;
        } else {
            let xc = if fr < vals[m] { toward(0.5) } else { toward(-0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < vals[m].min(fr) {
                pts[m] = xc;
                vals[m] = fc;
            } else {
                // Shrink towards the best vertex.
                for i in 1..=m {
                    let p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, p)| b + 0.5 * (p - b)).collect();
                    vals[i] = f(&p);
                    pts[i] = p;
                }
                evals += m;
            }
        }
    }
    let best = (0..=m).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (pts[best].clone(), vals[best])
}
