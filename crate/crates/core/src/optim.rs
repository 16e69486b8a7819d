//! Derivative-free 1-D and low-D minimizers used by the jammer searches.

/// Golden-section minimization on `[lo, hi]`. Returns `(argmin, min)` and
/// the trace of best-so-far values (non-increasing).
pub(crate) fn golden_section<F: FnMut(f64) -> f64>(
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
    mut f: F,
) -> (f64, f64, Vec<f64>) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut trace = Vec::new();
    if (b - a).abs() < f64::EPSILON {
        let v = f(a);
        return (a, v, vec![v]);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // keep the interval endpoints in the candidate set
    let fa = f(a);
    let fb = f(b);
    let mut best = (a, fa);
    for (x, v) in [(b, fb), (c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    trace.push(best.1);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < max_iter {
        if fc < fd {
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
        trace.push(best.1);
        iter += 1;
    }
    (best.0, best.1, trace)
}

/// Nelder-Mead on a box: coordinates are clamped to `[lo_i, hi_i]` before
/// evaluation. Returns `(argmin, min, best-so-far trace)`.
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    start: &[f64],
    step: &[f64],
    bounds: &[(f64, f64)],
    tol: f64,
    max_iter: usize,
    mut f: F,
) -> (Vec<f64>, f64, Vec<f64>) {
    let n = start.len();
    assert!(n >= 1 && step.len() == n && bounds.len() == n);
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..n {
            x[i] = x[i].clamp(bounds[i].0, bounds[i].1);
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    let v0 = f(&x0);
    simplex.push((x0, v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step[i];
        clamp(&mut x);
        let v = f(&x);
        simplex.push((x, v));
    }
    let mut trace = vec![simplex
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min)];

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        trace.push(simplex[0].1);
        if spread.abs() < tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let mut refl: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n].0[i]))
            .collect();
        clamp(&mut refl);
        let f_refl = f(&refl);
        if f_refl < simplex[0].1 {
            let mut exp: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (refl[i] - centroid[i]))
                .collect();
            clamp(&mut exp);
            let f_exp = f(&exp);
            simplex[n] = if f_exp < f_refl {
                (exp, f_exp)
            } else {
                (refl, f_refl)
            };
            continue;
        }
        if f_refl < simplex[n - 1].1 {
            simplex[n] = (refl, f_refl);
            continue;
        }
        let mut contr: Vec<f64> = (0..n)
            .map(|i| centroid[i] + rho * (simplex[n].0[i] - centroid[i]))
            .collect();
        clamp(&mut contr);
        let f_contr = f(&contr);
        if f_contr < simplex[n].1 {
            simplex[n] = (contr, f_contr);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0.clone();
        for k in 1..=n {
            let mut x: Vec<f64> = (0..n)
                .map(|i| best[i] + sigma * (simplex[k].0[i] - best[i]))
                .collect();
            clamp(&mut x);
            let v = f(&x);
            simplex[k] = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    trace.push(simplex[0].1);
    let mut best_so_far = f64::INFINITY;
    for v in trace.iter_mut() {
        best_so_far = best_so_far.min(*v);
        *v = best_so_far;
    }
    (simplex[0].0.clone(), simplex[0].1, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v, trace) = golden_section(-1.0, 3.0, 1e-10, 200, |x| (x - 1.3) * (x - 1.3));
        assert!((x - 1.3).abs() < 1e-8);
        assert!(v < 1e-15);
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn golden_respects_boundary_minimum() {
        let (x, _, _) = golden_section(0.0, 2.0, 1e-10, 200, |x| -x);
        assert!((x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn nelder_mead_quadratic_bowl() {
        let (x, v, _) = nelder_mead(
            &[0.2, 0.8],
            &[0.3, 0.3],
            &[(0.0, 2.0), (0.0, 2.0)],
            1e-12,
            400,
            |p| (p[0] - 1.0).powi(2) + (p[1] - 0.5).powi(2),
        );
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 0.5).abs() < 1e-5);
        assert!(v < 1e-9);
    }
}
