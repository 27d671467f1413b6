//! Slow, independent reference computations.
//!
//! Nothing here shares code with `covest-core`; each routine is the
//! textbook method, written for clarity over speed, so that tests can check
//! the fast paths against a second route.

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for sweep in 0..200 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += m[i][j] * m[i][j];
                if i != j {
                    off += m[i][j] * m[i][j];
                }
            }
        }
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) || (sweep > 0 && off == 0.0) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Largest absolute eigenvalue via [`jacobi_eigenvalues`].
pub fn spectral_radius(a: &[Vec<f64>]) -> f64 {
    jacobi_eigenvalues(a)
        .into_iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Exact minimum-norm point of the convex hull of `points`, by enumerating
/// every face spanned by at most `max_support` points and solving the
/// equality-constrained least-squares problem on its affine hull.
///
/// Returns `(squared norm, weights)`.
pub fn min_norm_point_by_faces(points: &[Vec<f64>], max_support: usize) -> (f64, Vec<f64>) {
    let m = points.len();
    let mut best = (f64::INFINITY, vec![0.0; m]);
    let mut subset = Vec::new();
    enumerate_subsets(m, max_support.min(m), 0, &mut subset, &mut |s| {
        if let Some(w) = solve_face(points, s) {
            let v = combine(points, s, &w);
            let nsq: f64 = v.iter().map(|x| x * x).sum();
            if nsq < best.0 {
                let mut full = vec![0.0; m];
                for (k, &i) in s.iter().enumerate() {
                    full[i] = w[k];
                }
                best = (nsq, full);
            }
        }
    });
    best
}

fn enumerate_subsets(
    m: usize,
    max: usize,
    start: usize,
    cur: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if !cur.is_empty() {
        f(cur);
    }
    if cur.len() == max {
        return;
    }
    for i in start..m {
        cur.push(i);
        enumerate_subsets(m, max, i + 1, cur, f);
        cur.pop();
    }
}

fn combine(points: &[Vec<f64>], s: &[usize], w: &[f64]) -> Vec<f64> {
    let d = points[0].len();
    let mut v = vec![0.0; d];
    for (k, &i) in s.iter().enumerate() {
        for t in 0..d {
            v[t] += w[k] * points[i][t];
        }
    }
    v
}

// Minimize |sum w_i p_i|^2 subject to sum w_i = 1 on the face; keep only
// relative-interior solutions (all weights >= 0).
fn solve_face(points: &[Vec<f64>], s: &[usize]) -> Option<Vec<f64>> {
    let k = s.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let dim = k + 1;
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for r in 0..k {
        for c in 0..k {
            a[r][c] = points[s[r]]
                .iter()
                .zip(&points[s[c]])
                .map(|(x, y)| x * y)
                .sum();
        }
        a[r][k] = 1.0;
        a[k][r] = 1.0;
    }
    a[k][dim] = 1.0;
    // Gaussian elimination with partial pivoting.
    for col in 0..dim {
        let piv = (col..dim).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..dim {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=dim {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let w: Vec<f64> = (0..k).map(|r| a[r][dim] / a[r][r]).collect();
    if w.iter().all(|&x| x >= -1e-12) {
        Some(w)
    } else {
        None
    }
}

/// Probability that `draws` uniform draws from `n` coupons hit every coupon
/// with each count inside `[lo, hi]`.
///
/// Poissonized dynamic program: with i.i.d. Poisson(draws/n) counts the
/// multinomial law is recovered by conditioning on the total.
pub fn multinomial_counts_within(n: usize, draws: usize, lo: usize, hi: usize) -> f64 {
    let mean = draws as f64 / n as f64;
    let hi = hi.min(draws);
    let pois = |k: usize| -> f64 {
        let lk = k as f64 * mean.ln() - mean - ln_factorial(k);
        lk.exp()
    };
    let weights: Vec<f64> = (0..=hi).map(|k| if k >= lo { pois(k) } else { 0.0 }).collect();
    let mut dp = vec![0.0; draws + 1];
    dp[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; draws + 1];
        for (t, &p) in dp.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (k, &w) in weights.iter().enumerate() {
                if t + k > draws {
                    break;
                }
                next[t + k] += p * w;
            }
        }
        dp = next;
    }
    let total = draws as f64;
    let p_total = (total * total.ln() - total - ln_factorial(draws)).exp();
    dp[draws] / p_total
}

/// `P(some coupon is missed)` after `draws` uniform draws from `n` coupons.
pub fn missing_coupon_probability(n: usize, draws: usize) -> f64 {
    1.0 - multinomial_counts_within(n, draws, 1, draws)
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Largest distance from a grid point of the unit circle to the nearest
/// point of `net` (points given as `[cos, sin]`-style pairs).
pub fn circle_covering_radius(net: &[[f64; 2]], resolution: f64) -> f64 {
    let steps = (std::f64::consts::TAU / resolution).ceil() as usize;
    let mut worst: f64 = 0.0;
    for s in 0..steps {
        let t = s as f64 * std::f64::consts::TAU / steps as f64;
        let (y, x) = t.sin_cos();
        let d = net
            .iter()
            .map(|p| ((p[0] - x).powi(2) + (p[1] - y).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    worst
}

/// Ordinary least squares slope and intercept of `y` against `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
