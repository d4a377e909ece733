//! Brute-force reference implementations used only by tests.
//!
//! The warp oracle fits the backward *position* map directly (values are
//! source coordinates at the destination centers) with a plain
//! partial-pivoting Gaussian elimination on `Vec<Vec<f64>>`, then resamples
//! with a scalar bilinear loop. It shares no code with the library.

#![allow(dead_code)]

/// Solves `m x = rhs` in place by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        assert!(m[col][col].abs() > 1e-300, "oracle system is singular");
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            let (top, bottom) = m.split_at_mut(r);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= factor * src;
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    x
}

fn tps(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

/// Thin-plate position map fitted through `(centers[i] -> values[i])`,
/// each coordinate solved as a separate system.
pub struct OracleSpline {
    centers: Vec<(f64, f64)>,
    coef_t: Vec<f64>,
    coef_f: Vec<f64>,
}

impl OracleSpline {
    pub fn fit(centers: &[(f64, f64)], values: &[(f64, f64)]) -> Self {
        let n = centers.len();
        let mut m = vec![vec![0.0; n + 3]; n + 3];
        for i in 0..n {
            for j in 0..n {
                let (dt, df) = (centers[i].0 - centers[j].0, centers[i].1 - centers[j].1);
                m[i][j] = tps((dt * dt + df * df).sqrt());
            }
            m[i][n] = 1.0;
            m[i][n + 1] = centers[i].0;
            m[i][n + 2] = centers[i].1;
            m[n][i] = 1.0;
            m[n + 1][i] = centers[i].0;
            m[n + 2][i] = centers[i].1;
        }
        let mut rhs_t = vec![0.0; n + 3];
        let mut rhs_f = vec![0.0; n + 3];
        for i in 0..n {
            rhs_t[i] = values[i].0;
            rhs_f[i] = values[i].1;
        }
        Self {
            centers: centers.to_vec(),
            coef_t: gauss_solve(m.clone(), rhs_t),
            coef_f: gauss_solve(m, rhs_f),
        }
    }

    pub fn eval(&self, t: f64, f: f64) -> (f64, f64) {
        let n = self.centers.len();
        let mut out_t = self.coef_t[n] + self.coef_t[n + 1] * t + self.coef_t[n + 2] * f;
        let mut out_f = self.coef_f[n] + self.coef_f[n + 1] * t + self.coef_f[n + 2] * f;
        for (i, &(ct, cf)) in self.centers.iter().enumerate() {
            let phi = tps(((t - ct).powi(2) + (f - cf).powi(2)).sqrt());
            out_t += self.coef_t[i] * phi;
            out_f += self.coef_f[i] * phi;
        }
        (out_t, out_f)
    }
}

/// Scalar bilinear lookup on a channel-major `nu x tau` image with the
/// query clamped into the image rectangle.
pub fn bilinear(img: &[f32], nu: usize, tau: usize, t: f64, f: f64) -> f64 {
    let t = t.max(0.0).min((tau - 1) as f64);
    let f = f.max(0.0).min((nu - 1) as f64);
    let ti = t.floor() as usize;
    let fi = f.floor() as usize;
    let tn = if ti + 1 < tau { ti + 1 } else { ti };
    let fn_ = if fi + 1 < nu { fi + 1 } else { fi };
    let wt = t - ti as f64;
    let wf = f - fi as f64;
    let px = |ff: usize, tt: usize| img[ff * tau + tt] as f64;
    px(fi, ti) * (1.0 - wt) * (1.0 - wf)
        + px(fi, tn) * wt * (1.0 - wf)
        + px(fn_, ti) * (1.0 - wt) * wf
        + px(fn_, tn) * wt * wf
}

/// Backward flow and warped image computed from scratch: the output pixel
/// `x` reads the input at `spline(x)`, where the spline maps each
/// destination point back to its source point.
pub struct OracleWarp {
    /// `(dt, df)` per pixel, channel-major.
    pub flow: Vec<(f64, f64)>,
    pub image: Vec<f64>,
}

pub fn oracle_warp(img: &[f32], nu: usize, tau: usize, source: &[(f64, f64)], dest: &[(f64, f64)]) -> OracleWarp {
    let backward = OracleSpline::fit(dest, source);
    let mut flow = Vec::with_capacity(nu * tau);
    let mut image = Vec::with_capacity(nu * tau);
    for f in 0..nu {
        for t in 0..tau {
            let (st, sf) = backward.eval(t as f64, f as f64);
            flow.push((st - t as f64, sf - f as f64));
            image.push(bilinear(img, nu, tau, st, sf));
        }
    }
    OracleWarp { flow, image }
}

/// Upper-tail p-value of Pearson's chi-square statistic against a uniform
/// law over `counts.len()` cells.
pub fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}
