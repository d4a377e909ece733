use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest pivot are treated as zero.
const RANK_TOLERANCE: f64 = 1e-11;

/// Dense row-major square matrix.
#[derive(Clone, Debug)]
pub(crate) struct Dense {
    n: usize,
    data: Vec<f64>,
}

impl Dense {
    pub(crate) fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub(crate) fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Solves `a * x = b` for `k` right-hand sides (`b` is n×k row-major) by
/// Gaussian elimination with complete pivoting on the row- and
/// column-equilibrated system.
///
/// Rank-deficient systems are accepted when consistent: free unknowns are
/// set to zero. An inconsistent system is reported as singular along with
/// its numerical rank and the ratio of largest to smallest accepted pivot.
pub(crate) fn solve(mut a: Dense, mut b: Vec<f64>, k: usize) -> Result<Vec<f64>> {
    let n = a.n;
    assert_eq!(b.len(), n * k);
    // Spline systems mix kernel entries ~r² ln r with O(1) affine entries.
    let mut row_scale = vec![1.0; n];
    for (i, scale) in row_scale.iter_mut().enumerate() {
        let max = a.data[i * n..(i + 1) * n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max > 0.0 {
            *scale = 1.0 / max;
            a.data[i * n..(i + 1) * n].iter_mut().for_each(|v| *v *= *scale);
            b[i * k..(i + 1) * k].iter_mut().for_each(|v| *v *= *scale);
        }
    }
    let mut col_scale = vec![1.0; n];
    for (j, scale) in col_scale.iter_mut().enumerate() {
        let max = (0..n).fold(0.0f64, |m, i| m.max(a.data[i * n + j].abs()));
        if max > 0.0 {
            *scale = 1.0 / max;
            (0..n).for_each(|i| a.data[i * n + j] *= *scale);
        }
    }
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    let mut first_pivot = 0.0f64;
    let mut last_pivot = 0.0f64;

    for step in 0..n {
        let (mut pr, mut pc, mut best) = (step, step, 0.0f64);
        for i in step..n {
            for j in step..n {
                let v = a.data[i * n + j].abs();
                if v > best {
                    (pr, pc, best) = (i, j, v);
                }
            }
        }
        if step == 0 {
            first_pivot = best;
        }
        if best == 0.0 || best <= first_pivot * RANK_TOLERANCE {
            break;
        }
        if pr != step {
            for j in 0..n {
                a.data.swap(step * n + j, pr * n + j);
            }
            for j in 0..k {
                b.swap(step * k + j, pr * k + j);
            }
        }
        if pc != step {
            for i in 0..n {
                a.data.swap(i * n + step, i * n + pc);
            }
            col_perm.swap(step, pc);
        }
        let pivot = a.data[step * n + step];
        for i in step + 1..n {
            let factor = a.data[i * n + step] / pivot;
            if factor == 0.0 {
                continue;
            }
            a.data[i * n + step] = 0.0;
            for j in step + 1..n {
                a.data[i * n + j] -= factor * a.data[step * n + j];
            }
            for j in 0..k {
                b[i * k + j] -= factor * b[step * k + j];
            }
        }
        rank += 1;
        last_pivot = best;
    }

    let pivot_ratio = if last_pivot > 0.0 { first_pivot / last_pivot } else { f64::INFINITY };
    if rank < n {
        // Unreduced rows must have (numerically) zero right-hand sides.
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let residual = b[rank * k..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rank == 0 || residual > scale * 1e-9 {
            return Err(Error::SingularSystem {
                rank,
                size: n,
                pivot_ratio,
            });
        }
    }

    let mut y = vec![0.0; n * k];
    for i in (0..rank).rev() {
        for c in 0..k {
            let mut acc = b[i * k + c];
            for j in i + 1..rank {
                acc -= a.data[i * n + j] * y[j * k + c];
            }
            y[i * k + c] = acc / a.data[i * n + i];
        }
    }
    let mut x = vec![0.0; n * k];
    for (pos, &var) in col_perm.iter().enumerate() {
        for c in 0..k {
            x[var * k + c] = y[pos * k + c] * col_scale[var];
        }
    }
    Ok(x)
}
