//! Reference computations that do not go through the library's evaluation
//! paths. Each integration test target includes this module and uses a
//! subset of it.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `1 - Phi(x)` from the Maclaurin series of `erf` for `x < 1` and the
/// Laplace continued fraction (modified Lentz, forward) beyond.
pub fn oracle_tail(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - oracle_tail(-x);
    }
    if x < 1.0 {
        0.5 * (1.0 - erf_series(x / 2f64.sqrt()))
    } else {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt() * mills_lentz(x)
    }
}

/// `ln(1 - Phi(x))` using the same split, in the log domain for large `x`.
pub fn oracle_log_tail(x: f64) -> f64 {
    if x < 1.0 {
        oracle_tail(x).ln()
    } else {
        -0.5 * x * x - 0.5 * (2.0 * PI).ln() + mills_lentz(x).ln()
    }
}

fn erf_series(z: f64) -> f64 {
    // erf z = 2/sqrt(pi) sum_n (-1)^n z^(2n+1) / (n! (2n+1))
    let mut term = z;
    let mut sum = z;
    let z2 = z * z;
    for n in 1..200 {
        term *= -z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

/// Mills ratio `R(x) = 1/(x+ 1/(x+ 2/(x+ ...)))` by modified Lentz.
fn mills_lentz(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..200_000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

pub fn oracle_cdf(x: f64) -> f64 {
    oracle_tail(-x)
}

/// Root of an increasing function on `[lo, hi]` by bisection.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `p`-quantile of the maximum of `n` i.i.d. standard normals:
/// `Phi^{-1}(p^{1/n})`, found by bisection on the oracle tail so that
/// `p^{1/n}` close to one keeps its precision (`1 - p^{1/n} = -expm1(ln p / n)`).
pub fn oracle_iid_max_quantile(n: u64, p: f64) -> f64 {
    let tail = -(p.ln() / n as f64).exp_m1();
    // oracle_tail is decreasing; bisect on -tail
    bisect(|x| -oracle_tail(x), -10.0, 40.0, -tail)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Probabilists' Gauss–Hermite rule (weight `exp(-x^2/2)/sqrt(2 pi)`) from
/// the Golub–Welsch tridiagonal eigenproblem.
pub fn gauss_hermite_prob(n: usize) -> Vec<(f64, f64)> {
    let mut jacobi = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut nodes: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

/// `int_a^b f` by composite Gauss–Legendre with `panels` panels.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    rule: &[(f64, f64)],
) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            rule.iter()
                .map(|&(x, w)| w * f(lo + 0.5 * h * (x + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Small deterministic generator for building random test matrices
/// (SplitMix64).
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, self.below(i + 1));
        }
        p
    }
}

/// Random PD matrix `A A^T + eps I` with `A` having uniform(-1, 1) entries.
pub fn random_pd(rng: &mut SplitMix, dim: usize) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| 2.0 * rng.uniform() - 1.0).collect())
        .collect();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let s: f64 = (0..dim).map(|k| a[i][k] * a[j][k]).sum();
                    if i == j {
                        s + 0.05
                    } else {
                        s
                    }
                })
                .collect()
        })
        .collect()
}

/// Residual variance of variable `target` regressed on `predictors` by
/// solving the normal equations with Gaussian elimination (partial
/// pivoting).
pub fn regression_residual(c: &[Vec<f64>], target: usize, predictors: &[usize]) -> f64 {
    let k = predictors.len();
    if k == 0 {
        return c[target][target];
    }
    let mut m: Vec<Vec<f64>> = predictors
        .iter()
        .map(|&i| {
            let mut row: Vec<f64> = predictors.iter().map(|&j| c[i][j]).collect();
            row.push(c[i][target]);
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = m[r][col] / m[col][col];
                let pivot_row = m[col].clone();
                for (dst, src) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                    *dst -= f * src;
                }
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|i| m[i][k] / m[i][i]).collect();
    let explained: f64 = predictors
        .iter()
        .zip(&beta)
        .map(|(&i, b)| b * c[i][target])
        .sum();
    c[target][target] - explained
}
