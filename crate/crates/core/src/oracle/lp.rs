//! Zero-sum matrix games: exact simplex over rationals and a regret-matching fallback.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ratio::{self, Rational};

/// Optimal mixes for a game where the row player pays `payoff[i][j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub value: Rational,
    pub row_mix: Vec<Rational>,
    pub col_mix: Vec<Rational>,
}

/// Solves the game exactly. The row player minimizes.
///
/// With every entry shifted to at least 1, the row player's problem becomes
/// `max Σx  s.t.  Σ_i x_i A_ij ≤ 1, x ≥ 0`. Column duals give the column
/// player's mix. A floating-point simplex proposes the optimal basis, which is
/// then confirmed in rationals; if confirmation fails the rational tableau
/// simplex with Bland's rule runs from scratch.
pub fn solve_exact(payoff: &[Vec<Rational>]) -> ExactSolution {
    let m = payoff.len();
    assert!(m > 0, "empty game");
    let n = payoff[0].len();
    assert!(n > 0, "empty game");
    let min = payoff.iter().flatten().min().unwrap().clone();
    let shift = ratio::one() - min;
    let shifted: Vec<Vec<Rational>> = payoff.iter().map(|r| r.iter().map(|v| v + &shift).collect()).collect();
    if let Some(basis) = float_basis(&shifted) {
        if let Some(s) = confirm_basis(&shifted, &basis, &shift) {
            return s;
        }
    }
    tableau_solve(&shifted, shift)
}

fn tableau_solve(shifted: &[Vec<Rational>], shift: Rational) -> ExactSolution {
    let m = shifted.len();
    let n = shifted[0].len();

    // n constraint rows, m structural columns, n slack columns, then rhs
    let width = m + n + 1;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut row = vec![ratio::zero(); width];
        for (i, r) in shifted.iter().enumerate() {
            row[i] = r[j].clone();
        }
        row[m + j] = ratio::one();
        row[width - 1] = ratio::one();
        tab.push(row);
    }
    let mut obj = vec![ratio::zero(); width];
    for c in obj.iter_mut().take(m) {
        *c = -ratio::one();
    }
    tab.push(obj);
    let mut basis: Vec<usize> = (m..m + n).collect();

    while let Some(enter) = (0..width - 1).find(|&c| tab[n][c].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..n {
            if tab[r][enter].is_positive() {
                let q = &tab[r][width - 1] / &tab[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, lq)) => q < *lq || (q == *lq && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, q));
                }
            }
        }
        let (pr, _) = leave.expect("bounded: all entries positive");
        pivot(&mut tab, pr, enter);
        basis[pr] = enter;
    }

    let total = tab[n][width - 1].clone(); // Σx = 1/v'
    let vprime = ratio::one() / &total;
    let mut row_mix = vec![ratio::zero(); m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            row_mix[b] = &tab[r][width - 1] * &vprime;
        }
    }
    let col_mix: Vec<Rational> = (0..n).map(|j| &tab[n][m + j] * &vprime).collect();
    ExactSolution {
        value: vprime - shift,
        row_mix,
        col_mix,
    }
}

/// Optimal basis of the shifted problem found in floating point: column indices
/// into `[structural | slack]`, one per constraint row.
fn float_basis(shifted: &[Vec<Rational>]) -> Option<Vec<usize>> {
    const TOL: f64 = 1e-11;
    let m = shifted.len();
    let n = shifted[0].len();
    let width = m + n + 1;
    let mut tab = vec![vec![0.0f64; width]; n + 1];
    for j in 0..n {
        for i in 0..m {
            tab[j][i] = ratio::to_f64(&shifted[i][j]);
        }
        tab[j][m + j] = 1.0;
        tab[j][width - 1] = 1.0;
    }
    for c in tab[n].iter_mut().take(m) {
        *c = -1.0;
    }
    let mut basis: Vec<usize> = (m..m + n).collect();
    let limit = 50 * (m + n) + 1000;
    for it in 0..limit {
        // steepest coefficient first, Bland's rule once it has had its chance
        let enter = if it < limit / 2 {
            (0..width - 1)
                .filter(|&c| tab[n][c] < -TOL)
                .min_by(|&a, &b| tab[n][a].total_cmp(&tab[n][b]))
        } else {
            (0..width - 1).find(|&c| tab[n][c] < -TOL)
        };
        let Some(enter) = enter else {
            return Some(basis);
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n {
            if tab[r][enter] > TOL {
                let q = tab[r][width - 1] / tab[r][enter];
                let better = match leave {
                    None => true,
                    Some((lr, lq)) => q < lq - TOL || ((q - lq).abs() <= TOL && basis[r] < basis[lr]),
                };
                if better {
                    leave = Some((r, q));
                }
            }
        }
        let (pr, _) = leave?;
        let p = tab[pr][enter];
        for v in tab[pr].iter_mut() {
            *v /= p;
        }
        let prow = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r != pr && row[enter] != 0.0 {
                let f = row[enter];
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
        basis[pr] = enter;
    }
    None
}

/// Column `c` of `[A' | I]` restricted to constraint rows.
fn column(shifted: &[Vec<Rational>], c: usize) -> Vec<Rational> {
    let m = shifted.len();
    let n = shifted[0].len();
    if c < m {
        shifted[c].clone()
    } else {
        (0..n).map(|j| if j == c - m { ratio::one() } else { ratio::zero() }).collect()
    }
}

/// Checks primal and dual feasibility of `basis` exactly and reads off the solution.
fn confirm_basis(shifted: &[Vec<Rational>], basis: &[usize], shift: &Rational) -> Option<ExactSolution> {
    let m = shifted.len();
    let n = shifted[0].len();
    let cols: Vec<Vec<Rational>> = basis.iter().map(|&c| column(shifted, c)).collect();
    // B z = 1, with B[j][k] = cols[k][j]
    let b: Vec<Vec<Rational>> = (0..n).map(|j| (0..n).map(|k| cols[k][j].clone()).collect()).collect();
    let z = solve_linear(b.clone(), vec![ratio::one(); n])?;
    if z.iter().any(|v| v.is_negative()) {
        return None;
    }
    // Bᵀ y = c_B
    let bt: Vec<Vec<Rational>> = (0..n).map(|k| cols[k].clone()).collect();
    let cb: Vec<Rational> = basis.iter().map(|&c| if c < m { ratio::one() } else { ratio::zero() }).collect();
    let y = solve_linear(bt, cb)?;
    if y.iter().any(|v| v.is_negative()) {
        return None;
    }
    for row in shifted {
        let reduced: Rational = row.iter().zip(&y).map(|(a, b)| a * b).sum();
        if reduced < ratio::one() {
            return None;
        }
    }
    let total: Rational = basis.iter().zip(&z).filter(|(&c, _)| c < m).map(|(_, v)| v.clone()).sum();
    let dual_total: Rational = y.iter().cloned().sum();
    if total != dual_total || !total.is_positive() {
        return None;
    }
    let vprime = ratio::one() / &total;
    let mut row_mix = vec![ratio::zero(); m];
    for (&c, v) in basis.iter().zip(&z) {
        if c < m {
            row_mix[c] = v * &vprime;
        }
    }
    Some(ExactSolution {
        value: &vprime - shift,
        row_mix,
        col_mix: y.iter().map(|v| v * &vprime).collect(),
    })
}

/// Gaussian elimination over the rationals; `None` if the matrix is singular.
fn solve_linear(mut a: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let pr = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pr);
        rhs.swap(col, pr);
        let p = a[col][col].clone();
        for v in a[col].iter_mut().skip(col) {
            *v /= &p;
        }
        rhs[col] /= &p;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
            let d = &f * &rhs[col];
            rhs[r] -= d;
        }
    }
    Some(rhs)
}

fn pivot(tab: &mut [Vec<Rational>], pr: usize, pc: usize) {
    let p = tab[pr][pc].clone();
    if !p.is_one() {
        for v in tab[pr].iter_mut() {
            *v /= &p;
        }
    }
    let prow = tab[pr].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}

/// Approximate solution from regret matching.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSolution {
    pub value: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
    /// Best column payoff against `row_mix` minus best row payoff against `col_mix`.
    pub gap: f64,
    pub iterations: usize,
}

/// Regret matching+ with alternating updates and linearly weighted averages,
/// stopped once the duality gap of the averages falls to `eps`. Returns `Err`
/// with the iteration count if `max_iter` passes first.
pub fn solve_iterative(payoff: &[Vec<f64>], eps: f64, max_iter: usize, seed: u64) -> Result<ApproxSolution, usize> {
    let m = payoff.len();
    let n = payoff[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // random positive starting regrets break ties between equivalent pure strategies
    let mut rr: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 1e-9).collect();
    let mut cr: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 1e-9).collect();
    let mut row_avg = vec![0.0; m];
    let mut col_avg = vec![0.0; n];
    let normalize = |r: &[f64]| -> Vec<f64> {
        let s: f64 = r.iter().sum();
        if s > 0.0 {
            r.iter().map(|v| v / s).collect()
        } else {
            vec![1.0 / r.len() as f64; r.len()]
        }
    };
    for it in 1..=max_iter {
        let x = normalize(&rr);
        let y = normalize(&cr);
        // the row player minimizes, so its regret is the payoff it would have saved
        let row_payoff: Vec<f64> = payoff.iter().map(|r| r.iter().zip(&y).map(|(a, b)| a * b).sum()).collect();
        let ev: f64 = row_payoff.iter().zip(&x).map(|(a, b)| a * b).sum();
        for i in 0..m {
            rr[i] = (rr[i] + ev - row_payoff[i]).max(0.0);
        }
        let w = it as f64;
        for i in 0..m {
            row_avg[i] += w * x[i];
        }
        let x = normalize(&rr);
        let col_payoff: Vec<f64> = (0..n).map(|j| (0..m).map(|i| x[i] * payoff[i][j]).sum()).collect();
        let ev: f64 = col_payoff.iter().zip(&y).map(|(a, b)| a * b).sum();
        for j in 0..n {
            cr[j] = (cr[j] + col_payoff[j] - ev).max(0.0);
        }
        for j in 0..n {
            col_avg[j] += w * y[j];
        }
        if it % 16 == 0 || it == max_iter {
            let xa = normalize(&row_avg);
            let ya = normalize(&col_avg);
            let upper = (0..n)
                .map(|j| (0..m).map(|i| xa[i] * payoff[i][j]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            let lower = payoff
                .iter()
                .map(|r| r.iter().zip(&ya).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            if upper - lower <= eps {
                return Ok(ApproxSolution {
                    value: (upper + lower) / 2.0,
                    row_mix: xa,
                    col_mix: ya,
                    gap: upper - lower,
                    iterations: it,
                });
            }
        }
    }
    Err(max_iter)
}
