//! Internal modular arithmetic and exact linear algebra over Z/p^N.
//!
//! Pivoting is always by minimal p-adic valuation with ties broken by scan
//! order, so the same input produces the same elimination on every run.

/// `a * b mod m` without overflow; `m < 2^63`.
pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of a unit mod `m` by extended Euclid. Caller guarantees
/// `gcd(a, m) = 1`.
pub(crate) fn modinv(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "modinv of a non-unit");
    old_s.rem_euclid(m as i128) as u64
}

/// p-adic valuation of a residue; `None` when the residue is 0 mod p^N,
/// i.e. the true valuation is >= N.
pub(crate) fn val_of(residue: u64, p: u64) -> Option<u32> {
    if residue == 0 {
        return None;
    }
    let mut v = 0u32;
    let mut r = residue;
    while r % p == 0 {
        r /= p;
        v += 1;
    }
    Some(v)
}

pub(crate) fn pow_u64(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("modulus overflow")
}

/// Outcome of solving `A x = b` over Z/p^N.
pub(crate) enum SolveOutcome {
    /// A particular solution (free variables set to 0).
    Solution(Vec<u64>),
    /// No solution mod p^N; `residual_val` is the valuation of the best
    /// achievable residual (< N). 0 means a definite obstruction.
    NoSolution { residual_val: u32 },
}

/// Exact Gauss elimination over Z/p^N with full min-valuation pivoting.
/// `a` is row-major `rows x cols`, consumed as scratch. All multipliers are
/// `entry / pivot` with the power of p divided out exactly, so no precision
/// is lost during elimination.
pub(crate) fn solve_mod_pn(
    mut a: Vec<Vec<u64>>,
    mut b: Vec<u64>,
    p: u64,
    modulus: u64,
) -> SolveOutcome {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut row_used = vec![false; rows];
    let mut col_pivot: Vec<Option<usize>> = vec![None; cols];
    // (row, col, valuation) in elimination order.
    let mut pivots: Vec<(usize, usize, u32)> = Vec::new();

    loop {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate() {
            if row_used[i] {
                continue;
            }
            for (j, &e) in row.iter().enumerate() {
                if col_pivot[j].is_some() {
                    continue;
                }
                if let Some(v) = val_of(e, p) {
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        row_used[pi] = true;
        col_pivot[pj] = Some(pi);
        pivots.push((pi, pj, v));

        let pv = pow_u64(p, v);
        let piv_unit_inv = modinv(a[pi][pj] / pv, modulus);
        let pivot_row = a[pi].clone();
        let pivot_rhs = b[pi];
        for i in 0..rows {
            if i == pi || row_used[i] {
                continue;
            }
            let e = a[i][pj];
            if e == 0 {
                continue;
            }
            // e has valuation >= v because the pivot was minimal.
            let mult = mulmod(e / pv, piv_unit_inv, modulus);
            for j in 0..cols {
                let s = mulmod(mult, pivot_row[j], modulus);
                a[i][j] = (a[i][j] + modulus - s) % modulus;
            }
            let s = mulmod(mult, pivot_rhs, modulus);
            b[i] = (b[i] + modulus - s) % modulus;
        }
    }

    let mut worst: Option<u32> = None;
    let mut note_residual = |r: u64, p: u64| {
        let v = val_of(r, p).unwrap_or(u32::MAX);
        if v != u32::MAX {
            worst = Some(worst.map_or(v, |w: u32| w.min(v)));
        }
    };

    // Rows that never produced a pivot must have vanishing right-hand side.
    for i in 0..rows {
        if !row_used[i] && b[i] != 0 {
            note_residual(b[i], p);
        }
    }

    let mut x = vec![0u64; cols];
    // Back-substitute in reverse elimination order; later pivot rows were
    // never eliminated from earlier ones.
    for &(pi, pj, v) in pivots.iter().rev() {
        let mut rhs = b[pi];
        for j in 0..cols {
            if j != pj && x[j] != 0 {
                let s = mulmod(a[pi][j], x[j], modulus);
                rhs = (rhs + modulus - s) % modulus;
            }
        }
        if rhs == 0 {
            x[pj] = 0;
            continue;
        }
        let pv = pow_u64(p, v);
        if rhs % pv != 0 {
            note_residual(rhs, p);
            continue;
        }
        let unit = a[pi][pj] / pv;
        x[pj] = mulmod(rhs / pv, modinv(unit, modulus), modulus);
    }

    match worst {
        Some(v) => SolveOutcome::NoSolution { residual_val: v },
        None => SolveOutcome::Solution(x),
    }
}

/// Rank of a matrix over F_p by plain Gaussian elimination.
// Elimination reads the pivot row while rewriting another, so the inner loop
// stays indexed.
#[allow(clippy::needless_range_loop)]
pub(crate) fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    for r in &mut rows {
        for x in r.iter_mut() {
            *x %= p;
        }
    }
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = modinv(rows[rank][col], p);
        for r in rank + 1..rows.len() {
            if rows[r][col] != 0 {
                let f = mulmod(rows[r][col], inv, p);
                for c in col..ncols {
                    let sub = mulmod(f, rows[rank][c], p);
                    rows[r][c] = (rows[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modinv_small() {
        assert_eq!(modinv(2, 125), 63);
        assert_eq!(mulmod(modinv(7, 2048), 7, 2048), 1);
    }

    #[test]
    fn solve_exact_system() {
        // 2x + y = 5, x = 2 over Z/3^4.
        let a = vec![vec![2, 1], vec![1, 0]];
        let b = vec![5, 2];
        match solve_mod_pn(a, b, 3, 81) {
            SolveOutcome::Solution(x) => assert_eq!(x, vec![2, 1]),
            _ => panic!("expected a solution"),
        }
    }

    #[test]
    fn solve_detects_unit_obstruction() {
        // 3x = 1 has no solution mod 3^3 and the residual is a unit.
        let a = vec![vec![3]];
        let b = vec![1];
        match solve_mod_pn(a, b, 3, 27) {
            SolveOutcome::NoSolution { residual_val } => assert_eq!(residual_val, 0),
            _ => panic!("expected no solution"),
        }
    }

    #[test]
    fn solve_reports_high_valuation_residual() {
        // 9x = 3 mod 3^2: lhs is 0 mod 9, best residual is 3.
        let a = vec![vec![0]];
        let b = vec![3];
        match solve_mod_pn(a, b, 3, 9) {
            SolveOutcome::NoSolution { residual_val } => assert_eq!(residual_val, 1),
            _ => panic!("expected no solution"),
        }
    }
}
