//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `max c·z` subject to rows `a·z (<=|=|>=) b` and `z >= 0`.

use num_traits::{One, Signed, Zero};

use crate::arithmetic::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowKind {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<Rational>,
    pub kind: RowKind,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rational, point: Vec<Rational> },
}

struct Tableau {
    // m rows of `cols + 1` entries, the last being the right-hand side.
    a: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for v in self.a[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximises `obj·z` over the columns flagged in `allowed`. Returns false
    /// when the objective is unbounded.
    fn optimise(&mut self, obj: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols).find(|&j| {
                allowed[j] && !self.basis.contains(&j) && {
                    let mut rc = obj[j].clone();
                    for (i, &bi) in self.basis.iter().enumerate() {
                        if !obj[bi].is_zero() && !self.a[i][j].is_zero() {
                            rc -= &obj[bi] * &self.a[i][j];
                        }
                    }
                    rc.is_positive()
                }
            });
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if self.a[i][c].is_positive() {
                    let ratio = &self.a[i][self.cols] / &self.a[i][c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }

    fn point(&self, n: usize) -> Vec<Rational> {
        let mut z = vec![Rational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                z[b] = self.a[i][self.cols].clone();
            }
        }
        z
    }
}

/// Solves the LP over `n` non-negative variables.
pub(crate) fn maximise(n: usize, rows: &[Row], objective: &[Rational]) -> Outcome {
    // Normalise to non-negative right-hand sides.
    let rows: Vec<Row> = rows
        .iter()
        .map(|row| {
            if row.rhs.is_negative() {
                Row {
                    coeffs: row.coeffs.iter().map(|c| -c).collect(),
                    kind: match row.kind {
                        RowKind::Le => RowKind::Ge,
                        RowKind::Eq => RowKind::Eq,
                        RowKind::Ge => RowKind::Le,
                    },
                    rhs: -row.rhs.clone(),
                }
            } else {
                row.clone()
            }
        })
        .collect();
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.kind != RowKind::Eq).count();
    let artificials = rows.iter().filter(|r| r.kind != RowKind::Le).count();
    let cols = n + slacks + artificials;
    let mut a = vec![vec![Rational::zero(); cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut t) = (n, n + slacks);
    for (i, row) in rows.iter().enumerate() {
        a[i][..n].clone_from_slice(&row.coeffs);
        a[i][cols] = row.rhs.clone();
        match row.kind {
            RowKind::Le => {
                a[i][s] = Rational::one();
                basis[i] = s;
                s += 1;
            }
            RowKind::Ge => {
                a[i][s] = -Rational::one();
                s += 1;
                a[i][t] = Rational::one();
                basis[i] = t;
                t += 1;
            }
            RowKind::Eq => {
                a[i][t] = Rational::one();
                basis[i] = t;
                t += 1;
            }
        }
    }
    let mut tab = Tableau { a, basis, cols };
    let first_art = n + slacks;

    if artificials > 0 {
        let mut phase1 = vec![Rational::zero(); cols];
        for v in &mut phase1[first_art..] {
            *v = -Rational::one();
        }
        tab.optimise(&phase1, &vec![true; cols]);
        let infeasibility: Rational = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= first_art)
            .map(|(i, _)| tab.a[i][cols].clone())
            .sum();
        if infeasibility.is_positive() {
            return Outcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < tab.a.len() {
            if tab.basis[i] >= first_art {
                match (0..first_art).find(|&j| !tab.a[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.a.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut obj = vec![Rational::zero(); cols];
    obj[..n].clone_from_slice(objective);
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
    if !tab.optimise(&obj, &allowed) {
        return Outcome::Unbounded;
    }
    let point = tab.point(n);
    let value = point.iter().zip(objective).map(|(z, c)| z * c).sum();
    Outcome::Optimal { value, point }
}
