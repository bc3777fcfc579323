//! Exact rational linear programming with certificates.
//!
//! Two independent solvers over `num::BigRational`:
//!
//! * a vertex-walking active-set simplex on `max c.x, A x <= b` with free
//!   variables, used for the primal inequality systems;
//! * a two-phase revised simplex on standard form `min c.z, M z = q, z >= 0`,
//!   used for the dual systems and as a fallback for rank-deficient primals.
//!
//! Both use Bland's rule, so they terminate without cycling, and both
//! re-check the returned solution or certificate exactly before returning:
//! an optimal point is verified feasible with a nonnegative multiplier
//! certificate, an infeasibility claim carries a Farkas vector, an
//! unboundedness claim carries an improving recession ray.

use std::collections::{BTreeMap, VecDeque};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used everywhere in this crate.
pub type Rational = BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Fraction `n/d` as a rational.
pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `max objective . x` subject to `rows[i] . x <= rhs[i]`, `x` free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub nvars: usize,
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(nvars: usize, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), nvars);
        Self { nvars, objective, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn push_row(&mut self, coefs: Vec<Rational>, rhs: Rational) {
        assert_eq!(coefs.len(), self.nvars);
        self.rows.push(coefs);
        self.rhs.push(rhs);
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(row, b)| dot(row, x) <= *b)
    }
}

/// An optimal vertex (or basic) solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicSolution {
    pub value: Rational,
    pub point: Vec<Rational>,
    /// Supporting index set: tight row indices for the vertex solvers, basic
    /// column indices for the standard-form solver.
    pub basis: Vec<usize>,
}

/// Result of solving a linear program, with exact certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(BasicSolution),
    /// `farkas >= 0`, `farkas^T A = 0`, `farkas^T b < 0`.
    Infeasible { farkas: Vec<Rational> },
    /// Feasible direction with `A ray <= 0` and `objective . ray > 0`.
    Unbounded { ray: Vec<Rational> },
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len());
    let mut s = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

// ---------------------------------------------------------------------------
// Dense exact linear algebra.

/// Solve a square system `m x = b` by Gaussian elimination. `None` if `m` is
/// singular.
fn gauss_solve(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for (row, r) in a.iter().enumerate() {
        assert_eq!(r.len(), n, "row {row} not square");
    }
    let mut col_of_row = vec![usize::MAX; n];
    for col in 0..n {
        let pivot = (0..n).find(|&r| col_of_row[r] == usize::MAX && !a[r][col].is_zero())?;
        col_of_row[pivot] = col;
        let pv = a[pivot][col].clone();
        for r in 0..n {
            if r == pivot || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pv;
            for c in 0..n {
                let t = &a[pivot][c] * &f;
                a[r][c] -= t;
            }
            let t = &rhs[pivot] * &f;
            rhs[r] -= t;
        }
    }
    let mut x = zeros(n);
    for r in 0..n {
        let c = col_of_row[r];
        x[c] = &rhs[r] / &a[r][c];
    }
    Some(x)
}

/// Inverse of a square matrix, `None` if singular.
fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pv = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &pv;
            inv[col][c] /= &pv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &a[col][c] * &f;
                a[r][c] -= t;
                let t = &inv[col][c] * &f;
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

/// Sherman-Morrison update of `minv` when row `p` of the underlying matrix is
/// replaced by `old_row + delta`, with `delta` given sparsely.
fn update_inverse_replace_row(minv: &mut [Vec<Rational>], p: usize, delta: &[(usize, Rational)]) {
    let n = minv.len();
    let col: Vec<Rational> = (0..n).map(|i| minv[i][p].clone()).collect();
    let mut rowv = zeros(n);
    for (i, dv) in delta {
        if dv.is_zero() {
            continue;
        }
        for j in 0..n {
            if !minv[*i][j].is_zero() {
                rowv[j] += dv * &minv[*i][j];
            }
        }
    }
    let denom = Rational::one() + &rowv[p];
    assert!(!denom.is_zero(), "inverse update with singular replacement");
    for i in 0..n {
        if col[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if rowv[j].is_zero() {
                continue;
            }
            let t = &col[i] * &rowv[j] / &denom;
            minv[i][j] -= t;
        }
    }
}

// ---------------------------------------------------------------------------
// Vertex-walking primal simplex.

enum VertexRun {
    Optimal { x: Vec<Rational>, basis: Vec<usize>, lambda: Vec<Rational> },
    Unbounded { ray: Vec<Rational> },
    /// The constraint rows do not span the variable space from the reachable
    /// vertex region; the caller must fall back to the standard-form solver.
    RankDeficient,
}

/// Sparse views of dense rows: (index, coefficient) pairs of the nonzeros.
fn sparse_view(rows: &[Vec<Rational>]) -> Vec<Vec<(usize, &Rational)>> {
    rows.iter()
        .map(|r| r.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())
        .collect()
}

fn sdot(row: &[(usize, &Rational)], v: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (j, c) in row {
        if !v[*j].is_zero() {
            s += *c * &v[*j];
        }
    }
    s
}

/// Largest step `t >= 0` with `x + t d` feasible; returns the blocking row
/// (least index on ties). `None` when no row blocks.
fn ratio_step(
    srows: &[Vec<(usize, &Rational)>],
    rhs: &[Rational],
    x: &[Rational],
    d: &[Rational],
    in_w: &[bool],
) -> Option<(Rational, usize)> {
    let mut best: Option<(Rational, usize)> = None;
    for (i, row) in srows.iter().enumerate() {
        if in_w[i] {
            continue;
        }
        let den = sdot(row, d);
        if den.is_positive() {
            let slack = &rhs[i] - sdot(row, x);
            debug_assert!(!slack.is_negative());
            let t = slack / den;
            match &best {
                Some((bt, _)) if *bt <= t => {}
                _ => best = Some((t, i)),
            }
        }
    }
    best
}

fn advance(x: &mut [Rational], d: &[Rational], t: &Rational) {
    if t.is_zero() {
        return;
    }
    for (xi, di) in x.iter_mut().zip(d) {
        if !di.is_zero() {
            *xi += di * t;
        }
    }
}

/// Run crash-to-vertex plus the active-set walk from a feasible point.
///
/// The walk leaves on the steepest negative multiplier and switches to
/// Bland's rule for good after a degenerate run longer than the problem
/// size, so it cannot cycle.
fn run_vertex(lp: &LinearProgram, mut x: Vec<Rational>) -> VertexRun {
    let n = lp.nvars;
    let m = lp.rows.len();
    debug_assert!(lp.is_feasible(&x));
    let srows = sparse_view(&lp.rows);
    let sobj: Vec<(usize, &Rational)> =
        lp.objective.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
    let mut in_w = vec![false; m];
    let mut w: Vec<usize> = Vec::with_capacity(n);
    // Null-space basis of the working rows; shrinks by one per absorbed row.
    let mut nullb: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    let absorb = |row: &[(usize, &Rational)], nullb: &mut Vec<Vec<Rational>>| -> bool {
        let coords: Vec<Rational> = nullb.iter().map(|v| sdot(row, v)).collect();
        let Some(p) = coords.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let pivot = nullb.remove(p);
        let pc = coords[p].clone();
        for (k, v) in nullb.iter_mut().enumerate() {
            let idx = if k < p { k } else { k + 1 };
            if coords[idx].is_zero() {
                continue;
            }
            let f = &coords[idx] / &pc;
            for (vi, pi) in v.iter_mut().zip(&pivot) {
                let t = pi * &f;
                *vi -= t;
            }
        }
        true
    };
    for i in 0..m {
        if sdot(&srows[i], &x) == lp.rhs[i] && absorb(&srows[i], &mut nullb) {
            in_w[i] = true;
            w.push(i);
        }
    }
    while !nullb.is_empty() {
        let mut d = nullb[0].clone();
        if sdot(&sobj, &d).is_negative() {
            for v in d.iter_mut() {
                *v = -v.clone();
            }
        }
        let improving = sdot(&sobj, &d).is_positive();
        let step = match ratio_step(&srows, &lp.rhs, &x, &d, &in_w) {
            Some(s) => Some((s, d.clone())),
            None if improving => {
                debug_assert!(srows.iter().all(|r| !sdot(r, &d).is_positive()));
                return VertexRun::Unbounded { ray: d };
            }
            None => {
                let neg: Vec<Rational> = d.iter().map(|v| -v.clone()).collect();
                ratio_step(&srows, &lp.rhs, &x, &neg, &in_w).map(|s| (s, neg))
            }
        };
        let Some(((t, i), dir)) = step else {
            return VertexRun::RankDeficient;
        };
        advance(&mut x, &dir, &t);
        let ok = absorb(&srows[i], &mut nullb);
        assert!(ok, "blocking row must be independent of the working set");
        in_w[i] = true;
        w.push(i);
    }
    // Invariant: rows of `w` are independent and tight at `x`.
    let mat: Vec<Vec<Rational>> = w.iter().map(|&i| lp.rows[i].clone()).collect();
    let mut minv = invert(&mat).expect("working set is independent");
    let mut iters = 0usize;
    let mut bland = false;
    let mut stall = 0usize;
    let stall_limit = m + n;
    loop {
        iters += 1;
        assert!(iters < 200_000, "active-set simplex failed to terminate");
        // lambda solves A_w^T lambda = c; sparse objective against minv rows.
        let mut lambda = zeros(n);
        for (v, c) in &sobj {
            for (p, l) in lambda.iter_mut().enumerate() {
                if !minv[*v][p].is_zero() {
                    *l += *c * &minv[*v][p];
                }
            }
        }
        let leave = if bland {
            (0..n).filter(|&p| lambda[p].is_negative()).min_by_key(|&p| w[p])
        } else {
            // Steepest: most negative multiplier, least row index on ties.
            let mut best: Option<usize> = None;
            for p in 0..n {
                if !lambda[p].is_negative() {
                    continue;
                }
                let better = match best {
                    Some(b) => {
                        lambda[p] < lambda[b] || (lambda[p] == lambda[b] && w[p] < w[b])
                    }
                    None => true,
                };
                if better {
                    best = Some(p);
                }
            }
            best
        };
        let Some(p) = leave else {
            let mut pairs: Vec<(usize, Rational)> =
                w.iter().copied().zip(lambda).collect();
            pairs.sort_by_key(|(i, _)| *i);
            let (basis, lambda) = pairs.into_iter().unzip();
            return VertexRun::Optimal { x, basis, lambda };
        };
        let d: Vec<Rational> = (0..n).map(|v| -minv[v][p].clone()).collect();
        debug_assert!(sdot(&sobj, &d).is_positive());
        match ratio_step(&srows, &lp.rhs, &x, &d, &in_w) {
            None => {
                debug_assert!(srows.iter().all(|r| !sdot(r, &d).is_positive()));
                return VertexRun::Unbounded { ray: d };
            }
            Some((t, enter)) => {
                if t.is_zero() {
                    stall += 1;
                    if stall > stall_limit {
                        bland = true;
                    }
                } else {
                    stall = 0;
                }
                advance(&mut x, &d, &t);
                let mut delta: BTreeMap<usize, Rational> = BTreeMap::new();
                for (j, c) in &srows[enter] {
                    delta.insert(*j, (*c).clone());
                }
                for (j, c) in &srows[w[p]] {
                    *delta.entry(*j).or_insert_with(Rational::zero) -= *c;
                }
                let delta: Vec<(usize, Rational)> = delta.into_iter().collect();
                update_inverse_replace_row(&mut minv, p, &delta);
                in_w[w[p]] = false;
                in_w[enter] = true;
                w[p] = enter;
            }
        }
    }
}

/// Exact optimality check for a claimed optimal vertex: feasibility, tight
/// basis rows, and a fresh nonnegative multiplier certificate.
fn verify_vertex_optimal(lp: &LinearProgram, x: &[Rational], basis: &[usize]) {
    assert!(lp.is_feasible(x), "claimed optimum is infeasible");
    for &i in basis {
        assert_eq!(dot(&lp.rows[i], x), lp.rhs[i], "basis row {i} is not tight");
    }
    let mat: Vec<Vec<Rational>> = (0..lp.nvars)
        .map(|v| basis.iter().map(|&i| lp.rows[i][v].clone()).collect())
        .collect();
    let lambda = gauss_solve(&mat, &lp.objective).expect("basis rows are independent");
    assert!(
        lambda.iter().all(|l| !l.is_negative()),
        "multiplier certificate has a negative entry"
    );
}

fn verify_farkas(lp: &LinearProgram, y: &[Rational]) {
    assert!(y.iter().all(|v| !v.is_negative()));
    for v in 0..lp.nvars {
        let s: Rational = (0..lp.rows.len()).map(|i| &y[i] * &lp.rows[i][v]).sum();
        assert!(s.is_zero(), "farkas combination does not vanish on variable {v}");
    }
    let val: Rational = (0..lp.rows.len()).map(|i| &y[i] * &lp.rhs[i]).sum();
    assert!(val.is_negative(), "farkas value must be negative");
}

fn verify_ray(lp: &LinearProgram, ray: &[Rational]) {
    assert!(dot(&lp.objective, ray).is_positive(), "ray does not improve");
    for row in &lp.rows {
        assert!(!dot(row, ray).is_positive(), "ray leaves the feasible cone");
    }
}

/// Solve with the vertex walker; `None` when the walker detects that the
/// feasible set has no vertices (rank-deficient constraint matrix).
fn solve_max_vertex(lp: &LinearProgram, start: Option<Vec<Rational>>) -> Option<LpOutcome> {
    let n = lp.nvars;
    let x0 = match start {
        Some(x) => {
            assert!(lp.is_feasible(&x), "supplied start point is infeasible");
            x
        }
        None => {
            let origin = zeros(n);
            if lp.is_feasible(&origin) {
                origin
            } else {
                // Phase 1: max -s with rows a_i.x - s <= b_i and -s <= 0,
                // started at x = 0, s = max(-b_i).
                let mut obj = zeros(n + 1);
                obj[n] = -Rational::one();
                let mut aux = LinearProgram::new(n + 1, obj);
                for (row, b) in lp.rows.iter().zip(&lp.rhs) {
                    let mut r = row.clone();
                    r.push(-Rational::one());
                    aux.push_row(r, b.clone());
                }
                let mut srow = zeros(n + 1);
                srow[n] = -Rational::one();
                aux.push_row(srow, Rational::zero());
                let s0 = lp.rhs.iter().map(|b| -b).fold(Rational::zero(), |a, b| a.max(b));
                let mut start = zeros(n + 1);
                start[n] = s0;
                match run_vertex(&aux, start) {
                    VertexRun::RankDeficient => return None,
                    VertexRun::Unbounded { .. } => {
                        unreachable!("phase 1 objective is bounded above by zero")
                    }
                    VertexRun::Optimal { x, basis, lambda } => {
                        if x[n].is_positive() {
                            let mut farkas = zeros(lp.rows.len());
                            for (i, l) in basis.iter().zip(lambda) {
                                if *i < lp.rows.len() {
                                    farkas[*i] = l;
                                }
                            }
                            verify_farkas(lp, &farkas);
                            return Some(LpOutcome::Infeasible { farkas });
                        }
                        x[..n].to_vec()
                    }
                }
            }
        }
    };
    match run_vertex(lp, x0) {
        VertexRun::RankDeficient => None,
        VertexRun::Unbounded { ray } => {
            verify_ray(lp, &ray);
            Some(LpOutcome::Unbounded { ray })
        }
        VertexRun::Optimal { x, basis, .. } => {
            verify_vertex_optimal(lp, &x, &basis);
            let value = dot(&lp.objective, &x);
            Some(LpOutcome::Optimal(BasicSolution { value, point: x, basis }))
        }
    }
}

/// Maximize over the inequality system. Uses the vertex walker and falls back
/// to a standard-form reformulation when the system has no vertices.
pub fn solve_max(lp: &LinearProgram) -> LpOutcome {
    solve_max_vertex(lp, None).unwrap_or_else(|| solve_max_converted(lp))
}

/// Like [`solve_max`], starting the walk from a known feasible point.
pub fn solve_max_from(lp: &LinearProgram, start: Vec<Rational>) -> LpOutcome {
    solve_max_vertex(lp, Some(start)).unwrap_or_else(|| solve_max_converted(lp))
}

// ---------------------------------------------------------------------------
// Standard-form revised simplex.

/// Sparse column: (row, coefficient) pairs with distinct rows.
pub type SparseCol = Vec<(usize, Rational)>;

/// `min costs . z` subject to `M z = rhs`, `z >= 0`, `M` given by columns.
#[derive(Clone, Debug)]
pub struct StandardLp {
    pub nrows: usize,
    pub cols: Vec<SparseCol>,
    pub costs: Vec<Rational>,
    pub rhs: Vec<Rational>,
}

/// Outcome for standard-form problems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StdOutcome {
    Optimal(BasicSolution),
    /// `farkas^T M <= 0` columnwise and `farkas^T rhs > 0`.
    Infeasible { farkas: Vec<Rational> },
    /// `d >= 0`, `M d = 0`, `costs . d < 0`.
    Unbounded { ray: Vec<Rational> },
}

struct StdState {
    m: usize,
    /// Columns including artificials (ids ncols..ncols+m).
    cols: Vec<SparseCol>,
    basis: Vec<usize>,
    binv: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
}

impl StdState {
    fn col(&self, j: usize) -> &SparseCol {
        &self.cols[j]
    }

    fn binv_times_col(&self, j: usize) -> Vec<Rational> {
        let mut u = zeros(self.m);
        for (r, v) in self.col(j) {
            for i in 0..self.m {
                if !self.binv[i][*r].is_zero() {
                    u[i] += &self.binv[i][*r] * v;
                }
            }
        }
        u
    }

    /// Simplex multipliers for the given basic cost vector.
    fn duals(&self, cb: &[Rational]) -> Vec<Rational> {
        let mut y = zeros(self.m);
        for (i, c) in cb.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (r, yr) in y.iter_mut().enumerate() {
                if !self.binv[i][r].is_zero() {
                    *yr += c * &self.binv[i][r];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[Rational], cost_j: &Rational) -> Rational {
        let mut s = cost_j.clone();
        for (r, v) in self.col(j) {
            if !y[*r].is_zero() {
                s -= &y[*r] * v;
            }
        }
        s
    }

    fn pivot(&mut self, row: usize, enter: usize, u: &[Rational], t: &Rational) {
        for i in 0..self.m {
            if i != row && !u[i].is_zero() {
                let d = &u[i] * t;
                self.xb[i] -= d;
            }
        }
        self.xb[row] = t.clone();
        let pr = u[row].clone();
        let old_row: Vec<Rational> = self.binv[row].clone();
        for c in 0..self.m {
            self.binv[row][c] = &old_row[c] / &pr;
        }
        for i in 0..self.m {
            if i == row || u[i].is_zero() {
                continue;
            }
            for c in 0..self.m {
                if !self.binv[row][c].is_zero() {
                    let d = &u[i] * &self.binv[row][c];
                    self.binv[i][c] -= d;
                }
            }
        }
        self.basis[row] = enter;
    }

    /// One phase of iterations over columns < limit with the given costs.
    /// Pricing takes the most negative reduced cost and switches to Bland's
    /// rule for good after a degenerate run longer than the problem size, so
    /// no cycle can persist. Returns `None` on optimality or `Some(entering)`
    /// on unboundedness, where `entering` is the unbounded improving column.
    fn run_phase(&mut self, phase_costs: &[Rational], limit: usize) -> Option<(usize, Vec<Rational>)> {
        let mut iters = 0usize;
        let mut bland = false;
        let mut stall = 0usize;
        let stall_limit = self.m + limit;
        loop {
            iters += 1;
            assert!(iters < 500_000, "revised simplex failed to terminate");
            let cb: Vec<Rational> =
                self.basis.iter().map(|&j| phase_costs[j].clone()).collect();
            let y = self.duals(&cb);
            // Basic columns have reduced cost exactly zero, so they are never
            // selected; no basis membership test is needed.
            let mut entering: Option<(usize, Rational)> = None;
            for j in 0..limit {
                let rc = self.reduced_cost(j, &y, &phase_costs[j]);
                if !rc.is_negative() {
                    continue;
                }
                if bland {
                    entering = Some((j, rc));
                    break;
                }
                let better = match &entering {
                    Some((_, brc)) => rc < *brc,
                    None => true,
                };
                if better {
                    entering = Some((j, rc));
                }
            }
            let Some((j, _)) = entering else {
                return None;
            };
            let u = self.binv_times_col(j);
            let mut best: Option<(Rational, usize)> = None;
            for i in 0..self.m {
                if u[i].is_positive() {
                    let t = &self.xb[i] / &u[i];
                    match &best {
                        Some((bt, bi)) if *bt < t || (*bt == t && self.basis[*bi] < self.basis[i]) => {}
                        _ => best = Some((t, i)),
                    }
                }
            }
            let Some((t, row)) = best else {
                return Some((j, u));
            };
            if t.is_zero() {
                stall += 1;
                if stall > stall_limit {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            self.pivot(row, j, &u, &t);
        }
    }
}

/// Solve `min costs . z : M z = rhs, z >= 0` with a two-phase revised
/// simplex. Redundant equality rows are detected after phase 1 and dropped.
pub fn solve_min_standard(lp: &StandardLp) -> StdOutcome {
    let out = solve_min_standard_inner(lp);
    match &out {
        StdOutcome::Optimal(sol) => verify_std_optimal(lp, sol),
        StdOutcome::Infeasible { farkas } => verify_std_farkas(lp, farkas),
        StdOutcome::Unbounded { ray } => verify_std_ray(lp, ray),
    }
    out
}

/// Like [`solve_min_standard`], but seeded with a basis of real columns. The
/// warm path runs only when the basis is square, invertible, and feasible;
/// anything else falls back to the cold two-phase solve. Both paths end in
/// the same verification nets.
pub fn solve_min_standard_from(lp: &StandardLp, basis: Vec<usize>) -> StdOutcome {
    let out = warm_min_standard(lp, basis).unwrap_or_else(|| solve_min_standard_inner(lp));
    match &out {
        StdOutcome::Optimal(sol) => verify_std_optimal(lp, sol),
        StdOutcome::Infeasible { farkas } => verify_std_farkas(lp, farkas),
        StdOutcome::Unbounded { ray } => verify_std_ray(lp, ray),
    }
    out
}

/// Phase 2 from a given basis; skips the artificial phase entirely. `None`
/// when the basis is unusable.
fn warm_min_standard(lp: &StandardLp, basis: Vec<usize>) -> Option<StdOutcome> {
    let m = lp.nrows;
    if basis.len() != m || basis.iter().any(|&j| j >= lp.cols.len()) {
        return None;
    }
    let mut dense: Vec<Vec<Rational>> = vec![zeros(m); m];
    for (i, &j) in basis.iter().enumerate() {
        for (r, v) in &lp.cols[j] {
            dense[*r][i] = v.clone();
        }
    }
    let binv = invert(&dense)?;
    let xb: Vec<Rational> = (0..m).map(|i| dot(&binv[i], &lp.rhs)).collect();
    if xb.iter().any(|v| v.is_negative()) {
        return None;
    }
    let ncols = lp.cols.len();
    let mut st = StdState { m, cols: lp.cols.clone(), basis, binv, xb };
    if let Some((enter, u)) = st.run_phase(&lp.costs, ncols) {
        let mut ray = zeros(ncols);
        ray[enter] = Rational::one();
        for (i, ui) in u.iter().enumerate() {
            ray[st.basis[i]] = -ui.clone();
        }
        return Some(StdOutcome::Unbounded { ray });
    }
    let mut point = zeros(ncols);
    for (j, x) in st.basis.iter().zip(&st.xb) {
        point[*j] = x.clone();
    }
    let value = dot(&lp.costs, &point);
    let mut basis = st.basis;
    basis.sort_unstable();
    Some(StdOutcome::Optimal(BasicSolution { value, point, basis }))
}

fn solve_min_standard_inner(lp: &StandardLp) -> StdOutcome {
    let m = lp.nrows;
    let ncols = lp.cols.len();
    // Flip rows to make the right side nonnegative; remember the signs.
    let sign: Vec<bool> = lp.rhs.iter().map(|b| b.is_negative()).collect();
    let flip = |col: &SparseCol| -> SparseCol {
        col.iter()
            .map(|(r, v)| (*r, if sign[*r] { -v.clone() } else { v.clone() }))
            .collect()
    };
    let mut cols: Vec<SparseCol> = lp.cols.iter().map(flip).collect();
    for r in 0..m {
        cols.push(vec![(r, Rational::one())]);
    }
    let rhs: Vec<Rational> =
        lp.rhs.iter().enumerate().map(|(r, b)| if sign[r] { -b } else { b.clone() }).collect();
    let mut st = StdState {
        m,
        cols,
        basis: (ncols..ncols + m).collect(),
        binv: (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect(),
        xb: rhs,
    };
    // Phase 1: minimize the artificial sum. Only real columns may enter, so
    // the artificial for row r is only ever at basis position r.
    let mut ph1 = zeros(ncols + m);
    for c in ph1.iter_mut().skip(ncols) {
        *c = Rational::one();
    }
    let unb = st.run_phase(&ph1, ncols);
    assert!(unb.is_none(), "phase 1 objective is bounded below by zero");
    let ph1_val: Rational = st
        .basis
        .iter()
        .zip(&st.xb)
        .filter(|(j, _)| **j >= ncols)
        .map(|(_, x)| x.clone())
        .sum();
    if ph1_val.is_positive() {
        let cb: Vec<Rational> = st.basis.iter().map(|&j| ph1[j].clone()).collect();
        let y = st.duals(&cb);
        // Unflip: farkas for the original row orientation.
        let farkas: Vec<Rational> = y
            .iter()
            .enumerate()
            .map(|(r, v)| if sign[r] { -v.clone() } else { v.clone() })
            .collect();
        return StdOutcome::Infeasible { farkas };
    }
    // Drive artificials out of the basis. A zero-step pivot is valid for any
    // nonzero pivot element; rows whose artificial cannot pivot out are
    // dependent on the others, and the solve restarts without them.
    let mut redundant: Vec<usize> = Vec::new();
    for row in 0..m {
        if st.basis[row] < ncols {
            continue;
        }
        debug_assert!(st.xb[row].is_zero());
        let mut pivoted = false;
        for j in 0..ncols {
            if st.basis.contains(&j) {
                continue;
            }
            let u = st.binv_times_col(j);
            if !u[row].is_zero() {
                st.pivot(row, j, &u, &Rational::zero());
                pivoted = true;
                break;
            }
        }
        if !pivoted {
            // Only real columns entered, so this artificial is the one for
            // equation `row`, which row `row` of binv proves dependent.
            redundant.push(row);
        }
    }
    if !redundant.is_empty() {
        let keep: Vec<usize> = (0..m).filter(|r| !redundant.contains(r)).collect();
        let remap: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let reduced = StandardLp {
            nrows: keep.len(),
            cols: lp
                .cols
                .iter()
                .map(|col| {
                    col.iter()
                        .filter_map(|(r, v)| remap.get(r).map(|&nr| (nr, v.clone())))
                        .collect()
                })
                .collect(),
            costs: lp.costs.clone(),
            rhs: keep.iter().map(|&r| lp.rhs[r].clone()).collect(),
        };
        return match solve_min_standard(&reduced) {
            StdOutcome::Optimal(sol) => StdOutcome::Optimal(sol),
            StdOutcome::Unbounded { ray } => StdOutcome::Unbounded { ray },
            StdOutcome::Infeasible { .. } => {
                unreachable!("redundant rows are dropped only from feasible systems")
            }
        };
    }
    // Phase 2 over the real columns.
    let mut ph2 = lp.costs.clone();
    ph2.extend(zeros(m));
    if let Some((enter, u)) = st.run_phase(&ph2, ncols) {
        let mut ray = zeros(ncols);
        ray[enter] = Rational::one();
        for (i, ui) in u.iter().enumerate() {
            if st.basis[i] < ncols {
                ray[st.basis[i]] = -ui.clone();
            }
        }
        return StdOutcome::Unbounded { ray };
    }
    let mut point = zeros(ncols);
    for (j, x) in st.basis.iter().zip(&st.xb) {
        if *j < ncols {
            point[*j] = x.clone();
        }
    }
    let value = dot(&lp.costs, &point);
    let mut basis: Vec<usize> = st.basis.iter().copied().filter(|&j| j < ncols).collect();
    basis.sort_unstable();
    StdOutcome::Optimal(BasicSolution { value, point, basis })
}

fn col_dot(col: &SparseCol, y: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (r, v) in col {
        if !y[*r].is_zero() {
            s += &y[*r] * v;
        }
    }
    s
}

fn verify_std_optimal(lp: &StandardLp, sol: &BasicSolution) {
    assert!(sol.point.iter().all(|v| !v.is_negative()), "negative basic value");
    let mut lhs = zeros(lp.nrows);
    for (j, z) in sol.point.iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        for (r, v) in &lp.cols[j] {
            lhs[*r] += v * z;
        }
    }
    assert_eq!(lhs, lp.rhs, "basic solution does not satisfy the equations");
    assert_eq!(dot(&lp.costs, &sol.point), sol.value);
    // Fresh multiplier certificate from the claimed basis: B^T y = c_B and
    // all reduced costs nonnegative.
    let mb: Vec<Vec<Rational>> = sol
        .basis
        .iter()
        .map(|&j| {
            let mut dense = zeros(lp.nrows);
            for (r, v) in &lp.cols[j] {
                dense[*r] = v.clone();
            }
            dense
        })
        .collect();
    if mb.len() == lp.nrows {
        let cb: Vec<Rational> = sol.basis.iter().map(|&j| lp.costs[j].clone()).collect();
        let y = gauss_solve(&mb, &cb).expect("basis is invertible");
        for (j, col) in lp.cols.iter().enumerate() {
            let rc = &lp.costs[j] - col_dot(col, &y);
            assert!(!rc.is_negative(), "negative reduced cost at column {j}");
        }
    }
}

fn verify_std_farkas(lp: &StandardLp, y: &[Rational]) {
    for (j, col) in lp.cols.iter().enumerate() {
        assert!(!col_dot(col, y).is_positive(), "farkas fails on column {j}");
    }
    assert!(dot(y, &lp.rhs).is_positive(), "farkas value must be positive");
}

fn verify_std_ray(lp: &StandardLp, d: &[Rational]) {
    assert!(d.iter().all(|v| !v.is_negative()));
    assert!(dot(&lp.costs, d).is_negative(), "ray does not improve");
    let mut lhs = zeros(lp.nrows);
    for (j, z) in d.iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        for (r, v) in &lp.cols[j] {
            lhs[*r] += v * z;
        }
    }
    assert!(lhs.iter().all(|v| v.is_zero()), "ray leaves the equality kernel");
}

// ---------------------------------------------------------------------------
// Duality and conversion.

/// The dual of `max c.x : A x <= b` is `min b.y : A^T y = c, y >= 0`.
pub fn dual_standard_form(lp: &LinearProgram) -> StandardLp {
    let cols: Vec<SparseCol> = lp
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(v, c)| (v, c.clone()))
                .collect()
        })
        .collect();
    StandardLp { nrows: lp.nvars, cols, costs: lp.rhs.clone(), rhs: lp.objective.clone() }
}

/// Solve the dual program of `lp` independently of the primal solver. For an
/// optimal primal the dual optimum has the same value (strong duality); the
/// returned point is a basic dual solution `y` indexed by primal rows.
pub fn solve_dual_min(lp: &LinearProgram) -> StdOutcome {
    solve_min_standard(&dual_standard_form(lp))
}

/// Fallback solver for rank-deficient primals: split `x = u - v`, add slacks,
/// and solve the standard form `min -c.(u-v) : A(u-v) + w = b`.
fn solve_max_converted(lp: &LinearProgram) -> LpOutcome {
    let n = lp.nvars;
    let m = lp.rows.len();
    let mut cols: Vec<SparseCol> = Vec::with_capacity(2 * n + m);
    for v in 0..n {
        cols.push(
            (0..m).filter(|&i| !lp.rows[i][v].is_zero()).map(|i| (i, lp.rows[i][v].clone())).collect(),
        );
    }
    for v in 0..n {
        cols.push(
            (0..m)
                .filter(|&i| !lp.rows[i][v].is_zero())
                .map(|i| (i, -lp.rows[i][v].clone()))
                .collect(),
        );
    }
    for i in 0..m {
        cols.push(vec![(i, Rational::one())]);
    }
    let mut costs: Vec<Rational> = lp.objective.iter().map(|c| -c.clone()).collect();
    costs.extend(lp.objective.iter().cloned());
    costs.extend(zeros(m));
    let std = StandardLp { nrows: m, cols, costs, rhs: lp.rhs.clone() };
    match solve_min_standard(&std) {
        StdOutcome::Optimal(sol) => {
            let x: Vec<Rational> =
                (0..n).map(|v| &sol.point[v] - &sol.point[n + v]).collect();
            assert!(lp.is_feasible(&x));
            let value = dot(&lp.objective, &x);
            assert_eq!(value, -sol.value);
            // Report a maximal independent set of tight rows as the basis.
            let mut basis = Vec::new();
            let mut mat: Vec<Vec<Rational>> = Vec::new();
            for i in 0..m {
                if basis.len() == n {
                    break;
                }
                if dot(&lp.rows[i], &x) == lp.rhs[i] {
                    mat.push(lp.rows[i].clone());
                    if matrix_rank(&mat) == mat.len() {
                        basis.push(i);
                    } else {
                        mat.pop();
                    }
                }
            }
            LpOutcome::Optimal(BasicSolution { value, point: x, basis })
        }
        StdOutcome::Unbounded { ray } => {
            let d: Vec<Rational> = (0..n).map(|v| &ray[v] - &ray[n + v]).collect();
            verify_ray(lp, &d);
            LpOutcome::Unbounded { ray: d }
        }
        StdOutcome::Infeasible { farkas } => {
            let y: Vec<Rational> = farkas.iter().map(|v| -v.clone()).collect();
            verify_farkas(lp, &y);
            LpOutcome::Infeasible { farkas: y }
        }
    }
}

fn matrix_rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pv = a[rank][col].clone();
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let f = &a[r][col] / &pv;
                for c in col..n {
                    let t = &a[rank][c] * &f;
                    a[r][c] -= t;
                }
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

// ---------------------------------------------------------------------------
// Dominance reduction.

/// Drop rows implied by another row with the same left side and a smaller or
/// equal right side. The feasible region is unchanged. Returns the reduced
/// program and, for each kept row, its index in the original program.
pub fn dominance_reduce(lp: &LinearProgram) -> (LinearProgram, Vec<usize>) {
    let mut best: BTreeMap<Vec<Rational>, (usize, Rational)> = BTreeMap::new();
    for (i, (row, b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
        match best.get_mut(row) {
            Some((_, min_rhs)) if *min_rhs <= *b => {}
            Some(entry) => *entry = (i, b.clone()),
            None => {
                best.insert(row.clone(), (i, b.clone()));
            }
        }
    }
    let mut kept: Vec<(usize, Vec<Rational>, Rational)> =
        best.into_iter().map(|(row, (i, b))| (i, row, b)).collect();
    kept.sort_by_key(|(i, _, _)| *i);
    let mut out = LinearProgram::new(lp.nvars, lp.objective.clone());
    let mut ids = Vec::with_capacity(kept.len());
    for (i, row, b) in kept {
        out.push_row(row, b);
        ids.push(i);
    }
    (out, ids)
}

// ---------------------------------------------------------------------------
// Text form.

/// Errors when reading the text form of a program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpTextError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Render as text: an objective line `max <coef> <name> ...`, a literal
/// `subject to`, then one `<coef> <name> ... <= <rhs>` line per row. Zero
/// terms are omitted except the final variable's term, which is always
/// printed so the full variable set is recoverable.
pub fn write_lp_text(lp: &LinearProgram, names: &[String]) -> String {
    assert_eq!(names.len(), lp.nvars);
    let term = |c: &Rational, v: usize| format!("{} {}", c, names[v]);
    let mut out = String::from("max");
    let mut any = false;
    for (v, c) in lp.objective.iter().enumerate() {
        if !c.is_zero() {
            out.push(' ');
            out.push_str(&term(c, v));
            any = true;
        }
    }
    if !any {
        out.push_str(" 0");
    }
    out.push('\n');
    out.push_str("subject to\n");
    for (row, b) in lp.rows.iter().zip(&lp.rhs) {
        let mut line = String::new();
        for (v, c) in row.iter().enumerate() {
            if c.is_zero() && v + 1 != lp.nvars {
                continue;
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&term(c, v));
        }
        out.push_str(&format!("{line} <= {b}\n"));
    }
    out
}

/// Parse the text form. Variables are ordered by name: `xA_<hex>` names
/// ascending by their hexadecimal value, then all remaining names
/// alphabetically (so the conventional `xs` comes last).
pub fn parse_lp_text(s: &str) -> Result<(LinearProgram, Vec<String>), LpTextError> {
    let err = |line: usize, reason: &str| LpTextError::Parse { line, reason: reason.into() };
    let parse_terms = |line_no: usize, toks: &[&str]| -> Result<Vec<(Rational, String)>, LpTextError> {
        if toks.len() % 2 != 0 {
            return Err(err(line_no, "expected coefficient-name pairs"));
        }
        let mut terms = Vec::new();
        for pair in toks.chunks(2) {
            let c = Rational::from_str(pair[0])
                .map_err(|e| err(line_no, &format!("bad coefficient {}: {e}", pair[0])))?;
            terms.push((c, pair[1].to_string()));
        }
        Ok(terms)
    };
    let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln0, first) = lines.next().ok_or_else(|| err(0, "empty input"))?;
    let first = first.trim();
    let obj_toks: Vec<&str> = first
        .strip_prefix("max")
        .ok_or_else(|| err(ln0 + 1, "objective must start with `max`"))?
        .split_whitespace()
        .collect();
    let obj_terms =
        if obj_toks == ["0"] { Vec::new() } else { parse_terms(ln0 + 1, &obj_toks)? };
    let (ln1, second) = lines.next().ok_or_else(|| err(ln0 + 1, "missing `subject to`"))?;
    if second.trim() != "subject to" {
        return Err(err(ln1 + 1, "expected `subject to`"));
    }
    let mut raw_rows: Vec<(Vec<(Rational, String)>, Rational)> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut note = |n: &str, names: &mut Vec<String>| {
        if seen.insert(n.to_string()) {
            names.push(n.to_string());
        }
    };
    for (_, n) in &obj_terms {
        note(n, &mut names);
    }
    for (ln, line) in lines {
        let toks: Vec<&str> = line.trim().split_whitespace().collect();
        let sep = toks
            .iter()
            .position(|t| *t == "<=")
            .ok_or_else(|| err(ln + 1, "constraint must contain `<=`"))?;
        if sep + 2 != toks.len() {
            return Err(err(ln + 1, "expected a single right side after `<=`"));
        }
        let rhs = Rational::from_str(toks[sep + 1])
            .map_err(|e| err(ln + 1, &format!("bad right side: {e}")))?;
        let terms = parse_terms(ln + 1, &toks[..sep])?;
        for (_, n) in &terms {
            note(n, &mut names);
        }
        raw_rows.push((terms, rhs));
    }
    let hex_value = |n: &str| -> Option<u128> {
        n.strip_prefix("xA_").and_then(|h| u128::from_str_radix(h, 16).ok())
    };
    names.sort_by(|a, b| match (hex_value(a), hex_value(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cmp(b),
    });
    let index: BTreeMap<&str, usize> =
        names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut objective = zeros(names.len());
    for (c, n) in &obj_terms {
        objective[index[n.as_str()]] += c;
    }
    let mut lp = LinearProgram::new(names.len(), objective);
    for (terms, rhs) in raw_rows {
        let mut row = zeros(names.len());
        for (c, n) in terms {
            row[index[n.as_str()]] += c;
        }
        lp.push_row(row, rhs);
    }
    Ok((lp, names))
}

// ---------------------------------------------------------------------------
// Sparse presolve over inequality systems.

/// A system reduced by sign elimination, with enough bookkeeping to restore
/// full-length primal points and re-index dual vectors.
///
/// Subset variables are free and carry no objective weight, so a variable
/// whose surviving occurrences all share one sign can slide toward the slack
/// side until every row through it holds strictly; those rows never bind and
/// drop, which can leave further variables one-signed. The elimination
/// repeats until every surviving subset occurs with both signs. Large
/// systems shrink drastically: a subset used by only one factor's
/// inequalities never constrains the optimum.
///
/// Dual vectors transfer back by zero-extension. By induction over the
/// elimination order, a feasible dual vector of the full system gives weight
/// zero to every dropped row: the trigger variable's column must sum to
/// zero, its entries on earlier-dropped rows already carry weight zero, the
/// surviving entries share one sign, and weights are nonnegative. The full
/// dual feasible set is therefore exactly the zero-extension of the reduced
/// one, and vertices correspond to vertices.
pub struct Presolved {
    /// Dense program over the surviving rows and subsets, `x_s` last.
    pub lp: LinearProgram,
    /// Surviving row indices, in system order.
    pub rows: Vec<usize>,
    /// Surviving subset indices, in system order.
    pub cols: Vec<usize>,
    /// Sparse subset part of every system row.
    sparse: Vec<Vec<(usize, i64)>>,
    /// Eliminated variables in elimination order, each with the rows it
    /// dropped. Rows dropped by an event only involve variables eliminated
    /// by later events or surviving ones.
    events: Vec<(usize, Vec<usize>)>,
}

/// Runs the sign elimination on a system without materializing its full
/// dense program.
pub fn presolve(sys: &crate::sli::SliSystem) -> Presolved {
    let n = sys.subsets.len();
    let sparse: Vec<Vec<(usize, i64)>> = sys
        .inequalities
        .iter()
        .map(|q| {
            let mut row: BTreeMap<usize, i64> = BTreeMap::new();
            for a in &q.images {
                *row.entry(sys.subset_index(*a)).or_insert(0) += q.sign();
            }
            row.into_iter().collect()
        })
        .collect();
    let mut var_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pos = vec![0usize; n];
    let mut neg = vec![0usize; n];
    for (j, row) in sparse.iter().enumerate() {
        for &(v, c) in row {
            var_rows[v].push(j);
            if c > 0 {
                pos[v] += 1;
            } else {
                neg[v] += 1;
            }
        }
    }
    let mut row_alive = vec![true; sparse.len()];
    let mut var_alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| pos[v] == 0 || neg[v] == 0).collect();
    let mut events = Vec::new();
    while let Some(v) = queue.pop_front() {
        if !var_alive[v] || (pos[v] > 0 && neg[v] > 0) {
            continue;
        }
        var_alive[v] = false;
        let mut dropped = Vec::new();
        for &j in &var_rows[v] {
            if !row_alive[j] {
                continue;
            }
            row_alive[j] = false;
            dropped.push(j);
            for &(u, c) in &sparse[j] {
                if c > 0 {
                    pos[u] -= 1;
                } else {
                    neg[u] -= 1;
                }
                if u != v && var_alive[u] && (pos[u] == 0 || neg[u] == 0) {
                    queue.push_back(u);
                }
            }
        }
        events.push((v, dropped));
    }
    let rows: Vec<usize> = (0..sparse.len()).filter(|&j| row_alive[j]).collect();
    let cols: Vec<usize> = (0..n).filter(|&v| var_alive[v]).collect();
    let col_of: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nv = cols.len() + 1;
    let mut objective = vec![Rational::zero(); nv];
    objective[nv - 1] = -Rational::one();
    let mut lp = LinearProgram::new(nv, objective);
    for &j in &rows {
        let q = &sys.inequalities[j];
        let mut row = vec![Rational::zero(); nv];
        for &(v, c) in &sparse[j] {
            row[col_of[&v]] = rat(c);
        }
        row[nv - 1] = rat(q.xs_coeff());
        lp.push_row(row, rat(q.rhs()));
    }
    Presolved { lp, rows, cols, sparse, events }
}

impl Presolved {
    /// Full-length primal point from a reduced one: surviving variables copy
    /// over, eliminated ones take, in reverse elimination order, the extreme
    /// value their dropped rows allow. Each dropped row ends up satisfied by
    /// its own event's assignment.
    pub fn restore_point(
        &self,
        sys: &crate::sli::SliSystem,
        reduced: &[Rational],
    ) -> Vec<Rational> {
        let n = sys.subsets.len();
        let mut x = vec![Rational::zero(); n + 1];
        x[n] = reduced[self.cols.len()].clone();
        for (i, &v) in self.cols.iter().enumerate() {
            x[v] = reduced[i].clone();
        }
        for (v, dropped) in self.events.iter().rev() {
            let mut best: Option<Rational> = None;
            for &j in dropped {
                let q = &sys.inequalities[j];
                let mut rest = rat(q.xs_coeff()) * &x[n];
                let mut own = 0i64;
                for &(u, c) in &self.sparse[j] {
                    if u == *v {
                        own = c;
                    } else {
                        rest = rest + rat(c) * &x[u];
                    }
                }
                debug_assert!(own != 0, "event variable occurs in its dropped rows");
                // own > 0 caps the variable from above, own < 0 from below;
                // one event sees a single sign.
                let bound = (rat(q.rhs()) - rest) / rat(own);
                best = Some(match best {
                    None => bound,
                    Some(b) => {
                        if (own > 0) == (bound < b) {
                            bound
                        } else {
                            b
                        }
                    }
                });
            }
            if let Some(b) = best {
                x[*v] = b;
            }
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Entry points over inequality systems.

/// Feasible start for a presolved system program: subsets at zero and the
/// trailing slack raised to the worst bound over the rows with a negative
/// slack coefficient. `None` if some row rejects even that (which no
/// enumerated system does, since rows without a slack coefficient have
/// right side zero).
fn raised_slack_start(lp: &LinearProgram) -> Option<Vec<Rational>> {
    let nv = lp.nvars;
    let mut xs = Rational::zero();
    for (row, b) in lp.rows.iter().zip(&lp.rhs) {
        let c = &row[nv - 1];
        if c.is_negative() {
            let bound = b / c;
            if bound > xs {
                xs = bound;
            }
        }
    }
    let mut start = zeros(nv);
    start[nv - 1] = xs;
    lp.is_feasible(&start).then_some(start)
}

fn solve_max_raised(lp: &LinearProgram) -> LpOutcome {
    match raised_slack_start(lp) {
        Some(start) => solve_max_from(lp, start),
        None => solve_max(lp),
    }
}

/// Primal vertex solution of `max -x_s` over a system, solved on the
/// presolved and dominance-reduced rows; the restored full-length point is
/// re-checked against every original row.
pub fn primal_vertex(sys: &crate::sli::SliSystem) -> Result<BasicSolution, crate::sli::SliError> {
    use crate::sli::SliError;
    let pre = presolve(sys);
    let (reduced, kept) = dominance_reduce(&pre.lp);
    match solve_max_raised(&reduced) {
        LpOutcome::Optimal(b) => {
            let point = pre.restore_point(sys, &b.point);
            if !sys.satisfied_by(&point) {
                return Err(SliError::Solver("restored optimum violates a dropped row"));
            }
            let basis = b.basis.iter().map(|&i| pre.rows[kept[i]]).collect();
            Ok(BasicSolution { value: b.value, point, basis })
        }
        LpOutcome::Infeasible { .. } => Err(SliError::Solver("primal system is infeasible")),
        LpOutcome::Unbounded { .. } => Err(SliError::Solver("primal system is unbounded")),
    }
}

/// The coefficient carried by the system: `-optimum / brr` of the primal.
/// The system's graph must be its own core with positive reduced rank.
pub fn primal_sigma(sys: &crate::sli::SliSystem) -> Result<Rational, crate::sli::SliError> {
    let brr = sys.y1.reduced_rank();
    if brr == 0 {
        return Err(crate::sli::SliError::RankZero);
    }
    Ok(-primal_vertex(sys)?.value / rat(brr as i64))
}

/// Vertex solution of the dual `min b.y` over `A^T y = c`, `y >= 0`, with
/// one coordinate per system inequality. Strong duality makes its value
/// equal the primal optimum; callers cross-check that equality.
///
/// The solve runs on the presolved, dominance-reduced rows; dropped rows
/// take weight zero. A zero-extended reduced vertex stays a vertex of the
/// full dual: presolve-dropped coordinates vanish on every feasible vector
/// (see [`Presolved`]), dominance-dropped ones are pinned by nonnegativity,
/// and the remaining support already certifies a reduced vertex. The
/// extended vector is re-checked for exact feasibility before returning.
pub fn dual_vertex_solution(
    sys: &crate::sli::SliSystem,
) -> Result<BasicSolution, crate::sli::SliError> {
    use crate::sli::SliError;
    let pre = presolve(sys);
    let (reduced, kept) = dominance_reduce(&pre.lp);
    // The dual standard form's columns are the primal rows, so an optimal
    // primal basis indexes a dual feasible basis whose basic values are the
    // primal multipliers. Seeding with it skips the artificial phase; the
    // solve still prices every column and re-verifies its own optimum.
    let warm = match solve_max_raised(&reduced) {
        LpOutcome::Optimal(b) => Some(b.basis),
        _ => None,
    };
    let std = dual_standard_form(&reduced);
    let out = match warm {
        Some(basis) => solve_min_standard_from(&std, basis),
        None => solve_min_standard(&std),
    };
    match out {
        StdOutcome::Optimal(b) => {
            let mut point = zeros(sys.inequalities.len());
            for (i, v) in b.point.into_iter().enumerate() {
                point[pre.rows[kept[i]]] = v;
            }
            if !sys.dual_satisfied_by(&point) {
                return Err(SliError::Solver("zero-extended dual vector is infeasible"));
            }
            let basis = b.basis.into_iter().map(|j| pre.rows[kept[j]]).collect();
            Ok(BasicSolution { value: b.value, point, basis })
        }
        StdOutcome::Infeasible { .. } => Err(SliError::Solver("dual system is infeasible")),
        StdOutcome::Unbounded { .. } => Err(SliError::Solver("dual system is unbounded")),
    }
}
