//! Exact integer feasibility of `A x = b, x ≥ 0` by branch and bound over a
//! rational simplex (phase one only, Bland's rule).

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IlpResult {
    Feasible(Vec<u64>),
    Infeasible,
    /// The node budget ran out before the search finished.
    Unknown,
}

/// Sparse columns: `columns[j]` lists `(row, coefficient)`.
#[derive(Debug, Clone)]
pub struct Ilp {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, i64)>>,
    pub rhs: Vec<i64>,
}

#[derive(Clone)]
struct Bounds {
    lower: Vec<i64>,
    upper: Vec<Option<i64>>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Ilp {
    pub fn new(rows: usize, columns: Vec<Vec<(usize, i64)>>, rhs: Vec<i64>) -> Self {
        assert_eq!(rhs.len(), rows);
        Self { rows, columns, rhs }
    }

    pub fn check(&self, x: &[u64]) -> bool {
        let mut acc = vec![0i128; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(r, c) in col {
                acc[r] += c as i128 * x[j] as i128;
            }
        }
        acc.iter().zip(&self.rhs).all(|(a, b)| *a == *b as i128)
    }

    /// Rational relaxation: a feasible point, or `None`.
    pub fn relaxation(&self) -> Option<Vec<BigRational>> {
        let n = self.columns.len();
        self.lp(&Bounds { lower: vec![0; n], upper: vec![None; n] })
    }

    /// Breadth-first branch and bound visiting at most `node_cap` nodes.
    pub fn solve(&self, node_cap: usize) -> IlpResult {
        self.solve_counting(node_cap).0
    }

    /// As [`Ilp::solve`], also returning the number of nodes visited.
    pub fn solve_counting(&self, node_cap: usize) -> (IlpResult, usize) {
        let n = self.columns.len();
        // Rows without any column must already be satisfied.
        let mut touched = vec![false; self.rows];
        for col in &self.columns {
            for &(r, c) in col {
                if c != 0 {
                    touched[r] = true;
                }
            }
        }
        if (0..self.rows).any(|r| !touched[r] && self.rhs[r] != 0) || !self.integer_span_contains_rhs() {
            return (IlpResult::Infeasible, 0);
        }
        let mut queue = VecDeque::from([Bounds { lower: vec![0; n], upper: vec![None; n] }]);
        let mut nodes = 0;
        let mut exhausted = true;
        while let Some(b) = queue.pop_front() {
            if nodes >= node_cap {
                exhausted = false;
                break;
            }
            nodes += 1;
            let Some(x) = self.lp(&b) else { continue };
            match x.iter().position(|v| !v.is_integer()) {
                None => {
                    let sol: Vec<u64> = x
                        .iter()
                        .map(|v| v.to_integer().try_into().expect("solution fits in u64"))
                        .collect();
                    debug_assert!(self.check(&sol));
                    return (IlpResult::Feasible(sol), nodes);
                }
                Some(j) => {
                    let fl: i64 = x[j].floor().to_integer().try_into().expect("bound fits in i64");
                    let mut up = b.clone();
                    up.lower[j] = fl + 1;
                    let mut down = b;
                    down.upper[j] = Some(fl);
                    queue.push_back(down);
                    queue.push_back(up);
                }
            }
        }
        let result = if exhausted { IlpResult::Infeasible } else { IlpResult::Unknown };
        (result, nodes)
    }

    /// Whether `A x = b` has an integer solution, signs ignored. Columns are
    /// brought to echelon form by unimodular column operations.
    pub fn integer_span_contains_rhs(&self) -> bool {
        let mut cols: Vec<Vec<BigInt>> = self
            .columns
            .iter()
            .map(|col| {
                let mut v = vec![BigInt::zero(); self.rows];
                for &(r, c) in col {
                    v[r] += c;
                }
                v
            })
            .collect();
        let mut residual: Vec<BigInt> = self.rhs.iter().map(|&n| BigInt::from(n)).collect();
        let mut k = 0;
        for r in 0..self.rows {
            // gcd-eliminate row r among columns k.. into column k
            for j in k + 1..cols.len() {
                while !cols[j][r].is_zero() {
                    if cols[k][r].is_zero() {
                        cols.swap(k, j);
                        continue;
                    }
                    let q = &cols[j][r] / &cols[k][r];
                    let pivot = cols[k].clone();
                    for (v, p) in cols[j].iter_mut().zip(&pivot) {
                        *v -= &q * p;
                    }
                    if !cols[j][r].is_zero() {
                        cols.swap(k, j);
                    }
                }
            }
            if k < cols.len() && !cols[k][r].is_zero() {
                if !(&residual[r] % &cols[k][r]).is_zero() {
                    return false;
                }
                let q = &residual[r] / &cols[k][r];
                for (v, p) in residual.iter_mut().zip(&cols[k]) {
                    *v -= &q * p;
                }
                k += 1;
            } else if !residual[r].is_zero() {
                return false;
            }
        }
        true
    }

    /// Phase-one simplex over `A x = b, lower ≤ x ≤ upper`, first in 128-bit
    /// fractions and again in big fractions if those overflow.
    fn lp(&self, bounds: &Bounds) -> Option<Vec<BigRational>> {
        match self.lp_in::<Ratio<i128>>(bounds) {
            Ok(x) => x,
            Err(Overflow) => self.lp_in::<BigRational>(bounds).unwrap_or_else(|_| unreachable!()),
        }
    }

    fn lp_in<F: Scalar>(&self, bounds: &Bounds) -> Result<Option<Vec<BigRational>>, Overflow> {
        let n = self.columns.len();
        if (0..n).any(|j| bounds.upper[j].is_some_and(|u| u < bounds.lower[j])) {
            return Ok(None);
        }
        // Shift x = lower + y, y ≥ 0.
        let mut rhs: Vec<i128> = self.rhs.iter().map(|&b| b as i128).collect();
        for (j, col) in self.columns.iter().enumerate() {
            if bounds.lower[j] != 0 {
                for &(r, c) in col {
                    rhs[r] -= c as i128 * bounds.lower[j] as i128;
                }
            }
        }
        let uppers: Vec<(usize, i64)> = (0..n)
            .filter_map(|j| bounds.upper[j].map(|u| (j, u - bounds.lower[j])))
            .collect();
        // Variables: y (n), slacks for upper bounds, then artificials.
        let m = self.rows + uppers.len();
        let ns = uppers.len();
        let width = n + ns + m + 1;
        let mut t: Vec<Vec<F>> = vec![vec![F::zero(); width]; m];
        for (j, col) in self.columns.iter().enumerate() {
            for &(r, c) in col {
                t[r][j] = t[r][j].plus(&F::int(c as i128))?;
            }
        }
        for (r, row) in t.iter_mut().enumerate().take(self.rows) {
            row[width - 1] = F::int(rhs[r]);
        }
        for (k, &(j, u)) in uppers.iter().enumerate() {
            let r = self.rows + k;
            t[r][j] = F::one();
            t[r][n + k] = F::one();
            t[r][width - 1] = F::int(u as i128);
        }
        for (r, row) in t.iter_mut().enumerate() {
            if row[width - 1].is_negative() {
                for v in row.iter_mut() {
                    *v = F::zero().minus(v)?;
                }
            }
            row[n + ns + r] = F::one();
        }
        let mut basis: Vec<usize> = (0..m).map(|r| n + ns + r).collect();
        // Objective: minimise the sum of artificials, reduced costs in `obj`.
        let mut obj = vec![F::zero(); width];
        for row in &t {
            for (c, v) in row.iter().enumerate() {
                if c < n + ns || c == width - 1 {
                    obj[c] = obj[c].minus(v)?;
                }
            }
        }
        loop {
            let Some(enter) = (0..n + ns + m).find(|&c| obj[c].is_negative()) else { break };
            let mut leave: Option<(usize, F)> = None;
            for (r, row) in t.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = row[width - 1].over(&row[enter])?;
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, _)) = leave else { break };
            pivot(&mut t, &mut obj, pr, enter)?;
            basis[pr] = enter;
        }
        if !obj[width - 1].is_zero() {
            return Ok(None);
        }
        let mut y = vec![BigRational::zero(); n];
        for (r, &bv) in basis.iter().enumerate() {
            if bv < n {
                y[bv] = t[r][width - 1].to_big();
            }
        }
        Ok(Some(y.into_iter().enumerate().map(|(j, v)| v + rat(bounds.lower[j])).collect()))
    }
}

struct Overflow;

/// Exact field arithmetic that may overflow.
trait Scalar: Clone + PartialOrd + Zero + One {
    fn int(n: i128) -> Self;
    fn plus(&self, o: &Self) -> Result<Self, Overflow>;
    fn minus(&self, o: &Self) -> Result<Self, Overflow>;
    fn times(&self, o: &Self) -> Result<Self, Overflow>;
    fn over(&self, o: &Self) -> Result<Self, Overflow>;
    fn is_negative(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn to_big(&self) -> BigRational;
}

impl Scalar for Ratio<i128> {
    fn int(n: i128) -> Self {
        Ratio::from_integer(n)
    }
    fn plus(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(o).ok_or(Overflow)
    }
    fn minus(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(o).ok_or(Overflow)
    }
    fn times(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(o).ok_or(Overflow)
    }
    fn over(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_div(o).ok_or(Overflow)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Scalar for BigRational {
    fn int(n: i128) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn plus(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn minus(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn times(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn over(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self / o)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

fn pivot<F: Scalar>(t: &mut [Vec<F>], obj: &mut [F], pr: usize, pc: usize) -> Result<(), Overflow> {
    let p = t[pr][pc].clone();
    for v in t[pr].iter_mut() {
        if !v.is_zero() {
            *v = v.over(&p)?;
        }
    }
    let prow = t[pr].clone();
    let support: Vec<usize> = (0..prow.len()).filter(|&c| !prow[c].is_zero()).collect();
    let eliminate = |row: &mut [F]| -> Result<(), Overflow> {
        if row[pc].is_zero() {
            return Ok(());
        }
        let f = row[pc].clone();
        for &c in &support {
            row[c] = row[c].minus(&f.times(&prow[c])?)?;
        }
        Ok(())
    };
    for (r, row) in t.iter_mut().enumerate() {
        if r != pr {
            eliminate(row)?;
        }
    }
    eliminate(obj)
}
