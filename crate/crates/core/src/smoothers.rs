//! Spline bases and penalties: cubic regression splines with a curvature
//! penalty, B-spline bases with difference penalties (P-splines), tensor
//! product smooths, and the sum-to-zero identifiability constraint.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SmoothError {
    #[error("covariate '{covariate}' has {distinct} distinct values, need at least {needed}")]
    TooFewDistinct { covariate: String, distinct: usize, needed: usize },
    #[error("basis dimension {dim} too small (minimum {min})")]
    DimTooSmall { dim: usize, min: usize },
    #[error("difference order {order} must be below the basis dimension {dim}")]
    BadPenaltyOrder { order: usize, dim: usize },
    #[error("value {value} outside the knot span [{lo}, {hi}]")]
    OutsideSpan { value: f64, lo: f64, hi: f64 },
    #[error("tensor basis would have {dim} columns, over the limit {max}")]
    TensorTooLarge { dim: usize, max: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Ordered knot locations plus how the ends are treated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    pub knots: Vec<f64>,
    pub boundary: BoundaryRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryRule {
    /// Natural spline: linear extrapolation beyond the end knots.
    NaturalLinear,
    /// B-spline ends: boundary knots repeated degree+1 times.
    Clamped,
}

impl KnotVector {
    fn validate(&self) -> Result<(), SmoothError> {
        if self.knots.len() < 2 {
            return Err(SmoothError::Invalid("need at least two knots".into()));
        }
        for pair in self.knots.windows(2) {
            if pair[1] <= pair[0] {
                return Err(SmoothError::Invalid(format!(
                    "knots not strictly increasing: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }
}

/// Marginal basis kinds available inside a tensor product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarginKind {
    Crs,
    BSpline,
}

/// What to build for one smooth term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SmoothKind {
    /// Cubic regression spline with knots at quantiles of the distinct values.
    Crs,
    /// B-spline basis on even knots with a difference penalty.
    PSpline,
    /// Row-wise product of two marginal bases, one penalty per direction.
    Tensor { margins: [MarginKind; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothSpec {
    pub name: String,
    pub kind: SmoothKind,
    /// one covariate column, or two for a tensor
    pub covariates: Vec<String>,
    /// basis count per margin
    pub dims: Vec<usize>,
    /// difference order for B-spline margins
    pub penalty_order: usize,
}

impl SmoothSpec {
    pub fn validate(&self) -> Result<(), SmoothError> {
        let margins = match self.kind {
            SmoothKind::Tensor { .. } => 2,
            _ => 1,
        };
        if self.covariates.len() != margins || self.dims.len() != margins {
            return Err(SmoothError::Invalid(format!(
                "smooth '{}' expects {margins} margin(s)",
                self.name
            )));
        }
        for &d in &self.dims {
            if d < 3 {
                return Err(SmoothError::DimTooSmall { dim: d, min: 3 });
            }
        }
        Ok(())
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Evaluation recipe for one margin, sufficient to rebuild basis rows at
/// prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MarginBasis {
    Crs(CrsBasis),
    BSpline(BSplineBasis),
}

impl MarginBasis {
    pub fn dim(&self) -> usize {
        match self {
            MarginBasis::Crs(b) => b.dim(),
            MarginBasis::BSpline(b) => b.dim,
        }
    }

    pub fn span(&self) -> (f64, f64) {
        match self {
            MarginBasis::Crs(b) => b.knots.span(),
            MarginBasis::BSpline(b) => b.breaks.span(),
        }
    }

    pub fn eval_row(&self, x: f64) -> Result<Vec<f64>, SmoothError> {
        match self {
            MarginBasis::Crs(b) => b.eval_row(x),
            MarginBasis::BSpline(b) => b.eval_row(x),
        }
    }

    fn penalty(&self) -> Array2<f64> {
        match self {
            MarginBasis::Crs(b) => b.penalty(),
            MarginBasis::BSpline(b) => difference_penalty(b.dim, b.penalty_order).unwrap(),
        }
    }
}

/// A realized smooth term: evaluated basis, its penalties, and the
/// centering transform once applied.
#[derive(Debug, Clone)]
pub struct RealizedSmooth {
    pub name: String,
    pub covariates: Vec<String>,
    pub margins: Vec<MarginBasis>,
    /// T x d evaluated (possibly centered) basis
    pub basis: Array2<f64>,
    /// one d x d PSD matrix per penalized direction
    pub penalties: Vec<Array2<f64>>,
    /// reparameterization applied by the centering constraint
    pub constraint: Option<Array2<f64>>,
}

impl RealizedSmooth {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Rebuilds (constrained) basis rows for new covariate values.
    pub fn eval_rows(&self, columns: &[&[f64]]) -> Result<Array2<f64>, SmoothError> {
        if columns.len() != self.margins.len() {
            return Err(SmoothError::Invalid(format!(
                "smooth '{}' expects {} covariate column(s)",
                self.name,
                self.margins.len()
            )));
        }
        let n = columns[0].len();
        let full_dim: usize = self.margins.iter().map(|m| m.dim()).product();
        let mut full = Array2::zeros((n, full_dim));
        match self.margins.len() {
            1 => {
                for (i, &x) in columns[0].iter().enumerate() {
                    let row = self.margins[0].eval_row(x)?;
                    for (j, v) in row.into_iter().enumerate() {
                        full[[i, j]] = v;
                    }
                }
            }
            2 => {
                let db = self.margins[1].dim();
                for i in 0..n {
                    let ra = self.margins[0].eval_row(columns[0][i])?;
                    let rb = self.margins[1].eval_row(columns[1][i])?;
                    for (a, &va) in ra.iter().enumerate() {
                        for (b, &vb) in rb.iter().enumerate() {
                            full[[i, a * db + b]] = va * vb;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        Ok(match &self.constraint {
            Some(z) => full.dot(z),
            None => full,
        })
    }
}

/// Strictly increasing quantile knots over the distinct values of `x`.
fn quantile_knots(x: &[f64], dim: usize, covariate: &str) -> Result<Vec<f64>, SmoothError> {
    let mut unique: Vec<f64> = x.to_vec();
    unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
    unique.dedup();
    if unique.len() < dim {
        return Err(SmoothError::TooFewDistinct {
            covariate: covariate.to_string(),
            distinct: unique.len(),
            needed: dim,
        });
    }
    let m = unique.len();
    let mut knots = Vec::with_capacity(dim);
    for j in 0..dim {
        let pos = j as f64 * (m - 1) as f64 / (dim - 1) as f64;
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        let v = if lo + 1 < m {
            unique[lo] + frac * (unique[lo + 1] - unique[lo])
        } else {
            unique[m - 1]
        };
        knots.push(v);
    }
    Ok(knots)
}

/// Cardinal natural-cubic-spline basis: coefficient j is the function
/// value at knot j, and the penalty is the integrated squared second
/// derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrsBasis {
    pub knots: KnotVector,
    /// maps knot values to second derivatives at the knots (k x k, outer
    /// rows zero); rebuilt from the knots on deserialization
    #[serde(skip)]
    second_deriv_map: Option<Array2<f64>>,
}

impl CrsBasis {
    pub fn new(knots: Vec<f64>) -> Result<Self, SmoothError> {
        let kv = KnotVector { knots, boundary: BoundaryRule::NaturalLinear };
        kv.validate()?;
        if kv.knots.len() < 3 {
            return Err(SmoothError::DimTooSmall { dim: kv.knots.len(), min: 3 });
        }
        let mut basis = CrsBasis { knots: kv, second_deriv_map: None };
        basis.second_deriv_map = Some(basis.build_map());
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.knots.knots.len()
    }

    /// Solves the natural-spline continuity system R gamma = Q' g for all
    /// unit vectors g at once, giving the full value-to-second-derivative
    /// map (Thomas algorithm on the tridiagonal R).
    fn build_map(&self) -> Array2<f64> {
        let xi = &self.knots.knots;
        let k = xi.len();
        let h: Vec<f64> = xi.windows(2).map(|p| p[1] - p[0]).collect();
        let m = k - 2;

        // Q' g for every unit g: row i of Q' is the second-difference row
        // for interior knot i+1
        let mut rhs = Array2::zeros((m, k));
        for i in 0..m {
            rhs[[i, i]] = 1.0 / h[i];
            rhs[[i, i + 1]] = -1.0 / h[i] - 1.0 / h[i + 1];
            rhs[[i, i + 2]] = 1.0 / h[i + 1];
        }

        // tridiagonal R: diag (h_i + h_{i+1})/3, off-diag h_{i+1}/6
        let diag: Vec<f64> = (0..m).map(|i| (h[i] + h[i + 1]) / 3.0).collect();
        let off: Vec<f64> = (0..m.saturating_sub(1)).map(|i| h[i + 1] / 6.0).collect();

        // Thomas forward sweep
        let mut c_prime = vec![0.0; m];
        let mut denom = vec![0.0; m];
        denom[0] = diag[0];
        if m > 1 {
            c_prime[0] = off[0] / diag[0];
        }
        for i in 1..m {
            denom[i] = diag[i] - off[i - 1] * c_prime[i - 1];
            if i + 1 < m {
                c_prime[i] = off[i] / denom[i];
            }
        }
        let mut gamma = Array2::zeros((m, k));
        for col in 0..k {
            let mut d = vec![0.0; m];
            d[0] = rhs[[0, col]] / denom[0];
            for i in 1..m {
                d[i] = (rhs[[i, col]] - off[i - 1] * d[i - 1]) / denom[i];
            }
            let mut x = vec![0.0; m];
            x[m - 1] = d[m - 1];
            for i in (0..m - 1).rev() {
                x[i] = d[i] - c_prime[i] * x[i + 1];
            }
            for i in 0..m {
                gamma[[i, col]] = x[i];
            }
        }

        // pad with the natural end conditions (zero curvature)
        let mut map = Array2::zeros((k, k));
        for i in 0..m {
            for j in 0..k {
                map[[i + 1, j]] = gamma[[i, j]];
            }
        }
        map
    }

    fn map(&self) -> &Array2<f64> {
        self.second_deriv_map
            .as_ref()
            .expect("second derivative map present after construction")
    }

    /// Call after deserialization to rebuild the cached map.
    pub fn rehydrate(&mut self) {
        if self.second_deriv_map.is_none() {
            self.second_deriv_map = Some(self.build_map());
        }
    }

    pub fn eval_row(&self, x: f64) -> Result<Vec<f64>, SmoothError> {
        let xi = &self.knots.knots;
        let k = xi.len();
        let (lo, hi) = self.knots.span();
        if x < lo || x > hi {
            return Err(SmoothError::OutsideSpan { value: x, lo, hi });
        }
        // interval index j with xi[j] <= x <= xi[j+1]
        let j = match xi.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(k - 2),
            Err(i) => i - 1,
        };
        let h = xi[j + 1] - xi[j];
        let left = xi[j + 1] - x;
        let right = x - xi[j];
        let a_minus = left / h;
        let a_plus = right / h;
        let c_minus = (left * left * left / h - h * left) / 6.0;
        let c_plus = (right * right * right / h - h * right) / 6.0;

        let map = self.map();
        let mut row = vec![0.0; k];
        row[j] += a_minus;
        row[j + 1] += a_plus;
        for col in 0..k {
            row[col] += c_minus * map[[j, col]] + c_plus * map[[j + 1, col]];
        }
        Ok(row)
    }

    /// Integrated squared second derivative in the value-at-knot
    /// parameterization: S = Q R^{-1} Q' = Q' mapped through the stored
    /// second-derivative solve.
    pub fn penalty(&self) -> Array2<f64> {
        let xi = &self.knots.knots;
        let k = xi.len();
        let h: Vec<f64> = xi.windows(2).map(|p| p[1] - p[0]).collect();
        let map = self.map(); // rows: second derivatives m_i per unit value

        // S[a][b] = integral of b_a'' b_b'' = sum over intervals of the
        // product of piecewise-linear curvatures
        let mut s = Array2::zeros((k, k));
        for a in 0..k {
            for b in a..k {
                let mut acc = 0.0;
                for (j, &hj) in h.iter().enumerate() {
                    let (m0a, m1a) = (map[[j, a]], map[[j + 1, a]]);
                    let (m0b, m1b) = (map[[j, b]], map[[j + 1, b]]);
                    acc += hj / 6.0 * (2.0 * m0a * m0b + 2.0 * m1a * m1b + m0a * m1b + m1a * m0b);
                }
                s[[a, b]] = acc;
                s[[b, a]] = acc;
            }
        }
        s
    }
}

/// Clamped B-spline basis on evenly spaced interior knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineBasis {
    /// strictly increasing breakpoints `[min, interior.., max]`
    pub breaks: KnotVector,
    pub degree: usize,
    pub dim: usize,
    pub penalty_order: usize,
}

impl BSplineBasis {
    pub fn new(lo: f64, hi: f64, dim: usize, degree: usize, penalty_order: usize) -> Result<Self, SmoothError> {
        if dim < degree + 1 {
            return Err(SmoothError::DimTooSmall { dim, min: degree + 1 });
        }
        if penalty_order >= dim {
            return Err(SmoothError::BadPenaltyOrder { order: penalty_order, dim });
        }
        if !(hi > lo) {
            return Err(SmoothError::Invalid(format!("degenerate range [{lo}, {hi}]")));
        }
        let n_interior = dim - degree - 1;
        let mut breaks = Vec::with_capacity(n_interior + 2);
        breaks.push(lo);
        for i in 1..=n_interior {
            breaks.push(lo + (hi - lo) * i as f64 / (n_interior + 1) as f64);
        }
        breaks.push(hi);
        let kv = KnotVector { knots: breaks, boundary: BoundaryRule::Clamped };
        kv.validate()?;
        Ok(BSplineBasis { breaks: kv, degree, dim, penalty_order })
    }

    /// Full clamped knot vector with repeated boundary knots.
    fn expanded_knots(&self) -> Vec<f64> {
        let b = &self.breaks.knots;
        let (lo, hi) = self.breaks.span();
        let mut t = Vec::with_capacity(self.dim + self.degree + 1);
        for _ in 0..=self.degree {
            t.push(lo);
        }
        t.extend_from_slice(&b[1..b.len() - 1]);
        for _ in 0..=self.degree {
            t.push(hi);
        }
        t
    }

    /// All `dim` basis values at `x` by the local de Boor triangle.
    pub fn eval_row(&self, x: f64) -> Result<Vec<f64>, SmoothError> {
        let (lo, hi) = self.breaks.span();
        if x < lo || x > hi {
            return Err(SmoothError::OutsideSpan { value: x, lo, hi });
        }
        let t = self.expanded_knots();
        let p = self.degree;
        let n = self.dim;
        // knot span index: t[span] <= x < t[span+1],末 span handled
        let mut span = p;
        while span < n - 1 && x >= t[span + 1] {
            span += 1;
        }

        // triangular recursion for the p+1 nonzero functions on this span
        let mut vals = vec![0.0; p + 1];
        vals[0] = 1.0;
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let term = if denom != 0.0 { vals[r] / denom } else { 0.0 };
                vals[r] = saved + right[r + 1] * term;
                saved = left[j - r] * term;
            }
            vals[j] = saved;
        }

        let mut row = vec![0.0; n];
        for (r, &v) in vals.iter().enumerate() {
            let idx = span - p + r;
            if idx < n {
                row[idx] = v;
            }
        }
        Ok(row)
    }
}

/// Builds the `dim` x `dim` matrix D'D where D takes order-th differences
/// of a coefficient vector.
pub fn difference_penalty(dim: usize, order: usize) -> Result<Array2<f64>, SmoothError> {
    if order >= dim {
        return Err(SmoothError::BadPenaltyOrder { order, dim });
    }
    let d = difference_matrix(dim, order);
    let mut s = Array2::zeros((dim, dim));
    ndarray::linalg::general_mat_mul(1.0, &d.t(), &d, 0.0, &mut s);
    Ok(s)
}

/// The (dim - order) x dim matrix of order-th differences.
pub fn difference_matrix(dim: usize, order: usize) -> Array2<f64> {
    let mut d = Array2::eye(dim);
    for _ in 0..order {
        let rows = d.nrows() - 1;
        let mut next = Array2::zeros((rows, dim));
        for i in 0..rows {
            for j in 0..dim {
                next[[i, j]] = d[[i + 1, j]] - d[[i, j]];
            }
        }
        d = next;
    }
    d
}

/// Hard cap on tensor basis size.
pub const TENSOR_DIM_LIMIT: usize = 400;

/// Row-wise Kronecker product of two realized margins with one penalty
/// per direction: S_a (x) I and I (x) S_b.
pub fn tensor_product(
    name: &str,
    margin_a: &RealizedSmooth,
    margin_b: &RealizedSmooth,
) -> Result<RealizedSmooth, SmoothError> {
    let t = margin_a.basis.nrows();
    if margin_b.basis.nrows() != t {
        return Err(SmoothError::Invalid(
            "tensor margins must be realized on the same rows".into(),
        ));
    }
    if margin_a.constraint.is_some() || margin_b.constraint.is_some() {
        return Err(SmoothError::Invalid(
            "tensor margins must be uncentered".into(),
        ));
    }
    let da = margin_a.dim();
    let db = margin_b.dim();
    let dim = da * db;
    if dim > TENSOR_DIM_LIMIT {
        return Err(SmoothError::TensorTooLarge { dim, max: TENSOR_DIM_LIMIT });
    }

    let mut basis = Array2::zeros((t, dim));
    for i in 0..t {
        for a in 0..da {
            let va = margin_a.basis[[i, a]];
            if va == 0.0 {
                continue;
            }
            for b in 0..db {
                basis[[i, a * db + b]] = va * margin_b.basis[[i, b]];
            }
        }
    }

    let sa = &margin_a.penalties[0];
    let sb = &margin_b.penalties[0];
    let mut pen_a = Array2::zeros((dim, dim));
    let mut pen_b = Array2::zeros((dim, dim));
    for a1 in 0..da {
        for a2 in 0..da {
            let s = sa[[a1, a2]];
            if s != 0.0 {
                for b in 0..db {
                    pen_a[[a1 * db + b, a2 * db + b]] = s;
                }
            }
        }
    }
    for a in 0..da {
        for b1 in 0..db {
            for b2 in 0..db {
                let s = sb[[b1, b2]];
                if s != 0.0 {
                    pen_b[[a * db + b1, a * db + b2]] = s;
                }
            }
        }
    }

    let mut covariates = margin_a.covariates.clone();
    covariates.extend(margin_b.covariates.clone());
    let mut margins = margin_a.margins.clone();
    margins.extend(margin_b.margins.clone());

    Ok(RealizedSmooth {
        name: name.to_string(),
        covariates,
        margins,
        basis,
        penalties: vec![pen_a, pen_b],
        constraint: None,
    })
}

/// Householder basis of the orthogonal complement of `c`; columns span
/// `{v : c'v = 0}`.
pub fn nullspace_of_vector(c: &Array1<f64>) -> Array2<f64> {
    let d = c.len();
    let norm = c.dot(c).sqrt();
    assert!(norm > 0.0, "cannot build a constraint for a zero vector");
    let mut v = c.clone();
    let sign = if c[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign * norm;
    let vtv = v.dot(&v);
    // columns 1..d of H = I - 2 v v' / v'v
    let mut z = Array2::zeros((d, d - 1));
    for col in 1..d {
        for row in 0..d {
            let h = if row == col { 1.0 } else { 0.0 };
            z[[row, col - 1]] = h - 2.0 * v[row] * v[col] / vtv;
        }
    }
    z
}

/// Reparameterizes the smooth onto the subspace where fitted values sum
/// to zero over the training rows; penalties transform congruently.
pub fn center_constraint(smooth: &RealizedSmooth) -> RealizedSmooth {
    assert!(smooth.constraint.is_none(), "smooth already centered");
    let colsums = smooth.basis.sum_axis(ndarray::Axis(0));
    let z = nullspace_of_vector(&colsums);
    let basis = smooth.basis.dot(&z);
    let penalties = smooth
        .penalties
        .iter()
        .map(|s| {
            let sz = s.dot(&z);
            let mut out = Array2::zeros((z.ncols(), z.ncols()));
            ndarray::linalg::general_mat_mul(1.0, &z.t(), &sz, 0.0, &mut out);
            // symmetrize against roundoff
            let tr = out.t().to_owned();
            (&out + &tr) / 2.0
        })
        .collect();
    RealizedSmooth {
        name: smooth.name.clone(),
        covariates: smooth.covariates.clone(),
        margins: smooth.margins.clone(),
        basis,
        penalties,
        constraint: Some(z),
    }
}

/// Realizes a smooth spec on training columns (uncentered).
pub fn realize(spec: &SmoothSpec, columns: &[&[f64]]) -> Result<RealizedSmooth, SmoothError> {
    spec.validate()?;
    if columns.len() != spec.covariates.len() {
        return Err(SmoothError::Invalid(format!(
            "smooth '{}' expects {} column(s)",
            spec.name,
            spec.covariates.len()
        )));
    }
    match &spec.kind {
        SmoothKind::Crs => {
            let basis = crs_basis(&spec.name, &spec.covariates[0], columns[0], spec.dims[0])?;
            Ok(basis)
        }
        SmoothKind::PSpline => {
            bspline_smooth(&spec.name, &spec.covariates[0], columns[0], spec.dims[0], 3, spec.penalty_order)
        }
        SmoothKind::Tensor { margins } => {
            let a = realize_margin(margins[0], &spec.covariates[0], columns[0], spec.dims[0], spec.penalty_order)?;
            let b = realize_margin(margins[1], &spec.covariates[1], columns[1], spec.dims[1], spec.penalty_order)?;
            tensor_product(&spec.name, &a, &b)
        }
    }
}

fn realize_margin(
    kind: MarginKind,
    covariate: &str,
    x: &[f64],
    dim: usize,
    penalty_order: usize,
) -> Result<RealizedSmooth, SmoothError> {
    match kind {
        MarginKind::Crs => crs_basis(covariate, covariate, x, dim),
        MarginKind::BSpline => bspline_smooth(covariate, covariate, x, dim, 3, penalty_order),
    }
}

/// Natural cubic regression spline realized on a column, knots at the
/// quantiles of the distinct values.
pub fn crs_basis(name: &str, covariate: &str, x: &[f64], dim: usize) -> Result<RealizedSmooth, SmoothError> {
    if dim < 3 {
        return Err(SmoothError::DimTooSmall { dim, min: 3 });
    }
    let knots = quantile_knots(x, dim, covariate)?;
    let crs = CrsBasis::new(knots)?;
    let mut basis = Array2::zeros((x.len(), dim));
    for (i, &v) in x.iter().enumerate() {
        let row = crs.eval_row(v)?;
        for (j, b) in row.into_iter().enumerate() {
            basis[[i, j]] = b;
        }
    }
    let penalty = crs.penalty();
    Ok(RealizedSmooth {
        name: name.to_string(),
        covariates: vec![covariate.to_string()],
        margins: vec![MarginBasis::Crs(crs)],
        basis,
        penalties: vec![penalty],
        constraint: None,
    })
}

/// B-spline basis over even knots spanning the data with a difference
/// penalty on the coefficients.
pub fn bspline_smooth(
    name: &str,
    covariate: &str,
    x: &[f64],
    dim: usize,
    degree: usize,
    penalty_order: usize,
) -> Result<RealizedSmooth, SmoothError> {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bsp = BSplineBasis::new(lo, hi, dim, degree, penalty_order)?;
    let basis = bspline_design(&bsp, x)?;
    let penalty = difference_penalty(dim, penalty_order)?;
    Ok(RealizedSmooth {
        name: name.to_string(),
        covariates: vec![covariate.to_string()],
        margins: vec![MarginBasis::BSpline(bsp)],
        basis,
        penalties: vec![penalty],
        constraint: None,
    })
}

/// Evaluates the full design matrix of a B-spline basis on a column.
pub fn bspline_design(basis: &BSplineBasis, x: &[f64]) -> Result<Array2<f64>, SmoothError> {
    let mut out = Array2::zeros((x.len(), basis.dim));
    for (i, &v) in x.iter().enumerate() {
        let row = basis.eval_row(v)?;
        for (j, b) in row.into_iter().enumerate() {
            out[[i, j]] = b;
        }
    }
    Ok(out)
}
