//! Design-matrix construction for structured additive predictors.
//!
//! Every smooth, spatial, grouped, or linear model term is reduced to the
//! same shape: a basis matrix, a quadratic penalty, and the metadata needed
//! to rebuild basis rows at new covariate values. Identifiability against
//! the intercept is handled by reparametrizing blocks onto the orthogonal
//! complement of their column-sum constraint.

use crate::error::{Error, Result};
use crate::linalg::{null_space_of_rows, rank_from_eigenvalues, symmetric_eigenvalues};
use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

/// Relative eigenvalue threshold used when counting a penalty's rank.
const RANK_TOL: f64 = 1e-8;

/// Undirected region adjacency with validated, deduplicated edges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjacencyGraph {
    n_regions: usize,
    edges: Vec<(usize, usize)>,
}

impl AdjacencyGraph {
    /// Build a graph on `n_regions` nodes. Self-loops and out-of-range
    /// indices are rejected; duplicate edges (in either order) collapse.
    pub fn new(n_regions: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_regions == 0 {
            return Err(Error::InvalidAdjacency("graph needs at least one region".into()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidAdjacency(format!("self-loop at region {a}")));
            }
            if a >= n_regions || b >= n_regions {
                return Err(Error::InvalidAdjacency(format!(
                    "edge ({a}, {b}) references a region outside 0..{n_regions}"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self { n_regions, edges: normalized })
    }

    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Graph Laplacian: degree on the diagonal, -1 per neighbor pair.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut k = Array2::<f64>::zeros((self.n_regions, self.n_regions));
        for &(a, b) in &self.edges {
            k[(a, a)] += 1.0;
            k[(b, b)] += 1.0;
            k[(a, b)] -= 1.0;
            k[(b, a)] -= 1.0;
        }
        k
    }

    /// Connected components as sorted lists of region indices.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n_regions).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            let mut root = i;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = i;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for &(a, b) in &self.edges {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; self.n_regions];
        for i in 0..self.n_regions {
            let r = find(&mut parent, i);
            match root_of[r] {
                Some(g) => groups[g].push(i),
                None => {
                    root_of[r] = Some(groups.len());
                    groups.push(vec![i]);
                }
            }
        }
        groups
    }
}

/// How to rebuild a block's raw basis rows at new covariate values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TermRecipe {
    /// Spline basis over a stored knot vector.
    Pspline { knots: Vec<f64>, degree: usize },
    /// Spline basis row-scaled by an interacting covariate.
    VaryingPspline { knots: Vec<f64>, degree: usize },
    /// One-hot region membership.
    Regions { n_regions: usize },
    /// One-hot group membership.
    Groups { n_groups: usize },
    /// Covariate columns used as-is.
    Linear { n_columns: usize },
}

/// Covariate values at which a block's basis should be evaluated.
#[derive(Debug, Clone)]
pub enum BlockInput {
    /// One continuous covariate (spline terms).
    Continuous(Array1<f64>),
    /// Interacting covariate plus smooth covariate (varying coefficients).
    Varying { by: Array1<f64>, x: Array1<f64> },
    /// Region or group membership indices.
    Levels(Vec<usize>),
    /// Raw columns for a linear term.
    Columns(Array2<f64>),
}

/// One model term in basis-plus-penalty form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignBlock {
    /// Human-readable term label, unique within its predictor.
    pub label: String,
    /// Evaluated (possibly constrained) basis at the training covariates.
    /// Not serialized; rebuild through `basis_at` when needed.
    #[serde(skip)]
    pub basis: Array2<f64>,
    /// Symmetric positive semi-definite penalty on the coefficients.
    pub penalty: Array2<f64>,
    /// Numerical rank of `penalty`.
    pub penalty_rank: usize,
    /// Inverse-gamma shape for this block's smoothing variance;
    /// `None` when the block is unpenalized (flat prior).
    pub hyper_a: Option<f64>,
    /// Inverse-gamma scale for this block's smoothing variance;
    /// `None` when the block is unpenalized (flat prior).
    pub hyper_b: Option<f64>,
    /// Reparametrization applied to the raw basis (raw columns x kept columns).
    pub constraint: Option<Array2<f64>>,
    /// Recipe for re-evaluating the raw basis at new covariates.
    pub recipe: TermRecipe,
}

impl DesignBlock {
    /// Number of free coefficients in the (possibly constrained) block.
    pub fn n_coef(&self) -> usize {
        self.penalty.nrows()
    }

    /// Whether the block carries a proper penalty and hence a smoothing
    /// variance parameter. Linear terms have a zero penalty and do not.
    pub fn is_penalized(&self) -> bool {
        self.penalty_rank > 0
    }

    /// Validate internal consistency; used by constructors and tests.
    pub fn validate(&self) -> Result<()> {
        let l = self.n_coef();
        if self.penalty.ncols() != l {
            return Err(Error::InvalidModel(format!("penalty of `{}` is not square", self.label)));
        }
        if self.basis.len() > 0 && self.basis.ncols() != l {
            return Err(Error::DimensionMismatch {
                context: format!("basis columns of `{}`", self.label),
                expected: l,
                got: self.basis.ncols(),
            });
        }
        if self.basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(format!("basis of `{}` has non-finite entries", self.label)));
        }
        let scale = self.penalty.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..l {
            for j in (i + 1)..l {
                if (self.penalty[(i, j)] - self.penalty[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidModel(format!("penalty of `{}` is not symmetric", self.label)));
                }
            }
        }
        Ok(())
    }

    /// Evaluate the block's basis at new covariate values, applying the
    /// stored constraint transform. Spline inputs outside the training
    /// range are clamped to it and reported through `warnings`.
    pub fn basis_at(&self, input: &BlockInput, warnings: &mut Vec<String>) -> Result<Array2<f64>> {
        let raw = match (&self.recipe, input) {
            (TermRecipe::Pspline { knots, degree }, BlockInput::Continuous(x)) => {
                spline_basis_rows(&x.view(), knots, *degree, &self.label, warnings)?
            }
            (TermRecipe::VaryingPspline { knots, degree }, BlockInput::Varying { by, x }) => {
                if by.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        context: format!("varying inputs of `{}`", self.label),
                        expected: x.len(),
                        got: by.len(),
                    });
                }
                let mut b = spline_basis_rows(&x.view(), knots, *degree, &self.label, warnings)?;
                for (mut row, &scale) in b.axis_iter_mut(Axis(0)).zip(by.iter()) {
                    row *= scale;
                }
                b
            }
            (TermRecipe::Regions { n_regions }, BlockInput::Levels(idx)) => {
                one_hot(idx, *n_regions, &self.label)?
            }
            (TermRecipe::Groups { n_groups }, BlockInput::Levels(idx)) => {
                one_hot(idx, *n_groups, &self.label)?
            }
            (TermRecipe::Linear { n_columns }, BlockInput::Columns(cols)) => {
                if cols.ncols() != *n_columns {
                    return Err(Error::DimensionMismatch {
                        context: format!("linear columns of `{}`", self.label),
                        expected: *n_columns,
                        got: cols.ncols(),
                    });
                }
                cols.clone()
            }
            _ => {
                return Err(Error::InvalidArgument {
                    name: "input".into(),
                    reason: format!("input kind does not match the recipe of `{}`", self.label),
                })
            }
        };
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "input".into(),
                reason: format!("non-finite covariate for `{}`", self.label),
            });
        }
        Ok(match &self.constraint {
            Some(z) => raw.dot(z),
            None => raw,
        })
    }
}

fn one_hot(idx: &[usize], n_levels: usize, label: &str) -> Result<Array2<f64>> {
    let mut b = Array2::<f64>::zeros((idx.len(), n_levels));
    for (row, &level) in idx.iter().enumerate() {
        if level >= n_levels {
            return Err(Error::InvalidData {
                row,
                reason: format!("level {level} of `{label}` outside 0..{n_levels}"),
            });
        }
        b[(row, level)] = 1.0;
    }
    Ok(b)
}

/// Equidistant knot vector covering `[lo, hi]` (padded by 1e-6 of the range
/// on each side) with `degree` exterior knots per side.
pub fn equidistant_knots(x_min: f64, x_max: f64, n_basis: usize, degree: usize) -> Vec<f64> {
    let pad = 1e-6 * (x_max - x_min);
    let lo = x_min - pad;
    let hi = x_max + pad;
    let n_intervals = n_basis - degree;
    let h = (hi - lo) / n_intervals as f64;
    (0..=(n_basis + degree))
        .map(|j| lo + (j as f64 - degree as f64) * h)
        .collect()
}

/// The `degree + 1` basis values that are non-zero at `x`, plus the index
/// of the first of them. Standard triangular B-spline evaluation.
fn spline_nonzero(x: f64, knots: &[f64], degree: usize) -> (usize, Vec<f64>) {
    let n_basis = knots.len() - degree - 1;
    // Locate the knot span, treating the right domain edge as inclusive.
    let mut span = degree;
    while span < n_basis - 1 && x >= knots[span + 1] {
        span += 1;
    }
    let mut vals = vec![0.0; degree + 1];
    vals[0] = 1.0;
    for j in 1..=degree {
        let mut saved = 0.0;
        for r in 0..j {
            let left = x - knots[span + 1 + r - j];
            let right = knots[span + 1 + r] - x;
            let tmp = vals[r] / (right + left);
            vals[r] = saved + right * tmp;
            saved = left * tmp;
        }
        vals[j] = saved;
    }
    (span - degree, vals)
}

/// Basis rows over a stored knot vector, clamping out-of-range inputs to
/// the training domain and counting them into `warnings`.
fn spline_basis_rows(
    x: &ArrayView1<f64>,
    knots: &[f64],
    degree: usize,
    label: &str,
    warnings: &mut Vec<String>,
) -> Result<Array2<f64>> {
    let n_basis = knots.len() - degree - 1;
    let lo = knots[degree];
    let hi = knots[n_basis];
    let mut clamped = 0usize;
    let mut b = Array2::<f64>::zeros((x.len(), n_basis));
    for (row, &xi) in x.iter().enumerate() {
        if !xi.is_finite() {
            return Err(Error::InvalidData {
                row,
                reason: format!("non-finite covariate value for `{label}`"),
            });
        }
        let xc = if xi < lo {
            clamped += 1;
            lo
        } else if xi > hi {
            clamped += 1;
            hi
        } else {
            xi
        };
        let (start, vals) = spline_nonzero(xc, knots, degree);
        for (offset, v) in vals.iter().enumerate() {
            b[(row, start + offset)] = *v;
        }
    }
    if clamped > 0 {
        warnings.push(format!(
            "{clamped} covariate value(s) outside the training range of `{label}` were clamped"
        ));
    }
    Ok(b)
}

/// B-spline basis matrix on equidistant knots spanning the data range.
/// Rows sum to one; each row has at most `degree + 1` non-zero entries.
pub fn bspline_basis(x: &ArrayView1<f64>, n_basis: usize, degree: usize) -> Result<Array2<f64>> {
    if n_basis < degree + 1 {
        return Err(Error::InvalidArgument {
            name: "n_basis".into(),
            reason: format!("need at least degree + 1 = {} basis functions", degree + 1),
        });
    }
    let knots = knots_for_data(x, n_basis, degree, "bspline")?;
    let mut unused = Vec::new();
    spline_basis_rows(x, &knots, degree, "bspline", &mut unused)
}

fn knots_for_data(
    x: &ArrayView1<f64>,
    n_basis: usize,
    degree: usize,
    term: &str,
) -> Result<Vec<f64>> {
    for (row, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidData {
                row,
                reason: format!("non-finite covariate value for `{term}`"),
            });
        }
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in x.iter() {
        min = min.min(v);
        max = max.max(v);
    }
    if !(max > min) {
        return Err(Error::DegenerateCovariate {
            term: term.into(),
            reason: "fewer than two distinct values".into(),
        });
    }
    Ok(equidistant_knots(min, max, n_basis, degree))
}

/// Difference penalty `D^T D` for a coefficient sequence of length
/// `n_basis`, with `D` the `order`-th forward-difference matrix.
pub fn difference_penalty(n_basis: usize, order: usize) -> Result<Array2<f64>> {
    if order == 0 || n_basis <= order {
        return Err(Error::InvalidArgument {
            name: "order".into(),
            reason: format!("difference order must be in 1..{n_basis}"),
        });
    }
    // Binomial coefficients with alternating signs, e.g. [1, -2, 1].
    let mut coef = vec![0.0_f64; order + 1];
    let mut binom = 1.0;
    for (j, c) in coef.iter_mut().enumerate() {
        *c = if (order - j) % 2 == 0 { binom } else { -binom };
        binom = binom * (order - j) as f64 / (j + 1) as f64;
    }
    let rows = n_basis - order;
    let mut d = Array2::<f64>::zeros((rows, n_basis));
    for i in 0..rows {
        for (j, c) in coef.iter().enumerate() {
            d[(i, i + j)] = *c;
        }
    }
    Ok(d.t().dot(&d))
}

fn penalty_rank(penalty: &Array2<f64>) -> usize {
    if penalty.iter().all(|v| *v == 0.0) {
        return 0;
    }
    let eigs = symmetric_eigenvalues(&penalty.view());
    rank_from_eigenvalues(&eigs, RANK_TOL)
}

/// Options shared by the spline-based term builders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsplineOptions {
    pub n_basis: usize,
    pub degree: usize,
    pub diff_order: usize,
    pub hyper_a: f64,
    pub hyper_b: f64,
}

impl Default for PsplineOptions {
    fn default() -> Self {
        Self { n_basis: 20, degree: 3, diff_order: 2, hyper_a: 0.01, hyper_b: 0.01 }
    }
}

/// Penalized spline term: B-spline basis, difference penalty, sum-to-zero
/// reparametrization for identifiability against the intercept.
pub fn build_pspline_term(label: &str, x: &ArrayView1<f64>, opts: &PsplineOptions) -> Result<DesignBlock> {
    if opts.n_basis < opts.degree + 1 {
        return Err(Error::InvalidArgument {
            name: "n_basis".into(),
            reason: format!("need at least degree + 1 = {} basis functions", opts.degree + 1),
        });
    }
    let knots = knots_for_data(x, opts.n_basis, opts.degree, label)?;
    let mut unused = Vec::new();
    let basis = spline_basis_rows(x, &knots, opts.degree, label, &mut unused)?;
    let penalty = difference_penalty(opts.n_basis, opts.diff_order)?;
    let block = DesignBlock {
        label: label.to_string(),
        basis,
        penalty_rank: penalty_rank(&penalty),
        penalty,
        hyper_a: Some(opts.hyper_a),
        hyper_b: Some(opts.hyper_b),
        constraint: None,
        recipe: TermRecipe::Pspline { knots, degree: opts.degree },
    };
    apply_sum_to_zero_constraint(block)
}

/// Varying-coefficient term `by * f(x)`: a spline basis in `x` row-scaled
/// by the interacting covariate, sharing the spline's difference penalty.
pub fn build_varying_term(
    label: &str,
    by: &ArrayView1<f64>,
    x: &ArrayView1<f64>,
    opts: &PsplineOptions,
) -> Result<DesignBlock> {
    if by.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: format!("varying inputs of `{label}`"),
            expected: x.len(),
            got: by.len(),
        });
    }
    for (row, v) in by.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidData {
                row,
                reason: format!("non-finite interacting covariate for `{label}`"),
            });
        }
    }
    if by.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateCovariate {
            term: label.into(),
            reason: "interacting covariate is identically zero".into(),
        });
    }
    let knots = knots_for_data(x, opts.n_basis, opts.degree, label)?;
    let mut unused = Vec::new();
    let mut basis = spline_basis_rows(x, &knots, opts.degree, label, &mut unused)?;
    for (mut row, &scale) in basis.axis_iter_mut(Axis(0)).zip(by.iter()) {
        row *= scale;
    }
    let penalty = difference_penalty(opts.n_basis, opts.diff_order)?;
    let block = DesignBlock {
        label: label.to_string(),
        basis,
        penalty_rank: penalty_rank(&penalty),
        penalty,
        hyper_a: Some(opts.hyper_a),
        hyper_b: Some(opts.hyper_b),
        constraint: None,
        recipe: TermRecipe::VaryingPspline { knots, degree: opts.degree },
    };
    apply_sum_to_zero_constraint(block)
}

/// Spatial term over discrete regions: one-hot basis with the graph
/// Laplacian as penalty and a sum-to-zero constraint per connected
/// component. Regions without observations are reported as warnings.
pub fn build_gmrf_term(
    label: &str,
    region_idx: &[usize],
    graph: &AdjacencyGraph,
    hyper_a: f64,
    hyper_b: f64,
    warnings: &mut Vec<String>,
) -> Result<DesignBlock> {
    let n_regions = graph.n_regions();
    let basis = one_hot(region_idx, n_regions, label)?;
    let col_sums = basis.sum_axis(Axis(0));
    let empty: Vec<usize> = (0..n_regions).filter(|&r| col_sums[r] == 0.0).collect();
    if !empty.is_empty() {
        warnings.push(format!("regions without observations in `{label}`: {empty:?}"));
    }
    let components = graph.connected_components();
    let mut rows: Vec<Array1<f64>> = Vec::new();
    for comp in &components {
        let mut c = Array1::<f64>::zeros(n_regions);
        let mut total = 0.0;
        for &r in comp {
            c[r] = col_sums[r];
            total += col_sums[r];
        }
        if total > 0.0 {
            rows.push(c);
        } else {
            warnings.push(format!(
                "component {comp:?} of `{label}` has no observations; its sum-to-zero constraint is skipped"
            ));
        }
    }
    let penalty = graph.laplacian();
    let block = DesignBlock {
        label: label.to_string(),
        basis,
        penalty_rank: penalty_rank(&penalty),
        penalty,
        hyper_a: Some(hyper_a),
        hyper_b: Some(hyper_b),
        constraint: None,
        recipe: TermRecipe::Regions { n_regions },
    };
    if rows.is_empty() {
        return Ok(block);
    }
    let mut c = Array2::<f64>::zeros((rows.len(), n_regions));
    for (i, row) in rows.iter().enumerate() {
        c.row_mut(i).assign(row);
    }
    constrain_with(block, &c)
}

/// Group-level random intercepts: one-hot basis with identity penalty.
/// The identity penalty has full rank, so no constraint is needed.
pub fn build_random_intercept(
    label: &str,
    group_idx: &[usize],
    n_groups: usize,
    hyper_a: f64,
    hyper_b: f64,
) -> Result<DesignBlock> {
    if n_groups == 0 {
        return Err(Error::InvalidArgument {
            name: "n_groups".into(),
            reason: "need at least one group".into(),
        });
    }
    let basis = one_hot(group_idx, n_groups, label)?;
    Ok(DesignBlock {
        label: label.to_string(),
        basis,
        penalty: Array2::eye(n_groups),
        penalty_rank: n_groups,
        hyper_a: Some(hyper_a),
        hyper_b: Some(hyper_b),
        constraint: None,
        recipe: TermRecipe::Groups { n_groups },
    })
}

/// Default inverse-gamma hyperparameters for random intercepts.
pub const RANDOM_INTERCEPT_HYPER: (f64, f64) = (1.0, 0.005);

/// Linear term: covariate columns used directly, zero penalty, flat prior.
pub fn build_linear_term(label: &str, columns: &Array2<f64>) -> Result<DesignBlock> {
    if columns.ncols() == 0 {
        return Err(Error::InvalidArgument {
            name: "columns".into(),
            reason: "linear term needs at least one column".into(),
        });
    }
    for (row, v) in columns.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidData {
                row: row / columns.ncols(),
                reason: format!("non-finite covariate value for `{label}`"),
            });
        }
    }
    for col in 0..columns.ncols() {
        let c = columns.column(col);
        let first = c.first().copied().unwrap_or(0.0);
        if c.len() > 1 && c.iter().all(|v| *v == first) {
            return Err(Error::DegenerateCovariate {
                term: label.into(),
                reason: format!("column {col} is constant; absorb it into the intercept"),
            });
        }
    }
    let l = columns.ncols();
    Ok(DesignBlock {
        label: label.to_string(),
        basis: columns.clone(),
        penalty: Array2::zeros((l, l)),
        penalty_rank: 0,
        hyper_a: None,
        hyper_b: None,
        constraint: None,
        recipe: TermRecipe::Linear { n_columns: l },
    })
}

/// Reparametrize a block onto the orthogonal complement of its basis
/// column sums, so the fitted effect sums to zero over the training data.
pub fn apply_sum_to_zero_constraint(block: DesignBlock) -> Result<DesignBlock> {
    if block.constraint.is_some() {
        return Err(Error::InvalidModel(format!(
            "block `{}` already carries a constraint",
            block.label
        )));
    }
    let col_sums = block.basis.sum_axis(Axis(0));
    let norm = col_sums.dot(&col_sums).sqrt();
    if norm < 1e-12 {
        return Err(Error::DegenerateCovariate {
            term: block.label.clone(),
            reason: "basis column sums vanish; constraint is degenerate".into(),
        });
    }
    let c = col_sums.insert_axis(Axis(0));
    constrain_with(block, &c)
}

fn constrain_with(block: DesignBlock, c: &Array2<f64>) -> Result<DesignBlock> {
    let z = null_space_of_rows(&c.view());
    let basis = block.basis.dot(&z);
    let penalty = z.t().dot(&block.penalty).dot(&z);
    // Re-symmetrize to remove rounding drift from the two-sided product.
    let penalty = (&penalty + &penalty.t()) * 0.5;
    let out = DesignBlock {
        label: block.label,
        basis,
        penalty_rank: penalty_rank(&penalty),
        penalty,
        hyper_a: block.hyper_a,
        hyper_b: block.hyper_b,
        constraint: Some(z),
        recipe: block.recipe,
    };
    out.validate()?;
    let new_sums = out.basis.sum_axis(Axis(0));
    debug_assert!(
        new_sums.iter().all(|v| v.abs() < 1e-8),
        "constrained basis columns must sum to zero"
    );
    Ok(out)
}
