//! Convergence diagnostics and posterior summaries: split-chain potential
//! scale reduction, rank-normalized bulk effective sample size, quantile
//! summaries, and posterior prediction on new covariate values.

use crate::design::BlockInput;
use crate::engine::ChainDraws;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::special::{logistic, std_normal_quantile};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

/// Linear-interpolation sample quantile (the common "type 7" convention)
/// of an ascending-sorted slice.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean_of(x: &ArrayView1<f64>) -> f64 {
    x.sum() / x.len() as f64
}

fn sample_var(x: &ArrayView1<f64>, mean: f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (x.len() - 1) as f64
}

/// Split each chain into halves (dropping the middle draw of odd-length
/// chains) so within-chain drift shows up as between-chain disagreement.
fn split_halves(chains: &[ArrayView1<f64>]) -> Vec<Array1<f64>> {
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        let n = c.len();
        let half = n / 2;
        out.push(c.slice(ndarray::s![..half]).to_owned());
        out.push(c.slice(ndarray::s![n - half..]).to_owned());
    }
    out
}

/// Between/within variance decomposition over equal-length sequences:
/// returns (within W, pooled-variance estimate var_plus).
fn variance_decomposition(seqs: &[Array1<f64>]) -> (f64, f64) {
    let m = seqs.len() as f64;
    let n = seqs[0].len() as f64;
    let means: Vec<f64> = seqs.iter().map(|s| mean_of(&s.view())).collect();
    let w = seqs
        .iter()
        .zip(&means)
        .map(|(s, &mu)| sample_var(&s.view(), mu))
        .sum::<f64>()
        / m;
    let grand = means.iter().sum::<f64>() / m;
    let b_over_n = if seqs.len() > 1 {
        means.iter().map(|&mu| (mu - grand) * (mu - grand)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let var_plus = (n - 1.0) / n * w + b_over_n;
    (w, var_plus)
}

/// Split-chain potential scale reduction factor. Values near 1 indicate
/// the chains agree; all-constant input returns exactly 1.
pub fn split_rhat(chains: &[ArrayView1<f64>]) -> f64 {
    if chains.is_empty() || chains[0].len() < 4 {
        return f64::NAN;
    }
    let halves = split_halves(chains);
    let (w, var_plus) = variance_decomposition(&halves);
    if w <= 0.0 {
        return if var_plus <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    (var_plus / w).sqrt()
}

/// Average tie-adjusted fractional ranks mapped through the normal
/// quantile function, pooled across all sequences.
fn rank_normalize(seqs: &[Array1<f64>]) -> Vec<Array1<f64>> {
    let total: usize = seqs.iter().map(|s| s.len()).sum();
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(total);
    for (j, s) in seqs.iter().enumerate() {
        for i in 0..s.len() {
            order.push((j, i));
        }
    }
    order.sort_by(|a, b| seqs[a.0][a.1].partial_cmp(&seqs[b.0][b.1]).unwrap());
    let mut z: Vec<Array1<f64>> = seqs.iter().map(|s| Array1::zeros(s.len())).collect();
    let mut start = 0usize;
    while start < total {
        let mut end = start + 1;
        let v = seqs[order[start].0][order[start].1];
        while end < total && seqs[order[end].0][order[end].1] == v {
            end += 1;
        }
        // 1-based average rank of the tie run [start, end).
        let rank = (start + end + 1) as f64 / 2.0;
        let score = std_normal_quantile((rank - 0.375) / (total as f64 + 0.25));
        for &(j, i) in &order[start..end] {
            z[j][i] = score;
        }
        start = end;
    }
    z
}

/// Biased lag-`t` autocovariance (normalized by the full length).
fn autocov(x: &Array1<f64>, mean: f64, t: usize) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n - t {
        s += (x[i] - mean) * (x[i + t] - mean);
    }
    s / n as f64
}

/// Rank-normalized bulk effective sample size across chains, combining
/// within-chain autocorrelation with between-chain disagreement and
/// truncating the correlation sum at the first non-positive monotone pair.
pub fn ess_bulk(chains: &[ArrayView1<f64>]) -> f64 {
    if chains.is_empty() || chains[0].len() < 4 {
        return f64::NAN;
    }
    let m = chains.len();
    let total: usize = chains.iter().map(|c| c.len()).sum();
    let first = chains[0][0];
    if chains.iter().all(|c| c.iter().all(|v| *v == first)) {
        return total as f64;
    }
    if chains.iter().all(|c| c.iter().all(|v| *v == c[0])) {
        // Each chain frozen at its own value.
        return m as f64;
    }
    let halves = split_halves(chains);
    let z = rank_normalize(&halves);
    let (w, var_plus) = variance_decomposition(&z);
    if var_plus <= 0.0 {
        return total as f64;
    }
    let n = z[0].len();
    let means: Vec<f64> = z.iter().map(|s| mean_of(&s.view())).collect();
    let mean_autocov = |t: usize| -> f64 {
        z.iter().zip(&means).map(|(s, &mu)| autocov(s, mu, t)).sum::<f64>() / z.len() as f64
    };
    let rho = |t: usize| 1.0 - (w - mean_autocov(t)) / var_plus;

    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0usize;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        t += 2;
    }
    let used: usize = z.iter().map(|s| s.len()).sum();
    (used as f64 / tau.max(f64::EPSILON)).min(total as f64)
}

/// Posterior summary of one stored parameter.
#[derive(Debug, Clone)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub rhat: f64,
    pub ess_bulk: f64,
}

/// Draws of one named parameter, per chain.
pub fn per_chain_column(chains: &[ChainDraws], name: &str) -> Result<Vec<Array1<f64>>> {
    let idx = chains
        .first()
        .and_then(|c| c.parameter_names.iter().position(|n| n == name))
        .ok_or_else(|| Error::InvalidArgument {
            name: "parameter".into(),
            reason: format!("`{name}` is not a stored parameter"),
        })?;
    Ok(chains.iter().map(|c| c.values.column(idx).to_owned()).collect())
}

/// All chains' draws of one named parameter concatenated.
pub fn pooled_column(chains: &[ChainDraws], name: &str) -> Result<Array1<f64>> {
    let per = per_chain_column(chains, name)?;
    let views: Vec<ArrayView1<f64>> = per.iter().map(|a| a.view()).collect();
    Ok(ndarray::concatenate(Axis(0), &views).expect("column lengths agree"))
}

/// Summarize every stored parameter: pooled mean, standard deviation,
/// equal-tailed interval of mass `ci_prob`, split-chain scale reduction,
/// and bulk effective sample size.
pub fn summarize(chains: &[ChainDraws], ci_prob: f64) -> Result<Vec<ParamSummary>> {
    if chains.is_empty() {
        return Err(Error::InvalidArgument {
            name: "chains".into(),
            reason: "no chains to summarize".into(),
        });
    }
    let names = chains[0].parameter_names.clone();
    let alpha = (1.0 - ci_prob) / 2.0;
    let mut out = Vec::with_capacity(names.len());
    for (idx, name) in names.iter().enumerate() {
        let per: Vec<Array1<f64>> = chains.iter().map(|c| c.values.column(idx).to_owned()).collect();
        let views: Vec<ArrayView1<f64>> = per.iter().map(|a| a.view()).collect();
        let pooled = ndarray::concatenate(Axis(0), &views).expect("column lengths agree");
        let mean = mean_of(&pooled.view());
        let sd = sample_var(&pooled.view(), mean).sqrt();
        let mut sorted = pooled.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push(ParamSummary {
            name: name.clone(),
            mean,
            sd,
            ci_lower: quantile_type7(&sorted, alpha),
            ci_upper: quantile_type7(&sorted, 1.0 - alpha),
            rhat: split_rhat(&views),
            ess_bulk: ess_bulk(&views),
        });
    }
    Ok(out)
}

/// Draws of one additive predictor evaluated at `n_new` new covariate
/// points. `inputs` supplies one entry per design block, in
/// specification order (empty for an intercept-only predictor).
/// Returns a (total draws) x (new observations) matrix.
pub fn predictor_draws(
    spec: &ModelSpec,
    chains: &[ChainDraws],
    pred_id: usize,
    inputs: &[BlockInput],
    n_new: usize,
    warnings: &mut Vec<String>,
) -> Result<Array2<f64>> {
    let pred = spec.predictor(pred_id).ok_or_else(|| Error::InvalidArgument {
        name: "pred_id".into(),
        reason: format!("predictor {pred_id} is not part of this model"),
    })?;
    if inputs.len() != pred.blocks.len() {
        return Err(Error::DimensionMismatch {
            context: format!("prediction inputs for predictor {pred_id}"),
            expected: pred.blocks.len(),
            got: inputs.len(),
        });
    }
    // Assemble [1 | B_1 | ... | B_K] at the new covariate values.
    let mut bases = Vec::with_capacity(inputs.len());
    for (block, input) in pred.blocks.iter().zip(inputs) {
        let b = block.basis_at(input, warnings)?;
        if b.nrows() != n_new {
            return Err(Error::DimensionMismatch {
                context: format!("rows of prediction input for `{}`", block.label),
                expected: n_new,
                got: b.nrows(),
            });
        }
        bases.push(b);
    }
    let p_total = 1 + pred.blocks.iter().map(|b| b.n_coef()).sum::<usize>();
    let mut design = Array2::<f64>::zeros((n_new, p_total));
    design.column_mut(0).fill(1.0);
    let mut col = 1usize;
    for b in &bases {
        design.slice_mut(ndarray::s![.., col..col + b.ncols()]).assign(b);
        col += b.ncols();
    }

    let names = &chains[0].parameter_names;
    let start = names
        .iter()
        .position(|n| n == &format!("pred{pred_id}.intercept"))
        .expect("stored draws contain the predictor's intercept");
    let rows_total: usize = chains.iter().map(|c| c.values.nrows()).sum();
    let mut eta = Array2::<f64>::zeros((rows_total, n_new));
    let mut row0 = 0usize;
    for c in chains {
        let sub = c.values.slice(ndarray::s![.., start..start + p_total]);
        let part = sub.dot(&design.t());
        eta.slice_mut(ndarray::s![row0..row0 + part.nrows(), ..]).assign(&part);
        row0 += part.nrows();
    }
    Ok(eta)
}

/// Draws of the conditional quantile curve on the response scale:
/// the inverse logit of the continuous-part predictor.
pub fn quantile_curve_draws(
    spec: &ModelSpec,
    chains: &[ChainDraws],
    inputs: &[BlockInput],
    n_new: usize,
    warnings: &mut Vec<String>,
) -> Result<Array2<f64>> {
    Ok(predictor_draws(spec, chains, 2, inputs, n_new, warnings)?.mapv(logistic))
}

/// Draws of the boundary probabilities at new covariate values. Returns
/// `(p_zero, p_one)`; a boundary absent from the model yields zeros.
pub fn boundary_prob_draws(
    spec: &ModelSpec,
    chains: &[ChainDraws],
    inputs0: Option<&[BlockInput]>,
    inputs1: Option<&[BlockInput]>,
    n_new: usize,
    warnings: &mut Vec<String>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let eta0 = match (spec.discrete0.as_ref(), inputs0) {
        (Some(_), Some(inp)) => Some(predictor_draws(spec, chains, 0, inp, n_new, warnings)?),
        (None, None) => None,
        (Some(_), None) => {
            return Err(Error::InvalidArgument {
                name: "inputs0".into(),
                reason: "the model has a zero part; supply its covariates".into(),
            })
        }
        (None, Some(_)) => {
            return Err(Error::InvalidArgument {
                name: "inputs0".into(),
                reason: "the model has no zero part".into(),
            })
        }
    };
    let eta1 = match (spec.discrete1.as_ref(), inputs1) {
        (Some(_), Some(inp)) => Some(predictor_draws(spec, chains, 1, inp, n_new, warnings)?),
        (None, None) => None,
        (Some(_), None) => {
            return Err(Error::InvalidArgument {
                name: "inputs1".into(),
                reason: "the model has a one part; supply its covariates".into(),
            })
        }
        (None, Some(_)) => {
            return Err(Error::InvalidArgument {
                name: "inputs1".into(),
                reason: "the model has no one part".into(),
            })
        }
    };
    let rows_total: usize = chains.iter().map(|c| c.values.nrows()).sum();
    let shape = (rows_total, n_new);
    let mut p0 = Array2::<f64>::zeros(shape);
    let mut p1 = Array2::<f64>::zeros(shape);
    for r in 0..shape.0 {
        for c in 0..shape.1 {
            let e0 = eta0.as_ref().map(|e| e[(r, c)]);
            let e1 = eta1.as_ref().map(|e| e[(r, c)]);
            match (e0, e1) {
                (Some(a), Some(b)) => {
                    let denom = crate::special::log_sum_exp(&[0.0, a, b]);
                    p0[(r, c)] = (a - denom).exp();
                    p1[(r, c)] = (b - denom).exp();
                }
                (Some(a), None) => p0[(r, c)] = logistic(a),
                (None, Some(b)) => p1[(r, c)] = logistic(b),
                (None, None) => {}
            }
        }
    }
    Ok((p0, p1))
}

/// Column means of a draws-by-points matrix (posterior mean curve).
pub fn column_means(draws: &ArrayView2<f64>) -> Array1<f64> {
    draws.mean_axis(Axis(0)).expect("at least one draw")
}

/// Per-column equal-tailed interval bounds of mass `prob`.
pub fn column_interval(draws: &ArrayView2<f64>, prob: f64) -> (Array1<f64>, Array1<f64>) {
    let alpha = (1.0 - prob) / 2.0;
    let mut lo = Array1::zeros(draws.ncols());
    let mut hi = Array1::zeros(draws.ncols());
    for c in 0..draws.ncols() {
        let mut v = draws.column(c).to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lo[c] = quantile_type7(&v, alpha);
        hi[c] = quantile_type7(&v, 1.0 - alpha);
    }
    (lo, hi)
}

/// Root mean squared difference between two curves.
pub fn rmse(est: &ArrayView1<f64>, truth: &ArrayView1<f64>) -> f64 {
    assert_eq!(est.len(), truth.len(), "curves must share a grid");
    let s: f64 = est.iter().zip(truth.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    (s / est.len() as f64).sqrt()
}

/// Per-draw root mean squared error of a predicted curve against the
/// truth on a shared grid: one entry per posterior draw.
pub fn rmse_curve(truth: &ArrayView1<f64>, draws: &ArrayView2<f64>) -> Array1<f64> {
    assert_eq!(draws.ncols(), truth.len(), "draws must match the grid");
    Array1::from_shape_fn(draws.nrows(), |r| rmse(&draws.row(r), truth))
}

/// Coverage aggregated as in a replicate experiment: for each replicate's
/// draws, a per-point indicator that the equal-tailed `prob` interval
/// covers the truth; indicators averaged over replicates, then points.
pub fn coverage_rate(replicate_draws: &[ArrayView2<f64>], truth: &ArrayView1<f64>, prob: f64) -> f64 {
    assert!(!replicate_draws.is_empty(), "coverage needs at least one replicate");
    let total: f64 = replicate_draws
        .iter()
        .map(|draws| pointwise_coverage(draws, truth, prob))
        .sum();
    total / replicate_draws.len() as f64
}

/// Fraction of grid points whose equal-tailed posterior interval of mass
/// `prob` contains the true value.
pub fn pointwise_coverage(draws: &ArrayView2<f64>, truth: &ArrayView1<f64>, prob: f64) -> f64 {
    assert_eq!(draws.ncols(), truth.len(), "truth must match the grid");
    let (lo, hi) = column_interval(draws, prob);
    let hits = truth
        .iter()
        .enumerate()
        .filter(|(i, t)| lo[*i] <= **t && **t <= hi[*i])
        .count();
    hits as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn quantile_type7_known_values() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_type7(&x, 0.0), 1.0);
        assert_eq!(quantile_type7(&x, 1.0), 5.0);
        assert_eq!(quantile_type7(&x, 0.5), 3.0);
        assert_eq!(quantile_type7(&x, 0.25), 2.0);
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&y, 0.5), 2.5);
        assert!((quantile_type7(&y, 0.9) - 3.7).abs() < 1e-12);
    }

    fn gaussian_chains(m: usize, n: usize, shift: f64, seed: u64) -> Vec<Array1<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|j| {
                Array1::from_shape_fn(n, |_| {
                    rng.sample::<f64, _>(StandardNormal) + shift * j as f64
                })
            })
            .collect()
    }

    #[test]
    fn rhat_near_one_for_mixed_chains_and_large_for_shifted() {
        let good = gaussian_chains(4, 2000, 0.0, 1);
        let views: Vec<ArrayView1<f64>> = good.iter().map(|c| c.view()).collect();
        let r = split_rhat(&views);
        assert!((r - 1.0).abs() < 0.01, "iid chains should give rhat ~ 1, got {r}");

        let bad = gaussian_chains(4, 2000, 5.0, 2);
        let views: Vec<ArrayView1<f64>> = bad.iter().map(|c| c.view()).collect();
        let r = split_rhat(&views);
        assert!(r > 2.0, "shifted chains should give a large rhat, got {r}");

        let constant = vec![Array1::from_elem(100, 3.0); 4];
        let views: Vec<ArrayView1<f64>> = constant.iter().map(|c| c.view()).collect();
        assert_eq!(split_rhat(&views), 1.0);
    }

    #[test]
    fn rhat_detects_within_chain_drift() {
        // Two halves at different levels inside each chain.
        let chains: Vec<Array1<f64>> = (0..4)
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(10 + j);
                Array1::from_shape_fn(1000, |i| {
                    rng.sample::<f64, _>(StandardNormal) + if i < 500 { 0.0 } else { 4.0 }
                })
            })
            .collect();
        let views: Vec<ArrayView1<f64>> = chains.iter().map(|c| c.view()).collect();
        assert!(split_rhat(&views) > 1.5);
    }

    #[test]
    fn ess_of_independent_draws_is_near_total() {
        let chains = gaussian_chains(4, 4000, 0.0, 3);
        let views: Vec<ArrayView1<f64>> = chains.iter().map(|c| c.view()).collect();
        let ess = ess_bulk(&views);
        let total = 16000.0;
        assert!(ess > 0.8 * total, "iid ESS {ess} should be near {total}");
        assert!(ess <= total);
    }

    #[test]
    fn ess_of_autocorrelated_chain_shrinks_by_the_right_factor() {
        // AR(1) with coefficient 0.9: asymptotic efficiency (1-phi)/(1+phi) = 1/19.
        let phi: f64 = 0.9;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chains: Vec<Array1<f64>> = (0..4)
            .map(|_| {
                let mut x = 0.0;
                Array1::from_shape_fn(8000, |_| {
                    x = phi * x + (1.0 - phi * phi).sqrt() * rng.sample::<f64, _>(StandardNormal);
                    x
                })
            })
            .collect();
        let views: Vec<ArrayView1<f64>> = chains.iter().map(|c| c.view()).collect();
        let ess = ess_bulk(&views);
        let ratio = ess / 32000.0;
        let want = (1.0 - phi) / (1.0 + phi);
        assert!(
            ratio > 0.5 * want && ratio < 2.0 * want,
            "AR(1) efficiency {ratio} should be near {want}"
        );
    }

    #[test]
    fn ess_edge_cases() {
        let constant = vec![Array1::from_elem(100, 2.5); 4];
        let views: Vec<ArrayView1<f64>> = constant.iter().map(|c| c.view()).collect();
        assert_eq!(ess_bulk(&views), 400.0);

        let frozen: Vec<Array1<f64>> =
            (0..4).map(|j| Array1::from_elem(100, j as f64)).collect();
        let views: Vec<ArrayView1<f64>> = frozen.iter().map(|c| c.view()).collect();
        assert_eq!(ess_bulk(&views), 4.0);
    }

    #[test]
    fn interval_and_coverage_are_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n_points = 1000;
        let n_draws = 2000;
        let draws =
            Array2::from_shape_fn((n_draws, n_points), |_| rng.sample::<f64, _>(StandardNormal));
        // Truth drawn from the same distribution the intervals estimate:
        // a calibrated 95% interval covers it 95% of the time.
        let truth =
            Array1::from_shape_fn(n_points, |_| rng.sample::<f64, _>(StandardNormal));
        let cov = pointwise_coverage(&draws.view(), &truth.view(), 0.95);
        assert!((cov - 0.95).abs() < 0.03, "coverage {cov} should be near 0.95");
        let far = Array1::<f64>::from_elem(n_points, 10.0);
        assert_eq!(pointwise_coverage(&draws.view(), &far.view(), 0.95), 0.0);
    }

    #[test]
    fn rmse_of_matching_curves_is_zero() {
        let a = array![1.0, 2.0, 3.0];
        let b = array![1.0, 2.0, 4.0];
        assert_eq!(rmse(&a.view(), &a.view()), 0.0);
        assert!((rmse(&a.view(), &b.view()) - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rmse_curve_offset_and_loop_oracle() {
        let truth = array![0.2, 0.4, 0.6, 0.8];
        // A constant offset c gives RMSE exactly |c|.
        let mut draws = Array2::zeros((3, 4));
        for (r, c) in [(0usize, 0.1), (1, -0.25), (2, 0.0)] {
            for j in 0..4 {
                draws[(r, j)] = truth[j] + c;
            }
        }
        let got = rmse_curve(&truth.view(), &draws.view());
        for (g, want) in got.iter().zip([0.1, 0.25, 0.0]) {
            assert!((g - want).abs() < 1e-12);
        }
        // Random case against a naive double loop.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let draws = Array2::from_shape_fn((5, 4), |_| rng.sample::<f64, _>(StandardNormal));
        let got = rmse_curve(&truth.view(), &draws.view());
        for r in 0..5 {
            let mut s = 0.0;
            for j in 0..4 {
                let d = draws[(r, j)] - truth[j];
                s += d * d;
            }
            assert!((got[r] - (s / 4.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn coverage_rate_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let reps: Vec<Array2<f64>> = (0..3)
            .map(|_| Array2::from_shape_fn((500, 10), |_| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let views: Vec<_> = reps.iter().map(|r| r.view()).collect();
        let inside = Array1::<f64>::zeros(10);
        assert_eq!(coverage_rate(&views, &inside.view(), 0.95), 1.0);
        let outside = Array1::<f64>::from_elem(10, 50.0);
        assert_eq!(coverage_rate(&views, &outside.view(), 0.95), 0.0);
    }
}
