//! The two-variable smoothing kernel and its recursive n-variable extension.
//!
//! The kernel is
//!
//! ```text
//! mu(a, b) = (a + b)/2 - sqrt(((a - b)/2)^2 + delta*a*b),    0 < delta < 1/2
//! ```
//!
//! and for `n >= 3` the approximation averages the kernel over every way of
//! splitting off one coordinate:
//!
//! ```text
//! mu^n(x) = (1/n) * sum_i mu(x_i, mu^{n-1}(x without x_i))
//! ```
//!
//! Evaluated literally this recursion touches `n!/(n-k)!` nodes at depth `k`.
//! [`SubsetTable`] memoizes it over coordinate subsets keyed by bitmask, so a
//! size-`k` subproblem is solved exactly once. The same subset DAG carries the
//! reverse-mode gradient and the forward-over-reverse Hessian in [`mun_eval`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default cap on `n` for the subset table (`2^n` entries).
pub const DEFAULT_MAX_DIM: usize = 24;

/// Largest `n` accepted by the naive recursion in [`mun_bruteforce`].
pub const BRUTEFORCE_MAX_DIM: usize = 9;

/// Dimension and smoothing parameter for `mu^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxConfig {
    n: usize,
    delta: f64,
    max_dim: usize,
}

impl ApproxConfig {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadDimension { n, min: 2 });
        }
        check_delta(delta)?;
        Ok(Self {
            n,
            delta,
            max_dim: DEFAULT_MAX_DIM,
        })
    }

    /// Overrides the dimension cap. The cap cannot exceed the bitmask width.
    pub fn with_max_dim(mut self, cap: usize) -> Self {
        self.max_dim = cap.min(usize::BITS as usize - 1);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if self.n > self.max_dim {
            return Err(Error::DimensionTooLarge {
                n: self.n,
                cap: self.max_dim,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

/// An ordered tuple of reals. The coordinate sum is always recomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `m`, the sum of the coordinates.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the smallest coordinate (first one on ties).
    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.0.iter().enumerate() {
            if best.map_or(true, |b| v < self.0[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// The deletion view with coordinate `i` removed.
    pub fn without(&self, i: usize) -> Point {
        let mut c = Vec::with_capacity(self.0.len().saturating_sub(1));
        c.extend_from_slice(&self.0[..i]);
        c.extend_from_slice(&self.0[i + 1..]);
        Point(c)
    }

    pub fn scaled(&self, t: f64) -> Point {
        Point(self.0.iter().map(|v| v * t).collect())
    }

    /// The two smallest coordinates, ascending.
    pub fn two_smallest(&self) -> Option<(f64, f64)> {
        if self.0.len() < 2 {
            return None;
        }
        let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
        for &v in &self.0 {
            if v < a {
                b = a;
                a = v;
            } else if v < b {
                b = v;
            }
        }
        Some((a, b))
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Value, gradient and Hessian of `mu^n` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

/// The exact minimum `min_n(x)`.
pub fn min_n(x: &Point) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(x.coords().iter().copied().fold(f64::INFINITY, f64::min))
}

/// Unchecked kernel arithmetic shared by every evaluator.
pub(crate) mod kernel {
    /// Kernel partials at one node: `mu_{y1}, mu_{y2}` and the Hessian entries.
    #[derive(Debug, Clone, Copy)]
    pub struct Partials {
        pub g1: f64,
        pub g2: f64,
        pub h11: f64,
        pub h12: f64,
        pub h22: f64,
    }

    #[inline]
    pub fn value(a: f64, b: f64, delta: f64) -> f64 {
        let half_diff = 0.5 * (a - b);
        let radicand = (half_diff * half_diff + delta * (a * b)).max(0.0);
        let root = radicand.sqrt();
        let half_sum = 0.5 * (a + b);
        if half_sum > 0.0 {
            // (s/2)^2 - radicand = (1 - delta) a b, so this avoids cancellation.
            (1.0 - delta) * (a * b) / (half_sum + root)
        } else {
            half_sum - root
        }
    }

    /// `(a - b)^2 + 4 delta a b`, four times the radicand.
    #[inline]
    fn disc(a: f64, b: f64, delta: f64) -> f64 {
        let d = a - b;
        (d * d + 4.0 * delta * (a * b)).max(0.0)
    }

    /// `1/2 (1 + ((1 - 2 delta) b - a) / sqrt(D))`, evaluated without
    /// cancellation when the fraction is close to -1.
    #[inline]
    fn first_partial(a: f64, b: f64, delta: f64, root: f64) -> f64 {
        let lead = a - (1.0 - 2.0 * delta) * b;
        if lead > 0.0 {
            // root^2 - lead^2 = 4 delta (1 - delta) b^2
            2.0 * delta * (1.0 - delta) * b * b / (root * (root + lead))
        } else {
            0.5 * (1.0 - lead / root)
        }
    }

    #[inline]
    pub fn grad(a: f64, b: f64, delta: f64) -> (f64, f64) {
        let root = disc(a, b, delta).sqrt();
        (
            first_partial(a, b, delta, root),
            first_partial(b, a, delta, root),
        )
    }

    #[inline]
    pub fn partials(a: f64, b: f64, delta: f64) -> Partials {
        let dsc = disc(a, b, delta);
        let root = dsc.sqrt();
        let c = 2.0 * delta * (1.0 - delta) / (dsc * root);
        Partials {
            g1: first_partial(a, b, delta, root),
            g2: first_partial(b, a, delta, root),
            h11: -c * b * b,
            h12: c * a * b,
            h22: -c * a * a,
        }
    }

    #[inline]
    pub fn is_singular(a: f64, b: f64) -> bool {
        a == 0.0 && b == 0.0
    }
}

/// The two-variable kernel `mu(x1, x2)`.
pub fn mu2(x1: f64, x2: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(kernel::value(x1, x2, delta))
}

/// Closed-form partials `(mu_{x1}, mu_{x2})`.
pub fn mu2_grad(x1: f64, x2: f64, delta: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    if kernel::is_singular(x1, x2) {
        return Err(Error::SingularPoint);
    }
    Ok(kernel::grad(x1, x2, delta))
}

/// The rank-one Hessian `2 delta (1 - delta) / D^{3/2} * [[-x2^2, x1 x2], [x1 x2, -x1^2]]`.
pub fn mu2_hess(x1: f64, x2: f64, delta: f64) -> Result<[[f64; 2]; 2]> {
    check_delta(delta)?;
    if kernel::is_singular(x1, x2) {
        return Err(Error::SingularPoint);
    }
    let p = kernel::partials(x1, x2, delta);
    Ok([[p.h11, p.h12], [p.h12, p.h22]])
}

/// Memo table of `mu^k` over every coordinate subset of a point.
///
/// Entry `mask` holds `mu^{|mask|}` of the coordinates selected by `mask`;
/// singletons hold the coordinate itself so the recursion is uniform from size 2.
#[derive(Debug, Clone)]
pub struct SubsetTable {
    coords: Vec<f64>,
    delta: f64,
    values: Vec<f64>,
}

impl SubsetTable {
    pub fn build(x: &Point, cfg: &ApproxConfig) -> Result<Self> {
        cfg.check_point(x)?;
        let coords = x.coords().to_vec();
        let n = coords.len();
        let full = 1usize << n;
        let delta = cfg.delta();
        let mut values = vec![0.0; full];
        for (i, &c) in coords.iter().enumerate() {
            values[1 << i] = c;
        }
        for mask in 3..full {
            let k = mask.count_ones();
            if k < 2 {
                continue;
            }
            let mut sum = 0.0;
            for i in bits(mask) {
                sum += kernel::value(coords[i], values[mask ^ (1 << i)], delta);
            }
            values[mask] = sum / k as f64;
        }
        Ok(Self {
            coords,
            delta,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.n()) - 1
    }

    /// `mu^{|mask|}` of the selected coordinates.
    pub fn value_of(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    /// `mu^n(x)`.
    pub fn value(&self) -> f64 {
        self.values[self.full_mask()]
    }

    /// `mu^{n-1}` of the deletion view without coordinate `i`.
    pub fn deleted(&self, i: usize) -> f64 {
        self.values[self.full_mask() ^ (1 << i)]
    }

    /// Reverse sweep: returns the gradient and the per-subset adjoints.
    fn adjoint(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let full = self.full_mask();
        let mut adj = vec![0.0; full + 1];
        let mut grad = vec![0.0; n];
        adj[full] = 1.0;
        for mask in (1..=full).rev() {
            let w = adj[mask];
            let k = mask.count_ones();
            if k == 1 {
                grad[mask.trailing_zeros() as usize] += w;
                continue;
            }
            let inv_k = 1.0 / k as f64;
            for i in bits(mask) {
                let sub = mask ^ (1 << i);
                let (a, b) = (self.coords[i], self.values[sub]);
                if kernel::is_singular(a, b) {
                    return Err(Error::SingularPoint);
                }
                let (g1, g2) = kernel::grad(a, b, self.delta);
                grad[i] += w * g1 * inv_k;
                adj[sub] += w * g2 * inv_k;
            }
        }
        Ok((grad, adj))
    }

    /// One forward tangent sweep along coordinate `dir` followed by the
    /// tangent of the reverse sweep; yields column `dir` of the Hessian.
    fn hessian_column(&self, adj: &[f64], dir: usize, out: &mut [f64]) {
        let n = self.n();
        let full = self.full_mask();
        let delta = self.delta;

        let mut tangent = vec![0.0; full + 1];
        tangent[1 << dir] = 1.0;
        for mask in 3..=full {
            let k = mask.count_ones();
            if k < 2 {
                continue;
            }
            let mut acc = 0.0;
            for i in bits(mask) {
                let sub = mask ^ (1 << i);
                let (g1, g2) = kernel::grad(self.coords[i], self.values[sub], delta);
                let da = if i == dir { 1.0 } else { 0.0 };
                acc += g1 * da + g2 * tangent[sub];
            }
            tangent[mask] = acc / k as f64;
        }

        out.iter_mut().for_each(|v| *v = 0.0);
        let mut adj_dot = vec![0.0; full + 1];
        for mask in (1..=full).rev() {
            let k = mask.count_ones();
            let wd = adj_dot[mask];
            if k == 1 {
                out[mask.trailing_zeros() as usize] += wd;
                continue;
            }
            let w = adj[mask];
            let inv_k = 1.0 / k as f64;
            for i in bits(mask) {
                let sub = mask ^ (1 << i);
                let p = kernel::partials(self.coords[i], self.values[sub], delta);
                let da = if i == dir { 1.0 } else { 0.0 };
                let db = tangent[sub];
                let g1_dot = p.h11 * da + p.h12 * db;
                let g2_dot = p.h12 * da + p.h22 * db;
                out[i] += (wd * p.g1 + w * g1_dot) * inv_k;
                adj_dot[sub] += (wd * p.g2 + w * g2_dot) * inv_k;
            }
        }
        debug_assert_eq!(out.len(), n);
    }
}

/// Iterates the set bits of `mask`, lowest first.
fn bits(mut mask: usize) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// `mu^n(x)` by subset dynamic programming, `O(2^n n)` kernel evaluations.
pub fn mun(x: &Point, cfg: &ApproxConfig) -> Result<f64> {
    Ok(SubsetTable::build(x, cfg)?.value())
}

/// `mu^n(x)` by the literal recursion, without memoization. Oracle for [`mun`].
pub fn mun_bruteforce(x: &Point, cfg: &ApproxConfig) -> Result<f64> {
    if x.len() != cfg.n() {
        return Err(Error::DimensionMismatch {
            expected: cfg.n(),
            got: x.len(),
        });
    }
    if cfg.n() > BRUTEFORCE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            n: cfg.n(),
            cap: BRUTEFORCE_MAX_DIM,
        });
    }
    Ok(naive(x.coords(), cfg.delta()))
}

fn naive(x: &[f64], delta: f64) -> f64 {
    if x.len() == 2 {
        return kernel::value(x[0], x[1], delta);
    }
    let mut sum = 0.0;
    let mut rest = Vec::with_capacity(x.len() - 1);
    for i in 0..x.len() {
        rest.clear();
        rest.extend(x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
        sum += kernel::value(x[i], naive(&rest, delta), delta);
    }
    sum / x.len() as f64
}

/// Value and gradient only (one reverse sweep).
pub fn mun_grad(x: &Point, cfg: &ApproxConfig) -> Result<(f64, Vec<f64>)> {
    let table = SubsetTable::build(x, cfg)?;
    let (grad, _) = table.adjoint()?;
    Ok((table.value(), grad))
}

/// Value, gradient and Hessian of `mu^n`.
///
/// The Hessian is assembled column by column from `n` forward-over-reverse
/// sweeps and is not symmetrized; [`hessian_by_gradient_differences`] gives an
/// independent check.
pub fn mun_eval(x: &Point, cfg: &ApproxConfig) -> Result<EvalResult> {
    let table = SubsetTable::build(x, cfg)?;
    let (gradient, adj) = table.adjoint()?;
    let n = table.n();
    let mut hessian = DMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for dir in 0..n {
        table.hessian_column(&adj, dir, &mut col);
        for (row, &v) in col.iter().enumerate() {
            hessian[(row, dir)] = v;
        }
    }
    Ok(EvalResult {
        value: table.value(),
        gradient,
        hessian,
    })
}

/// Central differences of the analytic gradient, step `eps^{1/3}` times the
/// length `delta^{1/4} |m|` (the largest `|x_i|` when `m = 0`).
pub fn hessian_by_gradient_differences(x: &Point, cfg: &ApproxConfig) -> Result<DMatrix<f64>> {
    let n = x.len();
    let smoothing = cfg.delta().sqrt().sqrt() * x.sum().abs();
    let scale = if smoothing > 0.0 {
        smoothing
    } else {
        x.coords().iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300)
    };
    let h = f64::EPSILON.cbrt() * scale;
    let mut out = DMatrix::zeros(n, n);
    let mut coords = x.coords().to_vec();
    for j in 0..n {
        let orig = coords[j];
        coords[j] = orig + h;
        let (_, gp) = mun_grad(&Point::new(coords.clone()), cfg)?;
        coords[j] = orig - h;
        let (_, gm) = mun_grad(&Point::new(coords.clone()), cfg)?;
        coords[j] = orig;
        let width = 2.0 * h;
        for i in 0..n {
            out[(i, j)] = (gp[i] - gm[i]) / width;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, delta: f64) -> ApproxConfig {
        ApproxConfig::new(n, delta).unwrap()
    }

    #[test]
    fn min_n_examples() {
        assert_eq!(min_n(&Point::new(vec![1.0, 2.0, 3.0])).unwrap(), 1.0);
        assert_eq!(min_n(&Point::new(vec![-0.2, 0.6, 0.6])).unwrap(), -0.2);
        assert_eq!(min_n(&Point::new(vec![0.3; 5])).unwrap(), 0.3);
        assert_eq!(min_n(&Point::new(vec![])), Err(Error::EmptyInput));
    }

    #[test]
    fn config_rejects_bad_inputs() {
        assert!(matches!(ApproxConfig::new(3, 0.5), Err(Error::DeltaOutOfRange(_))));
        assert!(matches!(ApproxConfig::new(3, 0.0), Err(Error::DeltaOutOfRange(_))));
        assert!(matches!(ApproxConfig::new(1, 0.1), Err(Error::BadDimension { .. })));
        let c = cfg(3, 0.1);
        assert!(matches!(
            mun(&Point::new(vec![1.0, 2.0]), &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mu2_examples() {
        assert!((mu2(1.0, 1.0, 0.04).unwrap() - 0.8).abs() < 1e-15);
        for d in [0.01, 0.2, 0.49] {
            assert_eq!(mu2(1.0, 0.0, d).unwrap(), 0.0);
        }
        // 1.5 - sqrt(0.27)
        assert!((mu2(1.0, 2.0, 0.01).unwrap() - 0.980_384_757_729_336_8).abs() < 1e-15);
        assert!(matches!(mu2(1.0, 1.0, 0.7), Err(Error::DeltaOutOfRange(_))));
    }

    #[test]
    fn mu2_negative_sum_branch_matches_definition() {
        let (a, b, d): (f64, f64, f64) = (-0.7, 0.2, 0.1);
        let direct = 0.5 * (a + b) - ((0.5 * (a - b)).powi(2) + d * a * b).sqrt();
        assert!((mu2(a, b, d).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn mu2_grad_examples() {
        let (g1, g2) = mu2_grad(1.0, 1.0, 0.04).unwrap();
        assert!((g1 - 0.4).abs() < 1e-15 && (g2 - 0.4).abs() < 1e-15);
        let (g1, g2) = mu2_grad(1.0, 0.0, 0.125).unwrap();
        assert_eq!(g1, 0.0);
        assert!((g2 - 0.875).abs() < 1e-15);
        assert_eq!(mu2_grad(0.0, 0.0, 0.1), Err(Error::SingularPoint));
    }

    #[test]
    fn mu2_grad_matches_literal_form() {
        for &(a, b, d) in &[(0.3f64, 0.9f64, 0.2f64), (-0.4, 0.8, 0.01), (0.9, 0.1, 0.3)] {
            let root = ((a - b) * (a - b) + 4.0 * d * a * b).sqrt();
            let g1 = 0.5 * (1.0 + ((1.0 - 2.0 * d) * b - a) / root);
            let g2 = 0.5 * (1.0 + ((1.0 - 2.0 * d) * a - b) / root);
            let (h1, h2) = mu2_grad(a, b, d).unwrap();
            assert!((g1 - h1).abs() < 1e-14, "{g1} {h1}");
            assert!((g2 - h2).abs() < 1e-14, "{g2} {h2}");
        }
    }

    #[test]
    fn mu2_hess_is_rank_one_and_axis_case() {
        let h = mu2_hess(1.0, 1.0, 0.04).unwrap();
        assert!((h[0][1] + h[0][0]).abs() < 1e-15);
        let h = mu2_hess(0.5, 0.0, 0.1).unwrap();
        assert_eq!(h[0][0], 0.0);
        assert_eq!(h[0][1], 0.0);
        let expect = -2.0 * 0.1 * 0.9 / 0.125 * 0.25;
        assert!((h[1][1] - expect).abs() < 1e-14);
        for &(a, b) in &[(0.3, 0.7), (-0.2, 0.9), (1.0, 0.01)] {
            let h = mu2_hess(a, b, 0.2).unwrap();
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            assert!(det.abs() <= 1e-12 * h[0][0].abs().max(h[1][1].abs()).powi(2));
        }
    }

    #[test]
    fn mun_hand_recursion() {
        let c = cfg(3, 0.04);
        let x = Point::new(vec![1.0, 1.0, 1.0]);
        let v = mun(&x, &c).unwrap();
        assert!((v - 0.695_060_984_680_808).abs() < 1e-14);
        assert!((mun_bruteforce(&x, &c).unwrap() - v).abs() < 1e-15);
    }

    #[test]
    fn mun_n2_is_mu2() {
        let c = cfg(2, 0.1);
        for &(a, b) in &[(0.3, 0.7), (-0.2, 0.9), (1.0, 0.0)] {
            let x = Point::new(vec![a, b]);
            assert_eq!(mun(&x, &c).unwrap(), mu2(a, b, 0.1).unwrap());
            assert_eq!(mun_bruteforce(&x, &c).unwrap(), mu2(a, b, 0.1).unwrap());
        }
    }

    #[test]
    fn mun_doubling_is_exact() {
        let c = cfg(4, 0.01);
        let x = Point::new(vec![0.2, 0.45, 0.3, 0.9]);
        assert_eq!(mun(&x.scaled(2.0), &c).unwrap(), 2.0 * mun(&x, &c).unwrap());
    }

    #[test]
    fn caps_are_enforced() {
        let c = cfg(10, 0.01);
        assert!(matches!(
            mun_bruteforce(&Point::new(vec![0.5; 10]), &c),
            Err(Error::DimensionTooLarge { cap: 9, .. })
        ));
        let c = cfg(5, 0.01).with_max_dim(4);
        assert!(matches!(
            mun(&Point::new(vec![0.5; 5]), &c),
            Err(Error::DimensionTooLarge { cap: 4, .. })
        ));
    }

    #[test]
    fn eval_symmetric_point() {
        let c = cfg(3, 0.04);
        let r = mun_eval(&Point::new(vec![1.0, 1.0, 1.0]), &c).unwrap();
        for g in &r.gradient {
            assert!((g - 0.231_686_994_893_602_7).abs() < 1e-14);
        }
    }

    #[test]
    fn eval_rejects_double_zero() {
        let c = cfg(3, 0.1);
        assert_eq!(
            mun_eval(&Point::new(vec![0.0, 0.0, 0.5]), &c),
            Err(Error::SingularPoint)
        );
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let c = cfg(4, 0.01);
        let x = Point::new(vec![-0.1, 0.4, 0.5, 0.45]);
        let r = mun_eval(&x, &c).unwrap();
        let fd = hessian_by_gradient_differences(&x, &c).unwrap();
        let scale = r.hessian.amax();
        assert!((&r.hessian - &fd).amax() <= 1e-6 * scale);
        assert!((&r.hessian - r.hessian.transpose()).amax() <= 1e-12 * scale);
    }

    #[test]
    fn deletion_views_come_from_the_table() {
        let c = cfg(4, 0.05);
        let x = Point::new(vec![0.3, 0.5, 0.2, 0.6]);
        let t = SubsetTable::build(&x, &c).unwrap();
        let c3 = cfg(3, 0.05);
        for i in 0..4 {
            assert_eq!(t.deleted(i), mun(&x.without(i), &c3).unwrap());
        }
    }
}
