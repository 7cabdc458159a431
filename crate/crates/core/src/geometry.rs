//! Rotationally symmetric translators and the curvature operators evaluated on
//! them.
//!
//! The bowl is the graph `z = u(|x|)` over `R^n`, translating with unit speed
//! in `+e_{n+1}` with upward normal, so `H = <nu, e_{n+1}> = 1/W` where
//! `W = sqrt(1 + u'^2)`. The profile ODE is
//! `u'' = (1 + u'^2)(1 - (n-1) u'/r)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{mun_eval, ApproxConfig, Point};
use crate::domains::DomainSpec;
use crate::error::{Error, Result};

/// `solve_bowl` fails when `max |H - nu_e|` exceeds this.
pub const TRANSLATOR_RESIDUAL_LIMIT: f64 = 1e-3;
/// Nodes dropped at each end of the grid by the drift Laplacian.
pub const INTERIOR_TRIM: usize = 2;
/// Minimum number of steps covered by the series start.
pub const SERIES_STEPS: usize = 10;
/// The series start always reaches at least this radius.
pub const SERIES_RADIUS: f64 = 0.25;
const SERIES_TERMS: usize = 16;
/// Relative curvature gap treated as an exact tie.
pub const TIE_TOL: f64 = 1e-12;
/// Relative gap below which a difference quotient of the gradient is replaced
/// by its limit `mu_ii - mu_ij`.
pub const NEAR_TIE_TOL: f64 = 1e-6;

const MIN_NODES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowlProfile {
    pub n: usize,
    pub step: f64,
    pub r_grid: Vec<f64>,
    pub u: Vec<f64>,
    pub u_p: Vec<f64>,
    pub u_pp: Vec<f64>,
    pub kappa_rad: Vec<f64>,
    /// Multiplicity `n - 1`.
    pub kappa_ang: Vec<f64>,
    pub h: Vec<f64>,
    pub nu_e: Vec<f64>,
    pub tau_e: Vec<f64>,
}

impl BowlProfile {
    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }

    /// Principal curvatures at node `i`, radial first.
    pub fn curvatures(&self, i: usize) -> Vec<f64> {
        let mut k = vec![self.kappa_ang[i]; self.n];
        k[0] = self.kappa_rad[i];
        k
    }

    /// `max_i |H - nu_e|`.
    pub fn translator_residual(&self) -> f64 {
        self.h
            .iter()
            .zip(&self.nu_e)
            .map(|(h, v)| (h - v).abs())
            .fold(0.0, f64::max)
    }

    /// Infimum over the grid of `(k_(1) + k_(2)) / H`.
    pub fn two_convexity_ratio(&self) -> f64 {
        (0..self.len())
            .map(|i| two_convexity_ratio_of(&self.curvatures(i)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Node indices on which the drift Laplacian is reported.
    pub fn interior(&self) -> std::ops::Range<usize> {
        INTERIOR_TRIM..self.len().saturating_sub(INTERIOR_TRIM)
    }

    /// Arclength derivative `f'/W` by centered differences (one-sided at the ends).
    pub fn arclength_derivative(&self, f: &[f64]) -> Vec<f64> {
        let d = centered_derivative(f, self.step);
        d.iter().zip(&self.u_p).map(|(df, p)| df / w(*p)).collect()
    }
}

/// `(k_(1) + k_(2)) / sum(k)` for the two smallest entries; zero when fewer
/// than two curvatures are given.
pub fn two_convexity_ratio_of(kappa: &[f64]) -> f64 {
    if kappa.len() < 2 {
        return 0.0;
    }
    let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
    for &k in kappa {
        if k < a {
            b = a;
            a = k;
        } else if k < b {
            b = k;
        }
    }
    let h: f64 = kappa.iter().sum();
    (a + b) / h
}

fn w(p: f64) -> f64 {
    (1.0 + p * p).sqrt()
}

fn rhs(n: usize, r: f64, p: f64) -> f64 {
    (1.0 + p * p) * (1.0 - (n - 1) as f64 * p / r)
}

/// Odd Taylor coefficients `p = sum_k a_k r^{2k+1}` of the profile slope.
///
/// With `q = p/r` and `s = r^2 q^2 = sum_k s_k r^{2k}`, matching powers of
/// `r^{2k}` in the ODE gives
/// `(2k + n) a_k = [k = 0] + s_k - (n-1) sum_{i=1..k} s_i a_{k-i}`.
fn series_coefficients(n: usize) -> [f64; SERIES_TERMS] {
    let nf = n as f64;
    let mut a = [0.0; SERIES_TERMS];
    let mut s = [0.0; SERIES_TERMS];
    for k in 0..SERIES_TERMS {
        if k > 0 {
            s[k] = (0..k).map(|i| a[i] * a[k - 1 - i]).sum();
        }
        let conv: f64 = (1..=k).map(|i| s[i] * a[k - i]).sum();
        let lead = if k == 0 { 1.0 } else { 0.0 };
        a[k] = (lead + s[k] - (nf - 1.0) * conv) / (2.0 * k as f64 + nf);
    }
    a
}

fn series(a: &[f64; SERIES_TERMS], r: f64) -> (f64, f64) {
    let r2 = r * r;
    let (mut u, mut p) = (0.0, 0.0);
    for k in (0..SERIES_TERMS).rev() {
        u = u * r2 + a[k] / (2 * k + 2) as f64;
        p = p * r2 + a[k];
    }
    (u * r2, p * r)
}

/// Fourth-order derivative of grid data; `odd` extends across `r = 0` by
/// `f(-r) = -f(r)`.
fn fourth_order_derivative(f: &[f64], h: f64, odd: bool) -> Vec<f64> {
    let n = f.len();
    let at = |i: isize| -> f64 {
        if i >= 0 {
            f[i as usize]
        } else if odd {
            -f[(-i) as usize]
        } else {
            f[(-i) as usize]
        }
    };
    (0..n)
        .map(|i| {
            let ii = i as isize;
            if i + 2 < n {
                (-at(ii + 2) + 8.0 * at(ii + 1) - 8.0 * at(ii - 1) + at(ii - 2)) / (12.0 * h)
            } else if i + 1 < n {
                (3.0 * f[i + 1] + 10.0 * f[i] - 18.0 * f[i - 1] + 6.0 * f[i - 2] - f[i - 3])
                    / (12.0 * h)
            } else {
                (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3]
                    + 3.0 * f[i - 4])
                    / (12.0 * h)
            }
        })
        .collect()
}

/// Second-order derivative: centered inside, one-sided at both ends.
fn centered_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n < 3 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if i + 1 == n {
                (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Integrates the bowl profile on `[0, r_max]` with uniform `step`.
///
/// The series is used on `[0, 10 step]`, RK4 on `(u, u')` beyond. `u''` is
/// taken by fourth-order differences of the integrated `u'`, so `H - nu_e`
/// measures the discretization error rather than vanishing by construction.
pub fn solve_bowl(n: usize, r_max: f64, step: f64) -> Result<BowlProfile> {
    if n < 2 {
        return Err(Error::BadDimension { n, min: 2 });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("{step} is not positive")));
    }
    if !(r_max >= SERIES_STEPS as f64 * step) || !r_max.is_finite() {
        return Err(Error::invalid(
            "r_max",
            format!("{r_max} is below {SERIES_STEPS} steps of {step}"),
        ));
    }
    let nodes = (r_max / step).round() as usize + 1;
    let r_grid: Vec<f64> = (0..nodes).map(|i| i as f64 * step).collect();
    let mut u = vec![0.0; nodes];
    let mut p = vec![0.0; nodes];
    let coeffs = series_coefficients(n);
    let start = SERIES_STEPS.max((SERIES_RADIUS / step).ceil() as usize).min(nodes - 1);
    for i in 0..=start {
        let (ui, pi) = series(&coeffs, r_grid[i]);
        u[i] = ui;
        p[i] = pi;
    }
    for i in start..nodes - 1 {
        let (r, h) = (r_grid[i], step);
        let (u0, p0) = (u[i], p[i]);
        let k1u = p0;
        let k1p = rhs(n, r, p0);
        let k2u = p0 + 0.5 * h * k1p;
        let k2p = rhs(n, r + 0.5 * h, p0 + 0.5 * h * k1p);
        let k3u = p0 + 0.5 * h * k2p;
        let k3p = rhs(n, r + 0.5 * h, p0 + 0.5 * h * k2p);
        let k4u = p0 + h * k3p;
        let k4p = rhs(n, r + h, p0 + h * k3p);
        u[i + 1] = u0 + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p[i + 1] = p0 + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    let u_pp = fourth_order_derivative(&p, step, true);

    let nf = (n - 1) as f64;
    let mut kappa_rad = Vec::with_capacity(nodes);
    let mut kappa_ang = Vec::with_capacity(nodes);
    let mut hv = Vec::with_capacity(nodes);
    let mut nu_e = Vec::with_capacity(nodes);
    let mut tau_e = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let wi = w(p[i]);
        let kr = u_pp[i] / wi.powi(3);
        let ka = if i == 0 { u_pp[0] } else { p[i] / (r_grid[i] * wi) };
        kappa_rad.push(kr);
        kappa_ang.push(ka);
        hv.push(kr + nf * ka);
        nu_e.push(1.0 / wi);
        tau_e.push(p[i] / wi);
    }
    let profile = BowlProfile {
        n,
        step,
        r_grid,
        u,
        u_p: p,
        u_pp,
        kappa_rad,
        kappa_ang,
        h: hv,
        nu_e,
        tau_e,
    };
    let residual = profile.translator_residual();
    if !(residual <= TRANSLATOR_RESIDUAL_LIMIT) {
        return Err(Error::StepTooLarge {
            step,
            residual,
            limit: TRANSLATOR_RESIDUAL_LIMIT,
        });
    }
    Ok(profile)
}

/// Principal curvatures `(cos x1, 0, ..., 0)` of the grim reaper cylinder
/// `Gamma x R^{n-1}` at abscissa `x1`.
pub fn grim_reaper_product(n: usize, x1: f64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::BadDimension { n, min: 1 });
    }
    if !(x1.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::OutOfDomain(x1));
    }
    let mut k = vec![0.0; n];
    k[0] = x1.cos();
    Ok(k)
}

/// Drift Laplacian `L f = Delta f + <e_{n+1}, grad f>` of a radial field, on
/// the nodes of [`BowlProfile::interior`].
///
/// `Delta f = (r^{n-1} W)^{-1} (r^{n-1} f'/W)'` in finite-volume form: fluxes
/// `r^{n-1}/W` at half nodes over the cell volume `W_i (r_+^n - r_-^n)/n`,
/// which is exact for quadratics and second order uniformly up to `r = 0`.
/// The drift is `tau_e f'/W` with a centered `f'`.
pub fn drift_laplacian(profile: &BowlProfile, field: &[f64]) -> Result<Vec<f64>> {
    let nodes = profile.len();
    if nodes < MIN_NODES {
        return Err(Error::GridTooShort {
            nodes,
            min: MIN_NODES,
        });
    }
    if field.len() != nodes {
        return Err(Error::DimensionMismatch {
            expected: nodes,
            got: field.len(),
        });
    }
    let h = profile.step;
    let n = profile.n;
    let e = (n - 1) as i32;
    // flux[j] sits at r = (j + 1/2) h.
    let flux: Vec<f64> = (0..nodes - 1)
        .map(|j| {
            let r = (j as f64 + 0.5) * h;
            let p = 0.5 * (profile.u_p[j] + profile.u_p[j + 1]);
            r.powi(e) / w(p)
        })
        .collect();
    Ok(profile
        .interior()
        .map(|i| {
            let wi = w(profile.u_p[i]);
            let (rp, rm) = ((i as f64 + 0.5) * h, (i as f64 - 0.5) * h);
            let volume = wi * (rp.powi(n as i32) - rm.powi(n as i32)) / n as f64;
            let lap = (flux[i] * (field[i + 1] - field[i]) - flux[i - 1] * (field[i] - field[i - 1]))
                / (h * volume);
            let drift = profile.tau_e[i] * (field[i + 1] - field[i - 1]) / (2.0 * h * wi);
            lap + drift
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSample {
    pub r: f64,
    pub h: f64,
    pub mu_n: f64,
    pub q_delta: f64,
    /// Arclength radial derivatives.
    pub grad_h: f64,
    pub grad_mu: f64,
    pub l_h: f64,
    pub l_mu: f64,
    pub l_q: f64,
    /// `|A|^2`.
    pub a2: f64,
    pub term24: f64,
    /// Radial covariant derivatives `(h_rad_rad_1, h_ang_ang_1)`.
    pub h_iik: [f64; 2],
    /// `L H + |A|^2 H`.
    pub residual18: f64,
    /// `H L mu - mu L H - H term24`.
    pub residual21: f64,
    /// `L Q + 2 <grad(H - mu), grad Q> / (H - mu)`.
    pub lhs22: f64,
    /// `H term24 / (H - mu)^2`.
    pub rhs22: f64,
}

struct NodeEval {
    mu: f64,
    grad: Vec<f64>,
    hess: nalgebra::DMatrix<f64>,
}

/// `mu^n` and derivatives at `kappa`, rescaled into the unit box if needed.
fn eval_node(kappa: &[f64], cfg: &ApproxConfig) -> Result<NodeEval> {
    let scale = kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let s = if scale > 1.0 { 1.0 / scale } else { 1.0 };
    let x = Point::new(kappa.iter().map(|k| k * s).collect());
    let r = mun_eval(&x, cfg)?;
    Ok(NodeEval {
        mu: r.value / s,
        grad: r.gradient,
        hess: r.hessian * s,
    })
}

/// `sum_ij mu_ij d_i d_j + sum_{i != j, k_i != k_j} (mu_i - mu_j)/(k_i - k_j) h_ijk^2`
/// for a rotational hypersurface: coordinate 0 radial, the rest angular, and
/// `h_0jj = h_jj0 = d_ang` by Codazzi.
fn term24(kappa: &[f64], e: &NodeEval, d_rad: f64, d_ang: f64) -> f64 {
    let n = kappa.len();
    let d: Vec<f64> = (0..n).map(|i| if i == 0 { d_rad } else { d_ang }).collect();
    let mut first = 0.0;
    for i in 0..n {
        for j in 0..n {
            first += e.hess[(i, j)] * d[i] * d[j];
        }
    }
    let mut second = 0.0;
    for j in 1..n {
        let gap = kappa[0] - kappa[j];
        let scale = kappa[0].abs().max(kappa[j].abs());
        if gap.abs() <= TIE_TOL * scale {
            continue;
        }
        let quotient = if gap.abs() <= NEAR_TIE_TOL * scale {
            e.hess[(0, 0)] - e.hess[(0, j)]
        } else {
            (e.grad[0] - e.grad[j]) / gap
        };
        second += 2.0 * quotient * d_ang * d_ang;
    }
    first + second
}

/// Operator quantities at every interior node, in grid order.
///
/// The curvature tuple at each node must lie in `A_n` with `beta` equal to the
/// profile's two-convexity ratio.
pub fn operator_samples(profile: &BowlProfile, cfg: &ApproxConfig) -> Result<Vec<OperatorSample>> {
    let n = profile.n;
    if cfg.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cfg.n(),
        });
    }
    if profile.len() < MIN_NODES {
        return Err(Error::GridTooShort {
            nodes: profile.len(),
            min: MIN_NODES,
        });
    }
    let beta = profile.two_convexity_ratio();
    // alpha plays no part in membership of A_n.
    let spec = DomainSpec { n, alpha: 0.5, beta };
    for i in 0..profile.len() {
        let k = profile.curvatures(i);
        let s = 1.0 / k.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let x = Point::new(k.iter().map(|v| v * s).collect());
        if !(beta > 0.0 && spec.contains(&x)) {
            return Err(Error::DomainViolation {
                r: profile.r_grid[i],
            });
        }
    }

    let evals: Vec<NodeEval> = (0..profile.len())
        .into_par_iter()
        .map(|i| eval_node(&profile.curvatures(i), cfg))
        .collect::<Result<_>>()?;
    let mu: Vec<f64> = evals.iter().map(|e| e.mu).collect();
    let q: Vec<f64> = mu.iter().zip(&profile.h).map(|(m, h)| m / (h - m)).collect();
    let h_minus_mu: Vec<f64> = mu.iter().zip(&profile.h).map(|(m, h)| h - m).collect();

    let grad_h = profile.arclength_derivative(&profile.h);
    let grad_mu = profile.arclength_derivative(&mu);
    let grad_q = profile.arclength_derivative(&q);
    let grad_hm = profile.arclength_derivative(&h_minus_mu);
    let d_rad = profile.arclength_derivative(&profile.kappa_rad);
    let d_ang = profile.arclength_derivative(&profile.kappa_ang);
    let l_h = drift_laplacian(profile, &profile.h)?;
    let l_mu = drift_laplacian(profile, &mu)?;
    let l_q = drift_laplacian(profile, &q)?;

    Ok(profile
        .interior()
        .enumerate()
        .map(|(k, i)| {
            let kappa = profile.curvatures(i);
            let e = &evals[i];
            let hh = profile.h[i];
            let a2: f64 = kappa.iter().map(|v| v * v).sum();
            let t24 = term24(&kappa, e, d_rad[i], d_ang[i]);
            let hm = h_minus_mu[i];
            OperatorSample {
                r: profile.r_grid[i],
                h: hh,
                mu_n: mu[i],
                q_delta: q[i],
                grad_h: grad_h[i],
                grad_mu: grad_mu[i],
                l_h: l_h[k],
                l_mu: l_mu[k],
                l_q: l_q[k],
                a2,
                term24: t24,
                h_iik: [d_rad[i], d_ang[i]],
                residual18: l_h[k] + a2 * hh,
                residual21: hh * l_mu[k] - mu[i] * l_h[k] - hh * t24,
                lhs22: l_q[k] + 2.0 * grad_hm[i] * grad_q[i] / hm,
                rhs22: hh * t24 / (hm * hm),
            }
        })
        .collect())
}
