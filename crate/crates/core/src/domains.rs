//! Admissible cones and seeded samplers.
//!
//! `A_n` is the set of `x` in `[-1, 1]^n` with `m = sum x_i > 0` and
//! `x_k + x_l >= beta * m` for every pair `k != l`; `A_n^-` additionally asks
//! `min_n(x) <= -alpha * m`. Only the two smallest coordinates matter for the
//! pair condition.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::Point;
use crate::error::{Error, Result};

/// Slack applied to every membership inequality, so witnesses that sit on the
/// boundary are accepted.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Consecutive rejected draws before a sampler gives up.
pub const STARVATION_LIMIT: u64 = 1_000_000;

/// Box draws observed before the acceptance rate is judged.
const ACCEPTANCE_PROBE: u64 = 10_000;
/// Below this acceptance rate the box sampler hands over to the witness family.
const MIN_ACCEPTANCE: f64 = 1e-3;

/// Initial relative spread of the positive coordinates around the witness level.
const WITNESS_SPREAD: f64 = 0.5;
/// Consecutive failures at one spread before the spread is halved.
const FAILURES_PER_LEVEL: u64 = 64;
/// After this many halvings the spread is taken as exactly zero.
const MAX_LEVEL: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl DomainSpec {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadDimension { n, min: 2 });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} is not in (0, 1)")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", format!("{beta} is not in (0, 1)")));
        }
        Ok(Self { n, alpha, beta })
    }

    /// Same `(alpha, beta)` in another dimension.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    /// Smallest slack of the box and pair constraints. Does not test `m > 0`.
    pub fn margin_a(&self, x: &Point) -> f64 {
        let Some((a, b)) = x.two_smallest() else {
            return f64::NEG_INFINITY;
        };
        let m = x.sum();
        let abs_max = x.coords().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        (1.0 - abs_max).min(a + b - self.beta * m)
    }

    /// `margin_a` combined with the slack of `min_n(x) <= -alpha m`.
    pub fn margin_aminus(&self, x: &Point) -> f64 {
        let Some((a, _)) = x.two_smallest() else {
            return f64::NEG_INFINITY;
        };
        self.margin_a(x).min(-self.alpha * x.sum() - a)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.len() == self.n && x.sum() > 0.0 && self.margin_a(x) >= -MEMBERSHIP_SLACK
    }

    pub fn contains_minus(&self, x: &Point) -> bool {
        x.len() == self.n && x.sum() > 0.0 && self.margin_aminus(x) >= -MEMBERSHIP_SLACK
    }

    /// Errors unless `A_n^-` is nonempty for this spec.
    pub fn check_aminus_feasible(&self) -> Result<()> {
        if self.n < 3 {
            return Ok(());
        }
        let beta_max = feasibility_bound(self.n, self.alpha)?;
        if self.beta > beta_max {
            return Err(Error::EmptyDomain {
                n: self.n,
                alpha: self.alpha,
                beta: self.beta,
                beta_max,
            });
        }
        Ok(())
    }

    /// Errors unless `A_n` is nonempty, which holds iff `beta <= 2/n`.
    pub fn check_a_feasible(&self) -> Result<()> {
        let beta_max = 2.0 / self.n as f64;
        if self.beta > beta_max {
            return Err(Error::EmptyDomain {
                n: self.n,
                alpha: self.alpha,
                beta: self.beta,
                beta_max,
            });
        }
        Ok(())
    }
}

/// Membership in `A_n`.
pub fn in_a(x: &Point, spec: &DomainSpec) -> bool {
    spec.contains(x)
}

/// Membership in `A_n^-`.
pub fn in_aminus(x: &Point, spec: &DomainSpec) -> bool {
    spec.contains_minus(x)
}

/// `beta_max = (1 - (n - 2) alpha) / (n - 1)`, the largest beta for which
/// `A_n^-` is nonempty.
pub fn feasibility_bound(n: usize, alpha: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::BadDimension { n, min: 3 });
    }
    let limit = 1.0 / (n - 2) as f64;
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is not positive")));
    }
    if alpha >= limit {
        return Err(Error::AlphaTooLarge { n, alpha, limit });
    }
    Ok((1.0 - (n - 2) as f64 * alpha) / (n - 1) as f64)
}

/// The lower bound `Lambda(alpha, delta)` on the larger-coordinate partial of
/// the kernel over `A_2^-`.
pub fn lambda_lower(alpha: f64, delta: f64) -> f64 {
    let numer = alpha * (1.0 - 2.0 * delta) + 1.0 + alpha;
    let denom = (1.0 + 4.0 * alpha * (1.0 + alpha) * (1.0 - delta)).sqrt();
    0.5 * (1.0 - numer / denom)
}

/// The boundary witness of `A_n^-` at level `lambda`:
/// `(-(n-1) alpha lambda / (1 + alpha), lambda, ..., lambda)`.
pub fn witness(n: usize, alpha: f64, lambda: f64) -> Point {
    let mut c = vec![lambda; n];
    c[0] = -((n - 1) as f64) * alpha * lambda / (1.0 + alpha);
    Point::new(c)
}

/// Points drawn uniformly from `[-1, 1]^n` and kept if they lie in `A_n`.
///
/// If fewer than 0.1% of the first 10^4 box draws are accepted the sampler
/// switches, for the rest of the call, to the perturbed witness family used by
/// [`sample_aminus`] with the negative coordinate allowed anywhere up to the
/// smallest positive one. Draws are sequential, so the first `k` points do not
/// depend on `count`.
pub fn sample_a(spec: &DomainSpec, seed: u64, count: usize) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    spec.check_a_feasible()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0u64;
    let mut accepted = 0u64;
    let mut consecutive = 0u64;
    let mut use_box = true;
    let mut family = WitnessFamily::new(*spec, false);

    while out.len() < count {
        if use_box {
            let p = Point::new((0..spec.n).map(|_| rng.gen_range(-1.0..=1.0)).collect());
            attempts += 1;
            if spec.contains(&p) {
                accepted += 1;
                consecutive = 0;
                out.push(p);
            } else {
                consecutive += 1;
            }
            if attempts == ACCEPTANCE_PROBE && (accepted as f64) < MIN_ACCEPTANCE * attempts as f64 {
                use_box = false;
                consecutive = 0;
            }
        } else {
            match family.draw(&mut rng) {
                Some(p) if spec.contains(&p) => {
                    consecutive = 0;
                    out.push(p);
                }
                _ => consecutive += 1,
            }
        }
        if consecutive >= STARVATION_LIMIT {
            return Err(Error::SamplerStarved { draws: consecutive });
        }
    }
    Ok(out)
}

/// Points of `A_n^-` drawn from a perturbation of the boundary witness family.
///
/// Each draw picks a level `lambda` in `(0, (1 + alpha)/(n - 1)]`, spreads the
/// `n - 1` positive coordinates around it, then draws the negative coordinate
/// uniformly from the interval that the alpha, beta and box constraints leave
/// open, and finally shuffles the coordinates. When draws keep failing the
/// spread shrinks toward the exact witness, which lies in the cone whenever
/// `beta <= beta_max`.
pub fn sample_aminus(spec: &DomainSpec, seed: u64, count: usize) -> Result<Vec<Point>> {
    spec.check_aminus_feasible()?;
    let mut out = Vec::with_capacity(count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family = WitnessFamily::new(*spec, true);
    let mut consecutive = 0u64;
    while out.len() < count {
        match family.draw(&mut rng) {
            Some(p) if spec.contains_minus(&p) => {
                consecutive = 0;
                out.push(p);
            }
            _ => {
                consecutive += 1;
                if consecutive >= STARVATION_LIMIT {
                    return Err(Error::SamplerStarved { draws: consecutive });
                }
            }
        }
    }
    Ok(out)
}

struct WitnessFamily {
    spec: DomainSpec,
    negative: bool,
    level: u32,
    failures: u64,
}

impl WitnessFamily {
    fn new(spec: DomainSpec, negative: bool) -> Self {
        Self {
            spec,
            negative,
            level: 0,
            failures: 0,
        }
    }

    fn spread(&self) -> f64 {
        if self.level >= MAX_LEVEL {
            0.0
        } else {
            WITNESS_SPREAD * 0.5f64.powi(self.level as i32)
        }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> Option<Point> {
        let p = self.try_draw(rng);
        if p.is_some() {
            self.failures = 0;
        } else {
            self.failures += 1;
            if self.failures >= FAILURES_PER_LEVEL {
                self.failures = 0;
                self.level = (self.level + 1).min(MAX_LEVEL);
            }
        }
        p
    }

    fn try_draw(&self, rng: &mut ChaCha8Rng) -> Option<Point> {
        let DomainSpec { n, alpha, beta } = self.spec;
        let lambda_max = if n >= 3 {
            ((1.0 + alpha) / (n - 1) as f64).min(1.0)
        } else {
            1.0
        };
        let lambda = lambda_max * (1.0 - rng.gen::<f64>());
        let eps = self.spread();
        let mut ys = Vec::with_capacity(n);
        for _ in 1..n {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            let y = (lambda * (1.0 + eps * u)).min(1.0);
            if y <= 0.0 {
                return None;
            }
            ys.push(y);
        }
        let total: f64 = ys.iter().sum();
        let (y1, y2) = two_smallest(&ys);

        let mut lo = (-1.0f64).max((beta * total - y1) / (1.0 - beta));
        let pair_cap = if n >= 3 { (y1 + y2) / beta - total } else { f64::INFINITY };
        let hi = if self.negative {
            (-alpha * total / (1.0 + alpha)).min(pair_cap)
        } else {
            y1.min(pair_cap).min(1.0)
        };
        if lo <= -total {
            lo = -total * (1.0 - 1e-9);
        }
        let x1 = if lo <= hi {
            lo + (hi - lo) * rng.gen::<f64>()
        } else if lo - hi <= MEMBERSHIP_SLACK * total {
            hi
        } else {
            return None;
        };
        let mut coords = Vec::with_capacity(n);
        coords.push(x1);
        coords.extend_from_slice(&ys);
        coords.shuffle(rng);
        Some(Point::new(coords))
    }
}

fn two_smallest(v: &[f64]) -> (f64, f64) {
    let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
    for &x in v {
        if x < a {
            b = a;
            a = x;
        } else if x < b {
            b = x;
        }
    }
    (a, b)
}

/// Exhaustive search of the grid `{-1, -1 + step, ..., 1}^n` for members of
/// `A_n^-`. Returns the number of members and the first one found.
pub fn grid_search_aminus(spec: &DomainSpec, step: f64) -> (u64, Option<Point>) {
    let per_axis = (2.0 / step).round() as usize + 1;
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| (i as f64 * step * 1e6).round() / 1e6 - 1.0)
        .collect();
    let n = spec.n;
    let mut idx = vec![0usize; n];
    let mut coords = vec![axis[0]; n];
    let mut found = 0u64;
    let mut first = None;
    loop {
        let p = Point::new(coords.clone());
        if spec.contains_minus(&p) {
            found += 1;
            if first.is_none() {
                first = Some(p);
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                return (found, first);
            }
            idx[d] += 1;
            if idx[d] < per_axis {
                coords[d] = axis[idx[d]];
                break;
            }
            idx[d] = 0;
            coords[d] = axis[0];
            d += 1;
        }
    }
}
