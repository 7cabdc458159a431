//! Recursive smooth minimum approximation, admissible-cone sampling,
//! property campaigns and translator-soliton operator checks.

pub mod approx;
pub mod cli;
pub mod domains;
pub mod error;
pub mod geometry;
pub mod properties;

pub use approx::{
    min_n, mu2, mu2_grad, mu2_hess, mun, mun_bruteforce, mun_eval, mun_grad, ApproxConfig,
    EvalResult, Point, SubsetTable,
};
pub use domains::{
    feasibility_bound, in_a, in_aminus, lambda_lower, sample_a, sample_aminus, DomainSpec,
};
pub use error::{Error, Result};
pub use geometry::{
    drift_laplacian, grim_reaper_product, operator_samples, solve_bowl, two_convexity_ratio_of,
    BowlProfile, OperatorSample,
};
pub use properties::{
    check_cor25, check_lemma23, check_lemma24, check_lemma26, check_lemma27, CheckStat,
    PropertyReport,
};
