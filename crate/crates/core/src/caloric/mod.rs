//! Heat semigroup, caloric function-space norms and the Duhamel/Picard oracle.

pub mod heat;
pub mod norms;
pub mod picard;

pub use heat::{heat_semigroup, heat_semigroup_with_far};
pub use norms::{
    bmo_inv_norm, caloric_besov_proxy, koch_tataru_from_points, koch_tataru_norm, koch_tataru_points,
    koch_tataru_profile, CaloricConfig, KtPoint, NormReport,
};
pub use picard::{bilinear_duhamel, picard_mild_solve, PicardConfig, PicardSolution};
