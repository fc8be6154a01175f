//! Greedy approximation in the discrete Hilbert space L₂(Ω_m, μ_m) and the
//! oracles used to judge it.

mod dictionary;
mod oracle;
mod properties;
mod relaxed;
mod womp;

pub use dictionary::{DictionaryOnPoints, ZERO_COLUMN};
pub use oracle::{
    best_v_term_discrete, sigma_v_sup, threshold_v, BestVTerm, SupNormBounds, BRUTE_FORCE_CAP, LAWSON_ITERATIONS,
};
pub use relaxed::{greedy_a1_lp, GreedyMeasure, RelaxedGreedy};
pub use womp::{womp, womp_with, Selection, WompTrace};
pub use properties::{
    dirichlet_ratio, nikolskii_bound, nikolskii_check, riesz_bessel_check, up_constant, GramSource, NikolskiiReport,
    RieszBessel, UpEstimate, UpOptions,
};
