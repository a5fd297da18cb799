//! Closed-form laws and estimates: characteristic functions, local limit
//! approximations, theta-function divisibility, jump-instant laws,
//! quasiprime asymptotics, prime-probability estimates and zeta sums.

mod charfunc;
mod delta;
mod llt;
mod quasiprime;
mod sn_prime;
mod theta;
mod zeta;

pub use charfunc::{char_func_exact, char_func_gaussian, CharFuncValue};
pub use delta::{
    binomial_half_pmf, delta_law, delta_llt, delta_prime_hit_prob, delta_tail_bound, DeltaLlt,
};
pub use llt::{
    lattice_span_characteristic, llt_gaussian, llt_sup_error, llt_window, LltEstimate, LltError,
};
pub use quasiprime::{fair_coin_quasiprime_prob, mertens_product, quasiprime_asymptotic};
pub use sn_prime::{exact_prime_prob, sn_prime_estimate, SnPrimeEstimate};
pub use theta::{
    divisibility_estimate, fair_coin_theta, poisson_gaussian_sum, theta, theta_one_sided,
    ThetaValue, THETA_CUTOFF,
};
pub use zeta::{zeta, zeta_partial_sum, ZetaPartialSum};
