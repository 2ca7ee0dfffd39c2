//! Exact finite-state computations: stationary laws, propagation, the
//! two-state closed forms, frozen-measure kernels, the modified sampler's
//! joint chain, unit-weight ladders, and enumeration oracles for `E theta_hat_n` and `L(X_n)`.

mod joint;
mod ladder;
mod oracle;
mod stationary;
mod theta;
mod two_state;

pub use joint::{
    ee_joint_kernel, ee_joint_stationary_closed_form, modified_ee_joint_kernel, two_state_joint_kernel,
};
pub use ladder::{cesaro_of_laws, unit_weight_ladder_laws};
pub use oracle::{
    cesaro_eta_sequence, eta_oracle, eta_sequence, exact_irmcmc_law, exact_irmcmc_laws,
    irmcmc_law_enumerated, EtaSequence, PATH_BUDGET,
};
pub use stationary::{propagate, propagate_all, stationary_distribution};
pub use theta::{
    geometric_mixing_check, k_theta_exact, mix_kernels, p_theta_kernel, pi_theta, truncation_terms,
};
pub use two_state::{spin_index, TwoStateAux};
