//! Exact symbolic engine for the two-coloured operad of partially planar
//! trees: canonical trees, signed compositions, the tree differential, exact
//! homology of the tree complexes, coderivation checks for open-closed
//! homotopy algebras and the comparison morphism onto the cohomology operad.

pub mod coderivation;
pub mod differential;
pub mod error;
pub mod homology;
pub mod oc_morphism;
pub mod signed;
pub mod tree;

pub use coderivation::{check_equivalence, evaluate_ocha_relation, EquivalenceReport, GradedSpace, MapKind, Structure};
pub use differential::{d_corolla_mixed, d_corolla_spatial, d_sum, d_tree};
pub use error::{ForgeError, Result};
pub use homology::{betti, euler_by_dimension, euler_characteristic, f_vector, ChainComplex, HomologyReport};
pub use oc_morphism::{
    check_chain_map, check_module_morphism, mu, mu_tree, phi_basis, verify_oc_relations, CheckReport, MuMode, PhiBasis,
};
pub use signed::{graft_planar, graft_spatial, koszul_sign, rat, ratio, relabel_action};
pub use signed::{Coef, FormalSum};
pub use tree::{
    codim_counts, corolla_l, corolla_n, enumerate_planar_rooted, enumerate_spatial_rooted, l_corolla, n_corolla,
    Colour, Tree, TreeSignature,
};
