//! Desk-scale verification toolkit for the Drinfeld curve for SL2(F_q).
//!
//! The affine curve Y : uv^q - vu^q = 1 and its projective closure
//! Z : XY^q - YX^q = Z^(q+1) are realised over explicit finite fields, with
//! exact machinery for point counts, zeta/L-polynomials, local expansions
//! and valuations at closed points, and divisor class group computations via
//! Smith normal form. The end product is a checkable certificate that the
//! divisor class group of Y has no p-torsion, cross-checked for small q by a
//! brute-force class group oracle.
//!
//! Everything is exact integer or finite-field arithmetic; no floating point
//! participates in any verified claim.

pub mod error;
mod poly;

pub mod curve;
pub mod ffield;
pub mod zeta;

pub mod localring;

pub mod clgroup;

pub use clgroup::{
    class_group_oracle, cl_y_p_torsion_oracle, gamma0_mod_p_trivial, gamma_source_group,
    smith_normal_form, verify_picy_chain, AbelianGroupStructure, AbelianPresentation,
    PicCertificate,
};
pub use curve::{AffinePoint, CurveContext, ProjectivePoint, SpecialFibrePoint};
pub use error::{Error, Result};
pub use ffield::{embed, make_field, Embedding, FieldDescriptor, FieldElement};
pub use localring::{principal_divisor, valuation, Divisor, FormRatio, Place, TruncatedSeries};
pub use zeta::{classify_extremal, hasse_weil_check, LPolynomial};
