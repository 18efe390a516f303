//! Genus-3 theta characteristics, plane quartics, and period matrices.
//!
//! The crate has three layers:
//!
//! * exact mod-2 combinatorics of the 64 theta characteristics and their
//!   Steiner complexes ([`chars`], [`steiner`]);
//! * exact polynomial algebra of plane quartics, their bitangents, and the
//!   associated determinantal identities, generic over [`scalar::Scalar`]
//!   ([`quartic`]);
//! * certified numerics for theta constants, theta gradients, and Jacobian
//!   Nullwerte on the Siegel upper half space, with the reconstruction of a
//!   plane quartic from a period matrix built on top ([`theta`], [`torelli`],
//!   [`verify`]).

pub mod chars;
pub mod quartic;
pub mod scalar;
pub mod steiner;
pub mod theta;
pub mod torelli;
pub mod verify;
