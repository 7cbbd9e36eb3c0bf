//! Volume and determinant calculus on finite-dimensional subspaces of
//! normed spaces, with the dynamics built on top of it: Lyapunov spectra
//! as volume growth rates, local unstable manifolds by graph transform,
//! and conditional densities of physical measures on those manifolds.
//!
//! Everything lives in ambient coordinates `R^D`; the normed-space
//! structure enters only through a norm oracle. Subspaces are spanned by
//! explicit frames, volumes are normalized so the norm unit ball of a
//! `k`-dimensional subspace has measure `omega_k` (the Euclidean unit
//! ball volume), and determinants are ratios of such volumes.
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the
//! default `std` feature for embedded use. All randomized routines take
//! explicit seeds and are deterministic for a given seed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cocycle;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod linmap;
pub mod manifold;
pub mod optim;
pub mod report;
pub mod space;
pub mod srb;
pub mod volume;

pub use error::{CoreError, Result};
pub use linmap::LinearMap;
pub use space::{Frame, InnerProductModel, NormKind, NormedSpace, ScaleMode};
pub use volume::{DetResult, VolumeEstimate};
