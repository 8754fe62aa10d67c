//! Posets with interfaces (iposets) and their gluing/parallel algebra.
//!
//! An iposet is a finite strict partial order together with two injective
//! sequences of points: *sources* (minimal points) and *targets* (maximal
//! points). Gluing composition identifies the targets of the left operand
//! with the sources of the right one and orders every remaining left point
//! below every remaining right point; parallel composition is disjoint
//! union with concatenated interfaces.
//!
//! The crate provides
//!
//! * the algebra itself ([`Iposet`]: gluing, parallel composition,
//!   reversal) together with structural predicates ([`ClassFlags`]:
//!   series-parallel, interval, discrete, starter/terminator/symmetry,
//!   Winkowski, interface consistency),
//! * an incomplete polynomial-time isomorphism invariant (per-point
//!   in/out hashes, [`iso::VertexProfile`]), exact isomorphism checking,
//!   an in-out bisimulation check, and a concurrent isomorphism-reduced
//!   store ([`iso::IsoClassStore`]),
//! * isomorphism-reduced generators ([`enumerate`]): the memoized
//!   gluing-parallel recursion, its Winkowski refinement, sp-closure of
//!   generator sets, all posets on `n` points, iposet decoration, and
//!   closed-form counts of discrete iposets,
//! * the forbidden-substructure semi-algorithm ([`forbidden`]): induced
//!   subposet containment, the non-gluing-parallel corpus, and the
//!   minimal-obstruction search.
//!
//! Everything works on a canonical one-line text format, see
//! [`format`](mod@format).
//!
//! ```
//! use iposets::{iso, Iposet};
//!
//! // The N-shaped poset: not series-parallel, but an interval order.
//! let n = Iposet::new(4, &[(1, 3), (2, 3), (2, 4)], &[], &[])?;
//! let flags = n.classify();
//! assert!(!flags.is_sp && flags.is_interval);
//!
//! // Gluing along empty interfaces is serial composition; gluing along
//! // the one-point interfaces identifies the two points instead.
//! let bare = Iposet::singleton(false, false);
//! assert!(iso::isomorphic(&bare.glue(&bare)?, &Iposet::chain(2)));
//! let fused = Iposet::singleton(false, true).glue(&Iposet::singleton(true, false))?;
//! assert_eq!(fused.n(), 1);
//! # Ok::<(), iposets::Error>(())
//! ```

pub mod classify;
pub mod enumerate;
pub mod forbidden;
pub mod format;
pub mod iposet;
pub mod iso;

pub use classify::ClassFlags;
pub use iposet::{Error, Iposet, MAX_POINTS};
pub use iso::{IsoClassStore, VertexProfile};
