//! Time-window unsplittable flow on a path: data model, exact oracles,
//! preprocessing, the recursive approximation with resource augmentation,
//! and a generator of hard instances from 3-dimensional matching.

pub mod approx;
pub mod exact;
pub mod gen;
pub mod greedy;
pub mod grouping;
pub mod hardness;
pub mod instance;
pub mod io;
pub mod matching;
pub mod numeric;
pub mod profile;
pub mod reductions;
