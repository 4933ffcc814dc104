//! Exact toolkit for non-commutative arithmetic circuits.

pub mod freealgebra;
pub mod circuit;
pub mod normalize;
pub mod nisan;
pub mod hardpoly;
pub mod pathtrace;
pub mod ringtrans;
pub mod corpus;
