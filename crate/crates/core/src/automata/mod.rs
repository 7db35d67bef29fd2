//! Succinct automata for network relations and bit-vector models.

pub mod bv;
pub mod fixed;
pub mod float;
pub mod nfa;

pub use nfa::{
    accepted_words, accepts, intersect, is_empty, union, Budget, Emptiness, ExplicitNfa, Lift, Product,
    Stats, SuccinctNfa, Symbol, Union,
};
