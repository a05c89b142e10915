//! Finite, certified constructions of amenable, transitive, faithful actions
//! of amalgamated free products.
pub mod actions;
pub mod amalgam;
pub mod bass_serre;
pub mod config;
pub mod folner;
pub mod generic;
pub mod groups;
pub mod rational;

pub use groups::{Element, FiniteSubgroup, GroupError, GroupSpec, Homomorphism, Side, SubgroupIso, SubgroupSpec};
pub use rational::Rational;
