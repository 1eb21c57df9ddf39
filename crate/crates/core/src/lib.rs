//! A small deductive verifier for a SPARK-like language.
//!
//! The pipeline is parse ([`syntax`]) → resolve ([`sema`]) → initialization
//! flow analysis ([`flow`]) → verification conditions ([`vcgen`]) → bounded
//! solving ([`solver`]) → diagnostics ([`diagnose`]). [`interp`] is a
//! concrete reference interpreter used to replay counterexamples, and
//! [`explorer`] is a line-oriented shell for inspecting a single VC.

pub mod diagnose;
pub mod driver;
pub mod explorer;
pub mod flow;
pub mod interp;
pub mod sema;
pub mod solver;
pub mod syntax;
pub mod vcgen;

#[cfg(test)]
pub(crate) mod testing;
