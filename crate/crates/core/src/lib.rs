//! Core library for profile-guided bounds-check elision over CheckLang,
//! a small imperative language with integer variables and length-carrying
//! arrays.
//!
//! The pipeline implemented here learns "safe regions" over the variables
//! that affect array indices and bounds, from executions in which every
//! access was checked, and then uses those regions to skip provably
//! redundant checks in later runs:
//!
//! * [`parser`] / [`ast`] / [`interp`] — the language front end and the
//!   dual-mode (full-check vs. bypass) tree-walking interpreter.
//! * [`depgraph`] — per-function dependency graphs over variables, arrays,
//!   and loop trip counters, plus the taint walk that derives each target
//!   array's affecting-variable set.
//! * [`geometry`] — exact-rational computational geometry: dominance,
//!   incremental convex hulls in up to eight dimensions, and the
//!   facet-normal membership test.
//! * [`region`] — safe regions in the union (Pareto frontier) and convex
//!   hull variants, the negation transform, and the integer-overflow guard.
//! * [`profiler`] — synthetic check-cost accounting and hotspot selection.
//! * [`kb`] — the persistent knowledge base and its text format.
//! * [`trace`] — execution trace records and harness input bindings.
//!
//! The crate is `no_std` + `alloc`; all file and terminal IO lives in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ast;
pub mod depgraph;
pub mod geometry;
pub mod interp;
pub mod kb;
pub mod lexer;
pub mod parser;
pub mod profiler;
pub mod region;
pub mod trace;
