//! Analysis core for auditing Android lending apps against permission
//! prohibitions.
//!
//! Everything here works on in-memory byte slices and needs only an
//! allocator: the APK container reader, the binary manifest and DEX
//! decoders, the policy and API-mapping models, the static audit
//! (violations, API usage, call-graph reachability, asymmetry
//! classification), the policy-to-permission mapping workflow and the
//! runtime evidence analysis. File formats, network clients and the command
//! line live in the `lendaudit` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod apk;
pub mod audit;
pub mod axml;
pub mod callgraph;
pub mod dex;
pub mod digest;
pub mod dynamic;
pub mod manifest;
pub mod mapper;
pub mod mapping;
pub mod permission;
pub mod pipeline;
pub mod policy;
pub mod registry;

#[cfg(test)]
pub(crate) mod testutil;
