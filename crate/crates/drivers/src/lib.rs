//! REST drivers binding the unified northbound API to real controllers.
//!
//! Two drivers live here: [`OnosDriver`] for the ONOS REST interface and
//! [`OdlDriver`] for the OpenDaylight RESTCONF interface. Both translate the
//! controller-neutral model from `umbrella-core` into their controller's wire
//! dialect and back; applications written against the `Driver` trait run on
//! either without modification.
//!
//! Each dialect is pinned by committed JSON documents in [`fixtures`]. Render
//! functions must reproduce those bodies byte for byte, so any wire-format
//! change shows up as a fixture diff.

mod http;

pub mod fixtures;
pub mod odl;
pub mod onos;

#[cfg(test)]
mod testgen;

pub use odl::OdlDriver;
pub use onos::OnosDriver;
