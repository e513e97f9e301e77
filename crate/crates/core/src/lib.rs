//! GPU and general-resource discovery for grid compute elements.
//!
//! The pipeline runs from the batch system to the user:
//!
//! 1. [`lrms`] asks SLURM (or a fixture emulating it) for the general
//!    resources of every node class, the way `sinfo -a -h -o "%G"` reports
//!    them.
//! 2. [`infoprovider`] wraps them into a GLUE2 computing-service record,
//!    renders the XML info document and serves it over HTTP.
//! 3. [`client`] fetches and parses that document and prints an
//!    `arcinfo`-style report.
//! 4. [`jobsubmit`] turns an XRSL job description into a SLURM batch script,
//!    with runtime environments appending `--gres` requests, and checks a
//!    request against advertised resources.
//!
//! [`gres`] holds the GRES expression grammar shared by all stages.

pub mod client;
pub mod gres;
pub mod infoprovider;
pub mod jobsubmit;
pub mod lrms;
