//! Decremental connectivity and 2-edge-connectivity with constant-time
//! queries, built on a randomized multi-level sparse certificate.

pub mod bench;
pub mod boundary;
pub mod certificate;
pub mod cut;
pub mod error;
pub mod frontend;
pub mod ett;
pub mod gen;
pub mod graph;
pub mod hdt;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod random;
pub mod replay;
pub mod sketch;
pub mod tracker;

pub use certificate::{CertificateParams, SelfCheckReport};
pub use error::{Error, Result};
pub use frontend::{DecrementalConnectivity, FinalReport, SplitNotification};
pub use graph::{DynamicGraph, EdgeId, IndexedSubgraph, SubgraphMask, Vertex};
