//! Many-copy PPT indistinguishability of bipartite states via PPT-definite
//! witnesses, and construction of minimal strongly PPT-unextendible subspaces.

pub mod bipartite;
pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod sdp;
pub mod unextendible;
pub mod witness;

pub use error::{Error, Result};
