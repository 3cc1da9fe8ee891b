pub mod auction;
pub mod bench;
pub mod datasets;
pub mod hungarian;
pub mod io;
pub mod model;
pub mod netsimplex;
pub mod oracle;
pub mod scaling;
