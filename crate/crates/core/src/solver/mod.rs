pub mod asp;
pub mod cdcl;

pub use asp::{cost_of, AspSolver};
