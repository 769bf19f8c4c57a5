//! Abduction with penalties over normal logic programs: parsing, grounding,
//! stable models, weak constraints, and penalization abduction problems
//! solved by translation to programs with weak constraints.

pub mod abduction;
pub mod cli;
pub mod encodings;
pub mod ground;
pub mod model;
pub mod parser;
pub mod solver;
pub mod stable;
pub mod weak;
