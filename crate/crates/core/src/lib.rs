pub mod algebra;
pub mod baseline;
pub mod chain;
pub mod conformal;
pub mod evaluation;
pub mod expr;
pub mod scene;
pub mod stats;
pub mod templates;
