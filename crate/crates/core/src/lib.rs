pub mod encode;
pub mod gipsl;
pub mod model;
pub mod pattern;
pub mod solve;
pub mod vne;
