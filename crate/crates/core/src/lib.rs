pub mod bounds;
pub mod error;
pub mod experiments;
pub mod gauss_hermite;
pub mod hpcore;
pub mod optimal;
pub mod point_sets;
pub mod rkhs;
pub mod scaled_rules;
