pub mod action_angle;
pub mod catalog;
pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod integrability;
pub mod lift;
pub mod phase_space;
pub mod sampling;
