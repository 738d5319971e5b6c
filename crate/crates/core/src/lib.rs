//! Core library for a wheeled-legged box-carrier robot: four-bar leg
//! kinematics and design search, swerve rolling control, box perception
//! filtering, the pickup state machine, and a deterministic planar
//! simulation with a cost-of-transport evaluation harness.

pub mod config;
pub mod drive;
pub mod leg;
pub mod leg_design;
pub mod perception;
pub mod pickup;
pub mod planar;
pub mod seeding;
pub mod sim;
pub mod trials;

pub use planar::Pose2D;
