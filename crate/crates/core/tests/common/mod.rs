#![allow(dead_code)]
pub mod nonlinear;
pub mod shooting;
