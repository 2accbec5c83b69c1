//! Test-only oracles and helpers shared by integration tests.
#![allow(dead_code)]

pub mod cases;
pub mod kgram;
pub mod mock_http;
pub mod naive;
pub mod planted;
pub mod programs;
pub mod s8;
pub mod synthetic;
