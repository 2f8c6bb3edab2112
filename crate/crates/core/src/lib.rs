pub mod codec;
pub mod distributions;
pub mod domain;
pub mod error;
pub mod machine;
pub mod measures;
pub mod optimisers;
pub mod par;
pub mod verify;
