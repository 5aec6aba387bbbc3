pub mod arena;
pub mod check;
pub mod gr1;
pub mod randspec;
pub mod sim;
pub mod speclang;
pub mod workdelivery;
