pub mod data;
pub mod engine;
pub mod gdt;
pub mod roc;
pub mod selection;
