pub mod reference;
pub mod form;
pub mod tensor;
pub mod cases;
pub mod runtime;
pub mod codegen;
pub mod bench;
pub mod cli;
