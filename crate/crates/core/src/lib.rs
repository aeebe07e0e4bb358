pub mod acceptance;
pub mod accordion;
pub mod beta;
pub mod conservativity;
pub mod gen;
pub mod lambda;
pub mod lincomb;
pub mod resource;
pub mod semiring;
pub mod taylor;
