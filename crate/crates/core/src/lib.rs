pub mod ivp;
mod tableau;
pub mod specfun;
pub mod profile;
pub mod selfsim;
pub mod heat;
pub mod phase;
pub mod shooting;
pub mod evolve;
