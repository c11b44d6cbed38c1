#![no_std]
extern crate alloc;

pub fn placeholder() -> f64 {
    libm::exp(1.0)
}
