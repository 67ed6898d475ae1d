//! Holds the `acceptance` test target, which checks every numeric result
//! end to end. Run it with `cargo test -p lapssl-reproduction`.
