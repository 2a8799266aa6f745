//! Criterion benchmark shell; see the benches directory.
