//! Holds the `acceptance` integration test. Kept in its own package so it runs
//! after the unit and integration tests of the other crates.
