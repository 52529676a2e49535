//! Holds the `acceptance` integration test target, kept in its own package
//! so that it runs after every other test target of the workspace.
