pub mod ecosystem;
pub mod manifest;
pub mod model;
pub mod semver;
pub mod smell;
pub mod vuln;
