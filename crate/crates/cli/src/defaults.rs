//! Every numeric default used by the command line, in one place.

pub const M: &str = "256";
pub const N: &str = "512";
pub const SIGMA: &str = "0.5";
pub const RUNS: &str = "100";
pub const SEED: &str = "1";
pub const F1: &str = "quadratic";
pub const F2: &str = "blip";
pub const KERNEL_SHAPE: &str = "circular";
pub const SCALE: &str = "sum";

pub const NU: &str = "auto";
pub const NU_RANGE: &str = "auto";
pub const CBETA: &str = "auto";
pub const J: &str = "auto";
pub const M0: &str = "3";
pub const M0_SPATIAL: &str = "3";
pub const MOMENTS: &str = "6";
pub const MODE: &str = "functional";
pub const EXECUTION: &str = "parallel";

pub const Q: &str = "2";
pub const RADIUS: &str = "1";
