pub mod arrays;
pub mod dataflow;
pub mod loops;

pub use arrays::{collect_arrays, lastof, ArrayInfo, NameSupply};
pub use loops::{full_array_access, loop_bound, loop_defs, summarize, IndexRange, LoopBound, LoopSummary};
